use docalc::adjust::{backdoor_adjust, frontdoor_pattern};
use docalc::bn::{configurations, random_binary_bn, random_bn, random_graph, term_oracle, Assignment, Evaluator};
use docalc::corpus;
use docalc::expr::{parse_query, Condition, Mode, Slot};
use docalc::rules::{apply_rule, observation_suffices, Direction, Rule};
use docalc::{CausalGraph, Error, NodeSet, ProbTerm, Term, VarId};
use proptest::prelude::*;

const KINDS: [(Rule, Direction); 6] = [
    (Rule::R1, Direction::Forward),
    (Rule::R1, Direction::Backward),
    (Rule::R2, Direction::Forward),
    (Rule::R2, Direction::Backward),
    (Rule::R3, Direction::Forward),
    (Rule::R3, Direction::Backward),
];

/// Splits the observed nodes by `codes` into targets, actions, observations and the
/// moved set, and writes the moved set in the mode the rule expects to find it.
fn case(g: &CausalGraph, codes: &[u8], rule: Rule, dir: Direction) -> Option<(ProbTerm, NodeSet)> {
    let obs: Vec<VarId> = g.observed().iter().collect();
    let mut conds = Vec::new();
    let (mut ys, mut zs) = (Vec::new(), NodeSet::new());
    let z_mode = match (rule, dir) {
        (Rule::R1, Direction::Forward) | (Rule::R2, Direction::Backward) => Some(Mode::Observation),
        (Rule::R2, Direction::Forward) | (Rule::R3, Direction::Forward) => Some(Mode::Intervention),
        _ => None,
    };
    for (&v, c) in obs.iter().zip(codes.iter().cycle()) {
        match c % 5 {
            0 => ys.push(Slot::free(v)),
            1 => conds.push(Condition::intervene(Slot::free(v))),
            2 => conds.push(Condition::observe(Slot::free(v))),
            3 => {
                zs.insert(v);
                if let Some(mode) = z_mode {
                    conds.push(Condition { slot: Slot::free(v), mode });
                }
            }
            _ => {}
        }
    }
    if ys.is_empty() || zs.is_empty() {
        return None;
    }
    Some((Term::new(ys, conds).ok()?, zs))
}

fn inverse(dir: Direction) -> Direction {
    match dir {
        Direction::Forward => Direction::Backward,
        Direction::Backward => Direction::Forward,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn accepted_rules_are_sound_and_invertible(
        seed in any::<u64>(),
        n in 3usize..7,
        latents in 0usize..3,
        kind in 0usize..6,
        codes in prop::collection::vec(any::<u8>(), 6),
    ) {
        let g = random_graph(seed, n, 9, latents);
        let (rule, dir) = KINDS[kind];
        let Some((term, z)) = case(&g, &codes, rule, dir) else { return Ok(()) };
        let out = match apply_rule(&g, rule, dir, &term, &z) {
            Ok((out, inst)) => {
                prop_assert!(inst.reverify(&g).unwrap());
                out
            }
            Err(Error::NotApplicable { witness, .. }) => {
                prop_assert!(witness.len() >= 2);
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let (back, _) = apply_rule(&g, rule, inverse(dir), &out, &z).unwrap();
        prop_assert_eq!(&back, &term);
        let cards: Vec<usize> = (0..g.node_count()).map(|i| 2 + (i + seed as usize) % 2).collect();
        let bn = random_bn(&g, &cards, seed);
        let vars: Vec<VarId> = term.var_set().union(&out.var_set()).iter().collect();
        for b in configurations(&vars, bn.cards()) {
            let l = term_oracle(&bn, &term, &b).unwrap();
            let r = term_oracle(&bn, &out, &b).unwrap();
            prop_assert!((l - r).abs() <= 1e-10, "{} vs {}: {l} {r}", term.render(&g), out.render(&g));
        }
    }

    #[test]
    fn rule2_without_context_is_the_parent_criterion(seed in any::<u64>(), n in 2usize..7, latents in 0usize..3) {
        let g = random_graph(seed, n, 10, latents);
        let bn = random_binary_bn(&g, seed);
        let none = Assignment::new();
        for xi in g.observed().iter() {
            for xj in g.observed().iter().filter(|&v| v != xi) {
                let t = Term::simple(&[xj], &[], &[xi]).unwrap();
                let r2 = apply_rule(&g, Rule::R2, Direction::Forward, &t, &NodeSet::singleton(xi)).is_ok();
                let criterion = observation_suffices(&g, xi, xj).unwrap();
                prop_assert_eq!(r2, criterion);
                if criterion {
                    for a in 0..2 {
                        for b in 0..2 {
                            let (ya, xa) = (Assignment::of(&[(xj, b)]), Assignment::of(&[(xi, a)]));
                            let act = bn.prob(&ya, &none, &xa).unwrap();
                            let see = bn.prob(&ya, &xa, &none).unwrap();
                            prop_assert!((act - see).abs() <= 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn backdoor_sets_recheck(seed in any::<u64>(), n in 2usize..7, latents in 0usize..3) {
        let g = random_graph(seed, n, 10, latents);
        let bn = random_binary_bn(&g, seed);
        for x in g.observed().iter() {
            let xs = NodeSet::singleton(x);
            let desc = g.descendants(&xs).unwrap();
            let cut = g.cut_outgoing(&xs).unwrap();
            for y in g.observed().iter().filter(|&v| v != x) {
                let Some((s, f)) = backdoor_adjust(&g, x, y).unwrap() else { continue };
                prop_assert!(s.iter().all(|v| g.is_observed(v) && !desc.contains(v)));
                prop_assert!(cut.d_separated(&xs, &NodeSet::singleton(y), &s).unwrap());
                let mut ev = Evaluator::new(&bn);
                let q = Term::simple(&[y], &[], &[x]).unwrap();
                for b in configurations(&[x, y], bn.cards()) {
                    let v = ev.eval(&f, &b).unwrap();
                    prop_assert!((v - term_oracle(&bn, &q, &b).unwrap()).abs() <= 1e-10);
                }
            }
        }
    }
}

fn term(g: &CausalGraph, s: &str) -> ProbTerm {
    parse_query(s).unwrap().bind(g).unwrap().as_term().unwrap().clone()
}

#[test]
fn frontdoor_on_a_chain_is_plain_conditioning() {
    let g = corpus::graph("chain").unwrap();
    let (a, c) = (g.id("A").unwrap(), g.id("C").unwrap());
    let f = frontdoor_pattern(&g, a, c).unwrap().expect("B is a mediator");
    let seeing = term(&g, "P(c|a)");
    for seed in 0..50 {
        let bn = random_binary_bn(&g, seed);
        let mut ev = Evaluator::new(&bn);
        for b in configurations(&[a, c], bn.cards()) {
            let v = ev.eval(&f, &b).unwrap();
            assert!((v - term_oracle(&bn, &seeing, &b).unwrap()).abs() <= 1e-10);
        }
    }
}

#[test]
fn frontdoor_on_the_confounded_mediator_graph() {
    let g = corpus::graph("frontdoor").unwrap();
    let (x, y) = (g.id("X").unwrap(), g.id("Y").unwrap());
    assert!(backdoor_adjust(&g, x, y).unwrap().is_none());
    let f = frontdoor_pattern(&g, x, y).unwrap().expect("Z is a mediator");
    let q = term(&g, "P(y|do(x))");
    for seed in 0..50 {
        let bn = random_binary_bn(&g, seed);
        let mut ev = Evaluator::new(&bn);
        for b in configurations(&[x, y], bn.cards()) {
            assert!((ev.eval(&f, &b).unwrap() - term_oracle(&bn, &q, &b).unwrap()).abs() <= 1e-10);
        }
    }
}
