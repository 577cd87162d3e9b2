use docalc::bn::{random_binary_bn, random_graph, term_bindings, term_oracle, Evaluator};
use docalc::identify::{explain, identify, IdentifyOutcome, SearchConfig};
use docalc::{CausalGraph, ProbExpr, Term, VarId};
use proptest::prelude::*;

fn config(depth: usize) -> SearchConfig {
    SearchConfig { max_depth: depth, max_states: 20_000, ..Default::default() }
}

/// `P(y | do(x))` on a small random graph, with one or two actions.
fn random_query(seed: u64, n: usize, latents: usize, picks: &[usize]) -> (CausalGraph, ProbExpr) {
    let g = random_graph(seed, n, 7, latents);
    let obs: Vec<VarId> = g.observed().iter().collect();
    let y = obs[picks[0] % n];
    let rest: Vec<VarId> = obs.iter().copied().filter(|&v| v != y).collect();
    let mut xs = vec![rest[picks[1] % rest.len()]];
    let extra = rest[picks[2] % rest.len()];
    if picks[3].is_multiple_of(3) && !xs.contains(&extra) {
        xs.push(extra);
    }
    let q = Term::simple(&[y], &[], &xs).unwrap();
    (g, ProbExpr::Term(q))
}

fn assert_matches_oracle(g: &CausalGraph, q: &ProbExpr, formula: &ProbExpr) -> Result<(), TestCaseError> {
    let qt = q.as_term().unwrap();
    for seed in 0..100 {
        let bn = random_binary_bn(g, seed);
        let mut ev = Evaluator::new(&bn);
        for b in term_bindings(&bn, qt) {
            let v = ev.eval(formula, &b).unwrap();
            let o = term_oracle(&bn, qt, &b).unwrap();
            prop_assert!((v - o).abs() <= 1e-9, "{} = {} gives {v}, oracle {o}", q.render_with(g), formula.render_with(g));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn identified_formulas_match_the_oracle(seed in any::<u64>(), n in 2usize..6, latents in 0usize..3, picks in prop::array::uniform4(any::<usize>())) {
        let (g, q) = random_query(seed, n, latents, &picks);
        let out = identify(&g, &q, &config(8)).unwrap();
        let IdentifyOutcome::Identified(d) = out else { return Ok(()) };
        prop_assert!(d.final_expr.is_hat_free());
        d.check(&g).unwrap();
        assert_matches_oracle(&g, &q, &d.final_expr)?;
    }

    #[test]
    fn search_is_deterministic(seed in any::<u64>(), n in 2usize..6, latents in 0usize..3, picks in prop::array::uniform4(any::<usize>())) {
        let (g, q) = random_query(seed, n, latents, &picks);
        let a = identify(&g, &q, &config(6)).unwrap();
        let b = identify(&g, &q, &config(6)).unwrap();
        prop_assert_eq!(&a, &b);
        if let IdentifyOutcome::Identified(d) = &a {
            let again = b.derivation().unwrap();
            prop_assert_eq!(explain(d, &g), explain(again, &g));
            prop_assert_eq!(
                serde_json::to_string(&d.to_record(&g)).unwrap(),
                serde_json::to_string(&again.to_record(&g)).unwrap()
            );
        }
    }

    #[test]
    fn memoization_does_not_change_answers(seed in any::<u64>(), n in 2usize..5, latents in 0usize..2, picks in prop::array::uniform4(any::<usize>())) {
        let (g, q) = random_query(seed, n, latents, &picks);
        let with = identify(&g, &q, &config(5)).unwrap();
        let without = identify(&g, &q, &SearchConfig { memoize: false, ..config(5) }).unwrap();
        match (&with, &without) {
            (IdentifyOutcome::Identified(a), IdentifyOutcome::Identified(b)) => {
                prop_assert_eq!(a.move_count(), b.move_count());
                assert_matches_oracle(&g, &q, &a.final_expr)?;
                assert_matches_oracle(&g, &q, &b.final_expr)?;
            }
            (IdentifyOutcome::Aborted { .. }, _) | (_, IdentifyOutcome::Aborted { .. }) => {}
            (a, b) => prop_assert_eq!(a.label(), b.label()),
        }
    }

    #[test]
    fn deeper_search_keeps_identified_queries(seed in any::<u64>(), n in 2usize..6, latents in 0usize..3, picks in prop::array::uniform4(any::<usize>())) {
        let (g, q) = random_query(seed, n, latents, &picks);
        let Some(d) = identify(&g, &q, &config(8)).unwrap().derivation().cloned() else { return Ok(()) };
        let k = d.move_count();
        for depth in k..=k + 3 {
            let out = identify(&g, &q, &config(depth)).unwrap();
            let at = out.derivation();
            prop_assert!(at.is_some(), "identified in {k} moves but not within depth {depth}");
            prop_assert!(at.unwrap().move_count() <= k);
        }
    }
}
