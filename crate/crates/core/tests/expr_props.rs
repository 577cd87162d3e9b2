use docalc::bn::{configurations, random_bn, random_graph, DiscreteBN, Evaluator};
use docalc::expr::{expand_by_conditioning, factor_joint, parse_expr, Condition, Slot, Value};
use docalc::{CausalGraph, Error, Expr, ProbExpr, ProbTerm, Term, VarId};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: usize = 5;

fn graph(seed: u64) -> CausalGraph {
    random_graph(seed, VARS, 6, 1)
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    vars: &'a [VarId],
    next_id: u32,
}

impl Gen<'_> {
    fn value(&mut self, v: VarId, scope: &[(VarId, u32)]) -> Value {
        let bound: Vec<u32> = scope.iter().filter(|s| s.0 == v).map(|s| s.1).collect();
        match self.rng.gen_range(0..6) {
            0 => Value::Fixed(self.rng.gen_range(0..2)),
            1 | 2 if !bound.is_empty() => Value::Bound(*bound.last().unwrap()),
            _ => Value::Free,
        }
    }

    /// A term mentioning `must` (bound to `scope`'s innermost binder) when given.
    fn term(&mut self, scope: &[(VarId, u32)], must: Option<VarId>) -> ProbTerm {
        let mut vs = self.vars.to_vec();
        vs.shuffle(&mut self.rng);
        let k = self.rng.gen_range(1..=3);
        let mut chosen: Vec<VarId> = vs[..k].to_vec();
        if let Some(m) = must {
            if !chosen.contains(&m) {
                chosen.push(m);
            }
        }
        let mut targets = Vec::new();
        let mut conds = Vec::new();
        for (i, &v) in chosen.iter().enumerate() {
            let value = if Some(v) == must {
                Value::Bound(scope.iter().rev().find(|s| s.0 == v).unwrap().1)
            } else {
                self.value(v, scope)
            };
            let slot = Slot { var: v, value };
            match (i, self.rng.gen_range(0..3)) {
                (0, _) | (_, 0) => targets.push(slot),
                (_, 1) => conds.push(Condition::observe(slot)),
                _ => conds.push(Condition::intervene(slot)),
            }
        }
        Term::new(targets, conds).unwrap()
    }

    fn expr(&mut self, depth: u32, scope: &mut Vec<(VarId, u32)>, must: Option<VarId>) -> ProbExpr {
        let pick = if depth == 0 { 0 } else { self.rng.gen_range(0..4) };
        match pick {
            1 => {
                let v = *self.vars.choose(&mut self.rng).unwrap();
                self.next_id += 1;
                let id = self.next_id;
                scope.push((v, id));
                let body = self.expr(depth - 1, scope, Some(v));
                scope.pop();
                let extra = match must {
                    Some(_) => self.expr(0, scope, must),
                    None => Expr::One,
                };
                let sum = Expr::sum(v, id, body);
                if extra == Expr::One {
                    sum
                } else {
                    Expr::product(vec![extra, sum])
                }
            }
            2 => {
                let n = self.rng.gen_range(2..=3);
                let mut fs = vec![self.expr(depth - 1, scope, must)];
                for _ in 1..n {
                    fs.push(self.expr(depth - 1, scope, None));
                }
                Expr::product(fs)
            }
            3 if must.is_none() && scope.is_empty() => {
                Expr::quotient(self.expr(depth - 1, scope, None), Expr::Term(self.term(scope, None)))
            }
            _ => Expr::Term(self.term(scope, must)),
        }
    }
}

fn random_expr(seed: u64, vars: &[VarId]) -> ProbExpr {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), vars, next_id: 0 };
    g.expr(3, &mut Vec::new(), None)
}

fn random_term(seed: u64, vars: &[VarId]) -> ProbTerm {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), vars, next_id: 0 };
    g.term(&[], None)
}

/// Values agree on every binding, ignoring bindings where either side conditions
/// on a zero-probability event. Random quotients can exceed 1, so the tolerance is
/// absolute up to 1 and relative above.
fn same_values(bn: &DiscreteBN, a: &ProbExpr, b: &ProbExpr, tol: f64) -> Result<(), String> {
    let vars: Vec<VarId> = a.free_vars().union(&b.free_vars()).copied().collect();
    let mut ev = Evaluator::new(bn);
    for binding in configurations(&vars, bn.cards()) {
        match (ev.eval(a, &binding), ev.eval(b, &binding)) {
            (Ok(x), Ok(y)) if (x - y).abs() <= tol * x.abs().max(1.0) => {}
            (Ok(x), Ok(y)) => return Err(format!("{x} vs {y} at {binding:?}")),
            (Err(Error::UndefinedConditional), _) | (_, Err(Error::UndefinedConditional)) => {}
            (a, b) => return Err(format!("{a:?} / {b:?}")),
        }
    }
    Ok(())
}

fn bn_for(g: &CausalGraph, seed: u64) -> DiscreteBN {
    let cards: Vec<usize> = (0..g.node_count()).map(|i| 2 + (seed as usize + i) % 2).collect();
    random_bn(g, &cards, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let g = graph(seed);
        let vars: Vec<VarId> = g.observed().iter().collect();
        let e = random_expr(seed, &vars);
        prop_assume!(e.validate().is_ok());
        let canon = e.canonicalize().unwrap();
        let text = canon.render_with(&g);
        let back = parse_expr(&text).unwrap().bind(&g).unwrap().canonicalize().unwrap();
        prop_assert_eq!(&back, &canon, "{}", text);
        let named = e.named(&g);
        let again = parse_expr(&named.render()).unwrap().bind(&g).unwrap().canonicalize().unwrap();
        prop_assert_eq!(again, canon);
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let g = graph(seed);
        let vars: Vec<VarId> = g.observed().iter().collect();
        let e = random_expr(seed, &vars);
        prop_assume!(e.validate().is_ok());
        let once = e.canonicalize().unwrap();
        prop_assert_eq!(once.canonicalize().unwrap(), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonicalize_keeps_values(seed in any::<u64>()) {
        let g = graph(seed);
        let vars: Vec<VarId> = g.observed().iter().collect();
        let e = random_expr(seed, &vars);
        prop_assume!(e.validate().is_ok());
        let bn = bn_for(&g, seed);
        prop_assert_eq!(same_values(&bn, &e, &e.canonicalize().unwrap(), 1e-12), Ok(()));
    }

    #[test]
    fn expansion_and_factoring_keep_values(seed in any::<u64>(), pick in any::<usize>()) {
        let g = graph(seed);
        let vars: Vec<VarId> = g.observed().iter().collect();
        let t = random_term(seed, &vars);
        let bn = bn_for(&g, seed);
        let whole = Expr::Term(t.clone());
        let absent: Vec<VarId> = vars.iter().copied().filter(|v| !t.mentions(v)).collect();
        if !absent.is_empty() {
            let v = absent[pick % absent.len()];
            let expanded = expand_by_conditioning(&t, &v).unwrap();
            prop_assert_eq!(same_values(&bn, &whole, &expanded, 1e-12), Ok(()));
        }
        if t.targets.len() >= 2 {
            let factored = factor_joint(&t).unwrap();
            prop_assert_eq!(same_values(&bn, &whole, &factored, 1e-12), Ok(()));
        }
    }
}

#[test]
fn generator_mostly_produces_valid_expressions() {
    let g = graph(7);
    let vars: Vec<VarId> = g.observed().iter().collect();
    let valid = (0..500).filter(|&s| random_expr(s, &vars).validate().is_ok()).count();
    assert!(valid >= 400, "{valid} of 500 valid");
    let sums = (0..500).filter(|&s| matches!(random_expr(s, &vars).canonicalize(), Ok(e) if format!("{e:?}").contains("Sum"))).count();
    assert!(sums >= 100, "{sums} of 500 contain a sum");
}
