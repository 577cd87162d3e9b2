use std::collections::HashMap;

use super::{Assignment, DiscreteBN, JointTable, Marginal};
use crate::error::{Error, Result};
use crate::expr::{Expr, Mode, ProbExpr, ProbTerm, Value};
use crate::graph::VarId;

/// Numeric evaluation of formulas against one network. Interventional joints and
/// marginals are cached, so evaluating many terms or many bindings is cheap.
pub struct Evaluator<'a> {
    bn: &'a DiscreteBN,
    joints: HashMap<Assignment, JointTable>,
    marginals: HashMap<(Assignment, Vec<VarId>), Marginal>,
}

impl<'a> Evaluator<'a> {
    pub fn new(bn: &'a DiscreteBN) -> Self {
        Evaluator { bn, joints: HashMap::new(), marginals: HashMap::new() }
    }

    pub fn bn(&self) -> &DiscreteBN {
        self.bn
    }

    fn marginal(&mut self, dos: &Assignment, vars: &[VarId]) -> Result<&Marginal> {
        let key = (dos.clone(), vars.to_vec());
        if !self.marginals.contains_key(&key) {
            if !self.joints.contains_key(dos) {
                let j = self.bn.intervene(dos)?.joint()?;
                self.joints.insert(dos.clone(), j);
            }
            let m = self.joints[dos].marginal(vars);
            self.marginals.insert(key.clone(), m);
        }
        Ok(&self.marginals[&key])
    }

    /// `P(targets | obs)` under `do(dos)`, as [`DiscreteBN::prob`].
    pub fn prob(&mut self, targets: &Assignment, obs: &Assignment, dos: &Assignment) -> Result<f64> {
        let tv = targets.vars();
        let ov = obs.vars();
        let dv = dos.vars();
        if !tv.is_disjoint(&ov) || !tv.is_disjoint(&dv) || !ov.is_disjoint(&dv) {
            return Err(Error::Argument("targets, observations and interventions must be disjoint".into()));
        }
        for (v, x) in targets.iter().chain(obs.iter()) {
            if x >= self.bn.card(v) {
                return Err(Error::Argument(format!("value {x} out of range for `{}`", self.bn.graph().name(v))));
            }
        }
        let den = if obs.is_empty() {
            1.0
        } else {
            let ovars: Vec<VarId> = ov.iter().collect();
            self.marginal(dos, &ovars)?.get(obs)
        };
        if den <= 0.0 {
            return Err(Error::UndefinedConditional);
        }
        let both = targets.merged(obs)?;
        let bvars: Vec<VarId> = both.vars().iter().collect();
        let num = self.marginal(dos, &bvars)?.get(&both);
        Ok(num / den)
    }

    /// Value of a term with every slot resolved through `binding` and `env`.
    fn term(&mut self, t: &ProbTerm, binding: &Assignment, env: &[(VarId, u32, usize)]) -> Result<f64> {
        let g = self.bn.graph();
        let resolve = |var: VarId, value: Value| -> Result<usize> {
            match value {
                Value::Free => binding
                    .get(var)
                    .ok_or_else(|| Error::Argument(format!("free variable `{}` is unbound", g.name(var)))),
                Value::Bound(id) => env
                    .iter()
                    .rev()
                    .find(|(v, k, _)| *v == var && *k == id)
                    .map(|e| e.2)
                    .ok_or_else(|| Error::Structure(format!("bound value of `{}` out of scope", g.name(var)))),
                Value::Fixed(x) => Ok(x as usize),
            }
        };
        let mut targets = Assignment::new();
        let mut obs = Assignment::new();
        let mut dos = Assignment::new();
        for s in &t.targets {
            targets.set(s.var, resolve(s.var, s.value)?);
        }
        for c in &t.conditions {
            let x = resolve(c.slot.var, c.slot.value)?;
            match c.mode {
                Mode::Observation => obs.set(c.slot.var, x),
                Mode::Intervention => dos.set(c.slot.var, x),
            };
        }
        for v in t.vars() {
            if !g.is_observed(*v) {
                return Err(Error::Argument(format!("formula mentions non-observed `{}`", g.name(*v))));
            }
        }
        self.prob(&targets, &obs, &dos)
    }

    /// Evaluates `e` with free values taken from `binding`.
    pub fn eval(&mut self, e: &ProbExpr, binding: &Assignment) -> Result<f64> {
        let mut env = Vec::new();
        self.eval_in(e, binding, &mut env)
    }

    fn eval_in(&mut self, e: &ProbExpr, binding: &Assignment, env: &mut Vec<(VarId, u32, usize)>) -> Result<f64> {
        match e {
            Expr::One => Ok(1.0),
            Expr::Term(t) => self.term(t, binding, env),
            Expr::Sum { var, id, body } => {
                let mut total = 0.0;
                for x in 0..self.bn.card(*var) {
                    env.push((*var, *id, x));
                    let r = self.eval_in(body, binding, env);
                    env.pop();
                    total += r?;
                }
                Ok(total)
            }
            Expr::Product(fs) => {
                let mut p = 1.0;
                for f in fs {
                    p *= self.eval_in(f, binding, env)?;
                }
                Ok(p)
            }
            Expr::Quotient(n, d) => {
                let n = self.eval_in(n, binding, env)?;
                let d = self.eval_in(d, binding, env)?;
                if d == 0.0 {
                    return Err(Error::UndefinedConditional);
                }
                Ok(n / d)
            }
        }
    }
}

/// One-shot evaluation; see [`Evaluator`] for repeated use.
pub fn eval_expr(bn: &DiscreteBN, e: &ProbExpr, binding: &Assignment) -> Result<f64> {
    Evaluator::new(bn).eval(e, binding)
}

/// Direct mechanism-replacement value of a single term, with free values read
/// from `binding`. This bypasses the evaluator's caches.
pub fn term_oracle(bn: &DiscreteBN, t: &ProbTerm, binding: &Assignment) -> Result<f64> {
    let g = bn.graph();
    let value = |var: VarId, v: Value| match v {
        Value::Free => binding
            .get(var)
            .ok_or_else(|| Error::Argument(format!("free variable `{}` is unbound", g.name(var)))),
        Value::Fixed(x) => Ok(x as usize),
        Value::Bound(_) => Err(Error::Argument("a bare term cannot carry bound values".into())),
    };
    let (mut targets, mut obs, mut dos) = (Assignment::new(), Assignment::new(), Assignment::new());
    for s in &t.targets {
        targets.set(s.var, value(s.var, s.value)?);
    }
    for c in &t.conditions {
        let x = value(c.slot.var, c.slot.value)?;
        match c.mode {
            Mode::Observation => obs.set(c.slot.var, x),
            Mode::Intervention => dos.set(c.slot.var, x),
        };
    }
    bn.prob(&targets, &obs, &dos)
}

/// Every assignment to the free-valued variables of `t`.
pub fn term_bindings(bn: &DiscreteBN, t: &ProbTerm) -> Vec<Assignment> {
    let vars: Vec<VarId> = t.slots().filter(|s| s.value == Value::Free).map(|s| s.var).collect();
    super::configurations(&vars, bn.cards())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::random_binary_bn;
    use crate::expr::parse_expr;
    use crate::graph::parse_graph;

    #[test]
    fn one_and_normalization() {
        let g = parse_graph("X -> Y\n").unwrap();
        let bn = random_binary_bn(&g, 2);
        assert_eq!(eval_expr(&bn, &Expr::One, &Assignment::new()).unwrap(), 1.0);
        let e = parse_expr("Σ_y P(y|x)").unwrap().bind(&g).unwrap();
        let x = g.id("X").unwrap();
        for xv in 0..2 {
            let v = eval_expr(&bn, &e, &Assignment::of(&[(x, xv)])).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unbound_free_variable_is_an_error() {
        let g = parse_graph("X -> Y\n").unwrap();
        let bn = random_binary_bn(&g, 2);
        let e = parse_expr("P(y|x)").unwrap().bind(&g).unwrap();
        let y = g.id("Y").unwrap();
        assert!(matches!(eval_expr(&bn, &e, &Assignment::of(&[(y, 0)])), Err(Error::Argument(_))));
    }

    #[test]
    fn backdoor_formula_on_front_door_graph_matches_intervention() {
        let g = parse_graph("latent U\nU -> X\nU -> Y\nX -> Z\nZ -> Y\n").unwrap();
        let e = parse_expr("Σ_x P(y|x,z) P(x)").unwrap().bind(&g).unwrap();
        let [y, z] = ["Y", "Z"].map(|n| g.id(n).unwrap());
        for seed in 0..10 {
            let bn = random_binary_bn(&g, seed);
            for (yv, zv) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let f = eval_expr(&bn, &e, &Assignment::of(&[(y, yv), (z, zv)])).unwrap();
                let o = bn.prob(&Assignment::of(&[(y, yv)]), &Assignment::new(), &Assignment::of(&[(z, zv)])).unwrap();
                assert!((f - o).abs() < 1e-12);
            }
        }
    }
}
