//! Probability expressions with observation and intervention conditions.
//!
//! Expressions are generic over the variable type: the parser produces
//! `Expr<String>`, which [`Expr::bind`] resolves against a graph into a
//! [`ProbExpr`] over [`VarId`]s. Values are symbolic: a slot's value is either the
//! query's own (free) value, a value bound by an enclosing sum, or a fixed index.

mod parse;
mod render;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, NodeSet, VarId};

pub use parse::{parse_expr, parse_query};

pub type ProbTerm = Term<VarId>;
pub type ProbExpr = Expr<VarId>;
/// Child indices from the root: `Sum` has child 0, `Product` its factors,
/// `Quotient` 0 (numerator) and 1 (denominator).
pub type Path = Vec<usize>;

pub trait Var: Clone + Ord + Eq + Hash + Debug {}
impl<T: Clone + Ord + Eq + Hash + Debug> Var for T {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    Observation,
    Intervention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// The value named by the query itself (`y` in `P(y|do(x))`).
    Free,
    /// Bound by the enclosing `Sum` with this id.
    Bound(u32),
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot<V> {
    pub var: V,
    pub value: Value,
}

impl<V> Slot<V> {
    pub fn free(var: V) -> Self {
        Slot { var, value: Value::Free }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Condition<V> {
    pub slot: Slot<V>,
    pub mode: Mode,
}

impl<V> Condition<V> {
    pub fn observe(slot: Slot<V>) -> Self {
        Condition { slot, mode: Mode::Observation }
    }

    pub fn intervene(slot: Slot<V>) -> Self {
        Condition { slot, mode: Mode::Intervention }
    }
}

/// `P(targets | conditions)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term<V> {
    pub targets: Vec<Slot<V>>,
    pub conditions: Vec<Condition<V>>,
}

impl<V: Var> Term<V> {
    /// Validated, canonically ordered term.
    pub fn new(mut targets: Vec<Slot<V>>, mut conditions: Vec<Condition<V>>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Structure("term has no targets".into()));
        }
        targets.sort();
        conditions.sort();
        let t = Term { targets, conditions };
        let mut seen = BTreeSet::new();
        for v in t.vars() {
            if !seen.insert(v) {
                return Err(Error::Structure(format!("variable {v:?} mentioned twice in one term")));
            }
        }
        Ok(t)
    }

    /// Shorthand for a term whose values are all free.
    pub fn simple(targets: &[V], observed: &[V], intervened: &[V]) -> Result<Self> {
        Term::new(
            targets.iter().cloned().map(Slot::free).collect(),
            observed
                .iter()
                .cloned()
                .map(|v| Condition::observe(Slot::free(v)))
                .chain(intervened.iter().cloned().map(|v| Condition::intervene(Slot::free(v))))
                .collect(),
        )
    }

    pub fn vars(&self) -> impl Iterator<Item = &V> {
        self.targets.iter().map(|s| &s.var).chain(self.conditions.iter().map(|c| &c.slot.var))
    }

    pub fn slots(&self) -> impl Iterator<Item = &Slot<V>> {
        self.targets.iter().chain(self.conditions.iter().map(|c| &c.slot))
    }

    pub fn mentions(&self, v: &V) -> bool {
        self.vars().any(|w| w == v)
    }

    pub fn slot_of(&self, v: &V) -> Option<&Slot<V>> {
        self.slots().find(|s| &s.var == v)
    }

    pub fn with_mode(&self, mode: Mode) -> impl Iterator<Item = &Condition<V>> {
        self.conditions.iter().filter(move |c| c.mode == mode)
    }

    pub fn is_hat_free(&self) -> bool {
        self.conditions.iter().all(|c| c.mode == Mode::Observation)
    }

    fn normalized(&self) -> Self {
        let mut t = self.clone();
        t.targets.sort();
        t.conditions.sort();
        t
    }

    fn map_vars<W: Var>(&self, f: &mut impl FnMut(&V) -> Result<W>) -> Result<Term<W>> {
        let mut slot = |s: &Slot<V>| -> Result<Slot<W>> { Ok(Slot { var: f(&s.var)?, value: s.value }) };
        let targets = self.targets.iter().map(&mut slot).collect::<Result<Vec<_>>>()?;
        let conditions = self
            .conditions
            .iter()
            .map(|c| Ok(Condition { slot: slot(&c.slot)?, mode: c.mode }))
            .collect::<Result<Vec<_>>>()?;
        Term::new(targets, conditions)
    }

    fn erased(&self) -> Self {
        let er = |s: &Slot<V>| Slot { var: s.var.clone(), value: erase(s.value) };
        Term {
            targets: self.targets.iter().map(er).collect(),
            conditions: self.conditions.iter().map(|c| Condition { slot: er(&c.slot), mode: c.mode }).collect(),
        }
    }
}

impl ProbTerm {
    pub fn target_set(&self) -> NodeSet {
        self.targets.iter().map(|s| s.var).collect()
    }

    pub fn intervention_set(&self) -> NodeSet {
        self.with_mode(Mode::Intervention).map(|c| c.slot.var).collect()
    }

    pub fn observation_set(&self) -> NodeSet {
        self.with_mode(Mode::Observation).map(|c| c.slot.var).collect()
    }

    pub fn var_set(&self) -> NodeSet {
        self.vars().copied().collect()
    }

    pub fn render(&self, g: &CausalGraph) -> String {
        Expr::Term(self.clone()).render_with(g)
    }
}

fn erase(v: Value) -> Value {
    match v {
        Value::Bound(_) => Value::Bound(0),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr<V> {
    One,
    Term(Term<V>),
    /// Sum of `body` over every value of `var`; occurrences carry `Value::Bound(id)`.
    Sum { var: V, id: u32, body: Box<Expr<V>> },
    Product(Vec<Expr<V>>),
    Quotient(Box<Expr<V>>, Box<Expr<V>>),
}

impl<V: Var> From<Term<V>> for Expr<V> {
    fn from(t: Term<V>) -> Self {
        Expr::Term(t)
    }
}

impl<V: Var> Expr<V> {
    pub fn sum(var: V, id: u32, body: Expr<V>) -> Self {
        Expr::Sum { var, id, body: Box::new(body) }
    }

    pub fn product(factors: Vec<Expr<V>>) -> Self {
        Expr::Product(factors)
    }

    pub fn quotient(num: Expr<V>, den: Expr<V>) -> Self {
        Expr::Quotient(Box::new(num), Box::new(den))
    }

    pub fn is_hat_free(&self) -> bool {
        self.terms().iter().all(|(_, t)| t.is_hat_free())
    }

    pub fn as_term(&self) -> Option<&Term<V>> {
        match self {
            Expr::Term(t) => Some(t),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Expr<V>> {
        match self {
            Expr::One | Expr::Term(_) => vec![],
            Expr::Sum { body, .. } => vec![body],
            Expr::Product(fs) => fs.iter().collect(),
            Expr::Quotient(n, d) => vec![n, d],
        }
    }

    /// Every term with its path, in pre-order.
    pub fn terms(&self) -> Vec<(Path, &Term<V>)> {
        fn go<'a, V: Var>(e: &'a Expr<V>, path: &mut Path, out: &mut Vec<(Path, &'a Term<V>)>) {
            if let Expr::Term(t) = e {
                out.push((path.clone(), t));
            }
            for (i, c) in e.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn at(&self, path: &[usize]) -> Option<&Expr<V>> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at(rest)),
        }
    }

    /// Copy of `self` with the subexpression at `path` replaced.
    pub fn replace_at(&self, path: &[usize], new: Expr<V>) -> Result<Expr<V>> {
        let Some((&i, rest)) = path.split_first() else {
            return Ok(new);
        };
        let bad = || Error::Argument(format!("no subexpression at child {i}"));
        Ok(match self {
            Expr::One | Expr::Term(_) => return Err(bad()),
            Expr::Sum { var, id, body } if i == 0 => Expr::sum(var.clone(), *id, body.replace_at(rest, new)?),
            Expr::Sum { .. } => return Err(bad()),
            Expr::Product(fs) => {
                let mut fs = fs.clone();
                let f = fs.get(i).ok_or_else(bad)?.replace_at(rest, new)?;
                fs[i] = f;
                Expr::Product(fs)
            }
            Expr::Quotient(n, d) => match i {
                0 => Expr::quotient(n.replace_at(rest, new)?, (**d).clone()),
                1 => Expr::quotient((**n).clone(), d.replace_at(rest, new)?),
                _ => return Err(bad()),
            },
        })
    }

    /// The `(var, id)` binders enclosing `path`, outermost first.
    pub fn binders_above(&self, path: &[usize]) -> Vec<(V, u32)> {
        let mut out = Vec::new();
        let mut cur = self;
        for &i in path {
            if let Expr::Sum { var, id, .. } = cur {
                out.push((var.clone(), *id));
            }
            match cur.children().get(i) {
                Some(c) => cur = c,
                None => break,
            }
        }
        out
    }

    pub fn max_bound_id(&self) -> u32 {
        let own = match self {
            Expr::Sum { id, .. } => *id,
            Expr::Term(t) => t
                .slots()
                .filter_map(|s| match s.value {
                    Value::Bound(k) => Some(k),
                    _ => None,
                })
                .max()
                .unwrap_or(0),
            _ => 0,
        };
        self.children().into_iter().map(Expr::max_bound_id).fold(own, u32::max)
    }

    /// Variables occurring with their free (query) value.
    pub fn free_vars(&self) -> BTreeSet<V> {
        self.terms()
            .into_iter()
            .flat_map(|(_, t)| t.slots().filter(|s| s.value == Value::Free).map(|s| s.var.clone()).collect::<Vec<_>>())
            .collect()
    }

    fn mentions_bound(&self, var: &V, id: u32) -> bool {
        match self {
            Expr::Term(t) => t.slots().any(|s| &s.var == var && s.value == Value::Bound(id)),
            _ => self.children().into_iter().any(|c| c.mentions_bound(var, id)),
        }
    }

    pub fn map_vars<W: Var>(&self, f: &mut impl FnMut(&V) -> Result<W>) -> Result<Expr<W>> {
        Ok(match self {
            Expr::One => Expr::One,
            Expr::Term(t) => Expr::Term(t.map_vars(f)?),
            Expr::Sum { var, id, body } => Expr::sum(f(var)?, *id, body.map_vars(f)?),
            Expr::Product(fs) => Expr::Product(fs.iter().map(|e| e.map_vars(f)).collect::<Result<_>>()?),
            Expr::Quotient(n, d) => Expr::quotient(n.map_vars(f)?, d.map_vars(f)?),
        })
    }

    /// Checks binder scoping: no shadowing, no dangling bound values, no unused binders.
    pub fn validate(&self) -> Result<()> {
        fn go<V: Var>(e: &Expr<V>, scope: &mut Vec<(V, u32)>) -> Result<()> {
            match e {
                Expr::One => Ok(()),
                Expr::Term(t) => {
                    if t.targets.is_empty() {
                        return Err(Error::Structure("term has no targets".into()));
                    }
                    let mut seen = BTreeSet::new();
                    for s in t.slots() {
                        if !seen.insert(&s.var) {
                            return Err(Error::Structure(format!("{:?} mentioned twice in one term", s.var)));
                        }
                        if let Value::Bound(k) = s.value {
                            if !scope.iter().any(|(v, id)| v == &s.var && *id == k) {
                                return Err(Error::Structure(format!("{:?} bound value #{k} is not in scope", s.var)));
                            }
                        }
                    }
                    Ok(())
                }
                Expr::Sum { var, id, body } => {
                    if scope.iter().any(|(v, k)| v == var && k == id) {
                        return Err(Error::Structure(format!("binder {var:?} #{id} shadows an enclosing binder")));
                    }
                    if !body.mentions_bound(var, *id) {
                        return Err(Error::Structure(format!("binder {var:?} #{id} does not occur in its body")));
                    }
                    scope.push((var.clone(), *id));
                    let r = go(body, scope);
                    scope.pop();
                    r
                }
                Expr::Product(fs) => fs.iter().try_for_each(|f| go(f, scope)),
                Expr::Quotient(n, d) => {
                    go(n, scope)?;
                    go(d, scope)
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Idempotent normal form; see the module docs of [`crate::expr`].
    pub fn canonicalize(&self) -> Result<Expr<V>> {
        self.validate()?;
        let mut cur = self.normalized();
        for _ in 0..16 {
            let next = cur.relabeled().normalized();
            if next == cur {
                break;
            }
            cur = next;
        }
        Ok(cur)
    }

    fn erased(&self) -> Expr<V> {
        match self {
            Expr::One => Expr::One,
            Expr::Term(t) => Expr::Term(t.erased()),
            Expr::Sum { var, body, .. } => Expr::sum(var.clone(), 0, body.erased()),
            Expr::Product(fs) => Expr::Product(fs.iter().map(Expr::erased).collect()),
            Expr::Quotient(n, d) => Expr::quotient(n.erased(), d.erased()),
        }
    }

    fn normalized(&self) -> Expr<V> {
        match self {
            Expr::One => Expr::One,
            Expr::Term(t) => Expr::Term(t.normalized()),
            Expr::Sum { var, id, body } => {
                let mut binders = vec![(var.clone(), *id)];
                let mut inner = body.normalized();
                while let Expr::Sum { var, id, body } = inner {
                    binders.push((var, id));
                    inner = *body;
                }
                binders.sort();
                binders.into_iter().rev().fold(inner, |acc, (v, k)| Expr::sum(v, k, acc))
            }
            Expr::Product(fs) => {
                let mut flat = Vec::new();
                for f in fs {
                    match f.normalized() {
                        Expr::One => {}
                        Expr::Product(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                match flat.len() {
                    0 => Expr::One,
                    1 => flat.pop().unwrap(),
                    _ => {
                        flat.sort_by(factor_cmp);
                        Expr::Product(flat)
                    }
                }
            }
            Expr::Quotient(n, d) => {
                let (n, d) = (n.normalized(), d.normalized());
                if d == Expr::One {
                    n
                } else if n == d {
                    Expr::One
                } else {
                    Expr::quotient(n, d)
                }
            }
        }
    }

    /// Renumbers binders 1, 2, … in pre-order.
    fn relabeled(&self) -> Expr<V> {
        fn go<V: Var>(e: &Expr<V>, scope: &mut Vec<(V, u32, u32)>, next: &mut u32) -> Expr<V> {
            match e {
                Expr::One => Expr::One,
                Expr::Term(t) => {
                    let fix = |s: &Slot<V>| {
                        let value = match s.value {
                            Value::Bound(k) => scope
                                .iter()
                                .rev()
                                .find(|(v, old, _)| v == &s.var && *old == k)
                                .map(|&(_, _, new)| Value::Bound(new))
                                .unwrap_or(s.value),
                            other => other,
                        };
                        Slot { var: s.var.clone(), value }
                    };
                    Expr::Term(Term {
                        targets: t.targets.iter().map(fix).collect(),
                        conditions: t.conditions.iter().map(|c| Condition { slot: fix(&c.slot), mode: c.mode }).collect(),
                    })
                }
                Expr::Sum { var, id, body } => {
                    let new = *next;
                    *next += 1;
                    scope.push((var.clone(), *id, new));
                    let b = go(body, scope, next);
                    scope.pop();
                    Expr::sum(var.clone(), new, b)
                }
                Expr::Product(fs) => Expr::Product(fs.iter().map(|f| go(f, scope, next)).collect()),
                Expr::Quotient(n, d) => {
                    let n = go(n, scope, next);
                    Expr::quotient(n, go(d, scope, next))
                }
            }
        }
        go(self, &mut Vec::new(), &mut 1)
    }
}

fn rank<V>(e: &Expr<V>) -> u8 {
    match e {
        Expr::Term(_) => 0,
        Expr::One => 1,
        Expr::Quotient(..) => 2,
        Expr::Product(_) => 3,
        Expr::Sum { .. } => 4,
    }
}

/// Product factor order: terms first, by descending targets, then the rest; sums last
/// so that a trailing sum can take the remainder of the product as its scope.
fn factor_cmp<V: Var>(a: &Expr<V>, b: &Expr<V>) -> Ordering {
    fn key_cmp<V: Var>(a: &Expr<V>, b: &Expr<V>) -> Ordering {
        match (a, b) {
            (Expr::Term(s), Expr::Term(t)) => t.targets.cmp(&s.targets).then_with(|| s.conditions.cmp(&t.conditions)),
            _ => a.cmp(b),
        }
    }
    rank(a)
        .cmp(&rank(b))
        .then_with(|| key_cmp(&a.erased(), &b.erased()))
        .then_with(|| key_cmp(a, b))
}

impl Expr<String> {
    /// Resolves names against `g` (exactly, else case-insensitively). Only observed
    /// variables may appear in a formula.
    pub fn bind(&self, g: &CausalGraph) -> Result<ProbExpr> {
        self.map_vars(&mut |name: &String| {
            let v = g.resolve(name)?;
            if !g.is_observed(v) {
                return Err(Error::Argument(format!("`{}` is not an observed variable", g.name(v))));
            }
            Ok(v)
        })
    }
}

impl ProbExpr {
    /// Lower-cased variable names, the form used for rendering.
    pub fn named(&self, g: &CausalGraph) -> Expr<String> {
        self.map_vars(&mut |v: &VarId| Ok(g.name(*v).to_lowercase()))
            .expect("renaming cannot fail")
    }

    pub fn render_with(&self, g: &CausalGraph) -> String {
        self.named(g).render()
    }

    /// Checks that every mentioned variable exists and is observed.
    pub fn check_observed(&self, g: &CausalGraph) -> Result<()> {
        for (_, t) in self.terms() {
            for v in t.vars() {
                g.check(*v)?;
                if !g.is_observed(*v) {
                    return Err(Error::Argument(format!("`{}` is not an observed variable", g.name(*v))));
                }
            }
        }
        Ok(())
    }
}

/// `Σ_v P(targets | v, conditions) P(v | conditions)`, with `v` bound by a fresh
/// binder numbered one past the largest id in `term`.
pub fn expand_by_conditioning<V: Var>(term: &Term<V>, v: &V) -> Result<Expr<V>> {
    let fresh = Expr::Term(term.clone()).max_bound_id() + 1;
    expand_by_conditioning_with(term, v, fresh)
}

pub fn expand_by_conditioning_with<V: Var>(term: &Term<V>, v: &V, id: u32) -> Result<Expr<V>> {
    if term.mentions(v) {
        return Err(Error::Argument(format!("{v:?} is already mentioned in the term")));
    }
    let slot = Slot { var: v.clone(), value: Value::Bound(id) };
    let mut conds = term.conditions.clone();
    conds.push(Condition::observe(slot.clone()));
    let left = Term::new(term.targets.clone(), conds)?;
    let right = Term::new(vec![slot], term.conditions.clone())?;
    Ok(Expr::sum(v.clone(), id, Expr::Product(vec![left.into(), right.into()])))
}

/// Chain-rule split moving the last target (in canonical order) to the condition side.
pub fn factor_joint<V: Var>(term: &Term<V>) -> Result<Expr<V>> {
    let last = term
        .targets
        .iter()
        .map(|s| s.var.clone())
        .max()
        .ok_or_else(|| Error::Argument("term has no targets".into()))?;
    factor_joint_on(term, &last)
}

/// `P(rest | v, conds) P(v | conds)` for a target `v` of a multi-target term.
pub fn factor_joint_on<V: Var>(term: &Term<V>, v: &V) -> Result<Expr<V>> {
    if term.targets.len() < 2 {
        return Err(Error::Argument("factor_joint needs at least two targets".into()));
    }
    let Some(slot) = term.targets.iter().find(|s| &s.var == v).cloned() else {
        return Err(Error::Argument(format!("{v:?} is not a target")));
    };
    let rest: Vec<_> = term.targets.iter().filter(|s| &s.var != v).cloned().collect();
    let mut conds = term.conditions.clone();
    conds.push(Condition::observe(slot.clone()));
    let left = Term::new(rest, conds)?;
    let right = Term::new(vec![slot], term.conditions.clone())?;
    Ok(Expr::Product(vec![left.into(), right.into()]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr<String> {
        parse_expr(s).unwrap()
    }

    #[test]
    fn hat_free() {
        assert!(p("Σ_x P(y|x,z) P(x)").is_hat_free());
        assert!(!p("P(y|do(x))").is_hat_free());
        assert!(Expr::<String>::One.is_hat_free());
    }

    #[test]
    fn canonical_form_ignores_factor_order_and_binder_names() {
        let a = p("P(x) P(z|x)").canonicalize().unwrap();
        let b = p("P(z|x) P(x)").canonicalize().unwrap();
        assert_eq!(a, b);
        let a = p("Σ_x' P(y|x',z) P(x')").canonicalize().unwrap();
        let b = p("Σ_x P(x) P(y|x,z)").canonicalize().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonicalize_sorts_sum_chains_and_collapses_quotients() {
        let a = p("Σ_b Σ_a P(y|a,b) P(a,b)").canonicalize().unwrap();
        let b = p("Σ_a Σ_b P(a,b) P(y|a,b)").canonicalize().unwrap();
        assert_eq!(a, b);
        assert_eq!(p("P(y|x) / P(y|x)").canonicalize().unwrap(), Expr::One);
        assert_eq!(p("P(y) / 1").canonicalize().unwrap(), p("P(y)"));
        assert_eq!(p("1 P(y) (1)").canonicalize().unwrap(), p("P(y)"));
    }

    #[test]
    fn shadowing_is_rejected() {
        let inner = Expr::sum("x".to_string(), 1, p("P(x)").map_vars(&mut |v| Ok(v.clone())).unwrap());
        // P(x) mentions x free, so the binder is unused.
        assert!(matches!(inner.canonicalize(), Err(Error::Structure(_))));
        let t = Term::new(vec![Slot { var: "x".to_string(), value: Value::Bound(1) }], vec![]).unwrap();
        let body = Expr::sum("x".to_string(), 1, Expr::Term(t.clone()));
        let shadow = Expr::sum("x".to_string(), 1, Expr::product(vec![body, Expr::Term(t)]));
        assert!(matches!(shadow.validate(), Err(Error::Structure(_))));
    }

    #[test]
    fn expand_matches_conditioning_identity() {
        let t = p("P(y|do(z))").as_term().unwrap().clone();
        let e = expand_by_conditioning(&t, &"x".to_string()).unwrap();
        assert_eq!(e.canonicalize().unwrap(), p("Σ_x P(y|x,do(z)) P(x|do(z))").canonicalize().unwrap());
        let t = p("P(y|do(x))").as_term().unwrap().clone();
        let e = expand_by_conditioning(&t, &"z".to_string()).unwrap();
        assert_eq!(e.canonicalize().unwrap(), p("Σ_z P(y|z,do(x)) P(z|do(x))").canonicalize().unwrap());
        assert!(expand_by_conditioning(&t, &"x".to_string()).is_err());
    }

    #[test]
    fn factor_joint_chain_rule() {
        let t = p("P(y,z|do(x))").as_term().unwrap().clone();
        let e = factor_joint(&t).unwrap().canonicalize().unwrap();
        assert_eq!(e, p("P(y|z,do(x)) P(z|do(x))").canonicalize().unwrap());
        let t = p("P(a,b)").as_term().unwrap().clone();
        assert_eq!(factor_joint(&t).unwrap().canonicalize().unwrap(), p("P(a|b) P(b)").canonicalize().unwrap());
        let single = p("P(a)").as_term().unwrap().clone();
        assert!(matches!(factor_joint(&single), Err(Error::Argument(_))));
    }

    #[test]
    fn paths_address_terms() {
        let e = p("Σ_z P(z|x) Σ_x' P(y|x',z) P(x')").canonicalize().unwrap();
        let terms = e.terms();
        assert_eq!(terms.len(), 3);
        for (path, t) in &terms {
            assert_eq!(e.at(path).unwrap().as_term().unwrap(), *t);
        }
        let (path, _) = &terms[1];
        assert_eq!(e.binders_above(path).len(), 2);
        let r = e.replace_at(path, Expr::One).unwrap();
        assert_eq!(r.terms().len(), 2);
    }
}
