//! Closed-form shortcuts: back-door adjustment and the front-door pattern.

use crate::error::{Error, Result};
use crate::expr::{Condition, Expr, ProbExpr, Slot, Term, Value};
use crate::graph::{combinations, CausalGraph, NodeSet, Surgery, VarId};

/// Largest number of candidate sets `backdoor_adjust` will test.
pub const BACKDOOR_SUBSET_CAP: usize = 1 << 14;

fn require_observed(g: &CausalGraph, vs: &[VarId]) -> Result<()> {
    for &v in vs {
        g.check(v)?;
        if !g.is_observed(v) {
            return Err(Error::Argument(format!("`{}` is not observed", g.name(v))));
        }
    }
    if vs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Argument("cause and effect must differ".into()));
    }
    Ok(())
}

/// Is `s` a valid adjustment set for the effect of `x` on `y`?
pub fn is_backdoor_set(g: &CausalGraph, x: VarId, y: VarId, s: &NodeSet) -> Result<bool> {
    let xs = NodeSet::singleton(x);
    if !s.is_disjoint(&g.descendants(&xs)?) || s.contains(x) || s.contains(y) {
        return Ok(false);
    }
    g.cut_outgoing(&xs)?.d_separated(&NodeSet::singleton(y), &xs, s)
}

/// `Σ_s P(y | x, s) P(s)`, or `P(y | x)` when `s` is empty.
pub fn adjustment_formula(x: VarId, y: VarId, s: &NodeSet) -> Result<ProbExpr> {
    if s.is_empty() {
        return Ok(Term::simple(&[y], &[x], &[])?.into());
    }
    let bound: Vec<Slot<VarId>> = s.iter().zip(1..).map(|(v, id)| Slot { var: v, value: Value::Bound(id) }).collect();
    let mut conds: Vec<Condition<VarId>> = bound.iter().cloned().map(Condition::observe).collect();
    conds.push(Condition::observe(Slot::free(x)));
    let body = Expr::Product(vec![
        Term::new(vec![Slot::free(y)], conds)?.into(),
        Term::new(bound.clone(), vec![])?.into(),
    ]);
    let e = bound.iter().rev().fold(body, |acc, s| match s.value {
        Value::Bound(id) => Expr::sum(s.var, id, acc),
        _ => unreachable!(),
    });
    e.canonicalize()
}

/// Smallest observed back-door set (ties broken by id order) and its adjustment
/// formula, or `None` when no set works. Fails with `CapExceeded` when more than
/// [`BACKDOOR_SUBSET_CAP`] candidate sets would have to be examined.
pub fn backdoor_adjust(g: &CausalGraph, x: VarId, y: VarId) -> Result<Option<(NodeSet, ProbExpr)>> {
    require_observed(g, &[x, y])?;
    let xs = NodeSet::singleton(x);
    let mut excluded = g.descendants(&xs)?;
    excluded.insert(x);
    excluded.insert(y);
    let candidates: Vec<VarId> = g.observed().difference(&excluded).iter().collect();
    let total = 1usize.checked_shl(candidates.len() as u32).unwrap_or(usize::MAX);
    if total > BACKDOOR_SUBSET_CAP {
        return Err(Error::CapExceeded(BACKDOOR_SUBSET_CAP));
    }
    let cut = g.cut_outgoing(&xs)?;
    let ys = NodeSet::singleton(y);
    for k in 0..=candidates.len() {
        let mut found: Option<NodeSet> = None;
        let mut err = None;
        combinations(&candidates, k, &mut |c| {
            if found.is_some() || err.is_some() {
                return;
            }
            let s: NodeSet = c.iter().copied().collect();
            match cut.d_separated(&ys, &xs, &s) {
                Ok(true) => found = Some(s),
                Ok(false) => {}
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(s) = found {
            let f = adjustment_formula(x, y, &s)?;
            return Ok(Some((s, f)));
        }
    }
    Ok(None)
}

/// Separation facts that make `z` a front-door mediator between `x` and `y`.
pub fn is_frontdoor_mediator(g: &CausalGraph, x: VarId, y: VarId, z: VarId) -> Result<bool> {
    let [xs, ys, zs] = [x, y, z].map(NodeSet::singleton);
    let none = NodeSet::new();
    let cut = |cut_in: &NodeSet, cut_out: &NodeSet| {
        g.surgered(&Surgery { cut_incoming: cut_in.clone(), cut_outgoing: cut_out.clone() })
    };
    let xz = xs.union(&zs);
    Ok(
        // P(z | do(x)) = P(z | x)
        cut(&none, &xs)?.d_separated(&zs, &xs, &none)?
            // P(x | do(z)) = P(x)
            && cut(&zs, &none)?.d_separated(&xs, &zs, &none)?
            // P(y | x, do(z)) = P(y | x, z)
            && cut(&none, &zs)?.d_separated(&ys, &zs, &xs)?
            // P(y | z, do(x)) = P(y | do(z), do(x))
            && cut(&xs, &zs)?.d_separated(&ys, &zs, &none)?
            // P(y | do(z), do(x)) = P(y | do(z))
            && cut(&xz, &none)?.d_separated(&ys, &xs, &none)?,
    )
}

/// `Σ_z P(z | x) Σ_x' P(y | x', z) P(x')`.
pub fn frontdoor_formula(x: VarId, y: VarId, z: VarId) -> Result<ProbExpr> {
    let zb = Slot { var: z, value: Value::Bound(1) };
    let xb = Slot { var: x, value: Value::Bound(2) };
    let inner = Expr::Product(vec![
        Term::new(vec![Slot::free(y)], vec![Condition::observe(xb.clone()), Condition::observe(zb.clone())])?.into(),
        Term::new(vec![xb], vec![])?.into(),
    ]);
    let e = Expr::sum(
        z,
        1,
        Expr::Product(vec![
            Term::new(vec![zb], vec![Condition::observe(Slot::free(x))])?.into(),
            Expr::sum(x, 2, inner),
        ]),
    );
    e.canonicalize()
}

/// Front-door formula through the first observed mediator (in id order) that
/// satisfies [`is_frontdoor_mediator`].
pub fn frontdoor_pattern(g: &CausalGraph, x: VarId, y: VarId) -> Result<Option<ProbExpr>> {
    require_observed(g, &[x, y])?;
    for z in g.observed().iter() {
        if z == x || z == y {
            continue;
        }
        if is_frontdoor_mediator(g, x, y, z)? {
            return frontdoor_formula(x, y, z).map(Some);
        }
    }
    Ok(None)
}
