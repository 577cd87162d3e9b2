//! Conditional actions: `X = g(Z)`, `X ~ P*(x | z)`, and precondition-gated actions.
//!
//! The reference semantics is mechanism replacement (the action variable gets the
//! policy as its CPT with `Z` as parents). The averaged formulas
//! `Σ_z P(y | do(x = g(z)), z) P(z)` and `Σ_x Σ_z P(y | do(x), z) P*(x | z) P(z)` are
//! computed independently and must agree with it.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::bn::{configurations, Assignment, DiscreteBN, Evaluator};
use crate::error::{Error, Result};
use crate::expr::{ProbExpr, Term};
use crate::graph::{CausalGraph, NodeSet, VarId};
use crate::identify::{identify, IdentifyOutcome, SearchConfig};

/// Index of the configuration of `vars` (id order, first most significant) in `a`.
fn config_index(vars: &NodeSet, a: &Assignment, cards: &[usize]) -> usize {
    vars.iter().fold(0, |acc, v| acc * cards[v.index()] + a.get(v).expect("configuration covers inputs"))
}

fn check_inputs(g: &CausalGraph, action: VarId, inputs: &NodeSet, allow_latent: bool) -> Result<()> {
    g.check(action)?;
    g.check_set(inputs)?;
    if !g.is_observed(action) {
        return Err(Error::Argument(format!("action `{}` is not observed", g.name(action))));
    }
    if inputs.contains(action) {
        return Err(Error::Argument("a policy cannot read its own action".into()));
    }
    if !allow_latent {
        if let Some(v) = inputs.iter().find(|&v| !g.is_observed(v)) {
            return Err(Error::Argument(format!("policy input `{}` is not observed", g.name(v))));
        }
    }
    let desc = g.descendants(&NodeSet::singleton(action))?;
    let bad = inputs.intersection(&desc);
    if !bad.is_empty() {
        return Err(Error::Argument(format!(
            "policy inputs {:?} are descendants of `{}`",
            g.names(&bad),
            g.name(action)
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicPolicy {
    pub action: VarId,
    pub inputs: NodeSet,
    /// Action value per input configuration (id order, first input most significant).
    pub map: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(bn: &DiscreteBN, action: VarId, inputs: NodeSet, map: Vec<usize>) -> Result<Self> {
        check_inputs(bn.graph(), action, &inputs, false)?;
        let rows: usize = inputs.iter().map(|v| bn.card(v)).product();
        if map.len() != rows {
            return Err(Error::Policy(format!("map has {} entries, expected {rows}", map.len())));
        }
        if let Some(x) = map.iter().find(|&&x| x >= bn.card(action)) {
            return Err(Error::Policy(format!("action value {x} out of range")));
        }
        Ok(DeterministicPolicy { action, inputs, map })
    }

    /// The policy `X = x` regardless of inputs.
    pub fn constant(bn: &DiscreteBN, action: VarId, x: usize) -> Result<Self> {
        DeterministicPolicy::new(bn, action, NodeSet::new(), vec![x])
    }

    pub fn value(&self, z: &Assignment, cards: &[usize]) -> usize {
        self.map[config_index(&self.inputs, z, cards)]
    }

    pub fn to_stochastic(&self, bn: &DiscreteBN) -> StochasticPolicy {
        let k = bn.card(self.action);
        let table = self.map.iter().flat_map(|&x| (0..k).map(move |v| if v == x { 1.0 } else { 0.0 })).collect();
        StochasticPolicy { action: self.action, inputs: self.inputs.clone(), table }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticPolicy {
    pub action: VarId,
    pub inputs: NodeSet,
    /// Rows of `P*(x | z)`, one per input configuration.
    pub table: Vec<f64>,
}

impl StochasticPolicy {
    pub fn new(bn: &DiscreteBN, action: VarId, inputs: NodeSet, table: Vec<f64>) -> Result<Self> {
        Self::build(bn, action, inputs, table, false)
    }

    fn build(bn: &DiscreteBN, action: VarId, inputs: NodeSet, table: Vec<f64>, allow_latent: bool) -> Result<Self> {
        check_inputs(bn.graph(), action, &inputs, allow_latent)?;
        let k = bn.card(action);
        let rows: usize = inputs.iter().map(|v| bn.card(v)).product();
        if table.len() != rows * k {
            return Err(Error::Policy(format!("table has {} entries, expected {}", table.len(), rows * k)));
        }
        for (r, row) in table.chunks(k).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::Policy(format!("row {r} is not a distribution")));
            }
        }
        Ok(StochasticPolicy { action, inputs, table })
    }

    pub fn row(&self, z: &Assignment, bn: &DiscreteBN) -> &[f64] {
        let k = bn.card(self.action);
        let r = config_index(&self.inputs, z, bn.cards());
        &self.table[r * k..(r + 1) * k]
    }

    /// The network in which the action follows this policy.
    pub fn apply(&self, bn: &DiscreteBN) -> Result<DiscreteBN> {
        bn.replace_mechanism(self.action, &self.inputs, self.table.clone())
    }
}

/// `y` restricted to variables other than `z`, or `None` if the two disagree.
fn consistent_rest(y: &Assignment, z: &Assignment) -> Option<Assignment> {
    if y.iter().any(|(v, x)| z.get(v).is_some_and(|zx| zx != x)) {
        return None;
    }
    Some(y.iter().filter(|(v, _)| !z.contains(*v)).collect())
}

/// `P(y | do(x), z)` where `y` may mention `x` or members of `z`.
fn post_action(ev: &mut Evaluator, y: &Assignment, action: VarId, x: usize, z: &Assignment) -> Result<f64> {
    let Some(mut rest) = consistent_rest(y, z) else { return Ok(0.0) };
    if let Some(yx) = rest.get(action) {
        if yx != x {
            return Ok(0.0);
        }
        rest = rest.iter().filter(|(v, _)| *v != action).collect();
    }
    if rest.is_empty() {
        return Ok(1.0);
    }
    ev.prob(&rest, z, &Assignment::of(&[(action, x)]))
}

/// `Σ_z P(y | do(X = g(z)), z) P(z)`; configurations with `P(z) = 0` contribute 0.
pub fn eval_det_policy(bn: &DiscreteBN, pol: &DeterministicPolicy, y: &Assignment) -> Result<f64> {
    check_inputs(bn.graph(), pol.action, &pol.inputs, true)?;
    let mut ev = Evaluator::new(bn);
    let inputs: Vec<VarId> = pol.inputs.iter().collect();
    let mut total = 0.0;
    for z in configurations(&inputs, bn.cards()) {
        let pz = ev.prob(&z, &Assignment::new(), &Assignment::new())?;
        if pz <= 0.0 {
            continue;
        }
        total += post_action(&mut ev, y, pol.action, pol.value(&z, bn.cards()), &z)? * pz;
    }
    Ok(total)
}

/// `Σ_x Σ_z P(y | do(x), z) P*(x | z) P(z)`.
pub fn eval_stoch_policy(bn: &DiscreteBN, pol: &StochasticPolicy, y: &Assignment) -> Result<f64> {
    check_inputs(bn.graph(), pol.action, &pol.inputs, true)?;
    let mut ev = Evaluator::new(bn);
    let inputs: Vec<VarId> = pol.inputs.iter().collect();
    let mut total = 0.0;
    for z in configurations(&inputs, bn.cards()) {
        let pz = ev.prob(&z, &Assignment::new(), &Assignment::new())?;
        if pz <= 0.0 {
            continue;
        }
        for (x, &px) in pol.row(&z, bn).iter().enumerate() {
            if px > 0.0 {
                total += post_action(&mut ev, y, pol.action, x, &z)? * px * pz;
            }
        }
    }
    Ok(total)
}

/// Reference value: `P(y)` in the network where the action follows the policy.
pub fn oracle_policy_value(bn: &DiscreteBN, pol: &StochasticPolicy, y: &Assignment) -> Result<f64> {
    pol.apply(bn)?.prob(y, &Assignment::new(), &Assignment::new())
}

/// Enumerates deterministic maps when there are at most this many.
pub const MIXTURE_MAP_CAP: usize = 1 << 16;

/// `Σ_g [Π_z P*(g(z) | z)] · value(g)` over every deterministic map `g`.
pub fn mixture_of_deterministic(bn: &DiscreteBN, pol: &StochasticPolicy, y: &Assignment) -> Result<f64> {
    let k = bn.card(pol.action);
    let rows = pol.table.len() / k;
    let count = (k as f64).powi(rows as i32);
    if count > MIXTURE_MAP_CAP as f64 {
        return Err(Error::CapExceeded(MIXTURE_MAP_CAP));
    }
    let mut map = vec![0usize; rows];
    let mut total = 0.0;
    loop {
        let weight: f64 = map.iter().enumerate().map(|(r, &x)| pol.table[r * k + x]).product();
        if weight > 0.0 {
            let det = DeterministicPolicy { action: pol.action, inputs: pol.inputs.clone(), map: map.clone() };
            total += weight * eval_det_policy(bn, &det, y)?;
        }
        let Some(i) = (0..rows).rev().find(|&i| map[i] + 1 < k) else { break };
        map[i] += 1;
        map[i + 1..].iter_mut().for_each(|x| *x = 0);
    }
    Ok(total)
}

/// Precondition-gated action: with `Z = W ∪ pa(X)`, `X` keeps its natural
/// mechanism when `cond(w)` is false and is set to `x_val` when it is true.
pub fn strips_policy(
    bn: &DiscreteBN,
    x: VarId,
    x_val: usize,
    w: &NodeSet,
    cond: &dyn Fn(&Assignment) -> bool,
) -> Result<StochasticPolicy> {
    let g = bn.graph();
    g.check(x)?;
    if x_val >= bn.card(x) {
        return Err(Error::Argument(format!("value {x_val} out of range for `{}`", g.name(x))));
    }
    let pa = g.parents(x)?.clone();
    let z = w.union(&pa);
    check_inputs(g, x, &z, true)?;
    let zs: Vec<VarId> = z.iter().collect();
    let k = bn.card(x);
    let mut table = Vec::new();
    for cfg in configurations(&zs, bn.cards()) {
        if cond(&cfg.restricted(w)) {
            table.extend((0..k).map(|v| if v == x_val { 1.0 } else { 0.0 }));
        } else {
            table.extend_from_slice(bn.row(x, &cfg.restricted(&pa))?);
        }
    }
    StochasticPolicy::build(bn, x, z, table, true)
}

/// Identification of `P(y | do(x), z)`, which licenses evaluating any policy on
/// `x` with inputs `z` from observational data.
pub fn identify_policy(
    g: &CausalGraph,
    x: VarId,
    z: &NodeSet,
    y: &NodeSet,
    config: &SearchConfig,
) -> Result<IdentifyOutcome> {
    let ys: Vec<VarId> = y.iter().collect();
    let zs: Vec<VarId> = z.iter().collect();
    let q = Term::simple(&ys, &zs, &[x])?;
    identify(g, &ProbExpr::Term(q), config)
}

/// Policy value computed from an identified formula for `P(y | do(x), z)`:
/// `Σ_z Σ_x f(y, x, z) P*(x | z) P(z)`, with `P(z)` observational.
pub fn symbolic_policy_value(
    bn: &DiscreteBN,
    formula: &ProbExpr,
    pol: &StochasticPolicy,
    y: &Assignment,
) -> Result<f64> {
    let mut ev = Evaluator::new(bn);
    let inputs: Vec<VarId> = pol.inputs.iter().collect();
    let mut total = 0.0;
    for z in configurations(&inputs, bn.cards()) {
        let pz = ev.prob(&z, &Assignment::new(), &Assignment::new())?;
        if pz <= 0.0 {
            continue;
        }
        for (x, &px) in pol.row(&z, bn).iter().enumerate() {
            if px > 0.0 {
                let binding = y.merged(&z)?.with(pol.action, x);
                total += ev.eval(formula, &binding)? * px * pz;
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Deterministic(DeterministicPolicy),
    Stochastic(StochasticPolicy),
}

impl Policy {
    pub fn action(&self) -> VarId {
        match self {
            Policy::Deterministic(p) => p.action,
            Policy::Stochastic(p) => p.action,
        }
    }

    pub fn inputs(&self) -> &NodeSet {
        match self {
            Policy::Deterministic(p) => &p.inputs,
            Policy::Stochastic(p) => &p.inputs,
        }
    }

    pub fn to_stochastic(&self, bn: &DiscreteBN) -> StochasticPolicy {
        match self {
            Policy::Deterministic(p) => p.to_stochastic(bn),
            Policy::Stochastic(p) => p.clone(),
        }
    }

    pub fn eval(&self, bn: &DiscreteBN, y: &Assignment) -> Result<f64> {
        match self {
            Policy::Deterministic(p) => eval_det_policy(bn, p, y),
            Policy::Stochastic(p) => eval_stoch_policy(bn, p, y),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    action: String,
    #[serde(default)]
    inputs: Vec<String>,
    map: Option<BTreeMap<String, usize>>,
    table: Option<Vec<Vec<f64>>>,
    strips: Option<StripsFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StripsFile {
    value: usize,
    precondition: Vec<Vec<usize>>,
}

/// Loads a policy document. Configurations in `map` keys (`"0,1"`), `table` rows and
/// `precondition` entries follow the order of `inputs` as listed in the file.
pub fn load_policy(bn: &DiscreteBN, text: &str) -> Result<Policy> {
    let g = bn.graph();
    let f: PolicyFile = serde_json::from_str(text)?;
    let action = g.resolve(&f.action)?;
    let file_inputs = f.inputs.iter().map(|n| g.resolve(n)).collect::<Result<Vec<VarId>>>()?;
    let inputs: NodeSet = file_inputs.iter().copied().collect();
    if inputs.len() != file_inputs.len() {
        return Err(Error::Policy("inputs listed twice".into()));
    }
    let file_configs = configurations(&file_inputs, bn.cards());
    // Position in the file's order of each configuration, visited in id order.
    let ordered: Vec<VarId> = inputs.iter().collect();
    let file_pos: BTreeMap<Assignment, usize> = file_configs.iter().cloned().zip(0..).collect();
    let id_order: Vec<usize> = configurations(&ordered, bn.cards()).iter().map(|c| file_pos[c]).collect();
    let parse_cfg = |vals: &[usize]| -> Result<Assignment> {
        if vals.len() != file_inputs.len() {
            return Err(Error::Policy(format!("configuration {vals:?} does not match inputs {:?}", f.inputs)));
        }
        for (v, &x) in file_inputs.iter().zip(vals) {
            if x >= bn.card(*v) {
                return Err(Error::Policy(format!("value {x} out of range for `{}`", g.name(*v))));
            }
        }
        Ok(file_inputs.iter().copied().zip(vals.iter().copied()).collect())
    };
    match (f.map, f.table, f.strips) {
        (Some(map), None, None) => {
            let mut by_cfg = BTreeMap::new();
            for (key, x) in map {
                let vals = if key.trim().is_empty() {
                    vec![]
                } else {
                    key.split(',')
                        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Policy(format!("bad configuration `{key}`"))))
                        .collect::<Result<Vec<_>>>()?
                };
                if by_cfg.insert(parse_cfg(&vals)?, x).is_some() {
                    return Err(Error::Policy(format!("configuration `{key}` listed twice")));
                }
            }
            let values = file_configs
                .iter()
                .map(|c| by_cfg.get(c).copied().ok_or_else(|| Error::Policy(format!("map is missing {}", c.display(g)))))
                .collect::<Result<Vec<usize>>>()?;
            let map = id_order.iter().map(|&i| values[i]).collect();
            Ok(Policy::Deterministic(DeterministicPolicy::new(bn, action, inputs, map)?))
        }
        (None, Some(rows), None) => {
            if rows.len() != file_configs.len() {
                return Err(Error::Policy(format!("table has {} rows, expected {}", rows.len(), file_configs.len())));
            }
            let table = id_order.iter().flat_map(|&i| rows[i].iter().copied()).collect();
            Ok(Policy::Stochastic(StochasticPolicy::new(bn, action, inputs, table)?))
        }
        (None, None, Some(s)) => {
            let satisfying = s.precondition.iter().map(|c| parse_cfg(c)).collect::<Result<Vec<_>>>()?;
            let cond = |w: &Assignment| satisfying.contains(w);
            Ok(Policy::Stochastic(strips_policy(bn, action, s.value, &inputs, &cond)?))
        }
        _ => Err(Error::Policy("policy needs exactly one of `map`, `table`, `strips`".into())),
    }
}
