//! Exact semantics over discrete networks: the joint product of CPTs, intervention
//! by mechanism replacement, indicator-augmented networks, and conditional
//! probabilities by dense enumeration. Everything else in the crate is checked
//! against this module.

mod cpt_json;
mod eval;
mod random;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, NodeSet, VarId};

pub use cpt_json::{load_cpts, to_cpt_json};
pub use eval::{eval_expr, term_bindings, term_oracle, Evaluator};
pub use random::{random_binary_bn, random_bn, random_graph};

/// Largest dense joint table we will build.
pub const MAX_CELLS: usize = 1 << 24;

/// Partial map from variables to value indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<VarId, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(pairs: &[(VarId, usize)]) -> Self {
        Assignment(pairs.iter().copied().collect())
    }

    pub fn set(&mut self, v: VarId, value: usize) -> &mut Self {
        self.0.insert(v, value);
        self
    }

    pub fn with(mut self, v: VarId, value: usize) -> Self {
        self.0.insert(v, value);
        self
    }

    pub fn get(&self, v: VarId) -> Option<usize> {
        self.0.get(&v).copied()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.0.contains_key(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(&v, &x)| (v, x))
    }

    pub fn vars(&self) -> NodeSet {
        self.0.keys().copied().collect()
    }

    /// Union of two assignments; a variable assigned different values is an error.
    pub fn merged(&self, other: &Assignment) -> Result<Assignment> {
        let mut out = self.clone();
        for (v, x) in other.iter() {
            if let Some(old) = out.0.insert(v, x) {
                if old != x {
                    return Err(Error::Argument(format!("variable #{} assigned both {old} and {x}", v.0)));
                }
            }
        }
        Ok(out)
    }

    pub fn restricted(&self, vars: &NodeSet) -> Assignment {
        Assignment(self.0.iter().filter(|(v, _)| vars.contains(**v)).map(|(&v, &x)| (v, x)).collect())
    }

    pub fn display(&self, g: &CausalGraph) -> String {
        self.iter().map(|(v, x)| format!("{}={x}", g.name(v))).collect::<Vec<_>>().join(",")
    }
}

impl FromIterator<(VarId, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Every joint configuration of `vars`, last variable fastest.
pub fn configurations(vars: &[VarId], cards: &[usize]) -> Vec<Assignment> {
    let mut out = Vec::new();
    let total: usize = vars.iter().map(|v| cards[v.index()]).product();
    let mut digits = vec![0usize; vars.len()];
    for _ in 0..total {
        out.push(vars.iter().copied().zip(digits.iter().copied()).collect());
        for i in (0..vars.len()).rev() {
            digits[i] += 1;
            if digits[i] < cards[vars[i].index()] {
                break;
            }
            digits[i] = 0;
        }
    }
    out
}

/// Discrete network: a graph, a cardinality per variable, and one CPT per variable.
///
/// `cpt[v]` holds one row of length `card[v]` per parent configuration; parent
/// configurations are ordered lexicographically with parents in id order, the first
/// parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBN {
    graph: CausalGraph,
    card: Vec<usize>,
    cpt: Vec<Vec<f64>>,
}

impl DiscreteBN {
    pub fn new(graph: CausalGraph, card: Vec<usize>, cpt: Vec<Vec<f64>>) -> Result<Self> {
        let bn = DiscreteBN { graph, card, cpt };
        bn.validate()?;
        Ok(bn)
    }

    fn validate(&self) -> Result<()> {
        let g = &self.graph;
        if self.card.len() != g.node_count() || self.cpt.len() != g.node_count() {
            return Err(Error::Cpt("one cardinality and one table per variable required".into()));
        }
        for v in g.nodes() {
            let name = g.name(v);
            let k = self.card[v.index()];
            if k < 2 {
                return Err(Error::Cpt(format!("`{name}` needs cardinality >= 2, got {k}")));
            }
            let rows: usize = g.pa(v).iter().map(|p| self.card[p.index()]).product();
            let table = &self.cpt[v.index()];
            if table.len() != rows * k {
                return Err(Error::Cpt(format!("`{name}` table has {} entries, expected {}", table.len(), rows * k)));
            }
            for (r, row) in table.chunks(k).enumerate() {
                if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::Cpt(format!("`{name}` row {r} has an entry outside [0,1]")));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::Cpt(format!("`{name}` row {r} sums to {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn card(&self, v: VarId) -> usize {
        self.card[v.index()]
    }

    pub fn cards(&self) -> &[usize] {
        &self.card
    }

    pub fn table(&self, v: VarId) -> &[f64] {
        &self.cpt[v.index()]
    }

    /// Index of the parent configuration of `v` within a full or partial assignment.
    pub fn parent_row(&self, v: VarId, values: &dyn Fn(VarId) -> usize) -> usize {
        self.graph.pa(v).iter().fold(0, |acc, p| acc * self.card[p.index()] + values(p))
    }

    /// `P(v = value | parents)`, parents read from `values`.
    pub fn cpt_entry(&self, v: VarId, value: usize, values: &dyn Fn(VarId) -> usize) -> f64 {
        let row = self.parent_row(v, values);
        self.cpt[v.index()][row * self.card[v.index()] + value]
    }

    /// The CPT row of `v` for one parent configuration.
    pub fn row(&self, v: VarId, parents: &Assignment) -> Result<&[f64]> {
        for p in self.graph.pa(v) {
            if !parents.contains(p) {
                return Err(Error::Argument(format!("parent `{}` of `{}` unassigned", self.graph.name(p), self.graph.name(v))));
            }
        }
        let r = self.parent_row(v, &|p| parents.get(p).unwrap());
        let k = self.card[v.index()];
        Ok(&self.cpt[v.index()][r * k..(r + 1) * k])
    }

    fn check_assignment(&self, a: &Assignment) -> Result<()> {
        for (v, x) in a.iter() {
            self.graph.check(v)?;
            if x >= self.card[v.index()] {
                return Err(Error::Argument(format!("value {x} out of range for `{}`", self.graph.name(v))));
            }
        }
        Ok(())
    }

    /// Dense joint over every variable, latents included.
    pub fn joint(&self) -> Result<JointTable> {
        let n = self.graph.node_count();
        let total = self.card.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k).filter(|&t| t <= MAX_CELLS));
        let Some(total) = total else {
            return Err(Error::Resource(format!("joint state space exceeds {MAX_CELLS} cells")));
        };
        let order = self.graph.topological_order().expect("validated acyclic");
        let mut data = vec![0.0; total];
        let mut digits = vec![0usize; n];
        for cell in data.iter_mut() {
            let mut p = 1.0;
            for &v in &order {
                p *= self.cpt_entry(v, digits[v.index()], &|u| digits[u.index()]);
                if p == 0.0 {
                    break;
                }
            }
            *cell = p;
            for i in (0..n).rev() {
                digits[i] += 1;
                if digits[i] < self.card[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        Ok(JointTable::new(self.card.clone(), data))
    }

    /// Mechanism replacement: each assigned variable loses its parents and gets a
    /// point-mass CPT at the assigned value.
    pub fn intervene(&self, dos: &Assignment) -> Result<DiscreteBN> {
        self.check_assignment(dos)?;
        for (v, _) in dos.iter() {
            if !self.graph.is_observed(v) {
                return Err(Error::Argument(format!("cannot intervene on non-observed `{}`", self.graph.name(v))));
            }
        }
        if dos.is_empty() {
            return Ok(self.clone());
        }
        let graph = self.graph.cut_incoming(&dos.vars())?;
        let mut cpt = self.cpt.clone();
        for (v, x) in dos.iter() {
            let mut row = vec![0.0; self.card[v.index()]];
            row[x] = 1.0;
            cpt[v.index()] = row;
        }
        Ok(DiscreteBN { graph, card: self.card.clone(), cpt })
    }

    /// Replaces the mechanism of `v` by an arbitrary CPT over new parents `inputs`.
    pub fn replace_mechanism(&self, v: VarId, inputs: &NodeSet, table: Vec<f64>) -> Result<DiscreteBN> {
        let graph = self.graph.with_parents(v, inputs)?;
        let mut cpt = self.cpt.clone();
        cpt[v.index()] = table;
        DiscreteBN::new(graph, self.card.clone(), cpt)
    }

    /// Adds an indicator parent `F_x` with values `idle` (index 0) and `do(k)`
    /// (index `k + 1`). `x` keeps its CPT under `idle` and is forced to `k` under
    /// `do(k)`. The indicator's prior puts `prior_idle` on `idle` and splits the rest
    /// evenly.
    pub fn augmented(&self, x: VarId, prior_idle: f64) -> Result<(DiscreteBN, VarId)> {
        if !(0.0..=1.0).contains(&prior_idle) {
            return Err(Error::Argument(format!("prior {prior_idle} is not a probability")));
        }
        let (graph, f) = self.graph.augment(x)?;
        let kx = self.card[x.index()];
        let mut card = self.card.clone();
        card.push(kx + 1);
        let mut cpt = self.cpt.clone();
        let mut prior = vec![(1.0 - prior_idle) / kx as f64; kx + 1];
        prior[0] = prior_idle;
        cpt.push(prior);

        // `f` has the largest id, so it is the least significant parent of x.
        let old = &self.cpt[x.index()];
        let mut table = Vec::with_capacity(old.len() * (kx + 1));
        for row in old.chunks(kx) {
            table.extend_from_slice(row);
            for forced in 0..kx {
                table.extend((0..kx).map(|v| if v == forced { 1.0 } else { 0.0 }));
            }
        }
        cpt[x.index()] = table;
        Ok((DiscreteBN::new(graph, card, cpt)?, f))
    }

    /// `P(targets | obs)` after intervening with `dos`.
    pub fn prob(&self, targets: &Assignment, obs: &Assignment, dos: &Assignment) -> Result<f64> {
        self.check_assignment(targets)?;
        self.check_assignment(obs)?;
        let tv = targets.vars();
        let ov = obs.vars();
        if !tv.is_disjoint(&ov) || !tv.is_disjoint(&dos.vars()) || !ov.is_disjoint(&dos.vars()) {
            return Err(Error::Argument("targets, observations and interventions must be disjoint".into()));
        }
        let joint = self.intervene(dos)?.joint()?;
        joint.conditional(targets, obs)
    }
}

/// Dense probability table over all variables of a network, last variable fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    cards: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<f64>,
}

impl JointTable {
    fn new(cards: Vec<usize>, data: Vec<f64>) -> Self {
        let mut strides = vec![1; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cards[i + 1];
        }
        JointTable { cards, strides, data }
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn cell(&self, values: &[usize]) -> f64 {
        let i: usize = values.iter().zip(&self.strides).map(|(v, s)| v * s).sum();
        self.data[i]
    }

    /// Marginal table over `vars` (in the given order, last fastest).
    pub fn marginal(&self, vars: &[VarId]) -> Marginal {
        let cards: Vec<usize> = vars.iter().map(|v| self.cards[v.index()]).collect();
        let mut mstrides = vec![1; vars.len()];
        for i in (0..vars.len().saturating_sub(1)).rev() {
            mstrides[i] = mstrides[i + 1] * cards[i + 1];
        }
        let size: usize = cards.iter().product();
        let mut data = vec![0.0; size];
        let n = self.cards.len();
        // Contribution of each joint variable to the marginal index.
        let mut weight = vec![0usize; n];
        for (i, v) in vars.iter().enumerate() {
            weight[v.index()] = mstrides[i];
        }
        let mut digits = vec![0usize; n];
        let mut idx = 0usize;
        for &p in &self.data {
            data[idx] += p;
            for i in (0..n).rev() {
                digits[i] += 1;
                idx += weight[i];
                if digits[i] < self.cards[i] {
                    break;
                }
                idx -= weight[i] * digits[i];
                digits[i] = 0;
            }
        }
        Marginal { vars: vars.to_vec(), strides: mstrides, data }
    }

    /// Probability of a (partial) assignment.
    pub fn prob_of(&self, a: &Assignment) -> f64 {
        let vars: Vec<VarId> = a.iter().map(|(v, _)| v).collect();
        self.marginal(&vars).get(a)
    }

    pub fn conditional(&self, targets: &Assignment, obs: &Assignment) -> Result<f64> {
        let both = targets.merged(obs)?;
        let den = self.prob_of(obs);
        if den <= 0.0 {
            return Err(Error::UndefinedConditional);
        }
        Ok(self.prob_of(&both) / den)
    }

    /// The table conditioned on `v = value`, with `v` dropped.
    pub fn slice(&self, v: VarId, value: usize) -> Result<JointTable> {
        let vi = v.index();
        let mut cards = self.cards.clone();
        cards.remove(vi);
        let outer: usize = self.cards[..vi].iter().product();
        let inner = self.strides[vi];
        let mut data = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * self.strides[vi] * self.cards[vi] + value * inner;
            data.extend_from_slice(&self.data[base..base + inner]);
        }
        let z: f64 = data.iter().sum();
        if z <= 0.0 {
            return Err(Error::UndefinedConditional);
        }
        data.iter_mut().for_each(|p| *p /= z);
        Ok(JointTable::new(cards, data))
    }

    pub fn max_abs_diff(&self, other: &JointTable) -> f64 {
        assert_eq!(self.cards, other.cards, "tables over different spaces");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Marginal distribution over a subset of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    vars: Vec<VarId>,
    strides: Vec<usize>,
    data: Vec<f64>,
}

impl Marginal {
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    /// Probability of the cell selected by `a`, which must assign every variable.
    pub fn get(&self, a: &Assignment) -> f64 {
        let i: usize = self
            .vars
            .iter()
            .zip(&self.strides)
            .map(|(v, s)| a.get(*v).expect("marginal variable unassigned") * s)
            .sum();
        self.data[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    fn frontdoor() -> CausalGraph {
        parse_graph("latent U\nU -> X\nU -> Y\nX -> Z\nZ -> Y\n").unwrap()
    }

    #[test]
    fn single_node_joint() {
        let g = parse_graph("X\n").unwrap();
        let bn = DiscreteBN::new(g, vec![2], vec![vec![0.3, 0.7]]).unwrap();
        assert_eq!(bn.joint().unwrap().data(), &[0.3, 0.7]);
    }

    #[test]
    fn independent_pair_is_outer_product() {
        let g = parse_graph("A\nB\n").unwrap();
        let bn = DiscreteBN::new(g, vec![2, 3], vec![vec![0.4, 0.6], vec![0.2, 0.3, 0.5]]).unwrap();
        let j = bn.joint().unwrap();
        for a in 0..2 {
            for b in 0..3 {
                let expect = [0.4, 0.6][a] * [0.2, 0.3, 0.5][b];
                assert!((j.cell(&[a, b]) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn marginals_match_chain_computation() {
        let g = frontdoor();
        let bn = random_binary_bn(&g, 7);
        let j = bn.joint().unwrap();
        assert!((j.total() - 1.0).abs() < 1e-12);
        let [u, x, y, z] = ["U", "X", "Y", "Z"].map(|n| g.id(n).unwrap());
        // Forward computation in topological order, summing in a different order
        // from the joint enumeration.
        let pu = bn.table(u).to_vec();
        let mut px = [0.0; 2];
        let mut pz = [0.0; 2];
        let mut py = [0.0; 2];
        for uv in 0..2 {
            for xv in 0..2 {
                let pux = pu[uv] * bn.table(x)[uv * 2 + xv];
                px[xv] += pux;
                for zv in 0..2 {
                    let puxz = pux * bn.table(z)[xv * 2 + zv];
                    pz[zv] += puxz;
                    for yv in 0..2 {
                        // Y's parents in id order: U, Z.
                        py[yv] += puxz * bn.table(y)[(uv * 2 + zv) * 2 + yv];
                    }
                }
            }
        }
        for (v, expect) in [(x, px), (z, pz), (y, py)] {
            let m = j.marginal(&[v]);
            for k in 0..2 {
                assert!((m.get(&Assignment::of(&[(v, k)])) - expect[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let text: String = (0..25).map(|i| format!("V{i}\n")).collect();
        let g = parse_graph(&text).unwrap();
        let bn = random_binary_bn(&g, 1);
        assert!(matches!(bn.joint(), Err(Error::Resource(_))));
    }

    #[test]
    fn intervention_on_root_equals_conditioning() {
        let g = parse_graph("X -> Y\n").unwrap();
        let bn = random_binary_bn(&g, 3);
        let [x, y] = ["X", "Y"].map(|n| g.id(n).unwrap());
        for xv in 0..2 {
            let a = bn.prob(&Assignment::of(&[(y, 1)]), &Assignment::new(), &Assignment::of(&[(x, xv)])).unwrap();
            let b = bn.prob(&Assignment::of(&[(y, 1)]), &Assignment::of(&[(x, xv)]), &Assignment::new()).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn confounded_intervention_differs_from_conditioning() {
        let g = frontdoor();
        let [x, y] = ["X", "Y"].map(|n| g.id(n).unwrap());
        let found = (0..100).any(|seed| {
            let bn = random_binary_bn(&g, seed);
            let a = bn.prob(&Assignment::of(&[(y, 1)]), &Assignment::new(), &Assignment::of(&[(x, 1)])).unwrap();
            let b = bn.prob(&Assignment::of(&[(y, 1)]), &Assignment::of(&[(x, 1)]), &Assignment::new()).unwrap();
            (a - b).abs() > 0.01
        });
        assert!(found);
    }

    #[test]
    fn joint_interventions_commute() {
        let g = frontdoor();
        let bn = random_binary_bn(&g, 11);
        let [x, z] = ["X", "Z"].map(|n| g.id(n).unwrap());
        let both = bn.intervene(&Assignment::of(&[(x, 1), (z, 0)])).unwrap().joint().unwrap();
        let xz = bn.intervene(&Assignment::of(&[(x, 1)])).unwrap().intervene(&Assignment::of(&[(z, 0)])).unwrap();
        let zx = bn.intervene(&Assignment::of(&[(z, 0)])).unwrap().intervene(&Assignment::of(&[(x, 1)])).unwrap();
        assert!(both.max_abs_diff(&xz.joint().unwrap()) < 1e-15);
        assert!(both.max_abs_diff(&zx.joint().unwrap()) < 1e-15);
    }

    #[test]
    fn intervening_on_latent_is_rejected() {
        let g = frontdoor();
        let bn = random_binary_bn(&g, 0);
        let u = g.id("U").unwrap();
        assert!(matches!(bn.intervene(&Assignment::of(&[(u, 0)])), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_probability_conditioning_is_signalled() {
        let g = parse_graph("X -> Y\n").unwrap();
        let bn = random_binary_bn(&g, 0);
        let [x, y] = ["X", "Y"].map(|n| g.id(n).unwrap());
        let r = bn.prob(&Assignment::of(&[(y, 0)]), &Assignment::of(&[(x, 0)]), &Assignment::of(&[(x, 1)]));
        assert!(r.is_err());
        let bn2 = bn.intervene(&Assignment::of(&[(x, 1)])).unwrap();
        let r = bn2.prob(&Assignment::of(&[(y, 0)]), &Assignment::of(&[(x, 0)]), &Assignment::new());
        assert_eq!(r, Err(Error::UndefinedConditional));
    }

    #[test]
    fn augmented_network_conditionals() {
        let g = frontdoor();
        let bn = random_binary_bn(&g, 5);
        let x = g.id("X").unwrap();
        for prior in [0.1, 0.5, 0.9] {
            let (aug, f) = bn.augmented(x, prior).unwrap();
            let j = aug.joint().unwrap();
            let idle = j.slice(f, 0).unwrap();
            assert!(idle.max_abs_diff(&bn.joint().unwrap()) < 1e-12);
            for xv in 0..2 {
                let forced = j.slice(f, xv + 1).unwrap();
                let direct = bn.intervene(&Assignment::of(&[(x, xv)])).unwrap().joint().unwrap();
                assert!(forced.max_abs_diff(&direct) < 1e-12);
            }
        }
    }

    #[test]
    fn configurations_enumerate_last_fastest() {
        let vars = [VarId(0), VarId(1)];
        let cs = configurations(&vars, &[2, 3]);
        assert_eq!(cs.len(), 6);
        assert_eq!(cs[1], Assignment::of(&[(VarId(0), 0), (VarId(1), 1)]));
        assert_eq!(configurations(&[], &[]).len(), 1);
    }
}
