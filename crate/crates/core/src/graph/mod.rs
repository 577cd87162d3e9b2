//! Causal DAGs over named variables, with the edge surgeries used by the
//! rule side conditions and exact d-separation.

mod dsep;
mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use text::parse_graph;

/// Dense index of a variable inside one [`CausalGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Visibility {
    Observed,
    Latent,
    /// An intervention indicator `F_x` added by [`CausalGraph::augment`].
    Indicator,
}

/// Sorted, duplicate-free set of variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeSet(Vec<VarId>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    pub fn singleton(v: VarId) -> Self {
        NodeSet(vec![v])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn insert(&mut self, v: VarId) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: VarId) -> bool {
        match self.0.binary_search(&v) {
            Ok(i) => {
                self.0.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        self.iter().filter(|v| !other.contains(*v)).collect()
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        self.iter().filter(|v| other.contains(*v)).collect()
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    /// All subsets in order of increasing size, each size in lexicographic order.
    pub fn subsets(&self) -> Vec<NodeSet> {
        let n = self.len();
        let mut out = Vec::with_capacity(1 << n.min(20));
        for k in 0..=n {
            combinations(&self.0, k, &mut |c| out.push(NodeSet(c.to_vec())));
        }
        out
    }
}

/// Calls `f` on every `k`-combination of `items`, in lexicographic order.
pub(crate) fn combinations<T: Copy>(items: &[T], k: usize, f: &mut dyn FnMut(&[T])) {
    fn go<T: Copy>(items: &[T], k: usize, start: usize, buf: &mut Vec<T>, f: &mut dyn FnMut(&[T])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        let need = k - buf.len();
        for i in start..=items.len().saturating_sub(need) {
            if i >= items.len() {
                break;
            }
            buf.push(items[i]);
            go(items, k, i + 1, buf, f);
            buf.pop();
        }
    }
    if k > items.len() {
        return;
    }
    go(items, k, 0, &mut Vec::with_capacity(k), f);
}

impl FromIterator<VarId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = VarId>>(iter: I) -> Self {
        let mut v: Vec<VarId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = VarId;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, VarId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// Immutable DAG over named variables.
///
/// Variables are indexed in lexicographic name order at construction; nodes added
/// later by [`CausalGraph::augment`] are appended so existing indices stay valid.
#[derive(Clone, PartialEq, Eq)]
pub struct CausalGraph {
    names: Vec<String>,
    visibility: Vec<Visibility>,
    parents: Vec<NodeSet>,
    children: Vec<NodeSet>,
    index: HashMap<String, VarId>,
}

impl fmt::Debug for CausalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CausalGraph")
            .field("nodes", &self.names)
            .field("edges", &self.edge_names())
            .finish()
    }
}

/// Collects nodes and edges by name, then validates them into a [`CausalGraph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<String, Visibility>,
    edges: BTreeSet<(String, String)>,
}

pub(crate) fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: &str) -> Result<&mut Self> {
        if !valid_identifier(name) {
            return Err(Error::Graph(format!("invalid variable name `{name}`")));
        }
        self.nodes.entry(name.to_string()).or_insert(Visibility::Observed);
        Ok(self)
    }

    pub fn latent(&mut self, name: &str) -> Result<&mut Self> {
        self.node(name)?;
        self.nodes.insert(name.to_string(), Visibility::Latent);
        Ok(self)
    }

    pub fn edge(&mut self, parent: &str, child: &str) -> Result<&mut Self> {
        if parent == child {
            return Err(Error::Graph(format!("self-loop on `{parent}`")));
        }
        self.node(parent)?;
        self.node(child)?;
        if !self.edges.insert((parent.to_string(), child.to_string())) {
            return Err(Error::Graph(format!("duplicate edge {parent} -> {child}")));
        }
        Ok(self)
    }

    /// Replaces a bidirected arc by a fresh latent `_L{n}` with edges into both ends.
    pub fn bidirected(&mut self, a: &str, b: &str) -> Result<&mut Self> {
        let mut n = 1;
        let name = loop {
            let cand = format!("_L{n}");
            if !self.nodes.contains_key(&cand) {
                break cand;
            }
            n += 1;
        };
        self.latent(&name)?;
        self.edge(&name, a)?;
        self.edge(&name, b)?;
        Ok(self)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.nodes.contains_key(name)
    }

    pub fn build(&self) -> Result<CausalGraph> {
        let names: Vec<String> = self.nodes.keys().cloned().collect();
        let visibility: Vec<Visibility> = self.nodes.values().copied().collect();
        let index: HashMap<String, VarId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), VarId(i as u32)))
            .collect();
        let edges = self.edges.iter().map(|(p, c)| (index[p], index[c]));
        CausalGraph::from_parts(names, visibility, edges)
    }
}

impl CausalGraph {
    fn from_parts(
        names: Vec<String>,
        visibility: Vec<Visibility>,
        edges: impl Iterator<Item = (VarId, VarId)>,
    ) -> Result<Self> {
        let n = names.len();
        let mut parents = vec![NodeSet::new(); n];
        let mut children = vec![NodeSet::new(); n];
        for (p, c) in edges {
            parents[c.index()].insert(p);
            children[p.index()].insert(c);
        }
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), VarId(i as u32)))
            .collect();
        let g = CausalGraph { names, visibility, parents, children, index };
        if g.topological_order().is_none() {
            return Err(Error::Graph("edge relation contains a directed cycle".into()));
        }
        Ok(g)
    }

    /// Same node set, new edge list. Ids are preserved.
    fn with_edges(&self, edges: impl Iterator<Item = (VarId, VarId)>) -> Result<Self> {
        Self::from_parts(self.names.clone(), self.visibility.clone(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.names.len() as u32).map(VarId)
    }

    pub fn all_nodes(&self) -> NodeSet {
        self.nodes().collect()
    }

    pub fn observed(&self) -> NodeSet {
        self.nodes().filter(|&v| self.is_observed(v)).collect()
    }

    pub fn id(&self, name: &str) -> Result<VarId> {
        self.index.get(name).copied().ok_or_else(|| Error::Name(name.to_string()))
    }

    /// Resolves a name exactly, or else by a unique case-insensitive match.
    pub fn resolve(&self, name: &str) -> Result<VarId> {
        if let Some(&v) = self.index.get(name) {
            return Ok(v);
        }
        let mut hits = self.names.iter().enumerate().filter(|(_, n)| n.eq_ignore_ascii_case(name));
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(VarId(i as u32)),
            (Some(_), Some(_)) => Err(Error::Name(format!("{name} (ambiguous up to case)"))),
            _ => Err(Error::Name(name.to_string())),
        }
    }

    pub fn set(&self, names: &[&str]) -> Result<NodeSet> {
        names.iter().map(|n| self.id(n)).collect()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self, s: &NodeSet) -> Vec<&str> {
        s.iter().map(|v| self.name(v)).collect()
    }

    pub fn visibility(&self, v: VarId) -> Visibility {
        self.visibility[v.index()]
    }

    pub fn is_observed(&self, v: VarId) -> bool {
        self.visibility(v) == Visibility::Observed
    }

    pub fn is_latent(&self, v: VarId) -> bool {
        self.visibility(v) == Visibility::Latent
    }

    pub(crate) fn check(&self, v: VarId) -> Result<()> {
        if v.index() < self.names.len() {
            Ok(())
        } else {
            Err(Error::Name(format!("#{}", v.0)))
        }
    }

    pub(crate) fn check_set(&self, s: &NodeSet) -> Result<()> {
        s.iter().try_for_each(|v| self.check(v))
    }

    pub fn parents(&self, v: VarId) -> Result<&NodeSet> {
        self.check(v)?;
        Ok(&self.parents[v.index()])
    }

    pub fn children(&self, v: VarId) -> Result<&NodeSet> {
        self.check(v)?;
        Ok(&self.children[v.index()])
    }

    pub(crate) fn pa(&self, v: VarId) -> &NodeSet {
        &self.parents[v.index()]
    }

    pub(crate) fn ch(&self, v: VarId) -> &NodeSet {
        &self.children[v.index()]
    }

    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for c in self.nodes() {
            for p in self.pa(c) {
                out.push((p, c));
            }
        }
        out.sort();
        out
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(NodeSet::len).sum()
    }

    pub fn has_edge(&self, p: VarId, c: VarId) -> bool {
        self.pa(c).contains(p)
    }

    pub fn edge_names(&self) -> Vec<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(p, c)| (self.name(p).to_string(), self.name(c).to_string()))
            .collect()
    }

    /// Kahn's algorithm with smallest-index tie-breaking; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.node_count();
        let mut indeg: Vec<usize> = self.parents.iter().map(NodeSet::len).collect();
        let mut ready: BTreeSet<VarId> = self.nodes().filter(|v| indeg[v.index()] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in self.ch(v) {
                indeg[c.index()] -= 1;
                if indeg[c.index()] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    fn closure<'a>(&'a self, s: &NodeSet, step: impl Fn(VarId) -> &'a NodeSet) -> NodeSet {
        let mut seen = vec![false; self.node_count()];
        let mut queue: VecDeque<VarId> = s.iter().collect();
        let mut out = NodeSet::new();
        while let Some(v) = queue.pop_front() {
            for w in step(v) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    out.insert(w);
                    queue.push_back(w);
                }
            }
        }
        out.difference(s)
    }

    /// Strict ancestors of `s` (members of `s` are excluded).
    pub fn ancestors(&self, s: &NodeSet) -> Result<NodeSet> {
        self.check_set(s)?;
        Ok(self.closure(s, |v| &self.parents[v.index()]))
    }

    /// Strict descendants of `s` (members of `s` are excluded).
    pub fn descendants(&self, s: &NodeSet) -> Result<NodeSet> {
        self.check_set(s)?;
        Ok(self.closure(s, |v| &self.children[v.index()]))
    }

    /// `G` with every edge pointing into `x` removed.
    pub fn cut_incoming(&self, x: &NodeSet) -> Result<CausalGraph> {
        self.check_set(x)?;
        let edges = self.edges().into_iter().filter(|&(_, c)| !x.contains(c));
        self.with_edges(edges)
    }

    /// `G` with every edge leaving `x` removed.
    pub fn cut_outgoing(&self, x: &NodeSet) -> Result<CausalGraph> {
        self.check_set(x)?;
        let edges = self.edges().into_iter().filter(|&(p, _)| !x.contains(p));
        self.with_edges(edges)
    }

    /// Applies a [`Surgery`].
    pub fn surgered(&self, s: &Surgery) -> Result<CausalGraph> {
        self.check_set(&s.cut_incoming)?;
        self.check_set(&s.cut_outgoing)?;
        let edges = self
            .edges()
            .into_iter()
            .filter(|&(p, c)| !s.cut_incoming.contains(c) && !s.cut_outgoing.contains(p));
        self.with_edges(edges)
    }

    /// Replaces the parent set of `v`. Fails if the result has a cycle.
    pub fn with_parents(&self, v: VarId, parents: &NodeSet) -> Result<CausalGraph> {
        self.check(v)?;
        self.check_set(parents)?;
        let edges = self
            .edges()
            .into_iter()
            .filter(|&(_, c)| c != v)
            .chain(parents.iter().map(|p| (p, v)));
        self.with_edges(edges)
    }

    /// Members of `z` that are not ancestors of any `w` node in `G` with edges into `x` cut.
    pub fn z_not_anc_w(&self, x: &NodeSet, z: &NodeSet, w: &NodeSet) -> Result<NodeSet> {
        disjoint(&[("X", x), ("Z", z), ("W", w)])?;
        let g = self.cut_incoming(x)?;
        let anc_w = g.ancestors(w)?;
        Ok(z.difference(&anc_w))
    }

    /// Adds an indicator parent `F_x -> x`. Errors on latents and on a node that is
    /// already augmented; see [`CausalGraph::augment_again`].
    pub fn augment(&self, x: VarId) -> Result<(CausalGraph, VarId)> {
        self.check(x)?;
        if self.pa(x).iter().any(|p| self.visibility(p) == Visibility::Indicator) {
            return Err(Error::Argument(format!("`{}` is already augmented", self.name(x))));
        }
        self.augment_again(x)
    }

    /// Like [`CausalGraph::augment`] but permits a second, distinct indicator.
    pub fn augment_again(&self, x: VarId) -> Result<(CausalGraph, VarId)> {
        self.check(x)?;
        if self.visibility(x) != Visibility::Observed {
            return Err(Error::Argument(format!("cannot augment non-observed `{}`", self.name(x))));
        }
        let mut name = format!("F_{}", self.name(x));
        while self.index.contains_key(&name) {
            name.push('_');
        }
        let f = VarId(self.node_count() as u32);
        let mut names = self.names.clone();
        names.push(name);
        let mut vis = self.visibility.clone();
        vis.push(Visibility::Indicator);
        let edges = self.edges().into_iter().chain(std::iter::once((f, x)));
        Ok((Self::from_parts(names, vis, edges)?, f))
    }

    /// Structural warnings that do not make the graph unusable.
    pub fn well_formedness(&self) -> Vec<String> {
        self.nodes()
            .filter(|&v| self.is_latent(v) && self.ch(v).is_empty())
            .map(|v| format!("latent `{}` has no children", self.name(v)))
            .collect()
    }

    /// Renders the graph in the line format accepted by [`parse_graph`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in self.nodes() {
            if self.is_latent(v) {
                out.push_str(&format!("latent {}\n", self.name(v)));
            } else if self.pa(v).is_empty() && self.ch(v).is_empty() {
                out.push_str(&format!("{}\n", self.name(v)));
            }
        }
        for (p, c) in self.edge_names() {
            out.push_str(&format!("{p} -> {c}\n"));
        }
        out
    }
}

/// Edge deletions applied before a d-separation check.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Surgery {
    pub cut_incoming: NodeSet,
    pub cut_outgoing: NodeSet,
}

impl Surgery {
    /// `G_{X̄ Z̲}`-style label, e.g. `G_X̄Z̲`.
    pub fn label(&self, g: &CausalGraph) -> String {
        let mut s = String::from("G");
        if self.cut_incoming.is_empty() && self.cut_outgoing.is_empty() {
            return s;
        }
        s.push('_');
        for v in &self.cut_incoming {
            s.push_str(g.name(v));
            s.push('\u{0304}');
        }
        for v in &self.cut_outgoing {
            s.push_str(g.name(v));
            s.push('\u{0332}');
        }
        s
    }
}

pub(crate) fn disjoint(sets: &[(&str, &NodeSet)]) -> Result<()> {
    for (i, (an, a)) in sets.iter().enumerate() {
        for (bn, b) in &sets[i + 1..] {
            if !a.is_disjoint(b) {
                return Err(Error::Argument(format!("sets {an} and {bn} overlap")));
            }
        }
    }
    Ok(())
}
