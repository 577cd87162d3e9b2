//! Iterative-deepening proof search from an interventional query to a formula
//! without actions.
//!
//! States are canonical expressions. A move rewrites one term that still carries an
//! action (and is not a declared input): one of the three rules in either direction,
//! conditioning on a mediator, or splitting a joint term. The first goal state found
//! at the smallest depth wins, so derivations are shortest in move count, with ties
//! broken by the configured move order.

mod derivation;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{expand_by_conditioning_with, factor_joint_on, Mode, Path, ProbExpr, ProbTerm, Value};
use crate::graph::{CausalGraph, NodeSet, VarId};
use crate::rules::{apply_rule_with, Direction, Rule, RuleInstance};

pub use derivation::{explain, explain_outcome, replay, Derivation, DerivationRecord, Step, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    R1,
    R2,
    R3,
    ExpandSum,
    FactorJoint,
    SubstituteKnown,
}

/// Move families, in the order the search tries them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveClass {
    R3Delete,
    R2Forward,
    R2Backward,
    R1Delete,
    FactorJoint,
    ExpandSum,
    R1Insert,
    R3Insert,
}

impl MoveClass {
    pub const DEFAULT_ORDER: [MoveClass; 8] = [
        MoveClass::R3Delete,
        MoveClass::R2Forward,
        MoveClass::R2Backward,
        MoveClass::R1Delete,
        MoveClass::FactorJoint,
        MoveClass::ExpandSum,
        MoveClass::R1Insert,
        MoveClass::R3Insert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveClass::R3Delete => "r3-delete",
            MoveClass::R2Forward => "r2-forward",
            MoveClass::R2Backward => "r2-backward",
            MoveClass::R1Delete => "r1-delete",
            MoveClass::FactorJoint => "factor-joint",
            MoveClass::ExpandSum => "expand-sum",
            MoveClass::R1Insert => "r1-insert",
            MoveClass::R3Insert => "r3-insert",
        }
    }

    /// Parses a comma-separated list such as `r3-delete,r2-forward,expand-sum`.
    pub fn parse_list(s: &str) -> Result<Vec<MoveClass>> {
        let order = s.split(',').map(|p| p.trim().parse()).collect::<Result<Vec<MoveClass>>>()?;
        let distinct: HashSet<_> = order.iter().collect();
        if distinct.len() != order.len() {
            return Err(Error::Argument("move order lists a move class twice".into()));
        }
        Ok(order)
    }
}

impl FromStr for MoveClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MoveClass::DEFAULT_ORDER
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown move class `{s}`")))
    }
}

impl fmt::Display for MoveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_depth: usize,
    pub max_states: usize,
    pub move_order: Vec<MoveClass>,
    pub memoize: bool,
    /// 0 silent, 1 one line per depth, 2 also every expanded state.
    pub trace: u8,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_depth: 16,
            max_states: 200_000,
            move_order: MoveClass::DEFAULT_ORDER.to_vec(),
            memoize: true,
            trace: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdentifyOutcome {
    Identified(Derivation),
    /// No formula within `depth` moves. This is not a proof of non-identifiability.
    NonIdentifiedAtDepth { depth: usize, frontier: usize },
    Aborted { reason: String },
}

impl IdentifyOutcome {
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            IdentifyOutcome::Identified(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_identified(&self) -> bool {
        self.derivation().is_some()
    }

    pub fn label(&self) -> &'static str {
        match self {
            IdentifyOutcome::Identified(_) => "identified",
            IdentifyOutcome::NonIdentifiedAtDepth { .. } => "not_identified_within_depth",
            IdentifyOutcome::Aborted { .. } => "aborted",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub states: usize,
    pub expansions: usize,
    pub depth_reached: usize,
    pub trace: Vec<String>,
}

/// A rewrite at one term of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Rule { rule: Rule, dir: Direction, path: Path, z: NodeSet, inserted: Vec<(VarId, Value)> },
    Expand { path: Path, var: VarId },
    Factor { path: Path, var: VarId },
}

impl Move {
    pub fn path(&self) -> &Path {
        match self {
            Move::Rule { path, .. } | Move::Expand { path, .. } | Move::Factor { path, .. } => path,
        }
    }

    pub fn kind(&self) -> MoveKind {
        match self {
            Move::Rule { rule: Rule::R1, .. } => MoveKind::R1,
            Move::Rule { rule: Rule::R2, .. } => MoveKind::R2,
            Move::Rule { rule: Rule::R3, .. } => MoveKind::R3,
            Move::Expand { .. } => MoveKind::ExpandSum,
            Move::Factor { .. } => MoveKind::FactorJoint,
        }
    }
}

/// What a move did, beyond the resulting expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveDetail {
    Rule { instance: RuleInstance, inserted: Vec<(VarId, Value)> },
    Expand { var: VarId, id: u32 },
    Factor { var: VarId },
    Known { index: usize },
}

fn term_at<'e>(e: &'e ProbExpr, path: &[usize]) -> Result<&'e ProbTerm> {
    e.at(path)
        .and_then(ProbExpr::as_term)
        .ok_or_else(|| Error::Argument(format!("no term at path {path:?}")))
}

/// Applies `mv` to the canonical expression `e` and returns the new canonical
/// expression.
pub fn apply_move(g: &CausalGraph, e: &ProbExpr, mv: &Move) -> Result<(ProbExpr, MoveDetail)> {
    let term = term_at(e, mv.path())?;
    let (replacement, detail) = match mv {
        Move::Rule { rule, dir, z, inserted, .. } => {
            let (t, instance) = apply_rule_with(g, *rule, *dir, term, z, inserted)?;
            (ProbExpr::Term(t), MoveDetail::Rule { instance, inserted: inserted.clone() })
        }
        Move::Expand { var, .. } => {
            if !g.is_observed(*var) {
                return Err(Error::Argument(format!("cannot condition on non-observed `{}`", g.name(*var))));
            }
            let id = e.max_bound_id() + 1;
            (expand_by_conditioning_with(term, var, id)?, MoveDetail::Expand { var: *var, id })
        }
        Move::Factor { var, .. } => (factor_joint_on(term, var)?, MoveDetail::Factor { var: *var }),
    };
    let next = e.replace_at(mv.path(), replacement)?.canonicalize()?;
    Ok((next, detail))
}

/// Targets and conditions of a term with values ignored.
type Shape = (Vec<VarId>, Vec<(VarId, Mode)>);

fn shape(t: &ProbTerm) -> Shape {
    (t.targets.iter().map(|s| s.var).collect(), t.conditions.iter().map(|c| (c.slot.var, c.mode)).collect())
}

/// Identification of `query` from observational data alone.
pub fn identify(g: &CausalGraph, query: &ProbExpr, config: &SearchConfig) -> Result<IdentifyOutcome> {
    identify_from_causal_inputs(g, query, &[], config)
}

/// As [`identify`], but terms matching one of `known` (same variables and modes;
/// values may differ) count as measured inputs.
pub fn identify_from_causal_inputs(
    g: &CausalGraph,
    query: &ProbExpr,
    known: &[ProbTerm],
    config: &SearchConfig,
) -> Result<IdentifyOutcome> {
    identify_with_stats(g, query, known, config).map(|r| r.0)
}

pub fn identify_with_stats(
    g: &CausalGraph,
    query: &ProbExpr,
    known: &[ProbTerm],
    config: &SearchConfig,
) -> Result<(IdentifyOutcome, SearchStats)> {
    query.check_observed(g)?;
    for k in known {
        ProbExpr::Term(k.clone()).check_observed(g)?;
    }
    if g.topological_order().is_none() {
        return Err(Error::Graph("graph has a cycle".into()));
    }
    let initial = query.canonicalize()?;
    let mut s = Searcher::new(g, &initial, known, config);
    let outcome = s.run(&initial)?;
    s.stats.states = s.seen.len();
    Ok((outcome, s.stats))
}

struct Searcher<'a> {
    g: &'a CausalGraph,
    config: &'a SearchConfig,
    known: Vec<ProbTerm>,
    known_shapes: HashMap<Shape, usize>,
    query_free: Vec<VarId>,
    memo: HashMap<ProbExpr, (usize, bool)>,
    seen: HashSet<ProbExpr>,
    on_path: HashSet<ProbExpr>,
    path_cache: HashMap<(VarId, VarId, VarId), bool>,
    cutoff: bool,
    stats: SearchStats,
}

struct Abort(String);

impl<'a> Searcher<'a> {
    fn new(g: &'a CausalGraph, initial: &ProbExpr, known: &[ProbTerm], config: &'a SearchConfig) -> Self {
        let mut known_shapes = HashMap::new();
        for (i, k) in known.iter().enumerate() {
            known_shapes.entry(shape(k)).or_insert(i);
        }
        Searcher {
            g,
            config,
            known: known.to_vec(),
            known_shapes,
            query_free: initial.free_vars().into_iter().collect(),
            memo: HashMap::new(),
            seen: HashSet::new(),
            on_path: HashSet::new(),
            path_cache: HashMap::new(),
            cutoff: false,
            stats: SearchStats::default(),
        }
    }

    fn known_index(&self, t: &ProbTerm) -> Option<usize> {
        self.known_shapes.get(&shape(t)).copied()
    }

    fn is_open(&self, t: &ProbTerm) -> bool {
        !t.is_hat_free() && self.known_index(t).is_none()
    }

    fn is_goal(&self, e: &ProbExpr) -> bool {
        e.terms().iter().all(|(_, t)| !self.is_open(t))
    }

    fn trace(&mut self, level: u8, line: impl FnOnce() -> String) {
        if self.config.trace >= level {
            self.stats.trace.push(line());
        }
    }

    fn run(&mut self, initial: &ProbExpr) -> Result<IdentifyOutcome> {
        for depth in 0..=self.config.max_depth {
            self.cutoff = false;
            self.stats.depth_reached = depth;
            let found = match self.dfs(initial, depth) {
                Ok(f) => f,
                Err(Abort(reason)) => return Ok(IdentifyOutcome::Aborted { reason }),
            };
            let states = self.seen.len();
            self.trace(1, || format!("depth {depth}: {states} states"));
            if let Some(steps) = found {
                return Ok(IdentifyOutcome::Identified(self.finish(initial, steps)?));
            }
            if !self.cutoff {
                // Every reachable state was expanded without hitting the depth bound.
                break;
            }
        }
        Ok(IdentifyOutcome::NonIdentifiedAtDepth { depth: self.config.max_depth, frontier: self.seen.len() })
    }

    fn finish(&self, initial: &ProbExpr, mut steps: Vec<Step>) -> Result<Derivation> {
        let final_expr = steps.last().map(|s| s.result.clone()).unwrap_or_else(|| initial.clone());
        for (path, t) in final_expr.terms() {
            if t.is_hat_free() {
                continue;
            }
            if let Some(index) = self.known_index(t) {
                steps.push(Step {
                    kind: MoveKind::SubstituteKnown,
                    path,
                    detail: MoveDetail::Known { index },
                    result: final_expr.clone(),
                });
            }
        }
        Ok(Derivation { initial: initial.clone(), known: self.known.clone(), steps, final_expr })
    }

    fn dfs(&mut self, e: &ProbExpr, remaining: usize) -> std::result::Result<Option<Vec<Step>>, Abort> {
        if self.is_goal(e) {
            return Ok(Some(Vec::new()));
        }
        if remaining == 0 {
            self.cutoff = true;
            return Ok(None);
        }
        if self.config.memoize {
            if let Some(&(r, complete)) = self.memo.get(e) {
                if complete || r >= remaining {
                    self.cutoff |= !complete;
                    return Ok(None);
                }
            }
        }
        if self.seen.insert(e.clone()) && self.seen.len() > self.config.max_states {
            return Err(Abort(format!("state cap of {} exceeded", self.config.max_states)));
        }
        self.stats.expansions += 1;
        let g = self.g;
        self.trace(2, || format!("  expand [{remaining}] {}", e.render_with(g)));
        self.on_path.insert(e.clone());
        let outer_cutoff = std::mem::replace(&mut self.cutoff, false);
        let mut result = None;
        for mv in self.moves(e) {
            let Ok((next, detail)) = apply_move(self.g, e, &mv) else { continue };
            if self.on_path.contains(&next) {
                continue;
            }
            match self.dfs(&next, remaining - 1) {
                Err(a) => {
                    self.on_path.remove(e);
                    return Err(a);
                }
                Ok(Some(mut rest)) => {
                    rest.insert(0, Step { kind: mv.kind(), path: mv.path().clone(), detail, result: next });
                    result = Some(rest);
                    break;
                }
                Ok(None) => {}
            }
        }
        self.on_path.remove(e);
        let complete = !self.cutoff;
        self.cutoff |= outer_cutoff;
        if result.is_none() && self.config.memoize {
            self.memo.insert(e.clone(), (remaining, complete));
        }
        Ok(result)
    }

    /// Is `v` an interior node of some simple path between `a` and `b` in the
    /// skeleton of the graph (latents included)?
    fn on_simple_path(&mut self, v: VarId, a: VarId, b: VarId) -> bool {
        if v == a || v == b || a == b {
            return false;
        }
        let key = if a < b { (v, a, b) } else { (v, b, a) };
        if let Some(&r) = self.path_cache.get(&key) {
            return r;
        }
        let r = two_disjoint_paths(self.g, v, a, b);
        self.path_cache.insert(key, r);
        r
    }

    fn expand_candidates(&mut self, t: &ProbTerm) -> Vec<VarId> {
        let actions = t.intervention_set();
        let targets = t.target_set();
        let mentioned = t.var_set();
        let mut out = Vec::new();
        for v in self.g.observed().difference(&mentioned).iter() {
            let hit = actions.iter().any(|a| targets.iter().any(|y| self.on_simple_path(v, a, y)));
            if hit {
                out.push(v);
            }
        }
        out
    }

    /// Symbol available for inserting `v` into the term at `path`: the innermost
    /// enclosing binder of `v`, else the query's own value.
    fn insert_value(&self, e: &ProbExpr, path: &[usize], v: VarId) -> Option<Value> {
        let bound = e.binders_above(path).into_iter().rev().find(|(u, _)| *u == v).map(|(_, id)| Value::Bound(id));
        bound.or_else(|| self.query_free.contains(&v).then_some(Value::Free))
    }

    fn moves(&mut self, e: &ProbExpr) -> Vec<Move> {
        let open: Vec<(Path, ProbTerm)> =
            e.terms().into_iter().filter(|(_, t)| self.is_open(t)).map(|(p, t)| (p, t.clone())).collect();
        let nonempty = |s: &NodeSet| s.subsets().into_iter().filter(|z| !z.is_empty()).collect::<Vec<_>>();
        let mut out = Vec::new();
        let order = self.config.move_order.clone();
        for class in order {
            for (path, t) in &open {
                let rule = |rule, dir, z: NodeSet| Move::Rule { rule, dir, path: path.clone(), z, inserted: vec![] };
                match class {
                    MoveClass::R3Delete => {
                        out.extend(nonempty(&t.intervention_set()).into_iter().map(|z| rule(Rule::R3, Direction::Forward, z)))
                    }
                    MoveClass::R2Forward => {
                        out.extend(nonempty(&t.intervention_set()).into_iter().map(|z| rule(Rule::R2, Direction::Forward, z)))
                    }
                    MoveClass::R2Backward => {
                        out.extend(nonempty(&t.observation_set()).into_iter().map(|z| rule(Rule::R2, Direction::Backward, z)))
                    }
                    MoveClass::R1Delete => {
                        out.extend(nonempty(&t.observation_set()).into_iter().map(|z| rule(Rule::R1, Direction::Forward, z)))
                    }
                    MoveClass::FactorJoint => {
                        if t.targets.len() > 1 {
                            out.extend(t.targets.iter().map(|s| Move::Factor { path: path.clone(), var: s.var }));
                        }
                    }
                    MoveClass::ExpandSum => {
                        out.extend(self.expand_candidates(t).into_iter().map(|var| Move::Expand { path: path.clone(), var }))
                    }
                    MoveClass::R1Insert | MoveClass::R3Insert => {
                        let (r, mentioned) = (if class == MoveClass::R1Insert { Rule::R1 } else { Rule::R3 }, t.var_set());
                        let mut values = Vec::new();
                        for v in self.g.observed().difference(&mentioned).iter() {
                            if let Some(val) = self.insert_value(e, path, v) {
                                values.push((v, val));
                            }
                        }
                        let cands: NodeSet = values.iter().map(|p| p.0).collect();
                        for z in nonempty(&cands) {
                            let inserted = values.iter().filter(|(v, _)| z.contains(*v)).cloned().collect();
                            out.push(Move::Rule { rule: r, dir: Direction::Backward, path: path.clone(), z, inserted });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Vertex-disjoint paths from `v` to `a` and from `v` to `b` in the skeleton,
/// found as a flow of 2 with unit vertex capacities.
fn two_disjoint_paths(g: &CausalGraph, v: VarId, a: VarId, b: VarId) -> bool {
    let n = g.node_count();
    // Node i splits into in = 2i and out = 2i+1; the sink is 2n.
    let sink = 2 * n;
    let mut cap: HashMap<(usize, usize), i32> = HashMap::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 1];
    let mut add = |cap: &mut HashMap<(usize, usize), i32>, u: usize, w: usize, c: i32| {
        if !cap.contains_key(&(u, w)) && !cap.contains_key(&(w, u)) {
            adj[u].push(w);
            adj[w].push(u);
        }
        *cap.entry((u, w)).or_insert(0) += c;
        cap.entry((w, u)).or_insert(0);
    };
    for u in g.nodes() {
        let i = u.index();
        add(&mut cap, 2 * i, 2 * i + 1, if u == v { 2 } else { 1 });
    }
    for (p, c) in g.edges() {
        add(&mut cap, 2 * p.index() + 1, 2 * c.index(), 1);
        add(&mut cap, 2 * c.index() + 1, 2 * p.index(), 1);
    }
    add(&mut cap, 2 * a.index() + 1, sink, 1);
    add(&mut cap, 2 * b.index() + 1, sink, 1);
    let source = 2 * v.index();
    let mut flow = 0;
    while flow < 2 {
        let mut prev = vec![usize::MAX; 2 * n + 1];
        prev[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if prev[w] == usize::MAX && cap[&(u, w)] > 0 {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut w = sink;
        while w != source {
            let u = prev[w];
            *cap.get_mut(&(u, w)).unwrap() -= 1;
            *cap.get_mut(&(w, u)).unwrap() += 1;
            w = u;
        }
        flow += 1;
    }
    flow == 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, parse_query};
    use crate::graph::parse_graph;

    fn frontdoor() -> CausalGraph {
        parse_graph("latent U\nU -> X\nU -> Y\nX -> Z\nZ -> Y\n").unwrap()
    }

    fn q(g: &CausalGraph, s: &str) -> ProbExpr {
        parse_query(s).unwrap().bind(g).unwrap()
    }

    fn canon(g: &CausalGraph, s: &str) -> ProbExpr {
        parse_expr(s).unwrap().bind(g).unwrap().canonicalize().unwrap()
    }

    fn solve(g: &CausalGraph, s: &str) -> Derivation {
        match identify(g, &q(g, s), &SearchConfig::default()).unwrap() {
            IdentifyOutcome::Identified(d) => d,
            other => panic!("{s}: {other:?}"),
        }
    }

    #[test]
    fn simple_path_membership() {
        let g = frontdoor();
        let [u, x, y, z] = ["U", "X", "Y", "Z"].map(|n| g.id(n).unwrap());
        assert!(two_disjoint_paths(&g, z, x, y));
        assert!(two_disjoint_paths(&g, u, x, y));
        assert!(two_disjoint_paths(&g, x, z, y));
        let t = parse_graph("A -> B\nB -> C\nD -> B\n").unwrap();
        let [a, _b, c, d] = ["A", "B", "C", "D"].map(|n| t.id(n).unwrap());
        // D hangs off the path and can only be reached through B.
        assert!(!two_disjoint_paths(&t, d, a, c));
    }

    #[test]
    fn single_rule_step() {
        let g = frontdoor();
        let d = solve(&g, "P(z|do(x))");
        assert_eq!(d.move_count(), 1);
        assert_eq!(d.final_expr, canon(&g, "P(z|x)"));
    }

    #[test]
    fn front_door_query() {
        let g = frontdoor();
        let d = solve(&g, "P(y|do(x))");
        assert_eq!(d.final_expr, canon(&g, "Σ_z P(z|x) Σ_x' P(y|x',z) P(x')"));
        assert!(d.final_expr.is_hat_free());
        assert_eq!(d.move_count(), 7);
    }

    #[test]
    fn joint_query() {
        let g = frontdoor();
        let d = solve(&g, "P(y,z|do(x))");
        assert_eq!(d.final_expr, canon(&g, "P(z|x) Σ_x' P(y|x',z) P(x')"));
    }

    #[test]
    fn back_door_query() {
        let g = frontdoor();
        let d = solve(&g, "P(y|do(z))");
        assert_eq!(d.final_expr, canon(&g, "Σ_x P(y|x,z) P(x)"));
    }

    #[test]
    fn bow_is_not_identified() {
        let g = parse_graph("X -> Y\nX <-> Y\n").unwrap();
        let out = identify(&g, &q(&g, "P(y|do(x))"), &SearchConfig::default()).unwrap();
        assert!(matches!(out, IdentifyOutcome::NonIdentifiedAtDepth { depth: 16, .. }), "{out:?}");
    }

    #[test]
    fn two_latents_queries() {
        let g = parse_graph("X -> Y1\nY1 -> Z\nY2 -> Z\nX <-> Y2\nY1 <-> Y2\n").unwrap();
        let d = solve(&g, "P(z|do(x),do(y2))");
        assert_eq!(d.final_expr, canon(&g, "Σ_y1 P(z|y1,x,y2) P(y1|x)"));
        assert_eq!(d.move_count(), 4);
        assert_eq!(solve(&g, "P(y1|do(x))").final_expr, canon(&g, "P(y1|x)"));
        assert_eq!(solve(&g, "P(y2|do(x))").final_expr, canon(&g, "P(y2)"));
        assert!(solve(&g, "P(z|do(x),do(y1))").final_expr.is_hat_free());
        let shallow = SearchConfig { max_depth: 5, ..SearchConfig::default() };
        for hard in ["P(y1,y2|do(x))", "P(z|do(x))"] {
            let out = identify(&g, &q(&g, hard), &shallow).unwrap();
            assert!(matches!(out, IdentifyOutcome::NonIdentifiedAtDepth { depth: 5, .. }), "{hard}: {out:?}");
        }
    }

    #[test]
    fn hat_free_query_needs_no_moves() {
        let g = frontdoor();
        let d = solve(&g, "P(y|x)");
        assert!(d.steps.is_empty());
    }

    #[test]
    fn latent_in_query_is_rejected() {
        let g = frontdoor();
        let u = g.id("U").unwrap();
        let t = ProbExpr::Term(ProbTerm::simple(&[u], &[], &[g.id("X").unwrap()]).unwrap());
        assert!(matches!(identify(&g, &t, &SearchConfig::default()), Err(Error::Argument(_))));
    }

    #[test]
    fn state_cap_aborts() {
        let g = frontdoor();
        let cfg = SearchConfig { max_states: 3, ..SearchConfig::default() };
        let out = identify(&g, &q(&g, "P(y|do(x))"), &cfg).unwrap();
        assert!(matches!(out, IdentifyOutcome::Aborted { .. }));
    }

    #[test]
    fn depth_bound_reports_not_identified() {
        let g = frontdoor();
        let cfg = SearchConfig { max_depth: 3, ..SearchConfig::default() };
        let out = identify(&g, &q(&g, "P(y|do(x))"), &cfg).unwrap();
        assert_eq!(out.label(), "not_identified_within_depth");
    }

    #[test]
    fn known_inputs() {
        let g = frontdoor();
        let known = [q(&g, "P(z|do(x))"), q(&g, "P(y|do(z))")].map(|e| e.as_term().unwrap().clone());
        let out = identify_from_causal_inputs(&g, &q(&g, "P(y|do(x))"), &known, &SearchConfig::default()).unwrap();
        let d = out.derivation().unwrap();
        assert_eq!(d.final_expr, canon(&g, "Σ_z P(y|do(z)) P(z|do(x))"));

        let out = identify_from_causal_inputs(&g, &q(&g, "P(z|do(x))"), &known, &SearchConfig::default()).unwrap();
        assert_eq!(out.derivation().unwrap().move_count(), 0);
    }

    #[test]
    fn move_order_parsing() {
        let order = MoveClass::parse_list("r3-delete, r2-forward,expand-sum").unwrap();
        assert_eq!(order, vec![MoveClass::R3Delete, MoveClass::R2Forward, MoveClass::ExpandSum]);
        assert!(MoveClass::parse_list("r2-forward,r2-forward").is_err());
        assert!(MoveClass::parse_list("teleport").is_err());
    }
}
