//! The three action/observation rewrite rules on single terms.
//!
//! For a term `P(y | do(x), z, w)` every rule checks `(Y ⟂ Z | X, W)` in a surgered
//! graph:
//!
//! | rule | rewrite                         | graph                     |
//! |------|---------------------------------|---------------------------|
//! | R1   | insert/delete observation `z`   | `G` cut into `X`          |
//! | R2   | exchange `do(z)` ↔ `z`          | cut into `X`, out of `Z`  |
//! | R3   | insert/delete action `do(z)`    | cut into `X` and `Z(W)`   |
//!
//! `W` is always every observation of the term that is not being moved, and `Z(W)`
//! is the part of `Z` that is not an ancestor of `W` once edges into `X` are cut.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Condition, Mode, ProbTerm, Slot, Term, Value};
use crate::graph::{CausalGraph, NodeSet, Surgery, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
}

/// `Forward` removes (R1, R3) or un-hats (R2); `Backward` inserts or hats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
        })
    }
}

impl Rule {
    pub fn action(self, dir: Direction) -> &'static str {
        match (self, dir) {
            (Rule::R1, Direction::Forward) => "delete observation",
            (Rule::R1, Direction::Backward) => "insert observation",
            (Rule::R2, Direction::Forward) => "action to observation",
            (Rule::R2, Direction::Backward) => "observation to action",
            (Rule::R3, Direction::Forward) => "delete action",
            (Rule::R3, Direction::Backward) => "insert action",
        }
    }
}

/// One accepted rule application and the d-separation fact that licensed it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleInstance {
    pub rule: Rule,
    pub direction: Direction,
    /// Targets of the term.
    pub y: NodeSet,
    /// Interventions held fixed.
    pub x: NodeSet,
    /// The moved set.
    pub z: NodeSet,
    /// Remaining observations.
    pub w: NodeSet,
    pub surgery: Surgery,
}

impl RuleInstance {
    pub fn conditioning(&self) -> NodeSet {
        self.x.union(&self.w)
    }

    /// Re-checks the recorded separation in the recorded graph.
    pub fn reverify(&self, g: &CausalGraph) -> Result<bool> {
        g.surgered(&self.surgery)?.d_separated(&self.y, &self.z, &self.conditioning())
    }

    /// E.g. `(Y ⟂ Z | X) in G_Z̲`.
    pub fn condition_text(&self, g: &CausalGraph) -> String {
        let set = |s: &NodeSet| g.names(s).join(",");
        let cond = self.conditioning();
        let given = if cond.is_empty() { String::new() } else { format!(" | {}", set(&cond)) };
        format!("({} ⟂ {}{given}) in {}", set(&self.y), set(&self.z), self.surgery.label(g))
    }
}

fn split(term: &ProbTerm) -> (NodeSet, NodeSet, NodeSet) {
    (term.target_set(), term.intervention_set(), term.observation_set())
}

fn rebuild(targets: Vec<Slot<VarId>>, conditions: Vec<Condition<VarId>>) -> Result<ProbTerm> {
    Term::new(targets, conditions)
}

/// Applies `rule` in `dir`, moving `z`. Inserted variables take their values from
/// `inserted` when listed there, else the free (query) value.
pub fn apply_rule_with(
    g: &CausalGraph,
    rule: Rule,
    dir: Direction,
    term: &ProbTerm,
    z: &NodeSet,
    inserted: &[(VarId, Value)],
) -> Result<(ProbTerm, RuleInstance)> {
    g.check_set(z)?;
    for v in term.vars() {
        g.check(*v)?;
    }
    if let Some(v) = z.iter().find(|&v| !g.is_observed(v)) {
        return Err(Error::Argument(format!("`{}` is not observed", g.name(v))));
    }
    let (y, held, obs) = split(term);
    let mentioned = term.var_set();
    let require = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("{rule} {}: moved set must {what}", rule.action(dir))))
        }
    };
    let value_of = |v: VarId| inserted.iter().find(|(u, _)| *u == v).map(|p| p.1).unwrap_or(Value::Free);

    let (x, w) = match (rule, dir) {
        (Rule::R1, Direction::Forward) => {
            require(z.is_subset(&obs), "consist of observations of the term")?;
            (held.clone(), obs.difference(z))
        }
        (Rule::R1, Direction::Backward) | (Rule::R3, Direction::Backward) => {
            require(z.is_disjoint(&mentioned), "be new to the term")?;
            (held.clone(), obs.clone())
        }
        (Rule::R2, Direction::Forward) | (Rule::R3, Direction::Forward) => {
            require(z.is_subset(&held), "consist of interventions of the term")?;
            (held.difference(z), obs.clone())
        }
        (Rule::R2, Direction::Backward) => {
            require(z.is_subset(&obs), "consist of observations of the term")?;
            (held.clone(), obs.difference(z))
        }
    };
    let surgery = match rule {
        Rule::R1 => Surgery { cut_incoming: x.clone(), cut_outgoing: NodeSet::new() },
        Rule::R2 => Surgery { cut_incoming: x.clone(), cut_outgoing: z.clone() },
        Rule::R3 => {
            let zw = g.z_not_anc_w(&x, z, &w)?;
            Surgery { cut_incoming: x.union(&zw), cut_outgoing: NodeSet::new() }
        }
    };
    let inst = RuleInstance { rule, direction: dir, y, x, z: z.clone(), w, surgery };
    let surgered = g.surgered(&inst.surgery)?;
    if let Some(trail) = surgered.active_trail(&inst.y, &inst.z, &inst.conditioning())? {
        return Err(Error::NotApplicable {
            rule: format!("{rule} ({})", rule.action(dir)),
            witness: trail.into_iter().map(|v| g.name(v).to_string()).collect(),
        });
    }

    let targets = term.targets.clone();
    let keep = |c: &&Condition<VarId>| !z.contains(c.slot.var);
    let mut conds: Vec<Condition<VarId>> = term.conditions.iter().filter(keep).cloned().collect();
    match (rule, dir) {
        (Rule::R1, Direction::Forward) | (Rule::R3, Direction::Forward) => {}
        (Rule::R1, Direction::Backward) => {
            conds.extend(z.iter().map(|v| Condition::observe(Slot { var: v, value: value_of(v) })));
        }
        (Rule::R3, Direction::Backward) => {
            conds.extend(z.iter().map(|v| Condition::intervene(Slot { var: v, value: value_of(v) })));
        }
        (Rule::R2, _) => {
            let flipped = if dir == Direction::Forward { Mode::Observation } else { Mode::Intervention };
            conds.extend(
                term.conditions
                    .iter()
                    .filter(|c| z.contains(c.slot.var))
                    .map(|c| Condition { slot: c.slot.clone(), mode: flipped }),
            );
        }
    }
    Ok((rebuild(targets, conds)?, inst))
}

pub fn apply_rule(g: &CausalGraph, rule: Rule, dir: Direction, term: &ProbTerm, z: &NodeSet) -> Result<(ProbTerm, RuleInstance)> {
    apply_rule_with(g, rule, dir, term, z, &[])
}

/// Insertion/deletion of observations.
pub fn rule1(g: &CausalGraph, term: &ProbTerm, z: &NodeSet, dir: Direction) -> Result<ProbTerm> {
    apply_rule(g, Rule::R1, dir, term, z).map(|r| r.0)
}

/// Action/observation exchange.
pub fn rule2(g: &CausalGraph, term: &ProbTerm, z: &NodeSet, dir: Direction) -> Result<ProbTerm> {
    apply_rule(g, Rule::R2, dir, term, z).map(|r| r.0)
}

/// Insertion/deletion of actions.
pub fn rule3(g: &CausalGraph, term: &ProbTerm, z: &NodeSet, dir: Direction) -> Result<ProbTerm> {
    apply_rule(g, Rule::R3, dir, term, z).map(|r| r.0)
}

/// Sufficient condition for `P(y | do(x)) = P(y | x)` for single variables:
/// `x` separates its own parents from `y`.
pub fn observation_suffices(g: &CausalGraph, x: VarId, y: VarId) -> Result<bool> {
    g.check(x)?;
    g.check(y)?;
    if x == y {
        return Err(Error::Argument("action and outcome must differ".into()));
    }
    let pa = g.parents(x)?;
    if pa.contains(y) {
        return Ok(false);
    }
    g.d_separated(&NodeSet::singleton(y), pa, &NodeSet::singleton(x))
}
