use serde::{Deserialize, Serialize};

use super::{apply_move, shape, IdentifyOutcome, Move, MoveDetail, MoveKind};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, parse_query, Path, ProbExpr, ProbTerm, Value};
use crate::graph::{CausalGraph, NodeSet, VarId};
use crate::rules::{Direction, Rule};

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub kind: MoveKind,
    /// Location of the rewritten term in the previous (canonical) expression.
    pub path: Path,
    pub detail: MoveDetail,
    pub result: ProbExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub initial: ProbExpr,
    pub known: Vec<ProbTerm>,
    pub steps: Vec<Step>,
    pub final_expr: ProbExpr,
}

impl Derivation {
    /// Number of rewrites; substitutions of known inputs are not moves.
    pub fn move_count(&self) -> usize {
        self.steps.iter().filter(|s| s.kind != MoveKind::SubstituteKnown).count()
    }

    fn to_move(step: &Step) -> Option<Move> {
        let path = step.path.clone();
        Some(match &step.detail {
            MoveDetail::Rule { instance, inserted } => Move::Rule {
                rule: instance.rule,
                dir: instance.direction,
                path,
                z: instance.z.clone(),
                inserted: inserted.clone(),
            },
            MoveDetail::Expand { var, .. } => Move::Expand { path, var: *var },
            MoveDetail::Factor { var } => Move::Factor { path, var: *var },
            MoveDetail::Known { .. } => return None,
        })
    }

    /// Re-applies every move from the initial expression and re-checks every rule
    /// condition against `g`.
    pub fn check(&self, g: &CausalGraph) -> Result<()> {
        let mut cur = self.initial.clone();
        for (i, step) in self.steps.iter().enumerate() {
            if let MoveDetail::Rule { instance, .. } = &step.detail {
                if !instance.reverify(g)? {
                    return Err(Error::Structure(format!("step {}: recorded condition does not hold", i + 1)));
                }
            }
            if let Some(mv) = Self::to_move(step) {
                cur = apply_move(g, &cur, &mv)?.0;
            }
            if cur != step.result {
                return Err(Error::Structure(format!("step {} does not reproduce its result", i + 1)));
            }
        }
        if cur != self.final_expr {
            return Err(Error::Structure("steps do not reproduce the final expression".into()));
        }
        Ok(())
    }

    pub fn to_record(&self, g: &CausalGraph) -> DerivationRecord {
        let steps = self
            .steps
            .iter()
            .map(|s| {
                let names = |vs: &[VarId]| vs.iter().map(|v| g.name(*v).to_string()).collect::<Vec<_>>();
                let mut r = StepRecord {
                    kind: s.kind,
                    path: s.path.clone(),
                    rule: None,
                    direction: None,
                    vars: vec![],
                    inserted: vec![],
                    condition: None,
                    known: None,
                    result: s.result.render_with(g),
                };
                match &s.detail {
                    MoveDetail::Rule { instance, inserted } => {
                        r.rule = Some(instance.rule);
                        r.direction = Some(instance.direction);
                        r.vars = names(instance.z.as_slice());
                        r.inserted = instance
                            .z
                            .iter()
                            .filter_map(|v| inserted.iter().find(|(u, _)| *u == v))
                            .map(|(_, val)| match val {
                                Value::Bound(id) => Some(*id),
                                _ => None,
                            })
                            .collect();
                        r.condition = Some(instance.condition_text(g));
                    }
                    MoveDetail::Expand { var, .. } | MoveDetail::Factor { var } => r.vars = names(&[*var]),
                    MoveDetail::Known { index } => r.known = Some(*index),
                }
                r
            })
            .collect();
        DerivationRecord {
            query: self.initial.render_with(g),
            known: self.known.iter().map(|k| k.render(g)).collect(),
            steps,
            formula: self.final_expr.render_with(g),
        }
    }
}

/// Serializable derivation, with variables by name and expressions rendered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRecord {
    pub query: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known: Vec<String>,
    pub steps: Vec<StepRecord>,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: MoveKind,
    pub path: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vars: Vec<String>,
    /// Binder id per inserted variable, `null` for the query's own value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inserted: Vec<Option<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known: Option<usize>,
    pub result: String,
}

/// Rebuilds a derivation from its record, re-running every move against `g`.
/// Fails if any step or the final formula comes out differently.
pub fn replay(g: &CausalGraph, rec: &DerivationRecord) -> Result<Derivation> {
    let initial = parse_expr(&rec.query)?.bind(g)?.canonicalize()?;
    let known = rec
        .known
        .iter()
        .map(|k| Ok(parse_query(k)?.bind(g)?.as_term().expect("query is a term").clone()))
        .collect::<Result<Vec<ProbTerm>>>()?;
    let mut cur = initial.clone();
    let mut steps = Vec::new();
    for (i, s) in rec.steps.iter().enumerate() {
        let bad = |msg: &str| Error::Structure(format!("replay step {}: {msg}", i + 1));
        let vars = s.vars.iter().map(|n| g.resolve(n)).collect::<Result<Vec<VarId>>>()?;
        let one = || vars.first().copied().filter(|_| vars.len() == 1).ok_or_else(|| bad("expected one variable"));
        let path = s.path.clone();
        let (next, detail) = match s.kind {
            MoveKind::SubstituteKnown => {
                let index = s.known.ok_or_else(|| bad("missing known index"))?;
                let t = cur.at(&path).and_then(ProbExpr::as_term).ok_or_else(|| bad("no term at path"))?;
                let k = known.get(index).ok_or_else(|| bad("known index out of range"))?;
                if shape(k) != shape(t) {
                    return Err(bad("term does not match the known input"));
                }
                (cur.clone(), MoveDetail::Known { index })
            }
            MoveKind::ExpandSum => apply_move(g, &cur, &Move::Expand { path: path.clone(), var: one()? })?,
            MoveKind::FactorJoint => apply_move(g, &cur, &Move::Factor { path: path.clone(), var: one()? })?,
            MoveKind::R1 | MoveKind::R2 | MoveKind::R3 => {
                let rule = s.rule.ok_or_else(|| bad("missing rule"))?;
                let dir = s.direction.ok_or_else(|| bad("missing direction"))?;
                let z: NodeSet = vars.iter().copied().collect();
                let inserted = if s.inserted.is_empty() {
                    vec![]
                } else if s.inserted.len() == vars.len() {
                    vars.iter()
                        .zip(&s.inserted)
                        .map(|(v, id)| (*v, id.map(Value::Bound).unwrap_or(Value::Free)))
                        .collect()
                } else {
                    return Err(bad("inserted values do not match variables"));
                };
                apply_move(g, &cur, &Move::Rule { rule, dir, path: path.clone(), z, inserted })?
            }
        };
        if next.render_with(g) != s.result {
            return Err(bad(&format!("got `{}`, record has `{}`", next.render_with(g), s.result)));
        }
        steps.push(Step { kind: s.kind, path, detail, result: next.clone() });
        cur = next;
    }
    if cur.render_with(g) != rec.formula {
        return Err(Error::Structure(format!("replay ends at `{}`, record has `{}`", cur.render_with(g), rec.formula)));
    }
    Ok(Derivation { initial, known, steps, final_expr: cur })
}

fn describe(step: &Step, prev: &ProbExpr, known: &[ProbTerm], g: &CausalGraph) -> String {
    let at = prev.at(&step.path).map(|e| e.render_with(g)).unwrap_or_default();
    match &step.detail {
        MoveDetail::Rule { instance, .. } => format!(
            "{} {} {{{}}} in {at}: {}",
            instance.rule,
            instance.rule.action(instance.direction),
            g.names(&instance.z).join(","),
            instance.condition_text(g)
        ),
        MoveDetail::Expand { var, .. } => format!("condition {at} on {}", g.name(*var).to_lowercase()),
        MoveDetail::Factor { var } => format!("split {at} at {}", g.name(*var).to_lowercase()),
        MoveDetail::Known { index } => {
            format!("{at} is the measured input {}", known.get(*index).map(|k| k.render(g)).unwrap_or_default())
        }
    }
}

/// One line per step: what was done, the licensing condition for rule steps, and
/// the resulting formula.
pub fn explain(d: &Derivation, g: &CausalGraph) -> String {
    let mut out = d.initial.render_with(g);
    out.push('\n');
    let mut prev = &d.initial;
    for (i, step) in d.steps.iter().enumerate() {
        out.push_str(&format!("{:>3}. {}\n", i + 1, describe(step, prev, &d.known, g)));
        if step.kind != MoveKind::SubstituteKnown {
            out.push_str(&format!("     ⇒ {}\n", step.result.render_with(g)));
        }
        prev = &step.result;
    }
    out
}

pub fn explain_outcome(out: &IdentifyOutcome, g: &CausalGraph) -> String {
    match out {
        IdentifyOutcome::Identified(d) => explain(d, g),
        IdentifyOutcome::NonIdentifiedAtDepth { depth, frontier } => format!(
            "not identified within depth {depth} ({frontier} states explored); \
             this is not a proof that the query is unidentifiable\n"
        ),
        IdentifyOutcome::Aborted { reason } => format!("search aborted: {reason}\n"),
    }
}
