//! CPT documents:
//!
//! ```json
//! { "Z": { "card": 2, "parents": ["X"], "table": [[0.9, 0.1], [0.2, 0.8]] } }
//! ```
//!
//! Rows run over parent configurations in lexicographic order of the listed
//! parents, first parent most significant.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{configurations, Assignment, DiscreteBN};
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, NodeSet, VarId};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CptEntry {
    card: usize,
    parents: Vec<String>,
    table: Vec<Vec<f64>>,
}

const ROW_TOLERANCE: f64 = 1e-9;

/// Loads and validates a CPT document against `g`. Rows whose sum is off by more
/// than 1e-9 are renormalized and reported in the returned warnings.
pub fn load_cpts(g: &CausalGraph, text: &str) -> Result<(DiscreteBN, Vec<String>)> {
    let doc: BTreeMap<String, CptEntry> = serde_json::from_str(text)?;
    let mut warnings = Vec::new();
    for name in doc.keys() {
        g.id(name).map_err(|_| Error::Cpt(format!("`{name}` is not a graph variable")))?;
    }
    let entry = |v: VarId| doc.get(g.name(v)).ok_or_else(|| Error::Cpt(format!("missing table for `{}`", g.name(v))));
    let mut card = vec![0; g.node_count()];
    for v in g.nodes() {
        card[v.index()] = entry(v)?.card;
    }
    let mut cpt = Vec::with_capacity(g.node_count());
    for v in g.nodes() {
        let name = g.name(v);
        let e = entry(v)?;
        if e.card < 2 {
            return Err(Error::Cpt(format!("`{name}` needs cardinality >= 2")));
        }
        let file_parents = e
            .parents
            .iter()
            .map(|p| g.id(p).map_err(|_| Error::Cpt(format!("`{name}` lists unknown parent `{p}`"))))
            .collect::<Result<Vec<_>>>()?;
        let as_set: NodeSet = file_parents.iter().copied().collect();
        if as_set.len() != file_parents.len() || &as_set != g.pa(v) {
            return Err(Error::Cpt(format!(
                "`{name}` parents {:?} do not match the graph's {:?}",
                e.parents,
                g.names(g.pa(v))
            )));
        }
        let rows: usize = file_parents.iter().map(|p| card[p.index()]).product();
        if e.table.len() != rows {
            return Err(Error::Cpt(format!("`{name}` has {} rows, expected {rows}", e.table.len())));
        }
        let mut fixed_rows = Vec::with_capacity(rows);
        for (r, row) in e.table.iter().enumerate() {
            if row.len() != e.card {
                return Err(Error::Cpt(format!("`{name}` row {r} has {} entries, expected {}", row.len(), e.card)));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::Cpt(format!("`{name}` row {r} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                return Err(Error::Cpt(format!("`{name}` row {r} sums to zero")));
            }
            if (s - 1.0).abs() > ROW_TOLERANCE {
                warnings.push(format!("`{name}` row {r} sums to {s}; renormalized"));
            }
            fixed_rows.push(row.iter().map(|p| p / s).collect::<Vec<f64>>());
        }
        // Reorder rows from the file's parent order to id order.
        let file_pos: HashMap<Assignment, usize> = configurations(&file_parents, &card).into_iter().zip(0..).collect();
        let ordered: Vec<VarId> = g.pa(v).iter().collect();
        let mut table = Vec::with_capacity(rows * e.card);
        for cfg in configurations(&ordered, &card) {
            table.extend_from_slice(&fixed_rows[file_pos[&cfg]]);
        }
        cpt.push(table);
    }
    Ok((DiscreteBN::new(g.clone(), card, cpt)?, warnings))
}

/// Serializes `bn` in the format read by [`load_cpts`], parents in id order.
pub fn to_cpt_json(bn: &DiscreteBN) -> String {
    let g = bn.graph();
    let doc: BTreeMap<String, CptEntry> = g
        .nodes()
        .map(|v| {
            let k = bn.card(v);
            let entry = CptEntry {
                card: k,
                parents: g.names(g.pa(v)).into_iter().map(str::to_string).collect(),
                table: bn.table(v).chunks(k).map(<[f64]>::to_vec).collect(),
            };
            (g.name(v).to_string(), entry)
        })
        .collect();
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}
