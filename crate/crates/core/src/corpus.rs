//! Bundled example graphs and data files.

use crate::error::{Error, Result};
use crate::graph::{parse_graph, CausalGraph};

pub const GRAPHS: &[(&str, &str)] = &[
    ("frontdoor", include_str!("../data/frontdoor.graph")),
    ("bow", include_str!("../data/bow.graph")),
    ("two_latents", include_str!("../data/two_latents.graph")),
    ("chain", include_str!("../data/chain.graph")),
    ("collider", include_str!("../data/collider.graph")),
    ("backdoor", include_str!("../data/backdoor.graph")),
];

pub const FRONTDOOR_CPTS: &str = include_str!("../data/frontdoor_cpts.json");

pub fn graph(name: &str) -> Result<CausalGraph> {
    let (_, text) = GRAPHS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Name(format!("no bundled graph `{name}`")))?;
    parse_graph(text)
}

pub fn all() -> Vec<(&'static str, CausalGraph)> {
    GRAPHS.iter().map(|(n, t)| (*n, parse_graph(t).expect("bundled graphs parse"))).collect()
}
