//! Identification of interventional queries `P(y | do(x), z)` over causal DAGs with
//! latent variables, by search over the three action/observation rewrite rules,
//! with exact discrete networks as the numeric ground truth.

pub mod adjust;
pub mod bn;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod graph;
pub mod identify;
pub mod policy;
pub mod rules;
pub mod selftest;

pub use error::{Error, Result};
pub use expr::{Expr, ProbExpr, ProbTerm, Term};
pub use graph::{parse_graph, CausalGraph, NodeSet, VarId, Visibility};
