//! Line-oriented graph format:
//!
//! ```text
//! # front-door
//! latent U
//! U -> X
//! X -> Z
//! X <-> Y      # fresh latent _L1 with edges into X and Y
//! W            # isolated observed node
//! ```

use super::{valid_identifier, CausalGraph, GraphBuilder};
use crate::error::{Error, Result};

pub fn parse_graph(text: &str) -> Result<CausalGraph> {
    let mut b = GraphBuilder::new();
    let mut pending_latent = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Graph(format!("line {}: {msg}: `{}`", lineno + 1, raw.trim()));
        let words: Vec<&str> = line.split_whitespace().collect();
        let ident = |s: &str| if valid_identifier(s) { Ok(()) } else { Err(err("bad identifier")) };
        let at = |e: Error| match e {
            Error::Graph(m) => err(&m),
            other => other,
        };
        match words.as_slice() {
            ["latent", names @ ..] if !names.is_empty() => {
                for n in names {
                    ident(n)?;
                    pending_latent.push(n.to_string());
                    b.node(n).map_err(at)?;
                }
            }
            [a, "->", c] => {
                ident(a)?;
                ident(c)?;
                b.edge(a, c).map_err(at)?;
            }
            [a, "<->", c] => {
                ident(a)?;
                ident(c)?;
                if a == c {
                    return Err(err("bidirected self-loop"));
                }
                b.bidirected(a, c).map_err(at)?;
            }
            [a] => {
                ident(a)?;
                b.node(a).map_err(at)?;
            }
            _ => return Err(err("expected `latent NAME`, `A -> B`, `A <-> B` or `NAME`")),
        }
    }
    for n in &pending_latent {
        b.latent(n)?;
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bidirected_arcs_become_latents() {
        let g = parse_graph("X -> Y\nX <-> Y # bow\n").unwrap();
        let l = g.id("_L1").unwrap();
        assert!(g.is_latent(l));
        assert_eq!(g.names(g.children(l).unwrap()), vec!["X", "Y"]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn latent_declared_after_use() {
        let g = parse_graph("U -> X\nlatent U\n").unwrap();
        assert!(g.is_latent(g.id("U").unwrap()));
    }

    #[test]
    fn text_round_trip() {
        let g = parse_graph("latent U\nU -> X\nU -> Y\nX -> Z\nZ -> Y\nW\n").unwrap();
        assert_eq!(parse_graph(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_graph("A -> B\nA => B\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
