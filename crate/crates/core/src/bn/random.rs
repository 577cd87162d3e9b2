use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DiscreteBN;
use crate::graph::{CausalGraph, GraphBuilder};

/// Network over `g` with every CPT row drawn from a flat Dirichlet (concentration 1),
/// reproducible from `seed`.
pub fn random_bn(g: &CausalGraph, cards: &[usize], seed: u64) -> DiscreteBN {
    assert_eq!(cards.len(), g.node_count(), "one cardinality per variable");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cpt = Vec::with_capacity(g.node_count());
    for v in g.nodes() {
        let k = cards[v.index()];
        let rows: usize = g.pa(v).iter().map(|p| cards[p.index()]).product();
        let mut table = Vec::with_capacity(rows * k);
        for _ in 0..rows {
            let draws: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let s: f64 = draws.iter().sum();
            table.extend(draws.iter().map(|d| d / s));
        }
        cpt.push(table);
    }
    DiscreteBN::new(g.clone(), cards.to_vec(), cpt).expect("sampled rows are normalized")
}

pub fn random_binary_bn(g: &CausalGraph, seed: u64) -> DiscreteBN {
    random_bn(g, &vec![2; g.node_count()], seed)
}

/// Random DAG over observed `V0..V{n-1}` (edges only from lower to higher index)
/// with between 0 and `max_edges` edges, plus `latents` latent nodes `L0..` that
/// each point into two distinct observed nodes.
pub fn random_graph(seed: u64, observed: usize, max_edges: usize, latents: usize) -> CausalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    for i in 0..observed {
        b.node(&format!("V{i}")).expect("valid name");
    }
    let mut pairs: Vec<(usize, usize)> = (0..observed).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    pairs.shuffle(&mut rng);
    let m = rng.gen_range(0..=max_edges.min(pairs.len()));
    for &(i, j) in &pairs[..m] {
        b.edge(&format!("V{i}"), &format!("V{j}")).expect("fresh edge");
    }
    if observed >= 2 {
        for l in 0..latents {
            let name = format!("L{l}");
            b.latent(&name).expect("valid name");
            let picks: Vec<usize> = (0..observed).collect::<Vec<_>>().choose_multiple(&mut rng, 2).copied().collect();
            for k in picks {
                b.edge(&name, &format!("V{k}")).expect("fresh edge");
            }
        }
    }
    b.build().expect("acyclic by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    #[test]
    fn reproducible_and_normalized() {
        let g = parse_graph("latent U\nU -> X\nU -> Y\nX -> Z\nZ -> Y\n").unwrap();
        assert_eq!(random_binary_bn(&g, 42), random_binary_bn(&g, 42));
        assert_ne!(random_binary_bn(&g, 42), random_binary_bn(&g, 43));
        for seed in 0..1000 {
            let bn = random_bn(&g, &[3, 2, 4, 2], seed);
            for v in g.nodes() {
                for row in bn.table(v).chunks(bn.card(v)) {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_graphs_respect_bounds() {
        for seed in 0..200 {
            let g = random_graph(seed, 7, 10, 2);
            assert_eq!(g.observed().len(), 7);
            assert!(g.edge_count() <= 14);
            assert!(g.topological_order().is_some());
        }
        assert_eq!(random_graph(5, 6, 8, 1).to_text(), random_graph(5, 6, 8, 1).to_text());
    }
}
