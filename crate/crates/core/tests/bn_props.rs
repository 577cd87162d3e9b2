use docalc::bn::{configurations, random_bn, random_graph, Assignment};
use docalc::{NodeSet, VarId};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The post-intervention joint is the pre-intervention joint with the forced
    /// variable's factor divided out, and zero off the forced value.
    #[test]
    fn intervention_truncates_the_factorization(seed in any::<u64>(), n in 1usize..6, latents in 0usize..2, pick in any::<usize>()) {
        let g = random_graph(seed, n, 8, latents);
        let cards: Vec<usize> = (0..g.node_count()).map(|i| 2 + (i + pick) % 2).collect();
        let bn = random_bn(&g, &cards, seed);
        let obs: Vec<VarId> = g.observed().iter().collect();
        let x = obs[pick % obs.len()];
        let forced = pick % bn.card(x);
        let before = bn.joint().unwrap();
        let after = bn.intervene(&Assignment::of(&[(x, forced)])).unwrap().joint().unwrap();
        let all: Vec<VarId> = g.nodes().collect();
        for cell in configurations(&all, bn.cards()) {
            let got = after.prob_of(&cell);
            let xv = cell.get(x).unwrap();
            let want = if xv == forced {
                let pa = cell.restricted(g.parents(x).unwrap());
                before.prob_of(&cell) / bn.row(x, &pa).unwrap()[xv]
            } else {
                0.0
            };
            prop_assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn intervention_leaves_non_descendants_alone(seed in any::<u64>(), n in 1usize..7, latents in 0usize..3, pick in any::<usize>()) {
        let g = random_graph(seed, n, 10, latents);
        let cards: Vec<usize> = (0..g.node_count()).map(|i| 2 + (i + pick) % 2).collect();
        let bn = random_bn(&g, &cards, seed);
        let obs: Vec<VarId> = g.observed().iter().collect();
        let x = obs[pick % obs.len()];
        let desc = g.descendants(&NodeSet::singleton(x)).unwrap();
        let rest: Vec<VarId> = g.nodes().filter(|&v| v != x && !desc.contains(v)).collect();
        let before = bn.joint().unwrap().marginal(&rest);
        for k in 0..bn.card(x) {
            let after = bn.intervene(&Assignment::of(&[(x, k)])).unwrap().joint().unwrap().marginal(&rest);
            for cell in configurations(&rest, bn.cards()) {
                prop_assert!((before.get(&cell) - after.get(&cell)).abs() <= 1e-12);
            }
        }
    }
}
