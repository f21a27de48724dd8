//! Disjoint-clique extraction checked against exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resolve_core::graph::{disjoint_cliques, MatchGraph, WeightedEdge, DEFAULT_CLIQUE_COMPONENT_LIMIT};

/// Dyadic weights keep every sum exact, so score ties compare reliably.
fn random_graph(seed: u64, n: u64, density: f64) -> Vec<WeightedEdge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(density) {
                edges.push(WeightedEdge { a: a * 3 + 1, b: b * 3 + 1, weight: rng.random_range(1..=8) as f64 / 8.0 });
            }
        }
    }
    edges
}

struct Oracle {
    vertices: Vec<u64>,
    w: BTreeMap<(u64, u64), f64>,
}

impl Oracle {
    fn new(edges: &[WeightedEdge]) -> Self {
        let mut vs = BTreeSet::new();
        let mut w = BTreeMap::new();
        for e in edges {
            vs.insert(e.a);
            vs.insert(e.b);
            w.insert((e.a.min(e.b), e.a.max(e.b)), e.weight);
        }
        Oracle { vertices: vs.into_iter().collect(), w }
    }

    fn weight(&self, a: u64, b: u64) -> Option<f64> {
        self.w.get(&(a.min(b), a.max(b))).copied()
    }

    fn loss(&self, a: &[u64], b: &[u64]) -> f64 {
        let mut total = 0.0;
        for &u in b.iter().filter(|u| a.contains(u)) {
            for &v in b.iter().filter(|v| !a.contains(v)) {
                total += self.weight(u, v).unwrap_or(0.0);
            }
        }
        total
    }

    fn internal(&self, c: &[u64]) -> f64 {
        let mut total = 0.0;
        for (i, &u) in c.iter().enumerate() {
            for &v in &c[i + 1..] {
                total += self.weight(u, v).unwrap_or(0.0);
            }
        }
        total
    }

    /// Greedy extraction where every step enumerates all vertex subsets.
    fn run(&self) -> Vec<Vec<u64>> {
        let mut alive: Vec<u64> = self.vertices.clone();
        let mut out = Vec::new();
        while !alive.is_empty() {
            let n = alive.len();
            let mut cliques: Vec<Vec<u64>> = Vec::new();
            for mask in 1u32..(1 << n) {
                let c: Vec<u64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| alive[i]).collect();
                let ok = c.iter().enumerate().all(|(i, &u)| c[i + 1..].iter().all(|&v| self.weight(u, v).is_some()));
                if ok {
                    cliques.push(c);
                }
            }
            let size = cliques.iter().map(Vec::len).max().unwrap();
            let cands: Vec<Vec<u64>> = cliques.into_iter().filter(|c| c.len() == size).collect();
            let score = |c: &Vec<u64>| -> f64 {
                cands.iter().filter(|r| *r != c).map(|r| self.loss(r, c) - self.loss(c, r)).sum()
            };
            let best = cands
                .iter()
                .max_by(|x, y| {
                    score(x)
                        .total_cmp(&score(y))
                        .then(self.internal(x).total_cmp(&self.internal(y)))
                        .then(y.cmp(x))
                })
                .unwrap()
                .clone();
            alive.retain(|v| !best.contains(v));
            out.push(best);
        }
        out
    }
}

fn sorted(mut clusters: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    clusters.sort();
    clusters
}

fn engine(edges: &[WeightedEdge]) -> Vec<Vec<u64>> {
    let g = MatchGraph::from_edges(edges).unwrap();
    disjoint_cliques(&g, DEFAULT_CLIQUE_COMPONENT_LIMIT).clusters.into_iter().map(|c| c.members).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_exhaustive_oracle(seed in any::<u64>(), n in 2u64..=12, density in 0.2f64..0.9) {
        let edges = random_graph(seed, n, density);
        prop_assume!(!edges.is_empty());
        prop_assert_eq!(sorted(engine(&edges)), sorted(Oracle::new(&edges).run()));
    }

    #[test]
    fn clusters_partition_into_cliques(seed in any::<u64>(), n in 2u64..=30, density in 0.05f64..0.8) {
        let edges = random_graph(seed, n, density);
        prop_assume!(!edges.is_empty());
        let g = MatchGraph::from_edges(&edges).unwrap();
        let clusters = engine(&edges);
        let mut seen = BTreeSet::new();
        for c in &clusters {
            for (i, &u) in c.iter().enumerate() {
                prop_assert!(seen.insert(u));
                for &v in &c[i + 1..] {
                    prop_assert!(g.weight(u, v).is_some());
                }
            }
        }
        prop_assert_eq!(seen.into_iter().collect::<Vec<_>>(), g.vertices().to_vec());
    }

    #[test]
    fn invariant_under_weight_scaling(seed in any::<u64>(), n in 2u64..=20) {
        let edges = random_graph(seed, n, 0.5);
        prop_assume!(!edges.is_empty());
        let halved: Vec<WeightedEdge> = edges.iter().map(|e| WeightedEdge { weight: e.weight / 2.0, ..*e }).collect();
        prop_assert_eq!(engine(&edges), engine(&halved));
    }

    #[test]
    fn components_resolve_independently(seed in any::<u64>(), n in 2u64..=15) {
        let left = random_graph(seed, n, 0.5);
        let right: Vec<WeightedEdge> = random_graph(seed ^ 0x5555, n, 0.5)
            .into_iter()
            .map(|e| WeightedEdge { a: e.a + 1000, b: e.b + 1000, ..e })
            .collect();
        prop_assume!(!left.is_empty() && !right.is_empty());
        let joint: Vec<WeightedEdge> = left.iter().chain(&right).copied().collect();
        let mut separate = engine(&left);
        separate.extend(engine(&right));
        prop_assert_eq!(sorted(engine(&joint)), sorted(separate));
    }
}

#[test]
fn components_match_breadth_first_search() {
    let edges = random_graph(11, 1000, 0.002);
    let g = MatchGraph::from_edges(&edges).unwrap();
    let mut adj: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for e in &edges {
        adj.entry(e.a).or_default().push(e.b);
        adj.entry(e.b).or_default().push(e.a);
    }
    let mut seen = BTreeSet::new();
    let mut expected = Vec::new();
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[&u] {
                if seen.insert(v) {
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        expected.push(comp);
    }
    assert_eq!(g.connected_components(), expected);
}
