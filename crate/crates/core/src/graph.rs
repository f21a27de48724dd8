//! Match graph clustering: connected components, maximal cliques and the
//! greedy extraction of disjoint cliques.
//!
//! Each component is resolved independently. While vertices remain, the
//! maximal cliques of the remaining subgraph are enumerated, the ones of
//! maximum size become candidates and one candidate is extracted with all
//! of its vertices. The candidate chosen is the one whose removal destroys
//! the least edge weight inside the other candidates, measured with
//! [`edge_weight_loss`] against each rival.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::{Error, RecordId, Result};

/// Components larger than this are split before clique enumeration.
pub const DEFAULT_CLIQUE_COMPONENT_LIMIT: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub a: RecordId,
    pub b: RecordId,
    pub weight: f64,
}

/// Undirected weighted graph over record ids. Only records touching at
/// least one edge are vertices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatchGraph {
    vertices: Vec<RecordId>,
    /// Sorted neighbour lists indexed like `vertices`.
    adjacency: Vec<Vec<(u32, f64)>>,
    edge_count: usize,
}

impl MatchGraph {
    /// Builds the graph, canonicalising edge direction. An edge listed more
    /// than once must carry the same weight every time.
    pub fn from_edges(edges: &[WeightedEdge]) -> Result<Self> {
        let mut canon: BTreeMap<(RecordId, RecordId), f64> = BTreeMap::new();
        for e in edges {
            if e.a == e.b {
                return Err(Error::SelfLoop(e.a));
            }
            if !(e.weight > 0.0 && e.weight <= 1.0) {
                return Err(Error::InvalidWeight { a: e.a, b: e.b, weight: e.weight });
            }
            let key = (e.a.min(e.b), e.a.max(e.b));
            match canon.get(&key) {
                Some(&w) if w != e.weight => return Err(Error::ConflictingEdge(key.0, key.1)),
                Some(_) => {}
                None => {
                    canon.insert(key, e.weight);
                }
            }
        }
        let mut vertices: Vec<RecordId> = canon.keys().flat_map(|&(a, b)| [a, b]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let index = |id: RecordId| vertices.binary_search(&id).unwrap_or_default() as u32;
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (&(a, b), &w) in &canon {
            let (ia, ib) = (index(a), index(b));
            adjacency[ia as usize].push((ib, w));
            adjacency[ib as usize].push((ia, w));
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        Ok(Self { vertices, adjacency, edge_count: canon.len() })
    }

    /// Graph with every edge weighted 1.
    pub fn unweighted(pairs: &[(RecordId, RecordId)]) -> Result<Self> {
        let edges: Vec<WeightedEdge> = pairs.iter().map(|&(a, b)| WeightedEdge { a, b, weight: 1.0 }).collect();
        Self::from_edges(&edges)
    }

    pub fn vertices(&self) -> &[RecordId] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn index_of(&self, id: RecordId) -> Option<usize> {
        self.vertices.binary_search(&id).ok()
    }

    pub fn weight(&self, a: RecordId, b: RecordId) -> Option<f64> {
        let (ia, ib) = (self.index_of(a)?, self.index_of(b)? as u32);
        let list = &self.adjacency[ia];
        list.binary_search_by_key(&ib, |&(v, _)| v).ok().map(|k| list[k].1)
    }

    /// All edges with `a < b`, sorted.
    pub fn edges(&self) -> Vec<WeightedEdge> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(j, w) in list {
                if (j as usize) > i {
                    out.push(WeightedEdge { a: self.vertices[i], b: self.vertices[j as usize], weight: w });
                }
            }
        }
        out
    }

    /// Vertex sets of the connected components, each sorted, ordered by
    /// their smallest id.
    pub fn connected_components(&self) -> Vec<Vec<RecordId>> {
        let mut uf = UnionFind::new(self.vertices.len());
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(j, _) in list {
                uf.union(i, j as usize);
            }
        }
        group_by_root(&mut uf, &self.vertices)
    }

    /// Dense copy of the subgraph induced by `members` (sorted ids).
    pub fn induced(&self, members: &[RecordId]) -> DenseGraph {
        let n = members.len();
        let mut g = DenseGraph::empty(members.to_vec());
        for (li, &id) in members.iter().enumerate() {
            let Some(gi) = self.index_of(id) else { continue };
            for &(gj, w) in &self.adjacency[gi] {
                if let Ok(lj) = members.binary_search(&self.vertices[gj as usize]) {
                    g.weights[li * n + lj] = w;
                    g.adj[li].insert(lj);
                }
            }
        }
        g
    }
}

fn group_by_root(uf: &mut UnionFind, ids: &[RecordId]) -> Vec<Vec<RecordId>> {
    let mut slot_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut groups: Vec<Vec<RecordId>> = Vec::new();
    // ids are sorted, so groups come out ordered by minimum id.
    for (i, &id) in ids.iter().enumerate() {
        let root = uf.find(i);
        let slot = *slot_of_root.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(id);
    }
    groups
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// Small graph with an adjacency matrix, used for clique work on one
/// component. Vertices are addressed by local index into `ids`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseGraph {
    ids: Vec<RecordId>,
    /// Row-major `n * n`; `0.0` means no edge.
    weights: Vec<f64>,
    adj: Vec<BitSet>,
}

impl DenseGraph {
    fn empty(ids: Vec<RecordId>) -> Self {
        let n = ids.len();
        Self { ids, weights: vec![0.0; n * n], adj: vec![BitSet::new(n); n] }
    }

    pub fn ids(&self) -> &[RecordId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.ids.len() + v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn is_clique(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(i, &u)| members[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Sum of weights of edges with both ends in `members`.
    pub fn internal_weight(&self, members: &[usize]) -> f64 {
        let mut total = 0.0;
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                total += self.weight(u, v);
            }
        }
        total
    }

    /// Maximal cliques of the subgraph induced by `alive`, each sorted, the
    /// list sorted lexicographically. Isolated vertices are singleton
    /// cliques.
    pub fn maximal_cliques(&self, alive: &BitSet) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut r = Vec::new();
        self.bron_kerbosch(&mut r, alive.clone(), BitSet::new(self.len()), alive, &mut out);
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort_unstable();
        out
    }

    fn bron_kerbosch(&self, r: &mut Vec<usize>, mut p: BitSet, mut x: BitSet, alive: &BitSet, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() {
            if x.is_empty() {
                out.push(r.clone());
            }
            return;
        }
        // Tomita pivot: the vertex of P or X with most neighbours in P.
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|&u| (self.adj[u].intersection_count(&p), core::cmp::Reverse(u)))
            .unwrap_or_default();
        let branch: Vec<usize> = p.difference(&self.adj[pivot]).iter().collect();
        for v in branch {
            let nv = self.adj[v].intersection(alive);
            r.push(v);
            self.bron_kerbosch(r, p.intersection(&nv), x.intersection(&nv), alive, out);
            r.pop();
            p.remove(v);
            x.insert(v);
        }
    }
}

/// Total weight of edges joining a vertex of `a ∩ b` to a vertex of `b − a`:
/// the weight clique `b` loses when the vertices of `a` are taken away.
pub fn edge_weight_loss(a: &[RecordId], b: &[RecordId], g: &MatchGraph) -> f64 {
    let inter: Vec<RecordId> = b.iter().copied().filter(|v| a.contains(v)).collect();
    let diff: Vec<RecordId> = b.iter().copied().filter(|v| !a.contains(v)).collect();
    let mut loss = 0.0;
    for &u in &inter {
        for &v in &diff {
            if let Some(w) = g.weight(u, v) {
                loss += w;
            }
        }
    }
    loss
}

/// Local-index version of [`edge_weight_loss`] over sorted member lists.
pub fn dense_edge_weight_loss(a: &[usize], b: &[usize], g: &DenseGraph) -> f64 {
    let mut loss = 0.0;
    for &u in b.iter().filter(|u| a.binary_search(u).is_ok()) {
        for &v in b.iter().filter(|v| a.binary_search(v).is_err()) {
            loss += g.weight(u, v);
        }
    }
    loss
}

/// Chooses among equal-size candidate cliques (each sorted).
///
/// Score of candidate `c` is the sum over rivals `r` of
/// `loss(r, c) - loss(c, r)`: how much weight the rivals would take from
/// `c`, minus how much `c` takes from them. The highest score wins; ties go
/// to the larger internal weight, then to the lexicographically smallest
/// member id list. With two candidates this puts `a` first exactly when
/// `loss(a, b) <= loss(b, a)`.
pub fn select_candidate(candidates: &[Vec<usize>], g: &DenseGraph) -> (usize, f64) {
    if candidates.len() == 1 {
        return (0, 0.0);
    }
    let n = candidates.len();
    let mut loss = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                loss[i * n + j] = dense_edge_weight_loss(&candidates[i], &candidates[j], g);
            }
        }
    }
    let score = |c: usize| (0..n).filter(|&r| r != c).map(|r| loss[r * n + c] - loss[c * n + r]).sum::<f64>();
    let mut best = 0usize;
    let mut best_score = score(0);
    let mut best_weight = g.internal_weight(&candidates[0]);
    for c in 1..n {
        let s = score(c);
        let w = g.internal_weight(&candidates[c]);
        let better = match s.total_cmp(&best_score) {
            core::cmp::Ordering::Greater => true,
            core::cmp::Ordering::Less => false,
            core::cmp::Ordering::Equal => match w.total_cmp(&best_weight) {
                core::cmp::Ordering::Greater => true,
                core::cmp::Ordering::Less => false,
                // Local indices follow id order, so this compares id lists.
                core::cmp::Ordering::Equal => candidates[c] < candidates[best],
            },
        };
        if better {
            best = c;
            best_score = s;
            best_weight = w;
        }
    }
    (best, best_score)
}

/// A disjoint clique extracted from the match graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityCluster {
    /// Sorted member ids.
    pub members: Vec<RecordId>,
    /// Weight of the edges among the members when the clique was extracted.
    pub internal_weight: f64,
}

/// Audit record of one extraction step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionStep {
    /// Smallest id of the connected component being resolved.
    pub component: RecordId,
    /// Position of the step within its component.
    pub step: usize,
    pub clique_size: usize,
    pub candidates: usize,
    pub selection_score: f64,
    pub members: Vec<RecordId>,
    pub internal_weight: f64,
}

/// Output of resolving one component.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComponentResolution {
    pub clusters: Vec<EntityCluster>,
    pub steps: Vec<ExtractionStep>,
    /// Edges dropped because the component exceeded the clique limit.
    pub pruned_edges: Vec<WeightedEdge>,
}

impl ComponentResolution {
    pub fn degraded(&self) -> bool {
        !self.pruned_edges.is_empty()
    }
}

/// Greedy disjoint-clique extraction on one dense component.
pub fn disjoint_cliques_dense(g: &DenseGraph) -> (Vec<EntityCluster>, Vec<ExtractionStep>) {
    let component = g.ids.first().copied().unwrap_or_default();
    let mut alive = BitSet::full(g.len());
    let mut clusters = Vec::new();
    let mut steps = Vec::new();
    while !alive.is_empty() {
        let cliques = g.maximal_cliques(&alive);
        let size = cliques.iter().map(Vec::len).max().unwrap_or(0);
        let candidates: Vec<Vec<usize>> = cliques.into_iter().filter(|c| c.len() == size).collect();
        let (pick, score) = select_candidate(&candidates, g);
        let chosen = &candidates[pick];
        let internal_weight = g.internal_weight(chosen);
        let members: Vec<RecordId> = chosen.iter().map(|&v| g.ids[v]).collect();
        for &v in chosen {
            alive.remove(v);
        }
        steps.push(ExtractionStep {
            component,
            step: steps.len(),
            clique_size: size,
            candidates: candidates.len(),
            selection_score: score,
            members: members.clone(),
            internal_weight,
        });
        clusters.push(EntityCluster { members, internal_weight });
    }
    (clusters, steps)
}

/// Splits an oversized component: edges are kept in descending weight order
/// (ties by ascending endpoint ids) unless keeping one would join two
/// pieces into more than `limit` vertices. Returns the pieces (sorted, by
/// smallest id) and the dropped edges.
pub fn split_component(g: &MatchGraph, members: &[RecordId], limit: usize) -> (Vec<Vec<RecordId>>, Vec<WeightedEdge>) {
    let dense = g.induced(members);
    let n = dense.len();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for u in 0..n {
        for v in dense.adj[u].iter().filter(|&v| v > u) {
            edges.push((u, v, dense.weight(u, v)));
        }
    }
    edges.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let mut uf = UnionFind::new(n);
    let mut dropped = Vec::new();
    for (u, v, w) in edges {
        let (ru, rv) = (uf.find(u), uf.find(v));
        if ru != rv && uf.set_size(ru) + uf.set_size(rv) > limit {
            dropped.push(WeightedEdge { a: members[u], b: members[v], weight: w });
        } else {
            uf.union(u, v);
        }
    }
    dropped.sort_by_key(|e| (e.a, e.b));
    (group_by_root(&mut uf, members), dropped)
}

/// Resolves one connected component (sorted ids) into disjoint cliques,
/// splitting it first when it has more than `limit` vertices.
pub fn resolve_component(g: &MatchGraph, members: &[RecordId], limit: usize) -> ComponentResolution {
    if members.len() <= limit.max(1) {
        let (clusters, steps) = disjoint_cliques_dense(&g.induced(members));
        return ComponentResolution { clusters, steps, pruned_edges: Vec::new() };
    }
    let (pieces, pruned_edges) = split_component(g, members, limit.max(1));
    let mut out = ComponentResolution { pruned_edges, ..Default::default() };
    let component = members[0];
    for piece in pieces {
        let (clusters, steps) = disjoint_cliques_dense(&g.induced(&piece));
        out.clusters.extend(clusters);
        for mut s in steps {
            s.component = component;
            s.step = out.steps.len();
            out.steps.push(s);
        }
    }
    out
}

/// Single-threaded clustering of the whole graph: components in order of
/// smallest id, clusters in extraction order within each.
pub fn disjoint_cliques(g: &MatchGraph, limit: usize) -> ComponentResolution {
    let mut out = ComponentResolution::default();
    for comp in g.connected_components() {
        let r = resolve_component(g, &comp, limit);
        out.clusters.extend(r.clusters);
        out.steps.extend(r.steps);
        out.pruned_edges.extend(r.pruned_edges);
    }
    out
}

/// Entity assignment for one record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityAssignment {
    pub record_id: RecordId,
    pub entity_id: u64,
    pub cluster_size: usize,
    pub internal_weight: f64,
}

/// Numbers clusters densely in the given order, then gives every record in
/// `all_records` that is not in any cluster its own singleton entity (in
/// ascending id order). Output is sorted by entity id, then record id.
pub fn assign_entity_ids(clusters: &[EntityCluster], all_records: &[RecordId]) -> Result<Vec<EntityAssignment>> {
    let mut seen: BTreeMap<RecordId, ()> = BTreeMap::new();
    let mut out = Vec::new();
    for (entity, c) in clusters.iter().enumerate() {
        for &m in &c.members {
            if seen.insert(m, ()).is_some() {
                return Err(Error::OverlappingClusters(m));
            }
            out.push(EntityAssignment {
                record_id: m,
                entity_id: entity as u64,
                cluster_size: c.members.len(),
                internal_weight: c.internal_weight,
            });
        }
    }
    let mut rest: Vec<RecordId> = all_records.iter().copied().filter(|r| !seen.contains_key(r)).collect();
    rest.sort_unstable();
    rest.dedup();
    for (entity_id, r) in (clusters.len() as u64..).zip(rest) {
        out.push(EntityAssignment { record_id: r, entity_id, cluster_size: 1, internal_weight: 0.0 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: u64, b: u64, w: f64) -> WeightedEdge {
        WeightedEdge { a, b, weight: w }
    }

    const A: u64 = 1;
    const B: u64 = 2;
    const C: u64 = 3;
    const D: u64 = 4;
    const W: u64 = 5;
    const X: u64 = 6;
    const Y: u64 = 7;
    const Z: u64 = 8;

    fn cliques_of(g: &MatchGraph) -> Vec<Vec<u64>> {
        let d = g.induced(g.vertices());
        d.maximal_cliques(&BitSet::full(d.len()))
            .into_iter()
            .map(|c| c.into_iter().map(|v| d.ids()[v]).collect())
            .collect()
    }

    #[test]
    fn build_graph_cases() {
        let g = MatchGraph::from_edges(&[e(A, B, 0.9)]).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert!(MatchGraph::from_edges(&[]).unwrap().is_empty());
        let g = MatchGraph::from_edges(&[e(A, B, 0.9), e(B, A, 0.9)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(MatchGraph::from_edges(&[e(A, A, 0.9)]), Err(Error::SelfLoop(A)));
        assert_eq!(MatchGraph::from_edges(&[e(A, B, 0.9), e(B, A, 0.8)]), Err(Error::ConflictingEdge(A, B)));
        assert!(MatchGraph::from_edges(&[e(A, B, 0.0)]).is_err());
        assert_eq!(MatchGraph::unweighted(&[(A, B)]).unwrap().weight(B, A), Some(1.0));
    }

    #[test]
    fn components() {
        let g = MatchGraph::from_edges(&[e(A, B, 1.0), e(A, C, 1.0)]).unwrap();
        assert_eq!(g.connected_components(), vec![vec![A, B, C]]);
        let g = MatchGraph::from_edges(&[e(10, 11, 1.0), e(1, 2, 1.0)]).unwrap();
        assert_eq!(g.connected_components(), vec![vec![1, 2], vec![10, 11]]);
    }

    #[test]
    fn triangle_and_path_cliques() {
        let g = MatchGraph::from_edges(&[e(A, B, 1.0), e(B, C, 1.0), e(A, C, 1.0)]).unwrap();
        assert_eq!(cliques_of(&g), vec![vec![A, B, C]]);
        let g = MatchGraph::from_edges(&[e(A, B, 1.0), e(B, C, 1.0)]).unwrap();
        assert_eq!(cliques_of(&g), vec![vec![A, B], vec![B, C]]);
    }

    /// Two 4-cliques ABWX and BCXY sharing B and X, plus a tail DYZ.
    fn overlapping_component() -> MatchGraph {
        let mut edges = Vec::new();
        for (u, v) in [(A, B), (A, W), (A, X), (B, W), (B, X), (W, X)] {
            edges.push(e(u, v, 0.95));
        }
        for (u, v) in [(B, C), (B, Y), (C, X), (C, Y), (X, Y)] {
            edges.push(e(u, v, 0.99));
        }
        for (u, v) in [(D, Y), (D, Z), (Y, Z)] {
            edges.push(e(u, v, 0.9));
        }
        MatchGraph::from_edges(&edges).unwrap()
    }

    #[test]
    fn overlapping_maximal_cliques() {
        let g = overlapping_component();
        let four: Vec<Vec<u64>> = cliques_of(&g).into_iter().filter(|c| c.len() == 4).collect();
        assert_eq!(four, vec![vec![A, B, W, X], vec![B, C, X, Y]]);
    }

    #[test]
    fn loss_of_separating_overlapping_cliques() {
        let g = overlapping_component();
        let loss = edge_weight_loss(&[B, C, X, Y], &[A, B, W, X], &g);
        assert!((loss - 3.80).abs() < 1e-9);
        assert_eq!(edge_weight_loss(&[A, B], &[C, D], &g), 0.0);
        assert_eq!(edge_weight_loss(&[A, B, W, X], &[A, B, W, X], &g), 0.0);
    }

    #[test]
    fn extraction_keeps_the_heavier_clique() {
        let g = overlapping_component();
        let r = disjoint_cliques(&g, DEFAULT_CLIQUE_COMPONENT_LIMIT);
        let sets: Vec<Vec<u64>> = r.clusters.iter().map(|c| c.members.clone()).collect();
        // BCXY inflicts 3.80 on ABWX, ABWX would inflict 3.96 on BCXY.
        assert_eq!(sets, vec![vec![B, C, X, Y], vec![A, W], vec![D, Z]]);
    }

    #[test]
    fn triangle_single_cluster() {
        let g = MatchGraph::from_edges(&[e(A, B, 0.8), e(B, C, 0.8), e(A, C, 0.8)]).unwrap();
        let r = disjoint_cliques(&g, 500);
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].members, vec![A, B, C]);
        assert!((r.clusters[0].internal_weight - 2.4).abs() < 1e-12);
    }

    #[test]
    fn path_prefers_heavier_edge() {
        let g = MatchGraph::from_edges(&[e(A, B, 0.99), e(B, C, 0.60)]).unwrap();
        let r = disjoint_cliques(&g, 500);
        let sets: Vec<Vec<u64>> = r.clusters.iter().map(|c| c.members.clone()).collect();
        assert_eq!(sets, vec![vec![A, B], vec![C]]);
        assert_eq!(r.steps[0].candidates, 2);
        assert!((r.steps[0].selection_score - 0.39).abs() < 1e-12);
    }

    #[test]
    fn oversized_component_is_split() {
        // A path of 10 vertices with one weak link in the middle.
        let mut edges: Vec<WeightedEdge> = (0..9).map(|i| e(i, i + 1, 0.9)).collect();
        edges[4].weight = 0.5;
        let g = MatchGraph::from_edges(&edges).unwrap();
        let r = resolve_component(&g, g.vertices(), 5);
        assert_eq!(r.pruned_edges, vec![e(4, 5, 0.5)]);
        assert!(r.degraded());
        assert!(r.clusters.iter().all(|c| c.members.iter().all(|&m| m < 5) || c.members.iter().all(|&m| m >= 5)));
    }

    #[test]
    fn entity_ids() {
        let clusters = vec![
            EntityCluster { members: vec![1, 2], internal_weight: 0.9 },
            EntityCluster { members: vec![3, 4], internal_weight: 0.8 },
        ];
        let ids = assign_entity_ids(&clusters, &[1, 2, 3, 4, 9]).unwrap();
        let entities: Vec<u64> = ids.iter().map(|a| a.entity_id).collect();
        assert_eq!(entities, vec![0, 0, 1, 1, 2]);
        assert_eq!(ids[4].record_id, 9);
        assert!(assign_entity_ids(&[], &[]).unwrap().is_empty());
        let overlapping = vec![
            EntityCluster { members: vec![1, 2], internal_weight: 0.9 },
            EntityCluster { members: vec![2, 3], internal_weight: 0.8 },
        ];
        assert_eq!(assign_entity_ids(&overlapping, &[]), Err(Error::OverlappingClusters(2)));
    }
}
