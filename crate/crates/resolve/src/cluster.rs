//! Match-graph clustering and its output files.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::core::graph::{assign_entity_ids, resolve_component, EntityAssignment, EntityCluster, ExtractionStep, MatchGraph, WeightedEdge};
use crate::core::matching::{apply_threshold, ScoredPair};
use crate::core::RecordId;
use crate::table::TextWriter;
use crate::Result;

/// Result of clustering a scored pair set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Clustering {
    /// In order of (component smallest id, extraction step).
    pub clusters: Vec<EntityCluster>,
    pub steps: Vec<ExtractionStep>,
    /// Components that exceeded the clique limit, with the edges dropped to
    /// split them.
    pub degraded: Vec<DegradedComponent>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegradedComponent {
    pub component: RecordId,
    pub size: usize,
    pub pruned_edges: Vec<WeightedEdge>,
}

/// Edges with probability at least `threshold`. Zero-probability pairs never
/// become edges, since edge weights must be positive.
pub fn match_edges(scores: &[ScoredPair], threshold: f64) -> Result<Vec<WeightedEdge>> {
    Ok(apply_threshold(scores, threshold)?
        .into_iter()
        .filter(|s| s.probability > 0.0)
        .map(|s| WeightedEdge { a: s.id_a, b: s.id_b, weight: s.probability })
        .collect())
}

/// Builds the match graph and resolves its components in parallel.
pub fn cluster_edges(edges: &[WeightedEdge], component_limit: usize) -> Result<Clustering> {
    let graph = MatchGraph::from_edges(edges)?;
    let components = graph.connected_components();
    let resolved: Vec<_> = components.par_iter().map(|c| resolve_component(&graph, c, component_limit)).collect();
    let mut out = Clustering::default();
    for (comp, r) in components.iter().zip(resolved) {
        if r.degraded() {
            out.degraded.push(DegradedComponent { component: comp[0], size: comp.len(), pruned_edges: r.pruned_edges });
        }
        out.clusters.extend(r.clusters);
        out.steps.extend(r.steps);
    }
    Ok(out)
}

pub const CLUSTER_HEADER: &str = "record_id,entity_id,cluster_size,internal_weight";

/// Entity assignment for every record in `all_records`, unmatched ones as
/// singletons.
pub fn assignments(clustering: &Clustering, all_records: &[RecordId]) -> Result<Vec<EntityAssignment>> {
    Ok(assign_entity_ids(&clustering.clusters, all_records)?)
}

pub fn write_clusters(path: &Path, rows: &[EntityAssignment]) -> Result<()> {
    let mut w = TextWriter::create(path)?;
    w.line(CLUSTER_HEADER)?;
    for a in rows {
        w.line(&format!("{},{},{},{}", a.record_id, a.entity_id, a.cluster_size, a.internal_weight))?;
    }
    w.finish()
}

/// Reads a cluster file back into member lists, in entity id order.
pub fn read_clusters(path: &Path) -> Result<Vec<Vec<RecordId>>> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(CLUSTER_HEADER) {
        return Err(crate::Error::format(path, format!("expected header `{CLUSTER_HEADER}`")));
    }
    let mut by_entity: std::collections::BTreeMap<u64, Vec<RecordId>> = Default::default();
    for (i, line) in lines.enumerate() {
        let mut f = line.split(',');
        let parsed = (|| Some((f.next()?.parse().ok()?, f.next()?.parse().ok()?)))();
        let (record, entity): (RecordId, u64) =
            parsed.ok_or_else(|| crate::Error::format(path, format!("line {}: malformed row", i + 2)))?;
        by_entity.entry(entity).or_default().push(record);
    }
    Ok(by_entity.into_values().collect())
}

/// One JSON line per extraction step, then one per degraded component.
pub fn write_diagnostics(path: &Path, clustering: &Clustering) -> Result<()> {
    #[derive(Serialize)]
    #[serde(tag = "kind", rename_all = "snake_case")]
    enum Line<'a> {
        Step(&'a ExtractionStep),
        Degraded(&'a DegradedComponent),
    }
    let mut w = TextWriter::create(path)?;
    for s in &clustering.steps {
        w.line(&serde_json::to_string(&Line::Step(s))?)?;
    }
    for d in &clustering.degraded {
        w.line(&serde_json::to_string(&Line::Degraded(d))?)?;
    }
    w.finish()
}
