//! Frequent sub-trajectory pattern mining over a clustered dataset: pick
//! each cluster's most representative trajectory and keep the maximal runs
//! of its points that score high against the average of cluster means.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::embedding::{mean_of_maps, EmbeddedDataset, Embedding, FeatureMap};
use crate::error::{Error, Result};
use crate::isolation::PartitioningModel;
use crate::model::{LabeledDataset, SubTrajectorySpan, Trajectory};
use crate::subtraj::maximal_runs;

/// Default minimum pattern length in points; 1 disables the filter.
pub const DEFAULT_MIN_LEN: usize = 3;

/// Patterns found on one cluster's representative trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterPatterns {
    pub cluster: usize,
    pub representative_id: String,
    /// Per-point scores of the representative against the global mean of
    /// cluster means.
    pub theta: Vec<f64>,
    pub spans: Vec<SubTrajectorySpan>,
    /// Piece-wise Euclidean length of each span.
    pub lengths: Vec<f64>,
}

/// All frequent sub-trajectory patterns of a clustered dataset.
#[derive(Debug, Clone, Serialize)]
pub struct PatternSet {
    pub gamma: f64,
    pub min_len: usize,
    pub clusters: Vec<ClusterPatterns>,
}

impl PatternSet {
    /// Total number of patterns across clusters.
    pub fn num_patterns(&self) -> usize {
        self.clusters.iter().map(|c| c.spans.len()).sum()
    }

    /// (min, max) pattern length, when any pattern exists.
    pub fn length_range(&self) -> Option<(f64, f64)> {
        let mut lengths = self.clusters.iter().flat_map(|c| c.lengths.iter().copied());
        let first = lengths.next()?;
        let mut lo = first;
        let mut hi = first;
        for l in lengths {
            lo = lo.min(l);
            hi = hi.max(l);
        }
        Some((lo, hi))
    }

    /// Total number of selected points across all patterns.
    pub fn selected_points(&self) -> usize {
        self.clusters.iter().flat_map(|c| c.spans.iter()).map(SubTrajectorySpan::len).sum()
    }
}

/// Per-cluster mean of member mean maps, indexed by cluster 1..=k.
/// Validates that clusters form a contiguous non-empty 1..=k range over the
/// embedded ids.
pub fn cluster_means(
    embedded: &EmbeddedDataset,
    clusters: &BTreeMap<String, usize>,
) -> Result<Vec<Embedding>> {
    let k = *clusters
        .values()
        .max()
        .ok_or_else(|| Error::validation("no cluster assignments"))?;
    let mut groups: Vec<Vec<&Embedding>> = vec![Vec::new(); k];
    for (id, e) in embedded.ids.iter().zip(&embedded.embeddings) {
        let c = *clusters
            .get(id)
            .ok_or_else(|| Error::validation(format!("trajectory '{id}' has no cluster")))?;
        groups[c - 1].push(e);
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, members)| {
            if members.is_empty() {
                return Err(Error::validation(format!("cluster {} is empty", i + 1)));
            }
            let owned: Vec<Embedding> = members.into_iter().cloned().collect();
            mean_of_maps(&owned)
        })
        .collect()
}

/// The member maximizing the dot product with the cluster mean; ties break
/// toward the lexicographically smallest id.
pub fn representative<'a>(
    members: impl IntoIterator<Item = (&'a str, &'a Embedding)>,
    center: &Embedding,
) -> Result<String> {
    let mut best: Option<(&str, f64)> = None;
    for (id, e) in members {
        let score = e.dot(center)?;
        let better = match best {
            None => true,
            Some((best_id, best_score)) => {
                score > best_score || (score == best_score && id < best_id)
            }
        };
        if better {
            best = Some((id, score));
        }
    }
    best.map(|(id, _)| id.to_string())
        .ok_or_else(|| Error::validation("cannot pick a representative from an empty cluster"))
}

/// Sum of piece-wise Euclidean distances between adjacent in-span points;
/// 0 for single-point spans.
pub fn pattern_length(trajectory: &Trajectory, span: &SubTrajectorySpan) -> Result<f64> {
    if span.end > trajectory.len() {
        return Err(Error::validation(format!(
            "span [{}, {}] exceeds trajectory length {}",
            span.start,
            span.end,
            trajectory.len()
        )));
    }
    let mut total = 0.0;
    for i in span.start..span.end {
        let a = &trajectory.points[i - 1].coords;
        let b = &trajectory.points[i].coords;
        total += a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                d * d
            })
            .sum::<f64>()
            .sqrt();
    }
    Ok(total)
}

/// Mine the frequent sub-trajectory patterns of a clustered dataset: per
/// cluster, select the representative trajectory, score its points against
/// the average of all cluster means, and keep maximal runs with score
/// strictly above `gamma` of at least `min_len` points.
pub fn mine_patterns(
    dataset: &LabeledDataset,
    psi: usize,
    t: usize,
    gamma: f64,
    min_len: usize,
    seed: u64,
) -> Result<PatternSet> {
    let clusters = dataset
        .clusters()
        .ok_or_else(|| Error::validation("pattern mining needs cluster assignments"))?
        .clone();
    let points = dataset.concat_points();
    let model = PartitioningModel::fit(&points, psi, t, seed)?;
    mine_patterns_with_model(dataset, &model, &clusters, gamma, min_len)
}

pub fn mine_patterns_with_model(
    dataset: &LabeledDataset,
    model: &dyn FeatureMap,
    clusters: &BTreeMap<String, usize>,
    gamma: f64,
    min_len: usize,
) -> Result<PatternSet> {
    let embedded = crate::embedding::embed_dataset(model, dataset)?;
    let means = cluster_means(&embedded, clusters)?;
    let c_bar = mean_of_maps(&means)?;
    let mut result = Vec::with_capacity(means.len());
    for (i, center) in means.iter().enumerate() {
        let cluster = i + 1;
        // Members in dataset order.
        let members: Vec<(&str, &Embedding)> = embedded
            .ids
            .iter()
            .zip(&embedded.embeddings)
            .filter(|(id, _)| clusters.get(id.as_str()) == Some(&cluster))
            .map(|(id, e)| (id.as_str(), e))
            .collect();
        let rep_id = representative(members, center)?;
        let rep = dataset
            .trajectory(&rep_id)
            .ok_or_else(|| Error::validation(format!("missing representative '{rep_id}'")))?;
        let theta: Vec<f64> = rep
            .points
            .iter()
            .map(|p| model.embed_point(&p.coords)?.dot(&c_bar))
            .collect::<Result<_>>()?;
        let spans: Vec<SubTrajectorySpan> = maximal_runs(&theta, |s| s > gamma, min_len)
            .into_iter()
            .map(|(a, b)| SubTrajectorySpan {
                trajectory_id: rep_id.clone(),
                start: a + 1,
                end: b + 1,
            })
            .collect();
        let lengths = spans
            .iter()
            .map(|s| pattern_length(rep, s))
            .collect::<Result<Vec<f64>>>()?;
        result.push(ClusterPatterns {
            cluster,
            representative_id: rep_id,
            theta,
            spans,
            lengths,
        });
    }
    Ok(PatternSet { gamma, min_len, clusters: result })
}
