//! Anomalous sub-trajectory detection: score every point of a query
//! trajectory against the average kernel mean map of a normal dataset and
//! extract the maximal low-scoring runs.

use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{embed_dataset, mean_of_maps, FeatureMap};
use crate::error::{Error, Result};
use crate::isolation::PartitioningModel;
use crate::model::{LabeledDataset, SubTrajectorySpan, Trajectory};

/// Default minimum run length; shorter runs are discarded.
pub const DEFAULT_MIN_LEN: usize = 3;
/// Default score threshold.
pub const DEFAULT_TAU: f64 = 0.0;

/// Output of [`detect_subtraj`]: the maximal anomalous sub-trajectories of
/// the query plus the per-point scores they were extracted from.
#[derive(Debug, Clone, Serialize)]
pub struct SubTrajReport {
    pub query_id: String,
    pub spans: Vec<SubTrajectorySpan>,
    pub beta: Vec<f64>,
    pub tau: f64,
    pub min_len: usize,
}

/// Per-point similarity of the query to the normal dataset:
/// beta_x = <phi(x), mean over D of the trajectory mean maps>. In [0, 1]
/// for the isolation scheme.
pub fn score_points(
    model: &dyn FeatureMap,
    normals: &LabeledDataset,
    query: &Trajectory,
) -> Result<Vec<f64>> {
    if normals.is_empty() {
        return Err(Error::validation("the normal dataset is empty"));
    }
    if query.is_empty() {
        return Err(Error::validation("the query trajectory is empty"));
    }
    let embedded = embed_dataset(model, normals)?;
    let g_bar = mean_of_maps(&embedded.embeddings)?;
    query
        .points
        .par_iter()
        .map(|p| model.embed_point(&p.coords)?.dot(&g_bar))
        .collect()
}

/// Maximal runs of consecutive indices with score <= tau, dropping runs
/// shorter than `min_len`. Spans are 1-based inclusive.
pub fn extract_maximal(
    query_id: &str,
    scores: &[f64],
    tau: f64,
    min_len: usize,
) -> Vec<SubTrajectorySpan> {
    maximal_runs(scores, |s| s <= tau, min_len)
        .into_iter()
        .map(|(a, b)| SubTrajectorySpan {
            trajectory_id: query_id.to_string(),
            start: a + 1,
            end: b + 1,
        })
        .collect()
}

/// 0-based inclusive runs where `keep` holds, at least `min_len` long.
pub(crate) fn maximal_runs(
    scores: &[f64],
    keep: impl Fn(f64) -> bool,
    min_len: usize,
) -> Vec<(usize, usize)> {
    let min_len = min_len.max(1);
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &s) in scores.iter().enumerate() {
        match (keep(s), start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                if i - a >= min_len {
                    runs.push((a, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        if scores.len() - a >= min_len {
            runs.push((a, scores.len() - 1));
        }
    }
    runs
}

/// Fit an isolation model on the normal dataset's points, score the query
/// pointwise, and extract the maximal anomalous sub-trajectories.
pub fn detect_subtraj(
    normals: &LabeledDataset,
    query: &Trajectory,
    psi: usize,
    t: usize,
    tau: f64,
    min_len: usize,
    seed: u64,
) -> Result<SubTrajReport> {
    let points = normals.concat_points();
    let model = PartitioningModel::fit(&points, psi, t, seed)?;
    let beta = score_points(&model, normals, query)?;
    let spans = extract_maximal(&query.id, &beta, tau, min_len);
    Ok(SubTrajReport { query_id: query.id.clone(), spans, beta, tau, min_len })
}

/// Reference labeling: a query point is anomalous iff no point of any
/// normal trajectory lies within `radius`; maximal runs of at least
/// `min_len` anomalous points are returned.
pub fn ground_truth_labeler(
    normals: &LabeledDataset,
    query: &Trajectory,
    radius: f64,
    min_len: usize,
) -> Result<Vec<SubTrajectorySpan>> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::parameter(format!("radius must be positive, got {radius}")));
    }
    let normal_points = normals.concat_points();
    let r2 = radius * radius;
    let flags: Vec<f64> = query
        .points
        .par_iter()
        .map(|q| {
            let isolated = !normal_points.iter().any(|p| {
                let mut d = 0.0;
                for (a, b) in p.coords.iter().zip(&q.coords) {
                    let diff = a - b;
                    d += diff * diff;
                }
                d <= r2
            });
            if isolated {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(maximal_runs(&flags, |f| f > 0.5, min_len)
        .into_iter()
        .map(|(a, b)| SubTrajectorySpan {
            trajectory_id: query.id.clone(),
            start: a + 1,
            end: b + 1,
        })
        .collect())
}

/// Default ground-truth neighborhood radius: 5% of the largest coordinate
/// range of the dataset.
pub fn default_radius(dataset: &LabeledDataset) -> f64 {
    let d = dataset.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for t in dataset.trajectories() {
        for p in &t.points {
            for ((l, h), &c) in lo.iter_mut().zip(hi.iter_mut()).zip(&p.coords) {
                *l = l.min(c);
                *h = h.max(c);
            }
        }
    }
    let range = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0f64, f64::max);
    0.05 * range
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(id: &str, y: f64, n: usize, x0: f64, x1: f64) -> Trajectory {
        let points = (0..n)
            .map(|i| {
                let x = x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
                Point::new(vec![x, y])
            })
            .collect();
        Trajectory::new(id, points).unwrap()
    }

    #[test]
    fn extract_maximal_hand_cases() {
        let spans = extract_maximal("q", &[0.0, 0.0, 1.0, 0.0], 0.0, 1);
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[0].start, spans[0].end), (1, 2));
        assert_eq!((spans[1].start, spans[1].end), (4, 4));

        assert!(extract_maximal("q", &[0.5, 0.9, 0.7], 0.2, 1).is_empty());

        let dropped = extract_maximal("q", &[0.0, 1.0, 0.0, 0.0, 0.0], 0.0, 3);
        assert_eq!(dropped.len(), 1);
        assert_eq!((dropped[0].start, dropped[0].end), (3, 5));
    }

    #[test]
    fn extract_maximal_matches_run_length_encoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scores: Vec<f64> = (0..200).map(|_| if rng.random::<bool>() { 0.0 } else { 1.0 }).collect();
        let spans = extract_maximal("q", &scores, 0.0, 1);
        // Independent run-length encoding of the boolean mask.
        let mut expected = Vec::new();
        let mut i = 0;
        while i < scores.len() {
            if scores[i] == 0.0 {
                let start = i;
                while i < scores.len() && scores[i] == 0.0 {
                    i += 1;
                }
                expected.push((start + 1, i));
            } else {
                i += 1;
            }
        }
        let got: Vec<(usize, usize)> = spans.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn spans_are_disjoint_maximal_and_above_min_len() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let scores: Vec<f64> = (0..80).map(|_| rng.random::<f64>()).collect();
            let tau = rng.random::<f64>();
            let min_len = rng.random_range(1..=4);
            let spans = extract_maximal("q", &scores, tau, min_len);
            let mut last_end = 0usize;
            for s in &spans {
                assert!(s.len() >= min_len);
                assert!(s.start > last_end, "spans overlap or touch out of order");
                for i in s.indices() {
                    assert!(scores[i] <= tau);
                }
                // Maximality: extending either endpoint hits a high score or
                // leaves the trajectory.
                if s.start >= 2 {
                    assert!(scores[s.start - 2] > tau);
                }
                if s.end < scores.len() {
                    assert!(scores[s.end] > tau);
                }
                last_end = s.end;
            }
        }
    }

    #[test]
    fn single_cell_model_scores_everything_one() {
        let normal = line("n", 0.0, 10, 0.0, 1.0);
        let ds = LabeledDataset::new(vec![normal]).unwrap();
        let model = PartitioningModel::fit(&ds.concat_points(), 1, 20, 0).unwrap();
        let query = line("q", 0.0, 10, 0.0, 1.0);
        let beta = score_points(&model, &ds, &query).unwrap();
        for b in beta {
            assert!((b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_query_point_scores_zero() {
        // Fit the partitioning on two far-apart blobs but let the normal
        // dataset cover only the left one: a query point in the right blob
        // lands in cells holding no normal mass.
        let left = line("left", 0.0, 30, 0.0, 1.0);
        let right = line("right", 0.0, 30, 100.0, 101.0);
        let fit_points = LabeledDataset::new(vec![left.clone(), right]).unwrap().concat_points();
        let model = PartitioningModel::fit(&fit_points, 16, 50, 2).unwrap();
        let normals = LabeledDataset::new(vec![left]).unwrap();
        let query = Trajectory::new("q", vec![Point::new(vec![100.5, 0.0])]).unwrap();
        let beta = score_points(&model, &normals, &query).unwrap();
        assert_eq!(beta[0], 0.0);
    }

    #[test]
    fn beta_matches_double_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut trajectories = Vec::new();
        for i in 0..6 {
            let points: Vec<Point> =
                (0..8).map(|_| Point::new(vec![rng.random(), rng.random()])).collect();
            trajectories.push(Trajectory::new(format!("n{i}"), points).unwrap());
        }
        let ds = LabeledDataset::new(trajectories).unwrap();
        let model = PartitioningModel::fit(&ds.concat_points(), 4, 25, 10).unwrap();
        let query = Trajectory::new(
            "q",
            (0..5).map(|_| Point::new(vec![rng.random(), rng.random()])).collect::<Vec<_>>(),
        )
        .unwrap();
        let beta = score_points(&model, &ds, &query).unwrap();
        // beta_x = (1/n) sum_i K(delta(x), P_{X_i}) by brute-force double sum.
        for (x, &fast) in query.points.iter().zip(&beta) {
            let mut total = 0.0;
            for t in ds.trajectories() {
                let mut inner = 0.0;
                for y in &t.points {
                    inner += model.point_kernel(&x.coords, &y.coords).unwrap();
                }
                total += inner / t.len() as f64;
            }
            let slow = total / ds.len() as f64;
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }

    #[test]
    fn beta_invariant_to_dataset_order() {
        let a = line("a", 0.0, 12, 0.0, 1.0);
        let b = line("b", 0.2, 9, 0.0, 1.0);
        let c = line("c", 0.4, 15, 0.0, 1.0);
        let fwd = LabeledDataset::new(vec![a.clone(), b.clone(), c.clone()]).unwrap();
        let rev = LabeledDataset::new(vec![c, b, a]).unwrap();
        // Same fitted model for both: fit on the forward dataset's points.
        let model = PartitioningModel::fit(&fwd.concat_points(), 8, 40, 1).unwrap();
        let query = line("q", 0.1, 7, 0.0, 1.0);
        let beta_fwd = score_points(&model, &fwd, &query).unwrap();
        let beta_rev = score_points(&model, &rev, &query).unwrap();
        for (x, y) in beta_fwd.iter().zip(&beta_rev) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn covered_query_yields_no_spans_at_tau_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normals: Vec<Trajectory> = (0..20)
            .map(|i| {
                let points = (0..30)
                    .map(|j| {
                        Point::new(vec![
                            j as f64 / 29.0,
                            0.002 * i as f64 + 0.001 * rng.random::<f64>(),
                        ])
                    })
                    .collect();
                Trajectory::new(format!("n{i}"), points).unwrap()
            })
            .collect();
        let ds = LabeledDataset::new(normals).unwrap();
        let query = line("q", 0.02, 30, 0.0, 1.0);
        let report = detect_subtraj(&ds, &query, 16, 50, 0.0, 1, 3).unwrap();
        assert!(report.spans.is_empty());
        for b in report.beta {
            assert!(b > 0.0);
        }
    }

    #[test]
    fn known_geometry_detour_matches_ground_truth() {
        let (normals, query) = detour_fixture(13);
        let radius = default_radius(&normals);
        let truth = ground_truth_labeler(&normals, &query, radius, 3).unwrap();
        assert_eq!(truth.len(), 1, "expected one true span, got {truth:?}");
        let report = detect_subtraj(&normals, &query, 64, 100, 0.02, 3, 13).unwrap();
        assert_eq!(report.spans.len(), 1, "expected one detected span, got {:?}", report.spans);
        let jaccard = crate::eval::jaccard_spans(&report.spans, &truth, query.len());
        assert!(jaccard >= 0.9, "jaccard {jaccard}");
    }

    /// 30 normal trajectories along a corridor plus a query whose middle
    /// third detours far away from all normal traffic.
    pub(crate) fn detour_fixture(seed: u64) -> (LabeledDataset, Trajectory) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normals: Vec<Trajectory> = (0..30)
            .map(|i| {
                let points = (0..60)
                    .map(|j| {
                        let x = j as f64 / 59.0 + 0.002 * rng.random::<f64>();
                        let y = 0.01 * (i % 10) as f64 + 0.005 * rng.random::<f64>();
                        Point::new(vec![x, y])
                    })
                    .collect();
                Trajectory::new(format!("n{i}"), points).unwrap()
            })
            .collect();
        let ds = LabeledDataset::new(normals).unwrap();
        let points = (0..60)
            .map(|j| {
                let x = j as f64 / 59.0;
                let y = if (20..40).contains(&j) { 0.8 } else { 0.05 };
                Point::new(vec![x, y])
            })
            .collect();
        let query = Trajectory::new("q", points).unwrap();
        (ds, query)
    }

    #[test]
    fn published_scale_defaults_run_clean() {
        // The published settings for large animal-track data: psi = 4096,
        // t = 100, tau = 0. At tau = 0 the nearest-anchor construction
        // yields no spans, since every cell holds at least its own anchor's
        // mass; the settings must still run on data with enough points.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normals: Vec<Trajectory> = (0..41)
            .map(|i| {
                let points = (0..100)
                    .map(|j| {
                        Point::new(vec![
                            j as f64 / 99.0 + 0.01 * rng.random::<f64>(),
                            0.02 * (i % 20) as f64 + 0.01 * rng.random::<f64>(),
                        ])
                    })
                    .collect();
                Trajectory::new(format!("n{i}"), points).unwrap()
            })
            .collect();
        let ds = LabeledDataset::new(normals).unwrap();
        assert!(ds.total_points() >= 4096);
        let query = line("q", 0.5, 40, 0.0, 1.0);
        let report = detect_subtraj(&ds, &query, 4096, 100, DEFAULT_TAU, DEFAULT_MIN_LEN, 1).unwrap();
        assert_eq!(report.tau, 0.0);
        assert_eq!(report.min_len, 3);
        assert!(report.spans.is_empty());
        for b in &report.beta {
            assert!(*b > 0.0);
        }
    }

    #[test]
    fn ground_truth_trivial_cases() {
        let normal = line("n", 0.0, 20, 0.0, 1.0);
        let ds = LabeledDataset::new(vec![normal.clone()]).unwrap();
        // Query overlapping the normal exactly: no spans at any radius.
        let mut query = normal.clone();
        query.id = "q".to_string();
        assert!(ground_truth_labeler(&ds, &query, 0.01, 1).unwrap().is_empty());
        // Query at uniform distance 2 * radius: one span covering all of it.
        let far = line("q", 0.5, 20, 0.0, 1.0);
        let spans = ground_truth_labeler(&ds, &far, 0.25, 1).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start, spans[0].end), (1, 20));
        assert!(ground_truth_labeler(&ds, &far, 0.0, 1).is_err());
    }

    #[test]
    fn ground_truth_matches_all_pairs_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let normals: Vec<Trajectory> = (0..5)
            .map(|i| {
                let points =
                    (0..10).map(|_| Point::new(vec![rng.random(), rng.random()])).collect();
                Trajectory::new(format!("n{i}"), points).unwrap()
            })
            .collect();
        let ds = LabeledDataset::new(normals).unwrap();
        let query = Trajectory::new(
            "q",
            (0..40).map(|_| Point::new(vec![rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0])).collect::<Vec<_>>(),
        )
        .unwrap();
        let radius = 0.2;
        let spans = ground_truth_labeler(&ds, &query, radius, 2).unwrap();
        // Independent O(|Q| * N) scan.
        let normal_points = ds.concat_points();
        let flags: Vec<bool> = query
            .points
            .iter()
            .map(|q| {
                !normal_points.iter().any(|p| {
                    let dx = p.coords[0] - q.coords[0];
                    let dy = p.coords[1] - q.coords[1];
                    (dx * dx + dy * dy).sqrt() <= radius
                })
            })
            .collect();
        let mut covered = vec![false; query.len()];
        for s in &spans {
            for i in s.indices() {
                covered[i] = true;
                assert!(flags[i], "span covers a non-anomalous point");
            }
        }
        // Any uncovered anomalous point must sit in a run shorter than 2.
        let mut i = 0;
        while i < flags.len() {
            if flags[i] && !covered[i] {
                let start = i;
                while i < flags.len() && flags[i] {
                    i += 1;
                }
                assert!(i - start < 2, "missed a long run at {start}");
            } else {
                i += 1;
            }
        }
    }
}
