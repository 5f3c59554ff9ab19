//! Evaluation metrics (ROC-AUC, Jaccard index over sub-trajectory spans)
//! and the scaleup benchmark harness.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use crate::detect::{AnomalyRanking, Polarity};
use crate::distances::{pairwise_matrix, DistanceMatrix, Measure};
use crate::embedding::{embed_dataset, EmbeddedDataset};
use crate::error::{Error, Result};
use crate::isolation::PartitioningModel;
use crate::model::{Label, LabeledDataset, SubTrajectorySpan};
use crate::nystrom::NystromModel;

/// Tie-aware rank-statistic ROC-AUC: the probability that a random anomaly
/// is ranked more anomalous than a random normal under the ranking's
/// polarity; ties count one half.
pub fn roc_auc(ranking: &AnomalyRanking, labels: &BTreeMap<String, Label>) -> Result<f64> {
    let oriented: Vec<(f64, bool)> = ranking
        .ids
        .iter()
        .zip(&ranking.scores)
        .map(|(id, &score)| {
            let label = labels
                .get(id)
                .ok_or_else(|| Error::Metric(format!("no label for trajectory '{id}'")))?;
            let anomalousness = match ranking.polarity {
                Polarity::Similarity => -score,
                Polarity::Anomaly => score,
            };
            Ok((anomalousness, *label == Label::Anomalous))
        })
        .collect::<Result<_>>()?;
    auc_from_oriented(&oriented)
}

/// AUC over (anomalousness, is_anomalous) pairs via the rank-sum
/// formulation with average ranks for ties.
pub fn auc_from_oriented(items: &[(f64, bool)]) -> Result<f64> {
    let positives = items.iter().filter(|(_, a)| *a).count();
    let negatives = items.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Metric(format!(
            "AUC needs both classes; got {positives} anomalies and {negatives} normals"
        )));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].0.partial_cmp(&items[b].0).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && items[order[j]].0 == items[order[i]].0 {
            j += 1;
        }
        // Average 1-based rank across the tie group [i, j).
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if items[idx].1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Jaccard index of the point-index sets covered by two span lists; 1.0
/// when both are empty.
pub fn jaccard_spans(detected: &[SubTrajectorySpan], truth: &[SubTrajectorySpan], len: usize) -> f64 {
    let mut a = vec![false; len];
    let mut b = vec![false; len];
    for s in detected {
        for i in s.indices() {
            if i < len {
                a[i] = true;
            }
        }
    }
    for s in truth {
        for i in s.indices() {
            if i < len {
                b[i] = true;
            }
        }
    }
    let mut intersection = 0usize;
    let mut union = 0usize;
    for (x, y) in a.iter().zip(&b) {
        if *x && *y {
            intersection += 1;
        }
        if *x || *y {
            union += 1;
        }
    }
    if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Opaque preprocessing output carried from the prep phase to the detect
/// phase of a benchmark run.
pub enum BenchState {
    Embedded(EmbeddedDataset),
    Matrix(DistanceMatrix),
    None,
}

/// One benchmarkable method: a preprocessing phase producing a similarity
/// structure and a detection phase consuming it.
pub trait BenchTarget: Sync {
    fn name(&self) -> String;
    fn prep(&self, dataset: &LabeledDataset) -> Result<BenchState>;
    fn detect(&self, dataset: &LabeledDataset, state: &BenchState) -> Result<()>;
}

/// The standard methods of the scaleup comparison.
pub enum BenchMethod {
    IsolationEmbed { psi: usize, t: usize, seed: u64 },
    NystromEmbed { components: usize, sigma: f64, seed: u64 },
    DistanceMatrix(Measure),
}

impl BenchTarget for BenchMethod {
    fn name(&self) -> String {
        match self {
            BenchMethod::IsolationEmbed { psi, t, .. } => format!("ik-embed(psi={psi},t={t})"),
            BenchMethod::NystromEmbed { components, sigma, .. } => {
                format!("nystrom-embed(c={components},sigma={sigma})")
            }
            BenchMethod::DistanceMatrix(m) => format!("{}-matrix", m.name()),
        }
    }

    fn prep(&self, dataset: &LabeledDataset) -> Result<BenchState> {
        match self {
            BenchMethod::IsolationEmbed { psi, t, seed } => {
                let points = dataset.concat_points();
                let model = PartitioningModel::fit(&points, *psi, *t, *seed)?;
                Ok(BenchState::Embedded(embed_dataset(&model, dataset)?))
            }
            BenchMethod::NystromEmbed { components, sigma, seed } => {
                let points = dataset.concat_points();
                let model = NystromModel::fit(&points, *components, *sigma, *seed)?;
                Ok(BenchState::Embedded(embed_dataset(&model, dataset)?))
            }
            BenchMethod::DistanceMatrix(measure) => {
                Ok(BenchState::Matrix(pairwise_matrix(dataset, *measure)?))
            }
        }
    }

    fn detect(&self, dataset: &LabeledDataset, state: &BenchState) -> Result<()> {
        let k = (dataset.len() / 10).clamp(1, dataset.len() - 1);
        match state {
            BenchState::Embedded(embedded) => {
                let config = crate::detect::DetectConfig::default();
                crate::detect::score_embedded(embedded, &config)?;
            }
            BenchState::Matrix(matrix) => {
                crate::detect::lof_scores_matrix(matrix, k)?;
            }
            BenchState::None => {}
        }
        Ok(())
    }
}

/// One timed cell of the benchmark table.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub method: String,
    pub n: usize,
    pub prep_secs: f64,
    pub detect_secs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<TimingRow>,
}

impl BenchReport {
    /// prep-time ratio of the largest size over the smallest for a method.
    pub fn prep_ratio(&self, method: &str) -> Option<f64> {
        let rows: Vec<&TimingRow> = self.rows.iter().filter(|r| r.method == method).collect();
        let first = rows.first()?;
        let last = rows.last()?;
        Some(last.prep_secs / first.prep_secs)
    }

    pub fn prep_at(&self, method: &str, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.method == method && r.n == n).map(|r| r.prep_secs)
    }

    /// CSV mirror of the timing table: method, n, prep, detect.
    pub fn save_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "n", "prep", "detect"])?;
        for row in &self.rows {
            w.write_record([
                row.method.as_str(),
                &row.n.to_string(),
                &format!("{}", row.prep_secs),
                &format!("{}", row.detect_secs),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Time the prep and detect phases of a method over datasets of ascending
/// sizes; every cell is the median of `repeats` runs on a single thread.
pub fn scaleup_bench(
    generate: impl Fn(usize) -> Result<LabeledDataset>,
    sizes: &[usize],
    method: &dyn BenchTarget,
    repeats: usize,
) -> Result<BenchReport> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::parameter("sizes must be strictly ascending"));
    }
    let repeats = repeats.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut report = BenchReport::default();
    for &n in sizes {
        let dataset = generate(n)?;
        let mut preps = Vec::with_capacity(repeats);
        let mut detects = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let (prep_secs, detect_secs) = pool.install(|| -> Result<(f64, f64)> {
                let start = Instant::now();
                let state = method.prep(&dataset)?;
                let prep_secs = start.elapsed().as_secs_f64();
                let start = Instant::now();
                method.detect(&dataset, &state)?;
                Ok((prep_secs, start.elapsed().as_secs_f64()))
            })?;
            preps.push(prep_secs);
            detects.push(detect_secs);
        }
        report.rows.push(TimingRow {
            method: method.name(),
            n,
            prep_secs: median(&mut preps),
            detect_secs: median(&mut detects),
        });
    }
    Ok(report)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}
