//! Anomalous trajectory detection: embed every trajectory as a point in
//! feature space (level 1), then score each embedded point with a pluggable
//! detector (level 2): a second isolation-kernel model (idk2), a second
//! Gaussian/Nystrom model (gdk), or LOF over the kernel-induced metric.

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embedding::{embed_dataset, EmbeddedDataset, Embedding, FeatureMap};
use crate::error::{Error, Result};
use crate::isolation::{PartitioningModel, DEFAULT_PSI, DEFAULT_T};
use crate::model::LabeledDataset;
use crate::nystrom::{NystromModel, DEFAULT_COMPONENTS};

/// Which level-1 feature map embeds the trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Isolation,
    Nystrom,
}

impl SchemeKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "ik" | "isolation" => Ok(SchemeKind::Isolation),
            "nystrom" | "gauss" => Ok(SchemeKind::Nystrom),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Which detector scores the embedded trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    /// Two-level isolation scoring; similarity polarity.
    Idk2,
    /// Gaussian distributional scoring via a level-2 Nystrom map;
    /// similarity polarity.
    Gdk,
    /// Local outlier factor over embedding distances; anomaly polarity.
    Lof,
}

impl DetectorKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "idk2" => Ok(DetectorKind::Idk2),
            "gdk" => Ok(DetectorKind::Gdk),
            "lof" => Ok(DetectorKind::Lof),
            other => Err(Error::Config(format!("unknown detector '{other}'"))),
        }
    }
}

/// Whether low or high scores mark anomalies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Low scores are anomalous (kernel similarities).
    Similarity,
    /// High scores are anomalous (LOF and external anomaly scores).
    Anomaly,
}

/// Scores for every trajectory of a dataset plus the anomalousness order.
#[derive(Debug, Clone)]
pub struct AnomalyRanking {
    pub ids: Vec<String>,
    /// One score per id, aligned with `ids` (dataset order).
    pub scores: Vec<f64>,
    pub polarity: Polarity,
    /// Indices into `ids`, most anomalous first.
    pub order: Vec<usize>,
}

impl AnomalyRanking {
    pub fn new(ids: Vec<String>, scores: Vec<f64>, polarity: Polarity) -> Self {
        let mut order: Vec<usize> = (0..ids.len()).collect();
        match polarity {
            Polarity::Similarity => {
                order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)))
            }
            Polarity::Anomaly => {
                order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)))
            }
        }
        AnomalyRanking { ids, scores, polarity, order }
    }

    /// (id, score) pairs, most anomalous first.
    pub fn ranked(&self) -> impl Iterator<Item = (&str, f64)> {
        self.order.iter().map(|&i| (self.ids[i].as_str(), self.scores[i]))
    }

    /// Write as CSV: id, score, rank (1 = most anomalous).
    pub fn save_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "score", "rank"])?;
        for (rank, (id, score)) in self.ranked().enumerate() {
            w.write_record([id, &format!("{score}"), &format!("{}", rank + 1)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Full configuration for [`detect`].
#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub scheme: SchemeKind,
    pub detector: DetectorKind,
    /// Level-1 isolation parameters.
    pub psi: usize,
    pub t: usize,
    /// Level-1 Nystrom parameters.
    pub sigma: f64,
    pub components: usize,
    /// Level-2 overrides; defaults derive from the level-1 settings.
    pub psi2: Option<usize>,
    pub t2: Option<usize>,
    pub sigma2: Option<f64>,
    pub components2: Option<usize>,
    /// LOF neighbor count.
    pub k: usize,
    pub seed: u64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            scheme: SchemeKind::Isolation,
            detector: DetectorKind::Idk2,
            psi: DEFAULT_PSI,
            t: DEFAULT_T,
            sigma: 1.0,
            components: DEFAULT_COMPONENTS,
            psi2: None,
            t2: None,
            sigma2: None,
            components2: None,
            k: 10,
            seed: 0,
        }
    }
}

impl DetectConfig {
    /// Level-2 cell count: min(psi, n/2 rounded down to a power of two),
    /// at least 2.
    pub fn resolved_psi2(&self, n: usize) -> usize {
        self.psi2.unwrap_or_else(|| {
            let mut cap = 1usize;
            while cap * 2 <= n / 2 {
                cap *= 2;
            }
            self.psi.min(cap).max(2)
        })
    }

    pub fn describe(&self) -> String {
        let scheme = match self.scheme {
            SchemeKind::Isolation => format!("ik(psi={},t={})", self.psi, self.t),
            SchemeKind::Nystrom => format!("nystrom(c={},sigma={})", self.components, self.sigma),
        };
        let detector = match self.detector {
            DetectorKind::Idk2 => match self.psi2 {
                Some(psi2) => format!("idk2(psi2={psi2},t2={})", self.t2.unwrap_or(self.t)),
                None => format!("idk2(t2={})", self.t2.unwrap_or(self.t)),
            },
            DetectorKind::Gdk => format!("gdk(sigma2={})", self.sigma2.unwrap_or(self.sigma)),
            DetectorKind::Lof => format!("lof(k={})", self.k),
        };
        format!("{scheme}+{detector}")
    }
}

const LEVEL2_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Pairwise dot products of a set of embeddings; the level-2 detectors run
/// entirely on this matrix, so anchor scans in feature space cost O(1)
/// lookups instead of O(feature_dim).
pub struct GramMatrix {
    n: usize,
    values: Vec<f64>,
}

impl GramMatrix {
    pub fn compute(embeddings: &[Embedding]) -> Result<GramMatrix> {
        let n = embeddings.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0; n];
                for j in i..n {
                    row[j] = embeddings[i].dot(&embeddings[j])?;
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for j in i..n {
                values[i * n + j] = row[j];
                values[j * n + i] = row[j];
            }
        }
        Ok(GramMatrix { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Squared distance between items i and j in feature space.
    #[inline]
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        (self.get(i, i) + self.get(j, j) - 2.0 * self.get(i, j)).max(0.0)
    }
}

/// Level-2 isolation scorer over a set of embeddings, fitted and evaluated
/// through their Gram matrix. Scores are in [0, 1]; low means anomalous.
pub struct Idk2Scorer {
    psi2: usize,
    t2: usize,
    /// The fitted embeddings; anchors reference into this set.
    reference: Vec<Embedding>,
    /// Sampled anchor indices per partitioning (flattened t2 * psi2).
    anchor_idx: Vec<usize>,
    anchor_self: Vec<f64>,
    /// Occupancy fraction of each cell over the fitted set.
    cell_mass: Vec<f64>,
}

impl Idk2Scorer {
    pub fn fit(embeddings: &[Embedding], gram: &GramMatrix, psi2: usize, t2: usize, seed: u64) -> Result<(Idk2Scorer, Vec<f64>)> {
        let n = embeddings.len();
        if psi2 == 0 || t2 == 0 {
            return Err(Error::parameter("psi2 and t2 must be at least 1"));
        }
        if psi2 > n {
            return Err(Error::parameter(format!("psi2 = {psi2} exceeds the {n} embedded trajectories")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut anchor_idx = Vec::with_capacity(t2 * psi2);
        for _ in 0..t2 {
            anchor_idx.extend(rand::seq::index::sample(&mut rng, n, psi2));
        }
        // Cell assignment per partitioning for every fitted item.
        let mut cells = vec![0u32; t2 * n];
        for j in 0..t2 {
            let block = &anchor_idx[j * psi2..(j + 1) * psi2];
            for i in 0..n {
                let mut best = 0u32;
                let mut best_dist = f64::INFINITY;
                for (c, &a) in block.iter().enumerate() {
                    let d = gram.squared_distance(i, a);
                    if d < best_dist {
                        best_dist = d;
                        best = c as u32;
                    }
                }
                cells[j * n + i] = best;
            }
        }
        let mut cell_mass = vec![0.0; t2 * psi2];
        for j in 0..t2 {
            for i in 0..n {
                cell_mass[j * psi2 + cells[j * n + i] as usize] += 1.0;
            }
        }
        for m in &mut cell_mass {
            *m /= n as f64;
        }
        // score(g) = <phi2(g), mean phi2> = (1/t2) sum_j mass(cell_j(g)).
        let scores: Vec<f64> = (0..n)
            .map(|i| {
                (0..t2).map(|j| cell_mass[j * psi2 + cells[j * n + i] as usize]).sum::<f64>() / t2 as f64
            })
            .collect();
        let anchor_self = anchor_idx.iter().map(|&a| gram.get(a, a)).collect();
        let scorer = Idk2Scorer {
            psi2,
            t2,
            reference: embeddings.to_vec(),
            anchor_idx,
            anchor_self,
            cell_mass,
        };
        Ok((scorer, scores))
    }

    /// Score an embedding that was not part of the fitted set.
    pub fn score_embedding(&self, e: &Embedding) -> Result<f64> {
        // Distinct anchors only; duplicated slots reuse the dot product.
        let mut dots = vec![f64::NAN; self.reference.len()];
        let mut total = 0.0;
        for j in 0..self.t2 {
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for c in 0..self.psi2 {
                let idx = j * self.psi2 + c;
                let a = self.anchor_idx[idx];
                if dots[a].is_nan() {
                    dots[a] = e.dot(&self.reference[a])?;
                }
                // ||e||^2 is constant across anchors; drop it.
                let d = self.anchor_self[idx] - 2.0 * dots[a];
                if d < best_dist {
                    best_dist = d;
                    best = c;
                }
            }
            total += self.cell_mass[j * self.psi2 + best];
        }
        Ok(total / self.t2 as f64)
    }
}

/// Level-2 Gaussian scorer: a Nystrom map over the embedded set, evaluated
/// through the Gram matrix. Low scores mean anomalous.
pub struct GdkScorer {
    sigma2: f64,
    landmark_idx: Vec<usize>,
    whitening: Vec<f64>,
    mean2: Vec<f64>,
}

impl GdkScorer {
    pub fn fit(gram: &GramMatrix, components2: usize, sigma2: f64, seed: u64) -> Result<(GdkScorer, Vec<f64>)> {
        let n = gram.len();
        if sigma2.is_nan() || sigma2 <= 0.0 {
            return Err(Error::parameter(format!("sigma2 must be positive, got {sigma2}")));
        }
        let c = components2.min(n);
        if c == 0 {
            return Err(Error::parameter("components2 must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let landmark_idx: Vec<usize> = rand::seq::index::sample(&mut rng, n, c).into_iter().collect();
        let gamma = 1.0 / (2.0 * sigma2 * sigma2);
        let mut w = nalgebra::DMatrix::<f64>::zeros(c, c);
        for a in 0..c {
            for b in a..c {
                let v = (-gram.squared_distance(landmark_idx[a], landmark_idx[b]) * gamma).exp();
                w[(a, b)] = v;
                w[(b, a)] = v;
            }
        }
        let whitening = crate::nystrom::whitening_from_gram(w);
        // Level-2 embeddings of all fitted items and their mean.
        let phi: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let kvec: Vec<f64> = landmark_idx
                    .iter()
                    .map(|&l| (-gram.squared_distance(i, l) * gamma).exp())
                    .collect();
                apply_whitening(&whitening, &kvec)
            })
            .collect();
        let mut mean2 = vec![0.0; c];
        for row in &phi {
            for (m, v) in mean2.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean2 {
            *m /= n as f64;
        }
        let scores: Vec<f64> = phi
            .iter()
            .map(|row| row.iter().zip(&mean2).map(|(a, b)| a * b).sum())
            .collect();
        Ok((GdkScorer { sigma2, landmark_idx, whitening, mean2 }, scores))
    }

    /// Score an out-of-sample embedding given its squared distances to all
    /// fitted items.
    pub fn score_distances(&self, squared_to_fitted: &[f64]) -> f64 {
        let gamma = 1.0 / (2.0 * self.sigma2 * self.sigma2);
        let kvec: Vec<f64> = self
            .landmark_idx
            .iter()
            .map(|&l| (-squared_to_fitted[l] * gamma).exp())
            .collect();
        let phi = apply_whitening(&self.whitening, &kvec);
        phi.iter().zip(&self.mean2).map(|(a, b)| a * b).sum()
    }
}

fn apply_whitening(whitening: &[f64], kvec: &[f64]) -> Vec<f64> {
    let c = kvec.len();
    (0..c)
        .map(|i| whitening[i * c..(i + 1) * c].iter().zip(kvec).map(|(w, k)| w * k).sum())
        .collect()
}

/// Algorithm: map every trajectory to feature space, fit the requested
/// detector over the mapped set, score every trajectory, and return the
/// ranking.
pub fn detect(dataset: &LabeledDataset, config: &DetectConfig) -> Result<DetectOutcome> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::parameter("detection needs at least 2 trajectories"));
    }
    let points = dataset.concat_points();
    let model: Box<dyn FeatureMap> = match config.scheme {
        SchemeKind::Isolation => {
            Box::new(PartitioningModel::fit(&points, config.psi, config.t, config.seed)?)
        }
        SchemeKind::Nystrom => Box::new(NystromModel::fit(
            &points,
            config.components,
            config.sigma,
            config.seed,
        )?),
    };
    let embedded = embed_dataset(model.as_ref(), dataset)?;
    let ranking = score_embedded(&embedded, config)?;
    Ok(DetectOutcome { ranking, embedded })
}

/// Result of [`detect`]: the ranking plus the level-1 embeddings it was
/// computed from.
#[derive(Debug)]
pub struct DetectOutcome {
    pub ranking: AnomalyRanking,
    pub embedded: EmbeddedDataset,
}

/// Fit the configured detector on an already-embedded dataset.
pub fn score_embedded(embedded: &EmbeddedDataset, config: &DetectConfig) -> Result<AnomalyRanking> {
    let n = embedded.len();
    let gram = GramMatrix::compute(&embedded.embeddings)?;
    let level2_seed = config.seed ^ LEVEL2_SEED_SALT;
    let (scores, polarity) = match config.detector {
        DetectorKind::Idk2 => {
            let psi2 = config.resolved_psi2(n);
            let t2 = config.t2.unwrap_or(config.t);
            let (_, scores) = Idk2Scorer::fit(&embedded.embeddings, &gram, psi2, t2, level2_seed)?;
            (scores, Polarity::Similarity)
        }
        DetectorKind::Gdk => {
            let c2 = config.components2.unwrap_or(DEFAULT_COMPONENTS);
            let sigma2 = config.sigma2.unwrap_or(config.sigma);
            let (_, scores) = GdkScorer::fit(&gram, c2, sigma2, level2_seed)?;
            (scores, Polarity::Similarity)
        }
        DetectorKind::Lof => {
            let scores = lof_from_gram(&gram, config.k)?;
            (scores, Polarity::Anomaly)
        }
    };
    Ok(AnomalyRanking::new(embedded.ids.clone(), scores, polarity))
}

/// Similarity of each point to the whole point set under a fitted feature
/// map: score(x) = <phi(x), mean map of all points>. In [0, 1] for the
/// isolation scheme.
pub fn idk_point_scores<P: AsRef<[f64]> + Sync>(model: &dyn FeatureMap, points: &[P]) -> Result<Vec<f64>> {
    let mean = crate::embedding::mean_map_points(model, points.iter().map(|p| p.as_ref()))?;
    points
        .par_iter()
        .map(|p| model.embed_point(p.as_ref())?.dot(&mean))
        .collect()
}

const LRD_CAP: f64 = 1e12;

fn lof_from_distances(dist: impl Fn(usize, usize) -> f64 + Sync, n: usize, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k + 1 > n {
        return Err(Error::parameter(format!("lof needs 2 <= k+1 <= n, got k={k}, n={n}")));
    }
    // Neighborhoods: everything within the k-distance, ties included.
    let neighborhoods: Vec<(f64, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut others: Vec<(f64, usize)> =
                (0..n).filter(|&o| o != p).map(|o| (dist(p, o), o)).collect();
            others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let k_distance = others[k - 1].0;
            let neighbors: Vec<usize> =
                others.iter().take_while(|(d, _)| *d <= k_distance).map(|&(_, o)| o).collect();
            (k_distance, neighbors)
        })
        .collect();
    let lrd: Vec<f64> = (0..n)
        .map(|p| {
            let (_, neighbors) = &neighborhoods[p];
            let total: f64 = neighbors
                .iter()
                .map(|&o| dist(p, o).max(neighborhoods[o].0))
                .sum();
            if total <= 0.0 {
                LRD_CAP
            } else {
                (neighbors.len() as f64 / total).min(LRD_CAP)
            }
        })
        .collect();
    Ok((0..n)
        .map(|p| {
            let (_, neighbors) = &neighborhoods[p];
            let sum: f64 = neighbors.iter().map(|&o| lrd[o]).sum();
            sum / (neighbors.len() as f64 * lrd[p])
        })
        .collect())
}

fn lof_from_gram(gram: &GramMatrix, k: usize) -> Result<Vec<f64>> {
    lof_from_distances(|i, j| gram.squared_distance(i, j).sqrt(), gram.len(), k)
}

/// LOF over a precomputed distance matrix; anomaly polarity (score ~ 1 for
/// uniform density, > 1 for outliers).
pub fn lof_scores_matrix(matrix: &crate::distances::DistanceMatrix, k: usize) -> Result<AnomalyRanking> {
    let scores = lof_from_distances(|i, j| matrix.get(i, j), matrix.len(), k)?;
    Ok(AnomalyRanking::new(matrix.ids.clone(), scores, Polarity::Anomaly))
}

/// LOF over Euclidean distances between embeddings (the kernel-induced
/// metric).
pub fn lof_scores_embedded(embedded: &EmbeddedDataset, k: usize) -> Result<AnomalyRanking> {
    let gram = GramMatrix::compute(&embedded.embeddings)?;
    let scores = lof_from_gram(&gram, k)?;
    Ok(AnomalyRanking::new(embedded.ids.clone(), scores, Polarity::Anomaly))
}

/// Table-style parameter grids for [`auto_search`].
pub fn psi_grid(max_points: usize) -> Vec<usize> {
    (1..=10).map(|q| 1usize << q).filter(|&psi| psi <= max_points).collect()
}

pub fn sigma_grid() -> Vec<f64> {
    (-10..=5).map(|q| 2.0f64.powi(q)).collect()
}

pub fn k_grid(n: usize) -> Vec<usize> {
    let mut grid = vec![1usize];
    for tenth in 1..=9usize {
        let k = n * tenth / 10;
        if k >= 1 && k < n && !grid.contains(&k) {
            grid.push(k);
        }
    }
    grid
}

/// Result of a labeled grid search: the winning configuration, its AUC and
/// ranking, and the whole (configuration, AUC) table.
#[derive(Debug)]
pub struct SearchResult {
    pub config: DetectConfig,
    pub auc: f64,
    pub ranking: AnomalyRanking,
    pub table: Vec<(String, f64)>,
}

/// Grid search over the standard parameter ranges, selecting by ROC-AUC
/// against the dataset labels. Ties keep the earliest grid entry.
pub fn auto_search(
    dataset: &LabeledDataset,
    scheme: SchemeKind,
    detector: DetectorKind,
    seed: u64,
) -> Result<SearchResult> {
    let labels = dataset
        .labels()
        .ok_or_else(|| Error::Config("parameter search needs labels".to_string()))?
        .clone();
    let configs = search_grid(dataset, scheme, detector, seed);
    if configs.is_empty() {
        return Err(Error::parameter("empty parameter grid for this dataset"));
    }
    let evaluated: Vec<(usize, AnomalyRanking, f64)> = configs
        .par_iter()
        .enumerate()
        .map(|(idx, config)| {
            let outcome = detect(dataset, config)?;
            let auc = crate::eval::roc_auc(&outcome.ranking, &labels)?;
            Ok((idx, outcome.ranking, auc))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, &AnomalyRanking, f64)> = None;
    for (idx, ranking, auc) in &evaluated {
        let better = match best {
            None => true,
            Some((_, _, best_auc)) => *auc > best_auc,
        };
        if better {
            best = Some((*idx, ranking, *auc));
        }
    }
    let (best_idx, best_ranking, best_auc) = best.unwrap();
    let table = evaluated
        .iter()
        .map(|(idx, _, auc)| (configs[*idx].describe(), *auc))
        .collect();
    Ok(SearchResult {
        config: configs[best_idx].clone(),
        auc: best_auc,
        ranking: best_ranking.clone(),
        table,
    })
}

fn search_grid(
    dataset: &LabeledDataset,
    scheme: SchemeKind,
    detector: DetectorKind,
    seed: u64,
) -> Vec<DetectConfig> {
    let total_points = dataset.total_points();
    let n = dataset.len();
    let base = DetectConfig { scheme, detector, seed, ..DetectConfig::default() };
    let level1: Vec<DetectConfig> = match scheme {
        SchemeKind::Isolation => psi_grid(total_points)
            .into_iter()
            .map(|psi| DetectConfig { psi, ..base.clone() })
            .collect(),
        SchemeKind::Nystrom => sigma_grid()
            .into_iter()
            .map(|sigma| DetectConfig {
                sigma,
                components: base.components.min(total_points),
                ..base.clone()
            })
            .collect(),
    };
    match detector {
        DetectorKind::Idk2 => level1,
        DetectorKind::Gdk => match scheme {
            // Level-2 sigma is tied to level-1 sigma for the Nystrom scheme
            // and searched on its own grid otherwise.
            SchemeKind::Nystrom => level1
                .into_iter()
                .map(|c| DetectConfig { sigma2: Some(c.sigma), ..c })
                .collect(),
            SchemeKind::Isolation => level1
                .into_iter()
                .flat_map(|c| {
                    sigma_grid().into_iter().map(move |s2| DetectConfig { sigma2: Some(s2), ..c.clone() })
                })
                .collect(),
        },
        DetectorKind::Lof => level1
            .into_iter()
            .flat_map(|c| k_grid(n).into_iter().map(move |k| DetectConfig { k, ..c.clone() }))
            .collect(),
    }
}

/// Build a ranking from an externally produced score file (id, score), so
/// third-party detectors can be evaluated by the same harness.
pub fn ranking_from_scores(
    scores: &BTreeMap<String, f64>,
    ids: &[String],
    polarity: Polarity,
) -> Result<AnomalyRanking> {
    let values = ids
        .iter()
        .map(|id| {
            scores
                .get(id)
                .copied()
                .ok_or_else(|| Error::validation(format!("no score for trajectory '{id}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(AnomalyRanking::new(ids.to_vec(), values, polarity))
}
