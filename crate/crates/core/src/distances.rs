//! Point-to-point baseline distances: DTW, Hausdorff, and discrete Frechet,
//! plus the pairwise distance matrix used by comparison experiments.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabeledDataset, Trajectory};

/// Which baseline distance a matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    Dtw,
    Hausdorff,
    Frechet,
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Dtw => "dtw",
            Measure::Hausdorff => "hausdorff",
            Measure::Frechet => "frechet",
        }
    }

    pub fn compute(&self, a: &Trajectory, b: &Trajectory) -> Result<f64> {
        match self {
            Measure::Dtw => dtw(a, b),
            Measure::Hausdorff => hausdorff(a, b),
            Measure::Frechet => frechet_discrete(a, b),
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn check_pair(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::validation("distance of an empty trajectory"));
    }
    if a.dim() != b.dim() {
        return Err(Error::validation(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Dynamic Time Warping: the accumulated Euclidean cost of the optimal
/// monotone warping path over the m x n grid.
pub fn dtw(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_pair(a, b)?;
    let (m, n) = (a.len(), b.len());
    // Rolling single-row DP.
    let mut prev = vec![f64::INFINITY; n + 1];
    let mut curr = vec![f64::INFINITY; n + 1];
    prev[0] = 0.0;
    for i in 1..=m {
        curr[0] = f64::INFINITY;
        for j in 1..=n {
            let cost = euclidean(&a.points[i - 1].coords, &b.points[j - 1].coords);
            let best = prev[j].min(curr[j - 1]).min(prev[j - 1]);
            curr[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[n])
}

/// Hausdorff distance: max of the two directed max-min point distances.
/// Order information is ignored.
pub fn hausdorff(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_pair(a, b)?;
    let directed = |from: &Trajectory, to: &Trajectory| -> f64 {
        from.points
            .iter()
            .map(|p| {
                to.points
                    .iter()
                    .map(|q| euclidean(&p.coords, &q.coords))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Discrete Frechet distance via the coupling DP:
/// c(i,j) = max(d(i,j), min(c(i-1,j), c(i,j-1), c(i-1,j-1))).
pub fn frechet_discrete(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_pair(a, b)?;
    let (m, n) = (a.len(), b.len());
    let mut prev = vec![f64::INFINITY; n];
    let mut curr = vec![f64::INFINITY; n];
    for i in 0..m {
        for j in 0..n {
            let d = euclidean(&a.points[i].coords, &b.points[j].coords);
            let reach = match (i, j) {
                (0, 0) => d,
                (0, _) => curr[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                (_, _) => prev[j].min(curr[j - 1]).min(prev[j - 1]).max(d),
            };
            curr[j] = reach;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[n - 1])
}

/// A symmetric n x n matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub ids: Vec<String>,
    values: Vec<f64>,
    pub measure: Measure,
}

impl DistanceMatrix {
    pub fn from_values(ids: Vec<String>, values: Vec<f64>, measure: Measure) -> Result<Self> {
        if values.len() != ids.len() * ids.len() {
            return Err(Error::validation("distance matrix shape mismatch"));
        }
        Ok(DistanceMatrix { ids, values, measure })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    /// Write as CSV with a header row of ids and one labeled row per id.
    pub fn save_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend((0..self.ids.len()).map(|j| format!("{}", self.get(i, j))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Compute the full pairwise matrix for a dataset under one measure. The
/// upper triangle is computed (in parallel) and mirrored; the diagonal is
/// zero without computation.
pub fn pairwise_matrix(dataset: &LabeledDataset, measure: Measure) -> Result<DistanceMatrix> {
    let trajectories = dataset.trajectories();
    let n = trajectories.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let computed = pairs
        .par_iter()
        .map(|&(i, j)| measure.compute(&trajectories[i], &trajectories[j]))
        .collect::<Result<Vec<f64>>>()?;
    let mut values = vec![0.0; n * n];
    for (&(i, j), &d) in pairs.iter().zip(&computed) {
        values[i * n + j] = d;
        values[j * n + i] = d;
    }
    Ok(DistanceMatrix {
        ids: trajectories.iter().map(|t| t.id.clone()).collect(),
        values,
        measure,
    })
}
