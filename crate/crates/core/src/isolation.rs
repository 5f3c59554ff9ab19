//! Isolation Kernel feature map: t independent psi-point nearest-anchor
//! (Voronoi) partitionings of the fitting data. Two points are similar in
//! proportion to how often they fall in the same cell.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, FeatureMap, Scheme};
use crate::error::{Error, Result};

/// Default number of partitionings.
pub const DEFAULT_T: usize = 100;
/// Default cells per partitioning, used when no value is given.
pub const DEFAULT_PSI: usize = 16;

/// A fitted Isolation Kernel model: for each of `t` partitionings, `psi`
/// anchor points sampled without replacement from the fitting data. The
/// feature map places a point into the cell of its nearest anchor, scaled
/// by `1/sqrt(t)` so kernels are plain dot products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitioningModel {
    psi: usize,
    t: usize,
    dim: usize,
    seed: u64,
    /// Flattened anchors: `t * psi * dim`, partitioning-major.
    anchors: Vec<f64>,
}

impl PartitioningModel {
    /// Sample `psi` anchors per partitioning, `t` times, uniformly without
    /// replacement from `points`, using a deterministic stream from `seed`.
    pub fn fit<P: AsRef<[f64]>>(points: &[P], psi: usize, t: usize, seed: u64) -> Result<Self> {
        if psi == 0 || t == 0 {
            return Err(Error::parameter("psi and t must be at least 1"));
        }
        if points.len() < psi {
            return Err(Error::parameter(format!(
                "psi = {psi} exceeds the {} available points",
                points.len()
            )));
        }
        let dim = points[0].as_ref().len();
        if dim == 0 {
            return Err(Error::validation("points have no coordinates"));
        }
        for p in points {
            if p.as_ref().len() != dim {
                return Err(Error::validation("inconsistent point dimensionality"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut anchors = Vec::with_capacity(t * psi * dim);
        for _ in 0..t {
            let picked = rand::seq::index::sample(&mut rng, points.len(), psi);
            for idx in picked {
                anchors.extend_from_slice(points[idx].as_ref());
            }
        }
        Ok(PartitioningModel { psi, t, dim, seed, anchors })
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The nearest-anchor cell of `x` in each partitioning.
    pub fn assign_cells(&self, x: &[f64]) -> Result<Vec<u32>> {
        self.check_dim(x)?;
        let mut cells = Vec::with_capacity(self.t);
        let stride = self.psi * self.dim;
        for j in 0..self.t {
            let block = &self.anchors[j * stride..(j + 1) * stride];
            cells.push(nearest_anchor(block, self.dim, x));
        }
        Ok(cells)
    }

    /// The point kernel kappa(x, y): the fraction of partitionings in which
    /// x and y fall in the same cell. Equals the dot product of the two
    /// point embeddings.
    pub fn point_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let mut matches = 0usize;
        let stride = self.psi * self.dim;
        for j in 0..self.t {
            let block = &self.anchors[j * stride..(j + 1) * stride];
            if nearest_anchor(block, self.dim, x) == nearest_anchor(block, self.dim, y) {
                matches += 1;
            }
        }
        Ok(matches as f64 / self.t as f64)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::validation(format!(
                "point has dimension {}, model expects {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn save(&self, writer: impl std::io::Write) -> Result<()> {
        let container = ModelContainer { format: FORMAT_TAG.to_string(), version: 1, model: SavedModel::Isolation(self.clone()) };
        serde_json::to_writer(writer, &container).map_err(|e| Error::Io(e.into()))?;
        Ok(())
    }
}

/// Index of the anchor nearest to `x` within one partitioning block,
/// breaking ties toward the smallest index.
fn nearest_anchor(block: &[f64], dim: usize, x: &[f64]) -> u32 {
    // Planar points dominate the workload; a dedicated loop keeps the scan
    // vectorizable.
    if dim == 2 {
        let (px, py) = (x[0], x[1]);
        let mut best = 0u32;
        let mut best_dist = f64::INFINITY;
        for (i, anchor) in block.chunks_exact(2).enumerate() {
            let dx = anchor[0] - px;
            let dy = anchor[1] - py;
            let dist = dx * dx + dy * dy;
            if dist < best_dist {
                best_dist = dist;
                best = i as u32;
            }
        }
        return best;
    }
    let mut best = 0u32;
    let mut best_dist = f64::INFINITY;
    for (i, anchor) in block.chunks_exact(dim).enumerate() {
        let mut dist = 0.0;
        for (a, b) in anchor.iter().zip(x) {
            let diff = a - b;
            dist += diff * diff;
        }
        if dist < best_dist {
            best_dist = dist;
            best = i as u32;
        }
    }
    best
}

/// Smallest index among the minima of a non-empty distance sequence.
pub fn tie_break_nearest(distances: &[f64]) -> usize {
    debug_assert!(!distances.is_empty());
    let mut best = 0;
    for (i, &d) in distances.iter().enumerate().skip(1) {
        if d < distances[best] {
            best = i;
        }
    }
    best
}

impl FeatureMap for PartitioningModel {
    fn feature_dim(&self) -> usize {
        self.psi * self.t
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn scheme(&self) -> Scheme {
        Scheme::Isolation { psi: self.psi, t: self.t }
    }

    fn embed_point(&self, x: &[f64]) -> Result<Embedding> {
        let cells = self.assign_cells(x)?;
        let scale = 1.0 / (self.t as f64).sqrt();
        Ok(Embedding::cells(self.scheme(), cells, self.psi, scale))
    }

    fn accumulate(&self, x: &[f64], acc: &mut [f64]) -> Result<()> {
        let scale = 1.0 / (self.t as f64).sqrt();
        let stride = self.psi * self.dim;
        self.check_dim(x)?;
        for j in 0..self.t {
            let block = &self.anchors[j * stride..(j + 1) * stride];
            let cell = nearest_anchor(block, self.dim, x);
            acc[j * self.psi + cell as usize] += scale;
        }
        Ok(())
    }
}

const FORMAT_TAG: &str = "trajdk-kernel-model";

#[derive(Serialize, Deserialize)]
enum SavedModel {
    Isolation(PartitioningModel),
    Nystrom(crate::nystrom::NystromModel),
}

#[derive(Serialize, Deserialize)]
struct ModelContainer {
    format: String,
    version: u32,
    model: SavedModel,
}

/// A model restored from the serialized container.
pub enum KernelModel {
    Isolation(PartitioningModel),
    Nystrom(crate::nystrom::NystromModel),
}

impl KernelModel {
    pub fn as_feature_map(&self) -> &dyn FeatureMap {
        match self {
            KernelModel::Isolation(m) => m,
            KernelModel::Nystrom(m) => m,
        }
    }
}

pub fn load_model(reader: impl std::io::Read) -> Result<KernelModel> {
    let container: ModelContainer =
        serde_json::from_reader(reader).map_err(|e| Error::format(e.line(), e.to_string()))?;
    if container.format != FORMAT_TAG {
        return Err(Error::validation(format!("unknown model container '{}'", container.format)));
    }
    if container.version != 1 {
        return Err(Error::validation(format!("unsupported model version {}", container.version)));
    }
    Ok(match container.model {
        SavedModel::Isolation(m) => KernelModel::Isolation(m),
        SavedModel::Nystrom(m) => KernelModel::Nystrom(m),
    })
}

pub(crate) fn save_nystrom(model: &crate::nystrom::NystromModel, writer: impl std::io::Write) -> Result<()> {
    let container = ModelContainer { format: FORMAT_TAG.to_string(), version: 1, model: SavedModel::Nystrom(model.clone()) };
    serde_json::to_writer(writer, &container).map_err(|e| Error::Io(e.into()))?;
    Ok(())
}
