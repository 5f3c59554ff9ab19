//! Nystrom approximation of the Gaussian kernel
//! k(x, y) = exp(-||x-y||^2 / (2 sigma^2)), producing a finite-dimensional
//! feature map so the Gaussian distributional kernel fits the same
//! dot-product pipeline as the isolation scheme.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, FeatureMap, Scheme};
use crate::error::{Error, Result};

/// Default number of landmark components.
pub const DEFAULT_COMPONENTS: usize = 100;

/// Relative eigenvalue floor: directions with eigenvalues below
/// `EIG_FLOOR_REL * lambda_max` are dropped from the whitening transform.
const EIG_FLOOR_REL: f64 = 1e-10;

/// A fitted Nystrom model: `c` landmarks sampled without replacement from
/// the fitting data and the whitening matrix W^{-1/2} of their Gaussian
/// Gram matrix. The feature map is phi(x) = W^{-1/2} k(x, landmarks), so
/// dot products of embeddings approximate the exact Gaussian kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystromModel {
    components: usize,
    sigma: f64,
    dim: usize,
    seed: u64,
    /// Flattened landmarks: `c * dim`.
    landmarks: Vec<f64>,
    /// Flattened symmetric whitening matrix: `c * c`, row-major.
    whitening: Vec<f64>,
}

impl NystromModel {
    pub fn fit<P: AsRef<[f64]>>(points: &[P], components: usize, sigma: f64, seed: u64) -> Result<Self> {
        if components == 0 {
            return Err(Error::parameter("components must be at least 1"));
        }
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::parameter(format!("sigma must be positive, got {sigma}")));
        }
        if points.len() < components {
            return Err(Error::parameter(format!(
                "components = {components} exceeds the {} available points",
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
        let picked = rand::seq::index::sample(&mut rng, points.len(), components);
        let mut landmarks = Vec::with_capacity(components * dim);
        for idx in picked {
            landmarks.extend_from_slice(points[idx].as_ref());
        }

        let c = components;
        let gamma = 1.0 / (2.0 * sigma * sigma);
        let mut gram = DMatrix::<f64>::zeros(c, c);
        for i in 0..c {
            for j in i..c {
                let a = &landmarks[i * dim..(i + 1) * dim];
                let b = &landmarks[j * dim..(j + 1) * dim];
                let value = (-squared_distance(a, b) * gamma).exp();
                gram[(i, j)] = value;
                gram[(j, i)] = value;
            }
        }
        let whitening = whitening_from_gram(gram);
        Ok(NystromModel { components, sigma, dim, seed, landmarks, whitening })
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Gaussian responses of `x` against each landmark.
    fn kernel_vector(&self, x: &[f64]) -> Vec<f64> {
        let gamma = 1.0 / (2.0 * self.sigma * self.sigma);
        self.landmarks
            .chunks_exact(self.dim)
            .map(|l| (-squared_distance(l, x) * gamma).exp())
            .collect()
    }

    /// The exact Gaussian kernel value, for reference and tests.
    pub fn exact_kernel(&self, x: &[f64], y: &[f64]) -> f64 {
        let gamma = 1.0 / (2.0 * self.sigma * self.sigma);
        (-squared_distance(x, y) * gamma).exp()
    }

    pub fn save(&self, writer: impl std::io::Write) -> Result<()> {
        crate::isolation::save_nystrom(self, writer)
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
}

/// W^{-1/2} of a symmetric PSD Gram matrix via eigendecomposition:
/// V diag(1/sqrt(lambda)) V^T, dropping directions whose eigenvalue falls
/// below the relative floor. Row-major output.
pub(crate) fn whitening_from_gram(gram: DMatrix<f64>) -> Vec<f64> {
    let c = gram.nrows();
    let eig = gram.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let floor = EIG_FLOOR_REL * lambda_max;
    let mut whitening = vec![0.0; c * c];
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= floor {
            continue;
        }
        let inv_sqrt = 1.0 / lambda.sqrt();
        let v = eig.eigenvectors.column(k);
        for i in 0..c {
            let vi = v[i] * inv_sqrt;
            for j in 0..c {
                whitening[i * c + j] += vi * v[j];
            }
        }
    }
    // Enforce exact symmetry against accumulation order effects.
    for i in 0..c {
        for j in (i + 1)..c {
            let avg = 0.5 * (whitening[i * c + j] + whitening[j * c + i]);
            whitening[i * c + j] = avg;
            whitening[j * c + i] = avg;
        }
    }
    whitening
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

impl FeatureMap for NystromModel {
    fn feature_dim(&self) -> usize {
        self.components
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn scheme(&self) -> Scheme {
        Scheme::Nystrom { components: self.components, sigma: self.sigma }
    }

    fn embed_point(&self, x: &[f64]) -> Result<Embedding> {
        self.check_dim(x)?;
        let kvec = self.kernel_vector(x);
        let c = self.components;
        let values = self
            .whitening
            .chunks_exact(c)
            .map(|row| row.iter().zip(&kvec).map(|(w, k)| w * k).sum())
            .collect();
        Ok(Embedding::dense(self.scheme(), values))
    }

    fn accumulate(&self, x: &[f64], acc: &mut [f64]) -> Result<()> {
        let e = self.embed_point(x)?;
        e.add_into(acc);
        Ok(())
    }
}
