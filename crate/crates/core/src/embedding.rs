//! Kernel mean maps: finite-dimensional feature vectors for points and
//! trajectories, and the distributional kernel as a dot product between
//! them.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabeledDataset, Trajectory};

/// Which feature map produced an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// Isolation Kernel map with `psi` cells per partitioning and `t`
    /// partitionings; feature dimension is `psi * t`.
    Isolation { psi: usize, t: usize },
    /// Nystrom-approximated Gaussian map with `components` landmarks and
    /// bandwidth `sigma`.
    Nystrom { components: usize, sigma: f64 },
}

impl Scheme {
    pub fn describe(&self) -> String {
        match self {
            Scheme::Isolation { psi, t } => format!("isolation(psi={psi},t={t})"),
            Scheme::Nystrom { components, sigma } => format!("nystrom(c={components},sigma={sigma})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Values {
    Dense(Vec<f64>),
    /// Isolation point embedding: the selected cell per partitioning, each
    /// carrying the value `1/sqrt(t)`.
    Cells { cells: Vec<u32>, psi: usize, scale: f64 },
}

/// A point embedding or a kernel mean map. Point embeddings under the
/// isolation scheme are stored sparsely (one active cell per partitioning);
/// mean maps are dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    scheme: Scheme,
    values: Values,
    norm: f64,
}

impl Embedding {
    pub fn dense(scheme: Scheme, values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Embedding { scheme, values: Values::Dense(values), norm }
    }

    pub(crate) fn cells(scheme: Scheme, cells: Vec<u32>, psi: usize, scale: f64) -> Self {
        let norm = (scale * scale * cells.len() as f64).sqrt();
        Embedding { scheme, values: Values::Cells { cells, psi, scale }, norm }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Cached Euclidean norm of the vector.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        match &self.values {
            Values::Dense(v) => v.len(),
            Values::Cells { cells, psi, .. } => cells.len() * psi,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.values {
            Values::Dense(v) => v.clone(),
            Values::Cells { cells, psi, scale } => {
                let mut out = vec![0.0; cells.len() * psi];
                for (block, &cell) in cells.iter().enumerate() {
                    out[block * psi + cell as usize] = *scale;
                }
                out
            }
        }
    }

    pub fn as_dense(&self) -> Option<&[f64]> {
        match &self.values {
            Values::Dense(v) => Some(v),
            Values::Cells { .. } => None,
        }
    }

    /// Accumulate this embedding into a dense buffer (used to build mean
    /// maps without materializing dense point embeddings).
    pub(crate) fn add_into(&self, acc: &mut [f64]) {
        match &self.values {
            Values::Dense(v) => {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
            }
            Values::Cells { cells, psi, scale } => {
                for (block, &cell) in cells.iter().enumerate() {
                    acc[block * psi + cell as usize] += *scale;
                }
            }
        }
    }

    /// Dot product with another embedding of the same scheme and dimension.
    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        if self.scheme != other.scheme {
            return Err(Error::validation(format!(
                "scheme mismatch: {} vs {}",
                self.scheme.describe(),
                other.scheme.describe()
            )));
        }
        if self.dim() != other.dim() {
            return Err(Error::validation(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(match (&self.values, &other.values) {
            (Values::Dense(a), Values::Dense(b)) => dot_dense(a, b),
            (Values::Dense(a), Values::Cells { cells, psi, scale })
            | (Values::Cells { cells, psi, scale }, Values::Dense(a)) => {
                let mut sum = 0.0;
                for (block, &cell) in cells.iter().enumerate() {
                    sum += a[block * psi + cell as usize];
                }
                sum * scale
            }
            (
                Values::Cells { cells: ca, scale: sa, .. },
                Values::Cells { cells: cb, scale: sb, .. },
            ) => {
                let matches = ca.iter().zip(cb).filter(|(a, b)| a == b).count();
                matches as f64 * sa * sb
            }
        })
    }
}

fn dot_dense(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A fitted feature map: evaluates point embeddings phi(x) in a fixed
/// feature space. Implemented by [`crate::isolation::PartitioningModel`]
/// and [`crate::nystrom::NystromModel`].
pub trait FeatureMap: Send + Sync {
    /// Dimension of the feature space.
    fn feature_dim(&self) -> usize;
    /// Dimension `d` of input points.
    fn input_dim(&self) -> usize;
    fn scheme(&self) -> Scheme;
    /// Embed a single point.
    fn embed_point(&self, x: &[f64]) -> Result<Embedding>;
    /// Add phi(x) into `acc` (a buffer of `feature_dim()` zeros or partial
    /// sums).
    fn accumulate(&self, x: &[f64], acc: &mut [f64]) -> Result<()>;
}

/// Kernel mean map of a trajectory: the arithmetic mean of its point
/// embeddings.
pub fn mean_map(model: &dyn FeatureMap, trajectory: &Trajectory) -> Result<Embedding> {
    mean_map_points(model, trajectory.points.iter().map(|p| p.coords.as_slice()))
}

/// Mean map over an explicit sequence of points.
pub fn mean_map_points<'a>(
    model: &dyn FeatureMap,
    points: impl IntoIterator<Item = &'a [f64]>,
) -> Result<Embedding> {
    let mut acc = vec![0.0; model.feature_dim()];
    let mut count = 0usize;
    for coords in points {
        model.accumulate(coords, &mut acc)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::validation("cannot take the mean map of an empty point set"));
    }
    let inv = 1.0 / count as f64;
    for v in &mut acc {
        *v *= inv;
    }
    Ok(Embedding::dense(model.scheme(), acc))
}

/// The distributional kernel K(P_X, P_Y) as a dot product of mean maps (or
/// point embeddings, which stand for Dirac measures).
pub fn distributional_kernel(a: &Embedding, b: &Embedding) -> Result<f64> {
    a.dot(b)
}

/// Cosine-normalized variant K(X,Y) / sqrt(K(X,X) K(Y,Y)).
pub fn normalized_kernel(a: &Embedding, b: &Embedding) -> Result<f64> {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return Err(Error::validation("cannot normalize a zero embedding"));
    }
    Ok(a.dot(b)? / denom)
}

/// Coordinate-wise mean of a non-empty set of embeddings with a uniform
/// scheme.
pub fn mean_of_maps(embeddings: &[Embedding]) -> Result<Embedding> {
    let first = embeddings
        .first()
        .ok_or_else(|| Error::validation("cannot average an empty set of embeddings"))?;
    let scheme = first.scheme();
    let dim = first.dim();
    let mut acc = vec![0.0; dim];
    for e in embeddings {
        if e.scheme() != scheme || e.dim() != dim {
            return Err(Error::validation("mixed schemes or dimensions in mean_of_maps"));
        }
        e.add_into(&mut acc);
    }
    let inv = 1.0 / embeddings.len() as f64;
    for v in &mut acc {
        *v *= inv;
    }
    Ok(Embedding::dense(scheme, acc))
}

/// Mean maps of every trajectory of a dataset, order-preserving.
#[derive(Debug, Clone)]
pub struct EmbeddedDataset {
    pub ids: Vec<String>,
    pub embeddings: Vec<Embedding>,
    pub scheme: Scheme,
}

impl EmbeddedDataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Write as CSV: id, v1..v_dim.
    pub fn save_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let dim = self.embeddings.first().map_or(0, Embedding::dim);
        let mut header = vec!["id".to_string()];
        header.extend((1..=dim).map(|i| format!("v{i}")));
        w.write_record(&header)?;
        for (id, e) in self.ids.iter().zip(&self.embeddings) {
            let mut row = vec![id.clone()];
            row.extend(e.to_dense().iter().map(|v| format!("{v}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        #[derive(Serialize)]
        struct Row<'a> {
            id: &'a str,
            values: Vec<f64>,
        }
        let rows: Vec<Row> = self
            .ids
            .iter()
            .zip(&self.embeddings)
            .map(|(id, e)| Row { id, values: e.to_dense() })
            .collect();
        serde_json::to_writer(file, &rows).map_err(|e| Error::Io(e.into()))?;
        Ok(())
    }

    /// Compact binary container: magic, version, scheme, then per row the
    /// id and the dense little-endian vector. Bit-exact on reload.
    pub fn save_binary(&self, mut writer: impl Write) -> Result<()> {
        writer.write_all(BINARY_MAGIC)?;
        writer.write_all(&1u32.to_le_bytes())?;
        let scheme = serde_json::to_vec(&self.scheme).map_err(|e| Error::Io(e.into()))?;
        writer.write_all(&(scheme.len() as u64).to_le_bytes())?;
        writer.write_all(&scheme)?;
        let dim = self.embeddings.first().map_or(0, Embedding::dim);
        writer.write_all(&(self.ids.len() as u64).to_le_bytes())?;
        writer.write_all(&(dim as u64).to_le_bytes())?;
        for (id, e) in self.ids.iter().zip(&self.embeddings) {
            let bytes = id.as_bytes();
            writer.write_all(&(bytes.len() as u64).to_le_bytes())?;
            writer.write_all(bytes)?;
            for v in e.to_dense() {
                writer.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load_binary(mut reader: impl std::io::Read) -> Result<EmbeddedDataset> {
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::validation("not an embedding container"));
        }
        let mut u32buf = [0u8; 4];
        reader.read_exact(&mut u32buf)?;
        if u32::from_le_bytes(u32buf) != 1 {
            return Err(Error::validation("unsupported embedding container version"));
        }
        let mut u64buf = [0u8; 8];
        reader.read_exact(&mut u64buf)?;
        let scheme_len = u64::from_le_bytes(u64buf) as usize;
        let mut scheme_raw = vec![0u8; scheme_len];
        reader.read_exact(&mut scheme_raw)?;
        let scheme: Scheme = serde_json::from_slice(&scheme_raw)
            .map_err(|e| Error::validation(format!("bad scheme descriptor: {e}")))?;
        reader.read_exact(&mut u64buf)?;
        let count = u64::from_le_bytes(u64buf) as usize;
        reader.read_exact(&mut u64buf)?;
        let dim = u64::from_le_bytes(u64buf) as usize;
        let mut ids = Vec::with_capacity(count);
        let mut embeddings = Vec::with_capacity(count);
        for _ in 0..count {
            reader.read_exact(&mut u64buf)?;
            let id_len = u64::from_le_bytes(u64buf) as usize;
            let mut id_raw = vec![0u8; id_len];
            reader.read_exact(&mut id_raw)?;
            let id = String::from_utf8(id_raw)
                .map_err(|e| Error::validation(format!("bad id encoding: {e}")))?;
            let mut values = Vec::with_capacity(dim);
            let mut f64buf = [0u8; 8];
            for _ in 0..dim {
                reader.read_exact(&mut f64buf)?;
                values.push(f64::from_le_bytes(f64buf));
            }
            ids.push(id);
            embeddings.push(Embedding::dense(scheme, values));
        }
        Ok(EmbeddedDataset { ids, embeddings, scheme })
    }
}

const BINARY_MAGIC: &[u8; 4] = b"TDKE";

/// Map every trajectory of `dataset` to its kernel mean map. Parallel over
/// trajectories; output order matches dataset order.
pub fn embed_dataset(model: &dyn FeatureMap, dataset: &LabeledDataset) -> Result<EmbeddedDataset> {
    let embeddings = dataset
        .trajectories()
        .par_iter()
        .map(|t| mean_map(model, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddedDataset {
        ids: dataset.trajectories().iter().map(|t| t.id.clone()).collect(),
        embeddings,
        scheme: model.scheme(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isolation::PartitioningModel;
    use crate::model::Point;

    fn traj(id: &str, coords: &[(f64, f64)]) -> Trajectory {
        Trajectory::new(id, coords.iter().map(|&(x, y)| Point::new(vec![x, y])).collect()).unwrap()
    }

    fn random_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    #[test]
    fn single_point_mean_map_equals_point_embedding() {
        let points = random_points(40, 1);
        let model = PartitioningModel::fit(&points, 8, 20, 9).unwrap();
        let t = traj("a", &[(0.3, 0.4)]);
        let mm = mean_map(&model, &t).unwrap();
        let pe = model.embed_point(&[0.3, 0.4]).unwrap();
        assert!((mm.dot(&pe).unwrap() - pe.dot(&pe).unwrap()).abs() < 1e-12);
        assert_eq!(mm.to_dense(), pe.to_dense());
    }

    #[test]
    fn duplicated_point_mean_map_equals_point_embedding() {
        let points = random_points(40, 2);
        let model = PartitioningModel::fit(&points, 8, 20, 9).unwrap();
        let t = traj("a", &[(0.3, 0.4), (0.3, 0.4)]);
        let mm = mean_map(&model, &t).unwrap();
        let pe = model.embed_point(&[0.3, 0.4]).unwrap();
        assert_eq!(mm.to_dense(), pe.to_dense());
    }

    #[test]
    fn isolation_mean_map_block_sums() {
        let points = random_points(60, 3);
        let (psi, t) = (8, 25);
        let model = PartitioningModel::fit(&points, psi, t, 4).unwrap();
        let trajectory = traj("a", &[(0.1, 0.2), (0.9, 0.8), (0.4, 0.6), (0.2, 0.2), (0.5, 0.5), (0.7, 0.1), (0.3, 0.9)]);
        let mm = mean_map(&model, &trajectory).unwrap();
        let dense = mm.to_dense();
        let expected = 1.0 / (t as f64).sqrt();
        for block in 0..t {
            let sum: f64 = dense[block * psi..(block + 1) * psi].iter().sum();
            assert!((sum - expected).abs() < 1e-12, "block {block}: {sum} vs {expected}");
        }
    }

    #[test]
    fn kernel_of_single_point_with_itself_is_one() {
        let points = random_points(30, 4);
        let model = PartitioningModel::fit(&points, 4, 50, 4).unwrap();
        let t = traj("a", &[(0.5, 0.5)]);
        let mm = mean_map(&model, &t).unwrap();
        assert!((distributional_kernel(&mm, &mm).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_cell_trajectories_have_zero_kernel() {
        // Anchors come from a centered strip on the x axis, so the
        // bisector of any anchor pair falls strictly between the two far
        // trajectories: they can never share a cell.
        let points: Vec<Vec<f64>> = (0..21).map(|i| vec![40.0 + i as f64, 0.0]).collect();
        let model = PartitioningModel::fit(&points, 2, 50, 11).unwrap();
        let a = traj("a", &[(0.0, 0.0), (0.005, 0.0)]);
        let b = traj("b", &[(100.0, 0.0), (100.005, 0.0)]);
        let ka = mean_map(&model, &a).unwrap();
        let kb = mean_map(&model, &b).unwrap();
        assert_eq!(distributional_kernel(&ka, &kb).unwrap(), 0.0);
    }

    #[test]
    fn kernel_matches_double_sum_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let background = random_points(80, 22);
        let model = PartitioningModel::fit(&background, 4, 20, 5).unwrap();
        for _ in 0..10 {
            let a: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.random(), rng.random()]).collect();
            let b: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.random(), rng.random()]).collect();
            let ka = mean_map_points(&model, a.iter().map(|p| p.as_slice())).unwrap();
            let kb = mean_map_points(&model, b.iter().map(|p| p.as_slice())).unwrap();
            let fast = distributional_kernel(&ka, &kb).unwrap();
            let mut slow = 0.0;
            for x in &a {
                for y in &b {
                    slow += model.point_kernel(x, y).unwrap();
                }
            }
            slow /= (a.len() * b.len()) as f64;
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }

    #[test]
    fn embed_dataset_preserves_order_and_equal_trajectories() {
        let points = random_points(50, 6);
        let model = PartitioningModel::fit(&points, 8, 10, 6).unwrap();
        let a = traj("a", &[(0.1, 0.1), (0.2, 0.2)]);
        // Same point multiset in a different order.
        let b = traj("b", &[(0.2, 0.2), (0.1, 0.1)]);
        let c = traj("c", &[(0.9, 0.9)]);
        let ds = LabeledDataset::new(vec![a, b, c]).unwrap();
        let embedded = embed_dataset(&model, &ds).unwrap();
        assert_eq!(embedded.ids, vec!["a", "b", "c"]);
        assert_eq!(embedded.embeddings[0], embedded.embeddings[1]);
        assert_ne!(embedded.embeddings[0], embedded.embeddings[2]);
    }

    #[test]
    fn mean_of_maps_matches_recomputation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let scheme = Scheme::Isolation { psi: 3, t: 2 };
        let embeddings: Vec<Embedding> = (0..10)
            .map(|_| Embedding::dense(scheme, (0..6).map(|_| rng.random::<f64>()).collect()))
            .collect();
        let mean = mean_of_maps(&embeddings).unwrap();
        let dense = mean.to_dense();
        for (coord, &got) in dense.iter().enumerate() {
            let expected: f64 =
                embeddings.iter().map(|e| e.to_dense()[coord]).sum::<f64>() / embeddings.len() as f64;
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_of_maps_single_and_cancellation() {
        let scheme = Scheme::Isolation { psi: 2, t: 1 };
        let e = Embedding::dense(scheme, vec![0.25, 0.75]);
        assert_eq!(mean_of_maps(std::slice::from_ref(&e)).unwrap(), e);
        let neg = Embedding::dense(scheme, vec![-0.25, -0.75]);
        let zero = mean_of_maps(&[e, neg]).unwrap();
        assert_eq!(zero.to_dense(), vec![0.0, 0.0]);
        assert!(mean_of_maps(&[]).is_err());
    }

    #[test]
    fn kernel_symmetry_exact() {
        let points = random_points(60, 12);
        let model = PartitioningModel::fit(&points, 8, 30, 13).unwrap();
        let a = traj("a", &[(0.1, 0.9), (0.4, 0.3), (0.8, 0.2)]);
        let b = traj("b", &[(0.6, 0.6), (0.2, 0.1)]);
        let ka = mean_map(&model, &a).unwrap();
        let kb = mean_map(&model, &b).unwrap();
        assert_eq!(distributional_kernel(&ka, &kb).unwrap(), distributional_kernel(&kb, &ka).unwrap());
        let k = distributional_kernel(&ka, &kb).unwrap();
        assert!((0.0..=1.0).contains(&k));
    }

    #[test]
    fn scheme_mismatch_rejected() {
        let a = Embedding::dense(Scheme::Isolation { psi: 2, t: 1 }, vec![1.0, 0.0]);
        let b = Embedding::dense(Scheme::Nystrom { components: 2, sigma: 1.0 }, vec![1.0, 0.0]);
        assert!(a.dot(&b).is_err());
    }

    #[test]
    fn kernel_matrix_is_positive_semidefinite() {
        // Gram matrices of explicit vectors must be PSD up to fp error;
        // checked with an eigendecomposition on the Figure-4 style set.
        let ds = crate::synth::gen_dense_sparse(40);
        let points = ds.concat_points();
        let model = PartitioningModel::fit(&points, 16, 50, 40).unwrap();
        let embedded = embed_dataset(&model, &ds).unwrap();
        let n = embedded.len();
        let mut gram = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let k = embedded.embeddings[i].dot(&embedded.embeddings[j]).unwrap();
                gram[(i, j)] = k;
                gram[(j, i)] = k;
            }
        }
        let eig = gram.symmetric_eigen();
        for &lambda in eig.eigenvalues.iter() {
            assert!(lambda > -1e-8, "negative eigenvalue {lambda}");
        }
    }

    #[test]
    fn binary_container_round_trips_bit_exactly() {
        let points = random_points(50, 31);
        let model = PartitioningModel::fit(&points, 8, 10, 6).unwrap();
        let a = traj("a", &[(0.1, 0.1), (0.2, 0.2), (0.35, 0.81)]);
        let b = traj("b", &[(0.9, 0.9)]);
        let ds = LabeledDataset::new(vec![a, b]).unwrap();
        let embedded = embed_dataset(&model, &ds).unwrap();
        let mut buf = Vec::new();
        embedded.save_binary(&mut buf).unwrap();
        let back = EmbeddedDataset::load_binary(buf.as_slice()).unwrap();
        assert_eq!(back.ids, embedded.ids);
        assert_eq!(back.scheme, embedded.scheme);
        for (x, y) in embedded.embeddings.iter().zip(&back.embeddings) {
            assert_eq!(x.to_dense(), y.to_dense());
        }
    }

    #[test]
    fn normalized_kernel_is_one_on_self() {
        let points = random_points(50, 14);
        let model = PartitioningModel::fit(&points, 8, 30, 15).unwrap();
        let a = traj("a", &[(0.1, 0.9), (0.4, 0.3), (0.8, 0.2)]);
        let ka = mean_map(&model, &a).unwrap();
        assert!((normalized_kernel(&ka, &ka).unwrap() - 1.0).abs() < 1e-12);
    }
}
