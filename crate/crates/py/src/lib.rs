//! Python bindings: datasets, kernel models, baseline distances, and the
//! three mining pipelines.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use trajdk::detect::{detect, DetectConfig, DetectorKind, Polarity, SchemeKind};
use trajdk::embedding::{mean_map_points, FeatureMap};
use trajdk::error::Error;
use trajdk::model::{self, Format, IngestOptions, Label, LabeledDataset, Point, Trajectory};
use trajdk::subtraj;
use trajdk::synth;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(inner) => PyIOError::new_err(inner.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn trajectory_from_coords(id: &str, coords: Vec<Vec<f64>>) -> PyResult<Trajectory> {
    let points = coords.into_iter().map(Point::new).collect();
    Trajectory::new(id, points).map_err(to_py_err)
}

/// A set of trajectories with optional labels and cluster assignments.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Dataset {
    inner: LabeledDataset,
}

#[pymethods]
impl Dataset {
    /// Build from (id, points) records; each point is a coordinate list.
    #[staticmethod]
    fn from_records(records: Vec<(String, Vec<Vec<f64>>)>) -> PyResult<Dataset> {
        let trajectories = records
            .into_iter()
            .map(|(id, coords)| trajectory_from_coords(&id, coords))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Dataset { inner: LabeledDataset::new(trajectories).map_err(to_py_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (path, format="csv"))]
    fn read(path: &str, format: &str) -> PyResult<Dataset> {
        let format = match format {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(PyValueError::new_err(format!("unknown format '{other}'"))),
        };
        let inner =
            model::load_dataset(path, format, &IngestOptions::default()).map_err(to_py_err)?;
        Ok(Dataset { inner })
    }

    #[pyo3(signature = (path, format="csv"))]
    fn write(&self, path: &str, format: &str) -> PyResult<()> {
        let format = match format {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(PyValueError::new_err(format!("unknown format '{other}'"))),
        };
        model::save_dataset(&self.inner, path, format).map_err(to_py_err)
    }

    fn ids(&self) -> Vec<String> {
        self.inner.trajectories().iter().map(|t| t.id.clone()).collect()
    }

    fn points(&self, id: &str) -> PyResult<Vec<Vec<f64>>> {
        let t = self
            .inner
            .trajectory(id)
            .ok_or_else(|| PyValueError::new_err(format!("no trajectory '{id}'")))?;
        Ok(t.points.iter().map(|p| p.coords.clone()).collect())
    }

    fn labels(&self) -> Option<BTreeMap<String, u8>> {
        self.inner
            .labels()
            .map(|l| l.iter().map(|(k, v)| (k.clone(), u8::from(*v == Label::Anomalous))).collect())
    }

    fn set_labels(&mut self, labels: BTreeMap<String, u8>) -> PyResult<()> {
        let mapped = labels
            .into_iter()
            .map(|(k, v)| (k, if v != 0 { Label::Anomalous } else { Label::Normal }))
            .collect();
        self.inner.set_labels(mapped).map_err(to_py_err)
    }

    fn clusters(&self) -> Option<BTreeMap<String, usize>> {
        self.inner.clusters().cloned()
    }

    fn set_clusters(&mut self, clusters: BTreeMap<String, usize>) -> PyResult<()> {
        self.inner.set_clusters(clusters).map_err(to_py_err)
    }

    #[pyo3(signature = (include_time=false))]
    fn normalize(&self, include_time: bool) -> PyResult<Dataset> {
        Ok(Dataset { inner: self.inner.normalize(include_time).map_err(to_py_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn total_points(&self) -> usize {
        self.inner.total_points()
    }
}

/// Isolation Kernel feature map fitted on a point sample.
#[pyclass]
struct IsolationModel {
    inner: trajdk::isolation::PartitioningModel,
}

#[pymethods]
impl IsolationModel {
    #[new]
    #[pyo3(signature = (points, psi=16, t=100, seed=0))]
    fn new(points: Vec<Vec<f64>>, psi: usize, t: usize, seed: u64) -> PyResult<Self> {
        Ok(IsolationModel {
            inner: trajdk::isolation::PartitioningModel::fit(&points, psi, t, seed)
                .map_err(to_py_err)?,
        })
    }

    fn embed_point(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.embed_point(&x).map_err(to_py_err)?.to_dense())
    }

    fn point_kernel(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.inner.point_kernel(&x, &y).map_err(to_py_err)
    }

    fn mean_map(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        Ok(mean_map_points(&self.inner, points.iter().map(|p| p.as_slice()))
            .map_err(to_py_err)?
            .to_dense())
    }

    /// Distributional kernel between two point sets.
    fn kernel(&self, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
        let ka = mean_map_points(&self.inner, a.iter().map(|p| p.as_slice())).map_err(to_py_err)?;
        let kb = mean_map_points(&self.inner, b.iter().map(|p| p.as_slice())).map_err(to_py_err)?;
        ka.dot(&kb).map_err(to_py_err)
    }

    fn feature_dim(&self) -> usize {
        self.inner.feature_dim()
    }
}

/// Nystrom approximation of the Gaussian kernel feature map.
#[pyclass]
struct NystromGaussianModel {
    inner: trajdk::nystrom::NystromModel,
}

#[pymethods]
impl NystromGaussianModel {
    #[new]
    #[pyo3(signature = (points, components=100, sigma=1.0, seed=0))]
    fn new(points: Vec<Vec<f64>>, components: usize, sigma: f64, seed: u64) -> PyResult<Self> {
        Ok(NystromGaussianModel {
            inner: trajdk::nystrom::NystromModel::fit(&points, components, sigma, seed)
                .map_err(to_py_err)?,
        })
    }

    fn embed_point(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.embed_point(&x).map_err(to_py_err)?.to_dense())
    }

    fn mean_map(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        Ok(mean_map_points(&self.inner, points.iter().map(|p| p.as_slice()))
            .map_err(to_py_err)?
            .to_dense())
    }

    fn kernel(&self, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
        let ka = mean_map_points(&self.inner, a.iter().map(|p| p.as_slice())).map_err(to_py_err)?;
        let kb = mean_map_points(&self.inner, b.iter().map(|p| p.as_slice())).map_err(to_py_err)?;
        ka.dot(&kb).map_err(to_py_err)
    }

    fn feature_dim(&self) -> usize {
        self.inner.feature_dim()
    }
}

fn pair(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<(Trajectory, Trajectory)> {
    Ok((trajectory_from_coords("a", a)?, trajectory_from_coords("b", b)?))
}

#[pyfunction]
fn dtw(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    let (a, b) = pair(a, b)?;
    trajdk::distances::dtw(&a, &b).map_err(to_py_err)
}

#[pyfunction]
fn hausdorff(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    let (a, b) = pair(a, b)?;
    trajdk::distances::hausdorff(&a, &b).map_err(to_py_err)
}

#[pyfunction]
fn frechet(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    let (a, b) = pair(a, b)?;
    trajdk::distances::frechet_discrete(&a, &b).map_err(to_py_err)
}

/// Rank trajectories by anomalousness; returns (id, score) pairs, most
/// anomalous first.
#[pyfunction]
#[pyo3(signature = (dataset, scheme="ik", detector="idk2", psi=16, t=100, sigma=1.0,
                    components=100, k=10, seed=0, psi2=None, t2=None, sigma2=None))]
#[allow(clippy::too_many_arguments)]
fn rank_anomalies(
    dataset: &Dataset,
    scheme: &str,
    detector: &str,
    psi: usize,
    t: usize,
    sigma: f64,
    components: usize,
    k: usize,
    seed: u64,
    psi2: Option<usize>,
    t2: Option<usize>,
    sigma2: Option<f64>,
) -> PyResult<Vec<(String, f64)>> {
    let config = DetectConfig {
        scheme: SchemeKind::parse(scheme).map_err(to_py_err)?,
        detector: DetectorKind::parse(detector).map_err(to_py_err)?,
        psi,
        t,
        sigma,
        components,
        psi2,
        t2,
        sigma2,
        components2: None,
        k,
        seed,
    };
    let outcome = detect(&dataset.inner, &config).map_err(to_py_err)?;
    Ok(outcome.ranking.ranked().map(|(id, score)| (id.to_string(), score)).collect())
}

/// ROC-AUC of (id, score) pairs against a {id: 0/1} label dict.
#[pyfunction]
#[pyo3(signature = (scores, labels, polarity="similarity"))]
fn roc_auc(scores: Vec<(String, f64)>, labels: BTreeMap<String, u8>, polarity: &str) -> PyResult<f64> {
    let polarity = match polarity {
        "similarity" => Polarity::Similarity,
        "anomaly" => Polarity::Anomaly,
        other => return Err(PyValueError::new_err(format!("unknown polarity '{other}'"))),
    };
    let (ids, values): (Vec<String>, Vec<f64>) = scores.into_iter().unzip();
    let ranking = trajdk::detect::AnomalyRanking::new(ids, values, polarity);
    let mapped = labels
        .into_iter()
        .map(|(k, v)| (k, if v != 0 { Label::Anomalous } else { Label::Normal }))
        .collect();
    trajdk::eval::roc_auc(&ranking, &mapped).map_err(to_py_err)
}

/// Maximal anomalous sub-trajectories of a query against a normal dataset.
/// Returns (spans, beta) with 1-based inclusive spans.
#[pyfunction]
#[pyo3(signature = (normals, query, psi=16, t=100, tau=0.0, min_len=3, seed=0))]
fn detect_subtrajectories(
    normals: &Dataset,
    query: Vec<Vec<f64>>,
    psi: usize,
    t: usize,
    tau: f64,
    min_len: usize,
    seed: u64,
) -> PyResult<SpanReport> {
    let query = trajectory_from_coords("query", query)?;
    let report = subtraj::detect_subtraj(&normals.inner, &query, psi, t, tau, min_len, seed)
        .map_err(to_py_err)?;
    Ok((report.spans.iter().map(|s| (s.start, s.end)).collect(), report.beta))
}

/// (spans, per-point scores) returned by [`detect_subtrajectories`].
type SpanReport = (Vec<(usize, usize)>, Vec<f64>);

/// (cluster, representative id, spans, lengths) rows returned by
/// [`mine_patterns`].
type PatternRow = (usize, String, Vec<(usize, usize)>, Vec<f64>);

/// Frequent sub-trajectory patterns of a clustered dataset: a list of
/// (cluster, representative_id, spans, lengths).
#[pyfunction]
#[pyo3(signature = (dataset, psi=16, t=100, gamma=0.01, min_len=3, seed=0))]
fn mine_patterns(
    dataset: &Dataset,
    psi: usize,
    t: usize,
    gamma: f64,
    min_len: usize,
    seed: u64,
) -> PyResult<Vec<PatternRow>> {
    let set = trajdk::patterns::mine_patterns(&dataset.inner, psi, t, gamma, min_len, seed)
        .map_err(to_py_err)?;
    Ok(set
        .clusters
        .into_iter()
        .map(|c| {
            (
                c.cluster,
                c.representative_id,
                c.spans.iter().map(|s| (s.start, s.end)).collect(),
                c.lengths,
            )
        })
        .collect())
}

#[pyfunction]
fn gen_dense_sparse(seed: u64) -> Dataset {
    Dataset { inner: synth::gen_dense_sparse(seed) }
}

#[pyfunction]
fn gen_separable_singleton(n: usize, seed: u64) -> PyResult<Dataset> {
    Ok(Dataset { inner: synth::gen_separable_singleton(n, seed).map_err(to_py_err)? })
}

#[pyfunction]
#[pyo3(signature = (n, seed, anomaly_fraction=0.02))]
fn gen_cross_style(n: usize, seed: u64, anomaly_fraction: f64) -> PyResult<Dataset> {
    Ok(Dataset {
        inner: synth::gen_cross_style_with(
            n,
            seed,
            synth::CrossStyleOptions { anomaly_fraction },
        )
        .map_err(to_py_err)?,
    })
}

#[pymodule]
fn trajdk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<IsolationModel>()?;
    m.add_class::<NystromGaussianModel>()?;
    m.add_function(wrap_pyfunction!(dtw, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(frechet, m)?)?;
    m.add_function(wrap_pyfunction!(rank_anomalies, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(detect_subtrajectories, m)?)?;
    m.add_function(wrap_pyfunction!(mine_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dense_sparse, m)?)?;
    m.add_function(wrap_pyfunction!(gen_separable_singleton, m)?)?;
    m.add_function(wrap_pyfunction!(gen_cross_style, m)?)?;
    Ok(())
}
