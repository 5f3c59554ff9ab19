//! Deterministic generators for the illustrative datasets used by the
//! tests, the benchmark harness, and the CLI `gen` subcommand.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Label, LabeledDataset, Point, Trajectory};

/// Generator selector, mirrored by the CLI `--kind` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    DenseSparse103,
    TranslatedTriple,
    SeparableSingleton,
    CrossStyle,
}

impl GeneratorKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "dense-sparse-103" => Ok(GeneratorKind::DenseSparse103),
            "translated-triple" => Ok(GeneratorKind::TranslatedTriple),
            "separable-singleton" => Ok(GeneratorKind::SeparableSingleton),
            "cross-style" => Ok(GeneratorKind::CrossStyle),
            other => Err(Error::Config(format!("unknown generator kind '{other}'"))),
        }
    }
}

const WAVE_POINTS: usize = 64;
const DENSE_SPACING: f64 = 1.6e-4;
/// Sparse-to-dense vertical spacing ratio; the wave amplitude scales with
/// the same ratio so the sparse cluster is the dense one magnified.
const SPACING_RATIO: f64 = 10.0;
const DENSE_AMPLITUDE: f64 = 0.35;
/// Vertical gap between X (#50) and X' (#51), and between Y' (#52) and Y
/// (#53).
const PAIR_GAP: f64 = 5.0 * DENSE_SPACING;
/// Top base line of the sparse cluster, low enough that the two clusters'
/// wave envelopes stay disjoint.
const SPARSE_TOP: f64 = -4.1;

/// One member of the wavy family: an enveloped sine burst on the left
/// quarter at the member's own phase, flat elsewhere (so the right-half
/// vertical gaps of the caption are exact), with a little vertical jitter.
/// Phases spread uniformly over the family, which keeps every member's
/// neighborhood structure identical.
fn wave_trajectory(
    id: String,
    base: f64,
    amplitude: f64,
    phase: f64,
    jitter: f64,
    straight: bool,
    rng: &mut ChaCha8Rng,
) -> Trajectory {
    let mut points = Vec::with_capacity(WAVE_POINTS);
    for i in 0..WAVE_POINTS {
        let x = (i as f64 + 0.5) / WAVE_POINTS as f64;
        let y = if straight {
            base
        } else {
            let wave = if x < 0.25 {
                let envelope = (4.0 * std::f64::consts::PI * x).sin();
                amplitude * envelope * (8.0 * std::f64::consts::PI * x + phase).sin()
            } else {
                0.0
            };
            base + wave + jitter * (2.0 * rng.random::<f64>() - 1.0)
        };
        points.push(Point::with_time(vec![x, y], i as f64));
    }
    Trajectory::new(id, points).expect("generated trajectory is valid")
}

/// 103 trajectories: a dense cluster of 50 wavy trajectories at the top
/// (indices 0..=50 minus #40), a sparse cluster of 50 wavy trajectories at
/// the bottom (#53..=#102) with 10x the vertical spacing and a 10x-scaled
/// wave, and three straight-line anomalies #40 (Z'), #51 (X') and #52
/// (Y'). On the flat right half the vertical gap between #50 and #51
/// equals the gap between #52 and #53.
pub fn gen_dense_sparse(seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sparse_spacing = DENSE_SPACING * SPACING_RATIO;
    let sparse_amplitude = DENSE_AMPLITUDE * SPACING_RATIO;
    let dense_bottom = -49.0 * DENSE_SPACING;
    let x_prime_y = dense_bottom - PAIR_GAP;
    let y_prime_y = SPARSE_TOP + PAIR_GAP;
    let phase = |row: usize| 2.0 * std::f64::consts::PI * row as f64 / 50.0;

    let mut trajectories = Vec::with_capacity(103);
    let mut labels = BTreeMap::new();
    for idx in 0..103usize {
        let id = idx.to_string();
        let (base, amplitude, phi, straight, jitter) = match idx {
            40 => {
                // Z': straight, embedded between dense rows 39 and 40.
                (-39.5 * DENSE_SPACING, 0.0, 0.0, true, 0.0)
            }
            51 => (x_prime_y, 0.0, 0.0, true, 0.0),
            52 => (y_prime_y, 0.0, 0.0, true, 0.0),
            i if i < 51 => {
                let row = if i < 40 { i } else { i - 1 };
                (
                    -(row as f64) * DENSE_SPACING,
                    DENSE_AMPLITUDE,
                    phase(row),
                    false,
                    0.01 * DENSE_SPACING,
                )
            }
            i => (
                SPARSE_TOP - ((i - 53) as f64) * sparse_spacing,
                sparse_amplitude,
                phase(i - 53),
                false,
                0.01 * sparse_spacing,
            ),
        };
        labels.insert(id.clone(), if straight { Label::Anomalous } else { Label::Normal });
        trajectories.push(wave_trajectory(id, base, amplitude, phi, jitter, straight, &mut rng));
    }
    let mut ds = LabeledDataset::new(trajectories).expect("generated dataset is valid");
    ds.set_labels(labels).expect("labels reference generated ids");
    ds
}

/// Three trajectories (X, X', Y): X is a fixed zig-zag, X' is X translated
/// vertically by 0.3, and Y lies between the two with the same horizontal
/// extent but a very different mass profile (most of its points bunch at
/// the left end), so point-to-point distances rank it at least as close to
/// X as X' is while the distributions differ.
///
/// The zig-zag vertices are spaced so that the nearest X' point to any X
/// point is its own translate, making hausdorff(X, X') exactly the
/// translation magnitude.
pub fn gen_translated_triple(_seed: u64) -> (Trajectory, Trajectory, Trajectory) {
    let amplitude = 0.1;
    let shift = 0.3;
    let make = |id: &str, offset: f64| {
        let points = (0..9)
            .map(|i| {
                let x = i as f64 * 0.5;
                let y = if i % 2 == 0 { 0.0 } else { amplitude };
                Point::with_time(vec![x, y + offset], i as f64)
            })
            .collect();
        Trajectory::new(id, points).unwrap()
    };
    let x = make("X", 0.0);
    let x_prime = make("X'", shift);
    let y_level = shift / 2.0;
    let mut y_xs = Vec::new();
    for i in 0..26 {
        y_xs.push(i as f64 * 0.016);
    }
    for i in 0..8 {
        y_xs.push(0.75 + i as f64 * 0.5);
    }
    y_xs.push(4.0);
    let y = Trajectory::new(
        "Y",
        y_xs.iter()
            .enumerate()
            .map(|(i, &x)| Point::with_time(vec![x, y_level], i as f64))
            .collect(),
    )
    .unwrap();
    (x, x_prime, y)
}

/// n-1 near-identical wavy trajectories plus one far-removed straight
/// trajectory labeled anomalous.
pub fn gen_separable_singleton(n: usize, seed: u64) -> Result<LabeledDataset> {
    if n < 2 {
        return Err(Error::parameter("separable-singleton needs n >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectories = Vec::with_capacity(n);
    let mut labels = BTreeMap::new();
    for i in 0..n - 1 {
        let id = format!("n{i}");
        labels.insert(id.clone(), Label::Normal);
        trajectories.push(wave_trajectory(id, 0.5, 0.05, 0.0, 0.01, false, &mut rng));
    }
    labels.insert("anom".to_string(), Label::Anomalous);
    trajectories.push(wave_trajectory("anom".to_string(), 5.0, 0.0, 0.0, 0.0, true, &mut rng));
    let mut ds = LabeledDataset::new(trajectories)?;
    ds.set_labels(labels)?;
    Ok(ds)
}

/// Cross-style options: fraction of trajectories placed off-corridor and
/// labeled anomalous.
#[derive(Debug, Clone, Copy)]
pub struct CrossStyleOptions {
    pub anomaly_fraction: f64,
}

impl Default for CrossStyleOptions {
    fn default() -> Self {
        CrossStyleOptions { anomaly_fraction: 0.02 }
    }
}

/// Trajectories along 19 straight corridors through a crossing region,
/// 4..=30 points each, cluster assignment = corridor (1..=19). A
/// configurable fraction runs parallel but clearly off its corridor and is
/// labeled anomalous.
pub fn gen_cross_style(n_traj: usize, seed: u64) -> Result<LabeledDataset> {
    gen_cross_style_with(n_traj, seed, CrossStyleOptions::default())
}

pub fn gen_cross_style_with(
    n_traj: usize,
    seed: u64,
    options: CrossStyleOptions,
) -> Result<LabeledDataset> {
    const CORRIDORS: usize = 19;
    if n_traj < CORRIDORS {
        return Err(Error::parameter(format!("cross-style needs at least {CORRIDORS} trajectories")));
    }
    if !(0.0..=0.5).contains(&options.anomaly_fraction) {
        return Err(Error::parameter("anomaly fraction must be in [0, 0.5]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n_traj.to_string().len();
    let mut trajectories = Vec::with_capacity(n_traj);
    let mut labels = BTreeMap::new();
    let mut clusters = BTreeMap::new();
    for j in 0..n_traj {
        let corridor = j % CORRIDORS;
        let id = format!("t{j:0width$}");
        let angle = std::f64::consts::PI * corridor as f64 / CORRIDORS as f64;
        let (ux, uy) = (angle.cos(), angle.sin());
        let len = rng.random_range(4..=30usize);
        let anomalous = rng.random::<f64>() < options.anomaly_fraction;
        // Normal traffic hugs the corridor line through the center; an
        // anomaly runs parallel at a clear perpendicular offset.
        let offset = if anomalous { 0.2 + 0.1 * rng.random::<f64>() } else { 0.0 };
        let offset_sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let forward = rng.random::<bool>();
        let mut points = Vec::with_capacity(len);
        for i in 0..len {
            let frac = i as f64 / (len - 1).max(1) as f64;
            let s = if forward { frac - 0.5 } else { 0.5 - frac };
            let jitter = 0.01 * (2.0 * rng.random::<f64>() - 1.0);
            let perp = offset * offset_sign + jitter;
            let x = 0.5 + s * ux - perp * uy;
            let y = 0.5 + s * uy + perp * ux;
            points.push(Point::with_time(vec![x, y], i as f64));
        }
        labels.insert(id.clone(), if anomalous { Label::Anomalous } else { Label::Normal });
        clusters.insert(id.clone(), corridor + 1);
        trajectories.push(Trajectory::new(id, points)?);
    }
    let mut ds = LabeledDataset::new(trajectories)?;
    ds.set_labels(labels)?;
    ds.set_clusters(clusters)?;
    Ok(ds)
}
