//! Trajectory data model: points, trajectories, labeled datasets, and the
//! CSV/JSON ingestion and serialization they travel through.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in `d`-dimensional space, with an optional source timestamp in
/// seconds. All coordinates must be finite; `d` is constant within a
/// dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
    pub time: Option<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords, time: None }
    }

    pub fn with_time(coords: Vec<f64>, time: f64) -> Self {
        Point { coords, time: Some(time) }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn validate(&self) -> Result<()> {
        if self.coords.is_empty() {
            return Err(Error::validation("point has no coordinates"));
        }
        for &c in &self.coords {
            if !c.is_finite() {
                return Err(Error::validation(format!("non-finite coordinate {c}")));
            }
        }
        if let Some(t) = self.time {
            if !t.is_finite() {
                return Err(Error::validation(format!("non-finite timestamp {t}")));
            }
        }
        Ok(())
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// An ordered sequence of at least one point recorded for one moving agent.
/// When timestamps are present they are non-decreasing along the sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    pub points: Vec<Point>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let traj = Trajectory { id: id.into(), points };
        traj.validate()?;
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Point::dim)
    }

    fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::validation(format!("trajectory '{}' has no points", self.id)));
        }
        let d = self.points[0].dim();
        let mut last_time = f64::NEG_INFINITY;
        for p in &self.points {
            p.validate()?;
            if p.dim() != d {
                return Err(Error::validation(format!(
                    "trajectory '{}' mixes dimensionalities {} and {}",
                    self.id,
                    d,
                    p.dim()
                )));
            }
            if let Some(t) = p.time {
                if t < last_time {
                    return Err(Error::validation(format!(
                        "trajectory '{}' has decreasing timestamps",
                        self.id
                    )));
                }
                last_time = t;
            }
        }
        Ok(())
    }
}

/// A contiguous run of points within one trajectory, with 1-based inclusive
/// bounds `1 <= start <= end <= len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubTrajectorySpan {
    pub trajectory_id: String,
    pub start: usize,
    pub end: usize,
}

impl SubTrajectorySpan {
    pub fn new(trajectory_id: impl Into<String>, start: usize, end: usize) -> Result<Self> {
        if start == 0 || start > end {
            return Err(Error::validation(format!("invalid span [{start}, {end}]")));
        }
        Ok(SubTrajectorySpan { trajectory_id: trajectory_id.into(), start, end })
    }

    /// Number of points covered by the span.
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 0-based point indices covered by the span.
    pub fn indices(&self) -> impl Iterator<Item = usize> {
        (self.start - 1)..self.end
    }
}

/// Binary anomaly label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Normal,
    Anomalous,
}

/// A set of trajectories plus optional anomaly labels, optional cluster
/// assignments (1..=k), and the per-dimension (min, max) record written by
/// [`LabeledDataset::normalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    trajectories: Vec<Trajectory>,
    labels: Option<BTreeMap<String, Label>>,
    clusters: Option<BTreeMap<String, usize>>,
    normalization: Option<Vec<(f64, f64)>>,
}

impl LabeledDataset {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let ds = LabeledDataset { trajectories, labels: None, clusters: None, normalization: None };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut dim = None;
        for t in &self.trajectories {
            t.validate()?;
            if !seen.insert(t.id.as_str()) {
                return Err(Error::validation(format!("duplicate trajectory id '{}'", t.id)));
            }
            match dim {
                None => dim = Some(t.dim()),
                Some(d) if d != t.dim() => {
                    return Err(Error::validation(format!(
                        "trajectory '{}' has dimension {}, dataset has {}",
                        t.id,
                        t.dim(),
                        d
                    )))
                }
                _ => {}
            }
        }
        if let Some(clusters) = &self.clusters {
            for t in &self.trajectories {
                if !clusters.contains_key(&t.id) {
                    return Err(Error::validation(format!("trajectory '{}' has no cluster", t.id)));
                }
            }
        }
        if let (Some(record), Some(d)) = (&self.normalization, dim) {
            if record.len() != d {
                return Err(Error::validation(format!(
                    "normalization record has {} entries for dimension {}",
                    record.len(),
                    d
                )));
            }
        }
        Ok(())
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.trajectories.first().map_or(0, Trajectory::dim)
    }

    pub fn trajectory(&self, id: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.id == id)
    }

    pub fn labels(&self) -> Option<&BTreeMap<String, Label>> {
        self.labels.as_ref()
    }

    pub fn clusters(&self) -> Option<&BTreeMap<String, usize>> {
        self.clusters.as_ref()
    }

    pub fn normalization(&self) -> Option<&[(f64, f64)]> {
        self.normalization.as_deref()
    }

    pub fn set_labels(&mut self, labels: BTreeMap<String, Label>) -> Result<()> {
        for id in labels.keys() {
            if self.trajectory(id).is_none() {
                return Err(Error::validation(format!("label for unknown trajectory '{id}'")));
            }
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn set_clusters(&mut self, clusters: BTreeMap<String, usize>) -> Result<()> {
        for t in &self.trajectories {
            match clusters.get(&t.id) {
                None => return Err(Error::validation(format!("trajectory '{}' has no cluster", t.id))),
                Some(0) => return Err(Error::validation("cluster indices start at 1".to_string())),
                Some(_) => {}
            }
        }
        self.clusters = Some(clusters);
        Ok(())
    }

    /// All points of all trajectories in a stable order: trajectory order,
    /// then point order.
    pub fn concat_points(&self) -> Vec<Point> {
        self.trajectories.iter().flat_map(|t| t.points.iter().cloned()).collect()
    }

    /// Total point count over all trajectories.
    pub fn total_points(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    /// Min-max scale every coordinate dimension to [0, 1] over all points of
    /// all trajectories, recording the per-dimension (min, max) used. A
    /// degenerate dimension (max == min) maps to the constant 0.5.
    ///
    /// With `include_time` set, the timestamp becomes an extra trailing
    /// coordinate dimension before scaling (and is removed from the
    /// per-point `time` field).
    pub fn normalize(&self, include_time: bool) -> Result<LabeledDataset> {
        if self.trajectories.is_empty() {
            return Err(Error::validation("cannot normalize an empty dataset"));
        }
        let mut trajectories = self.trajectories.clone();
        if include_time {
            for t in &mut trajectories {
                for p in &mut t.points {
                    let time = p.time.take().ok_or_else(|| {
                        Error::validation(format!(
                            "trajectory '{}' lacks timestamps; cannot include time as a dimension",
                            t.id
                        ))
                    })?;
                    p.coords.push(time);
                }
            }
        }
        let d = trajectories[0].dim();
        let mut record = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
        for t in &trajectories {
            for p in &t.points {
                for (r, &c) in record.iter_mut().zip(&p.coords) {
                    r.0 = r.0.min(c);
                    r.1 = r.1.max(c);
                }
            }
        }
        for t in &mut trajectories {
            for p in &mut t.points {
                for (c, &(lo, hi)) in p.coords.iter_mut().zip(&record) {
                    *c = if hi > lo { (*c - lo) / (hi - lo) } else { 0.5 };
                }
            }
        }
        let out = LabeledDataset {
            trajectories,
            labels: self.labels.clone(),
            clusters: self.clusters.clone(),
            normalization: Some(record),
        };
        out.validate()?;
        Ok(out)
    }

    /// Invert [`normalize`](Self::normalize) using the stored record. Only
    /// meaningful on a dataset that carries a normalization record.
    pub fn denormalize(&self) -> Result<LabeledDataset> {
        let record = self
            .normalization
            .as_ref()
            .ok_or_else(|| Error::validation("dataset has no normalization record"))?
            .clone();
        let mut trajectories = self.trajectories.clone();
        for t in &mut trajectories {
            for p in &mut t.points {
                for (c, &(lo, hi)) in p.coords.iter_mut().zip(&record) {
                    *c = if hi > lo { lo + *c * (hi - lo) } else { lo };
                }
            }
        }
        Ok(LabeledDataset {
            trajectories,
            labels: self.labels.clone(),
            clusters: self.clusters.clone(),
            normalization: None,
        })
    }
}

/// How the time column is located during CSV ingestion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum TimeColumn {
    /// Use a column named `t` when the header has one, otherwise file order.
    #[default]
    Auto,
    /// Ignore any time column; point order is file order.
    None,
    /// Use the named column; error when missing.
    Named(String),
}

/// Column mapping and parsing options for [`load_csv`] / [`load_json`].
#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub id_column: String,
    pub time_column: TimeColumn,
    /// Explicit coordinate columns in order; `None` means every column that
    /// is not the id or time column, in header order.
    pub coord_columns: Option<Vec<String>>,
    /// Whether JSON point arrays carry the timestamp as their first element.
    pub json_time_first: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            id_column: "id".to_string(),
            time_column: TimeColumn::Auto,
            coord_columns: None,
            json_time_first: true,
        }
    }
}

/// Dataset file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Load a dataset from `path`, grouping rows by trajectory id and ordering
/// points by timestamp (stable within ties) or by file order when no time
/// column applies.
pub fn load_dataset(path: impl AsRef<Path>, format: Format, options: &IngestOptions) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path)?;
    match format {
        Format::Csv => load_csv(file, options),
        Format::Json => load_json(file, options),
    }
}

pub fn load_csv(reader: impl Read, options: &IngestOptions) -> Result<LabeledDataset> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::format(1, e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let id_idx = find(&options.id_column)
        .ok_or_else(|| Error::format(1, format!("missing id column '{}'", options.id_column)))?;
    let time_idx = match &options.time_column {
        TimeColumn::Auto => find("t"),
        TimeColumn::None => None,
        TimeColumn::Named(name) => Some(
            find(name).ok_or_else(|| Error::format(1, format!("missing time column '{name}'")))?,
        ),
    };
    let coord_idx: Vec<usize> = match &options.coord_columns {
        Some(cols) => cols
            .iter()
            .map(|c| find(c).ok_or_else(|| Error::format(1, format!("missing coordinate column '{c}'"))))
            .collect::<Result<_>>()?,
        None => (0..headers.len())
            .filter(|&i| i != id_idx && Some(i) != time_idx)
            .collect(),
    };
    if coord_idx.is_empty() {
        return Err(Error::format(1, "no coordinate columns"));
    }

    // id -> (first-seen order, points in file order)
    let mut groups: Vec<(String, Vec<Point>)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (row, record) in csv_reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::format(line, e.to_string()))?;
        let id = record
            .get(id_idx)
            .ok_or_else(|| Error::format(line, "missing id field"))?
            .to_string();
        let parse = |i: usize| -> Result<f64> {
            let raw = record.get(i).ok_or_else(|| Error::format(line, "missing field"))?;
            raw.trim()
                .parse::<f64>()
                .map_err(|_| Error::format(line, format!("cannot parse '{raw}' as a number")))
        };
        let coords: Vec<f64> = coord_idx.iter().map(|&i| parse(i)).collect::<Result<_>>()?;
        for &c in &coords {
            if !c.is_finite() {
                return Err(Error::validation(format!("non-finite coordinate at line {line}")));
            }
        }
        let time = match time_idx {
            Some(i) => {
                let t = parse(i)?;
                if !t.is_finite() {
                    return Err(Error::validation(format!("non-finite timestamp at line {line}")));
                }
                Some(t)
            }
            None => None,
        };
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            groups.push((id.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(Point { coords, time });
    }

    let mut trajectories = Vec::with_capacity(groups.len());
    for (id, mut points) in groups {
        // Stable: equal timestamps keep file order.
        if time_idx.is_some() {
            points.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
        }
        trajectories.push(Trajectory { id, points });
    }
    LabeledDataset::new(trajectories)
}

#[derive(Serialize, Deserialize)]
struct JsonTrajectory {
    id: String,
    points: Vec<Vec<f64>>,
}

pub fn load_json(reader: impl Read, options: &IngestOptions) -> Result<LabeledDataset> {
    let raw: Vec<JsonTrajectory> =
        serde_json::from_reader(reader).map_err(|e| Error::format(e.line(), e.to_string()))?;
    let mut trajectories = Vec::with_capacity(raw.len());
    for jt in raw {
        let mut points = Vec::with_capacity(jt.points.len());
        for values in jt.points {
            let point = if options.json_time_first {
                if values.len() < 2 {
                    return Err(Error::validation(format!(
                        "trajectory '{}': point needs a timestamp and at least one coordinate",
                        jt.id
                    )));
                }
                Point { coords: values[1..].to_vec(), time: Some(values[0]) }
            } else {
                Point { coords: values, time: None }
            };
            point.validate()?;
            points.push(point);
        }
        if matches!(options.time_column, TimeColumn::Auto | TimeColumn::Named(_)) && options.json_time_first {
            points.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
        }
        trajectories.push(Trajectory { id: jt.id, points });
    }
    LabeledDataset::new(trajectories)
}

/// Names for coordinate columns on CSV export: x, y, z, then c3, c4, ...
fn coord_name(i: usize) -> String {
    match i {
        0 => "x".to_string(),
        1 => "y".to_string(),
        2 => "z".to_string(),
        _ => format!("c{i}"),
    }
}

pub fn save_dataset(dataset: &LabeledDataset, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let file = std::fs::File::create(path)?;
    match format {
        Format::Csv => save_csv(dataset, file),
        Format::Json => save_json(dataset, file),
    }
}

pub fn save_csv(dataset: &LabeledDataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = dataset.dim();
    let has_time = dataset
        .trajectories()
        .iter()
        .any(|t| t.points.iter().any(|p| p.time.is_some()));
    let mut header = vec!["id".to_string()];
    if has_time {
        header.push("t".to_string());
    }
    header.extend((0..d).map(coord_name));
    w.write_record(&header)?;
    for t in dataset.trajectories() {
        for p in &t.points {
            let mut row = vec![t.id.clone()];
            if has_time {
                row.push(p.time.map_or_else(String::new, |v| format!("{v}")));
            }
            row.extend(p.coords.iter().map(|c| format!("{c}")));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_json(dataset: &LabeledDataset, writer: impl Write) -> Result<()> {
    let has_time = dataset
        .trajectories()
        .iter()
        .any(|t| t.points.iter().any(|p| p.time.is_some()));
    let raw: Vec<JsonTrajectory> = dataset
        .trajectories()
        .iter()
        .map(|t| JsonTrajectory {
            id: t.id.clone(),
            points: t
                .points
                .iter()
                .map(|p| {
                    let mut values = Vec::with_capacity(p.dim() + 1);
                    if has_time {
                        values.push(p.time.unwrap_or(0.0));
                    }
                    values.extend_from_slice(&p.coords);
                    values
                })
                .collect(),
        })
        .collect();
    serde_json::to_writer(writer, &raw).map_err(|e| Error::Io(e.into()))?;
    Ok(())
}

/// Load a label file: CSV with columns (id, label), label in {0, 1}.
pub fn load_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, Label>> {
    let file = std::fs::File::open(path)?;
    read_labels(file)
}

pub fn read_labels(reader: impl Read) -> Result<BTreeMap<String, Label>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut labels = BTreeMap::new();
    for (row, record) in csv_reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::format(line, e.to_string()))?;
        let id = record.get(0).ok_or_else(|| Error::format(line, "missing id"))?.to_string();
        let raw = record.get(1).ok_or_else(|| Error::format(line, "missing label"))?.trim();
        let label = match raw {
            "0" => Label::Normal,
            "1" => Label::Anomalous,
            other => return Err(Error::format(line, format!("label must be 0 or 1, got '{other}'"))),
        };
        labels.insert(id, label);
    }
    Ok(labels)
}

pub fn save_labels(labels: &BTreeMap<String, Label>, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "label"])?;
    for (id, label) in labels {
        let v = if *label == Label::Anomalous { "1" } else { "0" };
        w.write_record([id.as_str(), v])?;
    }
    w.flush()?;
    Ok(())
}

/// Load a cluster file: CSV with columns (id, cluster), cluster in 1..=k.
pub fn load_clusters(path: impl AsRef<Path>) -> Result<BTreeMap<String, usize>> {
    let file = std::fs::File::open(path)?;
    read_clusters(file)
}

pub fn read_clusters(reader: impl Read) -> Result<BTreeMap<String, usize>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut clusters = BTreeMap::new();
    for (row, record) in csv_reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::format(line, e.to_string()))?;
        let id = record.get(0).ok_or_else(|| Error::format(line, "missing id"))?.to_string();
        let raw = record.get(1).ok_or_else(|| Error::format(line, "missing cluster"))?.trim();
        let cluster: usize = raw
            .parse()
            .map_err(|_| Error::format(line, format!("cannot parse cluster '{raw}'")))?;
        if cluster == 0 {
            return Err(Error::format(line, "cluster indices start at 1"));
        }
        clusters.insert(id, cluster);
    }
    Ok(clusters)
}

pub fn save_clusters(clusters: &BTreeMap<String, usize>, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "cluster"])?;
    for (id, cluster) in clusters {
        w.write_record([id.as_str(), cluster.to_string().as_str()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64, y: f64) -> Point {
        Point::new(vec![x, y])
    }

    #[test]
    fn load_minimal_csv() {
        let csv = "id,t,x,y\na,0,0,0\na,1,1,0\n";
        let ds = load_csv(csv.as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.trajectories()[0].len(), 2);
        assert_eq!(ds.trajectories()[0].points[1].coords, vec![1.0, 0.0]);
        assert_eq!(ds.trajectories()[0].points[1].time, Some(1.0));
    }

    #[test]
    fn load_rejects_nan() {
        let csv = "id,t,x,y\na,0,NaN,0\n";
        let err = load_csv(csv.as_bytes(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn load_reports_parse_failures_with_line() {
        let csv = "id,t,x,y\na,0,0,0\na,1,oops,0\n";
        let err = load_csv(csv.as_bytes(), &IngestOptions::default()).unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn load_rejects_inconsistent_dimensionality() {
        // Second trajectory has an empty y field -> parse failure; use
        // explicit columns to build a 1-d vs 2-d mix instead.
        let a = Trajectory::new("a", vec![point(0.0, 0.0)]).unwrap();
        let b = Trajectory::new("b", vec![Point::new(vec![1.0])]).unwrap();
        let err = LabeledDataset::new(vec![a, b]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn cross_style_layout_counts_per_id() {
        // Independent oracle: count lines per id directly.
        let mut rows = Vec::new();
        let counts = [("v1", 5usize), ("v2", 3), ("v3", 7)];
        for (id, n) in counts {
            for f in 0..n {
                rows.push(format!("{id},{f},{}.5,{}.25", f, f * 2));
            }
        }
        let csv = format!("id,frame,x,y\n{}\n", rows.join("\n"));
        let expected: BTreeMap<&str, usize> = counts.iter().cloned().collect();

        let options = IngestOptions {
            time_column: TimeColumn::Named("frame".to_string()),
            ..IngestOptions::default()
        };
        let ds = load_csv(csv.as_bytes(), &options).unwrap();
        assert_eq!(ds.len(), 3);
        for t in ds.trajectories() {
            assert_eq!(t.len(), expected[t.id.as_str()], "id {}", t.id);
            assert_eq!(t.dim(), 2);
        }
    }

    #[test]
    fn timestamps_sorted_stable() {
        let csv = "id,t,x,y\na,2,2,0\na,1,1,0\na,1,9,0\na,0,0,0\n";
        let ds = load_csv(csv.as_bytes(), &IngestOptions::default()).unwrap();
        let xs: Vec<f64> = ds.trajectories()[0].points.iter().map(|p| p.coords[0]).collect();
        assert_eq!(xs, vec![0.0, 1.0, 9.0, 2.0]);
    }

    #[test]
    fn normalize_two_points() {
        let t = Trajectory::new("a", vec![point(0.0, 0.0), point(2.0, 4.0)]).unwrap();
        let ds = LabeledDataset::new(vec![t]).unwrap();
        let norm = ds.normalize(false).unwrap();
        let pts = &norm.trajectories()[0].points;
        assert_eq!(pts[0].coords, vec![0.0, 0.0]);
        assert_eq!(pts[1].coords, vec![1.0, 1.0]);
        assert_eq!(norm.normalization().unwrap(), &[(0.0, 2.0), (0.0, 4.0)]);
    }

    #[test]
    fn normalize_degenerate_dimension() {
        let t = Trajectory::new("a", vec![point(3.0, 7.0), point(3.0, 7.0)]).unwrap();
        let ds = LabeledDataset::new(vec![t]).unwrap();
        let norm = ds.normalize(false).unwrap();
        for p in &norm.trajectories()[0].points {
            assert_eq!(p.coords, vec![0.5, 0.5]);
        }
    }

    #[test]
    fn normalize_round_trip_recovers_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut trajectories = Vec::new();
        for i in 0..10 {
            let points: Vec<Point> = (0..5)
                .map(|_| point(rng.random_range(-50.0..50.0), rng.random_range(-5.0..5.0)))
                .collect();
            trajectories.push(Trajectory::new(format!("t{i}"), points).unwrap());
        }
        let ds = LabeledDataset::new(trajectories).unwrap();
        let norm = ds.normalize(false).unwrap();
        for t in norm.trajectories() {
            for p in &t.points {
                for &c in &p.coords {
                    assert!((0.0..=1.0).contains(&c));
                }
            }
        }
        let back = norm.denormalize().unwrap();
        for (orig, rec) in ds.trajectories().iter().zip(back.trajectories()) {
            for (po, pr) in orig.points.iter().zip(&rec.points) {
                for (a, b) in po.coords.iter().zip(&pr.coords) {
                    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn normalize_idempotent() {
        let t = Trajectory::new("a", vec![point(1.0, 2.0), point(5.0, 3.0), point(2.0, 9.0)]).unwrap();
        let ds = LabeledDataset::new(vec![t]).unwrap();
        let once = ds.normalize(false).unwrap();
        let twice = once.normalize(false).unwrap();
        for (a, b) in once.trajectories().iter().zip(twice.trajectories()) {
            for (pa, pb) in a.points.iter().zip(&b.points) {
                for (ca, cb) in pa.coords.iter().zip(&pb.coords) {
                    assert!((ca - cb).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn normalize_with_time_dimension() {
        let t = Trajectory::new(
            "a",
            vec![Point::with_time(vec![0.0, 0.0], 0.0), Point::with_time(vec![2.0, 4.0], 10.0)],
        )
        .unwrap();
        let ds = LabeledDataset::new(vec![t]).unwrap();
        let norm = ds.normalize(true).unwrap();
        assert_eq!(norm.dim(), 3);
        assert_eq!(norm.trajectories()[0].points[1].coords, vec![1.0, 1.0, 1.0]);
        assert_eq!(norm.trajectories()[0].points[0].time, None);
    }

    #[test]
    fn concat_points_counts() {
        let a = Trajectory::new("a", (0..3).map(|i| point(i as f64, 0.0)).collect()).unwrap();
        let b = Trajectory::new("b", (0..4).map(|i| point(i as f64, 1.0)).collect()).unwrap();
        let ds = LabeledDataset::new(vec![a, b]).unwrap();
        assert_eq!(ds.concat_points().len(), 7);
        assert_eq!(ds.total_points(), 7);
    }

    #[test]
    fn concat_points_sum_matches_lengths() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut trajectories = Vec::new();
        let mut total = 0usize;
        for i in 0..10 {
            let len = rng.random_range(4..=30);
            total += len;
            let points = (0..len).map(|j| point(j as f64, i as f64)).collect();
            trajectories.push(Trajectory::new(format!("t{i}"), points).unwrap());
        }
        let ds = LabeledDataset::new(trajectories).unwrap();
        assert_eq!(ds.concat_points().len(), total);
    }

    #[test]
    fn csv_round_trip_identical() {
        let t1 = Trajectory::new(
            "a",
            vec![Point::with_time(vec![0.125, -3.5], 0.0), Point::with_time(vec![1.0 / 3.0, 2.7], 1.5)],
        )
        .unwrap();
        let t2 = Trajectory::new("b", vec![Point::with_time(vec![9.25, 0.001], 4.0)]).unwrap();
        let ds = LabeledDataset::new(vec![t1, t2]).unwrap();
        let mut buf = Vec::new();
        save_csv(&ds, &mut buf).unwrap();
        let back = load_csv(buf.as_slice(), &IngestOptions::default()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn json_round_trip_identical() {
        let t1 = Trajectory::new(
            "a",
            vec![Point::with_time(vec![0.1, 0.2], 0.0), Point::with_time(vec![0.3, 0.4], 1.0)],
        )
        .unwrap();
        let ds = LabeledDataset::new(vec![t1]).unwrap();
        let mut buf = Vec::new();
        save_json(&ds, &mut buf).unwrap();
        let back = load_json(buf.as_slice(), &IngestOptions::default()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn json_without_time() {
        let options = IngestOptions { json_time_first: false, ..IngestOptions::default() };
        let ds = load_json(r#"[{"id":"a","points":[[0.5,1.5],[2.5,3.5]]}]"#.as_bytes(), &options).unwrap();
        assert_eq!(ds.trajectories()[0].points[0].coords, vec![0.5, 1.5]);
        assert_eq!(ds.trajectories()[0].points[0].time, None);
        let mut buf = Vec::new();
        save_json(&ds, &mut buf).unwrap();
        let back = load_json(buf.as_slice(), &options).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = Trajectory::new("a", vec![point(0.0, 0.0)]).unwrap();
        let b = Trajectory::new("a", vec![point(1.0, 1.0)]).unwrap();
        assert!(LabeledDataset::new(vec![a, b]).is_err());
    }

    #[test]
    fn decreasing_timestamps_rejected() {
        let err = Trajectory::new(
            "a",
            vec![Point::with_time(vec![0.0, 0.0], 5.0), Point::with_time(vec![1.0, 0.0], 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn labels_round_trip() {
        let mut labels = BTreeMap::new();
        labels.insert("a".to_string(), Label::Normal);
        labels.insert("b".to_string(), Label::Anomalous);
        let mut buf = Vec::new();
        save_labels(&labels, &mut buf).unwrap();
        assert_eq!(read_labels(buf.as_slice()).unwrap(), labels);
    }

    #[test]
    fn clusters_round_trip_and_validation() {
        let mut clusters = BTreeMap::new();
        clusters.insert("a".to_string(), 1usize);
        clusters.insert("b".to_string(), 2usize);
        let mut buf = Vec::new();
        save_clusters(&clusters, &mut buf).unwrap();
        assert_eq!(read_clusters(buf.as_slice()).unwrap(), clusters);
        assert!(read_clusters("id,cluster\na,0\n".as_bytes()).is_err());
    }
}
