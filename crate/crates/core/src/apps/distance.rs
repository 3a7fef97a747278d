use rayon::prelude::*;

use crate::curve::{project_closed, srv_transform, Domain, SrvCurve};
use crate::error::{Error, Result};
use crate::geodesic::closed_distance;
use crate::mocap::{clip_to_curve, resample_clip, wrap_angle, AnimationClip};
use crate::shape::{align_given, ShapeOptions};

/// How two clips are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// L² norm of the wrapped angle differences over normalized time.
    LinearL2,
    /// Path-straightening distance between the closed projections.
    GeodesicClosed,
    /// Shape-space distance between the closed projections.
    GeodesicShape,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::LinearL2 => "linear-l2",
            Metric::GeodesicClosed => "geodesic-closed",
            Metric::GeodesicShape => "geodesic-shape",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear-l2" => Ok(Metric::LinearL2),
            "geodesic-closed" => Ok(Metric::GeodesicClosed),
            "geodesic-shape" => Ok(Metric::GeodesicShape),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

/// A labelled, symmetric, zero-diagonal matrix of non-negative distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    /// Validates and wraps a row-major `n × n` matrix.
    pub fn new(labels: Vec<String>, values: Vec<f64>, metric: Metric) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::InvalidMatrix("need at least 2 labels".into()));
        }
        if values.len() != n * n {
            return Err(Error::InvalidMatrix(format!("{} values for {n} labels", values.len())));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {v} is not a finite non-negative number"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidMatrix(format!("asymmetric entries at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { labels, values, metric })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV whose first row and column hold the labels; the top-left cell
    /// holds the metric tag.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        let mut header = vec![self.metric.as_str().to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend((0..self.len()).map(|j| self.get(i, j).to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(text.as_bytes());
        let mut rows = r.records();
        let header = rows
            .next()
            .ok_or_else(|| Error::InvalidMatrix("empty file".into()))?
            .map_err(|e| Error::Format(e.to_string()))?;
        let metric: Metric = header.get(0).unwrap_or_default().parse()?;
        let labels: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let n = labels.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.enumerate() {
            let row = row.map_err(|e| Error::InvalidMatrix(e.to_string()))?;
            if row.len() != n + 1 {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    n + 1
                )));
            }
            if row.get(0) != Some(labels.get(i).map(String::as_str).unwrap_or("")) {
                return Err(Error::InvalidMatrix(format!(
                    "row {} label does not match the header",
                    i + 1
                )));
            }
            for cell in row.iter().skip(1) {
                values.push(
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidMatrix(format!("cannot parse `{cell}` in row {}", i + 1)))?,
                );
            }
        }
        Self::new(labels, values, metric)
    }
}

/// Parameters of [`distance_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixOptions {
    pub metric: Metric,
    /// Every clip is resampled to this many frames.
    pub common_frames: usize,
    pub shape: ShapeOptions,
    /// Drop clips whose closed projection fails instead of aborting.
    pub exclude_failures: bool,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            metric: Metric::GeodesicShape,
            common_frames: 128,
            shape: ShapeOptions::default(),
            exclude_failures: false,
        }
    }
}

/// A distance matrix plus the clips left out of it.
#[derive(Debug, Clone)]
pub struct MatrixResult {
    pub matrix: DistanceMatrix,
    /// `(label, reason)` for each excluded clip.
    pub excluded: Vec<(String, String)>,
}

/// `sqrt(∫₀¹ ‖wrap(a(u) - b(u))‖² du)` by the trapezoid rule over frames.
pub fn linear_distance(a: &AnimationClip, b: &AnimationClip) -> Result<f64> {
    if a.frame_count() != b.frame_count() || a.dof() != b.dof() {
        return Err(Error::ShapeMismatch(
            "clips differ in frame count or degrees of freedom".into(),
        ));
    }
    let m = a.frame_count();
    let du = 1.0 / (m - 1) as f64;
    let sum: f64 = a
        .frames()
        .iter()
        .zip(b.frames())
        .enumerate()
        .map(|(i, (x, y))| {
            let w = if i == 0 || i == m - 1 { 0.5 * du } else { du };
            w * x.iter().zip(y).map(|(p, q)| wrap_angle(p - q).powi(2)).sum::<f64>()
        })
        .sum();
    Ok(sum.sqrt())
}

/// SRV of a clip on the unit time interval, projected onto the closed-curve
/// manifold.
pub fn closed_srv(clip: &AnimationClip, opts: &ShapeOptions) -> Result<SrvCurve> {
    let srv = srv_transform(&clip_to_curve(clip, false)?, Domain::Open)?.rescale_time(1.0)?;
    let st = &opts.straighten;
    Ok(project_closed(&srv, st.epsilon, st.projection_max_iter)?.srv)
}

/// Pairwise distances between clips.
///
/// Every clip is resampled to `common_frames` frames. Pairs are evaluated in
/// parallel, each in the fixed orientation `i < j`, so the result does not
/// depend on scheduling. For the shape metric both alignment directions are
/// computed and averaged; each is capped by the closed distance of the pair.
pub fn distance_matrix(labels: &[String], clips: &[AnimationClip], opts: &MatrixOptions) -> Result<MatrixResult> {
    if labels.len() != clips.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} clips",
            labels.len(),
            clips.len()
        )));
    }
    if clips.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 clips".into()));
    }
    if opts.common_frames < 3 {
        return Err(Error::InvalidArgument("common frame count must be at least 3".into()));
    }
    let n = clips[0].dof();
    if let Some((l, c)) = labels.iter().zip(clips).find(|(_, c)| c.dof() != n) {
        return Err(Error::Clip {
            label: l.clone(),
            source: Box::new(Error::DimensionMismatch {
                expected: n,
                found: c.dof(),
            }),
        });
    }
    let tag = |label: &String, e: Error| Error::Clip {
        label: label.clone(),
        source: Box::new(e),
    };
    let resampled = labels
        .iter()
        .zip(clips)
        .map(|(l, c)| resample_clip(c, opts.common_frames).map_err(|e| tag(l, e)))
        .collect::<Result<Vec<_>>>()?;

    let mut kept: Vec<usize> = (0..clips.len()).collect();
    let mut excluded = Vec::new();
    let srvs: Vec<Option<SrvCurve>> = match opts.metric {
        Metric::LinearL2 => vec![None; clips.len()],
        _ => {
            let results: Vec<Result<SrvCurve>> = resampled.par_iter().map(|c| closed_srv(c, &opts.shape)).collect();
            let mut out = Vec::with_capacity(results.len());
            for (i, r) in results.into_iter().enumerate() {
                match r {
                    Ok(s) => out.push(Some(s)),
                    Err(e) if opts.exclude_failures => {
                        excluded.push((labels[i].clone(), e.to_string()));
                        out.push(None);
                    }
                    Err(e) => return Err(tag(&labels[i], e)),
                }
            }
            kept.retain(|&i| out[i].is_some());
            out
        }
    };
    if kept.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "only {} clips left after exclusions",
            kept.len()
        )));
    }

    let k = kept.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let values: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (i, j) = (kept[a], kept[b]);
            let label = || format!("{} / {}", labels[i], labels[j]);
            let wrap = |e: Error| Error::Clip {
                label: label(),
                source: Box::new(e),
            };
            match opts.metric {
                Metric::LinearL2 => linear_distance(&resampled[i], &resampled[j]),
                Metric::GeodesicClosed => {
                    let (qi, qj) = (srvs[i].as_ref().unwrap(), srvs[j].as_ref().unwrap());
                    closed_distance(qi, qj, &opts.shape.straighten)
                }
                Metric::GeodesicShape => {
                    let (qi, qj) = (srvs[i].as_ref().unwrap(), srvs[j].as_ref().unwrap());
                    let dc = closed_distance(qi, qj, &opts.shape.straighten)?;
                    let ij = align_given(qi, qj, &opts.shape, dc)?.distance;
                    let ji = align_given(qj, qi, &opts.shape, dc)?.distance;
                    Ok(0.5 * (ij + ji))
                }
            }
            .map_err(wrap)
        })
        .collect();
    let mut matrix = vec![0.0; k * k];
    for (&(a, b), v) in pairs.iter().zip(values) {
        let v = v?;
        matrix[a * k + b] = v;
        matrix[b * k + a] = v;
    }
    let kept_labels = kept.iter().map(|&i| labels[i].clone()).collect();
    Ok(MatrixResult {
        matrix: DistanceMatrix::new(kept_labels, matrix, opts.metric)?,
        excluded,
    })
}
