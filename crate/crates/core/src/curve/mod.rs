//! Sampled curves, their square-root velocity (SRV) representation, and the
//! geometry of the manifolds of unit-length open and closed curves.
//!
//! All curves are sampled uniformly on `[0, T]` at `m >= 2` points
//! `t_i = i T / (m - 1)`. Samples are stored row-major: sample `i` occupies
//! `data[i * n .. (i + 1) * n]`. Vector fields along a curve (tangent
//! vectors, normal fields) use the same flat layout.
//!
//! A closed curve is periodic: its last sample duplicates its first. Its
//! integrals use uniform weights over the `m - 1` distinct samples, which
//! coincides with the trapezoid rule used for open curves.

mod closure;
mod geometry;
mod io;
mod srv;

use crate::error::{Error, Result};

pub use closure::{closure_jacobian, closure_residual, project_closed, Projection, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
pub use geometry::{l2_inner, normal_space_basis, project_tangent, FieldOps};
pub use io::{read_curve_csv, read_srv_csv, write_curve_csv, write_srv_csv};
pub use srv::{srv_inverse, srv_transform};

/// Whether a curve is parametrized over an interval or over the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Open,
    Closed,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Domain::Open => "open",
            Domain::Closed => "closed",
        })
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Domain::Open),
            "closed" => Ok(Domain::Closed),
            other => Err(Error::InvalidArgument(format!("unknown domain `{other}`"))),
        }
    }
}

/// Quadrature weights on a uniform grid of `m` samples with spacing `dt`.
pub(crate) fn weights(domain: Domain, m: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; m];
    match domain {
        Domain::Open => {
            w[0] = 0.5 * dt;
            w[m - 1] = 0.5 * dt;
        }
        // The duplicated endpoint carries no weight of its own.
        Domain::Closed => w[m - 1] = 0.0,
    }
    w
}

/// A curve `c : [0, T] -> R^n` sampled at `m` uniform points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    dim: usize,
    data: Vec<f64>,
    duration: f64,
}

impl SampledCurve {
    /// Builds a curve from flat row-major samples.
    ///
    /// Consecutive identical samples are accepted here (constant poses are
    /// legitimate clips); the immersion condition is enforced by
    /// [`srv_transform`].
    pub fn new(dim: usize, data: Vec<f64>, duration: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("curve dimension must be at least 1".into()));
        }
        if !data.len().is_multiple_of(dim) || data.len() / dim < 2 {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not form at least 2 samples of dimension {dim}",
                data.len()
            )));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "duration must be positive, got {duration}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sample value".into()));
        }
        Ok(SampledCurve { dim, data, duration })
    }

    pub fn from_rows(rows: &[Vec<f64>], duration: f64) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(dim, rows.concat(), duration)
    }

    /// Samples `f` at `m` uniform times on `[0, duration]`.
    pub fn from_fn(dim: usize, m: usize, duration: f64, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..m).map(|i| f(duration * i as f64 / (m - 1).max(1) as f64)).collect();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rows.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
            });
        }
        Self::new(dim, rows.concat(), duration)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples `m`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn dt(&self) -> f64 {
        self.duration / (self.len() - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.duration * i as f64 / (self.len() - 1) as f64
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// `‖c(T) - c(0)‖`.
    pub fn closure_gap(&self) -> f64 {
        dist(self.sample(0), self.sample(self.len() - 1))
    }

    /// Largest pointwise distance to another curve with the same layout.
    pub fn max_distance(&self, other: &SampledCurve) -> Result<f64> {
        if self.dim != other.dim || self.len() != other.len() {
            return Err(Error::ShapeMismatch(
                "curves differ in sample count or dimension".into(),
            ));
        }
        Ok(self
            .samples()
            .zip(other.samples())
            .map(|(a, b)| dist(a, b))
            .fold(0.0, f64::max))
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The SRV representation `q = R[c] = ċ / sqrt(‖ċ‖)` of a curve, normalized to
/// unit L² norm.
///
/// The curve is recovered as `c(t) = basepoint + scale * ∫₀ᵗ q‖q‖ ds`, where
/// `scale` is the length of the original curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SrvCurve {
    dim: usize,
    q: Vec<f64>,
    domain: Domain,
    basepoint: Vec<f64>,
    scale: f64,
    duration: f64,
}

/// Tolerance on `‖q‖ = 1` accepted by [`SrvCurve::from_parts`].
pub const UNIT_NORM_TOL: f64 = 1e-8;

impl SrvCurve {
    /// Assembles an SRV curve, checking the unit-norm constraint and, for
    /// closed curves, periodicity of the samples.
    pub fn from_parts(
        dim: usize,
        q: Vec<f64>,
        domain: Domain,
        basepoint: Vec<f64>,
        scale: f64,
        duration: f64,
    ) -> Result<Self> {
        if dim == 0 || !q.len().is_multiple_of(dim) || q.len() / dim < 2 {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not form at least 2 samples of dimension {dim}",
                q.len()
            )));
        }
        if basepoint.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: basepoint.len(),
            });
        }
        if !(scale > 0.0 && scale.is_finite()) || !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument("scale and duration must be positive".into()));
        }
        let srv = SrvCurve {
            dim,
            q,
            domain,
            basepoint,
            scale,
            duration,
        };
        if domain == Domain::Closed {
            let m = srv.len();
            if srv.q[..dim] != srv.q[(m - 1) * dim..] {
                return Err(Error::InvalidArgument(
                    "closed SRV curve must repeat its first sample at the end".into(),
                ));
            }
        }
        let n2 = srv.norm_squared();
        if (n2 - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "SRV curve must have unit L2 norm, got {}",
                n2.sqrt()
            )));
        }
        Ok(srv)
    }

    pub(crate) fn raw(dim: usize, q: Vec<f64>, domain: Domain, basepoint: Vec<f64>, scale: f64, duration: f64) -> Self {
        SrvCurve {
            dim,
            q,
            domain,
            basepoint,
            scale,
            duration,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.q.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.basepoint
    }

    /// Length of the curve this SRV was computed from.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn dt(&self) -> f64 {
        self.duration / (self.len() - 1) as f64
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.q[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> Vec<f64> {
        weights(self.domain, self.len(), self.dt())
    }

    pub fn norm_squared(&self) -> f64 {
        self.field_ops().inner(&self.q, &self.q)
    }

    /// `∫ q‖q‖ dt`, i.e. `R⁻¹[q](T)` with zero basepoint and unit scale.
    pub fn closure_residual(&self) -> Vec<f64> {
        closure_residual(self.dim, &self.q, &self.weights())
    }

    pub fn with_basepoint(mut self, basepoint: Vec<f64>) -> Result<Self> {
        if basepoint.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: basepoint.len(),
            });
        }
        self.basepoint = basepoint;
        Ok(self)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Reparametrizes linearly onto `[0, duration]`. `q` is multiplied by
    /// `sqrt(T / T')` so the norm and the reconstructed curve are unchanged.
    pub fn rescale_time(&self, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "duration must be positive, got {duration}"
            )));
        }
        let f = (self.duration / duration).sqrt();
        let mut out = self.with_q(self.q.iter().map(|v| v * f).collect(), self.domain);
        out.duration = duration;
        Ok(out)
    }

    /// Same metadata, new samples. The caller guarantees the constraints.
    pub(crate) fn with_q(&self, q: Vec<f64>, domain: Domain) -> Self {
        SrvCurve {
            dim: self.dim,
            q,
            domain,
            basepoint: self.basepoint.clone(),
            scale: self.scale,
            duration: self.duration,
        }
    }

    pub(crate) fn same_layout(&self, other: &SrvCurve) -> Result<()> {
        if self.dim != other.dim || self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{} samples",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            )));
        }
        if self.domain != other.domain {
            return Err(Error::ShapeMismatch(format!(
                "domain {} vs {}",
                self.domain, other.domain
            )));
        }
        Ok(())
    }

    pub fn field_ops(&self) -> FieldOps {
        FieldOps::new(self.dim, self.weights())
    }
}
