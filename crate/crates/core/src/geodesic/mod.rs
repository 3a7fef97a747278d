//! Geodesics between SRV curves.
//!
//! On the sphere of unit-length curves the geodesic is spherical linear
//! interpolation. On the closed-curve manifold it is found by minimizing
//! the discrete path energy ([`path_straightening`]).
//!
//! A path is stored as `k + 1` points `α(τ_j)`, `τ_j = j / k`.

mod io;
mod straighten;

use crate::curve::{l2_inner, project_closed, Domain, FieldOps, SrvCurve, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};

pub use straighten::{closed_distance, path_straightening, StraightenOptions};

/// Inner products at or below `-1 + ANTIPODAL_MARGIN` are rejected.
pub const ANTIPODAL_MARGIN: f64 = 1e-9;

/// Below this angle SLERP is replaced by normalized linear interpolation.
const SMALL_ANGLE: f64 = 1e-7;

/// Why an optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Closed-form path, no optimization needed.
    Exact,
    /// Relative energy decrease fell below the tolerance.
    Converged,
    MaxIterations,
    /// No step size decreased the energy; the best iterate is returned.
    LineSearchExhausted,
}

/// A discrete path `α(τ_0), ..., α(τ_k)` of SRV curves.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    points: Vec<SrvCurve>,
    energy_trace: Vec<f64>,
    iterations: usize,
    status: Status,
}

impl GeodesicPath {
    /// Builds a path from explicit points, which must share their layout.
    pub fn new(points: Vec<SrvCurve>) -> Result<Self> {
        Self::with_trace(points, Vec::new(), 0, Status::Exact)
    }

    pub(crate) fn with_trace(
        points: Vec<SrvCurve>,
        energy_trace: Vec<f64>,
        iterations: usize,
        status: Status,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a path needs at least 2 points".into()));
        }
        for p in &points[1..] {
            points[0].same_layout(p)?;
        }
        Ok(GeodesicPath {
            points,
            energy_trace,
            iterations,
            status,
        })
    }

    pub fn points(&self) -> &[SrvCurve] {
        &self.points
    }

    /// Number of segments `k`.
    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn domain(&self) -> Domain {
        self.points[0].domain()
    }

    /// Path energy after initialization and after every accepted step.
    pub fn energy_trace(&self) -> &[f64] {
        &self.energy_trace
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn start(&self) -> &SrvCurve {
        &self.points[0]
    }

    pub fn end(&self) -> &SrvCurve {
        &self.points[self.points.len() - 1]
    }

    /// Discrete speeds `k ‖α(τ_{j+1}) - α(τ_j)‖`.
    pub fn speeds(&self) -> Vec<f64> {
        let ops = self.points[0].field_ops();
        let k = self.segments() as f64;
        self.points
            .windows(2)
            .map(|w| k * ops.distance(w[0].q(), w[1].q()))
            .collect()
    }

    /// `(max - min) / mean` of [`speeds`](Self::speeds); 0 for a constant path.
    pub fn speed_variation(&self) -> f64 {
        let s = self.speeds();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        if mean == 0.0 {
            return 0.0;
        }
        let (lo, hi) = s
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        (hi - lo) / mean
    }

    /// The path at `s ∈ [0, 1]`: spherical interpolation between the two
    /// neighboring points, projected back onto the closed-curve manifold for
    /// closed paths. Grid values of `s` return the stored point.
    pub fn evaluate(&self, s: f64) -> Result<SrvCurve> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!(
                "path parameter must lie in [0, 1], got {s}"
            )));
        }
        let k = self.segments();
        let x = s * k as f64;
        let j = (x.floor() as usize).min(k - 1);
        let t = x - j as f64;
        if t == 0.0 {
            return Ok(self.points[j].clone());
        }
        if t == 1.0 {
            return Ok(self.points[j + 1].clone());
        }
        let (a, b) = (&self.points[j], &self.points[j + 1]);
        let p = interpolate(a, b, t)?;
        match p.domain() {
            Domain::Open => Ok(p),
            Domain::Closed => Ok(project_closed(&p, DEFAULT_EPSILON, DEFAULT_MAX_ITER)?.srv),
        }
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Angle between two unit-norm SRV curves and the guard against antipodal
/// pairs.
fn angle(beta: &SrvCurve, gamma: &SrvCurve) -> Result<f64> {
    let inner = l2_inner(beta, gamma)?;
    if inner <= -1.0 + ANTIPODAL_MARGIN {
        return Err(Error::Antipodal { inner });
    }
    Ok(arc(beta, gamma, inner))
}

/// `arccos` of the clamped inner product. Near 0 it loses half the digits,
/// so small angles come from the chord instead, `θ = 2 asin(‖β - γ‖ / 2)`.
fn arc(beta: &SrvCurve, gamma: &SrvCurve, inner: f64) -> f64 {
    if inner > 0.9 {
        let chord = beta.field_ops().distance(beta.q(), gamma.q());
        2.0 * (0.5 * chord).min(1.0).asin()
    } else {
        inner.clamp(-1.0, 1.0).acos()
    }
}

fn slerp_q(ops: &FieldOps, a: &[f64], b: &[f64], theta: f64, t: f64) -> Vec<f64> {
    if a == b {
        return a.to_vec();
    }
    let (wa, wb) = if theta < SMALL_ANGLE {
        (1.0 - t, t)
    } else {
        let s = theta.sin();
        (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
    };
    let mut q: Vec<f64> = a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect();
    ops.normalize(&mut q);
    q
}

/// SLERP of the samples at `t`; basepoint and scale are interpolated
/// linearly.
pub(crate) fn interpolate(a: &SrvCurve, b: &SrvCurve, t: f64) -> Result<SrvCurve> {
    let theta = angle(a, b)?;
    let q = slerp_q(&a.field_ops(), a.q(), b.q(), theta, t);
    let basepoint = a
        .basepoint()
        .iter()
        .zip(b.basepoint())
        .map(|(x, y)| lerp(*x, *y, t))
        .collect();
    a.with_q(q, a.domain())
        .with_basepoint(basepoint)?
        .with_scale(lerp(a.scale(), b.scale(), t))
}

/// The great-circle path from `beta` to `gamma` sampled at `k + 1` points.
///
/// Interior points are renormalized after interpolation so they lie on the
/// unit sphere to rounding; the endpoints are clones of the inputs.
pub fn sphere_geodesic(beta: &SrvCurve, gamma: &SrvCurve, k: usize) -> Result<GeodesicPath> {
    if k == 0 {
        return Err(Error::InvalidArgument("segment count must be at least 1".into()));
    }
    let theta = angle(beta, gamma)?;
    let ops = beta.field_ops();
    let mut points = Vec::with_capacity(k + 1);
    points.push(beta.clone());
    for j in 1..k {
        let t = j as f64 / k as f64;
        let q = slerp_q(&ops, beta.q(), gamma.q(), theta, t);
        let basepoint = beta
            .basepoint()
            .iter()
            .zip(gamma.basepoint())
            .map(|(x, y)| lerp(*x, *y, t))
            .collect();
        points.push(
            beta.with_q(q, beta.domain())
                .with_basepoint(basepoint)?
                .with_scale(lerp(beta.scale(), gamma.scale(), t))?,
        );
    }
    points.push(gamma.clone());
    GeodesicPath::with_trace(points, Vec::new(), 0, Status::Exact)
}

/// Great-circle distance `arccos ⟨β, γ⟩`, with the inner product clamped to
/// `[-1, 1]`.
pub fn sphere_distance(beta: &SrvCurve, gamma: &SrvCurve) -> Result<f64> {
    let inner = l2_inner(beta, gamma)?;
    Ok(arc(beta, gamma, inner))
}

/// `Σ_j ‖α(τ_{j+1}) - α(τ_j)‖`.
pub fn path_length(path: &GeodesicPath) -> f64 {
    let ops = path.points[0].field_ops();
    path.points.windows(2).map(|w| ops.distance(w[0].q(), w[1].q())).sum()
}

/// `½ k Σ_j ‖α(τ_{j+1}) - α(τ_j)‖²`.
pub fn path_energy(path: &GeodesicPath) -> f64 {
    let ops = path.points[0].field_ops();
    energy(&ops, path.points.iter().map(|p| p.q()))
}

pub(crate) fn energy<'a>(ops: &FieldOps, qs: impl Iterator<Item = &'a [f64]>) -> f64 {
    let qs: Vec<&[f64]> = qs.collect();
    let k = (qs.len() - 1) as f64;
    0.5 * k * qs.windows(2).map(|w| ops.distance(w[0], w[1]).powi(2)).sum::<f64>()
}
