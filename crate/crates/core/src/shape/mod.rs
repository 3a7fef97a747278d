//! The shape space of closed curves modulo reparametrization.
//!
//! A [`Reparametrization`] combines a cyclic change of starting point with
//! a warp `φ` of `[0, T]`. It acts on SRV curves by
//! `q ↦ (q ∘ φ) sqrt(φ̇)`, which preserves the L² norm.
//!
//! Offsets count the `m - 1` distinct samples of a closed curve; shifting by
//! `m - 1` is the identity.

mod align;

use std::fmt::Write as _;

use crate::curve::{project_closed, Domain, SrvCurve, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};

pub(crate) use align::align_given;
pub use align::{optimal_reparametrization, shape_distance, Alignment, ShapeOptions};

/// A starting-point shift followed by a warp, sampled on the curve's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparametrization {
    phi: Vec<f64>,
    duration: f64,
    start_offset: usize,
}

impl Reparametrization {
    /// `phi` holds `φ(t_i)` on a uniform grid over `[0, duration]`. It must
    /// be strictly increasing with `φ(0) = 0` and `φ(T) = T`.
    pub fn new(phi: Vec<f64>, duration: f64, start_offset: usize) -> Result<Self> {
        let m = phi.len();
        if m < 3 {
            return Err(Error::InvalidArgument(
                "a reparametrization needs at least 3 samples".into(),
            ));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "duration must be positive, got {duration}"
            )));
        }
        if start_offset >= m - 1 {
            return Err(Error::InvalidArgument(format!(
                "start offset {start_offset} out of range for {} distinct samples",
                m - 1
            )));
        }
        if phi[0] != 0.0 || phi[m - 1] != duration {
            return Err(Error::InvalidArgument(format!(
                "phi must map 0 to 0 and {duration} to itself, got {} and {}",
                phi[0],
                phi[m - 1]
            )));
        }
        if let Some(i) = (1..m).find(|&i| !(phi[i] > phi[i - 1])) {
            return Err(Error::NonMonotone { sample: i });
        }
        Ok(Reparametrization {
            phi,
            duration,
            start_offset,
        })
    }

    pub fn identity(m: usize, duration: f64) -> Result<Self> {
        let phi = (0..m).map(|i| grid_time(i, m, duration)).collect();
        Self::new(phi, duration, 0)
    }

    /// Pure starting-point change.
    pub fn shift(m: usize, duration: f64, start_offset: usize) -> Result<Self> {
        let mut r = Self::identity(m, duration)?;
        if start_offset >= m - 1 {
            return Err(Error::InvalidArgument(format!(
                "start offset {start_offset} out of range for {} distinct samples",
                m - 1
            )));
        }
        r.start_offset = start_offset;
        Ok(r)
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start_offset(&self) -> usize {
        self.start_offset
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_identity(&self) -> bool {
        let m = self.phi.len();
        self.start_offset == 0
            && self
                .phi
                .iter()
                .enumerate()
                .all(|(i, &p)| p == grid_time(i, m, self.duration))
    }

    /// CSV with `#start_offset` and `#duration` rows, then `t,phi`.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "#start_offset,{}\n#duration,{}\nt,phi\n",
            self.start_offset, self.duration
        );
        let m = self.phi.len();
        for (i, p) in self.phi.iter().enumerate() {
            let _ = writeln!(out, "{},{p}", grid_time(i, m, self.duration));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut offset = None;
        let mut duration = None;
        let mut phi = Vec::new();
        let mut header = false;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Format(format!("line {}: cannot parse `{line}`", i + 1));
            match fields.as_slice() {
                ["#start_offset", v] => offset = Some(v.parse::<usize>().map_err(|_| bad())?),
                ["#duration", v] => duration = Some(v.parse::<f64>().map_err(|_| bad())?),
                ["t", "phi"] => header = true,
                [_, p] if header => phi.push(p.parse::<f64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let offset = offset.ok_or_else(|| Error::Format("missing `#start_offset` row".into()))?;
        let duration = duration.ok_or_else(|| Error::Format("missing `#duration` row".into()))?;
        Self::new(phi, duration, offset)
    }
}

/// `T i / (m - 1)`, exact at both ends.
pub(crate) fn grid_time(i: usize, m: usize, duration: f64) -> f64 {
    (i as f64 / (m - 1) as f64) * duration
}

/// Linear interpolation of the samples at fractional index `x ∈ [0, m - 1]`.
pub(crate) fn sample_at(q: &[f64], dim: usize, x: f64, out: &mut [f64]) {
    let m = q.len() / dim;
    if x >= (m - 1) as f64 {
        out.copy_from_slice(&q[(m - 1) * dim..]);
        return;
    }
    let i = x.floor() as usize;
    let f = x - i as f64;
    let (a, b) = (&q[i * dim..(i + 1) * dim], &q[(i + 1) * dim..(i + 2) * dim]);
    for k in 0..dim {
        out[k] = a[k] + f * (b[k] - a[k]);
    }
}

/// Cyclic rotation of a periodic sample sequence so that sample `offset`
/// comes first.
pub(crate) fn rotate(q: &[f64], dim: usize, offset: usize) -> Vec<f64> {
    let p = q.len() / dim - 1;
    let mut out = Vec::with_capacity(q.len());
    out.extend_from_slice(&q[offset * dim..p * dim]);
    out.extend_from_slice(&q[..offset * dim]);
    out.extend_from_slice(&q[offset * dim..(offset + 1) * dim]);
    out
}

/// `(q ∘ φ) sqrt(φ̇)` after the shift, without renormalization.
pub(crate) fn warp(q: &[f64], dim: usize, rho: &Reparametrization) -> Vec<f64> {
    let m = q.len() / dim;
    let shifted = rotate(q, dim, rho.start_offset);
    let phi = &rho.phi;
    let t = rho.duration;
    let dt = t / (m - 1) as f64;
    // Periodic differences at the seam so both ends get the same slope.
    let slope = |i: usize| -> f64 {
        if i == 0 || i == m - 1 {
            (phi[1] - (phi[m - 2] - t)) / (2.0 * dt)
        } else {
            (phi[i + 1] - phi[i - 1]) / (2.0 * dt)
        }
    };
    let mut out = vec![0.0; q.len()];
    let scale = (m - 1) as f64 / t;
    for i in 0..m {
        let row = &mut out[i * dim..(i + 1) * dim];
        sample_at(&shifted, dim, phi[i] * scale, row);
        let r = slope(i).sqrt();
        row.iter_mut().for_each(|v| *v *= r);
    }
    out
}

pub(crate) fn apply_with(srv: &SrvCurve, rho: &Reparametrization, epsilon: f64, max_iter: usize) -> Result<SrvCurve> {
    if srv.domain() != Domain::Closed {
        return Err(Error::InvalidArgument("reparametrization acts on closed curves".into()));
    }
    if rho.len() != srv.len() {
        return Err(Error::ShapeMismatch(format!(
            "reparametrization has {} samples, curve has {}",
            rho.len(),
            srv.len()
        )));
    }
    if (rho.duration - srv.duration()).abs() > 1e-9 * srv.duration() {
        return Err(Error::ShapeMismatch(format!(
            "reparametrization duration {} differs from curve duration {}",
            rho.duration,
            srv.duration()
        )));
    }
    if rho.is_identity() {
        return Ok(srv.clone());
    }
    let mut q = warp(srv.q(), srv.dim(), rho);
    srv.field_ops().normalize(&mut q);
    Ok(project_closed(&srv.with_q(q, Domain::Closed), epsilon, max_iter)?.srv)
}

/// Applies `rho` to a closed SRV curve: rotates the samples by the start
/// offset, resamples at `φ(t_i)` by linear interpolation and multiplies by
/// `sqrt(φ̇)`. The result is renormalized and projected back onto the
/// closed-curve manifold to remove discretization drift. The identity
/// returns the input unchanged.
pub fn apply_reparam(srv: &SrvCurve, rho: &Reparametrization) -> Result<SrvCurve> {
    apply_with(srv, rho, DEFAULT_EPSILON, DEFAULT_MAX_ITER)
}
