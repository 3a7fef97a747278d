use rayon::prelude::*;

use super::{apply_with, rotate, sample_at, warp, Reparametrization};
use crate::curve::{Domain, SrvCurve};
use crate::error::{Error, Result};
use crate::geodesic::{closed_distance, StraightenOptions};

/// Allowed DP steps `(Δi, Δj)`; warp slopes stay within `[1/3, 3]`.
const SLOPES: [(usize, usize); 5] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1)];

/// Parameters of [`optimal_reparametrization`] and [`shape_distance`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeOptions {
    /// Number of evenly spaced starting offsets tried before local refinement.
    pub seeds: usize,
    pub straighten: StraightenOptions,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        ShapeOptions {
            seeds: 16,
            straighten: StraightenOptions::default(),
        }
    }
}

/// Result of aligning `gamma` to `beta`.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub reparam: Reparametrization,
    /// `gamma` acted on by `reparam`.
    pub aligned: SrvCurve,
    /// Closed-manifold distance between `beta` and `aligned`.
    pub distance: f64,
    /// Closed-manifold distance between `beta` and `gamma` itself.
    pub unaligned_distance: f64,
}

/// Minimum of `Σ dt ‖β(t_s) - γ(φ(t_s)) sqrt(φ̇)‖²` over monotone lattice
/// paths from `(0, 0)` to `(m-1, m-1)`, with `φ` piecewise linear on each
/// step. Returns the cost and `φ` in fractional sample indices.
fn dp(beta: &[f64], gamma: &[f64], dim: usize, dt: f64) -> (f64, Vec<f64>) {
    let m = beta.len() / dim;
    let idx = |i: usize, j: usize| i * m + j;
    let mut cost = vec![f64::INFINITY; m * m];
    let mut pred = vec![(0usize, 0usize); m * m];
    cost[0] = 0.0;
    let mut g = vec![0.0; dim];
    for i in 1..m {
        for j in 1..m {
            let mut best = f64::INFINITY;
            let mut arg = (0, 0);
            for &(di, dj) in &SLOPES {
                if di > i || dj > j {
                    continue;
                }
                let (k, l) = (i - di, j - dj);
                let base = cost[idx(k, l)];
                if !base.is_finite() {
                    continue;
                }
                let r = dj as f64 / di as f64;
                let sr = r.sqrt();
                let mut c = 0.0;
                for s in k..i {
                    sample_at(gamma, dim, l as f64 + (s - k) as f64 * r, &mut g);
                    let b = &beta[s * dim..(s + 1) * dim];
                    c += b.iter().zip(&g).map(|(x, y)| (x - sr * y).powi(2)).sum::<f64>();
                }
                let total = base + dt * c;
                if total < best {
                    best = total;
                    arg = (k, l);
                }
            }
            cost[idx(i, j)] = best;
            pred[idx(i, j)] = arg;
        }
    }
    let mut phi = vec![0.0; m];
    let (mut i, mut j) = (m - 1, m - 1);
    phi[i] = j as f64;
    while i > 0 {
        let (k, l) = pred[idx(i, j)];
        let r = (j - l) as f64 / (i - k) as f64;
        for s in k..i {
            phi[s] = l as f64 + (s - k) as f64 * r;
        }
        (i, j) = (k, l);
    }
    (cost[idx(m - 1, m - 1)], phi)
}

fn check_pair(beta: &SrvCurve, gamma: &SrvCurve) -> Result<()> {
    if beta.domain() != Domain::Closed || gamma.domain() != Domain::Closed {
        return Err(Error::InvalidArgument("shape alignment needs closed curves".into()));
    }
    beta.same_layout(gamma)?;
    if (beta.duration() - gamma.duration()).abs() > 1e-9 * beta.duration() {
        return Err(Error::ShapeMismatch("curves must share their duration".into()));
    }
    Ok(())
}

/// DP cost and warp for one starting offset of `gamma`.
fn offset_cost(beta: &SrvCurve, gamma: &SrvCurve, offset: usize) -> (f64, Vec<f64>) {
    let shifted = rotate(gamma.q(), gamma.dim(), offset);
    dp(beta.q(), &shifted, beta.dim(), beta.dt())
}

/// Best starting offset and warp of `gamma` against `beta` by DP cost.
///
/// Offsets `round(s P / seeds)` are tried first; the best is then refined by
/// stepping to neighbouring offsets while the cost decreases.
fn best_reparam(beta: &SrvCurve, gamma: &SrvCurve, seeds: usize) -> Result<Reparametrization> {
    let m = beta.len();
    let p = m - 1;
    let mut offsets: Vec<usize> = (0..seeds)
        .map(|s| ((s as f64 * p as f64 / seeds as f64).round() as usize) % p)
        .collect();
    offsets.dedup();
    let scored: Vec<(usize, f64, Vec<f64>)> = offsets
        .par_iter()
        .map(|&o| {
            let (c, phi) = offset_cost(beta, gamma, o);
            (o, c, phi)
        })
        .collect();
    // Ties go to the smallest offset.
    let (mut offset, mut cost, mut phi) = scored
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
        .expect("at least one seed");
    for _ in 0..p / 2 {
        let (down, up) = ((offset + p - 1) % p, (offset + 1) % p);
        let (cd, pd) = offset_cost(beta, gamma, down);
        let (cu, pu) = offset_cost(beta, gamma, up);
        let (o, c, f) = if cd <= cu { (down, cd, pd) } else { (up, cu, pu) };
        if c >= cost {
            break;
        }
        (offset, cost, phi) = (o, c, f);
    }
    let duration = beta.duration();
    let to_time = |phi: &[f64]| -> Result<Reparametrization> {
        let mut t: Vec<f64> = phi.iter().map(|&x| (x / p as f64) * duration).collect();
        t[p] = duration;
        Reparametrization::new(t, duration, offset)
    };
    // The lattice path only takes a few slopes, so sqrt(φ̇) is piecewise
    // constant. Smoothing φ usually lowers the mismatch; keep the best level.
    let mut best = to_time(&phi)?;
    let mut best_cost = mismatch(beta, gamma, &best);
    let mut passes = 0;
    for target in [1, 2, 4, 8, 16, 32] {
        while passes < target {
            phi = smooth(&phi);
            passes += 1;
        }
        let rho = to_time(&phi)?;
        let c = mismatch(beta, gamma, &rho);
        if c < best_cost {
            (best, best_cost) = (rho, c);
        }
    }
    Ok(best)
}

/// Three-point moving average of the interior samples; keeps the ends and
/// strict monotonicity.
fn smooth(phi: &[f64]) -> Vec<f64> {
    let mut out = phi.to_vec();
    for i in 1..phi.len() - 1 {
        out[i] = (phi[i - 1] + phi[i] + phi[i + 1]) / 3.0;
    }
    out
}

/// `‖β - γ∘ρ‖²` after renormalizing the warped curve.
fn mismatch(beta: &SrvCurve, gamma: &SrvCurve, rho: &Reparametrization) -> f64 {
    let ops = beta.field_ops();
    let mut q = warp(gamma.q(), gamma.dim(), rho);
    ops.normalize(&mut q);
    let d = ops.distance(beta.q(), &q);
    d * d
}

fn align(beta: &SrvCurve, gamma: &SrvCurve, opts: &ShapeOptions, unaligned: Option<f64>) -> Result<Alignment> {
    check_pair(beta, gamma)?;
    if opts.seeds == 0 {
        return Err(Error::InvalidArgument("seed count must be at least 1".into()));
    }
    let st = &opts.straighten;
    let unaligned = match unaligned {
        Some(d) => d,
        None => closed_distance(beta, gamma, st)?,
    };
    let identity = || -> Result<Alignment> {
        Ok(Alignment {
            reparam: Reparametrization::identity(beta.len(), beta.duration())?,
            aligned: gamma.clone(),
            distance: unaligned,
            unaligned_distance: unaligned,
        })
    };
    if beta.q() == gamma.q() {
        return identity();
    }
    let rho = best_reparam(beta, gamma, opts.seeds.min(beta.len() - 1))?;
    if rho.is_identity() {
        return identity();
    }
    let aligned = apply_with(gamma, &rho, st.epsilon, st.projection_max_iter)?;
    let distance = closed_distance(beta, &aligned, st)?;
    // The identity is admissible, so the infimum never exceeds the
    // unaligned distance.
    if distance >= unaligned {
        return identity();
    }
    Ok(Alignment {
        reparam: rho,
        aligned,
        distance,
        unaligned_distance: unaligned,
    })
}

/// Aligns `gamma` to `beta` over starting offsets and warps.
///
/// For each seed offset a dynamic program over monotone lattice paths
/// minimizes the squared L² mismatch between `beta` and the reparametrized
/// `gamma`. The best pair is then scored with the path-straightening distance
/// and compared with the unaligned distance; the better of the two is
/// returned.
pub fn optimal_reparametrization(beta: &SrvCurve, gamma: &SrvCurve, opts: &ShapeOptions) -> Result<Alignment> {
    align(beta, gamma, opts, None)
}

/// Like [`optimal_reparametrization`] with a precomputed unaligned distance.
pub(crate) fn align_given(beta: &SrvCurve, gamma: &SrvCurve, opts: &ShapeOptions, unaligned: f64) -> Result<Alignment> {
    align(beta, gamma, opts, Some(unaligned))
}

/// Distance between the equivalence classes of `beta` and `gamma`.
pub fn shape_distance(beta: &SrvCurve, gamma: &SrvCurve, opts: &ShapeOptions) -> Result<f64> {
    Ok(optimal_reparametrization(beta, gamma, opts)?.distance)
}
