use std::f64::consts::{FRAC_PI_2, TAU};

use crate::curve::{
    project_closed, srv_inverse, srv_transform, Domain, SampledCurve, DEFAULT_EPSILON, DEFAULT_MAX_ITER,
};
use crate::error::{Error, Result};
use crate::mocap::{clip_to_curve, curve_to_clip, wrap_angle, AnimationClip};

/// Parameters of [`cyclify`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclifyOptions {
    /// Bound on the positional closure gap `‖c̄(T) - c̄(0)‖`.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Blend the SRV across the seam so the velocity also closes up.
    pub seam_smoothing: bool,
    /// Seam window as a fraction of the sample count.
    pub seam_window: f64,
    /// Largest start/end gap per channel (radians) accepted as "nearly
    /// periodic".
    pub sanity_bound: f64,
    /// Close the root trajectory together with the joint angles instead of
    /// removing its linear trend.
    pub include_root_translation: bool,
}

impl Default for CyclifyOptions {
    fn default() -> Self {
        CyclifyOptions {
            epsilon: DEFAULT_EPSILON,
            max_iter: DEFAULT_MAX_ITER,
            seam_smoothing: true,
            seam_window: 0.05,
            sanity_bound: FRAC_PI_2,
            include_root_translation: false,
        }
    }
}

/// Closure measurements before and after [`cyclify`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CyclifyReport {
    /// Joint-space gap between the first and last frame (radians).
    pub gap_before: f64,
    pub gap_after: f64,
    /// Largest per-bone distance between first and last world pose.
    pub world_gap_before: f64,
    pub world_gap_after: f64,
    /// Newton iterations of the closure projection.
    pub iterations: usize,
    /// Largest per-channel change of any frame (radians).
    pub max_deviation: f64,
    /// The input was already closed and its angles were kept verbatim.
    pub unchanged: bool,
}

#[derive(Debug, Clone)]
pub struct Cyclified {
    pub clip: AnimationClip,
    pub report: CyclifyReport,
}

/// Removes the linear trend from the root trajectory so it loops.
fn detrend(root: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let m = root.len();
    let (first, last) = (root[0], root[m - 1]);
    let mut out: Vec<[f64; 3]> = root
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let s = i as f64 / (m - 1) as f64;
            std::array::from_fn(|k| r[k] - s * (last[k] - first[k]))
        })
        .collect();
    out[m - 1] = first;
    out
}

/// Adds `sign · t/T · ramp` to every sample.
fn add_ramp(curve: &SampledCurve, ramp: &[f64], sign: f64) -> Result<SampledCurve> {
    let m = curve.len();
    let data = curve
        .samples()
        .enumerate()
        .flat_map(|(i, s)| {
            let f = sign * i as f64 / (m - 1) as f64;
            s.iter().zip(ramp).map(move |(v, r)| v + f * r).collect::<Vec<_>>()
        })
        .collect();
    SampledCurve::new(curve.dim(), data, curve.duration())
}

/// Raised-cosine blend of `q` toward the mean of its two end samples over
/// `w` samples at each end. Afterwards both ends hold the mean.
fn smooth_seam(q: &mut [f64], dim: usize, w: usize) {
    let m = q.len() / dim;
    let w = w.min((m - 1) / 2).max(1);
    let first = q[..dim].to_vec();
    let last = q[(m - 1) * dim..].to_vec();
    let mean: Vec<f64> = first.iter().zip(&last).map(|(a, b)| 0.5 * (a + b)).collect();
    for i in 0..w {
        let lambda = 0.5 * (1.0 + (std::f64::consts::PI * i as f64 / w as f64).cos());
        for k in 0..dim {
            q[i * dim + k] += lambda * (mean[k] - first[k]);
            q[(m - 1 - i) * dim + k] += lambda * (mean[k] - last[k]);
        }
    }
    q[..dim].copy_from_slice(&mean);
    q[(m - 1) * dim..].copy_from_slice(&mean);
}

/// Turns a nearly periodic clip into a seamless loop.
///
/// The joint-angle curve `c` is mapped to its SRV `q`, projected onto the
/// closed-curve manifold and mapped back with the original length. Channels
/// that wind by whole turns are closed modulo 2π. The output is translated
/// so that its mean deviation from the input vanishes, which spreads the
/// correction over the clip instead of piling it onto the last frame.
///
/// A clip whose joint-space gap is already below `epsilon` keeps its angles
/// verbatim.
pub fn cyclify(clip: &AnimationClip, opts: &CyclifyOptions) -> Result<Cyclified> {
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {}",
            opts.epsilon
        )));
    }
    if !(0.0..0.5).contains(&opts.seam_window) {
        return Err(Error::InvalidArgument(format!(
            "seam window must lie in [0, 0.5), got {}",
            opts.seam_window
        )));
    }
    let m = clip.frame_count();
    let (first, last) = (&clip.frames()[0], &clip.frames()[m - 1]);
    for (channel, (a, b)) in first.iter().zip(last).enumerate() {
        let gap = wrap_angle(b - a).abs();
        if gap > opts.sanity_bound {
            return Err(Error::NotPeriodic {
                channel,
                gap,
                bound: opts.sanity_bound,
            });
        }
    }
    let gap_before = clip.closure_gap();
    let world_gap_before = clip.world_closure_gap();
    let root_gap = {
        let r = clip.root_translation();
        crate::curve::dist(&r[0], &r[m - 1])
    };

    let unchanged = gap_before < opts.epsilon && (!opts.include_root_translation || root_gap < opts.epsilon);
    let (out, iterations) = if unchanged {
        let root = detrend(clip.root_translation());
        (
            AnimationClip::new(clip.skeleton().clone(), clip.frames().to_vec(), root, clip.frame_time())?,
            0,
        )
    } else {
        close(clip, opts)?
    };

    let max_deviation = clip
        .frames()
        .iter()
        .flatten()
        .zip(out.frames().iter().flatten())
        .map(|(a, b)| wrap_angle(b - a).abs())
        .fold(0.0, f64::max);
    let report = CyclifyReport {
        gap_before,
        gap_after: out.closure_gap(),
        world_gap_before,
        world_gap_after: out.world_closure_gap(),
        iterations,
        max_deviation,
        unchanged,
    };
    Ok(Cyclified { clip: out, report })
}

fn close(clip: &AnimationClip, opts: &CyclifyOptions) -> Result<(AnimationClip, usize)> {
    let with_root = opts.include_root_translation;
    let lifted = clip_to_curve(clip, with_root)?;
    let (m, n) = (lifted.len(), lifted.dim());
    let dof = clip.dof();
    // Whole turns per channel; closing modulo 2π leaves these in place.
    let winding: Vec<f64> = (0..n)
        .map(|k| {
            if k >= dof {
                return 0.0;
            }
            let d = lifted.sample(m - 1)[k] - lifted.sample(0)[k];
            (d / TAU).round() * TAU
        })
        .collect();
    let curve = add_ramp(&lifted, &winding, -1.0)?;

    let srv = srv_transform(&curve, Domain::Open)?;
    let mut q = srv.q().to_vec();
    if opts.seam_smoothing {
        let w = (opts.seam_window * (m - 1) as f64).round() as usize;
        smooth_seam(&mut q, n, w);
        srv.field_ops().normalize(&mut q);
    }
    let srv = crate::curve::SrvCurve::from_parts(
        n,
        q,
        Domain::Open,
        srv.basepoint().to_vec(),
        srv.scale(),
        srv.duration(),
    )?;
    let projection = project_closed(&srv, opts.epsilon / srv.scale(), opts.max_iter)?;
    let closed = srv_inverse(&projection.srv)?;

    // Least-squares translation onto the input.
    let mut shift = vec![0.0; n];
    for (a, b) in curve.samples().zip(closed.samples()) {
        shift
            .iter_mut()
            .zip(a.iter().zip(b))
            .for_each(|(s, (x, y))| *s += (x - y) / m as f64);
    }
    let data: Vec<f64> = closed
        .samples()
        .flat_map(|s| s.iter().zip(&shift).map(|(v, d)| v + d).collect::<Vec<_>>())
        .collect();
    let closed = SampledCurve::new(n, data, curve.duration())?;
    let closed = add_ramp(&closed, &winding, 1.0)?;

    let out = curve_to_clip(&closed, clip)?;
    let out = if with_root {
        out
    } else {
        AnimationClip::new(
            clip.skeleton().clone(),
            out.frames().to_vec(),
            detrend(clip.root_translation()),
            clip.frame_time(),
        )?
    };
    Ok((out, projection.iterations))
}
