//! Synthetic clips and curves shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use elastic_motion::curve::{srv_transform, Domain, SampledCurve, SrvCurve};
use elastic_motion::mocap::{AnimationClip, Bone, Channel, Skeleton};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hips (translation + ZXY rotation), thigh (ZX) and shin (Z): 6 angles.
pub fn leg() -> Arc<Skeleton> {
    use Channel::*;
    Arc::new(
        Skeleton::new(vec![
            Bone {
                name: "Hips".into(),
                parent: None,
                offset: [0.0, 0.0, 0.0],
                channels: vec![Xpos, Ypos, Zpos, Zrot, Xrot, Yrot],
                end_site: None,
            },
            Bone {
                name: "Thigh".into(),
                parent: Some(0),
                offset: [0.0, -1.0, 0.0],
                channels: vec![Zrot, Xrot],
                end_site: None,
            },
            Bone {
                name: "Shin".into(),
                parent: Some(1),
                offset: [0.0, -4.0, 0.0],
                channels: vec![Zrot],
                end_site: Some([0.0, -4.0, 0.0]),
            },
        ])
        .unwrap(),
    )
}

/// Per-class amplitude patterns (radians).
pub const CLASS_AMPLITUDES: [[f64; 6]; 3] = [
    [0.5, 0.3, 0.2, 0.6, 0.4, 0.3],
    [0.3, 0.5, 0.4, 0.2, 0.6, 0.3],
    [0.4, 0.2, 0.5, 0.4, 0.3, 0.6],
];

/// Periodic joint angles: channel `k` is
/// `A_k (sin(θ + kπ/3) + 0.3 sin(2θ + 2kπ/3))` with `θ = 2π cycles u + phase`,
/// sampled at `frames` points of `u ∈ [0, span]`.
pub fn gait(frames: usize, cycles: f64, amplitudes: &[f64; 6], phase: f64, span: f64) -> AnimationClip {
    let rows: Vec<Vec<f64>> = (0..frames)
        .map(|i| {
            let u = span * i as f64 / (frames - 1) as f64;
            let theta = TAU * cycles * u + phase;
            (0..6)
                .map(|k| {
                    let p = k as f64 * PI / 3.0;
                    amplitudes[k] * ((theta + p).sin() + 0.3 * (2.0 * theta + 2.0 * p).sin())
                })
                .collect()
        })
        .collect();
    let root = (0..frames)
        .map(|i| {
            let u = span * i as f64 / (frames - 1) as f64;
            [2.0 * u, 0.1 * (TAU * cycles * u).sin(), 0.0]
        })
        .collect();
    AnimationClip::new(leg(), rows, root, 1.0 / 30.0).unwrap()
}

/// 3 classes × 5 variants. Class `c` completes `c + 1` cycles per clip; each
/// variant gets a random phase (a cyclic shift of the loop) and ±5%
/// amplitude noise.
pub fn corpus(frames: usize, seed: u64) -> (Vec<String>, Vec<AnimationClip>, Vec<usize>) {
    let mut r = rng(seed);
    let mut labels = Vec::new();
    let mut clips = Vec::new();
    let mut classes = Vec::new();
    for (c, base) in CLASS_AMPLITUDES.iter().enumerate() {
        for v in 0..5 {
            let amps: [f64; 6] = std::array::from_fn(|k| base[k] * (1.0 + 0.05 * r.gen_range(-1.0..1.0)));
            let phase = r.gen_range(0.0..TAU);
            labels.push(format!("class{c}_{v}"));
            clips.push(gait(frames, (c + 1) as f64, &amps, phase, 1.0));
            classes.push(c);
        }
    }
    (labels, clips, classes)
}

/// A smooth closed curve: a unit circle plus random low-order Fourier
/// terms of size `amp`, in `dim` dimensions.
pub fn closed_curve(r: &mut ChaCha8Rng, dim: usize, m: usize, amp: f64) -> SampledCurve {
    let coeffs: Vec<[f64; 4]> = (0..dim)
        .map(|_| std::array::from_fn(|_| amp * r.gen_range(-1.0..1.0)))
        .collect();
    SampledCurve::from_fn(dim, m, 1.0, |t| {
        let x = TAU * t;
        (0..dim)
            .map(|k| {
                let base = match k {
                    0 => x.cos(),
                    1 => x.sin(),
                    _ => 0.0,
                };
                let c = coeffs[k];
                base + c[0] * (2.0 * x).cos() + c[1] * (2.0 * x).sin() + c[2] * (3.0 * x).cos() + c[3] * (3.0 * x).sin()
            })
            .collect()
    })
    .unwrap()
}

pub fn closed_srv(r: &mut ChaCha8Rng, dim: usize, m: usize, amp: f64) -> SrvCurve {
    srv_transform(&closed_curve(r, dim, m, amp), Domain::Closed).unwrap()
}

/// A smooth open curve with random coefficients.
pub fn open_srv(r: &mut ChaCha8Rng, dim: usize, m: usize) -> SrvCurve {
    let coeffs: Vec<[f64; 3]> = (0..dim)
        .map(|_| std::array::from_fn(|_| r.gen_range(-1.0..1.0)))
        .collect();
    let c = SampledCurve::from_fn(dim, m, 1.0, |t| {
        (0..dim)
            .map(|k| {
                let c = coeffs[k];
                (1.0 + k as f64 * 0.3) * t + c[0] * (TAU * t).sin() * 0.2 + c[1] * (3.0 * t).cos() * 0.3 + c[2] * t * t
            })
            .collect()
    })
    .unwrap();
    srv_transform(&c, Domain::Open).unwrap()
}

/// `Σ wᵢ ⟨aᵢ, bᵢ⟩` with trapezoid weights over `[0, duration]`, written out
/// independently of the crate's quadrature.
pub fn trapezoid_inner(dim: usize, a: &[f64], b: &[f64], duration: f64) -> f64 {
    let m = a.len() / dim;
    let dt = duration / (m - 1) as f64;
    let mut s = 0.0;
    for i in 0..m {
        let w = if i == 0 || i == m - 1 { 0.5 * dt } else { dt };
        for k in 0..dim {
            s += w * a[i * dim + k] * b[i * dim + k];
        }
    }
    s
}

pub fn wrapped(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Largest per-channel wrapped difference between two clips.
pub fn max_angle_diff(a: &AnimationClip, b: &AnimationClip) -> f64 {
    assert_eq!(a.frame_count(), b.frame_count());
    a.frames()
        .iter()
        .flatten()
        .zip(b.frames().iter().flatten())
        .map(|(x, y)| wrapped(x - y).abs())
        .fold(0.0, f64::max)
}
