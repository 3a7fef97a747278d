use std::f64::consts::{PI, TAU};

use super::AnimationClip;
use crate::curve::SampledCurve;
use crate::error::{Error, Result};

/// Jumps within this distance of π are treated as ambiguous.
const AMBIGUITY_TOL: f64 = 1e-12;

/// Reduces an angle into `(-π, π]`. Values already in range are returned
/// unchanged.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Lifts every channel from the circle to the line: each value is shifted by
/// a multiple of 2π so that consecutive frames differ by less than π.
///
/// The first frame is kept verbatim, and so is every value that needs no
/// shift.
pub fn unwrap_angles(frames: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(frames.len());
    for (f, raw) in frames.iter().enumerate() {
        let Some(prev) = out.last() else {
            out.push(raw.clone());
            continue;
        };
        let mut row = Vec::with_capacity(raw.len());
        for (channel, (&x, &p)) in raw.iter().zip(prev).enumerate() {
            let k = ((p - x) / TAU).round();
            let v = x + k * TAU;
            if ((v - p).abs() - PI).abs() < AMBIGUITY_TOL {
                return Err(Error::AmbiguousUnwrap { channel, frame: f });
            }
            row.push(v);
        }
        out.push(row);
    }
    Ok(out)
}

/// The clip as a curve in joint space: unwrapped angles, optionally followed
/// by the three root translation coordinates.
pub fn clip_to_curve(clip: &AnimationClip, include_root_translation: bool) -> Result<SampledCurve> {
    let angles = unwrap_angles(clip.frames())?;
    let n = clip.dof() + if include_root_translation { 3 } else { 0 };
    let mut data = Vec::with_capacity(n * clip.frame_count());
    for (pose, root) in angles.iter().zip(clip.root_translation()) {
        data.extend_from_slice(pose);
        if include_root_translation {
            data.extend_from_slice(root);
        }
    }
    SampledCurve::new(n, data, clip.duration())
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + s * (b - a)
}

/// Linear resampling of a row sequence to `count` rows. Output row `j` sits
/// at input position `j (m - 1) / (count - 1)`; rows that land exactly on an
/// input row copy it.
fn resample_rows<const W: usize>(rows: &[[f64; W]], count: usize) -> Vec<[f64; W]> {
    let m = rows.len();
    (0..count)
        .map(|j| {
            let num = j * (m - 1);
            let (i, rem) = (num / (count - 1), num % (count - 1));
            if rem == 0 {
                return rows[i];
            }
            let s = rem as f64 / (count - 1) as f64;
            std::array::from_fn(|k| lerp(rows[i][k], rows[i + 1][k], s))
        })
        .collect()
}

/// Inverse of [`clip_to_curve`]: angles are reduced into `(-π, π]`.
///
/// A curve of dimension `n + 3` supplies the root translation. Otherwise it
/// is taken from `template`, linearly resampled if the sample counts differ.
pub fn curve_to_clip(curve: &SampledCurve, template: &AnimationClip) -> Result<AnimationClip> {
    let n = template.dof();
    let with_root = match curve.dim() {
        d if d == n => false,
        d if d == n + 3 => true,
        d => return Err(Error::DimensionMismatch { expected: n, found: d }),
    };
    let m = curve.len();
    let frames: Vec<Vec<f64>> = curve
        .samples()
        .map(|s| s[..n].iter().map(|&a| wrap_angle(a)).collect())
        .collect();
    let root = if with_root {
        curve.samples().map(|s| [s[n], s[n + 1], s[n + 2]]).collect()
    } else if template.frame_count() == m {
        template.root_translation().to_vec()
    } else {
        resample_rows(template.root_translation(), m)
    };
    AnimationClip::new(template.skeleton().clone(), frames, root, curve.dt())
}

/// Uniform resampling to `frame_count` frames by linear interpolation of the
/// unwrapped angles. Duration and the first and last frames are preserved.
pub fn resample_clip(clip: &AnimationClip, frame_count: usize) -> Result<AnimationClip> {
    if frame_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "frame count must be at least 2, got {frame_count}"
        )));
    }
    let m = clip.frame_count();
    if frame_count == m {
        return Ok(clip.clone());
    }
    let raw = clip.frames();
    let lifted = unwrap_angles(raw)?;
    let frames = (0..frame_count)
        .map(|j| {
            let num = j * (m - 1);
            let (i, rem) = (num / (frame_count - 1), num % (frame_count - 1));
            if rem == 0 {
                return raw[i].clone();
            }
            let s = rem as f64 / (frame_count - 1) as f64;
            // Interpolate the lifted increment, anchored at the raw value so
            // the channel stays near the source range.
            (0..clip.dof())
                .map(|k| raw[i][k] + s * (lifted[i + 1][k] - lifted[i][k]))
                .collect()
        })
        .collect();
    let root = resample_rows(clip.root_translation(), frame_count);
    let frame_time = clip.duration() / (frame_count - 1) as f64;
    AnimationClip::new(clip.skeleton().clone(), frames, root, frame_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mocap::{Bone, Channel, Skeleton};
    use std::sync::Arc;

    fn skeleton(dof: usize) -> Arc<Skeleton> {
        let channels = [Channel::Zrot, Channel::Xrot, Channel::Yrot][..dof].to_vec();
        Arc::new(
            Skeleton::new(vec![Bone {
                name: "root".into(),
                parent: None,
                offset: [0.0; 3],
                channels,
                end_site: Some([1.0, 0.0, 0.0]),
            }])
            .unwrap(),
        )
    }

    fn clip(rows: Vec<Vec<f64>>) -> AnimationClip {
        AnimationClip::from_frames(skeleton(rows[0].len()), rows, 0.1).unwrap()
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn unwrap_across_the_seam() {
        let c = clip_to_curve(&clip(vec![vec![3.0], vec![-3.0]]), false).unwrap();
        assert_eq!(c.sample(0), &[3.0]);
        assert!((c.sample(1)[0] - (-3.0 + TAU)).abs() < 1e-15);
        assert!((c.sample(1)[0] - 3.2832).abs() < 1e-4);
    }

    #[test]
    fn in_range_frames_are_verbatim() {
        let rows = vec![vec![0.1, -2.0], vec![0.5, -2.5], vec![1.0, -1.0]];
        let c = clip_to_curve(&clip(rows.clone()), false).unwrap();
        assert_eq!(c.data(), rows.concat().as_slice());
        assert!((c.duration() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn exact_pi_jump_is_ambiguous() {
        let err = clip_to_curve(&clip(vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.2, PI]]), false).unwrap_err();
        assert!(matches!(err, Error::AmbiguousUnwrap { channel: 1, frame: 2 }));
    }

    #[test]
    fn two_frames_give_two_samples() {
        let c = clip_to_curve(&clip(vec![vec![0.0], vec![0.3]]), false).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.duration() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn root_translation_is_appended_and_restored() {
        let src = AnimationClip::new(
            skeleton(1),
            vec![vec![0.0], vec![0.2], vec![0.4]],
            vec![[0.0, 1.0, 2.0], [0.5, 1.0, 2.0], [1.0, 1.0, 2.0]],
            0.1,
        )
        .unwrap();
        let c = clip_to_curve(&src, true).unwrap();
        assert_eq!(c.dim(), 4);
        assert_eq!(c.sample(1), &[0.2, 0.5, 1.0, 2.0]);
        assert_eq!(curve_to_clip(&c, &src).unwrap(), src);
    }

    #[test]
    fn curve_to_clip_roundtrip_mod_two_pi() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![wrap_angle(0.5 * i as f64), -0.1 * i as f64])
            .collect();
        let src = clip(rows);
        let back = curve_to_clip(&clip_to_curve(&src, false).unwrap(), &src).unwrap();
        for (a, b) in src.frames().iter().flatten().zip(back.frames().iter().flatten()) {
            assert!(wrap_angle(a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_curve_gives_constant_clip() {
        let src = clip(vec![vec![0.0, 0.0]; 3]);
        let c = SampledCurve::new(2, [0.3, -0.2].repeat(4), 0.3).unwrap();
        let out = curve_to_clip(&c, &src).unwrap();
        assert_eq!(out.frame_count(), 4);
        assert!(out.frames().iter().all(|f| f == &[0.3, -0.2]));
    }

    #[test]
    fn curve_dimension_must_match() {
        let src = clip(vec![vec![0.0, 0.0]; 3]);
        let c = SampledCurve::new(3, vec![0.0; 9], 0.2).unwrap();
        assert!(matches!(
            curve_to_clip(&c, &src),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn resample_linear_ramp() {
        let out = resample_clip(&clip(vec![vec![0.0], vec![0.5], vec![1.0]]), 5).unwrap();
        let got: Vec<f64> = out.frames().iter().map(|f| f[0]).collect();
        assert_eq!(got, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!((out.duration() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn resample_same_count_is_identity() {
        let src = clip(vec![vec![0.1], vec![0.7], vec![-0.3]]);
        assert_eq!(resample_clip(&src, 3).unwrap(), src);
        assert!(resample_clip(&src, 1).is_err());
    }

    #[test]
    fn resample_interpolates_across_the_seam() {
        let out = resample_clip(&clip(vec![vec![3.0], vec![-3.0]]), 3).unwrap();
        let mid = out.frames()[1][0];
        assert!((mid - PI).abs() < 1e-12);
    }

    #[test]
    fn resample_sinusoid_down_and_up() {
        // Linear interpolation error is at most h²/8 max|f''|.
        let f = |t: f64| 0.8 * (TAU * t).sin();
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![f(i as f64 / 99.0)]).collect();
        let src = AnimationClip::from_frames(skeleton(1), rows, 1.0 / 99.0).unwrap();
        let down = resample_clip(&src, 50).unwrap();
        let up = resample_clip(&down, 100).unwrap();
        let h = 1.0 / 49.0;
        let bound = h * h / 8.0 * 0.8 * TAU * TAU + (1.0f64 / 99.0).powi(2) / 8.0 * 0.8 * TAU * TAU;
        for (i, fr) in up.frames().iter().enumerate() {
            assert!((fr[0] - f(i as f64 / 99.0)).abs() <= bound, "frame {i}");
        }
    }
}
