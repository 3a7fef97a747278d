use crate::curve::{project_closed, srv_inverse, srv_transform, Domain, SampledCurve, SrvCurve};
use crate::error::{Error, Result};
use crate::geodesic::{path_straightening, sphere_geodesic, GeodesicPath, StraightenOptions};
use crate::mocap::{clip_to_curve, curve_to_clip, AnimationClip};
use crate::shape::{optimal_reparametrization, ShapeOptions};

/// Where the blending geodesic is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// Sphere of open curves (spherical interpolation).
    Open,
    /// Manifold of closed curves (path straightening).
    Closed,
    /// Closed curves modulo reparametrization: `b` is aligned to `a` first.
    Shape,
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Space::Open => "open",
            Space::Closed => "closed",
            Space::Shape => "shape",
        })
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Space::Open),
            "closed" => Ok(Space::Closed),
            "shape" => Ok(Space::Shape),
            other => Err(Error::InvalidArgument(format!("unknown space `{other}`"))),
        }
    }
}

/// Parameters of [`blend`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlendOptions {
    pub space: Space,
    pub shape: ShapeOptions,
    pub include_root_translation: bool,
}

impl Default for BlendOptions {
    fn default() -> Self {
        BlendOptions {
            space: Space::Closed,
            shape: ShapeOptions::default(),
            include_root_translation: false,
        }
    }
}

fn straighten(opts: &BlendOptions) -> &StraightenOptions {
    &opts.shape.straighten
}

/// A geodesic between two clips, ready to be sampled at any `s`.
#[derive(Debug, Clone)]
pub struct BlendPath {
    a: AnimationClip,
    b: AnimationClip,
    path: GeodesicPath,
    /// `c - R⁻¹[α(0)]` and `c - R⁻¹[α(1)]`: what the endpoint SRVs fail to
    /// reproduce. `None` when the endpoint is a reparametrized copy.
    residual_a: Vec<f64>,
    residual_b: Option<Vec<f64>>,
    opts: BlendOptions,
}

fn residual(curve: &SampledCurve, srv: &SrvCurve) -> Result<Vec<f64>> {
    let back = srv_inverse(srv)?;
    Ok(curve.data().iter().zip(back.data()).map(|(x, y)| x - y).collect())
}

fn endpoint(curve: &SampledCurve, domain: Domain, opts: &BlendOptions) -> Result<SrvCurve> {
    let srv = srv_transform(curve, Domain::Open)?;
    match domain {
        Domain::Open => Ok(srv),
        Domain::Closed => {
            let st = straighten(opts);
            Ok(project_closed(&srv, st.epsilon, st.projection_max_iter)?.srv)
        }
    }
}

impl BlendPath {
    /// Computes the geodesic from `a` to `b`. Both clips need the same
    /// skeleton topology and frame count.
    pub fn new(a: &AnimationClip, b: &AnimationClip, opts: &BlendOptions) -> Result<Self> {
        if !a.skeleton().same_topology(b.skeleton()) {
            return Err(Error::ShapeMismatch("clips use different skeletons".into()));
        }
        if a.frame_count() != b.frame_count() {
            return Err(Error::ShapeMismatch(format!(
                "frame counts differ ({} vs {}); resample first",
                a.frame_count(),
                b.frame_count()
            )));
        }
        let root = opts.include_root_translation;
        let ca = clip_to_curve(a, root)?;
        // Both curves live on `a`'s time axis; values are unaffected.
        let cb = SampledCurve::new(ca.dim(), clip_to_curve(b, root)?.into_data(), ca.duration())?;
        let domain = match opts.space {
            Space::Open => Domain::Open,
            Space::Closed | Space::Shape => Domain::Closed,
        };
        let qa = endpoint(&ca, domain, opts)?;
        let qb = endpoint(&cb, domain, opts)?;
        let residual_a = residual(&ca, &qa)?;
        let (path, residual_b) = match opts.space {
            Space::Open => (sphere_geodesic(&qa, &qb, 1)?, Some(residual(&cb, &qb)?)),
            Space::Closed => (
                path_straightening(&qa, &qb, straighten(opts))?,
                Some(residual(&cb, &qb)?),
            ),
            Space::Shape => {
                let al = optimal_reparametrization(&qa, &qb, &opts.shape)?;
                let start = cb.sample(al.reparam.start_offset()).to_vec();
                let target = al.aligned.with_basepoint(start)?;
                let residual_b = if al.reparam.is_identity() {
                    Some(residual(&cb, &qb)?)
                } else {
                    None
                };
                (path_straightening(&qa, &target, straighten(opts))?, residual_b)
            }
        };
        Ok(BlendPath {
            a: a.clone(),
            b: b.clone(),
            path,
            residual_a,
            residual_b,
            opts: *opts,
        })
    }

    pub fn geodesic(&self) -> &GeodesicPath {
        &self.path
    }

    /// The clip at blend parameter `s ∈ [0, 1]`. Length, starting pose, frame
    /// time and root translation are interpolated linearly.
    pub fn at(&self, s: f64) -> Result<AnimationClip> {
        let srv = self.path.evaluate(s)?;
        let curve = srv_inverse(&srv)?;
        let mut data = curve.into_data();
        for (i, v) in data.iter_mut().enumerate() {
            *v += (1.0 - s) * self.residual_a[i];
            if let Some(rb) = &self.residual_b {
                *v += s * rb[i];
            }
        }
        let m = self.a.frame_count();
        let frame_time = self.a.frame_time() + s * (self.b.frame_time() - self.a.frame_time());
        let curve = SampledCurve::new(srv.dim(), data, frame_time * (m - 1) as f64)?;
        let out = curve_to_clip(&curve, &self.a)?;
        if self.opts.include_root_translation {
            return Ok(out);
        }
        let root = self
            .a
            .root_translation()
            .iter()
            .zip(self.b.root_translation())
            .map(|(x, y)| std::array::from_fn(|k| x[k] + s * (y[k] - x[k])))
            .collect();
        AnimationClip::new(self.a.skeleton().clone(), out.frames().to_vec(), root, out.frame_time())
    }
}

/// Blends two clips along the geodesic between their SRV curves.
///
/// `s = 0` reproduces `a` and `s = 1` reproduces `b` (in [`Space::Shape`],
/// `b` reparametrized to align with `a`).
pub fn blend(a: &AnimationClip, b: &AnimationClip, s: f64, opts: &BlendOptions) -> Result<AnimationClip> {
    BlendPath::new(a, b, opts)?.at(s)
}
