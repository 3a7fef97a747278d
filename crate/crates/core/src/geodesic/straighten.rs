use super::{energy, path_length, sphere_geodesic, GeodesicPath, Status};
use crate::curve::{norm, project_closed, project_tangent, Domain, SrvCurve, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};

/// Parameters of [`path_straightening`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StraightenOptions {
    /// Number of path segments `k`.
    pub segments: usize,
    pub max_iter: usize,
    /// Stop once the relative energy decrease of a step drops below this.
    pub tol: f64,
    /// Closure tolerance for the projection of path points.
    pub epsilon: f64,
    pub projection_max_iter: usize,
    /// Step halvings tried before giving up.
    pub max_halvings: usize,
}

impl Default for StraightenOptions {
    fn default() -> Self {
        StraightenOptions {
            segments: 16,
            max_iter: 100,
            tol: 1e-6,
            epsilon: DEFAULT_EPSILON,
            projection_max_iter: DEFAULT_MAX_ITER,
            max_halvings: 20,
        }
    }
}

fn check_endpoint(srv: &SrvCurve, epsilon: f64) -> Result<()> {
    if srv.domain() != Domain::Closed {
        return Err(Error::InvalidArgument("path straightening needs closed curves".into()));
    }
    let gap = norm(&srv.closure_residual());
    if gap >= epsilon {
        return Err(Error::NotClosed {
            gap,
            tolerance: epsilon,
        });
    }
    Ok(())
}

/// Solves `k T h_j = g_j` for the interior points, where `T` is the
/// second-difference matrix `tridiag(-1, 2, -1)`. This turns the L² energy
/// gradient into the gradient for the metric `∫⟨∂τ u, ∂τ v⟩ dτ` on paths with
/// fixed endpoints.
fn precondition(k: usize, g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let kf = k as f64;
    // Thomas algorithm with scalar coefficients shared by every component.
    let mut c = vec![0.0; n];
    let mut d: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let denom = 2.0 * kf + if i > 0 { kf * c[i - 1] } else { 0.0 };
        c[i] = -kf / denom;
        let row: Vec<f64> = match d.last() {
            Some(prev) => g[i].iter().zip(prev).map(|(x, p)| (x + kf * p) / denom).collect(),
            None => g[i].iter().map(|x| x / denom).collect(),
        };
        d.push(row);
    }
    for i in (0..n.saturating_sub(1)).rev() {
        let (head, tail) = d.split_at_mut(i + 1);
        let ci = c[i];
        head[i].iter_mut().zip(&tail[0]).for_each(|(x, y)| *x -= ci * y);
    }
    d
}

/// Geodesic between two closed curves by gradient descent on the discrete
/// path energy `E = ½ k Σ ‖α_{j+1} - α_j‖²`.
///
/// The path starts as the spherical geodesic with every interior point
/// projected onto the closed-curve manifold. Each iteration takes the energy
/// gradient at the interior points, projects it to their tangent spaces,
/// smooths it along the path (see [`precondition`]) and projects again. The
/// step is found by halving from 1; trial points are renormalized and
/// projected back onto the manifold, and a trial is accepted only if it
/// lowers the energy. The endpoints are never modified.
pub fn path_straightening(beta: &SrvCurve, gamma: &SrvCurve, opts: &StraightenOptions) -> Result<GeodesicPath> {
    let k = opts.segments;
    if k < 2 {
        return Err(Error::InvalidArgument(
            "path straightening needs at least 2 segments".into(),
        ));
    }
    check_endpoint(beta, opts.epsilon)?;
    check_endpoint(gamma, opts.epsilon)?;
    let mut path = sphere_geodesic(beta, gamma, k)?.points;
    if beta.q() == gamma.q() {
        return GeodesicPath::with_trace(path, vec![0.0], 0, Status::Converged);
    }
    for p in &mut path[1..k] {
        *p = project_closed(p, opts.epsilon, opts.projection_max_iter)?.srv;
    }

    let ops = beta.field_ops();
    let mut e = energy(&ops, path.iter().map(SrvCurve::q));
    let mut trace = vec![e];
    let mut iterations = 0;
    let mut status = Status::MaxIterations;
    let kf = k as f64;
    while iterations < opts.max_iter {
        let grads = (1..k)
            .map(|j| {
                let g: Vec<f64> = path[j]
                    .q()
                    .iter()
                    .zip(path[j - 1].q().iter().zip(path[j + 1].q()))
                    .map(|(x, (a, b))| kf * (2.0 * x - a - b))
                    .collect();
                project_tangent(&path[j], &g)
            })
            .collect::<Result<Vec<_>>>()?;
        let h = precondition(k, &grads)
            .iter()
            .enumerate()
            .map(|(i, h)| project_tangent(&path[i + 1], h))
            .collect::<Result<Vec<_>>>()?;
        if h.iter().all(|v| ops.norm(v) == 0.0) {
            status = Status::Converged;
            break;
        }

        let mut accepted = None;
        let mut eta = 1.0;
        for _ in 0..=opts.max_halvings {
            if let Some((trial, et)) = trial_step(&path, &h, eta, opts) {
                if et < e {
                    accepted = Some((trial, et));
                    break;
                }
            }
            eta *= 0.5;
        }
        let Some((trial, et)) = accepted else {
            status = Status::LineSearchExhausted;
            break;
        };
        let rel = (e - et) / e;
        path = trial;
        e = et;
        trace.push(e);
        iterations += 1;
        if rel < opts.tol {
            status = Status::Converged;
            break;
        }
    }
    GeodesicPath::with_trace(path, trace, iterations, status)
}

/// Moves every interior point by `-eta h_j` and returns the new path with its
/// energy, or `None` if a point fails to project.
fn trial_step(path: &[SrvCurve], h: &[Vec<f64>], eta: f64, opts: &StraightenOptions) -> Option<(Vec<SrvCurve>, f64)> {
    let k = path.len() - 1;
    let ops = path[0].field_ops();
    let mut out = path.to_vec();
    for j in 1..k {
        let mut q: Vec<f64> = path[j].q().iter().zip(&h[j - 1]).map(|(x, d)| x - eta * d).collect();
        ops.normalize(&mut q);
        out[j] = project_closed(
            &path[j].with_q(q, Domain::Closed),
            opts.epsilon,
            opts.projection_max_iter,
        )
        .ok()?
        .srv;
    }
    let e = energy(&ops, out.iter().map(SrvCurve::q));
    Some((out, e))
}

/// Length of the straightened path between two closed curves.
pub fn closed_distance(beta: &SrvCurve, gamma: &SrvCurve, opts: &StraightenOptions) -> Result<f64> {
    Ok(path_length(&path_straightening(beta, gamma, opts)?))
}
