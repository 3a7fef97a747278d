//! Projection of an SRV curve onto the manifold of closed curves by Newton
//! iteration on the closure condition `∫ q‖q‖ dt = 0`.

use nalgebra::{DMatrix, DVector};

use super::{norm, Domain, SrvCurve};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 200;

/// `Σ wᵢ q(tᵢ)‖q(tᵢ)‖`.
pub fn closure_residual(dim: usize, q: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; dim];
    for (row, w) in q.chunks_exact(dim).zip(weights) {
        let s = w * norm(row);
        r.iter_mut().zip(row).for_each(|(acc, v)| *acc += s * v);
    }
    r
}

fn jacobian(dim: usize, q: &[f64], weights: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::<f64>::identity(dim, dim);
    for (row, &w) in q.chunks_exact(dim).zip(weights) {
        for a in 0..dim {
            let wa = 3.0 * w * row[a];
            for b in 0..dim {
                j[(a, b)] += wa * row[b];
            }
        }
    }
    j
}

/// Jacobian of the closure residual along the normal fields,
/// `J_ij = δ_ij + 3 ∫ q_i q_j dt`.
pub fn closure_jacobian(srv: &SrvCurve) -> DMatrix<f64> {
    jacobian(srv.dim(), srv.q(), &srv.weights())
}

/// Outcome of [`project_closed`].
#[derive(Debug, Clone)]
pub struct Projection {
    pub srv: SrvCurve,
    pub iterations: usize,
    /// `‖∫ q‖q‖ dt‖` of the result.
    pub residual: f64,
}

/// Projects `srv` onto the closed-curve manifold.
///
/// An open input is first made periodic by replacing its two end samples
/// with their mean. Each Newton step moves `q` along the `n` fields
/// `(qᵢ/‖q‖) q + ‖q‖ eᵢ` of the normal space by `β = -J⁻¹ r`, then rescales to
/// unit norm. Iteration stops once `‖r‖ < epsilon`.
pub fn project_closed(srv: &SrvCurve, epsilon: f64, max_iter: usize) -> Result<Projection> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let (m, n) = (srv.len(), srv.dim());
    if m < 3 {
        return Err(Error::InvalidArgument("a closed curve needs at least 3 samples".into()));
    }
    let mut q = srv.q().to_vec();
    let w = super::weights(Domain::Closed, m, srv.dt());
    let ops = super::FieldOps::new(n, w.clone());
    if srv.domain() == Domain::Open {
        for k in 0..n {
            let mean = 0.5 * (q[k] + q[(m - 1) * n + k]);
            q[k] = mean;
            q[(m - 1) * n + k] = mean;
        }
        ops.normalize(&mut q);
    }

    let mut iterations = 0;
    loop {
        let r = closure_residual(n, &q, &w);
        let residual = norm(&r);
        if residual < epsilon {
            return Ok(Projection {
                srv: srv.with_q(q, Domain::Closed),
                iterations,
                residual,
            });
        }
        if iterations == max_iter || !residual.is_finite() {
            return Err(Error::NoConvergence { iterations, residual });
        }
        let beta = jacobian(n, &q, &w)
            .cholesky()
            .ok_or(Error::SingularJacobian)?
            .solve(&-DVector::from_vec(r));
        for row in q.chunks_exact_mut(n) {
            let s = norm(row);
            if s == 0.0 {
                continue;
            }
            let along = row.iter().zip(beta.iter()).map(|(a, b)| a * b).sum::<f64>() / s;
            for (v, b) in row.iter_mut().zip(beta.iter()) {
                *v += along * *v + s * b;
            }
        }
        ops.normalize(&mut q);
        iterations += 1;
    }
}
