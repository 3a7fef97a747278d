use super::{norm, Domain, SrvCurve};
use crate::error::{Error, Result};

/// Weighted L² arithmetic on flat vector fields sampled on one grid.
#[derive(Debug, Clone)]
pub struct FieldOps {
    dim: usize,
    weights: Vec<f64>,
}

impl FieldOps {
    pub fn new(dim: usize, weights: Vec<f64>) -> Self {
        FieldOps { dim, weights }
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.chunks_exact(self.dim)
            .zip(b.chunks_exact(self.dim))
            .zip(&self.weights)
            .map(|((x, y), w)| w * x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>())
            .sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&d)
    }

    /// Scales `a` to unit norm in place and returns the previous norm.
    pub fn normalize(&self, a: &mut [f64]) -> f64 {
        let r = self.norm(a);
        if r > 0.0 {
            a.iter_mut().for_each(|v| *v /= r);
        }
        r
    }
}

fn check_layout(srv: &SrvCurve, v: &[f64]) -> Result<()> {
    if v.len() != srv.q().len() {
        return Err(Error::ShapeMismatch(format!(
            "vector field has {} values, curve has {}",
            v.len(),
            srv.q().len()
        )));
    }
    Ok(())
}

/// L² inner product `Σ wᵢ ⟨a(tᵢ), b(tᵢ)⟩`.
pub fn l2_inner(a: &SrvCurve, b: &SrvCurve) -> Result<f64> {
    a.same_layout(b)?;
    let rel = (a.duration() - b.duration()).abs() / a.duration().max(b.duration());
    if rel > 1e-9 {
        return Err(Error::ShapeMismatch(format!(
            "durations differ ({} vs {}); rescale to a common time length first",
            a.duration(),
            b.duration()
        )));
    }
    Ok(a.field_ops().inner(a.q(), b.q()))
}

/// Spanning fields of the normal space to the closed-curve manifold at `q`:
/// `q` itself followed by `(qᵢ/‖q‖) q + ‖q‖ eᵢ` for `i = 1..n`.
pub fn normal_space_basis(srv: &SrvCurve) -> Result<Vec<Vec<f64>>> {
    if srv.domain() != Domain::Closed {
        return Err(Error::InvalidArgument(
            "normal space basis is defined for closed curves".into(),
        ));
    }
    let n = srv.dim();
    let norms: Vec<f64> = srv.q().chunks_exact(n).map(norm).collect();
    if let Some(i) = norms.iter().position(|&r| r == 0.0) {
        return Err(Error::Immersion { sample: i });
    }
    let mut basis = Vec::with_capacity(n + 1);
    basis.push(srv.q().to_vec());
    for i in 0..n {
        let mut b = Vec::with_capacity(srv.q().len());
        for (row, &r) in srv.q().chunks_exact(n).zip(&norms) {
            let c = row[i] / r;
            b.extend(
                row.iter()
                    .enumerate()
                    .map(|(k, &v)| c * v + if k == i { r } else { 0.0 }),
            );
        }
        basis.push(b);
    }
    Ok(basis)
}

/// Orthonormalizes `vectors` (modified Gram–Schmidt, two passes), dropping
/// numerically dependent ones.
fn orthonormalize(ops: &FieldOps, vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        let original = ops.norm(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for e in &out {
                let c = ops.inner(&v, e);
                v.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
        if ops.normalize(&mut v) > 1e-10 * original {
            out.push(v);
        }
    }
    out
}

/// Orthogonal projection of a vector field onto the tangent space at `srv`.
///
/// Open curves: `v - ⟨v, q⟩ q`. Closed curves: `v` minus its component in
/// the span of [`normal_space_basis`].
pub fn project_tangent(srv: &SrvCurve, v: &[f64]) -> Result<Vec<f64>> {
    check_layout(srv, v)?;
    let ops = srv.field_ops();
    let mut out = v.to_vec();
    match srv.domain() {
        Domain::Open => {
            let c = ops.inner(v, srv.q()) / ops.inner(srv.q(), srv.q());
            out.iter_mut().zip(srv.q()).for_each(|(x, q)| *x -= c * q);
        }
        Domain::Closed => {
            let basis = orthonormalize(&ops, normal_space_basis(srv)?);
            for e in &basis {
                let c = ops.inner(&out, e);
                out.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
            let n = srv.dim();
            let m = srv.len();
            out.copy_within(0..n, (m - 1) * n);
        }
    }
    Ok(out)
}
