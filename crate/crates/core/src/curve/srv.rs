use super::{dist, norm, weights, Domain, SampledCurve, SrvCurve};
use crate::error::{Error, Result};

/// Relative tolerance on `‖c(T) - c(0)‖ / length` for curves handed to
/// [`srv_transform`] as closed.
const CLOSED_INPUT_TOL: f64 = 1e-6;

/// Finite-difference velocity at every sample.
///
/// Open curves use central differences inside and second-order one-sided
/// stencils at the ends. Closed curves treat the `m - 1` distinct samples as
/// periodic; the velocity at the duplicated last sample equals the first.
fn velocities(curve: &SampledCurve, domain: Domain) -> Vec<f64> {
    let (m, n, dt) = (curve.len(), curve.dim(), curve.dt());
    let c = |i: usize| curve.sample(i);
    let mut d = vec![0.0; m * n];
    match domain {
        Domain::Open => {
            for i in 0..m {
                let row = &mut d[i * n..(i + 1) * n];
                for k in 0..n {
                    row[k] = if m == 2 {
                        (c(1)[k] - c(0)[k]) / dt
                    } else if i == 0 {
                        (-3.0 * c(0)[k] + 4.0 * c(1)[k] - c(2)[k]) / (2.0 * dt)
                    } else if i == m - 1 {
                        (3.0 * c(m - 1)[k] - 4.0 * c(m - 2)[k] + c(m - 3)[k]) / (2.0 * dt)
                    } else {
                        (c(i + 1)[k] - c(i - 1)[k]) / (2.0 * dt)
                    };
                }
            }
        }
        Domain::Closed => {
            let p = m - 1;
            for i in 0..p {
                let next = c((i + 1) % p);
                let prev = c((i + p - 1) % p);
                for k in 0..n {
                    d[i * n + k] = (next[k] - prev[k]) / (2.0 * dt);
                }
            }
            d.copy_within(0..n, p * n);
        }
    }
    d
}

/// Square-root velocity transform `q = ċ / sqrt(‖ċ‖)`, rescaled to unit L²
/// norm. The curve length is kept as the SRV's scale and `c(0)` as its
/// basepoint.
///
/// With `Domain::Closed` the curve must already close up (`c(T) ≈ c(0)`);
/// periodic differences then make `∫ q‖q‖` vanish exactly.
pub fn srv_transform(curve: &SampledCurve, domain: Domain) -> Result<SrvCurve> {
    let (m, n) = (curve.len(), curve.dim());
    if domain == Domain::Closed && m < 3 {
        return Err(Error::InvalidArgument("a closed curve needs at least 3 samples".into()));
    }
    let d = velocities(curve, domain);
    let speeds: Vec<f64> = d.chunks_exact(n).map(norm).collect();
    if let Some(i) = speeds.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Immersion { sample: i });
    }
    let w = weights(domain, m, curve.dt());
    let length: f64 = speeds.iter().zip(&w).map(|(s, w)| s * w).sum();
    if domain == Domain::Closed {
        let gap = curve.closure_gap();
        let tolerance = CLOSED_INPUT_TOL * length;
        if gap > tolerance {
            return Err(Error::NotClosed { gap, tolerance });
        }
    }
    let mut q = d;
    for (row, s) in q.chunks_exact_mut(n).zip(&speeds) {
        let f = 1.0 / (s * length).sqrt();
        row.iter_mut().for_each(|v| *v *= f);
    }
    Ok(SrvCurve::raw(
        n,
        q,
        domain,
        curve.sample(0).to_vec(),
        length,
        curve.duration(),
    ))
}

/// Inverse transform `c(t) = c₀ + L ∫₀ᵗ q‖q‖ ds` by cumulative trapezoid
/// quadrature.
pub fn srv_inverse(srv: &SrvCurve) -> Result<SampledCurve> {
    let (m, n) = (srv.len(), srv.dim());
    let h = 0.5 * srv.scale() * srv.dt();
    let f: Vec<f64> = srv
        .q()
        .chunks_exact(n)
        .flat_map(|row| {
            let r = norm(row);
            row.iter().map(move |v| v * r)
        })
        .collect();
    let mut c = Vec::with_capacity(m * n);
    c.extend_from_slice(srv.basepoint());
    for i in 1..m {
        let (a, b) = (&f[(i - 1) * n..i * n], &f[i * n..(i + 1) * n]);
        if norm(a) == 0.0 && norm(b) == 0.0 {
            return Err(Error::Immersion { sample: i });
        }
        for k in 0..n {
            let prev = c[(i - 1) * n + k];
            c.push(prev + h * (a[k] + b[k]));
        }
    }
    let curve = SampledCurve::new(n, c, srv.duration())?;
    // Rounding can only collapse a step whose increment underflows.
    for i in 1..m {
        if dist(curve.sample(i - 1), curve.sample(i)) == 0.0 {
            return Err(Error::Immersion { sample: i });
        }
    }
    Ok(curve)
}
