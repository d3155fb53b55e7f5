//! Euclidean limit constants and anisotropic norms.
//!
//! All integrals use composite Gauss–Legendre panels of order 64, graded
//! toward the zeros of ξ·x where the integrand |ξ·x|^p is not smooth, and
//! are recomputed at order 128 to produce an error estimate.

mod body;
pub mod quadrature;

use std::f64::consts::PI;

pub use body::{gauge_distance, ConvexBody};

use crate::error::{check_exponent, Error, Result};

/// A quadrature result with the order-doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

/// K_{p,N} = (1/p) ∫_{S^{N−1}} |ω·x|^p dH^{N−1}(x) with ω = e₁.
pub fn k_pn(p: f64, dim: usize) -> Result<f64> {
    Ok(k_pn_with_error(p, dim)?.value)
}

pub fn k_pn_with_error(p: f64, dim: usize) -> Result<Quadrature> {
    check_exponent(p)?;
    match dim {
        // S⁰ = {−1, 1}
        1 => Ok(Quadrature {
            value: [1.0f64, -1.0].iter().map(|x| x.abs().powf(p)).sum::<f64>() / p,
            error_estimate: 0.0,
        }),
        2 => {
            let f = |theta: f64| theta.cos().abs().powf(p);
            let (v, e) = quadrature::piecewise(&f, &[0.0, PI / 2.0, 1.5 * PI, 2.0 * PI]);
            Ok(Quadrature {
                value: v / p,
                error_estimate: e / p,
            })
        }
        3 => {
            // polar angle φ measured from e₁; the azimuth integrand is constant
            let inner = |phi: f64| phi.cos().abs().powf(p) * phi.sin();
            let (polar, e) = quadrature::piecewise(&inner, &[0.0, PI / 2.0, PI]);
            let azimuth = quadrature::rule(quadrature::ORDER).integrate(|_| 1.0, 0.0, 2.0 * PI);
            Ok(Quadrature {
                value: polar * azimuth / p,
                error_estimate: e * azimuth / p,
            })
        }
        other => Err(Error::UnsupportedDimension(other)),
    }
}

/// ‖ξ‖_{Z*_p K} = ((N+p)/p ∫_K |ξ·x|^p dx)^{1/p}.
pub fn zstar_norm(body: &ConvexBody, p: f64, xi: &[f64]) -> Result<f64> {
    Ok(zstar_norm_with_error(body, p, xi)?.value)
}

pub fn zstar_norm_with_error(body: &ConvexBody, p: f64, xi: &[f64]) -> Result<Quadrature> {
    check_exponent(p)?;
    body.validate()?;
    let dim = body.dim();
    if xi.len() != dim {
        return Err(Error::InvalidParameter {
            name: "xi",
            value: xi.len() as f64,
            reason: "vector dimension must match the body",
        });
    }
    let norm_xi = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_xi == 0.0 {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let (integral, err) = match (body, dim) {
        (ConvexBody::Ball { .. }, 1) => {
            let f = |x: f64| (xi[0] * x).abs().powf(p);
            quadrature::piecewise(&f, &[-1.0, 0.0, 1.0])
        }
        (ConvexBody::Ball { .. }, 3) => {
            // rotate ξ onto e₁: ∫_{B³}|ξ·x|^p = |ξ|^p ∫₀¹ r^{p+2} dr ∫_{S²}|ω₁|^p
            let sphere = k_pn_with_error(p, 3)?;
            let scale = norm_xi.powf(p) * p / (p + 3.0);
            (sphere.value * scale, sphere.error_estimate * scale)
        }
        _ => planar_moment(body, p, xi),
    };
    let n = dim as f64;
    let value = ((n + p) / p * integral).powf(1.0 / p);
    // first-order propagation through the p-th root
    let error_estimate = if integral > 0.0 {
        value * err / (p * integral)
    } else {
        0.0
    };
    Ok(Quadrature { value, error_estimate })
}

/// ∫_K |ξ·x|^p dx for a planar body, integrating the radial direction in
/// closed form: (1/(p+2)) ∫ |ξ·θ̂|^p R(θ)^{p+2} dθ.
fn planar_moment(body: &ConvexBody, p: f64, xi: &[f64]) -> (f64, f64) {
    let theta0 = xi[1].atan2(xi[0]) + PI / 2.0;
    let mut breaks = vec![theta0, theta0 + PI, theta0 + 2.0 * PI];
    for a in body.kink_angles() {
        let mut a = a;
        while a < theta0 {
            a += 2.0 * PI;
        }
        while a >= theta0 + 2.0 * PI {
            a -= 2.0 * PI;
        }
        breaks.push(a);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let f = |theta: f64| {
        let dot = xi[0] * theta.cos() + xi[1] * theta.sin();
        dot.abs().powf(p) * body.radial(theta).powf(p + 2.0)
    };
    let (v, e) = quadrature::piecewise(&f, &breaks);
    (v / (p + 2.0), e / (p + 2.0))
}
