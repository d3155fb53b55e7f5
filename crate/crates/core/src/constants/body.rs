use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An origin-symmetric convex body, used as the unit ball of a norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConvexBody {
    /// Euclidean unit ball in dimension 1, 2 or 3.
    Ball { dim: usize },
    /// Axis-aligned ellipse with semi-axes `a` (x) and `b` (y).
    Ellipse { a: f64, b: f64 },
    /// Convex polygon, vertices in counterclockwise order.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl ConvexBody {
    pub fn ball(dim: usize) -> Result<Self> {
        let body = ConvexBody::Ball { dim };
        body.validate()?;
        Ok(body)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        let body = ConvexBody::Ellipse { a, b };
        body.validate()?;
        Ok(body)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let body = ConvexBody::Polygon { vertices };
        body.validate()?;
        Ok(body)
    }

    /// The square [-h, h]², whose gauge is the max-norm scaled by 1/h.
    pub fn square(h: f64) -> Result<Self> {
        Self::polygon(vec![[-h, -h], [h, -h], [h, h], [-h, h]])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBody::Ball { dim } => {
                if !(1..=3).contains(dim) {
                    return Err(Error::UnsupportedDimension(*dim));
                }
            }
            ConvexBody::Ellipse { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(Error::InvalidBody(format!(
                        "ellipse semi-axes must be positive, got ({a}, {b})"
                    )));
                }
            }
            ConvexBody::Polygon { vertices } => validate_polygon(vertices)?,
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { dim } => *dim,
            _ => 2,
        }
    }

    /// Minkowski gauge inf{λ > 0 : v ∈ λK}.
    pub fn gauge(&self, v: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { .. } => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            ConvexBody::Ellipse { a, b } => ((v[0] / a).powi(2) + (v[1] / b).powi(2)).sqrt(),
            ConvexBody::Polygon { vertices } => {
                // The ray from the origin through v leaves K across the edge
                // whose supporting line n·x = c maximizes n·v / c.
                let m = vertices.len();
                (0..m)
                    .map(|i| {
                        let (n, c) = edge_line(vertices[i], vertices[(i + 1) % m]);
                        (n[0] * v[0] + n[1] * v[1]) / c
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Support function sup_{x ∈ K} ξ·x, the dual norm of the gauge.
    pub fn dual_norm(&self, xi: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { .. } => xi.iter().map(|x| x * x).sum::<f64>().sqrt(),
            ConvexBody::Ellipse { a, b } => ((a * xi[0]).powi(2) + (b * xi[1]).powi(2)).sqrt(),
            ConvexBody::Polygon { vertices } => vertices
                .iter()
                .map(|v| v[0] * xi[0] + v[1] * xi[1])
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0),
        }
    }

    /// Boundary distance along the unit direction at angle θ (planar bodies).
    pub fn radial(&self, theta: f64) -> f64 {
        1.0 / self.gauge(&[theta.cos(), theta.sin()])
    }

    /// Angles where the radial function has kinks.
    pub(crate) fn kink_angles(&self) -> Vec<f64> {
        match self {
            ConvexBody::Polygon { vertices } => vertices.iter().map(|v| v[1].atan2(v[0])).collect(),
            _ => Vec::new(),
        }
    }
}

/// Outward normal and offset of the line through a → b (counterclockwise).
fn edge_line(a: [f64; 2], b: [f64; 2]) -> ([f64; 2], f64) {
    let n = [b[1] - a[1], a[0] - b[0]];
    let c = n[0] * a[0] + n[1] * a[1];
    (n, c)
}

fn validate_polygon(vertices: &[[f64; 2]]) -> Result<()> {
    let m = vertices.len();
    if m < 3 {
        return Err(Error::InvalidBody(format!(
            "polygon needs at least 3 vertices, got {m}"
        )));
    }
    if vertices.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidBody("non-finite polygon vertex".into()));
    }
    let scale = vertices.iter().map(|v| v[0].abs().max(v[1].abs())).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1.0);
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let c = vertices[(i + 2) % m];
        let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if turn <= 0.0 {
            return Err(Error::InvalidBody(format!(
                "vertices are not in strictly convex counterclockwise position at vertex {}",
                (i + 1) % m
            )));
        }
        let (_, offset) = edge_line(a, b);
        if offset <= 0.0 {
            return Err(Error::InvalidBody(
                "origin is not strictly interior to the polygon".into(),
            ));
        }
    }
    for v in vertices {
        let has_antipode = vertices
            .iter()
            .any(|w| (w[0] + v[0]).abs() <= tol && (w[1] + v[1]).abs() <= tol);
        if !has_antipode {
            return Err(Error::AsymmetricBody(*v));
        }
    }
    Ok(())
}

/// Minkowski gauge distance ‖x − y‖_K.
pub fn gauge_distance(body: &ConvexBody, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != body.dim() || y.len() != body.dim() {
        return Err(Error::UnsupportedDimension(x.len()));
    }
    let v: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok(body.gauge(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_gauge_is_euclidean() {
        let k = ConvexBody::ball(2).unwrap();
        let d = gauge_distance(&k, &[1.0, 2.0], &[4.0, 6.0]).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn square_gauge_is_max_norm() {
        let k = ConvexBody::square(1.0).unwrap();
        let d = gauge_distance(&k, &[3.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!((d - 3.0).abs() < 1e-15);
        let d = gauge_distance(&k, &[-0.5, 2.0], &[0.0, 0.0]).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ellipse_gauge_scales_axes() {
        let k = ConvexBody::ellipse(2.0, 1.0).unwrap();
        assert_eq!(gauge_distance(&k, &[2.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(gauge_distance(&k, &[0.0, 0.0], &[0.0, 3.0]).unwrap(), 3.0);
    }

    #[test]
    fn rejects_asymmetric_and_nonconvex_polygons() {
        let tri = ConvexBody::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [0.0, 1.0]]);
        assert!(matches!(tri, Err(Error::AsymmetricBody(_))));
        let cw = ConvexBody::polygon(vec![[-1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [1.0, -1.0]]);
        assert!(matches!(cw, Err(Error::InvalidBody(_))));
        let off = ConvexBody::polygon(vec![[1.0, 1.0], [2.0, 1.0], [2.0, 2.0], [1.0, 2.0]]);
        assert!(off.is_err());
        assert!(ConvexBody::ball(4).is_err());
        assert!(ConvexBody::ellipse(0.0, 1.0).is_err());
    }

    #[test]
    fn dual_norm_of_square_is_l1() {
        let k = ConvexBody::square(1.0).unwrap();
        assert!((k.dual_norm(&[3.0, -2.0]) - 5.0).abs() < 1e-15);
        let e = ConvexBody::ellipse(2.0, 1.0).unwrap();
        assert!((e.dual_norm(&[1.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hexagon_gauge_on_vertices_is_one() {
        let verts: Vec<[f64; 2]> = (0..6)
            .map(|k| {
                let a = std::f64::consts::PI / 3.0 * k as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let k = ConvexBody::polygon(verts.clone()).unwrap();
        for v in &verts {
            assert!((k.gauge(v) - 1.0).abs() < 1e-14);
        }
    }
}
