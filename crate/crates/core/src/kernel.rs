//! Pair kernels ρ(x, y) built from ball masses or powers of distance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::ConvexBody;
use crate::error::{Error, Result};
use crate::space::{BallIndex, MetricMeasureSpace};

/// Choice of kernel. Ball-mass kernels use closed balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum KernelSpec {
    /// μ(B̄(x, d(x, y)))
    Rho1,
    /// μ(B̄(y, d(x, y)))
    Rho2,
    Sum,
    /// √(ρ1 ρ2)
    Geom,
    /// (ρ1 + ρ2) / (ρ1 ρ2)
    Harm,
    /// d(x, y)^N
    Ahlfors(f64),
    /// ‖x − y‖_K^N with `body` as K; None means the space's own body or the
    /// Euclidean ball.
    GaugeAhlfors {
        exponent: f64,
        body: Option<ConvexBody>,
    },
}

impl KernelSpec {
    pub fn gauge_ahlfors(exponent: f64) -> Self {
        KernelSpec::GaugeAhlfors { exponent, body: None }
    }

    /// Whether evaluation reads ball masses.
    pub fn uses_balls(&self) -> bool {
        matches!(
            self,
            KernelSpec::Rho1 | KernelSpec::Rho2 | KernelSpec::Sum | KernelSpec::Geom | KernelSpec::Harm
        )
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Rho1 => f.write_str("rho1"),
            KernelSpec::Rho2 => f.write_str("rho2"),
            KernelSpec::Sum => f.write_str("sum"),
            KernelSpec::Geom => f.write_str("geom"),
            KernelSpec::Harm => f.write_str("harm"),
            KernelSpec::Ahlfors(n) => write!(f, "ahlfors:{n}"),
            KernelSpec::GaugeAhlfors { exponent, .. } => write!(f, "gauge-ahlfors:{exponent}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let exponent = |text: &str| -> Result<f64> {
            let v: f64 = text
                .parse()
                .map_err(|_| Error::InvalidKernel(format!("bad exponent in {s:?}")))?;
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(Error::InvalidKernel(format!("exponent must be positive in {s:?}")))
            }
        };
        match s.trim() {
            "rho1" => Ok(KernelSpec::Rho1),
            "rho2" => Ok(KernelSpec::Rho2),
            "sum" => Ok(KernelSpec::Sum),
            "geom" => Ok(KernelSpec::Geom),
            "harm" => Ok(KernelSpec::Harm),
            other => {
                if let Some(rest) = other.strip_prefix("gauge-ahlfors:") {
                    Ok(KernelSpec::gauge_ahlfors(exponent(rest)?))
                } else if let Some(rest) = other.strip_prefix("ahlfors:") {
                    Ok(KernelSpec::Ahlfors(exponent(rest)?))
                } else {
                    Err(Error::InvalidKernel(format!(
                        "unknown kernel {s:?}; expected rho1, rho2, sum, geom, harm, ahlfors:N or gauge-ahlfors:N"
                    )))
                }
            }
        }
    }
}

impl From<KernelSpec> for String {
    fn from(k: KernelSpec) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for KernelSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Rho1,
    Rho2,
    Sum,
    Geom,
    Harm,
    Ahlfors(f64),
    Gauge(f64, ConvexBody),
}

/// A kernel bound to a space, evaluated on off-diagonal pairs.
#[derive(Debug, Clone)]
pub struct PairRho<'a> {
    space: &'a MetricMeasureSpace,
    index: Option<&'a BallIndex>,
    kind: Kind,
}

pub fn pair_rho<'a>(space: &'a MetricMeasureSpace, kernel: &KernelSpec) -> Result<PairRho<'a>> {
    let kind = match kernel {
        KernelSpec::Rho1 => Kind::Rho1,
        KernelSpec::Rho2 => Kind::Rho2,
        KernelSpec::Sum => Kind::Sum,
        KernelSpec::Geom => Kind::Geom,
        KernelSpec::Harm => Kind::Harm,
        KernelSpec::Ahlfors(n) => Kind::Ahlfors(*n),
        KernelSpec::GaugeAhlfors { exponent, body } => {
            let dim = space
                .displacement(0, 1)
                .ok_or_else(|| Error::InvalidKernel("gauge-ahlfors needs a space with coordinates".into()))?
                .len();
            let body = match (body, space.gauge_body()) {
                (Some(b), _) => b.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => ConvexBody::ball(dim)?,
            };
            body.validate()?;
            if body.dim() != dim {
                return Err(Error::InvalidKernel(format!(
                    "body dimension {} does not match space dimension {dim}",
                    body.dim()
                )));
            }
            Kind::Gauge(*exponent, body)
        }
    };
    let index = kernel.uses_balls().then(|| space.ball_index());
    Ok(PairRho { space, index, kind })
}

impl PairRho<'_> {
    /// ρ(x, y) for x ≠ y.
    pub fn eval(&self, x: usize, y: usize) -> Result<f64> {
        self.space.check_point(x)?;
        self.space.check_point(y)?;
        if x == y {
            return Err(Error::Diagonal(x));
        }
        Ok(self.get(x, y))
    }

    /// ρ(x, y) without bounds or diagonal checks, for pair loops.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        let idx = || self.index.expect("ball kernels carry the index");
        match &self.kind {
            Kind::Rho1 => idx().rho1(x, y),
            Kind::Rho2 => idx().rho2(x, y),
            Kind::Sum => idx().rho1(x, y) + idx().rho2(x, y),
            Kind::Geom => (idx().rho1(x, y) * idx().rho2(x, y)).sqrt(),
            Kind::Harm => {
                let (a, b) = (idx().rho1(x, y), idx().rho2(x, y));
                (a + b) / (a * b)
            }
            Kind::Ahlfors(n) => pow(self.space.distance(x, y), *n),
            Kind::Gauge(n, body) => {
                let mut v = [0.0; 3];
                let dim = self.space.displacement_into(x, y, &mut v);
                pow(body.gauge(&v[..dim]), *n)
            }
        }
    }
}

#[inline]
fn pow(d: f64, n: f64) -> f64 {
    if n == 1.0 {
        d
    } else if n == 2.0 {
        d * d
    } else {
        d.powf(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceSpec};
    use std::f64::consts::PI;

    #[test]
    fn parse_round_trip() {
        for s in [
            "rho1",
            "rho2",
            "sum",
            "geom",
            "harm",
            "ahlfors:1",
            "ahlfors:2.5",
            "gauge-ahlfors:2",
        ] {
            let k: KernelSpec = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("ahlfors:-1".parse::<KernelSpec>().is_err());
        assert!("gauss".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn circle_rho1_adjacent() {
        let s = build_space(&SpaceSpec::Circle { n: 4 }).unwrap();
        let rho = pair_rho(&s, &KernelSpec::Rho1).unwrap();
        assert!((rho.eval(0, 1).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!(matches!(rho.eval(2, 2), Err(Error::Diagonal(2))));
    }

    #[test]
    fn interval_ahlfors() {
        let s = build_space(&SpaceSpec::interval(2)).unwrap();
        let rho = pair_rho(&s, &KernelSpec::Ahlfors(1.0)).unwrap();
        assert_eq!(rho.eval(0, 1).unwrap(), 0.5);
    }

    #[test]
    fn gauge_ahlfors_on_torus_matches_euclidean_ahlfors() {
        let s = build_space(&SpaceSpec::Torus2d { nx: 8, ny: 8 }).unwrap();
        let g = pair_rho(&s, &KernelSpec::gauge_ahlfors(2.0)).unwrap();
        let a = pair_rho(&s, &KernelSpec::Ahlfors(2.0)).unwrap();
        for (x, y) in [(0, 7), (3, 60), (12, 45)] {
            assert!((g.get(x, y) - a.get(x, y)).abs() < 1e-15);
        }
    }
}
