//! Parsers for the compact command-line forms of grids, spaces and bodies.

use anyhow::{anyhow, bail, Context, Result};
use nsl_core::constants::ConvexBody;
use nsl_core::SpaceSpec;

/// `a:b:step` (inclusive of b when it lies on the lattice) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
        if !v.is_finite() {
            bail!("`{s}` is not finite");
        }
        Ok(v)
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, step] = parts[..] else {
            bail!("range `{text}` must have the form start:stop:step");
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step == 0.0 || (b - a) * step < 0.0 {
            bail!("step {step} does not lead from {a} to {b}");
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            bail!("range `{text}` has {count} points");
        }
        // round away the drift of a + k·step so 0.5:0.99:0.01 ends at 0.99
        Ok((0..count)
            .map(|k| {
                let v = a + k as f64 * step;
                format!("{v:.12e}").parse().unwrap_or(v)
            })
            .collect())
    } else {
        text.split(',').map(num).collect()
    }
}

/// `ball`, `square`, `square:h`, `ellipse:a:b`.
pub fn parse_body(text: &str, dim: usize) -> Result<ConvexBody> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .with_context(|| format!("`{s}` in body `{text}` is not a number"))
    };
    let body = match parts[..] {
        ["ball"] => ConvexBody::ball(dim)?,
        ["square"] => ConvexBody::square(1.0)?,
        ["square", h] => ConvexBody::square(num(h)?)?,
        ["ellipse", a, b] => ConvexBody::ellipse(num(a)?, num(b)?)?,
        _ => bail!("unknown body `{text}`; use ball, square[:h] or ellipse:a:b"),
    };
    Ok(body)
}

/// `interval:N[:alpha]`, `circle:N`, `torus2d:NXxNY` (or `torus2d:N`),
/// `gauge:N[:body]`, `sierpinski:L`, or `@path` to a JSON spec.
pub fn parse_space_spec(text: &str) -> Result<SpaceSpec> {
    if let Some(path) = text.strip_prefix('@') {
        let raw = std::fs::read_to_string(path).with_context(|| format!("cannot read spec file {path}"))?;
        return serde_json::from_str(&raw).with_context(|| format!("spec file {path} is not a valid space spec"));
    }
    let (family, rest) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("space spec `{text}` needs the form family:size"))?;
    let int = |s: &str| -> Result<usize> { s.parse().with_context(|| format!("`{s}` in `{text}` is not a size")) };
    Ok(match family {
        "interval" => match rest.split_once(':') {
            None => SpaceSpec::interval(int(rest)?),
            Some((n, alpha)) => SpaceSpec::Interval {
                n: int(n)?,
                alpha: alpha
                    .parse()
                    .with_context(|| format!("`{alpha}` in `{text}` is not a number"))?,
            },
        },
        "circle" => SpaceSpec::Circle { n: int(rest)? },
        "torus" | "torus2d" => match rest.split_once('x') {
            Some((nx, ny)) => SpaceSpec::Torus2d {
                nx: int(nx)?,
                ny: int(ny)?,
            },
            None => {
                let n = int(rest)?;
                SpaceSpec::Torus2d { nx: n, ny: n }
            }
        },
        "gauge" | "gauge_grid" => {
            let (n, body) = rest.split_once(':').unwrap_or((rest, "ball"));
            SpaceSpec::GaugeGrid {
                n: int(n)?,
                body: parse_body(body, 2)?,
            }
        }
        "sierpinski" => SpaceSpec::Sierpinski {
            level: rest
                .parse()
                .with_context(|| format!("`{rest}` in `{text}` is not a level"))?,
        },
        _ => bail!("unknown space family `{family}`; use interval, circle, torus2d, gauge, sierpinski or @spec.json"),
    })
}
