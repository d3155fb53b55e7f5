use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{build_space, validate_matrix, Coords, Metric, MetricMeasureSpace, SpaceSpec};
use crate::error::{Error, Result};

/// On-disk form of a space. `matrix` holds the strict upper triangle in
/// row-major order; a full n×n matrix is also accepted on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub name: String,
    pub n: usize,
    pub metric: MetricTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTag {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

impl SpaceFile {
    pub fn from_space(space: &MetricMeasureSpace) -> Result<Self> {
        let metric = match (&space.spec, &space.metric) {
            (Some(spec), _) => {
                let Value::Object(mut params) = serde_json::to_value(spec)? else {
                    unreachable!("specs serialize to objects")
                };
                let kind = match params.remove("type") {
                    Some(Value::String(s)) => s,
                    _ => unreachable!("specs carry a type tag"),
                };
                MetricTag {
                    kind,
                    params: Value::Object(params),
                }
            }
            (None, Metric::Euclidean) => MetricTag {
                kind: "euclidean".into(),
                params: Value::Object(Default::default()),
            },
            (None, _) => MetricTag {
                kind: "matrix".into(),
                params: Value::Object(Default::default()),
            },
        };
        let n = space.n();
        let matrix = match &space.metric {
            Metric::Dense(m) => Some((0..n).flat_map(|i| ((i + 1)..n).map(move |j| m[i * n + j])).collect()),
            _ => None,
        };
        Ok(SpaceFile {
            name: space.name.clone(),
            n,
            metric,
            matrix,
            coords: space.coords.as_ref().map(|c| c.data.clone()),
            dim: space.coords.as_ref().map(|c| c.dim),
            weights: space.weights.clone(),
        })
    }

    pub fn into_space(self) -> Result<MetricMeasureSpace> {
        let n = self.n;
        if self.weights.len() != n {
            return Err(Error::InvalidSpec(format!(
                "file declares n = {n} but lists {} weights",
                self.weights.len()
            )));
        }
        for (point, &value) in self.weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveWeight { point, value });
            }
        }
        let matrix = self.matrix.as_deref().map(|m| expand(m, n)).transpose()?;
        if let Some(m) = &matrix {
            validate_matrix(m, n)?;
        }
        let coords = match (self.coords, self.dim) {
            (Some(data), Some(dim)) if dim > 0 && data.len() == dim * n => Some(Coords { dim, data }),
            (None, _) => None,
            _ => return Err(Error::InvalidSpec("coords length does not match n·dim".into())),
        };
        let space = match self.metric.kind.as_str() {
            "matrix" => {
                let m = matrix.ok_or_else(|| Error::InvalidSpec("matrix metric without matrix".into()))?;
                let mut s = MetricMeasureSpace::from_matrix(&self.name, m, self.weights)?;
                s.coords = coords;
                s
            }
            "euclidean" => {
                let c = coords.ok_or_else(|| Error::InvalidSpec("euclidean metric without coords".into()))?;
                MetricMeasureSpace::from_points(&self.name, c, self.weights)?
            }
            kind => {
                let mut params = match self.metric.params {
                    Value::Object(p) => p,
                    Value::Null => Default::default(),
                    other => {
                        return Err(Error::InvalidSpec(format!(
                            "metric params must be an object, got {other}"
                        )))
                    }
                };
                params.insert("type".into(), Value::String(kind.into()));
                let spec: SpaceSpec = serde_json::from_value(Value::Object(params))
                    .map_err(|e| Error::InvalidSpec(format!("metric {kind}: {e}")))?;
                let mut s = build_space(&spec)?;
                if s.n() != n {
                    return Err(Error::InvalidSpec(format!(
                        "generator {kind} produces {} points, file declares {n}",
                        s.n()
                    )));
                }
                if let (Some(file_m), Metric::Dense(built)) = (&matrix, &s.metric) {
                    if let Some(k) = (0..n * n).find(|&k| file_m[k].to_bits() != built[k].to_bits()) {
                        return Err(Error::InvalidSpec(format!(
                            "matrix entry ({}, {}) disagrees with the {kind} generator",
                            k / n,
                            k % n
                        )));
                    }
                }
                s.name = self.name;
                s.replace_weights(self.weights)?;
                s
            }
        };
        space.check_triangle_sampled(200_000)?;
        Ok(space)
    }
}

impl MetricMeasureSpace {
    fn replace_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights == self.weights {
            return Ok(());
        }
        let fresh = MetricMeasureSpace::new(
            std::mem::take(&mut self.name),
            self.spec.take(),
            self.metric.clone(),
            weights,
            self.coords.take(),
            self.adjacency.take(),
        )?;
        *self = fresh;
        Ok(())
    }
}

fn expand(m: &[f64], n: usize) -> Result<Vec<f64>> {
    if m.len() == n * n {
        return Ok(m.to_vec());
    }
    if m.len() != n * (n - 1) / 2 {
        return Err(Error::InvalidSpec(format!(
            "matrix has {} entries; expected {} (upper triangle) or {} (full)",
            m.len(),
            n * (n - 1) / 2,
            n * n
        )));
    }
    let mut full = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            full[i * n + j] = m[k];
            full[j * n + i] = m[k];
            k += 1;
        }
    }
    Ok(full)
}

pub fn save_space(space: &MetricMeasureSpace, path: &Path) -> Result<()> {
    let file = SpaceFile::from_space(space)?;
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_space(path: &Path) -> Result<MetricMeasureSpace> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |reason: String| Error::MalformedFile {
        path: path.to_path_buf(),
        reason,
    };
    let file: SpaceFile = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    file.into_space().map_err(|e| match e {
        Error::InvalidSpec(reason) => malformed(reason),
        other => other,
    })
}
