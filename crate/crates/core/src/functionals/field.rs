use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// Where a field's values came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "source", rename_all = "lowercase")]
pub enum Provenance {
    Expression(String),
    File(String),
    Operation(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Expression(e) => write!(f, "expr:{e}"),
            Provenance::File(p) => write!(f, "file:{p}"),
            Provenance::Operation(o) => write!(f, "op:{o}"),
        }
    }
}

/// One finite real value per point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    provenance: Provenance,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField(i));
        }
        Ok(Self { values, provenance })
    }

    pub(crate) fn computed(values: Vec<f64>, op: &str) -> Self {
        Self {
            values,
            provenance: Provenance::Operation(op.into()),
        }
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n], Provenance::Operation(format!("constant {c}")))
    }

    /// Evaluates `f` at every point's coordinates.
    pub fn from_coords<F>(space: &MetricMeasureSpace, label: &str, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let coords = space.coords().ok_or_else(|| {
            Error::InvalidSpec(format!(
                "space {} has no coordinates; load the field from CSV instead",
                space.name()
            ))
        })?;
        let values = (0..space.n()).map(|i| f(coords.point(i))).collect();
        Self::new(values, Provenance::Expression(label.into()))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn check_len(&self, space: &MetricMeasureSpace) -> Result<()> {
        if self.len() == space.n() {
            Ok(())
        } else {
            Err(Error::FieldLength {
                expected: space.n(),
                got: self.len(),
            })
        }
    }

    /// Oscillation max u − min u.
    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }

    pub fn map(&self, op: &str, f: impl Fn(f64) -> f64) -> Self {
        Self::computed(self.values.iter().map(|&v| f(v)).collect(), op)
    }

    /// ‖u‖_p^p = Σ w |u|^p.
    pub fn norm_p_pow(&self, space: &MetricMeasureSpace, p: f64) -> f64 {
        self.values
            .iter()
            .zip(space.weights())
            .map(|(v, w)| w * super::pow_p(v.abs(), p))
            .sum()
    }

    pub fn norm_p(&self, space: &MetricMeasureSpace, p: f64) -> f64 {
        self.norm_p_pow(space, p).powf(1.0 / p)
    }

    /// Reads a one-column CSV in point order. A non-numeric first row is
    /// treated as a header.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| io_or_csv(path, e))?;
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let cell = record.get(0).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if row == 0 => continue,
                Err(_) => {
                    return Err(Error::MalformedFile {
                        path: path.to_path_buf(),
                        reason: format!("row {}: {cell:?} is not a number", row + 1),
                    })
                }
            }
        }
        Self::new(values, Provenance::File(path.display().to_string()))
    }

    /// Writes a one-column CSV with a `value` header, full precision.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| io_or_csv(path, e))?;
        writer.write_record(["value"])?;
        for v in &self.values {
            writer.write_record([format!("{v:?}")])?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn io_or_csv(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            _ => unreachable!(),
        }
    } else {
        Error::Csv(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let f = ScalarField::new(vec![0.0, f64::NAN], Provenance::Operation("t".into()));
        assert!(matches!(f, Err(Error::NonFiniteField(1))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let vals = vec![0.1, -1.0 / 3.0, 1e-300, 12345.678901234567];
        let f = ScalarField::new(vals.clone(), Provenance::Operation("t".into())).unwrap();
        f.write_csv(&path).unwrap();
        let g = ScalarField::read_csv(&path).unwrap();
        assert_eq!(g.values(), &vals[..]);
    }

    #[test]
    fn csv_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        std::fs::write(&path, "1\n2.5\n").unwrap();
        assert_eq!(ScalarField::read_csv(&path).unwrap().values(), &[1.0, 2.5]);
        std::fs::write(&path, "1\nabc\n").unwrap();
        assert!(matches!(ScalarField::read_csv(&path), Err(Error::MalformedFile { .. })));
    }
}
