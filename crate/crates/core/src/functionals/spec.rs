use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, check_fraction, check_positive, Error, Result};
use crate::kernel::KernelSpec;

/// Parameters of a pair functional. Only the parameters a functional reads
/// need to be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySpec {
    pub p: f64,
    pub kernel: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl EnergySpec {
    pub fn new(p: f64, kernel: KernelSpec) -> Self {
        Self {
            p,
            kernel,
            s: None,
            delta: None,
            t: None,
            r: None,
            eps: None,
        }
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    /// Checks every parameter that is set.
    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        if let Some(s) = self.s {
            check_fraction("s", s)?;
        }
        if let Some(d) = self.delta {
            check_positive("delta", d)?;
        }
        if let Some(t) = self.t {
            check_positive("t", t)?;
        }
        if let Some(r) = self.r {
            // r = ∞ is allowed and means no cutoff
            if !(r > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "r",
                    value: r,
                    reason: "cutoff must be positive",
                });
            }
        }
        if let Some(e) = self.eps {
            check_positive("eps", e)?;
        }
        Ok(())
    }

    pub(crate) fn require(&self, name: &'static str, v: Option<f64>) -> Result<f64> {
        self.validate()?;
        v.ok_or(Error::InvalidParameter {
            name,
            value: f64::NAN,
            reason: "required by this functional",
        })
    }
}
