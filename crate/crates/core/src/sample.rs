use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An ordered collection of income observations with a provenance label.
///
/// Observation order is meaningful: group formation takes runs of
/// subsequent observations, so nothing here ever sorts in place.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    label: String,
}

impl Sample {
    /// Build a sample; every value must be finite and non-negative.
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::domain(format!(
                "observation {} is {v}; incomes must be finite and non-negative",
                i + 1
            )));
        }
        Ok(Sample {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiply every observation by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Sample> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::domain("scale factor must be positive"));
        }
        Sample::new(
            self.values.iter().map(|v| v * k).collect(),
            self.label.clone(),
        )
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Which inequality index to estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    Gini,
    Theil,
    /// Generalized entropy GE(α). GE(1) is the Theil index and GE(0) the
    /// mean log deviation.
    Ge(f64),
}

impl MeasureKind {
    /// True when the estimator needs strictly positive observations.
    pub fn requires_positive(&self) -> bool {
        match self {
            MeasureKind::Gini => false,
            MeasureKind::Theil => true,
            MeasureKind::Ge(alpha) => *alpha <= 1.0,
        }
    }

    /// Collapse GE(1) to Theil so equivalent kinds compare equal.
    pub fn canonical(self) -> Self {
        match self {
            MeasureKind::Ge(1.0) => MeasureKind::Theil,
            other => other,
        }
    }

    pub fn short_name(&self) -> String {
        match self {
            MeasureKind::Gini => "gini".to_string(),
            MeasureKind::Theil => "theil".to_string(),
            MeasureKind::Ge(a) => format!("ge:{a}"),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Gini => write!(f, "Gini"),
            MeasureKind::Theil => write!(f, "Theil"),
            MeasureKind::Ge(a) => write!(f, "GE({a})"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "gini" => Ok(MeasureKind::Gini),
            "theil" => Ok(MeasureKind::Theil),
            "mld" => Ok(MeasureKind::Ge(0.0)),
            _ => {
                if let Some(rest) = lower.strip_prefix("ge:") {
                    let alpha: f64 = rest
                        .parse()
                        .map_err(|_| Error::Usage(format!("bad GE parameter in '{s}'")))?;
                    if !alpha.is_finite() {
                        return Err(Error::Usage(format!("bad GE parameter in '{s}'")));
                    }
                    Ok(MeasureKind::Ge(alpha))
                } else {
                    Err(Error::Usage(format!(
                        "unknown measure '{s}' (expected gini, theil or ge:<alpha>)"
                    )))
                }
            }
        }
    }
}
