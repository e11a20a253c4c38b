use serde::{Deserialize, Serialize};

use crate::analytic::Cdf;
use crate::error::{Error, Result};

/// Supported KS significance levels and their asymptotic coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Significance {
    #[serde(rename = "0.05")]
    P05,
    #[serde(rename = "0.01")]
    P01,
}

impl Significance {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if alpha == 0.05 {
            Ok(Self::P05)
        } else if alpha == 0.01 {
            Ok(Self::P01)
        } else {
            Err(Error::InvalidArgument(format!(
                "KS alpha must be 0.05 or 0.01, got {alpha}"
            )))
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Self::P05 => 0.05,
            Self::P01 => 0.01,
        }
    }

    pub fn coefficient(&self) -> f64 {
        match self {
            Self::P05 => 1.358,
            Self::P01 => 1.628,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub n: usize,
    pub pass: bool,
}

/// sup |F̂ − F| over a sorted sample.
pub fn ks_statistic<C: Cdf + ?Sized>(sorted: &[f64], reference: &C) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput);
    }
    if sorted.iter().any(|x| x.is_nan()) || sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Unsorted);
    }
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = reference.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(d.clamp(0.0, 1.0))
}

/// One-sample Kolmogorov–Smirnov test with critical value c(α)/√n.
pub fn ks_test<C: Cdf + ?Sized>(sorted: &[f64], reference: &C, alpha: f64) -> Result<GofResult> {
    let level = Significance::from_alpha(alpha)?;
    if sorted.is_empty() {
        return Err(Error::EmptyInput);
    }
    if sorted.len() < 10 {
        return Err(Error::InsufficientSamples {
            needed: 10,
            got: sorted.len(),
        });
    }
    let statistic = ks_statistic(sorted, reference)?;
    let critical_value = level.coefficient() / (sorted.len() as f64).sqrt();
    Ok(GofResult {
        statistic,
        critical_value,
        alpha: level.alpha(),
        n: sorted.len(),
        pass: statistic < critical_value,
    })
}
