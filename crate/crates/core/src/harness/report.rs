use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticPrediction, IndependenceCheck, SkrResult};
use crate::stats::{DistributionSummary, GofResult, MiEstimate};

use super::config::ExperimentConfig;

/// Bumped whenever a field of [`Report`] changes meaning or layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub version: String,
}

impl Default for Generator {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Modelling conventions a reader needs to interpret the numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub noise: String,
    pub snr: String,
    pub pilot: String,
    pub element_order: String,
    pub angles: String,
    pub rng: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            noise: "noise_var is sigma_z^2 per real quadrature; total complex noise power is 2*sigma_z^2".into(),
            snr: "SNR_dB = 10*log10(M / (2*sigma_z^2)), M = element count (unit power per element, shared by all schemes)".into(),
            pilot: "unit pilot s = 1, path loss omitted".into(),
            element_order: "row-major, m = (m_y - 1)*M_x + m_x".into(),
            angles: "degrees in configuration, radians internally".into(),
            rng: "ChaCha8 stream per (seed, domain, trial); results independent of shard count".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSection {
    pub prediction: AnalyticPrediction,
    pub skr: Option<SkrResult>,
    pub independence: Option<IndependenceCheck>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GofSection {
    pub magnitude: Option<GofResult>,
    pub phase: Option<GofResult>,
    pub re: Option<GofResult>,
    pub im: Option<GofResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    /// |observed − expected| ≤ tolerance · |expected|
    Relative,
    /// |observed − expected| ≤ tolerance
    Absolute,
    /// observed ≤ expected + tolerance
    UpperBound,
    /// KS statistic below critical value `tolerance`
    Ks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub kind: ToleranceKind,
    pub pass: bool,
}

impl Verdict {
    pub fn judge(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64, kind: ToleranceKind) -> Self {
        let pass = match kind {
            ToleranceKind::Relative => (observed - expected).abs() <= tolerance * expected.abs(),
            ToleranceKind::Absolute => (observed - expected).abs() <= tolerance,
            ToleranceKind::UpperBound => observed <= expected + tolerance,
            ToleranceKind::Ks => observed < tolerance,
        };
        Self {
            name: name.into(),
            observed,
            expected,
            tolerance,
            kind,
            pass,
        }
    }

    pub fn from_gof(name: impl Into<String>, g: &GofResult) -> Self {
        Self {
            name: name.into(),
            observed: g.statistic,
            expected: 0.0,
            tolerance: g.critical_value,
            kind: ToleranceKind::Ks,
            pass: g.pass,
        }
    }
}

/// One row of a sweep CSV: `x,empirical,analytic,tolerance,pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub empirical: Option<f64>,
    pub analytic: f64,
    pub tolerance: f64,
    pub pass: Option<bool>,
}

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "x,empirical,analytic,tolerance,pass")?;
    for r in rows {
        let emp = r.empirical.map(|v| v.to_string()).unwrap_or_default();
        let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{}", r.x, emp, r.analytic, r.tolerance, pass)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub generator: Generator,
    pub config: ExperimentConfig,
    pub conventions: Conventions,
    pub analytic: AnalyticSection,
    pub empirical: DistributionSummary,
    pub gof: GofSection,
    pub mi: Option<MiEstimate>,
    pub sweep: Option<Vec<SweepRow>>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
