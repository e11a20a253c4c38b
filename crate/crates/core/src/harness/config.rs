//! TOML experiment configuration. Angles are given in degrees and converted
//! to radians when the channel model is built.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::SkrConvention;
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::geometry::{AnglePair, RisGeometry};
use crate::stats::DEFAULT_K;
use crate::weights::PhaseScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Cips,
    Cgps,
    Dips,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub scheme: SchemeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    pub mx: usize,
    pub my: usize,
    #[serde(default = "half")]
    pub spacing_x: f64,
    #[serde(default = "half")]
    pub spacing_y: f64,
    #[serde(default = "one")]
    pub wavelength: f64,
    /// ψ_i, θ_i, ψ_o, θ_o in degrees.
    pub angles_deg: [f64; 4],
    #[serde(default)]
    pub direct_gain: [f64; 2],
    /// Noise variance per real quadrature, σ_z².
    #[serde(default = "one")]
    pub noise_var: f64,
    #[serde(default)]
    pub allow_remainder: bool,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn phase_scheme(&self) -> Result<PhaseScheme> {
        match self.scheme {
            SchemeName::Cips => Ok(PhaseScheme::Cips),
            SchemeName::Cgps => self
                .q
                .map(|q| PhaseScheme::Cgps { q })
                .ok_or_else(|| Error::Config("scheme \"cgps\" needs a group size `q`".into())),
            SchemeName::Dips => self
                .bits
                .map(|bits| PhaseScheme::Dips { bits })
                .ok_or_else(|| Error::Config("scheme \"dips\" needs `bits`".into())),
        }
    }

    pub fn set_scheme(&mut self, scheme: PhaseScheme) {
        match scheme {
            PhaseScheme::Cips => self.scheme = SchemeName::Cips,
            PhaseScheme::Cgps { q } => {
                self.scheme = SchemeName::Cgps;
                self.q = Some(q);
            }
            PhaseScheme::Dips { bits } => {
                self.scheme = SchemeName::Dips;
                self.bits = Some(bits);
            }
        }
    }

    pub fn geometry(&self) -> Result<RisGeometry> {
        RisGeometry::new(self.mx, self.my, self.spacing_x, self.spacing_y, self.wavelength)
    }

    pub fn angles(&self) -> Result<AnglePair> {
        let [a, b, c, d] = self.angles_deg;
        AnglePair::from_degrees(a, b, c, d)
    }

    pub fn to_model(&self) -> Result<ChannelModel> {
        let scheme = self.phase_scheme()?;
        let model = ChannelModel::new(self.geometry()?, self.angles()?, scheme)
            .with_direct_gain(Complex64::new(self.direct_gain[0], self.direct_gain[1]))
            .with_noise_var(self.noise_var)
            .with_allow_remainder(self.allow_remainder);
        model.validate()?;
        Ok(model)
    }
}

/// Verdict tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance on variances.
    pub variance_rel: f64,
    /// Absolute tolerance on the Re/Im covariance, as a fraction of M.
    pub covariance_frac_of_m: f64,
    /// Allowed deviation of the sample mean, in standard errors.
    pub mean_sigmas: f64,
    /// KS significance level (0.05 or 0.01).
    pub ks_alpha: f64,
    /// Absolute tolerance between estimated and closed-form key rate, bits.
    pub mi_bits: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            variance_rel: 0.03,
            covariance_frac_of_m: 0.05,
            mean_sigmas: 4.0,
            ks_alpha: 0.01,
            mi_bits: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MiConfig {
    pub enabled: bool,
    pub pairs: usize,
    pub k: usize,
}

impl Default for MiConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            pairs: 5000,
            k: DEFAULT_K,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "M")]
    ElementCount,
    #[serde(rename = "snr_db")]
    SnrDb,
    #[serde(rename = "q")]
    GroupSize,
    #[serde(rename = "bits")]
    Bits,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" => Ok(Self::ElementCount),
            "snr_db" => Ok(Self::SnrDb),
            "q" => Ok(Self::GroupSize),
            "bits" => Ok(Self::Bits),
            other => Err(Error::Config(format!("unknown sweep parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep values must be nonempty".into()));
        }
        for &v in &self.values {
            let ok = match self.parameter {
                SweepParameter::SnrDb => v.is_finite(),
                SweepParameter::ElementCount => {
                    let side = (v.sqrt()).round();
                    v >= 1.0 && v.fract() == 0.0 && side * side == v
                }
                SweepParameter::GroupSize | SweepParameter::Bits => v >= 1.0 && v.fract() == 0.0,
            };
            if !ok {
                return Err(Error::Config(format!(
                    "sweep value {v} is not valid for {:?}{}",
                    self.parameter,
                    if self.parameter == SweepParameter::ElementCount {
                        " (M must be a perfect square for a square array)"
                    } else {
                        ""
                    }
                )));
            }
        }
        Ok(())
    }
}

/// Where results are written. Not echoed into reports: output locations do
/// not affect any computed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub samples_csv: bool,
    pub observations_csv: bool,
    pub report_json: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            samples_csv: true,
            observations_csv: false,
            report_json: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub model: ModelConfig,
    /// Samples used for KS tests (prefix of the batch).
    #[serde(default = "default_gof_samples")]
    pub gof_samples: usize,
    #[serde(default)]
    pub skr_convention: SkrConvention,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub mi: MiConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing)]
    pub outputs: OutputConfig,
    /// Parallel shard count. Results are identical for every value, so it
    /// is not echoed.
    #[serde(default = "default_shards", skip_serializing)]
    pub shards: usize,
}

fn default_gof_samples() -> usize {
    10_000
}

fn default_shards() -> usize {
    1
}

impl ExperimentConfig {
    /// Baseline: 8×8 half-wavelength array, Ω_i = (30°, 30°),
    /// Ω_o = (150°, 60°).
    pub fn baseline(scheme: PhaseScheme, trials: usize, seed: u64) -> Self {
        let mut model = ModelConfig {
            scheme: SchemeName::Cips,
            q: None,
            bits: None,
            mx: 8,
            my: 8,
            spacing_x: 0.5,
            spacing_y: 0.5,
            wavelength: 1.0,
            angles_deg: [30.0, 30.0, 150.0, 60.0],
            direct_gain: [0.0, 0.0],
            noise_var: 1.0,
            allow_remainder: false,
        };
        model.set_scheme(scheme);
        Self {
            seed,
            trials,
            model,
            gof_samples: default_gof_samples(),
            skr_convention: SkrConvention::default(),
            tolerances: Tolerances::default(),
            mi: MiConfig::default(),
            sweep: None,
            outputs: OutputConfig::default(),
            shards: 1,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Structural checks that belong to the configuration itself; model
    /// parameter errors surface when the model is built.
    pub fn check(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::Config("trials must be at least 2".into()));
        }
        if self.shards == 0 {
            return Err(Error::Config("shards must be at least 1".into()));
        }
        if self.gof_samples < 10 {
            return Err(Error::Config("gof_samples must be at least 10".into()));
        }
        crate::stats::Significance::from_alpha(self.tolerances.ks_alpha)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.mi.enabled && (self.mi.k == 0 || self.mi.pairs <= self.mi.k) {
            return Err(Error::Config("mi.pairs must exceed mi.k >= 1".into()));
        }
        self.model.phase_scheme()?;
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
trials = 1000

[model]
scheme = "cgps"
q = 4
mx = 8
my = 8
angles_deg = [30.0, 30.0, 150.0, 60.0]
"#;

    #[test]
    fn parses_minimal_with_defaults() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.model.phase_scheme().unwrap(), PhaseScheme::Cgps { q: 4 });
        assert_eq!(c.model.spacing_x, 0.5);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.gof_samples, 10_000);
        assert_eq!(c.shards, 1);
        let m = c.model.to_model().unwrap();
        assert!((m.legit_angles.psi_out - 150f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn roundtrips_through_toml() {
        let mut c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        c.sweep = Some(SweepConfig {
            parameter: SweepParameter::SnrDb,
            values: vec![-10.0, 0.0],
        });
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn config_errors() {
        let missing_q = MINIMAL.replace("q = 4\n", "");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&missing_q),
            Err(Error::Config(_))
        ));
        let typo = MINIMAL.replace("trials", "trails");
        assert_eq!(ExperimentConfig::from_toml_str(&typo).unwrap_err().exit_code(), 2);
        let bad_sweep = format!("{MINIMAL}\n[sweep]\nparameter = \"M\"\nvalues = [10.0]\n");
        assert!(ExperimentConfig::from_toml_str(&bad_sweep).is_err());
        let empty_sweep = format!("{MINIMAL}\n[sweep]\nparameter = \"q\"\nvalues = []\n");
        assert!(ExperimentConfig::from_toml_str(&empty_sweep).is_err());
        let alpha = format!("{MINIMAL}\n[tolerances]\nks_alpha = 0.1\n");
        assert!(ExperimentConfig::from_toml_str(&alpha).is_err());
    }

    #[test]
    fn model_errors_are_not_config_errors() {
        let c = ExperimentConfig::from_toml_str(&MINIMAL.replace("q = 4", "q = 3")).unwrap();
        let err = c.model.to_model().unwrap_err();
        assert!(matches!(err, Error::NotDivisible { .. }));
        assert_eq!(err.exit_code(), 3);
    }
}
