//! Closed-form channel statistics and secret key rate.
//!
//! CIPS and DIPS with B ≥ 2 give circular Gaussian quadratures N(0, M/2);
//! CGPS gives N(0, Nq²/2); 1-bit DIPS gives correlated quadratures whose
//! moments depend on the steering phases.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{steering_product, AnglePair, RisGeometry};
use crate::special::{bessel_i0_scaled, integrate, normal_cdf, normal_pdf};
use crate::weights::{partition_groups_with, PhaseScheme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum MagnitudeLaw {
    Rayleigh { scale: f64 },
    Rician { nu: f64, scale: f64 },
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLaw {
    Uniform,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPrediction {
    pub mean_re: f64,
    pub mean_im: f64,
    pub var_re: f64,
    pub var_im: f64,
    pub covariance: f64,
    pub var_total: f64,
    pub magnitude_law: MagnitudeLaw,
    pub phase_law: PhaseLaw,
}

/// Quadrature moments of 1-bit DIPS:
/// var_re/im = M/2 ± ½Σcos 2α, covariance = ½Σsin 2α.
fn one_bit_moments(geom: &RisGeometry, angles: &AnglePair) -> (f64, f64, f64) {
    let sp = steering_product(geom, angles);
    let half_m = geom.element_count() as f64 / 2.0;
    let (mut c2, mut s2) = (0.0, 0.0);
    for &a in sp.phases() {
        let (s, c) = (2.0 * a).sin_cos();
        c2 += c;
        s2 += s;
    }
    (half_m + 0.5 * c2, half_m - 0.5 * c2, 0.5 * s2)
}

/// Total channel variance σ² for circular schemes; `None` for 1-bit DIPS.
fn circular_variance(scheme: PhaseScheme, geom: &RisGeometry, allow_remainder: bool) -> Result<Option<f64>> {
    scheme.validate(geom)?;
    let m = geom.element_count() as f64;
    Ok(match scheme {
        PhaseScheme::Cips => Some(m),
        PhaseScheme::Dips { bits } if bits >= 2 => Some(m),
        PhaseScheme::Dips { .. } => None,
        PhaseScheme::Cgps { q } => {
            let p = partition_groups_with(geom, q, allow_remainder)?;
            let (n, q, r) = (p.group_count() as f64, q as f64, p.remainder() as f64);
            Some(n * q * q + r * r)
        }
    })
}

pub fn predict_distribution(
    scheme: PhaseScheme,
    geom: &RisGeometry,
    angles: &AnglePair,
    direct_gain: Complex64,
) -> Result<AnalyticPrediction> {
    predict_distribution_with(scheme, geom, angles, direct_gain, false)
}

/// As [`predict_distribution`]; with `allow_remainder` a partial CGPS group
/// of r elements adds r² to the variance.
pub fn predict_distribution_with(
    scheme: PhaseScheme,
    geom: &RisGeometry,
    angles: &AnglePair,
    direct_gain: Complex64,
    allow_remainder: bool,
) -> Result<AnalyticPrediction> {
    let has_mean = direct_gain != Complex64::new(0.0, 0.0);
    match circular_variance(scheme, geom, allow_remainder)? {
        Some(var) => {
            let scale = (var / 2.0).sqrt();
            let (magnitude_law, phase_law) = if has_mean {
                (
                    MagnitudeLaw::Rician {
                        nu: direct_gain.norm(),
                        scale,
                    },
                    PhaseLaw::Empirical,
                )
            } else {
                (MagnitudeLaw::Rayleigh { scale }, PhaseLaw::Uniform)
            };
            Ok(AnalyticPrediction {
                mean_re: direct_gain.re,
                mean_im: direct_gain.im,
                var_re: var / 2.0,
                var_im: var / 2.0,
                covariance: 0.0,
                var_total: var,
                magnitude_law,
                phase_law,
            })
        }
        None => {
            let (var_re, var_im, covariance) = one_bit_moments(geom, angles);
            Ok(AnalyticPrediction {
                mean_re: direct_gain.re,
                mean_im: direct_gain.im,
                var_re,
                var_im,
                covariance,
                var_total: var_re + var_im,
                magnitude_law: MagnitudeLaw::Empirical,
                phase_law: PhaseLaw::Empirical,
            })
        }
    }
}

/// Decorrelation test for 1-bit DIPS on a square array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCheck {
    pub gamma: f64,
    pub satisfied: bool,
    pub nearest_b: i64,
}

pub const INDEPENDENCE_TOLERANCE: f64 = 1e-9;

/// γ = cosψ_i sinθ_i + cosψ_o sinθ_o + sinψ_i sinθ_i + sinψ_o sinθ_o;
/// satisfied when γ·2kd/π is an integer b.
pub fn independence_condition(geom: &RisGeometry, angles: &AnglePair) -> Result<IndependenceCheck> {
    if !geom.is_square() {
        return Err(Error::NonSquareGeometry);
    }
    let (sti, sto) = (angles.theta_in.sin(), angles.theta_out.sin());
    let gamma = angles.psi_in.cos() * sti
        + angles.psi_out.cos() * sto
        + angles.psi_in.sin() * sti
        + angles.psi_out.sin() * sto;
    let scaled = gamma * 2.0 * geom.wave_number() * geom.d_x() / PI;
    let nearest = scaled.round();
    Ok(IndependenceCheck {
        gamma,
        satisfied: (scaled - nearest).abs() <= INDEPENDENCE_TOLERANCE,
        nearest_b: nearest as i64,
    })
}

/// How the 1-bit per-quadrature bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkrConvention {
    /// I_re + I_im with I_x = ½log2(1 + σ_x²/(2σ_z² + σ_z⁴/σ_x²)); agrees
    /// with the circular formula when σ_re² = σ_im² = M/2.
    #[default]
    PerQuadrature,
    /// log2 of the product of both quadrature terms, without the ½ factors,
    /// applied to every scheme's quadrature variances.
    UnhalvedProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkrResult {
    pub rate_bits_per_sample: f64,
    pub scheme: PhaseScheme,
    pub noise_var_per_quadrature: f64,
    pub is_upper_bound: bool,
    pub convention: SkrConvention,
}

/// MI of one Gaussian quadrature observed twice with independent noise,
/// bits. Zero for a degenerate (zero-variance) quadrature.
pub fn quadrature_mi(var_x: f64, noise_var: f64) -> f64 {
    if var_x <= 0.0 {
        return 0.0;
    }
    0.5 * (1.0 + var_x / (2.0 * noise_var + noise_var * noise_var / var_x)).log2()
}

/// log2(1 + (σ²/2)/(2σ_z² + 2σ_z⁴/σ²)) for a circular channel of total
/// variance σ².
pub fn circular_skr(var_total: f64, noise_var: f64) -> f64 {
    if var_total <= 0.0 {
        return 0.0;
    }
    (1.0 + (var_total / 2.0) / (2.0 * noise_var + 2.0 * noise_var * noise_var / var_total)).log2()
}

pub fn skr_closed_form(
    scheme: PhaseScheme,
    geom: &RisGeometry,
    angles: &AnglePair,
    noise_var_per_quadrature: f64,
) -> Result<SkrResult> {
    skr_closed_form_with(
        scheme,
        geom,
        angles,
        noise_var_per_quadrature,
        SkrConvention::PerQuadrature,
        false,
    )
}

pub fn skr_closed_form_with(
    scheme: PhaseScheme,
    geom: &RisGeometry,
    angles: &AnglePair,
    noise_var_per_quadrature: f64,
    convention: SkrConvention,
    allow_remainder: bool,
) -> Result<SkrResult> {
    let nv = noise_var_per_quadrature;
    if !(nv > 0.0 && nv.is_finite()) {
        return Err(Error::InvalidNoise("finite and strictly positive"));
    }
    let p = predict_distribution_with(scheme, geom, angles, Complex64::new(0.0, 0.0), allow_remainder)?;
    let circular = !matches!(p.magnitude_law, MagnitudeLaw::Empirical);
    let rate = match convention {
        SkrConvention::PerQuadrature if circular => circular_skr(p.var_total, nv),
        SkrConvention::PerQuadrature => quadrature_mi(p.var_re, nv) + quadrature_mi(p.var_im, nv),
        SkrConvention::UnhalvedProduct => 2.0 * (quadrature_mi(p.var_re, nv) + quadrature_mi(p.var_im, nv)),
    };
    let is_upper_bound = !circular && p.covariance.abs() > INDEPENDENCE_TOLERANCE * p.var_total.max(1.0);
    Ok(SkrResult {
        rate_bits_per_sample: rate.max(0.0),
        scheme,
        noise_var_per_quadrature: nv,
        is_upper_bound,
        convention,
    })
}

/// A cumulative distribution function on the reals.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCdf {
    pub mean: f64,
    pub var: f64,
}

impl Cdf for GaussianCdf {
    fn cdf(&self, x: f64) -> f64 {
        if self.var == 0.0 {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        normal_cdf(x, self.mean, self.var.sqrt())
    }
}

impl GaussianCdf {
    pub fn pdf(&self, x: f64) -> f64 {
        normal_pdf(x, self.mean, self.var.sqrt())
    }
}

/// Uniform phase on [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPhaseCdf;

impl Cdf for UniformPhaseCdf {
    fn cdf(&self, x: f64) -> f64 {
        (x / TAU).clamp(0.0, 1.0)
    }
}

/// Rayleigh or Rician magnitude law with per-quadrature scale σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnitudeCdf {
    pub nu: f64,
    pub scale: f64,
}

pub const RICIAN_CDF_TOLERANCE: f64 = 1e-12;

impl MagnitudeCdf {
    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let s2 = self.scale * self.scale;
        if self.nu == 0.0 {
            return x / s2 * (-x * x / (2.0 * s2)).exp();
        }
        // x/σ² · exp(−(x² + ν²)/2σ²) · I0(xν/σ²), with I0 kept scaled
        let z = x * self.nu / s2;
        x / s2 * (-(x - self.nu).powi(2) / (2.0 * s2)).exp() * bessel_i0_scaled(z)
    }
}

impl Cdf for MagnitudeCdf {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let s2 = self.scale * self.scale;
        if self.nu == 0.0 {
            return -(-x * x / (2.0 * s2)).exp_m1();
        }
        // integrate whichever side of the mode is shorter for accuracy in the tail
        let upper = self.nu + 40.0 * self.scale;
        if x >= upper {
            return 1.0;
        }
        let pdf = |t: f64| self.pdf(t);
        let lo = (self.nu - 40.0 * self.scale).max(0.0);
        if x <= lo {
            return 0.0;
        }
        integrate(&pdf, lo, x, RICIAN_CDF_TOLERANCE).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCdfs {
    pub magnitude: MagnitudeCdf,
    pub phase: UniformPhaseCdf,
    pub re: GaussianCdf,
    pub im: GaussianCdf,
}

/// Reference laws for KS tests. Rejects predictions whose magnitude or
/// phase law is empirical.
pub fn reference_cdfs(prediction: &AnalyticPrediction) -> Result<ReferenceCdfs> {
    let magnitude = match prediction.magnitude_law {
        MagnitudeLaw::Rayleigh { scale } => MagnitudeCdf { nu: 0.0, scale },
        MagnitudeLaw::Rician { nu, scale } => MagnitudeCdf { nu, scale },
        MagnitudeLaw::Empirical => return Err(Error::NoClosedForm("magnitude")),
    };
    if prediction.phase_law == PhaseLaw::Empirical {
        return Err(Error::NoClosedForm("phase"));
    }
    Ok(ReferenceCdfs {
        magnitude,
        phase: UniformPhaseCdf,
        re: GaussianCdf {
            mean: prediction.mean_re,
            var: prediction.var_re,
        },
        im: GaussianCdf {
            mean: prediction.mean_im,
            var: prediction.var_im,
        },
    })
}

/// Gaussian marginals of both quadratures; defined for every scheme.
pub fn quadrature_cdfs(prediction: &AnalyticPrediction) -> (GaussianCdf, GaussianCdf) {
    (
        GaussianCdf {
            mean: prediction.mean_re,
            var: prediction.var_re,
        },
        GaussianCdf {
            mean: prediction.mean_im,
            var: prediction.var_im,
        },
    )
}
