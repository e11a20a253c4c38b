use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::wrap_phase;

/// Bins of the coarse phase histogram carried in every summary.
pub const PHASE_BINS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeMoments {
    pub mean: f64,
    pub mean_square: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    pub var_re: f64,
    pub var_im: f64,
    pub covariance: f64,
    pub var_total: f64,
    pub magnitude_moments: MagnitudeMoments,
    /// Densities over [0, 2π) in `PHASE_BINS` equal bins.
    pub phase_histogram: Vec<f64>,
}

/// Unbiased two-pass moments, including the Re/Im covariance.
pub fn empirical_summary(samples: &[Complex64]) -> Result<DistributionSummary> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean: Complex64 = samples.iter().sum::<Complex64>() / nf;
    let (mut srr, mut sii, mut sri) = (0.0, 0.0, 0.0);
    for z in samples {
        let d = z - mean;
        srr += d.re * d.re;
        sii += d.im * d.im;
        sri += d.re * d.im;
    }
    let (var_re, var_im) = (srr / (nf - 1.0), sii / (nf - 1.0));

    let mags: Vec<f64> = samples.iter().map(|z| z.norm()).collect();
    let mag_mean = mags.iter().sum::<f64>() / nf;
    let mean_square = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / nf;
    let mag_var = mags.iter().map(|m| (m - mag_mean).powi(2)).sum::<f64>() / (nf - 1.0);

    let mut counts = [0usize; PHASE_BINS];
    for z in samples {
        let bin = (wrap_phase(z.arg()) / TAU * PHASE_BINS as f64) as usize;
        counts[bin.min(PHASE_BINS - 1)] += 1;
    }
    let width = TAU / PHASE_BINS as f64;
    let phase_histogram = counts.iter().map(|&c| c as f64 / (nf * width)).collect();

    Ok(DistributionSummary {
        n,
        mean_re: mean.re,
        mean_im: mean.im,
        var_re,
        var_im,
        covariance: sri / (nf - 1.0),
        var_total: var_re + var_im,
        magnitude_moments: MagnitudeMoments {
            mean: mag_mean,
            mean_square,
            variance: mag_var,
        },
        phase_histogram,
    })
}

/// Mergeable first and second moments of complex samples (Chan et al.
/// pairwise update), for combining shard-level statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexMoments {
    pub n: usize,
    pub mean: Complex64,
    m2_re: f64,
    m2_im: f64,
    c_reim: f64,
}

impl ComplexMoments {
    pub fn from_samples(samples: &[Complex64]) -> Self {
        samples.iter().fold(Self::default(), |mut acc, &z| {
            acc.push(z);
            acc
        })
    }

    pub fn push(&mut self, z: Complex64) {
        self.n += 1;
        let d = z - self.mean;
        self.mean += d / self.n as f64;
        let d2 = z - self.mean;
        self.m2_re += d.re * d2.re;
        self.m2_im += d.im * d2.im;
        self.c_reim += d.re * d2.im;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        let d = other.mean - self.mean;
        let w = na * nb / nf;
        Self {
            n,
            mean: self.mean + d * (nb / nf),
            m2_re: self.m2_re + other.m2_re + d.re * d.re * w,
            m2_im: self.m2_im + other.m2_im + d.im * d.im * w,
            c_reim: self.c_reim + other.c_reim + d.re * d.im * w,
        }
    }

    /// (var_re, var_im, covariance), unbiased.
    pub fn variances(&self) -> (f64, f64, f64) {
        let dof = (self.n as f64 - 1.0).max(1.0);
        (self.m2_re / dof, self.m2_im / dof, self.c_reim / dof)
    }
}
