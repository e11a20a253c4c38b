//! Reflection channel synthesis and noisy reciprocal observations.
//!
//! The pilot symbol is fixed to 1 and path loss is omitted, so a channel
//! sample is `h_ab + Σ_m e^{j(φ_m + α_m)}`. Noise variance is specified per
//! real quadrature (σ_z²); total complex noise power is 2σ_z².

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{steering_product, AnglePair, RisGeometry, SteeringProduct};
use crate::rng::{trial_rng, Domain};
use crate::weights::{
    mrt_phases, partition_groups_with, sample_cgps_with, sample_cips, sample_dips, wrap_phase,
    GroupPartition, PhaseScheme, WeightVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub geometry: RisGeometry,
    pub legit_angles: AnglePair,
    pub scheme: PhaseScheme,
    pub direct_gain: Complex64,
    pub noise_var_per_quadrature: f64,
    /// Permit CGPS group sizes that do not divide M (extra partial group).
    pub allow_remainder: bool,
}

impl ChannelModel {
    pub fn new(geometry: RisGeometry, legit_angles: AnglePair, scheme: PhaseScheme) -> Self {
        Self {
            geometry,
            legit_angles,
            scheme,
            direct_gain: Complex64::new(0.0, 0.0),
            noise_var_per_quadrature: 0.0,
            allow_remainder: false,
        }
    }

    pub fn with_direct_gain(mut self, gain: Complex64) -> Self {
        self.direct_gain = gain;
        self
    }

    pub fn with_noise_var(mut self, noise_var: f64) -> Self {
        self.noise_var_per_quadrature = noise_var;
        self
    }

    pub fn with_allow_remainder(mut self, allow: bool) -> Self {
        self.allow_remainder = allow;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate(&self.geometry)?;
        if let PhaseScheme::Cgps { q } = self.scheme {
            partition_groups_with(&self.geometry, q, self.allow_remainder)?;
        }
        if !(self.noise_var_per_quadrature >= 0.0 && self.noise_var_per_quadrature.is_finite()) {
            return Err(Error::InvalidNoise("finite and nonnegative"));
        }
        if !(self.direct_gain.re.is_finite() && self.direct_gain.im.is_finite()) {
            return Err(Error::InvalidArgument("direct gain must be finite".into()));
        }
        Ok(())
    }
}

/// Σ_m e^{j(φ_m + α_m)}.
pub fn reflection_channel(weights: &WeightVector, steering: &SteeringProduct) -> Result<Complex64> {
    if weights.len() != steering.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: steering.len(),
        });
    }
    Ok(weights
        .phases()
        .iter()
        .zip(steering.phases())
        .map(|(&phi, &alpha)| Complex64::cis(phi + alpha))
        .sum())
}

/// Legitimate-link weights evaluated with another steering product.
pub fn cross_angle_channel(
    weights: &WeightVector,
    geom: &RisGeometry,
    eavesdropper_angles: &AnglePair,
) -> Result<Complex64> {
    reflection_channel(weights, &steering_product(geom, eavesdropper_angles))
}

/// Precomputed per-model state for drawing trials.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    model: ChannelModel,
    steering: SteeringProduct,
    cgps: Option<(WeightVector, GroupPartition)>,
}

impl ChannelSampler {
    pub fn new(model: &ChannelModel) -> Result<Self> {
        model.validate()?;
        let steering = steering_product(&model.geometry, &model.legit_angles);
        let cgps = match model.scheme {
            PhaseScheme::Cgps { q } => Some((
                mrt_phases(&model.geometry, &model.legit_angles),
                partition_groups_with(&model.geometry, q, model.allow_remainder)?,
            )),
            _ => None,
        };
        Ok(Self {
            model: model.clone(),
            steering,
            cgps,
        })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn steering(&self) -> &SteeringProduct {
        &self.steering
    }

    /// The weight draw used by trial `trial` under `seed`.
    pub fn weights(&self, seed: u64, trial: u64) -> WeightVector {
        let mut rng = trial_rng(seed, Domain::Weights, trial);
        let geom = &self.model.geometry;
        match (self.model.scheme, &self.cgps) {
            (PhaseScheme::Cips, _) => sample_cips(geom, &mut rng),
            (PhaseScheme::Dips { bits }, _) => {
                sample_dips(geom, bits, &mut rng).expect("validated in constructor")
            }
            (PhaseScheme::Cgps { .. }, Some((mrt, part))) => sample_cgps_with(mrt, part, &mut rng),
            (PhaseScheme::Cgps { .. }, None) => unreachable!("CGPS state built in constructor"),
        }
    }

    pub fn channel(&self, seed: u64, trial: u64) -> Complex64 {
        let w = self.weights(seed, trial);
        self.model.direct_gain + reflection_channel(&w, &self.steering).expect("lengths match")
    }

    /// Channel seen at `angles` with the weights of trial `trial`.
    pub fn channel_at(&self, angles: &AnglePair, seed: u64, trial: u64) -> Complex64 {
        let steering = steering_product(&self.model.geometry, angles);
        let w = self.weights(seed, trial);
        self.model.direct_gain + reflection_channel(&w, &steering).expect("lengths match")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub samples: Vec<Complex64>,
    pub seed: u64,
    pub model: ChannelModel,
}

impl SampleBatch {
    pub fn trial_count(&self) -> usize {
        self.samples.len()
    }
}

pub fn sample_batch(model: &ChannelModel, trials: usize, seed: u64) -> Result<SampleBatch> {
    sample_batch_sharded(model, trials, seed, 1)
}

/// Splits `0..trials` into `shards` contiguous ranges generated in parallel.
/// Each trial owns its random stream, so the output does not depend on
/// `shards`.
pub fn sample_batch_sharded(
    model: &ChannelModel,
    trials: usize,
    seed: u64,
    shards: usize,
) -> Result<SampleBatch> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let sampler = ChannelSampler::new(model)?;
    let samples = run_sharded(trials, shards, |t| sampler.channel(seed, t));
    Ok(SampleBatch {
        samples,
        seed,
        model: model.clone(),
    })
}

/// Channel values at `eavesdropper_angles` under the same weight draws as
/// [`sample_batch_sharded`] with the same seed.
pub fn eavesdropper_batch(
    model: &ChannelModel,
    eavesdropper_angles: &AnglePair,
    trials: usize,
    seed: u64,
    shards: usize,
) -> Result<Vec<Complex64>> {
    let sampler = ChannelSampler::new(model)?;
    let steering = steering_product(&model.geometry, eavesdropper_angles);
    Ok(run_sharded(trials, shards, |t| {
        let w = sampler.weights(seed, t);
        model.direct_gain + reflection_channel(&w, &steering).expect("lengths match")
    }))
}

pub(crate) fn run_sharded<T, F>(trials: usize, shards: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let shards = shards.clamp(1, trials.max(1));
    let chunk = trials.div_ceil(shards);
    let parts: Vec<Vec<T>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let lo = s * chunk;
            let hi = ((s + 1) * chunk).min(trials);
            (lo..hi).map(|t| f(t as u64)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationPair {
    pub y_a: Complex64,
    pub y_b: Complex64,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std_dev: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_dev, im * std_dev)
}

/// y_a = h + z_a, y_b = h + z_b with independent CN noise, σ_z² per quadrature.
pub fn observation_pair<R: Rng + ?Sized>(
    h: Complex64,
    noise_var_per_quadrature: f64,
    rng: &mut R,
) -> Result<ObservationPair> {
    if !(noise_var_per_quadrature >= 0.0 && noise_var_per_quadrature.is_finite()) {
        return Err(Error::InvalidNoise("finite and nonnegative"));
    }
    let sd = noise_var_per_quadrature.sqrt();
    let z_a = complex_gaussian(rng, sd);
    let z_b = complex_gaussian(rng, sd);
    Ok(ObservationPair {
        y_a: h + z_a,
        y_b: h + z_b,
    })
}

/// One observation pair per channel sample; sample `t` draws its noise from
/// the per-trial noise stream.
pub fn observe(samples: &[Complex64], noise_var_per_quadrature: f64, seed: u64) -> Result<Vec<ObservationPair>> {
    if !(noise_var_per_quadrature >= 0.0 && noise_var_per_quadrature.is_finite()) {
        return Err(Error::InvalidNoise("finite and nonnegative"));
    }
    Ok(samples
        .iter()
        .enumerate()
        .map(|(t, &h)| {
            let mut rng = trial_rng(seed, Domain::Noise, t as u64);
            observation_pair(h, noise_var_per_quadrature, &mut rng).expect("noise checked")
        })
        .collect())
}

/// `trial,re,im,mag,phase` with phase in [0, 2π).
pub fn write_samples_csv<W: Write>(mut out: W, samples: &[Complex64]) -> std::io::Result<()> {
    writeln!(out, "trial,re,im,mag,phase")?;
    for (t, z) in samples.iter().enumerate() {
        writeln!(out, "{t},{},{},{},{}", z.re, z.im, z.norm(), wrap_phase(z.arg()))?;
    }
    Ok(())
}

/// `trial,ya_re,ya_im,yb_re,yb_im`.
pub fn write_observations_csv<W: Write>(mut out: W, pairs: &[ObservationPair]) -> std::io::Result<()> {
    writeln!(out, "trial,ya_re,ya_im,yb_re,yb_im")?;
    for (t, p) in pairs.iter().enumerate() {
        writeln!(out, "{t},{},{},{},{}", p.y_a.re, p.y_a.im, p.y_b.re, p.y_b.im)?;
    }
    Ok(())
}
