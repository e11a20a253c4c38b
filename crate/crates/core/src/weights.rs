//! Random RIS weight samplers: continuous individual (CIPS), continuous
//! group with MRT compensation (CGPS) and discrete individual (DIPS).

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{steering_product, AnglePair, RisGeometry};

/// Largest supported DIPS resolution; 2^B levels must fit comfortably in u64.
pub const MAX_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum PhaseScheme {
    Cips,
    Cgps { q: usize },
    Dips { bits: u32 },
}

impl PhaseScheme {
    /// Checks scheme parameters against the array size. Divisibility of the
    /// group size is checked separately by [`partition_groups`].
    pub fn validate(&self, geom: &RisGeometry) -> Result<()> {
        match *self {
            PhaseScheme::Cips => Ok(()),
            PhaseScheme::Cgps { q } => {
                if q == 0 || q > geom.element_count() {
                    Err(Error::InvalidScheme(format!(
                        "group size q={q} outside [1, {}]",
                        geom.element_count()
                    )))
                } else {
                    Ok(())
                }
            }
            PhaseScheme::Dips { bits } => {
                if bits == 0 || bits > MAX_BITS {
                    Err(Error::InvalidScheme(format!(
                        "quantization bits B={bits} outside [1, {MAX_BITS}]"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseScheme::Cips => "cips",
            PhaseScheme::Cgps { .. } => "cgps",
            PhaseScheme::Dips { .. } => "dips",
        }
    }
}

impl fmt::Display for PhaseScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseScheme::Cips => write!(f, "CIPS"),
            PhaseScheme::Cgps { q } => write!(f, "CGPS q={q}"),
            PhaseScheme::Dips { bits } => write!(f, "DIPS B={bits}"),
        }
    }
}

/// Element phases φ_m in [0, 2π), row-major. `scheme` is `None` for the
/// deterministic MRT vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    phases: Vec<f64>,
    scheme: Option<PhaseScheme>,
}

impl WeightVector {
    pub fn from_phases(phases: Vec<f64>, scheme: Option<PhaseScheme>) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return Err(Error::InvalidArgument(format!("phase {bad} outside [0, 2π)")));
        }
        Ok(Self { phases, scheme })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn scheme(&self) -> Option<PhaseScheme> {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Reduce to [0, 2π), normalizing −0 and the round-up-to-2π edge case.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU) + 0.0;
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    wrap_phase(rng.random::<f64>() * TAU)
}

pub fn sample_cips<R: Rng + ?Sized>(geom: &RisGeometry, rng: &mut R) -> WeightVector {
    let phases = (0..geom.element_count()).map(|_| uniform_phase(rng)).collect();
    WeightVector {
        phases,
        scheme: Some(PhaseScheme::Cips),
    }
}

pub fn sample_dips<R: Rng + ?Sized>(geom: &RisGeometry, bits: u32, rng: &mut R) -> Result<WeightVector> {
    let scheme = PhaseScheme::Dips { bits };
    scheme.validate(geom)?;
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let phases = (0..geom.element_count())
        .map(|_| rng.random_range(0..levels) as f64 * step)
        .collect();
    Ok(WeightVector {
        phases,
        scheme: Some(scheme),
    })
}

/// Phases that cancel the steering product: φ_m = (−α_m) mod 2π.
pub fn mrt_phases(geom: &RisGeometry, angles: &AnglePair) -> WeightVector {
    let phases = steering_product(geom, angles)
        .phases()
        .iter()
        .map(|&a| wrap_phase(-a))
        .collect();
    WeightVector {
        phases,
        scheme: None,
    }
}

/// Contiguous row-major groups of `q` elements. `remainder` counts leftover
/// elements placed in one extra partial group (only in permissive mode).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupPartition {
    assignments: Vec<usize>,
    group_size: usize,
    group_count: usize,
    remainder: usize,
}

impl GroupPartition {
    /// 0-based group index of each element.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// Number of full groups N = ⌊M/q⌋.
    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn remainder(&self) -> usize {
        self.remainder
    }

    /// Full groups plus the partial one, if any.
    pub fn total_groups(&self) -> usize {
        self.group_count + usize::from(self.remainder > 0)
    }
}

/// Strict partition: rejects `q` that does not divide M.
pub fn partition_groups(geom: &RisGeometry, q: usize) -> Result<GroupPartition> {
    partition_groups_with(geom, q, false)
}

pub fn partition_groups_with(geom: &RisGeometry, q: usize, allow_remainder: bool) -> Result<GroupPartition> {
    PhaseScheme::Cgps { q }.validate(geom)?;
    let m = geom.element_count();
    let remainder = m % q;
    if remainder != 0 && !allow_remainder {
        return Err(Error::NotDivisible { m, q, remainder });
    }
    Ok(GroupPartition {
        assignments: (0..m).map(|i| i / q).collect(),
        group_size: q,
        group_count: m / q,
        remainder,
    })
}

pub fn sample_cgps<R: Rng + ?Sized>(
    geom: &RisGeometry,
    angles: &AnglePair,
    q: usize,
    rng: &mut R,
) -> Result<WeightVector> {
    let partition = partition_groups(geom, q)?;
    let mrt = mrt_phases(geom, angles);
    Ok(sample_cgps_with(&mrt, &partition, rng))
}

/// CGPS draw from a precomputed MRT vector and partition: one uniform phase
/// per group added to every member's MRT phase.
pub fn sample_cgps_with<R: Rng + ?Sized>(
    mrt: &WeightVector,
    partition: &GroupPartition,
    rng: &mut R,
) -> WeightVector {
    let group_phases: Vec<f64> = (0..partition.total_groups()).map(|_| uniform_phase(rng)).collect();
    let phases = mrt
        .phases
        .iter()
        .zip(&partition.assignments)
        .map(|(&p, &g)| wrap_phase(p + group_phases[g]))
        .collect();
    WeightVector {
        phases,
        scheme: Some(PhaseScheme::Cgps {
            q: partition.group_size,
        }),
    }
}
