//! Kraskov–Stögbauer–Grassberger mutual information estimator (first
//! variant) between the complex observations y_a and y_b, treated as two
//! 2-D real vectors under the max-norm.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ObservationPair;
use crate::error::{Error, Result};
use crate::rng::{trial_rng, Domain};
use crate::special::digamma_table;

pub const DEFAULT_K: usize = 5;

const DUPLICATE_DISTANCE: f64 = 1e-12;
const JITTER_AMPLITUDE: f64 = 1e-10;
const JITTER_SEED: u64 = 0x6b73_6731;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub bits: f64,
    pub k_neighbors: usize,
    pub n: usize,
    /// Points that received deterministic jitter to break exact ties.
    pub jittered: usize,
}

type Point = [f64; 4];

#[inline]
fn dist_x(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

#[inline]
fn dist_y(a: &Point, b: &Point) -> f64 {
    (a[2] - b[2]).abs().max((a[3] - b[3]).abs())
}

/// (nearest, k-th nearest) neighbour distances in the joint space.
fn neighbour_distances(points: &[Point], i: usize, k: usize) -> (f64, f64) {
    let p = &points[i];
    // k smallest distances seen so far, ascending
    let mut best = vec![f64::INFINITY; k];
    for (j, q) in points.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = dist_x(p, q).max(dist_y(p, q));
        if d < best[k - 1] {
            let mut pos = k - 1;
            while pos > 0 && best[pos - 1] > d {
                best[pos] = best[pos - 1];
                pos -= 1;
            }
            best[pos] = d;
        }
    }
    (best[0], best[k - 1])
}

fn marginal_counts(points: &[Point], i: usize, eps: f64) -> (usize, usize) {
    let p = &points[i];
    let mut nx = 0;
    let mut ny = 0;
    for (j, q) in points.iter().enumerate() {
        if j == i {
            continue;
        }
        nx += usize::from(dist_x(p, q) < eps);
        ny += usize::from(dist_y(p, q) < eps);
    }
    (nx, ny)
}

/// KSG estimate of I(y_a; y_b) in bits.
///
/// Points that coincide with another point (max-norm distance below 1e-12)
/// are displaced by a seeded jitter of amplitude 1e-10 before estimation.
/// Neighbour queries run in parallel; the result does not depend on the
/// thread count.
pub fn mi_knn(pairs: &[ObservationPair], k: usize) -> Result<MiEstimate> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let n = pairs.len();
    if n <= k {
        return Err(Error::InsufficientSamples { needed: k + 1, got: n });
    }
    if pairs
        .iter()
        .all(|p| (p.y_a - p.y_b).norm() <= DUPLICATE_DISTANCE)
    {
        return Err(Error::ZeroNoiseDegenerate);
    }
    let mut points: Vec<Point> = pairs
        .iter()
        .map(|p| [p.y_a.re, p.y_a.im, p.y_b.re, p.y_b.im])
        .collect();
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("observations must be finite".into()));
    }

    let knn = |points: &[Point]| -> Vec<(f64, f64)> {
        (0..n)
            .into_par_iter()
            .map(|i| neighbour_distances(points, i, k))
            .collect()
    };
    let mut dists = knn(&points);
    let duplicates: Vec<usize> = (0..n).filter(|&i| dists[i].0 < DUPLICATE_DISTANCE).collect();
    if !duplicates.is_empty() {
        for &i in &duplicates {
            let mut rng = trial_rng(JITTER_SEED, Domain::Jitter, i as u64);
            for v in points[i].iter_mut() {
                *v += JITTER_AMPLITUDE * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        dists = knn(&points);
    }
    let eps: Vec<f64> = dists.into_iter().map(|(_, kth)| kth).collect();
    let counts: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| marginal_counts(&points, i, eps[i]))
        .collect();

    let psi = digamma_table(n + 1);
    let marginal: f64 = counts.iter().map(|&(nx, ny)| psi[nx + 1] + psi[ny + 1]).sum::<f64>() / n as f64;
    let nats = psi[k] + psi[n] - marginal;
    Ok(MiEstimate {
        bits: nats / std::f64::consts::LN_2,
        k_neighbors: k,
        n,
        jittered: duplicates.len(),
    })
}
