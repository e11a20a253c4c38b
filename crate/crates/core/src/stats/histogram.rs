use crate::error::{Error, Result};

/// Density histogram over `[lo, hi]` with `bin_count` equal bins. Samples
/// outside the range are dropped and the densities are normalized over the
/// retained samples, so they integrate to 1 on the range. The upper edge
/// belongs to the last bin. No smoothing is applied.
pub fn histogram_pdf(samples: &[f64], bin_count: usize, range: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    if bin_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "bin_count must be at least 2, got {bin_count}"
        )));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidArgument(format!("bad histogram range [{lo}, {hi}]")));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let width = (hi - lo) / bin_count as f64;
    let mut counts = vec![0usize; bin_count];
    let mut kept = 0usize;
    for &x in samples {
        if !(lo..=hi).contains(&x) {
            continue;
        }
        let b = (((x - lo) / width) as usize).min(bin_count - 1);
        counts[b] += 1;
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + (i as f64 + 0.5) * width, c as f64 / (kept as f64 * width)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{trial_rng, Domain};
    use rand::Rng;
    use std::f64::consts::TAU;

    #[test]
    fn all_in_first_bin() {
        let h = histogram_pdf(&[0.1, 0.2, 0.3], 2, (0.0, 2.0)).unwrap();
        assert_eq!(h, vec![(0.5, 1.0), (1.5, 0.0)]);
    }

    #[test]
    fn errors() {
        assert!(histogram_pdf(&[], 4, (0.0, 1.0)).is_err());
        assert!(histogram_pdf(&[0.5], 1, (0.0, 1.0)).is_err());
        assert!(histogram_pdf(&[5.0], 4, (0.0, 1.0)).is_err());
        assert!(histogram_pdf(&[0.5], 4, (1.0, 1.0)).is_err());
    }

    #[test]
    fn uniform_phases_flat() {
        let mut rng = trial_rng(2, Domain::Auxiliary, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>() * TAU).collect();
        let h = histogram_pdf(&xs, 50, (0.0, TAU)).unwrap();
        let width = TAU / 50.0;
        let mass: f64 = h.iter().map(|(_, d)| d * width).sum();
        assert!((mass - 1.0).abs() < 1e-9);
        for (_, d) in h {
            assert!((d * TAU - 1.0).abs() < 0.1);
        }
    }
}
