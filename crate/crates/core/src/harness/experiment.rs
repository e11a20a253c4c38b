//! Single-configuration runs: sample, summarize, compare, judge.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::analytic::{
    independence_condition, predict_distribution_with, skr_closed_form_with, GaussianCdf, MagnitudeCdf,
    MagnitudeLaw, PhaseLaw, UniformPhaseCdf,
};
use crate::channel::{observe, sample_batch_sharded, write_observations_csv, write_samples_csv, ChannelModel, ObservationPair};
use crate::error::{Error, Result};
use crate::geometry::RisGeometry;
use crate::rng::derive_seed;
use crate::stats::{empirical_summary, ks_test, mi_knn, GofResult};
use crate::weights::{wrap_phase, PhaseScheme};

use super::config::{ExperimentConfig, SweepConfig, SweepParameter};
use super::report::{
    write_sweep_csv, AnalyticSection, Conventions, Generator, GofSection, Report, SweepRow, ToleranceKind, Verdict,
    SCHEMA_VERSION,
};

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: Report,
    pub samples: Vec<Complex64>,
    pub observations: Option<Vec<ObservationPair>>,
}

/// Per-quadrature noise variance giving `snr_db` against the unit-power
/// reference M: SNR = M / (2σ_z²).
pub fn snr_to_noise_var(element_count: usize, snr_db: f64) -> f64 {
    element_count as f64 / (2.0 * 10f64.powf(snr_db / 10.0))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.check()?;
    let model = config.model.to_model()?;
    let tol = &config.tolerances;
    let m = model.geometry.element_count() as f64;

    let batch = sample_batch_sharded(&model, config.trials, config.seed, config.shards)?;
    let empirical = empirical_summary(&batch.samples)?;
    let prediction = predict_distribution_with(
        model.scheme,
        &model.geometry,
        &model.legit_angles,
        model.direct_gain,
        model.allow_remainder,
    )?;
    let skr = if model.noise_var_per_quadrature > 0.0 {
        Some(skr_closed_form_with(
            model.scheme,
            &model.geometry,
            &model.legit_angles,
            model.noise_var_per_quadrature,
            config.skr_convention,
            model.allow_remainder,
        )?)
    } else {
        None
    };
    let independence = independence_condition(&model.geometry, &model.legit_angles).ok();

    // goodness of fit on a prefix of the batch
    let head = &batch.samples[..config.gof_samples.min(batch.samples.len())];
    let mut gof = GofSection::default();
    let alpha = tol.ks_alpha;
    if head.len() >= 10 {
        let magnitude_ref = match prediction.magnitude_law {
            MagnitudeLaw::Rayleigh { scale } => Some(MagnitudeCdf { nu: 0.0, scale }),
            MagnitudeLaw::Rician { nu, scale } => Some(MagnitudeCdf { nu, scale }),
            MagnitudeLaw::Empirical => None,
        };
        if let Some(r) = magnitude_ref {
            gof.magnitude = Some(ks_test(&sorted(head.iter().map(|z| z.norm()).collect()), &r, alpha)?);
        }
        if prediction.phase_law == PhaseLaw::Uniform {
            let phases = sorted(head.iter().map(|z| wrap_phase(z.arg())).collect());
            gof.phase = Some(ks_test(&phases, &UniformPhaseCdf, alpha)?);
        }
        let quad = |var: f64, mean: f64, vals: Vec<f64>| -> Result<Option<GofResult>> {
            if var <= 0.0 {
                return Ok(None);
            }
            ks_test(&sorted(vals), &GaussianCdf { mean, var }, alpha).map(Some)
        };
        gof.re = quad(prediction.var_re, prediction.mean_re, head.iter().map(|z| z.re).collect())?;
        gof.im = quad(prediction.var_im, prediction.mean_im, head.iter().map(|z| z.im).collect())?;
    }

    let want_obs = model.noise_var_per_quadrature > 0.0 && (config.mi.enabled || config.outputs.observations_csv);
    let observations = if want_obs {
        Some(observe(&batch.samples, model.noise_var_per_quadrature, config.seed)?)
    } else {
        None
    };
    let mi = match (&observations, config.mi.enabled) {
        (Some(obs), true) => Some(mi_knn(&obs[..config.mi.pairs.min(obs.len())], config.mi.k)?),
        _ => None,
    };

    let mut verdicts = vec![
        Verdict::judge("var_total", empirical.var_total, prediction.var_total, tol.variance_rel, ToleranceKind::Relative),
        Verdict::judge("var_re", empirical.var_re, prediction.var_re, tol.variance_rel, ToleranceKind::Relative),
        Verdict::judge("var_im", empirical.var_im, prediction.var_im, tol.variance_rel, ToleranceKind::Relative),
        Verdict::judge(
            "covariance",
            empirical.covariance,
            prediction.covariance,
            tol.covariance_frac_of_m * m,
            ToleranceKind::Absolute,
        ),
    ];
    let n = empirical.n as f64;
    for (name, obs, exp, var) in [
        ("mean_re", empirical.mean_re, prediction.mean_re, prediction.var_re),
        ("mean_im", empirical.mean_im, prediction.mean_im, prediction.var_im),
    ] {
        // zero-variance quadratures get a floor so the check stays meaningful
        let se = (var.max(1e-18) / n).sqrt();
        verdicts.push(Verdict::judge(name, obs, exp, tol.mean_sigmas * se, ToleranceKind::Absolute));
    }
    // quadrature KS is informational for correlated 1-bit channels, whose
    // sums of ±cos α may sit on a lattice
    let judge_quadratures = prediction.magnitude_law != MagnitudeLaw::Empirical;
    for (name, g) in [("ks_magnitude", &gof.magnitude), ("ks_phase", &gof.phase)] {
        if let Some(g) = g {
            verdicts.push(Verdict::from_gof(name, g));
        }
    }
    if judge_quadratures {
        for (name, g) in [("ks_re", &gof.re), ("ks_im", &gof.im)] {
            if let Some(g) = g {
                verdicts.push(Verdict::from_gof(name, g));
            }
        }
    }
    if let (Some(est), Some(s)) = (&mi, &skr) {
        let kind = if s.is_upper_bound {
            ToleranceKind::UpperBound
        } else {
            ToleranceKind::Absolute
        };
        verdicts.push(Verdict::judge("mi_vs_skr", est.bits, s.rate_bits_per_sample, tol.mi_bits, kind));
    }

    let sweep = match &config.sweep {
        Some(sweep) => {
            let rows = run_sweep(config, &model, sweep)?;
            for r in &rows {
                if let (Some(emp), Some(pass)) = (r.empirical, r.pass) {
                    verdicts.push(Verdict {
                        name: format!("sweep[{:?}={}]", sweep.parameter, r.x),
                        observed: emp,
                        expected: r.analytic,
                        tolerance: r.tolerance,
                        kind: sweep_tolerance_kind(sweep.parameter),
                        pass,
                    });
                }
            }
            Some(rows)
        }
        None => None,
    };

    let passed = verdicts.iter().all(|v| v.pass);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        generator: Generator::default(),
        config: config.clone(),
        conventions: Conventions::default(),
        analytic: AnalyticSection {
            prediction,
            skr,
            independence,
        },
        empirical,
        gof,
        mi,
        sweep,
        verdicts,
        passed,
    };
    Ok(ExperimentOutput {
        report,
        samples: batch.samples,
        observations,
    })
}

fn sweep_tolerance_kind(p: SweepParameter) -> ToleranceKind {
    match p {
        SweepParameter::SnrDb => ToleranceKind::Absolute,
        _ => ToleranceKind::Relative,
    }
}

/// Variance rows for M / q / bits sweeps, key-rate rows for SNR sweeps.
/// Point i uses a seed derived from (seed, i + 1).
fn run_sweep(config: &ExperimentConfig, base: &ChannelModel, sweep: &SweepConfig) -> Result<Vec<SweepRow>> {
    let tol = &config.tolerances;
    sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let seed = derive_seed(config.seed, i as u64 + 1);
            let mut model = base.clone();
            match sweep.parameter {
                SweepParameter::SnrDb => {
                    let m = model.geometry.element_count();
                    model.noise_var_per_quadrature = snr_to_noise_var(m, v);
                    return key_rate_row(&model, v, config, seed);
                }
                SweepParameter::ElementCount => {
                    let side = v.sqrt().round() as usize;
                    let g = &model.geometry;
                    model.geometry = RisGeometry::new(side, side, g.spacing_x(), g.spacing_y(), g.wavelength())?;
                }
                SweepParameter::GroupSize => model.scheme = PhaseScheme::Cgps { q: v as usize },
                SweepParameter::Bits => model.scheme = PhaseScheme::Dips { bits: v as u32 },
            }
            model.validate()?;
            let batch = sample_batch_sharded(&model, config.trials, seed, config.shards)?;
            let emp = empirical_summary(&batch.samples)?.var_total;
            let ana = predict_distribution_with(
                model.scheme,
                &model.geometry,
                &model.legit_angles,
                model.direct_gain,
                model.allow_remainder,
            )?
            .var_total;
            Ok(SweepRow {
                x: v,
                empirical: Some(emp),
                analytic: ana,
                tolerance: tol.variance_rel,
                pass: Some((emp - ana).abs() <= tol.variance_rel * ana),
            })
        })
        .collect()
}

/// Closed-form key rate at the model's noise level against the KSG estimate
/// from `config.mi.pairs` fresh observation pairs.
pub(crate) fn key_rate_row(model: &ChannelModel, x: f64, config: &ExperimentConfig, seed: u64) -> Result<SweepRow> {
    let skr = skr_closed_form_with(
        model.scheme,
        &model.geometry,
        &model.legit_angles,
        model.noise_var_per_quadrature,
        config.skr_convention,
        model.allow_remainder,
    )?;
    let batch = sample_batch_sharded(model, config.mi.pairs, seed, config.shards)?;
    let obs = observe(&batch.samples, model.noise_var_per_quadrature, seed)?;
    let est = mi_knn(&obs, config.mi.k)?.bits;
    let tol = config.tolerances.mi_bits;
    let ana = skr.rate_bits_per_sample;
    let pass = if skr.is_upper_bound {
        est <= ana + tol
    } else {
        (est - ana).abs() <= tol
    };
    Ok(SweepRow {
        x,
        empirical: Some(est),
        analytic: ana,
        tolerance: tol,
        pass: Some(pass),
    })
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the enabled artifacts into `dir` and returns their paths.
pub fn write_outputs(output: &ExperimentOutput, config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if config.outputs.samples_csv {
        let p = dir.join("samples.csv");
        write_samples_csv(create_file(&p)?, &output.samples).map_err(|e| Error::io(&p, e))?;
        written.push(p);
    }
    if config.outputs.observations_csv {
        if let Some(obs) = &output.observations {
            let p = dir.join("observations.csv");
            write_observations_csv(create_file(&p)?, obs).map_err(|e| Error::io(&p, e))?;
            written.push(p);
        }
    }
    if let Some(rows) = &output.report.sweep {
        let p = dir.join("sweep.csv");
        write_sweep_csv(create_file(&p)?, rows).map_err(|e| Error::io(&p, e))?;
        written.push(p);
    }
    if config.outputs.report_json {
        let p = dir.join("report.json");
        fs::write(&p, output.report.to_json()).map_err(|e| Error::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_mapping() {
        assert_eq!(snr_to_noise_var(64, 0.0), 32.0);
        assert!((snr_to_noise_var(64, 10.0) - 3.2).abs() < 1e-12);
    }

    #[test]
    fn minimal_cips_run_is_populated_and_deterministic() {
        let mut cfg = ExperimentConfig::baseline(PhaseScheme::Cips, 1000, 3);
        cfg.mi.enabled = true;
        cfg.mi.pairs = 500;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        let r = &a.report;
        assert_eq!(r.empirical.n, 1000);
        assert!(r.analytic.skr.is_some());
        assert!(r.gof.magnitude.is_some() && r.gof.phase.is_some());
        assert!(r.gof.re.is_some() && r.gof.im.is_some());
        assert!(r.mi.is_some());
        assert!(r.verdicts.iter().any(|v| v.name == "mi_vs_skr"));
        assert_eq!(r.passed, r.verdicts.iter().all(|v| v.pass));
    }

    #[test]
    fn strict_cgps_remainder_is_model_error() {
        let cfg = ExperimentConfig::baseline(PhaseScheme::Cgps { q: 3 }, 1000, 3);
        let err = run_experiment(&cfg).unwrap_err();
        assert!(err.to_string().contains("NotDivisible"));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn element_count_sweep_rows() {
        let mut cfg = ExperimentConfig::baseline(PhaseScheme::Cips, 20_000, 5);
        cfg.sweep = Some(SweepConfig {
            parameter: SweepParameter::ElementCount,
            values: vec![16.0, 36.0, 64.0],
        });
        let out = run_experiment(&cfg).unwrap();
        let rows = out.report.sweep.as_ref().unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!(r.analytic, r.x);
        }
    }
}
