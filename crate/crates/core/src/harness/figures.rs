//! Plot-ready data for the channel-variance, distribution and key-rate
//! figures: 8×8 half-wavelength array, angle case 1 Ω_i = (30°, 30°),
//! Ω_o = (150°, 60°), case 2 Ω_i = (110°, 50°), Ω_o = (310°, 20°).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::analytic::{predict_distribution, GaussianCdf, MagnitudeCdf, UniformPhaseCdf};
use crate::channel::{sample_batch_sharded, ChannelModel};
use crate::error::{Error, Result};
use crate::geometry::{AnglePair, RisGeometry};
use crate::rng::derive_seed;
use crate::stats::{empirical_summary, histogram_pdf, ks_test};
use crate::weights::{wrap_phase, PhaseScheme};

use super::config::{ExperimentConfig, SweepConfig, SweepParameter};
use super::experiment::{key_rate_row, snr_to_noise_var};
use super::report::{write_sweep_csv, SweepRow, ToleranceKind, Verdict};

pub const ELEMENT_GRID: [f64; 5] = [16.0, 36.0, 64.0, 100.0, 144.0];
pub const SNR_GRID_DB: [f64; 9] = [-10.0, -7.5, -5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig5,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig3c,
        FigureId::Fig5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig3c => "fig3c",
            FigureId::Fig5 => "fig5",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    pub seed: u64,
    /// Channel draws per distribution/variance point.
    pub trials: usize,
    /// Observation pairs per key-rate point.
    pub mi_pairs: usize,
    pub mi_k: usize,
    pub gof_samples: usize,
    pub shards: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            seed: 2023,
            trials: 100_000,
            mi_pairs: 5000,
            mi_k: 5,
            gof_samples: 10_000,
            shards: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureOutput {
    pub figure: FigureId,
    pub files: Vec<PathBuf>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

pub fn case1() -> AnglePair {
    AnglePair::from_degrees(30.0, 30.0, 150.0, 60.0).expect("finite")
}

pub fn case2() -> AnglePair {
    AnglePair::from_degrees(110.0, 50.0, 310.0, 20.0).expect("finite")
}

fn square_model(side: usize, angles: AnglePair, scheme: PhaseScheme) -> Result<ChannelModel> {
    Ok(ChannelModel::new(RisGeometry::half_wavelength(side, side)?, angles, scheme))
}

fn write_rows(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_sweep_csv(&mut f, rows).map_err(|e| Error::io(path, e))
}

fn write_curve(path: &Path, points: &[(f64, f64, f64)]) -> Result<()> {
    let mut text = String::from("x,empirical,analytic\n");
    for (x, e, a) in points {
        text.push_str(&format!("{x},{e},{a}\n"));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Empirical vs predicted total variance over the element-count grid.
fn variance_series(
    scheme: PhaseScheme,
    angles: AnglePair,
    opts: &FigureOptions,
    seed: u64,
    quadrature: Quadrature,
) -> Result<Vec<SweepRow>> {
    ELEMENT_GRID
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let model = square_model(m.sqrt() as usize, angles, scheme)?;
            let batch = sample_batch_sharded(&model, opts.trials, derive_seed(seed, i as u64), opts.shards)?;
            let s = empirical_summary(&batch.samples)?;
            let p = predict_distribution(scheme, &model.geometry, &angles, model.direct_gain)?;
            let (emp, ana) = match quadrature {
                Quadrature::Total => (s.var_total, p.var_total),
                Quadrature::Re => (s.var_re, p.var_re),
                Quadrature::Im => (s.var_im, p.var_im),
            };
            let tol = 0.03;
            Ok(SweepRow {
                x: m,
                empirical: Some(emp),
                analytic: ana,
                tolerance: tol,
                pass: Some((emp - ana).abs() <= tol * ana.abs()),
            })
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Quadrature {
    Total,
    Re,
    Im,
}

fn rows_to_verdicts(prefix: &str, rows: &[SweepRow], kind: ToleranceKind, out: &mut Vec<Verdict>) {
    for r in rows {
        if let (Some(e), Some(p)) = (r.empirical, r.pass) {
            out.push(Verdict {
                name: format!("{prefix}[x={}]", r.x),
                observed: e,
                expected: r.analytic,
                tolerance: r.tolerance,
                kind,
                pass: p,
            });
        }
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Emits the data files of one figure into `outdir`, plus `<fig>.json`
/// with the verdicts.
pub fn reproduce_figure(fig: FigureId, outdir: &Path, opts: &FigureOptions) -> Result<FigureOutput> {
    fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let mut files = Vec::new();
    let mut verdicts = Vec::new();
    let seed = derive_seed(opts.seed, fig as u64);
    let alpha = 0.01;

    match fig {
        FigureId::Fig2a => {
            for (i, (tag, scheme)) in [
                ("cips", PhaseScheme::Cips),
                ("cgps_q2", PhaseScheme::Cgps { q: 2 }),
                ("cgps_q4", PhaseScheme::Cgps { q: 4 }),
                ("dips_b3", PhaseScheme::Dips { bits: 3 }),
            ]
            .into_iter()
            .enumerate()
            {
                let rows = variance_series(scheme, case1(), opts, derive_seed(seed, i as u64), Quadrature::Total)?;
                let path = outdir.join(format!("fig2a_{tag}.csv"));
                write_rows(&path, &rows)?;
                files.push(path);
                rows_to_verdicts(&format!("fig2a_{tag}"), &rows, ToleranceKind::Relative, &mut verdicts);
            }
        }
        FigureId::Fig2b | FigureId::Fig2c => {
            for (i, (tag, scheme)) in [("cips", PhaseScheme::Cips), ("dips_b3", PhaseScheme::Dips { bits: 3 })]
                .into_iter()
                .enumerate()
            {
                let model = square_model(8, case1(), scheme)?;
                let batch = sample_batch_sharded(&model, opts.trials, derive_seed(seed, i as u64), opts.shards)?;
                let head = &batch.samples[..opts.gof_samples.min(batch.samples.len())];
                let name = format!("{}_{tag}", fig.name());
                let (points, gof) = if fig == FigureId::Fig2b {
                    let reference = MagnitudeCdf {
                        nu: 0.0,
                        scale: 32f64.sqrt(),
                    };
                    let mags: Vec<f64> = batch.samples.iter().map(|z| z.norm()).collect();
                    let hist = histogram_pdf(&mags, 60, (0.0, 6.0 * reference.scale))?;
                    let points: Vec<_> = hist.iter().map(|&(x, d)| (x, d, reference.pdf(x))).collect();
                    let gof = ks_test(&sorted(head.iter().map(|z| z.norm()).collect()), &reference, alpha)?;
                    (points, gof)
                } else {
                    let phases: Vec<f64> = batch.samples.iter().map(|z| wrap_phase(z.arg())).collect();
                    let hist = histogram_pdf(&phases, 50, (0.0, std::f64::consts::TAU))?;
                    let flat = 1.0 / std::f64::consts::TAU;
                    let points: Vec<_> = hist.iter().map(|&(x, d)| (x, d, flat)).collect();
                    let gof = ks_test(&sorted(phases[..head.len()].to_vec()), &UniformPhaseCdf, alpha)?;
                    (points, gof)
                };
                let path = outdir.join(format!("{name}.csv"));
                write_curve(&path, &points)?;
                files.push(path);
                verdicts.push(Verdict::from_gof(format!("{name}_ks"), &gof));
            }
        }
        FigureId::Fig3a => {
            for (i, (tag, angles)) in [("case1", case1()), ("case2", case2())].into_iter().enumerate() {
                for (qtag, quad) in [("re", Quadrature::Re), ("im", Quadrature::Im)] {
                    // same seed for both quadratures: they come from one batch
                    let rows = variance_series(
                        PhaseScheme::Dips { bits: 1 },
                        angles,
                        opts,
                        derive_seed(seed, i as u64),
                        quad,
                    )?;
                    let path = outdir.join(format!("fig3a_{tag}_{qtag}.csv"));
                    write_rows(&path, &rows)?;
                    files.push(path);
                    rows_to_verdicts(&format!("fig3a_{tag}_{qtag}"), &rows, ToleranceKind::Relative, &mut verdicts);
                }
            }
        }
        FigureId::Fig3b | FigureId::Fig3c => {
            let imag = fig == FigureId::Fig3c;
            for (i, (tag, angles)) in [("case1", case1()), ("case2", case2())].into_iter().enumerate() {
                let scheme = PhaseScheme::Dips { bits: 1 };
                let model = square_model(8, angles, scheme)?;
                let p = predict_distribution(scheme, &model.geometry, &angles, model.direct_gain)?;
                let batch = sample_batch_sharded(&model, opts.trials, derive_seed(seed, i as u64), opts.shards)?;
                let s = empirical_summary(&batch.samples)?;
                let (vals, var, emp_var): (Vec<f64>, f64, f64) = if imag {
                    (batch.samples.iter().map(|z| z.im).collect(), p.var_im, s.var_im)
                } else {
                    (batch.samples.iter().map(|z| z.re).collect(), p.var_re, s.var_re)
                };
                let half = 5.0 * var.max(1e-9).sqrt();
                let hist = histogram_pdf(&vals, 60, (-half, half))?;
                let gauss = GaussianCdf { mean: 0.0, var };
                let points: Vec<_> = hist.iter().map(|&(x, d)| (x, d, gauss.pdf(x))).collect();
                let name = format!("{}_{tag}", fig.name());
                let path = outdir.join(format!("{name}.csv"));
                write_curve(&path, &points)?;
                files.push(path);
                verdicts.push(Verdict::judge(
                    format!("{name}_variance"),
                    emp_var,
                    var,
                    0.03,
                    ToleranceKind::Relative,
                ));
            }
        }
        FigureId::Fig5 => {
            let mut cfg = ExperimentConfig::baseline(PhaseScheme::Cips, opts.mi_pairs.max(2), seed);
            cfg.mi.enabled = true;
            cfg.mi.pairs = opts.mi_pairs;
            cfg.mi.k = opts.mi_k;
            cfg.shards = opts.shards;
            cfg.sweep = Some(SweepConfig {
                parameter: SweepParameter::SnrDb,
                values: SNR_GRID_DB.to_vec(),
            });
            for (i, (tag, scheme)) in [
                ("cips", PhaseScheme::Cips),
                ("cgps_q2", PhaseScheme::Cgps { q: 2 }),
                ("dips_b2", PhaseScheme::Dips { bits: 2 }),
                ("dips_b1", PhaseScheme::Dips { bits: 1 }),
            ]
            .into_iter()
            .enumerate()
            {
                let rows = SNR_GRID_DB
                    .iter()
                    .enumerate()
                    .map(|(j, &snr)| {
                        let model = square_model(8, case1(), scheme)?.with_noise_var(snr_to_noise_var(64, snr));
                        key_rate_row(&model, snr, &cfg, derive_seed(seed, (i * 100 + j) as u64))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let path = outdir.join(format!("fig5_{tag}.csv"));
                write_rows(&path, &rows)?;
                files.push(path);
                rows_to_verdicts(&format!("fig5_{tag}"), &rows, ToleranceKind::Absolute, &mut verdicts);
            }
        }
    }

    let passed = verdicts.iter().all(|v| v.pass);
    let out = FigureOutput {
        figure: fig,
        files,
        verdicts,
        passed,
    };
    let json_path = outdir.join(format!("{}.json", fig.name()));
    let mut json = serde_json::to_string_pretty(&out).expect("figure output serializes");
    json.push('\n');
    fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    let mut out = out;
    out.files.push(json_path);
    Ok(out)
}
