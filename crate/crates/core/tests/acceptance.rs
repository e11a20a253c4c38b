//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ris_keygen::analytic::skr_closed_form;
use ris_keygen::channel::{observe, reflection_channel, sample_batch, sample_batch_sharded, ChannelModel, ChannelSampler};
use ris_keygen::geometry::steering_product;
use ris_keygen::harness::figures::{case1, case2};
use ris_keygen::harness::{run_experiment, snr_to_noise_var, write_outputs, ExperimentConfig, SweepConfig, SweepParameter};
use ris_keygen::stats::{empirical_summary, ks_test, mi_knn};
use ris_keygen::weights::{mrt_phases, wrap_phase};
use ris_keygen::{AnglePair, PhaseScheme, RisGeometry};

const GRID: [usize; 5] = [16, 36, 64, 100, 144];
const T: usize = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn square(m: usize) -> RisGeometry {
    let side = (m as f64).sqrt().round() as usize;
    RisGeometry::half_wavelength(side, side).unwrap()
}

fn var_total(model: &ChannelModel, seed: u64) -> f64 {
    let batch = sample_batch(model, T, seed).unwrap();
    empirical_summary(&batch.samples).unwrap().var_total
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn timed(limit: Duration, start: Instant, mut parts: Vec<String>, ok: bool) -> Outcome {
    let took = start.elapsed();
    parts.push(format!("{:.1}s/{}s", took.as_secs_f64(), limit.as_secs()));
    outcome(ok && took < limit, parts.join(" "))
}

/// α_m from the array geometry, written out per element.
fn alpha_oracle(mx: usize, my: usize, angles: &AnglePair) -> Vec<f64> {
    let (pi, ti, po, to) = (angles.psi_in, angles.theta_in, angles.psi_out, angles.theta_out);
    let kd = PI;
    let xi_x = kd * (pi.cos() * ti.sin() + po.cos() * to.sin());
    let xi_y = kd * (pi.sin() * ti.sin() + po.sin() * to.sin());
    let mut out = Vec::with_capacity(mx * my);
    for y in 0..my {
        for x in 0..mx {
            out.push(x as f64 * xi_x + y as f64 * xi_y);
        }
    }
    out
}

fn linearity() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (scheme, tag) in [(PhaseScheme::Cips, "cips"), (PhaseScheme::Dips { bits: 3 }, "dips3")] {
        for (i, &m) in GRID.iter().enumerate() {
            let v = var_total(&ChannelModel::new(square(m), case1(), scheme), 100 + i as u64);
            ok &= rel(v, m as f64) <= 0.03;
            parts.push(format!("{tag}/M={m}:{:.2}%", 100.0 * rel(v, m as f64)));
        }
    }
    timed(Duration::from_secs(30), start, parts, ok)
}

fn cgps_variance() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for q in [2usize, 4] {
        for (i, &m) in GRID.iter().enumerate() {
            let v = var_total(&ChannelModel::new(square(m), case1(), PhaseScheme::Cgps { q }), 200 + i as u64);
            let want = (q * m) as f64;
            ok &= rel(v, want) <= 0.03;
            parts.push(format!("q={q}/M={m}:{:.2}%", 100.0 * rel(v, want)));
        }
    }
    timed(Duration::from_secs(30), start, parts, ok)
}

fn ks_pair(magnitude: bool) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (scheme, tag) in [(PhaseScheme::Cips, "cips"), (PhaseScheme::Dips { bits: 3 }, "dips3")] {
        let batch = sample_batch(&ChannelModel::new(square(64), case1(), scheme), 10_000, 300).unwrap();
        let mut xs: Vec<f64> = batch
            .samples
            .iter()
            .map(|z| if magnitude { z.norm() } else { wrap_phase(z.arg()) })
            .collect();
        xs.sort_by(f64::total_cmp);
        let g = if magnitude {
            ks_test(&xs, &|r: f64| if r <= 0.0 { 0.0 } else { 1.0 - (-r * r / 64.0).exp() }, 0.01)
        } else {
            ks_test(&xs, &|p: f64| (p / TAU).clamp(0.0, 1.0), 0.01)
        }
        .unwrap();
        ok &= g.pass;
        parts.push(format!("{tag}:D={:.4}<{:.4}", g.statistic, g.critical_value));
    }
    outcome(ok, parts.join(" "))
}

/// Moments of H for 1-bit phases by explicit enumeration over φ ∈ {0, π}
/// for every element pair.
fn one_bit_oracle(alpha: &[f64]) -> (f64, f64, f64) {
    let levels = [0.0, PI];
    let (mut rr, mut ii, mut ri) = (0.0, 0.0, 0.0);
    for (m, &am) in alpha.iter().enumerate() {
        for (n, &an) in alpha.iter().enumerate() {
            let (mut err, mut eii, mut eri) = (0.0, 0.0, 0.0);
            if m == n {
                for p in levels {
                    err += (p + am).cos().powi(2) / 2.0;
                    eii += (p + am).sin().powi(2) / 2.0;
                    eri += (p + am).cos() * (p + am).sin() / 2.0;
                }
            } else {
                for p in levels {
                    for s in levels {
                        err += (p + am).cos() * (s + an).cos() / 4.0;
                        eii += (p + am).sin() * (s + an).sin() / 4.0;
                        eri += (p + am).cos() * (s + an).sin() / 4.0;
                    }
                }
            }
            rr += err;
            ii += eii;
            ri += eri;
        }
    }
    (rr, ii, ri)
}

fn one_bit_quadratures() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, (angles, tag)) in [(case1(), "case1"), (case2(), "case2")].into_iter().enumerate() {
        let model = ChannelModel::new(square(64), angles, PhaseScheme::Dips { bits: 1 });
        let s = empirical_summary(&sample_batch(&model, T, 400 + i as u64).unwrap().samples).unwrap();
        let (vr, vi, c) = one_bit_oracle(&alpha_oracle(8, 8, &angles));
        let good = rel(s.var_re, vr) <= 0.03 && rel(s.var_im, vi) <= 0.03 && (s.covariance - c).abs() <= 0.05 * 64.0;
        ok &= good;
        parts.push(format!(
            "{tag}:re {:.2}/{:.2} im {:.2}/{:.2} cov {:.2}/{:.2}",
            s.var_re, vr, s.var_im, vi, s.covariance, c
        ));
    }
    outcome(ok, parts.join(" "))
}

fn independence() -> Outcome {
    // (cosψ + sinψ) vanishes at 135° and -45°, so γ = 0 with nonzero ξ.
    let angles = AnglePair::from_degrees(135.0, 30.0, -45.0, 60.0).unwrap();
    let geom = square(64);
    let check = ris_keygen::analytic::independence_condition(&geom, &angles).unwrap();
    let model = ChannelModel::new(geom, angles, PhaseScheme::Dips { bits: 1 });
    let s = empirical_summary(&sample_batch(&model, T, 500).unwrap().samples).unwrap();
    let ok = check.satisfied && s.covariance.abs() < 1.3 && rel(s.var_total, 64.0) <= 0.03;
    outcome(
        ok,
        format!(
            "gamma={:.2e} b={} cov={:.3} var_total={:.2}",
            check.gamma, check.nearest_b, s.covariance, s.var_total
        ),
    )
}

fn angle_invariance() -> Outcome {
    let a = var_total(&ChannelModel::new(square(64), case1(), PhaseScheme::Cips), 600);
    let b = var_total(&ChannelModel::new(square(64), case2(), PhaseScheme::Cips), 601);
    let d = (a - b).abs() / a.min(b);
    outcome(d < 0.02, format!("{a:.2} vs {b:.2} ({:.2}%)", 100.0 * d))
}

fn knn_rate(model: &ChannelModel, nv: f64, seed: u64) -> f64 {
    let batch = sample_batch(model, 5000, seed).unwrap();
    let pairs = observe(&batch.samples, nv, seed).unwrap();
    mi_knn(&pairs, 5).unwrap().bits
}

fn skr_agreement() -> Outcome {
    let start = Instant::now();
    let geom = square(64);
    let mut parts = Vec::new();
    let mut ok = true;
    for (j, snr) in [-10.0, -5.0, 0.0, 5.0, 10.0].into_iter().enumerate() {
        let nv = snr_to_noise_var(64, snr);
        for (scheme, tag) in [(PhaseScheme::Cips, "cips"), (PhaseScheme::Dips { bits: 2 }, "dips2")] {
            let model = ChannelModel::new(geom.clone(), case1(), scheme);
            let est = knn_rate(&model, nv, 700 + j as u64);
            let cf = skr_closed_form(scheme, &geom, &case1(), nv).unwrap().rate_bits_per_sample;
            ok &= (est - cf).abs() <= 0.2;
            parts.push(format!("{tag}@{snr}:{est:.3}/{cf:.3}"));
        }
        let cips = skr_closed_form(PhaseScheme::Cips, &geom, &case1(), nv).unwrap().rate_bits_per_sample;
        let cgps = skr_closed_form(PhaseScheme::Cgps { q: 2 }, &geom, &case1(), nv)
            .unwrap()
            .rate_bits_per_sample;
        ok &= cgps > cips;
    }
    timed(Duration::from_secs(120), start, parts, ok)
}

fn half_factor() -> Outcome {
    let geom = square(64);
    let nv = snr_to_noise_var(64, 10.0);
    let scheme = PhaseScheme::Dips { bits: 2 };
    let est = knn_rate(&ChannelModel::new(geom.clone(), case1(), scheme), nv, 800);
    let cf = skr_closed_form(scheme, &geom, &case1(), nv).unwrap().rate_bits_per_sample;
    let ok = (est - cf).abs() <= 0.2 && (est - 2.0 * cf).abs() > 1.0;
    outcome(ok, format!("knn={est:.3} closed={cf:.3} doubled={:.3}", 2.0 * cf))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut worst: f64 = 0.0;
    let mut worst_mrt: f64 = 0.0;
    for i in 0..100u64 {
        let (mx, my) = (rng.random_range(1..=12usize), rng.random_range(1..=12usize));
        let geom = RisGeometry::half_wavelength(mx, my).unwrap();
        let deg = |r: &mut ChaCha8Rng, hi: f64| r.random_range(0.0..hi);
        let angles =
            AnglePair::from_degrees(deg(&mut rng, 360.0), deg(&mut rng, 90.0), deg(&mut rng, 360.0), deg(&mut rng, 90.0))
                .unwrap();
        let m = mx * my;
        let divisors: Vec<usize> = (1..=m).filter(|q| m % q == 0).collect();
        let scheme = match i % 3 {
            0 => PhaseScheme::Cips,
            1 => PhaseScheme::Cgps {
                q: divisors[rng.random_range(0..divisors.len())],
            },
            _ => PhaseScheme::Dips {
                bits: rng.random_range(1..=6),
            },
        };
        let sampler = ChannelSampler::new(&ChannelModel::new(geom.clone(), angles, scheme)).unwrap();
        let w = sampler.weights(i, 0);
        let steering = steering_product(&geom, &angles);
        let fast = reflection_channel(&w, &steering).unwrap();
        let naive: Complex64 = w
            .phases()
            .iter()
            .zip(alpha_oracle(mx, my, &angles))
            .map(|(p, a)| Complex64::from_polar(1.0, p + a))
            .sum();
        worst = worst.max((fast - naive).norm());

        let h = reflection_channel(&mrt_phases(&geom, &angles), &steering).unwrap();
        worst_mrt = worst_mrt.max(rel(h.norm(), m as f64));
    }
    outcome(
        worst <= 1e-12 && worst_mrt <= 1e-9,
        format!("max|fast-naive|={worst:.2e} max MRT rel={worst_mrt:.2e}"),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let mut cfg = ExperimentConfig::baseline(PhaseScheme::Dips { bits: 2 }, 20_000, 1234);
    cfg.mi.enabled = true;
    cfg.mi.pairs = 2000;
    cfg.outputs.observations_csv = true;
    cfg.sweep = Some(SweepConfig {
        parameter: SweepParameter::SnrDb,
        values: vec![-5.0, 5.0],
    });
    let root = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (run, shards) in [(0, 1usize), (1, 1), (2, 4), (3, 16)] {
        cfg.shards = shards;
        let dir = root.path().join(format!("run{run}"));
        let out = run_experiment(&cfg).unwrap();
        write_outputs(&out, &cfg, &dir).unwrap();
        runs.push(snapshot(&dir));
    }
    let batches: Vec<_> = [1usize, 4, 16]
        .iter()
        .map(|&s| sample_batch_sharded(&cfg.model.to_model().unwrap(), 1000, 9, s).unwrap().samples)
        .collect();
    let same = runs.windows(2).all(|w| w[0] == w[1]) && batches.windows(2).all(|w| w[0] == w[1]);
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    outcome(same && names.len() >= 4, format!("{} files: {}", names.len(), names.join(",")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("variance linearity (CIPS, DIPS B=3)", linearity),
        ("CGPS variance qM", cgps_variance),
        ("magnitude law KS", || ks_pair(true)),
        ("phase law KS", || ks_pair(false)),
        ("1-bit quadratures vs oracle", one_bit_quadratures),
        ("independence condition gamma=0", independence),
        ("angle invariance", angle_invariance),
        ("SKR agreement with KSG", skr_agreement),
        ("half-factor adjudication", half_factor),
        ("oracle equivalence and MRT", oracle_equivalence),
        ("determinism across runs and shards", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
