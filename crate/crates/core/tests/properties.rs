use std::f64::consts::TAU;

use num_complex::Complex64;
use ris_keygen::channel::{eavesdropper_batch, observe, sample_batch, ChannelModel};
use ris_keygen::harness::figures::case1;
use ris_keygen::stats::{empirical_summary, ks_test, mi_knn};
use ris_keygen::weights::wrap_phase;
use ris_keygen::{AnglePair, PhaseScheme, RisGeometry};

fn var_total(samples: &[Complex64]) -> f64 {
    empirical_summary(samples).unwrap().var_total
}

#[test]
fn cgps_weights_lose_gain_off_the_design_angle() {
    let model = ChannelModel::new(RisGeometry::half_wavelength(8, 8).unwrap(), case1(), PhaseScheme::Cgps { q: 8 });
    let legit = var_total(&sample_batch(&model, 20_000, 5).unwrap().samples);
    assert!((legit / 512.0 - 1.0).abs() < 0.05, "{legit}");
    let eve = AnglePair::from_degrees(70.0, 20.0, 150.0, 60.0).unwrap();
    let off = var_total(&eavesdropper_batch(&model, &eve, 20_000, 5, 1).unwrap());
    assert!(off < 512.0 * 0.5, "{off}");
}

#[test]
fn cips_variance_holds_at_other_angles() {
    let geom = RisGeometry::half_wavelength(6, 6).unwrap();
    for (i, deg) in [[0.0, 0.0, 0.0, 0.0], [45.0, 80.0, 200.0, 10.0], [300.0, 5.0, 90.0, 89.0]]
        .into_iter()
        .enumerate()
    {
        let angles = AnglePair::from_degrees(deg[0], deg[1], deg[2], deg[3]).unwrap();
        let v = var_total(&sample_batch(&ChannelModel::new(geom.clone(), angles, PhaseScheme::Cips), 40_000, i as u64).unwrap().samples);
        assert!((v / 36.0 - 1.0).abs() < 0.04, "{deg:?}: {v}");
    }
}

#[test]
fn fine_dips_phase_is_uniform() {
    let model = ChannelModel::new(RisGeometry::half_wavelength(4, 4).unwrap(), case1(), PhaseScheme::Dips { bits: 10 });
    let mut phases: Vec<f64> = sample_batch(&model, 10_000, 11)
        .unwrap()
        .samples
        .iter()
        .map(|z| wrap_phase(z.arg()))
        .collect();
    phases.sort_by(f64::total_cmp);
    let g = ks_test(&phases, &|p: f64| (p / TAU).clamp(0.0, 1.0), 0.01).unwrap();
    assert!(g.pass, "{g:?}");
}

#[test]
fn knn_mi_is_rotation_invariant() {
    let model = ChannelModel::new(RisGeometry::half_wavelength(8, 8).unwrap(), case1(), PhaseScheme::Cips);
    let h = sample_batch(&model, 3000, 21).unwrap().samples;
    let pairs = observe(&h, 10.0, 21).unwrap();
    let base = mi_knn(&pairs, 5).unwrap().bits;
    let rot = Complex64::from_polar(1.0, 0.7);
    let rotated: Vec<_> = pairs
        .iter()
        .map(|p| ris_keygen::channel::ObservationPair {
            y_a: p.y_a * rot,
            y_b: p.y_b * rot,
        })
        .collect();
    let turned = mi_knn(&rotated, 5).unwrap().bits;
    assert!((base - turned).abs() < 0.1, "{base} vs {turned}");
}
