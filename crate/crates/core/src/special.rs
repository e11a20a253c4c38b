//! Small numerical helpers: scaled Bessel I0, adaptive quadrature, normal
//! cdf and digamma at integers.

use std::f64::consts::PI;

/// e^{-z} I0(z) for z ≥ 0.
pub fn bessel_i0_scaled(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z > 700.0 {
        // asymptotic series, relative error < 1e-12 here
        let t = 1.0 / (8.0 * z);
        let series = 1.0 + t * (1.0 + t * (9.0 / 2.0 + t * (225.0 / 6.0 + t * (11025.0 / 24.0))));
        return series / (2.0 * PI * z).sqrt();
    }
    // I0(z) = (1/π) ∫_0^π e^{z cos t} dt; trapezoid on a periodic integrand
    // converges geometrically once the step resolves the peak at t = 0.
    let n = 32 + 8 * z.sqrt().ceil() as usize;
    let h = PI / n as f64;
    let mut acc = 0.5 * (1.0 + (-2.0 * z).exp());
    for i in 1..n {
        acc += (z * ((i as f64 * h).cos() - 1.0)).exp();
    }
    acc * h / PI
}

/// Adaptive Simpson quadrature of `f` on [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // split into panels first so narrow peaks are not skipped
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / panels as f64, 48)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Φ((x − mean)/sd).
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

/// ψ(1), …, ψ(n) via ψ(j + 1) = ψ(j) + 1/j. Index 0 is unused (NaN).
pub fn digamma_table(n: usize) -> Vec<f64> {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut table = Vec::with_capacity(n + 1);
    table.push(f64::NAN);
    let mut h = 0.0;
    for j in 1..=n {
        table.push(h - EULER_GAMMA);
        h += 1.0 / j as f64;
    }
    table
}
