//! Uniform rectangular array layout and the steering-product phases of the
//! cascaded line-of-sight reflection path.
//!
//! Elements are indexed row-major: element `(m_x, m_y)` (both 1-based) has
//! linear index `m = (m_y - 1) * M_x + m_x`. Every module in the crate uses
//! this ordering.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// URA with `m_x_count * m_y_count` elements. Spacings are in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisGeometry {
    m_x_count: usize,
    m_y_count: usize,
    spacing_x: f64,
    spacing_y: f64,
    wavelength: f64,
}

impl RisGeometry {
    pub fn new(
        m_x_count: usize,
        m_y_count: usize,
        spacing_x: f64,
        spacing_y: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if m_x_count == 0 || m_y_count == 0 {
            return Err(Error::InvalidGeometry(format!(
                "element counts must be positive, got {m_x_count}x{m_y_count}"
            )));
        }
        for (name, v) in [
            ("spacing_x", spacing_x),
            ("spacing_y", spacing_y),
            ("wavelength", wavelength),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            m_x_count,
            m_y_count,
            spacing_x,
            spacing_y,
            wavelength,
        })
    }

    /// Half-wavelength spaced array with unit wavelength.
    pub fn half_wavelength(m_x_count: usize, m_y_count: usize) -> Result<Self> {
        Self::new(m_x_count, m_y_count, 0.5, 0.5, 1.0)
    }

    pub fn m_x_count(&self) -> usize {
        self.m_x_count
    }

    pub fn m_y_count(&self) -> usize {
        self.m_y_count
    }

    /// Total element count M.
    pub fn element_count(&self) -> usize {
        self.m_x_count * self.m_y_count
    }

    pub fn spacing_x(&self) -> f64 {
        self.spacing_x
    }

    pub fn spacing_y(&self) -> f64 {
        self.spacing_y
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// k = 2π/λ.
    pub fn wave_number(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Physical spacing d_x in the same unit as the wavelength.
    pub fn d_x(&self) -> f64 {
        self.spacing_x * self.wavelength
    }

    pub fn d_y(&self) -> f64 {
        self.spacing_y * self.wavelength
    }

    pub fn is_square(&self) -> bool {
        self.m_x_count == self.m_y_count && self.spacing_x == self.spacing_y
    }

    /// Inverse of [`element_index`]: 1-based `(m_x, m_y)` for a 1-based `m`.
    pub fn element_coords(&self, m: usize) -> (usize, usize) {
        debug_assert!(m >= 1 && m <= self.element_count());
        ((m - 1) % self.m_x_count + 1, (m - 1) / self.m_x_count + 1)
    }
}

/// Incident (ψ_i, θ_i) and reflected (ψ_o, θ_o) azimuth/elevation, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub psi_in: f64,
    pub theta_in: f64,
    pub psi_out: f64,
    pub theta_out: f64,
}

impl AnglePair {
    pub fn new(psi_in: f64, theta_in: f64, psi_out: f64, theta_out: f64) -> Result<Self> {
        let pair = Self {
            psi_in,
            theta_in,
            psi_out,
            theta_out,
        };
        if pair.as_array().iter().all(|a| a.is_finite()) {
            Ok(pair)
        } else {
            Err(Error::InvalidArgument(format!("angles must be finite: {pair:?}")))
        }
    }

    pub fn from_degrees(psi_in: f64, theta_in: f64, psi_out: f64, theta_out: f64) -> Result<Self> {
        Self::new(
            psi_in.to_radians(),
            theta_in.to_radians(),
            psi_out.to_radians(),
            theta_out.to_radians(),
        )
    }

    pub fn to_degrees(&self) -> [f64; 4] {
        self.as_array().map(f64::to_degrees)
    }

    fn as_array(&self) -> [f64; 4] {
        [self.psi_in, self.theta_in, self.psi_out, self.theta_out]
    }

    /// Incident and reflected directions exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            psi_in: self.psi_out,
            theta_in: self.theta_out,
            psi_out: self.psi_in,
            theta_out: self.theta_in,
        }
    }
}

/// Spatial frequencies (ξ_x, ξ_y) of the combined incident/reflected path.
pub fn xi_components(geom: &RisGeometry, angles: &AnglePair) -> (f64, f64) {
    let k = geom.wave_number();
    let (sin_pi, cos_pi) = angles.psi_in.sin_cos();
    let (sin_po, cos_po) = angles.psi_out.sin_cos();
    let sin_ti = angles.theta_in.sin();
    let sin_to = angles.theta_out.sin();
    let xi_x = k * geom.d_x() * (cos_pi * sin_ti + cos_po * sin_to);
    let xi_y = k * geom.d_y() * (sin_pi * sin_ti + sin_po * sin_to);
    (xi_x, xi_y)
}

fn check_index(m_x: usize, m_y: usize, geom: &RisGeometry) -> Result<()> {
    if m_x == 0 || m_y == 0 || m_x > geom.m_x_count || m_y > geom.m_y_count {
        return Err(Error::IndexOutOfRange {
            m_x,
            m_y,
            max_x: geom.m_x_count,
            max_y: geom.m_y_count,
        });
    }
    Ok(())
}

/// Row-major linear index (1-based) of element `(m_x, m_y)`.
pub fn element_index(m_x: usize, m_y: usize, geom: &RisGeometry) -> Result<usize> {
    check_index(m_x, m_y, geom)?;
    Ok((m_y - 1) * geom.m_x_count + m_x)
}

/// α = (m_x − 1)ξ_x + (m_y − 1)ξ_y.
pub fn element_alpha(geom: &RisGeometry, angles: &AnglePair, m_x: usize, m_y: usize) -> Result<f64> {
    check_index(m_x, m_y, geom)?;
    let (xi_x, xi_y) = xi_components(geom, angles);
    Ok(affine_alpha(xi_x, xi_y, m_x, m_y))
}

#[inline]
fn affine_alpha(xi_x: f64, xi_y: f64, m_x: usize, m_y: usize) -> f64 {
    (m_x - 1) as f64 * xi_x + (m_y - 1) as f64 * xi_y
}

/// Per-element phases of a(Ω_i) ⊙ a(Ω_o), row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringProduct {
    phases: Vec<f64>,
}

impl SteeringProduct {
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Unit-magnitude entries e^{jα_m}.
    pub fn phasors(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.phases.iter().map(|&a| Complex64::cis(a))
    }
}

pub fn steering_product(geom: &RisGeometry, angles: &AnglePair) -> SteeringProduct {
    let (xi_x, xi_y) = xi_components(geom, angles);
    let mut phases = Vec::with_capacity(geom.element_count());
    for m_y in 1..=geom.m_y_count {
        for m_x in 1..=geom.m_x_count {
            phases.push(affine_alpha(xi_x, xi_y, m_x, m_y));
        }
    }
    SteeringProduct { phases }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn case1() -> AnglePair {
        AnglePair::from_degrees(30.0, 30.0, 150.0, 60.0).unwrap()
    }

    #[test]
    fn xi_case1_values() {
        let g = RisGeometry::half_wavelength(8, 8).unwrap();
        let (x, y) = xi_components(&g, &case1());
        // kd = π: ξ_x = π(cos30 sin30 + cos150 sin60), ξ_y = π(sin30 sin30 + sin150 sin60)
        let s3 = 3f64.sqrt();
        let ex = std::f64::consts::PI * (s3 / 4.0 - 0.75);
        let ey = std::f64::consts::PI * (0.25 + s3 / 4.0);
        assert!((x - ex).abs() < 1e-12);
        assert!((y - ey).abs() < 1e-12);
        assert!((x - (-0.9959)).abs() < 1e-4);
        assert!((y - 2.1457).abs() < 1e-4);
    }

    #[test]
    fn xi_trivial_cases() {
        let g = RisGeometry::half_wavelength(4, 4).unwrap();
        let zero = AnglePair::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(xi_components(&g, &zero), (0.0, 0.0));

        let grazing = AnglePair::from_degrees(0.0, 90.0, 0.0, 90.0).unwrap();
        let (x, y) = xi_components(&g, &grazing);
        assert!((x - TAU).abs() < 1e-12);
        assert!(y.abs() < 1e-12);
    }

    #[test]
    fn element_index_row_major() {
        let g = RisGeometry::half_wavelength(8, 8).unwrap();
        assert_eq!(element_index(1, 1, &g).unwrap(), 1);
        assert_eq!(element_index(8, 1, &g).unwrap(), 8);
        assert_eq!(element_index(1, 2, &g).unwrap(), 9);
        assert!(matches!(
            element_index(9, 1, &g),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(element_index(0, 1, &g).is_err());
        assert!(element_alpha(&g, &case1(), 1, 9).is_err());
        for m in 1..=64 {
            let (mx, my) = g.element_coords(m);
            assert_eq!(element_index(mx, my, &g).unwrap(), m);
        }
    }

    #[test]
    fn element_alpha_affine() {
        let g = RisGeometry::half_wavelength(8, 8).unwrap();
        let a = case1();
        let (x, y) = xi_components(&g, &a);
        assert_eq!(element_alpha(&g, &a, 1, 1).unwrap(), 0.0);
        assert_eq!(element_alpha(&g, &a, 2, 1).unwrap(), x);
        assert!((element_alpha(&g, &a, 3, 2).unwrap() - (2.0 * x + y)).abs() < 1e-15);
    }

    #[test]
    fn steering_small_arrays() {
        let a = case1();
        let g1 = RisGeometry::half_wavelength(1, 1).unwrap();
        assert_eq!(steering_product(&g1, &a).phases(), &[0.0]);
        let g2 = RisGeometry::half_wavelength(2, 1).unwrap();
        let (x, _) = xi_components(&g2, &a);
        assert_eq!(steering_product(&g2, &a).phases(), &[0.0, x]);
    }

    #[test]
    fn steering_matches_per_element_recomputation() {
        let g = RisGeometry::half_wavelength(8, 8).unwrap();
        let a = case1();
        let sp = steering_product(&g, &a);
        assert_eq!(sp.len(), 64);
        // brute force straight from the angle definitions
        let (s3, pi) = (3f64.sqrt(), std::f64::consts::PI);
        for m in 1..=64usize {
            let mx = (m - 1) % 8 + 1;
            let my = (m - 1) / 8 + 1;
            let ci = (30f64.to_radians().cos() * 30f64.to_radians().sin()
                + 150f64.to_radians().cos() * 60f64.to_radians().sin())
                * pi;
            let cy = (0.25 + s3 / 4.0) * pi;
            let expect = (mx as f64 - 1.0) * ci + (my as f64 - 1.0) * cy;
            assert!((sp.phases()[m - 1] - expect).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(RisGeometry::new(0, 4, 0.5, 0.5, 1.0).is_err());
        assert!(RisGeometry::new(4, 4, 0.0, 0.5, 1.0).is_err());
        assert!(RisGeometry::new(4, 4, 0.5, 0.5, f64::NAN).is_err());
        assert!(AnglePair::new(f64::INFINITY, 0.0, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn reciprocity_and_unit_phasors(
            pi in -7.0f64..7.0, ti in -7.0f64..7.0, po in -7.0f64..7.0, to in -7.0f64..7.0,
            mx in 1usize..6, my in 1usize..6, dx in 0.1f64..2.0, dy in 0.1f64..2.0,
        ) {
            let g = RisGeometry::new(mx, my, dx, dy, 1.0).unwrap();
            let a = AnglePair::new(pi, ti, po, to).unwrap();
            let sp = steering_product(&g, &a);
            prop_assert_eq!(sp.phases()[0], 0.0);
            prop_assert_eq!(xi_components(&g, &a), xi_components(&g, &a.swapped()));
            prop_assert_eq!(&sp, &steering_product(&g, &a.swapped()));
            for z in sp.phasors() {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
