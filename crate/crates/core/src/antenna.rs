//! Uniform planar arrays and element field patterns.
//!
//! An array lies in the local y-z plane with boresight along local +x. The
//! local frame is rotated into the global frame by `Rz(bearing) * Ry(downtilt)`,
//! so a positive downtilt points the boresight below the horizon.

use nalgebra::{DVector, Rotation3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::small_scale::Direction;

/// Peak gain of the directional element (dBi).
pub const DIRECTIONAL_PEAK_GAIN_DBI: f64 = 8.0;
/// Half-power beamwidth in azimuth and elevation (degrees).
pub const DIRECTIONAL_BEAMWIDTH_DEG: f64 = 65.0;
/// Front-to-back and side-lobe attenuation limit (dB).
pub const DIRECTIONAL_FLOOR_DB: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementPattern {
    #[default]
    Isotropic,
    Directional3gpp,
}

/// Vertically polarized field pattern `(F_theta, F_phi)` in the element's
/// local frame. `zenith_deg` must lie in [0, 180] and `azimuth_deg` in
/// [0, 360).
pub fn element_field_pattern(pattern: ElementPattern, zenith_deg: f64, azimuth_deg: f64) -> Result<(f64, f64)> {
    if !(0.0..=180.0).contains(&zenith_deg) || !(0.0..360.0).contains(&azimuth_deg) {
        return Err(Error::invalid(format!(
            "element pattern angles out of range: zenith {zenith_deg}, azimuth {azimuth_deg}"
        )));
    }
    Ok(match pattern {
        ElementPattern::Isotropic => (1.0, 0.0),
        ElementPattern::Directional3gpp => (10f64.powf(directional_gain_db(zenith_deg, azimuth_deg) / 20.0), 0.0),
    })
}

fn directional_gain_db(zenith_deg: f64, azimuth_deg: f64) -> f64 {
    let az = if azimuth_deg > 180.0 { azimuth_deg - 360.0 } else { azimuth_deg };
    let vertical = -(12.0 * ((zenith_deg - 90.0) / DIRECTIONAL_BEAMWIDTH_DEG).powi(2)).min(DIRECTIONAL_FLOOR_DB);
    let horizontal = -(12.0 * (az / DIRECTIONAL_BEAMWIDTH_DEG).powi(2)).min(DIRECTIONAL_FLOOR_DB);
    DIRECTIONAL_PEAK_GAIN_DBI - (-(vertical + horizontal)).min(DIRECTIONAL_FLOOR_DB)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    pub spacing_wavelengths: f64,
    pub pattern: ElementPattern,
    pub bearing_deg: f64,
    pub downtilt_deg: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            rows: 1,
            cols: 1,
            spacing_wavelengths: 0.5,
            pattern: ElementPattern::Isotropic,
            bearing_deg: 0.0,
            downtilt_deg: 0.0,
        }
    }
}

impl ArrayConfig {
    pub fn upa(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config("antenna arrays need at least one row and column".into()));
        }
        if !(self.spacing_wavelengths > 0.0 && self.spacing_wavelengths.is_finite()) {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        if !(self.bearing_deg.is_finite() && self.downtilt_deg.is_finite()) {
            return Err(Error::Config("array orientation must be finite".into()));
        }
        Ok(())
    }
}

/// Uniform planar array with element positions in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    config: ArrayConfig,
    wavelength_m: f64,
    rotation: Rotation3<f64>,
    positions: Vec<Vector3<f64>>,
}

impl AntennaArray {
    pub fn new(config: ArrayConfig, wavelength_m: f64) -> Result<Self> {
        config.validate()?;
        if !(wavelength_m > 0.0 && wavelength_m.is_finite()) {
            return Err(Error::invalid("wavelength must be positive"));
        }
        let rotation = Rotation3::from_axis_angle(&Vector3::z_axis(), config.bearing_deg.to_radians())
            * Rotation3::from_axis_angle(&Vector3::y_axis(), config.downtilt_deg.to_radians());
        let d = config.spacing_wavelengths * wavelength_m;
        let (row_mid, col_mid) = ((config.rows - 1) as f64 / 2.0, (config.cols - 1) as f64 / 2.0);
        let positions = (0..config.rows)
            .flat_map(|r| (0..config.cols).map(move |c| (r, c)))
            .map(|(r, c)| rotation * Vector3::new(0.0, (c as f64 - col_mid) * d, (r as f64 - row_mid) * d))
            .collect();
        Ok(Self {
            config,
            wavelength_m,
            rotation,
            positions,
        })
    }

    /// Single isotropic element.
    pub fn single(wavelength_m: f64) -> Result<Self> {
        Self::new(ArrayConfig::default(), wavelength_m)
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.config
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_m
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Element positions in the global frame (m), relative to the array
    /// centre.
    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    /// Field pattern `(F_theta, F_phi)` of every element towards a global
    /// direction, including the polarization rotation caused by the array
    /// orientation.
    pub fn field(&self, direction: Direction) -> (f64, f64) {
        if self.config.pattern == ElementPattern::Isotropic {
            return (1.0, 0.0);
        }
        let global = direction.unit_vector();
        let local = self.rotation.inverse() * global;
        let zenith = local.z.clamp(-1.0, 1.0).acos().to_degrees();
        let azimuth = crate::geometry::wrap_degrees(local.y.atan2(local.x).to_degrees());
        let (f_theta, f_phi) = element_field_pattern(self.config.pattern, zenith, azimuth)
            .expect("local angles are in range by construction");
        let psi = self.polarization_rotation(direction);
        let (s, c) = psi.sin_cos();
        (c * f_theta - s * f_phi, s * f_theta + c * f_phi)
    }

    fn polarization_rotation(&self, direction: Direction) -> f64 {
        let (alpha, beta) = (self.config.bearing_deg.to_radians(), self.config.downtilt_deg.to_radians());
        let (theta, phi) = (direction.zenith_deg.to_radians(), direction.azimuth_deg.to_radians());
        let re = beta.cos() * theta.sin() - beta.sin() * theta.cos() * (phi - alpha).cos();
        let im = beta.sin() * (phi - alpha).sin();
        im.atan2(re)
    }

    /// `exp(j 2 pi r . d_u / lambda)` for every element.
    pub fn steering_vector(&self, direction: Direction) -> DVector<Complex64> {
        let r = direction.unit_vector();
        DVector::from_iterator(
            self.len(),
            self.positions
                .iter()
                .map(|p| Complex64::from_polar(1.0, TAU * r.dot(p) / self.wavelength_m)),
        )
    }

    /// Unit-norm weights that coherently combine a plane wave from
    /// `direction`: the conjugate steering vector scaled by `1/sqrt(N)`.
    pub fn matched_weights(&self, direction: Direction) -> DVector<Complex64> {
        let n = self.len() as f64;
        self.steering_vector(direction).map(|a| a.conj() / n.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn isotropic_pattern() {
        for (t, p) in [(0.0, 0.0), (90.0, 123.0), (180.0, 359.0)] {
            assert_eq!(element_field_pattern(ElementPattern::Isotropic, t, p).unwrap(), (1.0, 0.0));
        }
    }

    #[test]
    fn directional_pattern() {
        let (f, z) = element_field_pattern(ElementPattern::Directional3gpp, 90.0, 0.0).unwrap();
        assert_relative_eq!(f * f, 10f64.powf(0.8), epsilon = 1e-12);
        assert_eq!(z, 0.0);
        let (f, _) = element_field_pattern(ElementPattern::Directional3gpp, 90.0, 180.0).unwrap();
        assert_relative_eq!(20.0 * f.log10(), 8.0 - 30.0, epsilon = 1e-12);
        // half-power point in azimuth
        let (f, _) = element_field_pattern(ElementPattern::Directional3gpp, 90.0, 32.5).unwrap();
        assert_relative_eq!(20.0 * f.log10(), 8.0 - 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pattern_rejects_bad_angles() {
        assert!(element_field_pattern(ElementPattern::Isotropic, -1.0, 0.0).is_err());
        assert!(element_field_pattern(ElementPattern::Isotropic, 90.0, 360.0).is_err());
    }

    #[test]
    fn weights_have_unit_norm() {
        let a = AntennaArray::new(ArrayConfig::upa(4, 8), 0.01).unwrap();
        assert_eq!(a.len(), 32);
        let w = a.matched_weights(Direction::new(30.0, 70.0));
        assert_relative_eq!(w.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn broadside_is_in_phase() {
        let a = AntennaArray::new(ArrayConfig::upa(1, 2), 0.01).unwrap();
        let s = a.steering_vector(Direction::new(0.0, 90.0));
        assert_relative_eq!((s[0] - s[1]).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rotated_boresight_gets_peak_gain() {
        let cfg = ArrayConfig {
            pattern: ElementPattern::Directional3gpp,
            bearing_deg: 60.0,
            downtilt_deg: 10.0,
            ..ArrayConfig::default()
        };
        let a = AntennaArray::new(cfg, 0.01).unwrap();
        let (ft, fp) = a.field(Direction::new(60.0, 100.0));
        assert_relative_eq!(ft * ft + fp * fp, 10f64.powf(0.8), epsilon = 1e-9);
        let (ft, fp) = a.field(Direction::new(240.0, 80.0));
        assert!(10.0 * (ft * ft + fp * fp).log10() < 8.0 - 29.0);
    }

    #[test]
    fn element_spacing() {
        let a = AntennaArray::new(ArrayConfig::upa(2, 2), 0.02).unwrap();
        let p = a.positions();
        assert_relative_eq!((p[1] - p[0]).norm(), 0.01, epsilon = 1e-15);
        assert_relative_eq!((p[2] - p[0]).norm(), 0.01, epsilon = 1e-15);
    }
}
