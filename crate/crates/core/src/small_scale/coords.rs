//! Angle conventions.
//!
//! The generator works in the measurement convention: azimuth from the +y
//! axis, clockwise positive when seen from above, and elevation from the
//! horizon. Channel matrices use the global coordinate system: azimuth from
//! the +x axis, counterclockwise, and zenith from the +z axis.

use nalgebra::Vector3;

use crate::geometry::wrap_degrees;

/// Direction in the measurement convention, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NyuAngles {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

/// Direction in the global coordinate system, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub azimuth_deg: f64,
    pub zenith_deg: f64,
}

impl NyuAngles {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self {
            azimuth_deg,
            elevation_deg,
        }
    }
}

impl Direction {
    pub fn new(azimuth_deg: f64, zenith_deg: f64) -> Self {
        Self {
            azimuth_deg,
            zenith_deg,
        }
    }

    /// Unit vector pointing along the direction.
    pub fn unit_vector(&self) -> Vector3<f64> {
        let (sin_t, cos_t) = self.zenith_deg.to_radians().sin_cos();
        let (sin_p, cos_p) = self.azimuth_deg.to_radians().sin_cos();
        Vector3::new(sin_t * cos_p, sin_t * sin_p, cos_t)
    }
}

/// Converts measurement-convention angles to GCS; azimuth is wrapped to
/// [0, 360).
pub fn nyu_to_gcs(angles: NyuAngles) -> Direction {
    Direction {
        azimuth_deg: wrap_degrees(90.0 - angles.azimuth_deg),
        zenith_deg: 90.0 - angles.elevation_deg,
    }
}

/// Inverse of [`nyu_to_gcs`].
pub fn gcs_to_nyu(direction: Direction) -> NyuAngles {
    NyuAngles {
        azimuth_deg: wrap_degrees(90.0 - direction.azimuth_deg),
        elevation_deg: 90.0 - direction.zenith_deg,
    }
}

/// Doppler shift (Hz) of a wave arriving from `arrival` at a receiver moving
/// with `velocity`. Positive when moving towards the source.
pub fn doppler_shift(velocity: &Vector3<f64>, arrival: Direction, wavelength_m: f64) -> f64 {
    velocity.dot(&arrival.unit_vector()) / wavelength_m
}
