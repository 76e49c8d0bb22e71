//! Link geometry and angle conventions.
//!
//! Azimuths in this module follow the measurement convention used by the
//! channel model: measured from the +y axis, clockwise positive (towards +x).
//! Elevations are measured from the horizontal plane, positive upwards.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Tx/Rx placement of one link plus the derived distances and angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub tx_position: Vector3<f64>,
    pub rx_position: Vector3<f64>,
    pub ue_velocity: Vector3<f64>,
    pub d2d: f64,
    pub d3d: f64,
    /// Tx to Rx azimuth, degrees in [0, 360).
    pub bearing_deg: f64,
    /// Tx to Rx elevation, degrees in [-90, 90]; positive when Rx is above Tx.
    pub elevation_deg: f64,
}

impl LinkGeometry {
    pub fn new(tx: Vector3<f64>, rx: Vector3<f64>, velocity: Vector3<f64>) -> Result<Self> {
        if !(tx.iter().chain(rx.iter()).chain(velocity.iter())).all(|c| c.is_finite()) {
            return Err(Error::invalid("link coordinates must be finite"));
        }
        let delta = rx - tx;
        let d2d = delta.x.hypot(delta.y);
        let d3d = delta.norm();
        let bearing_deg = wrap_degrees(delta.x.atan2(delta.y).to_degrees());
        let elevation_deg = delta.z.atan2(d2d).to_degrees();
        Ok(Self {
            tx_position: tx,
            rx_position: rx,
            ue_velocity: velocity,
            d2d,
            d3d,
            bearing_deg,
            elevation_deg,
        })
    }

    /// Height of the transmitter (base station) above ground.
    pub fn tx_height(&self) -> f64 {
        self.tx_position.z
    }

    pub fn rx_height(&self) -> f64 {
        self.rx_position.z
    }

    /// Whether the 2D separation satisfies the 1 m reference distance of the
    /// close-in path loss models.
    pub fn meets_reference_distance(&self) -> bool {
        self.d2d >= 1.0
    }
}

/// Convenience constructor taking plain arrays.
pub fn link_geometry(tx: [f64; 3], rx: [f64; 3], velocity: [f64; 3]) -> Result<LinkGeometry> {
    LinkGeometry::new(tx.into(), rx.into(), velocity.into())
}

/// Wraps an angle in degrees to [0, 360).
pub fn wrap_degrees(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if wrapped >= 360.0 {
        0.0
    } else {
        wrapped
    }
}

/// Signed smallest difference `a - b` between two angles, in (-180, 180].
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = wrap_degrees(a - b);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}
