//! Large-scale loss: close-in (CI) path loss, the height-dependent CIH model
//! for RMa, correlated shadow fading and the optional building penetration,
//! foliage and atmospheric terms. All terms add in dB.

use std::path::Path;
use std::sync::OnceLock;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;
use crate::params::ScenarioParams;
use crate::rng::RngStream;
use crate::types::{ChannelCondition, Scenario, SPEED_OF_LIGHT};

const BUILTIN_ATMOSPHERE: &str = include_str!("../data/atmosphere.csv");

/// Free space path loss at 1 m (dB).
pub fn fspl_1m(frequency_ghz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * frequency_ghz * 1e9 / SPEED_OF_LIGHT).log10()
}

fn check_reference_distance(geom: &LinkGeometry) -> Result<()> {
    if geom.meets_reference_distance() {
        Ok(())
    } else {
        Err(Error::BelowReferenceDistance(geom.d2d))
    }
}

/// CI model mean path loss (dB) with the interpolated path loss exponent.
pub fn ci_path_loss(params: &ScenarioParams, geom: &LinkGeometry, frequency_ghz: f64) -> Result<f64> {
    let ple = params.path_loss_exponent()?;
    check_reference_distance(geom)?;
    Ok(fspl_1m(frequency_ghz) + 10.0 * ple * geom.d2d.log10())
}

/// Slope of the RMa CIH model per unit of `log10(d)`.
pub fn cih_slope(condition: ChannelCondition, bs_height_m: f64) -> Result<f64> {
    if !(bs_height_m.is_finite() && bs_height_m > 0.0) {
        return Err(Error::invalid(format!("BS height must be positive, got {bs_height_m} m")));
    }
    let h = (bs_height_m - 35.0) / 35.0;
    Ok(match condition {
        ChannelCondition::Los => 23.1 * (1.0 - 0.03 * h),
        ChannelCondition::Nlos => 30.7 * (1.0 - 0.049 * h),
    })
}

/// RMa mean path loss (dB) with a BS-height dependent exponent.
pub fn cih_path_loss(
    geom: &LinkGeometry,
    frequency_ghz: f64,
    condition: ChannelCondition,
    bs_height_m: f64,
) -> Result<f64> {
    let slope = cih_slope(condition, bs_height_m)?;
    check_reference_distance(geom)?;
    Ok(fspl_1m(frequency_ghz) + slope * geom.d2d.log10())
}

// ---------------------------------------------------------------------------
// Optional attenuation terms
// ---------------------------------------------------------------------------

/// Outdoor-to-indoor building penetration model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum O2iMode {
    #[default]
    None,
    LowLoss,
    HighLoss,
}

/// Parabolic building penetration loss `10 log10(A + B f^2)` plus a
/// Gaussian spread of `sigma_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct O2iConstants {
    pub a: f64,
    pub b: f64,
    pub sigma_db: f64,
}

impl O2iMode {
    pub fn constants(self) -> Option<O2iConstants> {
        match self {
            O2iMode::None => None,
            O2iMode::LowLoss => Some(O2iConstants {
                a: 5.0,
                b: 0.03,
                sigma_db: 4.0,
            }),
            O2iMode::HighLoss => Some(O2iConstants {
                a: 10.0,
                b: 5.0,
                sigma_db: 6.0,
            }),
        }
    }

    /// Mean penetration loss (dB) before the Gaussian spread.
    pub fn mean_db(self, frequency_ghz: f64) -> f64 {
        self.constants()
            .map(|c| 10.0 * (c.a + c.b * frequency_ghz * frequency_ghz).log10())
            .unwrap_or(0.0)
    }
}

/// Building penetration loss (dB), floored at 0. Draws nothing for `None`.
pub fn o2i_loss(mode: O2iMode, frequency_ghz: f64, rng: &mut RngStream) -> f64 {
    match mode.constants() {
        None => 0.0,
        Some(c) => rng.normal(mode.mean_db(frequency_ghz), c.sigma_db).max(0.0),
    }
}

/// Foliage loss (dB): specific loss times foliage depth.
pub fn foliage_loss(cfg: &AttenuationConfig) -> Result<f64> {
    if !(cfg.foliage_loss_db_per_m >= 0.0 && cfg.foliage_depth_m >= 0.0) {
        return Err(Error::invalid("foliage loss and depth must be non-negative"));
    }
    Ok(cfg.foliage_loss_db_per_m * cfg.foliage_depth_m)
}

/// Specific atmospheric attenuation sampled in frequency, linearly
/// interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphereTable {
    frequencies_ghz: Vec<f64>,
    db_per_km: Vec<f64>,
}

impl AtmosphereTable {
    pub fn new(frequencies_ghz: Vec<f64>, db_per_km: Vec<f64>) -> Result<Self> {
        if frequencies_ghz.len() != db_per_km.len() || frequencies_ghz.len() < 2 {
            return Err(Error::AtmosphereTable(
                "need at least two (frequency, attenuation) samples".into(),
            ));
        }
        if frequencies_ghz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::AtmosphereTable("frequencies must be strictly increasing".into()));
        }
        if db_per_km.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::AtmosphereTable("attenuation must be finite and non-negative".into()));
        }
        Ok(Self {
            frequencies_ghz,
            db_per_km,
        })
    }

    /// The built-in sea-level table covering 0.5 to 150 GHz.
    pub fn builtin() -> &'static AtmosphereTable {
        static TABLE: OnceLock<AtmosphereTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            AtmosphereTable::from_csv_str(BUILTIN_ATMOSPHERE).expect("built-in atmosphere table is valid")
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::AtmosphereTable(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_csv_str(&text)
    }

    /// Parses `frequency_ghz,db_per_km` lines; `#` starts a comment.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut freqs = Vec::new();
        let mut atten = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split([',', ' ', '\t']).filter(|c| !c.is_empty());
            let parse = |c: Option<&str>| -> Result<f64> {
                c.and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| {
                    Error::AtmosphereTable(format!("line {}: expected two numbers", lineno + 1))
                })
            };
            freqs.push(parse(cols.next())?);
            atten.push(parse(cols.next())?);
            if cols.next().is_some() {
                return Err(Error::AtmosphereTable(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            }
        }
        Self::new(freqs, atten)
    }

    pub fn covers(&self, frequency_ghz: f64) -> bool {
        frequency_ghz >= self.frequencies_ghz[0]
            && frequency_ghz <= *self.frequencies_ghz.last().unwrap_or(&f64::NEG_INFINITY)
    }

    /// Specific attenuation (dB/km) at `frequency_ghz`.
    pub fn specific_attenuation(&self, frequency_ghz: f64) -> Result<f64> {
        if !self.covers(frequency_ghz) {
            return Err(Error::AtmosphereTable(format!(
                "{frequency_ghz} GHz outside table coverage [{}, {}] GHz",
                self.frequencies_ghz[0],
                self.frequencies_ghz[self.frequencies_ghz.len() - 1]
            )));
        }
        let i = self.frequencies_ghz.partition_point(|&f| f <= frequency_ghz);
        if i == 0 {
            return Ok(self.db_per_km[0]);
        }
        let lo = i - 1;
        if lo + 1 == self.frequencies_ghz.len() || self.frequencies_ghz[lo] == frequency_ghz {
            return Ok(self.db_per_km[lo]);
        }
        let (f0, f1) = (self.frequencies_ghz[lo], self.frequencies_ghz[lo + 1]);
        let (a0, a1) = (self.db_per_km[lo], self.db_per_km[lo + 1]);
        Ok(a0 + (a1 - a0) * (frequency_ghz - f0) / (f1 - f0))
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.frequencies_ghz.iter().copied().zip(self.db_per_km.iter().copied())
    }
}

/// Atmospheric attenuation (dB) over the 3D path length.
pub fn atmospheric_attenuation(frequency_ghz: f64, d3d_m: f64, table: &AtmosphereTable) -> Result<f64> {
    if !(d3d_m >= 0.0) {
        return Err(Error::invalid("path length must be non-negative"));
    }
    Ok(table.specific_attenuation(frequency_ghz)? * d3d_m / 1000.0)
}

/// Switches and inputs of the optional loss terms.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationConfig {
    pub o2i: O2iMode,
    pub foliage_loss_db_per_m: f64,
    pub foliage_depth_m: f64,
    pub atmospheric: bool,
    pub atmosphere: AtmosphereTable,
    pub shadowing: bool,
}

impl Default for AttenuationConfig {
    fn default() -> Self {
        Self {
            o2i: O2iMode::None,
            foliage_loss_db_per_m: 0.0,
            foliage_depth_m: 0.0,
            atmospheric: false,
            atmosphere: AtmosphereTable::builtin().clone(),
            shadowing: true,
        }
    }
}

impl AttenuationConfig {
    /// All optional terms and shadowing off: only the mean path loss remains.
    pub fn mean_only() -> Self {
        Self {
            shadowing: false,
            ..Self::default()
        }
    }
}

// ---------------------------------------------------------------------------
// Shadowing
// ---------------------------------------------------------------------------

/// Per-link shadow fading memory for exponentially correlated updates.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingState {
    corr_distance_m: f64,
    last: Option<(Vector3<f64>, f64)>,
}

impl ShadowingState {
    pub fn new(corr_distance_m: f64) -> Result<Self> {
        if !(corr_distance_m.is_finite() && corr_distance_m > 0.0) {
            return Err(Error::invalid("shadowing correlation distance must be positive"));
        }
        Ok(Self {
            corr_distance_m,
            last: None,
        })
    }

    pub fn for_params(params: &ScenarioParams) -> Result<Self> {
        Self::new(params.sf_corr_distance_m)
    }

    pub fn corr_distance_m(&self) -> f64 {
        self.corr_distance_m
    }

    pub fn last_value(&self) -> Option<f64> {
        self.last.map(|(_, v)| v)
    }
}

/// Shadow fading (dB) at the link's Rx position. The first call draws
/// `N(0, sigma^2)`; later calls are correlated with the previous value by
/// `exp(-displacement / d_corr)`.
pub fn shadowing(
    params: &ScenarioParams,
    state: &mut ShadowingState,
    geom: &LinkGeometry,
    rng: &mut RngStream,
) -> Result<f64> {
    let sigma = params.shadow_fading_std_db()?;
    Ok(shadowing_with_std(sigma, state, &geom.rx_position, rng))
}

pub(crate) fn shadowing_with_std(
    sigma_db: f64,
    state: &mut ShadowingState,
    position: &Vector3<f64>,
    rng: &mut RngStream,
) -> f64 {
    let value = match state.last {
        None => rng.normal(0.0, sigma_db),
        Some((prev_pos, prev)) => {
            let displacement = (position - prev_pos).norm();
            let rho = (-displacement / state.corr_distance_m).exp();
            if rho == 1.0 {
                prev
            } else {
                rho * prev + (1.0 - rho * rho).sqrt() * rng.normal(0.0, sigma_db)
            }
        }
    };
    state.last = Some((*position, value));
    value
}

// ---------------------------------------------------------------------------
// Total
// ---------------------------------------------------------------------------

/// Additive dB components of the large-scale loss.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PathLossBreakdown {
    pub fspl_1m: f64,
    pub distance_term: f64,
    pub atmospheric: f64,
    pub o2i: f64,
    pub foliage: f64,
    pub shadowing: f64,
    pub total: f64,
}

impl PathLossBreakdown {
    /// Distance-dependent mean path loss: FSPL at 1 m plus the distance term.
    pub fn mean_path_loss_db(&self) -> f64 {
        self.fspl_1m + self.distance_term
    }

    fn sum(&self) -> f64 {
        self.fspl_1m + self.distance_term + self.atmospheric + self.o2i + self.foliage + self.shadowing
    }
}

/// Total large-scale loss of a link. RMa dispatches to the CIH model with the
/// Tx height as BS height, every other scenario to the CI model. Draws, in
/// order, the building penetration spread and the shadow fading value.
pub fn total_path_loss(
    params: &ScenarioParams,
    geom: &LinkGeometry,
    cfg: &AttenuationConfig,
    shadow: &mut ShadowingState,
    rng: &mut RngStream,
) -> Result<PathLossBreakdown> {
    let f = params.frequency_ghz;
    check_reference_distance(geom)?;
    let fspl = fspl_1m(f);
    let distance_term = match params.scenario {
        Scenario::RMa => cih_slope(params.condition, geom.tx_height())? * geom.d2d.log10(),
        _ => 10.0 * params.path_loss_exponent()? * geom.d2d.log10(),
    };
    let atmospheric = if cfg.atmospheric {
        atmospheric_attenuation(f, geom.d3d, &cfg.atmosphere)?
    } else {
        0.0
    };
    let o2i = o2i_loss(cfg.o2i, f, rng);
    let foliage = foliage_loss(cfg)?;
    let shadowing = if cfg.shadowing {
        shadowing(params, shadow, geom, rng)?
    } else {
        0.0
    };
    let mut b = PathLossBreakdown {
        fspl_1m: fspl,
        distance_term,
        atmospheric,
        o2i,
        foliage,
        shadowing,
        total: 0.0,
    };
    b.total = b.sum();
    Ok(b)
}
