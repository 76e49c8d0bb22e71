//! LOS/NLOS condition models.
//!
//! Urban scenarios use the squared measurement-based model, indoor hotspot a
//! three-piece exponential, rural macro the 3GPP rural model and indoor
//! factory the mean of the four 3GPP clutter sub-scenario models. None of
//! them depends on the carrier frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;
use crate::params::{InhLosConstants, LosConstants, RmaLosConstants, SquaredLosConstants};
use crate::rng::RngStream;
use crate::types::{ChannelCondition, Scenario};

/// Highest UE height (m) covered by the UMa height correction.
pub const UMA_MAX_UE_HEIGHT_M: f64 = 23.0;

/// Whether the base station of an InF sub-scenario sits above the clutter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BsPlacement {
    Low,
    High,
}

/// Clutter description of one InF sub-scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfClutter {
    pub name: String,
    /// Clutter density `r`, a fraction in (0, 1).
    pub density: f64,
    /// Typical clutter size (m).
    pub size_m: f64,
    /// Clutter height (m).
    pub height_m: f64,
    pub bs_placement: BsPlacement,
    pub bs_height_m: f64,
    pub ut_height_m: f64,
}

impl InfClutter {
    fn new(name: &str, density: f64, size_m: f64, height_m: f64, bs_placement: BsPlacement) -> Self {
        Self {
            name: name.to_string(),
            density,
            size_m,
            height_m,
            bs_placement,
            bs_height_m: match bs_placement {
                BsPlacement::Low => 1.5,
                BsPlacement::High => 8.0,
            },
            ut_height_m: 1.5,
        }
    }

    /// Representative InF-SL, InF-DL, InF-SH and InF-DH clutter settings.
    pub fn defaults() -> Vec<InfClutter> {
        vec![
            InfClutter::new("SL", 0.2, 10.0, 2.0, BsPlacement::Low),
            InfClutter::new("DL", 0.6, 2.0, 6.0, BsPlacement::Low),
            InfClutter::new("SH", 0.2, 10.0, 2.0, BsPlacement::High),
            InfClutter::new("DH", 0.6, 2.0, 6.0, BsPlacement::High),
        ]
    }

    fn validate(&self) -> Result<()> {
        let label = &self.name;
        if !(self.density > 0.0 && self.density < 1.0) {
            return Err(Error::invalid(format!("InF-{label}: clutter density must be in (0, 1)")));
        }
        if !(self.size_m > 0.0) {
            return Err(Error::invalid(format!("InF-{label}: clutter size must be positive")));
        }
        if self.bs_placement == BsPlacement::High
            && !(self.height_m > self.ut_height_m && self.bs_height_m > self.ut_height_m)
        {
            return Err(Error::invalid(format!(
                "InF-{label}: high-BS model needs BS and clutter above the UT"
            )));
        }
        Ok(())
    }

    /// Decay length `k_subsce` of `exp(-d2D / k)`.
    pub fn decay_length(&self) -> f64 {
        let k = -self.size_m / (1.0 - self.density).ln();
        match self.bs_placement {
            BsPlacement::Low => k,
            BsPlacement::High => {
                k * (self.bs_height_m - self.ut_height_m) / (self.height_m - self.ut_height_m)
            }
        }
    }
}

/// Inputs of the LOS probability models.
#[derive(Debug, Clone, PartialEq)]
pub struct LosModelParams {
    pub umi: SquaredLosConstants,
    pub uma: SquaredLosConstants,
    pub rma: RmaLosConstants,
    pub inh: InhLosConstants,
    /// UE height used by the UMa correction term (m).
    pub ue_height_m: f64,
    /// Exactly four InF sub-scenarios are averaged.
    pub inf_clutter: Vec<InfClutter>,
}

impl LosModelParams {
    pub fn new(constants: &LosConstants, ue_height_m: f64) -> Self {
        Self {
            umi: constants.umi,
            uma: constants.uma,
            rma: constants.rma,
            inh: constants.inh,
            ue_height_m,
            inf_clutter: InfClutter::defaults(),
        }
    }
}

/// UMa height term `C'(h_UE)`.
fn uma_height_factor(ue_height_m: f64) -> Result<f64> {
    if !(ue_height_m.is_finite() && ue_height_m >= 0.0) {
        return Err(Error::invalid("UE height must be non-negative"));
    }
    if ue_height_m <= 13.0 {
        Ok(0.0)
    } else if ue_height_m <= UMA_MAX_UE_HEIGHT_M {
        Ok(((ue_height_m - 13.0) / 10.0).powf(1.5))
    } else {
        Err(Error::invalid(format!(
            "UMa LOS model covers UE heights up to {UMA_MAX_UE_HEIGHT_M} m, got {ue_height_m} m"
        )))
    }
}

/// UMa correction `C(d2D, h_UE)`; zero for UEs at or below 13 m and for
/// links shorter than 18 m.
pub fn uma_correction(d2d: f64, ue_height_m: f64) -> Result<f64> {
    let c = uma_height_factor(ue_height_m)?;
    if d2d <= 18.0 {
        return Ok(0.0);
    }
    Ok(c * 1.25 * (d2d / 100.0).powi(3) * (-d2d / 150.0).exp())
}

fn squared_core(d2d: f64, c: &SquaredLosConstants) -> f64 {
    let decay = (-d2d / c.d2_m).exp();
    (c.d1_m / d2d).min(1.0) * (1.0 - decay) + decay
}

/// Probability that a link at the given geometry is in LOS.
pub fn los_probability(scenario: Scenario, geom: &LinkGeometry, params: &LosModelParams) -> Result<f64> {
    let d = geom.d2d;
    if !(d > 0.0) {
        return Err(Error::invalid("LOS probability needs a positive 2D distance"));
    }
    let p = match scenario {
        Scenario::UMi => squared_core(d, &params.umi).powi(2),
        Scenario::UMa => {
            let c = uma_correction(d, params.ue_height_m)?;
            (squared_core(d, &params.uma) * (1.0 + c)).powi(2)
        }
        Scenario::RMa => {
            if d <= params.rma.breakpoint_m {
                1.0
            } else {
                (-(d - params.rma.breakpoint_m) / params.rma.decay_m).exp()
            }
        }
        Scenario::InH => {
            let c = &params.inh;
            if d <= c.near_m {
                1.0
            } else if d < c.far_m {
                (-(d - c.near_m) / c.near_decay_m).exp()
            } else {
                c.far_scale * (-(d - c.far_m) / c.far_decay_m).exp()
            }
        }
        Scenario::InF => {
            if params.inf_clutter.len() != 4 {
                return Err(Error::invalid(format!(
                    "InF LOS model needs four clutter sub-scenarios, got {}",
                    params.inf_clutter.len()
                )));
            }
            let mut sum = 0.0;
            for clutter in &params.inf_clutter {
                clutter.validate()?;
                sum += (-d / clutter.decay_length()).exp();
            }
            sum / 4.0
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Draws the link condition: LOS with probability `p_los`.
pub fn draw_condition(p_los: f64, rng: &mut RngStream) -> ChannelCondition {
    if rng.uniform() < p_los {
        ChannelCondition::Los
    } else {
        ChannelCondition::Nlos
    }
}
