//! Scenario, channel condition and carrier types shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Lowest supported carrier frequency (GHz).
pub const MIN_FREQUENCY_GHZ: f64 = 0.5;
/// Highest supported carrier frequency (GHz).
pub const MAX_FREQUENCY_GHZ: f64 = 150.0;

/// Deployment scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// Urban microcell.
    UMi,
    /// Urban macrocell.
    UMa,
    /// Rural macrocell.
    RMa,
    /// Indoor hotspot.
    InH,
    /// Indoor factory.
    InF,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::UMi,
        Scenario::UMa,
        Scenario::RMa,
        Scenario::InH,
        Scenario::InF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::UMi => "UMi",
            Scenario::UMa => "UMa",
            Scenario::RMa => "RMa",
            Scenario::InH => "InH",
            Scenario::InF => "InF",
        }
    }

    pub fn is_indoor(self) -> bool {
        matches!(self, Scenario::InH | Scenario::InF)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// Line-of-sight state of a link. Drawn once per link per drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelCondition {
    #[serde(rename = "LOS", alias = "los")]
    Los,
    #[serde(rename = "NLOS", alias = "nlos")]
    Nlos,
}

impl ChannelCondition {
    pub const ALL: [ChannelCondition; 2] = [ChannelCondition::Los, ChannelCondition::Nlos];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelCondition::Los => "LOS",
            ChannelCondition::Nlos => "NLOS",
        }
    }

    pub fn is_los(self) -> bool {
        self == ChannelCondition::Los
    }
}

impl fmt::Display for ChannelCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LOS" => Ok(ChannelCondition::Los),
            "NLOS" => Ok(ChannelCondition::Nlos),
            _ => Err(Error::Config(format!("unknown channel condition '{s}'"))),
        }
    }
}

/// Carrier frequency and RF bandwidth of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarrierConfig {
    frequency_ghz: f64,
    rf_bandwidth_hz: f64,
}

impl CarrierConfig {
    pub fn new(frequency_ghz: f64, rf_bandwidth_hz: f64) -> Result<Self> {
        check_frequency(frequency_ghz)?;
        if !(rf_bandwidth_hz.is_finite() && rf_bandwidth_hz > 0.0) {
            return Err(Error::invalid(format!(
                "RF bandwidth must be positive, got {rf_bandwidth_hz} Hz"
            )));
        }
        Ok(Self {
            frequency_ghz,
            rf_bandwidth_hz,
        })
    }

    pub fn frequency_ghz(&self) -> f64 {
        self.frequency_ghz
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_ghz * 1e9
    }

    pub fn rf_bandwidth_hz(&self) -> f64 {
        self.rf_bandwidth_hz
    }

    /// Carrier wavelength in meters.
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz()
    }
}

pub(crate) fn check_frequency(frequency_ghz: f64) -> Result<()> {
    if frequency_ghz.is_finite()
        && (MIN_FREQUENCY_GHZ..=MAX_FREQUENCY_GHZ).contains(&frequency_ghz)
    {
        Ok(())
    } else {
        Err(Error::FrequencyOutOfRange(frequency_ghz))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carrier_rejects_out_of_range_frequency() {
        assert!(CarrierConfig::new(0.4, 1e8).is_err());
        assert!(CarrierConfig::new(150.1, 1e8).is_err());
        assert!(CarrierConfig::new(f64::NAN, 1e8).is_err());
        assert!(CarrierConfig::new(0.5, 1e8).is_ok());
        assert!(CarrierConfig::new(150.0, 1e8).is_ok());
    }

    #[test]
    fn carrier_rejects_non_positive_bandwidth() {
        assert!(CarrierConfig::new(28.0, 0.0).is_err());
        assert!(CarrierConfig::new(28.0, -1.0).is_err());
    }

    #[test]
    fn scenario_parses_case_insensitively() {
        assert_eq!("umi".parse::<Scenario>().unwrap(), Scenario::UMi);
        assert_eq!("InF".parse::<Scenario>().unwrap(), Scenario::InF);
        assert!("SMa".parse::<Scenario>().is_err());
        assert_eq!("nlos".parse::<ChannelCondition>().unwrap(), ChannelCondition::Nlos);
    }
}
