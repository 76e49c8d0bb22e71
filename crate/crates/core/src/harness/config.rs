//! Drop configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::antenna::ArrayConfig;
use crate::condition::UMA_MAX_UE_HEIGHT_M;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::large_scale::O2iMode;
use crate::small_scale::SmallScaleConfig;
use crate::types::{ChannelCondition, Scenario, MAX_FREQUENCY_GHZ, MIN_FREQUENCY_GHZ};

/// LOS/NLOS assignment: drawn from the LOS probability model or forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionMode {
    #[default]
    Auto,
    Los,
    Nlos,
}

impl ConditionMode {
    pub fn forced(self) -> Option<ChannelCondition> {
        match self {
            ConditionMode::Auto => None,
            ConditionMode::Los => Some(ChannelCondition::Los),
            ConditionMode::Nlos => Some(ChannelCondition::Nlos),
        }
    }
}

/// Where UEs are dropped around the base station at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// Uniform over the area of an annulus.
    Annulus { min_distance_m: f64, max_distance_m: f64 },
    /// Drop `i` uses `distances_m[i % len]` at a random azimuth.
    Sweep { distances_m: Vec<f64> },
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Annulus {
            min_distance_m: 10.0,
            max_distance_m: 500.0,
        }
    }
}

impl Placement {
    /// Logarithmically spaced sweep from `start` to `stop` with `points`
    /// points.
    pub fn log_sweep(start_m: f64, stop_m: f64, points: usize) -> Self {
        let distances_m = if points <= 1 {
            vec![start_m]
        } else {
            let (a, b) = (start_m.log10(), stop_m.log10());
            (0..points)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
                .collect()
        };
        Placement::Sweep { distances_m }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Placement::Annulus {
                min_distance_m,
                max_distance_m,
            } => {
                if !(*min_distance_m >= 1.0 && max_distance_m >= min_distance_m && max_distance_m.is_finite()) {
                    return Err(Error::Config(format!(
                        "annulus needs 1 <= min_distance_m <= max_distance_m, got [{min_distance_m}, {max_distance_m}]"
                    )));
                }
            }
            Placement::Sweep { distances_m } => {
                if distances_m.is_empty() {
                    return Err(Error::Config("sweep needs at least one distance".into()));
                }
                if let Some(d) = distances_m.iter().find(|d| !(**d >= 1.0 && d.is_finite())) {
                    return Err(Error::Config(format!("sweep distances must be at least 1 m, got {d}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttenuationSettings {
    pub o2i: O2iMode,
    pub foliage_loss_db_per_m: f64,
    pub foliage_depth_m: f64,
    pub atmospheric: bool,
    /// Replaces the built-in atmospheric attenuation table.
    pub atmosphere_file: Option<PathBuf>,
    pub shadowing: bool,
}

impl Default for AttenuationSettings {
    fn default() -> Self {
        Self {
            o2i: O2iMode::None,
            foliage_loss_db_per_m: 0.0,
            foliage_depth_m: 0.0,
            atmospheric: false,
            atmosphere_file: None,
            shadowing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSettings {
    pub tx: ArrayConfig,
    pub rx: ArrayConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdSettings {
    pub subbands: usize,
    /// Times (s) within the drop at which the PSD is evaluated.
    pub sample_times_s: Vec<f64>,
}

impl Default for PsdSettings {
    fn default() -> Self {
        Self {
            subbands: 100,
            sample_times_s: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    /// Per-link drop results (CSV).
    pub results: Option<PathBuf>,
    /// Per-subpath realization dump (CSV).
    pub dump: Option<PathBuf>,
    /// Received PSD per subband (CSV).
    pub psd: Option<PathBuf>,
    /// Distance-binned mean path loss (CSV).
    pub pathloss_report: Option<PathBuf>,
    /// Number of logarithmic distance bins of the path loss report.
    pub report_bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DropConfig {
    pub scenario: Scenario,
    pub frequency_ghz: f64,
    pub rf_bandwidth_hz: f64,
    pub drops: u32,
    pub links_per_drop: u16,
    pub seed: u64,
    /// Base station height; a scenario default when unset.
    pub bs_height_m: Option<f64>,
    pub ue_height_m: f64,
    pub ue_velocity_mps: [f64; 3],
    pub condition: ConditionMode,
    pub placement: Placement,
    pub attenuation: AttenuationSettings,
    pub small_scale: SmallScaleConfig,
    pub antenna: AntennaSettings,
    pub psd: PsdSettings,
    pub output: OutputSettings,
    pub execution: Execution,
    /// Replaces the built-in parameter anchor file.
    pub param_file: Option<PathBuf>,
}

impl Default for DropConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::UMi,
            frequency_ghz: 28.0,
            rf_bandwidth_hz: 800e6,
            drops: 1,
            links_per_drop: 1,
            seed: 1,
            bs_height_m: None,
            ue_height_m: 1.5,
            ue_velocity_mps: [0.0; 3],
            condition: ConditionMode::Auto,
            placement: Placement::default(),
            attenuation: AttenuationSettings::default(),
            small_scale: SmallScaleConfig::default(),
            antenna: AntennaSettings::default(),
            psd: PsdSettings::default(),
            output: OutputSettings::default(),
            execution: Execution::default(),
            param_file: None,
        }
    }
}

/// Typical base station height (m) of each scenario.
pub fn default_bs_height(scenario: Scenario) -> f64 {
    match scenario {
        Scenario::UMi => 10.0,
        Scenario::UMa => 25.0,
        Scenario::RMa => 35.0,
        Scenario::InH => 3.0,
        Scenario::InF => 8.0,
    }
}

impl DropConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: DropConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn bs_height(&self) -> f64 {
        self.bs_height_m.unwrap_or_else(|| default_bs_height(self.scenario))
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_FREQUENCY_GHZ..=MAX_FREQUENCY_GHZ).contains(&self.frequency_ghz) {
            return Err(Error::Config(format!(
                "frequency {} GHz outside [{MIN_FREQUENCY_GHZ}, {MAX_FREQUENCY_GHZ}]",
                self.frequency_ghz
            )));
        }
        if !(self.rf_bandwidth_hz > 0.0 && self.rf_bandwidth_hz.is_finite()) {
            return Err(Error::Config("rf_bandwidth_hz must be positive".into()));
        }
        if self.drops == 0 || self.links_per_drop == 0 {
            return Err(Error::Config("drops and links_per_drop must be at least 1".into()));
        }
        let h_bs = self.bs_height();
        if !(h_bs > 0.0 && h_bs.is_finite()) || !(self.ue_height_m >= 0.0 && self.ue_height_m.is_finite()) {
            return Err(Error::Config("antenna heights must be finite, BS height positive".into()));
        }
        if self.scenario == Scenario::UMa && self.ue_height_m > UMA_MAX_UE_HEIGHT_M {
            return Err(Error::Config(format!("UMa UE height is limited to {UMA_MAX_UE_HEIGHT_M} m")));
        }
        if self.ue_velocity_mps.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("UE velocity must be finite".into()));
        }
        self.placement.validate()?;
        let a = &self.attenuation;
        if !(a.foliage_loss_db_per_m >= 0.0 && a.foliage_depth_m >= 0.0) {
            return Err(Error::Config("foliage settings must be non-negative".into()));
        }
        self.small_scale.validate()?;
        self.antenna.tx.validate()?;
        self.antenna.rx.validate()?;
        if self.psd.subbands == 0 {
            return Err(Error::Config("psd.subbands must be at least 1".into()));
        }
        if self.psd.sample_times_s.is_empty() || self.psd.sample_times_s.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("psd.sample_times_s needs at least one finite time".into()));
        }
        if self.output.report_bins == Some(0) {
            return Err(Error::Config("output.report_bins must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        DropConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trip_through_toml() {
        let cfg = DropConfig {
            scenario: Scenario::InF,
            placement: Placement::log_sweep(1.0, 100.0, 5),
            condition: ConditionMode::Nlos,
            ..DropConfig::default()
        };
        let text = cfg.to_toml_string();
        assert_eq!(DropConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn minimal_file() {
        let cfg = DropConfig::from_toml_str(
            r#"
            scenario = "UMa"
            frequency_ghz = 142
            drops = 10
            [placement]
            kind = "sweep"
            distances_m = [10, 100]
            [attenuation]
            shadowing = false
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, Scenario::UMa);
        assert_eq!(cfg.bs_height(), 25.0);
        assert!(!cfg.attenuation.shadowing);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "frequency_ghz = 200",
            "drops = 0",
            "unknown_key = 1",
            "[placement]\nkind = \"annulus\"\nmin_distance_m = 0.5\nmax_distance_m = 10",
            "[placement]\nkind = \"sweep\"\ndistances_m = []",
            "[psd]\nsubbands = 0",
        ] {
            let err = DropConfig::from_toml_str(text).unwrap_err();
            assert!(err.is_config_error(), "{text}: {err}");
        }
    }

    #[test]
    fn log_sweep_endpoints() {
        let Placement::Sweep { distances_m } = Placement::log_sweep(1.0, 500.0, 10) else {
            unreachable!()
        };
        assert_eq!(distances_m.len(), 10);
        assert!((distances_m[0] - 1.0).abs() < 1e-12 && (distances_m[9] - 500.0).abs() < 1e-9);
    }
}
