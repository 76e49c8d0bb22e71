//! Scenario parameter anchors and their frequency interpolation.
//!
//! Channel parameters are measured at 28 GHz and 140 GHz. The anchor values
//! live in a versioned TOML file (`data/params.toml` is built in) and are
//! resolved for an arbitrary carrier frequency by [`params_for`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::types::{check_frequency, ChannelCondition, Scenario};

pub const LOW_ANCHOR_GHZ: f64 = 28.0;
pub const HIGH_ANCHOR_GHZ: f64 = 140.0;

/// Outdoor subpath-count and intra-cluster-delay distributions switch family
/// at this frequency; `f >= 100` selects the high-band family.
pub const FAMILY_SWITCH_GHZ: f64 = 100.0;

const SUPPORTED_SCHEMA: u32 = 1;
const BUILTIN_PARAMS: &str = include_str!("../data/params.toml");

/// Linear interpolation between the 28 GHz and 140 GHz anchors, clamped
/// outside the anchor interval.
pub fn interpolate_param(p28: f64, p140: f64, frequency_ghz: f64) -> Result<f64> {
    if !(p28.is_finite() && p140.is_finite() && frequency_ghz.is_finite()) {
        return Err(Error::invalid("interpolation inputs must be finite"));
    }
    if frequency_ghz <= 0.0 {
        return Err(Error::invalid("interpolation frequency must be positive"));
    }
    Ok(if frequency_ghz <= LOW_ANCHOR_GHZ {
        p28
    } else if frequency_ghz >= HIGH_ANCHOR_GHZ {
        p140
    } else {
        (p140 - p28) / (HIGH_ANCHOR_GHZ - LOW_ANCHOR_GHZ) * frequency_ghz + (5.0 * p28 - p140) / 4.0
    })
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorFile {
    schema_version: u32,
    scenario: Vec<ScenarioConstants>,
    los: LosConstants,
    record: Vec<AnchorRecord>,
}

/// Per-scenario constants that do not depend on frequency.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConstants {
    pub name: Scenario,
    /// Minimum inter-cluster time interval (ns).
    pub mti_ns: f64,
    pub sf_corr_los_m: f64,
    pub sf_corr_nlos_m: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SquaredLosConstants {
    pub d1_m: f64,
    pub d2_m: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RmaLosConstants {
    pub breakpoint_m: f64,
    pub decay_m: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InhLosConstants {
    pub near_m: f64,
    pub near_decay_m: f64,
    pub far_m: f64,
    pub far_decay_m: f64,
    pub far_scale: f64,
}

/// LOS probability model constants stored alongside the channel anchors.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LosConstants {
    pub umi: SquaredLosConstants,
    pub uma: SquaredLosConstants,
    pub rma: RmaLosConstants,
    pub inh: InhLosConstants,
}

macro_rules! anchor_fields {
    ($($(#[$doc:meta])* $field:ident),* $(,)?) => {
        /// One scenario x condition x anchor-frequency record. Every field
        /// is optional at the schema level; [`ParamTable`] checks that the
        /// fields each distribution family needs are present.
        #[derive(Debug, Clone, Default, Deserialize, PartialEq)]
        #[serde(deny_unknown_fields)]
        pub struct AnchorRecord {
            pub scenario: Option<Scenario>,
            pub condition: Option<ChannelCondition>,
            pub anchor_ghz: f64,
            $($(#[$doc])* pub $field: Option<f64>,)*
        }

        /// Parameters resolved at one carrier frequency. Fields missing at
        /// both anchors stay `None`.
        #[derive(Debug, Clone, PartialEq)]
        pub struct ScenarioParams {
            pub scenario: Scenario,
            pub condition: ChannelCondition,
            pub frequency_ghz: f64,
            /// Minimum inter-cluster time interval (ns).
            pub mti_ns: f64,
            /// Shadow fading decorrelation distance (m).
            pub sf_corr_distance_m: f64,
            $($(#[$doc])* pub $field: Option<f64>,)*
        }

        fn resolve_fields(
            low: Option<&AnchorRecord>,
            high: &AnchorRecord,
            frequency_ghz: f64,
            scenario: Scenario,
            condition: ChannelCondition,
            constants: &ScenarioConstants,
        ) -> Result<ScenarioParams> {
            Ok(ScenarioParams {
                scenario,
                condition,
                frequency_ghz,
                mti_ns: constants.mti_ns,
                sf_corr_distance_m: match condition {
                    ChannelCondition::Los => constants.sf_corr_los_m,
                    ChannelCondition::Nlos => constants.sf_corr_nlos_m,
                },
                $($field: resolve_one(low.and_then(|r| r.$field), high.$field, frequency_ghz)?,)*
            })
        }

        impl AnchorRecord {
            fn fields(&self) -> Vec<(&'static str, Option<f64>)> {
                vec![$((stringify!($field), self.$field),)*]
            }
        }
    };
}

anchor_fields! {
    /// Path loss exponent (absent for RMa, which uses the height-dependent model).
    ple,
    /// Shadow fading standard deviation (dB).
    sf_std_db,
    /// Upper bound of the discrete-uniform time-cluster count.
    num_clusters_max,
    /// Poisson rate of the time-cluster count.
    cluster_rate,
    /// Upper bound of the discrete-uniform subpath count.
    subpaths_max,
    /// Mean of the (discrete) exponential subpath count.
    subpath_mean,
    /// Weight of the discrete-exponential branch of the subpath count mixture.
    subpath_beta,
    /// Mean cluster excess delay gap (ns).
    cluster_delay_mean_ns,
    /// Gamma shape of the cluster excess delay gap.
    cluster_delay_shape,
    /// Gamma scale of the cluster excess delay gap (ns).
    cluster_delay_scale_ns,
    /// Upper bound of the per-cluster intra-delay exponent.
    intra_delay_exponent_max,
    /// Mean intra-cluster subpath excess delay (ns).
    intra_delay_mean_ns,
    /// Gamma shape of the intra-cluster delay.
    intra_delay_shape,
    /// Gamma scale of the intra-cluster delay (ns).
    intra_delay_scale_ns,
    /// Cluster power decay constant (ns).
    cluster_decay_ns,
    /// Cluster shadowing standard deviation (dB).
    cluster_shadow_db,
    /// Subpath power decay constant (ns).
    subpath_decay_ns,
    /// Subpath shadowing standard deviation (dB).
    subpath_shadow_db,
    /// Spatial lobe count parameter for departure lobes.
    lobes_aod,
    /// Spatial lobe count parameter for arrival lobes.
    lobes_aoa,
    zod_lobe_mean_deg,
    zod_lobe_std_deg,
    zoa_lobe_mean_deg,
    zoa_lobe_std_deg,
    aod_offset_std_deg,
    zod_offset_std_deg,
    aoa_offset_std_deg,
    zoa_offset_std_deg,
}

fn resolve_one(low: Option<f64>, high: Option<f64>, frequency_ghz: f64) -> Result<Option<f64>> {
    Ok(match (low, high) {
        (Some(a), Some(b)) => Some(interpolate_param(a, b, frequency_ghz)?),
        (Some(a), None) | (None, Some(a)) => Some(a),
        (None, None) => None,
    })
}

// ---------------------------------------------------------------------------
// Distribution families
// ---------------------------------------------------------------------------

/// Distribution of a positive count (time clusters or spatial lobes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountModel {
    /// Discrete uniform on `1..=max`.
    DiscreteUniform { max: u32 },
    /// `Poisson(rate) + 1`.
    PoissonPlusOne { rate: f64 },
}

/// Distribution of the number of subpaths in a time cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubpathCountModel {
    /// Discrete uniform on `1..=max`.
    DiscreteUniform { max: u32 },
    /// `ceil(X)` with `X ~ Exp(mean)`: geometric on `1, 2, ...`.
    DiscreteExponential { mean: f64 },
    /// With probability `beta` a discrete-exponential draw, otherwise 1.
    Mixture { beta: f64, mean: f64 },
}

/// Distribution of the excess delay gap between consecutive clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClusterDelayModel {
    Exponential { mean_ns: f64 },
    Gamma { shape: f64, scale_ns: f64 },
    /// Lognormal with the given linear mean and log-domain standard deviation.
    LogNormal { mean_ns: f64, log_sigma: f64 },
}

/// Distribution of intra-cluster subpath excess delays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntraDelayModel {
    /// `((m - 1) / B_bb)^(1 + X_n)` with `X_n ~ U(0, exponent_max)` per cluster.
    PowerLaw { exponent_max: f64 },
    Exponential { mean_ns: f64 },
    Gamma { shape: f64, scale_ns: f64 },
}

/// Departure or arrival side of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LobeKind {
    Departure,
    Arrival,
}

fn rounded_count(value: f64, what: &str) -> Result<u32> {
    let n = value.round();
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::invalid(format!("{what} must be at least 1, got {value}")));
    }
    Ok(n as u32)
}

impl ScenarioParams {
    fn require(&self, value: Option<f64>, name: &str) -> Result<f64> {
        value.ok_or_else(|| {
            Error::ParamFile(format!(
                "{} {} at {} GHz: missing '{name}'",
                self.scenario, self.condition, self.frequency_ghz
            ))
        })
    }

    fn high_band(&self) -> bool {
        self.frequency_ghz >= FAMILY_SWITCH_GHZ
    }

    pub fn path_loss_exponent(&self) -> Result<f64> {
        if self.scenario == Scenario::RMa {
            return Err(Error::UnsupportedScenario {
                scenario: self.scenario,
                operation: "close-in path loss exponent",
            });
        }
        self.require(self.ple, "ple")
    }

    pub fn shadow_fading_std_db(&self) -> Result<f64> {
        self.require(self.sf_std_db, "sf_std_db")
    }

    pub fn cluster_count_model(&self) -> Result<CountModel> {
        if self.scenario.is_indoor() {
            Ok(CountModel::PoissonPlusOne {
                rate: self.require(self.cluster_rate, "cluster_rate")?,
            })
        } else {
            let max = self.require(self.num_clusters_max, "num_clusters_max")?;
            Ok(CountModel::DiscreteUniform {
                max: rounded_count(max, "num_clusters_max")?,
            })
        }
    }

    pub fn subpath_count_model(&self) -> Result<SubpathCountModel> {
        match self.scenario {
            Scenario::UMi | Scenario::UMa if self.high_band() => {
                Ok(SubpathCountModel::DiscreteExponential {
                    mean: self.require(self.subpath_mean, "subpath_mean")?,
                })
            }
            Scenario::UMi | Scenario::UMa | Scenario::RMa => {
                let max = self.require(self.subpaths_max, "subpaths_max")?;
                Ok(SubpathCountModel::DiscreteUniform {
                    max: rounded_count(max, "subpaths_max")?,
                })
            }
            Scenario::InH | Scenario::InF => Ok(SubpathCountModel::Mixture {
                beta: self.require(self.subpath_beta, "subpath_beta")?,
                mean: self.require(self.subpath_mean, "subpath_mean")?,
            }),
        }
    }

    /// Cluster delay family. InH uses the exponential family unless a
    /// lognormal sigma is supplied.
    pub fn cluster_delay_model(&self, inh_lognormal_sigma: Option<f64>) -> Result<ClusterDelayModel> {
        match self.scenario {
            Scenario::InF => Ok(ClusterDelayModel::Gamma {
                shape: self.require(self.cluster_delay_shape, "cluster_delay_shape")?,
                scale_ns: self.require(self.cluster_delay_scale_ns, "cluster_delay_scale_ns")?,
            }),
            Scenario::InH if inh_lognormal_sigma.is_some() => Ok(ClusterDelayModel::LogNormal {
                mean_ns: self.require(self.cluster_delay_mean_ns, "cluster_delay_mean_ns")?,
                log_sigma: inh_lognormal_sigma.unwrap_or_default(),
            }),
            _ => Ok(ClusterDelayModel::Exponential {
                mean_ns: self.require(self.cluster_delay_mean_ns, "cluster_delay_mean_ns")?,
            }),
        }
    }

    pub fn intra_delay_model(&self) -> Result<IntraDelayModel> {
        match self.scenario {
            Scenario::UMi | Scenario::UMa | Scenario::RMa if !self.high_band() => {
                Ok(IntraDelayModel::PowerLaw {
                    exponent_max: self.require(self.intra_delay_exponent_max, "intra_delay_exponent_max")?,
                })
            }
            Scenario::InF => Ok(IntraDelayModel::Gamma {
                shape: self.require(self.intra_delay_shape, "intra_delay_shape")?,
                scale_ns: self.require(self.intra_delay_scale_ns, "intra_delay_scale_ns")?,
            }),
            _ => Ok(IntraDelayModel::Exponential {
                mean_ns: self.require(self.intra_delay_mean_ns, "intra_delay_mean_ns")?,
            }),
        }
    }

    pub fn lobe_count_model(&self, kind: LobeKind) -> Result<CountModel> {
        let value = match kind {
            LobeKind::Departure => self.require(self.lobes_aod, "lobes_aod")?,
            LobeKind::Arrival => self.require(self.lobes_aoa, "lobes_aoa")?,
        };
        if self.scenario == Scenario::InH {
            Ok(CountModel::DiscreteUniform {
                max: rounded_count(value, "InH lobe count bound")?,
            })
        } else {
            Ok(CountModel::PoissonPlusOne { rate: value })
        }
    }

    /// Cluster power decay constant (ns) and shadowing std (dB).
    pub fn cluster_power(&self) -> Result<(f64, f64)> {
        Ok((
            self.require(self.cluster_decay_ns, "cluster_decay_ns")?,
            self.require(self.cluster_shadow_db, "cluster_shadow_db")?,
        ))
    }

    /// Subpath power decay constant (ns) and shadowing std (dB).
    pub fn subpath_power(&self) -> Result<(f64, f64)> {
        Ok((
            self.require(self.subpath_decay_ns, "subpath_decay_ns")?,
            self.require(self.subpath_shadow_db, "subpath_shadow_db")?,
        ))
    }

    /// Mean and std of the lobe elevation (degrees, NYU convention).
    pub fn lobe_elevation(&self, kind: LobeKind) -> Result<(f64, f64)> {
        Ok(match kind {
            LobeKind::Departure => (
                self.require(self.zod_lobe_mean_deg, "zod_lobe_mean_deg")?,
                self.require(self.zod_lobe_std_deg, "zod_lobe_std_deg")?,
            ),
            LobeKind::Arrival => (
                self.require(self.zoa_lobe_mean_deg, "zoa_lobe_mean_deg")?,
                self.require(self.zoa_lobe_std_deg, "zoa_lobe_std_deg")?,
            ),
        })
    }

    /// Azimuth and elevation offset std (degrees) of subpaths around their lobe.
    pub fn angular_offsets(&self, kind: LobeKind) -> Result<(f64, f64)> {
        Ok(match kind {
            LobeKind::Departure => (
                self.require(self.aod_offset_std_deg, "aod_offset_std_deg")?,
                self.require(self.zod_offset_std_deg, "zod_offset_std_deg")?,
            ),
            LobeKind::Arrival => (
                self.require(self.aoa_offset_std_deg, "aoa_offset_std_deg")?,
                self.require(self.zoa_offset_std_deg, "zoa_offset_std_deg")?,
            ),
        })
    }

    /// Resolves every distribution family once; used for validation.
    fn check_complete(&self) -> Result<()> {
        if self.scenario != Scenario::RMa {
            self.path_loss_exponent()?;
        }
        self.shadow_fading_std_db()?;
        self.cluster_count_model()?;
        self.subpath_count_model()?;
        self.cluster_delay_model(None)?;
        self.intra_delay_model()?;
        self.cluster_power()?;
        self.subpath_power()?;
        for kind in [LobeKind::Departure, LobeKind::Arrival] {
            self.lobe_count_model(kind)?;
            self.lobe_elevation(kind)?;
            self.angular_offsets(kind)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Table
// ---------------------------------------------------------------------------

type RecordKey = (Scenario, ChannelCondition);

/// Validated anchor table.
#[derive(Debug, Clone)]
pub struct ParamTable {
    constants: BTreeMap<Scenario, ScenarioConstants>,
    low: BTreeMap<RecordKey, AnchorRecord>,
    high: BTreeMap<RecordKey, AnchorRecord>,
    los: LosConstants,
}

impl ParamTable {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static ParamTable {
        static TABLE: OnceLock<ParamTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            ParamTable::from_toml_str(BUILTIN_PARAMS).expect("built-in parameter table is valid")
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::ParamFile(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: AnchorFile =
            toml::from_str(text).map_err(|e| Error::ParamFile(e.message().to_string()))?;
        if file.schema_version != SUPPORTED_SCHEMA {
            return Err(Error::ParamFile(format!(
                "unsupported schema_version {} (expected {SUPPORTED_SCHEMA})",
                file.schema_version
            )));
        }

        let mut constants = BTreeMap::new();
        for c in file.scenario {
            for (name, v) in [
                ("mti_ns", c.mti_ns),
                ("sf_corr_los_m", c.sf_corr_los_m),
                ("sf_corr_nlos_m", c.sf_corr_nlos_m),
            ] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::ParamFile(format!("{}: {name} must be positive", c.name)));
                }
            }
            if constants.insert(c.name, c).is_some() {
                return Err(Error::ParamFile(format!("duplicate scenario block {}", c.name)));
            }
        }

        let mut low = BTreeMap::new();
        let mut high = BTreeMap::new();
        for rec in file.record {
            let (Some(scenario), Some(condition)) = (rec.scenario, rec.condition) else {
                return Err(Error::ParamFile("record without scenario or condition".into()));
            };
            for (name, value) in rec.fields() {
                if let Some(v) = value {
                    if !v.is_finite() {
                        return Err(Error::ParamFile(format!(
                            "{scenario} {condition}: {name} is not finite"
                        )));
                    }
                    let must_be_non_negative = !name.ends_with("_mean_deg");
                    if must_be_non_negative && v < 0.0 {
                        return Err(Error::ParamFile(format!(
                            "{scenario} {condition}: {name} must be non-negative, got {v}"
                        )));
                    }
                }
            }
            let slot = if rec.anchor_ghz == LOW_ANCHOR_GHZ {
                &mut low
            } else if rec.anchor_ghz == HIGH_ANCHOR_GHZ {
                &mut high
            } else {
                return Err(Error::ParamFile(format!(
                    "{scenario} {condition}: anchor_ghz must be 28 or 140, got {}",
                    rec.anchor_ghz
                )));
            };
            let anchor = rec.anchor_ghz;
            if slot.insert((scenario, condition), rec).is_some() {
                return Err(Error::ParamFile(format!(
                    "duplicate record {scenario} {condition} at {anchor} GHz"
                )));
            }
        }

        let table = ParamTable {
            constants,
            low,
            high,
            los: file.los,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let present: BTreeSet<Scenario> = self.constants.keys().copied().collect();
        for scenario in Scenario::ALL {
            if !present.contains(&scenario) {
                return Err(Error::ParamFile(format!("missing scenario block for {scenario}")));
            }
            for condition in ChannelCondition::ALL {
                let key = (scenario, condition);
                if !self.high.contains_key(&key) {
                    return Err(Error::ParamFile(format!(
                        "missing 140 GHz record for {scenario} {condition}"
                    )));
                }
                if scenario != Scenario::InF && !self.low.contains_key(&key) {
                    return Err(Error::ParamFile(format!(
                        "missing 28 GHz record for {scenario} {condition}"
                    )));
                }
                // Both sides of the family switch must resolve.
                for f in [LOW_ANCHOR_GHZ, FAMILY_SWITCH_GHZ - 1e-6, FAMILY_SWITCH_GHZ, HIGH_ANCHOR_GHZ] {
                    self.params_for(scenario, condition, f)?.check_complete()?;
                }
            }
        }
        Ok(())
    }

    pub fn los_constants(&self) -> &LosConstants {
        &self.los
    }

    pub fn scenario_constants(&self, scenario: Scenario) -> &ScenarioConstants {
        &self.constants[&scenario]
    }

    /// Resolves all parameters for `scenario`/`condition` at `frequency_ghz`.
    /// InF has no 28 GHz record and uses its 140 GHz values everywhere.
    pub fn params_for(
        &self,
        scenario: Scenario,
        condition: ChannelCondition,
        frequency_ghz: f64,
    ) -> Result<ScenarioParams> {
        check_frequency(frequency_ghz)?;
        let key = (scenario, condition);
        let high = self.high.get(&key).ok_or_else(|| {
            Error::ParamFile(format!("no parameters for {scenario} {condition}"))
        })?;
        let low = if scenario == Scenario::InF {
            None
        } else {
            self.low.get(&key)
        };
        resolve_fields(
            low,
            high,
            frequency_ghz,
            scenario,
            condition,
            self.scenario_constants(scenario),
        )
    }
}

/// [`ParamTable::params_for`] on the built-in table.
pub fn params_for(
    scenario: Scenario,
    condition: ChannelCondition,
    frequency_ghz: f64,
) -> Result<ScenarioParams> {
    ParamTable::builtin().params_for(scenario, condition, frequency_ghz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use ChannelCondition::{Los, Nlos};

    #[test]
    fn interpolation_examples() {
        assert_eq!(interpolate_param(2.0, 2.0, 73.0).unwrap(), 2.0);
        assert_eq!(interpolate_param(3.2, 2.9, 28.0).unwrap(), 3.2);
        // 84 GHz is the anchor midpoint
        assert_relative_eq!(interpolate_param(3.2, 2.9, 84.0).unwrap(), 3.05, epsilon = 1e-12);
    }

    #[test]
    fn interpolation_is_continuous_at_anchors() {
        let (a, b) = (7.0, 8.2);
        assert_relative_eq!(interpolate_param(a, b, 28.0 + 1e-9).unwrap(), a, epsilon = 1e-9);
        assert_relative_eq!(interpolate_param(a, b, 140.0 - 1e-9).unwrap(), b, epsilon = 1e-9);
        assert_eq!(interpolate_param(a, b, 0.5).unwrap(), a);
        assert_eq!(interpolate_param(a, b, 150.0).unwrap(), b);
    }

    #[test]
    fn interpolation_rejects_non_finite() {
        assert!(interpolate_param(f64::NAN, 1.0, 50.0).is_err());
        assert!(interpolate_param(1.0, f64::INFINITY, 50.0).is_err());
        assert!(interpolate_param(1.0, 2.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn interpolation_monotone_between_anchors(
            p28 in -50.0f64..50.0,
            p140 in -50.0f64..50.0,
            f1 in 0.5f64..150.0,
            f2 in 0.5f64..150.0,
        ) {
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let a = interpolate_param(p28, p140, lo).unwrap();
            let b = interpolate_param(p28, p140, hi).unwrap();
            let tol = 1e-9 * (1.0 + p28.abs() + p140.abs());
            if p140 >= p28 {
                prop_assert!(b >= a - tol);
            } else {
                prop_assert!(b <= a + tol);
            }
            let (min, max) = (p28.min(p140), p28.max(p140));
            prop_assert!(a >= min - tol && a <= max + tol);
        }
    }

    #[test]
    fn umi_los_at_28() {
        let p = params_for(Scenario::UMi, Los, 28.0).unwrap();
        assert_eq!(p.ple, Some(2.0));
        assert_eq!(p.sf_std_db, Some(4.0));
        assert_eq!(p.cluster_count_model().unwrap(), CountModel::DiscreteUniform { max: 6 });
    }

    #[test]
    fn inf_reuses_high_anchor() {
        let p = params_for(Scenario::InF, Nlos, 28.0).unwrap();
        assert_eq!(p.ple, Some(3.1));
        assert_eq!(p.cluster_rate, Some(2.0));
        assert_eq!(p, {
            let mut q = params_for(Scenario::InF, Nlos, 140.0).unwrap();
            q.frequency_ghz = 28.0;
            q
        });
    }

    #[test]
    fn uma_nlos_shadowing_interpolated() {
        let p = params_for(Scenario::UMa, Nlos, 84.0).unwrap();
        assert_relative_eq!(p.sf_std_db.unwrap(), 7.6, epsilon = 1e-12);
    }

    #[test]
    fn family_switch_at_100_ghz() {
        let below = params_for(Scenario::UMi, Los, 99.999).unwrap();
        let at = params_for(Scenario::UMi, Los, 100.0).unwrap();
        assert_eq!(
            below.subpath_count_model().unwrap(),
            SubpathCountModel::DiscreteUniform { max: 30 }
        );
        assert_eq!(
            at.subpath_count_model().unwrap(),
            SubpathCountModel::DiscreteExponential { mean: 1.8 }
        );
        assert!(matches!(below.intra_delay_model().unwrap(), IntraDelayModel::PowerLaw { .. }));
        assert_eq!(at.intra_delay_model().unwrap(), IntraDelayModel::Exponential { mean_ns: 30.0 });
        // RMa keeps the discrete-uniform count on both sides
        let rma = params_for(Scenario::RMa, Nlos, 140.0).unwrap();
        assert_eq!(rma.subpath_count_model().unwrap(), SubpathCountModel::DiscreteUniform { max: 2 });
    }

    #[test]
    fn rma_has_no_ple() {
        let p = params_for(Scenario::RMa, Los, 28.0).unwrap();
        assert!(p.ple.is_none());
        assert!(p.path_loss_exponent().is_err());
    }

    #[test]
    fn out_of_range_frequency_rejected() {
        assert!(params_for(Scenario::InF, Los, 0.4).is_err());
        assert!(params_for(Scenario::UMi, Los, 151.0).is_err());
    }

    #[test]
    fn params_for_is_deterministic() {
        for sc in Scenario::ALL {
            for c in ChannelCondition::ALL {
                assert_eq!(params_for(sc, c, 61.3).unwrap(), params_for(sc, c, 61.3).unwrap());
            }
        }
    }

    #[test]
    fn schema_rejects_unknown_fields_and_bad_anchors() {
        let good = BUILTIN_PARAMS;
        let unknown = good.replacen("ple = 2.0", "ple = 2.0\nbogus = 1.0", 1);
        assert!(matches!(ParamTable::from_toml_str(&unknown), Err(Error::ParamFile(_))));
        let bad_anchor = good.replacen("anchor_ghz = 28.0", "anchor_ghz = 73.0", 1);
        assert!(ParamTable::from_toml_str(&bad_anchor).is_err());
        let negative = good.replacen("sf_std_db = 4.0", "sf_std_db = -4.0", 1);
        assert!(ParamTable::from_toml_str(&negative).is_err());
        let version = good.replacen("schema_version = 1", "schema_version = 9", 1);
        assert!(ParamTable::from_toml_str(&version).is_err());
    }

    #[test]
    fn schema_rejects_missing_family_field() {
        // Dropping the UMi LOS 140 GHz subpath mean breaks the high band family.
        let text = BUILTIN_PARAMS.replacen("subpath_mean = 1.8", "", 1);
        let err = ParamTable::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("subpath_mean"), "{err}");
    }
}
