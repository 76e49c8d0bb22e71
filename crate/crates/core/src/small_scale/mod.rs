//! Time-cluster spatial-lobe generation of the multipath channel.
//!
//! [`generate_realization`] runs the full procedure for one link: cluster
//! and subpath counts, delays, powers, phases, lobes and angles, followed
//! by bandwidth merging, LOS alignment, dynamic range pruning, XPD and
//! Doppler. The individual steps are exported for validation.

mod coords;
mod post;
mod sampling;

pub use coords::{doppler_shift, gcs_to_nyu, nyu_to_gcs, Direction, NyuAngles};
pub use post::{
    absolute_propagation_times, align_los, bandwidth_adjust, gen_xpd, propagation_delay_ns, prune_dynamic_range,
    XpdConfig,
};
pub use sampling::{
    assign_subpath_angles, draw_cluster_gap, draw_count, draw_discrete_exponential, draw_intra_delays,
    draw_subpath_count, gen_cluster_delays, gen_cluster_powers, gen_intra_cluster_delays, gen_num_subpaths,
    gen_num_time_clusters, gen_spatial_lobes, gen_subpath_phases, gen_subpath_powers, power_law_delays, IntraDelays,
    SpatialLobe, SubpathAngles, ELEVATION_LIMIT_DEG,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;
use crate::large_scale::PathLossBreakdown;
use crate::params::{LobeKind, ScenarioParams};
use crate::rng::RngStream;
use crate::types::{CarrierConfig, ChannelCondition, Scenario};

/// One multipath component.
#[derive(Debug, Clone, PartialEq)]
pub struct Subpath {
    /// Zero-based time cluster index.
    pub cluster: usize,
    /// Zero-based index within the cluster.
    pub index: usize,
    /// Excess delay within the cluster (ns).
    pub intra_delay_ns: f64,
    /// Absolute propagation delay (ns).
    pub delay_ns: f64,
    pub power_mw: f64,
    /// Sum of the member powers for a merged subpath; equal to `power_mw`
    /// otherwise.
    pub member_power_mw: f64,
    pub merged_count: usize,
    /// theta-theta, theta-phi, phi-theta and phi-phi phases (rad).
    pub phases: [f64; 4],
    pub departure: Direction,
    pub arrival: Direction,
    pub aod_lobe: usize,
    pub aoa_lobe: usize,
    /// theta-phi, phi-theta and phi-phi XPD (dB).
    pub xpd_db: [f64; 3],
    pub doppler_hz: f64,
}

impl Subpath {
    pub fn power_dbm(&self) -> f64 {
        10.0 * self.power_mw.log10()
    }

    /// Amplitude in sqrt(mW).
    pub fn amplitude(&self) -> f64 {
        self.power_mw.sqrt()
    }

    /// XPD values as linear power ratios.
    pub fn xpd_linear(&self) -> [f64; 3] {
        self.xpd_db.map(|k| 10f64.powf(k / 10.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeCluster {
    pub index: usize,
    /// Cluster excess delay (ns).
    pub delay_ns: f64,
    pub power_mw: f64,
    /// Subpaths before bandwidth merging and pruning.
    pub subpaths: Vec<Subpath>,
}

/// Settings of the multipath generation that are not part of the
/// scenario tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmallScaleConfig {
    pub tx_power_dbm: f64,
    /// Bandwidth used by the power-law intra-cluster delays; half the RF
    /// bandwidth when unset.
    pub baseband_bandwidth_hz: Option<f64>,
    /// Largest omnidirectional path loss the receiver can measure.
    pub max_measurable_pl_db: f64,
    /// Lower bound of the pruning threshold.
    pub min_dynamic_range_db: f64,
    pub xpd: XpdConfig,
    /// Switches InH cluster gaps to a lognormal with this log-domain sigma.
    pub inh_lognormal_sigma: Option<f64>,
}

impl Default for SmallScaleConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 30.0,
            baseband_bandwidth_hz: None,
            max_measurable_pl_db: 180.0,
            min_dynamic_range_db: 30.0,
            xpd: XpdConfig::default(),
            inh_lognormal_sigma: None,
        }
    }
}

impl SmallScaleConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.tx_power_dbm, self.max_measurable_pl_db, self.min_dynamic_range_db, self.xpd.mean_db];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("small-scale settings must be finite".into()));
        }
        if !(self.min_dynamic_range_db >= 0.0) || !(self.xpd.std_db >= 0.0) {
            return Err(Error::Config("dynamic range and XPD std must be non-negative".into()));
        }
        if let Some(b) = self.baseband_bandwidth_hz {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Config("baseband bandwidth must be positive".into()));
            }
        }
        if let Some(s) = self.inh_lognormal_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config("InH lognormal sigma must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn baseband_bandwidth(&self, carrier: &CarrierConfig) -> f64 {
        self.baseband_bandwidth_hz
            .unwrap_or(carrier.rf_bandwidth_hz() / 2.0)
    }

    /// Pruning threshold: measurable path loss minus the link's mean path
    /// loss, never below the minimum dynamic range.
    pub fn pruning_threshold_db(&self, mean_path_loss_db: f64) -> f64 {
        (self.max_measurable_pl_db - mean_path_loss_db).max(self.min_dynamic_range_db)
    }
}

/// Converts a transmit power and a path loss (dB) to received power (mW).
pub fn received_power_mw(tx_power_dbm: f64, path_loss_db: f64) -> f64 {
    10f64.powf((tx_power_dbm - path_loss_db) / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub scenario: Scenario,
    pub condition: ChannelCondition,
    pub carrier: CarrierConfig,
    pub geometry: LinkGeometry,
    pub clusters: Vec<TimeCluster>,
    pub aod_lobes: Vec<SpatialLobe>,
    pub aoa_lobes: Vec<SpatialLobe>,
    /// Subpaths after bandwidth merging, alignment and pruning, sorted by
    /// delay.
    pub subpaths: Vec<Subpath>,
    /// Total received power `P_r` (mW).
    pub received_power_mw: f64,
    pub tx_power_dbm: f64,
    pub pruning_threshold_db: f64,
}

impl ChannelRealization {
    /// Total power of all generated subpaths before merging.
    pub fn generated_power_mw(&self) -> f64 {
        self.clusters
            .iter()
            .flat_map(|c| &c.subpaths)
            .map(|sp| sp.power_mw)
            .sum()
    }

    pub fn generated_subpath_count(&self) -> usize {
        self.clusters.iter().map(|c| c.subpaths.len()).sum()
    }

    pub fn resolvable_power_mw(&self) -> f64 {
        self.subpaths.iter().map(|sp| sp.power_mw).sum()
    }

    /// Power-weighted RMS spread of the resolvable subpath delays (ns).
    pub fn rms_delay_spread_ns(&self) -> f64 {
        let total = self.resolvable_power_mw();
        if !(total > 0.0) {
            return 0.0;
        }
        let mean = self.subpaths.iter().map(|sp| sp.power_mw * sp.delay_ns).sum::<f64>() / total;
        let var = self
            .subpaths
            .iter()
            .map(|sp| sp.power_mw * (sp.delay_ns - mean).powi(2))
            .sum::<f64>()
            / total;
        var.max(0.0).sqrt()
    }

    /// Circular power-weighted RMS azimuth spread (degrees) of departure or
    /// arrival directions.
    pub fn rms_azimuth_spread_deg(&self, kind: LobeKind) -> f64 {
        let total = self.resolvable_power_mw();
        if !(total > 0.0) {
            return 0.0;
        }
        let resultant: Complex64 = self
            .subpaths
            .iter()
            .map(|sp| {
                let az = match kind {
                    LobeKind::Departure => sp.departure.azimuth_deg,
                    LobeKind::Arrival => sp.arrival.azimuth_deg,
                };
                Complex64::from_polar(sp.power_mw, az.to_radians())
            })
            .sum();
        let r = (resultant.norm() / total).clamp(f64::MIN_POSITIVE, 1.0);
        (-2.0 * r.ln()).sqrt().to_degrees()
    }
}

/// Generates the multipath channel of one link.
///
/// `params` fixes scenario, condition and frequency; `path_loss` is the
/// link's large-scale loss that sets the received power. All draws come
/// from `rng`.
pub fn generate_realization(
    params: &ScenarioParams,
    geom: &LinkGeometry,
    carrier: &CarrierConfig,
    path_loss: &PathLossBreakdown,
    cfg: &SmallScaleConfig,
    rng: &mut RngStream,
) -> Result<ChannelRealization> {
    if (params.frequency_ghz - carrier.frequency_ghz()).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "parameters resolved at {} GHz used for a {} GHz carrier",
            params.frequency_ghz,
            carrier.frequency_ghz()
        )));
    }
    let received_mw = received_power_mw(cfg.tx_power_dbm, path_loss.total);
    if !(received_mw > 0.0 && received_mw.is_finite()) {
        return Err(Error::invalid(format!("received power {received_mw} mW is not usable")));
    }
    let baseband = cfg.baseband_bandwidth(carrier);

    let num_clusters = gen_num_time_clusters(params, rng)? as usize;
    let aoa_lobes = gen_spatial_lobes(params, LobeKind::Arrival, rng)?;
    let aod_lobes = gen_spatial_lobes(params, LobeKind::Departure, rng)?;
    let subpath_counts: Vec<usize> = (0..num_clusters)
        .map(|_| gen_num_subpaths(params, rng).map(|m| m as usize))
        .collect::<Result<_>>()?;
    let intra: Vec<Vec<f64>> = subpath_counts
        .iter()
        .map(|&m| gen_intra_cluster_delays(params, baseband, m, rng).map(|d| d.delays_ns))
        .collect::<Result<_>>()?;
    let phases: Vec<Vec<[f64; 4]>> = subpath_counts
        .iter()
        .map(|&m| (0..m).map(|_| gen_subpath_phases(rng)).collect())
        .collect();
    let last_intra: Vec<f64> = intra.iter().map(|d| d.last().copied().unwrap_or(0.0)).collect();
    let cluster_delays = gen_cluster_delays(params, &last_intra, cfg.inh_lognormal_sigma, rng)?;
    let (cluster_powers, _) = gen_cluster_powers(params, &cluster_delays, received_mw, rng)?;

    let mut clusters = Vec::with_capacity(num_clusters);
    for n in 0..num_clusters {
        let (powers, _) = gen_subpath_powers(params, &intra[n], cluster_powers[n], rng)?;
        let subpaths = (0..subpath_counts[n])
            .map(|m| Subpath {
                cluster: n,
                index: m,
                intra_delay_ns: intra[n][m],
                delay_ns: 0.0,
                power_mw: powers[m],
                member_power_mw: powers[m],
                merged_count: 1,
                phases: phases[n][m],
                departure: Direction::new(0.0, 90.0),
                arrival: Direction::new(0.0, 90.0),
                aod_lobe: 0,
                aoa_lobe: 0,
                xpd_db: [0.0; 3],
                doppler_hz: 0.0,
            })
            .collect();
        clusters.push(TimeCluster {
            index: n,
            delay_ns: cluster_delays[n],
            power_mw: cluster_powers[n],
            subpaths,
        });
    }

    for cluster in &mut clusters {
        absolute_propagation_times(geom, &mut cluster.subpaths, &cluster_delays);
    }
    for sp in clusters.iter_mut().flat_map(|c| c.subpaths.iter_mut()) {
        let angles = assign_subpath_angles(params, &aod_lobes, &aoa_lobes, rng)?;
        sp.aod_lobe = angles.aod_lobe;
        sp.aoa_lobe = angles.aoa_lobe;
        sp.departure = nyu_to_gcs(angles.departure);
        sp.arrival = nyu_to_gcs(angles.arrival);
    }

    let all: Vec<Subpath> = clusters.iter().flat_map(|c| c.subpaths.iter().cloned()).collect();
    let mut resolvable = bandwidth_adjust(&all, carrier.rf_bandwidth_hz());
    align_los(&mut resolvable, geom, params.condition);
    let threshold = cfg.pruning_threshold_db(path_loss.mean_path_loss_db());
    let mut resolvable = prune_dynamic_range(&resolvable, threshold, params.condition.is_los());
    gen_xpd(&mut resolvable, &cfg.xpd, rng);

    let wavelength = carrier.wavelength_m();
    for sp in clusters
        .iter_mut()
        .flat_map(|c| c.subpaths.iter_mut())
        .chain(resolvable.iter_mut())
    {
        sp.doppler_hz = doppler_shift(&geom.ue_velocity, sp.arrival, wavelength);
    }

    Ok(ChannelRealization {
        scenario: params.scenario,
        condition: params.condition,
        carrier: *carrier,
        geometry: *geom,
        clusters,
        aod_lobes,
        aoa_lobes,
        subpaths: resolvable,
        received_power_mw: received_mw,
        tx_power_dbm: cfg.tx_power_dbm,
        pruning_threshold_db: threshold,
    })
}

#[cfg(test)]
mod tests;
