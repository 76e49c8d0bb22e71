//! Samplers for the individual generation steps: counts, delays, powers,
//! phases, lobes and subpath angles.

use std::f64::consts::{LN_10, TAU};

use crate::error::{Error, Result};
use crate::geometry::wrap_degrees;
use crate::params::{ClusterDelayModel, CountModel, IntraDelayModel, LobeKind, ScenarioParams, SubpathCountModel};
use crate::rng::RngStream;

use super::coords::NyuAngles;

/// Subpath elevations are limited to this magnitude before conversion.
pub const ELEVATION_LIMIT_DEG: f64 = 60.0;

pub fn draw_count(model: CountModel, rng: &mut RngStream) -> u32 {
    match model {
        CountModel::DiscreteUniform { max } => rng.discrete_uniform(1, max.max(1)),
        CountModel::PoissonPlusOne { rate } => rng.poisson(rate) + 1,
    }
}

/// `ceil(Exp(mean))`, at least 1.
pub fn draw_discrete_exponential(mean: f64, rng: &mut RngStream) -> u32 {
    let x = rng.exponential(mean).ceil();
    if x < 1.0 {
        1
    } else if x > u32::MAX as f64 {
        u32::MAX
    } else {
        x as u32
    }
}

pub fn draw_subpath_count(model: SubpathCountModel, rng: &mut RngStream) -> u32 {
    match model {
        SubpathCountModel::DiscreteUniform { max } => rng.discrete_uniform(1, max.max(1)),
        SubpathCountModel::DiscreteExponential { mean } => draw_discrete_exponential(mean, rng),
        SubpathCountModel::Mixture { beta, mean } => {
            if rng.uniform() < beta {
                draw_discrete_exponential(mean, rng)
            } else {
                1
            }
        }
    }
}

/// One inter-cluster gap `delta tau` (ns), excluding the MTI.
pub fn draw_cluster_gap(model: ClusterDelayModel, rng: &mut RngStream) -> f64 {
    match model {
        ClusterDelayModel::Exponential { mean_ns } => rng.exponential(mean_ns),
        ClusterDelayModel::Gamma { shape, scale_ns } => rng.gamma(shape, scale_ns),
        ClusterDelayModel::LogNormal { mean_ns, log_sigma } => {
            // choose mu so that the linear mean equals mean_ns
            let mu = mean_ns.max(f64::MIN_POSITIVE).ln() - 0.5 * log_sigma * log_sigma;
            rng.normal(mu, log_sigma).exp()
        }
    }
}

/// Raw intra-cluster delays of one cluster before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct IntraDelays {
    /// Sorted excess delays (ns) with the first one at zero.
    pub delays_ns: Vec<f64>,
    /// Unsorted draws as produced by the distribution (ns). For the
    /// power-law family these equal `delays_ns`.
    pub raw_ns: Vec<f64>,
    /// Per-cluster exponent `X_n` of the power-law family.
    pub exponent: Option<f64>,
}

/// `((m - 1) / B_bb)^(1 + x)` in ns for `m = 1..=count`.
pub fn power_law_delays(count: usize, baseband_bandwidth_hz: f64, exponent: f64) -> Vec<f64> {
    let step_ns = 1e9 / baseband_bandwidth_hz;
    (0..count)
        .map(|k| (step_ns * k as f64).powf(1.0 + exponent))
        .collect()
}

pub fn draw_intra_delays(
    model: IntraDelayModel,
    count: usize,
    baseband_bandwidth_hz: f64,
    rng: &mut RngStream,
) -> IntraDelays {
    let (raw, exponent) = match model {
        IntraDelayModel::PowerLaw { exponent_max } => {
            let x = rng.uniform_range(0.0, exponent_max);
            (power_law_delays(count, baseband_bandwidth_hz, x), Some(x))
        }
        IntraDelayModel::Exponential { mean_ns } => {
            ((0..count).map(|_| rng.exponential(mean_ns)).collect(), None)
        }
        IntraDelayModel::Gamma { shape, scale_ns } => {
            ((0..count).map(|_| rng.gamma(shape, scale_ns)).collect(), None)
        }
    };
    let mut delays = raw.clone();
    delays.sort_by(f64::total_cmp);
    if let Some(&first) = delays.first() {
        for d in &mut delays {
            *d -= first;
        }
    }
    IntraDelays {
        delays_ns: delays,
        raw_ns: raw,
        exponent,
    }
}

pub fn gen_num_time_clusters(params: &ScenarioParams, rng: &mut RngStream) -> Result<u32> {
    Ok(draw_count(params.cluster_count_model()?, rng))
}

pub fn gen_num_subpaths(params: &ScenarioParams, rng: &mut RngStream) -> Result<u32> {
    Ok(draw_subpath_count(params.subpath_count_model()?, rng))
}

pub fn gen_intra_cluster_delays(
    params: &ScenarioParams,
    baseband_bandwidth_hz: f64,
    count: usize,
    rng: &mut RngStream,
) -> Result<IntraDelays> {
    if !(baseband_bandwidth_hz > 0.0) {
        return Err(Error::invalid("baseband bandwidth must be positive"));
    }
    Ok(draw_intra_delays(params.intra_delay_model()?, count, baseband_bandwidth_hz, rng))
}

/// Cluster excess delays (ns) from the recursion
/// `tau_n = tau_{n-1} + rho_last_{n-1} + delta_n + MTI` with `tau_0 = 0`.
/// `last_intra` holds the last intra-cluster delay of every cluster.
pub fn gen_cluster_delays(
    params: &ScenarioParams,
    last_intra: &[f64],
    inh_lognormal_sigma: Option<f64>,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let model = params.cluster_delay_model(inh_lognormal_sigma)?;
    let mut delays = Vec::with_capacity(last_intra.len());
    let mut end_of_previous = 0.0;
    for &rho_last in last_intra {
        let tau = end_of_previous + draw_cluster_gap(model, rng) + params.mti_ns;
        delays.push(tau);
        end_of_previous = tau + rho_last;
    }
    Ok(delays)
}

/// Exponentially decaying powers with lognormal spread, normalized to
/// `total_mw`. Returns the powers and the dB spread draws.
fn decaying_powers(
    delays_ns: &[f64],
    decay_ns: f64,
    shadow_db: f64,
    total_mw: f64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(decay_ns > 0.0) {
        return Err(Error::invalid(format!("power decay constant must be positive, got {decay_ns}")));
    }
    let spread: Vec<f64> = delays_ns.iter().map(|_| rng.normal(0.0, shadow_db)).collect();
    // log domain keeps long delays from underflowing before normalization
    let log_p: Vec<f64> = delays_ns
        .iter()
        .zip(&spread)
        .map(|(tau, z)| -tau / decay_ns + z * LN_10 / 10.0)
        .collect();
    let peak = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let linear: Vec<f64> = log_p.iter().map(|l| (l - peak).exp()).collect();
    let sum: f64 = linear.iter().sum();
    Ok((linear.into_iter().map(|p| p / sum * total_mw).collect(), spread))
}

/// Cluster powers (mW) summing to `received_mw`, with the `Z_n` draws (dB).
pub fn gen_cluster_powers(
    params: &ScenarioParams,
    cluster_delays_ns: &[f64],
    received_mw: f64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (decay, sigma) = params.cluster_power()?;
    decaying_powers(cluster_delays_ns, decay, sigma, received_mw, rng)
}

/// Subpath powers (mW) of one cluster summing to `cluster_mw`, with the
/// `U_{m,n}` draws (dB).
pub fn gen_subpath_powers(
    params: &ScenarioParams,
    intra_delays_ns: &[f64],
    cluster_mw: f64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (decay, sigma) = params.subpath_power()?;
    decaying_powers(intra_delays_ns, decay, sigma, cluster_mw, rng)
}

/// Phases (rad) for the theta-theta, theta-phi, phi-theta and phi-phi
/// polarization pairs.
pub fn gen_subpath_phases(rng: &mut RngStream) -> [f64; 4] {
    std::array::from_fn(|_| rng.uniform_range(0.0, TAU))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialLobe {
    pub kind: LobeKind,
    /// Zero-based lobe index.
    pub index: usize,
    /// Mean lobe direction in the measurement convention.
    pub mean: NyuAngles,
}

pub fn gen_spatial_lobes(params: &ScenarioParams, kind: LobeKind, rng: &mut RngStream) -> Result<Vec<SpatialLobe>> {
    let count = draw_count(params.lobe_count_model(kind)?, rng) as usize;
    let (el_mean, el_std) = params.lobe_elevation(kind)?;
    let sector = 360.0 / count as f64;
    Ok((0..count)
        .map(|i| {
            let lo = sector * i as f64;
            let azimuth = rng.uniform_range(lo, lo + sector);
            let elevation = rng.normal(el_mean, el_std);
            SpatialLobe {
                kind,
                index: i,
                mean: NyuAngles::new(azimuth, elevation),
            }
        })
        .collect())
}

/// Lobe assignment and measurement-convention angles of one subpath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubpathAngles {
    pub aod_lobe: usize,
    pub aoa_lobe: usize,
    pub departure: NyuAngles,
    pub arrival: NyuAngles,
}

/// Maps a subpath to one departure and one arrival lobe, chosen uniformly
/// and independently, and offsets it from the lobe means.
pub fn assign_subpath_angles(
    params: &ScenarioParams,
    aod_lobes: &[SpatialLobe],
    aoa_lobes: &[SpatialLobe],
    rng: &mut RngStream,
) -> Result<SubpathAngles> {
    if aod_lobes.is_empty() || aoa_lobes.is_empty() {
        return Err(Error::invalid("at least one lobe per side is required"));
    }
    let aod_lobe = rng.index(aod_lobes.len());
    let aoa_lobe = rng.index(aoa_lobes.len());
    let departure = offset_angles(aod_lobes[aod_lobe].mean, params.angular_offsets(LobeKind::Departure)?, rng);
    let arrival = offset_angles(aoa_lobes[aoa_lobe].mean, params.angular_offsets(LobeKind::Arrival)?, rng);
    Ok(SubpathAngles {
        aod_lobe,
        aoa_lobe,
        departure,
        arrival,
    })
}

fn offset_angles(mean: NyuAngles, (az_std, el_std): (f64, f64), rng: &mut RngStream) -> NyuAngles {
    let azimuth = wrap_degrees(rng.normal(mean.azimuth_deg, az_std));
    let elevation = rng
        .normal(mean.elevation_deg, el_std)
        .clamp(-ELEVATION_LIMIT_DEG, ELEVATION_LIMIT_DEG);
    NyuAngles::new(azimuth, elevation)
}
