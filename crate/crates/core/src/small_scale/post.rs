//! Post-processing of generated subpaths: absolute delays, bandwidth
//! merging, LOS alignment, dynamic range pruning and XPD.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::geometry::{wrap_degrees, LinkGeometry};
use crate::rng::RngStream;
use crate::types::{ChannelCondition, SPEED_OF_LIGHT};

use super::coords::{gcs_to_nyu, nyu_to_gcs, NyuAngles};
use super::Subpath;

/// Line-of-sight propagation delay (ns) over the 3D link distance.
pub fn propagation_delay_ns(geom: &LinkGeometry) -> f64 {
    geom.d3d / SPEED_OF_LIGHT * 1e9
}

/// Sets absolute delays: `d3D / c + tau_n + rho_{m,n}`.
pub fn absolute_propagation_times(geom: &LinkGeometry, subpaths: &mut [Subpath], cluster_delays_ns: &[f64]) {
    let base = propagation_delay_ns(geom);
    for sp in subpaths {
        sp.delay_ns = base + cluster_delays_ns[sp.cluster] + sp.intra_delay_ns;
    }
}

/// Combines subpaths that fall into the same delay bin of width
/// `1 / rf_bandwidth`, with bins anchored at the earliest subpath. Members
/// add as complex amplitudes on the co-polar phase. The merged subpath
/// keeps the angles, XPD and cross-polar phases of its strongest member,
/// its co-polar phase is the phase of the sum and its delay is the
/// power-weighted mean of the members. Input must be sorted by delay.
pub fn bandwidth_adjust(subpaths: &[Subpath], rf_bandwidth_hz: f64) -> Vec<Subpath> {
    let bin_ns = 1e9 / rf_bandwidth_hz;
    if subpaths.is_empty() || !(bin_ns > 0.0 && bin_ns.is_finite()) {
        return subpaths.to_vec();
    }
    let origin = subpaths[0].delay_ns;
    let bin_of = |sp: &Subpath| ((sp.delay_ns - origin) / bin_ns).floor() as i64;

    let mut merged = Vec::new();
    let mut start = 0;
    while start < subpaths.len() {
        let bin = bin_of(&subpaths[start]);
        let mut end = start + 1;
        while end < subpaths.len() && bin_of(&subpaths[end]) == bin {
            end += 1;
        }
        merged.push(merge_group(&subpaths[start..end]));
        start = end;
    }
    merged
}

fn merge_group(group: &[Subpath]) -> Subpath {
    if group.len() == 1 {
        return group[0].clone();
    }
    let strongest = group
        .iter()
        .max_by(|a, b| a.power_mw.total_cmp(&b.power_mw))
        .expect("non-empty group");
    let sum: Complex64 = group
        .iter()
        .map(|sp| Complex64::from_polar(sp.power_mw.sqrt(), sp.phases[0]))
        .sum();
    let member_power: f64 = group.iter().map(|sp| sp.member_power_mw).sum();
    let weight: f64 = group.iter().map(|sp| sp.power_mw).sum();
    let delay = if weight > 0.0 {
        group.iter().map(|sp| sp.power_mw * sp.delay_ns).sum::<f64>() / weight
    } else {
        group.iter().map(|sp| sp.delay_ns).sum::<f64>() / group.len() as f64
    };
    let mut out = strongest.clone();
    out.power_mw = sum.norm_sqr();
    out.member_power_mw = member_power;
    out.delay_ns = delay;
    out.phases[0] = sum.arg().rem_euclid(TAU) % TAU;
    out.merged_count = group.iter().map(|sp| sp.merged_count).sum();
    out
}

/// Rotates all subpaths so that the first one points along the geometric
/// Tx-Rx line: departure along the bearing and elevation of the Rx as seen
/// from the Tx, arrival along the reciprocal direction. The same azimuth and
/// elevation shifts are applied to every other subpath. Does nothing in
/// NLOS.
pub fn align_los(subpaths: &mut [Subpath], geom: &LinkGeometry, condition: ChannelCondition) {
    if !condition.is_los() {
        return;
    }
    let Some(first) = subpaths.first() else {
        return;
    };
    let target_dep = NyuAngles::new(geom.bearing_deg, geom.elevation_deg);
    let target_arr = NyuAngles::new(wrap_degrees(geom.bearing_deg + 180.0), -geom.elevation_deg);
    let dep = gcs_to_nyu(first.departure);
    let arr = gcs_to_nyu(first.arrival);
    let shift_dep = (target_dep.azimuth_deg - dep.azimuth_deg, target_dep.elevation_deg - dep.elevation_deg);
    let shift_arr = (target_arr.azimuth_deg - arr.azimuth_deg, target_arr.elevation_deg - arr.elevation_deg);

    for (i, sp) in subpaths.iter_mut().enumerate() {
        if i == 0 {
            sp.departure = nyu_to_gcs(target_dep);
            sp.arrival = nyu_to_gcs(target_arr);
        } else {
            sp.departure = nyu_to_gcs(shift(gcs_to_nyu(sp.departure), shift_dep));
            sp.arrival = nyu_to_gcs(shift(gcs_to_nyu(sp.arrival), shift_arr));
        }
    }
}

fn shift(a: NyuAngles, (d_az, d_el): (f64, f64)) -> NyuAngles {
    NyuAngles::new(
        wrap_degrees(a.azimuth_deg + d_az),
        (a.elevation_deg + d_el).clamp(-90.0, 90.0),
    )
}

/// Keeps subpaths within `threshold_db` of the strongest one. The strongest
/// subpath is always kept, and so is the first one when `keep_first` is set
/// (used for the aligned LOS path).
pub fn prune_dynamic_range(subpaths: &[Subpath], threshold_db: f64, keep_first: bool) -> Vec<Subpath> {
    let Some((strongest, max_power)) = subpaths
        .iter()
        .enumerate()
        .map(|(i, sp)| (i, sp.power_mw))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    else {
        return Vec::new();
    };
    let floor = max_power * 10f64.powf(-threshold_db / 10.0);
    subpaths
        .iter()
        .enumerate()
        .filter(|(i, sp)| *i == strongest || (keep_first && *i == 0) || sp.power_mw >= floor)
        .map(|(_, sp)| sp.clone())
        .collect()
}

/// Cross-polarization discrimination draw parameters (dB).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XpdConfig {
    pub mean_db: f64,
    pub std_db: f64,
}

impl Default for XpdConfig {
    fn default() -> Self {
        Self {
            mean_db: 16.7,
            std_db: 5.0,
        }
    }
}

/// Draws the theta-phi, phi-theta and phi-phi XPD values (dB) of every
/// subpath.
pub fn gen_xpd(subpaths: &mut [Subpath], cfg: &XpdConfig, rng: &mut RngStream) {
    for sp in subpaths {
        sp.xpd_db = std::array::from_fn(|_| rng.normal(cfg.mean_db, cfg.std_db));
    }
}
