//! Monte Carlo drop harness: layout, per-link channel evaluation and the
//! tabular results written by the command line tool.

mod config;
mod output;
mod report;

pub use config::{
    default_bs_height, AntennaSettings, AttenuationSettings, ConditionMode, DropConfig, OutputSettings,
    Placement, PsdSettings,
};
pub use output::{write_csv, write_csv_file};
pub use report::{
    bin_edges, distribution_report, mean_pathloss_report, DistributionReport, DistributionRow, PathLossBin,
    MIN_VALIDATION_DRAWS,
};

use nalgebra::Vector3;
use serde::Serialize;

use crate::antenna::AntennaArray;
use crate::condition::{draw_condition, los_probability, LosModelParams};
use crate::error::{Error, Result};
use crate::exec::map_ordered;
use crate::geometry::LinkGeometry;
use crate::large_scale::{total_path_loss, AtmosphereTable, AttenuationConfig, PathLossBreakdown, ShadowingState};
use crate::mimo::{beamforming_gain, build_channel_matrix, SpectralDensity};
use crate::params::{LobeKind, ParamTable};
use crate::rng::{RngStream, StreamId, StreamPurpose};
use crate::small_scale::{generate_realization, ChannelRealization, Subpath};
use crate::types::{CarrierConfig, ChannelCondition, Scenario};

/// Everything resolved from a [`DropConfig`] once, before any drop runs.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub config: DropConfig,
    pub table: ParamTable,
    pub carrier: CarrierConfig,
    pub attenuation: AttenuationConfig,
    pub los_params: LosModelParams,
    pub tx_array: AntennaArray,
    pub rx_array: AntennaArray,
    pub tx_psd: SpectralDensity,
}

impl SimContext {
    /// Validates the configuration and loads any referenced data files.
    pub fn new(config: DropConfig) -> Result<Self> {
        config.validate()?;
        let table = match &config.param_file {
            Some(path) => ParamTable::from_path(path)?,
            None => ParamTable::builtin().clone(),
        };
        let atmosphere = match &config.attenuation.atmosphere_file {
            Some(path) => AtmosphereTable::from_path(path)?,
            None => AtmosphereTable::builtin().clone(),
        };
        let a = &config.attenuation;
        let attenuation = AttenuationConfig {
            o2i: a.o2i,
            foliage_loss_db_per_m: a.foliage_loss_db_per_m,
            foliage_depth_m: a.foliage_depth_m,
            atmospheric: a.atmospheric,
            atmosphere,
            shadowing: a.shadowing,
        };
        if attenuation.atmospheric && !attenuation.atmosphere.covers(config.frequency_ghz) {
            return Err(Error::Config(format!(
                "atmosphere table does not cover {} GHz",
                config.frequency_ghz
            )));
        }
        let carrier = CarrierConfig::new(config.frequency_ghz, config.rf_bandwidth_hz)?;
        let los_params = LosModelParams::new(table.los_constants(), config.ue_height_m);
        let tx_array = AntennaArray::new(config.antenna.tx, carrier.wavelength_m())?;
        let rx_array = AntennaArray::new(config.antenna.rx, carrier.wavelength_m())?;
        let tx_power_w = 10f64.powf((config.small_scale.tx_power_dbm - 30.0) / 10.0);
        let tx_psd = SpectralDensity::flat(tx_power_w, carrier.rf_bandwidth_hz(), config.psd.subbands)?;
        Ok(Self {
            config,
            table,
            carrier,
            attenuation,
            los_params,
            tx_array,
            rx_array,
            tx_psd,
        })
    }

    fn bs_position(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.config.bs_height())
    }

    /// UE position and 2D distance of one link. Azimuths follow the model
    /// convention (clockwise from +y).
    fn place_ue(&self, drop: u32, link: u16, rng: &mut RngStream) -> (Vector3<f64>, f64) {
        let cfg = &self.config;
        let radius = match &cfg.placement {
            Placement::Annulus {
                min_distance_m,
                max_distance_m,
            } => rng
                .uniform_range(min_distance_m.powi(2), max_distance_m.powi(2))
                .sqrt()
                .clamp(*min_distance_m, *max_distance_m),
            Placement::Sweep { distances_m } => {
                let i = drop as usize * cfg.links_per_drop as usize + link as usize;
                distances_m[i % distances_m.len()]
            }
        };
        let azimuth = rng.uniform_range(0.0, 360.0).to_radians();
        let ue = Vector3::new(radius * azimuth.sin(), radius * azimuth.cos(), cfg.ue_height_m);
        (ue, radius)
    }
}

/// One row of a path loss sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub condition: ChannelCondition,
    pub frequency_ghz: f64,
    pub bs_height_m: f64,
    pub d2d_m: f64,
    pub d3d_m: f64,
    pub los_probability: f64,
    pub fspl_1m_db: f64,
    pub distance_term_db: f64,
    pub atmospheric_db: f64,
    pub o2i_db: f64,
    pub foliage_db: f64,
    pub shadowing_db: f64,
    pub mean_path_loss_db: f64,
    pub total_path_loss_db: f64,
}

/// Grid of a path loss sweep. Empty lists fall back to the configured
/// scenario, frequency and both conditions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSpec {
    pub scenarios: Vec<Scenario>,
    pub frequencies_ghz: Vec<f64>,
    pub conditions: Vec<ChannelCondition>,
    pub distances_m: Vec<f64>,
}

/// Large-scale loss along a distance grid, with the UE on the +y axis.
/// Each point draws from its own stream, so rows do not depend on the grid
/// around them.
pub fn run_sweep(ctx: &SimContext, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let cfg = &ctx.config;
    let scenarios = if spec.scenarios.is_empty() { vec![cfg.scenario] } else { spec.scenarios.clone() };
    let frequencies = if spec.frequencies_ghz.is_empty() { vec![cfg.frequency_ghz] } else { spec.frequencies_ghz.clone() };
    let conditions = if spec.conditions.is_empty() {
        match cfg.condition.forced() {
            Some(c) => vec![c],
            None => ChannelCondition::ALL.to_vec(),
        }
    } else {
        spec.conditions.clone()
    };
    let distances = if !spec.distances_m.is_empty() {
        spec.distances_m.clone()
    } else {
        match &cfg.placement {
            Placement::Sweep { distances_m } => distances_m.clone(),
            Placement::Annulus {
                min_distance_m,
                max_distance_m,
            } => match Placement::log_sweep(*min_distance_m, *max_distance_m, 50) {
                Placement::Sweep { distances_m } => distances_m,
                Placement::Annulus { .. } => unreachable!(),
            },
        }
    };
    if let Some(d) = distances.iter().find(|d| !(**d >= 1.0 && d.is_finite())) {
        return Err(Error::Config(format!("sweep distances must be at least 1 m, got {d}")));
    }

    let mut rows = Vec::new();
    let mut point = 0u32;
    for &scenario in &scenarios {
        let h_bs = cfg.bs_height_m.unwrap_or_else(|| default_bs_height(scenario));
        for &f in &frequencies {
            for &condition in &conditions {
                let params = ctx.table.params_for(scenario, condition, f)?;
                for &d in &distances {
                    let geom = LinkGeometry::new(
                        Vector3::new(0.0, 0.0, h_bs),
                        Vector3::new(0.0, d, cfg.ue_height_m),
                        Vector3::zeros(),
                    )?;
                    let p_los = los_probability(scenario, &geom, &ctx.los_params)?;
                    let mut rng = RngStream::new(cfg.seed, StreamId::new(point, 0, StreamPurpose::LargeScale));
                    let mut shadow = ShadowingState::for_params(&params)?;
                    let pl = total_path_loss(&params, &geom, &ctx.attenuation, &mut shadow, &mut rng)?;
                    rows.push(sweep_row(scenario, condition, f, h_bs, &geom, p_los, &pl));
                    point += 1;
                }
            }
        }
    }
    Ok(rows)
}

fn sweep_row(
    scenario: Scenario,
    condition: ChannelCondition,
    frequency_ghz: f64,
    bs_height_m: f64,
    geom: &LinkGeometry,
    los_probability: f64,
    pl: &PathLossBreakdown,
) -> SweepRow {
    SweepRow {
        scenario,
        condition,
        frequency_ghz,
        bs_height_m,
        d2d_m: geom.d2d,
        d3d_m: geom.d3d,
        los_probability,
        fspl_1m_db: pl.fspl_1m,
        distance_term_db: pl.distance_term,
        atmospheric_db: pl.atmospheric,
        o2i_db: pl.o2i,
        foliage_db: pl.foliage,
        shadowing_db: pl.shadowing,
        mean_path_loss_db: pl.mean_path_loss_db(),
        total_path_loss_db: pl.total,
    }
}

/// Per-link summary of one drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropResult {
    pub drop: u32,
    pub link: u16,
    pub scenario: Scenario,
    pub condition: ChannelCondition,
    pub los_probability: f64,
    pub d2d_m: f64,
    pub d3d_m: f64,
    pub fspl_1m_db: f64,
    pub distance_term_db: f64,
    pub atmospheric_db: f64,
    pub o2i_db: f64,
    pub foliage_db: f64,
    pub shadowing_db: f64,
    pub mean_path_loss_db: f64,
    pub total_path_loss_db: f64,
    pub received_power_dbm: f64,
    pub clusters: usize,
    pub generated_subpaths: usize,
    pub resolvable_subpaths: usize,
    pub rms_delay_spread_ns: f64,
    pub rms_aod_spread_deg: f64,
    pub rms_aoa_spread_deg: f64,
    /// Matched beamforming gain towards the strongest subpath at the first
    /// PSD sample time.
    pub beamforming_gain_db: f64,
}

/// One resolvable subpath of a drop, for the realization dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubpathRecord {
    pub drop: u32,
    pub link: u16,
    pub cluster: usize,
    pub subpath: usize,
    pub merged_count: usize,
    pub delay_ns: f64,
    pub power_dbm: f64,
    pub phase_vv_rad: f64,
    pub phase_vh_rad: f64,
    pub phase_hv_rad: f64,
    pub phase_hh_rad: f64,
    pub aod_deg: f64,
    pub zod_deg: f64,
    pub aoa_deg: f64,
    pub zoa_deg: f64,
    pub xpd_vh_db: f64,
    pub xpd_hv_db: f64,
    pub xpd_hh_db: f64,
    pub doppler_hz: f64,
}

/// Received PSD of one subband at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdRecord {
    pub drop: u32,
    pub link: u16,
    pub time_s: f64,
    pub subband: usize,
    pub offset_hz: f64,
    pub tx_psd_w_per_hz: f64,
    pub rx_psd_w_per_hz: f64,
}

/// Which per-link detail tables to keep besides [`DropResult`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Capture {
    pub subpaths: bool,
    pub psd: bool,
}

impl Capture {
    /// Keeps the tables the configuration asks to write.
    pub fn from_outputs(out: &OutputSettings) -> Self {
        Self {
            subpaths: out.dump.is_some(),
            psd: out.psd.is_some(),
        }
    }
}

/// Output of [`run_drops`], ordered by drop and link.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DropRun {
    pub results: Vec<DropResult>,
    pub subpaths: Vec<SubpathRecord>,
    pub psd: Vec<PsdRecord>,
}

/// Evaluation of one link, before flattening.
#[derive(Debug, Clone)]
pub struct LinkEvaluation {
    pub drop: u32,
    pub link: u16,
    pub geometry: LinkGeometry,
    pub los_probability: f64,
    pub path_loss: PathLossBreakdown,
    pub realization: ChannelRealization,
    pub beamforming_gain_db: f64,
    /// Received PSD per sample time.
    pub rx_psd: Vec<SpectralDensity>,
}

/// Evaluates link `link` of drop `drop`: placement, condition, large-scale
/// loss, realization, channel matrix and received PSD. Shadowing is drawn
/// once per drop and held fixed over the PSD sample times.
pub fn evaluate_link(ctx: &SimContext, drop: u32, link: u16) -> Result<LinkEvaluation> {
    let cfg = &ctx.config;
    let stream = |purpose| RngStream::new(cfg.seed, StreamId::new(drop, link, purpose));

    let (ue, radius) = ctx.place_ue(drop, link, &mut stream(StreamPurpose::Layout));
    let velocity = Vector3::from(cfg.ue_velocity_mps);
    let mut geometry = LinkGeometry::new(ctx.bs_position(), ue, velocity)?;
    // sin/cos rounding can put a UE placed at exactly 1 m just below the
    // reference distance
    geometry.d2d = radius;
    geometry.d3d = radius.hypot(ue.z - ctx.bs_position().z);

    let los_probability = los_probability(cfg.scenario, &geometry, &ctx.los_params)?;
    let condition = match cfg.condition.forced() {
        Some(c) => c,
        None => draw_condition(los_probability, &mut stream(StreamPurpose::Condition)),
    };

    let params = ctx.table.params_for(cfg.scenario, condition, cfg.frequency_ghz)?;
    let mut shadow = ShadowingState::for_params(&params)?;
    let path_loss = total_path_loss(
        &params,
        &geometry,
        &ctx.attenuation,
        &mut shadow,
        &mut stream(StreamPurpose::LargeScale),
    )?;
    let realization = generate_realization(
        &params,
        &geometry,
        &ctx.carrier,
        &path_loss,
        &cfg.small_scale,
        &mut stream(StreamPurpose::SmallScale),
    )?;

    let matrix = build_channel_matrix(&realization, &ctx.tx_array, &ctx.rx_array)?;
    let strongest = strongest_subpath(&realization.subpaths)
        .ok_or_else(|| Error::invalid("realization without resolvable subpaths"))?;
    let mut rx_psd = Vec::with_capacity(cfg.psd.sample_times_s.len());
    let mut beamforming_gain_db = f64::NAN;
    for (i, &t) in cfg.psd.sample_times_s.iter().enumerate() {
        let (gain, psd) = beamforming_gain(
            &matrix,
            &ctx.tx_array,
            &ctx.rx_array,
            strongest.departure,
            strongest.arrival,
            &ctx.tx_psd,
            t,
        )?;
        if i == 0 {
            beamforming_gain_db = gain;
        }
        rx_psd.push(psd);
    }

    Ok(LinkEvaluation {
        drop,
        link,
        geometry,
        los_probability,
        path_loss,
        realization,
        beamforming_gain_db,
        rx_psd,
    })
}

fn strongest_subpath(subpaths: &[Subpath]) -> Option<&Subpath> {
    subpaths.iter().max_by(|a, b| a.power_mw.total_cmp(&b.power_mw))
}

impl LinkEvaluation {
    pub fn summary(&self) -> DropResult {
        let r = &self.realization;
        let pl = &self.path_loss;
        DropResult {
            drop: self.drop,
            link: self.link,
            scenario: r.scenario,
            condition: r.condition,
            los_probability: self.los_probability,
            d2d_m: self.geometry.d2d,
            d3d_m: self.geometry.d3d,
            fspl_1m_db: pl.fspl_1m,
            distance_term_db: pl.distance_term,
            atmospheric_db: pl.atmospheric,
            o2i_db: pl.o2i,
            foliage_db: pl.foliage,
            shadowing_db: pl.shadowing,
            mean_path_loss_db: pl.mean_path_loss_db(),
            total_path_loss_db: pl.total,
            received_power_dbm: 10.0 * r.received_power_mw.log10(),
            clusters: r.clusters.len(),
            generated_subpaths: r.generated_subpath_count(),
            resolvable_subpaths: r.subpaths.len(),
            rms_delay_spread_ns: r.rms_delay_spread_ns(),
            rms_aod_spread_deg: r.rms_azimuth_spread_deg(LobeKind::Departure),
            rms_aoa_spread_deg: r.rms_azimuth_spread_deg(LobeKind::Arrival),
            beamforming_gain_db: self.beamforming_gain_db,
        }
    }

    pub fn subpath_records(&self) -> Vec<SubpathRecord> {
        self.realization
            .subpaths
            .iter()
            .map(|sp| SubpathRecord {
                drop: self.drop,
                link: self.link,
                cluster: sp.cluster,
                subpath: sp.index,
                merged_count: sp.merged_count,
                delay_ns: sp.delay_ns,
                power_dbm: sp.power_dbm(),
                phase_vv_rad: sp.phases[0],
                phase_vh_rad: sp.phases[1],
                phase_hv_rad: sp.phases[2],
                phase_hh_rad: sp.phases[3],
                aod_deg: sp.departure.azimuth_deg,
                zod_deg: sp.departure.zenith_deg,
                aoa_deg: sp.arrival.azimuth_deg,
                zoa_deg: sp.arrival.zenith_deg,
                xpd_vh_db: sp.xpd_db[0],
                xpd_hv_db: sp.xpd_db[1],
                xpd_hh_db: sp.xpd_db[2],
                doppler_hz: sp.doppler_hz,
            })
            .collect()
    }

    pub fn psd_records(&self, times_s: &[f64], tx_psd: &SpectralDensity) -> Vec<PsdRecord> {
        let mut out = Vec::with_capacity(times_s.len() * tx_psd.len());
        for (&t, psd) in times_s.iter().zip(&self.rx_psd) {
            for (k, (&offset, &s_rx)) in psd.offsets_hz.iter().zip(&psd.values).enumerate() {
                out.push(PsdRecord {
                    drop: self.drop,
                    link: self.link,
                    time_s: t,
                    subband: k,
                    offset_hz: offset,
                    tx_psd_w_per_hz: tx_psd.values[k],
                    rx_psd_w_per_hz: s_rx,
                });
            }
        }
        out
    }
}

struct DropOutput {
    results: Vec<DropResult>,
    subpaths: Vec<SubpathRecord>,
    psd: Vec<PsdRecord>,
}

fn run_drop(ctx: &SimContext, drop: u32, capture: Capture) -> Result<DropOutput> {
    let mut out = DropOutput {
        results: Vec::with_capacity(ctx.config.links_per_drop as usize),
        subpaths: Vec::new(),
        psd: Vec::new(),
    };
    for link in 0..ctx.config.links_per_drop {
        let eval = evaluate_link(ctx, drop, link)?;
        out.results.push(eval.summary());
        if capture.subpaths {
            out.subpaths.extend(eval.subpath_records());
        }
        if capture.psd {
            out.psd.extend(eval.psd_records(&ctx.config.psd.sample_times_s, &ctx.tx_psd));
        }
    }
    Ok(out)
}

/// Runs every configured drop. Drops are independent and may run in
/// parallel; the output is ordered by drop and link either way and depends
/// only on the configuration and seed.
pub fn run_drops(ctx: &SimContext, capture: Capture) -> Result<DropRun> {
    let drops: Vec<u32> = (0..ctx.config.drops).collect();
    let outputs = map_ordered(&drops, ctx.config.execution, |&d| run_drop(ctx, d, capture));
    let mut run = DropRun::default();
    for out in outputs {
        let out = out?;
        run.results.extend(out.results);
        run.subpaths.extend(out.subpaths);
        run.psd.extend(out.psd);
    }
    Ok(run)
}
