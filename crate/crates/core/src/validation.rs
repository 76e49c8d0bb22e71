//! Distribution fidelity checks of every generation step against the
//! parameter tables.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Exp, Gamma, LogNormal, Normal, Uniform};

use crate::error::Result;
use crate::exec::{map_ordered, Execution};
use crate::params::{
    ClusterDelayModel, CountModel, IntraDelayModel, LobeKind, ParamTable, ScenarioParams, SubpathCountModel,
};
use crate::rng::{RngStream, StreamId, StreamPurpose};
use crate::small_scale::{
    assign_subpath_angles, draw_cluster_gap, gen_cluster_powers, gen_intra_cluster_delays, gen_num_subpaths,
    gen_num_time_clusters, gen_spatial_lobes, gen_subpath_phases, gen_subpath_powers, NyuAngles, SpatialLobe,
};
use crate::stats::{chi_square_test, degenerate_test, ks_test, pmf, TestOutcome};
use crate::types::{ChannelCondition, Scenario};

/// Baseband bandwidth used for the power-law intra-cluster delays.
const VALIDATION_BASEBAND_HZ: f64 = 400e6;

#[derive(Debug, Clone, Serialize)]
pub struct DistributionCheck {
    /// Generation step number (1-11) of the distribution table.
    pub step: u8,
    pub quantity: &'static str,
    pub scenario: Scenario,
    pub condition: ChannelCondition,
    pub frequency_ghz: f64,
    pub reference: String,
    pub test: &'static str,
    #[serde(flatten)]
    pub outcome: TestOutcome,
}

struct Case<'a> {
    params: &'a ScenarioParams,
    checks: Vec<DistributionCheck>,
}

impl Case<'_> {
    fn push(&mut self, step: u8, quantity: &'static str, reference: String, test: &'static str, outcome: TestOutcome) {
        self.checks.push(DistributionCheck {
            step,
            quantity,
            scenario: self.params.scenario,
            condition: self.params.condition,
            frequency_ghz: self.params.frequency_ghz,
            reference,
            test,
            outcome,
        });
    }

    fn counts(&mut self, step: u8, quantity: &'static str, model: CountModel, samples: &[u32]) {
        let (reference, outcome) = match model {
            CountModel::DiscreteUniform { max } => (
                format!("DU(1,{max})"),
                chi_square_test(samples, |k| pmf::discrete_uniform(max, k)),
            ),
            CountModel::PoissonPlusOne { rate } => (
                format!("Poisson({rate})+1"),
                chi_square_test(samples, |k| pmf::poisson_plus_one(rate, k)),
            ),
        };
        self.push(step, quantity, reference, "chi-square", outcome);
    }

    fn normal(&mut self, step: u8, quantity: &'static str, mean: f64, std: f64, samples: &[f64]) {
        let reference = format!("N({mean},{std})");
        let outcome = match Normal::new(mean, std) {
            Ok(d) if std > 0.0 => ks_test(samples, |x| d.cdf(x)),
            _ => degenerate_test(samples, mean),
        };
        self.push(step, quantity, reference, "KS", outcome);
    }

    fn continuous<D: ContinuousCDF<f64, f64>>(
        &mut self,
        step: u8,
        quantity: &'static str,
        reference: String,
        dist: D,
        samples: &[f64],
    ) {
        self.push(step, quantity, reference, "KS", ks_test(samples, |x| dist.cdf(x)));
    }
}

fn check_case(params: &ScenarioParams, draws: usize, seed: u64, case_id: u32) -> Result<Vec<DistributionCheck>> {
    let mut rng = RngStream::new(seed, StreamId::new(case_id, 0, StreamPurpose::Validation));
    let mut case = Case {
        params,
        checks: Vec::new(),
    };

    // step 1: number of time clusters
    let samples: Vec<u32> = (0..draws)
        .map(|_| gen_num_time_clusters(params, &mut rng))
        .collect::<Result<_>>()?;
    case.counts(1, "time clusters", params.cluster_count_model()?, &samples);

    // step 2: subpaths per cluster
    let samples: Vec<u32> = (0..draws)
        .map(|_| gen_num_subpaths(params, &mut rng))
        .collect::<Result<_>>()?;
    let (reference, outcome) = match params.subpath_count_model()? {
        SubpathCountModel::DiscreteUniform { max } => (
            format!("DU(1,{max})"),
            chi_square_test(&samples, |k| pmf::discrete_uniform(max, k)),
        ),
        SubpathCountModel::DiscreteExponential { mean } => (
            format!("DE({mean})"),
            chi_square_test(&samples, |k| pmf::discrete_exponential(mean, k)),
        ),
        SubpathCountModel::Mixture { beta, mean } => (
            format!("(1-{beta})delta+{beta}DE({mean})"),
            chi_square_test(&samples, |k| pmf::mixture(beta, mean, k)),
        ),
    };
    case.push(2, "cluster subpaths", reference, "chi-square", outcome);

    // step 3: inter-cluster void
    let model = params.cluster_delay_model(None)?;
    let samples: Vec<f64> = (0..draws).map(|_| draw_cluster_gap(model, &mut rng)).collect();
    match model {
        ClusterDelayModel::Exponential { mean_ns } => {
            case.continuous(3, "cluster delay gap", format!("Exp({mean_ns})"), exp(mean_ns), &samples)
        }
        ClusterDelayModel::Gamma { shape, scale_ns } => case.continuous(
            3,
            "cluster delay gap",
            format!("Gamma({shape},{scale_ns})"),
            gamma(shape, scale_ns),
            &samples,
        ),
        ClusterDelayModel::LogNormal { mean_ns, log_sigma } => {
            let mu = mean_ns.ln() - 0.5 * log_sigma * log_sigma;
            let d = LogNormal::new(mu, log_sigma).expect("positive sigma");
            case.continuous(3, "cluster delay gap", format!("Logn({mean_ns},{log_sigma})"), d, &samples)
        }
    }

    // step 4: intra-cluster delays
    match params.intra_delay_model()? {
        IntraDelayModel::PowerLaw { exponent_max } => {
            let samples: Vec<f64> = (0..draws)
                .map(|_| {
                    gen_intra_cluster_delays(params, VALIDATION_BASEBAND_HZ, 2, &mut rng)
                        .map(|d| d.exponent.unwrap_or(f64::NAN))
                })
                .collect::<Result<_>>()?;
            let d = Uniform::new(0.0, exponent_max).expect("positive exponent bound");
            case.continuous(4, "intra-cluster delay exponent", format!("U(0,{exponent_max})"), d, &samples);
        }
        IntraDelayModel::Exponential { mean_ns } => {
            let raw = gen_intra_cluster_delays(params, VALIDATION_BASEBAND_HZ, draws, &mut rng)?.raw_ns;
            case.continuous(4, "intra-cluster delay", format!("Exp({mean_ns})"), exp(mean_ns), &raw);
        }
        IntraDelayModel::Gamma { shape, scale_ns } => {
            let raw = gen_intra_cluster_delays(params, VALIDATION_BASEBAND_HZ, draws, &mut rng)?.raw_ns;
            case.continuous(4, "intra-cluster delay", format!("Gamma({shape},{scale_ns})"), gamma(shape, scale_ns), &raw);
        }
    }

    // steps 5 and 6: lognormal power spread
    let zeros = vec![0.0; draws];
    let (_, z) = gen_cluster_powers(params, &zeros, 1.0, &mut rng)?;
    case.normal(5, "cluster power spread Z", 0.0, params.cluster_power()?.1, &z);
    let (_, u) = gen_subpath_powers(params, &zeros, 1.0, &mut rng)?;
    case.normal(6, "subpath power spread U", 0.0, params.subpath_power()?.1, &u);

    // step 7: phases
    let phases: Vec<f64> = (0..draws.div_ceil(4))
        .flat_map(|_| gen_subpath_phases(&mut rng))
        .take(draws)
        .collect();
    let d = Uniform::new(0.0, std::f64::consts::TAU).expect("valid bounds");
    case.continuous(7, "subpath phase", "U(0,2pi)".into(), d, &phases);

    // steps 8-10: lobes
    for (kind, label) in [(LobeKind::Departure, "AOD"), (LobeKind::Arrival, "AOA")] {
        let mut counts = Vec::with_capacity(draws);
        let mut sector_positions = Vec::with_capacity(draws);
        let mut elevations = Vec::with_capacity(draws);
        for _ in 0..draws {
            let lobes = gen_spatial_lobes(params, kind, &mut rng)?;
            let l = lobes.len() as f64;
            counts.push(lobes.len() as u32);
            for lobe in &lobes {
                let sector = 360.0 / l;
                sector_positions.push((lobe.mean.azimuth_deg - sector * lobe.index as f64) / sector);
                elevations.push(lobe.mean.elevation_deg);
            }
        }
        sector_positions.truncate(draws);
        elevations.truncate(draws);
        let (count_name, az_name, el_name) = match kind {
            LobeKind::Departure => ("AOD lobes", "AOD lobe azimuth in sector", "ZOD lobe elevation"),
            LobeKind::Arrival => ("AOA lobes", "AOA lobe azimuth in sector", "ZOA lobe elevation"),
        };
        case.counts(8, count_name, params.lobe_count_model(kind)?, &counts);
        let unit = Uniform::new(0.0, 1.0).expect("valid bounds");
        case.continuous(9, az_name, format!("U(sector) {label}"), unit, &sector_positions);
        let (mu, sigma) = params.lobe_elevation(kind)?;
        case.normal(10, el_name, mu, sigma, &elevations);
    }

    // step 11: subpath offsets around a horizontal lobe
    let lobe = |kind| SpatialLobe {
        kind,
        index: 0,
        mean: NyuAngles::new(180.0, 0.0),
    };
    let (aod, aoa) = ([lobe(LobeKind::Departure)], [lobe(LobeKind::Arrival)]);
    let mut offsets: [Vec<f64>; 4] = Default::default();
    for _ in 0..draws {
        let a = assign_subpath_angles(params, &aod, &aoa, &mut rng)?;
        offsets[0].push(a.departure.azimuth_deg - 180.0);
        offsets[1].push(a.departure.elevation_deg);
        offsets[2].push(a.arrival.azimuth_deg - 180.0);
        offsets[3].push(a.arrival.elevation_deg);
    }
    let (aod_az, zod) = params.angular_offsets(LobeKind::Departure)?;
    let (aoa_az, zoa) = params.angular_offsets(LobeKind::Arrival)?;
    case.normal(11, "AOD offset", 0.0, aod_az, &offsets[0]);
    case.normal(11, "ZOD offset", 0.0, zod, &offsets[1]);
    case.normal(11, "AOA offset", 0.0, aoa_az, &offsets[2]);
    case.normal(11, "ZOA offset", 0.0, zoa, &offsets[3]);

    Ok(case.checks)
}

fn exp(mean: f64) -> Exp {
    Exp::new(1.0 / mean).expect("positive mean")
}

fn gamma(shape: f64, scale: f64) -> Gamma {
    Gamma::new(shape, 1.0 / scale).expect("positive gamma parameters")
}

/// Runs every step check for all scenario/condition pairs at the given
/// frequencies with `draws` samples per check.
pub fn distribution_suite(
    table: &ParamTable,
    scenarios: &[Scenario],
    frequencies_ghz: &[f64],
    draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<DistributionCheck>> {
    let mut cases = Vec::new();
    for &scenario in scenarios {
        for condition in ChannelCondition::ALL {
            for &f in frequencies_ghz {
                cases.push(table.params_for(scenario, condition, f)?);
            }
        }
    }
    let indexed: Vec<(u32, ScenarioParams)> = cases.into_iter().enumerate().map(|(i, p)| (i as u32, p)).collect();
    let results = map_ordered(&indexed, exec, |(i, p)| check_case(p, draws, seed, *i));
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_runs() {
        let checks = distribution_suite(
            ParamTable::builtin(),
            &[Scenario::RMa, Scenario::InH],
            &[28.0],
            2000,
            5,
            Execution::Sequential,
        )
        .unwrap();
        assert!(checks.len() > 20);
        let rma_clusters = checks
            .iter()
            .find(|c| c.scenario == Scenario::RMa && c.step == 1)
            .unwrap();
        assert_eq!(rma_clusters.outcome.p_value, 1.0);
        for c in &checks {
            assert!(c.outcome.p_value.is_finite());
        }
    }
}
