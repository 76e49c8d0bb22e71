//! Aggregated tables: binned mean path loss and distribution checks.

use serde::Serialize;

use super::{DropResult, Placement};
use crate::types::{ChannelCondition, Scenario};
use crate::validation::DistributionCheck;

/// Fewer draws than this per check are flagged as insufficient.
pub const MIN_VALIDATION_DRAWS: usize = 10_000;

/// Mean path loss over the links of one distance bin and condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathLossBin {
    pub condition: ChannelCondition,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub count: usize,
    pub mean_d2d_m: f64,
    pub mean_total_db: f64,
    /// Sample standard deviation; zero for a single link.
    pub std_total_db: f64,
    /// Average of the distance-dependent mean path loss, without shadowing
    /// and optional terms.
    pub mean_path_loss_db: f64,
}

/// Bin edges suited to a placement. Sweep distances each get their own bin
/// bounded by the geometric midpoints; an annulus is split into `bins`
/// logarithmic bins.
pub fn bin_edges(placement: &Placement, bins: usize) -> Vec<f64> {
    match placement {
        Placement::Sweep { distances_m } => {
            let mut d = distances_m.clone();
            d.sort_by(f64::total_cmp);
            d.dedup();
            let mut edges = Vec::with_capacity(d.len() + 1);
            edges.push(d[0] * 0.99);
            for pair in d.windows(2) {
                edges.push((pair[0] * pair[1]).sqrt());
            }
            edges.push(d[d.len() - 1] * 1.01);
            edges
        }
        Placement::Annulus {
            min_distance_m,
            max_distance_m,
        } => {
            let bins = bins.max(1);
            let (a, b) = (min_distance_m.log10(), max_distance_m.log10());
            (0..=bins)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / bins as f64))
                .collect()
        }
    }
}

/// Distance-binned mean and spread of the total path loss per condition.
/// Bins are `[edges[i], edges[i+1])`, the last one closed. Empty bins are
/// left out.
pub fn mean_pathloss_report(results: &[DropResult], edges: &[f64]) -> Vec<PathLossBin> {
    let mut rows = Vec::new();
    if edges.len() < 2 {
        return rows;
    }
    let last = edges.len() - 2;
    for condition in ChannelCondition::ALL {
        for (i, pair) in edges.windows(2).enumerate() {
            let (lo, hi) = (pair[0], pair[1]);
            let members: Vec<&DropResult> = results
                .iter()
                .filter(|r| r.condition == condition)
                .filter(|r| r.d2d_m >= lo && (r.d2d_m < hi || (i == last && r.d2d_m <= hi)))
                .collect();
            if members.is_empty() {
                continue;
            }
            let n = members.len() as f64;
            let mean = |f: fn(&DropResult) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / n;
            let mean_total = mean(|r| r.total_path_loss_db);
            let std_total = if members.len() > 1 {
                let ss: f64 = members.iter().map(|r| (r.total_path_loss_db - mean_total).powi(2)).sum();
                (ss / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            rows.push(PathLossBin {
                condition,
                d_min_m: lo,
                d_max_m: hi,
                count: members.len(),
                mean_d2d_m: mean(|r| r.d2d_m),
                mean_total_db: mean_total,
                std_total_db: std_total,
                mean_path_loss_db: mean(|r| r.mean_path_loss_db),
            });
        }
    }
    rows
}

/// Flat CSV row of a distribution check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    pub step: u8,
    pub quantity: &'static str,
    pub scenario: Scenario,
    pub condition: ChannelCondition,
    pub frequency_ghz: f64,
    pub reference: String,
    pub test: &'static str,
    pub statistic: f64,
    pub p_value: f64,
    pub dof: Option<usize>,
    pub samples: usize,
    pub pass: bool,
    pub insufficient_samples: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport {
    pub significance: f64,
    pub rows: Vec<DistributionRow>,
}

impl DistributionReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.failures() as f64 / self.rows.len() as f64
        }
    }

    pub fn insufficient(&self) -> usize {
        self.rows.iter().filter(|r| r.insufficient_samples).count()
    }
}

/// Tabulates distribution checks at the given significance level.
pub fn distribution_report(checks: &[DistributionCheck], significance: f64) -> DistributionReport {
    let rows = checks
        .iter()
        .map(|c| DistributionRow {
            step: c.step,
            quantity: c.quantity,
            scenario: c.scenario,
            condition: c.condition,
            frequency_ghz: c.frequency_ghz,
            reference: c.reference.clone(),
            test: c.test,
            statistic: c.outcome.statistic,
            p_value: c.outcome.p_value,
            dof: c.outcome.dof,
            samples: c.outcome.samples,
            pass: c.outcome.passes(significance),
            insufficient_samples: c.outcome.samples < MIN_VALIDATION_DRAWS,
        })
        .collect();
    DistributionReport { significance, rows }
}
