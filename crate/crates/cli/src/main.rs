use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use chansim_core::exec::Execution;
use chansim_core::harness::{
    bin_edges, distribution_report, mean_pathloss_report, run_drops, run_sweep, write_csv, write_csv_file, Capture,
    ConditionMode, DropConfig, Placement, SimContext, SweepSpec,
};
use chansim_core::large_scale::O2iMode;
use chansim_core::validation::distribution_suite;
use chansim_core::{ChannelCondition, Error, Scenario};

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;
const DEFAULT_REPORT_BINS: usize = 20;

#[derive(Parser, Debug)]
#[command(name = "chansim", version, about = "Drop-based statistical channel simulator (0.5-150 GHz)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Large-scale path loss against distance.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Scenarios to sweep, or `all`; defaults to the configured one.
        #[arg(long, value_delimiter = ',')]
        scenarios: Vec<String>,
        /// Carrier frequencies (GHz); defaults to the configured one.
        #[arg(long, value_delimiter = ',')]
        frequencies: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo drops with per-link results.
    Drops {
        #[command(flatten)]
        common: CommonArgs,
        /// Per-link results; stdout when neither this nor the config sets it.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        psd: Option<PathBuf>,
        /// Distance-binned mean path loss.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        report_bins: Option<usize>,
    },
    /// Distribution checks of every generation step.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        scenarios: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [28.0, 140.0])]
        frequencies: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        #[arg(long, default_value_t = 0.01)]
        significance: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-subpath dump of the configured drops.
    Dump {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConditionArg {
    Auto,
    Los,
    Nlos,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum O2iArg {
    None,
    LowLoss,
    HighLoss,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExecutionArg {
    Sequential,
    Parallel,
}

/// Flags mirroring the configuration file keys; each one overrides the file.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long = "frequency")]
    frequency_ghz: Option<f64>,
    #[arg(long = "rf-bandwidth")]
    rf_bandwidth_hz: Option<f64>,
    #[arg(long)]
    drops: Option<u32>,
    #[arg(long = "links")]
    links_per_drop: Option<u16>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "bs-height")]
    bs_height_m: Option<f64>,
    #[arg(long = "ue-height")]
    ue_height_m: Option<f64>,
    #[arg(long, value_enum)]
    condition: Option<ConditionArg>,
    #[arg(long = "min-distance")]
    min_distance_m: Option<f64>,
    #[arg(long = "max-distance")]
    max_distance_m: Option<f64>,
    /// Fixed UE distances (m); switches placement to a sweep.
    #[arg(long = "distances", value_delimiter = ',')]
    distances_m: Vec<f64>,
    #[arg(long, value_enum)]
    o2i: Option<O2iArg>,
    #[arg(long)]
    atmospheric: Option<bool>,
    #[arg(long = "foliage-depth")]
    foliage_depth_m: Option<f64>,
    #[arg(long = "foliage-loss")]
    foliage_loss_db_per_m: Option<f64>,
    #[arg(long)]
    shadowing: Option<bool>,
    #[arg(long = "tx-power")]
    tx_power_dbm: Option<f64>,
    #[arg(long)]
    subbands: Option<usize>,
    #[arg(long, value_enum)]
    execution: Option<ExecutionArg>,
    #[arg(long)]
    param_file: Option<PathBuf>,
    #[arg(long)]
    atmosphere_file: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> Result<DropConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => DropConfig::from_path(path)?,
            None => DropConfig::default(),
        };
        if let Some(s) = &self.scenario {
            cfg.scenario = s.parse()?;
        }
        set(&mut cfg.frequency_ghz, self.frequency_ghz);
        set(&mut cfg.rf_bandwidth_hz, self.rf_bandwidth_hz);
        set(&mut cfg.drops, self.drops);
        set(&mut cfg.links_per_drop, self.links_per_drop);
        set(&mut cfg.seed, self.seed);
        if self.bs_height_m.is_some() {
            cfg.bs_height_m = self.bs_height_m;
        }
        set(&mut cfg.ue_height_m, self.ue_height_m);
        if let Some(c) = self.condition {
            cfg.condition = match c {
                ConditionArg::Auto => ConditionMode::Auto,
                ConditionArg::Los => ConditionMode::Los,
                ConditionArg::Nlos => ConditionMode::Nlos,
            };
        }
        if !self.distances_m.is_empty() {
            cfg.placement = Placement::Sweep {
                distances_m: self.distances_m.clone(),
            };
        } else if self.min_distance_m.is_some() || self.max_distance_m.is_some() {
            let (lo, hi) = match cfg.placement {
                Placement::Annulus {
                    min_distance_m,
                    max_distance_m,
                } => (min_distance_m, max_distance_m),
                Placement::Sweep { .. } => match Placement::default() {
                    Placement::Annulus {
                        min_distance_m,
                        max_distance_m,
                    } => (min_distance_m, max_distance_m),
                    Placement::Sweep { .. } => unreachable!(),
                },
            };
            cfg.placement = Placement::Annulus {
                min_distance_m: self.min_distance_m.unwrap_or(lo),
                max_distance_m: self.max_distance_m.unwrap_or(hi),
            };
        }
        let a = &mut cfg.attenuation;
        if let Some(m) = self.o2i {
            a.o2i = match m {
                O2iArg::None => O2iMode::None,
                O2iArg::LowLoss => O2iMode::LowLoss,
                O2iArg::HighLoss => O2iMode::HighLoss,
            };
        }
        set(&mut a.atmospheric, self.atmospheric);
        set(&mut a.foliage_depth_m, self.foliage_depth_m);
        set(&mut a.foliage_loss_db_per_m, self.foliage_loss_db_per_m);
        set(&mut a.shadowing, self.shadowing);
        if self.atmosphere_file.is_some() {
            a.atmosphere_file = self.atmosphere_file.clone();
        }
        set(&mut cfg.small_scale.tx_power_dbm, self.tx_power_dbm);
        set(&mut cfg.psd.subbands, self.subbands);
        if let Some(e) = self.execution {
            cfg.execution = match e {
                ExecutionArg::Sequential => Execution::Sequential,
                ExecutionArg::Parallel => Execution::Parallel,
            };
        }
        if self.param_file.is_some() {
            cfg.param_file = self.param_file.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

fn parse_scenarios(list: &[String]) -> Result<Vec<Scenario>, Error> {
    if list.iter().any(|s| s.eq_ignore_ascii_case("all")) {
        return Ok(Scenario::ALL.to_vec());
    }
    list.iter().map(|s| s.parse()).collect()
}

fn emit<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<(), Error> {
    match path {
        Some(p) => write_csv_file(p, rows),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock, rows)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sweep {
            common,
            scenarios,
            frequencies,
            output,
        } => {
            let cfg = common.load()?;
            let conditions: Vec<ChannelCondition> = cfg.condition.forced().into_iter().collect();
            let spec = SweepSpec {
                scenarios: parse_scenarios(&scenarios)?,
                frequencies_ghz: frequencies,
                conditions,
                distances_m: Vec::new(),
            };
            let ctx = SimContext::new(cfg)?;
            let rows = run_sweep(&ctx, &spec)?;
            emit(output.as_deref(), &rows)
        }
        Command::Drops {
            common,
            output,
            dump,
            psd,
            report,
            report_bins,
        } => {
            let mut cfg = common.load()?;
            let out = &mut cfg.output;
            if output.is_some() {
                out.results = output;
            }
            if dump.is_some() {
                out.dump = dump;
            }
            if psd.is_some() {
                out.psd = psd;
            }
            if report.is_some() {
                out.pathloss_report = report;
            }
            if report_bins.is_some() {
                out.report_bins = report_bins;
            }
            cfg.validate()?;
            let ctx = SimContext::new(cfg)?;
            let out = &ctx.config.output;
            let run = run_drops(&ctx, Capture::from_outputs(out))?;
            emit(out.results.as_deref(), &run.results)?;
            if let Some(p) = &out.dump {
                write_csv_file(p, &run.subpaths)?;
            }
            if let Some(p) = &out.psd {
                write_csv_file(p, &run.psd)?;
            }
            if let Some(p) = &out.pathloss_report {
                let edges = bin_edges(&ctx.config.placement, out.report_bins.unwrap_or(DEFAULT_REPORT_BINS));
                write_csv_file(p, &mean_pathloss_report(&run.results, &edges))?;
            }
            Ok(())
        }
        Command::Validate {
            common,
            scenarios,
            frequencies,
            draws,
            significance,
            output,
        } => {
            if !(significance > 0.0 && significance < 1.0) {
                return Err(Error::Config("significance must lie in (0, 1)".into()));
            }
            if draws < 2 {
                return Err(Error::Config("draws must be at least 2".into()));
            }
            let cfg = common.load()?;
            let scenarios = if scenarios.is_empty() {
                Scenario::ALL.to_vec()
            } else {
                parse_scenarios(&scenarios)?
            };
            let ctx = SimContext::new(cfg)?;
            let checks = distribution_suite(&ctx.table, &scenarios, &frequencies, draws, ctx.config.seed, ctx.config.execution)?;
            let report = distribution_report(&checks, significance);
            emit(output.as_deref(), &report.rows)?;
            eprintln!(
                "{} checks, {} below p = {} ({:.2}%), {} with fewer than the recommended draws",
                report.rows.len(),
                report.failures(),
                significance,
                100.0 * report.failure_fraction(),
                report.insufficient()
            );
            Ok(())
        }
        Command::Dump { common, output } => {
            let ctx = SimContext::new(common.load()?)?;
            let capture = Capture {
                subpaths: true,
                psd: false,
            };
            let run = run_drops(&ctx, capture)?;
            emit(output.as_deref(), &run.subpaths)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { CONFIG_ERROR } else { RUNTIME_ERROR })
        }
    }
}
