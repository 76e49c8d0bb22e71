//! Drop-based statistical channel simulator for 0.5-150 GHz built on the
//! time-cluster spatial-lobe (TCSL) model.
//!
//! A drop places links, draws a LOS/NLOS condition per link, computes the
//! large-scale loss, generates the multipath realization and evaluates the
//! MIMO channel and beamformed received PSD.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod condition;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod large_scale;
pub mod mimo;
pub mod params;
pub mod rng;
pub mod small_scale;
pub mod stats;
pub mod types;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::LinkGeometry;
pub use params::{params_for, ParamTable, ScenarioParams};
pub use rng::{RngStream, StreamId, StreamPurpose};
pub use types::{CarrierConfig, ChannelCondition, Scenario};
