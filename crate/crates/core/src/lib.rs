//! Outage analysis of a two-hop underlay cognitive-radio NOMA downlink with
//! hardware impairments, imperfect CSI, imperfect SIC and primary/secondary
//! interference.
//!
//! A source S reaches B secondary users through a decode-and-forward relay R
//! while a primary pair T -> D shares the band. Secondary transmit powers are
//! capped by an interference temperature constraint at D.
//!
//! - [`config`]: network parameters, validation, presets, TOML files.
//! - [`channel`]: Rayleigh block-fading draws and the underlay power cap.
//! - [`sidnr`]: instantaneous SIDNRs and the dual-hop rate.
//! - [`analytic`]: closed-form hop CDFs and end-to-end outage.
//! - [`montecarlo`]: seeded trial engine, the independent check of `analytic`.
//! - [`sweep`]: parameter sweeps, CSV and plot output, figure presets.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod montecarlo;
pub mod sidnr;
pub mod special;
pub mod sweep;

pub use analytic::{outage_probability, AnalyticCoefficients, BranchTerms};
pub use channel::{ChannelRealization, RngStream};
pub use config::{AccessMode, ScenarioPreset, SystemConfig, ValidationReport};
pub use error::{Error, Result};
pub use montecarlo::{estimate_outage, McOptions, OutageResult, OutageSemantics};
pub use sidnr::{Hop, HopCoefficients};
pub use special::expint_ei;
pub use sweep::{Axis, EvalModes, ResultTable, SweepSpec};
