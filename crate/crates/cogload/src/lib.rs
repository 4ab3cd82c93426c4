//! Cognitive-load market laboratory.
//!
//! A simulation and estimation toolkit for studying how the cognitive load of
//! corporate disclosures shapes price discovery. The crate provides:
//!
//! - [`model`]: disclosures, investors, the two-channel (attention/working
//!   memory) load model, and the processing-quality technology;
//! - [`solver`]: budget-constrained attention allocation by projected
//!   gradient ascent with KKT certificates and shadow prices;
//! - [`market`]: quality-weighted equilibrium pricing, mispricing, and
//!   load sweeps;
//! - [`mechanisms`]: selective attention, capacity-scaled processing error,
//!   and strategic complexity choice;
//! - [`sim`]: a staggered-adoption firm panel of disclosure events with
//!   daily price paths and price-discovery outcomes;
//! - [`textmetrics`]: readability, file-size, and boilerplate measures for
//!   raw filing text;
//! - [`did`]: two-way fixed-effects difference-in-differences estimation
//!   with cluster-robust inference, event studies, and placebo tests;
//! - [`config`]: TOML experiment configuration tying the pieces together.

pub mod config;
pub mod did;
pub mod error;
pub mod market;
pub mod mechanisms;
pub mod model;
pub mod sim;
pub mod solver;
pub mod textmetrics;

pub use error::{Error, Result};
