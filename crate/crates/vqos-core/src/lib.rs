//! Core library of the vehicular QoS prediction workbench.
//!
//! Modules mirror the workflow end to end: synthetic trace generation and
//! ingest ([`trace`]), sampling-interval analysis ([`resample`]),
//! stationarity diagnostics ([`stationarity`]), concept-drift detection
//! ([`drift`]), train/test split strategies ([`split`]), feature assembly
//! ([`features`]), regression models ([`models`]), metrics and experiment
//! grids ([`eval`]), and model explanation ([`explain`]).

pub mod drift;
pub mod error;
pub mod eval;
pub mod explain;
pub mod features;
pub mod geo;
pub mod linalg;
pub mod models;
pub mod resample;
pub mod rng;
pub mod split;
pub mod stationarity;
pub mod trace;

pub use error::{Error, Result};
pub use trace::{
    CellSite, DeviceGrade, Direction, Env, GeneratorConfig, MeasurementRun, Protocol, RadioSample,
};
