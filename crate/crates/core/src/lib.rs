//! Deterministic simulator of a two-material conveyor sorting line.
//!
//! Material enters on an input stage, rides the conveyor belt, is sorted by
//! the sorting machine and lands in two storage containers. An agent picks
//! the belt speed (and, in the advanced variant, the sorting mode) each
//! step, trading sorting accuracy against throughput.
//!
//! The crate provides the environment ([`env`]), its physics
//! ([`sorting`]) and input generators ([`input`]), baseline agents
//! ([`agents`]), a benchmark harness ([`bench`]) and a line-oriented
//! environment server ([`server`]).

pub mod agents;
pub mod bench;
pub mod config;
pub mod env;
pub mod error;
pub mod input;
pub mod mix;
pub mod rng;
pub mod server;
pub mod sorting;

pub use config::{EnvConfig, EnvVariant, InputType, Range};
pub use env::{Action, Observation, SortingEnv, StepInfo, StepResult};
pub use error::{Error, Result};
pub use mix::{MaterialMix, StorageTally};
pub use sorting::SortingMode;
