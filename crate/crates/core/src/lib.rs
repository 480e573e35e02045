//! Single-machine scheduling with release and delivery times, minimizing the
//! maximal lateness `max_i s_i + p_i + q_i`.
//!
//! The crate provides
//! - the instance model and start-time recursion ([`model`]),
//! - long/short classification, placements of long jobs and Jackson
//!   schedules ([`jackson`]),
//! - the hybrid 2+2 evolutionary algorithm with its local (Jackson-driven)
//!   and global (uniform restart) mutations ([`evolve`]),
//! - exact and enumerative oracles plus Monte Carlo experiments ([`oracle`]).
//!
//! Job indices and positions are 0-based in the API; files and serialized
//! schedules use 1-based indices.

pub mod error;
pub mod evolve;
pub mod io;
pub mod jackson;
pub mod model;
pub mod oracle;
pub mod rng;

pub use error::{Error, ErrorClass, Result};
pub use evolve::{budget, run_ea, EaConfig, EaResult, EaState, HybridEa, Init, MutationKind, StepTrace};
pub use jackson::{build_jackson, classify, enumerate_placements, extract_placement, jackson_prefix, Placement};
pub use model::{Epsilon, EvaluationReport, Instance, Job, Schedule, StartCase, Time};
pub use oracle::{check_eps_optimal, enum_ptas, exact_optimum, ExactResult, PtasResult};
pub use rng::RngStream;
