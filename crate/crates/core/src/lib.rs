//! Two-stage stochastic subscription planning for edge-device data bundles,
//! its QUBO transformation, and a set of QUBO solvers.
//!
//! The pipeline is:
//!
//! 1. [`instance`] describes (or generates) a problem: service providers,
//!    edge devices with membership / reserved / on-demand prices, and a
//!    discrete set of demand scenarios.
//! 2. [`sip`] evaluates the two-stage objective, checks the linking and
//!    demand constraints, and solves small instances exactly.
//! 3. [`encoding`] and [`qubo`] turn integer decisions into bits and build the
//!    penalty-augmented quadratic energy, with an Ising view for spin solvers.
//! 4. [`solvers`] minimise the energy (exhaustive, simulated annealing,
//!    simulated coherent Ising machine) and [`repair`] maps raw bitstrings back
//!    to feasible subscription plans.
//! 5. [`bench`] runs the whole matrix and writes CSV / JSON results.
//!
//! With the default `parallel` feature, restarts, enumeration chunks and bench
//! rows are spread over a rayon pool. Results never depend on the schedule;
//! see [`Execution`].

pub mod bench;
pub mod encoding;
mod error;
mod exec;
pub mod instance;
pub mod qubo;
pub mod repair;
pub mod sip;
pub mod solvers;

pub use error::{Error, Result};
pub use exec::Execution;

pub use encoding::{build_encoding, build_encoding_for, decode_bits, encode_solution, EncodingScheme};
pub use instance::{generate_instance, load_instance, save_instance, GeneratorConfig, Preset, ProblemInstance};
pub use qubo::{build_qubo, qubo_energy, to_ising, IsingProblem, PenaltyMode, QuboMatrix, QuboProblem};
pub use repair::{decode_and_repair, RepairOutcome};
pub use sip::{check_feasibility, evaluate_objective, solve_exact, ExactBounds, SipSolution};
pub use solvers::{solve_cim_sim, solve_exhaustive, solve_sa, AnnealSchedule, CimSchedule, SolveReport};

/// Default weight on the subscription-linking penalty.
pub const DEFAULT_ALPHA: f64 = 10_000.0;
/// Default weight on the demand penalty.
pub const DEFAULT_BETA: f64 = 100.0;
