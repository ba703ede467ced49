//! QUBO minimisers.
//!
//! All solvers take a [`QuboMatrix`] by shared reference and return a
//! [`SolveReport`]. Randomised solvers derive one ChaCha stream per restart
//! from `(seed, restart)`, so parallel and sequential execution agree bit
//! for bit.

mod anneal;
mod cim;
mod exhaustive;

pub use anneal::{anneal_restart, solve_sa, AnnealSchedule, MAX_DEFAULT_SWEEPS};
pub use cim::{solve_cim_sim, CimSchedule};
pub use exhaustive::{solve_exhaustive, EXHAUSTIVE_CAP};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::qubo::QuboMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScheduleParams {
    Exhaustive,
    Anneal(AnnealSchedule),
    Cim(CimSchedule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver_name: String,
    pub best_bits: Vec<u8>,
    pub best_energy: f64,
    /// Seconds spent inside the solver.
    pub wall_time: f64,
    pub restarts: usize,
    /// Final energy of every restart; `inf` for a restart that diverged.
    pub per_restart_energies: Vec<f64>,
    #[serde(default)]
    pub diverged_restarts: Vec<usize>,
    pub rng_seed: u64,
    pub schedule_params: ScheduleParams,
}

/// Which engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Exact SIP oracle, no QUBO involved.
    Exact,
    Exhaustive,
    Sa,
    Cim,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::Sa => "sa",
            SolverKind::Cim => "cim",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "exhaustive" => Ok(SolverKind::Exhaustive),
            "sa" => Ok(SolverKind::Sa),
            "cim" => Ok(SolverKind::Cim),
            other => Err(Error::InvalidConfig(format!("unknown solver `{other}`"))),
        }
    }
}

pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Picks the best restart (lowest energy, then lowest restart index) and
/// re-evaluates every endpoint through the matrix so the report is exact.
pub(crate) fn collect_restarts(
    q: &QuboMatrix,
    outcomes: Vec<Option<Vec<u8>>>,
) -> Result<(Vec<u8>, f64, Vec<f64>, Vec<usize>)> {
    let mut energies = Vec::with_capacity(outcomes.len());
    let mut diverged = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (r, bits) in outcomes.iter().enumerate() {
        match bits {
            Some(bits) => {
                let e = q.energy(bits);
                if best.is_none_or(|(_, b)| e < b) {
                    best = Some((r, e));
                }
                energies.push(e);
            }
            None => {
                diverged.push(r);
                energies.push(f64::INFINITY);
            }
        }
    }
    let (idx, energy) = best.ok_or(Error::Diverged(outcomes.len()))?;
    let bits = outcomes.into_iter().nth(idx).flatten().expect("best restart has bits");
    Ok((bits, energy, energies, diverged))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restart_streams_differ() {
        use rand::Rng;
        let a: u64 = restart_rng(1, 0).random();
        let b: u64 = restart_rng(1, 1).random();
        let c: u64 = restart_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn collect_prefers_earliest_of_equal_restarts() {
        let q = QuboMatrix::from_entries(2, 0.0, [(0, 0, -1.0), (1, 1, -1.0)]);
        let (bits, e, all, div) =
            collect_restarts(&q, vec![Some(vec![0, 1]), None, Some(vec![1, 0]), Some(vec![0, 0])]).unwrap();
        assert_eq!(bits, vec![0, 1]);
        assert_eq!(e, -1.0);
        assert_eq!(all, vec![-1.0, f64::INFINITY, -1.0, 0.0]);
        assert_eq!(div, vec![1]);
        assert!(matches!(collect_restarts(&q, vec![None, None]), Err(Error::Diverged(2))));
    }

    #[test]
    fn solver_names_roundtrip() {
        for k in [SolverKind::Exact, SolverKind::Exhaustive, SolverKind::Sa, SolverKind::Cim] {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("tabu".parse::<SolverKind>().is_err());
    }
}
