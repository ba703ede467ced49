use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{collect_restarts, restart_rng, ScheduleParams, SolveReport};
use crate::qubo::QuboMatrix;
use crate::{Error, Execution, Result};

/// Past this, more sweeps stop paying for themselves on the preset
/// instances while a single large restart gets slow.
pub const MAX_DEFAULT_SWEEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    /// Full passes over all variables per restart.
    pub sweeps: usize,
    pub restarts: usize,
}

impl AnnealSchedule {
    /// Scale-aware defaults: start at ten times the largest coefficient, end
    /// at a hundredth of the smallest (floored at 1e-3), `100 n` sweeps
    /// capped at [`MAX_DEFAULT_SWEEPS`], 32 restarts.
    pub fn default_for(q: &QuboMatrix) -> Self {
        let t_final = (0.01 * q.min_abs_nonzero().unwrap_or(0.0)).max(1e-3);
        let t_initial = (10.0 * q.max_abs_coeff()).max(t_final);
        AnnealSchedule {
            t_initial,
            t_final,
            sweeps: (100 * q.num_vars()).clamp(1, MAX_DEFAULT_SWEEPS),
            restarts: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return bad(format!("t_final = {} must be positive", self.t_final));
        }
        if !(self.t_initial >= self.t_final) || !self.t_initial.is_finite() {
            return bad(format!("t_initial = {} must be >= t_final = {}", self.t_initial, self.t_final));
        }
        if self.sweeps == 0 {
            return bad("sweeps must be >= 1".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be >= 1".into());
        }
        Ok(())
    }

    fn cooling_factor(&self) -> f64 {
        if self.sweeps > 1 {
            (self.t_final / self.t_initial).powf(1.0 / (self.sweeps - 1) as f64)
        } else {
            1.0
        }
    }
}

/// Bitstring with cached local fields `d_i + sum_j q_ij x_j`.
pub(crate) struct FlipState<'q> {
    q: &'q QuboMatrix,
    pub bits: Vec<u8>,
    field: Vec<f64>,
    pub energy: f64,
}

impl<'q> FlipState<'q> {
    pub fn new(q: &'q QuboMatrix, bits: Vec<u8>) -> Self {
        let field = (0..q.num_vars()).map(|i| q.local_field(i, &bits)).collect();
        let energy = q.energy(&bits);
        FlipState { q, bits, field, energy }
    }

    #[inline]
    pub fn delta(&self, i: usize) -> f64 {
        if self.bits[i] == 0 {
            self.field[i]
        } else {
            -self.field[i]
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, delta: f64) {
        let step = if self.bits[i] == 0 { 1.0 } else { -1.0 };
        self.bits[i] ^= 1;
        self.energy += delta;
        let (cols, vals) = self.q.neighbor_slices(i);
        for (&j, &v) in cols.iter().zip(vals) {
            self.field[j] += step * v;
        }
    }
}

/// One Metropolis run from a random start with geometric cooling.
///
/// Returns the best end-of-sweep state. When `trace` is given, the best
/// energy seen so far is pushed after every sweep.
pub fn anneal_restart(
    q: &QuboMatrix,
    schedule: &AnnealSchedule,
    seed: u64,
    restart: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Vec<u8> {
    let n = q.num_vars();
    let mut rng = restart_rng(seed, restart);
    let start: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
    let mut state = FlipState::new(q, start);
    let mut best_bits = state.bits.clone();
    let mut best_energy = state.energy;
    let cooling = schedule.cooling_factor();
    let mut t = schedule.t_initial;
    for _ in 0..schedule.sweeps {
        for i in 0..n {
            let delta = state.delta(i);
            if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                state.flip(i, delta);
            }
        }
        if state.energy < best_energy {
            best_energy = state.energy;
            best_bits.copy_from_slice(&state.bits);
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(best_energy);
        }
        t *= cooling;
    }
    best_bits
}

pub fn solve_sa(q: &QuboMatrix, schedule: &AnnealSchedule, seed: u64, exec: Execution) -> Result<SolveReport> {
    schedule.validate()?;
    let start = Instant::now();
    let outcomes = exec.map_range(schedule.restarts, |r| Some(anneal_restart(q, schedule, seed, r, None)));
    let wall_time = start.elapsed().as_secs_f64();
    let (best_bits, best_energy, per_restart_energies, diverged_restarts) = collect_restarts(q, outcomes)?;
    Ok(SolveReport {
        solver_name: "sa".into(),
        best_bits,
        best_energy,
        wall_time,
        restarts: schedule.restarts,
        per_restart_energies,
        diverged_restarts,
        rng_seed: seed,
        schedule_params: ScheduleParams::Anneal(*schedule),
    })
}
