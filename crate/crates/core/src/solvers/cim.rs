//! Classical stand-in for a coherent Ising machine.
//!
//! Each spin is a real amplitude `a_i` driven by a pump-controlled
//! bistable potential plus the Ising mean field:
//!
//! ```text
//! da_i = [(p - 1) a_i - a_i^3 - c (sum_j J_ij a_j + h_i)] dt + noise sqrt(dt) N(0, 1)
//! ```
//!
//! The sign in front of the coupling term makes the flow descend the Ising
//! energy `sum J s s + sum h s`. Linear fields act as couplings to a frozen
//! auxiliary spin fixed at `+1`. `J` and `h` are divided by their largest
//! magnitude first so the schedule is independent of the QUBO's units.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{collect_restarts, restart_rng, ScheduleParams, SolveReport};
use crate::qubo::{spins_to_bits, to_ising, QuboMatrix};
use crate::{Error, Execution, Result};

const AMPLITUDE_CLAMP: f64 = 1.5;
const INITIAL_SPREAD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CimSchedule {
    pub steps: usize,
    pub dt: f64,
    pub pump_start: f64,
    pub pump_end: f64,
    pub coupling_strength: f64,
    pub noise_amplitude: f64,
    pub restarts: usize,
}

impl CimSchedule {
    /// Tuned on random 12-variable problems: a pump ramp well past
    /// threshold and enough noise that restarts explore different basins.
    pub fn default_for(num_vars: usize) -> Self {
        CimSchedule {
            steps: 2000,
            dt: 0.05,
            pump_start: 0.0,
            pump_end: 2.0,
            coupling_strength: 1.0 / (num_vars.max(1) as f64).sqrt(),
            noise_amplitude: 0.3,
            restarts: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.noise_amplitude >= 0.0) {
            return bad(format!("noise_amplitude = {} must be >= 0", self.noise_amplitude));
        }
        if !self.pump_start.is_finite() || !self.pump_end.is_finite() || !self.coupling_strength.is_finite() {
            return bad("pump and coupling parameters must be finite".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be >= 1".into());
        }
        Ok(())
    }
}

struct Dynamics<'q> {
    q: &'q QuboMatrix,
    /// Normalised fields.
    h: Vec<f64>,
    /// Coupling scale: `J_ij = q_ij / 4`, then normalised.
    j_scale: f64,
}

impl<'q> Dynamics<'q> {
    fn new(q: &'q QuboMatrix) -> Self {
        let ising = to_ising(q);
        let max_j = ising.couplings.iter().fold(0.0f64, |m, c| m.max(c.2.abs()));
        let max_h = ising.h.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        let norm = match max_j.max(max_h) {
            m if m > 0.0 => m,
            _ => 1.0,
        };
        Dynamics {
            q,
            h: ising.h.iter().map(|h| h / norm).collect(),
            j_scale: 0.25 / norm,
        }
    }

    /// Integrates one trajectory; `None` if an amplitude stops being finite.
    fn run(&self, schedule: &CimSchedule, seed: u64, restart: usize) -> Option<Vec<u8>> {
        let n = self.h.len();
        let mut rng = restart_rng(seed, restart);
        let mut amp: Vec<f64> = (0..n).map(|_| rng.random_range(-INITIAL_SPREAD..=INITIAL_SPREAD)).collect();
        let mut force = vec![0.0; n];
        let c = schedule.coupling_strength;
        let noise = schedule.noise_amplitude * schedule.dt.sqrt();
        let ramp = if schedule.steps > 1 {
            (schedule.pump_end - schedule.pump_start) / (schedule.steps - 1) as f64
        } else {
            0.0
        };
        for step in 0..schedule.steps {
            let gain = schedule.pump_start + ramp * step as f64 - 1.0;
            for (i, f) in force.iter_mut().enumerate() {
                let (cols, vals) = self.q.neighbor_slices(i);
                let coupled: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * amp[j]).sum();
                *f = coupled * self.j_scale + self.h[i];
            }
            for i in 0..n {
                let a = amp[i];
                let drift = gain * a - a * a * a - c * force[i];
                let kick = if noise > 0.0 {
                    noise * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                let next = a + drift * schedule.dt + kick;
                if !next.is_finite() {
                    return None;
                }
                amp[i] = next.clamp(-AMPLITUDE_CLAMP, AMPLITUDE_CLAMP);
            }
        }
        let spins: Vec<i8> = amp.iter().map(|&a| if a >= 0.0 { 1 } else { -1 }).collect();
        Some(spins_to_bits(&spins))
    }
}

pub fn solve_cim_sim(q: &QuboMatrix, schedule: &CimSchedule, seed: u64, exec: Execution) -> Result<SolveReport> {
    schedule.validate()?;
    let start = Instant::now();
    let dynamics = Dynamics::new(q);
    let outcomes = exec.map_range(schedule.restarts, |r| dynamics.run(schedule, seed, r));
    let wall_time = start.elapsed().as_secs_f64();
    let (best_bits, best_energy, per_restart_energies, diverged_restarts) = collect_restarts(q, outcomes)?;
    Ok(SolveReport {
        solver_name: "cim".into(),
        best_bits,
        best_energy,
        wall_time,
        restarts: schedule.restarts,
        per_restart_energies,
        diverged_restarts,
        rng_seed: seed,
        schedule_params: ScheduleParams::Cim(*schedule),
    })
}
