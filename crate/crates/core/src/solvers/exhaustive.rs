use std::time::Instant;

use super::{ScheduleParams, SolveReport};
use crate::qubo::QuboMatrix;
use crate::{Error, Execution, Result};

/// Largest problem [`solve_exhaustive`] accepts.
pub const EXHAUSTIVE_CAP: usize = 24;

/// Bits fixed per enumeration chunk (chunks run in parallel).
const PREFIX_BITS: usize = 6;

/// Global minimum by Gray-code enumeration.
///
/// Ties go to the smallest bitstring read as a big-endian integer
/// (`bits[0]` most significant).
pub fn solve_exhaustive(q: &QuboMatrix, exec: Execution) -> Result<SolveReport> {
    let n = q.num_vars();
    if n > EXHAUSTIVE_CAP {
        return Err(Error::TooLarge {
            num_vars: n,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let start = Instant::now();
    let prefix = n.min(PREFIX_BITS);
    let chunks = exec.map_range(1 << prefix, |p| scan_chunk(q, prefix, p as u32));
    let mut best = chunks[0];
    for &c in &chunks[1..] {
        if better(c, best) {
            best = c;
        }
    }
    let bits = mask_to_bits(best.1, n);
    let energy = q.energy(&bits);
    Ok(SolveReport {
        solver_name: "exhaustive".into(),
        best_bits: bits,
        best_energy: energy,
        wall_time: start.elapsed().as_secs_f64(),
        restarts: 1,
        per_restart_energies: vec![energy],
        diverged_restarts: Vec::new(),
        rng_seed: 0,
        schedule_params: ScheduleParams::Exhaustive,
    })
}

/// Variable `i` lives at mask bit `n - 1 - i`, so mask order is big-endian
/// bitstring order.
fn mask_to_bits(mask: u32, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect()
}

fn better(a: (f64, u32), b: (f64, u32)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Enumerates all completions of one prefix (the first `prefix` variables).
/// Returns `(exact energy, mask)` of the chunk's best.
fn scan_chunk(q: &QuboMatrix, prefix: usize, p: u32) -> (f64, u32) {
    let n = q.num_vars();
    let free = n - prefix;
    let mut bits = vec![0u8; n];
    for i in 0..prefix {
        bits[i] = ((p >> (prefix - 1 - i)) & 1) as u8;
    }
    let mut mask: u32 = p << free;
    let mut energy = q.energy(&bits);
    let mut best = (energy, mask);
    // Incremental energies drift; anything this close to the incumbent is
    // re-evaluated from scratch before deciding.
    let tol = 1e-9 * (1.0 + q.max_abs_coeff() * n as f64);
    for t in 1u64..(1u64 << free) {
        let pos = t.trailing_zeros() as usize;
        let i = n - 1 - pos;
        energy += q.flip_delta(i, &bits);
        bits[i] ^= 1;
        mask ^= 1 << pos;
        if energy < best.0 - tol {
            best = (energy, mask);
        } else if energy <= best.0 + tol {
            let exact = q.energy(&bits);
            let incumbent = q.energy(&mask_to_bits(best.1, n));
            if better((exact, mask), (incumbent, best.1)) {
                best = (exact, mask);
            }
            energy = exact;
        }
    }
    (q.energy(&mask_to_bits(best.1, n)), best.1)
}
