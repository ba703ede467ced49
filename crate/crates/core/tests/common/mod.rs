//! Reference implementations for tests. Deliberately naive: they read the
//! instance fields directly and share no code with the library's evaluators.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sipqubo::{encode_solution, EncodingScheme, GeneratorConfig, ProblemInstance, QuboMatrix, SipSolution};

pub fn objective(inst: &ProblemInstance, sol: &SipSolution) -> f64 {
    let mut total = 0.0;
    for w in 0..inst.msps {
        for (e, edge) in inst.edges.iter().enumerate() {
            if sol.subscribe[w][e] {
                total += edge.memb_cost;
            }
            total += sol.reserved[w][e] as f64 * edge.resv_trans_cost;
            for (s, sc) in inst.scenarios.iter().enumerate() {
                total += sc.probability * sol.on_demand[w][e][s] as f64 * edge.ondem_trans_cost;
            }
        }
    }
    total
}

pub fn supply(inst: &ProblemInstance, sol: &SipSolution, w: usize, s: usize) -> f64 {
    let sc = &inst.scenarios[s];
    (0..inst.edges.len())
        .map(|e| sc.similarity[w][e] * sol.reserved[w][e] as f64 + sol.on_demand[w][e][s] as f64)
        .sum()
}

pub fn feasible(inst: &ProblemInstance, sol: &SipSolution) -> bool {
    for w in 0..inst.msps {
        for e in 0..inst.edges.len() {
            let cap = if sol.subscribe[w][e] { inst.max_reserved } else { 0 };
            if sol.reserved[w][e] > cap {
                return false;
            }
        }
        for (s, sc) in inst.scenarios.iter().enumerate() {
            if supply(inst, sol, w, s) < sc.demand[w] as f64 - 1e-9 {
                return false;
            }
        }
    }
    true
}

/// `objective + alpha * sum reserved (1 - subscribe) + beta * sum (demand - supply)^2`.
pub fn penalized(inst: &ProblemInstance, sol: &SipSolution, alpha: f64, beta: f64) -> f64 {
    let mut p1 = 0.0;
    let mut p2 = 0.0;
    for w in 0..inst.msps {
        for e in 0..inst.edges.len() {
            if !sol.subscribe[w][e] {
                p1 += sol.reserved[w][e] as f64;
            }
        }
        for (s, sc) in inst.scenarios.iter().enumerate() {
            let gap = sc.demand[w] as f64 - supply(inst, sol, w, s);
            p2 += gap * gap;
        }
    }
    objective(inst, sol) + alpha * p1 + beta * p2
}

/// Minimum objective over every plan with `reserved <= max_reserved` and
/// `on_demand <= max demand`, by full joint enumeration.
pub fn brute_force_optimum(inst: &ProblemInstance) -> Option<(f64, SipSolution)> {
    brute_force_min(inst, |_| true)
}

/// Whether supply equals demand exactly for every (provider, scenario).
pub fn matches_demand(inst: &ProblemInstance, sol: &SipSolution) -> bool {
    (0..inst.msps).all(|w| {
        (0..inst.scenarios.len()).all(|s| supply(inst, sol, w, s) == inst.scenarios[s].demand[w] as f64)
    })
}

/// Like [`brute_force_optimum`], restricted to feasible plans passing `keep`.
pub fn brute_force_min(inst: &ProblemInstance, keep: impl Fn(&SipSolution) -> bool) -> Option<(f64, SipSolution)> {
    let (w_n, e_n, s_n) = (inst.msps, inst.edges.len(), inst.scenarios.len());
    let u = inst.scenarios.iter().flat_map(|s| s.demand.iter()).copied().max().unwrap_or(0);
    let x = inst.max_reserved;
    // One slot per (w, e): (subscribe, reserved) choices then on-demand per scenario.
    let first: Vec<(bool, u64)> = std::iter::once((false, 0)).chain((0..=x).map(|k| (true, k))).collect();
    let per_slot = first.len() as u64 * (u + 1).pow(s_n as u32);
    let slots = w_n * e_n;
    let total = per_slot.checked_pow(slots as u32).expect("instance too large for brute force");
    let mut best: Option<(f64, SipSolution)> = None;
    let mut sol = SipSolution::zeros(w_n, e_n, s_n);
    for code in 0..total {
        let mut c = code;
        for slot in 0..slots {
            let (w, e) = (slot / e_n, slot % e_n);
            let mut v = c % per_slot;
            c /= per_slot;
            let (m, r) = first[(v % first.len() as u64) as usize];
            v /= first.len() as u64;
            sol.subscribe[w][e] = m;
            sol.reserved[w][e] = r;
            for s in 0..s_n {
                sol.on_demand[w][e][s] = v % (u + 1);
                v /= u + 1;
            }
        }
        if !feasible(inst, &sol) || !keep(&sol) {
            continue;
        }
        let obj = objective(inst, &sol);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, sol.clone()));
        }
    }
    best
}

/// Plain double loop over the stored coefficients.
pub fn dense_energy(q: &QuboMatrix, bits: &[u8]) -> f64 {
    let n = q.num_vars();
    let mut dense = vec![vec![0.0; n]; n];
    for (i, j, v) in q.entries() {
        dense[i][j] += v;
    }
    let mut e = q.offset();
    for i in 0..n {
        for j in 0..n {
            e += dense[i][j] * bits[i] as f64 * bits[j] as f64;
        }
    }
    e
}

/// Random plan inside the encoding's ranges.
pub fn random_plan(inst: &ProblemInstance, enc: &EncodingScheme, rng: &mut impl Rng) -> SipSolution {
    let (w_n, e_n, s_n) = (inst.msps, inst.edges.len(), inst.scenarios.len());
    let mut sol = SipSolution::zeros(w_n, e_n, s_n);
    for w in 0..w_n {
        for e in 0..e_n {
            sol.subscribe[w][e] = rng.random_bool(0.5);
            sol.reserved[w][e] = rng.random_range(0..=enc.max_reserved());
            for s in 0..s_n {
                sol.on_demand[w][e][s] = rng.random_range(0..=enc.max_on_demand());
            }
        }
    }
    sol
}

/// Tiny instances for oracle comparisons: one provider, similarity on the
/// {0.5, 1} grid, `max_reserved` in {1, 3}, every demand at most 3.
pub fn tiny_instance(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let edges = rng.random_range(1..=3);
    let scenarios = rng.random_range(1..=2);
    let mut config = GeneratorConfig::custom(1, edges, scenarios, 1.5 * scenarios as f64);
    config.max_reserved = if rng.random_bool(0.5) { 1 } else { 3 };
    config.similarity_step = Some(0.5);
    config.cost_jitter = true;
    (0..)
        .map(|k| sipqubo::generate_instance(&config, seed.wrapping_mul(1000).wrapping_add(k)).unwrap())
        .find(|inst| inst.on_demand_cap() <= 3)
        .unwrap()
}

pub fn encode(sol: &SipSolution, enc: &EncodingScheme) -> Vec<u8> {
    encode_solution(sol, enc).unwrap()
}
