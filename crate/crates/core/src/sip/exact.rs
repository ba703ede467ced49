use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{bundles_needed, evaluate_objective, ObjectiveBreakdown, SipSolution};
use crate::instance::ProblemInstance;
use crate::{Error, Execution, Result};

/// Default cap on enumerated first-stage assignments.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactBounds {
    /// Largest reserved count tried per (provider, edge); never above
    /// `max_reserved`.
    pub reserved_cap: u64,
    /// Largest on-demand count per (provider, edge, scenario).
    pub on_demand_cap: u64,
    pub budget: u128,
}

impl ExactBounds {
    pub fn for_instance(instance: &ProblemInstance) -> Self {
        ExactBounds {
            reserved_cap: instance.max_reserved,
            on_demand_cap: instance.on_demand_cap(),
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub solution: SipSolution,
    pub breakdown: ObjectiveBreakdown,
    /// Number of first-stage assignments the search covers.
    pub search_space: u128,
}

/// Minimum-cost plan by exhaustive search with bound pruning.
///
/// Providers are independent, so each is solved on its own. Within a
/// provider the search enumerates reserved counts per edge (membership is
/// implied by `reserved > 0`, which is the cheapest way to satisfy the
/// linking constraint). Given the first stage, the scenario recourse is a
/// covering problem with a single demand row, solved exactly by filling the
/// cheapest on-demand edges first. Among equal-cost plans the one with the
/// lexicographically smallest decision vector wins.
pub fn solve_exact(instance: &ProblemInstance, bounds: &ExactBounds, exec: Execution) -> Result<ExactSolution> {
    instance.validate()?;
    let cap = bounds.reserved_cap.min(instance.max_reserved);
    let search_space = search_space(instance.msps, instance.num_edges(), cap);
    if search_space > bounds.budget {
        return Err(Error::BudgetExceeded {
            size: search_space,
            budget: bounds.budget,
        });
    }

    let per_provider = exec.map_range(instance.msps, |w| {
        ProviderSearch::new(instance, w, cap, bounds.on_demand_cap).solve(exec)
    });

    let mut solution = SipSolution::zeros_for(instance);
    for (w, best) in per_provider.into_iter().enumerate() {
        let best = best.ok_or(Error::Infeasible {
            on_demand_cap: bounds.on_demand_cap,
        })?;
        for e in 0..instance.num_edges() {
            solution.subscribe[w][e] = best.reserved[e] > 0;
            solution.reserved[w][e] = best.reserved[e];
            solution.on_demand[w][e].clone_from(&best.on_demand[e]);
        }
    }
    let breakdown = evaluate_objective(instance, &solution)?;
    Ok(ExactSolution {
        solution,
        breakdown,
        search_space,
    })
}

fn search_space(msps: usize, edges: usize, cap: u64) -> u128 {
    let per = (cap as u128 + 1).checked_pow(edges as u32).unwrap_or(u128::MAX);
    per.saturating_mul(msps as u128)
}

fn tie_tol(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

#[derive(Debug, Clone)]
struct Candidate {
    objective: f64,
    reserved: Vec<u64>,
    /// `on_demand[e][s]`
    on_demand: Vec<Vec<u64>>,
}

impl Candidate {
    fn decision_key(&self) -> impl Iterator<Item = u64> + '_ {
        self.reserved
            .iter()
            .map(|&r| (r > 0) as u64)
            .chain(self.reserved.iter().copied())
            .chain(self.on_demand.iter().flatten().copied())
    }

    fn better_than(&self, other: &Candidate) -> bool {
        let tol = tie_tol(other.objective);
        if self.objective < other.objective - tol {
            true
        } else if self.objective > other.objective + tol {
            false
        } else {
            self.decision_key().cmp(other.decision_key()) == Ordering::Less
        }
    }
}

fn keep_best(best: &mut Option<Candidate>, cand: Candidate) {
    match best {
        Some(b) if !cand.better_than(b) => {}
        _ => *best = Some(cand),
    }
}

struct ProviderSearch {
    edges: usize,
    scenarios: usize,
    cap: u64,
    on_demand_cap: u64,
    memb: Vec<f64>,
    resv: Vec<f64>,
    ondem: Vec<f64>,
    /// `sim[e][s]`
    sim: Vec<Vec<f64>>,
    demand: Vec<f64>,
    prob: Vec<f64>,
    /// Edges by on-demand price, ties to the highest index so the allocation
    /// is lexicographically smallest.
    fill_order: Vec<usize>,
    /// `tail_supply[i][s]`: most supply edges `i..` can still add.
    tail_supply: Vec<Vec<f64>>,
}

impl ProviderSearch {
    fn new(instance: &ProblemInstance, w: usize, cap: u64, on_demand_cap: u64) -> Self {
        let edges = instance.num_edges();
        let scenarios = instance.num_scenarios();
        let sim: Vec<Vec<f64>> = (0..edges)
            .map(|e| instance.scenarios.iter().map(|sc| sc.similarity[w][e]).collect())
            .collect();
        let ondem: Vec<f64> = instance.edges.iter().map(|e| e.ondem_trans_cost).collect();
        let mut fill_order: Vec<usize> = (0..edges).collect();
        fill_order.sort_by(|&a, &b| ondem[a].total_cmp(&ondem[b]).then(b.cmp(&a)));
        let mut tail_supply = vec![vec![0.0; scenarios]; edges + 1];
        for e in (0..edges).rev() {
            for s in 0..scenarios {
                tail_supply[e][s] = tail_supply[e + 1][s] + sim[e][s] * cap as f64;
            }
        }
        ProviderSearch {
            edges,
            scenarios,
            cap,
            on_demand_cap,
            memb: instance.edges.iter().map(|e| e.memb_cost).collect(),
            resv: instance.edges.iter().map(|e| e.resv_trans_cost).collect(),
            ondem,
            sim,
            demand: instance.scenarios.iter().map(|sc| sc.demand[w] as f64).collect(),
            prob: instance.scenarios.iter().map(|sc| sc.probability).collect(),
            fill_order,
            tail_supply,
        }
    }

    /// Cheapest cost of buying `need` on-demand bundles, or `None` when the
    /// per-edge cap makes it impossible.
    fn fill_cost(&self, need: u64) -> Option<f64> {
        let mut left = need;
        let mut cost = 0.0;
        for &e in &self.fill_order {
            if left == 0 {
                break;
            }
            let take = left.min(self.on_demand_cap);
            cost += take as f64 * self.ondem[e];
            left -= take;
        }
        (left == 0).then_some(cost)
    }

    fn fill(&self, need: u64, s: usize, on_demand: &mut [Vec<u64>]) {
        let mut left = need;
        for &e in &self.fill_order {
            let take = left.min(self.on_demand_cap);
            on_demand[e][s] = take;
            left -= take;
        }
    }

    /// Lower bound on expected recourse when edges `from..` may still add
    /// their full reserved supply.
    fn recourse_bound(&self, supply: &[f64], from: usize) -> Option<f64> {
        let mut total = 0.0;
        for s in 0..self.scenarios {
            let need = bundles_needed(self.demand[s] - supply[s] - self.tail_supply[from][s]);
            total += self.prob[s] * self.fill_cost(need)?;
        }
        Some(total)
    }

    fn complete(&self, reserved: &[u64], first_stage: f64, supply: &[f64]) -> Option<Candidate> {
        let mut on_demand = vec![vec![0; self.scenarios]; self.edges];
        let mut recourse = 0.0;
        for s in 0..self.scenarios {
            let need = bundles_needed(self.demand[s] - supply[s]);
            recourse += self.prob[s] * self.fill_cost(need)?;
            self.fill(need, s, &mut on_demand);
        }
        Some(Candidate {
            objective: first_stage + recourse,
            reserved: reserved.to_vec(),
            on_demand,
        })
    }

    fn stage_cost(&self, e: usize, r: u64) -> f64 {
        let memb = if r > 0 { self.memb[e] } else { 0.0 };
        memb + r as f64 * self.resv[e]
    }

    /// Cheap feasible plans used as starting incumbents.
    fn seed_incumbent(&self) -> Option<Candidate> {
        let mut best = None;
        for r in [0, self.cap] {
            let reserved = vec![r; self.edges];
            let cost = (0..self.edges).map(|e| self.stage_cost(e, r)).sum();
            let supply: Vec<f64> = (0..self.scenarios)
                .map(|s| (0..self.edges).map(|e| self.sim[e][s] * r as f64).sum())
                .collect();
            if let Some(c) = self.complete(&reserved, cost, &supply) {
                keep_best(&mut best, c);
            }
        }
        best
    }

    fn solve(&self, exec: Execution) -> Option<Candidate> {
        let seed = self.seed_incumbent();
        let bound = seed.as_ref().map(|c| c.objective);
        // Partition on the first edge's reserved count.
        let branches = exec.map_range(self.cap as usize + 1, |i| {
            let r0 = self.cap - i as u64;
            let mut reserved = vec![0; self.edges];
            reserved[0] = r0;
            let supply: Vec<f64> = (0..self.scenarios).map(|s| self.sim[0][s] * r0 as f64).collect();
            let mut best = None;
            let mut state = Branch {
                reserved,
                supply,
                bound,
            };
            self.descend(1, self.stage_cost(0, r0), &mut state, &mut best);
            best
        });
        let mut best = seed;
        for c in branches.into_iter().flatten() {
            keep_best(&mut best, c);
        }
        best
    }

    fn descend(&self, depth: usize, cost: f64, st: &mut Branch, best: &mut Option<Candidate>) {
        let incumbent = best.as_ref().map(|b| b.objective).or(st.bound);
        let Some(lb) = self.recourse_bound(&st.supply, depth).map(|r| cost + r) else {
            return;
        };
        if let Some(ub) = incumbent {
            if lb > ub + tie_tol(ub) {
                return;
            }
        }
        if depth == self.edges {
            if let Some(c) = self.complete(&st.reserved, cost, &st.supply) {
                keep_best(best, c);
            }
            return;
        }
        for r in (0..=self.cap).rev() {
            st.reserved[depth] = r;
            for s in 0..self.scenarios {
                st.supply[s] += self.sim[depth][s] * r as f64;
            }
            self.descend(depth + 1, cost + self.stage_cost(depth, r), st, best);
            for s in 0..self.scenarios {
                st.supply[s] -= self.sim[depth][s] * r as f64;
            }
        }
        st.reserved[depth] = 0;
    }
}

struct Branch {
    reserved: Vec<u64>,
    supply: Vec<f64>,
    bound: Option<f64>,
}
