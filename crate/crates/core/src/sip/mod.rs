//! The two-stage subscription model: objective, constraints and an exact
//! solver for small instances.

mod exact;

pub use exact::{solve_exact, ExactBounds, ExactSolution, DEFAULT_BUDGET};

use serde::{Deserialize, Serialize};

use crate::instance::ProblemInstance;
use crate::{Error, Result};

/// Slack allowed on the demand test, since similarity is real-valued.
pub const SUPPLY_TOL: f64 = 1e-9;

/// First- and second-stage decisions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SipSolution {
    /// `subscribe[w][e]`
    pub subscribe: Vec<Vec<bool>>,
    /// `reserved[w][e]`
    pub reserved: Vec<Vec<u64>>,
    /// `on_demand[w][e][s]`
    pub on_demand: Vec<Vec<Vec<u64>>>,
}

impl SipSolution {
    pub fn zeros(msps: usize, edges: usize, scenarios: usize) -> Self {
        SipSolution {
            subscribe: vec![vec![false; edges]; msps],
            reserved: vec![vec![0; edges]; msps],
            on_demand: vec![vec![vec![0; scenarios]; edges]; msps],
        }
    }

    pub fn zeros_for(instance: &ProblemInstance) -> Self {
        Self::zeros(instance.msps, instance.num_edges(), instance.num_scenarios())
    }

    /// Row-major decision vector: subscribe, then reserved, then on-demand.
    /// Ties between equally good solutions are broken on this vector.
    pub fn decision_vector(&self) -> Vec<u64> {
        let subscribe = self.subscribe.iter().flatten().map(|&m| m as u64);
        let reserved = self.reserved.iter().flatten().copied();
        let on_demand = self.on_demand.iter().flatten().flatten().copied();
        subscribe.chain(reserved).chain(on_demand).collect()
    }

    pub fn check_dims(&self, instance: &ProblemInstance) -> Result<()> {
        let (w, e, s) = (instance.msps, instance.num_edges(), instance.num_scenarios());
        let ok = self.subscribe.len() == w
            && self.reserved.len() == w
            && self.on_demand.len() == w
            && self.subscribe.iter().all(|r| r.len() == e)
            && self.reserved.iter().all(|r| r.len() == e)
            && self
                .on_demand
                .iter()
                .all(|r| r.len() == e && r.iter().all(|c| c.len() == s));
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "solution does not match an instance with {w} providers, {e} edges, {s} scenarios"
            )))
        }
    }

    /// Effective supply `sum_e reserved * similarity + sum_e on_demand` for one
    /// provider in one scenario.
    pub fn supply(&self, instance: &ProblemInstance, w: usize, s: usize) -> f64 {
        let sim = &instance.scenarios[s].similarity[w];
        (0..instance.num_edges())
            .map(|e| self.reserved[w][e] as f64 * sim[e] + self.on_demand[w][e][s] as f64)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub membership_cost: f64,
    pub reserved_cost: f64,
    pub expected_ondemand_cost: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `(msp, edge)` pairs with `reserved > subscribe * max_reserved`.
    pub c1_violations: Vec<(usize, usize)>,
    /// `(msp, scenario, shortfall)` triples where supply misses demand.
    pub c2_violations: Vec<(usize, usize, f64)>,
    pub feasible: bool,
}

pub fn evaluate_objective(instance: &ProblemInstance, sol: &SipSolution) -> Result<ObjectiveBreakdown> {
    sol.check_dims(instance)?;
    let mut membership_cost = 0.0;
    let mut reserved_cost = 0.0;
    for w in 0..instance.msps {
        for (e, edge) in instance.edges.iter().enumerate() {
            if sol.subscribe[w][e] {
                membership_cost += edge.memb_cost;
            }
            reserved_cost += sol.reserved[w][e] as f64 * edge.resv_trans_cost;
        }
    }
    let mut expected_ondemand_cost = 0.0;
    for (s, sc) in instance.scenarios.iter().enumerate() {
        let mut scenario_cost = 0.0;
        for w in 0..instance.msps {
            for (e, edge) in instance.edges.iter().enumerate() {
                scenario_cost += sol.on_demand[w][e][s] as f64 * edge.ondem_trans_cost;
            }
        }
        expected_ondemand_cost += sc.probability * scenario_cost;
    }
    Ok(ObjectiveBreakdown {
        membership_cost,
        reserved_cost,
        expected_ondemand_cost,
        total: membership_cost + reserved_cost + expected_ondemand_cost,
    })
}

pub fn check_feasibility(instance: &ProblemInstance, sol: &SipSolution) -> Result<FeasibilityReport> {
    sol.check_dims(instance)?;
    let mut c1_violations = Vec::new();
    for w in 0..instance.msps {
        for e in 0..instance.num_edges() {
            let cap = if sol.subscribe[w][e] { instance.max_reserved } else { 0 };
            if sol.reserved[w][e] > cap {
                c1_violations.push((w, e));
            }
        }
    }
    let mut c2_violations = Vec::new();
    for w in 0..instance.msps {
        for (s, sc) in instance.scenarios.iter().enumerate() {
            let demand = sc.demand[w] as f64;
            let supplied = sol.supply(instance, w, s);
            if supplied + SUPPLY_TOL < demand {
                c2_violations.push((w, s, demand - supplied));
            }
        }
    }
    let feasible = c1_violations.is_empty() && c2_violations.is_empty();
    Ok(FeasibilityReport {
        c1_violations,
        c2_violations,
        feasible,
    })
}

/// Unweighted penalty values of a solution under the quadratic embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyTerms {
    /// `sum_{w,e} reserved * (1 - subscribe)`
    pub linking: f64,
    /// `sum_{w,s} (demand - supply)^2`
    pub demand: f64,
}

pub fn penalty_terms(instance: &ProblemInstance, sol: &SipSolution) -> Result<PenaltyTerms> {
    sol.check_dims(instance)?;
    let mut linking = 0.0;
    for w in 0..instance.msps {
        for e in 0..instance.num_edges() {
            if !sol.subscribe[w][e] {
                linking += sol.reserved[w][e] as f64;
            }
        }
    }
    let mut demand = 0.0;
    for w in 0..instance.msps {
        for (s, sc) in instance.scenarios.iter().enumerate() {
            let r = sc.demand[w] as f64 - sol.supply(instance, w, s);
            demand += r * r;
        }
    }
    Ok(PenaltyTerms { linking, demand })
}

/// Smallest integer number of bundles that closes a real-valued shortfall.
pub(crate) fn bundles_needed(shortfall: f64) -> u64 {
    if shortfall <= SUPPLY_TOL {
        0
    } else {
        (shortfall - SUPPLY_TOL).ceil() as u64
    }
}
