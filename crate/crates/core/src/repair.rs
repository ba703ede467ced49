//! Turning raw solver bitstrings into feasible plans.

use serde::{Deserialize, Serialize};

use crate::encoding::{decode_bits, EncodingScheme};
use crate::instance::ProblemInstance;
use crate::sip::{bundles_needed, check_feasibility, FeasibilityReport, SipSolution};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairOutcome {
    /// Solution exactly as decoded.
    pub raw: SipSolution,
    pub solution: SipSolution,
    pub before: FeasibilityReport,
    pub after: FeasibilityReport,
}

impl RepairOutcome {
    pub fn changed(&self) -> bool {
        self.raw != self.solution
    }
}

/// Decodes `bits` and restores feasibility:
///
/// * an edge holding reserved bundles without a membership gets one, and
///   reserved counts above `max_reserved` are clipped;
/// * any remaining demand shortfall is bought on demand, cheapest edge first
///   (lowest index among equal prices), never pushing one variable above the
///   instance's on-demand cap.
pub fn decode_and_repair(bits: &[u8], instance: &ProblemInstance, enc: &EncodingScheme) -> Result<RepairOutcome> {
    let raw = decode_bits(bits, enc)?;
    let before = check_feasibility(instance, &raw)?;
    let solution = repair(instance, raw.clone());
    let after = check_feasibility(instance, &solution)?;
    Ok(RepairOutcome {
        raw,
        solution,
        before,
        after,
    })
}

pub fn repair(instance: &ProblemInstance, mut sol: SipSolution) -> SipSolution {
    for w in 0..instance.msps {
        for e in 0..instance.num_edges() {
            if sol.reserved[w][e] > 0 {
                sol.subscribe[w][e] = true;
                sol.reserved[w][e] = sol.reserved[w][e].min(instance.max_reserved);
            }
        }
    }

    let cap = instance.on_demand_cap();
    let mut order: Vec<usize> = (0..instance.num_edges()).collect();
    order.sort_by(|&a, &b| {
        instance.edges[a]
            .ondem_trans_cost
            .total_cmp(&instance.edges[b].ondem_trans_cost)
            .then(a.cmp(&b))
    });
    for w in 0..instance.msps {
        for (s, sc) in instance.scenarios.iter().enumerate() {
            let mut need = bundles_needed(sc.demand[w] as f64 - sol.supply(instance, w, s));
            for &e in &order {
                if need == 0 {
                    break;
                }
                let slot = &mut sol.on_demand[w][e][s];
                let add = need.min(cap.saturating_sub(*slot));
                *slot += add;
                need -= add;
            }
            // Unreachable: one edge with room can always absorb the shortfall.
            debug_assert_eq!(need, 0);
        }
    }
    sol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{build_encoding, encode_solution};
    use crate::instance::{EdgeDevice, Scenario};
    use crate::sip::evaluate_objective;

    fn two_edges() -> ProblemInstance {
        let edge = |id, c: f64| EdgeDevice {
            id,
            memb_cost: 10.0,
            resv_trans_cost: 1.0,
            ondem_trans_cost: c,
        };
        ProblemInstance::new(
            1,
            vec![edge(0, 6.0), edge(1, 5.0)],
            vec![
                Scenario {
                    id: 0,
                    probability: 0.5,
                    demand: vec![3],
                    similarity: vec![vec![1.0, 1.0]],
                },
                Scenario {
                    id: 1,
                    probability: 0.5,
                    demand: vec![1],
                    similarity: vec![vec![0.5, 0.5]],
                },
            ],
            3,
            0,
        )
        .unwrap()
    }

    #[test]
    fn feasible_input_is_untouched() {
        let inst = two_edges();
        let enc = build_encoding(&inst);
        let mut sol = SipSolution::zeros_for(&inst);
        sol.on_demand[0][1] = vec![3, 1];
        let out = decode_and_repair(&encode_solution(&sol, &enc).unwrap(), &inst, &enc).unwrap();
        assert!(out.before.feasible && out.after.feasible);
        assert!(!out.changed());
        assert_eq!(out.solution, sol);
    }

    #[test]
    fn missing_membership_is_paid() {
        let inst = two_edges();
        let enc = build_encoding(&inst);
        let mut sol = SipSolution::zeros_for(&inst);
        sol.reserved[0][0] = 2;
        sol.on_demand[0][0] = vec![1, 0];
        let out = decode_and_repair(&encode_solution(&sol, &enc).unwrap(), &inst, &enc).unwrap();
        assert_eq!(out.before.c1_violations, vec![(0, 0)]);
        assert!(out.solution.subscribe[0][0]);
        assert!(out.after.feasible);
    }

    #[test]
    fn shortfall_goes_to_cheapest_edge() {
        let inst = two_edges();
        let enc = build_encoding(&inst);
        let sol = SipSolution::zeros_for(&inst);
        let out = decode_and_repair(&encode_solution(&sol, &enc).unwrap(), &inst, &enc).unwrap();
        assert_eq!(out.before.c2_violations.len(), 2);
        assert_eq!(out.solution.on_demand[0][1], vec![3, 1]);
        assert_eq!(out.solution.on_demand[0][0], vec![0, 0]);
        assert!(out.after.feasible);
        // 0.5 * 3 * 5 + 0.5 * 1 * 5
        assert_eq!(evaluate_objective(&inst, &out.solution).unwrap().total, 10.0);
    }

    #[test]
    fn fractional_supply_rounds_up() {
        let inst = two_edges();
        let mut sol = SipSolution::zeros_for(&inst);
        sol.subscribe[0][0] = true;
        sol.reserved[0][0] = 1;
        sol.on_demand[0][1] = vec![2, 0];
        // Scenario 1 gets 0.5 from the reservation and needs one more bundle.
        let fixed = repair(&inst, sol);
        assert_eq!(fixed.on_demand[0][1], vec![2, 1]);
        assert!(check_feasibility(&inst, &fixed).unwrap().feasible);
    }

    #[test]
    fn surplus_on_demand_is_kept() {
        let inst = two_edges();
        let mut sol = SipSolution::zeros_for(&inst);
        sol.on_demand[0][1] = vec![0, 7];
        let fixed = repair(&inst, sol);
        assert_eq!(fixed.on_demand[0][1], vec![3, 7]);
    }
}
