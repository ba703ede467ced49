//! Binary expansion of integer decisions.
//!
//! Each (provider, edge) pair owns a contiguous block of
//! `1 + K + scenarios * L` bits: the subscription bit, `K` reserved bits
//! (least significant first), then `L` on-demand bits per scenario. Blocks
//! are laid out provider-major. Slack mode appends `L` slack bits per
//! (provider, scenario) after all blocks.

use serde::{Deserialize, Serialize};

use crate::instance::ProblemInstance;
use crate::qubo::PenaltyMode;
use crate::sip::SipSolution;
use crate::{Error, Result};

/// Hard cap on bits per integer variable.
pub const MAX_BITS: u32 = 5;

/// `min(ceil(log2(cap + 1)), 5)`; zero bits for a zero cap.
pub fn bits_for(cap: u64) -> u32 {
    (u64::BITS - cap.leading_zeros()).min(MAX_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BitRole {
    Subscribe { w: usize, e: usize },
    Reserved { w: usize, e: usize, k: u32 },
    OnDemand { w: usize, e: usize, s: usize, l: u32 },
    Slack { w: usize, s: usize, l: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingScheme {
    pub msps: usize,
    pub edges: usize,
    pub scenarios: usize,
    pub k_bits: u32,
    pub l_bits: u32,
    /// Slack bits per (provider, scenario); zero outside slack mode.
    pub slack_bits: u32,
    pub num_vars: usize,
}

pub fn build_encoding(instance: &ProblemInstance) -> EncodingScheme {
    build_encoding_for(instance, PenaltyMode::Paper)
}

pub fn build_encoding_for(instance: &ProblemInstance, mode: PenaltyMode) -> EncodingScheme {
    let k_bits = bits_for(instance.max_reserved);
    let l_bits = bits_for(instance.on_demand_cap());
    let slack_bits = match mode {
        PenaltyMode::Paper => 0,
        PenaltyMode::Slack => l_bits,
    };
    EncodingScheme::new(instance.msps, instance.num_edges(), instance.num_scenarios(), k_bits, l_bits, slack_bits)
}

impl EncodingScheme {
    pub fn new(msps: usize, edges: usize, scenarios: usize, k_bits: u32, l_bits: u32, slack_bits: u32) -> Self {
        let block = 1 + k_bits as usize + scenarios * l_bits as usize;
        let num_vars = msps * edges * block + msps * scenarios * slack_bits as usize;
        EncodingScheme {
            msps,
            edges,
            scenarios,
            k_bits,
            l_bits,
            slack_bits,
            num_vars,
        }
    }

    fn block_len(&self) -> usize {
        1 + self.k_bits as usize + self.scenarios * self.l_bits as usize
    }

    fn base(&self, w: usize, e: usize) -> usize {
        (w * self.edges + e) * self.block_len()
    }

    pub fn max_reserved(&self) -> u64 {
        (1u64 << self.k_bits) - 1
    }

    pub fn max_on_demand(&self) -> u64 {
        (1u64 << self.l_bits) - 1
    }

    pub fn subscribe_index(&self, w: usize, e: usize) -> usize {
        self.base(w, e)
    }

    pub fn reserved_index(&self, w: usize, e: usize, k: u32) -> usize {
        self.base(w, e) + 1 + k as usize
    }

    pub fn on_demand_index(&self, w: usize, e: usize, s: usize, l: u32) -> usize {
        self.base(w, e) + 1 + self.k_bits as usize + s * self.l_bits as usize + l as usize
    }

    pub fn slack_index(&self, w: usize, s: usize, l: u32) -> usize {
        self.msps * self.edges * self.block_len() + (w * self.scenarios + s) * self.slack_bits as usize + l as usize
    }

    /// Every logical bit in global index order.
    pub fn layout(&self) -> Vec<BitRole> {
        let mut roles = Vec::with_capacity(self.num_vars);
        for w in 0..self.msps {
            for e in 0..self.edges {
                roles.push(BitRole::Subscribe { w, e });
                roles.extend((0..self.k_bits).map(|k| BitRole::Reserved { w, e, k }));
                for s in 0..self.scenarios {
                    roles.extend((0..self.l_bits).map(|l| BitRole::OnDemand { w, e, s, l }));
                }
            }
        }
        for w in 0..self.msps {
            for s in 0..self.scenarios {
                roles.extend((0..self.slack_bits).map(|l| BitRole::Slack { w, s, l }));
            }
        }
        roles
    }

    pub fn index_of(&self, role: BitRole) -> usize {
        match role {
            BitRole::Subscribe { w, e } => self.subscribe_index(w, e),
            BitRole::Reserved { w, e, k } => self.reserved_index(w, e, k),
            BitRole::OnDemand { w, e, s, l } => self.on_demand_index(w, e, s, l),
            BitRole::Slack { w, s, l } => self.slack_index(w, s, l),
        }
    }

    fn check_len(&self, bits: &[u8]) -> Result<()> {
        if bits.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                found: bits.len(),
            });
        }
        Ok(())
    }

    fn read_int(&self, bits: &[u8], first: usize, width: u32) -> u64 {
        (0..width as usize).fold(0, |acc, k| acc | ((bits[first + k] & 1) as u64) << k)
    }

    /// Slack value stored for one (provider, scenario), if slack bits exist.
    pub fn decode_slack(&self, bits: &[u8], w: usize, s: usize) -> u64 {
        if self.slack_bits == 0 {
            return 0;
        }
        self.read_int(bits, self.slack_index(w, s, 0), self.slack_bits)
    }
}

fn write_int(bits: &mut [u8], first: usize, width: u32, value: u64) {
    for k in 0..width as usize {
        bits[first + k] = ((value >> k) & 1) as u8;
    }
}

/// Encodes a solution; slack bits (if any) are left at zero.
pub fn encode_solution(sol: &SipSolution, enc: &EncodingScheme) -> Result<Vec<u8>> {
    let dims_ok = sol.subscribe.len() == enc.msps
        && sol.subscribe.iter().all(|r| r.len() == enc.edges)
        && sol.reserved.len() == enc.msps
        && sol.reserved.iter().all(|r| r.len() == enc.edges)
        && sol.on_demand.len() == enc.msps
        && sol.on_demand.iter().all(|r| r.len() == enc.edges && r.iter().all(|c| c.len() == enc.scenarios));
    if !dims_ok {
        return Err(Error::DimensionMismatch("solution does not match encoding".into()));
    }
    let mut bits = vec![0u8; enc.num_vars];
    for w in 0..enc.msps {
        for e in 0..enc.edges {
            bits[enc.subscribe_index(w, e)] = sol.subscribe[w][e] as u8;
            let r = sol.reserved[w][e];
            if r > enc.max_reserved() {
                return Err(Error::OutOfRange {
                    variable: format!("reserved[{w}][{e}]"),
                    value: r,
                    max: enc.max_reserved(),
                });
            }
            if enc.k_bits > 0 {
                write_int(&mut bits, enc.reserved_index(w, e, 0), enc.k_bits, r);
            }
            for s in 0..enc.scenarios {
                let o = sol.on_demand[w][e][s];
                if o > enc.max_on_demand() {
                    return Err(Error::OutOfRange {
                        variable: format!("on_demand[{w}][{e}][{s}]"),
                        value: o,
                        max: enc.max_on_demand(),
                    });
                }
                if enc.l_bits > 0 {
                    write_int(&mut bits, enc.on_demand_index(w, e, s, 0), enc.l_bits, o);
                }
            }
        }
    }
    Ok(bits)
}

/// Sets each slack register to the largest representable value not above the
/// integer surplus `floor(supply - demand)`, so exactly-covered feasible plans
/// keep a zero demand penalty.
pub fn fill_slack(bits: &mut [u8], sol: &SipSolution, instance: &ProblemInstance, enc: &EncodingScheme) -> Result<()> {
    enc.check_len(bits)?;
    if enc.slack_bits == 0 {
        return Ok(());
    }
    let max = (1u64 << enc.slack_bits) - 1;
    for w in 0..enc.msps {
        for (s, sc) in instance.scenarios.iter().enumerate() {
            let surplus = sol.supply(instance, w, s) - sc.demand[w] as f64;
            let z = if surplus > 0.0 {
                ((surplus + crate::sip::SUPPLY_TOL).floor() as u64).min(max)
            } else {
                0
            };
            write_int(bits, enc.slack_index(w, s, 0), enc.slack_bits, z);
        }
    }
    Ok(())
}

pub fn decode_bits(bits: &[u8], enc: &EncodingScheme) -> Result<SipSolution> {
    enc.check_len(bits)?;
    let mut sol = SipSolution::zeros(enc.msps, enc.edges, enc.scenarios);
    for w in 0..enc.msps {
        for e in 0..enc.edges {
            sol.subscribe[w][e] = bits[enc.subscribe_index(w, e)] & 1 == 1;
            if enc.k_bits > 0 {
                sol.reserved[w][e] = enc.read_int(bits, enc.reserved_index(w, e, 0), enc.k_bits);
            }
            if enc.l_bits > 0 {
                for s in 0..enc.scenarios {
                    sol.on_demand[w][e][s] = enc.read_int(bits, enc.on_demand_index(w, e, s, 0), enc.l_bits);
                }
            }
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn bit_width_rule() {
        assert_eq!(bits_for(31), 5);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(0), 0);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(4), 3);
        assert_eq!(bits_for(32), 5);
        assert_eq!(bits_for(1000), 5);
    }

    #[test]
    fn small_preset_dimension() {
        let enc = EncodingScheme::new(1, 5, 2, 5, 5, 0);
        assert_eq!(enc.num_vars, 80);
    }

    #[test]
    fn layout_is_a_bijection() {
        for slack in [0, 2] {
            let enc = EncodingScheme::new(2, 3, 2, 3, 2, slack);
            let layout = enc.layout();
            assert_eq!(layout.len(), enc.num_vars);
            for (i, role) in layout.iter().enumerate() {
                assert_eq!(enc.index_of(*role), i);
            }
            assert_eq!(layout.iter().collect::<BTreeSet<_>>().len(), enc.num_vars);
        }
    }

    #[test]
    fn reserved_bits_are_little_endian() {
        let enc = EncodingScheme::new(1, 1, 1, 3, 2, 0);
        let mut sol = SipSolution::zeros(1, 1, 1);
        sol.reserved[0][0] = 5;
        let bits = encode_solution(&sol, &enc).unwrap();
        let r: Vec<u8> = (0..3).map(|k| bits[enc.reserved_index(0, 0, k)]).collect();
        assert_eq!(r, vec![1, 0, 1]);
    }

    #[test]
    fn zero_solution_is_zero_bitstring() {
        let enc = EncodingScheme::new(2, 2, 2, 2, 2, 0);
        let bits = encode_solution(&SipSolution::zeros(2, 2, 2), &enc).unwrap();
        assert!(bits.iter().all(|&b| b == 0));
        assert_eq!(decode_bits(&bits, &enc).unwrap(), SipSolution::zeros(2, 2, 2));
    }

    #[test]
    fn out_of_range_names_the_variable() {
        let enc = EncodingScheme::new(1, 2, 2, 2, 1, 0);
        let mut sol = SipSolution::zeros(1, 2, 2);
        sol.on_demand[0][1][1] = 2;
        let err = encode_solution(&sol, &enc).unwrap_err();
        assert!(err.to_string().contains("on_demand[0][1][1]"), "{err}");
        sol.on_demand[0][1][1] = 0;
        sol.reserved[0][0] = 4;
        let err = encode_solution(&sol, &enc).unwrap_err();
        assert!(err.to_string().contains("reserved[0][0]"), "{err}");
    }

    #[test]
    fn decode_rejects_wrong_length() {
        let enc = EncodingScheme::new(1, 1, 1, 1, 1, 0);
        assert!(matches!(
            decode_bits(&[0, 1], &enc),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        ));
    }
}
