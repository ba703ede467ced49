use super::QuboMatrix;

/// Spin form `constant + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j` with
/// `s_i in {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    pub h: Vec<f64>,
    /// `(i, j, J_ij)` with `i < j`, sorted.
    pub couplings: Vec<(usize, usize, f64)>,
    pub constant: f64,
}

impl IsingProblem {
    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        debug_assert_eq!(spins.len(), self.h.len());
        let mut e = self.constant;
        for (h, &s) in self.h.iter().zip(spins) {
            e += h * s as f64;
        }
        for &(i, j, v) in &self.couplings {
            e += v * (spins[i] * spins[j]) as f64;
        }
        e
    }
}

/// Substitutes `x = (1 + s) / 2`:
///
/// * `d x_i` becomes `d/2 + (d/2) s_i`,
/// * `q x_i x_j` becomes `q/4 (1 + s_i + s_j + s_i s_j)`.
pub fn to_ising(q: &QuboMatrix) -> IsingProblem {
    let mut h: Vec<f64> = q.diag().iter().map(|d| d / 2.0).collect();
    let mut constant = q.offset() + q.diag().iter().map(|d| d / 2.0).sum::<f64>();
    let mut couplings = Vec::with_capacity(q.upper().len());
    for &(i, j, v) in q.upper() {
        let quarter = v / 4.0;
        h[i] += quarter;
        h[j] += quarter;
        constant += quarter;
        couplings.push((i, j, quarter));
    }
    IsingProblem { h, couplings, constant }
}

/// Maps spins back to bits, `+1 -> 1`.
pub fn spins_to_bits(spins: &[i8]) -> Vec<u8> {
    spins.iter().map(|&s| (s > 0) as u8).collect()
}
