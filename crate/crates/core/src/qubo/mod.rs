//! Penalty-augmented quadratic energy over the encoded bits.

mod io;
mod ising;

pub use io::{read_ising, read_qubo, write_ising, write_qubo, QuboFile};
pub use ising::{spins_to_bits, to_ising, IsingProblem};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingScheme;
use crate::instance::ProblemInstance;
use crate::{Error, Result};

/// How the demand constraint enters the energy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMode {
    /// Squared deviation from demand. Over-supply is penalised too.
    #[default]
    Paper,
    /// Squared deviation after subtracting a binary slack register, which
    /// restores the `supply >= demand` reading.
    Slack,
}

impl fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyMode::Paper => "paper",
            PenaltyMode::Slack => "slack",
        })
    }
}

impl FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(PenaltyMode::Paper),
            "slack" => Ok(PenaltyMode::Slack),
            other => Err(Error::InvalidConfig(format!("unknown penalty mode `{other}`"))),
        }
    }
}

/// Upper-triangular QUBO: `offset + sum_i d_i x_i + sum_{i<j} q_ij x_i x_j`.
///
/// Diagonal and off-diagonal parts are stored apart; a symmetric adjacency
/// (CSR) is kept alongside for O(degree) flip deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    n: usize,
    offset: f64,
    diag: Vec<f64>,
    upper: Vec<(usize, usize, f64)>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl QuboMatrix {
    /// Sums duplicate `(i, j)` entries (in either order) and drops zeros.
    pub fn from_entries(n: usize, offset: f64, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut diag = vec![0.0; n];
        let mut off: HashMap<(usize, usize), f64> = HashMap::new();
        for (i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n} variables");
            if i == j {
                diag[i] += v;
            } else {
                *off.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
            }
        }
        let mut upper: Vec<_> = off.into_iter().filter(|e| e.1 != 0.0).map(|((i, j), v)| (i, j, v)).collect();
        upper.sort_unstable_by_key(|&(i, j, _)| (i, j));
        Self::from_parts(n, offset, diag, upper)
    }

    fn from_parts(n: usize, offset: f64, diag: Vec<f64>, upper: Vec<(usize, usize, f64)>) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &(i, j, _) in &upper {
            degree[i + 1] += 1;
            degree[j + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let row_start = degree;
        let mut fill = row_start.clone();
        let mut cols = vec![0; row_start[n]];
        let mut vals = vec![0.0; row_start[n]];
        for &(i, j, v) in &upper {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
            cols[fill[j]] = i;
            vals[fill[j]] = v;
            fill[j] += 1;
        }
        QuboMatrix {
            n,
            offset,
            diag,
            upper,
            row_start,
            cols,
            vals,
        }
    }

    /// Dense random QUBO with coefficients uniform in [-1, 1].
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                entries.push((i, j, rng.random_range(-1.0..=1.0)));
            }
        }
        Self::from_entries(n, 0.0, entries)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Strictly upper off-diagonal entries, sorted by `(i, j)`.
    pub fn upper(&self) -> &[(usize, usize, f64)] {
        &self.upper
    }

    /// All nonzero entries `i <= j` in row-major order, diagonal included.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.n + self.upper.len());
        let mut k = 0;
        for i in 0..self.n {
            if self.diag[i] != 0.0 {
                out.push((i, i, self.diag[i]));
            }
            while k < self.upper.len() && self.upper[k].0 == i {
                out.push(self.upper[k]);
                k += 1;
            }
        }
        out
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub(crate) fn neighbor_slices(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_start[i]..self.row_start[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn nnz(&self) -> usize {
        self.diag.iter().filter(|d| **d != 0.0).count() + self.upper.len()
    }

    pub fn energy(&self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.n);
        let mut e = self.offset;
        for (d, &b) in self.diag.iter().zip(bits) {
            if b != 0 {
                e += d;
            }
        }
        for &(i, j, v) in &self.upper {
            if bits[i] != 0 && bits[j] != 0 {
                e += v;
            }
        }
        e
    }

    /// `d_i + sum_j q_ij x_j`; flipping bit `i` changes the energy by
    /// `(1 - 2 x_i)` times this.
    pub fn local_field(&self, i: usize, bits: &[u8]) -> f64 {
        let (cols, vals) = self.neighbor_slices(i);
        self.diag[i]
            + cols
                .iter()
                .zip(vals)
                .filter(|(j, _)| bits[**j] != 0)
                .map(|(_, v)| v)
                .sum::<f64>()
    }

    pub fn flip_delta(&self, i: usize, bits: &[u8]) -> f64 {
        let f = self.local_field(i, bits);
        if bits[i] == 0 {
            f
        } else {
            -f
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.diag
            .iter()
            .chain(self.upper.iter().map(|e| &e.2))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_abs_nonzero(&self) -> Option<f64> {
        self.diag
            .iter()
            .chain(self.upper.iter().map(|e| &e.2))
            .map(|v| v.abs())
            .filter(|v| *v > 0.0)
            .min_by(f64::total_cmp)
    }
}

pub fn qubo_energy(q: &QuboMatrix, bits: &[u8]) -> Result<f64> {
    if bits.len() != q.num_vars() {
        return Err(Error::LengthMismatch {
            expected: q.num_vars(),
            found: bits.len(),
        });
    }
    Ok(q.energy(bits))
}

/// A QUBO built from an instance, with the encoding needed to read it back.
#[derive(Debug, Clone)]
pub struct QuboProblem {
    pub matrix: QuboMatrix,
    pub encoding: EncodingScheme,
    pub alpha: f64,
    pub beta: f64,
    pub mode: PenaltyMode,
}

impl QuboProblem {
    pub fn energy(&self, bits: &[u8]) -> Result<f64> {
        qubo_energy(&self.matrix, bits)
    }
}

struct Accumulator {
    diag: Vec<f64>,
    off: HashMap<(usize, usize), f64>,
    offset: f64,
}

impl Accumulator {
    fn linear(&mut self, i: usize, v: f64) {
        self.diag[i] += v;
    }

    fn pair(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_ne!(i, j);
        *self.off.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
    }

    /// Adds `weight * (target - sum_k a_k y_k)^2` with `y_k^2 = y_k`.
    fn squared_residual(&mut self, weight: f64, target: f64, terms: &[(usize, f64)]) {
        self.offset += weight * target * target;
        for (k, &(i, a)) in terms.iter().enumerate() {
            self.linear(i, weight * (a * a - 2.0 * target * a));
            for &(j, b) in &terms[k + 1..] {
                self.pair(i, j, 2.0 * weight * a * b);
            }
        }
    }
}

/// Builds `objective + alpha * linking + beta * demand` as a QUBO.
///
/// The linking penalty is `sum reserved * (1 - subscribe)`, written bitwise
/// as `sum_k 2^k b_k - sum_k 2^k b_k m`. It vanishes exactly when no
/// unsubscribed edge carries reserved bundles; the reserved register cannot
/// exceed `2^K - 1`, which is why the encoding cap must not exceed
/// `max_reserved`.
pub fn build_qubo(
    instance: &ProblemInstance,
    enc: &EncodingScheme,
    alpha: f64,
    beta: f64,
    mode: PenaltyMode,
) -> Result<QuboProblem> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidPenalty { alpha, beta });
    }
    if enc.msps != instance.msps || enc.edges != instance.num_edges() || enc.scenarios != instance.num_scenarios() {
        return Err(Error::DimensionMismatch("encoding does not match instance".into()));
    }
    let expected_slack = match mode {
        PenaltyMode::Paper => 0,
        PenaltyMode::Slack => enc.l_bits,
    };
    if enc.slack_bits != expected_slack {
        return Err(Error::EncodingMode(format!(
            "{mode} mode expects {expected_slack} slack bits, encoding has {}",
            enc.slack_bits
        )));
    }
    if enc.max_reserved() > instance.max_reserved {
        return Err(Error::UnsupportedCap {
            k_bits: enc.k_bits,
            max_reserved: instance.max_reserved,
        });
    }

    let mut acc = Accumulator {
        diag: vec![0.0; enc.num_vars],
        off: HashMap::new(),
        offset: 0.0,
    };

    for w in 0..enc.msps {
        for (e, edge) in instance.edges.iter().enumerate() {
            let m = enc.subscribe_index(w, e);
            acc.linear(m, edge.memb_cost);
            for k in 0..enc.k_bits {
                let b = enc.reserved_index(w, e, k);
                let weight = (1u64 << k) as f64;
                acc.linear(b, edge.resv_trans_cost * weight + alpha * weight);
                acc.pair(m, b, -alpha * weight);
            }
            for (s, sc) in instance.scenarios.iter().enumerate() {
                for l in 0..enc.l_bits {
                    let b = enc.on_demand_index(w, e, s, l);
                    acc.linear(b, sc.probability * edge.ondem_trans_cost * (1u64 << l) as f64);
                }
            }
        }
    }

    let mut terms = Vec::new();
    for w in 0..enc.msps {
        for (s, sc) in instance.scenarios.iter().enumerate() {
            terms.clear();
            for e in 0..enc.edges {
                let sim = sc.similarity[w][e];
                for k in 0..enc.k_bits {
                    terms.push((enc.reserved_index(w, e, k), sim * (1u64 << k) as f64));
                }
                for l in 0..enc.l_bits {
                    terms.push((enc.on_demand_index(w, e, s, l), (1u64 << l) as f64));
                }
            }
            for l in 0..enc.slack_bits {
                terms.push((enc.slack_index(w, s, l), -((1u64 << l) as f64)));
            }
            acc.squared_residual(beta, sc.demand[w] as f64, &terms);
        }
    }

    let mut upper: Vec<_> = acc.off.into_iter().filter(|e| e.1 != 0.0).map(|((i, j), v)| (i, j, v)).collect();
    upper.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let matrix = QuboMatrix::from_parts(enc.num_vars, acc.offset, acc.diag, upper);
    Ok(QuboProblem {
        matrix,
        encoding: enc.clone(),
        alpha,
        beta,
        mode,
    })
}
