//! Statevector simulation of light-cone QAOA circuits.
//!
//! Basis index `b` encodes spins bitwise: bit `i` clear is `z_i = +1`, set is
//! `z_i = -1`. The cost layer is one diagonal pass over a precomputed table of
//! `c(b)`; the mixer is a product of single-qubit X rotations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lightcone::{Anchor, AnchoredSubgraph};

/// Default qubit cap: 2^26 amplitudes of 16 bytes is 1 GiB.
pub const DEFAULT_MAX_QUBITS: usize = 26;

/// Sign of the cost-layer exponent: the layer is `exp(COST_SIGN · iγC)`.
pub const COST_SIGN: f64 = -1.0;

/// Sign of the mixer exponent: each qubit gets `exp(MIXER_SIGN · iβX)`.
pub const MIXER_SIGN: f64 = 1.0;

/// Angles for `p` alternating cost/mixer layers, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl ParamSchedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidParameter("depth p must be at least 1".into()));
        }
        if gammas.len() != betas.len() {
            return Err(Error::InvalidParameter(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if let Some(x) = gammas.iter().chain(&betas).find(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                value: *x,
                context: "angle".into(),
            });
        }
        Ok(Self { gammas, betas })
    }

    /// All-zero angles at depth `p`.
    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p], vec![0.0; p])
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `(γ_ℓ, β_ℓ)` per layer.
    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gammas.iter().copied().zip(self.betas.iter().copied())
    }

    /// Flat `[γ_1..γ_p, β_1..β_p]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "odd parameter vector length".into(),
            ));
        }
        let p = x.len() / 2;
        Self::new(x[..p].to_vec(), x[p..].to_vec())
    }
}

/// Dense `2^N` amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// Returns a resource error if `qubits` exceeds `cap`.
pub fn check_qubits(what: &str, qubits: usize, cap: usize) -> Result<()> {
    if qubits > cap {
        Err(Error::resource(what, qubits, cap))
    } else {
        Ok(())
    }
}

impl StateVector {
    /// `|+⟩^⊗N`.
    pub fn init_plus(num_qubits: usize, cap: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidParameter(
                "state needs at least one qubit".into(),
            ));
        }
        check_qubits("state vector", num_qubits, cap)?;
        let dim = 1usize << num_qubits;
        let amp = (dim as f64).sqrt().recip();
        Ok(Self {
            num_qubits,
            amps: vec![Complex64::new(amp, 0.0); dim],
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        Ok(Self {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies amplitude `b` by `exp(COST_SIGN · iγ·c(b))`.
    pub fn apply_cost_table(&mut self, table: &CostTable, gamma: f64) -> Result<()> {
        if table.values.len() != self.amps.len() {
            return Err(Error::InvalidParameter(format!(
                "cost table covers {} basis states, state has {}",
                table.values.len(),
                self.amps.len()
            )));
        }
        let scale = COST_SIGN * gamma;
        for (a, &c) in self.amps.iter_mut().zip(&table.values) {
            let (s, co) = (scale * c).sin_cos();
            *a *= Complex64::new(co, s);
        }
        Ok(())
    }

    /// `exp(MIXER_SIGN · iβX)` on every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = (MIXER_SIGN * beta).sin_cos();
        let dim = self.amps.len();
        for q in 0..self.num_qubits {
            let stride = 1usize << q;
            for base in (0..dim).step_by(stride << 1) {
                let (lo, hi) = self.amps[base..base + (stride << 1)].split_at_mut(stride);
                for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x0, x1) = (*a0, *a1);
                    // c·x + i·s·y
                    *a0 = Complex64::new(c * x0.re - s * x1.im, c * x0.im + s * x1.re);
                    *a1 = Complex64::new(c * x1.re - s * x0.im, c * x1.im + s * x0.re);
                }
            }
        }
    }

    /// `⟨Z_i Z_j⟩` or `⟨Z_k⟩` at the anchor, as `P(+1) − P(−1)`.
    pub fn term_expectation(&self, anchor: Anchor) -> Result<f64> {
        let mask = match anchor {
            Anchor::Node(k) => {
                self.check_index(k)?;
                1usize << k
            }
            Anchor::Pair(i, j) => {
                self.check_index(i)?;
                self.check_index(j)?;
                (1usize << i) | (1usize << j)
            }
        };
        let (mut plus, mut minus) = (0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            if (b & mask).count_ones() % 2 == 0 {
                plus += a.norm_sqr();
            } else {
                minus += a.norm_sqr();
            }
        }
        Ok(plus - minus)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.num_qubits {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "anchor index {i} out of range for {} qubits",
                self.num_qubits
            )))
        }
    }
}

/// Diagonal of the subgraph cost operator, `c(b)` for every basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    values: Vec<f64>,
}

impl CostTable {
    pub fn new(sub: &AnchoredSubgraph) -> Self {
        let dim = 1usize << sub.num_qubits();
        let mut values = vec![0.0; dim];
        for e in &sub.edges {
            let w = e.weight;
            for (b, v) in values.iter_mut().enumerate() {
                let parity = ((b >> e.a) ^ (b >> e.b)) & 1;
                *v += if parity == 0 { w } else { -w };
            }
        }
        for &(k, h) in &sub.biases {
            for (b, v) in values.iter_mut().enumerate() {
                *v += if (b >> k) & 1 == 0 { h } else { -h };
            }
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Cost layer for `sub` at angle `gamma`.
pub fn apply_cost_layer(state: &mut StateVector, sub: &AnchoredSubgraph, gamma: f64) -> Result<()> {
    if state.num_qubits() != sub.num_qubits() {
        return Err(Error::InvalidParameter(format!(
            "state has {} qubits, subgraph has {} nodes",
            state.num_qubits(),
            sub.num_qubits()
        )));
    }
    state.apply_cost_table(&CostTable::new(sub), gamma)
}

/// Runs all `p` layers on `|+⟩` and returns the final state.
pub fn simulate_state(
    sub: &AnchoredSubgraph,
    params: &ParamSchedule,
    cap: usize,
) -> Result<StateVector> {
    check_qubits("light-cone circuit", sub.num_qubits(), cap)?;
    let mut state = StateVector::init_plus(sub.num_qubits(), cap)?;
    let table = CostTable::new(sub);
    for (gamma, beta) in params.layers() {
        state.apply_cost_table(&table, gamma)?;
        state.apply_mixer(beta);
    }
    Ok(state)
}

/// Term expectation at the subgraph's anchor.
pub fn simulate_term(sub: &AnchoredSubgraph, params: &ParamSchedule, cap: usize) -> Result<f64> {
    simulate_state(sub, params, cap)?.term_expectation(sub.anchor)
}
