//! Brute-force reference: the full `n`-qubit QAOA circuit without any
//! decomposition, and exhaustive classical minimisation.
//!
//! Gates are applied one at a time (one diagonal pass per edge and per bias,
//! one rotation per qubit) so this path shares nothing with the table-driven
//! simulator except the sign constants.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinAssignment};
use crate::sim::{ParamSchedule, COST_SIGN, MIXER_SIGN};

/// Default qubit cap for full-circuit evaluation.
pub const DEFAULT_ORACLE_QUBITS: usize = 20;

/// Largest model [`exhaustive_min`] accepts.
pub const MAX_EXHAUSTIVE_NODES: usize = 24;

fn spin(b: usize, i: usize) -> f64 {
    if (b >> i) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Final amplitudes of the full circuit on all `n` qubits.
pub fn full_state(
    model: &IsingModel,
    params: &ParamSchedule,
    cap: usize,
) -> Result<Vec<Complex64>> {
    let n = model.num_nodes();
    if n > cap {
        return Err(Error::resource("oracle circuit", n, cap));
    }
    let dim = 1usize << n;
    let mut amps = vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim];

    for (gamma, beta) in params.layers() {
        for e in model.edges() {
            for (b, a) in amps.iter_mut().enumerate() {
                let angle = COST_SIGN * gamma * e.weight * spin(b, e.u) * spin(b, e.v);
                *a *= Complex64::from_polar(1.0, angle);
            }
        }
        for (k, &h) in model.biases().iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= Complex64::from_polar(1.0, COST_SIGN * gamma * h * spin(b, k));
            }
        }
        let rx = [
            [
                Complex64::new(beta.cos(), 0.0),
                Complex64::new(0.0, MIXER_SIGN * beta.sin()),
            ],
            [
                Complex64::new(0.0, MIXER_SIGN * beta.sin()),
                Complex64::new(beta.cos(), 0.0),
            ],
        ];
        for q in 0..n {
            let bit = 1usize << q;
            for b in (0..dim).filter(|b| b & bit == 0) {
                let (x0, x1) = (amps[b], amps[b | bit]);
                amps[b] = rx[0][0] * x0 + rx[0][1] * x1;
                amps[b | bit] = rx[1][0] * x0 + rx[1][1] * x1;
            }
        }
    }
    Ok(amps)
}

/// `E_p = Σ_b |amp(b)|² C(b)` from the full circuit (offset added once).
pub fn full_expectation(model: &IsingModel, params: &ParamSchedule) -> Result<f64> {
    full_expectation_with_cap(model, params, DEFAULT_ORACLE_QUBITS)
}

pub fn full_expectation_with_cap(
    model: &IsingModel,
    params: &ParamSchedule,
    cap: usize,
) -> Result<f64> {
    if model.num_nodes() == 0 {
        return Ok(model.offset());
    }
    let amps = full_state(model, params, cap)?;
    let offset = model.offset();
    let energy: f64 = amps
        .iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * (model.cost_of_basis_index(b as u64) - offset))
        .sum();
    Ok(energy + offset)
}

/// `⟨Z_i Z_j⟩` (two anchors) or `⟨Z_k⟩` (one anchor) on the full circuit,
/// anchors given as global node ids.
pub fn full_term_expectation(
    model: &IsingModel,
    params: &ParamSchedule,
    anchors: &[usize],
) -> Result<f64> {
    if anchors.is_empty() || anchors.len() > 2 || anchors.iter().any(|&a| a >= model.num_nodes()) {
        return Err(Error::InvalidParameter(format!("bad anchors {anchors:?}")));
    }
    let amps = full_state(model, params, DEFAULT_ORACLE_QUBITS)?;
    Ok(amps
        .iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * anchors.iter().map(|&i| spin(b, i)).product::<f64>())
        .sum())
}

/// Exact minimiser over all `2^n` assignments. Ties go to the
/// lexicographically smallest bit string `b_0 b_1 … b_(n-1)` with `b_i = 0`
/// for `z_i = +1`.
pub fn exhaustive_min(model: &IsingModel) -> Result<(SpinAssignment, f64)> {
    let n = model.num_nodes();
    if n > MAX_EXHAUSTIVE_NODES {
        return Err(Error::resource(
            "exhaustive minimisation",
            n,
            MAX_EXHAUSTIVE_NODES,
        ));
    }
    // enumerate with node 0 as the most significant digit
    let reverse =
        |m: u64| -> u64 { (0..n).fold(0, |acc, i| acc | (((m >> (n - 1 - i)) & 1) << i)) };
    let mut best = (0u64, f64::INFINITY);
    for m in 0..(1u64 << n) {
        let index = reverse(m);
        let cost = model.cost_of_basis_index(index);
        if cost < best.1 {
            best = (index, cost);
        }
    }
    Ok((SpinAssignment::from_basis_index(n, best.0), best.1))
}
