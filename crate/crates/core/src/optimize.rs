//! Outer-loop angle optimisation: multi-start Nelder–Mead over the
//! `2p`-dimensional `(γ, β)` space.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::mean_value::{EngineConfig, PreparedModel};
use crate::sim::ParamSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_evals_per_restart: usize,
    /// Stop a restart once the simplex energies span less than this.
    pub f_tolerance: f64,
    pub engine: EngineConfig,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            restarts: 4,
            seed: 0,
            max_evals_per_restart: 400,
            f_tolerance: 1e-12,
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    /// `[γ_1..γ_p, β_1..β_p]`
    pub params: Vec<f64>,
    pub energy: f64,
    /// Running minimum over all evaluations so far.
    pub best_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub params: ParamSchedule,
    pub energy: f64,
    pub trace: Vec<TraceEntry>,
}

/// Minimises `E_p` starting from `restarts` seeded points with
/// `γ ∈ [0, π)` and `β ∈ [0, π/2)`.
pub fn optimize(
    model: &IsingModel,
    depth: usize,
    config: &OptimizeConfig,
) -> Result<OptimizeResult> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth p must be at least 1".into()));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    let prepared = PreparedModel::new(model, depth, &config.engine)?;
    if prepared.num_terms() == 0 {
        return Ok(OptimizeResult {
            params: ParamSchedule::zeros(depth)?,
            energy: model.offset(),
            trace: Vec::new(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts: Vec<Vec<f64>> = (0..config.restarts)
        .map(|_| {
            let mut x: Vec<f64> = (0..depth).map(|_| rng.gen_range(0.0..PI)).collect();
            x.extend((0..depth).map(|_| rng.gen_range(0.0..PI / 2.0)));
            x
        })
        .collect();
    let mut steps = vec![PI / 8.0; depth];
    steps.extend(vec![PI / 16.0; depth]);

    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;

    for (restart, x0) in starts.into_iter().enumerate() {
        let mut objective = |x: &[f64]| -> Result<f64> {
            let energy = prepared.energy(&ParamSchedule::from_slice(x)?)?;
            let best_energy = trace.last().map_or(energy, |t| t.best_energy.min(energy));
            trace.push(TraceEntry {
                restart,
                params: x.to_vec(),
                energy,
                best_energy,
            });
            Ok(energy)
        };
        let (x, fx) = nelder_mead(
            &mut objective,
            &x0,
            &steps,
            config.max_evals_per_restart,
            config.f_tolerance,
        )?;
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }

    let (x, energy) = best.expect("at least one restart ran");
    Ok(OptimizeResult {
        params: ParamSchedule::from_slice(&x)?,
        energy,
        trace,
    })
}

/// Plain Nelder–Mead (reflection 1, expansion 2, contraction ½, shrink ½).
/// Returns the best vertex once the simplex values span less than `f_tol`
/// or `max_evals` evaluations have been spent.
pub fn nelder_mead<F>(
    f: &mut F,
    x0: &[f64],
    steps: &[f64],
    max_evals: usize,
    f_tol: f64,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let fx = eval(&x, &mut evals)?;
        simplex.push((x, fx));
    }

    let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 < f_tol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v.0[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].0.clone();

        let reflected = along(&centroid, &worst, -1.0);
        let fr = eval(&reflected, &mut evals)?;
        if fr < simplex[0].1 {
            let expanded = along(&centroid, &worst, -2.0);
            let fe = eval(&expanded, &mut evals)?;
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[n].1 {
            let c = along(&centroid, &reflected, 0.5);
            let fc = eval(&c, &mut evals)?;
            (c, fc)
        } else {
            let c = along(&centroid, &worst, 0.5);
            let fc = eval(&c, &mut evals)?;
            (c, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = along(&best, &vertex.0, 0.5);
            let fx = eval(&x, &mut evals)?;
            *vertex = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    Ok((x, fx))
}
