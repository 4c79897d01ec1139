//! `E_p(γ, β) = offset + Σ w_ij ⟨Z_i Z_j⟩ + Σ h_k ⟨Z_k⟩`, one light-cone
//! simulation per term.
//!
//! Every term's light cone is relabelled into canonical order before it is
//! simulated. Two terms share a simulation only when their canonical
//! relabellings are structurally identical, so a cached value is exactly the
//! value the term would have produced on its own. Term values are reduced
//! sequentially in decomposition order, which makes the energy bit-identical
//! across worker counts and dedup settings.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::lightcone::{
    canonical_form, canonical_key, decompose, AnchoredSubgraph, CanonicalForm, CanonicalKey,
    TermId, TermKind, DEFAULT_LEAF_BUDGET,
};
use crate::sim::{simulate_term, ParamSchedule, DEFAULT_MAX_QUBITS};

/// Only sequential left-to-right reduction is offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub worker_count: usize,
    pub dedup: bool,
    pub max_subgraph_qubits: usize,
    pub reduction: Reduction,
    /// Search budget for canonical relabelling.
    pub leaf_budget: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            worker_count: default_workers(),
            dedup: true,
            max_subgraph_qubits: DEFAULT_MAX_QUBITS,
            reduction: Reduction::Sequential,
            leaf_budget: DEFAULT_LEAF_BUDGET,
        }
    }
}

impl EngineConfig {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.worker_count = workers;
        self
    }

    pub fn with_dedup(mut self, dedup: bool) -> Self {
        self.dedup = dedup;
        self
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermResult {
    pub term: TermId,
    pub expectation: f64,
    pub coefficient: f64,
    pub subgraph_qubits: usize,
    pub cache_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueReport {
    pub energy: f64,
    pub offset: f64,
    pub terms: Vec<TermResult>,
    pub distinct_classes: usize,
    pub max_subgraph_qubits: usize,
    #[serde(rename = "wall_time_s", with = "seconds")]
    pub wall_time: Duration,
    pub worker_count: usize,
}

mod seconds {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

/// A model decomposed at a fixed depth, ready to be evaluated at many angle
/// sets. Construction does all parameter-independent work.
pub struct PreparedModel {
    offset: f64,
    depth: usize,
    terms: Vec<TermId>,
    term_qubits: Vec<usize>,
    term_job: Vec<usize>,
    term_hit: Vec<bool>,
    jobs: Vec<AnchoredSubgraph>,
    // job indices, largest circuits first
    schedule: Vec<usize>,
    config: EngineConfig,
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl PreparedModel {
    pub fn new(model: &IsingModel, depth: usize, config: &EngineConfig) -> Result<Self> {
        if config.worker_count == 0 {
            return Err(Error::InvalidParameter(
                "worker_count must be at least 1".into(),
            ));
        }
        let pool = if config.worker_count > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.worker_count)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Some(Arc::new(pool))
        } else {
            None
        };

        let decomposed = decompose(model, depth)?;
        for t in &decomposed {
            let q = t.subgraph.num_qubits();
            if q > config.max_subgraph_qubits {
                return Err(Error::resource(
                    format!("light cone of term {}", describe(&t.id)),
                    q,
                    config.max_subgraph_qubits,
                ));
            }
        }

        let budget = config.leaf_budget;
        let canon = |t: &crate::lightcone::Term| -> (CanonicalForm, Option<CanonicalKey>) {
            let key = config.dedup.then(|| canonical_key(&t.subgraph));
            (canonical_form(&t.subgraph, budget), key)
        };
        let forms: Vec<(CanonicalForm, Option<CanonicalKey>)> = match &pool {
            Some(pool) => pool.install(|| decomposed.par_iter().map(canon).collect()),
            None => decomposed.iter().map(canon).collect(),
        };

        let mut terms = Vec::with_capacity(decomposed.len());
        let mut term_qubits = Vec::with_capacity(decomposed.len());
        let mut term_job = Vec::with_capacity(decomposed.len());
        let mut term_hit = Vec::with_capacity(decomposed.len());
        let mut job_forms: Vec<CanonicalForm> = Vec::new();
        let mut buckets: HashMap<CanonicalKey, Vec<usize>> = HashMap::new();

        for (t, (form, key)) in decomposed.iter().zip(forms) {
            terms.push(t.id);
            term_qubits.push(t.subgraph.num_qubits());
            let existing = key.as_ref().and_then(|k| {
                buckets
                    .get(k)?
                    .iter()
                    .copied()
                    .find(|&j| job_forms[j].same_structure(&form))
            });
            match existing {
                Some(j) => {
                    term_job.push(j);
                    term_hit.push(true);
                }
                None => {
                    let j = job_forms.len();
                    if let Some(k) = key {
                        buckets.entry(k).or_default().push(j);
                    }
                    job_forms.push(form);
                    term_job.push(j);
                    term_hit.push(false);
                }
            }
        }

        let jobs: Vec<AnchoredSubgraph> = job_forms.into_iter().map(|f| f.subgraph).collect();
        let mut schedule: Vec<usize> = (0..jobs.len()).collect();
        schedule.sort_by_key(|&j| std::cmp::Reverse(jobs[j].num_qubits()));

        Ok(Self {
            offset: model.offset(),
            depth,
            terms,
            term_qubits,
            term_job,
            term_hit,
            jobs,
            schedule,
            config: config.clone(),
            pool,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Number of circuits simulated per evaluation.
    pub fn distinct_classes(&self) -> usize {
        self.jobs.len()
    }

    pub fn max_subgraph_qubits(&self) -> usize {
        self.term_qubits.iter().copied().max().unwrap_or(0)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    fn job_values(&self, params: &ParamSchedule) -> Result<Vec<f64>> {
        if params.p() != self.depth {
            return Err(Error::InvalidParameter(format!(
                "schedule has depth {} but the model was prepared for p = {}",
                params.p(),
                self.depth
            )));
        }
        let cap = self.config.max_subgraph_qubits;
        let run = |&j: &usize| simulate_term(&self.jobs[j], params, cap).map(|v| (j, v));
        let results: Vec<(usize, f64)> = match &self.pool {
            Some(pool) => pool.install(|| {
                self.schedule
                    .par_iter()
                    .with_max_len(1)
                    .map(run)
                    .collect::<Result<_>>()
            })?,
            None => self.schedule.iter().map(run).collect::<Result<_>>()?,
        };
        let mut values = vec![0.0; self.jobs.len()];
        for (j, v) in results {
            values[j] = v;
        }
        Ok(values)
    }

    fn reduce(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (t, &j) in self.terms.iter().zip(&self.term_job) {
            acc += t.coefficient * values[j];
        }
        self.offset + acc
    }

    /// Energy only.
    pub fn energy(&self, params: &ParamSchedule) -> Result<f64> {
        Ok(self.reduce(&self.job_values(params)?))
    }

    /// Full per-term report. `wall_time` covers this evaluation only.
    pub fn evaluate(&self, params: &ParamSchedule) -> Result<MeanValueReport> {
        let start = Instant::now();
        let values = self.job_values(params)?;
        let energy = self.reduce(&values);
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| TermResult {
                term: *t,
                expectation: values[self.term_job[i]],
                coefficient: t.coefficient,
                subgraph_qubits: self.term_qubits[i],
                cache_hit: self.term_hit[i],
            })
            .collect();
        Ok(MeanValueReport {
            energy,
            offset: self.offset,
            terms,
            distinct_classes: self.jobs.len(),
            max_subgraph_qubits: self.max_subgraph_qubits(),
            wall_time: start.elapsed(),
            worker_count: self.config.worker_count,
        })
    }
}

fn describe(id: &TermId) -> String {
    match id.kind {
        TermKind::Edge { i, j } => format!("Z{i}Z{j}"),
        TermKind::Node { k } => format!("Z{k}"),
    }
}

/// Decomposes, simulates and reduces in one call. `wall_time` covers the
/// whole computation including decomposition.
pub fn expectation(
    model: &IsingModel,
    params: &ParamSchedule,
    config: &EngineConfig,
) -> Result<MeanValueReport> {
    let start = Instant::now();
    let prepared = PreparedModel::new(model, params.p(), config)?;
    let mut report = prepared.evaluate(params)?;
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Axis layout for [`grid_scan`]: `steps` evenly spaced points from `min` to
/// `max` inclusive (a single point sits at `min`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    self.min * (1.0 - t) + self.max * t
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScan {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Row-major: `energies[g * betas.len() + b]`.
    pub energies: Vec<f64>,
}

impl GridScan {
    pub fn at(&self, g: usize, b: usize) -> f64 {
        self.energies[g * self.betas.len() + b]
    }
}

/// Depth-1 energy landscape over a `(γ, β)` grid.
pub fn grid_scan(
    model: &IsingModel,
    depth: usize,
    gamma: Axis,
    beta: Axis,
    config: &EngineConfig,
) -> Result<GridScan> {
    if depth != 1 {
        return Err(Error::InvalidParameter(format!(
            "grid scan supports p = 1 only, got p = {depth}"
        )));
    }
    if gamma.steps == 0 || beta.steps == 0 {
        return Err(Error::InvalidParameter(
            "grid needs at least one point per axis".into(),
        ));
    }
    let prepared = PreparedModel::new(model, 1, config)?;
    let gammas = gamma.points();
    let betas = beta.points();
    let mut energies = Vec::with_capacity(gammas.len() * betas.len());
    for &g in &gammas {
        for &b in &betas {
            energies.push(prepared.energy(&ParamSchedule::new(vec![g], vec![b])?)?);
        }
    }
    Ok(GridScan {
        gammas,
        betas,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::full_term_expectation;
    use crate::problems::{gen_random_regular, maxcut_model, PlainGraph};
    use std::f64::consts::PI;

    fn single_edge() -> IsingModel {
        IsingModel::new(2, &[(0, 1, 1.0)], &[], 0.0).unwrap()
    }

    fn cfg() -> EngineConfig {
        EngineConfig::default().with_workers(1)
    }

    fn params(g: &[f64], b: &[f64]) -> ParamSchedule {
        ParamSchedule::new(g.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn zero_gamma_is_offset() {
        let m = IsingModel::new(
            4,
            &[(0, 1, 1.0), (1, 2, -0.5), (2, 3, 1.0)],
            &[(1, 1.0)],
            2.5,
        )
        .unwrap();
        let r = expectation(&m, &params(&[0.0, 0.0], &[0.3, 1.2]), &cfg()).unwrap();
        assert_eq!(r.energy, 2.5);
    }

    #[test]
    fn zero_beta_unbiased_is_offset() {
        let m = maxcut_model(&gen_random_regular(10, 3, 2).unwrap());
        let r = expectation(&m, &params(&[0.4], &[0.0]), &cfg()).unwrap();
        assert!(r.energy.abs() < 1e-12);
    }

    #[test]
    fn single_edge_reference_point() {
        let r = expectation(&single_edge(), &params(&[PI / 4.0], &[PI / 8.0]), &cfg()).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-12);
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.terms[0].subgraph_qubits, 2);
    }

    #[test]
    fn c4_terms_match_oracle() {
        let m = maxcut_model(&PlainGraph::cycle(4).unwrap());
        let p = params(&[PI / 4.0], &[PI / 8.0]);
        let r = expectation(&m, &p, &cfg()).unwrap();
        assert_eq!(r.distinct_classes, 1);
        let first = r.terms[0].expectation;
        for t in &r.terms {
            let TermKind::Edge { i, j } = t.term.kind else {
                panic!()
            };
            let full = full_term_expectation(&m, &p, &[i, j]).unwrap();
            assert!((t.expectation - full).abs() < 1e-9);
        }
        assert!((r.energy - 4.0 * first).abs() < 1e-12);
    }

    #[test]
    fn empty_model() {
        let m = IsingModel::new(3, &[], &[], -1.5).unwrap();
        let r = expectation(&m, &params(&[0.3], &[0.2]), &cfg()).unwrap();
        assert_eq!(r.energy, -1.5);
        assert_eq!(r.distinct_classes, 0);
        assert_eq!(r.max_subgraph_qubits, 0);
    }

    #[test]
    fn resource_error_names_the_term() {
        let m = maxcut_model(&PlainGraph::complete(6));
        let mut c = cfg();
        c.max_subgraph_qubits = 5;
        let err = expectation(&m, &params(&[0.1], &[0.1]), &c).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Z0Z1") && msg.contains("6 qubits"), "{msg}");
    }

    #[test]
    fn depth_mismatch_rejected() {
        let prepared = PreparedModel::new(&single_edge(), 2, &cfg()).unwrap();
        assert!(prepared.energy(&params(&[0.1], &[0.1])).is_err());
    }

    #[test]
    fn grid_scan_examples() {
        let m = single_edge();
        let g = Axis {
            min: 0.0,
            max: PI / 2.0,
            steps: 5,
        };
        let b = Axis {
            min: 0.0,
            max: PI / 4.0,
            steps: 5,
        };
        let scan = grid_scan(&m, 1, g, b, &cfg()).unwrap();
        assert_eq!(scan.energies.len(), 25);
        let min = scan.energies.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min + 1.0).abs() < 1e-12);
        assert!((scan.at(2, 2) + 1.0).abs() < 1e-12);

        let offset_model = IsingModel::new(2, &[(0, 1, 1.0)], &[], 0.75).unwrap();
        let origin = Axis {
            min: 0.0,
            max: 0.0,
            steps: 1,
        };
        let one = grid_scan(&offset_model, 1, origin, origin, &cfg()).unwrap();
        assert_eq!(one.energies, vec![0.75]);

        assert!(grid_scan(&m, 2, g, b, &cfg()).is_err());
    }

    #[test]
    fn grid_scan_reflection_symmetry() {
        let m = IsingModel::new(
            5,
            &[
                (0, 1, 1.0),
                (1, 2, -0.5),
                (2, 3, 1.0),
                (3, 4, 0.5),
                (0, 4, -1.0),
            ],
            &[(2, 1.0), (4, -0.5)],
            0.0,
        )
        .unwrap();
        let g = Axis {
            min: -1.2,
            max: 1.2,
            steps: 7,
        };
        let b = Axis {
            min: -0.8,
            max: 0.8,
            steps: 9,
        };
        let scan = grid_scan(&m, 1, g, b, &cfg()).unwrap();
        for i in 0..7 {
            for j in 0..9 {
                assert!((scan.at(i, j) - scan.at(6 - i, 8 - j)).abs() < 1e-12);
            }
        }
    }
}
