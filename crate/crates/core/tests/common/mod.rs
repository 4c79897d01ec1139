#![allow(dead_code)]

use std::f64::consts::PI;

use qaoa_lightcone::problems::gen_erdos_renyi;
use qaoa_lightcone::{IsingModel, ParamSchedule};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi topology with weights from {±1, ±0.5} and biases from {0, ±1}.
pub fn random_weighted(n: usize, edge_prob: f64, seed: u64) -> IsingModel {
    let g = gen_erdos_renyi(n, edge_prob, seed).unwrap();
    let mut r = rng(seed ^ 0x5eed);
    let edges: Vec<_> = g
        .edges()
        .iter()
        .map(|&(u, v)| (u, v, *[1.0, -1.0, 0.5, -0.5].choose(&mut r).unwrap()))
        .collect();
    let biases: Vec<_> = (0..n)
        .map(|k| (k, *[0.0, 1.0, -1.0].choose(&mut r).unwrap()))
        .collect();
    let offset = *[0.0, 0.5, -2.0].choose(&mut r).unwrap();
    IsingModel::new(n, &edges, &biases, offset).unwrap()
}

pub fn random_params(p: usize, r: &mut ChaCha8Rng) -> ParamSchedule {
    let gammas = (0..p).map(|_| r.gen_range(-PI..PI)).collect();
    let betas = (0..p).map(|_| r.gen_range(-PI / 2.0..PI / 2.0)).collect();
    ParamSchedule::new(gammas, betas).unwrap()
}
