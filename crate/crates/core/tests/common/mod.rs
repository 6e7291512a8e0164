// SPDX-License-Identifier: Apache-2.0

//! Seeded corpora and closed-form reference laws shared by the integration
//! tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use freeconv::transforms::C;
use freeconv::{FiniteMeasure, Measure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 1 to 4 atoms at distinct positions in `[-2, 2]` with random weights.
pub fn random_atomic(rng: &mut ChaCha8Rng) -> Measure {
    let k = rng.random_range(1..=4);
    let mut positions: Vec<f64> = Vec::with_capacity(k);
    while positions.len() < k {
        let x: f64 = rng.random_range(-2.0..=2.0);
        if positions.iter().all(|p| (p - x).abs() > 1e-3) {
            positions.push(x);
        }
    }
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    Measure::atoms(positions.into_iter().zip(weights.into_iter().map(|w| w / total)).collect()).unwrap()
}

/// 1 to 3 atoms plus a piecewise-linear density on a random grid, with the
/// density carrying between 30% and 90% of the mass.
pub fn random_mixed(rng: &mut ChaCha8Rng) -> Measure {
    let nodes = rng.random_range(3..=12);
    let lo: f64 = rng.random_range(-3.0..-0.5);
    let hi: f64 = rng.random_range(0.5..3.0);
    let mut grid: Vec<f64> = (0..nodes).map(|_| rng.random_range(lo..hi)).collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut values: Vec<f64> = grid.iter().map(|_| rng.random_range(0.0..1.0)).collect();
    values[0] = 0.0;
    *values.last_mut().unwrap() = 0.0;
    let raw = FiniteMeasure::new(vec![], Some(freeconv::measures::Density::new(grid.clone(), values.clone()).unwrap()))
        .unwrap()
        .total_mass();
    let density_share: f64 = rng.random_range(0.3..0.9);
    let values: Vec<f64> = values.iter().map(|v| v * density_share / raw).collect();
    let k = rng.random_range(1..=3);
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let atoms = weights
        .iter()
        .map(|w| (rng.random_range(-3.0..3.0), w / total * (1.0 - density_share)))
        .collect();
    Measure::mixed(atoms, grid, values).unwrap()
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
}

/// Arcsine law on `[-2, 2]`.
pub fn arcsine_cdf(x: f64) -> f64 {
    0.5 + (x.clamp(-2.0, 2.0) / 2.0).asin() / PI
}

/// Cauchy transform `1/√(z²-4)` of the arcsine law on `[-2, 2]`.
pub fn arcsine_g(z: C) -> C {
    ((z - 2.0).sqrt() * (z + 2.0).sqrt()).inv()
}

/// `sup_x |F(x) - cdf(x)|` over both one-sided limits at every breakpoint
/// and a dense uniform grid on `[lo, hi]`.
pub fn sup_cdf_gap<F: Fn(f64) -> f64>(m: &FiniteMeasure, cdf: F, lo: f64, hi: f64) -> f64 {
    let mut gap: f64 = 0.0;
    for x in m.breakpoints() {
        let f = cdf(x);
        gap = gap.max((m.cdf(x) - f).abs()).max((m.cdf_right(x) - f).abs());
    }
    let steps = 20_000;
    for j in 0..=steps {
        let x = lo + (hi - lo) * j as f64 / steps as f64;
        gap = gap.max((m.cdf(x) - cdf(x)).abs());
    }
    gap
}

pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| (lo.ln() + (hi.ln() - lo.ln()) * j as f64 / (count - 1) as f64).exp())
        .collect()
}
