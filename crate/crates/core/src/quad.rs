// SPDX-License-Identifier: Apache-2.0

//! Gauss–Legendre rules, generated once per order and cached.

use std::f64::consts::PI;
use std::sync::OnceLock;

pub const MAX_ORDER: usize = 64;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn generate(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Returns the cached `n`-point rule, `1 <= n <= MAX_ORDER`.
pub fn rule(n: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    assert!((1..=MAX_ORDER).contains(&n), "unsupported Gauss-Legendre order {n}");
    let rules = RULES.get_or_init(|| (1..=MAX_ORDER).map(GaussLegendre::generate).collect());
    &rules[n - 1]
}

/// Composite Gauss–Legendre over `pieces` equal sub-intervals.
pub fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, pieces: usize, order: usize, mut f: F) -> f64 {
    let gl = rule(order);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            gl.integrate(lo, lo + h, &mut f)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 16, 33, 64] {
            let gl = rule(n);
            let deg = 2 * n - 1;
            let got = gl.integrate(-1.0, 2.0, |x| x.powi(deg as i32));
            let want = (2f64.powi(deg as i32 + 1) - (-1f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=MAX_ORDER {
            let s: f64 = rule(n).weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }
}
