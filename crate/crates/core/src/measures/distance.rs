// SPDX-License-Identifier: Apache-2.0

//! Kolmogorov and Lévy distances between finite measures.
//!
//! Both CDFs are piecewise quadratic with jumps, so every supremum below is
//! computed exactly: one-sided limits at each merged breakpoint plus the
//! interior stationary point of the quadratic difference on each piece.

use super::{Density, FiniteMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Kolmogorov,
    Levy,
}

/// Bisection tolerance on the Lévy band half-width.
pub const LEVY_TOLERANCE: f64 = 1e-10;

pub fn distance(a: &FiniteMeasure, b: &FiniteMeasure, kind: DistanceKind) -> f64 {
    match kind {
        DistanceKind::Kolmogorov => kolmogorov(a, b),
        DistanceKind::Levy => levy(a, b),
    }
}

/// `sup_x |A(x) - B(x)|`.
pub fn kolmogorov(a: &FiniteMeasure, b: &FiniteMeasure) -> f64 {
    sup_shifted_difference(a, b, 0.0).max(sup_shifted_difference(b, a, 0.0))
}

/// Infimal `h` with `A(x-h) - h <= B(x) <= A(x+h) + h` for all `x`,
/// found by bisection on `[0, 1]`.
pub fn levy(a: &FiniteMeasure, b: &FiniteMeasure) -> f64 {
    let feasible = |h: f64| {
        sup_shifted_difference(b, a, h) <= h && sup_shifted_difference(a, b, h) <= h
    };
    if feasible(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > LEVY_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `sup_x [A(x) - B(x + shift)]`, including the limits at `±∞`.
pub fn sup_shifted_difference(a: &FiniteMeasure, b: &FiniteMeasure, shift: f64) -> f64 {
    let mut points = a.breakpoints();
    points.extend(b.breakpoints().into_iter().map(|p| p - shift));
    points.sort_by(f64::total_cmp);
    points.dedup();

    let diff_left = |x: f64| a.cdf(x) - b.cdf(x + shift);
    let diff_right = |x: f64| a.cdf_right(x) - b.cdf_right(x + shift);

    let mut best: f64 = 0.0;
    for (i, &p) in points.iter().enumerate() {
        best = best.max(diff_left(p)).max(diff_right(p));
        if let Some(&next) = points.get(i + 1) {
            let mid = 0.5 * (p + next);
            let g0 = piece_value(a.density(), mid, p) - piece_value(b.density(), mid + shift, p + shift);
            let g1 = piece_value(a.density(), mid, next) - piece_value(b.density(), mid + shift, next + shift);
            if (g0 > 0.0 && g1 < 0.0) || (g0 < 0.0 && g1 > 0.0) {
                let x = p + g0 / (g0 - g1) * (next - p);
                if x > p && x < next {
                    best = best.max(diff_left(x));
                }
            }
        }
    }
    best
}

/// Value at `x` of the linear piece of `d` that contains `inside`.
fn piece_value(d: Option<&Density>, inside: f64, x: f64) -> f64 {
    let Some(d) = d else { return 0.0 };
    match d.locate(inside) {
        None => 0.0,
        Some(i) => {
            let (t0, t1, f0, f1) = d.cell(i);
            f0 + (f1 - f0) * (x - t0) / (t1 - t0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Measure;

    #[test]
    fn identical_measures_are_at_distance_zero() {
        let s = Measure::semicircle();
        assert_eq!(kolmogorov(&s, &s), 0.0);
        assert_eq!(levy(&s, &s), 0.0);
    }

    #[test]
    fn dirac_pairs() {
        let d0 = Measure::dirac(0.0);
        let d1 = Measure::dirac(1.0);
        assert!((levy(&d0, &d1) - 1.0).abs() < 1e-9);
        assert_eq!(kolmogorov(&d0, &d1), 1.0);
        let near = Measure::dirac(0.3);
        assert!((levy(&d0, &near) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn dirac_vs_symmetric_bernoulli() {
        let d0 = Measure::dirac(0.0);
        let b = Measure::two_point(0.5).unwrap();
        assert!((kolmogorov(&d0, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_shift_has_exact_levy_distance() {
        // U[0,1] against U[δ,1+δ]: Kolmogorov distance δ, Lévy distance δ/2
        let u = Measure::density(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let v = u.transform(1.0, 0.1).unwrap();
        assert!((kolmogorov(&u, &v) - 0.1).abs() < 1e-12);
        assert!((levy(&u, &v) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn interior_extremum_is_found() {
        // Two densities crossing strictly inside a shared cell.
        let a = Measure::density(vec![0.0, 1.0], vec![2.0, 0.0]).unwrap();
        let b = Measure::density(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        // A(x)-B(x) = 2x - 2x^2, maximal 0.5 at x = 1/2
        assert!((kolmogorov(&a, &b) - 0.5).abs() < 1e-14);
    }
}
