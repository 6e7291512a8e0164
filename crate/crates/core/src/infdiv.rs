// SPDX-License-Identifier: Apache-2.0

//! Infinitely divisible laws from generating pairs `(α, ν)`.
//!
//! The same pair parameterizes a free law through its Voiculescu transform
//!
//! ```text
//! φ(z) = α + ∫ (1 + uz)/(z - u) ν(du) = α - z ν(ℝ) + (1 + z²) G_ν(z)
//! ```
//!
//! and a classical law through the Lévy–Khintchine exponent
//!
//! ```text
//! f(t) = iαt + ∫ (e^{itu} - 1 - itu/(1+u²)) (1+u²)/u² ν(du)
//! ```
//!
//! with the integrand equal to `-t²/2` at `u = 0`.

use std::cell::RefCell;

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::measures::{FiniteMeasure, Measure};
use crate::quad;
use crate::transforms::{cauchy_with_derivative, stieltjes_invert, CauchyEvaluator, UpperHalfPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingPair {
    pub alpha: f64,
    pub nu: FiniteMeasure,
}

impl GeneratingPair {
    pub fn new(alpha: f64, nu: FiniteMeasure) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be finite, got {alpha}")));
        }
        Ok(GeneratingPair { alpha, nu })
    }

    /// `(α, 0)`, the pair of `δ_α`.
    pub fn shift(alpha: f64) -> Self {
        GeneratingPair {
            alpha,
            nu: FiniteMeasure::zero(),
        }
    }

    /// Pair of the sum of the two laws (on either side).
    pub fn add(&self, other: &GeneratingPair) -> GeneratingPair {
        GeneratingPair {
            alpha: self.alpha + other.alpha,
            nu: FiniteMeasure::sum(&[self.nu.clone(), other.nu.clone()]),
        }
    }

    /// Mean `α + ∫u dν` of the free law.
    pub fn mean(&self) -> f64 {
        self.alpha + self.nu.moment(1, false)
    }

    /// Variance `∫ (1+u²) dν` of the free law.
    pub fn variance(&self) -> f64 {
        self.nu.total_mass() + self.nu.moment(2, false)
    }

    fn jump_radius(&self) -> f64 {
        self.nu.support_hull().map_or(0.0, |(lo, hi)| lo.abs().max(hi.abs()))
    }

    /// Window containing the support of the free law: mean ± (2σ + max|u|),
    /// with a margin.
    pub fn default_window(&self) -> (f64, f64) {
        let radius = 2.0 * self.variance().sqrt() + self.jump_radius();
        let margin = 0.05 * radius.max(1.0);
        let m = self.mean();
        (m - radius - margin, m + radius + margin)
    }
}

/// `φ(z)` and `φ'(z)` of the free law with pair `(α, ν)`.
fn phi_with_derivative(pair: &GeneratingPair, z: C) -> (C, C) {
    let mass = pair.nu.total_mass();
    if mass == 0.0 {
        return (C::new(pair.alpha, 0.0), C::new(0.0, 0.0));
    }
    let (g, dg) = cauchy_with_derivative(&pair.nu, z);
    let phi = pair.alpha - z * mass + (1.0 + z * z) * g;
    let dphi = -mass + 2.0 * z * g + (1.0 + z * z) * dg;
    (phi, dphi)
}

pub fn phi_of_pair(pair: &GeneratingPair, z: UpperHalfPoint) -> C {
    phi_with_derivative(pair, z.to_complex()).0
}

/// `φ(z) - γ φ(z/γ)`, the Voiculescu transform of the remainder `μ_γ` in
/// `μ = D_γ μ ⊞ μ_γ` when the law is self-decomposable.
pub fn selfdecomp_remainder(pair: &GeneratingPair, gamma: f64, z: UpperHalfPoint) -> Result<C> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let zc = z.to_complex();
    Ok(phi_with_derivative(pair, zc).0 - gamma * phi_with_derivative(pair, zc / gamma).0)
}

/// `(1+u²)(e^{itu} - 1 - itu)/u² + itu`, which equals the Lévy–Khintchine
/// integrand and is smooth through `u = 0`.
fn khintchine_kernel(t: f64, u: f64) -> C {
    let x = t * u;
    if u == 0.0 {
        return C::new(-0.5 * t * t, 0.0);
    }
    let core = if x.abs() < 1e-2 {
        // (e^{ix} - 1 - ix)/u² by its Taylor series in x
        let x2 = x * x;
        let re = -0.5 + x2 / 24.0 - x2 * x2 / 720.0;
        let im = -x / 6.0 + x * x2 / 120.0 - x * x2 * x2 / 5040.0;
        C::new(re, im) * (t * t)
    } else {
        (C::new(0.0, x).exp() - 1.0 - C::new(0.0, x)) / (u * u)
    };
    (1.0 + u * u) * core + C::new(0.0, x)
}

/// Classical Lévy–Khintchine exponent `f(t)`; the characteristic function
/// of the classical law is `exp(f(t))`.
pub fn classical_exponent(pair: &GeneratingPair, t: f64) -> C {
    let mut acc = C::new(0.0, pair.alpha * t);
    for a in pair.nu.atoms() {
        acc += a.weight * khintchine_kernel(t, a.position);
    }
    if let Some(d) = pair.nu.density() {
        let gl = quad::rule(8);
        for i in 0..d.cells() {
            let (t0, t1, f0, f1) = d.cell(i);
            if f0 == 0.0 && f1 == 0.0 {
                continue;
            }
            let slope = (f1 - f0) / (t1 - t0);
            let pieces = ((t.abs() * (t1 - t0)).ceil() as usize).max(1);
            let piece = (t1 - t0) / pieces as f64;
            for k in 0..pieces {
                let a = t0 + piece * k as f64;
                let re = gl.integrate(a, a + piece, |u| (f0 + slope * (u - t0)) * khintchine_kernel(t, u).re);
                let im = gl.integrate(a, a + piece, |u| (f0 + slope * (u - t0)) * khintchine_kernel(t, u).im);
                acc += C::new(re, im);
            }
        }
    }
    acc
}

/// The free law of a pair as a Cauchy-transform source: `G(z) = 1/w` where
/// `w + φ(w) = z`, `Im w ≥ Im z`.
pub struct PairLaw {
    pair: GeneratingPair,
    top: f64,
    tol: f64,
    last: RefCell<Option<(C, C)>>,
}

const PAIR_NEWTON_STEPS: usize = 80;
const PAIR_PICARD_STEPS: usize = 10_000;
const PAIR_MAX_SPLITS: usize = 200;

impl PairLaw {
    pub fn new(pair: GeneratingPair) -> Self {
        let top = 2.0 * (pair.variance().sqrt() + pair.jump_radius() + pair.mean().abs()).max(1.0);
        PairLaw {
            pair,
            top,
            tol: 1e-13,
            last: RefCell::new(None),
        }
    }

    /// `F(z) = w`, the reciprocal Cauchy transform of the law.
    pub fn reciprocal(&self, z: C, hint: Option<C>) -> Result<C> {
        if let Some(h) = hint {
            if let Some(w) = self.newton(z, h) {
                *self.last.borrow_mut() = Some((z, w));
                return Ok(w);
            }
        }
        let mut heights = Vec::new();
        let mut y = self.top;
        while y > z.im {
            heights.push(y);
            y *= 0.25;
        }
        heights.push(z.im);
        heights.reverse();
        let mut w = C::new(z.re, *heights.last().unwrap());
        let mut current = f64::INFINITY;
        let mut splits = 0;
        while let Some(&h) = heights.last() {
            let rung = C::new(z.re, h);
            let solved = self.newton(rung, w).or_else(|| {
                if current.is_finite() && splits < PAIR_MAX_SPLITS {
                    None
                } else {
                    self.picard(rung, w)
                }
            });
            match solved {
                Some(next) => {
                    w = next;
                    current = h;
                    heights.pop();
                }
                None if current.is_finite() && splits < PAIR_MAX_SPLITS => {
                    splits += 1;
                    heights.push((current * h).sqrt());
                }
                None => {
                    return Err(Error::NoConvergence {
                        iterations: PAIR_PICARD_STEPS,
                        residual: (w + phi_with_derivative(&self.pair, w).0 - rung).norm(),
                        history: Vec::new(),
                    })
                }
            }
        }
        *self.last.borrow_mut() = Some((z, w));
        Ok(w)
    }

    fn accept(&self, z: C, w: C) -> bool {
        w.im >= z.im * (1.0 - 1e-9) - 1e-15
    }

    fn newton(&self, z: C, start: C) -> Option<C> {
        if !(start.im > 0.0) {
            return None;
        }
        let tol = self.tol * (1.0 + z.norm());
        let mut w = start;
        let (phi, dphi) = phi_with_derivative(&self.pair, w);
        let mut r = w + phi - z;
        let mut dr = 1.0 + dphi;
        for _ in 0..PAIR_NEWTON_STEPS {
            if r.norm() <= tol {
                return self.accept(z, w).then_some(w);
            }
            let step = r / dr;
            let mut lambda = 1.0;
            loop {
                let cand = w - lambda * step;
                if cand.im > 0.0 {
                    let (p, dp) = phi_with_derivative(&self.pair, cand);
                    let rc = cand + p - z;
                    if rc.norm() < r.norm() {
                        w = cand;
                        r = rc;
                        dr = 1.0 + dp;
                        break;
                    }
                }
                lambda *= 0.5;
                if lambda < 1.0 / 64.0 {
                    return None;
                }
            }
        }
        (r.norm() <= tol && self.accept(z, w)).then_some(w)
    }

    /// `w ↦ z - φ(w)`, a self-map of the upper half-plane.
    fn picard(&self, z: C, start: C) -> Option<C> {
        let tol = self.tol * (1.0 + z.norm());
        let mut w = if start.im > 0.0 { start } else { z };
        for _ in 0..PAIR_PICARD_STEPS {
            let next = z - phi_with_derivative(&self.pair, w).0;
            if (next - w).norm() <= tol {
                return self.newton(z, next).or(Some(next));
            }
            w = next;
        }
        None
    }
}

impl CauchyEvaluator for PairLaw {
    fn cauchy(&self, z: C) -> Result<C> {
        UpperHalfPoint::from_complex(z)?;
        let last = *self.last.borrow();
        let hint = last
            .filter(|(zl, _)| (zl - z).norm() < 0.5 * z.im.max(zl.im))
            .map(|(_, w)| w);
        Ok(self.reciprocal(z, hint)?.inv())
    }

    fn cauchy_row(&self, xs: &[f64], y: f64) -> Result<Vec<C>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut hint = None;
        for &x in xs {
            let z = UpperHalfPoint::new(x, y)?.to_complex();
            let w = self.reciprocal(z, hint)?;
            out.push(w.inv());
            hint = Some(w);
        }
        Ok(out)
    }
}

/// The ⊞-infinitely divisible law with Voiculescu transform given by the pair.
pub fn measure_of_pair(pair: &GeneratingPair, window: Option<(f64, f64)>, resolution: usize) -> Result<Measure> {
    if pair.nu.is_zero() {
        return Ok(Measure::dirac(pair.alpha));
    }
    let window = window.unwrap_or_else(|| pair.default_window());
    stieltjes_invert(&PairLaw::new(pair.clone()), window, resolution)
}

/// Outcome of the class-L test: accepted, or the first pair of nodes where
/// `(1+u²) ν'(u)/u` increases.
#[derive(Debug, Clone, PartialEq)]
pub struct LClassVerdict {
    pub accepted: bool,
    pub violation: Option<(f64, f64)>,
}

const L_CLASS_SLACK: f64 = 1e-12;

/// Tests whether `u ↦ (1+u²) ν'(u)/u` is non-increasing on each half-line,
/// given `ν'` at grid nodes that avoid the origin. An atom at the origin
/// imposes nothing.
pub fn check_l_class(grid: &[f64], density: &[f64], atom_at_zero: f64) -> Result<LClassVerdict> {
    if grid.len() != density.len() {
        return Err(Error::InvalidParameter("grid and density lengths differ".into()));
    }
    if grid.iter().any(|&u| u == 0.0 || !u.is_finite()) {
        return Err(Error::InvalidParameter("density grid must avoid the origin".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("density grid is not strictly increasing".into()));
    }
    if density.iter().any(|&v| !(v >= 0.0)) || !(atom_at_zero >= 0.0) {
        return Err(Error::InvalidParameter("density values must be nonnegative".into()));
    }
    let k = |i: usize| (1.0 + grid[i] * grid[i]) * density[i] / grid[i];
    for i in 1..grid.len() {
        let same_side = (grid[i - 1] < 0.0) == (grid[i] < 0.0);
        if same_side && k(i) > k(i - 1) + L_CLASS_SLACK {
            return Ok(LClassVerdict {
                accepted: false,
                violation: Some((grid[i - 1], grid[i])),
            });
        }
    }
    Ok(LClassVerdict {
        accepted: true,
        violation: None,
    })
}

/// Class-L test for a pair. Atoms of `ν` away from the origin are rejected
/// outright, since `ν'` does not exist there.
pub fn check_l_class_of_pair(pair: &GeneratingPair) -> Result<LClassVerdict> {
    let mut atom_at_zero = 0.0;
    for a in pair.nu.atoms() {
        if a.position == 0.0 {
            atom_at_zero = a.weight;
        } else {
            return Ok(LClassVerdict {
                accepted: false,
                violation: Some((a.position, a.position)),
            });
        }
    }
    let (grid, values): (Vec<f64>, Vec<f64>) = match pair.nu.density() {
        None => (Vec::new(), Vec::new()),
        Some(d) => d
            .grid()
            .iter()
            .zip(d.values())
            .filter(|(&u, _)| u != 0.0)
            .map(|(&u, &v)| (u, v))
            .unzip(),
    };
    check_l_class(&grid, &values, atom_at_zero)
}
