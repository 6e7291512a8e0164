// SPDX-License-Identifier: Apache-2.0

//! Closed-form Cauchy transform of atoms plus a piecewise-linear density.
//!
//! On a cell `[t0, t1]` with linear density `f`, writing `w = z - t` and
//! `L = ln((z - t0)/(z - t1))`:
//!
//! ```text
//! ∫ f(t)/(z-t) dt   = f0 L + (f1 - f0) ((z - t0) L / h - 1)
//! ∫ f(t)/(z-t)^2 dt = f0 h / ((z - t0)(z - t1)) + (f1 - f0) (u - L) / h,  u = h/(z - t1)
//! ```
//!
//! Far from the cell (`|u|` small) both brackets are evaluated from their
//! power series in `u` to avoid cancellation.
//!
//! Densities with many cells are split into blocks of consecutive cells.
//! Each block carries its moments about its midpoint, and a block at
//! distance at least `3r` from `z` (half-width `r`) contributes through the
//! truncated expansion `Σ_k M_k / (z - c)^{k+1}`, accurate to about
//! `3^{-(ORDER+1)}` relative.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::measures::{Density, FiniteMeasure};
use crate::quad;

const SERIES_RADIUS: f64 = 0.25;
/// Cells below which every cell is summed directly.
const FAR_FIELD_MIN_CELLS: usize = 128;
/// Highest moment kept per block.
const ORDER: usize = 32;
/// A block is far once `|z - c| >= FAR_RATIO * r`.
const FAR_RATIO: f64 = 3.0;

#[derive(Clone)]
struct Block {
    first: usize,
    end: usize,
    center: f64,
    radius: f64,
    /// `∫ ((t - c)/r)^k f(t) dt`, `k = 0..=ORDER`.
    moments: [f64; ORDER + 1],
}

/// Lazily built block moments of a density; ignored by equality.
#[derive(Default, Clone)]
pub(crate) struct FarFieldCache(OnceLock<Vec<Block>>);

impl std::fmt::Debug for FarFieldCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FarFieldCache")
    }
}

impl PartialEq for FarFieldCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

fn blocks(d: &Density) -> &[Block] {
    d.far_field().0.get_or_init(|| build_blocks(d))
}

fn build_blocks(d: &Density) -> Vec<Block> {
    let cells = d.cells();
    let size = ((cells as f64).sqrt().round() as usize).max(16);
    let gl = quad::rule(ORDER / 2 + 1);
    let grid = d.grid();
    let mut out = Vec::with_capacity(cells.div_ceil(size));
    let mut first = 0;
    while first < cells {
        let end = (first + size).min(cells);
        let (lo, hi) = (grid[first], grid[end]);
        let center = 0.5 * (lo + hi);
        let radius = 0.5 * (hi - lo);
        let mut moments = [0.0; ORDER + 1];
        for i in first..end {
            let (t0, t1, f0, f1) = d.cell(i);
            if f0 == 0.0 && f1 == 0.0 {
                continue;
            }
            let slope = (f1 - f0) / (t1 - t0);
            let half = 0.5 * (t1 - t0);
            let mid = 0.5 * (t0 + t1);
            for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                let t = mid + half * x;
                let weight = w * half * (f0 + slope * (t - t0));
                let q = (t - center) / radius;
                let mut power = 1.0;
                for m in moments.iter_mut() {
                    *m += weight * power;
                    power *= q;
                }
            }
        }
        out.push(Block {
            first,
            end,
            center,
            radius,
            moments,
        });
        first = end;
    }
    out
}

/// `G_μ(z) = ∫ μ(dt)/(z - t)`.
pub fn cauchy(m: &FiniteMeasure, z: Complex64) -> Complex64 {
    accumulate(m, z, false).0
}

/// `(G_μ(z), G_μ'(z))`.
pub fn cauchy_with_derivative(m: &FiniteMeasure, z: Complex64) -> (Complex64, Complex64) {
    accumulate(m, z, true)
}

fn accumulate(m: &FiniteMeasure, z: Complex64, with_derivative: bool) -> (Complex64, Complex64) {
    let mut g = Complex64::new(0.0, 0.0);
    let mut dg = Complex64::new(0.0, 0.0);
    for a in m.atoms() {
        let r = (z - a.position).inv();
        g += a.weight * r;
        if with_derivative {
            dg -= a.weight * r * r;
        }
    }
    let Some(d) = m.density() else {
        return (g, dg);
    };
    if d.cells() < FAR_FIELD_MIN_CELLS {
        add_cells(d, 0, d.cells(), z, with_derivative, &mut g, &mut dg);
        return (g, dg);
    }
    for b in blocks(d) {
        let w = z - b.center;
        if w.norm() < FAR_RATIO * b.radius {
            add_cells(d, b.first, b.end, z, with_derivative, &mut g, &mut dg);
            continue;
        }
        if b.moments[0] == 0.0 {
            continue;
        }
        let winv = w.inv();
        let q = b.radius * winv;
        // Horner in q for Σ M_k q^k and Σ (k+1) M_k q^k
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for k in (0..=ORDER).rev() {
            s = s * q + b.moments[k];
            if with_derivative {
                ds = ds * q + (k + 1) as f64 * b.moments[k];
            }
        }
        g += s * winv;
        if with_derivative {
            dg -= ds * winv * winv;
        }
    }
    (g, dg)
}

fn add_cells(
    d: &Density,
    first: usize,
    end: usize,
    z: Complex64,
    with_derivative: bool,
    g: &mut Complex64,
    dg: &mut Complex64,
) {
    for i in first..end {
        let (t0, t1, f0, f1) = d.cell(i);
        if f0 == 0.0 && f1 == 0.0 {
            continue;
        }
        let h = t1 - t0;
        let w0 = z - t0;
        let w1 = z - t1;
        let u = h / w1;
        let (log_ratio, bracket, log_excess) = if u.norm() < SERIES_RADIUS {
            series(u)
        } else {
            let l = w0.ln() - w1.ln();
            (l, w0 * l / h - 1.0, u - l)
        };
        *g += f0 * log_ratio + (f1 - f0) * bracket;
        if with_derivative {
            *dg -= f0 * h / (w0 * w1) + (f1 - f0) * log_excess / h;
        }
    }
}

/// Returns `(ln(1+u), Σ_{k≥2} (-1)^k u^{k-1}/(k(k-1)), u - ln(1+u))`.
fn series(u: Complex64) -> (Complex64, Complex64, Complex64) {
    let r = u.norm();
    let terms = if r == 0.0 {
        2
    } else {
        ((-38.0 / r.ln()).ceil() as usize).clamp(2, 60)
    };
    let mut power = u;
    let mut log = u;
    let mut bracket = Complex64::new(0.0, 0.0);
    let mut excess = Complex64::new(0.0, 0.0);
    for k in 2..=terms {
        let kf = k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        bracket += sign * power / (kf * (kf - 1.0));
        power *= u;
        log -= sign * power / kf;
        excess += sign * power / kf;
    }
    (log, bracket, excess)
}
