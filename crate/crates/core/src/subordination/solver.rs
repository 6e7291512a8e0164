// SPDX-License-Identifier: Apache-2.0

//! Newton/Picard solver for the grouped subordination system.
//!
//! Identical input measures are merged into groups `g` with multiplicity
//! `c_g` (`Σ c_g = n`). Writing `h_g = F_g - id`, the unknowns `Z_g` solve
//!
//! ```text
//! Z_g = z + Σ_k c_k h_k(Z_k) - h_g(Z_g)
//! ```
//!
//! and the common value `F_g(Z_g)` is the reciprocal Cauchy transform of
//! the free convolution at `z`.

use num_complex::Complex64 as C;

use super::SolverConfig;
use crate::measures::FiniteMeasure;
use crate::transforms::cauchy_with_derivative;

pub(crate) struct Group {
    pub measure: FiniteMeasure,
    pub count: f64,
}

/// `F_g(Z_g)` and `F_g'(Z_g)` for every group.
pub(crate) struct Evaluation {
    pub f: Vec<C>,
    pub df: Vec<C>,
}

pub(crate) fn evaluate(groups: &[Group], zs: &[C]) -> Evaluation {
    let mut f = Vec::with_capacity(groups.len());
    let mut df = Vec::with_capacity(groups.len());
    for (g, &w) in groups.iter().zip(zs) {
        if let ([a], None) = (g.measure.atoms(), g.measure.density()) {
            // translation: F(w) = w - a, so h = F - id has no imaginary part
            f.push(w - a.position);
            df.push(C::new(1.0, 0.0));
            continue;
        }
        let (gv, dg) = cauchy_with_derivative(&g.measure, w);
        let fv = gv.inv();
        f.push(fv);
        df.push(-dg * fv * fv);
    }
    Evaluation { f, df }
}

/// Residual of the grouped system, `R_g = Z_g - z - S + h_g`.
fn system_residual(groups: &[Group], z: C, zs: &[C], ev: &Evaluation) -> Vec<C> {
    let s: C = groups
        .iter()
        .zip(zs)
        .zip(&ev.f)
        .map(|((g, &w), &f)| g.count * (f - w))
        .sum();
    zs.iter()
        .zip(&ev.f)
        .map(|(&w, &f)| w - z - s + (f - w))
        .collect()
}

/// `max(|z - Σ Z_j + (n-1) F_1(Z_1)|, max_j |F_j(Z_j) - F_1(Z_1)|)` with the
/// first input's group as reference.
pub(crate) fn reported_residual(groups: &[Group], reference: usize, z: C, zs: &[C], ev: &Evaluation) -> f64 {
    let n: f64 = groups.iter().map(|g| g.count).sum();
    let fv = ev.f[reference];
    let sum: C = groups.iter().zip(zs).map(|(g, &w)| g.count * w).sum();
    let mut r = (z - sum + (n - 1.0) * fv).norm();
    for &f in &ev.f {
        r = r.max((f - fv).norm());
    }
    r
}

fn max_norm(v: &[C]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Jacobian `J = diag(1 + d) - 1 (c ∘ d)ᵀ` with `d_g = F_g' - 1`.
fn jacobian(groups: &[Group], ev: &Evaluation) -> Vec<Vec<C>> {
    let m = groups.len();
    let d: Vec<C> = ev.df.iter().map(|&v| v - 1.0).collect();
    let mut j = vec![vec![C::new(0.0, 0.0); m]; m];
    for (row_idx, row) in j.iter_mut().enumerate() {
        for k in 0..m {
            row[k] = -groups[k].count * d[k];
        }
        row[row_idx] += 1.0 + d[row_idx];
    }
    j
}

/// Gaussian elimination with partial pivoting. `None` when singular.
pub(crate) fn solve_linear(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &k| a[i][col].norm().total_cmp(&a[k][col].norm()))?;
        if a[pivot][col].norm() == 0.0 || !a[pivot][col].norm().is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            if factor.norm() == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (t, &v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *t -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); m];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for k in row + 1..m {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
}

/// Derivative of the common value `F(z)` with respect to `z` at a solution.
pub(crate) fn common_value_derivative(groups: &[Group], ev: &Evaluation) -> Option<C> {
    let m = groups.len();
    let dz = solve_linear(jacobian(groups, ev), vec![C::new(1.0, 0.0); m])?;
    let d: C = groups
        .iter()
        .zip(&ev.df)
        .zip(&dz)
        .map(|((g, &df), &dzk)| g.count * (df - 1.0) * dzk)
        .sum();
    Some(1.0 + d)
}

pub(crate) struct Outcome {
    pub zs: Vec<C>,
    pub ev: Evaluation,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

const POLISH_STEPS: usize = 2;

/// Solves the system at `z` from `start`: damped Newton steps, with damped
/// Picard sweeps whenever Newton cannot decrease the residual while
/// staying in the upper half-plane.
pub(crate) fn solve_at(
    groups: &[Group],
    reference: usize,
    z: C,
    start: &[C],
    cfg: &SolverConfig,
    max_iter: usize,
) -> Outcome {
    let mut zs = start.to_vec();
    let mut ev = evaluate(groups, &zs);
    let mut res = system_residual(groups, z, &zs, &ev);
    let mut merit = max_norm(&res);
    let mut damping = cfg.damping;
    let mut history = Vec::new();
    let mut iterations = 0;
    let scale = |zs: &[C]| 1.0 + z.norm() + max_norm(zs);

    while iterations < max_iter {
        let reported = reported_residual(groups, reference, z, &zs, &ev);
        history.push(reported);
        if reported <= cfg.tol * scale(&zs) {
            // a couple of extra Newton steps take the residual to rounding level
            for _ in 0..POLISH_STEPS {
                match newton_step(groups, z, &zs, &ev, &res, merit) {
                    Some((nz, nev, nres, nmerit)) => {
                        let r = reported_residual(groups, reference, z, &nz, &nev);
                        if r >= reported {
                            break;
                        }
                        zs = nz;
                        ev = nev;
                        res = nres;
                        merit = nmerit;
                    }
                    None => break,
                }
            }
            let limit = cfg.tol * scale(&zs);
            refresh(groups, reference, z, &mut zs, &mut ev, limit);
            let residual = reported_residual(groups, reference, z, &zs, &ev);
            return Outcome {
                zs,
                ev,
                residual,
                iterations,
                converged: true,
                history,
            };
        }
        if !merit.is_finite() {
            break;
        }
        iterations += 1;
        if let Some((nz, nev, nres, nmerit)) = newton_step(groups, z, &zs, &ev, &res, merit) {
            zs = nz;
            ev = nev;
            res = nres;
            merit = nmerit;
            continue;
        }
        // Picard sweep Z_g ← (1-λ) Z_g + λ (Z_g - R_g), halving λ on growth.
        let mut lambda = damping;
        loop {
            let cand: Vec<C> = zs.iter().zip(&res).map(|(&w, &r)| w - lambda * r).collect();
            if cand.iter().all(|w| w.im > 0.0) {
                let cev = evaluate(groups, &cand);
                let cres = system_residual(groups, z, &cand, &cev);
                let cmerit = max_norm(&cres);
                if cmerit.is_finite() {
                    if cmerit > merit {
                        damping = (0.5 * damping).max(1e-3);
                    }
                    zs = cand;
                    ev = cev;
                    res = cres;
                    merit = cmerit;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                let residual = reported_residual(groups, reference, z, &zs, &ev);
                return Outcome {
                    zs,
                    ev,
                    residual,
                    iterations,
                    converged: false,
                    history,
                };
            }
        }
    }
    let residual = reported_residual(groups, reference, z, &zs, &ev);
    Outcome {
        zs,
        ev,
        residual,
        iterations,
        converged: false,
        history,
    }
}

/// One sweep of the fixed-point map `Z_g ← z + Σ_k c_k h_k(Z_k) - h_g(Z_g)`
/// at a converged point, kept when the residual stays within `limit`. It
/// writes each `Z_g` as `z` plus the other groups' `h` terms, so
/// `Im Z_g ≥ Im z` holds to the last bit whenever the computed `Im h_k` are
/// nonnegative, which is exact for translations.
fn refresh(groups: &[Group], reference: usize, z: C, zs: &mut Vec<C>, ev: &mut Evaluation, limit: f64) {
    let h: Vec<C> = zs.iter().zip(&ev.f).map(|(&w, &f)| f - w).collect();
    let cand: Vec<C> = (0..groups.len())
        .map(|g| {
            let mut acc = z;
            for (k, grp) in groups.iter().enumerate() {
                let c = if k == g { grp.count - 1.0 } else { grp.count };
                if c != 0.0 {
                    acc += c * h[k];
                }
            }
            acc
        })
        .collect();
    if cand.iter().any(|w| !(w.im > 0.0)) {
        return;
    }
    let cev = evaluate(groups, &cand);
    if reported_residual(groups, reference, z, &cand, &cev) <= limit {
        *zs = cand;
        *ev = cev;
    }
}

type Step = (Vec<C>, Evaluation, Vec<C>, f64);

fn newton_step(groups: &[Group], z: C, zs: &[C], ev: &Evaluation, res: &[C], merit: f64) -> Option<Step> {
    let delta = solve_linear(jacobian(groups, ev), res.iter().map(|r| -r).collect())?;
    let mut lambda = 1.0;
    while lambda >= 1.0 / 64.0 {
        let cand: Vec<C> = zs.iter().zip(&delta).map(|(&w, &d)| w + lambda * d).collect();
        if cand.iter().all(|w| w.im > 0.0) {
            let cev = evaluate(groups, &cand);
            let cres = system_residual(groups, z, &cand, &cev);
            let cmerit = max_norm(&cres);
            if cmerit < merit {
                return Some((cand, cev, cres, cmerit));
            }
        }
        lambda *= 0.5;
    }
    None
}
