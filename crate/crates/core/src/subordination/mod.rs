// SPDX-License-Identifier: Apache-2.0

//! Free additive convolution through subordination.
//!
//! For `μ_1 ⊞ ⋯ ⊞ μ_n` there are analytic self-maps `Z_j` of the upper
//! half-plane with `F_{μ_j}(Z_j(z))` independent of `j` and
//! `z = Σ Z_j(z) - (n-1) F_{μ_1}(Z_1(z))`; the common value is
//! `F_{μ_1 ⊞ ⋯ ⊞ μ_n}(z)`. Solutions at small `Im z` are reached by a ladder
//! of heights starting high above the support, where the system is
//! nearly linear.

mod solver;

use std::cell::RefCell;
use std::cmp::Ordering;

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::measures::{Density, FiniteMeasure, Measure};
use crate::transforms::{stieltjes_invert, AnalyticMap, CauchyEvaluator, UpperHalfPoint};
use solver::{common_value_derivative, evaluate, reported_residual, solve_at, Group};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial Picard damping, halved whenever a sweep increases the residual.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 10_000,
            damping: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn new(tol: f64, max_iter: usize, damping: f64) -> Result<Self> {
        if !(tol > 0.0) || max_iter == 0 || !(damping > 0.0 && damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "solver config needs tol > 0, max_iter > 0, damping in (0,1]; got {tol}, {max_iter}, {damping}"
            )));
        }
        Ok(SolverConfig { tol, max_iter, damping })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubordinationResult {
    pub z: UpperHalfPoint,
    /// `Z_j(z)`, one per input measure in input order.
    pub subordinators: Vec<C>,
    /// Common value `F_{μ_j}(Z_j(z))`, the reciprocal Cauchy transform of
    /// the convolution at `z`.
    pub f_value: C,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Heights of the continuation ladder shrink by this factor per rung.
const LADDER_FACTOR: f64 = 0.25;
/// Iteration budget when starting from a neighbouring solution.
const HINT_ITERATIONS: usize = 60;
/// Iteration budget per rung before an intermediate rung is inserted.
const RUNG_ITERATIONS: usize = 60;
const MAX_RUNG_SPLITS: usize = 200;

/// The free convolution `μ_1 ⊞ ⋯ ⊞ μ_n` represented by its subordination
/// system. Serves as a Cauchy-transform source for inversion and as the
/// class-𝓕 map `F` of the convolution.
pub struct FreeSum {
    groups: Vec<Group>,
    /// Group index of each input measure.
    membership: Vec<usize>,
    cfg: SolverConfig,
    top: f64,
    last: RefCell<Option<(C, Vec<C>)>>,
}

impl FreeSum {
    pub fn new(mus: &[Measure], cfg: SolverConfig) -> Result<Self> {
        if mus.is_empty() {
            return Err(Error::InvalidParameter("free sum of zero measures".into()));
        }
        let mut groups: Vec<Group> = Vec::new();
        let mut membership = Vec::with_capacity(mus.len());
        for m in mus {
            match groups.iter().position(|g| &g.measure == m.as_finite()) {
                Some(i) => {
                    groups[i].count += 1.0;
                    membership.push(i);
                }
                None => {
                    membership.push(groups.len());
                    groups.push(Group {
                        measure: m.as_finite().clone(),
                        count: 1.0,
                    });
                }
            }
        }
        Ok(Self::from_groups(groups, membership, cfg))
    }

    /// `μ^{⊞n}` as a single group of multiplicity `n`.
    pub fn power(mu: &Measure, n: usize, cfg: SolverConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("free power needs n ≥ 1".into()));
        }
        let groups = vec![Group {
            measure: mu.as_finite().clone(),
            count: n as f64,
        }];
        Ok(Self::from_groups(groups, vec![0; n], cfg))
    }

    fn from_groups(groups: Vec<Group>, membership: Vec<usize>, cfg: SolverConfig) -> Self {
        let var: f64 = groups.iter().map(|g| g.count * g.measure.variance()).sum();
        let radius = groups.iter().map(|g| radius_about_mean(&g.measure)).fold(0.0, f64::max);
        let top = 2.0 * var.sqrt().max(radius).max(1.0);
        FreeSum {
            groups,
            membership,
            cfg,
            top,
            last: RefCell::new(None),
        }
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.groups.iter().map(|g| g.count * g.measure.mean()).sum()
    }

    pub fn variance(&self) -> f64 {
        self.groups.iter().map(|g| g.count * g.measure.variance()).sum()
    }

    /// Window certain to contain the support: the free sum of centred
    /// variables has norm at most `max_j ‖X_j‖ + 2 (Σ Var X_j)^{1/2}`, and
    /// the support lies inside the sum of the supports.
    pub fn default_window(&self) -> (f64, f64) {
        let center = self.mean();
        let radius = self
            .groups
            .iter()
            .map(|g| radius_about_mean(&g.measure))
            .fold(0.0, f64::max)
            + 2.0 * self.variance().sqrt();
        let (mut lo, mut hi) = (0.0, 0.0);
        for g in &self.groups {
            let (a, b) = g.measure.support_hull().unwrap_or((0.0, 0.0));
            lo += g.count * a;
            hi += g.count * b;
        }
        let lo = lo.max(center - radius);
        let hi = hi.min(center + radius);
        let margin = 0.05 * (hi - lo).max(1e-3 * (1.0 + center.abs())).max(0.05);
        (lo - margin, hi + margin)
    }

    /// Solves at `z`, from `hint` when given and otherwise (or when the
    /// hinted solve fails) down the ladder of heights from the top.
    pub fn solve(&self, z: UpperHalfPoint, hint: Option<&[C]>) -> Result<SubordinationResult> {
        let zc = z.to_complex();
        if let Some(h) = hint {
            if h.len() == self.groups.len() && h.iter().all(|w| w.im > 0.0) {
                let out = solve_at(&self.groups, self.reference(), zc, h, &self.cfg, HINT_ITERATIONS);
                if out.converged && self.admissible(zc, &out.zs) {
                    return Ok(self.result(z, out.zs, &out.ev, out.residual, out.iterations));
                }
            }
        }
        self.solve_ladder(z)
    }

    fn solve_ladder(&self, z: UpperHalfPoint) -> Result<SubordinationResult> {
        let zc = z.to_complex();
        let mut heights = Vec::new();
        let mut y = self.top;
        while y > zc.im {
            heights.push(y);
            y *= LADDER_FACTOR;
        }
        heights.push(zc.im);
        heights.reverse();

        let reference = self.reference();
        let mut zs = vec![C::new(zc.re, *heights.last().unwrap()); self.groups.len()];
        let mut current = f64::INFINITY;
        let mut total = 0;
        let mut history = Vec::new();
        let mut splits = 0;
        // `heights` is used as a stack: the next rung to reach is on top.
        while let Some(&h) = heights.last() {
            let rung = C::new(zc.re, h);
            let out = solve_at(&self.groups, reference, rung, &zs, &self.cfg, RUNG_ITERATIONS);
            total += out.iterations;
            if out.converged && self.admissible(rung, &out.zs) {
                heights.pop();
                current = h;
                zs = out.zs;
                if heights.is_empty() {
                    return Ok(self.result(z, zs, &out.ev, out.residual, total));
                }
                continue;
            }
            if current.is_finite() && splits < MAX_RUNG_SPLITS {
                // retry from the last solved height with an intermediate rung
                splits += 1;
                heights.push((current * h).sqrt());
                continue;
            }
            let out = solve_at(&self.groups, reference, rung, &zs, &self.cfg, self.cfg.max_iter);
            total += out.iterations;
            history.extend_from_slice(&out.history);
            if !(out.converged && self.admissible(rung, &out.zs)) {
                return Err(Error::NoConvergence {
                    iterations: total,
                    residual: out.residual,
                    history,
                });
            }
            heights.pop();
            current = h;
            zs = out.zs;
            if heights.is_empty() {
                return Ok(self.result(z, zs, &out.ev, out.residual, total));
            }
        }
        unreachable!("the ladder ends at the target height")
    }

    fn reference(&self) -> usize {
        self.membership[0]
    }

    /// `Im Z_g ≥ Im z` up to rounding, which every true solution satisfies.
    fn admissible(&self, z: C, zs: &[C]) -> bool {
        zs.iter().all(|w| w.im >= z.im * (1.0 - 1e-9) - 1e-15)
    }

    fn result(&self, z: UpperHalfPoint, zs: Vec<C>, ev: &solver::Evaluation, residual: f64, iterations: usize) -> SubordinationResult {
        let f_value = ev.f[self.reference()];
        *self.last.borrow_mut() = Some((z.to_complex(), zs.clone()));
        SubordinationResult {
            z,
            subordinators: self.membership.iter().map(|&g| zs[g]).collect(),
            f_value,
            residual,
            iterations,
            converged: true,
        }
    }

    fn group_values(&self, r: &SubordinationResult) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.groups.len()];
        for (j, &g) in self.membership.iter().enumerate() {
            out[g] = r.subordinators[j];
        }
        out
    }

    /// Solve at `z`, first trying the previous solution if it is close.
    fn solve_near_last(&self, z: C) -> Result<SubordinationResult> {
        let p = UpperHalfPoint::from_complex(z)?;
        let hint = self
            .last
            .borrow()
            .as_ref()
            .filter(|(zl, _)| (zl - z).norm() < 0.5 * z.im.max(zl.im))
            .map(|(_, zs)| zs.clone());
        self.solve(p, hint.as_deref())
    }
}

impl CauchyEvaluator for FreeSum {
    fn cauchy(&self, z: C) -> Result<C> {
        Ok(self.solve_near_last(z)?.f_value.inv())
    }

    fn cauchy_row(&self, xs: &[f64], y: f64) -> Result<Vec<C>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut hint: Option<Vec<C>> = None;
        for &x in xs {
            let r = self.solve(UpperHalfPoint::new(x, y)?, hint.as_deref())?;
            out.push(r.f_value.inv());
            hint = Some(self.group_values(&r));
        }
        Ok(out)
    }
}

impl AnalyticMap for FreeSum {
    fn eval(&self, z: C) -> C {
        match self.solve_near_last(z) {
            Ok(r) => r.f_value,
            Err(_) => C::new(f64::NAN, f64::NAN),
        }
    }

    fn eval_with_derivative(&self, z: C) -> (C, C) {
        let nan = C::new(f64::NAN, f64::NAN);
        let Ok(r) = self.solve_near_last(z) else {
            return (nan, nan);
        };
        let zs = self.group_values(&r);
        let ev = evaluate(&self.groups, &zs);
        let d = common_value_derivative(&self.groups, &ev).unwrap_or(nan);
        (r.f_value, d)
    }
}

fn radius_about_mean(m: &FiniteMeasure) -> f64 {
    let mean = m.mean();
    m.support_hull()
        .map_or(0.0, |(lo, hi)| (mean - lo).max(hi - mean))
}

/// Solves the subordination system for `μ_1 ⊞ ⋯ ⊞ μ_n`, `n ≥ 2`.
pub fn subordinate(mus: &[Measure], z: UpperHalfPoint, cfg: &SolverConfig) -> Result<SubordinationResult> {
    if mus.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "subordination needs at least two measures, got {}",
            mus.len()
        )));
    }
    FreeSum::new(mus, cfg.clone())?.solve(z, None)
}

/// Solves `z = nZ - (n-1) F_μ(Z)` for the subordinator of `μ^{⊞n}`.
pub fn subordinate_power(mu: &Measure, n: usize, z: UpperHalfPoint, cfg: &SolverConfig) -> Result<SubordinationResult> {
    let mut r = FreeSum::power(mu, n, cfg.clone())?.solve(z, None)?;
    r.subordinators.truncate(1);
    Ok(r)
}

/// Residual of a reported result against its own inputs, recomputed from
/// scratch.
pub fn check_residual(mus: &[Measure], r: &SubordinationResult) -> f64 {
    let Ok(sum) = FreeSum::new(mus, SolverConfig::default()) else {
        return f64::INFINITY;
    };
    let zs = sum.group_values(r);
    let ev = evaluate(&sum.groups, &zs);
    reported_residual(&sum.groups, sum.reference(), r.z.to_complex(), &zs, &ev)
}

/// Dirac inputs act as translations; returns their total position and the
/// remaining measures.
fn split_translations(mus: &[Measure]) -> (f64, Vec<Measure>) {
    let mut shift = 0.0;
    let mut rest = Vec::new();
    for m in mus {
        match (m.atoms(), m.density()) {
            ([a], None) => shift += a.position,
            _ => rest.push(m.clone()),
        }
    }
    (shift, rest)
}

/// Canonical order so that the result does not depend on input order.
fn canonical_cmp(a: &Measure, b: &Measure) -> Ordering {
    let key = |m: &Measure| -> Vec<f64> {
        let mut k: Vec<f64> = m.atoms().iter().flat_map(|a| [a.position, a.weight]).collect();
        k.push(f64::NAN);
        if let Some(d) = m.density() {
            k.extend_from_slice(d.grid());
            k.extend_from_slice(d.values());
        }
        k
    };
    let (ka, kb) = (key(a), key(b));
    for (x, y) in ka.iter().zip(&kb) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    ka.len().cmp(&kb.len())
}

/// `μ_1 ⊞ ⋯ ⊞ μ_n` recovered by Stieltjes inversion of `1/F`. Without a
/// window, [`FreeSum::default_window`] is used.
pub fn free_convolve(mus: &[Measure], window: Option<(f64, f64)>, resolution: usize) -> Result<Measure> {
    free_convolve_with(mus, window, resolution, &SolverConfig::default())
}

pub fn free_convolve_with(
    mus: &[Measure],
    window: Option<(f64, f64)>,
    resolution: usize,
    cfg: &SolverConfig,
) -> Result<Measure> {
    if mus.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "free convolution needs at least two measures, got {}",
            mus.len()
        )));
    }
    let (shift, mut rest) = split_translations(mus);
    rest.sort_by(canonical_cmp);
    let base = match rest.len() {
        0 => return Ok(Measure::dirac(shift)),
        1 => rest.pop().unwrap(),
        _ => {
            let sum = FreeSum::new(&rest, cfg.clone())?;
            let w = window.map(|(lo, hi)| (lo - shift, hi - shift)).unwrap_or_else(|| sum.default_window());
            snap_atoms(stieltjes_invert(&sum, w, resolution)?, &sum_atoms(&rest))?
        }
    };
    if shift == 0.0 {
        Ok(base)
    } else {
        base.transform(1.0, shift)
    }
}

/// `μ^{⊞n}`; `n = 1` returns `μ` itself.
pub fn free_power(mu: &Measure, n: usize, window: Option<(f64, f64)>, resolution: usize) -> Result<Measure> {
    free_power_with(mu, n, window, resolution, &SolverConfig::default())
}

pub fn free_power_with(
    mu: &Measure,
    n: usize,
    window: Option<(f64, f64)>,
    resolution: usize,
    cfg: &SolverConfig,
) -> Result<Measure> {
    if n == 0 {
        return Err(Error::InvalidParameter("free power needs n ≥ 1".into()));
    }
    if n == 1 {
        return Ok(mu.clone());
    }
    if let ([a], None) = (mu.atoms(), mu.density()) {
        return Ok(Measure::dirac(n as f64 * a.position));
    }
    let sum = FreeSum::power(mu, n, cfg.clone())?;
    let w = window.unwrap_or_else(|| sum.default_window());
    let atoms: Vec<(f64, f64)> = mu
        .atoms()
        .iter()
        .map(|a| (n as f64 * a.position, n as f64 * a.weight - (n - 1) as f64))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    snap_atoms(stieltjes_invert(&sum, w, resolution)?, &atoms)
}

/// Atoms of `μ_1 ⊞ ⋯ ⊞ μ_k`: one at `a_1 + ⋯ + a_k` with weight
/// `Σ μ_j({a_j}) - (k-1)` whenever that is positive.
fn sum_atoms(mus: &[Measure]) -> Vec<(f64, f64)> {
    fn walk(mus: &[Measure], position: f64, deficit: f64, out: &mut Vec<(f64, f64)>) {
        let Some((first, rest)) = mus.split_first() else {
            out.push((position, 1.0 - deficit));
            return;
        };
        for a in first.atoms() {
            let d = deficit + (1.0 - a.weight);
            if d < 1.0 {
                walk(rest, position + a.position, d, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(mus, 0.0, 0.0, &mut out);
    out
}

/// Replaces each recovered atom lying next to a predicted one by the exact
/// prediction, so that atoms agree bit for bit across evaluation routes.
fn snap_atoms(m: Measure, predicted: &[(f64, f64)]) -> Result<Measure> {
    if predicted.is_empty() || m.atoms().is_empty() {
        return Ok(m);
    }
    let (lo, hi) = m.support_hull().expect("measure has atoms");
    let tol = 1e-6 * (hi - lo).max(1.0);
    let atoms: Vec<(f64, f64)> = m
        .atoms()
        .iter()
        .map(|a| {
            predicted
                .iter()
                .copied()
                .find(|&(x, w)| (x - a.position).abs() <= tol && (w - a.weight).abs() <= 1e-6)
                .unwrap_or((a.position, a.weight))
        })
        .collect();
    let atom_mass: f64 = atoms.iter().map(|a| a.1).sum();
    let density = match m.density() {
        Some(d) if atom_mass < 1.0 => {
            let c = (1.0 - atom_mass) / d.mass();
            Some(Density::new(d.grid().to_vec(), d.values().iter().map(|v| c * v).collect())?)
        }
        _ => None,
    };
    Ok(Measure::normalized(FiniteMeasure::new(atoms, density)?))
}

/// `μ^s = μ ⊞ D_{-1}μ`.
pub fn symmetrize(mu: &Measure, window: Option<(f64, f64)>, resolution: usize) -> Result<Measure> {
    let reflected = mu.transform(-1.0, 0.0)?;
    free_convolve(&[mu.clone(), reflected], window, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::kolmogorov;
    use crate::transforms::cauchy;

    fn p(re: f64, im: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(re, im).unwrap()
    }

    fn arcsine_g(z: C) -> C {
        ((z - 2.0).sqrt() * (z + 2.0).sqrt()).inv()
    }

    #[test]
    fn small_atom_beside_a_density_peak_is_kept() {
        let mu = Measure::atoms(vec![(-1.13, 0.0832), (-0.933, 0.0758), (0.4583, 0.4932), (0.7, 0.3478)]).unwrap();
        let nu = Measure::atoms(vec![(-0.894, 0.1524), (-0.08, 0.6549), (1.2656, 0.1927)]).unwrap();
        let m = free_convolve(&[mu.clone(), nu.clone()], None, 2048).unwrap();
        let want = sum_atoms(&[mu, nu]);
        assert_eq!(want.len(), 2);
        assert_eq!(m.atoms().len(), 2);
        for (a, &(x, w)) in m.atoms().iter().zip(&want) {
            assert_eq!(a.position, x);
            assert!((a.weight - w).abs() < 1e-12, "{} vs {w}", a.weight);
        }
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_atoms_compose() {
        let mu = Measure::atoms(vec![(-1.5, 0.2), (1.05, 0.8)]).unwrap();
        let four = free_power(&mu, 4, None, 1024).unwrap();
        let two_two = free_power(&free_power(&mu, 2, None, 1024).unwrap(), 2, None, 1024).unwrap();
        assert_eq!(four.atoms()[0].position, two_two.atoms()[0].position);
        assert!(kolmogorov(&four, &two_two) < 1e-5);
    }

    #[test]
    fn identity_partner() {
        let mu = Measure::two_point(0.3).unwrap();
        let z = p(0.4, 0.8);
        let r = subordinate(&[mu.clone(), Measure::dirac(0.0)], z, &SolverConfig::default()).unwrap();
        assert!((r.subordinators[0] - z.to_complex()).norm() < 1e-12);
        let f = cauchy(&mu, z.to_complex()).inv();
        assert!((r.subordinators[1] - f).norm() < 1e-12);
    }

    #[test]
    fn semicircle_pair() {
        let s = Measure::semicircle();
        let r = subordinate(&[s.clone(), s.clone()], p(0.0, 3.0), &SolverConfig::default()).unwrap();
        // Z = (z + F)/2 with F = (z + √(z²-8))/2 for the variance-2 semicircle
        let want_f = 0.5 * (3.0 + 17f64.sqrt());
        let want_z = 0.5 * (3.0 + want_f);
        for zj in &r.subordinators {
            assert!((zj - C::new(0.0, want_z)).norm() < 1e-6, "{zj}");
        }
        assert!((r.f_value - C::new(0.0, want_f)).norm() < 1e-6);
        assert!((want_z - 3.28078).abs() < 1e-5 && (want_f - 3.56155).abs() < 1e-5);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn symmetric_bernoulli_pair() {
        let b = Measure::two_point(0.5).unwrap();
        let r = subordinate(&[b.clone(), b.clone()], p(0.0, 3.0), &SolverConfig::default()).unwrap();
        // Z + 1/Z = 3i
        let want = C::new(0.0, 0.5 * (3.0 + 13f64.sqrt()));
        assert!((r.subordinators[0] - want).norm() < 1e-12);
        assert!((r.f_value.inv() - arcsine_g(C::new(0.0, 3.0))).norm() < 1e-12);
        assert!((want.im - 3.30278).abs() < 1e-5 && (r.f_value.im - 3.60555).abs() < 1e-5);
    }

    #[test]
    fn power_equation() {
        let cfg = SolverConfig::default();
        let z = p(0.2, 0.5);
        let r = subordinate_power(&Measure::dirac(0.0), 5, z, &cfg).unwrap();
        assert!((r.subordinators[0] - z.to_complex()).norm() < 1e-12);

        let b = Measure::two_point(0.5).unwrap();
        let r = subordinate_power(&b, 2, p(0.0, 3.0), &cfg).unwrap();
        assert!((r.subordinators[0] - C::new(0.0, 3.302_775_637_731_995)).norm() < 1e-10);

        let r = subordinate_power(&Measure::semicircle(), 2, p(0.0, 3.0), &cfg).unwrap();
        assert!((r.subordinators[0] - C::new(0.0, 3.28078)).norm() < 1e-5);

        let mu = Measure::two_point(0.3).unwrap();
        for n in [1, 3, 17] {
            let z = p(-0.3, 0.05);
            let r = subordinate_power(&mu, n, z, &cfg).unwrap();
            let zz = r.subordinators[0];
            let f = cauchy(&mu, zz).inv();
            let eq = z.to_complex() - n as f64 * zz + (n as f64 - 1.0) * f;
            assert!(eq.norm() < 1e-10);
            assert!(zz.im >= z.im());
        }
    }

    #[test]
    fn hints_reproduce_ladder_solutions() {
        let mus = [Measure::two_point(0.3).unwrap(), Measure::semicircle(), Measure::two_point(0.3).unwrap()];
        let sum = FreeSum::new(&mus, SolverConfig::default()).unwrap();
        let a = sum.solve(p(0.1, 0.2), None).unwrap();
        let b = sum.solve(p(0.12, 0.2), Some(&sum.group_values(&a))).unwrap();
        let c = sum.solve(p(0.12, 0.2), None).unwrap();
        assert!((b.f_value - c.f_value).norm() < 1e-10);
        assert!(check_residual(&mus, &b) < 1e-10);
    }

    #[test]
    fn rejects_small_inputs() {
        let cfg = SolverConfig::default();
        assert!(subordinate(&[Measure::dirac(0.0)], p(0.0, 1.0), &cfg).is_err());
        assert!(free_convolve(&[Measure::dirac(0.0)], None, 64).is_err());
        assert!(free_power(&Measure::dirac(0.0), 0, None, 64).is_err());
        assert!(SolverConfig::new(0.0, 10, 1.0).is_err());
        assert!(SolverConfig::new(1e-10, 10, 1.5).is_err());
    }

    #[test]
    fn translations_are_exact() {
        let r = free_convolve(&[Measure::dirac(1.5), Measure::dirac(-0.25)], None, 256).unwrap();
        assert_eq!(r.atoms().len(), 1);
        assert_eq!(r.atoms()[0].position, 1.25);
        let mu = Measure::two_point(0.3).unwrap();
        assert_eq!(free_power(&mu, 1, None, 64).unwrap(), mu);
        let s = symmetrize(&Measure::dirac(2.0), None, 64).unwrap();
        assert_eq!(s.atoms()[0].position, 0.0);
    }

    #[test]
    fn bernoulli_square_is_arcsine() {
        let b = Measure::two_point(0.5).unwrap();
        let got = free_power(&b, 2, None, 2048).unwrap();
        let arcsine = Measure::arcsine();
        assert!(kolmogorov(&got, &arcsine) <= 5e-3);
        let sym = symmetrize(&b, None, 2048).unwrap();
        assert!(kolmogorov(&sym, &arcsine) <= 5e-3);
    }

    #[test]
    fn symmetrization_is_symmetric() {
        let mu = Measure::two_point(0.3).unwrap();
        let reflected = mu.transform(-1.0, 0.0).unwrap();
        let sum = FreeSum::new(&[mu, reflected], SolverConfig::default()).unwrap();
        let g = sum.cauchy(C::new(0.0, 1.0)).unwrap();
        assert!(g.re.abs() < 1e-10, "{g}");
    }

    #[test]
    fn convolution_moments_add() {
        let mu = Measure::two_point(0.3).unwrap().transform(1.0, 0.4).unwrap();
        let nu = Measure::atoms(vec![(-1.0, 0.5), (2.0, 0.5)]).unwrap();
        let out = free_convolve(&[mu.clone(), nu.clone()], None, 2048).unwrap();
        assert!((out.mean() - mu.mean() - nu.mean()).abs() < 1e-6);
        assert!((out.variance() - mu.variance() - nu.variance()).abs() < 1e-5);
        let swapped = free_convolve(&[nu, mu], None, 2048).unwrap();
        assert!(kolmogorov(&out, &swapped) <= 1e-9);
    }
}
