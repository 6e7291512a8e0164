// SPDX-License-Identifier: Apache-2.0

//! Stieltjes–Perron inversion: recovering a probability measure from its
//! Cauchy transform on the upper half-plane.
//!
//! Atoms are located where `s(x, y) = -y Im G(x + iy)` stays bounded away
//! from zero as `y ↓ 0`, with the continuous part's linear contribution in
//! `y` cancelled by a second height; their weights come from a linear extrapolation of
//! `s` in `y`. The continuous part is read off as `-Im G(x + iη)/π` at a
//! height `η` far below the grid spacing, after removing the atoms, on a
//! grid refined wherever linear interpolation is not yet accurate.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::measures::{Density, FiniteMeasure, Measure};

/// Source of Cauchy-transform values for inversion.
pub trait CauchyEvaluator {
    fn cauchy(&self, z: C) -> Result<C>;

    /// `G(x + iy)` for strictly increasing `xs` at one height. Implementors
    /// that solve equations per point can reuse each solution as the
    /// starting point for the next.
    fn cauchy_row(&self, xs: &[f64], y: f64) -> Result<Vec<C>> {
        xs.iter().map(|&x| self.cauchy(C::new(x, y))).collect()
    }
}

/// Wraps a closed-form `G` as a [`CauchyEvaluator`].
pub struct FnCauchy<F: Fn(C) -> C>(pub F);

impl<F: Fn(C) -> C> CauchyEvaluator for FnCauchy<F> {
    fn cauchy(&self, z: C) -> Result<C> {
        Ok((self.0)(z))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    pub resolution: usize,
    /// Minimal `-y Im G` at the grid scale for a point to be examined as an atom.
    pub atom_threshold: f64,
    /// Maximal CDF error tolerated per grid cell before it is split.
    pub cell_tolerance: f64,
    pub max_depth: usize,
    pub max_expansions: usize,
    /// Largest acceptable missing mass after the last window expansion.
    pub deficit_tolerance: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            resolution: 2048,
            atom_threshold: 1e-4,
            cell_tolerance: 1e-9,
            max_depth: 20,
            max_expansions: 4,
            deficit_tolerance: 1e-3,
        }
    }
}

pub fn stieltjes_invert(g: &dyn CauchyEvaluator, window: (f64, f64), resolution: usize) -> Result<Measure> {
    let cfg = InversionConfig {
        resolution,
        ..InversionConfig::default()
    };
    stieltjes_invert_with(g, window, &cfg)
}

pub fn stieltjes_invert_fn<F: Fn(C) -> C>(g: F, window: (f64, f64), resolution: usize) -> Result<Measure> {
    stieltjes_invert(&FnCauchy(g), window, resolution)
}

pub fn stieltjes_invert_with(
    g: &dyn CauchyEvaluator,
    window: (f64, f64),
    cfg: &InversionConfig,
) -> Result<Measure> {
    let (mut lo, mut hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("invalid window [{lo}, {hi}]")));
    }
    if cfg.resolution < 3 {
        return Err(Error::InvalidParameter("resolution must be at least 3".into()));
    }
    let mut expansions = 0;
    loop {
        let attempt = invert_on(g, lo, hi, cfg)?;
        let deficit = 1.0 - attempt.mass;
        let open_edges = attempt.edge_density > 1e-3 * attempt.peak_density.max(1e-300);
        if (deficit > cfg.deficit_tolerance || open_edges) && expansions < cfg.max_expansions {
            let grow = 0.25 * (hi - lo);
            lo -= grow;
            hi += grow;
            expansions += 1;
            continue;
        }
        if deficit > cfg.deficit_tolerance {
            return Err(Error::WindowTooSmall { lo, hi, deficit });
        }
        return Ok(Measure::normalized(attempt.measure));
    }
}

struct Attempt {
    measure: FiniteMeasure,
    mass: f64,
    edge_density: f64,
    peak_density: f64,
}

fn invert_on(g: &dyn CauchyEvaluator, lo: f64, hi: f64, cfg: &InversionConfig) -> Result<Attempt> {
    let width = hi - lo;
    let n = cfg.resolution;
    let step = width / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();

    let atoms = find_atoms(g, &xs, step, width, cfg)?;

    let eta = 1e-9 * width;
    // Near an atom the height drops with the cube of the distance, which
    // keeps the error left by subtracting an atom with slightly wrong weight
    // or position below its level at distance `near`; only a tiny blind zone
    // around each atom remains.
    let near = 1e-6 * width;
    let exclusion = 1e-8 * width;
    let density_at = |xs: &[f64]| -> Result<Vec<f64>> {
        let gap = |x: f64| atoms.iter().map(|&(a, _)| (x - a).abs()).fold(f64::INFINITY, f64::min);
        let far: Vec<f64> = xs.iter().copied().filter(|&x| gap(x) >= near).collect();
        let mut far_g = g.cauchy_row(&far, eta)?.into_iter();
        xs.iter()
            .map(|&x| {
                let d = gap(x);
                if d < exclusion {
                    return Ok(f64::NAN);
                }
                let (z, gz) = if d >= near {
                    (C::new(x, eta), far_g.next().expect("one value per far node"))
                } else {
                    let z = C::new(x, eta * (d / near).powi(3));
                    (z, g.cauchy(z)?)
                };
                let rest: C = atoms.iter().fold(gz, |acc, &(a, w)| acc - w / (z - a));
                Ok((-rest.im / std::f64::consts::PI).max(0.0))
            })
            .collect()
    };

    let values = density_at(&xs)?;
    let (grid, mut values) = refine(&xs, values, cfg, 2.0 * exclusion, &density_at)?;
    fill_gaps(&mut values);

    let peak = values.iter().cloned().fold(0.0, f64::max);
    // capped so that a narrow spike cannot wipe out a broad low density
    let floor = (1e-6 * peak.min(1.0 / width)).max(1e-8 / width);
    for v in values.iter_mut() {
        if *v < floor {
            *v = 0.0;
        }
    }
    let edge_density = values[0].max(*values.last().unwrap());
    let density = trimmed_density(grid, values)?;
    let measure = FiniteMeasure::new(atoms, density)?;
    let mass = measure.total_mass();
    Ok(Attempt {
        measure,
        mass,
        edge_density,
        peak_density: peak,
    })
}

/// Scans the atom indicator `a(x, y) = 2 s(x, y) - s(x, 2y)`, where
/// `s(x, y) = -y Im G(x + iy)`, at `y = step` and follows each local maximum
/// above the threshold down to heights of order `1e-9 · width`. An atom of
/// weight `w` contributes about `w` to `a` near its position, while the
/// continuous part, which contributes to `s` linearly in `y`, cancels.
fn find_atoms(
    g: &dyn CauchyEvaluator,
    xs: &[f64],
    step: f64,
    width: f64,
    cfg: &InversionConfig,
) -> Result<Vec<(f64, f64)>> {
    let near = g.cauchy_row(xs, step)?;
    let far = g.cauchy_row(xs, 2.0 * step)?;
    let a: Vec<f64> = near
        .iter()
        .zip(&far)
        .map(|(g1, g2)| -2.0 * step * g1.im + 2.0 * step * g2.im)
        .collect();
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for i in 0..a.len() {
        let left = if i > 0 { a[i - 1] } else { f64::NEG_INFINITY };
        let right = a.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if a[i] <= cfg.atom_threshold || a[i] < left || a[i] <= right {
            continue;
        }
        if let Some(atom) = follow_atom(g, xs[i], step, width, cfg)? {
            if !atoms.iter().any(|&(p, _)| (p - atom.0).abs() < 1e-8 * width) {
                atoms.push(atom);
            }
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(atoms)
}

fn follow_atom(
    g: &dyn CauchyEvaluator,
    start: f64,
    step: f64,
    width: f64,
    cfg: &InversionConfig,
) -> Result<Option<(f64, f64)>> {
    const SCAN: usize = 32;
    let s_at = |x: f64, y: f64| -> Result<f64> { Ok(-y * g.cauchy(C::new(x, y))?.im) };
    let a_at = |x: f64, y: f64| -> Result<f64> { Ok(2.0 * s_at(x, y)? - s_at(x, 2.0 * y)?) };
    let mut center = start;
    let mut y = step;
    let floor = 1e-9 * width;
    while y > 8.0 * floor {
        let half = y;
        y /= 8.0;
        // coarse scan first: the indicator need not be unimodal on the bracket
        let h = 2.0 * half / SCAN as f64;
        let mut best = (center, f64::NEG_INFINITY);
        for k in 0..=SCAN {
            let x = center - half + h * k as f64;
            let v = a_at(x, y)?;
            if v > best.1 {
                best = (x, v);
            }
        }
        let (x, v) = golden_max(|x| a_at(x, y), best.0 - h, best.0 + h, 1e-3 * y)?;
        if v.max(best.1) < 0.5 * cfg.atom_threshold {
            return Ok(None);
        }
        center = if v >= best.1 { x } else { best.0 };
    }
    let (ya, yb) = (1e-7 * width, 1e-8 * width);
    let (mut center, mut sb) = golden_max(|x| s_at(x, yb), center - 8.0 * y, center + 8.0 * y, 1e-4 * yb)?;
    let mut sa = s_at(center, ya)?;
    if !(sb > 0.9 * sa) {
        return Ok(None);
    }
    let mut weight = (ya * sb - yb * sa) / (ya - yb);
    // G(z) ≈ w / (z - a) close to the atom, so z - w / G(z) pins `a` far
    // more sharply than the flat maximum of `s`
    for _ in 0..2 {
        let z = C::new(center, yb);
        let a = (z - weight / g.cauchy(z)?).re;
        if !((a - center).abs() <= yb) {
            break;
        }
        center = a;
        sa = s_at(center, ya)?;
        sb = s_at(center, yb)?;
        weight = (ya * sb - yb * sa) / (ya - yb);
    }
    if weight < 0.5 * cfg.atom_threshold {
        return Ok(None);
    }
    Ok(Some((center, weight.min(1.0))))
}

/// Golden-section search for the maximum of a unimodal function.
fn golden_max<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Inserts midpoints into every cell whose linear interpolant misses the
/// midpoint value by more than the per-cell tolerance, level by level. Cells
/// touching an excluded (NaN) node are split down to width `min_blind`.
fn refine(
    xs: &[f64],
    values: Vec<f64>,
    cfg: &InversionConfig,
    min_blind: f64,
    density_at: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    // Each entry is a node followed by its value; cells are consecutive pairs.
    let mut nodes: Vec<(f64, f64)> = xs.iter().copied().zip(values).collect();
    let mut pending: Vec<usize> = (0..nodes.len() - 1).collect();
    for _ in 0..cfg.max_depth {
        if pending.is_empty() {
            break;
        }
        let mids: Vec<f64> = pending
            .iter()
            .map(|&i| 0.5 * (nodes[i].0 + nodes[i + 1].0))
            .collect();
        let fm = density_at(&mids)?;
        let mut inserted: Vec<(usize, f64, f64, bool)> = Vec::with_capacity(pending.len());
        for (k, &i) in pending.iter().enumerate() {
            let (x0, f0) = nodes[i];
            let (x1, f1) = nodes[i + 1];
            let err = (fm[k] - 0.5 * (f0 + f1)).abs() * (x1 - x0);
            let split = if err.is_finite() {
                err > cfg.cell_tolerance
            } else {
                x1 - x0 > min_blind
            };
            inserted.push((i, mids[k], fm[k], split));
        }
        // Rebuild the node list, tracking the new indices of cells to revisit.
        let mut next_nodes = Vec::with_capacity(nodes.len() + inserted.len());
        let mut next_pending = Vec::new();
        let mut it = inserted.into_iter().peekable();
        for (i, node) in nodes.iter().enumerate() {
            next_nodes.push(*node);
            if let Some(&(j, xm, fmv, split)) = it.peek() {
                if j == i {
                    it.next();
                    if split {
                        next_pending.push(next_nodes.len() - 1);
                        next_pending.push(next_nodes.len());
                    }
                    next_nodes.push((xm, fmv));
                }
            }
        }
        nodes = next_nodes;
        pending = next_pending;
    }
    Ok(nodes.into_iter().unzip())
}

/// Replaces NaN node values by linear interpolation between valid neighbours.
fn fill_gaps(values: &mut [f64]) {
    let n = values.len();
    let mut i = 0;
    while i < n {
        if !values[i].is_nan() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && values[i].is_nan() {
            i += 1;
        }
        let left = start.checked_sub(1).map(|k| values[k]);
        let right = (i < n).then(|| values[i]);
        let fill = match (left, right) {
            (Some(l), Some(r)) => 0.5 * (l + r),
            (Some(v), None) | (None, Some(v)) => v,
            (None, None) => 0.0,
        };
        for v in &mut values[start..i] {
            *v = fill;
        }
    }
}

/// Drops zero runs at both ends, keeping one zero node on each side.
fn trimmed_density(grid: Vec<f64>, values: Vec<f64>) -> Result<Option<Density>> {
    let Some(first) = values.iter().position(|&v| v > 0.0) else {
        return Ok(None);
    };
    let last = values.iter().rposition(|&v| v > 0.0).unwrap();
    let a = first.saturating_sub(1);
    let b = (last + 1).min(values.len() - 1);
    if a == b {
        return Ok(None);
    }
    Ok(Some(Density::new(grid[a..=b].to_vec(), values[a..=b].to_vec())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::levy;
    use std::f64::consts::PI;

    #[test]
    fn dirac_is_recovered_as_one_atom() {
        let m = stieltjes_invert_fn(|z: C| z.inv(), (-1.0, 1.0), 256).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!(m.atoms()[0].position.abs() < 1e-8);
        assert!((m.atoms()[0].weight - 1.0).abs() < 1e-6);
        assert!(m.density().is_none());
    }

    #[test]
    fn semicircle_density_is_recovered() {
        let g = |z: C| 2.0 / (z + (z - 2.0).sqrt() * (z + 2.0).sqrt());
        let m = stieltjes_invert_fn(g, (-2.5, 2.5), 1024).unwrap();
        assert!(m.atoms().is_empty());
        let mut worst: f64 = 0.0;
        for k in 0..=400 {
            let x = -2.5 + 5.0 * k as f64 / 400.0;
            let want = (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI);
            worst = worst.max((m.density_at(x) - want).abs());
        }
        assert!(worst <= 1e-3, "sup error {worst}");
    }

    #[test]
    fn arcsine_density_is_recovered_inside() {
        let g = |z: C| ((z - 2.0).sqrt() * (z + 2.0).sqrt()).inv();
        let m = stieltjes_invert_fn(g, (-2.5, 2.5), 1024).unwrap();
        assert!(m.atoms().is_empty(), "{:?}", m.atoms());
        let mut worst: f64 = 0.0;
        for k in 0..=380 {
            let x = -1.9 + 3.8 * k as f64 / 380.0;
            let want = 1.0 / (PI * (4.0 - x * x).sqrt());
            worst = worst.max((m.density_at(x) - want).abs());
        }
        assert!(worst <= 1e-3, "sup error {worst}");
        assert!((m.cdf(1.0) - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn mixed_measure_round_trip() {
        let mu = Measure::mixed(
            vec![(-0.5, 0.3), (1.2, 0.1)],
            vec![-1.0, 0.0, 0.5, 2.0],
            vec![0.0, 0.48, 0.24, 0.0],
        )
        .unwrap();
        let back = stieltjes_invert_fn(|z| crate::transforms::cauchy(&mu, z), (-2.0, 3.0), 1024);
        let back = back.unwrap();
        assert_eq!(back.atoms().len(), 2);
        assert!((back.atoms()[0].weight - 0.3).abs() < 1e-6);
        // atom positions carry ~1e-12 error, which Kolmogorov distance does not forgive
        assert!(levy(&mu, &back) < 1e-6);
        assert!((mu.cdf(0.0) - back.cdf(0.0)).abs() < 1e-6);
    }

    #[test]
    fn small_window_is_expanded_or_rejected() {
        let g = |z: C| 2.0 / (z + (z - 2.0).sqrt() * (z + 2.0).sqrt());
        let m = stieltjes_invert_fn(g, (-1.0, 1.0), 512).unwrap();
        assert!((m.cdf(0.0) - 0.5).abs() < 1e-4);
        let cfg = InversionConfig {
            resolution: 256,
            max_expansions: 0,
            ..InversionConfig::default()
        };
        let err = stieltjes_invert_with(&FnCauchy(g), (-0.5, 0.5), &cfg).unwrap_err();
        assert!(matches!(err, Error::WindowTooSmall { .. }));
    }

    #[test]
    fn gaps_are_interpolated() {
        let mut v = vec![1.0, f64::NAN, f64::NAN, 3.0, f64::NAN];
        fill_gaps(&mut v);
        assert_eq!(v, vec![1.0, 2.0, 2.0, 3.0, 3.0]);
    }
}
