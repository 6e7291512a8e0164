// SPDX-License-Identifier: Apache-2.0

//! Probability measures on the real line stored as finitely many atoms plus
//! a piecewise-linear density on a strictly increasing grid.
//!
//! CDFs are left-continuous throughout: `cdf(x)` is the mass of `(-inf, x)`.

mod distance;

pub use distance::{distance, kolmogorov, levy, sup_shifted_difference, DistanceKind};

use std::f64::consts::PI;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::quad;
use crate::transforms::FarFieldCache;

/// Relative slack accepted when validating user-supplied probability masses.
pub const MASS_TOLERANCE: f64 = 1e-6;
/// Grid size used by the arcsine constructor.
pub const DEFAULT_GRID: usize = 2048;
/// Grid size used by the semicircle constructor.
pub const SEMICIRCLE_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

/// Piecewise-linear nonnegative density. Zero outside `[grid[0], grid[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    grid: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
    far_field: FarFieldCache,
}

impl Density {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidMeasure("density grid needs at least 2 nodes".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidMeasure(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite grid node".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("density grid is not strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidMeasure("density values must be finite and nonnegative".into()));
        }
        Ok(Self::from_parts_unchecked(grid, values))
    }

    fn from_parts_unchecked(grid: Vec<f64>, values: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..grid.len() - 1 {
            acc += 0.5 * (values[i] + values[i + 1]) * (grid[i + 1] - grid[i]);
            cumulative.push(acc);
        }
        Density {
            grid,
            values,
            cumulative,
            far_field: FarFieldCache::default(),
        }
    }

    /// Builds a density on `grid` whose cell masses equal `masses` exactly,
    /// staying as close as possible to `reference` node values. The cell
    /// constraints leave one alternating degree of freedom, fixed by least
    /// squares against the finite reference values.
    pub fn matching_cell_masses(grid: Vec<f64>, masses: &[f64], reference: &[f64]) -> Result<Self> {
        let n = grid.len();
        if masses.len() + 1 != n || reference.len() != n {
            return Err(Error::InvalidMeasure("cell mass / grid length mismatch".into()));
        }
        let mut particular = vec![0.0; n];
        for j in 0..n - 1 {
            particular[j + 1] = 2.0 * masses[j] / (grid[j + 1] - grid[j]) - particular[j];
        }
        let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        let (mut num, mut count) = (0.0, 0usize);
        for j in 0..n {
            if reference[j].is_finite() {
                num += sign(j) * (reference[j] - particular[j]);
                count += 1;
            }
        }
        let c = if count > 0 { num / count as f64 } else { 0.0 };
        let values = (0..n).map(|j| (particular[j] + sign(j) * c).max(0.0)).collect();
        Density::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn lower(&self) -> f64 {
        self.grid[0]
    }

    pub fn upper(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn cells(&self) -> usize {
        self.grid.len() - 1
    }

    /// `(t0, t1, f0, f1)` for cell `i`.
    #[inline]
    pub fn cell(&self, i: usize) -> (f64, f64, f64, f64) {
        (self.grid[i], self.grid[i + 1], self.values[i], self.values[i + 1])
    }

    pub(crate) fn far_field(&self) -> &FarFieldCache {
        &self.far_field
    }

    fn locate(&self, x: f64) -> Option<usize> {
        if x < self.grid[0] || x >= self.upper() {
            return None;
        }
        let i = self.grid.partition_point(|&g| g <= x);
        Some(i - 1)
    }

    pub fn value_at(&self, x: f64) -> f64 {
        if x == self.upper() {
            return *self.values.last().unwrap();
        }
        match self.locate(x) {
            None => 0.0,
            Some(i) => {
                let (t0, t1, f0, f1) = self.cell(i);
                f0 + (f1 - f0) * (x - t0) / (t1 - t0)
            }
        }
    }

    /// Integral of the density over `(-inf, x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        match self.locate(x) {
            None => self.mass(),
            Some(i) => {
                let (t0, t1, f0, f1) = self.cell(i);
                let dx = x - t0;
                let slope = (f1 - f0) / (t1 - t0);
                self.cumulative[i] + f0 * dx + 0.5 * slope * dx * dx
            }
        }
    }

    /// Integral over `[lo, hi]` of `g(t) * density(t)` with an 8-point rule per cell.
    pub fn integrate_between<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, g: F) -> f64 {
        let gl = quad::rule(8);
        let mut total = 0.0;
        for i in 0..self.cells() {
            let (t0, t1, f0, f1) = self.cell(i);
            let a = t0.max(lo);
            let b = t1.min(hi);
            if b <= a || (f0 == 0.0 && f1 == 0.0) {
                continue;
            }
            let slope = (f1 - f0) / (t1 - t0);
            total += gl.integrate(a, b, |t| (f0 + slope * (t - t0)) * g(t));
        }
        total
    }

    fn scaled(&self, c: f64) -> Density {
        Density {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            cumulative: self.cumulative.iter().map(|v| v * c).collect(),
            far_field: FarFieldCache::default(),
        }
    }

    fn affine(&self, gamma: f64, shift: f64) -> Result<Density> {
        let mut grid: Vec<f64> = self.grid.iter().map(|g| gamma * g + shift).collect();
        let mut values: Vec<f64> = self.values.iter().map(|v| v / gamma.abs()).collect();
        if gamma < 0.0 {
            grid.reverse();
            values.reverse();
        }
        Density::new(grid, values)
    }
}

/// Finite nonnegative Borel measure with the same atoms + density layout as
/// [`Measure`], without the unit-mass constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    atoms: Vec<Atom>,
    atom_prefix: Vec<f64>,
    density: Option<Density>,
}

impl FiniteMeasure {
    /// Atoms may come in any order; zero weights are dropped.
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<Density>) -> Result<Self> {
        let mut list = Vec::with_capacity(atoms.len());
        for (position, weight) in atoms {
            if !position.is_finite() || !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "invalid atom ({position}, {weight})"
                )));
            }
            if weight > 0.0 {
                list.push(Atom { position, weight });
            }
        }
        list.sort_by(|a, b| a.position.total_cmp(&b.position));
        if list.windows(2).any(|w| w[0].position == w[1].position) {
            return Err(Error::InvalidMeasure("duplicate atom position".into()));
        }
        Ok(Self::from_sorted(list, density))
    }

    fn from_sorted(atoms: Vec<Atom>, density: Option<Density>) -> Self {
        let mut atom_prefix = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        atom_prefix.push(0.0);
        for a in &atoms {
            acc += a.weight;
            atom_prefix.push(acc);
        }
        FiniteMeasure {
            atoms,
            atom_prefix,
            density,
        }
    }

    pub fn zero() -> Self {
        Self::from_sorted(Vec::new(), None)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn atom_mass(&self) -> f64 {
        *self.atom_prefix.last().unwrap()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass() + self.density.as_ref().map_or(0.0, Density::mass)
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass() == 0.0
    }

    /// Mass of `(-inf, x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.position < x);
        self.atom_prefix[k] + self.density.as_ref().map_or(0.0, |d| d.cdf(x))
    }

    /// Mass of `(-inf, x]`.
    pub fn cdf_right(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.position <= x);
        self.atom_prefix[k] + self.density.as_ref().map_or(0.0, |d| d.cdf(x))
    }

    /// Value of the continuous part at `x`.
    pub fn density_at(&self, x: f64) -> f64 {
        self.density.as_ref().map_or(0.0, |d| d.value_at(x))
    }

    /// `∫ g dμ`; atoms exactly, density with a per-cell Gauss rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight * g(a.position)).sum();
        let cont = self
            .density
            .as_ref()
            .map_or(0.0, |d| d.integrate_between(f64::NEG_INFINITY, f64::INFINITY, &g));
        atoms + cont
    }

    /// `∫_{(lo, hi)} g dμ` over the open interval.
    pub fn integrate_open<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, g: F) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.position > lo && a.position < hi)
            .map(|a| a.weight * g(a.position))
            .sum();
        let cont = self
            .density
            .as_ref()
            .map_or(0.0, |d| d.integrate_between(lo, hi, &g));
        atoms + cont
    }

    /// `m_k` or, with `absolute`, `β_k`. Exact for the stored representation.
    pub fn moment(&self, k: u32, absolute: bool) -> f64 {
        let pow = |t: f64| {
            if absolute {
                t.abs().powi(k as i32)
            } else {
                t.powi(k as i32)
            }
        };
        let atoms: f64 = self.atoms.iter().map(|a| a.weight * pow(a.position)).sum();
        let Some(d) = &self.density else {
            return atoms;
        };
        let gl = quad::rule((k as usize + 3) / 2 + 1);
        let mut cont = 0.0;
        for i in 0..d.cells() {
            let (t0, t1, f0, f1) = d.cell(i);
            if f0 == 0.0 && f1 == 0.0 {
                continue;
            }
            let slope = (f1 - f0) / (t1 - t0);
            let lin = |t: f64| f0 + slope * (t - t0);
            if absolute && t0 < 0.0 && t1 > 0.0 {
                cont += gl.integrate(t0, 0.0, |t| lin(t) * pow(t));
                cont += gl.integrate(0.0, t1, |t| lin(t) * pow(t));
            } else {
                cont += gl.integrate(t0, t1, |t| lin(t) * pow(t));
            }
        }
        atoms + cont
    }

    pub fn mean(&self) -> f64 {
        self.moment(1, false) / self.total_mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.moment(2, false) / self.total_mass() - m * m).max(0.0)
    }

    /// Smallest closed interval carrying all the mass.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let (Some(first), Some(last)) = (self.atoms.first(), self.atoms.last()) {
            lo = first.position;
            hi = last.position;
        }
        if let Some(d) = &self.density {
            let g = d.grid();
            let v = d.values();
            if let Some(i) = (0..g.len()).find(|&i| v[i] > 0.0) {
                lo = lo.min(g[i.saturating_sub(1)]);
            }
            if let Some(i) = (0..g.len()).rev().find(|&i| v[i] > 0.0) {
                hi = hi.max(g[(i + 1).min(g.len() - 1)]);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn scaled(&self, c: f64) -> FiniteMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                position: a.position,
                weight: a.weight * c,
            })
            .collect();
        Self::from_sorted(atoms, self.density.as_ref().map(|d| d.scaled(c)))
    }

    /// Image under `t ↦ gamma * t + shift`.
    pub fn affine(&self, gamma: f64, shift: f64) -> Result<FiniteMeasure> {
        if gamma == 0.0 || !gamma.is_finite() || !shift.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "affine map needs a finite nonzero scale, got {gamma}"
            )));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| (gamma * a.position + shift, a.weight))
            .collect();
        let density = self.density.as_ref().map(|d| d.affine(gamma, shift)).transpose()?;
        FiniteMeasure::new(atoms, density)
    }

    /// `g(t) μ(dt)` with the density part re-sampled at its own nodes.
    pub fn weighted<F: Fn(f64) -> f64>(&self, g: F) -> FiniteMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                position: a.position,
                weight: a.weight * g(a.position),
            })
            .filter(|a| a.weight > 0.0)
            .collect();
        let density = self.density.as_ref().map(|d| {
            let values = d.grid.iter().zip(&d.values).map(|(&x, &v)| v * g(x)).collect();
            Density::from_parts_unchecked(d.grid.clone(), values)
        });
        Self::from_sorted(atoms, density)
    }

    /// Sum of finite measures. Densities are added on the union grid; a
    /// density that does not vanish at an end node is closed off by an extra
    /// node one ulp-scale step outside, which perturbs its mass at the
    /// 1e-12 level.
    pub fn sum(parts: &[FiniteMeasure]) -> FiniteMeasure {
        let mut atoms: Vec<Atom> = Vec::new();
        for p in parts {
            atoms.extend_from_slice(&p.atoms);
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.position == a.position => last.weight += a.weight,
                _ => merged.push(a),
            }
        }
        let densities: Vec<&Density> = parts.iter().filter_map(|p| p.density.as_ref()).collect();
        let density = match densities.len() {
            0 => None,
            1 => Some(densities[0].clone()),
            _ => {
                let closed: Vec<Density> = densities.iter().map(|d| close_ends(d)).collect();
                let mut grid: Vec<f64> = closed.iter().flat_map(|d| d.grid.iter().copied()).collect();
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                let values = grid
                    .iter()
                    .map(|&x| closed.iter().map(|d| d.value_at(x)).sum())
                    .collect();
                Some(Density::from_parts_unchecked(grid, values))
            }
        };
        Self::from_sorted(merged, density)
    }

    /// Sorted atom positions and grid nodes.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.position).collect();
        if let Some(d) = &self.density {
            pts.extend_from_slice(&d.grid);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

fn close_ends(d: &Density) -> Density {
    let mut grid = d.grid.clone();
    let mut values = d.values.clone();
    let step = |x: f64| 1e-12 * (1.0 + x.abs());
    if values[0] != 0.0 {
        grid.insert(0, grid[0] - step(grid[0]));
        values.insert(0, 0.0);
    }
    if *values.last().unwrap() != 0.0 {
        let x = *grid.last().unwrap();
        grid.push(x + step(x));
        values.push(0.0);
    }
    Density::from_parts_unchecked(grid, values)
}

/// Named families accepted by [`Measure::construct`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Atoms(Vec<(f64, f64)>),
    Density { grid: Vec<f64>, values: Vec<f64> },
    Mixed {
        atoms: Vec<(f64, f64)>,
        grid: Vec<f64>,
        values: Vec<f64>,
    },
    Semicircle,
    TwoPoint(f64),
    Arcsine,
}

/// Borel probability measure: a [`FiniteMeasure`] of unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure(FiniteMeasure);

impl Deref for Measure {
    type Target = FiniteMeasure;

    fn deref(&self) -> &FiniteMeasure {
        &self.0
    }
}

impl Measure {
    pub fn construct(family: &Family) -> Result<Measure> {
        match family {
            Family::Atoms(atoms) => Measure::atoms(atoms.clone()),
            Family::Density { grid, values } => Measure::density(grid.clone(), values.clone()),
            Family::Mixed {
                atoms,
                grid,
                values,
            } => Measure::mixed(atoms.clone(), grid.clone(), values.clone()),
            Family::Semicircle => Ok(Measure::semicircle()),
            Family::TwoPoint(p) => Measure::two_point(*p),
            Family::Arcsine => Ok(Measure::arcsine()),
        }
    }

    /// Accepts a finite measure whose mass is within [`MASS_TOLERANCE`] of 1
    /// and rescales it to unit mass.
    pub fn from_finite(m: FiniteMeasure) -> Result<Measure> {
        let mass = m.total_mass();
        if !mass.is_finite() || (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("total mass {mass} is not 1")));
        }
        Ok(Measure::normalized(m))
    }

    /// Rescales a positive finite measure to unit mass.
    pub(crate) fn normalized(m: FiniteMeasure) -> Measure {
        let mass = m.total_mass();
        if mass == 1.0 {
            Measure(m)
        } else {
            Measure(m.scaled(1.0 / mass))
        }
    }

    pub fn dirac(position: f64) -> Measure {
        Measure(FiniteMeasure::from_sorted(
            vec![Atom {
                position,
                weight: 1.0,
            }],
            None,
        ))
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Measure> {
        if atoms.iter().any(|&(_, w)| w <= 0.0 || w > 1.0 + MASS_TOLERANCE) {
            return Err(Error::InvalidMeasure("atom weights must lie in (0, 1]".into()));
        }
        Measure::from_finite(FiniteMeasure::new(atoms, None)?)
    }

    pub fn density(grid: Vec<f64>, values: Vec<f64>) -> Result<Measure> {
        Measure::from_finite(FiniteMeasure::new(Vec::new(), Some(Density::new(grid, values)?))?)
    }

    pub fn mixed(atoms: Vec<(f64, f64)>, grid: Vec<f64>, values: Vec<f64>) -> Result<Measure> {
        if atoms.iter().any(|&(_, w)| w <= 0.0 || w > 1.0 + MASS_TOLERANCE) {
            return Err(Error::InvalidMeasure("atom weights must lie in (0, 1]".into()));
        }
        Measure::from_finite(FiniteMeasure::new(atoms, Some(Density::new(grid, values)?))?)
    }

    /// Standard semicircle law on `[-2, 2]`, density `√(4-x²)/2π`, sampled
    /// exactly at [`SEMICIRCLE_GRID`] cosine-spaced nodes.
    pub fn semicircle() -> Measure {
        Measure::semicircle_with(SEMICIRCLE_GRID)
    }

    pub fn semicircle_with(nodes: usize) -> Measure {
        let grid = cosine_nodes(nodes, 2.0);
        let values = grid
            .iter()
            .map(|x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI))
            .collect();
        let density = Density::from_parts_unchecked(grid, values);
        Measure::normalized(FiniteMeasure::from_sorted(Vec::new(), Some(density)))
    }

    /// Arcsine law on `[-2, 2]`, density `1/(π√(4-x²))`. Node values are
    /// chosen so every cell carries its exact mass `1/(nodes-1)`.
    pub fn arcsine() -> Measure {
        Measure::arcsine_with(DEFAULT_GRID)
    }

    pub fn arcsine_with(nodes: usize) -> Measure {
        let grid = cosine_nodes(nodes, 2.0);
        let masses = vec![1.0 / (nodes - 1) as f64; nodes - 1];
        let reference: Vec<f64> = grid
            .iter()
            .map(|x| {
                let r = 4.0 - x * x;
                if r > 0.0 {
                    1.0 / (PI * r.sqrt())
                } else {
                    f64::NAN
                }
            })
            .collect();
        let d = Density::matching_cell_masses(grid, &masses, &reference)
            .expect("cosine grid is strictly increasing");
        let n = d.values.len();
        let values: Vec<f64> = (0..n).map(|j| 0.5 * (d.values[j] + d.values[n - 1 - j])).collect();
        let density = Density::from_parts_unchecked(d.grid, values);
        Measure::normalized(FiniteMeasure::from_sorted(Vec::new(), Some(density)))
    }

    /// Two-point law with `μ({-√(p/q)}) = q`, `μ({√(q/p)}) = p`, `q = 1-p`:
    /// mean zero, variance one.
    pub fn two_point(p: f64) -> Result<Measure> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("two_point needs p in (0,1), got {p}")));
        }
        let q = 1.0 - p;
        let atoms = vec![
            Atom {
                position: -(p / q).sqrt(),
                weight: q,
            },
            Atom {
                position: (q / p).sqrt(),
                weight: p,
            },
        ];
        Ok(Measure(FiniteMeasure::from_sorted(atoms, None)))
    }

    /// Law of `gamma * X + shift`; `gamma = -1, shift = 0` is the reflection.
    pub fn transform(&self, gamma: f64, shift: f64) -> Result<Measure> {
        Ok(Measure(self.0.affine(gamma, shift)?))
    }

    pub fn as_finite(&self) -> &FiniteMeasure {
        &self.0
    }

    pub fn into_finite(self) -> FiniteMeasure {
        self.0
    }
}

/// `n` nodes `-r cos(πj/(n-1))`, exactly symmetric about the origin.
pub(crate) fn cosine_nodes(n: usize, radius: f64) -> Vec<f64> {
    assert!(n >= 2);
    let mut grid = vec![0.0; n];
    for j in 0..n / 2 {
        let x = -radius * (PI * j as f64 / (n - 1) as f64).cos();
        grid[j] = x;
        grid[n - 1 - j] = -x;
    }
    if n % 2 == 1 {
        grid[n / 2] = 0.0;
    }
    grid[0] = -radius;
    grid[n - 1] = radius;
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_point_atoms() {
        let half = Measure::two_point(0.5).unwrap();
        assert_eq!(half.atoms().len(), 2);
        assert!(close(half.atoms()[0].position, -1.0, 1e-15));
        assert!(close(half.atoms()[1].position, 1.0, 1e-15));
        assert!(close(half.atoms()[0].weight, 0.5, 1e-15));

        let m = Measure::two_point(0.3).unwrap();
        assert!(close(m.atoms()[0].position, -0.654_653_670_707_977_1, 1e-12));
        assert!(close(m.atoms()[0].weight, 0.7, 1e-15));
        assert!(close(m.atoms()[1].position, 1.527_525_231_651_947, 1e-12));
        assert!(close(m.atoms()[1].weight, 0.3, 1e-15));
    }

    #[test]
    fn two_point_rejects_bad_p() {
        for p in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(Measure::two_point(p).is_err());
        }
    }

    #[test]
    fn two_point_standardized() {
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let m = Measure::two_point(p).unwrap();
            assert!(close(m.moment(1, false), 0.0, 1e-12));
            assert!(close(m.moment(2, false), 1.0, 1e-12));
        }
    }

    #[test]
    fn moments() {
        let a = Measure::dirac(1.7);
        for k in 0..6 {
            assert!(close(a.moment(k, false), 1.7f64.powi(k as i32), 1e-12));
        }
        let m = Measure::two_point(0.3).unwrap();
        assert!(close(m.moment(3, false), 0.4 / 0.21f64.sqrt(), 1e-12));
        assert!(close(m.moment(3, false), 0.872_871_560_943_969_6, 1e-12));
        let s = Measure::semicircle();
        assert!(close(s.moment(2, false), 1.0, 1e-6));
        assert!(close(s.moment(4, false), 2.0, 1e-6));
        assert!(close(s.moment(6, false), 5.0, 1e-5));
        assert!(close(s.moment(3, false), 0.0, 1e-12));
    }

    #[test]
    fn cdf_values() {
        let d = Measure::dirac(0.0);
        assert_eq!(d.cdf(1.0), 1.0);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf_right(0.0), 1.0);
        let s = Measure::semicircle();
        assert!(close(s.cdf(0.0), 0.5, 1e-12));
        let a = Measure::arcsine();
        assert!(close(a.cdf(1.0), 2.0 / 3.0, 1e-6));
        assert!(close(a.total_mass(), 1.0, 1e-12));
    }

    #[test]
    fn mass_invariant_for_constructors() {
        for m in [
            Measure::semicircle(),
            Measure::arcsine(),
            Measure::two_point(0.2).unwrap(),
            Measure::dirac(3.0),
        ] {
            assert!(close(m.total_mass(), 1.0, 1e-9));
            assert!(m.density().is_none_or(|d| d.values().iter().all(|&v| v >= 0.0)));
        }
    }

    #[test]
    fn constructor_errors() {
        assert!(Measure::atoms(vec![(0.0, 0.5)]).is_err());
        assert!(Measure::atoms(vec![(0.0, -0.5), (1.0, 1.5)]).is_err());
        assert!(Measure::atoms(vec![(0.0, 0.5), (0.0, 0.5)]).is_err());
        assert!(Measure::density(vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(Measure::density(vec![0.0, 1.0], vec![1.0, 1.0]).is_ok());
        assert!(Measure::density(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn transforms() {
        let m = Measure::two_point(0.3).unwrap();
        let r = m.transform(-1.0, 0.0).unwrap();
        assert!(close(r.atoms()[0].position, -1.527_525_231_651_947, 1e-12));
        assert!(close(r.atoms()[0].weight, 0.3, 1e-15));
        assert!(close(r.atoms()[1].position, 0.654_653_670_707_977_1, 1e-12));

        let s = Measure::semicircle().transform(2.0, 0.0).unwrap();
        let (lo, hi) = s.support_hull().unwrap();
        assert!(close(lo, -4.0, 1e-12) && close(hi, 4.0, 1e-12));
        assert!(close(s.moment(2, false), 4.0, 4e-6));

        let d = Measure::dirac(0.0).transform(1.0, 2.5).unwrap();
        assert_eq!(d.atoms(), &[Atom { position: 2.5, weight: 1.0 }]);
        assert!(Measure::dirac(0.0).transform(0.0, 1.0).is_err());
    }

    #[test]
    fn truncated_integrals() {
        let m = Measure::atoms(vec![(-1.0, 0.25), (0.5, 0.5), (1.0, 0.25)]).unwrap();
        // open interval excludes the atoms at ±1
        assert!(close(m.integrate_open(-1.0, 1.0, |u| u), 0.25, 1e-15));
        let u = Measure::density(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(close(u.integrate_open(0.25, 0.75, |_| 1.0), 0.5, 1e-14));
        assert!(close(u.integrate(|t| t * t), 1.0 / 3.0, 1e-14));
    }

    #[test]
    fn sums_of_finite_measures() {
        let a = FiniteMeasure::new(vec![(0.0, 0.3)], Some(Density::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap())).unwrap();
        let b = FiniteMeasure::new(vec![(0.0, 0.2), (2.0, 1.0)], Some(Density::new(vec![0.5, 1.5], vec![1.0, 0.0]).unwrap())).unwrap();
        let s = FiniteMeasure::sum(&[a.clone(), b.clone()]);
        assert!(close(s.total_mass(), a.total_mass() + b.total_mass(), 1e-11));
        assert_eq!(s.atoms().len(), 2);
        assert!(close(s.atoms()[0].weight, 0.5, 1e-15));
        for x in [-1.0, 0.2, 0.7, 1.2, 1.6, 3.0] {
            assert!(close(s.cdf(x), a.cdf(x) + b.cdf(x), 1e-11), "x={x}");
        }
    }

    #[test]
    fn matched_cell_masses_are_exact() {
        let grid = cosine_nodes(65, 2.0);
        let masses = vec![1.0 / 64.0; 64];
        let reference: Vec<f64> = grid
            .iter()
            .map(|x| {
                let r = 4.0 - x * x;
                if r > 0.0 { 1.0 / (PI * r.sqrt()) } else { f64::NAN }
            })
            .collect();
        let d = Density::matching_cell_masses(grid.clone(), &masses, &reference).unwrap();
        for i in 0..64 {
            let (t0, t1, f0, f1) = d.cell(i);
            assert!(close(0.5 * (f0 + f1) * (t1 - t0), 1.0 / 64.0, 1e-12));
        }
    }
}
