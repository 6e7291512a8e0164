// SPDX-License-Identifier: Apache-2.0

//! Triangular-array bookkeeping, the norming equation for symmetrized
//! rows, and rate sweeps for the free central limit theorem.
//!
//! Absolute constants in the rate bounds are never asserted: every sweep
//! reports the observed ratio `Δ / bound` and its maximum.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::measures::{kolmogorov, levy, FiniteMeasure, Measure};
use crate::quad;
use crate::subordination::{free_convolve, free_power, FreeSum, SolverConfig};
use crate::transforms::UpperHalfPoint;

/// Truncation level used for the centring constants when none is given.
pub const DEFAULT_TAU: f64 = 1.0;

const MEAN_TOLERANCE: f64 = 1e-9;
/// Gridded inputs carry a second-moment error at the level of their
/// interpolation error, so unit variance is checked as loosely as mass.
const VARIANCE_TOLERANCE: f64 = crate::measures::MASS_TOLERANCE;

/// Rows `μ_n1, …, μ_nk_n` of an array with a fixed truncation level.
#[derive(Debug, Clone)]
pub struct TriangularArray {
    rows: Vec<Vec<Measure>>,
    tau: f64,
}

impl TriangularArray {
    pub fn new(rows: Vec<Vec<Measure>>, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if rows.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("every row needs at least one measure".into()));
        }
        Ok(TriangularArray { rows, tau })
    }

    pub fn rows(&self) -> &[Vec<Measure>] {
        &self.rows
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn summaries(&self) -> Vec<RowSummary> {
        self.rows.iter().map(|r| row_summary(r, self.tau)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSummary {
    /// Truncated means `∫_{(-τ,τ)} u dμ_nk`.
    pub a_nk: Vec<f64>,
    pub alpha_n: f64,
    /// `Σ_k u²/(1+u²) μ̂_nk(du)`.
    pub nu_n: FiniteMeasure,
    /// `∫ u²/(1+u²) dμ̂_nk`.
    pub eps_nk: Vec<f64>,
    pub eps_max: f64,
}

/// Centres each measure at its truncated mean and accumulates the Lévy
/// measure candidate of the row.
pub fn row_summary(row: &[Measure], tau: f64) -> RowSummary {
    let mut a_nk = Vec::with_capacity(row.len());
    let mut eps_nk = Vec::with_capacity(row.len());
    let mut parts = Vec::with_capacity(row.len());
    let mut alpha_n = 0.0;
    for mu in row {
        let a = mu.integrate_open(-tau, tau, |u| u);
        let centred = if a == 0.0 {
            mu.as_finite().clone()
        } else {
            mu.affine(1.0, -a).expect("finite shift")
        };
        alpha_n += a + centred.integrate(|u| u / (1.0 + u * u));
        let part = centred.weighted(|u| u * u / (1.0 + u * u));
        // the weighted measure's own mass, so Σ ε matches ν_n's mass
        eps_nk.push(part.total_mass());
        a_nk.push(a);
        parts.push(part);
    }
    let eps_max = eps_nk.iter().copied().fold(0.0, f64::max);
    RowSummary {
        a_nk,
        alpha_n,
        nu_n: FiniteMeasure::sum(&parts),
        eps_nk,
        eps_max,
    }
}

/// Mass of an atom of `μ ⊞ D_{-1}μ` at the origin: `2 max_x μ({x}) - 1` when
/// positive.
fn symmetrized_atom_at_zero(mu: &Measure) -> f64 {
    let top = mu.atoms().iter().map(|a| a.weight).fold(0.0, f64::max);
    (2.0 * top - 1.0).max(0.0)
}

struct SymmetrizedTerm {
    sum: Option<FreeSum>,
}

impl SymmetrizedTerm {
    fn new(mu: &Measure) -> Result<Self> {
        if let ([_], None) = (mu.atoms(), mu.density()) {
            return Ok(SymmetrizedTerm { sum: None });
        }
        let reflected = mu.transform(-1.0, 0.0)?;
        let sum = FreeSum::new(&[mu.clone(), reflected], SolverConfig::default())?;
        Ok(SymmetrizedTerm { sum: Some(sum) })
    }

    /// `∫ u²/(b²+u²) dμ^s = 1 + b Im G_{μ^s}(ib)`.
    fn eval(&self, b: f64) -> Result<f64> {
        let Some(sum) = &self.sum else {
            return Ok(0.0);
        };
        let r = sum.solve(UpperHalfPoint::new(0.0, b)?, None)?;
        let g: C = r.f_value.inv();
        Ok((1.0 + b * g.im).clamp(0.0, 1.0))
    }
}

const NORMING_RELATIVE_TOLERANCE: f64 = 1e-13;

/// `b' > 0` with `(1/2) Σ_k ∫ u²/(b'²+u²) dμ_k^s = target_mass`, where
/// `μ^s = μ ⊞ D_{-1}μ`. The left side is strictly decreasing in `b'` and is
/// evaluated through the Cauchy transform of `μ^s` on the imaginary axis,
/// so no density of `μ^s` is ever formed.
pub fn norming_constant(mus: &[Measure], target_mass: f64) -> Result<f64> {
    if mus.is_empty() {
        return Err(Error::InvalidParameter("norming constant needs at least one measure".into()));
    }
    if !(target_mass > 0.0 && target_mass.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target mass must be positive, got {target_mass}"
        )));
    }
    let sup: f64 = 0.5 * mus.iter().map(|m| 1.0 - symmetrized_atom_at_zero(m)).sum::<f64>();
    if target_mass >= sup {
        return Err(Error::NoNormingConstant(format!(
            "target {target_mass} is not below the supremum {sup} of the left side"
        )));
    }
    let terms = mus.iter().map(SymmetrizedTerm::new).collect::<Result<Vec<_>>>()?;
    let lhs = |b: f64| -> Result<f64> {
        let mut s = 0.0;
        for t in &terms {
            s += t.eval(b)?;
        }
        Ok(0.5 * s)
    };

    let scale = mus.iter().map(|m| m.moment(2, false).sqrt()).fold(1e-3, f64::max);
    let (mut lo, mut hi) = (scale, scale);
    while lhs(hi)? > target_mass {
        hi *= 2.0;
        if hi > 1e12 * scale {
            return Err(Error::NoNormingConstant("left side does not fall to the target".into()));
        }
    }
    while lhs(lo)? < target_mass {
        lo *= 0.5;
        if lo < 1e-12 * scale {
            return Err(Error::NoNormingConstant(format!(
                "target {target_mass} is only approached as b' → 0"
            )));
        }
    }
    while hi - lo > NORMING_RELATIVE_TOLERANCE * hi {
        let mid = (lo * hi).sqrt();
        if lhs(mid)? > target_mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `max_k ∫ u²/(b²+u²) dμ_k`, the infinitesimality quantity that must vanish
/// along a normed sequence.
pub fn norming_condition(mus: &[Measure], b: f64) -> f64 {
    mus.iter()
        .map(|m| m.integrate(|u| u * u / (b * b + u * u)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    /// Kolmogorov distance to the limit law.
    pub delta: f64,
    /// Lévy distance to the limit law.
    pub levy: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInputs {
    pub b_n: f64,
    pub a_n: f64,
    pub l_n: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log Δ` against `log n`; `NaN` with fewer than
    /// two usable rows.
    pub slope: f64,
    /// Largest observed `Δ / bound`.
    pub constant: f64,
    /// Per-row `B_n, A_n, L_n` for Lyapunov sweeps; empty otherwise.
    pub rates: Vec<RateInputs>,
}

impl SweepReport {
    fn from_rows(rows: Vec<SweepRow>, rates: Vec<RateInputs>) -> Self {
        let constant = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.delta > 0.0)
            .map(|r| ((r.n as f64).ln(), r.delta.ln()))
            .collect();
        SweepReport {
            slope: loglog_slope(&pts),
            rows,
            constant,
            rates,
        }
    }
}

fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Sweep of `μ_n^{⊞n}` against the semicircle law, with
/// `μ_n = D_{1/√(m₂ n)} μ` and bound `(|m₃| + m₄^{1/2}) / √n`.
pub fn berry_esseen_sweep(
    mu: &Measure,
    ns: &[usize],
    window: Option<(f64, f64)>,
    resolution: usize,
) -> Result<SweepReport> {
    let (m1, m2) = (mu.moment(1, false), mu.moment(2, false));
    if m1.abs() > MEAN_TOLERANCE || (m2 - 1.0).abs() > VARIANCE_TOLERANCE {
        return Err(Error::MomentPrecondition(format!(
            "sweep needs mean 0 and variance 1, got mean {m1}, second moment {m2}"
        )));
    }
    let constant = mu.moment(3, false).abs() + mu.moment(4, false).sqrt();
    let reference = Measure::semicircle();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if n == 0 {
            return Err(Error::InvalidParameter("sweep sizes must be positive".into()));
        }
        let scaled = mu.transform(1.0 / (m2 * n as f64).sqrt(), 0.0)?;
        let law = free_power(&scaled, n, window, resolution)?;
        rows.push(compare(n, &law, &reference, constant / (n as f64).sqrt()));
    }
    Ok(SweepReport::from_rows(rows, Vec::new()))
}

fn compare(n: usize, law: &FiniteMeasure, reference: &FiniteMeasure, bound: f64) -> SweepRow {
    let delta = kolmogorov(law, reference);
    SweepRow {
        n,
        delta,
        levy: levy(law, reference),
        bound,
        ratio: if bound > 0.0 { delta / bound } else { 0.0 },
    }
}

/// Support endpoints `x₁ < x₂` of `(D_{1/√n} two_point(p))^{⊞n}` and the
/// constant `c̃ = (p - q)/√(pq)`.
pub fn two_point_limit_support(p: f64, n: usize) -> (f64, f64, f64) {
    let q = 1.0 - p;
    let c = (p - q) / (p * q).sqrt();
    let nf = n as f64;
    let half = 2.0 * (1.0 - 1.0 / nf).sqrt();
    let center = -c / nf.sqrt();
    (center - half, center + half, c)
}

/// Closed-form CDF of `(D_{1/√n} two_point(p))^{⊞n}` on its support
/// interval, valid whenever that law has no atom (`n·max(p, q) ≤ n - 1`).
/// Arguments outside `[x₁, x₂]` are clamped.
pub fn two_point_limit_cdf(p: f64, n: usize, u: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "reference law needs p in (0,1) and n ≥ 2, got p = {p}, n = {n}"
        )));
    }
    let (x1, x2, c) = two_point_limit_support(p, n);
    let nf = n as f64;
    // denominator 1 - x(x/n + c̃/√n) = (x - r₁)(r₂ - x)/n with r₁ ≤ x₁ < x₂ ≤ r₂,
    // kept in factored form relative to the endpoints to avoid cancellation
    let disc = (c * c + 4.0).sqrt();
    let (r1, r2) = (0.5 * nf.sqrt() * (-c - disc), 0.5 * nf.sqrt() * (-c + disc));
    let (gap1, gap2) = ((x1 - r1).max(0.0), (r2 - x2).max(0.0));
    // x = x₁ + (x₂-x₁)(1 - cos θ)/2 removes the square-root endpoints
    let half = 0.5 * (x2 - x1);
    let theta = |x: f64| (1.0 - (x.clamp(x1, x2) - x1) / half).clamp(-1.0, 1.0).acos();
    let top = theta(u);
    if top == 0.0 {
        return Ok(0.0);
    }
    let integrand = |t: f64| {
        let from_lo = 2.0 * half * (0.5 * t).sin().powi(2);
        let to_hi = 2.0 * half * (0.5 * t).cos().powi(2);
        let d = (from_lo + gap1) * (to_hi + gap2) / nf;
        assert!(d > 0.0, "reference density denominator vanished at θ = {t}");
        from_lo * to_hi / d
    };
    let value = quad::composite(0.0, top, 16, quad::MAX_ORDER, integrand);
    Ok(value / (2.0 * std::f64::consts::PI))
}

/// Sweep over rows `μ_1, …, μ_n` rescaled by `1/B_n`, with bound `L_n^{1/2}`.
/// `family(k)` yields `μ_k` for `k = 1, 2, …`.
pub fn lyapunov_sweep(
    family: &dyn Fn(usize) -> Measure,
    ns: &[usize],
    window: Option<(f64, f64)>,
    resolution: usize,
) -> Result<SweepReport> {
    let reference = Measure::semicircle();
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let members: Vec<Measure> = (1..=max_n).map(family).collect();
    for (k, m) in members.iter().enumerate() {
        let m1 = m.moment(1, false);
        if m1.abs() > MEAN_TOLERANCE || !m.moment(3, true).is_finite() {
            return Err(Error::MomentPrecondition(format!(
                "member {} needs mean 0 and finite third absolute moment, got mean {m1}",
                k + 1
            )));
        }
    }
    let mut rows = Vec::with_capacity(ns.len());
    let mut rates = Vec::with_capacity(ns.len());
    for &n in ns {
        if n < 2 {
            return Err(Error::InvalidParameter("Lyapunov sweep needs n ≥ 2".into()));
        }
        let row = &members[..n];
        let rate = rate_inputs(row);
        let scaled = row
            .iter()
            .map(|m| m.transform(1.0 / rate.b_n, 0.0))
            .collect::<Result<Vec<_>>>()?;
        let law = free_convolve(&scaled, window, resolution)?;
        rows.push(compare(n, &law, &reference, rate.l_n.sqrt()));
        rates.push(rate);
    }
    Ok(SweepReport::from_rows(rows, rates))
}

/// `B_n² = Σ m₂`, `A_n = Σ β₃`, `L_n = A_n / B_n³`.
pub fn rate_inputs(row: &[Measure]) -> RateInputs {
    let b_n = row.iter().map(|m| m.moment(2, false)).sum::<f64>().sqrt();
    let a_n: f64 = row.iter().map(|m| m.moment(3, true)).sum();
    RateInputs {
        b_n,
        a_n,
        l_n: a_n / b_n.powi(3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateReport {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub levy_to_delta0: f64,
    /// `(η₁ + η₃)^{1/6} + |η₂|`.
    pub bound: f64,
}

/// Law-of-large-numbers quantities for `μ_nk = D_{1/n} μ_k`, `k = 1..n`,
/// with `μ_k` taken cyclically from `mus`.
pub fn degenerate_report(
    mus: &[Measure],
    n: usize,
    window: Option<(f64, f64)>,
    resolution: usize,
) -> Result<DegenerateReport> {
    if mus.is_empty() || n == 0 {
        return Err(Error::InvalidParameter("degenerate report needs measures and n ≥ 1".into()));
    }
    let nf = n as f64;
    let row: Vec<&Measure> = (0..n).map(|k| &mus[k % mus.len()]).collect();
    let (mut eta1, mut eta2, mut eta3) = (0.0, 0.0, 0.0);
    for m in &row {
        let inner_mass = m.integrate_open(-nf, nf, |_| 1.0);
        let first = m.integrate_open(-nf, nf, |u| u);
        let second = m.integrate_open(-nf, nf, |u| u * u);
        eta1 += (m.total_mass() - inner_mass).max(0.0);
        eta2 += first;
        eta3 += second - first * first;
    }
    eta2 /= nf;
    eta3 /= nf * nf;

    let scaled = row
        .iter()
        .map(|m| m.transform(1.0 / nf, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let law = if n == 1 {
        scaled.into_iter().next().unwrap()
    } else {
        free_convolve(&scaled, window, resolution)?
    };
    let levy_to_delta0 = levy(&law, &Measure::dirac(0.0));
    Ok(DegenerateReport {
        eta1,
        eta2,
        eta3,
        levy_to_delta0,
        bound: (eta1 + eta3).powf(1.0 / 6.0) + eta2.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DEFAULT_GRID;

    fn tp(p: f64) -> Measure {
        Measure::two_point(p).unwrap()
    }

    #[test]
    fn row_of_point_masses_at_zero_is_trivial() {
        let s = row_summary(&vec![Measure::dirac(0.0); 5], DEFAULT_TAU);
        assert!(s.a_nk.iter().all(|&a| a == 0.0));
        assert_eq!(s.alpha_n, 0.0);
        assert_eq!(s.nu_n.total_mass(), 0.0);
        assert_eq!(s.eps_max, 0.0);
    }

    #[test]
    fn scaled_two_point_row_has_expected_levy_mass() {
        let mut last = f64::INFINITY;
        for n in [4usize, 16, 64, 256] {
            let nf = n as f64;
            let mu = tp(0.5).transform(1.0 / nf.sqrt(), 0.0).unwrap();
            let s = row_summary(&vec![mu; n], DEFAULT_TAU);
            assert!(s.a_nk.iter().all(|a| a.abs() < 1e-15));
            assert!((s.nu_n.total_mass() - 1.0 / (1.0 + 1.0 / nf)).abs() < 1e-12);
            assert!((s.eps_max - (1.0 / nf) / (1.0 + 1.0 / nf)).abs() < 1e-15);
            let sum: f64 = s.eps_nk.iter().sum();
            assert!((sum - s.nu_n.total_mass()).abs() < 1e-12);
            assert!(s.eps_max < last);
            last = s.eps_max;
        }
    }

    #[test]
    fn truncated_mean_ignores_mass_beyond_tau() {
        let mu = Measure::atoms(vec![(0.5, 0.5), (3.0, 0.5)]).unwrap();
        let s = row_summary(&[mu], 1.0);
        assert!((s.a_nk[0] - 0.25).abs() < 1e-15);
        let expected = 0.25 + 0.5 * (0.25 / 1.0625 + 2.75 / (1.0 + 2.75f64.powi(2)));
        assert!((s.alpha_n - expected).abs() < 1e-14);
    }

    #[test]
    fn array_rejects_empty_rows_and_bad_tau() {
        assert!(TriangularArray::new(vec![vec![]], 1.0).is_err());
        assert!(TriangularArray::new(vec![vec![Measure::dirac(0.0)]], 0.0).is_err());
        let arr = TriangularArray::new(vec![vec![Measure::dirac(0.0)], vec![tp(0.5); 2]], 1.0).unwrap();
        assert_eq!(arr.summaries().len(), 2);
    }

    #[test]
    fn norming_constant_for_two_point_pair() {
        let b = norming_constant(&[tp(0.5), tp(0.5)], 0.5).unwrap();
        assert!((b - 2.0 / 3f64.sqrt()).abs() < 1e-9, "{b}");
    }

    #[test]
    fn norming_constant_range_errors() {
        assert!(matches!(
            norming_constant(&[tp(0.5), tp(0.5)], 1.0),
            Err(Error::NoNormingConstant(_))
        ));
        assert!(matches!(
            norming_constant(&[Measure::dirac(2.0)], 1e-3),
            Err(Error::NoNormingConstant(_))
        ));
    }

    #[test]
    fn norming_left_side_matches_arcsine_formula() {
        let term = SymmetrizedTerm::new(&tp(0.5)).unwrap();
        for b in [0.1, 0.7, 2.0, 9.0] {
            let want = 1.0 - b / (b * b + 4.0f64).sqrt();
            assert!((term.eval(b).unwrap() - want).abs() < 1e-11);
        }
    }

    #[test]
    fn norming_condition_is_small_for_spread_rows() {
        let row = vec![tp(0.5); 3];
        assert!((norming_condition(&row, 1.0) - 0.5).abs() < 1e-15);
        assert!(norming_condition(&row, 100.0) < 1e-3);
    }

    #[test]
    fn semicircle_is_a_fixed_point_of_the_sweep() {
        let r = berry_esseen_sweep(&Measure::semicircle(), &[2, 8], None, DEFAULT_GRID).unwrap();
        assert!(r.rows.iter().all(|row| row.delta <= 5e-3), "{r:?}");
    }

    #[test]
    fn sweep_bound_uses_two_point_moments() {
        let r = berry_esseen_sweep(&tp(0.3), &[64], None, DEFAULT_GRID).unwrap();
        let (p, q) = (0.3f64, 0.7f64);
        let m3 = (q - p) / (p * q).sqrt();
        let m4 = p * p / q + q * q / p;
        let want = (m3.abs() + m4.sqrt()) / 8.0;
        assert!((r.rows[0].bound - want).abs() < 1e-12);
        assert!((want - 0.27502).abs() < 1e-5);
    }

    #[test]
    fn sweep_rejects_unnormalized_input() {
        let mu = Measure::atoms(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!(matches!(
            berry_esseen_sweep(&mu, &[4], None, DEFAULT_GRID),
            Err(Error::MomentPrecondition(_))
        ));
    }

    #[test]
    fn reference_cdf_endpoints_and_arcsine_case() {
        let v = two_point_limit_cdf(0.5, 2, 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{v}");
        for (p, n) in [(0.3, 100), (0.7, 16), (0.5, 64), (0.2, 400)] {
            let (x1, x2, _) = two_point_limit_support(p, n);
            assert!((two_point_limit_cdf(p, n, x2).unwrap() - 1.0).abs() < 1e-8, "{p} {n}");
            assert_eq!(two_point_limit_cdf(p, n, x1 - 1.0).unwrap(), 0.0);
        }
        let (x1, x2, _) = two_point_limit_support(0.3, 100);
        assert!((x2 - x1 - 3.979950).abs() < 1e-6);
    }

    #[test]
    fn reference_cdf_reflects_under_p_to_q() {
        for u in [-1.0, 0.2, 1.3] {
            let a = two_point_limit_cdf(0.3, 32, u).unwrap();
            let b = two_point_limit_cdf(0.7, 32, -u).unwrap();
            assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_inputs_for_symmetric_two_point() {
        for n in [4usize, 25, 100] {
            let r = rate_inputs(&vec![tp(0.5); n]);
            assert!((r.b_n * r.b_n - n as f64).abs() < 1e-9);
            assert!((r.a_n - n as f64).abs() < 1e-9);
            assert!((r.l_n - (n as f64).powf(-0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn lyapunov_rates_for_alternating_family() {
        let fam = |k: usize| if k % 2 == 1 { tp(0.3) } else { tp(0.5) };
        let r = lyapunov_sweep(&fam, &[16], None, DEFAULT_GRID).unwrap();
        let beta3 = |p: f64| {
            let q = 1.0 - p;
            q * (p / q).powf(1.5) + p * (q / p).powf(1.5)
        };
        let a = 8.0 * (beta3(0.3) + beta3(0.5));
        let rate = r.rates[0];
        assert!((rate.b_n - 4.0).abs() < 1e-12);
        assert!((rate.a_n - a).abs() < 1e-12);
        assert!((rate.l_n - a / 64.0).abs() < 1e-12);
        assert!(r.rows[0].delta.is_finite() && r.rows[0].ratio > 0.0);
    }

    #[test]
    fn degenerate_report_trivial_and_shifted_families() {
        let r = degenerate_report(&[Measure::dirac(0.0)], 8, None, DEFAULT_GRID).unwrap();
        assert_eq!((r.eta1, r.eta2, r.eta3, r.levy_to_delta0), (0.0, 0.0, 0.0, 0.0));
        for n in [2usize, 10] {
            let r = degenerate_report(&[Measure::dirac(1.0)], n, None, DEFAULT_GRID).unwrap();
            assert!((r.eta2 - 1.0).abs() < 1e-15);
            assert!((r.levy_to_delta0 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_report_two_point_family() {
        for n in [2usize, 8, 32] {
            let r = degenerate_report(&[tp(0.5)], n, None, DEFAULT_GRID).unwrap();
            assert_eq!(r.eta1, 0.0);
            assert!(r.eta2.abs() < 1e-15);
            assert!((r.eta3 - 1.0 / n as f64).abs() < 1e-14);
            assert!(r.levy_to_delta0 <= 10.0 * (r.eta1 + r.eta3).powf(1.0 / 6.0));
        }
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|&n| (n.ln(), -0.5 * n.ln() + 1.0)).collect();
        assert!((loglog_slope(&pts) + 0.5).abs() < 1e-14);
        assert!(loglog_slope(&pts[..1]).is_nan());
    }
}
