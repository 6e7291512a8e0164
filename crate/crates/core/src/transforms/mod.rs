// SPDX-License-Identifier: Apache-2.0

//! Cauchy, reciprocal Cauchy and Voiculescu transforms, inversion of
//! class-𝓕 maps, and Nevanlinna representations.
//!
//! Conventions: `G(z) = ∫ μ(dt)/(z-t)`, `F = 1/G`, `φ(z) = F⁻¹(z) - z`,
//! all on the open upper half-plane.

mod cauchy;
mod inversion;

pub use cauchy::{cauchy, cauchy_with_derivative};
pub(crate) use cauchy::FarFieldCache;
pub use inversion::{
    stieltjes_invert, stieltjes_invert_fn, CauchyEvaluator, FnCauchy, InversionConfig,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{FiniteMeasure, Measure};

pub type C = Complex64;

/// A point of the open upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperHalfPoint {
    re: f64,
    im: f64,
}

impl UpperHalfPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::NotUpperHalfPlane { re, im });
        }
        Ok(UpperHalfPoint { re, im })
    }

    pub fn from_complex(z: C) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> C {
        C::new(self.re, self.im)
    }
}

impl From<UpperHalfPoint> for C {
    fn from(p: UpperHalfPoint) -> C {
        p.to_complex()
    }
}

/// `Γ_{α,β} = {x + iy : |x| < αy, y > β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedCone {
    pub alpha: f64,
    pub beta: f64,
}

impl TruncatedCone {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cone needs alpha, beta > 0, got ({alpha}, {beta})"
            )));
        }
        Ok(TruncatedCone { alpha, beta })
    }

    pub fn contains(&self, z: C) -> bool {
        z.im > self.beta && z.re.abs() < self.alpha * z.im
    }
}

/// Analytic map on the upper half-plane, evaluated pointwise.
pub trait AnalyticMap {
    fn eval(&self, z: C) -> C;

    /// Value and derivative. The default uses a central difference.
    fn eval_with_derivative(&self, z: C) -> (C, C) {
        let h = 1e-6 * (1.0 + z.norm());
        let h = h.min(0.5 * z.im);
        let d = (self.eval(z + h) - self.eval(z - h)) / (2.0 * h);
        (self.eval(z), d)
    }
}

/// Wraps a closure as an [`AnalyticMap`] with a numerical derivative.
pub struct FnMap<F: Fn(C) -> C>(pub F);

impl<F: Fn(C) -> C> AnalyticMap for FnMap<F> {
    fn eval(&self, z: C) -> C {
        (self.0)(z)
    }
}

/// `F_μ = 1/G_μ` with the exact derivative `-G'/G²`.
pub struct ReciprocalCauchy<'a>(pub &'a FiniteMeasure);

impl AnalyticMap for ReciprocalCauchy<'_> {
    fn eval(&self, z: C) -> C {
        cauchy(self.0, z).inv()
    }

    fn eval_with_derivative(&self, z: C) -> (C, C) {
        let (g, dg) = cauchy_with_derivative(self.0, z);
        let f = g.inv();
        (f, -dg * f * f)
    }
}

pub fn cauchy_eval(mu: &Measure, z: UpperHalfPoint) -> C {
    cauchy(mu, z.into())
}

pub fn reciprocal_eval(mu: &Measure, z: UpperHalfPoint) -> C {
    cauchy(mu, z.into()).inv()
}

/// Tolerance on `|F(w) - ζ|` relative to `1 + |ζ|`.
pub const INVERSION_TOLERANCE: f64 = 1e-12;
const NEWTON_STEPS: usize = 200;
const PICARD_STEPS: usize = 20_000;

/// Solves `F(w) = target` for the branch that is the left inverse of `F`
/// on a truncated cone.
///
/// With a hint, Newton starts there. Otherwise (or if that fails) the
/// target is approached from `target + iT`, halving `T`, so each solve starts
/// next to the previous solution; `T` starts at `start_height`. A Picard
/// iteration `w ↦ target - (F(w) - w)` is the last resort.
pub fn invert_class_f(
    f: &dyn AnalyticMap,
    target: UpperHalfPoint,
    hint: Option<UpperHalfPoint>,
    start_height: f64,
) -> Result<UpperHalfPoint> {
    let zeta = target.to_complex();
    let tol = INVERSION_TOLERANCE * (1.0 + zeta.norm());
    if let Some(h) = hint {
        if let Some(w) = newton(f, zeta, h.to_complex(), tol) {
            return UpperHalfPoint::from_complex(w);
        }
    }
    let mut height = start_height.max(zeta.im);
    let mut w = zeta + C::new(0.0, height);
    let mut ok = true;
    while height > 1e-3 * zeta.im {
        let step_target = zeta + C::new(0.0, height);
        match newton(f, step_target, w, tol) {
            Some(next) => w = next,
            None => {
                ok = false;
                break;
            }
        }
        height *= 0.5;
    }
    if ok {
        if let Some(w) = newton(f, zeta, w, tol) {
            return UpperHalfPoint::from_complex(w);
        }
    }
    if let Some(w) = picard(f, zeta, w, tol) {
        return UpperHalfPoint::from_complex(w);
    }
    Err(Error::OutsideInvertibilityDomain {
        re: zeta.re,
        im: zeta.im,
    })
}

/// Damped Newton for `F(w) = target`, staying in the upper half-plane.
fn newton(f: &dyn AnalyticMap, target: C, start: C, tol: f64) -> Option<C> {
    let mut w = start;
    if !(w.im > 0.0) {
        return None;
    }
    let (mut fw, mut dfw) = f.eval_with_derivative(w);
    let mut r = (fw - target).norm();
    for _ in 0..NEWTON_STEPS {
        if !r.is_finite() {
            return None;
        }
        if r <= tol {
            return Some(w);
        }
        let step = (fw - target) / dfw;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        let mut lambda = 1.0;
        loop {
            let cand = w - lambda * step;
            if cand.im > 0.0 {
                let (fc, dfc) = f.eval_with_derivative(cand);
                let rc = (fc - target).norm();
                if rc < r {
                    w = cand;
                    fw = fc;
                    dfw = dfc;
                    r = rc;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return None;
            }
        }
    }
    (r <= tol).then_some(w)
}

fn picard(f: &dyn AnalyticMap, target: C, start: C, tol: f64) -> Option<C> {
    let mut w = if start.im > 0.0 { start } else { target };
    for _ in 0..PICARD_STEPS {
        let fw = f.eval(w);
        if (fw - target).norm() <= tol {
            return Some(w);
        }
        let next = target - (fw - w);
        if !(next.im > 0.0) || !next.re.is_finite() {
            return None;
        }
        w = next;
    }
    None
}

/// `φ_μ(z)` together with the continuation height that succeeded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiculescuValue {
    pub value: C,
    pub beta_used: f64,
}

const MAX_BETA_DOUBLINGS: u32 = 10;

/// `φ_μ(z) = F_μ⁻¹(z) - z`. The continuation height starts at
/// `8 (1 + √m₂)` and is doubled until the inverse is found with
/// `Im φ ≤ 0`, at most ten times.
pub fn voiculescu_eval(mu: &Measure, z: UpperHalfPoint) -> Result<VoiculescuValue> {
    let beta0 = 8.0 * (1.0 + mu.moment(2, false).sqrt());
    voiculescu_of_map(&ReciprocalCauchy(mu), z, beta0)
}

/// Voiculescu transform of a measure given only through its `F`.
pub fn voiculescu_of_map(
    f: &dyn AnalyticMap,
    z: UpperHalfPoint,
    beta0: f64,
) -> Result<VoiculescuValue> {
    let zc = z.to_complex();
    let mut beta = beta0;
    let mut last_err = None;
    for _ in 0..=MAX_BETA_DOUBLINGS {
        match invert_class_f(f, z, None, beta) {
            Ok(w) => {
                let value = w.to_complex() - zc;
                if value.im <= 1e-10 * (1.0 + zc.norm()) {
                    return Ok(VoiculescuValue {
                        value,
                        beta_used: beta,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
        beta *= 2.0;
    }
    Err(last_err.unwrap_or(Error::OutsideInvertibilityDomain { re: zc.re, im: zc.im }))
}

/// `f(z) = a + b z + ∫ (1 + uz)/(u - z) τ(du)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NevanlinnaRep {
    pub a: f64,
    pub b: f64,
    pub tau: FiniteMeasure,
}

impl NevanlinnaRep {
    /// Uses `∫ (1+uz)/(u-z) τ(du) = z τ(ℝ) - (1+z²) G_τ(z)`.
    pub fn eval(&self, z: C) -> C {
        let mass = self.tau.total_mass();
        let integral = if mass == 0.0 {
            C::new(0.0, 0.0)
        } else {
            z * mass - (1.0 + z * z) * cauchy(&self.tau, z)
        };
        self.a + self.b * z + integral
    }
}

/// Nevanlinna triple of `F_μ`, with `b = 1` and `a = Re F_μ(i)`.
///
/// For a measure with finite variance `v`, `z - m₁ - F_μ(z)` is `v` times
/// the Cauchy transform of a probability measure `ρ`, and
/// `τ(du) = v ρ(du)/(1+u²)`. `ρ` is recovered by Stieltjes inversion on a
/// window around the support of `μ`.
pub fn nevanlinna_rep(mu: &Measure, resolution: usize) -> Result<NevanlinnaRep> {
    let i = C::new(0.0, 1.0);
    let a = cauchy(mu, i).inv().re;
    let m1 = mu.mean();
    let var = mu.variance();
    let scale = mu.moment(2, false).sqrt().max(1.0);
    if var <= 1e-14 * scale * scale {
        return Ok(NevanlinnaRep {
            a,
            b: 1.0,
            tau: FiniteMeasure::zero(),
        });
    }
    let (lo, hi) = mu.support_hull().expect("probability measure has mass");
    let margin = 0.05 * (hi - lo).max(scale);
    let g_rho = |z: C| (z - m1 - cauchy(mu, z).inv()) / var;
    let rho = stieltjes_invert_fn(g_rho, (lo - margin, hi + margin), resolution)?;
    let atoms = rho
        .atoms()
        .iter()
        .map(|at| (at.position, var * at.weight / (1.0 + at.position * at.position)))
        .collect();
    let density = match rho.density() {
        None => None,
        Some(d) => {
            let values = d
                .grid()
                .iter()
                .zip(d.values())
                .map(|(&x, &v)| var * v / (1.0 + x * x))
                .collect();
            Some(crate::measures::Density::new(d.grid().to_vec(), values)?)
        }
    };
    Ok(NevanlinnaRep {
        a,
        b: 1.0,
        tau: FiniteMeasure::new(atoms, density)?,
    })
}
