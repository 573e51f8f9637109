//! Direct quadrature of the single-peak energy `J_ε(W)` on a round sphere,
//! for the ansatz `W = χ·U(ρ/ε)` built from a radial cutoff `χ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::sphere_volume;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quadrature::{integrate_adaptive, AdaptiveSettings};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRamp {
    /// `1 − (10x³ − 15x⁴ + 6x⁵)`, C².
    Quintic,
    /// `1 − (35x⁴ − 84x⁵ + 70x⁶ − 20x⁷)`, C³.
    Septic,
}

/// `χ = 1` on `[0, r/2]`, `χ = 0` on `[r, ∞)` and a polynomial ramp between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec<T> {
    pub r: T,
    pub ramp: CutoffRamp,
}

impl<T: Scalar> CutoffSpec<T> {
    pub fn new(r: T, ramp: CutoffRamp) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!("cutoff radius must be positive, got {r}")));
        }
        Ok(Self { r, ramp })
    }
}

/// `(χ(t), χ'(t))`.
pub fn cutoff_chi<T: Scalar>(t: T, spec: &CutoffSpec<T>) -> (T, T) {
    let half = spec.r / T::lit(2.0);
    if t <= half {
        return (T::one(), T::zero());
    }
    if t >= spec.r {
        return (T::zero(), T::zero());
    }
    let x = (t - half) / half;
    let c = T::lit;
    let (s, ds) = match spec.ramp {
        CutoffRamp::Quintic => (
            x * x * x * (c(10.0) + x * (c(-15.0) + x * c(6.0))),
            x * x * (c(30.0) + x * (c(-60.0) + x * c(30.0))),
        ),
        CutoffRamp::Septic => (
            x.powi(4) * (c(35.0) + x * (c(-84.0) + x * (c(70.0) + x * c(-20.0)))),
            x.powi(3) * (c(140.0) + x * (c(-420.0) + x * (c(420.0) + x * c(-140.0)))),
        ),
    };
    (T::one() - s, -ds / half)
}

/// Quadrature controls: tolerance of the adaptive rule and the number of
/// pieces each profile interval is split into before adapting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyQuadrature<T> {
    pub rel_tol: T,
    pub subdivisions: usize,
}

impl<T: Scalar> Default for EnergyQuadrature<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-12),
            subdivisions: 1,
        }
    }
}

impl<T: Scalar> EnergyQuadrature<T> {
    /// Twice the subdivisions and a tenfold tighter tolerance.
    pub fn refined(&self) -> Self {
        Self {
            rel_tol: self.rel_tol / T::lit(10.0),
            subdivisions: self.subdivisions * 2,
        }
    }
}

/// Breakpoints `ε·rₖ` of the profile grid inside `[0, upper]`, then panels of
/// width `ε` out to `upper`.
fn scaled_breakpoints<T: Scalar>(profile: &RadialProfile<T>, eps: T, upper: T, sub: usize) -> Vec<T> {
    let mut nodes = vec![T::zero()];
    let mut push = |a: T, b: T| {
        let pieces = sub.max(1);
        for j in 1..=pieces {
            let x = a + (b - a) * T::from_usize_lossy(j) / T::from_usize_lossy(pieces);
            nodes.push(x.min(upper));
        }
    };
    let mut prev = T::zero();
    for &r in profile.grid() {
        let x = eps * r;
        if x >= upper {
            break;
        }
        push(prev, x);
        prev = x;
    }
    while prev < upper {
        let next = (prev + eps).min(upper);
        push(prev, next);
        prev = next;
    }
    nodes.dedup();
    nodes
}

fn settings<T: Scalar>(q: &EnergyQuadrature<T>) -> AdaptiveSettings<T> {
    AdaptiveSettings {
        abs_tol: T::zero(),
        rel_tol: q.rel_tol,
        max_panels: 1_000_000,
    }
}

/// `J_ε(W)` for the ansatz centered anywhere on the round sphere of radius `R`:
/// `ε^{−n} V_{n−1} ∫₀^r [½ε²(W′)² + ½(ε²c_N s + 1)W² − W^p/p] (R sin(ρ/R))^{n−1} dρ`
/// with `s = n(n−1)/R²`.
pub fn single_peak_energy_sphere<T: Scalar>(
    profile: &RadialProfile<T>,
    eps: T,
    radius: T,
    spec: &CutoffSpec<T>,
    quad: &EnergyQuadrature<T>,
) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if !(radius > T::zero()) {
        return Err(Error::Domain(format!("sphere radius must be positive, got {radius}")));
    }
    if !(spec.r < T::FRAC_PI_2() * radius) {
        return Err(Error::Domain(format!(
            "cutoff radius {} must stay below πR/2 = {}",
            spec.r,
            T::FRAC_PI_2() * radius
        )));
    }
    let dims = profile.dims();
    let n = dims.n();
    let p = dims.exponent::<T>();
    let nf = T::from_usize_lossy(n);
    let s = nf * (nf - T::one()) / (radius * radius);
    let mass = eps * eps * dims.c_n::<T>() * s + T::one();
    let half = T::lit(0.5);
    let f = |rho: T| {
        let (u, du) = profile.eval(rho / eps);
        let (chi, dchi) = cutoff_chi(rho, spec);
        let w = u * chi;
        let dw = du / eps * chi + u * dchi;
        let vol = (radius * (rho / radius).sin() / eps).powi(n as i32 - 1);
        (half * eps * eps * dw * dw + half * mass * w * w - w.abs().powf(p) / p) * vol
    };
    let mut breaks = scaled_breakpoints(profile, eps, spec.r, quad.subdivisions);
    breaks.push(spec.r / T::lit(2.0));
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup();
    let est = integrate_adaptive(&breaks, &settings(quad), f)?;
    Ok(sphere_volume::<T>(n) * est.value / eps)
}

/// Flat-space energy `ε^{−n} V_{n−1} ∫₀^∞ [½ε²(U_ε′)² + ½U_ε² − U_ε^p/p] ρ^{n−1} dρ`
/// of `U_ε(ρ) = U(ρ/ε)` without cutoff. It equals `α` for every `ε`.
pub fn flat_energy<T: Scalar>(profile: &RadialProfile<T>, eps: T, quad: &EnergyQuadrature<T>) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let dims = profile.dims();
    let n = dims.n();
    let p = dims.exponent::<T>();
    let half = T::lit(0.5);
    let f = |rho: T| {
        let (u, du) = profile.eval(rho / eps);
        let dw = du / eps;
        (half * eps * eps * dw * dw + half * u * u - u.powf(p) / p) * (rho / eps).powi(n as i32 - 1)
    };
    // the tail past 2·(grid end) is below double precision
    let upper = eps * profile.grid_end() * T::lit(2.0);
    let breaks = scaled_breakpoints(profile, eps, upper, quad.subdivisions);
    let est = integrate_adaptive(&breaks, &settings(quad), f)?;
    Ok(sphere_volume::<T>(n) * est.value / eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub eps_ladder: Vec<f64>,
    #[serde(rename = "J_values")]
    pub j_values: Vec<f64>,
    pub alpha: f64,
    pub fitted_slope: f64,
    pub target_slope: f64,
    pub relative_gap: f64,
}

/// Least-squares slope through the origin of `J_ε(W) − α` against `ε²`,
/// compared with `(β/2)·n(n−1)/R²`.
#[allow(clippy::too_many_arguments)]
pub fn expansion_slope_check<T: Scalar>(
    profile: &RadialProfile<T>,
    alpha: T,
    beta: T,
    radius: T,
    eps_ladder: &[T],
    spec: &CutoffSpec<T>,
    quad: &EnergyQuadrature<T>,
) -> Result<ExpansionReport> {
    if eps_ladder.len() < 3 {
        return Err(Error::Domain("eps ladder needs at least three values".into()));
    }
    if eps_ladder.iter().any(|&e| !(e > T::zero())) || eps_ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("eps ladder must be positive and strictly decreasing".into()));
    }
    let j_values = eps_ladder
        .par_iter()
        .map(|&e| single_peak_energy_sphere(profile, e, radius, spec, quad))
        .collect::<Result<Vec<T>>>()?;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&e, &j) in eps_ladder.iter().zip(&j_values) {
        let x = e * e;
        sxy += x * (j - alpha);
        sxx += x * x;
    }
    let slope = sxy / sxx;
    let n = T::from_usize_lossy(profile.dims().n());
    let target = beta / T::lit(2.0) * n * (n - T::one()) / (radius * radius);
    Ok(ExpansionReport {
        eps_ladder: eps_ladder.iter().map(|e| e.as_f64()).collect(),
        j_values: j_values.iter().map(|e| e.as_f64()).collect(),
        alpha: alpha.as_f64(),
        fitted_slope: slope.as_f64(),
        target_slope: target.as_f64(),
        relative_gap: ((slope - target) / target).abs().as_f64(),
    })
}
