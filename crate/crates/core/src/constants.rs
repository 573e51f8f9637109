//! The dimensional constants α, β, γ and m(E) of a ground state, and the
//! table of β over `(m, n)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::{solve_ground_state, Dimensions, ShootingConfig};
use crate::profile::{RadialIntegrand, RadialProfile};
use crate::quadrature::{integrate_adaptive, AdaptiveSettings};
use crate::scalar::Scalar;

/// Reference `(m, n, term1, term2, β)` rows, `n + m ≤ 9`.
pub const REFERENCE_ROWS: [(usize, usize, f64, f64, f64); 20] = [
    (2, 2, 1.9502, 2.331, -0.38089),
    (2, 3, 11.959, 13.259, -1.2999),
    (2, 4, 81.771, 87.5, -5.7285),
    (2, 5, 617.47, 647.82, -30.353),
    (2, 6, 5083.3, 5268.8, -185.5),
    (2, 7, 45119.0, 46391.0, -1272.4),
    (3, 2, 3.9303, 4.4149, -0.48461),
    (3, 3, 26.196, 28.329, -2.1329),
    (3, 4, 194.26, 205.59, -11.324),
    (3, 5, 1577.6, 1647.1, -69.453),
    (3, 6, 13854.0, 14332.0, -478.38),
    (4, 2, 6.2006, 6.7579, -0.55731),
    (4, 3, 45.28, 48.231, -2.9513),
    (4, 4, 363.46, 381.54, -18.085),
    (4, 5, 3162.7, 3287.2, -124.58),
    (5, 2, 8.6442, 9.2554, -0.61113),
    (5, 3, 68.674, 72.419, -3.7455),
    (5, 4, 592.7, 618.4, -25.692),
    (6, 2, 11.199, 11.851, -0.65243),
    (6, 3, 95.938, 100.42, -4.4788),
];

/// `(m, n)` pairs of [`REFERENCE_ROWS`].
pub fn reference_dimensions() -> Vec<(usize, usize)> {
    REFERENCE_ROWS.iter().map(|r| (r.0, r.1)).collect()
}

/// Area of the unit sphere `S^{n-1} ⊂ ℝⁿ`, `2π^{n/2}/Γ(n/2)`. `n = 1` gives
/// the two points of `S⁰`.
pub fn sphere_volume<T: Scalar>(n: usize) -> T {
    assert!(n >= 1, "sphere_volume needs n >= 1");
    let two_pi = T::lit(2.0) * T::PI();
    let mut v = if n % 2 == 1 { T::lit(2.0) } else { two_pi };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        v = v * two_pi / T::from_usize_lossy(k);
        k += 2;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateConstants<T> {
    pub dims: Dimensions,
    pub alpha_energy: T,
    pub beta_term1: T,
    pub beta_term2: T,
    pub beta: T,
    pub gamma: T,
    pub m_e: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParts<T> {
    pub term1: T,
    pub term2: T,
    pub beta: T,
}

fn integral<T: Scalar>(profile: &RadialProfile<T>, a: T, b: T, w: T, sub: usize) -> Result<T> {
    Ok(profile
        .radial_integral_with(&RadialIntegrand::new(a, b, w)?, sub)?
        .value)
}

pub fn compute_beta<T: Scalar>(profile: &RadialProfile<T>) -> Result<BetaParts<T>> {
    compute_beta_with(profile, 1)
}

/// β with `subdivisions` quadrature panels per grid interval.
pub fn compute_beta_with<T: Scalar>(
    profile: &RadialProfile<T>,
    subdivisions: usize,
) -> Result<BetaParts<T>> {
    let dims = profile.dims();
    let n = T::from_usize_lossy(dims.n());
    let v = sphere_volume::<T>(dims.n());
    let term1 = dims.c_n::<T>() * v * integral(profile, T::lit(2.0), T::zero(), n - T::one(), subdivisions)?;
    let term2 = v / (n * (n + T::lit(2.0)))
        * integral(profile, T::zero(), T::lit(2.0), n + T::one(), subdivisions)?;
    Ok(BetaParts {
        term1,
        term2,
        beta: term1 - term2,
    })
}

/// Energy `½‖∇U‖² + ½‖U‖² − (1/p)‖U‖_p^p` of the ground state.
pub fn compute_alpha_energy<T: Scalar>(profile: &RadialProfile<T>) -> Result<T> {
    let dims = profile.dims();
    let w = T::from_usize_lossy(dims.n() - 1);
    let p = dims.exponent::<T>();
    let half = T::lit(0.5);
    let grad = integral(profile, T::zero(), T::lit(2.0), w, 1)?;
    let mass = integral(profile, T::lit(2.0), T::zero(), w, 1)?;
    let pot = integral(profile, p, T::zero(), w, 1)?;
    Ok(sphere_volume::<T>(dims.n()) * (half * grad + half * mass - pot / p))
}

/// Nehari level `(p−2)/(2p)·‖U‖_p^p`.
pub fn compute_m_e<T: Scalar>(profile: &RadialProfile<T>) -> Result<T> {
    let dims = profile.dims();
    let p = dims.exponent::<T>();
    let pot = integral(profile, p, T::zero(), T::from_usize_lossy(dims.n() - 1), 1)?;
    Ok((p - T::lit(2.0)) / (T::lit(2.0) * p) * sphere_volume::<T>(dims.n()) * pot)
}

/// `e^{-r}·∫₀^π e^{r cos θ} sin^{k}θ dθ`.
pub fn scaled_angular_kernel<T: Scalar>(r: T, k: usize) -> Result<T> {
    let pi = T::PI();
    let mut breaks = vec![T::zero()];
    if r > T::one() {
        let width = T::lit(4.0) / r.sqrt();
        if width < pi {
            breaks.push(width);
        }
    }
    breaks.push(pi);
    let settings = AdaptiveSettings {
        abs_tol: T::min_positive_value(),
        rel_tol: T::lit(1e-13).max(T::epsilon() * T::lit(16.0)),
        max_panels: 2000,
    };
    let est = integrate_adaptive(&breaks, &settings, |th: T| {
        (r * (th.cos() - T::one())).exp() * th.sin().powi(k as i32)
    })?;
    Ok(est.value)
}

/// `γ = ∫_{ℝⁿ} U^{p−1}(z) e^{⟨b,z⟩} dz` for a unit vector `b`, by reduction to
/// a radial integral against the spherical average of `e^{⟨b,z⟩}`.
pub fn compute_gamma<T: Scalar>(profile: &RadialProfile<T>, b: &[T]) -> Result<T> {
    let dims = profile.dims();
    let n = dims.n();
    if b.len() != n {
        return Err(Error::Domain(format!(
            "direction has {} components, expected {n}",
            b.len()
        )));
    }
    let norm = b.iter().map(|&x| x * x).sum::<T>().sqrt();
    if !((norm - T::one()).abs() <= T::lit(1e-12)) {
        return Err(Error::Domain(format!("direction must be a unit vector, |b| = {norm}")));
    }
    let q = dims.nonlinearity_power::<T>();
    let w = T::from_usize_lossy(n - 1);
    let mut failure = None;
    let mut integrand = |r: T, u: T| -> T {
        let ang = if n == 1 {
            // S⁰ = {±1}
            T::one() + (T::lit(-2.0) * r).exp()
        } else {
            match scaled_angular_kernel(r, n - 2) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        };
        // U^{p-1} e^{r} written as exp to avoid overflow
        (q * u.ln() + r).exp() * r.powf(w) * ang
    };
    let body = profile.integrate_grid(1, |r, u, _| {
        if u > T::zero() {
            integrand(r, u)
        } else {
            T::zero()
        }
    });
    let tail = profile.integrate_tail(body, T::epsilon() * T::lit(1e-3), |r, u, _| {
        if u > T::zero() {
            integrand(r, u)
        } else {
            T::zero()
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let factor = if n == 1 {
        T::one()
    } else {
        sphere_volume::<T>(n - 1)
    };
    Ok(factor * (body + tail))
}

pub fn compute_all<T: Scalar>(profile: &RadialProfile<T>) -> Result<GroundStateConstants<T>> {
    let dims = profile.dims();
    let beta = compute_beta(profile)?;
    let mut e1 = vec![T::zero(); dims.n()];
    e1[0] = T::one();
    Ok(GroundStateConstants {
        dims,
        alpha_energy: compute_alpha_energy(profile)?,
        beta_term1: beta.term1,
        beta_term2: beta.term2,
        beta: beta.beta,
        gamma: compute_gamma(profile, &e1)?,
        m_e: compute_m_e(profile)?,
    })
}

/// Shoots, builds the profile and evaluates its constants.
pub fn constants_for<T: Scalar>(
    dims: &Dimensions,
    config: &ShootingConfig<T>,
) -> Result<(RadialProfile<T>, GroundStateConstants<T>)> {
    let profile = solve_ground_state(dims, config)?;
    let constants = compute_all(&profile)?;
    Ok((profile, constants))
}

/// One table row: the constants, or the reason they could not be computed.
#[derive(Debug)]
pub struct TableEntry<T> {
    pub m: usize,
    pub n: usize,
    pub result: Result<GroundStateConstants<T>>,
}

/// Computes every `(m, n)` row independently and in parallel; row order is
/// preserved.
pub fn beta_table<T: Scalar>(rows: &[(usize, usize)], config: &ShootingConfig<T>) -> Vec<TableEntry<T>> {
    rows.par_iter()
        .map(|&(m, n)| TableEntry {
            m,
            n,
            result: Dimensions::new(n, m).and_then(|d| constants_for(&d, config).map(|(_, c)| c)),
        })
        .collect()
}

/// Fixed-point rendering with five significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub const TABLE_COLUMNS: &str = "m,n,term1,term2,beta,alpha,gamma,mE";

/// CSV with the fixed column order. Failed rows become `# m=.., n=..: error`
/// comment lines in place.
pub fn table_to_csv<T: Scalar>(entries: &[TableEntry<T>], full_precision: bool) -> String {
    let fmt = |x: T| {
        if full_precision {
            format!("{:e}", x.as_f64())
        } else {
            format_significant(x.as_f64(), 5)
        }
    };
    let mut out = String::new();
    out.push_str(TABLE_COLUMNS);
    out.push('\n');
    for e in entries {
        match &e.result {
            Ok(c) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    e.m,
                    e.n,
                    fmt(c.beta_term1),
                    fmt(c.beta_term2),
                    fmt(c.beta),
                    fmt(c.alpha_energy),
                    fmt(c.gamma),
                    fmt(c.m_e)
                );
            }
            Err(err) => {
                let _ = writeln!(out, "# m={}, n={}: {}", e.m, e.n, err);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub m: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "mE", skip_serializing_if = "Option::is_none")]
    pub m_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn table_records<T: Scalar>(entries: &[TableEntry<T>]) -> Vec<TableRecord> {
    entries
        .iter()
        .map(|e| match &e.result {
            Ok(c) => TableRecord {
                m: e.m,
                n: e.n,
                term1: Some(c.beta_term1.as_f64()),
                term2: Some(c.beta_term2.as_f64()),
                beta: Some(c.beta.as_f64()),
                alpha: Some(c.alpha_energy.as_f64()),
                gamma: Some(c.gamma.as_f64()),
                m_e: Some(c.m_e.as_f64()),
                error: None,
            },
            Err(err) => TableRecord {
                m: e.m,
                n: e.n,
                term1: None,
                term2: None,
                beta: None,
                alpha: None,
                gamma: None,
                m_e: None,
                error: Some(err.to_string()),
            },
        })
        .collect()
}

pub fn table_to_json<T: Scalar>(entries: &[TableEntry<T>]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&table_records(entries))?)
}
