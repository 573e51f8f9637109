//! Self-check suites: reproduction of the reference β table, ground-state
//! identities, and the single-peak expansion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{expansion_slope_check, flat_energy, single_peak_energy_sphere, CutoffRamp, CutoffSpec, EnergyQuadrature};
use crate::constants::{compute_all, compute_alpha_energy, compute_m_e, compute_beta_with, compute_gamma, sphere_volume, REFERENCE_ROWS};
use crate::error::{Error, Result};
use crate::ground_state::{solve_ground_state, Dimensions, ShootingConfig};
use crate::landscape::{optimize_peaks, EnergyConstants, OptimizerConfig};
use crate::manifold::{CurvatureField, ManifoldModel};
use crate::profile::{RadialIntegrand, RadialProfile};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }

    fn failed(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: format!("{}: {err}", name.into()),
            measured: f64::NAN,
            tolerance: 0.0,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Table1,
    Identities,
    Expansion,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Identities => "identities",
            Self::Expansion => "expansion",
        }
    }

    pub fn run(&self, config: &ShootingConfig<f64>) -> SuiteReport {
        match self {
            Self::Table1 => table1_suite(config),
            Self::Identities => identities_suite(config),
            Self::Expansion => expansion_suite(config),
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Self::Table1),
            "identities" => Ok(Self::Identities),
            "expansion" => Ok(Self::Expansion),
            other => Err(Error::Config(format!(
                "unknown suite '{other}' (expected table1, identities or expansion)"
            ))),
        }
    }
}

pub const TABLE_TOLERANCE: f64 = 1e-2;
pub const IDENTITY_TOLERANCE: f64 = 1e-6;
pub const DECAY_CONSTANT_TOLERANCE: f64 = 1e-2;
pub const DECAY_WINDOW_TOLERANCE: f64 = 2e-2;
pub const ISOTROPY_TOLERANCE: f64 = 1e-8;
pub const PLANAR_ORACLE_TOLERANCE: f64 = 1e-6;
pub const SLOPE_TOLERANCE: f64 = 5e-2;
pub const SLOPE_STABILITY_TOLERANCE: f64 = 1e-2;
pub const FLAT_INVARIANCE_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_EPS_LADDER: [f64; 3] = [0.05, 0.02, 0.01];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn label(m: usize, n: usize) -> String {
    format!("(m={m},n={n})")
}

/// Term-by-term relative errors against [`REFERENCE_ROWS`].
pub fn table1_suite(config: &ShootingConfig<f64>) -> SuiteReport {
    let checks: Vec<Vec<Check>> = REFERENCE_ROWS
        .par_iter()
        .map(|&(m, n, t1, t2, beta)| {
            let name = format!("table1 {}", label(m, n));
            let res = Dimensions::new(n, m)
                .and_then(|d| solve_ground_state(&d, config))
                .and_then(|p| compute_beta_with(&p, 1));
            match res {
                Ok(b) => vec![
                    Check::at_most(format!("{name} term1"), rel(b.term1, t1), TABLE_TOLERANCE),
                    Check::at_most(format!("{name} term2"), rel(b.term2, t2), TABLE_TOLERANCE),
                    Check::at_most(format!("{name} beta"), rel(b.beta, beta), TABLE_TOLERANCE),
                    Check {
                        name: format!("{name} beta negative"),
                        measured: b.beta,
                        tolerance: 0.0,
                        passed: b.beta < 0.0,
                    },
                ],
                Err(e) => vec![Check::failed(name, &e)],
            }
        })
        .collect();
    SuiteReport::new("table1", checks.into_iter().flatten().collect())
}

/// Relative residuals of the Nehari and Pohozaev identities and of `α = m(E)`.
pub fn identity_residuals(profile: &RadialProfile<f64>) -> Result<(f64, f64, f64)> {
    let dims = profile.dims();
    let n = dims.n() as f64;
    let p: f64 = dims.exponent();
    let i = |a: f64, b: f64| -> Result<f64> {
        Ok(profile
            .radial_integral(&RadialIntegrand::new(a, b, n - 1.0)?)?
            .value)
    };
    let grad = i(0.0, 2.0)?;
    let mass = i(2.0, 0.0)?;
    let pot = i(p, 0.0)?;
    let nehari = rel(grad + mass, pot);
    let pohozaev = rel((n - 2.0) / 2.0 * grad + n / 2.0 * mass, n / p * pot);
    let alpha = compute_alpha_energy(profile)?;
    Ok((nehari, pohozaev, rel(alpha, compute_m_e(profile)?)))
}

/// Tail constants from `u` and `|u'|` on the default window: their relative
/// gap and the in-window deviation of the `u` fit.
pub fn decay_law(profile: &RadialProfile<f64>) -> Result<(f64, f64)> {
    let fit = profile.measure_tail(profile.default_tail_window()?)?;
    Ok((
        rel(fit.derivative_tail_c, fit.tail_c),
        fit.max_relative_deviation.max(fit.derivative_deviation),
    ))
}

/// `count` unit vectors in ℝⁿ drawn from a fixed seed.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 0.1 && len <= 1.0 {
            out.push(v.into_iter().map(|a| a / len).collect());
        }
    }
    out
}

/// `∫_{[−L,L]²} U^{p−1}(|z|) e^{⟨b,z⟩} dz` by a tensor Gauss–Legendre rule with
/// `panel`-wide panels, for a profile in two dimensions.
pub fn planar_gamma(profile: &RadialProfile<f64>, b: [f64; 2], half_width: f64, panel: f64) -> Result<f64> {
    if profile.dims().n() != 2 {
        return Err(Error::Domain("planar quadrature needs n = 2".into()));
    }
    let q: f64 = profile.dims().nonlinearity_power();
    let rule = GaussLegendre::<f64>::new(8);
    let panels = (2.0 * half_width / panel).round() as usize;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let a = -half_width + panel * k as f64;
            rule.mapped(a, a + panel).collect::<Vec<_>>()
        })
        .collect();
    let ex: Vec<f64> = nodes.iter().map(|&(x, w)| w * (b[0] * x).exp()).collect();
    let total: f64 = nodes
        .par_iter()
        .enumerate()
        .map(|(i, &(x, _))| {
            let mut row = 0.0;
            for &(y, wy) in &nodes {
                let u = profile.eval_u((x * x + y * y).sqrt());
                if u > 0.0 {
                    row += wy * (b[1] * y).exp() * u.powf(q);
                }
            }
            row * ex[i]
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total)
}

pub const PLANAR_HALF_WIDTH: f64 = 40.0;
pub const PLANAR_PANEL: f64 = 0.5;
pub const DIRECTION_SEED: u64 = 2024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub radial: f64,
    /// Largest relative spread of the radial γ over the directions.
    pub radial_spread: f64,
    /// Largest relative spread of the planar γ over the directions.
    pub planar_spread: f64,
    /// Largest relative gap between planar and radial γ.
    pub planar_gap: f64,
}

/// γ over ten seeded random directions by the radial reduction and, when
/// `planar` is set (`n = 2` only), by planar quadrature in each direction.
pub fn gamma_isotropy(profile: &RadialProfile<f64>, planar: bool) -> Result<IsotropyReport> {
    let n = profile.dims().n();
    let dirs = random_directions(n, 10, DIRECTION_SEED);
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let radial = compute_gamma(profile, &e1)?;
    let mut radial_spread: f64 = 0.0;
    for b in &dirs {
        radial_spread = radial_spread.max(rel(compute_gamma(profile, b)?, radial));
    }
    let (mut planar_spread, mut planar_gap) = (0.0f64, 0.0f64);
    if planar {
        let vals = dirs
            .iter()
            .map(|b| planar_gamma(profile, [b[0], b[1]], PLANAR_HALF_WIDTH, PLANAR_PANEL))
            .collect::<Result<Vec<f64>>>()?;
        for v in &vals {
            planar_spread = planar_spread.max(rel(*v, vals[0]));
            planar_gap = planar_gap.max(rel(*v, radial));
        }
    }
    Ok(IsotropyReport {
        radial,
        radial_spread,
        planar_spread,
        planar_gap,
    })
}

/// Nehari, Pohozaev, `α = m(E)` and decay-law checks for every reference row,
/// then γ isotropy.
pub fn identities_suite(config: &ShootingConfig<f64>) -> SuiteReport {
    let per_row: Vec<Vec<Check>> = REFERENCE_ROWS
        .par_iter()
        .map(|&(m, n, ..)| {
            let name = label(m, n);
            let profile = match Dimensions::new(n, m).and_then(|d| solve_ground_state(&d, config)) {
                Ok(p) => p,
                Err(e) => return vec![Check::failed(name, &e)],
            };
            let mut checks = Vec::new();
            match identity_residuals(&profile) {
                Ok((neh, poh, am)) => {
                    checks.push(Check::at_most(format!("nehari {name}"), neh, IDENTITY_TOLERANCE));
                    checks.push(Check::at_most(format!("pohozaev {name}"), poh, IDENTITY_TOLERANCE));
                    checks.push(Check::at_most(format!("alpha = mE {name}"), am, IDENTITY_TOLERANCE));
                }
                Err(e) => checks.push(Check::failed(format!("identities {name}"), &e)),
            }
            match decay_law(&profile) {
                Ok((gap, dev)) => {
                    checks.push(Check::at_most(format!("decay constant u vs u' {name}"), gap, DECAY_CONSTANT_TOLERANCE));
                    checks.push(Check::at_most(format!("decay window deviation {name}"), dev, DECAY_WINDOW_TOLERANCE));
                }
                Err(e) => checks.push(Check::failed(format!("decay law {name}"), &e)),
            }
            let oracle = n == 2 && m == 2;
            match gamma_isotropy(&profile, oracle) {
                Ok(iso) => {
                    checks.push(Check::at_most(format!("gamma isotropy {name}"), iso.radial_spread, ISOTROPY_TOLERANCE));
                    if oracle {
                        checks.push(Check::at_most(format!("gamma planar isotropy {name}"), iso.planar_spread, ISOTROPY_TOLERANCE));
                        checks.push(Check::at_most(format!("gamma planar oracle {name}"), iso.planar_gap, PLANAR_ORACLE_TOLERANCE));
                    }
                    checks.push(Check {
                        name: format!("gamma positive {name}"),
                        measured: iso.radial,
                        tolerance: 0.0,
                        passed: iso.radial > 0.0,
                    });
                }
                Err(e) => checks.push(Check::failed(format!("gamma {name}"), &e)),
            }
            checks
        })
        .collect();
    SuiteReport::new("identities", per_row.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeStudy {
    pub m: usize,
    pub n: usize,
    pub report: crate::ansatz::ExpansionReport,
    pub refined_slope: f64,
    /// Relative change of the slope under refined quadrature.
    pub stability: f64,
}

/// Expansion slope on the unit sphere with the default ladder and a quintic
/// cutoff of radius 1, at default and refined quadrature.
pub fn slope_study(m: usize, n: usize, config: &ShootingConfig<f64>) -> Result<SlopeStudy> {
    let dims = Dimensions::new(n, m)?;
    let profile = solve_ground_state(&dims, config)?;
    let c = compute_all(&profile)?;
    let spec = CutoffSpec::new(1.0, CutoffRamp::Quintic)?;
    let quad = EnergyQuadrature::default();
    let report = expansion_slope_check(&profile, c.alpha_energy, c.beta, 1.0, &DEFAULT_EPS_LADDER, &spec, &quad)?;
    let refined = expansion_slope_check(&profile, c.alpha_energy, c.beta, 1.0, &DEFAULT_EPS_LADDER, &spec, &quad.refined())?;
    Ok(SlopeStudy {
        m,
        n,
        stability: rel(refined.fitted_slope, report.fitted_slope),
        refined_slope: refined.fitted_slope,
        report,
    })
}

/// Largest relative spread of the flat energy over `eps_values`.
pub fn flat_invariance(profile: &RadialProfile<f64>, eps_values: &[f64]) -> Result<f64> {
    let quad = EnergyQuadrature::default();
    let vals = eps_values
        .iter()
        .map(|&e| flat_energy(profile, e, &quad))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.iter().map(|v| rel(*v, vals[0])).fold(0.0, f64::max))
}

pub const FLAT_EPS_VALUES: [f64; 5] = [0.1, 0.05, 0.02, 0.01, 0.005];
pub const SLOPE_ROWS: [(usize, usize); 2] = [(2, 2), (3, 4)];

pub fn expansion_suite(config: &ShootingConfig<f64>) -> SuiteReport {
    let mut checks = Vec::new();
    for (m, n) in SLOPE_ROWS {
        let name = label(m, n);
        match slope_study(m, n, config) {
            Ok(s) => {
                checks.push(Check::at_most(format!("slope vs target {name}"), s.report.relative_gap, SLOPE_TOLERANCE));
                checks.push(Check::at_most(format!("slope stability {name}"), s.stability, SLOPE_STABILITY_TOLERANCE));
                checks.push(Check {
                    name: format!("slope negative {name}"),
                    measured: s.report.fitted_slope,
                    tolerance: 0.0,
                    passed: s.report.fitted_slope < 0.0,
                });
            }
            Err(e) => checks.push(Check::failed(format!("slope {name}"), &e)),
        }
        let flat = Dimensions::new(n, m)
            .and_then(|d| solve_ground_state(&d, config))
            .and_then(|p| {
                let c = compute_all(&p)?;
                let spread = flat_invariance(&p, &FLAT_EPS_VALUES)?;
                let alpha_gap = rel(flat_energy(&p, 0.05, &EnergyQuadrature::default())?, c.alpha_energy);
                let q5 = CutoffSpec::new(1.0, CutoffRamp::Quintic)?;
                let q7 = CutoffSpec::new(1.0, CutoffRamp::Septic)?;
                let quad = EnergyQuadrature::default();
                let j5 = single_peak_energy_sphere(&p, 0.05, 1.0, &q5, &quad)?;
                let j7 = single_peak_energy_sphere(&p, 0.05, 1.0, &q7, &quad)?;
                Ok((spread, alpha_gap, rel(j7, j5)))
            });
        match flat {
            Ok((spread, alpha_gap, cut)) => {
                checks.push(Check::at_most(format!("flat energy eps-invariance {name}"), spread, FLAT_INVARIANCE_TOLERANCE));
                checks.push(Check::at_most(format!("flat energy equals alpha {name}"), alpha_gap, FLAT_INVARIANCE_TOLERANCE));
                checks.push(Check::at_most(format!("cutoff insensitivity {name}"), cut, FLAT_INVARIANCE_TOLERANCE));
            }
            Err(e) => checks.push(Check::failed(format!("flat energy {name}"), &e)),
        }
    }
    SuiteReport::new("expansion", checks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub k0: usize,
    pub eps: Vec<f64>,
    pub max_distance: Vec<f64>,
    pub admissible: Vec<bool>,
    pub monotone: bool,
}

pub const TREND_EPS: [f64; 3] = [0.1, 0.05, 0.02];

/// Optimizer maximizers on the quadratic well `6 + |x|²` in ℝⁿ, `ρ = 1`, for
/// `k0 ∈ {1, 2, 3}` over [`TREND_EPS`].
pub fn concentration_trend(m: usize, n: usize, config: &ShootingConfig<f64>, opt: &OptimizerConfig) -> Result<Vec<TrendRow>> {
    let dims = Dimensions::new(n, m)?;
    let profile = solve_ground_state(&dims, config)?;
    let constants = EnergyConstants::from(&compute_all(&profile)?);
    let x0 = vec![0.0; n];
    let model = ManifoldModel::euclidean(n, CurvatureField::QuadraticWell { s0: 6.0, x0: x0.clone() })?;
    let mut rows = Vec::new();
    for k0 in 1..=3 {
        let mut max_distance = Vec::new();
        let mut admissible = Vec::new();
        for eps in TREND_EPS {
            let r = optimize_peaks(&model, &constants, &profile, k0, eps, 1.0, &x0, opt)?;
            max_distance.push(r.report.max_center_distance);
            admissible.push(r.report.admissible);
        }
        let monotone = max_distance.windows(2).all(|w| w[1] <= w[0]);
        rows.push(TrendRow {
            k0,
            eps: TREND_EPS.to_vec(),
            max_distance,
            admissible,
            monotone,
        });
    }
    Ok(rows)
}

/// `|S^{n−1}|·∫₀^π sin^{n−1}θ dθ` against `|Sⁿ|`, by Gauss–Legendre quadrature.
pub fn sphere_volume_recursion_gap(n: usize) -> f64 {
    let rule = GaussLegendre::<f64>::new(40);
    let int = rule.integrate(0.0, std::f64::consts::PI, |t| t.sin().powi(n as i32 - 1));
    rel(sphere_volume::<f64>(n) * int, sphere_volume::<f64>(n + 1))
}
