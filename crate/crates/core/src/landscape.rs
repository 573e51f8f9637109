//! The reduced energy `J̄_ε(ξ̄) = k₀α + ½βε²Σ s(ξᵢ) − ½Σ_{i≠j} γ U(d(ξᵢ,ξⱼ)/ε)`
//! on a model space, and its maximization over the admissible set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::GroundStateConstants;
use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;
use crate::profile::RadialProfile;
use crate::scalar::Scalar;

/// `k₀` peak locations at scale `ε`, with the admissibility radius `ρ` around
/// `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakConfiguration<T> {
    pub eps: T,
    pub rho: T,
    pub center: Vec<T>,
    pub points: Vec<Vec<T>>,
}

impl<T: Scalar> PeakConfiguration<T> {
    pub fn new(eps: T, rho: T, center: Vec<T>, points: Vec<Vec<T>>) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        if !(rho > T::zero()) {
            return Err(Error::Domain(format!("rho must be positive, got {rho}")));
        }
        if points.is_empty() {
            return Err(Error::Domain("need at least one peak".into()));
        }
        Ok(Self {
            eps,
            rho,
            center,
            points,
        })
    }

    pub fn k0(&self) -> usize {
        self.points.len()
    }
}

/// The constants entering the reduced energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstants<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Scalar> From<&GroundStateConstants<T>> for EnergyConstants<T> {
    fn from(c: &GroundStateConstants<T>) -> Self {
        Self {
            alpha: c.alpha_energy,
            beta: c.beta,
            gamma: c.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedEnergyReport<T> {
    pub value: T,
    pub leading: T,
    pub curvature_term: T,
    pub interaction_term: T,
    pub admissible: bool,
    /// `Σ_{i≠j} U(d/ε)`, compared against `ε²`.
    pub interaction_sum: T,
    /// `max_i d(ξ₀, ξᵢ)`, compared against `ρ`.
    pub max_center_distance: T,
}

struct Terms<T> {
    curvature: T,
    interaction: T,
    interaction_sum: T,
    max_center_distance: T,
}

fn terms<T: Scalar>(
    points: &[Vec<T>],
    center: &[T],
    eps: T,
    model: &ManifoldModel<T>,
    constants: &EnergyConstants<T>,
    profile: &RadialProfile<T>,
) -> Terms<T> {
    let half = T::lit(0.5);
    let s: T = points.iter().map(|x| model.scalar_curvature(x)).sum();
    let mut pair_sum = T::zero();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            pair_sum += profile.eval_u(model.distance(&points[i], &points[j]) / eps);
        }
    }
    // ordered pairs
    let interaction_sum = T::lit(2.0) * pair_sum;
    Terms {
        curvature: half * constants.beta * eps * eps * s,
        interaction: T::zero() - half * constants.gamma * interaction_sum,
        interaction_sum,
        max_center_distance: points
            .iter()
            .map(|x| model.distance(center, x))
            .fold(T::zero(), T::max),
    }
}

fn is_admissible<T: Scalar>(t: &Terms<T>, eps: T, rho: T) -> bool {
    t.max_center_distance < rho && t.interaction_sum < eps * eps
}

pub fn reduced_energy<T: Scalar>(
    config: &PeakConfiguration<T>,
    model: &ManifoldModel<T>,
    constants: &EnergyConstants<T>,
    profile: &RadialProfile<T>,
) -> Result<ReducedEnergyReport<T>> {
    model.check_point(&config.center)?;
    for x in &config.points {
        model.check_point(x)?;
    }
    let t = terms(&config.points, &config.center, config.eps, model, constants, profile);
    let leading = T::from_usize_lossy(config.k0()) * constants.alpha;
    Ok(ReducedEnergyReport {
        value: leading + t.curvature + t.interaction,
        leading,
        curvature_term: t.curvature,
        interaction_term: t.interaction,
        admissible: is_admissible(&t, config.eps, config.rho),
        interaction_sum: t.interaction_sum,
        max_center_distance: t.max_center_distance,
    })
}

/// Peaks at `exp_{ξ₀}(√ε·eᵢ)`, with the offsets `eᵢ` given in the tangent
/// coordinates of [`ManifoldModel::tangent_basis`].
pub fn scaled_initializer<T: Scalar>(
    model: &ManifoldModel<T>,
    center: &[T],
    eps: T,
    rho: T,
    offsets: &[Vec<T>],
) -> Result<PeakConfiguration<T>> {
    model.check_point(center)?;
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    for (i, a) in offsets.iter().enumerate() {
        if a.len() != model.dim() {
            return Err(Error::Domain(format!(
                "offset {i} has {} components, expected {}",
                a.len(),
                model.dim()
            )));
        }
        if offsets[..i].iter().any(|b| b == a) {
            return Err(Error::Domain(format!("offset {i} repeats an earlier offset")));
        }
    }
    let basis = model.tangent_basis(center);
    let scale = eps.sqrt();
    let points = offsets
        .iter()
        .map(|e| {
            let c: Vec<T> = e.iter().map(|&v| v * scale).collect();
            model.chart(center, &basis, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    PeakConfiguration::new(eps, rho, center.to_vec(), points)
}

/// `k` distinct unit directions in ℝⁿ: the vertices of a centered regular
/// simplex when `k ≤ n + 1`, otherwise evenly spaced on a circle (or a line
/// when `n = 1`).
pub fn simplex_directions<T: Scalar>(k: usize, n: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![T::zero(); n]; k];
    if k == 1 {
        out[0][0] = T::one();
    } else if k <= n + 1 {
        // Helmert basis of the sum-zero hyperplane in ℝᵏ
        let kf = T::from_usize_lossy(k);
        let scale = (kf / (kf - T::one())).sqrt();
        for j in 1..k {
            let jf = T::from_usize_lossy(j);
            let norm = (jf * (jf + T::one())).sqrt();
            for (i, v) in out.iter_mut().enumerate() {
                let h = match i.cmp(&j) {
                    std::cmp::Ordering::Less => T::one(),
                    std::cmp::Ordering::Equal => -jf,
                    std::cmp::Ordering::Greater => T::zero(),
                };
                v[j - 1] = scale * h / norm;
            }
        }
    } else if n >= 2 {
        for (i, v) in out.iter_mut().enumerate() {
            let t = T::lit(2.0) * T::PI() * T::from_usize_lossy(i) / T::from_usize_lossy(k);
            v[0] = t.cos();
            v[1] = t.sin();
        }
    } else {
        let mid = T::from_usize_lossy(k - 1) / T::lit(2.0);
        for (i, v) in out.iter_mut().enumerate() {
            v[0] = (T::from_usize_lossy(i) - mid) / mid;
        }
    }
    out
}

/// Multi-start compass search settings. Step sizes are in units of `√ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub step_min: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 9,
            max_iters: 20_000,
            step_init: 0.25,
            step_min: 1e-9,
            seed: 0x5eed,
        }
    }
}

pub const OFFSET_LADDER: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerDiagnostics {
    pub starts_tried: usize,
    pub feasible_starts: usize,
    pub iterations: usize,
    /// Whether the winning run shrank its step below `step_min`.
    pub converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult<T> {
    pub configuration: PeakConfiguration<T>,
    pub report: ReducedEnergyReport<T>,
    pub diagnostics: OptimizerDiagnostics,
}

/// Serialized optimizer output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub points: Vec<Vec<f64>>,
    pub value: f64,
    pub terms: TermsRecord,
    pub admissible: bool,
    pub eps: f64,
    pub rho: f64,
    pub k0: usize,
    pub center: Vec<f64>,
    pub interaction_sum: f64,
    pub max_center_distance: f64,
    pub diagnostics: OptimizerDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermsRecord {
    pub leading: f64,
    pub curvature: f64,
    pub interaction: f64,
}

impl<T: Scalar> OptimizationResult<T> {
    pub fn record(&self) -> OptimizationRecord {
        let v = |x: &Vec<T>| x.iter().map(|a| a.as_f64()).collect::<Vec<f64>>();
        let c = &self.configuration;
        OptimizationRecord {
            points: c.points.iter().map(v).collect(),
            value: self.report.value.as_f64(),
            terms: TermsRecord {
                leading: self.report.leading.as_f64(),
                curvature: self.report.curvature_term.as_f64(),
                interaction: self.report.interaction_term.as_f64(),
            },
            admissible: self.report.admissible,
            eps: c.eps.as_f64(),
            rho: c.rho.as_f64(),
            k0: c.k0(),
            center: v(&c.center),
            interaction_sum: self.report.interaction_sum.as_f64(),
            max_center_distance: self.report.max_center_distance.as_f64(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

struct Run<T> {
    coords: Vec<T>,
    value: T,
    min_separation: T,
    iterations: usize,
    converged: bool,
}

/// Approximate maximizer of `J̄_ε` over the admissible configurations of `k0`
/// peaks within `rho` of `center`.
///
/// Starts are the offsets `√ε·{0.5, 1, 2}·(simplex directions)`, followed by
/// seeded random perturbations of them; each start runs a compass search in
/// the tangent coordinates at `center`, rejecting inadmissible moves.
#[allow(clippy::too_many_arguments)]
pub fn optimize_peaks<T: Scalar>(
    model: &ManifoldModel<T>,
    constants: &EnergyConstants<T>,
    profile: &RadialProfile<T>,
    k0: usize,
    eps: T,
    rho: T,
    center: &[T],
    opt: &OptimizerConfig,
) -> Result<OptimizationResult<T>> {
    if k0 == 0 {
        return Err(Error::Domain("k0 must be at least 1".into()));
    }
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if !(rho > T::zero()) {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    if opt.starts == 0 || !(opt.step_init > 0.0) || !(opt.step_min > 0.0) || opt.step_min > opt.step_init {
        return Err(Error::Config(
            "optimizer needs starts >= 1 and 0 < step_min <= step_init".into(),
        ));
    }
    model.check_point(center)?;
    let mut warnings = Vec::new();
    if !(constants.beta < T::zero()) {
        warnings.push(format!(
            "beta = {} is not negative; peaks are attracted to curvature maxima",
            constants.beta
        ));
    }
    let n = model.dim();
    let basis = model.tangent_basis(center);
    let sq = eps.sqrt();
    let inj = model.injectivity_radius();

    let objective = |y: &[T]| -> Option<(T, T)> {
        let mut points = Vec::with_capacity(k0);
        for c in y.chunks(n) {
            let len = c.iter().map(|&a| a * a).sum::<T>().sqrt();
            if !(len < inj) {
                return None;
            }
            points.push(model.chart(center, &basis, c).ok()?);
        }
        let t = terms(&points, center, eps, model, constants, profile);
        if !is_admissible(&t, eps, rho) {
            return None;
        }
        let mut min_sep = T::infinity();
        for i in 0..k0 {
            for j in i + 1..k0 {
                min_sep = min_sep.min(model.distance(&points[i], &points[j]));
            }
        }
        Some((t.curvature + t.interaction, min_sep))
    };

    let dirs = simplex_directions::<T>(k0, n);
    let starts: Vec<Vec<T>> = (0..opt.starts)
        .map(|i| {
            let scale = T::lit(OFFSET_LADDER[i % OFFSET_LADDER.len()]) * sq;
            let mut y: Vec<T> = dirs.iter().flatten().map(|&d| d * scale).collect();
            if i >= OFFSET_LADDER.len() {
                let mut rng = ChaCha8Rng::seed_from_u64(opt.seed.wrapping_add(i as u64));
                for v in y.iter_mut() {
                    *v += T::lit(rng.gen_range(-0.5..0.5)) * sq;
                }
            }
            y
        })
        .collect();

    let step_init = T::lit(opt.step_init) * sq;
    let step_min = T::lit(opt.step_min) * sq;
    let runs: Vec<Option<Run<T>>> = starts
        .par_iter()
        .map(|y0| {
            let (mut value, mut sep) = objective(y0)?;
            let mut y = y0.clone();
            let mut step = step_init;
            let mut iterations = 0;
            let mut converged = false;
            while iterations < opt.max_iters {
                iterations += 1;
                let mut improved = false;
                'poll: for k in 0..y.len() {
                    for sign in [T::one(), -T::one()] {
                        let mut trial = y.clone();
                        trial[k] += sign * step;
                        if let Some((v, s)) = objective(&trial) {
                            if v > value {
                                y = trial;
                                value = v;
                                sep = s;
                                improved = true;
                                break 'poll;
                            }
                        }
                    }
                }
                if !improved {
                    step = step / T::lit(2.0);
                    if step < step_min {
                        converged = true;
                        break;
                    }
                }
            }
            Some(Run {
                coords: y,
                value,
                min_separation: sep,
                iterations,
                converged,
            })
        })
        .collect();

    let feasible = runs.iter().filter(|r| r.is_some()).count();
    let mut best: Option<&Run<T>> = None;
    for run in runs.iter().flatten() {
        best = match best {
            None => Some(run),
            Some(b) => {
                let tol = T::lit(1e-14) * b.value.abs().max(T::one());
                if run.value > b.value + tol
                    || ((run.value - b.value).abs() <= tol && run.min_separation > b.min_separation)
                {
                    Some(run)
                } else {
                    Some(b)
                }
            }
        };
    }
    let best = best.ok_or(Error::NoAdmissibleStart)?;
    if !best.converged {
        warnings.push(format!(
            "compass search stopped after {} iterations before reaching step_min",
            best.iterations
        ));
    }
    let points = best
        .coords
        .chunks(n)
        .map(|c| model.chart(center, &basis, c))
        .collect::<Result<Vec<_>>>()?;
    let configuration = PeakConfiguration::new(eps, rho, center.to_vec(), points)?;
    let report = reduced_energy(&configuration, model, constants, profile)?;
    if report.max_center_distance > T::lit(0.9) * rho {
        warnings.push("maximizer lies near the boundary of the admissible ball".into());
    }
    Ok(OptimizationResult {
        configuration,
        report,
        diagnostics: OptimizerDiagnostics {
            starts_tried: starts.len(),
            feasible_starts: feasible,
            iterations: best.iterations,
            converged: best.converged,
            warnings,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_directions_are_unit_and_equiangular() {
        for (k, n) in [(2usize, 2usize), (3, 2), (4, 3), (3, 5)] {
            let d = simplex_directions::<f64>(k, n);
            let cos = -1.0 / (k as f64 - 1.0);
            for i in 0..k {
                let len: f64 = d[i].iter().map(|a| a * a).sum::<f64>().sqrt();
                assert!((len - 1.0).abs() < 1e-14);
                for j in 0..i {
                    let dot: f64 = d[i].iter().zip(&d[j]).map(|(a, b)| a * b).sum();
                    assert!((dot - cos).abs() < 1e-14, "k={k} n={n}");
                }
            }
        }
        assert_eq!(simplex_directions::<f64>(1, 3), vec![vec![1.0, 0.0, 0.0]]);
        let many = simplex_directions::<f64>(5, 2);
        assert!((many[1][0] - (0.4 * std::f64::consts::PI).cos()).abs() < 1e-15);
        let line = simplex_directions::<f64>(3, 1);
        assert_eq!(line, vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn configuration_validation() {
        assert!(PeakConfiguration::new(0.0, 1.0, vec![0.0], vec![vec![0.0]]).is_err());
        assert!(PeakConfiguration::new(0.1, 0.0, vec![0.0], vec![vec![0.0]]).is_err());
        assert!(PeakConfiguration::<f64>::new(0.1, 1.0, vec![0.0], vec![]).is_err());
    }
}
