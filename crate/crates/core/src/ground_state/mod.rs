//! Shooting for the radial ground state of `-ΔU + U = U^{p-1}` in ℝⁿ.
//!
//! The radial profile `h(t)` satisfies
//! `h'' + (n-1)/t h' - h + h^{p-1} = 0`, `h(0) = α`, `h'(0) = 0`, and exactly
//! one amplitude `α₀` yields a positive solution that vanishes at infinity.
//! Trajectories with `α < α₀` turn back up while `0 < h < 1`; trajectories
//! with `α > α₀` cross zero. Bisection on that dichotomy pins down `α₀`.

mod rk;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{decay_shape, RadialProfile};
use crate::scalar::{positive_part, Scalar};

pub(crate) use rk::{DenseStep, Dopri5, Flow, State};

/// Base dimension `n`, fiber dimension `m` and the derived exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dimensions {
    n: usize,
    m: usize,
}

impl Dimensions {
    /// `n = 1` is accepted: it is the one-dimensional soliton case, where the
    /// ground state is known in closed form and serves as a test oracle.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimensions("n must be at least 1".into()));
        }
        if m == 0 {
            return Err(Error::InvalidDimensions(
                "m must be at least 1 (N = n + m must exceed n)".into(),
            ));
        }
        if n + m < 3 {
            return Err(Error::InvalidDimensions(format!(
                "N = n + m = {} must be at least 3 for p = 2N/(N-2) to be defined",
                n + m
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `N = n + m`.
    pub fn total(&self) -> usize {
        self.n + self.m
    }

    /// `p = 2N/(N-2)`.
    pub fn exponent<T: Scalar>(&self) -> T {
        let big_n = T::from_usize_lossy(self.total());
        T::lit(2.0) * big_n / (big_n - T::lit(2.0))
    }

    /// `p - 1 = (N+2)/(N-2)`, formed directly rather than as `p - 1`.
    pub fn nonlinearity_power<T: Scalar>(&self) -> T {
        let big_n = T::from_usize_lossy(self.total());
        (big_n + T::lit(2.0)) / (big_n - T::lit(2.0))
    }

    /// `c_N = (N-2)/(4(N-1))`.
    pub fn c_n<T: Scalar>(&self) -> T {
        let big_n = T::from_usize_lossy(self.total());
        (big_n - T::lit(2.0)) / (T::lit(4.0) * (big_n - T::one()))
    }

    /// `N ≤ 9`, the range covered by the reference table.
    pub fn in_reference_range(&self) -> bool {
        self.total() <= 9
    }
}

impl std::fmt::Display for Dimensions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(m={}, n={})", self.m, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotKind {
    /// `h` reached zero with `h' < 0`.
    Crossed,
    /// `h' ≥ 0` while `0 < h < 1`.
    TurnedUp,
    /// Neither event before `r_max`.
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome<T> {
    pub kind: ShotKind,
    pub event_radius: T,
}

/// Tolerances and bracket for the shooting solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig<T> {
    pub alpha_lo: T,
    pub alpha_hi: T,
    /// Target relative width of the final bracket.
    pub bisect_tol: T,
    pub r_max: T,
    pub ode_rel_tol: T,
    pub ode_abs_tol: T,
    /// Radius at which the series start hands over to the integrator.
    pub t0: T,
    pub max_bracket_expansions: usize,
    pub max_steps: usize,
    pub h_max: T,
    /// Forward/backward matching: the forward trajectory is trusted until the
    /// two bracket trajectories differ by this relative amount...
    pub match_divergence: T,
    /// ...or until `u` falls below this fraction of `α₀`.
    pub match_floor: T,
    /// The stored profile ends where `u` falls below this fraction of `α₀`.
    pub profile_floor: T,
}

impl<T: Scalar> Default for ShootingConfig<T> {
    fn default() -> Self {
        Self {
            alpha_lo: T::lit(1.0 + 1e-6),
            alpha_hi: T::lit(8.0),
            bisect_tol: T::lit(1e-12),
            r_max: T::lit(60.0),
            ode_rel_tol: T::lit(1e-10),
            ode_abs_tol: T::lit(1e-12),
            t0: T::lit(1e-6),
            max_bracket_expansions: 60,
            max_steps: 2_000_000,
            h_max: T::lit(0.1),
            match_divergence: T::lit(1e-9),
            match_floor: T::lit(1e-4),
            profile_floor: T::lit(1e-12),
        }
    }
}

impl<T: Scalar> ShootingConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !positive(self.bisect_tol) {
            return Err(Error::Config("bisect_tol must be positive".into()));
        }
        if !positive(self.t0) {
            return Err(Error::Config("t0 must be positive".into()));
        }
        if !positive(self.ode_rel_tol) || self.ode_abs_tol < T::zero() {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        if !(self.r_max > self.t0) {
            return Err(Error::Config("r_max must exceed t0".into()));
        }
        if !positive(self.alpha_lo) || !(self.alpha_hi > self.alpha_lo) {
            return Err(Error::Config("need 0 < alpha_lo < alpha_hi".into()));
        }
        if !positive(self.h_max) {
            return Err(Error::Config("h_max must be positive".into()));
        }
        Ok(())
    }

    fn integrator(&self) -> Dopri5<T> {
        Dopri5 {
            rtol: self.ode_rel_tol,
            atol: self.ode_abs_tol,
            h_max: self.h_max,
            max_steps: self.max_steps,
        }
    }
}

/// Right-hand side of the radial equation as a first-order system:
/// `(h, h') ↦ (h', h - (h⁺)^{p-1} - (n-1)h'/t)`.
pub fn ode_rhs<T: Scalar>(t: T, state: [T; 2], dims: &Dimensions) -> Result<[T; 2]> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!(
            "radial equation is singular at t = {t}; start from the series expansion"
        )));
    }
    Ok(rhs_unchecked(t, &state, dims.nonlinearity_power(), dims.n()))
}

#[inline]
fn rhs_unchecked<T: Scalar>(t: T, y: &State<T>, q: T, n: usize) -> State<T> {
    let damping = if n == 1 {
        T::zero()
    } else {
        T::from_usize_lossy(n - 1) * y[1] / t
    };
    [y[1], y[0] - positive_part(y[0]).powf(q) - damping]
}

/// `h''(0) = (α - α^{p-1})/n`; the radial Laplacian at the origin is `n·h''(0)`.
pub fn origin_curvature<T: Scalar>(alpha: T, dims: &Dimensions) -> T {
    (alpha - alpha.powf(dims.nonlinearity_power())) / T::from_usize_lossy(dims.n())
}

/// Taylor start `h ≈ α + h''(0)t²/2`, `h' ≈ h''(0)t`.
pub fn series_start<T: Scalar>(alpha: T, dims: &Dimensions, t0: T) -> [T; 2] {
    let k = origin_curvature(alpha, dims);
    [alpha + k * t0 * t0 / T::lit(2.0), k * t0]
}

fn event_of<T: Scalar>(step: &DenseStep<T>) -> Option<ShotOutcome<T>> {
    let crossed = step.y1[0] <= T::zero();
    let turned = step.y1[1] >= T::zero() && step.y1[0] < T::one() && step.y1[0] > T::zero();
    if crossed {
        return Some(ShotOutcome {
            kind: ShotKind::Crossed,
            event_radius: rk::locate_root(step, |y| y[0]),
        });
    }
    if turned {
        return Some(ShotOutcome {
            kind: ShotKind::TurnedUp,
            event_radius: rk::locate_root(step, |y| y[1]),
        });
    }
    None
}

/// Integrates one trajectory from the series start until the first event.
pub fn classify_shot<T: Scalar>(
    alpha: T,
    dims: &Dimensions,
    config: &ShootingConfig<T>,
) -> Result<ShotOutcome<T>> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::Domain(format!("shooting amplitude must be positive, got {alpha}")));
    }
    if alpha <= T::one() {
        return Ok(ShotOutcome {
            kind: ShotKind::TurnedUp,
            event_radius: T::zero(),
        });
    }
    let mut outcome = None;
    shoot(alpha, dims, config, config.r_max, |step| match event_of(step) {
        Some(ev) => {
            outcome = Some(ev);
            Flow::Stop
        }
        None => Flow::Continue,
    })?;
    Ok(outcome.unwrap_or(ShotOutcome {
        kind: ShotKind::Undetermined,
        event_radius: config.r_max,
    }))
}

fn shoot<T: Scalar, C>(
    alpha: T,
    dims: &Dimensions,
    config: &ShootingConfig<T>,
    r_end: T,
    on_step: C,
) -> Result<rk::Finish<T>>
where
    C: FnMut(&DenseStep<T>) -> Flow,
{
    let q = dims.nonlinearity_power::<T>();
    let n = dims.n();
    let y0 = series_start(alpha, dims, config.t0);
    config
        .integrator()
        .integrate(|t, y| Ok(rhs_unchecked(t, y, q, n)), config.t0, y0, r_end, on_step)
}

/// Result of the bisection for `α₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearch<T> {
    pub alpha0: T,
    /// Final bracket; `lo` turns up, `hi` crosses.
    pub lo: T,
    pub hi: T,
    /// `(hi - lo) / hi`.
    pub bracket_width: T,
    pub iterations: usize,
    pub diagnostics: Vec<String>,
}

/// Bisection on the turned-up/crossed boundary.
pub fn find_alpha0<T: Scalar>(dims: &Dimensions, config: &ShootingConfig<T>) -> Result<AlphaSearch<T>> {
    config.validate()?;
    let mut diagnostics = Vec::new();
    let mut lo = config.alpha_lo;
    let mut hi = config.alpha_hi;
    let mut expansions = 0usize;

    while classify_shot(lo, dims, config)?.kind != ShotKind::TurnedUp {
        expansions += 1;
        if expansions > config.max_bracket_expansions {
            return Err(Error::Bracketing(format!(
                "no turned-up amplitude found above 1 for {dims}"
            )));
        }
        hi = hi.min(lo);
        lo = T::one() + (lo - T::one()) / T::lit(2.0);
    }
    loop {
        let shot = classify_shot(hi, dims, config)?;
        match shot.kind {
            ShotKind::Crossed => break,
            ShotKind::TurnedUp => lo = lo.max(hi),
            ShotKind::Undetermined => diagnostics.push(format!(
                "bracket expansion: amplitude {hi} undetermined at r_max = {}",
                config.r_max
            )),
        }
        expansions += 1;
        if expansions > config.max_bracket_expansions {
            return Err(Error::Bracketing(format!(
                "no crossing amplitude found up to {hi} for {dims} after {} expansions",
                config.max_bracket_expansions
            )));
        }
        hi = hi * T::lit(2.0);
    }

    let two = T::lit(2.0);
    let mut iterations = 0usize;
    while (hi - lo) / hi > config.bisect_tol {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            diagnostics.push("bracket reached floating-point resolution".into());
            break;
        }
        iterations += 1;
        match classify_shot(mid, dims, config)?.kind {
            ShotKind::Crossed => hi = mid,
            ShotKind::TurnedUp => lo = mid,
            ShotKind::Undetermined => {
                diagnostics.push(format!(
                    "amplitude {mid} neither crossed nor turned up before r_max; stopping bisection"
                ));
                break;
            }
        }
    }
    // endpoints must still classify as labelled
    if classify_shot(lo, dims, config)?.kind != ShotKind::TurnedUp
        || classify_shot(hi, dims, config)?.kind != ShotKind::Crossed
    {
        diagnostics.push("non-monotone classification at the final bracket".into());
    }
    Ok(AlphaSearch {
        alpha0: (lo + hi) / two,
        lo,
        hi,
        bracket_width: (hi - lo) / hi,
        iterations,
        diagnostics,
    })
}

fn trajectory<T: Scalar>(
    alpha: T,
    dims: &Dimensions,
    config: &ShootingConfig<T>,
) -> Result<Vec<DenseStep<T>>> {
    let mut steps = Vec::new();
    shoot(alpha, dims, config, config.r_max, |step| {
        steps.push(step.clone());
        if event_of(step).is_some() {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    Ok(steps)
}

fn eval_trajectory<T: Scalar>(steps: &[DenseStep<T>], t: T) -> Option<State<T>> {
    let idx = steps.partition_point(|s| s.t1 < t);
    steps.get(idx).filter(|s| s.contains(t)).map(|s| s.eval(t))
}

/// Integrates the ground-state profile for an amplitude from [`find_alpha0`].
///
/// The forward shot is kept while the trajectories at `α₀·(1 ± bisect_tol/2)`
/// agree; past that matching radius the profile is continued by integrating
/// inwards from `r_max`, starting on the decaying solution of the linearized
/// equation and scaled so that `u` is continuous at the matching radius.
/// The inward direction is the stable one for the decaying branch.
pub fn integrate_profile<T: Scalar>(
    alpha0: T,
    dims: &Dimensions,
    config: &ShootingConfig<T>,
) -> Result<RadialProfile<T>> {
    config.validate()?;
    if !(alpha0 > T::one()) {
        return Err(Error::Domain(format!("ground-state amplitude must exceed 1, got {alpha0}")));
    }
    let half = alpha0 * config.bisect_tol / T::lit(2.0);
    let lo_steps = trajectory(alpha0 - half, dims, config)?;
    let hi_steps = trajectory(alpha0 + half, dims, config)?;

    let mut radii = vec![config.t0];
    let start = series_start(alpha0, dims, config.t0);
    let mut values = vec![start[0]];
    let mut slopes = vec![start[1]];
    let mut left_branch = None;
    let mut matched = false;
    let u_floor = config.match_floor * alpha0;
    shoot(alpha0, dims, config, config.r_max, |step| {
        if let Some(ev) = event_of(step) {
            left_branch = Some(ev);
            return Flow::Stop;
        }
        radii.push(step.t1);
        values.push(step.y1[0]);
        slopes.push(step.y1[1]);
        let diverged = match (
            eval_trajectory(&lo_steps, step.t1),
            eval_trajectory(&hi_steps, step.t1),
        ) {
            (Some(a), Some(b)) => (a[0] - b[0]).abs() > config.match_divergence * step.y1[0],
            _ => true,
        };
        if diverged || step.y1[0] < u_floor {
            matched = true;
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    if !matched {
        let at = left_branch.map(|e| e.event_radius.as_f64()).unwrap_or(config.r_max.as_f64());
        return Err(Error::Profile(format!(
            "trajectory left the ground-state branch at r = {at:.4} before the matching radius; \
             tighten bisect_tol (currently {})",
            config.bisect_tol
        )));
    }
    let r_match = *radii.last().expect("at least the start node");
    let u_match = *values.last().expect("at least the start node");
    if u_match > alpha0 / T::lit(2.0) {
        return Err(Error::Profile(format!(
            "bracket too loose: trajectories diverge already at r = {r_match}; tighten bisect_tol (currently {})",
            config.bisect_tol
        )));
    }

    let inward = continue_inward(dims, config, r_match, u_match)?;
    let floor = config.profile_floor * alpha0;
    for (r, y) in inward {
        if r <= r_match {
            continue;
        }
        radii.push(r);
        values.push(y[0]);
        slopes.push(y[1]);
        if y[0] < floor {
            break;
        }
    }

    RadialProfile::from_samples(*dims, radii, values, slopes, alpha0, r_match)
}

/// Inward integration from `r_max` along the decaying branch, with the
/// amplitude chosen so that `u(r_match) = u_match`. Returns nodes in
/// increasing radius.
fn continue_inward<T: Scalar>(
    dims: &Dimensions,
    config: &ShootingConfig<T>,
    r_match: T,
    u_match: T,
) -> Result<Vec<(T, State<T>)>> {
    let r_far = config.r_max;
    let (phi, psi) = decay_shape::<T>(dims.n(), r_far);
    let (phi_m, _) = decay_shape::<T>(dims.n(), r_match);
    let q = dims.nonlinearity_power::<T>();
    let n = dims.n();
    let solver = Dopri5 {
        rtol: config.ode_rel_tol,
        atol: T::min_positive_value(),
        h_max: config.h_max,
        max_steps: config.max_steps,
    };
    let run = |amp: T, record: bool| -> Result<(T, Vec<(T, State<T>)>)> {
        let mut nodes = Vec::new();
        let y_far = [amp * phi, -amp * psi];
        if record {
            nodes.push((r_far, y_far));
        }
        let end = solver.integrate(
            |t, y| Ok(rhs_unchecked(t, y, q, n)),
            r_far,
            y_far,
            r_match,
            |step| {
                if record {
                    nodes.push((step.t1, step.y1));
                }
                Flow::Continue
            },
        )?;
        Ok((end.y[0], nodes))
    };
    let mismatch = |x: T| -> Result<T> {
        let (u, _) = run(amp_of(x, u_match, phi_m), false)?;
        Ok(u - u_match)
    };

    // bracket ln(amplitude) around the linear estimate
    let mut a = T::zero();
    let mut fa = mismatch(a)?;
    let mut step = if fa > T::zero() { -T::lit(0.05) } else { T::lit(0.05) };
    let mut b = a + step;
    let mut fb = mismatch(b)?;
    let mut guard = 0;
    while fa.signum() == fb.signum() && fb != T::zero() {
        guard += 1;
        if guard > 60 {
            return Err(Error::Profile(
                "could not bracket the decaying-branch amplitude".into(),
            ));
        }
        a = b;
        fa = fb;
        step = step * T::lit(2.0);
        b = a + step;
        fb = mismatch(b)?;
    }
    // Illinois false position
    let tol = T::epsilon() * T::lit(8.0) * u_match;
    let mut side = 0i8;
    let mut x = b;
    for _ in 0..200 {
        if fb.abs() <= tol || (b - a).abs() <= T::epsilon() * T::lit(4.0) {
            x = b;
            break;
        }
        x = (a * fb - b * fa) / (fb - fa);
        let fx = mismatch(x)?;
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == 1 {
                fa = fa / T::lit(2.0);
            }
            side = 1;
        } else {
            a = b;
            fa = fb;
            b = x;
            fb = fx;
            side = -1;
        }
        x = b;
    }
    let (_, mut nodes) = run(amp_of(x, u_match, phi_m), true)?;
    nodes.reverse();
    Ok(nodes)
}

#[inline]
fn amp_of<T: Scalar>(log_scale: T, u_match: T, phi_match: T) -> T {
    u_match / phi_match * log_scale.exp()
}

/// Convenience: bisection followed by profile integration.
pub fn solve_ground_state<T: Scalar>(
    dims: &Dimensions,
    config: &ShootingConfig<T>,
) -> Result<RadialProfile<T>> {
    let search = find_alpha0(dims, config)?;
    integrate_profile(search.alpha0, dims, config)
}
