//! The computed ground state as an evaluable radial function, with a
//! calibrated exponential tail and the radial integrals built on it.

mod bessel;
pub mod export;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::{origin_curvature, ode_rhs, Dimensions};
use crate::quadrature::GaussLegendre;
use crate::scalar::Scalar;

pub use bessel::{decay_shape, scaled_bessel_k};

/// Tail fits with a larger relative spread are rejected.
pub const TAIL_DEVIATION_LIMIT: f64 = 0.05;
/// Fraction of `α₀` below which stored samples are not used for fitting.
pub const TAIL_FLOOR: f64 = 1e-12;
/// Truncation policy for [`RadialProfile::radial_integral`].
pub const TAIL_FRACTION_LIMIT: f64 = 1e-10;
const GL_ORDER: usize = 8;

/// Radial ground state sampled on an increasing grid.
///
/// Between nodes the profile is the quintic Hermite interpolant of
/// `(u, u', u'')`, with `u''` taken from the radial equation; beyond the last
/// node it is `c·φ(r)` where `φ` is the decaying solution of the linearized
/// equation normalized to `r^{-(n-1)/2} e^{-r}` and `c` is the fitted tail
/// constant.
#[derive(Debug, Clone)]
pub struct RadialProfile<T> {
    dims: Dimensions,
    // index 0 is the origin
    r: Vec<T>,
    u: Vec<T>,
    du: Vec<T>,
    ddu: Vec<T>,
    alpha0: T,
    tail_c: T,
    tail_r_star: T,
    matching_radius: T,
}

/// Integrand `u^a · |u'|^b · r^w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegrand<T> {
    pub value_power: T,
    pub derivative_power: T,
    pub radius_power: T,
}

impl<T: Scalar> RadialIntegrand<T> {
    pub fn new(value_power: T, derivative_power: T, radius_power: T) -> Result<Self> {
        if value_power < T::zero() || derivative_power < T::zero() || radius_power < T::zero() {
            return Err(Error::Domain("integrand exponents must be non-negative".into()));
        }
        if !(value_power + derivative_power > T::zero()) {
            return Err(Error::Domain(
                "integrand needs a positive power of u or u' to converge".into(),
            ));
        }
        Ok(Self {
            value_power,
            derivative_power,
            radius_power,
        })
    }

    fn eval(&self, r: T, u: T, du: T) -> T {
        let mut v = r.powf(self.radius_power);
        if self.value_power != T::zero() {
            v *= u.powf(self.value_power);
        }
        if self.derivative_power != T::zero() {
            v *= du.abs().powf(self.derivative_power);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegral<T> {
    pub value: T,
    /// Part contributed beyond the stored grid.
    pub tail: T,
    pub tail_fraction: T,
}

/// Outcome of a tail calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit<T> {
    pub tail_c: T,
    pub max_relative_deviation: T,
    /// Same constant estimated from `|u'|`.
    pub derivative_tail_c: T,
    pub derivative_deviation: T,
    pub window: (T, T),
    pub samples: usize,
}

/// Mean and maximal relative spread of `values[i] / shape[i]`.
pub fn fit_decay_constant<T: Scalar>(values: &[T], shape: &[T]) -> (T, T) {
    let ratios: Vec<T> = values.iter().zip(shape).map(|(&v, &s)| v / s).collect();
    let mean = ratios.iter().copied().sum::<T>() / T::from_usize_lossy(ratios.len().max(1));
    let dev = ratios
        .iter()
        .map(|&x| ((x - mean) / mean).abs())
        .fold(T::zero(), T::max);
    (mean, dev)
}

impl<T: Scalar> RadialProfile<T> {
    /// Builds a profile from samples on `(0, R]`, computing `u''` from the
    /// radial equation and calibrating the tail on the default window.
    pub fn from_samples(
        dims: Dimensions,
        radii: Vec<T>,
        values: Vec<T>,
        slopes: Vec<T>,
        alpha0: T,
        matching_radius: T,
    ) -> Result<Self> {
        if radii.len() != values.len() || radii.len() != slopes.len() {
            return Err(Error::Profile("sample arrays differ in length".into()));
        }
        if radii.len() < 4 {
            return Err(Error::Profile("need at least four samples".into()));
        }
        if !(radii[0] > T::zero()) {
            return Err(Error::Profile("first sample must lie at r > 0".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Profile("radii must be strictly increasing".into()));
        }
        if let Some(i) = (0..radii.len()).find(|&i| {
            !(values[i] > T::zero()) || !(slopes[i] < T::zero()) || !values[i].is_finite()
        }) {
            return Err(Error::Profile(format!(
                "profile must be positive and strictly decreasing; violated at r = {}",
                radii[i]
            )));
        }
        let mut r = Vec::with_capacity(radii.len() + 1);
        let mut u = Vec::with_capacity(radii.len() + 1);
        let mut du = Vec::with_capacity(radii.len() + 1);
        let mut ddu = Vec::with_capacity(radii.len() + 1);
        r.push(T::zero());
        u.push(alpha0);
        du.push(T::zero());
        ddu.push(origin_curvature(alpha0, &dims));
        for i in 0..radii.len() {
            let f = ode_rhs(radii[i], [values[i], slopes[i]], &dims)?;
            r.push(radii[i]);
            u.push(values[i]);
            du.push(slopes[i]);
            ddu.push(f[1]);
        }
        let mut profile = Self {
            dims,
            r,
            u,
            du,
            ddu,
            alpha0,
            tail_c: T::zero(),
            tail_r_star: T::zero(),
            matching_radius,
        };
        let window = profile.default_tail_window()?;
        profile.fit_tail(window)?;
        Ok(profile)
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn alpha0(&self) -> T {
        self.alpha0
    }

    pub fn tail_c(&self) -> T {
        self.tail_c
    }

    pub fn tail_r_star(&self) -> T {
        self.tail_r_star
    }

    /// Radius where the forward shot hands over to the inward continuation.
    pub fn matching_radius(&self) -> T {
        self.matching_radius
    }

    /// Stored radii (the origin is implicit).
    pub fn grid(&self) -> &[T] {
        &self.r[1..]
    }

    pub fn values(&self) -> &[T] {
        &self.u[1..]
    }

    pub fn derivatives(&self) -> &[T] {
        &self.du[1..]
    }

    pub fn grid_end(&self) -> T {
        *self.r.last().expect("non-empty grid")
    }

    /// `[max(10, r where u = 1e-6·α₀), last radius with u ≥ 1e-12·α₀]`.
    pub fn default_tail_window(&self) -> Result<(T, T)> {
        let level = T::lit(1e-6) * self.alpha0;
        let start_idx = self.u.iter().position(|&v| v <= level);
        let start = start_idx
            .map(|i| self.r[i])
            .unwrap_or(self.grid_end())
            .max(T::lit(10.0));
        let floor = T::lit(TAIL_FLOOR) * self.alpha0;
        let end_idx = self.u.iter().rposition(|&v| v >= floor).unwrap_or(0);
        let end = self.r[end_idx];
        if !(end > start) {
            return Err(Error::Profile(format!(
                "profile ends at r = {} before the asymptotic regime; increase r_max",
                self.grid_end()
            )));
        }
        Ok((start, end))
    }

    /// Estimates the decay constant `c` of `u ~ c·r^{-(n-1)/2}e^{-r}` on a
    /// window of stored nodes, from `u` and independently from `|u'|`.
    pub fn measure_tail(&self, window: (T, T)) -> Result<TailFit<T>> {
        let (start, end) = window;
        if !(start > T::zero()) || !(end > start) || end > self.grid_end() {
            return Err(Error::Domain(format!(
                "tail window [{start}, {end}] must lie inside (0, {}]",
                self.grid_end()
            )));
        }
        let floor = T::lit(TAIL_FLOOR) * self.alpha0;
        let idx: Vec<usize> = (1..self.r.len())
            .filter(|&i| self.r[i] >= start && self.r[i] <= end)
            .collect();
        if idx.len() < 3 {
            return Err(Error::Domain(format!(
                "tail window [{start}, {end}] holds fewer than three samples"
            )));
        }
        if idx.iter().any(|&i| self.u[i] < floor) {
            return Err(Error::Domain(format!(
                "tail window [{start}, {end}] reaches below the sampling floor"
            )));
        }
        let (mut vals, mut dvals, mut phis, mut psis) = (vec![], vec![], vec![], vec![]);
        for &i in &idx {
            let (phi, psi) = decay_shape::<T>(self.dims.n(), self.r[i]);
            vals.push(self.u[i]);
            dvals.push(self.du[i].abs());
            phis.push(phi);
            psis.push(psi);
        }
        let (c, dev) = fit_decay_constant(&vals, &phis);
        let (dc, ddev) = fit_decay_constant(&dvals, &psis);
        if dev > T::lit(TAIL_DEVIATION_LIMIT) {
            return Err(Error::TailNotAsymptotic {
                start: start.as_f64(),
                end: end.as_f64(),
                deviation: dev.as_f64(),
                limit: TAIL_DEVIATION_LIMIT,
            });
        }
        Ok(TailFit {
            tail_c: c,
            max_relative_deviation: dev,
            derivative_tail_c: dc,
            derivative_deviation: ddev,
            window,
            samples: idx.len(),
        })
    }

    /// [`measure_tail`](Self::measure_tail) and adopt the result for evaluation
    /// beyond the grid.
    pub fn fit_tail(&mut self, window: (T, T)) -> Result<TailFit<T>> {
        let fit = self.measure_tail(window)?;
        self.tail_c = fit.tail_c;
        self.tail_r_star = window.0;
        Ok(fit)
    }

    fn interval(&self, r: T) -> usize {
        let k = self.r.partition_point(|&x| x <= r);
        k.saturating_sub(1).min(self.r.len() - 2)
    }

    /// Quintic Hermite value and derivative on interval `k`.
    #[inline]
    fn hermite(&self, k: usize, r: T) -> (T, T) {
        let h = self.r[k + 1] - self.r[k];
        let s = (r - self.r[k]) / h;
        let f0 = self.u[k];
        let d0 = self.du[k] * h;
        let s0 = self.ddu[k] * h * h;
        let delta = self.u[k + 1] - f0 - d0 - s0 / T::lit(2.0);
        let dd = self.du[k + 1] * h - d0 - s0;
        let ss = self.ddu[k + 1] * h * h - s0;
        let half = T::lit(0.5);
        let c3 = T::lit(10.0) * delta - T::lit(4.0) * dd + half * ss;
        let c4 = T::lit(-15.0) * delta + T::lit(7.0) * dd - ss;
        let c5 = T::lit(6.0) * delta - T::lit(3.0) * dd + half * ss;
        let c2 = s0 * half;
        let value = f0 + s * (d0 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
        let slope = d0
            + s * (T::lit(2.0) * c2
                + s * (T::lit(3.0) * c3 + s * (T::lit(4.0) * c4 + s * T::lit(5.0) * c5)));
        (value, slope / h)
    }

    /// `(u(r), u'(r))`; negative radii are mirrored.
    pub fn eval(&self, r: T) -> (T, T) {
        let r = r.abs();
        if r > self.grid_end() {
            let (phi, psi) = decay_shape::<T>(self.dims.n(), r);
            return (self.tail_c * phi, -self.tail_c * psi);
        }
        self.hermite(self.interval(r), r)
    }

    pub fn eval_u(&self, r: T) -> T {
        self.eval(r).0
    }

    pub fn eval_du(&self, r: T) -> T {
        self.eval(r).1
    }

    /// `∫₀^{grid end} f(r, u, u') dr` with `subdivisions` Gauss–Legendre panels
    /// per grid interval.
    pub(crate) fn integrate_grid<F: FnMut(T, T, T) -> T>(&self, subdivisions: usize, mut f: F) -> T {
        let rule = GaussLegendre::<T>::new(GL_ORDER);
        let pieces = subdivisions.max(1);
        let mut total = T::zero();
        for k in 0..self.r.len() - 1 {
            let (a, b) = (self.r[k], self.r[k + 1]);
            let width = (b - a) / T::from_usize_lossy(pieces);
            for j in 0..pieces {
                let lo = a + width * T::from_usize_lossy(j);
                let hi = if j + 1 == pieces { b } else { lo + width };
                for (x, w) in rule.mapped(lo, hi) {
                    let (u, du) = self.hermite(k, x);
                    total += w * f(x, u, du);
                }
            }
        }
        total
    }

    /// `∫_{grid end}^∞ f(r, u, u') dr` on the analytic tail, in unit panels
    /// until a panel falls below `rel_cutoff·|reference|`.
    pub(crate) fn integrate_tail<F: FnMut(T, T, T) -> T>(
        &self,
        reference: T,
        rel_cutoff: T,
        mut f: F,
    ) -> T {
        let rule = GaussLegendre::<T>::new(GL_ORDER);
        let mut total = T::zero();
        let mut a = self.grid_end();
        for _ in 0..2000 {
            let b = a + T::one();
            let panel: T = rule
                .mapped(a, b)
                .map(|(x, w)| {
                    let (u, du) = self.eval(x);
                    w * f(x, u, du)
                })
                .sum();
            total += panel;
            if panel.abs() <= rel_cutoff * reference.abs() || !panel.is_finite() {
                break;
            }
            a = b;
        }
        total
    }

    pub fn radial_integral(&self, integrand: &RadialIntegrand<T>) -> Result<RadialIntegral<T>> {
        self.radial_integral_with(integrand, 1)
    }

    /// `∫₀^∞ u^a |u'|^b r^w dr`. The part beyond the stored grid comes from the
    /// analytic tail and must stay below [`TAIL_FRACTION_LIMIT`] of the total.
    pub fn radial_integral_with(
        &self,
        integrand: &RadialIntegrand<T>,
        subdivisions: usize,
    ) -> Result<RadialIntegral<T>> {
        let body = self.integrate_grid(subdivisions, |r, u, du| integrand.eval(r, u, du));
        let tail = self.integrate_tail(body, T::epsilon() * T::lit(1e-3), |r, u, du| {
            integrand.eval(r, u, du)
        });
        let value = body + tail;
        let tail_fraction = if value == T::zero() {
            T::zero()
        } else {
            (tail / value).abs()
        };
        if !value.is_finite() {
            return Err(Error::Domain("radial integral diverged".into()));
        }
        if tail_fraction > T::lit(TAIL_FRACTION_LIMIT) {
            return Err(Error::Quadrature(format!(
                "tail beyond r = {} carries {:.3e} of the integral; extend the profile",
                self.grid_end(),
                tail_fraction.as_f64()
            )));
        }
        Ok(RadialIntegral {
            value,
            tail,
            tail_fraction,
        })
    }

    /// Largest `|u'' + (n-1)u'/r - u + u^{p-1}|` over stored nodes in
    /// `[r_from, r_to]`, with `u''` from a five-point finite difference of the
    /// stored `u'`.
    pub fn max_residual(&self, r_from: T, r_to: T) -> T {
        let q = self.dims.nonlinearity_power::<T>();
        let nm1 = T::from_usize_lossy(self.dims.n() - 1);
        let mut worst = T::zero();
        for i in 3..self.r.len().saturating_sub(2) {
            let r = self.r[i];
            if r < r_from || r > r_to {
                continue;
            }
            let xs = &self.r[i - 2..=i + 2];
            let w = fd_first_derivative_weights(r, xs);
            let ddu: T = w.iter().zip(&self.du[i - 2..=i + 2]).map(|(&a, &b)| a * b).sum();
            let res = ddu + nm1 * self.du[i] / r - self.u[i] + self.u[i].powf(q);
            worst = worst.max(res.abs());
        }
        worst
    }
}

/// Fornberg weights for the first derivative at `x0` from samples at `xs`.
fn fd_first_derivative_weights<T: Scalar>(x0: T, xs: &[T]) -> Vec<T> {
    let n = xs.len();
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![[T::zero(); 2]; n];
    let mut c1 = T::one();
    let mut c4 = xs[0] - x0;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::from_usize_lossy(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - T::from_usize_lossy(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize, c: f64, radii: &[f64]) -> RadialProfile<f64> {
        // exact tail shape everywhere, origin value irrelevant for tail tests
        let dims = Dimensions::new(n, 3).unwrap();
        let mut u = vec![];
        let mut du = vec![];
        for &r in radii {
            let (phi, psi) = decay_shape::<f64>(n, r);
            u.push(c * phi);
            du.push(-c * psi);
        }
        let mut p = RadialProfile {
            dims,
            r: std::iter::once(0.0).chain(radii.iter().copied()).collect(),
            u: std::iter::once(2.0).chain(u).collect(),
            du: std::iter::once(0.0).chain(du).collect(),
            ddu: vec![0.0; radii.len() + 1],
            alpha0: 2.0,
            tail_c: 0.0,
            tail_r_star: 0.0,
            matching_radius: 0.0,
        };
        for i in 1..p.r.len() {
            // u'' for the linear equation
            p.ddu[i] = p.u[i] - (n as f64 - 1.0) * p.du[i] / p.r[i];
        }
        p
    }

    #[test]
    fn exact_asymptote_gives_exact_constant() {
        let radii: Vec<f64> = (0..200).map(|i| 10.0 + 0.1 * i as f64).collect();
        for n in [1usize, 3] {
            // leading asymptote r^{-(n-1)/2} e^{-r} coincides with the shape
            let raw: Vec<f64> = radii
                .iter()
                .map(|&r| 3.0 * r.powf(-(n as f64 - 1.0) / 2.0) * (-r).exp())
                .collect();
            let shape: Vec<f64> = radii.iter().map(|&r| decay_shape::<f64>(n, r).0).collect();
            let (c, dev) = fit_decay_constant(&raw, &shape);
            assert!((c - 3.0).abs() < 1e-12);
            assert!(dev < 1e-12);
        }
        let mut p = synthetic(2, 3.0, &radii);
        let fit = p.fit_tail((10.0, 25.0)).unwrap();
        assert!((fit.tail_c - 3.0).abs() < 1e-12);
        assert!(fit.max_relative_deviation < 1e-12);
        assert!((fit.derivative_tail_c - 3.0).abs() < 1e-12);
        assert_eq!(p.tail_r_star(), 10.0);
    }

    #[test]
    fn window_outside_grid_is_rejected() {
        let radii: Vec<f64> = (0..50).map(|i| 10.0 + 0.2 * i as f64).collect();
        let p = synthetic(2, 3.0, &radii);
        assert!(p.measure_tail((15.0, 40.0)).is_err());
        assert!(p.measure_tail((15.0, 12.0)).is_err());
        assert!(p.measure_tail((10.01, 10.1)).is_err());
    }

    #[test]
    fn hermite_reproduces_quintic_polynomials() {
        let poly = |x: f64| 1.0 - 0.5 * x + 0.3 * x * x - 0.2 * x.powi(3) + 0.05 * x.powi(4) - 0.01 * x.powi(5);
        let d1 = |x: f64| -0.5 + 0.6 * x - 0.6 * x * x + 0.2 * x.powi(3) - 0.05 * x.powi(4);
        let d2 = |x: f64| 0.6 - 1.2 * x + 0.6 * x * x - 0.2 * x.powi(3);
        let r = vec![0.0, 0.7, 1.9, 3.0];
        let p = RadialProfile {
            dims: Dimensions::new(2, 2).unwrap(),
            u: r.iter().map(|&x| poly(x)).collect(),
            du: r.iter().map(|&x| d1(x)).collect(),
            ddu: r.iter().map(|&x| d2(x)).collect(),
            r,
            alpha0: 1.0,
            tail_c: 1.0,
            tail_r_star: 3.0,
            matching_radius: 0.0,
        };
        for i in 0..=60 {
            let x = 0.05 * i as f64;
            let (v, d) = p.eval(x);
            assert!((v - poly(x)).abs() < 1e-13, "value at {x}");
            assert!((d - d1(x)).abs() < 1e-12, "slope at {x}");
        }
    }

    #[test]
    fn fornberg_weights_exact_on_quartics() {
        let xs = [0.0, 0.3, 0.45, 0.9, 1.4];
        let w = fd_first_derivative_weights(0.45, &xs);
        let f = |x: f64| 2.0 + x - 3.0 * x * x + x.powi(4);
        let df = 1.0 - 6.0 * 0.45 + 4.0 * 0.45f64.powi(3);
        let got: f64 = w.iter().zip(xs).map(|(a, x)| a * f(x)).sum();
        assert!((got - df).abs() < 1e-12);
    }

    #[test]
    fn integrand_validation() {
        assert!(RadialIntegrand::new(0.0, 0.0, 1.0).is_err());
        assert!(RadialIntegrand::new(-1.0, 2.0, 1.0).is_err());
        assert!(RadialIntegrand::new(2.0, 0.0, -1.0).is_err());
        assert!(RadialIntegrand::new(2.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn exponential_integral_on_synthetic_profile() {
        // u(r) = e^{-r} in one dimension: ∫ u² dr = 1/2
        let radii: Vec<f64> = (1..=800).map(|i| 0.05 * i as f64).collect();
        let mut p = synthetic(1, 1.0, &radii);
        p.u[0] = 1.0;
        p.du[0] = -1.0;
        p.ddu[0] = 1.0;
        p.fit_tail((10.0, 25.0)).unwrap();
        let i = p
            .radial_integral(&RadialIntegrand::new(2.0, 0.0, 0.0).unwrap())
            .unwrap();
        assert!((i.value - 0.5).abs() < 1e-12, "{}", i.value);
        assert!(i.tail_fraction < 1e-10);
    }
}
