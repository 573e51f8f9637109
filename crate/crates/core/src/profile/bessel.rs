use crate::scalar::Scalar;

/// `eˣ·K_ν(x)` for `x > 0`, from `∫₀^∞ exp(-x(cosh t - 1))·cosh(νt) dt`.
///
/// The integrand is entire and decays doubly exponentially, so the
/// trapezoidal rule converges geometrically in the step.
/// Large arguments use the asymptotic series instead.
pub fn scaled_bessel_k<T: Scalar>(nu: T, x: T) -> T {
    assert!(x > T::zero(), "scaled_bessel_k needs x > 0");
    if x >= T::lit(ASYMPTOTIC_FROM) {
        return asymptotic(nu, x);
    }
    let step = T::lit(0.125).min(T::lit(0.5) / x.sqrt());
    let mut sum = T::lit(0.5);
    let mut k = 1usize;
    loop {
        let t = step * T::from_usize_lossy(k);
        let term = (-x * (t.cosh() - T::one())).exp() * (nu * t).cosh();
        sum += term;
        if term < T::epsilon() * T::lit(1e-3) * sum || k > 100_000 {
            break;
        }
        k += 1;
    }
    sum * step
}

const ASYMPTOTIC_FROM: f64 = 25.0;

fn asymptotic<T: Scalar>(nu: T, x: T) -> T {
    let mu = T::lit(4.0) * nu * nu;
    let mut term = T::one();
    let mut sum = T::one();
    for k in 0..60 {
        let odd = T::from_usize_lossy(2 * k + 1);
        let next = term * (mu - odd * odd) / (T::from_usize_lossy(k + 1) * T::lit(8.0) * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= T::epsilon() * T::lit(0.01) * sum.abs() {
            break;
        }
    }
    (T::PI() / (T::lit(2.0) * x)).sqrt() * sum
}

/// Decaying radial solution of `-Δv + v = 0` in ℝⁿ and the magnitude of its
/// derivative, normalized so that both behave like `r^{-(n-1)/2} e^{-r}`:
/// `φ(r) = √(2/π) r^{-ν} K_ν(r)`, `|φ'(r)| = √(2/π) r^{-ν} K_{ν+1}(r)`, `ν = (n-2)/2`.
///
/// For odd `n ≤ 3` these reduce exactly to `r^{-(n-1)/2} e^{-r}`.
pub fn decay_shape<T: Scalar>(n: usize, r: T) -> (T, T) {
    let nu = (T::from_usize_lossy(n) - T::lit(2.0)) / T::lit(2.0);
    let norm = (T::lit(2.0) / T::PI()).sqrt() * r.powf(-nu) * (-r).exp();
    (
        norm * scaled_bessel_k(nu, r),
        norm * scaled_bessel_k(nu + T::one(), r),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_values() {
        // reference values of e^x K_nu(x)
        let cases = [
            (0.0, 1.0, 1.1444630798068949),
            (1.0, 1.0, 1.636153486263258),
            (0.0, 10.0, 0.39163193443659866),
            (1.0, 10.0, 0.4107665705957888),
            (2.0, 15.0, 0.3652070061679934),
            (2.5, 20.0, 0.3243888666490301),
            (0.0, 0.05, 3.2739042225345423),
            (1.5, 3.0, 0.9648016727443569),
            (0.0, 30.0, 0.22788666561625373),
            (1.0, 30.0, 0.2316541293777118),
            (3.5, 40.0, 0.22979557452486726),
            (2.0, 25.5, 0.2667513563953648),
        ];
        for (nu, x, want) in cases {
            let got: f64 = scaled_bessel_k(nu, x);
            assert!((got - want).abs() < 1e-13 * want, "nu={nu} x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn half_integer_order_is_elementary() {
        for x in [0.3, 2.0, 17.0, 60.0] {
            let exact = (std::f64::consts::PI / (2.0 * x)).sqrt();
            assert!((scaled_bessel_k(0.5, x) - exact).abs() < 1e-13 * exact);
        }
    }

    #[test]
    fn shapes_reduce_to_leading_asymptote_for_n_one_and_three() {
        for r in [1.0, 5.0, 20.0] {
            let (phi, psi) = decay_shape::<f64>(3, r);
            let lead = (-r).exp() / r;
            assert!((phi - lead).abs() < 1e-13 * lead);
            assert!((psi - lead * (1.0 + 1.0 / r)).abs() < 1e-13 * lead);
            let (phi1, psi1) = decay_shape::<f64>(1, r);
            assert!((phi1 - (-r).exp()).abs() < 1e-13 * phi1);
            assert!((psi1 - (-r).exp()).abs() < 1e-13 * psi1);
        }
    }

    #[test]
    fn shape_solves_linear_equation() {
        // φ'' + (n-1)/r φ' - φ = 0 by central differences
        for n in [2usize, 4, 7] {
            let r = 6.0;
            let h = 1e-3;
            let phi = |x: f64| decay_shape::<f64>(n, x).0;
            let d2 = (phi(r + h) - 2.0 * phi(r) + phi(r - h)) / (h * h);
            let d1 = (phi(r + h) - phi(r - h)) / (2.0 * h);
            let res = d2 + (n as f64 - 1.0) / r * d1 - phi(r);
            assert!(res.abs() < 1e-6 * phi(r), "n={n}: residual {res}");
            // ψ is -φ'
            assert!((d1 + decay_shape::<f64>(n, r).1).abs() < 1e-6 * phi(r));
        }
    }
}
