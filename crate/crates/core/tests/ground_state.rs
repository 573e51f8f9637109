use approx::assert_relative_eq;
use peakforge::profile::export::read_profile_csv;
use peakforge::*;

fn profile(n: usize, m: usize) -> Profile {
    solve_ground_state(&Dimensions::new(n, m).unwrap(), &Config::default()).unwrap()
}

// Frozen from an independent DOP853 shooting bisection (rtol 1e-13).
const ALPHA0_ORACLE: [(usize, usize, f64); 4] = [
    (2, 2, 2.2062008646507225),
    (2, 3, 4.191723335108163),
    (3, 4, 8.134195039018543),
    (6, 3, 4.25781152615018),
];

#[test]
fn alpha0_matches_independent_shooting() {
    for (m, n, want) in ALPHA0_ORACLE {
        let s = find_alpha0(&Dimensions::new(n, m).unwrap(), &Config::default()).unwrap();
        assert_relative_eq!(s.alpha0, want, max_relative = 1e-9);
        assert!(s.bracket_width <= 1e-12);
        assert_eq!(classify_shot(s.lo, &Dimensions::new(n, m).unwrap(), &Config::default()).unwrap().kind, ShotKind::TurnedUp);
        assert_eq!(classify_shot(s.hi, &Dimensions::new(n, m).unwrap(), &Config::default()).unwrap().kind, ShotKind::Crossed);
    }
}

/// A classical fixed-step RK4 shooting, sharing nothing with the library solver.
fn rk4_alpha0(n: usize, m: usize) -> f64 {
    let big_n = (n + m) as f64;
    let q = (big_n + 2.0) / (big_n - 2.0);
    let nf = n as f64;
    let shoot = |a: f64| -> i32 {
        let f = |t: f64, y: [f64; 2]| [y[1], -(nf - 1.0) / t * y[1] + y[0] - y[0].max(0.0).powf(q)];
        let h = 1e-3;
        let mut t = 1e-4;
        let c = (a - a.powf(q)) / nf;
        let mut y = [a + c * t * t / 2.0, c * t];
        while t < 40.0 {
            let k1 = f(t, y);
            let k2 = f(t + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = f(t + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
            if y[0] < 0.0 {
                return 1;
            }
            if y[1] > 0.0 {
                return -1;
            }
        }
        0
    };
    let (mut lo, mut hi) = (1.0001, 10.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn alpha0_matches_rk4_oracle() {
    for (m, n) in [(2, 2), (2, 3)] {
        let s = find_alpha0(&Dimensions::new(n, m).unwrap(), &Config::default()).unwrap();
        assert_relative_eq!(s.alpha0, rk4_alpha0(n, m), max_relative = 1e-7);
    }
}

#[test]
fn one_dimensional_soliton_closed_form() {
    // n = 1, p = 4: u = √2 sech x
    let p = profile(1, 3);
    assert_relative_eq!(p.alpha0(), 2f64.sqrt(), max_relative = 1e-10);
    for r in [0.0, 0.3, 1.0, 2.5, 5.0, 9.0, 14.0, 20.0, 35.0] {
        let want = 2f64.sqrt() / f64::cosh(r);
        let dwant = -want * r.tanh();
        assert_relative_eq!(p.eval_u(r), want, max_relative = 1e-7);
        if r > 0.0 {
            assert_relative_eq!(p.eval_du(r), dwant, max_relative = 1e-7);
        }
    }
    assert_relative_eq!(p.tail_c(), 2.0 * 2f64.sqrt(), max_relative = 1e-6);
    let c = compute_all(&p).unwrap();
    // (p-2)/(2p)·∫ u⁴ = ¼·4·∫ sech⁴ = 4/3
    assert_relative_eq!(c.m_e, 4.0 / 3.0, max_relative = 1e-9);
    assert_relative_eq!(c.alpha_energy, 4.0 / 3.0, max_relative = 1e-9);
    // ∫ u³ eˣ dx = 2√2 ∫ sech² = 4√2
    assert_relative_eq!(c.gamma, 4.0 * 2f64.sqrt(), max_relative = 1e-8);
}

#[test]
fn general_soliton_power() {
    // n = 1, m = 4: p = 10/3, u = ((p/2) sech²((p−2)x/2))^{1/(p−2)}
    let p = profile(1, 4);
    let pp = 10.0 / 3.0;
    let u = |x: f64| ((pp / 2.0) / f64::cosh((pp - 2.0) * x / 2.0).powi(2)).powf(1.0 / (pp - 2.0));
    assert_relative_eq!(p.alpha0(), (pp / 2.0f64).powf(1.0 / (pp - 2.0)), max_relative = 1e-10);
    for r in [0.5, 2.0, 6.0, 15.0] {
        assert_relative_eq!(p.eval_u(r), u(r), max_relative = 1e-7);
    }
}

#[test]
fn profile_is_positive_and_decreasing() {
    for (m, n) in [(2, 2), (3, 4), (2, 7)] {
        let p = profile(n, m);
        assert!(p.values().iter().all(|&u| u > 0.0));
        assert!(p.derivatives().iter().all(|&d| d < 0.0));
        assert!(p.values().windows(2).all(|w| w[1] < w[0]));
        assert!(*p.values().last().unwrap() < 1e-12 * p.alpha0());
        assert!(p.matching_radius() < p.grid_end());
    }
}

#[test]
fn nehari_and_pohozaev_identities() {
    for (m, n) in [(2, 2), (3, 3), (2, 6), (5, 4)] {
        let (neh, poh, am) = verify::identity_residuals(&profile(n, m)).unwrap();
        assert!(neh < 1e-6 && poh < 1e-6 && am < 1e-6, "({m},{n}): {neh} {poh} {am}");
    }
}

#[test]
fn derivative_consistent_with_values() {
    let p = profile(3, 3);
    let h = 1e-5;
    let mut r = 0.05;
    while r < 40.0 {
        let fd = (p.eval_u(r + h) - p.eval_u(r - h)) / (2.0 * h);
        let d = p.eval_du(r);
        assert!((fd - d).abs() <= 1e-5 * d.abs().max(1e-300) + 1e-12 * p.alpha0(), "r={r}: {fd} vs {d}");
        r *= 1.13;
    }
}

#[test]
fn quadrature_converges_under_refinement() {
    let p = profile(2, 4);
    let n = 4.0;
    for (a, b, w) in [(2.0, 0.0, n - 1.0), (0.0, 2.0, n + 1.0), (10.0 / 3.0, 0.0, n - 1.0), (1.0, 1.0, 0.0)] {
        let f = RadialIntegrand::new(a, b, w).unwrap();
        let one = p.radial_integral_with(&f, 1).unwrap().value;
        let two = p.radial_integral_with(&f, 2).unwrap().value;
        assert_relative_eq!(one, two, max_relative = 1e-8);
    }
}

#[test]
fn ode_residual_small_on_grid() {
    let p = profile(2, 3);
    let res = p.max_residual(0.1, 20.0);
    assert!(res < 1e-5 * p.alpha0(), "residual {res}");
}

#[test]
fn tail_fit_is_asymptotic() {
    for (m, n) in [(2, 2), (2, 7), (6, 3)] {
        let p = profile(n, m);
        let window = p.default_tail_window().unwrap();
        assert!(window.0 >= 10.0);
        let fit = p.measure_tail(window).unwrap();
        assert!(fit.max_relative_deviation < 0.02);
        assert_relative_eq!(fit.derivative_tail_c, fit.tail_c, max_relative = 1e-2);
        assert_eq!(fit.tail_c, p.tail_c());
        // the tail model continues the grid
        let end = p.grid_end();
        assert_relative_eq!(p.eval_u(end * (1.0 + 1e-12)), p.eval_u(end), max_relative = 1e-3);
    }
}

#[test]
fn window_too_early_is_rejected() {
    let p = profile(2, 2);
    match p.measure_tail((0.5, 20.0)) {
        Err(Error::TailNotAsymptotic { deviation, .. }) => assert!(deviation > 0.05),
        other => panic!("expected TailNotAsymptotic, got {other:?}"),
    }
}

#[test]
fn short_shooting_interval_fails_cleanly() {
    let cfg = Config { r_max: 8.0, ..Default::default() };
    assert!(solve_ground_state(&Dimensions::new(2, 2).unwrap(), &cfg).is_err());
}

#[test]
fn loose_bracket_is_reported() {
    let cfg = Config { bisect_tol: 1e-2, ..Default::default() };
    let err = solve_ground_state(&Dimensions::new(2, 2).unwrap(), &cfg).unwrap_err();
    assert!(err.to_string().contains("bisect_tol"), "{err}");
}

#[test]
fn csv_round_trip() {
    let p = profile(2, 2);
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let table = read_profile_csv(&buf[..]).unwrap();
    assert_eq!(table.header, p.header());
    assert_eq!(table.r.len(), p.grid().len() + 1);
    assert_eq!(table.r[0], 0.0);
    assert_eq!(&table.u[1..], p.values());
    assert_eq!(&table.du[1..], p.derivatives());
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().nth(1) == Some("r,u,du"));
    assert!(!text.contains('\r'));
}

#[test]
fn single_precision_shooting() {
    let cfg = ShootingConfig::<f32> {
        bisect_tol: 1e-5,
        ode_rel_tol: 1e-6,
        ode_abs_tol: 1e-7,
        t0: 1e-3,
        ..Default::default()
    };
    let s = find_alpha0(&Dimensions::new(2, 2).unwrap(), &cfg).unwrap();
    assert!((s.alpha0 - 2.2062009f32).abs() < 1e-4, "{}", s.alpha0);
}
