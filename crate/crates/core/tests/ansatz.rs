use approx::assert_relative_eq;
use peakforge::*;

fn constants(n: usize, m: usize) -> (Profile, Constants) {
    constants_for(&Dimensions::new(n, m).unwrap(), &Config::default()).unwrap()
}

fn quintic(r: f64) -> CutoffSpec<f64> {
    CutoffSpec::new(r, CutoffRamp::Quintic).unwrap()
}

#[test]
fn cutoff_shape() {
    for ramp in [CutoffRamp::Quintic, CutoffRamp::Septic] {
        let spec = CutoffSpec::new(1.0, ramp).unwrap();
        assert_eq!(cutoff_chi(0.0, &spec), (1.0, 0.0));
        assert_eq!(cutoff_chi(0.5, &spec), (1.0, 0.0));
        assert_eq!(cutoff_chi(1.0, &spec).0, 0.0);
        assert_eq!(cutoff_chi(2.0, &spec), (0.0, 0.0));
        let mut last = 1.0;
        for i in 0..=100 {
            let t = 0.5 + 0.005 * i as f64;
            let (chi, dchi) = cutoff_chi(t, &spec);
            assert!(chi <= last && dchi <= 0.0);
            let h = 1e-6;
            let fd = (cutoff_chi(t + h, &spec).0 - cutoff_chi(t - h, &spec).0) / (2.0 * h);
            assert!((fd - dchi).abs() < 1e-6, "{ramp:?} t={t}");
            last = chi;
        }
    }
    assert!(CutoffSpec::new(0.0, CutoffRamp::Quintic).is_err());
}

#[test]
fn small_eps_energy_is_close_to_alpha() {
    let (profile, c) = constants(2, 2);
    let j = single_peak_energy_sphere(&profile, 0.02, 1.0, &quintic(0.5), &EnergyQuadrature::default()).unwrap();
    assert!((j - c.alpha_energy).abs() / c.alpha_energy < 1e-2);
}

#[test]
fn flat_energy_matches_alpha_at_every_scale() {
    let (profile, c) = constants(3, 4);
    for eps in [0.2, 0.03, 0.004] {
        let j = flat_energy(&profile, eps, &EnergyQuadrature::default()).unwrap();
        assert_relative_eq!(j, c.alpha_energy, max_relative = 1e-10);
    }
}

#[test]
fn slope_matches_curvature_correction() {
    let (profile, c) = constants(2, 2);
    let ladder = [0.05, 0.02, 0.01];
    let rep = expansion_slope_check(&profile, c.alpha_energy, c.beta, 1.0, &ladder, &quintic(0.5), &EnergyQuadrature::default()).unwrap();
    assert_relative_eq!(rep.target_slope, c.beta, max_relative = 1e-14);
    assert!(rep.relative_gap < 5e-2, "{rep:?}");

    // doubling the radius quarters the target
    let rep2 = expansion_slope_check(&profile, c.alpha_energy, c.beta, 2.0, &ladder, &quintic(1.0), &EnergyQuadrature::default()).unwrap();
    assert_relative_eq!(rep2.target_slope, rep.target_slope / 4.0, max_relative = 1e-14);
    assert!(rep2.relative_gap < 5e-2, "{rep2:?}");
}

#[test]
fn slope_on_a_four_sphere() {
    let (profile, c) = constants(4, 3);
    let rep = expansion_slope_check(&profile, c.alpha_energy, c.beta, 1.0, &[0.05, 0.02, 0.01], &quintic(0.5), &EnergyQuadrature::default()).unwrap();
    assert_relative_eq!(rep.target_slope, 6.0 * c.beta, max_relative = 1e-14);
    assert!(rep.relative_gap < 5e-2, "{rep:?}");
}

#[test]
fn energy_does_not_depend_on_the_cutoff() {
    let (profile, _) = constants(2, 2);
    let q = EnergyQuadrature::default();
    let a = single_peak_energy_sphere(&profile, 0.02, 1.0, &quintic(0.5), &q).unwrap();
    let b = single_peak_energy_sphere(&profile, 0.02, 1.0, &CutoffSpec::new(1.2, CutoffRamp::Septic).unwrap(), &q).unwrap();
    assert!((a - b).abs() / a < 1e-9, "{a} {b}");
    let refined = single_peak_energy_sphere(&profile, 0.02, 1.0, &quintic(0.5), &q.refined()).unwrap();
    assert!((a - refined).abs() / a < 1e-10);
}

#[test]
fn invalid_inputs_are_rejected() {
    let (profile, c) = constants(2, 2);
    let q = EnergyQuadrature::default();
    let spec = quintic(0.5);
    assert!(single_peak_energy_sphere(&profile, 0.02, 1.0, &quintic(1.6), &q).is_err());
    assert!(single_peak_energy_sphere(&profile, 0.0, 1.0, &spec, &q).is_err());
    assert!(single_peak_energy_sphere(&profile, 0.02, -1.0, &spec, &q).is_err());
    assert!(flat_energy(&profile, -0.1, &q).is_err());
    for ladder in [&[0.05, 0.02][..], &[0.01, 0.02, 0.05][..], &[0.05, 0.0, -0.01][..]] {
        assert!(expansion_slope_check(&profile, c.alpha_energy, c.beta, 1.0, ladder, &spec, &q).is_err());
    }
}
