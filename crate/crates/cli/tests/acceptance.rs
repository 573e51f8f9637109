//! One PASS/FAIL line per acceptance criterion.

use std::process::Command;

use peakforge::constants::reference_dimensions;
use peakforge::verify::{
    concentration_trend, flat_invariance, identities_suite, slope_study, table1_suite, Check, FLAT_EPS_VALUES,
    FLAT_INVARIANCE_TOLERANCE, SLOPE_ROWS, SLOPE_STABILITY_TOLERANCE, SLOPE_TOLERANCE,
};
use peakforge::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn summarize(checks: &[&Check]) -> Outcome {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let worst = checks
        .iter()
        .filter(|c| c.tolerance > 0.0)
        .max_by(|a, b| (a.measured / a.tolerance).total_cmp(&(b.measured / b.tolerance)));
    let mut detail = format!("{} checks", checks.len());
    if let Some(w) = worst {
        detail += &format!(", worst {} = {:.3e} (tol {:.0e})", w.name, w.measured, w.tolerance);
    }
    if !failed.is_empty() {
        detail += &format!(", failed: {}", failed.join("; "));
    }
    Outcome {
        passed: failed.is_empty() && !checks.is_empty(),
        detail,
    }
}

fn select<'a>(checks: &'a [Check], prefixes: &[&str]) -> Vec<&'a Check> {
    checks.iter().filter(|c| prefixes.iter().any(|p| c.name.starts_with(p))).collect()
}

fn table1() -> Outcome {
    let report = table1_suite(&Config::default());
    summarize(&report.checks.iter().collect::<Vec<_>>())
}

fn slopes() -> Outcome {
    let mut checks = Vec::new();
    for (m, n) in SLOPE_ROWS {
        match slope_study(m, n, &Config::default()) {
            Ok(s) => {
                checks.push(Check::at_most(format!("slope gap m={m} n={n}"), s.report.relative_gap, SLOPE_TOLERANCE));
                checks.push(Check::at_most(format!("slope stability m={m} n={n}"), s.stability, SLOPE_STABILITY_TOLERANCE));
            }
            Err(e) => return Outcome { passed: false, detail: e.to_string() },
        }
    }
    summarize(&checks.iter().collect::<Vec<_>>())
}

fn trend() -> Outcome {
    match concentration_trend(2, 2, &Config::default(), &OptimizerConfig::default()) {
        Ok(rows) => {
            let passed = rows.len() == 3 && rows.iter().all(|r| r.monotone && r.admissible.iter().all(|&a| a));
            let detail = rows
                .iter()
                .map(|r| {
                    let d: Vec<String> = r.max_distance.iter().map(|x| format!("{x:.4}")).collect();
                    format!("k0={}: [{}]", r.k0, d.join(", "))
                })
                .collect::<Vec<_>>()
                .join("; ");
            Outcome { passed, detail }
        }
        Err(e) => Outcome { passed: false, detail: e.to_string() },
    }
}

fn flat() -> Outcome {
    let mut checks = Vec::new();
    for (m, n) in reference_dimensions() {
        let spread = Dimensions::new(n, m)
            .and_then(|d| solve_ground_state(&d, &Config::default()))
            .and_then(|p| flat_invariance(&p, &FLAT_EPS_VALUES));
        match spread {
            Ok(s) => checks.push(Check::at_most(format!("flat spread m={m} n={n}"), s, FLAT_INVARIANCE_TOLERANCE)),
            Err(e) => return Outcome { passed: false, detail: e.to_string() },
        }
    }
    summarize(&checks.iter().collect::<Vec<_>>())
}

fn body(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_peakforge"))
        .args(args)
        .env_remove("PEAKFORGE_ODE_RTOL")
        .env_remove("PEAKFORGE_ODE_ATOL")
        .env_remove("PEAKFORGE_BISECT_TOL")
        .env_remove("PEAKFORGE_RMAX")
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["verify", "--suite", "table1"],
        &["verify", "--suite", "identities"],
        &["verify", "--suite", "expansion"],
        &["beta-table"],
        &["beta-table", "--format", "json"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        if body(args) != body(args) {
            differing.push(args.join(" "));
        }
    }
    Outcome {
        passed: differing.is_empty(),
        detail: if differing.is_empty() {
            format!("{} commands byte-identical across two runs", runs.len())
        } else {
            format!("differing: {}", differing.join("; "))
        },
    }
}

fn main() {
    let identities = identities_suite(&Config::default()).checks;
    let outcomes = [
        ("table reproduction", table1()),
        ("ground-state identities", summarize(&select(&identities, &["nehari", "pohozaev", "alpha = mE"]))),
        ("decay law", summarize(&select(&identities, &["decay"]))),
        ("gamma isotropy", summarize(&select(&identities, &["gamma"]))),
        ("expansion slope", slopes()),
        ("concentration trend", trend()),
        ("flat-model eps-invariance", flat()),
        ("determinism", determinism()),
    ];
    for (k, (name, o)) in outcomes.iter().enumerate() {
        println!("{} criterion {}: {name}: {}", if o.passed { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    let failed: Vec<usize> = outcomes.iter().enumerate().filter(|(_, (_, o))| !o.passed).map(|(k, _)| k + 1).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
