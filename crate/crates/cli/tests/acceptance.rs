//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantity next to its threshold.
//!
//! Criteria 1-9 exercise the library directly; criterion 10 drives the
//! compiled `hkma` binary through the full command matrix twice and demands
//! byte-identical reports plus the documented exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use hkma_core::brackets::{jacobi_suite, remark2_suite};
use hkma_core::coords::FullPoint;
use hkma_core::forms::{calibrate_on_flat, hyperkahler_algebra_defect};
use hkma_core::jets::finite_difference_check;
use hkma_core::potentials::{
    calabi_h_reduced, calabi_omega_full, flat_h, flat_omega, flat_omega_prime, Potential,
};
use hkma_core::residuals::{
    lift_potential, reduced_residuals, reduction_consistency, report_full, report_reduced,
    violation_suite,
};
use hkma_core::sample::{default_calabi_grid, default_full_grid, default_reduced_grid};
use hkma_core::solver::{
    expansion_potential, sample_collocation, solve, BasisExpansion, CollocationBox, SolveConfig,
};

fn pass_line(criterion: &str, detail: String) {
    println!("criterion {criterion}: PASS ({detail})");
}

#[test]
fn criterion_01_flat_reduced_identity() {
    let start = Instant::now();
    let grid = default_reduced_grid(1000);
    let report = report_reduced(&flat_h(), &grid, 1e-12).unwrap();
    let elapsed = start.elapsed();
    assert!(
        report.pass,
        "flat reduced sup {} > 1e-12",
        report.sup_norm
    );
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    pass_line(
        "1 flat reduced identity",
        format!("sup {:.2e} <= 1e-12 in {elapsed:?}", report.sup_norm),
    );
}

#[test]
fn criterion_02_flat_full_identity_and_gauge_invariance() {
    let grid: Vec<[f64; 8]> = default_full_grid(1000).iter().map(|p| p.to_array()).collect();
    let om = flat_omega();
    let op = flat_omega_prime();
    let rep_om = report_full(&om, &grid, 1e-12).unwrap();
    let rep_op = report_full(&op, &grid, 1e-12).unwrap();
    assert!(rep_om.pass, "flat omega sup {}", rep_om.sup_norm);
    assert!(rep_op.pass, "flat omega-prime sup {}", rep_op.sup_norm);
    let mut worst: f64 = 0.0;
    for (a, b) in rep_om.per_point.iter().zip(&rep_op.per_point) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).norm());
        }
    }
    assert!(worst <= 1e-13, "gauge agreement {worst} > 1e-13");
    pass_line(
        "2 flat full identity",
        format!(
            "sup {:.2e}, {:.2e} <= 1e-12; entrywise gauge agreement {:.2e} <= 1e-13",
            rep_om.sup_norm, rep_op.sup_norm, worst
        ),
    );
}

#[test]
fn criterion_03_calabi_verification() {
    let start = Instant::now();
    let calabi_pts: Vec<[f64; 8]> = default_calabi_grid(50).iter().map(|p| p.to_array()).collect();
    let rep_full = report_full(&calabi_omega_full(), &calabi_pts, 1e-8).unwrap();
    assert!(
        rep_full.pass,
        "calabi full sup {} (scale {:?})",
        rep_full.sup_norm, rep_full.detected_scale
    );
    let rep_reduced = report_reduced(&calabi_h_reduced(), &default_reduced_grid(50), 1e-8).unwrap();
    assert!(rep_reduced.pass, "calabi reduced sup {}", rep_reduced.sup_norm);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    let scale_note = match rep_full.detected_scale {
        Some(s) => format!("detected scale {s}"),
        None => "right side exactly the identity".to_string(),
    };
    pass_line(
        "3 calabi verification",
        format!(
            "full sup {:.2e}, reduced sup {:.2e} <= 1e-8, {scale_note}, in {elapsed:?}",
            rep_full.sup_norm, rep_reduced.sup_norm
        ),
    );
}

#[test]
fn criterion_04_jacobi_suite() {
    let max_defect = jacobi_suite(100, 1).unwrap();
    assert!(max_defect <= 1e-10, "jacobi defect {max_defect}");
    pass_line("4 jacobi suite", format!("max defect {max_defect:.2e} <= 1e-10"));
}

#[test]
fn criterion_05_remark2_relation() {
    let max_defect = remark2_suite(100, 2).unwrap();
    assert!(max_defect <= 1e-10, "bracket relation defect {max_defect}");
    pass_line(
        "5 bracket relation",
        format!("max defect {max_defect:.2e} <= 1e-10 over 100 invariant pairs"),
    );
}

#[test]
fn criterion_06_lift_round_trip() {
    // lift(flat H) equals flat omega-prime pointwise
    let lifted = lift_potential(&flat_h());
    let op = flat_omega_prime();
    let grid = default_full_grid(200);
    let mut worst: f64 = 0.0;
    for p in &grid {
        let x = p.to_array();
        use hkma_core::jets::ScalarField;
        let a = lifted.eval_value(&x).unwrap();
        let b = op.eval_value(&x).unwrap();
        worst = worst.max((a - b).norm() / (1.0 + b.norm()));
    }
    assert!(worst <= 1e-12, "lift mismatch {worst}");

    // zero side: flat and calabi keep both residual systems at their tiers
    let check_points: Vec<FullPoint> = default_full_grid(30);
    for p in &check_points {
        let rep = reduction_consistency(&flat_h(), p).unwrap();
        assert!(rep.reduced_sup <= 1e-13 && rep.full_sup <= 1e-13);
        assert!(rep.bounds_ok);
    }
    for p in &check_points {
        let rep = reduction_consistency(&calabi_h_reduced(), p).unwrap();
        assert!(rep.reduced_sup <= 1e-8 && rep.full_sup <= 1e-8);
        assert!(rep.bounds_ok);
    }
    // nonzero side: every violation exceeds 1e-3 in both systems
    let mut violation_note = String::new();
    for pert in violation_suite() {
        let mut worst_red: f64 = 0.0;
        let mut worst_full: f64 = 0.0;
        for p in &check_points {
            let rep = reduction_consistency(&pert, p).unwrap();
            assert!(rep.bounds_ok, "kappa bound failed for {}", pert.name());
            worst_red = worst_red.max(rep.reduced_sup);
            worst_full = worst_full.max(rep.full_sup);
        }
        assert!(
            worst_red > 1e-3 && worst_full > 1e-3,
            "{}: reduced {worst_red}, full {worst_full}",
            pert.name()
        );
        violation_note = format!("last violation {}: {worst_red:.2e}/{worst_full:.2e}", pert.name());
    }
    pass_line(
        "6 lift round trip",
        format!("lift match {worst:.2e} <= 1e-12; zero-iff-zero on 7 members; {violation_note}"),
    );
}

#[test]
fn criterion_07_oracle_agreement() {
    let calib = calibrate_on_flat().unwrap();
    let full_grid = default_full_grid(30);
    let calabi_grid = default_calabi_grid(30);

    // (name, potential over a Darboux chart, its 8-slot grid, tier, expected pass)
    let mut suite: Vec<(String, Potential, Vec<[f64; 8]>, f64)> = vec![
        (
            "flat-omega".into(),
            flat_omega(),
            full_grid.iter().map(|p| p.to_array()).collect(),
            1e-10,
        ),
        (
            "flat-omega-prime".into(),
            flat_omega_prime(),
            full_grid.iter().map(|p| p.to_array()).collect(),
            1e-10,
        ),
        (
            "calabi-omega".into(),
            calabi_omega_full(),
            calabi_grid.iter().map(|p| p.to_array()).collect(),
            1e-8,
        ),
    ];
    for pert in violation_suite() {
        suite.push((
            format!("lift-{}", pert.name()),
            lift_potential(&pert),
            full_grid.iter().map(|p| p.to_array()).collect(),
            1e-3,
        ));
    }

    let mut lines = Vec::new();
    for (name, potential, pts, tier) in &suite {
        let ma = report_full(potential, pts, *tier).unwrap();
        let mut defect: f64 = 0.0;
        for x in pts {
            defect = defect.max(hyperkahler_algebra_defect(potential, x, &calib).unwrap());
        }
        let forms_pass = defect <= *tier;
        assert_eq!(
            ma.pass, forms_pass,
            "{name}: Monge-Ampere pass={} (sup {:.2e}) but forms pass={} (defect {:.2e}) at tier {tier:.0e}",
            ma.pass, ma.sup_norm, forms_pass, defect
        );
        lines.push(format!("{name}:{}", if ma.pass { "pass" } else { "fail" }));
    }
    pass_line(
        "7 oracle agreement",
        format!("both routes agree on {}", lines.join(", ")),
    );
}

#[test]
fn criterion_08_derivative_engine() {
    let mut worst: f64 = 0.0;
    for p in default_reduced_grid(15) {
        for field in [flat_h(), calabi_h_reduced()] {
            worst = worst.max(finite_difference_check(&field, &p.to_array(), 1e-5).unwrap());
        }
    }
    for p in default_full_grid(15) {
        for field in [flat_omega(), flat_omega_prime()] {
            worst = worst.max(finite_difference_check(&field, &p.to_array(), 1e-5).unwrap());
        }
    }
    for p in default_calabi_grid(15) {
        worst = worst.max(
            finite_difference_check(&calabi_omega_full(), &p.to_array(), 1e-5).unwrap(),
        );
    }
    assert!(worst <= 1e-6, "autodiff vs finite differences {worst}");
    pass_line(
        "8 derivative engine",
        format!("max deviation {worst:.2e} <= 1e-6 at step 1e-5 over all built-ins"),
    );
}

#[test]
fn criterion_09_solver_recovery() {
    let start_time = Instant::now();
    let start = BasisExpansion::flat(3).unwrap().with_noise(1e-2, 17);
    let pts = sample_collocation(&CollocationBox::default_box(), 400, 10).unwrap();
    let out = solve(&start, &pts, &SolveConfig::default()).unwrap();
    let elapsed = start_time.elapsed();
    assert!(out.converged, "not converged: sup {}", out.final_sup);
    assert!(out.final_sup <= 1e-8);
    assert!(out.iterations <= 50, "{} iterations", out.iterations);
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60 s");

    // re-verification through the residual evaluators on a fresh seed
    let pot = expansion_potential(&out.coeffs);
    let fresh = sample_collocation(&CollocationBox::default_box(), 400, 999).unwrap();
    let mut sup: f64 = 0.0;
    for p in &fresh.points {
        sup = sup.max(reduced_residuals(&pot, p).unwrap().sup_norm());
    }
    assert!(sup <= 1e-7, "fresh-seed sup {sup}");
    pass_line(
        "9 solver recovery",
        format!(
            "converged in {} iterations, sup {:.2e} <= 1e-8, fresh-seed sup {:.2e} <= 1e-7, {elapsed:?}",
            out.iterations, out.final_sup, sup
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 10: CLI determinism and exit codes
// ---------------------------------------------------------------------------

struct CliRun {
    stdout: Vec<u8>,
    code: i32,
    outputs: Vec<(String, Vec<u8>)>,
}

fn run_cli(dir: &PathBuf, args: &[String]) -> CliRun {
    let output = Command::new(env!("CARGO_BIN_EXE_hkma"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    let outputs = args
        .iter()
        .enumerate()
        .filter(|(i, a)| *a == "--out" && i + 1 < args.len())
        .map(|(i, _)| {
            let name = args[i + 1].clone();
            let bytes = fs::read(dir.join(&name)).unwrap_or_default();
            (name, bytes)
        })
        .collect();
    CliRun {
        stdout: output.stdout,
        code: output.status.code().unwrap_or(-1),
        outputs,
    }
}

#[test]
fn criterion_10_cli_determinism_and_exit_codes() {
    let dir = std::env::temp_dir().join(format!("hkma-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();

    fs::write(
        dir.join("pts-full.json"),
        r#"{"coords": "full", "points": [
            {"q1": [0.5, 0.5], "q2": [1.0, 0.0], "p1": [1.0, 0.0], "p2": [0.0, 2.0]},
            {"q1": [-0.3, 0.2], "q2": [0.4, -0.8], "p1": [0.6, 0.7], "p2": [0.1, -0.5]}
        ]}"#,
    )
    .unwrap();
    fs::write(
        dir.join("pts-reduced.json"),
        r#"{"coords": "reduced", "points": [
            {"q": [1.0, 0.0], "zeta": [0.0, 2.0], "v": 1.0, "rho": 0.0, "u": 1.0, "theta": 0.0}
        ]}"#,
    )
    .unwrap();
    fs::write(
        dir.join("solve.json"),
        r#"{"degree": 3, "collocation": {"count": 80, "seed": 5},
            "start": "flat", "noise": {"amplitude": 0.005, "seed": 23}}"#,
    )
    .unwrap();
    fs::write(dir.join("broken.json"), "{not json").unwrap();

    // (args, expected exit code)
    let matrix: Vec<(Vec<String>, i32)> = vec![
        (split("verify --potential flat-H --system reduced --n 200 --out v1.json"), 0),
        (split("verify --potential flat-omega --system full --n 200 --out v2.json"), 0),
        (split("verify --potential flat-omega-prime --system full --n 200 --out v3.json"), 0),
        (split("verify --potential calabi-omega --system full --out v4.json"), 0),
        (split("verify --potential calabi-omega --system forms --out v5.json"), 0),
        (split("verify --potential calabi-H --system reduced --out v6.json"), 0),
        (split("verify --potential flat-H --system reduced --n 50 --tol 1e-20 --out v7.json"), 1),
        (split("verify --potential flat-H --system full"), 2),
        (split("verify --potential unknown --system reduced"), 2),
        (split("verify --potential flat-omega --system full --points pts-reduced.json"), 2),
        (split("scan --potential flat-H --system reduced --n 150 --seed 7 --out s1.json"), 0),
        (
            split(concat!(
                "scan --potential calabi-omega --system forms --n 40 --seed 9 ",
                r#"--bounds {"v":[-0.5,0.5],"rho":[-0.5,0.5]} --out s2.json"#
            )),
            0,
        ),
        (split("scan --potential flat-H --system reduced --n 0 --seed 1"), 2),
        // calabi-H outside its safe box: domain error at the first point
        (
            split(concat!(
                "scan --potential calabi-H --system reduced --n 5 --seed 1 ",
                r#"--bounds {"rho":[10,10]}"#
            )),
            2,
        ),
        (split("jacobi --trials 100 --seed 1 --out j1.json"), 0),
        (split("transform --points pts-full.json --direction full-to-reduced --out t1.json"), 0),
        (split("transform --points t1.json --direction reduced-to-full --out t2.json"), 0),
        (split("transform --points pts-full.json --direction darboux-to-calabi --out t3.json"), 0),
        (split("transform --points pts-reduced.json --direction full-to-reduced"), 2),
        (split("transform --points broken.json --direction full-to-reduced"), 2),
        (split("solve --config solve.json --out sol1.json"), 0),
        (split("solve --config missing.json"), 2),
    ];

    let mut first = Vec::new();
    for (args, expected) in &matrix {
        let run = run_cli(&dir, args);
        assert_eq!(
            run.code, *expected,
            "exit code for `hkma {}`",
            args.join(" ")
        );
        first.push(run);
    }
    // second pass must be byte-identical in stdout and in every written file
    for ((args, _), before) in matrix.iter().zip(&first) {
        let again = run_cli(&dir, args);
        assert_eq!(
            again.stdout, before.stdout,
            "stdout differs across runs for `hkma {}`",
            args.join(" ")
        );
        for ((name_a, bytes_a), (name_b, bytes_b)) in before.outputs.iter().zip(&again.outputs) {
            assert_eq!(name_a, name_b);
            assert_eq!(
                bytes_a, bytes_b,
                "report {name_a} differs across runs for `hkma {}`",
                args.join(" ")
            );
        }
    }

    // spot-check documented report semantics
    let v4: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("v4.json")).unwrap()).unwrap();
    assert_eq!(v4["pass"], serde_json::Value::Bool(true));
    let t1: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("t1.json")).unwrap()).unwrap();
    assert_eq!(t1["points"][0]["q"][0], serde_json::json!(1.0));
    assert_eq!(t1["points"][0]["v"], serde_json::json!(1.0));

    fs::remove_dir_all(&dir).ok();
    pass_line(
        "10 cli determinism",
        format!(
            "{} command invocations: exit codes as documented, byte-identical across two runs",
            matrix.len()
        ),
    );
}

fn split(s: &str) -> Vec<String> {
    s.split_whitespace().map(|x| x.to_string()).collect()
}
