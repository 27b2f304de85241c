//! The acceptance gate. Each test covers one numbered criterion, prints a
//! single PASS/FAIL line with the measured quantities and then asserts.
//! Run with `--nocapture` to see the lines for passing criteria too.

mod common;

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use newtonlk::catalog::{ExampleFamily, FamilyKind};
use newtonlk::chart::AmbientSpace;
use newtonlk::symfun::{trace_identities, ShapeMatrix};
use newtonlk::util;
use newtonlk::verify::{
    classify, evaluate_family, fit_affine, structural_checks, to_sample_set, ClassificationInput,
    EvaluationOptions, SampleRecord, SampleSet, Verdict,
};

fn report(number: usize, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("acceptance criterion {number} ({name}): {status} — {detail}");
}

fn opts(samples: usize, with_gauss: bool, with_gradients: bool) -> EvaluationOptions {
    EvaluationOptions {
        samples,
        seed: 1,
        with_gauss,
        with_curvature_gradients: with_gradients,
    }
}

/// 1. Algebraic identity suite: 100 random symmetric S per n in 2..8, all k,
/// every identity residual ≤ 1e-12 relative to ‖S‖^deg, runtime ≤ 10 s.
#[test]
fn criterion_1_identity_suite() {
    let start = Instant::now();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_newtonlk"))
        .args(["identity-suite", "--n-max", "8", "--trials", "100", "--seed", "1"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed().as_secs_f64();
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).expect("JSON report");
    let overall = json["identities"]["overall_max"].as_f64().unwrap_or(f64::NAN);
    let ok = out.status.code() == Some(0) && overall <= 1e-12 && elapsed <= 10.0;
    report(
        1,
        "algebraic identity suite",
        ok,
        &format!("max residual {overall:.3e} (≤ 1e-12), runtime {elapsed:.2}s (≤ 10s)"),
    );
    assert!(ok, "criterion 1 failed: residual {overall:.3e}, {elapsed:.2}s");
}

/// 2. Worked example: S = diag(1,2,3), k = 1 reproduces tr(P_1) = 12,
/// tr(S P_1) = 22, tr(S² P_1) = 48 exactly, cross-checked against the
/// subset-enumeration oracle.
#[test]
fn criterion_2_worked_trace_example() {
    let kappa = [1.0, 2.0, 3.0];
    let shape = ShapeMatrix::from_diagonal(&kappa).unwrap();
    let id = trace_identities(&shape, 1).unwrap();

    let s1 = common::sigma_subsets(&kappa, 1);
    let s2 = common::sigma_subsets(&kappa, 2);
    let s3 = common::sigma_subsets(&kappa, 3);
    let oracle = (2.0 * s1, 2.0 * s2, s1 * s2 - 3.0 * s3);

    let exact = id.trace_pk == 12.0 && id.trace_s_pk == 22.0 && id.trace_s2_pk == 48.0;
    let closed = id.closed_trace_pk == 12.0
        && id.closed_trace_s_pk == 22.0
        && id.closed_trace_s2_pk == 48.0;
    let oracle_ok = oracle == (12.0, 22.0, 48.0);
    let ok = exact && closed && oracle_ok;
    report(
        2,
        "worked trace example",
        ok,
        &format!(
            "tr(P_1)={}, tr(SP_1)={}, tr(S²P_1)={} (want 12, 22, 48 exactly)",
            id.trace_pk, id.trace_s_pk, id.trace_s2_pk
        ),
    );
    assert!(ok, "criterion 2 failed: {id:?}, oracle {oracle:?}");
}

/// 3. Closed-form L_k x on the whole catalog grid, every admissible k,
/// 50 seeded points each: position routes agree to 1e-5 relative, Gauss-map
/// routes to 1e-4; total runtime ≤ 60 s.
#[test]
fn criterion_3_closed_form_lk() {
    let start = Instant::now();
    let mut worst_pos: f64 = 0.0;
    let mut worst_gauss: f64 = 0.0;
    let mut runs = 0usize;
    for family in common::catalog_grid() {
        for k in 0..family.n() {
            let samples = evaluate_family(&family, k, &opts(50, true, false)).unwrap();
            runs += 1;
            for s in &samples {
                worst_pos = worst_pos.max(s.lk_position.discrepancy);
                let gauss = s.lk_gauss.as_ref().expect("gauss route requested");
                worst_gauss = worst_gauss.max(gauss.discrepancy);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_pos <= 1e-5 && worst_gauss <= 1e-4 && elapsed <= 60.0;
    report(
        3,
        "closed-form L_k on the catalog",
        ok,
        &format!(
            "{runs} runs x 50 points: position {worst_pos:.3e} (≤ 1e-5), gauss {worst_gauss:.3e} (≤ 1e-4), runtime {elapsed:.1}s (≤ 60s)"
        ),
    );
    assert!(ok, "criterion 3 failed: pos {worst_pos:.3e}, gauss {worst_gauss:.3e}, {elapsed:.1}s");
}

/// 4. Fitted (A,b) from 200 samples matches the displayed matrices entrywise
/// within 1e-4·(1+‖A‖), including the two anchors: the cap (n=2, k=0, τ=0.5)
/// with A = -(8/3)I, b = (4/3)a, and the (1,-1) product with A = -2I.
#[test]
fn criterion_4_fit_matches_displays() {
    let mut worst_rel: f64 = 0.0;
    for family in common::catalog_grid() {
        let space = family.space();
        for k in 0..family.n() {
            let evaluated = evaluate_family(&family, k, &opts(200, false, false)).unwrap();
            let set = to_sample_set(family.n(), &evaluated).unwrap();
            let fit = fit_affine(&space, &set, false).unwrap();
            let predicted = family.predicted_affine(k).unwrap();
            let scale = 1.0 + util::amax(&predicted.a_matrix);
            let da = util::amax(&(&fit.a_matrix - &predicted.a_matrix));
            let db = (&fit.b_vector - &predicted.b_vector).amax();
            let rel = da.max(db) / scale;
            worst_rel = worst_rel.max(rel);
            assert!(
                rel <= 1e-4,
                "criterion 4 failed on {} k={k}: relative error {rel:.3e}",
                family.name()
            );
        }
    }

    // Anchor 1: spherical cap n=2, tau=0.5, k=0.
    let cap = ExampleFamily::umbilic_sphere_cap(2, 0.5).unwrap();
    let evaluated = evaluate_family(&cap, 0, &opts(200, false, false)).unwrap();
    let set = to_sample_set(2, &evaluated).unwrap();
    let fit = fit_affine(&cap.space(), &set, false).unwrap();
    let mut cap_err: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { -8.0 / 3.0 } else { 0.0 };
            cap_err = cap_err.max((fit.a_matrix[(i, j)] - want).abs());
        }
    }
    let b_want = DVector::from_vec(vec![0.0, 0.0, 0.0, 4.0 / 3.0]);
    cap_err = cap_err.max((&fit.b_vector - &b_want).amax());

    // Anchor 2: the (1,-1)-curvature product, A = -2I, b = 0.
    let clifford =
        ExampleFamily::riemannian_product(2, 1, std::f64::consts::FRAC_1_SQRT_2, 1).unwrap();
    let evaluated = evaluate_family(&clifford, 0, &opts(200, false, false)).unwrap();
    let set = to_sample_set(2, &evaluated).unwrap();
    let fit = fit_affine(&clifford.space(), &set, false).unwrap();
    let mut cliff_err: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { -2.0 } else { 0.0 };
            cliff_err = cliff_err.max((fit.a_matrix[(i, j)] - want).abs());
        }
    }
    cliff_err = cliff_err.max(fit.b_vector.amax());

    let anchor_tol = 1e-4 * (1.0 + 8.0 / 3.0);
    let ok = cap_err <= anchor_tol && cliff_err <= 1e-4 * 3.0;
    report(
        4,
        "fits reproduce displayed matrices",
        ok,
        &format!(
            "worst grid error {worst_rel:.3e} (≤ 1e-4); anchors: cap {cap_err:.3e} vs -(8/3)I and (4/3)a, product {cliff_err:.3e} vs -2I"
        ),
    );
    assert!(ok, "criterion 4 anchors failed: cap {cap_err:.3e}, product {cliff_err:.3e}");
}

/// 5. Every fitted catalog A is self-adjoint in the correct ambient metric:
/// defect ≤ 1e-6, for both the unconstrained and the constrained fit.
#[test]
fn criterion_5_selfadjointness() {
    let mut worst: f64 = 0.0;
    for family in common::catalog_grid() {
        let space = family.space();
        for k in 0..family.n() {
            let evaluated = evaluate_family(&family, k, &opts(200, false, false)).unwrap();
            let set = to_sample_set(family.n(), &evaluated).unwrap();
            for constrained in [false, true] {
                let fit = fit_affine(&space, &set, constrained).unwrap();
                worst = worst.max(fit.selfadjoint_defect);
                assert!(
                    fit.selfadjoint_defect <= 1e-6,
                    "criterion 5 failed on {} k={k} constrained={constrained}: defect {:.3e}",
                    family.name(),
                    fit.selfadjoint_defect
                );
            }
        }
    }
    report(
        5,
        "self-adjointness of fitted A",
        true,
        &format!("worst defect {worst:.3e} (≤ 1e-6) over both fit modes"),
    );
}

/// 6. Classification: totally_umbilical for every Example-2/3 run with
/// τ ≠ 0, zero_Hk1_const_Hk for totally geodesic limits,
/// isoparametric_product for every Example-4 run; the (1,-1) product passes
/// the quadratic check with λ* = 0 and defect ≤ 1e-8.
#[test]
fn criterion_6_classification() {
    let mut checked = 0usize;
    for family in common::catalog_grid().into_iter().chain(common::geodesic_grid()) {
        let expected = match family.kind() {
            FamilyKind::ZeroHk1 => Verdict::ZeroHk1ConstHk,
            FamilyKind::UmbilicSphereCap { tau }
            | FamilyKind::UmbilicHyperbolic { tau, .. } => {
                if *tau == 0.0 {
                    Verdict::ZeroHk1ConstHk
                } else {
                    Verdict::TotallyUmbilical
                }
            }
            FamilyKind::RiemannianProduct { .. } => Verdict::IsoparametricProduct,
        };
        let evaluated = evaluate_family(&family, 0, &opts(50, false, false)).unwrap();
        let input = ClassificationInput::from_evaluated(&evaluated);
        let rep = classify(&family.space(), &input, 1e-4);
        assert_eq!(
            rep.verdict,
            expected,
            "criterion 6 failed on {}: {:?} (notes {:?})",
            family.name(),
            rep.verdict,
            rep.notes
        );
        checked += 1;
    }

    let clifford =
        ExampleFamily::riemannian_product(2, 1, std::f64::consts::FRAC_1_SQRT_2, 1).unwrap();
    let evaluated = evaluate_family(&clifford, 0, &opts(50, false, false)).unwrap();
    let input = ClassificationInput::from_evaluated(&evaluated);
    let rep = classify(&clifford.space(), &input, 1e-4);
    let quad = rep.quadratic.expect("quadratic check on the (1,-1) product");
    let quad_ok = quad.lambda.abs() <= 1e-8 && quad.defect <= 1e-8;
    report(
        6,
        "classification verdicts",
        quad_ok,
        &format!(
            "{checked} family runs matched; (1,-1) product quadratic λ* = {:.3e}, defect {:.3e} (≤ 1e-8)",
            quad.lambda, quad.defect
        ),
    );
    assert!(quad_ok, "criterion 6 quadratic check failed: {quad:?}");
}

/// 7. Structural relations with the self-adjoint-constrained fit on every
/// catalog run: tangent-vector equation residual ≤ 1e-4 and
/// stddev(⟨b,x⟩ − c_k H_k) ≤ 1e-6.
#[test]
fn criterion_7_structural_relations() {
    let mut worst_ax: f64 = 0.0;
    let mut worst_std: f64 = 0.0;
    for family in common::catalog_grid() {
        let space = family.space();
        for k in 0..family.n() {
            let evaluated = evaluate_family(&family, k, &opts(100, false, true)).unwrap();
            let set = to_sample_set(family.n(), &evaluated).unwrap();
            let fit = fit_affine(&space, &set, true).unwrap();
            let checks =
                structural_checks(&space, k, &fit.a_matrix, &fit.b_vector, &evaluated).unwrap();
            worst_ax = worst_ax.max(checks.weingarten_residual);
            worst_std = worst_std.max(checks.slice_constant_stddev);
            assert!(
                checks.weingarten_residual <= 1e-4,
                "criterion 7 failed on {} k={k}: AX residual {:.3e}",
                family.name(),
                checks.weingarten_residual
            );
            assert!(
                checks.slice_constant_stddev <= 1e-6,
                "criterion 7 failed on {} k={k}: slice stddev {:.3e}",
                family.name(),
                checks.slice_constant_stddev
            );
        }
    }
    report(
        7,
        "structural relations",
        true,
        &format!(
            "worst AX residual {worst_ax:.3e} (≤ 1e-4), worst ⟨b,x⟩−c_kH_k stddev {worst_std:.3e} (≤ 1e-6)"
        ),
    );
}

/// 8. Negative control: a random point cloud on no catalog family fits with
/// rms residual above 1e-2 and classifies as no_match.
#[test]
fn criterion_8_negative_control() {
    let n = 2;
    let space = AmbientSpace::sphere(n).unwrap();
    let d = space.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut records = Vec::new();
    for _ in 0..200 {
        let raw = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let position = &raw / raw.norm();
        let lk_position = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        records.push(SampleRecord {
            u: vec![0.0; n],
            position,
            lk_position,
        });
    }
    let set = SampleSet::new(n, records).unwrap();
    let fit = fit_affine(&space, &set, false).unwrap();
    let input = ClassificationInput::from_records(&space, 0, &set).unwrap();
    let rep = classify(&space, &input, 1e-4);
    let ok = fit.residual_rms > 1e-2 && rep.verdict == Verdict::NoMatch;
    report(
        8,
        "negative control",
        ok,
        &format!(
            "random cloud rms {:.3e} (> 1e-2), verdict {}",
            fit.residual_rms,
            rep.verdict.as_str()
        ),
    );
    assert!(ok, "criterion 8 failed: rms {:.3e}, verdict {:?}", fit.residual_rms, rep.verdict);
}

/// 9. Determinism: repeated CLI runs with the same seed produce
/// byte-identical JSON, for each subcommand.
#[test]
fn criterion_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_newtonlk");

    let run_to_file = |args: &[&str], path: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(path)
            .status()
            .expect("binary runs");
        assert!(status.code().is_some());
        std::fs::read(path).unwrap()
    };

    let suite_args = ["identity-suite", "--n-max", "4", "--trials", "20", "--seed", "7"];
    let verify_args = [
        "verify-example",
        "--family",
        "umbilic_hyperbolic",
        "--n",
        "2",
        "--k",
        "1",
        "--axis",
        "lightlike",
        "--tau",
        "0.9",
        "--samples",
        "120",
        "--seed",
        "3",
    ];
    let csv_path = dir.path().join("pipe.csv");
    let export_args = [
        "verify-example",
        "--family",
        "riemannian_product",
        "--n",
        "2",
        "--k",
        "0",
        "--r",
        "0.5",
        "--m",
        "1",
        "--c",
        "-1",
        "--samples",
        "60",
    ];
    let status = std::process::Command::new(bin)
        .args(export_args)
        .arg("--csv")
        .arg(&csv_path)
        .arg("--out")
        .arg(dir.path().join("export.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv_str = csv_path.to_str().unwrap().to_owned();
    let fit_args = ["fit", "--csv", &csv_str, "--k", "0", "--c", "-1"];

    let mut all_ok = true;
    let mut details = Vec::new();
    for (label, args) in [
        ("identity-suite", &suite_args[..]),
        ("verify-example", &verify_args[..]),
        ("fit", &fit_args[..]),
    ] {
        let a = run_to_file(args, &dir.path().join(format!("{label}-a.json")));
        let b = run_to_file(args, &dir.path().join(format!("{label}-b.json")));
        let same = a == b;
        all_ok &= same;
        details.push(format!("{label}: {} bytes, identical = {same}", a.len()));
    }
    report(9, "byte-identical reports", all_ok, &details.join("; "));
    assert!(all_ok, "criterion 9 failed: {details:?}");
}
