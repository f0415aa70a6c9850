//! End-to-end flows through the public surface: inline scenarios compiled
//! from JSON and driven through the suite, failure routing into failure
//! records, the short convergence ladder, per-point record uniqueness, and
//! the pinned messages of every rejection path.

use std::collections::HashSet;

use serde_json::{json, Value};
use spindef_core::deformation::deformed_frame_transform;
use spindef_core::dirac_matter::{lagrangian_density_with, random_spinor_field};
use spindef_core::{
    build_tables, constants, fit_order, plane_wave, run_suite, spin_connection_orthonormal,
    DeformationContext, DeltaKind, Error, FrameField, GammaCoeffs, MatrixField, Perturbation,
    PhysicalConstants, Report, Scenario, SplitMix64, SuiteConfig,
};

fn base_spec() -> Value {
    json!({
        "name": "probe",
        "description": "inline probe scenario",
        "domain": { "lo": [-1.0, -1.0, -1.0, -1.0], "hi": [1.0, 1.0, 1.0, 1.0] },
        "frame": { "kind": "coordinate" },
        "metric": { "kind": "orthonormal-constant" },
        "constants": { "units": "natural" },
        "sampling": { "kind": "points", "points": [[0.1, 0.2, 0.3, 0.4]] }
    })
}

fn compile(spec: &Value) -> Result<Scenario, Error> {
    Scenario::from_json(&spec.to_string())
}

fn expect_message(result: Result<Scenario, Error>, fragment: &str) {
    match result {
        Ok(_) => panic!("expected a rejection mentioning {fragment:?}"),
        Err(e) => {
            let msg = e.to_string();
            assert!(
                msg.contains(fragment),
                "message {msg:?} does not mention {fragment:?}"
            );
        }
    }
}

/// A short two-step ladder is already enough for the order fit to certify
/// both connection deltas as first-order accurate.
#[test]
fn two_step_ladder_fits_first_order_connection_deltas() {
    let scenario = Scenario::builtin("exp-scale-frame").unwrap();
    let pert = scenario.perturbation.as_ref().unwrap();
    let ctx = DeformationContext {
        frame: &scenario.frame,
        metric: &scenario.metric,
        pert,
        orthonormal: true,
    };
    let ladder = [1e-2, 5e-3];
    for p in &scenario.sample_points()[..2] {
        for kind in [DeltaKind::Connection, DeltaKind::SpinConnection] {
            let samples = ctx.convergence_samples(kind, &ladder, p).unwrap();
            let order = fit_order(&samples).expect("two informative samples");
            assert!(order >= 1.8, "fitted order {order:.3} for {}", kind.name());
        }
    }
}

/// Every executed check appears exactly once per sample point in a suite
/// report.
#[test]
fn suite_reports_index_each_check_once_per_point() {
    let config = SuiteConfig::default();
    for name in Scenario::builtin_names() {
        let report = run_suite(&Scenario::builtin(name).unwrap(), &config);
        let mut seen: HashSet<(String, Option<usize>)> = HashSet::new();
        for record in &report.records {
            let key = (
                record.name.clone(),
                record.point.as_ref().map(|pt| pt.index),
            );
            assert!(
                seen.insert(key),
                "{name}: duplicate record {} at {:?}",
                record.name,
                record.point
            );
        }
    }
}

/// A frame with linearly dependent legs does not panic the suite: every
/// frame-dependent check becomes a failure record carrying the degeneracy
/// message, the report still serializes, and repeated runs agree.
#[test]
fn degenerate_frames_surface_as_failure_records() {
    let mut spec = base_spec();
    spec["frame"] = json!({
        "kind": "expressions",
        "coefficients": [
            ["1", "1", "0", "0"],
            ["1", "1", "0", "0"],
            ["0", "0", "1", "0"],
            ["0", "0", "0", "1"]
        ]
    });
    let config = SuiteConfig::default();
    let report = run_suite(&compile(&spec).unwrap(), &config);
    assert!(!report.all_pass);
    let failing = report.failing_names();
    for expected in [
        "frame_determinant",
        "frame_orientation",
        "metric_compatibility",
    ] {
        assert!(
            failing.iter().any(|n| n == expected),
            "missing failure {expected}"
        );
    }
    let degenerate = report
        .records
        .iter()
        .find(|r| r.name == "frame_determinant")
        .expect("determinant record");
    assert_eq!(degenerate.values["error"], json!("degenerate frame"));

    let again = run_suite(&compile(&spec).unwrap(), &config);
    assert_eq!(report.to_json(), again.to_json());
}

/// A finite deformation that flips the time leg out of the forward class is
/// rejected with the pinned message.
#[test]
fn oversized_deformations_are_rejected() {
    let metric = MatrixField::constant(constants().metric);
    let mut h = [[0.0; 4]; 4];
    h[0][0] = -3.0;
    let pert = Perturbation::new(MatrixField::constant(h), 1.0);
    let tables = build_tables(&pert, &metric, &[0.0; 4]).unwrap();
    let err = deformed_frame_transform(&tables).unwrap_err();
    assert_eq!(
        err.to_string(),
        "deformation too large: frame loses polarization/orientation"
    );
}

/// Perturbations must be symmetric; the check is relative to the component
/// scale.
#[test]
fn non_symmetric_perturbations_are_rejected() {
    let metric = MatrixField::constant(constants().metric);
    let mut h = [[0.0; 4]; 4];
    h[0][1] = 0.3;
    let pert = Perturbation::new(MatrixField::constant(h), 1e-3);
    let err = build_tables(&pert, &metric, &[0.0; 4]).unwrap_err();
    assert_eq!(err.to_string(), "perturbation not symmetric");
}

/// A pairing table that breaks the conjugation identity produces a
/// structurally imaginary density, which the reality guard reports instead
/// of returning a silently wrong real part.
#[test]
fn corrupted_pairing_tables_violate_the_reality_guard() {
    let k = constants();
    let mut bad_pairing = k.pairing;
    bad_pairing[0][2].im += 0.5;
    let frame = FrameField::coordinate();
    let conn = spin_connection_orthonormal(&GammaCoeffs::zero());
    let consts = PhysicalConstants::natural();
    let mut rng = SplitMix64::new(4242);
    let psi = random_spinor_field(&mut rng, 1.0, 1.0);
    let err = lagrangian_density_with(
        &bad_pairing,
        &k.gamma,
        &psi,
        &conn,
        &frame,
        &consts,
        &[0.2, -0.1, 0.4, 0.3],
    )
    .unwrap_err();
    assert_eq!(err.to_string(), "reality identity violated");
}

/// Plane waves come in exactly two polarization branches.
#[test]
fn plane_wave_branch_is_validated() {
    match plane_wave([0.1, 0.0, 0.0], &PhysicalConstants::natural(), 2) {
        Ok(_) => panic!("expected the branch to be rejected"),
        Err(e) => assert_eq!(e.to_string(), "plane-wave branch must be 0 or 1"),
    }
}

/// Every scenario rejection path carries an actionable message.
#[test]
fn scenario_validation_messages_are_pinned() {
    let identity_grid = json!([
        ["1", "0", "0", "0"],
        ["0", "1", "0", "0"],
        ["0", "0", "1", "0"],
        ["0", "0", "0", "1"]
    ]);

    let mut spec = base_spec();
    spec["domain"]["hi"] = spec["domain"]["lo"].clone();
    expect_message(
        compile(&spec),
        "domain must satisfy lo < hi in coordinate 0",
    );

    let mut spec = base_spec();
    spec["frame"] = json!({ "kind": "spinning" });
    expect_message(compile(&spec), "unknown variant");

    let mut spec = base_spec();
    spec["color"] = json!(3);
    expect_message(compile(&spec), "unknown field");

    let mut spec = base_spec();
    spec["frame"] = json!({ "kind": "expressions", "coefficients": identity_grid });
    spec["frame"]["coefficients"][0][0] = json!("1 +");
    expect_message(compile(&spec), "frame entry (0,0)");

    let mut spec = base_spec();
    spec["metric"] = json!({ "kind": "coordinate-expressions", "components": identity_grid });
    expect_message(
        compile(&spec),
        "coordinate-gauge scenarios need a companion frame for the spin sector",
    );

    let mut spec = base_spec();
    spec["perturbation"] = json!({ "components": identity_grid, "eps": -1.0 });
    expect_message(compile(&spec), "perturbation eps must be positive");

    let mut spec = base_spec();
    spec["perturbation"] =
        json!({ "components": identity_grid, "eps": 0.001, "eps_ladder": [0.01] });
    expect_message(
        compile(&spec),
        "eps ladder needs at least two positive sizes",
    );

    let mut spec = base_spec();
    spec["metric"] = json!({ "kind": "coordinate-expressions", "components": identity_grid });
    spec["companion_frame"] = identity_grid.clone();
    spec["spinor"] = json!({
        "kind": "plane-wave",
        "momentum": [0.1, 0.0, 0.0],
        "branch": 0
    });
    expect_message(compile(&spec), "matter fields need an orthonormal scenario");

    let mut spec = base_spec();
    spec["constants"]["mass"] = json!(-2.0);
    expect_message(compile(&spec), "mass must be positive");

    let mut spec = base_spec();
    spec["sampling"] = json!({ "kind": "points", "points": [] });
    expect_message(compile(&spec), "sampling needs at least one point");

    let mut spec = base_spec();
    spec["sampling"] = json!({ "kind": "random", "count": 0, "seed": 3 });
    expect_message(compile(&spec), "sampling needs at least one point");
}

/// An inline scenario with a plane-wave matter sector compiles from JSON
/// and passes the whole suite.
#[test]
fn inline_scenarios_compile_and_pass_the_suite() {
    let mut spec = base_spec();
    spec["spinor"] = json!({
        "kind": "plane-wave",
        "momentum": [0.2, -0.1, 0.15],
        "branch": 1
    });
    spec["perturbation"] = json!({
        "components": [
            ["0.1*cos(x1)", "0.02*sin(x0)", "0", "0"],
            ["0.02*sin(x0)", "0.2", "0", "0"],
            ["0", "0", "0.15*sin(x2)", "0"],
            ["0", "0", "0", "0.1"]
        ],
        "eps": 0.001
    });
    spec["sampling"] = json!({ "kind": "random", "count": 5, "seed": 99 });
    let scenario = compile(&spec).unwrap();
    let report = run_suite(&scenario, &SuiteConfig::default());
    assert!(report.all_pass, "failing: {:?}", report.failing_names());
    assert_eq!(report.seed, 99);
    let matter: Vec<&str> = report
        .records
        .iter()
        .filter(|r| r.name.starts_with("dirac") || r.name.starts_with("stress"))
        .map(|r| r.name.as_str())
        .collect();
    assert!(matter.contains(&"dirac_residual"));
    assert!(matter.contains(&"stress_trace_identity"));
    let _: Report = report;
}
