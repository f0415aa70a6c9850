//! Scenario-driven check suite: every structural identity of the chain is
//! evaluated over the sampled chart points of a scenario and folded into a
//! report of named pass/fail records.
//!
//! Checks run in groups so the command-line tool can target one sector at a
//! time. Coordinate-gauge scenarios route spin-sector checks through the
//! orthonormal companion frame, with the perturbation pulled back onto it;
//! those records carry a `"gauge": "companion"` note. Residual tolerances
//! scale uniformly with [`SuiteConfig::tolerance_scale`]; the convergence
//! order floor is divided by it, so values below one tighten every gate.

use serde_json::{json, Value};

use crate::connection::{
    commutator_transport_residual, concordance_residuals, covariant_derivative_tensor2,
    gamma_general, gamma_orthonormal, metric_antisymmetry_residual, spin_connection_general,
    spin_connection_orthonormal, GammaCoeffs, SpinConnection, SpinTables,
};
use crate::deformation::{
    build_tables, deformed_frame_transform, fit_order, DeformationContext, DeltaKind, Perturbation,
};
use crate::dirac_matter::{
    delta_lagrangian, dirac_residual, lagrangian_density, stress_tensor, trace_identity_residual,
    variational_residual,
};
use crate::error::Result;
use crate::field::{ChartPoint, MatrixField};
use crate::frame_geometry::{frame_admissibility, FrameField};
use crate::linalg::{cmat4, det4, mat4, max_abs_cmat4, max_abs_mat4, max_abs_rank3, rank3, DIM};
use crate::report::{PointRef, Record, Report};
use crate::scenario::Scenario;
use crate::spin_algebra::constants;
use crate::tolerances::{
    CANCELLATION, CONCORDANCE, DENSITY_CHAIN_EQUIV_REL, DENSITY_IMAG, DIRAC_RESIDUAL_REL,
    FD_RESIDUAL, LINEARITY, ONSHELL_DENSITY_REL, RICHARDSON_MIN_ORDER, STRESS_ASYMMETRY,
    STRESS_IMAG, TRACE_IDENTITY_REL, VARIATIONAL_REL,
};

/// Check sector selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckGroup {
    /// Frame non-degeneracy, orientation, and commutation structure.
    Frame,
    /// Metric connection: reduction agreement, metric compatibility, and
    /// the pointwise transport identities.
    Connection,
    /// Covariant constancy of the five structure tables.
    Concordance,
    /// First-order deformation deltas against finite-transform oracles.
    Deformation,
    /// Matter-field densities, the energy-momentum tensor, and its
    /// variational characterization.
    Matter,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 5] = [
        CheckGroup::Frame,
        CheckGroup::Connection,
        CheckGroup::Concordance,
        CheckGroup::Deformation,
        CheckGroup::Matter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Frame => "frame",
            CheckGroup::Connection => "connection",
            CheckGroup::Concordance => "concordance",
            CheckGroup::Deformation => "deformation",
            CheckGroup::Matter => "matter",
        }
    }
}

/// Run-wide options.
#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    /// Uniform multiplier on every residual tolerance. Values below one
    /// tighten the gates; the convergence-order floor is divided by it so
    /// the same direction applies there.
    pub tolerance_scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            tolerance_scale: 1.0,
        }
    }
}

/// Runs every check group over the scenario's sample points.
pub fn run_suite(scenario: &Scenario, config: &SuiteConfig) -> Report {
    run_groups(scenario, config, &CheckGroup::ALL)
}

/// Runs the selected check groups over the scenario's sample points.
pub fn run_groups(scenario: &Scenario, config: &SuiteConfig, groups: &[CheckGroup]) -> Report {
    let ts = config.tolerance_scale;
    let mut report = Report::new(&scenario.name, scenario.seed(), ts);
    let points = scenario.sample_points();
    for &group in groups {
        match group {
            CheckGroup::Frame => frame_group(scenario, ts, &points, &mut report),
            CheckGroup::Connection => connection_group(scenario, ts, &points, &mut report),
            CheckGroup::Concordance => concordance_group(scenario, ts, &points, &mut report),
            CheckGroup::Deformation => deformation_group(scenario, ts, &points, &mut report),
            CheckGroup::Matter => matter_group(scenario, ts, &points, &mut report),
        }
    }
    report.sort_records();
    report
}

fn point_ref(index: usize, x: &ChartPoint) -> Option<PointRef> {
    Some(PointRef { index, x: *x })
}

/// Pushes a residual check, converting an evaluation error into a failure
/// record under the same name.
fn push_residual(
    report: &mut Report,
    name: &str,
    point: Option<PointRef>,
    residual: Result<f64>,
    tolerance: f64,
    values: Value,
) {
    match residual {
        Ok(r) => report.push(Record::check(name, point, r, tolerance, values)),
        Err(e) => report.push(Record::failure(name, point, e.to_string())),
    }
}

fn gauge_values(gauge: Option<&str>) -> Value {
    match gauge {
        Some(g) => json!({ "gauge": g }),
        None => Value::Null,
    }
}

fn with_gauge(mut values: Value, gauge: Option<&str>) -> Value {
    if let (Some(g), Some(map)) = (gauge, values.as_object_mut()) {
        map.insert("gauge".to_owned(), json!(g));
    }
    values
}

/// The frame carrying the spin sector: the scenario frame when it is
/// orthonormal, otherwise the companion.
fn spin_frame(scenario: &Scenario) -> (&FrameField, Option<&'static str>) {
    if scenario.orthonormal {
        (&scenario.frame, None)
    } else {
        (
            scenario
                .companion
                .as_ref()
                .expect("coordinate-gauge scenarios carry a companion frame"),
            Some("companion"),
        )
    }
}

// ---- frame group -------------------------------------------------------

fn frame_matrix_records(
    frame: &FrameField,
    det_name: &str,
    orient_name: &str,
    point: Option<PointRef>,
    x: &ChartPoint,
    report: &mut Report,
) {
    match frame.checked_matrix(x) {
        Ok(e) => {
            report.push(Record::status(
                det_name,
                point,
                true,
                json!({ "det": det4(&e) }),
            ));
            let flags = frame_admissibility(&e);
            report.push(Record::status(
                orient_name,
                point,
                flags.admissible(),
                json!({ "oriented": flags.oriented, "forward": flags.forward }),
            ));
        }
        Err(e) => {
            report.push(Record::failure(det_name, point, e.to_string()));
            report.push(Record::failure(orient_name, point, e.to_string()));
        }
    }
}

fn frame_group(scenario: &Scenario, ts: f64, points: &[ChartPoint], report: &mut Report) {
    let companion_metric = scenario
        .companion
        .as_ref()
        .map(|companion| companion.pullback_tensor2(&scenario.metric));
    for (index, x) in points.iter().enumerate() {
        let pt = point_ref(index, x);
        frame_matrix_records(
            &scenario.frame,
            "frame_determinant",
            "frame_orientation",
            pt,
            x,
            report,
        );
        if scenario.holonomic {
            let residual = scenario
                .frame
                .commutation_coefficients(x)
                .map(|c| c.max_abs());
            push_residual(
                report,
                "holonomic_null",
                pt,
                residual,
                10.0 * FD_RESIDUAL * ts,
                Value::Null,
            );
        }
        if let Some(companion) = &scenario.companion {
            frame_matrix_records(
                companion,
                "companion_determinant",
                "companion_orientation",
                pt,
                x,
                report,
            );
            // The companion must diagonalize the declared metric to the
            // constant canonical components.
            let pulled = companion_metric
                .as_ref()
                .expect("companion metric pullback exists")
                .eval(x);
            let target = constants().metric;
            let residual = max_abs_mat4(&mat4(|i, j| pulled[i][j] - target[i][j]));
            report.push(Record::check(
                "companion_orthonormality",
                pt,
                residual,
                CANCELLATION * ts,
                Value::Null,
            ));
        }
    }
}

// ---- connection group --------------------------------------------------

fn gamma_difference(a: &GammaCoeffs, b: &GammaCoeffs) -> f64 {
    max_abs_rank3(&rank3(|k, i, j| a.get(k, i, j) - b.get(k, i, j)))
}

fn spin_connection_difference(a: &SpinConnection, b: &SpinConnection) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..DIM {
        worst = worst.max(max_abs_cmat4(&cmat4(|aa, bb| {
            a.a[i][aa][bb] - b.a[i][aa][bb]
        })));
        worst = worst.max(max_abs_cmat4(&cmat4(|aa, bb| {
            a.abar[i][aa][bb] - b.abar[i][aa][bb]
        })));
    }
    worst
}

const ORTHONORMAL_CONNECTION_CHECKS: [&str; 4] = [
    "gamma_reduction",
    "spin_connection_reduction",
    "gamma_metric_antisymmetry",
    "spin_commutator_identity",
];

/// Reduction and transport checks that need an orthonormal frame; `metric`
/// must hold the constant canonical components in this gauge.
fn orthonormal_connection_records(
    frame: &FrameField,
    metric: &MatrixField,
    gauge: Option<&'static str>,
    ts: f64,
    point: Option<PointRef>,
    x: &ChartPoint,
    report: &mut Report,
) {
    let c = match frame.commutation_coefficients(x) {
        Ok(c) => c,
        Err(e) => {
            for name in ORTHONORMAL_CONNECTION_CHECKS {
                report.push(Record::failure(name, point, e.to_string()));
            }
            return;
        }
    };
    let gamma = gamma_orthonormal(&c);

    let general = gamma_general(metric, frame, x).map(|g| gamma_difference(&gamma, &g));
    push_residual(
        report,
        "gamma_reduction",
        point,
        general,
        FD_RESIDUAL * ts,
        gauge_values(gauge),
    );

    let reduced_conn = spin_connection_orthonormal(&gamma);
    let general_conn = spin_connection_general(&SpinTables::canonical(), &gamma, frame, x)
        .map(|g| spin_connection_difference(&reduced_conn, &g));
    push_residual(
        report,
        "spin_connection_reduction",
        point,
        general_conn,
        FD_RESIDUAL * ts,
        gauge_values(gauge),
    );

    report.push(Record::check(
        "gamma_metric_antisymmetry",
        point,
        metric_antisymmetry_residual(&gamma),
        CANCELLATION * ts,
        gauge_values(gauge),
    ));
    report.push(Record::check(
        "spin_commutator_identity",
        point,
        commutator_transport_residual(&gamma, &reduced_conn),
        CANCELLATION * ts,
        gauge_values(gauge),
    ));
}

fn connection_group(scenario: &Scenario, ts: f64, points: &[ChartPoint], report: &mut Report) {
    let canonical_metric = MatrixField::constant(constants().metric);
    let (frame, gauge) = spin_frame(scenario);
    for (index, x) in points.iter().enumerate() {
        let pt = point_ref(index, x);

        // Compatibility in the declared gauge: the connection of the
        // scenario metric must transport it to zero.
        let residual = (|| {
            let gamma = gamma_general(&scenario.metric, &scenario.frame, x)?;
            let mut worst = 0.0f64;
            for r in 0..DIM {
                let grad =
                    covariant_derivative_tensor2(&scenario.metric, &gamma, &scenario.frame, r, x)?;
                worst = worst.max(max_abs_mat4(&grad));
            }
            Ok(worst)
        })();
        push_residual(
            report,
            "metric_compatibility",
            pt,
            residual,
            FD_RESIDUAL * ts,
            Value::Null,
        );

        orthonormal_connection_records(frame, &canonical_metric, gauge, ts, pt, x, report);
    }
}

// ---- concordance group -------------------------------------------------

const CONCORDANCE_CHECKS: [&str; 5] = [
    "concordance_spin_metric",
    "concordance_chirality",
    "concordance_pairing",
    "concordance_gamma",
    "concordance_metric",
];

fn concordance_group(scenario: &Scenario, ts: f64, points: &[ChartPoint], report: &mut Report) {
    let (frame, gauge) = spin_frame(scenario);
    let tables = SpinTables::canonical();
    for (index, x) in points.iter().enumerate() {
        let pt = point_ref(index, x);
        let residuals = (|| {
            let c = frame.commutation_coefficients(x)?;
            let gamma = gamma_orthonormal(&c);
            let conn = spin_connection_orthonormal(&gamma);
            concordance_residuals(&tables, &gamma, &conn, frame, x)
        })();
        match residuals {
            Ok(res) => {
                for (short, value) in res.as_named() {
                    report.push(Record::check(
                        format!("concordance_{short}"),
                        pt,
                        value,
                        CONCORDANCE * ts,
                        gauge_values(gauge),
                    ));
                }
            }
            Err(e) => {
                for name in CONCORDANCE_CHECKS {
                    report.push(Record::failure(name, pt, e.to_string()));
                }
            }
        }
    }
}

// ---- deformation group -------------------------------------------------

fn deformation_group(scenario: &Scenario, ts: f64, points: &[ChartPoint], report: &mut Report) {
    let Some(pert) = &scenario.perturbation else {
        report.push(Record::status(
            "deformation_skipped",
            None,
            true,
            json!({ "reason": "scenario declares no perturbation" }),
        ));
        return;
    };

    let canonical_metric = MatrixField::constant(constants().metric);
    let companion_pert = scenario
        .companion
        .as_ref()
        .map(|companion| Perturbation::new(companion.pullback_tensor2(&pert.h), pert.eps));

    // Each entry: the gauge to run in, the delta kinds it carries, and the
    // note attached to its records.
    let mut gauges: Vec<(DeformationContext, &[DeltaKind], Option<&'static str>)> = Vec::new();
    if scenario.orthonormal {
        gauges.push((
            DeformationContext {
                frame: &scenario.frame,
                metric: &scenario.metric,
                pert,
                orthonormal: true,
            },
            &DeltaKind::ALL,
            None,
        ));
    } else {
        gauges.push((
            DeformationContext {
                frame: &scenario.frame,
                metric: &scenario.metric,
                pert,
                orthonormal: false,
            },
            &[DeltaKind::MetricInverse, DeltaKind::Connection],
            Some("chart"),
        ));
        gauges.push((
            DeformationContext {
                frame: scenario
                    .companion
                    .as_ref()
                    .expect("coordinate-gauge scenarios carry a companion frame"),
                metric: &canonical_metric,
                pert: companion_pert
                    .as_ref()
                    .expect("companion perturbation exists"),
                orthonormal: true,
            },
            &[
                DeltaKind::Pauli,
                DeltaKind::GammaTables,
                DeltaKind::SpinConnection,
            ],
            Some("companion"),
        ));
    }

    let min_order = RICHARDSON_MIN_ORDER / ts;
    for (index, x) in points.iter().enumerate() {
        let pt = point_ref(index, x);

        // Admissibility of the finite transform at the declared size.
        match build_tables(pert, &scenario.metric, x).and_then(|t| deformed_frame_transform(&t)) {
            Ok((f, flags)) => report.push(Record::status(
                "perturbation_admissible",
                pt,
                flags.admissible(),
                json!({ "det": det4(&f), "oriented": flags.oriented, "forward": flags.forward }),
            )),
            Err(e) => report.push(Record::failure(
                "perturbation_admissible",
                pt,
                e.to_string(),
            )),
        }

        for (ctx, kinds, gauge) in &gauges {
            if *gauge != Some("chart") {
                // First-order restoration of the frame metric under the
                // deformed transform; quadratic in the deformation size.
                match ctx.orthonormality_residual(pert.eps, x) {
                    Ok(r) => report.push(Record::informational(
                        "orthonormality_restored",
                        pt,
                        r,
                        with_gauge(json!({ "eps": pert.eps }), *gauge),
                    )),
                    Err(e) => report.push(Record::failure(
                        "orthonormality_restored",
                        pt,
                        e.to_string(),
                    )),
                }
            }
            for &kind in *kinds {
                push_residual(
                    report,
                    &format!("delta_{}_linearity", kind.name()),
                    pt,
                    ctx.linearity_defect(kind, x),
                    LINEARITY * ts,
                    gauge_values(*gauge),
                );
                let order_name = format!("delta_{}_order", kind.name());
                match ctx.convergence_samples(kind, &scenario.eps_ladder, x) {
                    Ok(samples) => {
                        let order = fit_order(&samples);
                        let pass = order.is_none_or(|o| o >= min_order);
                        report.push(Record::status(
                            order_name,
                            pt,
                            pass,
                            with_gauge(
                                json!({
                                    "order": order,
                                    "min_order": min_order,
                                    "samples": samples,
                                }),
                                *gauge,
                            ),
                        ));
                    }
                    Err(e) => report.push(Record::failure(order_name, pt, e.to_string())),
                }
            }
        }
    }
}

// ---- matter group ------------------------------------------------------

fn matter_group(scenario: &Scenario, ts: f64, points: &[ChartPoint], report: &mut Report) {
    let Some(psi) = &scenario.spinor else {
        report.push(Record::status(
            "matter_skipped",
            None,
            true,
            json!({ "reason": "scenario declares no matter field" }),
        ));
        return;
    };
    let consts = &scenario.physical;
    let on_shell = scenario.spinor_on_shell;
    // Scenario validation guarantees matter fields only appear over
    // orthonormal frames.
    let frame = &scenario.frame;

    for (index, x) in points.iter().enumerate() {
        let pt = point_ref(index, x);
        let setup = frame.commutation_coefficients(x).map(|c| {
            let gamma = gamma_orthonormal(&c);
            let conn = spin_connection_orthonormal(&gamma);
            (gamma, conn)
        });
        let (gamma, conn) = match setup {
            Ok(pair) => pair,
            Err(e) => {
                report.push(Record::failure("matter_setup", pt, e.to_string()));
                continue;
            }
        };

        match dirac_residual(psi, &conn, frame, consts, x) {
            Ok(r) if on_shell => report.push(Record::check(
                "dirac_residual",
                pt,
                r,
                DIRAC_RESIDUAL_REL * ts,
                Value::Null,
            )),
            Ok(r) => report.push(Record::informational(
                "dirac_residual",
                pt,
                r,
                json!({ "note": "field not declared as an exact solution" }),
            )),
            Err(e) => report.push(Record::failure("dirac_residual", pt, e.to_string())),
        }

        match lagrangian_density(psi, &conn, frame, consts, x) {
            Ok(density) => {
                let floor = f64::MIN_POSITIVE;
                report.push(Record::check(
                    "lagrangian_imag",
                    pt,
                    density.imag_defect / (density.scale + floor),
                    DENSITY_IMAG * ts,
                    json!({
                        "kinetic": density.kinetic,
                        "massive": density.massive,
                        "total": density.total,
                    }),
                ));
                if on_shell {
                    report.push(Record::check(
                        "onshell_lagrangian",
                        pt,
                        density.total.abs() / (density.scale + floor),
                        ONSHELL_DENSITY_REL * ts,
                        Value::Null,
                    ));
                }
            }
            Err(e) => {
                report.push(Record::failure("lagrangian_imag", pt, e.to_string()));
                if on_shell {
                    report.push(Record::failure("onshell_lagrangian", pt, e.to_string()));
                }
            }
        }

        match stress_tensor(psi, &conn, frame, consts, x) {
            Ok(stress) => {
                let floor = f64::MIN_POSITIVE;
                report.push(Record::check(
                    "stress_imag",
                    pt,
                    stress.max_imag / (stress.scale + floor),
                    STRESS_IMAG * ts,
                    Value::Null,
                ));
                report.push(Record::check(
                    "stress_asymmetry",
                    pt,
                    stress.max_asymmetry / (stress.scale + floor),
                    STRESS_ASYMMETRY * ts,
                    Value::Null,
                ));
            }
            Err(e) => {
                report.push(Record::failure("stress_imag", pt, e.to_string()));
                report.push(Record::failure("stress_asymmetry", pt, e.to_string()));
            }
        }

        match trace_identity_residual(psi, &conn, frame, consts, x) {
            Ok(r) if on_shell => report.push(Record::check(
                "stress_trace_identity",
                pt,
                r,
                TRACE_IDENTITY_REL * ts,
                Value::Null,
            )),
            Ok(r) => report.push(Record::informational(
                "stress_trace_identity",
                pt,
                r,
                json!({ "note": "trace identity holds exactly only for solutions" }),
            )),
            Err(e) => report.push(Record::failure("stress_trace_identity", pt, e.to_string())),
        }

        if let Some(pert) = &scenario.perturbation {
            match delta_lagrangian(psi, pert, &gamma, &conn, frame, consts, x) {
                Ok(dl) => report.push(Record::check(
                    "lagrangian_chain_equivalence",
                    pt,
                    (dl.full - dl.symmetrized).abs() / (dl.scale + f64::MIN_POSITIVE),
                    DENSITY_CHAIN_EQUIV_REL * ts,
                    json!({
                        "full": dl.full,
                        "reduced": dl.reduced,
                        "symmetrized": dl.symmetrized,
                    }),
                )),
                Err(e) => report.push(Record::failure(
                    "lagrangian_chain_equivalence",
                    pt,
                    e.to_string(),
                )),
            }
            match variational_residual(psi, pert, frame, consts, x) {
                Ok(vc) => report.push(Record::check(
                    "variational_identity",
                    pt,
                    vc.residual_rel,
                    VARIATIONAL_REL * ts,
                    json!({ "contraction": vc.contraction, "response": vc.response }),
                )),
                Err(e) => report.push(Record::failure("variational_identity", pt, e.to_string())),
            }
        }
    }
}
