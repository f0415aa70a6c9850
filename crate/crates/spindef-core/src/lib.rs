//! Frame-based differential geometry for spinor fields: metric frames and
//! their commutation structure, the metric connection and its spinor-bundle
//! extension, first-order metric deformations of every structure table, and
//! the energy-momentum tensor of a massive spin-1/2 field.
//!
//! Everything is organized around evaluable fields over a 4D chart and a
//! residual-based verification vocabulary: each structural identity in the
//! chain has a function that returns the size of its violation, and the
//! check suite turns those residuals into pass/fail records.

// Index loops are kept where they mirror the tensor formulas they
// implement, `!(x > 0.0)` guards deliberately reject NaN, and the value
// enums carry fixed-size tables by design.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::large_enum_variant)]

pub mod connection;
pub mod deformation;
pub mod dirac_matter;
pub mod error;
pub mod expr;
pub mod field;
pub mod frame_geometry;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod spin_algebra;
pub mod suite;
pub mod tolerances;

pub use connection::{
    concordance_residuals, gamma_general, gamma_orthonormal, spin_connection_general,
    spin_connection_orthonormal, ConcordanceResiduals, GammaCoeffs, SpinConnection, SpinTables,
};
pub use deformation::{
    build_tables, delta_connection, delta_spin_connection, fit_order, DeformationContext,
    DeformationTables, DeltaKind, DeltaValue, Perturbation, SpinDeltas,
};
pub use dirac_matter::{
    dirac_residual, lagrangian_density, plane_wave, stress_tensor, trace_identity_residual,
    variational_residual, DeltaLagrangian, DensityValue, PhysicalConstants, StressTensor,
    VariationalCheck,
};
pub use error::{Error, Result};
pub use expr::Expr;
pub use field::{
    CMatrixField, ChartPoint, ComplexField, Field, MatrixField, ScalarField, SpinorField,
};
pub use frame_geometry::{CommutationCoeffs, FrameField, FrameFlags};
pub use linalg::{CMat2, CMat4, CVec4, Mat4, Rank3, Vec4, DIM};
pub use report::{constants_json, PointRef, Record, Report};
pub use rng::SplitMix64;
pub use scenario::{Scenario, ScenarioSpec};
pub use spin_algebra::{constants, SpinConstants};
pub use suite::{run_groups, run_suite, CheckGroup, SuiteConfig};
