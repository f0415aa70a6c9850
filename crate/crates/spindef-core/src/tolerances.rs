//! Central registry of numeric thresholds.
//!
//! Every gate used by the check suites lives here with a note on where it
//! applies, so the acceptance bars are auditable in one place. Scenario runs
//! can scale the residual tolerances uniformly with `--tolerance-scale`; the
//! convergence-order floor and the structural guards are not scaled.

/// Relative step for second-order central differences. Balances truncation
/// (`step^2`) against round-off (`eps_f64 / step`) for fields of order one.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A frame counts as degenerate when `|det e|` falls below this factor times
/// the product of the row norms of its coefficient matrix.
pub const FRAME_DEGENERACY_REL: f64 = 1e-10;

/// Positivity margin for the orientation (`det F > 0`) and polarization
/// (`F^0_0 > 0`) flags of a frame transform.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-12;

/// Bound for identities between constant matrix tables when evaluated in
/// floating point (the same identities also hold exactly in integer form).
pub const EXACT_IDENTITY: f64 = 1e-15;

/// Bound for residuals that vanish identically in a flat scenario
/// (connection coefficients, transport residuals, stress tensor of a zero
/// field).
pub const FLAT_NULL: f64 = 1e-12;

/// Bound for residuals limited only by derivative accuracy: agreement of the
/// general and reduced connection formulas, and the holonomic-null check on
/// commutation coefficients (which uses `10 x` this value to leave room for
/// finite-difference noise on rough user fields).
pub const FD_RESIDUAL: f64 = 1e-8;

/// Bound for pointwise cancellation identities of the connection
/// (commutator-transport identity and metric antisymmetry of the lowered
/// connection) evaluated with analytic derivatives.
pub const CANCELLATION: f64 = 1e-12;

/// Bound for linearity of every first-order delta in the perturbation.
pub const LINEARITY: f64 = 1e-12;

/// Minimum fitted convergence order for a first-order delta checked against
/// its finite-transform oracle: the error must shrink like `eps^2`, so the
/// fitted slope has to stay near 2.
pub const RICHARDSON_MIN_ORDER: f64 = 1.8;

/// Oracle errors below this are treated as exactly zero and exempt from the
/// order fit (the delta reproduced the finite transform to round-off).
pub const RICHARDSON_NOISE_FLOOR: f64 = 1e-13;

/// Default deformation sizes for convergence-order fits.
pub const EPS_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Bound for the five transport residuals of the constant tables on curved
/// scenarios with analytic derivatives.
pub const CONCORDANCE: f64 = 1e-8;

/// Relative bound for the first-order operator residual of an exact
/// plane-wave solution.
pub const DIRAC_RESIDUAL_REL: f64 = 1e-8;

/// Relative bound for the scalar density of an on-shell plane wave, which
/// vanishes identically.
pub const ONSHELL_DENSITY_REL: f64 = 1e-8;

/// Absolute bound for the imaginary part of the scalar density on unit-scale
/// inputs.
pub const DENSITY_IMAG: f64 = 1e-12;

/// Relative imaginary-part threshold above which the density is considered
/// structurally non-real (wrong conjugate inputs) rather than noisy, and an
/// error is raised.
pub const REALITY_GUARD_REL: f64 = 1e-9;

/// Absolute bound for imaginary parts of the energy-momentum components on
/// unit-scale inputs.
pub const STRESS_IMAG: f64 = 1e-12;

/// Absolute bound for the index-symmetry defect of the energy-momentum
/// tensor on unit-scale inputs.
pub const STRESS_ASYMMETRY: f64 = 1e-14;

/// Relative bound for the trace identity of the on-shell energy-momentum
/// tensor.
pub const TRACE_IDENTITY_REL: f64 = 1e-8;

/// Relative bound for the variational identity linking the energy-momentum
/// tensor to the first-order change of the action density.
pub const VARIATIONAL_REL: f64 = 1e-10;

/// Relative bound for agreement between the chain-rule and symmetrized forms
/// of the first-order density change.
pub const DENSITY_CHAIN_EQUIV_REL: f64 = 1e-10;

/// Relative symmetry defect above which a perturbation matrix is rejected.
pub const PERTURBATION_SYMMETRY: f64 = 1e-10;
