//! Massive spin-1/2 matter over an orthonormal frame: plane-wave solutions,
//! the field equation residual, the Lagrangian density, its response to
//! metric deformations, and the energy-momentum tensor.
//!
//! Conventions: the frame is orthonormal, so the constant canonical tables
//! apply; the time coordinate is `x^0 = c t`; a field obeys
//! `i hbar sum gamma^a_{bp} g^{pq} nabla_q psi^b = m c psi^a`. The
//! energy-momentum tensor is assembled from five groups of bilinears; the
//! last three combine to `-c L g_ij`, which makes the variational identity
//! linking it to the deformation response of `L` exact.

use num_complex::Complex64;

use crate::connection::{
    covariant_derivative_spinor, covariant_derivative_spinor_conj, GammaCoeffs, SpinConnection,
};
use crate::deformation::{build_tables, delta_gamma_tables, delta_spin_connection, Perturbation};
use crate::error::{Error, Result};
use crate::field::{ChartPoint, ComplexField, MatrixField, SpinorField};
use crate::frame_geometry::FrameField;
use crate::linalg::{cr, csum1, cvec4, mat4, sum2, CMat4, CVec4, Mat4, DIM};
use crate::rng::SplitMix64;
use crate::spin_algebra::constants;
use crate::tolerances::REALITY_GUARD_REL;

/// Unit system and particle mass for the matter formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant.
    pub hbar: f64,
    /// Speed of light.
    pub c: f64,
    /// Newtonian constant of gravitation.
    pub gravitational: f64,
    /// Particle mass.
    pub mass: f64,
}

impl PhysicalConstants {
    /// CGS values with the electron mass.
    pub fn cgs_electron() -> Self {
        PhysicalConstants {
            hbar: 1.054_571_817e-27,
            c: 2.997_924_58e10,
            gravitational: 6.674_28e-8,
            mass: 9.109_383_701_5e-28,
        }
    }

    /// Geometrized units: `hbar = c = 1` and unit mass.
    pub fn natural() -> Self {
        PhysicalConstants {
            hbar: 1.0,
            c: 1.0,
            gravitational: 1.0,
            mass: 1.0,
        }
    }

    pub fn with_mass(self, mass: f64) -> Self {
        PhysicalConstants { mass, ..self }
    }

    /// Rest momentum `m c`.
    pub fn rest_momentum(&self) -> f64 {
        self.mass * self.c
    }

    /// Coupling `8 pi G / c^4` of the field equation sourcing geometry from
    /// the energy-momentum tensor.
    pub fn einstein_coupling(&self) -> f64 {
        8.0 * std::f64::consts::PI * self.gravitational / self.c.powi(4)
    }
}

/// Energy of a plane-wave mode with spatial momentum `p3`:
/// `sqrt((m c^2)^2 + c^2 |p|^2)`.
pub fn plane_wave_energy(p3: [f64; 3], consts: &PhysicalConstants) -> f64 {
    let mc2 = consts.mass * consts.c * consts.c;
    let p2 = p3.iter().map(|x| x * x).sum::<f64>();
    (mc2 * mc2 + consts.c * consts.c * p2).sqrt()
}

fn cdot(a: &CVec4, b: &CVec4) -> Complex64 {
    csum1(|i| a[i].conj() * b[i])
}

fn cnorm(a: &CVec4) -> f64 {
    cdot(a, a).re.sqrt()
}

fn cmatvec(m: &CMat4, v: &CVec4) -> CVec4 {
    cvec4(|a| csum1(|b| m[a][b] * v[b]))
}

/// Pairing scalar `sum D_{a ad} bar^{ad} plain^a` of a conjugate-index and a
/// plain-index spinor value.
pub fn pairing_scalar(bar: &CVec4, plain: &CVec4) -> Complex64 {
    let k = constants();
    let mut s = cr(0.0);
    for a in 0..DIM {
        for ad in 0..DIM {
            s += k.pairing[a][ad] * bar[ad] * plain[a];
        }
    }
    s
}

/// Constant polarization spinors of the positive-energy plane-wave family
/// with spatial momentum `p3`: an orthonormal pair spanning the kernel of
/// `Q - m c` with `Q = gamma_0 E/c + sum gamma_k p_k`.
pub fn plane_wave_basis(p3: [f64; 3], consts: &PhysicalConstants) -> Result<[CVec4; 2]> {
    let k = constants();
    let mc = consts.rest_momentum();
    if mc <= 0.0 {
        return Err(Error::invalid("plane waves need a positive rest momentum"));
    }
    let e_over_c = plane_wave_energy(p3, consts) / consts.c;

    // Momentum operator and the projector onto its m c eigenspace.
    let mut q = crate::linalg::zero_cmat4();
    for a in 0..DIM {
        for b in 0..DIM {
            q[a][b] = k.gamma[0][a][b] * e_over_c
                + k.gamma[1][a][b] * p3[0]
                + k.gamma[2][a][b] * p3[1]
                + k.gamma[3][a][b] * p3[2];
        }
    }
    let proj = crate::linalg::cmat4(|a, b| {
        let ident = if a == b { cr(1.0) } else { cr(0.0) };
        (q[a][b] + ident * mc) * (1.0 / (2.0 * mc))
    });

    let mut basis: Vec<CVec4> = Vec::new();
    for col in 0..DIM {
        let column = cvec4(|a| proj[a][col]);
        let col_norm = cnorm(&column);
        let mut v = column;
        for u in &basis {
            let overlap = cdot(u, &v);
            for a in 0..DIM {
                v[a] -= overlap * u[a];
            }
        }
        let rem = cnorm(&v);
        if rem > 1e-8 * col_norm.max(1e-300) {
            let inv = 1.0 / rem;
            basis.push(cvec4(|a| v[a] * inv));
        }
        if basis.len() == 2 {
            break;
        }
    }
    if basis.len() != 2 {
        return Err(Error::invalid("plane-wave projector is rank-deficient"));
    }
    Ok([basis[0], basis[1]])
}

/// Plane-wave solution of the field equation over a flat chart with
/// `x^0 = c t`: `psi(x) = u exp(i phi)` with
/// `phi = (-(E/c) x^0 + sum p_k x^k) / hbar` and `u` the `branch`-th
/// polarization from [`plane_wave_basis`]. Components carry analytic
/// gradients.
pub fn plane_wave(p3: [f64; 3], consts: &PhysicalConstants, branch: usize) -> Result<SpinorField> {
    if branch >= 2 {
        return Err(Error::invalid("plane-wave branch must be 0 or 1"));
    }
    let u = plane_wave_basis(p3, consts)?[branch];
    let wave: [f64; DIM] = [
        -plane_wave_energy(p3, consts) / (consts.c * consts.hbar),
        p3[0] / consts.hbar,
        p3[1] / consts.hbar,
        p3[2] / consts.hbar,
    ];
    Ok(SpinorField::from_fn(|a| {
        let amp = u[a];
        let field = ComplexField::new(move |p: &ChartPoint| {
            let phase = wave[0] * p[0] + wave[1] * p[1] + wave[2] * p[2] + wave[3] * p[3];
            amp * Complex64::new(0.0, phase).exp()
        });
        field.with_gradient(move |p: &ChartPoint| {
            let phase = wave[0] * p[0] + wave[1] * p[1] + wave[2] * p[2] + wave[3] * p[3];
            let value = amp * Complex64::new(0.0, phase).exp();
            std::array::from_fn(|mu| Complex64::new(0.0, wave[mu]) * value)
        })
    }))
}

/// Relative residual of the field equation
/// `i hbar sum gamma^a_{bp} g^{pq} nabla_q psi^b - m c psi^a` at a point,
/// measured against `m c |psi| + |kinetic part|`.
pub fn dirac_residual(
    psi: &SpinorField,
    conn: &SpinConnection,
    frame: &FrameField,
    consts: &PhysicalConstants,
    p: &ChartPoint,
) -> Result<f64> {
    let k = constants();
    let mc = consts.rest_momentum();
    let value = psi.eval(p);
    let mut grads: [CVec4; DIM] = [cvec4(|_| cr(0.0)); DIM];
    for q in 0..DIM {
        grads[q] = covariant_derivative_spinor(psi, conn, frame, q, p)?;
    }
    let kinetic = cvec4(|a| {
        let mut s = cr(0.0);
        for pp in 0..DIM {
            for q in 0..DIM {
                if k.metric_dual[pp][q] != 0.0 {
                    s += csum1(|b| k.gamma[pp][a][b] * grads[q][b]) * k.metric_dual[pp][q];
                }
            }
        }
        s * Complex64::new(0.0, consts.hbar)
    });
    let residual = cvec4(|a| kinetic[a] - value[a] * mc);
    let scale = mc * cnorm(&value) + cnorm(&kinetic);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(cnorm(&residual) / scale)
}

/// Lagrangian density split into its kinetic and massive parts, with the
/// size of the imaginary defect and the cancellation-aware magnitude scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub kinetic: f64,
    pub massive: f64,
    pub total: f64,
    /// Largest imaginary part left after the reality identity has acted.
    pub imag_defect: f64,
    /// Sum of the term magnitudes, for relative comparisons.
    pub scale: f64,
}

/// Lagrangian density of the field at a point with the canonical constant
/// tables. Fails with a reality violation when the imaginary part exceeds
/// its guard share of the term magnitudes.
pub fn lagrangian_density(
    psi: &SpinorField,
    conn: &SpinConnection,
    frame: &FrameField,
    consts: &PhysicalConstants,
    p: &ChartPoint,
) -> Result<DensityValue> {
    let k = constants();
    lagrangian_density_with(&k.pairing, &k.gamma, psi, conn, frame, consts, p)
}

/// Same density, but with caller-supplied pairing and gamma tables; the
/// reality guard then detects tables that break the conjugation identity
/// tying the two.
pub fn lagrangian_density_with(
    pairing: &CMat4,
    gamma_tables: &[CMat4; 4],
    psi: &SpinorField,
    conn: &SpinConnection,
    frame: &FrameField,
    consts: &PhysicalConstants,
    p: &ChartPoint,
) -> Result<DensityValue> {
    let k = constants();
    let mc = consts.rest_momentum();
    let value = psi.eval(p);
    let value_bar = psi.eval_conj(p);

    let pair_with = |bar: &CVec4, plain: &CVec4| -> Complex64 {
        let mut s = cr(0.0);
        for a in 0..DIM {
            for ad in 0..DIM {
                s += pairing[a][ad] * bar[ad] * plain[a];
            }
        }
        s
    };

    let mut forward = cr(0.0);
    let mut backward = cr(0.0);
    for q in 0..DIM {
        let grad = covariant_derivative_spinor(psi, conn, frame, q, p)?;
        let grad_bar = covariant_derivative_spinor_conj(psi, conn, frame, q, p)?;
        for pp in 0..DIM {
            let w = k.metric_dual[pp][q];
            if w != 0.0 {
                forward += pair_with(&value_bar, &cmatvec(&gamma_tables[pp], &grad)) * w;
                backward += pair_with(&grad_bar, &cmatvec(&gamma_tables[pp], &value)) * w;
            }
        }
    }
    let i_hbar = Complex64::new(0.0, consts.hbar);
    let kinetic = i_hbar * (forward - backward) * 0.5;
    let massive = pair_with(&value_bar, &value) * (-mc);

    let total = kinetic + massive;
    let scale = consts.hbar * 0.5 * (forward.norm() + backward.norm()) + massive.norm();
    let imag_defect = total.im.abs();
    if imag_defect > REALITY_GUARD_REL * scale {
        return Err(Error::RealityIdentityViolated);
    }
    Ok(DensityValue {
        kinetic: kinetic.re,
        massive: massive.re,
        total: total.re,
        imag_defect,
        scale,
    })
}

/// Energy-momentum tensor at a point together with its numerical health:
/// the largest imaginary part discarded and the largest symmetry defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressTensor {
    pub t: Mat4,
    pub max_imag: f64,
    pub max_asymmetry: f64,
    /// Largest cancellation-aware magnitude across entries.
    pub scale: f64,
}

/// Energy-momentum tensor of the field: two symmetrized derivative groups,
/// two trace groups proportional to the kinetic density, and the massive
/// group, the last three combining to `-c L g_ij`.
pub fn stress_tensor(
    psi: &SpinorField,
    conn: &SpinConnection,
    frame: &FrameField,
    consts: &PhysicalConstants,
    p: &ChartPoint,
) -> Result<StressTensor> {
    let k = constants();
    let mc = consts.rest_momentum();
    let hc = consts.hbar * consts.c;
    let value = psi.eval(p);
    let value_bar = psi.eval_conj(p);

    let mut grads: [CVec4; DIM] = [cvec4(|_| cr(0.0)); DIM];
    let mut grads_bar: [CVec4; DIM] = [cvec4(|_| cr(0.0)); DIM];
    for q in 0..DIM {
        grads[q] = covariant_derivative_spinor(psi, conn, frame, q, p)?;
        grads_bar[q] = covariant_derivative_spinor_conj(psi, conn, frame, q, p)?;
    }

    // b_forward[i][j] pairs psi-bar against gamma_i acting on nabla_j psi;
    // b_backward[i][j] pairs nabla_j psi-bar against gamma_i acting on psi.
    let mut b_forward = [[cr(0.0); DIM]; DIM];
    let mut b_backward = [[cr(0.0); DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            b_forward[i][j] = pairing_scalar(&value_bar, &cmatvec(&k.gamma[i], &grads[j]));
            b_backward[i][j] = pairing_scalar(&grads_bar[j], &cmatvec(&k.gamma[i], &value));
        }
    }
    let mut trace_forward = cr(0.0);
    let mut trace_backward = cr(0.0);
    for pp in 0..DIM {
        for q in 0..DIM {
            let w = k.metric_dual[pp][q];
            if w != 0.0 {
                trace_forward += b_forward[pp][q] * w;
                trace_backward += b_backward[pp][q] * w;
            }
        }
    }
    let mass_scalar = pairing_scalar(&value_bar, &value);

    let i_hbar_c = Complex64::new(0.0, hc);
    let mut t = [[0.0; DIM]; DIM];
    let mut max_imag = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..DIM {
        for j in 0..DIM {
            let g1 = i_hbar_c * (b_forward[i][j] + b_forward[j][i]) * 0.25;
            let g2 = -i_hbar_c * (b_backward[i][j] + b_backward[j][i]) * 0.25;
            let g3 = i_hbar_c * trace_backward * 0.5 * k.metric[i][j];
            let g4 = -i_hbar_c * trace_forward * 0.5 * k.metric[i][j];
            let g5 = cr(mc * consts.c * k.metric[i][j]) * mass_scalar;
            let entry = g1 + g2 + g3 + g4 + g5;
            t[i][j] = entry.re;
            max_imag = max_imag.max(entry.im.abs());
            scale = scale.max(g1.norm() + g2.norm() + g3.norm() + g4.norm() + g5.norm());
        }
    }
    let max_asymmetry = crate::linalg::max_abs_mat4(&mat4(|i, j| t[i][j] - t[j][i]));
    Ok(StressTensor {
        t,
        max_imag,
        max_asymmetry,
        scale,
    })
}

/// First-order response of the Lagrangian density to a metric deformation,
/// computed along three routes that must agree: the full chain through the
/// gamma-table, dual-metric, and spinor-connection deltas; the reduced
/// contraction against the raised perturbation; and its explicitly
/// symmetrized form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaLagrangian {
    pub full: f64,
    pub reduced: f64,
    pub symmetrized: f64,
    /// Largest imaginary part across the three routes.
    pub max_imag: f64,
    /// Magnitude scale of the reduced route, for relative comparisons.
    pub scale: f64,
}

/// Evaluates the deformation response of the density along all three
/// routes. The spinor-connection contribution inside the full route must
/// cancel pointwise, so `full` and `symmetrized` agreeing is a nontrivial
/// consistency check of the whole delta calculus.
pub fn delta_lagrangian(
    psi: &SpinorField,
    pert: &Perturbation,
    gamma: &GammaCoeffs,
    conn: &SpinConnection,
    frame: &FrameField,
    consts: &PhysicalConstants,
    p: &ChartPoint,
) -> Result<DeltaLagrangian> {
    let k = constants();
    let metric = MatrixField::constant(k.metric);
    let tables = build_tables(pert, &metric, p)?;
    let dgamma = delta_gamma_tables(&tables);
    let dconn = delta_spin_connection(pert, gamma, frame, p)?;

    let value = psi.eval(p);
    let value_bar = psi.eval_conj(p);
    let mut grads: [CVec4; DIM] = [cvec4(|_| cr(0.0)); DIM];
    let mut grads_bar: [CVec4; DIM] = [cvec4(|_| cr(0.0)); DIM];
    for q in 0..DIM {
        grads[q] = covariant_derivative_spinor(psi, conn, frame, q, p)?;
        grads_bar[q] = covariant_derivative_spinor_conj(psi, conn, frame, q, p)?;
    }

    let i_hbar = Complex64::new(0.0, consts.hbar);

    // Full chain: table deltas against the bilinears, plus the
    // spinor-connection delta inside the covariant derivatives.
    let mut table_part = cr(0.0);
    let mut conn_part = cr(0.0);
    for pp in 0..DIM {
        for q in 0..DIM {
            let dmix = cr(tables.delta_g_up[pp][q]);
            let gup = cr(k.metric_dual[pp][q]);
            let fwd = pairing_scalar(&value_bar, &cmatvec(&dgamma[pp], &grads[q]));
            let bwd = pairing_scalar(&grads_bar[q], &cmatvec(&dgamma[pp], &value));
            table_part += (fwd - bwd) * 0.5 * gup;
            let fwd0 = pairing_scalar(&value_bar, &cmatvec(&k.gamma[pp], &grads[q]));
            let bwd0 = pairing_scalar(&grads_bar[q], &cmatvec(&k.gamma[pp], &value));
            table_part += (fwd0 - bwd0) * 0.5 * dmix;

            if k.metric_dual[pp][q] != 0.0 {
                let da_psi = cmatvec(&dconn.a[q], &value);
                let dabar_psibar = cmatvec(&dconn.abar[q], &value_bar);
                let fwd_a = pairing_scalar(&value_bar, &cmatvec(&k.gamma[pp], &da_psi));
                let bwd_a = pairing_scalar(&dabar_psibar, &cmatvec(&k.gamma[pp], &value));
                conn_part += (fwd_a - bwd_a) * 0.5 * gup;
            }
        }
    }
    let full = i_hbar * (table_part + conn_part);

    // Reduced contraction against eps h^{pq}.
    let mut reduced_sum = cr(0.0);
    let mut reduced_mag = 0.0f64;
    for pp in 0..DIM {
        for q in 0..DIM {
            let eh = tables.delta_g_up[pp][q];
            if eh != 0.0 {
                let fwd = pairing_scalar(&value_bar, &cmatvec(&k.gamma[pp], &grads[q]));
                let bwd = pairing_scalar(&grads_bar[q], &cmatvec(&k.gamma[pp], &value));
                reduced_sum += (fwd - bwd) * 0.25 * eh;
                reduced_mag += (fwd.norm() + bwd.norm()) * 0.25 * eh.abs() * consts.hbar;
            }
        }
    }
    let reduced = i_hbar * reduced_sum;

    // Explicit symmetrization over the two contraction legs.
    let mut sym_sum = cr(0.0);
    for pp in 0..DIM {
        for q in 0..DIM {
            let eh = tables.delta_g_up[pp][q];
            if eh != 0.0 {
                let fwd = pairing_scalar(&value_bar, &cmatvec(&k.gamma[pp], &grads[q]))
                    + pairing_scalar(&value_bar, &cmatvec(&k.gamma[q], &grads[pp]));
                let bwd = pairing_scalar(&grads_bar[q], &cmatvec(&k.gamma[pp], &value))
                    + pairing_scalar(&grads_bar[pp], &cmatvec(&k.gamma[q], &value));
                sym_sum += (fwd - bwd) * 0.125 * eh;
            }
        }
    }
    let symmetrized = i_hbar * sym_sum;

    let max_imag = full
        .im
        .abs()
        .max(reduced.im.abs())
        .max(symmetrized.im.abs());
    Ok(DeltaLagrangian {
        full: full.re,
        reduced: reduced.re,
        symmetrized: symmetrized.re,
        max_imag,
        scale: reduced_mag,
    })
}

/// Both sides of the identity tying the energy-momentum tensor to the
/// deformation response of the density, and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalCheck {
    /// `sum T_ij eps h^{ij}`.
    pub contraction: f64,
    /// `2 c (delta L - L sum g_ij eps h^{ij} / 2)`.
    pub response: f64,
    pub residual_rel: f64,
}

/// Verifies `sum T_ij eps h^{ij} = 2 c (delta L - L sum g_ij eps h^{ij}/2)`
/// at a point, with the connection pair induced by the frame.
pub fn variational_residual(
    psi: &SpinorField,
    pert: &Perturbation,
    frame: &FrameField,
    consts: &PhysicalConstants,
    p: &ChartPoint,
) -> Result<VariationalCheck> {
    let k = constants();
    let c = frame.commutation_coefficients(p)?;
    let gamma = crate::connection::gamma_orthonormal(&c);
    let conn = crate::connection::spin_connection_orthonormal(&gamma);

    let metric = MatrixField::constant(k.metric);
    let tables = build_tables(pert, &metric, p)?;
    let stress = stress_tensor(psi, &conn, frame, consts, p)?;
    let density = lagrangian_density(psi, &conn, frame, consts, p)?;
    let response_delta = delta_lagrangian(psi, pert, &gamma, &conn, frame, consts, p)?;

    let contraction = sum2(|i, j| stress.t[i][j] * tables.delta_g_up[i][j]);
    let contraction_mag = sum2(|i, j| (stress.t[i][j] * tables.delta_g_up[i][j]).abs());
    let volume_trace = sum2(|i, j| k.metric[i][j] * tables.delta_g_up[i][j]);
    let response = 2.0 * consts.c * (response_delta.full - 0.5 * density.total * volume_trace);

    let scale = contraction_mag
        + 2.0 * consts.c * response_delta.scale
        + (consts.c * density.scale * volume_trace).abs();
    let residual = (contraction - response).abs();
    let residual_rel = if scale == 0.0 { 0.0 } else { residual / scale };
    Ok(VariationalCheck {
        contraction,
        response,
        residual_rel,
    })
}

/// Relative residual of the on-shell trace identity
/// `sum g^{ij} T_ij = m c^2 sum D_{a ad} psibar^{ad} psi^a`; meaningful for
/// solutions of the field equation.
pub fn trace_identity_residual(
    psi: &SpinorField,
    conn: &SpinConnection,
    frame: &FrameField,
    consts: &PhysicalConstants,
    p: &ChartPoint,
) -> Result<f64> {
    let k = constants();
    let stress = stress_tensor(psi, conn, frame, consts, p)?;
    let trace = sum2(|i, j| k.metric_dual[i][j] * stress.t[i][j]);
    let mass_scalar = pairing_scalar(&psi.eval_conj(p), &psi.eval(p));
    let target = consts.mass * consts.c * consts.c * mass_scalar.re;
    let scale = trace.abs() + target.abs() + stress.scale;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((trace - target).abs() / scale)
}

/// Random spinor field built from a few plane-wave modes with complex
/// amplitudes, carrying analytic gradients. Amplitudes are uniform in
/// `[-amplitude, amplitude]` per real component, wave covectors uniform in
/// `[-wave_scale, wave_scale]`.
pub fn random_spinor_field(rng: &mut SplitMix64, amplitude: f64, wave_scale: f64) -> SpinorField {
    const MODES: usize = 3;
    let waves: [[f64; DIM]; MODES] =
        std::array::from_fn(|_| std::array::from_fn(|_| rng.uniform(-wave_scale, wave_scale)));
    let coeffs: [[Complex64; MODES]; DIM] = std::array::from_fn(|_| {
        std::array::from_fn(|_| {
            Complex64::new(
                rng.uniform(-amplitude, amplitude),
                rng.uniform(-amplitude, amplitude),
            )
        })
    });
    SpinorField::from_fn(|a| {
        let c_row = coeffs[a];
        let field = ComplexField::new(move |p: &ChartPoint| {
            let mut s = Complex64::new(0.0, 0.0);
            for m in 0..MODES {
                let phase = waves[m][0] * p[0]
                    + waves[m][1] * p[1]
                    + waves[m][2] * p[2]
                    + waves[m][3] * p[3];
                s += c_row[m] * Complex64::new(0.0, phase).exp();
            }
            s
        });
        field.with_gradient(move |p: &ChartPoint| {
            std::array::from_fn(|mu| {
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..MODES {
                    let phase = waves[m][0] * p[0]
                        + waves[m][1] * p[1]
                        + waves[m][2] * p[2]
                        + waves[m][3] * p[3];
                    s += c_row[m]
                        * Complex64::new(0.0, waves[m][mu])
                        * Complex64::new(0.0, phase).exp();
                }
                s
            })
        })
    })
}
