//! First-order deformation calculus driven by a symmetric perturbation of
//! the metric.
//!
//! A deformation of size `eps` moves the frame by `F = id + eps f` with
//! `f^i_j = (1/2) sum_p g^{ip} h_{pj}`, which changes the metric components
//! by `-eps h_{ij}` and their duals by `+eps h^{ij}`. Every first-order
//! delta in this module is checked elsewhere against the corresponding
//! exact finite transform: the difference must shrink quadratically in
//! `eps`, and [`fit_order`] measures that rate.
//!
//! The spin-sector deltas and the spinor-connection delta are derived for
//! orthonormal frames (constant canonical tables); the metric-inverse and
//! connection deltas hold in any gauge.

use num_complex::Complex64;

use crate::connection::{
    covariant_derivative_tensor2, gamma_general, spin_connection_general,
    spin_connection_orthonormal, GammaCoeffs, SpinConnection, SpinTables,
};
use crate::error::{Error, Result};
use crate::field::{lin_comb, CMatrixField, ChartPoint, ComplexField, MatrixField, ScalarField};
use crate::frame_geometry::{frame_admissibility, FrameField, FrameFlags};
use crate::linalg::{
    cmat2, cmat4, cr, identity4, invert4, mat4, rank3, sum1, sum2, CMat2, CMat4, Mat4, Rank3, DIM,
};
use crate::spin_algebra::constants;
use crate::tolerances::{PERTURBATION_SYMMETRY, RICHARDSON_NOISE_FLOOR};

/// A symmetric rank-2 perturbation field together with the deformation size.
#[derive(Clone)]
pub struct Perturbation {
    /// Lower-index components `h_{ij}` in the active frame basis.
    pub h: MatrixField,
    pub eps: f64,
}

impl Perturbation {
    pub fn new(h: MatrixField, eps: f64) -> Self {
        Perturbation { h, eps }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Perturbation {
            h: self.h.clone(),
            eps,
        }
    }

    /// Same deformation size, perturbation scaled by `alpha` (for linearity
    /// checks).
    pub fn scaled(&self, alpha: f64) -> Self {
        Perturbation {
            h: self.h.scaled(alpha),
            eps: self.eps,
        }
    }
}

/// Pointwise data shared by all first-order deltas.
#[derive(Debug, Clone)]
pub struct DeformationTables {
    pub eps: f64,
    /// Metric components and their inverse at the point.
    pub g: Mat4,
    pub g_inv: Mat4,
    /// Perturbation with lower and raised indices.
    pub h_low: Mat4,
    pub h_up: Mat4,
    /// Mixed generator `f^i_j` and the frame transform `F = id + eps f`.
    pub f_mixed: Mat4,
    pub big_f: Mat4,
    /// First-order metric changes `-eps h_{ij}` and `+eps h^{ij}`.
    pub delta_g_low: Mat4,
    pub delta_g_up: Mat4,
}

/// Evaluates the deformation tables at a point, rejecting non-symmetric
/// perturbations and singular metrics.
pub fn build_tables(
    pert: &Perturbation,
    metric: &MatrixField,
    p: &ChartPoint,
) -> Result<DeformationTables> {
    let g = metric.eval(p);
    let g_inv = invert4(&g).ok_or(Error::MetricNotInvertible)?;
    let h_low = pert.h.eval(p);

    let scale = 1.0 + crate::linalg::max_abs_mat4(&h_low);
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            if (h_low[i][j] - h_low[j][i]).abs() > PERTURBATION_SYMMETRY * scale {
                return Err(Error::PerturbationNotSymmetric);
            }
        }
    }

    let f_mixed = mat4(|i, j| 0.5 * sum1(|q| g_inv[i][q] * h_low[q][j]));
    let big_f = mat4(|i, j| identity4()[i][j] + pert.eps * f_mixed[i][j]);
    let h_up = mat4(|i, j| sum2(|q, r| g_inv[i][q] * g_inv[j][r] * h_low[q][r]));

    Ok(DeformationTables {
        eps: pert.eps,
        g,
        g_inv,
        h_low,
        h_up,
        f_mixed,
        big_f,
        delta_g_low: mat4(|i, j| -pert.eps * h_low[i][j]),
        delta_g_up: mat4(|i, j| pert.eps * h_up[i][j]),
    })
}

/// The finite frame transform of the deformation and its admissibility
/// flags. Errors when the transform leaves the oriented, forward-pointing
/// class, which bounds how large `eps * h` may get.
pub fn deformed_frame_transform(t: &DeformationTables) -> Result<(Mat4, FrameFlags)> {
    let flags = frame_admissibility(&t.big_f);
    if !flags.admissible() {
        return Err(Error::DeformationTooLarge);
    }
    Ok((t.big_f, flags))
}

/// First-order deltas of the constant spin-sector tables. The two spinor
/// metrics and the pairing are deformation-invariant, so their deltas are
/// exact structural zeros; only the linking tables move.
#[derive(Debug, Clone)]
pub struct SpinDeltas {
    pub d2: CMat2,
    pub d4: CMat4,
    pub chirality: CMat4,
    pub pairing: CMat4,
    pub pauli: [CMat2; 4],
    pub gamma: [CMat4; 4],
}

/// Deltas of the 2-sector linking tables:
/// `delta G_k = -(1/2) sum_{p,q} g_{pk} G_q eps h^{pq}`.
pub fn delta_pauli(t: &DeformationTables) -> [CMat2; 4] {
    let k = constants();
    std::array::from_fn(|kk| {
        cmat2(|i, j| {
            let mut s = cr(0.0);
            for p in 0..DIM {
                for q in 0..DIM {
                    s += k.pauli[q][i][j] * (-0.5 * t.g[p][kk] * t.eps * t.h_up[p][q]);
                }
            }
            s
        })
    })
}

/// Equivalent lowered-index form of [`delta_pauli`]:
/// `delta G_k = -(1/2) sum_{p,q} g^{pq} G_q eps h_{pk}`.
pub fn delta_pauli_lowered(t: &DeformationTables) -> [CMat2; 4] {
    let k = constants();
    std::array::from_fn(|kk| {
        cmat2(|i, j| {
            let mut s = cr(0.0);
            for p in 0..DIM {
                for q in 0..DIM {
                    s += k.pauli[q][i][j] * (-0.5 * t.g_inv[p][q] * t.eps * t.h_low[p][kk]);
                }
            }
            s
        })
    })
}

/// Deltas of the gamma tables:
/// `delta gamma_k = -(1/2) sum_{p,q} g_{pk} gamma_q eps h^{pq}`.
pub fn delta_gamma_tables(t: &DeformationTables) -> [CMat4; 4] {
    let k = constants();
    std::array::from_fn(|kk| {
        cmat4(|a, b| {
            let mut s = cr(0.0);
            for p in 0..DIM {
                for q in 0..DIM {
                    s += k.gamma[q][a][b] * (-0.5 * t.g[p][kk] * t.eps * t.h_up[p][q]);
                }
            }
            s
        })
    })
}

/// Equivalent lowered-index form of [`delta_gamma_tables`].
pub fn delta_gamma_tables_lowered(t: &DeformationTables) -> [CMat4; 4] {
    let k = constants();
    std::array::from_fn(|kk| {
        cmat4(|a, b| {
            let mut s = cr(0.0);
            for p in 0..DIM {
                for q in 0..DIM {
                    s += k.gamma[q][a][b] * (-0.5 * t.g_inv[p][q] * t.eps * t.h_low[p][kk]);
                }
            }
            s
        })
    })
}

/// All spin-sector deltas in one bundle.
pub fn spin_deltas(t: &DeformationTables) -> SpinDeltas {
    SpinDeltas {
        d2: cmat2(|_, _| cr(0.0)),
        d4: crate::linalg::zero_cmat4(),
        chirality: crate::linalg::zero_cmat4(),
        pairing: crate::linalg::zero_cmat4(),
        pauli: delta_pauli(t),
        gamma: delta_gamma_tables(t),
    }
}

/// Covariant form of the connection delta, valid in any gauge:
/// `delta Gamma^k_{ij} = -(eps/2) sum_r g^{kr} (nabla_i h_{rj} +
/// nabla_j h_{ir} - nabla_r h_{ij})`.
pub fn delta_connection(
    pert: &Perturbation,
    metric: &MatrixField,
    gamma: &GammaCoeffs,
    frame: &FrameField,
    p: &ChartPoint,
) -> Result<Rank3> {
    let t = build_tables(pert, metric, p)?;
    let mut grad_h = [[[0.0; DIM]; DIM]; DIM]; // [r][j][k] = nabla_r h_{jk}
    for r in 0..DIM {
        grad_h[r] = covariant_derivative_tensor2(&pert.h, gamma, frame, r, p)?;
    }
    Ok(rank3(|k, i, j| {
        -0.5 * pert.eps
            * sum1(|r| t.g_inv[k][r] * (grad_h[i][r][j] + grad_h[j][i][r] - grad_h[r][i][j]))
    }))
}

/// Raw form of the connection delta over an orthonormal frame, with the
/// commutation terms written out; equivalent to [`delta_connection`] there.
pub fn delta_connection_raw(
    pert: &Perturbation,
    c: &crate::frame_geometry::CommutationCoeffs,
    frame: &FrameField,
    p: &ChartPoint,
) -> Result<Rank3> {
    let k = constants();
    let metric = MatrixField::constant(k.metric);
    let t = build_tables(pert, &metric, p)?;
    let eps = pert.eps;

    // lh[r][i][j] = L_r h_{ij}.
    let mut lh = [[[0.0; DIM]; DIM]; DIM];
    for r in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                lh[r][i][j] = frame.directional_derivative(pert.h.comp(i, j), r, p)?;
            }
        }
    }

    Ok(rank3(|kk, i, j| {
        let derivative_part =
            -0.5 * eps * sum1(|r| t.g_inv[kk][r] * (lh[i][r][j] + lh[j][i][r] - lh[r][i][j]));
        let raising_terms = sum2(|r, s| {
            -0.5 * eps * c.get(s, i, r) * t.h_up[kk][r] * t.g[s][j]
                - 0.5 * eps * c.get(s, j, r) * t.h_up[kk][r] * t.g[s][i]
                + 0.5 * eps * c.get(s, i, r) * t.g_inv[kk][r] * t.h_low[s][j]
                + 0.5 * eps * c.get(s, j, r) * t.g_inv[kk][r] * t.h_low[s][i]
        });
        derivative_part + raising_terms
    }))
}

/// First-order delta of the spinor-bundle connection over an orthonormal
/// frame:
/// `delta A^a_{ib} = (eps/8) sum_{m,n,r,s} g_{in} g^{rs} nabla_r h^{mn}
/// (gamma^al_{bm} gamma^a_{al s} - gamma^al_{bs} gamma^a_{al m})`.
/// The conjugate sector is the entrywise conjugate.
pub fn delta_spin_connection(
    pert: &Perturbation,
    gamma: &GammaCoeffs,
    frame: &FrameField,
    p: &ChartPoint,
) -> Result<SpinConnection> {
    let k = constants();
    let metric = MatrixField::constant(k.metric);
    let t = build_tables(pert, &metric, p)?;

    // nabla_r h^{mn}: covariant derivative of the lower components, raised
    // with the constant metric (raising commutes with transport).
    let mut grad_h_up = [[[0.0; DIM]; DIM]; DIM]; // [r][m][n]
    for r in 0..DIM {
        let low = covariant_derivative_tensor2(&pert.h, gamma, frame, r, p)?;
        grad_h_up[r] = mat4(|m, n| sum2(|a, b| t.g_inv[m][a] * t.g_inv[n][b] * low[a][b]));
    }

    let a: [CMat4; 4] = std::array::from_fn(|i| {
        cmat4(|aa, b| {
            let mut s_total = cr(0.0);
            for m in 0..DIM {
                for n in 0..DIM {
                    for al in 0..DIM {
                        for r in 0..DIM {
                            for s in 0..DIM {
                                let weight =
                                    t.g[i][n] * t.g_inv[r][s] * pert.eps * grad_h_up[r][m][n] / 8.0;
                                s_total += (k.gamma[m][al][b] * k.gamma[s][aa][al]
                                    - k.gamma[s][al][b] * k.gamma[m][aa][al])
                                    * weight;
                            }
                        }
                    }
                }
            }
            s_total
        })
    });
    Ok(SpinConnection::from_plain(a))
}

/// Residual of the combined-variation identity for the raised gamma tables:
/// termwise `sum_m (delta gamma^al_{bm} g^{mn} + gamma^al_{bm} delta g^{mn})`
/// must equal the closed form `(1/2) sum_m gamma^al_{bm} eps h^{mn}`.
pub fn combined_gamma_variation_residual(t: &DeformationTables, deltas: &SpinDeltas) -> f64 {
    let k = constants();
    let mut worst = 0.0f64;
    for n in 0..DIM {
        for al in 0..DIM {
            for b in 0..DIM {
                let mut termwise = cr(0.0);
                let mut closed = cr(0.0);
                for m in 0..DIM {
                    termwise += deltas.gamma[m][al][b] * t.g_inv[m][n]
                        + k.gamma[m][al][b] * t.delta_g_up[m][n];
                    closed += k.gamma[m][al][b] * (0.5 * t.eps * t.h_up[m][n]);
                }
                worst = worst.max((termwise - closed).norm());
            }
        }
    }
    worst
}

// ---- finite-transform oracles -----------------------------------------

/// Everything needed to run deformation checks in one gauge at one point.
pub struct DeformationContext<'a> {
    pub frame: &'a FrameField,
    /// Metric components in this gauge (constant canonical values over an
    /// orthonormal frame).
    pub metric: &'a MatrixField,
    pub pert: &'a Perturbation,
    /// True when the frame is orthonormal so the constant canonical tables
    /// apply; spin-sector deltas are only available then.
    pub orthonormal: bool,
}

/// Which first-order delta a convergence or linearity check targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    MetricInverse,
    Pauli,
    GammaTables,
    Connection,
    SpinConnection,
}

impl DeltaKind {
    pub fn name(self) -> &'static str {
        match self {
            DeltaKind::MetricInverse => "metric_inverse",
            DeltaKind::Pauli => "pauli",
            DeltaKind::GammaTables => "gamma_tables",
            DeltaKind::Connection => "connection",
            DeltaKind::SpinConnection => "spin_connection",
        }
    }

    pub const ALL: [DeltaKind; 5] = [
        DeltaKind::MetricInverse,
        DeltaKind::Pauli,
        DeltaKind::GammaTables,
        DeltaKind::Connection,
        DeltaKind::SpinConnection,
    ];

    /// Spin-sector deltas need the constant canonical tables.
    pub fn needs_orthonormal(self) -> bool {
        matches!(
            self,
            DeltaKind::Pauli | DeltaKind::GammaTables | DeltaKind::SpinConnection
        )
    }
}

/// A first-order delta evaluated at one point.
#[derive(Debug, Clone)]
pub enum DeltaValue {
    MetricInverse(Mat4),
    Pauli([CMat2; 4]),
    GammaTables([CMat4; 4]),
    Connection(Rank3),
    SpinConnection(SpinConnection),
}

impl DeltaValue {
    /// Largest entry of `self - alpha * other`; variants must match.
    pub fn scaled_difference(&self, other: &DeltaValue, alpha: f64) -> f64 {
        match (self, other) {
            (DeltaValue::MetricInverse(a), DeltaValue::MetricInverse(b)) => {
                crate::linalg::max_abs_mat4(&mat4(|i, j| a[i][j] - alpha * b[i][j]))
            }
            (DeltaValue::Pauli(a), DeltaValue::Pauli(b)) => {
                let mut worst = 0.0f64;
                for kk in 0..DIM {
                    for i in 0..2 {
                        for j in 0..2 {
                            worst = worst.max((a[kk][i][j] - b[kk][i][j] * alpha).norm());
                        }
                    }
                }
                worst
            }
            (DeltaValue::GammaTables(a), DeltaValue::GammaTables(b)) => {
                let mut worst = 0.0f64;
                for kk in 0..DIM {
                    worst = worst.max(crate::linalg::max_abs_cmat4(&cmat4(|i, j| {
                        a[kk][i][j] - b[kk][i][j] * alpha
                    })));
                }
                worst
            }
            (DeltaValue::Connection(a), DeltaValue::Connection(b)) => {
                crate::linalg::max_abs_rank3(&rank3(|k, i, j| a[k][i][j] - alpha * b[k][i][j]))
            }
            (DeltaValue::SpinConnection(a), DeltaValue::SpinConnection(b)) => {
                let mut worst = 0.0f64;
                for i in 0..DIM {
                    worst = worst.max(crate::linalg::max_abs_cmat4(&cmat4(|aa, bb| {
                        a.a[i][aa][bb] - b.a[i][aa][bb] * alpha
                    })));
                }
                worst
            }
            _ => panic!("mismatched delta variants"),
        }
    }
}

impl<'a> DeformationContext<'a> {
    /// The metric connection of the undeformed geometry at `p`.
    pub fn base_gamma(&self, p: &ChartPoint) -> Result<GammaCoeffs> {
        gamma_general(self.metric, self.frame, p)
    }

    /// Evaluates the requested first-order delta at `p` for the
    /// perturbation scaled to `eps`.
    pub fn delta(&self, kind: DeltaKind, eps: f64, p: &ChartPoint) -> Result<DeltaValue> {
        if kind.needs_orthonormal() && !self.orthonormal {
            return Err(Error::invalid(
                "spin-sector deltas need an orthonormal frame; use the companion frame",
            ));
        }
        let pert = self.pert.with_eps(eps);
        let t = build_tables(&pert, self.metric, p)?;
        Ok(match kind {
            DeltaKind::MetricInverse => DeltaValue::MetricInverse(t.delta_g_up),
            DeltaKind::Pauli => DeltaValue::Pauli(delta_pauli(&t)),
            DeltaKind::GammaTables => DeltaValue::GammaTables(delta_gamma_tables(&t)),
            DeltaKind::Connection => {
                let gamma = self.base_gamma(p)?;
                DeltaValue::Connection(delta_connection(&pert, self.metric, &gamma, self.frame, p)?)
            }
            DeltaKind::SpinConnection => {
                let gamma = self.base_gamma(p)?;
                DeltaValue::SpinConnection(delta_spin_connection(&pert, &gamma, self.frame, p)?)
            }
        })
    }

    /// Error of the first-order delta against its exact finite transform at
    /// deformation size `eps`.
    pub fn oracle_error(&self, kind: DeltaKind, eps: f64, p: &ChartPoint) -> Result<f64> {
        let pert = self.pert.with_eps(eps);
        let t = build_tables(&pert, self.metric, p)?;
        let (_, _flags) = deformed_frame_transform(&t)?;
        let f_inv = invert4(&t.big_f).ok_or(Error::DeformationTooLarge)?;
        let k = constants();

        Ok(match kind {
            DeltaKind::MetricInverse => {
                // Exact deformed dual metric from the inverse transform,
                // against the prediction g^{ij} + eps h^{ij}.
                let hat_low = mat4(|pp, q| sum2(|i, j| f_inv[i][pp] * f_inv[j][q] * t.g[i][j]));
                let hat_up = invert4(&hat_low).ok_or(Error::MetricNotInvertible)?;
                crate::linalg::max_abs_mat4(&mat4(|i, j| {
                    hat_up[i][j] - t.g_inv[i][j] - t.delta_g_up[i][j]
                }))
            }
            DeltaKind::Pauli => {
                let deltas = delta_pauli(&t);
                let mut worst = 0.0f64;
                for kk in 0..DIM {
                    let hat = cmat2(|i, j| {
                        let mut s = cr(0.0);
                        for q in 0..DIM {
                            s += k.pauli[q][i][j] * f_inv[q][kk];
                        }
                        s
                    });
                    worst = worst.max(crate::linalg::max_abs_cmat2(&cmat2(|i, j| {
                        hat[i][j] - k.pauli[kk][i][j] - deltas[kk][i][j]
                    })));
                }
                worst
            }
            DeltaKind::GammaTables => {
                let deltas = delta_gamma_tables(&t);
                let mut worst = 0.0f64;
                for kk in 0..DIM {
                    let hat = cmat4(|a, b| {
                        let mut s = cr(0.0);
                        for q in 0..DIM {
                            s += k.gamma[q][a][b] * f_inv[q][kk];
                        }
                        s
                    });
                    worst = worst.max(crate::linalg::max_abs_cmat4(&cmat4(|a, b| {
                        hat[a][b] - k.gamma[kk][a][b] - deltas[kk][a][b]
                    })));
                }
                worst
            }
            DeltaKind::Connection => {
                let gamma = self.base_gamma(p)?;
                let delta = delta_connection(&pert, self.metric, &gamma, self.frame, p)?;
                // Deformed metric components to first order; its connection
                // is the exact side of the oracle.
                let hat_metric = MatrixField::lin_comb(1.0, self.metric, -eps, &pert.h);
                let hat_gamma = gamma_general(&hat_metric, self.frame, p)?;
                crate::linalg::max_abs_rank3(&rank3(|kk, i, j| {
                    hat_gamma.coeffs[kk][i][j] - gamma.coeffs[kk][i][j] - delta[kk][i][j]
                }))
            }
            DeltaKind::SpinConnection => {
                let gamma = self.base_gamma(p)?;
                let base = spin_connection_orthonormal(&gamma);
                let delta = delta_spin_connection(&pert, &gamma, self.frame, p)?;
                let hat = self.deformed_spin_connection(&pert, p)?;
                let mut worst = 0.0f64;
                for i in 0..DIM {
                    worst = worst.max(crate::linalg::max_abs_cmat4(&cmat4(|a, b| {
                        hat.a[i][a][b] - base.a[i][a][b] - delta.a[i][a][b]
                    })));
                }
                worst
            }
        })
    }

    /// End-to-end deformed spinor connection: the general five-term formula
    /// fed with the first-order deformed tables (metric duals raised, gamma
    /// tables dragged, spinor metrics and pairing unchanged) and the
    /// connection of the deformed metric.
    fn deformed_spin_connection(
        &self,
        pert: &Perturbation,
        p: &ChartPoint,
    ) -> Result<SpinConnection> {
        let k = constants();
        let eps = pert.eps;

        // h with raised indices as a field (constant canonical metric).
        let h_up_field = MatrixField::from_fn(|m, n| {
            let mut acc = ScalarField::constant(0.0);
            for a in 0..DIM {
                for b in 0..DIM {
                    let w = k.metric_dual[m][a] * k.metric_dual[n][b];
                    if w != 0.0 {
                        acc = lin_comb(1.0, &acc, w, pert.h.comp(a, b));
                    }
                }
            }
            acc
        });

        let metric_low =
            MatrixField::lin_comb(1.0, &MatrixField::constant(k.metric), -eps, &pert.h);
        let metric_up =
            MatrixField::lin_comb(1.0, &MatrixField::constant(k.metric_dual), eps, &h_up_field);

        // Dragged gamma tables: gamma_k - eps sum_q f^q_k gamma_q with
        // f^q_k = (1/2) g^{qp} h_{pk}.
        let gamma_fields: [CMatrixField; 4] = std::array::from_fn(|kk| {
            CMatrixField::from_fn(|a, b| {
                let mut acc: ComplexField = ComplexField::constant(k.gamma[kk][a][b]);
                for q in 0..DIM {
                    let coeff: Complex64 = k.gamma[q][a][b];
                    if coeff != cr(0.0) {
                        for pp in 0..DIM {
                            let w = -eps * 0.5 * k.metric_dual[q][pp];
                            if w != 0.0 {
                                let contrib = scale_real_to_complex(pert.h.comp(pp, kk), coeff * w);
                                acc = add_complex(&acc, &contrib);
                            }
                        }
                    }
                }
                acc
            })
        });

        let tables = SpinTables {
            d4: CMatrixField::constant(k.d4),
            chirality: CMatrixField::constant(k.chirality),
            pairing: CMatrixField::constant(k.pairing),
            gamma: gamma_fields,
            metric: metric_low.clone(),
            metric_dual: metric_up,
        };
        let hat_gamma = gamma_general(&metric_low, self.frame, p)?;
        spin_connection_general(&tables, &hat_gamma, self.frame, p)
    }

    /// Oracle errors across a ladder of deformation sizes.
    pub fn convergence_samples(
        &self,
        kind: DeltaKind,
        ladder: &[f64],
        p: &ChartPoint,
    ) -> Result<Vec<(f64, f64)>> {
        if kind.needs_orthonormal() && !self.orthonormal {
            return Err(Error::invalid(
                "spin-sector deltas need an orthonormal frame; use the companion frame",
            ));
        }
        ladder
            .iter()
            .map(|&eps| Ok((eps, self.oracle_error(kind, eps, p)?)))
            .collect()
    }

    /// Linearity defect of a delta: `delta(2h)` against `2 delta(h)` at the
    /// context's deformation size.
    pub fn linearity_defect(&self, kind: DeltaKind, p: &ChartPoint) -> Result<f64> {
        let single = self.delta(kind, self.pert.eps, p)?;
        let doubled_ctx = DeformationContext {
            frame: self.frame,
            metric: self.metric,
            pert: &self.pert.scaled(2.0),
            orthonormal: self.orthonormal,
        };
        let doubled = doubled_ctx.delta(kind, self.pert.eps, p)?;
        Ok(doubled.scaled_difference(&single, 2.0))
    }

    /// Residual of first-order restored orthonormality: the transformed
    /// frame metric `sum_{p,q} F^p_i F^q_j (g - eps h)_{pq}` must match
    /// `g_{ij}` up to `O(eps^2)`.
    pub fn orthonormality_residual(&self, eps: f64, p: &ChartPoint) -> Result<f64> {
        let pert = self.pert.with_eps(eps);
        let t = build_tables(&pert, self.metric, p)?;
        let hat_low = mat4(|i, j| t.g[i][j] - eps * t.h_low[i][j]);
        let transformed =
            mat4(|i, j| sum2(|pp, q| t.big_f[pp][i] * t.big_f[q][j] * hat_low[pp][q]));
        Ok(crate::linalg::max_abs_mat4(&mat4(|i, j| {
            transformed[i][j] - t.g[i][j]
        })))
    }
}

fn scale_real_to_complex(f: &ScalarField, coeff: Complex64) -> ComplexField {
    let base = f.clone();
    let out = ComplexField::new(move |p: &ChartPoint| coeff * base.eval(p));
    if f.has_gradient() {
        let base = f.clone();
        out.with_gradient(move |p| {
            let g = base.gradient(p).unwrap_or([f64::NAN; DIM]);
            std::array::from_fn(|mu| coeff * g[mu])
        })
    } else {
        out
    }
}

fn add_complex(a: &ComplexField, b: &ComplexField) -> ComplexField {
    lin_comb(1.0, a, 1.0, b)
}

/// Random symmetric perturbation field built from a few cosine modes with
/// analytic gradients. Coefficient matrices are symmetric by construction;
/// amplitudes are uniform in `[-amplitude, amplitude]`, wave covectors in
/// `[-wave_scale, wave_scale]`.
pub fn random_symmetric_perturbation(
    rng: &mut crate::rng::SplitMix64,
    amplitude: f64,
    wave_scale: f64,
) -> MatrixField {
    const MODES: usize = 2;
    let waves: [[f64; DIM]; MODES] =
        std::array::from_fn(|_| std::array::from_fn(|_| rng.uniform(-wave_scale, wave_scale)));
    let mut amps = [[[0.0; DIM]; DIM]; MODES];
    let mut phases = [[[0.0; DIM]; DIM]; MODES];
    for m in 0..MODES {
        for i in 0..DIM {
            for j in i..DIM {
                let a = rng.uniform(-amplitude, amplitude);
                let ph = rng.uniform(0.0, std::f64::consts::TAU);
                amps[m][i][j] = a;
                amps[m][j][i] = a;
                phases[m][i][j] = ph;
                phases[m][j][i] = ph;
            }
        }
    }
    MatrixField::from_fn(|i, j| {
        let modes: [(f64, [f64; DIM], f64); MODES] =
            std::array::from_fn(|m| (amps[m][i][j], waves[m], phases[m][i][j]));
        let field = ScalarField::new(move |p: &ChartPoint| {
            modes
                .iter()
                .map(|(a, k, ph)| {
                    a * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + k[3] * p[3] + ph).cos()
                })
                .sum()
        });
        field.with_gradient(move |p: &ChartPoint| {
            std::array::from_fn(|mu| {
                modes
                    .iter()
                    .map(|(a, k, ph)| {
                        -a * k[mu]
                            * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + k[3] * p[3] + ph).sin()
                    })
                    .sum()
            })
        })
    })
}

/// Least-squares slope of `ln err` against `ln eps`.
///
/// Samples at or below the noise floor are dropped: they mean the delta
/// reproduced the finite transform to round-off. With fewer than two
/// informative samples no order can be fitted and `None` is returned, which
/// callers treat as a pass.
pub fn fit_order(samples: &[(f64, f64)]) -> Option<f64> {
    let informative: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(_, err)| err > RICHARDSON_NOISE_FLOOR)
        .collect();
    if informative.len() < 2 {
        return None;
    }
    let n = informative.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(eps, err) in &informative {
        let x = eps.ln();
        let y = err.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::tolerances::EPS_LADDER;
    use approx::assert_relative_eq;

    fn flat_metric() -> MatrixField {
        MatrixField::constant(constants().metric)
    }

    fn smooth_h() -> MatrixField {
        // Symmetric by construction: upper triangle mirrored.
        let entries = [
            [
                "0.2*sin(x1)+0.1",
                "0.1*cos(x2)",
                "0.05*sin(x0+x3)",
                "0.08*cos(x1)",
            ],
            ["", "0.15*cos(x0)", "0.07*sin(x2)", "0.04*sin(x3)"],
            ["", "", "0.12*sin(x0)+0.05", "0.06*cos(x0+x1)"],
            ["", "", "", "0.1*cos(x2)+0.02"],
        ];
        MatrixField::from_fn(|i, j| {
            let (r, c) = if i <= j { (i, j) } else { (j, i) };
            ScalarField::from_expr(&parse(entries[r][c]).unwrap())
        })
    }

    #[test]
    fn tables_for_diagonal_perturbation() {
        // h = diag(2, 0, 0, 0) over the canonical metric: f = diag(1,0,0,0),
        // raised h = diag(2,0,0,0), and the 2-sector delta is -eps G_0.
        let h = MatrixField::constant(mat4(|i, j| if i == 0 && j == 0 { 2.0 } else { 0.0 }));
        let pert = Perturbation::new(h, 1e-3);
        let t = build_tables(&pert, &flat_metric(), &[0.0; 4]).unwrap();
        assert_relative_eq!(t.f_mixed[0][0], 1.0);
        assert_relative_eq!(t.h_up[0][0], 2.0);
        assert_relative_eq!(t.big_f[0][0], 1.0 + 1e-3);
        assert_relative_eq!(t.delta_g_low[0][0], -2e-3);
        assert_relative_eq!(t.delta_g_up[0][0], 2e-3);

        let dp = delta_pauli(&t);
        let k = constants();
        for i in 0..2 {
            for j in 0..2 {
                let expect = k.pauli[0][i][j] * (-1e-3);
                assert!((dp[0][i][j] - expect).norm() <= 1e-15);
                for kk in 1..4 {
                    assert!(dp[kk][i][j].norm() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn lowered_and_raised_delta_forms_agree() {
        let pert = Perturbation::new(smooth_h(), 5e-3);
        let t = build_tables(&pert, &flat_metric(), &[0.3, -0.2, 0.5, 0.1]).unwrap();
        let a = delta_pauli(&t);
        let b = delta_pauli_lowered(&t);
        for kk in 0..4 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[kk][i][j] - b[kk][i][j]).norm() <= 1e-15);
                }
            }
        }
        let ga = delta_gamma_tables(&t);
        let gb = delta_gamma_tables_lowered(&t);
        for kk in 0..4 {
            for a_ix in 0..4 {
                for b_ix in 0..4 {
                    assert!((ga[kk][a_ix][b_ix] - gb[kk][a_ix][b_ix]).norm() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn structural_zero_deltas() {
        let pert = Perturbation::new(smooth_h(), 1e-2);
        let t = build_tables(&pert, &flat_metric(), &[0.0; 4]).unwrap();
        let d = spin_deltas(&t);
        assert_eq!(crate::linalg::max_abs_cmat4(&d.d4), 0.0);
        assert_eq!(crate::linalg::max_abs_cmat4(&d.chirality), 0.0);
        assert_eq!(crate::linalg::max_abs_cmat4(&d.pairing), 0.0);
    }

    #[test]
    fn asymmetric_perturbation_is_rejected() {
        let h = MatrixField::constant(mat4(|i, j| if i == 0 && j == 1 { 0.5 } else { 0.0 }));
        let pert = Perturbation::new(h, 1e-3);
        let err = build_tables(&pert, &flat_metric(), &[0.0; 4]).unwrap_err();
        assert_eq!(err.to_string(), "perturbation not symmetric");
    }

    #[test]
    fn oversized_deformation_is_rejected() {
        let h = MatrixField::constant(mat4(|i, j| if i == 0 && j == 0 { -300.0 } else { 0.0 }));
        let pert = Perturbation::new(h, 1e-2);
        let t = build_tables(&pert, &flat_metric(), &[0.0; 4]).unwrap();
        let err = deformed_frame_transform(&t).unwrap_err();
        assert_eq!(
            err.to_string(),
            "deformation too large: frame loses polarization/orientation"
        );
    }

    #[test]
    fn combined_variation_identity_holds() {
        let pert = Perturbation::new(smooth_h(), 2e-3);
        let t = build_tables(&pert, &flat_metric(), &[0.1, 0.7, -0.3, 0.2]).unwrap();
        let deltas = spin_deltas(&t);
        assert!(combined_gamma_variation_residual(&t, &deltas) <= 1e-15);
    }

    #[test]
    fn orthonormality_restored_to_first_order() {
        let metric = flat_metric();
        let pert = Perturbation::new(smooth_h(), 1.0);
        let frame = FrameField::coordinate();
        let ctx = DeformationContext {
            frame: &frame,
            metric: &metric,
            pert: &pert,
            orthonormal: true,
        };
        let p = [0.2, -0.4, 0.6, 0.0];
        for eps in EPS_LADDER {
            let r = ctx.orthonormality_residual(eps, &p).unwrap();
            assert!(r <= 5.0 * eps * eps, "eps {eps}: residual {r}");
        }
    }

    #[test]
    fn convergence_orders_on_flat_scenario() {
        let metric = flat_metric();
        let pert = Perturbation::new(smooth_h(), 1e-3);
        let frame = FrameField::coordinate();
        let ctx = DeformationContext {
            frame: &frame,
            metric: &metric,
            pert: &pert,
            orthonormal: true,
        };
        let p = [0.25, -0.15, 0.45, 0.65];
        for kind in DeltaKind::ALL {
            let samples = ctx.convergence_samples(kind, &EPS_LADDER, &p).unwrap();
            // No fit means the oracle reproduced the delta to round-off.
            if let Some(order) = fit_order(&samples) {
                assert!(
                    order >= 1.8,
                    "{}: fitted order {order} from {samples:?}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn convergence_orders_on_scaled_frame() {
        // Same ladder over a genuinely curved non-holonomic frame: the
        // covariant delta formulas must still match the finite transforms
        // at second order.
        let exprs: [[crate::expr::Expr; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|mu| {
                if i == mu {
                    if i == 0 {
                        parse("1").unwrap()
                    } else {
                        parse("exp(-x0)").unwrap()
                    }
                } else {
                    parse("0").unwrap()
                }
            })
        });
        let frame = FrameField::from_exprs(&exprs, "exp-scale");
        let metric = flat_metric();
        let pert = Perturbation::new(smooth_h(), 1e-3);
        let ctx = DeformationContext {
            frame: &frame,
            metric: &metric,
            pert: &pert,
            orthonormal: true,
        };
        let p = [0.35, -0.2, 0.15, 0.55];
        for kind in DeltaKind::ALL {
            let samples = ctx.convergence_samples(kind, &EPS_LADDER, &p).unwrap();
            if let Some(order) = fit_order(&samples) {
                assert!(
                    order >= 1.8,
                    "{}: fitted order {order} from {samples:?}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn deltas_are_linear_in_h() {
        let metric = flat_metric();
        let pert = Perturbation::new(smooth_h(), 1e-3);
        let frame = FrameField::coordinate();
        let ctx = DeformationContext {
            frame: &frame,
            metric: &metric,
            pert: &pert,
            orthonormal: true,
        };
        let p = [0.3, 0.1, -0.5, 0.2];
        for kind in DeltaKind::ALL {
            let defect = ctx.linearity_defect(kind, &p).unwrap();
            assert!(defect <= 1e-12, "{}: defect {defect}", kind.name());
        }
    }

    #[test]
    fn raw_and_covariant_connection_deltas_agree() {
        // Over a scaled orthonormal frame both forms of the connection
        // delta must coincide.
        let exprs: [[crate::expr::Expr; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|mu| {
                if i == mu {
                    if i == 0 {
                        parse("1").unwrap()
                    } else {
                        parse("exp(-x0)").unwrap()
                    }
                } else {
                    parse("0").unwrap()
                }
            })
        });
        let frame = FrameField::from_exprs(&exprs, "exp-scale");
        let metric = flat_metric();
        let pert = Perturbation::new(smooth_h(), 4e-3);
        let p = [0.3, -0.2, 0.25, 0.15];
        let c = frame.commutation_coefficients(&p).unwrap();
        let gamma = crate::connection::gamma_orthonormal(&c);
        let covariant = delta_connection(&pert, &metric, &gamma, &frame, &p).unwrap();
        let raw = delta_connection_raw(&pert, &c, &frame, &p).unwrap();
        let diff = crate::linalg::rank3_sub(&covariant, &raw);
        assert!(crate::linalg::max_abs_rank3(&diff) <= 1e-12);
    }

    #[test]
    fn fit_order_measures_slopes() {
        let quadratic: Vec<(f64, f64)> = EPS_LADDER.iter().map(|&e| (e, 3.0 * e * e)).collect();
        let order = fit_order(&quadratic).unwrap();
        assert_relative_eq!(order, 2.0, epsilon = 1e-10);

        let linear: Vec<(f64, f64)> = EPS_LADDER.iter().map(|&e| (e, 0.5 * e)).collect();
        assert_relative_eq!(fit_order(&linear).unwrap(), 1.0, epsilon = 1e-10);

        let exact: Vec<(f64, f64)> = EPS_LADDER.iter().map(|&e| (e, 1e-16)).collect();
        assert!(fit_order(&exact).is_none());
    }
}
