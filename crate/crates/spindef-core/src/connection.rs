//! Metric connection in a frame basis, its extension to the spinor bundle,
//! covariant derivatives for each index signature, and the transport
//! residual suite that verifies all structure tables are parallel.
//!
//! Connection coefficients are stored as `coeffs[k][i][j]` for the
//! derivative leg `i`, lower slot `j`, upper slot `k`. The spinor-bundle
//! coefficients `a[i][a][b]` act on upper spinor indices with a plus sign,
//! lower with a minus; the conjugate-sector coefficients are the entrywise
//! conjugates.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{CMatrixField, ChartPoint, MatrixField, SpinorField};
use crate::frame_geometry::{CommutationCoeffs, FrameField};
use crate::linalg::{
    cinvert4, cmat4, cr, csum1, cvec4, invert4, rank3, sum1, sum2, CMat4, CVec4, Mat4, Rank3, DIM,
};
use crate::spin_algebra::constants;

/// Connection coefficients of the frame metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaCoeffs {
    /// `coeffs[k][i][j]`.
    pub coeffs: Rank3,
}

impl GammaCoeffs {
    pub fn zero() -> Self {
        GammaCoeffs {
            coeffs: [[[0.0; DIM]; DIM]; DIM],
        }
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.coeffs[k][i][j]
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs_rank3(&self.coeffs)
    }
}

/// Coefficients of the metric-compatible, torsion-matched connection for a
/// general metric field over a general frame.
///
/// The three derivative terms use the inverse metric against the symmetrized
/// frame derivatives of the components; the three commutation terms carry
/// the non-holonomic structure of the frame.
pub fn gamma_general(
    metric: &MatrixField,
    frame: &FrameField,
    p: &ChartPoint,
) -> Result<GammaCoeffs> {
    let g = metric.eval(p);
    let g_inv = invert4(&g).ok_or(Error::MetricNotInvertible)?;
    let c = frame.commutation_coefficients(p)?;

    // dg[r][i][j] = L_r g_{ij}.
    let mut dg = [[[0.0; DIM]; DIM]; DIM];
    for r in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                dg[r][i][j] = frame.directional_derivative(metric.comp(i, j), r, p)?;
            }
        }
    }

    let coeffs = rank3(|k, i, j| {
        let derivative_part =
            sum1(|r| 0.5 * g_inv[k][r] * (dg[i][r][j] + dg[j][i][r] - dg[r][i][j]));
        let torsion_part = 0.5 * c.get(k, i, j);
        let mixed_i = -sum2(|r, s| 0.5 * c.get(s, i, r) * g_inv[k][r] * g[s][j]);
        let mixed_j = -sum2(|r, s| 0.5 * c.get(s, j, r) * g_inv[k][r] * g[s][i]);
        derivative_part + torsion_part + mixed_i + mixed_j
    });
    Ok(GammaCoeffs { coeffs })
}

/// Specialization to an orthonormal frame, where the metric components are
/// constant and only the commutation terms survive.
pub fn gamma_orthonormal(c: &CommutationCoeffs) -> GammaCoeffs {
    let k = constants();
    let g = &k.metric;
    let g_inv = &k.metric_dual;
    let coeffs = rank3(|kk, i, j| {
        let torsion_part = 0.5 * c.get(kk, i, j);
        let mixed_i = -sum2(|r, s| 0.5 * c.get(s, i, r) * g_inv[kk][r] * g[s][j]);
        let mixed_j = -sum2(|r, s| 0.5 * c.get(s, j, r) * g_inv[kk][r] * g[s][i]);
        torsion_part + mixed_i + mixed_j
    });
    GammaCoeffs { coeffs }
}

/// Spinor-bundle connection coefficients at a point: `a[i]` acts on plain
/// spinor indices, `abar[i]` (the entrywise conjugate) on conjugate ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConnection {
    pub a: [CMat4; 4],
    pub abar: [CMat4; 4],
}

impl SpinConnection {
    pub fn zero() -> Self {
        SpinConnection {
            a: std::array::from_fn(|_| crate::linalg::zero_cmat4()),
            abar: std::array::from_fn(|_| crate::linalg::zero_cmat4()),
        }
    }

    /// Rebuilds the conjugate sector from the plain one.
    pub fn from_plain(a: [CMat4; 4]) -> Self {
        let abar = std::array::from_fn(|i| crate::linalg::conj4(&a[i]));
        SpinConnection { a, abar }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..DIM {
            m = m.max(crate::linalg::max_abs_cmat4(&self.a[i]));
        }
        m
    }
}

/// The point-dependent structure tables consumed by the general
/// spinor-connection formula and the transport residual suite.
#[derive(Clone)]
pub struct SpinTables {
    /// Rank-4 skew spinor metric `d_{ab}`.
    pub d4: CMatrixField,
    /// Chirality operator `H^a_b`.
    pub chirality: CMatrixField,
    /// Hermitian pairing `D_{a ad}`.
    pub pairing: CMatrixField,
    /// Gamma tables, `gamma[m]` holding `gamma^a_{b m}`.
    pub gamma: [CMatrixField; 4],
    /// Frame metric components `g_{ij}`.
    pub metric: MatrixField,
    /// Inverse frame metric components `g^{ij}`.
    pub metric_dual: MatrixField,
}

impl SpinTables {
    /// The constant canonical tables of an orthonormal frame.
    pub fn canonical() -> Self {
        let k = constants();
        SpinTables {
            d4: CMatrixField::constant(k.d4),
            chirality: CMatrixField::constant(k.chirality),
            pairing: CMatrixField::constant(k.pairing),
            gamma: std::array::from_fn(|m| CMatrixField::constant(k.gamma[m])),
            metric: MatrixField::constant(k.metric),
            metric_dual: MatrixField::constant(k.metric_dual),
        }
    }
}

/// Spinor-bundle connection from the general five-term formula: two trace
/// terms from the rank-4 spinor metric, one from the chirality operator, a
/// derivative term and a connection term from the gamma tables.
///
/// Reduces to [`spin_connection_orthonormal`] when every table is constant.
pub fn spin_connection_general(
    tables: &SpinTables,
    gamma: &GammaCoeffs,
    frame: &FrameField,
    p: &ChartPoint,
) -> Result<SpinConnection> {
    let d = tables.d4.eval(p);
    let d_dual = cinvert4(&d).ok_or(Error::SpinorMetricDegenerate)?;
    let h = tables.chirality.eval(p);
    let g_up = tables.metric_dual.eval(p);
    let gam: [CMat4; 4] = std::array::from_fn(|m| tables.gamma[m].eval(p));

    let mut a: [CMat4; 4] = std::array::from_fn(|_| crate::linalg::zero_cmat4());
    for i in 0..DIM {
        // Directional derivatives of every table along leg i.
        let ld = cmat4_derive(&tables.d4, frame, i, p)?;
        let lh = cmat4_derive(&tables.chirality, frame, i, p)?;
        let mut lgam: [CMat4; 4] = std::array::from_fn(|_| crate::linalg::zero_cmat4());
        for m in 0..DIM {
            lgam[m] = cmat4_derive(&tables.gamma[m], frame, i, p)?;
        }
        let mut lg_up = [[0.0; DIM]; DIM];
        for m in 0..DIM {
            for n in 0..DIM {
                lg_up[m][n] = frame.directional_derivative(tables.metric_dual.comp(m, n), i, p)?;
            }
        }

        // Scalar traces of the two rank-4 metric terms.
        let mut trace_plain = cr(0.0);
        let mut trace_chiral = cr(0.0);
        for al in 0..DIM {
            for be in 0..DIM {
                trace_plain += ld[al][be] * d_dual[be][al];
                for dd in 0..DIM {
                    trace_chiral += ld[al][be] * d_dual[be][dd] * h[al][dd];
                }
            }
        }

        a[i] = cmat4(|aa, b| {
            let ident = if aa == b { cr(1.0) } else { cr(0.0) };
            let term_trace = trace_plain * 0.125 * ident;
            let term_chiral_trace = -trace_chiral * 0.125 * h[aa][b];

            let mut term_chirality = cr(0.0);
            for cc in 0..DIM {
                for dd in 0..DIM {
                    for r in 0..DIM {
                        term_chirality += d[b][cc] * lh[cc][dd] * h[dd][r] * d_dual[r][aa];
                    }
                }
            }
            term_chirality = -term_chirality * 0.25;

            let mut term_gamma_derivative = cr(0.0);
            let mut term_gamma_connection = cr(0.0);
            for m in 0..DIM {
                for n in 0..DIM {
                    for al in 0..DIM {
                        term_gamma_derivative += (lgam[m][al][b] * g_up[m][n]
                            + gam[m][al][b] * lg_up[m][n])
                            * gam[n][aa][al];
                        for s in 0..DIM {
                            term_gamma_connection += gam[m][al][b]
                                * (gamma.coeffs[n][i][s] * g_up[m][s])
                                * gam[n][aa][al];
                        }
                    }
                }
            }
            term_gamma_derivative *= 0.25;
            term_gamma_connection *= 0.25;

            term_trace
                + term_chiral_trace
                + term_chirality
                + term_gamma_derivative
                + term_gamma_connection
        });
    }
    Ok(SpinConnection::from_plain(a))
}

fn cmat4_derive(
    field: &CMatrixField,
    frame: &FrameField,
    i: usize,
    p: &ChartPoint,
) -> Result<CMat4> {
    let mut out = crate::linalg::zero_cmat4();
    for r in 0..DIM {
        for s in 0..DIM {
            out[r][s] = frame.directional_derivative(field.comp(r, s), i, p)?;
        }
    }
    Ok(out)
}

/// Spinor-bundle connection over an orthonormal frame, where the canonical
/// tables are constant and only the gamma-connection term survives.
pub fn spin_connection_orthonormal(gamma: &GammaCoeffs) -> SpinConnection {
    let k = constants();
    let a: [CMat4; 4] = std::array::from_fn(|i| {
        cmat4(|aa, b| {
            let mut s_total = cr(0.0);
            for m in 0..DIM {
                for n in 0..DIM {
                    for al in 0..DIM {
                        for s in 0..DIM {
                            s_total += k.gamma[m][al][b]
                                * (gamma.coeffs[n][i][s] * k.metric_dual[m][s])
                                * k.gamma[n][aa][al];
                        }
                    }
                }
            }
            s_total * 0.25
        })
    });
    SpinConnection::from_plain(a)
}

/// Covariant frame derivative of a rank-2 lower-index spacial tensor field:
/// `L_r t_{jk} - Gamma^s_{rj} t_{sk} - Gamma^s_{rk} t_{js}`.
pub fn covariant_derivative_tensor2(
    t: &MatrixField,
    gamma: &GammaCoeffs,
    frame: &FrameField,
    r: usize,
    p: &ChartPoint,
) -> Result<Mat4> {
    let tv = t.eval(p);
    let mut out = [[0.0; DIM]; DIM];
    for j in 0..DIM {
        for k in 0..DIM {
            let lead = frame.directional_derivative(t.comp(j, k), r, p)?;
            let corr =
                sum1(|s| gamma.coeffs[s][r][j] * tv[s][k] + gamma.coeffs[s][r][k] * tv[j][s]);
            out[j][k] = lead - corr;
        }
    }
    Ok(out)
}

/// Covariant frame derivative of an upper-index spinor field:
/// `L_q psi^b + A^b_{q theta} psi^theta`.
pub fn covariant_derivative_spinor(
    psi: &SpinorField,
    conn: &SpinConnection,
    frame: &FrameField,
    q: usize,
    p: &ChartPoint,
) -> Result<CVec4> {
    let v = psi.eval(p);
    let mut out = cvec4(|_| cr(0.0));
    for b in 0..DIM {
        let lead = frame.directional_derivative(&psi.comps[b], q, p)?;
        out[b] = lead + csum1(|th| conn.a[q][b][th] * v[th]);
    }
    Ok(out)
}

/// Covariant frame derivative of the conjugate field `psi-bar = conj(psi)`:
/// `L_q psibar^ad + Abar^ad_{q theta} psibar^theta`. The frame coefficients
/// are real, so the leading term is the conjugate of the plain derivative.
pub fn covariant_derivative_spinor_conj(
    psi: &SpinorField,
    conn: &SpinConnection,
    frame: &FrameField,
    q: usize,
    p: &ChartPoint,
) -> Result<CVec4> {
    let v = psi.eval_conj(p);
    let mut out = cvec4(|_| cr(0.0));
    for ad in 0..DIM {
        let lead = frame.directional_derivative(&psi.comps[ad], q, p)?.conj();
        out[ad] = lead + csum1(|th| conn.abar[q][ad][th] * v[th]);
    }
    Ok(out)
}

/// Transport residuals of the five structure tables; all must vanish for a
/// metric connection with its induced spinor-bundle extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcordanceResiduals {
    pub spin_metric: f64,
    pub chirality: f64,
    pub pairing: f64,
    pub gamma: f64,
    pub metric: f64,
}

impl ConcordanceResiduals {
    pub fn max(&self) -> f64 {
        self.spin_metric
            .max(self.chirality)
            .max(self.pairing)
            .max(self.gamma)
            .max(self.metric)
    }

    pub fn as_named(&self) -> [(&'static str, f64); 5] {
        [
            ("spin_metric", self.spin_metric),
            ("chirality", self.chirality),
            ("pairing", self.pairing),
            ("gamma", self.gamma),
            ("metric", self.metric),
        ]
    }
}

/// Evaluates all five transport residuals at a point. Each index slot picks
/// up its own connection term: plus for upper spinor, minus for lower, the
/// conjugate coefficients for conjugate slots, and the metric connection for
/// spacial slots.
pub fn concordance_residuals(
    tables: &SpinTables,
    gamma: &GammaCoeffs,
    conn: &SpinConnection,
    frame: &FrameField,
    p: &ChartPoint,
) -> Result<ConcordanceResiduals> {
    let d = tables.d4.eval(p);
    let h = tables.chirality.eval(p);
    let pairing = tables.pairing.eval(p);
    let gam: [CMat4; 4] = std::array::from_fn(|m| tables.gamma[m].eval(p));
    let g = tables.metric.eval(p);

    let mut r_d = 0.0f64;
    let mut r_h = 0.0f64;
    let mut r_pair = 0.0f64;
    let mut r_gam = 0.0f64;
    let mut r_g = 0.0f64;

    for i in 0..DIM {
        let ld = cmat4_derive(&tables.d4, frame, i, p)?;
        let lh = cmat4_derive(&tables.chirality, frame, i, p)?;
        let lpair = cmat4_derive(&tables.pairing, frame, i, p)?;

        for a in 0..DIM {
            for b in 0..DIM {
                // Two lower plain-spinor slots.
                let nab = ld[a][b]
                    - csum1(|th| conn.a[i][th][a] * d[th][b])
                    - csum1(|th| conn.a[i][th][b] * d[a][th]);
                r_d = r_d.max(nab.norm());

                // One upper and one lower plain-spinor slot.
                let nh = lh[a][b] + csum1(|th| conn.a[i][a][th] * h[th][b])
                    - csum1(|th| conn.a[i][th][b] * h[a][th]);
                r_h = r_h.max(nh.norm());

                // One lower plain and one lower conjugate slot.
                let np = lpair[a][b]
                    - csum1(|th| conn.a[i][th][a] * pairing[th][b])
                    - csum1(|th| conn.abar[i][th][b] * pairing[a][th]);
                r_pair = r_pair.max(np.norm());
            }
        }

        for m in 0..DIM {
            let lg = cmat4_derive(&tables.gamma[m], frame, i, p)?;
            for a in 0..DIM {
                for b in 0..DIM {
                    let ng = lg[a][b] + csum1(|th| conn.a[i][a][th] * gam[m][th][b])
                        - csum1(|th| conn.a[i][th][b] * gam[m][a][th])
                        - csum1(|s| gam[s][a][b] * gamma.coeffs[s][i][m]);
                    r_gam = r_gam.max(ng.norm());
                }
            }
        }

        for j in 0..DIM {
            for k in 0..DIM {
                let lead = frame.directional_derivative(tables.metric.comp(j, k), i, p)?;
                let ngjk = lead
                    - sum1(|s| gamma.coeffs[s][i][j] * g[s][k] + gamma.coeffs[s][i][k] * g[j][s]);
                r_g = r_g.max(ngjk.abs());
            }
        }
    }

    Ok(ConcordanceResiduals {
        spin_metric: r_d,
        chirality: r_h,
        pairing: r_pair,
        gamma: r_gam,
        metric: r_g,
    })
}

/// Residual of the commutator-transport identity
/// `[A_i, gamma_m] = Gamma^s_{im} gamma_s` for the canonical tables.
pub fn commutator_transport_residual(gamma: &GammaCoeffs, conn: &SpinConnection) -> f64 {
    let k = constants();
    let mut worst = 0.0f64;
    for i in 0..DIM {
        for m in 0..DIM {
            for a in 0..DIM {
                for b in 0..DIM {
                    let commutator: Complex64 = csum1(|th| {
                        conn.a[i][a][th] * k.gamma[m][th][b] - k.gamma[m][a][th] * conn.a[i][th][b]
                    });
                    let target = csum1(|s| k.gamma[s][a][b] * gamma.coeffs[s][i][m]);
                    worst = worst.max((commutator - target).norm());
                }
            }
        }
    }
    worst
}

/// Residual of the metric antisymmetry of the raised connection:
/// `Gamma^q_{is} g^{ps} + Gamma^p_{is} g^{sq} = 0` for metric-compatible
/// coefficients over an orthonormal frame.
pub fn metric_antisymmetry_residual(gamma: &GammaCoeffs) -> f64 {
    let k = constants();
    let mut worst = 0.0f64;
    for i in 0..DIM {
        for pp in 0..DIM {
            for q in 0..DIM {
                let s_val = sum1(|s| {
                    gamma.coeffs[q][i][s] * k.metric_dual[pp][s]
                        + gamma.coeffs[pp][i][s] * k.metric_dual[s][q]
                });
                worst = worst.max(s_val.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::field::ScalarField;
    use crate::linalg::{cmat4_mul, cmat4_sub, max_abs_cmat4, max_abs_mat4};
    use crate::rng::SplitMix64;
    use approx::assert_relative_eq;

    fn exp_scale_frame() -> FrameField {
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
        FrameField::from_exprs(&exprs, "exp-scale")
    }

    #[test]
    fn flat_connection_vanishes() {
        let frame = FrameField::coordinate();
        let metric = MatrixField::constant(constants().metric);
        let g = gamma_general(&metric, &frame, &[0.1, -0.4, 0.2, 0.9]).unwrap();
        assert!(g.max_abs() <= 1e-12);
        let a = spin_connection_orthonormal(&g);
        assert!(a.max_abs() <= 1e-12);
    }

    #[test]
    fn scaled_frame_connection_values() {
        let frame = exp_scale_frame();
        let p = [0.3, 0.1, -0.2, 0.4];
        let c = frame.commutation_coefficients(&p).unwrap();
        let g = gamma_orthonormal(&c);
        // Time-space and space-space blocks of the scaled frame.
        for i in 1..4 {
            assert_relative_eq!(g.get(i, 0, i), 0.0, epsilon = 1e-10);
            assert_relative_eq!(g.get(i, i, 0), 1.0, epsilon = 1e-10);
            assert_relative_eq!(g.get(0, i, i), 1.0, epsilon = 1e-10);
        }
        assert_relative_eq!(g.get(0, 0, 0), 0.0, epsilon = 1e-10);
        assert_relative_eq!(g.get(1, 2, 3), 0.0, epsilon = 1e-10);
        assert_relative_eq!(g.get(2, 1, 2), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn scaled_frame_spin_connection_is_boost_generator() {
        // With the values above, A_i = gamma_i gamma_0 / 2 for spacial i and
        // A_0 = 0.
        let frame = exp_scale_frame();
        let p = [0.0, 0.5, 0.5, -0.5];
        let c = frame.commutation_coefficients(&p).unwrap();
        let g = gamma_orthonormal(&c);
        let conn = spin_connection_orthonormal(&g);
        let k = constants();
        assert!(max_abs_cmat4(&conn.a[0]) <= 1e-12);
        for i in 1..4 {
            let expect = crate::linalg::cmat4_scale(&cmat4_mul(&k.gamma[i], &k.gamma[0]), cr(0.5));
            assert!(max_abs_cmat4(&cmat4_sub(&conn.a[i], &expect)) <= 1e-12);
        }
    }

    #[test]
    fn general_formula_reduces_over_orthonormal_frame() {
        let frame = exp_scale_frame();
        let p = [0.25, -0.3, 0.6, 0.1];
        let metric = MatrixField::constant(constants().metric);
        let reduced = {
            let c = frame.commutation_coefficients(&p).unwrap();
            gamma_orthonormal(&c)
        };
        let general = gamma_general(&metric, &frame, &p).unwrap();
        let diff = crate::linalg::rank3_sub(&general.coeffs, &reduced.coeffs);
        assert!(crate::linalg::max_abs_rank3(&diff) <= 1e-12);

        let tables = SpinTables::canonical();
        let a_general = spin_connection_general(&tables, &general, &frame, &p).unwrap();
        let a_reduced = spin_connection_orthonormal(&reduced);
        for i in 0..4 {
            assert!(
                max_abs_cmat4(&cmat4_sub(&a_general.a[i], &a_reduced.a[i])) <= 1e-12,
                "leg {i}"
            );
        }
    }

    #[test]
    fn coordinate_gauge_frozen_values() {
        // Time-scaled spatial metric diag(1, -e^{2 x0}, ...) over the
        // holonomic frame.
        let frame = FrameField::coordinate();
        let metric = MatrixField::from_fn(|i, j| {
            if i != j {
                ScalarField::constant(0.0)
            } else if i == 0 {
                ScalarField::constant(1.0)
            } else {
                ScalarField::from_expr(&parse("-exp(2*x0)").unwrap())
            }
        });
        let p = [0.35, 0.0, 0.0, 0.0];
        let g = gamma_general(&metric, &frame, &p).unwrap();
        let scale = (2.0 * 0.35f64).exp();
        for i in 1..4 {
            assert_relative_eq!(g.get(0, i, i), scale, epsilon = 1e-10);
            assert_relative_eq!(g.get(i, 0, i), 1.0, epsilon = 1e-10);
            assert_relative_eq!(g.get(i, i, 0), 1.0, epsilon = 1e-10);
        }
        assert_relative_eq!(g.get(0, 0, 0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(g.get(1, 1, 1), 0.0, epsilon = 1e-12);

        // Metric compatibility in the coordinate gauge.
        let res = {
            let mut worst = 0.0f64;
            for r in 0..4 {
                let grad = covariant_derivative_tensor2(&metric, &g, &frame, r, &p).unwrap();
                worst = worst.max(max_abs_mat4(&grad));
            }
            worst
        };
        assert!(res <= 1e-10);
    }

    #[test]
    fn transport_residuals_vanish_on_scaled_frame() {
        let frame = exp_scale_frame();
        let p = [0.4, 0.2, -0.7, 0.3];
        let c = frame.commutation_coefficients(&p).unwrap();
        let g = gamma_orthonormal(&c);
        let conn = spin_connection_orthonormal(&g);
        let tables = SpinTables::canonical();
        let res = concordance_residuals(&tables, &g, &conn, &frame, &p).unwrap();
        assert!(res.max() <= 1e-12, "residuals {res:?}");
    }

    #[test]
    fn transport_residual_detects_wrong_connection() {
        let frame = exp_scale_frame();
        let p = [0.4, 0.2, -0.7, 0.3];
        let c = frame.commutation_coefficients(&p).unwrap();
        let mut g = gamma_orthonormal(&c);
        g.coeffs[1][0][1] += 1e-3;
        let conn = spin_connection_orthonormal(&g);
        let tables = SpinTables::canonical();
        let res = concordance_residuals(&tables, &g, &conn, &frame, &p).unwrap();
        // The metric slot sees the raw coefficient twice.
        assert!(
            (1e-3..5e-3).contains(&res.metric),
            "metric residual {}",
            res.metric
        );
    }

    #[test]
    fn commutator_and_antisymmetry_identities_on_random_draws() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..25 {
            let c = CommutationCoeffs::random(&mut rng, 1.5);
            let g = gamma_orthonormal(&c);
            let conn = spin_connection_orthonormal(&g);
            assert!(metric_antisymmetry_residual(&g) <= 1e-12);
            assert!(commutator_transport_residual(&g, &conn) <= 1e-12);
        }
    }

    #[test]
    fn commutator_identity_fails_for_non_metric_coefficients() {
        // A symmetric-but-arbitrary Gamma is not metric-compatible, and the
        // commutator identity must visibly fail for it.
        let mut g = GammaCoeffs::zero();
        g.coeffs[1][0][0] = 0.3;
        g.coeffs[0][0][1] = 0.4;
        let conn = spin_connection_orthonormal(&g);
        assert!(commutator_transport_residual(&g, &conn) > 1e-2);
        assert!(metric_antisymmetry_residual(&g) > 1e-2);
    }

    #[test]
    fn degenerate_spinor_metric_is_reported() {
        let mut tables = SpinTables::canonical();
        tables.d4 = CMatrixField::constant(crate::linalg::zero_cmat4());
        let frame = FrameField::coordinate();
        let g = GammaCoeffs::zero();
        let err = spin_connection_general(&tables, &g, &frame, &[0.0; 4]).unwrap_err();
        assert_eq!(err.to_string(), "spinor metric degenerate");
    }

    #[test]
    fn singular_metric_is_reported() {
        let frame = FrameField::coordinate();
        let metric = MatrixField::constant([[0.0; 4]; 4]);
        let err = gamma_general(&metric, &frame, &[0.0; 4]).unwrap_err();
        assert_eq!(err.to_string(), "metric not invertible");
    }
}
