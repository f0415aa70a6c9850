//! Frames of four vector fields over a chart: directional derivatives,
//! commutation coefficients, and admissibility of frame transforms.
//!
//! A frame is stored through its coefficient fields `e_i^mu` in
//! `Y_i = sum_mu e_i^mu d/dx^mu`. Index `i` names the frame leg, `mu` the
//! chart coordinate; leg 0 is the time direction.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{ChartPoint, Field, FieldValue, ScalarField};
use crate::linalg::{det4, invert4, mat4, Mat4, DIM};
use crate::rng::SplitMix64;
use crate::tolerances::{ADMISSIBILITY_MARGIN, FRAME_DEGENERACY_REL};

/// Orientation and time-polarization admissibility of a frame transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameFlags {
    /// `det F > 0`: the transform preserves orientation.
    pub oriented: bool,
    /// `F^0_0 > 0`: the transform keeps the time leg forward-pointing.
    pub forward: bool,
}

impl FrameFlags {
    pub fn admissible(self) -> bool {
        self.oriented && self.forward
    }
}

/// Evaluates both admissibility flags of a transform matrix, with a fixed
/// positivity margin so exact-zero cases fail deterministically.
pub fn frame_admissibility(f: &Mat4) -> FrameFlags {
    FrameFlags {
        oriented: det4(f) > ADMISSIBILITY_MARGIN,
        forward: f[0][0] > ADMISSIBILITY_MARGIN,
    }
}

/// Four vector fields spanning the tangent space over a chart domain.
#[derive(Clone)]
pub struct FrameField {
    /// `coeffs[i][mu]` is the field `e_i^mu`.
    pub coeffs: [[ScalarField; DIM]; DIM],
    /// Human-readable tag carried into reports.
    pub label: String,
}

impl FrameField {
    pub fn new(coeffs: [[ScalarField; DIM]; DIM], label: impl Into<String>) -> Self {
        FrameField {
            coeffs,
            label: label.into(),
        }
    }

    /// The holonomic frame of the chart: `Y_mu = d/dx^mu`.
    pub fn coordinate() -> Self {
        FrameField::new(
            std::array::from_fn(|i| {
                std::array::from_fn(|mu| ScalarField::constant(if i == mu { 1.0 } else { 0.0 }))
            }),
            "coordinate",
        )
    }

    /// Builds a frame from one expression per coefficient.
    pub fn from_exprs(exprs: &[[Expr; DIM]; DIM], label: impl Into<String>) -> Self {
        FrameField::new(
            std::array::from_fn(|i| {
                std::array::from_fn(|mu| ScalarField::from_expr(&exprs[i][mu]))
            }),
            label,
        )
    }

    /// Coefficient matrix `e_i^mu` at a point (row `i`, column `mu`).
    pub fn matrix(&self, p: &ChartPoint) -> Mat4 {
        mat4(|i, mu| self.coeffs[i][mu].eval(p))
    }

    /// Directional derivative `L_i f` along frame leg `i`.
    ///
    /// Zero coefficients short-circuit, so sparse frames cost four partials
    /// at most and do not probe directions they never use.
    pub fn directional_derivative<T: FieldValue>(
        &self,
        f: &Field<T>,
        i: usize,
        p: &ChartPoint,
    ) -> Result<T> {
        let mut acc = T::zero();
        for mu in 0..DIM {
            let e = self.coeffs[i][mu].eval(p);
            if e != 0.0 {
                acc = acc + f.partial(p, mu)? * e;
            }
        }
        Ok(acc)
    }

    /// Degeneracy guard: `|det e|` must clear a fixed fraction of the row
    /// norm product; returns the evaluated matrix for reuse.
    pub fn checked_matrix(&self, p: &ChartPoint) -> Result<Mat4> {
        let e = self.matrix(p);
        let mut row_norm_product = 1.0;
        for row in &e {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            row_norm_product *= norm;
        }
        if det4(&e).abs() < FRAME_DEGENERACY_REL * row_norm_product {
            return Err(Error::DegenerateFrame);
        }
        Ok(e)
    }

    /// Pulls a rank-2 lower-index chart tensor field back onto this frame:
    /// `t'_{ij}(x) = sum_{p,q} e_i^p(x) e_j^q(x) t_{pq}(x)`.
    ///
    /// Analytic gradients survive when both the frame coefficients and the
    /// tensor components carry them.
    pub fn pullback_tensor2(&self, t: &crate::field::MatrixField) -> crate::field::MatrixField {
        use crate::field::{lin_comb, product, MatrixField, ScalarField};
        MatrixField::from_fn(|i, j| {
            let mut acc = ScalarField::constant(0.0);
            for p in 0..DIM {
                for q in 0..DIM {
                    let term = product(
                        &product(&self.coeffs[i][p], &self.coeffs[j][q]),
                        t.comp(p, q),
                    );
                    acc = lin_comb(1.0, &acc, 1.0, &term);
                }
            }
            acc
        })
    }

    /// Commutation coefficients `c^k_{ij}` at a point, defined by
    /// `[Y_i, Y_j] = sum_k c^k_{ij} Y_k`.
    ///
    /// The commutator components in the chart basis are
    /// `w^mu_{ij} = L_i e_j^mu - L_j e_i^mu`; expanding back over the frame
    /// solves `sum_k c^k e_k^mu = w^mu` with the inverse coefficient matrix.
    pub fn commutation_coefficients(&self, p: &ChartPoint) -> Result<CommutationCoeffs> {
        let e = self.checked_matrix(p)?;
        let e_inv = invert4(&e).ok_or(Error::DegenerateFrame)?;

        // L_i e_j^mu for every ordered pair; computed once, used twice.
        let mut dirderiv = [[[0.0; DIM]; DIM]; DIM]; // [i][j][mu]
        for i in 0..DIM {
            for j in 0..DIM {
                for mu in 0..DIM {
                    dirderiv[i][j][mu] = self.directional_derivative(&self.coeffs[j][mu], i, p)?;
                }
            }
        }

        Ok(CommutationCoeffs::from_upper(|k, i, j| {
            let mut ck = 0.0;
            for mu in 0..DIM {
                let w = dirderiv[i][j][mu] - dirderiv[j][i][mu];
                ck += w * e_inv[mu][k];
            }
            ck
        }))
    }
}

/// Commutation coefficients at a point, antisymmetric in the lower pair.
///
/// Only the `i < j` entries are stored; the accessor mirrors them with the
/// opposite sign, so `c^k_{ij} = -c^k_{ji}` holds by construction and the
/// diagonal is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationCoeffs {
    upper: [[[f64; DIM]; DIM]; DIM], // [k][i][j], populated for i < j
}

impl CommutationCoeffs {
    /// Builds from a generator called once per `k` and ordered pair `i < j`.
    pub fn from_upper(mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut upper = [[[0.0; DIM]; DIM]; DIM];
        for k in 0..DIM {
            for i in 0..DIM {
                for j in (i + 1)..DIM {
                    upper[k][i][j] = f(k, i, j);
                }
            }
        }
        CommutationCoeffs { upper }
    }

    pub fn zero() -> Self {
        CommutationCoeffs::from_upper(|_, _, _| 0.0)
    }

    /// `c^k_{ij}` with the antisymmetry applied structurally.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => self.upper[k][i][j],
            Ordering::Greater => -self.upper[k][j][i],
            Ordering::Equal => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for k in 0..DIM {
            for i in 0..DIM {
                for j in (i + 1)..DIM {
                    m = m.max(self.upper[k][i][j].abs());
                }
            }
        }
        m
    }

    /// Independent draw with entries uniform in `[-amplitude, amplitude]`.
    pub fn random(rng: &mut SplitMix64, amplitude: f64) -> Self {
        CommutationCoeffs::from_upper(|_, _, _| rng.uniform(-1.0, 1.0) * amplitude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_relative_eq;

    fn exp_scale_frame() -> FrameField {
        // Y_0 = d/dx0, Y_i = exp(-x0) d/dx^i for i = 1..3.
        let exprs: [[Expr; 4]; 4] = std::array::from_fn(|i| {
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
    fn coordinate_frame_commutes() {
        let frame = FrameField::coordinate();
        let c = frame
            .commutation_coefficients(&[0.3, -0.2, 0.9, 0.0])
            .unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn directional_derivative_weights_partials() {
        // L along Y_1 = exp(-x0) d/dx1 of f = x1^2 is 2 x1 exp(-x0).
        let frame = exp_scale_frame();
        let f = ScalarField::from_expr(&parse("x1^2").unwrap());
        let p = [0.5, 3.0, 0.0, 0.0];
        let d = frame.directional_derivative(&f, 1, &p).unwrap();
        assert_relative_eq!(d, 6.0 * (-0.5f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn scaled_frame_commutators() {
        // [Y_0, Y_i] = -exp(-x0) d/dx^i = -Y_i, so c^i_{0i} = -1.
        let frame = exp_scale_frame();
        let p = [0.2, 0.4, -0.1, 0.3];
        let c = frame.commutation_coefficients(&p).unwrap();
        for i in 1..4 {
            assert_relative_eq!(c.get(i, 0, i), -1.0, epsilon = 1e-10);
            assert_relative_eq!(c.get(i, i, 0), 1.0, epsilon = 1e-10);
        }
        // No other coefficients appear.
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let expected = if i == 0 && j == k && k != 0 {
                        -1.0
                    } else if j == 0 && i == k && k != 0 {
                        1.0
                    } else {
                        0.0
                    };
                    assert_relative_eq!(c.get(k, i, j), expected, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn antisymmetry_is_structural() {
        let mut rng = SplitMix64::new(11);
        let c = CommutationCoeffs::random(&mut rng, 1.0);
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(c.get(k, i, j), -c.get(k, j, i));
                }
            }
        }
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let mut coeffs: [[ScalarField; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|mu| ScalarField::constant(if i == mu { 1.0 } else { 0.0 }))
        });
        // Make leg 3 a multiple of leg 2.
        coeffs[3] =
            std::array::from_fn(|mu| ScalarField::constant(if mu == 2 { 2.0 } else { 0.0 }));
        let frame = FrameField::new(coeffs, "collapsed");
        let err = frame.commutation_coefficients(&[0.0; 4]).unwrap_err();
        assert_eq!(err.to_string(), "degenerate frame");
    }

    #[test]
    fn admissibility_flags() {
        let id = crate::linalg::identity4();
        assert!(frame_admissibility(&id).admissible());

        let mut reflected = id;
        reflected[1][1] = -1.0;
        let flags = frame_admissibility(&reflected);
        assert!(!flags.oriented);
        assert!(flags.forward);

        let mut time_flip = id;
        time_flip[0][0] = -1.0;
        time_flip[1][1] = -1.0;
        let flags = frame_admissibility(&time_flip);
        assert!(flags.oriented);
        assert!(!flags.forward);
    }
}
