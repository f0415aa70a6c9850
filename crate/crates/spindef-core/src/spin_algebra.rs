//! Constant matrix tables of the spinor calculus and their algebraic
//! identities.
//!
//! The tables are stored as Gaussian-integer literals and converted to
//! floating point at use sites; every identity check here also runs in exact
//! integer arithmetic, so a zero residual means the identity holds exactly,
//! not merely to round-off.
//!
//! Index conventions, used verbatim across the crate:
//! - `gamma[p][a][b]`: spacial index `p`, row `a` = upper spinor index,
//!   column `b` = lower spinor index.
//! - `pauli[k][i][id]`: row `i` = upper plain 2-spinor index, column `id` =
//!   upper conjugate 2-spinor index.
//! - `d4[a][b]`, `pairing[a][ad]`: both indices lower; for the pairing the
//!   first is plain, the second conjugate.
//! - `chirality[a][b]`: row upper, column lower.
//!
//! Spinor indices are 0-based internally; classical sources count from 1, so
//! component `(a, b)` here is `(a+1, b+1)` there.

use std::sync::OnceLock;

use num_complex::Complex;

use crate::linalg::{c, cmat4, cr, CMat2, CMat4, Mat4, DIM};

type GInt = Complex<i64>;

const Z: (i64, i64) = (0, 0);
const P: (i64, i64) = (1, 0);
const M: (i64, i64) = (-1, 0);
const PI: (i64, i64) = (0, 1);
const MI: (i64, i64) = (0, -1);

/// Frame metric of an orthonormal frame; equal to its dual.
const METRIC_T: [[i64; 4]; 4] = [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]];

/// Rank-2 skew spinor metric and its inverse.
const D2_T: [[i64; 2]; 2] = [[0, 1], [-1, 0]];
const D2_DUAL_T: [[i64; 2]; 2] = [[0, -1], [1, 0]];

/// Hermitian linking tables of the 2-spinor sector.
const PAULI_T: [[[(i64, i64); 2]; 2]; 4] = [
    [[P, Z], [Z, P]],
    [[Z, P], [P, Z]],
    [[Z, MI], [PI, Z]],
    [[P, Z], [Z, M]],
];

/// Rank-4 skew spinor metric; squares to minus the identity.
const D4_T: [[i64; 4]; 4] = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]];

/// Chirality involution.
const CHIRALITY_T: [[i64; 4]; 4] = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]];

/// Hermitian pairing between conjugate and plain 4-spinors.
const PAIRING_T: [[i64; 4]; 4] = [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]];

/// The four gamma tables, `GAMMA_T[p][a][b]`.
const GAMMA_T: [[[(i64, i64); 4]; 4]; 4] = [
    [[Z, Z, P, Z], [Z, Z, Z, P], [P, Z, Z, Z], [Z, P, Z, Z]],
    [[Z, Z, Z, P], [Z, Z, P, Z], [Z, M, Z, Z], [M, Z, Z, Z]],
    [[Z, Z, Z, MI], [Z, Z, PI, Z], [Z, PI, Z, Z], [MI, Z, Z, Z]],
    [[Z, Z, P, Z], [Z, Z, Z, M], [M, Z, Z, Z], [Z, P, Z, Z]],
];

/// Index signature of a spin-tensorial quantity: counts of (upper, lower)
/// plain-spinor, (upper, lower) conjugate-spinor, and (upper, lower) spacial
/// indices. The signature decides which connection terms act on each slot
/// during covariant differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinTensorType {
    pub spinor: (u8, u8),
    pub conjugate: (u8, u8),
    pub spacial: (u8, u8),
}

impl SpinTensorType {
    pub const SPIN_METRIC_2: SpinTensorType = SpinTensorType {
        spinor: (0, 2),
        conjugate: (0, 0),
        spacial: (0, 0),
    };
    pub const PAULI_LINK: SpinTensorType = SpinTensorType {
        spinor: (1, 0),
        conjugate: (1, 0),
        spacial: (0, 1),
    };
    pub const SPIN_METRIC_4: SpinTensorType = SpinTensorType {
        spinor: (0, 2),
        conjugate: (0, 0),
        spacial: (0, 0),
    };
    pub const CHIRALITY: SpinTensorType = SpinTensorType {
        spinor: (1, 1),
        conjugate: (0, 0),
        spacial: (0, 0),
    };
    pub const PAIRING: SpinTensorType = SpinTensorType {
        spinor: (0, 1),
        conjugate: (0, 1),
        spacial: (0, 0),
    };
    pub const GAMMA: SpinTensorType = SpinTensorType {
        spinor: (1, 1),
        conjugate: (0, 0),
        spacial: (0, 1),
    };
}

/// Floating-point view of all constant tables.
pub struct SpinConstants {
    pub metric: Mat4,
    pub metric_dual: Mat4,
    pub d2: CMat2,
    pub d2_dual: CMat2,
    pub pauli: [CMat2; 4],
    pub d4: CMat4,
    pub d4_dual: CMat4,
    pub chirality: CMat4,
    pub pairing: CMat4,
    pub gamma: [CMat4; 4],
}

/// Shared instance of the constant tables.
pub fn constants() -> &'static SpinConstants {
    static CELL: OnceLock<SpinConstants> = OnceLock::new();
    CELL.get_or_init(|| SpinConstants {
        metric: real4_to_f(&METRIC_T),
        metric_dual: real4_to_f(&METRIC_T),
        d2: real2_to_c(&D2_T),
        d2_dual: real2_to_c(&D2_DUAL_T),
        pauli: std::array::from_fn(|k| pairs2_to_c(&PAULI_T[k])),
        d4: real4_to_c(&D4_T),
        // The rank-4 spinor metric squares to -1, so its inverse is its
        // negative; checked exactly below.
        d4_dual: real4_to_c(&neg4(&D4_T)),
        chirality: real4_to_c(&CHIRALITY_T),
        pairing: real4_to_c(&PAIRING_T),
        gamma: std::array::from_fn(|p| pairs4_to_c(&GAMMA_T[p])),
    })
}

fn real4_to_f(t: &[[i64; 4]; 4]) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| t[i][j] as f64))
}

fn real4_to_c(t: &[[i64; 4]; 4]) -> CMat4 {
    cmat4(|i, j| cr(t[i][j] as f64))
}

fn real2_to_c(t: &[[i64; 2]; 2]) -> CMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| cr(t[i][j] as f64)))
}

fn pairs2_to_c(t: &[[(i64, i64); 2]; 2]) -> CMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| c(t[i][j].0 as f64, t[i][j].1 as f64)))
}

fn pairs4_to_c(t: &[[(i64, i64); 4]; 4]) -> CMat4 {
    cmat4(|i, j| c(t[i][j].0 as f64, t[i][j].1 as f64))
}

fn neg4(t: &[[i64; 4]; 4]) -> [[i64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| -t[i][j]))
}

// ---- exact Gaussian-integer arithmetic --------------------------------

fn gi(re: i64, im: i64) -> GInt {
    Complex::new(re, im)
}

fn from_real<const N: usize>(t: &[[i64; N]; N]) -> [[GInt; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| gi(t[i][j], 0)))
}

fn from_pairs<const N: usize>(t: &[[(i64, i64); N]; N]) -> [[GInt; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| gi(t[i][j].0, t[i][j].1)))
}

fn gmul<const N: usize>(a: &[[GInt; N]; N], b: &[[GInt; N]; N]) -> [[GInt; N]; N] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = gi(0, 0);
            for k in 0..N {
                s += a[i][k] * b[k][j];
            }
            s
        })
    })
}

fn gadd<const N: usize>(a: &[[GInt; N]; N], b: &[[GInt; N]; N]) -> [[GInt; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j]))
}

fn gsub<const N: usize>(a: &[[GInt; N]; N], b: &[[GInt; N]; N]) -> [[GInt; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

fn gtrans<const N: usize>(a: &[[GInt; N]; N]) -> [[GInt; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

fn gconj<const N: usize>(a: &[[GInt; N]; N]) -> [[GInt; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].conj()))
}

fn gscaled_identity<const N: usize>(s: i64) -> [[GInt; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| gi(if i == j { s } else { 0 }, 0)))
}

/// Largest `|re| + |im|` over the entries, as a float residual.
fn gmax<const N: usize>(a: &[[GInt; N]; N]) -> f64 {
    let mut worst = 0i64;
    for row in a {
        for z in row {
            worst = worst.max(z.re.abs() + z.im.abs());
        }
    }
    worst as f64
}

fn gammas_exact() -> [[[GInt; 4]; 4]; 4] {
    std::array::from_fn(|p| from_pairs(&GAMMA_T[p]))
}

// ---- exact identity checks (return 0.0 when the identity holds) -------

/// `d2_dual * d2 = id` on the 2-spinor sector.
pub fn check_d2_inverse() -> f64 {
    let prod = gmul(&from_real(&D2_DUAL_T), &from_real(&D2_T));
    gmax(&gsub(&prod, &gscaled_identity::<2>(1)))
}

/// `d4 * d4 = -id`, which makes `-d4` the rank-4 dual.
pub fn check_d4_inverse() -> f64 {
    let d4 = from_real(&D4_T);
    gmax(&gadd(&gmul(&d4, &d4), &gscaled_identity::<4>(1)))
}

/// Anticommutation `gamma_p gamma_q + gamma_q gamma_p = 2 g_pq id`.
pub fn check_clifford() -> f64 {
    let gam = gammas_exact();
    let mut worst = 0.0f64;
    for p in 0..DIM {
        for q in 0..DIM {
            let anti = gadd(&gmul(&gam[p], &gam[q]), &gmul(&gam[q], &gam[p]));
            let res = gsub(&anti, &gscaled_identity::<4>(2 * METRIC_T[p][q]));
            worst = worst.max(gmax(&res));
        }
    }
    worst
}

/// The chirality operator squares to the identity and anticommutes with
/// every gamma table.
pub fn check_chirality() -> f64 {
    let h = from_real(&CHIRALITY_T);
    let gam = gammas_exact();
    let mut worst = gmax(&gsub(&gmul(&h, &h), &gscaled_identity::<4>(1)));
    for p in 0..DIM {
        let anti = gadd(&gmul(&h, &gam[p]), &gmul(&gam[p], &h));
        worst = worst.max(gmax(&anti));
    }
    worst
}

/// Conjugation symmetry of the pairing: `pairing * conj(gamma_p)` equals
/// `transpose(gamma_p) * pairing` for every `p`. This is the identity that
/// makes the scalar density below real.
pub fn check_reality_identity() -> f64 {
    let d = from_real(&PAIRING_T);
    let gam = gammas_exact();
    let mut worst = 0.0f64;
    for p in 0..DIM {
        let lhs = gmul(&d, &gconj(&gam[p]));
        let rhs = gmul(&gtrans(&gam[p]), &d);
        worst = worst.max(gmax(&gsub(&lhs, &rhs)));
    }
    worst
}

/// Skewness of the fully lowered gamma: `d4 * gamma_p = -transpose(gamma_p) * d4`.
pub fn check_gamma_skew() -> f64 {
    let d4 = from_real(&D4_T);
    let gam = gammas_exact();
    let mut worst = 0.0f64;
    for p in 0..DIM {
        let lhs = gmul(&d4, &gam[p]);
        let rhs = gmul(&gtrans(&gam[p]), &d4);
        worst = worst.max(gmax(&gadd(&lhs, &rhs)));
    }
    worst
}

/// Hermiticity of the 2-spinor linking tables.
pub fn check_pauli_hermitian() -> f64 {
    let mut worst = 0.0f64;
    for k in 0..DIM {
        let g = from_pairs(&PAULI_T[k]);
        worst = worst.max(gmax(&gsub(&g, &gconj(&gtrans(&g)))));
    }
    worst
}

// ---- floating-point residuals over caller-supplied tables -------------
//
// These exist so tests can verify that the residuals actually detect
// corrupted tables: perturb one entry by 1e-3 and the residual moves by the
// same order.

/// Float version of the pairing conjugation symmetry.
pub fn reality_residual(gamma: &[CMat4; 4], pairing: &CMat4) -> f64 {
    let mut worst = 0.0f64;
    for p in 0..DIM {
        for ad in 0..DIM {
            for b in 0..DIM {
                let mut lhs = cr(0.0);
                let mut rhs = cr(0.0);
                for a in 0..DIM {
                    lhs += pairing[a][ad].conj() * gamma[p][a][b].conj();
                    rhs += pairing[a][b] * gamma[p][a][ad];
                }
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    worst
}

/// Float version of the anticommutation relation.
pub fn clifford_residual(gamma: &[CMat4; 4], metric: &Mat4) -> f64 {
    let mut worst = 0.0f64;
    for p in 0..DIM {
        for q in 0..DIM {
            for a in 0..DIM {
                for b in 0..DIM {
                    let mut s = cr(0.0);
                    for th in 0..DIM {
                        s += gamma[p][a][th] * gamma[q][th][b] + gamma[q][a][th] * gamma[p][th][b];
                    }
                    let expect = if a == b { 2.0 * metric[p][q] } else { 0.0 };
                    worst = worst.max((s - cr(expect)).norm());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_cmat4;

    #[test]
    fn exact_identities_hold() {
        assert_eq!(check_d2_inverse(), 0.0);
        assert_eq!(check_d4_inverse(), 0.0);
        assert_eq!(check_clifford(), 0.0);
        assert_eq!(check_chirality(), 0.0);
        assert_eq!(check_reality_identity(), 0.0);
        assert_eq!(check_gamma_skew(), 0.0);
        assert_eq!(check_pauli_hermitian(), 0.0);
    }

    #[test]
    fn float_residuals_agree_on_canonical_tables() {
        let k = constants();
        assert!(reality_residual(&k.gamma, &k.pairing) <= 1e-15);
        assert!(clifford_residual(&k.gamma, &k.metric) <= 1e-15);
    }

    #[test]
    fn residuals_detect_corrupted_tables() {
        let k = constants();
        let mut gamma = k.gamma;
        gamma[2][0][3] += c(1e-3, 0.0);
        let r = reality_residual(&gamma, &k.pairing);
        assert!((5e-4..5e-3).contains(&r), "residual {r} not near 1e-3");
        let rc = clifford_residual(&gamma, &k.metric);
        assert!(rc >= 5e-4, "clifford residual {rc} too small");
    }

    #[test]
    fn pauli_tables_match_gamma_blocks() {
        // In this representation the gamma tables are built from the
        // 2-sector links: gamma_0 has identity off-diagonal blocks and
        // gamma_k has (sigma_k, -sigma_k).
        let k = constants();
        for p in 1..4 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(k.gamma[p][i][j + 2], k.pauli[p][i][j]);
                    assert_eq!(k.gamma[p][i + 2][j], -k.pauli[p][i][j]);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(k.gamma[0][i][j + 2], k.pauli[0][i][j]);
                assert_eq!(k.gamma[0][i + 2][j], k.pauli[0][i][j]);
            }
        }
    }

    #[test]
    fn dual_tables_invert() {
        let k = constants();
        let prod = crate::linalg::cmat4_mul(&k.d4_dual, &k.d4);
        let id = crate::linalg::cmat4(|i, j| cr(if i == j { 1.0 } else { 0.0 }));
        assert!(max_abs_cmat4(&crate::linalg::cmat4_sub(&prod, &id)) <= 1e-15);
    }

    #[test]
    fn type_signatures() {
        assert_eq!(SpinTensorType::GAMMA.spinor, (1, 1));
        assert_eq!(SpinTensorType::GAMMA.spacial, (0, 1));
        assert_eq!(SpinTensorType::PAIRING.conjugate, (0, 1));
        assert_eq!(SpinTensorType::PAULI_LINK.conjugate, (1, 0));
    }
}
