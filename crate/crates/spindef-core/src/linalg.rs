//! Fixed-size tensor helpers for four-dimensional frame calculus.
//!
//! Everything is a plain nested array indexed `[row][col]` (matrices) or
//! `[upper][lower][lower]` (connection-like rank-3 tables), so the index
//! gymnastics in the geometry modules reads exactly like the written sums.
//! `nalgebra` is used only where an inverse or determinant is needed.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

/// Spacetime dimension. All spacial indices run over `0..DIM`; index 0 is
/// the time direction.
pub const DIM: usize = 4;

pub type Vec4 = [f64; DIM];
pub type Mat4 = [[f64; DIM]; DIM];
pub type Rank3 = [[[f64; DIM]; DIM]; DIM];
pub type CVec4 = [Complex64; DIM];
pub type CMat2 = [[Complex64; 2]; 2];
pub type CMat4 = [[Complex64; DIM]; DIM];

/// Shorthand complex constructor.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real number as a complex value.
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a 4-vector entrywise.
pub fn vec4(f: impl FnMut(usize) -> f64) -> Vec4 {
    std::array::from_fn(f)
}

/// Builds a 4x4 real matrix entrywise.
pub fn mat4(mut f: impl FnMut(usize, usize) -> f64) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

/// Builds a rank-3 table entrywise, index order `[k][i][j]`.
pub fn rank3(mut f: impl FnMut(usize, usize, usize) -> f64) -> Rank3 {
    std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| f(k, i, j))))
}

/// Builds a complex 4-vector entrywise.
pub fn cvec4(f: impl FnMut(usize) -> Complex64) -> CVec4 {
    std::array::from_fn(f)
}

/// Builds a 2x2 complex matrix entrywise.
pub fn cmat2(mut f: impl FnMut(usize, usize) -> Complex64) -> CMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

/// Builds a 4x4 complex matrix entrywise.
pub fn cmat4(mut f: impl FnMut(usize, usize) -> Complex64) -> CMat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub fn identity4() -> Mat4 {
    mat4(|i, j| if i == j { 1.0 } else { 0.0 })
}

pub fn zero_cmat4() -> CMat4 {
    cmat4(|_, _| cr(0.0))
}

/// Sum of `f` over one index.
pub fn sum1(mut f: impl FnMut(usize) -> f64) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        s += f(i);
    }
    s
}

/// Sum of `f` over two indices.
pub fn sum2(mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            s += f(i, j);
        }
    }
    s
}

/// Sum of `f` over three indices.
pub fn sum3(mut f: impl FnMut(usize, usize, usize) -> f64) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                s += f(i, j, k);
            }
        }
    }
    s
}

/// Complex sum over one index.
pub fn csum1(mut f: impl FnMut(usize) -> Complex64) -> Complex64 {
    let mut s = cr(0.0);
    for i in 0..DIM {
        s += f(i);
    }
    s
}

/// Complex sum over two indices.
pub fn csum2(mut f: impl FnMut(usize, usize) -> Complex64) -> Complex64 {
    let mut s = cr(0.0);
    for i in 0..DIM {
        for j in 0..DIM {
            s += f(i, j);
        }
    }
    s
}

/// Complex sum over three indices.
pub fn csum3(mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Complex64 {
    let mut s = cr(0.0);
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                s += f(i, j, k);
            }
        }
    }
    s
}

/// Complex sum over four indices.
pub fn csum4(mut f: impl FnMut(usize, usize, usize, usize) -> Complex64) -> Complex64 {
    let mut s = cr(0.0);
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    s += f(i, j, k, l);
                }
            }
        }
    }
    s
}

/// Entrywise complex conjugate.
pub fn conj4(m: &CMat4) -> CMat4 {
    cmat4(|i, j| m[i][j].conj())
}

/// Real matrix product.
pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    mat4(|i, j| sum1(|k| a[i][k] * b[k][j]))
}

/// Complex matrix product.
pub fn cmat4_mul(a: &CMat4, b: &CMat4) -> CMat4 {
    cmat4(|i, j| csum1(|k| a[i][k] * b[k][j]))
}

pub fn cmat4_add(a: &CMat4, b: &CMat4) -> CMat4 {
    cmat4(|i, j| a[i][j] + b[i][j])
}

pub fn cmat4_sub(a: &CMat4, b: &CMat4) -> CMat4 {
    cmat4(|i, j| a[i][j] - b[i][j])
}

pub fn cmat4_scale(a: &CMat4, s: Complex64) -> CMat4 {
    cmat4(|i, j| a[i][j] * s)
}

pub fn mat4_sub(a: &Mat4, b: &Mat4) -> Mat4 {
    mat4(|i, j| a[i][j] - b[i][j])
}

pub fn rank3_sub(a: &Rank3, b: &Rank3) -> Rank3 {
    rank3(|k, i, j| a[k][i][j] - b[k][i][j])
}

/// Largest absolute entry.
pub fn max_abs_vec4(v: &Vec4) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_mat4(m: &Mat4) -> f64 {
    let mut r = 0.0f64;
    for row in m {
        for x in row {
            r = r.max(x.abs());
        }
    }
    r
}

pub fn max_abs_rank3(t: &Rank3) -> f64 {
    let mut r = 0.0f64;
    for m in t {
        r = r.max(max_abs_mat4(m));
    }
    r
}

pub fn max_abs_cvec4(v: &CVec4) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_cmat4(m: &CMat4) -> f64 {
    let mut r = 0.0f64;
    for row in m {
        for z in row {
            r = r.max(z.norm());
        }
    }
    r
}

pub fn max_abs_cmat2(m: &CMat2) -> f64 {
    let mut r = 0.0f64;
    for row in m {
        for z in row {
            r = r.max(z.norm());
        }
    }
    r
}

/// Determinant of a real 4x4 matrix.
pub fn det4(m: &Mat4) -> f64 {
    Matrix4::from_fn(|i, j| m[i][j]).determinant()
}

/// Inverse of a real 4x4 matrix, `None` when singular.
pub fn invert4(m: &Mat4) -> Option<Mat4> {
    Matrix4::from_fn(|i, j| m[i][j])
        .try_inverse()
        .map(|inv| mat4(|i, j| inv[(i, j)]))
}

/// Inverse of a complex 4x4 matrix, `None` when singular.
pub fn cinvert4(m: &CMat4) -> Option<CMat4> {
    Matrix4::from_fn(|i, j| m[i][j])
        .try_inverse()
        .map(|inv| cmat4(|i, j| inv[(i, j)]))
}

/// Inverse of a complex 2x2 matrix, `None` when singular.
pub fn cinvert2(m: &CMat2) -> Option<CMat2> {
    Matrix2::from_fn(|i, j| m[i][j])
        .try_inverse()
        .map(|inv| cmat2(|i, j| inv[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn invert4_recovers_identity() {
        let m = mat4(|i, j| {
            if i == j {
                (i + 2) as f64
            } else {
                0.3 / (1.0 + i as f64 + j as f64)
            }
        });
        let inv = invert4(&m).unwrap();
        let prod = mat4_mul(&m, &inv);
        let id = identity4();
        for i in 0..DIM {
            for j in 0..DIM {
                assert_relative_eq!(prod[i][j], id[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn invert4_rejects_singular() {
        let m = mat4(|i, _| i as f64); // identical columns
        assert!(invert4(&m).is_none());
    }

    #[test]
    fn cinvert2_basic() {
        let m: CMat2 = [[c(0.0, 1.0), cr(2.0)], [cr(-1.0), c(1.0, -1.0)]];
        let inv = cinvert2(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let p = m[i][0] * inv[0][j] + m[i][1] * inv[1][j];
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((p - cr(expect)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn det4_diagonal() {
        let m = mat4(|i, j| if i == j { 1.0 + i as f64 } else { 0.0 });
        assert_relative_eq!(det4(&m), 24.0, epsilon = 1e-12);
    }

    #[test]
    fn sums_count_terms() {
        assert_relative_eq!(sum1(|_| 1.0), 4.0);
        assert_relative_eq!(sum2(|_, _| 1.0), 16.0);
        assert_relative_eq!(sum3(|_, _, _| 1.0), 64.0);
        assert_eq!(csum4(|_, _, _, _| cr(1.0)), cr(256.0));
    }
}
