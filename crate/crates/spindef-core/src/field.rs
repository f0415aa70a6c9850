//! Evaluable fields over a four-dimensional coordinate chart.
//!
//! Fields are closures over chart points rather than sampled grids: every
//! operation downstream works pointwise and on demand. Partial derivatives
//! come from an optional analytic gradient closure when the constructor
//! supplies one, otherwise from second-order central differences with a
//! per-coordinate step `fd_step * max(1, |x^mu|)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{cmat4, cvec4, mat4, CMat4, CVec4, Mat4, DIM};
use crate::tolerances::DEFAULT_FD_STEP;

/// A point in a single 4D coordinate chart.
pub type ChartPoint = [f64; DIM];

/// Value types a field can take: closed under the arithmetic the derivative
/// stencils need, with a finiteness test.
pub trait FieldValue:
    Copy
    + Send
    + Sync
    + 'static
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Self, Output = Self>
    + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn value_is_finite(&self) -> bool;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn value_is_finite(&self) -> bool {
        self.is_finite()
    }
}

impl FieldValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn value_is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

type EvalFn<T> = dyn Fn(&ChartPoint) -> T + Send + Sync;
type GradFn<T> = dyn Fn(&ChartPoint) -> [T; DIM] + Send + Sync;

/// A map from chart points to scalars with derivative support.
pub struct Field<T> {
    eval: Arc<EvalFn<T>>,
    grad: Option<Arc<GradFn<T>>>,
    /// Relative step used by the fallback difference stencil.
    pub fd_step: f64,
}

impl<T> Clone for Field<T> {
    fn clone(&self) -> Self {
        Field {
            eval: Arc::clone(&self.eval),
            grad: self.grad.as_ref().map(Arc::clone),
            fd_step: self.fd_step,
        }
    }
}

impl<T: FieldValue> Field<T> {
    pub fn new(eval: impl Fn(&ChartPoint) -> T + Send + Sync + 'static) -> Self {
        Field {
            eval: Arc::new(eval),
            grad: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Attaches an analytic gradient closure; derivative calls use it
    /// instead of the difference stencil.
    pub fn with_gradient(
        mut self,
        grad: impl Fn(&ChartPoint) -> [T; DIM] + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    /// Constant field; carries an exact zero gradient.
    pub fn constant(v: T) -> Self {
        Field::new(move |_| v).with_gradient(|_| [T::zero(); DIM])
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn eval(&self, p: &ChartPoint) -> T {
        (self.eval)(p)
    }

    /// Partial derivative along coordinate `mu`.
    pub fn partial(&self, p: &ChartPoint, mu: usize) -> Result<T> {
        if let Some(grad) = &self.grad {
            let g = grad(p)[mu];
            if !g.value_is_finite() {
                return Err(Error::FieldNotDifferentiable);
            }
            return Ok(g);
        }
        let step = self.fd_step * p[mu].abs().max(1.0);
        let mut hi = *p;
        hi[mu] += step;
        let mut lo = *p;
        lo[mu] -= step;
        let f_hi = (self.eval)(&hi);
        let f_lo = (self.eval)(&lo);
        if !f_hi.value_is_finite() || !f_lo.value_is_finite() {
            return Err(Error::FieldNotDifferentiable);
        }
        Ok((f_hi - f_lo) * (1.0 / (2.0 * step)))
    }

    /// All four partial derivatives.
    pub fn gradient(&self, p: &ChartPoint) -> Result<[T; DIM]> {
        Ok([
            self.partial(p, 0)?,
            self.partial(p, 1)?,
            self.partial(p, 2)?,
            self.partial(p, 3)?,
        ])
    }

    /// Pointwise scaling by a constant.
    pub fn scaled(&self, s: f64) -> Self {
        lin_comb(s, self, 0.0, &Field::constant(T::zero()))
    }
}

/// Pointwise linear combination `ca * a + cb * b`. The gradient closure is
/// carried through when both inputs have one, so analytic accuracy survives
/// field algebra.
pub fn lin_comb<T: FieldValue>(ca: f64, a: &Field<T>, cb: f64, b: &Field<T>) -> Field<T> {
    let (ae, be) = (Arc::clone(&a.eval), Arc::clone(&b.eval));
    let out = Field {
        eval: Arc::new(move |p: &ChartPoint| ae(p) * ca + be(p) * cb),
        grad: None,
        fd_step: a.fd_step.min(b.fd_step),
    };
    match (&a.grad, &b.grad) {
        (Some(ag), Some(bg)) => {
            let (ag, bg) = (Arc::clone(ag), Arc::clone(bg));
            out.with_gradient(move |p| {
                let (ga, gb) = (ag(p), bg(p));
                std::array::from_fn(|mu| ga[mu] * ca + gb[mu] * cb)
            })
        }
        _ => out,
    }
}

/// Pointwise product with a product-rule gradient when both factors have
/// analytic gradients.
pub fn product<T: FieldValue>(a: &Field<T>, b: &Field<T>) -> Field<T> {
    let (ae, be) = (Arc::clone(&a.eval), Arc::clone(&b.eval));
    let out = Field {
        eval: Arc::new(move |p: &ChartPoint| ae(p) * be(p)),
        grad: None,
        fd_step: a.fd_step.min(b.fd_step),
    };
    match (&a.grad, &b.grad) {
        (Some(ag), Some(bg)) => {
            let (ae2, be2) = (Arc::clone(&a.eval), Arc::clone(&b.eval));
            let (ag, bg) = (Arc::clone(ag), Arc::clone(bg));
            out.with_gradient(move |p| {
                let (va, vb) = (ae2(p), be2(p));
                let (ga, gb) = (ag(p), bg(p));
                std::array::from_fn(|mu| ga[mu] * vb + va * gb[mu])
            })
        }
        _ => out,
    }
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl ScalarField {
    /// Builds a field from a parsed expression, attaching the symbolic
    /// gradient when all four coordinate derivatives exist in the grammar.
    pub fn from_expr(e: &Expr) -> Self {
        let derivatives: Option<Vec<Expr>> = (0..DIM).map(|k| e.diff(k).ok()).collect();
        let body = e.clone();
        let field = Field::new(move |p: &ChartPoint| body.eval(p));
        match derivatives {
            Some(d) => {
                let d: [Expr; DIM] = d.try_into().expect("four derivatives");
                field.with_gradient(move |p| std::array::from_fn(|mu| d[mu].eval(p)))
            }
            None => field,
        }
    }

    /// Promotes a real field to a complex-valued one.
    pub fn complexified(&self) -> ComplexField {
        let e = Arc::clone(&self.eval);
        let out = ComplexField {
            eval: Arc::new(move |p: &ChartPoint| Complex64::new(e(p), 0.0)),
            grad: None,
            fd_step: self.fd_step,
        };
        match &self.grad {
            Some(g) => {
                let g = Arc::clone(g);
                out.with_gradient(move |p| {
                    let gr = g(p);
                    std::array::from_fn(|mu| Complex64::new(gr[mu], 0.0))
                })
            }
            None => out,
        }
    }
}

impl ComplexField {
    /// Assembles a complex field from real and imaginary parts.
    pub fn from_parts(re: &ScalarField, im: &ScalarField) -> Self {
        let (re_e, im_e) = (Arc::clone(&re.eval), Arc::clone(&im.eval));
        let out = ComplexField {
            eval: Arc::new(move |p: &ChartPoint| Complex64::new(re_e(p), im_e(p))),
            grad: None,
            fd_step: re.fd_step.min(im.fd_step),
        };
        match (&re.grad, &im.grad) {
            (Some(rg), Some(ig)) => {
                let (rg, ig) = (Arc::clone(rg), Arc::clone(ig));
                out.with_gradient(move |p| {
                    let (gr, gi) = (rg(p), ig(p));
                    std::array::from_fn(|mu| Complex64::new(gr[mu], gi[mu]))
                })
            }
            _ => out,
        }
    }
}

/// A 4x4 table of real component fields (a metric or a perturbation in some
/// basis).
#[derive(Clone)]
pub struct MatrixField {
    pub comps: [[ScalarField; DIM]; DIM],
}

impl MatrixField {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> ScalarField) -> Self {
        MatrixField {
            comps: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))),
        }
    }

    pub fn constant(m: Mat4) -> Self {
        MatrixField::from_fn(|i, j| ScalarField::constant(m[i][j]))
    }

    pub fn comp(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i][j]
    }

    pub fn eval(&self, p: &ChartPoint) -> Mat4 {
        mat4(|i, j| self.comps[i][j].eval(p))
    }

    /// Componentwise `ca * a + cb * b`.
    pub fn lin_comb(ca: f64, a: &MatrixField, cb: f64, b: &MatrixField) -> MatrixField {
        MatrixField::from_fn(|i, j| lin_comb(ca, &a.comps[i][j], cb, &b.comps[i][j]))
    }

    pub fn scaled(&self, s: f64) -> MatrixField {
        MatrixField::from_fn(|i, j| self.comps[i][j].scaled(s))
    }
}

/// A 4x4 table of complex component fields.
#[derive(Clone)]
pub struct CMatrixField {
    pub comps: [[ComplexField; DIM]; DIM],
}

impl CMatrixField {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> ComplexField) -> Self {
        CMatrixField {
            comps: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))),
        }
    }

    pub fn constant(m: CMat4) -> Self {
        CMatrixField::from_fn(|i, j| ComplexField::constant(m[i][j]))
    }

    pub fn comp(&self, i: usize, j: usize) -> &ComplexField {
        &self.comps[i][j]
    }

    pub fn eval(&self, p: &ChartPoint) -> CMat4 {
        cmat4(|i, j| self.comps[i][j].eval(p))
    }
}

/// Four complex component fields of a spinor.
#[derive(Clone)]
pub struct SpinorField {
    pub comps: [ComplexField; DIM],
}

impl SpinorField {
    pub fn from_fn(f: impl FnMut(usize) -> ComplexField) -> Self {
        SpinorField {
            comps: std::array::from_fn(f),
        }
    }

    pub fn zero() -> Self {
        SpinorField::from_fn(|_| ComplexField::constant(Complex64::new(0.0, 0.0)))
    }

    pub fn eval(&self, p: &ChartPoint) -> CVec4 {
        cvec4(|a| self.comps[a].eval(p))
    }

    /// Componentwise complex conjugate of the value.
    pub fn eval_conj(&self, p: &ChartPoint) -> CVec4 {
        cvec4(|a| self.comps[a].eval(p).conj())
    }
}
