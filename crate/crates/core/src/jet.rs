//! Second-order forward-mode automatic differentiation.
//!
//! A [`Jet2`] carries the value, gradient, and dense Hessian of a scalar
//! quantity with respect to `d` independent variables. Arithmetic propagates
//! exact second-order Taylor data, so any expression built from jets yields
//! exact first and second derivatives in one pass. Dimensions in this crate
//! stay small (d <= 8), which makes the dense d x d Hessian cheap.
//!
//! Hessians are constructed symmetric term by term; they are never
//! symmetrized after the fact. The `add` and `mul` rules are arranged so the
//! Hessian is bit-identical under operand swap.

use nalgebra::{DMatrix, DVector};

use crate::error::JetError;

/// Value, gradient, and Hessian of a scalar at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: f64,
    gradient: DVector<f64>,
    hessian: DMatrix<f64>,
}

impl Jet2 {
    /// Constant with zero derivatives in `dim` variables.
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            gradient: DVector::zeros(dim),
            hessian: DMatrix::zeros(dim, dim),
        }
    }

    /// The coordinate function `x_index` seeded at `point`: unit gradient in
    /// slot `index`, zero Hessian.
    pub fn lift(point: &[f64], index: usize) -> Result<Self, JetError> {
        let dim = point.len();
        if index >= dim {
            return Err(JetError::IndexOutOfRange { index, dim });
        }
        let mut gradient = DVector::zeros(dim);
        gradient[index] = 1.0;
        Ok(Jet2 {
            value: point[index],
            gradient,
            hessian: DMatrix::zeros(dim, dim),
        })
    }

    /// All coordinate functions seeded at `point`.
    pub fn vars(point: &[f64]) -> Vec<Self> {
        (0..point.len())
            .map(|i| Self::lift(point, i).expect("index in range"))
            .collect()
    }

    /// A jet with known value and gradient and a zero Hessian.
    ///
    /// Used for quantities that are themselves first derivatives of
    /// second-order data (e.g. a single partial of a map component): their
    /// own second derivatives would be third-order data, which a `Jet2` does
    /// not carry. Anything computed from such a jet has an exact value and
    /// gradient; its Hessian is truncated.
    pub fn first_order(value: f64, gradient: DVector<f64>) -> Self {
        let dim = gradient.len();
        Jet2 { value, gradient, hessian: DMatrix::zeros(dim, dim) }
    }

    /// Build from explicit parts. The Hessian must already be symmetric.
    pub fn from_parts(value: f64, gradient: DVector<f64>, hessian: DMatrix<f64>) -> Self {
        debug_assert_eq!(gradient.len(), hessian.nrows());
        debug_assert_eq!(hessian.nrows(), hessian.ncols());
        Jet2 { value, gradient, hessian }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.gradient
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    /// Number of independent variables.
    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.iter().all(|h| h.is_finite())
    }

    /// Re-index into a larger variable set of size `total`, with this jet's
    /// variables occupying the slots starting at `offset`. Used to place
    /// factor data on a product chart.
    pub fn extended(&self, total: usize, offset: usize) -> Self {
        let d = self.dim();
        assert!(offset + d <= total, "extension does not fit");
        let mut gradient = DVector::zeros(total);
        let mut hessian = DMatrix::zeros(total, total);
        for i in 0..d {
            gradient[offset + i] = self.gradient[i];
            for j in 0..d {
                hessian[(offset + i, offset + j)] = self.hessian[(i, j)];
            }
        }
        Jet2 { value: self.value, gradient, hessian }
    }

    /// Multiply by a plain scalar.
    pub fn scale(&self, c: f64) -> Self {
        Jet2 {
            value: c * self.value,
            gradient: &self.gradient * c,
            hessian: &self.hessian * c,
        }
    }

    /// Univariate chain rule: given `f(a)`, `f'(a)`, `f''(a)` numerically,
    /// produce the jet of `f` composed with `self`.
    ///
    /// gradient: f' grad a; Hessian: f'' grad a grad a^T + f' H a, with the
    /// outer-product term built symmetrically.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let d = self.dim();
        let mut hessian = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let outer = self.gradient[i] * self.gradient[j];
                let entry = d2f * outer + df * self.hessian[(i, j)];
                hessian[(i, j)] = entry;
                hessian[(j, i)] = entry;
            }
        }
        Jet2 { value: f, gradient: &self.gradient * df, hessian }
    }

    /// Multivariate chain rule: `outer` is a jet in `n` intermediate
    /// variables, `inner` the jets of those intermediates in the base
    /// variables. Returns the composite in the base variables.
    pub fn compose(outer: &Jet2, inner: &[Jet2]) -> Self {
        let n = outer.dim();
        assert_eq!(n, inner.len(), "composition arity mismatch");
        let d = if n == 0 { 0 } else { inner[0].dim() };
        let mut gradient = DVector::zeros(d);
        for (alpha, comp) in inner.iter().enumerate() {
            gradient.axpy(outer.gradient[alpha], &comp.gradient, 1.0);
        }
        let mut hessian = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut entry = 0.0;
                for alpha in 0..n {
                    for beta in 0..n {
                        entry += outer.hessian[(alpha, beta)]
                            * inner[alpha].gradient[i]
                            * inner[beta].gradient[j];
                    }
                    entry += outer.gradient[alpha] * inner[alpha].hessian[(i, j)];
                }
                hessian[(i, j)] = entry;
                hessian[(j, i)] = entry;
            }
        }
        Jet2 { value: outer.value, gradient, hessian }
    }

    /// Reciprocal `1/self`.
    pub fn recip(&self) -> Result<Self, JetError> {
        if self.value == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    /// Quotient `self / rhs`.
    pub fn div(&self, rhs: &Self) -> Result<Self, JetError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::Domain { func: "log", value: self.value });
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(self.value.ln(), inv, -inv * inv))
    }

    /// Square root; rejected at and below zero (the derivative blows up at 0).
    pub fn sqrt(&self) -> Result<Self, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::Domain { func: "sqrt", value: self.value });
        }
        let r = self.value.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * self.value)))
    }

    /// Constant power `self^q`. Integer exponents work on the whole line
    /// (negative exponents away from 0); fractional exponents require a
    /// strictly positive base.
    pub fn powf(&self, q: f64) -> Result<Self, JetError> {
        let a = self.value;
        if q == 0.0 {
            return Ok(Self::constant(1.0, self.dim()));
        }
        let is_integer = q.fract() == 0.0 && q.abs() < 1e15;
        if is_integer {
            if a == 0.0 && q < 2.0 {
                // q = 1 is exact; lower integer powers lose smoothness at 0.
                if q == 1.0 {
                    return Ok(self.clone());
                }
                return Err(JetError::Domain { func: "pow", value: a });
            }
            let f = a.powi(q as i32);
            let df = q * a.powi(q as i32 - 1);
            let d2f = q * (q - 1.0) * a.powi(q as i32 - 2);
            return Ok(self.chain(f, df, if q == 1.0 { 0.0 } else { d2f }));
        }
        if a <= 0.0 {
            return Err(JetError::Domain { func: "pow", value: a });
        }
        let f = a.powf(q);
        Ok(self.chain(f, q * f / a, q * (q - 1.0) * f / (a * a)))
    }

    /// Even-symmetric power `|self|^q` for q > 1, C^2 away from 0.
    pub fn abs_powf(&self, q: f64) -> Result<Self, JetError> {
        let a = self.value;
        if a == 0.0 {
            return Err(JetError::Domain { func: "abspow", value: a });
        }
        let m = a.abs();
        let f = m.powf(q);
        let df = q * a.signum() * m.powf(q - 1.0);
        let d2f = q * (q - 1.0) * m.powf(q - 2.0);
        Ok(self.chain(f, df, d2f))
    }

    pub fn atan(&self) -> Self {
        let a = self.value;
        let w = 1.0 + a * a;
        self.chain(a.atan(), 1.0 / w, -2.0 * a / (w * w))
    }

    /// Two-argument arctangent `atan2(y, x)`; singular only at the origin.
    pub fn atan2(y: &Self, x: &Self) -> Result<Self, JetError> {
        let r2 = x.value * x.value + y.value * y.value;
        if r2 == 0.0 {
            return Err(JetError::Domain { func: "atan2", value: 0.0 });
        }
        let r4 = r2 * r2;
        let fy = x.value / r2;
        let fx = -y.value / r2;
        let fyy = -2.0 * x.value * y.value / r4;
        let fxx = 2.0 * x.value * y.value / r4;
        let fyx = (y.value * y.value - x.value * x.value) / r4;
        let outer = Jet2::from_parts(
            y.value.atan2(x.value),
            DVector::from_vec(vec![fy, fx]),
            DMatrix::from_row_slice(2, 2, &[fyy, fyx, fyx, fxx]),
        );
        Ok(Self::compose(&outer, &[y.clone(), x.clone()]))
    }
}

impl std::ops::Add for &Jet2 {
    type Output = Jet2;

    fn add(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        Jet2 {
            value: self.value + rhs.value,
            gradient: &self.gradient + &rhs.gradient,
            hessian: &self.hessian + &rhs.hessian,
        }
    }
}

impl std::ops::Sub for &Jet2 {
    type Output = Jet2;

    fn sub(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        Jet2 {
            value: self.value - rhs.value,
            gradient: &self.gradient - &rhs.gradient,
            hessian: &self.hessian - &rhs.hessian,
        }
    }
}

impl std::ops::Mul for &Jet2 {
    type Output = Jet2;

    /// Product rule. The Hessian entry is grouped as
    /// `(a H_b + b H_a) + (grad_a grad_b^T + grad_b grad_a^T)` so that each
    /// group is a commuted float addition; the result is bit-identical under
    /// operand swap.
    fn mul(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        let d = self.dim();
        let mut gradient = DVector::zeros(d);
        for i in 0..d {
            gradient[i] = self.value * rhs.gradient[i] + rhs.value * self.gradient[i];
        }
        let mut hessian = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let curvature =
                    self.value * rhs.hessian[(i, j)] + rhs.value * self.hessian[(i, j)];
                let cross =
                    self.gradient[i] * rhs.gradient[j] + rhs.gradient[i] * self.gradient[j];
                let entry = curvature + cross;
                hessian[(i, j)] = entry;
                hessian[(j, i)] = entry;
            }
        }
        Jet2 { value: self.value * rhs.value, gradient, hessian }
    }
}

impl std::ops::Neg for &Jet2 {
    type Output = Jet2;

    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_value_ops {
    ($($trait:ident :: $method:ident),*) => {$(
        impl std::ops::$trait for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                std::ops::$trait::$method(self, &rhs)
            }
        }
    )*};
}

forward_value_ops!(Add::add, Sub::sub, Mul::mul);

impl std::ops::Neg for Jet2 {
    type Output = Jet2;

    fn neg(self) -> Jet2 {
        -&self
    }
}
