//! Extended-precision scalars, tangent vectors and 2×2 matrices.
//!
//! Every [`Real`] carries its own mantissa width. Arithmetic between two
//! values of different precision is a programming error and panics; all
//! constructors that take external input check precision up front and
//! return [`Error::PrecisionMismatch`] instead.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};

/// Mantissa width in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    /// Quadruple-equivalent (IEEE binary128 mantissa).
    pub const QUAD: Precision = Precision(113);

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::QUAD.0 {
            return Err(Error::Parameter(format!(
                "precision must be at least {} bits, got {bits}",
                Self::QUAD.0
            )));
        }
        // MPFR's own ceiling is far larger; this keeps runaway flags out.
        if bits > 1 << 16 {
            return Err(Error::Parameter(format!("precision {bits} bits is unreasonably large")));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `2^(k - bits)`, the scale used for all precision-relative tolerances.
    pub fn ulp_scaled(self, k: i32) -> Real {
        Real::exp2(self, k - self.0 as i32)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::QUAD
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Extended-precision real number backed by MPFR.
#[derive(Clone, PartialEq)]
pub struct Real(Float);

impl Real {
    pub fn zero(prec: Precision) -> Self {
        Real(Float::new(prec.0))
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_i32(prec, 1)
    }

    pub fn from_i32(prec: Precision, v: i32) -> Self {
        Real(Float::with_val(prec.0, v))
    }

    /// Exact conversion of a binary64 value; note that `0.7_f64` is not 7/10.
    pub fn from_f64(prec: Precision, v: f64) -> Self {
        Real(Float::with_val(prec.0, v))
    }

    /// `num / den`, correctly rounded.
    pub fn ratio(prec: Precision, num: i64, den: i64) -> Self {
        let n = Float::with_val(prec.0, num);
        Real(n / den)
    }

    /// Parses a decimal literal such as `"0.7"` or `"1e-16"` at full precision.
    pub fn parse(prec: Precision, text: &str) -> Result<Self> {
        let parsed = Float::parse(text.trim())
            .map_err(|e| Error::Parameter(format!("cannot parse {text:?} as a real: {e}")))?;
        let v = Real(Float::with_val(prec.0, parsed));
        if !v.is_finite() {
            return Err(Error::Domain(format!("{text:?} is not finite")));
        }
        Ok(v)
    }

    pub fn pi(prec: Precision) -> Self {
        Real(Float::with_val(prec.0, Constant::Pi))
    }

    /// `2^k`, exact.
    pub fn exp2(prec: Precision, k: i32) -> Self {
        let one = Float::with_val(prec.0, 1);
        Real(one << k)
    }

    /// `10^k`, correctly rounded.
    pub fn pow10(prec: Precision, k: i32) -> Self {
        Real(Float::with_val(prec.0, k).exp10())
    }

    pub fn prec(&self) -> Precision {
        Precision(self.0.prec())
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    /// Re-rounds to another precision. The only sanctioned way to cross
    /// precisions.
    pub fn with_prec(&self, prec: Precision) -> Self {
        Real(Float::with_val(prec.0, &self.0))
    }

    pub fn abs(&self) -> Self {
        Real(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.clone().sqrt())
    }

    pub fn square(&self) -> Self {
        Real(self.0.clone().square())
    }

    pub fn recip(&self) -> Self {
        Real(self.0.clone().recip())
    }

    pub fn ln(&self) -> Self {
        Real(self.0.clone().ln())
    }

    pub fn exp(&self) -> Self {
        Real(self.0.clone().exp())
    }

    pub fn sin(&self) -> Self {
        Real(self.0.clone().sin())
    }

    pub fn cos(&self) -> Self {
        Real(self.0.clone().cos())
    }

    /// `(sin x, cos x)` in one MPFR call.
    pub fn sin_cos(&self) -> (Self, Self) {
        let (s, c) = self.0.clone().sin_cos(Float::new(self.0.prec()));
        (Real(s), Real(c))
    }

    pub fn atan(&self) -> Self {
        Real(self.0.clone().atan())
    }

    /// Four-quadrant arctangent of `self / x`.
    pub fn atan2(&self, x: &Real) -> Self {
        check_prec(self, x);
        Real(self.0.clone().atan2(&x.0))
    }

    pub fn hypot(&self, other: &Real) -> Self {
        check_prec(self, other);
        Real(self.0.clone().hypot(&other.0))
    }

    pub fn floor(&self) -> Self {
        Real(self.0.clone().floor())
    }

    pub fn max(self, other: Real) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Scientific notation with exactly `digits` significant digits,
    /// e.g. `2.61803398874989484820458683436563812e0`.
    pub fn to_sci(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.0.is_nan() {
            return "nan".into();
        }
        if self.0.is_infinite() {
            return if self.0.is_sign_negative() { "-inf".into() } else { "inf".into() };
        }
        if self.0.is_zero() {
            let sign = if self.0.is_sign_negative() { "-" } else { "" };
            return if digits == 1 {
                format!("{sign}0e0")
            } else {
                format!("{sign}0.{}e0", "0".repeat(digits - 1))
            };
        }
        let (neg, mantissa, exp) = self.0.to_sign_string_exp(10, Some(digits));
        // mantissa is d1d2...dn with value 0.d1d2...dn × 10^exp
        let exp = exp.unwrap_or(0) - 1;
        let sign = if neg { "-" } else { "" };
        let (head, tail) = mantissa.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(12))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(36);
        f.pad(&self.to_sci(digits))
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl PartialEq<i32> for Real {
    fn eq(&self, other: &i32) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<i32> for Real {
    fn partial_cmp(&self, other: &i32) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

#[inline]
#[track_caller]
fn check_prec(a: &Real, b: &Real) {
    assert_eq!(
        a.0.prec(),
        b.0.prec(),
        "mixed-precision arithmetic ({} vs {} bits)",
        a.0.prec(),
        b.0.prec()
    );
}

macro_rules! real_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $assign_tr<&Real> for Real {
            #[track_caller]
            fn $assign(&mut self, rhs: &Real) {
                check_prec(self, rhs);
                $assign_tr::$assign(&mut self.0, &rhs.0);
            }
        }
        impl $assign_tr<Real> for Real {
            #[track_caller]
            fn $assign(&mut self, rhs: Real) {
                $assign_tr::$assign(self, &rhs);
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            #[track_caller]
            fn $method(mut self, rhs: &Real) -> Real {
                $assign_tr::$assign(&mut self, rhs);
                self
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            #[track_caller]
            fn $method(mut self, rhs: Real) -> Real {
                $assign_tr::$assign(&mut self, &rhs);
                self
            }
        }
        impl $tr<&Real> for &Real {
            type Output = Real;
            #[track_caller]
            fn $method(self, rhs: &Real) -> Real {
                let mut out = self.clone();
                $assign_tr::$assign(&mut out, rhs);
                out
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            #[track_caller]
            fn $method(self, rhs: Real) -> Real {
                $tr::$method(self, &rhs)
            }
        }
        impl $assign_tr<i32> for Real {
            fn $assign(&mut self, rhs: i32) {
                $assign_tr::$assign(&mut self.0, rhs);
            }
        }
        impl $tr<i32> for Real {
            type Output = Real;
            fn $method(mut self, rhs: i32) -> Real {
                $assign_tr::$assign(&mut self.0, rhs);
                self
            }
        }
        impl $tr<i32> for &Real {
            type Output = Real;
            fn $method(self, rhs: i32) -> Real {
                $tr::$method(self.clone(), rhs)
            }
        }
        impl $tr<Real> for i32 {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real($tr::$method(self, rhs.0))
            }
        }
        impl $tr<&Real> for i32 {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real($tr::$method(self, rhs.0.clone()))
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

/// Representative of `x` modulo 1 in `[0, 1)`.
pub fn mod1(x: &Real) -> Result<Real> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("mod1 of non-finite value {x:?}")));
    }
    Ok(wrap_unit(x))
}

// Infallible core of mod1 for values already known to be finite.
pub(crate) fn wrap_unit(x: &Real) -> Real {
    let mut r = x - &x.floor();
    // x slightly below an integer can round up to exactly 1
    if r >= 1 {
        r -= 1;
    }
    if r.is_sign_negative() || r.0.is_zero() {
        r = Real::zero(x.prec());
    }
    r
}

fn check_unit(x: &Real) -> Result<()> {
    if !x.is_finite() || x.is_sign_negative() || *x >= 1 {
        return Err(Error::Domain(format!("{x:?} is not in [0, 1)")));
    }
    Ok(())
}

/// Signed shortest arc `d` from `b` to `a` on the circle, `d ∈ [-1/2, 1/2)`.
pub fn torus_delta(a: &Real, b: &Real) -> Result<Real> {
    check_unit(a)?;
    check_unit(b)?;
    check_prec(a, b);
    Ok(circle_delta(a, b))
}

pub(crate) fn circle_delta(a: &Real, b: &Real) -> Real {
    let half = Real::ratio(a.prec(), 1, 2);
    let shifted = a - b + &half;
    wrap_unit(&shifted) - half
}

/// A tangent vector.
#[derive(Clone, PartialEq)]
pub struct Vec2 {
    pub x: Real,
    pub y: Real,
}

impl Vec2 {
    pub fn new(x: Real, y: Real) -> Self {
        check_prec(&x, &y);
        Vec2 { x, y }
    }

    pub fn from_f64(prec: Precision, x: f64, y: f64) -> Self {
        Vec2::new(Real::from_f64(prec, x), Real::from_f64(prec, y))
    }

    pub fn prec(&self) -> Precision {
        self.x.prec()
    }

    pub fn norm(&self) -> Real {
        self.x.hypot(&self.y)
    }

    pub fn dot(&self, other: &Vec2) -> Real {
        &self.x * &other.x + &self.y * &other.y
    }

    /// `x₁y₂ − y₁x₂`; the sine of the angle between unit vectors.
    pub fn cross(&self, other: &Vec2) -> Real {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn scale(&self, s: &Real) -> Vec2 {
        Vec2 { x: &self.x * s, y: &self.y * s }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// Returns `(v / |v|, |v|)`.
    pub fn normalize(&self) -> Result<(Vec2, Real)> {
        normalize(self)
    }
}

impl fmt::Debug for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

impl Add<&Vec2> for &Vec2 {
    type Output = Vec2;
    fn add(self, rhs: &Vec2) -> Vec2 {
        Vec2 { x: &self.x + &rhs.x, y: &self.y + &rhs.y }
    }
}

impl Sub<&Vec2> for &Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: &Vec2) -> Vec2 {
        Vec2 { x: &self.x - &rhs.x, y: &self.y - &rhs.y }
    }
}

impl Neg for &Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2 { x: -&self.x, y: -&self.y }
    }
}

/// Euclidean normalization. Fails on the zero vector.
pub fn normalize(v: &Vec2) -> Result<(Vec2, Real)> {
    if !v.x.is_finite() || !v.y.is_finite() {
        return Err(Error::Domain(format!("cannot normalize non-finite vector {v:?}")));
    }
    if v.is_zero() {
        return Err(Error::Degenerate("zero vector has no direction".into()));
    }
    let n = v.norm();
    let u = Vec2 { x: &v.x / &n, y: &v.y / &n };
    Ok((u, n))
}

/// Row-major 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Clone, PartialEq)]
pub struct Mat2 {
    pub a11: Real,
    pub a12: Real,
    pub a21: Real,
    pub a22: Real,
}

impl Mat2 {
    pub fn new(a11: Real, a12: Real, a21: Real, a22: Real) -> Self {
        check_prec(&a11, &a12);
        check_prec(&a11, &a21);
        check_prec(&a11, &a22);
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn from_f64(prec: Precision, a: [[f64; 2]; 2]) -> Self {
        let r = |v| Real::from_f64(prec, v);
        Mat2::new(r(a[0][0]), r(a[0][1]), r(a[1][0]), r(a[1][1]))
    }

    pub fn prec(&self) -> Precision {
        self.a11.prec()
    }

    pub fn det(&self) -> Real {
        &self.a11 * &self.a22 - &self.a12 * &self.a21
    }

    pub fn trace(&self) -> Real {
        &self.a11 + &self.a22
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2 {
            x: &self.a11 * &v.x + &self.a12 * &v.y,
            y: &self.a21 * &v.x + &self.a22 * &v.y,
        }
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a11: &self.a11 * &rhs.a11 + &self.a12 * &rhs.a21,
            a12: &self.a11 * &rhs.a12 + &self.a12 * &rhs.a22,
            a21: &self.a21 * &rhs.a11 + &self.a22 * &rhs.a21,
            a22: &self.a21 * &rhs.a12 + &self.a22 * &rhs.a22,
        }
    }

    /// `[[a22, -a12], [-a21, a11]]`; the exact inverse when `det = 1`.
    pub fn adjugate(&self) -> Mat2 {
        Mat2 {
            a11: self.a22.clone(),
            a12: -&self.a12,
            a21: -&self.a21,
            a22: self.a11.clone(),
        }
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::Degenerate("singular matrix".into()));
        }
        let adj = self.adjugate();
        Ok(Mat2 {
            a11: adj.a11 / &det,
            a12: adj.a12 / &det,
            a21: adj.a21 / &det,
            a22: adj.a22 / &det,
        })
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:?}, {:?}], [{:?}, {:?}]]", self.a11, self.a12, self.a21, self.a22)
    }
}
