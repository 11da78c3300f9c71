//! Exact ordered-field scalars.
//!
//! Two kinds share one type: arbitrary-precision rationals and elements of
//! the quadratic extension `a + b√2` with rational `a`, `b`. Mixed
//! arithmetic promotes to the extension; results whose `√2` part vanishes
//! are demoted back to rationals so that the common case stays cheap.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Debug)]
pub enum Scalar {
    Rational(BigRational),
    /// `a + b√2`.
    Quad2(BigRational, BigRational),
}

fn sign_of(r: &BigRational) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Exact sign of `a + b√2`.
fn quad_sign(a: &BigRational, b: &BigRational) -> Ordering {
    let sa = sign_of(a);
    let sb = sign_of(b);
    match (sa, sb) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (x, y) if x == y => x,
        _ => {
            // opposite signs: compare a² with 2b²
            let a2 = a * a;
            let b2 = b * b * BigRational::from_integer(BigInt::from(2));
            match a2.cmp(&b2) {
                Ordering::Equal => Ordering::Equal,
                Ordering::Greater => sa,
                Ordering::Less => sb,
            }
        }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `a + b√2`, demoted to a rational when `b = 0`.
    pub fn quad(a: BigRational, b: BigRational) -> Self {
        if b.is_zero() {
            Scalar::Rational(a)
        } else {
            Scalar::Quad2(a, b)
        }
    }

    /// `a + b√2` kept in extension form even when `b = 0` (used by parsers).
    pub fn quad_raw(a: BigRational, b: BigRational) -> Self {
        Scalar::Quad2(a, b)
    }

    pub fn sqrt2() -> Self {
        Scalar::Quad2(BigRational::zero(), BigRational::one())
    }

    pub fn is_quad(&self) -> bool {
        matches!(self, Scalar::Quad2(..))
    }

    /// Rational and irrational parts.
    pub fn parts(&self) -> (BigRational, BigRational) {
        match self {
            Scalar::Rational(r) => (r.clone(), BigRational::zero()),
            Scalar::Quad2(a, b) => (a.clone(), b.clone()),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Quad2(a, b) if b.is_zero() => Some(a),
            Scalar::Quad2(..) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Quad2(a, b) => a.is_zero() && b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Quad2(a, b) => a.is_one() && b.is_zero(),
        }
    }

    pub fn signum(&self) -> Ordering {
        match self {
            Scalar::Rational(r) => sign_of(r),
            Scalar::Quad2(a, b) => quad_sign(a, b),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
            Scalar::Quad2(a, b) => {
                // (a - b√2) / (a² - 2b²); the norm is nonzero since √2 is irrational
                let two = BigRational::from_integer(BigInt::from(2));
                let norm = a * a - &two * b * b;
                Scalar::quad(a / &norm, -(b / &norm))
            }
        })
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Crude `f64` view for human-facing summaries only; never used in decisions.
    pub fn to_f64_lossy(&self) -> f64 {
        fn r2f(r: &BigRational) -> f64 {
            use num_traits::ToPrimitive;
            r.to_f64().unwrap_or(f64::NAN)
        }
        match self {
            Scalar::Rational(r) => r2f(r),
            Scalar::Quad2(a, b) => r2f(a) + r2f(b) * std::f64::consts::SQRT_2,
        }
    }
}

fn add_parts(x: &Scalar, y: &Scalar, negate_y: bool) -> Scalar {
    match (x, y) {
        (Scalar::Rational(a), Scalar::Rational(b)) => {
            Scalar::Rational(if negate_y { a - b } else { a + b })
        }
        _ => {
            let (a1, b1) = x.parts();
            let (a2, b2) = y.parts();
            if negate_y {
                Scalar::quad(a1 - a2, b1 - b2)
            } else {
                Scalar::quad(a1 + a2, b1 + b2)
            }
        }
    }
}

fn mul_parts(x: &Scalar, y: &Scalar) -> Scalar {
    match (x, y) {
        (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
        (Scalar::Rational(r), Scalar::Quad2(a, b)) | (Scalar::Quad2(a, b), Scalar::Rational(r)) => {
            Scalar::quad(r * a, r * b)
        }
        (Scalar::Quad2(a1, b1), Scalar::Quad2(a2, b2)) => {
            let two = BigRational::from_integer(BigInt::from(2));
            Scalar::quad(a1 * a2 + two * b1 * b2, a1 * b2 + a2 * b1)
        }
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        add_parts(self, rhs, false)
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        add_parts(self, rhs, true)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        mul_parts(self, rhs)
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a / b),
            _ => mul_parts(self, &rhs.recip().expect("division by zero")),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Quad2(a, b) => Scalar::Quad2(-a, -b),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        match (&mut *self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => *a += b,
            _ => *self = &*self + rhs,
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        match (&mut *self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => *a -= b,
            _ => *self = &*self - rhs,
        }
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        let mut acc = Scalar::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Sum<Scalar> for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        let mut acc = Scalar::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => rational_eq(a, b),
            _ => {
                let ((a, b), (c, d)) = (self.parts(), other.parts());
                rational_eq(&a, &c) && rational_eq(&b, &d)
            }
        }
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => rational_cmp(a, b),
            _ => (self - other).signum(),
        }
    }
}

// Ratios are kept in lowest terms with a positive denominator, so equality
// is structural and order is one cross-multiplication. `Ratio`'s own
// comparison walks a continued fraction, which is slow on long operands.
fn rational_eq(a: &BigRational, b: &BigRational) -> bool {
    a.numer() == b.numer() && a.denom() == b.denom()
}

fn rational_cmp(a: &BigRational, b: &BigRational) -> Ordering {
    if a.denom() == b.denom() {
        return a.numer().cmp(b.numer());
    }
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self.as_rational() {
            Some(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            None => {
                let (a, b) = self.parts();
                1u8.hash(state);
                a.hash(state);
                b.hash(state);
            }
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Rational(r)
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Text form: `p/q` or `p` for rationals, `{"a":"p/q","b":"r/s"}` for `a + b√2`.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => f.write_str(&fmt_rational(r)),
            Scalar::Quad2(a, b) => {
                write!(f, "{{\"a\":\"{}\",\"b\":\"{}\"}}", fmt_rational(a), fmt_rational(b))
            }
        }
    }
}

/// Parses `p`, `p/q` or a decimal literal such as `-1.25e-3`.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    // decimal with optional exponent
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Ok(if neg { -value } else { value })
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        if t.starts_with('{') {
            let v: serde_json::Value =
                serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))?;
            return serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()));
        }
        Ok(Scalar::Rational(parse_rational(t)?))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rational(r) => serializer.serialize_str(&fmt_rational(r)),
            Scalar::Quad2(a, b) => {
                let mut m = serializer.serialize_map(Some(2))?;
                m.serialize_entry("a", &fmt_rational(a))?;
                m.serialize_entry("b", &fmt_rational(b))?;
                m.end()
            }
        }
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational string \"p/q\", an integer, or {\"a\":..,\"b\":..}")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
        parse_rational(v).map(Scalar::Rational).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::from_int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar::Rational(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Scalar, A::Error> {
        let mut a = None;
        let mut b = None;
        while let Some(key) = map.next_key::<String>()? {
            let val: String = map.next_value()?;
            let r = parse_rational(&val).map_err(de::Error::custom)?;
            match key.as_str() {
                "a" => a = Some(r),
                "b" => b = Some(r),
                other => return Err(de::Error::unknown_field(other, &["a", "b"])),
            }
        }
        let a = a.ok_or_else(|| de::Error::missing_field("a"))?;
        let b = b.ok_or_else(|| de::Error::missing_field("b"))?;
        Ok(Scalar::quad_raw(a, b))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Scalar, D::Error> {
        deserializer.deserialize_any(ScalarVisitor)
    }
}

/// Exact dot product.
pub fn dot(x: &[Scalar], y: &[Scalar]) -> Scalar {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Scalar::zero();
    for (a, b) in x.iter().zip(y) {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        acc += &(a * b);
    }
    acc
}

/// Shorthand used throughout the corpus and tests: `q("1/100")`.
pub fn q(s: &str) -> Scalar {
    s.parse().unwrap_or_else(|e| panic!("bad scalar literal {s:?}: {e}"))
}
