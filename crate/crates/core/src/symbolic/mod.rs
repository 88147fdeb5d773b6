//! Exact-coefficient scalar forms: linear forms, conics, quadratic and
//! fractional expressions, and the rational form `ξ₁²/ξ₂ + ξ₀`.
//!
//! Everything here is computed over `BigRational`; floating point only
//! enters through the `*_f64` evaluation helpers.

mod forms;
mod poly;
mod rational;

pub use forms::{ConicForm, FractionalExpr, LinearForm, QuadraticExpr};
pub use poly::{det4, sylvester_quadratics, Poly2};
pub use rational::{decompose_rational, QuadraticPoly, RationalForm};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(v: &Scalar) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a scaled division.
        let n = v.numer().to_f64().unwrap_or(f64::NAN);
        let d = v.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact conversion of a finite double.
pub fn from_f64(v: f64) -> Scalar {
    BigRational::from_float(v).expect("finite float")
}

/// Formats as `p` or `p/q`.
pub fn format_scalar(v: &Scalar) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `p`, `-p` or `p/q` with integer `p`, `q`.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(text).map_err(|_| bad())?,
        )),
    }
}

/// Least common multiple of the denominators.
pub(crate) fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a coefficient vector to coprime integers, keeping the sign.
pub(crate) fn primitive(values: &[Scalar]) -> Vec<Scalar> {
    use num_integer::Integer;
    let den = common_denominator(values);
    let ints: Vec<BigInt> = values
        .iter()
        .map(|v| (v * BigRational::from_integer(den.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return values.to_vec();
    }
    ints.into_iter()
        .map(|v| BigRational::from_integer(v / &g))
        .collect()
}

/// Point in the primal (x) or dual (s) plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(int(x), int(y))
    }

    pub fn zero() -> Self {
        Point::new(Scalar::zero(), Scalar::zero())
    }

    pub fn dot(&self, other: &Point) -> Scalar {
        &self.x * &other.x + &self.y * &other.y
    }

    /// `self.x * other.y - self.y * other.x`
    pub fn cross(&self, other: &Point) -> Scalar {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn scale(&self, k: &Scalar) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        self.add(other).scale(&ratio(1, 2))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [to_f64(&self.x), to_f64(&self.y)]
    }

    /// True when `other` is a positive multiple of `self`.
    pub fn same_direction(&self, other: &Point) -> bool {
        self.cross(other).is_zero() && self.dot(other).is_positive()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", format_scalar(&self.x), format_scalar(&self.y))
    }
}
