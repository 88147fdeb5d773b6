use num_traits::{Signed, Zero};

use super::{int, primitive, to_f64, Point, Scalar};

/// `c1·p₁ + c2·p₂ + c0`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearForm {
    pub c1: Scalar,
    pub c2: Scalar,
    pub c0: Scalar,
}

impl LinearForm {
    pub fn new(c1: Scalar, c2: Scalar, c0: Scalar) -> Self {
        LinearForm { c1, c2, c0 }
    }

    pub fn from_ints(c1: i64, c2: i64, c0: i64) -> Self {
        LinearForm::new(int(c1), int(c2), int(c0))
    }

    pub fn zero() -> Self {
        LinearForm::from_ints(0, 0, 0)
    }

    /// The form `n·p − n·through`, vanishing at `through`.
    pub fn through(normal: &Point, through: &Point) -> Self {
        LinearForm::new(normal.x.clone(), normal.y.clone(), -normal.dot(through))
    }

    pub fn eval(&self, p: &Point) -> Scalar {
        &self.c1 * &p.x + &self.c2 * &p.y + &self.c0
    }

    pub fn eval_f64(&self, p: [f64; 2]) -> f64 {
        to_f64(&self.c1) * p[0] + to_f64(&self.c2) * p[1] + to_f64(&self.c0)
    }

    /// Coefficient vector `(c1, c2)`.
    pub fn gradient(&self) -> Point {
        Point::new(self.c1.clone(), self.c2.clone())
    }

    pub fn is_constant(&self) -> bool {
        self.c1.is_zero() && self.c2.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.is_constant() && self.c0.is_zero()
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        LinearForm::new(&self.c1 * k, &self.c2 * k, &self.c0 * k)
    }

    pub fn add(&self, other: &LinearForm) -> Self {
        LinearForm::new(
            &self.c1 + &other.c1,
            &self.c2 + &other.c2,
            &self.c0 + &other.c0,
        )
    }

    pub fn sub(&self, other: &LinearForm) -> Self {
        self.add(&other.scale(&int(-1)))
    }

    pub fn coefficients(&self) -> [Scalar; 3] {
        [self.c1.clone(), self.c2.clone(), self.c0.clone()]
    }

    /// Coprime integer multiple with the same sign.
    pub fn primitive(&self) -> Self {
        let v = primitive(&self.coefficients());
        LinearForm::new(v[0].clone(), v[1].clone(), v[2].clone())
    }

    /// Primitive form whose first nonzero coefficient is positive, and
    /// whether the sign had to be flipped to get there.
    pub fn canonical(&self) -> (Self, bool) {
        let p = self.primitive();
        let lead = p.coefficients().into_iter().find(|c| !c.is_zero());
        match lead {
            Some(c) if c.is_negative() => (p.scale(&int(-1)), true),
            _ => (p, false),
        }
    }
}

/// Conic `a11 s₁² + a12 s₁s₂ + a22 s₂² + a10 s₁ + a02 s₂ + a00`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConicForm {
    pub a11: Scalar,
    pub a12: Scalar,
    pub a22: Scalar,
    pub a10: Scalar,
    pub a02: Scalar,
    pub a00: Scalar,
}

impl ConicForm {
    pub fn new(coefficients: [Scalar; 6]) -> Self {
        let [a11, a12, a22, a10, a02, a00] = coefficients;
        ConicForm {
            a11,
            a12,
            a22,
            a10,
            a02,
            a00,
        }
    }

    pub fn from_ints(c: [i64; 6]) -> Self {
        ConicForm::new(c.map(int))
    }

    pub fn coefficients(&self) -> [Scalar; 6] {
        [
            self.a11.clone(),
            self.a12.clone(),
            self.a22.clone(),
            self.a10.clone(),
            self.a02.clone(),
            self.a00.clone(),
        ]
    }

    pub fn eval(&self, s: &Point) -> Scalar {
        &self.a11 * &s.x * &s.x
            + &self.a12 * &s.x * &s.y
            + &self.a22 * &s.y * &s.y
            + &self.a10 * &s.x
            + &self.a02 * &s.y
            + &self.a00
    }

    pub fn eval_f64(&self, s: [f64; 2]) -> f64 {
        let c = self.coefficients_f64();
        let [x, y] = s;
        c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5]
    }

    pub fn gradient_f64(&self, s: [f64; 2]) -> [f64; 2] {
        let c = self.coefficients_f64();
        let [x, y] = s;
        [2.0 * c[0] * x + c[1] * y + c[3], c[1] * x + 2.0 * c[2] * y + c[4]]
    }

    pub fn gradient(&self, s: &Point) -> Point {
        Point::new(
            int(2) * &self.a11 * &s.x + &self.a12 * &s.y + &self.a10,
            &self.a12 * &s.x + int(2) * &self.a22 * &s.y + &self.a02,
        )
    }

    pub fn coefficients_f64(&self) -> [f64; 6] {
        self.coefficients().map(|c| to_f64(&c))
    }

    /// `a12² − 4·a11·a22`
    pub fn discriminant(&self) -> Scalar {
        &self.a12 * &self.a12 - int(4) * &self.a11 * &self.a22
    }

    pub fn is_parabolic(&self) -> bool {
        self.discriminant().is_zero() && !self.quadratic_part_is_zero()
    }

    pub fn quadratic_part_is_zero(&self) -> bool {
        self.a11.is_zero() && self.a12.is_zero() && self.a22.is_zero()
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        ConicForm::new(self.coefficients().map(|c| c * k))
    }

    /// Coprime integers with the first nonzero coefficient positive, and
    /// whether the sign was flipped.
    pub fn canonical(&self) -> (Self, bool) {
        let v = primitive(&self.coefficients());
        let flip = v
            .iter()
            .find(|c| !c.is_zero())
            .is_some_and(|c| c.is_negative());
        let sign = if flip { int(-1) } else { int(1) };
        let v: Vec<Scalar> = v.into_iter().map(|c| c * &sign).collect();
        let arr: [Scalar; 6] = v.try_into().expect("six coefficients");
        (ConicForm::new(arr), flip)
    }

    pub fn is_canonical(&self) -> bool {
        &self.canonical().0 == self
    }
}

/// `ζ11 s₁² + ζ12 s₁s₂ + ζ22 s₂² + ζ10 s₁ + ζ01 s₂ + ζ00`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticExpr {
    pub z11: Scalar,
    pub z12: Scalar,
    pub z22: Scalar,
    pub z10: Scalar,
    pub z01: Scalar,
    pub z00: Scalar,
}

impl QuadraticExpr {
    pub fn new(coefficients: [Scalar; 6]) -> Self {
        let [z11, z12, z22, z10, z01, z00] = coefficients;
        QuadraticExpr {
            z11,
            z12,
            z22,
            z10,
            z01,
            z00,
        }
    }

    pub fn coefficients(&self) -> [Scalar; 6] {
        [
            self.z11.clone(),
            self.z12.clone(),
            self.z22.clone(),
            self.z10.clone(),
            self.z01.clone(),
            self.z00.clone(),
        ]
    }

    pub fn eval(&self, s: &Point) -> Scalar {
        &self.z11 * &s.x * &s.x
            + &self.z12 * &s.x * &s.y
            + &self.z22 * &s.y * &s.y
            + &self.z10 * &s.x
            + &self.z01 * &s.y
            + &self.z00
    }

    pub fn eval_f64(&self, s: [f64; 2]) -> f64 {
        let c = self.coefficients().map(|c| to_f64(&c));
        let [x, y] = s;
        c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5]
    }
}

/// `ψ₁(s) / (ζ₀₀·√ψ½(s)) + ψ₀(s)`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalExpr {
    pub num: LinearForm,
    pub scale: Scalar,
    pub rad: LinearForm,
    pub affine: LinearForm,
}

impl FractionalExpr {
    pub fn eval_f64(&self, s: [f64; 2]) -> f64 {
        let rad = self.rad.eval_f64(s);
        self.num.eval_f64(s) / (to_f64(&self.scale) * rad.sqrt()) + self.affine.eval_f64(s)
    }
}
