use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{int, LinearForm, Point, Scalar};
use crate::error::{Error, Result};

/// Quadratic polynomial in `x`, coefficients ordered
/// `(x₁², x₁x₂, x₂², x₁, x₂, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticPoly(pub [Scalar; 6]);

impl QuadraticPoly {
    pub fn from_ints(c: [i64; 6]) -> Self {
        QuadraticPoly(c.map(int))
    }

    pub fn eval(&self, p: &Point) -> Scalar {
        let c = &self.0;
        &c[0] * &p.x * &p.x
            + &c[1] * &p.x * &p.y
            + &c[2] * &p.y * &p.y
            + &c[3] * &p.x
            + &c[4] * &p.y
            + &c[5]
    }

    /// Product of two linear forms.
    pub fn product(l: &LinearForm, m: &LinearForm) -> Self {
        QuadraticPoly([
            &l.c1 * &m.c1,
            &l.c1 * &m.c2 + &l.c2 * &m.c1,
            &l.c2 * &m.c2,
            &l.c1 * &m.c0 + &l.c0 * &m.c1,
            &l.c2 * &m.c0 + &l.c0 * &m.c2,
            &l.c0 * &m.c0,
        ])
    }

    pub fn add(&self, other: &QuadraticPoly) -> Self {
        let mut out = self.0.clone();
        for (o, v) in out.iter_mut().zip(other.0.iter()) {
            *o += v;
        }
        QuadraticPoly(out)
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        QuadraticPoly(self.0.clone().map(|c| c * k))
    }

    /// Symmetric 3×3 matrix of the homogenized form in `(x₁, x₂, 1)`.
    pub fn homogenized_matrix(&self) -> [[Scalar; 3]; 3] {
        let c = &self.0;
        let h = |v: &Scalar| v / int(2);
        [
            [c[0].clone(), h(&c[1]), h(&c[3])],
            [h(&c[1]), c[2].clone(), h(&c[4])],
            [h(&c[3]), h(&c[4]), c[5].clone()],
        ]
    }
}

/// `r(x) = ξ₁(x)² / ξ₂(x) + ξ₀(x)` with linear `ξᵢ`.
///
/// On the pole line `ξ₂ = 0` the form is undefined, except at the point
/// where `ξ₁` vanishes too; there `r` extends by continuity to `ξ₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalForm {
    pub xi1: LinearForm,
    pub xi2: LinearForm,
    pub xi0: LinearForm,
}

impl RationalForm {
    pub fn new(xi1: LinearForm, xi2: LinearForm, xi0: LinearForm) -> Result<Self> {
        if xi2.is_constant() {
            return Err(Error::ConstantDenominator);
        }
        Ok(RationalForm { xi1, xi2, xi0 })
    }

    /// `(ξ₁₁, ξ₁₂)`
    pub fn a(&self) -> Point {
        self.xi1.gradient()
    }

    /// `(ξ₂₁, ξ₂₂)`
    pub fn b(&self) -> Point {
        self.xi2.gradient()
    }

    /// `(ξ₀₁, ξ₀₂)`
    pub fn c(&self) -> Point {
        self.xi0.gradient()
    }

    /// `ξ₁₁ξ₂₂ − ξ₁₂ξ₂₁`; zero exactly when the gradient image degenerates.
    pub fn det(&self) -> Scalar {
        self.a().cross(&self.b())
    }

    /// Common zero of `ξ₁` and `ξ₂`, when the two forms are independent.
    pub fn apex(&self) -> Option<Point> {
        let d = self.det();
        if d.is_zero() {
            return None;
        }
        let (p, q) = (&self.xi1, &self.xi2);
        // Cramer on p.c1 x + p.c2 y = −p.c0, q.c1 x + q.c2 y = −q.c0.
        let x = (-&p.c0 * &q.c2 + &q.c0 * &p.c2) / &d;
        let y = (-&p.c1 * &q.c0 + &q.c1 * &p.c0) / &d;
        Some(Point::new(x, y))
    }

    pub fn is_extension_point(&self, p: &Point) -> bool {
        self.xi1.eval(p).is_zero() && self.xi2.eval(p).is_zero()
    }

    pub fn eval(&self, p: &Point) -> Result<Scalar> {
        let den = self.xi2.eval(p);
        let num = self.xi1.eval(p);
        if den.is_zero() {
            if num.is_zero() {
                return Ok(self.xi0.eval(p));
            }
            return Err(Error::Pole(p.to_string()));
        }
        Ok(&num * &num / den + self.xi0.eval(p))
    }

    pub fn eval_f64(&self, p: [f64; 2]) -> f64 {
        let den = self.xi2.eval_f64(p);
        let num = self.xi1.eval_f64(p);
        let head = if den == 0.0 && num == 0.0 {
            0.0
        } else {
            num * num / den
        };
        head + self.xi0.eval_f64(p)
    }

    /// `t = ξ₁/ξ₂`
    pub fn t(&self, p: &Point) -> Result<Scalar> {
        let den = self.xi2.eval(p);
        if den.is_zero() {
            return Err(Error::Pole(p.to_string()));
        }
        Ok(self.xi1.eval(p) / den)
    }

    /// Point `2t·a − t²·b + c` of the gradient curve.
    pub fn gradient_at_t(&self, t: &Scalar) -> Point {
        let two_t = int(2) * t;
        let t2 = t * t;
        self.a()
            .scale(&two_t)
            .sub(&self.b().scale(&t2))
            .add(&self.c())
    }

    pub fn gradient_at_t_f64(&self, t: f64) -> [f64; 2] {
        let [a, b, c] = [self.a(), self.b(), self.c()].map(|p| p.to_f64());
        [
            2.0 * t * a[0] - t * t * b[0] + c[0],
            2.0 * t * a[1] - t * t * b[1] + c[1],
        ]
    }

    /// `∇r(p)`; requires `ξ₂(p) ≠ 0`.
    pub fn gradient(&self, p: &Point) -> Result<Point> {
        Ok(self.gradient_at_t(&self.t(p)?))
    }

    pub fn gradient_f64(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let den = self.xi2.eval_f64(p);
        if den == 0.0 {
            return Err(Error::Pole(format!("{}, {}", p[0], p[1])));
        }
        Ok(self.gradient_at_t_f64(self.xi1.eval_f64(p) / den))
    }

    /// Numerator `ξ₁² + ξ₀ξ₂` of `r` written over `ξ₂`.
    pub fn numerator(&self) -> QuadraticPoly {
        QuadraticPoly::product(&self.xi1, &self.xi1)
            .add(&QuadraticPoly::product(&self.xi0, &self.xi2))
    }
}

fn rational_sqrt(v: &Scalar) -> Option<Scalar> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    (&n * &n == *v.numer() && &d * &d == *v.denom()).then(|| BigRational::new(n, d))
}

/// Writes `Q / d` as `ξ₁²/ξ₂ + ξ₀`.
///
/// `Q` restricted to the line `d = 0` must be a nonnegative multiple
/// `λ·(u − ρ)²` of a square in the free coordinate `u`. The returned `ξ₁`
/// is a form in `u` alone with positive leading coefficient. When `λ` is a
/// rational square, `ξ₂ = d`; otherwise `ξ₂ = d/λ` keeps every coefficient
/// rational. In both cases `Q/d ≡ ξ₁²/ξ₂ + ξ₀` identically.
pub fn decompose_rational(q: &QuadraticPoly, d: &LinearForm) -> Result<RationalForm> {
    if d.is_constant() {
        return Err(Error::ConstantDenominator);
    }
    let not = |why: &str| Error::NotDecomposable(why.to_string());
    let c = &q.0;
    // Eliminate x₁ when possible, so ξ₁ only involves x₂; otherwise x₂.
    let (lam, mu, nu, free) = if !d.c1.is_zero() {
        // x₁ = α x₂ + β
        let alpha = -&d.c2 / &d.c1;
        let beta = -&d.c0 / &d.c1;
        let lam = &c[0] * &alpha * &alpha + &c[1] * &alpha + &c[2];
        let mu = int(2) * &c[0] * &alpha * &beta + &c[1] * &beta + &c[3] * &alpha + &c[4];
        let nu = &c[0] * &beta * &beta + &c[3] * &beta + &c[5];
        (lam, mu, nu, LinearForm::from_ints(0, 1, 0))
    } else {
        // x₂ = γ, constant on the line
        let gamma = -&d.c0 / &d.c2;
        let lam = c[0].clone();
        let mu = &c[1] * &gamma + &c[3];
        let nu = &c[2] * &gamma * &gamma + &c[4] * &gamma + &c[5];
        (lam, mu, nu, LinearForm::from_ints(1, 0, 0))
    };

    let (xi1, weight) = if lam.is_zero() {
        if !mu.is_zero() {
            return Err(not("numerator is linear along the pole line"));
        }
        if nu.is_negative() {
            return Err(not("numerator is negative along the pole line"));
        }
        if nu.is_zero() {
            (LinearForm::zero(), int(1))
        } else {
            match rational_sqrt(&nu) {
                Some(root) => (LinearForm::new(int(0), int(0), root), int(1)),
                None => (LinearForm::from_ints(0, 0, 1), nu.clone()),
            }
        }
    } else {
        if lam.is_negative() {
            return Err(not("numerator is concave along the pole line"));
        }
        if !(&mu * &mu - int(4) * &lam * &nu).is_zero() {
            return Err(not("numerator is not a square along the pole line"));
        }
        let shift = free.add(&LinearForm::new(int(0), int(0), &mu / (int(2) * &lam)));
        match rational_sqrt(&lam) {
            Some(root) => (shift.scale(&root), int(1)),
            None => (shift, lam.clone()),
        }
    };
    let xi2 = d.scale(&(int(1) / &weight));

    // Q − weight·ξ₁² vanishes on d = 0, so it factors as d·ξ₀.
    let rem = q.add(&QuadraticPoly::product(&xi1, &xi1).scale(&-weight));
    let xi0 = divide_by_linear(&rem, d).ok_or_else(|| not("remainder not divisible"))?;
    RationalForm::new(xi1, xi2, xi0)
}

fn divide_by_linear(r: &QuadraticPoly, d: &LinearForm) -> Option<LinearForm> {
    let c = &r.0;
    let g = if !d.c1.is_zero() {
        let g1 = &c[0] / &d.c1;
        let g2 = (&c[1] - &d.c2 * &g1) / &d.c1;
        let g0 = (&c[3] - &d.c0 * &g1) / &d.c1;
        LinearForm::new(g1, g2, g0)
    } else {
        let g2 = &c[2] / &d.c2;
        let g1 = &c[1] / &d.c2;
        let g0 = (&c[4] - &d.c0 * &g2) / &d.c2;
        LinearForm::new(g1, g2, g0)
    };
    (QuadraticPoly::product(&g, d) == *r).then_some(g)
}

/// Float evaluation of `Q/d`; used by tests comparing two presentations.
#[cfg(test)]
pub(crate) fn eval_quotient_f64(q: &QuadraticPoly, d: &LinearForm, p: [f64; 2]) -> f64 {
    let c = q.0.clone().map(|v| super::to_f64(&v));
    let [x, y] = p;
    (c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5]) / d.eval_f64(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::ratio;

    fn example2() -> RationalForm {
        RationalForm::new(
            LinearForm::from_ints(0, 1, 0),
            LinearForm::from_ints(-1, 1, 1),
            LinearForm::zero(),
        )
        .unwrap()
    }

    fn example1_parts() -> (QuadraticPoly, LinearForm) {
        (
            QuadraticPoly::from_ints([36, 21, 36, -81, 24, -252]),
            LinearForm::from_ints(-12, 9, 75),
        )
    }

    #[test]
    fn eval_examples() {
        let r = example2();
        assert_eq!(r.eval(&Point::from_ints(1, 1)).unwrap(), int(1));
        assert_eq!(r.eval(&Point::from_ints(1, 0)).unwrap(), int(0));
        assert!(matches!(r.eval(&Point::from_ints(2, 1)), Err(Error::Pole(_))));

        let (q, d) = example1_parts();
        let r1 = decompose_rational(&q, &d).unwrap();
        assert_eq!(r1.eval(&Point::from_ints(-1, 1)).unwrap(), int(-1));
    }

    #[test]
    fn gradient_examples() {
        let r = example2();
        assert_eq!(r.gradient(&Point::from_ints(1, 1)).unwrap(), Point::from_ints(1, 1));
        assert_eq!(r.gradient(&Point::from_ints(0, 0)).unwrap(), Point::from_ints(0, 0));
        assert!(r.gradient(&Point::from_ints(1, 0)).is_err());
    }

    #[test]
    fn constant_denominator_rejected() {
        let r = RationalForm::new(
            LinearForm::from_ints(1, 0, 0),
            LinearForm::from_ints(0, 0, 3),
            LinearForm::zero(),
        );
        assert_eq!(r, Err(Error::ConstantDenominator));
    }

    #[test]
    fn apex_of_example2() {
        assert_eq!(example2().apex(), Some(Point::from_ints(1, 0)));
    }

    #[test]
    fn decompose_perfect_square() {
        let q = QuadraticPoly::from_ints([0, 0, 1, 0, 0, 0]);
        let d = LinearForm::from_ints(-1, 1, 1);
        let r = decompose_rational(&q, &d).unwrap();
        assert_eq!(r, example2());
    }

    #[test]
    fn decompose_exact_multiple() {
        let q = QuadraticPoly::from_ints([0, 1, 0, 0, 0, 0]);
        let d = LinearForm::from_ints(1, 0, 0);
        let r = decompose_rational(&q, &d).unwrap();
        assert_eq!(r.xi1, LinearForm::zero());
        assert_eq!(r.xi2, d);
        assert_eq!(r.xi0, LinearForm::from_ints(0, 1, 0));
    }

    #[test]
    fn decompose_example1_reexpands() {
        let (q, d) = example1_parts();
        let r = decompose_rational(&q, &d).unwrap();
        // Q/d ≡ N/ξ₂  ⇔  Q·ξ₂ ≡ N·d; here ξ₂ = d/72 so Q ≡ 72·N.
        let weight = &d.c1 / &r.xi2.c1;
        assert_eq!(weight, int(72));
        assert_eq!(r.numerator().scale(&weight), q);
        assert!(r.xi1.c1.is_zero() && r.xi1.c2.is_positive());
        assert_eq!(r.xi0, LinearForm::from_ints(-3, -4, -12));
    }

    #[test]
    fn decompose_homogenized_rank_one() {
        // Q − ξ₀·d has rank-one PSD homogenized matrix ξ₁ξ₁ᵀ (up to weight).
        let (q, d) = example1_parts();
        let r = decompose_rational(&q, &d).unwrap();
        let rem = q.add(&QuadraticPoly::product(&r.xi0, &d).scale(&int(-1)));
        let m = rem.homogenized_matrix();
        for i in 0..3 {
            for j in 0..3 {
                let minor = &m[i][i] * &m[j][j] - &m[i][j] * &m[j][i];
                assert!(minor.is_zero());
            }
            assert!(!m[i][i].is_negative());
        }
    }

    #[test]
    fn decompose_rejects_non_squares() {
        let d = LinearForm::from_ints(1, 0, 0);
        // On x₁ = 0: Q = x₂² − 1 is not a square.
        let q = QuadraticPoly::from_ints([0, 0, 1, 0, 0, -1]);
        assert!(matches!(decompose_rational(&q, &d), Err(Error::NotDecomposable(_))));
        // On x₁ = 0: Q = −x₂² is concave.
        let q = QuadraticPoly::from_ints([0, 0, -1, 0, 0, 0]);
        assert!(matches!(decompose_rational(&q, &d), Err(Error::NotDecomposable(_))));
    }

    #[test]
    fn decompose_nonsquare_constant() {
        // On x₂ = 1: Q = 2, so ξ₁ = 1 and ξ₂ = d/2.
        let q = QuadraticPoly::from_ints([0, 0, 2, 0, 0, 0]);
        let d = LinearForm::from_ints(0, 1, -1);
        let r = decompose_rational(&q, &d).unwrap();
        assert_eq!(r.xi2, LinearForm::new(int(0), ratio(1, 2), ratio(-1, 2)));
        for p in [[0.3, 2.0], [-1.0, 5.5]] {
            assert!((r.eval_f64(p) - eval_quotient_f64(&q, &d, p)).abs() < 1e-12);
        }
    }
}
