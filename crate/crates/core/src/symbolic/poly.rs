use std::collections::BTreeMap;

use num_traits::Zero;

use super::{int, ConicForm, Point, Scalar};

/// Sparse bivariate polynomial in `(s₁, s₂)`; keys are exponent pairs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Scalar>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: Scalar) -> Self {
        Poly2::monomial(c, 0, 0)
    }

    pub fn monomial(c: Scalar, i: u32, j: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Poly2 { terms }
    }

    /// `c1·s₁ + c2·s₂ + c0`
    pub fn linear(c1: Scalar, c2: Scalar, c0: Scalar) -> Self {
        Poly2::monomial(c1, 1, 0)
            .add(&Poly2::monomial(c2, 0, 1))
            .add(&Poly2::constant(c0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, i: u32, j: u32) -> Scalar {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    fn insert(&mut self, key: (u32, u32), c: Scalar) {
        let entry = self.terms.entry(key).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &other.terms {
                out.insert((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, s: &Point) -> Scalar {
        self.terms.iter().fold(Scalar::zero(), |acc, ((i, j), c)| {
            acc + c * pow(&s.x, *i) * pow(&s.y, *j)
        })
    }

    /// Coefficients of a polynomial of degree ≤ 2 as a conic.
    pub fn to_conic(&self) -> Option<ConicForm> {
        if self.degree() > 2 {
            return None;
        }
        Some(ConicForm::new([
            self.coefficient(2, 0),
            self.coefficient(1, 1),
            self.coefficient(0, 2),
            self.coefficient(1, 0),
            self.coefficient(0, 1),
            self.coefficient(0, 0),
        ]))
    }
}

fn pow(base: &Scalar, e: u32) -> Scalar {
    (0..e).fold(int(1), |acc, _| acc * base)
}

/// Determinant of a 4×4 polynomial matrix by cofactor expansion.
///
/// Division-free, so it stays inside the polynomial ring.
pub fn det4(m: &[[Poly2; 4]; 4]) -> Poly2 {
    let det3 = |rows: [usize; 3], cols: [usize; 3]| -> Poly2 {
        let e = |r: usize, c: usize| &m[rows[r]][cols[c]];
        let t1 = e(0, 0).mul(&e(1, 1).mul(e(2, 2)).sub(&e(1, 2).mul(e(2, 1))));
        let t2 = e(0, 1).mul(&e(1, 0).mul(e(2, 2)).sub(&e(1, 2).mul(e(2, 0))));
        let t3 = e(0, 2).mul(&e(1, 0).mul(e(2, 1)).sub(&e(1, 1).mul(e(2, 0))));
        t1.sub(&t2).add(&t3)
    };
    let mut out = Poly2::zero();
    for col in 0..4 {
        if m[0][col].is_zero() {
            continue;
        }
        let cols: Vec<usize> = (0..4).filter(|&c| c != col).collect();
        let minor = det3([1, 2, 3], [cols[0], cols[1], cols[2]]);
        let term = m[0][col].mul(&minor);
        out = if col % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    }
    out
}

/// Resultant in `t` of `p₂t² + p₁t + p₀` and `q₂t² + q₁t + q₀` via the
/// Sylvester matrix. Coefficients are given leading first.
pub fn sylvester_quadratics(p: [Poly2; 3], q: [Poly2; 3]) -> Poly2 {
    let z = Poly2::zero;
    let [p2, p1, p0] = p;
    let [q2, q1, q0] = q;
    let m = [
        [p2.clone(), p1.clone(), p0.clone(), z()],
        [z(), p2, p1, p0],
        [q2.clone(), q1.clone(), q0.clone(), z()],
        [z(), q2, q1, q0],
    ];
    det4(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> Poly2 {
        Poly2::constant(int(v))
    }

    #[test]
    fn det4_of_integer_matrix() {
        // det computed by hand: upper triangular times a swap.
        let m = [
            [c(0), c(2), c(0), c(0)],
            [c(3), c(0), c(0), c(0)],
            [c(0), c(0), c(5), c(1)],
            [c(0), c(0), c(0), c(7)],
        ];
        assert_eq!(det4(&m), c(-210));
    }

    #[test]
    fn resultant_vanishes_on_common_root() {
        // (t − 1)(t − 2) and (t − 1)(t + 5) share t = 1.
        let r = sylvester_quadratics([c(1), c(-3), c(2)], [c(1), c(4), c(-5)]);
        assert!(r.is_zero());
        let r = sylvester_quadratics([c(1), c(0), c(-1)], [c(1), c(0), c(-4)]);
        assert!(!r.is_zero());
    }

    #[test]
    fn multiplication_and_eval() {
        let x = Poly2::linear(int(1), int(0), int(0));
        let y = Poly2::linear(int(0), int(1), int(1));
        let p = x.mul(&y).mul(&y);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.eval(&Point::from_ints(2, 3)), int(32));
    }
}
