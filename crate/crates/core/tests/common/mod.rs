#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use ratconj::geometry::Polytope;
use ratconj::symbolic::{LinearForm, Point, RationalForm};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn example1() -> (RationalForm, Polytope) {
    let text = std::fs::read_to_string(data("example1.json")).unwrap();
    let p = ratconj::cli::parse_problem(&text).unwrap();
    (p.r, p.p)
}

pub fn example2() -> (RationalForm, Polytope) {
    let text = std::fs::read_to_string(data("example2.json")).unwrap();
    let p = ratconj::cli::parse_problem(&text).unwrap();
    (p.r, p.p)
}

fn coeff(rng: &mut impl Rng) -> i64 {
    rng.gen_range(-9..=9)
}

/// Random form with integer coefficients in `[−9, 9]`, non-constant `ξ₂`
/// and independent `ξ₁`, `ξ₂`.
pub fn random_form(rng: &mut impl Rng) -> RationalForm {
    loop {
        let mut lf = || LinearForm::from_ints(coeff(rng), coeff(rng), coeff(rng));
        let (xi1, xi2, xi0) = (lf(), lf(), lf());
        if let Ok(r) = RationalForm::new(xi1, xi2, xi0) {
            if !num_traits::Zero::is_zero(&r.det()) {
                return r;
            }
        }
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Strictly convex hull, counterclockwise.
pub fn hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn positive(l: &LinearForm, p: (i64, i64)) -> bool {
    num_traits::Signed::is_positive(&l.eval(&Point::from_ints(p.0, p.1)))
}

/// Random form and polygon with `ξ₂ > 0` on the polygon.
pub fn random_instance(rng: &mut impl Rng) -> (RationalForm, Polytope) {
    loop {
        let r = random_form(rng);
        let k = rng.gen_range(3..=8);
        let pts: Vec<(i64, i64)> = (0..40)
            .map(|_| (rng.gen_range(-5..=5), rng.gen_range(-5..=5)))
            .filter(|&p| positive(&r.xi2, p))
            .take(k)
            .collect();
        let h = hull(pts);
        if h.len() < 3 {
            continue;
        }
        if let Ok(p) = Polytope::from_ints(&h) {
            return (r, p);
        }
    }
}

/// Random instance whose polygon has a vertex at the common zero of `ξ₁`
/// and `ξ₂`.
pub fn random_apex_instance(rng: &mut impl Rng) -> (RationalForm, Polytope) {
    loop {
        let apex = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let (a1, a2, b1, b2) = (coeff(rng), coeff(rng), coeff(rng), coeff(rng));
        if a1 * b2 - a2 * b1 == 0 {
            continue;
        }
        let through = |c1: i64, c2: i64| LinearForm::from_ints(c1, c2, -(c1 * apex.0 + c2 * apex.1));
        let xi0 = LinearForm::from_ints(coeff(rng), coeff(rng), coeff(rng));
        let r = RationalForm::new(through(a1, a2), through(b1, b2), xi0).unwrap();
        let k = rng.gen_range(2..=6);
        let mut pts: Vec<(i64, i64)> = (0..40)
            .map(|_| (apex.0 + rng.gen_range(-5..=5), apex.1 + rng.gen_range(-5..=5)))
            .filter(|&p| positive(&r.xi2, p))
            .take(k)
            .collect();
        pts.push(apex);
        let h = hull(pts);
        if h.len() < 3 || !h.contains(&apex) {
            continue;
        }
        if let Ok(p) = Polytope::from_ints(&h) {
            return (r, p);
        }
    }
}

/// Points `(k, k²)` for `n` distinct random `k`, counterclockwise: a random
/// convex polygon.
pub fn parabola_polygon(rng: &mut impl Rng, n: usize) -> Polytope {
    let mut ks: Vec<i64> = Vec::new();
    while ks.len() < n {
        let k = rng.gen_range(-150..=150);
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    ks.sort();
    Polytope::from_ints(&ks.iter().map(|&k| (k, k * k)).collect::<Vec<_>>()).unwrap()
}
