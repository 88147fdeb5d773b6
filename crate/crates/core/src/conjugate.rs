//! Closed-form conjugate on each two-dimensional piece of the subdivision.
//!
//! On a vertex piece `f*(s) = ⟨s, v⟩ − r(v)`. On an edge piece the sup is
//! attained at the stationary point of `r` restricted to the edge; writing
//! the edge as `v + τe` gives `ξ₁ = p₀ + p₁τ`, `ξ₂ = q₀ + q₁τ`,
//! `ξ₀ = z₀ + z₁τ`. With `q₁ = 0` the result is quadratic in `s`; otherwise
//! it involves `√(p₁² − q₁(e·s − z₁))`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{subdivision_check, Bounds, Polytope, Region, SAMPLE_TOL};
use crate::subdiff::{
    build_domain_subdivision, sampling_bounds, BoundaryCurve, GradientCurve, PieceShape,
    PieceSource, SubdiffPiece, Subdivision,
};
use crate::symbolic::{
    int, to_f64, ConicForm, FractionalExpr, LinearForm, Point, QuadraticExpr, RationalForm, Scalar,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjugateExpr {
    /// `c1·s₁ + c2·s₂ + c0`
    Linear(LinearForm),
    Quadratic(QuadraticExpr),
    Fractional(FractionalExpr),
}

impl ConjugateExpr {
    pub fn kind(&self) -> &'static str {
        match self {
            ConjugateExpr::Linear(_) => "linear",
            ConjugateExpr::Quadratic(_) => "quadratic",
            ConjugateExpr::Fractional(_) => "fractional",
        }
    }

    pub fn eval_f64(&self, s: [f64; 2]) -> f64 {
        match self {
            ConjugateExpr::Linear(l) => l.eval_f64(s),
            ConjugateExpr::Quadratic(q) => q.eval_f64(s),
            ConjugateExpr::Fractional(f) => f.eval_f64(s),
        }
    }

    /// Exact value; `None` for fractional expressions.
    pub fn eval_exact(&self, s: &Point) -> Option<Scalar> {
        match self {
            ConjugateExpr::Linear(l) => Some(l.eval(s)),
            ConjugateExpr::Quadratic(q) => Some(q.eval(s)),
            ConjugateExpr::Fractional(_) => None,
        }
    }

    /// Adds `delta` to the constant term.
    pub fn shift_constant(&mut self, delta: &Scalar) {
        match self {
            ConjugateExpr::Linear(l) => l.c0 += delta,
            ConjugateExpr::Quadratic(q) => q.z00 += delta,
            ConjugateExpr::Fractional(f) => f.affine.c0 += delta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugatePiece {
    pub region: Region,
    pub expr: ConjugateExpr,
    pub source: PieceSource,
    pub boundary: Vec<BoundaryCurve>,
}

/// `f*` as a list of pieces over a cover of the plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseConjugate {
    pub pieces: Vec<ConjugatePiece>,
    pub conic: ConicForm,
    pub curve: GradientCurve,
    /// Rays and the interior arc; they carry no expression of their own.
    pub absorbed: Vec<SubdiffPiece>,
}

fn area(piece: &SubdiffPiece) -> &Region {
    match &piece.shape {
        PieceShape::Area(r) => r,
        _ => panic!("conjugate pieces need a two-dimensional subdifferential piece"),
    }
}

/// `⟨s, v⟩ − r(v)`, with the extension value of `r` at an apex vertex.
pub fn vertex_conjugate_piece(r: &RationalForm, v: &Point, piece: &SubdiffPiece) -> Result<ConjugatePiece> {
    let value = r.eval(v)?;
    Ok(ConjugatePiece {
        region: area(piece).clone(),
        expr: ConjugateExpr::Linear(LinearForm::new(v.x.clone(), v.y.clone(), -value)),
        source: piece.source,
        boundary: piece.boundary.clone(),
    })
}

/// Coefficients of `ξ₁, ξ₂, ξ₀` along `v + τe`.
struct EdgeTrace {
    v: Point,
    e: Point,
    p0: Scalar,
    p1: Scalar,
    q0: Scalar,
    q1: Scalar,
    z0: Scalar,
    z1: Scalar,
}

impl EdgeTrace {
    fn new(r: &RationalForm, v: &Point, e: &Point) -> Self {
        EdgeTrace {
            v: v.clone(),
            e: e.clone(),
            p0: r.xi1.eval(v),
            p1: r.a().dot(e),
            q0: r.xi2.eval(v),
            q1: r.b().dot(e),
            z0: r.xi0.eval(v),
            z1: r.c().dot(e),
        }
    }

    /// `τ` of the point on the edge line where `ξ₁/ξ₂ = t`.
    fn tau_f64(&self, t: f64) -> f64 {
        let [p0, p1, q0, q1] = [&self.p0, &self.p1, &self.q0, &self.q1].map(to_f64);
        (t * q0 - p0) / (p1 - t * q1)
    }

    fn quadratic(&self) -> QuadraticExpr {
        let EdgeTrace { v, e, p0, p1, q0, z0, z1, .. } = self;
        let k = q0 / (int(4) * p1 * p1);
        let ratio = p0 / p1;
        QuadraticExpr::new([
            &k * &e.x * &e.x,
            int(2) * &k * &e.x * &e.y,
            &k * &e.y * &e.y,
            &v.x - &ratio * &e.x - int(2) * &k * z1 * &e.x,
            &v.y - &ratio * &e.y - int(2) * &k * z1 * &e.y,
            -z0 + &ratio * z1 + &k * z1 * z1,
        ])
    }

    /// `Δ = p₁² − q₁(e·s − z₁)`
    fn discriminant(&self) -> LinearForm {
        let EdgeTrace { e, p1, q1, z1, .. } = self;
        LinearForm::new(-(q1 * &e.x), -(q1 * &e.y), p1 * p1 + q1 * z1)
    }

    fn fractional(&self, sigma: i64) -> FractionalExpr {
        let EdgeTrace { v, e, p0, p1, q0, q1, z0, z1 } = self;
        let rad = self.discriminant();
        let lead = int(2 * sigma) * (q0 * p1 - p0 * q1);
        let q1sq = q1 * q1;
        let slope = q0 / q1;
        let affine = LinearForm::new(
            &v.x - &slope * &e.x,
            &v.y - &slope * &e.y,
            -z0 - int(2) * p0 * p1 / q1 + q0 * (int(2) * p1 * p1 + q1 * z1) / &q1sq,
        );
        FractionalExpr {
            num: rad.scale(&lead),
            scale: q1sq,
            rad,
            affine,
        }
    }
}

/// Conjugate on the region of edge `i`: quadratic when `ξ₂` is constant
/// along the edge, otherwise the square-root form with the branch whose
/// stationary point lies inside the edge.
pub fn edge_conjugate_piece(r: &RationalForm, p: &Polytope, i: usize, piece: &SubdiffPiece) -> Result<ConjugatePiece> {
    let region = area(piece);
    let meta = piece
        .edge
        .as_ref()
        .expect("edge conjugate needs a two-dimensional edge piece");
    let edge = p.edge(i);
    let trace = EdgeTrace::new(r, &edge.start, &edge.direction());
    let expr = if trace.q1.is_zero() {
        ConjugateExpr::Quadratic(trace.quadratic())
    } else {
        // q₁t − p₁ = σ√Δ keeps one sign between the endpoint limits.
        let t_mid = (&meta.t_lower + &meta.t_upper) / int(2);
        let sigma = if (&trace.q1 * &t_mid - &trace.p1).is_positive() { 1 } else { -1 };
        let w = region.witness().to_f64();
        let delta = trace.discriminant().eval_f64(w);
        let t = (to_f64(&trace.p1) + sigma as f64 * delta.max(0.0).sqrt()) / to_f64(&trace.q1);
        let tau = trace.tau_f64(t);
        if !(delta > 0.0 && tau > -1e-9 && tau < 1.0 + 1e-9) {
            return Err(Error::BranchSelectionFailed(i));
        }
        ConjugateExpr::Fractional(trace.fractional(sigma))
    };
    Ok(ConjugatePiece {
        region: region.clone(),
        expr,
        source: piece.source,
        boundary: piece.boundary.clone(),
    })
}

/// Samples used to re-verify coverage after assembly.
pub const COVERAGE_SAMPLES: usize = 10_000;

/// Box for coverage sampling: at least `[−10, 10]²`, grown to contain the
/// structure of the subdivision.
pub fn coverage_bounds(all: &[SubdiffPiece]) -> Bounds {
    let mut b = sampling_bounds(all);
    b.include([-10.0, -10.0]);
    b.include([10.0, 10.0]);
    b
}

/// Collects the pieces and checks that their regions cover the plane.
pub fn assemble_conjugate(
    pieces: Vec<ConjugatePiece>,
    ray_pieces: Vec<SubdiffPiece>,
    conic: ConicForm,
    curve: GradientCurve,
) -> Result<PiecewiseConjugate> {
    let regions: Vec<Region> = pieces.iter().map(|p| p.region.clone()).collect();
    let mut all: Vec<SubdiffPiece> = ray_pieces.clone();
    all.extend(pieces.iter().map(|p| SubdiffPiece {
        source: p.source,
        shape: PieceShape::Area(p.region.clone()),
        boundary: p.boundary.clone(),
        edge: None,
    }));
    let report = subdivision_check(&regions, coverage_bounds(&all), COVERAGE_SAMPLES);
    if report.covered < report.samples {
        return Err(Error::CoverageGap(report.samples - report.covered));
    }
    Ok(PiecewiseConjugate {
        pieces,
        conic,
        curve,
        absorbed: ray_pieces,
    })
}

/// Conjugate pieces for every two-dimensional piece of a subdivision.
pub fn conjugate_from_subdivision(r: &RationalForm, p: &Polytope, sub: &Subdivision) -> Result<PiecewiseConjugate> {
    let mut pieces = Vec::new();
    let mut rest = Vec::new();
    for piece in &sub.pieces {
        match (&piece.shape, piece.source) {
            (PieceShape::Area(_), PieceSource::Vertex(i) | PieceSource::ApexVertex(i)) => {
                pieces.push(vertex_conjugate_piece(r, p.vertex(i), piece)?)
            }
            (PieceShape::Area(_), PieceSource::Edge(i)) => pieces.push(edge_conjugate_piece(r, p, i, piece)?),
            _ => rest.push(piece.clone()),
        }
    }
    assemble_conjugate(pieces, rest, sub.conic.clone(), sub.curve.clone())
}

/// Subdivision followed by the conjugate pieces.
pub fn conjugate(r: &RationalForm, p: &Polytope) -> Result<PiecewiseConjugate> {
    let sub = build_domain_subdivision(r, p)?;
    conjugate_from_subdivision(r, p, &sub)
}

impl PiecewiseConjugate {
    /// Index of the piece used to evaluate at `s`: the first one containing
    /// it, or failing that the one closest to containing it within
    /// `SAMPLE_TOL` (relative to `|s|`).
    pub fn locate(&self, s: [f64; 2]) -> Option<usize> {
        let tol = SAMPLE_TOL * (1.0 + s[0].hypot(s[1]));
        let mut best: Option<(usize, f64)> = None;
        for (k, piece) in self.pieces.iter().enumerate() {
            let m = piece.region.margin_f64(s);
            if m >= 0.0 {
                return Some(k);
            }
            if m >= -tol && best.is_none_or(|(_, b)| m > b) {
                best = Some((k, m));
            }
        }
        best.map(|(k, _)| k)
    }

    pub fn eval(&self, s: [f64; 2]) -> Result<f64> {
        self.locate(s)
            .map(|k| self.pieces[k].expr.eval_f64(s))
            .ok_or(Error::NoRegion(s[0], s[1]))
    }

    /// Exact value at a rational point inside a linear or quadratic piece.
    pub fn eval_exact(&self, s: &Point) -> Option<Scalar> {
        self.pieces
            .iter()
            .find(|p| p.region.contains(s))
            .and_then(|p| p.expr.eval_exact(s))
    }
}

pub fn eval_conjugate(f: &PiecewiseConjugate, s: [f64; 2]) -> Result<f64> {
    f.eval(s)
}
