//! Subdifferential of `f = r + I_P` over vertices, edges and the interior,
//! giving the parabolic subdivision of `dom f*`.
//!
//! Notation: `∇r(x) = γ(t)` with `t = ξ₁(x)/ξ₂(x)` and
//! `γ(t) = c + 2t·a − t²·b`, where `a`, `b`, `c` are the coefficient
//! vectors of `ξ₁`, `ξ₂`, `ξ₀`. The curve γ is the parabola `C_r = 0`, and
//! `K = {C_r ≤ 0}` is its convex side (canonical `C_r` has a positive
//! semidefinite quadratic part). The apex `A` is the common zero of `ξ₁`
//! and `ξ₂`; `r` is affine along every line through `A`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{
    normal_cone, subdivision_check, Bounds, Cell, Constraint, Edge, Polytope, Region, Sense,
};
use crate::symbolic::{int, ratio, to_f64, ConicForm, LinearForm, Point, Poly2, RationalForm, Scalar};

/// The gradient curve `t ↦ c + 2t·a − t²·b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradientCurve {
    pub a: Point,
    pub b: Point,
    pub c: Point,
}

impl GradientCurve {
    pub fn of(r: &RationalForm) -> Self {
        GradientCurve {
            a: r.a(),
            b: r.b(),
            c: r.c(),
        }
    }

    pub fn point(&self, t: &Scalar) -> Point {
        self.a
            .scale(&(int(2) * t))
            .sub(&self.b.scale(&(t * t)))
            .add(&self.c)
    }

    pub fn point_f64(&self, t: f64) -> [f64; 2] {
        let [a, b, c] = [&self.a, &self.b, &self.c].map(|p| p.to_f64());
        [
            2.0 * t * a[0] - t * t * b[0] + c[0],
            2.0 * t * a[1] - t * t * b[1] + c[1],
        ]
    }
}

/// Half-line `origin + λ·direction`, `λ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub origin: Point,
    pub direction: Point,
}

/// Piece of the gradient curve between two parameter values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub t_from: Scalar,
    pub t_to: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryCurve {
    Ray(Ray),
    Arc(Arc),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PieceSource {
    Vertex(usize),
    Edge(usize),
    Interior,
    /// Vertex where `ξ₁ = ξ₂ = 0`.
    ApexVertex(usize),
}

impl PieceSource {
    pub fn label(&self) -> String {
        match self {
            PieceSource::Vertex(i) => format!("vertex {i}"),
            PieceSource::Edge(i) => format!("edge {i}"),
            PieceSource::Interior => "interior".into(),
            PieceSource::ApexVertex(i) => format!("apex vertex {i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PieceShape {
    Area(Region),
    Ray(Ray),
    Arc(Arc),
}

/// Edge data behind a two-dimensional edge piece.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMeta {
    /// Gradient limit at the edge start and its curve parameter.
    pub lower: Point,
    pub t_lower: Scalar,
    /// Gradient limit at the edge end.
    pub upper: Point,
    pub t_upper: Scalar,
    pub normal: Point,
    /// Side of `C_r` holding the region near the arc.
    pub conic_sense: Sense,
    /// `ξ₂` is constant along the edge, so the lines `e·s = κ` are
    /// parallel to the parabola's axis.
    pub axis_parallel: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdiffPiece {
    pub source: PieceSource,
    pub shape: PieceShape,
    /// Curves bounding a two-dimensional piece.
    pub boundary: Vec<BoundaryCurve>,
    pub edge: Option<EdgeMeta>,
}

impl SubdiffPiece {
    pub fn region(&self) -> Option<&Region> {
        match &self.shape {
            PieceShape::Area(r) => Some(r),
            _ => None,
        }
    }

    pub fn ray(&self) -> Option<&Ray> {
        match &self.shape {
            PieceShape::Ray(r) => Some(r),
            _ => None,
        }
    }
}

/// Outcome of the vertex rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexOutcome {
    Cone(SubdiffPiece),
    /// `ξ₁(v) = ξ₂(v) = 0`; handled by [`conjecture_vertex_region`].
    Apex,
}

/// Implicit equation of the gradient image, in canonical form.
///
/// Eliminates `t` from `s₁ = c₁ + 2a₁t − b₁t²`, `s₂ = c₂ + 2a₂t − b₂t²`
/// with the 4×4 Sylvester resultant.
pub fn gradient_image_conic(r: &RationalForm) -> Result<ConicForm> {
    if r.det().is_zero() {
        return Err(Error::DegenerateImage);
    }
    let (a, b, c) = (r.a(), r.b(), r.c());
    let konst = |v: Scalar| Poly2::constant(v);
    let p = [
        konst(-b.x.clone()),
        konst(int(2) * &a.x),
        Poly2::linear(int(-1), int(0), c.x.clone()),
    ];
    let q = [
        konst(-b.y.clone()),
        konst(int(2) * &a.y),
        Poly2::linear(int(0), int(-1), c.y.clone()),
    ];
    let res = crate::symbolic::sylvester_quadratics(p, q);
    let conic = res.to_conic().ok_or(Error::DegenerateImage)?;
    if !conic.is_parabolic() {
        return Err(Error::DegenerateImage);
    }
    Ok(conic.canonical().0)
}

/// Checks `ξ₂ > 0` on the polygon apart from at most one apex vertex and
/// returns that vertex.
pub fn check_positive(r: &RationalForm, p: &Polytope) -> Result<Option<usize>> {
    let mut apex = None;
    for (i, v) in p.vertices().iter().enumerate() {
        let den = r.xi2.eval(v);
        if den.is_negative() {
            return Err(Error::NotPositive(i));
        }
        if den.is_zero() {
            if !r.xi1.eval(v).is_zero() {
                return Err(Error::PoleAtVertex(i));
            }
            apex = Some(i);
        }
    }
    Ok(apex)
}

/// Limit of `t` at one end of an edge, approaching along the edge.
fn endpoint_t(r: &RationalForm, edge: &Edge, at_end: bool) -> Result<Scalar> {
    let point = if at_end { &edge.end } else { &edge.start };
    let den = r.xi2.eval(point);
    if !den.is_zero() {
        return Ok(r.xi1.eval(point) / den);
    }
    if !r.xi1.eval(point).is_zero() {
        return Err(Error::PoleOnEdge(edge.index));
    }
    // Both vanish linearly at the endpoint: t → (a·e)/(b·e).
    let e = edge.direction();
    let slope = r.b().dot(&e);
    if slope.is_zero() {
        return Err(Error::PoleOnEdge(edge.index));
    }
    Ok(r.a().dot(&e) / slope)
}

/// `∂f(v) = ∇r(v) + N_P(v)` at vertex `i`.
pub fn vertex_subdifferential(r: &RationalForm, p: &Polytope, i: usize) -> Result<VertexOutcome> {
    let v = p.vertex(i);
    if r.xi2.eval(v).is_zero() {
        if r.xi1.eval(v).is_zero() {
            return Ok(VertexOutcome::Apex);
        }
        return Err(Error::PoleAtVertex(i));
    }
    let g = r.gradient(v)?;
    let cone = normal_cone(p, v)?.translate(&g);
    let witness = cone.apex.add(&cone.generators[0]).add(&cone.generators[1]);
    let boundary = cone
        .generators
        .iter()
        .map(|d| {
            BoundaryCurve::Ray(Ray {
                origin: g.clone(),
                direction: d.clone(),
            })
        })
        .collect();
    Ok(VertexOutcome::Cone(SubdiffPiece {
        source: PieceSource::Vertex(i),
        shape: PieceShape::Area(Region::single(cone.constraints(), witness)),
        boundary,
        edge: None,
    }))
}

fn perpendicular(d: &Point) -> Point {
    Point::new(-d.y.clone(), d.x.clone())
}

/// Union of `∂f(x)` over the relative interior of edge `i`: a ray when
/// `∇r` is constant on the edge, otherwise the region swept by the outward
/// normal from the gradient arc between the two endpoint limits.
pub fn edge_subdifferential(
    r: &RationalForm,
    p: &Polytope,
    i: usize,
    conic: &ConicForm,
) -> Result<SubdiffPiece> {
    let edge = p.edge(i);
    let curve = GradientCurve::of(r);
    let t_lower = endpoint_t(r, &edge, false)?;
    let t_upper = endpoint_t(r, &edge, true)?;
    let lower = curve.point(&t_lower);
    let upper = curve.point(&t_upper);
    let normal = edge.normal();
    if t_lower == t_upper {
        return Ok(SubdiffPiece {
            source: PieceSource::Edge(i),
            shape: PieceShape::Ray(Ray {
                origin: lower,
                direction: normal,
            }),
            boundary: Vec::new(),
            edge: None,
        });
    }

    let e = edge.direction();
    let (k_lower, k_upper) = (e.dot(&lower), e.dot(&upper));
    // e·∇r increases along e because r is convex on the edge.
    debug_assert!(k_lower < k_upper);
    let strip = [
        Constraint::linear(LinearForm::new(e.x.clone(), e.y.clone(), -k_lower), Sense::Ge),
        Constraint::linear(LinearForm::new(e.x.clone(), e.y.clone(), -k_upper), Sense::Le),
    ];

    let t_mid = (&t_lower + &t_upper) / int(2);
    let mid = curve.point(&t_mid);
    // Outward normal of K at γ(t) is ∇C; its sign against the edge normal
    // is −L(A), constant along the arc.
    let exits = conic.gradient(&mid).dot(&normal);
    debug_assert!(!exits.is_zero());
    let exits = exits.is_positive();
    let axis_parallel = r.b().dot(&e).is_zero();
    let conic_sense = if exits { Sense::Ge } else { Sense::Le };
    let side = Constraint::parabolic(conic.clone(), conic_sense);

    let chord_mid = lower.midpoint(&upper);
    let chord = LinearForm::through(&perpendicular(&upper.sub(&lower)), &lower);
    let arc_side = Constraint::linear_containing(chord, &mid);

    let with = |extra: Vec<Constraint>| -> Vec<Constraint> {
        strip.iter().cloned().chain(extra).collect()
    };
    let cells = match (exits, axis_parallel) {
        (true, true) | (false, true) => vec![Cell::new(with(vec![side]), mid.add(&normal))],
        (true, false) => vec![Cell::new(with(vec![side, arc_side]), mid.add(&normal))],
        (false, false) => vec![
            // Each normal ray crosses K and leaves through the far branch.
            Cell::new(with(vec![side]), chord_mid.midpoint(&mid)),
            Cell::new(with(vec![arc_side.reversed()]), chord_mid.add(&normal)),
        ],
    };

    Ok(SubdiffPiece {
        source: PieceSource::Edge(i),
        shape: PieceShape::Area(Region::new(cells)),
        boundary: vec![
            BoundaryCurve::Ray(Ray {
                origin: lower.clone(),
                direction: normal.clone(),
            }),
            BoundaryCurve::Ray(Ray {
                origin: upper.clone(),
                direction: normal.clone(),
            }),
            BoundaryCurve::Arc(Arc {
                t_from: t_lower.clone(),
                t_to: t_upper.clone(),
            }),
        ],
        edge: Some(EdgeMeta {
            lower,
            t_lower,
            upper,
            t_upper,
            normal,
            conic_sense,
            axis_parallel,
        }),
    })
}

/// Box holding the interesting part of a subdivision: every gradient at a
/// vertex and every ray origin, padded.
pub fn sampling_bounds(pieces: &[SubdiffPiece]) -> Bounds {
    let mut b = Bounds::new([0.0; 2], [0.0; 2]);
    for piece in pieces {
        for curve in &piece.boundary {
            if let BoundaryCurve::Ray(ray) = curve {
                b.include(ray.origin.to_f64());
            }
        }
        if let Some(ray) = piece.ray() {
            b.include(ray.origin.to_f64());
        }
    }
    b.expanded(0.5, 10.0)
}

/// Samples used by the elimination coverage check.
pub const ELIMINATION_SAMPLES: usize = 4000;

/// `∂f(v)` at the apex vertex, by elimination: the closure of what the
/// other pieces leave uncovered.
///
/// The two edges at `v` pass through the apex, so their pieces are rays
/// from `p_in` and `p_out` on the parabola. The remaining set is bounded by
/// those two rays and by the parabola arc between `p_in` and `p_out`. The
/// chord `p_in p_out` splits it into a cap inside `C_r ≤ 0` and a polygon
/// bounded by the chord and the reversed constraints of the neighbouring
/// vertex cones.
pub fn conjecture_vertex_region(
    r: &RationalForm,
    p: &Polytope,
    i: usize,
    others: &[SubdiffPiece],
    conic: &ConicForm,
) -> Result<SubdiffPiece> {
    let curve = GradientCurve::of(r);
    let n = p.len();
    let (e_in, e_out) = (p.incoming_edge(i), i);
    let find_ray = |edge: usize| {
        others
            .iter()
            .find(|pc| pc.source == PieceSource::Edge(edge))
            .and_then(|pc| pc.ray().cloned())
    };
    let (ray_in, ray_out) = match (find_ray(e_in), find_ray(e_out)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EliminationFailed(0.0)),
    };
    // Curve parameters of the two ray origins (t is constant on each edge).
    let t_in = endpoint_t(r, &p.edge(e_in), false)?;
    let t_out = endpoint_t(r, &p.edge(e_out), true)?;
    let (p_in, p_out) = (ray_in.origin.clone(), ray_out.origin.clone());

    let mid = curve.point(&((&t_in + &t_out) / int(2)));
    let chord_mid = p_in.midpoint(&p_out);
    let chord = LinearForm::through(&perpendicular(&p_out.sub(&p_in)), &p_in);
    let arc_side = Constraint::linear_containing(chord, &mid);
    let inside = chord_mid.add(&ray_in.direction).add(&ray_out.direction);

    // The neighbour cone's constraint whose boundary carries the ray.
    let reversed_neighbour = |vertex: usize, ray: &Ray| -> Constraint {
        let on_ray = |c: &Constraint| {
            c.holds(&ray.origin)
                && c.reversed().holds(&ray.origin)
                && c.holds(&ray.origin.add(&ray.direction))
                && c.reversed().holds(&ray.origin.add(&ray.direction))
        };
        others
            .iter()
            .find(|pc| pc.source == PieceSource::Vertex(vertex))
            .and_then(|pc| pc.region())
            .and_then(|reg| reg.cells[0].constraints.iter().find(|c| on_ray(c)).cloned())
            .map(|c| c.reversed())
            .unwrap_or_else(|| {
                let form = LinearForm::through(&perpendicular(&ray.direction), &ray.origin);
                Constraint::linear_containing(form, &inside)
            })
    };
    let bound_in = reversed_neighbour((i + n - 1) % n, &ray_in);
    let bound_out = reversed_neighbour((i + 1) % n, &ray_out);

    let cap = Cell::new(
        vec![Constraint::parabolic(conic.clone(), Sense::Le), arc_side.clone()],
        chord_mid.midpoint(&mid),
    );
    let wedge = Cell::new(vec![arc_side.reversed(), bound_in, bound_out], inside);
    let piece = SubdiffPiece {
        source: PieceSource::ApexVertex(i),
        shape: PieceShape::Area(Region::new(vec![cap, wedge])),
        boundary: vec![
            BoundaryCurve::Ray(ray_in),
            BoundaryCurve::Ray(ray_out),
            BoundaryCurve::Arc(Arc {
                t_from: t_in,
                t_to: t_out,
            }),
        ],
        edge: None,
    };

    let mut all: Vec<SubdiffPiece> = others.to_vec();
    all.push(piece.clone());
    let regions: Vec<Region> = all.iter().filter_map(|pc| pc.region().cloned()).collect();
    let report = subdivision_check(&regions, sampling_bounds(&all), ELIMINATION_SAMPLES);
    if report.covered < report.samples {
        return Err(Error::EliminationFailed(report.coverage));
    }
    Ok(piece)
}

/// Vertex, edge, interior and apex pieces of `∂f(P)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subdivision {
    pub conic: ConicForm,
    pub curve: GradientCurve,
    pub pieces: Vec<SubdiffPiece>,
    pub apex: Option<usize>,
}

impl Subdivision {
    pub fn areas(&self) -> impl Iterator<Item = &SubdiffPiece> {
        self.pieces.iter().filter(|p| p.region().is_some())
    }

    pub fn regions(&self) -> Vec<Region> {
        self.areas().filter_map(|p| p.region().cloned()).collect()
    }
}

/// Builds the parabolic subdivision of `dom f*`.
pub fn build_domain_subdivision(r: &RationalForm, p: &Polytope) -> Result<Subdivision> {
    let conic = gradient_image_conic(r)?;
    let apex = check_positive(r, p)?;
    let mut pieces = Vec::with_capacity(2 * p.len() + 2);
    for i in 0..p.len() {
        if let VertexOutcome::Cone(piece) = vertex_subdifferential(r, p, i)? {
            pieces.push(piece);
        }
        pieces.push(edge_subdifferential(r, p, i, &conic)?);
    }

    // Interior: an arc of the parabola between the extreme values of t.
    let ts: Vec<Scalar> = p
        .vertices()
        .iter()
        .filter(|v| !r.xi2.eval(v).is_zero())
        .map(|v| r.t(v))
        .collect::<Result<_>>()?;
    let t_min = ts.iter().min().cloned().unwrap_or_else(Scalar::zero);
    let t_max = ts.iter().max().cloned().unwrap_or_else(Scalar::zero);
    pieces.push(SubdiffPiece {
        source: PieceSource::Interior,
        shape: PieceShape::Arc(Arc {
            t_from: t_min,
            t_to: t_max,
        }),
        boundary: Vec::new(),
        edge: None,
    });

    if let Some(i) = apex {
        let piece = conjecture_vertex_region(r, p, i, &pieces, &conic)?;
        pieces.push(piece);
    }
    Ok(Subdivision {
        conic,
        curve: GradientCurve::of(r),
        pieces,
        apex,
    })
}

/// Float samples along a boundary curve; rays are cut at `reach`.
pub fn sample_curve(curve: &GradientCurve, b: &BoundaryCurve, n: usize, reach: f64) -> Vec<[f64; 2]> {
    match b {
        BoundaryCurve::Ray(ray) => {
            let o = ray.origin.to_f64();
            let d = ray.direction.to_f64();
            let len = d[0].hypot(d[1]);
            (1..=n)
                .map(|k| {
                    let lam = reach * k as f64 / n as f64 / len;
                    [o[0] + lam * d[0], o[1] + lam * d[1]]
                })
                .collect()
        }
        BoundaryCurve::Arc(arc) => {
            let (t0, t1) = (to_f64(&arc.t_from), to_f64(&arc.t_to));
            (0..n)
                .map(|k| curve.point_f64(t0 + (t1 - t0) * (k as f64 + 0.5) / n as f64))
                .collect()
        }
    }
}

/// Rational point on the open arc, for exact witnesses.
pub fn arc_midpoint(curve: &GradientCurve, arc: &Arc) -> Point {
    curve.point(&((&arc.t_from + &arc.t_to) * ratio(1, 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConstraintForm;
    use crate::symbolic::{decompose_rational, QuadraticPoly};

    pub(crate) fn example2() -> (RationalForm, Polytope) {
        let r = RationalForm::new(
            LinearForm::from_ints(0, 1, 0),
            LinearForm::from_ints(-1, 1, 1),
            LinearForm::zero(),
        )
        .unwrap();
        (r, Polytope::from_ints(&[(1, 1), (1, 0), (0, 0)]).unwrap())
    }

    pub(crate) fn example1() -> (RationalForm, Polytope) {
        let q = QuadraticPoly::from_ints([36, 21, 36, -81, 24, -252]);
        let d = LinearForm::from_ints(-12, 9, 75);
        (
            decompose_rational(&q, &d).unwrap(),
            Polytope::from_ints(&[(-1, 1), (-3, -3), (-4, -3)]).unwrap(),
        )
    }

    fn lin(c1: i64, c2: i64, c0: i64, sense: Sense) -> Constraint {
        Constraint::linear(LinearForm::from_ints(c1, c2, c0), sense)
    }

    fn sorted(mut v: Vec<Constraint>) -> Vec<Constraint> {
        v.sort_by_key(|c| format!("{c:?}"));
        v
    }

    fn index_of(p: &Polytope, x: i64, y: i64) -> usize {
        p.vertices().iter().position(|v| *v == Point::from_ints(x, y)).unwrap()
    }

    #[test]
    fn conic_examples() {
        let (r1, _) = example1();
        assert_eq!(
            gradient_image_conic(&r1).unwrap(),
            ConicForm::from_ints([9, 24, 16, -234, 200, -527])
        );
        let (r2, _) = example2();
        assert_eq!(
            gradient_image_conic(&r2).unwrap(),
            ConicForm::from_ints([1, 2, 1, -4, 0, 0])
        );
        let r3 = RationalForm::new(
            LinearForm::from_ints(1, 0, 0),
            LinearForm::from_ints(0, 1, 0),
            LinearForm::zero(),
        )
        .unwrap();
        assert_eq!(
            gradient_image_conic(&r3).unwrap(),
            ConicForm::from_ints([1, 0, 0, 0, 4, 0])
        );
    }

    #[test]
    fn degenerate_images() {
        // ξ₁ ∝ ξ₂: t constant.
        let r = RationalForm::new(
            LinearForm::from_ints(2, 2, 1),
            LinearForm::from_ints(1, 1, 5),
            LinearForm::zero(),
        )
        .unwrap();
        assert_eq!(gradient_image_conic(&r), Err(Error::DegenerateImage));
        // ξ₁ constant: the image is a half-line.
        let r = RationalForm::new(
            LinearForm::from_ints(0, 0, 3),
            LinearForm::from_ints(1, 2, 5),
            LinearForm::from_ints(1, 0, 0),
        )
        .unwrap();
        assert_eq!(gradient_image_conic(&r), Err(Error::DegenerateImage));
    }

    #[test]
    fn vertex_examples() {
        let (r, p) = example2();
        let piece = match vertex_subdifferential(&r, &p, index_of(&p, 1, 1)).unwrap() {
            VertexOutcome::Cone(pc) => pc,
            VertexOutcome::Apex => panic!("not the apex"),
        };
        let cell = &piece.region().unwrap().cells[0];
        assert_eq!(
            sorted(cell.constraints.clone()),
            sorted(vec![lin(0, 1, -1, Sense::Ge), lin(1, 1, -2, Sense::Ge)])
        );

        let piece = match vertex_subdifferential(&r, &p, index_of(&p, 0, 0)).unwrap() {
            VertexOutcome::Cone(pc) => pc,
            VertexOutcome::Apex => panic!("not the apex"),
        };
        assert_eq!(
            sorted(piece.region().unwrap().cells[0].constraints.clone()),
            sorted(vec![lin(1, 0, 0, Sense::Le), lin(1, 1, 0, Sense::Le)])
        );

        assert_eq!(
            vertex_subdifferential(&r, &p, index_of(&p, 1, 0)).unwrap(),
            VertexOutcome::Apex
        );
    }

    #[test]
    fn pole_at_vertex_rejected() {
        let (r, _) = example2();
        // (2, 1): ξ₂ = 0, ξ₁ = 1.
        let p = Polytope::from_ints(&[(2, 1), (0, 0), (1, 0)]).unwrap();
        let i = index_of(&p, 2, 1);
        assert_eq!(vertex_subdifferential(&r, &p, i), Err(Error::PoleAtVertex(i)));
        assert_eq!(build_domain_subdivision(&r, &p).unwrap_err(), Error::PoleAtVertex(i));
    }

    #[test]
    fn edge_examples() {
        let (r, p) = example2();
        let conic = gradient_image_conic(&r).unwrap();
        // Counterclockwise: (0,0) → (1,0) → (1,1) → (0,0).
        let diag = edge_subdifferential(&r, &p, 2, &conic).unwrap();
        let cells = &diag.region().unwrap().cells;
        assert_eq!(cells.len(), 1);
        assert_eq!(
            sorted(cells[0].constraints.clone()),
            sorted(vec![
                lin(1, 1, 0, Sense::Ge),
                lin(1, 1, -2, Sense::Le),
                Constraint::parabolic(conic.clone(), Sense::Ge),
            ])
        );
        let meta = diag.edge.as_ref().unwrap();
        assert!(meta.axis_parallel);

        let vertical = edge_subdifferential(&r, &p, 1, &conic).unwrap();
        assert_eq!(
            vertical.ray(),
            Some(&Ray {
                origin: Point::from_ints(1, 1),
                direction: Point::from_ints(1, 0)
            })
        );
        let bottom = edge_subdifferential(&r, &p, 0, &conic).unwrap();
        assert_eq!(
            bottom.ray(),
            Some(&Ray {
                origin: Point::from_ints(0, 0),
                direction: Point::from_ints(0, -1)
            })
        );
    }

    #[test]
    fn edge_endpoints_on_parabola_with_parallel_bounds() {
        for (r, p) in [example1(), example2()] {
            let conic = gradient_image_conic(&r).unwrap();
            for i in 0..p.len() {
                let piece = edge_subdifferential(&r, &p, i, &conic).unwrap();
                let Some(meta) = &piece.edge else { continue };
                assert!(conic.eval(&meta.lower).is_zero());
                assert!(conic.eval(&meta.upper).is_zero());
                let e = p.edge(i).direction();
                let strip: Vec<&LinearForm> = piece.region().unwrap().cells[0]
                    .constraints
                    .iter()
                    .filter_map(|c| match &c.form {
                        ConstraintForm::Linear(l) if l.gradient().cross(&e).is_zero() => Some(l),
                        _ => None,
                    })
                    .collect();
                assert_eq!(strip.len(), 2);
                assert!(strip.iter().any(|l| l.eval(&meta.lower).is_zero()));
                assert!(strip.iter().any(|l| l.eval(&meta.upper).is_zero()));
            }
        }
    }

    #[test]
    fn example1_edge_kinds() {
        let (r, p) = example1();
        let conic = gradient_image_conic(&r).unwrap();
        let kinds: Vec<(bool, Option<bool>)> = (0..p.len())
            .map(|i| {
                let pc = edge_subdifferential(&r, &p, i, &conic).unwrap();
                (pc.ray().is_some(), pc.edge.map(|m| m.axis_parallel))
            })
            .collect();
        // One ray edge (on x₂ = −3, through the apex), one axis-parallel
        // edge, one edge with two crossings.
        assert_eq!(kinds.iter().filter(|k| k.0).count(), 1);
        assert_eq!(kinds.iter().filter(|k| k.1 == Some(true)).count(), 1);
        assert_eq!(kinds.iter().filter(|k| k.1 == Some(false)).count(), 1);
    }

    #[test]
    fn apex_region_example2() {
        let (r, p) = example2();
        let sub = build_domain_subdivision(&r, &p).unwrap();
        let apex = sub
            .pieces
            .iter()
            .find(|pc| matches!(pc.source, PieceSource::ApexVertex(_)))
            .unwrap();
        let region = apex.region().unwrap();
        let conic = ConicForm::from_ints([1, 2, 1, -4, 0, 0]);
        let mut cells: Vec<Vec<Constraint>> =
            region.cells.iter().map(|c| sorted(c.constraints.clone())).collect();
        cells.sort_by_key(|c| c.len());
        assert_eq!(
            cells,
            vec![
                sorted(vec![
                    lin(1, -1, 0, Sense::Le),
                    Constraint::parabolic(conic, Sense::Le)
                ]),
                sorted(vec![
                    lin(1, -1, 0, Sense::Ge),
                    lin(0, 1, -1, Sense::Le),
                    lin(1, 0, 0, Sense::Ge)
                ]),
            ]
        );
        // (2, 0) lies in the apex piece only.
        let holders: Vec<PieceSource> = sub
            .areas()
            .filter(|pc| pc.region().unwrap().contains(&Point::from_ints(2, 0)))
            .map(|pc| pc.source)
            .collect();
        assert_eq!(holders, vec![apex.source]);
        assert!(region.is_connected_sampled(64, 1e-9));
    }

    #[test]
    fn subdivisions_cover_without_overlap() {
        for (r, p) in [example1(), example2()] {
            let sub = build_domain_subdivision(&r, &p).unwrap();
            let report = subdivision_check(&sub.regions(), Bounds::square(5.0), 10_000);
            assert_eq!(report.coverage, 1.0, "gap at {:?}", report.first_gap);
            assert_eq!(report.overlaps, 0);
            for pc in sub.areas() {
                let reg = pc.region().unwrap();
                assert!(reg.witnesses_valid());
                assert!(reg.is_connected_sampled(64, 1e-9));
            }
        }
    }

    #[test]
    fn example2_has_four_areas_two_rays_and_an_arc() {
        let (r, p) = example2();
        let sub = build_domain_subdivision(&r, &p).unwrap();
        assert_eq!(sub.areas().count(), 4);
        assert_eq!(sub.pieces.iter().filter(|pc| pc.ray().is_some()).count(), 2);
        let cells: usize = sub.regions().iter().map(|reg| reg.cells.len()).sum();
        assert_eq!(cells, 5);
        assert_eq!(sub.apex, Some(index_of(&p, 1, 0)));
    }

    #[test]
    fn example1_boundary_is_its_parabola() {
        let (r, p) = example1();
        let sub = build_domain_subdivision(&r, &p).unwrap();
        assert_eq!(sub.conic, ConicForm::from_ints([9, 24, 16, -234, 200, -527]));
        assert!(sub.apex.is_none());
        let report = subdivision_check(&sub.regions(), Bounds::square(40.0), 10_000);
        assert_eq!(report.coverage, 1.0, "gap at {:?}", report.first_gap);
        assert_eq!(report.overlaps, 0);
    }
}
