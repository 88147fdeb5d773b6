//! Polygons and their normal cones in the primal plane; constraints,
//! parabolic regions and sampling checks in the dual plane.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::symbolic::{ConicForm, LinearForm, Point, Scalar};

/// Convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    vertices: Vec<Point>,
}

/// Edge from `start` to `end` (counterclockwise); `line` vanishes on the
/// edge and is negative on the rest of the polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub index: usize,
    pub start: Point,
    pub end: Point,
    pub line: LinearForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slope {
    /// `x₂ = m·x₁ + c`
    Finite { m: Scalar, c: Scalar },
    /// `x₁ = d`
    Vertical { d: Scalar },
}

impl Edge {
    /// `end − start`
    pub fn direction(&self) -> Point {
        self.end.sub(&self.start)
    }

    /// Outward normal `∇L`.
    pub fn normal(&self) -> Point {
        self.line.gradient()
    }

    pub fn slope(&self) -> Slope {
        let e = self.direction();
        if e.x.is_zero() {
            Slope::Vertical {
                d: self.start.x.clone(),
            }
        } else {
            let m = &e.y / &e.x;
            let c = &self.start.y - &m * &self.start.x;
            Slope::Finite { m, c }
        }
    }

    /// `start + τ·(end − start)`
    pub fn at(&self, tau: &Scalar) -> Point {
        self.start.add(&self.direction().scale(tau))
    }
}

/// Where a point sits relative to a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Interior,
    Edge(usize),
    Vertex(usize),
    Outside,
}

impl Polytope {
    /// Accepts the boundary in either orientation and stores it
    /// counterclockwise.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Degenerate(format!(
                "{} vertices, need at least 3",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if points[i + 1..].contains(p) {
                return Err(Error::Degenerate(format!("duplicate vertex ({p})")));
            }
        }
        let n = points.len();
        let twice_area: Scalar = (0..n)
            .map(|i| points[i].cross(&points[(i + 1) % n]))
            .sum();
        if twice_area.is_zero() {
            let d = points[1].sub(&points[0]);
            if points.iter().all(|p| p.sub(&points[0]).cross(&d).is_zero()) {
                return Err(Error::Degenerate("collinear vertices".into()));
            }
            return Err(Error::NotConvex("self-intersecting boundary".into()));
        }
        let mut vertices = points;
        if twice_area.is_negative() {
            vertices.reverse();
        }
        let dirs: Vec<Point> = (0..n)
            .map(|i| vertices[(i + 1) % n].sub(&vertices[i]))
            .collect();
        for i in 0..n {
            let turn = dirs[i].cross(&dirs[(i + 1) % n]);
            if !turn.is_positive() {
                let what = if turn.is_zero() { "collinear" } else { "reflex" };
                return Err(Error::NotConvex(format!(
                    "{what} turn at ({})",
                    vertices[(i + 1) % n]
                )));
            }
        }
        // All left turns; the edge directions must wind around exactly once.
        let upper = |d: &Point| d.y.is_positive() || (d.y.is_zero() && d.x.is_positive());
        let wraps = (0..n)
            .filter(|&i| !upper(&dirs[i]) && upper(&dirs[(i + 1) % n]))
            .count();
        if wraps != 1 {
            return Err(Error::NotConvex("boundary winds more than once".into()));
        }
        Ok(Polytope { vertices })
    }

    pub fn from_ints(points: &[(i64, i64)]) -> Result<Self> {
        Polytope::new(points.iter().map(|&(x, y)| Point::from_ints(x, y)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i % self.len()]
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> Edge {
        let n = self.len();
        let start = self.vertices[i % n].clone();
        let end = self.vertices[(i + 1) % n].clone();
        let e = end.sub(&start);
        // Right-hand normal of a counterclockwise edge points outward.
        let normal = Point::new(e.y.clone(), -e.x.clone());
        Edge {
            index: i % n,
            line: LinearForm::through(&normal, &start),
            start,
            end,
        }
    }

    pub fn edges(&self) -> Vec<Edge> {
        (0..self.len()).map(|i| self.edge(i)).collect()
    }

    /// Index of the edge ending at vertex `i`.
    pub fn incoming_edge(&self, i: usize) -> usize {
        (i + self.len() - 1) % self.len()
    }

    pub fn locate(&self, x: &Point) -> Location {
        let mut on_edge = None;
        for edge in self.edges() {
            let v = edge.line.eval(x);
            if v.is_positive() {
                return Location::Outside;
            }
            if v.is_zero() {
                if let Some(i) = on_edge {
                    // On two edge lines: the shared vertex.
                    return Location::Vertex(if i + 1 == edge.index { edge.index } else { i });
                }
                on_edge = Some(edge.index);
            }
        }
        match on_edge {
            Some(i) => Location::Edge(i),
            None => Location::Interior,
        }
    }

    pub fn contains_f64(&self, x: [f64; 2], tol: f64) -> bool {
        FloatPolygon::new(self).contains(x, tol)
    }

    /// Lower-left and upper-right corners.
    pub fn bounding_box(&self) -> Bounds {
        let pts: Vec<[f64; 2]> = self.vertices.iter().map(|v| v.to_f64()).collect();
        let mut b = Bounds::new([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts {
            for k in 0..2 {
                b.min[k] = b.min[k].min(p[k]);
                b.max[k] = b.max[k].max(p[k]);
            }
        }
        b
    }
}

/// `build_polytope`: validated counterclockwise polygon.
pub fn build_polytope(points: Vec<Point>) -> Result<Polytope> {
    Polytope::new(points)
}

/// Floating-point copy of a polygon for repeated membership and
/// projection queries.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatPolygon {
    pub vertices: Vec<[f64; 2]>,
    /// Unit outward normal `n` and offset `c` of each edge: `n·x ≤ c` inside.
    lines: Vec<([f64; 2], f64)>,
}

impl FloatPolygon {
    pub fn new(p: &Polytope) -> Self {
        let vertices: Vec<[f64; 2]> = p.vertices().iter().map(|v| v.to_f64()).collect();
        let lines = (0..vertices.len())
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % vertices.len()];
                let n = [b[1] - a[1], a[0] - b[0]];
                let len = n[0].hypot(n[1]);
                let n = [n[0] / len, n[1] / len];
                (n, n[0] * a[0] + n[1] * a[1])
            })
            .collect();
        FloatPolygon { vertices, lines }
    }

    pub fn contains(&self, x: [f64; 2], tol: f64) -> bool {
        self.lines.iter().all(|(n, c)| n[0] * x[0] + n[1] * x[1] - c <= tol)
    }

    /// Nearest point of the polygon.
    pub fn project(&self, x: [f64; 2]) -> [f64; 2] {
        if self.contains(x, 0.0) {
            return x;
        }
        let k = self.vertices.len();
        let mut best = (f64::INFINITY, x);
        for i in 0..k {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % k];
            let d = [b[0] - a[0], b[1] - a[1]];
            let u = (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            let q = [a[0] + u * d[0], a[1] + u * d[1]];
            let dist = (x[0] - q[0]).hypot(x[1] - q[1]);
            if dist < best.0 {
                best = (dist, q);
            }
        }
        best.1
    }
}

/// `apex + cone(generators)`; no generators means the single point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub apex: Point,
    pub generators: Vec<Point>,
}

impl Cone {
    pub fn translate(&self, by: &Point) -> Cone {
        Cone {
            apex: self.apex.add(by),
            generators: self.generators.clone(),
        }
    }

    pub fn contains(&self, s: &Point) -> bool {
        let d = s.sub(&self.apex);
        match self.generators.as_slice() {
            [] => d.is_zero(),
            [g] => d.is_zero() || g.same_direction(&d),
            [g1, g2] => {
                // d = α g1 + β g2 with α, β ≥ 0.
                let det = g1.cross(g2);
                let alpha = d.cross(g2) / &det;
                let beta = g1.cross(&d) / &det;
                !alpha.is_negative() && !beta.is_negative()
            }
            _ => unreachable!("planar cones have at most two generators"),
        }
    }

    /// Halfplane description of a two-generator cone; each constraint
    /// vanishes on the ray of one generator.
    pub fn constraints(&self) -> Vec<Constraint> {
        let [g1, g2] = match self.generators.as_slice() {
            [g1, g2] => [g1, g2],
            _ => return Vec::new(),
        };
        let inside = self.apex.add(g1).add(g2);
        [g1, g2]
            .into_iter()
            .map(|g| {
                let normal = Point::new(g.y.clone(), -g.x.clone());
                Constraint::linear_containing(LinearForm::through(&normal, &self.apex), &inside)
            })
            .collect()
    }
}

/// Normal cone `N_P(x)` with apex at the origin.
pub fn normal_cone(p: &Polytope, x: &Point) -> Result<Cone> {
    let generators = match p.locate(x) {
        Location::Outside => return Err(Error::OutsidePolytope(x.to_string())),
        Location::Interior => Vec::new(),
        Location::Edge(i) => vec![p.edge(i).normal()],
        Location::Vertex(i) => vec![p.edge(p.incoming_edge(i)).normal(), p.edge(i).normal()],
    };
    Ok(Cone {
        apex: Point::zero(),
        generators,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `form ≤ 0`
    Le,
    /// `form ≥ 0`
    Ge,
}

impl Sense {
    fn flip(self) -> Sense {
        match self {
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintForm {
    Linear(LinearForm),
    Conic(ConicForm),
}

/// Sign condition on a linear or parabolic form, stored canonically
/// (coprime integer coefficients, first nonzero coefficient positive).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub form: ConstraintForm,
    pub sense: Sense,
}

impl Constraint {
    pub fn linear(form: LinearForm, sense: Sense) -> Self {
        let (form, flipped) = form.canonical();
        Constraint {
            form: ConstraintForm::Linear(form),
            sense: if flipped { sense.flip() } else { sense },
        }
    }

    /// Panics unless the conic is a parabola.
    pub fn parabolic(form: ConicForm, sense: Sense) -> Self {
        assert!(form.is_parabolic(), "parabolic constraint needs a zero discriminant");
        let (form, flipped) = form.canonical();
        Constraint {
            form: ConstraintForm::Conic(form),
            sense: if flipped { sense.flip() } else { sense },
        }
    }

    /// The halfplane bounded by `form = 0` that contains `inside`.
    pub fn linear_containing(form: LinearForm, inside: &Point) -> Self {
        let sense = if form.eval(inside).is_negative() {
            Sense::Le
        } else {
            Sense::Ge
        };
        Constraint::linear(form, sense)
    }

    /// The reversed halfplane or conic side; shares the boundary.
    pub fn reversed(&self) -> Self {
        Constraint {
            form: self.form.clone(),
            sense: self.sense.flip(),
        }
    }

    fn raw_exact(&self, s: &Point) -> Scalar {
        match &self.form {
            ConstraintForm::Linear(l) => l.eval(s),
            ConstraintForm::Conic(c) => c.eval(s),
        }
    }

    pub fn holds(&self, s: &Point) -> bool {
        let v = self.raw_exact(s);
        match self.sense {
            Sense::Le => !v.is_positive(),
            Sense::Ge => !v.is_negative(),
        }
    }

    /// Approximate signed distance to the boundary, positive inside.
    pub fn margin_f64(&self, s: [f64; 2]) -> f64 {
        let (value, scale) = match &self.form {
            ConstraintForm::Linear(l) => {
                let g = l.gradient().to_f64();
                (l.eval_f64(s), g[0].hypot(g[1]))
            }
            ConstraintForm::Conic(c) => {
                let g = c.gradient_f64(s);
                let floor = c.coefficients_f64().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                (c.eval_f64(s), g[0].hypot(g[1]).max(floor * 1e-3))
            }
        };
        let v = value / scale;
        match self.sense {
            Sense::Le => -v,
            Sense::Ge => v,
        }
    }
}

/// Conjunction of constraints with an exact interior witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub constraints: Vec<Constraint>,
    pub witness: Point,
}

impl Cell {
    pub fn new(constraints: Vec<Constraint>, witness: Point) -> Self {
        let cell = Cell {
            constraints,
            witness,
        };
        debug_assert!(cell.contains(&cell.witness), "witness outside its cell");
        cell
    }

    pub fn contains(&self, s: &Point) -> bool {
        self.constraints.iter().all(|c| c.holds(s))
    }

    pub fn margin_f64(&self, s: [f64; 2]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.margin_f64(s))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Finite union of cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub cells: Vec<Cell>,
}

impl Region {
    pub fn new(cells: Vec<Cell>) -> Self {
        Region { cells }
    }

    pub fn single(constraints: Vec<Constraint>, witness: Point) -> Self {
        Region::new(vec![Cell::new(constraints, witness)])
    }

    pub fn whole_plane() -> Self {
        Region::single(Vec::new(), Point::zero())
    }

    pub fn contains(&self, s: &Point) -> bool {
        self.cells.iter().any(|c| c.contains(s))
    }

    /// Largest cell margin; `≥ −tol` means contained, `> tol` interior.
    pub fn margin_f64(&self, s: [f64; 2]) -> f64 {
        self.cells
            .iter()
            .map(|c| c.margin_f64(s))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains_f64(&self, s: [f64; 2], tol: f64) -> bool {
        self.margin_f64(s) >= -tol
    }

    pub fn witness(&self) -> &Point {
        &self.cells[0].witness
    }

    /// Every stored witness lies in its cell (exact check).
    pub fn witnesses_valid(&self) -> bool {
        !self.cells.is_empty() && self.cells.iter().all(|c| c.contains(&c.witness))
    }

    /// Cells are joined when the segment between their witnesses stays in
    /// the region at `samples` points; connected when all cells join up.
    pub fn is_connected_sampled(&self, samples: usize, tol: f64) -> bool {
        let n = self.cells.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], i: usize) -> usize {
            let mut i = i;
            while parent[i] != i {
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                let a = self.cells[i].witness.to_f64();
                let b = self.cells[j].witness.to_f64();
                let joined = (0..=samples).all(|k| {
                    let u = k as f64 / samples as f64;
                    self.contains_f64([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])], tol)
                });
                if joined {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let r0 = root(&mut parent, 0);
        (0..n).all(|i| root(&mut parent, i) == r0)
    }
}

pub fn region_contains(region: &Region, s: [f64; 2], tol: f64) -> bool {
    region.contains_f64(s, tol)
}

/// Axis-aligned box `[min₀, max₀] × [min₁, max₁]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Bounds { min, max }
    }

    pub fn square(half: f64) -> Self {
        Bounds::new([-half, -half], [half, half])
    }

    pub fn include(&mut self, p: [f64; 2]) {
        for k in 0..2 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    /// Grows each side by `frac` of the larger extent, at least `floor`.
    pub fn expanded(&self, frac: f64, floor: f64) -> Self {
        let w = (self.max[0] - self.min[0]).max(self.max[1] - self.min[1]);
        let m = (w * frac).max(floor);
        Bounds::new(
            [self.min[0] - m, self.min[1] - m],
            [self.max[0] + m, self.max[1] + m],
        )
    }

    pub fn sample(&self, rng: &mut impl Rng) -> [f64; 2] {
        [
            rng.gen_range(self.min[0]..=self.max[0]),
            rng.gen_range(self.min[1]..=self.max[1]),
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubdivisionReport {
    pub samples: usize,
    pub covered: usize,
    pub coverage: f64,
    /// Points strictly inside two distinct regions.
    pub overlaps: usize,
    pub first_gap: Option<[f64; 2]>,
}

/// Membership tolerance used by the sampling checks.
pub const SAMPLE_TOL: f64 = 1e-9;

/// Samples `n_samples` uniform points of `bounds` (fixed seed) and reports
/// coverage by the regions and strict pairwise overlaps.
pub fn subdivision_check(regions: &[Region], bounds: Bounds, n_samples: usize) -> SubdivisionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1f5);
    let points: Vec<[f64; 2]> = (0..n_samples).map(|_| bounds.sample(&mut rng)).collect();
    let verdicts: Vec<(bool, bool)> = points
        .par_iter()
        .map(|&s| {
            let margins: Vec<f64> = regions.iter().map(|r| r.margin_f64(s)).collect();
            let covered = margins.iter().any(|&m| m >= -SAMPLE_TOL);
            let strict = margins.iter().filter(|&&m| m > SAMPLE_TOL).count();
            (covered, strict > 1)
        })
        .collect();
    let covered = verdicts.iter().filter(|v| v.0).count();
    let overlaps = verdicts.iter().filter(|v| v.1).count();
    let first_gap = points
        .iter()
        .zip(&verdicts)
        .find(|(_, v)| !v.0)
        .map(|(p, _)| *p);
    SubdivisionReport {
        samples: n_samples,
        covered,
        coverage: if n_samples == 0 {
            1.0
        } else {
            covered as f64 / n_samples as f64
        },
        overlaps,
        first_gap,
    }
}
