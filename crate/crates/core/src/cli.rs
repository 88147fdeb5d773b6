//! Command-line front end: problem files, JSON results and plot data.
//!
//! Exit codes: 0 success, 1 input error, 2 unsupported degeneracy,
//! 3 verification failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::conjugate::{conjugate_from_subdivision, ConjugateExpr, ConjugatePiece, PiecewiseConjugate};
use crate::error::Error;
use crate::geometry::{Cell, Constraint, ConstraintForm, Polytope, Region, Sense};
use crate::oracle::{verify_conjugate, VerifyConfig};
use crate::subdiff::{
    build_domain_subdivision, Arc, BoundaryCurve, EdgeMeta, GradientCurve, PieceShape, PieceSource,
    Ray, SubdiffPiece, Subdivision,
};
use crate::symbolic::{
    decompose_rational, format_scalar, parse_scalar, to_f64, ConicForm, FractionalExpr, LinearForm,
    Point, QuadraticExpr, QuadraticPoly, RationalForm, Scalar,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ratconj", version, about = "Exact conjugates of rational forms over convex polygons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parabolic subdivision of the domain of the conjugate.
    Subdivision {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Closed-form conjugate on every piece.
    Conjugate {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Checks a conjugate against the brute-force oracle.
    Verify {
        input: PathBuf,
        /// Oracle grid samples per axis.
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Oracle refinement rounds.
        #[arg(long, default_value_t = 30)]
        refine: usize,
        /// Random dual points for the oracle and Fenchel–Young checks.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Verify this conjugate file instead of recomputing it.
        #[arg(long)]
        conjugate: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// CSV files for plotting the conjugate and its subdivision.
    PlotData {
        input: PathBuf,
        /// `s1_min,s1_max,s2_min,s2_max`
        #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
        bounds: [f64; 4],
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn parse_box(text: &str) -> Result<[f64; 4], String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [a, b, c, d] if a < b && c < d => Ok([*a, *b, *c, *d]),
        [_, _, _, _] => Err("box needs x0 < x1 and y0 < y1".into()),
        _ => Err("box needs four comma-separated numbers".into()),
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_unsupported() => EXIT_UNSUPPORTED,
            Error::EliminationFailed(_) => EXIT_UNSUPPORTED,
            Error::BranchSelectionFailed(_) | Error::CoverageGap(_) | Error::NoRegion(..) => EXIT_VERIFY,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// Problem files

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalInput {
    Decomposed {
        xi1: [Value; 3],
        xi2: [Value; 3],
        #[serde(default)]
        xi0: Option<[Value; 3]>,
    },
    Raw {
        numerator: [Value; 6],
        denominator: [Value; 3],
    },
}

#[derive(Deserialize)]
struct ProblemInput {
    rational: RationalInput,
    polytope: Vec<[Value; 2]>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub r: RationalForm,
    pub p: Polytope,
}

fn number(v: &Value) -> CliResult<Scalar> {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            parse_scalar(&n.to_string()).map_err(|e| CliError::input(e.to_string()))
        }
        Value::String(s) => parse_scalar(s).map_err(|e| CliError::input(e.to_string())),
        other => Err(CliError::input(format!(
            "expected an integer or a \"p/q\" string, got {other}"
        ))),
    }
}

fn linear(values: &[Value; 3]) -> CliResult<LinearForm> {
    Ok(LinearForm::new(number(&values[0])?, number(&values[1])?, number(&values[2])?))
}

/// Parses a problem file.
///
/// `rational` is either `{xi1, xi2, xi0}` with coefficient triples
/// `[c1, c2, c0]` meaning `c1·x1 + c2·x2 + c0`, or `{numerator, denominator}`
/// with the numerator's coefficients of `x1², x1x2, x2², x1, x2, 1`.
pub fn parse_problem(text: &str) -> CliResult<Problem> {
    let input: ProblemInput =
        serde_json::from_str(text).map_err(|e| CliError::input(format!("problem file: {e}")))?;
    let r = match &input.rational {
        RationalInput::Decomposed { xi1, xi2, xi0 } => {
            let xi0 = match xi0 {
                Some(v) => linear(v)?,
                None => LinearForm::zero(),
            };
            RationalForm::new(linear(xi1)?, linear(xi2)?, xi0)?
        }
        RationalInput::Raw {
            numerator,
            denominator,
        } => {
            let mut q = Vec::with_capacity(6);
            for v in numerator {
                q.push(number(v)?);
            }
            let q: [Scalar; 6] = q.try_into().expect("six coefficients");
            decompose_rational(&QuadraticPoly(q), &linear(denominator)?)?
        }
    };
    let points = input
        .polytope
        .iter()
        .map(|[x, y]| Ok(Point::new(number(x)?, number(y)?)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Problem {
        r,
        p: Polytope::new(points)?,
    })
}

pub fn load_problem(path: &Path) -> CliResult<Problem> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

// ---------------------------------------------------------------------------
// JSON documents

fn s(v: &Scalar) -> String {
    format_scalar(v)
}

fn pt(p: &Point) -> [String; 2] {
    [s(&p.x), s(&p.y)]
}

fn parse_pt(p: &[String; 2]) -> CliResult<Point> {
    Ok(Point::new(scalar(&p[0])?, scalar(&p[1])?))
}

fn scalar(text: &str) -> CliResult<Scalar> {
    parse_scalar(text).map_err(|e| CliError::input(e.to_string()))
}

fn scalars<const N: usize>(v: &[String]) -> CliResult<[Scalar; N]> {
    if v.len() != N {
        return Err(CliError::input(format!("expected {N} coefficients, got {}", v.len())));
    }
    let out = v.iter().map(|t| scalar(t)).collect::<CliResult<Vec<_>>>()?;
    Ok(out.try_into().expect("length checked"))
}

fn integer_json(v: &Scalar) -> Value {
    match v.is_integer().then(|| v.to_integer().to_i64()).flatten() {
        Some(i) => Value::from(i),
        None => Value::from(s(v)),
    }
}

fn conic_json(c: &ConicForm) -> Vec<Value> {
    c.coefficients().iter().map(integer_json).collect()
}

fn parse_conic(values: &[Value]) -> CliResult<ConicForm> {
    let v = values.iter().map(number).collect::<CliResult<Vec<_>>>()?;
    let arr: [Scalar; 6] = v
        .try_into()
        .map_err(|_| CliError::input("conic needs six coefficients"))?;
    Ok(ConicForm::new(arr))
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConstraintDoc {
    /// `linear` or `conic`
    pub form: String,
    pub coefficients: Vec<String>,
    /// `<=` or `>=`, comparing the form with zero.
    pub sense: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CellDoc {
    pub constraints: Vec<ConstraintDoc>,
    pub witness: [String; 2],
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveDoc {
    Ray { origin: [String; 2], direction: [String; 2] },
    Arc { t_from: String, t_to: String },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeDoc {
    Area { cells: Vec<CellDoc> },
    Ray { origin: [String; 2], direction: [String; 2] },
    Arc { t_from: String, t_to: String },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EdgeDoc {
    pub lower: [String; 2],
    pub t_lower: String,
    pub upper: [String; 2],
    pub t_upper: String,
    pub normal: [String; 2],
    pub conic_sense: String,
    pub axis_parallel: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PieceDoc {
    pub id: usize,
    pub source: String,
    pub shape: ShapeDoc,
    pub boundary: Vec<CurveDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<EdgeDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CurveCoefficients {
    pub a: [String; 2],
    pub b: [String; 2],
    pub c: [String; 2],
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SubdivisionDoc {
    pub conic: Vec<Value>,
    pub curve: CurveCoefficients,
    pub apex_vertex: Option<usize>,
    pub pieces: Vec<PieceDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FractionalDoc {
    pub num: Vec<String>,
    pub scale: String,
    pub rad: Vec<String>,
    pub affine: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExprDoc {
    Linear { coefficients: Vec<String> },
    Quadratic { coefficients: Vec<String> },
    Fractional { coefficients: FractionalDoc },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConjugatePieceDoc {
    pub id: usize,
    pub source: String,
    #[serde(flatten)]
    pub expr: ExprDoc,
    pub region: Vec<CellDoc>,
    pub boundary: Vec<CurveDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConjugateDoc {
    pub conic: Vec<Value>,
    pub curve: CurveCoefficients,
    pub pieces: Vec<ConjugatePieceDoc>,
    /// Rays and the interior arc, which carry no expression.
    pub absorbed: Vec<PieceDoc>,
}

fn constraint_doc(c: &Constraint) -> ConstraintDoc {
    let (form, coefficients) = match &c.form {
        ConstraintForm::Linear(l) => ("linear", l.coefficients().iter().map(s).collect()),
        ConstraintForm::Conic(q) => ("conic", q.coefficients().iter().map(s).collect()),
    };
    ConstraintDoc {
        form: form.into(),
        coefficients,
        sense: c.sense.as_str().into(),
    }
}

fn parse_sense(text: &str) -> CliResult<Sense> {
    match text {
        "<=" => Ok(Sense::Le),
        ">=" => Ok(Sense::Ge),
        other => Err(CliError::input(format!("unknown sense {other:?}"))),
    }
}

fn parse_constraint(d: &ConstraintDoc) -> CliResult<Constraint> {
    let sense = parse_sense(&d.sense)?;
    match d.form.as_str() {
        "linear" => {
            let [c1, c2, c0] = scalars::<3>(&d.coefficients)?;
            Ok(Constraint::linear(LinearForm::new(c1, c2, c0), sense))
        }
        "conic" => {
            let conic = ConicForm::new(scalars::<6>(&d.coefficients)?);
            if !conic.is_parabolic() {
                return Err(CliError::input("conic constraint is not a parabola"));
            }
            Ok(Constraint::parabolic(conic, sense))
        }
        other => Err(CliError::input(format!("unknown constraint form {other:?}"))),
    }
}

fn cells_doc(r: &Region) -> Vec<CellDoc> {
    r.cells
        .iter()
        .map(|c| CellDoc {
            constraints: c.constraints.iter().map(constraint_doc).collect(),
            witness: pt(&c.witness),
        })
        .collect()
}

fn parse_region(cells: &[CellDoc]) -> CliResult<Region> {
    let cells = cells
        .iter()
        .map(|c| {
            let cell = Cell {
                constraints: c.constraints.iter().map(parse_constraint).collect::<CliResult<_>>()?,
                witness: parse_pt(&c.witness)?,
            };
            if !cell.contains(&cell.witness) {
                return Err(CliError::input("cell witness violates its constraints"));
            }
            Ok(cell)
        })
        .collect::<CliResult<Vec<_>>>()?;
    if cells.is_empty() {
        return Err(CliError::input("region without cells"));
    }
    Ok(Region::new(cells))
}

fn curve_doc(b: &BoundaryCurve) -> CurveDoc {
    match b {
        BoundaryCurve::Ray(r) => CurveDoc::Ray {
            origin: pt(&r.origin),
            direction: pt(&r.direction),
        },
        BoundaryCurve::Arc(a) => CurveDoc::Arc {
            t_from: s(&a.t_from),
            t_to: s(&a.t_to),
        },
    }
}

fn parse_curve(d: &CurveDoc) -> CliResult<BoundaryCurve> {
    Ok(match d {
        CurveDoc::Ray { origin, direction } => BoundaryCurve::Ray(Ray {
            origin: parse_pt(origin)?,
            direction: parse_pt(direction)?,
        }),
        CurveDoc::Arc { t_from, t_to } => BoundaryCurve::Arc(Arc {
            t_from: scalar(t_from)?,
            t_to: scalar(t_to)?,
        }),
    })
}

fn parse_source(label: &str) -> CliResult<PieceSource> {
    let bad = || CliError::input(format!("unknown piece source {label:?}"));
    if label == "interior" {
        return Ok(PieceSource::Interior);
    }
    let (kind, index) = label.rsplit_once(' ').ok_or_else(bad)?;
    let i: usize = index.parse().map_err(|_| bad())?;
    match kind {
        "vertex" => Ok(PieceSource::Vertex(i)),
        "edge" => Ok(PieceSource::Edge(i)),
        "apex vertex" => Ok(PieceSource::ApexVertex(i)),
        _ => Err(bad()),
    }
}

fn edge_doc(m: &EdgeMeta) -> EdgeDoc {
    EdgeDoc {
        lower: pt(&m.lower),
        t_lower: s(&m.t_lower),
        upper: pt(&m.upper),
        t_upper: s(&m.t_upper),
        normal: pt(&m.normal),
        conic_sense: m.conic_sense.as_str().into(),
        axis_parallel: m.axis_parallel,
    }
}

fn parse_edge(d: &EdgeDoc) -> CliResult<EdgeMeta> {
    Ok(EdgeMeta {
        lower: parse_pt(&d.lower)?,
        t_lower: scalar(&d.t_lower)?,
        upper: parse_pt(&d.upper)?,
        t_upper: scalar(&d.t_upper)?,
        normal: parse_pt(&d.normal)?,
        conic_sense: parse_sense(&d.conic_sense)?,
        axis_parallel: d.axis_parallel,
    })
}

fn piece_doc(id: usize, p: &SubdiffPiece) -> PieceDoc {
    let shape = match &p.shape {
        PieceShape::Area(r) => ShapeDoc::Area { cells: cells_doc(r) },
        PieceShape::Ray(r) => ShapeDoc::Ray {
            origin: pt(&r.origin),
            direction: pt(&r.direction),
        },
        PieceShape::Arc(a) => ShapeDoc::Arc {
            t_from: s(&a.t_from),
            t_to: s(&a.t_to),
        },
    };
    PieceDoc {
        id,
        source: p.source.label(),
        shape,
        boundary: p.boundary.iter().map(curve_doc).collect(),
        edge: p.edge.as_ref().map(edge_doc),
    }
}

fn parse_piece(d: &PieceDoc) -> CliResult<SubdiffPiece> {
    let shape = match &d.shape {
        ShapeDoc::Area { cells } => PieceShape::Area(parse_region(cells)?),
        ShapeDoc::Ray { origin, direction } => PieceShape::Ray(Ray {
            origin: parse_pt(origin)?,
            direction: parse_pt(direction)?,
        }),
        ShapeDoc::Arc { t_from, t_to } => PieceShape::Arc(Arc {
            t_from: scalar(t_from)?,
            t_to: scalar(t_to)?,
        }),
    };
    Ok(SubdiffPiece {
        source: parse_source(&d.source)?,
        shape,
        boundary: d.boundary.iter().map(parse_curve).collect::<CliResult<_>>()?,
        edge: d.edge.as_ref().map(parse_edge).transpose()?,
    })
}

fn curve_coefficients(c: &GradientCurve) -> CurveCoefficients {
    CurveCoefficients {
        a: pt(&c.a),
        b: pt(&c.b),
        c: pt(&c.c),
    }
}

fn parse_curve_coefficients(c: &CurveCoefficients) -> CliResult<GradientCurve> {
    Ok(GradientCurve {
        a: parse_pt(&c.a)?,
        b: parse_pt(&c.b)?,
        c: parse_pt(&c.c)?,
    })
}

pub fn subdivision_doc(sub: &Subdivision) -> SubdivisionDoc {
    SubdivisionDoc {
        conic: conic_json(&sub.conic),
        curve: curve_coefficients(&sub.curve),
        apex_vertex: sub.apex,
        pieces: sub.pieces.iter().enumerate().map(|(i, p)| piece_doc(i, p)).collect(),
    }
}

fn strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(s).collect()
}

fn expr_doc(e: &ConjugateExpr) -> ExprDoc {
    match e {
        ConjugateExpr::Linear(l) => ExprDoc::Linear {
            coefficients: strings(&l.coefficients()),
        },
        ConjugateExpr::Quadratic(q) => ExprDoc::Quadratic {
            coefficients: strings(&q.coefficients()),
        },
        ConjugateExpr::Fractional(f) => ExprDoc::Fractional {
            coefficients: FractionalDoc {
                num: strings(&f.num.coefficients()),
                scale: s(&f.scale),
                rad: strings(&f.rad.coefficients()),
                affine: strings(&f.affine.coefficients()),
            },
        },
    }
}

fn parse_linear(v: &[String]) -> CliResult<LinearForm> {
    let [c1, c2, c0] = scalars::<3>(v)?;
    Ok(LinearForm::new(c1, c2, c0))
}

fn parse_expr(d: &ExprDoc) -> CliResult<ConjugateExpr> {
    Ok(match d {
        ExprDoc::Linear { coefficients } => ConjugateExpr::Linear(parse_linear(coefficients)?),
        ExprDoc::Quadratic { coefficients } => {
            ConjugateExpr::Quadratic(QuadraticExpr::new(scalars::<6>(coefficients)?))
        }
        ExprDoc::Fractional { coefficients: f } => ConjugateExpr::Fractional(FractionalExpr {
            num: parse_linear(&f.num)?,
            scale: scalar(&f.scale)?,
            rad: parse_linear(&f.rad)?,
            affine: parse_linear(&f.affine)?,
        }),
    })
}

pub fn conjugate_doc(f: &PiecewiseConjugate) -> ConjugateDoc {
    ConjugateDoc {
        conic: conic_json(&f.conic),
        curve: curve_coefficients(&f.curve),
        pieces: f
            .pieces
            .iter()
            .enumerate()
            .map(|(id, p)| ConjugatePieceDoc {
                id,
                source: p.source.label(),
                expr: expr_doc(&p.expr),
                region: cells_doc(&p.region),
                boundary: p.boundary.iter().map(curve_doc).collect(),
            })
            .collect(),
        absorbed: f.absorbed.iter().enumerate().map(|(i, p)| piece_doc(i, p)).collect(),
    }
}

/// Rebuilds a conjugate from its JSON document.
pub fn parse_conjugate_doc(d: &ConjugateDoc) -> CliResult<PiecewiseConjugate> {
    let pieces = d
        .pieces
        .iter()
        .map(|p| {
            Ok(ConjugatePiece {
                region: parse_region(&p.region)?,
                expr: parse_expr(&p.expr)?,
                source: parse_source(&p.source)?,
                boundary: p.boundary.iter().map(parse_curve).collect::<CliResult<_>>()?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(PiecewiseConjugate {
        pieces,
        conic: parse_conic(&d.conic)?,
        curve: parse_curve_coefficients(&d.curve)?,
        absorbed: d.absorbed.iter().map(parse_piece).collect::<CliResult<_>>()?,
    })
}

pub fn read_conjugate(path: &Path) -> CliResult<PiecewiseConjugate> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let doc: ConjugateDoc =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("conjugate file: {e}")))?;
    parse_conjugate_doc(&doc)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("documents serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Commands

pub fn cmd_subdivision(input: &Path, output: &Path) -> CliResult<i32> {
    let problem = load_problem(input)?;
    let sub = build_domain_subdivision(&problem.r, &problem.p)?;
    write_json(output, &subdivision_doc(&sub))?;
    Ok(EXIT_OK)
}

pub fn cmd_conjugate(input: &Path, output: &Path) -> CliResult<i32> {
    let problem = load_problem(input)?;
    let sub = build_domain_subdivision(&problem.r, &problem.p)?;
    let f = conjugate_from_subdivision(&problem.r, &problem.p, &sub)?;
    write_json(output, &conjugate_doc(&f))?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(
    input: &Path,
    cfg: &VerifyConfig,
    conjugate_file: Option<&Path>,
    output: &Path,
) -> CliResult<i32> {
    cfg.oracle.validate()?;
    let problem = load_problem(input)?;
    let f = match conjugate_file {
        Some(path) => read_conjugate(path)?,
        None => {
            let sub = build_domain_subdivision(&problem.r, &problem.p)?;
            conjugate_from_subdivision(&problem.r, &problem.p, &sub)?
        }
    };
    let report = match verify_conjugate(&f, &problem.r, &problem.p, cfg) {
        Ok(report) => report,
        Err(Error::NoRegion(x, y)) => {
            write_json(output, &serde_json::json!({ "passed": false, "no_region": [x, y] }))?;
            return Ok(EXIT_VERIFY);
        }
        Err(e) => return Err(e.into()),
    };
    write_json(output, &report)?;
    println!(
        "{} oracle gap {:.3e}, Fenchel-Young {:.3e}, convexity {:.3e}, continuity {:.3e}, coverage {}",
        if report.passed { "PASS" } else { "FAIL" },
        report.oracle_max_gap,
        report.fy_max_violation,
        report.convexity_max_violation,
        report.continuity_max_gap,
        report.coverage
    );
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("csv: {e}"))
}

/// Points of a boundary curve from its start, rays cut at `reach`.
fn polyline(curve: &GradientCurve, b: &BoundaryCurve, n: usize, reach: f64) -> Vec<[f64; 2]> {
    match b {
        BoundaryCurve::Ray(ray) => {
            let o = ray.origin.to_f64();
            let d = ray.direction.to_f64();
            let len = d[0].hypot(d[1]);
            (0..n)
                .map(|k| {
                    let lam = reach * k as f64 / (n - 1) as f64 / len;
                    [o[0] + lam * d[0], o[1] + lam * d[1]]
                })
                .collect()
        }
        BoundaryCurve::Arc(arc) => {
            let (t0, t1) = (to_f64(&arc.t_from), to_f64(&arc.t_to));
            (0..n)
                .map(|k| curve.point_f64(t0 + (t1 - t0) * k as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

/// Parameter range of the gradient curve large enough to cross a disc of
/// radius `radius` about the origin.
fn curve_parameter_range(curve: &GradientCurve, radius: f64) -> f64 {
    let norm = |p: &Point| {
        let v = p.to_f64();
        v[0].hypot(v[1])
    };
    let (a, b, c) = (norm(&curve.a), norm(&curve.b), norm(&curve.c));
    if b == 0.0 {
        return (radius + c) / (2.0 * a).max(f64::MIN_POSITIVE);
    }
    (a + (a * a + b * (c + radius)).sqrt()) / b
}

/// Writes `grid.csv`, `boundaries.csv` and `conic.csv` into `dir`.
pub fn write_plot_data(f: &PiecewiseConjugate, bounds: [f64; 4], n: usize, dir: &Path) -> CliResult<()> {
    if n < 2 {
        return Err(CliError::input("plot-data needs n >= 2"));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let [x0, x1, y0, y1] = bounds;

    let mut grid = csv_writer(&dir.join("grid.csv"))?;
    grid.write_record(["s1", "s2", "fstar", "piece"]).map_err(csv_err)?;
    for i in 0..n {
        for j in 0..n {
            let s1 = x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
            let s2 = y0 + (y1 - y0) * j as f64 / (n - 1) as f64;
            let k = f.locate([s1, s2]).ok_or(Error::NoRegion(s1, s2))?;
            let v = f.pieces[k].expr.eval_f64([s1, s2]);
            grid.serialize((s1, s2, v, k)).map_err(csv_err)?;
        }
    }
    grid.flush().map_err(csv_err)?;

    let radius = x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()));
    let reach = 2.0 * radius + 1.0;
    let mut boundaries = csv_writer(&dir.join("boundaries.csv"))?;
    boundaries
        .write_record(["piece", "curve", "kind", "s1", "s2"])
        .map_err(csv_err)?;
    for (k, piece) in f.pieces.iter().enumerate() {
        for (c, b) in piece.boundary.iter().enumerate() {
            let kind = match b {
                BoundaryCurve::Ray(_) => "ray",
                BoundaryCurve::Arc(_) => "arc",
            };
            for p in polyline(&f.curve, b, n, reach) {
                boundaries.serialize((k, c, kind, p[0], p[1])).map_err(csv_err)?;
            }
        }
    }
    boundaries.flush().map_err(csv_err)?;

    let t_max = curve_parameter_range(&f.curve, radius);
    let mut conic = csv_writer(&dir.join("conic.csv"))?;
    conic.write_record(["t", "s1", "s2"]).map_err(csv_err)?;
    let m = 4 * n;
    for k in 0..m {
        let t = -t_max + 2.0 * t_max * k as f64 / (m - 1) as f64;
        let p = f.curve.point_f64(t);
        conic.serialize((t, p[0], p[1])).map_err(csv_err)?;
    }
    conic.flush().map_err(csv_err)?;
    Ok(())
}

pub fn cmd_plot_data(input: &Path, bounds: [f64; 4], n: usize, dir: &Path) -> CliResult<i32> {
    let problem = load_problem(input)?;
    let sub = build_domain_subdivision(&problem.r, &problem.p)?;
    let f = conjugate_from_subdivision(&problem.r, &problem.p, &sub)?;
    write_plot_data(&f, bounds, n, dir)?;
    Ok(EXIT_OK)
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Subdivision { input, output } => cmd_subdivision(&input, &output),
        Command::Conjugate { input, output } => cmd_conjugate(&input, &output),
        Command::Verify {
            input,
            grid,
            tol,
            refine,
            samples,
            seed,
            conjugate,
            output,
        } => {
            let mut cfg = VerifyConfig {
                s_samples: samples,
                seed,
                ..VerifyConfig::default()
            }
            .with_tol(tol);
            cfg.oracle.grid_n = grid;
            cfg.oracle.refine_iters = refine;
            cmd_verify(&input, &cfg, conjugate.as_deref(), &output)
        }
        Command::PlotData {
            input,
            bounds,
            n,
            output,
        } => cmd_plot_data(&input, bounds, n, &output),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::conjugate;

    const EXAMPLE2: &str = r#"{
        "rational": {"xi1": [0, 1, 0], "xi2": [-1, 1, 1], "xi0": [0, 0, 0]},
        "polytope": [[1, 1], [1, 0], [0, 0]]
    }"#;

    const EXAMPLE1: &str = r#"{
        "rational": {"numerator": [36, 21, 36, -81, 24, -252], "denominator": [-12, 9, 75]},
        "polytope": [[-1, 1], [-3, -3], [-4, -3]]
    }"#;

    #[test]
    fn parses_both_shapes() {
        let p2 = parse_problem(EXAMPLE2).unwrap();
        assert_eq!(p2.p.len(), 3);
        let p1 = parse_problem(EXAMPLE1).unwrap();
        assert_eq!(p1.r.xi0, LinearForm::from_ints(-3, -4, -12));
        let frac = parse_problem(
            r#"{"rational": {"xi1": ["1/2", 0, 0], "xi2": [0, 1, "3/4"]}, "polytope": [[0,0],[1,0],[0,1]]}"#,
        )
        .unwrap();
        assert_eq!(frac.r.xi1.c1, crate::symbolic::ratio(1, 2));
    }

    #[test]
    fn rejects_bad_input() {
        let codes = |text: &str| parse_problem(text).unwrap_err().code;
        assert_eq!(codes("{"), EXIT_INPUT);
        assert_eq!(
            codes(r#"{"rational": {"xi1": [0.5, 0, 0], "xi2": [0, 1, 1]}, "polytope": [[0,0],[1,0],[0,1]]}"#),
            EXIT_INPUT
        );
        assert_eq!(
            codes(r#"{"rational": {"xi1": [1, 0, 0], "xi2": [0, 1, 1]}, "polytope": [[0,0],[1,1],[2,2]]}"#),
            EXIT_INPUT
        );
        assert_eq!(
            codes(r#"{"rational": {"xi1": [1, 0, 0], "xi2": [0, 0, 1]}, "polytope": [[0,0],[1,0],[0,1]]}"#),
            EXIT_UNSUPPORTED
        );
    }

    #[test]
    fn conjugate_document_round_trips() {
        for text in [EXAMPLE1, EXAMPLE2] {
            let problem = parse_problem(text).unwrap();
            let f = conjugate(&problem.r, &problem.p).unwrap();
            let json = serde_json::to_string(&conjugate_doc(&f)).unwrap();
            let doc: ConjugateDoc = serde_json::from_str(&json).unwrap();
            let g = parse_conjugate_doc(&doc).unwrap();
            assert_eq!(f, g);
        }
    }

    #[test]
    fn subdivision_document_lists_conic_as_integers() {
        let problem = parse_problem(EXAMPLE2).unwrap();
        let sub = build_domain_subdivision(&problem.r, &problem.p).unwrap();
        let json = serde_json::to_value(subdivision_doc(&sub)).unwrap();
        assert_eq!(json["conic"], serde_json::json!([1, 2, 1, -4, 0, 0]));
        let doc: SubdivisionDoc = serde_json::from_value(json).unwrap();
        let pieces: Vec<SubdiffPiece> = doc.pieces.iter().map(|p| parse_piece(p).unwrap()).collect();
        assert_eq!(pieces, sub.pieces);
    }

    #[test]
    fn box_argument() {
        assert_eq!(parse_box("-5,5,-5,5").unwrap(), [-5.0, 5.0, -5.0, 5.0]);
        assert!(parse_box("5,-5,0,1").is_err());
        assert!(parse_box("1,2,3").is_err());
    }
}
