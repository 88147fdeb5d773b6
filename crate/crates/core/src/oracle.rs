//! Floating-point ground truth: brute-force conjugate values, finite
//! difference gradients and the verification suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conjugate::PiecewiseConjugate;
use crate::error::{Error, Result};
use crate::geometry::{subdivision_check, Bounds, FloatPolygon, Polytope};
use crate::subdiff::sample_curve;
use crate::symbolic::{to_f64, RationalForm};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Grid samples per axis over the bounding box of `P`.
    pub grid_n: usize,
    pub refine_iters: usize,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_n: 512,
            refine_iters: 30,
            tol: 1e-4,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 16 {
            return Err(Error::InvalidConfig(format!("grid_n = {} is below 16", self.grid_n)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }
}

/// `ξ₁²/ξ₂ + ξ₀` with float coefficients `[c1, c2, c0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct FloatRational {
    xi1: [f64; 3],
    xi2: [f64; 3],
    xi0: [f64; 3],
}

impl FloatRational {
    fn new(r: &RationalForm) -> Self {
        let f = |l: &crate::symbolic::LinearForm| l.coefficients().map(|c| to_f64(&c));
        FloatRational {
            xi1: f(&r.xi1),
            xi2: f(&r.xi2),
            xi0: f(&r.xi0),
        }
    }

    fn eval(&self, x: [f64; 2]) -> f64 {
        let lin = |c: &[f64; 3]| c[0] * x[0] + c[1] * x[1] + c[2];
        let (num, den) = (lin(&self.xi1), lin(&self.xi2));
        let head = if num == 0.0 && den == 0.0 { 0.0 } else { num * num / den };
        head + lin(&self.xi0)
    }
}

/// Sample set of `P` with precomputed values of `r`.
pub struct BruteForce {
    r: FloatRational,
    p: FloatPolygon,
    cfg: OracleConfig,
    points: Vec<[f64; 2]>,
    values: Vec<f64>,
    step: f64,
}

impl BruteForce {
    pub fn new(r: &RationalForm, p: &Polytope, cfg: OracleConfig) -> Result<Self> {
        cfg.validate()?;
        let fr = FloatRational::new(r);
        let fp = FloatPolygon::new(p);
        let b = p.bounding_box();
        let n = cfg.grid_n;
        let step = (b.max[0] - b.min[0]).max(b.max[1] - b.min[1]) / (n - 1) as f64;
        let mut points: Vec<[f64; 2]> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let u = i as f64 / (n - 1) as f64;
                let v = j as f64 / (n - 1) as f64;
                [
                    b.min[0] + u * (b.max[0] - b.min[0]),
                    b.min[1] + v * (b.max[1] - b.min[1]),
                ]
            })
            .filter(|&x| fp.contains(x, 0.0))
            .collect();
        for edge in p.edges() {
            let a = edge.start.to_f64();
            let c = edge.end.to_f64();
            points.extend((1..n).map(|k| {
                let u = k as f64 / n as f64;
                [a[0] + u * (c[0] - a[0]), a[1] + u * (c[1] - a[1])]
            }));
        }
        let mut values: Vec<f64> = points.par_iter().map(|&x| fr.eval(x)).collect();
        // Vertices use exact values, including the extension at an apex.
        for v in p.vertices() {
            points.push(v.to_f64());
            values.push(to_f64(&r.eval(v)?));
        }
        Ok(BruteForce {
            r: fr,
            p: fp,
            cfg,
            points,
            values,
            step,
        })
    }

    fn objective(&self, s: [f64; 2], x: [f64; 2]) -> f64 {
        s[0] * x[0] + s[1] * x[1] - self.r.eval(x)
    }

    /// Approximate `sup_{x ∈ P} ⟨s,x⟩ − r(x)` and a maximizer.
    pub fn sup(&self, s: [f64; 2]) -> (f64, [f64; 2]) {
        let (mut best, mut arg) = self
            .points
            .iter()
            .zip(&self.values)
            .map(|(x, v)| (s[0] * x[0] + s[1] * x[1] - v, *x))
            .fold((f64::NEG_INFINITY, [0.0; 2]), |acc, c| if c.0 > acc.0 { c } else { acc });
        let k = self.p.vertices.len();
        for e in 0..k {
            let a = self.p.vertices[e];
            let b = self.p.vertices[(e + 1) % k];
            let (v, x) = self.edge_sup(s, a, b);
            if v > best {
                best = v;
                arg = x;
            }
        }
        let mut h = self.step;
        for _ in 0..self.cfg.refine_iters {
            let centre = arg;
            for i in -2..=2 {
                for j in -2..=2 {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let x = self.p.project([centre[0] + i as f64 * h, centre[1] + j as f64 * h]);
                    let v = self.objective(s, x);
                    if v > best {
                        best = v;
                        arg = x;
                    }
                }
            }
            h *= 0.5;
        }
        (best, arg)
    }

    /// Golden-section search along the segment `[a, b]`, where the
    /// objective is concave.
    fn edge_sup(&self, s: [f64; 2], a: [f64; 2], b: [f64; 2]) -> (f64, [f64; 2]) {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let at = |u: f64| [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])];
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut u1 = hi - INV_PHI * (hi - lo);
        let mut u2 = lo + INV_PHI * (hi - lo);
        let mut f1 = self.objective(s, at(u1));
        let mut f2 = self.objective(s, at(u2));
        for _ in 0..2 * self.cfg.refine_iters {
            if f1 < f2 {
                lo = u1;
                u1 = u2;
                f1 = f2;
                u2 = lo + INV_PHI * (hi - lo);
                f2 = self.objective(s, at(u2));
            } else {
                hi = u2;
                u2 = u1;
                f2 = f1;
                u1 = hi - INV_PHI * (hi - lo);
                f1 = self.objective(s, at(u1));
            }
        }
        if f1 >= f2 {
            (f1, at(u1))
        } else {
            (f2, at(u2))
        }
    }

    pub fn value(&self, s: [f64; 2]) -> f64 {
        self.sup(s).0
    }

    pub fn values(&self, s: &[[f64; 2]]) -> Vec<f64> {
        s.par_iter().map(|&s| self.value(s)).collect()
    }
}

pub fn brute_force_conjugate(r: &RationalForm, p: &Polytope, s: [f64; 2], cfg: OracleConfig) -> Result<f64> {
    Ok(BruteForce::new(r, p, cfg)?.value(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub oracle: OracleConfig,
    /// Half-width of the sampling box `[−b, b]²` for `s`.
    pub box_half: f64,
    pub s_samples: usize,
    pub x_samples: usize,
    pub convexity_pairs: usize,
    /// Points per boundary curve in the continuity check.
    pub boundary_samples: usize,
    pub coverage_samples: usize,
    pub fy_tol: f64,
    pub convexity_tol: f64,
    pub continuity_tol: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            oracle: OracleConfig::default(),
            box_half: 10.0,
            s_samples: 1000,
            x_samples: 1000,
            convexity_pairs: 1000,
            boundary_samples: 100,
            coverage_samples: 10_000,
            fy_tol: 1e-6,
            convexity_tol: 1e-8,
            continuity_tol: 1e-6,
            seed: 7,
        }
    }
}

impl VerifyConfig {
    /// Sets the oracle tolerance; the other checks never run looser than it.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.oracle.tol = tol;
        self.fy_tol = self.fy_tol.min(tol);
        self.convexity_tol = self.convexity_tol.min(tol);
        self.continuity_tol = self.continuity_tol.min(tol);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub fy_pairs: usize,
    pub fy_max_violation: f64,
    pub oracle_samples: usize,
    pub oracle_max_gap: f64,
    pub oracle_worst_s: [f64; 2],
    pub convexity_pairs: usize,
    pub convexity_max_violation: f64,
    pub continuity_points: usize,
    pub continuity_max_gap: f64,
    pub coverage: f64,
    pub coverage_gaps: usize,
    pub overlaps: usize,
    pub config: VerifyConfig,
}

fn sample_in_polytope(p: &Polytope, rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    let b = p.bounding_box();
    let mut out: Vec<[f64; 2]> = p.vertices().iter().map(|v| v.to_f64()).collect();
    while out.len() < n {
        let x = b.sample(rng);
        if p.contains_f64(x, 0.0) {
            out.push(x);
        }
    }
    out
}

/// Checks Fenchel–Young, agreement with the brute-force oracle, midpoint
/// convexity, continuity across piece boundaries, coverage and overlaps.
pub fn verify_conjugate(f: &PiecewiseConjugate, r: &RationalForm, p: &Polytope, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let oracle = BruteForce::new(r, p, cfg.oracle)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let square = Bounds::square(cfg.box_half);
    let eval = |s: [f64; 2]| f.eval(s);

    let mut s_points: Vec<[f64; 2]> = (0..cfg.s_samples).map(|_| square.sample(&mut rng)).collect();
    // One interior point per cell, so a wrong piece is always seen.
    s_points.extend(f.pieces.iter().flat_map(|pc| pc.region.cells.iter().map(|c| c.witness.to_f64())));
    let f_values: Vec<f64> = s_points.par_iter().map(|&s| eval(s)).collect::<Result<_>>()?;

    let xs = sample_in_polytope(p, &mut rng, cfg.x_samples);
    let r_values: Vec<f64> = xs
        .iter()
        .zip(p.vertices().iter().map(Some).chain(std::iter::repeat(None)))
        .map(|(x, v)| match v {
            Some(v) => r.eval(v).map(|val| to_f64(&val)),
            None => Ok(r.eval_f64(*x)),
        })
        .collect::<Result<_>>()?;
    let fy_s = &s_points[..cfg.s_samples.min(s_points.len())];
    let fy_max_violation = fy_s
        .par_iter()
        .zip(&f_values[..fy_s.len()])
        .map(|(s, fs)| {
            xs.iter()
                .zip(&r_values)
                .map(|(x, rx)| s[0] * x[0] + s[1] * x[1] - rx - fs)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
        .max(0.0);

    let oracle_values = oracle.values(&s_points);
    let (oracle_max_gap, oracle_worst_s) = s_points
        .iter()
        .zip(f_values.iter().zip(&oracle_values))
        .map(|(s, (a, b))| ((a - b).abs(), *s))
        .fold((0.0, [0.0; 2]), |acc, c| if c.0 > acc.0 { c } else { acc });

    let pairs: Vec<([f64; 2], [f64; 2])> = (0..cfg.convexity_pairs)
        .map(|_| (square.sample(&mut rng), square.sample(&mut rng)))
        .collect();
    let convexity_max_violation = pairs
        .par_iter()
        .map(|(a, b)| -> Result<f64> {
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            Ok(eval(m)? - (eval(*a)? + eval(*b)?) / 2.0)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let (continuity_points, continuity_max_gap) = continuity(f, cfg);

    let report = subdivision_check(
        &f.pieces.iter().map(|pc| pc.region.clone()).collect::<Vec<_>>(),
        square,
        cfg.coverage_samples,
    );

    let passed = fy_max_violation <= cfg.fy_tol
        && oracle_max_gap <= cfg.oracle.tol
        && convexity_max_violation <= cfg.convexity_tol
        && continuity_max_gap <= cfg.continuity_tol
        && report.covered == report.samples
        && report.overlaps == 0;
    Ok(VerifyReport {
        passed,
        fy_pairs: fy_s.len() * xs.len(),
        fy_max_violation,
        oracle_samples: s_points.len(),
        oracle_max_gap,
        oracle_worst_s,
        convexity_pairs: pairs.len(),
        convexity_max_violation,
        continuity_points,
        continuity_max_gap,
        coverage: report.coverage,
        coverage_gaps: report.samples - report.covered,
        overlaps: report.overlaps,
        config: *cfg,
    })
}

/// Largest disagreement between a piece's expression and any other piece
/// containing a sampled point of its boundary.
fn continuity(f: &PiecewiseConjugate, cfg: &VerifyConfig) -> (usize, f64) {
    let reach = 3.0 * cfg.box_half;
    let jobs: Vec<(usize, [f64; 2])> = f
        .pieces
        .iter()
        .enumerate()
        .flat_map(|(k, pc)| {
            pc.boundary
                .iter()
                .flat_map(|b| sample_curve(&f.curve, b, cfg.boundary_samples, reach))
                .map(move |s| (k, s))
        })
        .collect();
    let gap = jobs
        .par_iter()
        .map(|&(k, s)| {
            let own = f.pieces[k].expr.eval_f64(s);
            let tol = 1e-9 * (1.0 + s[0].hypot(s[1]));
            f.pieces
                .iter()
                .enumerate()
                .filter(|(j, pc)| *j != k && pc.region.margin_f64(s) >= -tol)
                .map(|(_, pc)| (pc.expr.eval_f64(s) - own).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    (jobs.len(), gap)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientCheck {
    pub exact: [f64; 2],
    pub numeric: [f64; 2],
    pub deviation: f64,
}

/// Compares `∇r(x)` with central differences of step `h`.
pub fn finite_difference_gradient_check(r: &RationalForm, x: [f64; 2], h: f64) -> Result<GradientCheck> {
    let exact = r.gradient_f64(x)?;
    let diff = |k: usize| {
        let mut lo = x;
        let mut hi = x;
        lo[k] -= h;
        hi[k] += h;
        (r.eval_f64(hi) - r.eval_f64(lo)) / (2.0 * h)
    };
    let numeric = [diff(0), diff(1)];
    let deviation = (exact[0] - numeric[0]).abs().max((exact[1] - numeric[1]).abs());
    Ok(GradientCheck {
        exact,
        numeric,
        deviation,
    })
}

/// Uniform points of `[−half, half]²` from a fixed seed.
pub fn sample_box(half: f64, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.gen_range(-half..=half), rng.gen_range(-half..=half)])
        .collect()
}
