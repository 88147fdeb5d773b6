use thiserror::Error;

/// Errors raised while building subdivisions and conjugates.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole: denominator vanishes at ({0}) while the numerator does not")]
    Pole(String),
    #[error("denominator of the rational form must be non-constant")]
    ConstantDenominator,
    #[error("numerator is not a square modulo the denominator: {0}")]
    NotDecomposable(String),
    #[error("polytope is not strictly convex: {0}")]
    NotConvex(String),
    #[error("degenerate polytope: {0}")]
    Degenerate(String),
    #[error("point ({0}) lies outside the polytope")]
    OutsidePolytope(String),
    #[error("gradient image is a line or a point, not a parabola")]
    DegenerateImage,
    #[error("pole at vertex {0} with nonzero numerator")]
    PoleAtVertex(usize),
    #[error("denominator vanishes or changes sign on edge {0}")]
    PoleOnEdge(usize),
    #[error("denominator is not positive on the polytope (vertex {0})")]
    NotPositive(usize),
    #[error("elimination left a coverage gap: {0:.6} of samples covered")]
    EliminationFailed(f64),
    #[error("no root of the stationarity equation maps into edge {0}")]
    BranchSelectionFailed(usize),
    #[error("{0} sampled points are covered by no region")]
    CoverageGap(usize),
    #[error("no region contains ({0}, {1})")]
    NoRegion(f64, f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Degeneracies the algorithm does not handle, as opposed to malformed input.
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            Error::ConstantDenominator
                | Error::DegenerateImage
                | Error::PoleAtVertex(_)
                | Error::PoleOnEdge(_)
                | Error::NotPositive(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
