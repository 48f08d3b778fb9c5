use thiserror::Error;

/// Errors raised by the solvers and verifiers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("coefficient is not finite at t = {t}")]
    NonFiniteCoefficient { t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("solution touches zero with vanishing derivative at t = {t}")]
    NonUniqueness { t: f64 },

    #[error("comparison coefficient is below the base coefficient at t = {t} (gap {gap:e})")]
    PreconditionOrderViolated { t: f64, gap: f64 },

    #[error("comparison solution vanishes at t = {t} inside the window")]
    PositivityViolated { t: f64 },

    #[error("evaluation grid has no points")]
    EmptyGrid,

    #[error("pole at {pole} lies on the segment [{start}, {end}]")]
    PoleOnSegment { pole: f64, start: f64, end: f64 },

    #[error("sphere of radius {r} around {center} is empty")]
    EmptySphere { center: f64, r: f64 },

    #[error("first zero {zero} lies within {tol:e} of theta = {theta}; finiteness not certifiable")]
    Borderline { zero: f64, theta: f64, tol: f64 },

    #[error("lsc limit not converged at n = {n}: last increment {increment:e}")]
    NotConverged { n: u32, last: f64, increment: f64 },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("chosen solution is negative at x = {x} (u = {u:e})")]
    NegativeSolution { x: f64, u: f64 },

    #[error("total mass {mass} deviates from 1")]
    DegenerateMass { mass: f64 },

    #[error("reference weight vanishes at x = {x}")]
    ZeroWeight { x: f64 },

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("measures are not factorized over the product")]
    NotFactorized,

    #[error("radius {r} exceeds the conjugate bound {bound}")]
    BeyondConjugate { r: f64, bound: f64 },

    #[error("c = {c} is not above the critical constant {critical}")]
    SubcriticalC { c: f64, critical: f64 },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
