use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The point already carries a continuous image.
    AlreadyRealized,
    InvalidDistribution(&'static str),
    NegativeModulus(f64),
    /// Conditioning on an event of zero probability.
    ZeroDenominator,
    GridMismatch {
        expected: usize,
        found: usize,
    },
    NonpositiveUnit(f64),
    InvalidGrid(&'static str),
    InvalidLagrangian(&'static str),
    InvalidArgument(&'static str),
    EmptyPath,
    /// The path count exceeds the enumeration guard.
    TooLarge {
        paths: f64,
        limit: f64,
    },
    UnboundedPotential,
    NoConvergence {
        iterations: usize,
        gradient: f64,
    },
    CausticSingularity,
    ShootingFailure(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::AlreadyRealized => write!(f, "point already has a realized image"),
            Error::InvalidDistribution(why) => write!(f, "invalid mapping distribution: {why}"),
            Error::NegativeModulus(a) => write!(f, "negative modulus {a}"),
            Error::ZeroDenominator => write!(f, "conditioning on a zero-probability sample"),
            Error::GridMismatch { expected, found } => {
                write!(f, "grid mismatch: expected {expected} sites, found {found}")
            }
            Error::NonpositiveUnit(h) => write!(f, "action unit must be positive, got {h}"),
            Error::InvalidGrid(why) => write!(f, "invalid grid: {why}"),
            Error::InvalidLagrangian(why) => write!(f, "invalid lagrangian: {why}"),
            Error::InvalidArgument(why) => write!(f, "invalid argument: {why}"),
            Error::EmptyPath => write!(f, "empty sample sequence"),
            Error::TooLarge { paths, limit } => {
                write!(f, "{paths:e} paths exceeds the enumeration limit {limit:e}")
            }
            Error::UnboundedPotential => write!(f, "potential is not bounded below on the grid"),
            Error::NoConvergence { iterations, gradient } => {
                write!(f, "no convergence after {iterations} iterations (gradient max-norm {gradient:e})")
            }
            Error::CausticSingularity => write!(f, "kernel is singular at a caustic (sin ωT = 0)"),
            Error::ShootingFailure(why) => write!(f, "shooting failed: {why}"),
        }
    }
}

impl core::error::Error for Error {}
