//! Error type shared by every layer of the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong while building scales, grids, operators,
/// or solutions. Numerical near-degeneracy (regressivity, vanishing
/// coefficient, product overflow) is distinguished from plain misuse
/// (bad indices, short windows) so callers can map the two classes to
/// different exit paths.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("time scale needs at least two points, got {0}")]
    EmptyScale(usize),

    #[error("time scale points must be strictly increasing: t[{index}] = {value} does not exceed t[{index}-1] = {previous}")]
    NonMonotonePoints {
        index: usize,
        value: f64,
        previous: f64,
    },

    #[error("index {index} out of range {start}..={end}")]
    IndexOutOfRange {
        index: usize,
        start: usize,
        end: usize,
    },

    #[error("window of length {len} is too small: {reason}")]
    WindowTooSmall { len: usize, reason: &'static str },

    #[error("grid functions live on different time scales")]
    ScaleMismatch,

    #[error("regressivity violated at index {index}: |1 + mu*p| = {modulus:e} (factor {factor}) is not above {threshold:e}")]
    RegressivityViolation {
        index: usize,
        factor: Complex64,
        modulus: f64,
        threshold: f64,
    },

    #[error("coefficient function is degenerate at index {index}: |phi| = {modulus:e} is below {threshold:e}")]
    DegenerateCoefficient {
        index: usize,
        modulus: f64,
        threshold: f64,
    },

    #[error("partial product left the safe range [1e-150, 1e150] (modulus {modulus:e}); refusing to continue")]
    OverflowRisk { modulus: f64 },

    #[error("root finding did not converge within {max_iter} iterations (last step {last_step:e})")]
    RootFindingFailure { max_iter: usize, last_step: f64 },

    #[error("invalid scale family parameters: {0}")]
    InvalidFamilyParameters(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
