//! Numerical thresholds used across the crate.
//!
//! All identities on finite isolated scales are exact in real arithmetic;
//! the tolerances below only absorb double-precision roundoff, measured
//! relative to a magnitude floor of one.

use num_complex::Complex64;

/// Relative tolerance for identities that hold exactly in real arithmetic
/// (fundamental theorem of delta calculus, exponential laws).
pub const EXACT_IDENTITY_REL: f64 = 1e-12;

/// Modulus floor for the regressivity factors `1 + mu*p`. The theory only
/// needs them nonzero; this is the quantitative stand-in.
pub const REGRESSIVITY_THRESHOLD: f64 = 1e-12;

/// Modulus floor for the coefficient function `phi` wherever it is divided by.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Partial exponential products must stay inside `[OVERFLOW_FLOOR, OVERFLOW_CEIL]`,
/// otherwise the computation stops with an explicit error instead of losing
/// precision silently.
pub const OVERFLOW_CEIL: f64 = 1e150;
pub const OVERFLOW_FLOOR: f64 = 1e-150;

/// Relative bound on |summed operator - factored operator|.
pub const FACTORIZATION_GAP_REL: f64 = 1e-9;

/// Relative residual of the first-order exponential-integral solver.
pub const FIRST_ORDER_RESIDUAL_REL: f64 = 1e-10;

/// Relative residual of the reconstructed solution `u` against the forcing.
pub const CASCADE_RESIDUAL_REL: f64 = 1e-9;

/// Exact inputs must be fixed points of the cascade to this relative accuracy.
pub const FIXED_POINT_REL: f64 = 1e-10;

/// Durand-Kerner stopping tolerance and iteration cap.
pub const ROOT_TOL: f64 = 1e-10;
pub const ROOT_MAX_ITER: usize = 500;

/// Coefficients -> roots -> coefficients round trips must close to this.
pub const ROOT_ROUND_TRIP_REL: f64 = 1e-8;

/// Residuals below this are considered degenerate: the empirical stability
/// ratio `sup|x-u| / epsilon` is no longer meaningful.
pub const DEGENERATE_RESIDUAL_EPS: f64 = 1e-14;

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (a.abs().max(b.abs()).max(1.0))
}

pub fn close_rel_c(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

/// Panics unless `close_rel(a, b, EXACT_IDENTITY_REL)`.
pub fn assert_close(a: f64, b: f64) {
    assert!(
        close_rel(a, b, EXACT_IDENTITY_REL),
        "{a} and {b} differ by more than {EXACT_IDENTITY_REL} relative"
    );
}

/// Complex counterpart of [`assert_close`].
pub fn assert_close_c(a: Complex64, b: Complex64) {
    assert!(
        close_rel_c(a, b, EXACT_IDENTITY_REL),
        "{a} and {b} differ by more than {EXACT_IDENTITY_REL} relative"
    );
}
