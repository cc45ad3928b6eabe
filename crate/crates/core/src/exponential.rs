//! The time-scale exponential `e_p(t, s)` and regressivity certification.
//!
//! On an isolated scale the exponential is a finite product of the factors
//! `1 + mu(t_i) p(t_i)`: forward in time a plain product, backward the
//! reciprocal of the reversed product. It is the unique solution of
//! `y^Delta = p y` with `y(s) = 1`, which only makes sense when every
//! factor is nonzero, i.e. when `p` is regressive.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scale::GridFunction;
use crate::tol::{OVERFLOW_CEIL, OVERFLOW_FLOOR, REGRESSIVITY_THRESHOLD};

/// Outcome of scanning `|1 + mu p|` over a window. `ok` is true iff the
/// smallest modulus clears the threshold; the worst factor is reported
/// either way so a failure names the offending point.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressivityCertificate {
    pub ok: bool,
    pub worst_index: usize,
    pub worst_value: Complex64,
    pub threshold: f64,
}

/// Scans `|1 + mu(t_i) p(t_i)|` over `p`'s window (clipped to indices that
/// have a forward jump) and certifies the minimum against `threshold`.
pub fn check_regressivity(p: &GridFunction, threshold: f64) -> RegressivityCertificate {
    let last = p.end_index().min(p.scale().max_index() - 1);
    let mut worst_index = p.start_index();
    let mut worst_value = Complex64::ONE;
    let mut worst_modulus = f64::INFINITY;
    for i in p.start_index()..=last {
        let mu = p.scale().mu(i).expect("index has a forward jump");
        let factor = Complex64::ONE + mu * p.value(i).expect("index inside window");
        if factor.norm() < worst_modulus {
            worst_modulus = factor.norm();
            worst_value = factor;
            worst_index = i;
        }
    }
    RegressivityCertificate {
        ok: worst_modulus > threshold,
        worst_index,
        worst_value,
        threshold,
    }
}

/// The regressivity factor at one index, `1 + mu(t_i) p(t_i)`, checked
/// against the default threshold.
pub(crate) fn regressivity_factor(p: &GridFunction, i: usize) -> Result<Complex64> {
    let mu = p.scale().mu(i)?;
    let factor = Complex64::ONE + mu * p.value(i)?;
    if factor.norm() <= REGRESSIVITY_THRESHOLD {
        return Err(Error::RegressivityViolation {
            index: i,
            factor,
            modulus: factor.norm(),
            threshold: REGRESSIVITY_THRESHOLD,
        });
    }
    Ok(factor)
}

/// Guard for partial products: refuse to continue once the running modulus
/// leaves the representable comfort zone.
pub(crate) fn guard_magnitude(modulus: f64) -> Result<()> {
    if !(OVERFLOW_FLOOR..=OVERFLOW_CEIL).contains(&modulus) {
        return Err(Error::OverflowRisk { modulus });
    }
    Ok(())
}

/// `e_p(t_{i_t}, t_{i_s})` as a product (or reciprocal product) of
/// regressivity factors. Equals one when the arguments coincide.
pub fn ts_exp(p: &GridFunction, i_t: usize, i_s: usize) -> Result<Complex64> {
    if i_t == i_s {
        // still range-check the endpoints
        p.scale().point(i_t)?;
        return Ok(Complex64::ONE);
    }
    let (lo, hi) = (i_t.min(i_s), i_t.max(i_s));
    let mut product = Complex64::ONE;
    for i in lo..hi {
        let factor = regressivity_factor(p, i)?;
        product *= factor;
        guard_magnitude(product.norm())?;
    }
    if i_t > i_s {
        Ok(product)
    } else {
        Ok(product.finv())
    }
}
