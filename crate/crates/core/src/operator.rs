//! The nth-order Cauchy-Euler operator and its two equivalent forms.
//!
//! The operator is built from the recursion `M_0 y = y`,
//! `M_{k+1} y = phi * (M_k y)^Delta`. The summed form is
//! `sum_k alpha_k M_k y` with monic coefficients; the factored form applies
//! `(phi D - lambda_k I)` for `k = 1..n`, innermost factor first. The two
//! agree exactly when the coefficients are the elementary symmetric
//! polynomials of the negated characteristic values, and the gap between
//! them is the crate's primary self-check.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scale::{GridFunction, TimeScale};
use crate::tol::{DEGENERACY_THRESHOLD, REGRESSIVITY_THRESHOLD, ROOT_MAX_ITER, ROOT_TOL};

/// Characteristic values `lambda_1..lambda_n`. The order is significant for
/// the factored operator and the solution cascade, but not for the
/// coefficients derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    lambdas: Vec<Complex64>,
}

impl SpectrumSpec {
    pub fn new(lambdas: Vec<Complex64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidProblem(
                "spectrum needs at least one characteristic value".into(),
            ));
        }
        if lambdas.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err(Error::InvalidProblem(
                "characteristic values must be finite".into(),
            ));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn order(&self) -> usize {
        self.lambdas.len()
    }
}

/// Monic coefficients `alpha_0..alpha_n` in ascending powers, `alpha_n = 1`
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSpec {
    alphas: Vec<Complex64>,
}

impl CoefficientSpec {
    pub fn new(alphas: Vec<Complex64>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::InvalidProblem(
                "coefficient list needs at least alpha_0 and alpha_1".into(),
            ));
        }
        if alphas.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidProblem("coefficients must be finite".into()));
        }
        if *alphas.last().unwrap() != Complex64::ONE {
            return Err(Error::InvalidProblem(
                "operator must be monic: the leading coefficient has to equal 1 exactly".into(),
            ));
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn order(&self) -> usize {
        self.alphas.len() - 1
    }
}

/// Expands `prod_k (z - lambda_k)` one root at a time and returns the
/// coefficients in ascending powers.
///
/// The roots are first brought into a canonical order (total order on the
/// real part, then the imaginary part), so permuting the input produces
/// bit-identical coefficients.
pub fn lambdas_to_alphas(spec: &SpectrumSpec) -> CoefficientSpec {
    let mut roots = spec.lambdas.clone();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut coeffs = vec![Complex64::ONE];
    for lam in roots {
        let mut next = vec![Complex64::ZERO; coeffs.len() + 1];
        for (j, &cj) in coeffs.iter().enumerate() {
            next[j + 1] += cj;
            next[j] -= lam * cj;
        }
        coeffs = next;
    }
    CoefficientSpec { alphas: coeffs }
}

/// Recovers the characteristic values as the roots of the monic polynomial,
/// by simultaneous Durand-Kerner iteration.
pub fn alphas_to_lambdas(spec: &CoefficientSpec) -> Result<SpectrumSpec> {
    let n = spec.order();
    let alphas = &spec.alphas;
    // Cauchy bound on the root moduli for a monic polynomial.
    let radius = 1.0
        + alphas[..n]
            .iter()
            .map(|a| a.norm())
            .fold(0.0_f64, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32 + 1) * radius)
        .collect();

    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &a in alphas.iter().rev() {
            acc = acc * z + a;
        }
        acc
    };

    let mut last_step = f64::INFINITY;
    for _ in 0..ROOT_MAX_ITER {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let mut denom = Complex64::ONE;
            for j in 0..n {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                // coincident iterates; nudge apart and retry next sweep
                roots[i] += Complex64::new(ROOT_TOL, ROOT_TOL);
                max_step = f64::INFINITY;
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            max_step = max_step.max(delta.norm());
        }
        last_step = max_step;
        let magnitude = roots.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        if max_step <= ROOT_TOL * magnitude {
            return SpectrumSpec::new(roots);
        }
    }
    Err(Error::RootFindingFailure {
        max_iter: ROOT_MAX_ITER,
        last_step,
    })
}

fn check_phi_covers(phi: &GridFunction, start: usize, end: usize) -> Result<()> {
    if phi.start_index() > start || phi.end_index() < end {
        return Err(Error::IndexOutOfRange {
            index: if phi.start_index() > start { start } else { end },
            start: phi.start_index(),
            end: phi.end_index(),
        });
    }
    Ok(())
}

/// `M_k g`: k rounds of `phi * (.)^Delta`. The window shrinks by `k` at the
/// right end; `phi` must cover every intermediate window.
pub fn apply_m(phi: &GridFunction, g: &GridFunction, k: usize) -> Result<GridFunction> {
    if g.window_len() <= k {
        return Err(Error::WindowTooSmall {
            len: g.window_len(),
            reason: "window must be longer than the operator order",
        });
    }
    if k > 0 {
        check_phi_covers(phi, g.start_index(), g.end_index() - 1)?;
    }
    let mut h = g.clone();
    for _ in 0..k {
        h = phi.mul(&h.delta_derivative()?)?;
    }
    Ok(h)
}

/// The summed form `sum_{k=0}^{n} alpha_k M_k g` on the n-shrunken window.
pub fn apply_sum_operator(
    phi: &GridFunction,
    alphas: &CoefficientSpec,
    g: &GridFunction,
) -> Result<GridFunction> {
    let n = alphas.order();
    if g.window_len() <= n {
        return Err(Error::WindowTooSmall {
            len: g.window_len(),
            reason: "window must be longer than the operator order",
        });
    }
    let (start, end) = (g.start_index(), g.end_index() - n);
    let mut acc = g.restrict(start, end)?.scaled(alphas.alphas[0]);
    let mut mk = g.clone();
    for k in 1..=n {
        mk = phi.mul(&mk.delta_derivative()?)?;
        let term = mk.restrict(start, end)?.scaled(alphas.alphas[k]);
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Applies `(phi D - lambda_k I)` for `k = 1..n` and returns every
/// intermediate stage; the last entry is the fully factored operator value.
/// This is exactly the chain `g_1..g_n` built from an approximate solution
/// in the stability construction.
pub fn factor_chain(
    phi: &GridFunction,
    spectrum: &SpectrumSpec,
    g: &GridFunction,
) -> Result<Vec<GridFunction>> {
    let n = spectrum.order();
    if g.window_len() <= n {
        return Err(Error::WindowTooSmall {
            len: g.window_len(),
            reason: "window must be longer than the operator order",
        });
    }
    check_phi_covers(phi, g.start_index(), g.end_index() - 1)?;
    let mut chain = Vec::with_capacity(n);
    let mut h = g.clone();
    for &lam in &spectrum.lambdas {
        let derivative_term = phi.mul(&h.delta_derivative()?)?;
        h = derivative_term.sub(&h.scaled(lam))?;
        chain.push(h.clone());
    }
    Ok(chain)
}

/// The factored form `prod_{k=1}^{n} (phi D - lambda_k I) g`.
pub fn apply_factored_operator(
    phi: &GridFunction,
    spectrum: &SpectrumSpec,
    g: &GridFunction,
) -> Result<GridFunction> {
    Ok(factor_chain(phi, spectrum, g)?
        .pop()
        .expect("chain has order >= 1"))
}

/// Sup-distance between the summed and factored forms, relative to the
/// larger of one and the outputs' magnitudes. The factorization identity
/// makes this pure roundoff for every input.
pub fn factorization_gap(
    phi: &GridFunction,
    spectrum: &SpectrumSpec,
    g: &GridFunction,
) -> Result<f64> {
    let alphas = lambdas_to_alphas(spectrum);
    let summed = apply_sum_operator(phi, &alphas, g)?;
    let factored = apply_factored_operator(phi, spectrum, g)?;
    let gap = summed.sub(&factored)?.sup_norm();
    let magnitude = summed.sup_norm().max(factored.sup_norm());
    Ok(gap / (1.0 + magnitude))
}

/// A fully validated Cauchy-Euler problem: scale, coefficient function,
/// spectrum (with derived monic coefficients), and forcing.
///
/// Construction certifies the hypotheses of the stability theorem:
/// `inf |phi| = A > 0` over the indices that get divided by, and
/// `phi + lambda_k mu != 0` (regressivity) for every characteristic value.
#[derive(Debug, Clone)]
pub struct CauchyEulerProblem {
    scale: Arc<TimeScale>,
    phi: GridFunction,
    forcing: GridFunction,
    spectrum: SpectrumSpec,
    alphas: CoefficientSpec,
    a_floor: f64,
}

impl CauchyEulerProblem {
    pub fn new(
        scale: Arc<TimeScale>,
        phi: GridFunction,
        spectrum: SpectrumSpec,
        forcing: GridFunction,
    ) -> Result<Self> {
        let alphas = lambdas_to_alphas(&spectrum);
        Self::with_parts(scale, phi, spectrum, alphas, forcing)
    }

    /// Builds the problem from monic coefficients, recovering the spectrum
    /// numerically. The given coefficients are kept verbatim for the summed
    /// operator.
    pub fn from_alphas(
        scale: Arc<TimeScale>,
        phi: GridFunction,
        alphas: CoefficientSpec,
        forcing: GridFunction,
    ) -> Result<Self> {
        let spectrum = alphas_to_lambdas(&alphas)?;
        Self::with_parts(scale, phi, spectrum, alphas, forcing)
    }

    fn with_parts(
        scale: Arc<TimeScale>,
        phi: GridFunction,
        spectrum: SpectrumSpec,
        alphas: CoefficientSpec,
        forcing: GridFunction,
    ) -> Result<Self> {
        let n = spectrum.order();
        let max_index = scale.max_index();
        if scale.len() < n + 1 {
            return Err(Error::InvalidProblem(format!(
                "an order-{n} problem needs at least {} points, scale has {}",
                n + 1,
                scale.len()
            )));
        }
        for grid in [&phi, &forcing] {
            if grid.scale().as_ref() != scale.as_ref() {
                return Err(Error::ScaleMismatch);
            }
            if grid.start_index() != 0 || grid.end_index() != max_index {
                return Err(Error::InvalidProblem(
                    "phi and the forcing must be sampled on the whole scale".into(),
                ));
            }
        }

        // A = inf |phi| over the indices with a forward jump
        let mut a_floor = f64::INFINITY;
        let mut a_index = 0;
        for i in 0..max_index {
            let m = phi.value(i)?.norm();
            if m < a_floor {
                a_floor = m;
                a_index = i;
            }
        }
        if a_floor <= DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateCoefficient {
                index: a_index,
                modulus: a_floor,
                threshold: DEGENERACY_THRESHOLD,
            });
        }

        // phi + lambda_k mu != 0 at every index with a forward jump
        for &lam in spectrum.lambdas() {
            for i in 0..max_index {
                let mu = scale.mu(i)?;
                let factor = Complex64::ONE + mu * lam / phi.value(i)?;
                if factor.norm() <= REGRESSIVITY_THRESHOLD {
                    return Err(Error::RegressivityViolation {
                        index: i,
                        factor,
                        modulus: factor.norm(),
                        threshold: REGRESSIVITY_THRESHOLD,
                    });
                }
            }
        }

        Ok(Self {
            scale,
            phi,
            forcing,
            spectrum,
            alphas,
            a_floor,
        })
    }

    pub fn scale(&self) -> &Arc<TimeScale> {
        &self.scale
    }

    pub fn phi(&self) -> &GridFunction {
        &self.phi
    }

    pub fn forcing(&self) -> &GridFunction {
        &self.forcing
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    pub fn alphas(&self) -> &CoefficientSpec {
        &self.alphas
    }

    pub fn order(&self) -> usize {
        self.spectrum.order()
    }

    /// `inf |phi|` over `[t_0, t_{N-1}]`, the constant `A` of the stability bound.
    pub fn a_floor(&self) -> f64 {
        self.a_floor
    }

    pub fn apply_sum(&self, g: &GridFunction) -> Result<GridFunction> {
        apply_sum_operator(&self.phi, &self.alphas, g)
    }

    pub fn apply_factored(&self, g: &GridFunction) -> Result<GridFunction> {
        apply_factored_operator(&self.phi, &self.spectrum, g)
    }
}
