//! Shared generators for randomized integration tests. Everything is driven
//! by the crate's own SplitMix64 so failures replay from a printed seed.

use std::sync::Arc;

use chronoscale_core::{
    CauchyEulerProblem, GridFunction, ScaleFamilySpec, SpectrumSpec, SplitMix64, TimeScale,
};
use num_complex::Complex64;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub struct CaseGen {
    pub rng: SplitMix64,
}

#[allow(dead_code)]
impl CaseGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
        }
    }

    pub fn complex(&mut self, radius: f64) -> Complex64 {
        Complex64::new(
            self.rng.next_range(-radius, radius),
            self.rng.next_range(-radius, radius),
        )
    }

    /// One scale from the four families, cycling on `family`. With
    /// `positive_start` the scale is kept strictly positive so that
    /// `phi(t) = t` stays away from zero.
    pub fn scale(&mut self, family: usize, intervals: usize, positive_start: bool) -> Arc<TimeScale> {
        let spec = match family % 4 {
            0 => ScaleFamilySpec::Uniform {
                h: self.rng.next_range(0.2, 1.0),
                n: intervals,
                t0: if positive_start {
                    self.rng.next_range(0.5, 2.0)
                } else {
                    self.rng.next_range(-1.0, 1.0)
                },
            },
            1 => ScaleFamilySpec::Qscale {
                q: self.rng.next_range(1.1, 1.5),
                n: intervals,
                t0: self.rng.next_range(0.5, 2.0),
            },
            2 => ScaleFamilySpec::Harmonic { n: intervals },
            _ => {
                let seed = self.rng.next_u64();
                let base = chronoscale_core::generate_scale(&ScaleFamilySpec::Random {
                    n: intervals,
                    min_gap: 0.1,
                    max_gap: 1.0,
                    seed,
                })
                .unwrap();
                let shift = if positive_start { 0.5 } else { -0.5 };
                return Arc::new(
                    TimeScale::new(base.points().iter().map(|t| t + shift).collect()).unwrap(),
                );
            }
        };
        Arc::new(chronoscale_core::generate_scale(&spec).unwrap())
    }

    pub fn complex_table(&mut self, scale: &Arc<TimeScale>, radius: f64) -> GridFunction {
        let values = (0..scale.len()).map(|_| self.complex(radius)).collect();
        GridFunction::from_values(Arc::clone(scale), 0, values).unwrap()
    }

    pub fn real_table(&mut self, scale: &Arc<TimeScale>, lo: f64, hi: f64) -> GridFunction {
        let values = (0..scale.len())
            .map(|_| c(self.rng.next_range(lo, hi)))
            .collect();
        GridFunction::from_values(Arc::clone(scale), 0, values).unwrap()
    }

    /// Spectra in three flavors: real, conjugate-paired, repeated.
    pub fn lambdas(&mut self, n: usize, mode: usize) -> Vec<Complex64> {
        match mode % 3 {
            0 => (0..n)
                .map(|_| c(self.rng.next_range(-1.5, 1.5)))
                .collect(),
            1 => {
                let mut out = Vec::with_capacity(n);
                while out.len() + 1 < n {
                    let re = self.rng.next_range(-1.2, 1.2);
                    let im = self.rng.next_range(0.1, 1.2);
                    out.push(Complex64::new(re, im));
                    out.push(Complex64::new(re, -im));
                }
                if out.len() < n {
                    out.push(c(self.rng.next_range(-1.5, 1.5)));
                }
                out
            }
            _ => vec![c(self.rng.next_range(-1.2, 1.2)); n],
        }
    }

    /// A fully validated random problem, retried until the spectrum is
    /// comfortably regressive on the drawn scale. Factors of `1 + mu
    /// lambda/phi` below 0.15 in modulus are rejected: near-singular factors
    /// blow the stability constant up to where double precision cannot
    /// certify the contracts being tested.
    pub fn problem(
        &mut self,
        order: usize,
        intervals: usize,
        family: usize,
    ) -> (Arc<TimeScale>, CauchyEulerProblem) {
        loop {
            let scale = self.scale(family, intervals, true);
            let phi = if self.rng.next_unit() < 0.5 {
                GridFunction::sample_full(&scale, |t| c(t))
            } else {
                self.real_table(&scale, 0.5, 2.0)
            };
            let mode = self.rng.next_index(3);
            let lambdas = self.lambdas(order, mode);
            let forcing = self.complex_table(&scale, 1.0);
            let spectrum = match SpectrumSpec::new(lambdas) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if min_regressivity_factor(&scale, &phi, &spectrum) < 0.15 {
                continue;
            }
            match CauchyEulerProblem::new(Arc::clone(&scale), phi, spectrum, forcing) {
                // cascade roundoff grows with the stability constant itself:
                // K * machine epsilon must stay far below the 1e-10 contracts
                Ok(p) => match chronoscale_core::analytic_k(&p, None) {
                    Ok((k, _)) if k <= 1e5 => return (scale, p),
                    _ => continue,
                },
                Err(_) => continue,
            }
        }
    }
}

/// Smallest modulus of `1 + mu lambda / phi` over all stages and indices.
pub fn min_regressivity_factor(
    scale: &Arc<TimeScale>,
    phi: &GridFunction,
    spectrum: &SpectrumSpec,
) -> f64 {
    let mut worst = f64::INFINITY;
    for &lam in spectrum.lambdas() {
        for i in 0..scale.max_index() {
            let factor =
                Complex64::ONE + scale.mu(i).unwrap() * lam / phi.value(i).unwrap();
            worst = worst.min(factor.norm());
        }
    }
    worst
}

/// Greedy multiset matching within `tol`; true when every wanted value is
/// consumed by a distinct nearby candidate.
#[allow(dead_code)]
pub fn multisets_match(got: &[Complex64], want: &[Complex64], tol: f64) -> bool {
    if got.len() != want.len() {
        return false;
    }
    let mut pool: Vec<Complex64> = got.to_vec();
    for &w in want {
        let Some((best, dist)) = pool
            .iter()
            .enumerate()
            .map(|(i, &z)| (i, (z - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return false;
        };
        if dist > tol * w.norm().max(1.0) {
            return false;
        }
        pool.swap_remove(best);
    }
    true
}
