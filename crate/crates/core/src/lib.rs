//! Computing with linear Cauchy-Euler dynamic equations on finite isolated
//! time scales.
//!
//! The crate provides, bottom to top:
//!
//! - [`scale`]: time scales, grid functions, and exact delta calculus;
//! - [`exponential`]: regressivity certificates and the time-scale
//!   exponential `e_p(t, s)`;
//! - [`operator`]: the nth-order Cauchy-Euler operator in summed and
//!   factored form, plus the spectrum/coefficient maps;
//! - [`cascade`]: the first-order exponential-integral solver and the stage
//!   cascade that turns an approximate solution into an exact one;
//! - [`stability`]: Hyers-Ulam stability constants and seeded perturbation
//!   experiments;
//! - [`io`]: problem/report file formats, 17-digit JSON, and CSV tables.
//!
//! Everything is immutable after construction and all operations are pure,
//! so values can be shared freely across threads.

pub mod cascade;
pub mod error;
pub mod exponential;
pub mod io;
pub mod operator;
pub mod scale;
pub mod stability;
pub mod tol;

pub use cascade::{cascade_solve, first_order_solve, residual, CascadeResult};
pub use error::{Error, Result};
pub use exponential::{check_regressivity, ts_exp, RegressivityCertificate};
pub use operator::{
    alphas_to_lambdas, apply_factored_operator, apply_m, apply_sum_operator, factor_chain,
    factorization_gap, lambdas_to_alphas, CauchyEulerProblem, CoefficientSpec, SpectrumSpec,
};
pub use scale::{GridFunction, TimeScale};
pub use stability::{
    analytic_k, generate_scale, perturbation_grid, run_hus_experiment, stage_constant,
    HusOutcome, Perturbation, PerturbationShape, ScaleDescriptor, ScaleFamilySpec, SplitMix64,
    StabilityReport,
};
