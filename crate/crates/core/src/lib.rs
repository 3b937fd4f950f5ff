//! Numerical laboratory for Laplace transforms of step functions, Tauberian
//! residue theorems and the ζ/ψ route to the prime number theorem.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what every quoted tolerance
//! assumes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod pnt;
pub mod report;
pub mod scalar;
pub mod stepfn;
pub mod sum;
pub mod tauber;
pub mod zeta;

pub use num_complex::Complex;

pub use arith::{mangoldt, pi_count, psi_jumps, sieve_primes, sieve_primes_segmented, ArithError, PrimeTable};
pub use pnt::{build_rho, convergence_table, crosscheck, k_a_integral, pnt_report, scaled_line_limits, PntError};
pub use scalar::Real;
pub use stepfn::{
    laplace_stieltjes_truncated, laplace_truncated, parts_identity_residual, point, scaled_variation_bound, tail_bound,
    total_variation_scaled, StepError,
};
pub use tauber::{residue_extrapolate, shifted_transform_check, tauber_limit_table, TauberError};
pub use zeta::{line_min_scan, log_deriv_f, zeta_em, zeta_prime_em, EmParams, ZetaError};

pub type Complex64 = Complex<f64>;
pub type ComplexPoint64 = stepfn::ComplexPoint<f64>;
pub type StepFunction64 = stepfn::StepFunction<f64>;
pub type TailCertificate64 = stepfn::TailCertificate<f64>;
pub type PsiJumpList64 = arith::PsiJumpList<f64>;
pub type Estimate64 = zeta::Estimate<f64>;
pub type LineScan64 = zeta::LineScan<f64>;
pub type ResidueEstimate64 = tauber::ResidueEstimate<f64>;
pub type LimitTable64 = tauber::LimitTable<f64>;
pub type PntReport64 = pnt::PntReport<f64>;
pub type CrosscheckRow64 = pnt::CrosscheckRow<f64>;
pub type ConvergenceRow64 = pnt::ConvergenceRow<f64>;

pub type StepFunction32 = stepfn::StepFunction<f32>;
pub type PsiJumpList32 = arith::PsiJumpList<f32>;
