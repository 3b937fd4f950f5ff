//! The prime number theorem pipeline: `ρ(t) = ψ(e^t)`, the identity
//! `-ζ′(s)/(sζ(s)) = L_ρ(s)` on `σ > 1`, the integral `K_A`, the scaled line
//! limits `(σ-1) F(σ+iτ)` and the ψ/π convergence tables.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{pi_count, psi_jumps, ArithError, PrimeTable, PsiJumpList};
use crate::scalar::Real;
use crate::stepfn::{laplace_truncated_terms, tail_bound, ComplexPoint, StepError, StepFunction, TailCertificate};
use crate::sum::{CompensatedComplexSum, CompensatedSum};
use crate::zeta::{line_min_scan, log_deriv_f_estimate, EmParams, Estimate, ZetaError};

/// Constant in `ψ(x) <= C x`, valid for every `x >= 1` (the maximum of
/// `ψ(x)/x` is about 1.0389, attained at `x = 113`).
pub const CHEBYSHEV_C: f64 = 1.04;

/// Evaluation points of the default cross-check.
pub const CROSSCHECK_POINTS: [(f64, f64); 3] = [(2.0, 0.0), (3.0, 0.0), (1.5, 3.0)];

#[derive(Debug, Error)]
pub enum PntError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error("{what} = {value} is outside the admissible domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
}

/// `ρ(t) = ψ(e^t)` on `[0, log X]`: a jump of `log p` at `t = log(p^k)`.
pub fn build_rho<R: Real>(x_max: R, table: &PrimeTable) -> Result<StepFunction<R>, PntError> {
    let psi = psi_jumps(x_max, table)?;
    rho_from_psi(&psi)
}

/// Transports an existing ψ jump list to the `t = log x` scale.
///
/// Jump times are the logarithms of the exact integer prime powers, so
/// `ρ(log x) = ψ(x)` holds for every `x` up to the cutoff.
pub fn rho_from_psi<R: Real>(psi: &PsiJumpList<R>) -> Result<StepFunction<R>, PntError> {
    let jumps = psi.jumps().iter().map(|j| (R::from_count(j.location).ln(), j.weight));
    Ok(StepFunction::new(jumps, psi.cutoff().ln())?)
}

/// One row of the central-identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckRow<R> {
    pub sigma: R,
    pub t: R,
    pub zeta_side_re: R,
    pub zeta_side_im: R,
    pub laplace_re: R,
    pub laplace_im: R,
    pub tail_bound: R,
    pub abs_diff: R,
    pub pass: bool,
}

/// A cross-check row with the certificates that decided `pass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosscheckOutcome<R> {
    pub row: CrosscheckRow<R>,
    pub tail: TailCertificate<R>,
    /// Error estimate of the Euler–Maclaurin side.
    pub zeta_error: R,
    /// Rounding envelope of the truncated Laplace sum.
    pub laplace_error: R,
}

fn require_right_of_one<R: Real>(s: ComplexPoint<R>) -> Result<(), PntError> {
    if !(s.re > R::one()) {
        return Err(PntError::Domain {
            what: "sigma",
            value: s.re.as_f64(),
            expected: "sigma > 1 (the psi integral diverges elsewhere)",
        });
    }
    Ok(())
}

/// Compares `F(s) = -ζ′(s)/(sζ(s))` with `∫_0^{log X} ψ(e^t) e^{-st} dt`.
///
/// `pass` holds when the difference is within the tail certificate
/// (`ψ(x) <= 1.04 x`) plus the evaluation errors of both sides.
pub fn crosscheck<R: Real>(
    s: ComplexPoint<R>,
    x_max: R,
    table: &PrimeTable,
    params: &EmParams,
) -> Result<CrosscheckOutcome<R>, PntError> {
    require_right_of_one(s)?;
    let rho = build_rho(x_max, table)?;
    crosscheck_rho(s, &rho, params)
}

/// [`crosscheck`] against a prebuilt `ρ`; the horizon is `ρ.t_max()`.
pub fn crosscheck_rho<R: Real>(
    s: ComplexPoint<R>,
    rho: &StepFunction<R>,
    params: &EmParams,
) -> Result<CrosscheckOutcome<R>, PntError> {
    require_right_of_one(s)?;
    let horizon = rho.t_max();
    let zeta = log_deriv_f_estimate(s, params)?;
    let laplace = laplace_truncated_terms(rho, s, horizon)?;
    let tail = tail_bound(R::lit(CHEBYSHEV_C), R::one(), s, horizon)?;
    let laplace_error = R::lit(16.0) * R::epsilon() * laplace.abs_mass;
    let abs_diff = (zeta.value - laplace.value).norm();
    let pass = abs_diff <= tail.bound + zeta.error + laplace_error;
    Ok(CrosscheckOutcome {
        row: CrosscheckRow {
            sigma: s.re,
            t: s.im,
            zeta_side_re: zeta.value.re,
            zeta_side_im: zeta.value.im,
            laplace_re: laplace.value.re,
            laplace_im: laplace.value.im,
            tail_bound: tail.bound,
            abs_diff,
            pass,
        },
        tail,
        zeta_error: zeta.error,
        laplace_error,
    })
}

/// `max ψ(x)/x` over `[2, X]`, attained just after a jump.
pub fn chebyshev_max_ratio<R: Real>(psi: &PsiJumpList<R>) -> R {
    psi.jumps()
        .iter()
        .zip(psi.cumulative())
        .map(|(j, &cum)| cum / R::from_count(j.location))
        .fold(R::zero(), R::max)
}

/// Third route to `F(s)`: `(1/s) Σ_{n <= X} Λ(n) n^{-s}`.
///
/// The reported error bounds the omitted `Σ_{n > X}` using `ψ(x) <= 1.04 x`:
/// `1.04 σ X^{1-σ} / ((σ - 1)|s|)`.
pub fn dirichlet_log_deriv<R: Real>(s: ComplexPoint<R>, psi: &PsiJumpList<R>) -> Result<Estimate<R>, PntError> {
    require_right_of_one(s)?;
    let mut acc = CompensatedComplexSum::new();
    for j in psi.jumps() {
        let ln_n = R::from_count(j.location).ln();
        acc.add((-s * ln_n).exp() * j.weight);
    }
    let x = psi.cutoff().floor();
    let sigma = s.re;
    let tail = R::lit(CHEBYSHEV_C) * sigma * x.powf(R::one() - sigma) / ((sigma - R::one()) * s.norm());
    let value = acc.value() / s;
    Ok(Estimate {
        value,
        error: tail + R::lit(16.0) * R::epsilon() * value.norm() * R::from_usize(psi.len().max(1)).unwrap().sqrt(),
    })
}

/// `∫_a^b (x - c)/x² dx = log(b/a) - c (b - a)/(ab)`.
fn above_part<R: Real>(a: R, b: R, c: R) -> R {
    let w = b - a;
    (w / a).ln_1p() - c * w / (a * b)
}

/// `∫_a^b |c - x| / x² dx` in closed form.
fn abs_piece<R: Real>(a: R, b: R, c: R) -> R {
    if c <= a {
        above_part(a, b, c)
    } else if c >= b {
        -above_part(a, b, c)
    } else {
        -above_part(a, c, c) + above_part(c, b, c)
    }
}

/// `K_A = ∫_1^A |ψ(x) - x| / x² dx`.
pub fn k_a_integral<R: Real>(a_upper: R, x_max: R, table: &PrimeTable) -> Result<R, PntError> {
    check_k_a_bounds(a_upper, x_max)?;
    let psi = psi_jumps(x_max, table)?;
    k_a_from_psi(a_upper, &psi, 1)
}

fn check_k_a_bounds<R: Real>(a_upper: R, x_max: R) -> Result<(), PntError> {
    if !(a_upper >= R::one()) {
        return Err(PntError::Domain {
            what: "A",
            value: a_upper.as_f64(),
            expected: "A >= 1",
        });
    }
    if !(a_upper <= x_max) {
        return Err(PntError::Domain {
            what: "A",
            value: a_upper.as_f64(),
            expected: "A <= X",
        });
    }
    Ok(())
}

/// `K_A` with every constancy interval of ψ cut into `pieces` equal parts.
///
/// The closed forms are additive, so the result is independent of `pieces`
/// up to rounding.
pub fn k_a_from_psi<R: Real>(a_upper: R, psi: &PsiJumpList<R>, pieces: usize) -> Result<R, PntError> {
    check_k_a_bounds(a_upper, psi.cutoff())?;
    if pieces == 0 {
        return Err(PntError::Domain {
            what: "pieces",
            value: 0.0,
            expected: "pieces >= 1",
        });
    }
    let k = psi.count_through(a_upper);
    let mut acc = CompensatedSum::new();
    let mut add_interval = |a: R, b: R, c: R| {
        if b <= a {
            return;
        }
        let n = R::from_usize(pieces).unwrap();
        let mut lo = a;
        for i in 1..=pieces {
            let hi = if i == pieces {
                b
            } else {
                a + (b - a) * R::from_usize(i).unwrap() / n
            };
            acc.add(abs_piece(lo, hi, c));
            lo = hi;
        }
    };
    let mut left = R::one();
    let mut value = R::zero();
    for (jump, &cum) in psi.jumps()[..k].iter().zip(psi.cumulative()) {
        let loc = R::from_count(jump.location);
        add_interval(left, loc, value);
        left = loc;
        value = cum;
    }
    add_interval(left, a_upper, value);
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineLimitRow<R> {
    pub sigma: R,
    pub tau: R,
    pub scaled_re: R,
    pub scaled_im: R,
}

/// Rows `(σ, (σ - 1) F(σ + iτ))` for a sequence `σ ↓ 1`.
pub fn scaled_line_limits<R: Real>(
    tau: R,
    sigma_seq: &[R],
    params: &EmParams,
) -> Result<Vec<LineLimitRow<R>>, PntError> {
    if let Some(&bad) = sigma_seq.iter().find(|&&s| !(s > R::one())) {
        return Err(PntError::Domain {
            what: "sigma",
            value: bad.as_f64(),
            expected: "sigma > 1",
        });
    }
    if let Some(i) = sigma_seq.windows(2).position(|w| !(w[0] > w[1])) {
        return Err(PntError::Domain {
            what: "sigma",
            value: sigma_seq[i + 1].as_f64(),
            expected: "strictly decreasing toward 1",
        });
    }
    sigma_seq
        .par_iter()
        .map(|&sigma| {
            let f = log_deriv_f_estimate(Complex::new(sigma, tau), params)?.value;
            let scaled = f * (sigma - R::one());
            Ok(LineLimitRow {
                sigma,
                tau,
                scaled_re: scaled.re,
                scaled_im: scaled.im,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow<R> {
    pub x: R,
    pub psi: R,
    pub psi_over_x: R,
    pub pi: u64,
    pub pi_logx_over_x: R,
}

/// ψ(x)/x and π(x) log x / x at each `x`.
pub fn convergence_table<R: Real>(x_values: &[R], table: &PrimeTable) -> Result<Vec<ConvergenceRow<R>>, PntError> {
    let Some(x_top) = x_values
        .iter()
        .copied()
        .fold(None, |m: Option<R>, x| Some(m.map_or(x, |m| m.max(x))))
    else {
        return Ok(Vec::new());
    };
    let psi = psi_jumps(x_top.max(R::one()), table)?;
    convergence_rows(x_values, &psi, table)
}

pub fn convergence_rows<R: Real>(
    x_values: &[R],
    psi: &PsiJumpList<R>,
    table: &PrimeTable,
) -> Result<Vec<ConvergenceRow<R>>, PntError> {
    x_values
        .iter()
        .map(|&x| {
            if !(x >= R::one()) {
                return Err(PntError::Domain {
                    what: "x",
                    value: x.as_f64(),
                    expected: "x >= 1",
                });
            }
            let psi_x = psi.psi(x)?;
            let pi = pi_count(x, table)?;
            Ok(ConvergenceRow {
                x,
                psi: psi_x,
                psi_over_x: psi_x / x,
                pi,
                pi_logx_over_x: R::from_count(pi) * x.ln() / x,
            })
        })
        .collect()
}

/// Decades `10^2, 10^3, ...` up to and including `x_max` when it is a decade.
pub fn decade_grid<R: Real>(x_max: R) -> Vec<R> {
    let mut out = Vec::new();
    let mut x = R::lit(100.0);
    while x <= x_max {
        out.push(x);
        x = x * R::lit(10.0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaRow<R> {
    pub a: R,
    pub k_a: R,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineScanSummary<R> {
    pub t_lo: R,
    pub t_hi: R,
    pub step: R,
    pub points: usize,
    pub argmin_t: R,
    pub min_abs: R,
}

/// Everything the pipeline reports for one sieve reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PntReport<R> {
    pub x_max: R,
    pub crosscheck: Vec<CrosscheckRow<R>>,
    pub convergence: Vec<ConvergenceRow<R>>,
    pub k_a: Vec<KaRow<R>>,
    pub line_limits: Vec<LineLimitRow<R>>,
    pub line_scan: Vec<LineScanSummary<R>>,
    /// `max ψ(x)/x` over the sieved range; the tail certificates need it `<= 1.04`.
    pub chebyshev_max_ratio: R,
    pub notes: Vec<String>,
}

impl<R: Real> PntReport<R> {
    pub fn all_pass(&self) -> bool {
        self.crosscheck.iter().all(|r| r.pass) && self.chebyshev_max_ratio <= R::lit(CHEBYSHEV_C)
    }
}

/// Default scan window on the 1-line.
pub const LINE_SCAN_WINDOW: (f64, f64, f64) = (0.5, 50.0, 0.01);

/// Ordinates of the default scaled line limits.
pub const LINE_LIMIT_TAUS: [f64; 3] = [0.0, 5.0, 14.1347];

/// Assembles the full report for a sieve table of reach `x_max`.
pub fn pnt_report<R: Real>(x_max: R, table: &PrimeTable, params: &EmParams) -> Result<PntReport<R>, PntError> {
    let psi = psi_jumps(x_max, table)?;
    let rho = rho_from_psi(&psi)?;

    let crosscheck = CROSSCHECK_POINTS
        .par_iter()
        .map(|&(sigma, t)| crosscheck_rho(Complex::new(R::lit(sigma), R::lit(t)), &rho, params).map(|o| o.row))
        .collect::<Result<Vec<_>, _>>()?;

    let decades = decade_grid(x_max);
    let convergence = convergence_rows(&decades, &psi, table)?;
    let k_a = decades
        .iter()
        .map(|&a| k_a_from_psi(a, &psi, 1).map(|k_a| KaRow { a, k_a }))
        .collect::<Result<Vec<_>, _>>()?;

    let sigmas: Vec<R> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&d| R::one() + R::lit(d)).collect();
    let mut line_limits = Vec::new();
    for tau in LINE_LIMIT_TAUS {
        line_limits.extend(scaled_line_limits(R::lit(tau), &sigmas, params)?);
    }

    let (lo, hi, step) = LINE_SCAN_WINDOW;
    let scan = line_min_scan(R::lit(lo), R::lit(hi), R::lit(step), params)?;
    let line_scan = vec![LineScanSummary {
        t_lo: R::lit(lo),
        t_hi: R::lit(hi),
        step: scan.step,
        points: scan.points,
        argmin_t: scan.argmin_t,
        min_abs: scan.min_abs,
    }];

    let chebyshev_max_ratio = chebyshev_max_ratio(&psi);
    let notes = vec![
        "line_scan is a finite-grid minimum of |zeta(1+it)|: numerical evidence, not a proof of zero-freeness".to_string(),
        "pole behaviour is verified at s = 1 only; the hypothesis of no other pole on sigma >= 1 is not finitely checkable".to_string(),
        format!("tail certificates assume psi(x) <= {CHEBYSHEV_C} x"),
    ];
    Ok(PntReport {
        x_max,
        crosscheck,
        convergence,
        k_a,
        line_limits,
        line_scan,
        chebyshev_max_ratio,
        notes,
    })
}
