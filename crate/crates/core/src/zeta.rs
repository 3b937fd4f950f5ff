//! ζ(s), ζ′(s) and `F(s) = -ζ′(s) / (s ζ(s))` on `σ > 0` by Euler–Maclaurin
//! summation.
//!
//! ```text
//! ζ(s) = Σ_{n<N} n^{-s} + N^{1-s}/(s-1) + N^{-s}/2
//!        + Σ_{k=1}^{M} B_{2k}/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1} + R_{N,M}
//! ```
//!
//! ζ′ is obtained by differentiating every term above in closed form, so the
//! only approximation in either value is the truncation remainder `R_{N,M}`.

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Real;
use crate::sum::{CompensatedComplexSum, CompensatedSum};

/// `|ζ(s)|` below this refuses to form `ζ′/ζ`.
pub const NEAR_ZERO_GUARD: f64 = 1e-12;

/// Even Bernoulli numbers `B_2, B_4, ..., B_32` as exact rationals.
///
/// `B_32` is only used to estimate the remainder when `M = 15`.
const BERNOULLI_EVEN: [(i64, i64); 16] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
    (854513, 138),
    (-236364091, 2730),
    (8553103, 6),
    (-23749461029, 870),
    (8615841276005, 14322),
    (-7709321041217, 510),
];

pub const MAX_CORRECTIONS: usize = 15;
pub const DEFAULT_CORRECTIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZetaError {
    #[error("pole at s = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("sigma = {sigma} is outside the evaluated region sigma > 0")]
    OutOfRegion { sigma: f64 },
    #[error("|zeta(s)| = {abs:e} at s = {re} + {im}i is below the near-zero guard")]
    NearZero { re: f64, im: f64, abs: f64 },
    #[error("invalid Euler-Maclaurin parameters: {0}")]
    InvalidParams(String),
    #[error("{what} = {value} is outside the admissible domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
}

/// Euler–Maclaurin settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmParams {
    /// Series cutoff `N`; `None` picks `max(20, ⌈10 + 2|t|⌉)` per point.
    pub cutoff: Option<usize>,
    /// Number of Bernoulli correction terms `M`.
    pub corrections: usize,
}

impl Default for EmParams {
    fn default() -> Self {
        Self {
            cutoff: None,
            corrections: DEFAULT_CORRECTIONS,
        }
    }
}

impl EmParams {
    pub fn fixed(cutoff: usize, corrections: usize) -> Self {
        Self {
            cutoff: Some(cutoff),
            corrections,
        }
    }

    /// The cutoff actually used at `s`.
    pub fn cutoff_at<R: Real>(&self, s: Complex<R>) -> usize {
        self.cutoff.unwrap_or_else(|| {
            let auto = (R::lit(10.0) + R::lit(2.0) * s.im.abs())
                .ceil()
                .to_usize()
                .unwrap_or(usize::MAX);
            auto.max(20)
        })
    }

    fn validate(&self) -> Result<(), ZetaError> {
        if let Some(n) = self.cutoff {
            if n < 2 {
                return Err(ZetaError::InvalidParams(format!("cutoff N = {n} must be at least 2")));
            }
        }
        if !(1..=MAX_CORRECTIONS).contains(&self.corrections) {
            return Err(ZetaError::InvalidParams(format!(
                "corrections M = {} must lie in 1..={MAX_CORRECTIONS}",
                self.corrections
            )));
        }
        Ok(())
    }
}

/// A value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<R> {
    pub value: Complex<R>,
    pub error: R,
}

/// ζ and ζ′ at one point, sharing the power table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaPair<R> {
    pub zeta: Estimate<R>,
    pub zeta_prime: Estimate<R>,
}

fn check_point<R: Real>(s: Complex<R>) -> Result<(), ZetaError> {
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(ZetaError::Domain {
            what: "s",
            value: s.re.as_f64(),
            expected: "finite",
        });
    }
    if s.re == R::one() && s.im == R::zero() {
        return Err(ZetaError::Pole { re: 1.0, im: 0.0 });
    }
    if !(s.re > R::zero()) {
        return Err(ZetaError::OutOfRegion { sigma: s.re.as_f64() });
    }
    Ok(())
}

fn bernoulli_over_factorial<R: Real>(k: usize) -> R {
    let (num, den) = BERNOULLI_EVEN[k - 1];
    let mut fact = R::one();
    for j in 2..=2 * k {
        fact = fact * R::from_usize(j).unwrap();
    }
    R::from_i64(num).unwrap() / R::from_i64(den).unwrap() / fact
}

/// Evaluates ζ(s) and ζ′(s) together.
pub fn zeta_pair<R: Real>(s: Complex<R>, params: &EmParams) -> Result<ZetaPair<R>, ZetaError> {
    params.validate()?;
    check_point(s)?;
    let n_cut = params.cutoff_at(s);
    let m = params.corrections;
    let one = Complex::new(R::one(), R::zero());
    let eps = R::epsilon();
    let s_abs = s.norm();

    let mut z = CompensatedComplexSum::new();
    let mut dz = CompensatedComplexSum::new();
    // Σ |term| · (2 + |s| ln n), an envelope for rounding in the powers
    let mut round_z = CompensatedSum::new();
    let mut round_dz = CompensatedSum::new();

    for n in 1..n_cut {
        let ln_n = R::from_usize(n).unwrap().ln();
        let p = (-s * ln_n).exp();
        let weight = R::lit(2.0) + s_abs * ln_n;
        z.add(p);
        dz.add(-p * ln_n);
        round_z.add(p.norm() * weight);
        round_dz.add(p.norm() * ln_n * weight);
    }

    let big_n = R::from_usize(n_cut).unwrap();
    let ln_big = big_n.ln();
    let n_pow = (-s * ln_big).exp(); // N^{-s}
    let n_pow_1 = n_pow * big_n; // N^{1-s}
    let sm1 = s - one;

    let integral = n_pow_1 / sm1;
    let d_integral = -integral * ln_big - integral / sm1;
    let half = n_pow * R::lit(0.5);
    let d_half = -half * ln_big;
    let weight = R::lit(2.0) + s_abs * ln_big;
    for (t, dt) in [(integral, d_integral), (half, d_half)] {
        z.add(t);
        dz.add(dt);
        round_z.add(t.norm() * weight);
        round_dz.add(dt.norm() * weight);
    }

    // P_k = s(s+1)…(s+2k-2) and its derivative, advanced two factors per k
    let mut poly = s;
    let mut d_poly = one;
    // N^{-s-2k+1}
    let mut scale = n_pow / big_n;
    let inv_n2 = R::one() / (big_n * big_n);
    let mut omitted = (Complex::new(R::zero(), R::zero()), Complex::new(R::zero(), R::zero()));
    for k in 1..=m + 1 {
        let coef = bernoulli_over_factorial::<R>(k);
        let term = poly * scale * coef;
        let d_term = (d_poly - poly * ln_big) * scale * coef;
        if k <= m {
            z.add(term);
            dz.add(d_term);
            round_z.add(term.norm() * weight);
            round_dz.add(d_term.norm() * weight);
        } else {
            omitted = (term, d_term);
        }
        for j in [2 * k - 1, 2 * k] {
            let f = s + R::from_usize(j).unwrap();
            d_poly = d_poly * f + poly;
            poly = poly * f;
        }
        scale = scale * inv_n2;
    }

    // remainder of the Euler–Maclaurin expansion for complex s is bounded by
    // the first omitted term times |s+2M+1| / (σ+2M+1)
    let two_m1 = R::from_usize(2 * m + 1).unwrap();
    let factor = (s + two_m1).norm() / (s.re + two_m1);
    let floor = R::lit(4.0) * eps;
    Ok(ZetaPair {
        zeta: Estimate {
            value: z.value(),
            error: omitted.0.norm() * factor + floor * round_z.value(),
        },
        zeta_prime: Estimate {
            value: dz.value(),
            error: omitted.1.norm() * factor + floor * round_dz.value(),
        },
    })
}

/// ζ(s) for `σ > 0`, `s ≠ 1`.
pub fn zeta_em<R: Real>(s: Complex<R>, params: &EmParams) -> Result<Estimate<R>, ZetaError> {
    Ok(zeta_pair(s, params)?.zeta)
}

/// ζ′(s) for `σ > 0`, `s ≠ 1`.
pub fn zeta_prime_em<R: Real>(s: Complex<R>, params: &EmParams) -> Result<Estimate<R>, ZetaError> {
    Ok(zeta_pair(s, params)?.zeta_prime)
}

/// `F(s) = -ζ′(s) / (s ζ(s))`.
pub fn log_deriv_f<R: Real>(s: Complex<R>, params: &EmParams) -> Result<Complex<R>, ZetaError> {
    Ok(log_deriv_f_estimate(s, params)?.value)
}

/// `F(s)` with the error of ζ and ζ′ propagated to first order.
pub fn log_deriv_f_estimate<R: Real>(s: Complex<R>, params: &EmParams) -> Result<Estimate<R>, ZetaError> {
    if s.re == R::zero() && s.im == R::zero() {
        return Err(ZetaError::Pole { re: 0.0, im: 0.0 });
    }
    let pair = zeta_pair(s, params)?;
    let zeta_abs = pair.zeta.value.norm();
    if zeta_abs < R::lit(NEAR_ZERO_GUARD) {
        return Err(ZetaError::NearZero {
            re: s.re.as_f64(),
            im: s.im.as_f64(),
            abs: zeta_abs.as_f64(),
        });
    }
    let denom = s * pair.zeta.value;
    let value = -pair.zeta_prime.value / denom;
    let error = pair.zeta_prime.error / denom.norm()
        + pair.zeta_prime.value.norm() * pair.zeta.error / (s.norm() * zeta_abs * zeta_abs)
        + R::lit(4.0) * R::epsilon() * value.norm();
    Ok(Estimate { value, error })
}

/// Grid minimum of `|ζ(1 + it)|`.
///
/// This is numerical evidence of zero-freeness on the sampled grid only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineScan<R> {
    pub argmin_t: R,
    pub min_abs: R,
    pub step: R,
    pub points: usize,
}

/// Grid `t_lo + i·step` for `i = 0, ..., ⌊(t_hi - t_lo)/step⌋`.
pub fn line_grid<R: Real>(t_lo: R, t_hi: R, step: R) -> Result<Vec<R>, ZetaError> {
    if !(t_lo > R::zero()) {
        return Err(ZetaError::Domain {
            what: "t_lo",
            value: t_lo.as_f64(),
            expected: "t_lo > 0",
        });
    }
    if !(t_hi >= t_lo) {
        return Err(ZetaError::Domain {
            what: "t_hi",
            value: t_hi.as_f64(),
            expected: "t_hi >= t_lo",
        });
    }
    if !(step > R::zero()) {
        return Err(ZetaError::Domain {
            what: "step",
            value: step.as_f64(),
            expected: "step > 0",
        });
    }
    let count = ((t_hi - t_lo) / step + R::lit(1e-9)).floor().to_usize().unwrap_or(0) + 1;
    Ok((0..count).map(|i| t_lo + R::from_usize(i).unwrap() * step).collect())
}

/// `|ζ(1 + it)|` at every grid point, in grid order.
pub fn line_values<R: Real>(t_lo: R, t_hi: R, step: R, params: &EmParams) -> Result<Vec<(R, R)>, ZetaError> {
    let grid = line_grid(t_lo, t_hi, step)?;
    grid.par_iter()
        .map(|&t| zeta_em(Complex::new(R::one(), t), params).map(|z| (t, z.value.norm())))
        .collect()
}

pub fn line_min_scan<R: Real>(t_lo: R, t_hi: R, step: R, params: &EmParams) -> Result<LineScan<R>, ZetaError> {
    let values = line_values(t_lo, t_hi, step, params)?;
    let (argmin_t, min_abs) =
        values.iter().copied().fold(
            (R::nan(), R::infinity()),
            |best, (t, v)| if v < best.1 { (t, v) } else { best },
        );
    Ok(LineScan {
        argmin_t,
        min_abs,
        step,
        points: values.len(),
    })
}
