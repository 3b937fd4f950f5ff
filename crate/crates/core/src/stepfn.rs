//! Right-continuous, nondecreasing pure-jump functions and their truncated
//! Laplace / Laplace–Stieltjes transforms.
//!
//! A [`StepFunction`] is `ρ(t) = Σ_{t_j <= t} h_j` with `0 < t_1 < ... < t_m`
//! and `h_j > 0`, so `ρ(0) = 0` and the total variation of `ρ` on `[0, T]` is
//! `ρ(T)`. On each constancy interval `[a, b)` with value `c` the Laplace
//! integral has the closed form `c · e^{-sa} · (1 - e^{-s(b-a)}) / s`, so every
//! transform below is an exact finite sum up to rounding. Anything involving
//! `[T, ∞)` is reported together with a [`TailCertificate`].

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::sum::{CompensatedComplexSum, CompensatedSum};

/// Evaluation point `s = σ + it`.
pub type ComplexPoint<R> = Complex<R>;

/// Builds `σ + it`.
pub fn point<R: Real>(sigma: R, t: R) -> ComplexPoint<R> {
    Complex::new(sigma, t)
}

/// Default number of uniform points added to the jump times when measuring
/// total variation.
pub const DEFAULT_TV_GRID: usize = 1 << 10;

/// Below this value of `|s| · width` the interval factor uses a short series.
const SERIES_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("jump times must be finite and strictly increasing (index {index})")]
    Unsorted { index: usize },
    #[error("jump time {time} must be strictly positive so that rho(0) = 0")]
    NonPositiveTime { time: f64 },
    #[error("jump height {height} at index {index} must be finite and positive")]
    BadHeight { index: usize, height: f64 },
    #[error("last jump at {last} lies beyond t_max = {t_max}")]
    BeyondDomain { last: f64, t_max: f64 },
    #[error("{what} = {value} is outside the admissible domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("no tail certificate: sigma = {sigma} must exceed the growth rate alpha = {alpha}")]
    TailDiverges { sigma: f64, alpha: f64 },
    #[error("transform has a pole at s = 0")]
    Pole,
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for StepError {
    fn from(e: csv::Error) -> Self {
        StepError::Csv(e.to_string())
    }
}

/// Nonnegative, nondecreasing, right-continuous pure-jump function on `[0, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<R> {
    times: Vec<R>,
    heights: Vec<R>,
    cumulative: Vec<R>,
    t_max: R,
}

impl<R: Real> StepFunction<R> {
    /// Builds a step function from `(jump_time, jump_height)` pairs sorted by time.
    pub fn new(jumps: impl IntoIterator<Item = (R, R)>, t_max: R) -> Result<Self, StepError> {
        let (times, heights): (Vec<R>, Vec<R>) = jumps.into_iter().unzip();
        Self::from_parts(times, heights, t_max)
    }

    pub fn empty(t_max: R) -> Self {
        Self {
            times: Vec::new(),
            heights: Vec::new(),
            cumulative: Vec::new(),
            t_max,
        }
    }

    fn from_parts(times: Vec<R>, heights: Vec<R>, t_max: R) -> Result<Self, StepError> {
        if t_max.is_nan() || t_max < R::zero() {
            return Err(StepError::Domain {
                what: "t_max",
                value: t_max.as_f64(),
                expected: "t_max >= 0",
            });
        }
        if let Some(&first) = times.first() {
            if !(first > R::zero()) {
                return Err(StepError::NonPositiveTime { time: first.as_f64() });
            }
        }
        for (index, w) in times.windows(2).enumerate() {
            if !(w[0] < w[1]) || !w[1].is_finite() {
                return Err(StepError::Unsorted { index: index + 1 });
            }
        }
        for (index, &h) in heights.iter().enumerate() {
            if !(h > R::zero()) || !h.is_finite() {
                return Err(StepError::BadHeight {
                    index,
                    height: h.as_f64(),
                });
            }
        }
        if let Some(&last) = times.last() {
            if last > t_max {
                return Err(StepError::BeyondDomain {
                    last: last.as_f64(),
                    t_max: t_max.as_f64(),
                });
            }
        }
        let mut acc = CompensatedSum::new();
        let cumulative = heights
            .iter()
            .map(|&h| {
                acc.add(h);
                acc.value()
            })
            .collect();
        Ok(Self {
            times,
            heights,
            cumulative,
            t_max,
        })
    }

    /// Step function agreeing with a nondecreasing `f` (with `f(0) = 0`) at the
    /// grid points `k · step`, `k = 1, ..., ⌊t_max / step⌋`.
    ///
    /// Grid points where `f` does not increase contribute no jump.
    pub fn sample_nondecreasing(f: impl Fn(R) -> R, step: R, t_max: R) -> Result<Self, StepError> {
        if !(step > R::zero()) {
            return Err(StepError::Domain {
                what: "step",
                value: step.as_f64(),
                expected: "step > 0",
            });
        }
        let n = (t_max / step).floor().to_usize().unwrap_or(0);
        let mut jumps = Vec::with_capacity(n);
        let mut prev = f(R::zero());
        for k in 1..=n {
            let t = R::from_usize(k).unwrap() * step;
            let v = f(t);
            if v > prev {
                jumps.push((t, v - prev));
            }
            prev = v;
        }
        Self::new(jumps, t_max)
    }

    pub fn t_max(&self) -> R {
        self.t_max
    }

    pub fn jump_times(&self) -> &[R] {
        &self.times
    }

    pub fn jump_heights(&self) -> &[R] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `lim_{t→∞} ρ(t)` when `ρ` is read as constant after its last jump.
    pub fn total_mass(&self) -> R {
        self.cumulative.last().copied().unwrap_or_else(R::zero)
    }

    /// Number of jumps at times `<= t`.
    fn count_through(&self, t: R) -> usize {
        self.times.partition_point(|&tj| tj <= t)
    }

    fn check_horizon(&self, what: &'static str, t: R) -> Result<(), StepError> {
        if !(t >= R::zero() && t <= self.t_max) {
            return Err(StepError::Domain {
                what,
                value: t.as_f64(),
                expected: "0 <= value <= t_max",
            });
        }
        Ok(())
    }

    /// `ρ(t) = Σ_{t_j <= t} h_j`.
    pub fn eval(&self, t: R) -> Result<R, StepError> {
        self.check_horizon("t", t)?;
        Ok(self.value_through(self.count_through(t)))
    }

    fn value_through(&self, k: usize) -> R {
        if k == 0 {
            R::zero()
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Constancy intervals `(start, width, value)` covering `[t_1, horizon]`.
    ///
    /// `[0, t_1)` carries the value zero and is omitted.
    pub(crate) fn intervals(&self, horizon: R) -> impl Iterator<Item = (R, R, R)> + '_ {
        let k = self.count_through(horizon);
        (0..k).map(move |j| {
            let a = self.times[j];
            let b = if j + 1 < k { self.times[j + 1] } else { horizon };
            (a, b - a, self.cumulative[j])
        })
    }

    /// Jump union; heights at coinciding times add. The domain is the
    /// intersection of the two domains.
    pub fn merge(&self, other: &Self) -> Result<Self, StepError> {
        let t_max = self.t_max.min(other.t_max);
        let mut jumps: Vec<(R, R)> = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let take_self = j >= other.len() || (i < self.len() && self.times[i] <= other.times[j]);
            let (t, h) = if take_self {
                i += 1;
                (self.times[i - 1], self.heights[i - 1])
            } else {
                j += 1;
                (other.times[j - 1], other.heights[j - 1])
            };
            match jumps.last_mut() {
                Some(last) if last.0 == t => last.1 = last.1 + h,
                _ => jumps.push((t, h)),
            }
        }
        jumps.retain(|&(t, _)| t <= t_max);
        Self::new(jumps, t_max)
    }

    /// Writes the jumps as `t,h` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), StepError> {
        let mut w = csv::Writer::from_writer(writer);
        for (&t, &h) in self.times.iter().zip(&self.heights) {
            w.serialize(JumpRecord {
                t: t.as_f64(),
                h: h.as_f64(),
            })?;
        }
        if self.is_empty() {
            w.write_record(["t", "h"])?;
        }
        w.flush().map_err(|e| StepError::Csv(e.to_string()))
    }

    /// Reads `t,h` CSV. The domain defaults to the last jump time.
    pub fn read_csv<Rd: Read>(reader: Rd, t_max: Option<R>) -> Result<Self, StepError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut jumps = Vec::new();
        for rec in r.deserialize::<JumpRecord>() {
            let rec = rec?;
            jumps.push((R::lit(rec.t), R::lit(rec.h)));
        }
        let t_max = t_max.unwrap_or_else(|| jumps.last().map_or(R::zero(), |j| j.0));
        Self::new(jumps, t_max)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JumpRecord {
    t: f64,
    h: f64,
}

/// `e^z - 1` without cancellation near `z = 0`.
pub(crate) fn complex_expm1<R: Real>(z: Complex<R>) -> Complex<R> {
    let (sin_y, cos_y) = z.im.sin_cos();
    let em1 = z.re.exp_m1();
    let half = (z.im * R::lit(0.5)).sin();
    Complex::new(em1 * cos_y - R::lit(2.0) * half * half, z.re.exp() * sin_y)
}

/// `∫_0^w e^{-su} du`.
pub(crate) fn interval_kernel<R: Real>(s: Complex<R>, w: R) -> Complex<R> {
    if w == R::zero() {
        return Complex::new(R::zero(), R::zero());
    }
    if s.re == R::zero() && s.im == R::zero() {
        return Complex::new(w, R::zero());
    }
    let z = s * w;
    if z.norm() < R::lit(SERIES_THRESHOLD) {
        let one = Complex::new(R::one(), R::zero());
        return (one - z * R::lit(0.5) + z * z / R::lit(6.0)) * w;
    }
    -complex_expm1(-z) / s
}

/// `∫_a^{a+w} e^{-st} dt = e^{-sa} · ∫_0^w e^{-su} du`.
pub(crate) fn interval_factor<R: Real>(s: Complex<R>, a: R, w: R) -> Complex<R> {
    (-s * a).exp() * interval_kernel(s, w)
}

/// Value of a finite transform sum together with the l1 mass of its summands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermSum<R> {
    pub value: Complex<R>,
    pub abs_mass: R,
}

/// `∫_0^T ρ(t) e^{-st} dt`, exact per constancy interval.
///
/// At `s = 0` this is `∫_0^T ρ(t) dt`.
pub fn laplace_truncated<R: Real>(
    f: &StepFunction<R>,
    s: ComplexPoint<R>,
    horizon: R,
) -> Result<Complex<R>, StepError> {
    Ok(laplace_truncated_terms(f, s, horizon)?.value)
}

pub fn laplace_truncated_terms<R: Real>(
    f: &StepFunction<R>,
    s: ComplexPoint<R>,
    horizon: R,
) -> Result<TermSum<R>, StepError> {
    f.check_horizon("T", horizon)?;
    let mut acc = CompensatedComplexSum::new();
    let mut mass = CompensatedSum::new();
    for (a, w, c) in f.intervals(horizon) {
        let term = interval_factor(s, a, w) * c;
        mass.add(term.norm());
        acc.add(term);
    }
    Ok(TermSum {
        value: acc.value(),
        abs_mass: mass.value(),
    })
}

/// `Σ_{t_j <= T} h_j e^{-s t_j}`, the Stieltjes integral `∫_0^T e^{-st} dρ(t)`.
pub fn laplace_stieltjes_truncated<R: Real>(
    f: &StepFunction<R>,
    s: ComplexPoint<R>,
    horizon: R,
) -> Result<Complex<R>, StepError> {
    Ok(laplace_stieltjes_terms(f, s, horizon)?.value)
}

pub fn laplace_stieltjes_terms<R: Real>(
    f: &StepFunction<R>,
    s: ComplexPoint<R>,
    horizon: R,
) -> Result<TermSum<R>, StepError> {
    f.check_horizon("T", horizon)?;
    let k = f.count_through(horizon);
    let mut acc = CompensatedComplexSum::new();
    let mut mass = CompensatedSum::new();
    for (&t, &h) in f.times[..k].iter().zip(&f.heights[..k]) {
        let term = (-s * t).exp() * h;
        mass.add(term.norm());
        acc.add(term);
    }
    Ok(TermSum {
        value: acc.value(),
        abs_mass: mass.value(),
    })
}

/// `L_ρ(s)` on `[0, ∞)` for `ρ` held constant after its last jump:
/// the truncated transform up to the last jump plus `ρ(∞) e^{-s t_m} / s`.
pub fn laplace_constant_extension<R: Real>(f: &StepFunction<R>, s: ComplexPoint<R>) -> Result<Complex<R>, StepError> {
    if !(s.re > R::zero()) {
        if s.re == R::zero() && s.im == R::zero() {
            return Err(StepError::Pole);
        }
        return Err(StepError::Domain {
            what: "sigma",
            value: s.re.as_f64(),
            expected: "sigma > 0",
        });
    }
    let Some(&last) = f.times.last() else {
        return Ok(Complex::new(R::zero(), R::zero()));
    };
    let body = laplace_truncated(f, s, last)?;
    Ok(body + (-s * last).exp() * f.total_mass() / s)
}

/// Outcome of checking `L*_T(s) = ρ(T) e^{-sT} + s L_T(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartsIdentity<R> {
    /// `|L*_T(s) - ρ(T) e^{-sT} - s L_T(s)|`.
    pub residual: R,
    /// l1 mass of every summand on both sides.
    pub magnitude: R,
}

impl<R: Real> PartsIdentity<R> {
    pub fn relative(&self) -> R {
        self.residual / (R::one() + self.magnitude)
    }
}

/// Integration by parts for the truncated transforms, boundary term kept.
pub fn parts_identity_residual<R: Real>(
    f: &StepFunction<R>,
    s: ComplexPoint<R>,
    horizon: R,
) -> Result<PartsIdentity<R>, StepError> {
    let stieltjes = laplace_stieltjes_terms(f, s, horizon)?;
    let laplace = laplace_truncated_terms(f, s, horizon)?;
    let boundary = (-s * horizon).exp() * f.eval(horizon)?;
    let residual = (stieltjes.value - boundary - s * laplace.value).norm();
    Ok(PartsIdentity {
        residual,
        magnitude: stieltjes.abs_mass + boundary.norm() + s.norm() * laplace.abs_mass,
    })
}

/// Rigorous bound on a discarded Laplace tail `|∫_T^∞ ρ(t) e^{-st} dt|`
/// under the growth envelope `ρ(t) <= C e^{αt}` on `[T, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate<R> {
    pub horizon: R,
    pub sigma: R,
    pub bound: R,
    pub growth_alpha: R,
    pub growth_c: R,
}

/// `C e^{(α-σ)T} / (σ - α)`; requires `σ > α`.
pub fn tail_bound<R: Real>(
    growth_c: R,
    alpha: R,
    s: ComplexPoint<R>,
    horizon: R,
) -> Result<TailCertificate<R>, StepError> {
    if !(growth_c >= R::zero()) {
        return Err(StepError::Domain {
            what: "C",
            value: growth_c.as_f64(),
            expected: "C >= 0",
        });
    }
    if !(s.re > alpha) {
        return Err(StepError::TailDiverges {
            sigma: s.re.as_f64(),
            alpha: alpha.as_f64(),
        });
    }
    let gap = s.re - alpha;
    Ok(TailCertificate {
        horizon,
        sigma: s.re,
        bound: growth_c * (-gap * horizon).exp() / gap,
        growth_alpha: alpha,
        growth_c,
    })
}

/// Discrete total variation of `g(t) = ρ(t) e^{-αt}` on `[0, T]` over the
/// partition formed by `0`, `T`, every jump time `<= T` and `grid` uniform
/// subdivision points.
pub fn total_variation_scaled<R: Real>(f: &StepFunction<R>, alpha: R, horizon: R, grid: usize) -> Result<R, StepError> {
    f.check_horizon("T", horizon)?;
    let mut points: Vec<R> = Vec::with_capacity(grid + f.len() + 2);
    points.push(R::zero());
    let n = R::from_usize(grid.max(1)).unwrap();
    for i in 1..grid {
        points.push(horizon * R::from_usize(i).unwrap() / n);
    }
    points.extend(f.times[..f.count_through(horizon)].iter().copied());
    points.push(horizon);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    total_variation_on_partition(f, alpha, &points)
}

/// Upper bound `ρ(T) (2 - e^{-αT})` on the total variation of
/// `g(t) = ρ(t) e^{-αt}` over `[0, T]`.
///
/// The variation of a product is at most `sup|e^{-αt}| · V(ρ) + sup|ρ| · V(e^{-αt})`.
/// The second term is not optional: on a stretch where `ρ` is flat `g`
/// still decays, so `V(g)` can exceed `V(ρ) = ρ(T)`.
pub fn scaled_variation_bound<R: Real>(f: &StepFunction<R>, alpha: R, horizon: R) -> Result<R, StepError> {
    let rho = f.eval(horizon)?;
    Ok(rho * (R::lit(2.0) - (-alpha * horizon).exp()))
}

/// `Σ |g(x_{i+1}) - g(x_i)|` over an explicit increasing partition.
///
/// For `α = 0`, `g = ρ` is nondecreasing and the sum telescopes to
/// `ρ(x_n) - ρ(x_0)`, which is returned directly.
pub fn total_variation_on_partition<R: Real>(f: &StepFunction<R>, alpha: R, points: &[R]) -> Result<R, StepError> {
    if !(alpha >= R::zero()) {
        return Err(StepError::Domain {
            what: "alpha",
            value: alpha.as_f64(),
            expected: "alpha >= 0",
        });
    }
    if let Some(index) = points.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(StepError::Unsorted { index: index + 1 });
    }
    let (Some(&first), Some(&last)) = (points.first(), points.last()) else {
        return Ok(R::zero());
    };
    f.check_horizon("partition point", first)?;
    f.check_horizon("partition point", last)?;
    if alpha == R::zero() {
        return Ok(f.eval(last)? - f.eval(first)?);
    }
    let g = |x: R| f.value_through(f.count_through(x)) * (-alpha * x).exp();
    let mut acc = CompensatedSum::new();
    let mut prev = g(first);
    for &x in &points[1..] {
        let v = g(x);
        acc.add((v - prev).abs());
        prev = v;
    }
    Ok(acc.value())
}
