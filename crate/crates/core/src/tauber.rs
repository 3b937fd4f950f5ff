//! Residues of Laplace transforms at their pole and the matching limit of
//! `ρ(x) e^{-αx}`.
//!
//! If `L_ρ` has a simple pole at `α` with residue `r`, then `h · L_ρ(α + h)`
//! is analytic in `h` near zero with value `r` at `h = 0`. Sampling it on the
//! geometric sequence `h_k = h_0 2^{-k}` and eliminating the polynomial terms
//! by Richardson extrapolation recovers `r`. The Tauberian statement is then
//! checked by tabulating `g(T) = ρ(T) e^{-αT}` against `r`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::stepfn::{interval_kernel, laplace_truncated, ComplexPoint, StepError, StepFunction};
use crate::sum::CompensatedComplexSum;

pub const DEFAULT_H0: f64 = 0.5;
pub const DEFAULT_LEVELS: usize = 8;
pub const MIN_LEVELS: usize = 2;
pub const MAX_LEVELS: usize = 12;

#[derive(Debug, Error)]
pub enum TauberError {
    #[error("evaluator failed at node {node} (h = {h}): {source}")]
    Evaluator {
        node: usize,
        h: f64,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("{what} = {value} is outside the admissible domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error(transparent)]
    Step(#[from] StepError),
}

/// One sampled node `raw = h · F(α + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueLevel<R> {
    pub h: R,
    pub raw: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueEstimate<R> {
    pub alpha: R,
    pub value: R,
    pub levels: Vec<ResidueLevel<R>>,
    /// Row `k` holds `k + 1` entries; `table[k][k]` is the diagonal.
    pub extrapolation_table: Vec<Vec<R>>,
    /// `|table[L-1][L-1] - table[L-2][L-2]|`.
    pub uncertainty: R,
}

impl<R: Real> ResidueEstimate<R> {
    pub fn diagonal(&self) -> impl Iterator<Item = R> + '_ {
        self.extrapolation_table.iter().enumerate().map(|(k, row)| row[k])
    }
}

/// Richardson extrapolation of `lim_{h→0⁺} h · F(α + h)` along the real axis.
pub fn residue_extrapolate<R, E, F>(
    mut eval: F,
    alpha: R,
    h0: R,
    levels: usize,
) -> Result<ResidueEstimate<R>, TauberError>
where
    R: Real,
    E: std::error::Error + Send + Sync + 'static,
    F: FnMut(R) -> Result<R, E>,
{
    if !(h0 > R::zero()) || !h0.is_finite() {
        return Err(TauberError::Domain {
            what: "h0",
            value: h0.as_f64(),
            expected: "h0 > 0",
        });
    }
    if !(MIN_LEVELS..=MAX_LEVELS).contains(&levels) {
        return Err(TauberError::Domain {
            what: "levels",
            value: levels as f64,
            expected: "2 <= levels <= 12",
        });
    }
    let half = R::lit(0.5);
    let mut nodes = Vec::with_capacity(levels);
    let mut h = h0;
    for node in 0..levels {
        let value = eval(alpha + h).map_err(|e| TauberError::Evaluator {
            node,
            h: h.as_f64(),
            source: Box::new(e),
        })?;
        nodes.push(ResidueLevel { h, raw: h * value });
        h = h * half;
    }

    let mut table: Vec<Vec<R>> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut row = Vec::with_capacity(k + 1);
        row.push(nodes[k].raw);
        let mut pow = R::one();
        for j in 1..=k {
            pow = pow * R::lit(2.0);
            let prev = row[j - 1];
            let up = table[k - 1][j - 1];
            row.push(prev + (prev - up) / (pow - R::one()));
        }
        table.push(row);
    }
    let value = table[levels - 1][levels - 1];
    let uncertainty = (value - table[levels - 2][levels - 2]).abs();
    Ok(ResidueEstimate {
        alpha,
        value,
        levels: nodes,
        extrapolation_table: table,
        uncertainty,
    })
}

/// `L_g(s - α)` for `g(t) = ρ(t) e^{-αt}`, computed from the scaled samples
/// `g(a) = ρ(a) e^{-αa}` at the left end of each constancy interval.
pub fn scaled_route_transform<R: Real>(
    f: &StepFunction<R>,
    alpha: R,
    s: ComplexPoint<R>,
    horizon: R,
) -> Result<Complex<R>, StepError> {
    f.eval(horizon)?;
    let z = s - alpha;
    let mut acc = CompensatedComplexSum::new();
    for (a, w, c) in f.intervals(horizon) {
        let g_a = c * (-alpha * a).exp();
        // on [a, a+w): g(t) = g_a e^{-α(t-a)}, so ∫ g e^{-zt} = g_a e^{-za} ∫_0^w e^{-(z+α)u} du
        acc.add((-z * a).exp() * interval_kernel(z + alpha, w) * g_a);
    }
    Ok(acc.value())
}

/// Largest relative discrepancy between `L_ρ(s)` and `L_g(s - α)` over `s_values`.
pub fn shifted_transform_check<R: Real>(
    f: &StepFunction<R>,
    alpha: R,
    s_values: &[ComplexPoint<R>],
    horizon: R,
) -> Result<R, TauberError> {
    let mut worst = R::zero();
    for &s in s_values {
        if !(s.re > alpha) {
            return Err(TauberError::Domain {
                what: "sigma",
                value: s.re.as_f64(),
                expected: "sigma > alpha",
            });
        }
        let direct = laplace_truncated(f, s, horizon)?;
        let shifted = scaled_route_transform(f, alpha, s, horizon)?;
        let diff = (direct - shifted).norm();
        let scale = direct.norm();
        let rel = if scale > R::zero() { diff / scale } else { diff };
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow<R> {
    pub t: R,
    pub g: R,
    pub reference: R,
    pub rel_gap: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTable<R> {
    pub alpha: R,
    pub rows: Vec<LimitRow<R>>,
}

/// Rows `(T, ρ(T) e^{-αT}, residue, |g - residue| / |residue|)`.
pub fn tauber_limit_table<R: Real>(
    f: &StepFunction<R>,
    alpha: R,
    abscissae: &[R],
    reference: &ResidueEstimate<R>,
) -> Result<LimitTable<R>, TauberError> {
    if let Some(i) = abscissae.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(TauberError::Domain {
            what: "abscissae",
            value: abscissae[i + 1].as_f64(),
            expected: "strictly increasing",
        });
    }
    let r = reference.value;
    let rows = abscissae
        .iter()
        .map(|&t| {
            let g = f.eval(t)? * (-alpha * t).exp();
            let gap = (g - r).abs();
            let rel_gap = if r != R::zero() { gap / r.abs() } else { gap };
            Ok(LimitRow {
                t,
                g,
                reference: r,
                rel_gap,
            })
        })
        .collect::<Result<Vec<_>, StepError>>()?;
    Ok(LimitTable { alpha, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::laplace_constant_extension;
    use proptest::prelude::*;
    use std::convert::Infallible;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn pure_pole() {
        let est = residue_extrapolate(
            |s: f64| Ok::<_, Infallible>(1.0 / (s - 0.7)),
            0.7,
            DEFAULT_H0,
            DEFAULT_LEVELS,
        )
        .unwrap();
        assert!((est.value - 1.0).abs() <= 1e-12);
        assert!(est.uncertainty <= 1e-12);
        assert_eq!(est.levels.len(), DEFAULT_LEVELS);
        assert!(est.levels.windows(2).all(|w| w[1].h == w[0].h / 2.0));
    }

    #[test]
    fn pole_plus_analytic_part() {
        let est = residue_extrapolate(
            |s: f64| Ok::<_, Infallible>(3.0 / (s - 2.0) + s.sin()),
            2.0,
            DEFAULT_H0,
            DEFAULT_LEVELS,
        )
        .unwrap();
        assert!((est.value - 3.0).abs() <= 1e-8, "{}", est.value);
    }

    #[test]
    fn evaluator_failure_names_the_node() {
        #[derive(Debug, Error)]
        #[error("boom")]
        struct Boom;
        let err = residue_extrapolate(|s: f64| if s < 1.1 { Err(Boom) } else { Ok(1.0) }, 1.0, 0.5, 6).unwrap_err();
        match err {
            TauberError::Evaluator { node, h, .. } => {
                assert_eq!(node, 3);
                assert_eq!(h, 0.0625);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn level_bounds() {
        let f = |s: f64| Ok::<_, Infallible>(1.0 / s);
        assert!(residue_extrapolate(f, 0.0, 0.5, 1).is_err());
        assert!(residue_extrapolate(f, 0.0, 0.5, 13).is_err());
        assert!(residue_extrapolate(f, 0.0, -0.5, 4).is_err());
        assert!(residue_extrapolate(f, 0.0, 0.5, 2).is_ok());
    }

    #[test]
    fn halving_h0_is_self_consistent() {
        let f = |s: f64| Ok::<_, Infallible>(2.0 / (s - 1.0) + (s * s).cos() / (s + 1.5));
        let a = residue_extrapolate(f, 1.0, 0.5, 8).unwrap();
        let b = residue_extrapolate(f, 1.0, 0.25, 8).unwrap();
        assert!((a.value - b.value).abs() <= 10.0 * a.uncertainty.max(f64::EPSILON));
    }

    #[test]
    fn shifted_check_alpha_zero_is_exact() {
        let f = StepFunction::new([(0.3, 1.0), (1.1, 2.0), (2.5, 0.5)], 4.0).unwrap();
        let r = shifted_transform_check(&f, 0.0, &[c(0.5, 0.0), c(1.0, 3.0)], 4.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn shifted_check_single_jump() {
        let f = StepFunction::new([(0.75, 2.0)], 6.0).unwrap();
        let r = shifted_transform_check(&f, 1.0, &[c(2.0, 0.0)], 6.0).unwrap();
        assert!(r <= 1e-14, "{r}");
        assert!(shifted_transform_check(&f, 1.0, &[c(1.0, 0.0)], 6.0).is_err());
    }

    #[test]
    fn limit_table_for_eventually_constant_rho() {
        let f = StepFunction::new([(1.0, 5.0)], 50.0).unwrap();
        let est = residue_extrapolate(
            |s: f64| laplace_constant_extension(&f, c(s, 0.0)).map(|v| v.re),
            0.0,
            0.05,
            8,
        )
        .unwrap();
        assert!((est.value - 5.0).abs() < 1e-8);
        let table = tauber_limit_table(&f, 0.0, &[1.0, 2.0, 10.0, 50.0], &est).unwrap();
        for row in &table.rows {
            assert_eq!(row.g, 5.0);
            assert!(row.rel_gap < 1e-8);
        }
        assert!(tauber_limit_table(&f, 0.0, &[2.0, 1.0], &est).is_err());
    }

    proptest! {
        #[test]
        fn richardson_exact_on_pole_plus_polynomial(
            residue in -5.0f64..5.0,
            alpha in -2.0f64..2.0,
            coeffs in prop::collection::vec(-3.0f64..3.0, 0..7),
        ) {
            let levels = 8; // eliminates polynomials of degree <= levels - 2
            let f = |s: f64| {
                let d = s - alpha;
                let poly = coeffs.iter().rev().fold(0.0, |acc, &c| acc * d + c);
                Ok::<_, Infallible>(residue / d + poly)
            };
            let est = residue_extrapolate(f, alpha, 0.5, levels).unwrap();
            prop_assert!((est.value - residue).abs() <= 1e-12, "{} vs {}", est.value, residue);
        }

        #[test]
        fn bounded_step_function_residue_is_its_limit(raw in prop::collection::vec((0.01f64..0.5, 0.1f64..3.0), 1..10)) {
            let mut t = 0.0;
            let jumps: Vec<(f64, f64)> = raw.into_iter().map(|(dt, h)| { t += dt; (t, h) }).collect();
            let f = StepFunction::new(jumps, t).unwrap();
            let est = residue_extrapolate(|s: f64| laplace_constant_extension(&f, c(s, 0.0)).map(|v| v.re), 0.0, 0.05, 8).unwrap();
            prop_assert!((est.value - f.total_mass()).abs() <= 1e-8, "{} vs {}", est.value, f.total_mass());
        }
    }
}
