//! Acceptance suite. Each criterion runs in isolation and prints one
//! `PASS`/`FAIL` line; the process exits nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use tauber_lab::pnt::{crosscheck_rho, k_a_from_psi, rho_from_psi};
use tauber_lab::stepfn::StepFunction;
use tauber_lab::tauber::{DEFAULT_H0, DEFAULT_LEVELS};
use tauber_lab::zeta::line_min_scan;
use tauber_lab::{
    arith::psi_jumps, convergence_table, log_deriv_f, parts_identity_residual, pi_count, point, residue_extrapolate,
    scaled_line_limits, sieve_primes, tauber_limit_table, zeta_em, zeta_prime_em, Complex64, EmParams, PrimeTable,
    ZetaError,
};

const SEED: u64 = 0x7a75_6265_725f_6c61;

type Check = fn() -> Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: Check,
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn trial_division_is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `Λ(n)` for `n <= limit` from a smallest-prime-factor table.
fn mangoldt_oracle(limit: usize) -> Vec<f64> {
    let mut spf = vec![0usize; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    let mut lambda = vec![0.0; limit + 1];
    for n in 2..=limit {
        let p = spf[n];
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        if m == 1 {
            lambda[n] = (p as f64).ln();
        }
    }
    lambda
}

fn kahan(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

fn random_step_function(rng: &mut ChaCha8Rng) -> StepFunction<f64> {
    let n = rng.gen_range(0..60);
    let mut t = 0.0;
    let jumps: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            t += rng.gen_range(1e-3..1.5);
            (t, rng.gen_range(1e-2..5.0))
        })
        .collect();
    StepFunction::new(jumps, t + rng.gen_range(0.0..2.0) + 1e-3).unwrap()
}

fn arithmetic_ground_truth() -> Result<String, String> {
    let small = sieve_primes(10_000).map_err(|e| e.to_string())?;
    let pi100 = pi_count(100.0f64, &small).map_err(|e| e.to_string())?;
    ensure!(pi100 == 25, "pi(100) = {pi100}");
    let oracle = (2..=10_000u64).filter(|&n| trial_division_is_prime(n)).count() as u64;
    let pi1e4 = pi_count(10_000.0f64, &small).map_err(|e| e.to_string())?;
    ensure!(pi1e4 == oracle, "pi(1e4) = {pi1e4}, trial division {oracle}");

    let psi10 = psi_jumps(10.0f64, &small)
        .and_then(|j| j.psi(10.0))
        .map_err(|e| e.to_string())?;
    let expect = 3.0 * 2f64.ln() + 2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
    ensure!((psi10 - expect).abs() <= 1e-12, "psi(10) = {psi10}, expected {expect}");

    let limit = 1_000_000usize;
    let table = sieve_primes(limit as u64).map_err(|e| e.to_string())?;
    let jumps = psi_jumps(limit as f64, &table).map_err(|e| e.to_string())?;
    let lambda = mangoldt_oracle(limit);
    let mut prefix = Vec::with_capacity(limit + 1);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in &lambda {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        prefix.push(sum);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(1.0..=limit as f64);
        let got = jumps.psi(x).map_err(|e| e.to_string())?;
        let want = prefix[x.floor() as usize];
        let rel = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        worst = worst.max(rel);
    }
    ensure!(worst <= 1e-9, "psi jumps vs sum of Lambda: worst relative {worst:e}");
    Ok(format!("pi(1e4)={pi1e4}, worst psi rel={worst:.1e}"))
}

fn parts_identity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let f = random_step_function(&mut rng);
        let s = point(rng.gen_range(-1.0..4.0), rng.gen_range(-30.0..30.0));
        let horizon = rng.gen_range(0.0..=f.t_max());
        let r = parts_identity_residual(&f, s, horizon).map_err(|e| e.to_string())?;
        worst = worst.max(r.relative());
    }
    ensure!(
        worst <= 1e-12,
        "random step functions: worst relative residual {worst:e}"
    );

    let table = sieve_primes(1_000_000).map_err(|e| e.to_string())?;
    let psi = psi_jumps(1e6f64, &table).map_err(|e| e.to_string())?;
    let rho = rho_from_psi(&psi).map_err(|e| e.to_string())?;
    let mut worst_rho = 0.0f64;
    for s in [
        point(2.0, 0.0),
        point(1.5, 3.0),
        point(3.0, 0.0),
        point(1.0, 14.0),
        point(0.5, 40.0),
    ] {
        let r = parts_identity_residual(&rho, s, rho.t_max()).map_err(|e| e.to_string())?;
        worst_rho = worst_rho.max(r.relative());
    }
    ensure!(
        worst_rho <= 1e-9,
        "psi-based rho: worst relative residual {worst_rho:e}"
    );
    Ok(format!("random worst={worst:.1e}, rho worst={worst_rho:.1e}"))
}

fn zeta_evaluator() -> Result<String, String> {
    let params = EmParams::default();
    let z2 = zeta_em(point(2.0, 0.0), &params).map_err(|e| e.to_string())?.value;
    let basel = std::f64::consts::PI.powi(2) / 6.0;
    let e2 = (z2 - basel).norm();
    ensure!(e2 <= 1e-10, "zeta(2) off by {e2:e}");

    let z3 = zeta_em(point(3.0, 0.0), &params).map_err(|e| e.to_string())?.value;
    // the omitted tail beyond 1e7 is below 5e-15
    let direct = kahan((1..=10_000_000u64).rev().map(|n| (n as f64).powi(-3)));
    let e3 = (z3 - direct).norm();
    ensure!(e3 <= 1e-10, "zeta(3) vs partial sum off by {e3:e}");

    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s: Complex64 = point(rng.gen_range(0.5..=4.0), rng.gen_range(-50.0..=50.0));
        if (s - 1.0).norm() < 0.1 {
            continue;
        }
        let h = 1e-5;
        let plus = zeta_em(s + h, &params).map_err(|e| e.to_string())?.value;
        let minus = zeta_em(s - h, &params).map_err(|e| e.to_string())?.value;
        let fd = (plus - minus) / (2.0 * h);
        let d = zeta_prime_em(s, &params).map_err(|e| e.to_string())?.value;
        let rel = (d - fd).norm() / d.norm().max(1e-300);
        worst = worst.max(rel);
    }
    ensure!(worst <= 1e-6, "zeta' vs central differences: worst relative {worst:e}");
    Ok(format!(
        "zeta(2) err={e2:.1e}, zeta(3) err={e3:.1e}, zeta' worst rel={worst:.1e}"
    ))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn central_identity() -> Result<String, String> {
    let params = EmParams::default();
    let table = sieve_primes(1_000_000).map_err(|e| e.to_string())?;
    let psi = psi_jumps(1e6f64, &table).map_err(|e| e.to_string())?;
    let rho = rho_from_psi(&psi).map_err(|e| e.to_string())?;
    let mut diff_at_2 = f64::NAN;
    for s in [point(2.0, 0.0), point(3.0, 0.0), point(1.5, 3.0)] {
        let out = crosscheck_rho(s, &rho, &params).map_err(|e| e.to_string())?;
        ensure!(
            out.row.pass,
            "crosscheck fails at {s}: diff {:e} > tail {:e} + certificates {:e}",
            out.row.abs_diff,
            out.tail.bound,
            out.zeta_error + out.laplace_error
        );
        if s == point(2.0, 0.0) {
            diff_at_2 = out.row.abs_diff;
        }
    }
    ensure!(diff_at_2 < 5e-6, "|diff| at s=2 is {diff_at_2:e}");

    let mut slopes = Vec::new();
    for sigma in [2.0f64, 3.0] {
        let mut samples = Vec::new();
        for x in [1e3f64, 1e4, 1e5, 1e6] {
            let psi_x = psi_jumps(x, &table).map_err(|e| e.to_string())?;
            let rho_x = rho_from_psi(&psi_x).map_err(|e| e.to_string())?;
            let out = crosscheck_rho(point(sigma, 0.0), &rho_x, &params).map_err(|e| e.to_string())?;
            samples.push((x.ln(), out.row.abs_diff.ln()));
        }
        let slope = least_squares_slope(&samples);
        let expect = 1.0 - sigma;
        ensure!(
            (slope - expect).abs() <= 0.2 * expect.abs(),
            "tail-law slope {slope:.4} at sigma={sigma}, expected {expect}"
        );
        slopes.push(slope);
    }
    Ok(format!("diff(2)={diff_at_2:.2e}, slopes={slopes:.3?}"))
}

fn residue_at_pole() -> Result<String, String> {
    let params = EmParams::default();
    let est = residue_extrapolate(
        |s: f64| log_deriv_f(point(s, 0.0), &params).map(|v| v.re),
        1.0,
        DEFAULT_H0,
        DEFAULT_LEVELS,
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        (est.value - 1.0).abs() <= 1e-3,
        "residue {} not within 1e-3 of 1",
        est.value
    );
    ensure!(est.uncertainty <= 1e-3, "reported uncertainty {:e}", est.uncertainty);

    type Pole = (f64, f64, fn(f64) -> f64);
    let synthetic: [Pole; 3] = [
        (3.0, 2.0, f64::sin),
        (-0.5, 0.0, f64::exp),
        (7.25, -1.5, |s| s * s - 4.0),
    ];
    let mut worst = 0.0f64;
    for (res, alpha, g) in synthetic {
        let est = residue_extrapolate(
            |s: f64| Ok::<_, ZetaError>(res / (s - alpha) + g(s)),
            alpha,
            DEFAULT_H0,
            DEFAULT_LEVELS,
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max((est.value - res).abs());
    }
    ensure!(worst <= 1e-8, "synthetic poles: worst error {worst:e}");
    Ok(format!(
        "residue={:.9}, uncertainty={:.1e}, synthetic worst={worst:.1e}",
        est.value, est.uncertainty
    ))
}

fn tauberian_limit_synthetic() -> Result<String, String> {
    let rho = |x: f64| 2.0 * x.exp_m1();
    let sampled = StepFunction::sample_nondecreasing(rho, 1e-3, 12.0).map_err(|e| e.to_string())?;
    // L_ρ(s) = 2/(s - 1) - 2/s for σ > 1
    let closed_form = |s: f64| Ok::<_, ZetaError>(2.0 / (s - 1.0) - 2.0 / s);
    let est = residue_extrapolate(closed_form, 1.0, DEFAULT_H0, DEFAULT_LEVELS).map_err(|e| e.to_string())?;
    ensure!(
        (est.value - 2.0).abs() <= 1e-6,
        "residue {} not within 1e-6 of 2",
        est.value
    );
    let table = tauber_limit_table(&sampled, 1.0, &[2.0, 4.0, 6.0, 8.0, 10.0], &est).map_err(|e| e.to_string())?;
    let last = table.rows.last().unwrap();
    ensure!(last.rel_gap <= 1e-2, "gap at T={} is {:e}", last.t, last.rel_gap);
    Ok(format!("residue={:.9}, gap(T=10)={:.2e}", est.value, last.rel_gap))
}

fn pnt_witness() -> Result<String, String> {
    let table = sieve_primes(10_000_000).map_err(|e| e.to_string())?;
    let rows = convergence_table(&[1e4f64, 1e5, 1e6, 1e7], &table).map_err(|e| e.to_string())?;
    let psi_gaps: Vec<f64> = rows.iter().map(|r| (r.psi_over_x - 1.0).abs()).collect();
    let pi_gaps: Vec<f64> = rows.iter().map(|r| (r.pi_logx_over_x - 1.0).abs()).collect();
    ensure!(psi_gaps[3] < 0.01, "|psi(1e7)/1e7 - 1| = {}", psi_gaps[3]);
    ensure!(
        psi_gaps.windows(2).all(|w| w[1] < w[0]),
        "psi gaps not strictly decreasing: {psi_gaps:?}"
    );
    ensure!(pi_gaps[3] <= 0.08, "|pi ln x / x - 1| at 1e7 = {}", pi_gaps[3]);
    ensure!(
        pi_gaps.windows(2).all(|w| w[1] < w[0]),
        "pi gaps not strictly decreasing: {pi_gaps:?}"
    );
    ensure!(rows[3].pi == 664_579, "pi(1e7) = {}", rows[3].pi);
    Ok(format!("psi gaps={psi_gaps:?}, pi gaps={pi_gaps:.4?}"))
}

#[derive(Deserialize)]
struct LineScanFixture {
    t_lo: f64,
    t_hi: f64,
    step: f64,
    argmin_t: f64,
    min_abs: f64,
}

fn line_scan_fixture() -> Result<String, String> {
    let raw = include_str!("fixtures/line_scan.json");
    let fx: LineScanFixture = serde_json::from_str(raw).map_err(|e| e.to_string())?;
    let scan = line_min_scan(fx.t_lo, fx.t_hi, fx.step, &EmParams::default()).map_err(|e| e.to_string())?;
    ensure!(scan.min_abs > 0.0, "minimum is not positive: {}", scan.min_abs);
    ensure!(
        (scan.min_abs - fx.min_abs).abs() <= 1e-8,
        "minimum {} differs from fixture {}",
        scan.min_abs,
        fx.min_abs
    );
    ensure!(
        (scan.argmin_t - fx.argmin_t).abs() <= 0.5 * fx.step,
        "argmin {} vs fixture {}",
        scan.argmin_t,
        fx.argmin_t
    );
    Ok(format!(
        "min |zeta(1+it)|={:.15} at t={:.2} over {} points",
        scan.min_abs, scan.argmin_t, scan.points
    ))
}

fn scaled_line_limits_check() -> Result<String, String> {
    let params = EmParams::default();
    let sigma = [1.0 + 1e-4];
    let real = scaled_line_limits(0.0f64, &sigma, &params).map_err(|e| e.to_string())?[0];
    let at_one = Complex64::new(real.scaled_re, real.scaled_im);
    ensure!((at_one - 1.0).norm() <= 2e-3, "(sigma-1)F(sigma) = {at_one}");
    let mut mags = Vec::new();
    for tau in [5.0, 14.1347] {
        let row = scaled_line_limits(tau, &sigma, &params).map_err(|e| e.to_string())?[0];
        let mag = Complex64::new(row.scaled_re, row.scaled_im).norm();
        ensure!(mag <= 0.05, "|(sigma-1)F(sigma+i{tau})| = {mag}");
        mags.push(mag);
    }
    Ok(format!(
        "tau=0: {:.6}, |tau=5|={:.1e}, |tau=14.1347|={:.1e}",
        at_one.re, mags[0], mags[1]
    ))
}

fn k_a_exactness() -> Result<String, String> {
    let table: PrimeTable = sieve_primes(1000).map_err(|e| e.to_string())?;
    let psi = psi_jumps(1000.0f64, &table).map_err(|e| e.to_string())?;
    let k2 = k_a_from_psi(2.0, &psi, 1).map_err(|e| e.to_string())?;
    let e2 = (k2 - 2f64.ln()).abs();
    ensure!(e2 <= 1e-14, "K_2 - ln 2 = {e2:e}");
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for a in [2.0, 10.0, 100.0, 1000.0] {
        let base = k_a_from_psi(a, &psi, 1).map_err(|e| e.to_string())?;
        for pieces in [2, 3, 16, 101] {
            let refined = k_a_from_psi(a, &psi, pieces).map_err(|e| e.to_string())?;
            worst = worst.max((refined - base).abs());
        }
        values.push(base);
    }
    ensure!(worst <= 1e-12, "refinement changes K_A by {worst:e}");
    ensure!(
        values.windows(2).all(|w| w[1] >= w[0]),
        "K_A not nondecreasing: {values:?}"
    );
    Ok(format!(
        "K_2 err={e2:.1e}, refinement worst={worst:.1e}, K_A={values:.6?}"
    ))
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        name: "arithmetic ground truth",
        budget: Duration::from_secs(10),
        run: arithmetic_ground_truth,
    },
    Criterion {
        id: 2,
        name: "parts identity",
        budget: Duration::from_secs(30),
        run: parts_identity,
    },
    Criterion {
        id: 3,
        name: "zeta evaluator",
        budget: Duration::from_secs(60),
        run: zeta_evaluator,
    },
    Criterion {
        id: 4,
        name: "central identity crosscheck",
        budget: Duration::from_secs(120),
        run: central_identity,
    },
    Criterion {
        id: 5,
        name: "residue at the pole",
        budget: Duration::from_secs(30),
        run: residue_at_pole,
    },
    Criterion {
        id: 6,
        name: "synthetic tauberian limit",
        budget: Duration::from_secs(10),
        run: tauberian_limit_synthetic,
    },
    Criterion {
        id: 7,
        name: "desk-scale pnt witness",
        budget: Duration::from_secs(180),
        run: pnt_witness,
    },
    Criterion {
        id: 8,
        name: "line scan fixture",
        budget: Duration::from_secs(120),
        run: line_scan_fixture,
    },
    Criterion {
        id: 9,
        name: "scaled line limits",
        budget: Duration::from_secs(30),
        run: scaled_line_limits_check,
    },
    Criterion {
        id: 10,
        name: "K_A exactness",
        budget: Duration::from_secs(10),
        run: k_a_exactness,
    },
];

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &CRITERIA {
        let label = format!("criterion {:>2}: {}", c.id, c.name);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; over budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {label} ({:.2}s) {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {label} ({:.2}s) {why}", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
