use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tauber_lab::pnt::{crosscheck_rho, decade_grid, k_a_from_psi, rho_from_psi, CrosscheckRow, KaRow};
use tauber_lab::report::{
    write_csv, write_json, ReportError, CONVERGENCE_HEADER, CROSSCHECK_HEADER, KA_HEADER, LIMIT_HEADER,
};
use tauber_lab::tauber::{LimitRow, DEFAULT_H0, DEFAULT_LEVELS, MAX_LEVELS, MIN_LEVELS};
use tauber_lab::zeta::{line_values, zeta_pair};
use tauber_lab::{
    arith::psi_jumps, log_deriv_f, pi_count, pnt_report, point, residue_extrapolate, sieve_primes, tauber_limit_table,
    ArithError, EmParams, PrimeTable,
};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Parser)]
#[command(
    name = "tauber-lab",
    version,
    about = "Tables for the zeta/psi route to the prime number theorem"
)]
struct Cli {
    /// Write the table here; without it only the summary line is printed.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Primes up to N.
    Sieve {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
    },
    /// Chebyshev ψ(X).
    Psi {
        #[arg(long, value_parser = parse_nonnegative)]
        x: f64,
    },
    /// Prime count π(X).
    Pi {
        #[arg(long, value_parser = parse_nonnegative)]
        x: f64,
    },
    /// ζ(s) and ζ′(s) with error estimates.
    Zeta {
        #[arg(long, value_parser = parse_positive, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
        t: f64,
    },
    /// |ζ(1 + it)| on a grid.
    ScanLine {
        #[arg(long, value_parser = parse_positive)]
        t_lo: f64,
        #[arg(long, value_parser = parse_positive)]
        t_hi: f64,
        #[arg(long, value_parser = parse_positive)]
        step: f64,
    },
    /// -ζ′/(sζ) against the truncated Laplace transform of ψ(e^t).
    Crosscheck {
        #[arg(long, value_parser = parse_sigma_right_of_one)]
        sigma: f64,
        #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, value_parser = parse_at_least_one)]
        x_max: f64,
    },
    /// Richardson estimate of lim h·F(α + h) for F = -ζ′/(sζ).
    Residue {
        #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, value_parser = parse_positive, default_value_t = DEFAULT_H0)]
        h0: f64,
        #[arg(long, value_parser = parse_levels, default_value_t = DEFAULT_LEVELS)]
        levels: usize,
    },
    /// ψ(e^T) e^{-αT} against the residue of -ζ′/(sζ) at α, at each decade.
    TauberTable {
        #[arg(long, value_parser = parse_positive)]
        alpha: f64,
        #[arg(long, value_parser = parse_at_least_hundred)]
        x_max: f64,
    },
    /// K_A = ∫_1^A |ψ(x) - x| / x² dx.
    Ka {
        #[arg(long, value_parser = parse_at_least_one)]
        a: f64,
        /// Sieve reach; defaults to A.
        #[arg(long, value_parser = parse_at_least_one)]
        x_max: Option<f64>,
    },
    /// Convergence, cross-check, K_A and line tables for one sieve reach.
    PntTable {
        #[arg(long, value_parser = parse_at_least_hundred)]
        x_max: f64,
    },
}

fn parse_finite(raw: &str) -> Result<f64, String> {
    let v: f64 = raw.parse().map_err(|_| format!("`{raw}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn parse_with(raw: &str, ok: impl Fn(f64) -> bool, expected: &str) -> Result<f64, String> {
    let v = parse_finite(raw)?;
    if ok(v) {
        Ok(v)
    } else {
        Err(format!("must be {expected}"))
    }
}

fn parse_nonnegative(raw: &str) -> Result<f64, String> {
    parse_with(raw, |v| v >= 0.0, ">= 0")
}

fn parse_positive(raw: &str) -> Result<f64, String> {
    parse_with(raw, |v| v > 0.0, "> 0")
}

fn parse_at_least_one(raw: &str) -> Result<f64, String> {
    parse_with(raw, |v| v >= 1.0, ">= 1")
}

fn parse_at_least_hundred(raw: &str) -> Result<f64, String> {
    parse_with(raw, |v| v >= 100.0, ">= 100")
}

fn parse_sigma_right_of_one(raw: &str) -> Result<f64, String> {
    parse_with(raw, |v| v > 1.0, "> 1")
}

fn parse_limit(raw: &str) -> Result<u64, String> {
    match raw.parse::<u64>() {
        Ok(v) if v >= 2 => Ok(v),
        Ok(_) => Err("must be >= 2".into()),
        Err(_) => Err(format!("`{raw}` is not an integer")),
    }
}

fn parse_levels(raw: &str) -> Result<usize, String> {
    let v: usize = raw.parse().map_err(|_| format!("`{raw}` is not an integer"))?;
    if (MIN_LEVELS..=MAX_LEVELS).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in {MIN_LEVELS}..={MAX_LEVELS}"))
    }
}

/// Cross-field checks clap cannot express.
fn validate(cli: &Cli) -> Result<(), clap::Error> {
    let usage = |msg: String| Cli::command().error(clap::error::ErrorKind::ValueValidation, msg);
    match cli.command {
        Command::ScanLine { t_lo, t_hi, .. } if t_hi < t_lo => {
            Err(usage(format!("--t-hi ({t_hi}) must be >= --t-lo ({t_lo})")))
        }
        Command::Ka { a, x_max: Some(x), .. } if a > x => Err(usage(format!("--a ({a}) must be <= --x-max ({x})"))),
        _ => Ok(()),
    }
}

struct Artifact {
    bytes: Vec<u8>,
    summary: String,
    pass: bool,
}

fn table<T: Serialize, J: Serialize>(
    format: Format,
    header: &[&str],
    rows: &[T],
    json: &J,
) -> Result<Vec<u8>, ReportError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, header, rows)?,
        Format::Json => write_json(&mut buf, json)?,
    }
    Ok(buf)
}

#[derive(Serialize)]
struct PrimeRow {
    p: u64,
}

#[derive(Serialize)]
struct PsiRow {
    x: f64,
    psi: f64,
}

#[derive(Serialize)]
struct PiRow {
    x: f64,
    pi: u64,
}

#[derive(Serialize)]
struct ZetaRow {
    sigma: f64,
    t: f64,
    zeta_re: f64,
    zeta_im: f64,
    zeta_error: f64,
    zeta_prime_re: f64,
    zeta_prime_im: f64,
    zeta_prime_error: f64,
}

#[derive(Serialize)]
struct ScanRow {
    t: f64,
    abs_zeta: f64,
}

#[derive(Serialize)]
struct ResidueRow {
    h: f64,
    raw: f64,
    extrapolated: f64,
}

#[derive(Serialize)]
struct CrosscheckJson<'a> {
    row: &'a CrosscheckRow<f64>,
    tail_growth_c: f64,
    zeta_error: f64,
    laplace_error: f64,
}

#[derive(Serialize)]
struct ResidueJson<'a> {
    alpha: f64,
    value: f64,
    uncertainty: f64,
    levels: &'a [ResidueRow],
}

#[derive(Serialize)]
struct TauberJson<'a> {
    alpha: f64,
    residue: f64,
    uncertainty: f64,
    rows: &'a [LimitRow<f64>],
}

/// Smallest sieve covering every real argument up to `x`.
fn table_for(x: f64) -> Result<PrimeTable, ArithError> {
    sieve_primes((x.ceil() as u64).max(2))
}

fn run(cli: &Cli) -> Result<Artifact, BoxError> {
    let params = EmParams::default();
    let format = cli.format;
    let artifact = match cli.command {
        Command::Sieve { limit } => {
            let primes = sieve_primes(limit)?;
            let rows: Vec<PrimeRow> = primes.primes().map(|p| PrimeRow { p }).collect();
            Artifact {
                bytes: table(format, &["p"], &rows, &rows)?,
                summary: format!("{} primes up to {limit}", rows.len()),
                pass: true,
            }
        }
        Command::Psi { x } => {
            let psi = psi_jumps(x, &table_for(x)?)?.psi(x)?;
            let rows = [PsiRow { x, psi }];
            Artifact {
                bytes: table(format, &["x", "psi"], &rows, &rows)?,
                summary: psi.to_string(),
                pass: true,
            }
        }
        Command::Pi { x } => {
            let pi = pi_count(x, &table_for(x)?)?;
            let rows = [PiRow { x, pi }];
            Artifact {
                bytes: table(format, &["x", "pi"], &rows, &rows)?,
                summary: pi.to_string(),
                pass: true,
            }
        }
        Command::Zeta { sigma, t } => {
            let pair = zeta_pair(point(sigma, t), &params)?;
            let rows = [ZetaRow {
                sigma,
                t,
                zeta_re: pair.zeta.value.re,
                zeta_im: pair.zeta.value.im,
                zeta_error: pair.zeta.error,
                zeta_prime_re: pair.zeta_prime.value.re,
                zeta_prime_im: pair.zeta_prime.value.im,
                zeta_prime_error: pair.zeta_prime.error,
            }];
            let header = [
                "sigma",
                "t",
                "zeta_re",
                "zeta_im",
                "zeta_error",
                "zeta_prime_re",
                "zeta_prime_im",
                "zeta_prime_error",
            ];
            Artifact {
                bytes: table(format, &header, &rows, &rows)?,
                summary: format!("zeta = {} ± {:e}", pair.zeta.value, pair.zeta.error),
                pass: true,
            }
        }
        Command::ScanLine { t_lo, t_hi, step } => {
            let rows: Vec<ScanRow> = line_values(t_lo, t_hi, step, &params)?
                .into_iter()
                .map(|(t, abs_zeta)| ScanRow { t, abs_zeta })
                .collect();
            let min = rows
                .iter()
                .min_by(|a, b| a.abs_zeta.total_cmp(&b.abs_zeta))
                .expect("grid is nonempty");
            Artifact {
                bytes: table(format, &["t", "abs_zeta"], &rows, &rows)?,
                summary: format!(
                    "min |zeta(1+it)| = {} at t = {} over {} points",
                    min.abs_zeta,
                    min.t,
                    rows.len()
                ),
                pass: min.abs_zeta > 0.0,
            }
        }
        Command::Crosscheck { sigma, t, x_max } => {
            let psi = psi_jumps(x_max, &table_for(x_max)?)?;
            let out = crosscheck_rho(point(sigma, t), &rho_from_psi(&psi)?, &params)?;
            let json = CrosscheckJson {
                row: &out.row,
                tail_growth_c: out.tail.growth_c,
                zeta_error: out.zeta_error,
                laplace_error: out.laplace_error,
            };
            Artifact {
                bytes: table(format, &CROSSCHECK_HEADER, &[out.row], &json)?,
                summary: format!(
                    "{}: |diff| = {:e}, tail bound = {:e}",
                    if out.row.pass { "pass" } else { "FAIL" },
                    out.row.abs_diff,
                    out.row.tail_bound
                ),
                pass: out.row.pass,
            }
        }
        Command::Residue { alpha, h0, levels } => {
            let est = residue_extrapolate(
                |s: f64| log_deriv_f(point(s, 0.0), &params).map(|v| v.re),
                alpha,
                h0,
                levels,
            )?;
            let rows: Vec<ResidueRow> = est
                .levels
                .iter()
                .zip(est.diagonal())
                .map(|(l, extrapolated)| ResidueRow {
                    h: l.h,
                    raw: l.raw,
                    extrapolated,
                })
                .collect();
            let json = ResidueJson {
                alpha,
                value: est.value,
                uncertainty: est.uncertainty,
                levels: &rows,
            };
            Artifact {
                bytes: table(format, &["h", "raw", "extrapolated"], &rows, &json)?,
                summary: format!("residue = {} ± {:e}", est.value, est.uncertainty),
                pass: true,
            }
        }
        Command::TauberTable { alpha, x_max } => {
            let psi = psi_jumps(x_max, &table_for(x_max)?)?;
            let rho = rho_from_psi(&psi)?;
            let est = residue_extrapolate(
                |s: f64| log_deriv_f(point(s, 0.0), &params).map(|v| v.re),
                alpha,
                DEFAULT_H0,
                DEFAULT_LEVELS,
            )?;
            let mut horizons: Vec<f64> = decade_grid(x_max).into_iter().map(f64::ln).collect();
            if horizons.last().is_some_and(|&t| t < rho.t_max()) {
                horizons.push(rho.t_max());
            }
            let limit = tauber_limit_table(&rho, alpha, &horizons, &est)?;
            let json = TauberJson {
                alpha,
                residue: est.value,
                uncertainty: est.uncertainty,
                rows: &limit.rows,
            };
            let last = limit.rows.last().expect("x_max >= 100 gives a decade");
            Artifact {
                bytes: table(format, &LIMIT_HEADER, &limit.rows, &json)?,
                summary: format!("residue = {}, gap at T = {} is {:e}", est.value, last.t, last.rel_gap),
                pass: true,
            }
        }
        Command::Ka { a, x_max } => {
            let x = x_max.unwrap_or(a);
            let psi = psi_jumps(x, &table_for(x)?)?;
            let rows = [KaRow {
                a,
                k_a: k_a_from_psi(a, &psi, 1)?,
            }];
            Artifact {
                bytes: table(format, &KA_HEADER, &rows, &rows)?,
                summary: rows[0].k_a.to_string(),
                pass: true,
            }
        }
        Command::PntTable { x_max } => {
            let report = pnt_report(x_max, &table_for(x_max)?, &params)?;
            let pass = report.all_pass();
            let summary = match report.convergence.last() {
                Some(r) => format!(
                    "psi(x)/x = {} and pi(x) log x / x = {} at x = {}",
                    r.psi_over_x, r.pi_logx_over_x, r.x
                ),
                None => "no decades in range".to_string(),
            };
            Artifact {
                bytes: table(format, &CONVERGENCE_HEADER, &report.convergence, &report)?,
                summary: if pass {
                    summary
                } else {
                    format!("{summary}; FAIL (crosscheck or psi envelope)")
                },
                pass,
            }
        }
    };
    Ok(artifact)
}

fn subcommand_name(cli: &Cli) -> &'static str {
    match cli.command {
        Command::Sieve { .. } => "sieve",
        Command::Psi { .. } => "psi",
        Command::Pi { .. } => "pi",
        Command::Zeta { .. } => "zeta",
        Command::ScanLine { .. } => "scan-line",
        Command::Crosscheck { .. } => "crosscheck",
        Command::Residue { .. } => "residue",
        Command::TauberTable { .. } => "tauber-table",
        Command::Ka { .. } => "ka",
        Command::PntTable { .. } => "pnt-table",
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    subcommand: &'a str,
    error: String,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a ErrorRecord<'a>,
}

fn error_record(format: Format, record: &ErrorRecord) -> Result<Vec<u8>, ReportError> {
    table(
        format,
        &["subcommand", "error"],
        std::slice::from_ref(record),
        &ErrorJson { error: record },
    )
}

fn write_out(cli: &Cli, bytes: &[u8]) -> io::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, bytes),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = validate(&cli) {
        e.exit();
    }
    match run(&cli) {
        Ok(artifact) => {
            if let Err(e) = write_out(&cli, &artifact.bytes) {
                eprintln!("error: writing output: {e}");
                return ExitCode::from(1);
            }
            let mut stdout = io::stdout().lock();
            let _ = writeln!(stdout, "{}", artifact.summary);
            if artifact.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let record = ErrorRecord {
                subcommand: subcommand_name(&cli),
                error: e.to_string(),
            };
            eprintln!("error: {}", record.error);
            match error_record(cli.format, &record) {
                Ok(bytes) => {
                    if let Err(io) = write_out(&cli, &bytes) {
                        eprintln!("error: writing output: {io}");
                    }
                }
                Err(ser) => eprintln!("error: serializing error record: {ser}"),
            }
            ExitCode::from(1)
        }
    }
}
