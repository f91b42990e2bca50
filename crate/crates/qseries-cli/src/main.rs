//! Command-line front end for the identity catalog.
//!
//! Five subcommands: `list` prints the catalog, `verify` checks one identity
//! instance, `suite` sweeps the whole catalog over capped parameter ranges,
//! `series` evaluates a product expression, and `dump-form` prints the
//! multisum specification behind an identity's left side.
//!
//! Exit codes: 0 on success, 1 when a verification finds a coefficient
//! discrepancy, 2 on usage or domain errors, 3 on internal evaluation
//! failures.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qseries::prodexpr::{self, ProductExpr};
use qseries::verify::{
    catalog, dump_form, report_line, report_to_json, run_suite, verify, verify_mutated, Params,
    Status, VerificationReport,
};
use qseries::Error;

#[derive(Parser)]
#[command(name = "qseries", version, about = "Exact verification of q-series identities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the identity catalog.
    List,
    /// Verify one identity instance to a given order.
    Verify {
        /// Catalog id, e.g. thm_2_1.
        #[arg(long)]
        id: String,
        /// Integer parameter, repeatable, e.g. --param g=2 --param s=1.
        #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_kv)]
        params: Vec<(String, i64)>,
        /// Compare coefficients through q^ORDER.
        #[arg(long, value_name = "ORDER")]
        order: i64,
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Perturb one quadratic-form coefficient of the multisum side
        /// before verifying (negative control; expects a discrepancy).
        #[arg(long, hide = true, value_name = "I,J", value_parser = parse_pair)]
        mutate: Option<(usize, usize)>,
    },
    /// Verify the whole catalog over capped parameter ranges.
    Suite {
        /// Compare coefficients through q^ORDER for every instance.
        #[arg(long, value_name = "ORDER", default_value_t = 40)]
        order: i64,
        /// Override a parameter cap, repeatable, e.g. --cap g=3 --cap pq=40.
        #[arg(long = "cap", value_name = "KEY=VALUE", value_parser = parse_kv)]
        caps: Vec<(String, i64)>,
        /// Emit the reports as a JSON array instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a product expression and print its coefficients.
    Series {
        /// Expression, e.g. "(q^5;q^5)_inf / (q;q)_inf".
        #[arg(long)]
        expr: String,
        /// Expand through q^ORDER.
        #[arg(long, value_name = "ORDER")]
        order: i64,
        /// Emit CSV (t_exponent,q_exponent,coefficient) instead of text.
        #[arg(long)]
        csv: bool,
    },
    /// Print the multisum specification behind an identity's left side.
    DumpForm {
        /// Catalog id, e.g. thm_2_5.
        #[arg(long)]
        id: String,
        /// Integer parameter, repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_kv)]
        params: Vec<(String, i64)>,
    },
}

fn parse_kv(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    let v = v
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("value in `{s}` is not an integer"))?;
    Ok((k.to_string(), v))
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected I,J, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad index in `{s}`"));
    Ok((parse(i)?, parse(j)?))
}

fn to_params(pairs: &[(String, i64)]) -> Params {
    pairs.iter().cloned().collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// The coarsest substrate on which every exponent in the expression lands.
fn substrate_of_expr(expr: &ProductExpr) -> u32 {
    let mut d: i64 = 1;
    for f in expr.numerator.iter().chain(expr.denominator.iter()) {
        for m in f.args.iter().chain(std::iter::once(&f.base)) {
            let den = *m.exp.denom();
            d = d / gcd(d, den) * den;
        }
    }
    d as u32
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Verified => 0,
        Status::Discrepancy => 1,
        Status::Error => 3,
    }
}

/// Writes one line to stdout; if the reader has hung up (output piped into
/// `head`, say), exits with the conventional SIGPIPE status instead of
/// panicking.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{text}").is_err() {
        std::process::exit(141);
    }
}

fn print_report(r: &VerificationReport, json: bool) {
    if json {
        emit(&report_to_json(r).to_string());
    } else {
        emit(&report_line(r));
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::List => {
            for rec in catalog() {
                let params = if rec.params.is_empty() {
                    "none".to_string()
                } else {
                    rec.params.join(",")
                };
                let flag = if rec.conjectural { "  (conjectural)" } else { "" };
                emit(&format!("{} [{}]{flag}", rec.id, rec.anchor));
                emit(&format!("    params: {params}  |  domain: {}", rec.param_domain));
                emit(&format!("    D = {}", rec.substrate));
                emit(&format!("    {}  ==  {}", rec.lhs, rec.rhs));
            }
            Ok(0)
        }
        Cmd::Verify { id, params, order, json, mutate } => {
            let params = to_params(&params);
            let report = match mutate {
                None => verify(&id, &params, order)?,
                Some((i, j)) => verify_mutated(&id, &params, order, i, j)?,
            };
            print_report(&report, json);
            Ok(status_code(report.status))
        }
        Cmd::Suite { order, caps, json } => {
            let caps = caps.into_iter().collect();
            let reports = run_suite(order, &caps)?;
            if json {
                let array: Vec<_> = reports.iter().map(report_to_json).collect();
                emit(&serde_json::Value::Array(array).to_string());
            } else {
                let (mut verified, mut discrepancies, mut errors) = (0, 0, 0);
                for r in &reports {
                    emit(&report_line(r));
                    match r.status {
                        Status::Verified => verified += 1,
                        Status::Discrepancy => discrepancies += 1,
                        Status::Error => errors += 1,
                    }
                }
                emit(&format!(
                    "suite: {} instances at order q^{order}: {verified} verified, \
                     {discrepancies} discrepancies, {errors} errors",
                    reports.len()
                ));
            }
            let worst = reports.iter().map(|r| status_code(r.status)).max().unwrap_or(0);
            Ok(if reports.iter().any(|r| r.status == Status::Discrepancy) {
                1
            } else {
                worst
            })
        }
        Cmd::Series { expr, order, csv } => {
            if order < 1 {
                return Err(Error::Domain(format!("order must be >= 1, got {order}")));
            }
            let parsed = prodexpr::parse(&expr)?;
            let d = substrate_of_expr(&parsed);
            let series = prodexpr::eval(&parsed, d, order * d as i64)?;
            if csv {
                for line in series.dump_csv().lines() {
                    emit(line);
                }
            } else {
                emit(&format!("D = {d}"));
                emit(&series.to_string());
            }
            Ok(0)
        }
        Cmd::DumpForm { id, params } => {
            let value = dump_form(&id, &to_params(&params))?;
            emit(&serde_json::to_string_pretty(&value).expect("serializable"));
            Ok(0)
        }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Parse { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
