//! collatz-sigma: stopping times of the shortcut Collatz map, residue-class
//! enumeration via binary tuples, and the iterative z_n series (A100982).
//!
//! Exit codes: 0 success, 1 verify disagreement, 2 usage error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use collatz_sigma::{
    classify, cross_check, parse_bfile, residue_classes, sigma_exponent, solution_stream,
    stopping_time, term_ledger, zn_iterative, CollatzError, ParityWord, ScanBudget, StoppingTime,
    DEFAULT_TUPLE_BUDGET,
};

#[derive(Parser)]
#[command(name = "collatz-sigma", version, about = "Collatz 3x+1 stopping times and residue classes", max_term_width = 100)]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores; the
    /// COLLATZ_SIGMA_THREADS environment variable is the fallback).
    /// Affects wall time only, never output content or order.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Listing shapes meant for eyes and golden files
    Plain,
    /// Tab-separated rows
    Tsv,
    /// One JSON object per line, numbers as bare numerals
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Print sigma_n, the smallest k with 2^k > 3^n
    Sigma { n: usize },

    /// Print the stopping time of s, or NOT-FOUND within the cap
    Stoptime {
        s: BigUint,
        /// Give up after this many steps
        #[arg(long, default_value_t = 10_000, value_name = "K")]
        cap: usize,
    },

    /// Solve the tuple congruences for n >= 4 and print each record
    Enumerate {
        n: usize,
        /// Tuple index window LO..HI (0-based, half-open)
        #[arg(long, value_name = "LO..HI")]
        range: Option<String>,
        #[arg(long, value_enum, default_value = "plain", value_name = "F")]
        format: OutputFormat,
    },

    /// Count solutions by stopping time for n >= 4
    Classify { n: usize },

    /// Print the residues mod 2^{sigma_n} with stopping time sigma_n, ascending
    Residues { n: usize },

    /// Print z_1..z_L from the seeds and the recurrence
    Zn {
        #[arg(long, value_name = "L")]
        limit: usize,
        /// Print each recurrence evaluation term by term (n >= 13, plain only)
        #[arg(long)]
        ledger: bool,
        #[arg(long, value_enum, default_value = "plain", value_name = "F")]
        format: OutputFormat,
    },

    /// Compute z_n by every affordable route and report agreement
    Verify {
        #[arg(long, value_name = "A")]
        from: usize,
        #[arg(long, value_name = "B")]
        to: usize,
        /// OEIS b-file to compare against
        #[arg(long, value_name = "PATH")]
        bfile: Option<PathBuf>,
        /// Brute-force scan budget: largest admissible sigma_n, in bits
        #[arg(long, value_name = "BITS")]
        budget: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = match run(cli.command, &mut out).and_then(|code| {
        out.flush()?;
        Ok(code)
    }) {
        Ok(code) => code,
        // a closed pipe (e.g. `| head`) is not a failure of ours
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    };
    code
}

/// Install the global rayon pool before any parallel work runs.
fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let requested = match flag {
        Some(count) => Some(count),
        None => match std::env::var("COLLATZ_SIGMA_THREADS") {
            Ok(raw) => Some(
                raw.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("COLLATZ_SIGMA_THREADS must be a thread count, got {raw:?}"))?,
            ),
            Err(std::env::VarError::NotPresent) => None,
            Err(e) => return Err(e.to_string()),
        },
    };
    if let Some(count) = requested {
        if count == 0 {
            return Err("thread count must be at least 1".to_string());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn bits_string(word: &ParityWord) -> String {
    word.bits().iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_range(raw: &str) -> Result<std::ops::Range<BigUint>, String> {
    let (lo, hi) = raw
        .split_once("..")
        .ok_or_else(|| format!("range must look like LO..HI, got {raw:?}"))?;
    let lo: BigUint = lo.parse().map_err(|_| format!("bad range start {lo:?}"))?;
    let hi: BigUint = hi.parse().map_err(|_| format!("bad range end {hi:?}"))?;
    Ok(lo..hi)
}

fn run(command: Command, out: &mut impl Write) -> io::Result<ExitCode> {
    match command {
        Command::Sigma { n } => {
            writeln!(out, "{}", sigma_exponent(n).sigma_n)?;
        }
        Command::Stoptime { s, cap } => match stopping_time(&s, cap) {
            Err(CollatzError::InvalidStart { .. }) => {
                return Ok(usage("stopping times are defined for s >= 2 only"));
            }
            Ok(StoppingTime::Found(k)) => writeln!(out, "{k}")?,
            Ok(StoppingTime::NotFound { .. }) => writeln!(out, "NOT-FOUND")?,
        },
        Command::Enumerate { n, range, format } => {
            if n < 4 {
                return Ok(usage("enumeration needs n >= 4; z_1..z_3 come from brute force"));
            }
            let range = match range.as_deref().map(parse_range).transpose() {
                Ok(r) => r,
                Err(msg) => return Ok(usage(&msg)),
            };
            let stream = match solution_stream(n, range) {
                Ok(s) => s,
                Err(e) => return Ok(usage(&e.to_string())),
            };
            for rec in stream {
                match format {
                    OutputFormat::Plain => {
                        writeln!(out, "{}   ({}, {})", rec.tuple.word(), rec.x, rec.y)?;
                    }
                    OutputFormat::Tsv => writeln!(
                        out,
                        "{}\t{}\t{}\t{}",
                        bits_string(rec.tuple.word()),
                        rec.x,
                        rec.y,
                        rec.sigma_x
                    )?,
                    OutputFormat::JsonLines => writeln!(
                        out,
                        "{{\"tuple\":\"{}\",\"x\":{},\"y\":{},\"sigma_x\":{}}}",
                        bits_string(rec.tuple.word()),
                        rec.x,
                        rec.y,
                        rec.sigma_x
                    )?,
                }
            }
        }
        Command::Classify { n } => {
            if n < 4 {
                return Ok(usage("classification needs n >= 4"));
            }
            let row = classify(n);
            for (sigma, count) in &row.counts {
                writeln!(out, "{sigma} {count}")?;
            }
            writeln!(out, "sum {}", row.total)?;
        }
        Command::Residues { n } => {
            if n < 4 {
                return Ok(usage("residue enumeration needs n >= 4"));
            }
            for x in residue_classes(n).members {
                writeln!(out, "{x}")?;
            }
        }
        Command::Zn { limit, ledger, format } => {
            if limit < 1 {
                return Ok(usage("--limit must be at least 1"));
            }
            if ledger && format != OutputFormat::Plain {
                return Ok(usage("--ledger output is plain-only"));
            }
            let series = zn_iterative(limit.max(12));
            if ledger {
                for n in 13..=limit {
                    let l = term_ledger(n, &series).expect("series covers all history");
                    writeln!(out, "# n={} j={}", l.n, l.j)?;
                    for row in &l.rows {
                        writeln!(out, "{} * {} = {}", row.coefficient, row.z, row.product)?;
                    }
                    writeln!(out, "z {}", l.z_n)?;
                }
            } else {
                for n in 1..=limit {
                    let z = series.get(n).expect("series covers the limit");
                    match format {
                        OutputFormat::Plain => writeln!(out, "{n} {z}")?,
                        OutputFormat::Tsv => writeln!(out, "{n}\t{z}")?,
                        OutputFormat::JsonLines => {
                            writeln!(out, "{{\"n\":{n},\"z\":{z}}}")?;
                        }
                    }
                }
            }
        }
        Command::Verify { from, to, bfile, budget } => {
            if from < 1 || from > to {
                return Ok(usage("need 1 <= --from <= --to"));
            }
            let entries = match bfile {
                None => None,
                Some(path) => {
                    let text = match fs::read_to_string(&path) {
                        Ok(t) => t,
                        Err(e) => return Ok(usage(&format!("{}: {e}", path.display()))),
                    };
                    match parse_bfile(&text) {
                        Ok(entries) => Some(entries),
                        Err(e) => return Ok(usage(&format!("{}: {e}", path.display()))),
                    }
                }
            };
            let budget = budget.map(ScanBudget::bits).unwrap_or_default();
            let report = cross_check(from, to, entries.as_deref(), budget, DEFAULT_TUPLE_BUDGET);
            writeln!(out, "n brute-force enumeration iterative b-file verdict")?;
            for row in &report.rows {
                let dash = |cell: Option<String>| cell.unwrap_or_else(|| "-".to_string());
                writeln!(
                    out,
                    "{} {} {} {} {} {}",
                    row.n,
                    dash(row.brute_force.as_ref().map(|v| v.to_string())),
                    dash(row.enumerated.as_ref().map(|v| v.to_string())),
                    dash(row.iterative.as_ref().map(|v| v.to_string())),
                    dash(row.bfile.as_ref().map(|v| v.to_string())),
                    if row.agree { "ok" } else { "MISMATCH" },
                )?;
                for note in &row.notes {
                    writeln!(out, "# {note}")?;
                }
            }
            if !report.all_agree() {
                out.flush()?;
                eprintln!("error: computed values disagree; see MISMATCH rows");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
