//! Command-line front end: argument schemas for the twelve subcommands,
//! dispatch to the library, report rendering, and exit-code policy
//! (0 clean, 1 a checked invariant failed, 2 usage or computation error).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::curves::DEFAULT_P_EXHAUSTIVE;
use crate::divisors::{count_h, count_h_shifted, ratio_sweep, DivisorWindow, ZRule};
use crate::primes::{isqrt, prime_count, PrimeSieve};
use crate::report;
use crate::survey::{
    bv_check, duke_construct, mertens_check, qk_census, verify_thm1, verify_thm3, SurveyMode,
    ThresholdRule,
};
use crate::{attain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Scan every isomorphism class and certify structures.
    Exhaustive,
    /// Only the theory-side minimum; no curve arithmetic.
    Oracle,
}

impl From<ModeArg> for SurveyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exhaustive => SurveyMode::Exhaustive,
            ModeArg::Oracle => SurveyMode::OracleOnly,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "smallexp",
    version,
    about = "Group-exponent statistics for curves over prime fields"
)]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Survey cache directory (falls back to $SMALLEXP_CACHE_DIR)
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count primes up to a limit in a residue class a mod k
    Sieve {
        #[arg(long)]
        limit: u64,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        a: i64,
    },
    /// Count integers n ≤ x with a divisor in (y, z]
    Hxyz {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        z: f64,
    },
    /// Count primes p ≤ x with a divisor of p + lambda in (y, z]
    HxyzShifted {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        lambda: i64,
    },
    /// Divisor-density ratio table across a list of windows
    FordSweep {
        #[arg(long)]
        x: u64,
        /// Window lower edges, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        /// Upper-edge rule: double, square, or fixed:<z>
        #[arg(long, default_value = "double")]
        z_rule: String,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        lambda: i64,
    },
    /// Minimum group exponent per prime field
    Survey {
        #[arg(long, default_value_t = 5)]
        x_lo: u64,
        #[arg(long)]
        x_hi: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        /// Reuse cached records and compute only the missing primes
        #[arg(long)]
        resume: bool,
        /// Largest field scanned exhaustively / certified non-cyclically
        #[arg(long, default_value_t = DEFAULT_P_EXHAUSTIVE)]
        p_exhaustive: u64,
    },
    /// Count primes in (x/2, x] admitting full level-k1 torsion, with ceiling
    Census {
        #[arg(long)]
        x: u64,
        /// If omitted, sweep k1 = 1 .. ⌊√x⌋+1
        #[arg(long)]
        k1: Option<u64>,
    },
    /// Construct curves with exponent ≤ q^(3/4+eps) from divisors of q−1
    Duke {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_P_EXHAUSTIVE)]
        p_exhaustive: u64,
    },
    /// Prime-reciprocal sum over the construction window vs its limit
    Mertens {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Equidistribution error of primes ≡ 1 mod p, summed over p in (y, z]
    Bv {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        z: f64,
    },
    /// Exponent bounds and size-condition flags for one (q, g, k) triple
    Bounds {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        genus: u32,
        /// Ceiling tuple k1 ≥ k2 ≥ …, comma separated (length 2g−1)
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
        /// Interval half-width exponent; defaults to 1/(200g)
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Classify primes whose minimum exponent beats q^(3/4+eps)
    Thm1 {
        #[arg(long)]
        x: u64,
        /// Constant threshold exponent offset (default 0)
        #[arg(long, conflicts_with = "duke_log")]
        epsilon: Option<f64>,
        /// Use the q^(3/4)/log q threshold instead
        #[arg(long)]
        duke_log: bool,
        #[arg(long, default_value_t = 0.005)]
        eta: f64,
        #[arg(long, default_value_t = DEFAULT_P_EXHAUSTIVE)]
        p_exhaustive: u64,
        #[arg(long)]
        resume: bool,
    },
    /// Classify primes whose minimum exponent beats q^(1/2+eps)
    Thm3 {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_P_EXHAUSTIVE)]
        p_exhaustive: u64,
        #[arg(long)]
        resume: bool,
    },
}

impl Cli {
    fn cache_dir(&self) -> Option<PathBuf> {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os("SMALLEXP_CACHE_DIR").map(PathBuf::from))
    }
}

fn parse_z_rule(s: &str) -> Result<ZRule> {
    match s {
        "double" => Ok(ZRule::Double),
        "square" => Ok(ZRule::Square),
        _ => {
            if let Some(v) = s.strip_prefix("fixed:") {
                let z: f64 = v.parse().map_err(|_| {
                    Error::InvalidArgument(format!("fixed z-rule needs a number, got {v:?}"))
                })?;
                Ok(ZRule::Fixed(z))
            } else {
                Err(Error::InvalidArgument(format!(
                    "z-rule must be double, square, or fixed:<z>, got {s:?}"
                )))
            }
        }
    }
}

/// Dispatches one parsed invocation. Returns the rendered report and any
/// violated theorem-check invariants (which map to exit code 1).
pub fn run(cli: &Cli) -> Result<(String, Vec<String>)> {
    let format = cli.format;
    match &cli.command {
        Command::Sieve { limit, k, a } => {
            let sieve = PrimeSieve::new(*limit)?;
            let count = prime_count(&sieve, *limit as f64, *k, *a)?;
            let text = match format {
                Format::Csv => report::sieve_csv(*limit, *k, *a, count),
                Format::Jsonl => report::sieve_jsonl(*limit, *k, *a, count),
            };
            Ok((text, Vec::new()))
        }
        Command::Hxyz { x, y, z } => {
            let w = DivisorWindow::new(*x, *y, *z)?;
            let h = count_h(&w)?;
            let text = match format {
                Format::Csv => report::hxyz_csv(*x, *y, *z, h),
                Format::Jsonl => report::hxyz_jsonl(*x, *y, *z, h),
            };
            Ok((text, Vec::new()))
        }
        Command::HxyzShifted { x, y, z, lambda } => {
            let sieve = PrimeSieve::new((*x).max(2))?;
            let w = DivisorWindow::new(*x, *y, *z)?;
            let h = count_h_shifted(&sieve, &w, *lambda)?;
            let text = match format {
                Format::Csv => report::hxyz_shifted_csv(*x, *y, *z, *lambda, h),
                Format::Jsonl => report::hxyz_shifted_jsonl(*x, *y, *z, *lambda, h),
            };
            Ok((text, Vec::new()))
        }
        Command::FordSweep { x, y, z_rule, lambda } => {
            let rule = parse_z_rule(z_rule)?;
            let sieve = PrimeSieve::new((*x).max(2))?;
            let rows = ratio_sweep(&sieve, *x, y, rule, *lambda)?;
            let text = match format {
                Format::Csv => report::sweep_csv(&rows),
                Format::Jsonl => report::sweep_jsonl(&rows),
            };
            Ok((text, Vec::new()))
        }
        Command::Survey { x_lo, x_hi, mode, resume, p_exhaustive } => {
            let records = report::survey_with_cache(
                *x_lo,
                *x_hi,
                (*mode).into(),
                *p_exhaustive,
                cli.cache_dir().as_deref(),
                *resume,
            )?;
            let violations = report::survey_violations(&records);
            let text = match format {
                Format::Csv => report::survey_csv(&records),
                Format::Jsonl => report::survey_jsonl(&records),
            };
            Ok((text, violations))
        }
        Command::Census { x, k1 } => {
            let ks: Vec<u64> = match k1 {
                Some(k) => vec![*k],
                None => (1..=isqrt(*x) + 1).collect(),
            };
            let mut rows = Vec::with_capacity(ks.len());
            for k in ks {
                rows.push(qk_census(*x, k)?);
            }
            // test hook: force the ceiling so the violation exit path can be
            // exercised without a genuine counterexample
            if let Ok(s) = std::env::var("SMALLEXP_FAULT_CENSUS_BOUND") {
                let forced: f64 = s.parse().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "SMALLEXP_FAULT_CENSUS_BOUND must be a number, got {s:?}"
                    ))
                })?;
                for r in &mut rows {
                    r.bound = forced;
                    r.exceeds = (r.observed as f64) > forced;
                }
            }
            let violations = report::census_violations(&rows);
            let text = match format {
                Format::Csv => report::census_csv(&rows),
                Format::Jsonl => report::census_jsonl(&rows),
            };
            Ok((text, violations))
        }
        Command::Duke { x, epsilon, p_exhaustive } => {
            let findings = duke_construct(*x, *epsilon, *p_exhaustive)?;
            let violations = report::duke_violations(&findings);
            let text = match format {
                Format::Csv => report::duke_csv(&findings),
                Format::Jsonl => report::duke_jsonl(&findings),
            };
            Ok((text, violations))
        }
        Command::Mertens { x, epsilon } => {
            let r = mertens_check(*x, *epsilon)?;
            let text = match format {
                Format::Csv => report::mertens_csv(&r),
                Format::Jsonl => report::mertens_jsonl(&r),
            };
            Ok((text, Vec::new()))
        }
        Command::Bv { x, y, z } => {
            let (error_sum, normalized) = bv_check(*x, *y, *z)?;
            let text = match format {
                Format::Csv => report::bv_csv(*x, *y, *z, error_sum, normalized),
                Format::Jsonl => report::bv_jsonl(*x, *y, *z, error_sum, normalized),
            };
            Ok((text, Vec::new()))
        }
        Command::Bounds { q, genus, k, eta } => {
            let g = *genus;
            if g == 0 {
                return Err(Error::InvalidArgument("genus must be at least 1".into()));
            }
            let want = 2 * g as usize - 1;
            if k.len() != want {
                return Err(Error::InvalidArgument(format!(
                    "bounds needs exactly 2g−1 = {want} ceiling entries, got {}",
                    k.len()
                )));
            }
            let trivial = attain::trivial_exponent_bound(*q, g)?;
            let floor = attain::exponent_floor(*q, g, k)?;
            let (qk_u, qk_v, qk_bound) = attain::qk_bound(*q, g, k)?;
            let eta = eta.unwrap_or(1.0 / (200.0 * g as f64));
            let flags = attain::k_set_membership(*q, eta, g, k)?;
            let text = match format {
                Format::Csv => {
                    report::bounds_csv(*q, g, k, trivial, floor, qk_u, qk_v, qk_bound, flags)
                }
                Format::Jsonl => {
                    report::bounds_jsonl(*q, g, k, trivial, floor, qk_u, qk_v, qk_bound, flags)
                }
            };
            Ok((text, Vec::new()))
        }
        Command::Thm1 { x, epsilon, duke_log, eta, p_exhaustive, resume } => {
            let rule = if *duke_log {
                ThresholdRule::DukeLog
            } else {
                ThresholdRule::ConstantEps(epsilon.unwrap_or(0.0))
            };
            let records = report::survey_with_cache(
                5,
                *x,
                SurveyMode::OracleOnly,
                *p_exhaustive,
                cli.cache_dir().as_deref(),
                *resume,
            )?;
            let rep = verify_thm1(&records, *x, rule, *eta)?;
            let violations = report::thm1_violations(&rep);
            let text = match format {
                Format::Csv => report::thm1_csv(&rep),
                Format::Jsonl => report::thm1_jsonl(&rep),
            };
            Ok((text, violations))
        }
        Command::Thm3 { x, epsilon, p_exhaustive, resume } => {
            let records = report::survey_with_cache(
                5,
                *x,
                SurveyMode::OracleOnly,
                *p_exhaustive,
                cli.cache_dir().as_deref(),
                *resume,
            )?;
            let rep = verify_thm3(&records, *x, *epsilon)?;
            let text = match format {
                Format::Csv => report::thm3_csv(&rep),
                Format::Jsonl => report::thm3_jsonl(&rep),
            };
            // the window check is diagnostic; no hard invariant rides on it
            Ok((text, Vec::new()))
        }
    }
}

/// Full process behavior around `run`: pool sizing, report output, exit code.
pub fn main_run(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not size the worker pool: {e}");
            return 2;
        }
    }
    match run(&cli) {
        Ok((text, violations)) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            } else {
                print!("{text}");
            }
            if violations.is_empty() {
                0
            } else {
                for v in &violations {
                    eprintln!("violation: {v}");
                }
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("smallexp").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_and_kebab_names() {
        let cli = parse(&["survey", "--x-hi", "500"]);
        match cli.command {
            Command::Survey { x_lo, x_hi, mode, resume, p_exhaustive } => {
                assert_eq!((x_lo, x_hi), (5, 500));
                assert_eq!(mode, ModeArg::Exhaustive);
                assert!(!resume);
                assert_eq!(p_exhaustive, DEFAULT_P_EXHAUSTIVE);
            }
            other => panic!("parsed {other:?}"),
        }
        assert_eq!(cli.format, Format::Csv);
        parse(&["hxyz-shifted", "--x", "30", "--y", "2", "--z", "4", "--lambda", "-1"]);
        parse(&["ford-sweep", "--x", "1000", "--y", "5,10", "--z-rule", "square"]);
        parse(&["thm1", "--x", "2000", "--duke-log"]);
    }

    #[test]
    fn thm1_threshold_flags_conflict() {
        let r = Cli::try_parse_from(["smallexp", "thm1", "--x", "100", "--epsilon", "0.01", "--duke-log"]);
        assert!(r.is_err());
    }

    #[test]
    fn z_rule_parsing() {
        assert_eq!(parse_z_rule("double").unwrap(), ZRule::Double);
        assert_eq!(parse_z_rule("square").unwrap(), ZRule::Square);
        assert_eq!(parse_z_rule("fixed:25.5").unwrap(), ZRule::Fixed(25.5));
        assert!(parse_z_rule("fixed:x").is_err());
        assert!(parse_z_rule("triple").is_err());
    }

    #[test]
    fn run_sieve_and_hxyz() {
        let (text, v) = run(&parse(&["sieve", "--limit", "100"])).unwrap();
        assert_eq!(text, "limit,k,a,count\n100,1,0,25\n");
        assert!(v.is_empty());
        let (text, _) = run(&parse(&["hxyz", "--x", "100", "--y", "2", "--z", "4"])).unwrap();
        assert_eq!(text, "x,y,z,h\n100,2,4,50\n");
        let (text, _) = run(&parse(&[
            "--format", "jsonl", "hxyz", "--x", "100", "--y", "2", "--z", "4",
        ]))
        .unwrap();
        assert_eq!(text, "{\"x\":100,\"y\":2,\"z\":4,\"h\":50}\n");
    }

    #[test]
    fn run_census_row() {
        let (text, v) = run(&parse(&["census", "--x", "100", "--k1", "2"])).unwrap();
        assert_eq!(text, "x,k1,observed,bound,exceeds\n100,2,10,862.125,false\n");
        assert!(v.is_empty());
    }

    #[test]
    fn run_bounds_requires_tuple_length() {
        let cli = parse(&["bounds", "--q", "29", "--genus", "2", "--k", "2,2"]);
        assert!(matches!(run(&cli), Err(Error::InvalidArgument(_))));
        let cli = parse(&["bounds", "--q", "29", "--genus", "2", "--k", "2,2,1"]);
        let (text, _) = run(&cli).unwrap();
        assert!(text.starts_with("q,g,k,"));
        assert!(text.contains("29,2,2;2;1,"));
    }

    #[test]
    fn run_duke_empty_interval() {
        let (text, v) = run(&parse(&["duke", "--x", "100", "--epsilon", "0.05"])).unwrap();
        assert_eq!(text, format!("{}\n", report::DUKE_HEADER));
        assert!(v.is_empty());
    }
}
