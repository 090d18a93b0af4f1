//! Report serialization (CSV and JSON-lines with fixed schemas), the on-disk
//! survey cache with atomic updates and resume, and derivation of
//! theorem-violation messages that drive the process exit code.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::curves::{GroupStructure, WeierstrassCurve};
use crate::divisors::SweepRow;
use crate::primes::PrimeSieve;
use crate::survey::{
    survey_range, survey_prime, CensusReport, DukeFinding, MertensReport, PrimeSurveyRecord,
    SurveyMode, Thm1Report, Thm3Report, ThresholdRule,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// number formatting
// ---------------------------------------------------------------------------

/// Formats with 6 significant digits: fixed notation while the decimal
/// exponent lies in [-4, 5], scientific (`1.23457e8`) outside, trailing
/// zeros stripped either way.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.5e}", v);
    let (mant, exp) = sci.split_once('e').expect("{:.5e} always carries an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 6);
    let sign = if neg { "-" } else { "" };
    if (-4..6).contains(&exp) {
        let (int_part, frac_part) = if exp >= 0 {
            let cut = (exp + 1) as usize;
            (digits[..cut].to_string(), digits[cut..].to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat((-exp - 1) as usize), digits))
        };
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let mant = digits.trim_end_matches('0');
        let (head, tail) = mant.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}

fn opt_u64_csv(v: Option<u64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn opt_u64_json(v: Option<u64>) -> String {
    v.map_or("null".into(), |x| x.to_string())
}

// ---------------------------------------------------------------------------
// CSV / JSONL writers (fixed schemas)
// ---------------------------------------------------------------------------

pub const SURVEY_HEADER: &str = "q,min_exponent,a,b,m1,m2,oracle_min,supersingular_min";

fn witness_parts(r: &PrimeSurveyRecord) -> (Option<u64>, Option<u64>, Option<u64>, Option<u64>) {
    let (a, b) = match &r.witness {
        Some(w) => (Some(w.a()), Some(w.b())),
        None => (None, None),
    };
    let (m1, m2) = match &r.witness_structure {
        Some(s) => (Some(s.m1), Some(s.m2)),
        None => (None, None),
    };
    (a, b, m1, m2)
}

pub fn survey_csv(records: &[PrimeSurveyRecord]) -> String {
    let mut out = format!("{SURVEY_HEADER}\n");
    for r in records {
        let (a, b, m1, m2) = witness_parts(r);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.q,
            opt_u64_csv(r.min_exponent),
            opt_u64_csv(a),
            opt_u64_csv(b),
            opt_u64_csv(m1),
            opt_u64_csv(m2),
            r.oracle_min,
            opt_u64_csv(r.supersingular_min)
        )
        .unwrap();
    }
    out
}

pub fn survey_jsonl(records: &[PrimeSurveyRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let (a, b, m1, m2) = witness_parts(r);
        writeln!(
            out,
            "{{\"q\":{},\"min_exponent\":{},\"a\":{},\"b\":{},\"m1\":{},\"m2\":{},\"oracle_min\":{},\"supersingular_min\":{}}}",
            r.q,
            opt_u64_json(r.min_exponent),
            opt_u64_json(a),
            opt_u64_json(b),
            opt_u64_json(m1),
            opt_u64_json(m2),
            r.oracle_min,
            opt_u64_json(r.supersingular_min)
        )
        .unwrap();
    }
    out
}

pub const CENSUS_HEADER: &str = "x,k1,observed,bound,exceeds";

pub fn census_csv(rows: &[CensusReport]) -> String {
    let mut out = format!("{CENSUS_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.x, r.k1, r.observed, fmt_sig(r.bound), r.exceeds)
            .unwrap();
    }
    out
}

pub fn census_jsonl(rows: &[CensusReport]) -> String {
    let mut out = String::new();
    for r in rows {
        writeln!(
            out,
            "{{\"x\":{},\"k1\":{},\"observed\":{},\"bound\":{},\"exceeds\":{}}}",
            r.x,
            r.k1,
            r.observed,
            fmt_sig(r.bound),
            r.exceeds
        )
        .unwrap();
    }
    out
}

pub const DUKE_HEADER: &str = "x,epsilon,q,p,k,exponent,threshold,a,b,genus2_bound";

pub fn duke_csv(findings: &[DukeFinding]) -> String {
    let mut out = format!("{DUKE_HEADER}\n");
    for f in findings {
        let (a, b) = match &f.realized {
            Some(e) => (e.a().to_string(), e.b().to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            f.x,
            fmt_sig(f.epsilon),
            f.q,
            f.p_divisor,
            f.k_order,
            f.target_exponent,
            fmt_sig(f.threshold),
            a,
            b,
            fmt_sig(f.genus2_reported_bound)
        )
        .unwrap();
    }
    out
}

pub fn duke_jsonl(findings: &[DukeFinding]) -> String {
    let mut out = String::new();
    for f in findings {
        let (a, b) = match &f.realized {
            Some(e) => (e.a().to_string(), e.b().to_string()),
            None => ("null".into(), "null".into()),
        };
        writeln!(
            out,
            "{{\"x\":{},\"epsilon\":{},\"q\":{},\"p\":{},\"k\":{},\"exponent\":{},\"threshold\":{},\"a\":{a},\"b\":{b},\"genus2_bound\":{}}}",
            f.x,
            fmt_sig(f.epsilon),
            f.q,
            f.p_divisor,
            f.k_order,
            f.target_exponent,
            fmt_sig(f.threshold),
            fmt_sig(f.genus2_reported_bound)
        )
        .unwrap();
    }
    out
}

pub const SWEEP_HEADER: &str = "y,z,u,H,H_shifted,estimate,ratio,ratio_shifted";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_sig(r.y),
            fmt_sig(r.z),
            fmt_sig(r.u),
            r.h,
            r.h_shifted,
            fmt_sig(r.estimate),
            fmt_sig(r.ratio),
            fmt_sig(r.ratio_shifted)
        )
        .unwrap();
    }
    out
}

pub fn sweep_jsonl(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for r in rows {
        writeln!(
            out,
            "{{\"y\":{},\"z\":{},\"u\":{},\"H\":{},\"H_shifted\":{},\"estimate\":{},\"ratio\":{},\"ratio_shifted\":{}}}",
            fmt_sig(r.y),
            fmt_sig(r.z),
            fmt_sig(r.u),
            r.h,
            r.h_shifted,
            fmt_sig(r.estimate),
            fmt_sig(r.ratio),
            fmt_sig(r.ratio_shifted)
        )
        .unwrap();
    }
    out
}

fn rule_label(rule: &ThresholdRule) -> String {
    match rule {
        ThresholdRule::ConstantEps(e) => format!("constant-eps:{}", fmt_sig(*e)),
        ThresholdRule::DukeLog => "duke-log".into(),
    }
}

pub const THM1_HEADER: &str =
    "q,min_exponent,threshold,m1,m2,m1_divides,m1_lower_ok,divisor_in_interval,outside_interval,head_large,tail_large,in_k";

pub fn thm1_csv(rep: &Thm1Report) -> String {
    let mut out = format!(
        "# x={} rule={} eta={} surveyed={} exceptions={} fraction={}\n{THM1_HEADER}\n",
        rep.x,
        rule_label(&rep.rule),
        fmt_sig(rep.eta),
        rep.surveyed,
        rep.exceptions.len(),
        fmt_sig(rep.fraction)
    );
    for e in &rep.exceptions {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            e.q,
            e.min_exponent,
            fmt_sig(e.threshold),
            e.m1,
            e.m2,
            e.m1_divides_q_minus_1,
            e.m1_lower_bound_ok,
            e.divisor_in_interval,
            e.kset.outside_interval,
            e.kset.head_large,
            e.kset.tail_large,
            e.kset.in_k
        )
        .unwrap();
    }
    out
}

pub fn thm1_jsonl(rep: &Thm1Report) -> String {
    let mut out = format!(
        "{{\"x\":{},\"rule\":\"{}\",\"eta\":{},\"surveyed\":{},\"exceptions\":{},\"fraction\":{}}}\n",
        rep.x,
        rule_label(&rep.rule),
        fmt_sig(rep.eta),
        rep.surveyed,
        rep.exceptions.len(),
        fmt_sig(rep.fraction)
    );
    for e in &rep.exceptions {
        writeln!(
            out,
            "{{\"q\":{},\"min_exponent\":{},\"threshold\":{},\"m1\":{},\"m2\":{},\"m1_divides\":{},\"m1_lower_ok\":{},\"divisor_in_interval\":{},\"outside_interval\":{},\"head_large\":{},\"tail_large\":{},\"in_k\":{}}}",
            e.q,
            e.min_exponent,
            fmt_sig(e.threshold),
            e.m1,
            e.m2,
            e.m1_divides_q_minus_1,
            e.m1_lower_bound_ok,
            e.divisor_in_interval,
            e.kset.outside_interval,
            e.kset.head_large,
            e.kset.tail_large,
            e.kset.in_k
        )
        .unwrap();
    }
    out
}

pub const THM3_HEADER: &str = "q,min_exponent,threshold,m1,m2,divisor_in_window";

pub fn thm3_csv(rep: &Thm3Report) -> String {
    let mut out = format!(
        "# x={} epsilon={} eta={} window_lo={} window_hi={} surveyed={} exceptions={} fraction={}\n{THM3_HEADER}\n",
        rep.x,
        fmt_sig(rep.epsilon),
        fmt_sig(rep.eta),
        fmt_sig(rep.window.0),
        fmt_sig(rep.window.1),
        rep.surveyed,
        rep.exceptions.len(),
        fmt_sig(rep.fraction)
    );
    for e in &rep.exceptions {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            e.q,
            e.min_exponent,
            fmt_sig(e.threshold),
            e.m1,
            e.m2,
            e.divisor_in_window
        )
        .unwrap();
    }
    out
}

pub fn thm3_jsonl(rep: &Thm3Report) -> String {
    let mut out = format!(
        "{{\"x\":{},\"epsilon\":{},\"eta\":{},\"window_lo\":{},\"window_hi\":{},\"surveyed\":{},\"exceptions\":{},\"fraction\":{}}}\n",
        rep.x,
        fmt_sig(rep.epsilon),
        fmt_sig(rep.eta),
        fmt_sig(rep.window.0),
        fmt_sig(rep.window.1),
        rep.surveyed,
        rep.exceptions.len(),
        fmt_sig(rep.fraction)
    );
    for e in &rep.exceptions {
        writeln!(
            out,
            "{{\"q\":{},\"min_exponent\":{},\"threshold\":{},\"m1\":{},\"m2\":{},\"divisor_in_window\":{}}}",
            e.q,
            e.min_exponent,
            fmt_sig(e.threshold),
            e.m1,
            e.m2,
            e.divisor_in_window
        )
        .unwrap();
    }
    out
}

pub const MERTENS_HEADER: &str = "x,epsilon,y,z,sum,target,gap";

pub fn mertens_csv(r: &MertensReport) -> String {
    format!(
        "{MERTENS_HEADER}\n{},{},{},{},{},{},{}\n",
        r.x,
        fmt_sig(r.epsilon),
        fmt_sig(r.y),
        fmt_sig(r.z),
        fmt_sig(r.prime_sum),
        fmt_sig(r.target),
        fmt_sig(r.gap)
    )
}

pub fn mertens_jsonl(r: &MertensReport) -> String {
    format!(
        "{{\"x\":{},\"epsilon\":{},\"y\":{},\"z\":{},\"sum\":{},\"target\":{},\"gap\":{}}}\n",
        r.x,
        fmt_sig(r.epsilon),
        fmt_sig(r.y),
        fmt_sig(r.z),
        fmt_sig(r.prime_sum),
        fmt_sig(r.target),
        fmt_sig(r.gap)
    )
}

pub const BV_HEADER: &str = "x,y,z,error_sum,normalized";

pub fn bv_csv(x: u64, y: f64, z: f64, error_sum: f64, normalized: f64) -> String {
    format!(
        "{BV_HEADER}\n{x},{},{},{},{}\n",
        fmt_sig(y),
        fmt_sig(z),
        fmt_sig(error_sum),
        fmt_sig(normalized)
    )
}

pub fn bv_jsonl(x: u64, y: f64, z: f64, error_sum: f64, normalized: f64) -> String {
    format!(
        "{{\"x\":{x},\"y\":{},\"z\":{},\"error_sum\":{},\"normalized\":{}}}\n",
        fmt_sig(y),
        fmt_sig(z),
        fmt_sig(error_sum),
        fmt_sig(normalized)
    )
}

pub const SIEVE_HEADER: &str = "limit,k,a,count";

pub fn sieve_csv(limit: u64, k: u64, a: i64, count: u64) -> String {
    format!("{SIEVE_HEADER}\n{limit},{k},{a},{count}\n")
}

pub fn sieve_jsonl(limit: u64, k: u64, a: i64, count: u64) -> String {
    format!("{{\"limit\":{limit},\"k\":{k},\"a\":{a},\"count\":{count}}}\n")
}

pub const HXYZ_HEADER: &str = "x,y,z,h";

pub fn hxyz_csv(x: u64, y: f64, z: f64, h: u64) -> String {
    format!("{HXYZ_HEADER}\n{x},{},{},{h}\n", fmt_sig(y), fmt_sig(z))
}

pub fn hxyz_jsonl(x: u64, y: f64, z: f64, h: u64) -> String {
    format!("{{\"x\":{x},\"y\":{},\"z\":{},\"h\":{h}}}\n", fmt_sig(y), fmt_sig(z))
}

pub const HXYZ_SHIFTED_HEADER: &str = "x,y,z,lambda,h";

pub fn hxyz_shifted_csv(x: u64, y: f64, z: f64, lambda: i64, h: u64) -> String {
    format!("{HXYZ_SHIFTED_HEADER}\n{x},{},{},{lambda},{h}\n", fmt_sig(y), fmt_sig(z))
}

pub fn hxyz_shifted_jsonl(x: u64, y: f64, z: f64, lambda: i64, h: u64) -> String {
    format!(
        "{{\"x\":{x},\"y\":{},\"z\":{},\"lambda\":{lambda},\"h\":{h}}}\n",
        fmt_sig(y),
        fmt_sig(z)
    )
}

pub const BOUNDS_HEADER: &str =
    "q,g,k,trivial_bound,exponent_floor,qk_u,qk_v,qk_bound,outside_interval,head_large,tail_large,in_k";

#[allow(clippy::too_many_arguments)]
pub fn bounds_csv(
    q: u64,
    g: u32,
    k: &[u64],
    trivial: f64,
    floor: f64,
    qk_u: f64,
    qk_v: f64,
    qk_bound: f64,
    flags: crate::attain::KSetFlags,
) -> String {
    let k_join: Vec<String> = k.iter().map(|v| v.to_string()).collect();
    format!(
        "{BOUNDS_HEADER}\n{q},{g},{},{},{},{},{},{},{},{},{},{}\n",
        k_join.join(";"),
        fmt_sig(trivial),
        fmt_sig(floor),
        fmt_sig(qk_u),
        fmt_sig(qk_v),
        fmt_sig(qk_bound),
        flags.outside_interval,
        flags.head_large,
        flags.tail_large,
        flags.in_k
    )
}

#[allow(clippy::too_many_arguments)]
pub fn bounds_jsonl(
    q: u64,
    g: u32,
    k: &[u64],
    trivial: f64,
    floor: f64,
    qk_u: f64,
    qk_v: f64,
    qk_bound: f64,
    flags: crate::attain::KSetFlags,
) -> String {
    let k_join: Vec<String> = k.iter().map(|v| v.to_string()).collect();
    format!(
        "{{\"q\":{q},\"g\":{g},\"k\":[{}],\"trivial_bound\":{},\"exponent_floor\":{},\"qk_u\":{},\"qk_v\":{},\"qk_bound\":{},\"outside_interval\":{},\"head_large\":{},\"tail_large\":{},\"in_k\":{}}}\n",
        k_join.join(","),
        fmt_sig(trivial),
        fmt_sig(floor),
        fmt_sig(qk_u),
        fmt_sig(qk_v),
        fmt_sig(qk_bound),
        flags.outside_interval,
        flags.head_large,
        flags.tail_large,
        flags.in_k
    )
}

// ---------------------------------------------------------------------------
// survey cache
// ---------------------------------------------------------------------------

/// Cache file name inside the cache directory. One line per surveyed prime,
/// `v1|q|mode|min_exponent|a|b|m1|m2|oracle_min|supersingular_min|class_count`
/// with empty fields for absent values and mode `e` (exhaustive) or `o`
/// (oracle-only).
pub const CACHE_FILE: &str = "survey.cache";
const CACHE_VERSION: &str = "v1";
const CACHE_FIELDS: usize = 11;

fn cache_line(r: &PrimeSurveyRecord) -> String {
    let (a, b, m1, m2) = witness_parts(r);
    let mode = if r.min_exponent.is_some() { "e" } else { "o" };
    format!(
        "{CACHE_VERSION}|{}|{mode}|{}|{}|{}|{}|{}|{}|{}|{}",
        r.q,
        opt_u64_csv(r.min_exponent),
        opt_u64_csv(a),
        opt_u64_csv(b),
        opt_u64_csv(m1),
        opt_u64_csv(m2),
        r.oracle_min,
        opt_u64_csv(r.supersingular_min),
        opt_u64_csv(r.class_count)
    )
}

fn parse_cache_line(line: &str) -> std::result::Result<PrimeSurveyRecord, String> {
    let fields: Vec<&str> = line.split('|').collect();
    if fields[0] != CACHE_VERSION {
        return Err(format!(
            "unsupported cache version {:?} (this build reads {CACHE_VERSION})",
            fields[0]
        ));
    }
    if fields.len() != CACHE_FIELDS {
        return Err(format!("expected {CACHE_FIELDS} fields, found {}", fields.len()));
    }
    let req_u64 = |s: &str, name: &str| -> std::result::Result<u64, String> {
        s.parse::<u64>().map_err(|_| format!("bad {name} field {s:?}"))
    };
    let opt_u64 = |s: &str, name: &str| -> std::result::Result<Option<u64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            req_u64(s, name).map(Some)
        }
    };
    let q = req_u64(fields[1], "q")?;
    let min_exponent = opt_u64(fields[3], "min_exponent")?;
    let a = opt_u64(fields[4], "a")?;
    let b = opt_u64(fields[5], "b")?;
    let m1 = opt_u64(fields[6], "m1")?;
    let m2 = opt_u64(fields[7], "m2")?;
    let oracle_min = req_u64(fields[8], "oracle_min")?;
    let supersingular_min = opt_u64(fields[9], "supersingular_min")?;
    let class_count = opt_u64(fields[10], "class_count")?;
    let record = match fields[2] {
        "o" => {
            if min_exponent.is_some() || a.is_some() || m1.is_some() {
                return Err("oracle-only record carries scan fields".into());
            }
            PrimeSurveyRecord {
                q,
                min_exponent: None,
                witness: None,
                witness_structure: None,
                oracle_min,
                supersingular_min,
                class_count,
            }
        }
        "e" => {
            let (Some(a), Some(b), Some(m1), Some(m2)) = (a, b, m1, m2) else {
                return Err("exhaustive record is missing witness fields".into());
            };
            let witness = WeierstrassCurve::new(q, a, b).map_err(|e| e.to_string())?;
            let n = m1
                .checked_mul(m2)
                .ok_or_else(|| format!("group order m1*m2 overflows at q = {q}"))?;
            let structure = GroupStructure { q, n, m1, m2 };
            structure.check_invariants().map_err(|e| e.to_string())?;
            PrimeSurveyRecord {
                q,
                min_exponent,
                witness: Some(witness),
                witness_structure: Some(structure),
                oracle_min,
                supersingular_min,
                class_count,
            }
        }
        other => return Err(format!("unknown survey mode tag {other:?}")),
    };
    record.check_invariants().map_err(|e| e.to_string())?;
    Ok(record)
}

/// Rewrites the cache atomically: serialize to `survey.cache.tmp` in the same
/// directory, then rename over the final name. Records are sorted by q.
pub fn write_cache(dir: &Path, records: &[PrimeSurveyRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut sorted: Vec<&PrimeSurveyRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.q);
    let mut out = String::new();
    for r in sorted {
        out.push_str(&cache_line(r));
        out.push('\n');
    }
    let tmp = dir.join(format!("{CACHE_FILE}.tmp"));
    let path = dir.join(CACHE_FILE);
    fs::write(&tmp, out)?;
    fs::rename(&tmp, &path)?;
    Ok(())
}

/// Reads the cache, if any. A missing file is an empty cache; any malformed
/// or version-mismatched line aborts with its byte offset. Stale `.tmp`
/// spill files are never read. Duplicate lines for one prime collapse to the
/// richer (exhaustive) record.
pub fn read_cache(dir: &Path) -> Result<Vec<PrimeSurveyRecord>> {
    let path = dir.join(CACHE_FILE);
    let data = match fs::read(&path) {
        Ok(d) => d,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut by_q: HashMap<u64, PrimeSurveyRecord> = HashMap::new();
    let mut offset = 0u64;
    for chunk in data.split(|&b| b == b'\n') {
        let line_len = chunk.len() as u64 + 1;
        if !chunk.is_empty() {
            let text = std::str::from_utf8(chunk).map_err(|_| Error::CacheRead {
                path: path.clone(),
                offset,
                reason: "line is not valid UTF-8".into(),
            })?;
            let rec = parse_cache_line(text).map_err(|reason| Error::CacheRead {
                path: path.clone(),
                offset,
                reason,
            })?;
            match by_q.get(&rec.q) {
                Some(old) if old.min_exponent.is_some() && rec.min_exponent.is_none() => {}
                _ => {
                    by_q.insert(rec.q, rec);
                }
            }
        }
        offset += line_len;
    }
    let mut recs: Vec<PrimeSurveyRecord> = by_q.into_values().collect();
    recs.sort_by_key(|r| r.q);
    Ok(recs)
}

fn mode_matches(r: &PrimeSurveyRecord, mode: SurveyMode) -> bool {
    match mode {
        SurveyMode::Exhaustive => r.min_exponent.is_some(),
        SurveyMode::OracleOnly => r.min_exponent.is_none(),
    }
}

/// Surveys a range through the cache. With `resume`, cached records of the
/// requested mode are reused and only missing primes are computed; without
/// it every prime is recomputed. Either way the union of old and new records
/// is written back atomically (exhaustive records are never downgraded), and
/// the returned range is byte-for-byte what an uncached run would produce.
pub fn survey_with_cache(
    x_lo: u64,
    x_hi: u64,
    mode: SurveyMode,
    p_exhaustive: u64,
    cache_dir: Option<&Path>,
    resume: bool,
) -> Result<Vec<PrimeSurveyRecord>> {
    let Some(dir) = cache_dir else {
        return survey_range(x_lo, x_hi, mode, p_exhaustive);
    };
    let cached = read_cache(dir)?;
    let usable: HashMap<u64, &PrimeSurveyRecord> = if resume {
        cached
            .iter()
            .filter(|r| mode_matches(r, mode))
            .map(|r| (r.q, r))
            .collect()
    } else {
        HashMap::new()
    };
    let lo = x_lo.max(5);
    let mut out: Vec<PrimeSurveyRecord> = Vec::new();
    let mut fresh: Vec<PrimeSurveyRecord> = Vec::new();
    if x_hi >= lo {
        let sieve = PrimeSieve::new(x_hi)?;
        let missing: Vec<u64> = sieve
            .primes_in(lo, x_hi)
            .filter(|q| !usable.contains_key(q))
            .collect();
        fresh = missing
            .par_iter()
            .map(|&q| survey_prime(q, mode, p_exhaustive))
            .collect::<Result<Vec<_>>>()?;
        let fresh_by_q: HashMap<u64, &PrimeSurveyRecord> =
            fresh.iter().map(|r| (r.q, r)).collect();
        for q in sieve.primes_in(lo, x_hi) {
            let r = usable
                .get(&q)
                .copied()
                .or_else(|| fresh_by_q.get(&q).copied())
                .expect("every prime in range is cached or freshly computed");
            out.push(r.clone());
        }
    }
    let mut merged: HashMap<u64, PrimeSurveyRecord> =
        cached.into_iter().map(|r| (r.q, r)).collect();
    for r in fresh {
        match merged.get(&r.q) {
            Some(old) if old.min_exponent.is_some() && r.min_exponent.is_none() => {}
            _ => {
                merged.insert(r.q, r);
            }
        }
    }
    let all: Vec<PrimeSurveyRecord> = merged.into_values().collect();
    write_cache(dir, &all)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// theorem-violation derivation (drives the exit code)
// ---------------------------------------------------------------------------

pub fn survey_violations(records: &[PrimeSurveyRecord]) -> Vec<String> {
    records
        .iter()
        .filter_map(|r| r.check_invariants().err().map(|e| e.to_string()))
        .collect()
}

pub fn census_violations(rows: &[CensusReport]) -> Vec<String> {
    rows.iter()
        .filter(|r| r.exceeds)
        .map(|r| {
            format!(
                "census ceiling violated at x = {}, k1 = {}: observed {} > bound {}",
                r.x,
                r.k1,
                r.observed,
                fmt_sig(r.bound)
            )
        })
        .collect()
}

pub fn duke_violations(findings: &[DukeFinding]) -> Vec<String> {
    findings
        .iter()
        .filter_map(|f| f.check_invariants().err().map(|e| e.to_string()))
        .collect()
}

pub fn thm1_violations(rep: &Thm1Report) -> Vec<String> {
    rep.exceptions
        .iter()
        .filter(|e| !e.m1_divides_q_minus_1 || !e.m1_lower_bound_ok)
        .map(|e| {
            format!(
                "exceptional prime {} fails the witness conditions (m1 = {}, divides: {}, large: {})",
                e.q, e.m1, e.m1_divides_q_minus_1, e.m1_lower_bound_ok
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
