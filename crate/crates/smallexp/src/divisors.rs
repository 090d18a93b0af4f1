//! Exact divisor-interval counts H(x,y,z) and the shifted-prime variant,
//! plus the closed-form upper-estimate x·u^δ·(log(2/u))^{−3/2} used for
//! ratio sweeps.
//!
//! H is computed by marking multiples of every integer d ∈ (y, z] in a bit
//! array over [1, x], segmented so the pass is cache-friendly and
//! parallelizable; the cost is ~x·Σ 1/d rather than per-n factorization.

use rayon::prelude::*;

use crate::primes::{integer_gt, integer_le, PrimeSieve};
use crate::{Error, Result};

/// Largest supported x for the marking pass.
pub const COUNT_CEILING: u64 = 1_000_000_000;

/// δ = 1 − (1 + log log 2)/log 2 = 0.086071…
pub fn delta() -> f64 {
    1.0 - (1.0 + std::f64::consts::LN_2.ln()) / std::f64::consts::LN_2
}

/// Numbers per marking segment.
const SEGMENT: u64 = 1 << 20;

/// Counting window: n ≤ x with a divisor d, y < d ≤ z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorWindow {
    pub x: u64,
    pub y: f64,
    pub z: f64,
}

impl DivisorWindow {
    /// Requires 0 < y ≤ z ≤ x (y = z is the legal empty window).
    pub fn new(x: u64, y: f64, z: f64) -> Result<DivisorWindow> {
        if x == 0 {
            return Err(Error::InvalidArgument("x must be positive".into()));
        }
        if !(y > 0.0) || !(z >= y) || !(z <= x as f64) {
            return Err(Error::InvalidArgument(format!(
                "window requires 0 < y ≤ z ≤ x, got x={x}, y={y}, z={z}"
            )));
        }
        Ok(DivisorWindow { x, y, z })
    }

    /// Range restriction under which the upper estimate is quoted:
    /// 3 ≤ y ≤ √x and 2y ≤ z ≤ y².
    pub fn ford_valid(&self) -> std::result::Result<(), String> {
        let xf = self.x as f64;
        if self.y < 3.0 {
            return Err(format!("y = {} violates y ≥ 3", self.y));
        }
        if self.y > xf.sqrt() {
            return Err(format!("y = {} violates y ≤ √x = {}", self.y, xf.sqrt()));
        }
        if self.z < 2.0 * self.y {
            return Err(format!("z = {} violates z ≥ 2y = {}", self.z, 2.0 * self.y));
        }
        if self.z > self.y * self.y {
            return Err(format!("z = {} violates z ≤ y² = {}", self.z, self.y * self.y));
        }
        Ok(())
    }
}

/// The estimate x·u^δ·(log(2/u))^{−3/2} with u = log z/log y − 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FordEstimate {
    pub u: f64,
    pub delta: f64,
    pub value: f64,
}

/// Exact count of n ≤ x with an integer divisor d, y < d ≤ z.
pub fn count_h(w: &DivisorWindow) -> Result<u64> {
    if w.x > COUNT_CEILING {
        return Err(Error::Capacity(format!(
            "x = {} exceeds the counting ceiling {COUNT_CEILING}",
            w.x
        )));
    }
    let d_lo = integer_gt(w.y);
    let d_hi = integer_le(w.z).min(w.x);
    if d_lo > d_hi {
        return Ok(0);
    }
    let n_segments = (w.x + SEGMENT - 1) / SEGMENT;
    let total: u64 = (0..n_segments)
        .into_par_iter()
        .map(|s| {
            let lo = s * SEGMENT + 1; // inclusive
            let hi = ((s + 1) * SEGMENT).min(w.x); // inclusive
            let len = (hi - lo + 1) as usize;
            let mut bits = vec![0u64; (len + 63) / 64];
            for d in d_lo..=d_hi {
                let mut m = ((lo + d - 1) / d) * d;
                while m <= hi {
                    let i = (m - lo) as usize;
                    bits[i >> 6] |= 1 << (i & 63);
                    m += d;
                }
            }
            bits.iter().map(|w| w.count_ones() as u64).sum::<u64>()
        })
        .sum();
    Ok(total)
}

/// Exact count of primes p ≤ x such that p + lambda has a divisor in (y, z].
pub fn count_h_shifted(
    sieve: &PrimeSieve,
    w: &DivisorWindow,
    lambda: i64,
) -> Result<u64> {
    if lambda == 0 {
        return Err(Error::InvalidArgument("lambda must be nonzero".into()));
    }
    if lambda.unsigned_abs() > 10 {
        return Err(Error::InvalidArgument(format!(
            "|lambda| ≤ 10 is the covered range, got {lambda}"
        )));
    }
    if w.x > sieve.limit() {
        return Err(Error::Capacity(format!(
            "x = {} exceeds sieve coverage {}",
            w.x,
            sieve.limit()
        )));
    }
    let d_lo = integer_gt(w.y);
    let d_hi = integer_le(w.z);
    if d_lo > d_hi {
        return Ok(0);
    }
    // shifted values n = p + lambda live in [1, x + max(lambda, 0)]
    let n_max = (w.x as i64 + lambda.max(0)) as u64;
    let n_segments = (n_max + SEGMENT - 1) / SEGMENT;
    let total: u64 = (0..n_segments)
        .into_par_iter()
        .map(|s| {
            let lo = s * SEGMENT + 1;
            let hi = ((s + 1) * SEGMENT).min(n_max);
            let len = (hi - lo + 1) as usize;
            let mut bits = vec![0u64; (len + 63) / 64];
            for d in d_lo..=d_hi.min(hi) {
                let mut m = ((lo + d - 1) / d) * d;
                while m <= hi {
                    let i = (m - lo) as usize;
                    bits[i >> 6] |= 1 << (i & 63);
                    m += d;
                }
            }
            // primes p with p + lambda in [lo, hi] and p ≤ x
            let p_lo = (lo as i64 - lambda).max(2) as u64;
            let p_hi_i = hi as i64 - lambda;
            if p_hi_i < 2 {
                return 0u64;
            }
            let p_hi = (p_hi_i as u64).min(w.x);
            sieve
                .primes_in(p_lo, p_hi)
                .filter(|&p| {
                    let n = p as i64 + lambda;
                    n >= lo as i64 && {
                        let i = (n as u64 - lo) as usize;
                        bits[i >> 6] >> (i & 63) & 1 == 1
                    }
                })
                .count() as u64
        })
        .sum();
    Ok(total)
}

/// Evaluates x·u^δ·(log(2/u))^{−3/2}; requires the window range restriction.
/// The hidden proportionality constant is not applied: callers interpret the
/// result as a ratio denominator.
pub fn ford_upper_estimate(w: &DivisorWindow) -> Result<FordEstimate> {
    if let Err(cond) = w.ford_valid() {
        return Err(Error::Domain(format!(
            "estimate outside its quoted range: {cond}"
        )));
    }
    let u = w.z.ln() / w.y.ln() - 1.0;
    let d = delta();
    // value = x · C(y,z) with one final multiply, so doubling x doubles value
    let c = u.powf(d) * (2.0 / u).ln().powf(-1.5);
    Ok(FordEstimate {
        u,
        delta: d,
        value: w.x as f64 * c,
    })
}

/// Rule deriving z from y in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZRule {
    Double,
    Square,
    Fixed(f64),
}

/// One sweep row; ratio = H/estimate, ratio_shifted = H_shifted·log x / H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub y: f64,
    pub z: f64,
    pub u: f64,
    pub h: u64,
    pub h_shifted: u64,
    pub estimate: f64,
    pub ratio: f64,
    pub ratio_shifted: f64,
}

/// Runs the exact counts and the estimate over each window; rows sorted by y.
pub fn ratio_sweep(
    sieve: &PrimeSieve,
    x: u64,
    y_list: &[f64],
    z_rule: ZRule,
    lambda: i64,
) -> Result<Vec<SweepRow>> {
    let mut ys = y_list.to_vec();
    ys.sort_by(|a, b| a.partial_cmp(b).expect("NaN in y list"));
    let mut rows = Vec::with_capacity(ys.len());
    for y in ys {
        let z = match z_rule {
            ZRule::Double => 2.0 * y,
            ZRule::Square => y * y,
            ZRule::Fixed(z) => z,
        };
        let w = DivisorWindow::new(x, y, z)?;
        let est = ford_upper_estimate(&w)?;
        let h = count_h(&w)?;
        let h_shifted = count_h_shifted(sieve, &w, lambda)?;
        rows.push(SweepRow {
            y,
            z,
            u: est.u,
            h,
            h_shifted,
            estimate: est.value,
            ratio: h as f64 / est.value,
            ratio_shifted: h_shifted as f64 * (x as f64).ln() / h as f64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_h(x: u64, y: f64, z: f64) -> u64 {
        (1..=x)
            .filter(|&n| (1..=n).any(|d| n % d == 0 && (d as f64) > y && (d as f64) <= z))
            .count() as u64
    }

    #[test]
    fn count_examples() {
        let w = DivisorWindow::new(100, 2.0, 4.0).unwrap();
        assert_eq!(count_h(&w).unwrap(), 50); // multiples of 3 or 4: 33+25−8
        let w = DivisorWindow::new(10, 1.0, 10.0).unwrap();
        assert_eq!(count_h(&w).unwrap(), 9);
        let w = DivisorWindow::new(100, 4.0, 4.0).unwrap();
        assert_eq!(count_h(&w).unwrap(), 0);
    }

    #[test]
    fn count_matches_naive_on_random_windows() {
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..50 {
            let x = next() % 1900 + 100;
            let y = (next() % (x / 2) + 1) as f64 + 0.5 * ((next() % 2) as f64);
            let z = y + (next() % x) as f64 * 0.25;
            let z = z.min(x as f64);
            let w = DivisorWindow::new(x, y, z).unwrap();
            assert_eq!(count_h(&w).unwrap(), naive_h(x, y, z), "x={x} y={y} z={z}");
        }
    }

    #[test]
    fn count_monotonicity() {
        for (x, y, z) in [(500u64, 3.0, 9.0), (1000, 5.0, 25.0), (2000, 4.0, 8.0)] {
            let base = count_h(&DivisorWindow::new(x, y, z).unwrap()).unwrap();
            let wider = count_h(&DivisorWindow::new(x, y, z + 5.0).unwrap()).unwrap();
            let taller = count_h(&DivisorWindow::new(x + 200, y, z).unwrap()).unwrap();
            let narrower = count_h(&DivisorWindow::new(x, y + 1.0, z).unwrap()).unwrap();
            assert!(wider >= base && taller >= base && narrower <= base);
        }
    }

    #[test]
    fn shifted_examples() {
        let sieve = PrimeSieve::new(100).unwrap();
        let w = DivisorWindow::new(30, 2.0, 4.0).unwrap();
        assert_eq!(count_h_shifted(&sieve, &w, -1).unwrap(), 6); // 5,7,13,17,19,29
        let w = DivisorWindow::new(10, 2.0, 4.0).unwrap();
        assert_eq!(count_h_shifted(&sieve, &w, 1).unwrap(), 4); // 2,3,5,7
        let w = DivisorWindow::new(30, 4.0, 4.0).unwrap();
        assert_eq!(count_h_shifted(&sieve, &w, -1).unwrap(), 0);
    }

    #[test]
    fn shifted_bounded_by_prime_count_and_recount() {
        let sieve = PrimeSieve::new(10_000).unwrap();
        let w = DivisorWindow::new(10_000, 3.0, 30.0).unwrap();
        let hs = count_h_shifted(&sieve, &w, -1).unwrap();
        let pi = crate::primes::prime_count(&sieve, 10_000.0, 1, 0).unwrap();
        assert!(hs <= pi);
        // direct recount over primes
        let direct = sieve
            .primes_in(2, 10_000)
            .filter(|&p| {
                let n = p - 1;
                n >= 1 && crate::primes::has_divisor_in(n, 3.0, 30.0).unwrap()
            })
            .count() as u64;
        assert_eq!(hs, direct);
    }

    #[test]
    fn delta_to_six_decimals() {
        assert!((delta() - 0.086071).abs() < 5e-7);
    }

    #[test]
    fn estimate_examples() {
        // z = y²: u = 1, value = x·(log 2)^{−3/2}
        let w = DivisorWindow::new(1_000_000, 100.0, 10_000.0).unwrap();
        let est = ford_upper_estimate(&w).unwrap();
        assert!((est.u - 1.0).abs() < 1e-12);
        let expect = 1.0e6 * std::f64::consts::LN_2.powf(-1.5);
        assert!((est.value - expect).abs() < 1e-6 * expect);
        assert!((est.value / 1.0e6 - 1.732855).abs() < 1e-5);

        let w = DivisorWindow::new(1_000_000, 100.0, 200.0).unwrap();
        let est = ford_upper_estimate(&w).unwrap();
        assert!((est.u - 0.150515).abs() < 1e-6);
        assert!((est.value - 2.042e5).abs() < 150.0);
    }

    #[test]
    fn estimate_linearity() {
        let base = ford_upper_estimate(&DivisorWindow::new(1_000_000, 50.0, 100.0).unwrap())
            .unwrap()
            .value;
        for k in [2u64, 4, 8, 16] {
            let v = ford_upper_estimate(
                &DivisorWindow::new(k * 1_000_000, 50.0, 100.0).unwrap(),
            )
            .unwrap()
            .value;
            assert_eq!(v, k as f64 * base, "k={k}");
        }
        for k in [3u64, 5, 7, 10] {
            let v = ford_upper_estimate(
                &DivisorWindow::new(k * 1_000_000, 50.0, 100.0).unwrap(),
            )
            .unwrap()
            .value;
            assert!(((v / (k as f64 * base)) - 1.0).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn estimate_range_violations_are_named() {
        let w = DivisorWindow::new(100, 2.0, 8.0).unwrap();
        let e = ford_upper_estimate(&w).unwrap_err();
        assert!(e.to_string().contains("y ≥ 3"), "{e}");
        let w = DivisorWindow::new(100, 50.0, 100.0).unwrap();
        let e = ford_upper_estimate(&w).unwrap_err();
        assert!(e.to_string().contains("√x"), "{e}");
        let w = DivisorWindow::new(1_000_000, 100.0, 150.0).unwrap();
        let e = ford_upper_estimate(&w).unwrap_err();
        assert!(e.to_string().contains("2y"), "{e}");
        let w = DivisorWindow::new(1_000_000, 10.0, 1000.0).unwrap();
        let e = ford_upper_estimate(&w).unwrap_err();
        assert!(e.to_string().contains("y²"), "{e}");
    }

    #[test]
    fn sweep_delegates_and_sorts() {
        let sieve = PrimeSieve::new(10_000).unwrap();
        let rows = ratio_sweep(&sieve, 10_000, &[20.0, 10.0], ZRule::Square, -1).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].y < rows[1].y);
        for row in &rows {
            let w = DivisorWindow::new(10_000, row.y, row.z).unwrap();
            assert_eq!(row.h, count_h(&w).unwrap());
        }
        assert!(ratio_sweep(&sieve, 10_000, &[], ZRule::Double, -1)
            .unwrap()
            .is_empty());
    }
}
