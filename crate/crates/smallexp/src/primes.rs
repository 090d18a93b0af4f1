//! Sieving, factorization, prime counting in arithmetic progressions, and
//! elementary sums over primes.
//!
//! The sieve is a segmented sieve of Eratosthenes over odd numbers: base
//! primes up to √limit are found first, then fixed-size segments are marked
//! into one shared bitset, so construction stays cache-friendly at the
//! 10⁸..10⁹ scale. Factorization is trial division up to 10⁶ followed by
//! deterministic Miller–Rabin and Brent's cycle-finding variant of Pollard
//! rho with the polynomial family x² + c, c = 1, 2, …, so results are
//! reproducible run-to-run without any random state.

use crate::{Error, Result};

/// Largest supported sieve limit (odd-compressed bitset, ~63 MB at the cap).
pub const SIEVE_CEILING: u64 = 1_000_000_000;

/// Trial-division bound used before switching to rho splitting.
const TRIAL_BOUND: u64 = 1_000_000;

/// Numbers per marking segment (odd entries, i.e. a 2²¹ span of integers).
const SEGMENT_BITS: usize = 1 << 20;

// ---------------------------------------------------------------------------
// modular and integer helpers (used crate-wide)
// ---------------------------------------------------------------------------

/// (a * b) mod m without overflow; m may be up to 2⁶³.
#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// a^e mod m by binary exponentiation.
pub fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Exact integer square root: the largest r with r² ≤ n.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    // float guess can be off by one in either direction
    while r > 0 && r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |s| s <= n) {
        r += 1;
    }
    r
}

/// Deterministic Miller–Rabin, exact for all n < 2⁶⁴.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// ---------------------------------------------------------------------------
// PrimeSieve
// ---------------------------------------------------------------------------

/// Primality table over [0, limit], odd-compressed: bit i covers 2i+1.
pub struct PrimeSieve {
    limit: u64,
    composite: Vec<u64>, // set bit = odd composite (or 1)
}

impl PrimeSieve {
    /// Builds the table for all n ≤ limit. Requires 2 ≤ limit ≤ SIEVE_CEILING.
    pub fn new(limit: u64) -> Result<PrimeSieve> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        if limit > SIEVE_CEILING {
            return Err(Error::Capacity(format!(
                "sieve limit {limit} exceeds the ceiling {SIEVE_CEILING}"
            )));
        }
        let n_odds = (limit as usize + 1) / 2; // odds in [1, limit]
        let mut composite = vec![0u64; (n_odds + 63) / 64];
        set_bit(&mut composite, 0); // 1 is not prime

        // base odd primes up to √limit by a plain small sieve
        let root = isqrt(limit);
        let mut base_comp = vec![false; root as usize + 1];
        let mut base: Vec<u64> = Vec::new();
        let mut p = 3u64;
        while p <= root {
            if !base_comp[p as usize] {
                base.push(p);
                let mut q = p * p;
                while q <= root {
                    base_comp[q as usize] = true;
                    q += p;
                }
            }
            p += 2;
        }

        // segmented marking into the shared bitset; seg index is odd-index space
        let mut seg_lo = 0usize;
        while seg_lo < n_odds {
            let seg_hi = (seg_lo + SEGMENT_BITS).min(n_odds); // exclusive
            let lo_val = 2 * seg_lo as u64 + 1;
            let hi_val = 2 * (seg_hi as u64 - 1) + 1;
            for &p in &base {
                if p * p > hi_val {
                    break;
                }
                // first odd multiple of p in [max(p², lo_val), hi_val]
                let mut start = p * p;
                if start < lo_val {
                    let k = (lo_val + p - 1) / p;
                    let k = if k % 2 == 0 { k + 1 } else { k };
                    start = k * p;
                }
                let mut idx = (start / 2) as usize;
                let step = p as usize;
                while idx < seg_hi {
                    set_bit(&mut composite, idx);
                    idx += step;
                }
            }
            seg_lo = seg_hi;
        }

        Ok(PrimeSieve { limit, composite })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// True iff n is prime. Contract: n ≤ limit.
    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit, "query {n} beyond sieve limit {}", self.limit);
        if n == 2 {
            return true;
        }
        if n < 2 || n % 2 == 0 {
            return false;
        }
        !get_bit(&self.composite, (n / 2) as usize)
    }

    /// All primes in ascending order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes_in(2, self.limit)
    }

    /// Primes p with lo ≤ p ≤ hi (endpoints clamped to the table).
    pub fn primes_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.limit);
        let two = (lo <= 2 && hi >= 2).then_some(2u64);
        let start = lo.max(3) | 1; // first odd candidate ≥ lo
        two.into_iter().chain(
            (start..=hi.max(1))
                .step_by(2)
                .filter(move |&n| n <= hi && !get_bit(&self.composite, (n / 2) as usize)),
        )
    }

    fn require_coverage(&self, x: f64, what: &str) -> Result<u64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{what} must be a finite nonnegative real, got {x}"
            )));
        }
        let xf = x.floor() as u64;
        if xf > self.limit {
            return Err(Error::Capacity(format!(
                "{what} = {x} exceeds sieve coverage {}",
                self.limit
            )));
        }
        Ok(xf)
    }
}

#[inline]
fn set_bit(bits: &mut [u64], i: usize) {
    bits[i >> 6] |= 1u64 << (i & 63);
}

#[inline]
fn get_bit(bits: &[u64], i: usize) -> bool {
    bits[i >> 6] >> (i & 63) & 1 == 1
}

/// π(x; k, a): number of primes q ≤ x with q ≡ a (mod k). k = 1 gives π(x).
pub fn prime_count(sieve: &PrimeSieve, x: f64, k: u64, a: i64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidArgument("modulus k must be positive".into()));
    }
    let xf = sieve.require_coverage(x, "prime-count bound x")?;
    let a = a.rem_euclid(k as i64) as u64;
    Ok(sieve.primes_in(2, xf).filter(|&q| q % k == a).count() as u64)
}

/// Σ_{y < p ≤ z} 1/p over sieved primes, summed in ascending order.
pub fn mertens_sum(sieve: &PrimeSieve, y: f64, z: f64) -> Result<f64> {
    if !(y >= 0.0) || !(z >= y) {
        return Err(Error::InvalidArgument(format!(
            "need 0 ≤ y ≤ z, got y={y}, z={z}"
        )));
    }
    let zf = sieve.require_coverage(z, "upper bound z")?;
    let lo = integer_gt(y);
    let mut s = 0.0f64;
    for p in sieve.primes_in(lo, zf) {
        s += 1.0 / p as f64;
    }
    Ok(s)
}

/// Smallest integer strictly greater than the real y ≥ 0.
pub(crate) fn integer_gt(y: f64) -> u64 {
    if y < 0.0 {
        return 0;
    }
    let f = y.floor();
    if f >= u64::MAX as f64 {
        return u64::MAX;
    }
    f as u64 + 1
}

/// Largest integer ≤ the real z (clamped at 0).
pub(crate) fn integer_le(z: f64) -> u64 {
    if z < 0.0 {
        return 0;
    }
    let f = z.floor();
    if f >= u64::MAX as f64 {
        return u64::MAX;
    }
    f as u64
}

// ---------------------------------------------------------------------------
// Factorization
// ---------------------------------------------------------------------------

/// Prime factorization of n; factors sorted ascending, multiplicities ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Recomputes the product of prime powers (overflow-checked).
    pub fn product(&self) -> Option<u64> {
        let mut acc = 1u64;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                acc = acc.checked_mul(p)?;
            }
        }
        Some(acc)
    }

    /// All divisors of n, in no particular order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = divs.len();
            let mut pe = 1u64;
            for _ in 0..e {
                pe *= p;
                for i in 0..prev {
                    divs.push(divs[i] * pe);
                }
            }
        }
        divs
    }
}

/// Factorizes 1 ≤ n < 2⁶⁴. n = 1 yields an empty factor list.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factorize 0".into()));
    }
    let mut m = n;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, e: u32, factors: &mut Vec<(u64, u32)>| {
        if e > 0 {
            factors.push((p, e));
        }
    };

    for p in [2u64, 3, 5] {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        push(p, e, &mut factors);
    }
    // wheel mod 30 over the remaining trial range
    const WHEEL: [u64; 8] = [1, 7, 11, 13, 17, 19, 23, 29];
    let mut base = 0u64;
    'trial: while base <= TRIAL_BOUND {
        for off in WHEEL {
            let p = base + off;
            if p < 7 {
                continue;
            }
            if p > TRIAL_BOUND || p * p > m {
                break 'trial;
            }
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                push(p, e, &mut factors);
            }
        }
        base += 30;
    }

    if m > 1 {
        if m <= TRIAL_BOUND * TRIAL_BOUND && !is_prime_u64(m) {
            // cannot happen: no factor ≤ 10⁶ and m ≤ 10¹² forces m prime
            return Err(Error::Inconsistent(format!(
                "trial division left composite {m} below the rho threshold"
            )));
        }
        let mut stack = vec![m];
        let mut hard: Vec<u64> = Vec::new();
        while let Some(v) = stack.pop() {
            if is_prime_u64(v) {
                hard.push(v);
            } else {
                let d = brent_rho(v);
                stack.push(d);
                stack.push(v / d);
            }
        }
        hard.sort_unstable();
        let mut i = 0;
        while i < hard.len() {
            let p = hard[i];
            let mut e = 0u32;
            while i < hard.len() && hard[i] == p {
                e += 1;
                i += 1;
            }
            factors.push((p, e));
        }
    }

    factors.sort_unstable_by_key(|&(p, _)| p);
    Ok(Factorization { n, factors })
}

/// Brent's variant of Pollard rho with x ↦ x² + c, c = 1, 2, …
/// Precondition: n composite, odd-ish (no factor ≤ 10⁶), not a prime.
fn brent_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n));
    if n % 2 == 0 {
        return 2;
    }
    for c in 1u64.. {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut ys) = (2u64, 2u64);
        let mut y = 2u64;
        let mut d = 1u64;
        let (mut r, mut q) = (1u64, 1u64);
        const M: u64 = 128;
        while d == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && d == 1 {
                ys = y;
                for _ in 0..M.min(r - k) {
                    y = f(y);
                    q = mulmod(q, x.abs_diff(y), n);
                }
                d = gcd(q, n);
                k += M;
            }
            r *= 2;
        }
        if d == n {
            // backtrack one step at a time
            d = 1;
            while d == 1 {
                ys = f(ys);
                d = gcd(x.abs_diff(ys), n);
            }
        }
        if d != n {
            return d;
        }
    }
    unreachable!("rho exhausted the constant family");
}

/// True iff some divisor d of n satisfies y < d ≤ z (exact integer bounds).
pub fn has_divisor_in(n: u64, y: f64, z: f64) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let lo = integer_gt(y);
    let hi = integer_le(z).min(n);
    if lo > hi || hi == 0 {
        return Ok(false);
    }
    if lo <= 1 {
        return Ok(true); // divisor 1
    }
    let f = factorize(n)?;
    // DFS over divisor lattice with early exit
    fn dfs(factors: &[(u64, u32)], acc: u64, lo: u64, hi: u64) -> bool {
        if acc >= lo && acc <= hi {
            return true;
        }
        if factors.is_empty() {
            return false;
        }
        let (p, e) = factors[0];
        let mut v = acc;
        for i in 0..=e {
            if i > 0 {
                match v.checked_mul(p) {
                    Some(nv) => v = nv,
                    None => return false,
                }
            }
            if v > hi {
                return false; // factors ascending keeps later products larger
            }
            if dfs(&factors[1..], v, lo, hi) {
                return true;
            }
        }
        false
    }
    // sort descending so the largest prime is peeled first: prunes harder
    let mut fs = f.factors.clone();
    fs.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    Ok(dfs(&fs, 1, lo, hi))
}

// ---------------------------------------------------------------------------
