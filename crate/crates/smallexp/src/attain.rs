//! Theory-side oracle: which group orders and structures exist over F_p
//! (Waterhouse/Rück criteria), the Weil window for general genus, and
//! evaluators for the closed-form bounds used by the census and the
//! threshold verifiers.
//!
//! Boundary decisions (window membership, attainability) are exact integer
//! arithmetic; bound evaluators are double precision by contract.

use crate::primes::{factorize, gcd, is_prime_u64, isqrt};
use crate::{Error, Result};

/// Weil window [(√q−1)^{2g}, (√q+1)^{2g}]; genus 1 uses the exact integer
/// test (q+1−N)² ≤ 4q for membership and endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HasseWindow {
    pub q: u64,
    pub g: u32,
    pub lower: f64,
    pub upper: f64,
    pub lo_int: u64,
    pub hi_int: u64,
}

impl HasseWindow {
    /// Exact membership for genus 1; floating endpoints otherwise.
    pub fn contains(&self, n: u64) -> bool {
        if self.g == 1 {
            let t = self.q as i128 + 1 - n as i128;
            t * t <= 4 * self.q as i128
        } else {
            n >= self.lo_int && n <= self.hi_int
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Ordinary,
    Supersingular,
    NotAttainable,
}

/// Classification of a candidate group order N over F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttainableOrder {
    pub n: u64,
    pub trace: i64,
    pub kind: OrderKind,
}

fn require_prime_field(q: u64) -> Result<()> {
    if q < 5 || !is_prime_u64(q) {
        return Err(Error::InvalidArgument(format!(
            "q must be a prime ≥ 5, got {q}"
        )));
    }
    Ok(())
}

/// The genus-g Weil window around q+1.
pub fn hasse_window(q: u64, g: u32) -> Result<HasseWindow> {
    require_prime_field(q)?;
    if g < 1 {
        return Err(Error::InvalidArgument("genus must be ≥ 1".into()));
    }
    let sq = (q as f64).sqrt();
    let lower = (sq - 1.0).powi(2 * g as i32);
    let upper = (sq + 1.0).powi(2 * g as i32);
    let (lo_int, hi_int) = if g == 1 {
        let w = isqrt(4 * q);
        (q + 1 - w, q + 1 + w)
    } else {
        (lower.ceil() as u64, upper.floor() as u64)
    };
    Ok(HasseWindow { q, g, lower, upper, lo_int, hi_int })
}

/// Waterhouse criterion over a prime field: N = p+1−a is attainable iff
/// a² ≤ 4p and (a = 0, supersingular) or (gcd(a, p) = 1, ordinary).
pub fn waterhouse_attainable(p: u64, n: u64) -> Result<AttainableOrder> {
    require_prime_field(p)?;
    let trace_i = p as i128 + 1 - n as i128;
    if trace_i * trace_i > 4 * p as i128 {
        return Ok(AttainableOrder { n, trace: trace_i as i64, kind: OrderKind::NotAttainable });
    }
    let trace = trace_i as i64;
    let kind = if trace == 0 {
        OrderKind::Supersingular
    } else if gcd(trace.unsigned_abs(), p) == 1 {
        OrderKind::Ordinary
    } else {
        // |a| ≤ 2√p < p makes this unreachable for prime p ≥ 5
        OrderKind::NotAttainable
    };
    Ok(AttainableOrder { n, trace, kind })
}

/// All structures (m1, m2) of ordinary order N: m1² | N, m1 | p−1, sorted by
/// m2 ascending. Supersingular orders are out of the criterion's scope.
pub fn ruck_structures(p: u64, n: u64) -> Result<Vec<(u64, u64)>> {
    let cls = waterhouse_attainable(p, n)?;
    if cls.kind != OrderKind::Ordinary {
        return Err(Error::Domain(format!(
            "structure criterion applies to ordinary orders only; N = {n} over F_{p} is {:?}",
            cls.kind
        )));
    }
    let f = factorize(n)?;
    let mut out: Vec<(u64, u64)> = f
        .divisors()
        .into_iter()
        .filter(|&m1| {
            m1 * m1 <= n && n % (m1 * m1) == 0 && (p - 1) % m1 == 0
        })
        .map(|m1| (m1, n / m1))
        .collect();
    out.sort_unstable_by_key(|&(_, m2)| m2);
    Ok(out)
}

/// Minimum exponent over all ordinary attainable orders and structures in
/// the genus-1 window. Tie-break: smallest N, then smallest m2.
pub fn min_exponent_oracle(p: u64) -> Result<(u64, u64, (u64, u64))> {
    require_prime_field(p)?;
    let w = hasse_window(p, 1)?;
    let mut best: Option<(u64, u64, (u64, u64))> = None;
    for n in w.lo_int..=w.hi_int {
        if n == p + 1 {
            continue; // supersingular, excluded from the oracle
        }
        for (m1, m2) in ruck_structures(p, n)? {
            if best.map_or(true, |(l, _, _)| m2 < l) {
                best = Some((m2, n, (m1, m2)));
            }
        }
    }
    best.ok_or_else(|| {
        Error::Inconsistent(format!("no ordinary order exists over F_{p}"))
    })
}

/// √q − 1: the bound every exponent satisfies, independent of genus.
pub fn trivial_exponent_bound(q: u64, _g: u32) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidArgument("q must be ≥ 2".into()));
    }
    Ok((q as f64).sqrt() - 1.0)
}

/// ((√q−1)^{2g} / (k₁^s k₂^{s−1} ⋯ k_s))^{1/(2g−s)} for 1 ≤ s ≤ 2g−1.
pub fn exponent_floor(q: u64, g: u32, k: &[u64]) -> Result<f64> {
    let s = k.len() as u32;
    if s < 1 || s > 2 * g - 1 {
        return Err(Error::InvalidArgument(format!(
            "tuple length s = {s} must satisfy 1 ≤ s ≤ 2g−1 = {}",
            2 * g - 1
        )));
    }
    if k.iter().any(|&ki| ki == 0) {
        return Err(Error::InvalidArgument("k entries must be positive".into()));
    }
    let sq = (q as f64).sqrt();
    let num = (sq - 1.0).powi(2 * g as i32);
    let mut den = 1.0f64;
    for (i, &ki) in k.iter().enumerate() {
        den *= (ki as f64).powi((s as usize - i) as i32);
    }
    Ok((num / den).powf(1.0 / (2.0 * g as f64 - s as f64)))
}

/// The right-hand side of the cardinality-count bound: returns
/// (U, V, U·V) with U = (√x+1)^{2g}/Π k_i^{2g+1−i} and
/// V = 5(√x+1)/(k₁⋯k_g) + 1. Tuple length must be 2g−1.
pub fn qk_bound(x: u64, g: u32, k: &[u64]) -> Result<(f64, f64, f64)> {
    if g < 1 {
        return Err(Error::InvalidArgument("genus must be ≥ 1".into()));
    }
    if k.len() != (2 * g - 1) as usize {
        return Err(Error::InvalidArgument(format!(
            "tuple length {} must equal 2g−1 = {}",
            k.len(),
            2 * g - 1
        )));
    }
    if k.iter().any(|&ki| ki == 0) {
        return Err(Error::InvalidArgument("k entries must be positive".into()));
    }
    let r = (x as f64).sqrt() + 1.0;
    let mut u = r.powi(2 * g as i32);
    for (i, &ki) in k.iter().enumerate() {
        u /= (ki as f64).powi((2 * g as usize + 1 - (i + 1)) as i32);
    }
    let head: f64 = k[..g as usize].iter().map(|&ki| ki as f64).product();
    let v = 5.0 * r / head + 1.0;
    Ok((u, v, u * v))
}

/// Flags for the three K-set conditions; in_k is their conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KSetFlags {
    /// k₁⋯k_g lies outside the interval (x^{1/4−3η}, x^{1/4+3η}].
    pub outside_interval: bool,
    /// k₁^g k₂^{g−1} ⋯ k_g ≥ x^{g/4−2gη}.
    pub head_large: bool,
    /// k₁^{2g−1} k₂^{2g−2} ⋯ k_{2g−1} ≥ x^{g−3/4−2η}.
    pub tail_large: bool,
    pub in_k: bool,
}

/// Evaluates the K-set membership conditions for a (2g−1)-tuple.
/// Requires 0 < eta < 1/(100g).
pub fn k_set_membership(x: u64, eta: f64, g: u32, k: &[u64]) -> Result<KSetFlags> {
    if g < 1 {
        return Err(Error::InvalidArgument("genus must be ≥ 1".into()));
    }
    if !(eta > 0.0 && eta < 1.0 / (100.0 * g as f64)) {
        return Err(Error::InvalidArgument(format!(
            "eta = {eta} must lie in (0, 1/(100g)) = (0, {})",
            1.0 / (100.0 * g as f64)
        )));
    }
    if k.len() != (2 * g - 1) as usize {
        return Err(Error::InvalidArgument(format!(
            "tuple length {} must equal 2g−1 = {}",
            k.len(),
            2 * g - 1
        )));
    }
    if k.iter().any(|&ki| ki == 0) {
        return Err(Error::InvalidArgument("k entries must be positive".into()));
    }
    let xf = x as f64;
    let gf = g as f64;
    let head_plain: f64 = k[..g as usize].iter().map(|&ki| ki as f64).product();
    let i_lo = xf.powf(0.25 - 3.0 * eta);
    let i_hi = xf.powf(0.25 + 3.0 * eta);
    let outside_interval = head_plain <= i_lo || head_plain > i_hi;

    let mut head_weighted = 1.0f64;
    for (i, &ki) in k[..g as usize].iter().enumerate() {
        head_weighted *= (ki as f64).powi((g as usize - i) as i32);
    }
    let head_large = head_weighted >= xf.powf(gf / 4.0 - 2.0 * gf * eta);

    let mut tail_weighted = 1.0f64;
    for (i, &ki) in k.iter().enumerate() {
        tail_weighted *= (ki as f64).powi((2 * g as usize - 1 - i) as i32);
    }
    let tail_large = tail_weighted >= xf.powf(gf - 0.75 - 2.0 * eta);

    Ok(KSetFlags {
        outside_interval,
        head_large,
        tail_large,
        in_k: outside_interval && head_large && tail_large,
    })
}
