//! Integer helpers shared by the orbit, divisibility and bounds modules.

use std::sync::OnceLock;

use rug::ops::Pow;
use rug::Integer;

/// Natural log of `|x|` from its bit length and leading 64 bits.
///
/// The numerator never gets converted to floating point as a whole, so this
/// works for values far outside `f64` range. Relative error of the mantissa
/// part is below 2^-62.
pub fn log_abs(x: &Integer) -> f64 {
    assert!(*x != 0, "log of zero");
    let bits = x.significant_bits();
    if bits <= 64 {
        let v = x.clone().abs().to_u64_wrapping();
        return (v as f64).ln();
    }
    let shift = bits - 64;
    let top = Integer::from(x.abs_ref()) >> shift;
    (top.to_u64_wrapping() as f64).ln() + f64::from(shift) * std::f64::consts::LN_2
}

/// Rigorous enclosure `[lo, hi]` of `ln |x|`.
pub fn log_abs_bounds(x: &Integer) -> (f64, f64) {
    let v = log_abs(x);
    // truncation of the low bits contributes < 2^-63 relative, plus f64 rounding
    let slack = 4.0 * f64::EPSILON * v.abs().max(1.0) + 2f64.powi(-60);
    (v - slack, v + slack)
}

/// Widen a floating value into a tiny interval that certainly contains the exact real.
pub fn widen(v: f64) -> (f64, f64) {
    let slack = 8.0 * f64::EPSILON * v.abs().max(1e-300);
    (v - slack, v + slack)
}

/// Primes up to `limit` (inclusive) by a plain sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes below one million, computed once.
pub fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(1_000_000))
}

/// Distinct prime divisors of `n`, ascending.
pub fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `base^exp` as an exact integer (arbitrary size).
pub fn pow_u64(base: u64, exp: u32) -> Integer {
    Integer::from(base).pow(exp)
}

/// `d^e` as `u64`, saturating at `u64::MAX`.
pub fn sat_pow(d: u64, e: u32) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(d);
    }
    acc
}

/// If `x >= 0` is a perfect `m`-th power return its root.
pub fn exact_root(x: &Integer, m: u32) -> Option<Integer> {
    if *x < 0 {
        return None;
    }
    let (root, rem) = x.clone().root_rem(Integer::new(), m);
    (rem == 0).then_some(root)
}

/// `x mod m` in `[0, m)` for `m > 0`.
pub fn mod_pos(x: &Integer, m: &Integer) -> Integer {
    let mut r = Integer::from(x % m);
    if r < 0 {
        r += m;
    }
    r
}

/// Divisors of `n` greater than one.
pub fn nontrivial_divisors(n: u32) -> Vec<u32> {
    (2..=n).filter(|m| n % m == 0).collect()
}
