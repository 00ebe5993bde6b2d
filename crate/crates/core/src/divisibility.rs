//! Rigid divisibility of the numerators and the Zsigmondy membership test.
//!
//! For a prime `p` not dividing `b`, let `k(p)` be the first index with
//! `p | a_k`. Then `ord_p(a_n) = ord_p(a_{k(p)})` when `k(p) | n` and
//! `ord_p(a_n) = 0` otherwise. Two consequences drive the membership test:
//!
//! * every prime of `a_n` that is not primitive already divides some
//!   `a_{n/q}` with `q` a prime divisor of `n`, so with
//!   `G = prod_q |a_{n/q}|` the non-primitive part of `a_n` is `gcd(a_n, G)`;
//! * `n` is in the Zsigmondy set exactly when `|a_n| / gcd(a_n, G) = 1`.
//!
//! No numerator is ever factored. Indices with `|a_n| = 1` count as members,
//! since such a term has no prime divisor at all.

use rug::Integer;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith;
use crate::enclosure;
use crate::error::{Error, Result};
use crate::orbit::{numerator_residues, numerator_residues_u64, Orbit, Parameter};

/// Mersenne prime `2^127 - 1`, used for the residue certificate.
fn check_modulus() -> Integer {
    (Integer::from(1) << 127u32) - 1u32
}

/// Tuning knobs for [`zsigmondy_test_with`] and [`zsigmondy_set_with`].
#[derive(Clone, Debug)]
pub struct ZsigOptions {
    /// Search bound for a primitive prime witness; 0 disables the search.
    pub witness_bound: u64,
    /// Numerators above this many bits are handled by residues and logs.
    pub materialize_bits: u64,
}

impl Default for ZsigOptions {
    fn default() -> Self {
        ZsigOptions {
            witness_bound: 1_000_000,
            materialize_bits: 1 << 22,
        }
    }
}

impl ZsigOptions {
    pub fn without_witness(mut self) -> Self {
        self.witness_bound = 0;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// The gcd-stripped cofactor is 1.
    UnitCofactor,
    /// A prime dividing `a_n` and no earlier term.
    PrimitivePrime(u64),
    /// The exact stripped cofactor `t > 1`; kept verbatim when short.
    PrimitiveCofactor { bits: u64, value: Option<Integer> },
    /// `|a_n| > G`, so the cofactor exceeds 1.
    SizeExcess { log_an_lo: f64, log_g_hi: f64 },
    /// `a_n / gcd(a_n, G)` is not `+-1` modulo `2^127 - 1`.
    ResidueCofactor,
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::UnitCofactor => "unit_cofactor",
            Certificate::PrimitivePrime(_) => "primitive_prime",
            Certificate::PrimitiveCofactor { .. } => "primitive_cofactor",
            Certificate::SizeExcess { .. } => "primitive_cofactor_size",
            Certificate::ResidueCofactor => "primitive_cofactor_residue",
        }
    }

    fn witness_json(&self) -> Value {
        match self {
            Certificate::PrimitivePrime(p) => json!(p),
            Certificate::PrimitiveCofactor { value: Some(v), .. } => crate::json::int(v),
            Certificate::PrimitiveCofactor { bits, value: None } => json!({ "bits": bits }),
            _ => Value::Null,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZsigmondyVerdict {
    pub parameter: Parameter,
    pub n: u32,
    pub in_zsigmondy: bool,
    pub certificate: Certificate,
    /// Indices `n/q` whose product `G` was stripped against.
    pub stripped_against: Vec<u32>,
}

impl ZsigmondyVerdict {
    pub fn to_json(&self) -> Value {
        let detail = match &self.certificate {
            Certificate::UnitCofactor => format!(
                "every prime of a_{} divides a_k for some k in {:?}",
                self.n, self.stripped_against
            ),
            Certificate::PrimitivePrime(p) => {
                format!("{p} divides a_{} and no earlier term", self.n)
            }
            Certificate::PrimitiveCofactor { bits, .. } => format!(
                "{bits}-bit cofactor of a_{} is coprime to a_k for k in {:?}",
                self.n, self.stripped_against
            ),
            Certificate::SizeExcess { log_an_lo, log_g_hi } => format!(
                "log|a_{}| >= {log_an_lo:.6} > {log_g_hi:.6} >= log G",
                self.n
            ),
            Certificate::ResidueCofactor => {
                "stripped cofactor is not +-1 modulo 2^127-1".to_string()
            }
        };
        json!({
            "a": crate::json::int(self.parameter.a()),
            "b": crate::json::int(self.parameter.b()),
            "d": self.parameter.d(),
            "n": self.n,
            "in_zsigmondy": self.in_zsigmondy,
            "certificate_kind": self.certificate.kind(),
            "witness": self.certificate.witness_json(),
            "detail": detail,
        })
    }
}

impl Serialize for ZsigmondyVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Entry data of one prime along the orbit.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OrdProfile {
    pub p: u64,
    /// First index with `p | a_n`, if any up to `n_max`.
    pub entry_index: Option<u32>,
    /// `ord_p` at the entry index (0 when there is none).
    pub entry_ord: u32,
    /// `ord_p(a_n)` for `n = 1..=n_max`.
    pub ords: Vec<u32>,
    /// Whether the ords follow the rigid pattern.
    pub rigid: bool,
}

/// `ord_p(a_n)` for `n <= n_max`, from stored terms where the orbit has them
/// and from residues modulo a large power of `p` beyond that.
pub fn ord_profile(orbit: &Orbit, p: u64, n_max: u32) -> Result<OrdProfile> {
    if !arith::is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    let param = orbit.parameter();
    if Integer::from(param.b() % p) == 0 {
        return Err(Error::PrimeDividesDenominator(p));
    }
    if param.has_finite_orbit() {
        return Err(Error::FiniteOrbit(param.to_string()));
    }
    let pi = Integer::from(p);
    let k = 256 / (64 - p.leading_zeros()) + 1;
    let pk = Integer::from(rug::ops::Pow::pow(&pi, k));
    let residues = if orbit.len() < n_max {
        numerator_residues(param, &pk, n_max)
    } else {
        Vec::new()
    };
    let mut ords = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let v = match orbit.term(n) {
            Some(t) => Integer::from(&t.numerator).remove_factor(&pi).1,
            None => {
                let r = &residues[n as usize - 1];
                if *r == 0 {
                    return Err(Error::Inconclusive(format!(
                        "p^{k} divides a_{n}; valuation exceeds the residue precision"
                    )));
                }
                r.clone().remove_factor(&pi).1
            }
        };
        ords.push(v);
    }
    let entry_index = ords.iter().position(|&v| v > 0).map(|i| i as u32 + 1);
    let entry_ord = entry_index.map_or(0, |e| ords[e as usize - 1]);
    let rigid = ords.iter().enumerate().all(|(i, &v)| {
        let n = i as u32 + 1;
        match entry_index {
            Some(e) if n % e == 0 => v == entry_ord,
            _ => v == 0,
        }
    });
    Ok(OrdProfile {
        p,
        entry_index,
        entry_ord,
        ords,
        rigid,
    })
}

/// Smallest prime `p <= bound` (capped at 10^6) dividing `a_n` and no
/// `a_k` with `k < n`.
///
/// Residues of `a_n` are taken modulo products of consecutive primes, so the
/// cost does not depend on the size of `a_n`.
pub fn primitive_prime_witness(param: &Parameter, n: u32, bound: u64) -> Option<u64> {
    const BATCH: usize = 512;
    let primes = arith::small_primes();
    let end = primes.partition_point(|&p| p <= bound);
    for chunk in primes[..end].chunks(BATCH) {
        let prod = chunk.iter().fold(Integer::from(1), |acc, &p| acc * p);
        let r = numerator_residues(param, &prod, n).pop()?;
        let h = r.gcd(&prod);
        if h == 1 {
            continue;
        }
        for &p in chunk {
            if !h.is_divisible_u(p as u32) {
                continue;
            }
            let earlier = numerator_residues_u64(param, p, n - 1);
            if earlier.iter().all(|&x| x != 0) {
                return Some(p);
            }
        }
    }
    None
}

/// Distinct primes dividing `n`, as indices `n/q`.
fn stripping_indices(n: u32) -> Vec<u32> {
    arith::distinct_prime_factors(u64::from(n))
        .into_iter()
        .map(|q| n / q as u32)
        .collect()
}

fn membership(param: &Parameter, work: &Orbit, n: u32) -> Result<(bool, Certificate, Vec<u32>)> {
    let idx = stripping_indices(n);

    if let Some(t) = work.term(n) {
        let mut g = Integer::from(1);
        for &k in &idx {
            g *= Integer::from(work.numerator(k)?.abs_ref());
        }
        let g = Integer::from(t.numerator.gcd_ref(&g));
        let mut rest = Integer::from(t.numerator.abs_ref()) / &g;
        loop {
            let h = Integer::from(rest.gcd_ref(&g));
            if h == 1 {
                break;
            }
            rest /= h;
        }
        if rest == 1 {
            return Ok((true, Certificate::UnitCofactor, idx));
        }
        let bits = u64::from(rest.significant_bits());
        let value = (bits <= 512).then_some(rest);
        return Ok((false, Certificate::PrimitiveCofactor { bits, value }, idx));
    }

    // a_n is too large to hold; first try the size comparison |a_n| > G
    let an_log = enclosure::log_abs_numerator_bounds(param, work, n);
    let mut g_hi = 0.0;
    let mut g_known = true;
    for &k in &idx {
        match enclosure::log_abs_numerator_bounds(param, work, k) {
            Some((_, h)) => g_hi += h,
            None => g_known = false,
        }
    }
    if let (Some((an_lo, _)), true) = (an_log, g_known) {
        let (_, g_hi) = arith::widen(g_hi);
        if an_lo > g_hi {
            return Ok((
                false,
                Certificate::SizeExcess {
                    log_an_lo: an_lo,
                    log_g_hi: g_hi,
                },
                idx,
            ));
        }
    }

    // residue certificate modulo G * M
    let mut big_g = Integer::from(1);
    for &k in &idx {
        match work.term(k) {
            Some(t) => big_g *= Integer::from(t.numerator.abs_ref()),
            None => {
                return Err(Error::SizeGuard {
                    n: k,
                    bits: work.bits_bound(k),
                    limit: work.max_bits(),
                })
            }
        }
    }
    let m = check_modulus();
    let modulus = Integer::from(&big_g * &m);
    let r = numerator_residues(param, &modulus, n)
        .pop()
        .expect("n >= 1 residues");
    let g = Integer::from(r.gcd_ref(&big_g));
    let inv = g
        .clone()
        .invert(&m)
        .map_err(|_| Error::Inconclusive(format!("check modulus divides gcd(a_{n}, G)")))?;
    let t = arith::mod_pos(&(Integer::from(&r % &m) * inv), &m);
    let minus_one = Integer::from(&m - 1u32);
    if t != 1 && t != minus_one {
        return Ok((false, Certificate::ResidueCofactor, idx));
    }
    Err(Error::Inconclusive(format!(
        "a_{n} is too large to hold and its stripped cofactor is +-1 modulo 2^127-1"
    )))
}

/// Extend `orbit` towards `n` as far as `opts.materialize_bits` allows;
/// later indices are handled by residues.
pub fn materialize(orbit: &Orbit, n: u32, opts: &ZsigOptions) -> Result<Orbit> {
    let param = orbit.parameter();
    if param.has_finite_orbit() {
        return Err(Error::FiniteOrbit(param.to_string()));
    }
    if orbit.len() >= n {
        return Ok(orbit.clone());
    }
    let limit = opts.materialize_bits.min(orbit.max_bits());
    Ok(orbit.clone().with_max_bits(limit).extend_within_guard(n))
}

/// Decide whether `n` lies in the Zsigmondy set, with default options.
pub fn zsigmondy_test(orbit: &Orbit, n: u32) -> Result<ZsigmondyVerdict> {
    zsigmondy_test_with(orbit, n, &ZsigOptions::default())
}

pub fn zsigmondy_test_with(orbit: &Orbit, n: u32, opts: &ZsigOptions) -> Result<ZsigmondyVerdict> {
    if n < 2 {
        return Err(Error::IndexTooSmall(n));
    }
    let work = materialize(orbit, n, opts)?;
    verdict(&work, n, opts)
}

fn verdict(work: &Orbit, n: u32, opts: &ZsigOptions) -> Result<ZsigmondyVerdict> {
    let param = work.parameter();
    let (member, mut certificate, stripped_against) = membership(param, work, n)?;
    if !member && opts.witness_bound >= 2 {
        if let Some(p) = primitive_prime_witness(param, n, opts.witness_bound) {
            certificate = Certificate::PrimitivePrime(p);
        }
    }
    Ok(ZsigmondyVerdict {
        parameter: param.clone(),
        n,
        in_zsigmondy: member,
        certificate,
        stripped_against,
    })
}

/// `{ n in [2, n_max] : n in Z }`. No witnesses are searched for.
pub fn zsigmondy_set(orbit: &Orbit, n_max: u32) -> Result<Vec<u32>> {
    zsigmondy_set_with(orbit, n_max, &ZsigOptions::default().without_witness())
}

pub fn zsigmondy_set_with(orbit: &Orbit, n_max: u32, opts: &ZsigOptions) -> Result<Vec<u32>> {
    if n_max < 2 {
        return Err(Error::IndexTooSmall(n_max));
    }
    let work = materialize(orbit, n_max, opts)?;
    let mut out = Vec::new();
    for n in 2..=n_max {
        if membership(work.parameter(), &work, n)?.0 {
            out.push(n);
        }
    }
    Ok(out)
}

/// All verdicts for `n in [2, n_max]` over one shared orbit.
pub fn zsigmondy_verdicts(orbit: &Orbit, n_max: u32, opts: &ZsigOptions) -> Result<Vec<ZsigmondyVerdict>> {
    if n_max < 2 {
        return Err(Error::IndexTooSmall(n_max));
    }
    let work = materialize(orbit, n_max, opts)?;
    (2..=n_max).map(|n| verdict(&work, n, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit(a: i64, b: i64, d: u32, n: u32) -> Orbit {
        Orbit::new(Parameter::new(a, b, d).unwrap()).extend(n).unwrap()
    }

    #[test]
    fn ord_profile_examples() {
        let p = ord_profile(&orbit(-3, 2, 2, 4), 3, 4).unwrap();
        assert_eq!((p.entry_index, p.ords.clone()), (Some(1), vec![1, 1, 1, 1]));
        assert!(p.rigid);
        let p = ord_profile(&orbit(-7, 4, 2, 4), 3, 4).unwrap();
        assert_eq!((p.entry_index, p.ords.clone()), (Some(2), vec![0, 1, 0, 1]));
        assert!(matches!(
            ord_profile(&orbit(-7, 4, 2, 4), 2, 4),
            Err(Error::PrimeDividesDenominator(2))
        ));
        assert!(matches!(ord_profile(&orbit(-7, 4, 2, 4), 9, 4), Err(Error::NotPrime(9))));
    }

    #[test]
    fn ord_profile_by_residues_matches_terms() {
        let full = orbit(-7, 4, 2, 9);
        let short = orbit(-7, 4, 2, 2);
        for p in [3u64, 7, 53, 103] {
            assert_eq!(ord_profile(&full, p, 9).unwrap(), ord_profile(&short, p, 9).unwrap());
        }
    }

    #[test]
    fn verdict_examples() {
        let v = zsigmondy_test(&orbit(-7, 4, 2, 3), 3).unwrap();
        assert!(v.in_zsigmondy);
        assert_eq!(v.certificate, Certificate::UnitCofactor);
        assert!(zsigmondy_test(&orbit(-3, 2, 2, 2), 2).unwrap().in_zsigmondy);
        let v = zsigmondy_test(&orbit(-1, 2, 2, 2), 2).unwrap();
        assert!(v.in_zsigmondy && v.certificate == Certificate::UnitCofactor);
        let v = zsigmondy_test(&orbit(1, 2, 2, 3), 3).unwrap();
        assert!(!v.in_zsigmondy);
        assert_eq!(v.certificate, Certificate::PrimitivePrime(17));
        let v = zsigmondy_test(&orbit(-7, 4, 2, 4), 4).unwrap();
        assert_eq!(v.certificate, Certificate::PrimitivePrime(53));
        assert!(matches!(zsigmondy_test(&orbit(-7, 4, 2, 4), 1), Err(Error::IndexTooSmall(1))));
    }

    #[test]
    fn set_examples() {
        assert_eq!(zsigmondy_set(&orbit(-7, 4, 2, 1), 8).unwrap(), vec![3]);
        assert_eq!(zsigmondy_set(&orbit(-3, 2, 2, 1), 4).unwrap(), vec![2]);
        assert_eq!(zsigmondy_set(&orbit(1, 2, 2, 1), 10).unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn modular_path_agrees_with_exact_path() {
        let opts = ZsigOptions {
            witness_bound: 0,
            materialize_bits: 200,
        };
        for (a, b, d) in [(-7, 4, 2), (-3, 2, 2), (-9, 8, 4), (-5, 3, 2), (-1, 2, 2)] {
            let o = Orbit::new(Parameter::new(a, b, d).unwrap());
            let exact = zsigmondy_set(&o, 9).unwrap();
            let modular = zsigmondy_set_with(&o, 9, &opts).unwrap();
            assert_eq!(exact, modular, "{a}/{b} d={d}");
        }
    }

    #[test]
    fn finite_orbit_rejected() {
        let o = Orbit::new(Parameter::new(-1, 1, 2).unwrap());
        assert!(matches!(zsigmondy_set(&o, 4), Err(Error::FiniteOrbit(_))));
    }

    #[test]
    fn verdict_json_shape() {
        let v = zsigmondy_test(&orbit(1, 2, 2, 3), 3).unwrap().to_json();
        assert_eq!(v["certificate_kind"], "primitive_prime");
        assert_eq!(v["witness"], 17);
        assert_eq!(v["in_zsigmondy"], false);
    }
}
