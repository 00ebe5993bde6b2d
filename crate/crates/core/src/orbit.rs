//! Exact critical orbit of `f(z) = z^d + c` over the rationals.
//!
//! With `c = a/b` in lowest terms the `n`-th iterate is `a_n / b^(d^(n-1))`,
//! where the numerators satisfy the integer recurrence
//!
//! ```text
//! a_1 = a,    a_{n+1} = a_n^d + a * b^(d^n - 1)
//! ```
//!
//! Denominators are tracked by their exponent only. The one power of `b`
//! that is ever expanded is the `b^(d^n - 1)` inside a single step.

use std::fmt;
use std::sync::Arc;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Serialize, Serializer};

use crate::arith::{self, sat_pow};
use crate::error::{Error, Result};

/// Default per-numerator size guard: 2^26 bits (about 8 MB).
pub const DEFAULT_MAX_BITS: u64 = 1 << 26;

/// `c = a/b` in lowest terms with `b > 0`, and the degree `d >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Parameter {
    a: Integer,
    b: Integer,
    d: u32,
}

impl Parameter {
    /// Reduce `a/b`, move the sign to the numerator, and validate `d`.
    ///
    /// Finite-orbit parameters are accepted and flagged; see
    /// [`Parameter::has_finite_orbit`]. Use [`Parameter::infinite`] to reject them.
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>, d: u32) -> Result<Self> {
        let mut a = a.into();
        let mut b = b.into();
        if b == 0 {
            return Err(Error::ZeroDenominator);
        }
        if d < 2 {
            return Err(Error::DegreeTooSmall(d));
        }
        if b < 0 {
            a = -a;
            b = -b;
        }
        let g = Integer::from(a.gcd_ref(&b));
        if g != 1 {
            a /= &g;
            b /= &g;
        }
        Ok(Parameter { a, b, d })
    }

    /// Like [`Parameter::new`] but errors on a finite critical orbit.
    pub fn infinite(a: impl Into<Integer>, b: impl Into<Integer>, d: u32) -> Result<Self> {
        let p = Self::new(a, b, d)?;
        if p.has_finite_orbit() {
            return Err(Error::FiniteOrbit(p.to_string()));
        }
        Ok(p)
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }

    pub fn b(&self) -> &Integer {
        &self.b
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn is_integral(&self) -> bool {
        self.b == 1
    }

    /// The critical orbit is finite exactly for `c = 0`, `c = -1` with `d`
    /// even, and `c = -2` with `d = 2`. Every non-integral `c` has an
    /// infinite orbit since the denominators grow.
    pub fn has_finite_orbit(&self) -> bool {
        if !self.is_integral() {
            return false;
        }
        self.a == 0 || (self.a == -1 && self.d % 2 == 0) || (self.a == -2 && self.d == 2)
    }

    pub fn c(&self) -> Rational {
        Rational::from((self.a.clone(), self.b.clone()))
    }

    pub fn c_f64(&self) -> f64 {
        self.c().to_f64()
    }

    /// `ln |c|`; `-inf` for `c = 0`.
    pub fn log_abs_c(&self) -> f64 {
        if self.a == 0 {
            return f64::NEG_INFINITY;
        }
        arith::log_abs(&self.a) - arith::log_abs(&self.b)
    }

    pub fn log_b(&self) -> f64 {
        arith::log_abs(&self.b)
    }

    fn cmp_abs_c_pow2(&self, k: u32) -> std::cmp::Ordering {
        // |c| vs 2^(k/(d-1))  <=>  |a|^(d-1) vs 2^k * b^(d-1)
        let lhs = Integer::from(self.a.abs_ref()).pow(self.d - 1);
        let rhs = Integer::from(self.b.clone().pow(self.d - 1)) << k;
        lhs.cmp(&rhs)
    }

    /// `|c| > 2^(d/(d-1))`, the escape region.
    pub fn beyond_escape_radius(&self) -> bool {
        self.cmp_abs_c_pow2(self.d) == std::cmp::Ordering::Greater
    }

    /// `|c|` compared with `2^(1/(d-1))`.
    pub fn cmp_inner_radius(&self) -> std::cmp::Ordering {
        self.cmp_abs_c_pow2(1)
    }

    /// `|c|` compared with `2^(d/(d-1))`.
    pub fn cmp_escape_radius(&self) -> std::cmp::Ordering {
        self.cmp_abs_c_pow2(self.d)
    }

    /// `d` even and `c` in `(-2^(1/(d-1)), -1)`.
    pub fn in_recurrent_window(&self) -> bool {
        self.d % 2 == 0
            && self.a < 0
            && Integer::from(self.a.abs_ref()) > self.b
            && self.cmp_inner_radius() == std::cmp::Ordering::Less
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.a, self.b)
    }
}

impl Serialize for Parameter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Parameter", 3)?;
        st.serialize_field("a", &crate::json::int(&self.a))?;
        st.serialize_field("b", &crate::json::int(&self.b))?;
        st.serialize_field("d", &self.d)?;
        st.end()
    }
}

/// One numerator `a_n` together with its denominator exponent `d^(n-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitTerm {
    pub n: u32,
    pub numerator: Integer,
    pub denom_exp: Integer,
}

impl OrbitTerm {
    pub fn bits(&self) -> u64 {
        u64::from(self.numerator.significant_bits())
    }
}

/// Contiguous prefix `a_1, ..., a_len` of the critical orbit.
///
/// Cloning and extending are cheap on the already computed prefix: terms are
/// reference counted and never mutated.
#[derive(Clone, Debug)]
pub struct Orbit {
    parameter: Arc<Parameter>,
    terms: Vec<Arc<OrbitTerm>>,
    max_bits: u64,
    check_invariants: bool,
}

impl Orbit {
    /// Orbit holding just `a_1 = a`.
    pub fn new(parameter: Parameter) -> Self {
        let first = OrbitTerm {
            n: 1,
            numerator: parameter.a.clone(),
            denom_exp: Integer::from(1),
        };
        Orbit {
            parameter: Arc::new(parameter),
            terms: vec![Arc::new(first)],
            max_bits: DEFAULT_MAX_BITS,
            check_invariants: cfg!(debug_assertions),
        }
    }

    /// Rebuild an orbit from stored numerators `a_1..a_k` after validating
    /// them against the recurrence modulo two word-sized primes.
    pub fn from_numerators(parameter: Parameter, numerators: Vec<Integer>) -> Result<Self> {
        if numerators.is_empty() || numerators[0] != parameter.a {
            return Err(Error::Invariant("stored orbit does not start at a_1 = a".into()));
        }
        for m in [(1u64 << 61) - 1, (1u64 << 62) - 57] {
            let want = numerator_residues_u64(&parameter, m, numerators.len() as u32);
            let modulus = Integer::from(m);
            for (k, (x, r)) in numerators.iter().zip(&want).enumerate() {
                if arith::mod_pos(&x, &modulus) != *r {
                    return Err(Error::Invariant(format!(
                        "stored a_{} fails the recurrence check",
                        k + 1
                    )));
                }
            }
        }
        let d = parameter.d;
        let terms = numerators
            .into_iter()
            .enumerate()
            .map(|(i, numerator)| {
                Arc::new(OrbitTerm {
                    n: i as u32 + 1,
                    numerator,
                    denom_exp: Integer::from(d).pow(i as u32),
                })
            })
            .collect();
        Ok(Orbit {
            parameter: Arc::new(parameter),
            terms,
            max_bits: DEFAULT_MAX_BITS,
            check_invariants: cfg!(debug_assertions),
        })
    }

    pub fn with_max_bits(mut self, max_bits: u64) -> Self {
        self.max_bits = max_bits;
        self
    }

    /// Re-check `gcd(a_n, b) = 1` on every new term.
    pub fn with_invariant_checks(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    pub fn parameter(&self) -> &Parameter {
        &self.parameter
    }

    pub fn max_bits(&self) -> u64 {
        self.max_bits
    }

    pub fn len(&self) -> u32 {
        self.terms.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &OrbitTerm> {
        self.terms.iter().map(|t| t.as_ref())
    }

    pub fn term(&self, n: u32) -> Option<&OrbitTerm> {
        if n == 0 {
            return None;
        }
        self.terms.get(n as usize - 1).map(|t| t.as_ref())
    }

    pub fn numerator(&self, n: u32) -> Result<&Integer> {
        self.term(n).map(|t| &t.numerator).ok_or(Error::NotExtended {
            have: self.len(),
            want: n,
        })
    }

    /// Upper bound on the bit length of `a_{n+1}` given `a_n`:
    /// `d * bits(a_n) + bits(a) + (d^n - 1) * log2(b) + 2`.
    fn next_bits_bound(&self, last: &OrbitTerm) -> u64 {
        let p = &*self.parameter;
        let d = u64::from(p.d);
        let exp = sat_pow(d, last.n).saturating_sub(1);
        let b_bits = if p.b == 1 {
            0
        } else {
            u64::from(p.b.significant_bits())
        };
        d.saturating_mul(last.bits())
            .saturating_add(u64::from(p.a.significant_bits()))
            .saturating_add(exp.saturating_mul(b_bits))
            .saturating_add(2)
    }

    /// Bit-length bound for `a_n` without computing it (iterating the step bound
    /// from the last stored term).
    pub fn bits_bound(&self, n: u32) -> u64 {
        if let Some(t) = self.term(n) {
            return t.bits();
        }
        let p = &*self.parameter;
        let d = u64::from(p.d);
        let b_bits = if p.b == 1 {
            0
        } else {
            u64::from(p.b.significant_bits())
        };
        let last = self.terms.last().expect("orbit holds a_1");
        let mut bits = last.bits();
        for k in last.n..n {
            let exp = sat_pow(d, k).saturating_sub(1);
            bits = d
                .saturating_mul(bits)
                .saturating_add(u64::from(p.a.significant_bits()))
                .saturating_add(exp.saturating_mul(b_bits))
                .saturating_add(2);
        }
        bits
    }

    fn step(&self, last: &OrbitTerm) -> Result<OrbitTerm> {
        let p = &*self.parameter;
        let bound = self.next_bits_bound(last);
        if bound > self.max_bits {
            return Err(Error::SizeGuard {
                n: last.n + 1,
                bits: bound,
                limit: self.max_bits,
            });
        }
        let mut next = Integer::from((&last.numerator).pow(p.d));
        if p.b == 1 {
            next += &p.a;
        } else {
            // d^n - 1 fits in u32 here: the guard caps it by max_bits / log2(b)
            let exp = sat_pow(u64::from(p.d), last.n) - 1;
            let exp = u32::try_from(exp).map_err(|_| Error::SizeGuard {
                n: last.n + 1,
                bits: bound,
                limit: self.max_bits,
            })?;
            let mut tail = Integer::from((&p.b).pow(exp));
            tail *= &p.a;
            next += tail;
        }
        if self.check_invariants && p.b != 1 && Integer::from(next.gcd_ref(&p.b)) != 1 {
            return Err(Error::Invariant(format!(
                "gcd(a_{}, b) != 1 for c = {}",
                last.n + 1,
                p
            )));
        }
        Ok(OrbitTerm {
            n: last.n + 1,
            numerator: next,
            denom_exp: Integer::from(&last.denom_exp * p.d),
        })
    }

    /// New orbit holding every term up to `n_target`.
    pub fn extend(&self, n_target: u32) -> Result<Orbit> {
        let mut out = self.clone();
        while out.len() < n_target {
            let last = out.terms.last().expect("orbit holds a_1").clone();
            out.terms.push(Arc::new(out.step(&last)?));
        }
        Ok(out)
    }

    /// Extend towards `n_target`, stopping quietly at the size guard.
    pub fn extend_within_guard(&self, n_target: u32) -> Orbit {
        let mut out = self.clone();
        while out.len() < n_target {
            let last = out.terms.last().expect("orbit holds a_1").clone();
            match out.step(&last) {
                Ok(t) => out.terms.push(Arc::new(t)),
                Err(_) => break,
            }
        }
        out
    }

    /// `ln |f^n(0)| = ln |a_n| - d^(n-1) ln b`, from the bit length and leading
    /// bits of `a_n`.
    pub fn log_abs_iterate(&self, n: u32) -> Result<f64> {
        let t = self.term(n).ok_or(Error::NotExtended {
            have: self.len(),
            want: n,
        })?;
        if t.numerator == 0 {
            return Err(Error::Precondition(format!("a_{n} = 0 (finite orbit)")));
        }
        let denom = t.denom_exp.to_f64() * self.parameter.log_b();
        Ok(arith::log_abs(&t.numerator) - denom)
    }

    /// `f^n(0)` as an exact rational. Expands the denominator, so only for small terms.
    pub fn iterate_exact(&self, n: u32) -> Result<Rational> {
        let t = self.term(n).ok_or(Error::NotExtended {
            have: self.len(),
            want: n,
        })?;
        let e = t.denom_exp.to_u32().ok_or_else(|| {
            Error::Precondition(format!("denominator exponent of a_{n} too large to expand"))
        })?;
        let den = Integer::from((&self.parameter.b).pow(e));
        Ok(Rational::from((t.numerator.clone(), den)))
    }
}

/// `a_k mod m` for `k = 1..=n_max`, all in `[0, m)`.
///
/// Runs the recurrence with `B_k = b^(d^k - 1) mod m`, updated as
/// `B_{k+1} = B_k^d * b^(d-1)`, so nothing larger than `m^d` is formed.
pub fn numerator_residues(param: &Parameter, m: &Integer, n_max: u32) -> Vec<Integer> {
    let mut out = Vec::with_capacity(n_max as usize);
    if n_max == 0 {
        return out;
    }
    let d = param.d;
    let a = arith::mod_pos(&param.a, m);
    let b = arith::mod_pos(&param.b, m);
    let b_dm1 = Integer::from(b.pow_mod_ref(&Integer::from(d - 1), m).expect("modulus > 0"));
    let mut big_b = Integer::from(1) % m;
    let mut x = a.clone();
    out.push(x.clone());
    for _ in 1..n_max {
        big_b = pow_mod_small(&big_b, d, m);
        big_b *= &b_dm1;
        big_b %= m;
        let mut next = pow_mod_small(&x, d, m);
        next += Integer::from(&a * &big_b);
        next %= m;
        x = next;
        out.push(x.clone());
    }
    out
}

fn pow_mod_small(x: &Integer, e: u32, m: &Integer) -> Integer {
    if e <= 8 {
        let mut acc = x.clone();
        for _ in 1..e {
            acc *= x;
            acc %= m;
        }
        acc
    } else {
        Integer::from(x.pow_mod_ref(&Integer::from(e), m).expect("modulus > 0"))
    }
}

/// `a_k mod m` for a machine-word modulus.
pub fn numerator_residues_u64(param: &Parameter, m: u64, n_max: u32) -> Vec<u64> {
    use arith::{mul_mod, pow_mod};
    let mut out = Vec::with_capacity(n_max as usize);
    if n_max == 0 {
        return out;
    }
    let mi = Integer::from(m);
    let a = arith::mod_pos(&param.a, &mi).to_u64_wrapping();
    let b = arith::mod_pos(&param.b, &mi).to_u64_wrapping();
    let d = u64::from(param.d);
    let b_dm1 = pow_mod(b, d - 1, m);
    let mut big_b = 1 % m;
    let mut x = a;
    out.push(x);
    for _ in 1..n_max {
        big_b = mul_mod(pow_mod(big_b, d, m), b_dm1, m);
        x = ((u128::from(pow_mod(x, d, m)) + u128::from(mul_mod(a, big_b, m))) % u128::from(m))
            as u64;
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nums(o: &Orbit) -> Vec<Integer> {
        o.terms().map(|t| t.numerator.clone()).collect()
    }

    #[test]
    fn make_parameter_normalizes() {
        let p = Parameter::new(14, -8, 2).unwrap();
        assert_eq!((p.a().clone(), p.b().clone(), p.d()), (Integer::from(-7), Integer::from(4), 2));
        let q = Parameter::new(-7, 4, 2).unwrap();
        assert_eq!(p, q);
        assert!(!q.has_finite_orbit());
    }

    #[test]
    fn make_parameter_errors() {
        assert!(matches!(Parameter::new(1, 0, 2), Err(Error::ZeroDenominator)));
        assert!(matches!(Parameter::new(1, 2, 1), Err(Error::DegreeTooSmall(1))));
        assert!(Parameter::new(-2, 1, 2).unwrap().has_finite_orbit());
        assert!(matches!(Parameter::infinite(-2, 1, 2), Err(Error::FiniteOrbit(_))));
        assert!(Parameter::new(0, 5, 3).unwrap().has_finite_orbit());
        assert!(Parameter::new(-1, 1, 4).unwrap().has_finite_orbit());
        // degree-dependent: z^3 - 1 and z^4 - 2 escape
        assert!(!Parameter::new(-1, 1, 3).unwrap().has_finite_orbit());
        assert!(!Parameter::new(-2, 1, 4).unwrap().has_finite_orbit());
    }

    #[test]
    fn window_predicates() {
        assert!(Parameter::new(-3, 2, 2).unwrap().in_recurrent_window());
        assert!(Parameter::new(-9, 8, 4).unwrap().in_recurrent_window());
        assert!(!Parameter::new(-3, 2, 4).unwrap().in_recurrent_window());
        assert!(!Parameter::new(-5, 2, 2).unwrap().in_recurrent_window());
        assert!(!Parameter::new(-3, 2, 3).unwrap().in_recurrent_window());
        assert!(Parameter::new(9, 2, 2).unwrap().beyond_escape_radius());
        assert!(!Parameter::new(4, 1, 2).unwrap().beyond_escape_radius());
        assert_eq!(Parameter::new(4, 1, 2).unwrap().cmp_escape_radius(), std::cmp::Ordering::Equal);
    }

    #[test]
    fn recurrence_examples() {
        let o = Orbit::new(Parameter::new(-7, 4, 2).unwrap()).extend(4).unwrap();
        assert_eq!(nums(&o), [-7, 21, -7, -114639].map(Integer::from));
        let o = Orbit::new(Parameter::new(1, 2, 2).unwrap()).extend(3).unwrap();
        assert_eq!(nums(&o), [1, 3, 17].map(Integer::from));
        let o = Orbit::new(Parameter::new(-3, 2, 2).unwrap()).extend(4).unwrap();
        assert_eq!(nums(&o), [-3, 3, -15, -159].map(Integer::from));
        assert_eq!(o.term(4).unwrap().denom_exp, 8);
    }

    #[test]
    fn extension_shares_prefix() {
        let o = Orbit::new(Parameter::new(-3, 2, 2).unwrap()).extend(3).unwrap();
        let o2 = o.extend(6).unwrap();
        assert_eq!(o.len(), 3);
        assert_eq!(o2.len(), 6);
        assert!(Arc::ptr_eq(&o.terms[2], &o2.terms[2]));
    }

    #[test]
    fn size_guard_is_an_error() {
        let o = Orbit::new(Parameter::new(-3, 2, 2).unwrap()).with_max_bits(64);
        match o.extend(10) {
            Err(Error::SizeGuard { n, .. }) => assert!(n <= 7),
            other => panic!("expected size guard, got {other:?}"),
        }
        let partial = o.extend_within_guard(10);
        assert!(partial.len() >= 5 && partial.len() < 10);
    }

    #[test]
    fn log_abs_iterate_examples() {
        let o = Orbit::new(Parameter::new(-7, 4, 2).unwrap()).extend(3).unwrap();
        assert!((o.log_abs_iterate(3).unwrap() - (7.0f64 / 256.0).ln()).abs() < 1e-12);
        let o = Orbit::new(Parameter::new(1, 2, 2).unwrap()).extend(2).unwrap();
        assert!((o.log_abs_iterate(2).unwrap() - 0.75f64.ln()).abs() < 1e-12);
        let o = Orbit::new(Parameter::new(9, 2, 2).unwrap());
        assert!((o.log_abs_iterate(1).unwrap() - 4.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn residues_agree_with_exact_terms() {
        let p = Parameter::new(-13, 9, 3).unwrap();
        let o = Orbit::new(p.clone()).extend(6).unwrap();
        let m = Integer::from(1_000_003u64) * Integer::from(998_244_353u64);
        let r = numerator_residues(&p, &m, 6);
        let r64 = numerator_residues_u64(&p, 1_000_003, 6);
        for (k, t) in o.terms().enumerate() {
            assert_eq!(arith::mod_pos(&t.numerator, &m), r[k]);
            assert_eq!(
                arith::mod_pos(&t.numerator, &Integer::from(1_000_003)),
                r64[k]
            );
        }
    }

    #[test]
    fn from_numerators_rejects_tampering() {
        let p = Parameter::new(-3, 2, 2).unwrap();
        let o = Orbit::new(p.clone()).extend(5).unwrap();
        let mut v = nums(&o);
        assert!(Orbit::from_numerators(p.clone(), v.clone()).is_ok());
        v[3] += 1;
        assert!(Orbit::from_numerators(p, v).is_err());
    }
}
