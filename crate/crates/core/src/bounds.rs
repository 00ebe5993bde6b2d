//! Heights, divisor sums and the size inequalities satisfied by Zsigmondy
//! indices, plus the solver for the effective index bound `M(c)`.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::arith;
use crate::enclosure;
use crate::error::{Error, Result};
use crate::orbit::{Orbit, Parameter};

/// Relative slack applied to floating comparisons.
pub const SLACK: f64 = 1e-9;

/// `h(r/s) = log max(|r|, |s|)` for a reduced rational; `h(0) = 0`.
pub fn weil_height(r: &Rational) -> f64 {
    if *r.numer() == 0 {
        return 0.0;
    }
    arith::log_abs(r.numer()).max(arith::log_abs(r.denom()))
}

/// `h(c)` for a parameter.
pub fn height_of_c(param: &Parameter) -> f64 {
    weil_height(&param.c())
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisorTerms {
    pub n: u32,
    pub d: u32,
    /// `s_d(n) = sum over primes q | n of d^(n/q)`.
    #[serde(serialize_with = "ser_int")]
    pub s: Integer,
    /// Number of distinct primes dividing `n`.
    pub omega: u32,
    /// `s_d(n) <= d^(n/2) log2 n`.
    pub s_bound_holds: bool,
    /// `omega(n) <= log2 n`.
    pub omega_bound_holds: bool,
}

fn ser_int<S: serde::Serializer>(v: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::json::int(v).serialize(s)
}

pub fn divisor_terms(n: u32, d: u32) -> Result<DivisorTerms> {
    if n < 2 {
        return Err(Error::IndexTooSmall(n));
    }
    let primes = arith::distinct_prime_factors(u64::from(n));
    let s = primes
        .iter()
        .fold(Integer::new(), |acc, &q| acc + Integer::from(d).pow(n / q as u32));
    let omega = primes.len() as u32;
    let log2n = f64::from(n).log2();
    // compare in logs; d^(n/2) log2 n can be astronomically large
    let lhs = arith::log_abs(&s);
    let rhs = f64::from(n) / 2.0 * f64::from(d).ln() + log2n.ln();
    let s_bound_holds = lhs <= rhs + SLACK * rhs.abs().max(1.0);
    Ok(DivisorTerms {
        n,
        d,
        s,
        omega,
        s_bound_holds,
        omega_bound_holds: f64::from(omega) <= log2n + SLACK,
    })
}

/// `s_d(n) / d^n` without forming either number.
fn s_ratio(n: u32, d: u32) -> f64 {
    arith::distinct_prime_factors(u64::from(n))
        .iter()
        .map(|&q| {
            let e = f64::from(n / q as u32) - f64::from(n);
            f64::from(d).powf(e)
        })
        .sum()
}

fn omega(n: u32) -> u32 {
    arith::distinct_prime_factors(u64::from(n)).len() as u32
}

/// Approximation of the canonical height of 0 from one iterate.
#[derive(Clone, Debug, Serialize)]
pub struct HeightEstimate {
    /// `h(f^N(0)) / d^N`.
    pub value: f64,
    /// `(h(c) + log 2) / ((d - 1) d^N)`.
    pub error_bound: f64,
    pub level: u32,
    /// Rigorous enclosure of the canonical height.
    pub lower: f64,
    pub upper: f64,
}

impl HeightEstimate {
    /// Lower bound on the canonical height, or an error if it is not positive.
    pub fn certify_positive(&self) -> Result<f64> {
        if self.lower > 0.0 {
            Ok(self.lower)
        } else {
            Err(Error::Inconclusive(format!(
                "level {} is too small to certify a positive height",
                self.level
            )))
        }
    }
}

/// Bounds on `h(f^N(0))`, never expanding the denominator.
fn height_of_iterate(param: &Parameter, orbit: &Orbit, n: u32) -> Result<(f64, f64)> {
    let (al, ah) = enclosure::log_abs_numerator_bounds(param, orbit, n).ok_or_else(|| {
        Error::Inconclusive(format!("could not bound log|a_{n}|"))
    })?;
    if *param.b() == 1 {
        return Ok((al.max(0.0), ah.max(0.0)));
    }
    let (bl, bh) = arith::log_abs_bounds(param.b());
    let e = f64::from(param.d()).powi(n as i32 - 1);
    let (dl, _) = arith::widen(e * bl);
    let (_, dh) = arith::widen(e * bh);
    Ok((al.max(dl), ah.max(dh)))
}

pub fn canonical_height_estimate(orbit: &Orbit, level: u32) -> Result<HeightEstimate> {
    if level == 0 {
        return Err(Error::IndexTooSmall(0));
    }
    let param = orbit.parameter();
    if param.has_finite_orbit() {
        return Err(Error::FiniteOrbit(param.to_string()));
    }
    let work = orbit.extend_within_guard(level);
    let (lo, hi) = height_of_iterate(param, &work, level)?;
    let dn = f64::from(param.d()).powi(level as i32);
    let (_, hc_hi) = arith::widen(height_of_c(param) + std::f64::consts::LN_2);
    let error_bound = hc_hi / (f64::from(param.d() - 1) * dn);
    let (vlo, _) = arith::widen(lo / dn);
    let (_, vhi) = arith::widen(hi / dn);
    let (lower, _) = arith::widen(vlo - error_bound);
    let (_, upper) = arith::widen(vhi + error_bound);
    Ok(HeightEstimate {
        value: (lo + hi) / 2.0 / dn,
        error_bound,
        level,
        lower: lower.max(0.0),
        upper,
    })
}

/// Largest possible `|h(f^(N+1)(0))/d^(N+1) - h(f^N(0))/d^N|` and the
/// telescoping bound `(h(c) + log 2)/d^(N+1)` it must respect.
pub fn cauchy_step(orbit: &Orbit, level: u32) -> Result<(f64, f64)> {
    let param = orbit.parameter();
    let work = orbit.extend_within_guard(level + 1);
    let d = f64::from(param.d());
    let (a_lo, a_hi) = height_of_iterate(param, &work, level)?;
    let (b_lo, b_hi) = height_of_iterate(param, &work, level + 1)?;
    let s0 = d.powi(level as i32);
    let s1 = s0 * d;
    let step = (b_hi / s1 - a_lo / s0).abs().max((a_hi / s0 - b_lo / s1).abs());
    let (_, step) = arith::widen(step);
    let bound = (height_of_c(param) + std::f64::consts::LN_2) / s1;
    Ok((step, bound))
}

/// Which upper bound replaces `|f^(n/q)(0)|` in the size inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// Compare numerators directly: `log|a_n| <= sum_q log|a_(n/q)|`.
    Exact,
    /// Use `|f^k(0)| <= |c|`; needs `d` even and `c` in `(-2^(1/(d-1)), -1)`.
    AbsC,
    /// Use `C(k) <= |f^k(0)| <= 2^((d^(k-1)-1)/(d-1)) C(k)` with
    /// `C(k) = max(|c|, |c|^(d^(k-1)))`; needs `c > 0`, or `c < 0` with `d` odd.
    PositiveC,
    /// Multiplier lower bound `|f^n(0)| >= rho 2^(-(2n+2))` against
    /// `|f^n(0)| <= 2`, for `d = 2`.
    Multiplier,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub n: u32,
    pub mode: BoundMode,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs <= rhs`; when false, `n` cannot be in the Zsigmondy set.
    pub holds: bool,
    /// `|lhs - rhs|` within slack; `holds` is then decided exactly if possible.
    pub marginal: bool,
    pub terms: BTreeMap<String, serde_json::Value>,
}

pub fn zsig_inequality(orbit: &Orbit, n: u32, mode: BoundMode) -> Result<InequalityReport> {
    if n < 2 {
        return Err(Error::IndexTooSmall(n));
    }
    let param = orbit.parameter();
    if param.has_finite_orbit() {
        return Err(Error::FiniteOrbit(param.to_string()));
    }
    let dt = divisor_terms(n, param.d())?;
    let idx: Vec<u32> = arith::distinct_prime_factors(u64::from(n))
        .into_iter()
        .map(|q| n / q as u32)
        .collect();
    let d = f64::from(param.d());
    let log_b = param.log_b();
    let log_c = param.log_abs_c();
    let mut terms = BTreeMap::new();
    terms.insert("s_d".to_string(), crate::json::int(&dt.s));
    terms.insert("omega".to_string(), dt.omega.into());
    terms.insert("log_b".to_string(), log_b.into());
    terms.insert("log_abs_c".to_string(), log_c.into());
    terms.insert("indices".to_string(), serde_json::json!(idx));

    let work = orbit.extend_within_guard(n);
    let (lhs, rhs, exact) = match mode {
        BoundMode::Exact => {
            let bound = |k| {
                enclosure::log_abs_numerator_bounds(param, &work, k)
                    .ok_or_else(|| Error::Inconclusive(format!("could not bound log|a_{k}|")))
            };
            let (l_lo, l_hi) = bound(n)?;
            let mut r = 0.0;
            let mut parts = Vec::new();
            for &k in &idx {
                let (lo, hi) = bound(k)?;
                r += (lo + hi) / 2.0;
                parts.push((lo + hi) / 2.0);
            }
            terms.insert("log_abs_a_n".to_string(), ((l_lo + l_hi) / 2.0).into());
            terms.insert("log_abs_a_n_over_q".to_string(), serde_json::json!(parts));
            // exact integer comparison when every term is stored
            let exact = work.term(n).and_then(|t| {
                let mut g = Integer::from(1);
                for &k in &idx {
                    g *= Integer::from(work.term(k)?.numerator.abs_ref());
                }
                Some(Integer::from(t.numerator.abs_ref()) <= g)
            });
            ((l_lo + l_hi) / 2.0, r, exact)
        }
        BoundMode::AbsC => {
            if !param.in_recurrent_window() {
                return Err(Error::Precondition(
                    "|f^k(0)| <= |c| needs d even and c in (-2^(1/(d-1)), -1)".into(),
                ));
            }
            let (lo, hi) = enclosure::log_abs_iterate_bounds(param, n)
                .ok_or_else(|| Error::Inconclusive(format!("could not bound |f^{n}(0)|")))?;
            let lf = (lo + hi) / 2.0;
            let lhs = lf + d.powi(n as i32 - 1) * log_b;
            let s = dt.s.to_f64();
            let rhs = f64::from(dt.omega) * log_c + s / d * log_b;
            terms.insert("log_abs_iterate".to_string(), lf.into());
            (lhs, rhs, None)
        }
        BoundMode::PositiveC => {
            if !(*param.a() > 0 || param.d() % 2 == 1) {
                return Err(Error::Precondition(
                    "C(n) bounds need c > 0, or c < 0 with d odd".into(),
                ));
            }
            let log_cap = |k: u32| log_c.max(d.powi(k as i32 - 1) * log_c);
            let lhs = log_cap(n) + d.powi(n as i32 - 1) * log_b;
            let mut rhs = 0.0;
            for &k in &idx {
                let two = (d.powi(k as i32 - 1) - 1.0) / (d - 1.0) * std::f64::consts::LN_2;
                rhs += two + log_cap(k) + d.powi(k as i32 - 1) * log_b;
            }
            terms.insert("log_C_n".to_string(), log_cap(n).into());
            (lhs, rhs, None)
        }
        BoundMode::Multiplier => {
            return Err(Error::Precondition(
                "the multiplier bound is evaluated by mandelbrot::ca_inequality".into(),
            ));
        }
    };
    let tol = SLACK * lhs.abs().max(rhs.abs()).max(1.0);
    let marginal = (lhs - rhs).abs() <= tol;
    let holds = exact.unwrap_or(lhs <= rhs + tol);
    Ok(InequalityReport {
        n,
        mode,
        lhs,
        rhs,
        holds,
        marginal,
        terms,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MSolution {
    /// Every `n >= m` violates the failure condition.
    pub m: u32,
    /// Indices in `[2, n_probe]` where the failure condition holds.
    pub condition_holds_at: Vec<u32>,
    /// Indices where the two sides agree to within slack.
    pub marginal_at: Vec<u32>,
    pub n_probe: u32,
    /// The tail `n > n_probe` was certified from this index on.
    pub tail_from: u32,
}

/// Left and right sides of the failure condition
/// `(tau/2 d^(n-1) - s_d(n)/d) log b <= log(1/eps) + omega(n) log|c|`.
pub fn m_condition_sides(param: &Parameter, eps: f64, tau: f64, n: u32) -> (f64, f64) {
    let d = f64::from(param.d());
    let log_b = param.log_b();
    let lead = d.powi(n as i32 - 1);
    // d^(n-1) (tau/2 - s_d(n)/d^n), never inf - inf
    let coef = tau / 2.0 - s_ratio(n, param.d());
    let lhs = if coef == 0.0 { 0.0 } else { lead * coef * log_b };
    let rhs = (1.0 / eps).ln() + f64::from(omega(n)) * param.log_abs_c();
    (lhs, rhs)
}

/// Least `M` such that the failure condition is violated for all `n >= M`.
///
/// Indices up to `n_probe` are checked directly. Beyond that, with
/// `u(n) = tau/2 d^(n/2) - log2 n` and the coarse bounds `s_d(n) <= d^(n/2) log2 n`,
/// `omega(n) <= log2 n`, the left side exceeds `log b d^(n/2-1) u(n)` and the
/// right side is below `log(1/eps) + log2(n) log|c|`. The difference
/// `H(n)` is shown positive at `N0 = n_probe + 1` and nondecreasing afterwards.
pub fn effective_m_solver(param: &Parameter, eps: f64, tau: f64, n_probe: u32) -> Result<MSolution> {
    if !param.in_recurrent_window() {
        return Err(Error::Precondition(
            "needs d even and c in (-2^(1/(d-1)), -1)".into(),
        ));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Precondition(format!("tau must lie in (0, 1), got {tau}")));
    }
    if n_probe < 2 {
        return Err(Error::IndexTooSmall(n_probe));
    }
    let mut holds_at = Vec::new();
    let mut marginal_at = Vec::new();
    for n in 2..=n_probe {
        let (lhs, rhs) = m_condition_sides(param, eps, tau, n);
        let tol = SLACK * lhs.abs().max(rhs.abs()).max(1.0);
        if (lhs - rhs).abs() <= tol {
            marginal_at.push(n);
        }
        // marginal indices count as holding, which only raises M
        if lhs <= rhs + tol {
            holds_at.push(n);
        }
    }

    let n0 = n_probe + 1;
    if !tail_certified(param, eps, tau, n0) {
        return Err(Error::TailNotCertified(n_probe));
    }
    let m = holds_at.last().map_or(2, |&n| n + 1);
    Ok(MSolution {
        m,
        condition_holds_at: holds_at,
        marginal_at,
        n_probe,
        tail_from: n0,
    })
}

fn tail_certified(param: &Parameter, eps: f64, tau: f64, n0: u32) -> bool {
    let d = f64::from(param.d());
    let log_b = param.log_b();
    let log_c = param.log_abs_c();
    let x = f64::from(n0);
    let grow = d.powf(x / 2.0);
    let u = tau / 2.0 * grow - x.log2();
    let step_log = (1.0 + 1.0 / x).log2();
    let sd = d.sqrt() - 1.0;
    let margin = |lhs: f64, rhs: f64| lhs > rhs + SLACK * lhs.abs().max(rhs.abs()).max(1.0);
    let u_positive = margin(u, 0.0);
    let u_increasing = margin(tau / 2.0 * grow * sd, step_log);
    let head = log_b * d.powf(x / 2.0 - 1.0) * u;
    let h_increasing = margin(head * sd, log_c * step_log);
    let h_positive = margin(head, (1.0 / eps).ln() + x.log2() * log_c);
    u_positive && u_increasing && h_increasing && h_positive
}

/// `m`-th power data `(k, l, m)` with `a = -k^m`, `b = l^m`, `m | d`, `m > 1`,
/// for the smallest such `m`.
pub fn power_triple(param: &Parameter) -> Option<(Integer, Integer, u32)> {
    if *param.a() >= 0 {
        return None;
    }
    let abs_a = Integer::from(param.a().abs_ref());
    arith::nontrivial_divisors(param.d()).into_iter().find_map(|m| {
        let k = arith::exact_root(&abs_a, m)?;
        let l = arith::exact_root(param.b(), m)?;
        Some((k, l, m))
    })
}

/// `log(1/(d b^(d^(n-1)/2)))`, the lower bound on `log|f^n(0)|` for
/// reducible parameters.
pub fn reducible_lower_bound(param: &Parameter, n: u32) -> Result<f64> {
    if param.d() % 2 == 1 {
        return Err(Error::Precondition("reducible bound needs d even".into()));
    }
    if n < 2 {
        return Err(Error::IndexTooSmall(n));
    }
    if power_triple(param).is_none() {
        return Err(Error::Precondition(format!(
            "{param} is not of the form -k^m/l^m with m | {}",
            param.d()
        )));
    }
    let d = f64::from(param.d());
    Ok(-d.ln() - d.powi(n as i32 - 1) / 2.0 * param.log_b())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit(a: i64, b: i64, d: u32) -> Orbit {
        Orbit::new(Parameter::new(a, b, d).unwrap())
    }

    #[test]
    fn weil_height_examples() {
        assert!((weil_height(&Rational::from((3, 4))) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(weil_height(&Rational::new()), 0.0);
        assert!((weil_height(&Rational::from((-7, 4))) - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn divisor_term_examples() {
        let t = divisor_terms(12, 2).unwrap();
        assert_eq!((t.s.to_u32(), t.omega), (Some(80), 2));
        let t = divisor_terms(9, 2).unwrap();
        assert_eq!((t.s.to_u32(), t.omega), (Some(8), 1));
        let t = divisor_terms(7, 2).unwrap();
        assert_eq!((t.s.to_u32(), t.omega), (Some(2), 1));
        assert!(t.s_bound_holds && t.omega_bound_holds);
        assert!(divisor_terms(1, 2).is_err());
    }

    #[test]
    fn height_examples() {
        let h = canonical_height_estimate(&orbit(9, 2, 2), 6).unwrap();
        assert!((h.error_bound - (9f64.ln() + 2f64.ln()) / 64.0).abs() < 1e-12);
        assert!((h.value - 1.1496956).abs() < 1e-6, "{}", h.value);
        assert!(h.lower > 9f64.ln() / 4.0);
        let h = canonical_height_estimate(&orbit(1, 2, 2), 8).unwrap();
        assert!(h.value >= 0.0 && h.value <= 2f64.ln());
        assert!((h.error_bound - 2.0 * 2f64.ln() / 256.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_steps() {
        for (a, b, d) in [(9, 2, 2), (-3, 2, 2), (1, 2, 3), (-7, 4, 2)] {
            for n in 1..=8 {
                let (step, bound) = cauchy_step(&orbit(a, b, d), n).unwrap();
                assert!(step <= bound, "{a}/{b} d={d} N={n}: {step} > {bound}");
            }
        }
    }

    #[test]
    fn inequality_examples() {
        let r = zsig_inequality(&orbit(-7, 4, 2), 3, BoundMode::Exact).unwrap();
        assert!(r.holds && r.marginal);
        let r = zsig_inequality(&orbit(1, 2, 2), 3, BoundMode::Exact).unwrap();
        assert!(!r.holds);
        assert!((r.lhs - 17f64.ln()).abs() < 1e-12 && r.rhs.abs() < 1e-12);
        let r = zsig_inequality(&orbit(-3, 2, 2), 4, BoundMode::Exact).unwrap();
        assert!(!r.holds);
        assert!(zsig_inequality(&orbit(1, 2, 2), 3, BoundMode::AbsC).is_err());
        assert!(zsig_inequality(&orbit(-3, 2, 2), 3, BoundMode::PositiveC).is_err());
        let r = zsig_inequality(&orbit(1, 2, 2), 4, BoundMode::PositiveC).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn m_solver_examples() {
        let p = Parameter::new(-3, 2, 2).unwrap();
        let s = effective_m_solver(&p, 1.0, 0.1, 64).unwrap();
        assert_eq!(s.m, 9);
        assert_eq!(s.condition_holds_at, vec![2, 3, 4, 5, 6, 8]);
        assert!(effective_m_solver(&p, 1.0, 1.0, 64).is_err());
        assert_eq!(effective_m_solver(&p, 1.0, 0.999, 64).unwrap().m, 3);
        assert!(matches!(
            effective_m_solver(&p, 1.0, 0.1, 8),
            Err(Error::TailNotCertified(8))
        ));
        let q = Parameter::new(9, 2, 2).unwrap();
        assert!(effective_m_solver(&q, 1.0, 0.1, 64).is_err());
    }

    #[test]
    fn reducible_examples() {
        let p = Parameter::new(-25, 16, 2).unwrap();
        let v = reducible_lower_bound(&p, 3).unwrap();
        assert!((v - (-(2f64.ln()) - 2.0 * 16f64.ln())).abs() < 1e-12);
        let o = Orbit::new(p.clone()).extend(3).unwrap();
        assert!(o.log_abs_iterate(3).unwrap() >= v);
        assert_eq!(
            power_triple(&p),
            Some((Integer::from(5), Integer::from(4), 2))
        );
        assert!(reducible_lower_bound(&Parameter::new(-9, 8, 4).unwrap(), 3).is_err());
    }
}
