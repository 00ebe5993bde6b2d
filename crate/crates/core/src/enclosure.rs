//! Rigorous enclosures of the real iterates `f^n(0)`.
//!
//! Bounded iterates are carried as fixed-point intervals `[lo, hi] / 2^prec`
//! with outward rounding, so every enclosure provably contains the exact
//! rational. Once an iterate exceeds `2^64` in modulus the enclosure switches
//! to log-magnitude form, where `ln|x^d + c| = d ln|x| + ln|1 + c/x^d|`.
//!
//! This is how magnitude questions get answered for terms whose numerators
//! are too large to materialize.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::arith;
use crate::orbit::{Orbit, Parameter};

const PRECISIONS: [u32; 4] = [128, 512, 2048, 8192];

#[derive(Clone, Debug)]
pub enum IterateBound {
    /// `x` lies in `[lo, hi] / 2^prec`.
    Fixed { lo: Integer, hi: Integer, prec: u32 },
    /// `|x|` lies in `[exp(log_lo), exp(log_hi)]` and `x` has the given sign.
    Large { negative: bool, log_lo: f64, log_hi: f64 },
    /// Precision ran out.
    Unknown,
}

impl IterateBound {
    /// Enclosure of `ln |x|`, or `None` when the interval touches zero.
    pub fn log_abs(&self) -> Option<(f64, f64)> {
        match self {
            IterateBound::Fixed { lo, hi, prec } => {
                let (small, big) = if *lo > 0 {
                    (lo, hi)
                } else if *hi < 0 {
                    (hi, lo)
                } else {
                    return None;
                };
                let shift = f64::from(*prec) * std::f64::consts::LN_2;
                let (l, _) = arith::log_abs_bounds(small);
                let (_, h) = arith::log_abs_bounds(big);
                let (l, _) = arith::widen(l - shift);
                let (_, h) = arith::widen(h - shift);
                Some((l, h))
            }
            IterateBound::Large { log_lo, log_hi, .. } => Some((*log_lo, *log_hi)),
            IterateBound::Unknown => None,
        }
    }

    /// Certified comparison of `|x|` against a non-negative rational.
    pub fn cmp_abs(&self, t: &Rational) -> Option<Ordering> {
        match self {
            IterateBound::Fixed { lo, hi, prec } => {
                let (m_lo, m_hi) = if *lo >= 0 {
                    (lo.clone(), hi.clone())
                } else if *hi <= 0 {
                    (Integer::from(-hi), Integer::from(-lo))
                } else {
                    (Integer::new(), Integer::from(lo.abs_ref()).max(Integer::from(hi.abs_ref())))
                };
                let scale = Integer::from(1) << *prec;
                let lo_q = Rational::from((m_lo, scale.clone()));
                let hi_q = Rational::from((m_hi, scale));
                if hi_q < *t {
                    Some(Ordering::Less)
                } else if lo_q > *t {
                    Some(Ordering::Greater)
                } else {
                    None
                }
            }
            IterateBound::Large { log_lo, log_hi, .. } => {
                if *t == 0 {
                    return Some(Ordering::Greater);
                }
                let (tl, th) = log_rational_bounds(t);
                if *log_lo > th {
                    Some(Ordering::Greater)
                } else if *log_hi < tl {
                    Some(Ordering::Less)
                } else {
                    None
                }
            }
            IterateBound::Unknown => None,
        }
    }

    pub fn is_negative(&self) -> Option<bool> {
        match self {
            IterateBound::Fixed { lo, hi, .. } => {
                if *hi < 0 {
                    Some(true)
                } else if *lo > 0 {
                    Some(false)
                } else {
                    None
                }
            }
            IterateBound::Large { negative, .. } => Some(*negative),
            IterateBound::Unknown => None,
        }
    }
}

fn log_rational_bounds(t: &Rational) -> (f64, f64) {
    let (nl, nh) = arith::log_abs_bounds(t.numer());
    let (dl, dh) = arith::log_abs_bounds(t.denom());
    let (lo, _) = arith::widen(nl - dh);
    let (_, hi) = arith::widen(nh - dl);
    (lo, hi)
}

fn shr_floor(x: Integer, s: u32) -> Integer {
    x >> s
}

fn shr_ceil(x: Integer, s: u32) -> Integer {
    -((-x) >> s)
}

/// Enclosures of `f^1(0), ..., f^n_max(0)` at one working precision.
#[derive(Clone, Debug)]
pub struct Enclosures {
    prec: u32,
    items: Vec<IterateBound>,
}

impl Enclosures {
    pub fn compute(param: &Parameter, n_max: u32, prec: u32) -> Self {
        let d = param.d();
        let a_shift = Integer::from(param.a() << prec);
        let (c_lo, rem) = a_shift.div_rem_floor(param.b().clone());
        let c_hi = if rem == 0 { c_lo.clone() } else { Integer::from(&c_lo + 1) };
        let c_log = if *param.a() == 0 {
            f64::NEG_INFINITY
        } else {
            param.log_abs_c()
        };

        let mut items = Vec::with_capacity(n_max as usize);
        let mut cur = IterateBound::Fixed {
            lo: c_lo.clone(),
            hi: c_hi.clone(),
            prec,
        };
        let big = Integer::from(1) << (prec + 64);
        let width_cap = Integer::from(1) << prec;
        for n in 1..=n_max {
            if n > 1 {
                cur = match cur {
                    IterateBound::Fixed { lo, hi, .. } => {
                        let (plo, phi) = if d % 2 == 1 || lo >= 0 {
                            (Integer::from((&lo).pow(d)), Integer::from((&hi).pow(d)))
                        } else if hi <= 0 {
                            (Integer::from((&hi).pow(d)), Integer::from((&lo).pow(d)))
                        } else {
                            let m = Integer::from(lo.abs_ref()).max(Integer::from(hi.abs_ref()));
                            (Integer::new(), m.pow(d))
                        };
                        let s = prec * (d - 1);
                        let lo = shr_floor(plo, s) + &c_lo;
                        let hi = shr_ceil(phi, s) + &c_hi;
                        if Integer::from(&hi - &lo) > width_cap {
                            IterateBound::Unknown
                        } else {
                            IterateBound::Fixed { lo, hi, prec }
                        }
                    }
                    IterateBound::Large {
                        negative,
                        log_lo,
                        log_hi,
                    } => {
                        // |c / x^d| <= exp(c_log - d * log_lo)
                        let u = (c_log - f64::from(d) * log_lo).exp();
                        if u >= 0.5 {
                            IterateBound::Unknown
                        } else {
                            let lo = f64::from(d) * log_lo + (-u).ln_1p();
                            let hi = f64::from(d) * log_hi + u.ln_1p();
                            let (lo, _) = arith::widen(lo);
                            let (_, hi) = arith::widen(hi);
                            IterateBound::Large {
                                negative: negative && d % 2 == 1,
                                log_lo: lo,
                                log_hi: hi,
                            }
                        }
                    }
                    IterateBound::Unknown => IterateBound::Unknown,
                };
            }
            // switch to log form once |x| >= 2^64
            if let IterateBound::Fixed { lo, hi, .. } = &cur {
                let far = (*lo > 0 && *lo >= big) || (*hi < 0 && Integer::from(-hi) >= big);
                if far {
                    let negative = *hi < 0;
                    let (log_lo, log_hi) = cur.log_abs().expect("interval excludes zero");
                    cur = IterateBound::Large {
                        negative,
                        log_lo,
                        log_hi,
                    };
                }
            }
            items.push(cur.clone());
        }
        Enclosures { prec, items }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn get(&self, n: u32) -> Option<&IterateBound> {
        if n == 0 {
            return None;
        }
        self.items.get(n as usize - 1)
    }

    pub fn len(&self) -> u32 {
        self.items.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Certified `ln |f^n(0)|` interval, raising the precision until it resolves.
pub fn log_abs_iterate_bounds(param: &Parameter, n: u32) -> Option<(f64, f64)> {
    PRECISIONS
        .iter()
        .find_map(|&p| Enclosures::compute(param, n, p).get(n)?.log_abs())
}

/// Rigorous bounds on `ln |a_k|`, from the stored term when the orbit has
/// it and from the enclosure of `f^k(0)` otherwise.
pub fn log_abs_numerator_bounds(param: &Parameter, work: &Orbit, k: u32) -> Option<(f64, f64)> {
    if let Some(t) = work.term(k) {
        return Some(arith::log_abs_bounds(&t.numerator));
    }
    let (lo, hi) = log_abs_iterate_bounds(param, k)?;
    if *param.b() == 1 {
        return Some((lo, hi));
    }
    let (bl, bh) = arith::log_abs_bounds(param.b());
    let e = f64::from(param.d()).powi(k as i32 - 1);
    let (dl, _) = arith::widen(e * bl);
    let (_, dh) = arith::widen(e * bh);
    let (l, _) = arith::widen(lo + dl);
    let (_, h) = arith::widen(hi + dh);
    Some((l, h))
}

/// Certified comparison of `|f^n(0)|` against `t`, raising precision as needed.
pub fn cmp_abs_iterate(param: &Parameter, n: u32, t: &Rational) -> Option<Ordering> {
    PRECISIONS
        .iter()
        .find_map(|&p| Enclosures::compute(param, n, p).get(n)?.cmp_abs(t))
}

/// Enclosures for all indices up to `n_max`, retried at higher precision
/// until `resolved` accepts them or the precision ladder runs out.
pub fn enclosures_until(
    param: &Parameter,
    n_max: u32,
    resolved: impl Fn(&Enclosures) -> bool,
) -> Enclosures {
    let mut last = None;
    for &p in &PRECISIONS {
        let e = Enclosures::compute(param, n_max, p);
        if resolved(&e) {
            return e;
        }
        last = Some(e);
    }
    last.expect("precision ladder is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encloses_exact_iterates() {
        for (a, b, d) in [(-7, 4, 2), (-3, 2, 2), (1, 2, 2), (-9, 8, 4), (-5, 2, 3), (9, 2, 2)] {
            let p = Parameter::new(a, b, d).unwrap();
            let o = Orbit::new(p.clone()).extend(7).unwrap();
            let e = Enclosures::compute(&p, 7, 256);
            for n in 1..=7 {
                let exact = o.log_abs_iterate(n).unwrap();
                let (lo, hi) = e.get(n).unwrap().log_abs().unwrap();
                assert!(lo <= exact + 1e-9 && exact - 1e-9 <= hi, "{a}/{b} d={d} n={n}");
                assert!(hi - lo < 1e-6, "{a}/{b} d={d} n={n}: width {}", hi - lo);
            }
        }
    }

    #[test]
    fn compares_against_half() {
        let p = Parameter::new(-7, 4, 2).unwrap();
        let half = Rational::from((1, 2));
        assert_eq!(cmp_abs_iterate(&p, 3, &half), Some(Ordering::Less));
        assert_eq!(cmp_abs_iterate(&p, 4, &half), Some(Ordering::Greater));
    }

    #[test]
    fn large_mode_tracks_escape() {
        let p = Parameter::new(9, 2, 3).unwrap();
        let o = Orbit::new(p.clone()).extend(8).unwrap();
        let (lo, hi) = log_abs_iterate_bounds(&p, 8).unwrap();
        let exact = o.log_abs_iterate(8).unwrap();
        assert!(lo <= exact && exact <= hi);
        assert!((hi - lo) / exact < 1e-10);
    }
}
