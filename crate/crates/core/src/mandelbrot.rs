//! Quadratic family `z^2 + c` over the complex numbers: periodic cycles and
//! multipliers, the attracting regions `D(n, rho)`, the lower bound for
//! `|f^n(0)|` outside them, and the scalar inequalities around it.

use num_complex::Complex64;
use rug::Integer;
use serde_json::{json, Value};
use std::collections::BTreeMap;

use crate::aberth;
use crate::arith;
use crate::bounds::{BoundMode, InequalityReport, SLACK};
use crate::error::{Error, Result};

/// Largest period accepted by the root finder (degree `2^12`).
pub const MAX_PERIOD: u32 = 12;

/// A residual below this counts as "the critical orbit has settled".
const SETTLED: f64 = 1e-6;

/// Hard cap on critical-orbit steps inside [`in_d`].
const STEP_CAP: u64 = 2_000_000;

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn check_period(n: u32) -> Result<()> {
    if n == 0 || n > MAX_PERIOD {
        return Err(Error::Precondition(format!(
            "period must be in 1..={MAX_PERIOD}, got {n}"
        )));
    }
    Ok(())
}

/// `f^n_c(z)`.
pub fn iterate(c: Complex64, z: Complex64, n: u64) -> Complex64 {
    let mut z = z;
    for _ in 0..n {
        z = z * z + c;
    }
    z
}

/// `f^n_c(z)` and `(f^n_c)'(z)`.
pub fn iterate_with_derivative(c: Complex64, z: Complex64, n: u32) -> (Complex64, Complex64) {
    let mut z = z;
    let mut dz = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        dz = 2.0 * z * dz;
        z = z * z + c;
    }
    (z, dz)
}

/// `2^n prod_{k<n} f^k(z)`.
pub fn chain_rule_multiplier(c: Complex64, z: Complex64, n: u32) -> Complex64 {
    let mut z = z;
    let mut prod = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        prod *= 2.0 * z;
        z = z * z + c;
    }
    prod
}

/// Newton ratio and residual of `f^n(z) - z`, robust to escaping points.
fn periodic_oracle(c: Complex64, z0: Complex64, n: u32) -> (Complex64, f64) {
    let one = Complex64::new(1.0, 0.0);
    let mut z = z0;
    let mut d = one;
    for i in 0..n {
        if z.norm() > 1e8 {
            // track w = 1/z, r = z/D and 1/D instead of z and D
            let mut w = z.inv();
            let mut r = z / d;
            let mut inv_d = d.inv();
            for _ in i..n {
                let cw2 = c * w * w;
                r = r * (one + cw2) / 2.0;
                inv_d = inv_d * w / 2.0;
                w = w * w / (one + cw2);
            }
            return ((r - z0 * inv_d) / (one - inv_d), f64::INFINITY);
        }
        d = 2.0 * z * d;
        z = z * z + c;
    }
    ((z - z0) / (d - one), (z - z0).norm())
}

/// Radius containing every periodic point: `|z| > R` forces `|f(z)| > |z|`.
fn trap_radius(c: Complex64) -> f64 {
    0.5 + (0.25 + c.norm()).sqrt()
}

/// Default residual tolerance for period `n`.
pub fn default_tol(n: u32) -> f64 {
    1e-10 * 2f64.powi(n as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    /// The period `n` that was searched for.
    pub period: u32,
    /// Smallest `k | n` with `f^k(point) = point` within tolerance.
    pub minimal_period: u32,
    pub exact_period: bool,
    pub point: Complex64,
    /// All `minimal_period` points of the cycle, starting at `point`.
    pub points: Vec<Complex64>,
    /// `(f^n)'(point)`.
    pub multiplier: Complex64,
    /// How many roots of `f^n(z) - z` were merged into each point.
    pub multiplicity: usize,
}

impl Cycle {
    pub fn to_json(&self) -> Value {
        json!({
            "period": self.period,
            "minimal_period": self.minimal_period,
            "exact_period": self.exact_period,
            "point": cjson(self.point),
            "points": self.points.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
            "multiplier": cjson(self.multiplier),
            "abs_multiplier": self.multiplier.norm(),
            "multiplicity": self.multiplicity,
        })
    }
}

/// Smallest `k | n` with `|f^k(z) - z| <= tol (1 + |z|)`.
pub fn minimal_period(c: Complex64, z: Complex64, n: u32, tol: f64) -> u32 {
    let scale = 1.0 + z.norm();
    (1..=n)
        .filter(|k| n % k == 0)
        .find(|&k| (iterate(c, z, u64::from(k)) - z).norm() <= tol * scale)
        .unwrap_or(n)
}

/// Every cycle whose period divides `n`, from the `2^n` roots of
/// `f^n(z) - z`. Clustered roots (parabolic parameters) are merged and
/// counted in `multiplicity`.
pub fn periodic_cycles(c: Complex64, n: u32, tol: f64) -> Result<Vec<Cycle>> {
    check_period(n)?;
    if !c.is_finite() {
        return Err(Error::Precondition("c must be finite".into()));
    }
    let degree = 1usize << n;
    let raw = aberth::roots(
        degree,
        trap_radius(c),
        |z| periodic_oracle(c, z, n),
        400 + 40 * n as usize,
    )?;

    // Newton step as a local accuracy estimate; large near multiple roots
    let est: Vec<f64> = raw
        .iter()
        .map(|&z| {
            let r = periodic_oracle(c, z, n).0;
            if r.is_finite() {
                r.norm()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut parent: Vec<usize> = (0..degree).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..degree {
        for j in (i + 1)..degree {
            let reach = 6.0 * (est[i] + est[j]) + 1e-12 * (1.0 + raw[i].norm());
            if (raw[i] - raw[j]).norm() <= reach {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..degree {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    // (centroid, size, spread)
    let clusters: Vec<(Complex64, usize, f64)> = groups
        .values()
        .map(|idx| {
            let sum: Complex64 = idx.iter().map(|&i| raw[i]).sum();
            let mid = sum / idx.len() as f64;
            let spread = idx.iter().map(|&i| (raw[i] - mid).norm()).fold(0.0, f64::max);
            (mid, idx.len(), spread)
        })
        .collect();

    let mut used = vec![false; clusters.len()];
    let mut cycles = Vec::new();
    for start in 0..clusters.len() {
        if used[start] {
            continue;
        }
        let (alpha, mult, spread) = clusters[start];
        // a merged cluster only pins its point down to about its spread
        let k = (1..=n)
            .filter(|k| n % k == 0)
            .find(|&k| {
                let (fz, dz) = iterate_with_derivative(c, alpha, k);
                (fz - alpha).norm() <= tol * (1.0 + alpha.norm()) + (1.0 + dz.norm()) * spread
            })
            .unwrap_or(n);
        let mut points = vec![alpha];
        used[start] = true;
        let mut z = alpha;
        for _ in 1..k {
            z = z * z + c;
            points.push(z);
            let nearest = (0..clusters.len())
                .filter(|&j| !used[j])
                .min_by(|&i, &j| {
                    (clusters[i].0 - z)
                        .norm()
                        .total_cmp(&(clusters[j].0 - z).norm())
                });
            if let Some(j) = nearest {
                used[j] = true;
            }
        }
        cycles.push(Cycle {
            period: n,
            minimal_period: k,
            exact_period: k == n,
            point: alpha,
            points,
            multiplier: chain_rule_multiplier(c, alpha, n),
            multiplicity: mult,
        });
    }
    Ok(cycles)
}

/// `rho_n = min(1/4, 2^(-2^(n-2)))`.
pub fn rho_n(n: u32) -> f64 {
    let e = 2f64.powf(f64::from(n) - 2.0);
    0.25f64.min(2f64.powf(-e))
}

/// Critical point of the disk model of `f^n` on the immediate basin when
/// the multiplier has modulus `rho`.
pub fn blaschke_p(rho: f64) -> f64 {
    // (1 - sqrt(1 - rho^2)) / rho without the cancellation
    rho / (1.0 + (1.0 - rho * rho).sqrt())
}

#[derive(Clone, Debug)]
pub struct RegionVerdict {
    pub c: Complex64,
    pub n: u32,
    pub rho: f64,
    pub in_d: bool,
    /// The cycle the critical orbit settles on, if it settles at all.
    pub witness: Option<Cycle>,
    /// Short reason: `escapes`, `not_settled`, `other_period`,
    /// `multiplier_too_large` or `attracted`.
    pub reason: &'static str,
    /// Critical-orbit steps taken.
    pub steps: u64,
}

impl RegionVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "c": cjson(self.c),
            "n": self.n,
            "rho": self.rho,
            "in_D": self.in_d,
            "reason": self.reason,
            "steps": self.steps,
            "witness": self.witness.as_ref().map(Cycle::to_json),
        })
    }
}

/// Periods of the critical orbit needed before an attracting cycle with
/// multiplier modulus at most `rho` is within `1e-10` of it. `None` when
/// the budget exceeds the step cap.
fn settle_budget(rho: f64, n: u32) -> Option<u64> {
    let p = blaschke_p(rho);
    let q = (rho + p) / (1.0 + rho * p);
    let target = 1e-10 * (1.0 - p).powi(2) / (8.0 * p.max(1e-300));
    let j = if target >= 1.0 { 1.0 } else { (target.ln() / q.ln()).ceil() + 8.0 };
    let steps = (j as u64).saturating_mul(u64::from(n));
    (steps <= STEP_CAP).then_some(steps)
}

/// Is `c` in `D(n, rho)`: does 0 fall into the basin of an exact-period
/// `n` cycle whose multiplier has modulus at most `rho`?
///
/// The critical orbit is run for a budget after which any such cycle would
/// hold it within `1e-10`. Escape, failure to settle, settling on another
/// period or on a weaker multiplier all give `false`. Multipliers within
/// a relative `1e-9` of `rho` are inconclusive, except for real `c` at
/// period 2 where `4(c + 1)` decides exactly.
pub fn in_d(c: Complex64, n: u32, rho: f64) -> Result<RegionVerdict> {
    check_period(n)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Precondition(format!("rho must be in (0, 1), got {rho}")));
    }
    let budget = settle_budget(rho, n);
    let steps = budget.unwrap_or(STEP_CAP);
    let escape = 2f64.max(c.norm());
    let mut verdict = RegionVerdict {
        c,
        n,
        rho,
        in_d: false,
        witness: None,
        reason: "not_settled",
        steps: 0,
    };
    let mut z = Complex64::new(0.0, 0.0);
    for s in 0..steps {
        if z.norm() > escape {
            verdict.reason = "escapes";
            verdict.steps = s;
            return Ok(verdict);
        }
        z = z * z + c;
    }
    verdict.steps = steps;
    let residual = (iterate(c, z, u64::from(n)) - z).norm();
    if !(residual <= SETTLED) {
        if budget.is_none() {
            return Err(Error::Inconclusive(format!(
                "critical orbit of c = {c} neither settled nor escaped in {steps} steps"
            )));
        }
        return Ok(verdict);
    }
    // polish the periodic point
    let mut alpha = z;
    for _ in 0..60 {
        let (r, _) = periodic_oracle(c, alpha, n);
        if !r.is_finite() {
            break;
        }
        alpha -= r;
        if r.norm() <= 1e-16 * (1.0 + alpha.norm()) {
            break;
        }
    }
    let tol = default_tol(n);
    let k = minimal_period(c, alpha, n, tol);
    let mut points = vec![alpha];
    for _ in 1..k {
        let next = points[points.len() - 1];
        points.push(next * next + c);
    }
    let lambda = chain_rule_multiplier(c, alpha, n);
    let cycle = Cycle {
        period: n,
        minimal_period: k,
        exact_period: k == n,
        point: alpha,
        points,
        multiplier: lambda,
        multiplicity: 1,
    };
    verdict.witness = Some(cycle);
    if k != n {
        verdict.reason = "other_period";
        return Ok(verdict);
    }
    let mut m = lambda.norm();
    let margin = 1e-9 * rho + 1e-15 * 2f64.powi(n as i32);
    if n == 2 && c.im == 0.0 && (-2.0..=-0.5).contains(&c.re) {
        // the 2-cycle multiplier is 4(c + 1), exact in floating point here
        let exact = (4.0 * (c.re + 1.0)).abs();
        if (exact - m).abs() <= margin {
            m = exact;
            if m <= rho {
                verdict.in_d = true;
                verdict.reason = "attracted";
            } else {
                verdict.reason = "multiplier_too_large";
            }
            return Ok(verdict);
        }
    }
    if (m - rho).abs() <= margin {
        return Err(Error::Inconclusive(format!(
            "|multiplier| = {m} is within 1e-9 of rho = {rho}"
        )));
    }
    if m < rho {
        verdict.in_d = true;
        verdict.reason = "attracted";
    } else {
        verdict.reason = "multiplier_too_large";
    }
    Ok(verdict)
}

#[derive(Clone, Debug)]
pub struct SCheck {
    pub c: Complex64,
    pub max_period: u32,
    /// No `n <= max_period` has `c` in `D(n, rho_n)`.
    pub in_s: bool,
    pub hits: Vec<u32>,
    pub verdicts: Vec<RegionVerdict>,
}

impl SCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "c": cjson(self.c),
            "max_period": self.max_period,
            "in_S_up_to_period": self.in_s,
            "hits": self.hits,
            "periods": self.verdicts.iter().map(RegionVerdict::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Membership in the complement of every `D(n, rho_n)`, `n <= max_period`.
pub fn s_check(c: Complex64, max_period: u32) -> Result<SCheck> {
    check_period(max_period)?;
    let mut verdicts = Vec::new();
    for n in 1..=max_period {
        verdicts.push(in_d(c, n, rho_n(n))?);
    }
    let hits: Vec<u32> = verdicts.iter().filter(|v| v.in_d).map(|v| v.n).collect();
    Ok(SCheck {
        c,
        max_period,
        in_s: hits.is_empty(),
        hits,
        verdicts,
    })
}

#[derive(Clone, Debug)]
pub struct LowerBoundReport {
    pub c: Complex64,
    pub n: u32,
    pub rho: f64,
    pub abs_iterate: f64,
    /// `rho 2^(-(2n+2))`.
    pub bound: f64,
    pub holds: bool,
}

impl LowerBoundReport {
    pub fn to_json(&self) -> Value {
        json!({
            "c": cjson(self.c),
            "n": self.n,
            "rho": self.rho,
            "abs_iterate": self.abs_iterate,
            "bound": self.bound,
            "holds": self.holds,
        })
    }
}

/// `|f^n_c(0)| >= rho 2^(-(2n+2))`, for `c` outside `D(k, rho)` for every
/// `k | n`.
pub fn lower_bound_check(c: Complex64, n: u32, rho: f64) -> Result<LowerBoundReport> {
    check_period(n)?;
    if !(rho > 0.0 && rho < 0.25) {
        return Err(Error::Precondition(format!("rho must be in (0, 1/4), got {rho}")));
    }
    for k in (1..=n).filter(|k| n % k == 0) {
        let v = in_d(c, k, rho)?;
        if v.in_d {
            return Err(Error::Precondition(format!("c = {c} lies in D({k}, {rho})")));
        }
    }
    let abs_iterate = iterate(c, Complex64::new(0.0, 0.0), u64::from(n)).norm();
    let bound = rho * 2f64.powi(-(2 * n as i32 + 2));
    Ok(LowerBoundReport {
        c,
        n,
        rho,
        abs_iterate,
        bound,
        holds: abs_iterate >= bound,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport {
    pub rho: f64,
    pub p: f64,
    /// `1 - p(p^4 - p^3 - 2p^2 + 3p + 2) / (1 - p^2)^2`, must exceed 1/2.
    pub series_term: f64,
    /// `1 / (1 - p)^2`, must be below 2.
    pub koebe_term: f64,
    /// `1 - p`, must exceed 1/2.
    pub linear_term: f64,
    pub p_in_range: bool,
    pub holds: bool,
    /// Bound on `|alpha| / |f^n(0)|` from the first two terms.
    pub ratio_bound_basin: f64,
    /// The same bound after the last term.
    pub ratio_bound: f64,
}

impl DistortionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "rho": self.rho,
            "p": self.p,
            "series_term": self.series_term,
            "koebe_term": self.koebe_term,
            "linear_term": self.linear_term,
            "p_in_range": self.p_in_range,
            "holds": self.holds,
            "ratio_bound_basin": self.ratio_bound_basin,
            "ratio_bound": self.ratio_bound,
        })
    }
}

pub fn blaschke_distortion_check(rho: f64) -> Result<DistortionReport> {
    if !(rho > 0.0 && rho < 0.25) {
        return Err(Error::Precondition(format!("rho must be in (0, 1/4), got {rho}")));
    }
    let p = blaschke_p(rho);
    let poly = p.powi(4) - p.powi(3) - 2.0 * p * p + 3.0 * p + 2.0;
    let series_term = 1.0 - p * poly / (1.0 - p * p).powi(2);
    let koebe_term = 1.0 / (1.0 - p).powi(2);
    let linear_term = 1.0 - p;
    let p_in_range = p > 0.0 && p < 4.0 - 15f64.sqrt();
    let holds = p_in_range && series_term > 0.5 && koebe_term < 2.0 && linear_term > 0.5;
    let ratio_bound_basin = 2.0 * 2.0;
    let ratio_bound = ratio_bound_basin * 2.0;
    Ok(DistortionReport {
        rho,
        p,
        series_term,
        koebe_term,
        linear_term,
        p_in_range,
        holds,
        ratio_bound_basin,
        ratio_bound,
    })
}

fn binary_digit_sum(n: u32) -> u32 {
    n.count_ones()
}

/// `(2^n - s_2(n)) log b < (2 omega(n) + 4n + 4 + 2^(n-1)) log 2`.
/// When it fails, a multiplier lower bound rules out `n` for denominator `b`.
pub fn ca_inequality(b: u64, n: u32) -> Result<InequalityReport> {
    if b < 2 {
        return Err(Error::Precondition(format!("b must be at least 2, got {b}")));
    }
    if n < 3 {
        return Err(Error::Precondition(format!("n must be at least 3, got {n}")));
    }
    if n > 40 {
        return Err(Error::Precondition(format!("n = {n} is too large to evaluate")));
    }
    let s2 = binary_digit_sum(n);
    let omega = arith::distinct_prime_factors(u64::from(n)).len() as u64;
    let e_b = (1u64 << n) - u64::from(s2);
    let e_2 = 2 * omega + 4 * u64::from(n) + 4 + (1u64 << (n - 1));
    let lhs = e_b as f64 * (b as f64).ln();
    let rhs = e_2 as f64 * std::f64::consts::LN_2;
    let marginal = (lhs - rhs).abs() <= SLACK * (1.0 + rhs);
    let holds = if marginal || n <= 24 {
        // b^e_b < 2^e_2 decided exactly
        rug::ops::Pow::pow(Integer::from(b), e_b as u32) < (Integer::from(1) << e_2 as u32)
    } else {
        lhs < rhs
    };
    let mut terms = BTreeMap::new();
    terms.insert("b".to_string(), b.into());
    terms.insert("s_2".to_string(), s2.into());
    terms.insert("omega".to_string(), omega.into());
    terms.insert("exponent_b".to_string(), e_b.into());
    terms.insert("exponent_2".to_string(), e_2.into());
    Ok(InequalityReport {
        n,
        mode: BoundMode::Multiplier,
        lhs,
        rhs,
        holds,
        marginal,
        terms,
    })
}

/// Parameters `c` with `f^n_c(0) = 0` and exact period `n`, found by Newton
/// from each starting point. Duplicates within `1e-9` are dropped.
pub fn hyperbolic_centers(n: u32, starts: &[Complex64]) -> Result<Vec<Complex64>> {
    check_period(n)?;
    let mut found: Vec<Complex64> = Vec::new();
    for &s in starts {
        let mut c = s;
        let mut ok = false;
        for _ in 0..200 {
            let mut z = Complex64::new(0.0, 0.0);
            let mut dz = Complex64::new(0.0, 0.0);
            for _ in 0..n {
                dz = 2.0 * z * dz + 1.0;
                z = z * z + c;
            }
            let step = z / dz;
            if !step.is_finite() || c.norm() > 2.5 {
                break;
            }
            c -= step;
            if step.norm() <= 1e-15 * (1.0 + c.norm()) {
                ok = true;
                break;
            }
        }
        if !ok {
            continue;
        }
        let zero = Complex64::new(0.0, 0.0);
        let exact = (1..n)
            .filter(|k| n % k == 0)
            .all(|k| iterate(c, zero, u64::from(k)).norm() > 1e-6);
        if exact
            && iterate(c, zero, u64::from(n)).norm() <= 1e-10
            && !found.iter().any(|f| (*f - c).norm() <= 1e-9)
        {
            found.push(c);
        }
    }
    Ok(found)
}

/// Parameter `c` and periodic point where the exact-period-`n` cycle has
/// multiplier `lambda`, continued from the hyperbolic center `center`
/// (where the multiplier is 0) in `steps` stages.
pub fn continue_multiplier(
    center: Complex64,
    n: u32,
    lambda: Complex64,
    steps: u32,
) -> Result<(Complex64, Complex64)> {
    check_period(n)?;
    let mut c = center;
    let mut z = Complex64::new(0.0, 0.0);
    for s in 1..=steps.max(1) {
        let target = lambda * (f64::from(s) / f64::from(steps.max(1)));
        let mut converged = false;
        for _ in 0..100 {
            // z_k, dz_k/dz0, dz_k/dc, and derivatives of the multiplier
            let (mut x, mut bz, mut ac) = (z, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            let (mut cz, mut ec) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for _ in 0..n {
                let (x0, b0, a0, c0, e0) = (x, bz, ac, cz, ec);
                x = x0 * x0 + c;
                bz = 2.0 * x0 * b0;
                ac = 2.0 * x0 * a0 + 1.0;
                cz = 2.0 * (b0 * b0 + x0 * c0);
                ec = 2.0 * (a0 * b0 + x0 * e0);
            }
            let f1 = x - z;
            let f2 = bz - target;
            let (j11, j12, j21, j22) = (bz - 1.0, ac, cz, ec);
            let det = j11 * j22 - j12 * j21;
            let dz = (f1 * j22 - j12 * f2) / det;
            let dc = (j11 * f2 - j21 * f1) / det;
            if !dz.is_finite() || !dc.is_finite() {
                return Err(Error::NoConvergence(format!(
                    "singular Jacobian continuing from c = {center}"
                )));
            }
            z -= dz;
            c -= dc;
            if dz.norm() + dc.norm() <= 1e-15 * (1.0 + z.norm() + c.norm()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence(format!(
                "multiplier continuation from c = {center} stalled at stage {s}"
            )));
        }
    }
    if minimal_period(c, z, n, default_tol(n)) != n {
        return Err(Error::NoConvergence(format!(
            "continuation from c = {center} left the period-{n} component"
        )));
    }
    Ok((c, z))
}

#[derive(Clone, Debug)]
pub struct BasinRatio {
    pub c: Complex64,
    pub n: u32,
    /// The cycle point whose immediate basin holds 0.
    pub alpha: Complex64,
    pub multiplier: Complex64,
    pub abs_iterate: f64,
    /// `|alpha| / |f^n(0)|`.
    pub ratio: f64,
}

/// For `c` with an attracting exact-period-`n` cycle through `z0`, locate
/// the cycle point the critical orbit converges to along multiples of `n`
/// and compare it with `f^n(0)`.
pub fn basin_ratio(c: Complex64, n: u32, z0: Complex64) -> Result<BasinRatio> {
    check_period(n)?;
    let lambda = chain_rule_multiplier(c, z0, n);
    if lambda.norm() >= 1.0 {
        return Err(Error::Precondition(format!("cycle through {z0} is not attracting")));
    }
    let mut cycle = vec![z0];
    for _ in 1..n {
        let z = cycle[cycle.len() - 1];
        cycle.push(z * z + c);
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut z = zero;
    let mut settled = false;
    for _ in 0..100_000 {
        z = iterate(c, z, u64::from(n));
        if cycle.iter().any(|p| (*p - z).norm() <= 1e-12 * (1.0 + p.norm())) {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::Inconclusive(format!("critical orbit of c = {c} did not settle")));
    }
    let alpha = *cycle
        .iter()
        .min_by(|p, q| (**p - z).norm().total_cmp(&(**q - z).norm()))
        .expect("cycle is non-empty");
    let abs_iterate = iterate(c, zero, u64::from(n)).norm();
    Ok(BasinRatio {
        c,
        n,
        alpha,
        multiplier: lambda,
        abs_iterate,
        ratio: alpha.norm() / abs_iterate,
    })
}
