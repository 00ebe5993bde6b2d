//! Parameter sweeps: classify every reduced `a/b` in a box, compute the
//! Zsigmondy set on `[2, n_max]`, and compare.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cache::{Cache, Writer};
use crate::classifier::{self, Classification, Consistency};
use crate::divisibility::{self, ZsigOptions};
use crate::error::{Error, Result};
use crate::mandelbrot;
use crate::orbit::{Orbit, Parameter};

/// Numerators longer than this are not written to the cache.
pub const CACHE_TERM_BITS: u64 = 1 << 16;

const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    ClassifyOnly,
    FullVerify,
    /// Full verification plus the `S` check (periods up to 12) for `d = 2`
    /// parameters in the recurrent window.
    MandelS,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub d_range: (u32, u32),
    pub b_range: (u64, u64),
    /// Bound on `max(|a|, b)`.
    pub height_max: u64,
    /// Optional extra restriction on `a`.
    pub a_range: Option<(i64, i64)>,
    pub n_max: u32,
    pub mode: SweepMode,
    pub jobs: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d_range.0 < 2 || self.d_range.0 > self.d_range.1 {
            return Err(Error::Precondition(format!("bad degree range {:?}", self.d_range)));
        }
        if self.b_range.0 < 1 || self.b_range.0 > self.b_range.1 {
            return Err(Error::Precondition(format!("bad denominator range {:?}", self.b_range)));
        }
        if self.n_max < 2 {
            return Err(Error::IndexTooSmall(self.n_max));
        }
        if self.height_max > i64::MAX as u64 / 2 {
            return Err(Error::Precondition("height bound too large".into()));
        }
        Ok(())
    }
}

/// Reduced parameters in the box, ordered by `(d, b, a)`, and the number of
/// finite-orbit parameters left out.
pub fn parameters(spec: &SweepSpec) -> Result<(Vec<Parameter>, usize)> {
    spec.validate()?;
    let h = spec.height_max as i64;
    let (lo, hi) = match spec.a_range {
        Some((x, y)) => (x.max(-h), y.min(h)),
        None => (-h, h),
    };
    let mut out = Vec::new();
    let mut finite = 0;
    for d in spec.d_range.0..=spec.d_range.1 {
        for b in spec.b_range.0..=spec.b_range.1.min(spec.height_max) {
            for a in lo..=hi {
                if num_gcd(a.unsigned_abs(), b) != 1 {
                    continue;
                }
                let p = Parameter::new(a, b, d)?;
                if p.has_finite_orbit() {
                    finite += 1;
                } else {
                    out.push(p);
                }
            }
        }
    }
    Ok((out, finite))
}

fn num_gcd(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

#[derive(Clone, Debug)]
pub struct SCheckSummary {
    pub in_s: bool,
    pub hits: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub parameter: Parameter,
    pub classification: Classification,
    /// `None` in classify-only mode.
    pub computed: Option<Vec<u32>>,
    /// `None` in classify-only mode.
    pub consistency: Option<Consistency>,
    pub s_check: Option<SCheckSummary>,
    /// Present on a mismatch.
    pub evidence: Option<Value>,
    pub elapsed_us: u64,
}

impl SweepRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "a": crate::json::int(self.parameter.a()),
            "b": crate::json::int(self.parameter.b()),
            "d": self.parameter.d(),
            "classification": self.classification.to_json(),
            "computed": self.computed,
            "consistency": self.consistency,
            "s_check": self.s_check.as_ref().map(|s| json!({
                "in_S_up_to_period_12": s.in_s,
                "hits": s.hits,
            })),
            "evidence": self.evidence,
            "elapsed_us": self.elapsed_us,
        })
    }

    pub fn is_mismatch(&self) -> bool {
        self.consistency == Some(Consistency::Mismatch)
    }
}

/// Classify and, unless classify-only, compute and compare one parameter.
/// Cached orbit prefixes are used when present; newly computed small terms
/// go to `writer`.
pub fn evaluate(
    param: &Parameter,
    spec: &SweepSpec,
    cache: Option<&Cache>,
    writer: Option<&Writer>,
) -> Result<SweepRecord> {
    let start = Instant::now();
    let classification = classifier::classify(param);
    let mut rec = SweepRecord {
        parameter: param.clone(),
        classification,
        computed: None,
        consistency: None,
        s_check: None,
        evidence: None,
        elapsed_us: 0,
    };
    if spec.mode != SweepMode::ClassifyOnly {
        let cached = cache.and_then(|c| c.get(param));
        let base = cached.cloned().unwrap_or_else(|| Orbit::new(param.clone()));
        // a fresh orbit already holds a_1, which the cache has not seen
        let from = cached.map_or(1, |o| o.len() + 1);
        let opts = ZsigOptions::default().without_witness();
        let work = divisibility::materialize(&base, spec.n_max, &opts)?;
        if let Some(w) = writer {
            if work.len() >= from {
                w.append(&work, from, CACHE_TERM_BITS);
            }
        }
        let computed = divisibility::zsigmondy_set_with(&work, spec.n_max, &opts)?;
        match classifier::check_consistency(&rec.classification, &computed, spec.n_max) {
            Ok(c) => rec.consistency = Some(c),
            Err(Error::Mismatch { evidence, .. }) => {
                rec.consistency = Some(Consistency::Mismatch);
                rec.evidence = Some(*evidence);
            }
            Err(e) => return Err(e),
        }
        rec.computed = Some(computed);
    }
    if spec.mode == SweepMode::MandelS && param.d() == 2 && param.in_recurrent_window() {
        let s = mandelbrot::s_check(Complex64::new(param.c_f64(), 0.0), mandelbrot::MAX_PERIOD)?;
        rec.s_check = Some(SCheckSummary {
            in_s: s.in_s,
            hits: s.hits,
        });
    }
    rec.elapsed_us = start.elapsed().as_micros() as u64;
    Ok(rec)
}

#[derive(Clone, Debug, Default)]
pub struct SweepSummary {
    pub records: usize,
    pub consistent: usize,
    pub bound_only: usize,
    pub mismatches: usize,
    pub skipped_finite: usize,
    /// The run stopped at the first mismatch.
    pub aborted: bool,
    pub cache_orbits: usize,
    pub elapsed_ms: u64,
}

impl SweepSummary {
    pub fn to_json(&self) -> Value {
        json!({
            "summary": {
                "records": self.records,
                "consistent": self.consistent,
                "bound_only": self.bound_only,
                "mismatches": self.mismatches,
                "skipped_finite": self.skipped_finite,
                "aborted": self.aborted,
                "cache_orbits": self.cache_orbits,
                "elapsed_ms": self.elapsed_ms,
            }
        })
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Run the sweep, handing records to `sink` in `(d, b, a)` order whatever
/// the job count. Stops after the first mismatch. A worker panic is
/// reported as a mismatch-grade error.
pub fn run_sweep<F>(
    spec: &SweepSpec,
    cache: Option<&Cache>,
    writer: Option<&Writer>,
    mut sink: F,
) -> Result<SweepSummary>
where
    F: FnMut(&SweepRecord) -> Result<()>,
{
    let start = Instant::now();
    let (params, finite) = parameters(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs.max(1))
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    let mut summary = SweepSummary {
        skipped_finite: finite,
        cache_orbits: cache.map_or(0, Cache::len),
        ..Default::default()
    };
    'outer: for chunk in params.chunks(CHUNK) {
        let results: Vec<Result<SweepRecord>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|p| {
                    panic::catch_unwind(AssertUnwindSafe(|| evaluate(p, spec, cache, writer)))
                        .unwrap_or_else(|e| {
                            let msg = panic_message(e);
                            Err(Error::Mismatch {
                                message: format!("worker panicked on {p} (d = {}): {msg}", p.d()),
                                evidence: Box::new(json!({
                                    "a": crate::json::int(p.a()),
                                    "b": crate::json::int(p.b()),
                                    "d": p.d(),
                                    "panic": msg,
                                })),
                            })
                        })
                })
                .collect()
        });
        for r in results {
            let rec = r?;
            summary.records += 1;
            match rec.consistency {
                Some(Consistency::Consistent) => summary.consistent += 1,
                Some(Consistency::BoundOnly) => summary.bound_only += 1,
                Some(Consistency::Mismatch) => summary.mismatches += 1,
                None => {}
            }
            sink(&rec)?;
            if rec.is_mismatch() {
                summary.aborted = true;
                break 'outer;
            }
        }
    }
    summary.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: u32, b: u64, h: u64, n: u32, jobs: usize) -> SweepSpec {
        SweepSpec {
            d_range: (d, d),
            b_range: (2, b),
            height_max: h,
            a_range: None,
            n_max: n,
            mode: SweepMode::FullVerify,
            jobs,
        }
    }

    fn strip(v: &SweepRecord) -> Value {
        let mut j = v.to_json();
        j.as_object_mut().unwrap().remove("elapsed_us");
        j
    }

    #[test]
    fn enumeration_order() {
        let (ps, finite) = parameters(&spec(2, 3, 3, 4, 1)).unwrap();
        let got: Vec<(i64, i64)> = ps
            .iter()
            .map(|p| (p.a().to_i64().unwrap(), p.b().to_i64().unwrap()))
            .collect();
        assert_eq!(got, vec![(-3, 2), (-1, 2), (1, 2), (3, 2), (-2, 3), (-1, 3), (1, 3), (2, 3)]);
        assert_eq!(finite, 0);
        let mut s = spec(2, 2, 3, 4, 1);
        s.b_range = (1, 2);
        assert_eq!(parameters(&s).unwrap().1, 3); // c = 0, -1, -2
    }

    #[test]
    fn small_sweeps_agree() {
        let s = spec(3, 10, 20, 10, 1);
        let mut recs = Vec::new();
        let sum = run_sweep(&s, None, None, |r| {
            recs.push(r.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(sum.mismatches, 0);
        assert!(recs.iter().all(|r| r.computed.as_deref() == Some(&[][..])));

        let mut s8 = s.clone();
        s8.jobs = 8;
        let mut recs8 = Vec::new();
        run_sweep(&s8, None, None, |r| {
            recs8.push(r.clone());
            Ok(())
        })
        .unwrap();
        let a: Vec<Value> = recs.iter().map(strip).collect();
        let b: Vec<Value> = recs8.iter().map(strip).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_a_range() {
        let mut s = spec(2, 5, 10, 6, 2);
        s.a_range = Some((5, 4));
        let sum = run_sweep(&s, None, None, |_| Ok(())).unwrap();
        assert_eq!(sum.records, 0);
    }
}
