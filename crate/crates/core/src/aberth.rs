//! Simultaneous polynomial root refinement (Ehrlich-Aberth), driven by a
//! Newton-ratio oracle so the polynomial never has to be expanded.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// All `degree` roots of a polynomial. `oracle(z)` returns the Newton ratio
/// `P(z)/P'(z)` and `|P(z)|` (infinite if unavailable). Roots are assumed
/// to lie in `|z| <= radius`.
///
/// A root stops moving once its step is at rounding level or `|P|` is
/// below `1e-13`, which is what happens inside clusters of multiple roots.
pub fn roots<F>(degree: usize, radius: f64, oracle: F, max_iter: usize) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> (Complex64, f64) + Sync,
{
    let n = degree;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(radius * 1.05, t)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let snapshot = z.clone();
        let steps: Vec<Option<(Complex64, bool)>> = (0..n)
            .into_par_iter()
            .map(|k| {
                if done[k] {
                    return None;
                }
                let zk = snapshot[k];
                let (r, res) = oracle(zk);
                if res <= 1e-13 {
                    return Some((Complex64::new(0.0, 0.0), true));
                }
                if !r.is_finite() {
                    return None;
                }
                if r.norm() <= 1e-15 * (1.0 + zk.norm()) {
                    return Some((r, true));
                }
                let s: Complex64 = snapshot
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &zj)| {
                        let diff = zk - zj;
                        if diff == Complex64::new(0.0, 0.0) {
                            Complex64::new(0.0, 0.0)
                        } else {
                            diff.inv()
                        }
                    })
                    .sum();
                let w = r / (Complex64::new(1.0, 0.0) - r * s);
                Some((if w.is_finite() { w } else { r }, false))
            })
            .collect();
        let mut moving = false;
        for (k, st) in steps.into_iter().enumerate() {
            if let Some((w, settled)) = st {
                z[k] -= w;
                if settled || w.norm() <= 1e-14 * (1.0 + z[k].norm()) {
                    done[k] = true;
                } else {
                    moving = true;
                }
            }
        }
        if !moving && done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    let stuck = done.iter().filter(|d| !**d).count();
    if stuck * 50 > n.max(50) {
        return Err(Error::NoConvergence(format!(
            "{stuck} of {n} roots still moving after {max_iter} sweeps"
        )));
    }
    Ok(z)
}
