//! Deterministic scalar utilities: bisection, Simpson quadrature, least
//! squares and a stable 64-bit hash for config fingerprints.
//!
//! Everything here is plain f64 arithmetic with fixed iteration budgets so
//! results are bit-reproducible across runs and thread counts.

use crate::error::{Error, Result};

/// Fixed-budget bisection iteration count. The interval shrinks by 2^-200,
/// far below f64 resolution, so a root bracketed at call time is resolved to
/// the last representable bit.
pub const BISECT_ITERATIONS: usize = 200;

/// Bisection on `[lo, hi]`; requires `f(lo)` and `f(hi)` of opposite sign
/// (zero counts as either). Runs a fixed iteration budget and returns the
/// midpoint of the final interval.
pub fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!(
            "f({lo:e}) = {flo:e} and f({hi:e}) = {fhi:e} have the same sign"
        )));
    }
    let sign_lo = flo.signum();
    for _ in 0..BISECT_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval collapsed to adjacent floats
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Composite Simpson rule with `panels` subintervals (even, >= 2).
fn simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    debug_assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for k in 1..panels {
        let x = a + h * k as f64;
        acc += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Composite Simpson quadrature, panel count doubled until two successive
/// values differ by less than `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut panels = 8usize;
    let mut prev = simpson(&mut f, a, b, panels);
    loop {
        panels *= 2;
        let next = simpson(&mut f, a, b, panels);
        let delta = (next - prev).abs();
        if delta < tol {
            return Ok(next);
        }
        if panels >= 1 << 22 {
            return Err(Error::QuadratureDiverged {
                tolerance: tol,
                achieved: delta,
            });
        }
        prev = next;
    }
}

/// Least-squares line `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Log-log least squares: fits `ln y = slope * ln x + intercept`.
/// All inputs must be strictly positive.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
