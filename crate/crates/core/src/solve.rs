//! Bracketed bisection shared by the break-even solvers.

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 400;

/// Finds a root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// Stops when the bracket is narrower than `tol` or when the midpoint can no
/// longer be represented strictly inside it.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{lo}, {hi}] ({f_lo:e}, {f_hi:e})"
        )));
    }
    let lo_sign = f_lo.signum();
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Grows the upper end of `[lo, hi]` geometrically until `f` changes sign.
///
/// `f(lo)` must be positive. The upper end never exceeds `cap`.
pub fn bracket_decreasing<F>(mut f: F, lo: f64, mut hi: f64, cap: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    if f_lo <= 0.0 {
        return Err(Error::NoRoot(format!(
            "objective is not positive at the lower end ({f_lo:e})"
        )));
    }
    let mut inner = lo;
    loop {
        hi = hi.min(cap);
        if f(hi)? <= 0.0 {
            return Ok((inner, hi));
        }
        if hi >= cap {
            return Err(Error::NoRoot(format!(
                "objective stays positive up to {cap}"
            )));
        }
        inner = hi;
        hi *= 2.0;
    }
}
