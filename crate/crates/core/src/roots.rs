//! Bracketing bisection for monotone functions.

/// Absolute tolerance on the abscissa for all root searches.
pub const TOL_ROOT: f64 = 1e-12;

/// Finds `x` in `[lo, hi]` with `f(x) = target` for nondecreasing `f`.
///
/// The bracket is assumed valid (`f(lo) <= target <= f(hi)`); the returned
/// point is within `tol` of a crossing.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Same as [`bisect_increasing`] for nonincreasing `f`.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    bisect_increasing(|x| -f(x), -target, lo, hi, tol)
}
