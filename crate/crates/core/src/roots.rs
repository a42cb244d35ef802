//! Scalar root bracketing and one-dimensional minimization on real intervals.

/// Bisection on a bracket with `f(lo)·f(hi) ≤ 0`, down to width `tol`
/// or until the midpoint stops moving.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of `f` on `[lo, hi]` detected on a uniform grid of
/// `steps` cells, each refined by bisection. Sorted, without duplicates.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, steps: usize, tol: f64) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=steps {
        let x1 = if i == steps { hi } else { lo + h * i as f64 };
        let f1 = f(x1);
        let root = if f0 == 0.0 {
            Some(x0)
        } else if f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
            Some(bisect(&f, x0, x1, tol))
        } else {
            None
        };
        if let Some(r) = root {
            if roots.last().is_none_or(|&last| r - last > tol) {
                roots.push(r);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 && roots.last().is_none_or(|&last| x0 - last > tol) {
        roots.push(x0);
    }
    roots
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
