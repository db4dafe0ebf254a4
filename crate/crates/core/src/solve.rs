//! Bracketed scalar root finding.

/// Root of an increasing function on `[a, b]` with `fa < 0 < fb`, by
/// regula falsi with the Illinois modification.
///
/// The bracket always contains the root, so the method cannot diverge;
/// falling back to the midpoint whenever the secant point degenerates keeps
/// it at least as fast as bisection. Stops when `|f| <= ftol`, when the
/// bracket is narrower than `xtol`, or when it cannot shrink any further in
/// floating point. On failure returns the final bracket width.
pub(crate) fn illinois(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64, f64> {
    debug_assert!(fa < 0.0 && fb > 0.0);
    let mut side = 0i8;
    let (mut best, mut best_f) = if -fa < fb { (a, -fa) } else { (b, fb) };
    for _ in 0..max_iter {
        if b - a <= xtol {
            return Ok(best);
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
            if !(c > a && c < b) {
                // The bracket is down to adjacent floats.
                return Ok(best);
            }
        }
        let fc = f(c);
        if fc.abs() < best_f {
            best = c;
            best_f = fc.abs();
        }
        if fc == 0.0 || fc.abs() <= ftol {
            return Ok(c);
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    if b - a <= xtol {
        Ok(best)
    } else {
        Err(b - a)
    }
}

/// Largest `t` in `[lo, hi]` (to within `iters` halvings) with `inside(t)`,
/// assuming `inside(lo)` and monotonicity. Returns the inside end.
pub(crate) fn bisect_last_inside(
    mut inside: impl FnMut(f64) -> bool,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> (f64, f64) {
    if inside(hi) {
        return (hi, hi);
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root() {
        let f = |x: f64| x * x - 2.0;
        let r = illinois(f, 0.0, 2.0, -2.0, 2.0, 1e-15, 1e-14, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn handles_kinks_and_flat_sides() {
        // max(x, 0.5) - 0.75 has a kink away from the root.
        let f = |x: f64| x.max(0.5) - 0.75;
        let r = illinois(f, 0.0, 1.0, f(0.0), f(1.0), 1e-15, 1e-14, 100).unwrap();
        assert!((r - 0.75).abs() < 1e-13);
        // Steep near the left end, like sqrt-type level functions.
        let g = |x: f64| x.sqrt() + (x + 0.01).sqrt() - 0.5;
        let r = illinois(g, 0.0, 1.0, g(0.0), g(1.0), 1e-15, 1e-14, 100).unwrap();
        assert!(g(r).abs() < 1e-13);
    }

    #[test]
    fn last_inside() {
        let (lo, hi) = bisect_last_inside(|t| t <= 0.3, 0.0, 1.0, 60);
        assert!(lo <= 0.3 && hi > 0.3 && hi - lo < 1e-15);
        assert_eq!(bisect_last_inside(|t| t <= 2.0, 0.0, 1.0, 60), (1.0, 1.0));
    }
}
