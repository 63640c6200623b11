/// Shrinks a sign-changing bracket `[lo, hi]` of a continuous function with
/// the Illinois variant of regula falsi, falling back to bisection whenever the
/// bracket stops halving. Returns the final bracket so callers can keep the
/// side they need. Without a sign change the endpoint with the smaller
/// residual is returned as a degenerate bracket.
pub(crate) fn bracket_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo * fhi > 0.0 {
        // No sign change: report the endpoint closer to a root.
        let x = if flo.abs() <= fhi.abs() { lo } else { hi };
        return (x, x);
    }
    if flo == 0.0 {
        return (lo, lo);
    }
    if fhi == 0.0 {
        return (hi, hi);
    }
    // +1 when the last update moved `lo`, -1 for `hi`.
    let mut side = 0i8;
    let mut width = hi - lo;
    for it in 0..max_iter {
        if hi - lo <= xtol {
            break;
        }
        let mut x = (lo * fhi - hi * flo) / (fhi - flo);
        // every three steps must have halved the bracket
        let stalled = it % 3 == 2 && hi - lo > 0.5 * width;
        if it % 3 == 2 {
            width = hi - lo;
        }
        if !(x > lo && x < hi) || stalled {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return (x, x);
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
            flo = fx;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            fhi = fx;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let (lo, hi) = bracket_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200);
        assert!((lo - 2f64.sqrt()).abs() < 1e-13 && (hi - 2f64.sqrt()).abs() < 1e-13);
        let (lo, hi) = bracket_root(|x| (-x).exp() - 1e-6, 0.0, 100.0, 1e-12, 400);
        assert!((0.5 * (lo + hi) - 1e6f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn handles_kinked_convex_functions() {
        let f = |x: f64| (1.0 / x - 3.0).max(0.0) + (1.0 / x - 0.5).max(0.0) - 2.0;
        let (lo, hi) = bracket_root(f, 1e-3, 10.0, 1e-15, 400);
        assert!(f(lo) >= 0.0 && f(hi) <= 0.0);
        assert!(hi - lo < 1e-14);
    }
}
