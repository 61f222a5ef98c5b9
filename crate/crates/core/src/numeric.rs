//! Small numerical kernels shared across modules.

/// Composite Simpson rule for `f` over `[a, b]` with `intervals` panels
/// (rounded up to the next even number).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Bisection for the smallest root of `f(x) = target` where `f` is
/// nondecreasing on `[lo, hi]`. Stops once the bracket is narrower than
/// `tol_x` and returns the bracket midpoint.
pub fn bisect_nondecreasing(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol_x: f64,
) -> f64 {
    while hi - lo > tol_x {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean and (population) standard deviation of a slice.
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        // antiderivative x^4/4 - x^2 + x evaluated on [0, 2] -> 2
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_converges_on_smooth_integrand() {
        let v = simpson(|x| x.exp(), 0.0, 1.0, 128);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect_nondecreasing(|x| x * x, 0.0, 2.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-10);
    }
}
