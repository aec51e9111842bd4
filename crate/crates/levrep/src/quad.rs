//! Small quadrature toolbox: adaptive Simpson with absolute-error control and
//! a fixed 5-point Gauss-Legendre rule for bin averages.

use crate::scalar::Scalar;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`. The integrand must be finite on the interval.
pub fn adaptive_simpson<S: Scalar>(f: &impl Fn(S) -> S, a: S, b: S, tol: S) -> S {
    if a == b {
        return S::zero();
    }
    let two = S::of(2);
    let m = (a + b) / two;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson_panel(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 52)
}

fn simpson_panel<S: Scalar>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / S::of(6) * (fa + S::of(4) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<S: Scalar>(
    f: &impl Fn(S) -> S,
    a: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    tol: S,
    depth: u32,
) -> S {
    let two = S::of(2);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_panel(a, m, fa, flm, fm);
    let right = simpson_panel(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // 15 = (2^4 - 1), the Richardson factor of the composite rule.
    if depth == 0 || delta.abs() <= S::of(15) * tol {
        left + right + delta / S::of(15)
    } else {
        let half = tol / two;
        simpson_recurse(f, a, m, fa, flm, fm, left, half, depth - 1)
            + simpson_recurse(f, m, b, fm, frm, fb, right, half, depth - 1)
    }
}

/// Composite adaptive Simpson: splits `[a, b]` into `n_panels` equal panels
/// before adapting. Plain adaptation aliases on integrands that oscillate
/// many times across the range (the first convergence test never sees the
/// oscillation); panel width should be at most a few periods.
pub fn adaptive_simpson_panels<S: Scalar>(
    f: &impl Fn(S) -> S,
    a: S,
    b: S,
    n_panels: u32,
    tol: S,
) -> S {
    let n = n_panels.max(1);
    let width = (b - a) / S::of(n);
    let per_panel = tol / S::of(n);
    let mut acc = S::zero();
    for k in 0..n {
        let lo = a + S::of(k) * width;
        let hi = if k + 1 == n { b } else { lo + width };
        acc += adaptive_simpson(f, lo, hi, per_panel);
    }
    acc
}

/// 5-point Gauss-Legendre nodes/weights on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Fixed 5-point Gauss-Legendre integral of `f` over `[a, b]`.
/// Exact for polynomials up to degree 9; used for smooth bin averages.
pub fn gauss5<S: Scalar>(f: &impl Fn(S) -> S, a: S, b: S) -> S {
    let half = (b - a) / S::of(2);
    let mid = (a + b) / S::of(2);
    let mut acc = S::zero();
    for (x, w) in GL5 {
        acc += S::lit(w) * f(mid + half * S::lit(x));
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_matches_known_integrals() {
        let i = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-12);
        assert!((i - (1f64.exp() - 1.0)).abs() < 1e-11);
        let i = adaptive_simpson(&|x: f64| (x * x).sin(), 0.0, 3.0, 1e-11);
        // Fresnel-type reference from an independent fine Simpson grid.
        let mut reference = 0.0;
        let n = 300_000;
        let h = 3.0 / n as f64;
        for k in 0..n {
            let a = k as f64 * h;
            reference += h / 6.0
                * ((a * a).sin() + 4.0 * ((a + 0.5 * h) * (a + 0.5 * h)).sin()
                    + ((a + h) * (a + h)).sin());
        }
        assert!((i - reference).abs() < 1e-9);
    }

    #[test]
    fn gauss5_is_exact_for_low_degree() {
        let i = gauss5(&|x: f64| 3.0 * x * x, 0.0, 2.0);
        assert!((i - 8.0).abs() < 1e-13);
        let i = gauss5(&|x: f64| x.powi(9), 0.0, 1.0);
        assert!((i - 0.1).abs() < 1e-13);
    }

    #[test]
    fn works_in_f32() {
        let i = adaptive_simpson(&|x: f32| x * x, 0.0_f32, 1.0, 1e-5);
        assert!((i - 1.0 / 3.0).abs() < 1e-5);
    }
}
