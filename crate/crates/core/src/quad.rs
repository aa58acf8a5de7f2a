//! Adaptive Simpson quadrature for the smooth one-dimensional integrands used
//! by grid construction (travel times, action integrals).

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adapt(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + adapt(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}

/// Integrate `f` from `a` to `b` (either order) to roughly `rel_tol` relative
/// accuracy. The integrand must be smooth on the interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = f(lo);
    let fb = f(hi);
    let fm = f(0.5 * (lo + hi));
    let whole = simpson(fa, fm, fb, hi - lo);
    let scale = whole.abs().max((hi - lo) * (fa.abs() + fb.abs() + 1e-30));
    let eps = rel_tol.max(1e-16) * scale;
    sign * adapt(&f, lo, hi, fa, fm, fb, whole, eps, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_against_erf_value() {
        // integral of exp(-x^2) over [0, 1] = sqrt(pi)/2 * erf(1)
        let v = integrate(|x| (-x * x).exp(), 0.0, 1.0, 1e-13);
        assert!((v - 0.746_824_132_812_427_4).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = integrate(|x| x.cos(), 0.0, 1.3, 1e-12);
        let rev = integrate(|x| x.cos(), 1.3, 0.0, 1e-12);
        assert!((fwd + rev).abs() < 1e-14);
    }

    #[test]
    fn oscillatory() {
        let v = integrate(|x| (10.0 * x).sin(), 0.0, 3.0, 1e-12);
        let exact = (1.0 - (30.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-11);
    }
}
