//! Test-only numerical oracles, independent of the code paths they check.

/// Integral over (0, ∞) by exp-sinh (double exponential) quadrature.
///
/// Tolerates integrable algebraic singularities at 0 and requires
/// exponential-type decay at infinity.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let node = |k: f64| {
        let s = FRAC_PI_2 * k.sinh();
        let x = s.exp();
        let w = FRAC_PI_2 * k.cosh() * x;
        (x, w)
    };
    let eval = |k: f64| {
        let (x, w) = node(k);
        if x == 0.0 || !x.is_finite() || !w.is_finite() {
            return 0.0;
        }
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let kmax = 4.5;
    let mut h = 0.5;
    let mut sum = 0.0;
    let mut k = -kmax;
    while k <= kmax + 1e-12 {
        sum += eval(k);
        k += h;
    }
    let mut estimate = sum * h;
    for _ in 0..12 {
        // refine by adding midpoints
        let mut mid = 0.0;
        let mut k = -kmax + h / 2.0;
        while k < kmax {
            mid += eval(k);
            k += h;
        }
        sum += mid;
        h /= 2.0;
        let next = sum * h;
        if (next - estimate).abs() <= tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Classic fixed-step RK4 on a fine grid; used as a plain reference integrator.
pub fn rk4<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    steps: usize,
) -> [f64; N] {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut t = t0;
    for _ in 0..steps {
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &std::array::from_fn(|i| y[i] + h / 2.0 * k1[i]));
        let k3 = f(t + h / 2.0, &std::array::from_fn(|i| y[i] + h / 2.0 * k2[i]));
        let k4 = f(t + h, &std::array::from_fn(|i| y[i] + h * k3[i]));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
    }
    y
}
