//! Adaptive Dormand–Prince 5(4) integrator for small dense systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error coefficients: 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 10_000_000;

/// Integrates `y' = f(t, y)` from `grid[0]` (where `y = y0`) and returns
/// the state at every grid point.
pub fn integrate<const N: usize, F>(f: F, y0: [f64; N], grid: &[f64], tol: Tolerances) -> Result<(Vec<[f64; N]>, Stats)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("grid must be finite and strictly increasing".into()));
    }
    let mut stats = Stats::default();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut t = grid[0];
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let span = grid[grid.len() - 1] - grid[0];
    let mut h = initial_step(&f, t, &y, &k1, tol, span);
    stats.evaluations += 1;

    let combine = |y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]| -> [f64; N] {
        std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
    };

    for &target in &grid[1..] {
        while t < target {
            if stats.accepted + stats.rejected > MAX_STEPS {
                return Err(Error::StepUnderflow { t, h });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            if step <= 16.0 * f64::EPSILON * t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t, h: step });
            }
            let k2 = f(t + C2 * step, &combine(&y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &combine(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * step, &combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * step, &combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(t + step, &combine(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = combine(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + step, &y_new);
            stats.evaluations += 6;

            let mut err_sq = 0.0;
            for i in 0..N {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
                err_sq += (e / scale).powi(2);
            }
            let err = (err_sq / N.max(1) as f64).sqrt();
            if !err.is_finite() {
                h = step * 0.1;
                stats.rejected += 1;
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k7;
                stats.accepted += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

fn initial_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], tol: Tolerances, span: f64) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let scale = |i: usize| tol.abs + tol.rel * y[i].abs();
    let norm =
        |v: &dyn Fn(usize) -> f64| ((0..N).map(|i| (v(i) / scale(i)).powi(2)).sum::<f64>() / N.max(1) as f64).sqrt();
    let d0 = norm(&|i| y[i]);
    let d1 = norm(&|i| k1[i]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span.max(f64::MIN_POSITIVE));
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + h0 * k1[i]);
    let k2 = f(t + h0, &y1);
    let d2 = norm(&|i| k2[i] - k1[i]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span.max(f64::MIN_POSITIVE))
}
