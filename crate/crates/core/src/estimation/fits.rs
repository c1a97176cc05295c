use std::collections::BTreeMap;

use super::lm::{damped_least_squares, Bound, CurveData, LmOptions, ParamSpec};
use super::{DecayHistogram, FitResult};
use crate::error::{Error, Result};
use crate::model::average_lifetime;
use crate::photon_stats::Correlogram;
use crate::rate_matrix::{g2_approx_bin_average, G2Params};
use crate::special::digamma;

/// Default window for the fast excitonic decay (ns).
pub const DEFAULT_FAST_WINDOW: (f64, f64) = (0.0, 10.0);
/// Default start of the long-tail window (ns); it ends at the repetition period.
pub const DEFAULT_SLOW_WINDOW_START: f64 = 20.0;

const BETA_FLOOR: f64 = 1e-3;

struct Windowed {
    t: Vec<f64>,
    c: Vec<f64>,
    w: Vec<f64>,
}

fn select(hist: &DecayHistogram, window: (f64, f64)) -> Result<Windowed> {
    let (lo, hi) = window;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("invalid fit window [{lo}, {hi}]")));
    }
    let mut out = Windowed { t: Vec::new(), c: Vec::new(), w: Vec::new() };
    for (&t, &c) in hist.bin_centers.iter().zip(&hist.counts) {
        if t >= lo && t <= hi {
            out.t.push(t);
            out.c.push(c);
            out.w.push(1.0 / c.max(1.0));
        }
    }
    Ok(out)
}

fn tail_mean(c: &[f64]) -> f64 {
    let k = (c.len() / 10).max(1);
    c[c.len() - k..].iter().sum::<f64>() / k as f64
}

/// Centered running mean with half-width `k`, truncated at the ends.
fn moving_average(c: &[f64], k: usize) -> Vec<f64> {
    (0..c.len())
        .map(|i| {
            let s = &c[i.saturating_sub(k)..(i + k + 1).min(c.len())];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect()
}

fn nonzero(c: &[f64]) -> usize {
    c.iter().filter(|c| **c > 0.0).count()
}

/// Fits `C exp(-r (t - t_ref)) + B` on the window, with `t_ref` the first
/// bin center inside it.
pub fn fit_exponential(hist: &DecayHistogram, window: (f64, f64)) -> Result<FitResult> {
    let d = select(hist, window)?;
    if nonzero(&d.c) < 10 {
        return Err(Error::InsufficientData(format!(
            "exponential fit needs >= 10 nonzero bins in [{}, {}], found {}",
            window.0,
            window.1,
            nonzero(&d.c)
        )));
    }
    let t_ref = d.t[0];
    let background = tail_mean(&d.c);

    // log-linear regression on the background-subtracted counts
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &c) in d.t.iter().zip(&d.c) {
        let s = c - background;
        if s > 0.0 {
            let (x, y) = (t - t_ref, s.ln());
            sw += s;
            sx += s * x;
            sy += s * y;
            sxx += s * x * x;
            sxy += s * x * y;
        }
    }
    let denom = sw * sxx - sx * sx;
    let slope = if denom > 0.0 { (sw * sxy - sx * sy) / denom } else { 0.0 };
    if !(slope < 0.0) {
        return Err(Error::NonIdentifiable { directions: vec!["amplitude+rate".into()] });
    }
    let rate0 = -slope;
    let amp0 = ((sy - slope * sx) / sw).exp().max(f64::MIN_POSITIVE);

    let specs = [
        ParamSpec::new("amplitude", amp0, Bound::Positive),
        ParamSpec::new("rate", rate0, Bound::Positive),
        ParamSpec::new("background", background, Bound::Free),
    ];
    let mut fit = damped_least_squares(
        |t, p| p[0] * (-p[1] * (t - t_ref)).exp() + p[2],
        CurveData { x: &d.t, y: &d.c, w: &d.w },
        &specs,
        LmOptions::default(),
    )?;
    let rate = fit.param("rate");
    let s_rate = fit.sigma("rate");
    fit.derived.insert("lifetime_ns".into(), 1.0 / rate);
    fit.uncertainties.insert("lifetime_ns".into(), s_rate / (rate * rate));
    fit.derived.insert("t_ref_ns".into(), t_ref);
    fit.window = Some(window);
    Ok(fit)
}

/// Fits `A t^(β-1) exp(-(r t)^β) + B` with `β ∈ (0, 1]`, deriving the mean
/// lifetime `(1/r) Γ(1/β + 1)` and its first-order uncertainty.
pub fn fit_stretched(hist: &DecayHistogram, window: (f64, f64)) -> Result<FitResult> {
    if !(window.0 > 0.0) {
        return Err(Error::domain(format!("stretched fit window must exclude t <= 0, starts at {}", window.0)));
    }
    let d = select(hist, window)?;
    if nonzero(&d.c) < 20 {
        return Err(Error::InsufficientData(format!(
            "stretched fit needs >= 20 usable bins in [{}, {}], found {}",
            window.0,
            window.1,
            nonzero(&d.c)
        )));
    }
    let background = tail_mean(&d.c);
    let beta0 = 0.8;
    let smooth = moving_average(&d.c, (d.c.len() / 50).max(1));
    let early = smooth[0] - background;
    if !(early > 0.0) {
        return Err(Error::NonIdentifiable { directions: vec!["amplitude+rate+beta".into()] });
    }
    let t_e =
        d.t.iter()
            .zip(&smooth)
            .find(|(_, &c)| c - background <= early / std::f64::consts::E)
            .map(|(&t, _)| t)
            .unwrap_or(*d.t.last().unwrap());
    let elapsed = (t_e - d.t[0]).max(hist.bin_width);
    let rate0 = 1.0 / elapsed;
    let t0 = d.t[0];
    let amp0 = early / (t0.powf(beta0 - 1.0) * (-(rate0 * t0).powf(beta0)).exp());

    let specs = [
        ParamSpec::new("amplitude", amp0, Bound::Positive),
        ParamSpec::new("rate", rate0, Bound::Positive),
        ParamSpec::new("beta", beta0, Bound::Interval { lo: BETA_FLOOR, hi: 1.0 }),
        ParamSpec::new("background", background, Bound::Free),
    ];
    let mut fit = damped_least_squares(
        |t, p| p[0] * t.powf(p[2] - 1.0) * (-(p[1] * t).powf(p[2])).exp() + p[3],
        CurveData { x: &d.t, y: &d.c, w: &d.w },
        &specs,
        LmOptions::default(),
    )?;
    let (r, beta) = (fit.param("rate"), fit.param("beta"));
    let tau = average_lifetime(r, beta)?;

    // first-order propagation through ∂τ/∂r = -τ/r, ∂τ/∂β = -τ ψ(1/β + 1) / β²
    let g_r = -tau / r;
    let g_b = -tau * digamma(1.0 / beta + 1.0)? / (beta * beta);
    let v_rr = fit.covariance_of("rate", "rate").unwrap_or(0.0);
    let v_bb = fit.covariance_of("beta", "beta").unwrap_or(0.0);
    let v_rb = fit.covariance_of("rate", "beta").unwrap_or(0.0);
    let var_tau = g_r * g_r * v_rr + g_b * g_b * v_bb + 2.0 * g_r * g_b * v_rb;

    fit.derived.insert("inv_r_ns".into(), 1.0 / r);
    fit.uncertainties.insert("inv_r_ns".into(), fit.sigma("rate") / (r * r));
    fit.derived.insert("tau_mean_ns".into(), tau);
    fit.uncertainties.insert("tau_mean_ns".into(), var_tau.max(0.0).sqrt());
    fit.window = Some(window);
    Ok(fit)
}

/// Which extensions beyond the pure correlation model are fitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct G2FitOptions {
    /// Fit a multiplicative scale `s` (otherwise fixed at 1).
    pub fit_scale: bool,
    /// Fit an additive background `b` (otherwise fixed at 0).
    pub fit_background: bool,
}

pub fn fit_g2(corr: &Correlogram) -> Result<FitResult> {
    fit_g2_with(corr, G2FitOptions::default())
}

/// Fits `s [1 - (1+a) e^(-λ1|t|) + a e^(-λ2|t|)] + b`, averaged over each lag bin.
///
/// When no bunching component can be resolved the fit falls back to pure
/// antibunching (`a = 0`) and says so in the warnings.
pub fn fit_g2_with(corr: &Correlogram, options: G2FitOptions) -> Result<FitResult> {
    let n = corr.len();
    if n < 6 {
        return Err(Error::InsufficientData(format!("g2 fit needs >= 6 lag bins, got {n}")));
    }
    let w: Vec<f64> =
        corr.normalization.iter().zip(&corr.raw_coincidences).map(|(norm, c)| norm * norm / c.max(1.0)).collect();
    let data = CurveData { x: &corr.lag_centers, y: &corr.g2_values, w: &w };
    let half = corr.bin_width / 2.0;
    let init = G2Init::from_correlogram(corr);

    let scale_spec =
        if options.fit_scale { ParamSpec::new("scale", 1.0, Bound::Positive) } else { ParamSpec::fixed("scale", 1.0) };
    let bg_spec = if options.fit_background {
        ParamSpec::new("background", init.floor.max(0.0), Bound::Free)
    } else {
        ParamSpec::fixed("background", 0.0)
    };
    let curve = move |t: f64, l1: f64, l2: f64, a: f64, s: f64, b: f64| {
        s * g2_approx_bin_average(t - half, t + half, &G2Params { lambda1: l1, lambda2: l2, a }) + b
    };

    let full = if init.a > 0.0 {
        let specs = [
            ParamSpec::new("lambda1", init.lambda1, Bound::Positive),
            ParamSpec::new("lambda2", init.lambda2, Bound::Positive),
            ParamSpec::new("a", init.a, Bound::Positive),
            scale_spec.clone(),
            bg_spec.clone(),
        ];
        damped_least_squares(|t, p| curve(t, p[0], p[1], p[2], p[3], p[4]), data, &specs, LmOptions::default())
            .and_then(|fit| {
                if fit.param("lambda1") > fit.param("lambda2") {
                    return Ok(fit);
                }
                // ordered parameterization λ1 = λ2 + gap
                let lo = fit.param("lambda1").min(fit.param("lambda2"));
                let hi = fit.param("lambda1").max(fit.param("lambda2"));
                let specs = [
                    ParamSpec::new("lambda2", lo, Bound::Positive),
                    ParamSpec::new("gap", (hi - lo).max(lo), Bound::Positive),
                    ParamSpec::new("a", fit.param("a"), Bound::Positive),
                    scale_spec.clone(),
                    bg_spec.clone(),
                ];
                let mut fit = damped_least_squares(
                    |t, p| curve(t, p[0] + p[1], p[0], p[2], p[3], p[4]),
                    data,
                    &specs,
                    LmOptions::default(),
                )?;
                reorder(&mut fit)?;
                Ok(fit)
            })
            .ok()
            .filter(|fit| fit.param("a") > 1e-9)
    } else {
        None
    };

    let mut fit = match full {
        Some(fit) => fit,
        None => {
            let specs = [ParamSpec::new("lambda1", init.lambda1, Bound::Positive), scale_spec.clone(), bg_spec.clone()];
            let mut fit = damped_least_squares(
                |t, p| curve(t, p[0], p[0] / 2.0, 0.0, p[1], p[2]),
                data,
                &specs,
                LmOptions::default(),
            )?;
            fit.parameters.insert("a".into(), 0.0);
            fit.uncertainties.insert("a".into(), 0.0);
            fit.warnings.push("no bunching component resolved; fitted antibunching only (a = 0)".into());
            fit
        }
    };

    let l1 = fit.param("lambda1");
    fit.derived.insert("inv_lambda1_ns".into(), 1.0 / l1);
    fit.uncertainties.insert("inv_lambda1_ns".into(), fit.sigma("lambda1") / (l1 * l1));
    if let Some(&l2) = fit.parameters.get("lambda2") {
        fit.derived.insert("inv_lambda2_ns".into(), 1.0 / l2);
        fit.uncertainties.insert("inv_lambda2_ns".into(), fit.sigma("lambda2") / (l2 * l2));
    }
    // the model vanishes at zero lag, leaving only the background
    let b = fit.param("background");
    fit.derived.insert("g2_zero".into(), b);
    fit.uncertainties.insert("g2_zero".into(), fit.sigma("background"));
    fit.window = Some((corr.lag_centers[0], corr.lag_centers[n - 1]));
    Ok(fit)
}

/// Converts a `(lambda2, gap)` result back to `(lambda1, lambda2)`.
fn reorder(fit: &mut FitResult) -> Result<()> {
    let (l2, gap) = (fit.param("lambda2"), fit.param("gap"));
    if !(gap > 0.0) {
        return Err(Error::LambdaOrdering { lambda1: l2 + gap, lambda2: l2 });
    }
    let var = fit.covariance_of("lambda2", "lambda2").unwrap_or(0.0)
        + fit.covariance_of("gap", "gap").unwrap_or(0.0)
        + 2.0 * fit.covariance_of("lambda2", "gap").unwrap_or(0.0);
    fit.parameters.remove("gap");
    fit.uncertainties.remove("gap");
    fit.parameters.insert("lambda1".into(), l2 + gap);
    fit.uncertainties.insert("lambda1".into(), var.max(0.0).sqrt());
    fit.warnings.push("refitted with ordered parameterization lambda1 = lambda2 + gap".into());
    Ok(())
}

/// Starting values read off the shape of the correlogram.
struct G2Init {
    lambda1: f64,
    lambda2: f64,
    a: f64,
    floor: f64,
}

impl G2Init {
    fn from_correlogram(corr: &Correlogram) -> Self {
        // fold onto |t|, averaging mirrored bins
        let mut folded: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for (&t, &g) in corr.lag_centers.iter().zip(&corr.g2_values) {
            let k = (t.abs() / corr.bin_width).round() as i64;
            let e = folded.entry(k).or_insert((0.0, 0.0));
            e.0 += g;
            e.1 += 1.0;
        }
        let curve: Vec<(f64, f64)> = folded.into_iter().map(|(k, (s, n))| (k as f64 * corr.bin_width, s / n)).collect();
        let floor = curve[0].1;
        let t_max = curve.last().unwrap().0;

        let dip_edge = floor + (1.0 - floor) * (1.0 - (-1.0f64).exp());
        let t_dip = curve.iter().find(|(_, g)| *g >= dip_edge).map(|(t, _)| *t).unwrap_or(t_max);
        let lambda1 = 1.0 / t_dip.max(corr.bin_width / 2.0);

        // the peak is searched beyond the dip so noise near zero lag is ignored
        let (t_peak, peak) = curve
            .iter()
            .filter(|(t, _)| *t >= t_dip)
            .fold((t_dip, f64::NEG_INFINITY), |acc, &(t, g)| if g > acc.1 { (t, g) } else { acc });
        let a = (peak - 1.0).max(0.0);
        let lambda2 = if a > 0.0 {
            let t_tail = curve
                .iter()
                .find(|(t, g)| *t > t_peak && *g - 1.0 <= a / std::f64::consts::E)
                .map(|(t, _)| *t)
                .unwrap_or(t_max);
            (1.0 / (t_tail - t_peak).max(corr.bin_width)).min(lambda1 / 4.0)
        } else {
            lambda1 / 100.0
        };
        Self { lambda1, lambda2, a, floor }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StretchedDecayParams;
    use crate::synthetic;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn noiseless_exponential_recovers_lifetime() {
        let hist = synthetic::exponential_histogram(5.0e4, 1.0 / 0.93, 0.0, 0.05, 400).unwrap();
        let fit = fit_exponential(&hist, DEFAULT_FAST_WINDOW).unwrap();
        assert!(rel(fit.param("lifetime_ns"), 0.93) <= 1e-6, "{}", fit.param("lifetime_ns"));
        assert!(fit.converged);
        assert!(fit.reduced_chi_square < 1e-12);
    }

    #[test]
    fn exponential_with_background() {
        let hist = synthetic::exponential_histogram(2.0e4, 1.0 / 3.0, 12.0, 0.25, 200).unwrap();
        let fit = fit_exponential(&hist, (0.0, 50.0)).unwrap();
        assert!(rel(fit.param("lifetime_ns"), 3.0) <= 1e-6);
        assert!((fit.param("background") - 12.0).abs() <= 1e-5);
    }

    #[test]
    fn flat_histogram_is_not_identifiable() {
        let hist = DecayHistogram::new((0..50).map(|i| i as f64 + 0.5).collect(), vec![100.0; 50], 1.0).unwrap();
        assert!(matches!(fit_exponential(&hist, (0.0, 50.0)), Err(Error::NonIdentifiable { .. })));
    }

    #[test]
    fn exponential_needs_populated_window() {
        let mut counts = vec![0.0; 50];
        counts[..5].copy_from_slice(&[100.0, 40.0, 15.0, 5.0, 2.0]);
        let hist = DecayHistogram::new((0..50).map(|i| i as f64 + 0.5).collect(), counts, 1.0).unwrap();
        assert!(matches!(fit_exponential(&hist, (0.0, 50.0)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn exponential_poisson_coverage() {
        // 100 seeds at 10^6 counts; the truth should sit within 3σ nearly always
        let truth = 0.93;
        let expected = synthetic::scale_to_total(
            &synthetic::exponential_histogram(1.0, 1.0 / truth, 0.0, 0.05, 400).unwrap(),
            1.0e6,
        )
        .unwrap();
        let mut inside = 0;
        let mut pulls = Vec::new();
        for seed in 0..100 {
            let noisy = synthetic::poisson_sample(&expected, seed).unwrap();
            let fit = fit_exponential(&noisy, DEFAULT_FAST_WINDOW).unwrap();
            let pull = (fit.param("lifetime_ns") - truth) / fit.sigma("lifetime_ns");
            pulls.push(pull);
            if pull.abs() <= 3.0 {
                inside += 1;
            }
        }
        assert!(inside >= 97, "only {inside}/100 within 3σ; pulls {pulls:?}");
    }

    #[test]
    fn noiseless_stretched_recovers_parameters() {
        let params = StretchedDecayParams::new(1.0e4, 1.0 / 194.4, 0.876).unwrap();
        let hist = synthetic::stretched_histogram(&params, 0.0, 1.0, 1000).unwrap();
        let fit = fit_stretched(&hist, (DEFAULT_SLOW_WINDOW_START, 1000.0)).unwrap();
        assert!(rel(fit.param("inv_r_ns"), 194.4) <= 1e-6, "{}", fit.param("inv_r_ns"));
        assert!(rel(fit.param("beta"), 0.876) <= 1e-6, "{}", fit.param("beta"));
        assert!((fit.param("tau_mean_ns") - 207.6).abs() / 207.6 <= 1e-3);
        assert_eq!(fit.param("tau_mean_ns"), average_lifetime(fit.param("rate"), fit.param("beta")).unwrap());
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn stretched_exponential_limit() {
        let params = StretchedDecayParams::new(1.0e4, 0.01, 1.0).unwrap();
        let hist = synthetic::stretched_histogram(&params, 0.0, 1.0, 800).unwrap();
        let fit = fit_stretched(&hist, (1.0, 800.0)).unwrap();
        assert!((0.99..=1.0).contains(&fit.param("beta")));
        assert!(rel(fit.param("tau_mean_ns"), 100.0) <= 1e-3);
    }

    #[test]
    fn stretched_window_must_be_positive() {
        let params = StretchedDecayParams::new(1.0e4, 0.01, 0.8).unwrap();
        let hist = synthetic::stretched_histogram(&params, 0.0, 1.0, 800).unwrap();
        assert!(fit_stretched(&hist, (0.0, 800.0)).is_err());
    }

    #[test]
    fn tau_uncertainty_matches_finite_differences() {
        let params = StretchedDecayParams::new(1.0, 1.0 / 194.4, 0.876).unwrap();
        let expected =
            synthetic::scale_to_total(&synthetic::stretched_histogram(&params, 2.0, 1.0, 1000).unwrap(), 1.0e6)
                .unwrap();
        let noisy = synthetic::poisson_sample(&expected, 7).unwrap();
        let fit = fit_stretched(&noisy, (20.0, 1000.0)).unwrap();
        let (r, b) = (fit.param("rate"), fit.param("beta"));
        let h = 1e-6;
        let dr =
            (average_lifetime(r * (1.0 + h), b).unwrap() - average_lifetime(r * (1.0 - h), b).unwrap()) / (2.0 * h * r);
        let db = (average_lifetime(r, b + h).unwrap() - average_lifetime(r, b - h).unwrap()) / (2.0 * h);
        let c = |x, y| fit.covariance_of(x, y).unwrap();
        let var = dr * dr * c("rate", "rate") + db * db * c("beta", "beta") + 2.0 * dr * db * c("rate", "beta");
        assert!(rel(fit.sigma("tau_mean_ns"), var.sqrt()) < 1e-4);
    }

    #[test]
    fn stretched_error_shrinks_with_counts() {
        let params = StretchedDecayParams::new(1.0, 1.0 / 194.4, 0.876).unwrap();
        let shape = synthetic::stretched_histogram(&params, 0.0, 1.0, 1000).unwrap();
        let medians: Vec<f64> = [1.0e4, 1.0e5, 1.0e6]
            .iter()
            .map(|&total| {
                let expected = synthetic::scale_to_total(&shape, total).unwrap();
                let mut errors: Vec<f64> = (0..50)
                    .map(|seed| {
                        let noisy = synthetic::poisson_sample(&expected, 1000 + seed).unwrap();
                        let fit = fit_stretched(&noisy, (20.0, 1000.0)).unwrap();
                        rel(fit.param("inv_r_ns"), 194.4)
                    })
                    .collect();
                errors.sort_by(f64::total_cmp);
                (errors[24] + errors[25]) / 2.0
            })
            .collect();
        assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
    }

    fn g2_params() -> G2Params {
        G2Params::new(1.0 / 0.8, 1.0 / 172.0, 0.6).unwrap()
    }

    #[test]
    fn noiseless_g2_recovers_rates() {
        let corr = synthetic::g2_correlogram(&g2_params(), 1.0, 0.0, 0.5, 1000.0, 5.0e3).unwrap();
        let fit = fit_g2(&corr).unwrap();
        assert!(rel(fit.param("inv_lambda1_ns"), 0.8) <= 1e-6, "{fit:?}");
        assert!(rel(fit.param("inv_lambda2_ns"), 172.0) <= 1e-6);
        assert!(rel(fit.param("a"), 0.6) <= 1e-6);
        assert_eq!(fit.param("g2_zero"), 0.0);
    }

    #[test]
    fn scale_and_background_are_recovered() {
        let corr = synthetic::g2_correlogram(&g2_params(), 0.8, 0.2, 0.5, 1000.0, 5.0e3).unwrap();
        let fit = fit_g2_with(&corr, G2FitOptions { fit_scale: true, fit_background: true }).unwrap();
        assert!(rel(fit.param("scale"), 0.8) <= 1e-6);
        assert!((fit.param("g2_zero") - 0.2).abs() <= 1e-6);
        assert!(rel(fit.param("inv_lambda1_ns"), 0.8) <= 1e-6);
    }

    #[test]
    fn antibunching_only_data() {
        let p = G2Params { lambda1: 1.25, lambda2: 0.01, a: 0.0 };
        let corr = synthetic::g2_correlogram(&p, 1.0, 0.0, 0.5, 100.0, 5.0e3).unwrap();
        let fit = fit_g2(&corr).unwrap();
        assert!(fit.param("a") < 1e-6);
        assert!(rel(fit.param("lambda1"), 1.25) <= 1e-6);
    }

    #[test]
    fn noisy_g2_within_uncertainty() {
        let corr = synthetic::g2_correlogram(&g2_params(), 1.0, 0.0, 0.5, 1000.0, 2.0e3).unwrap();
        let noisy = synthetic::poisson_correlogram(&corr, 3).unwrap();
        let fit = fit_g2(&noisy).unwrap();
        for (name, truth) in [("inv_lambda1_ns", 0.8), ("inv_lambda2_ns", 172.0), ("a", 0.6)] {
            let pull = (fit.param(name) - truth) / fit.sigma(name);
            assert!(pull.abs() < 4.0, "{name}: {} ± {}", fit.param(name), fit.sigma(name));
        }
    }
}
