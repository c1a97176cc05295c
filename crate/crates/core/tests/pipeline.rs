//! End-to-end runs: simulate, histogram or correlate, then fit.

use qdtrap::estimation::{fit_exponential, fit_g2_with, fit_stretched, G2FitOptions};
use qdtrap::photon_stats::{hbt_correlate, hbt_split, tcspc_histogram};
use qdtrap::rate_matrix::{eigen_decomposition, exact_eigenvalues, g2_params_from_rates, steady_state, RateSet};
use qdtrap::stochastic::{
    simulate_cw, simulate_pulsed, CwExperimentConfig, MetastableChannel, PulsedExperimentConfig, Trapping,
    DEFAULT_T_MIN,
};

fn power_law_config(r_inv: f64, beta: f64, n_pulses: u64, seed: u64) -> PulsedExperimentConfig {
    let alpha = 1.0 - beta;
    // invert r = (2 r32' / β)^(1/β)
    let r32_prime = beta * (1.0 / r_inv).powf(beta) / 2.0;
    PulsedExperimentConfig {
        rep_period: 1000.0,
        n_pulses,
        init_p2: 0.0,
        init_p3: 1.0,
        r21: 1.0 / 0.93,
        metastable: MetastableChannel {
            trapping: Trapping::PowerLaw { r32_prime, alpha },
            r31: 0.0,
            paired_loss: true,
            t_min: DEFAULT_T_MIN,
        },
        detection_efficiency: 1.0,
        seed,
    }
}

#[test]
fn power_law_trpl_tail_recovers_beta() {
    let cfg = power_law_config(194.4, 0.876, 2_200_000, 11);
    let run = simulate_pulsed(&cfg).unwrap();
    assert!(run.stream.len() >= 1_000_000, "{} photons", run.stream.len());
    let hist = tcspc_histogram(&run.stream, cfg.rep_period, 1.0).unwrap();
    let fit = fit_stretched(&hist, (20.0, 1000.0)).unwrap();
    assert!((fit.param("beta") - 0.876).abs() <= 0.02, "beta {}", fit.param("beta"));
    assert!((fit.param("inv_r_ns") / 194.4 - 1.0).abs() <= 0.05, "1/r {}", fit.param("inv_r_ns"));
}

#[test]
fn direct_excitation_gives_exponential_decay() {
    let cfg = PulsedExperimentConfig {
        init_p2: 1.0,
        init_p3: 0.0,
        rep_period: 100.0,
        ..power_law_config(194.4, 0.876, 200_000, 5)
    };
    let run = simulate_pulsed(&cfg).unwrap();
    let mut hist = tcspc_histogram(&run.stream, cfg.rep_period, 0.05).unwrap();
    hist.counts.truncate(200);
    hist.bin_centers.truncate(200);
    let fit = fit_exponential(&hist, (0.0, 10.0)).unwrap();
    let pull = (fit.param("lifetime_ns") - 0.93) / fit.sigma("lifetime_ns");
    assert!(pull.abs() < 4.0, "{} ± {}", fit.param("lifetime_ns"), fit.sigma("lifetime_ns"));
}

#[test]
fn zero_efficiency_gives_empty_stream() {
    let cfg = PulsedExperimentConfig { detection_efficiency: 0.0, ..power_law_config(194.4, 0.876, 10_000, 1) };
    let run = simulate_pulsed(&cfg).unwrap();
    assert!(run.stream.is_empty());
    assert!(run.counts.emitted > 0);
    assert_eq!(run.counts.detected, 0);
}

#[test]
fn cw_correlogram_fit_matches_exact_expansion() {
    // Neighbouring lag bins share photons, so per-bin Poisson errors understate
    // the scatter of the slow parameters; replicate runs give the honest spread.
    let rates = RateSet::new(0.175, 1.075, 0.0023, 0.0019, 0.0019).unwrap();
    let fits: Vec<[f64; 3]> = (0..10)
        .map(|seed| {
            let run = simulate_cw(&CwExperimentConfig::new(rates, 1.0e7, 1.0, 300 + seed)).unwrap();
            let (a, b) = hbt_split(&run.stream, 0.5, 400 + seed).unwrap();
            let corr = hbt_correlate(&a, &b, 1000.0, 0.5).unwrap();
            let fit = fit_g2_with(&corr, G2FitOptions::default()).unwrap();
            [fit.param("lambda1"), fit.param("lambda2"), fit.param("a")]
        })
        .collect();

    let (l1, l2, _) = exact_eigenvalues(&rates).unwrap();
    let p_inf = steady_state(&rates).unwrap();
    let exact_a = eigen_decomposition(&rates, [1.0, 0.0, 0.0]).unwrap().a[1][1] / p_inf[1];
    let approx = g2_params_from_rates(&rates).unwrap();
    let n = fits.len() as f64;
    for (k, (name, exact, approx)) in
        [("lambda1", l1, approx.lambda1), ("lambda2", l2, approx.lambda2), ("a", exact_a, approx.a)]
            .into_iter()
            .enumerate()
    {
        let mean = fits.iter().map(|f| f[k]).sum::<f64>() / n;
        let sd = (fits.iter().map(|f| (f[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let se = sd / n.sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "{name}: {mean} ± {se} vs exact {exact}");
        // the closed-form approximation is first order in the small rates
        assert!((approx - exact).abs() / exact < 0.02, "{name}: approx {approx} vs exact {exact}");
    }
}
