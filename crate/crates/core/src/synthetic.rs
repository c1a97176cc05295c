//! Noiseless and Poisson-sampled reference data built from the analytic models.
//!
//! Decay histograms are sampled at bin centers; correlograms are averaged
//! over each lag bin, matching what the fitting routines assume.

use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::estimation::DecayHistogram;
use crate::model::{stretched_intensity, StretchedDecayParams};
use crate::photon_stats::Correlogram;
use crate::rate_matrix::{g2_approx_bin_average, G2Params};
use crate::stochastic::substream;

/// Fit values describing the long tail of the reference TRPL trace.
pub const REFERENCE_INV_R_NS: f64 = 194.4;
pub const REFERENCE_BETA: f64 = 0.876;
/// Fast excitonic lifetime of the reference trace (ns).
pub const REFERENCE_FAST_LIFETIME_NS: f64 = 0.93;
/// Correlation fit values used for the reference correlogram.
pub const REFERENCE_INV_LAMBDA1_NS: f64 = 0.8;
pub const REFERENCE_INV_LAMBDA2_NS: f64 = 172.0;

fn centers(bin_width: f64, n_bins: usize) -> Result<Vec<f64>> {
    if !(bin_width > 0.0) || n_bins == 0 {
        return Err(Error::domain("need bin_width > 0 and at least one bin"));
    }
    Ok((0..n_bins).map(|i| (i as f64 + 0.5) * bin_width).collect())
}

pub fn exponential_histogram(
    amplitude: f64,
    rate: f64,
    background: f64,
    bin_width: f64,
    n_bins: usize,
) -> Result<DecayHistogram> {
    let t = centers(bin_width, n_bins)?;
    let counts = t.iter().map(|t| amplitude * (-rate * t).exp() + background).collect();
    DecayHistogram::new(t, counts, bin_width)
}

pub fn stretched_histogram(
    params: &StretchedDecayParams,
    background: f64,
    bin_width: f64,
    n_bins: usize,
) -> Result<DecayHistogram> {
    let t = centers(bin_width, n_bins)?;
    let counts = t.iter().map(|&t| Ok(stretched_intensity(t, params)? + background)).collect::<Result<_>>()?;
    DecayHistogram::new(t, counts, bin_width)
}

/// Rescales a histogram so its counts sum to `total`.
pub fn scale_to_total(hist: &DecayHistogram, total: f64) -> Result<DecayHistogram> {
    let sum = hist.total();
    if !(sum > 0.0) {
        return Err(Error::domain("cannot rescale an empty histogram"));
    }
    let counts = hist.counts.iter().map(|c| c * total / sum).collect();
    DecayHistogram::new(hist.bin_centers.clone(), counts, hist.bin_width)
}

fn poisson(mean: f64, rng: &mut impl rand::Rng) -> Result<f64> {
    if mean == 0.0 {
        return Ok(0.0);
    }
    Ok(Poisson::new(mean).map_err(|e| Error::domain(format!("poisson mean {mean}: {e}")))?.sample(rng))
}

/// Draws independent Poisson counts around each expected bin value.
pub fn poisson_sample(expected: &DecayHistogram, seed: u64) -> Result<DecayHistogram> {
    let mut rng = substream(seed, 0);
    let counts = expected.counts.iter().map(|&m| poisson(m, &mut rng)).collect::<Result<_>>()?;
    DecayHistogram::new(expected.bin_centers.clone(), counts, expected.bin_width)
}

/// Correlogram `s g2(t) + b` on the lag grid `k · bin_width`, `|k| ≤ max_lag / bin_width`,
/// with `norm_per_bin` uncorrelated coincidences expected per bin.
pub fn g2_correlogram(
    params: &G2Params,
    scale: f64,
    background: f64,
    bin_width: f64,
    max_lag: f64,
    norm_per_bin: f64,
) -> Result<Correlogram> {
    if !(bin_width > 0.0) || !(max_lag >= bin_width) || !(norm_per_bin > 0.0) {
        return Err(Error::domain("need bin_width > 0, max_lag >= bin_width and norm_per_bin > 0"));
    }
    let half = (max_lag / bin_width).floor() as i64;
    let lags: Vec<f64> = (-half..=half).map(|k| k as f64 * bin_width).collect();
    let g2: Vec<f64> = lags
        .iter()
        .map(|&t| scale * g2_approx_bin_average(t - bin_width / 2.0, t + bin_width / 2.0, params) + background)
        .collect();
    if g2.iter().any(|g| *g < 0.0) {
        return Err(Error::domain("scale and background produce negative g2 values"));
    }
    let coincidences = g2.iter().map(|g| g * norm_per_bin).collect();
    Ok(Correlogram {
        lag_centers: lags,
        g2_values: g2,
        raw_coincidences: coincidences,
        normalization: vec![norm_per_bin; (2 * half + 1) as usize],
        bin_width,
    })
}

/// Resamples the coincidences of an expectation-valued correlogram.
pub fn poisson_correlogram(expected: &Correlogram, seed: u64) -> Result<Correlogram> {
    let mut rng = substream(seed, 0);
    let coincidences: Vec<f64> =
        expected.raw_coincidences.iter().map(|&m| poisson(m, &mut rng)).collect::<Result<_>>()?;
    let g2 = coincidences.iter().zip(&expected.normalization).map(|(c, n)| c / n).collect();
    Ok(Correlogram { g2_values: g2, raw_coincidences: coincidences, ..expected.clone() })
}

/// Reference TRPL trace: a fast exponential plus the stretched-like tail,
/// 1 ns bins over a 1000 ns repetition period, `total` expected counts.
///
/// The fast component carries `fast_fraction` of the counts. Returns the
/// expectation when `seed` is `None`, a Poisson draw otherwise.
pub fn reference_trpl(total: f64, fast_fraction: f64, seed: Option<u64>) -> Result<DecayHistogram> {
    let tail = StretchedDecayParams::new(1.0, 1.0 / REFERENCE_INV_R_NS, REFERENCE_BETA)?;
    let slow = stretched_histogram(&tail, 0.0, 1.0, 1000)?;
    let fast = exponential_histogram(1.0, 1.0 / REFERENCE_FAST_LIFETIME_NS, 0.0, 1.0, 1000)?;
    let (slow, fast) =
        (scale_to_total(&slow, total * (1.0 - fast_fraction))?, scale_to_total(&fast, total * fast_fraction)?);
    let counts = slow.counts.iter().zip(&fast.counts).map(|(a, b)| a + b).collect();
    let expected = DecayHistogram::new(slow.bin_centers, counts, 1.0)?;
    match seed {
        Some(seed) => poisson_sample(&expected, seed),
        None => Ok(expected),
    }
}
