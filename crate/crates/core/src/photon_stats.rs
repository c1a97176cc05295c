//! TCSPC histograms and HBT correlograms from photon streams.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::DecayHistogram;
use crate::stochastic::substream;
use crate::stream::{Channel, PhotonStream};

/// Default lag resolution for correlograms (ns).
pub const DEFAULT_G2_BIN: f64 = 0.5;
/// Default TCSPC bin width (ns).
pub const DEFAULT_TRPL_BIN: f64 = 1.0;

const CORRELATE_CHUNK: usize = 1 << 15;

/// Normalized second-order correlation on a symmetric lag grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    pub lag_centers: Vec<f64>,
    pub g2_values: Vec<f64>,
    /// Pair counts per bin; real-valued so expectation-valued synthetic data fits the same type.
    pub raw_coincidences: Vec<f64>,
    /// Expected coincidences per bin for uncorrelated streams.
    pub normalization: Vec<f64>,
    pub bin_width: f64,
}

impl Correlogram {
    pub fn len(&self) -> usize {
        self.lag_centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lag_centers.is_empty()
    }

    /// Builds a correlogram from tabulated values, recovering the
    /// per-bin normalization as `coincidences / g2` where possible.
    pub fn from_table(lags: Vec<f64>, g2: Vec<f64>, coincidences: Vec<f64>) -> Result<Self> {
        let n = lags.len();
        if g2.len() != n || coincidences.len() != n {
            return Err(Error::domain("lag, g2 and coincidence columns differ in length"));
        }
        if n < 2 {
            return Err(Error::InsufficientData("a correlogram needs at least two lag bins".into()));
        }
        let bin_width = lags[1] - lags[0];
        if !(bin_width > 0.0) {
            return Err(Error::domain("lag grid must be strictly increasing"));
        }
        for (i, w) in lags.windows(2).enumerate() {
            if ((w[1] - w[0]) - bin_width).abs() > 1e-6 * bin_width {
                return Err(Error::domain(format!("lag grid is not uniform at row {}", i + 2)));
            }
        }
        let span = lags[0] + lags[n - 1];
        if span.abs() > 1e-6 * bin_width {
            return Err(Error::domain("lag grid must be symmetric about zero"));
        }
        if let Some(v) = g2.iter().chain(&coincidences).find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("g2 and coincidence values must be finite and >= 0, got {v}")));
        }
        let direct: Vec<Option<f64>> =
            g2.iter().zip(&coincidences).map(|(&g, &c)| if g > 0.0 && c > 0.0 { Some(c / g) } else { None }).collect();
        let fallback = {
            let mut known: Vec<f64> = direct.iter().flatten().copied().collect();
            known.sort_by(f64::total_cmp);
            known.get(known.len() / 2).copied().unwrap_or(1.0)
        };
        let normalization = direct.iter().map(|d| d.unwrap_or(fallback)).collect();
        Ok(Self { lag_centers: lags, g2_values: g2, raw_coincidences: coincidences, normalization, bin_width })
    }
}

/// Start-stop histogram of photon arrival phase relative to the sync period.
pub fn tcspc_histogram(stream: &PhotonStream, sync_period: f64, bin_width: f64) -> Result<DecayHistogram> {
    if !(bin_width > 0.0) || !(sync_period > bin_width) || !sync_period.is_finite() {
        return Err(Error::domain(format!(
            "require sync_period > bin_width > 0, got sync_period = {sync_period}, bin_width = {bin_width}"
        )));
    }
    let n_bins = (sync_period / bin_width).ceil() as usize;
    let mut counts = vec![0.0; n_bins];
    for &t in stream.timestamps() {
        let phase = t.rem_euclid(sync_period);
        let idx = ((phase / bin_width) as usize).min(n_bins - 1);
        counts[idx] += 1.0;
    }
    let centers = (0..n_bins).map(|i| (i as f64 + 0.5) * bin_width).collect();
    DecayHistogram::new(centers, counts, bin_width)
}

/// Routes each photon to arm A with probability `split_prob`, else to B.
pub fn hbt_split(stream: &PhotonStream, split_prob: f64, seed: u64) -> Result<(PhotonStream, PhotonStream)> {
    if !(0.0..=1.0).contains(&split_prob) {
        return Err(Error::domain(format!("split_prob must lie in [0, 1], got {split_prob}")));
    }
    let mut rng = substream(seed, 0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &t in stream.timestamps() {
        if rng.random::<f64>() < split_prob {
            a.push(t);
        } else {
            b.push(t);
        }
    }
    Ok((
        PhotonStream::new(a, stream.duration())?.with_channel(Channel::A),
        PhotonStream::new(b, stream.duration())?.with_channel(Channel::B),
    ))
}

/// Full pair cross-correlation of two streams over `±max_lag`.
///
/// Bins are centered on `k · bin_width` for `|k| ≤ floor(max_lag / bin_width)`.
/// Each bin is normalized by `N_a N_b w (T - |τ|) / T²`, the expected
/// coincidence count of uncorrelated streams observed over a common window `T`.
pub fn hbt_correlate(a: &PhotonStream, b: &PhotonStream, max_lag: f64, bin_width: f64) -> Result<Correlogram> {
    if !(bin_width > 0.0) || !(max_lag >= bin_width) || !max_lag.is_finite() {
        return Err(Error::domain(format!(
            "require max_lag >= bin_width > 0, got max_lag = {max_lag}, bin_width = {bin_width}"
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Normalization("both streams must contain photons".into()));
    }
    let (ta, tb) = (a.duration(), b.duration());
    if (ta - tb).abs() > 1e-9 * ta.max(tb) {
        return Err(Error::Normalization(format!("streams cover different windows ({ta} ns vs {tb} ns)")));
    }
    let window = ta.max(tb);
    let half = (max_lag / bin_width).floor() as i64;
    let n_bins = (2 * half + 1) as usize;
    if !(window > half as f64 * bin_width) {
        return Err(Error::Normalization("observation window shorter than the lag range".into()));
    }
    let reach = (half as f64 + 0.5) * bin_width;
    let bt = b.timestamps();

    let counts = a
        .timestamps()
        .par_chunks(CORRELATE_CHUNK)
        .map(|chunk| {
            let mut bins = vec![0u64; n_bins];
            let mut lo = bt.partition_point(|&t| t < chunk[0] - reach);
            for &t0 in chunk {
                while lo < bt.len() && bt[lo] < t0 - reach {
                    lo += 1;
                }
                let mut j = lo;
                while j < bt.len() && bt[j] - t0 < reach {
                    let k = ((bt[j] - t0) / bin_width).round() as i64;
                    if k.abs() <= half {
                        bins[(k + half) as usize] += 1;
                    }
                    j += 1;
                }
            }
            bins
        })
        .reduce(
            || vec![0u64; n_bins],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
                x
            },
        );

    let (na, nb) = (a.len() as f64, b.len() as f64);
    let lag_centers: Vec<f64> = (-half..=half).map(|k| k as f64 * bin_width).collect();
    let normalization: Vec<f64> =
        lag_centers.iter().map(|tau| na * nb * bin_width * (window - tau.abs()) / (window * window)).collect();
    let raw: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let g2_values = raw.iter().zip(&normalization).map(|(c, n)| c / n).collect();
    Ok(Correlogram { lag_centers, g2_values, raw_coincidences: raw, normalization, bin_width })
}
