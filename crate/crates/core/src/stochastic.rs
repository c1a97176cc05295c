//! Stochastic photon-stream generation.
//!
//! Pulsed excitation initializes the emitter once per period; the level
//! then relaxes by competing exponential clocks, with the power-law
//! trapping channel sampled by thinning against a decreasing bound.
//! Continuous excitation runs a direct-method jump process on the full
//! rate matrix. Every unit of work (a pulse, a time segment) draws from
//! its own ChaCha substream keyed by `(seed, index)`, so results do not
//! depend on how work is spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate_matrix::{steady_state, RateSet};
use crate::stream::PhotonStream;

/// Default lower cutoff of the power-law trapping rate (ns).
pub const DEFAULT_T_MIN: f64 = 0.01;
/// Default CW segment length (ns).
pub const DEFAULT_SEGMENT: f64 = 1.0e6;

const PULSES_PER_CHUNK: u64 = 4096;

pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn exp_sample(rng: &mut impl Rng, rate: f64) -> f64 {
    // rate > 0 checked by callers
    Exp::new(rate).map(|d| d.sample(rng)).unwrap_or(f64::INFINITY)
}

/// Trapping from the reservoir |3⟩ into the QD level |2⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Trapping {
    Constant {
        r32: f64,
    },
    /// `r32(t) = r32' max(t, t_min)^-α`
    PowerLaw {
        r32_prime: f64,
        alpha: f64,
    },
}

/// How level |3⟩ leaves, and at what rates, after a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetastableChannel {
    pub trapping: Trapping,
    /// Constant |3⟩→|1⟩ rate, ignored when `paired_loss` is set.
    pub r31: f64,
    /// Tie the |3⟩→|1⟩ rate to the trapping rate (`r31(t) = r32(t)`).
    pub paired_loss: bool,
    pub t_min: f64,
}

/// Outcome of a sojourn in level |3⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetastableExit {
    Trapped,
    Lost,
}

impl MetastableChannel {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        match self.trapping {
            Trapping::Constant { r32 } => {
                if !(r32 >= 0.0) || !r32.is_finite() {
                    problems.push(format!("r32 must be >= 0, got {r32}"));
                }
            }
            Trapping::PowerLaw { r32_prime, alpha } => {
                if !(r32_prime > 0.0) || !r32_prime.is_finite() {
                    problems.push(format!("r32_prime must be > 0, got {r32_prime}"));
                }
                if !(0.0..1.0).contains(&alpha) {
                    problems.push(format!("alpha must lie in [0, 1), got {alpha}"));
                }
                if !(self.t_min > 0.0) || !self.t_min.is_finite() {
                    problems
                        .push(format!("t_min must be > 0 to bound the power-law rate near t = 0, got {}", self.t_min));
                } else if !(r32_prime * self.t_min.powf(-alpha)).is_finite() {
                    problems.push(format!("power-law bound overflows at t_min = {}", self.t_min));
                }
            }
        }
        if !self.paired_loss && (!(self.r31 >= 0.0) || !self.r31.is_finite()) {
            problems.push(format!("r31 must be >= 0, got {}", self.r31));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub fn trap_rate(&self, t: f64) -> f64 {
        match self.trapping {
            Trapping::Constant { r32 } => r32,
            Trapping::PowerLaw { r32_prime, alpha } => {
                if alpha == 0.0 {
                    r32_prime
                } else {
                    r32_prime * t.max(self.t_min).powf(-alpha)
                }
            }
        }
    }

    pub fn loss_rate(&self, t: f64) -> f64 {
        if self.paired_loss {
            self.trap_rate(t)
        } else {
            self.r31
        }
    }

    /// Samples the exit from |3⟩ entered at `start`; `None` if it does
    /// not happen before `horizon`.
    pub fn sample_exit(&self, rng: &mut impl Rng, start: f64, horizon: f64) -> Option<(f64, MetastableExit)> {
        let mut s = start;
        loop {
            // both rates are non-increasing in t, so their value at s bounds the future
            let trap_bound = self.trap_rate(s);
            let bound = trap_bound + self.loss_rate(s);
            if !(bound > 0.0) {
                return None;
            }
            let t = s + exp_sample(rng, bound);
            if t >= horizon {
                return None;
            }
            let trap = self.trap_rate(t);
            let u = rng.random::<f64>() * bound;
            if u < trap {
                return Some((t, MetastableExit::Trapped));
            }
            if u < trap + self.loss_rate(t) {
                return Some((t, MetastableExit::Lost));
            }
            s = t;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulsedExperimentConfig {
    /// Pulse repetition period (ns).
    pub rep_period: f64,
    pub n_pulses: u64,
    /// Probability that a pulse leaves the emitter in |2⟩.
    pub init_p2: f64,
    /// Probability that a pulse leaves the emitter in |3⟩.
    pub init_p3: f64,
    pub r21: f64,
    pub metastable: MetastableChannel,
    pub detection_efficiency: f64,
    pub seed: u64,
}

impl PulsedExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.rep_period > 0.0) || !self.rep_period.is_finite() {
            problems.push(format!("rep_period must be > 0, got {}", self.rep_period));
        }
        if !(self.init_p2 >= 0.0) || !(self.init_p3 >= 0.0) || !(self.init_p2 + self.init_p3 <= 1.0) {
            problems.push(format!(
                "init_p2 and init_p3 must be >= 0 with init_p2 + init_p3 <= 1, got ({}, {})",
                self.init_p2, self.init_p3
            ));
        }
        if !(self.r21 > 0.0) || !self.r21.is_finite() {
            problems.push(format!("r21 must be > 0, got {}", self.r21));
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            problems.push(format!("detection_efficiency must lie in [0, 1], got {}", self.detection_efficiency));
        }
        if let Err(Error::InvalidConfig(mut p)) = self.metastable.validate() {
            problems.append(&mut p);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

/// Event tallies of a pulsed run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulsedCounts {
    pub pulses: u64,
    pub excited_direct: u64,
    pub excited_reservoir: u64,
    pub trapped: u64,
    pub lost: u64,
    pub emitted: u64,
    pub detected: u64,
}

impl PulsedCounts {
    fn merge(mut self, o: &PulsedCounts) -> Self {
        self.pulses += o.pulses;
        self.excited_direct += o.excited_direct;
        self.excited_reservoir += o.excited_reservoir;
        self.trapped += o.trapped;
        self.lost += o.lost;
        self.emitted += o.emitted;
        self.detected += o.detected;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulsedRun {
    pub stream: PhotonStream,
    pub counts: PulsedCounts,
}

/// One pulse: returns the detected emission delay, if any.
fn simulate_pulse(cfg: &PulsedExperimentConfig, rng: &mut impl Rng, counts: &mut PulsedCounts) -> Option<f64> {
    counts.pulses += 1;
    let u = rng.random::<f64>();
    let mut t = 0.0;
    if u < cfg.init_p2 {
        counts.excited_direct += 1;
    } else if u < cfg.init_p2 + cfg.init_p3 {
        counts.excited_reservoir += 1;
        match cfg.metastable.sample_exit(rng, 0.0, cfg.rep_period) {
            Some((te, MetastableExit::Trapped)) => {
                counts.trapped += 1;
                t = te;
            }
            Some((_, MetastableExit::Lost)) => {
                counts.lost += 1;
                return None;
            }
            None => return None,
        }
    } else {
        return None;
    }
    t += exp_sample(rng, cfg.r21);
    // the next pulse re-initializes the emitter
    if t >= cfg.rep_period {
        return None;
    }
    counts.emitted += 1;
    if rng.random::<f64>() < cfg.detection_efficiency {
        counts.detected += 1;
        Some(t)
    } else {
        None
    }
}

/// Pulsed TRPL experiment; at most one photon per excitation period.
pub fn simulate_pulsed(cfg: &PulsedExperimentConfig) -> Result<PulsedRun> {
    cfg.validate()?;
    let duration = cfg.n_pulses as f64 * cfg.rep_period;
    let n_chunks = cfg.n_pulses.div_ceil(PULSES_PER_CHUNK);
    let chunks: Vec<(Vec<f64>, PulsedCounts)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::new();
            let mut counts = PulsedCounts::default();
            let end = ((c + 1) * PULSES_PER_CHUNK).min(cfg.n_pulses);
            for k in c * PULSES_PER_CHUNK..end {
                let mut rng = substream(cfg.seed, k);
                if let Some(dt) = simulate_pulse(cfg, &mut rng, &mut counts) {
                    out.push(k as f64 * cfg.rep_period + dt);
                }
            }
            (out, counts)
        })
        .collect();
    let mut counts = PulsedCounts::default();
    let mut timestamps = Vec::with_capacity(chunks.iter().map(|c| c.0.len()).sum());
    for (ts, c) in &chunks {
        counts = counts.merge(c);
        for &t in ts {
            push_increasing(&mut timestamps, t);
        }
    }
    clamp_tail(&mut timestamps, duration);
    Ok(PulsedRun { stream: PhotonStream::new(timestamps, duration)?, counts })
}

pub fn simulate_pulsed_trpl(cfg: &PulsedExperimentConfig) -> Result<PhotonStream> {
    Ok(simulate_pulsed(cfg)?.stream)
}

// Rounding of `k * period + dt` may collide at period boundaries.
fn push_increasing(v: &mut Vec<f64>, t: f64) {
    match v.last() {
        Some(&last) if t <= last => v.push(last.next_up()),
        _ => v.push(t),
    }
}

fn clamp_tail(v: &mut Vec<f64>, duration: f64) {
    while v.last().is_some_and(|&t| t > duration) {
        v.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwExperimentConfig {
    pub rates: RateSet,
    /// Observation time (ns).
    pub duration: f64,
    pub detection_efficiency: f64,
    pub seed: u64,
    /// Length of independently seeded segments (ns).
    pub segment: f64,
}

impl CwExperimentConfig {
    pub fn new(rates: RateSet, duration: f64, detection_efficiency: f64, seed: u64) -> Self {
        Self { rates, duration, detection_efficiency, seed, segment: DEFAULT_SEGMENT }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(e) = self.rates.validate() {
            problems.push(e.to_string());
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            problems.push(format!("duration must be > 0, got {}", self.duration));
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            problems.push(format!("detection_efficiency must lie in [0, 1], got {}", self.detection_efficiency));
        }
        if !(self.segment > 0.0) || !self.segment.is_finite() {
            problems.push(format!("segment must be > 0, got {}", self.segment));
        } else if self.duration / self.segment > 1e9 {
            problems.push("too many segments; increase the segment length".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwRun {
    pub stream: PhotonStream,
    /// Total time spent in |1⟩, |2⟩, |3⟩ (ns).
    pub occupancy_time: [f64; 3],
    /// Occupancy time per segment, for batch-means error estimates.
    pub segment_occupancy: Vec<[f64; 3]>,
    pub emitted: u64,
    pub jumps: u64,
}

impl CwRun {
    pub fn occupancy_fractions(&self) -> [f64; 3] {
        let total: f64 = self.occupancy_time.iter().sum();
        self.occupancy_time.map(|t| t / total)
    }
}

struct Segment {
    timestamps: Vec<f64>,
    occupancy: [f64; 3],
    emitted: u64,
    jumps: u64,
}

fn simulate_segment(cfg: &CwExperimentConfig, p_inf: &[f64; 3], index: u64, start: f64, end: f64) -> Segment {
    let mut rng = substream(cfg.seed, index);
    let RateSet { r12, r21, r13, r31, r32 } = cfg.rates;
    let u = rng.random::<f64>();
    // segments start in a steady-state draw
    let mut state = if u < p_inf[0] {
        0
    } else if u < p_inf[0] + p_inf[1] {
        1
    } else {
        2
    };
    let mut seg = Segment { timestamps: Vec::new(), occupancy: [0.0; 3], emitted: 0, jumps: 0 };
    let mut t = start;
    loop {
        let total = match state {
            0 => r12 + r13,
            1 => r21,
            _ => r31 + r32,
        };
        let next = if total > 0.0 { t + exp_sample(&mut rng, total) } else { f64::INFINITY };
        if next >= end {
            seg.occupancy[state] += end - t;
            break;
        }
        seg.occupancy[state] += next - t;
        t = next;
        seg.jumps += 1;
        let pick = rng.random::<f64>() * total;
        state = match state {
            0 => {
                if pick < r12 {
                    1
                } else {
                    2
                }
            }
            1 => {
                seg.emitted += 1;
                if rng.random::<f64>() < cfg.detection_efficiency {
                    seg.timestamps.push(t);
                }
                0
            }
            _ => {
                if pick < r31 {
                    0
                } else {
                    1
                }
            }
        };
    }
    seg
}

/// Continuous-wave emission under constant rates.
pub fn simulate_cw(cfg: &CwExperimentConfig) -> Result<CwRun> {
    cfg.validate()?;
    let p_inf = steady_state(&cfg.rates)?;
    let n_seg = (cfg.duration / cfg.segment).ceil().max(1.0) as u64;
    let segments: Vec<Segment> = (0..n_seg)
        .into_par_iter()
        .map(|k| {
            let start = k as f64 * cfg.segment;
            let end = ((k + 1) as f64 * cfg.segment).min(cfg.duration);
            simulate_segment(cfg, &p_inf, k, start, end)
        })
        .collect();
    let mut timestamps = Vec::with_capacity(segments.iter().map(|s| s.timestamps.len()).sum());
    let mut occupancy = [0.0; 3];
    let (mut emitted, mut jumps) = (0, 0);
    for s in &segments {
        for &t in &s.timestamps {
            push_increasing(&mut timestamps, t);
        }
        for i in 0..3 {
            occupancy[i] += s.occupancy[i];
        }
        emitted += s.emitted;
        jumps += s.jumps;
    }
    clamp_tail(&mut timestamps, cfg.duration);
    Ok(CwRun {
        stream: PhotonStream::new(timestamps, cfg.duration)?,
        occupancy_time: occupancy,
        segment_occupancy: segments.iter().map(|s| s.occupancy).collect(),
        emitted,
        jumps,
    })
}

pub fn simulate_cw_stream(cfg: &CwExperimentConfig) -> Result<PhotonStream> {
    Ok(simulate_cw(cfg)?.stream)
}

/// Homogeneous Poisson arrivals at `rate` (ns⁻¹) over `[0, duration)`.
pub fn poisson_stream(rate: f64, duration: f64, seed: u64) -> Result<PhotonStream> {
    if !(rate > 0.0) || !(duration > 0.0) {
        return Err(Error::domain("poisson_stream requires rate > 0 and duration > 0"));
    }
    let mut rng = substream(seed, u64::MAX);
    let mut ts = Vec::new();
    let mut t = exp_sample(&mut rng, rate);
    while t < duration {
        push_increasing(&mut ts, t);
        t += exp_sample(&mut rng, rate);
    }
    clamp_tail(&mut ts, duration);
    PhotonStream::new(ts, duration)
}
