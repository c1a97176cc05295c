//! Run configuration: one TOML table per command, every key optional.
//!
//! ```toml
//! [simulate]
//! mode = "pulsed"            # "pulsed" | "cw"
//! seed = 1
//! output = "photons.txt"     # relative paths resolve against the config file
//!
//! [pulsed]
//! rep_period_ns = 1000.0
//! n_pulses = 1000000
//! init_p2 = 0.0              # probability a pulse excites |2> directly
//! init_p3 = 1.0              # probability a pulse fills the reservoir |3>
//! r21 = 1.0752688172043010   # 1 / 0.93 ns
//! trapping = "power_law"     # "power_law" | "constant"
//! r32_prime = 0.004330880356603394
//! alpha = 0.124
//! r32 = 0.005                # constant trapping only
//! r31 = 0.0                  # ignored when paired_loss = true
//! paired_loss = true
//! t_min_ns = 0.01
//! detection_efficiency = 1.0
//! histogram = "trpl.csv"     # optional TCSPC histogram
//! bin_width_ns = 1.0
//!
//! [cw]
//! r12 = 0.175
//! r21 = 1.075
//! r13 = 0.0023
//! r31 = 0.0019
//! r32 = 0.0019
//! duration_ns = 2.0e7
//! detection_efficiency = 1.0
//! segment_ns = 1.0e6
//! split_prob = 0.5
//! correlogram = "g2.csv"     # optional HBT correlogram
//! max_lag_ns = 1000.0
//! bin_width_ns = 0.5
//!
//! [sweep]                    # uses [pulsed] as the base experiment
//! output = "sweep.csv"
//! window_start_ns = 20.0
//! window_end_ns = 1000.0     # defaults to rep_period_ns
//! points = [{ r32_prime = 0.0056, alpha = 0.37 }, { r32_prime = 0.0068, alpha = 0.2 }]
//! ```

use std::path::{Path, PathBuf};

use qdtrap::rate_matrix::RateSet;
use qdtrap::stochastic::{
    CwExperimentConfig, MetastableChannel, PulsedExperimentConfig, Trapping, DEFAULT_SEGMENT, DEFAULT_T_MIN,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub simulate: SimulateSection,
    pub pulsed: PulsedSection,
    pub cw: CwSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Pulsed,
    Cw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub mode: Mode,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { mode: Mode::Pulsed, seed: 1, output: "photons.txt".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrappingKind {
    #[default]
    PowerLaw,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulsedSection {
    pub rep_period_ns: f64,
    pub n_pulses: u64,
    pub init_p2: f64,
    pub init_p3: f64,
    pub r21: f64,
    pub trapping: TrappingKind,
    pub r32_prime: f64,
    pub alpha: f64,
    pub r32: f64,
    pub r31: f64,
    pub paired_loss: bool,
    pub t_min_ns: f64,
    pub detection_efficiency: f64,
    pub histogram: Option<PathBuf>,
    pub bin_width_ns: f64,
}

impl Default for PulsedSection {
    fn default() -> Self {
        Self {
            rep_period_ns: 1000.0,
            n_pulses: 1_000_000,
            init_p2: 0.0,
            init_p3: 1.0,
            r21: 1.0 / 0.93,
            trapping: TrappingKind::PowerLaw,
            // 1/r = 194.4 ns at α = 0.124 with paired loss
            r32_prime: 0.004330880356603394,
            alpha: 0.124,
            r32: 0.005,
            r31: 0.0,
            paired_loss: true,
            t_min_ns: DEFAULT_T_MIN,
            detection_efficiency: 1.0,
            histogram: None,
            bin_width_ns: 1.0,
        }
    }
}

impl PulsedSection {
    pub fn experiment(&self, seed: u64) -> PulsedExperimentConfig {
        let trapping = match self.trapping {
            TrappingKind::PowerLaw => Trapping::PowerLaw { r32_prime: self.r32_prime, alpha: self.alpha },
            TrappingKind::Constant => Trapping::Constant { r32: self.r32 },
        };
        PulsedExperimentConfig {
            rep_period: self.rep_period_ns,
            n_pulses: self.n_pulses,
            init_p2: self.init_p2,
            init_p3: self.init_p3,
            r21: self.r21,
            metastable: MetastableChannel {
                trapping,
                r31: self.r31,
                paired_loss: self.paired_loss,
                t_min: self.t_min_ns,
            },
            detection_efficiency: self.detection_efficiency,
            seed,
        }
    }

    fn problems(&self, out: &mut Vec<String>) {
        if let Err(qdtrap::Error::InvalidConfig(p)) = self.experiment(0).validate() {
            out.extend(p.into_iter().map(|m| format!("[pulsed] {m}")));
        }
        if !(self.bin_width_ns > 0.0) || !(self.bin_width_ns <= self.rep_period_ns) {
            out.push(format!("[pulsed] bin_width_ns must lie in (0, rep_period_ns], got {}", self.bin_width_ns));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CwSection {
    pub r12: f64,
    pub r21: f64,
    pub r13: f64,
    pub r31: f64,
    pub r32: f64,
    pub duration_ns: f64,
    pub detection_efficiency: f64,
    pub segment_ns: f64,
    pub split_prob: f64,
    pub correlogram: Option<PathBuf>,
    pub max_lag_ns: f64,
    pub bin_width_ns: f64,
}

impl Default for CwSection {
    fn default() -> Self {
        Self {
            r12: 0.175,
            r21: 1.075,
            r13: 0.0023,
            r31: 0.0019,
            r32: 0.0019,
            duration_ns: 2.0e7,
            detection_efficiency: 1.0,
            segment_ns: DEFAULT_SEGMENT,
            split_prob: 0.5,
            correlogram: None,
            max_lag_ns: 1000.0,
            bin_width_ns: 0.5,
        }
    }
}

impl CwSection {
    pub fn rates(&self) -> RateSet {
        RateSet { r12: self.r12, r21: self.r21, r13: self.r13, r31: self.r31, r32: self.r32 }
    }

    pub fn experiment(&self, seed: u64) -> CwExperimentConfig {
        CwExperimentConfig {
            rates: self.rates(),
            duration: self.duration_ns,
            detection_efficiency: self.detection_efficiency,
            seed,
            segment: self.segment_ns,
        }
    }

    fn problems(&self, out: &mut Vec<String>) {
        if let Err(qdtrap::Error::InvalidConfig(p)) = self.experiment(0).validate() {
            out.extend(p.into_iter().map(|m| format!("[cw] {m}")));
        }
        if !(0.0..=1.0).contains(&self.split_prob) {
            out.push(format!("[cw] split_prob must lie in [0, 1], got {}", self.split_prob));
        }
        if !(self.bin_width_ns > 0.0) || !(self.max_lag_ns >= self.bin_width_ns) || !self.max_lag_ns.is_finite() {
            out.push(format!(
                "[cw] need 0 < bin_width_ns <= max_lag_ns, got bin_width_ns = {} and max_lag_ns = {}",
                self.bin_width_ns, self.max_lag_ns
            ));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub r32_prime: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub output: PathBuf,
    pub window_start_ns: f64,
    pub window_end_ns: Option<f64>,
    pub points: Vec<SweepPoint>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { output: "sweep.csv".into(), window_start_ns: 20.0, window_end_ns: None, points: Vec::new() }
    }
}

impl SweepSection {
    pub fn window(&self, pulsed: &PulsedSection) -> (f64, f64) {
        (self.window_start_ns, self.window_end_ns.unwrap_or(pulsed.rep_period_ns))
    }

    fn problems(&self, pulsed: &PulsedSection, out: &mut Vec<String>) {
        let (lo, hi) = self.window(pulsed);
        if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
            out.push(format!("[sweep] window must satisfy 0 < window_start_ns < window_end_ns, got [{lo}, {hi}]"));
        }
        for (i, p) in self.points.iter().enumerate() {
            if !(p.r32_prime > 0.0) || !p.r32_prime.is_finite() {
                out.push(format!("[sweep] points[{i}].r32_prime must be > 0, got {}", p.r32_prime));
            }
            if !(0.0..1.0).contains(&p.alpha) {
                out.push(format!("[sweep] points[{i}].alpha must lie in [0, 1), got {}", p.alpha));
            }
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {}", e.to_string().trim_end())))
    }

    /// Reads a config file and rebases its relative paths onto the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.simulate.output);
        rebase(&mut cfg.sweep.output);
        if let Some(p) = cfg.pulsed.histogram.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.cw.correlogram.as_mut() {
            rebase(p);
        }
        Ok(cfg)
    }

    /// Every problem with the sections a `simulate` run will use.
    pub fn validate_simulate(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        match self.simulate.mode {
            Mode::Pulsed => self.pulsed.problems(&mut problems),
            Mode::Cw => self.cw.problems(&mut problems),
        }
        finish(problems)
    }

    pub fn validate_sweep(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        // trapping parameters come from the grid, so validate the base with the first point
        let mut base = self.pulsed.clone();
        base.trapping = TrappingKind::PowerLaw;
        if let Some(p) = self.sweep.points.first() {
            base.r32_prime = p.r32_prime;
            base.alpha = p.alpha;
        }
        base.problems(&mut problems);
        problems.retain(|m| !m.contains("r32_prime") && !m.contains("alpha"));
        self.sweep.problems(&self.pulsed, &mut problems);
        finish(problems)
    }
}

fn finish(problems: Vec<String>) -> Result<(), CliError> {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(problems))
    }
}
