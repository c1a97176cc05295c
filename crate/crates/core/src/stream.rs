use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detector label of an HBT arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    A,
    B,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::A => "A",
            Channel::B => "B",
        })
    }
}

/// Ordered photon arrival times (ns) within an observation window `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonStream {
    timestamps: Vec<f64>,
    duration: f64,
    pub channel: Option<Channel>,
}

impl PhotonStream {
    pub fn new(timestamps: Vec<f64>, duration: f64) -> Result<Self> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::domain(format!("stream duration must be finite and >= 0, got {duration}")));
        }
        if let Some(i) = timestamps.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!(
                "timestamps must be strictly increasing (index {}: {} then {})",
                i + 1,
                timestamps[i],
                timestamps[i + 1]
            )));
        }
        if let (Some(first), Some(last)) = (timestamps.first(), timestamps.last()) {
            if !(*first >= 0.0) || !(*last <= duration) {
                return Err(Error::domain(format!(
                    "timestamps must lie in [0, {duration}], got range [{first}, {last}]"
                )));
            }
        }
        Ok(Self { timestamps, duration, channel: None })
    }

    pub fn empty(duration: f64) -> Self {
        Self { timestamps: Vec::new(), duration, channel: None }
    }

    pub fn with_channel(mut self, channel: Channel) -> Self {
        self.channel = Some(channel);
        self
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn into_timestamps(self) -> Vec<f64> {
        self.timestamps
    }
}
