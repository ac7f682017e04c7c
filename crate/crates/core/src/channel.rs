//! The shared slotted medium: one collision domain, fixed-rate airtime and
//! an independent per-transmission error model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AccessCategory, EdcaParams, Frame, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub data_rate_bps: u64,
    pub ack_duration_us: u64,
    pub error_prob: f64,
    pub header_overhead_bytes: u32,
}

pub const MIN_RATE_BPS: u64 = 6_000_000;
pub const MAX_RATE_BPS: u64 = 54_000_000;
/// 24-byte ACK at 6 Mbps.
pub const DEFAULT_ACK_US: u64 = 32;

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            data_rate_bps: MIN_RATE_BPS,
            ack_duration_us: DEFAULT_ACK_US,
            error_prob: 0.0,
            header_overhead_bytes: 0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_RATE_BPS..=MAX_RATE_BPS).contains(&self.data_rate_bps) {
            return Err(Error::param(
                "data_rate_bps",
                format!(
                    "{} outside {MIN_RATE_BPS}..={MAX_RATE_BPS}",
                    self.data_rate_bps
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.error_prob) {
            return Err(Error::param(
                "error_prob",
                format!("{} is not a probability", self.error_prob),
            ));
        }
        Ok(())
    }
}

/// Data airtime of `frame`, rounded up to whole microseconds (at least 1).
pub fn tx_duration(frame: &Frame, cfg: &ChannelConfig) -> SimTime {
    let bits = (frame.size_bytes as u64 + cfg.header_overhead_bytes as u64) * 8;
    SimTime((bits * 1_000_000).div_ceil(cfg.data_rate_bps).max(1))
}

/// A frame offered to the medium by one station in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Offer {
    pub station: u32,
    pub ac: AccessCategory,
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotOutcome {
    Idle,
    Success {
        station: u32,
        ac: AccessCategory,
        busy_until: SimTime,
    },
    Collision {
        participants: Vec<(u32, AccessCategory)>,
        busy_until: SimTime,
    },
    ChannelError {
        station: u32,
        ac: AccessCategory,
        busy_until: SimTime,
    },
}

impl SlotOutcome {
    pub fn busy_until(&self) -> Option<SimTime> {
        match self {
            SlotOutcome::Idle => None,
            SlotOutcome::Success { busy_until, .. }
            | SlotOutcome::Collision { busy_until, .. }
            | SlotOutcome::ChannelError { busy_until, .. } => Some(*busy_until),
        }
    }
}

/// Resolve the offers made in one slot into a channel verdict.
///
/// A single offer consumes exactly one uniform draw from `rng`; idle slots
/// and collisions draw nothing.
pub fn arbitrate<R: Rng + ?Sized>(
    offers: &[Offer],
    now: SimTime,
    cfg: &ChannelConfig,
    params: &EdcaParams,
    rng: &mut R,
) -> SlotOutcome {
    match offers {
        [] => SlotOutcome::Idle,
        [only] => {
            let busy_until =
                now + tx_duration(&only.frame, cfg) + SimTime(params.sifs_us + cfg.ack_duration_us);
            let u: f64 = rng.gen();
            if u < cfg.error_prob {
                SlotOutcome::ChannelError {
                    station: only.station,
                    ac: only.ac,
                    busy_until,
                }
            } else {
                SlotOutcome::Success {
                    station: only.station,
                    ac: only.ac,
                    busy_until,
                }
            }
        }
        many => {
            let longest = many
                .iter()
                .map(|o| tx_duration(&o.frame, cfg))
                .max()
                .unwrap_or(SimTime::ZERO);
            SlotOutcome::Collision {
                participants: many.iter().map(|o| (o.station, o.ac)).collect(),
                busy_until: now + longest,
            }
        }
    }
}
