//! Shared domain types: the time grid, access categories, frames, the
//! per-AC contention parameters, and the two channel-access disciplines.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulation time in whole microseconds.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_us(us: u64) -> Self {
        SimTime(us)
    }

    pub fn as_us(self) -> u64 {
        self.0
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

/// One of the four EDCA access categories. Lower index means higher priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum AccessCategory {
    Voice = 0,
    Video = 1,
    BestEffort = 2,
    Background = 3,
}

impl AccessCategory {
    pub const ALL: [AccessCategory; 4] = [
        AccessCategory::Voice,
        AccessCategory::Video,
        AccessCategory::BestEffort,
        AccessCategory::Background,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Voice and video: the categories whose traffic promotes a station.
    pub fn is_multimedia(self) -> bool {
        matches!(self, AccessCategory::Voice | AccessCategory::Video)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            AccessCategory::Voice => "vo",
            AccessCategory::Video => "vi",
            AccessCategory::BestEffort => "be",
            AccessCategory::Background => "bk",
        }
    }
}

impl From<AccessCategory> for u8 {
    fn from(ac: AccessCategory) -> u8 {
        ac as u8
    }
}

impl TryFrom<u8> for AccessCategory {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        AccessCategory::from_index(v as usize)
            .ok_or_else(|| Error::param("ac", format!("{v} is not an access category")))
    }
}

impl fmt::Display for AccessCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AccessCategory::Voice => "AC_VO",
            AccessCategory::Video => "AC_VI",
            AccessCategory::BestEffort => "AC_BE",
            AccessCategory::Background => "AC_BK",
        };
        f.write_str(name)
    }
}

/// Per-AC contention windows plus the slot/SIFS time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdcaParams {
    pub cw_min: [u32; 4],
    pub cw_max: [u32; 4],
    pub slot_us: u64,
    pub sifs_us: u64,
    pub retry_limit: u32,
}

pub const DEFAULT_CW_MIN: [u32; 4] = [3, 7, 15, 15];
pub const DEFAULT_CW_MAX: [u32; 4] = [7, 15, 1023, 1023];
pub const DEFAULT_SLOT_US: u64 = 6;
pub const DEFAULT_SIFS_US: u64 = 8;
pub const DEFAULT_RETRY_LIMIT: u32 = 7;

impl Default for EdcaParams {
    fn default() -> Self {
        EdcaParams {
            cw_min: DEFAULT_CW_MIN,
            cw_max: DEFAULT_CW_MAX,
            slot_us: DEFAULT_SLOT_US,
            sifs_us: DEFAULT_SIFS_US,
            retry_limit: DEFAULT_RETRY_LIMIT,
        }
    }
}

fn is_window(cw: u32) -> bool {
    (cw as u64 + 1).is_power_of_two()
}

impl EdcaParams {
    pub fn validate(&self) -> Result<()> {
        for i in 0..4 {
            let (lo, hi) = (self.cw_min[i], self.cw_max[i]);
            if lo == 0 || lo > hi {
                return Err(Error::param(
                    "cw_min",
                    format!("AC {i}: need 0 < cw_min ({lo}) <= cw_max ({hi})"),
                ));
            }
            if !is_window(lo) || !is_window(hi) {
                return Err(Error::param(
                    "cw_max",
                    format!("AC {i}: windows must be of the form 2^m - 1, got {lo}/{hi}"),
                ));
            }
        }
        if self.slot_us == 0 {
            return Err(Error::param("slot_us", "must be positive"));
        }
        Ok(())
    }

    pub fn cw_min(&self, ac: AccessCategory) -> u32 {
        self.cw_min[ac.index()]
    }

    pub fn cw_max(&self, ac: AccessCategory) -> u32 {
        self.cw_max[ac.index()]
    }
}

/// Window after a failed attempt: `2cw + 1`, saturating at `cw_max`.
pub fn cw_after_collision(cw: u32, ac: AccessCategory, params: &EdcaParams) -> u32 {
    (2 * cw + 1).min(params.cw_max(ac))
}

/// Window after a success or a drop.
pub fn cw_after_success(ac: AccessCategory, params: &EdcaParams) -> u32 {
    params.cw_min(ac)
}

/// A data frame queued at a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub station_id: u32,
    pub ac: AccessCategory,
    pub size_bytes: u32,
    pub seq: u32,
    pub enqueue_time: SimTime,
}

pub const DEFAULT_FRAME_BYTES: u32 = 1000;

/// Maximum number of user-weight classes (AIFS values must stay distinct).
pub const MAX_CLASSES: u8 = 6;

/// Channel-access discipline: plain EDCA, or EDCA with per-station
/// user-weight classes driven by the decision factors `k_high`/`k_low`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Discipline {
    Basic,
    Modified { k_high: u32, k_low: u32, n: u8 },
}

impl Discipline {
    pub fn modified(k: u32, n: u8) -> Result<Self> {
        Self::modified_split(k, k, n)
    }

    pub fn modified_split(k_high: u32, k_low: u32, n: u8) -> Result<Self> {
        let d = Discipline::Modified { k_high, k_low, n };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if let Discipline::Modified { k_high, k_low, n } = *self {
            if !(1..=MAX_CLASSES).contains(&n) {
                return Err(Error::param(
                    "n",
                    format!("class count must be in 1..={MAX_CLASSES}, got {n}"),
                ));
            }
            if k_high < 1 {
                return Err(Error::param("k", "decision factor must be >= 1"));
            }
            if k_low < 1 {
                return Err(Error::param("k_low", "decision factor must be >= 1"));
            }
        }
        Ok(())
    }

    /// Number of station classes; plain EDCA behaves as a single class.
    pub fn class_count(&self) -> u8 {
        match *self {
            Discipline::Basic => 1,
            Discipline::Modified { n, .. } => n,
        }
    }

    pub fn is_modified(&self) -> bool {
        matches!(self, Discipline::Modified { .. })
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Discipline::Basic => f.write_str("basic"),
            Discipline::Modified { k_high, k_low, n } if k_high == k_low => {
                write!(f, "mod:k={k_high}:n={n}")
            }
            Discipline::Modified { k_high, k_low, n } => {
                write!(f, "mod:k={k_high}:k_low={k_low}:n={n}")
            }
        }
    }
}
