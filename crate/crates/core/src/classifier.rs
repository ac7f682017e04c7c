//! Per-station user-weight classification.
//!
//! Every station keeps one success counter per access category and a class
//! `j` in `[0, n)`, where 0 is the most favoured class. Whenever a voice or
//! video counter reaches `k_high` the station is promoted (`j - 1`); whenever
//! a best-effort or background counter reaches `k_low` it is demoted
//! (`j + 1`). Only the counter that fired is reset. A station's AIFS for
//! category `i` is then looked up in a table indexed by `(i, j)` whose values
//! are strictly increasing in lexicographic order, so the category always
//! dominates the class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AccessCategory, Discipline, EdcaParams, SimTime, MAX_CLASSES};

/// Dynamic class state owned by one station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierState {
    pub j: u8,
    pub s: [u32; 4],
    pub n: u8,
    pub k_high: u32,
    pub k_low: u32,
}

impl ClassifierState {
    /// Fresh state: lowest class, all counters zero.
    pub fn new(n: u8, k_high: u32, k_low: u32) -> Self {
        debug_assert!((1..=MAX_CLASSES).contains(&n));
        ClassifierState {
            j: n - 1,
            s: [0; 4],
            n,
            k_high,
            k_low,
        }
    }

    /// Single-class state used by plain EDCA; never changes class.
    pub fn inert() -> Self {
        ClassifierState::new(1, u32::MAX, u32::MAX)
    }

    pub fn for_discipline(d: &Discipline) -> Self {
        match *d {
            Discipline::Basic => ClassifierState::inert(),
            Discipline::Modified { k_high, k_low, n } => ClassifierState::new(n, k_high, k_low),
        }
    }

    /// Decision factor that applies to `ac`'s counter.
    pub fn threshold(&self, ac: AccessCategory) -> u32 {
        if ac.is_multimedia() {
            self.k_high
        } else {
            self.k_low
        }
    }

    /// Account for one successfully delivered frame of category `ac`.
    pub fn on_successful_transmission(&self, ac: AccessCategory) -> ClassifierState {
        let mut next = *self;
        let i = ac.index();
        next.s[i] += 1;
        if next.s[i] >= self.threshold(ac) {
            next.s[i] = 0;
            next.j = if ac.is_multimedia() {
                self.j.saturating_sub(1)
            } else {
                (self.j + 1).min(self.n - 1)
            };
        }
        next
    }

    pub fn current_aifs(
        &self,
        ac: AccessCategory,
        table: &AifsTable,
        params: &EdcaParams,
    ) -> Result<SimTime> {
        aifs_value(ac, self.j, table, params)
    }
}

/// AIFSN lookup indexed by `(category, class)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AifsTable {
    n: u8,
    // row-major: aifsn[i * n + j]
    aifsn: Vec<u32>,
}

impl AifsTable {
    /// Smallest integer table honouring the lexicographic order with
    /// `AIFSN(0, 0) = 2`: `aifsn(i, j) = 2 + i*n + j`.
    pub fn default_for(n: u8) -> Self {
        assert!(
            (1..=MAX_CLASSES).contains(&n),
            "class count {n} out of range"
        );
        let n32 = n as u32;
        let aifsn = (0..4u32)
            .flat_map(|i| (0..n32).map(move |j| 2 + i * n32 + j))
            .collect();
        AifsTable { n, aifsn }
    }

    /// Build a custom table from one row of `n` AIFSN values per category.
    pub fn from_rows(rows: [Vec<u32>; 4]) -> Result<Self> {
        let n = rows[0].len();
        if n == 0 || n > MAX_CLASSES as usize || rows.iter().any(|r| r.len() != n) {
            return Err(Error::param(
                "aifsn",
                "every row needs the same length in 1..=6",
            ));
        }
        let aifsn: Vec<u32> = rows.concat();
        if aifsn.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(
                "aifsn",
                "values must be strictly increasing in (category, class) order",
            ));
        }
        if aifsn[0] == 0 {
            return Err(Error::param("aifsn", "AIFSN must be at least 1"));
        }
        Ok(AifsTable { n: n as u8, aifsn })
    }

    pub fn for_discipline(d: &Discipline) -> Self {
        AifsTable::default_for(d.class_count())
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn aifsn(&self, ac: AccessCategory, j: u8) -> Result<u32> {
        if j >= self.n {
            return Err(Error::ClassOutOfRange { j, n: self.n });
        }
        Ok(self.aifsn[ac.index() * self.n as usize + j as usize])
    }
}

/// `SIFS + AIFSN(i, j) * slot`.
pub fn aifs_value(
    ac: AccessCategory,
    j: u8,
    table: &AifsTable,
    params: &EdcaParams,
) -> Result<SimTime> {
    let aifsn = table.aifsn(ac, j)? as u64;
    Ok(SimTime(params.sifs_us + aifsn * params.slot_us))
}
