//! Per-station EDCA machinery: four FIFO queues, one backoff entity per
//! access category, AIFS deferral counted in whole idle slots, backoff
//! freeze on busy medium and the internal (virtual) collision scheduler.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{aifs_value, AifsTable, ClassifierState};
use crate::error::{Error, Result};
use crate::params::{
    cw_after_collision, cw_after_success, AccessCategory, Discipline, EdcaParams, Frame, SimTime,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntityState {
    Idle,
    /// Waiting for `aifs_remaining` microseconds of contiguous idle medium.
    Deferring {
        aifs_remaining: u64,
    },
    Counting,
    AwaitingTx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackoffEntity {
    pub ac: AccessCategory,
    pub cw: u32,
    pub backoff_counter: u32,
    pub retries: u32,
    pub state: EntityState,
}

impl BackoffEntity {
    fn new(ac: AccessCategory, params: &EdcaParams) -> Self {
        BackoffEntity {
            ac,
            cw: params.cw_min(ac),
            backoff_counter: 0,
            retries: 0,
            state: EntityState::Idle,
        }
    }

    /// Idle slots until this entity reaches `AwaitingTx`, if armed.
    pub fn slots_to_fire(&self, slot_us: u64) -> Option<u64> {
        match self.state {
            EntityState::Idle => None,
            EntityState::AwaitingTx => Some(0),
            EntityState::Counting => Some(self.backoff_counter as u64),
            EntityState::Deferring { aifs_remaining } => {
                Some(aifs_remaining.div_ceil(slot_us) + self.backoff_counter as u64)
            }
        }
    }

    fn advance(&mut self, slot_us: u64) {
        match self.state {
            EntityState::Deferring { aifs_remaining } => {
                let left = aifs_remaining.saturating_sub(slot_us);
                self.state = if left > 0 {
                    EntityState::Deferring {
                        aifs_remaining: left,
                    }
                } else if self.backoff_counter == 0 {
                    EntityState::AwaitingTx
                } else {
                    EntityState::Counting
                };
            }
            EntityState::Counting => {
                self.backoff_counter -= 1;
                if self.backoff_counter == 0 {
                    self.state = EntityState::AwaitingTx;
                }
            }
            EntityState::Idle | EntityState::AwaitingTx => {}
        }
    }
}

/// Static context shared by every station of a run.
#[derive(Debug, Clone)]
pub struct MacContext {
    pub params: EdcaParams,
    pub discipline: Discipline,
    pub table: AifsTable,
}

impl MacContext {
    pub fn new(params: EdcaParams, discipline: Discipline) -> Result<Self> {
        params.validate()?;
        discipline.validate()?;
        Ok(MacContext {
            params,
            discipline,
            table: AifsTable::for_discipline(&discipline),
        })
    }

    /// Use a custom AIFSN table; its class count must match the discipline.
    pub fn with_table(mut self, table: AifsTable) -> Result<Self> {
        if table.n() != self.discipline.class_count() {
            return Err(Error::param(
                "aifsn",
                format!(
                    "table has {} classes, discipline has {}",
                    table.n(),
                    self.discipline.class_count()
                ),
            ));
        }
        self.table = table;
        Ok(self)
    }

    fn aifs_us(&self, ac: AccessCategory, j: u8) -> u64 {
        aifs_value(ac, j, &self.table, &self.params)
            .expect("classifier class is always within the table")
            .as_us()
    }
}

/// What happened to a transmitting entity's head-of-line frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxResult {
    Delivered {
        frame: Frame,
        class_change: Option<(u8, u8)>,
    },
    Retrying {
        frame: Frame,
    },
    Dropped {
        frame: Frame,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxOutcome {
    Success,
    Collision,
    ChannelError,
}

/// A category that lost the internal scheduler in this slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VirtualLoss {
    pub ac: AccessCategory,
    pub frame: Frame,
    pub dropped: bool,
}

#[derive(Debug, Clone)]
pub struct StationState {
    pub station_id: u32,
    pub queues: [VecDeque<Frame>; 4],
    pub entities: [BackoffEntity; 4],
    pub classifier: ClassifierState,
    rng: ChaCha8Rng,
    pub enqueued: [u64; 4],
    pub delivered: [u64; 4],
    pub dropped: [u64; 4],
    next_seq: [u32; 4],
}

/// Each station draws from its own ChaCha stream of the run seed.
pub fn station_rng(seed: u64, station_id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(station_id as u64);
    rng
}

impl StationState {
    pub fn new(station_id: u32, seed: u64, ctx: &MacContext) -> Self {
        StationState {
            station_id,
            queues: Default::default(),
            entities: AccessCategory::ALL.map(|ac| BackoffEntity::new(ac, &ctx.params)),
            classifier: ClassifierState::for_discipline(&ctx.discipline),
            rng: station_rng(seed, station_id),
            enqueued: [0; 4],
            delivered: [0; 4],
            dropped: [0; 4],
            next_seq: [0; 4],
        }
    }

    pub fn entity(&self, ac: AccessCategory) -> &BackoffEntity {
        &self.entities[ac.index()]
    }

    pub fn current_aifs(&self, ac: AccessCategory, ctx: &MacContext) -> SimTime {
        SimTime(ctx.aifs_us(ac, self.classifier.j))
    }

    pub fn has_backlog(&self) -> bool {
        self.queues.iter().any(|q| !q.is_empty())
    }

    /// Append a new frame and arm the category if it was idle.
    pub fn enqueue(
        &mut self,
        ac: AccessCategory,
        size_bytes: u32,
        now: SimTime,
        ctx: &MacContext,
    ) -> Frame {
        let i = ac.index();
        let frame = Frame {
            station_id: self.station_id,
            ac,
            size_bytes,
            seq: self.next_seq[i],
            enqueue_time: now,
        };
        self.next_seq[i] += 1;
        self.enqueued[i] += 1;
        self.queues[i].push_back(frame);
        if self.entities[i].state == EntityState::Idle {
            self.arm_entity(ac, ctx)
                .expect("queue is non-empty and entity idle");
        }
        frame
    }

    /// Start AIFS deferral and draw a fresh backoff from `[0, cw]`.
    pub fn arm_entity(&mut self, ac: AccessCategory, ctx: &MacContext) -> Result<()> {
        let i = ac.index();
        if self.queues[i].is_empty() {
            return Err(Error::Contract(format!("arming {ac} with an empty queue")));
        }
        if self.entities[i].state != EntityState::Idle {
            return Err(Error::Contract(format!("arming {ac} while already armed")));
        }
        let aifs = ctx.aifs_us(ac, self.classifier.j);
        let e = &mut self.entities[i];
        e.backoff_counter = self.rng.gen_range(0..=e.cw);
        e.state = EntityState::Deferring {
            aifs_remaining: aifs,
        };
        Ok(())
    }

    fn rearm_if_backlogged(&mut self, ac: AccessCategory, ctx: &MacContext) {
        self.entities[ac.index()].state = EntityState::Idle;
        if !self.queues[ac.index()].is_empty() {
            self.arm_entity(ac, ctx).expect("entity just idled");
        }
    }

    /// One idle slot of medium.
    pub fn advance_idle_slot(&mut self, ctx: &MacContext) {
        for e in &mut self.entities {
            e.advance(ctx.params.slot_us);
        }
    }

    /// Fewest idle slots before any entity of this station is ready to send.
    pub fn slots_to_next_fire(&self, ctx: &MacContext) -> Option<u64> {
        self.entities
            .iter()
            .filter_map(|e| e.slots_to_fire(ctx.params.slot_us))
            .min()
    }

    /// Advance `slots` idle slots at once. No entity may become ready before
    /// the last of them.
    pub fn skip_idle_slots(&mut self, slots: u64, ctx: &MacContext) {
        if slots == 0 {
            return;
        }
        let slot_us = ctx.params.slot_us;
        for e in &mut self.entities {
            match e.state {
                EntityState::Idle | EntityState::AwaitingTx => {}
                EntityState::Counting => {
                    debug_assert!(slots <= e.backoff_counter as u64);
                    e.backoff_counter -= slots as u32;
                    if e.backoff_counter == 0 {
                        e.state = EntityState::AwaitingTx;
                    }
                }
                EntityState::Deferring { aifs_remaining } => {
                    let defer_slots = aifs_remaining.div_ceil(slot_us);
                    if slots < defer_slots {
                        e.state = EntityState::Deferring {
                            aifs_remaining: aifs_remaining - slots * slot_us,
                        };
                    } else {
                        let counted = slots - defer_slots;
                        debug_assert!(counted <= e.backoff_counter as u64);
                        e.backoff_counter -= counted as u32;
                        e.state = if e.backoff_counter == 0 {
                            EntityState::AwaitingTx
                        } else {
                            EntityState::Counting
                        };
                    }
                }
            }
        }
    }

    /// Medium sensed busy: counters hold, and every armed entity must
    /// observe a fresh full AIFS once the medium frees up.
    pub fn freeze_on_busy(&mut self, ctx: &MacContext) {
        let j = self.classifier.j;
        for e in &mut self.entities {
            if matches!(
                e.state,
                EntityState::Deferring { .. } | EntityState::Counting
            ) {
                e.state = EntityState::Deferring {
                    aifs_remaining: ctx.aifs_us(e.ac, j),
                };
            }
        }
    }

    /// Grant the slot to the highest-priority ready category. Every other
    /// ready category is handled as if it had collided on the medium.
    pub fn resolve_virtual_collision(
        &mut self,
        ctx: &MacContext,
    ) -> (Option<AccessCategory>, Vec<VirtualLoss>) {
        let mut ready = AccessCategory::ALL
            .into_iter()
            .filter(|ac| self.entities[ac.index()].state == EntityState::AwaitingTx);
        let Some(winner) = ready.next() else {
            return (None, Vec::new());
        };
        let losers: Vec<AccessCategory> = ready.collect();
        let losses = losers
            .into_iter()
            .map(|ac| {
                let frame = self.head(ac);
                let dropped = self.fail_head(ac, ctx);
                VirtualLoss { ac, frame, dropped }
            })
            .collect();
        (Some(winner), losses)
    }

    /// Head-of-line frame of a category.
    pub fn head(&self, ac: AccessCategory) -> Frame {
        *self.queues[ac.index()]
            .front()
            .expect("armed entity has a queued frame")
    }

    /// Failed attempt: widen the window, count a retry, drop on exhaustion,
    /// then re-arm. Returns whether the head frame was dropped.
    fn fail_head(&mut self, ac: AccessCategory, ctx: &MacContext) -> bool {
        let i = ac.index();
        let e = &mut self.entities[i];
        e.cw = cw_after_collision(e.cw, ac, &ctx.params);
        e.retries += 1;
        let dropped = e.retries > ctx.params.retry_limit;
        if dropped {
            e.cw = cw_after_success(ac, &ctx.params);
            e.retries = 0;
            self.queues[i].pop_front();
            self.dropped[i] += 1;
        }
        self.rearm_if_backlogged(ac, ctx);
        dropped
    }

    /// Apply the medium's verdict to the category that just transmitted.
    pub fn on_tx_outcome(
        &mut self,
        ac: AccessCategory,
        outcome: TxOutcome,
        ctx: &MacContext,
    ) -> Result<TxResult> {
        let i = ac.index();
        if self.entities[i].state != EntityState::AwaitingTx || self.queues[i].is_empty() {
            return Err(Error::Contract(format!(
                "station {} {ac}: outcome for an entity that was not transmitting",
                self.station_id
            )));
        }
        let frame = self.head(ac);
        match outcome {
            TxOutcome::Success => {
                self.queues[i].pop_front();
                self.delivered[i] += 1;
                let e = &mut self.entities[i];
                e.cw = cw_after_success(ac, &ctx.params);
                e.retries = 0;
                let before = self.classifier.j;
                if ctx.discipline.is_modified() {
                    self.classifier = self.classifier.on_successful_transmission(ac);
                }
                let after = self.classifier.j;
                self.rearm_if_backlogged(ac, ctx);
                Ok(TxResult::Delivered {
                    frame,
                    class_change: (before != after).then_some((before, after)),
                })
            }
            TxOutcome::Collision | TxOutcome::ChannelError => {
                if self.fail_head(ac, ctx) {
                    Ok(TxResult::Dropped { frame })
                } else {
                    Ok(TxResult::Retrying { frame })
                }
            }
        }
    }
}
