//! Discrete-event loop: stations contend on one slotted medium until every
//! frame of the scenario has been delivered or dropped.
//!
//! Idle stretches are crossed in one step by jumping straight to the first
//! slot in which some entity becomes ready (or a new frame arrives), and a
//! busy medium is crossed by jumping to the end of the transmission.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{arbitrate, tx_duration, Offer, SlotOutcome};
use crate::error::{Error, Result};
use crate::mac::{MacContext, StationState, TxOutcome, TxResult};
use crate::metrics::{EventKind, SimulationReport, TraceEvent};
use crate::params::{AccessCategory, SimTime};
use crate::scenario::Scenario;

/// ChaCha stream reserved for the channel error model.
pub const CHANNEL_STREAM: u64 = u64::MAX;

pub fn channel_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CHANNEL_STREAM);
    rng
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Upper bound on loop steps (idle jumps plus busy periods).
    pub max_steps: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Arrival {
    time: SimTime,
    station: usize,
    ac: AccessCategory,
}

/// Constant-bit-rate arrivals in processing order.
fn arrivals(scenario: &Scenario) -> VecDeque<Arrival> {
    let mut out = Vec::new();
    for (station, spec) in scenario.stations.iter().enumerate() {
        for ac in AccessCategory::ALL {
            for m in 0..spec.count(ac) as u64 {
                out.push(Arrival {
                    time: SimTime(m * scenario.cbr_interval_us),
                    station,
                    ac,
                });
            }
        }
    }
    out.sort_by_key(|a| (a.time, a.station, a.ac));
    out.into()
}

pub fn run(scenario: &Scenario) -> Result<SimulationReport> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, opts: RunOptions) -> Result<SimulationReport> {
    scenario.validate()?;
    let ctx = MacContext::new(scenario.effective_params(), scenario.discipline)?;
    let slot_us = ctx.params.slot_us;
    let mut stations: Vec<StationState> = scenario
        .stations
        .iter()
        .map(|s| StationState::new(s.station_id, scenario.seed, &ctx))
        .collect();
    let mut chan_rng = channel_rng(scenario.seed);
    let mut pending = arrivals(scenario);
    let mut events = Vec::new();
    let mut now = SimTime::ZERO;
    let mut steps = 0u64;

    let push = |events: &mut Vec<TraceEvent>, time, station, ac, kind, seq, airtime_us| {
        events.push(TraceEvent {
            time,
            station,
            ac,
            kind,
            seq,
            airtime_us,
        })
    };

    loop {
        while pending.front().is_some_and(|a| a.time <= now) {
            let a = pending.pop_front().expect("checked non-empty");
            let st = &mut stations[a.station];
            let frame = st.enqueue(a.ac, scenario.frame_bytes, now, &ctx);
            push(
                &mut events,
                now,
                st.station_id,
                a.ac,
                EventKind::Enqueue,
                frame.seq,
                0,
            );
        }
        if pending.is_empty() && stations.iter().all(|s| !s.has_backlog()) {
            break;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::BudgetExceeded {
                budget: opts.max_steps,
                time_us: now.as_us(),
            });
        }

        let mut offers = Vec::new();
        let mut offer_station = Vec::new();
        for (idx, st) in stations.iter_mut().enumerate() {
            let (winner, losses) = st.resolve_virtual_collision(&ctx);
            for loss in losses {
                let sid = st.station_id;
                push(
                    &mut events,
                    now,
                    sid,
                    loss.ac,
                    EventKind::VirtualCollision,
                    loss.frame.seq,
                    0,
                );
                if loss.dropped {
                    push(
                        &mut events,
                        now,
                        sid,
                        loss.ac,
                        EventKind::Drop,
                        loss.frame.seq,
                        0,
                    );
                }
            }
            if let Some(ac) = winner {
                offers.push(Offer {
                    station: st.station_id,
                    ac,
                    frame: st.head(ac),
                });
                offer_station.push(idx);
            }
        }

        if offers.is_empty() {
            let next_fire = stations
                .iter()
                .filter_map(|s| s.slots_to_next_fire(&ctx))
                .min();
            let next_arrival = pending
                .front()
                .map(|a| (a.time.as_us() - now.as_us()).div_ceil(slot_us));
            let slots = match (next_fire, next_arrival) {
                (Some(f), Some(a)) => f.min(a),
                (Some(f), None) => f,
                (None, Some(a)) => a,
                (None, None) => unreachable!("backlog implies an armed entity"),
            };
            debug_assert!(slots > 0);
            for st in &mut stations {
                st.skip_idle_slots(slots, &ctx);
            }
            now += SimTime(slots * slot_us);
            continue;
        }

        for o in &offers {
            let airtime = tx_duration(&o.frame, &scenario.channel).as_us();
            push(
                &mut events,
                now,
                o.station,
                o.ac,
                EventKind::TxStart,
                o.frame.seq,
                airtime,
            );
        }
        let verdict = arbitrate(&offers, now, &scenario.channel, &ctx.params, &mut chan_rng);
        let end = verdict.busy_until().expect("offers were made");
        let outcome = match verdict {
            SlotOutcome::Success { .. } => TxOutcome::Success,
            SlotOutcome::Collision { .. } => TxOutcome::Collision,
            SlotOutcome::ChannelError { .. } => TxOutcome::ChannelError,
            SlotOutcome::Idle => unreachable!("offers were made"),
        };
        for (o, &idx) in offers.iter().zip(&offer_station) {
            let st = &mut stations[idx];
            let airtime = tx_duration(&o.frame, &scenario.channel).as_us();
            let sid = st.station_id;
            match st.on_tx_outcome(o.ac, outcome, &ctx)? {
                TxResult::Delivered {
                    frame,
                    class_change,
                } => {
                    push(
                        &mut events,
                        end,
                        sid,
                        o.ac,
                        EventKind::Success,
                        frame.seq,
                        airtime,
                    );
                    if let Some((before, after)) = class_change {
                        push(
                            &mut events,
                            end,
                            sid,
                            o.ac,
                            EventKind::ClassChange { before, after },
                            frame.seq,
                            0,
                        );
                    }
                }
                result @ (TxResult::Retrying { frame } | TxResult::Dropped { frame }) => {
                    let kind = if outcome == TxOutcome::Collision {
                        EventKind::Collision
                    } else {
                        EventKind::ChannelError
                    };
                    push(&mut events, end, sid, o.ac, kind, frame.seq, airtime);
                    if matches!(result, TxResult::Dropped { .. }) {
                        push(&mut events, end, sid, o.ac, EventKind::Drop, frame.seq, 0);
                    }
                }
            }
        }
        for st in &mut stations {
            st.freeze_on_busy(&ctx);
        }
        now = end;
    }

    let mut report = SimulationReport {
        scenario: scenario.name.clone(),
        discipline: scenario.discipline,
        seed: scenario.seed,
        events,
        enqueued: [0; 4],
        delivered: [0; 4],
        dropped: [0; 4],
    };
    for st in &stations {
        for i in 0..4 {
            report.enqueued[i] += st.enqueued[i];
            report.delivered[i] += st.delivered[i];
            report.dropped[i] += st.dropped[i];
        }
    }
    Ok(report)
}
