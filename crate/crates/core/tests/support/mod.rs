//! Naive slot-by-slot reference simulator used as an oracle for the engine.
//!
//! Written independently of `edca_core::mac`/`engine`: it keeps its own
//! per-category state, walks every idle slot one at a time and recomputes
//! AIFS values from the closed-form table. The only shared protocol is the
//! random-stream layout (one ChaCha8 stream per station id, stream
//! `u64::MAX` for the channel) and the order in which draws are taken.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Enqueue,
    TxStart,
    Success,
    Collision,
    ChannelError,
    Drop,
    ClassChange(u8, u8),
    Virtual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rec {
    pub time: u64,
    pub station: u32,
    pub ac: usize,
    pub kind: Kind,
    pub seq: u32,
}

#[derive(Debug, Clone)]
pub struct RefConfig {
    pub stations: Vec<(u32, [u32; 4])>,
    /// `None` for plain EDCA, else `(k_high, k_low, n)`.
    pub classes: Option<(u32, u32, u32)>,
    pub seed: u64,
    pub cw_min: [u32; 4],
    pub cw_max: [u32; 4],
    pub slot: u64,
    pub sifs: u64,
    pub retry_limit: u32,
    pub rate_bps: u64,
    pub ack_us: u64,
    pub error_prob: f64,
    pub frame_bytes: u64,
    pub cbr_interval: u64,
}

impl RefConfig {
    pub fn new(
        stations: Vec<(u32, [u32; 4])>,
        classes: Option<(u32, u32, u32)>,
        seed: u64,
    ) -> Self {
        RefConfig {
            stations,
            classes,
            seed,
            cw_min: [3, 7, 15, 15],
            cw_max: [7, 15, 1023, 1023],
            slot: 6,
            sifs: 8,
            retry_limit: 7,
            rate_bps: 6_000_000,
            ack_us: 32,
            error_prob: 0.0,
            frame_bytes: 1000,
            cbr_interval: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Off,
    /// Idle microseconds still to observe before counting.
    Wait(i64),
    Count,
    Ready,
}

struct Cat {
    phase: Phase,
    cw: u32,
    counter: u32,
    fails: u32,
    queue: std::collections::VecDeque<u32>,
    next_seq: u32,
}

struct Sta {
    id: u32,
    rng: ChaCha8Rng,
    cats: Vec<Cat>,
    class: u32,
    counters: [u32; 4],
}

pub fn simulate(cfg: &RefConfig) -> Vec<Rec> {
    let (n, k_hi, k_lo) = match cfg.classes {
        None => (1, u32::MAX, u32::MAX),
        Some((kh, kl, n)) => (n, kh, kl),
    };
    let aifs = |ac: usize, class: u32| -> i64 {
        (cfg.sifs + (2 + ac as u64 * n as u64 + class as u64) * cfg.slot) as i64
    };
    let airtime = {
        let bits = cfg.frame_bytes * 8;
        let us = (bits as f64 * 1e6 / cfg.rate_bps as f64).ceil() as u64;
        us.max(1)
    };

    let mut stas: Vec<Sta> = cfg
        .stations
        .iter()
        .map(|(id, _)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(*id as u64);
            Sta {
                id: *id,
                rng,
                cats: (0..4)
                    .map(|ac| Cat {
                        phase: Phase::Off,
                        cw: cfg.cw_min[ac],
                        counter: 0,
                        fails: 0,
                        queue: Default::default(),
                        next_seq: 0,
                    })
                    .collect(),
                class: n - 1,
                counters: [0; 4],
            }
        })
        .collect();
    let mut chan = ChaCha8Rng::seed_from_u64(cfg.seed);
    chan.set_stream(u64::MAX);

    // (time, station index, ac)
    let mut arrivals: Vec<(u64, usize, usize)> = Vec::new();
    for (si, (_, counts)) in cfg.stations.iter().enumerate() {
        for (ac, &count) in counts.iter().enumerate() {
            for m in 0..count as u64 {
                arrivals.push((m * cfg.cbr_interval, si, ac));
            }
        }
    }
    arrivals.sort();
    let mut next_arrival = 0;

    fn arm(s: &mut Sta, ac: usize, wait: i64) {
        let cw = s.cats[ac].cw;
        s.cats[ac].counter = s.rng.gen_range(0..=cw);
        s.cats[ac].phase = Phase::Wait(wait);
    }

    let mut out = Vec::new();
    let mut now = 0u64;
    loop {
        while next_arrival < arrivals.len() && arrivals[next_arrival].0 <= now {
            let (_, si, ac) = arrivals[next_arrival];
            next_arrival += 1;
            let s = &mut stas[si];
            let seq = s.cats[ac].next_seq;
            s.cats[ac].next_seq += 1;
            s.cats[ac].queue.push_back(seq);
            out.push(Rec {
                time: now,
                station: s.id,
                ac,
                kind: Kind::Enqueue,
                seq,
            });
            if s.cats[ac].phase == Phase::Off {
                let w = aifs(ac, s.class);
                arm(s, ac, w);
            }
        }
        let all_empty = stas
            .iter()
            .all(|s| s.cats.iter().all(|c| c.queue.is_empty()));
        if next_arrival == arrivals.len() && all_empty {
            break;
        }

        // internal scheduler
        let mut offers: Vec<(usize, usize)> = Vec::new();
        for (si, s) in stas.iter_mut().enumerate() {
            let ready: Vec<usize> = (0..4)
                .filter(|&ac| s.cats[ac].phase == Phase::Ready)
                .collect();
            if ready.is_empty() {
                continue;
            }
            offers.push((si, ready[0]));
            for &ac in &ready[1..] {
                let seq = *s.cats[ac].queue.front().unwrap();
                out.push(Rec {
                    time: now,
                    station: s.id,
                    ac,
                    kind: Kind::Virtual,
                    seq,
                });
                let c = &mut s.cats[ac];
                c.cw = (c.cw * 2 + 1).min(cfg.cw_max[ac]);
                c.fails += 1;
                if c.fails > cfg.retry_limit {
                    c.queue.pop_front();
                    c.fails = 0;
                    c.cw = cfg.cw_min[ac];
                    out.push(Rec {
                        time: now,
                        station: s.id,
                        ac,
                        kind: Kind::Drop,
                        seq,
                    });
                }
                s.cats[ac].phase = Phase::Off;
                if !s.cats[ac].queue.is_empty() {
                    let w = aifs(ac, s.class);
                    arm(s, ac, w);
                }
            }
        }

        if offers.is_empty() {
            // one idle slot
            for s in &mut stas {
                for c in &mut s.cats {
                    match c.phase {
                        Phase::Wait(w) => {
                            let w = w - cfg.slot as i64;
                            c.phase = if w > 0 {
                                Phase::Wait(w)
                            } else if c.counter == 0 {
                                Phase::Ready
                            } else {
                                Phase::Count
                            };
                        }
                        Phase::Count => {
                            c.counter -= 1;
                            if c.counter == 0 {
                                c.phase = Phase::Ready;
                            }
                        }
                        _ => {}
                    }
                }
            }
            now += cfg.slot;
            continue;
        }

        for &(si, ac) in &offers {
            let s = &stas[si];
            out.push(Rec {
                time: now,
                station: s.id,
                ac,
                kind: Kind::TxStart,
                seq: *s.cats[ac].queue.front().unwrap(),
            });
        }
        let (end, verdict) = if offers.len() == 1 {
            let u: f64 = chan.gen();
            let end = now + airtime + cfg.sifs + cfg.ack_us;
            (
                end,
                if u < cfg.error_prob {
                    Kind::ChannelError
                } else {
                    Kind::Success
                },
            )
        } else {
            (now + airtime, Kind::Collision)
        };
        for &(si, ac) in &offers {
            let s = &mut stas[si];
            let seq = s.cats[ac].queue.pop_front().unwrap();
            out.push(Rec {
                time: end,
                station: s.id,
                ac,
                kind: verdict,
                seq,
            });
            if verdict == Kind::Success {
                s.cats[ac].cw = cfg.cw_min[ac];
                s.cats[ac].fails = 0;
                if cfg.classes.is_some() {
                    s.counters[ac] += 1;
                    let limit = if ac < 2 { k_hi } else { k_lo };
                    if s.counters[ac] == limit {
                        s.counters[ac] = 0;
                        let old = s.class;
                        if ac < 2 {
                            if s.class > 0 {
                                s.class -= 1;
                            }
                        } else if s.class < n - 1 {
                            s.class += 1;
                        }
                        if old != s.class {
                            out.push(Rec {
                                time: end,
                                station: s.id,
                                ac,
                                kind: Kind::ClassChange(old as u8, s.class as u8),
                                seq,
                            });
                        }
                    }
                }
            } else {
                let c = &mut s.cats[ac];
                c.cw = (c.cw * 2 + 1).min(cfg.cw_max[ac]);
                c.fails += 1;
                if c.fails > cfg.retry_limit {
                    c.fails = 0;
                    c.cw = cfg.cw_min[ac];
                    out.push(Rec {
                        time: end,
                        station: s.id,
                        ac,
                        kind: Kind::Drop,
                        seq,
                    });
                } else {
                    c.queue.push_front(seq);
                }
            }
            s.cats[ac].phase = Phase::Off;
            if !s.cats[ac].queue.is_empty() {
                let w = aifs(ac, s.class);
                arm(s, ac, w);
            }
        }
        // medium busy until `end`: all waiting/counting entities restart AIFS
        for s in &mut stas {
            for ac in 0..4 {
                if matches!(s.cats[ac].phase, Phase::Wait(_) | Phase::Count) {
                    s.cats[ac].phase = Phase::Wait(aifs(ac, s.class));
                }
            }
        }
        now = end;
    }
    out
}

/// Convert an engine trace into reference records.
pub fn from_engine(report: &edca_core::SimulationReport) -> Vec<Rec> {
    use edca_core::metrics::EventKind as E;
    report
        .events
        .iter()
        .map(|e| Rec {
            time: e.time.as_us(),
            station: e.station,
            ac: e.ac.index(),
            kind: match e.kind {
                E::Enqueue => Kind::Enqueue,
                E::TxStart => Kind::TxStart,
                E::Success => Kind::Success,
                E::Collision => Kind::Collision,
                E::ChannelError => Kind::ChannelError,
                E::Drop => Kind::Drop,
                E::ClassChange { before, after } => Kind::ClassChange(before, after),
                E::VirtualCollision => Kind::Virtual,
            },
            seq: e.seq,
        })
        .collect()
}

/// Same configuration expressed as an engine scenario.
pub fn to_scenario(cfg: &RefConfig) -> edca_core::Scenario {
    use edca_core::{Discipline, Scenario, StationSpec};
    let mut s = Scenario::new(
        "oracle",
        cfg.stations
            .iter()
            .map(|(id, c)| StationSpec::new(*id, *c))
            .collect(),
    );
    s.discipline = match cfg.classes {
        None => Discipline::Basic,
        Some((kh, kl, n)) => Discipline::modified_split(kh, kl, n as u8).unwrap(),
    };
    s.seed = cfg.seed;
    s.params.cw_min = cfg.cw_min;
    s.params.cw_max = cfg.cw_max;
    s.params.slot_us = cfg.slot;
    s.params.sifs_us = cfg.sifs;
    s.params.retry_limit = cfg.retry_limit;
    s.channel.data_rate_bps = cfg.rate_bps;
    s.channel.ack_duration_us = cfg.ack_us;
    s.channel.error_prob = cfg.error_prob;
    s.frame_bytes = cfg.frame_bytes as u32;
    s.cbr_interval_us = cfg.cbr_interval;
    s
}
