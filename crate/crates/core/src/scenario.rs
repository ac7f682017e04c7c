//! Scenario documents (TOML) and their validated in-memory form.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::params::{AccessCategory, Discipline, EdcaParams, DEFAULT_FRAME_BYTES, MAX_CLASSES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationSpec {
    pub station_id: u32,
    /// Frames to send per access category.
    pub packet_counts: [u32; 4],
}

impl StationSpec {
    pub fn new(station_id: u32, packet_counts: [u32; 4]) -> Self {
        StationSpec {
            station_id,
            packet_counts,
        }
    }

    pub fn count(&self, ac: AccessCategory) -> u32 {
        self.packet_counts[ac.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub stations: Vec<StationSpec>,
    pub discipline: Discipline,
    pub channel: ChannelConfig,
    pub params: EdcaParams,
    pub seed: u64,
    /// Spacing between consecutive frames of one (station, AC) source;
    /// 0 puts every frame in the queue at t = 0.
    pub cbr_interval_us: u64,
    pub frame_bytes: u32,
    /// Contention windows used only when the discipline is plain EDCA.
    #[serde(default)]
    pub basic_cw: Option<CwOverride>,
    /// Contention windows used only when the discipline is the classed one.
    #[serde(default)]
    pub modified_cw: Option<CwOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CwOverride {
    pub cw_min: [u32; 4],
    pub cw_max: [u32; 4],
}

impl Scenario {
    pub fn new(name: impl Into<String>, stations: Vec<StationSpec>) -> Self {
        Scenario {
            name: name.into(),
            stations,
            discipline: Discipline::Basic,
            channel: ChannelConfig::default(),
            params: EdcaParams::default(),
            seed: 1,
            cbr_interval_us: 0,
            frame_bytes: DEFAULT_FRAME_BYTES,
            basic_cw: None,
            modified_cw: None,
        }
    }

    /// Shared parameters with the discipline's window override applied.
    pub fn effective_params(&self) -> EdcaParams {
        let over = match self.discipline {
            Discipline::Basic => self.basic_cw,
            Discipline::Modified { .. } => self.modified_cw,
        };
        let mut p = self.params;
        if let Some(o) = over {
            p.cw_min = o.cw_min;
            p.cw_max = o.cw_max;
        }
        p
    }

    pub fn with_discipline(mut self, d: Discipline) -> Self {
        self.discipline = d;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn total_frames(&self) -> u64 {
        self.stations
            .iter()
            .flat_map(|s| s.packet_counts)
            .map(u64::from)
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.stations.is_empty() {
            return Err(Error::config(
                "stations",
                "at least one station is required",
            ));
        }
        let mut ids: Vec<u32> = self.stations.iter().map(|s| s.station_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("stations", "station ids must be unique"));
        }
        if self.frame_bytes == 0 {
            return Err(Error::config("frame_bytes", "must be positive"));
        }
        self.discipline.validate().map_err(param_to_config)?;
        self.params.validate().map_err(param_to_config)?;
        for (key, over) in [
            ("basic_cw", self.basic_cw),
            ("modified_cw", self.modified_cw),
        ] {
            if let Some(o) = over {
                let p = EdcaParams {
                    cw_min: o.cw_min,
                    cw_max: o.cw_max,
                    ..self.params
                };
                p.validate()
                    .map_err(|e| Error::config(key, e.to_string()))?;
            }
        }
        self.channel.validate().map_err(param_to_config)?;
        Ok(())
    }

    /// Preset `table2`: five stations with mixed multimedia load.
    pub fn table2() -> Self {
        Scenario::new(
            "table2",
            vec![
                StationSpec::new(1, [20, 10, 20, 40]),
                StationSpec::new(2, [30, 20, 0, 100]),
                StationSpec::new(3, [60, 0, 30, 20]),
                StationSpec::new(4, [10, 10, 0, 90]),
                StationSpec::new(5, [0, 40, 20, 0]),
            ],
        )
    }

    /// Preset `table3`: no voice or video at all.
    pub fn table3() -> Self {
        Scenario::new(
            "table3",
            vec![
                StationSpec::new(1, [0, 0, 200, 400]),
                StationSpec::new(2, [0, 0, 600, 1000]),
                StationSpec::new(3, [0, 0, 300, 200]),
                StationSpec::new(4, [0, 0, 500, 900]),
                StationSpec::new(5, [0, 0, 200, 0]),
            ],
        )
    }
}

fn param_to_config(e: Error) -> Error {
    match e {
        Error::InvalidParam { key, reason } => Error::config(key, reason),
        other => other,
    }
}

// Raw document shape. Counts are signed so that negative values produce a
// targeted message instead of a generic type error.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    mode: Option<String>,
    k: Option<i64>,
    k_low: Option<i64>,
    n: Option<i64>,
    seed: Option<u64>,
    slot_us: Option<u64>,
    sifs_us: Option<u64>,
    data_rate_bps: Option<u64>,
    ack_duration_us: Option<u64>,
    header_overhead_bytes: Option<u32>,
    error_prob: Option<f64>,
    retry_limit: Option<u32>,
    cbr_interval_us: Option<u64>,
    frame_bytes: Option<u32>,
    cw_min: Option<[u32; 4]>,
    cw_max: Option<[u32; 4]>,
    basic_cw_min: Option<[u32; 4]>,
    basic_cw_max: Option<[u32; 4]>,
    modified_cw_min: Option<[u32; 4]>,
    modified_cw_max: Option<[u32; 4]>,
    silent_stations: Option<u32>,
    stations: Option<Vec<RawStation>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStation {
    id: Option<i64>,
    voice: Option<i64>,
    video: Option<i64>,
    best_effort: Option<i64>,
    background: Option<i64>,
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(key, "missing required key"))
}

fn non_negative(v: i64, key: String) -> Result<u32> {
    u32::try_from(v)
        .map_err(|_| Error::config(key, format!("must be a non-negative count, got {v}")))
}

/// Command-line style overrides applied on top of a scenario document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub mode: Option<String>,
    pub k: Option<i64>,
    pub k_low: Option<i64>,
    pub n: Option<i64>,
    pub seed: Option<u64>,
}

/// Parse and validate a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    load_scenario_with(text, &Overrides::default())
}

/// Parse a scenario document, letting `overrides` win over the file.
pub fn load_scenario_with(text: &str, overrides: &Overrides) -> Result<Scenario> {
    let mut raw: RawScenario = toml::from_str(text).map_err(|e| {
        let key = e
            .message()
            .split('`')
            .nth(1)
            .unwrap_or("document")
            .to_string();
        Error::config(key, e.message().trim().to_string())
    })?;
    raw.mode = overrides.mode.clone().or(raw.mode);
    raw.k = overrides.k.or(raw.k);
    raw.k_low = overrides.k_low.or(raw.k_low);
    raw.n = overrides.n.or(raw.n);
    raw.seed = overrides.seed.or(raw.seed);

    let name = required(raw.name, "name")?;
    let mode = required(raw.mode, "mode")?;
    let seed = required(raw.seed, "seed")?;
    let raw_stations = required(raw.stations, "stations")?;

    let discipline = match mode.as_str() {
        "basic" => Discipline::Basic,
        "modified" => {
            let k = required(raw.k, "k")?;
            let n = required(raw.n, "n")?;
            let k_low = raw.k_low.unwrap_or(k);
            if k < 1 {
                return Err(Error::config(
                    "k",
                    format!("decision factor must be >= 1, got {k}"),
                ));
            }
            if k_low < 1 {
                return Err(Error::config(
                    "k_low",
                    format!("decision factor must be >= 1, got {k_low}"),
                ));
            }
            if !(1..=MAX_CLASSES as i64).contains(&n) {
                return Err(Error::config(
                    "n",
                    format!("class count must be in 1..={MAX_CLASSES} (AIFS values must stay distinct), got {n}"),
                ));
            }
            Discipline::Modified {
                k_high: k as u32,
                k_low: k_low as u32,
                n: n as u8,
            }
        }
        other => {
            return Err(Error::config(
                "mode",
                format!("expected \"basic\" or \"modified\", got {other:?}"),
            ))
        }
    };

    let mut stations = Vec::with_capacity(raw_stations.len());
    for (idx, rs) in raw_stations.into_iter().enumerate() {
        let key = |field: &str| format!("stations[{idx}].{field}");
        let id = non_negative(required(rs.id, &key("id"))?, key("id"))?;
        let count = |v: Option<i64>, field: &str| non_negative(v.unwrap_or(0), key(field));
        stations.push(StationSpec::new(
            id,
            [
                count(rs.voice, "voice")?,
                count(rs.video, "video")?,
                count(rs.best_effort, "best_effort")?,
                count(rs.background, "background")?,
            ],
        ));
    }
    if let Some(extra) = raw.silent_stations {
        let base = stations.iter().map(|s| s.station_id).max().unwrap_or(0) + 1;
        stations.extend((0..extra).map(|i| StationSpec::new(base + i, [0; 4])));
    }

    let mut params = EdcaParams::default();
    if let Some(v) = raw.slot_us {
        params.slot_us = v;
    }
    if let Some(v) = raw.sifs_us {
        params.sifs_us = v;
    }
    if let Some(v) = raw.retry_limit {
        params.retry_limit = v;
    }
    if let Some(v) = raw.cw_min {
        params.cw_min = v;
    }
    if let Some(v) = raw.cw_max {
        params.cw_max = v;
    }

    let mut channel = ChannelConfig::default();
    if let Some(v) = raw.data_rate_bps {
        channel.data_rate_bps = v;
    }
    if let Some(v) = raw.ack_duration_us {
        channel.ack_duration_us = v;
    }
    if let Some(v) = raw.header_overhead_bytes {
        channel.header_overhead_bytes = v;
    }
    if let Some(v) = raw.error_prob {
        channel.error_prob = v;
    }

    let over = |min: Option<[u32; 4]>, max: Option<[u32; 4]>| {
        (min.is_some() || max.is_some()).then(|| CwOverride {
            cw_min: min.unwrap_or(params.cw_min),
            cw_max: max.unwrap_or(params.cw_max),
        })
    };
    let basic_cw = over(raw.basic_cw_min, raw.basic_cw_max);
    let modified_cw = over(raw.modified_cw_min, raw.modified_cw_max);

    let scenario = Scenario {
        name,
        stations,
        discipline,
        channel,
        params,
        seed,
        cbr_interval_us: raw.cbr_interval_us.unwrap_or(0),
        frame_bytes: raw.frame_bytes.unwrap_or(DEFAULT_FRAME_BYTES),
        basic_cw,
        modified_cw,
    };
    scenario.validate()?;
    Ok(scenario)
}
