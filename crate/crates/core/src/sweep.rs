//! Multi-seed comparison of disciplines over one scenario.

use std::fmt::Write as _;

use crate::engine;
use crate::error::{Error, Result};
use crate::metrics::Summary;
use crate::params::Discipline;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub label: String,
    pub discipline: Discipline,
}

impl Variant {
    pub fn new(discipline: Discipline) -> Self {
        Variant {
            label: discipline.to_string(),
            discipline,
        }
    }
}

/// Parse `basic` or `mod:k=10:n=6` (optionally `:k_low=20`).
pub fn parse_variant(text: &str) -> Result<Variant> {
    let text = text.trim();
    if text == "basic" {
        return Ok(Variant::new(Discipline::Basic));
    }
    let mut parts = text.split(':');
    match parts.next() {
        Some("mod") | Some("modified") => {}
        _ => {
            return Err(Error::config(
                "variants",
                format!("unknown variant {text:?}; expected basic or mod:k=<k>:n=<n>"),
            ))
        }
    }
    let (mut k, mut k_low, mut n) = (None, None, None);
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Error::config("variants", format!("expected key=value, got {part:?}"))
        })?;
        let parsed: i64 = value
            .parse()
            .map_err(|_| Error::config(key, format!("not an integer: {value:?}")))?;
        match key {
            "k" => k = Some(parsed),
            "k_low" => k_low = Some(parsed),
            "n" => n = Some(parsed),
            other => return Err(Error::config(other, "unknown variant parameter")),
        }
    }
    let k = k.ok_or_else(|| Error::config("k", "missing in variant"))?;
    let n = n.ok_or_else(|| Error::config("n", "missing in variant"))?;
    let k_low = k_low.unwrap_or(k);
    for (key, v) in [("k", k), ("k_low", k_low)] {
        if v < 1 || v > u32::MAX as i64 {
            return Err(Error::config(
                key,
                format!("decision factor must be >= 1, got {v}"),
            ));
        }
    }
    if !(1..=crate::params::MAX_CLASSES as i64).contains(&n) {
        return Err(Error::config(
            "n",
            format!("class count must be in 1..=6, got {n}"),
        ));
    }
    let discipline = Discipline::modified_split(k as u32, k_low as u32, n as u8)?;
    Ok(Variant {
        label: text.to_string(),
        discipline,
    })
}

pub fn parse_variants(list: &str) -> Result<Vec<Variant>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_variant)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantStats {
    pub label: String,
    pub discipline: Discipline,
    pub runs: Vec<Summary>,
    pub collisions_mean: [f64; 4],
    pub collisions_sd: [f64; 4],
    pub util_mean: [f64; 4],
    pub total_time_mean: f64,
    pub total_time_sd: f64,
}

impl VariantStats {
    pub fn from_runs(variant: &Variant, runs: Vec<Summary>) -> Self {
        let per_ac = |f: &dyn Fn(&Summary, usize) -> f64| -> ([f64; 4], [f64; 4]) {
            let mut mean = [0.0; 4];
            let mut sd = [0.0; 4];
            for i in 0..4 {
                let xs: Vec<f64> = runs.iter().map(|r| f(r, i)).collect();
                (mean[i], sd[i]) = mean_sd(&xs);
            }
            (mean, sd)
        };
        let (collisions_mean, collisions_sd) = per_ac(&|r, i| r.collisions[i] as f64);
        let (util_mean, _) = per_ac(&|r, i| r.utilization[i]);
        let times: Vec<f64> = runs.iter().map(|r| r.total_time_us as f64).collect();
        let (total_time_mean, total_time_sd) = mean_sd(&times);
        VariantStats {
            label: variant.label.clone(),
            discipline: variant.discipline,
            runs,
            collisions_mean,
            collisions_sd,
            util_mean,
            total_time_mean,
            total_time_sd,
        }
    }

    pub fn total_collisions_mean(&self) -> f64 {
        self.collisions_mean.iter().sum()
    }
}

/// Sample mean and sample standard deviation (`n - 1` denominator).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Run every variant for seeds `1..=seeds`.
pub fn compare(base: &Scenario, variants: &[Variant], seeds: u64) -> Result<Vec<VariantStats>> {
    variants
        .iter()
        .map(|v| {
            let runs = (1..=seeds)
                .map(|seed| {
                    let s = base.clone().with_discipline(v.discipline).with_seed(seed);
                    engine::run(&s).map(|r| Summary::from_report(&r))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(VariantStats::from_runs(v, runs))
        })
        .collect()
}

pub fn compare_csv(stats: &[VariantStats]) -> String {
    let mut out = String::from("variant,seeds");
    for i in 0..4 {
        let _ = write!(out, ",collisions_ac{i}_mean");
    }
    for i in 0..4 {
        let _ = write!(out, ",collisions_ac{i}_sd");
    }
    for i in 0..4 {
        let _ = write!(out, ",util_ac{i}_mean");
    }
    out.push_str(",total_time_us_mean,total_time_us_sd\n");
    for s in stats {
        let _ = write!(out, "{},{}", s.label, s.runs.len());
        for v in s.collisions_mean.iter().chain(&s.collisions_sd) {
            let _ = write!(out, ",{v:.3}");
        }
        for v in &s.util_mean {
            let _ = write!(out, ",{v:.6}");
        }
        let _ = writeln!(out, ",{:.1},{:.1}", s.total_time_mean, s.total_time_sd);
    }
    out
}
