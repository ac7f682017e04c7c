//! Browser bindings for the simulator demo page.
//!
//! Every export takes plain numbers/strings and returns a JSON string, so the
//! page needs no generated TypeScript types. The `*_json` functions hold the
//! logic and are ordinary Rust, which keeps them testable off the browser.

use edca_core::metrics::{admission_trace, Summary};
use edca_core::sweep::{compare, Variant};
use edca_core::{engine, AccessCategory, Discipline, Scenario};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest seed count the page may request in one comparison.
pub const MAX_SEEDS: u32 = 50;

fn preset(name: &str) -> Result<Scenario, String> {
    match name {
        "table2" => Ok(Scenario::table2()),
        "table3" => Ok(Scenario::table3()),
        other => Err(format!(
            "unknown scenario {other:?}; expected table2 or table3"
        )),
    }
}

fn modified(k: u32, n: u8) -> Result<Discipline, String> {
    Discipline::modified(k, n).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data always serializes")
}

#[derive(Serialize)]
struct RunPair {
    basic: Summary,
    modified: Summary,
}

/// Run one seed of a preset under both disciplines.
pub fn run_pair_json(scenario: &str, k: u32, n: u8, seed: u64) -> Result<String, String> {
    let base = preset(scenario)?.with_seed(seed);
    let d = modified(k, n)?;
    let run = |s: &Scenario| {
        engine::run(s)
            .map(|r| Summary::from_report(&r))
            .map_err(|e| e.to_string())
    };
    Ok(to_json(&RunPair {
        basic: run(&base)?,
        modified: run(&base.clone().with_discipline(d))?,
    }))
}

#[derive(Serialize)]
struct Trace {
    ac: &'static str,
    basic: Vec<u64>,
    modified: Vec<u64>,
}

/// Completion time (µs) of the 1st, 2nd, … successful frame of one access
/// category, under both disciplines.
pub fn admission_json(scenario: &str, ac: u8, k: u32, n: u8, seed: u64) -> Result<String, String> {
    let ac = AccessCategory::from_index(ac as usize)
        .ok_or_else(|| format!("access category {ac} out of range 0..=3"))?;
    let base = preset(scenario)?.with_seed(seed);
    let d = modified(k, n)?;
    let times = |s: &Scenario| -> Result<Vec<u64>, String> {
        let report = engine::run(s).map_err(|e| e.to_string())?;
        Ok(admission_trace(&report, ac)
            .into_iter()
            .map(|a| a.time.as_us())
            .collect())
    };
    Ok(to_json(&Trace {
        ac: ac.short_name(),
        basic: times(&base)?,
        modified: times(&base.clone().with_discipline(d))?,
    }))
}

#[derive(Serialize)]
struct CompareRow {
    label: String,
    collisions_mean: [f64; 4],
    collisions_sd: [f64; 4],
    util_mean: [f64; 4],
    total_time_mean: f64,
    total_time_sd: f64,
}

/// Seeds 1..=`seeds` of basic against each `k` in `ks` at class count `n`.
pub fn compare_json(scenario: &str, ks: &[u32], n: u8, seeds: u32) -> Result<String, String> {
    if seeds == 0 || seeds > MAX_SEEDS {
        return Err(format!("seeds must be in 1..={MAX_SEEDS}, got {seeds}"));
    }
    let base = preset(scenario)?;
    let mut variants = vec![Variant::new(Discipline::Basic)];
    for &k in ks {
        variants.push(Variant::new(modified(k, n)?));
    }
    let stats = compare(&base, &variants, seeds as u64).map_err(|e| e.to_string())?;
    let rows: Vec<CompareRow> = stats
        .into_iter()
        .map(|s| CompareRow {
            label: s.label,
            collisions_mean: s.collisions_mean,
            collisions_sd: s.collisions_sd,
            util_mean: s.util_mean,
            total_time_mean: s.total_time_mean,
            total_time_sd: s.total_time_sd,
        })
        .collect();
    Ok(to_json(&rows))
}

#[wasm_bindgen]
pub fn run_pair(scenario: &str, k: u32, n: u8, seed: u32) -> Result<String, JsError> {
    run_pair_json(scenario, k, n, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn admission(scenario: &str, ac: u8, k: u32, n: u8, seed: u32) -> Result<String, JsError> {
    admission_json(scenario, ac, k, n, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare_k(scenario: &str, ks: &[u32], n: u8, seeds: u32) -> Result<String, JsError> {
    compare_json(scenario, ks, n, seeds).map_err(|e| JsError::new(&e))
}
