//! Seed-grid experiments over scenarios and algorithms.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cell::Scenario;
use crate::search::{search, Algorithm, SearchConfig, SearchError};

/// Environment variable capping the worker count of a batch.
pub const THREADS_ENV: &str = "HAZARDFORGE_THREADS";

#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub scenarios: Vec<Scenario>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// Template for every run; algorithm and seed are overwritten.
    pub config: SearchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRow {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub found: bool,
    pub episodes_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub successes: usize,
    pub total: usize,
    /// Failed runs count with the episode cap.
    pub mean_episodes: f64,
}

impl BatchSpec {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.scenarios.is_empty() {
            return bad("no scenarios given");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms given");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        self.config.validate()
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs the full grid. Rows come back ordered by (scenario, algorithm, seed)
/// in input order.
pub fn run_batch(spec: &BatchSpec) -> Result<Vec<BatchRow>, SearchError> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for (si, _) in spec.scenarios.iter().enumerate() {
        for &algorithm in &spec.algorithms {
            for &seed in &spec.seeds {
                jobs.push((si, algorithm, seed));
            }
        }
    }
    let run = || {
        jobs.par_iter()
            .map(|&(si, algorithm, seed)| {
                let scenario = &spec.scenarios[si];
                let cfg = SearchConfig {
                    algorithm,
                    seed,
                    ..spec.config
                };
                let outcome = search(scenario, &cfg)?;
                Ok(BatchRow {
                    scenario: scenario.name.clone(),
                    algorithm,
                    seed,
                    found: outcome.found,
                    episodes_used: outcome.episodes_used,
                })
            })
            .collect::<Result<Vec<_>, SearchError>>()
    };
    match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SearchError::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

pub fn summarize(rows: &[BatchRow], max_episodes: usize) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for r in rows {
        let idx = match out
            .iter()
            .position(|c| c.scenario == r.scenario && c.algorithm == r.algorithm)
        {
            Some(i) => i,
            None => {
                out.push(CellSummary {
                    scenario: r.scenario.clone(),
                    algorithm: r.algorithm,
                    successes: 0,
                    total: 0,
                    mean_episodes: 0.0,
                });
                out.len() - 1
            }
        };
        let c = &mut out[idx];
        c.total += 1;
        if r.found {
            c.successes += 1;
        }
        let eps = if r.found { r.episodes_used } else { max_episodes };
        c.mean_episodes += (eps as f64 - c.mean_episodes) / c.total as f64;
    }
    out
}

pub fn write_csv(rows: &[BatchRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Console matrix: one row per algorithm, two columns (success rate, mean
/// episodes) per scenario.
pub fn format_table(summaries: &[CellSummary]) -> String {
    let mut scenarios: Vec<&str> = Vec::new();
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for s in summaries {
        if !scenarios.contains(&s.scenario.as_str()) {
            scenarios.push(&s.scenario);
        }
        if !algorithms.contains(&s.algorithm) {
            algorithms.push(s.algorithm);
        }
    }
    let width = scenarios.iter().map(|s| s.len()).max().unwrap_or(0).max(18);
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "");
    for s in &scenarios {
        let _ = write!(out, " | {s:^width$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<10}", "algorithm");
    for _ in &scenarios {
        let _ = write!(out, " | {:>8} {:>w2$}", "success", "avg eps", w2 = width - 9);
    }
    out.push('\n');
    for a in &algorithms {
        let _ = write!(out, "{:<10}", a.name());
        for s in &scenarios {
            match summaries.iter().find(|c| c.scenario == *s && c.algorithm == *a) {
                Some(c) => {
                    let rate = format!("{}/{}", c.successes, c.total);
                    let _ = write!(out, " | {rate:>8} {:>w2$.1}", c.mean_episodes, w2 = width - 9);
                }
                None => {
                    let _ = write!(out, " | {:>width$}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
