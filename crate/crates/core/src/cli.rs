//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::batch::{format_table, run_batch, summarize, write_csv, BatchSpec};
use crate::cell::{builtin_scenario, load_scenario, Scenario};
use crate::human::{Action, ACTION_COUNT};
use crate::render::render_frames;
use crate::search::{replay, search, Algorithm, SearchConfig};
use crate::trace::{parse_jsonl, trace_records, write_jsonl, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SCENARIO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hazardforge",
    version,
    about = "Search human behaviour that drives a robot cell into unsafe contact"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one search and optionally write the hazard trace and a summary.
    Run(RunArgs),
    /// Run a scenario x algorithm x seed grid and print success statistics.
    Batch(BatchArgs),
    /// Replay an action sequence and write its substep trace.
    Replay(ReplayArgs),
    /// Render SVG frames from a trace.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Maximum number of episodes per search.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    episodes: u64,
    /// Actions per episode.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    episode_len: u64,
    /// Exploration constant of the tree policy.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c_uct: f64,
    /// Episodes between root commitments (mcts2).
    #[arg(long, default_value_t = 25, value_parser = clap::value_parser!(u64).range(1..))]
    commit_interval: u64,
    /// Extra reward added when an episode reaches an unsafe state.
    #[arg(long, default_value_t = 0.0)]
    terminal_bonus: f64,
}

impl SearchArgs {
    fn config(&self, algorithm: Algorithm, seed: u64) -> SearchConfig {
        SearchConfig {
            algorithm,
            seed,
            max_episodes: self.episodes as usize,
            episode_len: self.episode_len as usize,
            c_uct: self.c_uct,
            commit_interval: self.commit_interval as usize,
            terminal_bonus: self.terminal_bonus,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file path or builtin:NAME.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    algo: Algorithm,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    search: SearchArgs,
    /// Hazard trace output (JSONL), written only when a hazard is found.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary output (JSON).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Comma-separated scenario references.
    #[arg(long, value_delimiter = ',', required = true)]
    scenarios: Vec<String>,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', required = true)]
    algos: Vec<Algorithm>,
    /// Number of seeds; runs seeds 1..=N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "seed_list")]
    seeds: Option<u64>,
    /// Explicit comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    seed_list: Vec<u64>,
    #[command(flatten)]
    search: SearchArgs,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    scenario: String,
    /// File with action indices (whitespace or comma separated, a JSON
    /// array, or a summary JSON).
    #[arg(long)]
    actions: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Render every k-th substep record.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    every: u64,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Resolves `builtin:NAME` or a file path.
pub fn resolve_scenario(reference: &str) -> Result<Scenario, String> {
    if let Some(name) = reference.strip_prefix("builtin:") {
        return builtin_scenario(name).map_err(|e| format!("scenario `{reference}`: {e}"));
    }
    let bytes = fs::read(reference).map_err(|e| format!("scenario `{reference}`: {e}"))?;
    load_scenario(&bytes).map_err(|e| format!("scenario `{reference}`: {e}"))
}

fn scenario_arg(reference: &str) -> Result<Scenario, Failure> {
    resolve_scenario(reference).map_err(|m| Failure::new(EXIT_SCENARIO, m))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

/// Parses action indices from the accepted file formats.
pub fn parse_action_list(text: &str) -> Result<Vec<usize>, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("actions file: {e}"))?;
        let list = match &value {
            serde_json::Value::Array(_) => &value,
            serde_json::Value::Object(o) => o
                .get("hazard_actions")
                .ok_or("actions file: object has no `hazard_actions` field")?,
            _ => unreachable!(),
        };
        let arr = list.as_array().ok_or("actions file: expected an array")?;
        return arr
            .iter()
            .map(|v| {
                v.as_u64()
                    .map(|n| n as usize)
                    .ok_or_else(|| format!("actions file: `{v}` is not a non-negative integer"))
            })
            .collect();
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| format!("actions file: `{t}` is not a non-negative integer"))
        })
        .collect()
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> CmdResult {
    let scenario = scenario_arg(&a.scenario)?;
    let cfg = a.search.config(a.algo, a.seed);
    cfg.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let outcome = search(&scenario, &cfg).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    let summary = Summary::new(&scenario, &cfg, &outcome);
    if let Some(path) = &a.summary {
        write_file(path, &summary.to_json())?;
    }
    if let (Some(path), Some(actions)) = (&a.out, &outcome.hazard_actions) {
        let steps = replay(&scenario, actions).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        write_file(path, &write_jsonl(&trace_records(&steps, &scenario)))?;
    }
    let _ = if outcome.found {
        writeln!(
            out,
            "{} {} seed {}: hazard found after {} episodes, actions {:?}",
            scenario.name, cfg.algorithm, cfg.seed, outcome.episodes_used, summary.hazard_actions
        )
    } else {
        writeln!(
            out,
            "{} {} seed {}: no hazard in {} episodes",
            scenario.name, cfg.algorithm, cfg.seed, outcome.episodes_used
        )
    };
    Ok(())
}

fn cmd_batch(a: BatchArgs, out: &mut dyn Write) -> CmdResult {
    let scenarios = a
        .scenarios
        .iter()
        .map(|r| scenario_arg(r))
        .collect::<Result<Vec<_>, _>>()?;
    let seeds: Vec<u64> = match a.seeds {
        Some(n) => (1..=n).collect(),
        None if !a.seed_list.is_empty() => a.seed_list.clone(),
        None => return Err(Failure::new(EXIT_USAGE, "one of --seeds or --seed-list is required")),
    };
    let spec = BatchSpec {
        scenarios,
        algorithms: a.algos.clone(),
        seeds,
        config: a.search.config(Algorithm::Random, 0),
    };
    spec.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let rows = run_batch(&spec).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    if let Some(path) = &a.out {
        let csv = write_csv(&rows).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        write_file(path, &csv)?;
    }
    let _ = out.write_all(format_table(&summarize(&rows, spec.config.max_episodes)).as_bytes());
    Ok(())
}

fn cmd_replay(a: ReplayArgs, out: &mut dyn Write) -> CmdResult {
    let scenario = scenario_arg(&a.scenario)?;
    let text =
        fs::read_to_string(&a.actions).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.actions.display())))?;
    let indices = parse_action_list(&text).map_err(|m| Failure::new(EXIT_USAGE, m))?;
    let actions = indices
        .iter()
        .map(|&i| {
            Action::from_index(i)
                .map_err(|_| Failure::new(EXIT_USAGE, format!("action index {i} outside [0, {ACTION_COUNT})")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if actions.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "actions file holds no actions"));
    }
    let steps = replay(&scenario, &actions).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    let records = trace_records(&steps, &scenario);
    if let Some(path) = &a.out {
        write_file(path, &write_jsonl(&records))?;
    }
    let _ = match records.iter().find(|r| r.unsafe_state) {
        Some(r) => writeln!(
            out,
            "unsafe at t={} s (action {}, substep {}), {} records",
            r.t,
            r.step,
            r.substep,
            records.len()
        ),
        None => writeln!(out, "no unsafe state, {} records", records.len()),
    };
    Ok(())
}

fn cmd_render(a: RenderArgs, out: &mut dyn Write) -> CmdResult {
    let scenario = scenario_arg(&a.scenario)?;
    let text =
        fs::read_to_string(&a.trace).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.trace.display())))?;
    let records = parse_jsonl(&text).map_err(|e| Failure::new(EXIT_SCENARIO, format!("trace: {e}")))?;
    let frames = render_frames(&scenario, &records, a.every as usize)
        .map_err(|e| Failure::new(EXIT_SCENARIO, format!("trace: {e}")))?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.out_dir.display())))?;
    for (name, svg) in &frames {
        write_file(&a.out_dir.join(name), svg)?;
    }
    let _ = writeln!(out, "wrote {} frames to {}", frames.len(), a.out_dir.display());
    Ok(())
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Batch(a) => cmd_batch(a, out),
        Command::Replay(a) => cmd_replay(a, out),
        Command::Render(a) => cmd_render(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_list_formats() {
        assert_eq!(parse_action_list("1 2,3\n4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_action_list("[5, 6]").unwrap(), vec![5, 6]);
        assert_eq!(parse_action_list(r#"{"hazard_actions":[7]}"#).unwrap(), vec![7]);
        assert!(parse_action_list("x").is_err());
        assert!(parse_action_list("[-1]").is_err());
    }
}
