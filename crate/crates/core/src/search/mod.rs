//! Hazard search: episode runner, uniform random baseline and UCT tree
//! search in two variants (fixed root, and periodically committing root).

mod mcts;
mod random;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::Scenario;
use crate::human::{Action, ACTION_COUNT};
use crate::world::{init, step_action, EpisodeSpec, StepInfo, WorldError, WorldState};

pub use mcts::{mcts_search, ucb_score, Edge, MctsEngine, NodeId, TreeNode};
pub use random::random_search;

/// Seeded generator used by every search: ChaCha8 seeded through `seed_from_u64`.
pub type SearchRng = ChaCha8Rng;

pub fn search_rng(seed: u64) -> SearchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn uniform_action(rng: &mut SearchRng) -> Action {
    Action::from_index(rng.gen_range(0..ACTION_COUNT)).expect("in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Random,
    Mcts1,
    Mcts2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Random, Algorithm::Mcts1, Algorithm::Mcts2];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::Mcts1 => "mcts1",
            Algorithm::Mcts2 => "mcts2",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Algorithm::Random),
            "mcts1" => Ok(Algorithm::Mcts1),
            "mcts2" => Ok(Algorithm::Mcts2),
            other => Err(format!("unknown algorithm `{other}` (expected random, mcts1 or mcts2)")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub max_episodes: usize,
    /// Actions per episode, counted from the initial state.
    pub episode_len: usize,
    pub c_uct: f64,
    /// Episodes between root commitments (MCTS2 only).
    pub commit_interval: usize,
    pub terminal_bonus: f64,
}

impl SearchConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        SearchConfig {
            algorithm,
            seed,
            max_episodes: 200,
            episode_len: 8,
            c_uct: std::f64::consts::SQRT_2,
            commit_interval: 25,
            terminal_bonus: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.max_episodes < 1 {
            return bad("max_episodes must be >= 1");
        }
        if self.episode_len < 1 {
            return bad("episode_len must be >= 1");
        }
        if !(self.c_uct.is_finite() && self.c_uct >= 0.0) {
            return bad("c_uct must be finite and >= 0");
        }
        if self.commit_interval < 1 {
            return bad("commit_interval must be >= 1");
        }
        if !self.terminal_bonus.is_finite() {
            return bad("terminal_bonus must be finite");
        }
        Ok(())
    }

    pub(crate) fn episode_spec(&self) -> EpisodeSpec {
        EpisodeSpec {
            len: self.episode_len,
            terminal_bonus: self.terminal_bonus,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("algorithm {0} is not handled by this entry point")]
    WrongAlgorithm(Algorithm),
    #[error("reported hazard does not replay to an unsafe state")]
    Unsound,
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Actions executed from the episode's root state.
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub return_value: f64,
    pub found_unsafe: bool,
    /// 0-based index into `actions` of the unsafe step.
    pub unsafe_step: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeLogEntry {
    /// 1-based.
    pub episode: usize,
    pub return_value: f64,
    pub found_unsafe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub found: bool,
    /// Full action sequence from the initial state when `found`.
    pub hazard_actions: Option<Vec<Action>>,
    pub episodes_used: usize,
    pub episode_log: Vec<EpisodeLogEntry>,
    /// Root commitments made by MCTS2; empty otherwise.
    pub committed_prefix: Vec<Action>,
}

/// Runs one episode from `root` until an unsafe state or until the world has
/// executed `episode.len` actions in total. `policy` gets the current state.
pub fn run_episode(
    root: &WorldState,
    policy: &mut dyn FnMut(&WorldState) -> Action,
    scenario: &Scenario,
    episode: &EpisodeSpec,
) -> Result<(EpisodeResult, WorldState), WorldError> {
    let mut state = root.clone();
    let mut result = EpisodeResult::empty();
    while state.step_count < episode.len && !state.terminal_unsafe {
        let a = policy(&state);
        let (next, info) = step_action(&state, a, scenario, episode)?;
        result.push(a, &info);
        state = next;
    }
    Ok((result, state))
}

impl EpisodeResult {
    pub(crate) fn empty() -> Self {
        EpisodeResult {
            actions: Vec::new(),
            rewards: Vec::new(),
            return_value: 0.0,
            found_unsafe: false,
            unsafe_step: None,
        }
    }

    pub(crate) fn push(&mut self, a: Action, info: &StepInfo) {
        self.push_reward(a, info.reward, info.unsafe_hit);
    }

    pub(crate) fn push_reward(&mut self, a: Action, reward: f64, unsafe_hit: bool) {
        self.actions.push(a);
        self.rewards.push(reward);
        self.return_value += reward;
        if unsafe_hit && !self.found_unsafe {
            self.found_unsafe = true;
            self.unsafe_step = Some(self.actions.len() - 1);
        }
    }
}

/// Re-executes `actions` from the initial state and returns every step's trace.
/// The episode length used for rewards is `actions.len()`.
pub fn replay(scenario: &Scenario, actions: &[Action]) -> Result<Vec<StepInfo>, WorldError> {
    let episode = EpisodeSpec::new(actions.len());
    let mut state = init(scenario);
    let mut infos = Vec::with_capacity(actions.len());
    for &a in actions {
        let (next, info) = step_action(&state, a, scenario, &episode)?;
        infos.push(info);
        state = next;
    }
    Ok(infos)
}

/// Runs the configured algorithm and confirms any reported hazard by replay.
pub fn search(scenario: &Scenario, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let outcome = match cfg.algorithm {
        Algorithm::Random => random_search(scenario, cfg)?,
        Algorithm::Mcts1 | Algorithm::Mcts2 => mcts_search(scenario, cfg)?,
    };
    if let Some(actions) = &outcome.hazard_actions {
        let trace = replay(scenario, actions)?;
        if !trace.last().is_some_and(|i| i.unsafe_hit) {
            return Err(SearchError::Unsound);
        }
    }
    Ok(outcome)
}
