//! C ABI for hazardforge.
//!
//! Objects cross the boundary as opaque handles created by `hf_*_new`-style
//! constructors and released by the matching `hf_*_free`. Every fallible call
//! returns an `HfStatus`; on failure a message is stored per thread and can be
//! fetched with `hf_last_error_message`. Panics never unwind into C.
//!
//! Strings returned through caller buffers follow one protocol: the full
//! length (without the terminating NUL) is written to `*needed`; the buffer is
//! filled only when `capacity > *needed`, otherwise `HF_BUFFER_TOO_SMALL` is
//! returned and the caller retries with a larger buffer.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hazardforge::human::ACTION_COUNT;
use hazardforge::search::{replay, search, Algorithm, SearchConfig, SearchOutcome};
use hazardforge::trace::{trace_records, write_jsonl, Summary};
use hazardforge::world::{init, observe_state, step_action, EpisodeSpec, WorldState};
use hazardforge::{builtin_scenario, load_scenario, Action, Scenario, ScenarioError};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    HfOk = 0,
    HfNullPointer = 1,
    HfInvalidUtf8 = 2,
    HfParseError = 3,
    HfValidationError = 4,
    HfUnknownBuiltin = 5,
    HfInvalidArgument = 6,
    HfTerminalState = 7,
    HfSearchFailed = 8,
    HfBufferTooSmall = 9,
    HfPanic = 10,
}

/// Search algorithm selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfAlgorithm {
    HfRandom = 0,
    HfMcts1 = 1,
    HfMcts2 = 2,
}

impl From<HfAlgorithm> for Algorithm {
    fn from(a: HfAlgorithm) -> Self {
        match a {
            HfAlgorithm::HfRandom => Algorithm::Random,
            HfAlgorithm::HfMcts1 => Algorithm::Mcts1,
            HfAlgorithm::HfMcts2 => Algorithm::Mcts2,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfSearchConfig {
    pub algorithm: HfAlgorithm,
    pub seed: u64,
    pub max_episodes: u32,
    pub episode_len: u32,
    pub c_uct: f64,
    pub commit_interval: u32,
    pub terminal_bonus: f64,
}

/// Observation after one action.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HfStepInfo {
    pub d_hr: f64,
    pub v_r: f64,
    pub c_s: f64,
    pub reward: f64,
    pub unsafe_hit: bool,
    pub step_count: u32,
    pub time: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HfHumanPose {
    pub x: f64,
    pub y: f64,
    pub heading_rad: f64,
    pub bend_fwd_deg: f64,
    pub bend_lat_deg: f64,
}

/// Opaque scenario handle.
pub struct HfScenario(Scenario);

/// Opaque simulation state bound to a copy of its scenario.
pub struct HfWorld {
    scenario: Scenario,
    state: WorldState,
}

/// Opaque search result.
pub struct HfOutcome {
    outcome: SearchOutcome,
    summary_json: String,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: HfStatus, msg: impl Into<String>) -> HfStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> HfStatus) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HfStatus::HfPanic, "internal panic"),
    }
}

fn scenario_status(e: &ScenarioError) -> HfStatus {
    match e {
        ScenarioError::Parse(_) => HfStatus::HfParseError,
        ScenarioError::Validation { .. } => HfStatus::HfValidationError,
        ScenarioError::UnknownBuiltin(_) => HfStatus::HfUnknownBuiltin,
    }
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, HfStatus> {
    if s.is_null() {
        return Err(fail(HfStatus::HfNullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(HfStatus::HfInvalidUtf8, "string is not valid UTF-8"))
}

unsafe fn write_string(s: &str, buf: *mut c_char, capacity: usize, needed: *mut usize) -> HfStatus {
    if needed.is_null() {
        return fail(HfStatus::HfNullPointer, "null length pointer");
    }
    *needed = s.len();
    if buf.is_null() || capacity <= s.len() {
        return fail(
            HfStatus::HfBufferTooSmall,
            format!("buffer needs {} bytes", s.len() + 1),
        );
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    HfStatus::HfOk
}

/// Copies the calling thread's last error message into `buf`.
#[no_mangle]
pub unsafe extern "C" fn hf_last_error_message(buf: *mut c_char, capacity: usize, needed: *mut usize) -> HfStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    write_string(&msg, buf, capacity, needed)
}

/// Number of actions in the alphabet (30).
#[no_mangle]
pub extern "C" fn hf_action_count() -> u32 {
    ACTION_COUNT as u32
}

/// Parses and validates a scenario JSON document of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hf_scenario_from_json(json: *const u8, len: usize, out: *mut *mut HfScenario) -> HfStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let bytes = std::slice::from_raw_parts(json, len);
        match load_scenario(bytes) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(HfScenario(s)));
                HfStatus::HfOk
            }
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

/// Loads a built-in scenario by name (NUL-terminated).
#[no_mangle]
pub unsafe extern "C" fn hf_scenario_builtin(name: *const c_char, out: *mut *mut HfScenario) -> HfStatus {
    guard(|| {
        if out.is_null() {
            return fail(HfStatus::HfNullPointer, "null output pointer");
        }
        let name = match c_str(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match builtin_scenario(name) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(HfScenario(s)));
                HfStatus::HfOk
            }
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn hf_scenario_free(scenario: *mut HfScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Creates a world in the scenario's initial state.
#[no_mangle]
pub unsafe extern "C" fn hf_world_new(scenario: *const HfScenario, out: *mut *mut HfWorld) -> HfStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let sc = (*scenario).0.clone();
        let state = init(&sc);
        *out = Box::into_raw(Box::new(HfWorld { scenario: sc, state }));
        HfStatus::HfOk
    })
}

/// Independent copy of a world (snapshot).
#[no_mangle]
pub unsafe extern "C" fn hf_world_clone(world: *const HfWorld, out: *mut *mut HfWorld) -> HfStatus {
    guard(|| {
        if world.is_null() || out.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let w = &*world;
        *out = Box::into_raw(Box::new(HfWorld {
            scenario: w.scenario.clone(),
            state: w.state.clone(),
        }));
        HfStatus::HfOk
    })
}

#[no_mangle]
pub unsafe extern "C" fn hf_world_free(world: *mut HfWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Executes one action. Rewards use an episode of `episode_len` actions.
#[no_mangle]
pub unsafe extern "C" fn hf_world_step(
    world: *mut HfWorld,
    action: u32,
    episode_len: u32,
    info: *mut HfStepInfo,
) -> HfStatus {
    guard(|| {
        if world.is_null() || info.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let action = match Action::from_index(action as usize) {
            Ok(a) => a,
            Err(e) => return fail(HfStatus::HfInvalidArgument, e.to_string()),
        };
        if episode_len == 0 {
            return fail(HfStatus::HfInvalidArgument, "episode_len must be >= 1");
        }
        let w = &mut *world;
        match step_action(&w.state, action, &w.scenario, &EpisodeSpec::new(episode_len as usize)) {
            Ok((next, step)) => {
                w.state = next;
                *info = HfStepInfo {
                    d_hr: step.obs.d_hr,
                    v_r: step.obs.v_r,
                    c_s: step.obs.safety_index(),
                    reward: step.reward,
                    unsafe_hit: step.unsafe_hit,
                    step_count: w.state.step_count as u32,
                    time: w.state.t(),
                };
                HfStatus::HfOk
            }
            Err(e) => fail(HfStatus::HfTerminalState, e.to_string()),
        }
    })
}

/// Current observation without stepping (reward left at 0).
#[no_mangle]
pub unsafe extern "C" fn hf_world_observe(world: *const HfWorld, info: *mut HfStepInfo) -> HfStatus {
    guard(|| {
        if world.is_null() || info.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let w = &*world;
        let obs = observe_state(&w.state, &w.scenario);
        *info = HfStepInfo {
            d_hr: obs.d_hr,
            v_r: obs.v_r,
            c_s: obs.safety_index(),
            reward: 0.0,
            unsafe_hit: w.state.terminal_unsafe,
            step_count: w.state.step_count as u32,
            time: w.state.t(),
        };
        HfStatus::HfOk
    })
}

#[no_mangle]
pub unsafe extern "C" fn hf_world_human_pose(world: *const HfWorld, pose: *mut HfHumanPose) -> HfStatus {
    guard(|| {
        if world.is_null() || pose.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let h = &(*world).state.human;
        *pose = HfHumanPose {
            x: h.position.x,
            y: h.position.y,
            heading_rad: h.heading,
            bend_fwd_deg: h.bend_forward,
            bend_lat_deg: h.bend_lateral,
        };
        HfStatus::HfOk
    })
}

/// Default configuration (200 episodes, 8 actions, c = sqrt 2, K = 25).
#[no_mangle]
pub extern "C" fn hf_search_config_default(algorithm: HfAlgorithm, seed: u64) -> HfSearchConfig {
    let c = SearchConfig::new(algorithm.into(), seed);
    HfSearchConfig {
        algorithm,
        seed,
        max_episodes: c.max_episodes as u32,
        episode_len: c.episode_len as u32,
        c_uct: c.c_uct,
        commit_interval: c.commit_interval as u32,
        terminal_bonus: c.terminal_bonus,
    }
}

#[no_mangle]
pub unsafe extern "C" fn hf_search(
    scenario: *const HfScenario,
    config: *const HfSearchConfig,
    out: *mut *mut HfOutcome,
) -> HfStatus {
    guard(|| {
        if scenario.is_null() || config.is_null() || out.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let c = &*config;
        let cfg = SearchConfig {
            algorithm: c.algorithm.into(),
            seed: c.seed,
            max_episodes: c.max_episodes as usize,
            episode_len: c.episode_len as usize,
            c_uct: c.c_uct,
            commit_interval: c.commit_interval as usize,
            terminal_bonus: c.terminal_bonus,
        };
        if let Err(e) = cfg.validate() {
            return fail(HfStatus::HfInvalidArgument, e.to_string());
        }
        let sc = &(*scenario).0;
        match search(sc, &cfg) {
            Ok(outcome) => {
                let summary_json = Summary::new(sc, &cfg, &outcome).to_json();
                *out = Box::into_raw(Box::new(HfOutcome { outcome, summary_json }));
                HfStatus::HfOk
            }
            Err(e) => fail(HfStatus::HfSearchFailed, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn hf_outcome_free(outcome: *mut HfOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Whether a hazard was found; false for a null handle.
#[no_mangle]
pub unsafe extern "C" fn hf_outcome_found(outcome: *const HfOutcome) -> bool {
    !outcome.is_null() && (*outcome).outcome.found
}

/// Episodes consumed by the search; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn hf_outcome_episodes_used(outcome: *const HfOutcome) -> u32 {
    if outcome.is_null() {
        0
    } else {
        (*outcome).outcome.episodes_used as u32
    }
}

/// Copies hazard action indices into `actions`. `*count` receives the full
/// length; `HF_BUFFER_TOO_SMALL` if `capacity` is insufficient.
#[no_mangle]
pub unsafe extern "C" fn hf_outcome_hazard_actions(
    outcome: *const HfOutcome,
    actions: *mut u32,
    capacity: usize,
    count: *mut usize,
) -> HfStatus {
    guard(|| {
        if outcome.is_null() || count.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        let list: Vec<u32> = (*outcome)
            .outcome
            .hazard_actions
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(|a| a.index() as u32)
            .collect();
        *count = list.len();
        if list.is_empty() {
            return HfStatus::HfOk;
        }
        if actions.is_null() || capacity < list.len() {
            return fail(
                HfStatus::HfBufferTooSmall,
                format!("buffer needs {} entries", list.len()),
            );
        }
        ptr::copy_nonoverlapping(list.as_ptr(), actions, list.len());
        HfStatus::HfOk
    })
}

/// Summary record as JSON text.
#[no_mangle]
pub unsafe extern "C" fn hf_outcome_summary_json(
    outcome: *const HfOutcome,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> HfStatus {
    guard(|| {
        if outcome.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        write_string(&(*outcome).summary_json, buf, capacity, needed)
    })
}

/// Replays `actions` from the initial state and returns the JSONL trace.
#[no_mangle]
pub unsafe extern "C" fn hf_replay_trace_jsonl(
    scenario: *const HfScenario,
    actions: *const u32,
    n_actions: usize,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> HfStatus {
    guard(|| {
        if scenario.is_null() || actions.is_null() {
            return fail(HfStatus::HfNullPointer, "null argument");
        }
        if n_actions == 0 {
            return fail(HfStatus::HfInvalidArgument, "at least one action is required");
        }
        let raw = std::slice::from_raw_parts(actions, n_actions);
        let mut seq = Vec::with_capacity(raw.len());
        for &i in raw {
            match Action::from_index(i as usize) {
                Ok(a) => seq.push(a),
                Err(e) => return fail(HfStatus::HfInvalidArgument, e.to_string()),
            }
        }
        let sc = &(*scenario).0;
        match replay(sc, &seq) {
            Ok(steps) => write_string(&write_jsonl(&trace_records(&steps, sc)), buf, capacity, needed),
            Err(e) => fail(HfStatus::HfTerminalState, e.to_string()),
        }
    })
}
