//! Hazard search for human-robot cells.
//!
//! A deterministic planar simulator of a fenced robot cell (laser scanner
//! protective field, light curtain, stop chain with response and stopping
//! times) is driven by a virtual human whose actions are chosen by a search
//! engine. The search maximizes a risk-based reward until it reaches a state
//! where the human can touch the moving robot, and returns the action
//! sequence that reproduces it.

pub mod batch;
pub mod cell;
pub mod cli;
pub mod geometry;
pub mod human;
pub mod render;
pub mod safety;
pub mod search;
pub mod trace;
pub mod world;

pub use cell::{builtin_scenario, load_scenario, Scenario, ScenarioError};
pub use human::{enumerate_actions, Action, BendTarget, HumanParams, HumanState, WalkPrimitive};
pub use search::{search, Algorithm, SearchConfig, SearchOutcome};
pub use world::{init, step_action, StepInfo, WorldState};
