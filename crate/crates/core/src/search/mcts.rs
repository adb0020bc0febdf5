//! UCT over the 30-action alphabet. Nodes keep the world snapshot reached
//! through their edge, so descending the tree never re-simulates.
//!
//! Selection uses `norm(Q) + c * sqrt(ln N / N_a)` where `norm` rescales Q by
//! the minimum and maximum episode return seen so far. Expansion picks an
//! untried action uniformly; rollouts are uniform to the episode horizon;
//! every traversed edge stores the running mean of the full episode return.

use rand::Rng;

use super::{
    run_episode, search_rng, uniform_action, Algorithm, EpisodeLogEntry, EpisodeResult, SearchConfig, SearchError,
    SearchOutcome, SearchRng,
};
use crate::cell::Scenario;
use crate::human::{enumerate_actions, Action};
use crate::world::{init, step_action, EpisodeSpec, WorldState};

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Edge {
    pub action: Action,
    /// N_a: number of backups through this edge.
    pub visits: u32,
    /// Running mean of backed-up returns.
    pub q: f64,
    pub child: NodeId,
    reward: f64,
    unsafe_hit: bool,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    /// Episodes that passed through this node.
    pub visits: u32,
    pub edges: Vec<Edge>,
    /// Untried actions in ascending index order.
    pub untried: Vec<Action>,
    state: WorldState,
}

impl TreeNode {
    fn new(state: WorldState, horizon: usize) -> Self {
        let untried = if state.terminal_unsafe || state.step_count >= horizon {
            Vec::new()
        } else {
            enumerate_actions()
        };
        TreeNode {
            visits: 0,
            edges: Vec::new(),
            untried,
            state,
        }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }
}

/// UCB1 score of an edge.
pub fn ucb_score(normalized_q: f64, c_uct: f64, parent_visits: u32, edge_visits: u32) -> f64 {
    normalized_q + c_uct * (f64::from(parent_visits).ln() / f64::from(edge_visits)).sqrt()
}

/// Tree search state that can be driven one episode at a time.
pub struct MctsEngine<'a> {
    scenario: &'a Scenario,
    cfg: SearchConfig,
    episode: EpisodeSpec,
    rng: SearchRng,
    nodes: Vec<TreeNode>,
    root: NodeId,
    committed_prefix: Vec<Action>,
    return_min: f64,
    return_max: f64,
    episodes: usize,
}

/// One tree-search episode.
#[derive(Debug, Clone)]
pub struct MctsEpisode {
    pub result: EpisodeResult,
    /// Edges backed up, root first, as (parent node, action).
    pub tree_path: Vec<(NodeId, Action)>,
}

impl<'a> MctsEngine<'a> {
    pub fn new(scenario: &'a Scenario, cfg: &SearchConfig) -> Result<Self, SearchError> {
        cfg.validate()?;
        let episode = cfg.episode_spec();
        let root = TreeNode::new(init(scenario), episode.len);
        Ok(MctsEngine {
            scenario,
            cfg: *cfg,
            episode,
            rng: search_rng(cfg.seed),
            nodes: vec![root],
            root: 0,
            committed_prefix: Vec::new(),
            return_min: f64::INFINITY,
            return_max: f64::NEG_INFINITY,
            episodes: 0,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn committed_prefix(&self) -> &[Action] {
        &self.committed_prefix
    }

    pub fn episodes_run(&self) -> usize {
        self.episodes
    }

    fn normalized_q(&self, q: f64) -> f64 {
        let span = self.return_max - self.return_min;
        if span > 0.0 && span.is_finite() {
            (q - self.return_min) / span
        } else {
            0.5
        }
    }

    fn select(&self, id: NodeId) -> usize {
        let node = &self.nodes[id];
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, e) in node.edges.iter().enumerate() {
            let score = ucb_score(self.normalized_q(e.q), self.cfg.c_uct, node.visits, e.visits);
            let better =
                score > best_score || (score == best_score && e.action.index() < node.edges[best].action.index());
            if better {
                best = i;
                best_score = score;
            }
        }
        best
    }

    /// Descends, expands one node, rolls out and backs up.
    pub fn run_episode(&mut self) -> Result<MctsEpisode, SearchError> {
        let mut result = EpisodeResult::empty();
        let mut tree_path = Vec::new();
        let mut visited = vec![self.root];
        let mut id = self.root;

        loop {
            let node = &self.nodes[id];
            if node.state.terminal_unsafe || node.state.step_count >= self.episode.len {
                break;
            }
            if !node.untried.is_empty() {
                let pick = self.rng.gen_range(0..node.untried.len());
                let action = self.nodes[id].untried.remove(pick);
                let (next, info) = step_action(&self.nodes[id].state, action, self.scenario, &self.episode)?;
                let child = self.nodes.len();
                self.nodes.push(TreeNode::new(next, self.episode.len));
                self.nodes[id].edges.push(Edge {
                    action,
                    visits: 0,
                    q: 0.0,
                    child,
                    reward: info.reward,
                    unsafe_hit: info.unsafe_hit,
                });
                result.push(action, &info);
                tree_path.push((id, action));
                visited.push(child);
                id = child;
                break;
            }
            let e = &node.edges[self.select(id)];
            result.push_reward(e.action, e.reward, e.unsafe_hit);
            tree_path.push((id, e.action));
            id = e.child;
            visited.push(id);
        }

        let leaf = &self.nodes[id].state;
        if !leaf.terminal_unsafe && leaf.step_count < self.episode.len {
            let rng = &mut self.rng;
            let (rollout, _) = run_episode(leaf, &mut |_| uniform_action(rng), self.scenario, &self.episode)?;
            for (a, r) in rollout.actions.iter().zip(&rollout.rewards) {
                result.actions.push(*a);
                result.rewards.push(*r);
                result.return_value += r;
            }
            if let Some(k) = rollout.unsafe_step {
                if !result.found_unsafe {
                    result.found_unsafe = true;
                    result.unsafe_step = Some(tree_path.len() + k);
                }
            }
        }

        let g = result.return_value;
        self.return_min = self.return_min.min(g);
        self.return_max = self.return_max.max(g);
        for &n in &visited {
            self.nodes[n].visits += 1;
        }
        for &(parent, action) in &tree_path {
            let edge = self.nodes[parent]
                .edges
                .iter_mut()
                .find(|e| e.action == action)
                .expect("edge on path");
            edge.visits += 1;
            edge.q += (g - edge.q) / f64::from(edge.visits);
        }
        self.episodes += 1;
        Ok(MctsEpisode { result, tree_path })
    }

    /// Moves the root to its most visited child (ties: higher Q, then lower
    /// action index). Returns the committed action, if any.
    pub fn commit(&mut self) -> Option<Action> {
        let root = &self.nodes[self.root];
        if root.state.step_count + 1 >= self.episode.len {
            return None;
        }
        let best = root.edges.iter().reduce(|best, e| {
            let better = e.visits > best.visits
                || (e.visits == best.visits && e.q > best.q)
                || (e.visits == best.visits && e.q == best.q && e.action.index() < best.action.index());
            if better {
                e
            } else {
                best
            }
        })?;
        let (action, child) = (best.action, best.child);
        self.root = child;
        self.committed_prefix.push(action);
        Some(action)
    }
}

pub fn mcts_search(scenario: &Scenario, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    if !matches!(cfg.algorithm, Algorithm::Mcts1 | Algorithm::Mcts2) {
        return Err(SearchError::WrongAlgorithm(cfg.algorithm));
    }
    let mut engine = MctsEngine::new(scenario, cfg)?;
    let mut log = Vec::with_capacity(cfg.max_episodes);
    for e in 1..=cfg.max_episodes {
        let ep = engine.run_episode()?;
        log.push(EpisodeLogEntry {
            episode: e,
            return_value: ep.result.return_value,
            found_unsafe: ep.result.found_unsafe,
        });
        if ep.result.found_unsafe {
            let mut hazard = engine.committed_prefix.clone();
            let upto = ep.result.unsafe_step.map_or(ep.result.actions.len(), |k| k + 1);
            hazard.extend_from_slice(&ep.result.actions[..upto]);
            return Ok(SearchOutcome {
                found: true,
                hazard_actions: Some(hazard),
                episodes_used: e,
                episode_log: log,
                committed_prefix: engine.committed_prefix.clone(),
            });
        }
        if cfg.algorithm == Algorithm::Mcts2 && e % cfg.commit_interval == 0 {
            engine.commit();
        }
    }
    Ok(SearchOutcome {
        found: false,
        hazard_actions: None,
        episodes_used: cfg.max_episodes,
        episode_log: log,
        committed_prefix: engine.committed_prefix.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ucb_example() {
        let s = ucb_score(1.0, 1.0, 10, 5);
        assert!((s - (1.0 + (10f64.ln() / 5.0).sqrt())).abs() < 1e-15);
        assert!((s - 1.6786).abs() < 1e-4);
    }
}
