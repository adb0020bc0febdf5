use super::{
    run_episode, search_rng, uniform_action, Algorithm, EpisodeLogEntry, SearchConfig, SearchError, SearchOutcome,
};
use crate::cell::Scenario;
use crate::world::init;

/// Independent episodes of uniformly sampled actions from the initial state.
pub fn random_search(scenario: &Scenario, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    if cfg.algorithm != Algorithm::Random {
        return Err(SearchError::WrongAlgorithm(cfg.algorithm));
    }
    cfg.validate()?;
    let mut rng = search_rng(cfg.seed);
    let root = init(scenario);
    let episode = cfg.episode_spec();
    let mut log = Vec::new();
    for e in 1..=cfg.max_episodes {
        let (res, _) = run_episode(&root, &mut |_| uniform_action(&mut rng), scenario, &episode)?;
        log.push(EpisodeLogEntry {
            episode: e,
            return_value: res.return_value,
            found_unsafe: res.found_unsafe,
        });
        if res.found_unsafe {
            return Ok(SearchOutcome {
                found: true,
                hazard_actions: Some(res.actions),
                episodes_used: e,
                episode_log: log,
                committed_prefix: Vec::new(),
            });
        }
    }
    Ok(SearchOutcome {
        found: false,
        hazard_actions: None,
        episodes_used: cfg.max_episodes,
        episode_log: log,
        committed_prefix: Vec::new(),
    })
}
