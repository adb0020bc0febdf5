#ifndef HAZARDFORGE_H
#define HAZARDFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Search algorithm selector.
 */
typedef enum HfAlgorithm {
  HF_RANDOM = 0,
  HF_MCTS1 = 1,
  HF_MCTS2 = 2,
} HfAlgorithm;

/**
 * Status codes returned by every fallible function.
 */
typedef enum HfStatus {
  HF_OK = 0,
  HF_NULL_POINTER = 1,
  HF_INVALID_UTF8 = 2,
  HF_PARSE_ERROR = 3,
  HF_VALIDATION_ERROR = 4,
  HF_UNKNOWN_BUILTIN = 5,
  HF_INVALID_ARGUMENT = 6,
  HF_TERMINAL_STATE = 7,
  HF_SEARCH_FAILED = 8,
  HF_BUFFER_TOO_SMALL = 9,
  HF_PANIC = 10,
} HfStatus;

/**
 * Opaque search result.
 */
typedef struct HfOutcome HfOutcome;

/**
 * Opaque scenario handle.
 */
typedef struct HfScenario HfScenario;

/**
 * Opaque simulation state bound to a copy of its scenario.
 */
typedef struct HfWorld HfWorld;

/**
 * Observation after one action.
 */
typedef struct HfStepInfo {
  double d_hr;
  double v_r;
  double c_s;
  double reward;
  bool unsafe_hit;
  uint32_t step_count;
  double time;
} HfStepInfo;

typedef struct HfHumanPose {
  double x;
  double y;
  double heading_rad;
  double bend_fwd_deg;
  double bend_lat_deg;
} HfHumanPose;

typedef struct HfSearchConfig {
  enum HfAlgorithm algorithm;
  uint64_t seed;
  uint32_t max_episodes;
  uint32_t episode_len;
  double c_uct;
  uint32_t commit_interval;
  double terminal_bonus;
} HfSearchConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf`.
 */
enum HfStatus hf_last_error_message(char *buf, size_t capacity, size_t *needed);

/**
 * Number of actions in the alphabet (30).
 */
uint32_t hf_action_count(void);

/**
 * Parses and validates a scenario JSON document of `len` bytes.
 */
enum HfStatus hf_scenario_from_json(const uint8_t *json, size_t len, struct HfScenario **out);

/**
 * Loads a built-in scenario by name (NUL-terminated).
 */
enum HfStatus hf_scenario_builtin(const char *name, struct HfScenario **out);

void hf_scenario_free(struct HfScenario *scenario);

/**
 * Creates a world in the scenario's initial state.
 */
enum HfStatus hf_world_new(const struct HfScenario *scenario, struct HfWorld **out);

/**
 * Independent copy of a world (snapshot).
 */
enum HfStatus hf_world_clone(const struct HfWorld *world, struct HfWorld **out);

void hf_world_free(struct HfWorld *world);

/**
 * Executes one action. Rewards use an episode of `episode_len` actions.
 */
enum HfStatus hf_world_step(struct HfWorld *world,
                            uint32_t action,
                            uint32_t episode_len,
                            struct HfStepInfo *info);

/**
 * Current observation without stepping (reward left at 0).
 */
enum HfStatus hf_world_observe(const struct HfWorld *world, struct HfStepInfo *info);

enum HfStatus hf_world_human_pose(const struct HfWorld *world, struct HfHumanPose *pose);

/**
 * Default configuration (200 episodes, 8 actions, c = sqrt 2, K = 25).
 */
struct HfSearchConfig hf_search_config_default(enum HfAlgorithm algorithm, uint64_t seed);

enum HfStatus hf_search(const struct HfScenario *scenario,
                        const struct HfSearchConfig *config,
                        struct HfOutcome **out);

void hf_outcome_free(struct HfOutcome *outcome);

/**
 * Whether a hazard was found; false for a null handle.
 */
bool hf_outcome_found(const struct HfOutcome *outcome);

/**
 * Episodes consumed by the search; 0 for a null handle.
 */
uint32_t hf_outcome_episodes_used(const struct HfOutcome *outcome);

/**
 * Copies hazard action indices into `actions`. `*count` receives the full
 * length; `HF_BUFFER_TOO_SMALL` if `capacity` is insufficient.
 */
enum HfStatus hf_outcome_hazard_actions(const struct HfOutcome *outcome,
                                        uint32_t *actions,
                                        size_t capacity,
                                        size_t *count);

/**
 * Summary record as JSON text.
 */
enum HfStatus hf_outcome_summary_json(const struct HfOutcome *outcome,
                                      char *buf,
                                      size_t capacity,
                                      size_t *needed);

/**
 * Replays `actions` from the initial state and returns the JSONL trace.
 */
enum HfStatus hf_replay_trace_jsonl(const struct HfScenario *scenario,
                                    const uint32_t *actions,
                                    size_t n_actions,
                                    char *buf,
                                    size_t capacity,
                                    size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAZARDFORGE_H */
