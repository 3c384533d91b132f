#ifndef SORTENV_H
#define SORTENV_H

#include <stdbool.h>
#include <stdint.h>

// Status codes returned by every fallible call.
typedef enum SortenvStatus {
  SORTENV_STATUS_OK = 0,
  SORTENV_STATUS_NULL_POINTER = 1,
  SORTENV_STATUS_INVALID_ARGUMENT = 2,
  SORTENV_STATUS_BAD_CONFIG = 3,
  SORTENV_STATUS_NO_EPISODE = 4,
  SORTENV_STATUS_EPISODE_DONE = 5,
  SORTENV_STATUS_BAD_ACTION = 6,
  SORTENV_STATUS_PANIC = 7,
} SortenvStatus;

// Environment variant selector.
typedef enum SortenvVariant {
  SORTENV_VARIANT_BASIC = 0,
  SORTENV_VARIANT_ADVANCED = 1,
} SortenvVariant;

// Input generator selector.
typedef enum SortenvInput {
  SORTENV_INPUT_RANDOM = 0,
  SORTENV_INPUT_SEASONAL = 1,
} SortenvInput;

// Opaque environment handle.
typedef struct SortenvEnv SortenvEnv;

// Opaque rule-based agent handle.
typedef struct SortenvRba SortenvRba;

// Observation. `ratio_category` is -1 in the basic variant, else
// 0 = basic, 1 = positive, 2 = negative.
typedef struct SortenvObservation {
  double input_total;
  int32_t ratio_category;
} SortenvObservation;

// Result of one step. `mode` follows the `ratio_category` encoding.
typedef struct SortenvStep {
  struct SortenvObservation observation;
  double reward;
  bool done;
  double accuracy;
  double occupancy;
  double speed;
  int32_t mode;
  double purity;
  bool speed_changed;
} SortenvStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an environment from the common parameters; all others keep
// their defaults.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SortenvStatus sortenv_env_new(enum SortenvVariant variant,
                                   enum SortenvInput input,
                                   double obs_noise_level,
                                   double action_penalty,
                                   uint32_t episode_length,
                                   uint64_t seed,
                                   struct SortenvEnv **out);

// Creates an environment from a TOML configuration string.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum SortenvStatus sortenv_env_from_toml(const char *toml, struct SortenvEnv **out);

// Releases an environment. Null is ignored.
//
// # Safety
// `env` must come from `sortenv_env_new`/`sortenv_env_from_toml` and not
// be used afterwards.
void sortenv_env_free(struct SortenvEnv *env);

// Number of discrete actions: 10 (basic) or 30 (advanced).
//
// # Safety
// `env` must be a live handle or null (returns 0).
uint32_t sortenv_env_action_count(const struct SortenvEnv *env);

// Starts an episode with `seed` and writes the first observation.
//
// # Safety
// `env` must be a live handle and `out` a valid pointer.
enum SortenvStatus sortenv_env_reset(struct SortenvEnv *env,
                                     uint64_t seed,
                                     struct SortenvObservation *out);

// Advances one step with the flat action index `mode * 10 + speed - 1`.
//
// # Safety
// `env` must be a live handle and `out` a valid pointer.
enum SortenvStatus sortenv_env_step(struct SortenvEnv *env,
                                    uint32_t action,
                                    struct SortenvStep *out);

// Builds the rule-based agent for `env`'s configuration.
//
// # Safety
// `env` must be a live handle and `out` a valid pointer.
enum SortenvStatus sortenv_rba_new(const struct SortenvEnv *env, struct SortenvRba **out);

// Writes the agent's action index for `observation`.
//
// # Safety
// All pointers must be valid; `rba` must be a live handle.
enum SortenvStatus sortenv_rba_act(struct SortenvRba *rba,
                                   const struct SortenvObservation *observation,
                                   uint32_t *out_action);

// Releases an agent. Null is ignored.
//
// # Safety
// `rba` must come from `sortenv_rba_new` and not be used afterwards.
void sortenv_rba_free(struct SortenvRba *rba);

// Message for the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *sortenv_last_error(void);

// Static description of a status code.
const char *sortenv_status_str(enum SortenvStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SORTENV_H */
