//! The sorting-line environment: reset, the per-step pipeline and
//! termination.
//!
//! One step runs six phases in a fixed order:
//!
//! 1. the machine's contents are sorted into storage with the accuracy that
//!    was computed while that material sat on the belt;
//! 2. belt moves to machine, input moves to belt, a new input is drawn;
//! 3. speed (and mode) are taken from the action;
//! 4. accuracy is recomputed for the new belt contents (one sorting-noise
//!    draw);
//! 5. the reward is computed, minus the action penalty on a speed change;
//! 6. the new input is observed (one observation-noise draw).
//!
//! Stages start empty, so the first two steps sort nothing. Belt speed
//! never changes throughput: whole stages advance once per step.

use serde::{Deserialize, Serialize};

use crate::config::{EnvConfig, EnvVariant};
use crate::error::{Error, Result};
use crate::input::GeneratorState;
use crate::mix::{MaterialMix, StorageTally};
use crate::rng::{Stream, OBSERVATION_STREAM, SORTING_STREAM};
use crate::sorting::{
    accuracy_before_noise, apply_mode_sampled, base_accuracy_sampled, classify_ratio, occupancy,
    purity, sort_transfer, speed_fraction, step_reward, SortingMode, SPEED_COUNT,
};

/// Agent command: a belt speed and, in the advanced variant, a sorting mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    /// `1..=10`, speed fraction `speed_index / 10`.
    pub speed_index: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SortingMode>,
}

impl Action {
    pub fn basic(speed_index: u8) -> Self {
        Self { speed_index, mode: None }
    }

    pub fn advanced(speed_index: u8, mode: SortingMode) -> Self {
        Self { speed_index, mode: Some(mode) }
    }

    pub fn speed(&self) -> f64 {
        speed_fraction(self.speed_index)
    }

    /// Checks the action against a variant's action space.
    pub fn validate(&self, variant: EnvVariant) -> Result<()> {
        if !(1..=SPEED_COUNT as u8).contains(&self.speed_index) {
            return Err(Error::Argument(format!(
                "speed_index must be in 1..=10, got {}",
                self.speed_index
            )));
        }
        match (variant, self.mode) {
            (EnvVariant::Basic, None) | (EnvVariant::Advanced, Some(_)) => Ok(()),
            (EnvVariant::Basic, Some(_)) => {
                Err(Error::Argument("basic variant actions carry no mode".into()))
            }
            (EnvVariant::Advanced, None) => {
                Err(Error::Argument("advanced variant actions need a mode".into()))
            }
        }
    }

    /// Flat index: `speed_index - 1` for basic, `mode * 10 + speed_index - 1`
    /// for advanced.
    pub fn index(&self) -> usize {
        let speed = usize::from(self.speed_index) - 1;
        match self.mode {
            None => speed,
            Some(mode) => mode.index() * SPEED_COUNT + speed,
        }
    }

    pub fn from_index(variant: EnvVariant, index: usize) -> Result<Self> {
        if index >= variant.action_count() {
            return Err(Error::Argument(format!(
                "action index {index} out of range for {variant} ({} actions)",
                variant.action_count()
            )));
        }
        let speed_index = (index % SPEED_COUNT) as u8 + 1;
        Ok(match variant {
            EnvVariant::Basic => Action::basic(speed_index),
            EnvVariant::Advanced => {
                Action::advanced(speed_index, SortingMode::from_index(index / SPEED_COUNT).unwrap())
            }
        })
    }

    /// Every action of a variant, in index order.
    pub fn all(variant: EnvVariant) -> Vec<Action> {
        (0..variant.action_count())
            .map(|i| Action::from_index(variant, i).unwrap())
            .collect()
    }
}

/// What the agent sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Normalized input total, possibly perturbed, in `[0, 1]`.
    pub input_total: f64,
    /// Ratio category of the true input mix (advanced only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_category: Option<SortingMode>,
}

/// Diagnostic quantities reported with each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub accuracy: f64,
    pub occupancy: f64,
    pub speed: f64,
    pub speed_index: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SortingMode>,
    /// Storage purity after this step's sorting.
    pub purity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_correct: Option<bool>,
    pub speed_changed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Multiplicative observation noise: `clamp(t * (1 + u), 0, 1)`.
pub fn perturb_total(true_total: f64, u: f64) -> f64 {
    (true_total * (1.0 + u)).clamp(0.0, 1.0)
}

/// Complete environment state for one episode.
#[derive(Debug, Clone)]
pub struct EnvState {
    pub input: MaterialMix,
    pub belt: MaterialMix,
    pub machine: MaterialMix,
    /// Accuracy computed while the machine's contents were on the belt.
    pub machine_accuracy: f64,
    pub storage: StorageTally,
    pub speed_index: u8,
    pub mode: Option<SortingMode>,
    /// Accuracy for the current belt contents.
    pub accuracy: f64,
    /// Speed of the previous step; `None` before the first step.
    pub prev_speed_index: Option<u8>,
    pub step_count: usize,
    /// Everything the generator has emitted this episode.
    pub generated_total: f64,
    pub seed: u64,
    pub generator: GeneratorState,
    sorting_stream: Stream,
    observation_stream: Stream,
}

impl EnvState {
    /// Material currently held in input, belt and machine.
    pub fn in_pipeline(&self) -> f64 {
        self.input.total() + self.belt.total() + self.machine.total()
    }
}

/// A sorting-line environment instance.
#[derive(Debug, Clone)]
pub struct SortingEnv {
    config: EnvConfig,
    state: Option<EnvState>,
    last_observation: Option<Observation>,
}

impl SortingEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, state: None, last_observation: None })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn variant(&self) -> EnvVariant {
        self.config.variant
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    pub fn last_observation(&self) -> Option<&Observation> {
        self.last_observation.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.state
            .as_ref()
            .is_some_and(|s| s.step_count >= self.config.episode_length)
    }

    /// Starts a new episode seeded with `seed`, or the config seed.
    pub fn reset(&mut self, seed: Option<u64>) -> Observation {
        let seed = seed.unwrap_or(self.config.seed);
        let mut generator = GeneratorState::new(self.config.input_type, seed);
        let input = generator.next_input();
        let mut state = EnvState {
            input,
            belt: MaterialMix::EMPTY,
            machine: MaterialMix::EMPTY,
            machine_accuracy: 1.0,
            storage: StorageTally::default(),
            speed_index: 1,
            mode: match self.config.variant {
                EnvVariant::Basic => None,
                EnvVariant::Advanced => Some(SortingMode::Basic),
            },
            accuracy: 1.0,
            prev_speed_index: None,
            step_count: 0,
            generated_total: input.total(),
            seed,
            generator,
            sorting_stream: Stream::new(seed, SORTING_STREAM),
            observation_stream: Stream::new(seed, OBSERVATION_STREAM),
        };
        let obs = observe(&mut state, &self.config);
        self.state = Some(state);
        self.last_observation = Some(obs);
        obs
    }

    /// Advances the episode by one step.
    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        action.validate(self.config.variant)?;
        let done = self.is_done();
        let config = &self.config;
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| Error::Protocol("step called before reset".into()))?;
        if done {
            return Err(Error::Protocol("episode is done; reset first".into()));
        }

        // 1. sort
        let (_, delta) = sort_transfer(&state.machine, state.machine_accuracy);
        state.storage.add(&delta);

        // 2. shift
        state.machine = state.belt;
        state.machine_accuracy = state.accuracy;
        state.belt = state.input;
        state.input = state.generator.next_input();
        state.generated_total += state.input.total();

        // 3. act
        let speed_changed = state
            .prev_speed_index
            .is_some_and(|prev| prev != action.speed_index);
        state.speed_index = action.speed_index;
        state.mode = action.mode;

        // 4. accuracy
        let belt_occupancy = occupancy(&state.belt);
        let mut mode_correct = None;
        state.accuracy = match action.mode {
            None => base_accuracy_sampled(
                action.speed_index,
                belt_occupancy,
                &config.occupancy_limits,
                config.lambda,
                config.base_noise_range,
                &mut state.sorting_stream,
            ),
            Some(chosen) => {
                let correct = classify_ratio(&state.belt);
                mode_correct = Some(chosen == correct);
                let pre_noise = accuracy_before_noise(
                    action.speed_index,
                    belt_occupancy,
                    &config.occupancy_limits,
                    config.lambda,
                );
                apply_mode_sampled(pre_noise, chosen, correct, config, &mut state.sorting_stream)
            }
        };

        // 5. reward
        let reward = step_reward(state.accuracy, action.speed(), config, speed_changed);
        state.prev_speed_index = Some(action.speed_index);
        state.step_count += 1;

        // 6. observe
        let observation = observe(state, config);
        self.last_observation = Some(observation);

        Ok(StepResult {
            observation,
            reward,
            done: state.step_count >= config.episode_length,
            info: StepInfo {
                accuracy: state.accuracy,
                occupancy: belt_occupancy,
                speed: action.speed(),
                speed_index: action.speed_index,
                mode: action.mode,
                purity: purity(&state.storage),
                mode_correct,
                speed_changed,
            },
        })
    }
}

/// Observes the input stage, drawing one observation-noise sample.
///
/// The ratio category uses the true mix, never the perturbed total.
pub fn observe(state: &mut EnvState, config: &EnvConfig) -> Observation {
    let level = config.obs_noise_level;
    let u = state.observation_stream.uniform(-level, level);
    let true_total = occupancy(&state.input);
    Observation {
        input_total: perturb_total(true_total, u),
        ratio_category: match config.variant {
            EnvVariant::Basic => None,
            EnvVariant::Advanced => Some(classify_ratio(&state.input)),
        },
    }
}
