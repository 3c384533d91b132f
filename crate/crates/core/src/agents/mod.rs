//! Baseline agents behind a common interface.

mod qlearn;
mod rba;

pub use qlearn::{train_q, QAgent, QHyper, QLearner, QTable, TrainSpec};
pub use rba::{build_rba_table, expected_reward, RbaTable, RuleBasedAgent};

use crate::config::EnvVariant;
use crate::env::{Action, Observation, StepResult};
use crate::error::{Error, Result};
use crate::rng::{Stream, AGENT_STREAM};
use crate::sorting::SortingMode;

/// Default number of equal-width observation bins on `[0, 1]`.
pub const DEFAULT_BINS: usize = 20;

/// A policy that can drive a [`SortingEnv`](crate::env::SortingEnv).
pub trait Agent {
    fn name(&self) -> &str;

    /// Variant whose action space this agent emits.
    fn variant(&self) -> EnvVariant;

    fn act(&mut self, observation: &Observation) -> Result<Action>;

    /// Feedback after each step. Non-learning agents ignore it.
    fn notify(&mut self, _result: &StepResult) {}
}

/// Maps observations onto table rows: `bins` equal-width bins of the input
/// total, times the ratio category in the advanced variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretizer {
    pub variant: EnvVariant,
    pub bins: usize,
}

impl Discretizer {
    pub fn new(variant: EnvVariant, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Argument(format!("need at least 2 bins, got {bins}")));
        }
        Ok(Self { variant, bins })
    }

    pub fn categories(&self) -> usize {
        match self.variant {
            EnvVariant::Basic => 1,
            EnvVariant::Advanced => SortingMode::ALL.len(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.bins * self.categories()
    }

    /// Bin of an input total in `[0, 1]`; 1.0 falls in the last bin.
    pub fn bin(&self, input_total: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&input_total) {
            return Err(Error::Argument(format!(
                "observation {input_total} outside [0, 1]"
            )));
        }
        Ok(((input_total * self.bins as f64) as usize).min(self.bins - 1))
    }

    /// Midpoint of a bin.
    pub fn bin_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) / self.bins as f64
    }

    /// Row index `category * bins + bin`.
    pub fn state(&self, observation: &Observation) -> Result<usize> {
        let bin = self.bin(observation.input_total)?;
        let category = match (self.variant, observation.ratio_category) {
            (EnvVariant::Basic, _) => 0,
            (EnvVariant::Advanced, Some(mode)) => mode.index(),
            (EnvVariant::Advanced, None) => {
                return Err(Error::Argument(
                    "advanced observation is missing its ratio category".into(),
                ))
            }
        };
        Ok(category * self.bins + bin)
    }

    /// Inverse of [`Discretizer::state`]: bin and ratio category.
    pub fn cell(&self, state: usize) -> (usize, Option<SortingMode>) {
        let bin = state % self.bins;
        let category = match self.variant {
            EnvVariant::Basic => None,
            EnvVariant::Advanced => SortingMode::from_index(state / self.bins),
        };
        (bin, category)
    }
}

/// Uniformly random actions.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    variant: EnvVariant,
    stream: Stream,
}

impl RandomAgent {
    pub fn new(variant: EnvVariant, seed: u64) -> Self {
        Self { variant, stream: Stream::new(seed, AGENT_STREAM) }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn variant(&self) -> EnvVariant {
        self.variant
    }

    fn act(&mut self, _observation: &Observation) -> Result<Action> {
        Action::from_index(self.variant, self.stream.index(self.variant.action_count()))
    }
}

/// Always plays the same action.
#[derive(Debug, Clone)]
pub struct FixedAgent {
    variant: EnvVariant,
    action: Action,
}

impl FixedAgent {
    pub fn new(variant: EnvVariant, action: Action) -> Result<Self> {
        action.validate(variant)?;
        Ok(Self { variant, action })
    }
}

impl Agent for FixedAgent {
    fn name(&self) -> &str {
        "fixed"
    }

    fn variant(&self) -> EnvVariant {
        self.variant
    }

    fn act(&mut self, _observation: &Observation) -> Result<Action> {
        Ok(self.action)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_cover_unit_interval() {
        let d = Discretizer::new(EnvVariant::Basic, 20).unwrap();
        assert_eq!(d.bin(0.0).unwrap(), 0);
        assert_eq!(d.bin(0.5).unwrap(), 10);
        assert_eq!(d.bin(0.5 + 1e-9).unwrap(), 10);
        assert_eq!(d.bin(1.0).unwrap(), 19);
        assert!(d.bin(1.01).is_err());
        assert!(d.bin(-0.01).is_err());
        assert!(d.bin(f64::NAN).is_err());
        assert!(Discretizer::new(EnvVariant::Basic, 1).is_err());
    }

    #[test]
    fn advanced_states_include_category() {
        let d = Discretizer::new(EnvVariant::Advanced, 20).unwrap();
        assert_eq!(d.state_count(), 60);
        let obs = Observation { input_total: 0.3, ratio_category: Some(SortingMode::Negative) };
        let s = d.state(&obs).unwrap();
        assert_eq!(d.cell(s), (6, Some(SortingMode::Negative)));
        let missing = Observation { input_total: 0.3, ratio_category: None };
        assert!(d.state(&missing).is_err());
    }

    #[test]
    fn random_agent_is_reproducible() {
        let obs = Observation { input_total: 0.5, ratio_category: None };
        let mut a = RandomAgent::new(EnvVariant::Basic, 9);
        let mut b = RandomAgent::new(EnvVariant::Basic, 9);
        for _ in 0..50 {
            assert_eq!(a.act(&obs).unwrap(), b.act(&obs).unwrap());
        }
    }
}
