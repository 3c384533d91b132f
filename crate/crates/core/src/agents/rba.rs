//! Rule-based agent: a lookup table of the action with the highest expected
//! immediate reward for each observation cell.

use super::{Agent, Discretizer};
use crate::config::{EnvConfig, EnvVariant};
use crate::env::{Action, Observation};
use crate::error::Result;
use crate::sorting::{
    accuracy_before_noise, apply_mode, base_accuracy, mode_noise_range, step_reward, SortingMode,
    SPEED_COUNT,
};

/// Expected immediate reward of `action` at `occupancy`, with the sorting
/// noise fixed at the mean of its range and no action penalty.
///
/// In the advanced variant `category` is taken as the correct mode.
pub fn expected_reward(
    config: &EnvConfig,
    occupancy: f64,
    action: &Action,
    category: Option<SortingMode>,
) -> f64 {
    let limits = &config.occupancy_limits;
    let alpha = match action.mode {
        None => base_accuracy(
            action.speed_index,
            occupancy,
            limits,
            config.lambda,
            config.base_noise_range.mean(),
        ),
        Some(chosen) => {
            let correct = category.unwrap_or(SortingMode::Basic);
            let pre_noise =
                accuracy_before_noise(action.speed_index, occupancy, limits, config.lambda);
            let noise = mode_noise_range(config, chosen, correct).mean();
            apply_mode(pre_noise, chosen, correct, noise)
        }
    };
    step_reward(alpha, action.speed(), config, false)
}

/// Best action for one cell. Ties go to the lower speed, then to the
/// category's own mode, then to mode order.
pub(crate) fn best_action(
    config: &EnvConfig,
    occupancy: f64,
    category: Option<SortingMode>,
) -> Action {
    let mut best: Option<(Action, f64)> = None;
    for speed_index in 1..=SPEED_COUNT as u8 {
        let candidates: Vec<Action> = match config.variant {
            EnvVariant::Basic => vec![Action::basic(speed_index)],
            EnvVariant::Advanced => {
                let own = category.unwrap_or(SortingMode::Basic);
                std::iter::once(own)
                    .chain(SortingMode::ALL.into_iter().filter(|m| *m != own))
                    .map(|m| Action::advanced(speed_index, m))
                    .collect()
            }
        };
        for action in candidates {
            let reward = expected_reward(config, occupancy, &action, category);
            if best.is_none_or(|(_, r)| reward > r) {
                best = Some((action, reward));
            }
        }
    }
    best.expect("action space is non-empty").0
}

/// Per-cell greedy actions.
#[derive(Debug, Clone, PartialEq)]
pub struct RbaTable {
    discretizer: Discretizer,
    actions: Vec<Action>,
}

impl RbaTable {
    pub fn discretizer(&self) -> &Discretizer {
        &self.discretizer
    }

    pub fn variant(&self) -> EnvVariant {
        self.discretizer.variant
    }

    /// Action stored for a table row.
    pub fn action_for_state(&self, state: usize) -> Action {
        self.actions[state]
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Looks up the action for an observation. Never considers history or
    /// the action penalty.
    pub fn act(&self, observation: &Observation) -> Result<Action> {
        Ok(self.actions[self.discretizer.state(observation)?])
    }
}

/// Builds the table, evaluating each cell at its bin center.
pub fn build_rba_table(config: &EnvConfig, bins: usize) -> Result<RbaTable> {
    let discretizer = Discretizer::new(config.variant, bins)?;
    let actions = (0..discretizer.state_count())
        .map(|state| {
            let (bin, category) = discretizer.cell(state);
            best_action(config, discretizer.bin_center(bin), category)
        })
        .collect();
    Ok(RbaTable { discretizer, actions })
}

/// [`Agent`] wrapper around an [`RbaTable`].
#[derive(Debug, Clone)]
pub struct RuleBasedAgent {
    table: RbaTable,
}

impl RuleBasedAgent {
    pub fn new(table: RbaTable) -> Self {
        Self { table }
    }

    pub fn from_config(config: &EnvConfig, bins: usize) -> Result<Self> {
        Ok(Self::new(build_rba_table(config, bins)?))
    }

    pub fn table(&self) -> &RbaTable {
        &self.table
    }
}

impl Agent for RuleBasedAgent {
    fn name(&self) -> &str {
        "rba"
    }

    fn variant(&self) -> EnvVariant {
        self.table.variant()
    }

    fn act(&mut self, observation: &Observation) -> Result<Action> {
        self.table.act(observation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Range;

    fn zero_noise(variant: EnvVariant) -> EnvConfig {
        EnvConfig {
            variant,
            base_noise_range: Range::new(0.0, 0.0),
            correct_mode_noise_range: Range::new(0.0, 0.0),
            incorrect_mode_noise_range: Range::new(0.0, 0.0),
            ..EnvConfig::default()
        }
    }

    #[test]
    fn light_load_runs_fastest() {
        let c = zero_noise(EnvVariant::Basic);
        assert_eq!(best_action(&c, 0.10, None), Action::basic(10));
        let table = build_rba_table(&c, 20).unwrap();
        let obs = Observation { input_total: 0.07, ratio_category: None };
        assert_eq!(table.act(&obs).unwrap(), Action::basic(10));
    }

    #[test]
    fn full_belt_runs_slowest() {
        for c in [zero_noise(EnvVariant::Basic), EnvConfig::default()] {
            let table = build_rba_table(&c, 20).unwrap();
            let obs = Observation { input_total: 1.0, ratio_category: None };
            assert_eq!(table.act(&obs).unwrap().speed_index, 1);
        }
    }

    #[test]
    fn advanced_mode_follows_ratio_category() {
        let c = EnvConfig { variant: EnvVariant::Advanced, ..EnvConfig::default() };
        let table = build_rba_table(&c, 20).unwrap();
        for state in 0..table.discretizer().state_count() {
            let (_, category) = table.discretizer().cell(state);
            assert_eq!(table.action_for_state(state).mode, category);
        }
        let obs = Observation { input_total: 0.4, ratio_category: Some(SortingMode::Negative) };
        assert_eq!(table.act(&obs).unwrap().mode, Some(SortingMode::Negative));
    }

    #[test]
    fn same_bin_same_action() {
        let table = build_rba_table(&EnvConfig::default(), 20).unwrap();
        let a = Observation { input_total: 0.5, ratio_category: None };
        let b = Observation { input_total: 0.5 + 1e-6, ratio_category: None };
        assert_eq!(table.act(&a).unwrap(), table.act(&b).unwrap());
    }

    #[test]
    fn rejects_out_of_range_observation() {
        let table = build_rba_table(&EnvConfig::default(), 20).unwrap();
        let obs = Observation { input_total: 1.5, ratio_category: None };
        assert!(table.act(&obs).is_err());
    }

    #[test]
    fn speed_is_non_increasing_in_load() {
        let table = build_rba_table(&EnvConfig::default(), 20).unwrap();
        let speeds: Vec<u8> = table.actions().iter().map(|a| a.speed_index).collect();
        assert!(speeds.windows(2).all(|w| w[1] <= w[0]), "{speeds:?}");
    }
}
