//! The sorter's physics: belt occupancy, the speed/occupancy accuracy
//! surface, sorting modes, the sorting transfer into storage, container
//! purity and the per-step reward.
//!
//! Every function here is pure. Functions that need a noise draw come in
//! two forms: one taking the noise value explicitly, and a `*_sampled`
//! form drawing it from a [`Stream`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{EnvConfig, Range};
use crate::error::{Error, Result};
use crate::mix::{MaterialMix, StorageTally, STAGE_CAPACITY};
use crate::rng::Stream;

/// Number of discrete belt speeds.
pub const SPEED_COUNT: usize = 10;

/// Penalty-free reward returned whenever accuracy falls below the threshold.
pub const BELOW_THRESHOLD_REWARD: f64 = -0.1;

/// Accuracy bonus for the correct sorting mode.
pub const CORRECT_MODE_BONUS: f64 = 0.15;
/// Accuracy malus for an incorrect sorting mode.
pub const INCORRECT_MODE_MALUS: f64 = 0.10;

/// Belt speed as a fraction of maximum, for `speed_index` in `1..=10`.
pub fn speed_fraction(speed_index: u8) -> f64 {
    f64::from(speed_index) / 10.0
}

/// Operating mode of the sorting machine (advanced variant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortingMode {
    /// Suited to balanced input, `1/3 <= A/B <= 3`.
    Basic,
    /// Suited to A-dominant input, `A/B > 3`.
    Positive,
    /// Suited to B-dominant input, `A/B < 1/3`.
    Negative,
}

impl SortingMode {
    pub const ALL: [SortingMode; 3] = [SortingMode::Basic, SortingMode::Positive, SortingMode::Negative];

    pub fn index(self) -> usize {
        match self {
            SortingMode::Basic => 0,
            SortingMode::Positive => 1,
            SortingMode::Negative => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Plot coding used in trace files: 0, 0.5 and 1.0.
    pub fn plot_code(self) -> f64 {
        match self {
            SortingMode::Basic => 0.0,
            SortingMode::Positive => 0.5,
            SortingMode::Negative => 1.0,
        }
    }

    pub fn from_plot_code(code: f64) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.plot_code() == code)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SortingMode::Basic => "basic",
            SortingMode::Positive => "positive",
            SortingMode::Negative => "negative",
        }
    }
}

impl fmt::Display for SortingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SortingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(SortingMode::Basic),
            "positive" => Ok(SortingMode::Positive),
            "negative" => Ok(SortingMode::Negative),
            other => Err(Error::Parse(format!("unknown sorting mode '{other}'"))),
        }
    }
}

/// Maximum belt occupancy each speed tolerates before accuracy degrades.
///
/// Stored per speed index; the default is `clamp(1.1 - v, 0.1, 1.0)`, so
/// the slowest speed tolerates a full belt and the fastest tolerates 10%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupancyLimitMap {
    limits: [f64; SPEED_COUNT],
}

impl Default for OccupancyLimitMap {
    fn default() -> Self {
        let mut limits = [0.0; SPEED_COUNT];
        for (i, limit) in limits.iter_mut().enumerate() {
            // (11 - k) / 10 is 1.1 - k/10 without the rounding of 1.1.
            *limit = ((11 - (i + 1)) as f64 / 10.0).clamp(0.1, 1.0);
        }
        Self { limits }
    }
}

impl OccupancyLimitMap {
    pub fn new(limits: [f64; SPEED_COUNT]) -> Result<Self> {
        let map = Self { limits };
        map.validate()?;
        Ok(map)
    }

    /// Limit for `speed_index` in `1..=10`.
    pub fn limit(&self, speed_index: u8) -> f64 {
        self.limits[usize::from(speed_index) - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.limits
    }

    pub fn validate(&self) -> Result<()> {
        if self.limits.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::Config("occupancy limits must lie in [0, 1]".into()));
        }
        if self.limits.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Config(
                "occupancy limits must be non-increasing in speed".into(),
            ));
        }
        Ok(())
    }
}

/// Belt occupancy as a fraction of capacity.
pub fn occupancy(belt: &MaterialMix) -> f64 {
    belt.total() / STAGE_CAPACITY
}

/// Deterministic part of the accuracy surface: 1 within the speed's limit,
/// falling linearly by `lambda` per unit of excess occupancy, clamped to
/// `[0, 1]`.
pub fn accuracy_before_noise(
    speed_index: u8,
    occupancy: f64,
    limits: &OccupancyLimitMap,
    lambda: f64,
) -> f64 {
    let limit = limits.limit(speed_index);
    let alpha = if occupancy <= limit {
        1.0
    } else {
        1.0 - (occupancy - limit) * lambda
    };
    alpha.clamp(0.0, 1.0)
}

/// Basic-variant accuracy with an explicit noise value.
pub fn base_accuracy(
    speed_index: u8,
    occupancy: f64,
    limits: &OccupancyLimitMap,
    lambda: f64,
    noise: f64,
) -> f64 {
    (accuracy_before_noise(speed_index, occupancy, limits, lambda) - noise).clamp(0.0, 1.0)
}

/// Basic-variant accuracy with noise drawn uniformly from `noise_range`.
pub fn base_accuracy_sampled(
    speed_index: u8,
    occupancy: f64,
    limits: &OccupancyLimitMap,
    lambda: f64,
    noise_range: Range,
    stream: &mut Stream,
) -> f64 {
    let noise = stream.uniform(noise_range.lo, noise_range.hi);
    base_accuracy(speed_index, occupancy, limits, lambda, noise)
}

/// Correct sorting mode for a mix by its A/B ratio.
///
/// Ratios of exactly 3 or 1/3 resolve to [`SortingMode::Basic`]. `b = 0`
/// counts as an infinite ratio and an empty mix as balanced.
pub fn classify_ratio(mix: &MaterialMix) -> SortingMode {
    let (a, b) = (mix.a, mix.b);
    if a == 0.0 && b == 0.0 {
        return SortingMode::Basic;
    }
    // Cross-multiplied so b = 0 and a = 0 need no special casing.
    if a > 3.0 * b {
        SortingMode::Positive
    } else if 3.0 * a < b {
        SortingMode::Negative
    } else {
        SortingMode::Basic
    }
}

/// Mode-dependent accuracy adjustment with an explicit noise value.
///
/// `alpha` is the pre-noise base accuracy. A correct mode adds the bonus
/// (capped at 1), an incorrect one subtracts the malus (floored at 0); the
/// noise is then subtracted and the result clamped to `[0, 1]`.
pub fn apply_mode(alpha: f64, chosen: SortingMode, correct: SortingMode, noise: f64) -> f64 {
    let adjusted = if chosen == correct {
        (alpha + CORRECT_MODE_BONUS).min(1.0)
    } else {
        (alpha - INCORRECT_MODE_MALUS).max(0.0)
    };
    (adjusted - noise).clamp(0.0, 1.0)
}

/// Noise range applicable to a mode choice.
pub fn mode_noise_range(config: &EnvConfig, chosen: SortingMode, correct: SortingMode) -> Range {
    if chosen == correct {
        config.correct_mode_noise_range
    } else {
        config.incorrect_mode_noise_range
    }
}

/// Mode-dependent accuracy with one noise draw from the matching range.
pub fn apply_mode_sampled(
    alpha: f64,
    chosen: SortingMode,
    correct: SortingMode,
    config: &EnvConfig,
    stream: &mut Stream,
) -> f64 {
    let range = mode_noise_range(config, chosen, correct);
    let noise = stream.uniform(range.lo, range.hi);
    apply_mode(alpha, chosen, correct, noise)
}

/// Sorts one batch with accuracy `alpha`.
///
/// Returns the contents routed to containers A and B (as a mix whose `a`
/// is container A and `b` container B) and the true/false split.
pub fn sort_transfer(machine: &MaterialMix, alpha: f64) -> (MaterialMix, StorageTally) {
    let miss = 1.0 - alpha;
    let tally = StorageTally {
        a_true: alpha * machine.a,
        a_false: miss * machine.b,
        b_true: alpha * machine.b,
        b_false: miss * machine.a,
    };
    let sorted = MaterialMix::new(tally.container_a(), tally.container_b());
    (sorted, tally)
}

/// Share of stored material sitting in its correct container; 1.0 when
/// storage is empty.
pub fn purity(tally: &StorageTally) -> f64 {
    let total = tally.total();
    if total <= 0.0 {
        return 1.0;
    }
    ((tally.a_true + tally.b_true) / total).clamp(0.0, 1.0)
}

/// Reward for one step.
///
/// Below the threshold the reward is a flat -0.1; otherwise the normalized
/// accuracy and speed terms are weighted by `r_acc` and `r_speed`. The
/// action penalty applies on every speed change in both cases.
///
/// `v` is the belt speed fraction, `0.1..=1.0`.
pub fn step_reward(alpha: f64, v: f64, config: &EnvConfig, speed_changed: bool) -> f64 {
    let penalty = if speed_changed { config.action_penalty } else { 0.0 };
    if alpha < config.threshold {
        return BELOW_THRESHOLD_REWARD - penalty;
    }
    let acc_term = (alpha - config.threshold) / (1.0 - config.threshold);
    let speed_term = (v - 0.1) / 0.9;
    config.r_acc * acc_term + config.r_speed * speed_term - penalty
}
