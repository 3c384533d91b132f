//! Raw material input: uniformly random or following seasonal phases.
//!
//! Draw order per call (frozen; golden traces depend on it):
//!
//! * random: total in `[5, 95)`, then A-fraction in `[0, 1)`.
//! * seasonal: when the phase is exhausted, pattern index in `0..9` then
//!   length in `{10, 11, 12}`; then total in the level range, then
//!   A-fraction in the regime range.

use serde::{Deserialize, Serialize};

use crate::config::{InputType, Range};
use crate::mix::MaterialMix;
use crate::rng::{Stream, INPUT_STREAM};

/// Total input range of the random generator, in percent.
pub const RANDOM_TOTAL: Range = Range::new(5.0, 95.0);

/// Shortest and longest seasonal phase.
pub const PHASE_LENGTHS: [usize; 3] = [10, 11, 12];

/// Input quantity level of a seasonal phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Little,
    Medium,
    Much,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Little, Level::Medium, Level::Much];

    /// Total-quantity range in percent.
    pub fn total_range(self) -> Range {
        match self {
            Level::Little => Range::new(10.0, 30.0),
            Level::Medium => Range::new(40.0, 60.0),
            Level::Much => Range::new(70.0, 90.0),
        }
    }
}

/// A/B composition regime of a seasonal phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RatioRegime {
    AHeavy,
    Balanced,
    BHeavy,
}

impl RatioRegime {
    pub const ALL: [RatioRegime; 3] = [RatioRegime::AHeavy, RatioRegime::Balanced, RatioRegime::BHeavy];

    /// Range of the share of material A.
    pub fn a_fraction_range(self) -> Range {
        match self {
            RatioRegime::AHeavy => Range::new(0.70, 0.90),
            RatioRegime::Balanced => Range::new(0.40, 0.60),
            RatioRegime::BHeavy => Range::new(0.10, 0.30),
        }
    }
}

/// One held seasonal pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonalPhase {
    pub level: Level,
    pub regime: RatioRegime,
    pub remaining_steps: usize,
}

impl SeasonalPhase {
    /// Pattern number in `0..9`, level-major.
    pub fn pattern_index(&self) -> usize {
        let level = Level::ALL.iter().position(|l| *l == self.level).unwrap();
        let regime = RatioRegime::ALL.iter().position(|r| *r == self.regime).unwrap();
        level * 3 + regime
    }
}

/// Per-environment input generator.
#[derive(Debug, Clone)]
pub struct GeneratorState {
    kind: InputType,
    phase: Option<SeasonalPhase>,
    stream: Stream,
}

impl GeneratorState {
    pub fn new(kind: InputType, root_seed: u64) -> Self {
        let phase = match kind {
            InputType::Random => None,
            InputType::Seasonal => Some(SeasonalPhase {
                level: Level::Little,
                regime: RatioRegime::Balanced,
                remaining_steps: 0,
            }),
        };
        Self {
            kind,
            phase,
            stream: Stream::new(root_seed, INPUT_STREAM),
        }
    }

    pub fn kind(&self) -> InputType {
        self.kind
    }

    /// Current seasonal phase; `None` for the random generator.
    pub fn phase(&self) -> Option<&SeasonalPhase> {
        self.phase.as_ref()
    }

    /// Draws the next input.
    pub fn next_input(&mut self) -> MaterialMix {
        match self.kind {
            InputType::Random => random_input(&mut self.stream),
            InputType::Seasonal => {
                let phase = self.phase.as_mut().expect("seasonal generator has a phase");
                seasonal_input(phase, &mut self.stream)
            }
        }
    }
}

fn split(total: f64, a_fraction: f64) -> MaterialMix {
    let a = total * a_fraction;
    MaterialMix::new(a, (total - a).max(0.0))
}

/// Total uniform in `[5, 95)` percent with a uniform A share.
pub fn random_input(stream: &mut Stream) -> MaterialMix {
    let total = stream.uniform(RANDOM_TOTAL.lo, RANDOM_TOTAL.hi);
    let a_fraction = stream.uniform(0.0, 1.0);
    split(total, a_fraction)
}

/// Next seasonal input, selecting a fresh phase when the current one is
/// exhausted. The total is re-drawn every step within the phase's level.
pub fn seasonal_input(phase: &mut SeasonalPhase, stream: &mut Stream) -> MaterialMix {
    if phase.remaining_steps == 0 {
        let pattern = stream.index(9);
        phase.level = Level::ALL[pattern / 3];
        phase.regime = RatioRegime::ALL[pattern % 3];
        phase.remaining_steps = PHASE_LENGTHS[stream.index(PHASE_LENGTHS.len())];
    }
    let level = phase.level.total_range();
    let regime = phase.regime.a_fraction_range();
    let total = stream.uniform(level.lo, level.hi);
    let a_fraction = stream.uniform(regime.lo, regime.hi);
    phase.remaining_steps -= 1;
    split(total, a_fraction)
}
