//! Tabular Q-learning over discretized observations.
//!
//! Table file format (UTF-8 text, one record per line):
//!
//! ```text
//! sortenv-qtable 1
//! variant basic
//! bins 20
//! categories 1
//! actions 10
//! <visits> <q_0> <q_1> ... <q_9>      one row per state, state order
//! ```
//!
//! State order is `category * bins + bin`. Values are written with Rust's
//! shortest round-trip float formatting.

use std::fmt::Write as _;
use std::path::Path;

use super::{Agent, Discretizer, DEFAULT_BINS};
use crate::config::{EnvConfig, EnvVariant};
use crate::env::{Action, Observation, SortingEnv, StepResult};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stream, AGENT_STREAM};

const MAGIC: &str = "sortenv-qtable 1";

/// Learning hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QHyper {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Share of training over which epsilon decays linearly.
    pub decay_fraction: f64,
    pub bins: usize,
}

impl Default for QHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            discount: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            decay_fraction: 0.5,
            bins: DEFAULT_BINS,
        }
    }
}

impl QHyper {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64, allow_zero: bool| {
            let ok = if allow_zero { (0.0..=1.0).contains(&v) } else { v > 0.0 && v <= 1.0 };
            if ok {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} out of range: {v}")))
            }
        };
        unit("learning_rate", self.learning_rate, false)?;
        unit("discount", self.discount, true)?;
        unit("epsilon_start", self.epsilon_start, true)?;
        unit("epsilon_end", self.epsilon_end, true)?;
        unit("decay_fraction", self.decay_fraction, false)?;
        if self.bins < 2 {
            return Err(Error::Argument("bins must be at least 2".into()));
        }
        Ok(())
    }

    /// Exploration rate after `step` of `total` training steps.
    pub fn epsilon_at(&self, step: usize, total: usize) -> f64 {
        let horizon = self.decay_fraction * total as f64;
        if horizon <= 0.0 || step as f64 >= horizon {
            return self.epsilon_end;
        }
        let t = step as f64 / horizon;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * t
    }
}

/// Action values per discretized state, with visit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    discretizer: Discretizer,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl QTable {
    pub fn new(variant: EnvVariant, bins: usize) -> Result<Self> {
        let discretizer = Discretizer::new(variant, bins)?;
        let states = discretizer.state_count();
        Ok(Self {
            discretizer,
            values: vec![0.0; states * variant.action_count()],
            visits: vec![0; states],
        })
    }

    pub fn discretizer(&self) -> &Discretizer {
        &self.discretizer
    }

    pub fn variant(&self) -> EnvVariant {
        self.discretizer.variant
    }

    pub fn action_count(&self) -> usize {
        self.variant().action_count()
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let n = self.action_count();
        &self.values[state * n..(state + 1) * n]
    }

    fn row_mut(&mut self, state: usize) -> &mut [f64] {
        let n = self.action_count();
        &mut self.values[state * n..(state + 1) * n]
    }

    pub fn visits(&self, state: usize) -> u64 {
        self.visits[state]
    }

    /// Greedy action index; ties go to the lower speed, then to mode order.
    pub fn greedy_index(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for i in 1..row.len() {
            let better = row[i] > row[best]
                || (row[i] == row[best] && tie_key(i) < tie_key(best));
            if better {
                best = i;
            }
        }
        best
    }

    pub fn greedy_action(&self, state: usize) -> Action {
        Action::from_index(self.variant(), self.greedy_index(state)).unwrap()
    }

    /// Epsilon-greedy action for an observation.
    pub fn act(&self, observation: &Observation, epsilon: f64, stream: &mut Stream) -> Result<Action> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Argument(format!("epsilon must be in [0, 1], got {epsilon}")));
        }
        let state = self.discretizer.state(observation)?;
        let index = if epsilon > 0.0 && stream.chance(epsilon) {
            stream.index(self.action_count())
        } else {
            self.greedy_index(state)
        };
        Action::from_index(self.variant(), index)
    }

    /// One-step temporal-difference update.
    pub fn update(
        &mut self,
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
        learning_rate: f64,
        discount: f64,
    ) {
        let next_best = self.row(next_state).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q = &mut self.row_mut(state)[action];
        *q += learning_rate * (reward + discount * next_best - *q);
        self.visits[state] += 1;
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let d = &self.discretizer;
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "variant {}", d.variant).unwrap();
        writeln!(out, "bins {}", d.bins).unwrap();
        writeln!(out, "categories {}", d.categories()).unwrap();
        writeln!(out, "actions {}", self.action_count()).unwrap();
        for state in 0..d.state_count() {
            write!(out, "{}", self.visits[state]).unwrap();
            for v in self.row(state) {
                write!(out, " {v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse_err = |msg: String| Error::Parse(format!("q-table: {msg}"));
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(parse_err("missing header".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| parse_err(format!("missing {key}")))?;
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| parse_err(format!("expected '{key} <value>', got '{line}'")))
        };
        let variant: EnvVariant = field("variant")?.parse()?;
        let bins: usize = field("bins")?.parse().map_err(|e| parse_err(format!("bins: {e}")))?;
        let categories: usize =
            field("categories")?.parse().map_err(|e| parse_err(format!("categories: {e}")))?;
        let actions: usize =
            field("actions")?.parse().map_err(|e| parse_err(format!("actions: {e}")))?;

        let mut table = QTable::new(variant, bins)?;
        if categories != table.discretizer.categories() || actions != variant.action_count() {
            return Err(parse_err("dimensions do not match variant".into()));
        }
        let mut rows = 0;
        for (state, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            if state >= table.discretizer.state_count() {
                return Err(parse_err("too many rows".into()));
            }
            let mut parts = line.split_whitespace();
            table.visits[state] = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|e| parse_err(format!("row {state} visits: {e}")))?;
            let values: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(format!("row {state}: {e}")))?;
            if values.len() != actions || values.iter().any(|v| !v.is_finite()) {
                return Err(parse_err(format!("row {state} needs {actions} finite values")));
            }
            table.row_mut(state).copy_from_slice(&values);
            rows += 1;
        }
        if rows != table.discretizer.state_count() {
            return Err(parse_err(format!("expected {} rows, got {rows}", table.discretizer.state_count())));
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn tie_key(index: usize) -> (usize, usize) {
    (index % 10, index / 10)
}

/// Learning agent: acts epsilon-greedily and updates on every `notify`.
#[derive(Debug, Clone)]
pub struct QLearner {
    table: QTable,
    hyper: QHyper,
    stream: Stream,
    total_steps: usize,
    steps_taken: usize,
    pending: Option<(usize, usize)>,
}

impl QLearner {
    pub fn new(variant: EnvVariant, hyper: QHyper, total_steps: usize, seed: u64) -> Result<Self> {
        hyper.validate()?;
        Ok(Self {
            table: QTable::new(variant, hyper.bins)?,
            hyper,
            stream: Stream::new(seed, AGENT_STREAM),
            total_steps,
            steps_taken: 0,
            pending: None,
        })
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn into_table(self) -> QTable {
        self.table
    }

    pub fn epsilon(&self) -> f64 {
        self.hyper.epsilon_at(self.steps_taken, self.total_steps)
    }
}

impl Agent for QLearner {
    fn name(&self) -> &str {
        "qlearner"
    }

    fn variant(&self) -> EnvVariant {
        self.table.variant()
    }

    fn act(&mut self, observation: &Observation) -> Result<Action> {
        let epsilon = self.epsilon();
        let action = self.table.act(observation, epsilon, &mut self.stream)?;
        self.pending = Some((self.table.discretizer.state(observation)?, action.index()));
        Ok(action)
    }

    fn notify(&mut self, result: &StepResult) {
        let Some((state, action)) = self.pending.take() else {
            return;
        };
        let next = self
            .table
            .discretizer
            .state(&result.observation)
            .expect("environment observations are in range");
        let (lr, gamma) = (self.hyper.learning_rate, self.hyper.discount);
        self.table.update(state, action, result.reward, next, lr, gamma);
        self.steps_taken += 1;
    }
}

/// Training budget and seeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainSpec {
    pub total_steps: usize,
    pub episode_length: usize,
    pub seed: u64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self { total_steps: 100_000, episode_length: 250, seed: 0 }
    }
}

/// Trains a Q-table from scratch on fresh episodes of `config`.
///
/// Episode `i` is reset with seed `derive_seed(spec.seed, "train-episode") + i`;
/// exploration draws come from the agent stream of `spec.seed`.
pub fn train_q(config: &EnvConfig, hyper: QHyper, spec: TrainSpec) -> Result<QTable> {
    if spec.episode_length == 0 || spec.total_steps == 0 {
        return Err(Error::Argument("training budget must be positive".into()));
    }
    let config = EnvConfig { episode_length: spec.episode_length, ..config.clone() };
    let mut env = SortingEnv::new(config)?;
    let mut learner = QLearner::new(env.variant(), hyper, spec.total_steps, spec.seed)?;
    let base = derive_seed(spec.seed, "train-episode");
    let mut steps = 0;
    let mut episode = 0u64;
    while steps < spec.total_steps {
        let mut obs = env.reset(Some(base.wrapping_add(episode)));
        loop {
            let action = learner.act(&obs)?;
            let result = env.step(action)?;
            learner.notify(&result);
            obs = result.observation;
            steps += 1;
            if result.done || steps >= spec.total_steps {
                break;
            }
        }
        episode += 1;
    }
    Ok(learner.into_table())
}

/// Greedy (or epsilon-greedy) evaluation agent over a trained table.
#[derive(Debug, Clone)]
pub struct QAgent {
    table: QTable,
    epsilon: f64,
    stream: Stream,
}

impl QAgent {
    pub fn greedy(table: QTable) -> Self {
        Self { table, epsilon: 0.0, stream: Stream::new(0, AGENT_STREAM) }
    }

    pub fn with_epsilon(table: QTable, epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Argument(format!("epsilon must be in [0, 1], got {epsilon}")));
        }
        Ok(Self { table, epsilon, stream: Stream::new(seed, AGENT_STREAM) })
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }
}

impl Agent for QAgent {
    fn name(&self) -> &str {
        "qtable"
    }

    fn variant(&self) -> EnvVariant {
        self.table.variant()
    }

    fn act(&mut self, observation: &Observation) -> Result<Action> {
        self.table.act(observation, self.epsilon, &mut self.stream)
    }
}
