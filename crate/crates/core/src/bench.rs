//! Episode runner, trace export and the multi-seed benchmark protocol.

use std::fmt::Write as _;
use std::path::Path;

use crate::agents::{
    train_q, Agent, QAgent, QHyper, RandomAgent, RuleBasedAgent, TrainSpec, DEFAULT_BINS,
};
use crate::config::{EnvConfig, EnvVariant, InputType, Range};
use crate::env::SortingEnv;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sorting::{accuracy_before_noise, step_reward, SortingMode, SPEED_COUNT};

/// Column header of trace files.
pub const TRACE_HEADER: &str = "step,speed,mode,occupancy,accuracy,reward,cum_reward,purity";

/// One step of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    /// Belt speed fraction.
    pub speed: f64,
    /// Mode plot code (0, 0.5, 1.0); 0 for the basic variant.
    pub mode: f64,
    pub occupancy: f64,
    pub accuracy: f64,
    pub reward: f64,
    pub cum_reward: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub config_digest: u64,
    pub seed: u64,
    pub agent: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow>,
}

impl EpisodeTrace {
    pub fn new(header: TraceHeader) -> Self {
        Self { header, rows: Vec::new() }
    }

    /// Appends a step; the cumulative reward is the running prefix sum.
    pub fn push(&mut self, speed: f64, mode: Option<SortingMode>, occupancy: f64, accuracy: f64, reward: f64, purity: f64) {
        let cum_reward = self.rows.last().map_or(0.0, |r| r.cum_reward) + reward;
        self.rows.push(TraceRow {
            step: self.rows.len() + 1,
            speed,
            mode: mode.map_or(0.0, SortingMode::plot_code),
            occupancy,
            accuracy,
            reward,
            cum_reward,
            purity,
        });
    }

    /// Number of steps whose speed differs from the previous step's.
    pub fn speed_changes(&self) -> usize {
        self.rows.windows(2).filter(|w| w[0].speed != w[1].speed).count()
    }

    /// CSV text: header plus one line per row, six decimals per float.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.step, r.speed, r.mode, r.occupancy, r.accuracy, r.reward, r.cum_reward, r.purity
            )
            .unwrap();
        }
        out
    }

    /// Parses CSV produced by [`EpisodeTrace::to_csv`]. The header metadata
    /// is not stored in the file and must be supplied.
    pub fn from_csv(text: &str, header: TraceHeader) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_HEADER) {
            return Err(Error::Parse("trace: unexpected header line".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::Parse(format!("trace line {}: expected 8 fields", i + 2)));
            }
            let num = |k: usize| -> Result<f64> {
                fields[k]
                    .parse()
                    .map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 2)))
            };
            rows.push(TraceRow {
                step: fields[0]
                    .parse()
                    .map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 2)))?,
                speed: num(1)?,
                mode: num(2)?,
                occupancy: num(3)?,
                accuracy: num(4)?,
                reward: num(5)?,
                cum_reward: num(6)?,
                purity: num(7)?,
            });
        }
        Ok(Self { header, rows })
    }

    pub fn summary(&self) -> EpisodeSummary {
        let n = self.rows.len().max(1) as f64;
        EpisodeSummary {
            mean_speed: 100.0 * self.rows.iter().map(|r| r.speed).sum::<f64>() / n,
            mean_purity: 100.0 * self.rows.last().map_or(1.0, |r| r.purity),
            cumulative_reward: self.rows.last().map_or(0.0, |r| r.cum_reward),
            speed_changes: self.speed_changes(),
        }
    }
}

/// Writes a trace as CSV.
pub fn export_trace(trace: &EpisodeTrace, path: &Path) -> Result<()> {
    std::fs::write(path, trace.to_csv())?;
    Ok(())
}

/// Episode outcome on the scale used in reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    /// Mean belt speed in percent.
    pub mean_speed: f64,
    /// Storage purity at episode end, in percent.
    pub mean_purity: f64,
    pub cumulative_reward: f64,
    pub speed_changes: usize,
}

/// Runs one `steps`-long episode of `config` with `agent`, reset with `seed`.
pub fn run_episode(
    config: &EnvConfig,
    agent: &mut dyn Agent,
    steps: usize,
    seed: u64,
) -> Result<(EpisodeTrace, EpisodeSummary)> {
    if agent.variant() != config.variant {
        return Err(Error::Config(format!(
            "agent '{}' acts in the {} variant but the environment is {}",
            agent.name(),
            agent.variant(),
            config.variant
        )));
    }
    let config = EnvConfig { episode_length: steps, ..config.clone() };
    let digest = config.digest();
    let mut env = SortingEnv::new(config)?;
    let mut obs = env.reset(Some(seed));
    let mut trace = EpisodeTrace::new(TraceHeader {
        config_digest: digest,
        seed,
        agent: agent.name().to_owned(),
    });
    loop {
        let action = agent.act(&obs)?;
        let result = env.step(action)?;
        agent.notify(&result);
        let info = &result.info;
        trace.push(info.speed, info.mode, info.occupancy, info.accuracy, result.reward, info.purity);
        obs = result.observation;
        if result.done {
            break;
        }
    }
    let summary = trace.summary();
    Ok((trace, summary))
}

/// One experimental condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub name: char,
    pub input_type: InputType,
    pub obs_noise_level: f64,
    pub action_penalty: f64,
}

impl Setup {
    /// Random/seasonal input crossed with 0.0/0.3 observation noise; seasonal
    /// setups carry a 0.5 action penalty.
    pub const STANDARD: [Setup; 4] = [
        Setup { name: 'A', input_type: InputType::Random, obs_noise_level: 0.0, action_penalty: 0.0 },
        Setup { name: 'B', input_type: InputType::Seasonal, obs_noise_level: 0.0, action_penalty: 0.5 },
        Setup { name: 'C', input_type: InputType::Random, obs_noise_level: 0.3, action_penalty: 0.0 },
        Setup { name: 'D', input_type: InputType::Seasonal, obs_noise_level: 0.3, action_penalty: 0.5 },
    ];

    pub fn by_name(name: char) -> Option<Setup> {
        Self::STANDARD.into_iter().find(|s| s.name == name.to_ascii_uppercase())
    }

    /// Applies this setup on top of `base`.
    pub fn config(&self, base: &EnvConfig, variant: EnvVariant) -> EnvConfig {
        EnvConfig {
            variant,
            input_type: self.input_type,
            obs_noise_level: self.obs_noise_level,
            action_penalty: self.action_penalty,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Rba,
    QTable,
    Random,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Rba => "rba",
            AgentKind::QTable => "qtable",
            AgentKind::Random => "random",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rba" => Ok(AgentKind::Rba),
            "qtable" => Ok(AgentKind::QTable),
            "random" => Ok(AgentKind::Random),
            other => Err(Error::Parse(format!("unknown agent '{other}'"))),
        }
    }
}

/// Training and evaluation parameters of a benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkPlan {
    pub eval_steps: usize,
    pub train_steps: usize,
    pub train_episode_length: usize,
    pub hyper: QHyper,
    pub bins: usize,
}

impl Default for BenchmarkPlan {
    fn default() -> Self {
        Self {
            eval_steps: 50,
            train_steps: 100_000,
            train_episode_length: 250,
            hyper: QHyper::default(),
            bins: DEFAULT_BINS,
        }
    }
}

/// Builds the evaluation agent of `kind` for one seed, training it from
/// scratch when it learns.
pub fn make_agent(
    kind: AgentKind,
    config: &EnvConfig,
    plan: &BenchmarkPlan,
    seed: u64,
) -> Result<Box<dyn Agent + Send>> {
    Ok(match kind {
        AgentKind::Rba => Box::new(RuleBasedAgent::from_config(config, plan.bins)?),
        AgentKind::Random => Box::new(RandomAgent::new(config.variant, seed)),
        AgentKind::QTable => {
            let spec = TrainSpec {
                total_steps: plan.train_steps,
                episode_length: plan.train_episode_length,
                seed: derive_seed(seed, "train"),
            };
            let hyper = QHyper { bins: plan.bins, ..plan.hyper };
            Box::new(QAgent::greedy(train_q(config, hyper, spec)?))
        }
    })
}

/// Aggregate over seeds for one setup, variant and agent.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub setup: char,
    pub variant: EnvVariant,
    pub agent: AgentKind,
    pub input_type: InputType,
    pub obs_noise_level: f64,
    pub action_penalty: f64,
    pub seeds: usize,
    pub mean_reward: f64,
    /// Population standard deviation of the cumulative reward.
    pub std_reward: f64,
    pub mean_speed: f64,
    pub mean_purity: f64,
    pub mean_speed_changes: f64,
    /// Per-seed summaries in seed order.
    pub episodes: Vec<(u64, EpisodeSummary)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub records: Vec<BenchmarkRecord>,
}

/// Mean and population standard deviation; `(0, 0)` for no samples.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Evaluates one agent kind on one configuration over `seeds`.
///
/// Seeds run in parallel; results are collected in sorted seed order.
pub fn evaluate(
    config: &EnvConfig,
    kind: AgentKind,
    seeds: &[u64],
    plan: &BenchmarkPlan,
) -> Result<Vec<(u64, EpisodeTrace, EpisodeSummary)>> {
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Argument("benchmark seeds must be distinct".into()));
    }
    if sorted.is_empty() {
        return Err(Error::Argument("benchmark needs at least one seed".into()));
    }
    let results: Vec<Result<(u64, EpisodeTrace, EpisodeSummary)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sorted
            .iter()
            .map(|&seed| {
                scope.spawn(move || {
                    let mut agent = make_agent(kind, config, plan, seed)?;
                    let (trace, summary) = run_episode(config, agent.as_mut(), plan.eval_steps, seed)?;
                    Ok((seed, trace, summary))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("evaluation thread panicked")).collect()
    });
    results.into_iter().collect()
}

/// Runs every setup for both variants and every agent kind.
pub fn run_benchmark(
    base: &EnvConfig,
    setups: &[Setup],
    variants: &[EnvVariant],
    agents: &[AgentKind],
    seeds: &[u64],
    plan: &BenchmarkPlan,
) -> Result<BenchmarkReport> {
    let mut records = Vec::new();
    for setup in setups {
        for &variant in variants {
            let config = setup.config(base, variant);
            for &kind in agents {
                let runs = evaluate(&config, kind, seeds, plan)?;
                let episodes: Vec<(u64, EpisodeSummary)> =
                    runs.iter().map(|(seed, _, s)| (*seed, *s)).collect();
                let rewards: Vec<f64> = episodes.iter().map(|(_, s)| s.cumulative_reward).collect();
                let (mean_reward, std_reward) = mean_std(&rewards);
                let avg = |f: fn(&EpisodeSummary) -> f64| {
                    episodes.iter().map(|(_, s)| f(s)).sum::<f64>() / episodes.len() as f64
                };
                records.push(BenchmarkRecord {
                    setup: setup.name,
                    variant,
                    agent: kind,
                    input_type: setup.input_type,
                    obs_noise_level: setup.obs_noise_level,
                    action_penalty: setup.action_penalty,
                    seeds: episodes.len(),
                    mean_reward,
                    std_reward,
                    mean_speed: avg(|s| s.mean_speed),
                    mean_purity: avg(|s| s.mean_purity),
                    mean_speed_changes: avg(|s| s.speed_changes as f64),
                    episodes,
                });
            }
        }
    }
    Ok(BenchmarkReport { records })
}

pub const REPORT_HEADER: &str =
    "setup,env,agent,input,noise,penalty,seeds,mean_reward,std_reward,mean_speed,mean_purity,mean_speed_changes";

impl BenchmarkReport {
    /// Machine-readable CSV, one record per setup, variant and agent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{:.1},{:.1},{},{:.6},{:.6},{:.1},{:.1},{:.2}",
                r.setup,
                r.variant,
                r.agent.as_str(),
                r.input_type,
                r.obs_noise_level,
                r.action_penalty,
                r.seeds,
                r.mean_reward,
                r.std_reward,
                r.mean_speed,
                r.mean_purity,
                r.mean_speed_changes
            )
            .unwrap();
        }
        out
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<6} {:<9} {:<7} {:<9} {:>5} {:>7} {:>6} {:>7} {:>15} {:>8}",
            "Index", "Env", "Agent", "Input", "Noise", "Penalty", "Speed", "Purity", "Reward", "Changes"
        )
        .unwrap();
        let mut counters = std::collections::HashMap::new();
        for r in &self.records {
            let n = counters.entry(r.setup).or_insert(0);
            *n += 1;
            writeln!(
                out,
                "{:<6} {:<9} {:<7} {:<9} {:>5.1} {:>7.1} {:>6.1} {:>7.1} {:>8.2} ± {:<5.2} {:>8.1}",
                format!("{}{}", r.setup, n),
                r.variant,
                r.agent.as_str(),
                r.input_type,
                r.obs_noise_level,
                r.action_penalty,
                r.mean_speed,
                r.mean_purity,
                r.mean_reward,
                r.std_reward,
                r.mean_speed_changes
            )
            .unwrap();
        }
        out
    }

    pub fn find(&self, setup: char, variant: EnvVariant, agent: AgentKind) -> Option<&BenchmarkRecord> {
        self.records
            .iter()
            .find(|r| r.setup == setup && r.variant == variant && r.agent == agent)
    }
}

/// Noise-free accuracy and reward over every speed and occupancy
/// `0.00..=1.00` in steps of 0.01, as CSV
/// `speed_index,speed,occupancy,limit,accuracy,reward`.
pub fn surface_csv(config: &EnvConfig) -> String {
    let config = EnvConfig {
        base_noise_range: Range::new(0.0, 0.0),
        action_penalty: 0.0,
        ..config.clone()
    };
    let mut out = String::from("speed_index,speed,occupancy,limit,accuracy,reward\n");
    for speed_index in 1..=SPEED_COUNT as u8 {
        let v = f64::from(speed_index) / 10.0;
        for step in 0..=100 {
            let o = f64::from(step) / 100.0;
            let alpha = accuracy_before_noise(speed_index, o, &config.occupancy_limits, config.lambda);
            let reward = step_reward(alpha, v, &config, false);
            writeln!(
                out,
                "{speed_index},{v:.1},{o:.2},{:.6},{alpha:.6},{reward:.6}",
                config.occupancy_limits.limit(speed_index)
            )
            .unwrap();
        }
    }
    out
}
