//! Test-only oracles and helpers. The formulas here are written out
//! independently of `sortenv::sorting` and must stay that way.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::PathBuf;

use serde_json::{json, Value};
use sortenv::agents::Agent;
use sortenv::bench::{EpisodeTrace, TraceHeader};
use sortenv::{Observation, SortingMode};

/// xorshift64* for generating test inputs, unrelated to the crate's streams.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

pub fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Accuracy surface: within-limit branch and linear abatement branch.
pub fn oracle_base_accuracy(occupancy: f64, limit: f64, lambda: f64, noise: f64) -> f64 {
    if occupancy <= limit {
        clamp01(1.0 - noise)
    } else {
        let excess = occupancy - limit;
        clamp01(1.0 - excess * lambda - noise)
    }
}

/// Ratio classification by explicit division.
pub fn oracle_classify(a: f64, b: f64) -> SortingMode {
    if b == 0.0 {
        return if a > 0.0 { SortingMode::Positive } else { SortingMode::Basic };
    }
    let ratio = a / b;
    if ratio > 3.0 {
        SortingMode::Positive
    } else if ratio < 1.0 / 3.0 {
        SortingMode::Negative
    } else {
        SortingMode::Basic
    }
}

pub fn oracle_apply_mode(alpha: f64, correct: bool, noise: f64) -> f64 {
    let adjusted = if correct {
        if alpha + 0.15 < 1.0 { alpha + 0.15 } else { 1.0 }
    } else if alpha - 0.10 > 0.0 {
        alpha - 0.10
    } else {
        0.0
    };
    clamp01(adjusted - noise)
}

/// `(S_A, S_B, a_true, a_false, b_true, b_false)`.
pub fn oracle_sort(a: f64, b: f64, alpha: f64) -> [f64; 6] {
    let s_a = alpha * a + (1.0 - alpha) * b;
    let s_b = alpha * b + (1.0 - alpha) * a;
    [s_a, s_b, alpha * a, (1.0 - alpha) * b, alpha * b, (1.0 - alpha) * a]
}

pub fn oracle_purity(a_true: f64, a_false: f64, b_true: f64, b_false: f64) -> f64 {
    let stored = a_true + a_false + b_true + b_false;
    if stored == 0.0 {
        1.0
    } else {
        (a_true + b_true) / stored
    }
}

#[allow(clippy::too_many_arguments)]
pub fn oracle_reward(
    alpha: f64,
    v: f64,
    threshold: f64,
    r_acc: f64,
    r_speed: f64,
    penalty: f64,
    changed: bool,
) -> f64 {
    let p = if changed { penalty } else { 0.0 };
    if alpha < threshold {
        -0.1 - p
    } else {
        r_acc * (alpha - threshold) / (1.0 - threshold) + r_speed * (v - 0.1) / 0.9 - p
    }
}

/// Default occupancy limit for speed fraction `v`.
pub fn oracle_limit(v: f64) -> f64 {
    (1.1 - v).clamp(0.1, 1.0)
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Compares `actual` with a golden file; writes it instead when
/// `SORTENV_BLESS=1`.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var("SORTENV_BLESS").as_deref() == Ok("1") {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{} differs from the generated output", path.display()))
    }
}

/// Line client for the environment server.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    pub fn connect(addr: SocketAddr) -> Self {
        let stream = TcpStream::connect(addr).expect("connect");
        stream.set_nodelay(true).unwrap();
        Self {
            reader: BufReader::new(stream.try_clone().unwrap()),
            writer: stream,
        }
    }

    pub fn send_raw(&mut self, line: &str) -> Value {
        self.writer.write_all(format!("{line}\n").as_bytes()).unwrap();
        let mut response = String::new();
        self.reader.read_line(&mut response).unwrap();
        serde_json::from_str(&response).expect("response is JSON")
    }

    pub fn send(&mut self, request: Value) -> Value {
        self.send_raw(&request.to_string())
    }
}

pub fn observation_of(state: &Value) -> Observation {
    serde_json::from_value(state["observation"].clone()).unwrap()
}

/// Drives a full episode through the server with a local agent.
pub fn remote_episode(addr: SocketAddr, seed: u64, overrides: Value, agent: &mut dyn Agent) -> EpisodeTrace {
    let mut client = Client::connect(addr);
    let hello = client.send(json!({"type": "hello", "version": 1}));
    assert_eq!(hello["type"], "spec");
    let mut state = client.send(json!({"type": "reset", "seed": seed, "config": overrides}));
    assert_eq!(state["type"], "state", "{state}");
    let mut trace = EpisodeTrace::new(TraceHeader {
        config_digest: 0,
        seed,
        agent: agent.name().to_owned(),
    });
    loop {
        let action = agent.act(&observation_of(&state)).unwrap();
        state = client.send(json!({"type": "step", "action": action}));
        assert_eq!(state["type"], "state", "{state}");
        let info = &state["info"];
        let mode = info.get("mode").and_then(|m| m.as_str()).map(|m| m.parse::<SortingMode>().unwrap());
        trace.push(
            info["speed"].as_f64().unwrap(),
            mode,
            info["occupancy"].as_f64().unwrap(),
            info["accuracy"].as_f64().unwrap(),
            state["reward"].as_f64().unwrap(),
            info["purity"].as_f64().unwrap(),
        );
        if state["done"].as_bool().unwrap() {
            break;
        }
    }
    assert_eq!(client.send(json!({"type": "close"}))["type"], "closed");
    trace
}
