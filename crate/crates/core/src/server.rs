//! Newline-delimited JSON server exposing reset/step over TCP.
//!
//! Every request line gets exactly one response line. Each connection owns
//! one session with its own environment; a `reset` abandons any running
//! episode.
//!
//! ```text
//! > {"type":"hello","version":1}
//! < {"type":"spec","version":1,"variant":"basic","action_count":10,...}
//! > {"type":"reset","seed":42}
//! < {"type":"state","observation":{"input_total":0.48},"reward":0.0,"done":false,"info":null}
//! > {"type":"step","action":4}
//! < {"type":"state","observation":{...},"reward":0.61,"done":false,"info":{...}}
//! > {"type":"close"}
//! < {"type":"closed"}
//! ```
//!
//! `action` is either a flat index or `{"speed_index":5,"mode":"positive"}`.
//! `reset` may carry `"config":{...}` with any subset of the configuration
//! keys, applied over the server's base configuration.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::EnvConfig;
use crate::env::{Action, Observation, SortingEnv, StepInfo};
use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u32 = 1;

/// Action as sent on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireAction {
    Index(usize),
    Explicit(Action),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Request {
    Hello {
        #[serde(default)]
        version: Option<u32>,
    },
    Reset {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        config: Option<Value>,
    },
    Step {
        action: WireAction,
    },
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    Malformed,
    UnsupportedVersion,
    BadConfig,
    NoEpisode,
    EpisodeDone,
    BadAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Spec {
        version: u32,
        variant: String,
        input_type: String,
        action_count: usize,
        actions: Vec<Action>,
        observation_fields: Vec<String>,
        episode_length: usize,
    },
    State {
        observation: Observation,
        reward: f64,
        done: bool,
        info: Option<StepInfo>,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
    Closed,
}

impl Response {
    fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Response::Error { code, message: message.into() }
    }
}

/// Applies a partial JSON object of config keys over `base`.
pub fn apply_overrides(base: &EnvConfig, overrides: &Value) -> Result<EnvConfig> {
    let Value::Object(patch) = overrides else {
        return Err(Error::Config("config overrides must be an object".into()));
    };
    let mut merged = serde_json::to_value(base).expect("config serializes");
    let target = merged.as_object_mut().expect("config is an object");
    for (key, value) in patch {
        target.insert(key.clone(), value.clone());
    }
    let config: EnvConfig =
        serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Protocol state of one connection.
#[derive(Debug)]
pub struct Session {
    base: Arc<EnvConfig>,
    env: Option<SortingEnv>,
}

impl Session {
    pub fn new(base: Arc<EnvConfig>) -> Self {
        Self { base, env: None }
    }

    fn spec(&self) -> Response {
        let config = self.env.as_ref().map_or(self.base.as_ref(), |e| e.config());
        let mut fields = vec!["input_total".to_owned()];
        if config.variant == crate::config::EnvVariant::Advanced {
            fields.push("ratio_category".to_owned());
        }
        Response::Spec {
            version: PROTOCOL_VERSION,
            variant: config.variant.to_string(),
            input_type: config.input_type.to_string(),
            action_count: config.variant.action_count(),
            actions: Action::all(config.variant),
            observation_fields: fields,
            episode_length: config.episode_length,
        }
    }

    /// Handles one request.
    pub fn handle(&mut self, request: Request) -> Response {
        match request {
            Request::Hello { version } => match version {
                Some(v) if v != PROTOCOL_VERSION => Response::error(
                    ErrorCode::UnsupportedVersion,
                    format!("server speaks version {PROTOCOL_VERSION}, client asked for {v}"),
                ),
                _ => self.spec(),
            },
            Request::Reset { seed, config } => {
                let config = match config {
                    Some(patch) => match apply_overrides(&self.base, &patch) {
                        Ok(c) => c,
                        Err(e) => return Response::error(ErrorCode::BadConfig, e.to_string()),
                    },
                    None => self.base.as_ref().clone(),
                };
                let mut env = match SortingEnv::new(config) {
                    Ok(env) => env,
                    Err(e) => return Response::error(ErrorCode::BadConfig, e.to_string()),
                };
                let observation = env.reset(seed);
                self.env = Some(env);
                Response::State { observation, reward: 0.0, done: false, info: None }
            }
            Request::Step { action } => {
                let Some(env) = self.env.as_mut() else {
                    return Response::error(ErrorCode::NoEpisode, "step before reset");
                };
                if env.is_done() {
                    return Response::error(ErrorCode::EpisodeDone, "episode is done; send reset");
                }
                let action = match action {
                    WireAction::Explicit(a) => a,
                    WireAction::Index(i) => match Action::from_index(env.variant(), i) {
                        Ok(a) => a,
                        Err(e) => return Response::error(ErrorCode::BadAction, e.to_string()),
                    },
                };
                match env.step(action) {
                    Ok(r) => Response::State {
                        observation: r.observation,
                        reward: r.reward,
                        done: r.done,
                        info: Some(r.info),
                    },
                    Err(Error::Argument(msg)) => Response::error(ErrorCode::BadAction, msg),
                    Err(e) => Response::error(ErrorCode::EpisodeDone, e.to_string()),
                }
            }
            Request::Close => {
                self.env = None;
                Response::Closed
            }
        }
    }

    /// Handles one raw line; returns the response line (without newline)
    /// and whether the session should end.
    pub fn handle_line(&mut self, line: &str) -> (String, bool) {
        let response = match serde_json::from_str::<Request>(line) {
            Ok(request) => self.handle(request),
            Err(e) => Response::error(ErrorCode::Malformed, e.to_string()),
        };
        let close = matches!(response, Response::Closed);
        (serde_json::to_string(&response).expect("response serializes"), close)
    }
}

/// Runs a session over any line-oriented byte stream until EOF or `close`.
pub fn serve_stream<R: BufRead, W: Write>(reader: R, mut writer: W, base: Arc<EnvConfig>) -> Result<()> {
    let mut session = Session::new(base);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (response, close) = session.handle_line(&line);
        writer.write_all(response.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        if close {
            break;
        }
    }
    Ok(())
}

/// TCP listener spawning one thread per connection.
pub struct Server {
    listener: TcpListener,
    base: Arc<EnvConfig>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, base: EnvConfig) -> Result<Self> {
        base.validate()?;
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        Ok(Self { listener, base: Arc::new(base) })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections until `shutdown` is set. Open sessions finish on
    /// their own threads.
    pub fn run(&self, shutdown: &AtomicBool) -> Result<()> {
        while !shutdown.load(Ordering::SeqCst) {
            match self.listener.accept() {
                Ok((stream, _)) => {
                    let base = Arc::clone(&self.base);
                    std::thread::spawn(move || {
                        if let Err(e) = handle_connection(stream, base) {
                            eprintln!("session ended with error: {e}");
                        }
                    });
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }
}

fn handle_connection(stream: TcpStream, base: Arc<EnvConfig>) -> Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    serve_stream(reader, stream, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn session() -> Session {
        Session::new(Arc::new(EnvConfig::default()))
    }

    fn send(s: &mut Session, v: Value) -> Value {
        serde_json::from_str(&s.handle_line(&v.to_string()).0).unwrap()
    }

    #[test]
    fn hello_lists_actions() {
        let mut s = session();
        let r = send(&mut s, json!({"type": "hello", "version": 1}));
        assert_eq!(r["type"], "spec");
        assert_eq!(r["action_count"], 10);
        assert_eq!(r["actions"].as_array().unwrap().len(), 10);

        let mut adv = Session::new(Arc::new(EnvConfig {
            variant: crate::config::EnvVariant::Advanced,
            ..EnvConfig::default()
        }));
        let r = send(&mut adv, json!({"type": "hello"}));
        assert_eq!(r["action_count"], 30);
        assert_eq!(r["observation_fields"], json!(["input_total", "ratio_category"]));
    }

    #[test]
    fn wrong_version_rejected() {
        let r = send(&mut session(), json!({"type": "hello", "version": 9}));
        assert_eq!(r["code"], "UNSUPPORTED_VERSION");
    }

    #[test]
    fn step_before_reset_is_no_episode() {
        let r = send(&mut session(), json!({"type": "step", "action": 3}));
        assert_eq!(r["type"], "error");
        assert_eq!(r["code"], "NO_EPISODE");
    }

    #[test]
    fn malformed_line_keeps_session_alive() {
        let mut s = session();
        let (line, close) = s.handle_line("{not json");
        assert!(!close);
        assert!(line.contains("MALFORMED"));
        let r = send(&mut s, json!({"type": "reset", "seed": 1}));
        assert_eq!(r["type"], "state");
    }

    #[test]
    fn out_of_range_action_is_error() {
        let mut s = session();
        send(&mut s, json!({"type": "reset", "seed": 1}));
        assert_eq!(send(&mut s, json!({"type": "step", "action": 10}))["code"], "BAD_ACTION");
        let r = send(&mut s, json!({"type": "step", "action": {"speed_index": 0}}));
        assert_eq!(r["code"], "BAD_ACTION");
        let r = send(&mut s, json!({"type": "step", "action": {"speed_index": 3}}));
        assert_eq!(r["type"], "state");
    }

    #[test]
    fn episode_runs_to_done_then_errors() {
        let mut s = session();
        send(&mut s, json!({"type": "reset", "seed": 1, "config": {"episode_length": 3}}));
        let mut last = Value::Null;
        for _ in 0..3 {
            last = send(&mut s, json!({"type": "step", "action": 4}));
        }
        assert_eq!(last["done"], true);
        assert_eq!(send(&mut s, json!({"type": "step", "action": 4}))["code"], "EPISODE_DONE");
    }

    #[test]
    fn bad_config_override_rejected() {
        let mut s = session();
        let r = send(&mut s, json!({"type": "reset", "config": {"threshold": 2.0}}));
        assert_eq!(r["code"], "BAD_CONFIG");
        let r = send(&mut s, json!({"type": "reset", "config": {"bogus": 1}}));
        assert_eq!(r["code"], "BAD_CONFIG");
    }

    #[test]
    fn close_ends_session() {
        let (line, close) = session().handle_line(r#"{"type":"close"}"#);
        assert!(close);
        assert_eq!(line, r#"{"type":"closed"}"#);
    }

    #[test]
    fn serve_stream_answers_each_line() {
        let input = "{\"type\":\"hello\"}\n\n{\"type\":\"reset\",\"seed\":5}\n{\"type\":\"close\"}\n{\"type\":\"hello\"}\n";
        let mut out = Vec::new();
        serve_stream(input.as_bytes(), &mut out, Arc::new(EnvConfig::default())).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
