//! C ABI for the sortenv simulator.
//!
//! Environments and rule-based agents are exposed as opaque handles. Every
//! fallible call returns a [`SortenvStatus`]; the message for the most
//! recent failure on the calling thread is available from
//! [`sortenv_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sortenv::agents::{RuleBasedAgent, DEFAULT_BINS};
use sortenv::{Action, EnvConfig, EnvVariant, InputType, Observation, SortingEnv, SortingMode};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortenvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BadConfig = 3,
    NoEpisode = 4,
    EpisodeDone = 5,
    BadAction = 6,
    Panic = 7,
}

/// Environment variant selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortenvVariant {
    Basic = 0,
    Advanced = 1,
}

/// Input generator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortenvInput {
    Random = 0,
    Seasonal = 1,
}

/// Observation. `ratio_category` is -1 in the basic variant, else
/// 0 = basic, 1 = positive, 2 = negative.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortenvObservation {
    pub input_total: f64,
    pub ratio_category: i32,
}

/// Result of one step. `mode` follows the `ratio_category` encoding.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortenvStep {
    pub observation: SortenvObservation,
    pub reward: f64,
    pub done: bool,
    pub accuracy: f64,
    pub occupancy: f64,
    pub speed: f64,
    pub mode: i32,
    pub purity: f64,
    pub speed_changed: bool,
}

/// Opaque environment handle.
pub struct SortenvEnv {
    env: SortingEnv,
}

/// Opaque rule-based agent handle.
pub struct SortenvRba {
    agent: RuleBasedAgent,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: SortenvStatus, message: impl Into<String>) -> SortenvStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> SortenvStatus) -> SortenvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SortenvStatus::Panic, "internal panic"),
    }
}

fn mode_code(mode: Option<SortingMode>) -> i32 {
    mode.map_or(-1, |m| m.index() as i32)
}

fn observation(obs: &Observation) -> SortenvObservation {
    SortenvObservation { input_total: obs.input_total, ratio_category: mode_code(obs.ratio_category) }
}

fn decode_observation(obs: &SortenvObservation, variant: EnvVariant) -> Result<Observation, String> {
    if !(0.0..=1.0).contains(&obs.input_total) {
        return Err(format!("input_total {} outside [0, 1]", obs.input_total));
    }
    let ratio_category = match (variant, obs.ratio_category) {
        (EnvVariant::Basic, _) => None,
        (EnvVariant::Advanced, c @ 0..=2) => Some(SortingMode::ALL[c as usize]),
        (EnvVariant::Advanced, c) => return Err(format!("ratio category {c} is not 0, 1 or 2")),
    };
    Ok(Observation { input_total: obs.input_total, ratio_category })
}

fn build_env(config: EnvConfig, out: *mut *mut SortenvEnv) -> SortenvStatus {
    if out.is_null() {
        return fail(SortenvStatus::NullPointer, "out is null");
    }
    match SortingEnv::new(config) {
        Ok(env) => {
            unsafe { *out = Box::into_raw(Box::new(SortenvEnv { env })) };
            SortenvStatus::Ok
        }
        Err(e) => fail(SortenvStatus::BadConfig, e.to_string()),
    }
}

/// Creates an environment from the common parameters; all others keep
/// their defaults.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sortenv_env_new(
    variant: SortenvVariant,
    input: SortenvInput,
    obs_noise_level: f64,
    action_penalty: f64,
    episode_length: u32,
    seed: u64,
    out: *mut *mut SortenvEnv,
) -> SortenvStatus {
    guard(|| {
        let config = EnvConfig {
            variant: match variant {
                SortenvVariant::Basic => EnvVariant::Basic,
                SortenvVariant::Advanced => EnvVariant::Advanced,
            },
            input_type: match input {
                SortenvInput::Random => InputType::Random,
                SortenvInput::Seasonal => InputType::Seasonal,
            },
            obs_noise_level,
            action_penalty,
            episode_length: episode_length as usize,
            seed,
            ..EnvConfig::default()
        };
        build_env(config, out)
    })
}

/// Creates an environment from a TOML configuration string.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sortenv_env_from_toml(toml: *const c_char, out: *mut *mut SortenvEnv) -> SortenvStatus {
    guard(|| {
        if toml.is_null() {
            return fail(SortenvStatus::NullPointer, "toml is null");
        }
        let text = match unsafe { CStr::from_ptr(toml) }.to_str() {
            Ok(t) => t,
            Err(e) => return fail(SortenvStatus::InvalidArgument, e.to_string()),
        };
        match EnvConfig::from_toml_str(text) {
            Ok(config) => build_env(config, out),
            Err(e) => fail(SortenvStatus::BadConfig, e.to_string()),
        }
    })
}

/// Releases an environment. Null is ignored.
///
/// # Safety
/// `env` must come from `sortenv_env_new`/`sortenv_env_from_toml` and not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sortenv_env_free(env: *mut SortenvEnv) {
    if !env.is_null() {
        drop(unsafe { Box::from_raw(env) });
    }
}

/// Number of discrete actions: 10 (basic) or 30 (advanced).
///
/// # Safety
/// `env` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sortenv_env_action_count(env: *const SortenvEnv) -> u32 {
    match unsafe { env.as_ref() } {
        Some(h) => h.env.variant().action_count() as u32,
        None => 0,
    }
}

/// Starts an episode with `seed` and writes the first observation.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sortenv_env_reset(
    env: *mut SortenvEnv,
    seed: u64,
    out: *mut SortenvObservation,
) -> SortenvStatus {
    guard(|| {
        let (Some(h), false) = (unsafe { env.as_mut() }, out.is_null()) else {
            return fail(SortenvStatus::NullPointer, "env or out is null");
        };
        let obs = h.env.reset(Some(seed));
        unsafe { *out = observation(&obs) };
        SortenvStatus::Ok
    })
}

/// Advances one step with the flat action index `mode * 10 + speed - 1`.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sortenv_env_step(env: *mut SortenvEnv, action: u32, out: *mut SortenvStep) -> SortenvStatus {
    guard(|| {
        let (Some(h), false) = (unsafe { env.as_mut() }, out.is_null()) else {
            return fail(SortenvStatus::NullPointer, "env or out is null");
        };
        if h.env.state().is_none() {
            return fail(SortenvStatus::NoEpisode, "step called before reset");
        }
        if h.env.is_done() {
            return fail(SortenvStatus::EpisodeDone, "episode is done; reset first");
        }
        let action = match Action::from_index(h.env.variant(), action as usize) {
            Ok(a) => a,
            Err(e) => return fail(SortenvStatus::BadAction, e.to_string()),
        };
        match h.env.step(action) {
            Ok(r) => {
                unsafe {
                    *out = SortenvStep {
                        observation: observation(&r.observation),
                        reward: r.reward,
                        done: r.done,
                        accuracy: r.info.accuracy,
                        occupancy: r.info.occupancy,
                        speed: r.info.speed,
                        mode: mode_code(r.info.mode),
                        purity: r.info.purity,
                        speed_changed: r.info.speed_changed,
                    }
                };
                SortenvStatus::Ok
            }
            Err(e) => fail(SortenvStatus::BadAction, e.to_string()),
        }
    })
}

/// Builds the rule-based agent for `env`'s configuration.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sortenv_rba_new(env: *const SortenvEnv, out: *mut *mut SortenvRba) -> SortenvStatus {
    guard(|| {
        let (Some(h), false) = (unsafe { env.as_ref() }, out.is_null()) else {
            return fail(SortenvStatus::NullPointer, "env or out is null");
        };
        match RuleBasedAgent::from_config(h.env.config(), DEFAULT_BINS) {
            Ok(agent) => {
                unsafe { *out = Box::into_raw(Box::new(SortenvRba { agent })) };
                SortenvStatus::Ok
            }
            Err(e) => fail(SortenvStatus::BadConfig, e.to_string()),
        }
    })
}

/// Writes the agent's action index for `observation`.
///
/// # Safety
/// All pointers must be valid; `rba` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sortenv_rba_act(
    rba: *mut SortenvRba,
    observation: *const SortenvObservation,
    out_action: *mut u32,
) -> SortenvStatus {
    guard(|| {
        let (Some(h), Some(obs), false) = (unsafe { rba.as_mut() }, unsafe { observation.as_ref() }, out_action.is_null())
        else {
            return fail(SortenvStatus::NullPointer, "null argument");
        };
        use sortenv::agents::Agent;
        let obs = match decode_observation(obs, h.agent.variant()) {
            Ok(o) => o,
            Err(e) => return fail(SortenvStatus::InvalidArgument, e),
        };
        match h.agent.act(&obs) {
            Ok(action) => {
                unsafe { *out_action = action.index() as u32 };
                SortenvStatus::Ok
            }
            Err(e) => fail(SortenvStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Releases an agent. Null is ignored.
///
/// # Safety
/// `rba` must come from `sortenv_rba_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sortenv_rba_free(rba: *mut SortenvRba) {
    if !rba.is_null() {
        drop(unsafe { Box::from_raw(rba) });
    }
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sortenv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sortenv_status_str(status: SortenvStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SortenvStatus::Ok => c"ok",
        SortenvStatus::NullPointer => c"null pointer",
        SortenvStatus::InvalidArgument => c"invalid argument",
        SortenvStatus::BadConfig => c"bad configuration",
        SortenvStatus::NoEpisode => c"no episode",
        SortenvStatus::EpisodeDone => c"episode done",
        SortenvStatus::BadAction => c"bad action",
        SortenvStatus::Panic => c"panic",
    };
    s.as_ptr()
}
