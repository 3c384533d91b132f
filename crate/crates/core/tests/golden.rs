mod common;

use common::check_golden;
use sortenv::agents::RuleBasedAgent;
use sortenv::bench::run_episode;
use sortenv::{EnvConfig, EnvVariant, InputType};

#[test]
fn rba_basic_random_seed42() {
    let config = EnvConfig::default();
    let mut agent = RuleBasedAgent::from_config(&config, 20).unwrap();
    let (trace, _) = run_episode(&config, &mut agent, 50, 42).unwrap();
    check_golden("rba_basic_random_seed42.csv", &trace.to_csv()).unwrap();
}

#[test]
fn rba_advanced_seasonal_noisy_seed42() {
    let config = EnvConfig {
        variant: EnvVariant::Advanced,
        input_type: InputType::Seasonal,
        obs_noise_level: 0.3,
        action_penalty: 0.5,
        ..EnvConfig::default()
    };
    let mut agent = RuleBasedAgent::from_config(&config, 20).unwrap();
    let (trace, _) = run_episode(&config, &mut agent, 50, 42).unwrap();
    check_golden("rba_advanced_seasonal_noisy_seed42.csv", &trace.to_csv()).unwrap();
}
