mod common;

use common::*;
use proptest::prelude::*;
use sortenv::agents::{Agent, RandomAgent};
use sortenv::bench::run_episode;
use sortenv::mix::StorageTally;
use sortenv::sorting::{self, OccupancyLimitMap};
use sortenv::{EnvConfig, EnvVariant, InputType, MaterialMix, SortingEnv, SortingMode};

fn variant() -> impl Strategy<Value = EnvVariant> {
    prop_oneof![Just(EnvVariant::Basic), Just(EnvVariant::Advanced)]
}

fn input_type() -> impl Strategy<Value = InputType> {
    prop_oneof![Just(InputType::Random), Just(InputType::Seasonal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_conserved_and_stages_fit(
        variant in variant(),
        input in input_type(),
        noise in 0.0..0.5f64,
        seed in any::<u64>(),
        agent_seed in any::<u64>(),
    ) {
        let config = EnvConfig { variant, input_type: input, obs_noise_level: noise, ..EnvConfig::default() };
        let mut env = SortingEnv::new(config).unwrap();
        let mut agent = RandomAgent::new(variant, agent_seed);
        let mut obs = env.reset(Some(seed));
        loop {
            let r = env.step(agent.act(&obs).unwrap()).unwrap();
            let s = env.state().unwrap();
            for stage in [s.input, s.belt, s.machine] {
                prop_assert!(stage.is_valid(), "{stage:?}");
                prop_assert!(stage.total() <= 100.0 + 1e-9);
            }
            let accounted = s.in_pipeline() + s.storage.total();
            prop_assert!((s.generated_total - accounted).abs() <= 1e-9 * s.generated_total.max(1.0));
            prop_assert!((0.0..=1.0).contains(&r.observation.input_total));
            prop_assert!((0.0..=1.0).contains(&r.info.accuracy));
            obs = r.observation;
            if r.done { break; }
        }
    }

    #[test]
    fn classify_is_antisymmetric(a in 0.0..100.0f64, b in 0.0..100.0f64) {
        let forward = sorting::classify_ratio(&MaterialMix::new(a, b));
        let backward = sorting::classify_ratio(&MaterialMix::new(b, a));
        let mirrored = match forward {
            SortingMode::Positive => SortingMode::Negative,
            SortingMode::Negative => SortingMode::Positive,
            SortingMode::Basic => SortingMode::Basic,
        };
        prop_assert_eq!(backward, mirrored);
        prop_assert_eq!(forward, oracle_classify(a, b));
    }

    #[test]
    fn accuracy_falls_with_occupancy_and_speed(o1 in 0.0..1.0f64, o2 in 0.0..1.0f64, k in 1u8..10, noise in 0.0..0.2f64) {
        let limits = OccupancyLimitMap::default();
        let (lo, hi) = if o1 <= o2 { (o1, o2) } else { (o2, o1) };
        prop_assert!(sorting::base_accuracy(k, lo, &limits, 3.0, noise) >= sorting::base_accuracy(k, hi, &limits, 3.0, noise));
        prop_assert!(sorting::base_accuracy(k, lo, &limits, 3.0, noise) >= sorting::base_accuracy(k + 1, lo, &limits, 3.0, noise));
    }

    #[test]
    fn single_batch_purity_is_accuracy(a in 0.0..100.0f64, frac in 0.0..1.0f64, alpha in 0.0..1.0f64) {
        let b = (100.0 - a) * frac;
        prop_assume!(a + b > 1e-6);
        let (_, tally) = sorting::sort_transfer(&MaterialMix::new(a, b), alpha);
        let mut storage = StorageTally::default();
        storage.add(&tally);
        prop_assert!((sorting::purity(&storage) - alpha).abs() < 1e-12);
    }

    #[test]
    fn reward_rises_with_accuracy_and_speed(a1 in 0.7..1.0f64, a2 in 0.7..1.0f64, k in 1u8..10) {
        let config = EnvConfig::default();
        let v = f64::from(k) / 10.0;
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        prop_assert!(sorting::step_reward(hi, v, &config, false) >= sorting::step_reward(lo, v, &config, false));
        prop_assert!(sorting::step_reward(lo, v + 0.1, &config, false) > sorting::step_reward(lo, v, &config, false));
        prop_assert!(sorting::step_reward(lo, v, &config, true) <= sorting::step_reward(lo, v, &config, false));
    }

    #[test]
    fn same_seed_same_trace(variant in variant(), input in input_type(), seed in any::<u64>()) {
        let config = EnvConfig { variant, input_type: input, obs_noise_level: 0.3, ..EnvConfig::default() };
        let mut first = RandomAgent::new(variant, 5);
        let mut second = RandomAgent::new(variant, 5);
        let (t1, _) = run_episode(&config, &mut first, 50, seed).unwrap();
        let (t2, _) = run_episode(&config, &mut second, 50, seed).unwrap();
        prop_assert_eq!(t1.to_csv(), t2.to_csv());
    }
}
