use sortenv::input::{seasonal_input, GeneratorState, Level, RatioRegime, SeasonalPhase};
use sortenv::rng::{Stream, INPUT_STREAM};
use sortenv::sorting::classify_ratio;
use sortenv::{InputType, SortingMode};

#[test]
fn seasonal_patterns_are_uniform() {
    let mut stream = Stream::new(99, INPUT_STREAM);
    let mut phase = SeasonalPhase { level: Level::Little, regime: RatioRegime::Balanced, remaining_steps: 0 };
    let mut counts = [0usize; 9];
    let mut lengths = [0usize; 3];
    let phases = 10_000;
    for _ in 0..phases {
        assert_eq!(phase.remaining_steps, 0);
        seasonal_input(&mut phase, &mut stream);
        counts[phase.pattern_index()] += 1;
        let length = phase.remaining_steps + 1;
        lengths[length - 10] += 1;
        while phase.remaining_steps > 0 {
            seasonal_input(&mut phase, &mut stream);
        }
    }
    for (pattern, n) in counts.iter().enumerate() {
        let freq = *n as f64 / phases as f64;
        assert!((freq - 1.0 / 9.0).abs() <= 0.02, "pattern {pattern}: {freq}");
    }
    assert!(lengths.iter().all(|n| *n > 3000), "{lengths:?}");
}

#[test]
fn seasonal_inputs_respect_their_phase() {
    let mut g = GeneratorState::new(InputType::Seasonal, 17);
    for _ in 0..5_000 {
        let m = g.next_input();
        let phase = *g.phase().unwrap();
        let total = phase.level.total_range();
        assert!((total.lo..=total.hi).contains(&m.total()), "{m:?} {phase:?}");
        let share = phase.regime.a_fraction_range();
        let a_fraction = m.a / m.total();
        assert!((share.lo - 1e-12..=share.hi + 1e-12).contains(&a_fraction));
        let expected = match phase.regime {
            RatioRegime::AHeavy if a_fraction > 0.75 => SortingMode::Positive,
            RatioRegime::BHeavy if a_fraction < 0.25 => SortingMode::Negative,
            _ => SortingMode::Basic,
        };
        assert_eq!(classify_ratio(&m), expected);
    }
}

#[test]
fn generators_are_seed_deterministic() {
    for kind in [InputType::Random, InputType::Seasonal] {
        let mut a = GeneratorState::new(kind, 123);
        let mut b = GeneratorState::new(kind, 123);
        let mut c = GeneratorState::new(kind, 124);
        let xs: Vec<_> = (0..100).map(|_| a.next_input()).collect();
        let ys: Vec<_> = (0..100).map(|_| b.next_input()).collect();
        let zs: Vec<_> = (0..100).map(|_| c.next_input()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}
