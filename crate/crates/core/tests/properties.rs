use biphoton::oracle::oracle_rate;
use biphoton::pathsum::{enumerate_paths, incoherent_rate};
use biphoton::scan::rates_at;
use biphoton::verify::relative_delta;
use biphoton::{preset, PRESET_NAMES};
use proptest::prelude::*;

fn preset_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(PRESET_NAMES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engine_matches_closed_form(
        name in preset_name(),
        rho in 0.5f64..2.0,
        tau in 60.0f64..6300.0,
        delay in -1500.0f64..1500.0,
    ) {
        let mut config = preset(name).unwrap();
        config.spectral.asymmetry_ratio = rho;
        config.spectral.pump_coherence_time = tau;
        let floor = 1e-6 * incoherent_rate(&enumerate_paths(&config).unwrap());
        let engine = rates_at(&config, &[delay]).unwrap()[0];
        let closed = oracle_rate(&config, delay).unwrap();
        prop_assert!(relative_delta(engine, closed, floor) < 1e-3, "{engine} {closed}");
    }

    #[test]
    fn analyzer_basis_is_complete(
        name in preset_name(),
        a1 in -90.0f64..90.0,
        a2 in -90.0f64..90.0,
        delay in -800.0f64..800.0,
    ) {
        let base = preset(name).unwrap();
        let reference: f64 = [(0.0, 0.0), (0.0, 90.0), (90.0, 0.0), (90.0, 90.0)]
            .iter()
            .map(|(x, y)| rates_at(&base.with_analyzers(*x, *y), &[delay]).unwrap()[0])
            .sum();
        let total: f64 = [(a1, a2), (a1, a2 + 90.0), (a1 + 90.0, a2), (a1 + 90.0, a2 + 90.0)]
            .iter()
            .map(|(x, y)| rates_at(&base.with_analyzers(*x, *y), &[delay]).unwrap()[0])
            .sum();
        prop_assert!((total - reference).abs() <= 1e-6 * reference, "{total} {reference}");
    }

    #[test]
    fn rates_are_physical(
        name in preset_name(),
        a1 in -90.0f64..90.0,
        a2 in -90.0f64..90.0,
        hwp in 0.0f64..90.0,
        delay in -1500.0f64..1500.0,
    ) {
        let mut config = preset(name).unwrap().with_analyzers(a1, a2);
        config.hwp_angle = hwp;
        let rate = rates_at(&config, &[delay]).unwrap()[0];
        prop_assert!(rate >= 0.0);
        prop_assert!(rate <= 1.0 + 1e-12);
    }
}
