use proptest::prelude::*;
use qsp_stateprep::oracle::{gamma, AmplitudeOracle, Distribution};
use qsp_stateprep::Error;
use qsp_stateprep::amplify::SIGMA_FLOOR;
use qsp_stateprep::pipeline::{prepare_state, PrepConfig, CHECK_PREMISE, DEFAULT_BETA, THRESHOLD_FRACTION};

fn dist() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        Just(Distribution::Random),
        Just(Distribution::Uniform),
        (0usize..8).prop_map(Distribution::Indicator),
        (0.0f64..8.0, 0.5f64..4.0).prop_map(|(mu, sigma)| Distribution::Gaussian { mu, sigma }),
    ]
}

fn min_gamma() -> f64 {
    (SIGMA_FLOOR / (THRESHOLD_FRACTION * DEFAULT_BETA / 2.0)).powi(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_run_honours_its_guarantees(
        n in 1usize..=3,
        dist in dist(),
        seed in any::<u64>(),
        eps in prop_oneof![Just(1e-1), Just(1e-2), Just(1e-3)],
        delta in prop_oneof![Just(0.2), Just(0.05)],
    ) {
        let dist = match dist {
            Distribution::Indicator(x) => Distribution::Indicator(x % (1 << n)),
            d => d,
        };
        let oracle = AmplitudeOracle::generate(n, 1, &dist, seed).unwrap();
        let g = gamma(&oracle, true);
        let r = match prepare_state(&PrepConfig::new(oracle, eps, delta)) {
            Ok(r) => r,
            // A far-off Gaussian leaves almost no amplitude. Once the sign
            // threshold falls under the amplification floor the run must be
            // refused (the 1.5 covers degree rounding at the boundary).
            Err(Error::DegreeOverflow { .. } | Error::InvalidParameter(_)) if g < 1.5 * min_gamma() => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("gamma {g:e}: {e}"))),
        };
        prop_assert!(r.final_error <= eps, "final {} > {eps}", r.final_error);
        prop_assert!(r.success_probability >= 1.0 - delta);
        prop_assert!((r.final_state.norm() - 1.0).abs() < 1e-10);
        for c in &r.bound_checks {
            prop_assert_eq!(c.pass, c.lhs <= c.rhs);
        }
        if r.check(CHECK_PREMISE).unwrap().pass {
            prop_assert!(r.final_error <= 3.0 * r.eps_hat / r.gamma + 1e-12);
        }
    }
}

#[test]
fn oracle_file_round_trip_gives_the_same_report() {
    let oracle = AmplitudeOracle::generate(2, 6, &Distribution::Random, 11).unwrap();
    let back = AmplitudeOracle::from_text(&oracle.to_text()).unwrap();
    let a = prepare_state(&PrepConfig::new(oracle, 0.01, 0.05)).unwrap();
    let b = prepare_state(&PrepConfig::new(back, 0.01, 0.05)).unwrap();
    assert_eq!(a.oracle_calls, b.oracle_calls);
    assert_eq!(a.final_state.amplitudes(), b.final_state.amplitudes());
}

#[test]
fn explicit_bits_override_the_default() {
    let oracle = AmplitudeOracle::generate(2, 1, &Distribution::Random, 2).unwrap();
    let r = prepare_state(&PrepConfig::new(oracle, 0.01, 0.05).with_bits(20)).unwrap();
    assert_eq!(r.m, 20);
}
