use adaptive_ftec::bits::BitVector;
use adaptive_ftec::extraction::NoiseModel;
use adaptive_ftec::harness::{
    estimate_strata, single_fault_scenarios, sweep_single_faults, Experiment, ExperimentConfig, StratifiedPlan,
};
use adaptive_ftec::recovery::{decode, final_verdict, Verdict};
use adaptive_ftec::stabilizer::syndrome_of;
use adaptive_ftec::{build_hex_color_code, build_table, DecoderKind, PauliOperator, ShotRunner, SinglePauli};

#[test]
fn lookup_decoding_is_minimum_weight_on_the_small_code() {
    let code = build_hex_color_code(3).unwrap();
    let table = build_table(&code, 2).unwrap();
    for make in [PauliOperator::x_on as fn(usize, Vec<usize>) -> PauliOperator, PauliOperator::z_on] {
        let errors: Vec<PauliOperator> = (0u64..128)
            .map(|m| make(7, (0..7).filter(|q| m >> q & 1 == 1).collect()))
            .collect();
        for e in &errors {
            let s = syndrome_of(&code, e).unwrap();
            let best = errors
                .iter()
                .filter(|f| syndrome_of(&code, f).unwrap() == s)
                .map(|f| f.weight())
                .min()
                .unwrap();
            let r = decode(&table, &code, &s).unwrap();
            assert_eq!(syndrome_of(&code, &r).unwrap(), s);
            assert_eq!(r.weight(), best, "{e}");
        }
    }
}

#[test]
fn every_error_up_to_weight_two_is_corrected_at_distance_five() {
    let code = build_hex_color_code(5).unwrap();
    let table = build_table(&code, 3).unwrap();
    let n = code.n();
    let mut errors = Vec::new();
    for a in 0..n {
        for pa in SinglePauli::NONTRIVIAL {
            errors.push(PauliOperator::single(n, a, pa));
            for b in a + 1..n {
                for pb in SinglePauli::NONTRIVIAL {
                    let mut e = PauliOperator::single(n, a, pa);
                    e.apply(b, pb);
                    errors.push(e);
                }
            }
        }
    }
    assert_eq!(errors.len(), 3 * n + 9 * n * (n - 1) / 2);
    for e in errors {
        let mut residual = e.clone();
        residual.mul_assign(&decode(&table, &code, &syndrome_of(&code, &e).unwrap()).unwrap());
        assert_eq!(final_verdict(&code, &table, &residual).unwrap(), Verdict::NoLogicalError, "{e}");
        assert!(syndrome_of(&code, &residual).unwrap() == BitVector::zeros(code.r()));
    }
}

#[test]
fn single_faults_never_cause_logical_errors() {
    let code = build_hex_color_code(3).unwrap();
    let table = build_table(&code, 2).unwrap();
    for kind in DecoderKind::ALL {
        for two_stage in [false, true] {
            if two_stage && kind == DecoderKind::Shor {
                continue;
            }
            let runner = ShotRunner::new(&code, &table, kind, 1, two_stage).unwrap();
            let report = sweep_single_faults(&runner).unwrap();
            assert!(report.ok(), "{kind} two_stage={two_stage}: {report:?}");
            assert!(report.weights_checked);
        }
    }
}

#[test]
fn scripted_single_fault_scenarios_pick_the_expected_round() {
    let code = build_hex_color_code(3).unwrap();
    let table = build_table(&code, 2).unwrap();
    let runner = ShotRunner::new(&code, &table, DecoderKind::Strong, 1, false).unwrap();
    let rows = single_fault_scenarios(&runner).unwrap();
    let got: Vec<(&str, &str, Option<usize>)> = rows
        .iter()
        .map(|r| (r.label.as_str(), r.delta.as_str(), r.chosen_round))
        .collect();
    assert_eq!(
        got,
        vec![
            ("input error", "0", Some(1)),
            ("I(1)", "10", Some(2)),
            ("I(2)", "11", Some(3)),
            ("I(3)", "0", Some(1)),
            ("II(1)", "10", Some(2)),
            ("II(2)", "0", Some(1)),
            ("II(3)", "0", Some(1)),
        ]
    );
    let weak = ShotRunner::new(&code, &table, DecoderKind::Weak, 1, false).unwrap();
    assert!(single_fault_scenarios(&weak).is_err());
}

#[test]
fn noiseless_shots_use_the_minimum_rounds() {
    for (kind, rounds) in [(DecoderKind::Shor, 2.0), (DecoderKind::Strong, 2.0), (DecoderKind::Weak, 1.0)] {
        let stats = Experiment::new(ExperimentConfig::new(3, kind, vec![0.0], 500, 1))
            .unwrap()
            .run_point(0.0)
            .unwrap();
        assert_eq!(stats.logical_errors, 0);
        assert_eq!(stats.avg_rounds, rounds, "{kind}");
    }
}

#[test]
fn stratified_and_direct_estimates_agree() {
    let p = 3e-3;
    let config = ExperimentConfig::new(3, DecoderKind::Weak, vec![p], 400_000, 21);
    let experiment = Experiment::new(config).unwrap();
    let direct = experiment.run_point(p).unwrap();
    let runner = experiment.runner().unwrap();
    let plan = StratifiedPlan::new(200_000, 1e-3, 5e-3, 22);
    let strata = estimate_strata(&runner, NoiseModel::depolarizing(0.0), &plan).unwrap();
    let est = strata.rate(p);
    assert!(
        est.low <= direct.ci_high && direct.ci_low <= est.high,
        "direct {} [{}, {}] vs stratified {} [{}, {}]",
        direct.p_l,
        direct.ci_low,
        direct.ci_high,
        est.p_l,
        est.low,
        est.high
    );
    assert!((strata.avg_rounds(p) - direct.avg_rounds).abs() < 0.01);
}
