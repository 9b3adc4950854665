mod common;

use commweights::graph::{make_topology, Graph, Topology};
use commweights::heuristics::metropolis;
use commweights::pep::{evaluate, rate, recover_worst_case, AlgorithmId, Criterion, FunctionClass, PepSetting, PepStatus};
use commweights::spectral::averaging_from_weights;

fn cycle_w(n: usize) -> commweights::spectral::AveragingMatrix {
    metropolis(&make_topology(Topology::Cycle, n).unwrap()).unwrap()
}

#[test]
fn single_agent_rate_is_gradient_descent_factor() {
    let g = Graph::new(1, []).unwrap();
    let w = averaging_from_weights(&g, &[]).unwrap();
    let fc = FunctionClass::new(0.1, 1.0).unwrap();
    for id in [AlgorithmId::Diging, AlgorithmId::AtcDiging] {
        let s = PepSetting::rate(id, fc);
        for alpha in [0.3, 1.0, 1.818, 2.2] {
            let (r, _) = rate(&s, &w, alpha).unwrap();
            let expected = (1.0f64 - alpha * 0.1).abs().max((1.0f64 - alpha).abs());
            assert!((r.rho - expected).abs() < 1e-4, "{id} alpha={alpha}: {} vs {expected}", r.rho);
        }
    }
}

#[test]
fn larger_class_has_larger_worst_case() {
    let w = cycle_w(4);
    for (id, criterion, k) in [
        (AlgorithmId::Diging, Criterion::RateIterates, 1),
        (AlgorithmId::AtcDiging, Criterion::RateIterates, 1),
        (AlgorithmId::Extra, Criterion::FunctionalAtMean, 2),
    ] {
        let mut prev = 0.0;
        for mu in [0.3, 0.1, 0.0] {
            let s = PepSetting::new(id, criterion, k, FunctionClass::new(mu, 1.0).unwrap());
            let v = evaluate(&s, &w, 0.4).unwrap().value;
            assert!(v >= prev - 1e-6, "{id} mu={mu}: {v} < {prev}");
            prev = v;
        }
    }
}

#[test]
fn values_scale_with_the_initial_bound() {
    let w = cycle_w(4);
    let fc = FunctionClass::default();
    let mut s = PepSetting::rate(AlgorithmId::Diging, fc);
    let v1 = evaluate(&s, &w, 0.5).unwrap().value;
    s.init_bound = 4.0;
    let v4 = evaluate(&s, &w, 0.5).unwrap().value;
    assert!((v4 - 4.0 * v1).abs() < 1e-5 * v4.max(1.0), "{v1} {v4}");

    let mut s = PepSetting::new(AlgorithmId::Extra, Criterion::FunctionalAtMean, 2, fc);
    let f1 = evaluate(&s, &w, 0.5).unwrap().value;
    s.init_bound = 4.0;
    s.heterogeneity_bound = s.heterogeneity_bound.map(|d| 4.0 * d);
    let f4 = evaluate(&s, &w, 0.5).unwrap().value;
    assert!((f4 - 4.0 * f1).abs() < 1e-5 * f4.max(1.0), "{f1} {f4}");
}

#[test]
fn recovered_instances_satisfy_interpolation() {
    let w = cycle_w(5);
    for (id, criterion, k) in [
        (AlgorithmId::Diging, Criterion::RateIterates, 1),
        (AlgorithmId::AtcDiging, Criterion::RateIterates, 2),
        (AlgorithmId::Extra, Criterion::FunctionalAtMean, 3),
        (AlgorithmId::Diging, Criterion::FunctionalAtMean, 2),
    ] {
        let s = PepSetting::new(id, criterion, k, FunctionClass::default());
        let r = evaluate(&s, &w, 0.5).unwrap();
        let wc = recover_worst_case(&r).unwrap();
        assert!(wc.max_interpolation_violation <= 1e-6, "{id}: {}", wc.max_interpolation_violation);
        assert!(wc.optimality_residual <= 1e-6, "{id}: {}", wc.optimality_residual);
        assert!((wc.achieved - r.value).abs() <= 1e-5 * (1.0 + r.value.abs()), "{id}: {} vs {}", wc.achieved, r.value);
    }
}

#[test]
fn non_consensual_matrices_are_infinite() {
    let g = make_topology(Topology::Cycle, 4).unwrap();
    let fc = FunctionClass::default();
    for w in [vec![0.0; 4], vec![0.5; 4]] {
        let w = averaging_from_weights(&g, &w).unwrap();
        for id in AlgorithmId::all() {
            let r = evaluate(&PepSetting::new(id, Criterion::FunctionalAtMean, 2, fc), &w, 0.5).unwrap();
            assert_eq!(r.value, f64::INFINITY);
            assert_eq!(r.status, PepStatus::NotConsensual);
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let w = cycle_w(5);
    let s = PepSetting::new(AlgorithmId::Extra, Criterion::FunctionalAtMean, 2, FunctionClass::default());
    let a = evaluate(&s, &w, 0.7).unwrap();
    let b = evaluate(&s, &w, 0.7).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn invalid_settings_are_rejected() {
    let w = cycle_w(4);
    let mut s = PepSetting::rate(AlgorithmId::Diging, FunctionClass::default());
    assert!(evaluate(&s, &w, -1.0).is_err());
    s.k = 0;
    assert!(evaluate(&s, &w, 0.5).is_err());
    assert!(FunctionClass::new(1.0, 1.0).is_err());
    let s = PepSetting::rate(AlgorithmId::Extra, FunctionClass::default());
    assert!(rate(&s, &w, 0.5).is_err());
}
