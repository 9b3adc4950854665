mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use commweights::graph::erdos_renyi;
use commweights::pep::{symbolic_iterates, AlgorithmId, Criterion, FunctionClass, PepSetting};
use commweights::spectral::{averaging_from_weights, AveragingMatrix};

use common::{gaussian, simulate_extra, simulate_tracking};

fn random_w(rng: &mut ChaCha8Rng, n: usize) -> AveragingMatrix {
    let g = erdos_renyi(n, 0.6, rng.random()).unwrap();
    let deg = g.degrees();
    let w: Vec<f64> = g
        .edges()
        .iter()
        .map(|&(i, j)| rng.random_range(0.05..1.0) / (1 + deg[i].max(deg[j])) as f64)
        .collect();
    averaging_from_weights(&g, &w).unwrap()
}

/// Largest deviation between the compiled iterate expressions, evaluated on
/// random basis vectors, and a direct simulation that feeds the same vectors
/// as gradients.
fn compiler_gap(id: AlgorithmId, criterion: Criterion, n: usize, k: usize, alpha: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = random_w(&mut rng, n);
    let setting = PepSetting::new(id, criterion, k, FunctionClass::default());
    let sym = symbolic_iterates(&setting, &w, alpha).unwrap();
    let d = 3;
    let basis = gaussian(&mut rng, sym.size, d);
    let x0 = basis.rows(0, n).into_owned();
    let grad = |j: usize, _: &DMatrix<f64>| {
        DMatrix::from_fn(n, d, |i, c| basis[(sym.gradient_column[j][i], c)])
    };
    let xs = match id {
        AlgorithmId::Extra => simulate_extra(w.matrix(), alpha, &x0, k, grad),
        _ => simulate_tracking(id == AlgorithmId::AtcDiging, w.matrix(), alpha, &x0, k, grad).0,
    };
    assert_eq!(xs.len(), sym.iterates.len());
    xs.iter()
        .zip(&sym.iterates)
        .map(|(x, e)| {
            let scale = 1.0 + x.amax();
            (x - e * &basis).amax() / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn compiled_iterates_match_simulation() {
    for id in AlgorithmId::all() {
        for criterion in [Criterion::RateIterates, Criterion::FunctionalAtMean] {
            for (n, k) in [(1, 3), (4, 1), (5, 4), (6, 3)] {
                let gap = compiler_gap(id, criterion, n, k, 0.37, 11 + n as u64);
                assert!(gap < 1e-12, "{id} {criterion} n={n} K={k}: {gap}");
            }
        }
    }
}

#[test]
fn gradient_columns_are_distinct_per_agent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = random_w(&mut rng, 5);
    let setting = PepSetting::new(AlgorithmId::Diging, Criterion::RateIterates, 3, FunctionClass::default());
    let sym = symbolic_iterates(&setting, &w, 0.4).unwrap();
    for i in 0..5 {
        let mut cols: Vec<usize> = sym.gradient_column.iter().map(|c| c[i]).collect();
        cols.sort_unstable();
        cols.dedup();
        assert_eq!(cols.len(), 4, "agent {i}");
        assert!(cols.iter().all(|&c| c >= 10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compiler_matches_simulation_on_random_instances(
        alg in 0usize..3,
        fmean in any::<bool>(),
        n in 1usize..7,
        k in 1usize..5,
        alpha in 0.01f64..2.5,
        seed in any::<u64>(),
    ) {
        let id = AlgorithmId::all()[alg];
        let criterion = if fmean { Criterion::FunctionalAtMean } else { Criterion::RateIterates };
        let gap = compiler_gap(id, criterion, n, k, alpha, seed);
        prop_assert!(gap < 1e-12, "gap {}", gap);
    }
}
