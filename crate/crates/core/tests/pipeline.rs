//! End-to-end behaviour of fit + downstream tasks, plus property tests for
//! the public invariants.

mod common;

use common::*;
use mfc0::bench::{
    corrupt, gen_subspaces, gen_toy3d, sweep_error_ratio, sweep_means, ErrorKind, Method, SweepConfig, SweepKind,
    SynthConfig,
};
use mfc0::clustering::{accuracy, affinity, block_view, cluster_fit, extract_bases, normalized_cut, reconstruct};
use mfc0::linalg::max_abs_gram_deviation;
use mfc0::{fit, validate_problem, ErrorNorm, FitResult, SolverConfig, SubspaceSpec, YUpdateRule};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three mutually orthogonal 4-dimensional subspaces of `R^60` on disjoint
/// coordinates, 40 nonnegative samples each. Returns data, labels and the
/// generating bases.
fn orthogonal_blocks(seed: u64) -> (DMatrix<f64>, Vec<usize>, Vec<DMatrix<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, k, d0, per) = (60, 3, 4, 40);
    let mut z = DMatrix::zeros(m, k * per);
    let mut bases = Vec::new();
    for b in 0..k {
        let mut u = DMatrix::zeros(m, d0);
        for j in 0..d0 {
            for r in 0..5 {
                u[(b * 20 + j * 5 + r, j)] = rng.random_range(0.1..1.0);
            }
            let norm = u.column(j).norm();
            u.column_mut(j).scale_mut(1.0 / norm);
        }
        let coeffs = DMatrix::from_fn(d0, per, |_, _| rng.random_range(0.0..1.0));
        z.columns_mut(b * per, per).copy_from(&(&u * coeffs));
        bases.push(u);
    }
    (z, (0..k * per).map(|c| c / per).collect(), bases)
}

fn run(z: &DMatrix<f64>, k: usize, d0: usize, cfg: SolverConfig) -> FitResult {
    fit(&validate_problem(z.clone(), SubspaceSpec::new(k, d0).unwrap(), cfg).unwrap()).unwrap()
}

#[test]
fn clean_toy_data_clusters_perfectly() {
    let ds = gen_toy3d(0);
    let result = run(ds.z.values(), 3, 1, SolverConfig::default());
    let clustered = cluster_fit(&result, 3, 1, Some(&ds.truth), 0).unwrap();
    assert_eq!(clustered.accuracy, Some(1.0));
    assert_eq!(clustered.labels.len(), 150);
}

#[test]
fn orthogonal_subspaces_give_exact_blocks_and_bases() {
    let _guard = serial();
    let (z, truth, bases) = orthogonal_blocks(1);
    let result = run(&z, 3, 4, SolverConfig { rho: 1.05, ..Default::default() });
    let clustered = cluster_fit(&result, 3, 4, Some(&truth), 0).unwrap();
    assert_eq!(clustered.accuracy, Some(1.0));
    assert!(clustered.warnings.is_empty(), "{:?}", clustered.warnings);
    assert!(clustered.view.off_block_mass <= 1e-3, "off-block {}", clustered.view.off_block_mass);
    let w = affinity(&result.y);
    let cross: f64 = (0..w.nrows())
        .flat_map(|i| (0..w.ncols()).map(move |j| (i, j)))
        .filter(|&(i, j)| truth[i] != truth[j])
        .map(|(i, j)| w[(i, j)])
        .sum();
    assert!(cross / w.sum() <= 1e-3);
    for learned in &clustered.bases {
        let best = bases.iter().map(|b| max_principal_angle(b, learned)).fold(f64::INFINITY, f64::min);
        assert!(best <= 1e-6, "principal angle {best}");
    }
}

#[test]
fn clean_fit_reconstructs_data() {
    let _guard = serial();
    let (z, _, _) = orthogonal_blocks(2);
    let result = run(&z, 3, 4, SolverConfig::default());
    let rel = (&z - reconstruct(&result.x, &result.y)).norm() / z.norm();
    assert!(rel <= 1e-3, "relative reconstruction error {rel}");
}

#[test]
fn toy_outliers_are_pulled_onto_learned_lines() {
    let clean = gen_toy3d(3);
    let ds = corrupt(&clean, ErrorKind::SampleOutlier, 0.2, None, 9).unwrap();
    let cfg = SolverConfig { lambda: 1.0, error_norm: ErrorNorm::L21, ..Default::default() };
    let result = run(ds.z.values(), 3, 1, cfg);
    let rec = reconstruct(&result.x, &result.y);
    for c in ds.corrupted_columns() {
        let v = rec.column(c);
        let dist = (0..3)
            .map(|j| {
                let x = result.x.column(j);
                (v - x * x.dot(&v)).norm()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(dist <= 1e-3, "column {c} is {dist} from every learned line");
    }
}

#[test]
fn learned_bases_are_orthonormal_and_mutually_orthogonal() {
    let ds = gen_subspaces(&SynthConfig { k: 3, d0: 2, ambient_dim: 20, per_subspace: 30, ..SynthConfig::highdim(4) })
        .unwrap();
    let result = run(ds.z.values(), 3, 2, SolverConfig::default());
    let labels = normalized_cut(&affinity(&result.y), 3, 0).labels;
    let view = block_view(&result.y, &labels, 3);
    let (bases, _) = extract_bases(&result.x, &view.row_assignment, 3, 2);
    for (i, a) in bases.iter().enumerate() {
        assert!(max_abs_gram_deviation(a) <= 1e-8);
        for b in &bases[i + 1..] {
            assert!((a.transpose() * b).amax() <= 1e-8);
        }
    }
    let mut original: Vec<f64> = result.y.iter().copied().collect();
    let mut permuted: Vec<f64> = view.permuted.iter().copied().collect();
    original.sort_by(f64::total_cmp);
    permuted.sort_by(f64::total_cmp);
    assert_eq!(original, permuted);
}

#[test]
fn update_rules_give_distinct_terminating_traces() {
    let ds = gen_toy3d(1);
    let exact = run(ds.z.values(), 3, 1, SolverConfig::default());
    let paper = run(ds.z.values(), 3, 1, SolverConfig { y_update_rule: YUpdateRule::PaperLiteral, ..Default::default() });
    assert!(exact.iterations <= 1000 && paper.iterations <= 1000);
    let a: Vec<f64> = exact.objective_trace.iter().map(|o| o.total).collect();
    let b: Vec<f64> = paper.objective_trace.iter().map(|o| o.total).collect();
    assert_ne!(a, b);
}

#[test]
fn fits_are_reproducible_for_a_seed() {
    let ds = gen_toy3d(2);
    let a = run(ds.z.values(), 3, 1, SolverConfig { seed: 9, ..Default::default() });
    let b = run(ds.z.values(), 3, 1, SolverConfig { seed: 9, ..Default::default() });
    assert_eq!(a.x, b.x);
    assert_eq!(a.y, b.y);
    assert_eq!(a.objective_trace, b.objective_trace);
}

#[test]
fn sweep_accuracy_is_high_when_clean_and_does_not_rise_with_errors() {
    let _guard = serial();
    let cfg = SweepConfig {
        ratios: (0..=8).map(|i| i as f64 / 10.0).collect(),
        kinds: vec![SweepKind::Corruption, SweepKind::Outlier],
        methods: vec![Method::Mfc0],
        seeds: 2,
        ..Default::default()
    };
    let means = sweep_means(&sweep_error_ratio(&cfg).unwrap());
    for kind in [SweepKind::Corruption, SweepKind::Outlier] {
        let accs: Vec<f64> = means.iter().filter(|m| m.kind == kind).map(|m| m.mean_acc.unwrap()).collect();
        assert_eq!(accs.len(), 9);
        assert!((accs[0] - 1.0).abs() <= 0.01, "{kind:?} clean ACC {}", accs[0]);
        for pair in accs.windows(2) {
            assert!(pair[1] <= pair[0] + 0.02, "{kind:?} ACC rose: {accs:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accuracy_ignores_relabeling(
        pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..25),
        shift_a in 0usize..4,
        shift_b in 0usize..4,
    ) {
        let labels: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let base = accuracy(&labels, &truth).unwrap();
        let relabeled: Vec<usize> = labels.iter().map(|l| (l + shift_a) % 4).collect();
        let retruth: Vec<usize> = truth.iter().map(|t| (t * 3 + shift_b) % 4).collect();
        prop_assert_eq!(base, accuracy(&relabeled, &retruth).unwrap());
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn normalized_cut_is_deterministic(seed in any::<u64>(), n in 4usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DMatrix::from_fn(3, n, |_, _| rng.random_range(0.0..1.0));
        let w = affinity(&y);
        let a = normalized_cut(&w, 2, seed);
        let b = normalized_cut(&w, 2, seed);
        prop_assert!(a.labels.iter().all(|&l| l < 2));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn solver_output_respects_constraints(seed in any::<u64>(), norm in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (rng.random_range(4..10), rng.random_range(6..16));
        let z = DMatrix::from_fn(m, n, |_, _| rng.random_range(0.0..1.0));
        let error_norm = [ErrorNorm::L1, ErrorNorm::L21, ErrorNorm::None][norm];
        let cfg = SolverConfig { error_norm, lambda: 0.5, max_iters: 200, seed, ..Default::default() };
        let result = run(&z, 2, 2, cfg);
        prop_assert!(max_abs_gram_deviation(&result.x) <= 1e-8);
        prop_assert_eq!(result.objective_trace.len(), result.iterations);
        for col in result.v.column_iter() {
            prop_assert!(col.iter().all(|&v| v >= 0.0));
            prop_assert!(col.iter().filter(|&&v| v != 0.0).count() <= 2);
        }
        if error_norm == ErrorNorm::None {
            prop_assert!(result.e.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn corruption_only_touches_flagged_entries(seed in any::<u64>(), ratio in 0.0f64..=1.0, outlier in any::<bool>()) {
        let ds = gen_subspaces(&SynthConfig { k: 2, d0: 2, ambient_dim: 10, per_subspace: 6, ..SynthConfig::highdim(seed) }).unwrap();
        let kind = if outlier { ErrorKind::SampleOutlier } else { ErrorKind::RandomCorruption };
        let c = corrupt(&ds, kind, ratio, None, seed).unwrap();
        let mask = c.error_mask.as_ref().unwrap();
        for (idx, (&a, &b)) in c.z.values().iter().zip(ds.z.values().iter()).enumerate() {
            if !mask.as_slice()[idx] {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        prop_assert_eq!(c.corrupted_columns().len(), (ratio * 12.0).round() as usize);
    }
}
