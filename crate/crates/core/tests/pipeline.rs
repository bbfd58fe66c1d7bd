use invrep::combinat::{binomial, d_inv_count, HalfInt};
use invrep::entangle::{
    closed_form_mean_purity, exact_mean_purity, fluctuation_ratio, mean_purity_bipartite, su2_mean_purity,
    BipartiteSplit,
};
use invrep::montecarlo::{build_ensemble, run_experiment, run_experiment_with_threads, ExperimentConfig};
use invrep::report::{read_rows, write_rows, PurityRow};
use invrep::sudrep::{invariant_block_model, invariant_subspace};
use invrep::verify::run_suite;
use invrep::Error;
use num_traits::ToPrimitive;

fn half(s: &str) -> HalfInt {
    s.parse().unwrap()
}

#[test]
fn subspace_to_purity_to_csv() {
    // Three sites of the SU(3) triplet: a single antisymmetric invariant.
    let basis = invariant_subspace(3, 1, 3).unwrap();
    assert_eq!(basis.dim(), 1);
    let split = BipartiteSplit::new(1, 2, 3).unwrap();
    let exact = exact_mean_purity(&basis, &split).unwrap();
    assert!((exact.mean_purity - 1.0 / 3.0).abs() < 1e-12);

    let cfg = ExperimentConfig::new(3, HalfInt::from_int(1), 3, 1, HalfInt::ZERO, 20, 1);
    let stats = run_experiment(&cfg).unwrap();
    assert!((stats.mc_mean - exact.mean_purity).abs() < 1e-12);

    let row = PurityRow {
        d: 3,
        s: HalfInt::from_int(1),
        n: 3,
        p: 1,
        j0: HalfInt::ZERO,
        d_inv: stats.d_inv.to_string(),
        h_max: stats.h_max,
        exact_mean: exact.mean_purity,
        mc_mean: Some(stats.mc_mean),
        mc_var: Some(stats.mc_var),
        eta_mean: Some(stats.eta_mean),
        tail_fraction: Some(stats.tail_fraction),
        trials: Some(20),
        seed: Some(1),
        k: exact.k(),
    };
    let mut buf = Vec::new();
    write_rows(&mut buf, std::slice::from_ref(&row)).unwrap();
    assert_eq!(read_rows(buf.as_slice()).unwrap(), vec![row]);
}

#[test]
fn block_model_matches_tensor_product_basis() {
    for (d, s, p, q) in [(2usize, 2u64, 2u32, 2u32), (3, 1, 3, 3), (3, 2, 1, 2), (4, 1, 2, 2)] {
        let full = invariant_subspace(d, s, p + q).unwrap();
        let model = invariant_block_model(d, s, p, q).unwrap();
        assert_eq!(model.basis.dim(), full.dim());
        let dim_local = binomial(s + d as u64 - 1, d as u64 - 1).to_usize().unwrap();
        let split = BipartiteSplit::new(p, q, dim_local).unwrap();
        let from_full = exact_mean_purity(&full, &split).unwrap().mean_purity;
        let closed = closed_form_mean_purity(d, s, p, q).unwrap().mean_purity;
        let from_model = mean_purity_bipartite(&model.basis, split.h_max()).unwrap().mean_purity;
        assert!((from_full - closed).abs() < 1e-10, "(d={d}, s={s}, p={p}, q={q})");
        assert!((from_model - closed).abs() < 1e-10, "(d={d}, s={s}, p={p}, q={q})");
        assert!(fluctuation_ratio(&model.basis).unwrap() >= -1e-12);
    }
}

#[test]
fn su2_ensemble_statistics_agree_with_exact_mean() {
    let cfg = ExperimentConfig::new(2, half("1"), 5, 2, HalfInt::ZERO, 4000, 11);
    let ens = build_ensemble(&cfg).unwrap();
    let exact = su2_mean_purity(half("1"), 2, 3, HalfInt::ZERO).unwrap();
    assert_eq!(exact.d_inv, ens.d_inv().into());
    assert_eq!(exact.d_inv, d_inv_count(2, 2, 2, 3));

    let a = run_experiment_with_threads(&cfg, 1).unwrap();
    let b = run_experiment_with_threads(&cfg, 3).unwrap();
    assert_eq!(a, b);
    assert!((a.mc_mean - exact.mean_purity).abs() < 4.0 * a.std_error());
}

#[test]
fn empty_instances_are_reported() {
    let cfg = ExperimentConfig::new(3, HalfInt::from_int(1), 4, 2, HalfInt::ZERO, 10, 0);
    match build_ensemble(&cfg) {
        Err(Error::EmptySubspace(why)) => assert!(why.contains("not divisible")),
        other => panic!("expected an empty subspace, got {other:?}"),
    }
    assert!(matches!(closed_form_mean_purity(3, 1, 2, 2), Err(Error::EmptySubspace(_))));
}

#[test]
fn quick_suites_pass() {
    for name in ["f-identity", "duality", "lemma9", "twirl"] {
        let r = run_suite(name).unwrap();
        assert!(r.passed(), "{r}");
    }
}
