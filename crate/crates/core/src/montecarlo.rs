//! Reproducible Haar sampling: uniformly random states of a subspace, their
//! purity and η statistics, and Monte Carlo twirls.
//!
//! Trial `t` of a run with seed `seed` draws from `ChaCha20Rng::seed_from_u64(seed)`
//! on stream `t`, so every trial is independent of the thread schedule. Per-trial
//! records are collected in trial order and reduced sequentially.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::HalfInt;
use crate::entangle::{h_max, h_max_spin, mean_purity_bipartite, purity_of_coefficients};
use crate::numerics::{complex_gaussian, normalized, BipartiteBasis, CMatrix, CVector, SubspaceBasis};
use crate::su2rep::near_invariant_local;
use crate::sudrep::invariant_block_model;
use crate::{Error, Result};

/// Name of the generator and the Gaussian sampler, for output metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9), seed_from_u64(seed), stream = trial index; N(0,1) via rand_distr ziggurat";

const CHUNK: usize = 1000;

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    /// Spin for `d = 2`; number of boxes of `Sym^s(C^d)` for `d ≥ 3`.
    pub s: HalfInt,
    pub n: u32,
    pub p: u32,
    /// Total-spin cutoff, SU(2) only.
    pub j0: HalfInt,
    pub trials: u64,
    pub seed: u64,
    pub delta: f64,
}

impl ExperimentConfig {
    pub fn new(d: usize, s: HalfInt, n: u32, p: u32, j0: HalfInt, trials: u64, seed: u64) -> Self {
        ExperimentConfig { d, s, n, p, j0, trials, seed, delta: 0.1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.p == 0 || self.p >= self.n {
            return Err(Error::InvalidArgument(format!(
                "need 1 ≤ p ≤ n − 1, got p={}, n={}",
                self.p, self.n
            )));
        }
        if self.d < 2 {
            return Err(Error::InvalidArgument(format!("need d ≥ 2, got {}", self.d)));
        }
        if self.s.twice() < 0 || self.j0.twice() < 0 {
            return Err(Error::InvalidArgument("s and j0 must be non-negative".into()));
        }
        if self.d > 2 && !self.s.is_integer() {
            return Err(Error::InvalidArgument(format!(
                "for d ≥ 3, s counts boxes and must be an integer, got {}",
                self.s
            )));
        }
        if self.d > 2 && self.j0 != HalfInt::ZERO {
            return Err(Error::InvalidArgument("j0 applies to d = 2 only".into()));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

/// A subspace in local coordinates together with its entropy normalization.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub basis: BipartiteBasis,
    pub h_max: f64,
}

impl Ensemble {
    pub fn d_inv(&self) -> usize {
        self.basis.dim()
    }
}

fn empty_reason(cfg: &ExperimentConfig) -> String {
    if cfg.d == 2 {
        let total = HalfInt::from_twice(cfg.s.twice() * cfg.n as i64);
        if !total.is_integer() && cfg.j0.twice() < 1 {
            format!(
                "{} spin-{} systems have half-integer total spin, so j0 must be at least 1/2",
                cfg.n, cfg.s
            )
        } else {
            format!("no state of {} spin-{} systems has total spin ≤ {}", cfg.n, cfg.s, cfg.j0)
        }
    } else {
        let s = cfg.s.twice() / 2;
        let total = cfg.n as i64 * s;
        if total % cfg.d as i64 != 0 {
            format!("n·s = {total} is not divisible by d = {}", cfg.d)
        } else {
            format!(
                "no dual pair of irreps between the two sides (d={}, s={s}, p={}, q={})",
                cfg.d,
                cfg.p,
                cfg.n - cfg.p
            )
        }
    }
}

/// The sampled subspace: near-invariant (d = 2) or invariant (d ≥ 3), in the
/// local block coordinates where the purity is unchanged.
pub fn build_ensemble(cfg: &ExperimentConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let q = cfg.n - cfg.p;
    let (basis, hm) = if cfg.d == 2 {
        let local = near_invariant_local(cfg.s, cfg.n, cfg.p, cfg.j0)?;
        (local.basis, h_max_spin(cfg.s, cfg.p))
    } else {
        let s = (cfg.s.twice() / 2) as u64;
        if !(cfg.n as u64 * s).is_multiple_of(cfg.d as u64) {
            return Err(Error::EmptySubspace(empty_reason(cfg)));
        }
        let model = invariant_block_model(cfg.d, s, cfg.p, q)?;
        (model.basis, h_max(cfg.d, s, cfg.p))
    };
    if basis.is_empty() {
        return Err(Error::EmptySubspace(empty_reason(cfg)));
    }
    Ok(Ensemble { basis, h_max: hm })
}

/// A uniformly random unit vector of the span of `basis`.
pub fn sample_state<R: rand::Rng + ?Sized>(basis: &SubspaceBasis, rng: &mut R) -> Result<CVector> {
    if basis.is_empty() {
        return Err(Error::EmptySubspace("cannot sample from an empty basis".into()));
    }
    let c = normalized(complex_gaussian(rng, basis.dim()))?;
    Ok(basis.matrix() * c)
}

/// Coefficient matrix of a uniformly random state of the ensemble.
pub fn sample_coefficients<R: rand::Rng + ?Sized>(ensemble: &Ensemble, rng: &mut R) -> Result<CMatrix> {
    let c = normalized(complex_gaussian(rng, ensemble.d_inv()))?;
    ensemble.basis.combine(&c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityStats {
    pub mc_mean: f64,
    /// Unbiased sample variance of `tr ρ_A²`.
    pub mc_var: f64,
    pub eta_mean: f64,
    pub tail_fraction: f64,
    pub exact_mean: f64,
    pub samples: u64,
    pub d_inv: BigUint,
    pub h_max: f64,
}

impl PurityStats {
    pub fn std_error(&self) -> f64 {
        (self.mc_var / self.samples as f64).sqrt()
    }
}

/// `(tr ρ_A², η)` for every trial, in trial order.
pub fn sample_purities(ensemble: &Ensemble, trials: u64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let records: Vec<Result<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let psi = sample_coefficients(ensemble, &mut rng)?;
            let pur = purity_of_coefficients(&psi);
            Ok((pur, -pur.ln() / ensemble.h_max))
        })
        .collect();
    records.into_iter().collect()
}

/// Runs `cfg.trials` independent samples. The result depends only on `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<PurityStats> {
    let ensemble = build_ensemble(cfg)?;
    let exact = mean_purity_bipartite(&ensemble.basis, ensemble.h_max)?;
    let records = sample_purities(&ensemble, cfg.trials, cfg.seed)?;
    let n = records.len() as f64;
    let mean = records.iter().map(|r| r.0).sum::<f64>() / n;
    let var = if records.len() > 1 {
        records.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let eta_mean = records.iter().map(|r| r.1).sum::<f64>() / n;
    let tail = records.iter().filter(|r| (r.1 - 1.0).abs() >= cfg.delta).count() as f64 / n;
    Ok(PurityStats {
        mc_mean: mean,
        mc_var: var,
        eta_mean,
        tail_fraction: tail,
        exact_mean: exact.mean_purity,
        samples: cfg.trials,
        d_inv: exact.d_inv,
        h_max: ensemble.h_max,
    })
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<PurityStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_iterator(d, d, complex_gaussian(rng, d * d).iter().copied());
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let x = r[(k, k)];
        let phase = if x.norm() > 0.0 { x / x.norm() } else { crate::numerics::re(1.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Random Hermitian `dim × dim` matrix with unit Frobenius norm.
pub fn random_hermitian<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = CMatrix::from_iterator(dim, dim, complex_gaussian(rng, dim * dim).iter().copied());
    let h = &g + g.adjoint();
    let norm = h.norm();
    h.unscale(norm)
}

fn chunked_average<F>(samples: u64, seed: u64, dim: usize, f: F) -> CMatrix
where
    F: Fn(&mut ChaCha20Rng) -> CMatrix + Sync,
{
    let chunks = samples.div_ceil(CHUNK as u64);
    let partial: Vec<CMatrix> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = CMatrix::zeros(dim, dim);
            let hi = ((c + 1) * CHUNK as u64).min(samples);
            for t in c * CHUNK as u64..hi {
                acc += f(&mut trial_rng(seed, t));
            }
            acc
        })
        .collect();
    let total = partial.into_iter().fold(CMatrix::zeros(dim, dim), |a, b| a + b);
    total.unscale(samples as f64)
}

/// Monte Carlo estimate of `∫ (U⊗U) X (U⊗U)† dU` on `C^d ⊗ C^d`.
pub fn twirl_mc(x: &CMatrix, d: usize, samples: u64, seed: u64) -> Result<CMatrix> {
    if x.nrows() != d * d || x.ncols() != d * d {
        return Err(Error::LengthMismatch { expected: d * d, got: x.nrows() });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    Ok(chunked_average(samples, seed, d * d, |rng| {
        let u = haar_unitary(rng, d);
        let uu = u.kronecker(&u);
        &uu * x * uu.adjoint()
    }))
}

/// Monte Carlo estimate of `E (|φ⟩⟨φ|)^{⊗n}` for Haar-random `φ ∈ C^dim`.
pub fn state_moment_mc(n: u32, dim: usize, samples: u64, seed: u64) -> Result<CMatrix> {
    if n == 0 || samples == 0 {
        return Err(Error::InvalidArgument("need n ≥ 1 and samples ≥ 1".into()));
    }
    let total = crate::limits::saturating_pow(dim as u128, n);
    crate::limits::check(total.saturating_mul(total))?;
    Ok(chunked_average(samples, seed, total as usize, |rng| {
        let phi = normalized(complex_gaussian(rng, dim)).expect("nonzero Gaussian");
        let mut v = phi.clone();
        for _ in 1..n {
            v = v.kronecker(&phi);
        }
        &v * v.adjoint()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::{
        fluctuation_ratio, moment_operator, second_moment_bipartite, swap_operator, werner_coeffs,
    };
    use crate::numerics::re;
    use crate::su2rep::near_invariant_basis;

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    fn spin_cfg(s: &str, n: u32, p: u32, trials: u64, seed: u64) -> ExperimentConfig {
        ExperimentConfig::new(2, h(s), n, p, HalfInt::ZERO, trials, seed)
    }

    #[test]
    fn singlet_is_always_maximally_entangled() {
        for seed in [0, 1, 99] {
            let st = run_experiment(&spin_cfg("1/2", 2, 1, 50, seed)).unwrap();
            assert!((st.eta_mean - 1.0).abs() < 1e-12);
            assert_eq!(st.tail_fraction, 0.0);
            assert!((st.mc_mean - 0.5).abs() < 1e-12);
            assert!(st.mc_var < 1e-24);
        }
    }

    #[test]
    fn mean_matches_exact_value() {
        let st = run_experiment(&spin_cfg("1/2", 4, 2, 10_000, 3)).unwrap();
        assert!((st.mc_mean - st.exact_mean).abs() <= 3.0 * st.std_error(), "{st:?}");
    }

    #[test]
    fn mean_within_four_sigma_across_seeds() {
        let ok = (0..50u64)
            .filter(|&seed| {
                let st = run_experiment(&spin_cfg("1", 4, 2, 2000, seed)).unwrap();
                (st.mc_mean - st.exact_mean).abs() <= 4.0 * st.std_error()
            })
            .count();
        assert!(ok as f64 >= 0.99 * 50.0, "{ok}/50");
    }

    #[test]
    fn su3_instance_matches_exact_value() {
        let cfg = ExperimentConfig::new(3, HalfInt::from_int(1), 6, 3, HalfInt::ZERO, 4000, 8);
        let st = run_experiment(&cfg).unwrap();
        assert!((st.mc_mean - st.exact_mean).abs() <= 4.0 * st.std_error(), "{st:?}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = spin_cfg("1", 5, 2, 3000, 7);
        let a = run_experiment_with_threads(&cfg, 1).unwrap();
        let b = run_experiment_with_threads(&cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mc_mean.to_bits(), b.mc_mean.to_bits());
        assert_eq!(a, run_experiment(&cfg).unwrap());
    }

    #[test]
    fn empty_subspaces_name_the_obstruction() {
        match run_experiment(&spin_cfg("1/2", 3, 1, 10, 0)) {
            Err(Error::EmptySubspace(msg)) => assert!(msg.contains("half-integer"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let cfg = ExperimentConfig::new(3, HalfInt::from_int(1), 4, 2, HalfInt::ZERO, 10, 0);
        match run_experiment(&cfg) {
            Err(Error::EmptySubspace(msg)) => assert!(msg.contains("divisible"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(run_experiment(&spin_cfg("1/2", 4, 2, 0, 0)).is_err());
        assert!(run_experiment(&spin_cfg("1/2", 4, 4, 10, 0)).is_err());
    }

    #[test]
    fn sample_state_examples() {
        let b = near_invariant_basis(h("1/2"), 2, 1, HalfInt::ZERO).unwrap().basis;
        let v = sample_state(&b, &mut trial_rng(1, 0)).unwrap();
        let overlap = (b.matrix().adjoint() * &v)[(0, 0)];
        assert!((overlap.norm() - 1.0).abs() < 1e-12);

        let b = near_invariant_basis(h("1"), 4, 2, h("1")).unwrap().basis;
        let dim = b.dim() as f64;
        let samples = 100_000u64;
        let xs: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|t| {
                let v = sample_state(&b, &mut trial_rng(2, t)).unwrap();
                assert!(b.residual(&v).unwrap() <= 1e-10);
                (b.matrix().column(0).adjoint() * &v)[(0, 0)].norm_sqr()
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / samples as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
        assert!((mean - 1.0 / dim).abs() <= 3.0 * (var / samples as f64).sqrt());
        assert!(sample_state(&SubspaceBasis::empty(4), &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn relative_variance_matches_second_moment() {
        for (s, n, p) in [("1/2", 4, 2), ("1", 4, 2), ("1", 5, 2)] {
            let cfg = spin_cfg(s, n, p, 20_000, 21);
            let e = build_ensemble(&cfg).unwrap();
            let recs = sample_purities(&e, cfg.trials, cfg.seed).unwrap();
            let m = recs.len() as f64;
            let mean = recs.iter().map(|r| r.0).sum::<f64>() / m;
            let second: Vec<f64> = recs.iter().map(|r| r.0 * r.0).collect();
            let m2 = second.iter().sum::<f64>() / m;
            let sd2 = (second.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
            let exact2 = second_moment_bipartite(&e.basis).unwrap();
            assert!((m2 - exact2).abs() <= 4.0 * sd2 / m.sqrt(), "s={s} n={n}: {m2} vs {exact2}");
            let ratio = fluctuation_ratio(&e.basis).unwrap();
            let empirical = m2 / (mean * mean) - 1.0;
            assert!((empirical - ratio).abs() < 0.05 * (1.0 + ratio), "{empirical} vs {ratio}");
        }
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        for d in 1..6 {
            let u = haar_unitary(&mut trial_rng(4, d as u64), d);
            assert!((u.adjoint() * &u - CMatrix::identity(d, d)).norm() < 1e-12);
        }
        let x = random_hermitian(&mut trial_rng(0, 0), 4);
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert!((&x - x.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn twirl_matches_werner_form() {
        for d in [2usize, 3] {
            let x = random_hermitian(&mut trial_rng(31, d as u64), d * d);
            let (c1, c2) = werner_coeffs(&x, d).unwrap();
            let exact = CMatrix::identity(d * d, d * d) * c1 + swap_operator(d).unwrap() * c2;
            let mc = twirl_mc(&x, d, 10_000, 5).unwrap();
            assert!((mc - exact).norm() <= 5e-2);
        }
        let mut x = CMatrix::zeros(4, 4);
        x[(0, 0)] = re(1.0);
        let mc = twirl_mc(&x, 2, 10_000, 6).unwrap();
        let exact = (CMatrix::identity(4, 4) + swap_operator(2).unwrap()).unscale(6.0);
        assert!((mc - exact).norm() <= 5e-2);
    }

    #[test]
    fn state_moments_match_moment_operator() {
        let mc = state_moment_mc(2, 3, 20_000, 9).unwrap();
        assert!((mc - moment_operator(2, 3).unwrap()).norm() <= 5e-2);
        let a = state_moment_mc(2, 2, 2500, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| state_moment_mc(2, 2, 2500, 9).unwrap());
        assert_eq!(a, b);
    }
}
