//! Named verification suites. Each returns a list of pass/fail checks and the
//! scaling reports behind them.

use std::fmt;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::asymptotics::{
    check_cgc_asymptotics, check_fluctuation_decay, check_mult_exponents_sud, check_mult_window,
    check_power_sum, check_purity_scaling, default_profile, spin_grid, Check, ScalingReport,
};
use crate::combinat::{
    dual_partition, dual_pattern, f_identity, gt_patterns, is_dual, is_dual_gt, partitions, weyl_dim,
    HalfInt, Partition,
};
use crate::entangle::{moment_operator, swap_operator, werner_coeffs};
use crate::montecarlo::{random_hermitian, state_moment_mc, trial_rng, twirl_mc};
use crate::numerics::{re, CMatrix};
use crate::sudrep::{casimir_value, irrep_action, pair_invariants, singlet_in_pair};
use crate::{Error, Result};

pub const SUITES: [&str; 10] = [
    "commutators",
    "duality",
    "f-identity",
    "lemma6",
    "lemma7",
    "lemma9",
    "lemma10-11",
    "purity-scaling",
    "fluctuation",
    "twirl",
];

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub suite: String,
    pub checks: Vec<Check>,
    pub reports: Vec<ScalingReport>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.enforced) && self.reports.iter().all(|r| r.passed)
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match (c.passed, c.enforced) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "INFO",
            };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        for r in &self.reports {
            write!(f, "{r}")?;
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{verdict} suite {}", self.suite)
    }
}

pub fn run_suite(name: &str) -> Result<SuiteResult> {
    let (checks, reports) = match name {
        "commutators" => (commutators(500, 4)?, Vec::new()),
        "duality" => (duality()?, Vec::new()),
        "f-identity" => (f_identities(20)?, Vec::new()),
        "lemma6" => (Vec::new(), lemma6()?),
        "lemma7" => (Vec::new(), lemma7()?),
        "lemma9" => (lemma9(50, 4)?, Vec::new()),
        "lemma10-11" => (Vec::new(), lemma10_11()?),
        "purity-scaling" => (Vec::new(), purity_scaling()?),
        "fluctuation" => (Vec::new(), fluctuation()?),
        "twirl" => (twirl()?, Vec::new()),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteResult { suite: name.to_string(), checks, reports })
}

/// Partitions with at most `d − 1` nonzero parts (one per irrep of SU(d))
/// whose gl(d) irrep has dimension at most `max_dim`.
pub fn irreps_up_to_dim(d: usize, max_dim: u64) -> Vec<Partition> {
    let mut out = Vec::new();
    for top in 0u64.. {
        // (top, 0, ..., 0) is the smallest irrep with first part `top`.
        if weyl_dim(&Partition::symmetric(d, top)).to_u64().unwrap_or(u64::MAX) > max_dim {
            break;
        }
        for size in top..=top * (d as u64 - 1) {
            for lam in partitions(size, d - 1) {
                let lam = lam.with_len(d).expect("length fits");
                if lam.parts()[0] == top && weyl_dim(&lam).to_u64().unwrap_or(u64::MAX) <= max_dim {
                    out.push(lam);
                }
            }
        }
    }
    out
}

/// gl(d) commutation relations `[E^{ij}, E^{kl}] = δ_jk E^{il} − δ_il E^{kj}` and
/// the quadratic Casimir acting as a scalar, on every irrep of dimension at
/// most `max_dim` for `2 ≤ d ≤ max_d`.
pub fn commutators(max_dim: u64, max_d: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 2..=max_d {
        let irreps = irreps_up_to_dim(d, max_dim);
        let errs: Vec<Result<(f64, f64)>> = irreps
            .par_iter()
            .map(|lam| {
                let a = irrep_action(lam)?;
                let e: Vec<Vec<_>> = (1..=d)
                    .map(|i| (1..=d).map(|j| a.e(i, j)).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?;
                let mut comm_err: f64 = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        for k in 0..d {
                            for l in 0..d {
                                let lhs = e[i][j].commutator(&e[k][l])?;
                                let mut rhs = crate::numerics::SparseOp::zero(a.dim());
                                if j == k {
                                    rhs = rhs.add(&e[i][l])?;
                                }
                                if i == l {
                                    rhs = rhs.sub(&e[k][j])?;
                                }
                                comm_err = comm_err.max(lhs.sub(&rhs)?.max_abs());
                            }
                        }
                    }
                }
                let cas = a.casimir()?;
                let target = crate::numerics::SparseOp::identity(a.dim()).scale(re(casimir_value(lam)));
                Ok((comm_err, cas.sub(&target)?.max_abs()))
            })
            .collect();
        let mut comm: f64 = 0.0;
        let mut cas: f64 = 0.0;
        for r in errs {
            let (x, y) = r?;
            comm = comm.max(x);
            cas = cas.max(y);
        }
        checks.push(Check::new(
            format!("gl({d}) commutation relations, {} irreps with dim ≤ {max_dim}", irreps.len()),
            comm <= 1e-9,
            format!("max entry error {comm:.2e}"),
        ));
        checks.push(Check::new(
            format!("gl({d}) Casimir is scalar, {} irreps with dim ≤ {max_dim}", irreps.len()),
            cas <= 1e-8,
            format!("max entry error {cas:.2e}"),
        ));
    }
    Ok(checks)
}

/// Dual partners `(λ, μ)` with `λ_d = 0` and constant `c ∈ {λ_1, λ_1 + 1}`.
fn dual_partners(d: usize, max_dim: u64) -> Vec<(Partition, Partition)> {
    let mut out = Vec::new();
    for lam in irreps_up_to_dim(d, max_dim) {
        for c in [lam.parts()[0], lam.parts()[0] + 1] {
            let total = d as u64 * c - lam.size();
            if let Some(mu) = dual_partition(&lam, total) {
                out.push((lam.clone(), mu));
            }
        }
    }
    out
}

/// Partition duality is an involution; the pattern map is a bijection onto
/// the unique dual partner of each pattern; `V_λ ⊗ V_μ` has a one-dimensional
/// invariant space exactly for dual pairs.
pub fn duality() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 2..=4 {
        let pairs = dual_partners(d, 50);
        let mut involution = true;
        let mut bijection = true;
        for (lam, mu) in &pairs {
            involution &=
                is_dual(lam, mu) && is_dual(mu, lam) && dual_partition(mu, lam.size()).as_ref() == Some(lam);
            let mu_patterns = gt_patterns(mu);
            for p in gt_patterns(lam) {
                let partners: Vec<_> = mu_patterns.iter().filter(|q| is_dual_gt(&p, q)).collect();
                let image = dual_pattern(&p, mu);
                bijection &= partners.len() == 1
                    && image.as_ref() == Some(partners[0])
                    && image.and_then(|q| dual_pattern(&q, lam)).as_ref() == Some(&p);
            }
        }
        checks.push(Check::new(
            format!("d={d}: partition duality is an involution ({} pairs)", pairs.len()),
            involution,
            "λ ↔ λ_* for every pair",
        ));
        checks.push(Check::new(
            format!("d={d}: each pattern has exactly one dual pattern"),
            bijection,
            "pattern map agrees with the duality predicate and inverts",
        ));

        // Numerical invariant count over all pairs of small irreps of equal
        // total box count modulo d.
        let small = irreps_up_to_dim(d, 15);
        let mut mismatches = Vec::new();
        let mut tested = 0usize;
        for a in &small {
            for b in &small {
                if (a.size() + b.size()) % d as u64 != 0 {
                    continue;
                }
                tested += 1;
                let inv = pair_invariants(&irrep_action(a)?, &irrep_action(b)?)?.dim();
                let expect = usize::from(is_dual(a, b));
                if inv != expect {
                    mismatches.push(format!("{a}⊗{b}: {inv} vs {expect}"));
                }
            }
        }
        checks.push(Check::new(
            format!("d={d}: invariants exist exactly for dual pairs ({tested} pairs)"),
            mismatches.is_empty(),
            if mismatches.is_empty() { "all agree".to_string() } else { mismatches.join("; ") },
        ));
    }
    Ok(checks)
}

/// `Σ_k (−1)^k C(r,k)/(k+t) = 1/(t·C(r+t,t))` exactly for `1 ≤ t, r ≤ max`.
pub fn f_identities(max: u64) -> Result<Vec<Check>> {
    let mut failures = Vec::new();
    for t in 1..=max {
        for r in 1..=max {
            if !f_identity(t, r)?.holds() {
                failures.push(format!("(t={t}, r={r})"));
            }
        }
    }
    Ok(vec![Check::new(
        format!("alternating binomial identity, 1 ≤ t, r ≤ {max}"),
        failures.is_empty(),
        if failures.is_empty() { "exact equality".to_string() } else { failures.join(", ") },
    )])
}

fn int_grid(lo: i64, hi: i64) -> Vec<HalfInt> {
    (lo..=hi).map(HalfInt::from_int).collect()
}

pub fn lemma6() -> Result<Vec<ScalingReport>> {
    let half = HalfInt::HALF;
    Ok(vec![
        check_mult_window(2, &int_grid(1, 12))?,
        check_mult_window(3, &spin_grid(HalfInt::from_int(2), HalfInt::from_int(24), half))?,
        check_mult_window(4, &int_grid(2, 12))?,
        check_mult_window(5, &[8, 12, 16, 24, 32, 48, 64].map(HalfInt::from_int))?,
    ])
}

pub fn lemma7() -> Result<Vec<ScalingReport>> {
    let grid = int_grid(5, 60);
    let mut out = vec![
        check_cgc_asymptotics(HalfInt::ZERO, HalfInt::ZERO, &grid)?,
        check_cgc_asymptotics(HalfInt::ONE, HalfInt::ZERO, &grid)?,
        check_cgc_asymptotics(HalfInt::ONE, HalfInt::ONE, &grid)?,
        check_cgc_asymptotics(HalfInt::ONE, -HalfInt::ONE, &grid)?,
    ];
    for (t, r) in [(0, 0), (1, 1), (2, 3), (4, 1)] {
        out.push(check_power_sum(t, r, &[64, 128, 256, 512, 1024])?);
    }
    Ok(out)
}

/// Every nonzero coefficient of the dual-pair singlet has modulus
/// `dim(V_λ)^{−1/2}`, and the support is exactly the dual pattern pairs.
pub fn lemma9(max_dim: u64, max_d: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 2..=max_d {
        let pairs = dual_partners(d, max_dim);
        let results: Vec<Result<(f64, bool)>> = pairs
            .par_iter()
            .map(|(lam, mu)| {
                let v = singlet_in_pair(lam, mu)?;
                let pl = gt_patterns(lam);
                let pm = gt_patterns(mu);
                let target = 1.0 / (pl.len() as f64).sqrt();
                let mut err: f64 = 0.0;
                let mut support = true;
                for (i, p) in pl.iter().enumerate() {
                    for (j, q) in pm.iter().enumerate() {
                        let x = v[i * pm.len() + j].norm();
                        let dual = is_dual_gt(p, q);
                        if dual {
                            err = err.max((x - target).abs());
                        }
                        support &= dual == (x > 1e-9);
                    }
                }
                Ok((err, support))
            })
            .collect();
        let mut err: f64 = 0.0;
        let mut support = true;
        for r in results {
            let (e, s) = r?;
            err = err.max(e);
            support &= s;
        }
        checks.push(Check::new(
            format!("d={d}: |coefficient| = dim^(-1/2) on {} dual pairs with dim ≤ {max_dim}", pairs.len()),
            err <= 1e-9,
            format!("max deviation {err:.2e}"),
        ));
        checks.push(Check::new(
            format!("d={d}: support is exactly the dual pattern pairs"),
            support,
            "zero off the dual pairs, nonzero on them",
        ));
    }
    Ok(checks)
}

pub fn lemma10_11() -> Result<Vec<ScalingReport>> {
    let cases: [(usize, u32, u32); 6] = [(2, 2, 3), (2, 4, 4), (3, 2, 3), (3, 3, 3), (3, 2, 4), (3, 4, 5)];
    cases
        .par_iter()
        .map(|&(d, p, q)| {
            let grid: Vec<u64> = [4u64, 8, 16, 32].iter().map(|k| d as u64 * k).collect();
            check_mult_exponents_sud(d, p, q, &default_profile(d, p, q), &grid)
        })
        .collect()
}

pub fn purity_scaling() -> Result<Vec<ScalingReport>> {
    let mut spin_pp = check_purity_scaling(2, 2, 2, &int_grid(1, 8))?;
    spin_pp.asserted = false;
    spin_pp.passed = spin_pp.checks.iter().all(|c| c.passed || !c.enforced);
    Ok(vec![
        check_purity_scaling(2, 2, 3, &int_grid(1, 8))?,
        check_purity_scaling(3, 3, 3, &int_grid(1, 6))?,
        spin_pp,
    ])
}

pub fn fluctuation() -> Result<Vec<ScalingReport>> {
    let spins = spin_grid(HalfInt::HALF, HalfInt::from_twice(5), HalfInt::HALF);
    Ok(vec![
        check_fluctuation_decay(2, 2, 3, &spins)?,
        check_fluctuation_decay(2, 2, 2, &spins)?,
        check_fluctuation_decay(2, 1, 1, &spins)?,
    ])
}

/// Werner coefficients against a Monte Carlo twirl, and the state-moment
/// operator against sampled moments.
pub fn twirl() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in [2usize, 3] {
        for k in 0..3u64 {
            let x = random_hermitian(&mut trial_rng(1000 + d as u64, k), d * d);
            let (c1, c2) = werner_coeffs(&x, d)?;
            let exact = CMatrix::identity(d * d, d * d) * c1 + swap_operator(d)? * c2;
            let mc = twirl_mc(&x, d, 10_000, 77 + k)?;
            let err = (mc - exact).norm();
            checks.push(Check::new(
                format!("twirl of random Hermitian X #{k}, d={d}, 10^4 samples"),
                err <= 5e-2,
                format!("Frobenius error {err:.3e} (tolerance 5e-2)"),
            ));
        }
    }
    let err = (state_moment_mc(3, 3, 100_000, 99)? - moment_operator(3, 3)?).norm();
    checks.push(Check::new(
        "third moment of a Haar-random state in C^3, 10^5 samples",
        err <= 5e-2,
        format!("Frobenius error {err:.3e} (tolerance 5e-2)"),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreps_are_complete_and_bounded() {
        let two = irreps_up_to_dim(2, 10);
        assert_eq!(two.len(), 10);
        assert!(two.iter().all(|l| l.parts()[1] == 0));
        let three = irreps_up_to_dim(3, 8);
        let names: Vec<String> = three.iter().map(|l| l.to_string()).collect();
        assert_eq!(names, ["(0,0,0)", "(1,0,0)", "(1,1,0)", "(2,0,0)", "(2,1,0)", "(2,2,0)"]);
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["f-identity", "lemma6", "lemma7", "fluctuation"] {
            let r = run_suite(name).unwrap();
            assert!(r.passed(), "{r}");
        }
        assert!(run_suite("nope").is_err());
    }

    #[test]
    fn small_structural_suites_pass() {
        for c in commutators(40, 3).unwrap().into_iter().chain(lemma9(20, 3).unwrap()) {
            assert!(c.passed, "{c:?}");
        }
    }
}
