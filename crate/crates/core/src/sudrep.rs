//! gl(d) / SU(d) machinery in the Gelfand-Tsetlin basis: generator matrices,
//! collective operators on tensor powers, invariant subspaces and the
//! invariant vector of a dual pair of irreps.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::combinat::{
    d_inv_count, dual_pairs, gt_patterns, is_dual, symmetric_power_decomposition, weyl_dim, GTPattern,
    HalfInt, Partition,
};
use crate::numerics::{
    null_space_orthonormal, re, BipartiteBasis, CVector, SparseOp, SubspaceBasis, DEFAULT_NULL_TOL,
};
use crate::{limits, Error, Result};

/// Generators of gl(d) acting on `V_λ` in the GT basis (ordered as
/// [`gt_patterns`]).
#[derive(Clone, Debug)]
pub struct IrrepAction {
    pub lam: Partition,
    pub patterns: Vec<GTPattern>,
    index: HashMap<GTPattern, usize>,
    /// `E^{l,l}` for `l = 1..=d` (index `l − 1`).
    pub diag: Vec<SparseOp>,
    /// `E^{l,l+1}` for `l = 1..d` (index `l − 1`).
    pub raise: Vec<SparseOp>,
    /// `E^{l+1,l}` for `l = 1..d` (index `l − 1`).
    pub lower: Vec<SparseOp>,
}

fn hat(p: &GTPattern, i: usize, l: usize) -> i128 {
    if l == 0 || i > l {
        0
    } else {
        p.entry(i, l) as i128 - i as i128
    }
}

/// Coefficient `a_{k,l}` of `|λ + 1^{k,l}⟩` in `E^{l,l+1}|λ⟩`; zero when the
/// shifted pattern is invalid.
pub fn raise_coefficient(p: &GTPattern, k: usize, l: usize) -> f64 {
    if p.shifted(k, l, 1).is_none() {
        return 0.0;
    }
    let x = hat(p, k, l);
    let mut num_f = Vec::new();
    let mut den_f = Vec::new();
    for i in 1..=l + 1 {
        num_f.push(hat(p, i, l + 1) - x);
    }
    for i in 1..l {
        num_f.push(hat(p, i, l - 1) - x - 1);
    }
    for i in (1..=l).filter(|&i| i != k) {
        let y = hat(p, i, l);
        den_f.push(y - x);
        den_f.push(y - x - 1);
    }
    // Zero factors are skipped: they cancel between numerator and denominator.
    let exact = |fs: &[i128]| fs.iter().filter(|&&f| f != 0).try_fold(1i128, |acc, &f| acc.checked_mul(f));
    let v = match (exact(&num_f), exact(&den_f)) {
        (Some(num), Some(den)) => -(num as f64) / (den as f64),
        // Wide irreps: interleave the factors to keep the partial products in range.
        _ => {
            let num = num_f.iter().filter(|&&f| f != 0).map(|&f| f as f64);
            let mut den = den_f.iter().filter(|&&f| f != 0).map(|&f| f as f64);
            let mut acc = -1.0;
            for f in num {
                acc *= f;
                if let Some(g) = den.next() {
                    acc /= g;
                }
            }
            den.fold(acc, |a, g| a / g)
        }
    };
    debug_assert!(v >= 0.0, "negative squared GT coefficient");
    v.max(0.0).sqrt()
}

/// Coefficient `b_{k,l}` of `|λ − 1^{k,l}⟩` in `E^{l+1,l}|λ⟩`.
pub fn lower_coefficient(p: &GTPattern, k: usize, l: usize) -> f64 {
    match p.shifted(k, l, -1) {
        Some(q) => raise_coefficient(&q, k, l),
        None => 0.0,
    }
}

pub fn irrep_action(lam: &Partition) -> Result<IrrepAction> {
    let dim = weyl_dim(lam);
    limits::check(dim.to_u128().unwrap_or(u128::MAX))?;
    let d = lam.len();
    let patterns = gt_patterns(lam);
    let index: HashMap<GTPattern, usize> = patterns.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let n = patterns.len();

    let diag = (1..=d)
        .map(|l| {
            let vals: Vec<f64> =
                patterns.iter().map(|p| (p.row_sum(l) as f64) - (p.row_sum(l - 1) as f64)).collect();
            SparseOp::diagonal(&vals)
        })
        .collect();
    let mut raise = Vec::with_capacity(d.saturating_sub(1));
    let mut lower = Vec::with_capacity(d.saturating_sub(1));
    for l in 1..d {
        let mut up = Vec::new();
        let mut down = Vec::new();
        for (col, p) in patterns.iter().enumerate() {
            for k in 1..=l {
                if let Some(q) = p.shifted(k, l, 1) {
                    up.push((index[&q], col, re(raise_coefficient(p, k, l))));
                }
                if let Some(q) = p.shifted(k, l, -1) {
                    down.push((index[&q], col, re(lower_coefficient(p, k, l))));
                }
            }
        }
        raise.push(SparseOp::new(n, up)?);
        lower.push(SparseOp::new(n, down)?);
    }
    Ok(IrrepAction { lam: lam.clone(), patterns, index, diag, raise, lower })
}

impl IrrepAction {
    pub fn dim(&self) -> usize {
        self.patterns.len()
    }

    pub fn d(&self) -> usize {
        self.lam.len()
    }

    pub fn index_of(&self, p: &GTPattern) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// `E^{i,j}` (1-based); non-adjacent generators come from commutators.
    pub fn e(&self, i: usize, j: usize) -> Result<SparseOp> {
        let d = self.d();
        if i == 0 || j == 0 || i > d || j > d {
            return Err(Error::InvalidArgument(format!("E^({i},{j}) outside gl({d})")));
        }
        if i == j {
            Ok(self.diag[i - 1].clone())
        } else if j == i + 1 {
            Ok(self.raise[i - 1].clone())
        } else if i == j + 1 {
            Ok(self.lower[j - 1].clone())
        } else if i < j {
            self.e(i, j - 1)?.commutator(&self.e(j - 1, j)?)
        } else {
            self.e(i, j + 1)?.commutator(&self.e(j + 1, j)?)
        }
    }

    /// `E^{l,l} − E^{l+1,l+1} = 2 J_{z,l}`.
    pub fn cartan_difference(&self, l: usize) -> Result<SparseOp> {
        self.diag[l - 1].sub(&self.diag[l])
    }

    /// Quadratic Casimir `Σ_{i,j} E^{i,j} E^{j,i}`.
    pub fn casimir(&self) -> Result<SparseOp> {
        let d = self.d();
        let mut acc = SparseOp::zero(self.dim());
        for i in 1..=d {
            for j in 1..=d {
                acc = acc.add(&self.e(i, j)?.mul(&self.e(j, i)?)?)?;
            }
        }
        Ok(acc)
    }
}

/// `Σ_i λ_i (λ_i + d + 1 − 2i)`, the Casimir eigenvalue on `V_λ`.
pub fn casimir_value(lam: &Partition) -> f64 {
    let d = lam.len() as f64;
    lam.parts()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x as f64;
            x * (x + d + 1.0 - 2.0 * (i as f64 + 1.0))
        })
        .sum()
}

/// Weight `(w_1, ..., w_{d−1})`, `w_l = r_l − (r_{l+1} + r_{l−1})/2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector(pub Vec<HalfInt>);

pub fn weight(p: &GTPattern) -> WeightVector {
    let d = p.d();
    WeightVector(
        (1..d)
            .map(|l| {
                let twice = 2 * p.row_sum(l) as i64 - p.row_sum(l + 1) as i64 - p.row_sum(l - 1) as i64;
                HalfInt::from_twice(twice)
            })
            .collect(),
    )
}

/// `Σ_{i=1}^n 1^{⊗(i−1)} ⊗ op ⊗ 1^{⊗(n−i)}`.
pub fn collective(op: &SparseOp, n: u32) -> Result<SparseOp> {
    let m = op.dim();
    let total = limits::saturating_pow(m as u128, n);
    limits::check(total)?;
    limits::check((op.nnz() as u128).saturating_mul(n as u128).saturating_mul(total / (m.max(1) as u128)))?;
    let total = total as usize;
    let mut entries = Vec::with_capacity(op.nnz() * n as usize * (total / m.max(1)));
    for pos in 0..n {
        let after = m.pow(n - 1 - pos);
        let before = m.pow(pos);
        for &(r, c, v) in op.entries() {
            for hi in 0..before {
                let base = hi * m * after;
                for lo in 0..after {
                    entries.push((base + r * after + lo, base + c * after + lo, v));
                }
            }
        }
    }
    SparseOp::new(total, entries)
}

/// `(s, 0, ..., 0)` of length `d`, i.e. `Y_(s)`.
pub fn symmetric_irrep(d: usize, s: u64) -> Result<IrrepAction> {
    irrep_action(&Partition::symmetric(d, s))
}

/// Raising operators and Cartan differences: their joint kernel is the trivial
/// isotypic component. A zero-weight vector killed by every raising operator
/// is a highest-weight vector of weight zero, hence invariant.
fn invariance_ops(raise: &[SparseOp], cartan: &[SparseOp]) -> Vec<SparseOp> {
    cartan.iter().chain(raise).cloned().collect()
}

/// Orthonormal basis of the SU(d)-invariant subspace of `Y_(s)^{⊗n}`.
///
/// The numerical rank is checked against the exact count; a mismatch is an
/// error.
pub fn invariant_subspace(d: usize, s: u64, n: u32) -> Result<SubspaceBasis> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!("need d ≥ 2 and n ≥ 1 (d={d}, n={n})")));
    }
    let y = symmetric_irrep(d, s)?;
    let total = limits::saturating_pow(y.dim() as u128, n);
    limits::check(total)?;
    let mut ops = Vec::new();
    for l in 1..d {
        ops.push(collective(&y.raise[l - 1], n)?);
        ops.push(collective(&y.cartan_difference(l)?, n)?);
    }
    let (raise, cartan): (Vec<_>, Vec<_>) = ops.into_iter().enumerate().partition(|(i, _)| i % 2 == 0);
    let ops = invariance_ops(
        &raise.into_iter().map(|x| x.1).collect::<Vec<_>>(),
        &cartan.into_iter().map(|x| x.1).collect::<Vec<_>>(),
    );
    let basis = null_space_orthonormal(&ops, total as usize, DEFAULT_NULL_TOL)?;
    let exact = d_inv_count(d, s, 1, n - 1);
    if BigUint::from(basis.dim()) != exact {
        return Err(Error::RankMismatch {
            numeric: basis.dim(),
            exact: exact.to_u128().unwrap_or(u128::MAX),
        });
    }
    Ok(basis)
}

/// The invariant unit vector of `V_λ ⊗ V_μ` (index `iλ·dim V_μ + iμ`).
///
/// Its phase makes the coefficient on the highest pattern of `λ` and its dual
/// real positive.
pub fn singlet_in_pair(lam: &Partition, mu: &Partition) -> Result<CVector> {
    if !is_dual(lam, mu) {
        return Err(Error::NoInvariantVector { lam: lam.to_string(), mu: mu.to_string() });
    }
    let a = irrep_action(lam)?;
    let b = irrep_action(mu)?;
    singlet_from_actions(&a, &b)
}

/// Orthonormal basis of the invariant vectors of `V_λ ⊗ V_μ`, computed
/// numerically from the pair generators (no duality test involved).
pub fn pair_invariants(a: &IrrepAction, b: &IrrepAction) -> Result<SubspaceBasis> {
    if a.d() != b.d() {
        return Err(Error::InvalidArgument(format!("rank mismatch: d={} vs d={}", a.d(), b.d())));
    }
    let (da, db) = (a.dim(), b.dim());
    limits::check((da as u128) * (db as u128))?;
    let ia = SparseOp::identity(da);
    let ib = SparseOp::identity(db);
    let pair = |x: &SparseOp, y: &SparseOp| -> Result<SparseOp> { x.kron(&ib)?.add(&ia.kron(y)?) };
    let d = a.d();
    let mut raise = Vec::new();
    let mut cartan = Vec::new();
    for l in 1..d {
        raise.push(pair(&a.raise[l - 1], &b.raise[l - 1])?);
        cartan.push(pair(&a.cartan_difference(l)?, &b.cartan_difference(l)?)?);
    }
    null_space_orthonormal(&invariance_ops(&raise, &cartan), da * db, DEFAULT_NULL_TOL)
}

fn singlet_from_actions(a: &IrrepAction, b: &IrrepAction) -> Result<CVector> {
    let db = b.dim();
    let basis = pair_invariants(a, b)?;
    if basis.dim() != 1 {
        return Err(Error::RankMismatch { numeric: basis.dim(), exact: 1 });
    }
    let v = basis.vector(0);
    // Highest pattern of λ is index 0; its only partner carries the phase.
    let anchor = (0..db).map(|j| v[j]).max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("non-empty");
    let phase = anchor.conj() / anchor.norm();
    Ok(v * phase)
}

/// Label `(λ, α, β)` of an invariant vector in the block model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLabel {
    pub lam: Partition,
    pub dual: Partition,
    pub alpha: usize,
    pub beta: usize,
}

/// The invariant subspace of `Y_(s)^{⊗p} ⊗ Y_(s)^{⊗q}` in local coordinates
/// `A' = ⊕_λ V_λ ⊗ C^{N(λ)}`, `B' = ⊕_μ V_μ ⊗ C^{N(μ)}` (only blocks that carry
/// invariants). Local unitaries relate it to the product-coordinate subspace.
#[derive(Clone, Debug)]
pub struct InvariantBlockModel {
    pub d: usize,
    pub s: u64,
    pub p: u32,
    pub q: u32,
    pub labels: Vec<BlockLabel>,
    pub basis: BipartiteBasis,
}

pub fn invariant_block_model(d: usize, s: u64, p: u32, q: u32) -> Result<InvariantBlockModel> {
    if d < 2 || p == 0 || q == 0 {
        return Err(Error::InvalidArgument(format!("need d ≥ 2, p, q ≥ 1 (d={d}, p={p}, q={q})")));
    }
    let exact = d_inv_count(d, s, p, q);
    limits::check(exact.to_u128().unwrap_or(u128::MAX))?;
    let left = symmetric_power_decomposition(s, p, d);
    let right = symmetric_power_decomposition(s, q, d);
    let to_usize = |x: &BigUint| {
        x.to_usize().ok_or(Error::DimensionOverflow { requested: u128::MAX, max: limits::max_dim() })
    };
    let pairs: Vec<(Partition, Partition, usize, usize)> = dual_pairs(&left, &right, q as u64 * s)
        .map(|(lam, na, nb)| {
            let mu = crate::combinat::dual_partition(lam, q as u64 * s).expect("dual exists");
            Ok((lam.clone(), mu, to_usize(na)?, to_usize(nb)?))
        })
        .collect::<Result<_>>()?;

    let mut labels = Vec::new();
    let mut vectors = Vec::new();
    let (mut off_a, mut off_b) = (0usize, 0usize);
    for (lam, mu, na, nb) in &pairs {
        let a = irrep_action(lam)?;
        let b = irrep_action(mu)?;
        let v = singlet_from_actions(&a, &b)?;
        let (da, db) = (a.dim(), b.dim());
        let support: Vec<(usize, usize, _)> =
            (0..da * db).filter(|&x| v[x].norm() > 1e-12).map(|x| (x / db, x % db, v[x])).collect();
        for alpha in 0..*na {
            for beta in 0..*nb {
                labels.push(BlockLabel { lam: lam.clone(), dual: mu.clone(), alpha, beta });
                vectors.push(
                    support
                        .iter()
                        .map(|&(ia, ib, c)| (off_a + ia * na + alpha, off_b + ib * nb + beta, c))
                        .collect(),
                );
            }
        }
        off_a += da * na;
        off_b += db * nb;
    }
    let basis = BipartiteBasis::new(off_a, off_b, vectors)?;
    Ok(InvariantBlockModel { d, s, p, q, labels, basis })
}
