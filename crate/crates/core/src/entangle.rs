//! Entanglement functionals and their exact averages over the uniform
//! ensemble of states in a subspace.
//!
//! A state of `A ⊗ B` is handled as its coefficient matrix `Ψ` (`dimA × dimB`),
//! so `ρ_A = Ψ Ψ†`. For an orthonormal basis `{B_i}` of a subspace and a uniform
//! random unit vector in it:
//!
//! - `E tr ρ_A² = (tr P² + tr Q²)/(D² + D)` with `P = Σ B_i B_i†`, `Q = Σ B_i† B_i`;
//! - `E (tr ρ_A²)² = Σ_{σ∈S4} Σ_a T(a1,a_σ1,a2,a_σ2) T(a3,a_σ3,a4,a_σ4) / D^{↑4}`
//!   with `T(i,j,k,l) = tr(B_i B_j† B_k B_l†)`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::combinat::{
    binomial, d_inv_count, dual_pairs, symmetric_power_decomposition, weyl_dim, HalfInt, Su2Multiplicities,
};
use crate::numerics::{partial_trace_b, re, BipartiteBasis, CMatrix, SubspaceBasis, C64};
use crate::su2rep::{near_invariant_dim, racah_cgc_exact, ratio_to_f64, NearInvParams};
use crate::{limits, Error, Result};

/// `p` local systems for Alice, `q` for Bob, each of dimension `dim_local`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteSplit {
    pub p: u32,
    pub q: u32,
    pub dim_local: usize,
}

impl BipartiteSplit {
    pub fn new(p: u32, q: u32, dim_local: usize) -> Result<Self> {
        if p == 0 || q == 0 || dim_local == 0 {
            return Err(Error::InvalidArgument(format!(
                "need p, q, dimLocal ≥ 1 (p={p}, q={q}, dimLocal={dim_local})"
            )));
        }
        Ok(BipartiteSplit { p, q, dim_local })
    }

    fn side(&self, k: u32) -> Result<usize> {
        let dim = limits::saturating_pow(self.dim_local as u128, k);
        limits::check(dim)?;
        Ok(dim as usize)
    }

    pub fn dim_a(&self) -> Result<usize> {
        self.side(self.p)
    }

    pub fn dim_b(&self) -> Result<usize> {
        self.side(self.q)
    }

    pub fn h_max(&self) -> f64 {
        self.p as f64 * (self.dim_local as f64).ln()
    }
}

/// First moment of the purity over a uniformly random state of a subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct PuritySummary {
    pub d_inv: BigUint,
    pub tr_w_id2: f64,
    pub tr_w_swap: f64,
    pub mean_purity: f64,
    pub h_max: f64,
    /// The mean purity as an exact rational, when it was computed exactly.
    pub exact_mean: Option<BigRational>,
}

impl PuritySummary {
    /// `K = −ln E e^{−H₂}`, i.e. minus the log of the mean purity.
    pub fn k(&self) -> f64 {
        -self.mean_purity.ln()
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `tr ρ²` for a Hermitian `ρ`, as `‖ρ‖_F²`.
pub fn purity(rho: &CMatrix) -> Result<f64> {
    check_square(rho)?;
    Ok(rho.norm_squared())
}

/// `tr (Ψ Ψ†)²` through the smaller of the two Gram matrices.
pub fn purity_of_coefficients(psi: &CMatrix) -> f64 {
    if psi.nrows() <= psi.ncols() {
        (psi * psi.adjoint()).norm_squared()
    } else {
        (psi.adjoint() * psi).norm_squared()
    }
}

/// `H₂(ρ) = −ln tr ρ²`.
pub fn renyi2(rho: &CMatrix) -> Result<f64> {
    check_square(rho)?;
    let tr = rho.trace();
    if (tr - re(1.0)).norm() > 1e-8 {
        return Err(Error::InvalidArgument(format!("density matrix has trace {tr}")));
    }
    Ok(-purity(rho)?.ln())
}

/// `p · ln binom(s+d−1, d−1)`, the Rényi-2 entropy of `p` maximally mixed
/// copies of `Sym^s(C^d)`.
pub fn h_max(d: usize, s: u64, p: u32) -> f64 {
    let dim = binomial(s + d as u64 - 1, d as u64 - 1);
    p as f64 * dim.to_f64().unwrap_or(f64::INFINITY).ln()
}

/// `p · ln(2s+1)` for spin `s`.
pub fn h_max_spin(s: HalfInt, p: u32) -> f64 {
    p as f64 * ((s.twice() + 1) as f64).ln()
}

/// `H₂(ρ_A)/H_max` for a unit vector of the split's product space.
pub fn eta(psi: &crate::numerics::CVector, split: &BipartiteSplit) -> Result<f64> {
    let (da, db) = (split.dim_a()?, split.dim_b()?);
    let hm = split.h_max();
    if hm <= 0.0 {
        return Err(Error::InvalidArgument("H_max vanishes for one-dimensional local systems".into()));
    }
    let rho = partial_trace_b(psi, da, db)?;
    Ok(renyi2(&rho)? / hm)
}

/// `(tr P², tr Q²)` for `P = Σ B_i B_i†` and `Q = Σ B_i† B_i`.
pub fn weingarten_traces(basis: &BipartiteBasis) -> (f64, f64) {
    // P[a,a'] = Σ_i Σ_b B_i[a,b] conj(B_i[a',b]); Q likewise with the roles swapped.
    fn gram(vectors: &[Vec<(usize, usize, C64)>], swap: bool) -> f64 {
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for v in vectors {
            let mut groups: BTreeMap<usize, Vec<(usize, C64)>> = BTreeMap::new();
            for &(a, b, x) in v {
                let (row, inner) = if swap { (b, a) } else { (a, b) };
                // For Q = Σ B†B the entry is conj(B[a,b]) B[a,b'], keyed by a.
                let x = if swap { x.conj() } else { x };
                groups.entry(inner).or_default().push((row, x));
            }
            for g in groups.values() {
                for &(r1, x1) in g {
                    for &(r2, x2) in g {
                        *acc.entry((r1, r2)).or_insert(re(0.0)) += x1 * x2.conj();
                    }
                }
            }
        }
        acc.values().map(|z| z.norm_sqr()).sum()
    }
    (gram(basis.vectors(), false), gram(basis.vectors(), true))
}

fn summary_from_traces(d_inv: usize, tr_w_id2: f64, tr_w_swap: f64, h_max: f64) -> PuritySummary {
    let d = d_inv as f64;
    PuritySummary {
        d_inv: BigUint::from(d_inv),
        tr_w_id2,
        tr_w_swap,
        mean_purity: (tr_w_id2 + tr_w_swap) / (d * d + d),
        h_max,
        exact_mean: None,
    }
}

/// Mean purity of a uniformly random state of the span of `basis`, given in
/// local coordinates.
pub fn mean_purity_bipartite(basis: &BipartiteBasis, h_max: f64) -> Result<PuritySummary> {
    if basis.is_empty() {
        return Err(Error::EmptySubspace("basis has no vectors".into()));
    }
    let (id2, swap) = weingarten_traces(basis);
    Ok(summary_from_traces(basis.dim(), id2, swap, h_max))
}

/// Mean purity of a uniformly random state of the span of `basis`, whose
/// vectors live in the split's product space.
pub fn exact_mean_purity(basis: &SubspaceBasis, split: &BipartiteSplit) -> Result<PuritySummary> {
    let (da, db) = (split.dim_a()?, split.dim_b()?);
    if basis.is_empty() {
        return Err(Error::EmptySubspace("basis has no vectors".into()));
    }
    let local = BipartiteBasis::from_subspace(basis, da, db)?;
    mean_purity_bipartite(&local, split.h_max())
}

fn rational(n: &BigUint, d: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(n.clone()), BigInt::from(d.clone()))
}

fn summary_from_exact(d_inv: BigUint, id2: BigRational, swap: BigRational, h_max: f64) -> PuritySummary {
    let d = BigInt::from(d_inv.clone());
    let mean = (&id2 + &swap) / BigRational::from_integer(&d * &d + &d);
    PuritySummary {
        d_inv,
        tr_w_id2: ratio_to_f64(&id2),
        tr_w_swap: ratio_to_f64(&swap),
        mean_purity: ratio_to_f64(&mean),
        h_max,
        exact_mean: Some(mean),
    }
}

/// Mean purity of the random SU(d)-invariant state of
/// `Sym^s(C^d)^{⊗p} ⊗ Sym^s(C^d)^{⊗q}` from the dual-pair sums
/// `Σ_λ N(λ) N(λ_*)² / dim V_λ` and `Σ_λ N(λ)² N(λ_*) / dim V_λ`.
pub fn closed_form_mean_purity(d: usize, s: u64, p: u32, q: u32) -> Result<PuritySummary> {
    if d < 2 || p == 0 || q == 0 {
        return Err(Error::InvalidArgument(format!("need d ≥ 2, p, q ≥ 1 (d={d}, p={p}, q={q})")));
    }
    let total = (p + q) as u64 * s;
    if !total.is_multiple_of(d as u64) {
        return Err(Error::EmptySubspace(format!("(p+q)·s = {total} is not divisible by d = {d}")));
    }
    let left = symmetric_power_decomposition(s, p, d);
    let right = symmetric_power_decomposition(s, q, d);
    let mut id2 = BigRational::zero();
    let mut swap = BigRational::zero();
    for (lam, na, nb) in dual_pairs(&left, &right, q as u64 * s) {
        let dim = weyl_dim(lam);
        id2 += rational(&(na * nb * nb), &dim);
        swap += rational(&(na * na * nb), &dim);
    }
    let d_inv = d_inv_count(d, s, p, q);
    if d_inv.is_zero() {
        return Err(Error::EmptySubspace(format!("no invariant states for d={d}, s={s}, p={p}, q={q}")));
    }
    Ok(summary_from_exact(d_inv, id2, swap, h_max(d, s, p)))
}

/// Mean purity of the random near-invariant state (total spin at most `j0`)
/// of `p + q` spin-`s` systems, from squared Clebsch-Gordan sums.
///
/// `P` is diagonal in the local coupled basis with entries
/// `S(j1,m1) = Σ_{j2, j ≤ j0, m} N(q,j2) |C^{j1 j2 j}_{m1, m−m1, m}|²`, each repeated
/// `N(p,j1)` times; `Q` is the mirror image.
pub fn su2_mean_purity(s: HalfInt, p: u32, q: u32, j0: HalfInt) -> Result<PuritySummary> {
    let params = NearInvParams::new(s, p + q, p, j0)?;
    let d_inv = near_invariant_dim(s, p + q, p, j0)?;
    if d_inv.is_zero() {
        return Err(Error::EmptySubspace(format!(
            "no state of {} spin-{s} systems has total spin ≤ {j0}",
            p + q
        )));
    }
    let left = Su2Multiplicities::new(params.p, s);
    let right = Su2Multiplicities::new(params.q(), s);
    let side = |own: &Su2Multiplicities, other: &Su2Multiplicities, own_first: bool| {
        let mut acc = BigRational::zero();
        for (j1, n1) in own.nonzero() {
            let mut sum_sq = BigRational::zero();
            for m1 in j1.down_to(-j1) {
                let mut diag = BigRational::zero();
                for (j2, n2) in other.nonzero() {
                    for j in (0..=j0.twice()).map(HalfInt::from_twice) {
                        for m in j.down_to(-j) {
                            let m2 = m - m1;
                            let c = if own_first {
                                racah_cgc_exact(j1, j2, j, m1, m2, m)
                            } else {
                                racah_cgc_exact(j2, j1, j, m2, m1, m)
                            };
                            if !c.is_zero() {
                                diag += c.square * BigRational::from_integer(BigInt::from(n2.clone()));
                            }
                        }
                    }
                }
                sum_sq += &diag * &diag;
            }
            acc += sum_sq * BigRational::from_integer(BigInt::from(n1.clone()));
        }
        acc
    };
    let id2 = side(&left, &right, true);
    let swap = side(&right, &left, false);
    Ok(summary_from_exact(d_inv, id2, swap, h_max_spin(s, p)))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// `D (D+1) ⋯ (D+n−1)`.
pub fn rising_factorial(d: u64, n: u32) -> BigUint {
    (0..n as u64).fold(BigUint::from(1u32), |acc, k| acc * (d + k))
}

fn rising_f64(d: usize, n: u32) -> f64 {
    (0..n).map(|k| (d + k as usize) as f64).product()
}

/// `E (tr ρ_A²)²` for a uniformly random state of the span of `basis`.
pub fn second_moment_bipartite(basis: &BipartiteBasis) -> Result<f64> {
    let dd = basis.dim();
    if dd == 0 {
        return Err(Error::EmptySubspace("basis has no vectors".into()));
    }
    // tr ρ_A² = tr ρ_B²: contract over whichever side is smaller.
    let transpose = basis.dim_b() < basis.dim_a();
    let vectors: Vec<BTreeMap<usize, Vec<(usize, C64)>>> = basis
        .vectors()
        .iter()
        .map(|v| {
            let mut g: BTreeMap<usize, Vec<(usize, C64)>> = BTreeMap::new();
            for &(a, b, x) in v {
                let (row, col) = if transpose { (b, a) } else { (a, b) };
                g.entry(col).or_default().push((row, x));
            }
            g
        })
        .collect();
    if dd == 1 {
        let (id2, _) = weingarten_traces(basis);
        return Ok(id2 * id2);
    }
    let d4 = (dd as u128).pow(4);
    limits::check(d4)?;

    // K_ij = B_i B_j† as sparse maps, then T(i,j,k,l) = Σ K_ij[x,x'] K_kl[x',x].
    let pairs: Vec<(usize, usize)> = (0..dd).flat_map(|i| (0..dd).map(move |j| (i, j))).collect();
    let ks: Vec<BTreeMap<(usize, usize), C64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut k = BTreeMap::new();
            for (y, gi) in &vectors[i] {
                if let Some(gj) = vectors[j].get(y) {
                    for &(x, u) in gi {
                        for &(x2, w) in gj {
                            *k.entry((x, x2)).or_insert(re(0.0)) += u * w.conj();
                        }
                    }
                }
            }
            k
        })
        .collect();
    let mut columns: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for k in &ks {
        for key in k.keys() {
            let next = columns.len();
            columns.entry(*key).or_insert(next);
        }
    }
    limits::check((pairs.len() as u128) * (columns.len() as u128))?;
    let mut fwd = CMatrix::zeros(pairs.len(), columns.len());
    let mut bwd = CMatrix::zeros(pairs.len(), columns.len());
    for (row, k) in ks.iter().enumerate() {
        for (&(x, x2), &z) in k {
            fwd[(row, columns[&(x, x2)])] = z;
            if let Some(&c) = columns.get(&(x2, x)) {
                bwd[(row, c)] = z;
            }
        }
    }
    let t = &fwd * bwd.transpose();
    let at = |i: usize, j: usize, k: usize, l: usize| t[(i * dd + j, k * dd + l)];

    let perms = permutations(4);
    let partial: Vec<C64> = (0..dd)
        .into_par_iter()
        .map(|a0| {
            let mut acc = re(0.0);
            for a1 in 0..dd {
                for a2 in 0..dd {
                    for a3 in 0..dd {
                        let a = [a0, a1, a2, a3];
                        for s in &perms {
                            acc += at(a[0], a[s[0]], a[1], a[s[1]]) * at(a[2], a[s[2]], a[3], a[s[3]]);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let total: C64 = partial.into_iter().fold(re(0.0), |x, y| x + y);
    Ok(total.re / rising_f64(dd, 4))
}

/// `E (tr ρ_A²)²` for a uniformly random state of the span of `basis`, whose
/// vectors live in the split's product space.
pub fn second_moment_purity(basis: &SubspaceBasis, split: &BipartiteSplit) -> Result<f64> {
    let (da, db) = (split.dim_a()?, split.dim_b()?);
    if basis.is_empty() {
        return Err(Error::EmptySubspace("basis has no vectors".into()));
    }
    second_moment_bipartite(&BipartiteBasis::from_subspace(basis, da, db)?)
}

/// `E(tr ρ²)² / (E tr ρ²)² − 1`.
pub fn fluctuation_ratio(basis: &BipartiteBasis) -> Result<f64> {
    let mean = mean_purity_bipartite(basis, 0.0)?.mean_purity;
    if basis.dim() == 1 {
        return Ok(0.0);
    }
    Ok(second_moment_bipartite(basis)? / (mean * mean) - 1.0)
}

/// The swap `W|x⟩|y⟩ = |y⟩|x⟩` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> Result<CMatrix> {
    permutation_operator(&[1, 0], d)
}

/// `W_π` on `(C^dim)^{⊗n}`, moving tensor factor `k` to position `π(k)`.
pub fn permutation_operator(perm: &[usize], dim: usize) -> Result<CMatrix> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &x in perm {
        if x >= n || std::mem::replace(&mut seen[x], true) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
    }
    let total = limits::saturating_pow(dim as u128, n as u32);
    limits::check(total.saturating_mul(total))?;
    let total = total as usize;
    let mut w = CMatrix::zeros(total, total);
    let mut digits = vec![0usize; n];
    let mut moved = vec![0usize; n];
    for x in 0..total {
        let mut r = x;
        for k in (0..n).rev() {
            digits[k] = r % dim;
            r /= dim;
        }
        for k in 0..n {
            moved[perm[k]] = digits[k];
        }
        let y = moved.iter().fold(0usize, |acc, &v| acc * dim + v);
        w[(y, x)] = re(1.0);
    }
    Ok(w)
}

/// `(c1, c2)` with `∫ U⊗U X (U⊗U)† dU = c1·1 + c2·W` on `C^d ⊗ C^d`.
pub fn werner_coeffs(x: &CMatrix, d: usize) -> Result<(C64, C64)> {
    if d <= 1 {
        return Err(Error::InvalidArgument(format!("werner_coeffs needs d ≥ 2, got {d}")));
    }
    let dim = d * d;
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::LengthMismatch { expected: dim, got: x.nrows().max(x.ncols()) });
    }
    let tr = x.trace();
    // tr(WX) = Σ_{ab} X[(b,a),(a,b)]
    let mut tr_w = re(0.0);
    for a in 0..d {
        for b in 0..d {
            tr_w += x[(b * d + a, a * d + b)];
        }
    }
    let df = d as f64;
    let det = df * df * (df * df - 1.0);
    let c1 = (tr * (df * df) - tr_w * df) / det;
    let c2 = (tr_w * (df * df) - tr * df) / det;
    Ok((c1, c2))
}

/// `Σ_{π∈S_n} W_π / D^{↑n}`, the n-th moment `E (|φ⟩⟨φ|)^{⊗n}` of a Haar-random
/// pure state of `C^D`.
pub fn moment_operator(n: u32, dim: usize) -> Result<CMatrix> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidArgument(format!("need n, D ≥ 1 (n={n}, D={dim})")));
    }
    let total = limits::saturating_pow(dim as u128, n);
    limits::check(total.saturating_mul(total))?;
    let mut acc = CMatrix::zeros(total as usize, total as usize);
    for perm in permutations(n as usize) {
        acc += permutation_operator(&perm, dim)?;
    }
    Ok(acc.unscale(rising_f64(dim, n)))
}
