//! SU(2) machinery: spin operators, exact Clebsch-Gordan coefficients,
//! sequentially coupled bases and near-invariant subspaces.
//!
//! Spin states `|j, m⟩` are ordered `m = j, j − 1, ..., −j`. A product state of
//! `n` spins is indexed in row-major order, the first factor most significant.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinat::{HalfInt, Su2Multiplicities};
use crate::numerics::{re, BipartiteBasis, CMatrix, SparseOp, SubspaceBasis};
use crate::{limits, Error, Result};

/// `Jz`, `J+`, `J−` on the spin-`j` irrep.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub j: HalfInt,
    pub jz: SparseOp,
    pub jp: SparseOp,
    pub jm: SparseOp,
}

impl SpinOps {
    pub fn dim(&self) -> usize {
        self.jz.dim()
    }
}

pub fn spin_ops(j: HalfInt) -> Result<SpinOps> {
    if j.twice() < 0 {
        return Err(Error::InvalidArgument(format!("negative spin {j}")));
    }
    let dim = (j.twice() + 1) as usize;
    let jv = j.to_f64();
    let m_of = |i: usize| jv - i as f64;
    let jz = SparseOp::diagonal(&(0..dim).map(m_of).collect::<Vec<_>>());
    // J+|j,m⟩ = √((j − m)(j + m + 1)) |j,m+1⟩
    let jp = SparseOp::new(
        dim,
        (1..dim).map(|i| {
            let m = m_of(i);
            (i - 1, i, re(((jv - m) * (jv + m + 1.0)).sqrt()))
        }),
    )?;
    let jm = jp.adjoint();
    Ok(SpinOps { j, jz, jp, jm })
}

/// An exact Clebsch-Gordan coefficient `sign · √square`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCgc {
    pub negative: bool,
    pub square: BigRational,
}

impl ExactCgc {
    pub fn zero() -> Self {
        ExactCgc { negative: false, square: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.square.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let v = ratio_to_f64(&self.square).sqrt();
        if self.negative {
            -v
        } else {
            v
        }
    }
}

impl fmt::Display for ExactCgc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let sign = if self.negative { "-" } else { "" };
        if self.square.is_one() {
            write!(f, "{sign}1")
        } else {
            write!(f, "{sign}sqrt({})", self.square)
        }
    }
}

/// Nearest `f64` to a non-negative-or-negative big rational.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fallback for magnitudes outside f64's exponent range.
        let (n, d) = (x.numer().bits() as i64, x.denom().bits() as i64);
        if n > d {
            if x.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        } else {
            0.0
        }
    })
}

fn factorial(n: i64) -> BigUint {
    debug_assert!(n >= 0);
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

fn half(x: HalfInt) -> i64 {
    debug_assert!(x.is_integer());
    x.twice() / 2
}

/// Racah's formula, exactly.
///
/// Returns zero when `m ≠ m1 + m2`, when a projection exceeds its spin, when a
/// spin/projection pair has mismatched parity, or when the triangle condition
/// fails.
pub fn racah_cgc_exact(
    j1: HalfInt,
    j2: HalfInt,
    j: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m: HalfInt,
) -> ExactCgc {
    if m != m1 + m2
        || j1.twice() < 0
        || j2.twice() < 0
        || j.twice() < 0
        || m1.abs() > j1
        || m2.abs() > j2
        || m.abs() > j
        || !j1.same_parity(m1)
        || !j2.same_parity(m2)
        || !j.same_parity(m)
        || !(j1 + j2 + j).is_integer()
        || j > j1 + j2
        || j < (j1 - j2).abs()
    {
        return ExactCgc::zero();
    }
    let a = half(j1 + j2 - j);
    let b = half(j1 - j2 + j);
    let c = half(j2 - j1 + j);
    let e = half(j1 + j2 + j) + 1;
    let (p1, q1) = (half(j1 + m1), half(j1 - m1));
    let (p2, q2) = (half(j2 + m2), half(j2 - m2));
    let (p, q) = (half(j + m), half(j - m));

    let mut num = BigUint::from((j.twice() + 1) as u64);
    for x in [a, b, c, p1, q1, p2, q2, p, q] {
        num *= factorial(x);
    }
    let den = factorial(e);

    // k ranges over values keeping every factorial argument non-negative.
    let lo = 0.max(half(j2 - j - m1)).max(half(j1 + m2 - j));
    let hi = a.min(q1).min(p2);
    let mut sum = BigRational::zero();
    for k in lo..=hi {
        let d = factorial(k)
            * factorial(a - k)
            * factorial(q1 - k)
            * factorial(p2 - k)
            * factorial(half(j - j2 + m1) + k)
            * factorial(half(j - j1 - m2) + k);
        let term = BigRational::new(BigInt::one(), BigInt::from(d));
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return ExactCgc::zero();
    }
    let negative = sum.is_negative();
    let square = &sum * &sum * BigRational::new(BigInt::from(num), BigInt::from(den));
    ExactCgc { negative, square }
}

/// `C^{j1,j2,j}_{m1,m2,m}` as a double.
pub fn racah_cgc(j1: HalfInt, j2: HalfInt, j: HalfInt, m1: HalfInt, m2: HalfInt, m: HalfInt) -> f64 {
    racah_cgc_exact(j1, j2, j, m1, m2, m).to_f64()
}

/// Memoized double-precision CGCs.
#[derive(Default)]
pub struct CgcCache {
    table: HashMap<[i64; 5], f64>,
}

impl CgcCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, j1: HalfInt, j2: HalfInt, j: HalfInt, m1: HalfInt, m2: HalfInt) -> f64 {
        let key = [j1.twice(), j2.twice(), j.twice(), m1.twice(), m2.twice()];
        *self.table.entry(key).or_insert_with(|| racah_cgc(j1, j2, j, m1, m2, m1 + m2))
    }
}

/// Label of a coupled-basis vector: total spin `j`, projection `m`, the
/// intermediate spins `path = (j^(2), ..., j^(n−1))` of the left-to-right
/// coupling tree and `gamma`, the index of `path` among paths ending in `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoupledLabel {
    pub j: HalfInt,
    pub m: HalfInt,
    pub path: Vec<HalfInt>,
    pub gamma: usize,
}

/// Complete orthonormal basis of `V_(s)^{⊗n}` adapted to total spin.
///
/// Labels are sorted by `(j, path)` with `m` descending inside each
/// multiplet; `vectors` holds the product-basis coefficients as columns.
#[derive(Clone, Debug)]
pub struct CoupledBasis {
    pub s: HalfInt,
    pub n: u32,
    pub labels: Vec<CoupledLabel>,
    pub vectors: DMatrix<f64>,
}

impl CoupledBasis {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Number of multiplets with total spin `j`.
    pub fn multiplicity(&self, j: HalfInt) -> usize {
        self.labels.iter().filter(|l| l.j == j && l.m == j).count()
    }

    /// Column index of `|j, m, gamma⟩`.
    pub fn index_of(&self, j: HalfInt, m: HalfInt, gamma: usize) -> Option<usize> {
        self.labels.iter().position(|l| l.j == j && l.m == m && l.gamma == gamma)
    }

    pub fn to_subspace(&self) -> SubspaceBasis {
        SubspaceBasis::from_columns(self.vectors.map(re))
    }
}

struct Multiplet {
    j: HalfInt,
    path: Vec<HalfInt>,
    // cols[i] is the vector with m = j − i
    cols: Vec<Vec<f64>>,
}

/// Couples `n` spin-`s` factors left to right:
/// `((s ⊗ s) → j^(2)) ⊗ s → j^(3) ...`.
///
/// Each multiplet is signed so that the first non-zero product-basis
/// coefficient of its `m = j` vector is positive.
pub fn couple_chain(s: HalfInt, n: u32) -> Result<CoupledBasis> {
    if n == 0 || s.twice() < 0 {
        return Err(Error::InvalidArgument(format!("couple_chain needs n ≥ 1, s ≥ 0 (n={n}, s={s})")));
    }
    let local = (s.twice() + 1) as usize;
    let total = limits::saturating_pow(local as u128, n);
    limits::check(total.saturating_mul(total))?;

    let mut cache = CgcCache::new();
    let mut multiplets = vec![Multiplet {
        j: s,
        path: Vec::new(),
        cols: (0..local)
            .map(|i| {
                let mut v = vec![0.0; local];
                v[i] = 1.0;
                v
            })
            .collect(),
    }];
    let mut dim = local;
    for step in 1..n {
        let next_dim = dim * local;
        let mut next = Vec::new();
        for old in &multiplets {
            let jp = old.j;
            let mut path = old.path.clone();
            if step >= 2 {
                path.push(jp);
            }
            for j in HalfInt::up_to((jp - s).abs(), jp + s) {
                let mut cols = Vec::with_capacity((j.twice() + 1) as usize);
                for m in j.down_to(-j) {
                    let mut v = vec![0.0; next_dim];
                    for (ip, mp) in jp.down_to(-jp).enumerate() {
                        let mu = m - mp;
                        if mu.abs() > s {
                            continue;
                        }
                        let c = cache.get(jp, s, j, mp, mu);
                        if c == 0.0 {
                            continue;
                        }
                        let iu = (s - mu).twice() as usize / 2;
                        for (x, &a) in old.cols[ip].iter().enumerate() {
                            if a != 0.0 {
                                v[x * local + iu] += c * a;
                            }
                        }
                    }
                    cols.push(v);
                }
                next.push(Multiplet { j, path: path.clone(), cols });
            }
        }
        multiplets = next;
        dim = next_dim;
    }

    multiplets.sort_by(|a, b| (a.j, &a.path).cmp(&(b.j, &b.path)));
    let mut labels = Vec::with_capacity(dim);
    let mut vectors = DMatrix::<f64>::zeros(dim, dim);
    let mut col = 0;
    let mut gamma = 0;
    let mut prev_j = None;
    for mult in &mut multiplets {
        if prev_j != Some(mult.j) {
            gamma = 0;
            prev_j = Some(mult.j);
        }
        let lead = mult.cols[0].iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for (i, m) in mult.j.down_to(-mult.j).enumerate() {
            for (x, &v) in mult.cols[i].iter().enumerate() {
                vectors[(x, col)] = sign * v;
            }
            labels.push(CoupledLabel { j: mult.j, m, path: mult.path.clone(), gamma });
            col += 1;
        }
        gamma += 1;
    }
    Ok(CoupledBasis { s, n, labels, vectors })
}

/// Label `|j m j1 j2 α β⟩` of a near-invariant basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NearInvLabel {
    pub j: HalfInt,
    pub m: HalfInt,
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub alpha: usize,
    pub beta: usize,
}

/// Parameters shared by both near-invariant constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NearInvParams {
    pub s: HalfInt,
    pub n: u32,
    pub p: u32,
    pub j0: HalfInt,
}

impl NearInvParams {
    pub fn new(s: HalfInt, n: u32, p: u32, j0: HalfInt) -> Result<Self> {
        if s.twice() < 0 || j0.twice() < 0 {
            return Err(Error::InvalidArgument(format!("spins must be non-negative (s={s}, j0={j0})")));
        }
        if p == 0 || p >= n {
            return Err(Error::InvalidArgument(format!("need 1 ≤ p ≤ n − 1, got p={p}, n={n}")));
        }
        Ok(NearInvParams { s, n, p, j0 })
    }

    pub fn q(&self) -> u32 {
        self.n - self.p
    }
}

/// The near-invariant subspace in product coordinates.
#[derive(Clone, Debug)]
pub struct NearInvBasis {
    pub params: NearInvParams,
    pub labels: Vec<NearInvLabel>,
    pub basis: SubspaceBasis,
}

/// The same subspace in local coupled coordinates
/// `A' = ⊕_{j1} V_{j1} ⊗ C^{N(p,j1)}`, `B' = ⊕_{j2} V_{j2} ⊗ C^{N(q,j2)}`,
/// restricted to the blocks that occur. It differs from the product-coordinate
/// basis by a unitary acting on A and one acting on B.
#[derive(Clone, Debug)]
pub struct NearInvLocal {
    pub params: NearInvParams,
    pub labels: Vec<NearInvLabel>,
    pub basis: BipartiteBasis,
}

/// Labels of the near-invariant subspace, in the order `j, j1, j2, α, β, m`
/// (`m` descending).
fn near_inv_labels(
    params: &NearInvParams,
    left: &Su2Multiplicities,
    right: &Su2Multiplicities,
) -> Result<Vec<NearInvLabel>> {
    let mut labels = Vec::new();
    let mut count: u128 = 0;
    for j in (0..=params.j0.twice()).map(HalfInt::from_twice) {
        for (j1, na) in left.nonzero() {
            for (j2, nb) in right.nonzero() {
                if j > j1 + j2 || j < (j1 - j2).abs() || !(j1 + j2 + j).is_integer() {
                    continue;
                }
                let na = na
                    .to_usize()
                    .ok_or(Error::DimensionOverflow { requested: u128::MAX, max: limits::max_dim() })?;
                let nb = nb
                    .to_usize()
                    .ok_or(Error::DimensionOverflow { requested: u128::MAX, max: limits::max_dim() })?;
                count += (na as u128) * (nb as u128) * (j.twice() as u128 + 1);
                limits::check(count)?;
                for alpha in 0..na {
                    for beta in 0..nb {
                        for m in j.down_to(-j) {
                            labels.push(NearInvLabel { j, m, j1, j2, alpha, beta });
                        }
                    }
                }
            }
        }
    }
    Ok(labels)
}

/// `Σ_{j ≤ j0} (2j+1) Σ_{|j1−j2| ≤ j ≤ j1+j2} N(p,j1) N(q,j2)`.
pub fn near_invariant_dim(s: HalfInt, n: u32, p: u32, j0: HalfInt) -> Result<BigUint> {
    let params = NearInvParams::new(s, n, p, j0)?;
    let left = Su2Multiplicities::new(params.p, s);
    let right = Su2Multiplicities::new(params.q(), s);
    let mut total = BigUint::zero();
    for j in (0..=j0.twice()).map(HalfInt::from_twice) {
        for (j1, na) in left.nonzero() {
            for (j2, nb) in right.nonzero() {
                if j <= j1 + j2 && j >= (j1 - j2).abs() && (j1 + j2 + j).is_integer() {
                    total += na * nb * BigUint::from(j.twice() as u64 + 1);
                }
            }
        }
    }
    Ok(total)
}

/// Orthonormal basis `{|j m j1 j2 α β⟩ : j ≤ j0}` of the near-invariant
/// subspace, built from the coupled bases of both sides and one final CGC
/// layer, in product coordinates of `V_(s)^{⊗p} ⊗ V_(s)^{⊗q}`.
pub fn near_invariant_basis(s: HalfInt, n: u32, p: u32, j0: HalfInt) -> Result<NearInvBasis> {
    let params = NearInvParams::new(s, n, p, j0)?;
    let q = params.q();
    let local = (s.twice() + 1) as u128;
    let total = limits::saturating_pow(local, n);
    limits::check(total)?;
    let left = Su2Multiplicities::new(p, s);
    let right = Su2Multiplicities::new(q, s);
    let labels = near_inv_labels(&params, &left, &right)?;
    limits::check(total.saturating_mul(labels.len() as u128))?;

    let a = couple_chain(s, p)?;
    let b = couple_chain(s, q)?;
    let (da, db) = (a.dim(), b.dim());
    let index = |basis: &CoupledBasis| -> HashMap<(i64, i64, usize), usize> {
        basis.labels.iter().enumerate().map(|(i, l)| ((l.j.twice(), l.m.twice(), l.gamma), i)).collect()
    };
    let (ia, ib) = (index(&a), index(&b));
    let mut cache = CgcCache::new();
    let mut m = CMatrix::zeros(da * db, labels.len());
    for (col, l) in labels.iter().enumerate() {
        for m1 in l.j1.down_to(-l.j1) {
            let m2 = l.m - m1;
            if m2.abs() > l.j2 {
                continue;
            }
            let c = cache.get(l.j1, l.j2, l.j, m1, m2);
            if c == 0.0 {
                continue;
            }
            let xa = ia[&(l.j1.twice(), m1.twice(), l.alpha)];
            let xb = ib[&(l.j2.twice(), m2.twice(), l.beta)];
            let va = a.vectors.column(xa);
            let vb = b.vectors.column(xb);
            for (ka, &ua) in va.iter().enumerate() {
                if ua == 0.0 {
                    continue;
                }
                for (kb, &ub) in vb.iter().enumerate() {
                    if ub != 0.0 {
                        m[(ka * db + kb, col)] += re(c * ua * ub);
                    }
                }
            }
        }
    }
    Ok(NearInvBasis { params, labels, basis: SubspaceBasis::from_columns(m) })
}

/// The near-invariant subspace in local coupled coordinates; needs only
/// multiplicities and CGCs, never the product space.
pub fn near_invariant_local(s: HalfInt, n: u32, p: u32, j0: HalfInt) -> Result<NearInvLocal> {
    let params = NearInvParams::new(s, n, p, j0)?;
    let left = Su2Multiplicities::new(p, s);
    let right = Su2Multiplicities::new(params.q(), s);
    let labels = near_inv_labels(&params, &left, &right)?;

    // Offsets of the blocks V_{j} ⊗ C^{N}, coordinates (m index)·N + α.
    let offsets = |side: &Su2Multiplicities, used: Vec<HalfInt>| -> (HashMap<i64, (usize, usize)>, usize) {
        let mut used = used;
        used.sort();
        used.dedup();
        let mut map = HashMap::new();
        let mut off = 0;
        for j in used {
            let mult = side.get(j).to_usize().unwrap_or(0);
            map.insert(j.twice(), (off, mult));
            off += (j.twice() as usize + 1) * mult;
        }
        (map, off)
    };
    let (oa, da) = offsets(&left, labels.iter().map(|l| l.j1).collect());
    let (ob, db) = offsets(&right, labels.iter().map(|l| l.j2).collect());
    let mut cache = CgcCache::new();
    let vectors = labels
        .iter()
        .map(|l| {
            let (offa, na) = oa[&l.j1.twice()];
            let (offb, nb) = ob[&l.j2.twice()];
            l.j1.down_to(-l.j1)
                .filter_map(|m1| {
                    let m2 = l.m - m1;
                    if m2.abs() > l.j2 {
                        return None;
                    }
                    let c = cache.get(l.j1, l.j2, l.j, m1, m2);
                    if c == 0.0 {
                        return None;
                    }
                    let ka = ((l.j1 - m1).twice() / 2) as usize;
                    let kb = ((l.j2 - m2).twice() / 2) as usize;
                    Some((offa + ka * na + l.alpha, offb + kb * nb + l.beta, re(c)))
                })
                .collect()
        })
        .collect();
    let basis = BipartiteBasis::new(da, db, vectors)?;
    Ok(NearInvLocal { params, labels, basis })
}

/// `Σ_i 1^{⊗(i−1)} ⊗ op ⊗ 1^{⊗(n−i)}` for spin operators on `n` factors.
pub fn collective_spin(ops: &SpinOps, n: u32) -> Result<[SparseOp; 3]> {
    let jz = crate::sudrep::collective(&ops.jz, n)?;
    let jp = crate::sudrep::collective(&ops.jp, n)?;
    let jm = crate::sudrep::collective(&ops.jm, n)?;
    Ok([jz, jp, jm])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::mult_su2;
    use crate::numerics::{null_space_orthonormal, C64};

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    fn hv(t: i64) -> HalfInt {
        HalfInt::from_twice(t)
    }

    fn dense(op: &SparseOp) -> CMatrix {
        op.to_dense().unwrap()
    }

    #[test]
    fn spin_half_operators() {
        let ops = spin_ops(HalfInt::HALF).unwrap();
        assert_eq!(dense(&ops.jz), CMatrix::from_row_slice(2, 2, &[re(0.5), re(0.0), re(0.0), re(-0.5)]));
        assert_eq!(ops.jp.entries(), &[(0, 1, re(1.0))]);
    }

    #[test]
    fn spin_algebra() {
        for t in 0..12 {
            let ops = spin_ops(hv(t)).unwrap();
            let jz = dense(&ops.jz);
            let jp = dense(&ops.jp);
            let jm = dense(&ops.jm);
            assert!((&jp * &jm - &jm * &jp - jz.scale(2.0)).norm() < 1e-12);
            assert!((&jz * &jp - &jp * &jz - &jp).norm() < 1e-12);
            assert!((&jz * &jm - &jm * &jz + &jm).norm() < 1e-12);
            assert!((jm - jp.adjoint()).norm() < 1e-15);
        }
    }

    #[test]
    fn cgc_examples() {
        let z = HalfInt::ZERO;
        let hf = HalfInt::HALF;
        assert_eq!(racah_cgc(hf, hf, z, hf, -hf, HalfInt::ONE), 0.0);
        for (a, b) in [(1, 1), (2, 3), (4, 1), (7, 6)] {
            let (j1, j2) = (hv(a), hv(b));
            let c = racah_cgc_exact(j1, j2, j1 + j2, j1, j2, j1 + j2);
            assert_eq!(c, ExactCgc { negative: false, square: BigRational::one() });
        }
        let c = racah_cgc_exact(hf, hf, z, hf, -hf, z);
        assert_eq!(c.square, BigRational::new(1.into(), 2.into()));
        assert!(!c.negative);
        assert_eq!(c.to_string(), "sqrt(1/2)");
        let c = racah_cgc_exact(hf, hf, z, -hf, hf, z);
        assert!(c.negative);
        // Tabulated value: ⟨1 0; 1 0 | 2 0⟩ = √(2/3), ⟨1 1; 1 −1 | 0 0⟩ = 1/√3.
        let one = HalfInt::ONE;
        assert_eq!(racah_cgc_exact(one, one, hv(4), z, z, z).square, BigRational::new(2.into(), 3.into()));
        assert_eq!(racah_cgc_exact(one, one, z, one, -one, z).square, BigRational::new(1.into(), 3.into()));
        assert!(racah_cgc_exact(one, one, one, z, z, z).is_zero());
        assert!(racah_cgc_exact(one, hf, one, z, hf, hf).is_zero());
    }

    #[test]
    fn cgc_orthogonality() {
        for a in 0..=8i64 {
            for b in 0..=8i64 {
                let (j1, j2) = (hv(a), hv(b));
                let js: Vec<HalfInt> = HalfInt::up_to((j1 - j2).abs(), j1 + j2).collect();
                for &j in &js {
                    for &jj in &js {
                        for m in j.down_to(-j) {
                            for mm in jj.down_to(-jj) {
                                let mut acc = 0.0;
                                for m1 in j1.down_to(-j1) {
                                    for m2 in j2.down_to(-j2) {
                                        acc += racah_cgc(j1, j2, j, m1, m2, m)
                                            * racah_cgc(j1, j2, jj, m1, m2, mm);
                                    }
                                }
                                let expect = if j == jj && m == mm { 1.0 } else { 0.0 };
                                assert!((acc - expect).abs() < 1e-12, "{j1} {j2} {j} {jj} {m} {mm}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cgc_matches_lowering_recursion() {
        // J−|j j⟩ expanded in the product basis reproduces the m = j − 1 CGCs.
        let (j1, j2) = (h("3/2"), HalfInt::ONE);
        for j in HalfInt::up_to(h("1/2"), h("5/2")) {
            let m = j - HalfInt::ONE;
            let norm = (2.0 * j.to_f64()).sqrt();
            for m1 in j1.down_to(-j1) {
                let m2 = m - m1;
                if m2.abs() > j2 {
                    continue;
                }
                let lower = |jj: HalfInt, mm: HalfInt| {
                    let (a, b) = (jj.to_f64(), mm.to_f64());
                    ((a + b) * (a - b + 1.0)).sqrt()
                };
                let via = lower(j1, m1 + HalfInt::ONE) * racah_cgc(j1, j2, j, m1 + HalfInt::ONE, m2, j)
                    + lower(j2, m2 + HalfInt::ONE) * racah_cgc(j1, j2, j, m1, m2 + HalfInt::ONE, j);
                assert!((via / norm - racah_cgc(j1, j2, j, m1, m2, m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coupled_basis_examples() {
        let b = couple_chain(h("3/2"), 1).unwrap();
        assert_eq!(b.vectors, DMatrix::identity(4, 4));

        let b = couple_chain(HalfInt::HALF, 2).unwrap();
        let i = b.index_of(HalfInt::ZERO, HalfInt::ZERO, 0).unwrap();
        let v = b.vectors.column(i);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[1] - r).abs() < 1e-15 && (v[2] + r).abs() < 1e-15);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[3], 0.0);

        let b = couple_chain(HalfInt::HALF, 3).unwrap();
        assert_eq!(b.multiplicity(HalfInt::HALF), 2);
        assert_eq!(b.multiplicity(h("3/2")), 1);
    }

    #[test]
    fn coupled_basis_is_an_adapted_orthonormal_basis() {
        for (t, n) in [(1, 4), (2, 3), (3, 3), (1, 6), (4, 2)] {
            let s = hv(t);
            let b = couple_chain(s, n).unwrap();
            let v = &b.vectors;
            let err = (v.transpose() * v - DMatrix::<f64>::identity(b.dim(), b.dim())).abs().max();
            assert!(err < 1e-12);
            let [jz, jp, jm] = collective_spin(&spin_ops(s).unwrap(), n).unwrap();
            let (jz, jp, jm) = (dense(&jz), dense(&jp), dense(&jm));
            let j2 = &jp * &jm + &jz * &jz - &jz;
            let cv = b.to_subspace();
            for (i, l) in b.labels.iter().enumerate() {
                let x = cv.vector(i);
                assert!((&jz * &x - x.scale(l.m.to_f64())).norm() < 1e-10);
                let jj = l.j.to_f64();
                assert!((&j2 * &x - x.scale(jj * (jj + 1.0))).norm() < 1e-9);
            }
            for (j, _) in Su2Multiplicities::new(n, s).nonzero() {
                let expect = mult_su2(n, j, s).to_usize().unwrap();
                assert_eq!(b.multiplicity(j), expect);
            }
            // Phase convention: first non-zero coefficient of each m = j vector is positive.
            for (i, l) in b.labels.iter().enumerate() {
                if l.m == l.j {
                    let lead = v.column(i).iter().copied().find(|x| x.abs() > 1e-12).unwrap();
                    assert!(lead > 0.0);
                }
            }
        }
    }

    #[test]
    fn near_invariant_examples() {
        let b = near_invariant_basis(HalfInt::HALF, 2, 1, HalfInt::ZERO).unwrap();
        assert_eq!(b.basis.dim(), 1);
        let v = b.basis.vector(0);
        assert!((v[1].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v[1] + v[2]).norm() < 1e-15);

        assert!(near_invariant_basis(HalfInt::HALF, 3, 1, HalfInt::ZERO).unwrap().basis.is_empty());
        let b = near_invariant_basis(HalfInt::HALF, 4, 2, HalfInt::ZERO).unwrap();
        assert_eq!(b.basis.dim(), 2);
        assert!(b.basis.orthonormality_error() < 1e-12);
    }

    fn joint_kernel(s: HalfInt, n: u32) -> SubspaceBasis {
        let [jz, jp, _] = collective_spin(&spin_ops(s).unwrap(), n).unwrap();
        let dim = jz.dim();
        null_space_orthonormal(&[jz, jp], dim, 1e-9).unwrap()
    }

    #[test]
    fn invariant_case_matches_joint_kernel() {
        for t in 1..=6i64 {
            let s = hv(t);
            for n in 2..=12u32 {
                if limits::saturating_pow((t + 1) as u128, n) > 4096 {
                    break;
                }
                let kernel = joint_kernel(s, n);
                for p in 1..n {
                    let b = near_invariant_basis(s, n, p, HalfInt::ZERO).unwrap();
                    assert_eq!(b.basis.dim(), kernel.dim(), "s={s} n={n} p={p}");
                    assert!(b.basis.orthonormality_error() < 1e-10);
                    assert!(b.basis.max_angle_sin(&kernel) < 1e-8, "s={s} n={n} p={p}");
                    // Annihilated by all collective generators, including J−.
                    let ops = collective_spin(&spin_ops(s).unwrap(), n).unwrap();
                    for i in 0..b.basis.dim() {
                        let x = b.basis.vector(i);
                        for op in &ops {
                            assert!(op.apply(&x).unwrap().norm() < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn near_invariant_spans_low_total_spin() {
        for (t, n, p, j0) in
            [(1, 4, 2, "1"), (1, 5, 2, "3/2"), (2, 3, 1, "1"), (2, 4, 2, "2"), (3, 3, 1, "1/2")]
        {
            let (s, j0) = (hv(t), h(j0));
            let b = near_invariant_basis(s, n, p, j0).unwrap();
            let expect = near_invariant_dim(s, n, p, j0).unwrap();
            assert_eq!(BigUint::from(b.basis.dim()), expect);
            assert!(b.basis.orthonormality_error() < 1e-10);
            // Compare with the spectral subspace of collective J² below j0(j0+1).
            let [jz, jp, jm] = collective_spin(&spin_ops(s).unwrap(), n).unwrap();
            let (jz, jp, jm) = (dense(&jz), dense(&jp), dense(&jm));
            let j2 = &jp * &jm + &jz * &jz - &jz;
            let eig = j2.clone().symmetric_eigen();
            let cut = j0.to_f64() * (j0.to_f64() + 1.0) + 1e-6;
            let keep: Vec<usize> =
                (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] <= cut).collect();
            let mut low = CMatrix::zeros(j2.nrows(), keep.len());
            for (c, &i) in keep.iter().enumerate() {
                low.set_column(c, &eig.eigenvectors.column(i));
            }
            let low = SubspaceBasis::from_columns(low);
            assert_eq!(low.dim(), b.basis.dim());
            assert!(b.basis.max_angle_sin(&low) < 1e-8);
            let restricted = b.basis.matrix().adjoint() * &j2 * b.basis.matrix();
            for e in restricted.symmetric_eigen().eigenvalues.iter() {
                assert!(*e <= cut);
            }
        }
    }

    #[test]
    fn local_model_is_locally_equivalent() {
        for (t, n, p, j0) in [(1, 4, 2, "0"), (2, 5, 2, "0"), (1, 5, 2, "1/2"), (3, 3, 1, "1")] {
            let (s, j0) = (hv(t), h(j0));
            let prod = near_invariant_basis(s, n, p, j0).unwrap();
            let local = near_invariant_local(s, n, p, j0).unwrap();
            assert_eq!(prod.labels, local.labels);
            assert!(local.basis.orthonormality_error() < 1e-12);
            // Same reduced spectra for every basis vector.
            let da = (t as usize + 1).pow(p);
            let db = (t as usize + 1).pow(n - p);
            for i in 0..prod.basis.dim() {
                let rho = crate::numerics::partial_trace_b(&prod.basis.vector(i), da, db).unwrap();
                let mut coeff = crate::numerics::CVector::zeros(local.basis.dim());
                coeff[i] = C64::new(1.0, 0.0);
                let psi = local.basis.combine(&coeff).unwrap();
                let rho2 = &psi * psi.adjoint();
                let tr1 = (&rho * &rho).trace().re;
                let tr2 = (&rho2 * &rho2).trace().re;
                assert!((tr1 - tr2).abs() < 1e-12);
            }
        }
    }
}
