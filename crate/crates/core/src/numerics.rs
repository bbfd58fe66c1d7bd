//! Complex linear-algebra plumbing: dense matrices/vectors, sparse operators,
//! Kronecker products, partial traces and orthonormal joint kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{limits, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative tolerance for joint-kernel rank decisions.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Square sparse operator in canonical coordinate form: entries sorted by
/// `(row, col)`, no duplicates, no exact zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    /// Duplicates are summed; out-of-range coordinates are rejected.
    pub fn new(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::InvalidArgument(format!("entry ({r}, {c}) outside a {dim}x{dim} operator")));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|e| e.2 != C64::new(0.0, 0.0));
        Ok(SparseOp { dim, entries: out })
    }

    pub fn zero(dim: usize) -> Self {
        SparseOp { dim, entries: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOp { dim, entries: (0..dim).map(|i| (i, i, re(1.0))).collect() }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let entries =
            values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, i, re(v))).collect();
        SparseOp { dim: values.len(), entries }
    }

    pub fn from_dense(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "sparse operators are square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v != re(0.0) {
                    entries.push((r, c, v));
                }
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Ok(SparseOp { dim: m.nrows(), entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(r, c, _)| r == c)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.2.im == 0.0)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        limits::check((self.dim as u128).saturating_mul(self.dim as u128))?;
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        Ok(m)
    }

    pub fn adjoint(&self) -> SparseOp {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseOp { dim: self.dim, entries }
    }

    pub fn scale(&self, k: C64) -> SparseOp {
        if k == re(0.0) {
            return SparseOp::zero(self.dim);
        }
        SparseOp { dim: self.dim, entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * k)).collect() }
    }

    fn check_same(&self, other: &SparseOp) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &SparseOp) -> Result<SparseOp> {
        self.check_same(other)?;
        SparseOp::new(self.dim, self.entries.iter().chain(&other.entries).copied())
    }

    pub fn sub(&self, other: &SparseOp) -> Result<SparseOp> {
        self.add(&other.scale(re(-1.0)))
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &SparseOp) -> Result<SparseOp> {
        self.check_same(other)?;
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for &(r, c, v) in &other.entries {
            rows[r].push((c, v));
        }
        let mut out = Vec::new();
        for &(r, k, a) in &self.entries {
            for &(c, b) in &rows[k] {
                out.push((r, c, a * b));
            }
        }
        SparseOp::new(self.dim, out)
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &SparseOp) -> Result<SparseOp> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: v.len() });
        }
        let mut out = CVector::zeros(self.dim);
        for &(r, c, a) in &self.entries {
            out[r] += a * v[c];
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    /// Sparse Kronecker product.
    pub fn kron(&self, other: &SparseOp) -> Result<SparseOp> {
        let dim = (self.dim as u128) * (other.dim as u128);
        limits::check(dim)?;
        limits::check((self.nnz() as u128) * (other.nnz() as u128))?;
        let db = other.dim;
        let mut entries = Vec::with_capacity(self.nnz() * other.nnz());
        for &(i, j, a) in &self.entries {
            for &(k, l, b) in &other.entries {
                entries.push((i * db + k, j * db + l, a * b));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Ok(SparseOp { dim: dim as usize, entries })
    }
}

/// Orthonormal vectors stored as the columns of an `ambient × dim` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    vectors: CMatrix,
}

impl SubspaceBasis {
    /// Wraps columns without checking orthonormality.
    pub fn from_columns(vectors: CMatrix) -> Self {
        SubspaceBasis { vectors }
    }

    pub fn empty(ambient: usize) -> Self {
        SubspaceBasis { vectors: CMatrix::zeros(ambient, 0) }
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn into_matrix(self) -> CMatrix {
        self.vectors
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// `max |Bᴴ B − I|` entrywise.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let mut err: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((g[(i, j)] - re(target)).norm());
            }
        }
        err
    }

    /// The basis `B·U` for a `dim × dim` unitary `U`.
    pub fn rotated(&self, u: &CMatrix) -> Result<SubspaceBasis> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: u.nrows() });
        }
        Ok(SubspaceBasis { vectors: &self.vectors * u })
    }

    /// `‖v − B Bᴴ v‖`.
    pub fn residual(&self, v: &CVector) -> Result<f64> {
        if v.len() != self.ambient_dim() {
            return Err(Error::LengthMismatch { expected: self.ambient_dim(), got: v.len() });
        }
        let coeffs = self.vectors.adjoint() * v;
        Ok((v - &self.vectors * coeffs).norm())
    }

    /// Sine of the largest principal angle between two spans of equal
    /// dimension (1 if the dimensions differ).
    pub fn max_angle_sin(&self, other: &SubspaceBasis) -> f64 {
        if self.dim() != other.dim() || self.ambient_dim() != other.ambient_dim() {
            return 1.0;
        }
        if self.is_empty() {
            return 0.0;
        }
        let proj = &other.vectors * (other.vectors.adjoint() * &self.vectors);
        let resid = &self.vectors - proj;
        resid.singular_values().iter().copied().fold(0.0, f64::max).min(1.0)
    }
}

/// Orthonormal vectors of `C^{dimA} ⊗ C^{dimB}`, each stored as sparse
/// `(a, b, value)` triplets (full index `a·dimB + b`).
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteBasis {
    dim_a: usize,
    dim_b: usize,
    vectors: Vec<Vec<(usize, usize, C64)>>,
}

impl BipartiteBasis {
    pub fn new(dim_a: usize, dim_b: usize, vectors: Vec<Vec<(usize, usize, C64)>>) -> Result<Self> {
        for v in &vectors {
            if let Some(&(a, b, _)) = v.iter().find(|&&(a, b, _)| a >= dim_a || b >= dim_b) {
                return Err(Error::InvalidArgument(format!("coordinate ({a}, {b}) outside {dim_a}x{dim_b}")));
            }
        }
        Ok(BipartiteBasis { dim_a, dim_b, vectors })
    }

    /// Splits dense columns; entries with modulus at most `1e-14` are dropped.
    pub fn from_subspace(basis: &SubspaceBasis, dim_a: usize, dim_b: usize) -> Result<Self> {
        let expected = dim_a.saturating_mul(dim_b);
        if basis.ambient_dim() != expected {
            return Err(Error::LengthMismatch { expected, got: basis.ambient_dim() });
        }
        let m = basis.matrix();
        let vectors = (0..basis.dim())
            .map(|i| {
                m.column(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.norm() > 1e-14)
                    .map(|(x, &v)| (x / dim_b, x % dim_b, v))
                    .collect()
            })
            .collect();
        Ok(BipartiteBasis { dim_a, dim_b, vectors })
    }

    pub fn to_subspace(&self) -> Result<SubspaceBasis> {
        let ambient = (self.dim_a as u128) * (self.dim_b as u128);
        limits::check(ambient.saturating_mul(self.dim() as u128))?;
        let mut m = CMatrix::zeros(ambient as usize, self.dim());
        for (i, v) in self.vectors.iter().enumerate() {
            for &(a, b, x) in v {
                m[(a * self.dim_b + b, i)] += x;
            }
        }
        Ok(SubspaceBasis::from_columns(m))
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn vectors(&self) -> &[Vec<(usize, usize, C64)>] {
        &self.vectors
    }

    /// `Ψ = Σ_i c_i B_i` as a `dimA × dimB` matrix.
    pub fn combine(&self, coeffs: &CVector) -> Result<CMatrix> {
        if coeffs.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: coeffs.len() });
        }
        let mut psi = CMatrix::zeros(self.dim_a, self.dim_b);
        for (v, &c) in self.vectors.iter().zip(coeffs.iter()) {
            for &(a, b, x) in v {
                psi[(a, b)] += c * x;
            }
        }
        Ok(psi)
    }

    /// `max |⟨b_i|b_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let dense: Vec<std::collections::HashMap<(usize, usize), C64>> = self
            .vectors
            .iter()
            .map(|v| {
                let mut m = std::collections::HashMap::new();
                for &(a, b, x) in v {
                    *m.entry((a, b)).or_insert(re(0.0)) += x;
                }
                m
            })
            .collect();
        let mut err: f64 = 0.0;
        for i in 0..dense.len() {
            for j in i..dense.len() {
                let mut ip = re(0.0);
                for (k, x) in &dense[i] {
                    if let Some(y) = dense[j].get(k) {
                        ip += x.conj() * y;
                    }
                }
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((ip - re(target)).norm());
            }
        }
        err
    }
}

/// Dense Kronecker product `(A⊗B)[i·rB+k, j·cB+l] = A[i,j]·B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = (a.nrows() as u128) * (b.nrows() as u128);
    let cols = (a.ncols() as u128) * (b.ncols() as u128);
    limits::check(rows.saturating_mul(cols))?;
    Ok(a.kronecker(b))
}

fn as_matrix(v: &CVector, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    let expected = dim_a.checked_mul(dim_b).ok_or(Error::DimensionOverflow {
        requested: (dim_a as u128) * (dim_b as u128),
        max: limits::max_dim(),
    })?;
    if v.len() != expected {
        return Err(Error::LengthMismatch { expected, got: v.len() });
    }
    Ok(CMatrix::from_fn(dim_a, dim_b, |a, b| v[a * dim_b + b]))
}

/// `ρ_A = tr_B |v⟩⟨v|` with `v` indexed as `a·dimB + b`.
pub fn partial_trace_b(v: &CVector, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    let m = as_matrix(v, dim_a, dim_b)?;
    Ok(&m * m.adjoint())
}

/// `tr_B |u⟩⟨v|`.
pub fn cross_reduce(u: &CVector, v: &CVector, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    let mu = as_matrix(u, dim_a, dim_b)?;
    let mv = as_matrix(v, dim_a, dim_b)?;
    Ok(&mu * mv.adjoint())
}

/// Orthonormal basis of the joint kernel `∩ ker O` of square sparse operators.
///
/// Diagonal operators restrict the search to the coordinates where every one of
/// them vanishes; the remaining operators are stacked on that support and a
/// singular value counts as zero when it is at most `tol · σ_max`.
pub fn null_space_orthonormal(ops: &[SparseOp], dim: usize, tol: f64) -> Result<SubspaceBasis> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidTolerance(tol));
    }
    limits::check(dim as u128)?;
    for op in ops {
        if op.dim() != dim {
            return Err(Error::LengthMismatch { expected: dim, got: op.dim() });
        }
    }
    let (diag, rest): (Vec<&SparseOp>, Vec<&SparseOp>) = ops.iter().partition(|o| o.is_diagonal());
    let diag_scale = diag.iter().map(|o| o.max_abs()).fold(0.0, f64::max);
    let mut on_support = vec![true; dim];
    for op in &diag {
        for &(i, _, v) in op.entries() {
            if v.norm() > tol * diag_scale {
                on_support[i] = false;
            }
        }
    }
    let support: Vec<usize> = (0..dim).filter(|&i| on_support[i]).collect();
    if support.is_empty() {
        return Ok(SubspaceBasis::empty(dim));
    }
    let mut col_of = vec![usize::MAX; dim];
    for (k, &i) in support.iter().enumerate() {
        col_of[i] = k;
    }

    // Rows touched by the support columns, per operator.
    let mut row_index: Vec<(usize, usize)> = Vec::new();
    for (o, op) in rest.iter().enumerate() {
        for &(r, c, _) in op.entries() {
            if col_of[c] != usize::MAX {
                row_index.push((o, r));
            }
        }
    }
    row_index.sort_unstable();
    row_index.dedup();
    let nrows = row_index.len();
    let ncols = support.len();
    limits::check((nrows.max(ncols) as u128) * (ncols as u128))?;

    let mut stacked: Vec<(usize, usize, C64)> = Vec::new();
    for (o, op) in rest.iter().enumerate() {
        for &(r, c, v) in op.entries() {
            let k = col_of[c];
            if k != usize::MAX {
                let row = row_index.binary_search(&(o, r)).expect("row recorded");
                stacked.push((row, k, v));
            }
        }
    }

    let real = rest.iter().all(|o| o.is_real());
    let kernel = if nrows == 0 {
        CMatrix::identity(ncols, ncols)
    } else if real {
        let mut m = DMatrix::<f64>::zeros(nrows.max(ncols), ncols);
        for &(r, k, v) in &stacked {
            m[(r, k)] += v.re;
        }
        real_kernel(m, tol).map(re)
    } else {
        let mut m = CMatrix::zeros(nrows.max(ncols), ncols);
        for &(r, k, v) in &stacked {
            m[(r, k)] += v;
        }
        complex_kernel(m, tol)
    };

    let mut full = CMatrix::zeros(dim, kernel.ncols());
    for (k, &i) in support.iter().enumerate() {
        for j in 0..kernel.ncols() {
            full[(i, j)] = kernel[(k, j)];
        }
    }
    Ok(SubspaceBasis::from_columns(full))
}

// `m` has at least as many rows as columns, so `V` is square.
fn real_kernel(m: DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let m = compress_rows_real(m);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= tol * smax).collect();
    let mut out = DMatrix::<f64>::zeros(vt.ncols(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vt.row(i).transpose());
    }
    out
}

fn complex_kernel(m: CMatrix, tol: f64) -> CMatrix {
    let m = if m.nrows() > m.ncols() { m.qr().r() } else { m };
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= tol * smax).collect();
    let mut out = CMatrix::zeros(vt.ncols(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vt.row(i).adjoint());
    }
    out
}

fn compress_rows_real(m: DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() > m.ncols() {
        m.qr().r()
    } else {
        m
    }
}

/// Vector of i.i.d. standard complex Gaussians (real and imaginary parts
/// independent `N(0, 1)`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        c(a, b)
    })
}

/// `v / ‖v‖`, or an error for the zero vector.
pub fn normalized(v: CVector) -> Result<CVector> {
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
    }
    Ok(v.unscale(n))
}

/// `tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = re(0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}
