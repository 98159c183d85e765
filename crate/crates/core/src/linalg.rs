//! Dense complex linear algebra.
//!
//! Matrices are square and stored row-major. Superoperators throughout the
//! crate act on row-stacked vectorizations, `vec(X)[i * d + j] = X[i][j]`,
//! which makes `vec(X)` the raw storage of `X` and gives
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const EQ_TOL: f64 = 1e-10;
/// Tolerance for results of iterative procedures.
pub const NUM_TOL: f64 = 1e-8;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim.min(8) {
            let row: Vec<String> = (0..self.dim.min(8))
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Rank-one operator `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "outer product of lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(Self::from_fn(a.len(), |i, j| a[i] * b[j].conj()))
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(k, k)] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!(self.dim, other.dim, "add_scaled dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                for (r, &b) in row.iter_mut().zip(orow) {
                    *r += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "product of {0}x{0} and {1}x{1}",
                self.dim, other.dim
            )));
        }
        Ok(self.matmul(other))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "mul_vec dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `‖U U† − I‖_max`.
    pub fn unitarity_residual(&self) -> f64 {
        self.matmul(&self.adjoint())
            .max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// Kronecker power `self^{⊗k}`; `k = 0` gives the 1x1 identity.
    pub fn kron_pow(&self, k: usize) -> Self {
        let mut out = Self::identity(1);
        for _ in 0..k {
            out = kron(&out, self);
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut data = vec![ZERO; n * n];
    for i in 0..na {
        for j in 0..na {
            let x = a.data[i * na + j];
            if x == ZERO {
                continue;
            }
            for k in 0..nb {
                let row = (i * nb + k) * n + j * nb;
                for l in 0..nb {
                    data[row + l] = x * b.data[k * nb + l];
                }
            }
        }
    }
    ComplexMatrix { dim: n, data }
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Digits of a mixed-radix index, most significant subsystem first.
pub(crate) fn split_index(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

pub(crate) fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Partial trace keeping the subsystems listed in `keep` (0-based, any
/// order; the result orders them as they appear in `dims`).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("subsystem dimension 0".into()));
    }
    let total: usize = dims.iter().product();
    if total != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {total}, matrix has dimension {}",
            m.dim()
        )));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidArgument(format!(
                "subsystem {k} out of range for {} subsystems",
                dims.len()
            )));
        }
        kept[k] = true;
    }
    let keep_dims: Vec<usize> = (0..dims.len())
        .filter(|&k| kept[k])
        .map(|k| dims[k])
        .collect();
    let out_dim: usize = keep_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim);

    let mut row = vec![0; dims.len()];
    let mut col = vec![0; dims.len()];
    let mut kr = Vec::with_capacity(keep_dims.len());
    let mut kc = Vec::with_capacity(keep_dims.len());
    for r in 0..total {
        split_index(r, dims, &mut row);
        for c in 0..total {
            split_index(c, dims, &mut col);
            // traced subsystems must agree
            if (0..dims.len()).any(|k| !kept[k] && row[k] != col[k]) {
                continue;
            }
            kr.clear();
            kc.clear();
            for k in 0..dims.len() {
                if kept[k] {
                    kr.push(row[k]);
                    kc.push(col[k]);
                }
            }
            let (i, j) = (join_index(&kr, &keep_dims), join_index(&kc, &keep_dims));
            out[(i, j)] += m[(r, c)];
        }
    }
    Ok(out)
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let svd = m.to_nalgebra().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Schatten p-norm for p ∈ {1, 2, ∞}.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    if p == 2.0 {
        Ok(m.frobenius_norm())
    } else if p == 1.0 {
        Ok(singular_values(m).iter().sum())
    } else if p.is_infinite() && p > 0.0 {
        Ok(singular_values(m).first().copied().unwrap_or(0.0))
    } else {
        Err(Error::UnsupportedNorm(p))
    }
}

pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascend; column `k`
/// of the returned matrix is the eigenvector for eigenvalue `k`.
pub fn hermitian_eigs(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let deviation = m.hermitian_deviation();
    if deviation > 1e-10 * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = nalgebra::SymmetricEigen::new(m.to_nalgebra());
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigs(m).map(|(v, _)| v)
}

/// Eigenvalues of a dense real symmetric matrix given row-major, ascending.
pub fn real_symmetric_eigenvalues(dim: usize, data: &[f64]) -> Result<Vec<f64>> {
    if data.len() != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "expected {} entries, got {}",
            dim * dim,
            data.len()
        )));
    }
    let m = DMatrix::from_row_slice(dim, dim, data);
    let deviation = (&m - m.transpose()).amax();
    if deviation > 1e-10 * m.amax().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// Orthonormalize a list of vectors by modified Gram–Schmidt with one
/// re-orthogonalization pass, dropping vectors whose residual norm falls
/// below `tol` relative to their original norm.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let norm0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol * norm0 {
            w.iter_mut().for_each(|z| *z /= norm);
            basis.push(w);
        }
    }
    basis
}

/// Reorders the legs of a tensor stored as a flat row-major array. Output
/// leg `k` is input leg `order[k]`.
pub fn permute_legs<T: Copy>(v: &[T], leg_dims: &[usize], order: &[usize]) -> Vec<T> {
    let n = leg_dims.len();
    assert_eq!(order.len(), n, "permute_legs: order length");
    assert_eq!(
        v.len(),
        leg_dims.iter().product::<usize>(),
        "permute_legs: data length"
    );
    let out_dims: Vec<usize> = order.iter().map(|&k| leg_dims[k]).collect();
    // stride in the input of each output leg
    let mut in_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        in_strides[k] = in_strides[k + 1] * leg_dims[k + 1];
    }
    let strides: Vec<usize> = order.iter().map(|&k| in_strides[k]).collect();
    let mut out = Vec::with_capacity(v.len());
    let mut digits = vec![0usize; n];
    let mut src = 0usize;
    for _ in 0..v.len() {
        out.push(v[src]);
        // increment the output multi-index, tracking the source offset
        for k in (0..n).rev() {
            digits[k] += 1;
            src += strides[k];
            if digits[k] < out_dims[k] {
                break;
            }
            src -= strides[k] * out_dims[k];
            digits[k] = 0;
        }
    }
    out
}

/// Applies a leg permutation to both the row and column indices of a matrix.
pub fn permute_matrix_legs(
    m: &ComplexMatrix,
    leg_dims: &[usize],
    order: &[usize],
) -> ComplexMatrix {
    let mut all_dims = leg_dims.to_vec();
    all_dims.extend_from_slice(leg_dims);
    let n = leg_dims.len();
    let mut all_order = order.to_vec();
    all_order.extend(order.iter().map(|&k| k + n));
    let data = permute_legs(m.as_slice(), &all_dims, &all_order);
    ComplexMatrix::from_vec(m.dim(), data).expect("permutation preserves size")
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_haar_unitary, RngStream};
    use rand::Rng;

    fn random_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let a = random_matrix(dim, rng);
        (&a + &a.adjoint()).scale_real(0.5)
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zz = kron(&pauli::z(), &pauli::z());
        assert_eq!(zz, ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let xx = kron(&pauli::x(), &pauli::x());
        let ket00 = vec![ONE, ZERO, ZERO, ZERO];
        let out = xx.mul_vec(&ket00);
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let mut rng = RngStream::new(1, 0);
        for (da, db) in [(2, 3), (3, 2), (4, 4)] {
            let a = random_matrix(da, &mut rng);
            let b = random_matrix(db, &mut rng);
            let lhs = kron(&a, &b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = RngStream::new(2, 0);
        let u = sample_haar_unitary(2, &mut RngStream::new(2, 1));
        let rho = ComplexMatrix::basis_projector(2, 0).conjugate_by(&u);
        let h = random_hermitian(3, &mut rng);
        let sigma = h.matmul(&h).scale_real(1.0 / h.matmul(&h).trace().re);
        let joint = kron(&rho, &sigma);
        let reduced = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(reduced.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let phi = vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let bell = ComplexMatrix::outer(&phi, &phi).unwrap();
        let reduced = partial_trace(&bell, &[2, 2], &[1]).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_summation() {
        let mut rng = RngStream::new(3, 0);
        let m = random_hermitian(4, &mut rng);
        let kept = partial_trace(&m, &[2, 2], &[0]).unwrap();
        // direct summation: (tr_2 M)_{ij} = Σ_k M_{(i,k),(j,k)}
        for i in 0..2 {
            for j in 0..2 {
                let direct = m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)];
                assert!((kept[(i, j)] - direct).norm() < 1e-14);
            }
        }
        assert!((kept.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_composes() {
        let mut rng = RngStream::new(4, 0);
        let m = random_hermitian(12, &mut rng);
        let dims = [2, 3, 2];
        let once = partial_trace(&m, &dims, &[0]).unwrap();
        let step = partial_trace(&m, &dims, &[0, 2]).unwrap();
        let twice = partial_trace(&step, &[2, 2], &[0]).unwrap();
        assert!(once.max_abs_diff(&twice) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 3], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn schatten_norms() {
        assert!((schatten_norm(&ComplexMatrix::identity(5), 1.0).unwrap() - 5.0).abs() < 1e-12);
        let u = sample_haar_unitary(4, &mut RngStream::new(5, 0));
        assert!((schatten_norm(&u, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            schatten_norm(&u, 3.0),
            Err(Error::UnsupportedNorm(_))
        ));

        let mut rng = RngStream::new(5, 1);
        let m = random_matrix(3, &mut rng);
        let s = singular_values(&m);
        let (n1, n2, ninf) = (
            schatten_norm(&m, 1.0).unwrap(),
            schatten_norm(&m, 2.0).unwrap(),
            schatten_norm(&m, f64::INFINITY).unwrap(),
        );
        assert!(ninf <= n2 + 1e-12 && n2 <= n1 + 1e-12);
        // Frobenius agrees with the singular values
        let from_svd = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n2 - from_svd).abs() < 1e-12);
        let sum_sq: f64 = m.as_slice().iter().map(|z| z.norm_sqr()).sum();
        assert!((n2 * n2 - sum_sq).abs() < 1e-12);
    }

    #[test]
    fn eigs_of_simple_matrices() {
        let (vals, _) = hermitian_eigs(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert!(vals
            .iter()
            .zip([1.0, 2.0, 3.0])
            .all(|(a, b)| (a - b).abs() < 1e-14));
        let (vals, _) = hermitian_eigs(&pauli::x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigs_reconstruct_random_hermitian() {
        let mut rng = RngStream::new(6, 0);
        for dim in [2, 5, 9] {
            let m = random_hermitian(dim, &mut rng);
            let (vals, v) = hermitian_eigs(&m).unwrap();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let lambda = ComplexMatrix::diag_real(&vals);
            let rebuilt = v.matmul(&lambda).matmul(&v.adjoint());
            assert!(rebuilt.max_abs_diff(&m) < 1e-9);
            assert!(v.is_unitary(1e-10));
            let scale = operator_norm(&m);
            for k in 0..dim {
                let col: Vec<C64> = (0..dim).map(|i| v[(i, k)]).collect();
                let mv = m.mul_vec(&col);
                let res = mv
                    .iter()
                    .zip(&col)
                    .map(|(a, b)| (a - b * vals[k]).norm())
                    .fold(0.0, f64::max);
                assert!(res <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn eigs_reject_non_hermitian() {
        let m = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            hermitian_eigs(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn real_symmetric_matches_complex_path() {
        let mut rng = RngStream::new(7, 0);
        let n = 6;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                data[i * n + j] = x;
                data[j * n + i] = x;
            }
        }
        let real = real_symmetric_eigenvalues(n, &data).unwrap();
        let complex = hermitian_eigenvalues(&ComplexMatrix::from_real(n, &data).unwrap()).unwrap();
        for (a, b) in real.iter().zip(&complex) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn permute_legs_swaps_kron_factors() {
        let mut rng = RngStream::new(8, 0);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let ab = kron(&a, &b);
        let ba = permute_matrix_legs(&ab, &[2, 3], &[1, 0]);
        assert!(ba.max_abs_diff(&kron(&b, &a)) < 1e-15);
        let v: Vec<usize> = (0..24).collect();
        let p = permute_legs(&v, &[2, 3, 4], &[2, 0, 1]);
        let back = permute_legs(&p, &[4, 2, 3], &[1, 2, 0]);
        assert_eq!(back, v);
        // out[(c, a, b)] = v[(a, b, c)]
        assert_eq!(p[6 + 3 + 2], v[12 + 2 * 4 + 1]);
    }

    #[test]
    fn orthonormalize_drops_dependent_vectors() {
        let a = vec![ONE, ONE, ZERO];
        let b = vec![ONE, ZERO, ZERO];
        let c = vec![C64::new(2.0, 0.0), ONE, ZERO];
        let q = orthonormalize(&[a, b, c], 1e-10);
        assert_eq!(q.len(), 2);
        assert!(inner(&q[0], &q[1]).norm() < 1e-14);
    }
}
