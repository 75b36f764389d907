use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense square matrices larger than this are never materialized.
pub const MAX_DENSE_DIM: usize = 2048;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(12) {
                let z = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn check_dense(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        Err(Error::DimensionTooLarge { dim, limit: MAX_DENSE_DIM })
    } else {
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, z) in d.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Matrix with the given columns.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    /// Rank-one `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    fn require_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: other.rows });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.cols });
        }
        Ok(())
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Product skipping exact zeros, so sparse and monomial factors are cheap.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let (n, m) = (self.rows, other.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &mut out[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * m..(k + 1) * m];
                for (o, b) in row.iter_mut().zip(brow) {
                    if *b != ZERO {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(ComplexMatrix { rows: n, cols: m, data: out })
    }

    /// `self * other * self^*`.
    pub fn conjugate(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_mul(&self.adjoint())
    }

    /// Kronecker product; the left factor carries the outer index.
    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = vec![ZERO; r * c];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let base = (i * other.rows + k) * c + j * other.cols;
                    for l in 0..other.cols {
                        out[base + l] = a * other[(k, l)];
                    }
                }
            }
        }
        ComplexMatrix { rows: r, cols: c, data: out }
    }

    /// Block diagonal sum.
    pub fn direct_sum(blocks: &[&ComplexMatrix]) -> Self {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn trace(&self) -> Result<C64> {
        let n = self.require_square()?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    /// Trace normalized so that `tau(1) = 1`.
    pub fn normalized_trace(&self) -> Result<C64> {
        let n = self.require_square()?;
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        Ok(self.trace()? / n as f64)
    }

    /// `tau(a^* a)^{1/2}`.
    pub fn two_norm(&self) -> Result<f64> {
        let n = self.require_square()?;
        Ok((self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    /// Index sets of the connected components of the nonzero pattern.
    ///
    /// Conjugating by the induced permutation makes the matrix block diagonal.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.rows;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..n {
            for j in 0..self.cols.min(n) {
                if i != j && self.data[i * self.cols + j] != ZERO {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// Operator norm, computed blockwise over the nonzero pattern.
    pub fn op_norm(&self) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        if !self.is_square() {
            check_dense(self.rows.max(self.cols))?;
            return Ok(largest_singular_value(&self.to_nalgebra()));
        }
        let mut best: f64 = 0.0;
        for comp in self.components() {
            if comp.len() == 1 {
                best = best.max(self[(comp[0], comp[0])].norm());
                continue;
            }
            let sub = self.submatrix(&comp, &comp);
            check_dense(sub.rows)?;
            let scale = sub.max_abs();
            let v = if sub.hermitian_defect() <= 1e-14 * scale {
                let h = sub.to_nalgebra();
                let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
                h.symmetric_eigenvalues().iter().map(|x| x.abs()).fold(0.0, f64::max)
            } else {
                largest_singular_value(&sub.to_nalgebra())
            };
            best = best.max(v);
        }
        Ok(best)
    }

    /// Whether the operator norm of `self` is at most `tol`.
    pub fn op_norm_at_most(&self, tol: f64) -> Result<bool> {
        if self.frobenius_norm() <= tol {
            return Ok(true);
        }
        Ok(self.op_norm()? <= tol)
    }

    /// Operator-norm closeness with an explicit tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match self.try_sub(other) {
            Ok(d) => d.op_norm_at_most(tol).unwrap_or(false),
            Err(_) => false,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == ZERO))
    }

    /// Eigen-decomposition of the self-adjoint part, blockwise over the nonzero pattern.
    ///
    /// Returns eigenvalues with unit eigenvectors (as columns), grouped by
    /// component in order of smallest index, ascending within each component.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
        let n = self.require_square()?;
        let mut values = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n);
        for comp in self.components() {
            if comp.len() == 1 {
                let mut v = vec![ZERO; n];
                v[comp[0]] = ONE;
                values.push(self[(comp[0], comp[0])].re);
                vectors.push(v);
                continue;
            }
            let sub = self.submatrix(&comp, &comp);
            check_dense(sub.rows)?;
            let h = sub.to_nalgebra();
            let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
            let eig = h.symmetric_eigen();
            let mut order: Vec<usize> = (0..comp.len()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            for k in order {
                let mut v = vec![ZERO; n];
                for (r, &i) in comp.iter().enumerate() {
                    v[i] = eig.eigenvectors[(r, k)];
                }
                normalize_phase(&mut v);
                values.push(eig.eigenvalues[k]);
                vectors.push(v);
            }
        }
        Ok((values, vectors))
    }
}

/// Fix the global phase so the first significant entry is real positive.
pub(crate) fn normalize_phase(v: &mut [C64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let u = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= u;
        }
    }
}

fn largest_singular_value(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("shape mismatch in matrix addition")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("shape mismatch in matrix subtraction")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("shape mismatch in matrix product")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Permutation matrix `P` with `P (x_0 ⊗ ... ⊗ x_{n-1}) P^* = x_{order[0]} ⊗ ... ⊗ x_{order[n-1]}`.
pub fn tensor_reorder(dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
        return Err(Error::InvalidArgument("order is not a permutation of the tensor slots".into()));
    }
    let total: usize = dims.iter().product();
    check_dense(total)?;
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let mut p = ComplexMatrix::zeros(total, total);
    let mut digits = vec![0usize; n];
    for idx in 0..total {
        let mut rem = idx;
        for s in (0..n).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let mut target = 0;
        for (s, &o) in order.iter().enumerate() {
            target = target * new_dims[s] + digits[o];
        }
        p[(target, idx)] = ONE;
    }
    Ok(p)
}
