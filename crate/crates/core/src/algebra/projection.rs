use std::sync::OnceLock;

use num_rational::Rational64;

use super::cyclotomic::Cyclotomic;
use super::exact::ExactMatrix;
use super::matrix::{ComplexMatrix, C64, ONE};
use crate::error::{Error, Result};

pub const PROJECTION_TOL: f64 = 1e-10;

/// Orthogonal projection, optionally carrying an exact form.
///
/// When the exact form is present the dense matrix is built on first use.
#[derive(Clone, Debug)]
pub struct Projection {
    matrix: OnceLock<ComplexMatrix>,
    exact: Option<ExactMatrix>,
}

impl PartialEq for Projection {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.matrix() == other.matrix(),
        }
    }
}

fn dense(matrix: ComplexMatrix) -> OnceLock<ComplexMatrix> {
    let cell = OnceLock::new();
    let _ = cell.set(matrix);
    cell
}

impl Projection {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.require_square()?;
        let sa = &matrix - &matrix.adjoint();
        if !sa.op_norm_at_most(PROJECTION_TOL)? {
            return Err(Error::NotSelfAdjoint(sa.op_norm()?));
        }
        let idem = &(&matrix * &matrix) - &matrix;
        if !idem.op_norm_at_most(PROJECTION_TOL)? {
            return Err(Error::NotProjection(idem.op_norm()?));
        }
        Ok(Projection { matrix: dense(matrix), exact: None })
    }

    fn lazy(exact: ExactMatrix) -> Self {
        Projection { matrix: OnceLock::new(), exact: Some(exact) }
    }

    pub fn from_exact(exact: ExactMatrix) -> Result<Self> {
        let sq = exact.mul(&exact)?;
        if sq != exact || exact.adjoint() != exact {
            return Self::new(exact.to_complex());
        }
        Ok(Self::lazy(exact))
    }

    /// Exact form trusted to be a projection.
    pub(crate) fn from_exact_unchecked(exact: ExactMatrix) -> Self {
        Self::lazy(exact)
    }

    pub(crate) fn from_dense_unchecked(matrix: ComplexMatrix) -> Self {
        Projection { matrix: dense(matrix), exact: None }
    }

    pub fn zero(n: usize) -> Self {
        Self::lazy(ExactMatrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self::lazy(ExactMatrix::identity(n))
    }

    /// Projection onto the span of the listed standard basis vectors.
    pub fn coordinate(n: usize, idx: &[usize]) -> Self {
        let mut d = vec![Cyclotomic::zero(); n];
        for &i in idx {
            d[i] = Cyclotomic::one();
        }
        Self::lazy(ExactMatrix::from_diagonal(d))
    }

    /// Projection onto the span of orthonormal vectors.
    pub fn from_orthonormal(n: usize, vectors: &[Vec<C64>]) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for v in vectors {
            for i in 0..n {
                if v[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Projection { matrix: dense(m), exact: None }
    }

    /// Dense form; built from the exact form on first use.
    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.get_or_init(|| self.exact.as_ref().expect("dense or exact form").to_complex())
    }

    pub fn exact(&self) -> Option<&ExactMatrix> {
        self.exact.as_ref()
    }

    pub fn dim(&self) -> usize {
        match &self.exact {
            Some(e) => e.dim(),
            None => self.matrix().dim(),
        }
    }

    /// Normalized trace, exact when the exact form is present.
    pub fn trace_ratio(&self) -> Option<Rational64> {
        let t = self.exact.as_ref()?.normalized_trace();
        let z = t.to_complex();
        let n = self.dim() as i64;
        let r = Rational64::new((z.re * n as f64).round() as i64, n);
        (Cyclotomic::rational(r) == t).then_some(r)
    }

    pub fn normalized_trace(&self) -> f64 {
        match &self.exact {
            Some(e) => e.normalized_trace().to_complex().re,
            None => self.matrix().normalized_trace().map(|z| z.re).unwrap_or(0.0),
        }
    }

    pub fn rank(&self) -> usize {
        (self.normalized_trace() * self.dim() as f64).round() as usize
    }

    pub fn kron(&self, other: &Projection) -> Projection {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Self::lazy(a.kron(b)),
            _ => Projection { matrix: dense(self.matrix().kron(other.matrix())), exact: None },
        }
    }

    /// Sum of pairwise orthogonal projections; orthogonality is the caller's contract.
    pub fn sum(n: usize, parts: &[&Projection]) -> Projection {
        if parts.iter().all(|p| p.exact.is_some()) {
            let mut acc = ExactMatrix::zeros(n);
            for p in parts {
                acc = acc.add(p.exact.as_ref().unwrap()).expect("same dimension");
            }
            return Self::lazy(acc);
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for p in parts {
            m = &m + p.matrix();
        }
        Projection { matrix: dense(m), exact: None }
    }

    /// `diag(self ⊗ 1_copies, 0_remainder)`.
    pub fn corner(&self, copies: usize, remainder: usize) -> Projection {
        let big = self.kron(&Projection::identity(copies));
        match &big.exact {
            Some(e) => Self::lazy(ExactMatrix::direct_sum(&[e, &ExactMatrix::zeros(remainder)])),
            None => Projection {
                matrix: dense(ComplexMatrix::direct_sum(&[big.matrix(), &ComplexMatrix::zeros(remainder, remainder)])),
                exact: None,
            },
        }
    }

    /// `u p u^*`, exact when both are.
    pub fn conjugated(&self, u: &super::UnitaryMatrix) -> Result<Projection> {
        match (u.exact(), &self.exact) {
            (Some(a), Some(b)) => Ok(Self::lazy(a.mul(b)?.mul(&a.adjoint())?)),
            _ => Ok(Projection { matrix: dense(u.conjugate(self.matrix())?), exact: None }),
        }
    }

    /// Orthonormal basis of the range.
    pub fn range_basis(&self) -> Result<Vec<Vec<C64>>> {
        let (vals, vecs) = self.matrix().hermitian_eigen()?;
        Ok(vals.into_iter().zip(vecs).filter(|(v, _)| *v > 0.5).map(|(_, v)| v).collect())
    }
}

/// Projection within `2 delta` of a self-adjoint `a` with `‖a² - a‖ < delta`.
pub fn nearest_projection(a: &ComplexMatrix, delta: f64) -> Result<Projection> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    let n = a.require_square()?;
    let sa = a - &a.adjoint();
    if !sa.op_norm_at_most(PROJECTION_TOL)? {
        return Err(Error::NotSelfAdjoint(sa.op_norm()?));
    }
    let (vals, vecs) = a.hermitian_eigen()?;
    let mut keep = Vec::new();
    for (v, x) in vals.into_iter().zip(vecs) {
        if (v * v - v).abs() >= delta {
            return Err(Error::SpectralGap(v));
        }
        if v > 0.5 {
            keep.push(x);
        }
    }
    let basis_index = |v: &Vec<C64>| {
        let mut nz = v.iter().enumerate().filter(|(_, z)| z.norm() > 0.0);
        match (nz.next(), nz.next()) {
            (Some((i, z)), None) if *z == ONE => Some(i),
            _ => None,
        }
    };
    if let Some(idx) = keep.iter().map(basis_index).collect::<Option<Vec<usize>>>() {
        return Ok(Projection::coordinate(n, &idx));
    }
    Ok(Projection::from_orthonormal(n, &keep))
}

/// Pairwise orthogonal projections close to nearly orthogonal inputs.
///
/// The measured overlaps `‖q_i q_j‖` must not exceed `delta`, and `delta`
/// must be at most `1/(8n)`. The result is the symmetric (Löwdin)
/// orthonormalization of the stacked range bases.
pub fn orthogonalize_projections(q: &[Projection], delta: f64) -> Result<Vec<Projection>> {
    let count = q.len();
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = q[0].dim();
    for p in q {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
    }
    let bound = 1.0 / (8.0 * count as f64);
    if delta > bound {
        return Err(Error::OverlapTooLarge { found: delta, bound });
    }
    let mut worst: f64 = 0.0;
    for i in 0..count {
        for j in i + 1..count {
            // ‖pq‖² = ‖pqp‖
            let pqp = &(q[i].matrix() * q[j].matrix()) * q[i].matrix();
            worst = worst.max(pqp.op_norm()?.sqrt());
        }
    }
    if worst > delta {
        return Err(Error::OverlapTooLarge { found: worst, bound: delta });
    }
    if worst == 0.0 {
        return Ok(q.to_vec());
    }
    let mut columns: Vec<Vec<C64>> = Vec::new();
    let mut owner = Vec::new();
    for (i, p) in q.iter().enumerate() {
        for v in p.range_basis()? {
            columns.push(v);
            owner.push(i);
        }
    }
    let b = ComplexMatrix::from_columns(n, &columns);
    let gram = &b.adjoint() * &b;
    let (vals, vecs) = gram.hermitian_eigen()?;
    let r = columns.len();
    // G^{-1/2}
    let mut inv_sqrt = ComplexMatrix::zeros(r, r);
    for (lam, v) in vals.iter().zip(&vecs) {
        if *lam <= 0.0 {
            return Err(Error::OverlapTooLarge { found: worst, bound: delta });
        }
        let s = 1.0 / lam.sqrt();
        for i in 0..r {
            for j in 0..r {
                inv_sqrt[(i, j)] += v[i] * v[j].conj() * s;
            }
        }
    }
    let ortho = &b * &inv_sqrt;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let cols: Vec<Vec<C64>> = (0..r).filter(|&c| owner[c] == i).map(|c| ortho.column(c)).collect();
        out.push(Projection::from_orthonormal(n, &cols));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_projection_is_fixed() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let p = nearest_projection(&a, 0.2).unwrap();
        assert_eq!(p.matrix(), &a);
        assert!(p.exact().is_some());
    }

    #[test]
    fn perturbed_projection_snaps() {
        let a = ComplexMatrix::from_real_rows(&[&[0.98, 0.01], &[0.01, 0.02]]);
        let p = nearest_projection(&a, 0.05).unwrap();
        assert!(p.matrix().approx_eq(&a, 0.1));
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn half_is_in_the_gap() {
        let a = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(nearest_projection(&a, 0.2), Err(Error::SpectralGap(_))));
        assert!(matches!(nearest_projection(&a, 0.3), Err(Error::DeltaOutOfRange(_))));
    }

    #[test]
    fn orthogonal_input_is_unchanged() {
        let p = Projection::coordinate(3, &[0]);
        let q = Projection::coordinate(3, &[1, 2]);
        let out = orthogonalize_projections(&[p.clone(), q.clone()], 0.01).unwrap();
        assert_eq!(out, vec![p, q]);
    }

    #[test]
    fn tilted_pair_is_separated() {
        let t: f64 = 0.01;
        let v1 = vec![ONE, C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let v2 = vec![C64::new(t.sin(), 0.0), C64::new(t.cos(), 0.0), C64::new(0.0, 0.0)];
        let q = [Projection::from_orthonormal(3, &[v1]), Projection::from_orthonormal(3, &[v2])];
        let out = orthogonalize_projections(&q, 0.0101).unwrap();
        let prod = out[0].matrix() * out[1].matrix();
        assert!(prod.op_norm().unwrap() < 1e-12);
        for (a, b) in out.iter().zip(&q) {
            assert!(a.matrix().approx_eq(b.matrix(), 0.05));
        }
    }
}
