use std::sync::OnceLock;

use super::exact::ExactMatrix;
use super::matrix::{check_dense, normalize_phase, ComplexMatrix, C64, ONE, ZERO};
use super::phase::Phase;
use super::projection::Projection;
use crate::error::{Error, Result};

/// Tolerance used when validating unitarity of float matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// Largest dimension for exact (sparse) unitaries and projections.
pub const MAX_EXACT_DIM: usize = 1 << 20;

/// Unitary matrix, optionally carrying an exact cyclotomic form.
///
/// When the exact form is present the dense matrix is built on first use.
#[derive(Clone, Debug)]
pub struct UnitaryMatrix {
    matrix: OnceLock<ComplexMatrix>,
    exact: Option<ExactMatrix>,
}

impl PartialEq for UnitaryMatrix {
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

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.require_square()?;
        let d = &(&matrix * &matrix.adjoint()) - &ComplexMatrix::identity(n);
        if !d.op_norm_at_most(UNITARY_TOL)? {
            return Err(Error::NotUnitary(d.op_norm()?));
        }
        Ok(UnitaryMatrix { matrix: dense(matrix), exact: None })
    }

    fn lazy(exact: ExactMatrix) -> Self {
        UnitaryMatrix { matrix: OnceLock::new(), exact: Some(exact) }
    }

    pub fn from_exact(exact: ExactMatrix) -> Result<Self> {
        let prod = exact.mul(&exact.adjoint())?;
        if prod != ExactMatrix::identity(exact.dim()) {
            let m = exact.to_complex();
            let d = &(&m * &m.adjoint()) - &ComplexMatrix::identity(exact.dim());
            return Err(Error::NotUnitary(d.op_norm()?));
        }
        Ok(Self::lazy(exact))
    }

    pub fn identity(n: usize) -> Self {
        Self::lazy(ExactMatrix::identity(n))
    }

    pub fn diagonal(phases: &[Phase]) -> Self {
        match ExactMatrix::from_phases(phases) {
            Some(e) => Self::lazy(e),
            None => {
                let matrix = ComplexMatrix::from_diagonal(&phases.iter().map(|p| p.to_complex()).collect::<Vec<_>>());
                UnitaryMatrix { matrix: dense(matrix), exact: None }
            }
        }
    }

    /// Permutation matrix sending `e_j` to `e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        Self::from_exact(ExactMatrix::permutation(perm))
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

    pub fn adjoint(&self) -> Self {
        match &self.exact {
            Some(e) => Self::lazy(e.adjoint()),
            None => UnitaryMatrix { matrix: dense(self.matrix().adjoint()), exact: None },
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Ok(Self::lazy(a.mul(b)?)),
            _ => Ok(UnitaryMatrix { matrix: dense(self.matrix().try_mul(other.matrix())?), exact: None }),
        }
    }

    /// Kronecker product; exact operands may exceed the dense size limit up to [`MAX_EXACT_DIM`].
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let d = self.dim() * other.dim();
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                if d > MAX_EXACT_DIM {
                    return Err(Error::DimensionTooLarge { dim: d, limit: MAX_EXACT_DIM });
                }
                Ok(Self::lazy(a.kron(b)))
            }
            _ => {
                check_dense(d)?;
                Ok(UnitaryMatrix { matrix: dense(self.matrix().kron(other.matrix())), exact: None })
            }
        }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.adjoint() } else { self.clone() };
        let mut out = Self::identity(self.dim());
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&sq)?;
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(out)
    }

    /// Block diagonal `diag(self ⊗ 1_copies, 1_remainder)`.
    pub fn corner(&self, copies: usize, remainder: usize) -> Result<Self> {
        let big = self.kron(&Self::identity(copies))?;
        Ok(match &big.exact {
            Some(e) => Self::lazy(ExactMatrix::direct_sum(&[e, &ExactMatrix::identity(remainder)])),
            None => UnitaryMatrix {
                matrix: dense(ComplexMatrix::direct_sum(&[big.matrix(), &ComplexMatrix::identity(remainder)])),
                exact: None,
            },
        })
    }

    /// Compression to the coordinate subspace `idx`; valid when that subspace is invariant.
    pub fn compress(&self, idx: &[usize]) -> Result<Self> {
        match &self.exact {
            Some(e) => Self::from_exact(e.compress(idx)),
            None => Self::new(self.matrix().submatrix(idx, idx)),
        }
    }

    /// `self * x * self^*`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.matrix().conjugate(x)
    }

    /// Diagonal entries as phases when the matrix is diagonal.
    pub fn diagonal_phases(&self) -> Option<Vec<Phase>> {
        if let Some(e) = &self.exact {
            return e.diagonal_phases();
        }
        let m = self.matrix();
        m.is_diagonal().then(|| m.diagonal().into_iter().map(Phase::of_complex).collect())
    }

    pub fn normalized_trace(&self) -> C64 {
        match &self.exact {
            Some(e) => e.normalized_trace().to_complex(),
            None => self.matrix().normalized_trace().expect("square"),
        }
    }
}

/// One eigenvalue cluster of a unitary.
#[derive(Clone, Debug)]
pub struct EigenCluster {
    pub phase: Phase,
    pub vectors: Vec<Vec<C64>>,
    /// Exact basis indices when the eigenvectors are standard basis vectors.
    pub basis: Option<Vec<usize>>,
}

impl EigenCluster {
    pub fn projection(&self, n: usize) -> Projection {
        match &self.basis {
            Some(idx) => Projection::coordinate(n, idx),
            None => {
                let mut m = ComplexMatrix::zeros(n, n);
                for v in &self.vectors {
                    m = &m + &ComplexMatrix::outer(v);
                }
                Projection::from_dense_unchecked(m)
            }
        }
    }
}

/// Spectral decomposition of a unitary into eigenvalue clusters sorted by phase.
///
/// Eigenvalues closer than `cluster_tol` (in turns) are merged; clusters whose
/// gap is below `3 * cluster_tol` are reported as ambiguous.
pub fn eig_unitary(u: &UnitaryMatrix, cluster_tol: f64) -> Result<Vec<EigenCluster>> {
    let n = u.dim();
    let mut pairs: Vec<(Phase, Vec<C64>, Option<usize>)> = Vec::with_capacity(n);
    if let Some(phases) = u.diagonal_phases() {
        for (i, ph) in phases.into_iter().enumerate() {
            let mut v = vec![ZERO; n];
            v[i] = ONE;
            pairs.push((ph, v, Some(i)));
        }
    } else {
        check_dense(n)?;
        for comp in u.matrix().components() {
            let sub = u.matrix().submatrix(&comp, &comp);
            for (ph, local) in eig_dense_unitary(&sub)? {
                let mut v = vec![ZERO; n];
                for (r, &i) in comp.iter().enumerate() {
                    v[i] = local[r];
                }
                pairs.push((ph, v, None));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.turns().total_cmp(&b.0.turns()));
    // split the circle at the widest gap so clusters never straddle the cut
    let m = pairs.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let gap = |i: usize| {
        let a = pairs[i].0.turns();
        let b = pairs[(i + 1) % m].0.turns();
        if i + 1 == m {
            b + 1.0 - a
        } else {
            b - a
        }
    };
    let same = |i: usize| {
        let (a, b) = (&pairs[i].0, &pairs[(i + 1) % m].0);
        match (a, b) {
            (Phase::Exact(x), Phase::Exact(y)) => x == y,
            _ => gap(i) <= cluster_tol,
        }
    };
    let start = match (0..m).find(|&i| !same(i)) {
        Some(i) => (i + 1) % m,
        None => 0,
    };
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for s in 0..m {
        let i = (start + s) % m;
        if s == 0 || !same((i + m - 1) % m) {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(i);
    }
    if clusters.len() > 1 {
        for c in 0..clusters.len() {
            let last = *clusters[c].last().unwrap();
            let all_exact = pairs[last].0.is_exact() && pairs[(last + 1) % m].0.is_exact();
            if !all_exact && gap(last) < 3.0 * cluster_tol {
                let next = clusters[(c + 1) % clusters.len()][0];
                return Err(Error::AmbiguousClusters(pairs[last].0.turns(), pairs[next].0.turns()));
            }
        }
    }
    let mut out: Vec<EigenCluster> = clusters
        .into_iter()
        .map(|idx| {
            let phase = cluster_phase(idx.iter().map(|&i| &pairs[i].0));
            let basis: Option<Vec<usize>> = idx.iter().map(|&i| pairs[i].2).collect();
            let mut basis = basis;
            if let Some(b) = basis.as_mut() {
                b.sort_unstable();
            }
            let vectors = match &basis {
                Some(b) => b
                    .iter()
                    .map(|&i| {
                        let mut v = vec![ZERO; n];
                        v[i] = ONE;
                        v
                    })
                    .collect(),
                None => idx.iter().map(|&i| pairs[i].1.clone()).collect(),
            };
            EigenCluster { phase, vectors, basis }
        })
        .collect();
    out.sort_by(|a, b| a.phase.turns().total_cmp(&b.phase.turns()));
    Ok(out)
}

fn cluster_phase<'a>(phases: impl Iterator<Item = &'a Phase>) -> Phase {
    let ps: Vec<&Phase> = phases.collect();
    if ps.iter().all(|p| p.is_exact()) {
        return *ps[0];
    }
    let s: C64 = ps.iter().map(|p| p.to_complex()).sum();
    Phase::of_complex(s)
}

/// Eigenpairs of a small dense unitary via its commuting Hermitian parts.
fn eig_dense_unitary(u: &ComplexMatrix) -> Result<Vec<(Phase, Vec<C64>)>> {
    let n = u.dim();
    check_dense(n)?;
    if n == 1 {
        return Ok(vec![(Phase::of_complex(u[(0, 0)]), vec![ONE])]);
    }
    let ua = u.adjoint();
    let re = (u + &ua).scale_real(0.5);
    let im = (u - &ua).scale(C64::new(0.0, -0.5));
    let (vals, vecs) = re.hermitian_eigen()?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && vals[order[j]] - vals[order[j - 1]] <= 1e-9 {
            j += 1;
        }
        let basis: Vec<&Vec<C64>> = order[i..j].iter().map(|&k| &vecs[k]).collect();
        if basis.len() == 1 {
            out.push(refine(u, basis[0].clone()));
        } else {
            // diagonalize the imaginary part inside the cluster
            let q = ComplexMatrix::from_columns(n, &basis.iter().map(|v| (*v).clone()).collect::<Vec<_>>());
            let small = &(&q.adjoint() * &im) * &q;
            let (_, ys) = small.hermitian_eigen()?;
            for y in ys {
                let v: Vec<C64> = (0..n).map(|r| (0..basis.len()).map(|c| q[(r, c)] * y[c]).sum()).collect();
                out.push(refine(u, v));
            }
        }
        i = j;
    }
    Ok(out)
}

fn refine(u: &ComplexMatrix, mut v: Vec<C64>) -> (Phase, Vec<C64>) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    normalize_phase(&mut v);
    let n = v.len();
    let mut lambda = ZERO;
    for i in 0..n {
        let mut row = ZERO;
        for j in 0..n {
            row += u[(i, j)] * v[j];
        }
        lambda += v[i].conj() * row;
    }
    (Phase::of_complex(lambda), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_eigenvalues_are_roots_of_unity() {
        let u = UnitaryMatrix::permutation(&[1, 2, 0]).unwrap();
        let cl = eig_unitary(&u, 1e-9).unwrap();
        assert_eq!(cl.len(), 3);
        for (j, c) in cl.iter().enumerate() {
            assert!(c.phase.distance(&Phase::exact(j as i64, 3)) < 1e-12);
            assert_eq!(c.vectors.len(), 1);
        }
    }

    #[test]
    fn degenerate_eigenvalues_are_grouped() {
        let u = UnitaryMatrix::permutation(&[1, 0, 3, 2]).unwrap();
        let cl = eig_unitary(&u, 1e-9).unwrap();
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].vectors.len(), 2);
        for c in &cl {
            let p = c.projection(4);
            let up = u.conjugate(p.matrix()).unwrap();
            assert!(up.approx_eq(p.matrix(), 1e-12));
        }
    }

    #[test]
    fn close_clusters_are_ambiguous() {
        let u = UnitaryMatrix::diagonal(&[Phase::approx(0.1), Phase::approx(0.1 + 2e-9)]);
        assert!(matches!(eig_unitary(&u, 1e-9), Err(Error::AmbiguousClusters(..))));
    }

    #[test]
    fn exact_diagonal_keeps_basis() {
        let u = UnitaryMatrix::diagonal(&[Phase::exact(1, 2), Phase::ONE, Phase::exact(1, 2)]);
        let cl = eig_unitary(&u, 1e-9).unwrap();
        assert_eq!(cl[1].basis.as_deref(), Some(&[0usize, 2][..]));
        assert!(cl[1].projection(3).exact().is_some());
    }

    #[test]
    fn power_and_corner() {
        let u = UnitaryMatrix::permutation(&[1, 2, 0]).unwrap();
        assert_eq!(u.pow(3).unwrap().exact(), Some(&ExactMatrix::identity(3)));
        assert_eq!(u.pow(-1).unwrap(), u.adjoint().mul(&UnitaryMatrix::identity(3)).unwrap());
        assert_eq!(u.corner(2, 1).unwrap().dim(), 7);
    }
}
