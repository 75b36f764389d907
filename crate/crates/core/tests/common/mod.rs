#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use uhf_core::algebra::{ComplexMatrix, Projection, UnitaryMatrix, C64};

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let data = (0..n * n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    ComplexMatrix::new(n, n, data).expect("n x n entries")
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n);
    (&a + &a.adjoint()).scale_real(0.5)
}

/// Q factor of a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> UnitaryMatrix {
    let q = random_matrix(rng, n).to_nalgebra().qr().q();
    UnitaryMatrix::new(ComplexMatrix::from_nalgebra(&q)).expect("qr gives a unitary")
}

/// `e^{iH}` for a Hermitian `H` with operator norm about `scale`.
pub fn near_identity<R: Rng>(rng: &mut R, n: usize, scale: f64) -> ComplexMatrix {
    let h = random_hermitian(rng, n).to_nalgebra();
    let eig = h.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::from_polar(1.0, scale * x / top)));
    ComplexMatrix::from_nalgebra(&(v * d * v.adjoint()))
}

/// Largest singular value, straight from nalgebra.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    m.to_nalgebra().singular_values().iter().fold(0.0f64, |a, &b| a.max(b))
}

/// `τ(x) = Σ x_ii / n` by hand.
pub fn tau(m: &DMatrix<C64>) -> C64 {
    let n = m.nrows();
    (0..n).map(|i| m[(i, i)]).sum::<C64>() / n as f64
}

/// `‖x‖₂² = Σ |x_ij|² / n`.
pub fn two_norm_sq(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>() / m.nrows() as f64
}

/// Projection onto the span of `rank` random orthonormal columns.
pub fn random_projection<R: Rng>(rng: &mut R, n: usize, rank: usize) -> Projection {
    let u = random_unitary(rng, n);
    let cols: Vec<Vec<C64>> = (0..rank).map(|j| u.matrix().column(j)).collect();
    Projection::from_orthonormal(n, &cols)
}

pub fn kron_identity_left(n: usize, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::identity(n).kron(b)
}
