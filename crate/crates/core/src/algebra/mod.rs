//! Matrices, unitaries, projections and exact cyclotomic arithmetic.

mod commutant;
mod cyclotomic;
mod exact;
mod matrix;
mod phase;
mod projection;
mod unitary;

pub use commutant::{factor_commutant, matrix_unit_commutator};
pub use cyclotomic::{cyclotomic_polynomial, Cyclotomic};
pub use exact::ExactMatrix;
pub use matrix::{tensor_reorder, ComplexMatrix, C64, MAX_DENSE_DIM, ONE, ZERO};
pub(crate) use matrix::check_dense;
pub use phase::Phase;
pub use projection::{nearest_projection, orthogonalize_projections, Projection, PROJECTION_TOL};
pub use unitary::{eig_unitary, EigenCluster, UnitaryMatrix, MAX_EXACT_DIM, UNITARY_TOL};

/// `u v u^* v^*`.
pub fn commutator(u: &UnitaryMatrix, v: &UnitaryMatrix) -> crate::Result<UnitaryMatrix> {
    u.mul(v)?.mul(&u.adjoint())?.mul(&v.adjoint())
}

/// Cyclic shift `e_j -> e_{j+1 mod n}`.
pub fn cycle_unitary(n: usize) -> UnitaryMatrix {
    let perm: Vec<usize> = (0..n).map(|j| (j + 1) % n).collect();
    UnitaryMatrix::permutation(&perm).expect("cycle is a permutation")
}
