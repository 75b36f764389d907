use super::matrix::{ComplexMatrix, C64, ONE};
use crate::error::{Error, Result};

/// Largest commutator `‖[x, e_ij ⊗ 1]‖` over the matrix units of the left factor.
pub fn matrix_unit_commutator(x: &ComplexMatrix, n: usize, m: usize) -> Result<f64> {
    let d = x.require_square()?;
    if d != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: d });
    }
    let id = ComplexMatrix::identity(m);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(i, j)] = ONE;
            let u = e.kron(&id);
            let c = &(x * &u) - &(&u * x);
            worst = worst.max(c.op_norm()?);
        }
    }
    Ok(worst)
}

/// Slice `(τ_N ⊗ id)(x)` of an element of `M_N ⊗ M_{N'}` that almost commutes with `M_N ⊗ 1`.
///
/// Errors when the measured commutator with some matrix unit exceeds `eps`.
/// The output satisfies `‖x - 1 ⊗ b‖ ≤ 10 N³ eps`.
pub fn factor_commutant(x: &ComplexMatrix, n: usize, m: usize, eps: f64) -> Result<ComplexMatrix> {
    let measured = matrix_unit_commutator(x, n, m)?;
    if measured > eps * (1.0 + 1e-9) + 1e-15 {
        return Err(Error::CommutatorBound { measured, bound: eps });
    }
    let mut b = ComplexMatrix::zeros(m, m);
    for a in 0..n {
        for r in 0..m {
            for c in 0..m {
                b[(r, c)] += x[(a * m + r, a * m + c)];
            }
        }
    }
    Ok(b.scale(C64::new(1.0 / n as f64, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_slice_recovered() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let x = ComplexMatrix::identity(3).kron(&b);
        let out = factor_commutant(&x, 3, 2, 1e-12).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn perturbation_bound() {
        let eta = 1e-6;
        let b = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, -1.0]]);
        let mut e = ComplexMatrix::zeros(2, 2);
        e[(0, 1)] = ONE;
        let x = &ComplexMatrix::identity(2).kron(&b) + &e.kron(&ComplexMatrix::identity(2)).scale_real(eta);
        let eps = matrix_unit_commutator(&x, 2, 2).unwrap();
        assert!(eps <= 2.0 * eta);
        let out = factor_commutant(&x, 2, 2, eps).unwrap();
        let diff = &x - &ComplexMatrix::identity(2).kron(&out);
        assert!(diff.op_norm().unwrap() <= 10.0 * 8.0 * eps);
        assert!(factor_commutant(&x, 2, 2, eps / 10.0).is_err());
    }
}
