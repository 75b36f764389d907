use std::collections::BTreeMap;

use num_rational::Rational64;

use super::cyclotomic::Cyclotomic;
use super::matrix::ComplexMatrix;
use super::phase::Phase;
use crate::error::{Error, Result};

/// Sparse square matrix with cyclotomic entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, Cyclotomic)>>,
}

impl ExactMatrix {
    pub fn zeros(dim: usize) -> Self {
        ExactMatrix { dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(vec![Cyclotomic::one(); dim])
    }

    pub fn from_diagonal(d: Vec<Cyclotomic>) -> Self {
        let dim = d.len();
        let rows = d.into_iter().enumerate().map(|(i, z)| if z.is_zero() { vec![] } else { vec![(i, z)] }).collect();
        ExactMatrix { dim, rows }
    }

    pub fn from_phases(phases: &[Phase]) -> Option<Self> {
        let d: Option<Vec<_>> = phases.iter().map(Cyclotomic::from_phase).collect();
        d.map(Self::from_diagonal)
    }

    /// Monomial matrix sending `e_j` to `phase_j e_{perm[j]}`.
    pub fn monomial(perm: &[usize], phases: &[Phase]) -> Option<Self> {
        let dim = perm.len();
        let mut rows = vec![Vec::new(); dim];
        for (j, (&i, ph)) in perm.iter().zip(phases).enumerate() {
            rows[i].push((j, Cyclotomic::from_phase(ph)?));
        }
        Some(ExactMatrix { dim, rows })
    }

    pub fn permutation(perm: &[usize]) -> Self {
        Self::monomial(perm, &vec![Phase::ONE; perm.len()]).expect("exact phases")
    }

    /// Build from explicit entries; duplicates are summed.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, Cyclotomic)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, Cyclotomic>> = vec![BTreeMap::new(); dim];
        for (i, j, z) in entries {
            let slot = acc[i].entry(j).or_insert_with(Cyclotomic::zero);
            *slot = slot.add(&z);
        }
        Self::from_maps(dim, acc)
    }

    fn from_maps(dim: usize, acc: Vec<BTreeMap<usize, Cyclotomic>>) -> Self {
        let rows = acc.into_iter().map(|m| m.into_iter().filter(|(_, z)| !z.is_zero()).collect()).collect();
        ExactMatrix { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Cyclotomic)> {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(j, z)| (i, *j, z)))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut acc: Vec<BTreeMap<usize, Cyclotomic>> = vec![BTreeMap::new(); self.dim];
        for (i, j, z) in self.entries().chain(other.entries()) {
            let slot = acc[i].entry(j).or_insert_with(Cyclotomic::zero);
            *slot = slot.add(z);
        }
        Ok(Self::from_maps(self.dim, acc))
    }

    pub fn neg(&self) -> Self {
        ExactMatrix {
            dim: self.dim,
            rows: self.rows.iter().map(|r| r.iter().map(|(j, z)| (*j, z.neg())).collect()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: Rational64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for (_, z) in row.iter_mut() {
                *z = z.scale(r);
            }
            row.retain(|(_, z)| !z.is_zero());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut acc: Vec<BTreeMap<usize, Cyclotomic>> = vec![BTreeMap::new(); self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for (k, a) in row {
                for (j, b) in &other.rows[*k] {
                    let slot = acc[i].entry(*j).or_insert_with(Cyclotomic::zero);
                    *slot = slot.add(&a.mul(b));
                }
            }
        }
        Ok(Self::from_maps(self.dim, acc))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_entries(self.dim, self.entries().map(|(i, j, z)| (j, i, z.conj())))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let d = self.dim * other.dim;
        let mut rows = vec![Vec::new(); d];
        for (i, row) in self.rows.iter().enumerate() {
            for k in 0..other.dim {
                let out = &mut rows[i * other.dim + k];
                for (j, a) in row {
                    for (l, b) in &other.rows[k] {
                        out.push((j * other.dim + l, a.mul(b)));
                    }
                }
                out.sort_by_key(|(c, _)| *c);
            }
        }
        ExactMatrix { dim: d, rows }
    }

    pub fn direct_sum(blocks: &[&ExactMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut rows = Vec::with_capacity(dim);
        let mut off = 0;
        for b in blocks {
            for r in &b.rows {
                rows.push(r.iter().map(|(j, z)| (j + off, z.clone())).collect());
            }
            off += b.dim;
        }
        ExactMatrix { dim, rows }
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn compress(&self, idx: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (p, &i) in idx.iter().enumerate() {
            pos[i] = p;
        }
        let rows = idx
            .iter()
            .map(|&i| {
                let mut r: Vec<_> =
                    self.rows[i].iter().filter(|(j, _)| pos[*j] != usize::MAX).map(|(j, z)| (pos[*j], z.clone())).collect();
                r.sort_by_key(|(c, _)| *c);
                r
            })
            .collect();
        ExactMatrix { dim: idx.len(), rows }
    }

    pub fn trace(&self) -> Cyclotomic {
        let mut t = Cyclotomic::zero();
        for (i, row) in self.rows.iter().enumerate() {
            if let Some((_, z)) = row.iter().find(|(j, _)| *j == i) {
                t = t.add(z);
            }
        }
        t
    }

    pub fn normalized_trace(&self) -> Cyclotomic {
        self.trace().scale(Rational64::new(1, self.dim.max(1) as i64))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (i, j, z) in self.entries() {
            m[(i, j)] = z.to_complex();
        }
        m
    }

    /// Diagonal phases when the matrix is a diagonal unitary with root-of-unity entries.
    pub fn diagonal_phases(&self) -> Option<Vec<Phase>> {
        let mut out = Vec::with_capacity(self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != 1 || row[0].0 != i {
                return None;
            }
            out.push(row[0].1.as_root_of_unity()?);
        }
        Some(out)
    }

    /// `(perm, phases)` with `self e_j = phases[j] e_{perm[j]}` when this is a monomial
    /// matrix whose nonzero entries are roots of unity.
    pub fn monomial_parts(&self) -> Option<(Vec<usize>, Vec<Phase>)> {
        let mut perm = vec![usize::MAX; self.dim];
        let mut phases = vec![Phase::ONE; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != 1 {
                return None;
            }
            let (j, z) = &row[0];
            if perm[*j] != usize::MAX {
                return None;
            }
            perm[*j] = i;
            phases[*j] = z.as_root_of_unity()?;
        }
        Some((perm, phases))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_unitary_is_exact() {
        let u = ExactMatrix::monomial(&[1, 2, 0], &[Phase::ONE, Phase::exact(1, 3), Phase::exact(1, 2)]).unwrap();
        let uu = u.mul(&u.adjoint()).unwrap();
        assert_eq!(uu, ExactMatrix::identity(3));
        let c = u.to_complex();
        let d = &(&c * &c.adjoint()) - &ComplexMatrix::identity(3);
        assert!(d.max_abs() < 1e-15);
    }

    #[test]
    fn kron_trace_multiplies() {
        let a = ExactMatrix::from_phases(&[Phase::ONE, Phase::exact(1, 2)]).unwrap();
        let b = ExactMatrix::from_phases(&[Phase::exact(1, 3), Phase::exact(2, 3), Phase::ONE]).unwrap();
        assert!(a.kron(&b).trace().is_zero());
        assert!(b.trace().is_zero());
        let c = ExactMatrix::from_phases(&[Phase::ONE, Phase::exact(1, 4)]).unwrap();
        assert_eq!(c.kron(&c).trace(), c.trace().mul(&c.trace()));
        assert_eq!(a.kron(&a).normalized_trace(), Cyclotomic::zero());
        assert_eq!(ExactMatrix::identity(3).kron(&a.mul(&a).unwrap()).trace(), Cyclotomic::rational(Rational64::from_integer(6)));
    }

    #[test]
    fn diagonal_phases_round_trip() {
        let ph = vec![Phase::exact(1, 6), Phase::exact(1, 2), Phase::ONE];
        let m = ExactMatrix::from_phases(&ph).unwrap();
        assert_eq!(m.diagonal_phases().unwrap(), ph);
    }
}
