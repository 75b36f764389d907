use super::finite::FiniteGroup;
use super::represent::regular_representation;
use crate::algebra::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Irreducible characters of a finite group.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub classes: Vec<Vec<usize>>,
    /// `values[χ][c]` is `χ` on class `c`.
    pub values: Vec<Vec<C64>>,
    pub dims: Vec<usize>,
}

impl CharacterTable {
    /// Value of character `chi` at element `x`.
    pub fn value(&self, chi: usize, x: usize) -> C64 {
        let c = self.classes.iter().position(|cl| cl.contains(&x)).expect("element in some class");
        self.values[chi][c]
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.classes.iter().position(|cl| cl.contains(&x)).expect("element in some class")
    }
}

/// Character table from the isotypic decomposition of the regular representation.
///
/// A generic self-adjoint combination of class sums is central, so its
/// eigenspaces are the isotypic components `P_χ`; then `χ(x) = tr(P_χ λ(x)) / d_χ`.
/// The result is checked against the orthogonality relations.
pub fn character_table(g: &FiniteGroup) -> Result<CharacterTable> {
    let m = g.order();
    let classes = g.conjugacy_classes();
    let lambda = regular_representation(g);
    for attempt in 0..8 {
        let mut h = ComplexMatrix::zeros(m, m);
        for (i, cl) in classes.iter().enumerate() {
            let a = ((i as f64 + 1.0) * 2f64.sqrt() + attempt as f64 * 3f64.sqrt()).fract() + 0.5;
            let b = ((i as f64 + 1.0) * 5f64.sqrt() + attempt as f64 * 7f64.sqrt()).fract() - 0.5;
            let mut sum = ComplexMatrix::zeros(m, m);
            for &x in cl {
                sum = &sum + lambda.image(x).matrix();
            }
            let herm = &sum + &sum.adjoint();
            let anti = (&sum - &sum.adjoint()).scale(C64::new(0.0, 1.0));
            h = &h + &(&herm.scale_real(a) + &anti.scale_real(b));
        }
        let (vals, vecs) = h.hermitian_eigen()?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (pos, &k) in order.iter().enumerate() {
            if pos == 0 || vals[k] - vals[order[pos - 1]] > 1e-7 {
                groups.push(Vec::new());
            }
            groups.last_mut().unwrap().push(k);
        }
        if groups.len() != classes.len() {
            continue;
        }
        let mut table = Vec::new();
        let mut dims = Vec::new();
        let mut ok = true;
        for grp in &groups {
            let d = (grp.len() as f64).sqrt().round() as usize;
            if d * d != grp.len() {
                ok = false;
                break;
            }
            let row: Vec<C64> = classes
                .iter()
                .map(|cl| {
                    let x = cl[0];
                    // tr(P λ(x)) = Σ_v <v, λ(x) v>
                    let u = lambda.image(x).matrix();
                    let mut t = ZERO;
                    for &k in grp {
                        let v = &vecs[k];
                        for i in 0..m {
                            let mut r = ZERO;
                            for j in 0..m {
                                r += u[(i, j)] * v[j];
                            }
                            t += v[i].conj() * r;
                        }
                    }
                    t / d as f64
                })
                .collect();
            table.push(row);
            dims.push(d);
        }
        if !ok || !orthonormal(&classes, &table, m) {
            continue;
        }
        let mut idx: Vec<usize> = (0..table.len()).collect();
        let key = |i: usize| (dims[i], table[i].iter().map(|z| -z.re).collect::<Vec<f64>>());
        idx.sort_by(|&a, &b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0).then_with(|| ka.1.partial_cmp(&kb.1).unwrap_or(std::cmp::Ordering::Equal))
        });
        let values = idx.iter().map(|&i| table[i].iter().map(|z| round_small(*z)).collect()).collect();
        let dims = idx.iter().map(|&i| dims[i]).collect();
        return Ok(CharacterTable { classes, values, dims });
    }
    Err(Error::InvalidGroup("character table did not separate".into()))
}

fn round_small(z: C64) -> C64 {
    let r = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    C64::new(r(z.re), r(z.im))
}

fn orthonormal(classes: &[Vec<usize>], table: &[Vec<C64>], m: usize) -> bool {
    for a in 0..table.len() {
        for b in 0..table.len() {
            let s: C64 = classes.iter().enumerate().map(|(c, cl)| table[a][c] * table[b][c].conj() * cl.len() as f64).sum();
            let target = if a == b { m as f64 } else { 0.0 };
            if (s - target).norm() > 1e-8 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_table() {
        let t = character_table(&FiniteGroup::symmetric(3)).unwrap();
        assert_eq!(t.dims, vec![1, 1, 2]);
        // trivial character first
        assert!(t.values[0].iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn cyclic_tables() {
        for n in 2..7 {
            let t = character_table(&FiniteGroup::cyclic(n)).unwrap();
            assert_eq!(t.dims, vec![1; n]);
        }
        let d4 = character_table(&FiniteGroup::dihedral(4)).unwrap();
        assert_eq!(d4.dims, vec![1, 1, 1, 1, 2]);
    }
}
