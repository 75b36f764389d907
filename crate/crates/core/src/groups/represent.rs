use std::collections::VecDeque;

use super::finite::{normal_core, FiniteGroup};
use crate::algebra::{ComplexMatrix, ExactMatrix, Phase, UnitaryMatrix, C64};
use crate::error::{Error, Result};

/// Unitary representation of a finite group, indexed like the group's elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    dim: usize,
    images: Vec<UnitaryMatrix>,
}

impl Representation {
    /// Validate the homomorphism property against the table.
    pub fn new(g: &FiniteGroup, images: Vec<UnitaryMatrix>) -> Result<Self> {
        if images.len() != g.order() {
            return Err(Error::DimensionMismatch { expected: g.order(), found: images.len() });
        }
        let dim = images[0].dim();
        if let Some(u) = images.iter().find(|u| u.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: u.dim() });
        }
        check_homomorphism(g, &images)?;
        Ok(Representation { dim, images })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, g: usize) -> &UnitaryMatrix {
        &self.images[g]
    }

    pub fn images(&self) -> &[UnitaryMatrix] {
        &self.images
    }

    /// Unnormalized character.
    pub fn character(&self) -> Vec<C64> {
        self.images.iter().map(|u| u.matrix().trace().expect("square")).collect()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| {
                let m = ComplexMatrix::direct_sum(&[a.matrix(), b.matrix()]);
                match (a.exact(), b.exact()) {
                    (Some(x), Some(y)) => UnitaryMatrix::from_exact(ExactMatrix::direct_sum(&[x, y])).expect("unitary"),
                    _ => UnitaryMatrix::new(m).expect("unitary"),
                }
            })
            .collect();
        Representation { dim: self.dim + other.dim, images }
    }
}

/// Check `images[ab] = images[a] images[b]`, exactly when all images are exact.
pub fn check_homomorphism(g: &FiniteGroup, images: &[UnitaryMatrix]) -> Result<()> {
    let exact = images.iter().all(|u| u.exact().is_some());
    for a in 0..g.order() {
        for b in 0..g.order() {
            let prod = images[a].mul(&images[b])?;
            let target = &images[g.mul(a, b)];
            let ok = if exact { prod.exact() == target.exact() } else { prod.matrix().approx_eq(target.matrix(), 1e-9) };
            if !ok {
                return Err(Error::NotHomomorphism(format!("at ({}, {})", g.name(a), g.name(b))));
            }
        }
    }
    Ok(())
}

/// Left regular representation `λ(g) e_h = e_{gh}`.
pub fn regular_representation(g: &FiniteGroup) -> Representation {
    let images = (0..g.order())
        .map(|a| {
            let perm: Vec<usize> = (0..g.order()).map(|h| g.mul(a, h)).collect();
            UnitaryMatrix::permutation(&perm).expect("permutation")
        })
        .collect();
    Representation { dim: g.order(), images }
}

/// All homomorphisms `G -> T`, as exact phases per element; the trivial character comes first.
pub fn one_dim_characters(g: &FiniteGroup) -> Vec<Vec<Phase>> {
    // generators chosen greedily
    let mut gens = Vec::new();
    let mut span = vec![g.identity()];
    for x in 0..g.order() {
        if !span.contains(&x) {
            gens.push(x);
            span = g.generated(&gens);
        }
    }
    let orders: Vec<usize> = gens.iter().map(|&x| g.element_order(x)).collect();
    let mut out = Vec::new();
    let total: usize = orders.iter().product();
    for code in 0..total {
        let mut rest = code;
        let vals: Vec<Phase> = orders
            .iter()
            .map(|&k| {
                let e = rest % k;
                rest /= k;
                Phase::exact(e as i64, k as i64)
            })
            .collect();
        if let Some(chi) = extend_character(g, &gens, &vals) {
            out.push(chi);
        }
    }
    // the enumeration starts at all-zero codes, so the trivial character is first
    out
}

fn extend_character(g: &FiniteGroup, gens: &[usize], vals: &[Phase]) -> Option<Vec<Phase>> {
    let mut chi: Vec<Option<Phase>> = vec![None; g.order()];
    chi[g.identity()] = Some(Phase::ONE);
    let mut queue = VecDeque::from([g.identity()]);
    while let Some(x) = queue.pop_front() {
        for (&s, v) in gens.iter().zip(vals) {
            let y = g.mul(x, s);
            let val = chi[x].unwrap().add(v);
            match chi[y] {
                None => {
                    chi[y] = Some(val);
                    queue.push_back(y);
                }
                Some(old) if old != val => return None,
                Some(_) => {}
            }
        }
    }
    let chi: Vec<Phase> = chi.into_iter().collect::<Option<_>>()?;
    (0..g.order())
        .all(|a| (0..g.order()).all(|b| chi[g.mul(a, b)] == chi[a].add(&chi[b])))
        .then_some(chi)
}

/// Family `ψ[g] = diag(1, φ_g)` of unitary representations separating each nontrivial `g` from the identity.
///
/// `φ_g` is a one-dimensional character with `φ_g(g) ≠ 1` when one exists,
/// and the left regular representation otherwise.
#[derive(Clone, Debug)]
pub struct MapEmbedding {
    pub coords: Vec<(usize, Representation)>,
}

pub fn map_embedding(g: &FiniteGroup) -> MapEmbedding {
    let chars = one_dim_characters(g);
    let trivial = Representation {
        dim: 1,
        images: (0..g.order()).map(|_| UnitaryMatrix::identity(1)).collect(),
    };
    let coords = (0..g.order())
        .filter(|&x| x != g.identity())
        .map(|x| {
            let phi = match chars.iter().find(|c| !c[x].is_one()) {
                Some(c) => Representation {
                    dim: 1,
                    images: c.iter().map(|p| UnitaryMatrix::diagonal(&[*p])).collect(),
                },
                None => regular_representation(g),
            };
            (x, trivial.direct_sum(&phi))
        })
        .collect();
    MapEmbedding { coords }
}

/// Induced representation `Ind_H^G ρ` on `⊕_i g_i ℂ^n`, with least-index coset representatives.
///
/// `rho.image(i)` is the image of `h[i]`, where `h` is the sorted subgroup.
pub fn induce(rho: &Representation, g: &FiniteGroup, h: &[usize]) -> Result<Representation> {
    let hg = g.subgroup_table(h)?;
    let mut h_sorted = h.to_vec();
    h_sorted.sort_unstable();
    h_sorted.dedup();
    if rho.images.len() != h_sorted.len() {
        return Err(Error::DimensionMismatch { expected: h_sorted.len(), found: rho.images.len() });
    }
    check_homomorphism(&hg, &rho.images)?;
    let reps: Vec<usize> = g.left_cosets(&h_sorted)?.into_iter().map(|c| c[0]).collect();
    let (k, n) = (reps.len(), rho.dim);
    let pos = |x: usize| h_sorted.iter().position(|&y| y == x);
    let exact = rho.images.iter().all(|u| u.exact().is_some());
    let mut images = Vec::with_capacity(g.order());
    for x in 0..g.order() {
        let mut dense = ComplexMatrix::zeros(k * n, k * n);
        let mut entries = Vec::new();
        for i in 0..k {
            for j in 0..k {
                let y = g.mul(g.mul(g.inv(reps[i]), x), reps[j]);
                if let Some(p) = pos(y) {
                    let block = &rho.images[p];
                    for r in 0..n {
                        for c in 0..n {
                            dense[(i * n + r, j * n + c)] = block.matrix()[(r, c)];
                        }
                    }
                    if let Some(e) = block.exact() {
                        entries.extend(e.entries().map(|(r, c, z)| (i * n + r, j * n + c, z.clone())));
                    }
                }
            }
        }
        images.push(if exact {
            UnitaryMatrix::from_exact(ExactMatrix::from_entries(k * n, entries))?
        } else {
            UnitaryMatrix::new(dense)?
        });
    }
    Ok(Representation { dim: k * n, images })
}

/// Check `tr Ind ρ(x) = [G:H] tr ρ(x)` for every `x` in the normal core of `H`.
pub fn induced_character_defect(rho: &Representation, induced: &Representation, g: &FiniteGroup, h: &[usize]) -> Result<f64> {
    let mut h_sorted = h.to_vec();
    h_sorted.sort_unstable();
    h_sorted.dedup();
    let core = normal_core(g, &h_sorted)?;
    let index = (g.order() / h_sorted.len()) as f64;
    let chi = rho.character();
    let chi_ind = induced.character();
    let mut worst: f64 = 0.0;
    for x in core {
        let p = h_sorted.iter().position(|&y| y == x).unwrap();
        worst = worst.max((chi_ind[x] - chi[p] * index).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z4_induction_matches_worked_example() {
        let z4 = FiniteGroup::cyclic(4);
        let h = [0, 2];
        let hg = z4.subgroup_table(&h).unwrap();
        let rho = Representation::new(&hg, vec![UnitaryMatrix::identity(1), UnitaryMatrix::diagonal(&[Phase::exact(1, 2)])]).unwrap();
        let ind = induce(&rho, &z4, &h).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert_eq!(ind.image(1).matrix(), &expected);
        assert_eq!(ind.image(2).matrix(), &ComplexMatrix::identity(2).scale_real(-1.0));
        assert_eq!(induced_character_defect(&rho, &ind, &z4, &h).unwrap(), 0.0);
    }

    #[test]
    fn characters_of_small_groups() {
        assert_eq!(one_dim_characters(&FiniteGroup::cyclic(6)).len(), 6);
        assert_eq!(one_dim_characters(&FiniteGroup::symmetric(3)).len(), 2);
        assert_eq!(one_dim_characters(&FiniteGroup::dihedral(4)).len(), 4);
        assert!(one_dim_characters(&FiniteGroup::cyclic(3))[0].iter().all(|p| p.is_one()));
    }

    #[test]
    fn map_embedding_separates_points() {
        for g in [FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::symmetric(3)] {
            let me = map_embedding(&g);
            for (x, psi) in &me.coords {
                check_homomorphism(&g, psi.images()).unwrap();
                assert!(psi.image(*x).matrix() != psi.image(g.identity()).matrix());
            }
        }
        let z2 = map_embedding(&FiniteGroup::cyclic(2));
        assert_eq!(z2.coords[0].1.image(1).matrix(), &ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]));
    }
}
