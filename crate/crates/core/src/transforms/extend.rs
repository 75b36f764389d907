use std::sync::Arc;

use crate::actions::{induced_action, pullback, regular_action, tensor_actions, ElementMap, ProductAction};
use crate::algebra::{Projection, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::groups::{induce, induced_character_defect, normal_core, Element, FiniteGroup, GroupSpec, Representation};
use crate::rokhlin::{best_cyclic_tower, tensor_tower, tower_defects, RokhlinTower, TowerMode};

use super::report::{composed_tower, unitary_order, ElementTowerReport, StageTower, TowerRoute};

#[derive(Clone, Debug)]
pub struct Extension {
    /// `α_H^G ⊗ (β∘q)`, factors interleaved: even positions induced, odd positions quotient.
    pub action: ProductAction,
    /// Normal core `N` of `H` in `G`, sorted.
    pub core: Vec<usize>,
    /// `[G:H]`.
    pub index: usize,
    /// `[G:N]`.
    pub quotient_order: usize,
    /// Largest `|χ_ind(n) − [G:H]·χ(n)|` over `n ∈ N` on the reported factors.
    pub character_defect: f64,
    pub reports: Vec<ElementTowerReport>,
}

fn finite_table(g: &GroupSpec) -> Result<&FiniteGroup> {
    match g {
        GroupSpec::FiniteTable(t) => Ok(t),
        _ => Err(Error::InvalidGroup("finite-index extension needs a group given by its table".into())),
    }
}

/// Tower of `u_a ⊗ u_b` for an element of order `m` whose quotient image has order `k`.
fn pair_tower(u_a: &UnitaryMatrix, u_b: &UnitaryMatrix, m: u64, k: u64) -> Result<(RokhlinTower, TowerRoute)> {
    if m == 1 {
        let t = RokhlinTower::new(vec![Projection::identity(u_a.dim() * u_b.dim())], true)?;
        return Ok((t, TowerRoute::Identity));
    }
    if k == 1 {
        let ta = best_cyclic_tower(u_a, m, 1e-9)?;
        let tb = RokhlinTower::new(vec![Projection::identity(u_b.dim())], true)?;
        return Ok((tensor_tower(&ta, &tb, TowerMode::ExtendLeft)?, TowerRoute::Direct));
    }
    if k == m {
        let ta = RokhlinTower::new(vec![Projection::identity(u_a.dim())], true)?;
        let tb = best_cyclic_tower(u_b, k, 1e-9)?;
        return Ok((tensor_tower(&ta, &tb, TowerMode::ExtendRight)?, TowerRoute::Quotient));
    }
    let (t, _) = composed_tower(&[u_a.clone(), u_b.clone()], m)?;
    Ok((t, TowerRoute::Composed))
}

/// Extend an action of the subgroup `h` of `group` to an action of `group`.
///
/// `a_h` must act through the table `group.subgroup_table(h)`, whose element `i` is
/// the `i`-th smallest index of `h`. Each factor of `a_h` is induced up to `group`
/// and interleaved with the regular action of `G/N` pulled back along the quotient
/// map. Reports cover `stages` stages; stage `l` carries its tower on the `l`-th pair
/// of factors, with the earlier pairs as padding.
pub fn extend_finite_index(a_h: &ProductAction, group: &GroupSpec, h: &[usize], stages: usize) -> Result<Extension> {
    let g = finite_table(group)?;
    let mut h_sorted = h.to_vec();
    h_sorted.sort_unstable();
    h_sorted.dedup();
    if !g.is_subgroup(&h_sorted) {
        return Err(Error::NotSubgroup(format!("{h_sorted:?}")));
    }
    let sub = g.subgroup_table(&h_sorted)?;
    if *a_h.group() != GroupSpec::FiniteTable(sub.clone()) {
        return Err(Error::IncompatibleGroups("action is not defined on the subgroup table".into()));
    }
    let core = normal_core(g, &h_sorted)?;
    let index = g.order() / h_sorted.len();
    if index == 1 {
        let ids: Vec<usize> = (0..g.order()).collect();
        let action = pullback(a_h, group.clone(), ElementMap::Table(Arc::new(ids)))?;
        let reports = element_reports(&action, g, &[0; 0], stages, None)?;
        return Ok(Extension { action, core, index, quotient_order: 1, character_defect: 0.0, reports });
    }
    let (quot, q) = g.quotient(&core)?;
    let induced = induced_action(a_h, g, &h_sorted)?;
    let beta = pullback(&regular_action(&quot), group.clone(), ElementMap::Table(Arc::new(q.clone())))?;
    let action = tensor_actions(&[induced, beta])?.relabel(format!("extend({})", a_h.label()));
    action.verify(4)?;

    let mut character_defect: f64 = 0.0;
    for l in 0..stages.min(a_h.depth().unwrap_or(stages)) {
        let f = a_h.factor(l)?;
        let images = (0..h_sorted.len()).map(|i| f.image(a_h.group(), &Element::Index(i))).collect::<Result<Vec<_>>>()?;
        let rho = Representation::new(&sub, images)?;
        let ind = induce(&rho, g, &h_sorted)?;
        character_defect = character_defect.max(induced_character_defect(&rho, &ind, g, &h_sorted)?);
    }
    let reports = element_reports(&action, g, &q, stages, Some(&quot))?;
    Ok(Extension { action, core, index, quotient_order: quot.order(), character_defect, reports })
}

fn element_reports(
    action: &ProductAction,
    g: &FiniteGroup,
    q: &[usize],
    stages: usize,
    quot: Option<&FiniteGroup>,
) -> Result<Vec<ElementTowerReport>> {
    let spec = action.group();
    let mut reports = Vec::with_capacity(g.order());
    for x in 0..g.order() {
        let el = Element::Index(x);
        let m = g.element_order(x) as u64;
        let k = quot.map_or(1, |qg| qg.element_order(q[x]) as u64);
        let mut route = if m == 1 { TowerRoute::Identity } else { TowerRoute::Direct };
        let mut out = Vec::with_capacity(stages);
        for l in 0..stages {
            let (tower, u, block) = match quot {
                None => {
                    let u = action.factor(l)?.image(spec, &el)?;
                    let t = if m == 1 {
                        RokhlinTower::new(vec![Projection::identity(u.dim())], true)?
                    } else {
                        best_cyclic_tower(&u, unitary_order(&u, m)?, 1e-9)?
                    };
                    let d = u.dim();
                    (t, u, d)
                }
                Some(_) => {
                    let u_a = action.factor(2 * l)?.image(spec, &el)?;
                    let u_b = action.factor(2 * l + 1)?.image(spec, &el)?;
                    let (t, r) = pair_tower(&u_a, &u_b, m, k)?;
                    route = r;
                    let u = u_a.kron(&u_b)?;
                    let d = u.dim();
                    (t, u, d)
                }
            };
            let defects = tower_defects(&tower, &u, &[])?;
            out.push(StageTower { stage: l + 1, block_size: block, tower_length: tower.len(), defects });
        }
        reports.push(ElementTowerReport { element: el.clone(), name: spec.format_element(&el), order: Some(m), route, stages: out });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::evaluate;
    use crate::algebra::C64;

    fn a3() -> Vec<usize> {
        let s3 = FiniteGroup::symmetric(3);
        (0..6).filter(|&x| s3.element_order(x) != 2).collect()
    }

    #[test]
    fn s3_over_a3_is_exact() {
        let s3 = FiniteGroup::symmetric(3);
        let h = a3();
        let a_h = regular_action(&s3.subgroup_table(&h).unwrap());
        let e = extend_finite_index(&a_h, &GroupSpec::FiniteTable(s3.clone()), &h, 3).unwrap();
        assert_eq!((e.index, e.quotient_order), (2, 2));
        assert_eq!(e.core, h);
        assert!(e.character_defect < 1e-12);
        for r in &e.reports {
            assert!(r.exact(), "{}", r.name);
            assert_eq!(r.worst(), 0.0, "{}", r.name);
            let want = match r.order.unwrap() {
                1 => TowerRoute::Identity,
                2 => TowerRoute::Quotient,
                _ => TowerRoute::Direct,
            };
            assert_eq!(r.route, want);
            assert_eq!(r.stages[0].block_size, 12);
        }
    }

    #[test]
    fn z4_over_two_uses_compose() {
        let z4 = FiniteGroup::cyclic(4);
        let h = [0, 2];
        let a_h = regular_action(&z4.subgroup_table(&h).unwrap());
        let e = extend_finite_index(&a_h, &GroupSpec::cyclic(4), &h, 2).unwrap();
        assert_eq!(e.core, vec![0, 2]);
        let r1 = &e.reports[1];
        assert_eq!(r1.route, TowerRoute::Composed);
        assert_eq!(r1.stages[0].tower_length, 4);
        assert_eq!(r1.worst(), 0.0);
        assert_eq!(e.reports[2].route, TowerRoute::Direct);
        assert!(e.character_defect < 1e-12);
    }

    #[test]
    fn homomorphism_on_stages() {
        let s3 = FiniteGroup::symmetric(3);
        let h = a3();
        let a_h = regular_action(&s3.subgroup_table(&h).unwrap());
        let e = extend_finite_index(&a_h, &GroupSpec::FiniteTable(s3.clone()), &h, 1).unwrap();
        for x in 0..6 {
            for y in 0..6 {
                let ux = evaluate(&e.action, &Element::Index(x), 2).unwrap().unitary;
                let uy = evaluate(&e.action, &Element::Index(y), 2).unwrap().unitary;
                let uxy = evaluate(&e.action, &Element::Index(s3.mul(x, y)), 2).unwrap().unitary;
                assert!(ux.mul(&uy).unwrap().matrix().approx_eq(uxy.matrix(), 1e-12));
            }
        }
        assert_eq!(e.action.stage_trace(&Element::Index(0), 2).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn whole_group_is_a_pullback() {
        let z3 = FiniteGroup::cyclic(3);
        let all = [0, 1, 2];
        let a_h = regular_action(&z3.subgroup_table(&all).unwrap());
        let e = extend_finite_index(&a_h, &GroupSpec::FiniteTable(z3), &all, 2).unwrap();
        assert_eq!(e.index, 1);
        assert!(e.reports.iter().all(|r| r.worst() == 0.0));
    }

    #[test]
    fn rejects_non_subgroups() {
        let s3 = FiniteGroup::symmetric(3);
        let a_h = regular_action(&FiniteGroup::cyclic(2));
        assert!(matches!(
            extend_finite_index(&a_h, &GroupSpec::FiniteTable(s3), &[0, 1, 2], 1),
            Err(Error::NotSubgroup(_)) | Err(Error::IncompatibleGroups(_))
        ));
    }
}
