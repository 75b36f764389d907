use std::sync::Arc;

use num_integer::Integer;

use crate::actions::{
    abelian_action, abelian_slots, identity_action, interleave_identity, map_embed_action, pullback, slot_action,
    tensor_actions, tensor_power, ElementMap, ProductAction,
};
use crate::algebra::{Projection, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::groups::{
    same_type, supernatural_of, AbelianGroup, Element, FactorSequence, GroupSpec, Order, Real,
};
use crate::rokhlin::{
    arc_shift, arc_tower, certify_schedule, class_shift, tower_defects, CertifyOptions, EpsilonRule, RokhlinTower,
    TowerSchedule,
};
use crate::witness::{commutator_trace, WitnessSeries, DEFAULT_THRESHOLD, DEFAULT_WINDOW};

use super::bump_up::{bump_up, BumpUp};
use super::cut_down::cut_down;
use super::extend::{extend_finite_index, Extension};
use super::report::{composed_tower, unitary_order, ElementTowerReport, StageTower, TowerRoute};

#[derive(Clone, Debug)]
pub struct ConstructOptions {
    /// Flow angle for presented abelian groups.
    pub theta: Real,
    pub certify: CertifyOptions,
    pub window: usize,
    pub threshold: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            theta: Real::Sqrt(2),
            certify: CertifyOptions::default(),
            window: DEFAULT_WINDOW,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Everything produced for one tracked element.
#[derive(Clone, Debug)]
pub struct ConstructedElement {
    pub element: Element,
    pub name: String,
    pub order: Option<u64>,
    /// The element's share of the target factors.
    pub slice: FactorSequence,
    /// Towers of the tensor power, the bump-up source.
    pub source: TowerSchedule,
    pub bump: BumpUp,
    /// Towers of the bumped component at `ε_l = 2^{-l}`.
    pub schedule: TowerSchedule,
    /// `τ([B_l(g), X_l])` per level, `X_l` the class shift of the source block carried along.
    pub witness: WitnessSeries,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub base: ProductAction,
    pub powered: ProductAction,
    /// The tensor power placed on the universal pattern.
    pub universal: ProductAction,
    pub output: ProductAction,
    pub elements: Vec<ConstructedElement>,
    pub same_type: bool,
}

impl Construction {
    pub fn pass(&self) -> bool {
        self.same_type && self.elements.iter().all(|e| e.schedule.pass() && e.witness.is_witness())
    }
}

fn separating_action(group: &GroupSpec, theta: Real) -> Result<ProductAction> {
    match group {
        GroupSpec::FiniteTable(g) => Ok(map_embed_action(g)),
        GroupSpec::AbelianPresented(_) => abelian_action(group, theta),
        GroupSpec::DirectSum(_) => {
            let (fg, els) = group
                .finite_model()
                .ok_or_else(|| Error::InvalidGroup("infinite direct sums are not supported here".into()))?;
            pullback(&map_embed_action(&fg), group.clone(), ElementMap::Enumerate(Arc::new(els)))
        }
    }
}

/// Elements followed through the construction: every nontrivial element of a finite
/// group, the nontrivial generators otherwise.
fn tracked_elements(group: &GroupSpec) -> Result<Vec<Element>> {
    let all = group.finite_elements().unwrap_or_else(|| group.generators());
    let mut out = Vec::new();
    for g in all {
        if !group.is_identity(&g)? {
            out.push(g);
        }
    }
    Ok(out)
}

fn geometric() -> EpsilonRule {
    EpsilonRule::Geometric { base: 2.0 }
}

/// Build a product type action of `group` on the UHF algebra of `target` whose
/// tracked elements carry certified towers and commutator witnesses.
///
/// A separating action is raised to `copies` tensor copies. The target factors are
/// split round-robin between the tracked elements; each element's slice receives a
/// bump-up of the tensor power along that element's certified blocks, and the
/// components are tensored together.
pub fn construct_strongly_outer(
    group: &GroupSpec,
    target: &FactorSequence,
    copies: usize,
    l_max: usize,
    opts: &ConstructOptions,
) -> Result<Construction> {
    target.validate()?;
    if target.len().is_some() {
        return Err(Error::Infeasible("a finite target cannot be partitioned between elements".into()));
    }
    let target_type = supernatural_of(target)?;
    if group.is_trivial() {
        let base = identity_action(group.clone(), target.clone())?;
        let same = same_type(&supernatural_of(base.factors())?, &target_type)?;
        return Ok(Construction {
            powered: base.clone(),
            universal: base.clone(),
            output: base.clone(),
            base,
            elements: Vec::new(),
            same_type: same,
        });
    }
    let base = separating_action(group, opts.theta)?;
    let powered = tensor_power(&base, copies)?;
    let universal = interleave_identity(&powered)?;
    let tracked = tracked_elements(group)?;
    let m = tracked.len();
    let mut elements = Vec::with_capacity(m);
    for (i, g) in tracked.into_iter().enumerate() {
        let name = group.format_element(&g);
        let order = group.order_of(&g)?.finite();
        let slice = FactorSequence::Subsequence { source: Box::new(target.clone()), offset: i, stride: m };
        let source = certify_schedule(&powered, &g, order, l_max, &geometric(), &opts.certify)?;
        if let Some(f) = &source.failure {
            return Err(Error::Infeasible(format!("element {name}: {f}")));
        }
        let bump = bump_up(&powered, &source, &slice)?;
        let schedule = certify_schedule(&bump.action, &g, order, l_max, &geometric(), &opts.certify)?;
        let witness = level_witness(&powered, &bump, &g, order, &source, opts)?;
        elements.push(ConstructedElement { element: g, name, order, slice, source, bump, schedule, witness });
    }
    let parts: Vec<ProductAction> = elements.iter().map(|e| e.bump.action.clone()).collect();
    let output = tensor_actions(&parts)?.relabel(format!("strongly_outer({} copies)", copies));
    let same = same_type(&supernatural_of(output.factors())?, &target_type)?;
    Ok(Construction { base, powered, universal, output, elements, same_type: same })
}

fn level_witness(
    powered: &ProductAction,
    bump: &BumpUp,
    g: &Element,
    order: Option<u64>,
    source: &TowerSchedule,
    opts: &ConstructOptions,
) -> Result<WitnessSeries> {
    let group = powered.group();
    let mut values = Vec::with_capacity(bump.plan.levels.len());
    for (idx, (lv, st)) in bump.plan.levels.iter().zip(&source.stages).enumerate() {
        let u = powered.block(lv.source_start, lv.source_end)?.image(group, g)?;
        let x = match order {
            Some(k) => class_shift(&u, k, opts.certify.cluster_tol)?,
            None => arc_shift(&u, st.tower_length, opts.certify.cluster_tol)?,
        };
        let level_u = bump.action.factor(idx)?.image(group, g)?;
        values.push(commutator_trace(&level_u, &x.corner(lv.quotient, lv.remainder)?)?);
    }
    let indices = bump.plan.levels.iter().map(|l| l.level).collect();
    Ok(WitnessSeries::new(indices, values)?.with_window(opts.window).with_threshold(opts.threshold))
}

/// What a component of the universal assembly is built from.
#[derive(Clone, Debug)]
pub enum ComponentKind {
    /// Cut-down of a torsion flow slot: the element acts as `diag(1, ω, …, ω^{k−1})`.
    Torsion { element: Element, k: u64, schedule: TowerSchedule },
    /// Flow slot of a rational coordinate.
    Flow,
}

#[derive(Clone, Debug)]
pub struct UniversalComponent {
    pub action: ProductAction,
    pub kind: ComponentKind,
}

#[derive(Clone, Debug)]
pub struct UniversalRokhlin {
    /// The assembled action on the universal UHF algebra.
    pub action: ProductAction,
    /// Tensor product of the components before placement on the universal pattern.
    pub combined: ProductAction,
    pub components: Vec<UniversalComponent>,
    pub extension: Option<Extension>,
    pub reports: Vec<ElementTowerReport>,
}

impl UniversalRokhlin {
    /// Largest defect over the finite-order reports.
    pub fn worst_finite(&self) -> f64 {
        self.reports.iter().filter(|r| r.order.is_some()).map(|r| r.worst()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct UniversalOptions {
    pub theta: Real,
    pub certify: CertifyOptions,
}

impl Default for UniversalOptions {
    fn default() -> Self {
        UniversalOptions { theta: Real::Sqrt(2), certify: CertifyOptions::default() }
    }
}

/// Rokhlin action of an almost abelian group on the universal UHF algebra.
///
/// Presented abelian groups get one component per coordinate of their embedding:
/// torsion coordinates are certified and cut down to factors on which an element
/// generating the coordinate's image acts as `diag(1, ω, …, ω^{k−1})`, rational
/// coordinates keep their flow. Finite table groups use a cyclic subgroup of
/// maximal order through that route and extend it with [`extend_finite_index`].
/// Reports cover stages `1..=l_max`.
pub fn rokhlin_action_universal(group: &GroupSpec, l_max: usize, opts: &UniversalOptions) -> Result<UniversalRokhlin> {
    if group.is_trivial() {
        let combined = identity_action(group.clone(), FactorSequence::constant(2))?;
        let reports = vec![identity_report(group, &group.identity(), &combined, l_max)?];
        return Ok(UniversalRokhlin {
            action: interleave_identity(&combined)?,
            combined,
            components: Vec::new(),
            extension: None,
            reports,
        });
    }
    match group {
        GroupSpec::AbelianPresented(_) => abelian_universal(group, l_max, opts),
        GroupSpec::FiniteTable(g) => {
            let h0 = (0..g.order()).max_by_key(|&x| (g.element_order(x), std::cmp::Reverse(x))).unwrap();
            let m = g.element_order(h0);
            let powers: Vec<(usize, i64)> = (0..m as i64).map(|e| (g.pow(h0, e), e)).collect();
            let mut h_sorted: Vec<usize> = powers.iter().map(|p| p.0).collect();
            h_sorted.sort_unstable();
            let lookup: Vec<Element> = h_sorted
                .iter()
                .map(|x| Element::Exponents(vec![powers.iter().find(|p| p.0 == *x).unwrap().1]))
                .collect();
            let cyclic = GroupSpec::AbelianPresented(AbelianGroup::from_orders(&[Some(m as u64)])?);
            let inner = abelian_universal(&cyclic, l_max, opts)?;
            let sub = GroupSpec::FiniteTable(g.subgroup_table(&h_sorted)?);
            let a_h = pullback(&inner.combined, sub, ElementMap::Lookup(Arc::new(lookup)))?;
            let ext = extend_finite_index(&a_h, group, &h_sorted, l_max)?;
            Ok(UniversalRokhlin {
                action: interleave_identity(&ext.action)?,
                combined: ext.action.clone(),
                components: inner.components,
                reports: ext.reports.clone(),
                extension: Some(ext),
            })
        }
        GroupSpec::DirectSum(_) => {
            Err(Error::InvalidGroup("give direct sums as a table or as a presented abelian group".into()))
        }
    }
}

/// Exponent vector whose image in a torsion slot has denominator `k`.
fn slot_generator(values: &[num_rational::Rational64], k: i64) -> Option<Vec<i64>> {
    let dens: Vec<i64> = values.iter().map(|v| *v.denom()).collect();
    let mut e = vec![0i64; values.len()];
    loop {
        let sum = values.iter().zip(&e).fold(num_rational::Rational64::from_integer(0), |acc, (v, &x)| acc + v * x);
        if sum.fract().denom() == &k && *sum.fract().numer() != 0 {
            return Some(e);
        }
        let mut i = 0;
        loop {
            if i == e.len() {
                return None;
            }
            e[i] += 1;
            if e[i] < dens[i] {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

fn abelian_universal(group: &GroupSpec, l_max: usize, opts: &UniversalOptions) -> Result<UniversalRokhlin> {
    let GroupSpec::AbelianPresented(a) = group else { unreachable!("abelian path") };
    let slots = abelian_slots(group, opts.theta)?;
    let mut components = Vec::with_capacity(slots.len());
    for ((_, torsion), slot) in a.slots().into_iter().zip(slots) {
        let sa = slot_action(group, slot.clone())?;
        if !torsion {
            components.push(UniversalComponent { action: sa, kind: ComponentKind::Flow });
            continue;
        }
        let k = slot.values.iter().fold(1i64, |acc, v| acc.lcm(v.denom()));
        let exps = slot_generator(&slot.values, k)
            .ok_or_else(|| Error::InvalidGroup("torsion coordinate without a generating element".into()))?;
        let g = Element::Exponents(exps);
        let schedule = certify_schedule(&sa, &g, Some(k as u64), l_max, &geometric(), &opts.certify)?;
        let cut = cut_down(&sa, &schedule)?;
        components.push(UniversalComponent {
            action: cut.action,
            kind: ComponentKind::Torsion { element: g, k: k as u64, schedule },
        });
    }
    let parts: Vec<ProductAction> = components.iter().map(|c| c.action.clone()).collect();
    let combined = tensor_actions(&parts)?;
    let elements = group.finite_elements().unwrap_or_else(|| group.generators());
    let reports = elements
        .iter()
        .map(|g| element_report(group, g, &parts, l_max, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(UniversalRokhlin {
        action: interleave_identity(&combined)?,
        combined,
        components,
        extension: None,
        reports,
    })
}

fn identity_report(group: &GroupSpec, g: &Element, a: &ProductAction, l_max: usize) -> Result<ElementTowerReport> {
    let mut stages = Vec::with_capacity(l_max);
    for l in 0..l_max {
        let u = a.factor(l)?.image(group, g)?;
        let t = RokhlinTower::new(vec![Projection::identity(u.dim())], true)?;
        let defects = tower_defects(&t, &u, &[])?;
        stages.push(StageTower { stage: l + 1, block_size: u.dim(), tower_length: 1, defects });
    }
    Ok(ElementTowerReport {
        element: g.clone(),
        name: group.format_element(g),
        order: Some(1),
        route: TowerRoute::Identity,
        stages,
    })
}

/// Stage `l` uses factor `l` of every component; components where `g` acts
/// trivially are padding and do not enter the tower.
fn element_report(
    group: &GroupSpec,
    g: &Element,
    parts: &[ProductAction],
    l_max: usize,
    opts: &UniversalOptions,
) -> Result<ElementTowerReport> {
    let order = group.order_of(g)?;
    let mut route = TowerRoute::Identity;
    let mut stages = Vec::with_capacity(l_max);
    for l in 0..l_max {
        let units: Vec<UnitaryMatrix> = parts.iter().map(|p| p.factor(l)?.image(group, g)).collect::<Result<_>>()?;
        let block_size = units.iter().map(|u| u.dim()).product();
        let (tower, u) = match order {
            Order::Finite(m) => {
                let mut moving = Vec::new();
                for u in &units {
                    if unitary_order(u, m)? > 1 {
                        moving.push(u.clone());
                    }
                }
                route = match moving.len() {
                    0 => TowerRoute::Identity,
                    1 => TowerRoute::Direct,
                    _ => TowerRoute::Composed,
                };
                if moving.is_empty() {
                    let u = UnitaryMatrix::identity(1);
                    (RokhlinTower::new(vec![Projection::identity(1)], true)?, u)
                } else {
                    composed_tower(&moving, m)?
                }
            }
            Order::Infinite => {
                route = TowerRoute::Arc;
                let u = units.iter().skip(1).try_fold(units[0].clone(), |acc, v| acc.kron(v))?;
                let len = opts.certify.arc_length.unwrap_or(l + 2);
                (arc_tower(&u, len, opts.certify.cluster_tol)?, u)
            }
        };
        let defects = tower_defects(&tower, &u, &[])?;
        stages.push(StageTower { stage: l + 1, block_size, tower_length: tower.len(), defects });
    }
    Ok(ElementTowerReport {
        element: g.clone(),
        name: group.format_element(g),
        order: order.finite(),
        route,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::FiniteGroup;

    #[test]
    fn z2_onto_three() {
        let c = construct_strongly_outer(&GroupSpec::cyclic(2), &FactorSequence::constant(3), 2, 6, &Default::default())
            .unwrap();
        assert!(c.same_type);
        assert_eq!(c.elements.len(), 1);
        let e = &c.elements[0];
        assert!(e.source.pass());
        assert!(e.bump.schedule.pass());
        assert!(e.schedule.pass(), "{:?}", e.schedule.failure);
        assert!(e.witness.is_witness(), "{}", e.witness.verdict_line());
        assert!(c.pass());
    }

    #[test]
    fn trivial_group_is_identity() {
        let g = GroupSpec::FiniteTable(FiniteGroup::cyclic(1));
        let c = construct_strongly_outer(&g, &FactorSequence::constant(2), 2, 3, &Default::default()).unwrap();
        assert!(c.elements.is_empty());
        assert!(c.same_type);
        assert!(c.pass());
    }

    #[test]
    fn finite_targets_are_rejected() {
        let r = construct_strongly_outer(&GroupSpec::cyclic(2), &FactorSequence::Prefix(vec![3; 10]), 1, 2, &Default::default());
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn z2_plus_z3_universal() {
        let g = GroupSpec::AbelianPresented(AbelianGroup::from_orders(&[Some(2), Some(3)]).unwrap());
        let u = rokhlin_action_universal(&g, 4, &Default::default()).unwrap();
        assert_eq!(u.components.len(), 2);
        for r in &u.reports {
            assert_eq!(r.worst(), 0.0, "{}", r.name);
            assert!(r.exact());
        }
        let mixed = u.reports.iter().find(|r| r.name == "1,1").unwrap();
        assert_eq!(mixed.route, TowerRoute::Composed);
        assert_eq!(mixed.stages[0].tower_length, 6);
        let gen = u.reports.iter().find(|r| r.name == "1,0").unwrap();
        assert_eq!(gen.route, TowerRoute::Direct);
    }

    #[test]
    fn s3_through_extension() {
        let g = GroupSpec::FiniteTable(FiniteGroup::symmetric(3));
        let u = rokhlin_action_universal(&g, 3, &Default::default()).unwrap();
        let ext = u.extension.as_ref().unwrap();
        assert_eq!(ext.index, 2);
        assert_eq!(u.reports.len(), 6);
        assert_eq!(u.worst_finite(), 0.0);
    }
}
