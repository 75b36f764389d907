use std::sync::Arc;

use num_rational::Rational64;

use super::action::{flow_phase, increasing_blocks, FlowSlot, ProductAction, Source};
use super::images::{ElementMap, FactorImages};
use crate::algebra::UnitaryMatrix;
use crate::error::{Error, Result};
use crate::groups::{
    map_embedding, regular_representation, BlockPartition, FactorSequence, FiniteGroup, GroupSpec, Real,
};

/// Number of factors checked for the homomorphism property at construction.
const VERIFY_FACTORS: usize = 4;

/// `diag(e^{2πi θ_n l r})_{l=1..n}` with `θ_n = 1` for odd `n` and `θ` for even `n`.
pub fn diagonal_flow(n: usize, theta: Real, r: Real) -> UnitaryMatrix {
    let theta_n = if n % 2 == 1 { Real::Rational(Rational64::from_integer(1)) } else { theta };
    UnitaryMatrix::diagonal(&(1..=n as i64).map(|l| flow_phase(&theta_n, l, &r)).collect::<Vec<_>>())
}

/// Identity action of `group` on the given factors.
pub fn identity_action(group: GroupSpec, factors: FactorSequence) -> Result<ProductAction> {
    factors.validate()?;
    let n = factors.len().unwrap_or(1).max(1);
    let prefix = factors.prefix(n.min(64))?;
    if let FactorSequence::Pattern { prefix: p, period } = &factors {
        let mk = |v: &Vec<u64>| v.iter().map(|&s| FactorImages::Identity(s as usize)).collect();
        return Ok(ProductAction::from_source(group, factors.clone(), Source::Periodic { prefix: mk(p), period: mk(period) }, "identity"));
    }
    if factors.len().is_none() {
        return Err(Error::InvalidSequence("identity action needs a prefix or periodic pattern".into()));
    }
    let levels = prefix.iter().map(|&s| FactorImages::Identity(s as usize)).collect();
    Ok(ProductAction::from_source(group, factors, Source::Levels(levels), "identity"))
}

/// Left regular representation on `M_{|G|}^{⊗∞}`; the trivial group acts by the identity on `M_2^{⊗∞}`.
pub fn regular_action(g: &FiniteGroup) -> ProductAction {
    let group = GroupSpec::FiniteTable(g.clone());
    if g.order() == 1 {
        return identity_action(group, FactorSequence::constant(2)).expect("constant pattern");
    }
    let lambda = regular_representation(g);
    let period = vec![FactorImages::Table(Arc::new(lambda.images().to_vec()))];
    ProductAction::from_source(
        group,
        FactorSequence::constant(g.order() as u64),
        Source::Periodic { prefix: vec![], period },
        format!("regular(order {})", g.order()),
    )
}

/// Regular action of a finite group given in any form, read through its finite model.
pub fn regular_action_spec(group: &GroupSpec) -> Result<ProductAction> {
    if let GroupSpec::FiniteTable(g) = group {
        return Ok(regular_action(g));
    }
    let (fg, els) = group.finite_model().ok_or_else(|| Error::InvalidGroup("regular action needs a finite group".into()))?;
    let base = regular_action(&fg);
    pullback(&base, group.clone(), ElementMap::Enumerate(Arc::new(els)))
}

/// Compose every factor of `a` with a homomorphism from `group` into `a`'s group.
pub fn pullback(a: &ProductAction, group: GroupSpec, map: ElementMap) -> Result<ProductAction> {
    let inner_group = Arc::new(a.group().clone());
    let wrap = |f: FactorImages| FactorImages::Pullback { inner: Box::new(f), map: map.clone(), inner_group: inner_group.clone() };
    let source = match a.source() {
        Source::Periodic { prefix, period } => Source::Periodic {
            prefix: prefix.iter().cloned().map(wrap).collect(),
            period: period.iter().cloned().map(wrap).collect(),
        },
        _ => Source::Pullback { base: a.clone(), map },
    };
    let out = ProductAction::from_source(group, a.factors().clone(), source, format!("pullback({})", a.label()));
    out.verify(VERIFY_FACTORS)?;
    Ok(out)
}

/// Periodic action with factors `diag(1, φ_g)` for each nontrivial `g`.
pub fn map_embed_action(g: &FiniteGroup) -> ProductAction {
    let group = GroupSpec::FiniteTable(g.clone());
    if g.order() == 1 {
        return identity_action(group, FactorSequence::constant(2)).expect("constant pattern");
    }
    let me = map_embedding(g);
    let period: Vec<FactorImages> =
        me.coords.iter().map(|(_, psi)| FactorImages::Table(Arc::new(psi.images().to_vec()))).collect();
    let sizes = me.coords.iter().map(|(_, psi)| psi.dim() as u64).collect();
    ProductAction::from_source(
        group,
        FactorSequence::periodic(sizes),
        Source::Periodic { prefix: vec![], period },
        format!("map-embed(order {})", g.order()),
    )
}

/// Explicit per-factor images: a finite prefix followed by an optional repeating period.
pub fn explicit_action(group: GroupSpec, prefix: Vec<FactorImages>, period: Vec<FactorImages>) -> Result<ProductAction> {
    let sizes = |v: &[FactorImages]| v.iter().map(|f| f.dim() as u64).collect::<Vec<_>>();
    let factors = if period.is_empty() {
        FactorSequence::Prefix(sizes(&prefix))
    } else {
        FactorSequence::Pattern { prefix: sizes(&prefix), period: sizes(&period) }
    };
    factors.validate()?;
    let total = prefix.len() + period.len();
    let a = ProductAction::from_source(group, factors, Source::Periodic { prefix, period }, "explicit");
    a.verify(total)?;
    Ok(a)
}

fn require_abelian(group: &GroupSpec) -> Result<&crate::groups::AbelianGroup> {
    match group {
        GroupSpec::AbelianPresented(a) => Ok(a),
        _ => Err(Error::InvalidGroup("flow actions need a presented abelian group".into())),
    }
}

/// Flow action on the universal pattern: generator `i` acts by `v_n(r_i)` in every factor.
pub fn flow_action(group: &GroupSpec, theta: Real, r: Vec<Rational64>) -> Result<ProductAction> {
    let a = require_abelian(group)?;
    if r.len() != a.rank() {
        return Err(Error::DimensionMismatch { expected: a.rank(), found: r.len() });
    }
    let slot = FlowSlot { theta, values: r };
    let out = ProductAction::from_source(group.clone(), FactorSequence::Universal, Source::Slots(vec![slot]), format!("flow(theta {theta})"));
    out.verify(VERIFY_FACTORS)?;
    Ok(out)
}

/// Flow slots realizing the embedding of the group into `⊕(Q ⊕ Q/Z)`.
///
/// Rational coordinates use an irrational angle (a generator's own `theta` when
/// given, else `theta`); torsion coordinates use angle 1 so their images are exact.
pub fn abelian_slots(group: &GroupSpec, theta: Real) -> Result<Vec<FlowSlot>> {
    let a = require_abelian(group)?;
    let mut slots = Vec::new();
    for (c, torsion) in a.slots() {
        let values: Vec<Rational64> = a
            .generators()
            .iter()
            .map(|g| {
                let (q, r) = g.frame.get(c);
                if torsion {
                    r
                } else {
                    q
                }
            })
            .collect();
        let slot_theta = if torsion {
            Real::Rational(Rational64::from_integer(1))
        } else {
            let t = a
                .generators()
                .iter()
                .find(|g| !g.frame.get(c).0.is_zero_ratio() && g.theta.is_some())
                .and_then(|g| g.theta)
                .unwrap_or(theta);
            if !t.is_known_irrational() {
                return Err(Error::RationalTheta);
            }
            t
        };
        slots.push(FlowSlot { theta: slot_theta, values });
    }
    Ok(slots)
}

trait ZeroRatio {
    fn is_zero_ratio(&self) -> bool;
}

impl ZeroRatio for Rational64 {
    fn is_zero_ratio(&self) -> bool {
        *self.numer() == 0
    }
}

/// Product type action of a presented abelian group on the universal UHF algebra,
/// interleaving one flow per coordinate slot.
pub fn abelian_action(group: &GroupSpec, theta: Real) -> Result<ProductAction> {
    let slots = abelian_slots(group, theta)?;
    if slots.is_empty() {
        return identity_action(group.clone(), FactorSequence::constant(2));
    }
    let n = slots.len();
    let factors = if n == 1 { FactorSequence::Universal } else { FactorSequence::Interleave(vec![FactorSequence::Universal; n]) };
    let out = ProductAction::from_source(group.clone(), factors, Source::Slots(slots), format!("abelian(theta {theta})"));
    out.verify(2 * n)?;
    Ok(out)
}

/// Action using a single flow slot of [`abelian_slots`].
pub fn slot_action(group: &GroupSpec, slot: FlowSlot) -> Result<ProductAction> {
    let out = ProductAction::from_source(group.clone(), FactorSequence::Universal, Source::Slots(vec![slot]), "flow slot");
    out.verify(2)?;
    Ok(out)
}

/// Tensor product of actions, factors interleaved.
///
/// Equal groups act diagonally; different groups give an action of their direct sum.
pub fn tensor_actions(parts: &[ProductAction]) -> Result<ProductAction> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("nothing to tensor".into()));
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    let same = parts.iter().all(|p| p.group() == parts[0].group());
    let factors = FactorSequence::Interleave(parts.iter().map(|p| p.factors().clone()).collect());
    let label = format!("tensor({})", parts.iter().map(|p| p.label()).collect::<Vec<_>>().join(", "));
    if same {
        let src = Source::Interleave(parts.iter().map(|p| (p.clone(), None)).collect());
        return Ok(ProductAction::from_source(parts[0].group().clone(), factors, src, label));
    }
    let group = GroupSpec::DirectSum(parts.iter().map(|p| p.group().clone()).collect());
    let src = Source::Interleave(parts.iter().enumerate().map(|(i, p)| (p.clone(), Some(i))).collect());
    Ok(ProductAction::from_source(group, factors, src, label))
}

/// `copies` interleaved copies of `a`; witness sequences survive in each copy.
pub fn tensor_power(a: &ProductAction, copies: usize) -> Result<ProductAction> {
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be positive".into()));
    }
    let parts = vec![a.clone(); copies];
    Ok(tensor_actions(&parts)?.relabel(format!("tensor_power({}, {copies})", a.label())))
}

/// Regroup `a` into blocks of strictly increasing size and place block `j` at
/// position `size_j` of the universal pattern; other positions carry the identity.
pub fn interleave_identity(a: &ProductAction) -> Result<ProductAction> {
    let factors = match a.depth() {
        None => FactorSequence::Universal,
        Some(_) => {
            let last = increasing_blocks(a).map(|(r, s)| r.map(|_| s)).collect::<Result<Vec<_>>>()?;
            let top = *last.last().ok_or_else(|| Error::InvalidArgument("action has no factors".into()))?;
            FactorSequence::Prefix((2..=top as u64).collect())
        }
    };
    Ok(ProductAction::from_source(a.group().clone(), factors, Source::IdentityGaps(a.clone()), format!("interleave_identity({})", a.label())))
}

/// Increasing blocks used by [`interleave_identity`], as `(start, end, size)`.
pub fn identity_gap_blocks(a: &ProductAction, count: usize) -> Result<Vec<(usize, usize, usize)>> {
    increasing_blocks(a).take(count).map(|(r, s)| r.map(|r| (r.start, r.end, s))).collect()
}

/// Regroup consecutive factors of `a` according to `partition`.
pub fn regroup_action(a: &ProductAction, partition: BlockPartition) -> Result<ProductAction> {
    let factors = FactorSequence::Regrouped { source: Box::new(a.factors().clone()), partition: partition.clone() };
    factors.validate()?;
    Ok(ProductAction::from_source(a.group().clone(), factors, Source::Regroup(a.clone(), partition), format!("regroup({})", a.label())))
}

/// Action given level by level.
pub(crate) fn levels_action(group: GroupSpec, levels: Vec<FactorImages>, factors: FactorSequence, label: String) -> ProductAction {
    ProductAction::from_source(group, factors, Source::Levels(levels), label)
}

/// Induced action: each factor of `base` (an action of the subgroup `h`) induced up to `g`.
pub fn induced_action(base: &ProductAction, g: &FiniteGroup, h: &[usize]) -> Result<ProductAction> {
    let mut sub = h.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if !g.is_subgroup(&sub) {
        return Err(Error::NotSubgroup(format!("{sub:?}")));
    }
    if *base.group() != GroupSpec::FiniteTable(g.subgroup_table(&sub)?) {
        return Err(Error::IncompatibleGroups("action is not defined on the subgroup table".into()));
    }
    let index = (g.order() / sub.len()) as u64;
    let factors = FactorSequence::Product(vec![base.factors().clone(), FactorSequence::constant(index)]);
    let out = ProductAction::from_source(
        GroupSpec::FiniteTable(g.clone()),
        factors,
        Source::Induced { base: base.clone(), group: g.clone(), subgroup: sub },
        format!("induced({})", base.label()),
    );
    out.verify(2)?;
    Ok(out)
}
