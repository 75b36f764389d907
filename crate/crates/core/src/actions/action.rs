use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;

use super::images::{ElementMap, FactorImages};
use crate::algebra::{Phase, UnitaryMatrix, C64, ONE};
use crate::error::{Error, Result};
use crate::groups::{induce, BlockPartition, Element, FactorSequence, FiniteGroup, GroupSpec, Real, Representation};

/// One flow slot on the universal pattern: factor `M_n` carries
/// `diag(e^{2πi θ_n j v_i})_{j=1..n}` for generator `i`, with `θ_n = 1` for odd `n`
/// and `θ_n = θ` for even `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSlot {
    pub theta: Real,
    pub values: Vec<Rational64>,
}

impl FlowSlot {
    pub fn factor(&self, n: usize) -> FactorImages {
        let theta_n = if n % 2 == 1 { Real::Rational(Rational64::from_integer(1)) } else { self.theta };
        let phases = self
            .values
            .iter()
            .map(|v| (1..=n as i64).map(|j| flow_phase(&theta_n, j, &Real::Rational(*v))).collect())
            .collect();
        FactorImages::DiagonalGenerators(Arc::new(phases))
    }
}

/// Phase `θ j r` in turns, exact when both `θ` and `r` are rational.
pub(crate) fn flow_phase(theta: &Real, j: i64, r: &Real) -> Phase {
    match (theta.as_rational(), r.as_rational()) {
        (Some(t), Some(v)) => Phase::rational(t * v * Rational64::from_integer(j)),
        (_, Some(v)) if v.is_zero() => Phase::ONE,
        _ => Phase::approx(theta.value() * j as f64 * r.value()),
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Source {
    Periodic { prefix: Vec<FactorImages>, period: Vec<FactorImages> },
    Levels(Vec<FactorImages>),
    Slots(Vec<FlowSlot>),
    /// Round-robin merge; components with `Some(i)` are pulled back along a direct-sum coordinate.
    Interleave(Vec<(ProductAction, Option<usize>)>),
    IdentityGaps(ProductAction),
    Regroup(ProductAction, BlockPartition),
    Induced { base: ProductAction, group: FiniteGroup, subgroup: Vec<usize> },
    Pullback { base: ProductAction, map: ElementMap },
    /// Blocks of `base` restricted to one diagonal entry per eigenvalue class of `element`.
    CutDown { base: ProductAction, element: Element, k: u64, blocks: Vec<(usize, usize)> },
}

#[derive(Debug)]
struct ActionData {
    group: GroupSpec,
    factors: FactorSequence,
    source: Source,
    label: String,
}

/// Product type action `⊗_l Ad(α_l)` on `⊗_l M_{n_l}`, generated one factor at a time.
#[derive(Clone, Debug)]
pub struct ProductAction {
    data: Arc<ActionData>,
}

/// Image of one element at a finite stage.
#[derive(Clone, Debug)]
pub struct StageUnitary {
    pub stage: usize,
    pub dims: Vec<usize>,
    pub unitary: UnitaryMatrix,
}

impl ProductAction {
    pub(crate) fn from_source(group: GroupSpec, factors: FactorSequence, source: Source, label: impl Into<String>) -> Self {
        ProductAction { data: Arc::new(ActionData { group, factors, source, label: label.into() }) }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.data.group
    }

    pub fn factors(&self) -> &FactorSequence {
        &self.data.factors
    }

    pub fn label(&self) -> &str {
        &self.data.label
    }

    pub fn relabel(&self, label: impl Into<String>) -> Self {
        let d = &self.data;
        Self::from_source(d.group.clone(), d.factors.clone(), d.source.clone(), label)
    }

    /// Number of available factors, `None` when unbounded.
    pub fn depth(&self) -> Option<usize> {
        self.data.factors.len()
    }

    pub(crate) fn source(&self) -> &Source {
        &self.data.source
    }

    /// Factor images at 0-based position `l`.
    pub fn factor(&self, l: usize) -> Result<FactorImages> {
        if let Some(d) = self.depth() {
            if l >= d {
                return Err(Error::StageExhausted { requested: l + 1, available: d });
            }
        }
        match &self.data.source {
            Source::Periodic { prefix, period } => Ok(if l < prefix.len() {
                prefix[l].clone()
            } else {
                period[(l - prefix.len()) % period.len()].clone()
            }),
            // levels past the given ones act trivially
            Source::Levels(v) => Ok(match v.get(l) {
                Some(f) => f.clone(),
                None => FactorImages::Identity(self.data.factors.size(l)? as usize),
            }),
            Source::Slots(slots) => Ok(slots[l % slots.len()].factor(l / slots.len() + 2)),
            Source::Interleave(parts) => {
                let (a, coord) = &parts[l % parts.len()];
                let inner = a.factor(l / parts.len())?;
                Ok(match coord {
                    None => inner,
                    Some(i) => FactorImages::Pullback {
                        inner: Box::new(inner),
                        map: ElementMap::Component(*i),
                        inner_group: Arc::new(a.group().clone()),
                    },
                })
            }
            Source::IdentityGaps(base) => {
                let n = l + 2;
                for (range, size) in increasing_blocks(base) {
                    let (range, size) = (range?, size);
                    if size == n {
                        return Ok(FactorImages::Kron(range.map(|i| base.factor(i)).collect::<Result<_>>()?));
                    }
                    if size > n {
                        return Ok(FactorImages::Identity(n));
                    }
                }
                Err(Error::StageExhausted { requested: l + 1, available: l })
            }
            Source::Regroup(base, partition) => {
                let (a, b) = partition.range(l);
                Ok(FactorImages::Kron((a..b).map(|i| base.factor(i)).collect::<Result<_>>()?))
            }
            Source::Induced { base, group, subgroup } => {
                let f = base.factor(l)?;
                let hg = base.group();
                let images: Vec<UnitaryMatrix> =
                    (0..subgroup.len()).map(|i| f.image(hg, &Element::Index(i))).collect::<Result<_>>()?;
                let rho = Representation::new(&group.subgroup_table(subgroup)?, images)?;
                let ind = induce(&rho, group, subgroup)?;
                Ok(FactorImages::Table(Arc::new(ind.images().to_vec())))
            }
            Source::Pullback { base, map } => Ok(FactorImages::Pullback {
                inner: Box::new(base.factor(l)?),
                map: map.clone(),
                inner_group: Arc::new(base.group().clone()),
            }),
            Source::CutDown { base, element, k, blocks } => crate::transforms::cut_down_factor(base, element, *k, blocks, l),
        }
    }

    /// Tensor product of the factors in `[start, end)`.
    pub fn block(&self, start: usize, end: usize) -> Result<FactorImages> {
        Ok(FactorImages::Kron((start..end).map(|i| self.factor(i)).collect::<Result<_>>()?))
    }

    /// Verify the homomorphism property on the first `count` factors.
    pub fn verify(&self, count: usize) -> Result<()> {
        let n = self.depth().map_or(count, |d| d.min(count));
        for l in 0..n {
            let f = self.factor(l)?;
            if f.dim() as u64 != self.data.factors.size(l)? {
                return Err(Error::DimensionMismatch { expected: self.data.factors.size(l)? as usize, found: f.dim() });
            }
            f.verify(self.group())?;
        }
        Ok(())
    }

    /// Normalized trace of the stage-`stage` image of `g`, factor by factor.
    pub fn stage_trace(&self, g: &Element, stage: usize) -> Result<C64> {
        self.group().validate(g)?;
        (0..stage).try_fold(ONE, |acc, l| Ok(acc * self.factor(l)?.normalized_trace(self.group(), g)?))
    }
}

/// Greedy regrouping of consecutive factors into blocks with strictly increasing sizes.
pub(crate) fn increasing_blocks(base: &ProductAction) -> impl Iterator<Item = (Result<std::ops::Range<usize>>, usize)> + '_ {
    let mut start = 0usize;
    let mut prev = 1usize;
    std::iter::from_fn(move || {
        let mut end = start;
        let mut size = 1usize;
        while size <= prev {
            if base.depth().is_some_and(|d| end >= d) {
                return None;
            }
            match base.data.factors.size(end) {
                Ok(s) => size = size.saturating_mul(s as usize),
                Err(e) => return Some((Err(e), 0)),
            }
            end += 1;
        }
        let out = (Ok(start..end), size);
        start = end;
        prev = size;
        Some(out)
    })
}

/// `α_1(g) ⊗ ... ⊗ α_L(g)` as a dense unitary.
pub fn evaluate(a: &ProductAction, g: &Element, stage: usize) -> Result<StageUnitary> {
    a.group().validate(g)?;
    if let Some(d) = a.depth() {
        if stage > d {
            return Err(Error::StageExhausted { requested: stage, available: d });
        }
    }
    let dims: Vec<usize> = (0..stage).map(|l| a.factors().size(l).map(|s| s as usize)).collect::<Result<_>>()?;
    let mut u = UnitaryMatrix::identity(1);
    for l in 0..stage {
        u = u.kron(&a.factor(l)?.image(a.group(), g)?)?;
    }
    Ok(StageUnitary { stage, dims, unitary: u })
}

/// Diagonal phases of the stage image when every factor is diagonal.
pub fn stage_diagonal(a: &ProductAction, g: &Element, stage: usize) -> Result<Option<Vec<Phase>>> {
    a.block(0, stage)?.diagonal(a.group(), g)
}
