use std::sync::Arc;

use crate::actions::{FactorImages, ProductAction, Source};
use crate::algebra::Phase;
use crate::error::{Error, Result};
use crate::groups::{Element, FactorSequence};
use crate::rokhlin::TowerSchedule;

/// Longest continuation block searched past the certified blocks.
const MAX_CONTINUATION: usize = 64;

#[derive(Clone, Debug)]
pub struct CutDown {
    pub action: ProductAction,
    /// First certified stage (1-based) whose block has every eigenvalue class.
    pub l0: usize,
    /// Source factor ranges of the output factors that come from certified stages.
    pub blocks: Vec<(usize, usize)>,
}

fn classes(phases: &[Phase], k: u64) -> Result<Vec<Option<usize>>> {
    let mut first = vec![None; k as usize];
    for (i, p) in phases.iter().enumerate() {
        let j = p.root_class(k, 0.0).ok_or(Error::NotRootOfUnity { phase: p.turns(), k })?;
        first[j as usize].get_or_insert(i);
    }
    Ok(first)
}

fn block_diagonal(base: &ProductAction, g: &Element, start: usize, end: usize) -> Result<Vec<Phase>> {
    let block = base.block(start, end)?;
    for x in base.group().generators() {
        if block.diagonal(base.group(), &x)?.is_none() {
            return Err(Error::NotDiagonal(format!("factors {start}..{end}")));
        }
    }
    block
        .diagonal(base.group(), g)?
        .ok_or_else(|| Error::NotDiagonal(format!("factors {start}..{end}")))
}

/// Source range of output factor `l`: certified blocks first, then greedy blocks
/// that each contain every eigenvalue class.
fn continuation(base: &ProductAction, g: &Element, k: u64, blocks: &[(usize, usize)], l: usize) -> Result<(usize, usize)> {
    if let Some(&b) = blocks.get(l) {
        return Ok(b);
    }
    let mut start = blocks.last().map_or(0, |b| b.1);
    for m in blocks.len()..=l {
        let mut end = start;
        let range = loop {
            end += 1;
            if end - start > MAX_CONTINUATION {
                let missing = classes(&block_diagonal(base, g, start, end - 1)?, k)?.iter().position(|c| c.is_none());
                return Err(Error::MissingEigenClass { level: m + 1, class: missing.unwrap_or(0) as u64 });
            }
            if classes(&block_diagonal(base, g, start, end)?, k)?.iter().all(|c| c.is_some()) {
                break (start, end);
            }
        };
        if m == l {
            return Ok(range);
        }
        start = range.1;
    }
    unreachable!("loop returns at m == l")
}

/// Output factor `l` of a cut-down action.
pub(crate) fn cut_down_factor(
    base: &ProductAction,
    g: &Element,
    k: u64,
    blocks: &[(usize, usize)],
    l: usize,
) -> Result<FactorImages> {
    let (start, end) = continuation(base, g, k, blocks, l)?;
    let first = classes(&block_diagonal(base, g, start, end)?, k)?;
    let indices: Vec<usize> = first
        .iter()
        .enumerate()
        .map(|(j, c)| c.ok_or(Error::MissingEigenClass { level: l + 1, class: j as u64 }))
        .collect::<Result<_>>()?;
    Ok(FactorImages::Select { inner: Box::new(base.block(start, end)?), indices: Arc::new(indices) })
}

/// Restrict each certified block to one diagonal entry per eigenvalue class.
///
/// Output factor `j` keeps, for class `e^{2πij'/k}` in order `j' = 0..k`, the first
/// diagonal entry of the block in that class, so the generator acts on every output
/// factor as `diag(1, ω, …, ω^{k-1})`. Stages before `l0` are merged into the first
/// output factor; past the certified stages, blocks continue greedily until every
/// class appears.
pub fn cut_down(a: &ProductAction, schedule: &TowerSchedule) -> Result<CutDown> {
    let k = schedule.order.ok_or_else(|| Error::InvalidArgument("cut-down needs a finite-order schedule".into()))?;
    if !a.group().is_abelian() {
        return Err(Error::InvalidGroup("cut-down needs an abelian group".into()));
    }
    if !schedule.pass() {
        return Err(Error::Infeasible("schedule is not certified".into()));
    }
    let g = &schedule.element;
    let mut l0 = None;
    for st in &schedule.stages {
        let first = classes(&block_diagonal(a, g, st.start, st.end)?, k)?;
        match (l0, first.iter().position(|c| c.is_none())) {
            (None, None) => l0 = Some(st.stage),
            (Some(_), Some(j)) => return Err(Error::MissingEigenClass { level: st.stage, class: j as u64 }),
            _ => {}
        }
    }
    let l0 = l0.ok_or_else(|| Error::Infeasible("no certified block contains every eigenvalue class".into()))?;
    let mut blocks = vec![(0, schedule.stages[l0 - 1].end)];
    blocks.extend(schedule.stages[l0..].iter().map(|s| (s.start, s.end)));
    let source = Source::CutDown { base: a.clone(), element: g.clone(), k, blocks: blocks.clone() };
    let action = ProductAction::from_source(a.group().clone(), FactorSequence::constant(k), source, format!("cut_down({})", a.label()));
    action.verify(blocks.len().min(3))?;
    Ok(CutDown { action, l0, blocks })
}
