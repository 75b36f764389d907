use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::actions::{levels_action, FactorImages, ProductAction};
use crate::algebra::{Projection, MAX_EXACT_DIM};
use crate::error::{Error, Result};
use crate::groups::{BlockPartition, FactorSequence};
use crate::rokhlin::{
    best_cyclic_tower, tower_defects, EpsilonRule, RokhlinTower, StageCertificate, TowerMethod, TowerSchedule,
};

/// One level of a bump-up: `N = Q·S + r` with `S/N < 2^{-l}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BumpUpLevel {
    pub level: usize,
    /// Source factors `[source_start, source_end)` forming the block of size `S`.
    pub source_start: usize,
    pub source_end: usize,
    pub source_size: usize,
    /// Target factors `[target_start, target_end)` forming the block of size `N`.
    pub target_start: usize,
    pub target_end: usize,
    pub target_size: usize,
    pub quotient: usize,
    pub remainder: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BumpUpPlan {
    pub levels: Vec<BumpUpLevel>,
}

impl BumpUpPlan {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for l in &self.levels {
            out.serialize(l)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Target block lengths, in factors.
    pub fn target_blocks(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.target_end - l.target_start).collect()
    }
}

impl fmt::Display for BumpUpPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.levels {
            writeln!(
                f,
                "level {}: source factors {}..{} (S = {}), target factors {}..{} (N = {} = {}·{} + {})",
                l.level,
                l.source_start,
                l.source_end,
                l.source_size,
                l.target_start,
                l.target_end,
                l.target_size,
                l.quotient,
                l.source_size,
                l.remainder
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BumpUp {
    pub action: ProductAction,
    pub plan: BumpUpPlan,
    /// Transported towers with recomputed defects against `ε′_l = 2^{-(l-1)}`.
    pub schedule: TowerSchedule,
}

/// Largest number of target factors merged into one level.
pub const MAX_TARGET_BLOCK: usize = 64;

/// Smallest block of `target` starting at `start` with `size·2^level < N`.
fn target_block(target: &FactorSequence, start: usize, size: usize, level: usize) -> Result<(usize, usize)> {
    let bound = (size as u128) << level.min(100);
    let mut n: u128 = 1;
    let mut end = start;
    while n <= bound {
        if end - start >= MAX_TARGET_BLOCK {
            return Err(Error::Infeasible(format!("level {level}: no block of at most {MAX_TARGET_BLOCK} target factors")));
        }
        n *= target.size(end)? as u128;
        end += 1;
        if n > MAX_EXACT_DIM as u128 {
            return Err(Error::Infeasible(format!("level {level}: target block exceeds the size limit {MAX_EXACT_DIM}")));
        }
    }
    Ok((end, n as usize))
}

/// Re-embed each certified level of `source` into a block of `target`.
///
/// Level `l` uses the source block of stage `l` of `schedule` (size `S_l`) and the
/// shortest following block of `target` with `S_l / N_l < 2^{-l}`; the level unitary
/// is `diag(U_l ⊗ 1_{Q_l}, 1_{r_l})`. Target factors after the last level carry the
/// identity. Towers are transported as `diag(p ⊗ 1_Q, 0_r)` and re-measured.
pub fn bump_up(source: &ProductAction, schedule: &TowerSchedule, target: &FactorSequence) -> Result<BumpUp> {
    target.validate()?;
    if !schedule.pass() {
        return Err(Error::Infeasible("source schedule is not certified".into()));
    }
    let k = schedule.order;
    let g = &schedule.element;
    let group = source.group();
    let mut levels = Vec::with_capacity(schedule.stages.len());
    let mut images = Vec::with_capacity(schedule.stages.len());
    let mut stages = Vec::with_capacity(schedule.stages.len());
    let mut epsilons = Vec::with_capacity(schedule.stages.len());
    let mut t = 0usize;
    for st in &schedule.stages {
        let l = st.stage;
        let s = usize::try_from(st.block_size).map_err(|_| Error::Infeasible("source block too large".into()))?;
        let (end, n) = target_block(target, t, s, l)?;
        let (q, r) = (n / s, n % s);
        levels.push(BumpUpLevel {
            level: l,
            source_start: st.start,
            source_end: st.end,
            source_size: s,
            target_start: t,
            target_end: end,
            target_size: n,
            quotient: q,
            remainder: r,
        });
        let block = source.block(st.start, st.end)?;
        let u = block.image(group, g)?;
        let tower = match (&st.tower, k) {
            (Some(tw), _) => tw.flattened(),
            (None, Some(k)) => best_cyclic_tower(&u, k, 1e-9)?,
            (None, None) => return Err(Error::InvalidArgument(format!("stage {l} has no tower to transport"))),
        };
        let moved: Vec<Projection> = tower.projections().iter().map(|p| p.corner(q, r)).collect();
        let moved = RokhlinTower::with_dim(n, moved, tower.is_cyclic())?;
        let level_u = u.corner(q, r)?;
        let defects = tower_defects(&moved, &level_u, &[])?;
        let epsilon = 2f64.powi(1 - l as i32);
        epsilons.push(epsilon);
        stages.push(StageCertificate {
            stage: l,
            start: levels.len() - 1,
            end: levels.len(),
            block_size: n as u128,
            tower_length: moved.len(),
            defects,
            epsilon,
            pass: defects.worst() <= epsilon,
            method: if k.is_some() { TowerMethod::Cyclic } else { TowerMethod::Arc },
            tower: Some(moved),
        });
        images.push(FactorImages::Corner { inner: Box::new(block), copies: q, remainder: r });
        t = end;
    }
    let blocks: Vec<usize> = levels.iter().map(|l| l.target_end - l.target_start).collect();
    let factors =
        FactorSequence::Regrouped { source: Box::new(target.clone()), partition: BlockPartition::new(blocks, vec![1])? };
    let action = levels_action(group.clone(), images, factors, format!("bump_up({})", source.label()));
    action.verify(levels.len().min(3))?;
    let failure = stages.iter().find(|s| !s.pass).map(|s| {
        format!("level {}: transported defect {:.3e} exceeds {:.3e}", s.stage, s.defects.worst(), s.epsilon)
    });
    let schedule = TowerSchedule {
        element: g.clone(),
        order: k,
        rule: EpsilonRule::Explicit(epsilons),
        stages,
        failure,
    };
    Ok(BumpUp { action, plan: BumpUpPlan { levels }, schedule })
}
