use std::io::Write;

use serde::{Deserialize, Serialize};

use super::cyclic::{arc_tower, best_cyclic_tower, census_trace_defect, class_census, convolve_census};
use super::tower::{tower_defects, RokhlinTower, TowerDefects};
use crate::actions::ProductAction;
use crate::algebra::{Phase, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::groups::{Element, Order};

/// Target defects `ε_l` for stages `l = 1, 2, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EpsilonRule {
    /// `ε_l = base^{-l}`.
    Geometric { base: f64 },
    /// Explicit values for stages `1..=len`.
    Explicit(Vec<f64>),
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule::Geometric { base: 2.0 }
    }
}

impl EpsilonRule {
    /// `ε_l` for a 1-based stage.
    pub fn epsilon(&self, l: usize) -> Result<f64> {
        match self {
            EpsilonRule::Geometric { base } => Ok(base.powi(-(l as i32))),
            EpsilonRule::Explicit(v) => {
                v.get(l.wrapping_sub(1)).copied().ok_or(Error::StageExhausted { requested: l, available: v.len() })
            }
        }
    }

    /// Check positivity and strict decrease on stages `1..=l_max`.
    pub fn validate(&self, l_max: usize) -> Result<()> {
        if let EpsilonRule::Geometric { base } = self {
            if !(*base > 1.0) {
                return Err(Error::ScheduleNotDecreasing);
            }
        }
        let mut prev = f64::INFINITY;
        for l in 1..=l_max {
            let e = self.epsilon(l)?;
            if !(e > 0.0 && e < prev) {
                return Err(Error::ScheduleNotDecreasing);
            }
            prev = e;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    /// Largest number of factors merged into one block.
    pub max_block_factors: usize,
    pub cluster_tol: f64,
    /// Tower length at stage `l` for elements of infinite order; `None` means `l + 1`.
    pub arc_length: Option<usize>,
    /// Blocks up to this size get a materialized tower even when the census suffices.
    pub materialize_limit: u128,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { max_block_factors: 12, cluster_tol: 1e-9, arc_length: None, materialize_limit: 256 }
    }
}

/// How a stage tower was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TowerMethod {
    /// Eigenvalue class census of an exact diagonal block; no matrices formed.
    Census,
    /// Matched eigenvector tuples.
    Cyclic,
    /// Fourier tower over snapped eigenphases.
    Arc,
}

#[derive(Clone, Debug)]
pub struct StageCertificate {
    /// 1-based stage.
    pub stage: usize,
    /// Factors `[start, end)` merged into this block.
    pub start: usize,
    pub end: usize,
    pub block_size: u128,
    pub tower_length: usize,
    pub defects: TowerDefects,
    pub epsilon: f64,
    pub pass: bool,
    pub method: TowerMethod,
    pub tower: Option<RokhlinTower>,
}

#[derive(Clone, Debug)]
pub struct TowerSchedule {
    pub element: Element,
    /// Tower length for finite order, `None` for infinite order.
    pub order: Option<u64>,
    pub rule: EpsilonRule,
    pub stages: Vec<StageCertificate>,
    /// Diagnostic for the first failing stage.
    pub failure: Option<String>,
}

impl TowerSchedule {
    pub fn pass(&self) -> bool {
        self.failure.is_none() && self.stages.iter().all(|s| s.pass)
    }

    /// Factor ranges of the certified blocks.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        self.stages.iter().map(|s| (s.start, s.end)).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "stage",
            "block_size",
            "tower_length",
            "ortho_defect",
            "shift_defect",
            "trace_defect",
            "epsilon",
            "pass",
        ])?;
        for s in &self.stages {
            out.write_record([
                s.stage.to_string(),
                s.block_size.to_string(),
                s.tower_length.to_string(),
                format!("{:.16e}", s.defects.orthogonality),
                format!("{:.16e}", s.defects.shift),
                format!("{:.16e}", s.defects.trace),
                format!("{:.16e}", s.epsilon),
                s.pass.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn block_size(a: &ProductAction, start: usize, end: usize) -> Result<u128> {
    (start..end).try_fold(1u128, |acc, l| Ok(acc.saturating_mul(a.factors().size(l)? as u128)))
}

/// Exact diagonal phases of every factor in the block, or `None`.
fn exact_diagonals(a: &ProductAction, g: &Element, start: usize, end: usize) -> Result<Option<Vec<Vec<Phase>>>> {
    let mut out = Vec::with_capacity(end - start);
    for l in start..end {
        match a.factor(l)?.diagonal(a.group(), g)? {
            Some(ph) if ph.iter().all(|p| p.is_exact()) => out.push(ph),
            _ => return Ok(None),
        }
    }
    Ok(Some(out))
}

struct Candidate {
    defects: TowerDefects,
    length: usize,
    method: TowerMethod,
    tower: Option<RokhlinTower>,
}

fn block_unitary(a: &ProductAction, g: &Element, start: usize, end: usize) -> Result<UnitaryMatrix> {
    a.block(start, end)?.image(a.group(), g)
}

fn finite_candidate(
    a: &ProductAction,
    g: &Element,
    k: u64,
    start: usize,
    end: usize,
    size: u128,
    opts: &CertifyOptions,
) -> Result<Candidate> {
    if let Some(diags) = exact_diagonals(a, g, start, end)? {
        if size > opts.materialize_limit {
            let mut census = vec![0u128; k as usize];
            census[0] = 1;
            for ph in &diags {
                census = convolve_census(&census, &class_census(ph, k, 0.0)?);
            }
            let (num, den) = census_trace_defect(&census);
            let defects = TowerDefects { trace: num as f64 / den as f64, exact: true, ..Default::default() };
            return Ok(Candidate { defects, length: k as usize, method: TowerMethod::Census, tower: None });
        }
    }
    let u = block_unitary(a, g, start, end)?;
    let t = best_cyclic_tower(&u, k, opts.cluster_tol)?;
    let defects = tower_defects(&t, &u, &[])?;
    Ok(Candidate { defects, length: t.len(), method: TowerMethod::Cyclic, tower: Some(t) })
}

fn arc_candidate(a: &ProductAction, g: &Element, len: usize, start: usize, end: usize, opts: &CertifyOptions) -> Result<Candidate> {
    let u = block_unitary(a, g, start, end)?;
    let t = arc_tower(&u, len, opts.cluster_tol)?;
    let defects = tower_defects(&t, &u, &[])?;
    Ok(Candidate { defects, length: len, method: TowerMethod::Arc, tower: Some(t) })
}

/// Certify Rokhlin towers for `g` stage by stage.
///
/// Stage `l` starts where stage `l − 1` ended and merges factors one at a time
/// until the tower for the block unitary has all defects at most `ε_l`. Reaching
/// `max_block_factors` (or the dense size limit) without meeting `ε_l` ends the
/// schedule with a failing stage. `k` must divide the order of `g` (an action need
/// not be faithful); `None` selects arc towers for an element of infinite order.
pub fn certify_schedule(
    a: &ProductAction,
    g: &Element,
    k: Option<u64>,
    l_max: usize,
    rule: &EpsilonRule,
    opts: &CertifyOptions,
) -> Result<TowerSchedule> {
    rule.validate(l_max)?;
    let order = a.group().order_of(g)?;
    match (k, &order) {
        (Some(0), _) => return Err(Error::InvalidArgument("tower length must be positive".into())),
        (Some(k), Order::Finite(m)) if m % k != 0 => {
            return Err(Error::InvalidArgument(format!("tower length {k} does not divide the order {m}")));
        }
        (Some(_), Order::Infinite) => {
            return Err(Error::InvalidArgument("element of infinite order needs arc towers".into()));
        }
        (None, Order::Finite(m)) => {
            return Err(Error::InvalidArgument(format!("element has finite order {m}")));
        }
        _ => {}
    }
    if opts.max_block_factors == 0 {
        return Err(Error::InvalidArgument("block cap must be positive".into()));
    }
    let mut schedule = TowerSchedule { element: g.clone(), order: k, rule: rule.clone(), stages: Vec::new(), failure: None };
    let mut start = 0usize;
    for l in 1..=l_max {
        let epsilon = rule.epsilon(l)?;
        let mut end = start;
        loop {
            end += 1;
            if let Some(d) = a.depth() {
                if end > d {
                    return Err(Error::StageExhausted { requested: end, available: d });
                }
            }
            let size = block_size(a, start, end)?;
            let candidate = match k {
                Some(k) => finite_candidate(a, g, k, start, end, size, opts),
                None => arc_candidate(a, g, opts.arc_length.unwrap_or(l + 1), start, end, opts),
            };
            let candidate = match candidate {
                Ok(c) => c,
                Err(Error::DimensionTooLarge { dim, limit }) => {
                    schedule.failure =
                        Some(format!("stage {l}: block of size {dim} exceeds the size limit {limit} before meeting {epsilon:.3e}"));
                    return Ok(schedule);
                }
                Err(e) => return Err(e),
            };
            let pass = candidate.defects.worst() <= epsilon;
            let capped = end - start >= opts.max_block_factors;
            if pass || capped {
                schedule.stages.push(StageCertificate {
                    stage: l,
                    start,
                    end,
                    block_size: size,
                    tower_length: candidate.length,
                    defects: candidate.defects,
                    epsilon,
                    pass,
                    method: candidate.method,
                    tower: candidate.tower,
                });
                if !pass {
                    schedule.failure = Some(format!(
                        "stage {l}: worst defect {:.3e} exceeds {epsilon:.3e} after merging {} factors",
                        candidate.defects.worst(),
                        end - start
                    ));
                    return Ok(schedule);
                }
                break;
            }
        }
        start = end;
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{explicit_action, identity_action, regular_action};
    use crate::actions::FactorImages;
    use crate::groups::{FactorSequence, FiniteGroup, GroupSpec};
    use std::sync::Arc;

    #[test]
    fn regular_z2_passes_exactly() {
        let a = regular_action(&FiniteGroup::cyclic(2));
        let s = certify_schedule(&a, &Element::Index(1), Some(2), 6, &EpsilonRule::default(), &Default::default()).unwrap();
        assert!(s.pass());
        assert_eq!(s.stages.len(), 6);
        for st in &s.stages {
            assert_eq!(st.end - st.start, 1);
            assert_eq!(st.defects.worst(), 0.0);
            assert!(st.defects.exact);
        }
    }

    #[test]
    fn trivial_action_fails_at_stage_one() {
        let g = GroupSpec::cyclic(2);
        let a = identity_action(g, FactorSequence::constant(2)).unwrap();
        let opts = CertifyOptions { max_block_factors: 3, ..Default::default() };
        let s = certify_schedule(&a, &Element::Index(1), Some(2), 3, &EpsilonRule::default(), &opts).unwrap();
        assert!(!s.pass());
        assert_eq!(s.stages.len(), 1);
        assert_eq!(s.stages[0].defects.trace, 1.0);
        assert!(s.failure.is_some());
    }

    fn sign_action(signs: &[i64]) -> ProductAction {
        let g = FiniteGroup::cyclic(2);
        let ph: Vec<Phase> = signs.iter().map(|&s| if s < 0 { Phase::exact(1, 2) } else { Phase::ONE }).collect();
        let f = FactorImages::Table(Arc::new(vec![UnitaryMatrix::identity(ph.len()), UnitaryMatrix::diagonal(&ph)]));
        explicit_action(GroupSpec::FiniteTable(g), vec![], vec![f]).unwrap()
    }

    #[test]
    fn unbalanced_signs_need_larger_blocks() {
        let a = sign_action(&[1, 1, -1]);
        let s = certify_schedule(&a, &Element::Index(1), Some(2), 3, &EpsilonRule::default(), &Default::default()).unwrap();
        assert!(s.pass(), "{:?}", s.failure);
        // census oracle: one factor has counts (2,1), defect 1/3 ≤ 1/2
        assert_eq!(s.stages[0].end, 1);
        assert!((s.stages[0].defects.trace - 1.0 / 3.0).abs() < 1e-15);
        // stage 2 needs 1/4: two factors give (5,4) → 1/9
        assert_eq!(s.stages[1].end - s.stages[1].start, 2);
    }

    #[test]
    fn census_matches_materialized_tower() {
        let a = sign_action(&[1, 1, -1]);
        let g = Element::Index(1);
        for n in 1..=4 {
            let dense = finite_candidate(&a, &g, 2, 0, n, 3u128.pow(n as u32), &CertifyOptions { materialize_limit: u128::MAX, ..Default::default() }).unwrap();
            let census = finite_candidate(&a, &g, 2, 0, n, 3u128.pow(n as u32), &CertifyOptions { materialize_limit: 0, ..Default::default() }).unwrap();
            assert_eq!(census.method, TowerMethod::Census);
            assert!((dense.defects.trace - census.defects.trace).abs() < 1e-15);
            assert_eq!(dense.defects.shift, 0.0);
        }
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(EpsilonRule::Explicit(vec![0.5, 0.5]).validate(2).is_err());
        assert!(EpsilonRule::Explicit(vec![0.5, -0.1]).validate(2).is_err());
        assert!(EpsilonRule::Geometric { base: 1.0 }.validate(1).is_err());
        let a = regular_action(&FiniteGroup::cyclic(2));
        let r = certify_schedule(&a, &Element::Index(1), Some(3), 1, &EpsilonRule::default(), &Default::default());
        assert!(r.is_err());
        let r = certify_schedule(&a, &Element::Index(1), None, 1, &EpsilonRule::default(), &Default::default());
        assert!(r.is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let a = regular_action(&FiniteGroup::cyclic(2));
        let s = certify_schedule(&a, &Element::Index(1), Some(2), 2, &EpsilonRule::default(), &Default::default()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "stage,block_size,tower_length,ortho_defect,shift_defect,trace_defect,epsilon,pass");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,2,2,0.0000000000000000e0"));
        assert!(lines[2].ends_with("true"));
    }
}
