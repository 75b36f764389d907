use std::io::Write;

use serde::Serialize;

use crate::algebra::UnitaryMatrix;
use crate::error::Result;
use crate::groups::Element;
use crate::rokhlin::{best_cyclic_tower, tensor_tower, RokhlinTower, TowerDefects, TowerMode};

/// How the tower of one element was assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TowerRoute {
    /// Identity element: the single projection 1.
    Identity,
    /// Cyclic tower of a single nontrivial factor.
    Direct,
    /// Cyclic tower of the quotient factor, other factors as padding.
    Quotient,
    /// Towers of several factors combined with compose-k.
    Composed,
    /// Measured tower for an element of infinite order.
    Arc,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTower {
    pub stage: usize,
    /// Dimension of the block carrying the tower (padding excluded).
    pub block_size: usize,
    pub tower_length: usize,
    pub defects: TowerDefects,
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementTowerReport {
    #[serde(skip)]
    pub element: Element,
    pub name: String,
    pub order: Option<u64>,
    pub route: TowerRoute,
    pub stages: Vec<StageTower>,
}

impl ElementTowerReport {
    pub fn worst(&self) -> f64 {
        self.stages.iter().map(|s| s.defects.worst()).fold(0.0, f64::max)
    }

    pub fn exact(&self) -> bool {
        self.stages.iter().all(|s| s.defects.exact)
    }
}

/// CSV of all stages of all reports.
pub fn write_reports_csv<W: Write>(reports: &[ElementTowerReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "element",
        "order",
        "route",
        "stage",
        "block_size",
        "tower_length",
        "ortho_defect",
        "shift_defect",
        "trace_defect",
    ])?;
    for r in reports {
        for s in &r.stages {
            out.write_record([
                r.name.clone(),
                r.order.map_or("inf".into(), |k| k.to_string()),
                format!("{:?}", r.route),
                s.stage.to_string(),
                s.block_size.to_string(),
                s.tower_length.to_string(),
                format!("{:.16e}", s.defects.orthogonality),
                format!("{:.16e}", s.defects.shift),
                format!("{:.16e}", s.defects.trace),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Least `d` dividing `bound` with `u^d = 1`.
pub(crate) fn unitary_order(u: &UnitaryMatrix, bound: u64) -> Result<u64> {
    let one = UnitaryMatrix::identity(u.dim());
    for d in (1..=bound).filter(|d| bound % d == 0) {
        let p = u.pow(d as i64)?;
        let trivial = match p.exact() {
            Some(_) => p == one,
            None => p.matrix().approx_eq(one.matrix(), 1e-9),
        };
        if trivial {
            return Ok(d);
        }
    }
    Ok(bound)
}

/// Tower for `u_1 ⊗ … ⊗ u_m`, each `u_i` of order dividing `bound`, built by folding
/// compose-k: with `U` the product so far and `k` the order of the next factor `u`,
/// a tower for `U^k` and the cyclic tower of `u` give a tower of length `k·ord(U^k)`.
pub(crate) fn composed_tower(units: &[UnitaryMatrix], bound: u64) -> Result<(RokhlinTower, UnitaryMatrix)> {
    let mut acc = units[0].clone();
    if units.len() == 1 {
        let tower = best_cyclic_tower(&acc, unitary_order(&acc, bound)?, 1e-9)?;
        return Ok((tower, acc));
    }
    let mut tower = None;
    for u in &units[1..] {
        let k = unitary_order(u, bound)?;
        let tb = best_cyclic_tower(u, k, 1e-9)?;
        let power = acc.pow(k as i64)?;
        let ta = best_cyclic_tower(&power, unitary_order(&power, bound)?, 1e-9)?;
        tower = Some(tensor_tower(&ta, &tb, TowerMode::ComposeK { base: &acc })?);
        acc = acc.kron(u)?;
    }
    Ok((tower.expect("at least two factors"), acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Phase;
    use crate::rokhlin::tower_defects;

    #[test]
    fn two_and_three_compose_to_six() {
        let a = UnitaryMatrix::diagonal(&[Phase::ONE, Phase::exact(1, 2)]);
        let b = UnitaryMatrix::diagonal(&[Phase::ONE, Phase::exact(1, 3), Phase::exact(2, 3)]);
        let (t, u) = composed_tower(&[a, b], 6).unwrap();
        assert_eq!(t.len(), 6);
        let d = tower_defects(&t, &u, &[]).unwrap();
        assert_eq!(d.worst(), 0.0);
        assert!(d.exact);
    }

    #[test]
    fn equal_orders_compose_to_lcm() {
        let a = UnitaryMatrix::diagonal(&[Phase::ONE, Phase::exact(1, 2)]);
        let (t, u) = composed_tower(&[a.clone(), a], 2).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(tower_defects(&t, &u, &[]).unwrap().worst(), 0.0);
        assert_eq!(unitary_order(&u, 2).unwrap(), 2);
    }
}
