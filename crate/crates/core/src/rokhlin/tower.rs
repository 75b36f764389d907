use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebra::{ComplexMatrix, ExactMatrix, Projection, UnitaryMatrix};
use crate::error::{Error, Result};

/// Ordered family of mutually orthogonal projections `1_left ⊗ p_i ⊗ 1_right`.
///
/// The projections are stored in the local factor `M_n`; the identity padding
/// on either side is kept symbolic so towers in large tensor products stay small.
#[derive(Clone, Debug)]
pub struct RokhlinTower {
    projections: Vec<Projection>,
    local: usize,
    cyclic: bool,
    left: usize,
    right: usize,
}

/// Measured defects of a tower against a unitary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TowerDefects {
    /// `max_{i≠j} ‖p_i p_j‖`.
    pub orthogonality: f64,
    /// `max_i ‖U p_i U* − p_{i+1}‖`, wrapping around for cyclic towers.
    pub shift: f64,
    /// `|1 − τ(Σ p_i)|`.
    pub trace: f64,
    /// `max ‖[p_i, a]‖` over the supplied finite set.
    pub commutation: f64,
    /// Whether every defect was decided in exact arithmetic.
    pub exact: bool,
}

impl TowerDefects {
    /// Largest of the orthogonality, shift and trace defects.
    pub fn worst(&self) -> f64 {
        self.orthogonality.max(self.shift).max(self.trace)
    }
}

impl RokhlinTower {
    pub fn new(projections: Vec<Projection>, cyclic: bool) -> Result<Self> {
        let local = projections.first().map_or(1, |p| p.dim());
        Self::with_dim(local, projections, cyclic)
    }

    /// Tower in `M_local`, possibly empty.
    pub fn with_dim(local: usize, projections: Vec<Projection>, cyclic: bool) -> Result<Self> {
        if let Some(p) = projections.iter().find(|p| p.dim() != local) {
            return Err(Error::DimensionMismatch { expected: local, found: p.dim() });
        }
        Ok(RokhlinTower { projections, local, cyclic, left: 1, right: 1 })
    }

    /// The same tower inside `M_left ⊗ M_n ⊗ M_right`.
    pub fn padded(&self, left: usize, right: usize) -> Self {
        RokhlinTower { left: self.left * left, right: self.right * right, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn projections(&self) -> &[Projection] {
        &self.projections
    }

    pub fn local_dim(&self) -> usize {
        self.local
    }

    pub fn padding(&self) -> (usize, usize) {
        (self.left, self.right)
    }

    pub fn ambient_dim(&self) -> usize {
        self.left * self.local * self.right
    }

    /// Sum of the normalized traces; padding does not change it.
    pub fn covered_trace(&self) -> f64 {
        self.projections.iter().map(|p| p.normalized_trace()).sum()
    }

    /// Projections in the full ambient algebra.
    pub fn materialize(&self) -> Vec<Projection> {
        let (l, r) = (Projection::identity(self.left), Projection::identity(self.right));
        self.projections
            .iter()
            .map(|p| match (self.left, self.right) {
                (1, 1) => p.clone(),
                (1, _) => p.kron(&r),
                (_, 1) => l.kron(p),
                _ => l.kron(p).kron(&r),
            })
            .collect()
    }

    /// The tower without padding, in `M_{ambient}`.
    pub fn flattened(&self) -> Self {
        RokhlinTower {
            projections: self.materialize(),
            local: self.ambient_dim(),
            cyclic: self.cyclic,
            left: 1,
            right: 1,
        }
    }
}

fn exact_norm(e: &ExactMatrix) -> Result<f64> {
    if e.is_zero() {
        return Ok(0.0);
    }
    e.to_complex().op_norm()
}

fn difference_norm(a: &Projection, b: &Projection) -> Result<(f64, bool)> {
    match (a.exact(), b.exact()) {
        (Some(x), Some(y)) => Ok((exact_norm(&x.sub(y)?)?, true)),
        _ => Ok(((a.matrix() - b.matrix()).op_norm()?, false)),
    }
}

fn product_norm(a: &Projection, b: &Projection) -> Result<(f64, bool)> {
    match (a.exact(), b.exact()) {
        (Some(x), Some(y)) => Ok((exact_norm(&x.mul(y)?)?, true)),
        _ => Ok(((a.matrix() * b.matrix()).op_norm()?, false)),
    }
}

/// Recompute all defects of `t` against `u`.
///
/// `u` may act on the local factor of the tower or on the whole padded ambient
/// algebra; in the first case the defects equal those of the padded tower against
/// any `V ⊗ u ⊗ W`. Elements of `f` must match the dimension of `u`.
pub fn tower_defects(t: &RokhlinTower, u: &UnitaryMatrix, f: &[ComplexMatrix]) -> Result<TowerDefects> {
    let flat;
    let t = if u.dim() == t.local_dim() {
        t
    } else if u.dim() == t.ambient_dim() {
        flat = t.flattened();
        &flat
    } else {
        return Err(Error::DimensionMismatch { expected: t.local_dim(), found: u.dim() });
    };
    let ps = &t.projections;
    let mut d = TowerDefects { exact: true, ..Default::default() };
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let (v, ex) = product_norm(&ps[i], &ps[j])?;
            d.orthogonality = d.orthogonality.max(v);
            d.exact &= ex;
        }
    }
    let steps = if t.cyclic { ps.len() } else { ps.len().saturating_sub(1) };
    for i in 0..steps {
        let moved = ps[i].conjugated(u)?;
        let (v, ex) = difference_norm(&moved, &ps[(i + 1) % ps.len()])?;
        d.shift = d.shift.max(v);
        d.exact &= ex;
    }
    let ratios: Option<Vec<Rational64>> = ps.iter().map(|p| p.trace_ratio()).collect();
    match ratios {
        Some(r) => {
            let total: Rational64 = r.into_iter().fold(Rational64::zero(), |a, b| a + b);
            d.trace = (Rational64::one() - total).abs().to_f64_lossy();
        }
        None => {
            d.trace = (1.0 - t.covered_trace()).abs();
            d.exact = false;
        }
    }
    for a in f {
        if a.dim() != u.dim() {
            return Err(Error::DimensionMismatch { expected: u.dim(), found: a.dim() });
        }
        for p in ps {
            let m = p.matrix();
            let c = &(m * a) - &(a * m);
            d.commutation = d.commutation.max(c.op_norm()?);
        }
        d.exact = false;
    }
    Ok(d)
}

trait LossyFloat {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyFloat for Rational64 {
    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Sum a tower over residue classes modulo the target length `n`.
///
/// With `L = nQ + r`, projection `i` of the output is `Σ_{j ≡ i (mod n), j < nQ} q_j`;
/// the last `r` projections are dropped.
pub fn group_tower(t: &RokhlinTower, n: usize) -> Result<RokhlinTower> {
    if n == 0 {
        return Err(Error::InvalidArgument("target length must be positive".into()));
    }
    if t.len() < n {
        return Err(Error::InvalidArgument(format!("tower of length {} cannot be grouped into {n}", t.len())));
    }
    let q = t.len() / n;
    let r = t.len() % n;
    let projections = (0..n)
        .map(|i| {
            let parts: Vec<&Projection> = (0..q).map(|m| &t.projections[i + m * n]).collect();
            Projection::sum(t.local, &parts)
        })
        .collect();
    Ok(RokhlinTower { projections, cyclic: t.cyclic && r == 0, ..t.clone() })
}

/// How [`tensor_tower`] combines two towers.
#[derive(Clone, Copy, Debug)]
pub enum TowerMode<'a> {
    /// `p_i ⊗ 1`: the first tower, extended by the second tower's algebra.
    ExtendLeft,
    /// `1 ⊗ q_j`: the second tower, extended by the first tower's algebra.
    ExtendRight,
    /// `p_i ⊗ 1` for a cyclic tower of length `k`, keeping the order-`k` semantics.
    OrderKExtend { k: usize },
    /// Length `k·m` tower `r_{ak+b} = U^b p_a U^{-b} ⊗ q_b` from a tower `(p_a)` for
    /// `U^k` and a cyclic tower `(q_b)` of length `k`.
    ComposeK { base: &'a UnitaryMatrix },
}

pub fn tensor_tower(ta: &RokhlinTower, tb: &RokhlinTower, mode: TowerMode<'_>) -> Result<RokhlinTower> {
    match mode {
        TowerMode::ExtendLeft => Ok(ta.padded(1, tb.ambient_dim())),
        TowerMode::ExtendRight => Ok(tb.padded(ta.ambient_dim(), 1)),
        TowerMode::OrderKExtend { k } => {
            if !ta.cyclic || ta.len() != k {
                return Err(Error::InvalidArgument(format!("order-{k} extension needs a cyclic tower of length {k}")));
            }
            Ok(ta.padded(1, tb.ambient_dim()))
        }
        TowerMode::ComposeK { base } => {
            let k = tb.len();
            if !tb.cyclic || k == 0 {
                return Err(Error::InvalidArgument("compose-k needs a nonempty cyclic second tower".into()));
            }
            let a = ta.flattened();
            let b = tb.flattened();
            if base.dim() != a.local {
                return Err(Error::DimensionMismatch { expected: a.local, found: base.dim() });
            }
            let powers: Vec<UnitaryMatrix> =
                (0..k).map(|j| base.pow(j as i64)).collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(k * a.len());
            for p in &a.projections {
                for (j, q) in b.projections.iter().enumerate() {
                    out.push(p.conjugated(&powers[j])?.kron(q));
                }
            }
            RokhlinTower::with_dim(a.local * b.local, out, ta.cyclic)
        }
    }
}
