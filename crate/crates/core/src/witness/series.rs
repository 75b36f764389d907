use std::io::Write;

use crate::actions::{diagonal_flow, StageUnitary};
use crate::algebra::{check_dense, commutator, cycle_unitary, UnitaryMatrix, C64, ONE};
use crate::error::{Error, Result};
use crate::groups::Real;

pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_THRESHOLD: f64 = 1e-3;

/// Normalized traces `τ([u_n, v_n])` with a trailing-window gap statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSeries {
    pub indices: Vec<usize>,
    pub values: Vec<C64>,
    pub window: usize,
    pub threshold: f64,
}

impl WitnessSeries {
    pub fn new(indices: Vec<usize>, values: Vec<C64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: indices.len(), found: values.len() });
        }
        Ok(WitnessSeries { indices, values, window: DEFAULT_WINDOW, threshold: DEFAULT_THRESHOLD })
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window.max(1);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn tail(&self) -> &[C64] {
        &self.values[self.values.len().saturating_sub(self.window)..]
    }

    /// `min |1 − τ_n|` over the last `window` entries; 0 for an empty series.
    pub fn gap(&self) -> f64 {
        let t = self.tail();
        if t.is_empty() {
            return 0.0;
        }
        t.iter().map(|z| (ONE - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// `max |1 − τ_n|` over the last `window` entries.
    pub fn limsup_gap(&self) -> f64 {
        self.tail().iter().map(|z| (ONE - z).norm()).fold(0.0, f64::max)
    }

    /// Whether the finite evidence meets the threshold. This is evidence, not a proof.
    pub fn is_witness(&self) -> bool {
        !self.is_empty() && self.gap() >= self.threshold
    }

    pub fn verdict_line(&self) -> String {
        let label = if self.is_witness() { "WITNESS" } else { "NO WITNESS" };
        format!(
            "{label} (evidence): gap {:.6e} over last {} entries, threshold {:.3e}",
            self.gap(),
            self.tail().len(),
            self.threshold
        )
    }

    /// CSV with columns `n, re_tau, im_tau, abs_one_minus_tau`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "re_tau", "im_tau", "abs_one_minus_tau"])?;
        for (n, z) in self.indices.iter().zip(&self.values) {
            out.write_record([
                n.to_string(),
                format!("{:.16e}", z.re),
                format!("{:.16e}", z.im),
                format!("{:.16e}", (ONE - z).norm()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `τ(u v u* v*)`.
pub fn commutator_trace(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<C64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(commutator(u, v)?.normalized_trace())
}

/// Series of `τ([u_n, v_n])`, indexed from 1.
pub fn commutator_trace_sequence(u: &[UnitaryMatrix], v: &[UnitaryMatrix]) -> Result<WitnessSeries> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    let values = u.iter().zip(v).map(|(a, b)| commutator_trace(a, b)).collect::<Result<Vec<_>>>()?;
    WitnessSeries::new((1..=u.len()).collect(), values)
}

/// `τ([cycle(n), v_n(r)])` for `n = 1..=n_max`, computed from the matrices.
pub fn flow_series(theta: Real, r: Real, n_max: usize) -> Result<WitnessSeries> {
    let values = (1..=n_max)
        .map(|n| commutator_trace(&cycle_unitary(n), &diagonal_flow(n, theta, r)))
        .collect::<Result<Vec<_>>>()?;
    WitnessSeries::new((1..=n_max).collect(), values)
}

/// `‖Ad U(v(n)) − v(n)‖₂` where `v(n) = 1 ⊗ … ⊗ v ⊗ … ⊗ 1` sits in factor `factor_index`.
///
/// Small stages are measured directly; larger exact stages go through
/// `‖Ad U(x) − x‖₂² = 2(1 − Re τ(U x U* x*))`.
pub fn weak_inner_defect(u: &StageUnitary, v: &UnitaryMatrix, factor_index: usize) -> Result<f64> {
    let Some(&d) = u.dims.get(factor_index) else {
        return Err(Error::InvalidArgument(format!("factor {factor_index} outside a stage of {} factors", u.dims.len())));
    };
    if v.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
    }
    let left: usize = u.dims[..factor_index].iter().product();
    let right: usize = u.dims[factor_index + 1..].iter().product();
    let x = UnitaryMatrix::identity(left).kron(v)?.kron(&UnitaryMatrix::identity(right))?;
    if check_dense(x.dim()).is_ok() && (u.unitary.exact().is_none() || x.exact().is_none()) {
        let moved = u.unitary.conjugate(x.matrix())?;
        return (&moved - x.matrix()).two_norm();
    }
    let t = commutator_trace(&u.unitary, &x)?;
    Ok((2.0 * (1.0 - t.re)).max(0.0).sqrt())
}

/// `(2(1 − Re τ([u, v])))^{1/2}`, the defect of one factor of a pure tensor.
pub fn factor_weak_inner_defect(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    let t = commutator_trace(u, v)?;
    Ok((2.0 * (1.0 - t.re)).max(0.0).sqrt())
}
