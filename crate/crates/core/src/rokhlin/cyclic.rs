use num_rational::Rational64;

use super::tower::RokhlinTower;
use crate::algebra::{
    check_dense, eig_unitary, ComplexMatrix, Cyclotomic, ExactMatrix, Phase, Projection, UnitaryMatrix, C64, ZERO,
};
use crate::error::{Error, Result};

/// Number of eigenvalues of `u` in each class `e^{2πij/k}`, from diagonal phases.
pub fn class_census(phases: &[Phase], k: u64, tol: f64) -> Result<Vec<u128>> {
    let mut counts = vec![0u128; k as usize];
    for p in phases {
        let j = p.root_class(k, tol).ok_or(Error::NotRootOfUnity { phase: p.turns(), k })?;
        counts[j as usize] += 1;
    }
    Ok(counts)
}

/// Census of a tensor product from the censuses of its factors (cyclic convolution).
pub fn convolve_census(a: &[u128], b: &[u128]) -> Vec<u128> {
    let k = a.len();
    let mut out = vec![0u128; k];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[(i + j) % k] += x * y;
        }
    }
    out
}

/// Trace defect `1 − k·min_j c_j / N` of the best cyclic tower, as an exact ratio `(num, den)`.
pub fn census_trace_defect(counts: &[u128]) -> (u128, u128) {
    let n: u128 = counts.iter().sum();
    let d = counts.iter().copied().min().unwrap_or(0);
    (n - counts.len() as u128 * d, n.max(1))
}

/// One eigenvector: support indices with unit-modulus coefficients, normalized by `1/sqrt(len)`.
struct ExactEigenvector {
    support: Vec<usize>,
    coeffs: Vec<Phase>,
}

/// Exact eigenvectors of a monomial unitary, grouped by class modulo `k`.
///
/// Within a class the vectors are ordered by the least index of their cycle and
/// then by eigenphase.
fn monomial_eigenvectors(perm: &[usize], phases: &[Phase], k: u64) -> Result<Vec<Vec<ExactEigenvector>>> {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut classes: Vec<Vec<ExactEigenvector>> = (0..k).map(|_| Vec::new()).collect();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut x = perm[start];
        while x != start {
            seen[x] = true;
            cycle.push(x);
            x = perm[x];
        }
        let c = cycle.len() as i64;
        // λ^c = μ, the product of the phases along the cycle
        let mu = cycle.iter().fold(Phase::ONE, |acc, &x| acc.add(&phases[x]));
        let Phase::Exact(mu) = mu else { unreachable!("exact phases") };
        for m in 0..c {
            let lambda = Phase::rational(mu / Rational64::from_integer(c) + Rational64::new(m, c));
            let j = lambda.root_class(k, 0.0).ok_or(Error::NotRootOfUnity { phase: lambda.turns(), k })?;
            // coefficient a_{t+1} = φ_t a_t / λ along the cycle
            let mut coeffs = Vec::with_capacity(cycle.len());
            let mut a = Phase::ONE;
            for &x in &cycle {
                coeffs.push(a);
                a = a.add(&phases[x]).add(&lambda.neg());
            }
            classes[j as usize].push(ExactEigenvector { support: cycle.clone(), coeffs });
        }
    }
    Ok(classes)
}

/// Exact tower for a monomial unitary, or `None` when a tuple mixes cycles of different
/// lengths (its projections would involve square roots outside the cyclotomic entries used).
fn exact_monomial_tower(n: usize, perm: &[usize], phases: &[Phase], k: u64) -> Result<Option<RokhlinTower>> {
    let classes = monomial_eigenvectors(perm, phases, k)?;
    let d = classes.iter().map(|c| c.len()).min().unwrap_or(0);
    let ku = k as usize;
    let mut entries: Vec<Vec<(usize, usize, Cyclotomic)>> = vec![Vec::new(); ku];
    for t in 0..d {
        let c = classes[0][t].support.len();
        if classes.iter().any(|cl| cl[t].support.len() != c) {
            return Ok(None);
        }
        let scale = Rational64::new(1, (k as i64) * c as i64);
        for (s, out) in entries.iter_mut().enumerate() {
            // w_s = (kc)^{-1/2} Σ_j ω^{js} v_j, with v_j unnormalized
            let mut w: std::collections::BTreeMap<usize, Cyclotomic> = Default::default();
            for (j, cl) in classes.iter().enumerate() {
                let rot = Phase::exact((j * s) as i64, k as i64);
                let v = &cl[t];
                for (&x, a) in v.support.iter().zip(&v.coeffs) {
                    let z = Cyclotomic::from_phase(&a.add(&rot)).expect("exact");
                    let slot = w.entry(x).or_insert_with(Cyclotomic::zero);
                    *slot = slot.add(&z);
                }
            }
            let w: Vec<(usize, Cyclotomic)> = w.into_iter().filter(|(_, z)| !z.is_zero()).collect();
            for (x, a) in &w {
                for (y, b) in &w {
                    out.push((*x, *y, a.mul(&b.conj()).scale(scale)));
                }
            }
        }
    }
    let projections =
        entries.into_iter().map(|e| Projection::from_exact_unchecked(ExactMatrix::from_entries(n, e))).collect();
    Ok(Some(RokhlinTower::with_dim(n, projections, true)?))
}

/// Cyclic tower of length `k` shifted by `Ad u`, built from matched eigenvector tuples.
///
/// With `V_j` the `e^{2πij/k}`-eigenspace and `d = min_j dim V_j`, each tuple
/// `(v_0, …, v_{k−1})` gives vectors `w_s = k^{-1/2} Σ_j ω^{js} v_j` with
/// `u w_s = w_{s+1}`; projection `s` is the sum of `w_s w_s*` over the `d` tuples.
/// Exact monomial unitaries give exact towers.
pub fn best_cyclic_tower(u: &UnitaryMatrix, k: u64, cluster_tol: f64) -> Result<RokhlinTower> {
    if k == 0 {
        return Err(Error::InvalidArgument("tower length must be positive".into()));
    }
    let n = u.dim();
    if let Some((perm, phases)) = u.exact().and_then(|e| e.monomial_parts()) {
        if let Some(t) = exact_monomial_tower(n, &perm, &phases, k)? {
            return Ok(t);
        }
    }
    check_dense(n)?;
    let clusters = eig_unitary(u, cluster_tol)?;
    let mut classes: Vec<Vec<Vec<C64>>> = vec![Vec::new(); k as usize];
    for c in clusters {
        let j = c.phase.root_class(k, cluster_tol).ok_or(Error::NotRootOfUnity { phase: c.phase.turns(), k })?;
        classes[j as usize].extend(c.vectors);
    }
    let d = classes.iter().map(|c| c.len()).min().unwrap_or(0);
    let norm = 1.0 / (k as f64).sqrt();
    let mut projections = Vec::with_capacity(k as usize);
    for s in 0..k as usize {
        let vectors: Vec<Vec<C64>> = (0..d)
            .map(|t| {
                let mut w = vec![ZERO; n];
                for (j, cl) in classes.iter().enumerate() {
                    let rot = Phase::exact((j * s) as i64, k as i64).to_complex() * norm;
                    for (wi, vi) in w.iter_mut().zip(&cl[t]) {
                        *wi += rot * vi;
                    }
                }
                w
            })
            .collect();
        projections.push(Projection::from_orthonormal(n, &vectors));
    }
    RokhlinTower::with_dim(n, projections, true)
}

/// Length-`len` tower for a unitary of infinite order.
///
/// The eigenphases are snapped to the rotated lattice `ρ + j/len` that best fits
/// them, eigenvectors are grouped by lattice point, and the tower of the snapped
/// unitary is returned as a non-cyclic tower. Its defects against `u` must be measured.
pub fn arc_tower(u: &UnitaryMatrix, len: usize, cluster_tol: f64) -> Result<RokhlinTower> {
    if len == 0 {
        return Err(Error::InvalidArgument("tower length must be positive".into()));
    }
    let n = u.dim();
    let classes = lattice_classes(u, len, cluster_tol)?;
    let m = len as f64;
    let d = classes.iter().map(|c| c.len()).min().unwrap_or(0);
    let norm = 1.0 / m.sqrt();
    let projections = (0..len)
        .map(|s| {
            let vectors: Vec<Vec<C64>> = (0..d)
                .map(|t| {
                    let mut w = vec![ZERO; n];
                    for (j, cl) in classes.iter().enumerate() {
                        let rot = Phase::exact((j * s) as i64, len as i64).to_complex() * norm;
                        for (wi, vi) in w.iter_mut().zip(&cl[t]) {
                            *wi += rot * vi;
                        }
                    }
                    w
                })
                .collect();
            Projection::from_orthonormal(n, &vectors)
        })
        .collect();
    RokhlinTower::with_dim(n, projections, false)
}

/// Eigenvectors of `u` grouped by the point of the best-fitting rotated lattice
/// `ρ + j/len` nearest to their eigenphase.
fn lattice_classes(u: &UnitaryMatrix, len: usize, cluster_tol: f64) -> Result<Vec<Vec<Vec<C64>>>> {
    check_dense(u.dim())?;
    let clusters = eig_unitary(u, cluster_tol)?;
    let m = len as f64;
    let residues: Vec<f64> = clusters.iter().map(|c| (c.phase.turns() * m).rem_euclid(1.0)).collect();
    let rho = best_offset(&residues);
    let mut classes: Vec<Vec<Vec<C64>>> = vec![Vec::new(); len];
    for c in clusters {
        let j = ((c.phase.turns() * m - rho).round() as i64).rem_euclid(len as i64) as usize;
        classes[j].extend(c.vectors);
    }
    Ok(classes)
}

/// Offset in `[0,1)` minimizing the largest circular distance to the given residues.
fn best_offset(residues: &[f64]) -> f64 {
    if residues.is_empty() {
        return 0.0;
    }
    let mut r = residues.to_vec();
    r.sort_by(f64::total_cmp);
    let mut widest = (r[0] + 1.0 - r[r.len() - 1], r.len() - 1);
    for i in 0..r.len() - 1 {
        let g = r[i + 1] - r[i];
        if g > widest.0 {
            widest = (g, i);
        }
    }
    // center of the arc that avoids the widest gap
    let lo = r[(widest.1 + 1) % r.len()];
    let hi = r[widest.1];
    let span = (hi - lo).rem_euclid(1.0);
    (lo + span / 2.0).rem_euclid(1.0)
}

/// Unitary moving matched eigenvectors of `u` one class up.
///
/// With `v_{j,t}` the `t`-th vector of class `j` for `t < d = min_j dim V_j`, the
/// result sends `v_{j,t}` to `v_{j+1,t}` (indices mod `k`) and fixes the rest, so
/// `u x u* x* = ω` on the `k·d` matched vectors and `1` elsewhere. Exact diagonal
/// unitaries give a permutation.
pub fn class_shift(u: &UnitaryMatrix, k: u64, cluster_tol: f64) -> Result<UnitaryMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("class count must be positive".into()));
    }
    let n = u.dim();
    let ku = k as usize;
    if let Some(phases) = u.diagonal_phases().filter(|_| u.exact().is_some()) {
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); ku];
        for (i, p) in phases.iter().enumerate() {
            let j = p.root_class(k, 0.0).ok_or(Error::NotRootOfUnity { phase: p.turns(), k })?;
            classes[j as usize].push(i);
        }
        let d = classes.iter().map(|c| c.len()).min().unwrap_or(0);
        let mut perm: Vec<usize> = (0..n).collect();
        for t in 0..d {
            for j in 0..ku {
                perm[classes[j][t]] = classes[(j + 1) % ku][t];
            }
        }
        return UnitaryMatrix::permutation(&perm);
    }
    check_dense(n)?;
    let mut classes: Vec<Vec<Vec<C64>>> = vec![Vec::new(); ku];
    for c in eig_unitary(u, cluster_tol)? {
        let j = c.phase.root_class(k, cluster_tol).ok_or(Error::NotRootOfUnity { phase: c.phase.turns(), k })?;
        classes[j as usize].extend(c.vectors);
    }
    shift_classes(n, &classes)
}

/// Same as [`class_shift`] for the lattice classes used by [`arc_tower`].
pub fn arc_shift(u: &UnitaryMatrix, len: usize, cluster_tol: f64) -> Result<UnitaryMatrix> {
    if len == 0 {
        return Err(Error::InvalidArgument("tower length must be positive".into()));
    }
    shift_classes(u.dim(), &lattice_classes(u, len, cluster_tol)?)
}

fn shift_classes(n: usize, classes: &[Vec<Vec<C64>>]) -> Result<UnitaryMatrix> {
    let k = classes.len();
    let d = classes.iter().map(|c| c.len()).min().unwrap_or(0);
    let (mut from, mut to) = (Vec::with_capacity(k * d), Vec::with_capacity(k * d));
    for t in 0..d {
        for j in 0..k {
            from.push(classes[j][t].clone());
            to.push(classes[(j + 1) % k][t].clone());
        }
    }
    let from = ComplexMatrix::from_columns(n, &from);
    let to = ComplexMatrix::from_columns(n, &to);
    let moved = &(&to - &from) * &from.adjoint();
    let x = &ComplexMatrix::identity(n) + &moved;
    UnitaryMatrix::new(x)
}
