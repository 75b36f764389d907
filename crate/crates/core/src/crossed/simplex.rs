use std::io::Write;
use std::sync::Arc;

use crate::actions::{explicit_action, FactorImages, ProductAction};
use crate::algebra::{ComplexMatrix, Phase, UnitaryMatrix, C64, ONE};
use crate::error::{Error, Result};
use crate::groups::{character_table, CharacterTable, Element, FiniteGroup, GroupSpec};

use super::stage::normalized_traces;

/// Diameter below which the finite-depth evidence counts as collapse.
pub const COLLAPSE_THRESHOLD: f64 = 1e-6;

/// `C*(G)` on `M_{|G|}` with its tracial states.
///
/// A tracial state is a class function `χ(g) = τ(λ(g))`; the extreme ones are the
/// normalized irreducible characters `χ_i / χ_i(e)`, stored as functions on elements.
#[derive(Clone, Debug)]
pub struct GroupAlgebra {
    pub group: FiniteGroup,
    pub characters: CharacterTable,
    pub vertices: Vec<Vec<C64>>,
}

pub fn group_cstar_stage(group: &GroupSpec) -> Result<GroupAlgebra> {
    let GroupSpec::FiniteTable(g) = group else {
        return Err(Error::InvalidGroup("group algebra stages need a group given by its table".into()));
    };
    let characters = character_table(g)?;
    let vertices = (0..characters.values.len())
        .map(|i| (0..g.order()).map(|x| characters.value(i, x) / characters.dims[i] as f64).collect())
        .collect();
    Ok(GroupAlgebra { group: g.clone(), characters, vertices })
}

/// Whether `[χ(h^{-1}g)]_{g,h}` is positive semidefinite up to `tol`.
pub fn is_positive_definite(chi: &[C64], g: &FiniteGroup, tol: f64) -> Result<bool> {
    let n = g.order();
    if chi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: chi.len() });
    }
    let m = ComplexMatrix::from_fn(n, n, |a, b| chi[g.mul(g.inv(b), a)]);
    let (eig, _) = m.hermitian_eigen()?;
    Ok(eig.iter().all(|&e| e >= -tol))
}

/// Pull a class function at stage `m + 1` back to stage `m`: `χ(g) ↦ τ(g_{m+1}(g))·χ(g)`.
pub fn trace_pullback(chi: &[C64], g_images: &[UnitaryMatrix]) -> Result<Vec<C64>> {
    if chi.len() != g_images.len() {
        return Err(Error::DimensionMismatch { expected: g_images.len(), found: chi.len() });
    }
    Ok(scale(chi, &normalized_traces(g_images)))
}

fn scale(chi: &[C64], s: &[C64]) -> Vec<C64> {
    chi.iter().zip(s).map(|(c, t)| c * t).collect()
}

/// Largest distance between two vertices at a nontrivial element.
fn spread(vertices: &[Vec<C64>], identity: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for x in (0..vertices.first().map_or(0, |v| v.len())).filter(|&x| x != identity) {
        for a in vertices {
            for b in vertices {
                worst = worst.max((a[x] - b[x]).norm());
            }
        }
    }
    worst
}

/// Stage-0 traces compatible with traces at stage `depth`.
#[derive(Clone, Debug)]
pub struct TraceSimplexState {
    pub depth: usize,
    pub vertices: Vec<Vec<C64>>,
    /// `τ(g_depth(g))` per element; all ones at depth 0.
    pub scalings: Vec<C64>,
    /// `∏_{m ≤ depth} τ(g_m(g))` per element.
    pub partial: Vec<C64>,
    pub diameter: f64,
}

/// Shrinking of the trace simplex of `C*(G)` under the connecting maps.
///
/// For each depth `d = 0..=depth` the extreme traces of `C*(G)` at stage `d` are
/// pulled back through stages `d, d−1, …, 1`; the state records the resulting
/// vertices and their spread over the nontrivial elements.
pub fn trace_simplex_diameter(a: &ProductAction, depth: usize) -> Result<Vec<TraceSimplexState>> {
    let alg = group_cstar_stage(a.group())?;
    let g = &alg.group;
    let e = g.identity();
    let mut per_stage = Vec::with_capacity(depth);
    for l in 0..depth {
        let f = a.factor(l)?;
        per_stage.push((0..g.order()).map(|x| f.normalized_trace(a.group(), &Element::Index(x))).collect::<Result<Vec<_>>>()?);
    }
    let mut states = Vec::with_capacity(depth + 1);
    let mut partial = vec![ONE; g.order()];
    for d in 0..=depth {
        if d > 0 {
            partial = scale(&partial, &per_stage[d - 1]);
        }
        let vertices: Vec<Vec<C64>> = alg
            .vertices
            .iter()
            .map(|v| per_stage[..d].iter().rev().fold(v.clone(), |chi, s| scale(&chi, s)))
            .collect();
        states.push(TraceSimplexState {
            depth: d,
            diameter: spread(&vertices, e),
            scalings: if d == 0 { vec![ONE; g.order()] } else { per_stage[d - 1].clone() },
            partial: partial.clone(),
            vertices,
        });
    }
    Ok(states)
}

/// Verdict on the deepest state.
pub fn simplex_verdict(states: &[TraceSimplexState]) -> String {
    match states.last() {
        Some(s) if s.diameter <= COLLAPSE_THRESHOLD => {
            format!("COLLAPSE (evidence): diameter {:.6e} at depth {} <= {COLLAPSE_THRESHOLD:.0e}", s.diameter, s.depth)
        }
        Some(s) => format!("NO COLLAPSE: diameter {:.6e} at depth {}", s.diameter, s.depth),
        None => "NO COLLAPSE: no stages".into(),
    }
}

/// CSV with columns `depth, class_id, scaling_modulus, partial_product, diameter`,
/// one row per depth and nontrivial conjugacy class.
pub fn write_simplex_csv<W: Write>(states: &[TraceSimplexState], group: &FiniteGroup, w: W) -> Result<()> {
    let classes = group.conjugacy_classes();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["depth", "class_id", "scaling_modulus", "partial_product", "diameter"])?;
    for s in states {
        for (c, cl) in classes.iter().enumerate() {
            let x = cl[0];
            if x == group.identity() {
                continue;
            }
            out.write_record([
                s.depth.to_string(),
                c.to_string(),
                format!("{:.16e}", s.scalings[x].norm()),
                format!("{:.16e}", s.partial[x].norm()),
                format!("{:.16e}", s.diameter),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `Z/2` acting on factor `l` (0-based) by `diag(1, …, 1, −1)` in `M_{2^{l+2}}`.
///
/// Factor traces are `1 − 2^{-(l+1)}`, whose product stays above `0.28`; the
/// trace simplex does not collapse.
pub fn control_action(depth: usize) -> Result<ProductAction> {
    let levels: Vec<FactorImages> = (0..depth)
        .map(|l| {
            let n = 1usize << (l + 2);
            let mut ph = vec![Phase::ONE; n];
            ph[n - 1] = Phase::exact(1, 2);
            sign_factor(&ph)
        })
        .collect();
    Ok(explicit_action(GroupSpec::cyclic(2), levels, vec![])?.relabel("control"))
}

/// `Z/2` factor sending the generator to the diagonal `phases`.
pub(crate) fn sign_factor(phases: &[Phase]) -> FactorImages {
    let u = UnitaryMatrix::diagonal(phases);
    FactorImages::Table(Arc::new(vec![UnitaryMatrix::identity(u.dim()), u]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signs(entries: &[i64]) -> ProductAction {
        let ph: Vec<Phase> = entries.iter().map(|&e| Phase::exact(e, 2)).collect();
        explicit_action(GroupSpec::cyclic(2), vec![], vec![sign_factor(&ph)]).unwrap()
    }

    #[test]
    fn z2_states() {
        let alg = group_cstar_stage(&GroupSpec::cyclic(2)).unwrap();
        let mut v: Vec<f64> = alg.vertices.iter().map(|v| v[1].re).collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] + 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn s3_has_three_vertices() {
        let alg = group_cstar_stage(&GroupSpec::FiniteTable(FiniteGroup::symmetric(3))).unwrap();
        assert_eq!(alg.vertices.len(), 3);
        for v in &alg.vertices {
            assert!(is_positive_definite(v, &alg.group, 1e-10).unwrap());
        }
    }

    #[test]
    fn one_third_per_stage() {
        let chi = [ONE, C64::new(0.6, 0.0)];
        let u = UnitaryMatrix::diagonal(&[Phase::ONE, Phase::ONE, Phase::exact(1, 2)]);
        let out = trace_pullback(&chi, &[UnitaryMatrix::identity(3), u]).unwrap();
        assert_eq!(out[0], ONE);
        assert!((out[1] - C64::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sign_pair_collapses_at_once() {
        let s = trace_simplex_diameter(&signs(&[0, 1]), 2).unwrap();
        assert!((s[0].diameter - 2.0).abs() < 1e-12);
        assert!(s[1].diameter < 1e-12);
        assert!(simplex_verdict(&s).starts_with("COLLAPSE"));
    }

    #[test]
    fn control_stays_open() {
        let s = trace_simplex_diameter(&control_action(6).unwrap(), 6).unwrap();
        assert!(s.last().unwrap().diameter > 0.5);
        assert!(simplex_verdict(&s).starts_with("NO COLLAPSE"));
    }

    #[test]
    fn csv_rows() {
        let s = trace_simplex_diameter(&signs(&[0, 0, 1]), 2).unwrap();
        let mut buf = Vec::new();
        write_simplex_csv(&s, &FiniteGroup::cyclic(2), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "depth,class_id,scaling_modulus,partial_product,diameter");
        assert_eq!(lines.len(), 4);
    }
}
