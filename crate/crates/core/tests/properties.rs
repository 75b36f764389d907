//! Randomized invariants across the core modules.

mod common;

use std::sync::Arc;

use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uhf_core::actions::{
    abelian_action, diagonal_flow, evaluate, explicit_action, identity_gap_blocks, interleave_identity, map_embed_action,
    regular_action, tensor_power, FactorImages, ProductAction,
};
use uhf_core::algebra::{
    commutator, factor_commutant, matrix_unit_commutator, nearest_projection, orthogonalize_projections, tensor_reorder,
    ComplexMatrix, Phase, Projection, UnitaryMatrix, C64, ONE, ZERO,
};
use uhf_core::crossed::{
    group_cstar_stage, is_positive_definite, trace_pullback, trace_simplex_diameter, verify_covariance, CrossedStage,
};
use uhf_core::groups::{
    induce, map_embedding, normal_core, regular_representation, supernatural_of, AbelianGroup, BlockPartition, Element,
    FactorSequence, FiniteGroup, GroupSpec, Real,
};
use uhf_core::rokhlin::{
    best_cyclic_tower, certify_schedule, tensor_tower, tower_defects, CertifyOptions, EpsilonRule, RokhlinTower, TowerMode,
};
use uhf_core::transforms::{bump_up, cut_down, extend_finite_index, regroup};
use uhf_core::witness::{commutator_trace, flow_commutator_trace, flow_series};

use common::{near_identity, op_norm, random_hermitian, random_matrix, random_projection, random_unitary, tau, two_norm_sq};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_group(pick: usize) -> FiniteGroup {
    match pick % 6 {
        0 => FiniteGroup::cyclic(2),
        1 => FiniteGroup::cyclic(4),
        2 => FiniteGroup::cyclic(6),
        3 => FiniteGroup::symmetric(3),
        4 => FiniteGroup::dihedral(4),
        _ => FiniteGroup::cyclic(2).direct_product(&FiniteGroup::cyclic(2)),
    }
}

/// Diagonal `Z/k` factor whose generator has the given exponents of `e^{2πi/k}`.
fn zk_diagonal(k: usize, exps: &[i64]) -> FactorImages {
    let images = (0..k as i64)
        .map(|g| UnitaryMatrix::diagonal(&exps.iter().map(|&e| Phase::exact(e * g, k as i64)).collect::<Vec<_>>()))
        .collect();
    FactorImages::Table(Arc::new(images))
}

/// Periodic diagonal `Z/k` action whose single period factor meets every class.
fn zk_action(k: usize, extra: &[i64]) -> ProductAction {
    let mut exps: Vec<i64> = (0..k as i64).collect();
    exps.extend(extra.iter().map(|e| e.rem_euclid(k as i64)));
    explicit_action(GroupSpec::cyclic(k), vec![], vec![zk_diagonal(k, &exps)]).unwrap()
}

fn halving() -> EpsilonRule {
    EpsilonRule::Geometric { base: 2.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nearest_projection_is_a_close_projection(seed in any::<u64>(), n in 1usize..10, eta in 1e-9f64..0.15) {
        let mut r = rng(seed);
        let rank = r.gen_range(0..=n);
        let p = random_projection(&mut r, n, rank);
        let e = random_hermitian(&mut r, n);
        let a = p.matrix() + &e.scale_real(eta / op_norm(&e).max(1e-300));
        let an = a.to_nalgebra();
        let delta = op_norm(&ComplexMatrix::from_nalgebra(&(&an * &an - &an))) * 1.001 + 1e-15;
        let q = nearest_projection(&a, delta).unwrap();
        let m = q.matrix();
        prop_assert!((m - &m.adjoint()).max_abs() <= 1e-10);
        prop_assert!((&(m * m) - m).max_abs() <= 1e-10);
        prop_assert!(op_norm(&(m - &a)) <= 2.0 * delta);
    }

    #[test]
    fn orthogonalized_projections_are_orthogonal(seed in any::<u64>(), count in 2usize..5, spread in 1e-9f64..0.01) {
        let mut r = rng(seed);
        let n = count + r.gen_range(0..6);
        let u = random_unitary(&mut r, n);
        let q: Vec<Projection> = (0..count)
            .map(|i| {
                let p = Projection::from_orthonormal(n, &[u.matrix().column(i)]);
                Projection::new(near_identity(&mut r, n, spread).conjugate(p.matrix()).unwrap()).unwrap()
            })
            .collect();
        let mut overlap = 0.0f64;
        for i in 0..count {
            for j in i + 1..count {
                overlap = overlap.max(op_norm(&(q[i].matrix() * q[j].matrix())));
            }
        }
        let out = orthogonalize_projections(&q, overlap * 1.001 + 1e-15).unwrap();
        for i in 0..count {
            prop_assert_eq!(out[i].rank(), q[i].rank());
            for j in 0..count {
                if i != j {
                    prop_assert!(op_norm(&(out[i].matrix() * out[j].matrix())) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn factor_commutant_lie_bound(seed in any::<u64>(), n in 2usize..5, m in 1usize..5, log_eta in -9.0f64..-1.0) {
        let mut r = rng(seed);
        let b = random_matrix(&mut r, m);
        let y = random_matrix(&mut r, n * m);
        let x = &ComplexMatrix::identity(n).kron(&b) + &y.scale_real(10f64.powf(log_eta));
        let eps = matrix_unit_commutator(&x, n, m).unwrap();
        let slice = factor_commutant(&x, n, m, eps).unwrap();
        prop_assert!(op_norm(&(&x - &ComplexMatrix::identity(n).kron(&slice))) <= 10.0 * (n * n * n) as f64 * eps);
    }

    #[test]
    fn trace_and_two_norm_are_conjugation_invariant(seed in any::<u64>(), n in 1usize..24) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n);
        let u = random_unitary(&mut r, n);
        let b = u.conjugate(&a).unwrap();
        prop_assert!((b.normalized_trace().unwrap() - a.normalized_trace().unwrap()).norm() <= 1e-12);
        prop_assert!((b.two_norm().unwrap() - a.two_norm().unwrap()).abs() <= 1e-12);
        prop_assert!((tau(&b.to_nalgebra()) - tau(&a.to_nalgebra())).norm() <= 1e-12);
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
        let mut r = rng(seed);
        let (a, b, c) = (random_matrix(&mut r, da), random_matrix(&mut r, db), random_matrix(&mut r, dc));
        let left = a.kron(&b).kron(&c);
        let right = a.kron(&b.kron(&c));
        prop_assert_eq!(left.rows(), right.rows());
        prop_assert!((&left - &right).max_abs() <= 1e-15);
        let na = a.to_nalgebra().kronecker(&b.to_nalgebra()).kronecker(&c.to_nalgebra());
        prop_assert!((&left - &ComplexMatrix::from_nalgebra(&na)).max_abs() <= 1e-15);
    }

    #[test]
    fn normal_core_is_conjugation_invariant(pick in 0usize..6, gens in proptest::collection::vec(0usize..8, 1..3)) {
        let g = small_group(pick);
        let gens: Vec<usize> = gens.into_iter().map(|x| x % g.order()).collect();
        let h = g.generated(&gens);
        let core = normal_core(&g, &h).unwrap();
        for &x in &core {
            prop_assert!(h.contains(&x));
            for k in 0..g.order() {
                prop_assert!(core.contains(&g.conj(k, x)));
            }
        }
    }

    #[test]
    fn induced_representations_are_homomorphisms(pick in 0usize..6, gens in proptest::collection::vec(0usize..8, 1..3)) {
        let g = small_group(pick);
        let gens: Vec<usize> = gens.into_iter().map(|x| x % g.order()).collect();
        let mut h = g.generated(&gens);
        h.sort_unstable();
        let rho = regular_representation(&g.subgroup_table(&h).unwrap());
        let ind = induce(&rho, &g, &h).unwrap();
        prop_assert_eq!(ind.dim(), rho.dim() * g.order() / h.len());
        for a in 0..g.order() {
            for b in 0..g.order() {
                let prod = ind.image(a).matrix() * ind.image(b).matrix();
                prop_assert!((&prod - ind.image(g.mul(a, b)).matrix()).max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn map_embedding_separates(pick in 0usize..6) {
        let g = small_group(pick);
        let emb = map_embedding(&g);
        for a in 0..g.order() {
            for b in a + 1..g.order() {
                let apart = emb.coords.iter().any(|(_, rep)| {
                    op_norm(&(rep.image(a).matrix() - rep.image(b).matrix())) >= 1e-6
                });
                prop_assert!(apart, "{a} and {b} are not separated");
            }
        }
    }

    #[test]
    fn regrouping_keeps_the_supernatural_number(
        prefix in proptest::collection::vec(2u64..13, 0..4),
        period in proptest::collection::vec(2u64..13, 1..4),
        explicit in proptest::collection::vec(1usize..4, 0..3),
        tail in proptest::collection::vec(1usize..4, 1..3),
    ) {
        let seq = FactorSequence::Pattern { prefix, period };
        let r = regroup(&seq, BlockPartition::new(explicit, tail).unwrap()).unwrap();
        prop_assert_eq!(supernatural_of(&seq).unwrap(), supernatural_of(&r.result).unwrap());
        prop_assert!(r.preserves_type().unwrap());
    }

    #[test]
    fn stages_are_homomorphisms(pick in 0usize..6, stage in 1usize..3, kind in 0usize..3) {
        let g = small_group(pick);
        let a = match kind {
            0 => regular_action(&g),
            1 => map_embed_action(&g),
            _ => tensor_power(&map_embed_action(&g), 2).unwrap(),
        };
        let stage = if a.factors().prefix(stage).unwrap().iter().product::<u64>() > 400 { 1 } else { stage };
        let us: Vec<UnitaryMatrix> =
            (0..g.order()).map(|x| evaluate(&a, &Element::Index(x), stage).unwrap().unitary).collect();
        for x in 0..g.order() {
            for y in 0..g.order() {
                let prod = us[x].matrix() * us[y].matrix();
                prop_assert!((&prod - us[g.mul(x, y)].matrix()).max_abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn abelian_stages_are_homomorphisms(
        x in proptest::collection::vec(-3i64..4, 3),
        y in proptest::collection::vec(-3i64..4, 3),
        stage in 1usize..4,
    ) {
        let group = GroupSpec::AbelianPresented(AbelianGroup::from_orders(&[Some(2), None, Some(3)]).unwrap());
        let a = abelian_action(&group, Real::Sqrt(2)).unwrap();
        let (ex, ey) = (Element::Exponents(x), Element::Exponents(y));
        let xy = group.mul(&ex, &ey).unwrap();
        let ux = evaluate(&a, &ex, stage).unwrap().unitary;
        let uy = evaluate(&a, &ey, stage).unwrap().unitary;
        let uxy = evaluate(&a, &xy, stage).unwrap().unitary;
        prop_assert!((&(ux.matrix() * uy.matrix()) - uxy.matrix()).max_abs() <= 1e-10);
    }

    #[test]
    fn diagonal_flow_group_law(n in 1usize..40, p in -20i64..20, q in 1i64..20, s in -20i64..20, t in 1i64..20, irrational: bool) {
        let theta = if irrational { Real::Sqrt(2) } else { Real::Rational(Rational64::from_integer(1)) };
        let (r1, r2) = (Rational64::new(p, q), Rational64::new(s, t));
        let lhs = diagonal_flow(n, theta, Real::Rational(r1)).mul(&diagonal_flow(n, theta, Real::Rational(r2))).unwrap();
        let rhs = diagonal_flow(n, theta, Real::Rational(r1 + r2));
        prop_assert!((lhs.matrix() - rhs.matrix()).max_abs() <= 1e-12);
    }

    #[test]
    fn tensor_power_is_a_reordered_tensor_product(pick in 0usize..6, x in 0usize..8) {
        let g = small_group(pick);
        let x = Element::Index(x % g.order());
        let a = map_embed_action(&g);
        let p = tensor_power(&a, 2).unwrap();
        let m = 2;
        let e = evaluate(&a, &x, m).unwrap();
        let both = e.unitary.matrix().kron(e.unitary.matrix());
        let dims: Vec<usize> = e.dims.iter().chain(&e.dims).copied().collect();
        let order: Vec<usize> = (0..m).flat_map(|j| [j, m + j]).collect();
        let perm = tensor_reorder(&dims, &order).unwrap();
        let want = perm.conjugate(&both).unwrap();
        prop_assert!((&want - evaluate(&p, &x, 2 * m).unwrap().unitary.matrix()).max_abs() <= 1e-12);
    }

    #[test]
    fn interleave_identity_places_blocks(pick in 0usize..6, x in 0usize..8) {
        let g = small_group(pick);
        let x = Element::Index(x % g.order());
        let a = regular_action(&g);
        let u = interleave_identity(&a).unwrap();
        let blocks = identity_gap_blocks(&a, 2).unwrap();
        let mut next = 0;
        for pos in 0..blocks.last().unwrap().2 - 1 {
            let f = u.factor(pos).unwrap().image(u.group(), &x).unwrap();
            prop_assert_eq!(f.dim() as u64, u.factors().size(pos).unwrap());
            match blocks.get(next) {
                Some(&(start, end, size)) if size == pos + 2 => {
                    let want = a.block(start, end).unwrap().image(a.group(), &x).unwrap();
                    prop_assert!((f.matrix() - want.matrix()).max_abs() == 0.0);
                    next += 1;
                }
                _ => prop_assert!((f.matrix() - &ComplexMatrix::identity(f.dim())).max_abs() == 0.0),
            }
        }
        prop_assert_eq!(next, blocks.len());
    }

    #[test]
    fn cyclic_tower_covers_the_smallest_class(k in 2usize..6, exps in proptest::collection::vec(0i64..6, 1..20)) {
        let phases: Vec<Phase> = exps.iter().map(|&e| Phase::exact(e, k as i64)).collect();
        let u = UnitaryMatrix::diagonal(&phases);
        let t = best_cyclic_tower(&u, k as u64, 1e-9).unwrap();
        let d = tower_defects(&t, &u, &[]).unwrap();
        let mut counts = vec![0usize; k];
        for e in &exps {
            counts[(e % k as i64) as usize] += 1;
        }
        let covered = (k * counts.iter().min().unwrap()) as f64 / exps.len() as f64;
        prop_assert_eq!(d.orthogonality, 0.0);
        prop_assert_eq!(d.shift, 0.0);
        prop_assert!((t.covered_trace() - covered).abs() <= 1e-12);
        prop_assert!((d.trace - (1.0 - covered)).abs() <= 1e-12);
    }

    #[test]
    fn dense_cyclic_towers_shift(seed in any::<u64>(), k in 2usize..5, reps in 1usize..4) {
        // a conjugated diagonal loses exactness but keeps the eigenspaces
        let mut r = rng(seed);
        let phases: Vec<Phase> = (0..k * reps).map(|i| Phase::exact((i % k) as i64, k as i64)).collect();
        let w = random_unitary(&mut r, k * reps);
        let u = UnitaryMatrix::new(w.conjugate(UnitaryMatrix::diagonal(&phases).matrix()).unwrap()).unwrap();
        let t = best_cyclic_tower(&u, k as u64, 1e-9).unwrap();
        let d = tower_defects(&t, &u, &[]).unwrap();
        prop_assert!(d.orthogonality <= 1e-10);
        prop_assert!(d.shift <= k as f64 * 1e-9);
        prop_assert!(d.trace <= 1e-10);
    }

    #[test]
    fn coarser_blocks_never_raise_the_trace_defect(k in 2usize..4, a in proptest::collection::vec(0i64..4, 2..6), b in proptest::collection::vec(0i64..4, 2..6)) {
        let block = |e: &[i64]| UnitaryMatrix::diagonal(&e.iter().map(|&x| Phase::exact(x, k as i64)).collect::<Vec<_>>());
        let (ua, ub) = (block(&a), block(&b));
        let fine = tower_defects(&best_cyclic_tower(&ua, k as u64, 1e-9).unwrap(), &ua, &[]).unwrap();
        let joined = ua.kron(&ub).unwrap();
        let coarse = tower_defects(&best_cyclic_tower(&joined, k as u64, 1e-9).unwrap(), &joined, &[]).unwrap();
        prop_assert!(coarse.trace <= fine.trace + 1e-15);
    }

    #[test]
    fn extend_left_keeps_defects(seed in any::<u64>(), k in 2usize..5, extra in 1usize..4) {
        let mut r = rng(seed);
        let exps: Vec<i64> = (0..k + extra).map(|_| r.gen_range(0..k as i64)).collect();
        let u = UnitaryMatrix::diagonal(&exps.iter().map(|&e| Phase::exact(e, k as i64)).collect::<Vec<_>>());
        let w = random_unitary(&mut r, extra + 1);
        let ta = best_cyclic_tower(&u, k as u64, 1e-9).unwrap();
        let tb = RokhlinTower::new(vec![Projection::identity(w.dim())], true).unwrap();
        let ext = tensor_tower(&ta, &tb, TowerMode::ExtendLeft).unwrap();
        let d0 = tower_defects(&ta, &u, &[]).unwrap();
        let d1 = tower_defects(&ext, &u.kron(&w).unwrap(), &[]).unwrap();
        prop_assert!((d0.orthogonality - d1.orthogonality).abs() <= 1e-14);
        prop_assert!((d0.shift - d1.shift).abs() <= 1e-14);
        prop_assert!((d0.trace - d1.trace).abs() <= 1e-14);
    }

    #[test]
    fn two_norm_identity(seed in any::<u64>(), n in 1usize..65) {
        let mut r = rng(seed);
        let (w, v) = (random_unitary(&mut r, n), random_unitary(&mut r, n));
        let (wn, vn) = (w.matrix().to_nalgebra(), v.matrix().to_nalgebra());
        let lhs = two_norm_sq(&(&wn * &vn * wn.adjoint() - &vn));
        prop_assert!((lhs - 2.0 * (1.0 - commutator_trace(&w, &v).unwrap().re)).abs() <= 1e-12);
    }

    #[test]
    fn commutator_trace_inversion_symmetry(seed in any::<u64>(), n in 1usize..20) {
        let mut r = rng(seed);
        let (u, v) = (random_unitary(&mut r, n), random_unitary(&mut r, n));
        let a = commutator_trace(&u, &v).unwrap();
        let b = commutator_trace(&v, &u).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_series_tends_to_parity_limits(p in 1i64..12, q in 2i64..13, irrational: bool) {
        let r = Rational64::new(p, q);
        let theta = if irrational { Real::Sqrt(2) } else { Real::Rational(Rational64::new(1, 3)) };
        let s = flow_series(theta, Real::Rational(r), 64).unwrap();
        let rf = p as f64 / q as f64;
        let tau2 = std::f64::consts::TAU;
        for (n, z) in s.indices.iter().zip(&s.values) {
            let th = if n % 2 == 0 { theta.value() } else { 1.0 };
            let limit = C64::from_polar(1.0, -tau2 * th * rf);
            prop_assert!((z - limit).norm() <= 2.0 / *n as f64 + 1e-12, "n = {}", n);
            prop_assert!((z - flow_commutator_trace(*n, theta.value(), rf)).norm() <= 1e-12);
        }
    }

    #[test]
    fn bump_up_trace_defects_follow_levels(k in 2usize..4, extra in proptest::collection::vec(0i64..3, 0..3), target in 0usize..3, levels in 1usize..6) {
        let a = zk_action(k, &extra);
        let g = Element::Index(1);
        let s = certify_schedule(&a, &g, Some(k as u64), levels, &halving(), &CertifyOptions::default()).unwrap();
        prop_assume!(s.pass());
        let b = bump_up(&a, &s, &FactorSequence::constant([2, 3, 5][target])).unwrap();
        for (lv, st) in b.plan.levels.iter().zip(&b.schedule.stages) {
            prop_assert!(st.defects.trace <= 2f64.powi(1 - lv.level as i32));
            prop_assert_eq!(lv.target_size, lv.quotient * lv.source_size + lv.remainder);
            prop_assert!(((lv.source_size as f64) / (lv.target_size as f64)) < 2f64.powi(-(lv.level as i32)));
        }
    }

    #[test]
    fn cut_down_towers_are_exact(k in 2usize..4, extra in proptest::collection::vec(0i64..3, 0..3)) {
        let a = zk_action(k, &extra);
        let g = Element::Index(1);
        let s = certify_schedule(&a, &g, Some(k as u64), 5, &halving(), &CertifyOptions::default()).unwrap();
        prop_assume!(s.pass());
        let c = cut_down(&a, &s).unwrap();
        let opts = CertifyOptions { max_block_factors: 1, ..Default::default() };
        let t = certify_schedule(&c.action, &g, Some(k as u64), 6, &halving(), &opts).unwrap();
        for st in &t.stages {
            prop_assert!(st.defects.exact);
            prop_assert_eq!(st.defects.worst(), 0.0);
        }
    }

    #[test]
    fn extension_character_identity(pick in 0usize..6, gen in 0usize..8) {
        let g = small_group(pick);
        let mut h = g.generated(&[gen % g.order()]);
        h.sort_unstable();
        let a_h = regular_action(&g.subgroup_table(&h).unwrap());
        let ext = extend_finite_index(&a_h, &GroupSpec::FiniteTable(g.clone()), &h, 2).unwrap();
        prop_assert!(ext.character_defect <= 1e-12);
        prop_assert_eq!(ext.index, g.order() / h.len());
    }

    #[test]
    fn crossed_stages_are_covariant(k in 2usize..4, extra in proptest::collection::vec(0i64..3, 0..2), m in 0usize..3) {
        let a = zk_action(k, &extra);
        let r = verify_covariance(&CrossedStage::of_action(&a, m).unwrap()).unwrap();
        prop_assert!(r.defect <= 1e-10 && r.representation_defect <= 1e-10);
    }

    #[test]
    fn pullback_keeps_traces_positive(pick in 0usize..6, seed in any::<u64>()) {
        let g = small_group(pick);
        let spec = GroupSpec::FiniteTable(g.clone());
        let alg = group_cstar_stage(&spec).unwrap();
        let a = if seed % 2 == 0 { regular_action(&g) } else { map_embed_action(&g) };
        let f = a.factor((seed % 3) as usize).unwrap();
        let images: Vec<UnitaryMatrix> = (0..g.order()).map(|x| f.image(&spec, &Element::Index(x)).unwrap()).collect();
        for v in &alg.vertices {
            prop_assert!(is_positive_definite(v, &g, 1e-10).unwrap());
            prop_assert!(is_positive_definite(&trace_pullback(v, &images).unwrap(), &g, 1e-10).unwrap());
        }
        let delta: Vec<C64> = (0..g.order()).map(|x| if x == g.identity() { ONE } else { ZERO }).collect();
        let back = trace_pullback(&delta, &images).unwrap();
        for (x, y) in back.iter().zip(&delta) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn simplex_diameter_never_grows(pick in 0usize..6, kind: bool) {
        let g = small_group(pick);
        let a = if kind { regular_action(&g) } else { map_embed_action(&g) };
        let states = trace_simplex_diameter(&a, 6).unwrap();
        for w in states.windows(2) {
            prop_assert!(w[1].diameter <= w[0].diameter + 1e-12);
        }
    }
}

#[test]
fn flow_commutator_matches_matrices() {
    for n in 1..=64 {
        for (theta, tf) in [(Real::Rational(Rational64::from_integer(1)), 1.0), (Real::Sqrt(2), 2f64.sqrt())] {
            for (p, q) in [(1, 7), (1, 3), (1, 2)] {
                let r = Rational64::new(p, q);
                let c = commutator(&uhf_core::algebra::cycle_unitary(n), &diagonal_flow(n, theta, Real::Rational(r)))
                    .unwrap()
                    .normalized_trace();
                assert!((c - flow_commutator_trace(n, tf, p as f64 / q as f64)).norm() <= 1e-12, "n = {n}");
            }
        }
    }
}
