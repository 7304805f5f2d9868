//! Property-based checks of the geometric and algebraic invariants.

use std::f64::consts::{PI, TAU};

use chaingeo::boundary_map::BoundaryMap;
use chaingeo::busemann::busemann;
use chaingeo::cartan::{cartan_invariant, chain_through, random_chain};
use chaingeo::finite::{
    bruhat_beta, differential_d, differential_q, fibered_product, homotopy_h, psi_kernel, random_function,
    FiniteGroupModel, WeightedQuotient,
};
use chaingeo::forms::{delta_form_eval, BoundaryCocycle, McConfig};
use chaingeo::hermitian::{herm, CVector, HermitianModel, ProjPoint, AREA_TOL, C64};
use chaingeo::isometry::{EmbeddingMap, Isometry};
use chaingeo::projective::{complete_quadrilateral, cross_ratio, AffLine, QuadConfig};
use chaingeo::reconstruction::{fit_embedding, BoundarySampleMap};
use chaingeo::sampling::{boundary_point, interior_point, rng};
use chaingeo::toledo::{toledo_surface_group, toledo_surface_group_at, SurfaceGroupRep};
use proptest::prelude::*;

fn cvec(parts: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(parts.len(), parts.iter().map(|&(a, b)| C64::new(a, b)))
}

fn cartan(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> f64 {
    cartan_invariant(a, b, c).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn form_is_conjugate_symmetric(
        x in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 4),
        y in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 4),
    ) {
        let (x, y) = (cvec(&x), cvec(&y));
        let a = herm(&x, &y);
        let b = herm(&y, &x).conj();
        prop_assert!((a - b).norm() <= 1e-14 * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn distance_is_isometry_invariant(seed in any::<u64>(), p in 1usize..4) {
        let model = HermitianModel::new(p).unwrap();
        let mut r = rng(seed);
        let g = Isometry::random(p, seed ^ 0x5eed);
        let x = interior_point(p, 0.9, &mut r);
        let y = interior_point(p, 0.9, &mut r);
        let d0 = model.distance(&x, &y).unwrap();
        let d1 = model.distance(&g.apply(&x).unwrap(), &g.apply(&y).unwrap()).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-9, "{} {}", d0, d1);
    }

    #[test]
    fn isometries_preserve_cartan(seed in any::<u64>(), p in 1usize..4) {
        let mut r = rng(seed);
        let g = Isometry::random(p, seed.wrapping_add(1));
        let x: Vec<ProjPoint> = (0..3).map(|_| boundary_point(p, &mut r)).collect();
        let gx: Vec<ProjPoint> = x.iter().map(|v| g.apply(v).unwrap()).collect();
        prop_assert!((cartan(&x[0], &x[1], &x[2]) - cartan(&gx[0], &gx[1], &gx[2])).abs() < 1e-9);
    }

    #[test]
    fn cartan_cocycle_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x: Vec<ProjPoint> = (0..4).map(|_| boundary_point(2, &mut r)).collect();
        let s = cartan(&x[1], &x[2], &x[3]) - cartan(&x[0], &x[2], &x[3]) + cartan(&x[0], &x[1], &x[3])
            - cartan(&x[0], &x[1], &x[2]);
        prop_assert!(s.abs() < 1e-9);
    }

    #[test]
    fn chain_triples_are_extremal(seed in any::<u64>(), t in prop::array::uniform3(0.0f64..TAU)) {
        let mut r = rng(seed);
        let ch = random_chain(2, &mut r);
        let gap = |a: f64, b: f64| (a - b).rem_euclid(TAU).min((b - a).rem_euclid(TAU));
        prop_assume!(gap(t[0], t[1]) > 1e-2 && gap(t[1], t[2]) > 1e-2 && gap(t[0], t[2]) > 1e-2);
        let x: Vec<ProjPoint> = t.iter().map(|&s| ch.sample(s)).collect();
        prop_assert!(cartan(&x[0], &x[1], &x[2]).abs() >= 1.0 - 1e-7);
        prop_assert!(chain_through(&x[0], &x[1]).unwrap().contains(&x[2], 1e-7));
    }

    #[test]
    fn non_extremal_triples_are_off_chain(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x: Vec<ProjPoint> = (0..3).map(|_| boundary_point(2, &mut r)).collect();
        let on = chain_through(&x[0], &x[1]).unwrap().contains(&x[2], 1e-7);
        let extremal = cartan(&x[0], &x[1], &x[2]).abs() >= 1.0 - 1e-7;
        prop_assert_eq!(on, extremal);
    }

    #[test]
    fn isometries_map_chains_to_chains(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = Isometry::random(2, seed ^ 7);
        let (a, b) = (boundary_point(2, &mut r), boundary_point(2, &mut r));
        let image = chain_through(&g.apply(&a).unwrap(), &g.apply(&b).unwrap()).unwrap();
        let ch = chain_through(&a, &b).unwrap();
        for k in 0..50 {
            let z = g.apply(&ch.sample(k as f64 * TAU / 50.0)).unwrap();
            prop_assert!(image.contains(&z, 1e-8));
        }
    }

    #[test]
    fn embeddings_map_chains_to_chains(seed in any::<u64>()) {
        let mut r = rng(seed);
        let w = EmbeddingMap::standard(2, 3).unwrap().then(&Isometry::random(3, seed ^ 9)).unwrap();
        let ch = random_chain(2, &mut r);
        let [a, b] = ch.defining_points();
        let image = chain_through(&w.apply(a).unwrap(), &w.apply(b).unwrap()).unwrap();
        for k in 0..20 {
            let z = w.apply(&ch.sample(0.3 + k as f64 * TAU / 20.0)).unwrap();
            prop_assert!(image.contains(&z, 1e-8));
        }
    }

    #[test]
    fn busemann_is_additive(seed in any::<u64>()) {
        let model = HermitianModel::new(2).unwrap();
        let mut r = rng(seed);
        let xi = boundary_point(2, &mut r);
        let (x, y, z) = (interior_point(2, 0.9, &mut r), interior_point(2, 0.9, &mut r), interior_point(2, 0.9, &mut r));
        let lhs = busemann(&model, &xi, &x, &y).unwrap() + busemann(&model, &xi, &y, &z).unwrap();
        let rhs = busemann(&model, &xi, &x, &z).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()) * 10.0);
    }

    #[test]
    fn cross_ratio_is_homography_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = || chaingeo::sampling::complex_gaussian(&mut r);
        let pts = [g(), g(), g(), g()];
        let (a, b, c, d) = (g(), g(), g(), g());
        prop_assume!((a * d - b * c).norm() > 0.2);
        let f = |z: C64| (a * z + b) / (c * z + d);
        prop_assume!(pts.iter().all(|&z| (c * z + d).norm() > 0.1));
        let x = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let y = cross_ratio(&f(pts[0]), &f(pts[1]), &f(pts[2]), &f(pts[3])).unwrap();
        prop_assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn floating_quadrilateral_is_harmonic(
        a in (-5.0f64..5.0, -5.0f64..5.0),
        dir in 0.0f64..PI,
        turn in 0.3f64..2.8,
        t in (0.5f64..4.0, -4.0f64..-0.5),
        m in (-6.0f64..6.0, -6.0f64..6.0),
    ) {
        let a = C64::new(a.0, a.1);
        let u = C64::from_polar(1.0, dir);
        let d = AffLine::new(a, u).unwrap();
        let dp = AffLine::new(a, C64::from_polar(1.0, dir + turn)).unwrap();
        let (b, c) = (a + u * t.0, a + u * t.1);
        let cfg = QuadConfig::new(dp, d, a, b, c, C64::new(m.0, m.1));
        prop_assume!(cfg.is_ok());
        let res = complete_quadrilateral(&cfg.unwrap());
        prop_assume!(res.is_ok());
        let x = cross_ratio(&a, &b, &c, &res.unwrap()).unwrap();
        prop_assert!((x + 1.0).norm() < 1e-9, "{}", x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn triangle_area_is_antisymmetric_and_bounded(seed in any::<u64>()) {
        let model = HermitianModel::new(2).unwrap();
        let mut r = rng(seed);
        let (x, y, z) = (interior_point(2, 0.95, &mut r), interior_point(2, 0.95, &mut r), interior_point(2, 0.95, &mut r));
        let a = model.triangle_area(&x, &y, &z).unwrap();
        let b = model.triangle_area(&y, &x, &z).unwrap();
        prop_assert!((a.value + b.value).abs() < 2.0 * AREA_TOL);
        prop_assert!(a.value.abs() <= PI * (1.0 + 1e-3));
    }

    #[test]
    fn delta_form_is_antisymmetric(seed in any::<u64>()) {
        let model = HermitianModel::new(2).unwrap();
        let mut r = rng(seed);
        let x = interior_point(2, 0.7, &mut r);
        let f = model.tangent_frame(&x).unwrap();
        let c = BoundaryCocycle::cartan();
        let cfg = McConfig::new(2000, seed);
        let a = delta_form_eval(&model, 2.0, &c, &x, &[f[0].clone(), f[2].clone()], cfg).unwrap();
        let b = delta_form_eval(&model, 2.0, &c, &x, &[f[2].clone(), f[0].clone()], cfg).unwrap();
        prop_assert!((a.value + b.value).abs() <= 2.0 * a.stderr + 1e-12);
        prop_assert!(a.within_bound());
    }

    #[test]
    fn toledo_is_conjugation_and_basepoint_invariant(seed in any::<u64>()) {
        let model = HermitianModel::new(1).unwrap();
        let rep = SurfaceGroupRep::fuchsian(2).unwrap();
        let base = toledo_surface_group(&model, &rep).unwrap();
        let g = Isometry::random_with_scale(1, seed, 0.5);
        let conj = toledo_surface_group(&model, &rep.conjugated_by(&g).unwrap()).unwrap();
        prop_assert!((conj.value - base.value).abs() < 2.0 * (conj.error_bound + base.error_bound));
        let x = interior_point(1, 0.6, &mut rng(seed));
        let moved = toledo_surface_group_at(&model, &rep, &x).unwrap();
        prop_assert!((moved.value - base.value).abs() < 1e-3);
        let neg = toledo_surface_group(&model, &rep.conj()).unwrap();
        prop_assert_eq!(neg.value, -base.value);
    }

    #[test]
    fn fitted_embedding_transports_cartan(seed in any::<u64>()) {
        let phi = BoundaryMap::standard(2, 3).unwrap().then(&Isometry::random(3, seed)).unwrap();
        let s = BoundarySampleMap::sample(&phi, 80, 0, 0, seed ^ 3).unwrap();
        let fit = fit_embedding(&s).unwrap();
        let mut r = rng(seed ^ 4);
        for _ in 0..10 {
            let x: Vec<ProjPoint> = (0..3).map(|_| boundary_point(2, &mut r)).collect();
            let y: Vec<ProjPoint> = x.iter().map(|v| fit.apply(v).unwrap()).collect();
            prop_assert!((cartan(&x[0], &x[1], &x[2]) - cartan(&y[0], &y[1], &y[2])).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn q_n_intertwines_group_actions(seed in any::<u64>(), preset in prop::sample::select(vec!["S3", "S4", "D4"]), n in 1usize..4) {
        let m = FiniteGroupModel::preset(preset).unwrap();
        let w = WeightedQuotient::ramp(&m);
        let s = fibered_product(&m, &w, n);
        let mut r = rng(seed);
        use rand::Rng;
        let g = r.random_range(0..m.order());
        let a = r.random_range(0..m.order());
        let xs: Vec<usize> = (0..n).map(|_| r.random_range(0..m.index_hq())).collect();
        prop_assert_eq!(s.act(&m, g, s.q_n(&m, a, &xs)), s.q_n(&m, m.mul(g, a), &xs));
    }

    #[test]
    fn cocycles_have_explicit_primitives(seed in any::<u64>(), preset in prop::sample::select(vec!["S3", "D4"]), n in 0usize..3) {
        let m = FiniteGroupModel::preset(preset).unwrap();
        let w = WeightedQuotient::ramp(&m);
        let psi = psi_kernel(&m, &bruhat_beta(&m), &w).unwrap();
        let (lo, hi) = (fibered_product(&m, &w, n), fibered_product(&m, &w, n + 1));
        let f = random_function(lo.len(), seed);
        let cocycle = hi.lift(&differential_d(&lo, &hi, &f).unwrap()).unwrap();
        let primitive = homotopy_h(&m, &psi, &w, &cocycle).unwrap();
        prop_assert_eq!(differential_q(&m, &primitive), cocycle);
        // the primitive is H-invariant, i.e. a function on the fibered product
        prop_assert!(lo.descend(&primitive).is_ok());
    }
}
