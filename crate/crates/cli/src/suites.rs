//! Invariant suites behind `chaingeo verify`.
//!
//! Each suite draws its inputs from the seed and a size parameter `n`.
//! Identities are checked at [`IDENTITY_TOL`]; Monte Carlo checks use a
//! z-score threshold of [`Z_MAX`].

use std::f64::consts::{PI, TAU};

use chaingeo::boundary_map::BoundaryMap;
use chaingeo::busemann::{
    busemann, e_xi_integral, measure_transform_check, measure_transform_check_with_entropy, volume_entropy,
};
use chaingeo::cartan::{cartan_invariant, chain_through, random_chain};
use chaingeo::finite::{exact_suite, FiniteGroupModel, WeightedQuotient};
use chaingeo::forms::{delta_form_eval, BoundaryCocycle, McConfig};
use chaingeo::hermitian::{herm, projective_distance, CVector, HermitianModel, ProjPoint, AREA_TOL, C64};
use chaingeo::isometry::{EmbeddingMap, Isometry};
use chaingeo::projective::{cross_ratio, fit_affine, harmonic_conjugate, Harmonic};
use chaingeo::reconstruction::{fit_embedding, BoundarySampleMap};
use chaingeo::sampling::{boundary_point, complex_gaussian, derive_seed, interior_point, rng};
use chaingeo::toledo::{milnor_wood_check, toledo_surface_group, toledo_surface_group_at, SurfaceGroupRep};
use chaingeo::Error;
use serde::Serialize;

use crate::CliError;

pub const SUITES: [&str; 9] = [
    "hermitian",
    "isometry",
    "cartan",
    "busemann",
    "forms",
    "toledo",
    "projective",
    "reconstruction",
    "finite",
];

pub const DEFAULT_SCALE: usize = 200;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const Z_MAX: f64 = 4.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

struct Acc {
    suite: &'static str,
    out: Vec<Check>,
}

impl Acc {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.out.push(Check {
            suite: self.suite,
            name: name.into(),
            passed,
            detail,
        });
    }

    fn below(&mut self, name: &str, value: f64, tol: f64) {
        self.check(name, value < tol, format!("{value:.3e} < {tol:.0e}"));
    }
}

pub fn run_suite(name: &str, seed: u64, n: usize) -> Result<Vec<Check>, CliError> {
    let suite = SUITES
        .iter()
        .copied()
        .find(|s| *s == name)
        .ok_or_else(|| CliError::Input(format!("unknown suite {name:?}")))?;
    let mut acc = Acc { suite, out: Vec::new() };
    let seed = derive_seed(seed, SUITES.iter().position(|s| *s == name).unwrap() as u64);
    let n = n.max(1);
    match suite {
        "hermitian" => hermitian(&mut acc, seed, n)?,
        "isometry" => isometry(&mut acc, seed, n)?,
        "cartan" => cartan(&mut acc, seed, n)?,
        "busemann" => busemann_suite(&mut acc, seed, n)?,
        "forms" => forms(&mut acc, seed, n)?,
        "toledo" => toledo(&mut acc, seed)?,
        "projective" => projective(&mut acc, seed, n)?,
        "reconstruction" => reconstruction(&mut acc, seed)?,
        "finite" => finite(&mut acc, seed, n)?,
        _ => unreachable!(),
    }
    Ok(acc.out)
}

fn c(a: &ProjPoint, b: &ProjPoint, d: &ProjPoint) -> Result<f64, Error> {
    Ok(cartan_invariant(a, b, d)?.value)
}

fn hermitian(acc: &mut Acc, seed: u64, n: usize) -> Result<(), CliError> {
    let mut r = rng(seed);
    let model = HermitianModel::new(2)?;
    let mut sym = 0.0f64;
    for _ in 0..n {
        let x = CVector::from_fn(3, |_, _| complex_gaussian(&mut r));
        let y = CVector::from_fn(3, |_, _| complex_gaussian(&mut r));
        sym = sym.max((herm(&x, &y) - herm(&y, &x).conj()).norm());
    }
    acc.below("conjugate_symmetry", sym, IDENTITY_TOL);

    let mut inv = 0.0f64;
    for k in 0..n {
        let g = Isometry::random(2, derive_seed(seed, k as u64));
        let (x, y) = (interior_point(2, 0.9, &mut r), interior_point(2, 0.9, &mut r));
        let d0 = model.distance(&x, &y)?;
        inv = inv.max((d0 - model.distance(&g.apply(&x)?, &g.apply(&y)?)?).abs() / (1.0 + d0));
    }
    acc.below("distance_isometry_invariance", inv, IDENTITY_TOL);

    let ch = random_chain(2, &mut r);
    let pts: Vec<ProjPoint> = [0.1, 2.2, 4.1].iter().map(|&t| ch.sample(t)).collect();
    let area = model.triangle_area(&pts[0], &pts[1], &pts[2])?;
    acc.below("ideal_chain_triangle_area_is_pi", (area.value.abs() - PI).abs(), 1e-4);

    let (x, y, z) = (
        interior_point(2, 0.9, &mut r),
        interior_point(2, 0.9, &mut r),
        interior_point(2, 0.9, &mut r),
    );
    let a = model.triangle_area(&x, &y, &z)?.value;
    let b = model.triangle_area(&y, &x, &z)?.value;
    acc.below("area_antisymmetry", (a + b).abs(), 2.0 * AREA_TOL);
    Ok(())
}

fn isometry(acc: &mut Acc, seed: u64, n: usize) -> Result<(), CliError> {
    let mut r = rng(seed);
    let mut res = 0.0f64;
    let mut inv = 0.0f64;
    for k in 0..n.min(100) {
        let g = Isometry::random(3, derive_seed(seed, k as u64));
        res = res.max(g.residual());
        inv = inv.max(g.compose(&g.inverse())?.projective_identity_residual());
    }
    acc.below("form_preserved", res, IDENTITY_TOL);
    acc.below("inverse_composes_to_identity", inv, IDENTITY_TOL);

    let w = EmbeddingMap::standard(2, 3)?.then(&Isometry::random(3, derive_seed(seed, 999)))?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let ch = random_chain(2, &mut r);
        let [a, b] = ch.defining_points();
        let image = chain_through(&w.apply(a)?, &w.apply(b)?)?;
        for k in 0..20 {
            worst = worst.max(image.residual(&w.apply(&ch.sample(0.2 + TAU * k as f64 / 20.0))?));
        }
    }
    acc.below("embeddings_map_chains_to_chains", worst, 1e-8);
    Ok(())
}

fn cartan(acc: &mut Acc, seed: u64, n: usize) -> Result<(), CliError> {
    let mut r = rng(seed);
    let mut cocycle = 0.0f64;
    let mut invariance = 0.0f64;
    for k in 0..5 * n {
        let x: Vec<ProjPoint> = (0..4).map(|_| boundary_point(2, &mut r)).collect();
        let s = c(&x[1], &x[2], &x[3])? - c(&x[0], &x[2], &x[3])? + c(&x[0], &x[1], &x[3])? - c(&x[0], &x[1], &x[2])?;
        cocycle = cocycle.max(s.abs());
        if k < n {
            let g = Isometry::random(2, derive_seed(seed, k as u64));
            let gx: Vec<ProjPoint> = x.iter().map(|v| g.apply(v)).collect::<Result<_, _>>()?;
            invariance = invariance.max((c(&x[0], &x[1], &x[2])? - c(&gx[0], &gx[1], &gx[2])?).abs());
        }
    }
    acc.below("cocycle_identity", cocycle, IDENTITY_TOL);
    acc.below("isometry_invariance", invariance, IDENTITY_TOL);

    let mut extremal_gap = 0.0f64;
    for _ in 0..n {
        let ch = random_chain(2, &mut r);
        let t0 = r_unit(&mut r) * TAU;
        let x: Vec<ProjPoint> = [t0, t0 + 1.9, t0 + 4.0].iter().map(|&t| ch.sample(t)).collect();
        extremal_gap = extremal_gap.max(1.0 - c(&x[0], &x[1], &x[2])?.abs());
    }
    acc.below("chain_triples_extremal", extremal_gap, 1e-7);

    let mut generic = 0;
    for _ in 0..n {
        let x: Vec<ProjPoint> = (0..3).map(|_| boundary_point(2, &mut r)).collect();
        if c(&x[0], &x[1], &x[2])?.abs() < 1.0 - 1e-7 {
            generic += 1;
        }
    }
    let frac = generic as f64 / n as f64;
    acc.check(
        "generic_triples_not_extremal",
        frac >= 0.99,
        format!("{generic}/{n} generic triples have |c| < 1 - 1e-7"),
    );
    Ok(())
}

fn r_unit(r: &mut impl rand::Rng) -> f64 {
    r.random::<f64>()
}

fn busemann_suite(acc: &mut Acc, seed: u64, n: usize) -> Result<(), CliError> {
    let model = HermitianModel::new(2)?;
    let h = volume_entropy(&model)?;
    acc.below("entropy_equals_p", (h.value - 2.0).abs() / 2.0, 0.02);

    let mut r = rng(seed);
    let xi = boundary_point(2, &mut r);
    let mut add = 0.0f64;
    for _ in 0..n {
        let (x, y, z) = (
            interior_point(2, 0.9, &mut r),
            interior_point(2, 0.9, &mut r),
            interior_point(2, 0.9, &mut r),
        );
        let lhs = busemann(&model, &xi, &x, &y)? + busemann(&model, &xi, &y, &z)?;
        let rhs = busemann(&model, &xi, &x, &z)?;
        add = add.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
    }
    acc.below("cocycle_additivity", add, IDENTITY_TOL);

    let samples = 100 * n;
    let mut worst_z = 0.0f64;
    for k in 0..3 {
        let x = interior_point(2, 0.8, &mut r);
        let e = e_xi_integral(&model, h.value, &x, samples, derive_seed(seed, 10 + k))?;
        worst_z = worst_z.max((e.estimate - 1.0).abs() / e.stderr);
    }
    acc.check(
        "visual_density_integrates_to_one",
        worst_z < Z_MAX,
        format!("max z {worst_z:.2} at N = {samples}"),
    );

    let g = Isometry::random_with_scale(2, derive_seed(seed, 20), 0.7);
    let t = measure_transform_check(&model, &g, samples, derive_seed(seed, 21))?;
    acc.check(
        "pushforward_transform",
        t.max_z < Z_MAX,
        format!("max z {:.2}", t.max_z),
    );
    let bad = measure_transform_check_with_entropy(&model, 1.3 * h.value, &g, samples, derive_seed(seed, 21))?;
    acc.check(
        "wrong_entropy_detected",
        !bad.passed,
        format!("1.3h control max z {:.2}", bad.max_z),
    );
    Ok(())
}

fn forms(acc: &mut Acc, seed: u64, n: usize) -> Result<(), CliError> {
    let model = HermitianModel::new(2)?;
    let h = volume_entropy(&model)?.value;
    let mut r = rng(seed);
    let samples = 10 * n;
    let (mut bounded, mut anti, mut zero_z) = (true, 0.0f64, 0.0f64);
    for k in 0..5u64 {
        let x = interior_point(2, 0.8, &mut r);
        let f = model.tangent_frame(&x)?;
        let cfg = McConfig::new(samples, derive_seed(seed, k));
        let a = delta_form_eval(
            &model,
            h,
            &BoundaryCocycle::cartan(),
            &x,
            &[f[0].clone(), f[1].clone()],
            cfg,
        )?;
        let b = delta_form_eval(
            &model,
            h,
            &BoundaryCocycle::cartan(),
            &x,
            &[f[1].clone(), f[0].clone()],
            cfg,
        )?;
        bounded &= a.within_bound();
        anti = anti.max((a.value + b.value).abs() / (a.stderr + b.stderr + 1e-12));
        let z = delta_form_eval(
            &model,
            h,
            &BoundaryCocycle::constant(3, 1.0),
            &x,
            &[f[0].clone(), f[2].clone()],
            cfg,
        )?;
        zero_z = zero_z.max(if z.stderr > 0.0 {
            z.value.abs() / z.stderr
        } else {
            z.value.abs() * 1e12
        });
    }
    acc.check("bounded_by_entropy", bounded, format!("5 points, N = {samples}"));
    acc.check(
        "antisymmetric",
        anti < Z_MAX,
        format!("max |w(u,v) + w(v,u)| / sigma = {anti:.2}"),
    );
    acc.check(
        "constant_cocycle_vanishes",
        zero_z < Z_MAX,
        format!("max z {zero_z:.2}"),
    );
    Ok(())
}

fn toledo(acc: &mut Acc, seed: u64) -> Result<(), CliError> {
    let model = HermitianModel::new(1)?;
    let rep = SurfaceGroupRep::fuchsian(2)?;
    let f = toledo_surface_group(&model, &rep)?;
    acc.below("fuchsian_is_maximal", (f.value - 1.0).abs(), 1e-3);
    let fc = toledo_surface_group(&model, &rep.conj())?;
    acc.check(
        "conjugate_negates",
        fc.value == -f.value,
        format!("{} vs {}", fc.value, f.value),
    );
    let t = toledo_surface_group(&model, &SurfaceGroupRep::trivial(2, 1)?)?;
    acc.below("trivial_vanishes", t.value.abs(), 1e-12);
    let g = Isometry::random_with_scale(1, derive_seed(seed, 1), 0.5);
    let cj = toledo_surface_group(&model, &rep.conjugated_by(&g)?)?;
    acc.below(
        "conjugation_invariance",
        (cj.value - f.value).abs(),
        2.0 * (cj.error_bound + f.error_bound),
    );
    let x = interior_point(1, 0.6, &mut rng(seed));
    let moved = toledo_surface_group_at(&model, &rep, &x)?;
    acc.below("basepoint_independence", (moved.value - f.value).abs(), 1e-3);
    let mw = milnor_wood_check(&f, 1, 1)?;
    acc.check("milnor_wood", mw.holds, format!("margin {:.2e}", mw.margin));
    Ok(())
}

fn projective(acc: &mut Acc, seed: u64, n: usize) -> Result<(), CliError> {
    let mut r = rng(seed);
    let mut harmonic = 0.0f64;
    let mut invariance = 0.0f64;
    for _ in 0..n {
        // collinear triple, then four concyclic points
        let (o, u) = (complex_gaussian(&mut r), complex_gaussian(&mut r));
        let (a, b, cc) = (o, o + u, o - u * (0.5 + r_unit(&mut r)));
        if let Harmonic::Finite(d) = harmonic_conjugate(&a, &b, &cc)? {
            harmonic = harmonic.max((cross_ratio(&a, &b, &cc, &d)? + 1.0).norm());
        }
        let rad = 0.5 + r_unit(&mut r);
        let on = |t: f64| o + C64::from_polar(rad, t);
        let (a, b, cc, d) = (on(0.3), on(1.9), on(3.4), on(5.1));
        let (m, s) = (complex_gaussian(&mut r), complex_gaussian(&mut r));
        let pole = o + C64::from_polar(rad + 2.0, r_unit(&mut r) * TAU);
        let f = |z: C64| (m * z + s) / (z - pole);
        let x = cross_ratio(&a, &b, &cc, &d)?;
        let y = cross_ratio(&f(a), &f(b), &f(cc), &f(d))?;
        invariance = invariance.max((x - y).norm() / (1.0 + x.norm()));
    }
    acc.below("harmonic_conjugate_cross_ratio", harmonic, 1e-6);
    acc.below("homography_invariance", invariance, 1e-6);

    let lambda = complex_gaussian(&mut r) * 2.0;
    let shift = complex_gaussian(&mut r);
    let samples: Vec<(C64, C64)> = (0..40)
        .map(|_| {
            let z = complex_gaussian(&mut r);
            (z, lambda * z.conj() + shift)
        })
        .collect();
    let fit = fit_affine(&samples)?;
    let err = (fit.lambda - lambda).norm().max((fit.c - shift).norm());
    acc.check(
        "anti_affine_recovered",
        err < 1e-10 && fit.kind == chaingeo::projective::AffineKind::AntiAffine,
        format!("{:?}, coefficient error {err:.2e}", fit.kind),
    );
    Ok(())
}

fn reconstruction(acc: &mut Acc, seed: u64) -> Result<(), CliError> {
    let phi = BoundaryMap::standard(2, 3)?.then(&Isometry::random(3, seed))?;
    let s = BoundarySampleMap::sample(&phi, 200, 0, 0, derive_seed(seed, 1))?;
    let fit = fit_embedding(&s)?;
    let mut r = rng(derive_seed(seed, 2));
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let xi = boundary_point(2, &mut r);
        worst = worst.max(projective_distance(fit.apply(&xi)?.lift(), phi.apply(&xi)?.lift()));
    }
    acc.below("planted_embedding_recovered", worst, 1e-6);
    let scrambled = fit_embedding(&s.scrambled(derive_seed(seed, 3)));
    acc.check(
        "scrambled_rejected",
        matches!(scrambled, Err(Error::NoRigidModel { .. })),
        match scrambled {
            Ok(_) => "fit accepted".into(),
            Err(e) => e.to_string(),
        },
    );
    let conj = fit_embedding(&s.conjugate_source());
    acc.check(
        "orientation_reversal_detected",
        matches!(conj, Err(Error::OrientationReversing)),
        match conj {
            Ok(_) => "fit accepted".into(),
            Err(e) => e.to_string(),
        },
    );
    Ok(())
}

fn finite(acc: &mut Acc, seed: u64, n: usize) -> Result<(), CliError> {
    for name in ["S3", "D4"] {
        let m = FiniteGroupModel::preset(name)?;
        let w = WeightedQuotient::ramp(&m);
        for v in exact_suite(&m, &w, 2, (n / 10).max(1), seed)? {
            acc.check(&format!("{name}/{}", v.name), v.passed, v.detail);
        }
    }
    Ok(())
}
