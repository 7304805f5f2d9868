//! Reconstruction of an isometric holomorphic embedding from a sampled
//! boundary map.
//!
//! A chain-compatible boundary map `∂H_C^p -> ∂H_C^q` that preserves chain
//! orientation agrees with the boundary of an isometric holomorphic
//! embedding. On finite data this becomes a fitting problem: find a linear
//! `W: C^{p+1} -> C^{q+1}` with `W xi_i` parallel to `eta_i`, then project
//! `W` onto the form-preserving maps.
//!
//! The fit is engineering, not a proof: a homogeneous least-squares solve
//! (smallest right singular vector of the stacked constraints
//! `(I - eta eta^*) W xi = 0`), trimmed refits to discard outliers, a
//! phase-aligned linear refinement, and a Newton-Schulz projection onto
//! `W^* J W = lambda J`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_map::{table_from_json, table_to_json, BoundaryMap};
use crate::cartan::{cartan_invariant, chain_through, random_chain};
use crate::error::{Error, Result};
use crate::hermitian::{projective_distance, CVector, ProjPoint, C64};
use crate::isometry::{form_matrix, matrix_to_rows, CMatrix, EmbeddingMap, MatrixRows};
use crate::sampling;

/// Chain membership tolerance for sampled triples.
pub const CHAIN_TOL: f64 = 1e-8;
/// Minimum passing fraction for the compatibility check.
pub const COMPATIBILITY_THRESHOLD: f64 = 0.99;
/// RMS projective residual above which no rigid model is accepted.
pub const PLATEAU: f64 = 1e-4;
/// Co-chain triples needed before the compatibility verdict means anything.
pub const MIN_CHAIN_TRIPLES: usize = 10;

/// A finite sample `xi_i -> eta_i` of a boundary map.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySampleMap {
    pairs: Vec<(ProjPoint, ProjPoint)>,
    p: usize,
    q: usize,
}

impl BoundarySampleMap {
    pub fn new(pairs: Vec<(ProjPoint, ProjPoint)>) -> Result<Self> {
        let Some(first) = pairs.first() else {
            return Err(Error::InvalidInput("empty sample map".into()));
        };
        let (p, q) = (first.0.p(), first.1.p());
        for (a, b) in &pairs {
            if !a.is_boundary() || !b.is_boundary() {
                return Err(Error::NotBoundary);
            }
            if a.p() != p {
                return Err(Error::DimensionMismatch {
                    expected: p + 1,
                    got: a.p() + 1,
                });
            }
            if b.p() != q {
                return Err(Error::DimensionMismatch {
                    expected: q + 1,
                    got: b.p() + 1,
                });
            }
        }
        Ok(Self { pairs, p, q })
    }

    /// Samples `map` at `n` points: `chains` random chains carry
    /// `per_chain` points each, the rest are uniform on the sphere.
    pub fn sample(map: &BoundaryMap, n: usize, chains: usize, per_chain: usize, seed: u64) -> Result<Self> {
        let mut rng = sampling::rng(seed);
        let p = map.p();
        let mut sources = Vec::with_capacity(n);
        for _ in 0..chains {
            let c = random_chain(p, &mut rng);
            for _ in 0..per_chain {
                if sources.len() < n {
                    sources.push(c.sample(std::f64::consts::TAU * rng.random::<f64>()));
                }
            }
        }
        while sources.len() < n {
            sources.push(sampling::boundary_point(p, &mut rng));
        }
        let pairs = sources
            .into_iter()
            .map(|xi| Ok((xi.clone(), map.apply(&xi)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[(ProjPoint, ProjPoint)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `max(20, 4(p+1)(q+1))`.
    pub fn min_fit_samples(&self) -> usize {
        20.max(4 * (self.p + 1) * (self.q + 1))
    }

    /// Replaces the source points by their complex conjugates.
    pub fn conjugate_source(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|(a, b)| (a.conj(), b.clone())).collect(),
            ..self.clone()
        }
    }

    /// Targets shuffled by a seeded permutation (a negative control).
    pub fn scrambled(&self, seed: u64) -> Self {
        let mut targets: Vec<ProjPoint> = self.pairs.iter().map(|x| x.1.clone()).collect();
        targets.shuffle(&mut sampling::rng(seed));
        Self {
            pairs: self.pairs.iter().map(|x| x.0.clone()).zip(targets).collect(),
            ..self.clone()
        }
    }

    /// The samples as a nearest-neighbour lookup map.
    pub fn as_table(&self) -> Result<BoundaryMap> {
        BoundaryMap::table(self.pairs.clone())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        match table_from_json(s)? {
            BoundaryMap::Table { pairs } => Self::new(pairs),
            _ => unreachable!("table_from_json builds tables"),
        }
    }

    pub fn to_json(&self) -> String {
        table_to_json(&self.pairs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub chain_triples: usize,
    /// Fraction of co-chain triples whose image is co-chain.
    pub chain_image_fraction: f64,
    /// Fraction of co-chain triples whose image is co-chain with the same
    /// orientation.
    pub orientation_match_fraction: f64,
    pub generic_triples: usize,
    /// Fraction of non-co-chain triples whose image is not co-chain.
    pub generic_image_fraction: f64,
    pub seed: u64,
    pub passed: bool,
    pub note: Option<String>,
}

fn co_chain(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> bool {
    match chain_through(a, b) {
        Ok(ch) => ch.contains(c, CHAIN_TOL),
        Err(_) => false,
    }
}

fn distinct(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> bool {
    let d = |x: &ProjPoint, y: &ProjPoint| projective_distance(x.lift(), y.lift()) > 1e-6;
    d(a, b) && d(b, c) && d(a, c)
}

/// Samples co-chain triples among the sample points (pairs intersected with
/// chain membership) and random non-co-chain triples, and checks that the
/// map sends chains to chains with matching orientation and non-chains to
/// non-chains.
///
/// Too few co-chain triples among the samples is reported in `note`; the
/// check then fails without erroring.
pub fn chain_compatibility_check(map: &BoundarySampleMap, n_triples: usize, seed: u64) -> CompatibilityReport {
    let pts = map.pairs();
    let n = pts.len();
    let mut chain_triples: Vec<[usize; 3]> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                let Ok(ch) = chain_through(&pts[i].0, &pts[j].0) else {
                    continue;
                };
                for k in j + 1..n {
                    if ch.contains(&pts[k].0, CHAIN_TOL) && distinct(&pts[i].0, &pts[j].0, &pts[k].0) {
                        out.push([i, j, k]);
                    }
                }
            }
            out
        })
        .collect();
    let mut rng = sampling::rng(seed);
    chain_triples.shuffle(&mut rng);
    chain_triples.truncate(n_triples);

    let mut image_ok = 0;
    let mut orient_ok = 0;
    for &[i, j, k] in &chain_triples {
        let (a, b, c) = (&pts[i].1, &pts[j].1, &pts[k].1);
        if distinct(a, b, c) && co_chain(a, b, c) {
            image_ok += 1;
            let cs = cartan_invariant(&pts[i].0, &pts[j].0, &pts[k].0).map(|v| v.value);
            let ct = cartan_invariant(a, b, c).map(|v| v.value);
            if let (Ok(cs), Ok(ct)) = (cs, ct) {
                if cs.signum() == ct.signum() {
                    orient_ok += 1;
                }
            }
        }
    }

    let mut generic = 0;
    let mut generic_ok = 0;
    let mut attempts = 0;
    while n >= 3 && generic < n_triples && attempts < 20 * n_triples.max(1) {
        attempts += 1;
        let idx = rand::seq::index::sample(&mut rng, n, 3);
        let (i, j, k) = (idx.index(0), idx.index(1), idx.index(2));
        let (a, b, c) = (&pts[i].0, &pts[j].0, &pts[k].0);
        if !distinct(a, b, c) || co_chain(a, b, c) {
            continue;
        }
        generic += 1;
        if !co_chain(&pts[i].1, &pts[j].1, &pts[k].1) {
            generic_ok += 1;
        }
    }

    let frac = |k: usize, m: usize| if m == 0 { 0.0 } else { k as f64 / m as f64 };
    let m = chain_triples.len();
    let report_fracs = (frac(image_ok, m), frac(orient_ok, m), frac(generic_ok, generic));
    let note = if m < MIN_CHAIN_TRIPLES {
        Some(format!(
            "only {m} co-chain triples among the samples, need {MIN_CHAIN_TRIPLES}"
        ))
    } else {
        None
    };
    CompatibilityReport {
        chain_triples: m,
        chain_image_fraction: report_fracs.0,
        orientation_match_fraction: report_fracs.1,
        generic_triples: generic,
        generic_image_fraction: report_fracs.2,
        seed,
        passed: note.is_none()
            && report_fracs.0 >= COMPATIBILITY_THRESHOLD
            && report_fracs.1 >= COMPATIBILITY_THRESHOLD
            && report_fracs.2 >= COMPATIBILITY_THRESHOLD,
        note,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// `xi -> W xi`.
    Holomorphic,
    /// `xi -> W conj(xi)`.
    Antiholomorphic,
}

/// A fitted embedding with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFit {
    pub embedding: EmbeddingMap,
    pub mode: FitMode,
    /// Projective residual of every sample.
    pub residuals: Vec<f64>,
    /// Samples discarded as outliers.
    pub outliers: Vec<usize>,
    /// RMS residual over the retained samples.
    pub rms: f64,
    /// Ratio of the two smallest singular values of the constraint system;
    /// small means well determined.
    pub condition: f64,
}

impl EmbeddingFit {
    pub fn apply(&self, xi: &ProjPoint) -> Result<ProjPoint> {
        match self.mode {
            FitMode::Holomorphic => self.embedding.apply(xi),
            FitMode::Antiholomorphic => self.embedding.apply(&xi.conj()),
        }
    }
}

#[derive(Serialize)]
struct FitRepr<'a> {
    matrix: MatrixRows,
    mode: FitMode,
    rms: f64,
    condition: f64,
    isometry_residual: f64,
    outliers: &'a [usize],
    residuals: &'a [f64],
}

impl Serialize for EmbeddingFit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FitRepr {
            matrix: matrix_to_rows(self.embedding.matrix()),
            mode: self.mode,
            rms: self.rms,
            condition: self.condition,
            isometry_residual: self.embedding.residual(),
            outliers: &self.outliers,
            residuals: &self.residuals,
        }
        .serialize(s)
    }
}

fn unit(v: &CVector) -> CVector {
    v / C64::new(v.norm(), 0.0)
}

/// Smallest right singular vector of the stacked constraints, reshaped, and
/// the ratio of the two smallest singular values.
fn homogeneous_solve(xs: &[CVector], ys: &[CVector]) -> Result<(CMatrix, f64)> {
    let (n1, m1) = (xs[0].len(), ys[0].len());
    let unknowns = n1 * m1;
    let mut a = CMatrix::zeros(xs.len() * m1, unknowns);
    for (s, (x, y)) in xs.iter().zip(ys).enumerate() {
        let proj = CMatrix::identity(m1, m1) - y * y.adjoint();
        for r in 0..m1 {
            for j in 0..n1 {
                for c in 0..m1 {
                    a[(s * m1 + r, j * m1 + c)] = proj[(r, c)] * x[j];
                }
            }
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::IllConditioned("SVD failed".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let v = vt.row(order[0]).adjoint();
    let condition = if order.len() > 1 {
        sv[order[0]] / sv[order[1]].max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    let w = CMatrix::from_fn(m1, n1, |r, j| v[j * m1 + r]);
    Ok((w, condition))
}

/// One phase-aligned linear refinement: fix `a_i = eta_i^* W xi_i`, then
/// solve `min sum |W xi_i - a_i eta_i|^2`.
fn refine(w: &CMatrix, xs: &[CVector], ys: &[CVector]) -> CMatrix {
    let n1 = xs[0].len();
    let mut gram = CMatrix::zeros(n1, n1);
    let mut rhs = CMatrix::zeros(ys[0].len(), n1);
    for (x, y) in xs.iter().zip(ys) {
        let a = y.dotc(&(w * x));
        gram += x * x.adjoint();
        rhs += y * a * x.adjoint();
    }
    match gram.clone().try_inverse() {
        Some(inv) => rhs * inv,
        None => w.clone(),
    }
}

fn residuals(w: &CMatrix, xs: &[CVector], ys: &[CVector]) -> Vec<f64> {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| {
            let v = w * x;
            if v.norm() == 0.0 {
                1.0
            } else {
                projective_distance(&v, y)
            }
        })
        .collect()
}

fn rms(values: &[f64], idx: &[usize]) -> f64 {
    (idx.iter().map(|&i| values[i] * values[i]).sum::<f64>() / idx.len().max(1) as f64).sqrt()
}

fn median(values: &[f64], idx: &[usize]) -> f64 {
    let mut v: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Newton-Schulz projection onto `W^* J W = lambda J`: iterates
/// `W <- W (3 I - M / lambda) / 2` with `M = J W^* J W`.
fn project_to_isometry(w: &CMatrix) -> Option<CMatrix> {
    let n1 = w.ncols();
    let jp = form_matrix(n1);
    let jq = form_matrix(w.nrows());
    let eye = CMatrix::identity(n1, n1);
    let mut w = w.clone();
    for _ in 0..60 {
        let m = &jp * w.adjoint() * &jq * &w;
        let lambda = m.trace().re / n1 as f64;
        if !(lambda > 0.0) {
            return None;
        }
        let e = &m / C64::new(lambda, 0.0) - &eye;
        let err = e.norm();
        if err > 0.5 {
            return None;
        }
        if err < 1e-15 {
            break;
        }
        w = &w * (&eye - e * C64::new(0.5, 0.0));
    }
    let m = &jp * w.adjoint() * &jq * &w;
    let lambda = m.trace().re / n1 as f64;
    Some(w / C64::new(lambda.sqrt(), 0.0))
}

fn fit_linear(map: &BoundarySampleMap, mode: FitMode) -> Result<EmbeddingFit> {
    let need = map.min_fit_samples();
    if map.len() < need {
        return Err(Error::InvalidInput(format!(
            "need at least {need} samples, got {}",
            map.len()
        )));
    }
    let src = |x: &ProjPoint| match mode {
        FitMode::Holomorphic => unit(x.lift()),
        FitMode::Antiholomorphic => unit(&x.lift().map(|c| c.conj())),
    };
    let xs: Vec<CVector> = map.pairs().iter().map(|(a, _)| src(a)).collect();
    let ys: Vec<CVector> = map.pairs().iter().map(|(_, b)| unit(b.lift())).collect();
    let n = xs.len();
    let min_keep = (3 * n).div_ceil(4).max(need);

    let subset = |idx: &[usize]| -> (Vec<CVector>, Vec<CVector>) {
        (
            idx.iter().map(|&i| xs[i].clone()).collect(),
            idx.iter().map(|&i| ys[i].clone()).collect(),
        )
    };
    let mut keep: Vec<usize> = (0..n).collect();
    let (mut w, mut condition) = homogeneous_solve(&xs, &ys)?;
    for _ in 0..20 {
        let res = residuals(&w, &xs, &ys);
        let cut = (4.0 * median(&res, &keep)).max(1e-9);
        let next: Vec<usize> = (0..n).filter(|&i| res[i] <= cut).collect();
        if next == keep || next.len() < min_keep {
            break;
        }
        keep = next;
        let (kx, ky) = subset(&keep);
        (w, condition) = homogeneous_solve(&kx, &ky)?;
    }
    let (kx, ky) = subset(&keep);
    for _ in 0..3 {
        w = refine(&w, &kx, &ky);
    }
    let norm = w.norm();
    let w = w / C64::new(norm, 0.0);
    let res = residuals(&w, &xs, &ys);
    let plateau = rms(&res, &keep);
    if plateau > PLATEAU || keep.len() < min_keep {
        return Err(Error::NoRigidModel {
            residual: plateau,
            threshold: PLATEAU,
        });
    }
    let projected = project_to_isometry(&w).ok_or(Error::NoRigidModel {
        residual: plateau,
        threshold: PLATEAU,
    })?;
    let embedding = EmbeddingMap::new(projected.clone())?;
    let res = residuals(&projected, &xs, &ys);
    let final_rms = rms(&res, &keep);
    if final_rms > PLATEAU {
        return Err(Error::NoRigidModel {
            residual: final_rms,
            threshold: PLATEAU,
        });
    }
    let outliers = (0..n).filter(|i| keep.binary_search(i).is_err()).collect();
    Ok(EmbeddingFit {
        embedding,
        mode,
        residuals: res,
        outliers,
        rms: final_rms,
        condition,
    })
}

/// Fits a holomorphic isometric embedding to the samples.
///
/// Errors with [`Error::NoRigidModel`] when the residual plateau exceeds
/// [`PLATEAU`], or [`Error::OrientationReversing`] when only the
/// antiholomorphic model fits.
pub fn fit_embedding(map: &BoundarySampleMap) -> Result<EmbeddingFit> {
    match fit_linear(map, FitMode::Holomorphic) {
        Ok(f) => Ok(f),
        Err(e @ Error::NoRigidModel { .. }) => match fit_linear(map, FitMode::Antiholomorphic) {
            Ok(_) => Err(Error::OrientationReversing),
            Err(_) => Err(e),
        },
        Err(e) => Err(e),
    }
}

/// Fits `xi -> W conj(xi)`.
pub fn fit_antiholomorphic(map: &BoundarySampleMap) -> Result<EmbeddingFit> {
    fit_linear(map, FitMode::Antiholomorphic)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Fraction of samples with residual below `tol`.
    pub fraction: f64,
    pub total: usize,
    pub bad_indices: Vec<usize>,
    pub mode: FitMode,
    pub isometry_residual: f64,
    pub tol: f64,
    pub residuals: Vec<f64>,
}

/// Compares the boundary of the fitted embedding with every sample.
pub fn verify_embedding(fit: &EmbeddingFit, map: &BoundarySampleMap, tol: f64) -> Result<VerifyReport> {
    let residuals = map
        .pairs()
        .iter()
        .map(|(a, b)| Ok(projective_distance(fit.apply(a)?.lift(), b.lift())))
        .collect::<Result<Vec<f64>>>()?;
    let bad_indices: Vec<usize> = (0..residuals.len()).filter(|&i| !(residuals[i] < tol)).collect();
    Ok(VerifyReport {
        fraction: 1.0 - bad_indices.len() as f64 / residuals.len() as f64,
        total: residuals.len(),
        bad_indices,
        mode: fit.mode,
        isometry_residual: fit.embedding.residual(),
        tol,
        residuals,
    })
}
