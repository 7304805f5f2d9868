//! Bounded differential forms from bounded boundary cocycles.
//!
//! For a bounded function `c` of `n + 1` boundary points,
//!
//! ```text
//! delta(c)_x = ∫ c(xi_0, ..., xi_n) e^{xi_0}(x) de^{xi_1} ∧ ... ∧ de^{xi_n} d nu_0^{n+1}
//! ```
//!
//! with `de^xi(v) = h e^xi(x) g(v, X_xi)`, so that `|delta(c)| <= h^n |c|_inf`.
//! Integrals are estimated by Monte Carlo over seeded batches; all vectors
//! and tuples evaluated in one call share samples.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_map::BoundaryMap;
use crate::busemann::{busemann, busemann_differential, combine, BATCHES};
use crate::cartan::{cartan_invariant, random_chain};
use crate::error::{Error, Result};
use crate::hermitian::{CVector, HermitianModel, ProjPoint, TangentVector, C64};
use crate::isometry::Isometry;
use crate::sampling;

pub const DEFAULT_SAMPLES: usize = 200_000;

/// How boundary tuples are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// `xi_i ~ nu_0`, weighted by `prod e^{xi_i}(x)`.
    Visual,
    /// `xi_i = g_x zeta_i` with `zeta_i ~ nu_0` and `g_x` the transvection
    /// from the origin to `x`; uses `e^xi(x) d nu_0(xi) = d((g_x)_* nu_0)(xi)`.
    Transported,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            estimator: Estimator::Transported,
        }
    }
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }
}

type Evaluator = dyn Fn(&[ProjPoint]) -> Result<f64> + Send + Sync;

/// A bounded measurable function of `arity` boundary points.
#[derive(Clone)]
pub struct BoundaryCocycle {
    arity: usize,
    sup_norm: f64,
    alternating: bool,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for BoundaryCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryCocycle")
            .field("arity", &self.arity)
            .field("sup_norm", &self.sup_norm)
            .field("alternating", &self.alternating)
            .finish()
    }
}

impl BoundaryCocycle {
    pub fn new<F>(arity: usize, sup_norm: f64, alternating: bool, f: F) -> Self
    where
        F: Fn(&[ProjPoint]) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            arity,
            sup_norm,
            alternating,
            eval: Arc::new(f),
        }
    }

    pub fn zero(arity: usize) -> Self {
        Self::new(arity, 0.0, true, |_| Ok(0.0))
    }

    pub fn constant(arity: usize, value: f64) -> Self {
        Self::new(arity, value.abs(), false, move |_| Ok(value))
    }

    /// The Cartan invariant of three boundary points.
    pub fn cartan() -> Self {
        Self::new(3, 1.0, true, |xs| Ok(cartan_invariant(&xs[0], &xs[1], &xs[2])?.value))
    }

    /// `c_q(phi xi_0, phi xi_1, phi xi_2)`.
    pub fn pullback_cartan(phi: BoundaryMap) -> Self {
        Self::new(3, 1.0, true, move |xs| {
            let a = phi.apply(&xs[0])?;
            let b = phi.apply(&xs[1])?;
            let c = phi.apply(&xs[2])?;
            Ok(cartan_invariant(&a, &b, &c)?.value)
        })
    }

    /// The homogeneous coboundary `dc(xi_0..xi_n) = sum_i (-1)^i c(.., ^xi_i, ..)`.
    pub fn coboundary(&self) -> Self {
        let inner = self.clone();
        let arity = self.arity + 1;
        Self::new(arity, arity as f64 * self.sup_norm, self.alternating, move |xs| {
            let mut total = 0.0;
            let mut buf = Vec::with_capacity(arity - 1);
            for i in 0..arity {
                buf.clear();
                buf.extend(xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()));
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * inner.evaluate(&buf)?;
            }
            Ok(total)
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn is_alternating(&self) -> bool {
        self.alternating
    }

    pub fn evaluate(&self, xs: &[ProjPoint]) -> Result<f64> {
        if xs.len() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: xs.len(),
            });
        }
        (self.eval)(xs)
    }

    /// Checks the sup-norm bound and, if flagged, alternation (under a
    /// transposition of the first two points) on `n` random tuples.
    pub fn validate_on_samples(&self, p: usize, n: usize, seed: u64) -> Result<()> {
        let mut rng = sampling::rng(seed);
        for _ in 0..n {
            let xs: Vec<ProjPoint> = (0..self.arity).map(|_| sampling::boundary_point(p, &mut rng)).collect();
            let v = self.evaluate(&xs)?;
            if v.abs() > self.sup_norm * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::InvalidInput(format!(
                    "cocycle value {v} exceeds its sup-norm bound {}",
                    self.sup_norm
                )));
            }
            if self.alternating && self.arity >= 2 {
                let mut ys = xs.clone();
                ys.swap(0, 1);
                let w = self.evaluate(&ys)?;
                if (v + w).abs() > 1e-9 * (1.0 + v.abs()) {
                    return Err(Error::InvalidInput("cocycle is not alternating".into()));
                }
            }
        }
        Ok(())
    }
}

/// A Monte Carlo value of a form on a tuple of tangent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormEvaluation {
    pub value: f64,
    pub stderr: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    /// `h^n |c|_inf prod |v_i|`.
    pub bound: f64,
}

impl FormEvaluation {
    /// `|value| <= bound (1 + 3 sigma_rel)` with `sigma_rel = stderr / bound`.
    pub fn within_bound(&self) -> bool {
        self.value.abs() <= self.bound + 3.0 * self.stderr
    }
}

/// A field of `degree`-forms that can be evaluated on tuples of tangent
/// vectors based at a common point, batch by batch.
pub trait FormField: Sync {
    fn degree(&self) -> usize;

    fn model(&self) -> &HermitianModel;

    /// Per-batch estimates `[batch][tuple]` of the form on
    /// `(vectors[t_1], ..., vectors[t_n])` for each tuple `t`.
    fn batch_values(&self, x: &ProjPoint, vectors: &[TangentVector], tuples: &[Vec<usize>]) -> Result<Vec<Vec<f64>>>;
}

/// `delta(c)` as a form field.
#[derive(Debug, Clone)]
pub struct DeltaForm {
    model: HermitianModel,
    entropy: f64,
    cocycle: BoundaryCocycle,
    config: McConfig,
}

impl DeltaForm {
    /// Degree is `arity - 1`, at most 2.
    pub fn new(model: HermitianModel, entropy: f64, cocycle: BoundaryCocycle, config: McConfig) -> Result<Self> {
        if cocycle.arity() == 0 || cocycle.arity() > 3 {
            return Err(Error::InvalidInput(format!(
                "cocycle arity {} not supported (need 1..=3)",
                cocycle.arity()
            )));
        }
        Ok(Self {
            model,
            entropy,
            cocycle,
            config,
        })
    }

    pub fn config(&self) -> &McConfig {
        &self.config
    }

    /// Evaluates on one tuple of vectors.
    pub fn evaluate(&self, x: &ProjPoint, vectors: &[TangentVector]) -> Result<FormEvaluation> {
        let n = self.degree();
        if vectors.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vectors.len(),
            });
        }
        let tuple: Vec<usize> = (0..n).collect();
        let batches = self.batch_values(x, vectors, &[tuple])?;
        let sizes = batch_sizes(self.config.samples);
        let pairs: Vec<(f64, usize)> = batches.iter().zip(&sizes).map(|(b, &m)| (b[0], m)).collect();
        let (value, stderr) = combine(&pairs);
        let norms: f64 = vectors.iter().map(|v| self.model.norm(v)).product();
        Ok(FormEvaluation {
            value,
            stderr,
            n: self.config.samples,
            seed: self.config.seed,
            bound: self.entropy.powi(n as i32) * self.cocycle.sup_norm() * norms,
        })
    }
}

fn batch_sizes(n: usize) -> Vec<usize> {
    (0..BATCHES)
        .map(|b| n / BATCHES + usize::from(b < n % BATCHES))
        .collect()
}

impl FormField for DeltaForm {
    fn degree(&self) -> usize {
        self.cocycle.arity() - 1
    }

    fn model(&self) -> &HermitianModel {
        &self.model
    }

    fn batch_values(&self, x: &ProjPoint, vectors: &[TangentVector], tuples: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        let model = &self.model;
        if !x.is_interior() {
            return Err(Error::NotInterior);
        }
        for v in vectors {
            if !v.base().same_point(x, 1e-10) {
                return Err(Error::BaseMismatch);
            }
        }
        let n = self.degree();
        for t in tuples {
            if t.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.len(),
                });
            }
        }
        let p = model.p();
        let h = self.entropy;
        let transport = Isometry::transvection(x)?;
        let origin = model.origin();
        let sizes = batch_sizes(self.config.samples);
        let seed = self.config.seed;
        let estimator = self.config.estimator;

        sizes
            .par_iter()
            .enumerate()
            .map(|(b, &m)| {
                let mut rng = sampling::rng(sampling::derive_seed(seed, b as u64));
                let mut sums = vec![0.0; tuples.len()];
                let mut xs: Vec<ProjPoint> = Vec::with_capacity(n + 1);
                // de[i][j] = de^{xi_i}(v_j) / e^{xi_i}(x)
                let mut de = vec![vec![0.0; vectors.len()]; n + 1];
                for _ in 0..m {
                    xs.clear();
                    let mut weight = 1.0;
                    for _ in 0..=n {
                        let zeta = sampling::boundary_point(p, &mut rng);
                        match estimator {
                            Estimator::Transported => xs.push(transport.apply(&zeta)?),
                            Estimator::Visual => {
                                weight *= (-h * busemann(model, &zeta, x, &origin)?).exp();
                                xs.push(zeta);
                            }
                        }
                    }
                    let c = self.cocycle.evaluate(&xs)?;
                    if c == 0.0 {
                        continue;
                    }
                    for i in 1..=n {
                        for (j, v) in vectors.iter().enumerate() {
                            de[i][j] = -h * busemann_differential(model, &xs[i], v)?;
                        }
                    }
                    let cw = c * weight;
                    for (k, t) in tuples.iter().enumerate() {
                        let e = match n {
                            0 => 1.0,
                            1 => de[1][t[0]],
                            _ => de[1][t[0]] * de[2][t[1]] - de[1][t[1]] * de[2][t[0]],
                        };
                        sums[k] += cw * e;
                    }
                }
                let mf = m.max(1) as f64;
                Ok(sums.into_iter().map(|s| s / mf).collect())
            })
            .collect()
    }
}

/// A deterministic form given by a closure on tangent vectors.
pub struct FnForm<F> {
    model: HermitianModel,
    degree: usize,
    f: F,
}

impl<F> FnForm<F>
where
    F: Fn(&[TangentVector]) -> Result<f64> + Sync,
{
    pub fn new(model: HermitianModel, degree: usize, f: F) -> Self {
        Self { model, degree, f }
    }
}

impl<F> FormField for FnForm<F>
where
    F: Fn(&[TangentVector]) -> Result<f64> + Sync,
{
    fn degree(&self) -> usize {
        self.degree
    }

    fn model(&self) -> &HermitianModel {
        &self.model
    }

    fn batch_values(&self, _x: &ProjPoint, vectors: &[TangentVector], tuples: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        let row = tuples
            .iter()
            .map(|t| {
                let vs: Vec<TangentVector> = t.iter().map(|&i| vectors[i].clone()).collect();
                (self.f)(&vs)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(vec![row])
    }
}

/// `delta(c)_x(v_1, ..., v_n)` with `n = arity(c) - 1 <= 2`.
pub fn delta_form_eval(
    model: &HermitianModel,
    entropy: f64,
    cocycle: &BoundaryCocycle,
    x: &ProjPoint,
    vectors: &[TangentVector],
    config: McConfig,
) -> Result<FormEvaluation> {
    DeltaForm::new(*model, entropy, cocycle.clone(), config)?.evaluate(x, vectors)
}

/// The bounded representative of the pulled-back Kähler class:
/// `delta` of `c_q o phi`, evaluated on `(u, v)`.
pub fn pullback_kappa_form(
    model: &HermitianModel,
    entropy: f64,
    phi: &BoundaryMap,
    x: &ProjPoint,
    u: &TangentVector,
    v: &TangentVector,
    config: McConfig,
) -> Result<FormEvaluation> {
    if phi.p() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            got: phi.p(),
        });
    }
    let c = BoundaryCocycle::pullback_cartan(phi.clone());
    delta_form_eval(model, entropy, &c, x, &[u.clone(), v.clone()], config)
}

/// Finite-difference exterior derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdDerivative {
    pub value: f64,
    /// Monte Carlo standard error (batch means of the difference quotients).
    pub stderr: f64,
    pub step: f64,
    /// The Monte Carlo error exceeds 10% of the form's natural scale.
    pub noise_dominated: bool,
}

pub const DEFAULT_FD_STEP: f64 = 1e-3;

fn increasing_tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, len, &mut Vec::new(), &mut out);
    out
}

/// `dω(w_0, ..., w_n)` for a field of `n`-forms by central differences in
/// the chart `z -> g_x [(z, 1)]` centred at `x`.
pub fn exterior_derivative_fd<F: FormField + ?Sized>(
    field: &F,
    x: &ProjPoint,
    vectors: &[TangentVector],
    step: f64,
) -> Result<FdDerivative> {
    let model = field.model();
    let n = field.degree();
    if vectors.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: vectors.len(),
        });
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let p = model.p();
    let dim = 2 * p;
    let chart = Isometry::transvection(x)?;
    let m = chart.matrix();
    let unit = |a: usize| -> C64 {
        if a % 2 == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 1.0)
        }
    };
    let coordinate_frame = |z: &[f64]| -> Result<(ProjPoint, Vec<TangentVector>)> {
        let mut v = CVector::zeros(p + 1);
        for a in 0..dim {
            v[a / 2] += unit(a) * z[a];
        }
        v[p] = C64::new(1.0, 0.0);
        let lift = m * &v;
        let frame = (0..dim)
            .map(|a| {
                let mut e = CVector::zeros(p + 1);
                e[a / 2] = unit(a);
                model.tangent_of_curve(&lift, &(m * e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((frame[0].base().clone(), frame))
    };

    let sub = increasing_tuples(dim, n);
    let mut plus = Vec::with_capacity(dim);
    let mut minus = Vec::with_capacity(dim);
    for a in 0..dim {
        for (sign, store) in [(1.0, &mut plus), (-1.0, &mut minus)] {
            let mut z = vec![0.0; dim];
            z[a] = sign * step;
            let (pt, frame) = coordinate_frame(&z)?;
            store.push(field.batch_values(&pt, &frame, &sub)?);
        }
    }
    let batches = plus[0].len();

    // coordinates of the input vectors at x
    let (_, frame0) = coordinate_frame(&vec![0.0; dim])?;
    let gram = DMatrix::from_fn(dim, dim, |a, b| {
        model
            .metric_and_kahler(&frame0[a], &frame0[b])
            .map(|g| g.0)
            .unwrap_or(f64::NAN)
    });
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("coordinate frame is singular".into()))?;
    let coords: Vec<DVector<f64>> = vectors
        .iter()
        .map(|w| {
            let rhs = DVector::from_iterator(
                dim,
                frame0
                    .iter()
                    .map(|e| model.metric_and_kahler(w, e).map(|g| g.0))
                    .collect::<Result<Vec<_>>>()?,
            );
            Ok(&gram_inv * rhs)
        })
        .collect::<Result<_>>()?;

    let sup = increasing_tuples(dim, n + 1);
    let sub_index = |t: &[usize]| sub.iter().position(|s| s.as_slice() == t).expect("tuple present");
    let mut per_batch = Vec::with_capacity(batches);
    for b in 0..batches {
        let mut total = 0.0;
        for j in &sup {
            // dω_J = sum_k (-1)^k ∂_{J_k} ω_{J \ J_k}
            let mut d = 0.0;
            for k in 0..=n {
                let rest: Vec<usize> = j.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &v)| v).collect();
                let si = sub_index(&rest);
                let a = j[k];
                let deriv = (plus[a][b][si] - minus[a][b][si]) / (2.0 * step);
                d += if k % 2 == 0 { deriv } else { -deriv };
            }
            let minor = DMatrix::from_fn(n + 1, n + 1, |r, c| coords[r][j[c]]);
            total += d * minor.determinant();
        }
        per_batch.push(total);
    }
    let (value, stderr) = if batches == 1 {
        (per_batch[0], 0.0)
    } else {
        let pairs: Vec<(f64, usize)> = per_batch.iter().map(|&v| (v, 1)).collect();
        combine(&pairs)
    };
    Ok(FdDerivative {
        value,
        stderr,
        step,
        noise_dominated: stderr > 0.1,
    })
}

/// Outcome of the chain-formula comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFormulaReport {
    /// `max |c_q(phi xi_1, phi xi_2, phi xi_3) - i c_p(xi_1, xi_2, xi_3)|`.
    pub residual: f64,
    pub triples: usize,
    pub sign: f64,
    /// Largest equivariance defect found on the supplied generators.
    pub equivariance_residual: f64,
}

/// Compares `c_q o phi` with `i c_p` on random triples of points lying on
/// random chains of the source.
///
/// Only closed-form (embedding) maps are accepted; `generators` pairs each
/// source isometry `gamma` with its image `rho(gamma)`, and the map must
/// satisfy `phi(gamma xi) = rho(gamma) phi(xi)`.
pub fn chain_formula_check(
    phi: &BoundaryMap,
    generators: &[(Isometry, Isometry)],
    sign: f64,
    chains: usize,
    seed: u64,
) -> Result<ChainFormulaReport> {
    if !phi.is_closed_form() {
        return Err(Error::Refused(
            "chain formula needs an equivariant closed-form map; sample tables would require integrating over a fundamental domain".into(),
        ));
    }
    let p = phi.p();
    let mut rng = sampling::rng(seed);
    let mut equivariance_residual = 0.0f64;
    for (gamma, rho) in generators {
        for _ in 0..20 {
            let xi = sampling::boundary_point(p, &mut rng);
            let lhs = phi.apply(&gamma.apply(&xi)?)?;
            let rhs = rho.apply(&phi.apply(&xi)?)?;
            equivariance_residual =
                equivariance_residual.max(crate::hermitian::projective_distance(lhs.lift(), rhs.lift()));
        }
    }
    if equivariance_residual > 1e-8 {
        return Err(Error::Refused(format!(
            "map is not equivariant (defect {equivariance_residual:e})"
        )));
    }
    let mut residual = 0.0f64;
    for _ in 0..chains {
        let ch = random_chain(p, &mut rng);
        let ts: Vec<f64> = (0..3).map(|_| std::f64::consts::TAU * rng.random::<f64>()).collect();
        let xs: Vec<ProjPoint> = ts.iter().map(|&t| ch.sample(t)).collect();
        let cp = cartan_invariant(&xs[0], &xs[1], &xs[2])?;
        if cp.degenerate {
            continue;
        }
        let ys = xs.iter().map(|x| phi.apply(x)).collect::<Result<Vec<_>>>()?;
        let cq = cartan_invariant(&ys[0], &ys[1], &ys[2])?;
        residual = residual.max((cq.value - sign * cp.value).abs());
    }
    Ok(ChainFormulaReport {
        residual,
        triples: chains,
        sign,
        equivariance_residual,
    })
}
