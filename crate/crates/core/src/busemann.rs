//! Busemann cocycle, the visual measure at the origin, volume entropy and
//! the transformation law of the visual measure under isometries.
//!
//! Sign convention: `B_xi(x, y)` decreases as `x` moves toward `xi`, so
//! `e^xi(x) = exp(-h B_xi(x, 0))` grows toward `xi`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{herm, HermitianModel, ProjPoint, TangentVector};
use crate::isometry::Isometry;
use crate::quadrature::tanh_sinh;
use crate::sampling;

/// Coefficient `kappa` in `B = kappa log(|<X,xi>|^2 <Y,Y> / (|<Y,xi>|^2 <X,X>))`.
///
/// Distances are `sqrt(s) arccosh |<X,Y>|` on normalized lifts, and
/// `arccosh u ~ log 2u`, so the horospherical limit picks up `sqrt(s)/2`.
pub fn busemann_coefficient(model: &HermitianModel) -> f64 {
    model.metric_scale().sqrt() / 2.0
}

/// `B_xi(x, y) = lim_t d(x, gamma(t)) - d(y, gamma(t))` along a ray to `xi`.
pub fn busemann(model: &HermitianModel, xi: &ProjPoint, x: &ProjPoint, y: &ProjPoint) -> Result<f64> {
    if !xi.is_boundary() {
        return Err(Error::NotBoundary);
    }
    if !x.is_interior() || !y.is_interior() {
        return Err(Error::NotInterior);
    }
    let (xl, yl, z) = (x.lift(), y.lift(), xi.lift());
    if xl.len() != model.dim() || yl.len() != model.dim() || z.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: z.len(),
        });
    }
    let xz = herm(xl, z).norm_sqr();
    let yz = herm(yl, z).norm_sqr();
    let xx = herm(xl, xl).re;
    let yy = herm(yl, yl).re;
    Ok(busemann_coefficient(model) * ((xz * yy) / (yz * xx)).ln())
}

/// Differential of `x -> B_xi(x, y)` along `u`; equals `-g(u, X_xi)` where
/// `X_xi` is the unit vector at the base of `u` pointing toward `xi`.
pub fn busemann_differential(model: &HermitianModel, xi: &ProjPoint, u: &TangentVector) -> Result<f64> {
    if !xi.is_boundary() {
        return Err(Error::NotBoundary);
    }
    let x = u.base().lift();
    if xi.lift().len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: xi.lift().len(),
        });
    }
    let ratio = herm(u.components(), xi.lift()) / herm(x, xi.lift());
    Ok(2.0 * busemann_coefficient(model) * ratio.re)
}

/// `e^xi(x) = exp(-h B_xi(x, 0))`.
pub fn e_xi(model: &HermitianModel, entropy: f64, xi: &ProjPoint, x: &ProjPoint) -> Result<f64> {
    let b = busemann(model, xi, x, &model.origin())?;
    Ok((-entropy * b).exp())
}

/// Volume entropy of the model, fitted from ball volumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropy {
    pub value: f64,
    pub p: usize,
    /// Relative RMS residual of the growth fit.
    pub residual: f64,
}

const FIT_RADII: (f64, f64) = (5.0, 15.0);
const FIT_POINTS: usize = 41;

/// Logarithm of the volume (up to a constant factor) of a ball of radius `u`
/// in the curvature-normalized metric (`s = 4`), whose density in geodesic
/// polar coordinates is proportional to `sinh(t) sinh(t/2)^(2p-2)`.
fn log_ball_volume(p: usize, u: f64) -> f64 {
    let pf = p as f64;
    // factor exp(-p u) keeps the integrand bounded
    let q = tanh_sinh(
        |x, _| {
            let t = u * x;
            let dens = t.sinh() * (t / 2.0).sinh().powi(2 * p as i32 - 2);
            u * dens * (-pf * u).exp()
        },
        1e-13,
        10,
    );
    q.value.ln() + pf * u
}

fn fit_entropy(p: usize, metric_scale: f64) -> Result<Entropy> {
    // fit in the normalized radius u; distances scale by sigma relative to
    // the s = 4 metric
    let sigma = (metric_scale / 4.0).sqrt();
    let (r0, r1) = FIT_RADII;
    let n = FIT_POINTS;
    let mut a = DMatrix::<f64>::zeros(n, 4);
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..n {
        let u = r0 + (r1 - r0) * i as f64 / (n - 1) as f64;
        a[(i, 0)] = 1.0;
        a[(i, 1)] = u;
        a[(i, 2)] = (-u).exp();
        a[(i, 3)] = (-2.0 * u).exp();
        b[i] = log_ball_volume(p, u);
    }
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-14).map_err(|e| Error::IllConditioned(e.to_string()))?;
    let fitted = &a * &coef;
    let rms = ((&fitted - &b).norm_squared() / n as f64).sqrt();
    let scale = (b.norm_squared() / n as f64).sqrt();
    let residual = rms / scale;
    if residual > 0.02 {
        return Err(Error::EntropyFit { residual });
    }
    Ok(Entropy {
        value: coef[1] / sigma,
        p,
        residual,
    })
}

/// Exponential growth rate of ball volumes, fitted over normalized radii
/// `[5, 15]`.
/// Results are cached per `(p, metric_scale)`.
pub fn volume_entropy(model: &HermitianModel) -> Result<Entropy> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Entropy>>> = OnceLock::new();
    let key = (model.p(), model.metric_scale().to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(e) = cache.lock().expect("entropy cache").get(&key) {
        return Ok(*e);
    }
    let e = fit_entropy(model.p(), model.metric_scale())?;
    cache.lock().expect("entropy cache").insert(key, e);
    Ok(e)
}

/// The visual probability measure `nu_0` on the boundary, seen from the
/// origin: the round measure on the unit sphere, invariant under the
/// stabilizer of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualMeasure {
    pub p: usize,
    pub seed: u64,
}

impl VisualMeasure {
    pub fn new(p: usize, seed: u64) -> Self {
        Self { p, seed }
    }

    /// `n` independent samples from stream `stream`.
    pub fn samples(&self, stream: u64, n: usize) -> Vec<ProjPoint> {
        let mut rng = sampling::rng(sampling::derive_seed(self.seed, stream));
        (0..n).map(|_| sampling::boundary_point(self.p, &mut rng)).collect()
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

pub(crate) const BATCHES: usize = 20;

/// Mean and standard error of `f` over `n` samples of `nu_0`, split into
/// independently seeded batches.
pub(crate) fn batch_means<F>(p: usize, seed: u64, n: usize, f: F) -> Result<Vec<(f64, usize)>>
where
    F: Fn(&ProjPoint) -> Result<f64> + Sync,
{
    let measure = VisualMeasure::new(p, seed);
    (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let m = n / BATCHES + usize::from(b < n % BATCHES);
            let mut sum = 0.0;
            for xi in measure.samples(b as u64, m) {
                sum += f(&xi)?;
            }
            Ok((if m > 0 { sum / m as f64 } else { 0.0 }, m))
        })
        .collect()
}

pub(crate) fn combine(batches: &[(f64, usize)]) -> (f64, f64) {
    let total: usize = batches.iter().map(|b| b.1).sum();
    let mean = batches.iter().map(|b| b.0 * b.1 as f64).sum::<f64>() / total as f64;
    let k = batches.iter().filter(|b| b.1 > 0).count() as f64;
    let var = batches
        .iter()
        .filter(|b| b.1 > 0)
        .map(|b| (b.0 - mean).powi(2))
        .sum::<f64>()
        / (k - 1.0).max(1.0);
    (mean, (var / k).sqrt())
}

/// `∫ e^xi(x) d nu_0(xi)`, which equals 1 for every interior `x`.
pub fn e_xi_integral(model: &HermitianModel, entropy: f64, x: &ProjPoint, n: usize, seed: u64) -> Result<Estimate> {
    let batches = batch_means(model.p(), seed, n, |xi| e_xi(model, entropy, xi, x))?;
    let (estimate, stderr) = combine(&batches);
    Ok(Estimate {
        estimate,
        stderr,
        n,
        seed,
    })
}

/// Comparison of one test function under the two sides of the law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformStat {
    pub name: String,
    /// `∫ f d(g_* nu_0)`
    pub pushforward: f64,
    /// `∫ f(xi) exp(-h B_xi(g0, 0)) d nu_0(xi)`
    pub weighted: f64,
    pub stderr: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub stats: Vec<TransformStat>,
    /// Largest `|pushforward - weighted|` relative to `max(|pushforward|, 1)`.
    pub max_deviation: f64,
    pub max_z: f64,
    pub entropy: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub passed: bool,
}

const TEST_FAMILY: [&str; 5] = ["one", "re_z1", "im_z1", "abs_z1_sq", "re_zp_sq"];

fn test_functions(xi: &ProjPoint) -> [f64; 5] {
    let z = xi.ball_coordinates();
    let z1 = z[0];
    let zp = z[z.len() - 1];
    [1.0, z1.re, z1.im, z1.norm_sqr(), (zp * zp).re]
}

/// Checks `d(g_* nu_0)(xi) = exp(-h B_xi(g0, 0)) d nu_0(xi)` on a fixed family
/// of test functions (including `f = 1`) with common random numbers.
/// Passes when every z-score is below 3.
pub fn measure_transform_check(model: &HermitianModel, g: &Isometry, n: usize, seed: u64) -> Result<TransformReport> {
    let h = volume_entropy(model)?.value;
    measure_transform_check_with_entropy(model, h, g, n, seed)
}

/// As [`measure_transform_check`] with an explicit exponent `h`.
pub fn measure_transform_check_with_entropy(
    model: &HermitianModel,
    h: f64,
    g: &Isometry,
    n: usize,
    seed: u64,
) -> Result<TransformReport> {
    if g.p() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            got: g.p(),
        });
    }
    let g0 = g.apply(&model.origin())?;
    let origin = model.origin();
    let measure = VisualMeasure::new(model.p(), seed);
    let k = TEST_FAMILY.len();
    // per batch: sums of f(g xi), f(xi) w, and their difference
    let batches: Vec<Result<(Vec<f64>, Vec<f64>, usize)>> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let m = n / BATCHES + usize::from(b < n % BATCHES);
            let mut push = vec![0.0; k];
            let mut weighted = vec![0.0; k];
            for xi in measure.samples(b as u64, m) {
                let gxi = g.apply(&xi)?;
                let w = (-h * busemann(model, &xi, &g0, &origin)?).exp();
                let fa = test_functions(&gxi);
                let fb = test_functions(&xi);
                for j in 0..k {
                    push[j] += fa[j];
                    weighted[j] += fb[j] * w;
                }
            }
            let mf = m.max(1) as f64;
            Ok((
                push.iter().map(|v| v / mf).collect(),
                weighted.iter().map(|v| v / mf).collect(),
                m,
            ))
        })
        .collect();
    let batches: Vec<(Vec<f64>, Vec<f64>, usize)> = batches.into_iter().collect::<Result<_>>()?;

    let mut stats = Vec::with_capacity(k);
    let mut max_deviation = 0.0f64;
    let mut max_z = 0.0f64;
    for (j, name) in TEST_FAMILY.iter().enumerate() {
        let pa: Vec<(f64, usize)> = batches.iter().map(|b| (b.0[j], b.2)).collect();
        let pb: Vec<(f64, usize)> = batches.iter().map(|b| (b.1[j], b.2)).collect();
        let pd: Vec<(f64, usize)> = batches.iter().map(|b| (b.0[j] - b.1[j], b.2)).collect();
        let (push, _) = combine(&pa);
        let (weighted, _) = combine(&pb);
        let (diff, stderr) = combine(&pd);
        let z = if stderr > 0.0 {
            diff.abs() / stderr
        } else if diff.abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        max_deviation = max_deviation.max(diff.abs() / push.abs().max(1.0));
        max_z = max_z.max(z);
        stats.push(TransformStat {
            name: name.to_string(),
            pushforward: push,
            weighted,
            stderr,
            z,
        });
    }
    Ok(TransformReport {
        stats,
        max_deviation,
        max_z,
        entropy: h,
        n,
        seed,
        passed: max_z < 3.0,
    })
}
