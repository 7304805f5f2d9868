//! Cross-ratios, harmonic conjugates, the complete quadrilateral, inversions,
//! circle fits, weak order preservation and affine recovery in `C`.
//!
//! Constructive routines are generic over the scalar type so they run both
//! in floating point and in exact (Gaussian) rational arithmetic.

use std::fmt::Debug;
use std::ops::Neg;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::C64;

/// Real scalars usable by the constructive routines.
pub trait Scalar: Clone + Num + Neg<Output = Self> + PartialOrd + Debug {
    /// Whether the squared quantity `value_sq` is zero relative to the
    /// squared scale `scale_sq` (exactly, for exact types).
    fn is_tiny(value_sq: &Self, scale_sq: &Self) -> bool;
}

impl Scalar for f64 {
    fn is_tiny(value_sq: &Self, scale_sq: &Self) -> bool {
        *value_sq <= 1e-24 * scale_sq.max(1e-300)
    }
}

impl Scalar for BigRational {
    fn is_tiny(value_sq: &Self, _scale_sq: &Self) -> bool {
        value_sq.is_zero()
    }
}

pub type Point<S> = Complex<S>;

fn norm2<S: Scalar>(z: &Point<S>) -> S {
    z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()
}

/// `Im(conj(a) b)`, the signed area of the parallelogram on `a`, `b`.
pub fn cross<S: Scalar>(a: &Point<S>, b: &Point<S>) -> S {
    a.re.clone() * b.im.clone() - a.im.clone() * b.re.clone()
}

fn same<S: Scalar>(a: &Point<S>, b: &Point<S>) -> bool {
    let d = a.clone() - b.clone();
    S::is_tiny(&norm2(&d), &(S::one() + norm2(a) + norm2(b)))
}

fn collinear<S: Scalar>(a: &Point<S>, b: &Point<S>, c: &Point<S>) -> bool {
    let u = b.clone() - a.clone();
    let v = c.clone() - a.clone();
    let x = cross(&u, &v);
    S::is_tiny(&(x.clone() * x), &(norm2(&u) * norm2(&v)))
}

fn distinct<S: Scalar>(points: &[&Point<S>]) -> Result<()> {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if same(points[i], points[j]) {
                return Err(Error::CoincidentPoints);
            }
        }
    }
    Ok(())
}

/// `[A,B,C,D] = ((C-A)/(C-B)) ((D-B)/(D-A))`.
pub fn cross_ratio<S: Scalar>(a: &Point<S>, b: &Point<S>, c: &Point<S>, d: &Point<S>) -> Result<Point<S>> {
    distinct(&[a, b, c, d])?;
    let k = (c.clone() - a.clone()) / (c.clone() - b.clone());
    Ok(k * ((d.clone() - b.clone()) / (d.clone() - a.clone())))
}

/// A harmonic conjugate, possibly the point at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Harmonic<S> {
    Finite(Point<S>),
    Infinity,
}

impl<S: Clone> Harmonic<S> {
    pub fn finite(&self) -> Option<Point<S>> {
        match self {
            Harmonic::Finite(z) => Some(z.clone()),
            Harmonic::Infinity => None,
        }
    }
}

/// The point `D` with `[A,B,C,D] = -1`; infinity when `C` is the midpoint.
pub fn harmonic_conjugate<S: Scalar>(a: &Point<S>, b: &Point<S>, c: &Point<S>) -> Result<Harmonic<S>> {
    distinct(&[a, b, c])?;
    if !collinear(a, b, c) {
        return Err(Error::InvalidInput("points are not collinear".into()));
    }
    // k (D - B) = -(D - A) with k = (C-A)/(C-B)
    let k = (c.clone() - a.clone()) / (c.clone() - b.clone());
    let denom = k.clone() + Complex::new(S::one(), S::zero());
    if S::is_tiny(&norm2(&denom), &(S::one() + norm2(&k))) {
        return Ok(Harmonic::Infinity);
    }
    Ok(Harmonic::Finite((k * b.clone() + a.clone()) / denom))
}

/// An affine real line `{point + t direction : t ∈ R}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffLine<S> {
    pub point: Point<S>,
    pub direction: Point<S>,
}

impl<S: Scalar> AffLine<S> {
    pub fn new(point: Point<S>, direction: Point<S>) -> Result<Self> {
        if direction.re.is_zero() && direction.im.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(Self { point, direction })
    }

    pub fn through(a: &Point<S>, b: &Point<S>) -> Result<Self> {
        if same(a, b) {
            return Err(Error::CoincidentPoints);
        }
        Self::new(a.clone(), b.clone() - a.clone())
    }

    pub fn contains(&self, z: &Point<S>) -> bool {
        let v = z.clone() - self.point.clone();
        let x = cross(&self.direction, &v);
        S::is_tiny(&(x.clone() * x), &(norm2(&self.direction) * (S::one() + norm2(&v))))
    }

    pub fn is_parallel(&self, other: &Self) -> bool {
        let x = cross(&self.direction, &other.direction);
        S::is_tiny(&(x.clone() * x), &(norm2(&self.direction) * norm2(&other.direction)))
    }

    /// Intersection point, or `None` for parallel lines.
    pub fn intersect(&self, other: &Self) -> Option<Point<S>> {
        if self.is_parallel(other) {
            return None;
        }
        let den = cross(&self.direction, &other.direction);
        let t = cross(&(other.point.clone() - self.point.clone()), &other.direction) / den;
        Some(self.point.clone() + self.direction.clone() * Complex::new(t, S::zero()))
    }
}

impl AffLine<f64> {
    /// Unit direction with argument in `[0, pi)`.
    pub fn normalized(&self) -> Self {
        let mut d = self.direction / self.direction.norm();
        if d.im < 0.0 || (d.im == 0.0 && d.re < 0.0) {
            d = -d;
        }
        Self {
            point: self.point,
            direction: d,
        }
    }
}

/// Input to the complete-quadrilateral construction: `A, B, C` on `d`, a
/// second line `d'` through `A`, and an auxiliary point `M` off both lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig<S> {
    pub d_prime: AffLine<S>,
    pub d: AffLine<S>,
    pub a: Point<S>,
    pub b: Point<S>,
    pub c: Point<S>,
    pub m: Point<S>,
}

impl<S: Scalar> QuadConfig<S> {
    pub fn new(d_prime: AffLine<S>, d: AffLine<S>, a: Point<S>, b: Point<S>, c: Point<S>, m: Point<S>) -> Result<Self> {
        distinct(&[&a, &b, &c])?;
        if !(d.contains(&a) && d.contains(&b) && d.contains(&c)) {
            return Err(Error::InvalidInput("A, B, C must lie on d".into()));
        }
        if !d_prime.contains(&a) {
            return Err(Error::InvalidInput("d' must pass through A".into()));
        }
        if d_prime.is_parallel(&d) {
            return Err(Error::InvalidInput("d' must differ from d".into()));
        }
        if d.contains(&m) || d_prime.contains(&m) {
            return Err(Error::InvalidInput("M must lie off d and d'".into()));
        }
        Ok(Self { d_prime, d, a, b, c, m })
    }
}

fn step<T>(v: Option<T>, step: u8, reason: &'static str) -> Result<T> {
    v.ok_or(Error::Quadrilateral { step, reason })
}

fn line<S: Scalar>(a: &Point<S>, b: &Point<S>, k: u8, reason: &'static str) -> Result<AffLine<S>> {
    AffLine::through(a, b).map_err(|_| Error::Quadrilateral { step: k, reason })
}

/// The harmonic conjugate of `C` with respect to `A, B` by ruler alone:
///
/// 1. `P = <C,M> ∩ d'`
/// 2. the line `<P,B>`
/// 3. `Q = <P,B> ∩ <A,M>`
/// 4. `N = <B,M> ∩ d'`
/// 5. `A, P, N` distinct
/// 6. `D = <N,Q> ∩ d`
/// 7. `D` differs from `A` and `B`
pub fn complete_quadrilateral<S: Scalar>(cfg: &QuadConfig<S>) -> Result<Point<S>> {
    let cm = line(&cfg.c, &cfg.m, 1, "C and M coincide")?;
    let p = step(cm.intersect(&cfg.d_prime), 1, "<C,M> is parallel to d'")?;
    let pb = line(&p, &cfg.b, 2, "P coincides with B")?;
    let am = line(&cfg.a, &cfg.m, 3, "A and M coincide")?;
    let q = step(pb.intersect(&am), 3, "<P,B> is parallel to <A,M>")?;
    let bm = line(&cfg.b, &cfg.m, 4, "B and M coincide")?;
    let n = step(bm.intersect(&cfg.d_prime), 4, "<B,M> is parallel to d'")?;
    if same(&cfg.a, &p) || same(&cfg.a, &n) || same(&p, &n) {
        return Err(Error::Quadrilateral {
            step: 5,
            reason: "A, P, N are not distinct",
        });
    }
    let nq = line(&n, &q, 6, "N coincides with Q")?;
    let d = step(nq.intersect(&cfg.d), 6, "<N,Q> is parallel to d")?;
    if same(&d, &cfg.a) || same(&d, &cfg.b) {
        return Err(Error::Quadrilateral {
            step: 7,
            reason: "D coincides with A or B",
        });
    }
    Ok(d)
}

/// Inversion in the circle of radius `r` about `center`.
pub fn inversion<S: Scalar>(center: &Point<S>, radius: &S, z: &Point<S>) -> Result<Point<S>> {
    let w = z.clone() - center.clone();
    if w.re.is_zero() && w.im.is_zero() {
        return Err(Error::CoincidentPoints);
    }
    let r2 = Complex::new(radius.clone() * radius.clone(), S::zero());
    Ok(center.clone() + r2 / w.conj())
}

/// Least-squares circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
    /// `max_i ||z_i - center| - radius|`.
    pub residual: f64,
}

/// Algebraic least-squares circle fit (`|z|^2 + D x + E y + F = 0`).
pub fn fit_circle(points: &[C64]) -> Result<Circle> {
    if points.len() < 3 {
        return Err(Error::IllConditioned("need at least 3 points".into()));
    }
    let n = points.len();
    let scale = points.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => points[i].re / scale,
        1 => points[i].im / scale,
        _ => 1.0,
    });
    let b = DVector::from_fn(n, |i, _| -points[i].norm_sqr() / (scale * scale));
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-12 * sv.max() {
        return Err(Error::IllConditioned("points are collinear".into()));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::IllConditioned(e.to_string()))?;
    let center = C64::new(-x[0] / 2.0, -x[1] / 2.0) * scale;
    let r2 = center.norm_sqr() / (scale * scale) - x[2];
    if r2 <= 0.0 {
        return Err(Error::IllConditioned("no real circle fits the points".into()));
    }
    let radius = r2.sqrt() * scale;
    let residual = points
        .iter()
        .map(|z| ((z - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    Ok(Circle {
        center,
        radius,
        residual,
    })
}

/// Whether a fitted map is complex-affine or conjugate-affine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffineKind {
    Affine,
    AntiAffine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub kind: AffineKind,
    /// `g(z) ≈ lambda z + c` (or `lambda conj(z) + c` when anti-affine).
    pub lambda: C64,
    pub c: C64,
    /// RMS residual of the chosen fit.
    pub residual: f64,
    pub affine_residual: f64,
    pub anti_affine_residual: f64,
    /// RMS residual of the best real-affine fit `a z + b conj(z) + c`.
    pub real_affine_residual: f64,
    /// `+1` if the real-affine fit preserves the cyclic order on circles.
    pub orientation: i8,
    /// Ratio of extreme singular values of the design matrix.
    pub condition: f64,
}

fn complex_lstsq(cols: &[Vec<C64>], rhs: &[C64]) -> Result<(Vec<C64>, f64, f64)> {
    let n = rhs.len();
    let k = cols.len();
    let a = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min().max(1e-300);
    if sv.min() <= 1e-12 * sv.max() {
        return Err(Error::IllConditioned(format!("design matrix condition {cond:e}")));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::IllConditioned(e.to_string()))?;
    let r = (&a * &x - &b).norm() / (n as f64).sqrt();
    Ok((x.iter().copied().collect(), r, cond))
}

/// Least-squares fits of `g` by `lambda z + c` and by `lambda conj(z) + c`,
/// choosing the better one, plus a real-affine fit for orientation.
pub fn fit_affine(samples: &[(C64, C64)]) -> Result<AffineFit> {
    if samples.len() < 3 {
        return Err(Error::IllConditioned("need at least 3 samples".into()));
    }
    let z: Vec<C64> = samples.iter().map(|s| s.0).collect();
    let zc: Vec<C64> = z.iter().map(|v| v.conj()).collect();
    let one = vec![C64::new(1.0, 0.0); z.len()];
    let w: Vec<C64> = samples.iter().map(|s| s.1).collect();
    let (real, real_r, cond) = complex_lstsq(&[z.clone(), zc.clone(), one.clone()], &w)
        .map_err(|_| Error::IllConditioned("samples are collinear".into()))?;
    let (aff, aff_r, _) = complex_lstsq(&[z, one.clone()], &w)?;
    let (anti, anti_r, _) = complex_lstsq(&[zc, one], &w)?;
    let (kind, lambda, c, residual) = if aff_r <= anti_r {
        (AffineKind::Affine, aff[0], aff[1], aff_r)
    } else {
        (AffineKind::AntiAffine, anti[0], anti[1], anti_r)
    };
    let orientation = if real[0].norm_sqr() >= real[1].norm_sqr() {
        1
    } else {
        -1
    };
    Ok(AffineFit {
        kind,
        lambda,
        c,
        residual,
        affine_residual: aff_r,
        anti_affine_residual: anti_r,
        real_affine_residual: real_r,
        orientation,
        condition: cond,
    })
}

/// Outcome of the weak order preservation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub preserving: bool,
    /// Indices of a triple whose image has the opposite cyclic orientation.
    pub witness: Option<[usize; 3]>,
    pub triples_checked: usize,
}

const ANGLE_TOL: f64 = 1e-12;

fn angle_distinct(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d > ANGLE_TOL && d < std::f64::consts::TAU - ANGLE_TOL
}

/// `+1` if `a, b, c` are in counterclockwise cyclic order.
fn cyclic_orientation(a: f64, b: f64, c: f64) -> i8 {
    let tau = std::f64::consts::TAU;
    if (b - a).rem_euclid(tau) < (c - a).rem_euclid(tau) {
        1
    } else {
        -1
    }
}

/// Checks that every sampled triple of distinct points with distinct images
/// keeps its cyclic orientation. Samples are `(angle, image angle)`.
pub fn weakly_order_preserving_check(samples: &[(f64, f64)]) -> Result<OrderReport> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 samples".into()));
    }
    let n = samples.len();
    let mut checked = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let (a, b, c) = (samples[i], samples[j], samples[k]);
                if !(angle_distinct(a.0, b.0) && angle_distinct(b.0, c.0) && angle_distinct(a.0, c.0)) {
                    continue;
                }
                if !(angle_distinct(a.1, b.1) && angle_distinct(b.1, c.1) && angle_distinct(a.1, c.1)) {
                    continue;
                }
                checked += 1;
                if cyclic_orientation(a.0, b.0, c.0) != cyclic_orientation(a.1, b.1, c.1) {
                    return Ok(OrderReport {
                        preserving: false,
                        witness: Some([i, j, k]),
                        triples_checked: checked,
                    });
                }
            }
        }
    }
    Ok(OrderReport {
        preserving: true,
        witness: None,
        triples_checked: checked,
    })
}

/// Exact rational point from integer numerators over a common denominator.
pub fn rational_point(re: i64, im: i64, denom: i64) -> Point<BigRational> {
    use num_bigint::BigInt;
    Complex::new(
        BigRational::new(BigInt::from(re), BigInt::from(denom)),
        BigRational::new(BigInt::from(im), BigInt::from(denom)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{complex_gaussian, rng};
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cross_ratio_examples() {
        let v = cross_ratio(&c(0., 0.), &c(3., 0.), &c(1., 0.), &c(-3., 0.)).unwrap();
        assert!((v - c(-1., 0.)).norm() < 1e-15);
        // symmetry: swap A,B and C,D together
        let (a, b, cc, d) = (c(0.3, 1.), c(-2., 0.5), c(1., -1.), c(4., 2.));
        let x = cross_ratio(&a, &b, &cc, &d).unwrap();
        let y = cross_ratio(&b, &a, &d, &cc).unwrap();
        assert!((x - y).norm() < 1e-13);
        assert!(matches!(cross_ratio(&a, &a, &cc, &d), Err(Error::CoincidentPoints)));
    }

    #[test]
    fn cross_ratio_is_mobius_invariant() {
        let mut r = rng(1);
        for _ in 0..1000 {
            let (a, b, cc, d) = (
                complex_gaussian(&mut r),
                complex_gaussian(&mut r),
                complex_gaussian(&mut r),
                complex_gaussian(&mut r),
            );
            let coef: Vec<C64> = (0..4).map(|_| complex_gaussian(&mut r)).collect();
            if (coef[0] * coef[3] - coef[1] * coef[2]).norm() < 0.1 {
                continue;
            }
            let f = |z: C64| (coef[0] * z + coef[1]) / (coef[2] * z + coef[3]);
            let x = cross_ratio(&a, &b, &cc, &d).unwrap();
            let y = cross_ratio(&f(a), &f(b), &f(cc), &f(d)).unwrap();
            assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()), "{x} {y}");
        }
        let f = |z: C64| (2.0 * z + 1.0) / (z + 3.0);
        let pts = [c(0.1, 0.2), c(1., -1.), c(-0.5, 0.7), c(2., 2.)];
        let x = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let y = cross_ratio(&f(pts[0]), &f(pts[1]), &f(pts[2]), &f(pts[3])).unwrap();
        assert!((x - y).norm() < 1e-12);
    }

    #[test]
    fn harmonic_examples() {
        let d = harmonic_conjugate(&c(0., 0.), &c(3., 0.), &c(1., 0.)).unwrap();
        assert!((d.finite().unwrap() - c(-3., 0.)).norm() < 1e-15);
        assert_eq!(
            harmonic_conjugate(&c(-1., 0.), &c(1., 0.), &c(0., 0.)).unwrap(),
            Harmonic::Infinity
        );
        // involution
        let (a, b, cc) = (c(1., 1.), c(3., 2.), c(5., 3.));
        let d = harmonic_conjugate(&a, &b, &cc).unwrap().finite().unwrap();
        let back = harmonic_conjugate(&a, &b, &d).unwrap().finite().unwrap();
        assert!((back - cc).norm() < 1e-12);
        assert!(harmonic_conjugate(&a, &b, &c(0., 5.)).is_err());
    }

    #[test]
    fn quadrilateral_matches_harmonic_and_ignores_auxiliaries() {
        let d = AffLine::through(&c(0., 0.), &c(1., 0.)).unwrap();
        let mut r = rng(2);
        let mut outs = Vec::new();
        for _ in 0..100 {
            let dir = C64::from_polar(1.0, 0.2 + 2.7 * r.random::<f64>());
            let dp = AffLine::new(c(0., 0.), dir).unwrap();
            let m = complex_gaussian(&mut r) * 2.0;
            let Ok(cfg) = QuadConfig::new(dp, d.clone(), c(0., 0.), c(3., 0.), c(1., 0.), m) else {
                continue;
            };
            match complete_quadrilateral(&cfg) {
                Ok(v) => outs.push(v),
                Err(Error::Quadrilateral { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(outs.len() > 90);
        for v in &outs {
            assert!((v - c(-3., 0.)).norm() < 1e-9, "{v}");
        }
    }

    #[test]
    fn quadrilateral_is_exact_in_rationals() {
        let mut r = rng(3);
        let mut ok = 0;
        for _ in 0..300 {
            let mut ri = |lo: i64, hi: i64| r.random_range(lo..=hi);
            let a = rational_point(ri(-20, 20), ri(-20, 20), ri(1, 5));
            let dir = rational_point(ri(-9, 9), ri(-9, 9), 1);
            let dir2 = rational_point(ri(-9, 9), ri(-9, 9), 1);
            let t1 = BigRational::new(ri(1, 30).into(), ri(1, 7).into());
            let t2 = BigRational::new((-ri(1, 30)).into(), ri(1, 7).into());
            let Ok(d) = AffLine::new(a.clone(), dir.clone()) else {
                continue;
            };
            let Ok(dp) = AffLine::new(a.clone(), dir2) else {
                continue;
            };
            let b = a.clone() + dir.clone() * Complex::new(t1, BigRational::zero());
            let cc = a.clone() + dir * Complex::new(t2, BigRational::zero());
            let m = rational_point(ri(-40, 40), ri(-40, 40), ri(1, 6));
            let Ok(cfg) = QuadConfig::new(dp, d, a.clone(), b.clone(), cc.clone(), m) else {
                continue;
            };
            let Ok(dd) = complete_quadrilateral(&cfg) else { continue };
            let x = cross_ratio(&a, &b, &cc, &dd).unwrap();
            assert_eq!(x, rational_point(-1, 0, 1));
            assert_eq!(Harmonic::Finite(dd), harmonic_conjugate(&a, &b, &cc).unwrap());
            ok += 1;
        }
        assert!(ok > 200, "{ok}");
    }

    #[test]
    fn quadrilateral_reports_step() {
        // M on the line through C parallel to d' makes <C,M> parallel to d'
        let d = AffLine::through(&c(0., 0.), &c(1., 0.)).unwrap();
        let dp = AffLine::new(c(0., 0.), c(0., 1.)).unwrap();
        let cfg = QuadConfig::new(dp, d, c(0., 0.), c(3., 0.), c(1., 0.), c(1., 2.)).unwrap();
        assert!(matches!(
            complete_quadrilateral(&cfg),
            Err(Error::Quadrilateral { step: 1, .. })
        ));
    }

    #[test]
    fn inversion_examples() {
        let (o, rad) = (c(1., -2.), 1.5);
        let on = o + C64::from_polar(rad, 0.7);
        assert!((inversion(&o, &rad, &on).unwrap() - on).norm() < 1e-14);
        let z = c(3., 4.);
        let back = inversion(&o, &rad, &inversion(&o, &rad, &z).unwrap()).unwrap();
        assert!((back - z).norm() < 1e-12);
        // image of a circle avoiding the centre is a circle
        let pts: Vec<C64> = (0..40)
            .map(|k| inversion(&o, &rad, &(c(2., 1.) + C64::from_polar(0.8, k as f64 * 0.157))).unwrap())
            .collect();
        assert!(fit_circle(&pts).unwrap().residual < 1e-9);
        assert!(inversion(&o, &rad, &o).is_err());
    }

    #[test]
    fn affine_fits() {
        let mut r = rng(4);
        let zs: Vec<C64> = (0..30).map(|_| complex_gaussian(&mut r)).collect();
        let f = fit_affine(&zs.iter().map(|&z| (z, 2.0 * z + c(0., 1.))).collect::<Vec<_>>()).unwrap();
        assert_eq!(f.kind, AffineKind::Affine);
        assert!((f.lambda - c(2., 0.)).norm() < 1e-12 && (f.c - c(0., 1.)).norm() < 1e-12);
        assert!(f.residual < 1e-12 && f.orientation == 1);
        let g = fit_affine(&zs.iter().map(|&z| (z, z.conj())).collect::<Vec<_>>()).unwrap();
        assert_eq!(g.kind, AffineKind::AntiAffine);
        assert_eq!(g.orientation, -1);
        assert!(g.affine_residual > 0.1);
        let line: Vec<(C64, C64)> = (0..10).map(|k| (c(k as f64, 0.), c(0., 0.))).collect();
        assert!(matches!(fit_affine(&line), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn midpoint_relation_data_is_affine() {
        // a real-affine map is determined by midpoints; close the sample set
        // under midpoints of generated values
        let g = |z: C64| c(1., 2.) * z + c(-0.5, 0.25);
        let mut pts: Vec<(C64, C64)> = vec![
            (c(0., 0.), g(c(0., 0.))),
            (c(1., 0.), g(c(1., 0.))),
            (c(0., 1.), g(c(0., 1.))),
        ];
        for _ in 0..3 {
            let cur = pts.clone();
            for i in 0..cur.len() {
                for j in (i + 1)..cur.len() {
                    pts.push(((cur[i].0 + cur[j].0) / 2.0, (cur[i].1 + cur[j].1) / 2.0));
                }
            }
        }
        let f = fit_affine(&pts).unwrap();
        assert!(f.residual < 1e-9);
    }

    #[test]
    fn order_preservation() {
        let tau = std::f64::consts::TAU;
        let angles: Vec<f64> = (0..40).map(|k| k as f64 * tau / 40.0).collect();
        let rot: Vec<(f64, f64)> = angles.iter().map(|&t| (t, t + 1.0)).collect();
        assert!(weakly_order_preserving_check(&rot).unwrap().preserving);
        let refl: Vec<(f64, f64)> = angles.iter().map(|&t| (t, -t)).collect();
        let rep = weakly_order_preserving_check(&refl).unwrap();
        assert!(!rep.preserving && rep.witness.is_some());
        // collapse [0, 1] to a point, monotone elsewhere
        let collapse: Vec<(f64, f64)> = angles
            .iter()
            .map(|&t| (t, if t < 1.0 { 0.0 } else { (t - 1.0) * tau / (tau - 1.0) }))
            .collect();
        assert!(weakly_order_preserving_check(&collapse).unwrap().preserving);
    }

    #[test]
    fn circle_fit_recovers_circle() {
        let pts: Vec<C64> = (0..20)
            .map(|k| c(3., -1.) + C64::from_polar(2.5, k as f64 * 0.3))
            .collect();
        let f = fit_circle(&pts).unwrap();
        assert!((f.center - c(3., -1.)).norm() < 1e-10 && (f.radius - 2.5).abs() < 1e-10);
    }

    #[test]
    fn line_normalization() {
        let l = AffLine::new(c(1., 1.), c(-2., -2.)).unwrap().normalized();
        assert!((l.direction.norm() - 1.0).abs() < 1e-15 && l.direction.im > 0.0);
    }
}
