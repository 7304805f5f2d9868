//! Hermitian linear algebra of signature (p,1) and the ball model of complex
//! hyperbolic space.
//!
//! Points of `H_C^p` are negative lines in `C^{p+1}` for the form
//! `<X,Y> = X_1 conj(Y_1) + ... + X_p conj(Y_p) - X_{p+1} conj(Y_{p+1})`;
//! boundary points are null lines. The metric is normalized so that the
//! holomorphic sectional curvature is `-1` (real sectional curvature ranges
//! over `[-1, -1/4]`). On horizontal lifts the metric is
//! `g(u,v) = s * Re<u,v>` with `s = metric_scale = 4` at that normalization,
//! and the Kähler form is `omega(u,v) = g(Ju,v) = -s * Im<u,v>`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Quadrature};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;

/// Relative tolerance for classifying a vector as null.
pub const TOL_NULL: f64 = 1e-10;

/// Target absolute error for triangle-area quadrature.
pub const AREA_TOL: f64 = 1e-6;

const AREA_MAX_LEVEL: u32 = 8;

/// The form `<x, y>` without a dimension check.
#[inline]
pub fn herm(x: &CVector, y: &CVector) -> C64 {
    let n = x.len() - 1;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        acc += x[i] * y[i].conj();
    }
    acc - x[n] * y[n].conj()
}

/// `<x, x>`, which is always real.
#[inline]
pub fn herm_norm(x: &CVector) -> f64 {
    let n = x.len() - 1;
    let mut acc = 0.0;
    for i in 0..n {
        acc += x[i].norm_sqr();
    }
    acc - x[n].norm_sqr()
}

/// Sine of the Euclidean angle between two complex lines; zero iff they agree.
pub fn projective_distance(a: &CVector, b: &CVector) -> f64 {
    // sine of the angle between the lines, via the orthogonal residual
    let ua = a / C64::new(a.norm(), 0.0);
    let ub = b / C64::new(b.norm(), 0.0);
    let d = ua.dotc(&ub);
    (&ub - &ua * d).norm()
}

/// Where a projective point sits relative to the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Interior,
    Boundary,
}

/// A point of `H_C^p` or of its boundary sphere, stored by its canonical lift.
///
/// Canonical lifts have a real positive last coordinate and are normalized
/// to `<X,X> = -1` (interior) or Euclidean norm one (boundary).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct ProjPoint {
    lift: CVector,
    kind: PointKind,
}

impl ProjPoint {
    /// Classifies and canonicalizes an arbitrary nonzero lift.
    pub fn from_lift(v: CVector) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: v.len(),
            });
        }
        let euclid = v.norm_squared();
        if euclid == 0.0 || !euclid.is_finite() {
            return Err(Error::ZeroVector);
        }
        let n = herm_norm(&v);
        let kind = if n.abs() <= TOL_NULL * euclid {
            PointKind::Boundary
        } else if n < 0.0 {
            PointKind::Interior
        } else {
            return Err(Error::PositiveLine);
        };
        let last = v[v.len() - 1];
        let phase = last.conj() / last.norm();
        let scale = match kind {
            PointKind::Boundary => 1.0 / euclid.sqrt(),
            PointKind::Interior => 1.0 / (-n).sqrt(),
        };
        let lift = v * (phase * scale);
        Ok(Self { lift, kind })
    }

    /// The interior point with ball coordinates `z` (requires `|z| < 1`), or
    /// the boundary point when `|z| = 1`.
    pub fn from_ball(z: &[C64]) -> Result<Self> {
        let mut v = CVector::zeros(z.len() + 1);
        for (i, zi) in z.iter().enumerate() {
            v[i] = *zi;
        }
        v[z.len()] = C64::new(1.0, 0.0);
        Self::from_lift(v)
    }

    /// The center of the ball in `H_C^p`.
    pub fn origin(p: usize) -> Self {
        let mut v = CVector::zeros(p + 1);
        v[p] = C64::new(1.0, 0.0);
        Self {
            lift: v,
            kind: PointKind::Interior,
        }
    }

    pub fn lift(&self) -> &CVector {
        &self.lift
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn is_interior(&self) -> bool {
        self.kind == PointKind::Interior
    }

    pub fn is_boundary(&self) -> bool {
        self.kind == PointKind::Boundary
    }

    /// Complex dimension `p` of the ambient `H_C^p`.
    pub fn p(&self) -> usize {
        self.lift.len() - 1
    }

    /// Ball coordinates `z` with lift `(z, 1)`.
    pub fn ball_coordinates(&self) -> Vec<C64> {
        let p = self.p();
        let last = self.lift[p];
        (0..p).map(|i| self.lift[i] / last).collect()
    }

    /// True when both represent the same projective point.
    pub fn same_point(&self, other: &Self, tol: f64) -> bool {
        self.lift.len() == other.lift.len() && projective_distance(&self.lift, &other.lift) <= tol
    }

    /// Image under the antiholomorphic involution `z -> conj(z)`.
    pub fn conj(&self) -> Self {
        Self {
            lift: self.lift.map(|c| c.conj()),
            kind: self.kind,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    kind: PointKind,
    lift: Vec<[f64; 2]>,
}

impl TryFrom<PointRepr> for ProjPoint {
    type Error = Error;

    fn try_from(r: PointRepr) -> Result<Self> {
        let v = CVector::from_iterator(r.lift.len(), r.lift.iter().map(|c| C64::new(c[0], c[1])));
        let pt = ProjPoint::from_lift(v)?;
        if pt.kind != r.kind {
            return Err(Error::InvalidInput(format!(
                "point tagged {:?} classifies as {:?}",
                r.kind, pt.kind
            )));
        }
        Ok(pt)
    }
}

impl From<ProjPoint> for PointRepr {
    fn from(p: ProjPoint) -> Self {
        PointRepr {
            kind: p.kind,
            lift: p.lift.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// A tangent vector at an interior point, given by its horizontal
/// representative relative to the canonical lift (`<v, X> = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ProjPoint,
    components: CVector,
}

impl TangentVector {
    pub fn base(&self) -> &ProjPoint {
        &self.base
    }

    pub fn components(&self) -> &CVector {
        &self.components
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            base: self.base.clone(),
            components: &self.components * C64::new(a, 0.0),
        }
    }

    /// Multiplication by `i`, the complex structure `J`.
    pub fn rotate(&self) -> Self {
        Self {
            base: self.base.clone(),
            components: &self.components * C64::new(0.0, 1.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.base.same_point(&other.base, 1e-12) {
            return Err(Error::BaseMismatch);
        }
        Ok(Self {
            base: self.base.clone(),
            components: &self.components + &other.components,
        })
    }
}

/// Area of a geodesic triangle, with a flag for degenerate triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleArea {
    pub value: f64,
    pub error: f64,
    pub degenerate: bool,
}

/// The signature-(p,1) model with its metric normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianModel {
    p: usize,
    metric_scale: f64,
}

impl HermitianModel {
    /// Scale giving holomorphic sectional curvature `-1`.
    pub const CURVATURE_ONE_SCALE: f64 = 4.0;

    pub fn new(p: usize) -> Result<Self> {
        Self::with_metric_scale(p, Self::CURVATURE_ONE_SCALE)
    }

    pub fn with_metric_scale(p: usize, metric_scale: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidModel("p must be at least 1".into()));
        }
        if !(metric_scale > 0.0 && metric_scale.is_finite()) {
            return Err(Error::InvalidModel("metric_scale must be positive".into()));
        }
        Ok(Self { p, metric_scale })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.p + 1
    }

    pub fn metric_scale(&self) -> f64 {
        self.metric_scale
    }

    /// Holomorphic sectional curvature implied by `metric_scale`.
    pub fn holomorphic_curvature(&self) -> f64 {
        -Self::CURVATURE_ONE_SCALE / self.metric_scale
    }

    pub fn origin(&self) -> ProjPoint {
        ProjPoint::origin(self.p)
    }

    fn check_vec(&self, x: &CVector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_point(&self, x: &ProjPoint) -> Result<()> {
        self.check_vec(&x.lift)
    }

    /// The Hermitian form, linear in the first argument.
    pub fn inner(&self, x: &CVector, y: &CVector) -> Result<C64> {
        self.check_vec(x)?;
        self.check_vec(y)?;
        Ok(herm(x, y))
    }

    pub fn point(&self, v: CVector) -> Result<ProjPoint> {
        self.check_vec(&v)?;
        ProjPoint::from_lift(v)
    }

    /// Riemannian distance between interior points.
    pub fn distance(&self, x: &ProjPoint, y: &ProjPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !x.is_interior() || !y.is_interior() {
            return Err(Error::NotInterior);
        }
        // With <X,X> = <Y,Y> = -1 and Y rephased so <X,Y> < 0, the difference
        // D = X - Y satisfies <D,D> = 4 sinh^2(r/2) where cosh r = |<X,Y>|.
        let xy = herm(&x.lift, &y.lift);
        let m = xy.norm();
        let phase = if m > 0.0 { -xy / m } else { C64::new(1.0, 0.0) };
        let d = &x.lift - &y.lift * phase;
        let dd = herm_norm(&d).max(0.0);
        Ok(self.metric_scale.sqrt() * 2.0 * (0.5 * dd.sqrt()).asinh())
    }

    /// Point at arc length `t` on the unit-speed geodesic from `x` toward
    /// `target` (interior or boundary).
    pub fn geodesic(&self, x: &ProjPoint, target: &ProjPoint, t: f64) -> Result<ProjPoint> {
        let w = self.direction(x, target)?;
        let a = t / self.metric_scale.sqrt();
        let v = x.lift() * C64::new(a.cosh(), 0.0) + w * C64::new(a.sinh(), 0.0);
        ProjPoint::from_lift(v)
    }

    /// Horizontal vector `W` with `<W,W> = 1` such that the geodesic from `x`
    /// toward `target` is `[cosh(a) X + sinh(a) W]`.
    pub(crate) fn direction(&self, x: &ProjPoint, target: &ProjPoint) -> Result<CVector> {
        self.check_point(x)?;
        self.check_point(target)?;
        if !x.is_interior() {
            return Err(Error::NotInterior);
        }
        let xl = x.lift();
        let tl = target.lift();
        let tx = herm(tl, xl);
        let th = tl + xl * tx;
        let nn = herm_norm(&th);
        if nn <= 1e-24 * tl.norm_squared() {
            return Err(Error::CoincidentPoints);
        }
        // rephase so that the component along X is positive
        let m = tx.norm();
        let phase = if m > 0.0 { -tx.conj() / m } else { C64::new(1.0, 0.0) };
        Ok(th * (phase / nn.sqrt()))
    }

    /// Projects an arbitrary vector to the horizontal space at `x`.
    pub fn tangent(&self, x: &ProjPoint, v: CVector) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_vec(&v)?;
        if !x.is_interior() {
            return Err(Error::NotInterior);
        }
        let xl = x.lift();
        let components = &v + xl * herm(&v, xl);
        Ok(TangentVector {
            base: x.clone(),
            components,
        })
    }

    /// The tangent vector of the curve `[P(t)]` at `t = 0`, given an arbitrary
    /// lift `p` and its derivative `dp`.
    pub fn tangent_of_curve(&self, p: &CVector, dp: &CVector) -> Result<TangentVector> {
        self.check_vec(p)?;
        self.check_vec(dp)?;
        let n = herm_norm(p);
        if n >= 0.0 {
            return Err(Error::NotInterior);
        }
        let base = ProjPoint::from_lift(p.clone())?;
        let last = p[self.p];
        let phase = last.conj() / last.norm();
        let horiz = dp - p * (herm(dp, p) / n);
        let components = horiz * (phase / (-n).sqrt());
        Ok(TangentVector { base, components })
    }

    /// A real basis of `T_x` of `2p` vectors, orthonormal for the metric:
    /// `b_1, i b_1, ..., b_p, i b_p`.
    pub fn tangent_frame(&self, x: &ProjPoint) -> Result<Vec<TangentVector>> {
        self.check_point(x)?;
        if !x.is_interior() {
            return Err(Error::NotInterior);
        }
        let xl = x.lift();
        let mut basis: Vec<CVector> = Vec::with_capacity(self.p);
        for k in 0..=self.p {
            if basis.len() == self.p {
                break;
            }
            let mut e = CVector::zeros(self.dim());
            e[k] = C64::new(1.0, 0.0);
            let mut v = &e + xl * herm(&e, xl);
            for b in &basis {
                let c = herm(&v, b);
                v -= b * c;
            }
            let nn = herm_norm(&v);
            if nn > 1e-8 {
                basis.push(v / C64::new(nn.sqrt(), 0.0));
            }
        }
        let unit = 1.0 / self.metric_scale.sqrt();
        let mut frame = Vec::with_capacity(2 * self.p);
        for b in basis {
            let t = TangentVector {
                base: x.clone(),
                components: b * C64::new(unit, 0.0),
            };
            let jt = t.rotate();
            frame.push(t);
            frame.push(jt);
        }
        Ok(frame)
    }

    /// Riemannian metric and Kähler form on a pair of tangent vectors.
    pub fn metric_and_kahler(&self, u: &TangentVector, v: &TangentVector) -> Result<(f64, f64)> {
        self.check_point(&u.base)?;
        if !u.base.same_point(&v.base, 1e-10) {
            return Err(Error::BaseMismatch);
        }
        let h = herm(&u.components, &v.components);
        Ok((self.metric_scale * h.re, -self.metric_scale * h.im))
    }

    pub fn norm(&self, u: &TangentVector) -> f64 {
        (self.metric_scale * herm_norm(&u.components)).max(0.0).sqrt()
    }

    /// Integral of the Kähler form over the geodesic triangle `(x, y, z)`,
    /// filled by the geodesic cone from `x` over the side `[y, z]`.
    pub fn triangle_area(&self, x: &ProjPoint, y: &ProjPoint, z: &ProjPoint) -> Result<TriangleArea> {
        self.triangle_area_with_tol(x, y, z, AREA_TOL)
    }

    pub fn triangle_area_with_tol(
        &self,
        x: &ProjPoint,
        y: &ProjPoint,
        z: &ProjPoint,
        tol: f64,
    ) -> Result<TriangleArea> {
        for pt in [x, y, z] {
            self.check_point(pt)?;
        }
        let degenerate = x.same_point(y, 1e-12) || y.same_point(z, 1e-12) || x.same_point(z, 1e-12);
        if degenerate {
            return Ok(TriangleArea {
                value: 0.0,
                error: 0.0,
                degenerate: true,
            });
        }
        let q = cone_area(self.metric_scale, [x, y, z], tol);
        Ok(TriangleArea {
            value: q.value,
            error: q.error,
            degenerate: false,
        })
    }
}

/// Complex coefficients of a vector in the span of the three vertex lifts.
type Coeffs = [C64; 3];

struct Gram([[C64; 3]; 3]);

impl Gram {
    fn new(v: [&ProjPoint; 3]) -> Self {
        let mut g = [[C64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = if i == j && v[i].is_boundary() {
                    C64::new(0.0, 0.0)
                } else {
                    herm(v[i].lift(), v[j].lift())
                };
            }
        }
        Gram(g)
    }

    #[inline]
    fn ip(&self, a: &Coeffs, b: &Coeffs) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..3 {
            if a[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..3 {
                acc += a[i] * b[j].conj() * self.0[i][j];
            }
        }
        acc
    }
}

fn cone_area(metric_scale: f64, v: [&ProjPoint; 3], tol: f64) -> Quadrature {
    let gram = Gram::new(v);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let apex: Coeffs = [one, zero, zero];
    // phase the far vertex so that <Y, Z'> is real negative: then the
    // nonnegative combinations (1-t) Y + t Z' trace the geodesic [y, z]
    let yz = gram.0[1][2];
    let zphase = -yz / yz.norm();

    quadrature::tanh_sinh_2d(
        |s, sc, t, tc| {
            let sigma: Coeffs = [zero, C64::new(tc, 0.0), zphase * t];
            let dsigma: Coeffs = [zero, -one, zphase];
            let a = gram.ip(&apex, &sigma);
            let da = gram.ip(&apex, &dsigma);
            let am = a.norm();
            let u = -a / am;
            let rot = (da / a).im;
            let psi: Coeffs = [u * sigma[0], u * sigma[1], u * sigma[2]];
            let dpsi: Coeffs = [
                u * (dsigma[0] + C64::new(0.0, rot) * sigma[0]),
                u * (dsigma[1] + C64::new(0.0, rot) * sigma[1]),
                u * (dsigma[2] + C64::new(0.0, rot) * sigma[2]),
            ];
            let p: Coeffs = [apex[0] * sc + psi[0] * s, psi[1] * s, psi[2] * s];
            let ds: Coeffs = [psi[0] - one, psi[1], psi[2]];
            let pp = gram.ip(&p, &p).re;
            if pp >= 0.0 {
                return 0.0;
            }
            let num = gram.ip(&ds, &dpsi) * pp - gram.ip(&ds, &p) * gram.ip(&p, &dpsi);
            metric_scale * s * num.im / (pp * pp)
        },
        tol,
        AREA_MAX_LEVEL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vec(xs: &[C64]) -> CVector {
        CVector::from_column_slice(xs)
    }

    #[test]
    fn inner_examples() {
        let m = HermitianModel::new(1).unwrap();
        let e2 = vec(&[c(0., 0.), c(1., 0.)]);
        assert_eq!(m.inner(&e2, &e2).unwrap(), c(-1., 0.));
        let m2 = HermitianModel::new(2).unwrap();
        let a = vec(&[c(1., 0.), c(0., 0.), c(0., 0.)]);
        let b = vec(&[c(0., 0.), c(1., 0.), c(0., 0.)]);
        assert_eq!(m2.inner(&a, &b).unwrap(), c(0., 0.));
        // (1,1) against (i,1): 1 * conj(i) - 1 = -1 - i
        let x = vec(&[c(1., 0.), c(1., 0.)]);
        let y = vec(&[c(0., 1.), c(1., 0.)]);
        assert_eq!(m.inner(&x, &y).unwrap(), c(-1., -1.));
        assert!(matches!(
            m.inner(&x, &a),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn classification_and_canonical_lift() {
        let p = ProjPoint::from_lift(vec(&[c(0.3, 0.1), c(0., 2.)])).unwrap();
        assert!(p.is_interior());
        assert!((herm_norm(p.lift()) + 1.0).abs() < 1e-14);
        assert!(p.lift()[1].im == 0.0 && p.lift()[1].re > 0.0);

        let b = ProjPoint::from_lift(vec(&[c(0., 3.), c(3., 0.)])).unwrap();
        assert!(b.is_boundary());
        assert!((b.lift().norm() - 1.0).abs() < 1e-14);

        assert_eq!(
            ProjPoint::from_lift(vec(&[c(2., 0.), c(1., 0.)])),
            Err(Error::PositiveLine)
        );
        assert_eq!(
            ProjPoint::from_lift(vec(&[c(0., 0.), c(0., 0.)])),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn point_json_round_trip() {
        let p = ProjPoint::from_ball(&[c(0.2, -0.1), c(0.0, 0.3)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"interior\""));
        let q: ProjPoint = serde_json::from_str(&s).unwrap();
        assert!(p.same_point(&q, 1e-15));
        let bad = r#"{"kind":"boundary","lift":[[0.1,0],[1,0]]}"#;
        assert!(serde_json::from_str::<ProjPoint>(bad).is_err());
    }

    #[test]
    fn distance_ball_radius() {
        // oracle: integrate the curvature -1 disc metric 2/(1-r^2) from 0 to 0.5
        let n = 20_000;
        let h = 0.5 / n as f64;
        let simpson: f64 = (0..=n)
            .map(|k| {
                let r = k as f64 * h;
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * 2.0 / (1.0 - r * r)
            })
            .sum::<f64>()
            * h
            / 3.0;
        let m = HermitianModel::new(1).unwrap();
        let d = m
            .distance(&m.origin(), &ProjPoint::from_ball(&[c(0.5, 0.)]).unwrap())
            .unwrap();
        assert!((d - simpson).abs() < 1e-10, "{d} vs {simpson}");
        assert_eq!(m.distance(&m.origin(), &m.origin()).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_boundary() {
        let m = HermitianModel::new(1).unwrap();
        let b = ProjPoint::from_ball(&[c(1., 0.)]).unwrap();
        assert_eq!(m.distance(&m.origin(), &b), Err(Error::NotInterior));
    }

    #[test]
    fn geodesic_endpoints_and_speed() {
        let m = HermitianModel::new(2).unwrap();
        let x = ProjPoint::from_ball(&[c(0.1, 0.2), c(-0.3, 0.1)]).unwrap();
        let y = ProjPoint::from_ball(&[c(-0.4, 0.0), c(0.2, 0.5)]).unwrap();
        let d = m.distance(&x, &y).unwrap();
        assert!(m.geodesic(&x, &y, 0.0).unwrap().same_point(&x, 1e-12));
        let end = m.geodesic(&x, &y, d).unwrap();
        assert!(m.distance(&end, &y).unwrap() < 1e-9);

        let xi = ProjPoint::from_ball(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        for t in [0.0, 0.7, 3.0, 8.0] {
            let a = m.geodesic(&x, &xi, t).unwrap();
            let b = m.geodesic(&x, &xi, t + 1.0).unwrap();
            assert!((m.distance(&a, &b).unwrap() - 1.0).abs() < 1e-9);
        }
        assert_eq!(m.geodesic(&x, &x, 1.0), Err(Error::CoincidentPoints));
    }

    #[test]
    fn metric_and_kahler_basics() {
        let m = HermitianModel::new(2).unwrap();
        let x = ProjPoint::from_ball(&[c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        let u = m.tangent(&x, vec(&[c(1., 2.), c(-0.5, 0.3), c(0.2, 0.)])).unwrap();
        let v = m.tangent(&x, vec(&[c(0., 1.), c(0.7, -1.), c(0.1, 0.1)])).unwrap();
        let (g, w) = m.metric_and_kahler(&u, &u).unwrap();
        assert!(g > 0.0);
        assert!(w.abs() < 1e-12);
        let (_, wuv) = m.metric_and_kahler(&u, &v).unwrap();
        let (_, wvu) = m.metric_and_kahler(&v, &u).unwrap();
        assert!((wuv + wvu).abs() < 1e-12);
        // omega(u, v) = g(Ju, v)
        let (gju, _) = m.metric_and_kahler(&u.rotate(), &v).unwrap();
        assert!((gju - wuv).abs() < 1e-12);
        // metric scales with metric_scale
        let m8 = HermitianModel::with_metric_scale(2, 8.0).unwrap();
        let (g8, _) = m8.metric_and_kahler(&u, &u).unwrap();
        assert!((g8 - 2.0 * g).abs() < 1e-12);

        let other = m.tangent(&m.origin(), vec(&[c(1., 0.), c(0., 0.), c(0., 0.)])).unwrap();
        assert_eq!(m.metric_and_kahler(&u, &other), Err(Error::BaseMismatch));
    }

    #[test]
    fn frame_is_orthonormal() {
        let m = HermitianModel::new(3).unwrap();
        let x = ProjPoint::from_ball(&[c(0.3, -0.2), c(0.1, 0.4), c(-0.2, 0.1)]).unwrap();
        let f = m.tangent_frame(&x).unwrap();
        assert_eq!(f.len(), 6);
        for (i, a) in f.iter().enumerate() {
            assert!(herm(a.components(), x.lift()).norm() < 1e-13);
            for (j, b) in f.iter().enumerate() {
                let (g, _) = m.metric_and_kahler(a, b).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12, "{i} {j} {g}");
            }
        }
    }

    #[test]
    fn ideal_chain_triangle_has_area_pi() {
        let m = HermitianModel::new(1).unwrap();
        let a = ProjPoint::from_ball(&[c(1., 0.)]).unwrap();
        let b = ProjPoint::from_ball(&[c(0., 1.)]).unwrap();
        let d = ProjPoint::from_ball(&[c(-1., 0.)]).unwrap();
        let area = m.triangle_area(&a, &b, &d).unwrap();
        assert!((area.value - PI).abs() < 1e-6, "{area:?}");
        let rev = m.triangle_area(&b, &a, &d).unwrap();
        assert!((rev.value + PI).abs() < 1e-6, "{rev:?}");
    }

    #[test]
    fn degenerate_triangle_flagged() {
        let m = HermitianModel::new(1).unwrap();
        let a = ProjPoint::from_ball(&[c(0.2, 0.)]).unwrap();
        let b = ProjPoint::from_ball(&[c(0., 0.4)]).unwrap();
        let t = m.triangle_area(&a, &a, &b).unwrap();
        assert_eq!(t.value, 0.0);
        assert!(t.degenerate);
    }

    #[test]
    fn small_interior_triangle_matches_gauss_bonnet() {
        // curvature -1 disc: area = pi - angle sum; equilateral triangle with
        // vertices at radius r: compare against an independent polar quadrature
        let m = HermitianModel::new(1).unwrap();
        let r: f64 = 0.4;
        let pts: Vec<ProjPoint> = (0..3)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 3.0;
                ProjPoint::from_ball(&[c(r * th.cos(), r * th.sin())]).unwrap()
            })
            .collect();
        let area = m.triangle_area(&pts[0], &pts[1], &pts[2]).unwrap().value;
        // side length and angle via hyperbolic law of cosines
        let side = m.distance(&pts[0], &pts[1]).unwrap();
        let ch = side.cosh();
        let angle = ((ch * ch - ch) / (side.sinh() * side.sinh())).acos();
        let expected = PI - 3.0 * angle;
        assert!((area - expected).abs() < 1e-7, "{area} vs {expected}");
    }
}
