//! The Cartan angular invariant, chains, k-planes and the Heisenberg
//! projection.
//!
//! A chain is the boundary circle of a complex geodesic, i.e. the
//! projectivized null cone of a signature `(1,1)` plane in `C^{p+1}`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{herm, CVector, ProjPoint, C64};
use crate::sampling;

/// Triple products smaller than this (on unit lifts) are treated as zero.
pub const TOL_TRIPLE: f64 = 1e-12;

/// Value of the Cartan invariant, flagged when the triple is degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartanValue {
    pub value: f64,
    pub degenerate: bool,
}

fn unit_lift(x: &ProjPoint) -> CVector {
    let v = x.lift();
    v / C64::new(v.norm(), 0.0)
}

fn check_boundary(points: &[&ProjPoint]) -> Result<usize> {
    let p = points[0].p();
    for x in points {
        if !x.is_boundary() {
            return Err(Error::NotBoundary);
        }
        if x.p() != p {
            return Err(Error::DimensionMismatch {
                expected: p + 1,
                got: x.p() + 1,
            });
        }
    }
    Ok(p)
}

/// `-<v1,v2><v2,v3><v3,v1>` on unit lifts.
pub fn triple_product(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> Result<C64> {
    check_boundary(&[a, b, c])?;
    let (x, y, z) = (unit_lift(a), unit_lift(b), unit_lift(c));
    Ok(-(herm(&x, &y) * herm(&y, &z) * herm(&z, &x)))
}

/// `c = (2/pi) arg(-<v1,v2><v2,v3><v3,v1>)`, normalized so that the
/// counterclockwise triple `(1, i, -1)` on the unit circle gives `+1`.
pub fn cartan_invariant(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> Result<CartanValue> {
    let t = triple_product(a, b, c)?;
    if t.norm() < TOL_TRIPLE {
        return Ok(CartanValue {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(CartanValue {
        value: FRAC_2_PI * t.arg(),
        degenerate: false,
    })
}

/// Euclidean orthonormal basis of the column span, by modified Gram-Schmidt.
fn orthonormalize(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let mut w = v / C64::new(v.norm(), 0.0);
        for _ in 0..2 {
            for b in &basis {
                let d = b.dotc(&w);
                w -= b * d;
            }
        }
        let n = w.norm();
        if n > tol {
            basis.push(w / C64::new(n, 0.0));
        }
    }
    basis
}

fn span_residual(basis: &[CVector], v: &CVector) -> f64 {
    let v = v / C64::new(v.norm(), 0.0);
    let mut r = v.clone();
    for b in basis {
        let d = b.dotc(&v);
        r -= b * d;
    }
    r.norm()
}

/// The boundary of a complex geodesic, with an orientation.
///
/// Points of the chain are `e_- + exp(i o t) e_+` where `(e_-, e_+)` is a
/// form-orthonormal basis of the plane and `o = ±1`. Orientation `+1` is the
/// one induced by the complex structure of the disc the chain bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    e_minus: CVector,
    e_plus: CVector,
    orientation: i8,
    defining: [ProjPoint; 2],
    basis: Vec<CVector>,
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    points: [ProjPoint; 2],
    orientation: i8,
}

impl Serialize for Chain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChainRepr {
            points: self.defining.clone(),
            orientation: self.orientation,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Chain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ChainRepr::deserialize(d)?;
        let c = chain_through(&r.points[0], &r.points[1]).map_err(serde::de::Error::custom)?;
        match r.orientation {
            1 => Ok(c),
            -1 => Ok(c.reversed()),
            o => Err(serde::de::Error::custom(format!("orientation must be ±1, got {o}"))),
        }
    }
}

/// The unique chain through two distinct boundary points, canonically
/// oriented.
pub fn chain_through(xi: &ProjPoint, eta: &ProjPoint) -> Result<Chain> {
    check_boundary(&[xi, eta])?;
    let x = unit_lift(xi);
    let y = unit_lift(eta);
    let a = herm(&x, &y);
    let m = a.norm();
    if m < TOL_TRIPLE.sqrt() {
        return Err(Error::CoincidentPoints);
    }
    // rephase so that <x, y'> = -m
    let y = &y * (-a / m);
    let s = C64::new((2.0 * m).sqrt(), 0.0);
    let e_minus = (&x + &y) / s;
    let e_plus = (&x - &y) / s;
    let basis = orthonormalize(&[x, y], 1e-12);
    Ok(Chain {
        e_minus,
        e_plus,
        orientation: 1,
        defining: [xi.clone(), eta.clone()],
        basis,
    })
}

impl Chain {
    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn reversed(&self) -> Self {
        let mut c = self.clone();
        c.orientation = -c.orientation;
        c
    }

    pub fn defining_points(&self) -> &[ProjPoint; 2] {
        &self.defining
    }

    pub fn p(&self) -> usize {
        self.e_minus.len() - 1
    }

    /// Form-orthonormal basis `(e_-, e_+)` with `<e_-,e_-> = -1`.
    pub fn form_basis(&self) -> (&CVector, &CVector) {
        (&self.e_minus, &self.e_plus)
    }

    /// Relative least-squares distance from a lift of `zeta` to the plane.
    pub fn residual(&self, zeta: &ProjPoint) -> f64 {
        span_residual(&self.basis, zeta.lift())
    }

    pub fn contains(&self, zeta: &ProjPoint, tol: f64) -> bool {
        zeta.p() == self.p() && self.residual(zeta) <= tol
    }

    /// The point at angle `t`; `t -> point` is `2 pi`-periodic and injective
    /// on `[0, 2 pi)`.
    pub fn sample(&self, t: f64) -> ProjPoint {
        let w = C64::from_polar(1.0, self.orientation as f64 * t);
        let v = &self.e_minus + &self.e_plus * w;
        ProjPoint::from_lift(v).expect("chain points are null")
    }

    /// Angle in `(-pi, pi]` of a point of the chain (its projection onto the
    /// chain if it lies off it).
    pub fn parameter(&self, zeta: &ProjPoint) -> f64 {
        let v = zeta.lift();
        let w = -herm(v, &self.e_plus) / herm(v, &self.e_minus);
        self.orientation as f64 * w.arg()
    }

    /// Image under a linear map preserving the form up to scale.
    pub fn map(&self, m: &DMatrix<C64>) -> Result<Chain> {
        let a = ProjPoint::from_lift(m * self.defining[0].lift())?;
        let b = ProjPoint::from_lift(m * self.defining[1].lift())?;
        let c = chain_through(&a, &b)?;
        Ok(if self.orientation < 0 { c.reversed() } else { c })
    }
}

/// Boundary points lying on a common chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub chain: Chain,
    pub points: Vec<ProjPoint>,
}

impl ChainConfig {
    pub fn new(chain: Chain, points: Vec<ProjPoint>, tol: f64) -> Result<Self> {
        for x in &points {
            if !chain.contains(x, tol) {
                return Err(Error::InvalidInput("point is not on the chain".into()));
            }
        }
        Ok(Self { chain, points })
    }

    /// A random chain with `k` random points on it.
    pub fn random<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> Self {
        let chain = random_chain(p, rng);
        let points = (0..k)
            .map(|_| chain.sample(std::f64::consts::TAU * rng.random::<f64>()))
            .collect();
        Self { chain, points }
    }
}

pub fn random_chain<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Chain {
    loop {
        let a = sampling::boundary_point(p, rng);
        let b = sampling::boundary_point(p, rng);
        if let Ok(c) = chain_through(&a, &b) {
            return c;
        }
    }
}

/// A complex k-plane: the boundary of a totally geodesic `H_C^k`, given by
/// a signature `(k,1)` subspace of `C^{p+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KPlane {
    basis: Vec<CVector>,
}

impl KPlane {
    /// The complex dimension `k` of the geodesic subspace.
    pub fn k(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn basis(&self) -> &[CVector] {
        &self.basis
    }

    pub fn residual(&self, zeta: &ProjPoint) -> f64 {
        span_residual(&self.basis, zeta.lift())
    }

    pub fn contains(&self, zeta: &ProjPoint, tol: f64) -> bool {
        zeta.lift().len() == self.basis[0].len() && self.residual(zeta) <= tol
    }
}

const RANK_TOL: f64 = 1e-8;

fn positive_eigenvalues(basis: &[CVector]) -> Result<usize> {
    let n = basis.len();
    let g = DMatrix::from_fn(n, n, |i, j| herm(&basis[i], &basis[j]));
    let eig = g.symmetric_eigenvalues();
    let positive = eig.iter().filter(|&&e| e > 1e-10).count();
    let negative = eig.iter().filter(|&&e| e < -1e-10).count();
    if negative != 1 || positive + negative != n {
        return Err(Error::WrongSignature { positive });
    }
    Ok(positive)
}

/// The smallest complex plane whose boundary contains `points`.
pub fn span_plane(points: &[ProjPoint]) -> Result<KPlane> {
    if points.len() < 2 {
        return Err(Error::DegenerateSpan {
            rank: points.len(),
            expected: 2,
        });
    }
    let refs: Vec<&ProjPoint> = points.iter().collect();
    check_boundary(&refs)?;
    let lifts: Vec<CVector> = points.iter().map(|x| x.lift().clone()).collect();
    let basis = orthonormalize(&lifts, RANK_TOL);
    positive_eigenvalues(&basis)?;
    Ok(KPlane { basis })
}

/// The k-plane through `k + 1` boundary points in general position.
pub fn k_plane_through(points: &[ProjPoint]) -> Result<KPlane> {
    let plane = span_plane(points)?;
    if plane.basis.len() != points.len() {
        return Err(Error::DegenerateSpan {
            rank: plane.basis.len(),
            expected: points.len(),
        });
    }
    Ok(plane)
}

/// Projection `pi_xi` of `∂H_C^2 \ {xi}` onto `C`, whose fibers are the
/// chains through `xi`.
///
/// `xi` is first rotated to `(1, 0, 1)` by a fixed unitary (`U = [xi', xi'^⊥]`
/// with `xi'^⊥ = (-conj xi'_2, conj xi'_1)`); in Siegel coordinates
/// `s = ((x1+x3)/√2, x2, (x1-x3)/√2)` the image is `s2 / s3`.
pub fn heisenberg_projection(xi: &ProjPoint, zeta: &ProjPoint) -> Result<C64> {
    check_boundary(&[xi, zeta])?;
    if xi.p() != 2 {
        return Err(Error::InvalidModel(format!(
            "Heisenberg projection needs p = 2, got p = {}",
            xi.p()
        )));
    }
    let b = xi.ball_coordinates();
    let (u1, u2) = (b[0], b[1]);
    let v = zeta.lift();
    let v = v / C64::new(v.norm(), 0.0);
    // U^* applied to the first two coordinates
    let x1 = u1.conj() * v[0] + u2.conj() * v[1];
    let x2 = -u2 * v[0] + u1 * v[1];
    let x3 = v[2];
    let s2 = x2;
    let s3 = (x1 - x3) * FRAC_1_SQRT_2;
    if s3.norm() < 1e-12 {
        return Err(Error::CoincidentPoints);
    }
    Ok(s2 / s3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::HermitianModel;
    use crate::isometry::Isometry;
    use crate::sampling::{boundary_point, rng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bpt(z: &[C64]) -> ProjPoint {
        let mut v: Vec<C64> = z.to_vec();
        v.push(c(1., 0.));
        ProjPoint::from_lift(CVector::from_vec(v)).unwrap()
    }

    #[test]
    fn calibration_triple() {
        let (a, b, d) = (bpt(&[c(1., 0.)]), bpt(&[c(0., 1.)]), bpt(&[c(-1., 0.)]));
        // direct expansion with lifts (z,1): <a,b> = 1*conj(i) - 1 = -1 - i, etc.
        let ab = c(1., 0.) * c(0., -1.) - c(1., 0.);
        let bd = c(0., 1.) * c(-1., 0.) - c(1., 0.);
        let da = c(-1., 0.) * c(1., 0.) - c(1., 0.);
        let oracle = ab * bd * da;
        assert!((oracle - c(0., -4.)).norm() < 1e-15);
        let t = triple_product(&a, &b, &d).unwrap();
        assert!((t - (-oracle) / 8.0).norm() < 1e-14);
        let v = cartan_invariant(&a, &b, &d).unwrap();
        assert!((v.value - 1.0).abs() < 1e-14 && !v.degenerate);
        assert!((cartan_invariant(&b, &a, &d).unwrap().value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_triples() {
        let mut r = rng(1);
        let x = boundary_point(3, &mut r);
        let y = boundary_point(3, &mut r);
        let v = cartan_invariant(&x, &x, &y).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.degenerate);
        let o = ProjPoint::origin(3);
        assert!(matches!(cartan_invariant(&o, &x, &y), Err(Error::NotBoundary)));
    }

    #[test]
    fn alternating_and_bounded() {
        let mut r = rng(2);
        for _ in 0..500 {
            let (a, b, d) = (
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
            );
            let v = cartan_invariant(&a, &b, &d).unwrap().value;
            assert!(v.abs() <= 1.0);
            assert!((cartan_invariant(&b, &a, &d).unwrap().value + v).abs() < 1e-12);
            assert!((cartan_invariant(&b, &d, &a).unwrap().value - v).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_membership_examples() {
        let ch = chain_through(&bpt(&[c(1., 0.), c(0., 0.)]), &bpt(&[c(-1., 0.), c(0., 0.)])).unwrap();
        assert!(ch.contains(&bpt(&[c(0., 1.), c(0., 0.)]), 1e-12));
        assert!(!ch.contains(&bpt(&[c(0., 0.), c(1., 0.)]), 1e-3));
        for x in ch.defining_points() {
            assert!(ch.contains(x, 1e-12));
        }
        let x = bpt(&[c(1., 0.), c(0., 0.)]);
        assert!(matches!(chain_through(&x, &x), Err(Error::CoincidentPoints)));
    }

    #[test]
    fn samples_are_periodic_and_oriented() {
        let mut r = rng(3);
        for _ in 0..50 {
            let ch = random_chain(3, &mut r);
            let t = 6.0 * r.random::<f64>();
            let x = ch.sample(t);
            assert!(ch.contains(&x, 1e-12));
            assert!(x.same_point(&ch.sample(t + std::f64::consts::TAU), 1e-9));
            assert!(
                (ch.parameter(&x)
                    - (t - if t > std::f64::consts::PI {
                        std::f64::consts::TAU
                    } else {
                        0.0
                    }))
                .abs()
                    < 1e-9
            );
            let ts = [0.3, 1.7, 4.0];
            let pts: Vec<ProjPoint> = ts.iter().map(|&t| ch.sample(t)).collect();
            let v = cartan_invariant(&pts[0], &pts[1], &pts[2]).unwrap().value;
            assert!((v - 1.0).abs() < 1e-9);
            let rc = ch.reversed();
            let pts: Vec<ProjPoint> = ts.iter().map(|&t| rc.sample(t)).collect();
            let v = cartan_invariant(&pts[0], &pts[1], &pts[2]).unwrap().value;
            assert!((v + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn extremality_both_directions() {
        let mut r = rng(4);
        for _ in 0..200 {
            let cfg = ChainConfig::random(2, 3, &mut r);
            let v = cartan_invariant(&cfg.points[0], &cfg.points[1], &cfg.points[2])
                .unwrap()
                .value;
            assert!((v.abs() - 1.0).abs() < 1e-7);
        }
        for _ in 0..200 {
            let (a, b, d) = (
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
            );
            let v = cartan_invariant(&a, &b, &d).unwrap().value;
            let on = chain_through(&a, &b).unwrap().contains(&d, 1e-7);
            assert_eq!(on, (v.abs() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn area_matches_cartan() {
        let model = HermitianModel::new(2).unwrap();
        let mut r = rng(5);
        for _ in 0..10 {
            let (a, b, d) = (
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
            );
            let area = model.triangle_area(&a, &b, &d).unwrap().value;
            let v = cartan_invariant(&a, &b, &d).unwrap().value;
            assert!((area / std::f64::consts::PI - v).abs() < 1e-4, "{area} {v}");
        }
    }

    #[test]
    fn isometries_preserve_cartan_and_chains() {
        let mut r = rng(6);
        for k in 0..200 {
            let g = Isometry::random(2, 1000 + k);
            let (a, b, d) = (
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
                boundary_point(2, &mut r),
            );
            let v0 = cartan_invariant(&a, &b, &d).unwrap().value;
            let ga = g.apply(&a).unwrap();
            let gb = g.apply(&b).unwrap();
            let v1 = cartan_invariant(&ga, &gb, &g.apply(&d).unwrap()).unwrap().value;
            assert!((v0 - v1).abs() < 1e-9);
        }
        let g = Isometry::random(2, 17);
        let ch = random_chain(2, &mut r);
        let image = ch.map(g.matrix()).unwrap();
        for i in 0..50 {
            let x = ch.sample(i as f64 * 0.125);
            assert!(image.contains(&g.apply(&x).unwrap(), 1e-9));
        }
    }

    #[test]
    fn k_plane_ranks() {
        let mut r = rng(7);
        let pts: Vec<ProjPoint> = (0..3).map(|_| boundary_point(2, &mut r)).collect();
        assert_eq!(k_plane_through(&pts).unwrap().k(), 2);
        let cfg = ChainConfig::random(2, 3, &mut r);
        assert_eq!(span_plane(&cfg.points).unwrap().k(), 1);
        assert!(matches!(
            k_plane_through(&cfg.points),
            Err(Error::DegenerateSpan { rank: 2, expected: 3 })
        ));
        let two = k_plane_through(&pts[..2]).unwrap();
        let ch = chain_through(&pts[0], &pts[1]).unwrap();
        for i in 0..10 {
            assert!(two.contains(&ch.sample(i as f64), 1e-10));
        }
    }

    #[test]
    fn heisenberg_fibers_and_circles() {
        let mut r = rng(8);
        let xi = boundary_point(2, &mut r);
        let z = boundary_point(2, &mut r);
        let vertical = chain_through(&xi, &z).unwrap();
        let w0 = heisenberg_projection(&xi, &vertical.sample(0.4)).unwrap();
        let w1 = heisenberg_projection(&xi, &vertical.sample(2.9)).unwrap();
        assert!((w0 - w1).norm() < 1e-9);

        let scaled = ProjPoint::from_lift(z.lift() * c(0.3, -2.0)).unwrap();
        assert!(
            (heisenberg_projection(&xi, &z).unwrap() - heisenberg_projection(&xi, &scaled).unwrap()).norm() < 1e-12
        );

        // image of a chain missing xi: circle through the first three images
        let ch = random_chain(2, &mut r);
        let w: Vec<C64> = (0..50)
            .map(|i| heisenberg_projection(&xi, &ch.sample(i as f64 * 0.1256)).unwrap())
            .collect();
        let (a, b, d) = (w[0], w[17], w[33]);
        let center = {
            let (ax, ay, bx, by, dx, dy) = (a.re, a.im, b.re, b.im, d.re, d.im);
            let den = 2.0 * (ax * (by - dy) + bx * (dy - ay) + dx * (ay - by));
            let ux = (a.norm_sqr() * (by - dy) + b.norm_sqr() * (dy - ay) + d.norm_sqr() * (ay - by)) / den;
            let uy = (a.norm_sqr() * (dx - bx) + b.norm_sqr() * (ax - dx) + d.norm_sqr() * (bx - ax)) / den;
            c(ux, uy)
        };
        let radius = (a - center).norm();
        let worst = w
            .iter()
            .map(|z| ((z - center).norm() - radius).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-7 * radius.max(1.0), "{worst}");
        assert!(heisenberg_projection(&xi, &xi).is_err());
    }

    #[test]
    fn chain_json_round_trip() {
        let ch = random_chain(2, &mut rng(9)).reversed();
        let s = serde_json::to_string(&ch).unwrap();
        let back: Chain = serde_json::from_str(&s).unwrap();
        assert_eq!(back.orientation(), -1);
        assert!(back.contains(&ch.sample(1.0), 1e-12));
    }
}
