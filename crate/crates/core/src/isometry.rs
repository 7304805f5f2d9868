//! Elements of `PU(p,1)`, their action, classification, and holomorphic
//! isometric embeddings `H_C^p -> H_C^q`.
//!
//! Matrices are kept up to a positive scalar: an [`Isometry`] satisfies
//! `M^* J M = lambda J` with `lambda > 0`, and nothing depends on `det M`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{herm, CVector, HermitianModel, ProjPoint, TangentVector, C64};
use crate::sampling;

pub type CMatrix = DMatrix<C64>;

/// Relative residual accepted for `M^* J M = lambda J`.
pub const ISOMETRY_TOL: f64 = 1e-10;

/// Eigenvalue-modulus spread above which an element is hyperbolic.
pub const TOL_CLS: f64 = 1e-8;

pub fn form_matrix(dim: usize) -> CMatrix {
    let mut j = CMatrix::identity(dim, dim);
    j[(dim - 1, dim - 1)] = C64::new(-1.0, 0.0);
    j
}

/// Returns `(lambda, relative residual)` for `A^* J_q A = lambda J_p`.
fn form_scale(a: &CMatrix) -> (f64, f64) {
    let jq = form_matrix(a.nrows());
    let jp = form_matrix(a.ncols());
    let g = a.adjoint() * &jq * a;
    let lambda = (&jp * &g).trace().re / a.ncols() as f64;
    let resid = (&g - &jp * C64::new(lambda, 0.0)).norm();
    let denom = a.norm_squared().max(f64::MIN_POSITIVE);
    (lambda, resid / denom)
}

/// Matrix as rows of `[re, im]` pairs, the JSON form used for isometries.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for Isometry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Isometry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = MatrixRows::deserialize(d)?;
        let m = matrix_from_rows(&rows).map_err(serde::de::Error::custom)?;
        Isometry::new(m).map_err(serde::de::Error::custom)
    }
}

/// Dynamical type of an isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsometryClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
    /// Spectrum too close to a threshold to decide.
    Indeterminate,
}

/// An element of `PU(p,1)` represented by a matrix preserving the form up to
/// a positive scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
    scale: f64,
}

impl Isometry {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let (scale, residual) = form_scale(&matrix);
        if !(scale > 0.0) || !(residual < ISOMETRY_TOL) {
            return Err(Error::NotAnIsometry { residual });
        }
        Ok(Self { matrix, scale })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            matrix: CMatrix::identity(p + 1, p + 1),
            scale: 1.0,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// The positive scalar `lambda` in `M^* J M = lambda J`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn p(&self) -> usize {
        self.matrix.nrows() - 1
    }

    /// Relative residual of the form-preservation identity.
    pub fn residual(&self) -> f64 {
        form_scale(&self.matrix).1
    }

    pub fn apply(&self, x: &ProjPoint) -> Result<ProjPoint> {
        if x.lift().len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: x.lift().len(),
            });
        }
        let v = &self.matrix * x.lift();
        let pt = ProjPoint::from_lift(v)?;
        if pt.kind() != x.kind() {
            // rounding can push a null image just outside TOL_NULL
            return ProjPoint::from_lift(snap_kind(pt.lift().clone(), x.is_boundary()));
        }
        Ok(pt)
    }

    /// Differential of the action on a tangent vector.
    pub fn push_tangent(&self, model: &HermitianModel, u: &TangentVector) -> Result<TangentVector> {
        let p = &self.matrix * u.base().lift();
        let dp = &self.matrix * u.components();
        model.tangent_of_curve(&p, &dp)
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.matrix.ncols() != other.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: other.matrix.nrows(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            scale: self.scale * other.scale,
        })
    }

    pub fn inverse(&self) -> Self {
        let j = form_matrix(self.matrix.nrows());
        Self {
            matrix: &j * self.matrix.adjoint() * &j / C64::new(self.scale, 0.0),
            scale: 1.0 / self.scale,
        }
    }

    /// Entrywise complex conjugate, i.e. conjugation by `z -> conj(z)`.
    pub fn conj(&self) -> Self {
        Self {
            matrix: self.matrix.map(|c| c.conj()),
            scale: self.scale,
        }
    }

    /// `g self g^{-1}`.
    pub fn conjugated_by(&self, g: &Self) -> Result<Self> {
        g.compose(self)?.compose(&g.inverse())
    }

    /// Distance from the identity up to scalars: `min_c |M - c I| / |M|`.
    pub fn projective_identity_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let c = self.matrix.trace() / C64::new(n as f64, 0.0);
        let d = &self.matrix - CMatrix::identity(n, n) * c;
        d.norm() / self.matrix.norm()
    }

    /// Exponential of a Gaussian element of `u(p,1)`.
    pub fn random(p: usize, seed: u64) -> Self {
        Self::random_with_scale(p, seed, 1.0)
    }

    /// As [`Isometry::random`], with Lie-algebra entries scaled by `scale`.
    pub fn random_with_scale(p: usize, seed: u64, scale: f64) -> Self {
        let n = p + 1;
        let mut rng = sampling::rng(seed);
        let b = CMatrix::from_fn(n, n, |_, _| sampling::complex_gaussian(&mut rng));
        // K anti-Hermitian, A = J K satisfies A^* J + J A = 0
        let k = (&b - b.adjoint()) * C64::new(0.5 * scale, 0.0);
        let a = form_matrix(n) * k;
        let m = a.exp();
        let (s, _) = form_scale(&m);
        Self { matrix: m, scale: s }
    }

    /// The transvection along the geodesic from the origin to `x`.
    pub fn transvection(x: &ProjPoint) -> Result<Self> {
        if !x.is_interior() {
            return Err(Error::NotInterior);
        }
        let p = x.p();
        let z = x.ball_coordinates();
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let gamma = 1.0 / (1.0 - r2).sqrt();
        let mut m = CMatrix::identity(p + 1, p + 1);
        if r2 > 0.0 {
            for i in 0..p {
                for j in 0..p {
                    m[(i, j)] += z[i] * z[j].conj() * ((gamma - 1.0) / r2);
                }
                m[(i, p)] = z[i] * gamma;
                m[(p, i)] = z[i].conj() * gamma;
            }
            m[(p, p)] = C64::new(gamma, 0.0);
        }
        Ok(Self { matrix: m, scale: 1.0 })
    }

    /// `diag(U, phase)` for a unitary `U` of size `p`.
    pub fn unitary(u: &CMatrix, phase: C64) -> Result<Self> {
        let p = u.nrows();
        let mut m = CMatrix::zeros(p + 1, p + 1);
        m.view_mut((0, 0), (p, p)).copy_from(u);
        m[(p, p)] = phase;
        Self::new(m)
    }

    /// A unitary isometry fixing the origin and taking the boundary point
    /// `(1, 0, ..., 0)` to `xi`.
    pub fn rotation_to(xi: &ProjPoint) -> Result<Self> {
        if !xi.is_boundary() {
            return Err(Error::NotBoundary);
        }
        let p = xi.p();
        let first: Vec<C64> = xi.ball_coordinates();
        let mut cols: Vec<CVector> = vec![CVector::from_vec(first)];
        for k in 0..p {
            if cols.len() == p {
                break;
            }
            let mut e = CVector::zeros(p);
            e[k] = C64::new(1.0, 0.0);
            for c in &cols {
                let d = c.dotc(&e);
                e -= c * d;
            }
            let n = e.norm();
            if n > 1e-6 {
                cols.push(e / C64::new(n, 0.0));
            }
        }
        let u = CMatrix::from_columns(&cols);
        Self::unitary(&u, C64::new(1.0, 0.0))
    }

    /// Classifies the isometry as elliptic, parabolic, or hyperbolic.
    pub fn classify(&self) -> IsometryClass {
        classify_matrix(&self.matrix)
    }
}

fn snap_kind(v: CVector, boundary: bool) -> CVector {
    if !boundary {
        return v;
    }
    // rescale the last coordinate so the vector is exactly null
    let n = v.len() - 1;
    let pos: f64 = (0..n).map(|i| v[i].norm_sqr()).sum();
    let mut w = v;
    let last = w[n];
    w[n] = last / last.norm() * pos.sqrt();
    w
}

fn classify_matrix(m: &CMatrix) -> IsometryClass {
    let n = m.nrows();
    let det = m.clone().determinant();
    let norm = det.norm().powf(1.0 / n as f64);
    let m = m / C64::new(norm, 0.0);
    let eig = match m.clone().schur().eigenvalues() {
        Some(e) => e,
        None => return IsometryClass::Indeterminate,
    };

    // group eigenvalues split apart by rounding of Jordan blocks
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mut sum = eig[i];
        let mut count = 1;
        used[i] = true;
        for j in (i + 1)..n {
            if !used[j] && (eig[i] - eig[j]).norm() <= 1e-4 * eig[i].norm().max(eig[j].norm()) {
                used[j] = true;
                sum += eig[j];
                count += 1;
            }
        }
        clusters.push((sum / C64::new(count as f64, 0.0), count));
    }

    let max = clusters.iter().map(|c| c.0.norm()).fold(0.0, f64::max);
    let min = clusters.iter().map(|c| c.0.norm()).fold(f64::INFINITY, f64::min);
    let spread = max / min;
    if spread > 1.0 + TOL_CLS {
        return IsometryClass::Hyperbolic;
    }
    if spread > 1.0 + 1e-10 {
        return IsometryClass::Indeterminate;
    }

    let scale = m.norm();
    let mut diagonalizable = true;
    for (mu, mult) in clusters {
        let shifted = &m - CMatrix::identity(n, n) * mu;
        let sv = shifted.singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| a.total_cmp(b));
        for &v in s.iter().take(mult) {
            if v > 1e-4 * scale {
                diagonalizable = false;
            } else if v > 1e-7 * scale {
                return IsometryClass::Indeterminate;
            }
        }
    }
    if diagonalizable {
        IsometryClass::Elliptic
    } else {
        IsometryClass::Parabolic
    }
}

/// A holomorphic isometric embedding `H_C^p -> H_C^q` given by a linear map
/// `W: C^{p+1} -> C^{q+1}` with `<Wv, Ww>_q = lambda <v, w>_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMap {
    matrix: CMatrix,
    scale: f64,
}

impl EmbeddingMap {
    /// Validates `W^* J_q W = lambda J_p` to `1e-9` relative residual.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() < matrix.ncols() || matrix.ncols() < 2 {
            return Err(Error::DimensionMismatch {
                expected: matrix.ncols(),
                got: matrix.nrows(),
            });
        }
        let (scale, residual) = form_scale(&matrix);
        if !(scale > 0.0) || !(residual < 1e-9) {
            return Err(Error::NotAnIsometry { residual });
        }
        Ok(Self { matrix, scale })
    }

    /// `(z_1..z_p, w) -> (z_1..z_p, 0..0, w)`.
    pub fn standard(p: usize, q: usize) -> Result<Self> {
        if q < p || p == 0 {
            return Err(Error::InvalidModel(format!(
                "standard embedding needs 1 <= p <= q, got p={p}, q={q}"
            )));
        }
        let mut w = CMatrix::zeros(q + 1, p + 1);
        for i in 0..p {
            w[(i, i)] = C64::new(1.0, 0.0);
        }
        w[(q, p)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: w, scale: 1.0 })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn p(&self) -> usize {
        self.matrix.ncols() - 1
    }

    pub fn q(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn residual(&self) -> f64 {
        form_scale(&self.matrix).1
    }

    pub fn apply(&self, x: &ProjPoint) -> Result<ProjPoint> {
        if x.lift().len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: x.lift().len(),
            });
        }
        let v = &self.matrix * x.lift();
        let pt = ProjPoint::from_lift(v)?;
        if pt.kind() != x.kind() {
            return ProjPoint::from_lift(snap_kind(pt.lift().clone(), x.is_boundary()));
        }
        Ok(pt)
    }

    /// `g o W` for an isometry `g` of the target.
    pub fn then(&self, g: &Isometry) -> Result<Self> {
        if g.matrix().ncols() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: g.matrix().ncols(),
            });
        }
        Ok(Self {
            matrix: g.matrix() * &self.matrix,
            scale: self.scale * g.scale(),
        })
    }

    /// `W o g` for an isometry `g` of the source.
    pub fn after(&self, g: &Isometry) -> Result<Self> {
        if g.matrix().nrows() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: g.matrix().nrows(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * g.matrix(),
            scale: self.scale * g.scale(),
        })
    }

    /// Extends an isometry of the source across the standard embedding:
    /// acts by `g` on the image of `W` and trivially on its orthogonal.
    pub fn extend(&self, g: &Isometry) -> Result<Isometry> {
        let w = &self.matrix;
        let q1 = w.nrows();
        let jq = form_matrix(q1);
        let jp = form_matrix(w.ncols());
        // W^+ = J_p W^* J_q / lambda is a left inverse of W
        let left = &jp * w.adjoint() * &jq / C64::new(self.scale, 0.0);
        let proj = w * &left;
        let complement = CMatrix::identity(q1, q1) - &proj;
        let gs = g.matrix() / C64::new(g.scale().sqrt(), 0.0);
        let m = w * gs * &left + complement;
        Isometry::new(m)
    }

    /// The form pairing `<W v, W w>_q`.
    pub fn pullback_inner(&self, v: &CVector, w: &CVector) -> C64 {
        herm(&(&self.matrix * v), &(&self.matrix * w))
    }
}
