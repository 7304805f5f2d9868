//! Toledo invariants of surface-group representations and the Milnor-Wood
//! inequality.
//!
//! For a closed surface of genus `g` with standard presentation
//! `<a_1, b_1, ..., a_g, b_g | prod [a_i, b_i]>`, the relator traces the
//! boundary of a fundamental `4g`-gon. Pushing the prefix products of the
//! relator through `rho` and summing the Kähler areas of the coned triangles
//! evaluates the pulled-back bounded Kähler class on the fundamental class.
//! Dividing by the area `2 pi (2g - 2)` of the surface gives `i_rho`, equal
//! to `1` for a Fuchsian representation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{HermitianModel, ProjPoint, C64};
use crate::isometry::{matrix_from_rows, matrix_to_rows, CMatrix, EmbeddingMap, Isometry, MatrixRows};

/// Relator residual tolerated (projective distance to the identity).
pub const RELATOR_TOL: f64 = 1e-8;

/// `c(g1, g2, g3) = ∫_{Δ(g1 x, g2 x, g3 x)} ω`.
pub fn homogeneous_cocycle(
    model: &HermitianModel,
    g1: &Isometry,
    g2: &Isometry,
    g3: &Isometry,
    x: &ProjPoint,
) -> Result<f64> {
    let a = g1.apply(x)?;
    let b = g2.apply(x)?;
    let c = g3.apply(x)?;
    Ok(model.triangle_area(&a, &b, &c)?.value)
}

/// A word in the generators: `k > 0` is generator `k` (1-based), `-k` its
/// inverse.
pub type Word = Vec<i32>;

/// `a_1 b_1 a_1^-1 b_1^-1 ... a_g b_g a_g^-1 b_g^-1` with generators ordered
/// `a_1, b_1, ..., a_g, b_g`.
pub fn standard_relator(genus: usize) -> Word {
    (0..genus as i32)
        .flat_map(|i| {
            let (a, b) = (2 * i + 1, 2 * i + 2);
            [a, b, -a, -b]
        })
        .collect()
}

/// A representation of a closed surface group, given by generator images.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGroupRep {
    genus: usize,
    generators: Vec<Isometry>,
    relator: Word,
    relator_residual: f64,
}

impl SurfaceGroupRep {
    /// Generators ordered `a_1, b_1, ..., a_g, b_g`; checks the standard
    /// relator.
    pub fn new(genus: usize, generators: Vec<Isometry>) -> Result<Self> {
        Self::with_relator(genus, generators, standard_relator(genus))
    }

    pub fn with_relator(genus: usize, generators: Vec<Isometry>, relator: Word) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidInput(format!("genus must be at least 2, got {genus}")));
        }
        if generators.len() != 2 * genus {
            return Err(Error::DimensionMismatch {
                expected: 2 * genus,
                got: generators.len(),
            });
        }
        let p = generators[0].p();
        if let Some(g) = generators.iter().find(|g| g.p() != p) {
            return Err(Error::DimensionMismatch {
                expected: p + 1,
                got: g.p() + 1,
            });
        }
        if relator.len() != 4 * genus
            || relator
                .iter()
                .any(|&k| k == 0 || k.unsigned_abs() as usize > generators.len())
        {
            return Err(Error::InvalidInput(
                "relator must be a word of length 4g in the generators of a closed surface".into(),
            ));
        }
        let mut rep = Self {
            genus,
            generators,
            relator,
            relator_residual: 0.0,
        };
        let total = rep.prefixes()?.pop().expect("relator is nonempty");
        rep.relator_residual = total.projective_identity_residual();
        if rep.relator_residual > RELATOR_TOL {
            return Err(Error::RelatorResidual {
                residual: rep.relator_residual,
            });
        }
        Ok(rep)
    }

    /// The Fuchsian representation of the regular `4g`-gon group in
    /// `PU(1,1)`.
    pub fn fuchsian(genus: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidInput(format!("genus must be at least 2, got {genus}")));
        }
        let n = 4 * genus;
        let step = 2.0 * PI / n as f64;
        // centre-to-side distance: cosh d = cot(pi / 4g)
        let d = (1.0 / (PI / n as f64).tan()).acosh();
        let rot = |t: f64| -> CMatrix {
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::from_polar(1.0, t / 2.0),
                    C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::from_polar(1.0, -t / 2.0),
                ],
            )
        };
        let (ch, sh) = (d.cosh(), d.sinh());
        // translation by 2d along the real axis
        let trans = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(ch, 0.0),
                C64::new(sh, 0.0),
                C64::new(sh, 0.0),
                C64::new(ch, 0.0),
            ],
        );
        // maps side j onto side k, carrying the polygon across side k
        let pairing = |j: usize, k: usize| -> Result<Isometry> {
            Isometry::new(rot(step * k as f64) * &trans * rot(PI - step * j as f64))
        };
        let mut gens = Vec::with_capacity(2 * genus);
        for i in 0..genus {
            gens.push(pairing(4 * i + 2, 4 * i)?);
            gens.push(pairing(4 * i + 1, 4 * i + 3)?);
        }
        Self::new(genus, gens)
    }

    /// All generators mapped to the identity of `PU(p,1)`.
    pub fn trivial(genus: usize, p: usize) -> Result<Self> {
        Self::new(genus, vec![Isometry::identity(p); 2 * genus])
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn relator(&self) -> &[i32] {
        &self.relator
    }

    pub fn relator_residual(&self) -> f64 {
        self.relator_residual
    }

    /// Target dimension `q` of `PU(q,1)`.
    pub fn q(&self) -> usize {
        self.generators[0].p()
    }

    /// Post-composition with complex conjugation.
    pub fn conj(&self) -> Self {
        Self {
            generators: self.generators.iter().map(Isometry::conj).collect(),
            ..self.clone()
        }
    }

    /// `g rho g^-1`.
    pub fn conjugated_by(&self, g: &Isometry) -> Result<Self> {
        let generators = self
            .generators
            .iter()
            .map(|a| a.conjugated_by(g))
            .collect::<Result<Vec<_>>>()?;
        Self::with_relator(self.genus, generators, self.relator.clone())
    }

    /// Composition with the standard homomorphism `PU(q,1) -> PU(q',1)`
    /// induced by an embedding.
    pub fn extend(&self, w: &EmbeddingMap) -> Result<Self> {
        let generators = self
            .generators
            .iter()
            .map(|a| w.extend(a))
            .collect::<Result<Vec<_>>>()?;
        Self::with_relator(self.genus, generators, self.relator.clone())
    }

    fn letter(&self, k: i32) -> Isometry {
        let g = &self.generators[k.unsigned_abs() as usize - 1];
        if k > 0 {
            g.clone()
        } else {
            g.inverse()
        }
    }

    /// Prefix products `gamma_1, ..., gamma_{4g}` of the relator, each
    /// rescaled to unit norm to keep products well conditioned.
    fn prefixes(&self) -> Result<Vec<Isometry>> {
        let mut out = Vec::with_capacity(self.relator.len());
        let mut acc = Isometry::identity(self.q());
        for &k in &self.relator {
            acc = acc.compose(&self.letter(k))?;
            let n = acc.matrix().norm() / (self.q() as f64 + 1.0).sqrt();
            acc = Isometry::new(acc.matrix() / C64::new(n, 0.0))?;
            out.push(acc.clone());
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct RepRepr {
    genus: usize,
    generators: Vec<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relator: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_q: Option<usize>,
}

impl SurfaceGroupRep {
    /// Parses `{genus, generators: [matrices], relator?, target_q?}`; when
    /// `target_q` exceeds the matrix size the representation is composed
    /// with the standard embedding.
    pub fn from_json(s: &str) -> Result<Self> {
        let r: RepRepr = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let generators = r
            .generators
            .iter()
            .map(|rows| Isometry::new(matrix_from_rows(rows)?))
            .collect::<Result<Vec<_>>>()?;
        let relator = r.relator.unwrap_or_else(|| standard_relator(r.genus));
        let rep = Self::with_relator(r.genus, generators, relator)?;
        match r.target_q {
            Some(q) if q > rep.q() => rep.extend(&EmbeddingMap::standard(rep.q(), q)?),
            Some(q) if q < rep.q() => Err(Error::InvalidInput(format!(
                "target_q = {q} is smaller than the generator dimension {}",
                rep.q()
            ))),
            _ => Ok(rep),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RepRepr {
            genus: self.genus,
            generators: self.generators.iter().map(|g| matrix_to_rows(g.matrix())).collect(),
            relator: Some(self.relator.clone()),
            target_q: Some(self.q()),
        })
        .expect("representation serializes")
    }
}

/// Toledo invariant with its quadrature error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToledoResult {
    pub value: f64,
    pub error_bound: f64,
    pub triangles: usize,
    pub genus: usize,
}

/// `i_rho` evaluated at the origin of the target.
pub fn toledo_surface_group(model: &HermitianModel, rep: &SurfaceGroupRep) -> Result<ToledoResult> {
    toledo_surface_group_at(model, rep, &model.origin())
}

/// `i_rho` evaluated with basepoint `x`; independent of `x` up to
/// quadrature error.
pub fn toledo_surface_group_at(model: &HermitianModel, rep: &SurfaceGroupRep, x: &ProjPoint) -> Result<ToledoResult> {
    if rep.q() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p() + 1,
            got: rep.q() + 1,
        });
    }
    if !x.is_interior() {
        return Err(Error::NotInterior);
    }
    let prefixes = rep.prefixes()?;
    let points = prefixes.iter().map(|g| g.apply(x)).collect::<Result<Vec<_>>>()?;
    // the last prefix is the relator, i.e. the identity: vertex 0 is x
    let n = points.len();
    let areas = (1..n - 1)
        .into_par_iter()
        .map(|k| model.triangle_area(&points[n - 1], &points[k - 1], &points[k]))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = areas.iter().map(|a| a.value).sum();
    let err: f64 = areas.iter().map(|a| a.error).sum();
    let norm = 2.0 * PI * (2.0 * rep.genus() as f64 - 2.0);
    Ok(ToledoResult {
        // the relator polygon is traversed clockwise for the Fuchsian group
        value: -total / norm,
        error_bound: err / norm + 1e-6,
        triangles: areas.len(),
        genus: rep.genus(),
    })
}

/// Milnor-Wood verdict: `|i_rho| <= rk' / rk` (up to the error bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilnorWood {
    pub holds: bool,
    /// `rk' / rk - |i_rho|`; zero for maximal representations.
    pub margin: f64,
}

pub fn milnor_wood_check(result: &ToledoResult, rk_source: usize, rk_target: usize) -> Result<MilnorWood> {
    if rk_source == 0 || rk_target == 0 {
        return Err(Error::InvalidInput("ranks must be at least 1".into()));
    }
    let bound = rk_target as f64 / rk_source as f64;
    let margin = bound - result.value.abs();
    Ok(MilnorWood {
        holds: margin >= -result.error_bound,
        margin,
    })
}
