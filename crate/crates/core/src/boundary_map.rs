//! Maps between boundaries, `∂H_C^p -> ∂H_C^q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{projective_distance, ProjPoint};
use crate::isometry::{EmbeddingMap, Isometry};

/// A boundary map: either the boundary extension of an embedding (possibly
/// followed by complex conjugation), a constant, or a finite sample table
/// completed by nearest neighbours.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryMap {
    Embedding {
        map: EmbeddingMap,
        /// Post-compose with `z -> conj(z)`.
        conjugate: bool,
    },
    Constant {
        p: usize,
        value: ProjPoint,
    },
    Table {
        pairs: Vec<(ProjPoint, ProjPoint)>,
    },
}

impl BoundaryMap {
    pub fn standard(p: usize, q: usize) -> Result<Self> {
        Ok(Self::Embedding {
            map: EmbeddingMap::standard(p, q)?,
            conjugate: false,
        })
    }

    pub fn embedding(map: EmbeddingMap) -> Self {
        Self::Embedding { map, conjugate: false }
    }

    pub fn constant(p: usize, value: ProjPoint) -> Result<Self> {
        if !value.is_boundary() {
            return Err(Error::NotBoundary);
        }
        Ok(Self::Constant { p, value })
    }

    pub fn table(pairs: Vec<(ProjPoint, ProjPoint)>) -> Result<Self> {
        let Some(first) = pairs.first() else {
            return Err(Error::InvalidInput("empty sample table".into()));
        };
        let (p, q) = (first.0.p(), first.1.p());
        for (a, b) in &pairs {
            if !a.is_boundary() || !b.is_boundary() {
                return Err(Error::NotBoundary);
            }
            if a.p() != p || b.p() != q {
                return Err(Error::DimensionMismatch {
                    expected: p + 1,
                    got: a.p() + 1,
                });
            }
        }
        Ok(Self::Table { pairs })
    }

    /// Composes with complex conjugation of the target.
    pub fn conjugated(&self) -> Self {
        match self {
            Self::Embedding { map, conjugate } => Self::Embedding {
                map: map.clone(),
                conjugate: !conjugate,
            },
            Self::Constant { p, value } => Self::Constant {
                p: *p,
                value: value.conj(),
            },
            Self::Table { pairs } => Self::Table {
                pairs: pairs.iter().map(|(a, b)| (a.clone(), b.conj())).collect(),
            },
        }
    }

    /// Post-composes with an isometry of the target.
    pub fn then(&self, g: &Isometry) -> Result<Self> {
        match self {
            Self::Embedding { map, conjugate } => {
                // conj(g W xi) = conj(g) conj(W xi)
                let g = if *conjugate { g.conj() } else { g.clone() };
                Ok(Self::Embedding {
                    map: map.then(&g)?,
                    conjugate: *conjugate,
                })
            }
            Self::Constant { p, value } => Ok(Self::Constant {
                p: *p,
                value: g.apply(value)?,
            }),
            Self::Table { pairs } => Ok(Self::Table {
                pairs: pairs
                    .iter()
                    .map(|(a, b)| Ok((a.clone(), g.apply(b)?)))
                    .collect::<Result<_>>()?,
            }),
        }
    }

    pub fn p(&self) -> usize {
        match self {
            Self::Embedding { map, .. } => map.p(),
            Self::Constant { p, .. } => *p,
            Self::Table { pairs } => pairs[0].0.p(),
        }
    }

    pub fn q(&self) -> usize {
        match self {
            Self::Embedding { map, .. } => map.q(),
            Self::Constant { value, .. } => value.p(),
            Self::Table { pairs } => pairs[0].1.p(),
        }
    }

    /// Whether the map is the boundary of an embedding (closed form).
    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Self::Table { .. })
    }

    pub fn apply(&self, xi: &ProjPoint) -> Result<ProjPoint> {
        if !xi.is_boundary() {
            return Err(Error::NotBoundary);
        }
        if xi.p() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p() + 1,
                got: xi.p() + 1,
            });
        }
        match self {
            Self::Embedding { map, conjugate } => {
                let y = map.apply(xi)?;
                Ok(if *conjugate { y.conj() } else { y })
            }
            Self::Constant { value, .. } => Ok(value.clone()),
            Self::Table { pairs } => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, (a, _)) in pairs.iter().enumerate() {
                    let d = projective_distance(a.lift(), xi.lift());
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                Ok(pairs[best].1.clone())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    source: ProjPoint,
    target: ProjPoint,
}

/// JSON form of a sample table: a list of `{source, target}` objects.
pub fn table_from_json(s: &str) -> Result<BoundaryMap> {
    let pairs: Vec<PairRepr> = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
    BoundaryMap::table(pairs.into_iter().map(|p| (p.source, p.target)).collect())
}

pub fn table_to_json(pairs: &[(ProjPoint, ProjPoint)]) -> String {
    let v: Vec<PairRepr> = pairs
        .iter()
        .map(|(a, b)| PairRepr {
            source: a.clone(),
            target: b.clone(),
        })
        .collect();
    serde_json::to_string(&v).expect("points serialize")
}
