use std::fs;
use std::path::Path;

use chaingeo::hermitian::{CVector, ProjPoint, C64};
use serde::Deserialize;

use crate::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A point given either in the library's tagged form, as a bare lift
/// `[[re, im], ...]`, or by ball coordinates `{"ball": [[re, im], ...]}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PointInput {
    Tagged(ProjPoint),
    Lift(Vec<[f64; 2]>),
    Ball { ball: Vec<[f64; 2]> },
}

fn complexes(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|c| C64::new(c[0], c[1])).collect()
}

impl PointInput {
    pub fn into_point(self) -> Result<ProjPoint, CliError> {
        Ok(match self {
            PointInput::Tagged(p) => p,
            PointInput::Lift(v) => {
                let v = complexes(&v);
                ProjPoint::from_lift(CVector::from_vec(v))?
            }
            PointInput::Ball { ball } => ProjPoint::from_ball(&complexes(&ball))?,
        })
    }
}

pub fn parse_json<'a, T: Deserialize<'a>>(what: &str, s: &'a str) -> Result<T, CliError> {
    serde_json::from_str(s).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

/// Converts parsed points, checking that they live in dimension `p`.
pub fn points(raw: Vec<PointInput>, p: usize) -> Result<Vec<ProjPoint>, CliError> {
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let x = r.into_point()?;
            if x.p() != p {
                return Err(CliError::Input(format!(
                    "point {i} has {} homogeneous coordinates, expected {}",
                    x.p() + 1,
                    p + 1
                )));
            }
            Ok(x)
        })
        .collect()
}
