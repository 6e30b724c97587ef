//! Input file schemas and loading. All inputs are UTF-8 JSON; every file is
//! parsed and validated before any computation starts.

use std::path::Path;

use serde::Deserialize;

use mrb::{Body64, RigidBody, Skew64, SkewMatrix};

use crate::CliError;

/// A direction in `so(n)`: either the coordinate form
/// `{"n": 3, "coords": [...]}` or a full matrix (bare rows or keyed as
/// `{"matrix": [[...]]}`). Full matrices are reduced to their skew part on
/// ingest.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SkewJson {
    Coords { n: usize, coords: Vec<f64> },
    Matrix { matrix: Vec<Vec<f64>> },
    Bare(Vec<Vec<f64>>),
}

impl SkewJson {
    pub fn to_skew(&self) -> Result<Skew64, CliError> {
        match self {
            SkewJson::Coords { n, coords } => {
                SkewMatrix::from_coords(*n, coords).map_err(CliError::from)
            }
            SkewJson::Matrix { matrix } => matrix_to_skew(matrix),
            SkewJson::Bare(rows) => matrix_to_skew(rows),
        }
    }
}

fn matrix_to_skew(rows: &[Vec<f64>]) -> Result<Skew64, CliError> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::input(format!(
                "matrix row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    SkewMatrix::from_matrix(&mat).map_err(CliError::from)
}

/// Body description: `{"eigenvalues": [...]}` (diagonal, frame = identity)
/// or `{"C": [[...]]}` row-major.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BodyJson {
    Eigenvalues { eigenvalues: Vec<f64> },
    Full {
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
    },
}

impl BodyJson {
    pub fn to_body(&self) -> Result<Body64, CliError> {
        match self {
            BodyJson::Eigenvalues { eigenvalues } => {
                RigidBody::from_eigenvalues(eigenvalues).map_err(CliError::from)
            }
            BodyJson::Full { c } => {
                let n = c.len();
                for (i, row) in c.iter().enumerate() {
                    if row.len() != n {
                        return Err(CliError::input(format!(
                            "inertia matrix row {i} has {} entries, expected {n}",
                            row.len()
                        )));
                    }
                }
                let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| c[i][j]);
                RigidBody::new(&mat).map_err(CliError::from)
            }
        }
    }
}

/// Seed entry for `saturate`: a bare direction, or a direction with a
/// steadiness claim for the constrained variant.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SeedJson {
    Flagged {
        direction: SkewJson,
        #[serde(default)]
        steady: bool,
    },
    Plain(SkewJson),
}

impl SeedJson {
    pub fn to_seed(&self) -> Result<(Skew64, bool), CliError> {
        match self {
            SeedJson::Flagged { direction, steady } => Ok((direction.to_skew()?, *steady)),
            SeedJson::Plain(direction) => Ok((direction.to_skew()?, false)),
        }
    }
}

/// Control schedule for `simulate`: the controlled directions and one row
/// of control values per segment.
#[derive(Debug, Deserialize)]
pub struct ScheduleJson {
    pub directions: Vec<SkewJson>,
    pub values: Vec<Vec<f64>>,
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::input(format!(
            "malformed JSON in {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn load_skew(path: &Path) -> Result<Skew64, CliError> {
    load::<SkewJson>(path)?.to_skew()
}

pub fn load_body(path: &Path) -> Result<Body64, CliError> {
    load::<BodyJson>(path)?.to_body()
}

pub fn load_directions(path: &Path) -> Result<Vec<Skew64>, CliError> {
    let entries: Vec<SkewJson> = load(path)?;
    if entries.is_empty() {
        return Err(CliError::input(format!("{} contains no directions", path.display())));
    }
    entries.iter().map(SkewJson::to_skew).collect()
}

pub fn load_seeds(path: &Path) -> Result<(Vec<Skew64>, Vec<bool>), CliError> {
    let entries: Vec<SeedJson> = load(path)?;
    if entries.is_empty() {
        return Err(CliError::input(format!("{} contains no seeds", path.display())));
    }
    let mut seeds = Vec::with_capacity(entries.len());
    let mut flags = Vec::with_capacity(entries.len());
    for e in &entries {
        let (s, f) = e.to_seed()?;
        seeds.push(s);
        flags.push(f);
    }
    Ok((seeds, flags))
}
