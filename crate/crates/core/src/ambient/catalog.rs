//! Subtorus catalogs stored as JSON:
//! `{"n": 2, "lattice": [[…], …], "entries": [{"name", "basis", "offset"}]}`.
//!
//! `lattice` (optional, default standard) and `basis` list column vectors.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AffineSubtorus, HKTorus};
use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../catalogs/bundled.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub basis: Vec<Vec<f64>>,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Catalog {
    pub n: usize,
    #[serde(default)]
    pub lattice: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub entries: Vec<CatalogEntry>,
}

fn columns(dim: usize, vs: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    for v in vs {
        if v.len() != dim {
            return Err(Error::Invalid(format!(
                "{what}: vector of length {} in a space of dimension {dim}",
                v.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(dim, vs.len(), |i, j| vs[j][i]))
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self> {
        let c: Catalog = serde_json::from_str(text)?;
        if c.n == 0 {
            return Err(Error::Invalid("catalog n must be positive".into()));
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Catalog::parse(&std::fs::read_to_string(path)?)
    }

    /// The six-entry catalog in `ℍ²` shipped with the crate.
    pub fn bundled() -> Self {
        Catalog::parse(BUNDLED).expect("bundled catalog parses")
    }

    pub fn torus(&self) -> Result<HKTorus> {
        match &self.lattice {
            None => Ok(HKTorus::unit(self.n)),
            Some(cols) => HKTorus::with_lattice(self.n, columns(4 * self.n, cols, "lattice")?),
        }
    }

    pub fn subtorus(&self, entry: &CatalogEntry) -> Result<AffineSubtorus> {
        let torus = self.torus()?;
        let dim = torus.dim();
        let w = columns(dim, &entry.basis, &entry.name)?;
        let offset = match &entry.offset {
            None => DVector::zeros(dim),
            Some(o) if o.len() == dim => DVector::from_column_slice(o),
            Some(o) => {
                return Err(Error::Invalid(format!(
                    "{}: offset of length {} in dimension {dim}",
                    entry.name,
                    o.len()
                )))
            }
        };
        AffineSubtorus::new(&torus, w, offset)
    }

    pub fn find(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}
