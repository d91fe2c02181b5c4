//! JSON group-spec files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "tolerances": { "unitary": 1e-8 },
//!   "generators": [
//!     { "name": "A", "matrix": [[[1.25, 0], [0.75, 0], [0, 0]], ...] }
//!   ]
//! }
//! ```

use std::path::Path;

use cheq_core::isometry::{make_element, GroupElement, GroupSpec};
use cheq_core::linalg::{ComplexMatrix, C64};
use cheq_core::Tolerances;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub unitary: Option<f64>,
    pub rank: Option<f64>,
    pub null: Option<f64>,
    pub class: Option<f64>,
    pub fix: Option<f64>,
    pub eig: Option<f64>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            unitary: self.unitary.unwrap_or(d.unitary),
            rank: self.rank.unwrap_or(d.rank),
            null: self.null.unwrap_or(d.null),
            class: self.class.unwrap_or(d.class),
            fix: self.fix.unwrap_or(d.fix),
            eig: self.eig.unwrap_or(d.eig),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub name: String,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupSpecFile {
    pub n: usize,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub generators: Vec<GeneratorEntry>,
}

impl GroupSpecFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|message| CliError::Parse {
            path: path.display().to_string(),
            message,
        })
    }

    /// Parses and checks dimensions; generator validation is separate.
    pub fn parse(text: &str) -> Result<Self, String> {
        let file: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if file.n < 1 {
            return Err("n must be at least 1".into());
        }
        let d = file.n + 1;
        for g in &file.generators {
            if g.matrix.len() != d || g.matrix.iter().any(|r| r.len() != d) {
                return Err(format!(
                    "generator {}: matrix must be {d}x{d} for n = {}",
                    g.name, file.n
                ));
            }
        }
        Ok(file)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.resolve()
    }

    /// Validates one generator, normalizing its lift.
    pub fn element(&self, index: usize) -> Result<GroupElement, CliError> {
        let entry = &self.generators[index];
        let rows: Vec<Vec<C64>> = entry
            .matrix
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        let m = ComplexMatrix::from_rows(&rows)?;
        make_element(&m, &self.tolerances()).map_err(|source| CliError::Validation {
            name: entry.name.clone(),
            source,
        })
    }

    pub fn group(&self) -> Result<GroupSpec, CliError> {
        let gens = (0..self.generators.len())
            .map(|i| Ok((self.generators[i].name.clone(), self.element(i)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(GroupSpec::new(self.n, gens, self.tolerances())?)
    }
}

pub fn load_group(path: &Path) -> Result<(GroupSpecFile, GroupSpec), CliError> {
    let file = GroupSpecFile::read(path)?;
    let group = file.group()?;
    Ok((file, group))
}
