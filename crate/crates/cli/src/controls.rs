//! JSON control files for d-dimensional kernels.
//!
//! ```json
//! {"dim": 2, "N": 2, "variant": "simple",
//!  "entries": [{"part": 0, "moves": [0, 1], "distance": 2, "value": [0.5, -1.0]}]}
//! {"dim": 2, "N": 2, "variant": "dual",
//!  "entries": [{"i": 0, "j": 1, "part": 0, "moves": [0, 1], "values": [0.0, 1.0], "sign": 1}]}
//! ```
//!
//! Entries on either path of a reflected pair set both.

use crate::CliError;
use lattice_kernel::kernel_nd::{DualIndexControls, SimpleIndexControls};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NdControlsFile {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(flatten)]
    pub body: NdBody,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", content = "entries", rename_all = "snake_case")]
pub enum NdBody {
    Simple(Vec<SimpleEntry>),
    Dual(Vec<DualEntry>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpleEntry {
    pub part: usize,
    pub moves: Vec<usize>,
    pub distance: usize,
    pub value: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualEntry {
    pub i: usize,
    pub j: usize,
    pub part: usize,
    pub moves: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(default = "plus_one")]
    pub sign: f64,
}

fn plus_one() -> f64 {
    1.0
}

pub enum NdControls {
    Simple(SimpleIndexControls),
    Dual(DualIndexControls),
}

impl NdControlsFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("`controls_file`: cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("`controls_file`: {e}")))
    }

    pub fn build(&self) -> Result<NdControls, CliError> {
        let bad = |e: lattice_kernel::Error| CliError::Validation(format!("`controls_file`: {e}"));
        match &self.body {
            NdBody::Simple(entries) => {
                let mut c = SimpleIndexControls::zeros(self.dim, self.n).map_err(bad)?;
                for e in entries {
                    let idx = c.family().find(e.part, &e.moves).ok_or_else(|| {
                        CliError::Validation(format!(
                            "`controls_file`: no path with part {} and moves {:?}",
                            e.part, e.moves
                        ))
                    })?;
                    c.set(idx, e.distance, &e.value).map_err(bad)?;
                }
                Ok(NdControls::Simple(c))
            }
            NdBody::Dual(entries) => {
                let mut c = DualIndexControls::zeros(self.dim, self.n).map_err(bad)?;
                for e in entries {
                    let idx = c.family().find(e.part, &e.moves).ok_or_else(|| {
                        CliError::Validation(format!(
                            "`controls_file`: no path with part {} and moves {:?}",
                            e.part, e.moves
                        ))
                    })?;
                    c.set_path(e.i, e.j, idx, &e.values, e.sign).map_err(bad)?;
                }
                c.validate().map_err(bad)?;
                Ok(NdControls::Dual(c))
            }
        }
    }
}
