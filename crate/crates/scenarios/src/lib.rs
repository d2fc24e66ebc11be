//! Deterministic generators for a handful of reference mappings, each paired
//! with the quantities it is expected to produce.
//!
//! | name        | mapping                                                  |
//! |-------------|----------------------------------------------------------|
//! | `identity`  | identity of the unit square                              |
//! | `scaling`   | `x -> c x`                                               |
//! | `constant`  | a single image point                                     |
//! | `strips`    | alternating reflected vertical strips accumulating at 0  |
//! | `dirac`     | `x -> lambda((0, x2])` with point masses in `lambda`     |
//! | `separable` | `(x1, x2) -> (x1, int_0^x2 g)` with `g = 1 + s^(-1/3)`   |
//! | `jumpset`   | Hölder cusps along vertical segments                     |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use mapping_numbers::{MappingError, MappingFile, RadiusSchedule, RadonWeight, SampledMapping};
use regularity_certify::{CertifyConfig, CertifyError, Theorem};
use serde::{Deserialize, Serialize};
use space_core::{MetricMeasureSpace, SpaceError};

mod expect;
mod generate;
mod reproduce;

pub use expect::{Basis, Comparator, Expectation, Quantity};
pub use generate::{generate, strip_jump, Params};
pub use reproduce::{dirac_line_growth, measure, reproduce, Cache, CheckOutcome, Report};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?}")]
    Unknown(String),
    #[error("resolution {resolution} is too coarse for {strips} strips")]
    TooCoarse { resolution: f64, strips: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    Identity,
    Scaling,
    Constant,
    Strips,
    Dirac,
    Separable,
    Jumpset,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::Identity,
        ScenarioName::Scaling,
        ScenarioName::Constant,
        ScenarioName::Strips,
        ScenarioName::Dirac,
        ScenarioName::Separable,
        ScenarioName::Jumpset,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ScenarioName::Identity => "identity",
            ScenarioName::Scaling => "scaling",
            ScenarioName::Constant => "constant",
            ScenarioName::Strips => "strips",
            ScenarioName::Dirac => "dirac",
            ScenarioName::Separable => "separable",
            ScenarioName::Jumpset => "jumpset",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ScenarioName {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.id() == s)
            .ok_or_else(|| ScenarioError::Unknown(s.to_string()))
    }
}

/// How the pointwise fields of a scenario are evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSetup {
    /// decreasing radii
    pub radii: Vec<f64>,
    pub tail: usize,
    /// ball enlargement of the weighted numbers
    pub spread: f64,
    pub q: f64,
    /// evaluate every `stride`-th interior point
    pub stride: usize,
}

impl FieldSetup {
    pub fn schedule(&self) -> Result<RadiusSchedule> {
        Ok(RadiusSchedule::new(self.radii.clone(), self.tail)?)
    }
}

/// A generated mapping together with everything needed to analyse it.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: ScenarioName,
    pub params: Params,
    pub mapping: SampledMapping,
    /// `kappa` for the BV route, `a mu` for the Sobolev routes
    pub weight: RadonWeight,
    pub fields: FieldSetup,
    /// one certificate run per theorem the scenario exercises
    pub runs: Vec<CertifyConfig>,
    pub expectations: Vec<Expectation>,
    pub notes: Vec<String>,
}

/// Serializable description of a scenario without the sampled data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub name: ScenarioName,
    pub params: Params,
    pub domain_points: usize,
    pub target_points: usize,
    pub fields: FieldSetup,
    pub runs: Vec<CertifyConfig>,
    pub expectations: Vec<Expectation>,
    pub notes: Vec<String>,
}

impl Scenario {
    pub fn domain(&self) -> &MetricMeasureSpace {
        self.mapping.domain()
    }

    pub fn domain_arc(&self) -> &Arc<MetricMeasureSpace> {
        self.mapping.domain_arc()
    }

    pub fn run(&self, theorem: Theorem) -> Option<&CertifyConfig> {
        self.runs.iter().find(|c| c.theorem == theorem)
    }

    pub fn manifest(&self) -> ScenarioManifest {
        ScenarioManifest {
            name: self.name,
            params: self.params.clone(),
            domain_points: self.domain().len(),
            target_points: self.mapping.target().len(),
            fields: self.fields.clone(),
            runs: self.runs.clone(),
            expectations: self.expectations.clone(),
            notes: self.notes.clone(),
        }
    }

    /// Writes `domain.json`, `target.json`, `mapping.json`, `weight.json`
    /// and `scenario.json` into `dir`.
    pub fn write_assets(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let paths: Vec<PathBuf> = ["domain", "target", "mapping", "weight", "scenario"]
            .iter()
            .map(|n| dir.join(format!("{n}.json")))
            .collect();
        space_core::io::save(self.domain(), &paths[0])?;
        space_core::io::save(self.mapping.target(), &paths[1])?;
        std::fs::write(
            &paths[2],
            serde_json::to_string(&MappingFile::from_mapping(&self.mapping))?,
        )?;
        std::fs::write(&paths[3], serde_json::to_string(&self.weight)?)?;
        std::fs::write(&paths[4], serde_json::to_string_pretty(&self.manifest())?)?;
        Ok(paths)
    }
}
