use std::path::{Path, PathBuf};

use curves_modulus::SolverBudget;
use mapping_numbers::FieldKind;
use regularity_certify::{CertifyConfig, Theorem};
use serde::Deserialize;

use crate::error::CliError;

/// Everything a run can be configured with. Every section is optional; the
/// flags of each subcommand override the file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Inputs,
    /// output directory
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fields: FieldsSection,
    pub modulus: ModulusSection,
    pub hausdorff: HausdorffSection,
    pub certify: CertifyConfig,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub domain: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub weight: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldsSection {
    pub kinds: Vec<String>,
    pub radii: Vec<f64>,
    pub tail: usize,
    pub spread: f64,
    pub q: Option<f64>,
    pub stride: usize,
}

impl Default for FieldsSection {
    fn default() -> Self {
        Self {
            kinds: vec!["Lip".into(), "H".into()],
            radii: vec![0.08, 0.04, 0.02],
            tail: 2,
            spread: 1.0,
            q: None,
            stride: 1,
        }
    }
}

impl FieldsSection {
    pub fn parsed_kinds(&self) -> Result<Vec<FieldKind>, CliError> {
        if self.kinds.is_empty() {
            return Err(CliError::Parameter("no field kinds requested".into()));
        }
        let mut out: Vec<FieldKind> = Vec::with_capacity(self.kinds.len());
        for k in &self.kinds {
            let kind: FieldKind = k.parse().map_err(|e| CliError::Parameter(format!("{e}")))?;
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulusSection {
    pub p: f64,
    /// straight curves along this coordinate axis
    pub axis: Option<usize>,
    /// JSON list of curves, each a list of point indices
    pub curves: Option<PathBuf>,
    pub threshold: f64,
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub time_limit_secs: Option<f64>,
}

impl Default for ModulusSection {
    fn default() -> Self {
        let budget = SolverBudget::default();
        Self {
            p: 2.0,
            axis: None,
            curves: None,
            threshold: 1.0,
            max_sweeps: budget.max_sweeps,
            tolerance: budget.tolerance,
            time_limit_secs: None,
        }
    }
}

impl ModulusSection {
    pub fn budget(&self) -> SolverBudget {
        SolverBudget {
            max_sweeps: self.max_sweeps,
            tolerance: self.tolerance,
            time_limit_secs: self.time_limit_secs,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HausdorffSection {
    /// JSON list of point indices
    pub set: Option<PathBuf>,
    /// closed box selecting the set, used when `set` is absent
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    /// exponent of `mu(B) / r^p`
    pub codimension: Option<f64>,
    /// exponent of `(2r)^s`
    pub dimension: Option<f64>,
    pub cap: Option<f64>,
    pub effort: usize,
}

impl RunConfig {
    /// Reads a TOML file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        rebase(&mut config.input.domain);
        rebase(&mut config.input.target);
        rebase(&mut config.input.mapping);
        rebase(&mut config.input.weight);
        rebase(&mut config.output);
        rebase(&mut config.modulus.curves);
        rebase(&mut config.hausdorff.set);
        Ok(config)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Parameter(msg()))
    }
}

pub fn validate_fields(f: &FieldsSection) -> Result<(), CliError> {
    check(f.spread >= 1.0, || format!("M = {} must be at least 1", f.spread))?;
    if let Some(q) = f.q {
        check(q > 1.0, || format!("Q = {q} must exceed 1"))?;
    }
    check(
        !f.radii.is_empty() && f.radii.iter().all(|r| *r > 0.0 && r.is_finite()),
        || format!("radii {:?} must be positive", f.radii),
    )?;
    check(f.radii.windows(2).all(|w| w[0] > w[1]), || {
        format!("radii {:?} must decrease", f.radii)
    })?;
    check(f.tail >= 1 && f.tail <= f.radii.len(), || {
        format!("tail {} with {} radii", f.tail, f.radii.len())
    })?;
    check(f.stride >= 1, || "stride must be at least 1".into())
}

pub fn validate_certify(c: &CertifyConfig) -> Result<(), CliError> {
    check(c.spread >= 1.0, || format!("M = {} must be at least 1", c.spread))?;
    check(c.q > 1.0, || format!("Q = {} must exceed 1", c.q))?;
    check(c.epsilon > 0.0 && c.epsilon <= 1.0, || {
        format!("epsilon = {} must lie in (0, 1]", c.epsilon)
    })?;
    if c.theorem != Theorem::Bv && c.theorem != Theorem::SobolevCritical {
        check(c.p >= 1.0 && c.p <= c.q, || {
            format!("p = {} must lie in [1, Q = {}]", c.p, c.q)
        })?;
    }
    if let Some(beta) = c.beta {
        check(beta > 0.0, || format!("beta = {beta} must be positive"))?;
    }
    check(!c.levels.is_empty(), || "no levels".into())
}

pub fn validate_modulus(m: &ModulusSection) -> Result<(), CliError> {
    check(m.p >= 1.0 && m.p.is_finite(), || format!("p = {} must be at least 1", m.p))?;
    check(m.threshold > 0.0, || format!("threshold {} must be positive", m.threshold))?;
    check(m.tolerance > 0.0, || format!("tolerance {} must be positive", m.tolerance))?;
    check(m.axis.is_some() != m.curves.is_some(), || {
        "give exactly one of an axis or a curve file".into()
    })
}

pub fn validate_hausdorff(h: &HausdorffSection) -> Result<(), CliError> {
    check(h.codimension.is_some() != h.dimension.is_some(), || {
        "give exactly one of codimension and dimension".into()
    })?;
    check(h.set.is_some() || (h.lo.is_some() && h.hi.is_some()), || {
        "give a set file or a box".into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse_with_defaults() {
        let c: RunConfig = toml::from_str(
            r#"
            seed = 7
            [input]
            domain = "d.json"
            [fields]
            kinds = ["Lip_generalized"]
            spread = 2.0
            [certify]
            theorem = "sobolev-lip"
            p = 1.5
            levels = [8, 16]
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.fields.radii, vec![0.08, 0.04, 0.02]);
        assert_eq!(c.fields.parsed_kinds().unwrap(), vec![FieldKind::WeightedLip]);
        assert_eq!(c.certify.theorem, Theorem::SobolevLip);
        assert_eq!(c.certify.levels, vec![8, 16]);
        assert!(validate_certify(&c.certify).is_ok());
        assert!(toml::from_str::<RunConfig>("[fields]\nkind = [\"Lip\"]").is_err());
    }

    #[test]
    fn ranges_are_enforced() {
        let mut c = CertifyConfig::default();
        c.epsilon = 0.0;
        assert!(matches!(validate_certify(&c), Err(CliError::Parameter(_))));
        c.epsilon = 1.0;
        c.theorem = Theorem::SobolevLip;
        c.p = 3.0;
        assert!(validate_certify(&c).is_err());
        let f = FieldsSection {
            radii: vec![0.02, 0.04],
            ..FieldsSection::default()
        };
        assert!(validate_fields(&f).is_err());
        let m = ModulusSection {
            p: 0.5,
            axis: Some(0),
            ..ModulusSection::default()
        };
        assert!(validate_modulus(&m).is_err());
    }
}
