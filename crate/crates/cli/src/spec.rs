//! Experiment specification files.

use std::path::{Path, PathBuf};

use limabean::density::KSteps;
use limabean::ensembles::Discretization;
use limabean::walk::WalkConfig;
use limabean::{Complex64, InitialLaw, SingularLaw, StepLaw};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SampleEsd,
    DensityGrid,
    Domain,
    Compare,
    WzConvergence,
    SigmaMin,
    K2Oracle,
    Limabean,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::SampleEsd => "sample-esd",
            Command::DensityGrid => "density-grid",
            Command::Domain => "domain",
            Command::Compare => "compare",
            Command::WzConvergence => "wz-convergence",
            Command::SigmaMin => "sigma-min",
            Command::K2Oracle => "k2-oracle",
            Command::Limabean => "limabean",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfinityTag {
    Infinity,
}

/// Step count: an integer or the string `"infinity"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Finite(u32),
    Infinite(InfinityTag),
}

impl KSpec {
    pub fn steps(self) -> KSteps {
        match self {
            KSpec::Finite(k) => KSteps::Finite(k),
            KSpec::Infinite(_) => KSteps::Infinity,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            KSpec::Finite(k) => Some(k),
            KSpec::Infinite(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepLawSpec {
    Haar,
    Circular,
    /// `(singular value, weight)` pairs with unit second moment.
    Atomic(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialLawSpec {
    Trivial,
    /// `(angle, weight)` pairs.
    Atoms(Vec<(f64, f64)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscretizationSpec {
    MidpointQuantile,
    Iid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSpec {
    pub n: usize,
    pub k: KSpec,
    pub t: f64,
    pub step_law: StepLawSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_law: Option<InitialLawSpec>,
    pub seed: u64,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<DiscretizationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub esd: PathBuf,
    pub density: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outside: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_w1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WzSpec {
    pub p: f64,
    pub meshes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_bounds: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub format_version: u32,
    pub command: Command,
    pub walk: WalkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Shift point `(re, im)` for `sigma-min`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wz: Option<WzSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("spec: {e}")))?;
        if spec.format_version != FORMAT_VERSION {
            return Err(CliError::Invalid(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                spec.format_version
            )));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Pretty JSON with a trailing newline, the layout of shipped spec files.
    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    pub fn step_law(&self) -> Result<StepLaw, CliError> {
        Ok(match &self.walk.step_law {
            StepLawSpec::Haar => StepLaw::Haar,
            StepLawSpec::Circular => StepLaw::Circular,
            StepLawSpec::Atomic(atoms) => StepLaw::atomic(SingularLaw::new(atoms.clone())?)?,
        })
    }

    pub fn initial_law(&self) -> Result<InitialLaw, CliError> {
        Ok(match &self.walk.initial_law {
            None | Some(InitialLawSpec::Trivial) => InitialLaw::trivial(),
            Some(InitialLawSpec::Atoms(atoms)) => InitialLaw::new(atoms.clone())?,
        })
    }

    pub fn finite_k(&self) -> Result<u32, CliError> {
        self.walk
            .k
            .finite()
            .ok_or_else(|| CliError::Invalid(format!("{} needs a finite k", self.command.as_str())))
    }

    pub fn walk_config(&self) -> Result<WalkConfig, CliError> {
        let mut cfg = WalkConfig::new(self.walk.n, self.finite_k()?, self.walk.t, self.step_law()?);
        cfg.initial = self.initial_law()?;
        cfg.seed = self.walk.seed;
        cfg.trials = self.walk.trials;
        cfg.discretization = match self.walk.discretization {
            None | Some(DiscretizationSpec::MidpointQuantile) => Discretization::MidpointQuantile,
            Some(DiscretizationSpec::Iid) => Discretization::Iid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolution(&self, default: usize) -> usize {
        self.grid.as_ref().map_or(default, |g| g.resolution)
    }

    pub fn shift(&self) -> Result<Complex64, CliError> {
        self.z
            .map(|(re, im)| Complex64::new(re, im))
            .ok_or_else(|| CliError::Invalid("sigma-min needs a shift point `z`".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_accepts_numbers_and_infinity() {
        let k: KSpec = serde_json::from_str("6").unwrap();
        assert_eq!(k.finite(), Some(6));
        let k: KSpec = serde_json::from_str("\"infinity\"").unwrap();
        assert_eq!(k.steps(), KSteps::Infinity);
        assert_eq!(serde_json::to_string(&k).unwrap(), "\"infinity\"");
        assert!(serde_json::from_str::<KSpec>("\"forever\"").is_err());
    }

    #[test]
    fn rejects_other_format_versions() {
        let text = r#"{"format_version": 2, "command": "domain",
            "walk": {"n": 1, "k": 2, "t": 1.0, "step_law": "haar", "seed": 0, "trials": 1}}"#;
        assert!(matches!(ExperimentSpec::parse(text), Err(CliError::Invalid(_))));
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = r#"{"format_version": 1, "command": "domain", "colour": 1,
            "walk": {"n": 1, "k": 2, "t": 1.0, "step_law": "haar", "seed": 0, "trials": 1}}"#;
        assert!(ExperimentSpec::parse(text).is_err());
    }

    #[test]
    fn atomic_laws_are_checked() {
        let text = r#"{"format_version": 1, "command": "domain",
            "walk": {"n": 1, "k": 2, "t": 1.0, "step_law": {"atomic": [[0.5, 1.0]]}, "seed": 0, "trials": 1}}"#;
        let spec = ExperimentSpec::parse(text).unwrap();
        assert!(spec.step_law().is_err());
    }
}
