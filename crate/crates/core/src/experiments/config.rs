use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::connfn::GSpec;
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::simulate::BuildMode;

fn default_max_order() -> usize {
    8
}

fn default_true() -> bool {
    true
}

/// Where a sweep writes its files. Unset paths are not written.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub trials: Option<PathBuf>,
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

/// A Monte Carlo sweep over `rho_list`.
///
/// ```json
/// {
///   "g": {"family": "unit_disk", "params": {"r0": 1.0}},
///   "model": "square",
///   "rho_list": [100, 1000],
///   "b": 0.0,
///   "trials": 200,
///   "base_seed": 1,
///   "mode": {"cell_list": {"tail_mass": 1e-6}},
///   "outputs": {"trials": "trials.jsonl", "summary": "summary.csv"}
/// }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub g: GSpec,
    pub model: ModelKind,
    pub rho_list: Vec<f64>,
    pub b: f64,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub mode: BuildMode,
    #[serde(default)]
    pub outputs: Outputs,
    /// Largest component order reported individually.
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    /// Torus model only: also thin each torus graph into a square graph and
    /// record `W_T`, `W_E`.
    #[serde(default)]
    pub coupling: bool,
    /// Pad width for the window model.
    #[serde(default)]
    pub margin: Option<f64>,
    /// Attach quadrature values (`E(W)`, `E(W^T)`) to each row.
    #[serde(default = "default_true")]
    pub quadrature: bool,
    /// When set, also estimate `E(ξ₂)` with this many Monte Carlo samples.
    #[serde(default)]
    pub components_samples: Option<usize>,
}

impl SweepConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(g: GSpec, model: ModelKind, rho_list: Vec<f64>, b: f64, trials: usize) -> Self {
        SweepConfig {
            g,
            model,
            rho_list,
            b,
            trials,
            base_seed: 0,
            mode: BuildMode::default(),
            outputs: Outputs::default(),
            max_order: default_max_order(),
            coupling: false,
            margin: None,
            quadrature: true,
            components_samples: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.rho_list.is_empty() {
            return bad("rho_list must not be empty".into());
        }
        if self.rho_list.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("rho_list entries must be positive and finite".into());
        }
        if self.rho_list.windows(2).any(|w| w[1] <= w[0]) {
            return bad("rho_list must be strictly increasing".into());
        }
        if !self.b.is_finite() {
            return bad("b must be finite".into());
        }
        if let BuildMode::CellList { tail_mass } = self.mode {
            if !(tail_mass > 0.0 && tail_mass < 1.0) {
                return bad(format!("tail_mass must lie in (0, 1), got {tail_mass}"));
            }
        }
        if self.coupling && self.model != ModelKind::Torus {
            return bad("coupling requires the torus model".into());
        }
        if self.max_order < 2 {
            return bad("max_order must be at least 2".into());
        }
        if let Some(m) = self.margin {
            if !(m >= 0.0 && m.is_finite()) {
                return bad("margin must be finite and non-negative".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"{
            "g": {"family": "unit_disk", "params": {"r0": 1.0}},
            "model": "square",
            "rho_list": [100, 1000],
            "b": 0.0,
            "trials": 200,
            "base_seed": 1,
            "mode": {"cell_list": {"tail_mass": 1e-6}},
            "outputs": {"trials": "trials.jsonl", "summary": "summary.csv"}
        }"#;
        let cfg = SweepConfig::from_json(text).unwrap();
        assert_eq!(cfg.model, ModelKind::FiniteSquare);
        assert_eq!(cfg.max_order, 8);
        assert!(cfg.quadrature);
        let exact = text.replace(r#"{"cell_list": {"tail_mass": 1e-6}}"#, r#""exact""#);
        assert_eq!(SweepConfig::from_json(&exact).unwrap().mode, BuildMode::Exact);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = SweepConfig::new(
            GSpec::UnitDisk { r0: 1.0 },
            ModelKind::FiniteSquare,
            vec![100.0, 1000.0],
            0.0,
            10,
        );
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.rho_list = vec![1000.0, 100.0];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base.clone();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.coupling = true;
        assert!(c.validate().is_err());
        assert!(SweepConfig::from_json(r#"{"g": {"family": "unit_disk", "params": {"r0": 1}}}"#).is_err());
        assert!(SweepConfig::from_json("{ not json").is_err());
    }
}
