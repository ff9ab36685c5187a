//! Run configuration: one JSON document, every field defaulted.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::extension::LambdaParams;
use crate::quadform::LimitParams;
use crate::radial::{GridParams, RadialGrid};
use crate::sphere::{AngularQuadrature, PolarConvention};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub gram: f64,
    pub laplacian: f64,
    pub eigen_residual: f64,
    pub discrete: f64,
    pub divergence: f64,
    pub kappa_affinity: f64,
    pub fock: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gram: 1e-9,
            laplacian: 1e-6,
            eigen_residual: 1e-7,
            discrete: 1e-8,
            divergence: 1e-6,
            kappa_affinity: 1e-4,
            fock: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockConfig {
    /// Continuous mode frequencies.
    pub lambdas: Vec<f64>,
    /// One discrete mode per entry; every entry must be negative.
    pub discrete_kappas: Vec<f64>,
    pub max_degree: usize,
    /// Random states used for the commutator check.
    pub random_states: usize,
    pub random_degree: usize,
    pub seed: u64,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig {
            lambdas: vec![0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.0],
            discrete_kappas: vec![-2.0],
            max_degree: 8,
            random_states: 8,
            random_degree: 4,
            seed: 20_240_917,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// Smooth transverse field with `u'(0) = 0`.
    Regular,
    /// l = 1 field behaving like `A_0/|x|` at the origin.
    Singular,
    /// Gradient of a scalar potential.
    Longitudinal,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: FieldKind,
    /// Direction of the l = 1 `u` content.
    pub direction: [f64; 3],
    /// Direction of the l = 1 `w` content (regular fields only).
    pub twist: [f64; 3],
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            kind: FieldKind::Regular,
            direction: [0.0, 0.6, 0.8],
            twist: [0.5, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub grid: GridParams,
    pub l_max: usize,
    /// Gauss–Legendre order in `cos θ`; `null` selects `l_max + 2`.
    pub quadrature_order: Option<usize>,
    pub kappas: Vec<f64>,
    pub lambda: LambdaParams,
    /// Frequencies listed by `spectrum`.
    pub spectrum_lambdas: Vec<f64>,
    pub limit: LimitParams,
    pub tolerances: Tolerances,
    pub fock: FockConfig,
    pub field: FieldConfig,
    /// Meaning of the `psi` column in field files.
    pub angle_convention: PolarConvention,
    pub execution: Execution,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            grid: GridParams::default(),
            l_max: 4,
            quadrature_order: None,
            kappas: vec![1.0, -1.0],
            lambda: LambdaParams::default(),
            spectrum_lambdas: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            limit: LimitParams::default(),
            tolerances: Tolerances::default(),
            fock: FockConfig::default(),
            field: FieldConfig::default(),
            angle_convention: PolarConvention::Colatitude,
            execution: Execution::Parallel,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.kappas.is_empty() {
            return Err(Error::Config("the κ list must not be empty".into()));
        }
        if self.kappas.iter().any(|k| !k.is_finite()) {
            return Err(Error::Config("κ values must be finite".into()));
        }
        let t = &self.tolerances;
        let all = [t.gram, t.laplacian, t.eigen_residual, t.discrete, t.divergence, t.kappa_affinity, t.fock];
        if all.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Config("all tolerances must be positive".into()));
        }
        if self.spectrum_lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Config("spectrum frequencies must be positive".into()));
        }
        if self.lambda.count == 0 {
            return Err(Error::Config("λ grid needs at least one node".into()));
        }
        Ok(())
    }

    pub fn radial_grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::mapped(&self.grid)?))
    }

    pub fn quadrature(&self) -> Result<Arc<AngularQuadrature>> {
        Ok(Arc::new(match self.quadrature_order {
            None => AngularQuadrature::for_l_max(self.l_max),
            Some(o) => AngularQuadrature::with_order(o)?,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"l_max": 2, "grid": {"nodes": 512}}"#).unwrap();
        assert_eq!(cfg.l_max, 2);
        assert_eq!(cfg.grid.nodes, 512);
        assert_eq!(cfg.grid.r_max, 40.0);
        assert!(serde_json::from_str::<RunConfig>(r#"{"lmax": 2}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig { kappas: vec![], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.kappas = vec![1.0];
        cfg.tolerances.gram = 0.0;
        assert!(cfg.validate().is_err());
    }
}
