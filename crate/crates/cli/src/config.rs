//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zoo_opt::function_space::{
    make_cubic_perturbed, make_hard_instance_product, make_quadratic, FunctionClassParams, HardSign, Quadratic,
};
use zoo_opt::spectral::SymmetricMatrix;
use zoo_opt::verification::{ConcentrationKind, SweepFamily};
use zoo_opt::{NoiseModel, Objective, Point};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Optimize,
    Verify,
    RegretSweep,
    AuditLowerBound,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Optimize => "optimize",
            Self::Verify => "verify",
            Self::RegretSweep => "regret_sweep",
            Self::AuditLowerBound => "audit_lower_bound",
        }
    }
}

/// Objective family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `1/2 x^T A x + b^T x`.
    Quadratic {
        params: FunctionClassParams,
        #[serde(rename = "A")]
        a: SymmetricMatrix,
        b: Vec<f64>,
    },
    /// Fixed tridiagonal quadratic with minimizer at half the radius.
    BenchmarkQuadratic { params: FunctionClassParams, d: usize },
    /// `(M/2)||x||^2 + (rho/6) sum x_i^3`; only valid for estimator checks.
    CubicPerturbed { rho: f64, curvature: f64, d: usize },
    /// Product hard instance for budget `T`; one sign (1 or 2) per coordinate.
    HardInstance {
        params: FunctionClassParams,
        signs: Vec<HardSign>,
        #[serde(rename = "T")]
        t: u64,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Box<dyn Objective>, CliError> {
        Ok(match self {
            Self::Quadratic { params, a, b } => Box::new(make_quadratic(a.clone(), Point::from_vec(b.clone()), *params)?),
            Self::BenchmarkQuadratic { params, d } => Box::new(Quadratic::benchmark(*d, *params)?),
            Self::CubicPerturbed { rho, curvature, d } => Box::new(make_cubic_perturbed(*rho, *curvature, *d)?),
            Self::HardInstance { params, signs, t } => Box::new(make_hard_instance_product(signs.clone(), *t, *params)?),
        })
    }
}

/// Parameters of one verification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Bias {
        x: Vec<f64>,
        #[serde(rename = "Z")]
        z: SymmetricMatrix,
        n_mc: u64,
    },
    Variance {
        x: Vec<f64>,
        #[serde(rename = "Z")]
        z: SymmetricMatrix,
        n: u64,
        n_mc: u64,
    },
    Concentration {
        kind: ConcentrationKind,
        x: Vec<f64>,
        r: f64,
        n: u64,
        /// Multiples of the tail scale at which exceedance is measured.
        #[serde(rename = "K_grid")]
        k_grid: Vec<f64>,
        n_mc: u64,
    },
    NoiseTail { s_grid: Vec<f64>, n_draws: u64 },
    Prop13 {
        n_instances: u64,
        d_list: Vec<usize>,
        #[serde(rename = "M")]
        m: f64,
        #[serde(rename = "R0_range")]
        r0_range: (f64, f64),
    },
    Newton { n_instances: usize, max_d: usize, max_ratio: f64, extra: usize },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Bias { .. } => "bias",
            Self::Variance { .. } => "variance",
            Self::Concentration { .. } => "concentration",
            Self::NoiseTail { .. } => "noise-tail",
            Self::Prop13 { .. } => "prop13",
            Self::Newton { .. } => "newton",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    /// Class parameters for commands that build their own instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<FunctionClassParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_family: Option<SweepFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(rename = "T_list", default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSpec>,
}

impl ExperimentConfig {
    pub fn empty(command: Command) -> Self {
        Self {
            command,
            family: None,
            params: None,
            sweep_family: None,
            noise: None,
            t: None,
            t_list: None,
            d: None,
            d_list: None,
            trials: None,
            seed: None,
            output: None,
            check: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
