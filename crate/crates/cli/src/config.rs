//! Run configuration: a JSON document whose every field has a default, so a
//! partial file (or none) plus command-line flags resolves to a complete run.

use std::path::{Path, PathBuf};

use couette_core::stability::Theorem;
use couette_core::{Annulus, FlowFamily, FlowSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub annulus: Annulus,
    pub flow: FlowSpec,
    pub seed: u64,
    /// Absolute tolerance for pass/fail decisions on exact quantities.
    pub tol: f64,
    /// Worker threads; `None` means the available parallelism.
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub eval: EvalOptions,
    pub verify: VerifyOptions,
    pub stability: StabilityOptions,
    pub map: MapOptions,
    pub poincare: PoincareOptions,
    pub slscan: SlScanOptions,
    pub appendix: AppendixOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            annulus: Annulus::new(1.0, 2.0).expect("valid default annulus"),
            flow: FlowSpec::couette(FlowFamily::CouetteInnerRotating, 1.0).expect("valid default flow"),
            seed: 0,
            tol: 1e-10,
            jobs: None,
            out: None,
            eval: EvalOptions::default(),
            verify: VerifyOptions::default(),
            stability: StabilityOptions::default(),
            map: MapOptions::default(),
            poincare: PoincareOptions::default(),
            slscan: SlScanOptions::default(),
            appendix: AppendixOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    /// Samples on the closed segment `[R1, R2]`.
    pub n_rho: usize,
    pub theta: f64,
    pub z: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { n_rho: 101, theta: 0.0, z: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// Closed-form residuals, boundary data and the slip identity of the configured flow.
    Exact,
    /// Finite-difference residual of the flow plus a smooth random lattice of size `noise`.
    Perturbed,
    /// Divergence, curl and wall flux of the harmonic counterexample field.
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub mode: VerifyMode,
    pub n_samples: usize,
    pub n_boundary: usize,
    pub noise: f64,
    pub fd_step: f64,
    /// Tolerance for finite-difference quantities (perturbed and counterexample modes).
    pub fd_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { mode: VerifyMode::Exact, n_samples: 10_000, n_boundary: 1000, noise: 1e-3, fd_step: 1e-4, fd_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityOptions {
    /// Defaults to the statement matching the flow family.
    pub theorem: Option<Theorem>,
    /// Replaces the computable lower bound by a known value of the constant.
    pub user_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapOptions {
    pub family: FlowFamily,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Slices for the vorticity families; ignored elsewhere.
    pub gammas: Vec<f64>,
    pub theorem: Option<Theorem>,
    pub user_bound: Option<f64>,
    pub svg: Option<PathBuf>,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            family: FlowFamily::SpiralPoiseuilleInnerRotating,
            alpha: [-5.0, 5.0],
            beta: [-5.0, 5.0],
            n_alpha: 101,
            n_beta: 101,
            gammas: vec![0.0],
            theorem: None,
            user_bound: None,
            svg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareOptions {
    pub eps: Vec<f64>,
    pub n_rho: usize,
    pub n_z_half: usize,
}

impl Default for PoincareOptions {
    fn default() -> Self {
        Self { eps: vec![0.1, 0.5, 1.0], n_rho: 512, n_z_half: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlScanOptions {
    pub ks: Vec<i32>,
    pub alpha: [f64; 2],
    pub n_alpha: usize,
    pub n: usize,
    /// Exit with status 1 if any `sigma_min` is at or below this value.
    pub threshold: f64,
}

impl Default for SlScanOptions {
    fn default() -> Self {
        Self { ks: vec![1, 2, 3, 4], alpha: [-10.0, 10.0], n_alpha: 201, n: 400, threshold: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixOptions {
    /// Inner radii for the `R1 -> 0` sequence at `R2 = 1`.
    pub shrinking_inner: Vec<f64>,
    /// Outer radii for the `R2 -> infinity` sequence at `R1 = 1`.
    pub growing_outer: Vec<f64>,
    /// Widths `R2 - R1` for the thin sequence at `R1 = 1`.
    pub thin_widths: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Default for AppendixOptions {
    fn default() -> Self {
        Self {
            shrinking_inner: vec![1e-1, 1e-2, 1e-3, 1e-4],
            growing_outer: vec![10.0, 1e2, 1e3],
            thin_widths: vec![1e-1, 1e-2, 1e-3, 1e-4],
            eps: vec![0.1, 1.0],
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}
