//! Run configuration: one JSON document, with command-line flags taking precedence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fbms::balance::StackingParams;
use fbms::surface::DEFAULT_RESOLUTION;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridRanges {
    pub topology_n: [usize; 2],
    pub topology_m: [usize; 2],
    pub index_n: [usize; 2],
    pub index_m: [usize; 2],
    pub waist_n: [usize; 2],
}

impl Default for GridRanges {
    fn default() -> Self {
        GridRanges { topology_n: [1, 8], topology_m: [3, 12], index_n: [2, 8], index_m: [3, 50], waist_n: [2, 12] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub waist_ratio: f64,
    pub balancing_residual: f64,
    pub oracle_h: f64,
    pub force_relative: f64,
    pub force_parity: f64,
    pub lambda_band: f64,
    pub fd_lambda: f64,
    pub perforated_gap: f64,
    pub rectangle_lambda2: f64,
    pub boundary_angle: f64,
    pub orbit_closure: f64,
    pub trace_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            waist_ratio: 1e-10,
            balancing_residual: 1e-12,
            oracle_h: 1e-5,
            force_relative: 0.25,
            force_parity: 1e-6,
            lambda_band: 1e-3,
            fd_lambda: 1e-3,
            perforated_gap: 0.05,
            rectangle_lambda2: 1e-3,
            boundary_angle: 1e-3,
            orbit_closure: 1e-9,
            trace_ratio: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n_layers: usize,
    pub m: usize,
    pub zeta: Option<Vec<f64>>,
    pub xi: Option<Vec<f64>>,
    pub resolution: f64,
    pub grid_h: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: usize,
    pub grid: GridRanges,
    pub tolerances: Tolerances,
    pub only: Option<Vec<String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_layers: 2,
            m: 10,
            zeta: None,
            xi: None,
            resolution: DEFAULT_RESOLUTION,
            grid_h: 1.0 / 64.0,
            out: PathBuf::from("fbms-out"),
            seed: 0,
            samples: 500,
            grid: GridRanges::default(),
            tolerances: Tolerances::default(),
            only: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("malformed config {}: {e}", path.display()))
    }

    pub fn stacking(&self) -> fbms::Result<StackingParams> {
        let d = self.n_layers.saturating_sub(1);
        StackingParams::new(
            self.n_layers,
            self.m,
            self.zeta.clone().unwrap_or_else(|| vec![0.0; d]),
            self.xi.clone().unwrap_or_else(|| vec![0.0; d]),
        )
    }

    pub fn out_file(&self, name: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }
}
