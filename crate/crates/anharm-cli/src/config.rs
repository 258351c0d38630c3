//! Run configuration: one JSON document covering every knob, with CLI flags
//! overriding file values field by field.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    // problem
    pub potential: Option<String>,
    pub mass: Option<String>,
    pub hbar: Option<String>,
    // solve controls
    pub xmax: Option<String>,
    pub xmin: Option<String>,
    pub level: Option<usize>,
    /// "auto" or an integer
    pub order: Option<String>,
    /// "auto" or an integer (decimal digits)
    pub precision: Option<String>,
    /// "auto" | "none" | "linear:<a>" | "monomial" | "poly:<text>"
    pub gauge: Option<String>,
    pub target_digits: Option<u32>,
    pub root_tol: Option<String>,
    pub grid_samples: Option<usize>,
    /// initial guesses for asymmetric solves
    pub init_energy: Option<String>,
    pub init_l0: Option<String>,
    // sweep-gauge
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub steps: Option<usize>,
    pub reference_energy: Option<String>,
    // error-scan
    pub xmax_list: Option<Vec<f64>>,
    pub reference_xmax: Option<f64>,
    // flow
    pub energy: Option<String>,
    pub x_from: Option<String>,
    pub x_to: Option<String>,
    pub points: Option<usize>,
    // splitting
    pub digits: Option<u32>,
    // outputs
    pub csv: Option<String>,
    pub out: Option<String>,
    pub dump_series: Option<String>,
}

macro_rules! merge_fields {
    ($base:ident, $over:ident; $($f:ident),* $(,)?) => {
        $(if $over.$f.is_some() { $base.$f = $over.$f.clone(); })*
    };
}

impl RunConfig {
    /// Overlay `over` (CLI flags) on `self` (config file).
    pub fn merged_with(mut self, over: &RunConfig) -> RunConfig {
        merge_fields!(self, over;
            potential, mass, hbar, xmax, xmin, level, order, precision, gauge,
            target_digits, root_tol, grid_samples, init_energy, init_l0,
            a_min, a_max, steps, reference_energy, xmax_list, reference_xmax,
            energy, x_from, x_to, points, digits, csv, out, dump_series,
        );
        self
    }
}
