//! Report documents emitted on stdout. Every report deserializes back into
//! its own type with unknown fields rejected, which is how the tests check
//! the schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub command: String,
    pub value: f64,
    pub mu_opt: Rows,
    pub dual_f: Vec<f64>,
    pub dual_g: Vec<f64>,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub max_reduced_cost: f64,
    pub pivots: usize,
    pub in_s: bool,
    pub argmax_is_entire_m: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksReport {
    pub boundary: bool,
    pub argmax: bool,
    pub in_s: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub command: String,
    pub rationalizable: bool,
    #[serde(default)]
    pub witness: Option<Rows>,
    #[serde(default)]
    pub t_star: Option<f64>,
    #[serde(default)]
    pub mu_star: Option<Rows>,
    pub checks: ChecksReport,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSection {
    pub t_star: f64,
    pub mu_star: Rows,
    pub binding_cells: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifyReport {
    pub command: String,
    pub entropy: String,
    pub phi_raw: Rows,
    pub phi_canonical: Rows,
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundTripReport {
    /// Max anchored cross-difference error against the true surplus.
    pub cross_difference_error: f64,
    /// Max entry error of the canonical surplus, both recentered on the population margins.
    pub canonical_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateReport {
    pub command: String,
    pub households: u64,
    pub seed: u64,
    pub ipfp_iterations: usize,
    pub mu_true_file: String,
    pub mu_empirical_file: String,
    pub empirical_degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_trip: Option<RoundTripReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorReport {
    pub error: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

impl From<&crate::CliError> for ErrorReport {
    fn from(e: &crate::CliError) -> Self {
        Self {
            error: e.kind().to_string(),
            message: e.to_string(),
            exit_code: e.exit_code(),
            cell: e.cell(),
            hint: e.hint().map(str::to_string),
        }
    }
}
