//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Registered anchors: each names the relation a check exercises.
pub const ANCHORS: &[&str] = &[
    "r_matrix_regularity",
    "r_matrix_unitarity",
    "r_matrix_crossing_symmetry",
    "r_matrix_crossing_unitarity",
    "yang_baxter_equation",
    "r_matrix_degeneration",
    "fusion_relations",
    "fused_r_matrix_reconstruction",
    "reflection_equation",
    "k_matrix_fusion",
    "boundary_non_commutativity",
    "transfer_commutativity",
    "transfer_product_identities",
    "transfer_crossing",
    "transfer_special_values",
    "transfer_asymptotics",
    "hamiltonian_log_derivative",
    "eigenvalue_functional_relations",
    "eigenvalue_asymptotics",
    "eigenvalue_crossing",
    "eigenvalue_special_values",
    "eigenvalue_trace",
    "t_q_relation",
    "bethe_equations",
    "bethe_energy",
];

pub fn is_registered(anchor: &str) -> bool {
    ANCHORS.contains(&anchor)
}

/// Direction of the comparison against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass iff `max_residual <= tolerance`.
    Upper,
    /// Pass iff `max_residual >= tolerance` (witnesses and counts).
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check_id: String,
    pub paper_anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    pub n_samples: usize,
    pub sample_description: String,
    /// Only recorded when the configuration asks for timings.
    pub wall_time_ms: Option<f64>,
}

impl CheckEntry {
    /// Panics on an unregistered anchor: anchors are fixed in code.
    pub fn new(
        check_id: impl Into<String>,
        anchor: &str,
        max_residual: f64,
        tolerance: f64,
        bound: Bound,
        n_samples: usize,
        sample_description: impl Into<String>,
    ) -> Self {
        assert!(is_registered(anchor), "unregistered anchor {anchor}");
        let pass = match bound {
            Bound::Upper => max_residual <= tolerance,
            Bound::Lower => max_residual >= tolerance,
        };
        Self {
            check_id: check_id.into(),
            paper_anchor: anchor.to_string(),
            max_residual,
            tolerance,
            bound,
            pass,
            n_samples,
            sample_description: sample_description.into(),
            wall_time_ms: None,
        }
    }

    /// An upper-bounded residual check.
    pub fn residual(
        check_id: impl Into<String>,
        anchor: &str,
        max_residual: f64,
        tolerance: f64,
        n_samples: usize,
        sample_description: impl Into<String>,
    ) -> Self {
        Self::new(check_id, anchor, max_residual, tolerance, Bound::Upper, n_samples, sample_description)
    }

    /// A check whose computation failed; it never passes.
    pub fn failed(check_id: impl Into<String>, anchor: &str, tolerance: f64, error: impl std::fmt::Display) -> Self {
        let mut e = Self::residual(check_id, anchor, f64::NAN, tolerance, 0, format!("error: {error}"));
        e.pass = false;
        e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: bool,
    pub n_entries: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub entries: Vec<CheckEntry>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>, config: &RunConfig, entries: Vec<CheckEntry>) -> Self {
        let n_failed = entries.iter().filter(|e| !e.pass).count();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config: config.clone(),
            summary: Summary {
                pass: n_failed == 0,
                n_entries: entries.len(),
                n_failed,
            },
            entries,
        }
    }

    pub fn entry(&self, check_id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.check_id == check_id)
    }
}

/// Pretty JSON with a trailing newline. Non-finite numbers become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
