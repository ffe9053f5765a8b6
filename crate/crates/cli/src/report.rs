//! Report files. A report repeats its input problem and the tolerances it
//! ran with, so it can be re-run and diffed; nothing in it depends on the
//! clock or the machine.

use critset::{BranchId, CriticalityReport, EstimatedDim, ParamPoint, WitnessSequence};
use serde::{Deserialize, Serialize};

use crate::problem::ProblemFile;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub tolerances: Tolerances,
    pub input: ProblemFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<ManifoldRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<PieceRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub saddles: Vec<SaddleRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_grad: f64,
    pub tol_eig_rel: f64,
    pub witness_radius: f64,
    pub region: [f64; 2],
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub r: usize,
    pub l: usize,
    pub cuts: Vec<usize>,
    pub perm: Vec<usize>,
}

impl From<&BranchId> for BranchRecord {
    fn from(b: &BranchId) -> Self {
        Self { r: b.r(), l: b.l(), cuts: b.partition().cuts().to_vec(), perm: b.perm().as_slice().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub name: String,
    pub a: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<f64>,
    pub branch: BranchRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criticality: Option<CriticalityReport>,
}

impl PointRecord {
    pub fn new(name: &str, p: &ParamPoint, branch: &BranchId) -> Self {
        Self {
            name: name.to_string(),
            a: p.a().to_vec(),
            w: p.w().to_vec(),
            errors: Vec::new(),
            branch: branch.into(),
            criticality: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldRecord {
    pub points: usize,
    /// Estimated dimension, or "unknown".
    pub est_dim: String,
    pub entire_space: bool,
    pub max_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

pub fn dim_label(d: EstimatedDim) -> String {
    match d {
        EstimatedDim::Known(k) => k.to_string(),
        EstimatedDim::Unknown => "unknown".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceRecord {
    pub branch: BranchRecord,
    pub free_affine_dim: usize,
    pub manifold_factors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub grad_norm: f64,
    pub base_a: Vec<f64>,
    pub base_w: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub kind: String,
    pub source: BranchRecord,
    pub target: BranchRecord,
    pub grad_norms: Vec<f64>,
    pub distances: Vec<f64>,
    pub limit_a: Vec<f64>,
    pub limit_w: Vec<Vec<f64>>,
}

impl WitnessRecord {
    pub fn new(kind: &str, seq: &WitnessSequence) -> Self {
        Self {
            kind: kind.to_string(),
            source: (&seq.source_branch).into(),
            target: (&seq.target_branch).into(),
            grad_norms: seq.grad_norms.clone(),
            distances: seq.distances(),
            limit_a: seq.limit.a().to_vec(),
            limit_w: seq.limit.w().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleRecord {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<usize>,
    /// Loss changes relative to the analysed point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic_form: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_choice: Option<f64>,
    pub a: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub expected: String,
    pub got: String,
}

impl Report {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Numeric(format!("cannot serialize report: {e}")))
    }

    #[cfg(test)]
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("cannot parse report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::example_problem;

    #[test]
    fn report_round_trips_through_toml() {
        let report = Report {
            meta: Meta { tool: "critset".into(), version: "0".into(), command: "analyze".into(), seed: Some(3) },
            tolerances: Tolerances { tol_grad: 1e-8, tol_eig_rel: 1e-6, witness_radius: 1e-3, region: [-3.0, 3.0], budget: 10 },
            input: example_problem(),
            points: Vec::new(),
            manifold: None,
            pieces: Vec::new(),
            witnesses: Vec::new(),
            saddles: Vec::new(),
            checks: vec![CheckRecord { name: "x".into(), passed: true, expected: "1".into(), got: "1".into() }],
        };
        let back = Report::from_toml(&report.to_toml().unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
