//! JSON report documents. Each carries a `schema` tag matching a file in
//! `schemas/`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sqg_core::dynamics::Divergence;
use sqg_core::fixpoint::{ConvergenceReport, IterationRecord};
use sqg_core::probes::ProbeReport;

pub const CONVERGENCE_SCHEMA: &str = "sqg.convergence_report/1";
pub const LINEAR_SCHEMA: &str = "sqg.linear_report/1";
pub const EVOLVE_SCHEMA: &str = "sqg.evolve_report/1";
pub const PROBES_SCHEMA: &str = "sqg.probe_reports/1";
pub const BESOV_SCHEMA: &str = "sqg.besov/1";
pub const META_SCHEMA: &str = "sqg.meta/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub n: usize,
    #[serde(rename = "A_n")]
    pub a_n: f64,
    #[serde(rename = "B_n")]
    pub b_n: f64,
    #[serde(rename = "B_datum")]
    pub b_datum: f64,
    #[serde(rename = "B_trajectory")]
    pub b_trajectory: f64,
    pub periodicity_residual: Option<f64>,
    pub fixed_point_residual: f64,
    pub cutoff_gap: f64,
}

impl From<&IterationRecord> for IterationRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            n: r.n,
            a_n: r.a_n,
            b_n: r.b_n,
            b_datum: r.b_datum,
            b_trajectory: r.b_trajectory,
            periodicity_residual: finite(r.periodicity_residual),
            fixed_point_residual: r.fixed_point_residual,
            cutoff_gap: r.cutoff_gap,
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumNorms {
    /// `‖θ₀‖_{Ḃ⁰_{p,1}}`
    pub b0_p1: f64,
    /// `‖θ₀‖_{Ḃ^{s_c}_{p,q}}`
    pub critical: f64,
    /// `‖θ₀‖_{Ḃ^σ_{p,q}}`
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalBlock {
    pub theta0_norms: DatumNorms,
    #[serde(rename = "K")]
    pub k: f64,
    pub forcing_norm: f64,
    #[serde(rename = "K_over_F")]
    pub k_over_f: Option<f64>,
    pub converged: bool,
    pub reason: String,
    pub periodicity_residual: Option<f64>,
    pub pde_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceBlock {
    pub time: f64,
    pub norm: f64,
    pub reference: f64,
}

impl From<&Divergence> for DivergenceBlock {
    fn from(d: &Divergence) -> Self {
        Self {
            time: d.time,
            norm: d.norm,
            reference: d.reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDocument {
    pub schema: String,
    pub iterations: Vec<IterationRow>,
    #[serde(rename = "final")]
    pub final_block: FinalBlock,
    pub divergence: Option<DivergenceBlock>,
}

impl ConvergenceDocument {
    pub fn new(report: &ConvergenceReport, pde_residual: Option<f64>, divergence: Option<&Divergence>) -> Self {
        Self {
            schema: CONVERGENCE_SCHEMA.into(),
            iterations: report.records.iter().map(IterationRow::from).collect(),
            final_block: FinalBlock {
                theta0_norms: DatumNorms {
                    b0_p1: report.theta0_l1,
                    critical: report.theta0_critical,
                    sigma: report.theta0_sigma,
                },
                k: report.k,
                forcing_norm: report.forcing_norm,
                k_over_f: report.k_over_f,
                converged: report.converged,
                reason: report.reason.as_str().into(),
                periodicity_residual: finite(report.periodicity_residual),
                pde_residual,
            },
            divergence: divergence.map(DivergenceBlock::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDocument {
    pub schema: String,
    pub series_terms: u64,
    /// Max-abs gap between the truncated series and the closed form, relative.
    pub series_vs_closed: f64,
    /// `‖u(T) − u(0)‖_{L²} / ‖u₀‖_{L²}`.
    pub periodicity_residual: Option<f64>,
    pub u0_l2: f64,
    pub u0_bound_lhs: f64,
    pub u0_bound_rhs: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveDocument {
    pub schema: String,
    pub t_end: f64,
    pub steps: usize,
    pub samples: usize,
    pub l2_initial: f64,
    pub l2_final: f64,
    /// `‖θ(t_end) − θ(0)‖_{L²} / ‖θ(0)‖_{L²}`.
    pub return_residual: Option<f64>,
    pub divergence: Option<DivergenceBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub samples: usize,
    pub max_ratio: f64,
    pub ceiling: Option<f64>,
    pub hard_failures: usize,
    pub passed: bool,
    pub fitted: BTreeMap<String, Option<f64>>,
    pub notes: Vec<String>,
    pub ratios: Vec<f64>,
}

impl ProbeEntry {
    pub fn new(report: &ProbeReport, parameters: &[(&str, f64)]) -> Self {
        Self {
            name: report.name.clone(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            samples: report.samples,
            max_ratio: report.max_ratio,
            ceiling: finite(report.ceiling),
            hard_failures: report.hard_failures,
            passed: report.passed,
            fitted: report.fitted.iter().map(|(k, v)| (k.clone(), finite(*v))).collect(),
            notes: report.notes.clone(),
            ratios: report.ratios.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDocument {
    pub schema: String,
    pub seed: u64,
    pub n: usize,
    pub probes: Vec<ProbeEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovDocument {
    pub schema: String,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub norm: f64,
    pub time: f64,
    pub spectrum: Vec<BesovRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovRow {
    pub j: i32,
    pub value: f64,
}

/// Everything that legitimately differs between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDocument {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub threads: Option<usize>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub wall_time_ms: u128,
    pub iteration_wall_time_ms: Vec<u128>,
    pub exit_code: i32,
}
