//! Exact vs oracle vs Monte Carlo consistency report for one scenario.

use super::config::ScenarioConfig;
use super::sweep::{evaluate_point, MetricKind, OutputRow, SweepMethod};
use crate::error::Error;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Relative tolerance between the exact and oracle values.
pub const ORACLE_REL_TOL: f64 = 1e-3;
/// Monte Carlo acceptance band in standard errors.
pub const MC_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationBudget {
    pub samples: u64,
    pub snr_db: Vec<f64>,
}

impl ValidationBudget {
    pub fn for_config(cfg: &ScenarioConfig) -> Self {
        ValidationBudget { samples: cfg.mc.samples, snr_db: vec![0.0, 10.0, 20.0, 30.0] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// `metric/comparison`, e.g. `outage/exact-vs-mc`.
    pub name: String,
    pub snr_db: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub scenario_id: String,
    pub checks: Vec<Check>,
    pub errors: Vec<(f64, String, Error)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = format!("validate {}\n", self.scenario_id);
        for c in &self.checks {
            let _ = writeln!(s, "{} {:>5} dB  {:<34} {}", if c.passed { "PASS" } else { "FAIL" }, c.snr_db, c.name, c.detail);
        }
        for (snr, what, e) in &self.errors {
            let _ = writeln!(s, "ERROR {snr:>5} dB  {what}: {e}");
        }
        let n_fail = self.failures().count() + self.errors.len();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len() + self.errors.len(), n_fail);
        s
    }
}

fn compare(metric: &str, snr: f64, exact: &OutputRow, oracle: Option<&OutputRow>, mc: Option<&OutputRow>) -> Vec<Check> {
    let mut out = Vec::new();
    if let Some(o) = oracle {
        let rel = (exact.value - o.value).abs() / o.value.abs().max(f64::MIN_POSITIVE);
        out.push(Check {
            name: format!("{metric}/exact-vs-oracle"),
            snr_db: snr,
            passed: rel <= ORACLE_REL_TOL,
            detail: format!("exact {:.9e} oracle {:.9e} rel {rel:.1e}", exact.value, o.value),
        });
    }
    if let Some(m) = mc {
        let z = (exact.value - m.value) / m.err_estimate;
        out.push(Check {
            name: format!("{metric}/exact-vs-mc"),
            snr_db: snr,
            passed: z.abs() <= MC_SIGMAS,
            detail: format!("exact {:.6e} mc {:.6e} +- {:.2e} z {z:+.2}", exact.value, m.value, m.err_estimate),
        });
    }
    out
}

/// Run every metric of the scenario through the three methods at each
/// budget SNR and compare.
pub fn cmd_validate(cfg: &ScenarioConfig, budget: &ValidationBudget) -> ValidationReport {
    let mut cfg = cfg.clone();
    cfg.mc.samples = budget.samples;
    let methods = [SweepMethod::Exact, SweepMethod::Oracle, SweepMethod::Mc];
    let points: Vec<_> = budget
        .snr_db
        .par_iter()
        .map(|&snr| (snr, evaluate_point(&cfg, snr, &MetricKind::ALL, &methods)))
        .collect();
    let mut report = ValidationReport { scenario_id: cfg.id.clone(), checks: Vec::new(), errors: Vec::new() };
    for (snr, pt) in points {
        for f in pt.failures {
            report.errors.push((snr, format!("{}/{}", f.metric, f.method.as_str()), f.error));
        }
        let failed = |r: &OutputRow| r.value.is_nan();
        let mut labels: Vec<&str> = pt.rows.iter().map(|r| r.metric.as_str()).collect();
        labels.dedup();
        for label in labels {
            let pick = |m: SweepMethod| pt.rows.iter().find(|r| r.metric == label && r.method == m.as_str() && !failed(r));
            if let Some(exact) = pick(SweepMethod::Exact) {
                report.checks.extend(compare(label, snr, exact, pick(SweepMethod::Oracle), pick(SweepMethod::Mc)));
            }
        }
    }
    report
}
