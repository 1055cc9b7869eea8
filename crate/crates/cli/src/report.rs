//! Report model, text rendering and output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use guenterlab::geometry::ShapeSpec;
use guenterlab::kernels::DefKernelCheck;
use guenterlab::spectra::{ConstantEstimate, RegionSummary};
use guenterlab::verify::{InequalityReport, SupCalibration};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    /// `lambda_min^(-1/2)` of the discrete pencil.
    Eigen,
    /// Largest sampled quotient (p != 2).
    LowerBound,
    /// Largest quotient over the sup calibration pool.
    Calibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    pub shape: ShapeSpec,
    pub nodes: usize,
    pub dofs: usize,
    pub h: f64,
    pub kind: ConstantKind,
    #[serde(rename = "C", with = "guenterlab::num::extended")]
    pub c: f64,
    pub estimate: Option<ConstantEstimate>,
    pub calibration: Option<SupCalibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelLevel {
    pub level: usize,
    #[serde(flatten)]
    pub check: DefKernelCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub id: String,
    pub description: String,
    pub p: f64,
    pub regions: Vec<RegionSummary>,
    pub levels: Vec<LevelResult>,
    pub kernel: Vec<KernelLevel>,
    /// Where the verified constant came from: `config`, `estimate` or `calibration`.
    pub constant_source: Option<String>,
    pub verification: Option<InequalityReport>,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip)]
    pub witness_csv: Option<String>,
    #[serde(skip)]
    pub kernel_csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub timestamp: u64,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub header: Header,
    pub experiments: Vec<Experiment>,
    pub pass: bool,
    pub first_failure: Option<String>,
}

impl Report {
    pub fn new(header: Header, experiments: Vec<Experiment>) -> Self {
        let first_failure =
            experiments.iter().flat_map(|e| &e.checks).find(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail));
        Report { header, pass: experiments.iter().all(|e| e.pass), experiments, first_failure }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        format!("{v}")
    }
}

/// `id,level,shape,nodes,dofs,h,p,kind,C,lambda_min,residual`
pub fn constants_csv(report: &Report) -> String {
    let mut out = String::from("id,level,shape,nodes,dofs,h,p,kind,C,lambda_min,residual\n");
    for e in &report.experiments {
        for l in &e.levels {
            let (lambda, res) = l.estimate.as_ref().map_or((String::new(), String::new()), |est| {
                (format!("{:e}", est.lambda_min), format!("{:e}", est.residual))
            });
            let kind = serde_json::to_value(l.kind).unwrap();
            writeln!(
                out,
                "{},{},{},{},{},{:e},{},{},{},{lambda},{res}",
                e.id,
                l.level,
                l.shape.name(),
                l.nodes,
                l.dofs,
                l.h,
                e.p,
                kind.as_str().unwrap(),
                fmt_value(l.c)
            )
            .unwrap();
        }
    }
    out
}

/// Per-id table of constants across refinements with relative changes and
/// the ratio of successive changes.
pub fn convergence_table(report: &Report) -> String {
    let mut out = String::new();
    for e in &report.experiments {
        let Some(first) = e.levels.first() else { continue };
        writeln!(out, "{} ({}, p = {}, {:?})", e.id, first.shape.name(), e.p, first.kind).unwrap();
        writeln!(
            out,
            "{:>5} {:>8} {:>8} {:>12} {:>14} {:>12} {:>8}",
            "level", "nodes", "dofs", "h", "C", "change", "ratio"
        )
        .unwrap();
        let mut prev: Option<(f64, Option<f64>)> = None;
        for l in &e.levels {
            let change = prev.map(|(c, _)| (l.c - c).abs() / c.abs());
            let ratio = match (prev.and_then(|(_, d)| d), change) {
                (Some(d), Some(c)) if c > 0.0 => format!("{:.2}", d / c),
                _ => "-".into(),
            };
            writeln!(
                out,
                "{:>5} {:>8} {:>8} {:>12.4e} {:>14} {:>12} {:>8}",
                l.level,
                l.nodes,
                l.dofs,
                l.h,
                fmt_value(l.c),
                change.map_or("-".into(), |c| format!("{c:.3e}")),
                ratio
            )
            .unwrap();
            prev = Some((l.c, change));
        }
        out.push('\n');
    }
    out
}

/// Human summary: convergence, kernels, verification and the check list.
pub fn render(report: &Report) -> String {
    let mut out = convergence_table(report);
    let kernels: Vec<_> = report.experiments.iter().flat_map(|e| &e.kernel).collect();
    if !kernels.is_empty() {
        writeln!(out, "kernels").unwrap();
        for k in kernels {
            let uc = k
                .check
                .continuation
                .as_ref()
                .map_or("-".to_string(), |u| format!("rank {}/{} cond {:.2e}", u.rank, u.expected, u.condition));
            writeln!(
                out,
                "  {:<14} level {} dim {:<3} gap {:<10.3e} region {:<18} {:<26} {}",
                k.check.id,
                k.level,
                k.check.dim,
                k.check.gap,
                k.check.region.as_deref().unwrap_or("-"),
                uc,
                if k.check.pass { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        out.push('\n');
    }
    let verified: Vec<_> = report.experiments.iter().filter_map(|e| e.verification.as_ref()).collect();
    if !verified.is_empty() {
        writeln!(out, "verification").unwrap();
        for v in verified {
            writeln!(out, "  {}", v.table_row()).unwrap();
        }
        out.push('\n');
    }
    let total: usize = report.experiments.iter().map(|e| e.checks.len()).sum();
    let failed: Vec<&Check> = report.experiments.iter().flat_map(|e| &e.checks).filter(|c| !c.pass).collect();
    writeln!(out, "{} of {total} checks passed", total - failed.len()).unwrap();
    for c in failed {
        writeln!(out, "  FAIL {}: {}", c.name, c.detail).unwrap();
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Writes report.json, constants.csv, convergence.txt and, when present,
/// witnesses/<id>.csv and kernels/<id>.csv.
pub fn write_outputs(report: &Report, dir: &Path) -> Result<(), CliError> {
    create_dir(dir)?;
    write(dir.join("report.json"), &report.to_json())?;
    write_tables(report, dir)?;
    for e in &report.experiments {
        if let Some(csv) = &e.witness_csv {
            create_dir(&dir.join("witnesses"))?;
            write(dir.join("witnesses").join(format!("{}.csv", e.id)), csv)?;
        }
        if let Some(csv) = &e.kernel_csv {
            create_dir(&dir.join("kernels"))?;
            write(dir.join("kernels").join(format!("{}.csv", e.id)), csv)?;
        }
    }
    Ok(())
}

/// The files that can be regenerated from report.json alone.
pub fn write_tables(report: &Report, dir: &Path) -> Result<(), CliError> {
    create_dir(dir)?;
    write(dir.join("constants.csv"), &constants_csv(report))?;
    write(dir.join("convergence.txt"), &convergence_table(report))
}
