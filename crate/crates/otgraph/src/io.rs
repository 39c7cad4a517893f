//! File formats shared with the command line front end: graph JSON,
//! distribution JSON arrays, trajectory/momentum/dual CSV and report JSON.
//!
//! CSV values use fixed 17-significant-digit scientific notation so repeated
//! runs diff bitwise.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::solver::{CertificateReport, DiscretePath, DualPath};

/// Graph file: `{ "n": 3, "edges": [[1, 2, 1.0], ...] }` with 1-based
/// vertices. The loader symmetrizes, drops zero-weight pairs and validates
/// connectivity.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn graph_from_json(text: &str) -> Result<WeightedGraph> {
    let file: GraphFile = serde_json::from_str(text)?;
    let edges: Vec<(usize, usize, f64)> = file
        .edges
        .iter()
        .map(|&(i, j, w)| {
            if i == 0 || j == 0 || i > file.n || j > file.n {
                Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) out of range for n = {} (vertices are 1-based)",
                    file.n
                )))
            } else {
                Ok((i - 1, j - 1, w))
            }
        })
        .collect::<Result<_>>()?;
    WeightedGraph::from_edges(file.n, &edges)
}

pub fn load_graph(path: &Path) -> Result<WeightedGraph> {
    graph_from_json(&std::fs::read_to_string(path)?)
}

/// A distribution given either as an inline JSON array or as a path to a
/// JSON file containing one.
pub fn parse_distribution(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        Ok(serde_json::from_str(trimmed)?)
    } else {
        Ok(serde_json::from_str(&std::fs::read_to_string(Path::new(trimmed))?)?)
    }
}

/// 17 significant digits, fixed scientific format.
pub fn fmt_value(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn write_trajectory_csv(path: &Path, p: &DiscretePath) -> Result<()> {
    let n = p.n();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (1..=n).map(|i| format!("rho_{i}")).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (k, row) in p.rho.iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        writeln!(out, "{},{}", fmt_value(k as f64 * p.dt), vals.join(","))?;
    }
    Ok(())
}

pub fn write_momentum_csv(path: &Path, graph: &WeightedGraph, p: &DiscretePath) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> =
        graph.edges().iter().map(|&(i, j)| format!("m_{}_{}", i + 1, j + 1)).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (k, row) in p.m.iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        writeln!(out, "{},{}", fmt_value((k as f64 + 0.5) * p.dt), vals.join(","))?;
    }
    Ok(())
}

pub fn write_dual_csv(path: &Path, d: &DualPath) -> Result<()> {
    let n = d.lambda[0].len();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (1..=n).map(|i| format!("lambda_{i}")).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (k, row) in d.lambda.iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        writeln!(out, "{},{}", fmt_value((k as f64 + 0.5) * d.dt), vals.join(","))?;
    }
    Ok(())
}

fn read_csv_rows(path: &Path, context: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| {
            Error::InvalidInput(format!("{context}: bad number on line {}: {e}", idx + 1))
        })?);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("{context}: no data rows")));
    }
    Ok(rows)
}

/// Re-ingest a trajectory/momentum CSV pair as a `DiscretePath`.
pub fn read_path_csv(trajectory: &Path, momentum: &Path) -> Result<DiscretePath> {
    let traj = read_csv_rows(trajectory, "trajectory")?;
    let mom = read_csv_rows(momentum, "momentum")?;
    let k = traj.len() - 1;
    if mom.len() != k {
        return Err(Error::InvalidInput(format!(
            "momentum has {} rows for {} trajectory rows",
            mom.len(),
            traj.len()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("trajectory needs at least two rows".into()));
    }
    let dt = 1.0 / k as f64;
    let rho: Vec<Vec<f64>> = traj.into_iter().map(|r| r[1..].to_vec()).collect();
    let m: Vec<Vec<f64>> = mom.into_iter().map(|r| r[1..].to_vec()).collect();
    Ok(DiscretePath { dt, rho, m })
}

/// Re-ingest a dual CSV; the rate/jump decomposition is rebuilt with the
/// given jump threshold.
pub fn read_dual_csv(path: &Path, jump_abs: f64) -> Result<DualPath> {
    let rows = read_csv_rows(path, "dual")?;
    let k = rows.len();
    let dt = 1.0 / k as f64;
    let lambda: Vec<Vec<f64>> = rows.into_iter().map(|r| r[1..].to_vec()).collect();
    Ok(crate::solver::certificate::finalize_dual(dt, lambda, jump_abs))
}

/// The report emitted by `dist`, `geodesic` and `certify`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportJson {
    pub distance: f64,
    pub action: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub residuals: ResidualsJson,
    pub energy_drift: f64,
    pub converged: bool,
    pub iterations: usize,
    pub advisory: bool,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResidualsJson {
    pub velocity: f64,
    pub hamilton_jacobi: f64,
    pub jump: f64,
    pub monotonicity: f64,
}

impl ReportJson {
    pub fn from_certificate(
        report: &CertificateReport,
        converged: bool,
        iterations: usize,
        seed: u64,
    ) -> Self {
        ReportJson {
            distance: (2.0 * report.action).max(0.0).sqrt(),
            action: report.action,
            dual_value: report.dual_value,
            gap: report.gap,
            residuals: ResidualsJson {
                velocity: report.velocity_residual,
                hamilton_jacobi: report.hj_residual,
                jump: report.jump_residual,
                monotonicity: report.monotonicity_violation,
            },
            energy_drift: report.energy_drift,
            converged,
            iterations,
            advisory: report.advisory,
            seed,
        }
    }
}

pub fn write_report_json(path: &Path, report: &ReportJson) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
