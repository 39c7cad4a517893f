//! Time-discretized minimization of the action over paths with fixed
//! endpoints, dual-potential extraction and optimality certification.
//!
//! The discretization places masses `rho^0..rho^K` at the nodes of a uniform
//! grid and momenta `m^0..m^{K-1}` at the interval midpoints, linked by the
//! discrete continuity equation
//!
//! ```text
//! (rho^{k+1} - rho^k)/dt + div(m^k) = 0.
//! ```
//!
//! The action of a cell weights each edge momentum by the cell conductivity
//! built from the two node masses (see [`crate::energy::cell_conductivity`]),
//! keeping the objective jointly convex. The dual potential `lambda` is the
//! continuity multiplier over each interval divided by `dt`; its interior-node
//! increments play the role of `d lambda / dt` in the Hamilton-Jacobi
//! optimality conditions.

pub(crate) mod certificate;
mod feasible;
mod hodge;
mod pdhg;

pub use certificate::{certify, energy_profile, normalize_dual};
pub use feasible::feasible_path;
pub use hodge::hodge_lift;

use serde::Serialize;

use crate::energy::{cell_conductivity, ExtReal};
use crate::error::{Error, Result};
use crate::graph::{EdgeField, WeightedGraph};
use crate::mobility::{c_g, Mobility};
use crate::simplex::ProbVector;

/// Discrete path: `K+1` simplex rows and `K` per-edge momentum rows.
#[derive(Debug, Clone)]
pub struct DiscretePath {
    pub dt: f64,
    /// `K+1` rows of vertex masses.
    pub rho: Vec<Vec<f64>>,
    /// `K` rows of per-edge momenta in the graph's edge order.
    pub m: Vec<Vec<f64>>,
}

impl DiscretePath {
    pub fn intervals(&self) -> usize {
        self.m.len()
    }

    pub fn n(&self) -> usize {
        self.rho[0].len()
    }

    pub fn rho_start(&self) -> &[f64] {
        &self.rho[0]
    }

    pub fn rho_end(&self) -> &[f64] {
        self.rho.last().unwrap().as_slice()
    }

    /// Momentum of interval `k` as a full skew-symmetric field.
    pub fn momentum_field(&self, graph: &WeightedGraph, k: usize) -> EdgeField {
        EdgeField::from_values(graph, self.m[k].clone()).unwrap()
    }

    /// Per-edge cell conductivities of interval `k`.
    pub fn cell_conductivities(&self, graph: &WeightedGraph, g: &Mobility, k: usize) -> Vec<f64> {
        let (ra, rb) = (&self.rho[k], &self.rho[k + 1]);
        graph
            .edges()
            .iter()
            .map(|&(i, j)| cell_conductivity(g, ra[i], ra[j], rb[i], rb[j]))
            .collect()
    }

    /// Check simplex membership of every row and the discrete continuity
    /// equation to `1e-9` per entry.
    pub fn validate(&self, graph: &WeightedGraph) -> Result<()> {
        let k = self.intervals();
        if self.rho.len() != k + 1 {
            return Err(Error::InvalidInput(format!(
                "path has {} mass rows for {} momentum rows",
                self.rho.len(),
                k
            )));
        }
        for row in &self.rho {
            ProbVector::new(row.clone())?;
        }
        for kk in 0..k {
            let field = EdgeField::from_values(graph, self.m[kk].clone())?;
            let div = crate::graph::divergence_g(graph, &field)?;
            for i in 0..graph.n() {
                let r = (self.rho[kk + 1][i] - self.rho[kk][i]) / self.dt + div[i];
                if r.abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "continuity violated at interval {kk}, vertex {}: residual {r:.3e}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dual path: one potential sample per time interval (the continuity
/// multiplier divided by `dt`), plus the decomposition of its increments into
/// absolutely-continuous-like rates and flagged jumps.
#[derive(Debug, Clone)]
pub struct DualPath {
    pub dt: f64,
    /// `K` rows of potentials, one per interval.
    pub lambda: Vec<Vec<f64>>,
    /// `K-1` rows of interior-node rates `(lambda^k - lambda^{k-1})/dt`,
    /// with jump-flagged coordinates zeroed out.
    pub abs_rate: Vec<Vec<f64>>,
    /// Flagged jump increments (interior node index, per-coordinate deltas
    /// with non-jumping coordinates zeroed).
    pub jumps: Vec<JumpIncrement>,
}

#[derive(Debug, Clone)]
pub struct JumpIncrement {
    /// Interior node index in `1..K`.
    pub node: usize,
    pub delta: Vec<f64>,
}

impl DualPath {
    pub fn intervals(&self) -> usize {
        self.lambda.len()
    }

    /// Largest positive increment of any coordinate along the grid.
    pub fn monotonicity_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 1..self.lambda.len() {
            for i in 0..self.lambda[k].len() {
                worst = worst.max(self.lambda[k][i] - self.lambda[k - 1][i]);
            }
        }
        worst
    }
}

/// Residuals of the optimality system for a (path, dual) pair.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub action: f64,
    /// Certified lower bound on the discrete minimal action: the endpoint
    /// pairing of the dual minus its duality corrections.
    pub dual_value: f64,
    /// `action - dual_value`; nonnegative up to evaluation tolerance.
    pub gap: f64,
    /// max over intervals and active edges of `|m - g_cell * grad(lambda)|`.
    pub velocity_residual: f64,
    /// max over non-jump interior nodes of `|H(rate, grad lambda)|`.
    pub hj_residual: f64,
    /// max over jump nodes of `max(|H_0(jump)|, |(jump, rho)|)`.
    pub jump_residual: f64,
    /// largest positive increment of any dual coordinate.
    pub monotonicity_violation: f64,
    /// stdev/mean of the per-interval energy profile.
    pub energy_drift: f64,
    /// Set when an endpoint has vanishing Poincare constant: the attainment
    /// theory behind the Hamilton-Jacobi certificate assumes positive gaps,
    /// so residuals are advisory.
    pub advisory: bool,
}

/// Solver options. `tol` bounds the scaled primal and optimality residuals;
/// `jump_abs` is the absolute floor of the jump detector.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub jump_abs: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { k: 64, tol: 1e-7, max_iter: 400_000, jump_abs: 1e-2 }
    }
}

impl SolveOptions {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }
}

/// A solved geodesic problem.
#[derive(Debug, Clone)]
pub struct GeodesicSolution {
    pub path: DiscretePath,
    pub dual: DualPath,
    pub report: CertificateReport,
    /// `W_g^2 = 2 * action` of the returned path.
    pub w_squared: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GeodesicSolution {
    pub fn distance(&self) -> f64 {
        self.w_squared.max(0.0).sqrt()
    }
}

/// Minimize the discretized action between `rho0` and `rho1` with `opts.k`
/// time intervals, extract the continuity multiplier as a dual potential,
/// gauge-normalize it and certify the pair.
///
/// Requires `C_g` finite (checked once per call) and `K >= 2`. Exhausting
/// `max_iter` returns the best iterate with `converged = false`.
pub fn solve_geodesic(
    graph: &WeightedGraph,
    g: &Mobility,
    rho0: &ProbVector,
    rho1: &ProbVector,
    opts: &SolveOptions,
) -> Result<GeodesicSolution> {
    if rho0.len() != graph.n() || rho1.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "solve_geodesic endpoints",
            expected: graph.n(),
            got: rho0.len().min(rho1.len()),
        });
    }
    if opts.k < 2 {
        return Err(Error::InvalidInput("K must be at least 2".into()));
    }
    c_g(g)?;

    let (mut path, mut dual, iterations, converged) = pdhg::minimize(graph, g, rho0, rho1, opts)?;
    hodge::restore_continuity(graph, g, &mut path)?;
    dual = normalize_dual(graph, g, &path, &dual, opts.jump_abs);
    let report = certify(graph, g, &path, &dual);
    let w_squared = match crate::energy::action(graph, g, &path) {
        ExtReal::Finite(a) => 2.0 * a,
        ExtReal::Infinite => f64::INFINITY,
    };
    Ok(GeodesicSolution { path, dual, report, w_squared, iterations, converged })
}
