//! Command line front end: geodesic distances, trajectories, Poincare
//! constants, certificate verification, reference oracles and mobility
//! audits.
//!
//! Exit codes: 0 on success, 2 on validation failure (bad files, dimension
//! mismatches, divergent mobility constant), 3 when the solver exhausts its
//! iteration budget without converging.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use otgraph::io;
use otgraph::mobility::{audit, Mobility};
use otgraph::oracle;
use otgraph::simplex::{g_components, poincare, ProbVector};
use otgraph::solver::{certify, solve_geodesic, SolveOptions};

#[derive(Parser)]
#[command(name = "otgraph", version, about = "Geodesics of minimal action on graph probability simplexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Graph JSON file: { "n": 3, "edges": [[1,2,1.0], ...] }, 1-based vertices
    #[arg(long)]
    graph: PathBuf,
    /// Mobility: arithmetic | logarithmic | harmonic
    #[arg(long, default_value = "arithmetic")]
    mobility: String,
    /// Start distribution: inline JSON array or a path to one
    #[arg(long)]
    rho0: String,
    /// End distribution: inline JSON array or a path to one
    #[arg(long)]
    rho1: String,
    /// Number of time intervals
    #[arg(long = "K", default_value_t = 64)]
    k: usize,
    /// Convergence tolerance on the scaled residuals
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Iteration budget
    #[arg(long, default_value_t = 400_000)]
    max_iter: usize,
    /// Absolute floor of the dual jump detector
    #[arg(long, default_value_t = 1e-2)]
    jump_abs: f64,
    /// Output directory for reports and trajectories
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed recorded in the report (consumed by randomized subcommands)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Compute W_g between two distributions and write a report
    Dist(ProblemArgs),
    /// Solve the geodesic and write trajectory, momentum, dual and report files
    Geodesic(ProblemArgs),
    /// Poincare constant and g-connected components of a distribution
    Poincare {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "arithmetic")]
        mobility: String,
        /// Distribution: inline JSON array or a path to one
        #[arg(long)]
        rho0: String,
    },
    /// Re-verify a trajectory/momentum/dual triple written by `geodesic`
    Certify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "arithmetic")]
        mobility: String,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        momentum: PathBuf,
        #[arg(long)]
        dual: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        jump_abs: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Reference geodesics with independently computed optima
    Oracle {
        /// two-vertex | boundary3 | ode
        #[arg(long = "case")]
        case: String,
        #[arg(long, default_value = "arithmetic")]
        mobility: String,
        /// Edge weight of the two-vertex graph
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Vertex-1 masses for the two-vertex case
        #[arg(long, default_value_t = 1.0)]
        rho0_mass: f64,
        #[arg(long, default_value_t = 0.0)]
        rho1_mass: f64,
        #[arg(long = "K", default_value_t = 64)]
        k: usize,
        /// Half-width of the ODE window
        #[arg(long, default_value_t = 0.05)]
        delta1: f64,
        /// ODE integrator step
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Randomized verification of the mobility hypotheses, emitted as JSON
    Audit {
        #[arg(long, default_value = "arithmetic")]
        mobility: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Error type distinguishing validation failures (exit 2) from solver
/// non-convergence (exit 3).
enum RunError {
    Validation(anyhow::Error),
    NonConvergence,
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Validation(e)
    }
}

impl From<otgraph::Error> for RunError {
    fn from(e: otgraph::Error) -> Self {
        RunError::Validation(e.into())
    }
}

fn load_problem(args: &ProblemArgs) -> Result<(otgraph::WeightedGraph, Mobility, ProbVector, ProbVector), RunError> {
    let graph = io::load_graph(&args.graph)
        .with_context(|| format!("loading graph {}", args.graph.display()))?;
    let mobility = Mobility::from_name(&args.mobility)?;
    let rho0 = ProbVector::new(io::parse_distribution(&args.rho0)?)?;
    let rho1 = ProbVector::new(io::parse_distribution(&args.rho1)?)?;
    if rho0.len() != graph.n() || rho1.len() != graph.n() {
        return Err(anyhow!(
            "distribution length {} does not match graph size {}",
            rho0.len().max(rho1.len()),
            graph.n()
        )
        .into());
    }
    Ok((graph, mobility, rho0, rho1))
}

fn ensure_out(dir: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn solve(args: &ProblemArgs, write_paths: bool) -> Result<bool, RunError> {
    let (graph, mobility, rho0, rho1) = load_problem(args)?;
    ensure_out(&args.out)?;
    let opts = SolveOptions {
        k: args.k,
        tol: args.tol,
        max_iter: args.max_iter,
        jump_abs: args.jump_abs,
    };
    let sol = solve_geodesic(&graph, &mobility, &rho0, &rho1, &opts)?;
    let report = io::ReportJson::from_certificate(&sol.report, sol.converged, sol.iterations, args.seed);
    io::write_report_json(&args.out.join("report.json"), &report)?;
    if write_paths {
        io::write_trajectory_csv(&args.out.join("trajectory.csv"), &sol.path)?;
        io::write_momentum_csv(&args.out.join("momentum.csv"), &graph, &sol.path)?;
        io::write_dual_csv(&args.out.join("dual.csv"), &sol.dual)?;
    }
    println!("W_g = {}", io::fmt_value(sol.distance()));
    println!("W_g^2 = {}", io::fmt_value(sol.w_squared));
    println!(
        "gap = {} (converged: {}, iterations: {})",
        io::fmt_value(sol.report.gap),
        sol.converged,
        sol.iterations
    );
    Ok(sol.converged)
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Dist(args) => {
            if !solve(&args, false)? {
                return Err(RunError::NonConvergence);
            }
        }
        Command::Geodesic(args) => {
            if !solve(&args, true)? {
                return Err(RunError::NonConvergence);
            }
        }
        Command::Poincare { graph, mobility, rho0 } => {
            let graph = io::load_graph(&graph)?;
            let mobility = Mobility::from_name(&mobility)?;
            let rho = ProbVector::new(io::parse_distribution(&rho0)?)?;
            if rho.len() != graph.n() {
                return Err(anyhow!("distribution length does not match graph size").into());
            }
            let gamma = poincare(&graph, &mobility, &rho);
            let parts = g_components(&graph, &mobility, &rho);
            println!("gamma_P = {}", io::fmt_value(gamma));
            let comps: Vec<Vec<usize>> = parts
                .components
                .iter()
                .map(|c| c.iter().map(|v| v + 1).collect())
                .collect();
            let unassigned: Vec<usize> = parts.unassigned.iter().map(|v| v + 1).collect();
            println!("components = {}", serde_json::to_string(&comps).unwrap());
            println!("unassigned = {}", serde_json::to_string(&unassigned).unwrap());
            if !parts.isolated_mass.is_empty() {
                let flagged: Vec<usize> = parts.isolated_mass.iter().map(|v| v + 1).collect();
                println!("isolated_mass = {}", serde_json::to_string(&flagged).unwrap());
            }
        }
        Command::Certify { graph, mobility, trajectory, momentum, dual, jump_abs, out } => {
            let graph = io::load_graph(&graph)?;
            let mobility = Mobility::from_name(&mobility)?;
            let path = io::read_path_csv(&trajectory, &momentum)?;
            path.validate(&graph)?;
            let dual = io::read_dual_csv(&dual, jump_abs)?;
            if dual.intervals() != path.intervals() {
                return Err(anyhow!(
                    "dual has {} rows for {} intervals",
                    dual.intervals(),
                    path.intervals()
                )
                .into());
            }
            let report = certify(&graph, &mobility, &path, &dual);
            ensure_out(&out)?;
            let json = io::ReportJson::from_certificate(&report, true, 0, 0);
            io::write_report_json(&out.join("report.json"), &json)?;
            println!("action = {}", io::fmt_value(report.action));
            println!("dual_value = {}", io::fmt_value(report.dual_value));
            println!("gap = {}", io::fmt_value(report.gap));
        }
        Command::Oracle { case, mobility, omega, rho0_mass, rho1_mass, k, delta1, step, out } => {
            let mobility = Mobility::from_name(&mobility)?;
            ensure_out(&out)?;
            match case.as_str() {
                "two-vertex" => {
                    let r = oracle::two_vertex_geodesic(&mobility, omega, rho0_mass, rho1_mass, k)?;
                    let graph = otgraph::WeightedGraph::from_edges(2, &[(0, 1, omega)])?;
                    io::write_trajectory_csv(&out.join("trajectory.csv"), &r.path)?;
                    io::write_momentum_csv(&out.join("momentum.csv"), &graph, &r.path)?;
                    io::write_dual_csv(&out.join("dual.csv"), &r.dual)?;
                    let report = certify(&graph, &mobility, &r.path, &r.dual);
                    io::write_report_json(
                        &out.join("report.json"),
                        &io::ReportJson::from_certificate(&report, true, 0, 0),
                    )?;
                    println!("W_g^2 = {}", io::fmt_value(r.w_squared));
                    println!("C = {}", io::fmt_value(r.c));
                }
                "boundary3" => {
                    let (path, dual, w2) = oracle::three_vertex_boundary(
                        &mobility,
                        &[0.0, 0.0, 1.0],
                        &[0.0, 0.5, 0.5],
                        k,
                    )?;
                    let graph =
                        otgraph::WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)])?;
                    io::write_trajectory_csv(&out.join("trajectory.csv"), &path)?;
                    io::write_momentum_csv(&out.join("momentum.csv"), &graph, &path)?;
                    io::write_dual_csv(&out.join("dual.csv"), &dual)?;
                    let report = certify(&graph, &mobility, &path, &dual);
                    io::write_report_json(
                        &out.join("report.json"),
                        &io::ReportJson::from_certificate(&report, true, 0, 0),
                    )?;
                    println!("W_g^2 = {}", io::fmt_value(w2));
                }
                "ode" => {
                    let r = oracle::ode_boundary_geodesic(delta1, step)?;
                    let graph =
                        otgraph::WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)])?;
                    io::write_trajectory_csv(&out.join("trajectory.csv"), &r.path)?;
                    io::write_momentum_csv(&out.join("momentum.csv"), &graph, &r.path)?;
                    io::write_dual_csv(&out.join("dual.csv"), &r.dual)?;
                    println!("delta1 = {}", io::fmt_value(r.delta1));
                    println!("action = {}", io::fmt_value(r.action));
                    println!("dual_value = {}", io::fmt_value(r.dual_value));
                    println!("conserved_drift = {}", io::fmt_value(r.conserved_drift));
                    println!("hamiltonian_residual = {}", io::fmt_value(r.hamiltonian_residual));
                    println!("hj_residual = {}", io::fmt_value(r.hj_residual));
                }
                other => {
                    return Err(anyhow!(
                        "unknown oracle case `{other}` (two-vertex | boundary3 | ode)"
                    )
                    .into())
                }
            }
        }
        Command::Audit { mobility, samples, seed, out } => {
            let mobility = Mobility::from_name(&mobility)?;
            let report = audit(&mobility, samples, seed);
            let text = serde_json::to_string_pretty(&report).unwrap();
            match out {
                Some(path) => std::fs::write(path, text + "\n").map_err(|e| anyhow!(e))?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(RunError::Validation(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
        Err(RunError::NonConvergence) => {
            eprintln!("solver did not converge within the iteration budget");
            std::process::exit(3);
        }
    }
}
