//! End-to-end solver checks against the closed-form reference geodesics.

use otgraph::mobility::Mobility;
use otgraph::simplex::ProbVector;
use otgraph::solver::{solve_geodesic, SolveOptions};
use otgraph::WeightedGraph;

fn two_vertex(w: f64) -> WeightedGraph {
    WeightedGraph::from_edges(2, &[(0, 1, w)]).unwrap()
}

#[test]
fn two_vertex_arithmetic_full_transport() {
    let g = two_vertex(1.0);
    let r0 = ProbVector::new(vec![1.0, 0.0]).unwrap();
    let r1 = ProbVector::new(vec![0.0, 1.0]).unwrap();
    let opts = SolveOptions::with_k(64);
    let sol = solve_geodesic(&g, &Mobility::Arithmetic, &r0, &r1, &opts).unwrap();
    println!(
        "W^2 = {} (expect 2), converged = {} in {} iters\nreport: {:?}",
        sol.w_squared, sol.converged, sol.iterations, sol.report
    );
    assert!((sol.w_squared - 2.0).abs() < 1e-3, "W^2 = {}", sol.w_squared);
    assert!(sol.converged);
    sol.path.validate(&g).unwrap();
    assert!(sol.report.gap.abs() <= 1e-3 * sol.report.action.max(1e-3));
    assert!(sol.report.velocity_residual < 1e-4);
    assert!(sol.report.monotonicity_violation < 1e-6);
}

#[test]
fn two_vertex_harmonic_full_transport() {
    let g = two_vertex(1.0);
    let r0 = ProbVector::new(vec![1.0, 0.0]).unwrap();
    let r1 = ProbVector::new(vec![0.0, 1.0]).unwrap();
    let opts = SolveOptions::with_k(64);
    let sol = solve_geodesic(&g, &Mobility::Harmonic, &r0, &r1, &opts).unwrap();
    let expect = std::f64::consts::PI.powi(2);
    println!(
        "W^2 = {} (expect {expect}), converged = {} in {} iters\nreport: {:?}",
        sol.w_squared, sol.converged, sol.iterations, sol.report
    );
    assert!((sol.w_squared - expect).abs() < 1e-3, "W^2 = {}", sol.w_squared);
}

#[test]
fn equal_endpoints_zero_path() {
    let g = two_vertex(2.0);
    let r = ProbVector::new(vec![0.3, 0.7]).unwrap();
    let opts = SolveOptions::with_k(8);
    let sol = solve_geodesic(&g, &Mobility::Logarithmic, &r, &r, &opts).unwrap();
    assert!(sol.w_squared.abs() <= 1e-12, "W^2 = {}", sol.w_squared);
}

#[test]
fn boundary_three_vertex_instance() {
    let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    let r0 = ProbVector::new(vec![0.0, 0.0, 1.0]).unwrap();
    let r1 = ProbVector::new(vec![0.0, 0.5, 0.5]).unwrap();
    let opts = SolveOptions::with_k(64);
    let sol = solve_geodesic(&g, &Mobility::Arithmetic, &r0, &r1, &opts).unwrap();
    let max_rho1 = sol.path.rho.iter().map(|r| r[0]).fold(0.0f64, f64::max);
    println!(
        "W^2 = {} (expect 0.5), max rho_1 = {max_rho1:.3e}, iters {}, report {:?}",
        sol.w_squared, sol.iterations, sol.report
    );
    assert!((sol.w_squared - 0.5).abs() < 2e-3, "W^2 = {}", sol.w_squared);
    assert!(max_rho1 <= 1e-3, "max rho_1 = {max_rho1}");
}

#[test]
fn random_interior_instance_certifies() {
    let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 0.7), (2, 3, 1.3), (0, 3, 0.9)])
        .unwrap();
    let r0 = ProbVector::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let r1 = ProbVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let opts = SolveOptions::with_k(64);
    let sol = solve_geodesic(&g, &Mobility::Arithmetic, &r0, &r1, &opts).unwrap();
    println!(
        "W^2 = {}, converged = {} in {} iters\nreport: {:?}",
        sol.w_squared, sol.converged, sol.iterations, sol.report
    );
    assert!(sol.converged);
    assert!(sol.report.gap <= 1e-3 * sol.report.action);
    assert!(sol.report.gap >= -1e-9);
    assert!(sol.report.velocity_residual <= 1e-4);
    assert!(sol.report.monotonicity_violation <= 1e-6);
    assert!(sol.report.energy_drift <= 1e-2);
}
