//! The fixed three-vertex boundary geodesic: on the path graph 1-2-3 with
//! unit weights (the 1-3 pair carries weight zero) and the arithmetic
//! mobility, the minimizer from (0,0,1) to (0,1/2,1/2) keeps vertex 1 empty,
//! so the problem reduces to a two-vertex transport on the 2-3 edge with
//! `W^2 = 1/2`, while the g-connected components differ between the
//! endpoints.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::mobility::Mobility;
use crate::oracle::two_vertex::two_vertex_geodesic;
use crate::solver::{DiscretePath, DualPath};

/// The graph of the boundary example: edges (1,2) and (2,3) with weight 1.
pub fn boundary_example_graph() -> WeightedGraph {
    WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
}

/// Reference geodesic for the boundary example. Only the arithmetic mobility
/// and the endpoints (0,0,1) -> (0,1/2,1/2) of the construction are accepted.
pub fn three_vertex_boundary(
    g: &Mobility,
    rho0: &[f64],
    rho1: &[f64],
    k: usize,
) -> Result<(DiscretePath, DualPath, f64)> {
    if !matches!(g, Mobility::Arithmetic) {
        return Err(Error::InvalidInput(
            "the boundary example is stated for the arithmetic mobility".into(),
        ));
    }
    let want0 = [0.0, 0.0, 1.0];
    let want1 = [0.0, 0.5, 0.5];
    if rho0 != want0 || rho1 != want1 {
        return Err(Error::InvalidInput(
            "the boundary example runs from (0,0,1) to (0,1/2,1/2)".into(),
        ));
    }

    // Reduce to the 2-3 edge: vertex-3 mass goes 1 -> 1/2.
    let reduced = two_vertex_geodesic(g, 1.0, 1.0, 0.5, k)?;
    let dt = reduced.path.dt;
    let rho: Vec<Vec<f64>> =
        reduced.path.rho.iter().map(|r| vec![0.0, r[1], r[0]]).collect();
    // Edge order of the 3-vertex graph: (1,2) then (2,3); mass moves 3 -> 2.
    // Vertex-3 continuity: d rho_3/dt + sqrt(w) m_23 = 0.
    let m: Vec<Vec<f64>> = reduced
        .path
        .m
        .iter()
        .zip(reduced.path.rho.windows(2))
        .map(|(_, w)| {
            let d3 = w[1][0] - w[0][0];
            vec![0.0, -d3 / dt]
        })
        .collect();
    let path = DiscretePath { dt, rho, m };

    // Lift the dual: vertex 1 rides with vertex 2 (the 1-2 edge stays active
    // with zero momentum, so lambda_1 = lambda_2 keeps the velocity relation).
    let lambda: Vec<Vec<f64>> =
        reduced.dual.lambda.iter().map(|row| vec![row[1], row[1], row[0]]).collect();
    let dual = crate::solver::certificate::finalize_dual(dt, lambda, 1e-2);
    let graph = boundary_example_graph();
    let dual = crate::solver::certificate::normalize_dual(&graph, g, &path, &dual, 1e-2);

    Ok((path, dual, reduced.w_squared))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{g_components, ProbVector};

    #[test]
    fn stated_instance_has_w_squared_one_half() {
        let g = Mobility::Arithmetic;
        let (path, _dual, w2) =
            three_vertex_boundary(&g, &[0.0, 0.0, 1.0], &[0.0, 0.5, 0.5], 64).unwrap();
        assert!((w2 - 0.5).abs() < 1e-10, "W^2 = {w2}");
        path.validate(&boundary_example_graph()).unwrap();
        // vertex 1 stays exactly empty
        assert!(path.rho.iter().all(|r| r[0] == 0.0));
    }

    #[test]
    fn component_partition_changes_along_the_path() {
        let g = Mobility::Arithmetic;
        let (path, _dual, _) =
            three_vertex_boundary(&g, &[0.0, 0.0, 1.0], &[0.0, 0.5, 0.5], 16).unwrap();
        let graph = boundary_example_graph();
        let at0 = g_components(&graph, &g, &ProbVector::new(path.rho[0].clone()).unwrap());
        let at1 =
            g_components(&graph, &g, &ProbVector::new(path.rho.last().unwrap().clone()).unwrap());
        assert_eq!(at0.components, vec![vec![1, 2]]);
        assert_eq!(at0.unassigned, vec![0]);
        assert_eq!(at1.components, vec![vec![0, 1, 2]]);
        assert_ne!(at0, at1);
    }

    #[test]
    fn other_instances_are_rejected() {
        assert!(three_vertex_boundary(&Mobility::Harmonic, &[0.0, 0.0, 1.0], &[0.0, 0.5, 0.5], 8)
            .is_err());
        assert!(three_vertex_boundary(
            &Mobility::Arithmetic,
            &[0.0, 1.0, 0.0],
            &[0.0, 0.5, 0.5],
            8
        )
        .is_err());
    }
}
