//! Weighted graphs and the discrete calculus on them.
//!
//! A vector field is a skew-symmetric matrix supported on the edge set. The
//! gradient of a vertex function is `(grad phi)_ij = sqrt(w_ij) (phi_i - phi_j)`
//! and the divergence of a field is `div(m)_i = sum_j sqrt(w_ij) m_ji`, so that
//! `(grad phi, m) = -(phi, div m)` for the plain pairings. Weighting each edge
//! by the mobility `g(rho_i, rho_j)` gives the rho-inner product
//! `(v, w)_rho = 1/2 sum_(i,j) v_ij w_ij g_ij(rho)` and its adjoint divergence.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mobility::Mobility;
use crate::TAU_G;

/// Connected undirected graph with symmetric nonnegative edge weights.
///
/// Edges are stored once with `i < j`; pairs listed with zero weight are
/// dropped at construction time, so the edge set is exactly the positive
/// support of the weight matrix.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    omega: DMatrix<f64>,
    edges: Vec<(usize, usize)>,
    sqrt_w: Vec<f64>,
    incident: Vec<Vec<usize>>,
}

impl WeightedGraph {
    /// Build from a symmetric weight matrix with zero diagonal.
    pub fn from_weight_matrix(omega: DMatrix<f64>) -> Result<Self> {
        let n = omega.nrows();
        if n < 2 || omega.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "need a square weight matrix with n >= 2, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            if omega[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", i + 1)));
            }
            for j in (i + 1)..n {
                let w = omega[(i, j)];
                if w < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "negative weight {} on ({}, {})",
                        w,
                        i + 1,
                        j + 1
                    )));
                }
                if (omega[(i, j)] - omega[(j, i)]).abs() > 1e-12 * omega[(i, j)].abs().max(1.0) {
                    return Err(Error::InvalidGraph(format!(
                        "weights not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if w > 0.0 {
                    edges.push((i, j));
                }
            }
        }
        let sqrt_w: Vec<f64> = edges.iter().map(|&(i, j)| omega[(i, j)].sqrt()).collect();
        let mut incident = vec![Vec::new(); n];
        for (e, &(i, j)) in edges.iter().enumerate() {
            incident[i].push(e);
            incident[j].push(e);
        }
        let g = Self { n, omega, edges, sqrt_w, incident };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Build from an edge list with 0-based vertices; entries are symmetrized
    /// and zero-weight pairs dropped.
    pub fn from_edges(n: usize, list: &[(usize, usize, f64)]) -> Result<Self> {
        let mut omega = DMatrix::<f64>::zeros(n, n);
        for &(i, j, w) in list {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) out of range for n = {}",
                    i + 1,
                    j + 1,
                    n
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", i + 1)));
            }
            omega[(i, j)] = w;
            omega[(j, i)] = w;
        }
        Self::from_weight_matrix(omega)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &e in &self.incident[i] {
                let (a, b) = self.edges[e];
                let j = if a == i { b } else { a };
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Undirected edges, each listed once with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.omega[(i, j)]
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    /// `sqrt(w_e)` in edge order.
    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_w
    }

    /// Edge indices incident to vertex `i`.
    pub fn incident_edges(&self, i: usize) -> &[usize] {
        &self.incident[i]
    }

    /// The endpoint of edge `e` opposite to `i`.
    pub fn opposite(&self, e: usize, i: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == i {
            b
        } else {
            a
        }
    }

    /// Per-edge mobility values `g(rho_i, rho_j)` in edge order.
    pub fn edge_mobility(&self, g: &Mobility, rho: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|&(i, j)| g.eval(rho[i], rho[j])).collect()
    }

    fn check_len(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { context, expected: self.n, got: len });
        }
        Ok(())
    }
}

/// Skew-symmetric field supported on the edges of a graph; stores one value
/// per undirected edge, oriented from the smaller to the larger vertex index.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    n: usize,
    values: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl EdgeField {
    pub fn zeros(graph: &WeightedGraph) -> Self {
        Self { n: graph.n, values: vec![0.0; graph.num_edges()], edges: graph.edges.clone() }
    }

    /// Wrap per-edge values given in the graph's edge order.
    pub fn from_values(graph: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.num_edges() {
            return Err(Error::DimensionMismatch {
                context: "EdgeField::from_values",
                expected: graph.num_edges(),
                got: values.len(),
            });
        }
        Ok(Self { n: graph.n, values, edges: graph.edges.clone() })
    }

    /// Build from a full skew-symmetric matrix, validating support and symmetry.
    pub fn from_matrix(graph: &WeightedGraph, mat: &DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != graph.n || mat.ncols() != graph.n {
            return Err(Error::DimensionMismatch {
                context: "EdgeField::from_matrix",
                expected: graph.n,
                got: mat.nrows(),
            });
        }
        let mut on_edge = DMatrix::<bool>::from_element(graph.n, graph.n, false);
        for &(i, j) in &graph.edges {
            on_edge[(i, j)] = true;
            on_edge[(j, i)] = true;
        }
        for i in 0..graph.n {
            for j in 0..graph.n {
                let v = mat[(i, j)];
                if (v + mat[(j, i)]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "field is not skew-symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if v != 0.0 && !on_edge[(i, j)] {
                    return Err(Error::InvalidInput(format!(
                        "field has value off the edge set at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let values = graph.edges.iter().map(|&(i, j)| mat[(i, j)]).collect();
        Ok(Self { n: graph.n, values, edges: graph.edges.clone() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value on the oriented pair `(i, j)`; zero off the edge set.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if (a, b) == (i, j) {
                return self.values[e];
            }
            if (a, b) == (j, i) {
                return -self.values[e];
            }
        }
        0.0
    }

    /// Set the value on the unordered edge `{i, j}` as seen from `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if (a, b) == (i, j) {
                self.values[e] = v;
                return Ok(());
            }
            if (a, b) == (j, i) {
                self.values[e] = -v;
                return Ok(());
            }
        }
        Err(Error::InvalidInput(format!("({}, {}) is not an edge", i + 1, j + 1)))
    }

    /// Per-edge values in the graph's edge order (orientation `i < j`).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Expand to the full skew-symmetric matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(self.n, self.n);
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            m[(i, j)] = self.values[e];
            m[(j, i)] = -self.values[e];
        }
        m
    }
}

/// Discrete gradient: `(grad phi)_ij = sqrt(w_ij) (phi_i - phi_j)`.
pub fn gradient(graph: &WeightedGraph, phi: &[f64]) -> Result<EdgeField> {
    graph.check_len(phi.len(), "gradient")?;
    let values = graph
        .edges
        .iter()
        .zip(&graph.sqrt_w)
        .map(|(&(i, j), &sw)| sw * (phi[i] - phi[j]))
        .collect();
    Ok(EdgeField { n: graph.n, values, edges: graph.edges.clone() })
}

/// Plain divergence: `div(m)_i = sum_{j in N(i)} sqrt(w_ij) m_ji`. Entries sum
/// to zero by skew-symmetry.
pub fn divergence_g(graph: &WeightedGraph, m: &EdgeField) -> Result<Vec<f64>> {
    if m.n != graph.n || m.values.len() != graph.num_edges() {
        return Err(Error::DimensionMismatch {
            context: "divergence_g",
            expected: graph.num_edges(),
            got: m.values.len(),
        });
    }
    let mut div = vec![0.0; graph.n];
    for (e, &(i, j)) in graph.edges.iter().enumerate() {
        let flow = graph.sqrt_w[e] * m.values[e];
        // m_ji = -m_ij seen from i; m_ij seen from j.
        div[i] -= flow;
        div[j] += flow;
    }
    Ok(div)
}

/// Squared rho-weighted norm `||v||^2_rho = 1/2 sum_(i,j) v_ij^2 g(rho_i, rho_j)`,
/// i.e. one `v_e^2 g_e(rho)` term per undirected edge.
pub fn weighted_norm_sq(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    v: &EdgeField,
) -> Result<f64> {
    graph.check_len(rho.len(), "weighted_norm_sq")?;
    let mut acc = 0.0;
    for (e, &(i, j)) in graph.edges.iter().enumerate() {
        acc += v.values[e] * v.values[e] * g.eval(rho[i], rho[j]);
    }
    Ok(acc)
}

/// rho-weighted inner product of two fields.
pub fn weighted_inner(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    v: &EdgeField,
    w: &EdgeField,
) -> Result<f64> {
    graph.check_len(rho.len(), "weighted_inner")?;
    let mut acc = 0.0;
    for (e, &(i, j)) in graph.edges.iter().enumerate() {
        acc += v.values[e] * w.values[e] * g.eval(rho[i], rho[j]);
    }
    Ok(acc)
}

/// Weighted divergence `div_rho(v)_i = sum_j sqrt(w_ij) v_ji g_ij(rho)`, the
/// negative adjoint of the gradient for the rho-inner product.
pub fn divergence_rho(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    v: &EdgeField,
) -> Result<Vec<f64>> {
    graph.check_len(rho.len(), "divergence_rho")?;
    let mut div = vec![0.0; graph.n];
    for (e, &(i, j)) in graph.edges.iter().enumerate() {
        let flow = graph.sqrt_w[e] * v.values[e] * g.eval(rho[i], rho[j]);
        div[i] -= flow;
        div[j] += flow;
    }
    Ok(div)
}

/// Unweighted pairing of two fields, `(m, b) = 1/2 sum_(i,j) m_ij b_ij`.
pub fn field_inner(m: &EdgeField, b: &EdgeField) -> f64 {
    m.values.iter().zip(&b.values).map(|(a, c)| a * c).sum()
}

/// Edges where the mobility is above the positivity threshold.
pub fn active_edges(graph: &WeightedGraph, g: &Mobility, rho: &[f64]) -> Vec<bool> {
    graph.edges.iter().map(|&(i, j)| g.eval(rho[i], rho[j]) > TAU_G).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::Mobility;

    fn two_vertex(w: f64) -> WeightedGraph {
        WeightedGraph::from_edges(2, &[(0, 1, w)]).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let g = two_vertex(1.0);
        let f = gradient(&g, &[1.0, 0.0]).unwrap();
        assert_eq!(f.get(0, 1), 1.0);
        assert_eq!(f.get(1, 0), -1.0);

        // sqrt(4) * (3 - 1) = 4
        let g4 = two_vertex(4.0);
        let f = gradient(&g4, &[3.0, 1.0]).unwrap();
        assert_eq!(f.get(0, 1), 4.0);

        // constants are in the kernel
        let tri = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5)]).unwrap();
        let f = gradient(&tri, &[7.0, 7.0, 7.0]).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_examples() {
        let g = two_vertex(1.0);
        let mut m = EdgeField::zeros(&g);
        m.set(0, 1, 1.0).unwrap();
        let d = divergence_g(&g, &m).unwrap();
        assert_eq!(d, vec![-1.0, 1.0]);

        let z = EdgeField::zeros(&g);
        assert_eq!(divergence_g(&g, &z).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn divergence_sums_to_zero() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.7), (0, 3, 2.0)])
            .unwrap();
        let mut m = EdgeField::zeros(&g);
        m.set(0, 1, 0.3).unwrap();
        m.set(1, 2, -1.2).unwrap();
        m.set(2, 3, 0.9).unwrap();
        m.set(0, 3, 0.1).unwrap();
        let d = divergence_g(&g, &m).unwrap();
        assert!(d.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn weighted_norm_example() {
        let g = two_vertex(1.0);
        let mob = Mobility::Arithmetic;
        let mut v = EdgeField::zeros(&g);
        v.set(0, 1, 2.0).unwrap();
        let n = weighted_norm_sq(&g, &mob, &[0.5, 0.5], &v).unwrap();
        assert!((n - 2.0).abs() < 1e-15);
        let z = EdgeField::zeros(&g);
        assert_eq!(weighted_norm_sq(&g, &mob, &[0.5, 0.5], &z).unwrap(), 0.0);
    }

    #[test]
    fn divergence_rho_example() {
        let g = two_vertex(1.0);
        let mob = Mobility::Arithmetic;
        let mut v = EdgeField::zeros(&g);
        v.set(0, 1, 1.0).unwrap();
        let d = divergence_rho(&g, &mob, &[0.5, 0.5], &v).unwrap();
        assert!((d[0] + 0.5).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn adjointness_of_gradient_and_divergence() {
        let g = WeightedGraph::from_edges(5, &[
            (0, 1, 1.5),
            (1, 2, 0.3),
            (2, 3, 2.0),
            (3, 4, 1.0),
            (0, 4, 0.8),
            (1, 3, 0.25),
        ])
        .unwrap();
        let mob = Mobility::Logarithmic;
        let rho = [0.1, 0.3, 0.05, 0.35, 0.2];
        let phi = [0.2, -1.0, 3.0, 0.5, -0.7];
        let mut v = EdgeField::zeros(&g);
        for (e, val) in [(0, 0.4), (1, -0.9), (2, 1.1), (3, -0.2), (4, 0.6), (5, -1.4)] {
            v.values_mut()[e] = val;
        }
        // (grad phi, v)_rho + (phi, div_rho v) = 0
        let grad = gradient(&g, &phi).unwrap();
        let lhs = weighted_inner(&g, &mob, &rho, &grad, &v).unwrap();
        let div = divergence_rho(&g, &mob, &rho, &v).unwrap();
        let rhs: f64 = phi.iter().zip(&div).map(|(a, b)| a * b).sum();
        assert!((lhs + rhs).abs() < 1e-12, "residual {}", lhs + rhs);

        // unweighted integration by parts: (grad phi, m) = -(phi, div_G m)
        let lhs = field_inner(&grad, &v);
        let div = divergence_g(&g, &v).unwrap();
        let rhs: f64 = phi.iter().zip(&div).map(|(a, b)| a * b).sum();
        assert!((lhs + rhs).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_pairs_are_dropped() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 0.0)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let err = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Disconnected));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = two_vertex(1.0);
        assert!(gradient(&g, &[1.0]).is_err());
        assert!(weighted_norm_sq(&g, &Mobility::Arithmetic, &[1.0], &EdgeField::zeros(&g)).is_err());
    }
}
