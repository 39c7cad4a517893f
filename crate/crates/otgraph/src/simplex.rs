//! Probability vectors on the vertex set, g-connected components, and the
//! Poincare function.
//!
//! `gamma_P(rho)` is the infimum of the Dirichlet form
//! `1/2 sum_(i,j) g_ij(rho) w_ij (b_i - b_j)^2` over zero-mean unit vectors
//! `b`, i.e. the second-smallest eigenvalue of the rho-weighted Laplacian.
//! It is positive exactly when the whole vertex set forms a single
//! g-connected component.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{gradient, weighted_norm_sq, WeightedGraph};
use crate::mobility::Mobility;
use crate::numerics::jacobi::symmetric_eigen;
use crate::TAU_G;

/// Point of the probability simplex over the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    rho: Vec<f64>,
}

impl ProbVector {
    /// Validate nonnegativity and unit mass (tolerance 1e-12 on the sum;
    /// negative entries beyond -1e-12 are rejected, smaller ones clamped).
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        let mut rho = rho;
        for (i, x) in rho.iter_mut().enumerate() {
            if *x < -1e-12 {
                return Err(Error::InvalidProbability(format!(
                    "entry {} is negative ({})",
                    i + 1,
                    x
                )));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = rho.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbability(format!("mass sums to {sum}")));
        }
        Ok(Self { rho })
    }

    pub fn uniform(n: usize) -> Self {
        Self { rho: vec![1.0 / n as f64; n] }
    }

    /// Wrap without validation; for internal iterates already on the simplex.
    pub(crate) fn from_unchecked(rho: Vec<f64>) -> Self {
        Self { rho }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rho
    }

    pub fn get(&self, i: usize) -> f64 {
        self.rho[i]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.rho
    }

    /// True when every coordinate stays above the boundary threshold.
    pub fn is_interior(&self) -> bool {
        self.rho.iter().all(|&x| x > TAU_G)
    }
}

impl std::ops::Deref for ProbVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.rho
    }
}

/// Partition of the vertices into g-connected components. Vertices with no
/// incident edge of positive mobility belong to no component and are listed
/// as unassigned; those of them that still carry mass are flagged separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPartition {
    pub components: Vec<Vec<usize>>,
    pub unassigned: Vec<usize>,
    /// Unassigned vertices with positive mass (cannot occur for the builtin
    /// mobilities, which are positive whenever both endpoints carry mass).
    pub isolated_mass: Vec<usize>,
}

impl ComponentPartition {
    /// True when the partition is the single component covering all vertices.
    pub fn is_single_full(&self, n: usize) -> bool {
        self.unassigned.is_empty() && self.components.len() == 1 && self.components[0].len() == n
    }
}

fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// g-connected components of `rho`: union-find over the edges with
/// `g(rho_i, rho_j)` above the positivity threshold.
pub fn g_components(graph: &WeightedGraph, g: &Mobility, rho: &ProbVector) -> ComponentPartition {
    let n = graph.n();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut linked = vec![false; n];
    for &(i, j) in graph.edges() {
        if g.eval(rho.get(i), rho.get(j)) > TAU_G {
            linked[i] = true;
            linked[j] = true;
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    let mut unassigned = Vec::new();
    let mut isolated_mass = Vec::new();
    for i in 0..n {
        if linked[i] {
            groups.entry(find(&mut parent, i)).or_default().push(i);
        } else {
            unassigned.push(i);
            if rho.get(i) > TAU_G {
                isolated_mass.push(i);
            }
        }
    }
    let mut components: Vec<Vec<usize>> = groups.into_values().collect();
    components.sort_by_key(|c| c[0]);
    ComponentPartition { components, unassigned, isolated_mass }
}

/// The rho-weighted graph Laplacian `L(rho)` with `L_ij = -w_ij g_ij(rho)`
/// off the diagonal.
pub fn weighted_laplacian(graph: &WeightedGraph, g: &Mobility, rho: &[f64]) -> DMatrix<f64> {
    let n = graph.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(i, j) in graph.edges() {
        let w = graph.weight(i, j) * g.eval(rho[i], rho[j]);
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    l
}

/// The Poincare function `gamma_P(rho)`: second-smallest eigenvalue of
/// `L(rho)`, computed with the dense Jacobi eigensolver.
pub fn poincare(graph: &WeightedGraph, g: &Mobility, rho: &ProbVector) -> f64 {
    let l = weighted_laplacian(graph, g, rho.as_slice());
    let eig = symmetric_eigen(&l);
    eig.values[1].max(0.0)
}

/// Poincare function together with the Fiedler direction attaining it.
pub fn poincare_with_vector(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &ProbVector,
) -> (f64, Vec<f64>) {
    let l = weighted_laplacian(graph, g, rho.as_slice());
    let eig = symmetric_eigen(&l);
    let v = eig.vectors.column(1).iter().copied().collect();
    (eig.values[1].max(0.0), v)
}

/// Residual of the Poincare inequality for a potential `lambda`:
/// `||grad lambda~||^2_rho - gamma_P(rho) ||lambda~||^2` after centering
/// `lambda~ = lambda - mean(lambda)`. Nonnegative up to eigensolver rounding.
pub fn poincare_inequality_check(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &ProbVector,
    lambda: &[f64],
) -> Result<f64> {
    if lambda.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "poincare_inequality_check",
            expected: graph.n(),
            got: lambda.len(),
        });
    }
    let mean = lambda.iter().sum::<f64>() / lambda.len() as f64;
    let centered: Vec<f64> = lambda.iter().map(|&x| x - mean).collect();
    let grad = gradient(graph, &centered)?;
    let lhs = weighted_norm_sq(graph, g, rho.as_slice(), &grad)?;
    let norm_sq: f64 = centered.iter().map(|&x| x * x).sum();
    Ok(lhs - poincare(graph, g, rho) * norm_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_example_graph() -> WeightedGraph {
        // 3 vertices, edges (1,2) and (2,3) of weight 1; the (1,3) pair has
        // weight zero and is dropped.
        WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 0.0)]).unwrap()
    }

    #[test]
    fn components_on_the_boundary_example() {
        let g = boundary_example_graph();
        let mob = Mobility::Arithmetic;

        let rho = ProbVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let parts = g_components(&g, &mob, &rho);
        assert_eq!(parts.components, vec![vec![1, 2]]);
        assert_eq!(parts.unassigned, vec![0]);
        assert!(parts.isolated_mass.is_empty());

        let rho = ProbVector::new(vec![0.0, 0.5, 0.5]).unwrap();
        let parts = g_components(&g, &mob, &rho);
        assert_eq!(parts.components, vec![vec![0, 1, 2]]);
        assert!(parts.unassigned.is_empty());

        // interior distributions on a connected graph form one component
        let rho = ProbVector::uniform(3);
        assert!(g_components(&g, &mob, &rho).is_single_full(3));
    }

    #[test]
    fn poincare_two_vertex_uniform() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let rho = ProbVector::uniform(2);
        let gp = poincare(&g, &Mobility::Arithmetic, &rho);
        assert!((gp - 1.0).abs() < 1e-12, "gamma_P = {gp}");
    }

    #[test]
    fn poincare_vanishes_when_a_vertex_decouples() {
        let g = boundary_example_graph();
        let rho = ProbVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let gp = poincare(&g, &Mobility::Arithmetic, &rho);
        assert!(gp.abs() < 1e-12, "gamma_P = {gp}");
        // positivity iff single full component
        let parts = g_components(&g, &Mobility::Arithmetic, &rho);
        assert!(!parts.is_single_full(3));
    }

    #[test]
    fn poincare_inequality_residual() {
        let g = boundary_example_graph();
        let mob = Mobility::Arithmetic;
        let rho = ProbVector::new(vec![0.2, 0.5, 0.3]).unwrap();

        // constant lambda: both sides vanish
        let r = poincare_inequality_check(&g, &mob, &rho, &[3.0, 3.0, 3.0]).unwrap();
        assert!(r.abs() < 1e-14);

        // Fiedler vector: equality up to eigensolver tolerance
        let (_, fiedler) = poincare_with_vector(&g, &mob, &rho);
        let r = poincare_inequality_check(&g, &mob, &rho, &fiedler).unwrap();
        assert!(r.abs() < 1e-10, "residual {r}");
    }

    #[test]
    fn isolated_positive_mass_is_flagged() {
        // custom mobility: zero as soon as either argument is below 0.2,
        // so vertex 0 keeps mass but loses all its edges.
        let mob = Mobility::Custom(std::sync::Arc::new(crate::mobility::CustomMobility {
            name: "thresholded".into(),
            eval: std::sync::Arc::new(|r, s| if r < 0.2 || s < 0.2 { 0.0 } else { 0.5 * (r + s) }),
            partial1: None,
        }));
        let g = boundary_example_graph();
        let rho = ProbVector::new(vec![0.1, 0.45, 0.45]).unwrap();
        let parts = g_components(&g, &mob, &rho);
        assert_eq!(parts.unassigned, vec![0]);
        assert_eq!(parts.isolated_mass, vec![0]);
    }
}
