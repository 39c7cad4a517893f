//! Riesz lift of vertex rates to minimal-norm edge fields, and the exact
//! continuity restoration applied to solver iterates.

use crate::error::{Error, Result};
use crate::graph::{gradient, EdgeField, WeightedGraph};
use crate::mobility::Mobility;
use crate::numerics::jacobi::solve_psd_pinv;
use crate::simplex::weighted_laplacian;
use crate::solver::DiscretePath;
use crate::TAU_G;

/// The minimal-`||.||_rho` field `w` with `h + div_rho(w) = 0`: solve
/// `L(rho) psi = h` on the zero-mean subspace and return `w = grad(psi)`.
///
/// Fails when `h` has a component in the kernel of `L(rho)` (vanishing
/// Poincare constant makes such rates unrepresentable).
pub fn hodge_lift(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    h: &[f64],
) -> Result<EdgeField> {
    if h.len() != graph.n() || rho.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "hodge_lift",
            expected: graph.n(),
            got: h.len().min(rho.len()),
        });
    }
    let sum: f64 = h.iter().sum();
    let scale = h.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    if sum.abs() > 1e-10 * scale {
        return Err(Error::InvalidInput(format!("rates must sum to zero, got {sum:.3e}")));
    }
    let l = weighted_laplacian(graph, g, rho);
    let psi = solve_psd_pinv(&l, h, 1e-10)
        .map_err(|res| Error::SingularLaplacian(format!("kernel residual {res:.3e}")))?;
    gradient(graph, &psi)
}

/// Replace each momentum row by the nearest (in a conductivity-weighted
/// metric) row satisfying the discrete continuity equation exactly, then zero
/// the momentum carried by dead edges.
///
/// Corrections are of the size of the incoming continuity residual, so a
/// nearly-feasible iterate moves by O(tol).
pub fn restore_continuity(
    graph: &WeightedGraph,
    g: &Mobility,
    path: &mut DiscretePath,
) -> Result<()> {
    let n = graph.n();
    for k in 0..path.intervals() {
        let ghat = path.cell_conductivities(graph, g, k);
        let gmax = ghat.iter().fold(0.0f64, |a, &x| a.max(x)).max(1e-9);

        // residual r_i = (rho^{k+1}-rho^k)/dt + div(m^k)
        let field = EdgeField::from_values(graph, path.m[k].clone())?;
        let div = crate::graph::divergence_g(graph, &field)?;
        let mut r = vec![0.0; n];
        let mut rmax = 0.0f64;
        for i in 0..n {
            r[i] = (path.rho[k + 1][i] - path.rho[k][i]) / path.dt + div[i];
            rmax = rmax.max(r[i].abs());
        }
        if rmax > 0.0 {
            // Remove the (numerically tiny) mean of r; both rho rows have unit mass.
            let mean = r.iter().sum::<f64>() / n as f64;
            for x in r.iter_mut() {
                *x -= mean;
            }
            // div(c grad psi) = -L_c psi, so L_c psi = r gives div(delta) = -r.
            // Escalate the conductivity floor until the weighted Laplacian
            // can represent the residual: an unconverged iterate may need
            // flux across an almost-dead cut.
            let mut solved = None;
            for rel_floor in [1e-9, 1e-5, 1e-2, 1.0] {
                let weights: Vec<f64> = ghat.iter().map(|&x| x.max(rel_floor * gmax)).collect();
                let mut l = nalgebra::DMatrix::<f64>::zeros(n, n);
                for (e, &(i, j)) in graph.edges().iter().enumerate() {
                    let w = graph.weight(i, j) * weights[e];
                    l[(i, j)] -= w;
                    l[(j, i)] -= w;
                    l[(i, i)] += w;
                    l[(j, j)] += w;
                }
                if let Ok(psi) = solve_psd_pinv(&l, &r, 1e-9) {
                    solved = Some((weights, psi));
                    break;
                }
            }
            let (weights, psi) = solved.ok_or_else(|| {
                Error::SingularLaplacian("continuity residual is not representable".into())
            })?;
            for (e, &(i, j)) in graph.edges().iter().enumerate() {
                let delta = weights[e] * graph.sqrt_weights()[e] * (psi[i] - psi[j]);
                path.m[k][e] += delta;
            }
        }
        for (e, me) in path.m[k].iter_mut().enumerate() {
            if ghat[e] <= TAU_G && me.abs() <= 1e-9 {
                *me = 0.0;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::divergence_rho;
    use crate::simplex::ProbVector;

    #[test]
    fn two_vertex_example() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let mob = Mobility::Arithmetic;
        let w = hodge_lift(&g, &mob, &[0.5, 0.5], &[-1.0, 1.0]).unwrap();
        assert!((w.get(0, 1) - -2.0).abs() < 1e-12);
        let div = divergence_rho(&g, &mob, &[0.5, 0.5], &w).unwrap();
        assert!((div[0] - 1.0).abs() < 1e-12 && (div[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_gives_zero_field() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let w = hodge_lift(&g, &Mobility::Harmonic, &[0.2, 0.5, 0.3], &[0.0, 0.0, 0.0]).unwrap();
        assert!(w.values().iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn random_rates_are_lifted_exactly() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (0, 3, 1.5)])
            .unwrap();
        let mob = Mobility::Logarithmic;
        let rho = [0.3, 0.2, 0.25, 0.25];
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..50 {
            let mut h: Vec<f64> = (0..4).map(|_| next()).collect();
            let mean = h.iter().sum::<f64>() / 4.0;
            h.iter_mut().for_each(|x| *x -= mean);
            let w = hodge_lift(&g, &mob, &rho, &h).unwrap();
            let div = divergence_rho(&g, &mob, &rho, &w).unwrap();
            for i in 0..4 {
                assert!((div[i] + h[i]).abs() < 1e-10, "residual {}", div[i] + h[i]);
            }
        }
    }

    #[test]
    fn lift_is_minimal_norm_on_a_cycle() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let mob = Mobility::Arithmetic;
        let rho = ProbVector::uniform(3);
        let h = [-0.4, 0.1, 0.3];
        let w = hodge_lift(&g, &mob, &rho, &h).unwrap();
        let base = crate::graph::weighted_norm_sq(&g, &mob, &rho, &w).unwrap();
        // adding any multiple of the divergence-free cycle field only grows the norm
        for amp in [-0.5, -0.1, 0.1, 0.5] {
            let mut v = w.clone();
            v.set(0, 1, w.get(0, 1) + amp).unwrap();
            v.set(1, 2, w.get(1, 2) + amp).unwrap();
            v.set(2, 0, w.get(2, 0) + amp).unwrap();
            let div = divergence_rho(&g, &mob, &rho, &v).unwrap();
            for i in 0..3 {
                assert!((div[i] + h[i]).abs() < 1e-10);
            }
            let norm = crate::graph::weighted_norm_sq(&g, &mob, &rho, &v).unwrap();
            assert!(norm >= base - 1e-12);
        }
    }

    #[test]
    fn unrepresentable_rate_is_reported() {
        // harmonic mobility with an empty vertex: edge (1,2) and (1,3) are dead,
        // so a rate moving mass out of vertex 1 has no lift.
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let err = hodge_lift(&g, &Mobility::Harmonic, &[0.0, 0.5, 0.5], &[-0.5, 0.25, 0.25]);
        assert!(matches!(err, Err(Error::SingularLaplacian(_))));
        // sum check comes first
        let err = hodge_lift(&g, &Mobility::Arithmetic, &[0.2, 0.4, 0.4], &[1.0, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }
}
