//! Gauge normalization of dual potentials and optimality certification.
//!
//! The certified lower bound on the discrete minimal action is the
//! Lagrangian dual value of the discretized problem,
//!
//! ```text
//! q(lambda) = (lambda^{K-1}, rho^K) - (lambda^0, rho^0) - dt * B(lambda),
//! B(lambda) = sup over interior simplex rows p^1..p^{K-1} of
//!     sum_{k=1}^{K-1} (a^k, p^k)
//!   + sum_{k=0}^{K-1} 1/2 sum_e (grad lambda^k)_e^2 g_e((p^k + p^{k+1})/2),
//! ```
//!
//! with `p^0, p^K` pinned at the path endpoints and `a^k` the node rates.
//! The ingredients are an Abel summation of the endpoint pairing, the partial
//! Legendre inequality `2 m b <= m^2/ghat + ghat b^2` per cell, and the
//! Jensen bound `ghat <= g(midpoint masses)`; weak duality `q <= action`
//! therefore holds for every feasible path and every set of multipliers, and
//! the bound is exact at the discrete optimum for the arithmetic mobility
//! (where the Jensen step is an identity). `B` is a concave maximization
//! over a product of simplexes, solved by projected gradient ascent seeded
//! with the path itself; for the arithmetic mobility it splits per node and
//! is evaluated in closed form.
//!
//! Shifting a whole interval potential by a constant (the Hamilton-Jacobi
//! gauge) leaves `q` unchanged; the normalization below spends this freedom
//! to zero every interior-node Hamiltonian
//! `H_k = max_rho (a^k, rho) + 1/4 ||grad lambda^{k-1}||^2_rho
//!        + 1/4 ||grad lambda^k||^2_rho`,
//! which also forces the rates to be nonpositive coordinatewise (plug the
//! vertex measures into the max).

use crate::energy::{self, sup_linear_plus_mobility, ExtReal};
use crate::graph::WeightedGraph;
use crate::mobility::Mobility;
use crate::parallel;
use crate::simplex::{poincare, ProbVector};
use crate::solver::{CertificateReport, DiscretePath, DualPath, JumpIncrement};
use crate::TAU_G;

/// `(grad lambda)_e = sqrt(w_e) (lambda_i - lambda_j)` in edge order.
fn grad_edges(graph: &WeightedGraph, lambda: &[f64]) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .zip(graph.sqrt_weights())
        .map(|(&(i, j), &sw)| sw * (lambda[i] - lambda[j]))
        .collect()
}

/// The per-node Hamiltonian `Hk` for rate `a` and the squared gradients of
/// the two adjacent interval potentials. `hint` seeds the concave ascent.
fn node_hamiltonian(
    graph: &WeightedGraph,
    g: &Mobility,
    a: &[f64],
    grad_prev: &[f64],
    grad_next: &[f64],
    hint: &[f64],
) -> f64 {
    let w: Vec<f64> = grad_prev
        .iter()
        .zip(grad_next)
        .map(|(&bp, &bn)| 0.25 * (bp * bp + bn * bn))
        .collect();
    sup_linear_plus_mobility(graph, g, a, &w, &[hint.to_vec()]).value
}

/// Shift each interval potential by a common constant so that every interior
/// node Hamiltonian vanishes. The dual endpoint pairing cannot decrease under
/// the shift, and afterwards every coordinate rate is nonpositive up to the
/// accuracy of the Hamiltonian evaluation.
pub fn normalize_dual(
    graph: &WeightedGraph,
    g: &Mobility,
    path: &DiscretePath,
    dual: &DualPath,
    jump_abs: f64,
) -> DualPath {
    let k = dual.intervals();
    let n = graph.n();
    let dt = dual.dt;
    let mut lambda = dual.lambda.clone();
    let grads: Vec<Vec<f64>> = lambda.iter().map(|row| grad_edges(graph, row)).collect();

    // March node by node: row `node-1` is already final, so zeroing the node
    // Hamiltonian is a single shift of row `node` by `-dt * H`.
    for node in 1..k {
        let mut a = vec![0.0; n];
        for i in 0..n {
            a[i] = (lambda[node][i] - lambda[node - 1][i]) / dt;
        }
        let h = node_hamiltonian(graph, g, &a, &grads[node - 1], &grads[node], &path.rho[node]);
        for i in 0..n {
            lambda[node][i] -= dt * h;
        }
    }

    finalize_dual(dt, lambda, jump_abs)
}

/// Rebuild rate/jump decomposition on a set of interval potentials.
pub(crate) fn finalize_dual(dt: f64, lambda: Vec<Vec<f64>>, jump_abs: f64) -> DualPath {
    let k = lambda.len();
    let n = lambda[0].len();
    let mut increments: Vec<Vec<f64>> = Vec::with_capacity(k.saturating_sub(1));
    let mut mags: Vec<f64> = Vec::new();
    for node in 1..k {
        let d: Vec<f64> = (0..n).map(|i| lambda[node][i] - lambda[node - 1][i]).collect();
        mags.extend(d.iter().map(|x| x.abs()));
        increments.push(d);
    }
    let median = if mags.is_empty() {
        0.0
    } else {
        let mut s = mags.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s[s.len() / 2]
    };
    let cut = (10.0 * median).max(jump_abs);

    let mut abs_rate = Vec::with_capacity(increments.len());
    let mut jumps = Vec::new();
    for (node, d) in increments.iter().enumerate() {
        let mut rate = vec![0.0; n];
        let mut delta = vec![0.0; n];
        let mut any = false;
        for i in 0..n {
            if d[i].abs() > cut {
                delta[i] = d[i];
                any = true;
            } else {
                rate[i] = d[i] / dt;
            }
        }
        abs_rate.push(rate);
        if any {
            jumps.push(JumpIncrement { node: node + 1, delta });
        }
    }
    DualPath { dt, lambda, abs_rate, jumps }
}

/// The concave maximization `B(lambda)` behind the certified dual value. The
/// free variables are the interior mass rows; the endpoint rows of the path
/// stay pinned. `w_ke = 1/2 (grad lambda^k)_e^2`.
fn chain_dual_bound(
    graph: &WeightedGraph,
    g: &Mobility,
    path: &DiscretePath,
    dual: &DualPath,
    grads: &[Vec<f64>],
) -> f64 {
    let k = path.intervals();
    let n = graph.n();
    let dt = dual.dt;
    let rates: Vec<Vec<f64>> = (1..k)
        .map(|node| {
            (0..n).map(|i| (dual.lambda[node][i] - dual.lambda[node - 1][i]) / dt).collect()
        })
        .collect();
    let w: Vec<Vec<f64>> =
        grads.iter().map(|row| row.iter().map(|&b| 0.5 * b * b).collect()).collect();

    if let Mobility::Arithmetic = g {
        // g_e(mid) is linear: the sup separates per interior node, and the
        // pinned endpoint rows contribute constants.
        let mut total = 0.0;
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            total += 0.25 * w[0][e] * (path.rho[0][i] + path.rho[0][j]);
            total += 0.25 * w[k - 1][e] * (path.rho[k][i] + path.rho[k][j]);
        }
        total += (1..k)
            .map(|node| {
                let mut best = f64::NEG_INFINITY;
                for i in 0..n {
                    let mut coef = rates[node - 1][i];
                    for &e in graph.incident_edges(i) {
                        coef += 0.25 * (w[node - 1][e] + w[node][e]);
                    }
                    best = best.max(coef);
                }
                best
            })
            .sum::<f64>();
        return total;
    }

    // General mobilities: projected gradient ascent over the interior rows
    // with the true (quadrature) cell conductivity, seeded with the path
    // (which is the argmax at a converged solve) and a barycentric blend.
    // The per-cell quadratures dominate, so cells evaluate in parallel.
    let ne = graph.num_edges();
    let edges = graph.edges();
    let objective = |rows: &[Vec<f64>]| -> f64 {
        let mut v = 0.0;
        for node in 1..k {
            v += rates[node - 1].iter().zip(&rows[node]).map(|(a, r)| a * r).sum::<f64>();
        }
        let cell_terms = parallel::map_collect(k * ne, |cell| {
            let kk = cell / ne;
            let e = cell % ne;
            if w[kk][e] == 0.0 {
                return 0.0;
            }
            let (i, j) = edges[e];
            let ghat = energy::cell_conductivity(
                g,
                rows[kk][i],
                rows[kk][j],
                rows[kk + 1][i],
                rows[kk + 1][j],
            );
            w[kk][e] * ghat
        });
        v + cell_terms.iter().sum::<f64>()
    };
    let gradient = |rows: &[Vec<f64>], out: &mut [Vec<f64>]| {
        for node in 1..k {
            out[node].copy_from_slice(&rates[node - 1]);
        }
        let cell_grads = parallel::map_collect(k * ne, |cell| {
            let kk = cell / ne;
            let e = cell % ne;
            if w[kk][e] == 0.0 {
                return [0.0; 4];
            }
            let (i, j) = edges[e];
            let g4 = energy::cell_conductivity_grad(
                g,
                rows[kk][i].max(1e-12),
                rows[kk][j].max(1e-12),
                rows[kk + 1][i].max(1e-12),
                rows[kk + 1][j].max(1e-12),
            );
            let mut out = [0.0; 4];
            for (slot, val) in g4.iter().enumerate() {
                out[slot] = w[kk][e] * val.min(1e12);
            }
            out
        });
        for cell in 0..k * ne {
            let kk = cell / ne;
            let e = cell % ne;
            let (i, j) = edges[e];
            let g4 = cell_grads[cell];
            if kk > 0 {
                out[kk][i] += g4[0];
                out[kk][j] += g4[1];
            }
            if kk + 1 < k {
                out[kk + 1][i] += g4[2];
                out[kk + 1][j] += g4[3];
            }
        }
    };

    let bary_blend: Vec<Vec<f64>> = path
        .rho
        .iter()
        .enumerate()
        .map(|(node, row)| {
            if node == 0 || node == k {
                row.clone()
            } else {
                row.iter().map(|&x| 0.5 * x + 0.5 / n as f64).collect()
            }
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    for (start, budget) in [(&path.rho, 600), (&bary_blend, 150)] {
        let mut rows = start.clone();
        let mut val = objective(&rows);
        let mut step = 0.25;
        let mut gbuf = vec![vec![0.0; n]; k + 1];
        for _ in 0..budget {
            gradient(&rows, &mut gbuf);
            let gmax = gbuf
                .iter()
                .skip(1)
                .take(k - 1)
                .flat_map(|r| r.iter())
                .fold(0.0f64, |a, &x| a.max(x.abs()))
                .max(1e-30);
            let mut improved = false;
            while step >= 1e-16 {
                let mut cand = rows.clone();
                for node in 1..k {
                    for i in 0..n {
                        cand[node][i] += step / gmax * gbuf[node][i];
                    }
                    crate::numerics::projection::project_simplex(&mut cand[node]);
                }
                let cval = objective(&cand);
                if cval > val {
                    let gain = cval - val;
                    rows = cand;
                    val = cval;
                    step = (step * 1.4).min(1e2);
                    improved = gain > 1e-13 * val.abs().max(1.0);
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.max(val);
    }
    best
}

/// Per-interval energy profile `F(cell_k)`; infinite entries mark momentum on
/// dead edges.
pub fn energy_profile(graph: &WeightedGraph, g: &Mobility, path: &DiscretePath) -> Vec<f64> {
    parallel::map_collect(path.intervals(), |k| {
        match energy::cell_f(graph, g, &path.rho[k], &path.rho[k + 1], &path.m[k]) {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    })
}

fn drift_statistic(profile: &[f64]) -> f64 {
    if profile.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let mean = profile.iter().sum::<f64>() / profile.len() as f64;
    if mean.abs() <= 1e-14 {
        return 0.0;
    }
    let var = profile.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / profile.len() as f64;
    var.sqrt() / mean
}

/// Verify the optimality system for a feasible path and a dual potential,
/// reporting every residual. Endpoints with vanishing Poincare constant
/// downgrade the Hamilton-Jacobi residuals to advisory.
pub fn certify(
    graph: &WeightedGraph,
    g: &Mobility,
    path: &DiscretePath,
    dual: &DualPath,
) -> CertificateReport {
    let k = path.intervals();
    let n = graph.n();
    let dt = path.dt;
    debug_assert_eq!(dual.intervals(), k);

    let action = match energy::action(graph, g, path) {
        ExtReal::Finite(a) => a,
        ExtReal::Infinite => f64::INFINITY,
    };

    let grads: Vec<Vec<f64>> = dual.lambda.iter().map(|row| grad_edges(graph, row)).collect();

    // (main1): m = g_cell * grad(lambda) on edges carrying conductivity.
    let velocity_residual = parallel::max_over(k, |kk| {
        let ghat = path.cell_conductivities(graph, g, kk);
        let mut worst = 0.0f64;
        for e in 0..graph.num_edges() {
            if ghat[e] > TAU_G {
                worst = worst.max((path.m[kk][e] - ghat[e] * grads[kk][e]).abs());
            }
        }
        worst
    })
    .max(0.0);

    // Interior-node Hamiltonians; jump-flagged nodes are excluded from the
    // absolutely-continuous residual and checked through the jump conditions.
    let jump_nodes: std::collections::BTreeSet<usize> =
        dual.jumps.iter().map(|j| j.node).collect();
    let node_h: Vec<f64> = parallel::map_collect(k.saturating_sub(1), |idx| {
        let node = idx + 1;
        let a: Vec<f64> =
            (0..n).map(|i| (dual.lambda[node][i] - dual.lambda[node - 1][i]) / dt).collect();
        node_hamiltonian(graph, g, &a, &grads[node - 1], &grads[node], &path.rho[node])
    });
    let mut hj_residual = 0.0f64;
    for (idx, &h) in node_h.iter().enumerate() {
        if !jump_nodes.contains(&(idx + 1)) {
            hj_residual = hj_residual.max(h.abs());
        }
    }

    // (main3): flagged jumps must not rise and must carry no mass.
    let mut jump_residual = 0.0f64;
    for j in &dual.jumps {
        let h0 = energy::h_zero(&j.delta);
        let mass: f64 = j.delta.iter().zip(&path.rho[j.node]).map(|(d, r)| d * r).sum();
        jump_residual = jump_residual.max(h0.abs()).max(mass.abs());
    }

    // Certified dual value q(lambda).
    let pairing: f64 = (0..n)
        .map(|i| dual.lambda[k - 1][i] * path.rho[k][i] - dual.lambda[0][i] * path.rho[0][i])
        .sum();
    let dual_value = pairing - dt * chain_dual_bound(graph, g, path, dual, &grads);

    let profile = energy_profile(graph, g, path);
    let advisory = {
        let p0 = poincare(graph, g, &ProbVector::from_unchecked(path.rho[0].clone()));
        let p1 = poincare(graph, g, &ProbVector::from_unchecked(path.rho[k].clone()));
        p0 <= TAU_G || p1 <= TAU_G
    };

    CertificateReport {
        action,
        dual_value,
        gap: action - dual_value,
        velocity_residual,
        hj_residual,
        jump_residual,
        monotonicity_violation: dual.monotonicity_violation(),
        energy_drift: drift_statistic(&profile),
        advisory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_path_with_zero_dual_certifies_cleanly() {
        let graph = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let g = Mobility::Arithmetic;
        let k = 8;
        let rho = vec![vec![0.4, 0.6]; k + 1];
        let m = vec![vec![0.0]; k];
        let path = DiscretePath { dt: 1.0 / k as f64, rho, m };
        path.validate(&graph).unwrap();
        let dual = finalize_dual(path.dt, vec![vec![0.0, 0.0]; k], 1e-2);
        let report = certify(&graph, &g, &path, &dual);
        assert_eq!(report.action, 0.0);
        assert!(report.gap.abs() < 1e-15);
        assert!(report.velocity_residual < 1e-15);
        assert!(report.hj_residual < 1e-15);
        assert!(report.jump_residual < 1e-15);
        assert!(report.monotonicity_violation < 1e-15);
        assert_eq!(report.energy_drift, 0.0);
        assert!(!report.advisory);
    }

    #[test]
    fn constant_gauge_shift_leaves_h_invariant() {
        // H(rate, grad) is unchanged by adding the same constant to a whole
        // interval potential since gradients kill constants and rates shift
        // pairwise; normalize_dual must be a fixed point on normalized input.
        let graph = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let g = Mobility::Arithmetic;
        let k = 6;
        let rho = vec![vec![0.5, 0.5]; k + 1];
        let m = vec![vec![0.0]; k];
        let path = DiscretePath { dt: 1.0 / k as f64, rho, m };
        let lambda: Vec<Vec<f64>> = (0..k).map(|kk| vec![-(kk as f64) * 0.0, 0.0]).collect();
        let dual = finalize_dual(path.dt, lambda, 1e-2);
        let normalized = normalize_dual(&graph, &g, &path, &dual, 1e-2);
        for kk in 0..k {
            for i in 0..2 {
                assert!((normalized.lambda[kk][i] - dual.lambda[kk][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalization_zeroes_interior_hamiltonians() {
        let graph = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let g = Mobility::Arithmetic;
        let k = 10;
        let rho = vec![vec![0.25, 0.5, 0.25]; k + 1];
        let m = vec![vec![0.0, 0.0]; k];
        let path = DiscretePath { dt: 1.0 / k as f64, rho, m };
        // arbitrary ragged potentials
        let lambda: Vec<Vec<f64>> = (0..k)
            .map(|kk| {
                let t = kk as f64 / k as f64;
                vec![(t * 3.1).sin() * 0.3, -0.2 * t, 0.1 * (1.0 - t) * (t * 7.0).cos()]
            })
            .collect();
        let dual = finalize_dual(path.dt, lambda, 1e9);
        let normalized = normalize_dual(&graph, &g, &path, &dual, 1e9);
        let report = certify(&graph, &g, &path, &normalized);
        assert!(report.hj_residual < 1e-10, "hj residual {}", report.hj_residual);
        // after normalization the rates are nonpositive
        assert!(report.monotonicity_violation < 1e-10);
        // weak duality: the zero path has action 0, so q <= 0
        assert!(report.dual_value <= 1e-10);
    }
}
