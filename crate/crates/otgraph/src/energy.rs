//! The action integrand, the Hamiltonian `H_g` with its gradients, and the
//! dual Hamiltonians `H` and `H_0`.
//!
//! The scalar kernel is the perspective-type function
//!
//! ```text
//! f(t, s) = s^2/t  (t > 0),   0  (s = t = 0),   +inf  otherwise,
//! ```
//!
//! which satisfies `2 mu s <= f(t, s) + mu^2 t` with equality iff `t mu = s`.
//! `F(rho, m)` sums `f(g_ij(rho), m_ij)` over edges, and the dual Hamiltonian
//! is `H(a, b) = max_{rho in simplex} (a, rho) + 1/2 ||b||^2_rho`.

use crate::error::{Error, Result};
use crate::graph::{EdgeField, WeightedGraph};
use crate::mobility::Mobility;
use crate::TAU_G;

/// Momentum magnitudes at or below this are treated as zero when the carrying
/// edge has vanished mobility; aligned with the continuity tolerance.
pub const TAU_SUPPORT: f64 = 1e-9;

/// Nonnegative extended real; infinity is an explicit flag, never a sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, or `None` for infinity.
    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            ExtReal::Infinite => None,
        }
    }

    pub fn unwrap_finite(&self) -> f64 {
        self.finite().expect("value is infinite")
    }

    pub fn add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

/// The convex lower semicontinuous kernel `f(t, s)`.
pub fn f(t: f64, s: f64) -> ExtReal {
    if t > 0.0 {
        ExtReal::Finite(s * s / t)
    } else if t == 0.0 && s == 0.0 {
        ExtReal::Finite(0.0)
    } else {
        ExtReal::Infinite
    }
}

/// `F(rho, m) = 1/2 sum_(i,j) f(g_ij(rho), m_ij)`, one term per undirected
/// edge. Finite iff the momentum vanishes wherever the mobility does (to the
/// thresholds `TAU_G`, `TAU_SUPPORT`).
pub fn big_f(graph: &WeightedGraph, g: &Mobility, rho: &[f64], m: &EdgeField) -> Result<ExtReal> {
    if rho.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "big_f",
            expected: graph.n(),
            got: rho.len(),
        });
    }
    let mut acc = 0.0;
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let ge = g.eval(rho[i], rho[j]);
        let me = m.values()[e];
        if ge > TAU_G {
            acc += me * me / ge;
        } else if me.abs() > TAU_SUPPORT {
            return Ok(ExtReal::Infinite);
        }
    }
    Ok(ExtReal::Finite(acc))
}

/// Effective conductivity of a time cell on one edge, given the edge endpoint
/// masses `(ai, aj)` at the left node and `(bi, bj)` at the right node.
///
/// For the arithmetic mobility this is `g` at the midpoint-averaged masses,
/// exactly the average of the node values by linearity. For the other
/// mobilities it is the reparametrization mean along the segment,
///
/// ```text
/// ghat = ( int_0^1 g((1-t) a + t b)^{-1/2} dt )^{-2},
/// ```
///
/// which is 1-homogeneous and jointly concave in the node masses (the
/// reciprocal square root is convex in the affine segment argument) and makes
/// the cell cost `m^2/ghat` reproduce the squared reparametrized length of
/// the cell exactly. Plain midpoint averaging overestimates the conductivity
/// of boundary-degenerate cells by up to a factor two and biases the action
/// at first order in the step size.
pub fn cell_conductivity(g: &Mobility, ai: f64, aj: f64, bi: f64, bj: f64) -> f64 {
    if let Mobility::Arithmetic = g {
        return 0.25 * (ai + aj + bi + bj);
    }
    let inv = segment_recip_sqrt(g, ai, aj, bi, bj);
    if inv.is_finite() && inv > 0.0 {
        1.0 / (inv * inv)
    } else {
        0.0
    }
}

/// `int_0^1 g((1-t)(ai,aj) + t(bi,bj))^{-1/2} dt`, with `t = u^2` style
/// substitutions at both ends so endpoint-degenerate cells integrate cleanly.
fn segment_recip_sqrt(g: &Mobility, ai: f64, aj: f64, bi: f64, bj: f64) -> f64 {
    let f = |t: f64| {
        let v = g.eval((1.0 - t) * ai + t * bi, (1.0 - t) * aj + t * bj);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / v.sqrt()
        }
    };
    let tol = 1e-11 * (f(0.5).min(1e6)).max(1e-2);
    let left = crate::numerics::quadrature::adaptive_gk_sqrt_left(&f, 0.5, tol);
    let right = crate::numerics::quadrature::adaptive_gk_sqrt_right(&f, 0.5, tol);
    left.value + right.value
}

/// Gradient of [`cell_conductivity`] in the four node masses
/// `(ai, aj, bi, bj)`. The derivative in a mass that sits at zero diverges;
/// callers differentiate at (clamped) interior points only.
pub fn cell_conductivity_grad(g: &Mobility, ai: f64, aj: f64, bi: f64, bj: f64) -> [f64; 4] {
    if let Mobility::Arithmetic = g {
        return [0.25; 4];
    }
    let inv = segment_recip_sqrt(g, ai, aj, bi, bj);
    if !(inv.is_finite() && inv > 0.0) {
        return [0.0; 4];
    }
    // d ghat / d z = -2 I^{-3} dI/dz with
    // dI/d ai = -1/2 int g^{-3/2} d1(r, s) (1-t) dt, etc.
    let kernel = |t: f64, slot: usize| {
        let r = (1.0 - t) * ai + t * bi;
        let s = (1.0 - t) * aj + t * bj;
        let v = g.eval(r, s);
        if v <= 0.0 {
            return 0.0;
        }
        let weight = match slot {
            0 | 1 => 1.0 - t,
            _ => t,
        };
        let d = match slot {
            0 | 2 => g.d1(r.max(1e-300), s),
            _ => g.d1(s.max(1e-300), r),
        };
        -0.5 * v.powf(-1.5) * d * weight
    };
    let mut grad = [0.0; 4];
    for (slot, gv) in grad.iter_mut().enumerate() {
        // the one-sided derivative in a vanishing mass is +infinity; skip the
        // quadrature (it would not converge) and report the sign directly
        let own = [ai, aj, bi, bj][slot];
        if own < 1e-9 {
            *gv = f64::INFINITY;
            continue;
        }
        let f = |t: f64| kernel(t, slot);
        let tol = 1e-9;
        let left = crate::numerics::quadrature::adaptive_gk_sqrt_left(&f, 0.5, tol);
        let right = crate::numerics::quadrature::adaptive_gk_sqrt_right(&f, 0.5, tol);
        let di = left.value + right.value;
        *gv = -2.0 * di / (inv * inv * inv);
    }
    grad
}

/// `F` over one time cell, using the cell conductivities built from the node
/// masses `rho_a`, `rho_b`.
pub fn cell_f(
    graph: &WeightedGraph,
    g: &Mobility,
    rho_a: &[f64],
    rho_b: &[f64],
    m: &[f64],
) -> ExtReal {
    let mut acc = 0.0;
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let ghat = cell_conductivity(g, rho_a[i], rho_a[j], rho_b[i], rho_b[j]);
        let me = m[e];
        if ghat > TAU_G {
            acc += me * me / ghat;
        } else if me.abs() > TAU_SUPPORT {
            return ExtReal::Infinite;
        }
    }
    ExtReal::Finite(acc)
}

/// Discretized action `A = 1/2 sum_k dt * F_cell(rho^k, rho^{k+1}, m^k)`.
pub fn action(graph: &WeightedGraph, g: &Mobility, path: &crate::solver::DiscretePath) -> ExtReal {
    let mut acc = ExtReal::Finite(0.0);
    for k in 0..path.intervals() {
        let fk = cell_f(graph, g, &path.rho[k], &path.rho[k + 1], &path.m[k]);
        acc = acc.add(match fk {
            ExtReal::Finite(v) => ExtReal::Finite(0.5 * path.dt * v),
            ExtReal::Infinite => ExtReal::Infinite,
        });
    }
    acc
}

/// `H_g(rho, phi) = 1/4 sum_(i,j) w_ij g(rho_i, rho_j) (phi_i - phi_j)^2`.
/// Accepts any entrywise-nonnegative `rho`.
pub fn hamiltonian_hg(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    phi: &[f64],
) -> Result<f64> {
    if rho.len() != graph.n() || phi.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "hamiltonian_hg",
            expected: graph.n(),
            got: rho.len().min(phi.len()),
        });
    }
    let mut acc = 0.0;
    for &(i, j) in graph.edges() {
        let d = phi[i] - phi[j];
        acc += 0.5 * graph.weight(i, j) * g.eval(rho[i], rho[j]) * d * d;
    }
    Ok(acc)
}

/// `dH_g/dphi_i = sum_j w_ij g(rho_i, rho_j) (phi_i - phi_j)`.
pub fn grad_phi_hg(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    phi: &[f64],
) -> Result<Vec<f64>> {
    if rho.len() != graph.n() || phi.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "grad_phi_hg",
            expected: graph.n(),
            got: rho.len().min(phi.len()),
        });
    }
    let mut grad = vec![0.0; graph.n()];
    for &(i, j) in graph.edges() {
        let w = graph.weight(i, j) * g.eval(rho[i], rho[j]);
        let d = phi[i] - phi[j];
        grad[i] += w * d;
        grad[j] -= w * d;
    }
    Ok(grad)
}

/// `dH_g/drho_i = 1/2 sum_j w_ij d1g(rho_i, rho_j) (phi_i - phi_j)^2`.
/// Requires `rho` strictly inside the positive quadrant.
pub fn grad_rho_hg(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    phi: &[f64],
) -> Result<Vec<f64>> {
    if rho.len() != graph.n() || phi.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "grad_rho_hg",
            expected: graph.n(),
            got: rho.len().min(phi.len()),
        });
    }
    if rho.iter().any(|&x| x <= TAU_G) {
        return Err(Error::BoundaryRho("grad_rho_hg"));
    }
    Ok(grad_rho_weighted_mobility(graph, g, rho, &{
        let mut q = vec![0.0; graph.num_edges()];
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            let d = phi[i] - phi[j];
            q[e] = 0.5 * graph.weight(i, j) * d * d;
        }
        q
    }))
}

/// Gradient in `rho` of `sum_e q_e g(rho_i, rho_j)` for per-edge weights `q`.
pub(crate) fn grad_rho_weighted_mobility(
    graph: &WeightedGraph,
    g: &Mobility,
    rho: &[f64],
    q: &[f64],
) -> Vec<f64> {
    let mut grad = vec![0.0; graph.n()];
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        if q[e] == 0.0 {
            continue;
        }
        grad[i] += q[e] * g.d1(rho[i], rho[j]);
        grad[j] += q[e] * g.d1(rho[j], rho[i]);
    }
    grad
}

/// Outcome of the concave maximization behind `H(a, b)`.
#[derive(Debug, Clone)]
pub struct DualHResult {
    pub value: f64,
    pub maximizer: Vec<f64>,
    pub converged: bool,
}

/// `H(a, b) = max_{rho in simplex} (a, rho) + 1/2 ||b||^2_rho`.
///
/// For the arithmetic mobility the objective is linear in `rho` and the
/// maximum `max_k (a_k + 1/4 sum_{j in N(k)} b_kj^2)` is returned exactly.
/// Otherwise projected gradient ascent runs from every vertex of the simplex
/// plus the barycenter; the objective is concave so each start converges to
/// the global maximum.
pub fn dual_h(graph: &WeightedGraph, g: &Mobility, a: &[f64], b: &EdgeField) -> Result<DualHResult> {
    if a.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "dual_h",
            expected: graph.n(),
            got: a.len(),
        });
    }
    let w: Vec<f64> = b.values().iter().map(|&x| 0.5 * x * x).collect();
    Ok(sup_linear_plus_mobility(graph, g, a, &w, &[]))
}

/// `H_0(a) = max_i a_i`, the recession function of `H` restricted to `b = 0`.
pub fn h_zero(a: &[f64]) -> f64 {
    a.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Maximize `(a, rho) + sum_e w_e g_e(rho)` over the simplex (`w_e >= 0`).
/// `extra_starts` supplements the vertex-plus-barycenter start set.
pub(crate) fn sup_linear_plus_mobility(
    graph: &WeightedGraph,
    g: &Mobility,
    a: &[f64],
    w: &[f64],
    extra_starts: &[Vec<f64>],
) -> DualHResult {
    let n = graph.n();
    if let Mobility::Arithmetic = g {
        // g_e(rho) = (rho_i + rho_j)/2: the objective is linear in rho.
        let mut coef = a.to_vec();
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            coef[i] += 0.5 * w[e];
            coef[j] += 0.5 * w[e];
        }
        let (k, &value) = coef
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap();
        let mut rho = vec![0.0; n];
        rho[k] = 1.0;
        return DualHResult { value, maximizer: rho, converged: true };
    }

    let objective = |rho: &[f64]| -> f64 {
        let mut v: f64 = rho.iter().zip(a).map(|(r, ai)| r * ai).sum();
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            v += w[e] * g.eval(rho[i], rho[j]);
        }
        v
    };
    let grad = |rho: &[f64], out: &mut [f64]| {
        out.copy_from_slice(a);
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            if w[e] == 0.0 {
                continue;
            }
            // clamp away from the axes: d1 may blow up there, any finite
            // surrogate still points inward
            let (ri, rj) = (rho[i].max(1e-13), rho[j].max(1e-13));
            out[i] += w[e] * g.d1(ri, rj).min(1e12);
            out[j] += w[e] * g.d1(rj, ri).min(1e12);
        }
    };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(n + 1 + extra_starts.len());
    starts.push(vec![1.0 / n as f64; n]);
    for k in 0..n {
        let mut v = vec![1e-3 / (n as f64 - 1.0).max(1.0); n];
        v[k] = 1.0 - 1e-3;
        starts.push(v);
    }
    starts.extend(extra_starts.iter().cloned());

    let mut best_val = f64::NEG_INFINITY;
    let mut best_rho = vec![0.0; n];
    let mut all_converged = true;
    let tol = 1e-12;
    for start in &starts {
        let mut rho = start.clone();
        let mut val = objective(&rho);
        let mut step = 0.5;
        let mut gbuf = vec![0.0; n];
        let mut converged = false;
        for _ in 0..4000 {
            grad(&rho, &mut gbuf);
            let gmax = gbuf.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())).max(1e-30);
            let mut improved = false;
            for _ in 0..60 {
                let mut cand: Vec<f64> =
                    rho.iter().zip(&gbuf).map(|(r, gi)| r + step / gmax * gi).collect();
                crate::numerics::projection::project_simplex(&mut cand);
                let cval = objective(&cand);
                if cval > val {
                    let gain = cval - val;
                    rho = cand;
                    val = cval;
                    improved = true;
                    step = (step * 1.3).min(1e3);
                    if gain <= tol * val.abs().max(1.0) {
                        converged = true;
                    }
                    break;
                }
                step *= 0.5;
                if step < 1e-18 {
                    break;
                }
            }
            if !improved {
                converged = true;
                break;
            }
            if converged {
                break;
            }
        }
        all_converged &= converged;
        if val > best_val {
            best_val = val;
            best_rho = rho;
        }
    }
    DualHResult { value: best_val, maximizer: best_rho, converged: all_converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{divergence_rho, gradient};

    fn boundary_graph() -> WeightedGraph {
        WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 0.0)]).unwrap()
    }

    #[test]
    fn scalar_kernel_cases() {
        assert_eq!(f(1.0, 2.0), ExtReal::Finite(4.0));
        assert_eq!(f(0.0, 0.0), ExtReal::Finite(0.0));
        assert_eq!(f(0.0, 1.0), ExtReal::Infinite);
        assert_eq!(f(-1.0, 0.0), ExtReal::Infinite);
    }

    #[test]
    fn partial_legendre_inequality() {
        // 2 mu s <= f(t,s) + mu^2 t, equality iff t mu = s
        let mut state = 1u64;
        let mut next = move || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let t = next() * 2.0;
            let mu = next() * 4.0 - 2.0;
            let s = next() * 2.0 - 1.0;
            if let ExtReal::Finite(ft) = f(t, s) {
                let lhs = 2.0 * mu * s;
                let rhs = ft + mu * mu * t;
                assert!(lhs <= rhs + 1e-12);
                if (t * mu - s).abs() < 1e-15 {
                    assert!((lhs - rhs).abs() < 1e-10);
                }
            }
        }
        // exact equality on the matched pair
        let (t, mu) = (0.73, -1.21);
        let s = t * mu;
        let rhs = f(t, s).unwrap_finite() + mu * mu * t;
        assert!((2.0 * mu * s - rhs).abs() < 1e-14);
    }

    #[test]
    fn big_f_examples() {
        let g2 = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let mob = Mobility::Arithmetic;
        let mut m = EdgeField::zeros(&g2);
        m.set(0, 1, 1.0).unwrap();
        let v = big_f(&g2, &mob, &[0.5, 0.5], &m).unwrap();
        assert_eq!(v, ExtReal::Finite(2.0));

        let z = EdgeField::zeros(&g2);
        assert_eq!(big_f(&g2, &mob, &[0.5, 0.5], &z).unwrap(), ExtReal::Finite(0.0));

        let mut m = EdgeField::zeros(&g2);
        m.set(0, 1, 0.3).unwrap();
        let v = big_f(&g2, &mob, &[1.0, 0.0], &m).unwrap();
        assert!((v.unwrap_finite() - 0.18).abs() < 1e-15);

        // infinite when momentum crosses a dead edge
        let mob = Mobility::Harmonic;
        let v = big_f(&g2, &mob, &[1.0, 0.0], &m).unwrap();
        assert_eq!(v, ExtReal::Infinite);
    }

    #[test]
    fn hamiltonian_boundary_example() {
        let g = boundary_graph();
        let mob = Mobility::Arithmetic;
        let h = hamiltonian_hg(&g, &mob, &[0.0, 0.5, 0.5], &[1.0, 0.0, 0.0]).unwrap();
        assert!((h - 0.125).abs() < 1e-15, "H_g = {h}");
        let h = hamiltonian_hg(&g, &mob, &[0.2, 0.3, 0.5], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn hamiltonian_is_half_weighted_gradient_norm() {
        let g = boundary_graph();
        let mob = Mobility::Logarithmic;
        let rho = [0.25, 0.3, 0.45];
        let phi = [1.0, -0.4, 0.2];
        let h = hamiltonian_hg(&g, &mob, &rho, &phi).unwrap();
        let gr = gradient(&g, &phi).unwrap();
        let ns = crate::graph::weighted_norm_sq(&g, &mob, &rho, &gr).unwrap();
        assert!((h - 0.5 * ns).abs() < 1e-14);
    }

    #[test]
    fn euler_identities_and_divergence_link() {
        let g = boundary_graph();
        for mob in [Mobility::Arithmetic, Mobility::Logarithmic, Mobility::Harmonic] {
            let rho = [0.25, 0.3, 0.45];
            let phi = [1.0, -0.4, 0.2];
            let h = hamiltonian_hg(&g, &mob, &rho, &phi).unwrap();
            let gp = grad_phi_hg(&g, &mob, &rho, &phi).unwrap();
            let gr = grad_rho_hg(&g, &mob, &rho, &phi).unwrap();
            let e1: f64 = gp.iter().zip(&phi).map(|(x, y)| x * y).sum();
            let e2: f64 = gr.iter().zip(&rho).map(|(x, y)| x * y).sum();
            assert!((e1 - 2.0 * h).abs() < 1e-12, "{}", mob.name());
            assert!((e2 - h).abs() < 1e-12, "{}", mob.name());

            // div_rho(grad phi) = -grad_phi_hg
            let grad = gradient(&g, &phi).unwrap();
            let div = divergence_rho(&g, &mob, &rho, &grad).unwrap();
            for i in 0..3 {
                assert!((div[i] + gp[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grad_rho_rejects_boundary_points() {
        let g = boundary_graph();
        let err = grad_rho_hg(&g, &Mobility::Harmonic, &[0.0, 0.5, 0.5], &[1.0, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::BoundaryRho(_))));
    }

    #[test]
    fn dual_h_reduces_to_h_zero_without_gradient_part() {
        let g = boundary_graph();
        for mob in [Mobility::Arithmetic, Mobility::Harmonic] {
            let a = [-1.0, -2.0, -3.0];
            let b = EdgeField::zeros(&g);
            let r = dual_h(&g, &mob, &a, &b).unwrap();
            assert!((r.value - h_zero(&a)).abs() < 1e-9, "{}", mob.name());
        }
        assert_eq!(h_zero(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(h_zero(&[-1.0, -2.0, -3.0]), -1.0);
    }

    #[test]
    fn dual_h_star_graph_closed_form() {
        // star with center 0: H(0, b) = 1/4 max_k sum_{j in N(k)} b_kj^2
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let mut b = EdgeField::zeros(&g);
        b.set(0, 1, 1.0).unwrap();
        b.set(0, 2, -2.0).unwrap();
        b.set(0, 3, 0.5).unwrap();
        let r = dual_h(&g, &Mobility::Arithmetic, &[0.0; 4], &b).unwrap();
        let expect = 0.25 * (1.0 + 4.0 + 0.25);
        assert!((r.value - expect).abs() < 1e-14);
        assert_eq!(r.maximizer, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn dual_h_gauge_shift() {
        let g = boundary_graph();
        let mob = Mobility::Harmonic;
        let a = [0.3, -0.7, 0.1];
        let mut b = EdgeField::zeros(&g);
        b.set(0, 1, 0.9).unwrap();
        b.set(1, 2, -0.4).unwrap();
        let h0 = dual_h(&g, &mob, &a, &b).unwrap().value;
        let c = 0.37;
        let ac: Vec<f64> = a.iter().map(|x| x + c).collect();
        let h1 = dual_h(&g, &mob, &ac, &b).unwrap().value;
        assert!((h1 - (h0 + c)).abs() < 1e-9, "h0={h0} h1={h1}");
    }

    #[test]
    fn dual_h_monotone_in_a() {
        let g = boundary_graph();
        let mob = Mobility::Logarithmic;
        let mut b = EdgeField::zeros(&g);
        b.set(0, 1, 1.2).unwrap();
        let a = [0.1, 0.4, -0.2];
        let a2 = [0.2, 0.4, 0.0];
        let h1 = dual_h(&g, &mob, &a, &b).unwrap().value;
        let h2 = dual_h(&g, &mob, &a2, &b).unwrap().value;
        assert!(h2 >= h1 - 1e-10);
    }
}
