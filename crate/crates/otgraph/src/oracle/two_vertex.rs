//! The two-vertex geodesic family.
//!
//! On the graph with a single edge of weight `w`, the geodesic from mass `a`
//! to mass `b` on vertex 1 follows `x(t) = G^{-1}(G(a) + C t)` where
//! `G(tau) = int_0^tau dr / sqrt(g(r, 1-r))` and `C = G(b) - G(a)`; its
//! squared length is `W^2 = C^2 / w` for every mobility with finite `C_g`.
//!
//! The returned samples are the optimum of the discretized problem itself
//! (polished by a damped Newton pass on the K-1 interior masses), which
//! matches the continuum curve to second order in the step and certifies with
//! residuals at root-finding accuracy. The reported `w_squared` is the
//! continuum value.

use crate::energy::{cell_conductivity, cell_conductivity_grad};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::mobility::{c_g, Mobility};
use crate::numerics::newton_bisect;
use crate::numerics::quadrature::{adaptive_gk_sqrt_left, adaptive_gk_sqrt_right};
use crate::solver::{certificate, DiscretePath, DualPath};

/// Cumulative reparametrization `G(tau) = int_0^tau dr/sqrt(g(r, 1-r))` and
/// its inverse. Strictly increasing on [0, 1]; finite `C_g` is validated at
/// construction.
pub struct GFunction {
    g: Mobility,
    c: f64,
}

impl GFunction {
    pub fn new(g: Mobility) -> Result<Self> {
        let c = c_g(&g)?;
        Ok(Self { g, c })
    }

    pub fn mobility(&self) -> &Mobility {
        &self.g
    }

    /// `G(1) = C_g`.
    pub fn total(&self) -> f64 {
        self.c
    }

    /// `G(tau)`, handling the inverse-square-root endpoints by substitution.
    pub fn value(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        if tau >= 1.0 {
            return self.c;
        }
        let f = |r: f64| {
            let v = self.g.section(r);
            if v <= 0.0 {
                f64::INFINITY
            } else {
                1.0 / v.sqrt()
            }
        };
        let tol = 1e-12;
        if tau <= 0.5 {
            adaptive_gk_sqrt_left(f, tau, tol).value
        } else {
            self.c - adaptive_gk_sqrt_right(f, tau, tol).value
        }
    }

    /// `dG/dtau = 1/sqrt(g(tau, 1-tau))`.
    pub fn derivative(&self, tau: f64) -> f64 {
        let v = self.g.section(tau);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / v.sqrt()
        }
    }

    /// `G^{-1}(y)` for `y` in `[0, C_g]`, by safeguarded Newton.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= self.c {
            return 1.0;
        }
        newton_bisect(|x| self.value(x) - y, |x| self.derivative(x), 0.0, 1.0, 1e-13)
    }
}

/// Closed-form two-vertex geodesic, sampled as the optimum of the K-interval
/// discrete problem.
pub struct TwoVertexGeodesic {
    pub path: DiscretePath,
    pub dual: DualPath,
    /// Continuum squared distance `C^2 / w`.
    pub w_squared: f64,
    /// `C = G(rho1_1) - G(rho0_1)`.
    pub c: f64,
    /// Action of the returned discrete path.
    pub action_discrete: f64,
}

/// Cell conductivity between vertex-1 masses `xa` and `xb` on the two-vertex
/// graph.
fn chain_cell(g: &Mobility, xa: f64, xb: f64) -> f64 {
    cell_conductivity(g, xa, 1.0 - xa, xb, 1.0 - xb)
}

/// Derivatives of `chain_cell` in `(xa, xb)`; only requested slots are
/// integrated (derivatives at pinned boundary nodes diverge).
fn chain_cell_grad(g: &Mobility, xa: f64, xb: f64, want_a: bool, want_b: bool) -> (f64, f64) {
    let g4 = cell_conductivity_grad(g, xa, 1.0 - xa, xb, 1.0 - xb);
    let da = if want_a { g4[0] - g4[1] } else { 0.0 };
    let db = if want_b { g4[2] - g4[3] } else { 0.0 };
    (da, db)
}

/// Chain objective `sum_k (x_{k+1}-x_k)^2 / ghat(x_k, x_{k+1})`; `2*action =
/// Phi / (dt w)`.
fn chain_value(g: &Mobility, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..x.len() - 1 {
        let d = x[k + 1] - x[k];
        let c = chain_cell(g, x[k], x[k + 1]);
        if c > 1e-300 {
            acc += d * d / c;
        } else if d != 0.0 {
            return f64::INFINITY;
        }
    }
    acc
}

fn chain_grad(g: &Mobility, x: &[f64], grad: &mut [f64]) {
    let kk = x.len() - 1;
    for gi in grad.iter_mut() {
        *gi = 0.0;
    }
    for k in 0..kk {
        let d = x[k + 1] - x[k];
        let c = chain_cell(g, x[k], x[k + 1]);
        if c <= 1e-300 {
            continue;
        }
        let (da, db) = chain_cell_grad(g, x[k], x[k + 1], k > 0, k + 1 < kk);
        let ratio = d / c;
        let ratio2 = ratio * ratio;
        if k > 0 {
            grad[k - 1] += -2.0 * ratio - ratio2 * da;
        }
        if k + 1 < kk {
            grad[k] += 2.0 * ratio - ratio2 * db;
        }
    }
}

/// Damped Newton on the interior chain masses, with a 3-coloring finite
/// difference tridiagonal Jacobian of the analytic gradient.
fn polish_chain(g: &Mobility, x: &mut Vec<f64>) {
    let kk = x.len() - 1;
    let nvar = kk - 1;
    if nvar == 0 {
        return;
    }
    let (lo, hi) = {
        let a = x[0].min(x[kk]);
        let b = x[0].max(x[kk]);
        (a, b)
    };
    let mut grad = vec![0.0; nvar];
    let mut gplus = vec![0.0; nvar];
    let mut val = chain_value(g, x);
    for _iter in 0..60 {
        chain_grad(g, x, &mut grad);
        let gmax = grad.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if gmax <= 1e-12 * (val.abs() / (hi - lo).max(1e-12)).max(1.0) {
            break;
        }
        // tridiagonal Jacobian by three colored finite-difference passes
        let mut diag = vec![0.0; nvar];
        let mut lower = vec![0.0; nvar]; // J[i][i-1]
        let mut upper = vec![0.0; nvar]; // J[i][i+1]
        for color in 0..3 {
            let mut xp = x.clone();
            let mut hs = vec![0.0; nvar];
            for v in (color..nvar).step_by(3) {
                let h = 1e-7 * x[v + 1].abs().max(1e-3);
                xp[v + 1] += h;
                hs[v] = h;
            }
            chain_grad(g, &xp, &mut gplus);
            for v in (color..nvar).step_by(3) {
                let h = hs[v];
                diag[v] = (gplus[v] - grad[v]) / h;
                if v > 0 {
                    upper[v - 1] = (gplus[v - 1] - grad[v - 1]) / h;
                }
                if v + 1 < nvar {
                    lower[v + 1] = (gplus[v + 1] - grad[v + 1]) / h;
                }
            }
        }
        // Thomas solve J d = -grad
        let mut cp = vec![0.0; nvar];
        let mut dp = vec![0.0; nvar];
        let mut ok = true;
        for i in 0..nvar {
            let denom = diag[i] - if i > 0 { lower[i] * cp[i - 1] } else { 0.0 };
            if denom.abs() < 1e-300 {
                ok = false;
                break;
            }
            cp[i] = if i + 1 < nvar { upper[i] / denom } else { 0.0 };
            dp[i] = (-grad[i] - if i > 0 { lower[i] * dp[i - 1] } else { 0.0 }) / denom;
        }
        if !ok {
            break;
        }
        let mut step = vec![0.0; nvar];
        for i in (0..nvar).rev() {
            step[i] = dp[i] - if i + 1 < nvar { cp[i] * step[i + 1] } else { 0.0 };
        }
        // backtracking on the objective, iterates clamped to the mass range
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let mut cand = x.clone();
            for v in 0..nvar {
                cand[v + 1] = (x[v + 1] + t * step[v]).clamp(lo, hi);
            }
            let cval = chain_value(g, &cand);
            if cval < val {
                *x = cand;
                val = cval;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
}

/// Geodesic on the two-vertex graph with edge weight `omega12`, from mass
/// `rho0_1` to mass `rho1_1` on vertex 1, sampled on `k` intervals.
pub fn two_vertex_geodesic(
    g: &Mobility,
    omega12: f64,
    rho0_1: f64,
    rho1_1: f64,
    k: usize,
) -> Result<TwoVertexGeodesic> {
    if !(0.0..=1.0).contains(&rho0_1) || !(0.0..=1.0).contains(&rho1_1) {
        return Err(Error::InvalidInput("vertex masses must lie in [0, 1]".into()));
    }
    if omega12 <= 0.0 {
        return Err(Error::InvalidInput("edge weight must be positive".into()));
    }
    if k < 1 {
        return Err(Error::InvalidInput("need at least one interval".into()));
    }
    let graph = WeightedGraph::from_edges(2, &[(0, 1, omega12)])?;
    let dt = 1.0 / k as f64;
    let sw = omega12.sqrt();

    if (rho0_1 - rho1_1).abs() <= 1e-15 {
        let path = DiscretePath {
            dt,
            rho: vec![vec![rho0_1, 1.0 - rho0_1]; k + 1],
            m: vec![vec![0.0]; k],
        };
        let dual = certificate::finalize_dual(dt, vec![vec![0.0, 0.0]; k], 1e-2);
        return Ok(TwoVertexGeodesic { path, dual, w_squared: 0.0, c: 0.0, action_discrete: 0.0 });
    }

    let gfun = GFunction::new(g.clone())?;
    let c = gfun.value(rho1_1) - gfun.value(rho0_1);
    let w_squared = c * c / omega12;

    // Continuum samples on equal reparametrized increments, then polish to
    // the discrete optimum.
    let g0 = gfun.value(rho0_1);
    let mut x: Vec<f64> = (0..=k)
        .map(|j| {
            if j == 0 {
                rho0_1
            } else if j == k {
                rho1_1
            } else {
                gfun.inverse(g0 + c * j as f64 / k as f64)
            }
        })
        .collect();
    polish_chain(g, &mut x);

    let rho: Vec<Vec<f64>> = x.iter().map(|&xv| vec![xv, 1.0 - xv]).collect();
    // continuity at vertex 1: dx/dt = sqrt(w) m_e
    let m: Vec<Vec<f64>> = (0..k).map(|j| vec![(x[j + 1] - x[j]) / (dt * sw)]).collect();
    let path = DiscretePath { dt, rho, m };

    // Dual potentials: velocity relation fixes the differences, the discrete
    // Hamiltonian evolution fixes the levels, the gauge pass zeroes H.
    let ghat: Vec<f64> = (0..k).map(|j| chain_cell(g, x[j], x[j + 1])).collect();
    let diffs: Vec<f64> = (0..k)
        .map(|j| {
            if ghat[j] > 1e-300 {
                path.m[j][0] / (ghat[j] * sw)
            } else {
                0.0
            }
        })
        .collect();
    let mut lambda: Vec<Vec<f64>> = Vec::with_capacity(k);
    lambda.push(vec![diffs[0], 0.0]);
    for node in 1..k {
        // d lambda = -dt/2 * sum of the adjacent cells' conductivity
        // gradients in the node masses, weighted by the squared potential
        // gradient of each cell.
        let bprev = omega12 * diffs[node - 1] * diffs[node - 1];
        let bnext = omega12 * diffs[node] * diffs[node];
        let gprev = cell_conductivity_grad(g, x[node - 1], 1.0 - x[node - 1], x[node], 1.0 - x[node]);
        let gnext = cell_conductivity_grad(g, x[node], 1.0 - x[node], x[node + 1], 1.0 - x[node + 1]);
        let rate0 = -0.5 * (bprev * gprev[2] + bnext * gnext[0]);
        let rate1 = -0.5 * (bprev * gprev[3] + bnext * gnext[1]);
        let prev = &lambda[node - 1];
        let mut row = vec![prev[0] + dt * rate0, prev[1] + dt * rate1];
        // keep the velocity relation exact: re-center the difference
        let want = diffs[node];
        let have = row[0] - row[1];
        let fix = 0.5 * (want - have);
        row[0] += fix;
        row[1] -= fix;
        lambda.push(row);
    }
    let dual = certificate::finalize_dual(dt, lambda, 1e-2);
    let dual = certificate::normalize_dual(&graph, g, &path, &dual, 1e-2);

    let action_discrete = match crate::energy::action(&graph, g, &path) {
        crate::energy::ExtReal::Finite(a) => a,
        crate::energy::ExtReal::Infinite => f64::INFINITY,
    };

    Ok(TwoVertexGeodesic { path, dual, w_squared, c, action_discrete })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn g_function_arithmetic_is_linear() {
        let gf = GFunction::new(Mobility::Arithmetic).unwrap();
        for tau in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((gf.value(tau) - 2.0f64.sqrt() * tau).abs() < 1e-10);
        }
        assert!((gf.inverse(0.7) - 0.7 / 2.0f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn g_function_harmonic_is_arcsine() {
        let gf = GFunction::new(Mobility::Harmonic).unwrap();
        for tau in [0.05f64, 0.3, 0.5, 0.77, 0.95] {
            let expect = 2.0 * (tau.sqrt()).asin();
            assert!((gf.value(tau) - expect).abs() < 1e-9, "tau {tau}");
            assert!((gf.inverse(expect) - tau).abs() < 1e-9);
        }
        assert!((gf.total() - PI).abs() < 1e-8);
    }

    #[test]
    fn full_transport_squared_distances() {
        // arithmetic: W^2 = 2/w; harmonic: W^2 = pi^2/w
        for (g, expect) in [(Mobility::Arithmetic, 2.0), (Mobility::Harmonic, PI * PI)] {
            for w in [1.0, 4.0] {
                let r = two_vertex_geodesic(&g, w, 1.0, 0.0, 64).unwrap();
                assert!(
                    (r.w_squared - expect / w).abs() < 1e-8,
                    "{} w={w}: {}",
                    g.name(),
                    r.w_squared
                );
                r.path.validate(&WeightedGraph::from_edges(2, &[(0, 1, w)]).unwrap()).unwrap();
            }
        }
    }

    #[test]
    fn discrete_optimum_matches_continuum_at_k64() {
        // the discretized action evaluated at its own optimum must sit within
        // the two-vertex acceptance tolerance of the analytic value
        for g in [Mobility::Arithmetic, Mobility::Harmonic, Mobility::Logarithmic] {
            let r = two_vertex_geodesic(&g, 1.0, 1.0, 0.0, 64).unwrap();
            let err = (2.0 * r.action_discrete - r.w_squared).abs();
            println!("{}: discrete-continuum gap at K=64: {err:.3e}", g.name());
            assert!(err < 1e-3, "{}: {err}", g.name());
        }
    }

    #[test]
    fn equal_endpoints_are_trivial() {
        let r = two_vertex_geodesic(&Mobility::Logarithmic, 2.0, 0.4, 0.4, 16).unwrap();
        assert_eq!(r.w_squared, 0.0);
        assert_eq!(r.action_discrete, 0.0);
    }

    #[test]
    fn swap_and_weight_scaling() {
        let a = two_vertex_geodesic(&Mobility::Harmonic, 1.0, 0.8, 0.15, 32).unwrap();
        let b = two_vertex_geodesic(&Mobility::Harmonic, 1.0, 0.15, 0.8, 32).unwrap();
        assert!((a.w_squared - b.w_squared).abs() < 1e-12);
        let c4 = two_vertex_geodesic(&Mobility::Harmonic, 4.0, 0.8, 0.15, 32).unwrap();
        assert!((c4.w_squared - a.w_squared / 4.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_pair_certifies_to_float_accuracy_arithmetic() {
        let g = Mobility::Arithmetic;
        let r = two_vertex_geodesic(&g, 1.0, 1.0, 0.0, 256).unwrap();
        let graph = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let report = certificate::certify(&graph, &g, &r.path, &r.dual);
        println!("{report:?}");
        assert!(report.velocity_residual < 1e-6);
        assert!(report.hj_residual < 1e-6);
        assert!(report.jump_residual < 1e-6);
        assert!(report.monotonicity_violation < 1e-6);
        assert!(report.gap.abs() < 1e-6, "gap {}", report.gap);
        assert!(report.energy_drift < 1e-6);
    }
}
