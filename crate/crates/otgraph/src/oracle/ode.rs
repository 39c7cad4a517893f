//! Boundary-touching geodesic with interior endpoints, built by integrating
//! the reduced Euler-Lagrange system on the three-vertex example graph.
//!
//! In the reduced coordinates `q = (q1, q3)` (masses of vertices 1 and 3; the
//! middle mass is `1 - q1 - q3`) the interior action density is
//!
//! ```text
//! L0(q, u) = u1^2/(1 - q3) + u3^2/(1 - q1),
//! ```
//!
//! whose flow from `q(0) = (0, 1/2)`, `qdot(0) = (0, 1)` conserves
//! `L0(q, qdot) = 1` and touches the boundary only at `t = 0`. The companion
//! potentials integrate `l1' = -q1'^2/(1-q3)^2` with
//! `l2 = l1 - 2 q1'/(1-q3)` and `l3 = l2 + 2 q3'/(1-q1)`, making
//! `(rho, lambda)` a solution of the Hamiltonian system for the arithmetic
//! mobility; rescaling `[-d1, d1]` onto `[0, 1]` gives an action-minimizing
//! pair with both endpoints interior.

use crate::error::{Error, Result};
use crate::mobility::Mobility;
use crate::oracle::boundary3::boundary_example_graph;
use crate::solver::{certificate, DiscretePath, DualPath};

/// Reduced Lagrangian `L0(q, u) = u1^2/(1-q3) + u3^2/(1-q1)`.
pub fn reduced_lagrangian_l0(q: [f64; 2], u: [f64; 2]) -> Result<f64> {
    let (d1, d3) = (1.0 - q[1], 1.0 - q[0]);
    if d1 <= 0.0 || d3 <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "nonpositive denominator: 1-q3 = {d1}, 1-q1 = {d3}"
        )));
    }
    Ok(u[0] * u[0] / d1 + u[1] * u[1] / d3)
}

/// State of the reduced flow: `(q1, q3, q1', q3', l1)`.
type State = [f64; 5];

fn rhs(s: &State) -> State {
    let [q1, q3, v1, v3, _l1] = *s;
    let a = 1.0 - q3;
    let b = 1.0 - q1;
    let acc1 = -v1 * v3 / a + 0.5 * v3 * v3 * a / (b * b);
    let acc3 = -v1 * v3 / b + 0.5 * v1 * v1 * b / (a * a);
    let l1dot = -v1 * v1 / (a * a);
    [v1, v3, acc1, acc3, l1dot]
}

fn rk4_step(s: &State, h: f64) -> State {
    let k1 = rhs(s);
    let mut s2 = *s;
    for i in 0..5 {
        s2[i] = s[i] + 0.5 * h * k1[i];
    }
    let k2 = rhs(&s2);
    for i in 0..5 {
        s2[i] = s[i] + 0.5 * h * k2[i];
    }
    let k3 = rhs(&s2);
    for i in 0..5 {
        s2[i] = s[i] + h * k3[i];
    }
    let k4 = rhs(&s2);
    let mut out = *s;
    for i in 0..5 {
        out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Geodesic built by the reduced ODE, rescaled to `[0, 1]`.
pub struct OdeGeodesic {
    pub path: DiscretePath,
    pub dual: DualPath,
    /// Window half-width actually used (input, possibly halved by the
    /// a-posteriori checks).
    pub delta1: f64,
    /// Worst deviation of the conserved quantity from 1 along the window.
    pub conserved_drift: f64,
    /// Worst residual of the Hamiltonian system (rho' - grad_phi Hg,
    /// lambda' + grad_rho Hg) on the sampled grid.
    pub hamiltonian_residual: f64,
    /// Worst per-interval |H(lambda rate, grad lambda)| on the sampled grid.
    pub hj_residual: f64,
    /// Action of the rescaled pair (`= 4 delta1^2` by energy conservation).
    pub action: f64,
    /// Dual endpoint pairing `(lambda(1), rho1) - (lambda(0), rho0)`.
    pub dual_value: f64,
}

struct Window {
    /// states at t = -d1..d1, index 0 at t = -d1
    states: Vec<State>,
}

/// Integrate forward and backward from the touching point, monitoring the
/// conserved quantity.
fn integrate_window(delta1: f64, step: f64) -> (Window, f64) {
    let nh = (delta1 / step).round() as usize;
    let h = delta1 / nh as f64;
    let init: State = [0.0, 0.5, 0.0, 1.0, 0.0];
    let mut fwd = vec![init];
    let mut bwd = vec![init];
    let mut drift = 0.0f64;
    for i in 0..nh {
        let nf = rk4_step(&fwd[i], h);
        let nb = rk4_step(&bwd[i], -h);
        let cf = nf[2] * nf[2] / (1.0 - nf[1]) + nf[3] * nf[3] / (1.0 - nf[0]);
        let cb = nb[2] * nb[2] / (1.0 - nb[1]) + nb[3] * nb[3] / (1.0 - nb[0]);
        drift = drift.max((cf - 1.0).abs()).max((cb - 1.0).abs());
        fwd.push(nf);
        bwd.push(nb);
    }
    let mut states = Vec::with_capacity(2 * nh + 1);
    states.extend(bwd.into_iter().rev());
    states.extend(fwd.into_iter().skip(1));
    (Window { states }, drift)
}

/// Build the boundary-touching geodesic on the window `[-delta1, delta1]`
/// rescaled to unit time, sampled at the integrator resolution.
///
/// `delta1` must lie in `(0, 0.05]`; it is halved (up to three times) if the
/// a-posteriori window bounds `|q1| <= 0.085`, `0.48 <= q3 <= 0.62`,
/// `q1'' >= 0.1` fail, and the conserved quantity must hold to `1e-8`.
pub fn ode_boundary_geodesic(delta1: f64, step: f64) -> Result<OdeGeodesic> {
    if !(delta1 > 0.0 && delta1 <= 0.05) {
        return Err(Error::InvalidInput("delta1 must lie in (0, 0.05]".into()));
    }
    if step <= 0.0 || step > delta1 {
        return Err(Error::InvalidInput("step must lie in (0, delta1]".into()));
    }

    let mut d1 = delta1;
    let mut chosen = None;
    for _ in 0..4 {
        let (win, drift) = integrate_window(d1, step);
        let bounds_ok = win.states.iter().all(|s| {
            let q1 = s[0];
            let q3 = s[1];
            let acc1 = rhs(s)[2];
            q1.abs() <= 0.085 && (0.48..=0.62).contains(&q3) && acc1 >= 0.1
        });
        if bounds_ok && drift <= 1e-8 {
            chosen = Some((win, drift));
            break;
        }
        if drift > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "step {step} too coarse: conserved-quantity drift {drift:.3e}"
            )));
        }
        d1 *= 0.5;
    }
    let (win, drift) =
        chosen.ok_or_else(|| Error::InvalidInput("window bounds failed down to delta1/8".into()))?;

    let graph = boundary_example_graph();
    let g = Mobility::Arithmetic;
    let k = win.states.len() - 1;
    let dt = 1.0 / k as f64;

    // rho(s) = q~(2 d1 s - d1), lambda(s) = 2 d1 l(2 d1 s - d1)
    let lift = |s: &State| -> ([f64; 3], [f64; 3]) {
        let [q1, q3, v1, v3, l1] = *s;
        let q2 = 1.0 - q1 - q3;
        let l2 = l1 - 2.0 * v1 / (1.0 - q3);
        let l3 = l2 + 2.0 * v3 / (1.0 - q1);
        ([q1, q2, q3], [l1, l2, l3])
    };

    let mut rho = Vec::with_capacity(k + 1);
    let mut lambda_nodes = Vec::with_capacity(k + 1);
    for s in &win.states {
        let (q, l) = lift(s);
        rho.push(q.to_vec());
        lambda_nodes.push(l.iter().map(|&x| 2.0 * d1 * x).collect::<Vec<f64>>());
    }

    // Momentum from exact discrete continuity on the path graph:
    // m_12 = -(drho_1)/dt (vertex 1), m_23 = (drho_3)/dt... signs from the
    // divergence convention; uniquely determined on a tree.
    let mut m = Vec::with_capacity(k);
    for w in rho.windows(2) {
        let dq1 = (w[1][0] - w[0][0]) / dt;
        let dq3 = (w[1][2] - w[0][2]) / dt;
        // edge order: (1,2) then (2,3), oriented small->large
        // vertex 1: dq1/dt - m_12 = 0 ; vertex 3: dq3/dt + m_23 = 0
        m.push(vec![dq1, -dq3]);
    }
    let path = DiscretePath { dt, rho: rho.clone(), m };

    // Residual of the Hamiltonian system on the smooth samples.
    let mut ham_res = 0.0f64;
    for (s, l_row) in win.states.iter().zip(&lambda_nodes) {
        let (q, _) = lift(s);
        let lam = l_row.clone();
        let gp = crate::energy::grad_phi_hg(&graph, &g, &q, &lam).unwrap();
        // d rho/ds = 2 d1 (q1', -(q1'+q3'), q3')
        let want = [2.0 * d1 * s[2], -2.0 * d1 * (s[2] + s[3]), 2.0 * d1 * s[3]];
        for i in 0..3 {
            ham_res = ham_res.max((want[i] - gp[i]).abs());
        }
        // d lambda/ds = (2 d1)^2 l' with l' = -grad_rho Hg(q, l); compare on
        // interior samples only (grad_rho needs positive masses).
        if q.iter().all(|&x| x > 1e-12) {
            let gr = crate::energy::grad_rho_hg(&graph, &g, &q, &lam).unwrap();
            let l1d = -s[2] * s[2] / ((1.0 - s[1]) * (1.0 - s[1]));
            // analytic rates of l2, l3 via the evolution equations
            let d12 = lam[0] - lam[1];
            let d32 = lam[2] - lam[1];
            let l2d = -0.25 * (d12 * d12 + d32 * d32) / (2.0 * d1 * 2.0 * d1);
            let l3d = -0.25 * (d32 * d32) / (2.0 * d1 * 2.0 * d1);
            let want = [l1d, l2d, l3d];
            for i in 0..3 {
                let have = -gr[i] / (4.0 * d1 * d1);
                ham_res = ham_res.max((want[i] - have).abs() * 4.0 * d1 * d1);
            }
        }
    }

    // Interval potentials: midpoint averages of the node samples.
    let lambda: Vec<Vec<f64>> = (0..k)
        .map(|kk| {
            (0..3).map(|i| 0.5 * (lambda_nodes[kk][i] + lambda_nodes[kk + 1][i])).collect()
        })
        .collect();
    let dual = certificate::finalize_dual(dt, lambda, 1e-2);

    // Per-interval H with analytic rates (the gauge of the construction).
    let mut hj = 0.0f64;
    for kk in 0..k {
        let mid_state = &win.states[kk];
        let (_q, lraw) = lift(mid_state);
        let lam: Vec<f64> = lraw.iter().map(|&x| 2.0 * d1 * x).collect();
        let rate: Vec<f64> = {
            let d12 = lraw[0] - lraw[1];
            let d32 = lraw[2] - lraw[1];
            let l1d = -0.25 * d12 * d12;
            let l3d = -0.25 * d32 * d32;
            let l2d = l1d + l3d;
            vec![4.0 * d1 * d1 * l1d, 4.0 * d1 * d1 * l2d, 4.0 * d1 * d1 * l3d]
        };
        let b = crate::graph::gradient(&graph, &lam).unwrap();
        let h = crate::energy::dual_h(&graph, &g, &rate, &b).unwrap();
        hj = hj.max(h.value.abs());
    }

    // Action by energy conservation: F = 2 (2 d1)^2 L0 = 8 d1^2, A = 4 d1^2.
    let action = 4.0 * d1 * d1;
    let dual_value: f64 = (0..3)
        .map(|i| {
            lambda_nodes[k][i] * rho[k][i] - lambda_nodes[0][i] * rho[0][i]
        })
        .sum();

    Ok(OdeGeodesic {
        path,
        dual,
        delta1: d1,
        conserved_drift: drift,
        hamiltonian_residual: ham_res,
        hj_residual: hj,
        action,
        dual_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_lagrangian_values() {
        assert!((reduced_lagrangian_l0([0.0, 0.5], [0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(reduced_lagrangian_l0([0.3, 0.2], [0.0, 0.0]).unwrap(), 0.0);
        assert!(reduced_lagrangian_l0([1.0, 0.5], [0.1, 0.1]).is_err());
    }

    #[test]
    fn initial_acceleration_is_one_quarter() {
        let s: State = [0.0, 0.5, 0.0, 1.0, 0.0];
        let acc1 = rhs(&s)[2];
        assert!((acc1 - 0.25).abs() < 1e-15, "q1''(0) = {acc1}");
    }

    #[test]
    fn window_invariants() {
        let r = ode_boundary_geodesic(0.05, 1e-4).unwrap();
        assert!(r.conserved_drift <= 1e-8, "drift {}", r.conserved_drift);
        assert!(r.hamiltonian_residual <= 1e-6, "ham {}", r.hamiltonian_residual);
        assert!(r.hj_residual <= 1e-6, "hj {}", r.hj_residual);
        assert!((r.action - r.dual_value).abs() <= 1e-6, "gap {}", r.action - r.dual_value);
        // boundary touch at the midpoint only; interior elsewhere
        let k = r.path.intervals();
        assert_eq!(r.path.rho[k / 2][0], 0.0);
        for (kk, row) in r.path.rho.iter().enumerate() {
            if kk != k / 2 {
                assert!(row[0] > 0.0, "rho_1 at {kk}");
            }
            // q1 >= 0.05 t^2 on the window
            let t = (kk as f64 / k as f64) * 2.0 * r.delta1 - r.delta1;
            assert!(row[0] >= 0.05 * t * t - 1e-12);
            assert!(row[0] <= 0.085 + 1e-12);
            assert!((0.48..=0.62).contains(&row[2]));
        }
        // lambda monotone non-increasing coordinatewise
        assert!(r.dual.monotonicity_violation() < 1e-12);
    }

    #[test]
    fn path_is_discretely_feasible() {
        let r = ode_boundary_geodesic(0.05, 1e-3).unwrap();
        r.path.validate(&boundary_example_graph()).unwrap();
    }

    #[test]
    fn coarse_step_is_rejected() {
        assert!(ode_boundary_geodesic(0.05, 0.05).is_err());
    }
}
