//! Primal-dual proximal splitting for the discretized action.
//!
//! The problem is lifted with one conductivity variable per time cell and
//! edge:
//!
//! ```text
//! minimize   sum_{k,e} (dt/2) f(theta_{k,e}, m_{k,e})
//! subject to (rho^{k+1} - rho^k)/dt + div(m^k) = 0          (multiplier y)
//!            theta_{k,e} <= ghat_e(rho^k, rho^{k+1})        (cuts, y >= 0)
//!            rho^k in the simplex, endpoints pinned,
//! ```
//!
//! where `f(t, s) = s^2/t` and `ghat` is the concave 1-homogeneous cell
//! conductivity. Since `f` is nonincreasing in `t`, relaxing the equality
//! `theta = ghat` to an inequality leaves the minimizers unchanged, and the
//! concave constraint is enforced through supporting hyperplanes (all of them
//! pass through the origin by homogeneity, so every cut generated anywhere is
//! globally valid). For the arithmetic mobility the single seed cut is exact;
//! for the others cuts are refreshed at the current iterate until feasible.
//!
//! Within a cut round the iteration is diagonal-preconditioned Chambolle-Pock:
//! the (theta, m) prox is the closed-form perspective prox (safeguarded Newton
//! on its optimality cubic), the rho prox is a Euclidean simplex projection,
//! and the dual step is linear (continuity) plus a nonnegative clip (cuts).
//! The continuity multiplier divided by `dt` converges to the discrete
//! Hamilton-Jacobi potential.

use crate::energy::{cell_conductivity, cell_conductivity_grad};
use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::mobility::Mobility;
use crate::parallel;
use crate::simplex::ProbVector;
use crate::solver::{certificate, feasible_path, DiscretePath, DualPath, SolveOptions};

#[derive(Debug, Clone, Copy)]
struct Cut {
    /// coefficient of theta in the scaled row `th_coef * theta - <coef, masses> <= 0`
    th_coef: f64,
    coef: [f64; 4],
    y: f64,
    /// dual step of this row (recomputed with the step sizes)
    sigma: f64,
}

impl Cut {
    /// Normalize the row so its largest coefficient is one; boundary-deep
    /// supergradients otherwise poison the diagonal step sizes.
    fn normalized(coef: [f64; 4]) -> Self {
        let scale = coef.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
        Cut {
            th_coef: 1.0 / scale,
            coef: [coef[0] / scale, coef[1] / scale, coef[2] / scale, coef[3] / scale],
            y: 0.0,
            sigma: 0.0,
        }
    }
}

/// Contiguous cut storage: cuts of cell `c` live at `offsets[c]..offsets[c+1]`.
struct CutArena {
    cuts: Vec<Cut>,
    offsets: Vec<usize>,
}

impl CutArena {
    fn from_cells(cells: Vec<Vec<Cut>>) -> Self {
        let mut offsets = Vec::with_capacity(cells.len() + 1);
        let mut cuts = Vec::new();
        offsets.push(0);
        for cell in cells {
            cuts.extend(cell);
            offsets.push(cuts.len());
        }
        CutArena { cuts, offsets }
    }

    fn cell(&self, c: usize) -> &[Cut] {
        &self.cuts[self.offsets[c]..self.offsets[c + 1]]
    }

    fn cell_mut(&mut self, c: usize) -> &mut [Cut] {
        &mut self.cuts[self.offsets[c]..self.offsets[c + 1]]
    }

    fn len_of(&self, c: usize) -> usize {
        self.offsets[c + 1] - self.offsets[c]
    }

    /// Insert a cut into cell `c` (linear shift of the tail; refreshes are rare).
    fn insert(&mut self, c: usize, cut: Cut) {
        self.cuts.insert(self.offsets[c + 1], cut);
        for o in self.offsets[c + 1..].iter_mut() {
            *o += 1;
        }
    }

    fn remove(&mut self, c: usize, idx_in_cell: usize) {
        self.cuts.remove(self.offsets[c] + idx_in_cell);
        for o in self.offsets[c + 1..].iter_mut() {
            *o -= 1;
        }
    }
}

struct Workspace {
    n: usize,
    ne: usize,
    k: usize,
    dt: f64,
    rho: Vec<f64>,
    m: Vec<f64>,
    th: Vec<f64>,
    rho_hat: Vec<f64>,
    m_hat: Vec<f64>,
    th_hat: Vec<f64>,
    rho_bar: Vec<f64>,
    m_bar: Vec<f64>,
    th_bar: Vec<f64>,
    y: Vec<f64>,
    cuts: CutArena,
    /// per-cell aggregates of the cut multipliers, refreshed by the dual
    /// pass: `[sum y coef_0..3, sum y th_coef]`
    cut_agg: Vec<[f64; 5]>,
    tau_rho: Vec<f64>,
    tau_m: Vec<f64>,
    tau_th: Vec<f64>,
    sigma_cont: Vec<f64>,
    /// dual/primal step balance: sigma scales by it, tau by its inverse
    balance: f64,
    /// number of seed cuts per cell exempt from eviction
    protected: usize,
}

/// Anisotropic prox of `c s^2/t`: minimize
/// `c s^2/t + (t - th)^2/(2 tt) + (s - sh)^2/(2 ts)`. `hint` seeds the Newton
/// iteration (the previous conductivity iterate is usually very close).
fn perspective_prox(th: f64, sh: f64, c: f64, tt: f64, ts: f64, hint: f64) -> (f64, f64) {
    let gs = c * ts;
    let gt = c * tt;
    let boundary_obj = 0.5 * (th * th / tt + sh * sh / ts);
    if sh == 0.0 {
        return if th > 0.0 { (th, 0.0) } else { (0.0, 0.0) };
    }
    // root of (t - th)(t + 2 gs)^2 = gt sh^2 beyond max(th, 0)
    let base = th.max(0.0);
    let guess = (gt * sh * sh).cbrt();
    let mut lo = base;
    let mut hi = base + guess + 2.0 * gs + 1.0;
    let psi = |t: f64| (t - th) * (t + 2.0 * gs) * (t + 2.0 * gs) - gt * sh * sh;
    while psi(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut t = if hint > lo && hint < hi { hint } else { 0.5 * (lo + hi) };
    for _ in 0..40 {
        let v = psi(t);
        if v > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dp = (t + 2.0 * gs) * (3.0 * t + 2.0 * gs - 2.0 * th);
        let next = if dp > 0.0 { t - v / dp } else { 0.5 * (lo + hi) };
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        let moved = (next - t).abs();
        t = next;
        // Newton is quadratic here: a 3e-8 relative move puts the next
        // correction below double precision.
        if moved <= 3e-8 * t.abs() || hi - lo <= 1e-14 * hi.max(1e-30) {
            break;
        }
    }
    let s = sh * t / (t + 2.0 * gs);
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    let interior_obj =
        c * s * s / t + 0.5 * ((t - th) * (t - th) / tt + (s - sh) * (s - sh) / ts);
    if boundary_obj < interior_obj {
        (0.0, 0.0)
    } else {
        (t, s)
    }
}

/// Supergradient cut of the cell conductivity at base masses `(ra, rb)`
/// (rows k and k+1), for edge `(i, j)`. Any interior base yields a globally
/// valid bound: by concavity and 1-homogeneity the tangent plane passes
/// through the origin, so `ghat(z) <= <grad ghat(z0), z>` for all `z >= 0`.
fn cut_at(g: &Mobility, graph: &WeightedGraph, e: usize, ra: &[f64], rb: &[f64]) -> Cut {
    let (i, j) = graph.edges()[e];
    let floor = 1e-9;
    let coef = cell_conductivity_grad(
        g,
        ra[i].max(floor),
        ra[j].max(floor),
        rb[i].max(floor),
        rb[j].max(floor),
    );
    Cut::normalized(coef)
}

/// Shared fan of supergradient cuts: the gradient of a 1-homogeneous function
/// is 0-homogeneous, so a cut depends on its base only through the ray
/// direction. Along diagonal rays (the same mass ratio at both nodes) the
/// segment is constant and the cut has the closed form
/// `(d1(a,1-a)/2, d1(1-a,a)/2, d1(a,1-a)/2, d1(1-a,a)/2)`, which permits
/// extremely boundary-deep base ratios. Those deep cuts pinch the lifted
/// conductivity of dead edges: the harmonic mean dies linearly and is pinned
/// exactly by the `a -> 0` limit, while the logarithmic mean dies like
/// `1/log`, leaving a ghost conductivity of order `1/log(1/a)` that the
/// convergence test charges against the action instead.
fn fan_cuts(g: &Mobility) -> Vec<Cut> {
    const RATIOS: [f64; 8] = [1e-300, 1e-30, 1e-8, 1e-3, 0.02, 0.12, 0.3, 0.5];
    let mut cuts = Vec::new();
    let mut push = |alpha: f64| {
        let d_lo = g.d1(alpha, 1.0 - alpha);
        let d_hi = g.d1(1.0 - alpha, alpha);
        if d_lo.is_finite() && d_hi.is_finite() {
            cuts.push(Cut::normalized([0.5 * d_lo, 0.5 * d_hi, 0.5 * d_lo, 0.5 * d_hi]));
            if alpha != 0.5 {
                cuts.push(Cut::normalized([0.5 * d_hi, 0.5 * d_lo, 0.5 * d_hi, 0.5 * d_lo]));
            }
        }
    };
    // exact face limits when the boundary slope is finite (harmonic)
    push(0.0);
    for &alpha in &RATIOS {
        push(alpha);
    }
    cuts
}

/// Pock-Chambolle diagonal step sizes (`sigma_r = 1/sum_c |A_rc|`,
/// `tau_c = 1/sum_r |A_rc|`), tilted by the primal/dual balance factor.
fn recompute_steps(ws: &mut Workspace, graph: &WeightedGraph) {
    let (n, ne, k, dt) = (ws.n, ws.ne, ws.k, ws.dt);
    let sw = graph.sqrt_weights();
    let bal = ws.balance;
    for kk in 0..k {
        for i in 0..n {
            let mut s = 0.0;
            if kk > 0 {
                s += 1.0 / dt;
            }
            if kk + 1 < k {
                s += 1.0 / dt;
            }
            for &e in graph.incident_edges(i) {
                s += sw[e];
            }
            ws.sigma_cont[kk * n + i] = bal / s;
        }
        for e in 0..ne {
            let cell = kk * ne + e;
            for cut in ws.cuts.cell_mut(cell) {
                let mut s = cut.th_coef;
                if kk > 0 {
                    s += cut.coef[0].abs() + cut.coef[1].abs();
                }
                if kk + 1 < k {
                    s += cut.coef[2].abs() + cut.coef[3].abs();
                }
                cut.sigma = bal / s;
            }
        }
    }
    for kk in 1..k {
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut s = 2.0 / dt;
            for &e in graph.incident_edges(i) {
                let (ei, _ej) = graph.edges()[e];
                let pos = if ei == i { 0 } else { 1 };
                for cut in ws.cuts.cell((kk - 1) * ne + e) {
                    s += cut.coef[2 + pos].abs();
                }
                for cut in ws.cuts.cell(kk * ne + e) {
                    s += cut.coef[pos].abs();
                }
            }
            worst = worst.max(s);
        }
        ws.tau_rho[kk] = 1.0 / (worst * bal);
    }
    for kk in 0..k {
        for e in 0..ne {
            ws.tau_m[kk * ne + e] = 1.0 / (2.0 * sw[e] * bal);
            let colsum: f64 = ws.cuts.cell(kk * ne + e).iter().map(|c| c.th_coef).sum();
            ws.tau_th[kk * ne + e] = 1.0 / (colsum.max(1e-12) * bal);
        }
    }
}

/// Over-relaxation factor of the primal-dual iteration (valid in (0, 2)).
const RELAX: f64 = 1.0;

/// One relaxed primal-first Chambolle-Pock iteration:
/// `x^ = prox(x - tau A' y)`, `y^ = prox(y + sigma A (2x^ - x))`, then blend
/// both with the relaxation factor.
///
/// The loops are deliberately sequential: an iteration touches a few thousand
/// numbers, far below the granularity where fork-join pays off. Parallelism
/// lives in the quadrature-heavy residual checks and in the certificate.
fn iterate(ws: &mut Workspace, graph: &WeightedGraph) {
    let (n, ne, k, dt) = (ws.n, ws.ne, ws.k, ws.dt);
    let edges = graph.edges();
    let sw = graph.sqrt_weights();
    let c_obj = 0.5 * dt;

    // primal candidates: rho nodes 1..k-1 (endpoints pinned)
    ws.rho_hat[..n].copy_from_slice(&ws.rho[..n]);
    ws.rho_hat[k * n..].copy_from_slice(&ws.rho[k * n..]);
    let mut grad = [0.0f64; 64];
    debug_assert!(n <= 64, "solver assumes small vertex counts");
    for kk in 1..k {
        let tau = ws.tau_rho[kk];
        let grad = &mut grad[..n];
        for i in 0..n {
            grad[i] = (ws.y[(kk - 1) * n + i] - ws.y[kk * n + i]) / dt;
        }
        for e in 0..ne {
            let (i, j) = edges[e];
            let prev = &ws.cut_agg[(kk - 1) * ne + e];
            let next = &ws.cut_agg[kk * ne + e];
            grad[i] -= prev[2] + next[0];
            grad[j] -= prev[3] + next[1];
        }
        let row = &mut ws.rho_hat[kk * n..(kk + 1) * n];
        for i in 0..n {
            row[i] = ws.rho[kk * n + i] - tau * grad[i];
        }
        crate::numerics::projection::project_simplex(row);
    }

    // primal candidates: (theta, m) cells
    for cell in 0..k * ne {
        let kk = cell / ne;
        let e = cell % ne;
        let (i, j) = edges[e];
        let gm = sw[e] * (ws.y[kk * n + j] - ws.y[kk * n + i]);
        let gth: f64 = ws.cut_agg[cell][4];
        let sh = ws.m[cell] - ws.tau_m[cell] * gm;
        let that = ws.th[cell] - ws.tau_th[cell] * gth;
        let (t, s) = perspective_prox(that, sh, c_obj, ws.tau_th[cell], ws.tau_m[cell], ws.th[cell]);
        ws.th_hat[cell] = t;
        ws.m_hat[cell] = s;
    }

    // extrapolated point 2 x^ - x
    for idx in 0..ws.rho.len() {
        ws.rho_bar[idx] = 2.0 * ws.rho_hat[idx] - ws.rho[idx];
    }
    for idx in 0..ws.m.len() {
        ws.m_bar[idx] = 2.0 * ws.m_hat[idx] - ws.m[idx];
        ws.th_bar[idx] = 2.0 * ws.th_hat[idx] - ws.th[idx];
    }

    // dual candidates, blended in place
    for kk in 0..k {
        let ra = &ws.rho_bar[kk * n..(kk + 1) * n];
        let rb = &ws.rho_bar[(kk + 1) * n..(kk + 2) * n];
        let yrow = &mut ws.y[kk * n..(kk + 1) * n];
        for i in 0..n {
            let mut resid = (rb[i] - ra[i]) / dt;
            for &e in graph.incident_edges(i) {
                let (lo, _) = edges[e];
                let flow = sw[e] * ws.m_bar[kk * ne + e];
                resid += if i == lo { -flow } else { flow };
            }
            yrow[i] += RELAX * ws.sigma_cont[kk * n + i] * resid;
        }
        for e in 0..ne {
            let cell = kk * ne + e;
            let (i, j) = edges[e];
            let th = ws.th_bar[cell];
            let mut agg = [0.0f64; 5];
            for cut in ws.cuts.cell_mut(cell) {
                let slack = cut.th_coef * th
                    - cut.coef[0] * ra[i]
                    - cut.coef[1] * ra[j]
                    - cut.coef[2] * rb[i]
                    - cut.coef[3] * rb[j];
                let cand = (cut.y + cut.sigma * slack).max(0.0);
                cut.y += RELAX * (cand - cut.y);
                agg[0] += cut.coef[0] * cut.y;
                agg[1] += cut.coef[1] * cut.y;
                agg[2] += cut.coef[2] * cut.y;
                agg[3] += cut.coef[3] * cut.y;
                agg[4] += cut.th_coef * cut.y;
            }
            ws.cut_agg[cell] = agg;
        }
    }

    // blend primal
    for idx in 0..ws.rho.len() {
        ws.rho[idx] += RELAX * (ws.rho_hat[idx] - ws.rho[idx]);
    }
    for idx in 0..ws.m.len() {
        ws.m[idx] += RELAX * (ws.m_hat[idx] - ws.m[idx]);
        ws.th[idx] += RELAX * (ws.th_hat[idx] - ws.th[idx]);
    }
}

struct Residuals {
    continuity: f64,
    /// `|m - ghat grad(mu)|` against the true cell conductivity
    velocity: f64,
    /// `|m - theta grad(mu)|` against the lifted conductivity: measures
    /// convergence on the current polytope even while cuts are loose
    velocity_inner: f64,
    cut_violation: f64,
    /// first-order action slack bought from the relaxation,
    /// `sum_cells dt (theta - ghat)_+ mu_e^2`; detects flux pushed through
    /// ghost conductivity on dead edges (the logarithmic mean dies too
    /// slowly at the boundary for finite cuts to pin it exactly)
    exploit: f64,
}

/// Conductivities of every cell at the current prox candidates; the only
/// quadrature-bound part of an iteration block, so it runs data-parallel.
fn candidate_conductivities(ws: &Workspace, graph: &WeightedGraph, g: &Mobility) -> Vec<f64> {
    let (n, ne) = (ws.n, ws.ne);
    let edges = graph.edges();
    parallel::map_collect(ws.k * ne, |cell| {
        let kk = cell / ne;
        let e = cell % ne;
        let (i, j) = edges[e];
        let ra = &ws.rho_hat[kk * n..(kk + 1) * n];
        let rb = &ws.rho_hat[(kk + 1) * n..(kk + 2) * n];
        cell_conductivity(g, ra[i], ra[j], rb[i], rb[j])
    })
}

fn residuals(ws: &Workspace, graph: &WeightedGraph, ghat: &[f64]) -> Residuals {
    let (n, ne, k, dt) = (ws.n, ws.ne, ws.k, ws.dt);
    let edges = graph.edges();
    let sw = graph.sqrt_weights();
    let mut continuity = 0.0f64;
    let mut velocity = 0.0f64;
    let mut velocity_inner = 0.0f64;
    let mut cut_violation = 0.0f64;
    let mut exploit = 0.0f64;
    for kk in 0..k {
        let ra = &ws.rho_hat[kk * n..(kk + 1) * n];
        let rb = &ws.rho_hat[(kk + 1) * n..(kk + 2) * n];
        for i in 0..n {
            let mut resid = (rb[i] - ra[i]) / dt;
            for &e in graph.incident_edges(i) {
                let (lo, _) = edges[e];
                let flow = sw[e] * ws.m_hat[kk * ne + e];
                resid += if i == lo { -flow } else { flow };
            }
            continuity = continuity.max(resid.abs());
        }
        for e in 0..ne {
            let cell = kk * ne + e;
            let (i, j) = edges[e];
            let mu = sw[e] * (ws.y[kk * n + i] - ws.y[kk * n + j]) / dt;
            velocity = velocity.max((ws.m_hat[cell] - ghat[cell] * mu).abs());
            velocity_inner = velocity_inner.max((ws.m_hat[cell] - ws.th_hat[cell] * mu).abs());
            cut_violation = cut_violation.max(ws.th_hat[cell] - ghat[cell]);
            exploit += dt * (ws.th_hat[cell] - ghat[cell]).max(0.0) * mu * mu;
        }
    }
    Residuals { continuity, velocity, velocity_inner, cut_violation: cut_violation.max(0.0), exploit }
}

const CHECK_EVERY: usize = 1000;

/// Cap on warm-started velocities (in units of mass per unit time over
/// conductivity); larger seeds destabilize more than they help.
const VCAP: f64 = 300.0;

pub(super) fn minimize(
    graph: &WeightedGraph,
    g: &Mobility,
    rho0: &ProbVector,
    rho1: &ProbVector,
    opts: &SolveOptions,
) -> Result<(DiscretePath, DualPath, usize, bool)> {
    let n = graph.n();
    let ne = graph.num_edges();
    let k = opts.k;
    let dt = 1.0 / k as f64;

    // Initialization: concatenated transport when it fits the grid, linear
    // interpolation otherwise.
    let init = feasible_path(graph, g, rho0, rho1, k).unwrap_or_else(|_| {
        let rho: Vec<Vec<f64>> = (0..=k)
            .map(|kk| {
                let t = kk as f64 / k as f64;
                (0..n).map(|i| (1.0 - t) * rho0.get(i) + t * rho1.get(i)).collect()
            })
            .collect();
        DiscretePath { dt, rho, m: vec![vec![0.0; ne]; k] }
    });

    let mut ws = Workspace {
        n,
        ne,
        k,
        dt,
        rho: init.rho.concat(),
        m: init.m.concat(),
        th: vec![0.0; k * ne],
        rho_hat: init.rho.concat(),
        m_hat: init.m.concat(),
        th_hat: vec![0.0; k * ne],
        rho_bar: vec![0.0; (k + 1) * n],
        m_bar: vec![0.0; k * ne],
        th_bar: vec![0.0; k * ne],
        y: vec![0.0; k * n],
        cuts: CutArena { cuts: Vec::new(), offsets: vec![0] },
        cut_agg: vec![[0.0; 5]; k * ne],
        tau_rho: vec![0.0; k + 1],
        tau_m: vec![0.0; k * ne],
        tau_th: vec![0.0; k * ne],
        sigma_cont: vec![0.0; k * n],
        balance: 1.0,
        protected: 1,
    };
    let fan = if matches!(g, Mobility::Arithmetic) { Vec::new() } else { fan_cuts(g) };
    ws.protected = 1 + fan.len();
    let mut cells: Vec<Vec<Cut>> = Vec::with_capacity(k * ne);
    for cell in 0..k * ne {
        let kk = cell / ne;
        let e = cell % ne;
        let ra = &init.rho[kk];
        let rb = &init.rho[kk + 1];
        let (i, j) = graph.edges()[e];
        ws.th[cell] = cell_conductivity(g, ra[i], ra[j], rb[i], rb[j]);
        let mut seed = cut_at(g, graph, e, ra, rb);
        // stationarity of the conductivity block at the initialization: the
        // binding cut carries the multiplier (dt/2) (m/theta)^2. The velocity
        // is capped at the scale the continuity equation can produce, so a
        // far-from-optimal initialization cannot seed astronomical
        // multipliers that take thousands of iterations to unwind.
        if ws.th[cell] > 1e-12 {
            let v = (init.m[kk][e] / ws.th[cell]).clamp(-VCAP, VCAP);
            seed.y = 0.5 * dt * v * v / seed.th_coef;
        }
        let mut cell_cuts = Vec::with_capacity(1 + fan.len());
        cell_cuts.push(seed);
        cell_cuts.extend(fan.iter().copied());
        cells.push(cell_cuts);
    }
    ws.cuts = CutArena::from_cells(cells);
    for cell in 0..k * ne {
        let mut agg = [0.0f64; 5];
        for cut in ws.cuts.cell(cell) {
            agg[0] += cut.coef[0] * cut.y;
            agg[1] += cut.coef[1] * cut.y;
            agg[2] += cut.coef[2] * cut.y;
            agg[3] += cut.coef[3] * cut.y;
            agg[4] += cut.th_coef * cut.y;
        }
        ws.cut_agg[cell] = agg;
    }
    ws.th_hat.copy_from_slice(&ws.th);
    // warm-start the continuity multiplier from the initialization path
    let warm = warm_start_dual(graph, g, &init);
    for (kk, row) in warm.iter().enumerate() {
        for i in 0..n {
            ws.y[kk * n + i] = dt * row[i];
        }
    }

    let mut iterations = 0usize;
    let mut converged = false;
    // The residuals of the iteration are not monotone; keep the best-merit
    // snapshot of the prox candidates and their multiplier.
    let mut best_merit = f64::INFINITY;
    let mut best: (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) =
        (ws.rho_hat.clone(), ws.m_hat.clone(), ws.th_hat.clone(), ws.y.clone());
    recompute_steps(&mut ws, graph);
    loop {
        for _ in 0..CHECK_EVERY.min(opts.max_iter.saturating_sub(iterations)).max(1) {
            iterate(&mut ws, graph);
            iterations += 1;
        }
        let ghat = candidate_conductivities(&ws, graph, g);
        let res = residuals(&ws, graph, &ghat);
        let scale = 1.0 + ws.m_hat.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if std::env::var_os("OTGRAPH_TRACE").is_some() {
            eprintln!(
                "iter {iterations}: cont {:.3e} vel {:.3e} vin {:.3e} cut {:.3e} xpl {:.3e}",
                res.continuity, res.velocity, res.velocity_inner, res.cut_violation, res.exploit
            );
        }
        let merit = res.continuity.max(res.velocity).max(res.cut_violation);
        if merit < best_merit {
            best_merit = merit;
            best.0.copy_from_slice(&ws.rho_hat);
            best.1.copy_from_slice(&ws.m_hat);
            best.2.copy_from_slice(&ws.th_hat);
            best.3.copy_from_slice(&ws.y);
        }
        // Progress on the current polytope is measured against the lifted
        // conductivity; the true-conductivity residual stays large until the
        // cuts have closed in.
        let settled = res.continuity <= opts.tol * scale
            && res.velocity_inner <= opts.tol * scale
            && res.exploit <= opts.tol * scale;
        if settled {
            // the iterate solved the current polytope; tighten it at the
            // solution and stop once no cut is violated beyond the noise
            // floor of the cut quadratures (the exploit gate already charges
            // any remaining slack against the action)
            let added =
                refresh_cuts(&mut ws, graph, g, (10.0 * opts.tol * scale).max(1e-8), &ghat);
            if added == 0 {
                converged = true;
                break;
            }
            best_merit = f64::INFINITY;
            recompute_steps(&mut ws, graph);
        } else if res.cut_violation
            > 10.0 * (res.continuity + res.velocity_inner).max(opts.tol * scale)
        {
            // the polytope is much looser than the iterate error; tighten
            // early so the inner solve does not chase a relaxed optimum
            if refresh_cuts(&mut ws, graph, g, (opts.tol * scale).max(1e-8), &ghat) > 0 {
                best_merit = f64::INFINITY;
                recompute_steps(&mut ws, graph);
            }
        }
        if iterations >= opts.max_iter {
            break;
        }
    }
    if !converged {
        ws.rho_hat.copy_from_slice(&best.0);
        ws.m_hat.copy_from_slice(&best.1);
        ws.th_hat.copy_from_slice(&best.2);
        ws.y.copy_from_slice(&best.3);
    }

    // the prox candidates are the feasible convergent sequence
    let rho_rows: Vec<Vec<f64>> =
        (0..=k).map(|kk| ws.rho_hat[kk * n..(kk + 1) * n].to_vec()).collect();
    let m_rows: Vec<Vec<f64>> =
        (0..k).map(|kk| ws.m_hat[kk * ne..(kk + 1) * ne].to_vec()).collect();
    let path = DiscretePath { dt, rho: rho_rows, m: m_rows };
    let lambda: Vec<Vec<f64>> =
        (0..k).map(|kk| ws.y[kk * n..(kk + 1) * n].iter().map(|v| v / dt).collect()).collect();
    let dual = certificate::finalize_dual(dt, lambda, opts.jump_abs);
    Ok((path, dual, iterations, converged))
}

/// Least-squares dual potentials for a primal path: per interval solve
/// `grad(lambda) ~ m/ghat` in the omega-weighted normal equations (one dense
/// pseudo-inverse solve on live edges), then gauge the levels with the usual
/// normalization march. Starting the dual here instead of at zero removes
/// most of the burn-in when the initialization path is close to optimal.
fn warm_start_dual(graph: &WeightedGraph, g: &Mobility, init: &DiscretePath) -> Vec<Vec<f64>> {
    let n = graph.n();
    let k = init.intervals();
    let mut lambda = Vec::with_capacity(k);
    for kk in 0..k {
        let ghat = init.cell_conductivities(graph, g, kk);
        let mut l = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            if ghat[e] <= 1e-12 {
                continue;
            }
            let v = init.m[kk][e] / ghat[e];
            let w = graph.weight(i, j);
            let sw = graph.sqrt_weights()[e];
            l[(i, j)] -= w;
            l[(j, i)] -= w;
            l[(i, i)] += w;
            l[(j, j)] += w;
            rhs[i] += sw * v;
            rhs[j] -= sw * v;
        }
        let row = crate::numerics::jacobi::solve_psd_pinv(&l, &rhs, 1e-9).unwrap_or(vec![0.0; n]);
        lambda.push(row);
    }
    let dual = certificate::finalize_dual(init.dt, lambda, f64::INFINITY);
    let dual = certificate::normalize_dual(graph, g, init, &dual, f64::INFINITY);
    dual.lambda
}

/// Add supporting hyperplanes wherever the lifted conductivity exceeds the
/// true one by more than `tol`. The binding multiplier mass of the cell is
/// transferred onto the fresh cut so the dual does not have to re-equilibrate
/// from scratch. Returns the number of cells refreshed.
fn refresh_cuts(
    ws: &mut Workspace,
    graph: &WeightedGraph,
    g: &Mobility,
    tol: f64,
    ghat: &[f64],
) -> usize {
    if matches!(g, Mobility::Arithmetic) {
        return 0; // the seed cut is the exact conductivity
    }
    let (n, ne, k) = (ws.n, ws.ne, ws.k);
    let mut added = 0;
    for cell in 0..k * ne {
        let kk = cell / ne;
        let e = cell % ne;
        let ra = ws.rho_hat[kk * n..(kk + 1) * n].to_vec();
        let rb = ws.rho_hat[(kk + 1) * n..(kk + 2) * n].to_vec();
        if ws.th_hat[cell] > ghat[cell] + tol {
            let fresh = cut_at(g, graph, e, &ra, &rb);
            if ws.cuts.len_of(cell) >= ws.protected + 6 {
                // evict the least active refinement cut; the seed and the
                // shared fan stay
                let (idx, _) = ws
                    .cuts
                    .cell(cell)
                    .iter()
                    .enumerate()
                    .skip(ws.protected)
                    .min_by(|a, b| a.1.y.partial_cmp(&b.1.y).unwrap())
                    .unwrap();
                ws.cuts.remove(cell, idx);
            }
            ws.cuts.insert(cell, fresh);
            added += 1;
        }
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perspective_prox_stationarity() {
        let (c, tt, ts) = (0.01, 0.7, 1.3);
        for (th, sh) in [(0.5, 0.2), (-0.3, 1.0), (0.0, -2.0), (2.0, 0.0), (-1.0, 0.0)] {
            let (t, s) = perspective_prox(th, sh, c, tt, ts, 0.5);
            assert!(t >= 0.0);
            if t > 0.0 {
                // gradient of the prox objective vanishes
                let gs = 2.0 * c * s / t + (s - sh) / ts;
                let gt = -c * s * s / (t * t) + (t - th) / tt;
                assert!(gs.abs() < 1e-9, "gs = {gs}");
                assert!(gt.abs() < 1e-9, "gt = {gt}");
            } else {
                assert_eq!(s, 0.0);
            }
            // never worse than the two candidate corners
            let obj = |t: f64, s: f64| {
                let ft = if t > 0.0 {
                    c * s * s / t
                } else if s == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                ft + 0.5 * ((t - th) * (t - th) / tt + (s - sh) * (s - sh) / ts)
            };
            assert!(obj(t, s) <= obj(0.0, 0.0) + 1e-12);
            assert!(obj(t, s) <= obj(th.max(1e-9), sh * 0.5) + 1e-9);
        }
    }
}
