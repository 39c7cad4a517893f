//! Constructive feasible paths: concatenation of single-edge transports.
//!
//! Mass is collapsed along a spanning tree onto a root vertex and re-expanded
//! into the target distribution. Each elementary move drains one vertex into
//! a tree neighbor following the reparametrized profile
//! `x(t) = M G^{-1}(G(a/M)(1 - t))` (the pair carries total mass `M`), which
//! has finite action exactly because `C_g` is finite. Time slots are allotted
//! proportionally to the square root of each move's unit-time action, which
//! minimizes the total action of the concatenation.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::mobility::Mobility;
use crate::oracle::GFunction;
use crate::simplex::ProbVector;
use crate::solver::DiscretePath;

struct Move {
    /// vertex losing mass
    from: usize,
    /// vertex gaining mass
    to: usize,
    amount: f64,
    /// mass of the pair during the move
    pair_mass: f64,
    edge: usize,
    omega: f64,
}

const MASS_EPS: f64 = 1e-15;

/// Spanning tree parent array from a BFS rooted at `root`.
fn bfs_tree(graph: &WeightedGraph, root: usize) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = graph.n();
    let mut parent = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([root]);
    seen[root] = true;
    while let Some(i) = queue.pop_front() {
        for &e in graph.incident_edges(i) {
            let j = graph.opposite(e, i);
            if !seen[j] {
                seen[j] = true;
                parent[j] = Some(i);
                depth[j] = depth[i] + 1;
                queue.push_back(j);
            }
        }
    }
    (parent, depth)
}

fn edge_index(graph: &WeightedGraph, a: usize, b: usize) -> usize {
    let (lo, hi) = (a.min(b), a.max(b));
    graph
        .edges()
        .iter()
        .position(|&(i, j)| (i, j) == (lo, hi))
        .expect("tree edge must exist")
}

/// Moves draining every non-root vertex into its parent, deepest first.
/// `masses` is updated to the post-collapse state (all mass at `root`).
fn collapse_moves(
    graph: &WeightedGraph,
    masses: &mut [f64],
    parent: &[Option<usize>],
    depth: &[usize],
) -> Vec<Move> {
    let n = graph.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(depth[v]));
    let mut moves = Vec::new();
    for v in order {
        let Some(p) = parent[v] else { continue };
        let a = masses[v];
        if a <= MASS_EPS {
            continue;
        }
        let e = edge_index(graph, v, p);
        moves.push(Move {
            from: v,
            to: p,
            amount: a,
            pair_mass: a + masses[p],
            edge: e,
            omega: graph.weight(v, p),
        });
        masses[p] += a;
        masses[v] = 0.0;
    }
    moves
}

/// Concatenated single-edge transport from `rho0` to `rho1` on `k` intervals.
/// The result satisfies the discrete continuity equation exactly and has
/// finite action; it doubles as the solver initialization and as a certified
/// upper bound on the minimal action.
pub fn feasible_path(
    graph: &WeightedGraph,
    g: &Mobility,
    rho0: &ProbVector,
    rho1: &ProbVector,
    k: usize,
) -> Result<DiscretePath> {
    let n = graph.n();
    if rho0.len() != n || rho1.len() != n {
        return Err(Error::DimensionMismatch {
            context: "feasible_path",
            expected: n,
            got: rho0.len().min(rho1.len()),
        });
    }
    if k < 1 {
        return Err(Error::InvalidInput("need at least one interval".into()));
    }
    let dt = 1.0 / k as f64;

    if (0..n).all(|i| (rho0.get(i) - rho1.get(i)).abs() <= 1e-15) {
        let rho = vec![rho0.as_slice().to_vec(); k + 1];
        let m = vec![vec![0.0; graph.num_edges()]; k];
        return Ok(DiscretePath { dt, rho, m });
    }

    // Root at the heaviest target vertex; collapse rho0 down and rho1 up.
    let root = (0..n)
        .max_by(|&a, &b| rho1.get(a).partial_cmp(&rho1.get(b)).unwrap())
        .unwrap();
    let (parent, depth) = bfs_tree(graph, root);

    let mut fwd_mass: Vec<f64> = rho0.as_slice().to_vec();
    let fwd = collapse_moves(graph, &mut fwd_mass, &parent, &depth);
    let mut bwd_mass: Vec<f64> = rho1.as_slice().to_vec();
    let bwd = collapse_moves(graph, &mut bwd_mass, &parent, &depth);

    // Execute: forward collapse of rho0, then the reversed collapse of rho1.
    enum Step {
        Drain(Move),
        Fill(Move),
    }
    let mut steps: Vec<Step> = fwd.into_iter().map(Step::Drain).collect();
    steps.extend(bwd.into_iter().rev().map(Step::Fill));

    if steps.is_empty() {
        let rho = vec![rho0.as_slice().to_vec(); k + 1];
        let m = vec![vec![0.0; graph.num_edges()]; k];
        return Ok(DiscretePath { dt, rho, m });
    }
    if steps.len() > k {
        return Err(Error::InvalidInput(format!(
            "K = {k} is too small for {} single-edge moves",
            steps.len()
        )));
    }

    let gfun = GFunction::new(g.clone())?;
    fn move_of(s: &Step) -> &Move {
        match s {
            Step::Drain(mv) | Step::Fill(mv) => mv,
        }
    }

    // Slot widths proportional to sqrt(action of the move over unit time).
    let weights: Vec<f64> = steps
        .iter()
        .map(|s| {
            let mv = move_of(s);
            let c = mv.pair_mass.sqrt() * gfun.value(mv.amount / mv.pair_mass);
            c / (2.0 * mv.omega).sqrt()
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let mut slots: Vec<usize> = if wsum <= 0.0 {
        vec![1; steps.len()]
    } else {
        weights.iter().map(|&w| ((w / wsum * k as f64).round() as usize).max(1)).collect()
    };
    // Repair the apportionment to sum exactly to k.
    loop {
        let total: usize = slots.iter().sum();
        if total == k {
            break;
        }
        if total > k {
            let i = (0..slots.len()).max_by_key(|&i| slots[i]).unwrap();
            if slots[i] <= 1 {
                return Err(Error::InvalidInput("cannot apportion time slots".into()));
            }
            slots[i] -= 1;
        } else {
            let i = (0..slots.len())
                .max_by(|&a, &b| {
                    (weights[a] / slots[a] as f64)
                        .partial_cmp(&(weights[b] / slots[b] as f64))
                        .unwrap()
                })
                .unwrap();
            slots[i] += 1;
        }
    }

    let mut rho_rows: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut m_rows: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut cur: Vec<f64> = rho0.as_slice().to_vec();
    rho_rows.push(cur.clone());

    for (s, &slot) in steps.iter().zip(&slots) {
        let mv = move_of(s);
        let a = mv.amount;
        let mm = mv.pair_mass;
        let gmax = gfun.value(a / mm);
        // Profile of the draining vertex: a -> 0 on equal reparametrized steps.
        let profile = |j: usize| -> f64 {
            if j == 0 {
                a
            } else if j == slot {
                0.0
            } else {
                mm * gfun.inverse(gmax * (1.0 - j as f64 / slot as f64))
            }
        };
        // `w` is the vertex whose mass follows the profile: it drains a -> 0
        // during forward collapse moves and rises 0 -> a during fill moves.
        let w = mv.from;
        let p = mv.to;
        for j in 1..=slot {
            let (xv, prev_xv) = match s {
                Step::Drain(_) => (profile(j), profile(j - 1)),
                Step::Fill(_) => (profile(slot - j), profile(slot - j + 1)),
            };
            let pair_total = cur[w] + cur[p];
            let mut next = cur.clone();
            next[w] = xv;
            next[p] = pair_total - xv;
            let mut m = vec![0.0; graph.num_edges()];
            let delta = xv - prev_xv;
            let (lo, _hi) = graph.edges()[mv.edge];
            let sw = graph.sqrt_weights()[mv.edge];
            // continuity at the profile vertex fixes the sign
            m[mv.edge] = if w == lo { delta / (dt * sw) } else { -delta / (dt * sw) };
            m_rows.push(m);
            rho_rows.push(next.clone());
            cur = next;
        }
    }

    // Land exactly on the target (the profiles hit it to root-finder accuracy).
    let last = rho_rows.last_mut().unwrap();
    for i in 0..n {
        debug_assert!((last[i] - rho1.get(i)).abs() < 1e-9);
        last[i] = rho1.get(i);
    }

    let path = DiscretePath { dt, rho: rho_rows, m: m_rows };
    Ok(path)
}
