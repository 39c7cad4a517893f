//! Small numerical kernels: dense symmetric eigensolver, adaptive quadrature,
//! Euclidean simplex projection and scalar root finding.

pub mod jacobi;
pub mod projection;
pub mod quadrature;

/// Solve `f(x) = 0` for increasing `f` on a bracket `[lo, hi]` by Newton steps
/// safeguarded with bisection. `df` is the derivative; `tol` is on `|f|` and on
/// the bracket width.
pub fn newton_bisect<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() <= tol || (hi - lo).abs() <= tol * x.abs().max(1.0) * 1e-3 {
            return x;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let mut next = if d != 0.0 { x - fx / d } else { x };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        x = next;
    }
    x
}
