//! Mobility functions weighting edge conductivity by the endpoint densities.
//!
//! A mobility is symmetric, positive on the open quadrant, 1-homogeneous and
//! concave on `[0, inf)^2`. The builtins are the arithmetic mean `(r+s)/2`,
//! the logarithmic mean `(r-s)/(ln r - ln s)` and the harmonic mean
//! `rs/(r+s)`, the latter two vanishing whenever either argument is zero.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{adaptive_gk, adaptive_gk_sqrt_left, adaptive_gk_sqrt_right};

/// User-supplied mobility; `partial1` falls back to a central difference with
/// step `1e-6 * max(r, s, 1e-8)` when absent.
pub struct CustomMobility {
    pub name: String,
    pub eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub partial1: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for CustomMobility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMobility").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum Mobility {
    Arithmetic,
    Logarithmic,
    Harmonic,
    Custom(Arc<CustomMobility>),
}

/// Relative half-spread `(r-s)/(r+s)` below which the logarithmic mean and its
/// derivative switch to series; keeps full precision through the cancellation.
const LOG_MEAN_SERIES_CUT: f64 = 1e-3;

fn log_mean(r: f64, s: f64) -> f64 {
    if r <= 0.0 || s <= 0.0 {
        return 0.0;
    }
    if r == s {
        return r;
    }
    let a = 0.5 * (r + s);
    let u = (r - s) / (r + s);
    if u.abs() <= LOG_MEAN_SERIES_CUT {
        // u / atanh(u) = 1 / (1 + u^2/3 + u^4/5 + ...)
        let u2 = u * u;
        a / (1.0 + u2 / 3.0 + u2 * u2 / 5.0 + u2 * u2 * u2 / 7.0)
    } else {
        (r - s) / (r.ln() - s.ln())
    }
}

fn log_mean_d1(r: f64, s: f64) -> f64 {
    let u = (r - s) / (r + s);
    if u.abs() <= LOG_MEAN_SERIES_CUT {
        0.5 - u / 3.0 + u * u / 6.0 - 8.0 * u * u * u / 45.0
    } else {
        let ell = r.ln() - s.ln();
        let lm = (r - s) / ell;
        (1.0 - lm / r) / ell
    }
}

impl Mobility {
    /// Look up a builtin by name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "arithmetic" => Ok(Mobility::Arithmetic),
            "logarithmic" => Ok(Mobility::Logarithmic),
            "harmonic" => Ok(Mobility::Harmonic),
            other => Err(Error::UnknownMobility(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Mobility::Arithmetic => "arithmetic",
            Mobility::Logarithmic => "logarithmic",
            Mobility::Harmonic => "harmonic",
            Mobility::Custom(c) => &c.name,
        }
    }

    /// `g(r, s)` for `r, s >= 0`.
    pub fn eval(&self, r: f64, s: f64) -> f64 {
        match self {
            Mobility::Arithmetic => 0.5 * (r + s),
            Mobility::Logarithmic => log_mean(r, s),
            Mobility::Harmonic => {
                if r <= 0.0 || s <= 0.0 {
                    0.0
                } else {
                    r * s / (r + s)
                }
            }
            Mobility::Custom(c) => (c.eval)(r, s),
        }
    }

    /// Partial derivative in the first argument, for `r, s > 0`.
    pub fn d1(&self, r: f64, s: f64) -> f64 {
        match self {
            Mobility::Arithmetic => 0.5,
            Mobility::Logarithmic => log_mean_d1(r, s),
            Mobility::Harmonic => {
                let t = s / (r + s);
                t * t
            }
            Mobility::Custom(c) => match &c.partial1 {
                Some(d) => d(r, s),
                None => {
                    let h = 1e-6 * r.max(s).max(1e-8);
                    ((c.eval)(r + h, s) - (c.eval)((r - h).max(0.0), s)) / (h + h.min(r))
                }
            },
        }
    }

    /// Section of the mobility along the simplex edge, `x -> g(x, 1-x)`.
    pub fn section(&self, x: f64) -> f64 {
        self.eval(x, 1.0 - x)
    }

    /// Maximum of `g` over `[0, 1]^2`; `g` is nondecreasing in each argument
    /// (a nonnegative concave function on a ray cannot decrease), so this is
    /// `g(1, 1)`.
    pub fn sup_unit_square(&self) -> f64 {
        self.eval(1.0, 1.0)
    }
}

/// `C_g = int_0^1 dr / sqrt(g(r, 1-r))`, the reparametrization constant that
/// must be finite for the metric to stay finite up to the simplex boundary.
///
/// The integrand is probed on shrinking interior windows first; if the tail
/// contributions fail to contract, the integral is reported divergent. The
/// value itself is computed with `r = u^2` substitutions at both endpoints so
/// the adaptive pass only sees a bounded (or mildly logarithmic) integrand.
pub fn c_g(g: &Mobility) -> Result<f64> {
    let integrand = |r: f64| {
        let v = g.section(r);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / v.sqrt()
        }
    };

    // Divergence probe: tail increments of int_{d}^{1-d} must contract.
    let mut prev = adaptive_gk(integrand, 1e-2, 1.0 - 1e-2, 1e-10);
    if !prev.value.is_finite() {
        return Err(Error::DivergentConstant("integrand is infinite inside (0,1)".into()));
    }
    let mut increments = Vec::new();
    for d in [1e-4, 1e-6, 1e-8] {
        let cur = adaptive_gk(integrand, d, 1.0 - d, 1e-10);
        increments.push(cur.value - prev.value);
        prev = cur;
    }
    if increments[2] > 0.5 * increments[1] && increments[2] > 1e-12 {
        return Err(Error::DivergentConstant(format!(
            "endpoint tails do not contract (last increments {:.3e}, {:.3e})",
            increments[1], increments[2]
        )));
    }

    let tol = 5e-9;
    let left = adaptive_gk_sqrt_left(integrand, 0.5, tol);
    let right = adaptive_gk_sqrt_right(integrand, 0.5, tol);
    if !left.converged || !right.converged {
        return Err(Error::QuadratureNonConvergence { err: left.err.max(right.err), tol });
    }
    Ok(left.value + right.value)
}

/// `epsilon_0(g) = sup_{r,s>0} g(r/(r+s), s/(r+s))`, i.e. the maximum of the
/// simplex section. A coarse grid locates the peak and golden-section search
/// refines it; the section is concave, so the search is unimodal.
pub fn epsilon0(g: &Mobility) -> f64 {
    let grid = 1024;
    let mut best_x = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=grid {
        let x = k as f64 / grid as f64;
        let v = g.section(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let h = 2.0 / grid as f64;
    let (mut lo, mut hi) = ((best_x - h).max(0.0), (best_x + h).min(1.0));
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = g.section(x1);
    let mut f2 = g.section(x2);
    for _ in 0..120 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g.section(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g.section(x1);
        }
    }
    best.max(f1).max(f2)
}

/// Randomized verification report for the mobility hypotheses. Violations are
/// data, not errors; each entry is the worst case seen over the sample set.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub mobility: String,
    pub samples: usize,
    pub seed: u64,
    /// max |g(r,s) - g(s,r)| relative to the local scale
    pub symmetry: f64,
    /// max |g(kr,ks) - k g(r,s)| / (k g(r,s)) over random k in (0,10]
    pub homogeneity: f64,
    /// max violation of the midpoint concavity inequality (0 when concave)
    pub concavity: f64,
    /// max |r d1(r,s) + s d1(s,r) - g(r,s)| (Euler relation)
    pub euler: f64,
    /// max |d1 - central difference| relative to the local scale
    pub partial_fd: f64,
}

impl AuditReport {
    pub fn max_violation(&self) -> f64 {
        self.symmetry
            .max(self.homogeneity)
            .max(self.concavity)
            .max(self.euler)
            .max(self.partial_fd)
    }
}

/// Sample `samples` random points and report the worst violation of each
/// mobility hypothesis.
pub fn audit(g: &Mobility, samples: usize, seed: u64) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport {
        mobility: g.name().to_string(),
        samples,
        seed,
        symmetry: 0.0,
        homogeneity: 0.0,
        concavity: 0.0,
        euler: 0.0,
        partial_fd: 0.0,
    };
    for _ in 0..samples.max(1) {
        let r: f64 = rng.random_range(1e-3..1.0);
        let s: f64 = rng.random_range(1e-3..1.0);
        let scale = g.eval(r, s).abs().max(1e-12);

        let sym = (g.eval(r, s) - g.eval(s, r)).abs() / scale;
        report.symmetry = report.symmetry.max(sym);

        let k: f64 = rng.random_range(1e-3..10.0);
        let hom = (g.eval(k * r, k * s) - k * g.eval(r, s)).abs() / (k * scale);
        report.homogeneity = report.homogeneity.max(hom);

        // Midpoint concavity between two independent points of the quadrant.
        let (p, q): (f64, f64) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        let slack =
            g.eval(0.5 * (r + p), 0.5 * (s + q)) - 0.5 * (g.eval(r, s) + g.eval(p, q));
        report.concavity = report.concavity.max(-slack);

        let euler = (r * g.d1(r, s) + s * g.d1(s, r) - g.eval(r, s)).abs();
        report.euler = report.euler.max(euler);

        let h = 1e-6 * r.max(s).max(1e-8);
        if r > h {
            let fd = (g.eval(r + h, s) - g.eval(r - h, s)) / (2.0 * h);
            let dfd = (g.d1(r, s) - fd).abs() / g.d1(r, s).abs().max(1.0);
            report.partial_fd = report.partial_fd.max(dfd);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn builtin_values() {
        assert_eq!(Mobility::Arithmetic.eval(1.0, 3.0), 2.0);
        // logarithmic mean of equal arguments is the argument itself
        assert_eq!(Mobility::Logarithmic.eval(0.4, 0.4), 0.4);
        assert_eq!(Mobility::Harmonic.eval(0.0, 0.7), 0.0);
        assert_eq!(Mobility::Harmonic.eval(0.7, 0.0), 0.0);
        assert!(Mobility::from_name("geometric").is_err());
    }

    #[test]
    fn log_mean_series_matches_direct_form() {
        let g = Mobility::Logarithmic;
        // straddle the series cut where the direct form is still accurate
        for d in [1e-2, 2e-3, 1.0001e-3, 9.999e-4, 1e-4] {
            let (r, s): (f64, f64) = (0.3 + d, 0.3 - d);
            let direct = (r - s) / (r.ln() - s.ln());
            let v = g.eval(r, s);
            assert!((v - direct).abs() <= 1e-11 * direct.abs(), "d={d} v={v} direct={direct}");
        }
        // deep in the cancellation regime the series must stay monotone and
        // pinned between the geometric and arithmetic means
        for d in [1e-6, 1e-9, 1e-12] {
            let (r, s): (f64, f64) = (0.3 + d, 0.3 - d);
            let v = g.eval(r, s);
            assert!(v >= (r * s).sqrt() && v <= 0.5 * (r + s), "d={d} v={v}");
        }
        // ordering: harmonic <= logarithmic <= arithmetic
        let (r, s) = (0.9, 0.1);
        assert!(Mobility::Harmonic.eval(r, s) < g.eval(r, s));
        assert!(g.eval(r, s) < Mobility::Arithmetic.eval(r, s));
    }

    #[test]
    fn c_g_constants() {
        // arithmetic: g(r, 1-r) = 1/2, so C = sqrt(2)
        let c = c_g(&Mobility::Arithmetic).unwrap();
        assert!((c - 2.0f64.sqrt()).abs() < 1e-10, "c = {c}");
        // harmonic: g(r, 1-r) = r(1-r), so C = pi
        let c = c_g(&Mobility::Harmonic).unwrap();
        assert!((c - PI).abs() < 1e-8, "c = {c}");
        // logarithmic: finite
        let c = c_g(&Mobility::Logarithmic).unwrap();
        assert!(c.is_finite() && c > 2.0f64.sqrt() && c < PI);
    }

    #[test]
    fn c_g_detects_divergence() {
        // g(r, 1-r) ~ 2 r^2 near 0: the integrand ~ 1/r is not integrable.
        let g = Mobility::Custom(Arc::new(CustomMobility {
            name: "quadratic-pinch".into(),
            eval: Arc::new(|r, s| {
                if r + s <= 0.0 {
                    0.0
                } else {
                    2.0 * (r * s) * (r * s) / ((r + s) * (r * r + s * s))
                }
            }),
            partial1: None,
        }));
        assert!(matches!(c_g(&g), Err(Error::DivergentConstant(_))));
    }

    #[test]
    fn epsilon0_values() {
        assert!((epsilon0(&Mobility::Arithmetic) - 0.5).abs() < 1e-12);
        assert!((epsilon0(&Mobility::Harmonic) - 0.25).abs() < 1e-10);
        assert!((epsilon0(&Mobility::Logarithmic) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn audit_builtins_are_clean() {
        for g in [Mobility::Arithmetic, Mobility::Logarithmic, Mobility::Harmonic] {
            let r = audit(&g, 1000, 7);
            assert!(r.symmetry <= 1e-12, "{}: symmetry {}", g.name(), r.symmetry);
            assert!(r.homogeneity <= 1e-12, "{}: homogeneity {}", g.name(), r.homogeneity);
            assert!(r.concavity <= 1e-12, "{}: concavity {}", g.name(), r.concavity);
            assert!(r.euler <= 1e-9, "{}: euler {}", g.name(), r.euler);
            assert!(r.partial_fd <= 1e-7, "{}: fd {}", g.name(), r.partial_fd);
        }
    }

    #[test]
    fn audit_flags_broken_homogeneity() {
        // g(r,s) = r s is 2-homogeneous; the audit must notice.
        let g = Mobility::Custom(Arc::new(CustomMobility {
            name: "product".into(),
            eval: Arc::new(|r, s| r * s),
            partial1: Some(Arc::new(|_r, s| s)),
        }));
        let r = audit(&g, 1000, 11);
        assert!(r.homogeneity > 0.1, "homogeneity {}", r.homogeneity);
    }
}
