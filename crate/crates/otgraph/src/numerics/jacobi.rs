//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Rotations are applied until every off-diagonal entry is negligible relative
//! to the matrix scale. For the small dense matrices in this crate (n up to a
//! few hundred) robustness matters more than asymptotics.

use nalgebra::DMatrix;

/// Eigendecomposition of a symmetric matrix: `a = q * diag(values) * q^T`,
/// eigenvalues sorted ascending, `q` orthogonal with matching column order.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Diagonalize the symmetric matrix `a` by cyclic Jacobi rotations.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m = a.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    let scale = m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())).max(1.0);
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for r in (p + 1)..n {
                off = off.max(m[(p, r)].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = m[(p, r)];
                if apr.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = m[(p, p)];
                let arr = m[(r, r)];
                // Rotation angle from the standard stable formulation.
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkr;
                    m[(k, r)] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mrk;
                    m[(r, k)] = s * mpk + c * mrk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &q.column(old));
    }
    SymmetricEigen { values, vectors }
}

/// Solve `a x = b` for symmetric positive semidefinite `a` restricted to the
/// complement of its numerical kernel. Components of `b` inside the kernel
/// beyond `kernel_tol` make the system unsolvable and are reported as `Err`
/// with the offending residual.
pub fn solve_psd_pinv(a: &DMatrix<f64>, b: &[f64], kernel_tol: f64) -> Result<Vec<f64>, f64> {
    let eig = symmetric_eigen(a);
    let n = b.len();
    let scale = eig.values.last().copied().unwrap_or(0.0).max(1.0);
    let cutoff = kernel_tol * scale;
    let mut x = vec![0.0; n];
    let mut kernel_residual = 0.0f64;
    for (j, &val) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(j);
        let coef: f64 = (0..n).map(|i| col[i] * b[i]).sum();
        if val.abs() <= cutoff {
            kernel_residual = kernel_residual.max(coef.abs());
        } else {
            for i in 0..n {
                x[i] += coef / val * col[i];
            }
        }
    }
    if kernel_residual > kernel_tol * b.iter().fold(1.0f64, |acc, v| acc.max(v.abs())) {
        Err(kernel_residual)
    } else {
        Ok(x)
    }
}
