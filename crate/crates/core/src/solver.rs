//! Damped Newton iteration for small nonlinear systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub residual_tol: f64,
    pub max_iters: usize,
    pub fd_step: f64,
    pub min_damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_iters: 200,
            fd_step: 1e-6,
            min_damping: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub root: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `residual_fn(x) = 0` by Newton's method with a forward-difference
/// Jacobian and step halving on the residual 2-norm.
///
/// Returns a report with `converged = false` if `max_iters` is reached.
/// Fails if the Jacobian is singular, if no damped step reduces the residual,
/// or if the residual at `x0` is not finite.
pub fn solve_system<F>(mut residual_fn: F, x0: &[f64], opts: &SolveOptions) -> Result<SolveReport>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residual_fn(&x);
    if r.len() != n {
        return Err(Error::InvalidInput(format!(
            "residual has dimension {} but x has {n}",
            r.len()
        )));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteResidual { iteration: 0 });
    }
    let mut rn = norm(&r);

    for iter in 0..opts.max_iters {
        if rn <= opts.residual_tol {
            return Ok(SolveReport {
                root: x,
                residual_norm: rn,
                iterations: iter,
                converged: true,
            });
        }

        // Column-major forward-difference Jacobian.
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let h = opts.fd_step * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residual_fn(&xp);
            if rp.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteResidual { iteration: iter });
            }
            for i in 0..n {
                jac[i][j] = (rp[i] - r[i]) / h;
            }
        }
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = lu_solve(jac, neg_r).ok_or(Error::SingularJacobian { iterations: iter })?;

        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            let rt = residual_fn(&trial);
            if rt.iter().all(|v| v.is_finite()) {
                let tn = norm(&rt);
                if tn < rn {
                    x = trial;
                    r = rt;
                    rn = tn;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < opts.min_damping {
                return Err(Error::SingularJacobian { iterations: iter + 1 });
            }
        }
    }

    Ok(SolveReport {
        converged: rn <= opts.residual_tol,
        root: x,
        residual_norm: rn,
        iterations: opts.max_iters,
    })
}

/// Gaussian elimination with partial pivoting. `None` when singular.
pub(crate) fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= scale * 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}
