//! Damped Newton iteration over block-tridiagonal nonlinear systems.

use crate::error::{Error, Result};
use crate::linalg::{solve_block_tridiagonal, Mat};

/// A per-cell nonlinear system with nearest-neighbour coupling.
pub(crate) trait BlockSystem<const N: usize> {
    /// Fills the residual and, per row, the sum of absolute term magnitudes
    /// used to scale the convergence test.
    fn residual(&self, x: &[[f64; N]], r: &mut [[f64; N]], scale: &mut [[f64; N]]);

    fn jacobian(&self, x: &[[f64; N]], lower: &mut [Mat<N>], diag: &mut [Mat<N>], upper: &mut [Mat<N>]);

    /// Whether an iterate is physically admissible (positive temperature etc.).
    fn admissible(&self, x: &[[f64; N]]) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings { tol: 1e-10, max_iter: 200, max_halvings: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NewtonReport {
    /// Residual evaluations at accepted iterates (1 when the guess already converges).
    pub iterations: usize,
    pub residual: f64,
}

fn scaled_norm<const N: usize>(r: &[[f64; N]], s: &[[f64; N]]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, (ri, si)) in r.iter().zip(s).enumerate() {
        for k in 0..N {
            if !ri[k].is_finite() {
                return Err(Error::NonFinite { what: "residual", cell: i });
            }
            let v = if ri[k] == 0.0 { 0.0 } else { ri[k].abs() / si[k].max(f64::MIN_POSITIVE) };
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

pub(crate) fn newton_solve<const N: usize, S: BlockSystem<N>>(
    sys: &S,
    x: &mut [[f64; N]],
    settings: NewtonSettings,
    solver: &'static str,
) -> Result<NewtonReport> {
    let n = x.len();
    let mut r = vec![[0.0; N]; n];
    let mut s = vec![[0.0; N]; n];
    let mut lower = vec![[[0.0; N]; N]; n];
    let mut diag = vec![[[0.0; N]; N]; n];
    let mut upper = vec![[[0.0; N]; N]; n];
    let mut trial = x.to_vec();
    let mut rt = vec![[0.0; N]; n];
    let mut st = vec![[0.0; N]; n];

    sys.residual(x, &mut r, &mut s);
    let mut norm = scaled_norm(&r, &s)?;
    let mut iterations = 1;
    while norm >= settings.tol {
        if iterations >= settings.max_iter {
            return Err(Error::Convergence { solver, iterations, residual: norm });
        }
        sys.jacobian(x, &mut lower, &mut diag, &mut upper);
        let mut dx: Vec<[f64; N]> = r.iter().map(|ri| ri.map(|v| -v)).collect();
        if solve_block_tridiagonal(&lower, &diag, &upper, &mut dx).is_none() {
            return Err(Error::Convergence { solver, iterations, residual: norm });
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=settings.max_halvings {
            for i in 0..n {
                for k in 0..N {
                    trial[i][k] = x[i][k] + lambda * dx[i][k];
                }
            }
            if sys.admissible(&trial) {
                sys.residual(&trial, &mut rt, &mut st);
                if let Ok(nt) = scaled_norm(&rt, &st) {
                    x.copy_from_slice(&trial);
                    std::mem::swap(&mut r, &mut rt);
                    std::mem::swap(&mut s, &mut st);
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            let (cell, value) = first_bad(sys, x, &dx);
            return Err(Error::Positivity { quantity: "macro iterate", value, cell });
        }
        iterations += 1;
    }
    Ok(NewtonReport { iterations, residual: norm })
}

/// Locates where the full Newton step leaves the admissible set, for error reporting.
fn first_bad<const N: usize, S: BlockSystem<N>>(sys: &S, x: &[[f64; N]], dx: &[[f64; N]]) -> (usize, f64) {
    for i in 0..x.len() {
        let mut probe = x.to_vec();
        for k in 0..N {
            probe[i][k] += dx[i][k];
        }
        if !sys.admissible(&probe) {
            return (i, probe[i][N - 1]);
        }
    }
    (0, f64::NAN)
}
