//! `I = J + n R + Q` with `<Q> = <nQ> = 0`.

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, PartialEq)]
pub struct CellRadiation {
    pub intensity: Vec<f64>,
    pub j: f64,
    pub r: f64,
    pub q: Vec<f64>,
    /// `<n^2 Q>`
    pub k_q: f64,
    /// `<n^3 Q>`
    pub q3: f64,
}

/// `(J, R)` of a per-ordinate intensity.
#[inline]
pub fn macro_moments(intensity: &[f64], quad: &Quadrature) -> (f64, f64) {
    (quad.moment_unchecked(intensity, 0), 3.0 * quad.moment_unchecked(intensity, 1))
}

/// Writes `Q_m = I_m - J - n_m R` into `q` and returns `(K_Q, Q3)`.
#[inline]
pub fn residual_into(intensity: &[f64], j: f64, r: f64, quad: &Quadrature, q: &mut [f64]) -> (f64, f64) {
    for (m, qm) in q.iter_mut().enumerate() {
        *qm = intensity[m] - j - quad.nodes[m] * r;
    }
    (quad.moment_unchecked(q, 2), quad.moment_unchecked(q, 3))
}

pub fn decompose(intensity: &[f64], quad: &Quadrature) -> Result<CellRadiation> {
    if intensity.len() != quad.order {
        return Err(Error::invalid(format!(
            "intensity has {} ordinates, quadrature has {}",
            intensity.len(),
            quad.order
        )));
    }
    if let Some(m) = intensity.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "intensity", cell: m });
    }
    let (j, r) = macro_moments(intensity, quad);
    let mut q = vec![0.0; quad.order];
    let (k_q, q3) = residual_into(intensity, j, r, quad, &mut q);
    Ok(CellRadiation { intensity: intensity.to_vec(), j, r, q, k_q, q3 })
}

pub fn recompose(cell: &CellRadiation, quad: &Quadrature) -> Vec<f64> {
    cell.q.iter().zip(&quad.nodes).map(|(q, n)| cell.j + n * cell.r + q).collect()
}
