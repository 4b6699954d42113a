//! Opacity fields: constants, closed forms in `x`, a density/temperature power
//! law and per-cell tables.

use crate::error::{Error, Result};
use crate::mesh::Mesh1D;

#[derive(Debug, Clone, PartialEq)]
pub enum Opacity {
    Constant(f64),
    /// `coeff * rho^rho_exp * T^t_exp`, with the temperature of the previous step.
    PowerLaw {
        coeff: f64,
        rho_exp: f64,
        t_exp: f64,
    },
    /// `[base + amp (tanh(1 - k x) + tanh(1 + k x))]^power`
    TanhWell {
        base: f64,
        amp: f64,
        k: f64,
        power: f64,
    },
    /// One value per cell.
    Tabulated(Vec<f64>),
}

impl Opacity {
    /// True when the value is a function of `x` alone, so faces can be
    /// evaluated pointwise.
    pub fn is_closed_form(&self) -> bool {
        matches!(self, Opacity::Constant(_) | Opacity::TanhWell { .. })
    }

    pub fn depends_on_temperature(&self) -> bool {
        matches!(self, Opacity::PowerLaw { t_exp, .. } if *t_exp != 0.0)
    }

    /// Pointwise value; `cell` only matters for tables.
    pub fn at(&self, x: f64, rho: f64, t: f64, cell: usize) -> f64 {
        match self {
            Opacity::Constant(v) => *v,
            Opacity::PowerLaw { coeff, rho_exp, t_exp } => coeff * rho.powf(*rho_exp) * t.powf(*t_exp),
            Opacity::TanhWell { base, amp, k, power } => {
                (base + amp * ((1.0 - k * x).tanh() + (1.0 + k * x).tanh())).powf(*power)
            }
            Opacity::Tabulated(v) => v.get(cell).copied().unwrap_or(f64::NAN),
        }
    }

    pub fn cells(&self, mesh: &Mesh1D, rho: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        if let Opacity::Tabulated(v) = self {
            if v.len() != mesh.nx {
                return Err(Error::config(format!("tabulated opacity has {} values for {} cells", v.len(), mesh.nx)));
            }
        }
        let out: Vec<f64> = (0..mesh.nx).map(|i| self.at(mesh.center(i), rho[i], t[i], i)).collect();
        check(&out)?;
        Ok(out)
    }

    /// Values at the `nx + 1` faces: pointwise for closed forms, otherwise
    /// the mean of the neighbours (the adjacent cell at the walls).
    pub fn faces(&self, mesh: &Mesh1D, cells: &[f64]) -> Result<Vec<f64>> {
        let n = mesh.nx;
        let out: Vec<f64> = if self.is_closed_form() {
            (0..=n).map(|f| self.at(mesh.interface(f), 1.0, 1.0, 0)).collect()
        } else {
            (0..=n)
                .map(|f| match f {
                    0 => cells[0],
                    f if f == n => cells[n - 1],
                    f => 0.5 * (cells[f - 1] + cells[f]),
                })
                .collect()
        };
        check(&out)?;
        Ok(out)
    }
}

fn check(v: &[f64]) -> Result<()> {
    match v.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
        Some(i) => Err(Error::invalid(format!("opacity {} at index {i} is not finite and non-negative", v[i]))),
        None => Ok(()),
    }
}
