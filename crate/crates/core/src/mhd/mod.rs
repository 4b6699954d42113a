//! Ideal-MHD convection: state conversions, minmod reconstruction, Roe
//! fluxes and the forward-Euler conservative update.

mod roe;

pub use roe::{fast_speed, lax_friedrichs_flux, roe_flux, roe_flux_states, RoeFlux};

use crate::error::{Error, Result};
use rayon::prelude::*;

pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const MZ: usize = 3;
pub const EN: usize = 4;
pub const BY: usize = 5;
pub const BZ: usize = 6;

/// Run-level gas and field constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidModel {
    pub gamma: f64,
    pub r_ideal: f64,
    /// Constant normal field.
    pub bx: f64,
}

/// Primitive per-cell state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidState {
    pub rho: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub by: f64,
    pub bz: f64,
    pub p: f64,
}

impl FluidState {
    pub fn from_temperature(rho: f64, v: [f64; 3], b: [f64; 2], t: f64, model: &FluidModel) -> Self {
        FluidState { rho, vx: v[0], vy: v[1], vz: v[2], by: b[0], bz: b[1], p: model.r_ideal * rho * t }
    }

    pub fn temperature(&self, model: &FluidModel) -> f64 {
        self.p / (model.r_ideal * self.rho)
    }

    pub fn internal_energy(&self, model: &FluidModel) -> f64 {
        self.p / (model.gamma - 1.0)
    }

    pub fn magnetic_energy(&self, model: &FluidModel) -> f64 {
        0.5 * (model.bx * model.bx + self.by * self.by + self.bz * self.bz)
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.rho * (self.vx * self.vx + self.vy * self.vy + self.vz * self.vz)
    }

    pub fn total_energy(&self, model: &FluidModel) -> f64 {
        self.internal_energy(model) + self.kinetic_energy() + self.magnetic_energy(model)
    }

    /// `p + B^2/2`
    pub fn total_pressure(&self, model: &FluidModel) -> f64 {
        self.p + self.magnetic_energy(model)
    }
}

/// `(rho, rho vx, rho vy, rho vz, E, By, Bz)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedVector(pub [f64; 7]);

impl std::ops::Index<usize> for ConservedVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for ConservedVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

pub fn primitive_to_conserved(s: &FluidState, model: &FluidModel) -> ConservedVector {
    ConservedVector([s.rho, s.rho * s.vx, s.rho * s.vy, s.rho * s.vz, s.total_energy(model), s.by, s.bz])
}

pub fn conserved_to_primitive(u: &ConservedVector, model: &FluidModel, cell: usize) -> Result<FluidState> {
    if u.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "conserved state", cell });
    }
    let rho = u[RHO];
    if !(rho > 0.0) {
        return Err(Error::Positivity { quantity: "density", value: rho, cell });
    }
    let (vx, vy, vz) = (u[MX] / rho, u[MY] / rho, u[MZ] / rho);
    let kinetic = 0.5 * (u[MX] * vx + u[MY] * vy + u[MZ] * vz);
    let magnetic = 0.5 * (model.bx * model.bx + u[BY] * u[BY] + u[BZ] * u[BZ]);
    let p = (model.gamma - 1.0) * (u[EN] - kinetic - magnetic);
    if !(p > 0.0) {
        return Err(Error::Positivity { quantity: "pressure", value: p, cell });
    }
    Ok(FluidState { rho, vx, vy, vz, by: u[BY], bz: u[BZ], p })
}

/// Ideal-MHD x-flux of a primitive state.
pub fn physical_flux(s: &FluidState, model: &FluidModel) -> [f64; 7] {
    let bx = model.bx;
    let pstar = s.total_pressure(model);
    let e = s.total_energy(model);
    let vdotb = s.vx * bx + s.vy * s.by + s.vz * s.bz;
    [
        s.rho * s.vx,
        s.rho * s.vx * s.vx + pstar - bx * bx,
        s.rho * s.vx * s.vy - bx * s.by,
        s.rho * s.vx * s.vz - bx * s.bz,
        (e + pstar) * s.vx - bx * vdotb,
        s.by * s.vx - bx * s.vy,
        s.bz * s.vx - bx * s.vz,
    ]
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Minmod-limited piecewise-linear traces at the `cells.len() - 1` interior
/// interfaces. End cells get zero slope.
pub fn reconstruct_linear(cells: &[ConservedVector]) -> Vec<(ConservedVector, ConservedVector)> {
    let n = cells.len();
    let slope = |i: usize| -> [f64; 7] {
        if i == 0 || i + 1 == n {
            return [0.0; 7];
        }
        std::array::from_fn(|k| minmod(cells[i][k] - cells[i - 1][k], cells[i + 1][k] - cells[i][k]))
    };
    let slopes: Vec<[f64; 7]> = (0..n).map(slope).collect();
    (0..n.saturating_sub(1))
        .map(|i| {
            let l = ConservedVector(std::array::from_fn(|k| cells[i][k] + 0.5 * slopes[i][k]));
            let r = ConservedVector(std::array::from_fn(|k| cells[i + 1][k] - 0.5 * slopes[i + 1][k]));
            (l, r)
        })
        .collect()
}

/// Minmod applied to the characteristic wave strengths of the one-sided
/// differences, using the eigenvectors of the flux Jacobian at the cell
/// state. Falls back to componentwise minmod where the eigensystem is
/// degenerate. End cells get zero slope.
pub fn characteristic_slopes(cells: &[ConservedVector], prims: &[FluidState], model: &FluidModel) -> Vec<[f64; 7]> {
    let n = cells.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            if i == 0 || i + 1 == n {
                return [0.0; 7];
            }
            let dl: [f64; 7] = std::array::from_fn(|k| cells[i][k] - cells[i - 1][k]);
            let dr: [f64; 7] = std::array::from_fn(|k| cells[i + 1][k] - cells[i][k]);
            let componentwise = || std::array::from_fn(|k| minmod(dl[k], dr[k]));
            let Some(eig) = roe::roe_eigensystem(&prims[i], &prims[i], model) else {
                return componentwise();
            };
            let Some(lu) = crate::linalg::Lu::new(&eig.right) else {
                return componentwise();
            };
            let (al, ar) = (lu.solve(&dl), lu.solve(&dr));
            let a: [f64; 7] = std::array::from_fn(|w| minmod(al[w], ar[w]));
            let s = crate::linalg::mat_vec(&eig.right, &a);
            if s.iter().all(|v| v.is_finite()) {
                s
            } else {
                componentwise()
            }
        })
        .collect()
}

/// Fixed Dirichlet states held in the two ghost cells on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidGhosts {
    pub left: ConservedVector,
    pub right: ConservedVector,
}

/// Roe fluxes at the `N + 1` cell faces, `fluxes[i]` at `x_{i-1/2}`.
pub fn interface_fluxes(cells: &[ConservedVector], ghosts: &FluidGhosts, model: &FluidModel) -> Result<Vec<[f64; 7]>> {
    let n = cells.len();
    let mut padded = Vec::with_capacity(n + 4);
    padded.extend([ghosts.left, ghosts.left]);
    padded.extend_from_slice(cells);
    padded.extend([ghosts.right, ghosts.right]);
    let prims: Vec<FluidState> = padded
        .iter()
        .enumerate()
        .map(|(k, u)| conserved_to_primitive(u, model, k.saturating_sub(2).min(n.saturating_sub(1))))
        .collect::<Result<_>>()?;
    let slopes = characteristic_slopes(&padded, &prims, model);
    let traces: Vec<(ConservedVector, ConservedVector)> = (0..padded.len() - 1)
        .map(|i| {
            let l = ConservedVector(std::array::from_fn(|k| padded[i][k] + 0.5 * slopes[i][k]));
            let r = ConservedVector(std::array::from_fn(|k| padded[i + 1][k] - 0.5 * slopes[i + 1][k]));
            (l, r)
        })
        .collect();
    (1..=n + 1)
        .into_par_iter()
        .map(|k| {
            let (tl, tr) = traces[k];
            // A limited trace can still be unphysical for strong jumps; drop to first order there.
            let wl = conserved_to_primitive(&tl, model, 0).unwrap_or(prims[k]);
            let wr = conserved_to_primitive(&tr, model, 0).unwrap_or(prims[k + 1]);
            let f = roe_flux_states(&wl, &wr, model);
            if f.fallback {
                log::debug!("Roe average degenerate at face {}; using Lax-Friedrichs", k - 1);
            }
            Ok(f.flux)
        })
        .collect()
}

/// Largest `|vx| + c_f` over the cells.
pub fn max_signal_speed(cells: &[ConservedVector], model: &FluidModel) -> Result<f64> {
    let mut s = 0.0f64;
    for (i, u) in cells.iter().enumerate() {
        let w = conserved_to_primitive(u, model, i)?;
        s = s.max(w.vx.abs() + fast_speed(&w, model));
    }
    Ok(s)
}

/// Which conserved components the explicit update advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateSet {
    /// `rho, rho vy, rho vz, By, Bz`; momentum-x and energy are left to the macro solve.
    Transverse,
    All,
}

impl UpdateSet {
    fn components(self) -> &'static [usize] {
        match self {
            UpdateSet::Transverse => &[RHO, MY, MZ, BY, BZ],
            UpdateSet::All => &[RHO, MX, MY, MZ, EN, BY, BZ],
        }
    }
}

/// Forward-Euler conservative update. Returns the new cells and the face fluxes used.
pub fn explicit_mhd_update(
    cells: &[ConservedVector],
    ghosts: &FluidGhosts,
    model: &FluidModel,
    dt: f64,
    dx: f64,
    set: UpdateSet,
) -> Result<(Vec<ConservedVector>, Vec<[f64; 7]>)> {
    let speed = max_signal_speed(cells, model)?;
    if speed * dt / dx > 1.0 {
        log::warn!("fluid CFL number {:.3} exceeds 1", speed * dt / dx);
    }
    let fluxes = interface_fluxes(cells, ghosts, model)?;
    let lam = dt / dx;
    let comps = set.components();
    let out: Vec<ConservedVector> = cells
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let mut v = *u;
            for &k in comps {
                v[k] = u[k] - lam * (fluxes[i + 1][k] - fluxes[i][k]);
            }
            v
        })
        .collect();
    for (i, u) in out.iter().enumerate() {
        if !(u[RHO] > 0.0) {
            return Err(Error::Positivity { quantity: "density", value: u[RHO], cell: i });
        }
    }
    Ok((out, fluxes))
}
