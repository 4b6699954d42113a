//! Reference solvers: the two diffusion-limit systems the coupled scheme
//! reduces to as `eps -> 0`, and an explicit kinetic solver.
//!
//! The limit solvers treat convection explicitly (Roe) and the radiation
//! diffusion, relaxation and radiation-flow terms implicitly, with a Newton
//! solve on `(J, vx, T)` or `(vx, T)` per cell. Walls are fixed ghost cells;
//! the wall cells themselves are pinned the way the kinetic wall flux pins
//! them as `eps -> 0`: `J = <b>` off equilibrium, `(T^4 + T_w^4) / 2 = 4 pi <b>`
//! at equilibrium (only when `P0 > 0`, since otherwise radiation cannot
//! reach the material).

mod kinetic;
mod stencil;

use std::f64::consts::PI;

use crate::coupled::equilibrium_j;
use crate::dual::{Acc, Scalar};
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::mhd::{
    conserved_to_primitive, explicit_mhd_update, ConservedVector, FluidGhosts, FluidModel, UpdateSet, EN, MX, MY, MZ,
    RHO,
};
use crate::newton::{newton_solve, NewtonReport, NewtonSettings};
use crate::opacity::Opacity;
use crate::params::NondimParams;
use crate::quadrature::Quadrature;
use crate::ugks::BoundaryData;

pub use kinetic::ExplicitKineticSolver;
use stencil::{CellStencil, StencilSystem};

const FOUR_PI: f64 = 4.0 * PI;

/// Fluid plus, for the non-equilibrium system, the radiation energy `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub time: f64,
    pub fluid: Vec<ConservedVector>,
    /// `None` in the equilibrium system, where `4 pi J = T^4`.
    pub j: Option<Vec<f64>>,
}

impl LimitState {
    /// Non-equilibrium state with `J` at its equilibrium value.
    pub fn with_equilibrium_j(fluid: Vec<ConservedVector>, model: &FluidModel) -> Result<Self> {
        let j = temperatures(&fluid, model)?.into_iter().map(equilibrium_j).collect();
        Ok(LimitState { time: 0.0, fluid, j: Some(j) })
    }

    pub fn equilibrium(fluid: Vec<ConservedVector>) -> Self {
        LimitState { time: 0.0, fluid, j: None }
    }

    pub fn nx(&self) -> usize {
        self.fluid.len()
    }

    /// Stored `J`, or `T^4 / 4 pi` when it is not stored.
    pub fn radiation_j(&self, model: &FluidModel) -> Result<Vec<f64>> {
        match &self.j {
            Some(j) => Ok(j.clone()),
            None => Ok(temperatures(&self.fluid, model)?.into_iter().map(equilibrium_j).collect()),
        }
    }
}

fn temperatures(fluid: &[ConservedVector], model: &FluidModel) -> Result<Vec<f64>> {
    fluid.iter().enumerate().map(|(i, u)| Ok(conserved_to_primitive(u, model, i)?.temperature(model))).collect()
}

/// Ghost radiation data beyond a wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitWall {
    pub j: f64,
    pub temperature: f64,
}

impl LimitWall {
    pub fn from_boundary(b: &BoundaryData, quad: &Quadrature) -> Self {
        LimitWall { j: b.mean(quad), temperature: b.temperature }
    }
}

#[derive(Debug, Clone)]
pub struct LimitSolver {
    pub mesh: Mesh1D,
    /// Uses `c`, `P0` and `a_coeff`; opacities enter unscaled.
    pub params: NondimParams,
    pub model: FluidModel,
    pub ghosts: FluidGhosts,
    pub walls: [LimitWall; 2],
    pub sigma_a: Opacity,
    pub sigma_s: Opacity,
    /// Density, velocity and field held fixed.
    pub frozen: bool,
    pub newton: NewtonSettings,
}

/// Per-cell data of the explicit fluid substep.
#[derive(Debug, Clone, Copy)]
struct CellBase {
    rho: f64,
    mom_s: f64,
    en_s: f64,
    e_perp: f64,
    df2: f64,
    df5: f64,
    /// `(|F_{i+1/2}| + |F_{i-1/2}|) / dx` for the two fluxes.
    flux_scale: [f64; 2],
    v_s: f64,
    t_s: f64,
}

struct FluidStage {
    new_fluid: Vec<ConservedVector>,
    cells: Vec<CellBase>,
    /// Convection-only predictor of `(vx, T)`.
    guess: Vec<(f64, f64)>,
    v_ghost: [f64; 2],
}

impl LimitSolver {
    fn fluid_stage(&self, state: &LimitState, dt: f64) -> Result<FluidStage> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        let nx = self.mesh.nx;
        if state.nx() != nx || state.j.as_ref().is_some_and(|j| j.len() != nx) {
            return Err(Error::invalid(format!("state does not match the mesh of {nx} cells")));
        }
        let model = &self.model;
        let dx = self.mesh.dx;
        let prims = state
            .fluid
            .iter()
            .enumerate()
            .map(|(i, u)| conserved_to_primitive(u, model, i))
            .collect::<Result<Vec<_>>>()?;
        let (new_fluid, fluxes) = if self.frozen {
            (state.fluid.clone(), vec![[0.0; 7]; nx + 1])
        } else {
            explicit_mhd_update(&state.fluid, &self.ghosts, model, dt, dx, UpdateSet::Transverse)?
        };
        let bx2 = model.bx * model.bx;
        let a = self.params.a_coeff;
        let mut cells = Vec::with_capacity(nx);
        let mut guess = Vec::with_capacity(nx);
        for i in 0..nx {
            let u = &new_fluid[i];
            let c = CellBase {
                rho: u[RHO],
                mom_s: state.fluid[i][MX],
                en_s: state.fluid[i][EN],
                e_perp: 0.5 * (u[MY] * u[MY] + u[MZ] * u[MZ]) / u[RHO] + 0.5 * (bx2 + u[5] * u[5] + u[6] * u[6]),
                df2: (fluxes[i + 1][MX] - fluxes[i][MX]) / dx,
                df5: (fluxes[i + 1][EN] - fluxes[i][EN]) / dx,
                flux_scale: [MX, EN].map(|k| (fluxes[i + 1][k].abs() + fluxes[i][k].abs()) / dx),
                v_s: prims[i].vx,
                t_s: prims[i].temperature(model),
            };
            guess.push(if self.frozen {
                (c.v_s, c.t_s)
            } else {
                let v = (c.mom_s - dt * c.df2) / c.rho;
                let t = (c.en_s - dt * c.df5 - 0.5 * c.rho * v * v - c.e_perp) / (a * c.rho);
                (v, if t > 0.0 && t.is_finite() { t } else { c.t_s })
            });
            cells.push(c);
        }
        let vg = |u: &ConservedVector| u[MX] / u[RHO];
        Ok(FluidStage { new_fluid, cells, guess, v_ghost: [vg(&self.ghosts.left), vg(&self.ghosts.right)] })
    }

    fn opacities(&self, op: &Opacity, stage: &FluidStage) -> Result<(Vec<f64>, Vec<f64>)> {
        let rho: Vec<f64> = stage.cells.iter().map(|c| c.rho).collect();
        let t: Vec<f64> = stage.cells.iter().map(|c| c.t_s).collect();
        let cells = op.cells(&self.mesh, &rho, &t)?;
        let faces = op.faces(&self.mesh, &cells)?;
        Ok((cells, faces))
    }

    /// Face diffusion coefficients `c / (3 sigma)`.
    fn diffusion(&self, faces: &[f64], what: &str) -> Result<Vec<f64>> {
        faces
            .iter()
            .enumerate()
            .map(|(f, s)| {
                if *s > 0.0 {
                    Ok(self.params.c / (3.0 * s))
                } else {
                    Err(Error::invalid(format!("{what} vanishes at face {f}; the diffusion coefficient is infinite")))
                }
            })
            .collect()
    }

    fn commit(&self, stage: FluidStage, vt: impl Fn(usize) -> (f64, f64)) -> Vec<ConservedVector> {
        let a = self.params.a_coeff;
        let mut fluid = stage.new_fluid;
        for (i, u) in fluid.iter_mut().enumerate() {
            let c = &stage.cells[i];
            let (v, t) = vt(i);
            if self.frozen {
                u[EN] += a * c.rho * (t - c.t_s);
            } else {
                u[MX] = c.rho * v;
                u[EN] = a * c.rho * t + 0.5 * c.rho * v * v + c.e_perp;
            }
        }
        fluid
    }

    /// One step of the non-equilibrium diffusion system.
    pub fn noneq_limit_step(&self, state: &mut LimitState, dt: f64) -> Result<NewtonReport> {
        let stage = self.fluid_stage(state, dt)?;
        let j_s = state.j.clone().ok_or_else(|| Error::invalid("non-equilibrium limit state needs J"))?;
        let (sa, _) = self.opacities(&self.sigma_a, &stage)?;
        let (_, ss_faces) = self.opacities(&self.sigma_s, &stage)?;
        let sys = NoneqStencil {
            cells: &stage.cells,
            j_s: &j_s,
            sa,
            kf: self.diffusion(&ss_faces, "scattering opacity")?,
            ghosts: [
                [self.walls[0].j, stage.v_ghost[0], self.walls[0].temperature],
                [self.walls[1].j, stage.v_ghost[1], self.walls[1].temperature],
            ],
            dt,
            dx: self.mesh.dx,
            c: self.params.c,
            p0: self.params.p0,
            a: self.params.a_coeff,
            frozen: self.frozen,
        };
        let mut x: Vec<[f64; 3]> = stage.guess.iter().zip(&j_s).map(|(&(v, t), &j)| [j, v, t]).collect();
        let rep = newton_solve(&StencilSystem::<_, 9>::new(&sys), &mut x, self.newton, "non-equilibrium limit")?;
        let fluid = self.commit(stage, |i| (x[i][1], x[i][2]));
        *state = LimitState { time: state.time + dt, fluid, j: Some(x.iter().map(|c| c[0]).collect()) };
        Ok(rep)
    }

    /// One step of the equilibrium diffusion system.
    pub fn eq_limit_step(&self, state: &mut LimitState, dt: f64) -> Result<NewtonReport> {
        let stage = self.fluid_stage(state, dt)?;
        let (_, sa_faces) = self.opacities(&self.sigma_a, &stage)?;
        let wall_t4 = self.walls.map(|w| 2.0 * FOUR_PI * w.j - w.temperature.powi(4));
        if let Some(w) = wall_t4.iter().position(|t4| !(*t4 > 0.0)).filter(|_| self.params.p0 != 0.0) {
            return Err(Error::config(format!(
                "wall {w}: the inflow is too weak for the wall temperature in the equilibrium limit"
            )));
        }
        let sys = EqStencil {
            cells: &stage.cells,
            kf: self.diffusion(&sa_faces, "absorption opacity")?,
            ghosts: [[stage.v_ghost[0], self.walls[0].temperature], [stage.v_ghost[1], self.walls[1].temperature]],
            wall_t4,
            dt,
            dx: self.mesh.dx,
            p0: self.params.p0,
            a: self.params.a_coeff,
            frozen: self.frozen,
        };
        let mut x: Vec<[f64; 2]> = stage.guess.iter().map(|&(v, t)| [v, t]).collect();
        let rep = newton_solve(&StencilSystem::<_, 6>::new(&sys), &mut x, self.newton, "equilibrium limit")?;
        let fluid = self.commit(stage, |i| (x[i][0], x[i][1]));
        *state = LimitState { time: state.time + dt, fluid, j: None };
        Ok(rep)
    }
}

/// Which wall a cell touches.
fn wall_index(i: usize, n: usize) -> Option<usize> {
    if i == 0 {
        Some(0)
    } else if i + 1 == n {
        Some(1)
    } else {
        None
    }
}

/// Unknowns `[J, vx, T]`.
struct NoneqStencil<'a> {
    cells: &'a [CellBase],
    j_s: &'a [f64],
    /// Cell absorption opacity.
    sa: Vec<f64>,
    /// Face `c / (3 sigma_s)`.
    kf: Vec<f64>,
    ghosts: [[f64; 3]; 2],
    dt: f64,
    dx: f64,
    c: f64,
    p0: f64,
    a: f64,
    frozen: bool,
}

impl CellStencil<3> for NoneqStencil<'_> {
    fn cell<T: Scalar>(&self, i: usize, s: [[T; 3]; 3]) -> [Acc<T>; 3] {
        let [m, x, p] = s;
        let [j, v, t] = x;
        let c = &self.cells[i];
        let (dt, dx) = (self.dt, self.dx);
        let diff_p = (p[0] - j) * (self.kf[i + 1] / dx);
        let diff_m = (j - m[0]) * (self.kf[i] / dx);
        // 16 pi / 3 times the face means of v and J
        let adv_p = (v + p[1]) * (j + p[0]) * (FOUR_PI / 3.0);
        let adv_m = (m[1] + v) * (m[0] + j) * (FOUR_PI / 3.0);
        let trans = [
            j * (FOUR_PI / dt),
            T::cst(-FOUR_PI * self.j_s[i] / dt),
            diff_p * (-FOUR_PI / dx),
            diff_m * (FOUR_PI / dx),
            adv_p / dx,
            -adv_m / dx,
        ];
        let csa = self.c * self.sa[i];
        let src = [t.pow4() * csa, j * (-FOUR_PI * csa), v * (p[0] - m[0]) * (2.0 * PI / (3.0 * dx))];

        // The kinetic wall flux carries a c/eps term in J_0 - <b>, which pins
        // the wall cell's J to the wall value in the limit.
        let wall = wall_index(i, self.cells.len()).map(|w| self.ghosts[w][0]);
        let mut rj = Acc::new();
        if let Some(jw) = wall {
            rj.add(j);
            rj.add(T::cst(-jw));
        } else {
            for term in trans {
                rj.add(term);
            }
            for term in src {
                rj.add(-term);
            }
        }
        let mut rv = Acc::new();
        let mut rt = Acc::new();
        let arho = self.a * c.rho;
        if self.frozen {
            rv.add(v);
            rv.add(T::cst(-c.v_s));
            // nondimensional velocities are O(1); keeps v_s = 0 well scaled
            rv.m = rv.m.max(1.0);
            rt.add(t * (arho / dt));
            rt.add(T::cst(-arho * c.t_s / dt));
            if self.p0 != 0.0 {
                for term in src {
                    rt.add(term * self.p0);
                }
            }
        } else {
            rv.add(v * (c.rho / dt));
            rv.add(T::cst(-c.mom_s / dt));
            rv.add(T::cst(c.df2));
            rv.add_scale(c.flux_scale[0]);
            rt.add(t * (arho / dt));
            rt.add(v * v * (0.5 * c.rho / dt));
            rt.add(T::cst(c.e_perp / dt));
            rt.add(T::cst(-c.en_s / dt));
            rt.add(T::cst(c.df5));
            rt.add_scale(c.flux_scale[1]);
            if self.p0 != 0.0 {
                rv.add((p[0] - m[0]) * (2.0 * PI * self.p0 / (3.0 * dx)));
                // a pinned cell only exchanges energy with its radiation
                if wall.is_some() {
                    for term in src {
                        rt.add(term * self.p0);
                    }
                } else {
                    for term in trans {
                        rt.add(term * self.p0);
                    }
                }
            }
        }
        [rj, rv, rt]
    }

    fn ghosts(&self) -> [[f64; 3]; 2] {
        self.ghosts
    }

    fn admissible(&self, x: &[f64; 3]) -> bool {
        x[2] > 0.0
    }
}

/// Unknowns `[vx, T]`; the radiation energy is `P0 T^4`.
struct EqStencil<'a> {
    cells: &'a [CellBase],
    /// Face `c / (3 sigma_a)`.
    kf: Vec<f64>,
    ghosts: [[f64; 2]; 2],
    /// `T^4` of the wall cells, `8 pi <b> - T_w^4`.
    wall_t4: [f64; 2],
    dt: f64,
    dx: f64,
    p0: f64,
    a: f64,
    frozen: bool,
}

impl CellStencil<2> for EqStencil<'_> {
    fn cell<T: Scalar>(&self, i: usize, s: [[T; 2]; 3]) -> [Acc<T>; 2] {
        let [m, x, p] = s;
        let [v, t] = x;
        let c = &self.cells[i];
        let (dt, dx) = (self.dt, self.dx);
        let (t4m, t4, t4p) = (m[1].pow4(), t.pow4(), p[1].pow4());
        let mut rv = Acc::new();
        let mut rt = Acc::new();
        let arho = self.a * c.rho;
        if self.frozen {
            rv.add(v);
            rv.add(T::cst(-c.v_s));
            rv.m = rv.m.max(1.0);
            rt.add(t * (arho / dt));
            rt.add(T::cst(-arho * c.t_s / dt));
        } else {
            rv.add(v * (c.rho / dt));
            rv.add(T::cst(-c.mom_s / dt));
            rv.add(T::cst(c.df2));
            rv.add_scale(c.flux_scale[0]);
            rt.add(t * (arho / dt));
            rt.add(v * v * (0.5 * c.rho / dt));
            rt.add(T::cst(c.e_perp / dt));
            rt.add(T::cst(-c.en_s / dt));
            rt.add(T::cst(c.df5));
            rt.add_scale(c.flux_scale[1]);
        }
        let wall = wall_index(i, self.cells.len()).filter(|_| self.p0 != 0.0);
        if let Some(target) = wall.map(|w| self.wall_t4[w]) {
            // the stiff wall term pins the wall cell, as in the kinetic scheme's limit
            if !self.frozen {
                rv.add((t4p - t4m) * (self.p0 / (6.0 * dx)));
            }
            let mut pinned = Acc::new();
            pinned.add(t4);
            pinned.add(T::cst(-target));
            return [rv, pinned];
        }
        if self.p0 != 0.0 {
            let p0 = self.p0;
            if !self.frozen {
                rv.add((t4p - t4m) * (p0 / (6.0 * dx)));
            }
            let dx2 = dx * dx;
            rt.add(t4 * (p0 / dt));
            rt.add(T::cst(-p0 * c.t_s.powi(4) / dt));
            rt.add((t4p - t4) * (-p0 * self.kf[i + 1] / dx2));
            rt.add((t4 - t4m) * (p0 * self.kf[i] / dx2));
            // 4/3 times the face means of v and T^4
            rt.add((v + p[0]) * (t4 + t4p) * (p0 / (3.0 * dx)));
            rt.add(-(m[0] + v) * (t4m + t4) * (p0 / (3.0 * dx)));
        }
        [rv, rt]
    }

    fn ghosts(&self) -> [[f64; 2]; 2] {
        self.ghosts
    }

    fn admissible(&self, x: &[f64; 2]) -> bool {
        x[1] > 0.0
    }
}

#[cfg(test)]
mod tests;
