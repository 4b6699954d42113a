//! One asymptotic-preserving time step of the coupled system: explicit
//! convection of the transverse fluid variables, an implicit nonlinear solve
//! for `(J, R, vx, T)`, then the implicit per-ordinate update of `Q`.

mod macro_system;
mod sweep;

use std::f64::consts::PI;

use crate::decomposition::decompose;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::mhd::{
    conserved_to_primitive, explicit_mhd_update, ConservedVector, FluidGhosts, FluidModel, FluidState, UpdateSet, EN,
    MX, MY, MZ, RHO,
};
use crate::newton::{newton_solve, BlockSystem, NewtonReport, NewtonSettings};
use crate::opacity::Opacity;
use crate::params::NondimParams;
use crate::quadrature::Quadrature;
use crate::ugks::{
    boundary_micro_flux, coefficients_scaled, g_hat_branch, micro_flux, upwind_integrals, BoundaryClosure,
    BoundaryData, CellMacro, InterfaceData, Side, UgksCoeffs, Upwind,
};

use macro_system::{CellFrozen, FaceFrozen, MacroSystem};
use sweep::SweepInput;

/// Per-cell `[J, R, vx, T]` at the new level.
pub type MacroUnknowns = Vec<[f64; 4]>;

/// Per-cell residual rows and their scales.
pub type RowsAndScales = (Vec<[f64; 4]>, Vec<[f64; 4]>);

/// `J` of the isotropic equilibrium intensity `T^4 / 4 pi`.
#[inline]
pub fn equilibrium_j(t: f64) -> f64 {
    pow4(t) / (4.0 * PI)
}

#[inline]
fn pow4(t: f64) -> f64 {
    let t2 = t * t;
    t2 * t2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoupledMode {
    Coupled,
    /// Density, velocity and field held fixed; radiation and material
    /// temperature evolve.
    Frozen,
}

/// Fluid conserved variables plus the radiation split `I = J + n R + Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub time: f64,
    pub fluid: Vec<ConservedVector>,
    pub j: Vec<f64>,
    pub r: Vec<f64>,
    /// Cell-major, `q[i * order + m]`.
    pub q: Vec<f64>,
}

impl CoupledState {
    pub fn from_intensity(
        time: f64,
        fluid: Vec<ConservedVector>,
        intensity: &[f64],
        quad: &Quadrature,
    ) -> Result<Self> {
        let order = quad.order;
        if intensity.len() != fluid.len() * order {
            return Err(Error::invalid(format!(
                "intensity has {} values, expected {} cells x {} ordinates",
                intensity.len(),
                fluid.len(),
                order
            )));
        }
        let mut j = Vec::with_capacity(fluid.len());
        let mut r = Vec::with_capacity(fluid.len());
        let mut q = Vec::with_capacity(intensity.len());
        for cell in intensity.chunks(order) {
            let d = decompose(cell, quad)?;
            j.push(d.j);
            r.push(d.r);
            q.extend_from_slice(&d.q);
        }
        Ok(CoupledState { time, fluid, j, r, q })
    }

    /// Radiation in local equilibrium with the material: `I = T^4 / 4 pi`.
    pub fn equilibrium(fluid: Vec<ConservedVector>, model: &FluidModel, quad: &Quadrature) -> Result<Self> {
        let mut j = Vec::with_capacity(fluid.len());
        for (i, u) in fluid.iter().enumerate() {
            j.push(equilibrium_j(conserved_to_primitive(u, model, i)?.temperature(model)));
        }
        let n = fluid.len();
        Ok(CoupledState { time: 0.0, fluid, j, r: vec![0.0; n], q: vec![0.0; n * quad.order] })
    }

    pub fn nx(&self) -> usize {
        self.fluid.len()
    }

    pub fn intensity(&self, quad: &Quadrature) -> Vec<f64> {
        let order = quad.order;
        let mut out = self.q.clone();
        for (i, cell) in out.chunks_mut(order).enumerate() {
            for (m, v) in cell.iter_mut().enumerate() {
                *v += self.j[i] + quad.nodes[m] * self.r[i];
            }
        }
        out
    }

    /// Per-cell `<Q>` and `<nQ>`.
    pub fn q_moments(&self, quad: &Quadrature) -> (Vec<f64>, Vec<f64>) {
        self.q.chunks(quad.order).map(|c| (quad.moment_unchecked(c, 0), quad.moment_unchecked(c, 1))).unzip()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub macro_iterations: usize,
    pub macro_residual: f64,
    /// `||<Q>||_2` and `||<nQ>||_2` over cells of the new state.
    pub q_mean_norm: f64,
    pub q_flux_norm: f64,
    pub j_norm: f64,
    /// The same norms of the raw sweep output, before it is folded back into
    /// `J` and `R`.
    pub sweep_q_mean_norm: f64,
    pub sweep_q_flux_norm: f64,
}

#[derive(Debug, Clone)]
pub struct CoupledSolver {
    pub mesh: Mesh1D,
    pub params: NondimParams,
    pub model: FluidModel,
    pub quad: Quadrature,
    pub ghosts: FluidGhosts,
    /// Left and right radiation walls.
    pub walls: [BoundaryData; 2],
    pub sigma_a: Opacity,
    pub sigma_s: Opacity,
    pub mode: CoupledMode,
    pub newton: NewtonSettings,
}

/// Everything frozen for one step after the explicit substep.
pub struct StepSetup {
    nx: usize,
    order: usize,
    new_fluid: Vec<ConservedVector>,
    cells: Vec<CellFrozen>,
    faces: Vec<FaceFrozen>,
    closures: [BoundaryClosure; 2],
    half: [[f64; 4]; 2],
    coeffs: Vec<UgksCoeffs>,
    face_sa: Vec<f64>,
    face_ss: Vec<f64>,
    q_s: Vec<f64>,
    guess: MacroUnknowns,
    dt: f64,
    dx: f64,
    frozen: bool,
}

impl StepSetup {
    /// Starting iterate of the macro solve (the convection predictor).
    pub fn guess(&self) -> &[[f64; 4]] {
        &self.guess
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

impl CoupledSolver {
    fn check_state(&self, state: &CoupledState) -> Result<()> {
        let nx = self.mesh.nx;
        if state.fluid.len() != nx
            || state.j.len() != nx
            || state.r.len() != nx
            || state.q.len() != nx * self.quad.order
        {
            return Err(Error::invalid(format!("state does not match the mesh of {nx} cells")));
        }
        for w in &self.walls {
            w.validate(&self.quad)?;
        }
        Ok(())
    }

    /// Algorithm steps 1 and 2: explicit convection and the frozen data of
    /// the implicit stage.
    pub fn prepare(&self, state: &CoupledState, dt: f64) -> Result<StepSetup> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        self.check_state(state)?;
        let nx = self.mesh.nx;
        let order = self.quad.order;
        let dx = self.mesh.dx;
        let p = &self.params;
        let cc = p.curly_c;
        let model = &self.model;
        let frozen = self.mode == CoupledMode::Frozen;
        let prims: Vec<FluidState> =
            state.fluid.iter().enumerate().map(|(i, u)| conserved_to_primitive(u, model, i)).collect::<Result<_>>()?;
        let (new_fluid, fluxes) = if frozen {
            (state.fluid.clone(), vec![[0.0; 7]; nx + 1])
        } else {
            explicit_mhd_update(&state.fluid, &self.ghosts, model, dt, dx, UpdateSet::Transverse)?
        };
        let rho: Vec<f64> = new_fluid.iter().map(|u| u[RHO]).collect();
        let t_s: Vec<f64> = prims.iter().map(|w| w.temperature(model)).collect();

        let sa_cells = self.sigma_a.cells(&self.mesh, &rho, &t_s)?;
        let ss_cells = self.sigma_s.cells(&self.mesh, &rho, &t_s)?;
        let face_sa: Vec<f64> = self.sigma_a.faces(&self.mesh, &sa_cells)?.iter().map(|s| s * p.la).collect();
        let face_ss: Vec<f64> = self.sigma_s.faces(&self.mesh, &ss_cells)?.iter().map(|s| s * p.ls).collect();
        let coeffs: Vec<UgksCoeffs> =
            (0..=nx).map(|f| coefficients_scaled(dt, face_sa[f], face_ss[f], cc)).collect::<Result<_>>()?;

        let q_cell = |i: usize| &state.q[i * order..(i + 1) * order];
        let kq: Vec<(f64, f64)> = (0..nx)
            .map(|i| (self.quad.moment_unchecked(q_cell(i), 2), self.quad.moment_unchecked(q_cell(i), 3)))
            .collect();

        let bx2 = model.bx * model.bx;
        let mut cells = Vec::with_capacity(nx);
        let mut guess = Vec::with_capacity(nx);
        for i in 0..nx {
            let u = &new_fluid[i];
            let e_perp = 0.5 * (u[MY] * u[MY] + u[MZ] * u[MZ]) / u[RHO] + 0.5 * (bx2 + u[5] * u[5] + u[6] * u[6]);
            let c = CellFrozen {
                rho: u[RHO],
                mom_s: state.fluid[i][MX],
                en_s: state.fluid[i][EN],
                e_perp,
                df2: (fluxes[i + 1][MX] - fluxes[i][MX]) / dx,
                df5: (fluxes[i + 1][EN] - fluxes[i][EN]) / dx,
                flux_scale: [MX, EN].map(|k| (fluxes[i + 1][k].abs() + fluxes[i][k].abs()) / dx),
                j_s: state.j[i],
                r_s: state.r[i],
                v_s: prims[i].vx,
                t_s: t_s[i],
                k_q: kq[i].0,
                sa: sa_cells[i] * p.la,
                ss: ss_cells[i] * p.ls,
            };
            let (v0, t0) = if frozen {
                (c.v_s, c.t_s)
            } else {
                // convection-only predictor
                let v = (c.mom_s - dt * c.df2) / c.rho;
                let t = (c.en_s - dt * c.df5 - 0.5 * c.rho * v * v - e_perp) / (p.a_coeff * c.rho);
                (v, if t > 0.0 && t.is_finite() { t } else { c.t_s })
            };
            guess.push([c.j_s, c.r_s, v0, t0]);
            cells.push(c);
        }

        let faces: Vec<FaceFrozen> = (0..=nx)
            .map(|f| {
                let (k_q, q3, qa0, qa1) = if f == 0 || f == nx {
                    (0.0, 0.0, 0.0, 0.0)
                } else {
                    let (a0, a1) = upwind_integrals(q_cell(f - 1), q_cell(f), &self.quad);
                    (0.5 * (kq[f - 1].0 + kq[f].0), 0.5 * (kq[f - 1].1 + kq[f].1), a0, a1)
                };
                FaceFrozen { coeffs: coeffs[f], sa: face_sa[f], ss: face_ss[f], k_q, q3, qa0, qa1 }
            })
            .collect();

        let closure = |side: Side| {
            let (i, f, w) = match side {
                Side::Left => (0, 0, &self.walls[0]),
                Side::Right => (nx - 1, nx, &self.walls[1]),
            };
            BoundaryClosure::new(side, w, q_cell(i), kq[i].0, cells[i].sa, cells[i].ss, coeffs[f], &self.quad, dx, cc)
        };
        let closures = [closure(Side::Left), closure(Side::Right)];
        let half = [
            std::array::from_fn(|k| 2.0 * self.quad.positive_half(k, |_| 1.0)),
            std::array::from_fn(|k| 2.0 * self.quad.negative_half(k, |_| 1.0)),
        ];
        Ok(StepSetup {
            nx,
            order,
            new_fluid,
            cells,
            faces,
            closures,
            half,
            coeffs,
            face_sa,
            face_ss,
            q_s: state.q.clone(),
            guess,
            dt,
            dx,
            frozen,
        })
    }

    fn system<'a>(&self, s: &'a StepSetup) -> MacroSystem<'a> {
        MacroSystem {
            cells: &s.cells,
            faces: &s.faces,
            left: s.closures[0],
            right: s.closures[1],
            half: s.half,
            dt: s.dt,
            dx: s.dx,
            cc: self.params.curly_c,
            p0: self.params.p0,
            a_coeff: self.params.a_coeff,
            frozen: s.frozen,
        }
    }

    /// Residual of the four macroscopic equations and the per-row term
    /// magnitudes used to scale it.
    pub fn macro_residual(&self, setup: &StepSetup, guess: &[[f64; 4]]) -> Result<RowsAndScales> {
        if guess.len() != setup.nx {
            return Err(Error::invalid("macro guess does not match the mesh"));
        }
        let mut r = vec![[0.0; 4]; setup.nx];
        let mut s = vec![[0.0; 4]; setup.nx];
        self.system(setup).residual(guess, &mut r, &mut s);
        if let Some(i) = r.iter().position(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite { what: "macro residual", cell: i });
        }
        Ok((r, s))
    }

    /// Newton solve of the macroscopic system from the convection predictor.
    pub fn solve_macro(&self, setup: &StepSetup) -> Result<(MacroUnknowns, NewtonReport)> {
        let mut x = setup.guess.clone();
        let rep = newton_solve(&self.system(setup), &mut x, self.newton, "macro solve")?;
        Ok((x, rep))
    }

    /// New `Q` (cell-major) given the solved macroscopic fields.
    pub fn update_q(&self, setup: &StepSetup, x: &[[f64; 4]]) -> Vec<f64> {
        let cells = self.cell_macro(setup, x);
        let j_s: Vec<f64> = setup.cells.iter().map(|c| c.j_s).collect();
        let r_s: Vec<f64> = setup.cells.iter().map(|c| c.r_s).collect();
        sweep::update_q(&SweepInput {
            quad: &self.quad,
            cells: &cells,
            j_s: &j_s,
            r_s: &r_s,
            q_s: &setup.q_s,
            coeffs: &setup.coeffs,
            face_sa: &setup.face_sa,
            face_ss: &setup.face_ss,
            walls: [&self.walls[0], &self.walls[1]],
            dt: setup.dt,
            dx: setup.dx,
            cc: self.params.curly_c,
        })
    }

    /// Residual of the discrete transport equation of ordinate `m` in every
    /// cell, for trial values `q` of that ordinate's `Q`. Written directly
    /// from the micro fluxes; `update_q` solves these equations.
    pub fn ordinate_residual(&self, setup: &StepSetup, x: &[[f64; 4]], m: usize, q: &[f64]) -> Vec<f64> {
        let cells = self.cell_macro(setup, x);
        let quad = &self.quad;
        let order = quad.order;
        let n = quad.nodes[m];
        let nx = cells.len();
        let cc = self.params.curly_c;
        let (dt, dx) = (setup.dt, setup.dx);
        let walls = &self.walls;
        let intensity = |i: usize| cells[i].j + n * cells[i].r + q[i];
        let flux = |f: usize| -> f64 {
            let c = &setup.coeffs[f];
            if f == 0 || f == nx {
                let (side, i, w) = if f == 0 { (Side::Left, 0, &walls[0]) } else { (Side::Right, nx - 1, &walls[1]) };
                let g = cells[i].g(n, q[i], cc);
                return boundary_micro_flux(
                    side,
                    m,
                    w,
                    w.mean(quad),
                    cells[i].j,
                    cells[i].t4,
                    intensity(i),
                    g,
                    c,
                    quad,
                    dx,
                    cc,
                );
            }
            let (l, r) = (&cells[f - 1], &cells[f]);
            let iface = InterfaceData::between(l, r, setup.face_sa[f], setup.face_ss[f], dx, cc);
            let lag_l = l.g(n, setup.q_s[(f - 1) * order + m], cc);
            let lag_r = r.g(n, setup.q_s[f * order + m], cc);
            let g = match g_hat_branch(lag_l, lag_r, l.vx, r.vx) {
                Upwind::Left => l.g(n, q[f - 1], cc),
                Upwind::Right => r.g(n, q[f], cc),
                Upwind::Zero => 0.0,
            };
            let up = if n > 0.0 { intensity(f - 1) } else { intensity(f) };
            micro_flux(n, &iface, c, up, g)
        };
        (0..nx)
            .map(|i| {
                let c = &cells[i];
                let src = cc * (c.sigma_a * (c.t4 / (4.0 * PI) - intensity(i)) + c.sigma_s * (c.j - intensity(i)))
                    + c.g(n, q[i], cc);
                let old = setup.cells[i].j_s + n * setup.cells[i].r_s + setup.q_s[i * order + m];
                (intensity(i) - old) / dt + (flux(i + 1) - flux(i)) / dx - src
            })
            .collect()
    }

    fn cell_macro(&self, setup: &StepSetup, x: &[[f64; 4]]) -> Vec<CellMacro> {
        setup
            .cells
            .iter()
            .zip(x)
            .map(|(c, v)| CellMacro {
                j: v[0],
                r: v[1],
                vx: v[2],
                t4: pow4(v[3]),
                k_q: c.k_q,
                sigma_a: c.sa,
                sigma_s: c.ss,
            })
            .collect()
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &mut CoupledState, dt: f64) -> Result<StepReport> {
        let setup = self.prepare(state, dt)?;
        let (x, rep) = self.solve_macro(&setup)?;
        let q = self.update_q(&setup, &x);
        if let Some(k) = q.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "Q", cell: k / setup.order });
        }
        let a = self.params.a_coeff;
        let mut fluid = setup.new_fluid;
        for (i, u) in fluid.iter_mut().enumerate() {
            let [_, _, v, t] = x[i];
            let c = &setup.cells[i];
            if setup.frozen {
                u[EN] += a * c.rho * (t - c.t_s);
            } else {
                u[MX] = c.rho * v;
                u[EN] = a * c.rho * t + 0.5 * c.rho * v * v + c.e_perp;
            }
        }
        let raw = CoupledState {
            time: state.time + dt,
            fluid,
            j: x.iter().map(|c| c[0]).collect(),
            r: x.iter().map(|c| c[1]).collect(),
            q,
        };
        let (s0, s1) = raw.q_moments(&self.quad);
        // recompose I and split it again, so the stored Q carries no J or R
        let mut next =
            CoupledState::from_intensity(raw.time, raw.fluid.clone(), &raw.intensity(&self.quad), &self.quad)?;
        let (m0, m1) = next.q_moments(&self.quad);
        let l2 = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let report = StepReport {
            macro_iterations: rep.iterations,
            macro_residual: rep.residual,
            q_mean_norm: l2(&m0),
            q_flux_norm: l2(&m1),
            j_norm: l2(&next.j),
            sweep_q_mean_norm: l2(&s0),
            sweep_q_flux_norm: l2(&s1),
        };
        std::mem::swap(state, &mut next);
        Ok(report)
    }
}

#[cfg(test)]
mod tests;
