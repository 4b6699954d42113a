//! Explicit discrete-ordinates solver under the light-speed CFL condition.
//!
//! Upwind transport and the velocity source `G` are explicit; the collision
//! terms use the old `T` and `J` but are divided out point-implicitly so
//! optically thick cells stay bounded. The fluid takes an explicit Roe step
//! and explicit exchange sources built from the updated radiation moments.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::coupled::CoupledState;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::mhd::{conserved_to_primitive, explicit_mhd_update, FluidGhosts, FluidModel, UpdateSet, EN, MX, RHO};
use crate::opacity::Opacity;
use crate::params::NondimParams;
use crate::quadrature::Quadrature;
use crate::ugks::{BoundaryData, CellMacro};

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone)]
pub struct ExplicitKineticSolver {
    pub mesh: Mesh1D,
    pub params: NondimParams,
    pub model: FluidModel,
    pub quad: Quadrature,
    pub ghosts: FluidGhosts,
    pub walls: [BoundaryData; 2],
    pub sigma_a: Opacity,
    pub sigma_s: Opacity,
    pub frozen: bool,
}

impl ExplicitKineticSolver {
    /// Largest stable step, `dx / curly_c`.
    pub fn max_dt(&self) -> f64 {
        self.mesh.dx / self.params.curly_c
    }

    pub fn step(&self, state: &mut CoupledState, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if dt > self.max_dt() * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "explicit kinetic step {dt:e} exceeds the light-speed limit dx/C = {:e}",
                self.max_dt()
            )));
        }
        let nx = self.mesh.nx;
        let quad = &self.quad;
        let order = quad.order;
        if state.nx() != nx || state.q.len() != nx * order {
            return Err(Error::invalid(format!("state does not match the mesh of {nx} cells")));
        }
        for w in &self.walls {
            w.validate(quad)?;
        }
        let p = &self.params;
        let cc = p.curly_c;
        let dx = self.mesh.dx;
        let model = &self.model;
        let prims = state
            .fluid
            .iter()
            .enumerate()
            .map(|(i, u)| conserved_to_primitive(u, model, i))
            .collect::<Result<Vec<_>>>()?;
        let rho: Vec<f64> = prims.iter().map(|w| w.rho).collect();
        let temp: Vec<f64> = prims.iter().map(|w| w.temperature(model)).collect();
        let sa = self.sigma_a.cells(&self.mesh, &rho, &temp)?;
        let ss = self.sigma_s.cells(&self.mesh, &rho, &temp)?;
        let cell = |i: usize, j: f64, r: f64, k_q: f64| CellMacro {
            j,
            r,
            vx: prims[i].vx,
            t4: temp[i].powi(4),
            k_q,
            sigma_a: sa[i] * p.la,
            sigma_s: ss[i] * p.ls,
        };

        let old = state.intensity(quad);
        let lam = dt * cc / dx;
        let mut new = vec![0.0; old.len()];
        new.par_chunks_mut(order).enumerate().for_each(|(i, out)| {
            let qi = &state.q[i * order..(i + 1) * order];
            let c = cell(i, state.j[i], state.r[i], quad.moment_unchecked(qi, 2));
            for m in 0..order {
                let n = quad.nodes[m];
                let here = old[i * order + m];
                let upwind = if n > 0.0 {
                    if i == 0 {
                        self.walls[0].inflow[m]
                    } else {
                        old[(i - 1) * order + m]
                    }
                } else if i + 1 == nx {
                    self.walls[1].inflow[m]
                } else {
                    old[(i + 1) * order + m]
                };
                let transport = -lam * n.abs() * (here - upwind);
                let src = cc * (c.sigma_a * c.t4 / FOUR_PI + c.sigma_s * c.j) + c.g(n, qi[m], cc);
                out[m] = (here + transport + dt * src) / (1.0 + dt * cc * (c.sigma_a + c.sigma_s));
            }
        });
        if let Some(k) = new.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "intensity", cell: k / order });
        }
        let mut next = CoupledState::from_intensity(state.time + dt, state.fluid.clone(), &new, quad)?;

        if !self.frozen {
            next.fluid = explicit_mhd_update(&state.fluid, &self.ghosts, model, dt, dx, UpdateSet::All)?.0;
        }
        if p.p0 != 0.0 {
            for i in 0..nx {
                let qi = &next.q[i * order..(i + 1) * order];
                let c = cell(i, next.j[i], next.r[i], quad.moment_unchecked(qi, 2));
                let v = c.vx;
                let e = c.t4 / FOUR_PI - c.j;
                let b = cc * c.r / 3.0 - v * (4.0 / 3.0 * c.j + c.k_q);
                let cs_re = FOUR_PI * cc * c.sigma_a * e + FOUR_PI * (c.sigma_a - c.sigma_s) * v * b / cc;
                let s_rp = -FOUR_PI * (c.sigma_a + c.sigma_s) * b / cc + FOUR_PI * c.sigma_a * v * e / cc;
                let u = &mut next.fluid[i];
                u[EN] -= dt * p.p0 * cs_re;
                if !self.frozen {
                    u[MX] -= dt * p.p0 * s_rp;
                }
                if !(u[RHO] > 0.0) {
                    return Err(Error::Positivity { quantity: "density", value: u[RHO], cell: i });
                }
            }
        }
        *state = next;
        Ok(())
    }
}
