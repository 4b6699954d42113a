//! Implicit per-ordinate update of the residual `Q`.
//!
//! With the macroscopic fields known, each ordinate obeys a linear transport
//! equation. The upwind free-transport term couples a cell to its upwind
//! neighbour and the upwinded source `G_hat` may couple it to the downwind
//! one, so every ordinate is a tridiagonal system that is solved exactly.
//! Where `G_hat` has no downwind coupling this is the plain directional sweep.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::quadrature::Quadrature;
use crate::ugks::{
    boundary_micro_flux, g_hat_branch, micro_flux, BoundaryData, CellMacro, InterfaceData, Side, UgksCoeffs, Upwind,
};

pub(crate) struct SweepInput<'a> {
    pub quad: &'a Quadrature,
    /// New macroscopic values with the lagged `K_Q`.
    pub cells: &'a [CellMacro],
    pub j_s: &'a [f64],
    pub r_s: &'a [f64],
    /// Lagged `Q`, cell-major.
    pub q_s: &'a [f64],
    /// `nx + 1` face coefficients.
    pub coeffs: &'a [UgksCoeffs],
    /// Scaled face opacities.
    pub face_sa: &'a [f64],
    pub face_ss: &'a [f64],
    pub walls: [&'a BoundaryData; 2],
    pub dt: f64,
    pub dx: f64,
    pub cc: f64,
}

/// Flux of one ordinate at one face, `k + cl q_{f-1} + cr q_f`.
#[derive(Debug, Clone, Copy, Default)]
struct FaceFlux {
    k: f64,
    cl: f64,
    cr: f64,
}

impl SweepInput<'_> {
    fn face_flux(&self, m: usize, f: usize, b_mean: [f64; 2]) -> FaceFlux {
        let quad = self.quad;
        let nx = self.cells.len();
        let order = quad.order;
        let n = quad.nodes[m];
        let cc = self.cc;
        let c = &self.coeffs[f];
        if f == 0 || f == nx {
            let (side, i, w) = if f == 0 { (Side::Left, 0, 0) } else { (Side::Right, nx - 1, 1) };
            let cell = &self.cells[i];
            let (g0, g1) = cell.g_parts(n, cc);
            let k = boundary_micro_flux(
                side,
                m,
                self.walls[w],
                b_mean[w],
                cell.j,
                cell.t4,
                cell.j + n * cell.r,
                g0,
                c,
                quad,
                self.dx,
                cc,
            );
            if side.incoming(n) {
                return FaceFlux { k, ..Default::default() };
            }
            let coef = c.a * n + c.f * n * g1;
            return if f == 0 { FaceFlux { k, cl: 0.0, cr: coef } } else { FaceFlux { k, cl: coef, cr: 0.0 } };
        }
        let (l, r) = (&self.cells[f - 1], &self.cells[f]);
        let iface = InterfaceData::between(l, r, self.face_sa[f], self.face_ss[f], self.dx, cc);
        let up = if n > 0.0 { l } else { r };
        let mut out = FaceFlux { k: micro_flux(n, &iface, c, up.j + n * up.r, 0.0), cl: 0.0, cr: 0.0 };
        if n > 0.0 {
            out.cl += c.a * n;
        } else {
            out.cr += c.a * n;
        }
        // Branch of G_hat fixed from the lagged Q; its value uses the new Q.
        let gl = l.g(n, self.q_s[(f - 1) * order + m], cc);
        let gr = r.g(n, self.q_s[f * order + m], cc);
        match g_hat_branch(gl, gr, l.vx, r.vx) {
            Upwind::Left => {
                let (g0, g1) = l.g_parts(n, cc);
                out.k += c.f * n * g0;
                out.cl += c.f * n * g1;
            }
            Upwind::Right => {
                let (g0, g1) = r.g_parts(n, cc);
                out.k += c.f * n * g0;
                out.cr += c.f * n * g1;
            }
            Upwind::Zero => {}
        }
        out
    }

    /// New `Q` of ordinate `m` in every cell.
    fn solve_ordinate(&self, m: usize, b_mean: [f64; 2]) -> Vec<f64> {
        let nx = self.cells.len();
        let order = self.quad.order;
        let n = self.quad.nodes[m];
        let (dt, dx, cc) = (self.dt, self.dx, self.cc);
        let fl: Vec<FaceFlux> = (0..=nx).map(|f| self.face_flux(m, f, b_mean)).collect();
        let mut lower = vec![0.0; nx];
        let mut diag = vec![0.0; nx];
        let mut upper = vec![0.0; nx];
        let mut rhs = vec![0.0; nx];
        for i in 0..nx {
            let c = &self.cells[i];
            let st = c.sigma_a + c.sigma_s;
            let (g0, g1) = c.g_parts(n, cc);
            diag[i] = 1.0 / dt + cc * st - g1 + (fl[i + 1].cl - fl[i].cr) / dx;
            lower[i] = -fl[i].cl / dx;
            upper[i] = fl[i + 1].cr / dx;
            rhs[i] = self.q_s[i * order + m] / dt
                - ((c.j - self.j_s[i]) + n * (c.r - self.r_s[i])) / dt
                - (fl[i + 1].k - fl[i].k) / dx
                + cc * (c.sigma_a * c.t4 / (4.0 * PI) + c.sigma_s * c.j - st * (c.j + n * c.r))
                + g0;
        }
        thomas(&lower, &mut diag, &upper, &mut rhs);
        rhs
    }
}

/// Tridiagonal solve without pivoting; `rhs` becomes the solution.
pub(crate) fn thomas(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        assert!(diag[i - 1] != 0.0, "zero pivot in the Q sweep at cell {}", i - 1);
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if n == 0 {
        return;
    }
    assert!(diag[n - 1] != 0.0, "zero pivot in the Q sweep at cell {}", n - 1);
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

/// `Q` at the new level, cell-major.
pub(crate) fn update_q(input: &SweepInput<'_>) -> Vec<f64> {
    let order = input.quad.order;
    let nx = input.cells.len();
    let b_mean = [input.walls[0].mean(input.quad), input.walls[1].mean(input.quad)];
    let columns: Vec<Vec<f64>> = (0..order).into_par_iter().map(|m| input.solve_ordinate(m, b_mean)).collect();
    let mut q = vec![0.0; nx * order];
    for (m, col) in columns.iter().enumerate() {
        for i in 0..nx {
            q[i * order + m] = col[i];
        }
    }
    q
}
