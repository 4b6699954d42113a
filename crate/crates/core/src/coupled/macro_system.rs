//! The implicit macroscopic system in `(J, R, vx, T)` per cell.
//!
//! The residual is written once over [`Scalar`]; plain `f64` gives residuals
//! and dual numbers give the exact block-tridiagonal Jacobian.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dual::{Acc, Dual, Scalar};
use crate::linalg::Mat;
use crate::newton::BlockSystem;
use crate::ugks::{source_bracket0, source_bracket1, BoundaryClosure, UgksCoeffs};

const FOUR_PI: f64 = 4.0 * PI;
const MIN_PAR: usize = 64;

/// Per-cell data fixed during the solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellFrozen {
    pub rho: f64,
    /// `rho vx` and total energy at the old level.
    pub mom_s: f64,
    pub en_s: f64,
    /// Transverse kinetic plus magnetic energy at the new level.
    pub e_perp: f64,
    /// Convective flux differences divided by `dx`.
    pub df2: f64,
    pub df5: f64,
    /// `(|F_{i+1/2}| + |F_{i-1/2}|) / dx` for the two fluxes.
    pub flux_scale: [f64; 2],
    pub j_s: f64,
    pub r_s: f64,
    pub v_s: f64,
    pub t_s: f64,
    pub k_q: f64,
    /// Scaled opacities.
    pub sa: f64,
    pub ss: f64,
}

/// Per-face data fixed during the solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FaceFrozen {
    pub coeffs: UgksCoeffs,
    pub sa: f64,
    pub ss: f64,
    pub k_q: f64,
    pub q3: f64,
    /// Upwind free transport of the lagged `Q`.
    pub qa0: f64,
    pub qa1: f64,
}

pub(crate) struct MacroSystem<'a> {
    pub cells: &'a [CellFrozen],
    /// `nx + 1` faces; the two walls are handled by the closures.
    pub faces: &'a [FaceFrozen],
    pub left: BoundaryClosure,
    pub right: BoundaryClosure,
    /// `int_{n>0} n^k dn` and `int_{n<0} n^k dn`, k = 0..=3.
    pub half: [[f64; 4]; 2],
    pub dt: f64,
    pub dx: f64,
    pub cc: f64,
    pub p0: f64,
    pub a_coeff: f64,
    /// Fluid held fixed; only the material energy exchange remains.
    pub frozen: bool,
}

impl MacroSystem<'_> {
    /// `(Z, W)` at an interior face from the two neighbours.
    #[inline]
    fn face<T: Scalar>(&self, f: &FaceFrozen, l: [T; 4], r: [T; 4]) -> (T, T) {
        let [pos, neg] = self.half;
        let c = &f.coeffs;
        let (t4l, t4r) = (l[3].pow4(), r[3].pow4());
        let j_h = (l[0] + r[0]) * 0.5;
        let r_h = (l[1] + r[1]) * 0.5;
        let v_h = (l[2] + r[2]) * 0.5;
        let t4_h = (t4l + t4r) * 0.5;
        let dj = (r[0] - l[0]) / self.dx;
        let dt4 = (t4r - t4l) / self.dx;
        let a0 = l[0] * pos[1] + l[1] * pos[2] + r[0] * neg[1] + r[1] * neg[2] + f.qa0;
        let a1 = l[0] * pos[2] + l[1] * pos[3] + r[0] * neg[2] + r[1] * neg[3] + f.qa1;
        let z = a0 * c.a
            + dj * (2.0 * c.d1 / 3.0)
            + dt4 * (c.d2 / (6.0 * PI))
            + source_bracket0(f.sa, f.ss, v_h, j_h, t4_h, f.k_q) * c.f;
        let w = a1 * c.a
            + j_h * (2.0 * c.c1 / 3.0)
            + t4_h * (c.c2 / (6.0 * PI))
            + source_bracket1(f.sa, f.ss, v_h, j_h, r_h, f.k_q, f.q3, self.cc) * c.f;
        (z, w)
    }

    fn face_value(&self, x: &[[f64; 4]], f: usize) -> (f64, f64) {
        let n = self.cells.len();
        if f == 0 {
            let c = x[0];
            self.left.moments(c[0], c[1], c[2], c[3])
        } else if f == n {
            let c = x[n - 1];
            self.right.moments(c[0], c[1], c[2], c[3])
        } else {
            self.face(&self.faces[f], x[f - 1], x[f])
        }
    }

    /// Derivatives of `(Z, W)` with respect to the left and right cell.
    fn face_derivs(&self, x: &[[f64; 4]], f: usize) -> [[[f64; 4]; 2]; 2] {
        let n = self.cells.len();
        let mut out = [[[0.0; 4]; 2]; 2];
        if f == 0 || f == n {
            let (cl, i, slot) = if f == 0 { (&self.left, 0, 1) } else { (&self.right, n - 1, 0) };
            let v: [Dual<4>; 4] = std::array::from_fn(|k| Dual::var(x[i][k], k));
            let (z, w) = cl.moments(v[0], v[1], v[2], v[3]);
            out[0][slot] = z.d;
            out[1][slot] = w.d;
        } else {
            let l: [Dual<8>; 4] = std::array::from_fn(|k| Dual::var(x[f - 1][k], k));
            let r: [Dual<8>; 4] = std::array::from_fn(|k| Dual::var(x[f][k], k + 4));
            let (z, w) = self.face(&self.faces[f], l, r);
            for k in 0..4 {
                out[0][0][k] = z.d[k];
                out[0][1][k] = z.d[k + 4];
                out[1][0][k] = w.d[k];
                out[1][1][k] = w.d[k + 4];
            }
        }
        out
    }

    /// Cell-local part of the four equations: time differences, exchange
    /// sources and the explicit convective fluxes.
    fn local<T: Scalar>(&self, c: &CellFrozen, x: [T; 4]) -> [Acc<T>; 4] {
        let [j, r, v, t] = x;
        let cc = self.cc;
        let (sa, ss) = (c.sa, c.ss);
        let t4 = t.pow4();
        let e = t4 / FOUR_PI - j;
        let b = r * (cc / 3.0) - v * (j * (4.0 / 3.0) + c.k_q);
        // cc * S_re and cc * S_rp, term by term
        let s_re = [t4 * (cc * sa), -j * (FOUR_PI * cc * sa), v * b * (FOUR_PI * (sa - ss) / cc)];
        let s_rp = [
            -r * (FOUR_PI * (sa + ss) * cc / 3.0),
            v * (j * (4.0 / 3.0) + c.k_q) * (FOUR_PI * (sa + ss)),
            v * e * (FOUR_PI * sa),
        ];
        let inv_dt = 1.0 / self.dt;
        let mut rj = Acc::new();
        rj.add(j * (FOUR_PI * inv_dt));
        rj.add(T::cst(-FOUR_PI * c.j_s * inv_dt));
        let mut rr = Acc::new();
        rr.add(r * (FOUR_PI / 3.0 * inv_dt));
        rr.add(T::cst(-FOUR_PI / 3.0 * c.r_s * inv_dt));
        for k in 0..3 {
            rj.add(-s_re[k]);
            rr.add(-s_rp[k]);
        }
        let mut rv = Acc::new();
        let mut rt = Acc::new();
        let arho = self.a_coeff * c.rho;
        if self.frozen {
            rv.add(v);
            rv.add(T::cst(-c.v_s));
            // nondimensional velocities are O(1); keeps v_s = 0 well scaled
            rv.m = rv.m.max(1.0);
            rt.add(t * (arho * inv_dt));
            rt.add(T::cst(-arho * c.t_s * inv_dt));
        } else {
            rv.add(v * (c.rho * inv_dt));
            rv.add(T::cst(-c.mom_s * inv_dt));
            rv.add(T::cst(c.df2));
            rv.add_scale(c.flux_scale[0]);
            for s in s_rp {
                rv.add(s * (self.p0 / cc));
            }
            rt.add(t * (arho * inv_dt));
            rt.add(v * v * (0.5 * c.rho * inv_dt));
            rt.add(T::cst(c.e_perp * inv_dt));
            rt.add(T::cst(-c.en_s * inv_dt));
            rt.add(T::cst(c.df5));
            rt.add_scale(c.flux_scale[1]);
        }
        if self.p0 != 0.0 {
            for s in s_re {
                rt.add(s * self.p0);
            }
        }
        [rj, rr, rv, rt]
    }
}

impl BlockSystem<4> for MacroSystem<'_> {
    fn residual(&self, x: &[[f64; 4]], r: &mut [[f64; 4]], scale: &mut [[f64; 4]]) {
        let n = self.cells.len();
        let faces: Vec<(f64, f64)> =
            (0..n + 1).into_par_iter().with_min_len(MIN_PAR).map(|f| self.face_value(x, f)).collect();
        let k = 2.0 * PI / self.dx;
        r.par_iter_mut().zip(scale.par_iter_mut()).enumerate().with_min_len(MIN_PAR).for_each(|(i, (ri, si))| {
            let mut acc = self.local(&self.cells[i], x[i]);
            acc[0].add(k * faces[i + 1].0);
            acc[0].add(-k * faces[i].0);
            acc[1].add(k * faces[i + 1].1);
            acc[1].add(-k * faces[i].1);
            for q in 0..4 {
                ri[q] = acc[q].v;
                si[q] = acc[q].m;
            }
        });
    }

    fn jacobian(&self, x: &[[f64; 4]], lower: &mut [Mat<4>], diag: &mut [Mat<4>], upper: &mut [Mat<4>]) {
        let n = self.cells.len();
        let fd: Vec<[[[f64; 4]; 2]; 2]> =
            (0..n + 1).into_par_iter().with_min_len(MIN_PAR).map(|f| self.face_derivs(x, f)).collect();
        let k = 2.0 * PI / self.dx;
        lower
            .par_iter_mut()
            .zip(diag.par_iter_mut())
            .zip(upper.par_iter_mut())
            .enumerate()
            .with_min_len(MIN_PAR)
            .for_each(|(i, ((lo, d), up))| {
                let v: [Dual<4>; 4] = std::array::from_fn(|q| Dual::var(x[i][q], q));
                let acc = self.local(&self.cells[i], v);
                for row in 0..4 {
                    d[row] = acc[row].v.d;
                    lo[row] = [0.0; 4];
                    up[row] = [0.0; 4];
                }
                for row in 0..2 {
                    for q in 0..4 {
                        // face i+1 has cell i on its left, face i on its right
                        d[row][q] += k * (fd[i + 1][row][0][q] - fd[i][row][1][q]);
                        lo[row][q] = -k * fd[i][row][0][q];
                        up[row][q] = k * fd[i + 1][row][1][q];
                    }
                }
            });
    }

    fn admissible(&self, x: &[[f64; 4]]) -> bool {
        x.iter().all(|c| c[3] > 0.0 && c.iter().all(|v| v.is_finite()))
    }
}
