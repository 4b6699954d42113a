//! Interface fluxes of the unified gas kinetic scheme: the micro flux of one
//! ordinate, its zeroth and first angular moments, upwinding of the source
//! term `G`, and the boundary closures.
//!
//! Opacities stored here are the regime-scaled products `La sigma_a` and
//! `Ls sigma_s`. Moments are full integrals over `[-1, 1]`, i.e. twice the
//! `<.>` averages.

mod coeffs;

pub use coeffs::{coefficients_scaled, ugks_coefficients, UgksCoeffs, TAYLOR_THRESHOLD};

use std::f64::consts::PI;

use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Which neighbour `g_hat` picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Upwind {
    Left,
    Right,
    Zero,
}

/// Branch selection of the upwinded source term. Ties `vx_i == vx_ip1`
/// pick the right value.
pub fn g_hat_branch(g_i: f64, g_ip1: f64, vx_i: f64, vx_ip1: f64) -> Upwind {
    if vx_i >= vx_ip1 {
        let dv = vx_ip1 - vx_i;
        if dv != 0.0 && (g_ip1 - g_i) / dv > 0.0 {
            Upwind::Left
        } else {
            Upwind::Right
        }
    } else if vx_i > 0.0 {
        Upwind::Left
    } else if vx_ip1 < 0.0 {
        Upwind::Right
    } else {
        Upwind::Zero
    }
}

pub fn g_hat(g_i: f64, g_ip1: f64, vx_i: f64, vx_ip1: f64) -> f64 {
    match g_hat_branch(g_i, g_ip1, vx_i, vx_ip1) {
        Upwind::Left => g_i,
        Upwind::Right => g_ip1,
        Upwind::Zero => 0.0,
    }
}

/// Cell values entering the source term `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMacro {
    pub j: f64,
    pub r: f64,
    pub vx: f64,
    pub t4: f64,
    pub k_q: f64,
    pub sigma_a: f64,
    pub sigma_s: f64,
}

impl CellMacro {
    /// Split of `G(n)` into `g0 + g1 * Q(n)`.
    #[inline]
    pub fn g_parts(&self, n: f64, cc: f64) -> (f64, f64) {
        let (sa, ss, v) = (self.sigma_a, self.sigma_s, self.vx);
        let st = sa + ss;
        let g0 = 3.0 * sa * n * v * (self.t4 / (4.0 * PI) - self.j) + n * v * st * (4.0 * self.j + n * self.r)
            - (2.0 / 3.0) * ss * v * self.r
            - (sa - ss) * v * v / cc * (4.0 / 3.0 * self.j + self.k_q);
        (g0, n * v * st)
    }

    #[inline]
    pub fn g(&self, n: f64, q: f64, cc: f64) -> f64 {
        let (g0, g1) = self.g_parts(n, cc);
        g0 + g1 * q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceData {
    pub j_half: f64,
    pub t4_half: f64,
    pub dj_plus: f64,
    pub dj_minus: f64,
    pub dt4_plus: f64,
    pub dt4_minus: f64,
    pub sigma_a_half: f64,
    pub sigma_s_half: f64,
    pub vx_half: f64,
    pub k_q_half: f64,
    pub curly_c: f64,
    pub g_hat: f64,
}

impl InterfaceData {
    /// Interior interface between two cells with arithmetic-mean
    /// reconstruction. `g_hat` is left at zero.
    pub fn between(l: &CellMacro, r: &CellMacro, sigma_a_half: f64, sigma_s_half: f64, dx: f64, cc: f64) -> Self {
        let j_half = 0.5 * (l.j + r.j);
        let t4_half = 0.5 * (l.t4 + r.t4);
        let dj = (j_half - l.j) / (0.5 * dx);
        let dt4 = (t4_half - l.t4) / (0.5 * dx);
        let dj_m = (r.j - j_half) / (0.5 * dx);
        let dt4_m = (r.t4 - t4_half) / (0.5 * dx);
        InterfaceData {
            j_half,
            t4_half,
            dj_plus: dj,
            dj_minus: dj_m,
            dt4_plus: dt4,
            dt4_minus: dt4_m,
            sigma_a_half,
            sigma_s_half,
            vx_half: 0.5 * (l.vx + r.vx),
            k_q_half: 0.5 * (l.k_q + r.k_q),
            curly_c: cc,
            g_hat: 0.0,
        }
    }
}

/// `int n G dn` at an interface.
#[inline]
pub(crate) fn source_bracket0<T: Scalar>(sa: f64, ss: f64, v: T, j: T, t4: T, k_q: f64) -> T {
    v * (t4 / (4.0 * PI) - j) * (2.0 * sa) + v * (j * (8.0 / 3.0) + 2.0 * k_q) * (sa + ss)
}

/// `int n^2 G dn` at an interface.
#[inline]
pub(crate) fn source_bracket1<T: Scalar>(sa: f64, ss: f64, v: T, j: T, r: T, k_q: f64, q3: f64, cc: f64) -> T {
    v * (r * 0.4 + 2.0 * q3) * (sa + ss)
        - v * r * (4.0 / 9.0 * ss)
        - v * v * (j * (4.0 / 3.0) + k_q) * (2.0 / 3.0 * (sa - ss) / cc)
}

/// Free-transport part `int_{n>0} n^(k+1) I_L + int_{n<0} n^(k+1) I_R` for k = 0, 1.
#[inline]
pub(crate) fn upwind_integrals(i_left: &[f64], i_right: &[f64], quad: &Quadrature) -> (f64, f64) {
    let z = 2.0 * (quad.positive_half(1, |m| i_left[m]) + quad.negative_half(1, |m| i_right[m]));
    let w = 2.0 * (quad.positive_half(2, |m| i_left[m]) + quad.negative_half(2, |m| i_right[m]));
    (z, w)
}

/// `int_{-1}^{1} zeta dn` at an interface.
pub fn flux_moment0(iface: &InterfaceData, c: &UgksCoeffs, i_left: &[f64], i_right: &[f64], quad: &Quadrature) -> f64 {
    let a0 = 2.0 * (quad.positive_half(1, |m| i_left[m]) + quad.negative_half(1, |m| i_right[m]));
    c.a * a0
        + c.d1 / 3.0 * (iface.dj_plus + iface.dj_minus)
        + c.d2 / (12.0 * PI) * (iface.dt4_plus + iface.dt4_minus)
        + c.f
            * source_bracket0(
                iface.sigma_a_half,
                iface.sigma_s_half,
                iface.vx_half,
                iface.j_half,
                iface.t4_half,
                iface.k_q_half,
            )
}

/// `int_{-1}^{1} n zeta dn` at an interface.
pub fn flux_moment1(
    iface: &InterfaceData,
    c: &UgksCoeffs,
    i_left: &[f64],
    i_right: &[f64],
    r_half: f64,
    q3_half: f64,
    quad: &Quadrature,
) -> f64 {
    let a1 = 2.0 * (quad.positive_half(2, |m| i_left[m]) + quad.negative_half(2, |m| i_right[m]));
    c.a * a1
        + 2.0 * c.c1 / 3.0 * iface.j_half
        + c.c2 / (6.0 * PI) * iface.t4_half
        + c.d1 / 4.0 * (iface.dj_plus - iface.dj_minus)
        + c.d2 / (16.0 * PI) * (iface.dt4_plus - iface.dt4_minus)
        + c.f
            * source_bracket1(
                iface.sigma_a_half,
                iface.sigma_s_half,
                iface.vx_half,
                iface.j_half,
                r_half,
                iface.k_q_half,
                q3_half,
                iface.curly_c,
            )
}

/// Micro flux of one ordinate. `i_up` is the upwind intensity and `g` the
/// source value used for this ordinate.
#[inline]
pub fn micro_flux(n: f64, iface: &InterfaceData, c: &UgksCoeffs, i_up: f64, g: f64) -> f64 {
    let (dj, dt4) = if n > 0.0 { (iface.dj_plus, iface.dt4_plus) } else { (iface.dj_minus, iface.dt4_minus) };
    c.a * n * i_up
        + c.c1 * n * iface.j_half
        + c.c2 / (4.0 * PI) * n * iface.t4_half
        + c.f * n * g
        + c.d1 * n * n * dj
        + c.d2 / (4.0 * PI) * n * n * dt4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Whether ordinate `n` enters the domain through this side.
    #[inline]
    pub fn incoming(self, n: f64) -> bool {
        match self {
            Side::Left => n > 0.0,
            Side::Right => n < 0.0,
        }
    }

    /// Orientation of the one-sided slope: interior minus wall on the left.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Wall data of one boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    /// Prescribed intensity per ordinate, only read on incoming ordinates.
    pub inflow: Vec<f64>,
    /// Material temperature at the wall.
    pub temperature: f64,
}

impl BoundaryData {
    pub fn isotropic(value: f64, temperature: f64, quad: &Quadrature) -> Self {
        BoundaryData { inflow: vec![value; quad.order], temperature }
    }

    /// `<b>` over all ordinates.
    pub fn mean(&self, quad: &Quadrature) -> f64 {
        quad.moment_unchecked(&self.inflow, 0)
    }

    pub(crate) fn validate(&self, quad: &Quadrature) -> Result<()> {
        if self.inflow.len() != quad.order {
            return Err(Error::config(format!(
                "boundary inflow has {} ordinates, quadrature has {}",
                self.inflow.len(),
                quad.order
            )));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::config(format!(
                "boundary temperature must be positive and finite, got {}",
                self.temperature
            )));
        }
        if self.inflow.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("boundary inflow must be finite"));
        }
        Ok(())
    }
}

/// Micro flux through a boundary face for ordinate `m`. `j_cell`, `t4_cell`
/// are the adjacent cell's values; `i_up` and `g` the outgoing intensity and
/// source value. The reference `<b>` is subtracted inside every term so an
/// equilibrium wall produces exactly opposite in- and outgoing fluxes.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn boundary_micro_flux(
    side: Side,
    m: usize,
    wall: &BoundaryData,
    b_mean: f64,
    j_cell: f64,
    t4_cell: f64,
    i_up: f64,
    g: f64,
    c: &UgksCoeffs,
    quad: &Quadrature,
    dx: f64,
    cc: f64,
) -> f64 {
    let n = quad.nodes[m];
    if side.incoming(n) {
        return cc * n * wall.inflow[m];
    }
    let tw4 = wall.temperature.powi(4);
    let s = side.sign();
    let dj = s * (j_cell - b_mean) / dx;
    let dt4 = s * (t4_cell - tw4) / dx;
    let t4_half = 0.5 * (tw4 + t4_cell);
    cc * n * b_mean
        + c.a * n * (i_up - b_mean)
        + c.c1 * n * (0.5 * (j_cell - b_mean))
        + c.c2 * n * (t4_half / (4.0 * PI) - b_mean)
        + c.f * n * g
        + c.d1 * n * n * dj
        + c.d2 / (4.0 * PI) * n * n * dt4
}

/// Adjacent-cell data for a boundary face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCell {
    pub cell: CellMacro,
    /// Lagged intensity used in the free-transport term.
    pub intensity: Vec<f64>,
    /// Lagged residual `Q` used inside `G`.
    pub q: Vec<f64>,
}

/// Zeroth and first moments of the boundary flux by quadrature of
/// [`boundary_micro_flux`].
pub fn boundary_flux_moments(
    side: Side,
    wall: &BoundaryData,
    cell: &BoundaryCell,
    c: &UgksCoeffs,
    quad: &Quadrature,
    dx: f64,
    cc: f64,
) -> Result<(f64, f64)> {
    wall.validate(quad)?;
    if cell.intensity.len() != quad.order || cell.q.len() != quad.order {
        return Err(Error::invalid("boundary cell data does not match the quadrature"));
    }
    let b_mean = wall.mean(quad);
    let zeta: Vec<f64> = (0..quad.order)
        .map(|m| {
            let n = quad.nodes[m];
            let g = cell.cell.g(n, cell.q[m], cc);
            boundary_micro_flux(side, m, wall, b_mean, cell.cell.j, cell.cell.t4, cell.intensity[m], g, c, quad, dx, cc)
        })
        .collect();
    Ok((2.0 * quad.moment_unchecked(&zeta, 0), 2.0 * quad.moment_unchecked(&zeta, 1)))
}

/// Lagged pieces of a boundary face that do not depend on the new cell
/// values, so the boundary moments become cheap closed forms in `(J, R, v, T)`.
/// The outgoing intensity is `J + n R + Q` with new `J, R` and lagged `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BoundaryClosure {
    pub sign: f64,
    pub b_mean: f64,
    pub tw4: f64,
    /// Constant parts of the two moments (inflow, reference and lagged `Q` transport).
    pub z0: f64,
    pub w0: f64,
    /// `int_out n^k dn` for k = 1..=4.
    pub h: [f64; 4],
    /// `int_out n^2 Q`, `int_out n^3 Q`.
    pub sq2: f64,
    pub sq3: f64,
    pub k_q: f64,
    pub sigma_a: f64,
    pub sigma_s: f64,
    pub coeffs: UgksCoeffs,
    pub dx: f64,
    pub cc: f64,
}

impl BoundaryClosure {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        side: Side,
        wall: &BoundaryData,
        q: &[f64],
        k_q: f64,
        sigma_a: f64,
        sigma_s: f64,
        coeffs: UgksCoeffs,
        quad: &Quadrature,
        dx: f64,
        cc: f64,
    ) -> Self {
        let b_mean = wall.mean(quad);
        let out = |k: usize, f: &dyn Fn(usize) -> f64| match side {
            Side::Left => 2.0 * quad.negative_half(k, f),
            Side::Right => 2.0 * quad.positive_half(k, f),
        };
        let inn = |k: usize, f: &dyn Fn(usize) -> f64| match side {
            Side::Left => 2.0 * quad.positive_half(k, f),
            Side::Right => 2.0 * quad.negative_half(k, f),
        };
        let z0 = inn(1, &|m| cc * wall.inflow[m]) + out(1, &|_| cc * b_mean) + coeffs.a * out(1, &|m| q[m] - b_mean);
        let w0 = inn(2, &|m| cc * wall.inflow[m]) + out(2, &|_| cc * b_mean) + coeffs.a * out(2, &|m| q[m] - b_mean);
        let h4: f64 = (0..quad.order)
            .filter(|&m| !side.incoming(quad.nodes[m]) && quad.nodes[m] != 0.0)
            .map(|m| quad.weights[m] * quad.nodes[m].powi(4))
            .sum();
        BoundaryClosure {
            sign: side.sign(),
            b_mean,
            tw4: wall.temperature.powi(4),
            z0,
            w0,
            h: [out(0, &|m| quad.nodes[m]), out(1, &|m| quad.nodes[m]), out(2, &|m| quad.nodes[m]), h4],
            sq2: out(2, &|m| q[m]),
            sq3: out(3, &|m| q[m]),
            k_q,
            sigma_a,
            sigma_s,
            coeffs,
            dx,
            cc,
        }
    }

    /// `(Z, W)` as functions of the adjacent cell's new `(J, R, v, T)`.
    #[inline]
    pub fn moments<T: Scalar>(&self, j: T, r: T, v: T, t: T) -> (T, T) {
        let c = &self.coeffs;
        let [h1, h2, h3, h4] = self.h;
        let (sa, ss) = (self.sigma_a, self.sigma_s);
        let t4 = t.pow4();
        let t4_half = (t4 + self.tw4) * 0.5;
        let dj = (j - self.b_mean) * (self.sign / self.dx);
        let dt4 = (t4 - self.tw4) * (self.sign / self.dx);
        let central = (j - self.b_mean) * (0.5 * c.c1) + (t4_half / (4.0 * PI) - self.b_mean) * c.c2;
        let slope = dj * c.d1 + dt4 * (c.d2 / (4.0 * PI));
        let e = t4 / (4.0 * PI) - j;
        let iso = v * r * (2.0 / 3.0 * ss) + v * v * (j * (4.0 / 3.0) + self.k_q) * ((sa - ss) / self.cc);
        let gz = v * e * (3.0 * sa * h2) + v * (j * (4.0 * h2) + r * h3 + self.sq2) * (sa + ss) - iso * h1;
        let gw = v * e * (3.0 * sa * h3) + v * (j * (4.0 * h3) + r * h4 + self.sq3) * (sa + ss) - iso * h2;
        let z = central * h1 + gz * c.f + slope * h2 + (j * h1 + r * h2) * c.a + self.z0;
        let w = central * h2 + gw * c.f + slope * h3 + (j * h2 + r * h3) * c.a + self.w0;
        (z, w)
    }
}
