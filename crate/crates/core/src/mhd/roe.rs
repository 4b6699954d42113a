//! Roe linearization for 1D adiabatic MHD. Velocities and enthalpy use the
//! usual sqrt(rho) weights, the transverse field the swapped weights, and
//! `1/2 d(B^2)` picks up the correction `X d(rho)`; with that pairing the
//! matrix satisfies `A (U_R - U_L) = F(U_R) - F(U_L)` for any gamma.
//! Eigenvectors follow the Roe–Balsara normalization so they stay
//! independent at the degenerate points (B_t -> 0, c_f -> c_s).

use super::{physical_flux, primitive_to_conserved, FluidModel, FluidState};
use crate::error::Result;
use crate::linalg::{Lu, Mat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoeFlux {
    pub flux: [f64; 7],
    /// The Roe average was unusable and the Lax–Friedrichs flux was returned.
    pub fallback: bool,
}

/// Fast magnetosonic speed of a single state.
pub fn fast_speed(w: &FluidState, m: &FluidModel) -> f64 {
    let asq = m.gamma * w.p / w.rho;
    let casq = m.bx * m.bx / w.rho;
    let ctsq = (w.by * w.by + w.bz * w.bz) / w.rho;
    let tsum = asq + casq + ctsq;
    let disc = (tsum * tsum - 4.0 * asq * casq).max(0.0);
    (0.5 * (tsum + disc.sqrt())).sqrt()
}

pub fn lax_friedrichs_flux(wl: &FluidState, wr: &FluidState, m: &FluidModel) -> [f64; 7] {
    let fl = physical_flux(wl, m);
    let fr = physical_flux(wr, m);
    let ul = primitive_to_conserved(wl, m);
    let ur = primitive_to_conserved(wr, m);
    let s = (wl.vx.abs() + fast_speed(wl, m)).max(wr.vx.abs() + fast_speed(wr, m));
    std::array::from_fn(|k| 0.5 * (fl[k] + fr[k]) - 0.5 * s * (ur[k] - ul[k]))
}

pub(crate) struct RoeEigen {
    pub lambda: [f64; 7],
    /// Right eigenvectors as columns.
    pub right: Mat<7>,
    pub cf: f64,
}

/// Eigen-decomposition of the Roe matrix between two states; `None` when the
/// averaged sound speed is not real.
pub(crate) fn roe_eigensystem(wl: &FluidState, wr: &FluidState, m: &FluidModel) -> Option<RoeEigen> {
    let g1 = m.gamma - 1.0;
    let g2 = m.gamma - 2.0;
    let sl = wl.rho.sqrt();
    let sr = wr.rho.sqrt();
    let isum = 1.0 / (sl + sr);

    let d = sl * sr;
    let v1 = (sl * wl.vx + sr * wr.vx) * isum;
    let v2 = (sl * wl.vy + sr * wr.vy) * isum;
    let v3 = (sl * wl.vz + sr * wr.vz) * isum;
    let hl = (wl.total_energy(m) + wl.total_pressure(m)) / wl.rho;
    let hr = (wr.total_energy(m) + wr.total_pressure(m)) / wr.rho;
    let h = (sl * hl + sr * hr) * isum;
    // Field weights are swapped relative to the velocity average.
    let b2 = (sr * wl.by + sl * wr.by) * isum;
    let b3 = (sr * wl.bz + sl * wr.bz) * isum;
    let b1 = m.bx;
    // Jump correction from writing 1/2 d(B^2) with the swapped average.
    let x = 0.5 * ((wl.by - wr.by).powi(2) + (wl.bz - wr.bz).powi(2)) * isum * isum;

    let di = 1.0 / d;
    let vsq = v1 * v1 + v2 * v2 + v3 * v3;
    let btsq = b2 * b2 + b3 * b3;
    let vaxsq = b1 * b1 * di;
    let hp = h - (vaxsq + btsq * di);
    let twid_asq = g1 * (hp - 0.5 * vsq) - g2 * x;
    if !(twid_asq > 0.0) || !twid_asq.is_finite() {
        return None;
    }

    let ct2 = btsq * di;
    let tsum = vaxsq + ct2 + twid_asq;
    let tdif = vaxsq + ct2 - twid_asq;
    let cf2_cs2 = (tdif * tdif + 4.0 * twid_asq * ct2).sqrt();
    let cfsq = 0.5 * (tsum + cf2_cs2);
    let cf = cfsq.sqrt();
    let cssq = twid_asq * vaxsq / cfsq;
    let cs = cssq.sqrt();

    let bt = btsq.sqrt();
    let (bet2, bet3) = if bt == 0.0 { (1.0, 0.0) } else { (b2 / bt, b3 / bt) };
    let vbet = v2 * bet2 + v3 * bet3;

    let (alpha_f, alpha_s) = if cfsq - cssq == 0.0 {
        (1.0, 0.0)
    } else if twid_asq - cssq <= 0.0 {
        (0.0, 1.0)
    } else if cfsq - twid_asq <= 0.0 {
        (1.0, 0.0)
    } else {
        (((twid_asq - cssq) / (cfsq - cssq)).sqrt(), ((cfsq - twid_asq) / (cfsq - cssq)).sqrt())
    };

    let sqrtd = d.sqrt();
    let isqrtd = 1.0 / sqrtd;
    let s = if b1 >= 0.0 { 1.0 } else { -1.0 };
    let twid_a = twid_asq.sqrt();
    let qf = cf * alpha_f * s;
    let qs = cs * alpha_s * s;
    let af_prime = alpha_f * twid_a * isqrtd;
    let as_prime = alpha_s * twid_a * isqrtd;
    let afpbb = af_prime * bt;
    let aspbb = as_prime * bt;

    let vax = vaxsq.sqrt();
    let lambda = [v1 - cf, v1 - vax, v1 - cs, v1, v1 + cs, v1 + vax, v1 + cf];

    let mut r = [[0.0; 7]; 7];
    r[0] = [alpha_f, 0.0, alpha_s, 1.0, alpha_s, 0.0, alpha_f];
    r[1] = [alpha_f * lambda[0], 0.0, alpha_s * lambda[2], v1, alpha_s * lambda[4], 0.0, alpha_f * lambda[6]];
    let (qa, qb, qc, qd) = (alpha_f * v2, alpha_s * v2, qs * bet2, qf * bet2);
    r[2] = [qa + qc, -bet3, qb - qd, v2, qb + qd, bet3, qa - qc];
    let (qa, qb, qc, qd) = (alpha_f * v3, alpha_s * v3, qs * bet3, qf * bet3);
    r[3] = [qa + qc, bet2, qb - qd, v3, qb + qd, -bet2, qa - qc];
    let alfven_e = -(v2 * bet3 - v3 * bet2);
    r[4] = [
        alpha_f * (hp - v1 * cf) + qs * vbet + aspbb,
        alfven_e,
        alpha_s * (hp - v1 * cs) - qf * vbet - afpbb,
        0.5 * vsq + g2 * x / g1,
        alpha_s * (hp + v1 * cs) + qf * vbet - afpbb,
        -alfven_e,
        alpha_f * (hp + v1 * cf) - qs * vbet + aspbb,
    ];
    let a5 = -bet3 * s * isqrtd;
    r[5] = [as_prime * bet2, a5, -af_prime * bet2, 0.0, -af_prime * bet2, a5, as_prime * bet2];
    let a6 = bet2 * s * isqrtd;
    r[6] = [as_prime * bet3, a6, -af_prime * bet3, 0.0, -af_prime * bet3, a6, as_prime * bet3];
    Some(RoeEigen { lambda, right: r, cf })
}

/// Roe flux between two primitive states, with a Harten entropy fix
/// (`delta = 0.1 c_f`) on the fast and slow families.
pub fn roe_flux_states(wl: &FluidState, wr: &FluidState, m: &FluidModel) -> RoeFlux {
    let fl = physical_flux(wl, m);
    let fr = physical_flux(wr, m);
    let ul = primitive_to_conserved(wl, m);
    let ur = primitive_to_conserved(wr, m);
    let du: [f64; 7] = std::array::from_fn(|k| ur[k] - ul[k]);

    let fallback = || RoeFlux { flux: lax_friedrichs_flux(wl, wr, m), fallback: true };
    let Some(eig) = roe_eigensystem(wl, wr, m) else {
        return fallback();
    };
    let Some(lu) = Lu::new(&eig.right) else {
        return fallback();
    };
    let alpha = lu.solve(&du);
    let delta = 0.1 * eig.cf;
    let mut flux: [f64; 7] = std::array::from_fn(|k| 0.5 * (fl[k] + fr[k]));
    for w in 0..7 {
        let mut a = eig.lambda[w].abs();
        if w % 2 == 0 && w != 3 && a < delta {
            a = 0.5 * (a * a + delta * delta) / delta;
        }
        let coef = 0.5 * a * alpha[w];
        for k in 0..7 {
            flux[k] -= coef * eig.right[k][w];
        }
    }
    if flux.iter().any(|v| !v.is_finite()) {
        return fallback();
    }
    RoeFlux { flux, fallback: false }
}

/// Roe flux between two conserved states.
pub fn roe_flux(ul: &super::ConservedVector, ur: &super::ConservedVector, m: &FluidModel) -> Result<RoeFlux> {
    let wl = super::conserved_to_primitive(ul, m, 0)?;
    let wr = super::conserved_to_primitive(ur, m, 1)?;
    Ok(roe_flux_states(&wl, &wr, m))
}
