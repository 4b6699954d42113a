//! Exponential-integral flux coefficients.
//!
//! With `x = mu dt` every coefficient is a scaled copy of one of
//!   phi(x) = (1 - e^-x) / x
//!   psi(x) = (1 - phi(x)) / x
//!   chi(x) = (1 + e^-x - 2 (1 - e^-x) / x) / x^2
//! All three suffer cancellation for small `x`: below 1e-4 a four-term Taylor
//! expansion is used, on [1e-4, 1) the full power series, and the closed
//! form only from x = 1 where it is well conditioned.

use crate::error::{Error, Result};
use crate::params::NondimParams;

pub const TAYLOR_THRESHOLD: f64 = 1e-4;
const SERIES_LIMIT: f64 = 1.0;
const SERIES_TERMS: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UgksCoeffs {
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub f: f64,
    pub mu: f64,
}

/// `(phi, psi, chi)` at `x >= 0`.
pub(crate) fn kernels(x: f64) -> (f64, f64, f64) {
    if x < TAYLOR_THRESHOLD {
        let phi = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
        let psi = 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
        let chi = 1.0 / 6.0 - x / 12.0 + x * x / 40.0 - x * x * x / 180.0;
        (phi, psi, chi)
    } else if x < SERIES_LIMIT {
        // phi = sum (-x)^k/(k+1)!, psi = sum (-x)^k/(k+2)!, chi = sum (-x)^k (k+1)/(k+3)!
        let mut phi = 0.0;
        let mut psi = 0.0;
        let mut chi = 0.0;
        let mut pow = 1.0; // (-x)^k
        let mut fact = 1.0; // (k+1)!
        for k in 0..SERIES_TERMS {
            let kf = k as f64;
            let f1 = fact;
            let f2 = f1 * (kf + 2.0);
            let f3 = f2 * (kf + 3.0);
            phi += pow / f1;
            psi += pow / f2;
            chi += pow * (kf + 1.0) / f3;
            pow *= -x;
            fact = f2;
        }
        (phi, psi, chi)
    } else {
        let e = (-x).exp();
        let om = -(-x).exp_m1();
        let phi = om / x;
        let psi = (1.0 - phi) / x;
        let chi = (1.0 + e - 2.0 * phi) / (x * x);
        (phi, psi, chi)
    }
}

/// Coefficients for raw opacities `sigma_a`, `sigma_s` (the regime scalings are applied here).
pub fn ugks_coefficients(dt: f64, sigma_a: f64, sigma_s: f64, p: &NondimParams) -> Result<UgksCoeffs> {
    coefficients_scaled(dt, p.la * sigma_a, p.ls * sigma_s, p.curly_c)
}

/// Coefficients from already scaled opacities `sa = La sigma_a`, `ss = Ls sigma_s`.
pub fn coefficients_scaled(dt: f64, sa: f64, ss: f64, cc: f64) -> Result<UgksCoeffs> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(sa >= 0.0 && ss >= 0.0) {
        return Err(Error::invalid(format!("opacities must be non-negative (got {sa}, {ss})")));
    }
    let mu = cc * (sa + ss);
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("decay rate mu must be positive, got {mu}")));
    }
    let x = mu * dt;
    let (phi, psi, chi) = kernels(x);
    let c2dt = cc * cc * dt;
    let c3dt2 = cc * cc * cc * dt * dt;
    Ok(UgksCoeffs {
        a: cc * phi,
        c1: c2dt * ss * psi,
        c2: c2dt * sa * psi,
        d1: -c3dt2 * ss * chi,
        d2: -c3dt2 * sa * chi,
        f: cc * dt * psi,
        mu,
    })
}
