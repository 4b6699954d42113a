//! Nondimensional parameter set and the regime scalings.

use crate::error::{Error, Result};

/// Which asymptotic scaling the opacities follow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Large scattering, weak absorption: `La = eps`, `Ls = 1/eps`.
    NonEquilibrium,
    /// Large absorption, weak scattering: `La = 1/eps`, `Ls = eps`.
    Equilibrium,
    /// Scalings given directly.
    UnitScaled { la: f64, ls: f64, curly_c: f64 },
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::NonEquilibrium => "noneq",
            Regime::Equilibrium => "eq",
            Regime::UnitScaled { .. } => "unit",
        }
    }
}

/// Returns `(La, Ls, curly_c)` for a regime.
pub fn derive_regime(regime: Regime, eps: f64, c: f64) -> Result<(f64, f64, f64)> {
    match regime {
        Regime::UnitScaled { la, ls, curly_c } => {
            if !(la >= 0.0 && ls >= 0.0 && curly_c > 0.0) {
                return Err(Error::invalid(format!(
                    "unit-scaled regime needs La, Ls >= 0 and curly_c > 0 (got {la}, {ls}, {curly_c})"
                )));
            }
            Ok((la, ls, curly_c))
        }
        _ => {
            if !(eps > 0.0 && c > 0.0) || !eps.is_finite() || !c.is_finite() {
                return Err(Error::invalid(format!("eps and c must be positive (got eps={eps}, c={c})")));
            }
            let curly_c = c / eps;
            if regime == Regime::NonEquilibrium {
                Ok((eps, 1.0 / eps, curly_c))
            } else {
                Ok((1.0 / eps, eps, curly_c))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondimParams {
    /// Scaled light speed.
    pub curly_c: f64,
    /// Radiation-flow coupling.
    pub p0: f64,
    pub la: f64,
    pub ls: f64,
    pub eps: f64,
    /// Reduced light speed, `curly_c * eps`.
    pub c: f64,
    pub gamma: f64,
    pub r_ideal: f64,
    /// Internal-energy coefficient `R / (gamma - 1)`.
    pub a_coeff: f64,
}

impl NondimParams {
    pub fn new(regime: Regime, eps: f64, c: f64, p0: f64, gamma: f64, r_ideal: f64) -> Result<Self> {
        let (la, ls, curly_c) = derive_regime(regime, eps, c)?;
        let (eps, c) = match regime {
            Regime::UnitScaled { .. } => (1.0, curly_c),
            _ => (eps, c),
        };
        if eps > 1.0 {
            return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
        }
        if !(gamma > 1.0) || !(r_ideal > 0.0) {
            return Err(Error::invalid(format!("need gamma > 1 and R > 0 (got gamma={gamma}, R={r_ideal})")));
        }
        if !(p0 >= 0.0) || !p0.is_finite() {
            return Err(Error::invalid(format!("P0 must be finite and >= 0, got {p0}")));
        }
        Ok(NondimParams { curly_c, p0, la, ls, eps, c, gamma, r_ideal, a_coeff: r_ideal / (gamma - 1.0) })
    }
}
