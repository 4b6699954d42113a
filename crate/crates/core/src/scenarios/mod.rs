//! Scenario registry, the flat `key = value` config format, and construction
//! of initial and boundary data.

mod config;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::coupled::equilibrium_j;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::mhd::FluidModel;
use crate::mhd::FluidState;
use crate::opacity::Opacity;
use crate::params::{NondimParams, Regime};

pub use config::{parse_config, to_config};

pub const PRESETS: [&str; 6] =
    ["brio-wu", "opaque-blob", "radshock-m1.2", "radshock-m2", "stiff-cases", "multiscale-sigma"];

/// Which solver advances the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Coupled,
    Frozen,
    NoneqLimit,
    EqLimit,
    Explicit,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Coupled => "coupled",
            RunMode::Frozen => "frozen",
            RunMode::NoneqLimit => "noneq-limit",
            RunMode::EqLimit => "eq-limit",
            RunMode::Explicit => "explicit",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "coupled" => RunMode::Coupled,
            "frozen" => RunMode::Frozen,
            "noneq-limit" => RunMode::NoneqLimit,
            "eq-limit" => RunMode::EqLimit,
            "explicit" => RunMode::Explicit,
            _ => {
                return Err(Error::config(format!(
                    "unknown mode '{s}' (expected coupled, frozen, noneq-limit, eq-limit or explicit)"
                )))
            }
        })
    }
}

/// Time step rule. `Cfl(k)` means `dt = k dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Cfl(f64),
    Fixed(f64),
    /// `dt = dx / speed` with a dimensional speed (dimensional scenarios only).
    Speed(f64),
}

/// Reference values turning dimensional input (lengths, seconds, opacities
/// per length) into the nondimensional parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub light_speed: f64,
    pub radiation_constant: f64,
    pub length: f64,
    pub speed: f64,
    pub temperature: f64,
    /// `rho_ref a_ref^2`
    pub pressure: f64,
}

impl Units {
    pub fn curly_c(&self) -> f64 {
        self.light_speed / self.speed
    }

    pub fn p0(&self) -> f64 {
        self.radiation_constant * self.temperature.powi(4) / self.pressure
    }

    pub fn time(&self) -> f64 {
        self.length / self.speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// Nondimensional input; `eps` and `c` are ignored for unit-scaled regimes.
    Nondimensional {
        regime: Regime,
        eps: f64,
        c: f64,
        p0: f64,
    },
    Dimensional(Units),
}

/// Whether the seventh entry of a Riemann state is pressure or temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thermo {
    Pressure,
    Temperature,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Two constant states split at `x0`; `(rho, vx, vy, vz, By, Bz, p or T)`.
    /// Radiation temperatures default to the material temperature.
    Riemann { x0: f64, thermo: Thermo, left: [f64; 7], right: [f64; 7], left_tr: Option<f64>, right_tr: Option<f64> },
    /// `rho = base + amp [tanh(1 - k x) + tanh(1 + k x)]` moving at `vx`,
    /// constant pressure, no field, radiation in equilibrium.
    Blob { base: f64, amp: f64, k: f64, pressure: f64, vx: f64 },
}

/// Wall overrides; `None` takes the adjacent initial cell's value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WallSpec {
    /// Material temperature at the wall.
    pub temperature: Option<f64>,
    /// Temperature of the isotropic inflow `T_r^4 / 4 pi`.
    pub radiation_temperature: Option<f64>,
}

/// A scenario as written: dimensional entries stay dimensional until
/// [`ScenarioSpec::resolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub domain: (f64, f64),
    pub scaling: Scaling,
    pub gamma: f64,
    pub r_ideal: f64,
    pub bx: f64,
    pub sigma_a: Opacity,
    pub sigma_s: Opacity,
    pub initial: InitialData,
    pub walls: [WallSpec; 2],
    pub mode: RunMode,
    pub t_end: f64,
    pub step: StepRule,
    pub ordinates: usize,
    /// Stop early once the relative change rate stays below this (0 = off).
    pub steady_tol: f64,
}

/// A spec in solver units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub params: NondimParams,
    pub model: FluidModel,
    pub domain: (f64, f64),
    pub t_end: f64,
    /// `Cfl` or `Fixed`, nondimensional.
    pub step: StepRule,
    pub sigma_a: Opacity,
    pub sigma_s: Opacity,
}

/// Initial fluid and radiation on a mesh, plus wall data.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialFields {
    pub fluid: Vec<FluidState>,
    /// Initial radiation temperature per cell.
    pub radiation_t: Vec<f64>,
    /// `(material T, radiation T)` at the left and right walls.
    pub walls: [(f64, f64); 2],
}

fn riemann(x0: f64, thermo: Thermo, left: [f64; 7], right: [f64; 7], trs: Option<(f64, f64)>) -> InitialData {
    InitialData::Riemann { x0, thermo, left, right, left_tr: trs.map(|t| t.0), right_tr: trs.map(|t| t.1) }
}

fn brio_wu_data() -> InitialData {
    riemann(0.0, Thermo::Pressure, [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0], [0.125, 0.0, 0.0, 0.0, -1.0, 0.0, 0.1], None)
}

fn radshock(name: &str, left: [f64; 7], right: [f64; 7]) -> ScenarioSpec {
    ScenarioSpec {
        name: name.into(),
        domain: (-0.02, 0.02),
        scaling: Scaling::Nondimensional { regime: Regime::NonEquilibrium, eps: 1.0, c: 3e6, p0: 1e-4 },
        gamma: 5.0 / 3.0,
        // upstream sound speed 1 at T = 1, so the upstream speed is the Mach number
        r_ideal: 0.6,
        bx: 0.0,
        sigma_a: Opacity::Constant(1.0 / 3.0),
        sigma_s: Opacity::Constant(1e6),
        initial: riemann(0.0, Thermo::Temperature, left, right, Some((left[6], right[6]))),
        walls: [WallSpec::default(); 2],
        mode: RunMode::Coupled,
        t_end: 0.04,
        step: StepRule::Cfl(0.2),
        ordinates: crate::quadrature::DEFAULT_ORDER,
        steady_tol: 0.0,
    }
}

/// Reference values for the dimensional examples: lengths in cm, times in s,
/// `C = 3e10 cm/s`, `a_r = 1e-4` with unit reference temperature and
/// pressure, so `P0 = 1e-4`.
fn cgs_units(speed: f64) -> Units {
    Units { light_speed: 3e10, radiation_constant: 1e-4, length: 1.0, speed, temperature: 1.0, pressure: 1.0 }
}

pub fn preset(name: &str) -> Result<ScenarioSpec> {
    let base = ScenarioSpec {
        name: name.into(),
        domain: (-1.0, 1.0),
        scaling: Scaling::Nondimensional { regime: Regime::NonEquilibrium, eps: 1e-5, c: 0.1, p0: 0.0 },
        gamma: 2.0,
        r_ideal: 1.0,
        bx: 0.75,
        sigma_a: Opacity::Constant(1.0 / 3.0),
        sigma_s: Opacity::Constant(1.0 / 3.0),
        initial: brio_wu_data(),
        walls: [WallSpec::default(); 2],
        mode: RunMode::Coupled,
        t_end: 0.2,
        step: StepRule::Cfl(0.2),
        ordinates: crate::quadrature::DEFAULT_ORDER,
        steady_tol: 0.0,
    };
    let spec = match name {
        "brio-wu" => base,
        "opaque-blob" => ScenarioSpec {
            domain: (-0.4, 0.4),
            scaling: Scaling::Nondimensional {
                regime: Regime::UnitScaled { la: 1.0, ls: 1.0, curly_c: 5000.0 },
                eps: 1.0,
                c: 5000.0,
                p0: 0.0,
            },
            gamma: 5.0 / 3.0,
            bx: 0.0,
            sigma_a: Opacity::PowerLaw { coeff: 1.0, rho_exp: 2.0, t_exp: -3.5 },
            sigma_s: Opacity::Constant(0.0),
            initial: InitialData::Blob { base: 1.0, amp: 5.5, k: 17.0, pressure: 1.0, vx: 0.0 },
            walls: [WallSpec { temperature: None, radiation_temperature: Some(6.0) }, WallSpec::default()],
            mode: RunMode::Frozen,
            t_end: 10.0,
            step: StepRule::Cfl(0.01),
            steady_tol: 1e-6,
            ..base
        },
        "radshock-m1.2" => {
            radshock(name, [1.0, 1.2, 0.0, 0.0, 0.0, 0.0, 1.0], [1.298088, 0.9244363, 0.0, 0.0, 0.0, 0.0, 1.194888])
        }
        "radshock-m2" => {
            radshock(name, [1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0], [2.287066, 0.874482876, 0.0, 0.0, 0.0, 0.0, 2.077223])
        }
        // case 1; the other cases only change the two opacities
        "stiff-cases" => ScenarioSpec {
            scaling: Scaling::Dimensional(cgs_units(6e3)),
            sigma_a: Opacity::Constant(1.0),
            sigma_s: Opacity::Constant(1.0),
            t_end: 0.2 / 6e3,
            step: StepRule::Speed(3e4),
            ..base
        },
        "multiscale-sigma" => ScenarioSpec {
            scaling: Scaling::Dimensional(cgs_units(3e6)),
            sigma_a: Opacity::Constant(1.0 / 3.0),
            sigma_s: Opacity::TanhWell { base: 3.0, amp: 10.0, k: 11.0, power: 2.5 },
            t_end: 6.67e-8,
            step: StepRule::Fixed(1.67e-10),
            ..base
        },
        _ => return Err(Error::UnknownPreset { name: name.into(), valid: PRESETS.join(", ") }),
    };
    Ok(spec)
}

/// Opacity with its length dependence rescaled to nondimensional `x`.
fn rescale(op: &Opacity, length: f64) -> Opacity {
    match op {
        Opacity::TanhWell { base, amp, k, power } => {
            Opacity::TanhWell { base: *base, amp: *amp, k: k * length, power: *power }
        }
        other => other.clone(),
    }
}

fn check_opacity(op: &Opacity, what: &str) -> Result<()> {
    let bad = match op {
        Opacity::Constant(v) => !(*v >= 0.0 && v.is_finite()),
        Opacity::PowerLaw { coeff, rho_exp, t_exp } => {
            !(*coeff >= 0.0 && coeff.is_finite() && rho_exp.is_finite() && t_exp.is_finite())
        }
        // the tanh sum takes every value in (0, 2 tanh 1]
        Opacity::TanhWell { base, amp, k, power } => {
            !(base.is_finite() && amp.is_finite() && k.is_finite() && power.is_finite())
                || *base < 0.0
                || base + 2.0 * 1f64.tanh() * amp < 0.0
        }
        Opacity::Tabulated(v) => v.iter().any(|s| !(*s >= 0.0 && s.is_finite())),
    };
    if bad {
        return Err(Error::config(format!("{what} must be finite and nonnegative everywhere")));
    }
    Ok(())
}

impl ScenarioSpec {
    pub fn model(&self) -> FluidModel {
        FluidModel { gamma: self.gamma, r_ideal: self.r_ideal, bx: self.bx }
    }

    /// Replaces `eps` of a regime-scaled spec.
    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        match &mut self.scaling {
            Scaling::Nondimensional { regime: Regime::NonEquilibrium | Regime::Equilibrium, eps: e, .. } => {
                *e = eps;
                Ok(self)
            }
            _ => Err(Error::config(format!("scenario '{}' has no eps to override", self.name))),
        }
    }

    /// Validates and converts to solver units.
    pub fn resolve(&self) -> Result<Scenario> {
        let (a, b) = self.domain;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::config(format!("domain [{a}, {b}] is empty or not finite")));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.steady_tol >= 0.0) {
            return Err(Error::config(format!("steady_tol must be >= 0, got {}", self.steady_tol)));
        }
        if self.ordinates < 2 || !self.ordinates.is_multiple_of(2) {
            return Err(Error::config(format!("ordinates must be even and >= 2, got {}", self.ordinates)));
        }
        check_opacity(&self.sigma_a, "sigma_a")?;
        check_opacity(&self.sigma_s, "sigma_s")?;
        let step_value = match self.step {
            StepRule::Cfl(v) | StepRule::Fixed(v) | StepRule::Speed(v) => v,
        };
        if !(step_value > 0.0) || !step_value.is_finite() {
            return Err(Error::config(format!("time step setting must be positive, got {step_value}")));
        }
        let wrap = |e: Error| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            e => e,
        };
        let (params, domain, t_end, step, length) = match self.scaling {
            Scaling::Nondimensional { regime, eps, c, p0 } => {
                let params = NondimParams::new(regime, eps, c, p0, self.gamma, self.r_ideal).map_err(wrap)?;
                if let StepRule::Speed(_) = self.step {
                    return Err(Error::config("dt_speed needs dimensional units"));
                }
                (params, self.domain, self.t_end, self.step, 1.0)
            }
            Scaling::Dimensional(u) => {
                let vals = [u.light_speed, u.radiation_constant, u.length, u.speed, u.temperature, u.pressure];
                if vals.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::config("reference values must be positive and finite"));
                }
                let regime = Regime::UnitScaled { la: u.length, ls: u.length, curly_c: u.curly_c() };
                let params =
                    NondimParams::new(regime, 1.0, u.curly_c(), u.p0(), self.gamma, self.r_ideal).map_err(wrap)?;
                let step = match self.step {
                    StepRule::Cfl(k) => StepRule::Cfl(k),
                    StepRule::Fixed(dt) => StepRule::Fixed(dt / u.time()),
                    StepRule::Speed(s) => StepRule::Cfl(u.speed / s),
                };
                (params, (a / u.length, b / u.length), self.t_end / u.time(), step, u.length)
            }
        };
        let model = self.model();
        if !model.bx.is_finite() {
            return Err(Error::config("bx must be finite"));
        }
        Ok(Scenario {
            spec: self.clone(),
            params,
            model,
            domain,
            t_end,
            step,
            sigma_a: rescale(&self.sigma_a, length),
            sigma_s: rescale(&self.sigma_s, length),
        })
    }

    /// Initial primitive state and radiation temperature at `x` (spec units).
    pub fn initial_at(&self, x: f64) -> Result<(FluidState, f64)> {
        let model = self.model();
        let (w, tr) = match &self.initial {
            InitialData::Riemann { x0, thermo, left, right, left_tr, right_tr } => {
                let (s, tr) = if x < *x0 { (left, left_tr) } else { (right, right_tr) };
                let w = match thermo {
                    Thermo::Pressure => {
                        FluidState { rho: s[0], vx: s[1], vy: s[2], vz: s[3], by: s[4], bz: s[5], p: s[6] }
                    }
                    Thermo::Temperature => {
                        FluidState::from_temperature(s[0], [s[1], s[2], s[3]], [s[4], s[5]], s[6], &model)
                    }
                };
                (w, *tr)
            }
            InitialData::Blob { base, amp, k, pressure, vx } => {
                let rho = base + amp * ((1.0 - k * x).tanh() + (1.0 + k * x).tanh());
                (FluidState { rho, vx: *vx, vy: 0.0, vz: 0.0, by: 0.0, bz: 0.0, p: *pressure }, None)
            }
        };
        if !(w.rho > 0.0 && w.p > 0.0) || ![w.vx, w.vy, w.vz, w.by, w.bz].iter().all(|v| v.is_finite()) {
            return Err(Error::config(format!("initial state at x = {x} is not admissible: {w:?}")));
        }
        let t = w.temperature(&model);
        let tr = tr.unwrap_or(t);
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::config(format!("initial radiation temperature must be positive, got {tr}")));
        }
        Ok((w, tr))
    }
}

/// `(sigma_a, sigma_s)` at `x`, unscaled, with the initial density and
/// temperature for state-dependent opacities.
pub fn evaluate_opacity(spec: &ScenarioSpec, x: f64) -> Result<(f64, f64)> {
    let (w, _) = spec.initial_at(x)?;
    let t = w.temperature(&spec.model());
    Ok((spec.sigma_a.at(x, w.rho, t, 0), spec.sigma_s.at(x, w.rho, t, 0)))
}

impl Scenario {
    pub fn mesh(&self, nx: usize) -> Result<Mesh1D> {
        if nx < 4 {
            return Err(Error::invalid(format!("need at least 4 cells, got {nx}")));
        }
        Mesh1D::new(self.domain.0, self.domain.1, nx)
    }

    pub fn dt(&self, mesh: &Mesh1D) -> f64 {
        match self.step {
            StepRule::Cfl(k) => k * mesh.dx,
            StepRule::Fixed(dt) => dt,
            StepRule::Speed(_) => unreachable!("resolved scenarios carry no speed rule"),
        }
    }

    /// Scenario time units per solver time unit (1 unless dimensional).
    pub fn time_unit(&self) -> f64 {
        match self.spec.scaling {
            Scaling::Dimensional(u) => u.time(),
            Scaling::Nondimensional { .. } => 1.0,
        }
    }

    fn length(&self) -> f64 {
        match self.spec.scaling {
            Scaling::Dimensional(u) => u.length,
            Scaling::Nondimensional { .. } => 1.0,
        }
    }

    pub fn initial_fields(&self, mesh: &Mesh1D) -> Result<InitialFields> {
        let l = self.length();
        let (fluid, radiation_t): (Vec<_>, Vec<_>) =
            mesh.centers().iter().map(|x| self.spec.initial_at(x * l)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
        let n = fluid.len();
        let t_cell = |i: usize| fluid[i].temperature(&self.model);
        let wall = |w: &WallSpec, i: usize| -> Result<(f64, f64)> {
            let t = w.temperature.unwrap_or_else(|| t_cell(i));
            let tr = w.radiation_temperature.unwrap_or(radiation_t[i]);
            if !(t > 0.0 && tr > 0.0) || !t.is_finite() || !tr.is_finite() {
                return Err(Error::config(format!("wall temperatures must be positive (got {t}, {tr})")));
            }
            Ok((t, tr))
        };
        let walls = [wall(&self.spec.walls[0], 0)?, wall(&self.spec.walls[1], n - 1)?];
        Ok(InitialFields { fluid, radiation_t, walls })
    }
}

/// `J` of isotropic radiation at temperature `tr`.
pub fn radiation_j(tr: f64) -> f64 {
    equilibrium_j(tr)
}

/// `T_r = (4 pi J)^(1/4)`; negative `J` maps to `-(4 pi |J|)^(1/4)`.
pub fn radiation_temperature(j: f64) -> f64 {
    let e = 4.0 * PI * j;
    e.abs().powf(0.25).copysign(e)
}
