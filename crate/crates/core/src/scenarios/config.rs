//! Flat `key = value` scenario files. `#` starts a comment; every key may
//! appear once and unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{InitialData, RunMode, Scaling, ScenarioSpec, StepRule, Thermo, Units, WallSpec};
use crate::error::{Error, Result};
use crate::opacity::Opacity;
use crate::params::Regime;
use crate::quadrature::DEFAULT_ORDER;

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

fn num(key: &str, line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::config(format!("line {line}: '{key}' expects a number, got '{s}'")))
}

fn list(key: &str, line: usize, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|v| num(key, line, v)).collect()
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {line}: expected 'key = value', got '{content}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::config(format!("line {line}: empty key")));
            }
            if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
                return Err(Error::config(format!("line {line}: key '{k}' already set on line {first}")));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn req(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| Error::config(format!("missing key '{key}'")))
    }

    fn f(&mut self, key: &str) -> Result<f64> {
        let (line, v) = self.req(key)?;
        num(key, line, &v)
    }

    fn opt_f(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|(line, v)| num(key, line, &v)).transpose()
    }

    fn state(&mut self, key: &str) -> Result<[f64; 7]> {
        let (line, v) = self.req(key)?;
        let vals = list(key, line, &v)?;
        vals.try_into().map_err(|v: Vec<f64>| {
            Error::config(format!("line {line}: '{key}' needs 7 values (rho,vx,vy,vz,By,Bz,p|T), got {}", v.len()))
        })
    }

    fn opacity(&mut self, key: &str) -> Result<Opacity> {
        let (line, v) = self.req(key)?;
        let (kind, rest) = v.split_once(':').unwrap_or(("const", v.as_str()));
        let vals = list(key, line, rest)?;
        let want = |n: usize| -> Result<()> {
            if vals.len() != n {
                return Err(Error::config(format!("line {line}: '{key}' of kind '{kind}' needs {n} values")));
            }
            Ok(())
        };
        Ok(match kind.trim() {
            "const" => {
                want(1)?;
                Opacity::Constant(vals[0])
            }
            "power" => {
                want(3)?;
                Opacity::PowerLaw { coeff: vals[0], rho_exp: vals[1], t_exp: vals[2] }
            }
            "tanh" => {
                want(4)?;
                Opacity::TanhWell { base: vals[0], amp: vals[1], k: vals[2], power: vals[3] }
            }
            "table" => Opacity::Tabulated(vals),
            other => {
                return Err(Error::config(format!(
                    "line {line}: unknown opacity kind '{other}' (const, power, tanh, table)"
                )))
            }
        })
    }

    fn finish(self) -> Result<()> {
        match self.map.iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(Error::config(format!("line {line}: unknown or unused key '{k}'"))),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioSpec> {
    let mut e = Entries::parse(text)?;
    let name = e.req("name")?.1;
    let domain = (e.f("x_min")?, e.f("x_max")?);
    let units = e.take("units").map(|x| x.1).unwrap_or_else(|| "nondimensional".into());
    let scaling = match units.as_str() {
        "nondimensional" => {
            let (line, tag) = e.req("regime")?;
            let (regime, eps, c) = match tag.as_str() {
                "noneq" | "eq" => {
                    let regime = if tag == "noneq" { Regime::NonEquilibrium } else { Regime::Equilibrium };
                    (regime, e.f("eps")?, e.f("c")?)
                }
                "unit" => {
                    let (la, ls, curly_c) = (e.f("la")?, e.f("ls")?, e.f("curly_c")?);
                    (Regime::UnitScaled { la, ls, curly_c }, 1.0, curly_c)
                }
                other => return Err(Error::config(format!("line {line}: unknown regime '{other}' (noneq, eq, unit)"))),
            };
            Scaling::Nondimensional { regime, eps, c, p0: e.f("p0")? }
        }
        "dimensional" => Scaling::Dimensional(Units {
            light_speed: e.f("light_speed")?,
            radiation_constant: e.f("radiation_constant")?,
            length: e.f("ref_length")?,
            speed: e.f("ref_speed")?,
            temperature: e.f("ref_temperature")?,
            pressure: e.f("ref_pressure")?,
        }),
        other => return Err(Error::config(format!("unknown units '{other}' (nondimensional, dimensional)"))),
    };
    let gamma = e.f("gamma")?;
    let r_ideal = e.f("r_ideal")?;
    let bx = e.f("bx")?;
    let sigma_a = e.opacity("sigma_a")?;
    let sigma_s = e.opacity("sigma_s")?;
    let (line, kind) = e.req("initial")?;
    let initial = match kind.as_str() {
        "riemann" => {
            let x0 = e.f("x0")?;
            let (tl, t) = e.req("thermo")?;
            let thermo = match t.as_str() {
                "pressure" => Thermo::Pressure,
                "temperature" => Thermo::Temperature,
                other => {
                    return Err(Error::config(format!("line {tl}: unknown thermo '{other}' (pressure, temperature)")))
                }
            };
            InitialData::Riemann {
                x0,
                thermo,
                left: e.state("left")?,
                right: e.state("right")?,
                left_tr: e.opt_f("left_tr")?,
                right_tr: e.opt_f("right_tr")?,
            }
        }
        "blob" => InitialData::Blob {
            base: e.f("blob_base")?,
            amp: e.f("blob_amp")?,
            k: e.f("blob_k")?,
            pressure: e.f("blob_pressure")?,
            vx: e.opt_f("blob_vx")?.unwrap_or(0.0),
        },
        other => return Err(Error::config(format!("line {line}: unknown initial data '{other}' (riemann, blob)"))),
    };
    let walls = [
        WallSpec { temperature: e.opt_f("left_temperature")?, radiation_temperature: e.opt_f("left_wall_tr")? },
        WallSpec { temperature: e.opt_f("right_temperature")?, radiation_temperature: e.opt_f("right_wall_tr")? },
    ];
    let mode = match e.take("mode") {
        Some((_, m)) => m.parse::<RunMode>()?,
        None => RunMode::Coupled,
    };
    let t_end = e.f("t_end")?;
    let rules = [("cfl", e.opt_f("cfl")?), ("dt", e.opt_f("dt")?), ("dt_speed", e.opt_f("dt_speed")?)];
    let set: Vec<_> = rules.iter().filter(|r| r.1.is_some()).collect();
    let step = match set.as_slice() {
        [("cfl", Some(v))] => StepRule::Cfl(*v),
        [("dt", Some(v))] => StepRule::Fixed(*v),
        [("dt_speed", Some(v))] => StepRule::Speed(*v),
        _ => return Err(Error::config("exactly one of 'cfl', 'dt', 'dt_speed' must be set")),
    };
    let ordinates = match e.take("ordinates") {
        Some((line, v)) => v
            .parse::<usize>()
            .map_err(|_| Error::config(format!("line {line}: 'ordinates' expects an integer, got '{v}'")))?,
        None => DEFAULT_ORDER,
    };
    let steady_tol = e.opt_f("steady_tol")?.unwrap_or(0.0);
    e.finish()?;
    Ok(ScenarioSpec {
        name,
        domain,
        scaling,
        gamma,
        r_ideal,
        bx,
        sigma_a,
        sigma_s,
        initial,
        walls,
        mode,
        t_end,
        step,
        ordinates,
        steady_tol,
    })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn opacity(op: &Opacity) -> String {
    match op {
        Opacity::Constant(v) => format!("const:{v}"),
        Opacity::PowerLaw { coeff, rho_exp, t_exp } => format!("power:{}", join(&[*coeff, *rho_exp, *t_exp])),
        Opacity::TanhWell { base, amp, k, power } => format!("tanh:{}", join(&[*base, *amp, *k, *power])),
        Opacity::Tabulated(v) => format!("table:{}", join(v)),
    }
}

/// Writes a spec so that [`parse_config`] returns it unchanged.
pub fn to_config(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("name", spec.name.clone());
    kv("x_min", spec.domain.0.to_string());
    kv("x_max", spec.domain.1.to_string());
    match spec.scaling {
        Scaling::Nondimensional { regime, eps, c, p0 } => {
            kv("units", "nondimensional".into());
            kv("regime", regime.tag().into());
            match regime {
                Regime::UnitScaled { la, ls, curly_c } => {
                    kv("la", la.to_string());
                    kv("ls", ls.to_string());
                    kv("curly_c", curly_c.to_string());
                }
                _ => {
                    kv("eps", eps.to_string());
                    kv("c", c.to_string());
                }
            }
            kv("p0", p0.to_string());
        }
        Scaling::Dimensional(u) => {
            kv("units", "dimensional".into());
            kv("light_speed", u.light_speed.to_string());
            kv("radiation_constant", u.radiation_constant.to_string());
            kv("ref_length", u.length.to_string());
            kv("ref_speed", u.speed.to_string());
            kv("ref_temperature", u.temperature.to_string());
            kv("ref_pressure", u.pressure.to_string());
        }
    }
    kv("gamma", spec.gamma.to_string());
    kv("r_ideal", spec.r_ideal.to_string());
    kv("bx", spec.bx.to_string());
    kv("sigma_a", opacity(&spec.sigma_a));
    kv("sigma_s", opacity(&spec.sigma_s));
    match &spec.initial {
        InitialData::Riemann { x0, thermo, left, right, left_tr, right_tr } => {
            kv("initial", "riemann".into());
            kv("x0", x0.to_string());
            kv("thermo", if *thermo == Thermo::Pressure { "pressure" } else { "temperature" }.into());
            kv("left", join(left));
            kv("right", join(right));
            if let Some(t) = left_tr {
                kv("left_tr", t.to_string());
            }
            if let Some(t) = right_tr {
                kv("right_tr", t.to_string());
            }
        }
        InitialData::Blob { base, amp, k, pressure, vx } => {
            kv("initial", "blob".into());
            kv("blob_base", base.to_string());
            kv("blob_amp", amp.to_string());
            kv("blob_k", k.to_string());
            kv("blob_pressure", pressure.to_string());
            if *vx != 0.0 {
                kv("blob_vx", vx.to_string());
            }
        }
    }
    for (side, w) in ["left", "right"].iter().zip(&spec.walls) {
        if let Some(t) = w.temperature {
            kv(&format!("{side}_temperature"), t.to_string());
        }
        if let Some(t) = w.radiation_temperature {
            kv(&format!("{side}_wall_tr"), t.to_string());
        }
    }
    kv("mode", spec.mode.to_string());
    kv("t_end", spec.t_end.to_string());
    match spec.step {
        StepRule::Cfl(v) => kv("cfl", v.to_string()),
        StepRule::Fixed(v) => kv("dt", v.to_string()),
        StepRule::Speed(v) => kv("dt_speed", v.to_string()),
    }
    kv("ordinates", spec.ordinates.to_string());
    if spec.steady_tol != 0.0 {
        kv("steady_tol", spec.steady_tol.to_string());
    }
    out
}
