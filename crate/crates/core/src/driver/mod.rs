//! Running scenarios: solver selection, time loop with output frames and
//! optional steady-state exit, error norms, convergence studies and CSV.

mod output;

use crate::coupled::{CoupledMode, CoupledSolver, CoupledState};
use crate::error::{Error, Result};
use crate::limits::{ExplicitKineticSolver, LimitSolver, LimitState, LimitWall};
use crate::mesh::Mesh1D;
use crate::mhd::{conserved_to_primitive, primitive_to_conserved, ConservedVector, FluidGhosts, EN, RHO};
use crate::newton::NewtonSettings;
use crate::quadrature::build_quadrature;
use crate::scenarios::{radiation_j, radiation_temperature, RunMode, Scenario, StepRule};
use crate::ugks::BoundaryData;

pub use output::{
    error_norms, read_csv, restrict, write_convergence_csv, write_csv, ErrorNorms, FrameRow, OutputFrame, CSV_HEADER,
};

/// Consecutive steps below the tolerance before a run counts as steady.
pub const STEADY_STEPS: usize = 10;

/// Per-run overrides of the scenario's own settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub nx: usize,
    /// `Cfl(k)` (`dt = k dx`) or `Fixed(dt)`, nondimensional.
    pub step: Option<StepRule>,
    pub mode: Option<RunMode>,
    pub t_end: Option<f64>,
    /// Extra output times; the final time is always emitted.
    pub frames: Vec<f64>,
    pub newton: NewtonSettings,
}

impl RunOptions {
    pub fn new(nx: usize) -> Self {
        RunOptions { nx, step: None, mode: None, t_end: None, frames: Vec::new(), newton: NewtonSettings::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepRecord {
    pub step: usize,
    /// Time at the end of the step.
    pub time: f64,
    pub dt: f64,
    /// Macro Newton iterations (0 for the explicit solver).
    pub iterations: usize,
    /// `||<Q>||_2`, `||<nQ>||_2` and `||J||_2` of the new state.
    pub q_mean_norm: f64,
    pub q_flux_norm: f64,
    pub j_norm: f64,
    /// Constraint norms of the raw Q sweep (coupled solver only).
    pub sweep_q_mean_norm: f64,
    pub sweep_q_flux_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub mode: RunMode,
    pub dt: f64,
    pub frames: Vec<OutputFrame>,
    pub steps: Vec<StepRecord>,
    /// Time at which the steady-state criterion was met.
    pub steady_at: Option<f64>,
}

enum Engine {
    Coupled(CoupledSolver, CoupledState),
    Limit { solver: LimitSolver, state: LimitState, eq: bool },
    Explicit(ExplicitKineticSolver, CoupledState),
}

impl Engine {
    /// Advances one step; the record's step, time and dt are left for the caller.
    fn step(&mut self, dt: f64) -> Result<StepRecord> {
        let l2 = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        match self {
            Engine::Coupled(s, st) => {
                let r = s.step(st, dt)?;
                Ok(StepRecord {
                    iterations: r.macro_iterations,
                    q_mean_norm: r.q_mean_norm,
                    q_flux_norm: r.q_flux_norm,
                    j_norm: r.j_norm,
                    sweep_q_mean_norm: r.sweep_q_mean_norm,
                    sweep_q_flux_norm: r.sweep_q_flux_norm,
                    ..Default::default()
                })
            }
            Engine::Limit { solver, state, eq } => {
                let r = if *eq { solver.eq_limit_step(state, dt)? } else { solver.noneq_limit_step(state, dt)? };
                Ok(StepRecord { iterations: r.iterations, ..Default::default() })
            }
            Engine::Explicit(s, st) => {
                s.step(st, dt)?;
                let (m0, m1) = st.q_moments(&s.quad);
                Ok(StepRecord { q_mean_norm: l2(&m0), q_flux_norm: l2(&m1), j_norm: l2(&st.j), ..Default::default() })
            }
        }
    }

    fn fluid(&self) -> &[ConservedVector] {
        match self {
            Engine::Coupled(_, st) | Engine::Explicit(_, st) => &st.fluid,
            Engine::Limit { state, .. } => &state.fluid,
        }
    }

    /// Density, total energy and `J`, the fields watched for steadiness.
    fn watched(&self) -> Result<[Vec<f64>; 3]> {
        let f = self.fluid();
        let j = match self {
            Engine::Coupled(_, st) | Engine::Explicit(_, st) => st.j.clone(),
            Engine::Limit { solver, state, .. } => state.radiation_j(&solver.model)?,
        };
        Ok([f.iter().map(|u| u[RHO]).collect(), f.iter().map(|u| u[EN]).collect(), j])
    }

    fn frame(&self, time: f64, mesh: &Mesh1D) -> Result<OutputFrame> {
        let (model, quad) = match self {
            Engine::Coupled(s, _) => (s.model, Some(&s.quad)),
            Engine::Explicit(s, _) => (s.model, Some(&s.quad)),
            Engine::Limit { solver, .. } => (solver.model, None),
        };
        let (j, r, qm) = match self {
            Engine::Coupled(_, st) | Engine::Explicit(_, st) => {
                (st.j.clone(), st.r.clone(), Some(st.q_moments(quad.expect("kinetic engines carry a quadrature"))))
            }
            Engine::Limit { solver, state, .. } => (state.radiation_j(&solver.model)?, vec![0.0; state.nx()], None),
        };
        let rows = self
            .fluid()
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let w = conserved_to_primitive(u, &model, i)?;
                let (q0, q1) = qm.as_ref().map_or((0.0, 0.0), |(a, b)| (a[i].abs(), b[i].abs()));
                Ok(FrameRow {
                    x: mesh.center(i),
                    rho: w.rho,
                    vx: w.vx,
                    vy: w.vy,
                    vz: w.vz,
                    by: w.by,
                    bz: w.bz,
                    p: w.p,
                    t: w.temperature(&model),
                    t_r: radiation_temperature(j[i]),
                    j: j[i],
                    r: r[i],
                    q_mean: q0,
                    q_flux: q1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OutputFrame { time, rows })
    }
}

/// Largest relative change rate `max |du| / (dt max |u|)` over the watched fields.
fn change_rate(old: &[Vec<f64>; 3], new: &[Vec<f64>; 3], dt: f64) -> f64 {
    let inf = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0f64, |m, x| m.max(x.abs()));
    old.iter()
        .zip(new)
        .filter_map(|(a, b)| {
            let scale = inf(&mut b.iter().copied());
            (scale > 0.0).then(|| inf(&mut a.iter().zip(b).map(|(x, y)| x - y)) / (dt * scale))
        })
        .fold(0.0, f64::max)
}

fn build(sc: &Scenario, mesh: &Mesh1D, mode: RunMode, newton: NewtonSettings) -> Result<Engine> {
    let init = sc.initial_fields(mesh)?;
    let model = sc.model;
    let fluid: Vec<ConservedVector> = init.fluid.iter().map(|w| primitive_to_conserved(w, &model)).collect();
    let nx = mesh.nx;
    let ghosts = FluidGhosts { left: fluid[0], right: fluid[nx - 1] };
    let j: Vec<f64> = init.radiation_t.iter().map(|t| radiation_j(*t)).collect();
    // a frozen-fluid scenario stays frozen under every solver
    let frozen = mode == RunMode::Frozen || sc.spec.mode == RunMode::Frozen;
    let engine = match mode {
        RunMode::Coupled | RunMode::Frozen | RunMode::Explicit => {
            let quad = build_quadrature(sc.spec.ordinates)?;
            let walls = init.walls.map(|(t, tr)| BoundaryData::isotropic(radiation_j(tr), t, &quad));
            let state = CoupledState { time: 0.0, fluid, j, r: vec![0.0; nx], q: vec![0.0; nx * quad.order] };
            if mode == RunMode::Explicit {
                let solver = ExplicitKineticSolver {
                    mesh: mesh.clone(),
                    params: sc.params,
                    model,
                    quad,
                    ghosts,
                    walls,
                    sigma_a: sc.sigma_a.clone(),
                    sigma_s: sc.sigma_s.clone(),
                    frozen,
                };
                Engine::Explicit(solver, state)
            } else {
                let solver = CoupledSolver {
                    mesh: mesh.clone(),
                    params: sc.params,
                    model,
                    quad,
                    ghosts,
                    walls,
                    sigma_a: sc.sigma_a.clone(),
                    sigma_s: sc.sigma_s.clone(),
                    mode: if frozen { CoupledMode::Frozen } else { CoupledMode::Coupled },
                    newton,
                };
                Engine::Coupled(solver, state)
            }
        }
        RunMode::NoneqLimit | RunMode::EqLimit => {
            let eq = mode == RunMode::EqLimit;
            let walls = init.walls.map(|(t, tr)| LimitWall { j: radiation_j(tr), temperature: t });
            let state = if eq { LimitState::equilibrium(fluid) } else { LimitState { time: 0.0, fluid, j: Some(j) } };
            let solver = LimitSolver {
                mesh: mesh.clone(),
                params: sc.params,
                model,
                ghosts,
                walls,
                sigma_a: sc.sigma_a.clone(),
                sigma_s: sc.sigma_s.clone(),
                frozen,
                newton,
            };
            Engine::Limit { solver, state, eq }
        }
    };
    Ok(engine)
}

/// Advances a scenario to its end time and returns the requested frames
/// (sorted, then the final time) and one record per step.
pub fn run(sc: &Scenario, opts: &RunOptions) -> Result<RunOutput> {
    let mesh = sc.mesh(opts.nx)?;
    let mode = opts.mode.unwrap_or(sc.spec.mode);
    let t_end = opts.t_end.unwrap_or(sc.t_end);
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!("end time must be finite and >= 0, got {t_end}")));
    }
    let dt = match opts.step.unwrap_or(sc.step) {
        StepRule::Cfl(k) => k * mesh.dx,
        StepRule::Fixed(dt) => dt,
        StepRule::Speed(_) => return Err(Error::invalid("speed step rules must be resolved by the scenario")),
    };
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let mut targets: Vec<f64> = opts.frames.clone();
    if let Some(t) = targets.iter().find(|t| !(**t >= 0.0 && **t <= t_end)) {
        return Err(Error::invalid(format!("frame time {t} outside [0, {t_end}]")));
    }
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut engine = build(sc, &mesh, mode, opts.newton)?;
    let mut frames = Vec::with_capacity(targets.len());
    let mut steps = Vec::new();
    let mut t = 0.0;
    let mut calm = 0;
    let mut steady_at = None;
    let tol = sc.spec.steady_tol;
    for &target in &targets {
        while steady_at.is_none() && t < target {
            // land exactly on the target, absorbing a roundoff-sized remainder
            let remaining = target - t;
            let h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
            let before = if tol > 0.0 { Some(engine.watched()?) } else { None };
            let n = steps.len() + 1;
            let rec = engine.step(h).map_err(|e| Error::Step { step: n, time: t, source: Box::new(e) })?;
            t = if h == remaining { target } else { t + h };
            steps.push(StepRecord { step: n, time: t, dt: h, ..rec });
            if let Some(before) = before {
                let rate = change_rate(&before, &engine.watched()?, h);
                calm = if rate < tol { calm + 1 } else { 0 };
                if calm >= STEADY_STEPS {
                    log::info!("steady at t = {t:e} after {n} steps");
                    steady_at = Some(t);
                }
            }
        }
        frames.push(engine.frame(target, &mesh)?);
    }
    Ok(RunOutput { mode, dt, frames, steps, steady_at })
}

/// Errors between resolution `nx` and `2 nx` and observed orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub errors: ErrorNorms,
    /// Order against the next entry of the list; `None` for the last.
    pub orders: Option<ErrorNorms>,
}

/// Runs every `nx` of the list and its doubling, measures the paired errors
/// and the observed orders between consecutive list entries.
pub fn convergence_study(sc: &Scenario, nx_list: &[usize], opts: &RunOptions) -> Result<Vec<ConvergenceRow>> {
    if nx_list.len() < 2 {
        return Err(Error::invalid("a convergence study needs at least two resolutions"));
    }
    for w in nx_list.windows(2) {
        if !(w[0] < w[1] && w[1] % w[0] == 0) {
            return Err(Error::invalid(format!(
                "resolutions must increase and divide each other, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mut all: Vec<usize> = nx_list.iter().flat_map(|&n| [n, 2 * n]).collect();
    all.sort_unstable();
    all.dedup();
    let mut finals = std::collections::BTreeMap::new();
    for &nx in &all {
        let out = run(sc, &RunOptions { nx, frames: Vec::new(), ..opts.clone() })?;
        finals.insert(nx, out.frames.into_iter().last().expect("run emits a final frame"));
    }
    let errors: Vec<ErrorNorms> =
        nx_list.iter().map(|n| error_norms(&finals[n], &restrict(&finals[&(2 * n)], *n)?)).collect::<Result<_>>()?;
    Ok(nx_list
        .iter()
        .enumerate()
        .map(|(k, &nx)| ConvergenceRow {
            nx,
            errors: errors[k],
            orders: (k + 1 < nx_list.len()).then(|| {
                let ratio = (nx_list[k + 1] as f64 / nx as f64).ln();
                errors[k].zip(&errors[k + 1], |a, b| (a / b).ln() / ratio)
            }),
        })
        .collect())
}
