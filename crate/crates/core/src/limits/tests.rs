use super::*;
use crate::coupled::CoupledState;
use crate::mhd::{primitive_to_conserved, FluidState};
use crate::params::Regime;

fn model() -> FluidModel {
    FluidModel { gamma: 5.0 / 3.0, r_ideal: 0.6, bx: 0.5 }
}

fn conserved(prims: &[FluidState], m: &FluidModel) -> Vec<ConservedVector> {
    prims.iter().map(|w| primitive_to_conserved(w, m)).collect()
}

/// Solver on `[0, 1]` with walls at the boundary cells' temperatures.
fn solver(prims: &[FluidState], c: f64, p0: f64, sa: f64, ss: f64, frozen: bool) -> LimitSolver {
    let m = model();
    let nx = prims.len();
    let fluid = conserved(prims, &m);
    let wall = |w: &FluidState| {
        let t = w.temperature(&m);
        LimitWall { j: equilibrium_j(t), temperature: t }
    };
    LimitSolver {
        mesh: Mesh1D::new(0.0, 1.0, nx).unwrap(),
        params: NondimParams::new(Regime::NonEquilibrium, 1.0, c, p0, m.gamma, m.r_ideal).unwrap(),
        model: m,
        ghosts: FluidGhosts { left: fluid[0], right: fluid[nx - 1] },
        walls: [wall(&prims[0]), wall(&prims[nx - 1])],
        sigma_a: Opacity::Constant(sa),
        sigma_s: Opacity::Constant(ss),
        frozen,
        newton: NewtonSettings::default(),
    }
}

fn prim(rho: f64, vx: f64, t: f64) -> FluidState {
    FluidState::from_temperature(rho, [vx, 0.02, 0.0], [0.1, 0.0], t, &model())
}

fn smooth(nx: usize) -> Vec<FluidState> {
    (0..nx)
        .map(|i| {
            let x = (i as f64 + 0.5) / nx as f64;
            let s = (PI * x).sin();
            prim(1.0 + 0.2 * s, 0.1 * s, 1.0 + 0.3 * s * s)
        })
        .collect()
}

#[test]
fn uniform_equilibrium_is_unchanged() {
    let prims = vec![FluidState { vy: 0.0, ..prim(1.2, 0.0, 0.9) }; 8];
    for frozen in [false, true] {
        let s = solver(&prims, 3.0, 0.1, 2.0, 1.5, frozen);
        let mut a = LimitState::with_equilibrium_j(conserved(&prims, &s.model), &s.model).unwrap();
        let mut b = LimitState::equilibrium(a.fluid.clone());
        let (a0, b0) = (a.clone(), b.clone());
        for _ in 0..10 {
            s.noneq_limit_step(&mut a, 0.05).unwrap();
            s.eq_limit_step(&mut b, 0.05).unwrap();
        }
        for i in 0..8 {
            for k in 0..7 {
                assert!((a.fluid[i][k] - a0.fluid[i][k]).abs() < 1e-13);
                assert!((b.fluid[i][k] - b0.fluid[i][k]).abs() < 1e-13);
            }
        }
        let (ja, j0) = (a.j.unwrap(), a0.j.unwrap());
        assert!(ja.iter().zip(&j0).all(|(x, y)| (x - y).abs() < 1e-13 * y));
        assert!(b.j.is_none());
    }
}

/// Pure diffusion of `J` between the pinned wall cells: the first Dirichlet
/// eigenmode of the discrete Laplacian decays by exactly
/// `1 / (1 + dt D lambda)` per step and follows the continuum rate
/// `exp(-D k^2 t)`.
#[test]
fn diffusion_mode_decays_at_the_heat_kernel_rate() {
    let nx = 50;
    let prims = vec![FluidState { vy: 0.0, ..prim(1.0, 0.0, 1.0) }; nx];
    // D = c / (3 sigma_s) = 1
    let s = solver(&prims, 1.0, 0.0, 0.0, 1.0 / 3.0, true);
    let j0 = s.walls[0].j;
    let amp = 0.1 * j0;
    let span = (nx - 1) as f64;
    let mode: Vec<f64> = (0..nx).map(|i| (PI * i as f64 / span).sin()).collect();
    let mut st = LimitState::with_equilibrium_j(conserved(&prims, &s.model), &s.model).unwrap();
    st.j = Some(mode.iter().map(|m| j0 + amp * m).collect());
    let dx = s.mesh.dx;
    let k2 = (PI / (span * dx)).powi(2);
    let dt = 0.105 / 100.0;
    for _ in 0..100 {
        s.noneq_limit_step(&mut st, dt).unwrap();
    }
    let j = st.j.unwrap();
    assert_eq!((j[0], j[nx - 1]), (j0, j0));
    let ratio = (j[nx / 2] - j0) / (amp * mode[nx / 2]);
    for i in 1..nx - 1 {
        let r = (j[i] - j0) / (amp * mode[i]);
        assert!((r - ratio).abs() < 1e-9, "mode shape lost at cell {i}");
    }
    let lambda = 4.0 * (PI / (2.0 * span)).sin().powi(2) / (dx * dx);
    let discrete = (1.0 + dt * lambda).powi(-100);
    assert!((ratio - discrete).abs() < 1e-9 * discrete, "{ratio} vs {discrete}");
    let continuum = (-k2 * 100.0 * dt).exp();
    assert!((ratio - continuum).abs() < 0.01 * continuum, "{ratio} vs {continuum}");
}

#[test]
fn equilibrium_system_without_coupling_is_pure_mhd() {
    let m = FluidModel { gamma: 2.0, r_ideal: 1.0, bx: 0.75 };
    let nx = 40;
    let prims: Vec<FluidState> = (0..nx)
        .map(|i| {
            if i < nx / 2 {
                FluidState { rho: 1.0, vx: 0.0, vy: 0.0, vz: 0.0, by: 1.0, bz: 0.0, p: 1.0 }
            } else {
                FluidState { rho: 0.125, vx: 0.0, vy: 0.0, vz: 0.0, by: -1.0, bz: 0.0, p: 0.1 }
            }
        })
        .collect();
    let mut s = solver(&prims, 1.0, 0.0, 1.0, 1.0, false);
    s.model = m;
    s.params = NondimParams::new(Regime::Equilibrium, 1.0, 1.0, 0.0, 2.0, 1.0).unwrap();
    let fluid = conserved(&prims, &m);
    s.ghosts = FluidGhosts { left: fluid[0], right: fluid[nx - 1] };
    let mut st = LimitState::equilibrium(fluid.clone());
    let mut pure = fluid;
    let dt = 0.2 * s.mesh.dx;
    for _ in 0..20 {
        s.eq_limit_step(&mut st, dt).unwrap();
        pure = explicit_mhd_update(&pure, &s.ghosts, &m, dt, s.mesh.dx, UpdateSet::All).unwrap().0;
    }
    for i in 0..nx {
        for k in 0..7 {
            assert!((st.fluid[i][k] - pure[i][k]).abs() < 1e-10, "cell {i} comp {k}");
        }
    }
}

/// With the fluid frozen, `sum (a rho T + P0 T^4) dx` over the interior
/// changes only by the diffusive fluxes from the pinned wall cells.
#[test]
fn equilibrium_energy_telescopes_to_wall_fluxes() {
    let nx = 60;
    let prims: Vec<FluidState> = (0..nx)
        .map(|i| {
            let x = (i as f64 + 0.5) / nx as f64;
            let bump = 0.5 * (-((x - 0.45) / 0.15).powi(2)).exp();
            FluidState { vx: 0.0, vy: 0.0, ..prim(1.0 + 0.3 * x, 0.0, 1.0 + bump) }
        })
        .collect();
    let mut s = solver(&prims, 2.0, 0.7, 4.0, 0.0, true);
    s.walls[0].temperature = 1.1;
    s.newton.tol = 1e-13;
    let a = s.params.a_coeff;
    let p0 = s.params.p0;
    let dx = s.mesh.dx;
    let kd = s.params.c / (3.0 * 4.0);
    let energy = |st: &LimitState| -> f64 {
        st.fluid[1..nx - 1]
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let t = conserved_to_primitive(u, &s.model, i).unwrap().temperature(&s.model);
                (a * u[RHO] * t + p0 * t.powi(4)) * dx
            })
            .sum()
    };
    let mut st = LimitState::equilibrium(conserved(&prims, &s.model));
    let e0 = energy(&st);
    let mut inflow = 0.0;
    let dt = 0.01;
    for _ in 0..20 {
        s.eq_limit_step(&mut st, dt).unwrap();
        let t4: Vec<f64> = temperatures(&st.fluid, &s.model).unwrap().iter().map(|t| t.powi(4)).collect();
        inflow += dt * p0 * kd * ((t4[0] - t4[1]) + (t4[nx - 1] - t4[nx - 2])) / dx;
    }
    // wall cells sit at (T_0^4 + T_w^4) / 2 = 4 pi <b>
    let t = temperatures(&st.fluid, &s.model).unwrap();
    for (w, ti) in [(0, t[0]), (1, t[nx - 1])] {
        let half = 0.5 * (ti.powi(4) + s.walls[w].temperature.powi(4));
        assert!((half - FOUR_PI * s.walls[w].j).abs() < 1e-12 * half);
    }
    let e1 = energy(&st);
    assert!(inflow.abs() > 1e-4);
    assert!((e1 - e0 - inflow).abs() < 1e-10 * e0, "{} vs {}", e1 - e0, inflow);
}

/// Mass and `E + 4 pi P0 J` over the interior change only by the fluxes from
/// the wall cells: the explicit Roe fluxes plus the implicit radiation
/// diffusion and advection fluxes.
#[test]
fn non_equilibrium_conserves_mass_and_energy() {
    let nx = 60;
    let prims: Vec<FluidState> = (0..nx)
        .map(|i| {
            let x = (i as f64 + 0.5) / nx as f64;
            let b = (-((x - 0.4) / 0.1).powi(2)).exp();
            FluidState { vy: 0.0, ..prim(1.0 + 0.2 * b, 0.1 * b, 1.0 + 0.5 * b) }
        })
        .collect();
    let p0 = 0.3;
    let mut s = solver(&prims, 1.0, p0, 2.0, 5.0, false);
    s.walls[0] = LimitWall { j: 1.3 * s.walls[0].j, temperature: 1.0 };
    s.newton.tol = 1e-13;
    let dx = s.mesh.dx;
    let dt = 0.2 * dx;
    let kd = s.params.c / (3.0 * 5.0);
    let mut st = LimitState::with_equilibrium_j(conserved(&prims, &s.model), &s.model).unwrap();
    let total = |st: &LimitState, k: usize| -> f64 {
        let j = st.j.as_ref().unwrap();
        (1..nx - 1).map(|i| (st.fluid[i][k] + if k == EN { FOUR_PI * p0 * j[i] } else { 0.0 }) * dx).sum()
    };
    let (m0, e0) = (total(&st, RHO), total(&st, EN));
    let (mut dm, mut de) = (0.0, 0.0);
    for _ in 0..10 {
        let f = crate::mhd::interface_fluxes(&st.fluid, &s.ghosts, &s.model).unwrap();
        dm -= dt * (f[nx - 1][RHO] - f[1][RHO]);
        de -= dt * (f[nx - 1][EN] - f[1][EN]);
        s.noneq_limit_step(&mut st, dt).unwrap();
        let j = st.j.as_ref().unwrap();
        assert_eq!((j[0], j[nx - 1]), (s.walls[0].j, s.walls[1].j));
        let v: Vec<f64> = st.fluid.iter().map(|u| u[MX] / u[RHO]).collect();
        // radiation energy flux through a face from (left, right) values
        let flux = |jl: f64, jr: f64, vl: f64, vr: f64| {
            p0 * (-FOUR_PI * kd * (jr - jl) / dx + FOUR_PI / 3.0 * (vl + vr) * (jl + jr))
        };
        let fl = flux(j[0], j[1], v[0], v[1]);
        let fr = flux(j[nx - 2], j[nx - 1], v[nx - 2], v[nx - 1]);
        de -= dt * (fr - fl);
    }
    assert!(dm.abs() > 0.0 || de.abs() > 1e-6);
    assert!((total(&st, RHO) - m0 - dm).abs() < 1e-14 * m0);
    assert!((total(&st, EN) - e0 - de).abs() < 1e-11 * e0, "{} vs {de}", total(&st, EN) - e0);
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Strong absorption drives the non-equilibrium system onto the equilibrium
/// one whose diffusion opacity is the same scattering opacity.
#[test]
fn strong_absorption_approaches_equilibrium_system() {
    let nx = 40;
    let prims = smooth(nx);
    let mut diffs = Vec::new();
    let steps = 20;
    let dt = 0.005;
    let mut eq_solver = solver(&prims, 1.0, 0.5, 1.0, 0.0, false);
    eq_solver.newton.tol = 1e-12;
    let mut eq = LimitState::equilibrium(conserved(&prims, &eq_solver.model));
    for _ in 0..steps {
        eq_solver.eq_limit_step(&mut eq, dt).unwrap();
    }
    let t_eq = temperatures(&eq.fluid, &eq_solver.model).unwrap();
    for sa in [1e2, 1e3, 1e4] {
        let mut s = solver(&prims, 1.0, 0.5, sa, 1.0, false);
        s.newton.tol = 1e-12;
        let mut st = LimitState::with_equilibrium_j(conserved(&prims, &s.model), &s.model).unwrap();
        for _ in 0..steps {
            s.noneq_limit_step(&mut st, dt).unwrap();
        }
        let t = temperatures(&st.fluid, &s.model).unwrap();
        diffs.push(l1(&t, &t_eq));
    }
    assert!(diffs[1] < diffs[0] && diffs[2] < diffs[1], "{diffs:?}");
}

fn kinetic(prims: &[FluidState], cc: f64, sa: f64, ss: f64, p0: f64) -> (ExplicitKineticSolver, CoupledState) {
    let m = model();
    let nx = prims.len();
    let quad = Quadrature::default();
    let fluid = conserved(prims, &m);
    let wall = |w: &FluidState| {
        let t = w.temperature(&m);
        BoundaryData::isotropic(equilibrium_j(t), t, &quad)
    };
    let s = ExplicitKineticSolver {
        mesh: Mesh1D::new(0.0, 1.0, nx).unwrap(),
        params: NondimParams::new(
            Regime::UnitScaled { la: 1.0, ls: 1.0, curly_c: cc },
            1.0,
            1.0,
            p0,
            m.gamma,
            m.r_ideal,
        )
        .unwrap(),
        model: m,
        quad: quad.clone(),
        ghosts: FluidGhosts { left: fluid[0], right: fluid[nx - 1] },
        walls: [wall(&prims[0]), wall(&prims[nx - 1])],
        sigma_a: Opacity::Constant(sa),
        sigma_s: Opacity::Constant(ss),
        frozen: false,
    };
    let st = CoupledState::equilibrium(fluid, &m, &quad).unwrap();
    (s, st)
}

#[test]
fn explicit_uniform_equilibrium_is_unchanged() {
    let prims = vec![FluidState { vy: 0.0, ..prim(1.0, 0.0, 1.2) }; 10];
    let (s, mut st) = kinetic(&prims, 50.0, 3.0, 1.0, 0.2);
    let s0 = st.clone();
    for _ in 0..50 {
        s.step(&mut st, s.max_dt()).unwrap();
    }
    for i in 0..10 {
        for k in 0..7 {
            assert!((st.fluid[i][k] - s0.fluid[i][k]).abs() < 1e-13);
        }
        assert!((st.j[i] - s0.j[i]).abs() < 1e-13);
        assert!(st.r[i].abs() < 1e-13);
    }
}

#[test]
fn explicit_rejects_steps_beyond_light_cfl() {
    let prims = vec![prim(1.0, 0.0, 1.0); 4];
    let (s, mut st) = kinetic(&prims, 10.0, 1.0, 1.0, 0.0);
    let err = s.step(&mut st, 1.5 * s.max_dt()).unwrap_err();
    assert_eq!(err.kind(), "config");
}

/// Without opacity each ordinate is plain upwind advection at `C n`.
#[test]
fn explicit_free_streaming_front_moves_at_light_speed() {
    let nx = 200;
    let prims = vec![FluidState { vy: 0.0, ..prim(1.0, 0.0, 1.0) }; nx];
    let (mut s, mut st) = kinetic(&prims, 10.0, 0.0, 0.0, 0.0);
    s.frozen = true;
    let order = s.quad.order;
    st.j = vec![0.0; nx];
    s.walls[0].inflow = vec![1.0; order];
    s.walls[1].inflow = vec![0.0; order];
    let dt = s.max_dt();
    let steps = 100;
    for _ in 0..steps {
        s.step(&mut st, dt).unwrap();
    }
    let intensity = st.intensity(&s.quad);
    let dx = s.mesh.dx;
    for m in 0..order {
        let n = s.quad.nodes[m];
        if n <= 0.0 {
            continue;
        }
        let front = s.params.curly_c * n * dt * steps as f64;
        // first cell whose value drops below one half
        let cross = (0..nx).find(|&i| intensity[i * order + m] < 0.5).unwrap_or(nx);
        let pos = cross as f64 * dx;
        assert!((pos - front).abs() <= 2.0 * dx, "ordinate {m}: front {pos} expected {front}");
    }
}

fn check_jacobian<const N: usize, const M: usize, S: CellStencil<N>>(sys: &S, x: &[[f64; N]]) {
    use crate::newton::BlockSystem;
    let wrapped = StencilSystem::<_, M>::new(sys);
    let n = x.len();
    let mut lo = vec![[[0.0; N]; N]; n];
    let mut d = lo.clone();
    let mut up = lo.clone();
    wrapped.jacobian(x, &mut lo, &mut d, &mut up);
    let res = |x: &[[f64; N]]| {
        let mut r = vec![[0.0; N]; n];
        let mut s = r.clone();
        wrapped.residual(x, &mut r, &mut s);
        r
    };
    for c in 0..n {
        for k in 0..N {
            let h = 1e-6 * x[c][k].abs().max(1e-2);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[c][k] += h;
            xm[c][k] -= h;
            let (rp, rm) = (res(&xp), res(&xm));
            for i in 0..n {
                for row in 0..N {
                    let fd = (rp[i][row] - rm[i][row]) / (2.0 * h);
                    let an = if i == c {
                        d[i][row][k]
                    } else if i + 1 == c {
                        up[i][row][k]
                    } else if c + 1 == i {
                        lo[i][row][k]
                    } else {
                        0.0
                    };
                    let scale = an.abs().max(fd.abs()).max(1.0);
                    assert!((fd - an).abs() < 1e-6 * scale, "row {i}/{row} var {c}/{k}: fd {fd} vs {an}");
                }
            }
        }
    }
}

#[test]
fn stencil_jacobians_match_finite_differences() {
    let nx = 6;
    let prims = smooth(nx);
    for frozen in [false, true] {
        let s = solver(&prims, 1.5, 0.4, 2.0, 3.0, frozen);
        let st = LimitState::with_equilibrium_j(conserved(&prims, &s.model), &s.model).unwrap();
        let dt = 0.03;
        let stage = s.fluid_stage(&st, dt).unwrap();
        let j_s = st.j.clone().unwrap();
        let sys = NoneqStencil {
            cells: &stage.cells,
            j_s: &j_s,
            sa: vec![2.0; nx],
            kf: vec![0.5; nx + 1],
            ghosts: [[0.1, 0.05, 1.1], [0.07, -0.02, 0.9]],
            dt,
            dx: s.mesh.dx,
            c: 1.5,
            p0: 0.4,
            a: s.params.a_coeff,
            frozen,
        };
        let x: Vec<[f64; 3]> =
            (0..nx).map(|i| [j_s[i] * (1.0 + 0.1 * i as f64), 0.05 * i as f64 - 0.1, 1.0 + 0.03 * i as f64]).collect();
        check_jacobian::<3, 9, _>(&sys, &x);
        let eq = EqStencil {
            cells: &stage.cells,
            kf: vec![0.5; nx + 1],
            ghosts: [[0.05, 1.1], [-0.02, 0.9]],
            wall_t4: [1.2, 0.8],
            dt,
            dx: s.mesh.dx,
            p0: 0.4,
            a: s.params.a_coeff,
            frozen,
        };
        let y: Vec<[f64; 2]> = x.iter().map(|c| [c[1], c[2]]).collect();
        check_jacobian::<2, 6, _>(&eq, &y);
    }
}
