use super::*;
use crate::linalg::Mat;
use crate::mhd::primitive_to_conserved;
use crate::params::Regime;
use nalgebra::{DMatrix, DVector};

fn fluid_model() -> FluidModel {
    FluidModel { gamma: 5.0 / 3.0, r_ideal: 0.6, bx: 0.5 }
}

struct Fixture {
    solver: CoupledSolver,
    state: CoupledState,
}

/// Solver on `[0, 1]` with constant opacities and walls at the boundary
/// cells' equilibrium.
#[allow(clippy::too_many_arguments)]
fn fixture(prims: &[FluidState], regime: Regime, eps: f64, sa: f64, ss: f64, p0: f64, mode: CoupledMode) -> Fixture {
    let nx = prims.len();
    let model = fluid_model();
    let quad = Quadrature::default();
    let params = NondimParams::new(regime, eps, 1.0, p0, model.gamma, model.r_ideal).unwrap();
    let fluid: Vec<ConservedVector> = prims.iter().map(|w| primitive_to_conserved(w, &model)).collect();
    let tl = prims[0].temperature(&model);
    let tr = prims[nx - 1].temperature(&model);
    let solver = CoupledSolver {
        mesh: Mesh1D::new(0.0, 1.0, nx).unwrap(),
        params,
        model,
        quad: quad.clone(),
        ghosts: FluidGhosts { left: fluid[0], right: fluid[nx - 1] },
        walls: [
            BoundaryData::isotropic(equilibrium_j(tl), tl, &quad),
            BoundaryData::isotropic(equilibrium_j(tr), tr, &quad),
        ],
        sigma_a: Opacity::Constant(sa),
        sigma_s: Opacity::Constant(ss),
        mode,
        newton: NewtonSettings::default(),
    };
    let state = CoupledState::equilibrium(fluid, &model, &quad).unwrap();
    Fixture { solver, state }
}

fn prim(rho: f64, vx: f64, by: f64, t: f64) -> FluidState {
    FluidState::from_temperature(rho, [vx, 0.01, 0.0], [by, 0.0], t, &fluid_model())
}

fn uniform(nx: usize) -> Vec<FluidState> {
    vec![FluidState { vx: 0.0, vy: 0.0, ..prim(1.3, 0.0, 0.2, 1.1) }; nx]
}

/// Smooth, non-uniform data with non-equilibrium radiation.
fn wavy(nx: usize) -> Vec<FluidState> {
    (0..nx)
        .map(|i| {
            let x = (i as f64 + 0.5) / nx as f64;
            let s = (2.0 * PI * x).sin();
            prim(1.0 + 0.3 * s, 0.2 * s, 0.1 + 0.1 * x, 1.0 + 0.2 * x * x)
        })
        .collect()
}

fn perturb_radiation(state: &mut CoupledState, quad: &Quadrature) {
    for i in 0..state.nx() {
        let x = i as f64 + 1.0;
        state.j[i] *= 1.0 + 0.3 * (0.7 * x).sin();
        state.r[i] = 0.05 * (1.3 * x).cos();
        for m in 0..quad.order {
            let n = quad.nodes[m];
            state.q[i * quad.order + m] = 0.01 * x * (n * n - 1.0 / 3.0);
        }
    }
}

#[test]
fn uniform_equilibrium_residual_vanishes() {
    for regime in [Regime::NonEquilibrium, Regime::Equilibrium] {
        let fx = fixture(&uniform(6), regime, 1e-3, 1.0, 1.0, 1e-2, CoupledMode::Coupled);
        let setup = fx.solver.prepare(&fx.state, 0.01).unwrap();
        let (r, s) = fx.solver.macro_residual(&setup, &setup.guess).unwrap();
        for (ri, si) in r.iter().zip(&s) {
            for k in 0..4 {
                assert!(ri[k].abs() <= 1e-13 * si[k].max(1e-300), "{ri:?} {si:?}");
            }
        }
        let (x, rep) = fx.solver.solve_macro(&setup).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(x, setup.guess);
    }
}

#[test]
fn equilibrium_is_fixed_point_at_huge_steps() {
    for regime in [Regime::NonEquilibrium, Regime::Equilibrium] {
        let mut fx = fixture(&uniform(10), regime, 1e-3, 1.0, 2.0, 1e-2, CoupledMode::Coupled);
        let s0 = fx.state.clone();
        let dt = 1e6 * fx.solver.mesh.dx / fx.solver.params.curly_c;
        for _ in 0..100 {
            fx.solver.step(&mut fx.state, dt).unwrap();
        }
        for i in 0..10 {
            for k in 0..7 {
                let (a, b) = (fx.state.fluid[i][k], s0.fluid[i][k]);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{regime:?} cell {i} comp {k}: {a} {b}");
            }
            assert!((fx.state.j[i] - s0.j[i]).abs() <= 1e-12 * s0.j[i]);
            assert!(fx.state.r[i].abs() <= 1e-12);
        }
        assert!(fx.state.q.iter().all(|q| q.abs() <= 1e-12));
    }
}

fn jacobian_of(fx: &Fixture, setup: &StepSetup, x: &[[f64; 4]]) -> (Vec<Mat<4>>, Vec<Mat<4>>, Vec<Mat<4>>) {
    let n = x.len();
    let mut lo = vec![[[0.0; 4]; 4]; n];
    let mut d = lo.clone();
    let mut up = lo.clone();
    fx.solver.system(setup).jacobian(x, &mut lo, &mut d, &mut up);
    (lo, d, up)
}

#[test]
fn jacobian_matches_finite_differences() {
    for mode in [CoupledMode::Coupled, CoupledMode::Frozen] {
        let mut fx = fixture(&wavy(5), Regime::NonEquilibrium, 0.1, 1.0, 0.5, 0.3, mode);
        let quad = fx.solver.quad.clone();
        perturb_radiation(&mut fx.state, &quad);
        let setup = fx.solver.prepare(&fx.state, 0.02).unwrap();
        let x: Vec<[f64; 4]> = setup
            .guess
            .iter()
            .enumerate()
            .map(|(i, g)| [g[0] * 1.1, g[1] + 0.01 * i as f64, g[2] + 0.05, g[3] * 0.97])
            .collect();
        let (lo, d, up) = jacobian_of(&fx, &setup, &x);
        let n = x.len();
        for c in 0..n {
            for k in 0..4 {
                let h = 1e-6 * x[c][k].abs().max(1e-3);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c][k] += h;
                xm[c][k] -= h;
                let (rp, _) = fx.solver.macro_residual(&setup, &xp).unwrap();
                let (rm, _) = fx.solver.macro_residual(&setup, &xm).unwrap();
                for i in 0..n {
                    for row in 0..4 {
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
                        assert!((fd - an).abs() < 1e-6 * scale, "{mode:?} row {i}/{row} var {c}/{k}: fd {fd} vs {an}");
                    }
                }
            }
        }
    }
}

/// Newton with a finite-difference dense Jacobian on the flattened system.
fn dense_root(fx: &Fixture, setup: &StepSetup, start: &[[f64; 4]]) -> Vec<[f64; 4]> {
    let n = start.len();
    let flat = |x: &DVector<f64>| -> Vec<[f64; 4]> { (0..n).map(|i| std::array::from_fn(|k| x[4 * i + k])).collect() };
    let res = |x: &DVector<f64>| -> DVector<f64> {
        let (r, _) = fx.solver.macro_residual(setup, &flat(x)).unwrap();
        DVector::from_iterator(4 * n, r.into_iter().flatten())
    };
    let mut x = DVector::from_iterator(4 * n, start.iter().flatten().copied());
    for _ in 0..100 {
        let r = res(&x);
        let mut jac = DMatrix::zeros(4 * n, 4 * n);
        for c in 0..4 * n {
            let h = 1e-7 * x[c].abs().max(1e-4);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            jac.set_column(c, &((res(&xp) - res(&xm)) / (2.0 * h)));
        }
        let dx = jac.lu().solve(&(-&r)).unwrap();
        x += &dx;
        if dx.amax() < 1e-15 * x.amax() {
            break;
        }
    }
    flat(&x)
}

#[test]
fn two_cell_solve_matches_dense_root_finder() {
    let prims = vec![prim(1.0, 0.0, 0.0, 1.0), prim(1.5, 0.0, 0.0, 0.8)];
    let mut fx = fixture(&prims, Regime::NonEquilibrium, 0.5, 2.0, 1.0, 0.5, CoupledMode::Coupled);
    // radiation far from 4 pi J = T^4
    fx.state.j = vec![0.3, 0.05];
    let setup = fx.solver.prepare(&fx.state, 0.05).unwrap();
    let (x, rep) = fx.solver.solve_macro(&setup).unwrap();
    assert!(rep.iterations > 2);
    let oracle = dense_root(&fx, &setup, &setup.guess);
    for i in 0..2 {
        for k in 0..4 {
            let scale = oracle[i][k].abs().max(1e-3);
            assert!((x[i][k] - oracle[i][k]).abs() < 1e-10 * scale, "{i}/{k}: {} vs {}", x[i][k], oracle[i][k]);
        }
    }
    let (r, s) = fx.solver.macro_residual(&setup, &oracle).unwrap();
    for (ri, si) in r.iter().zip(&s) {
        for k in 0..4 {
            assert!(ri[k].abs() < 1e-12 * si[k]);
        }
    }
}

#[test]
fn q_update_matches_dense_solve() {
    let mut fx = fixture(&wavy(3), Regime::NonEquilibrium, 0.2, 1.0, 0.7, 0.1, CoupledMode::Coupled);
    let quad = fx.solver.quad.clone();
    perturb_radiation(&mut fx.state, &quad);
    fx.solver.walls[0].inflow = quad.nodes.iter().map(|n| 0.2 + 0.05 * n).collect();
    let setup = fx.solver.prepare(&fx.state, 0.03).unwrap();
    let (x, _) = fx.solver.solve_macro(&setup).unwrap();
    let q = fx.solver.update_q(&setup, &x);
    for m in 0..quad.order {
        // the equations are affine in q: assemble them column by column
        let zero = fx.solver.ordinate_residual(&setup, &x, m, &[0.0; 3]);
        let mut a = DMatrix::zeros(3, 3);
        for c in 0..3 {
            let mut e = [0.0; 3];
            e[c] = 1.0;
            let col = fx.solver.ordinate_residual(&setup, &x, m, &e);
            for r in 0..3 {
                a[(r, c)] = col[r] - zero[r];
            }
        }
        let b = -DVector::from_vec(zero);
        let sol = a.lu().solve(&b).unwrap();
        for i in 0..3 {
            let got = q[i * quad.order + m];
            assert!((got - sol[i]).abs() < 1e-12 * sol[i].abs().max(1e-3), "m {m} cell {i}: {got} vs {}", sol[i]);
        }
    }
}

#[test]
fn equilibrium_q_stays_zero() {
    let fx = fixture(&uniform(4), Regime::NonEquilibrium, 1e-2, 1.0, 1.0, 0.0, CoupledMode::Coupled);
    let setup = fx.solver.prepare(&fx.state, 0.1).unwrap();
    let q = fx.solver.update_q(&setup, &setup.guess);
    assert!(q.iter().all(|v| v.abs() < 1e-13));
}

#[test]
fn decoupled_fluid_matches_pure_mhd() {
    let model = FluidModel { gamma: 2.0, r_ideal: 1.0, bx: 0.75 };
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
    let mut fx = fixture(&prims, Regime::NonEquilibrium, 1e-5, 1.0 / 3.0, 1.0 / 3.0, 0.0, CoupledMode::Coupled);
    fx.solver.model = model;
    fx.solver.params = NondimParams::new(Regime::NonEquilibrium, 1e-5, 0.1, 0.0, 2.0, 1.0).unwrap();
    let fluid: Vec<ConservedVector> = prims.iter().map(|w| primitive_to_conserved(w, &model)).collect();
    fx.solver.ghosts = FluidGhosts { left: fluid[0], right: fluid[nx - 1] };
    fx.state = CoupledState::equilibrium(fluid.clone(), &model, &fx.solver.quad).unwrap();
    fx.solver.walls = [
        BoundaryData::isotropic(equilibrium_j(1.0), 1.0, &fx.solver.quad),
        BoundaryData::isotropic(equilibrium_j(0.8), 0.8, &fx.solver.quad),
    ];
    let dt = 0.2 * fx.solver.mesh.dx;
    let mut pure = fluid;
    for _ in 0..20 {
        fx.solver.step(&mut fx.state, dt).unwrap();
        pure = explicit_mhd_update(&pure, &fx.solver.ghosts, &model, dt, fx.solver.mesh.dx, UpdateSet::All).unwrap().0;
        for i in 0..nx {
            // vx and T come out of Newton, so later fluxes differ in the last bits
            for k in [RHO, MY, MZ, 5, 6] {
                assert!((fx.state.fluid[i][k] - pure[i][k]).abs() < 1e-10, "cell {i} comp {k}");
            }
            let a = conserved_to_primitive(&fx.state.fluid[i], &model, i).unwrap();
            let b = conserved_to_primitive(&pure[i], &model, i).unwrap();
            assert!((a.vx - b.vx).abs() < 1e-10, "vx {} {}", a.vx, b.vx);
            assert!((a.temperature(&model) - b.temperature(&model)).abs() < 1e-10);
        }
    }
}

#[test]
fn frozen_mode_keeps_density_and_velocity() {
    let mut fx = fixture(&wavy(8), Regime::NonEquilibrium, 0.1, 1.0, 0.5, 0.2, CoupledMode::Frozen);
    let quad = fx.solver.quad.clone();
    perturb_radiation(&mut fx.state, &quad);
    let s0 = fx.state.clone();
    for _ in 0..5 {
        fx.solver.step(&mut fx.state, 0.01).unwrap();
    }
    for i in 0..8 {
        for k in [RHO, MX, MY, MZ, 5, 6] {
            assert_eq!(fx.state.fluid[i][k], s0.fluid[i][k]);
        }
    }
    assert_ne!(fx.state.j, s0.j);
}

/// In the non-equilibrium scaling `Q = -n R + O(eps)` after one step.
#[test]
fn residual_relaxes_to_minus_n_r() {
    let mut errs = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let prims: Vec<FluidState> = (0..20)
            .map(|i| {
                let x = (i as f64 + 0.5) / 20.0;
                FluidState { vx: 0.0, vy: 0.0, ..prim(1.0, 0.0, 0.0, 1.0 + 0.5 * (PI * x).sin()) }
            })
            .collect();
        let mut fx = fixture(&prims, Regime::NonEquilibrium, eps, 1.0, 1.0, 0.0, CoupledMode::Coupled);
        let dt = 0.2 * fx.solver.mesh.dx;
        fx.solver.step(&mut fx.state, dt).unwrap();
        let quad = &fx.solver.quad;
        let mut worst = 0.0f64;
        for i in 0..20 {
            for m in 0..quad.order {
                let v = fx.state.q[i * quad.order + m] + quad.nodes[m] * fx.state.r[i];
                worst = worst.max(v.abs());
            }
        }
        errs.push(worst);
    }
    assert!(errs[1] < 0.2 * errs[0] && errs[2] < 0.2 * errs[1], "{errs:?}");
}
