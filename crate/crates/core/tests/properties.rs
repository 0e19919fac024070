use proptest::prelude::*;
use surfns_core::diagnostics::{lambda_quotient, record};
use surfns_core::forcing::{hypothesis_check, make_catalog_forcing, ForcingKind, Sign};
use surfns_core::geometry::{
    build_sphere_grid, build_torus_grid, h1_norm, l2_inner, l2_norm, rate_of_strain, surface_divergence,
    surface_gradient, tangential_project,
};
use surfns_core::harmonics::{analyze, dealias_rule, leray_project, synthesize, toroidal_basis_field};
use surfns_core::killing::{killing_basis, pk_project};
use surfns_core::operators::{assemble_stokes, convective_term, stokes_grid_degree};
use surfns_core::random::{random_state, rng_from_seed};
use surfns_core::timestepper::{run, Problem, Scheme, SimState, StepperConfig};
use surfns_core::{SpectralState, SurfaceGrid, ViscosityField};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

fn sphere(degree: usize) -> SurfaceGrid {
    build_sphere_grid(dealias_rule(degree).degree, 1.0).unwrap()
}

fn state(seed: u64, degree: usize, nk: f64, nnk: f64) -> SpectralState {
    random_state(&mut rng_from_seed(seed), degree, nk, nnk, 1.0)
}

/// Quadratic polynomial restricted to the surface, used as a scalar potential.
fn quadratic(grid: &SurfaceGrid, a: [f64; 3], b: [[f64; 3]; 3]) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|x| {
            let mut v = 0.0;
            for i in 0..3 {
                v += a[i] * x[i];
                for j in 0..3 {
                    v += b[i][j] * x[i] * x[j];
                }
            }
            v
        })
        .collect()
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
}

fn mat3() -> impl Strategy<Value = [[f64; 3]; 3]> {
    prop::array::uniform3(vec3())
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn synthesis_analysis_round_trip_and_parseval(seed in any::<u64>(), degree in 2usize..10) {
        let grid = sphere(degree);
        let s = state(seed, degree, 0.7, 1.3);
        let u = synthesize(&grid, &s).unwrap();
        let back = analyze(&grid, &u, degree).unwrap();
        prop_assert!(back.axpy(-1.0, &s).unwrap().norm() < 1e-12);
        let n = l2_norm(&grid, &u).unwrap();
        prop_assert!((n * n - s.norm_sq()).abs() < 1e-12 * (1.0 + s.norm_sq()));
    }

    #[test]
    fn strain_trace_is_divergence(seed in any::<u64>(), a in vec3(), b in mat3()) {
        let degree = 6;
        let grid = sphere(degree);
        let p = quadratic(&grid, a, b);
        let grad = surface_gradient(&grid, &p).unwrap();
        let u = synthesize(&grid, &state(seed, degree, 0.5, 1.0)).unwrap().axpy(1.0, &grad).unwrap();
        let tr = rate_of_strain(&grid, &u).unwrap().trace();
        let div = surface_divergence(&grid, &u).unwrap();
        let err = tr.iter().zip(&div).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "max |tr ε - div| = {err}");
    }

    #[test]
    fn norms_do_not_depend_on_the_tangent_frame(
        seed in any::<u64>(),
        phase in 0.0f64..std::f64::consts::TAU,
        wobble in 0.0f64..3.0,
    ) {
        let degree = 5;
        let grid = sphere(degree);
        let u = synthesize(&grid, &state(seed, degree, 0.4, 1.0)).unwrap();
        let v = synthesize(&grid, &state(seed ^ 0xabcd, degree, 1.0, 0.3)).unwrap();
        let angles: Vec<f64> = grid.nodes().iter().map(|x| phase + wobble * x[0] * x[1]).collect();
        let rotated = grid.with_rotated_frame(&angles).unwrap();
        let ur = tangential_project(&rotated, &grid.ambient(&u).unwrap()).unwrap();
        let vr = tangential_project(&rotated, &grid.ambient(&v).unwrap()).unwrap();
        let d_inner = l2_inner(&grid, &u, &v).unwrap() - l2_inner(&rotated, &ur, &vr).unwrap();
        prop_assert!(d_inner.abs() < 1e-12);
        let h = h1_norm(&grid, &u).unwrap();
        prop_assert!((h - h1_norm(&rotated, &ur).unwrap()).abs() < 1e-10 * h);
    }

    #[test]
    fn leray_projection_is_idempotent_and_kills_gradients(seed in any::<u64>(), a in vec3(), b in mat3()) {
        let degree = 6;
        let grid = sphere(degree);
        let p = quadratic(&grid, a, b);
        let grad = surface_gradient(&grid, &p).unwrap();
        let s = state(seed, degree, 0.3, 1.0);
        let v = synthesize(&grid, &s).unwrap().axpy(1.0, &grad).unwrap();
        let once = leray_project(&grid, &v, degree).unwrap();
        prop_assert!(once.axpy(-1.0, &s).unwrap().norm() < 1e-11);
        let twice = leray_project(&grid, &synthesize(&grid, &once).unwrap(), degree).unwrap();
        prop_assert!(twice.axpy(-1.0, &once).unwrap().norm() < 1e-12);
    }

    #[test]
    fn killing_split_is_orthogonal(seed in any::<u64>(), nk in 0.0f64..2.0, nnk in 0.0f64..2.0) {
        let degree = 6;
        let grid = sphere(degree);
        let basis = killing_basis(&grid).unwrap();
        let s = state(seed, degree, nk, nnk);
        let u = synthesize(&grid, &s).unwrap();
        let (uk, unk) = pk_project(&basis, &grid, &u).unwrap();
        prop_assert!(l2_inner(&grid, &uk, &unk).unwrap().abs() < 1e-12);
        let total = l2_norm(&grid, &u).unwrap().powi(2);
        let split = l2_norm(&grid, &uk).unwrap().powi(2) + l2_norm(&grid, &unk).unwrap().powi(2);
        prop_assert!((total - split).abs() < 1e-12 * (1.0 + total));
        prop_assert!((l2_norm(&grid, &uk).unwrap() - nk).abs() < 1e-12);
        let (uk2, _) = pk_project(&basis, &grid, &uk).unwrap();
        prop_assert!(uk2.axpy(-1.0, &uk).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn convection_does_no_work_and_leaves_killing_block(seed in any::<u64>(), amp in 0.1f64..5.0) {
        let degree = 6;
        let grid = sphere(degree);
        let s = state(seed, degree, 0.5 * amp, amp);
        let n = convective_term(&grid, &s).unwrap();
        let scale = s.norm_sq() * s.norm() * 1e-12;
        prop_assert!(n.dot(&s).abs() < scale);
        prop_assert!(n.killing_norm_sq().sqrt() < scale.max(1e-14));
    }

    #[test]
    fn lambda_is_scale_invariant(seed in any::<u64>(), c in prop_oneof![-10.0f64..-0.01, 0.01f64..10.0]) {
        let degree = 6;
        let grid = build_sphere_grid(stokes_grid_degree(degree, 1), 1.0).unwrap();
        let nu = ViscosityField::linear_x3(&grid, 1.0, 0.4).unwrap();
        let form = assemble_stokes(&grid, &nu, degree).unwrap();
        let s = state(seed, degree, 0.5, 1.0);
        let a = lambda_quotient(&form, &s).unwrap().unwrap();
        let b = lambda_quotient(&form, &s.scaled(c)).unwrap().unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn affine_forcings_are_lipschitz(seed in any::<u64>(), gap in 1e-3f64..10.0) {
        let degree = 5;
        let grid = sphere(degree);
        let basis = killing_basis(&grid).unwrap();
        let kinds = [
            ForcingKind::F3(Sign::Plus),
            ForcingKind::F3(Sign::Minus),
            ForcingKind::F4 { sign: Sign::Minus, point: [0.0, 0.0, 1.0] },
            ForcingKind::F5,
        ];
        let u1 = state(seed, degree, 0.5, 1.0);
        let u2 = u1.axpy(gap, &state(seed.wrapping_add(1), degree, 1.0, 1.0)).unwrap();
        for kind in kinds {
            let f = make_catalog_forcing(kind, &grid, &basis, degree).unwrap();
            let d = f.apply(&grid, &basis, &u1).unwrap().axpy(-1.0, &f.apply(&grid, &basis, &u2).unwrap()).unwrap();
            let bound = f.flags().c2 * u1.axpy(-1.0, &u2).unwrap().norm();
            prop_assert!(d.norm() <= bound * (1.0 + 1e-10), "{:?}: {} > {}", f.tag(), d.norm(), bound);
        }
    }
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn stokes_spectrum_is_rotation_invariant(dir in vec3(), slope in 0.0f64..0.8) {
        prop_assume!(dir.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let degree = 6;
        let grid = build_sphere_grid(stokes_grid_degree(degree, 1), 1.0).unwrap();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n = dir.map(|x| x / norm);
        let tilted: Vec<f64> = grid.nodes().iter().map(|x| 1.0 + slope * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2])).collect();
        let nu_t = ViscosityField::from_nodal(&grid, tilted, 1.0 - slope, Some(1)).unwrap();
        let nu_z = ViscosityField::linear_x3(&grid, 1.0, slope).unwrap();
        let a = assemble_stokes(&grid, &nu_t, degree).unwrap().spectrum();
        let b = assemble_stokes(&grid, &nu_z, degree).unwrap().spectrum();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn stokes_spectrum_is_bracketed_by_viscosity_bounds(slope in 0.0f64..0.9) {
        let degree = 6;
        let grid = build_sphere_grid(stokes_grid_degree(degree, 1), 1.0).unwrap();
        let nu = ViscosityField::linear_x3(&grid, 1.0, slope).unwrap();
        let form = assemble_stokes(&grid, &nu, degree).unwrap();
        let spec = form.spectrum();
        for ev in &spec[..3] {
            prop_assert!(ev.abs() < 1e-10);
        }
        let (lo, hi) = (nu.min(), nu.max());
        prop_assert!(spec[3] >= 4.0 * lo - 1e-10 && spec[3] <= 4.0 * hi + 1e-10);
        let top = (degree * (degree + 1) - 2) as f64;
        prop_assert!(*spec.last().unwrap() <= top * hi + 1e-9);
    }
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn linearized_imex_never_grows_the_non_killing_part(seed in any::<u64>(), dt in 1e-3f64..2.0) {
        let st = setup(6);
        let f = make_catalog_forcing(ForcingKind::Zero, &st.grid, &st.basis, 6).unwrap();
        let mut p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        p.linear = true;
        let cfg = StepperConfig { scheme: Scheme::ImexCnab2, dt, t_end: 20.0 * dt, stride: 1, cfl: None };
        let out = run(&cfg, &p, SimState::new(state(seed, 6, 0.5, 2.0), dt)).unwrap();
        for w in out.records.windows(2) {
            prop_assert!(w[1].norm_unk <= w[0].norm_unk * (1.0 + 1e-14));
            prop_assert!((w[1].norm_uk - w[0].norm_uk).abs() < 1e-14);
        }
    }
}

#[test]
fn toroidal_basis_is_orthonormal_through_degree_four() {
    let grid = sphere(4);
    let modes: Vec<(usize, i64)> = (1..=4usize)
        .flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m)))
        .collect();
    let fields: Vec<_> = modes.iter().map(|&(l, m)| toroidal_basis_field(&grid, l, m).unwrap()).collect();
    for i in 0..fields.len() {
        for j in 0..fields.len() {
            let g = l2_inner(&grid, &fields[i], &fields[j]).unwrap();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((g - expect).abs() < 1e-13, "{:?} {:?}: {g}", modes[i], modes[j]);
        }
    }
}

#[test]
fn unit_viscosity_eigenvalues_follow_degree_law() {
    for radius in [1.0, 0.5, 2.0] {
        let grid = build_sphere_grid(stokes_grid_degree(8, 0), radius).unwrap();
        let nu = ViscosityField::constant(&grid, 1.0).unwrap();
        let form = assemble_stokes(&grid, &nu, 8).unwrap();
        for l in 1..=8usize {
            let expect = (l * (l + 1)) as f64 / (radius * radius) - 2.0 / (radius * radius);
            assert!((form.lambda(l) - expect).abs() < 1e-10 * (1.0 + expect), "R={radius} l={l}");
        }
    }
}

#[test]
fn killing_fields_have_no_strain_on_sphere_and_torus() {
    let grid = sphere(4);
    let basis = killing_basis(&grid).unwrap();
    assert_eq!(basis.dim(), 3);
    for v in basis.fields() {
        let e = rate_of_strain(&grid, v).unwrap();
        assert!(e.comps.iter().flatten().flatten().all(|x| x.abs() < 1e-12));
    }
    let torus = build_torus_grid(32, 48, 2.0, 0.5).unwrap();
    let basis = killing_basis(&torus).unwrap();
    assert_eq!(basis.dim(), 1);
    let e = rate_of_strain(&torus, basis.field(0)).unwrap();
    assert!(e.comps.iter().flatten().flatten().all(|x| x.abs() < 1e-12));
}

struct Setup {
    grid: SurfaceGrid,
    basis: surfns_core::KillingBasis,
    form: surfns_core::operators::StokesForm,
}

fn setup(degree: usize) -> Setup {
    let grid = sphere(degree);
    let basis = killing_basis(&grid).unwrap();
    let nu = ViscosityField::constant(&grid, 1.0).unwrap();
    let form = assemble_stokes(&grid, &nu, degree).unwrap();
    Setup { grid, basis, form }
}

fn final_state(p: &Problem, s0: &SpectralState, scheme: Scheme, dt: f64, t_end: f64) -> SpectralState {
    let cfg = StepperConfig { scheme, dt, t_end, stride: usize::MAX, cfl: None };
    run(&cfg, p, SimState::new(s0.clone(), dt)).unwrap().final_state.state
}

fn observed_order(scheme: Scheme, dt: f64) -> f64 {
    let st = setup(6);
    let f = make_catalog_forcing(ForcingKind::F3(Sign::Minus), &st.grid, &st.basis, 6).unwrap();
    let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
    let s0 = state(99, 6, 0.5, 1.0);
    let t_end = 1.0;
    let reference = final_state(&p, &s0, scheme, dt / 8.0, t_end);
    let err = |h: f64| final_state(&p, &s0, scheme, h, t_end).axpy(-1.0, &reference).unwrap().norm();
    err(dt) / err(dt / 2.0)
}

#[test]
fn imex_halving_dt_quarters_the_error() {
    let r = observed_order(Scheme::ImexCnab2, 0.02);
    assert!((r - 4.0).abs() <= 0.15 * 4.0, "ratio {r}");
}

#[test]
fn rk4_halving_dt_divides_error_by_sixteen() {
    let r = observed_order(Scheme::Rk4, 0.02);
    assert!((r - 16.0).abs() <= 0.2 * 16.0, "ratio {r}");
}

#[test]
fn rk4_killing_coordinates_grow_and_decay_exponentially() {
    let st = setup(4);
    for (sign, rate) in [(Sign::Plus, 1.0f64), (Sign::Minus, -1.0)] {
        let f = make_catalog_forcing(ForcingKind::F3(sign), &st.grid, &st.basis, 4).unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let s0 = st.basis.state_from_alpha(&[0.3, -0.2, 0.9], 4).unwrap();
        let end = final_state(&p, &s0, Scheme::Rk4, 1e-3, 1.0);
        let alpha = st.basis.alpha_from_state(&end).unwrap();
        for (a, a0) in alpha.iter().zip([0.3, -0.2, 0.9]) {
            assert!((a - a0 * rate.exp()).abs() < 1e-9);
        }
    }
}

#[test]
fn records_split_the_norm_orthogonally() {
    let st = setup(6);
    let f = make_catalog_forcing(ForcingKind::F3(Sign::Minus), &st.grid, &st.basis, 6).unwrap();
    for seed in 0..10 {
        let sim = SimState::new(state(seed, 6, 0.2 * seed as f64, 1.0), 1e-3);
        let r = record(&st.grid, &st.basis, &st.form, &f, &sim).unwrap();
        let lhs = r.norm_u * r.norm_u;
        assert!((lhs - r.norm_uk.powi(2) - r.norm_unk.powi(2)).abs() < 1e-13 * (1.0 + lhs));
        let alpha_sq: f64 = r.alpha.iter().map(|a| a * a).sum();
        assert!((alpha_sq - r.norm_uk.powi(2)).abs() < 1e-13);
    }
}

#[test]
fn catalog_passes_its_own_hypothesis_checks() {
    let st = setup(5);
    let kinds = [
        ForcingKind::Zero,
        ForcingKind::F3(Sign::Plus),
        ForcingKind::F3(Sign::Minus),
        ForcingKind::F4 { sign: Sign::Plus, point: [1.0, 0.0, 0.0] },
        ForcingKind::F4 { sign: Sign::Minus, point: [0.0, 0.0, -1.0] },
        ForcingKind::F5,
    ];
    for kind in kinds {
        let f = make_catalog_forcing(kind, &st.grid, &st.basis, 5).unwrap();
        let rep = hypothesis_check(&f, &st.grid, &st.basis, 20, 7).unwrap();
        assert!(rep.passed(), "{:?}: {:?}", f.tag(), rep.violations);
    }
}
