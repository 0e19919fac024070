//! Time integration of `dc/dt = -A c - N(c) + F(c)`.
//!
//! The default scheme is IMEX CNAB2: Crank-Nicolson on the diagonal part
//! `ν_* D`, second-order Adams-Bashforth on `G = -A'c - N(c) + F(c)`, with a
//! CN-Heun first step. Classical RK4 on the full right-hand side is kept for
//! cross-checks.
//!
//! Both schemes carry an energy ledger. For CNAB2 the increments are the
//! terms of the exact discrete identity
//! `E^{n+1} - E^n = -Δt[ν_* c̄ᵀDc̄ + c̄·(A'c)_AB] - Δt c̄·N_AB + Δt c̄·F_AB`
//! with `c̄ = (c^n + c^{n+1})/2`, so the ledger residual measures only the
//! convective imbalance, which vanishes in the continuous limit.

use crate::diagnostics::{record, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::geometry::SurfaceGrid;
use crate::harmonics::SpectralState;
use crate::killing::KillingBasis;
use crate::operators::{convective_term, StokesForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    ImexCnab2,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Record diagnostics every `stride` steps.
    pub stride: usize,
    /// Adaptive stepping: each step uses `min(dt, cfl·Δx_min/‖u‖_∞)`, with
    /// `dt` acting as the cap. `None` keeps the step fixed.
    pub cfl: Option<f64>,
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be at least 1".into()));
        }
        if let Some(c) = self.cfl {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("CFL target must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round().max(1.0) as u64
    }
}

/// Explicit terms of the previous step, kept for Adams-Bashforth.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub remainder: Vec<f64>,
    pub convective: Vec<f64>,
    pub forcing: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub state: SpectralState,
    pub step: u64,
    pub dt: f64,
    pub dissipation_integral: f64,
    pub work_integral: f64,
    pub initial_energy: f64,
    pub history: Option<History>,
}

impl SimState {
    pub fn new(state: SpectralState, dt: f64) -> Self {
        let e0 = 0.5 * state.norm_sq();
        Self {
            state,
            step: 0,
            dt,
            dissipation_integral: 0.0,
            work_integral: 0.0,
            initial_energy: e0,
            history: None,
        }
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.state.norm_sq()
    }

    /// `E(t) - E(0) + ∫D - ∫W`.
    pub fn ledger_residual(&self) -> f64 {
        self.energy() - self.initial_energy + self.dissipation_integral - self.work_integral
    }
}

/// Everything the right-hand side depends on.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub grid: &'a SurfaceGrid,
    pub basis: &'a KillingBasis,
    pub form: &'a StokesForm,
    pub forcing: &'a ForcingSpec,
    /// Drop the convective term (linearized runs).
    pub linear: bool,
}

impl<'a> Problem<'a> {
    pub fn new(
        grid: &'a SurfaceGrid,
        basis: &'a KillingBasis,
        form: &'a StokesForm,
        forcing: &'a ForcingSpec,
    ) -> Self {
        Self {
            grid,
            basis,
            form,
            forcing,
            linear: false,
        }
    }

    fn explicit_terms(&self, s: &SpectralState) -> Result<History> {
        let convective = if self.linear {
            vec![0.0; s.len()]
        } else {
            convective_term(self.grid, s)?.coeffs
        };
        Ok(History {
            remainder: self.form.remainder_apply(&s.coeffs),
            convective,
            forcing: self.forcing.apply(self.grid, self.basis, s)?.coeffs,
        })
    }

    /// Full right-hand side `-A c - N(c) + F(c)` and its pieces.
    fn full_rhs(&self, s: &SpectralState) -> Result<(Vec<f64>, f64, f64)> {
        let h = self.explicit_terms(s)?;
        let ac = crate::operators::stokes_apply(self.form, s)?;
        let rhs: Vec<f64> = (0..s.len())
            .map(|i| -ac.coeffs[i] - h.convective[i] + h.forcing[i])
            .collect();
        let diss = s.dot(&ac);
        let work: f64 = s.coeffs.iter().zip(&h.forcing).map(|(a, b)| a * b).sum();
        Ok((rhs, diss, work))
    }

    /// Largest `dt` the explicit viscous remainder tolerates.
    pub fn imex_dt_limit(&self) -> f64 {
        if !self.form.has_remainder() {
            return f64::INFINITY;
        }
        let lmax = self.form.lambda(self.form.degree());
        let spread = self.form.nu_max() - self.form.nu_star();
        if spread <= 0.0 || lmax <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / (spread * lmax)
        }
    }
}

/// `target · Δx_min / ‖u‖_∞`, infinite for the zero state.
pub fn cfl_dt(grid: &SurfaceGrid, s: &SpectralState, target: f64) -> Result<f64> {
    let u = crate::harmonics::synthesize(grid, s)?;
    let umax = u
        .comps
        .iter()
        .map(|c| (c[0] * c[0] + c[1] * c[1]).sqrt())
        .fold(0.0, f64::max);
    Ok(if umax > 0.0 { target * grid.min_spacing() / umax } else { f64::INFINITY })
}

fn check_finite(s: &SimState) -> Result<()> {
    if s.state.is_finite() && s.dissipation_integral.is_finite() && s.work_integral.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence {
            step: s.step,
            time: s.state.time,
        })
    }
}

/// One CNAB2 step (CN-Heun when no history is available). A step size that
/// differs from `sim.dt` uses the variable-step Adams-Bashforth weights.
pub fn step_imex(sim: &SimState, problem: &Problem, dt: f64) -> Result<SimState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let limit = problem.imex_dt_limit();
    if dt > limit {
        return Err(Error::Stability(format!(
            "dt = {dt} exceeds the explicit viscous bound {limit:e}"
        )));
    }
    let form = problem.form;
    let nu = form.nu_star();
    let c = &sim.state.coeffs;
    let n = c.len();
    let diag: Vec<f64> = (0..n).map(|i| nu * form.diagonal(i)).collect();
    let cn = |g: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| ((1.0 - 0.5 * dt * diag[i]) * c[i] + dt * g[i]) / (1.0 + 0.5 * dt * diag[i]))
            .collect()
    };
    let now = problem.explicit_terms(&sim.state)?;

    let (next, ab) = match (&sim.history, sim.step) {
        (Some(prev), s) if s > 0 => {
            let ratio = dt / sim.dt;
            let (wa, wb) = (1.0 + 0.5 * ratio, 0.5 * ratio);
            let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
                a.iter().zip(b).map(|(x, y)| wa * x - wb * y).collect()
            };
            let ab = History {
                remainder: mix(&now.remainder, &prev.remainder),
                convective: mix(&now.convective, &prev.convective),
                forcing: mix(&now.forcing, &prev.forcing),
            };
            (cn(&explicit_g(&ab)), ab)
        }
        _ => {
            let pred = cn(&explicit_g(&now));
            let mut ps = sim.state.clone();
            ps.coeffs = pred;
            let later = problem.explicit_terms(&ps)?;
            let avg = |a: &[f64], b: &[f64]| -> Vec<f64> {
                a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
            };
            let ab = History {
                remainder: avg(&now.remainder, &later.remainder),
                convective: avg(&now.convective, &later.convective),
                forcing: avg(&now.forcing, &later.forcing),
            };
            (cn(&explicit_g(&ab)), ab)
        }
    };

    let mut d_inc = 0.0;
    let mut w_inc = 0.0;
    for i in 0..n {
        let mid = 0.5 * (c[i] + next[i]);
        d_inc += mid * (diag[i] * mid + ab.remainder[i]);
        w_inc += mid * ab.forcing[i];
    }
    let step = sim.step + 1;
    let mut state = SpectralState::from_coeffs(sim.state.degree(), next)?;
    state.time = sim.state.time + dt;
    let out = SimState {
        state,
        step,
        dt,
        dissipation_integral: sim.dissipation_integral + dt * d_inc,
        work_integral: sim.work_integral + dt * w_inc,
        initial_energy: sim.initial_energy,
        history: Some(now),
    };
    check_finite(&out)?;
    Ok(out)
}

fn explicit_g(h: &History) -> Vec<f64> {
    (0..h.remainder.len())
        .map(|i| -h.remainder[i] - h.convective[i] + h.forcing[i])
        .collect()
}

/// Largest stable RK4 step: `λ_L ν_max dt ≤ 2.7`.
pub fn rk4_dt_limit(form: &StokesForm) -> f64 {
    let lmax = form.lambda(form.degree()) * form.nu_max();
    if lmax > 0.0 {
        2.7 / lmax
    } else {
        f64::INFINITY
    }
}

/// One classical RK4 step on the full right-hand side.
pub fn step_rk4(sim: &SimState, problem: &Problem, dt: f64) -> Result<SimState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let limit = rk4_dt_limit(problem.form);
    if dt > limit {
        return Err(Error::InvalidParameter(format!(
            "RK4 step dt = {dt} exceeds the stability bound {limit:e}"
        )));
    }
    let c0 = &sim.state;
    let stage = |k: &[f64], a: f64| -> Result<SpectralState> {
        let mut s = c0.clone();
        for (x, y) in s.coeffs.iter_mut().zip(k) {
            *x += a * dt * y;
        }
        Ok(s)
    };
    let (k1, d1, w1) = problem.full_rhs(c0)?;
    let (k2, d2, w2) = problem.full_rhs(&stage(&k1, 0.5)?)?;
    let (k3, d3, w3) = problem.full_rhs(&stage(&k2, 0.5)?)?;
    let (k4, d4, w4) = problem.full_rhs(&stage(&k3, 1.0)?)?;
    let mut state = c0.clone();
    for i in 0..state.len() {
        state.coeffs[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let step = sim.step + 1;
    state.time = sim.state.time + dt;
    let out = SimState {
        state,
        step,
        dt,
        dissipation_integral: sim.dissipation_integral + dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4),
        work_integral: sim.work_integral + dt / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4),
        initial_energy: sim.initial_energy,
        history: None,
    };
    check_finite(&out)?;
    Ok(out)
}

/// Samples and terminal state of a run. `outcome` holds the divergence
/// error, if any, in which case `final_state` is the last good state.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    /// States at the recorded samples.
    pub states: Vec<SpectralState>,
    pub final_state: SimState,
    pub outcome: Result<()>,
}

/// Integrates from `init` until `config.t_end`, recording every `stride` steps
/// and at the end.
pub fn run(config: &StepperConfig, problem: &Problem, init: SimState) -> Result<RunOutput> {
    config.validate()?;
    let n_steps = config.n_steps();
    let mut sim = init;
    if config.cfl.is_none() {
        sim.dt = config.dt;
    }
    let mut records = vec![record(problem.grid, problem.basis, problem.form, problem.forcing, &sim)?];
    let mut states = vec![sim.state.clone()];
    let mut outcome = Ok(());
    let t_tol = 1e-12 * config.t_end;
    let finished = |sim: &SimState| match config.cfl {
        None => sim.step >= n_steps,
        Some(_) => sim.state.time >= config.t_end - t_tol,
    };
    while !finished(&sim) {
        let dt = match config.cfl {
            None => config.dt,
            Some(c) => config
                .dt
                .min(cfl_dt(problem.grid, &sim.state, c)?)
                .min(config.t_end - sim.state.time),
        };
        let next = match config.scheme {
            Scheme::ImexCnab2 => step_imex(&sim, problem, dt),
            Scheme::Rk4 => step_rk4(&sim, problem, dt),
        };
        match next {
            Ok(mut s) => {
                if config.cfl.is_none() {
                    s.state.time = s.step as f64 * config.dt;
                }
                sim = s
            }
            Err(e @ Error::Divergence { .. }) => {
                outcome = Err(e);
                break;
            }
            Err(e) => return Err(e),
        }
        if sim.step % config.stride as u64 == 0 || finished(&sim) {
            records.push(record(problem.grid, problem.basis, problem.form, problem.forcing, &sim)?);
            states.push(sim.state.clone());
        }
    }
    Ok(RunOutput {
        records,
        states,
        final_state: sim,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{make_catalog_forcing, ForcingKind, Sign};
    use crate::geometry::{build_sphere_grid, ViscosityField};
    use crate::harmonics::dealias_rule;
    use crate::killing::killing_basis;
    use crate::operators::assemble_stokes;
    use crate::random::{random_state, rng_from_seed};

    struct Setup {
        grid: SurfaceGrid,
        basis: KillingBasis,
        form: StokesForm,
    }

    fn setup(l: usize) -> Setup {
        let grid = build_sphere_grid(dealias_rule(l).degree.max(l + 2), 1.0).unwrap();
        let basis = killing_basis(&grid).unwrap();
        let nu = ViscosityField::constant(&grid, 1.0).unwrap();
        let form = assemble_stokes(&grid, &nu, l).unwrap();
        Setup { grid, basis, form }
    }

    fn integrate(p: &Problem, s0: SpectralState, dt: f64, t: f64, scheme: Scheme) -> SimState {
        let cfg = StepperConfig { scheme, dt, t_end: t, stride: 1_000_000, cfl: None };
        run(&cfg, p, SimState::new(s0, dt)).unwrap().final_state
    }

    #[test]
    fn free_decay_is_second_order() {
        let st = setup(6);
        let f = make_catalog_forcing(ForcingKind::Zero, &st.grid, &st.basis, 6).unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let s0 = SpectralState::unit_mode(6, 2, 0).unwrap();
        let exact = (-st.form.lambda(2)).exp();
        let e1 = (integrate(&p, s0.clone(), 0.02, 1.0, Scheme::ImexCnab2).state.get(2, 0) - exact).abs();
        let e2 = (integrate(&p, s0, 0.01, 1.0, Scheme::ImexCnab2).state.get(2, 0) - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
    }

    #[test]
    fn killing_state_is_steady() {
        let st = setup(6);
        let f = make_catalog_forcing(ForcingKind::Zero, &st.grid, &st.basis, 6).unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let mut s0 = SpectralState::zeros(6);
        s0.coeffs[..3].copy_from_slice(&[0.4, -1.0, 0.7]);
        let mut sim = SimState::new(s0.clone(), 0.01);
        for _ in 0..20 {
            let next = step_imex(&sim, &p, 0.01).unwrap();
            assert!(next.state.axpy(-1.0, &sim.state).unwrap().norm() < 1e-12);
            sim = next;
        }
        assert!(sim.ledger_residual().abs() < 1e-12);
    }

    #[test]
    fn rk4_killing_exponentials() {
        let st = setup(4);
        for (sign, rate) in [(Sign::Plus, 1.0f64), (Sign::Minus, -1.0)] {
            let f = make_catalog_forcing(ForcingKind::F3(sign), &st.grid, &st.basis, 4).unwrap();
            let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
            let mut s0 = SpectralState::zeros(4);
            s0.coeffs[0] = 1.0;
            let end = integrate(&p, s0, 1e-3, 1.0, Scheme::Rk4);
            assert!((end.state.coeffs[0] - rate.exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn rk4_rejects_unstable_step() {
        let st = setup(6);
        let f = make_catalog_forcing(ForcingKind::Zero, &st.grid, &st.basis, 6).unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let sim = SimState::new(SpectralState::zeros(6), 1.0);
        assert!(matches!(step_rk4(&sim, &p, 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn constant_killing_forcing_is_affine() {
        let st = setup(4);
        let f = make_catalog_forcing(ForcingKind::ConstantKilling { c: 1.0, axis: 0 }, &st.grid, &st.basis, 4)
            .unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let end = integrate(&p, SpectralState::zeros(4), 1e-2, 1.0, Scheme::ImexCnab2);
        let alpha = st.basis.alpha_from_state(&end.state).unwrap();
        assert!((alpha[0] - 1.0).abs() < 1e-8);
        assert!(alpha[1].abs() < 1e-12 && alpha[2].abs() < 1e-12);
    }

    #[test]
    fn imex_agrees_with_rk4() {
        let st = setup(6);
        let f = make_catalog_forcing(ForcingKind::F3(Sign::Minus), &st.grid, &st.basis, 6).unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let s0 = random_state(&mut rng_from_seed(4), 6, 0.3, 0.5, 2.0);
        let a = integrate(&p, s0.clone(), 2.5e-4, 1.0, Scheme::ImexCnab2);
        let b = integrate(&p, s0, 2e-3, 1.0, Scheme::Rk4);
        assert!(a.state.axpy(-1.0, &b.state).unwrap().norm() < 1e-6);
    }

    #[test]
    fn adaptive_run_lands_on_t_end_and_tracks_fixed_run() {
        let st = setup(6);
        let f = make_catalog_forcing(ForcingKind::F3(Sign::Minus), &st.grid, &st.basis, 6).unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let s0 = random_state(&mut rng_from_seed(8), 6, 0.5, 3.0, 1.0);
        let h = cfl_dt(&st.grid, &s0, 0.5).unwrap();
        assert!((cfl_dt(&st.grid, &s0.scaled(2.0), 0.5).unwrap() - 0.5 * h).abs() < 1e-12 * h);
        assert_eq!(cfl_dt(&st.grid, &SpectralState::zeros(6), 0.5).unwrap(), f64::INFINITY);

        let cfg = StepperConfig { scheme: Scheme::ImexCnab2, dt: 2e-3, t_end: 0.5, stride: 7, cfl: Some(0.01) };
        let out = run(&cfg, &p, SimState::new(s0.clone(), cfg.dt)).unwrap();
        assert!((out.final_state.time() - 0.5).abs() < 1e-12);
        assert_eq!(out.records.last().unwrap().t, out.final_state.time());
        let fixed = integrate(&p, s0, 2.5e-4, 0.5, Scheme::ImexCnab2);
        assert!(out.final_state.state.axpy(-1.0, &fixed.state).unwrap().norm() < 1e-5);
        assert!(out.final_state.step > 250, "the CFL bound never engaged");
        assert!(out.final_state.ledger_residual().abs() < 1e-5);
    }

    #[test]
    fn divergence_keeps_last_good_state() {
        let st = setup(4);
        let f = make_catalog_forcing(ForcingKind::Zero, &st.grid, &st.basis, 4).unwrap();
        let p = Problem::new(&st.grid, &st.basis, &st.form, &f);
        let mut s0 = SpectralState::zeros(4);
        s0.coeffs[5] = f64::MAX;
        let sim = SimState::new(s0, 0.01);
        let cfg = StepperConfig { scheme: Scheme::ImexCnab2, dt: 0.01, t_end: 0.1, stride: 1, cfl: None };
        let out = run(&cfg, &p, sim).unwrap();
        assert!(matches!(out.outcome, Err(Error::Divergence { .. })));
        assert_eq!(out.final_state.step, 0);
    }

    #[test]
    fn config_validation() {
        let bad = StepperConfig { scheme: Scheme::Rk4, dt: 0.0, t_end: 1.0, stride: 1, cfl: None };
        assert!(bad.validate().is_err());
        let bad = StepperConfig { scheme: Scheme::Rk4, dt: 0.1, t_end: -1.0, stride: 1, cfl: None };
        assert!(bad.validate().is_err());
        let ok = StepperConfig { scheme: Scheme::Rk4, dt: 0.1, t_end: 1.0, stride: 1, cfl: None };
        assert_eq!(ok.n_steps(), 10);
    }
}
