use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use surfns_core::forcing::{make_catalog_forcing, ForcingKind, ForcingSpec, Sign};
use surfns_core::geometry::{build_sphere_grid, build_torus_grid, SurfaceGrid, ViscosityField};
use surfns_core::harmonics::{dealias_rule, synthesize, SpectralState};
use surfns_core::killing::{killing_basis, korn_constant, KillingBasis, KornEstimate};
use surfns_core::operators::{assemble_stokes, stokes_grid_degree, StokesForm};
use surfns_core::random::{derive_seed, random_state, rng_from_seed};
use surfns_core::timestepper::{run, Problem, RunOutput, SimState, StepperConfig};
use surfns_core::SurfaceKind;

use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::checks::{evaluate, CheckContext};
use crate::config::{Config, ForcingConfig, GeometrySpec, InitSpec, Mode, NuSpec, PairDirection};
use crate::ensemble::{run_ensemble, EnsembleReport};
use crate::error::{HarnessError, Result};
use crate::output;
use crate::report::{code_version, config_hash, RunReport};

/// Salt for the perturbation direction of pair runs.
const PAIR_STREAM: u64 = 0x5041_4952;

/// Grid, operators and forcing shared by every trajectory of a run.
#[derive(Debug)]
pub struct Model {
    pub grid: SurfaceGrid,
    pub basis: KillingBasis,
    pub nu: ViscosityField,
    pub form: StokesForm,
    pub forcing: ForcingSpec,
}

pub fn sphere_radius(cfg: &Config) -> Result<f64> {
    match cfg.geometry {
        GeometrySpec::Sphere { radius } => Ok(radius),
        GeometrySpec::Torus { .. } => Err(HarnessError::Unsupported(
            "time integration is available on the sphere only".into(),
        )),
    }
}

/// Quadrature degree used for a run: dealiased convection and exact Stokes assembly.
pub fn grid_degree(cfg: &Config) -> usize {
    cfg.grid_degree.unwrap_or_else(|| {
        dealias_rule(cfg.degree)
            .degree
            .max(stokes_grid_degree(cfg.degree, cfg.nu.polynomial_degree()))
    })
}

pub fn build_grid(cfg: &Config) -> Result<SurfaceGrid> {
    Ok(match cfg.geometry {
        GeometrySpec::Sphere { radius } => build_sphere_grid(grid_degree(cfg), radius)?,
        GeometrySpec::Torus {
            major,
            minor,
            n_pol,
            n_tor,
        } => build_torus_grid(n_pol, n_tor, major, minor)?,
    })
}

pub fn build_viscosity(cfg: &Config, grid: &SurfaceGrid) -> Result<ViscosityField> {
    Ok(match cfg.nu {
        NuSpec::Constant(v) => ViscosityField::constant(grid, v)?,
        NuSpec::LinearX3 { base, slope } => ViscosityField::linear_x3(grid, base, slope)?,
    })
}

pub fn state_from_modes(degree: usize, modes: &[Mode]) -> SpectralState {
    let mut s = SpectralState::zeros(degree);
    for &(l, m, a) in modes {
        let v = s.get(l, m);
        s.set(l, m, v + a);
    }
    s
}

fn sign(plus: bool) -> Sign {
    if plus {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

pub fn build_forcing(cfg: &Config, grid: &SurfaceGrid, basis: &KillingBasis) -> Result<ForcingSpec> {
    let field = |modes: &[Mode]| synthesize(grid, &state_from_modes(cfg.degree, modes));
    let kind = match &cfg.forcing {
        ForcingConfig::Zero => ForcingKind::Zero,
        ForcingConfig::F1 { modes } => ForcingKind::ConstantField(field(modes)?),
        ForcingConfig::F2 { plus, modes } => ForcingKind::F2 {
            sign: sign(*plus),
            v: field(modes)?,
        },
        ForcingConfig::F3 { plus } => ForcingKind::F3(sign(*plus)),
        ForcingConfig::F4 { plus, point } => ForcingKind::F4 {
            sign: sign(*plus),
            point: *point,
        },
        ForcingConfig::F5 => ForcingKind::F5,
        ForcingConfig::ConstantKilling { c, axis } => ForcingKind::ConstantKilling { c: *c, axis: axis - 1 },
    };
    Ok(make_catalog_forcing(kind, grid, basis, cfg.degree)?)
}

pub fn build_model(cfg: &Config) -> Result<Model> {
    sphere_radius(cfg)?;
    let grid = build_grid(cfg)?;
    let basis = killing_basis(&grid)?;
    let nu = build_viscosity(cfg, &grid)?;
    let form = assemble_stokes(&grid, &nu, cfg.degree)?;
    let forcing = build_forcing(cfg, &grid, &basis)?;
    Ok(Model {
        grid,
        basis,
        nu,
        form,
        forcing,
    })
}

pub fn initial_state(cfg: &Config, seed: u64) -> Result<SimState> {
    let l = cfg.degree;
    let s = match &cfg.init {
        InitSpec::Zero => SpectralState::zeros(l),
        InitSpec::Modes(modes) => state_from_modes(l, modes),
        InitSpec::Random { norm_k, norm_nk, decay } => {
            random_state(&mut rng_from_seed(seed), l, *norm_k, *norm_nk, *decay)
        }
        InitSpec::Checkpoint(path) => {
            let ck = load_checkpoint(path)?;
            let radius = sphere_radius(cfg)?;
            if ck.geometry != (SurfaceKind::Sphere { radius }) || ck.sim.state.degree() != l {
                return Err(HarnessError::Unsupported(format!(
                    "checkpoint {} does not match the configured geometry and degree",
                    path.display()
                )));
            }
            return Ok(ck.sim);
        }
    };
    Ok(SimState::new(s, cfg.time.dt))
}

pub fn stepper_config(cfg: &Config) -> StepperConfig {
    StepperConfig {
        scheme: cfg.time.scheme,
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        stride: cfg.time.stride,
        cfl: cfg.time.cfl,
    }
}

pub fn integrate(cfg: &Config, model: &Model, init: SimState) -> Result<RunOutput> {
    let mut problem = Problem::new(&model.grid, &model.basis, &model.form, &model.forcing);
    problem.linear = cfg.time.linear;
    Ok(run(&stepper_config(cfg), &problem, init)?)
}

/// Unit-norm perturbation direction for pair runs.
pub fn pair_direction(cfg: &Config) -> Option<SpectralState> {
    let pair = cfg.pair.as_ref()?;
    let d = match &pair.direction {
        PairDirection::Modes(modes) => state_from_modes(cfg.degree, modes),
        PairDirection::Random { decay } => {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, PAIR_STREAM));
            random_state(&mut rng, cfg.degree, 1.0, 1.0, *decay)
        }
    };
    let n = d.norm();
    (n > 0.0).then(|| d.scaled(1.0 / n))
}

/// Trajectories started at `u₀ + gap·d`, one per configured gap.
pub fn run_pairs(cfg: &Config, model: &Model, init: &SimState) -> Result<Vec<(f64, RunOutput)>> {
    let (Some(pair), Some(dir)) = (cfg.pair.as_ref(), pair_direction(cfg)) else {
        return Ok(vec![]);
    };
    pair.gaps
        .par_iter()
        .map(|&gap| {
            let s = init.state.axpy(gap, &dir)?;
            let out = integrate(cfg, model, SimState::new(s, cfg.time.dt))?;
            Ok((gap, out))
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Execution {
    pub report: RunReport,
    pub output: RunOutput,
    pub ensemble: Option<EnsembleReport>,
    pub model: Model,
}

pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build()?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Runs the configured scenario, evaluates its checks and writes outputs.
pub fn execute(cfg: &Config, opts: &RunOptions) -> Result<Execution> {
    let start = Instant::now();
    let exec = with_threads(opts.threads, || -> Result<Execution> {
        let model = build_model(cfg)?;
        let init = initial_state(cfg, cfg.seed)?;
        let output = integrate(cfg, &model, init.clone())?;
        let pairs = run_pairs(cfg, &model, &init)?;
        let ensemble = cfg.ensemble_members.map(|n| run_ensemble(cfg, &model, n));
        let ctx = CheckContext {
            cfg,
            model: &model,
            output: &output,
            pairs: &pairs,
            ensemble: ensemble.as_ref(),
        };
        let checks: Vec<_> = cfg.checks.iter().map(|c| evaluate(c, &ctx)).collect();
        let diverged = output.outcome.as_ref().err().map(|e| e.to_string());
        let report = RunReport {
            scenario: cfg.name.clone(),
            claims: cfg.claims.clone(),
            passed: diverged.is_none() && checks.iter().all(|c| c.passed),
            diverged,
            checks,
            samples: output.records.len(),
            timing_seconds: 0.0,
            seed: cfg.seed,
            threads: rayon::current_num_threads(),
            config_hash: config_hash(cfg),
            code_version: code_version(),
        };
        Ok(Execution {
            report,
            output,
            ensemble,
            model,
        })
    })??;
    let mut exec = exec;
    exec.report.timing_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = &opts.out_dir {
        write_outputs(dir, cfg, &exec)?;
    }
    Ok(exec)
}

pub fn write_outputs(dir: &Path, cfg: &Config, exec: &Execution) -> Result<()> {
    fs::create_dir_all(dir)?;
    let name = &cfg.name;
    fs::write(dir.join(format!("{name}.csv")), output::records_to_string(&exec.output.records))?;
    fs::write(dir.join(format!("{name}.report.json")), exec.report.to_json())?;
    let ck = Checkpoint {
        geometry: exec.model.grid.kind(),
        sim: exec.output.final_state.clone(),
    };
    save_checkpoint(&ck, &dir.join(format!("{name}.ckpt")))?;
    if let Some(ens) = &exec.ensemble {
        let mut buf = Vec::new();
        output::write_ensemble(&mut buf, ens).map_err(|e| HarnessError::Io(e.into()))?;
        fs::write(dir.join(format!("{name}.ensemble.csv")), buf)?;
    }
    Ok(())
}

/// `(l, λ_l)` for unit viscosity and the sorted eigenvalues of the assembled form.
pub fn spectrum(cfg: &Config) -> Result<(Vec<(usize, f64)>, Vec<f64>)> {
    sphere_radius(cfg)?;
    let grid = build_sphere_grid(stokes_grid_degree(cfg.degree, cfg.nu.polynomial_degree()), sphere_radius(cfg)?)?;
    let nu = build_viscosity(cfg, &grid)?;
    let form = assemble_stokes(&grid, &nu, cfg.degree)?;
    let per_degree = (1..=cfg.degree).map(|l| (l, form.lambda(l))).collect();
    Ok((per_degree, form.spectrum()))
}

/// Korn constants for each configured truncation (default: the spectral degree).
pub fn korn(cfg: &Config) -> Result<Vec<KornEstimate>> {
    let grid = match cfg.geometry {
        GeometrySpec::Sphere { radius } => build_sphere_grid(2, radius)?,
        _ => build_grid(cfg)?,
    };
    let truncations = if cfg.korn_truncations.is_empty() {
        vec![cfg.degree]
    } else {
        cfg.korn_truncations.clone()
    };
    truncations
        .iter()
        .map(|&t| Ok(korn_constant(&grid, t)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub time: f64,
    pub alpha: Vec<f64>,
    pub norm_uk: f64,
    pub norm_unk: f64,
}

pub fn decompose(ck: &Checkpoint) -> Result<Decomposition> {
    let s = &ck.sim.state;
    let radius = match ck.geometry {
        SurfaceKind::Sphere { radius } => radius,
        SurfaceKind::Torus { .. } => {
            return Err(HarnessError::Unsupported("decomposition needs a sphere checkpoint".into()))
        }
    };
    let grid = build_sphere_grid(s.degree() + 1, radius)?;
    let basis = killing_basis(&grid)?;
    Ok(Decomposition {
        time: s.time,
        alpha: basis.alpha_from_state(s)?,
        norm_uk: s.killing_norm_sq().sqrt(),
        norm_unk: s.non_killing_norm_sq().sqrt(),
    })
}
