//! Built-in scenarios. Each is an ordinary config text, so a scenario can be
//! dumped, edited and re-run through `surfns run`.

use std::path::Path;

use crate::config::Config;
use crate::error::{HarnessError, Result};
use crate::report::RunReport;
use crate::runner::{execute, RunOptions};

pub struct Builtin {
    pub name: &'static str,
    pub text: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "free_decay_l2",
        text: "
name = free_decay_l2
claims = non-Killing decay: with f = 0 and constant viscosity, |u_NK|^2 decays at rate 2 lambda_2
spectral.degree = 8
forcing.tag = zero
init.kind = modes
init.modes = 2:0:1.0, 3:1:0.3
time.dt = 1e-3
time.t_end = 4
time.stride = 20
fit.window = 1.5, 3
check.decay_rate = 1e-3
check.unk_decreasing = 1e-10
check.energy_ledger = 1e-6
",
    },
    Builtin {
        name: "eigenmode_decay",
        text: "
name = eigenmode_decay
claims = Killing kernel of the strain form: a single degree-2 mode decays as exp(-lambda_2 t) while degree 1 is undamped
spectral.degree = 8
forcing.tag = zero
init.kind = modes
init.modes = 2:0:1.0
time.scheme = rk4
time.dt = 1e-3
time.t_end = 1
time.stride = 50
check.eigen_decay = 1e-6
check.energy_ledger = 1e-8
",
    },
    Builtin {
        name: "constant_killing_growth",
        text: "
name = constant_killing_growth
claims = Killing-component law for u-independent f_K: u_K(t) = u_K(0) + t f_K, so |u_K(t)|^2 = t^2 for |f_K| = 1
spectral.degree = 8
forcing.tag = constant_killing
forcing.axis = 1
forcing.c = 1
init.kind = zero
time.dt = 1e-3
time.t_end = 2
time.stride = 50
check.killing_affine = 1e-8
check.killing_uk2 = 1e-6
check.uk_nondecreasing = 1e-10
check.energy_ledger = 1e-6
",
    },
    Builtin {
        name: "killing_conserved_f1",
        text: "
name = killing_conserved_f1
claims = attractor for f_K = 0: the Killing component is conserved, u_K(t) = u_K(0)
spectral.degree = 12
forcing.tag = f1
forcing.modes = 2:0:1.0
init.kind = random
init.norm_k = 0.5
init.norm_nk = 0.5
time.dt = 1e-3
time.t_end = 5
time.stride = 50
seed = 11
check.killing_drift = 1e-10
check.energy_ledger = 1e-6
check.hypotheses = 20
",
    },
    Builtin {
        name: "killing_decay_f3_minus",
        text: "
name = killing_decay_f3_minus
claims = Killing-component bounds, negative case: (f_K, u) <= 0 makes |u_K| nonincreasing; for f3- |u_K(t)| = exp(-t)|u_K(0)|
spectral.degree = 8
forcing.tag = f3-
init.kind = random
init.norm_k = 1
init.norm_nk = 1
time.dt = 5e-4
time.t_end = 1
time.stride = 50
seed = 3
check.uk_exponential = 1e-6
check.uk_nonincreasing = 1e-10
check.hypotheses = 20
",
    },
    Builtin {
        name: "killing_growth_f3_plus",
        text: "
name = killing_growth_f3_plus
claims = Killing-component bounds, positive case: (f_K, u) >= 0 makes |u_K| nondecreasing; for f3+ |u_K(t)| = exp(t)|u_K(0)|
spectral.degree = 8
forcing.tag = f3+
init.kind = random
init.norm_k = 1
init.norm_nk = 1
time.dt = 5e-4
time.t_end = 1
time.stride = 50
seed = 3
check.uk_exponential = 1e-6
check.uk_nondecreasing = 1e-10
",
    },
    Builtin {
        name: "energy_balance_variable_nu",
        text: "
name = energy_balance_variable_nu
claims = energy equality with variable viscosity: E(t) - E(0) + int D = int W
spectral.degree = 16
nu.formula = linear_x3
nu.base = 1
nu.slope = 0.5
forcing.tag = f2-
forcing.modes = 2:0:1.0
init.kind = random
init.norm_k = 0.5
init.norm_nk = 0.5
time.dt = 1e-3
time.t_end = 1
time.stride = 20
seed = 5
check.energy_ledger = 1e-6
check.uk_nonincreasing = 1e-10
",
    },
    Builtin {
        name: "nonkilling_decay_ensemble",
        text: "
name = nonkilling_decay_ensemble
claims = exponential decay of the non-Killing component and the absorbing ball of radius sqrt(1/2 + omega)
spectral.degree = 10
forcing.tag = zero
init.kind = random
init.norm_k = 0.5
init.norm_nk = 1
time.dt = 1e-3
time.t_end = 4
time.stride = 20
ensemble.members = 8
fit.window = 1.5, 3.5
seed = 7
check.ensemble_unk_decreasing = 1e-10
check.decay_rate_min = 0.01
check.absorbing_entry = 4
",
    },
    Builtin {
        name: "sigma_attractor_f2_minus",
        text: "
name = sigma_attractor_f2_minus
claims = sigma-attractor: bounded sets enter the absorbing ball and the Killing part decays under f2-
spectral.degree = 10
forcing.tag = f2-
forcing.modes = 2:0:0.5
init.kind = random
init.norm_k = 1
init.norm_nk = 3
time.dt = 1e-3
time.t_end = 3
time.stride = 20
ensemble.members = 6
seed = 17
check.absorbing_entry = 3
check.hypotheses = 20
",
    },
    Builtin {
        name: "unbounded_attractor_f3_plus",
        text: "
name = unbounded_attractor_f3_plus
claims = unbounded attractor regime: with (f_K, u) >= 0 the Killing norm of every member is nondecreasing
spectral.degree = 8
forcing.tag = f3+
init.kind = random
init.norm_k = 0.5
init.norm_nk = 1
time.dt = 1e-3
time.t_end = 1
time.stride = 20
ensemble.members = 6
seed = 19
check.ensemble_uk_min_nondecreasing = 1e-10
",
    },
    Builtin {
        name: "killing_equilibria",
        text: "
name = killing_equilibria
claims = with f = 0 every Killing field is an equilibrium, so the attractor is the Killing space itself
spectral.degree = 8
forcing.tag = zero
init.kind = random
init.norm_k = 1
init.norm_nk = 0
time.dt = 1e-2
time.t_end = 1
time.stride = 10
ensemble.members = 4
seed = 23
check.ensemble_constant = 1e-12
check.energy_ledger = 1e-12
",
    },
    Builtin {
        name: "regularization_f4_minus",
        text: "
name = regularization_f4_minus
claims = instantaneous regularization: solutions stay uniformly bounded; f4- has (f_K, u) <= 0
spectral.degree = 10
forcing.tag = f4-
forcing.point = 0, 0, 1
init.kind = random
init.norm_k = 0.5
init.norm_nk = 0.5
init.decay = 0.5
time.dt = 1e-3
time.t_end = 2
time.stride = 20
seed = 29
check.uniform_bound = 1
check.uk_nonincreasing = 1e-10
check.energy_ledger = 1e-6
check.hypotheses = 20
",
    },
    Builtin {
        name: "f5_radial_weight",
        text: "
name = f5_radial_weight
claims = forcing f5 = (I - P_K)(|x| u) - u satisfies the Killing negative case and the mixed non-Killing bound
geometry.radius = 2
spectral.degree = 8
forcing.tag = f5
init.kind = random
init.norm_k = 0.5
init.norm_nk = 0.5
time.dt = 1e-3
time.t_end = 1
time.stride = 20
seed = 31
check.uk_nonincreasing = 1e-10
check.energy_ledger = 1e-6
check.hypotheses = 20
",
    },
    Builtin {
        name: "backward_uniqueness_pair",
        text: "
name = backward_uniqueness_pair
claims = backward uniqueness: the difference quotient Lambda stays finite and L = -1/2 log |u1 - u2|^2 grows at most affinely
spectral.degree = 10
forcing.tag = f2-
forcing.modes = 2:0:0.5
init.kind = random
init.norm_k = 0.3
init.norm_nk = 0.5
time.dt = 1e-3
time.t_end = 2
time.stride = 20
pair.gaps = 1e-6
pair.modes = 2:0:1, 2:1:0.5, 3:2:0.1
seed = 37
check.lambda_affine = 0.05
check.no_crossing = 1e-13
",
    },
    Builtin {
        name: "continuous_dependence",
        text: "
name = continuous_dependence
claims = continuous dependence on initial data: sup_t |u1 - u2|^2 / |u1(0) - u2(0)|^2 is uniform in the gap
spectral.degree = 10
forcing.tag = f2-
forcing.modes = 2:0:0.5
init.kind = random
init.norm_k = 0.5
init.norm_nk = 1
time.dt = 1e-3
time.t_end = 1
time.stride = 20
pair.gaps = 1e-2, 1e-3, 1e-4
seed = 41
check.continuous_dependence = 2
",
    },
    Builtin {
        name: "solutions_do_not_cross",
        text: "
name = solutions_do_not_cross
claims = solutions do not cross: distinct initial data never meet at a later time
spectral.degree = 8
forcing.tag = f4+
forcing.point = 1, 0, 0
init.kind = random
init.norm_k = 0.5
init.norm_nk = 0.5
time.dt = 1e-3
time.t_end = 1
time.stride = 20
pair.gaps = 1e-3
seed = 43
check.no_crossing = 1e-8
check.energy_ledger = 1e-6
",
    },
];

pub fn list_scenarios() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

pub fn scenario_text(name: &str) -> Result<&'static str> {
    BUILTINS
        .iter()
        .find(|b| b.name == name)
        .map(|b| b.text)
        .ok_or_else(|| HarnessError::UnknownScenario(name.to_string()))
}

pub fn builtin(name: &str) -> Result<Config> {
    Ok(Config::parse(scenario_text(name)?)?)
}

/// Runs a built-in scenario by name, or a config file when `target` is not a
/// registered name.
pub fn run_scenario(target: &str, opts: &RunOptions) -> Result<RunReport> {
    let cfg = match scenario_text(target) {
        Ok(text) => Config::parse(text)?,
        Err(e) if !Path::new(target).exists() => return Err(e),
        Err(_) => Config::from_file(Path::new(target))?,
    };
    Ok(execute(&cfg, opts)?.report)
}
