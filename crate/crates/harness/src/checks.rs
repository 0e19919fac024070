//! Evaluation of declared checks against run output.

use surfns_core::diagnostics::{
    check_killing_identity, check_series_monotone_with_slack, continuous_dependence_ratio, fit_decay_rate,
    lambda_quotient, lambda_series, ratio_spread, DiagnosticsRecord, Direction,
};
use surfns_core::forcing::hypothesis_check;
use surfns_core::harmonics::SpectralState;
use surfns_core::timestepper::RunOutput;

use crate::config::{CheckKind, CheckSpec, Config, ForcingConfig, InitSpec};
use crate::ensemble::{EnsembleReport, COL_NORM_UK, COL_NORM_UNK};
use crate::report::CheckResult;
use crate::runner::Model;

pub struct CheckContext<'a> {
    pub cfg: &'a Config,
    pub model: &'a Model,
    pub output: &'a RunOutput,
    /// `(gap, trajectory)` for each perturbed companion run.
    pub pairs: &'a [(f64, RunOutput)],
    pub ensemble: Option<&'a EnsembleReport>,
}

struct Verdict {
    passed: bool,
    measured: f64,
    expected: f64,
    relation: &'static str,
    detail: String,
}

fn at_most(measured: f64, tol: f64) -> Verdict {
    Verdict {
        passed: measured <= tol,
        measured,
        expected: 0.0,
        relation: "measured <= tolerance",
        detail: String::new(),
    }
}

fn failure(detail: impl Into<String>) -> Verdict {
    Verdict {
        passed: false,
        measured: f64::NAN,
        expected: f64::NAN,
        relation: "not evaluated",
        detail: detail.into(),
    }
}

/// Largest relative step against `direction`, and the verdict with slack `rel`.
fn monotone(values: &[f64], direction: Direction, rel: f64) -> Verdict {
    let worst = values
        .windows(2)
        .map(|w| {
            let step = (w[1] - w[0]) / w[0].abs().max(1.0);
            match direction {
                Direction::Nonincreasing => step,
                Direction::Nondecreasing => -step,
            }
        })
        .fold(0.0, f64::max);
    let report = check_series_monotone_with_slack(values, direction, rel);
    Verdict {
        passed: report.passed,
        measured: worst,
        expected: 0.0,
        relation: "largest relative step against the direction <= tolerance",
        detail: report
            .first_violation
            .map(|(i, a, b)| format!("first violation at sample {i}: {a:e} -> {b:e}"))
            .unwrap_or_default(),
    }
}

fn slowest_rate(model: &Model) -> f64 {
    // smallest eigenvalue above the Killing kernel
    model.form.spectrum()[3]
}

fn decay_fit(ctx: &CheckContext) -> Result<(f64, f64, String), String> {
    let series: Vec<(f64, f64)> = match ctx.ensemble {
        Some(e) => e
            .aggregates
            .iter()
            .map(|a| (a.t, a.stats[COL_NORM_UNK].max.powi(2)))
            .collect(),
        None => ctx.output.records.iter().map(|r| (r.t, r.norm_unk.powi(2))).collect(),
    };
    let fit = fit_decay_rate(&series, ctx.cfg.fit_window).map_err(|e| e.to_string())?;
    let expected = 2.0 * slowest_rate(ctx.model);
    let mut detail = format!("omega_hat={:e}, fit residual={:e}, samples={}", fit.omega, fit.residual, fit.n_used);
    if let Some(w) = &fit.warning {
        detail.push_str(&format!(", warning: {w}"));
    }
    Ok((fit.zeta, expected, detail))
}

fn differences(a: &RunOutput, b: &RunOutput) -> Result<Vec<SpectralState>, String> {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            let mut d = y.axpy(-1.0, x).map_err(|e| e.to_string())?;
            d.time = x.time;
            Ok(d)
        })
        .collect()
}

fn verdict(spec: &CheckSpec, ctx: &CheckContext) -> Verdict {
    let tol = spec.value;
    let records: &[DiagnosticsRecord] = &ctx.output.records;
    let model = ctx.model;
    match spec.kind {
        CheckKind::EnergyLedger => {
            let m = records
                .iter()
                .map(|r| r.energy_residual.abs() / r.energy.max(1.0))
                .fold(0.0, f64::max);
            Verdict {
                relation: "max |residual| / max(E, 1) <= tolerance",
                ..at_most(m, tol)
            }
        }
        CheckKind::KillingDrift => {
            let a0 = &records[0].alpha;
            let m = records
                .iter()
                .flat_map(|r| r.alpha.iter().zip(a0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            Verdict {
                relation: "max_j |alpha_j(t) - alpha_j(0)| <= tolerance",
                ..at_most(m, tol)
            }
        }
        CheckKind::KillingAffine | CheckKind::KillingUk2 => {
            match check_killing_identity(records, &model.forcing, &model.basis) {
                Err(e) => failure(e.to_string()),
                Ok(rep) => {
                    let detail = format!(
                        "|f_K|={:e}, (f_K,u_K) slope={:e}, deviation={:e}",
                        rep.forcing_norm, rep.fd_slope, rep.fd_deviation
                    );
                    if spec.kind == CheckKind::KillingAffine {
                        Verdict {
                            relation: "max |alpha(t) - alpha(0) - t beta| <= tolerance",
                            detail,
                            ..at_most(rep.affine_deviation.max(rep.fd_deviation), tol)
                        }
                    } else {
                        match rep.uk2_deviation {
                            Some(d) => Verdict {
                                relation: "max | |u_K(t)|^2 - closed form | <= tolerance",
                                detail,
                                ..at_most(d, tol)
                            },
                            None => failure(format!("the squared-norm law needs |f_K| = 1; {detail}")),
                        }
                    }
                }
            }
        }
        CheckKind::UkNonincreasing | CheckKind::UkNondecreasing => {
            let v: Vec<f64> = records.iter().map(|r| r.norm_uk).collect();
            let dir = if spec.kind == CheckKind::UkNonincreasing {
                Direction::Nonincreasing
            } else {
                Direction::Nondecreasing
            };
            monotone(&v, dir, tol)
        }
        CheckKind::UkExponential => {
            let rate = match ctx.cfg.forcing {
                ForcingConfig::F3 { plus } => {
                    if plus {
                        1.0
                    } else {
                        -1.0
                    }
                }
                _ => return failure("the exponential law applies to f3+ and f3- only"),
            };
            let k0 = records[0].norm_uk;
            if k0 == 0.0 {
                return failure("|u_K(0)| = 0");
            }
            let m = records
                .iter()
                .map(|r| {
                    let exact = (rate * r.t).exp() * k0;
                    (r.norm_uk - exact).abs() / exact
                })
                .fold(0.0, f64::max);
            Verdict {
                relation: "max relative deviation from exp(±t)|u_K(0)| <= tolerance",
                ..at_most(m, tol)
            }
        }
        CheckKind::UnkDecreasing => {
            let v: Vec<f64> = records.iter().map(|r| r.norm_unk).collect();
            monotone(&v, Direction::Nonincreasing, tol)
        }
        CheckKind::DecayRate => match decay_fit(ctx) {
            Err(e) => failure(e),
            Ok((zeta, expected, detail)) => Verdict {
                passed: ((zeta - expected) / expected).abs() <= tol,
                measured: zeta,
                expected,
                relation: "|zeta - 2 lambda_min| / (2 lambda_min) <= tolerance",
                detail,
            },
        },
        CheckKind::DecayRateMin => match decay_fit(ctx) {
            Err(e) => failure(e),
            Ok((zeta, expected, detail)) => Verdict {
                passed: zeta >= expected * (1.0 - tol),
                measured: zeta,
                expected,
                relation: "zeta >= 2 lambda_min (1 - tolerance)",
                detail,
            },
        },
        CheckKind::EigenDecay => {
            let (l, m) = match &ctx.cfg.init {
                InitSpec::Modes(modes) if modes.len() == 1 => (modes[0].0, modes[0].1),
                _ => return failure("needs a single-mode initial condition"),
            };
            let unit = match SpectralState::unit_mode(ctx.cfg.degree, l, m) {
                Ok(u) => u,
                Err(e) => return failure(e.to_string()),
            };
            let lambda = match lambda_quotient(&model.form, &unit) {
                Ok(Some(x)) => x,
                _ => return failure("undefined Rayleigh quotient"),
            };
            let states = &ctx.output.states;
            let c0 = states[0].get(l, m);
            let dev = states
                .iter()
                .map(|s| {
                    let exact = (-lambda * s.time).exp();
                    (s.get(l, m) / c0 - exact).abs() / exact
                })
                .fold(0.0, f64::max);
            Verdict {
                relation: "max relative deviation from exp(-lambda t) <= tolerance",
                detail: format!("lambda={lambda:e}"),
                ..at_most(dev, tol)
            }
        }
        CheckKind::UniformBound => {
            let m = records.iter().map(|r| r.norm_unk).fold(0.0, f64::max);
            Verdict {
                relation: "sup_t |u_NK(t)| <= bound",
                ..at_most(m, tol)
            }
        }
        CheckKind::Hypotheses => {
            let n = tol.max(10.0) as usize;
            match hypothesis_check(&model.forcing, &model.grid, &model.basis, n, ctx.cfg.seed) {
                Err(e) => failure(e.to_string()),
                Ok(rep) => Verdict {
                    passed: rep.passed(),
                    measured: rep.violations.len() as f64,
                    expected: 0.0,
                    relation: "no violated hypothesis over the samples (tolerance = sample count)",
                    detail: format!(
                        "C1={:e} C2={:e} (f_K,u) in [{:e}, {:e}] C5={:e} C6={:e}{}",
                        rep.c1_hat,
                        rep.c2_hat,
                        rep.killing_work_min,
                        rep.killing_work_max,
                        rep.c5_hat,
                        rep.c6_hat,
                        if rep.violations.is_empty() {
                            String::new()
                        } else {
                            format!("; {}", rep.violations.join("; "))
                        }
                    ),
                },
            }
        }
        CheckKind::ContinuousDependence => {
            let mut ratios = Vec::new();
            for (gap, out) in ctx.pairs {
                match continuous_dependence_ratio(&ctx.output.states, &out.states, &model.form, ctx.cfg.time.t_end) {
                    Ok(r) => ratios.push((gap, r.sup_ratio)),
                    Err(e) => return failure(e.to_string()),
                }
            }
            let values: Vec<f64> = ratios.iter().map(|r| r.1).collect();
            Verdict {
                passed: ratio_spread(&values) <= tol,
                measured: ratio_spread(&values),
                expected: 1.0,
                relation: "max/min of the sup ratios over the gaps <= tolerance",
                detail: ratios
                    .iter()
                    .map(|(g, r)| format!("gap {g:e}: {r:e}"))
                    .collect::<Vec<_>>()
                    .join(", "),
            }
        }
        CheckKind::LambdaAffine => {
            let diffs = match differences(ctx.output, &ctx.pairs[0].1) {
                Ok(d) => d,
                Err(e) => return failure(e),
            };
            match lambda_series(&diffs, &model.form) {
                Err(e) => failure(e.to_string()),
                Ok(ls) => {
                    let finite = ls.truncated_at.is_none() && ls.lambda.iter().all(|x| x.is_finite());
                    Verdict {
                        passed: finite && ls.fit_residual <= tol,
                        measured: ls.fit_residual,
                        expected: 0.0,
                        relation: "Lambda finite at every sample and affine-fit residual of L(t) <= tolerance",
                        detail: format!(
                            "max Lambda={:e}, slope={:e}, growth constant={:e}{}",
                            ls.max_lambda,
                            ls.fit.0,
                            ls.growth_constant,
                            ls.truncated_at
                                .map(|i| format!(", difference vanished at sample {i}"))
                                .unwrap_or_default()
                        ),
                    }
                }
            }
        }
        CheckKind::NoCrossing => {
            let diffs = match differences(ctx.output, &ctx.pairs[0].1) {
                Ok(d) => d,
                Err(e) => return failure(e),
            };
            let m = diffs.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
            Verdict {
                passed: m >= tol,
                measured: m,
                expected: tol,
                relation: "min_t |u1(t) - u2(t)| >= floor",
                detail: String::new(),
            }
        }
        CheckKind::AbsorbingEntry => {
            let e = ctx.ensemble.expect("validated at parse time");
            let t = e.entry_time.unwrap_or(f64::INFINITY);
            Verdict {
                passed: t <= tol,
                measured: t,
                expected: tol,
                relation: "entry time into the ball of radius sqrt(1/2 + omega) <= bound",
                detail: format!("omega_hat={:e}, radius={:e}", e.omega_hat, e.entry_radius),
            }
        }
        CheckKind::EnsembleUnkDecreasing => {
            let e = ctx.ensemble.expect("validated at parse time");
            let v: Vec<f64> = e.column(COL_NORM_UNK).iter().map(|s| s.max).collect();
            monotone(&v, Direction::Nonincreasing, tol)
        }
        CheckKind::EnsembleUkMinNondecreasing => {
            let e = ctx.ensemble.expect("validated at parse time");
            let v: Vec<f64> = e.column(COL_NORM_UK).iter().map(|s| s.min).collect();
            monotone(&v, Direction::Nondecreasing, tol)
        }
        CheckKind::EnsembleConstant => {
            let e = ctx.ensemble.expect("validated at parse time");
            let first = &e.aggregates[0];
            let m = e
                .aggregates
                .iter()
                .flat_map(|a| {
                    a.stats.iter().zip(&first.stats).flat_map(|(s, f)| {
                        [(s.max, f.max), (s.min, f.min), (s.mean, f.mean)]
                            .into_iter()
                            .filter(|(x, y)| x.is_finite() && y.is_finite())
                            .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
                    })
                })
                .fold(0.0, f64::max);
            let failed = e.members.iter().filter(|m| m.error.is_some()).count();
            Verdict {
                passed: m <= tol && failed == 0,
                measured: m,
                expected: 0.0,
                relation: "max relative change of every aggregate <= tolerance",
                detail: format!("{failed} failed members"),
            }
        }
    }
}

pub fn evaluate(spec: &CheckSpec, ctx: &CheckContext) -> CheckResult {
    let v = verdict(spec, ctx);
    CheckResult {
        name: spec.kind.name().to_string(),
        passed: v.passed,
        measured: v.measured,
        expected: v.expected,
        tolerance: spec.value,
        relation: v.relation.to_string(),
        detail: v.detail,
    }
}
