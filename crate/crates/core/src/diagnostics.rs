//! Observables along trajectories and the checks built on them.

use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::geometry::SurfaceGrid;
use crate::harmonics::SpectralState;
use crate::killing::KillingBasis;
use crate::operators::StokesForm;
use crate::timestepper::SimState;

/// `‖u‖` below which `Λ` is reported as undefined.
pub const LAMBDA_FLOOR: f64 = 1e-13;

/// Per-sample scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub norm_u: f64,
    pub norm_uk: f64,
    pub norm_unk: f64,
    pub energy: f64,
    /// `∫ 2ν |ε_Γ(u)|²`.
    pub dissipation: f64,
    /// `∫ f·u`.
    pub work: f64,
    pub energy_residual: f64,
    /// `Λ = D / ‖u‖²`, `None` when `‖u‖` is below [`LAMBDA_FLOOR`].
    pub lambda: Option<f64>,
    pub alpha: Vec<f64>,
}

pub fn record(
    grid: &SurfaceGrid,
    basis: &KillingBasis,
    form: &StokesForm,
    spec: &ForcingSpec,
    sim: &SimState,
) -> Result<DiagnosticsRecord> {
    let s = &sim.state;
    let dissipation = form.dissipation(s)?;
    let work = spec.apply(grid, basis, s)?.dot(s);
    let norm_sq = s.norm_sq();
    let norm_u = norm_sq.sqrt();
    Ok(DiagnosticsRecord {
        t: s.time,
        norm_u,
        norm_uk: s.killing_norm_sq().sqrt(),
        norm_unk: s.non_killing_norm_sq().sqrt(),
        energy: 0.5 * norm_sq,
        dissipation,
        work,
        energy_residual: sim.ledger_residual(),
        lambda: (norm_u >= LAMBDA_FLOOR).then(|| dissipation / norm_sq),
        alpha: basis.alpha_from_state(s)?,
    })
}

/// `Λ(u) = ∫2ν|ε_Γ(u)|² / ‖u‖²`.
pub fn lambda_quotient(form: &StokesForm, s: &SpectralState) -> Result<Option<f64>> {
    let n = s.norm_sq();
    if n.sqrt() < LAMBDA_FLOOR {
        return Ok(None);
    }
    Ok(Some(form.dissipation(s)? / n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub zeta: f64,
    pub omega: f64,
    /// RMS deviation of `log(x - ω̂)` from the fitted line.
    pub residual: f64,
    pub n_used: usize,
    pub warning: Option<String>,
}

/// Fits `x(t) ≈ C e^{-ζt} + ω` to samples `(t, x)` with `x = ‖u_NK‖²`.
///
/// `ω̂` is the mean of the last 10% of all samples (set to 0 below 1e-12);
/// `ζ̂` is the least-squares slope of `log(x - ω̂)` over samples inside
/// `window` (all samples when `None`) with `x > ω̂`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    if series.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs at least 10 samples, got {}",
            series.len()
        )));
    }
    if series.iter().any(|(_, x)| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidParameter("decay fit needs nonnegative finite values".into()));
    }
    let n_tail = series.len().div_ceil(10);
    let tail = &series[series.len() - n_tail..];
    let mut omega = tail.iter().map(|p| p.1).sum::<f64>() / n_tail as f64;
    if omega < 1e-12 {
        omega = 0.0;
    }
    let mut warning = None;
    let spread = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if tail.windows(2).any(|w| w[1].1 > w[0].1 * (1.0 + 1e-8) + 1e-300) && spread > 1e-6 * omega.max(1e-12) {
        warning = Some("tail is not monotone; plateau estimate is unreliable".into());
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| window.is_none_or(|(a, b)| *t >= a && *t <= b))
        .filter(|(_, x)| *x - omega > 0.0)
        .map(|(t, x)| (*t, (x - omega).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Undefined("no samples above the plateau inside the fit window".into()));
    }
    let (slope, intercept) = least_squares_line(&pts);
    let residual = (pts
        .iter()
        .map(|(t, y)| (y - intercept - slope * t).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(DecayFit {
        zeta: -slope,
        omega,
        residual,
        n_used: pts.len(),
        warning,
    })
}

/// `(slope, intercept)` of the least-squares line through `pts`.
pub fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in pts {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KillingIdentityReport {
    /// `‖f_K‖`.
    pub forcing_norm: f64,
    /// Max deviation of `∫f_K·u_K(t)` from `∫f_K·u_K(0) + t‖f_K‖²`.
    pub fd_deviation: f64,
    /// Least-squares slope of `∫f_K·u_K(t)` against `t`.
    pub fd_slope: f64,
    /// Max `|α(t) - α(0) - t β|` with `β` the coordinates of `f_K`.
    pub affine_deviation: f64,
    /// Max deviation from the closed-form `‖u_K(t)‖²`; only when `‖f_K‖ = 1`.
    pub uk2_deviation: Option<f64>,
}

/// Checks the exact Killing dynamics for a forcing whose Killing part does
/// not depend on `u`.
pub fn check_killing_identity(
    records: &[DiagnosticsRecord],
    spec: &ForcingSpec,
    basis: &KillingBasis,
) -> Result<KillingIdentityReport> {
    if !spec.is_autonomous_field() {
        return Err(Error::InvalidParameter(
            "Killing identity needs a forcing independent of u".into(),
        ));
    }
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty record series".into()))?;
    let beta = match spec.fixed_part() {
        Some(f) => basis.alpha_from_state(f)?,
        None => vec![0.0; first.alpha.len()],
    };
    let fk2: f64 = beta.iter().map(|b| b * b).sum();
    let dot = |a: &[f64]| -> f64 { a.iter().zip(&beta).map(|(x, y)| x * y).sum() };
    let p0 = dot(&first.alpha);
    let a0 = &first.alpha;
    let n0: f64 = a0.iter().map(|a| a * a).sum();
    let normalized = (fk2.sqrt() - 1.0).abs() < 1e-12;
    let (mut fd, mut aff, mut uk2) = (0.0f64, 0.0f64, 0.0f64);
    let mut pts = Vec::with_capacity(records.len());
    for r in records {
        let t = r.t - first.t;
        let p = dot(&r.alpha);
        pts.push((t, p));
        fd = fd.max((p - p0 - t * fk2).abs());
        for ((a, a_init), b) in r.alpha.iter().zip(a0).zip(&beta) {
            aff = aff.max((a - a_init - t * b).abs());
        }
        let nk: f64 = r.alpha.iter().map(|a| a * a).sum();
        uk2 = uk2.max((nk - (n0 + t * t * fk2 * fk2 + 2.0 * t * fk2 * p0)).abs());
    }
    Ok(KillingIdentityReport {
        forcing_norm: fk2.sqrt(),
        fd_deviation: fd,
        fd_slope: least_squares_line(&pts).0,
        affine_deviation: aff,
        uk2_deviation: normalized.then_some(uk2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub direction: Direction,
    pub passed: bool,
    /// `(sample index, previous value, value)` of the first violation.
    pub first_violation: Option<(usize, f64, f64)>,
}

/// Checks a scalar series for monotonicity with slack `1e-10·max(1, |x|)`.
pub fn check_series_monotone(values: &[f64], direction: Direction) -> MonotonicityReport {
    check_series_monotone_with_slack(values, direction, 1e-10)
}

/// As [`check_series_monotone`] with slack `rel·max(1, |x|)`.
pub fn check_series_monotone_with_slack(values: &[f64], direction: Direction, rel: f64) -> MonotonicityReport {
    let mut first_violation = None;
    for (i, w) in values.windows(2).enumerate() {
        let slack = rel * w[0].abs().max(1.0);
        let bad = match direction {
            Direction::Nonincreasing => w[1] > w[0] + slack,
            Direction::Nondecreasing => w[1] < w[0] - slack,
        };
        if bad {
            first_violation = Some((i + 1, w[0], w[1]));
            break;
        }
    }
    MonotonicityReport {
        direction,
        passed: first_violation.is_none(),
        first_violation,
    }
}

/// Monotonicity of `‖u_K(t)‖` across the samples.
pub fn check_monotonicity(records: &[DiagnosticsRecord], direction: Direction) -> MonotonicityReport {
    let v: Vec<f64> = records.iter().map(|r| r.norm_uk).collect();
    check_series_monotone(&v, direction)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDependence {
    pub initial_gap: f64,
    /// `sup_{t ≤ T} ‖u₁ - u₂‖² / ‖u₁(0) - u₂(0)‖²`.
    pub sup_ratio: f64,
    /// Trapezoidal `∫₀ᵀ ∫2ν|ε_Γ(u₁ - u₂)|²`, divided by the initial gap squared.
    pub dissipation_ratio: f64,
}

/// Continuous-dependence ratio of two trajectories sampled at the same times.
pub fn continuous_dependence_ratio(
    a: &[SpectralState],
    b: &[SpectralState],
    form: &StokesForm,
    t_max: f64,
) -> Result<ContinuousDependence> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let d0 = a[0].axpy(-1.0, &b[0])?.norm_sq();
    if d0 == 0.0 {
        return Err(Error::Undefined("identical initial data".into()));
    }
    let mut sup: f64 = 0.0;
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (x, y) in a.iter().zip(b) {
        if (x.time - y.time).abs() > 1e-12 * x.time.abs().max(1.0) {
            return Err(Error::InvalidParameter("trajectories are sampled at different times".into()));
        }
        if x.time > t_max * (1.0 + 1e-12) {
            break;
        }
        let d = x.axpy(-1.0, y)?;
        sup = sup.max(d.norm_sq() / d0);
        let diss = form.dissipation(&d)?;
        if let Some((t, q)) = prev {
            integral += 0.5 * (x.time - t) * (q + diss);
        }
        prev = Some((x.time, diss));
    }
    Ok(ContinuousDependence {
        initial_gap: d0.sqrt(),
        sup_ratio: sup,
        dissipation_ratio: integral / d0,
    })
}

/// `max/min` of a set of positive ratios.
pub fn ratio_spread(ratios: &[f64]) -> f64 {
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSeries {
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `L(t) = -½ log ‖u(t)‖²`.
    pub log_quotient: Vec<f64>,
    /// Index of the first sample whose norm fell below [`LAMBDA_FLOOR`].
    pub truncated_at: Option<usize>,
    pub max_lambda: f64,
    /// `(slope, intercept)` of the affine fit of `L`.
    pub fit: (f64, f64),
    /// RMS deviation from the affine fit divided by the range of `L`.
    pub fit_residual: f64,
    /// Smallest `C` with `ΔL/Δt ≤ C(1 + Λ)` between consecutive samples.
    pub growth_constant: f64,
}

/// `Λ(t)` and `L(t)` along a difference trajectory `u₁ - u₂`.
pub fn lambda_series(diffs: &[SpectralState], form: &StokesForm) -> Result<LambdaSeries> {
    let mut t = Vec::new();
    let mut lambda = Vec::new();
    let mut logq = Vec::new();
    let mut truncated_at = None;
    for (i, d) in diffs.iter().enumerate() {
        match lambda_quotient(form, d)? {
            Some(l) => {
                t.push(d.time);
                lambda.push(l);
                logq.push(-0.5 * d.norm_sq().ln());
            }
            None => {
                truncated_at = Some(i);
                break;
            }
        }
    }
    if t.len() < 2 {
        return Err(Error::Undefined("difference vanishes before two samples".into()));
    }
    let pts: Vec<(f64, f64)> = t.iter().copied().zip(logq.iter().copied()).collect();
    let (slope, intercept) = least_squares_line(&pts);
    let rms = (pts
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    let lmax = logq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lmin = logq.iter().copied().fold(f64::INFINITY, f64::min);
    let range = lmax - lmin;
    let fit_residual = if range <= 1e-14 * (1.0 + lmax.abs()) { 0.0 } else { rms / range };
    let mut growth: f64 = 0.0;
    for i in 1..t.len() {
        let dt = t[i] - t[i - 1];
        if dt > 0.0 {
            let rate = (logq[i] - logq[i - 1]) / dt;
            growth = growth.max(rate / (1.0 + lambda[i].max(lambda[i - 1])));
        }
    }
    Ok(LambdaSeries {
        max_lambda: lambda.iter().copied().fold(0.0, f64::max),
        t,
        lambda,
        log_quotient: logq,
        truncated_at,
        fit: (slope, intercept),
        fit_residual,
        growth_constant: growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{make_catalog_forcing, ForcingKind};
    use crate::geometry::{build_sphere_grid, ViscosityField};
    use crate::harmonics::dealias_rule;
    use crate::killing::killing_basis;
    use crate::operators::assemble_stokes;

    #[test]
    fn synthetic_pure_exponential() {
        let s: Vec<(f64, f64)> = (0..200).map(|i| {
            let t = i as f64 * 0.05;
            (t, (-3.0 * t).exp())
        }).collect();
        let f = fit_decay_rate(&s, None).unwrap();
        assert!((f.zeta - 3.0).abs() < 1e-3);
        assert!(f.omega <= 1e-12);
    }

    #[test]
    fn synthetic_exponential_with_plateau() {
        let s: Vec<(f64, f64)> = (0..201).map(|i| {
            let t = i as f64 * 0.05;
            (t, (-2.0 * t).exp() + 0.5)
        }).collect();
        let f = fit_decay_rate(&s, Some((0.0, 3.0))).unwrap();
        assert!((f.zeta - 2.0).abs() < 1e-2);
        assert!((f.omega - 0.5).abs() < 1e-3);
    }

    #[test]
    fn decay_fit_needs_samples() {
        assert!(fit_decay_rate(&[(0.0, 1.0); 5], None).is_err());
    }

    #[test]
    fn record_examples() {
        let g = build_sphere_grid(dealias_rule(4).degree, 1.0).unwrap();
        let b = killing_basis(&g).unwrap();
        let form = assemble_stokes(&g, &ViscosityField::constant(&g, 1.0).unwrap(), 4).unwrap();
        let f = make_catalog_forcing(ForcingKind::Zero, &g, &b, 4).unwrap();
        let v1 = b.state_from_alpha(&[1.0, 0.0, 0.0], 4).unwrap();
        let r = record(&g, &b, &form, &f, &SimState::new(v1, 0.1)).unwrap();
        assert!(r.dissipation.abs() < 1e-10 && r.lambda.unwrap().abs() < 1e-10);
        assert!((r.norm_uk - 1.0).abs() < 1e-12);
        let phi = SpectralState::unit_mode(4, 2, 0).unwrap();
        let r = record(&g, &b, &form, &f, &SimState::new(phi, 0.1)).unwrap();
        assert!((r.lambda.unwrap() - form.lambda(2)).abs() < 1e-10);
        let r = record(&g, &b, &form, &f, &SimState::new(SpectralState::zeros(4), 0.1)).unwrap();
        assert!(r.lambda.is_none() && r.norm_u == 0.0);
    }

    #[test]
    fn monotone_series() {
        let r = check_series_monotone(&[3.0, 2.0, 2.0, 1.0], Direction::Nonincreasing);
        assert!(r.passed);
        let r = check_series_monotone(&[1.0, 2.0, 1.5], Direction::Nondecreasing);
        assert_eq!(r.first_violation, Some((2, 2.0, 1.5)));
    }

    #[test]
    fn continuous_dependence_guards_identical_data() {
        let g = build_sphere_grid(dealias_rule(3).degree, 1.0).unwrap();
        let form = assemble_stokes(&g, &ViscosityField::constant(&g, 1.0).unwrap(), 3).unwrap();
        let s = vec![SpectralState::unit_mode(3, 2, 1).unwrap()];
        assert!(matches!(
            continuous_dependence_ratio(&s, &s, &form, 1.0),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn lambda_of_eigenmode_and_killing() {
        let g = build_sphere_grid(dealias_rule(4).degree, 1.0).unwrap();
        let form = assemble_stokes(&g, &ViscosityField::constant(&g, 1.0).unwrap(), 4).unwrap();
        let lam = form.lambda(2);
        let diffs: Vec<SpectralState> = (0..10)
            .map(|i| {
                let t = i as f64 * 0.1;
                let mut s = SpectralState::unit_mode(4, 2, -1).unwrap().scaled(1e-3 * (-lam * t).exp());
                s.time = t;
                s
            })
            .collect();
        let ls = lambda_series(&diffs, &form).unwrap();
        assert!(ls.lambda.iter().all(|l| (l - lam).abs() < 1e-10));
        assert!((ls.fit.0 - lam).abs() < 1e-8 && ls.fit_residual < 1e-8);
        let k: Vec<SpectralState> = (0..5)
            .map(|i| {
                let mut s = SpectralState::zeros(4);
                s.coeffs[1] = 0.2;
                s.time = i as f64;
                s
            })
            .collect();
        let ls = lambda_series(&k, &form).unwrap();
        assert!(ls.max_lambda < 1e-10 && ls.fit.0.abs() < 1e-12 && ls.fit_residual == 0.0);
        let scaled = SpectralState::unit_mode(4, 3, 2).unwrap();
        let a = lambda_quotient(&form, &scaled).unwrap().unwrap();
        let b = lambda_quotient(&form, &scaled.scaled(-7.5)).unwrap().unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
