//! Forcing catalog and empirical hypothesis checks.
//!
//! Every entry is evaluated as the Leray projection of `f(·, u)` onto the
//! truncated toroidal basis. Declared hypothesis constants are attached at
//! construction; [`hypothesis_check`] samples random states and reports any
//! sample that contradicts them.

use crate::error::{Error, Result};
use crate::geometry::{dot3, SurfaceGrid, SurfaceKind, TangentialField};
use crate::harmonics::{analyze, synthesize, SpectralState};
use crate::killing::KillingBasis;
use crate::random::{random_amplitude_state, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Catalog entry with its parameters.
#[derive(Debug, Clone)]
pub enum ForcingKind {
    Zero,
    /// `f₁ = g`, independent of `u`.
    ConstantField(TangentialField),
    /// `f₂± = v ± P_𝒦u` with `v` orthogonal to the Killing fields.
    F2 { sign: Sign, v: TangentialField },
    /// `f₃± = ±u`.
    F3(Sign),
    /// `f₄± = (I - P_𝒦)u ± P_𝒦(|x - p| P_𝒦u)` for a point `p` on the surface.
    F4 { sign: Sign, point: [f64; 3] },
    /// `f₅ = (I - P_𝒦)(|x| u) - u`.
    F5,
    /// `c v_j` for the Killing basis field `j` (zero-based).
    ConstantKilling { c: f64, axis: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForcingTag {
    Zero,
    ConstantField,
    F2(Sign),
    F3(Sign),
    F4(Sign),
    F5,
    ConstantKilling,
}

impl ForcingTag {
    pub fn name(&self) -> &'static str {
        match self {
            ForcingTag::Zero => "zero",
            ForcingTag::ConstantField => "f1",
            ForcingTag::F2(Sign::Plus) => "f2+",
            ForcingTag::F2(Sign::Minus) => "f2-",
            ForcingTag::F3(Sign::Plus) => "f3+",
            ForcingTag::F3(Sign::Minus) => "f3-",
            ForcingTag::F4(Sign::Plus) => "f4+",
            ForcingTag::F4(Sign::Minus) => "f4-",
            ForcingTag::F5 => "f5",
            ForcingTag::ConstantKilling => "constant_killing",
        }
    }
}

/// Declared hypothesis constants of a catalog entry.
///
/// `c1` bounds `‖f(·,0)‖`, `c2` is the Lipschitz constant, `uk1` the
/// linear-growth bound on `∫f_K·u`, `nega`/`pos` the sign of `∫f_K·u`.
/// `extra` holds `(C₅, C₆)` with `∫f_NK·u ≤ C₅‖u_NK‖² + C₆‖u_NK‖`;
/// `extra2` the variant that adds `C₆‖u_K‖²` on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisFlags {
    pub c1: f64,
    pub c2: f64,
    pub uk1: bool,
    pub nega: bool,
    pub pos: bool,
    pub extra: Option<(f64, f64)>,
    pub extra2: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ForcingSpec {
    tag: ForcingTag,
    flags: HypothesisFlags,
    degree: usize,
    grid_id: u64,
    fixed: Option<SpectralState>,
    weight_matrix: Option<[[f64; 3]; 3]>,
    radial: Option<Vec<f64>>,
}

/// Builds a catalog entry for states of degree `degree` on `grid`.
pub fn make_catalog_forcing(
    kind: ForcingKind,
    grid: &SurfaceGrid,
    basis: &KillingBasis,
    degree: usize,
) -> Result<ForcingSpec> {
    if basis.grid_id() != grid.id() {
        return Err(Error::GridMismatch);
    }
    let radius = match grid.kind() {
        SurfaceKind::Sphere { radius } => radius,
        SurfaceKind::Torus { .. } => {
            return Err(Error::UnsupportedGeometry("forcing evaluation needs a sphere grid"))
        }
    };
    let mut spec = ForcingSpec {
        tag: ForcingTag::Zero,
        flags: HypothesisFlags {
            c1: 0.0,
            c2: 0.0,
            uk1: true,
            nega: true,
            pos: true,
            extra: Some((0.0, 0.0)),
            extra2: Some((0.0, 0.0)),
        },
        degree,
        grid_id: grid.id(),
        fixed: None,
        weight_matrix: None,
        radial: None,
    };
    match kind {
        ForcingKind::Zero => {}
        ForcingKind::ConstantField(g) => {
            let coeffs = analyze(grid, &g, degree)?;
            let gk = coeffs.killing_norm_sq().sqrt();
            let gnk = coeffs.non_killing_norm_sq().sqrt();
            let killing_free = gk <= 1e-12 * coeffs.norm().max(1.0);
            spec.tag = ForcingTag::ConstantField;
            spec.flags.c1 = coeffs.norm();
            spec.flags.nega = killing_free;
            spec.flags.pos = killing_free;
            spec.flags.extra = Some((0.0, gnk));
            spec.flags.extra2 = Some((0.0, gnk));
            spec.fixed = Some(coeffs);
        }
        ForcingKind::F2 { sign, v } => {
            let coeffs = analyze(grid, &v, degree)?;
            let vk = coeffs.killing_norm_sq().sqrt();
            if vk > 1e-10 * coeffs.norm().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "f2 field has a Killing component of norm {vk:e}"
                )));
            }
            let vn = coeffs.norm();
            spec.tag = ForcingTag::F2(sign);
            spec.flags = HypothesisFlags {
                c1: vn,
                c2: 1.0,
                uk1: true,
                nega: sign == Sign::Minus,
                pos: sign == Sign::Plus,
                extra: Some((0.0, vn)),
                extra2: Some((0.0, vn)),
            };
            spec.fixed = Some(coeffs);
        }
        ForcingKind::F3(sign) => {
            let c5 = if sign == Sign::Plus { 1.0 } else { 0.0 };
            spec.tag = ForcingTag::F3(sign);
            spec.flags = HypothesisFlags {
                c1: 0.0,
                c2: 1.0,
                uk1: true,
                nega: sign == Sign::Minus,
                pos: sign == Sign::Plus,
                extra: Some((c5, 0.0)),
                extra2: Some((c5, 0.0)),
            };
        }
        ForcingKind::F4 { sign, point } => {
            let pr = dot3(&point, &point).sqrt();
            if (pr - radius).abs() > 1e-10 * radius {
                return Err(Error::InvalidParameter(format!(
                    "f4 point lies at distance {pr} from the origin, not on the sphere of radius {radius}"
                )));
            }
            let dist: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|x| {
                    let d = [x[0] - point[0], x[1] - point[1], x[2] - point[2]];
                    dot3(&d, &d).sqrt()
                })
                .collect();
            let mut m = [[0.0; 3]; 3];
            for j in 0..3 {
                for k in 0..3 {
                    let (vj, vk) = (basis.field(j), basis.field(k));
                    m[j][k] = vj
                        .comps
                        .iter()
                        .zip(&vk.comps)
                        .zip(grid.weights().iter().zip(&dist))
                        .map(|((a, b), (w, d))| w * d * (a[0] * b[0] + a[1] * b[1]))
                        .sum();
                }
            }
            let dmax = dist.iter().copied().fold(0.0, f64::max);
            spec.tag = ForcingTag::F4(sign);
            spec.flags = HypothesisFlags {
                c1: 0.0,
                c2: dmax.max(1.0),
                uk1: true,
                nega: sign == Sign::Minus,
                pos: sign == Sign::Plus,
                extra: Some((1.0, 0.0)),
                extra2: Some((1.0, 0.0)),
            };
            spec.weight_matrix = Some(m);
        }
        ForcingKind::F5 => {
            let radial: Vec<f64> = grid.nodes().iter().map(|x| dot3(x, x).sqrt()).collect();
            let rmax = radial.iter().copied().fold(0.0, f64::max);
            spec.tag = ForcingTag::F5;
            spec.flags = HypothesisFlags {
                c1: 0.0,
                c2: rmax + 1.0,
                uk1: true,
                nega: true,
                pos: false,
                extra: None,
                extra2: Some((1.5 * rmax - 1.0, 0.5 * rmax)),
            };
            spec.radial = Some(radial);
        }
        ForcingKind::ConstantKilling { c, axis } => {
            if axis >= basis.dim() {
                return Err(Error::InvalidParameter(format!(
                    "Killing axis {axis} out of range for a basis of dimension {}",
                    basis.dim()
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter("non-finite Killing amplitude".into()));
            }
            let mut alpha = vec![0.0; basis.dim()];
            alpha[axis] = c;
            spec.tag = ForcingTag::ConstantKilling;
            spec.flags = HypothesisFlags {
                c1: c.abs(),
                c2: 0.0,
                uk1: true,
                nega: c == 0.0,
                pos: c == 0.0,
                extra: Some((0.0, 0.0)),
                extra2: Some((0.0, 0.0)),
            };
            spec.fixed = Some(basis.state_from_alpha(&alpha, degree)?);
        }
    }
    Ok(spec)
}

impl ForcingSpec {
    pub fn tag(&self) -> ForcingTag {
        self.tag
    }

    pub fn flags(&self) -> &HypothesisFlags {
        &self.flags
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// True when `f` does not depend on `u`.
    pub fn is_autonomous_field(&self) -> bool {
        matches!(
            self.tag,
            ForcingTag::Zero | ForcingTag::ConstantField | ForcingTag::ConstantKilling
        )
    }

    /// Leray coefficients of the fixed part (`g`, `v` or `c v_j`), if any.
    pub fn fixed_part(&self) -> Option<&SpectralState> {
        self.fixed.as_ref()
    }

    /// `P₀ f(·, u)` for the state `s`.
    pub fn apply(&self, grid: &SurfaceGrid, basis: &KillingBasis, s: &SpectralState) -> Result<SpectralState> {
        if grid.id() != self.grid_id || basis.grid_id() != self.grid_id {
            return Err(Error::GridMismatch);
        }
        if s.degree() != self.degree {
            return Err(Error::ShapeMismatch {
                expected: crate::harmonics::n_coeffs(self.degree),
                actual: s.len(),
            });
        }
        let mut out = match self.tag {
            ForcingTag::Zero => SpectralState::zeros(self.degree),
            ForcingTag::ConstantField | ForcingTag::ConstantKilling => self.fixed_or_zero(),
            ForcingTag::F2(sign) => self.fixed_or_zero().axpy(sign.value(), &s.killing_part())?,
            ForcingTag::F3(sign) => s.scaled(sign.value()),
            ForcingTag::F4(sign) => {
                let m = self.weight_matrix.as_ref().ok_or_else(|| {
                    Error::Consistency("f4 forcing without weight matrix".into())
                })?;
                let alpha = basis.alpha_from_state(s)?;
                let weighted: Vec<f64> = (0..3)
                    .map(|j| (0..3).map(|k| m[j][k] * alpha[k]).sum())
                    .collect();
                let k = basis.state_from_alpha(&weighted, self.degree)?;
                s.non_killing_part().axpy(sign.value(), &k)?
            }
            ForcingTag::F5 => {
                let radial = self
                    .radial
                    .as_ref()
                    .ok_or_else(|| Error::Consistency("f5 forcing without radial weight".into()))?;
                let u = synthesize(grid, s)?;
                let scaled: Vec<[f64; 2]> = u
                    .comps
                    .iter()
                    .zip(radial)
                    .map(|(c, r)| [r * c[0], r * c[1]])
                    .collect();
                let p = analyze(grid, &grid.field(scaled)?, self.degree)?;
                p.non_killing_part().axpy(-1.0, s)?
            }
        };
        out.time = s.time;
        Ok(out)
    }

    fn fixed_or_zero(&self) -> SpectralState {
        self.fixed
            .clone()
            .unwrap_or_else(|| SpectralState::zeros(self.degree))
    }
}

/// Outcome of a Monte-Carlo hypothesis check.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub tag: ForcingTag,
    pub n_samples: usize,
    /// `‖f(·,0)‖`.
    pub c1_hat: f64,
    /// Largest Lipschitz ratio over sample pairs.
    pub c2_hat: f64,
    /// Range of `∫f_K·u` over the samples.
    pub killing_work_min: f64,
    pub killing_work_max: f64,
    /// Fitted `(C₅, C₆)` for the declared form of the non-Killing bound.
    pub c5_hat: f64,
    pub c6_hat: f64,
    pub violations: Vec<String>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples random states with amplitudes log-uniform on `[0.1, 10]` and
/// tests each declared hypothesis of `spec` on them.
///
/// `(Ĉ₅, Ĉ₆)` come from a least-squares fit of `∫f_NK·u` against the
/// right-hand side terms, after which `Ĉ₆` is raised until every sample
/// satisfies the bound.
pub fn hypothesis_check(
    spec: &ForcingSpec,
    grid: &SurfaceGrid,
    basis: &KillingBasis,
    n_samples: usize,
    seed: u64,
) -> Result<HypothesisReport> {
    if n_samples < 10 {
        return Err(Error::InvalidParameter(format!(
            "hypothesis check needs at least 10 samples, got {n_samples}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let degree = spec.degree();
    let flags = *spec.flags();
    let mut violations = Vec::new();
    let tol = |x: f64| 1e-9 * (1.0 + x.abs());

    let f0 = spec.apply(grid, basis, &SpectralState::zeros(degree))?;
    let c1_hat = f0.norm();
    if c1_hat > flags.c1 + tol(flags.c1) {
        violations.push(format!("C1: |f(0)| = {c1_hat:e} exceeds declared {:e}", flags.c1));
    }

    let samples: Vec<SpectralState> = (0..n_samples)
        .map(|_| random_amplitude_state(&mut rng, degree, 0.1, 10.0))
        .collect();
    let images: Vec<SpectralState> = samples
        .iter()
        .map(|s| spec.apply(grid, basis, s))
        .collect::<Result<_>>()?;

    let mut c2_hat: f64 = 0.0;
    for i in (0..n_samples - 1).step_by(2) {
        let du = samples[i].axpy(-1.0, &samples[i + 1])?.norm();
        let df = images[i].axpy(-1.0, &images[i + 1])?.norm();
        if du > 0.0 {
            c2_hat = c2_hat.max(df / du);
        }
    }
    if c2_hat > flags.c2 + tol(flags.c2) {
        violations.push(format!("C2: Lipschitz ratio {c2_hat:e} exceeds declared {:e}", flags.c2));
    }

    let (mut kmin, mut kmax) = (f64::INFINITY, f64::NEG_INFINITY);
    // rows (y, a, b, c): y = ∫f_NK·u, a = ‖u_NK‖², b = ‖u_NK‖, c = ‖u_K‖²
    let mut rows = Vec::with_capacity(n_samples);
    for (i, (u, f)) in samples.iter().zip(&images).enumerate() {
        let kw = f.killing_part().dot(u);
        kmin = kmin.min(kw);
        kmax = kmax.max(kw);
        let scale = u.norm_sq();
        if flags.nega && kw > tol(scale) {
            violations.push(format!("nega: sample {i} has ∫f_K·u = {kw:e} > 0"));
        }
        if flags.pos && kw < -tol(scale) {
            violations.push(format!("pos: sample {i} has ∫f_K·u = {kw:e} < 0"));
        }
        if flags.uk1 && !kw.is_finite() {
            violations.push(format!("uk1: sample {i} gives non-finite ∫f_K·u"));
        }
        let y = f.non_killing_part().dot(u);
        let a = u.non_killing_norm_sq();
        rows.push((y, a, a.sqrt(), u.killing_norm_sq()));
    }

    let second = flags.extra.is_none() && flags.extra2.is_some();
    let basis_b = |r: &(f64, f64, f64, f64)| if second { r.2 + r.3 } else { r.2 };
    let (mut saa, mut sab, mut sbb, mut sya, mut syb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rows {
        let b = basis_b(r);
        saa += r.1 * r.1;
        sab += r.1 * b;
        sbb += b * b;
        sya += r.0 * r.1;
        syb += r.0 * b;
    }
    let det = saa * sbb - sab * sab;
    let mut c5_hat = if det.abs() > 1e-300 {
        (sya * sbb - syb * sab) / det
    } else if saa > 0.0 {
        sya / saa
    } else {
        0.0
    };
    c5_hat = c5_hat.max(0.0);
    let mut c6_hat: f64 = 0.0;
    for r in &rows {
        let b = basis_b(r);
        let excess = r.0 - c5_hat * r.1;
        if excess > 0.0 && b > 0.0 {
            c6_hat = c6_hat.max(excess / b);
        }
    }
    if let Some((c5, c6)) = flags.extra.or(flags.extra2) {
        for (i, r) in rows.iter().enumerate() {
            let rhs = c5 * r.1 + c6 * basis_b(r);
            if r.0 > rhs + tol(rhs.max(r.1)) {
                violations.push(format!(
                    "non-Killing bound: sample {i} has ∫f_NK·u = {:e} > {rhs:e}",
                    r.0
                ));
            }
        }
    }

    Ok(HypothesisReport {
        tag: spec.tag(),
        n_samples,
        c1_hat,
        c2_hat,
        killing_work_min: kmin,
        killing_work_max: kmax,
        c5_hat,
        c6_hat,
        violations,
    })
}
