//! Run configuration.
//!
//! The file format is flat `key = value` text, one entry per line, with
//! dotted section prefixes. `#` starts a comment. Every key is validated
//! against the schema below and unknown keys are rejected.
//!
//! ```text
//! name = free_decay_l2
//! claims = exponential decay of the non-Killing component
//! geometry.kind = sphere          # sphere | torus
//! geometry.radius = 1
//! spectral.degree = 16
//! nu.formula = constant           # constant | linear_x3  (base + slope*x3/R)
//! nu.base = 1
//! forcing.tag = zero              # zero f1 f2+ f2- f3+ f3- f4+ f4- f5 constant_killing
//! init.kind = modes               # zero | modes | random | checkpoint
//! init.modes = 2:0:1.0
//! time.dt = 1e-3
//! time.t_end = 1
//! time.cfl = 0.5                  # optional: adaptive dt <= 0.5 dx_min / |u|_inf
//! check.energy_ledger = 1e-6
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use surfns_core::timestepper::Scheme;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Dotted key the error refers to, or empty for file-level errors.
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(path: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.path.is_empty(), self.line) {
            (true, Some(l)) => write!(f, "config line {l}: {}", self.message),
            (true, None) => write!(f, "config: {}", self.message),
            (false, Some(l)) => write!(f, "config `{}` (line {l}): {}", self.path, self.message),
            (false, None) => write!(f, "config `{}`: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Sphere { radius: f64 },
    Torus { major: f64, minor: f64, n_pol: usize, n_tor: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum NuSpec {
    Constant(f64),
    /// `base + slope·x₃/R`.
    LinearX3 { base: f64, slope: f64 },
}

impl NuSpec {
    pub fn lower_bound(&self) -> f64 {
        match *self {
            NuSpec::Constant(v) => v,
            NuSpec::LinearX3 { base, slope } => base - slope.abs(),
        }
    }

    pub fn polynomial_degree(&self) -> usize {
        match self {
            NuSpec::Constant(_) => 0,
            NuSpec::LinearX3 { .. } => 1,
        }
    }
}

/// `(l, m, amplitude)`; negative `m` selects the sine member.
pub type Mode = (usize, i64, f64);

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingConfig {
    Zero,
    F1 { modes: Vec<Mode> },
    F2 { plus: bool, modes: Vec<Mode> },
    F3 { plus: bool },
    F4 { plus: bool, point: [f64; 3] },
    F5,
    ConstantKilling { c: f64, axis: usize },
}

impl ForcingConfig {
    pub fn tag_name(&self) -> &'static str {
        match self {
            ForcingConfig::Zero => "zero",
            ForcingConfig::F1 { .. } => "f1",
            ForcingConfig::F2 { plus: true, .. } => "f2+",
            ForcingConfig::F2 { plus: false, .. } => "f2-",
            ForcingConfig::F3 { plus: true } => "f3+",
            ForcingConfig::F3 { plus: false } => "f3-",
            ForcingConfig::F4 { plus: true, .. } => "f4+",
            ForcingConfig::F4 { plus: false, .. } => "f4-",
            ForcingConfig::F5 => "f5",
            ForcingConfig::ConstantKilling { .. } => "constant_killing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Zero,
    Modes(Vec<Mode>),
    /// Gaussian coefficients with weight `l^-decay`, rescaled to the given block norms.
    Random { norm_k: f64, norm_nk: f64, decay: f64 },
    Checkpoint(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub linear: bool,
    /// CFL target for adaptive stepping; `dt` is then the step cap.
    pub cfl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairDirection {
    Random { decay: f64 },
    Modes(Vec<Mode>),
}

/// Second trajectory(ies) started at `u₀ + gap·d` with `‖d‖ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSpec {
    pub gaps: Vec<f64>,
    pub direction: PairDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    EnergyLedger,
    KillingDrift,
    KillingAffine,
    KillingUk2,
    UkNonincreasing,
    UkNondecreasing,
    UkExponential,
    UnkDecreasing,
    DecayRate,
    DecayRateMin,
    EigenDecay,
    UniformBound,
    Hypotheses,
    ContinuousDependence,
    LambdaAffine,
    NoCrossing,
    AbsorbingEntry,
    EnsembleUnkDecreasing,
    EnsembleUkMinNondecreasing,
    EnsembleConstant,
}

impl CheckKind {
    pub const ALL: [CheckKind; 20] = [
        CheckKind::EnergyLedger,
        CheckKind::KillingDrift,
        CheckKind::KillingAffine,
        CheckKind::KillingUk2,
        CheckKind::UkNonincreasing,
        CheckKind::UkNondecreasing,
        CheckKind::UkExponential,
        CheckKind::UnkDecreasing,
        CheckKind::DecayRate,
        CheckKind::DecayRateMin,
        CheckKind::EigenDecay,
        CheckKind::UniformBound,
        CheckKind::Hypotheses,
        CheckKind::ContinuousDependence,
        CheckKind::LambdaAffine,
        CheckKind::NoCrossing,
        CheckKind::AbsorbingEntry,
        CheckKind::EnsembleUnkDecreasing,
        CheckKind::EnsembleUkMinNondecreasing,
        CheckKind::EnsembleConstant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::EnergyLedger => "energy_ledger",
            CheckKind::KillingDrift => "killing_drift",
            CheckKind::KillingAffine => "killing_affine",
            CheckKind::KillingUk2 => "killing_uk2",
            CheckKind::UkNonincreasing => "uk_nonincreasing",
            CheckKind::UkNondecreasing => "uk_nondecreasing",
            CheckKind::UkExponential => "uk_exponential",
            CheckKind::UnkDecreasing => "unk_decreasing",
            CheckKind::DecayRate => "decay_rate",
            CheckKind::DecayRateMin => "decay_rate_min",
            CheckKind::EigenDecay => "eigen_decay",
            CheckKind::UniformBound => "uniform_bound",
            CheckKind::Hypotheses => "hypotheses",
            CheckKind::ContinuousDependence => "continuous_dependence",
            CheckKind::LambdaAffine => "lambda_affine",
            CheckKind::NoCrossing => "no_crossing",
            CheckKind::AbsorbingEntry => "absorbing_entry",
            CheckKind::EnsembleUnkDecreasing => "ensemble_unk_decreasing",
            CheckKind::EnsembleUkMinNondecreasing => "ensemble_uk_min_nondecreasing",
            CheckKind::EnsembleConstant => "ensemble_constant",
        }
    }

    pub fn from_name(s: &str) -> Option<CheckKind> {
        Self::ALL.iter().copied().find(|c| c.name() == s)
    }

    pub fn needs_pair(self) -> bool {
        matches!(
            self,
            CheckKind::ContinuousDependence | CheckKind::LambdaAffine | CheckKind::NoCrossing
        )
    }

    pub fn needs_ensemble(self) -> bool {
        matches!(
            self,
            CheckKind::AbsorbingEntry
                | CheckKind::EnsembleUnkDecreasing
                | CheckKind::EnsembleUkMinNondecreasing
                | CheckKind::EnsembleConstant
        )
    }
}

/// A declared check and its numeric parameter (tolerance, bound or sample count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub name: String,
    pub claims: String,
    pub seed: u64,
    pub geometry: GeometrySpec,
    pub degree: usize,
    /// Quadrature degree override; the default is the smallest degree that
    /// dealiases the convective term and integrates the Stokes form exactly.
    pub grid_degree: Option<usize>,
    pub nu: NuSpec,
    pub forcing: ForcingConfig,
    pub init: InitSpec,
    pub time: TimeSpec,
    pub pair: Option<PairSpec>,
    pub fit_window: Option<(f64, f64)>,
    pub ensemble_members: Option<usize>,
    pub korn_truncations: Vec<usize>,
    pub checks: Vec<CheckSpec>,
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut raw = Raw::read(text)?;
        let cfg = build(&mut raw)?;
        raw.finish()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", None, format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    /// Sorted `key = value` lines of the effective configuration.
    pub fn canonical_text(&self) -> String {
        let mut entries = self.entries.clone();
        entries.insert("seed".into(), self.seed.to_string());
        if let Some(n) = self.ensemble_members {
            entries.insert("ensemble.members".into(), n.to_string());
        }
        entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    pub fn set_members(&mut self, n: usize) {
        self.ensemble_members = Some(n);
    }

    pub fn has_check(&self, kind: CheckKind) -> bool {
        self.checks.iter().any(|c| c.kind == kind)
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.geometry, GeometrySpec::Sphere { .. })
    }
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Raw {
    entries: BTreeMap<String, Entry>,
    checks: Vec<(String, String, usize)>,
}

impl Raw {
    fn read(text: &str) -> Result<Raw, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut checks = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new("", Some(n), format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
                return Err(ConfigError::new("", Some(n), format!("malformed key `{key}`")));
            }
            if entries.contains_key(key) {
                return Err(ConfigError::new(key, Some(n), "duplicate key"));
            }
            if key.starts_with("check.") {
                checks.push((key.to_string(), value.to_string(), n));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line: n,
                    used: false,
                },
            );
        }
        Ok(Raw { entries, checks })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn require(&mut self, key: &str) -> Result<(String, usize), ConfigError> {
        self.take(key)
            .ok_or_else(|| ConfigError::new(key, None, "required key is missing"))
    }

    fn string(&mut self, key: &str, default: &str) -> String {
        self.take(key).map(|(v, _)| v).unwrap_or_else(|| default.to_string())
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            Some((v, line)) => parse_f64(key, &v, line),
            None => Ok(default),
        }
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let (v, line) = match (self.take(key), default) {
            (Some(e), _) => e,
            (None, Some(d)) => return Ok(d),
            (None, None) => return Err(ConfigError::new(key, None, "required key is missing")),
        };
        let x = parse_f64(key, &v, line)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(ConfigError::new(key, Some(line), format!("must be positive, got {x}")))
        }
    }

    fn usize_or(&mut self, key: &str, default: Option<usize>) -> Result<usize, ConfigError> {
        match (self.take(key), default) {
            (Some((v, line)), _) => v
                .parse::<usize>()
                .map_err(|_| ConfigError::new(key, Some(line), format!("expected a non-negative integer, got `{v}`"))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(ConfigError::new(key, None, "required key is missing")),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.take(key) {
            Some((v, line)) => match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ConfigError::new(key, Some(line), format!("expected true or false, got `{v}`"))),
            },
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((k, e)) => Err(ConfigError::new(k, Some(e.line), "unknown key")),
            None => Ok(()),
        }
    }
}

fn parse_f64(key: &str, v: &str, line: usize) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::new(key, Some(line), format!("expected a finite number, got `{v}`"))),
    }
}

fn parse_list(key: &str, v: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(|p| parse_f64(key, p.trim(), line)).collect()
}

/// `l:m:amp` entries separated by commas.
fn parse_modes(key: &str, v: &str, line: usize, degree: usize) -> Result<Vec<Mode>, ConfigError> {
    let mut out = Vec::new();
    for item in v.split(',') {
        let parts: Vec<&str> = item.trim().split(':').collect();
        let bad = || ConfigError::new(key, Some(line), format!("expected `l:m:amplitude`, got `{}`", item.trim()));
        if parts.len() != 3 {
            return Err(bad());
        }
        let l: usize = parts[0].parse().map_err(|_| bad())?;
        let m: i64 = parts[1].parse().map_err(|_| bad())?;
        let a = parse_f64(key, parts[2], line)?;
        if l < 1 || l > degree || m.unsigned_abs() as usize > l {
            return Err(ConfigError::new(
                key,
                Some(line),
                format!("mode ({l}, {m}) is outside 1 ≤ l ≤ {degree}, |m| ≤ l"),
            ));
        }
        out.push((l, m, a));
    }
    Ok(out)
}

fn build(raw: &mut Raw) -> Result<Config, ConfigError> {
    let name = raw.string("name", "unnamed");
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(ConfigError::new("name", None, format!("`{name}` is not a valid run name")));
    }
    let claims = raw.string("claims", "");
    let seed = match raw.take("seed") {
        Some((v, line)) => v
            .parse::<u64>()
            .map_err(|_| ConfigError::new("seed", Some(line), format!("expected an unsigned integer, got `{v}`")))?,
        None => 0,
    };

    let geometry = match raw.string("geometry.kind", "sphere").as_str() {
        "sphere" => GeometrySpec::Sphere {
            radius: raw.positive("geometry.radius", Some(1.0))?,
        },
        "torus" => {
            let major = raw.positive("geometry.major", Some(2.0))?;
            let minor = raw.positive("geometry.minor", Some(0.5))?;
            if minor >= major {
                return Err(ConfigError::new("geometry.minor", None, "must be smaller than geometry.major"));
            }
            GeometrySpec::Torus {
                major,
                minor,
                n_pol: raw.usize_or("geometry.n_pol", Some(64))?,
                n_tor: raw.usize_or("geometry.n_tor", Some(64))?,
            }
        }
        other => {
            return Err(ConfigError::new(
                "geometry.kind",
                None,
                format!("expected sphere or torus, got `{other}`"),
            ))
        }
    };

    let degree = raw.usize_or("spectral.degree", Some(16))?;
    if degree < 2 {
        return Err(ConfigError::new("spectral.degree", None, "must be at least 2"));
    }
    let grid_degree = match raw.take("spectral.grid_degree") {
        Some((v, line)) => Some(v.parse::<usize>().map_err(|_| {
            ConfigError::new("spectral.grid_degree", Some(line), format!("expected an integer, got `{v}`"))
        })?),
        None => None,
    };

    let nu = match raw.string("nu.formula", "constant").as_str() {
        "constant" => NuSpec::Constant(raw.positive("nu.base", Some(1.0))?),
        "linear_x3" => NuSpec::LinearX3 {
            base: raw.positive("nu.base", Some(1.0))?,
            slope: raw.f64_or("nu.slope", 0.0)?,
        },
        other => {
            return Err(ConfigError::new(
                "nu.formula",
                None,
                format!("expected constant or linear_x3, got `{other}`"),
            ))
        }
    };
    if nu.lower_bound() <= 0.0 {
        return Err(ConfigError::new(
            "nu.slope",
            None,
            format!("viscosity lower bound {} is not positive", nu.lower_bound()),
        ));
    }

    let tag = raw.string("forcing.tag", "zero");
    let modes = |raw: &mut Raw| -> Result<Vec<Mode>, ConfigError> {
        let (v, line) = raw.require("forcing.modes")?;
        parse_modes("forcing.modes", &v, line, degree)
    };
    let forcing = match tag.as_str() {
        "zero" => ForcingConfig::Zero,
        "f1" => ForcingConfig::F1 { modes: modes(raw)? },
        "f2+" | "f2-" => ForcingConfig::F2 {
            plus: tag.ends_with('+'),
            modes: modes(raw)?,
        },
        "f3+" | "f3-" => ForcingConfig::F3 { plus: tag.ends_with('+') },
        "f4+" | "f4-" => {
            let (v, line) = raw.require("forcing.point")?;
            let p = parse_list("forcing.point", &v, line)?;
            if p.len() != 3 {
                return Err(ConfigError::new("forcing.point", Some(line), "expected three coordinates"));
            }
            ForcingConfig::F4 {
                plus: tag.ends_with('+'),
                point: [p[0], p[1], p[2]],
            }
        }
        "f5" => ForcingConfig::F5,
        "constant_killing" => {
            let axis = raw.usize_or("forcing.axis", Some(1))?;
            if !(1..=3).contains(&axis) {
                return Err(ConfigError::new("forcing.axis", None, format!("expected 1, 2 or 3, got {axis}")));
            }
            ForcingConfig::ConstantKilling {
                c: raw.f64_or("forcing.c", 1.0)?,
                axis,
            }
        }
        other => {
            return Err(ConfigError::new("forcing.tag", None, format!("unknown forcing `{other}`")));
        }
    };

    let init = match raw.string("init.kind", "zero").as_str() {
        "zero" => InitSpec::Zero,
        "modes" => {
            let (v, line) = raw.require("init.modes")?;
            InitSpec::Modes(parse_modes("init.modes", &v, line, degree)?)
        }
        "random" => {
            let norm_k = raw.f64_or("init.norm_k", 1.0)?;
            let norm_nk = raw.f64_or("init.norm_nk", 1.0)?;
            if norm_k < 0.0 || norm_nk < 0.0 {
                return Err(ConfigError::new("init.norm_k", None, "block norms must be non-negative"));
            }
            InitSpec::Random {
                norm_k,
                norm_nk,
                decay: raw.f64_or("init.decay", 1.0)?,
            }
        }
        "checkpoint" => InitSpec::Checkpoint(PathBuf::from(raw.require("init.path")?.0)),
        other => {
            return Err(ConfigError::new(
                "init.kind",
                None,
                format!("expected zero, modes, random or checkpoint, got `{other}`"),
            ))
        }
    };

    let scheme = match raw.string("time.scheme", "imex").as_str() {
        "imex" => Scheme::ImexCnab2,
        "rk4" => Scheme::Rk4,
        other => {
            return Err(ConfigError::new("time.scheme", None, format!("expected imex or rk4, got `{other}`")));
        }
    };
    let time = TimeSpec {
        scheme,
        dt: raw.positive("time.dt", Some(1e-3))?,
        t_end: raw.positive("time.t_end", Some(1.0))?,
        stride: raw.usize_or("time.stride", Some(10))?,
        linear: raw.bool_or("time.linear", false)?,
        cfl: match raw.take("time.cfl") {
            Some(_) => Some(raw.positive("time.cfl", None)?),
            None => None,
        },
    };
    if time.stride == 0 {
        return Err(ConfigError::new("time.stride", None, "must be at least 1"));
    }

    let pair = match raw.take("pair.gaps") {
        Some((v, line)) => {
            let gaps = parse_list("pair.gaps", &v, line)?;
            if gaps.iter().any(|g| *g <= 0.0) {
                return Err(ConfigError::new("pair.gaps", Some(line), "gaps must be positive"));
            }
            let direction = match raw.take("pair.modes") {
                Some((v, line)) => PairDirection::Modes(parse_modes("pair.modes", &v, line, degree)?),
                None => PairDirection::Random {
                    decay: raw.f64_or("pair.decay", 1.0)?,
                },
            };
            Some(PairSpec { gaps, direction })
        }
        None => None,
    };

    let fit_window = match raw.take("fit.window") {
        Some((v, line)) => {
            let w = parse_list("fit.window", &v, line)?;
            if w.len() != 2 || w[0] >= w[1] {
                return Err(ConfigError::new("fit.window", Some(line), "expected `start, end` with start < end"));
            }
            Some((w[0], w[1]))
        }
        None => None,
    };

    let ensemble_members = match raw.take("ensemble.members") {
        Some((v, line)) => {
            let n: usize = v.parse().map_err(|_| {
                ConfigError::new("ensemble.members", Some(line), format!("expected an integer, got `{v}`"))
            })?;
            if n < 2 {
                return Err(ConfigError::new("ensemble.members", Some(line), "an ensemble needs at least 2 members"));
            }
            Some(n)
        }
        None => None,
    };

    let korn_truncations = match raw.take("korn.truncations") {
        Some((v, line)) => v
            .split(',')
            .map(|p| {
                p.trim().parse::<usize>().map_err(|_| {
                    ConfigError::new("korn.truncations", Some(line), format!("expected integers, got `{}`", p.trim()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![],
    };

    let mut checks = Vec::new();
    for (key, value, line) in raw.checks.clone() {
        raw.take(&key);
        let name = &key["check.".len()..];
        let kind = CheckKind::from_name(name)
            .ok_or_else(|| ConfigError::new(&key, Some(line), format!("unknown check `{name}`")))?;
        let value = parse_f64(&key, &value, line)?;
        if kind.needs_pair() && pair.is_none() {
            return Err(ConfigError::new(&key, Some(line), "requires pair.gaps"));
        }
        if kind == CheckKind::ContinuousDependence && pair.as_ref().is_some_and(|p| p.gaps.len() < 2) {
            return Err(ConfigError::new(&key, Some(line), "requires at least two pair.gaps"));
        }
        if kind.needs_ensemble() && ensemble_members.is_none() {
            return Err(ConfigError::new(&key, Some(line), "requires ensemble.members"));
        }
        checks.push(CheckSpec { kind, value });
    }

    let entries = raw
        .entries
        .iter()
        .map(|(k, e)| (k.clone(), e.value.clone()))
        .collect();
    Ok(Config {
        name,
        claims,
        seed,
        geometry,
        degree,
        grid_degree,
        nu,
        forcing,
        init,
        time,
        pair,
        fit_window,
        ensemble_members,
        korn_truncations,
        checks,
        entries,
    })
}
