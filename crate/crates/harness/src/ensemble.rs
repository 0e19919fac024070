//! Ensembles of independent members with seeds derived from one base seed.

use rayon::prelude::*;
use surfns_core::diagnostics::{fit_decay_rate, DiagnosticsRecord};
use surfns_core::random::derive_seed;

use crate::config::Config;
use crate::runner::{initial_state, integrate, Model};

#[derive(Debug, Clone)]
pub struct MemberResult {
    pub index: usize,
    pub seed: u64,
    pub records: Vec<DiagnosticsRecord>,
    /// Divergence or setup failure; the member's partial records are kept.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
}

/// Statistics over the members that reached sample `t`, one entry per CSV
/// column after `t` (norm_u through lambda).
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub t: f64,
    pub members: usize,
    pub stats: Vec<ColumnStats>,
}

#[derive(Debug, Clone)]
pub struct EnsembleReport {
    pub members: Vec<MemberResult>,
    pub aggregates: Vec<Aggregate>,
    /// Tail plateau of the max-member `‖u_NK‖²`.
    pub omega_hat: f64,
    /// `sqrt(1/2 + ω̂)`.
    pub entry_radius: f64,
    /// First sample time with max-member `‖u_NK‖` inside the entry radius.
    pub entry_time: Option<f64>,
}

impl EnsembleReport {
    pub fn column(&self, index: usize) -> Vec<ColumnStats> {
        self.aggregates.iter().map(|a| a.stats[index]).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.aggregates.iter().map(|a| a.t).collect()
    }
}

pub const COL_NORM_U: usize = 0;
pub const COL_NORM_UK: usize = 1;
pub const COL_NORM_UNK: usize = 2;

fn scalars(r: &DiagnosticsRecord) -> [Option<f64>; 8] {
    [
        Some(r.norm_u),
        Some(r.norm_uk),
        Some(r.norm_unk),
        Some(r.energy),
        Some(r.dissipation),
        Some(r.work),
        Some(r.energy_residual),
        r.lambda,
    ]
}

fn aggregate(members: &[MemberResult]) -> Vec<Aggregate> {
    let n_samples = members.iter().map(|m| m.records.len()).max().unwrap_or(0);
    (0..n_samples)
        .map(|i| {
            let rows: Vec<&DiagnosticsRecord> = members.iter().filter_map(|m| m.records.get(i)).collect();
            let stats = (0..8)
                .map(|c| {
                    let vals: Vec<f64> = rows.iter().filter_map(|r| scalars(r)[c]).collect();
                    if vals.is_empty() {
                        return ColumnStats {
                            max: f64::NAN,
                            min: f64::NAN,
                            mean: f64::NAN,
                        };
                    }
                    ColumnStats {
                        max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                        min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                        mean: vals.iter().sum::<f64>() / vals.len() as f64,
                    }
                })
                .collect();
            Aggregate {
                t: rows[0].t,
                members: rows.len(),
                stats,
            }
        })
        .collect()
}

/// Runs `n_members` members of `cfg`; member `i` uses seed `derive_seed(cfg.seed, i)`.
pub fn run_ensemble(cfg: &Config, model: &Model, n_members: usize) -> EnsembleReport {
    let members: Vec<MemberResult> = (0..n_members)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(cfg.seed, index as u64);
            let result = initial_state(cfg, seed).and_then(|init| integrate(cfg, model, init));
            match result {
                Ok(out) => MemberResult {
                    index,
                    seed,
                    records: out.records,
                    error: out.outcome.err().map(|e| e.to_string()),
                },
                Err(e) => MemberResult {
                    index,
                    seed,
                    records: vec![],
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let aggregates = aggregate(&members);
    let max_unk_sq: Vec<(f64, f64)> = aggregates
        .iter()
        .map(|a| (a.t, a.stats[COL_NORM_UNK].max.powi(2)))
        .collect();
    let omega_hat = fit_decay_rate(&max_unk_sq, None).map(|f| f.omega).unwrap_or(0.0);
    let entry_radius = (0.5 + omega_hat).sqrt();
    let entry_time = aggregates
        .iter()
        .find(|a| a.stats[COL_NORM_UNK].max <= entry_radius)
        .map(|a| a.t);
    EnsembleReport {
        members,
        aggregates,
        omega_hat,
        entry_radius,
        entry_time,
    }
}
