//! Deterministic job execution and the top-level JSON report.
//!
//! Jobs fan out over a dedicated thread pool but are reduced in
//! configuration order, and every randomized section derives its seed from
//! the master seed plus the job key, so the emitted report is byte-identical
//! across runs regardless of thread count or job order.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use superint::exactalg::Rat;
use superint::numerics::{numeric_report, NumCfg, NumericReport};
use superint::reps::{build_rep, check_rep, rep_report, rep_sweep, RepReport, RepRun};
use superint::structure::{
    stackel_transfer, structure_report, verify_structure, StructureReport, SCHEMA_VERSION,
};
use superint::systems::{SystemId, SystemModel};

use crate::config::{JobConfig, JobSpec, PinnedParams};

/// The complete report of one run.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub jobs: Vec<JobReport>,
    /// One numeric cross-check section per distinct ladder order, in first
    /// appearance order.
    pub numerics: Vec<NumericReport>,
    pub all_verified: bool,
}

/// Everything produced for one (system, p, q) job.
#[derive(Debug, Serialize)]
pub struct JobReport {
    pub system: String,
    pub p: i64,
    pub q: i64,
    pub structure: StructureReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<RepsSection>,
}

/// Finite-window representation results attached to a job.
#[derive(Debug, Serialize)]
pub struct RepsSection {
    /// Seed for this section, derived from the master seed and the job key.
    pub seed: u64,
    pub draws: usize,
    pub runs: Vec<RepReport>,
    /// Explicitly pinned parameter pick, when configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinned: Option<RepReport>,
    pub all_verified: bool,
}

/// Engine failure while assembling a report (distinct from a verification
/// that completes and reports `false`).
#[derive(Debug)]
pub struct RunError {
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for RunError {}

/// Derives a section seed from the master seed and a stable key, so results
/// do not depend on job order or thread scheduling (FNV-1a folding).
pub fn job_seed(base: u64, tag: &str, p: i64, q: i64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |byte: u8| {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for b in tag.bytes() {
        eat(b);
    }
    for b in p.to_le_bytes().into_iter().chain(q.to_le_bytes()) {
        eat(b);
    }
    h ^ base
}

/// Resolves named parameter assignments to the model's positional parameter
/// slots (every symbol except the grid label and the ladder index).
pub fn resolve_params(
    model: &SystemModel,
    assignments: &[(String, Rat)],
) -> Result<Vec<Rat>, String> {
    let slots: Vec<&str> = (2..model.vars.len()).map(|i| model.vars.name(i)).collect();
    for (name, _) in assignments {
        if !slots.contains(&name.as_str()) {
            return Err(format!(
                "unknown parameter `{name}` for {}; expected {}",
                model.id.as_str(),
                slots.join(", ")
            ));
        }
    }
    slots
        .iter()
        .map(|slot| {
            assignments
                .iter()
                .find(|(name, _)| name == slot)
                .map(|(_, value)| value.clone())
                .ok_or_else(|| {
                    format!(
                        "missing parameter `{slot}` for {}; expected {}",
                        model.id.as_str(),
                        slots.join(", ")
                    )
                })
        })
        .collect()
}

fn run_job(cfg: &JobConfig, job: &JobSpec) -> Result<JobReport, RunError> {
    let ctx = |detail: String| RunError {
        message: format!(
            "job {} at (p, q) = ({}, {}): {detail}",
            job.system.as_str(),
            job.p,
            job.q
        ),
    };
    let v = verify_structure(job.system, job.p, job.q).map_err(|e| ctx(e.to_string()))?;
    let stackel = if job.system == SystemId::Ttw {
        let kepler = verify_structure(SystemId::KeplerDeformed, job.p, job.q)
            .map_err(|e| ctx(e.to_string()))?;
        Some(stackel_transfer(&v, &kepler).map_err(|e| ctx(e.to_string()))?)
    } else {
        None
    };
    let structure = structure_report(&v, stackel.as_ref());

    let supports_reps = matches!(
        job.system,
        SystemId::CagedOscillator | SystemId::Ttw | SystemId::KeplerDeformed
    );
    let pinned_cfg: Option<&PinnedParams> = cfg
        .rep_params
        .iter()
        .find(|pin| pin.system == job.system);
    let reps = if supports_reps && (cfg.rep_draws > 0 || pinned_cfg.is_some()) {
        let seed = job_seed(cfg.seed, job.system.as_str(), job.p, job.q);
        let runs: Vec<RepRun> = if cfg.rep_draws > 0 {
            rep_sweep(&v, seed, cfg.rep_draws).map_err(|e| ctx(e.to_string()))?
        } else {
            Vec::new()
        };
        let pinned = match pinned_cfg {
            Some(pin) => {
                let params = resolve_params(&v.model, &pin.assignments).map_err(ctx)?;
                let rep = build_rep(
                    &v.model,
                    &params,
                    cfg.rep_offsets.0,
                    cfg.rep_offsets.1,
                    cfg.rep_levels,
                )
                .map_err(|e| ctx(e.to_string()))?;
                let check = check_rep(&rep, &v).map_err(|e| ctx(e.to_string()))?;
                Some(rep_report(&RepRun { rep, check }))
            }
            None => None,
        };
        let run_reports: Vec<RepReport> = runs.iter().map(rep_report).collect();
        let all_verified = run_reports.iter().all(|r| r.check.all_verified)
            && pinned.as_ref().map_or(true, |r| r.check.all_verified);
        Some(RepsSection {
            seed,
            draws: cfg.rep_draws,
            runs: run_reports,
            pinned,
            all_verified,
        })
    } else {
        None
    };

    Ok(JobReport {
        system: job.system.as_str().to_string(),
        p: job.p,
        q: job.q,
        structure,
        reps,
    })
}

/// Runs every configured job and assembles the deterministic report.
pub fn run(cfg: &JobConfig) -> Result<Report, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| RunError {
            message: format!("thread pool: {e}"),
        })?;

    let jobs: Vec<JobReport> = pool.install(|| {
        cfg.jobs
            .par_iter()
            .map(|job| run_job(cfg, job))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut pairs: Vec<(i64, i64)> = Vec::new();
    for j in &cfg.jobs {
        if !pairs.contains(&(j.p, j.q)) {
            pairs.push((j.p, j.q));
        }
    }
    let numerics: Vec<NumericReport> = if cfg.skip_numerics {
        Vec::new()
    } else {
        pool.install(|| {
            pairs
                .par_iter()
                .map(|&(p, q)| {
                    let ncfg = NumCfg {
                        points: cfg.points,
                        seed: job_seed(cfg.seed, "numerics", p, q),
                        tol: cfg.tol,
                    };
                    numeric_report(p, q, &ncfg).map_err(|e| RunError {
                        message: format!("numeric suite at (p, q) = ({p}, {q}): {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })?
    };

    let all_verified = jobs.iter().all(|j| {
        j.structure.all_verified && j.reps.as_ref().map_or(true, |r| r.all_verified)
    }) && numerics.iter().all(|n| n.all_pass);

    Ok(Report {
        schema_version: SCHEMA_VERSION.to_string(),
        jobs,
        numerics,
        all_verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::JobConfig;

    #[test]
    fn section_seeds_are_stable_and_distinct() {
        let a = job_seed(7, "TTW", 1, 2);
        assert_eq!(a, job_seed(7, "TTW", 1, 2));
        assert_ne!(a, job_seed(7, "TTW", 2, 1));
        assert_ne!(a, job_seed(7, "CagedOscillator", 1, 2));
        assert_ne!(a, job_seed(8, "TTW", 1, 2));
    }

    #[test]
    fn single_job_report_is_deterministic_across_thread_counts() {
        let mut cfg = JobConfig::default();
        cfg.jobs = vec![crate::config::JobSpec {
            system: SystemId::Ttw,
            p: 1,
            q: 1,
        }];
        cfg.rep_draws = 2;
        cfg.skip_numerics = true;
        cfg.parallelism = 1;
        let first = serde_json::to_string_pretty(&run(&cfg).unwrap()).unwrap();
        cfg.parallelism = 4;
        let second = serde_json::to_string_pretty(&run(&cfg).unwrap()).unwrap();
        assert_eq!(first, second);
        assert!(first.contains("\"stackel\""));
    }

    #[test]
    fn named_parameters_resolve_in_model_order() {
        let v = verify_structure(SystemId::Ttw, 1, 2).unwrap();
        let names: Vec<String> = (2..v.model.vars.len())
            .map(|i| v.model.vars.name(i).to_string())
            .collect();
        let assignments: Vec<(String, Rat)> = names
            .iter()
            .rev()
            .enumerate()
            .map(|(i, n)| (n.clone(), Rat::from_integer((i as i64 + 1).into())))
            .collect();
        let resolved = resolve_params(&v.model, &assignments).unwrap();
        assert_eq!(resolved.len(), names.len());
        // Reversed input still lands in slot order.
        let last = assignments
            .iter()
            .find(|(n, _)| n == &names[0])
            .map(|(_, r)| r.clone())
            .unwrap();
        assert_eq!(resolved[0], last);

        let err = resolve_params(&v.model, &assignments[..1].to_vec()).unwrap_err();
        assert!(err.contains("missing parameter"), "{err}");
        let err = resolve_params(&v.model, &[("nope".to_string(), Rat::from_integer(1.into()))])
            .unwrap_err();
        assert!(err.contains("unknown parameter `nope`"), "{err}");
    }
}
