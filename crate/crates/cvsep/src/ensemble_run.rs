//! Parallel ensemble runs over a worker pool. Members are evaluated in any
//! order and collected by index, so reports do not depend on `jobs`.

use cvsep_core::ensemble::{
    accepted_goe_indices, aggregate, evaluate_member, table_groups, EnsembleOptions, EnsembleReport,
    MemberOutcome,
};
use cvsep_core::states::{RandomKind, RandomSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{opt, sig6};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleJob {
    pub kind: EnsembleKind,
    pub count: usize,
    pub energy: f64,
    pub n_photons: f64,
    pub seed: u64,
    /// Zero-based noisy-mode sets.
    pub bath_sets: Vec<Vec<usize>>,
    pub options: EnsembleOptions,
}

/// Every noisy-mode set of the four-mode group table, in group order.
pub fn table_bath_sets() -> Vec<Vec<usize>> {
    table_groups().into_iter().flat_map(|(_, s)| s).collect()
}

pub fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Schema(format!("worker pool: {e}")))
}

pub fn run(job: &EnsembleJob, pool: &rayon::ThreadPool) -> CliResult<EnsembleReport> {
    if job.count == 0 {
        return Err(CliError::Schema("ensemble count must be at least 1".into()));
    }
    if job.bath_sets.is_empty() {
        return Err(CliError::Schema("at least one bath set is required".into()));
    }
    let eval = |i: u64, v: &cvsep_core::symplectic::CovMat| -> CliResult<MemberOutcome> {
        Ok(evaluate_member(i, v, &job.bath_sets, job.n_photons, &job.options)?)
    };
    match job.kind {
        EnsembleKind::Pure => {
            let spec = RandomSpec {
                modes: 4,
                kind: RandomKind::PureHaar { energy: job.energy },
                seed: job.seed,
            };
            let outcomes: Vec<MemberOutcome> = pool.install(|| {
                (0..job.count as u64)
                    .into_par_iter()
                    .map(|i| eval(i, &spec.sample(i)?))
                    .collect::<CliResult<_>>()
            })?;
            let n = job.count as u64;
            Ok(aggregate(&spec, job.n_photons, &job.bath_sets, &outcomes, n, 0))
        }
        EnsembleKind::Mixed => {
            let spec = RandomSpec {
                modes: 4,
                kind: RandomKind::MixedGoe,
                seed: job.seed,
            };
            let (accepted, drawn) = accepted_goe_indices(job.count, job.seed, &job.options)?;
            let outcomes: Vec<MemberOutcome> = pool.install(|| {
                accepted
                    .par_iter()
                    .map(|(i, v)| eval(*i, v))
                    .collect::<CliResult<_>>()
            })?;
            let rejected = drawn - job.count as u64;
            Ok(aggregate(&spec, job.n_photons, &job.bath_sets, &outcomes, drawn, rejected))
        }
    }
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "scope",
    "modes",
    "mean_tau_star",
    "std_err",
    "finite",
    "never_separable",
    "bound_phase",
    "seed",
    "members",
];

/// One CSV row per noisy-mode set and per group.
pub fn summary_rows(r: &EnsembleReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for b in &r.per_bath {
        rows.push(vec![
            "bath".into(),
            b.modes.clone(),
            opt(b.mean_tau_star),
            opt(b.std_err),
            b.finite.to_string(),
            b.never_separable.to_string(),
            b.bound_phase.to_string(),
            r.spec.seed.to_string(),
            r.count.to_string(),
        ]);
    }
    for g in &r.groups {
        rows.push(vec![
            "group".into(),
            g.group.clone(),
            opt(g.mean_tau_star),
            opt(g.std_err),
            g.samples.to_string(),
            String::new(),
            String::new(),
            r.spec.seed.to_string(),
            r.count.to_string(),
        ]);
    }
    rows
}

pub fn render(r: &EnsembleReport) -> String {
    let mut out = format!(
        "{} members (drawn {}, rejected {}), {} failures, bound-phase incidents: {}\n",
        r.count,
        r.candidates_drawn,
        r.rejected,
        r.failures.len(),
        r.bound_phase_incidents
    );
    for g in &r.groups {
        out += &format!(
            "  {:<12} mean tau* {:>9} +- {:<9} (n = {})\n",
            g.group,
            opt(g.mean_tau_star),
            opt(g.std_err),
            g.samples
        );
    }
    for b in &r.incidents {
        out += &format!("  bound phase: member {} bath {} cut {} at tau = {}\n", b.index, b.bath, b.cut, sig6(b.tau));
    }
    for (i, msg) in &r.failures {
        out += &format!("  member {i} failed: {msg}\n");
    }
    out += &format!("  normalization: {}\n", r.normalization);
    out += &format!("  sdp solves: {}\n", sig6(r.sdp_solves as f64));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_size_does_not_change_the_report() {
        let job = EnsembleJob {
            kind: EnsembleKind::Mixed,
            count: 3,
            energy: 12.0,
            n_photons: 4.0,
            seed: 9,
            bath_sets: vec![vec![0], vec![0, 1, 2, 3]],
            options: EnsembleOptions::default(),
        };
        let a = run(&job, &pool(1).unwrap()).unwrap();
        let b = run(&job, &pool(3).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(summary_rows(&a).len(), 2 + 1);
    }
}
