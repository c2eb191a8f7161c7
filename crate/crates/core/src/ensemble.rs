//! Seeded ensembles of random initial states: bound-phase incidence and
//! average robustness per noisy-mode set.
//!
//! Member `i` of an ensemble with seed `s` is drawn from substream `i` of
//! `s`, so members can be evaluated in any order or in parallel and the
//! report is a pure function of the inputs.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::analysis::default_grid;
use crate::channel::{evolve, BathSpec, RegularizedTime};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::separability::{classify_cut, CutLabel, SepOptions};
use crate::states::{RandomKind, RandomSpec};
use crate::symplectic::{ppt_check, Bipartition, CovMat};

/// Noisy-mode groups of a four-mode ensemble table, zero-based, with no
/// wraparound: `{i, i+1}` is `{1,2}, {2,3}, {3,4}` and so on.
pub fn table_groups() -> Vec<(&'static str, Vec<Vec<usize>>)> {
    alloc::vec![
        ("{i}", alloc::vec![alloc::vec![0], alloc::vec![1], alloc::vec![2], alloc::vec![3]]),
        ("{i,i+1}", alloc::vec![alloc::vec![0, 1], alloc::vec![1, 2], alloc::vec![2, 3]]),
        ("{i,i+2}", alloc::vec![alloc::vec![0, 2], alloc::vec![1, 3]]),
        ("{i,i+3}", alloc::vec![alloc::vec![0, 3]]),
        ("{i,i+1,i+2}", alloc::vec![alloc::vec![0, 1, 2], alloc::vec![1, 2, 3]]),
        ("{i,i+1,i+3}", alloc::vec![alloc::vec![0, 1, 3]]),
        ("{i,i+2,i+3}", alloc::vec![alloc::vec![0, 2, 3]]),
        ("{1,2,3,4}", alloc::vec![alloc::vec![0, 1, 2, 3]]),
    ]
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleOptions {
    pub sep: SepOptions,
    pub grid_step: f64,
    pub tau_max: f64,
    /// Cuts that enter τ*; `None` means every bipartition.
    pub cuts: Option<Vec<Bipartition>>,
    /// Upper bound on candidates drawn while rejection sampling, as a
    /// multiple of the requested count.
    pub max_draw_factor: u64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            sep: SepOptions::default(),
            grid_step: 0.01,
            tau_max: 0.9999,
            cuts: None,
            max_draw_factor: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathOutcome {
    /// First grid point at which every cut is separable.
    pub tau_star: Option<f64>,
    /// Some cut was PPT but entangled at some grid point.
    pub bound_phase: bool,
    /// First grid point and cut found PPT but entangled.
    pub first_bound: Option<(f64, String)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MemberOutcome {
    pub index: u64,
    /// One entry per bath set, or the failure message.
    pub result: core::result::Result<Vec<BathOutcome>, String>,
    pub sdp_solves: usize,
}

/// Scans the grid for one bath. Local channels never create entanglement,
/// so once a cut is separable it is not re-examined at later grid points.
fn scan_bath(
    v0: &CovMat,
    bath: &BathSpec,
    cuts: &[Bipartition],
    grid: &[f64],
    sep: &SepOptions,
    sdp_solves: &mut usize,
) -> Result<BathOutcome> {
    let mut done = alloc::vec![false; cuts.len()];
    let mut first_bound = None;
    for &tau in grid {
        let v = evolve(v0, bath, RegularizedTime::new(tau)?)?;
        for (k, cut) in cuts.iter().enumerate() {
            if done[k] {
                continue;
            }
            if !ppt_check(&v, cut, sep.ppt_tol)?.passed {
                continue;
            }
            let verdict = classify_cut(&v, cut, sep)?;
            if verdict.sdp.is_some() {
                *sdp_solves += 1;
            }
            match verdict.label {
                Some(CutLabel::Sep) => done[k] = true,
                Some(CutLabel::Bound) => {
                    if first_bound.is_none() {
                        first_bound = Some((tau, cut.label()));
                    }
                }
                Some(CutLabel::Npt) => {}
                None => {
                    return Err(Error::NumericalFailure(
                        verdict.failure_detail().unwrap_or_default(),
                    ))
                }
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(BathOutcome {
                tau_star: Some(tau),
                bound_phase: first_bound.is_some(),
                first_bound,
            });
        }
    }
    Ok(BathOutcome {
        tau_star: None,
        bound_phase: first_bound.is_some(),
        first_bound,
    })
}

/// Evaluates every bath set on one initial state.
pub fn evaluate_member(
    index: u64,
    v0: &CovMat,
    bath_sets: &[Vec<usize>],
    n_photons: f64,
    opts: &EnsembleOptions,
) -> Result<MemberOutcome> {
    let cuts = match &opts.cuts {
        Some(c) => c.clone(),
        None => crate::symplectic::enumerate_bipartitions(v0.modes())?,
    };
    let grid = default_grid(opts.grid_step, opts.tau_max);
    let mut sdp_solves = 0;
    let mut outcomes = Vec::with_capacity(bath_sets.len());
    for modes in bath_sets {
        let bath = BathSpec::new(n_photons, modes)?;
        match scan_bath(v0, &bath, &cuts, &grid, &opts.sep, &mut sdp_solves) {
            Ok(o) => outcomes.push(o),
            Err(Error::NumericalFailure(msg)) => {
                return Ok(MemberOutcome {
                    index,
                    result: Err(alloc::format!("bath {}: {}", bath.label(), msg)),
                    sdp_solves,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MemberOutcome {
        index,
        result: Ok(outcomes),
        sdp_solves,
    })
}

/// Whether some cut of `v` fails the PPT test.
pub fn is_npt_somewhere(v: &CovMat, tol: f64) -> Result<bool> {
    for cut in crate::symplectic::enumerate_bipartitions(v.modes())? {
        if !ppt_check(v, &cut, tol)?.passed {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathStats {
    /// One-based label such as `{1,3}`.
    pub modes: String,
    pub mean_tau_star: Option<f64>,
    pub std_err: Option<f64>,
    /// Members that became separable before `tau_max`.
    pub finite: usize,
    pub never_separable: usize,
    pub bound_phase: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupStats {
    pub group: String,
    pub mean_tau_star: Option<f64>,
    pub std_err: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundIncident {
    pub index: u64,
    pub bath: String,
    pub cut: String,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleReport {
    pub spec: RandomSpec,
    pub n_photons: f64,
    pub count: usize,
    /// Substream index of every evaluated member, in order.
    pub members: Vec<u64>,
    pub candidates_drawn: u64,
    pub rejected: u64,
    pub failures: Vec<(u64, String)>,
    /// Members with a bound phase for at least one bath set.
    pub bound_phase_incidents: usize,
    /// Every bound phase seen, in member order.
    pub incidents: Vec<BoundIncident>,
    pub per_bath: Vec<BathStats>,
    /// Averages over the groups of [`table_groups`] whose sets were all scanned.
    pub groups: Vec<GroupStats>,
    pub sdp_solves: usize,
    pub normalization: String,
}

fn mean_and_se(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

fn label(modes: &[usize]) -> String {
    let parts: Vec<String> = modes.iter().map(|m| alloc::format!("{}", m + 1)).collect();
    alloc::format!("{{{}}}", parts.join(","))
}

fn normalization(kind: &RandomKind) -> String {
    match kind {
        RandomKind::PureHaar { energy } => alloc::format!(
            "Haar orthosymplectic, flat Dirichlet split of excess trace in cosh(2r)-1, E = {energy}"
        ),
        RandomKind::MixedGoe => {
            "G = (M + M^T)/sqrt(2), M iid N(0,1); V = G + lambda_max(i Omega - G) I".into()
        }
    }
}

/// Combines member outcomes (in the given order) into a report.
pub fn aggregate(
    spec: &RandomSpec,
    n_photons: f64,
    bath_sets: &[Vec<usize>],
    outcomes: &[MemberOutcome],
    candidates_drawn: u64,
    rejected: u64,
) -> EnsembleReport {
    let mut failures = Vec::new();
    let mut ok: Vec<&Vec<BathOutcome>> = Vec::new();
    let mut incidents = Vec::new();
    let mut sdp_solves = 0;
    for o in outcomes {
        sdp_solves += o.sdp_solves;
        match &o.result {
            Ok(r) => {
                for (b, out) in r.iter().enumerate() {
                    if let Some((tau, cut)) = &out.first_bound {
                        incidents.push(BoundIncident {
                            index: o.index,
                            bath: label(&bath_sets[b]),
                            cut: cut.clone(),
                            tau: *tau,
                        });
                    }
                }
                ok.push(r)
            }
            Err(msg) => failures.push((o.index, msg.clone())),
        }
    }
    let per_bath: Vec<BathStats> = bath_sets
        .iter()
        .enumerate()
        .map(|(b, modes)| {
            let taus: Vec<f64> = ok.iter().filter_map(|r| r[b].tau_star).collect();
            let (mean, se) = mean_and_se(&taus);
            BathStats {
                modes: label(modes),
                mean_tau_star: mean,
                std_err: se,
                finite: taus.len(),
                never_separable: ok.len() - taus.len(),
                bound_phase: ok.iter().filter(|r| r[b].bound_phase).count(),
            }
        })
        .collect();
    let mut groups = Vec::new();
    for (name, sets) in table_groups() {
        let idx: Option<Vec<usize>> = sets
            .iter()
            .map(|s| bath_sets.iter().position(|b| b == s))
            .collect();
        let Some(idx) = idx else { continue };
        let taus: Vec<f64> = ok
            .iter()
            .flat_map(|r| idx.iter().filter_map(|&b| r[b].tau_star))
            .collect();
        let (mean, se) = mean_and_se(&taus);
        groups.push(GroupStats {
            group: name.into(),
            mean_tau_star: mean,
            std_err: se,
            samples: taus.len(),
        });
    }
    EnsembleReport {
        spec: *spec,
        n_photons,
        count: outcomes.len(),
        members: outcomes.iter().map(|o| o.index).collect(),
        candidates_drawn,
        rejected,
        failures,
        bound_phase_incidents: ok
            .iter()
            .filter(|r| r.iter().any(|b| b.bound_phase))
            .count(),
        incidents,
        per_bath,
        groups,
        sdp_solves,
        normalization: normalization(&spec.kind),
    }
}

fn check_inputs(count: usize, bath_sets: &[Vec<usize>]) -> Result<()> {
    if count == 0 {
        return Err(invalid!("ensemble count must be at least 1"));
    }
    if bath_sets.is_empty() {
        return Err(invalid!("at least one bath set is required"));
    }
    Ok(())
}

/// Random pure four-mode states of trace `energy`.
pub fn scan_pure(
    count: usize,
    energy: f64,
    bath_sets: &[Vec<usize>],
    n_photons: f64,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleReport> {
    check_inputs(count, bath_sets)?;
    let spec = RandomSpec {
        modes: 4,
        kind: RandomKind::PureHaar { energy },
        seed,
    };
    let outcomes = (0..count as u64)
        .map(|i| evaluate_member(i, &spec.sample(i)?, bath_sets, n_photons, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&spec, n_photons, bath_sets, &outcomes, count as u64, 0))
}

/// Substream indices of the first `count` GOE candidates that are NPT in
/// some cut, with the number of candidates drawn.
pub fn accepted_goe_indices(
    count: usize,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<(Vec<(u64, CovMat)>, u64)> {
    let spec = RandomSpec {
        modes: 4,
        kind: RandomKind::MixedGoe,
        seed,
    };
    let limit = count as u64 * opts.max_draw_factor.max(1);
    let mut accepted = Vec::with_capacity(count);
    let mut drawn = 0u64;
    while accepted.len() < count {
        if drawn >= limit {
            return Err(Error::NumericalFailure(alloc::format!(
                "only {} of {} NPT states after {} draws",
                accepted.len(),
                count,
                drawn
            )));
        }
        let v = spec.sample(drawn)?;
        if is_npt_somewhere(&v, opts.sep.ppt_tol)? {
            accepted.push((drawn, v));
        }
        drawn += 1;
    }
    Ok((accepted, drawn))
}

/// GOE-shift mixed four-mode states, keeping those NPT in at least one cut.
pub fn scan_mixed_goe(
    count: usize,
    bath_sets: &[Vec<usize>],
    n_photons: f64,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleReport> {
    check_inputs(count, bath_sets)?;
    let spec = RandomSpec {
        modes: 4,
        kind: RandomKind::MixedGoe,
        seed,
    };
    let (accepted, drawn) = accepted_goe_indices(count, seed, opts)?;
    let outcomes = accepted
        .iter()
        .map(|(i, v)| evaluate_member(*i, v, bath_sets, n_photons, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(
        &spec,
        n_photons,
        bath_sets,
        &outcomes,
        drawn,
        drawn - count as u64,
    ))
}

/// Eigenvalues of `V + iΩ̃` for `cut` as `(value, multiplicity)` clusters.
/// Multiplicities are those of the Hermitian matrix, i.e. half of the
/// count in its real embedding.
pub fn pt_spectrum_signature(v: &CovMat, cut: &Bipartition) -> Result<Vec<(f64, usize)>> {
    if v.modes() != cut.modes() {
        return Err(invalid!("cut does not match the state"));
    }
    let e = linalg::real_embed(v.matrix(), &cut.signed_form())?;
    let scale = 1.0 + linalg::max_abs(v.matrix());
    let clusters = linalg::cluster_sorted(&linalg::sym_eigenvalues(&e), 1e-8 * scale);
    Ok(clusters.into_iter().map(|(x, m)| (x, m / 2)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_cover_the_table() {
        let g = table_groups();
        assert_eq!(g.len(), 8);
        assert_eq!(g[2].1, [[0, 2], [1, 3]]);
        let total: usize = g.iter().map(|(_, s)| s.len()).sum();
        assert_eq!(total, 15);
    }

    #[test]
    fn vacuum_budget_is_separable_at_zero() {
        let r = scan_pure(1, 8.0, &[alloc::vec![0, 1]], 4.0, 1, &EnsembleOptions::default()).unwrap();
        assert_eq!(r.per_bath[0].mean_tau_star, Some(0.0));
        assert_eq!(r.bound_phase_incidents, 0);
    }

    #[test]
    fn mean_and_standard_error() {
        let (m, s) = mean_and_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_se(&[]), (None, None));
    }

    #[test]
    fn rejects_empty_inputs() {
        let o = EnsembleOptions::default();
        assert!(scan_pure(0, 12.0, &[alloc::vec![0]], 4.0, 1, &o).is_err());
        assert!(scan_mixed_goe(3, &[], 4.0, 1, &o).is_err());
    }

    #[test]
    fn werner_wolf_signature() {
        let cut = Bipartition::parse(4, "12:34").unwrap();
        let sig = pt_spectrum_signature(&crate::states::werner_wolf(), &cut).unwrap();
        let s3 = 3.0f64.sqrt();
        let want = [0.0, 3.0 - s3, 3.0, 3.0 + s3];
        assert_eq!(sig.len(), 4);
        for ((x, m), w) in sig.iter().zip(want) {
            assert!((x - w).abs() < 1e-9);
            assert_eq!(*m, 2);
        }
    }
}
