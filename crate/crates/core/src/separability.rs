//! Per-cut entanglement classification: PPT test first, then the LMI
//! separability program for PPT cuts with at least two modes on each side.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Mat};
use crate::sdp::{self, PsdProblem, SdpStatus, SdpVerdict};
use crate::symplectic::{self, enumerate_bipartitions, ppt_check, Bipartition, CovMat};

/// Separability threshold on the LMI margin η*.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Margins this close to zero are re-solved at tighter accuracy.
pub const NEAR_BOUNDARY: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum CutLabel {
    Npt,
    Bound,
    Sep,
}

impl CutLabel {
    /// Position along the expected NPT → BOUND → SEP order.
    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Npt => "NPT",
            Self::Bound => "BOUND",
            Self::Sep => "SEP",
        }
    }
}

impl fmt::Display for CutLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Separability {
    Separable,
    Entangled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Extendibility {
    Extendible,
    NotExtendible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SepOptions {
    /// Eigenvalue tolerance of the PPT test.
    pub ppt_tol: f64,
    /// Separable iff η* ≥ −epsilon.
    pub epsilon: f64,
    /// Target accuracy of the SDP solver.
    pub accuracy: f64,
    /// Attach a k = 2 extendibility witness to BOUND cuts.
    pub k_witness: bool,
}

impl Default for SepOptions {
    fn default() -> Self {
        Self {
            ppt_tol: symplectic::EIG_TOL,
            epsilon: DEFAULT_EPSILON,
            accuracy: sdp::DEFAULT_ACCURACY,
            k_witness: false,
        }
    }
}

fn check_modes(v: &CovMat, cut: &Bipartition) -> Result<()> {
    if v.modes() != cut.modes() {
        return Err(invalid!("cut is over {} modes, state has {}", cut.modes(), v.modes()));
    }
    Ok(())
}

fn quadratures(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

/// `[[0, −S], [S, 0]]`, the constant part of a real embedding.
fn embed_constant(s: &Mat) -> Mat {
    let d = s.nrows();
    linalg::real_embed(&Mat::zeros(d, d), s).expect("square by construction")
}

fn doubled(positions: &[usize], offset: usize) -> Vec<usize> {
    positions.iter().map(|&p| p + offset).collect()
}

/// The LMI program: maximize η over symmetric `V_A`, `V_B` with
/// `V − V_A ⊕ V_B ⪰ ηI`, `V_A + iΩ_A ⪰ ηI`, `V_B + iΩ_B ⪰ ηI`.
pub fn lmi_problem(v: &CovMat, cut: &Bipartition) -> Result<PsdProblem> {
    check_modes(v, cut)?;
    let (na, nb) = (cut.side_a().len(), cut.side_b().len());
    let mut p = PsdProblem::new();
    let va = p.add_unknown(2 * na);
    let vb = p.add_unknown(2 * nb);
    let c0 = p.add_constraint(v.matrix().clone(), 1.0);
    p.add_term(c0, va, -1.0, &quadratures(cut.side_a()));
    p.add_term(c0, vb, -1.0, &quadratures(cut.side_b()));
    for (unknown, n) in [(va, na), (vb, nb)] {
        let c = p.add_constraint(embed_constant(&symplectic::omega(n)), 1.0);
        let local: Vec<usize> = (0..2 * n).collect();
        p.add_term(c, unknown, 1.0, &local);
        p.add_term(c, unknown, 1.0, &doubled(&local, 2 * n));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SepResult {
    pub verdict: SdpVerdict,
    /// `None` when the solve did not produce a trustworthy margin.
    pub decision: Option<Separability>,
    pub near_boundary: bool,
}

fn solve_with_refinement(problem: &PsdProblem, opts: &SepOptions) -> Result<SdpVerdict> {
    let first = sdp::solve(problem, opts.accuracy)?;
    let near = matches!(first.eta_star, Some(e) if e.abs() <= NEAR_BOUNDARY);
    if first.status == SdpStatus::NumericalFailure || near {
        let tight = (opts.accuracy * 1e-2).max(1e-13);
        let second = sdp::solve(problem, tight)?;
        if second.status == SdpStatus::Optimal || first.status != SdpStatus::Optimal {
            return Ok(second);
        }
    }
    Ok(first)
}

fn decide(verdict: &SdpVerdict, epsilon: f64) -> Option<bool> {
    match verdict.status {
        SdpStatus::Optimal => verdict.eta_star.map(|e| e >= -epsilon),
        SdpStatus::Infeasible => Some(false),
        // A stalled solve still decides the sign when its bounds agree.
        SdpStatus::NumericalFailure => {
            if verdict.eta_lower.is_some_and(|e| e >= -epsilon) {
                Some(true)
            } else if verdict
                .eta_upper
                .is_some_and(|u| u < -(epsilon + 100.0 * verdict.primal_infeasibility))
            {
                Some(false)
            } else {
                None
            }
        }
    }
}

/// Runs the LMI separability program on one cut.
pub fn lmi_separability(v: &CovMat, cut: &Bipartition, opts: &SepOptions) -> Result<SepResult> {
    let problem = lmi_problem(v, cut)?;
    let verdict = solve_with_refinement(&problem, opts)?;
    let decision = decide(&verdict, opts.epsilon).map(|ok| {
        if ok {
            Separability::Separable
        } else {
            Separability::Entangled
        }
    });
    let near_boundary = matches!(verdict.eta_star, Some(e) if e.abs() <= 10.0 * opts.epsilon);
    Ok(SepResult {
        verdict,
        decision,
        near_boundary,
    })
}

/// The k-extendibility program on side B, `k ≥ 2`: maximize η over
/// symmetric `Δ_B` with `Δ_B + iΩ_B ⪰ ηI` and
/// `V − 0_A ⊕ (1 − 1/k)Δ_B − i(Ω_A ⊕ Ω_B/k) ⪰ ηI`.
pub fn k_extendibility_problem(v: &CovMat, cut: &Bipartition, k: u32) -> Result<PsdProblem> {
    check_modes(v, cut)?;
    if k < 2 {
        return Err(invalid!("the extendibility program needs k >= 2"));
    }
    let n = v.modes();
    let kf = k as f64;
    let nb = cut.side_b().len();
    let form = symplectic::signed_form(n, |m| if cut.contains_a(m) { 1.0 } else { 1.0 / kf });
    let mut p = PsdProblem::new();
    let delta = p.add_unknown(2 * nb);
    let c0 = p.add_constraint(linalg::real_embed(v.matrix(), &(-form))?, 1.0);
    let qb = quadratures(cut.side_b());
    p.add_term(c0, delta, -(1.0 - 1.0 / kf), &qb);
    p.add_term(c0, delta, -(1.0 - 1.0 / kf), &doubled(&qb, 2 * n));
    let c1 = p.add_constraint(embed_constant(&symplectic::omega(nb)), 1.0);
    let local: Vec<usize> = (0..2 * nb).collect();
    p.add_term(c1, delta, 1.0, &local);
    p.add_term(c1, delta, 1.0, &doubled(&local, 2 * nb));
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtResult {
    pub k: u32,
    pub verdict: SdpVerdict,
    pub decision: Option<Extendibility>,
}

/// Tests whether `V` admits a symmetric `k`-copy extension of side B. For
/// `k = 1` the condition is physicality and no program is solved.
pub fn k_extendibility(v: &CovMat, cut: &Bipartition, k: u32, opts: &SepOptions) -> Result<ExtResult> {
    check_modes(v, cut)?;
    if k == 0 {
        return Err(invalid!("k must be at least 1"));
    }
    let verdict = if k == 1 {
        let t = v.physicality(opts.ppt_tol);
        SdpVerdict {
            status: SdpStatus::Optimal,
            eta_star: Some(t.min_eig),
            eta_lower: Some(t.min_eig),
            eta_upper: Some(t.min_eig),
            iterations: 0,
            primal_infeasibility: 0.0,
            dual_infeasibility: 0.0,
            relative_gap: 0.0,
            residual: 0.0,
            detail: Some("k = 1 reduces to the uncertainty relation".into()),
            solution: Vec::new(),
        }
    } else {
        solve_with_refinement(&k_extendibility_problem(v, cut, k)?, opts)?
    };
    let decision = decide(&verdict, opts.epsilon).map(|ok| {
        if ok {
            Extendibility::Extendible
        } else {
            Extendibility::NotExtendible
        }
    });
    Ok(ExtResult { k, verdict, decision })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutVerdict {
    pub cut: Bipartition,
    /// `None` when the separability program failed numerically.
    pub label: Option<CutLabel>,
    pub min_pt_eig: f64,
    /// LMI margin η*, when the program was run.
    pub sep_margin: Option<f64>,
    pub near_boundary: bool,
    pub sdp: Option<SdpVerdict>,
    pub k_witness: Option<ExtResult>,
}

impl CutVerdict {
    pub fn failure_detail(&self) -> Option<String> {
        if self.label.is_some() {
            return None;
        }
        Some(alloc::format!(
            "cut {}: {}",
            self.cut,
            self.sdp
                .as_ref()
                .and_then(|s| s.detail.clone())
                .unwrap_or_else(|| "separability program failed".into())
        ))
    }
}

/// PPT test, then (for PPT cuts) the LMI program. PPT already implies
/// separability when one side is a single mode, so no program is run there.
pub fn classify_cut(v: &CovMat, cut: &Bipartition, opts: &SepOptions) -> Result<CutVerdict> {
    let ppt = ppt_check(v, cut, opts.ppt_tol)?;
    let mut out = CutVerdict {
        cut: cut.clone(),
        label: None,
        min_pt_eig: ppt.min_eig,
        sep_margin: None,
        near_boundary: false,
        sdp: None,
        k_witness: None,
    };
    if !ppt.passed {
        out.label = Some(CutLabel::Npt);
        return Ok(out);
    }
    if cut.is_single_mode() {
        out.label = Some(CutLabel::Sep);
        return Ok(out);
    }
    let sep = lmi_separability(v, cut, opts)?;
    out.sep_margin = sep.verdict.eta_star.or(sep.verdict.eta_lower);
    out.near_boundary = sep.near_boundary;
    out.label = sep.decision.map(|d| match d {
        Separability::Separable => CutLabel::Sep,
        Separability::Entangled => CutLabel::Bound,
    });
    out.sdp = Some(sep.verdict);
    if opts.k_witness && out.label == Some(CutLabel::Bound) {
        out.k_witness = Some(k_extendibility(v, cut, 2, opts)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum GlobalLabel {
    NptEntangled,
    BoundPhase,
    FullySeparable,
}

impl GlobalLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NptEntangled => "NPT_ENTANGLED",
            Self::BoundPhase => "BOUND_PHASE",
            Self::FullySeparable => "FULLY_SEPARABLE",
        }
    }

    /// Every cut separable gives `FullySeparable`; otherwise any cut that is
    /// PPT but entangled gives `BoundPhase`; otherwise `NptEntangled`.
    pub fn from_labels(labels: impl IntoIterator<Item = CutLabel>) -> Self {
        let mut all_sep = true;
        let mut any_bound = false;
        for l in labels {
            all_sep &= l == CutLabel::Sep;
            any_bound |= l == CutLabel::Bound;
        }
        if all_sep {
            Self::FullySeparable
        } else if any_bound {
            Self::BoundPhase
        } else {
            Self::NptEntangled
        }
    }
}

impl fmt::Display for GlobalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateClassification {
    pub cuts: Vec<CutVerdict>,
    /// `None` if any cut is unresolved.
    pub global: Option<GlobalLabel>,
}

impl StateClassification {
    pub fn from_cuts(cuts: Vec<CutVerdict>) -> Self {
        let labels: Option<Vec<CutLabel>> = cuts.iter().map(|c| c.label).collect();
        Self {
            global: labels.map(GlobalLabel::from_labels),
            cuts,
        }
    }

    pub fn label_of(&self, cut: &Bipartition) -> Option<CutLabel> {
        self.cuts.iter().find(|c| &c.cut == cut).and_then(|c| c.label)
    }

    /// The global label, or a numerical-failure error naming the cuts.
    pub fn resolved(&self) -> Result<GlobalLabel> {
        self.global.ok_or_else(|| {
            let details: Vec<String> = self.cuts.iter().filter_map(|c| c.failure_detail()).collect();
            Error::NumericalFailure(details.join("; "))
        })
    }
}

/// Classifies the given cuts, or all cuts when `cuts` is `None`.
pub fn classify_cuts(
    v: &CovMat,
    cuts: Option<&[Bipartition]>,
    opts: &SepOptions,
) -> Result<StateClassification> {
    let owned;
    let cuts = match cuts {
        Some(c) => c,
        None => {
            owned = enumerate_bipartitions(v.modes())?;
            &owned
        }
    };
    let verdicts = cuts
        .iter()
        .map(|c| classify_cut(v, c, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateClassification::from_cuts(verdicts))
}

/// Classifies every cut of a state with at most eight modes.
pub fn classify_state(v: &CovMat, opts: &SepOptions) -> Result<StateClassification> {
    if v.modes() > 8 {
        return Err(invalid!("full classification supports at most 8 modes"));
    }
    classify_cuts(v, None, opts)
}
