//! Phase timelines over the regularized time and bisection for the
//! robustness time τ* and the bound-entanglement onset τ_BE.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::channel::{evolve, BathSpec, RegularizedTime};
use crate::error::{invalid, Error, Result};
use crate::separability::{classify_cuts, CutLabel, GlobalLabel, SepOptions, StateClassification};
use crate::symplectic::{enumerate_bipartitions, Bipartition, CovMat};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnalysisOptions {
    pub sep: SepOptions,
    pub grid_step: f64,
    pub tau_max: f64,
    /// Bisection stops once the bracket is at most this wide.
    pub tol: f64,
    /// Cuts that enter the labels; `None` means every bipartition.
    pub cuts: Option<Vec<Bipartition>>,
    /// Stop the coarse scan at the first fully separable grid point
    /// instead of scanning up to `tau_max`.
    pub stop_at_separable: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            sep: SepOptions::default(),
            grid_step: 0.01,
            tau_max: 0.9999,
            tol: 1e-3,
            cuts: None,
            stop_at_separable: false,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0 && self.grid_step < 1.0) {
            return Err(invalid!("grid step must lie in (0, 1), got {}", self.grid_step));
        }
        if !(self.tau_max > 0.0 && self.tau_max < 1.0) {
            return Err(invalid!("tau_max must lie in (0, 1), got {}", self.tau_max));
        }
        if !(self.tol > 0.0 && self.tol <= self.grid_step) {
            return Err(invalid!("tol must lie in (0, grid_step], got {}", self.tol));
        }
        Ok(())
    }

    pub fn cuts_for(&self, modes: usize) -> Result<Vec<Bipartition>> {
        match &self.cuts {
            Some(c) if c.is_empty() => Err(invalid!("cut filter is empty")),
            Some(c) => {
                if let Some(bad) = c.iter().find(|c| c.modes() != modes) {
                    return Err(invalid!("cut {} does not match {} modes", bad, modes));
                }
                Ok(c.clone())
            }
            None => enumerate_bipartitions(modes),
        }
    }
}

/// `0, step, 2·step, …` below `tau_max`, then `tau_max` itself.
pub fn default_grid(step: f64, tau_max: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        // Round to the step's decimal resolution so 0.01·k prints cleanly.
        let tau = (k as f64 * step * 1e9).round() / 1e9;
        if tau >= tau_max {
            break;
        }
        grid.push(tau);
        k += 1;
    }
    grid.push(tau_max);
    grid
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimelinePoint {
    pub tau: f64,
    pub classification: StateClassification,
}

impl TimelinePoint {
    pub fn global(&self) -> Option<GlobalLabel> {
        self.classification.global
    }

    pub fn label(&self, cut: usize) -> Option<CutLabel> {
        self.classification.cuts[cut].label
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Timeline {
    pub cuts: Vec<Bipartition>,
    pub points: Vec<TimelinePoint>,
}

impl Timeline {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau).collect()
    }

    pub fn labels(&self) -> Vec<Option<GlobalLabel>> {
        self.points.iter().map(|p| p.global()).collect()
    }

    /// Labels of cut `index` along the grid.
    pub fn cut_labels(&self, index: usize) -> Vec<Option<CutLabel>> {
        self.points.iter().map(|p| p.label(index)).collect()
    }

    /// Grid points where some cut steps back along NPT → BOUND → SEP.
    pub fn reentrant_points(&self) -> Vec<(f64, String)> {
        let mut out = Vec::new();
        for (c, cut) in self.cuts.iter().enumerate() {
            let mut best: Option<CutLabel> = None;
            for p in &self.points {
                let Some(l) = p.label(c) else { continue };
                match best {
                    Some(b) if l.rank() < b.rank() => {
                        out.push((p.tau, alloc::format!("{cut}: {b} -> {l}")));
                    }
                    _ => best = Some(l),
                }
            }
        }
        out
    }
}

fn classify_at(
    v0: &CovMat,
    bath: &BathSpec,
    tau: f64,
    cuts: &[Bipartition],
    sep: &SepOptions,
) -> Result<StateClassification> {
    let v = evolve(v0, bath, RegularizedTime::new(tau)?)?;
    let mut c = classify_cuts(&v, Some(cuts), sep)?;
    for cut in &mut c.cuts {
        if let Some(s) = cut.sdp.as_mut() {
            s.solution.clear();
        }
    }
    Ok(c)
}

/// Classifies `evolve(v0, bath, τ)` at every point of `grid`.
pub fn timeline(v0: &CovMat, bath: &BathSpec, grid: &[f64], opts: &AnalysisOptions) -> Result<Timeline> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid!("grid must be strictly ascending"));
    }
    let cuts = opts.cuts_for(v0.modes())?;
    let mut points = Vec::with_capacity(grid.len());
    for &tau in grid {
        let classification = classify_at(v0, bath, tau, &cuts, &opts.sep)?;
        let done = classification.global == Some(GlobalLabel::FullySeparable);
        points.push(TimelinePoint { tau, classification });
        if done && opts.stop_at_separable {
            break;
        }
    }
    Ok(Timeline { cuts, points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Root {
    /// Upper end of the final bracket: the earliest τ known to be past the
    /// transition.
    pub tau: f64,
    pub bracket: (f64, f64),
    /// First grid point past the transition.
    pub grid_tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobustnessResult {
    pub tau_star: Option<Root>,
    pub tau_be: Option<Root>,
    pub timeline: Timeline,
    /// Classifications spent on bisection after the coarse scan.
    pub bisection_points: usize,
}

impl RobustnessResult {
    pub fn tau_star(&self) -> Option<f64> {
        self.tau_star.map(|r| r.tau)
    }

    pub fn tau_be(&self) -> Option<f64> {
        self.tau_be.map(|r| r.tau)
    }
}

fn all_sep(c: &StateClassification) -> Result<bool> {
    Ok(c.resolved()? == GlobalLabel::FullySeparable)
}

fn any_bound(c: &StateClassification) -> Result<bool> {
    c.resolved()?;
    Ok(c.cuts.iter().any(|v| v.label == Some(CutLabel::Bound)))
}

fn ranks(c: &StateClassification) -> Vec<u8> {
    c.cuts.iter().map(|v| v.label.map_or(0, CutLabel::rank)).collect()
}

struct Bisector<'a> {
    v0: &'a CovMat,
    bath: &'a BathSpec,
    cuts: &'a [Bipartition],
    opts: &'a AnalysisOptions,
    evaluations: usize,
}

impl Bisector<'_> {
    /// Narrows `[lo, hi]`, where `pred` is false at `lo` and true at `hi`.
    fn run(
        &mut self,
        mut lo: (f64, StateClassification),
        mut hi: (f64, StateClassification),
        pred: fn(&StateClassification) -> Result<bool>,
    ) -> Result<(f64, f64)> {
        while hi.0 - lo.0 > self.opts.tol {
            let mid = 0.5 * (lo.0 + hi.0);
            let c = classify_at(self.v0, self.bath, mid, self.cuts, &self.opts.sep)?;
            self.evaluations += 1;
            let (rl, rm, rh) = (ranks(&lo.1), ranks(&c), ranks(&hi.1));
            let mut offending = Vec::new();
            for (k, cut) in self.cuts.iter().enumerate() {
                if rm[k] < rl[k] || rm[k] > rh[k] {
                    offending.push((mid, alloc::format!("{cut}: rank {} between {} and {}", rm[k], rl[k], rh[k])));
                }
            }
            if !offending.is_empty() {
                return Err(Error::ReentrantPhase { offending });
            }
            if pred(&c)? {
                hi = (mid, c);
            } else {
                lo = (mid, c);
            }
        }
        Ok((lo.0, hi.0))
    }
}

fn locate(
    v0: &CovMat,
    bath: &BathSpec,
    cuts: Vec<Bipartition>,
    opts: &AnalysisOptions,
) -> Result<RobustnessResult> {
    opts.validate()?;
    let grid = default_grid(opts.grid_step, opts.tau_max);
    let local = AnalysisOptions {
        cuts: Some(cuts.clone()),
        ..opts.clone()
    };
    let tl = timeline(v0, bath, &grid, &local)?;
    for p in &tl.points {
        p.classification.resolved().map_err(|e| match e {
            Error::NumericalFailure(d) => Error::NumericalFailure(alloc::format!("tau = {}: {}", p.tau, d)),
            other => other,
        })?;
    }
    let bad = tl.reentrant_points();
    if !bad.is_empty() {
        return Err(Error::ReentrantPhase { offending: bad });
    }
    let mut b = Bisector {
        v0,
        bath,
        cuts: &cuts,
        opts,
        evaluations: 0,
    };
    let pts = &tl.points;
    let find = |pred: fn(&StateClassification) -> Result<bool>| -> Result<Option<usize>> {
        for (i, p) in pts.iter().enumerate() {
            if pred(&p.classification)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    };
    let refine = |b: &mut Bisector, i: usize, pred: fn(&StateClassification) -> Result<bool>| -> Result<Root> {
        if i == 0 {
            return Ok(Root {
                tau: pts[0].tau,
                bracket: (pts[0].tau, pts[0].tau),
                grid_tau: pts[0].tau,
            });
        }
        let lo = (pts[i - 1].tau, pts[i - 1].classification.clone());
        let hi = (pts[i].tau, pts[i].classification.clone());
        let bracket = b.run(lo, hi, pred)?;
        Ok(Root {
            tau: bracket.1,
            bracket,
            grid_tau: pts[i].tau,
        })
    };
    let tau_star = match find(all_sep)? {
        Some(i) => Some(refine(&mut b, i, all_sep)?),
        None => None,
    };
    let tau_be = match find(any_bound)? {
        Some(i) => Some(refine(&mut b, i, any_bound)?),
        None => None,
    };
    let bisection_points = b.evaluations;
    Ok(RobustnessResult {
        tau_star,
        tau_be,
        timeline: tl,
        bisection_points,
    })
}

/// τ* (first τ at which every considered cut is separable) and τ_BE (first τ
/// at which some considered cut is PPT but entangled), each refined by
/// bisection to `opts.tol`.
pub fn robustness(v0: &CovMat, bath: &BathSpec, opts: &AnalysisOptions) -> Result<RobustnessResult> {
    let cuts = opts.cuts_for(v0.modes())?;
    locate(v0, bath, cuts, opts)
}

/// As [`robustness`], tracking the labels of a single cut.
pub fn robustness_per_cut(
    v0: &CovMat,
    bath: &BathSpec,
    cut: &Bipartition,
    opts: &AnalysisOptions,
) -> Result<RobustnessResult> {
    if cut.modes() != v0.modes() {
        return Err(invalid!("cut {} does not match {} modes", cut, v0.modes()));
    }
    locate(v0, bath, alloc::vec![cut.clone()], opts)
}

/// Rounds to two decimals for comparison with tabulated values.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = default_grid(0.01, 0.9999);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[37], 0.37);
        assert_eq!(g[99], 0.99);
        assert_eq!(g[100], 0.9999);
        assert_eq!(default_grid(0.25, 0.9), [0.0, 0.25, 0.5, 0.75, 0.9]);
    }

    #[test]
    fn option_validation() {
        let v = CovMat::vacuum(4);
        let b = BathSpec::all_modes(1.0, 4).unwrap();
        let bad = AnalysisOptions { tol: 0.5, ..Default::default() };
        assert!(robustness(&v, &b, &bad).is_err());
        let bad = AnalysisOptions { tau_max: 1.0, ..Default::default() };
        assert!(robustness(&v, &b, &bad).is_err());
        let bad = AnalysisOptions { cuts: Some(Vec::new()), ..Default::default() };
        assert!(robustness(&v, &b, &bad).is_err());
    }

    #[test]
    fn vacuum_is_separable_from_the_start() {
        let v = CovMat::vacuum(4);
        let b = BathSpec::new(4.0, &[0, 2]).unwrap();
        let opts = AnalysisOptions { grid_step: 0.25, tol: 0.01, ..Default::default() };
        let r = robustness(&v, &b, &opts).unwrap();
        assert_eq!(r.tau_star(), Some(0.0));
        assert!(r.tau_be.is_none());
        assert!(r.timeline.labels().iter().all(|l| *l == Some(GlobalLabel::FullySeparable)));
    }

    #[test]
    fn reentrance_detection() {
        use crate::separability::{CutVerdict, StateClassification};
        let cut = Bipartition::parse(2, "1:2").unwrap();
        let point = |tau, label| TimelinePoint {
            tau,
            classification: StateClassification::from_cuts(alloc::vec![CutVerdict {
                cut: cut.clone(),
                label: Some(label),
                min_pt_eig: 0.0,
                sep_margin: None,
                near_boundary: false,
                sdp: None,
                k_witness: None,
            }]),
        };
        let tl = Timeline {
            cuts: alloc::vec![cut.clone()],
            points: alloc::vec![point(0.0, CutLabel::Npt), point(0.1, CutLabel::Sep), point(0.2, CutLabel::Npt)],
        };
        let bad = tl.reentrant_points();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].0, 0.2);
    }
}
