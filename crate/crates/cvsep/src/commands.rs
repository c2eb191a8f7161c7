//! The classify, robustness and timeline commands and their records.

use std::time::Instant;

use cvsep_core::analysis::{
    default_grid, robustness, round2, timeline, RobustnessResult, Root, Timeline,
};
use cvsep_core::channel::{evolve, RegularizedTime};
use cvsep_core::separability::{classify_cuts, CutLabel, CutVerdict, SepOptions, StateClassification};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{opt, sig6};
use crate::scenario::Scenario;

pub const TOOL: &str = "cvsep";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub cut: String,
    pub label: Option<String>,
    pub min_pt_eig: f64,
    pub sep_margin: Option<f64>,
    pub near_boundary: bool,
    pub sdp_status: Option<String>,
    pub sdp_iterations: Option<usize>,
    pub sdp_gap: Option<f64>,
    pub detail: Option<String>,
}

impl CutRecord {
    fn new(v: &CutVerdict) -> Self {
        Self {
            cut: v.cut.label(),
            label: v.label.map(|l| l.as_str().to_string()),
            min_pt_eig: v.min_pt_eig,
            sep_margin: v.sep_margin,
            near_boundary: v.near_boundary,
            sdp_status: v.sdp.as_ref().map(|s| format!("{:?}", s.status)),
            sdp_iterations: v.sdp.as_ref().map(|s| s.iterations),
            sdp_gap: v.sdp.as_ref().map(|s| s.relative_gap).filter(|g| g.is_finite()),
            detail: v.sdp.as_ref().and_then(|s| s.detail.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub tau: f64,
    pub global: Option<String>,
    pub cuts: Vec<CutRecord>,
}

impl ClassificationRecord {
    fn new(tau: f64, c: &StateClassification) -> Self {
        Self {
            tau,
            global: c.global.map(|g| g.as_str().to_string()),
            cuts: c.cuts.iter().map(CutRecord::new).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    /// First grid point past the transition, to two decimals.
    pub value: f64,
    pub bisected: f64,
    pub bracket: (f64, f64),
}

impl RootRecord {
    fn new(r: &Root) -> Self {
        Self {
            value: round2(r.grid_tau),
            bisected: r.tau,
            bracket: r.bracket,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerCutRecord {
    pub cut: String,
    /// First grid point with this cut PPT but entangled.
    pub tau_be: Option<f64>,
    /// First grid point with this cut separable.
    pub tau_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRecord {
    pub tau_be: Option<RootRecord>,
    pub tau_star: Option<RootRecord>,
    pub grid_points: usize,
    pub bisection_points: usize,
    pub per_cut: Vec<PerCutRecord>,
}

impl RobustnessRecord {
    pub fn new(r: &RobustnessResult) -> Self {
        Self {
            tau_be: r.tau_be.as_ref().map(RootRecord::new),
            tau_star: r.tau_star.as_ref().map(RootRecord::new),
            grid_points: r.timeline.points.len(),
            bisection_points: r.bisection_points,
            per_cut: per_cut(&r.timeline),
        }
    }
}

fn per_cut(tl: &Timeline) -> Vec<PerCutRecord> {
    tl.cuts
        .iter()
        .enumerate()
        .map(|(i, cut)| {
            let labels = tl.cut_labels(i);
            let first = |l: CutLabel| {
                labels
                    .iter()
                    .position(|&x| x == Some(l))
                    .map(|k| round2(tl.points[k].tau))
            };
            PerCutRecord {
                cut: cut.label(),
                tau_be: first(CutLabel::Bound),
                tau_star: first(CutLabel::Sep),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: Scenario,
    pub sdp_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robustness: Option<RobustnessRecord>,
    pub wall_clock_seconds: f64,
}

impl ResultRecord {
    fn new(command: &str, scenario: &Scenario, sep: &SepOptions) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            scenario: scenario.clone(),
            sdp_accuracy: sep.accuracy,
            classification: None,
            robustness: None,
            wall_clock_seconds: 0.0,
        }
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.classification {
            out += &format!(
                "tau = {}  global: {}\n",
                sig6(c.tau),
                c.global.as_deref().unwrap_or("UNDECIDED")
            );
            for k in &c.cuts {
                out += &format!(
                    "  {:<8} {:<9} min PT eig {:>12}  margin {:>12}\n",
                    k.cut,
                    k.label.as_deref().unwrap_or("FAILED"),
                    sig6(k.min_pt_eig),
                    opt(k.sep_margin),
                );
            }
        }
        if let Some(r) = &self.robustness {
            let show = |x: &Option<RootRecord>| match x {
                Some(r) => format!(
                    "{:.2}  (bisected {:.4} in [{:.4}, {:.4}])",
                    r.value, r.bisected, r.bracket.0, r.bracket.1
                ),
                None => "-".into(),
            };
            out += &format!("tau_BE = {}\n", show(&r.tau_be));
            out += &format!("tau*   = {}\n", show(&r.tau_star));
            for c in &r.per_cut {
                let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
                out += &format!("  {:<8} BOUND from {:<5} SEP from {}\n", c.cut, f(c.tau_be), f(c.tau_star));
            }
        }
        out
    }
}

/// Solver settings, with the accuracy taken from the environment if set.
pub fn sep_options(accuracy: Option<f64>) -> CliResult<SepOptions> {
    let mut o = SepOptions::default();
    if let Some(a) = accuracy {
        if !(a > 0.0 && a < 1e-2) {
            return Err(CliError::Schema(format!("SDP accuracy must lie in (0, 0.01), got {a}")));
        }
        o.accuracy = a;
    }
    Ok(o)
}

pub fn classify(scenario: &Scenario, sep: &SepOptions) -> CliResult<ResultRecord> {
    let start = Instant::now();
    scenario.validate()?;
    let v0 = scenario.state.build()?;
    let tau = scenario.bath.as_ref().and_then(|b| b.tau).unwrap_or(0.0);
    let v = match scenario.bath_spec(v0.modes())? {
        Some(b) => evolve(&v0, &b, RegularizedTime::new(tau)?)?,
        None => v0,
    };
    let cuts = scenario.cut_filter(v.modes())?;
    let c = classify_cuts(&v, cuts.as_deref(), sep)?;
    let mut rec = ResultRecord::new("classify", scenario, sep);
    rec.classification = Some(ClassificationRecord::new(tau, &c));
    rec.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(rec)
}

/// Returns the first failed cut, if any.
pub fn undecided(rec: &ResultRecord) -> Option<CliError> {
    let c = rec.classification.as_ref()?;
    let bad = c.cuts.iter().find(|k| k.label.is_none())?;
    Some(CliError::Numerical(format!(
        "cut {}: {}",
        bad.cut,
        bad.detail.as_deref().unwrap_or("no decision")
    )))
}

pub fn robustness_record(scenario: &Scenario, sep: &SepOptions) -> CliResult<ResultRecord> {
    let start = Instant::now();
    scenario.validate()?;
    let v0 = scenario.state.build()?;
    let bath = scenario.require_bath(v0.modes())?;
    let mut opts = scenario.analysis_options(*sep);
    opts.cuts = scenario.cut_filter(v0.modes())?;
    let r = robustness(&v0, &bath, &opts)?;
    let mut rec = ResultRecord::new("robustness", scenario, sep);
    rec.robustness = Some(RobustnessRecord::new(&r));
    rec.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(rec)
}

pub const TIMELINE_HEADER: [&str; 6] = ["tau", "cut", "label", "min_pt_eig", "sep_margin", "global"];

pub fn timeline_rows(scenario: &Scenario, sep: &SepOptions) -> CliResult<(Timeline, Vec<Vec<String>>)> {
    scenario.validate()?;
    let v0 = scenario.state.build()?;
    let bath = scenario.require_bath(v0.modes())?;
    let mut opts = scenario.analysis_options(*sep);
    opts.cuts = scenario.cut_filter(v0.modes())?;
    opts.validate()?;
    let tl = timeline(&v0, &bath, &default_grid(opts.grid_step, opts.tau_max), &opts)?;
    let mut rows = Vec::new();
    for p in &tl.points {
        let global = p.global().map_or("UNDECIDED", |g| g.as_str());
        for v in &p.classification.cuts {
            rows.push(vec![
                sig6(p.tau),
                v.cut.label(),
                v.label.map_or("FAILED", |l| l.as_str()).to_string(),
                sig6(v.min_pt_eig),
                opt(v.sep_margin),
                global.to_string(),
            ]);
        }
    }
    Ok((tl, rows))
}
