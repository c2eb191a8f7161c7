//! Recomputes the reference tables and diffs them cell by cell.

use cvsep_core::analysis::{robustness, robustness_per_cut, round2, RobustnessResult};
use cvsep_core::ensemble::{EnsembleOptions, EnsembleReport};
use cvsep_core::separability::SepOptions;
use cvsep_core::symplectic::Bipartition;
use rayon::prelude::*;

use crate::ensemble_run::{self, EnsembleJob, EnsembleKind};
use crate::error::{CliError, CliResult};
use crate::output::{opt, sig6};
use crate::scenario::Scenario;
use crate::tables::{self, modes_label, Cell, CellKind, Expect, Table, TableId};

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub tau_be: Option<f64>,
    pub tau_star: Option<f64>,
    pub tau_star_bisected: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCheck {
    pub cells: (usize, usize),
    pub difference: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct TableReport {
    pub table: Table,
    pub results: Vec<CellResult>,
    pub symmetry: Vec<SymmetryCheck>,
    pub ensemble: Option<EnsembleReport>,
}

/// Compares ensemble group means with the group table.
pub fn group_results(table: &Table, report: &EnsembleReport) -> Vec<CellResult> {
    table
        .cells
        .iter()
        .map(|cell| {
            let CellKind::EnsembleGroup { group } = &cell.kind else {
                return failed("not an ensemble cell".into());
            };
            let mean = report
                .groups
                .iter()
                .find(|g| &g.group == group)
                .and_then(|g| g.mean_tau_star);
            judge(cell, None, mean, mean)
        })
        .collect()
}

/// True when `computed` matches `expect` to within `tol`.
pub fn matches(expect: Expect, computed: Option<f64>, tol: f64) -> bool {
    match (expect, computed) {
        (Expect::Unlisted, _) => true,
        (Expect::Absent, c) => c.is_none(),
        (Expect::Value(x), Some(c)) => (x - c).abs() <= tol + 1e-9,
        (Expect::Value(_), None) => false,
    }
}

fn judge(cell: &Cell, tau_be: Option<f64>, tau_star: Option<f64>, bisected: Option<f64>) -> CellResult {
    CellResult {
        tau_be,
        tau_star,
        tau_star_bisected: bisected,
        pass: matches(cell.be, tau_be, cell.tol) && matches(cell.star, tau_star, cell.tol),
        note: None,
    }
}

fn failed(note: String) -> CellResult {
    CellResult {
        tau_be: None,
        tau_star: None,
        tau_star_bisected: None,
        pass: false,
        note: Some(note),
    }
}

fn run_robustness(scenario: &Scenario, per_cut: Option<&str>, sep: &SepOptions) -> CliResult<RobustnessResult> {
    scenario.validate()?;
    let v0 = scenario.state.build()?;
    let bath = scenario.require_bath(v0.modes())?;
    let mut opts = scenario.analysis_options(*sep);
    Ok(match per_cut {
        Some(label) => {
            let cut = Bipartition::parse(v0.modes(), label)?;
            robustness_per_cut(&v0, &bath, &cut, &opts)?
        }
        None => {
            opts.cuts = scenario.cut_filter(v0.modes())?;
            robustness(&v0, &bath, &opts)?
        }
    })
}

/// Recomputes one robustness cell.
pub fn evaluate_cell(cell: &Cell, sep: &SepOptions) -> CellResult {
    let CellKind::Robustness { scenario, per_cut } = &cell.kind else {
        return failed("ensemble cell in a robustness table".into());
    };
    match run_robustness(scenario, per_cut.as_deref(), sep) {
        Ok(r) => judge(
            cell,
            r.tau_be.as_ref().map(|x| round2(x.grid_tau)),
            r.tau_star.as_ref().map(|x| round2(x.grid_tau)),
            r.tau_star.as_ref().map(|x| x.tau),
        ),
        Err(e) => failed(e.to_string()),
    }
}

/// The ensemble behind the group table.
pub fn ensemble_job(sep: &SepOptions) -> EnsembleJob {
    EnsembleJob {
        kind: EnsembleKind::Mixed,
        count: tables::ENSEMBLE_COUNT,
        energy: 0.0,
        n_photons: 4.0,
        seed: tables::ENSEMBLE_SEED,
        bath_sets: ensemble_run::table_bath_sets(),
        options: EnsembleOptions {
            sep: *sep,
            ..EnsembleOptions::default()
        },
    }
}

pub fn reproduce(id: TableId, sep: &SepOptions, pool: &rayon::ThreadPool) -> CliResult<TableReport> {
    let table = tables::table(id);
    let mut ensemble = None;
    let results: Vec<CellResult> = if id == TableId::VII {
        let report = ensemble_run::run(&ensemble_job(sep), pool)?;
        let results = group_results(&table, &report);
        ensemble = Some(report);
        results
    } else {
        pool.install(|| {
            table
                .cells
                .par_iter()
                .map(|cell| evaluate_cell(cell, sep))
                .collect()
        })
    };
    let symmetry = table
        .symmetric
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (results[i].tau_star, results[j].tau_star);
            let difference = match (a, b) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                _ => None,
            };
            let pass = match (a, b) {
                (None, None) => true,
                _ => difference.is_some_and(|d| d <= 2.0 * tables::TOL + 1e-9),
            };
            SymmetryCheck {
                cells: (i, j),
                difference,
                pass,
            }
        })
        .collect();
    Ok(TableReport {
        table,
        results,
        symmetry,
        ensemble,
    })
}

pub const CSV_HEADER: [&str; 14] = [
    "table",
    "row",
    "noisy_modes",
    "N",
    "setting",
    "cuts",
    "expected_tau_be",
    "computed_tau_be",
    "expected_tau_star",
    "computed_tau_star",
    "delta",
    "tau_star_bisected",
    "tol",
    "status",
];

fn cuts_label(t: &Table, cell: &Cell) -> String {
    match &cell.kind {
        CellKind::Robustness { per_cut: Some(c), .. } => c.clone(),
        _ => t.cuts.as_ref().map_or("all".into(), |c| c.join(" ")),
    }
}

impl TableReport {
    pub fn mismatches(&self) -> usize {
        self.results.iter().filter(|r| !r.pass).count() + self.symmetry.iter().filter(|s| !s.pass).count()
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        let t = &self.table;
        t.cells
            .iter()
            .zip(&self.results)
            .map(|(cell, r)| {
                let delta = match (cell.star, r.tau_star) {
                    (Expect::Value(x), Some(c)) => Some(c - x),
                    _ => None,
                };
                let computed = |x: Option<f64>, e: Expect| match (x, e) {
                    (_, Expect::Unlisted) => String::new(),
                    (Some(v), _) => sig6(v),
                    (None, _) => "-".into(),
                };
                vec![
                    t.id.to_string(),
                    cell.row.clone(),
                    modes_label(cell),
                    sig6(cell.n_photons),
                    cell.setting.clone(),
                    cuts_label(t, cell),
                    cell.be.render(),
                    computed(r.tau_be, cell.be),
                    cell.star.render(),
                    computed(r.tau_star, cell.star),
                    opt(delta),
                    opt(r.tau_star_bisected),
                    sig6(cell.tol),
                    if r.pass { "PASS" } else { "FAIL" }.into(),
                ]
            })
            .collect()
    }

    /// Mismatched cells and symmetry checks, one per line.
    pub fn diff(&self) -> String {
        let t = &self.table;
        let mut out = format!(
            "Table {}: {} ({} cells, {} mismatches)\n",
            t.id,
            t.title,
            t.cells.len(),
            self.mismatches()
        );
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
        for (cell, r) in t.cells.iter().zip(&self.results).filter(|(_, r)| !r.pass) {
            out += &format!(
                "  {:<12} N = {:<4} {:<24} expected ({}, {}) got ({}, {})",
                modes_label(cell),
                sig6(cell.n_photons),
                cell.setting,
                cell.be.render(),
                cell.star.render(),
                show(r.tau_be),
                show(r.tau_star),
            );
            if let Some(n) = &r.note {
                out += &format!("  [{n}]");
            }
            out.push('\n');
        }
        for s in self.symmetry.iter().filter(|s| !s.pass) {
            let (a, b) = (&t.cells[s.cells.0], &t.cells[s.cells.1]);
            out += &format!(
                "  symmetric pair {} / {} at N = {} differs by {}\n",
                modes_label(a),
                modes_label(b),
                sig6(a.n_photons),
                opt(s.difference)
            );
        }
        if let Some(e) = &self.ensemble {
            out += &ensemble_run::render(e);
        }
        out
    }
}

/// Exit status for a set of reports.
pub fn verdict(reports: &[TableReport]) -> CliResult<()> {
    let n: usize = reports.iter().map(TableReport::mismatches).sum();
    if n == 0 {
        Ok(())
    } else {
        Err(CliError::Mismatch(n))
    }
}
