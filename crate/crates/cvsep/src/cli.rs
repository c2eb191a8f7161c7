//! Argument parsing and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvsep_core::ensemble::EnsembleOptions;
use cvsep_core::symplectic::Bipartition;

use crate::commands::{self, ResultRecord};
use crate::ensemble_run::{self, EnsembleJob, EnsembleKind};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, write_atomic, write_csv, write_json};
use crate::reproduce::{self, TableReport};
use crate::scenario::{AngleUnit, BathSection, Convention, Scenario, SearchSection, StateKind, StateSpec};
use crate::tables::TableId;

#[derive(Debug, Parser)]
#[command(name = "cvsep", version, about = "Separability of noisy multimode Gaussian states")]
pub struct Cli {
    /// Worker threads for batch commands.
    #[arg(long, global = true, default_value_t = default_jobs())]
    pub jobs: usize,
    /// Relative accuracy of the separability SDP.
    #[arg(long, global = true, env = "CVSEP_SDP_ACCURACY")]
    pub sdp_accuracy: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label every bipartition of a state, optionally after noise.
    Classify(ScenarioArgs),
    /// Locate the bound-entanglement onset and the robustness time.
    Robustness(ScenarioArgs),
    /// Emit the per-cut phase timeline as CSV.
    Timeline(ScenarioArgs),
    /// Recompute reference tables and diff them against the stored values.
    Reproduce(ReproduceArgs),
    /// Scan a random ensemble over noisy-mode sets.
    Ensemble(EnsembleArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario JSON file; other flags override its fields.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub theta1: Option<f64>,
    #[arg(long)]
    pub theta2: Option<f64>,
    #[arg(long)]
    pub theta3: Option<f64>,
    #[arg(long, value_enum)]
    pub unit: Option<UnitArg>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    /// Any other state parameter, as KEY=VALUE.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub index: Option<u64>,
    /// One-based noisy modes, e.g. 1,3.
    #[arg(long, value_delimiter = ',')]
    pub bath_modes: Option<Vec<usize>>,
    /// Mean thermal photon number of the bath.
    #[arg(long = "N")]
    pub n_photons: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Bisection tolerance in tau.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Restrict to these cuts, e.g. 12:34,13:24.
    #[arg(long, value_delimiter = ',')]
    pub cuts: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Rad,
    Deg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Fmsv,
    Printed,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Table ids (I..VIII or 1..8), or `all`.
    #[arg(long, required = true, value_delimiter = ',')]
    pub table: Vec<String>,
    /// CSV with one row per cell.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_enum)]
    pub kind: EnsembleKind,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Energy bound of pure states; a list such as 10,12,16 runs one scan
    /// per value.
    #[arg(long = "energy", value_delimiter = ',', default_value = "12")]
    pub energies: Vec<f64>,
    #[arg(long = "N", default_value_t = 4.0)]
    pub n_photons: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// A one-based noisy-mode set such as 1,3; repeatable. Defaults to
    /// all fifteen sets of the group table.
    #[arg(long = "bath-modes")]
    pub bath_modes: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub cuts: Option<Vec<String>>,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Output prefix; writes PREFIX.json and PREFIX.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ScenarioArgs {
    pub fn scenario(&self) -> CliResult<Scenario> {
        let mut sc = match &self.scenario {
            Some(p) => Scenario::from_file(p)?,
            None => {
                let kind = self
                    .state
                    .as_deref()
                    .ok_or_else(|| CliError::Schema("either --scenario or --state is required".into()))?;
                Scenario::new(StateSpec::new(StateKind::parse(kind)?))
            }
        };
        if let (Some(_), Some(kind)) = (&self.scenario, &self.state) {
            let kind = StateKind::parse(kind)?;
            if kind != sc.state.kind {
                sc.state = StateSpec::new(kind);
            }
        }
        let st = &mut sc.state;
        for (key, v) in [
            ("r", self.r),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("theta3", self.theta3),
            ("s", self.s),
            ("a", self.a),
        ] {
            if let Some(v) = v {
                st.params.insert(key.into(), v);
            }
        }
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Schema(format!("--param expects KEY=VALUE, got '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Schema(format!("--param {k}: '{v}' is not a number")))?;
            st.params.insert(k.trim().into(), v);
        }
        if let Some(u) = self.unit {
            st.unit = Some(match u {
                UnitArg::Rad => AngleUnit::Rad,
                UnitArg::Deg => AngleUnit::Deg,
            });
        }
        if let Some(c) = self.convention {
            st.convention = Some(match c {
                ConventionArg::Fmsv => Convention::Fmsv,
                ConventionArg::Printed => Convention::Printed,
            });
        }
        st.seed = self.seed.or(st.seed);
        st.index = self.index.or(st.index);

        let any_bath = self.bath_modes.is_some() || self.n_photons.is_some() || self.gamma.is_some() || self.tau.is_some();
        if any_bath {
            let mut b = sc.bath.take().unwrap_or(BathSection {
                n_photons: f64::NAN,
                modes: Vec::new(),
                gamma: None,
                tau: None,
            });
            if let Some(m) = &self.bath_modes {
                b.modes = m.clone();
            }
            if let Some(n) = self.n_photons {
                b.n_photons = n;
            }
            b.gamma = self.gamma.or(b.gamma);
            b.tau = self.tau.or(b.tau);
            if b.n_photons.is_nan() {
                // A bath with no noisy modes and no photon number is just a
                // request for a single τ.
                if !b.modes.is_empty() {
                    return Err(CliError::Schema("--N is required with --bath-modes".into()));
                }
                b.n_photons = 0.5;
            }
            sc.bath = Some(b);
        }
        if self.tol.is_some() || self.tau_max.is_some() || self.grid_step.is_some() {
            let mut s = sc.search.take().unwrap_or_default();
            s.tol = self.tol.or(s.tol);
            s.tau_max = self.tau_max.or(s.tau_max);
            s.grid_step = self.grid_step.or(s.grid_step);
            sc.search = Some(SearchSection { ..s });
        }
        if let Some(c) = &self.cuts {
            sc.cuts = Some(c.clone());
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn parse_set(text: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let m: usize = part
            .trim()
            .parse()
            .map_err(|_| CliError::Schema(format!("bad mode '{part}' in '{text}'")))?;
        if !(1..=4).contains(&m) {
            return Err(CliError::Schema(format!("mode {m} out of range 1..=4")));
        }
        out.push(m - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn emit_record(args: &ScenarioArgs, rec: &ResultRecord) -> CliResult<()> {
    match (&args.out, args.format) {
        (Some(p), _) => write_json(p, rec),
        (None, Format::Json) => {
            let mut b = serde_json::to_vec_pretty(rec)?;
            b.push(b'\n');
            emit(None, &b)
        }
        (None, Format::Text) => emit(None, rec.render().as_bytes()),
    }
}

fn tables_arg(ids: &[String]) -> CliResult<Vec<TableId>> {
    if ids.iter().any(|t| t.eq_ignore_ascii_case("all")) {
        return Ok(TableId::ALL.to_vec());
    }
    ids.iter().map(|t| TableId::parse(t)).collect()
}

pub fn run(cli: Cli) -> CliResult<()> {
    let sep = commands::sep_options(cli.sdp_accuracy)?;
    if cli.jobs == 0 {
        return Err(CliError::Schema("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Classify(a) => {
            let rec = commands::classify(&a.scenario()?, &sep)?;
            emit_record(a, &rec)?;
            match commands::undecided(&rec) {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Robustness(a) => {
            let rec = commands::robustness_record(&a.scenario()?, &sep)?;
            emit_record(a, &rec)
        }
        Command::Timeline(a) => {
            let (tl, rows) = commands::timeline_rows(&a.scenario()?, &sep)?;
            emit(a.out.as_deref(), &csv_bytes(&commands::TIMELINE_HEADER, &rows)?)?;
            let failed = tl
                .points
                .iter()
                .flat_map(|p| p.classification.cuts.iter().map(move |v| (p.tau, v)))
                .find(|(_, v)| v.label.is_none());
            match failed {
                Some((tau, v)) => Err(CliError::Numerical(format!("cut {} at tau = {tau}", v.cut))),
                None => Ok(()),
            }
        }
        Command::Reproduce(a) => {
            let pool = ensemble_run::pool(cli.jobs)?;
            let mut reports: Vec<TableReport> = Vec::new();
            for id in tables_arg(&a.table)? {
                let r = reproduce::reproduce(id, &sep, &pool)?;
                print!("{}", r.diff());
                reports.push(r);
            }
            if let Some(p) = &a.out {
                let rows: Vec<Vec<String>> = reports.iter().flat_map(TableReport::rows).collect();
                write_csv(p, &reproduce::CSV_HEADER, &rows)?;
            }
            let verdict = reproduce::verdict(&reports);
            println!("{}", if verdict.is_ok() { "PASS" } else { "FAIL" });
            verdict
        }
        Command::Ensemble(a) => {
            let bath_sets = if a.bath_modes.is_empty() {
                ensemble_run::table_bath_sets()
            } else {
                a.bath_modes.iter().map(|s| parse_set(s)).collect::<CliResult<_>>()?
            };
            let cuts = a
                .cuts
                .as_ref()
                .map(|c| c.iter().map(|l| Bipartition::parse(4, l)).collect::<Result<Vec<_>, _>>())
                .transpose()?;
            let energies = match a.kind {
                EnsembleKind::Pure => a.energies.clone(),
                EnsembleKind::Mixed => vec![f64::NAN],
            };
            let pool = ensemble_run::pool(cli.jobs)?;
            let mut reports = Vec::with_capacity(energies.len());
            for &energy in &energies {
                let job = EnsembleJob {
                    kind: a.kind,
                    count: a.count,
                    energy,
                    n_photons: a.n_photons,
                    seed: a.seed,
                    bath_sets: bath_sets.clone(),
                    options: EnsembleOptions {
                        sep,
                        grid_step: a.grid_step,
                        cuts: cuts.clone(),
                        ..EnsembleOptions::default()
                    },
                };
                reports.push((energy, ensemble_run::run(&job, &pool)?));
            }
            let several = reports.len() > 1;
            match &a.out {
                Some(prefix) => {
                    for (energy, report) in &reports {
                        let with = |ext: &str| {
                            let mut s = prefix.clone().into_os_string();
                            if several {
                                s.push(format!("-E{energy}"));
                            }
                            s.push(ext);
                            PathBuf::from(s)
                        };
                        write_json(&with(".json"), report)?;
                        write_csv(&with(".csv"), &ensemble_run::SUMMARY_HEADER, &ensemble_run::summary_rows(report))?;
                        if several {
                            eprintln!("E = {energy}");
                        }
                        eprint!("{}", ensemble_run::render(report));
                    }
                }
                None => {
                    let mut b = if several {
                        let all: Vec<_> = reports.iter().map(|(_, r)| r).collect();
                        serde_json::to_vec_pretty(&all)?
                    } else {
                        serde_json::to_vec_pretty(&reports[0].1)?
                    };
                    b.push(b'\n');
                    emit(None, &b)?;
                }
            }
            Ok(())
        }
    }
}

/// Entry point shared by the binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvsep: {e}");
            e.exit_code()
        }
    }
}
