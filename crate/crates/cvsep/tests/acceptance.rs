//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Set CVSEP_FULL_ENSEMBLE=1 to also run the optional
//! 10^4-state pure ensemble.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cvsep::ensemble_run::{self, EnsembleJob, EnsembleKind};
use cvsep::reproduce::{self, CellResult};
use cvsep::tables::{self, modes_label, Cell, CellKind, Table, TableId};
use cvsep_core::analysis::{default_grid, timeline, AnalysisOptions};
use cvsep_core::channel::{
    evolve, evolved_fmsv_closed_form, evolved_werner_wolf_closed_form, BathSpec, RegularizedTime,
};
use cvsep_core::ensemble::{evaluate_member, pt_spectrum_signature, EnsembleOptions};
use cvsep_core::separability::{
    k_extendibility, lmi_separability, CutLabel, Extendibility, SepOptions, Separability,
};
use cvsep_core::states::{
    adesso, fmsv, gfmsv, gww_separability_functional, tmsv_pair, werner_wolf, GfmsvParams,
    GwwParams, RandomKind, RandomSpec,
};
use cvsep_core::symplectic::{
    enumerate_bipartitions, partial_transpose, permute_modes, ppt_check, Bipartition, CovMat,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sep() -> SepOptions {
    SepOptions::default()
}

fn t(x: f64) -> RegularizedTime {
    RegularizedTime::new(x).unwrap()
}

fn cut(s: &str) -> Bipartition {
    Bipartition::parse(4, s).unwrap()
}

fn show(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.2}"))
}

/// Evaluates the selected cells; returns the failures as text.
fn check_cells<'a>(cells: impl IntoIterator<Item = &'a Cell>) -> (usize, Vec<String>, Vec<(&'a Cell, CellResult)>) {
    let mut n = 0;
    let mut bad = Vec::new();
    let mut all = Vec::new();
    for c in cells {
        n += 1;
        let r = reproduce::evaluate_cell(c, &sep());
        if !r.pass {
            bad.push(format!(
                "{} N={} {} expected ({}, {}) got ({}, {}){}",
                modes_label(c),
                c.n_photons,
                c.setting,
                c.be.render(),
                c.star.render(),
                show(r.tau_be),
                show(r.tau_star),
                r.note.as_deref().map(|n| format!(" [{n}]")).unwrap_or_default()
            ));
        }
        all.push((c, r));
    }
    (n, bad, all)
}

fn summary(n: usize, bad: &[String]) -> String {
    if bad.is_empty() {
        format!("{n}/{n} cells within tolerance")
    } else {
        format!("{}/{n} cells within tolerance; {}", n - bad.len(), bad.join("; "))
    }
}

fn table_i() -> Outcome {
    let start = Instant::now();
    let table = tables::table(TableId::I);
    let (n, bad, _) = check_cells(&table.cells);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 120.0,
        format!("{}; {secs:.1} s (limit 120 s)", summary(n, &bad)),
    )
}

fn tables_ii_iii() -> Outcome {
    let (ii, iii) = (tables::table(TableId::II), tables::table(TableId::III));
    let (n, bad, _) = check_cells(ii.cells.iter().chain(&iii.cells));
    outcome(bad.is_empty(), summary(n, &bad))
}

fn table_iv_spots() -> Outcome {
    let spots = [
        "theta1=theta2=theta3=40deg",
        "theta1=theta2=theta3=44deg",
        "theta1=theta2=theta3=45deg",
        "theta1=45deg theta2=theta3=30deg",
        "theta1=45deg theta2=theta3=9deg",
    ];
    let table = tables::table(TableId::IV);
    let cells: Vec<&Cell> = table.cells.iter().filter(|c| spots.contains(&c.setting.as_str())).collect();
    assert_eq!(cells.len(), 2 * spots.len());
    let (n, bad, _) = check_cells(cells);
    outcome(bad.is_empty(), summary(n, &bad))
}

fn table_v() -> Outcome {
    let table = tables::table(TableId::V);
    let (n, bad, _) = check_cells(&table.cells);
    // Bound labels anywhere, on every cut, for every tabulated bath.
    let sets: Vec<Vec<usize>> = ensemble_run::table_bath_sets();
    let v0 = tmsv_pair(0.6).unwrap();
    let mut bound = Vec::new();
    for n_photons in [2.0, 4.0, 10.0] {
        let m = evaluate_member(0, &v0, &sets, n_photons, &EnsembleOptions::default()).unwrap();
        for (s, o) in sets.iter().zip(m.result.unwrap()) {
            if let Some((tau, c)) = o.first_bound {
                bound.push(format!("{s:?} N={n_photons} cut {c} at {tau}"));
            }
        }
    }
    let detail = format!(
        "{}; BOUND labels on timelines: {}",
        summary(n, &bad),
        if bound.is_empty() { "none".into() } else { bound.join(", ") }
    );
    outcome(bad.is_empty() && bound.is_empty(), detail)
}

fn table_vi() -> Outcome {
    let table = tables::table(TableId::VI);
    let (n, bad, all) = check_cells(&table.cells);
    let mut asym = Vec::new();
    for &(i, j) in &table.symmetric {
        let (a, b) = (all[i].1.tau_star, all[j].1.tau_star);
        let ok = match (a, b) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() <= 2.0 * tables::TOL + 1e-9,
            _ => false,
        };
        if !ok {
            asym.push(format!("{} vs {} N={}", modes_label(all[i].0), modes_label(all[j].0), all[i].0.n_photons));
        }
    }
    let detail = format!(
        "{}; {}/{} symmetric pairs agree within 2*tol{}",
        summary(n, &bad),
        table.symmetric.len() - asym.len(),
        table.symmetric.len(),
        if asym.is_empty() { String::new() } else { format!(" ({})", asym.join(", ")) }
    );
    outcome(bad.is_empty() && asym.is_empty(), detail)
}

fn table_viii() -> Outcome {
    let table = tables::table(TableId::VIII);
    let (n, bad, all) = check_cells(&table.cells);
    let twelve = cut("12:34");
    let opts = AnalysisOptions {
        cuts: Some(vec![twelve.clone()]),
        ..AnalysisOptions::default()
    };
    let mut npt = Vec::new();
    for (cell, r) in &all {
        let Some(star) = r.tau_star else { continue };
        let CellKind::Robustness { scenario, .. } = &cell.kind else { continue };
        let v0 = scenario.state.build().unwrap();
        let bath = scenario.require_bath(4).unwrap();
        let grid: Vec<f64> = default_grid(0.01, 0.9999).into_iter().filter(|&x| x < star - 1e-9).collect();
        let tl = timeline(&v0, &bath, &grid, &opts).unwrap();
        if let Some(k) = tl.cut_labels(0).iter().position(|&l| l != Some(CutLabel::Bound)) {
            npt.push(format!("{} N={} tau {:.2}", modes_label(cell), cell.n_photons, tl.points[k].tau));
        }
    }
    let detail = format!(
        "{}; label before tau* on 12:34 always BOUND: {}",
        summary(n, &bad),
        if npt.is_empty() { "yes".into() } else { format!("no ({})", npt.join(", ")) }
    );
    outcome(bad.is_empty() && npt.is_empty(), detail)
}

fn spectral() -> Outcome {
    let s3 = 3f64.sqrt();
    let sig = pt_spectrum_signature(&werner_wolf(), &cut("12:34")).unwrap();
    let want = [0.0, 3.0 - s3, 3.0, 3.0 + s3];
    let err = sig.iter().zip(want).map(|((x, _), w)| (x - w).abs()).fold(0.0, f64::max);
    let spectrum = sig.len() == 4 && sig.iter().all(|&(_, m)| m == 2) && err <= 1e-9;
    let ext = k_extendibility(&werner_wolf(), &cut("12:34"), 2, &sep()).unwrap().decision;
    let f = gww_separability_functional(&GwwParams::WERNER_WOLF);
    outcome(
        spectrum && ext == Some(Extendibility::NotExtendible) && f == -2.0,
        format!("PT spectrum {sig:?} (max error {err:.1e}); 2-extendible: {ext:?}; functional {f}"),
    )
}

fn random_states(count: u64) -> Vec<CovMat> {
    let pure = RandomSpec { modes: 4, kind: RandomKind::PureHaar { energy: 12.0 }, seed: 21 };
    let mixed = RandomSpec { modes: 4, kind: RandomKind::MixedGoe, seed: 22 };
    (0..count)
        .map(|i| if i % 2 == 0 { pure.sample(i) } else { mixed.sample(i) }.unwrap())
        .collect()
}

fn mode_set(i: u64) -> Vec<usize> {
    let mask = (i % 15) + 1;
    (0..4).filter(|m| mask & (1 << m) != 0).collect()
}

fn properties() -> Outcome {
    let mut failed = Vec::new();
    let states = random_states(200);

    let mut semigroup: f64 = 0.0;
    for (i, v) in states.iter().take(40).enumerate() {
        let bath = BathSpec::new([0.5, 2.0, 7.0][i % 3], &mode_set(i as u64)).unwrap();
        for (t1, t2) in [(0.1, 0.3), (0.45, 0.45), (0.8, 0.6)] {
            let two = evolve(&evolve(v, &bath, t(t1)).unwrap(), &bath, t(t2)).unwrap();
            let one = evolve(v, &bath, t(1.0 - (1.0 - t1) * (1.0 - t2))).unwrap();
            semigroup = semigroup.max(two.max_abs_diff(&one));
        }
    }
    if semigroup > 1e-10 {
        failed.push(format!("semigroup {semigroup:.1e}"));
    }

    let mut oracle: f64 = 0.0;
    for n in [0.5, 2.0, 4.0, 10.0] {
        for k in 0..10 {
            let tau = t(0.1 * k as f64);
            let all = BathSpec::all_modes(n, 4).unwrap();
            let f = evolve(&fmsv(0.6).unwrap(), &all, tau).unwrap();
            oracle = oracle.max(f.max_abs_diff(&evolved_fmsv_closed_form(0.6, n, tau).unwrap()));
            let w = evolve(&werner_wolf(), &all, tau).unwrap();
            oracle = oracle.max(w.max_abs_diff(&evolved_werner_wolf_closed_form(n, tau).unwrap()));
        }
    }
    if oracle > 1e-12 {
        failed.push(format!("closed forms {oracle:.1e}"));
    }

    let q = std::f64::consts::FRAC_PI_4;
    let balanced = gfmsv(&GfmsvParams::new(0.6, q, q, q)).unwrap().max_abs_diff(&fmsv(0.6).unwrap());
    if balanced > 1e-12 {
        failed.push(format!("balanced gfmsv {balanced:.1e}"));
    }

    let mut purity: f64 = 0.0;
    let pure_spec = RandomSpec { modes: 4, kind: RandomKind::PureHaar { energy: 12.0 }, seed: 23 };
    let mut pure: Vec<CovMat> = vec![
        fmsv(0.6).unwrap(),
        gfmsv(&GfmsvParams::new(0.6, 0.4, 1.0, -0.3)).unwrap(),
        tmsv_pair(0.6).unwrap(),
        adesso(0.6, 0.6).unwrap(),
    ];
    pure.extend((0..20).map(|i| pure_spec.sample(i).unwrap()));
    for v in &pure {
        for nu in v.symplectic_eigenvalues().unwrap() {
            purity = purity.max((nu - 1.0).abs());
        }
    }
    if purity > 1e-9 {
        failed.push(format!("purity {purity:.1e}"));
    }

    // PPT and LMI on one-versus-three cuts, on partially thermalized inputs
    // so that both verdicts occur.
    let singles: Vec<Bipartition> = enumerate_bipartitions(4).unwrap().into_iter().filter(|c| c.is_single_mode()).collect();
    let (mut agree, mut checks, mut skipped) = (0, 0, 0);
    for (i, v) in states.iter().enumerate() {
        let bath = BathSpec::new(2.0, &mode_set(i as u64)).unwrap();
        let v = evolve(v, &bath, t((i % 10) as f64 * 0.07)).unwrap();
        for c in &singles {
            let ppt = ppt_check(&v, c, 1e-9).unwrap();
            if ppt.min_eig.abs() < 1e-6 {
                skipped += 1;
                continue;
            }
            let lmi = lmi_separability(&v, c, &sep()).unwrap();
            checks += 1;
            agree += usize::from((lmi.decision == Some(Separability::Separable)) == ppt.passed);
        }
    }
    if agree != checks {
        failed.push(format!("PPT/LMI agree on {agree}/{checks}"));
    }

    let mut monotone = true;
    for v in states.iter().take(6) {
        let v = evolve(v, &BathSpec::new(2.0, &[0, 2]).unwrap(), t(0.4)).unwrap();
        let etas: Vec<f64> = (1..=4)
            .map(|k| {
                let r = k_extendibility(&v, &cut("12:34"), k, &sep()).unwrap();
                r.verdict.eta_star.or(r.verdict.eta_lower).unwrap()
            })
            .collect();
        monotone &= etas.windows(2).all(|w| w[1] <= w[0] + 1e-7);
    }
    if !monotone {
        failed.push("k-extendibility margin not monotone".into());
    }

    let mut involution = true;
    for v in states.iter().take(40) {
        for c in enumerate_bipartitions(4).unwrap() {
            let back = partial_transpose(&partial_transpose(v, &c).unwrap(), &c).unwrap();
            involution &= back.matrix() == v.matrix();
        }
    }
    if !involution {
        failed.push("partial transpose is not an involution".into());
    }

    let mut mirror: f64 = 0.0;
    for (s, a) in [(0.6, 0.6), (0.3, 1.1), (1.0, 0.2)] {
        let v = adesso(s, a).unwrap();
        mirror = mirror.max(v.max_abs_diff(&permute_modes(&v, &[3, 2, 1, 0]).unwrap()));
    }
    if mirror > 1e-12 {
        failed.push(format!("Adesso mirror {mirror:.1e}"));
    }

    let detail = format!(
        "semigroup {semigroup:.1e}, closed forms {oracle:.1e}, balanced gfmsv {balanced:.1e}, purity {purity:.1e}, \
         PPT/LMI {agree}/{checks} on 1:3 cuts of 200 states ({skipped} within 1e-6 of the boundary skipped), \
         k-monotone {monotone}, PT involution {involution}, Adesso mirror {mirror:.1e}{}",
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    outcome(failed.is_empty(), detail)
}

fn ensembles() -> Outcome {
    let start = Instant::now();
    let pool = ensemble_run::pool(std::thread::available_parallelism().map_or(1, |n| n.get())).unwrap();
    let pure = ensemble_run::run(
        &EnsembleJob {
            kind: EnsembleKind::Pure,
            count: 1000,
            energy: 12.0,
            n_photons: 4.0,
            seed: tables::ENSEMBLE_SEED,
            bath_sets: ensemble_run::table_bath_sets(),
            options: EnsembleOptions::default(),
        },
        &pool,
    )
    .unwrap();
    let goe = ensemble_run::run(&reproduce::ensemble_job(&sep()), &pool).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let table: Table = tables::table(TableId::VII);
    let groups = reproduce::group_results(&table, &goe);
    let within = groups.iter().filter(|r| r.pass).count();
    let listing: Vec<String> = table
        .cells
        .iter()
        .zip(&groups)
        .map(|(c, r)| format!("{} {} vs {}", c.row, r.tau_star.map_or("-".into(), |x| format!("{x:.3}")), c.star.render()))
        .collect();
    let incidents = |r: &cvsep_core::ensemble::EnsembleReport| {
        r.incidents
            .iter()
            .map(|b| format!("#{} {} {} @{:.2}", b.index, b.bath, b.cut, b.tau))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let pass = pure.bound_phase_incidents == 0
        && goe.bound_phase_incidents == 0
        && pure.failures.is_empty()
        && goe.failures.is_empty()
        && within == groups.len()
        && Duration::from_secs_f64(secs) < Duration::from_secs(30 * 60);
    outcome(
        pass,
        format!(
            "pure 1000 (E=12): {} bound-phase members [{}], {} failures; GOE 100: {} bound-phase members [{}], {} failures; \
             Table VII groups within 0.05: {within}/{} ({}); {secs:.0} s (limit 1800 s)",
            pure.bound_phase_incidents,
            incidents(&pure),
            pure.failures.len(),
            goe.bound_phase_incidents,
            incidents(&goe),
            goe.failures.len(),
            groups.len(),
            listing.join(", ")
        ),
    )
}

fn full_pure_ensemble() -> Option<Outcome> {
    if std::env::var("CVSEP_FULL_ENSEMBLE").ok().as_deref() != Some("1") {
        return None;
    }
    let pool = ensemble_run::pool(std::thread::available_parallelism().map_or(1, |n| n.get())).unwrap();
    let r = ensemble_run::run(
        &EnsembleJob {
            kind: EnsembleKind::Pure,
            count: 10_000,
            energy: 12.0,
            n_photons: 4.0,
            seed: tables::ENSEMBLE_SEED,
            bath_sets: ensemble_run::table_bath_sets(),
            options: EnsembleOptions::default(),
        },
        &pool,
    )
    .unwrap();
    Some(outcome(
        r.bound_phase_incidents == 0 && r.failures.is_empty(),
        format!("pure 10^4: {} bound-phase members, {} failures", r.bound_phase_incidents, r.failures.len()),
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 9] = [
        ("Table I reproduction", table_i),
        ("Table II/III reproduction", tables_ii_iii),
        ("Table IV spot checks", table_iv_spots),
        ("Table V reproduction", table_v),
        ("Table VI reproduction", table_vi),
        ("Table VIII reproduction", table_viii),
        ("Werner-Wolf spectral checks", spectral),
        ("Property suites", properties),
        ("Ensemble checks", ensembles),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failures += usize::from(!o.pass);
        println!("acceptance {} {}: {} - {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    match full_pure_ensemble() {
        Some(o) => {
            failures += usize::from(!o.pass);
            println!("acceptance 10 Full pure ensemble: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        }
        None => println!("acceptance 10 Full pure ensemble: SKIPPED - optional, set CVSEP_FULL_ENSEMBLE=1"),
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
