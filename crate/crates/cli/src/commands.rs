//! Subcommand implementations. Each writes its outputs under `out` and
//! returns the process exit status; `meta.json` is written by [`run`].

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sqg_core::dynamics::{solve_on_period, AdvectionSource, Problem};
use sqg_core::fixpoint::{pde_residual, solve_periodic_with, ConvergenceReport, IterationState};
use sqg_core::littlewood_paley::BesovSpec;
use sqg_core::periodic::{
    estimate_u0_bound, geometric_series, linear_trajectory, periodic_initial_datum, resolvent_inverse, series_terms,
};
use sqg_core::probes::{self, ceilings, ProductSemigroupParams};
use sqg_core::trajectory::uniform_times;
use sqg_core::{corpus, DyadicDecomposition, Error as CoreError, Field, Grid, Trajectory};

use crate::config::{LoadedConfig, RunConfig};
use crate::error::{exit, CliError, Result};
use crate::report::*;
use crate::{json, snapshot};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Solve,
    Linear,
    Evolve { theta0: PathBuf },
    Verify,
    Besov { snapshot: PathBuf, s: f64, p: f64, q: f64 },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Linear => "linear",
            Command::Evolve { .. } => "evolve",
            Command::Verify => "verify",
            Command::Besov { .. } => "besov",
        }
    }
}

/// Per-run timing collected for `meta.json`.
#[derive(Debug, Default)]
pub struct Timing {
    pub iterations_ms: Vec<u128>,
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Validates, runs `command` into `out`, and writes `meta.json`.
///
/// Errors that happen before any output exists (bad configuration, unreadable
/// inputs) are returned; everything else ends in an exit status.
pub fn run(command: &Command, loaded: &LoadedConfig, out: &Path, threads: Option<usize>) -> Result<i32> {
    let cfg = &loaded.config;
    cfg.validate()?;
    create_dir(out)?;
    let started = unix_ms();
    let clock = Instant::now();
    let mut timing = Timing::default();
    let code = match command {
        Command::Solve => solve(cfg, out, &mut timing)?,
        Command::Linear => linear(cfg, out)?,
        Command::Evolve { theta0 } => evolve(cfg, theta0, out)?,
        Command::Verify => verify(cfg, out)?,
        Command::Besov { snapshot, s, p, q } => besov(snapshot, *s, *p, *q, out)?,
    };
    let meta = MetaDocument {
        schema: META_SCHEMA.into(),
        command: command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: loaded.hash(),
        config: serde_json::to_value(cfg).expect("config serializes"),
        seed: cfg.seed,
        threads,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        wall_time_ms: clock.elapsed().as_millis(),
        iteration_wall_time_ms: timing.iterations_ms,
        exit_code: code,
    };
    json::write(&out.join("meta.json"), &meta)?;
    Ok(code)
}

fn write_trajectory(traj: &Trajectory, dir: &Path, every: usize) -> Result<()> {
    create_dir(dir)?;
    let last = traj.len() - 1;
    for (i, (t, f)) in traj.iter().enumerate() {
        if i % every == 0 || i == last {
            snapshot::write(&dir.join(format!("theta_{i:06}.sqgf")), f, t)?;
        }
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Format {
        path: path.into(),
        message: e.to_string(),
    }
}

/// `(j, 2^{sj}‖Δ_jf‖_p)` rows.
pub fn besov_spectrum(f: &Field, dec: &DyadicDecomposition, spec: &BesovSpec) -> Result<Vec<BesovRow>> {
    Ok(dec
        .besov_spectrum(f, spec)?
        .into_iter()
        .map(|(j, value)| BesovRow { j, value })
        .collect())
}

fn write_spectrum_csv(path: &Path, rows: &[BesovRow]) -> Result<()> {
    write_csv(path, &["j", "value"], rows.iter().map(|r| vec![r.j.to_string(), fmt(r.value)]))
}

fn start_state(cfg: &RunConfig, dec: &DyadicDecomposition) -> Result<Option<IterationState>> {
    let Some(path) = &cfg.iteration.start else {
        return Ok(None);
    };
    let snap = snapshot::read(path)?;
    if *snap.field.grid() != *dec.grid() {
        return Err(CliError::Config(format!(
            "start datum {} is on a different grid than [grid]",
            path.display()
        )));
    }
    let mut seed = snap.field;
    if cfg.iteration.start_noise > 0.0 {
        let noise = corpus::white_noise(dec.grid(), cfg.seed);
        let scale = cfg.iteration.start_noise * seed.max_abs().max(f64::MIN_POSITIVE) / noise.max_abs();
        seed = seed.add(&noise.scaled(scale))?;
        seed.remove_mean();
    }
    let forcing = cfg.forcing()?;
    Ok(Some(IterationState::seeded(&seed, &forcing, dec, &cfg.iteration_config()?)?))
}

/// Exit status for a finished (not failed) iteration.
pub fn report_status(report: &ConvergenceReport) -> i32 {
    if report.converged {
        exit::OK
    } else {
        exit::NOT_CONVERGED
    }
}

pub fn solve(cfg: &RunConfig, out: &Path, timing: &mut Timing) -> Result<i32> {
    let forcing = cfg.forcing()?;
    let icfg = cfg.iteration_config()?;
    let grid = cfg.grid()?;
    let dec = DyadicDecomposition::new(&grid);
    let start = start_state(cfg, &dec)?;
    let mut last = Instant::now();
    let mut observer = |_: &sqg_core::fixpoint::IterationRecord| {
        timing.iterations_ms.push(last.elapsed().as_millis());
        last = Instant::now();
    };
    let outcome = solve_periodic_with(&forcing, &icfg, start, &mut observer);
    let report_path = out.join("report.json");
    let (doc, code) = match outcome {
        Ok((theta0, traj, report)) => {
            snapshot::write(&out.join("theta0.sqgf"), &theta0, 0.0)?;
            write_trajectory(&traj, &out.join("trajectory"), cfg.output.snapshot_every)?;
            let spectrum = besov_spectrum(&theta0, &dec, &icfg.critical_spec())?;
            write_spectrum_csv(&out.join("besov_theta0.csv"), &spectrum)?;
            let residual = pde_residual(&traj, &forcing, icfg.alpha)?;
            (ConvergenceDocument::new(&report, Some(residual), None), report_status(&report))
        }
        Err(CoreError::NonContraction(f)) => (ConvergenceDocument::new(&f.report, None, None), exit::NOT_CONVERGED),
        Err(CoreError::IterationBlowUp(f)) => (
            ConvergenceDocument::new(&f.report, None, f.divergence.as_ref()),
            exit::BLOW_UP,
        ),
        Err(e) => return Err(e.into()),
    };
    write_iterations_csv(&out.join("iterations.csv"), &doc.iterations)?;
    json::write(&report_path, &doc)?;
    Ok(code)
}

fn write_iterations_csv(path: &Path, rows: &[IterationRow]) -> Result<()> {
    write_csv(
        path,
        &[
            "n",
            "A_n",
            "B_n",
            "B_datum",
            "B_trajectory",
            "periodicity_residual",
            "fixed_point_residual",
            "cutoff_gap",
        ],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt(r.a_n),
                fmt(r.b_n),
                fmt(r.b_datum),
                fmt(r.b_trajectory),
                r.periodicity_residual.map(fmt).unwrap_or_default(),
                fmt(r.fixed_point_residual),
                fmt(r.cutoff_gap),
            ]
        }),
    )
}

/// Even Simpson panel count closest to `T / dt`.
fn panels(period: f64, dt: f64) -> usize {
    let m = (period / dt).round() as usize;
    (m + m % 2).max(4)
}

pub fn linear(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let forcing = cfg.forcing()?;
    let icfg = cfg.iteration_config()?;
    let grid = cfg.grid()?;
    let dec = DyadicDecomposition::new(&grid);
    let (alpha, period) = (icfg.alpha, icfg.period);
    let stepper = cfg.stepper()?;
    let steps = panels(period, stepper.dt);
    let u0 = periodic_initial_datum(&forcing, alpha, steps)?;
    let times = uniform_times(period, steps / 2);
    let traj = linear_trajectory(&forcing, &u0, alpha, times, 2)?;
    let f_t = resolvent_forward_of(&u0, period, alpha)?;
    let terms = series_terms(&grid, period, alpha)?;
    let series = geometric_series(&f_t, period, alpha, terms)?;
    let closed = resolvent_inverse(&f_t, period, alpha)?;
    let scale = closed.max_abs();
    let series_vs_closed = if scale == 0.0 {
        0.0
    } else {
        series.max_abs_diff(&closed)? / scale
    };
    let u0_l2 = u0.l2_norm();
    let gap = traj.last().sub(traj.first())?.l2_norm();
    let (lhs, rhs) = estimate_u0_bound(&f_t, period, alpha, &dec, &icfg.critical_spec())?;
    snapshot::write(&out.join("theta0.sqgf"), &u0, 0.0)?;
    write_trajectory(&traj, &out.join("trajectory"), cfg.output.snapshot_every)?;
    let doc = LinearDocument {
        schema: LINEAR_SCHEMA.into(),
        series_terms: terms,
        series_vs_closed,
        periodicity_residual: if gap == 0.0 { Some(0.0) } else { Some(gap / u0_l2).filter(|v| v.is_finite()) },
        u0_l2,
        u0_bound_lhs: lhs,
        u0_bound_rhs: rhs,
        samples: traj.len(),
    };
    json::write(&out.join("linear_report.json"), &doc)?;
    Ok(exit::OK)
}

fn resolvent_forward_of(u0: &Field, period: f64, alpha: f64) -> Result<Field> {
    Ok(sqg_core::periodic::resolvent_forward(u0, period, alpha)?)
}

pub fn evolve(cfg: &RunConfig, theta0: &Path, out: &Path) -> Result<i32> {
    let forcing = cfg.forcing()?;
    let icfg = cfg.iteration_config()?;
    let snap = snapshot::read(theta0)?;
    if *snap.field.grid() != *forcing.grid() {
        return Err(CliError::Config(format!("{} is on a different grid than [grid]", theta0.display())));
    }
    let t_end = cfg.evolve.periods * icfg.period;
    let problem = Problem::new(icfg.alpha)
        .advection(AdvectionSource::SelfAdvected)
        .forcing(&forcing);
    let l2_initial = snap.field.l2_norm();
    let outcome = solve_on_period(&snap.field, t_end, problem, &icfg.stepper);
    let (traj, divergence, code) = match outcome {
        Ok(traj) => (traj, None, exit::OK),
        Err(CoreError::Diverged(d)) => {
            let block = DivergenceBlock::from(&*d);
            (d.partial, Some(block), exit::BLOW_UP)
        }
        Err(e) => return Err(e.into()),
    };
    write_trajectory(&traj, &out.join("trajectory"), cfg.output.snapshot_every)?;
    let l2_final = traj.last().l2_norm();
    let gap = traj.last().sub(traj.first())?.l2_norm();
    let doc = EvolveDocument {
        schema: EVOLVE_SCHEMA.into(),
        t_end,
        steps: icfg.stepper.step_count(t_end),
        samples: traj.len(),
        l2_initial,
        l2_final,
        return_residual: if gap == 0.0 { Some(0.0) } else { Some(gap / l2_initial).filter(|v| v.is_finite()) },
        divergence,
    };
    json::write(&out.join("evolve_report.json"), &doc)?;
    Ok(code)
}

/// Exponents of the estimate probes, derived from the model's `p`, `q`, `α`.
pub struct ProbeExponents {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl ProbeExponents {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            alpha: cfg.model.alpha,
            p: cfg.model.p,
            q: cfg.model.q,
        }
    }

    /// `s₁ = s₂ = 1/p` for the product estimate.
    pub fn bilinear(&self) -> (f64, f64) {
        (1.0 / self.p, 1.0 / self.p)
    }

    /// `s₁ = 2/p`, `s₂ = 1/p` for the commutator estimate.
    pub fn commutator(&self) -> (f64, f64) {
        (2.0 / self.p, 1.0 / self.p)
    }

    pub fn product_semigroup(&self) -> ProductSemigroupParams {
        ProductSemigroupParams {
            lambda: 1.0,
            alpha: self.alpha,
            beta: 0.0,
            s1: 2.0 / self.p + 0.05,
            s2: 1.0 / self.p,
            p: self.p,
            q: self.q,
        }
    }
}

/// Runs the selected probes on the reference corpus.
pub fn probe_suite(cfg: &RunConfig) -> Result<ProbeDocument> {
    let grid = Grid::standard(cfg.probes.n)?;
    let dec = DyadicDecomposition::new(&grid);
    let samples = probes::reference_corpus(&dec, cfg.seed);
    let pairs = probes::corpus_pairs(&samples);
    let ex = ProbeExponents::from_config(cfg);
    let alpha = ex.alpha;
    let selected = |name: &str| cfg.probes.select.iter().any(|s| s == name);
    let mut entries = Vec::new();
    if selected("semigroup_decay") {
        for p in [2.0, ex.p] {
            let r = probes::probe_semigroup_decay(
                &samples,
                alpha,
                p,
                &dec,
                cfg.ceiling("semigroup_decay", ceilings::SEMIGROUP_DECAY),
            )?;
            entries.push(ProbeEntry::new(&r, &[("alpha", alpha), ("p", p)]));
        }
    }
    if selected("smoothing") {
        let r = probes::probe_smoothing(
            &samples,
            alpha,
            0.0,
            alpha,
            ex.p,
            ex.q,
            &dec,
            cfg.ceiling("smoothing", ceilings::SMOOTHING),
        )?;
        entries.push(ProbeEntry::new(&r, &[("alpha", alpha), ("s1", 0.0), ("s2", alpha), ("p", ex.p), ("q", ex.q)]));
    }
    if selected("positivity") {
        for p in [2.0, 4.0, 6.0] {
            let r = probes::probe_positivity(&samples, alpha, p, &dec)?;
            entries.push(ProbeEntry::new(&r, &[("alpha", alpha), ("p", p)]));
        }
    }
    if selected("bilinear") {
        let (s1, s2) = ex.bilinear();
        let r = probes::probe_bilinear(&pairs, s1, s2, ex.p, ex.q, &dec, cfg.ceiling("bilinear", ceilings::BILINEAR))?;
        entries.push(ProbeEntry::new(&r, &[("s1", s1), ("s2", s2), ("p", ex.p), ("q", ex.q)]));
    }
    if selected("commutator") {
        let (s1, s2) = ex.commutator();
        let r = probes::probe_commutator(&pairs, s1, s2, ex.p, ex.q, &dec, cfg.ceiling("commutator", ceilings::COMMUTATOR))?;
        entries.push(ProbeEntry::new(&r, &[("s1", s1), ("s2", s2), ("p", ex.p), ("q", ex.q)]));
    }
    if selected("product_semigroup") {
        let params = ex.product_semigroup();
        let f = Trajectory::constant(samples[samples.len() - 1].clone(), uniform_times(cfg.model.period, 64))?;
        let r = probes::probe_product_semigroup(
            &f,
            &samples,
            &params,
            &dec,
            cfg.ceiling("product_semigroup", ceilings::PRODUCT_SEMIGROUP),
        )?;
        entries.push(ProbeEntry::new(
            &r,
            &[
                ("lambda", params.lambda),
                ("alpha", params.alpha),
                ("beta", params.beta),
                ("s1", params.s1),
                ("s2", params.s2),
                ("p", params.p),
                ("q", params.q),
                ("T", cfg.model.period),
            ],
        ));
    }
    let passed = entries.iter().all(|e| e.passed);
    Ok(ProbeDocument {
        schema: PROBES_SCHEMA.into(),
        seed: cfg.seed,
        n: cfg.probes.n,
        probes: entries,
        passed,
    })
}

pub fn verify(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let doc = probe_suite(cfg)?;
    json::write(&out.join("probes.json"), &doc)?;
    write_csv(
        &out.join("probe_ratios.csv"),
        &["probe", "p", "index", "ratio"],
        doc.probes.iter().flat_map(|e| {
            let p = e.parameters.get("p").copied().unwrap_or(f64::NAN);
            e.ratios
                .iter()
                .enumerate()
                .map(move |(i, r)| vec![e.name.clone(), fmt(p), i.to_string(), fmt(*r)])
        }),
    )?;
    Ok(if doc.passed { exit::OK } else { exit::VERIFY_FAILED })
}

pub fn besov(path: &Path, s: f64, p: f64, q: f64, out: &Path) -> Result<i32> {
    let snap = snapshot::read(path)?;
    let spec = BesovSpec::new(s, p, q).map_err(|e| CliError::Config(e.to_string()))?;
    let dec = DyadicDecomposition::new(snap.field.grid());
    let norm = dec.besov_norm(&snap.field, &spec)?;
    let spectrum = besov_spectrum(&snap.field, &dec, &spec)?;
    write_spectrum_csv(&out.join("besov_spectrum.csv"), &spectrum)?;
    json::write(
        &out.join("besov.json"),
        &BesovDocument {
            schema: BESOV_SCHEMA.into(),
            s,
            p,
            q,
            norm,
            time: snap.time,
            spectrum,
        },
    )?;
    println!("{norm:.16e}");
    Ok(exit::OK)
}
