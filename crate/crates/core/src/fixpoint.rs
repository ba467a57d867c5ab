//! Successive approximation of the `T`-periodic solution.
//!
//! Starting from `θ₀⁽⁰⁾ = 0`, `θ⁽⁰⁾ ≡ 0`, each step sets
//!
//! ```text
//! θ₀⁽ⁿ⁺¹⁾ = (1 − e^{−TA})^{−1} (θ⁽ⁿ⁾(T) − e^{−TA}θ⁽ⁿ⁾(0))
//! ∂ₜθ⁽ⁿ⁺¹⁾ + Aθ⁽ⁿ⁺¹⁾ + u⁽ⁿ⁾·∇θ⁽ⁿ⁺¹⁾ = S_{n+4}F,  θ⁽ⁿ⁺¹⁾(0) = S_{n+4}θ₀⁽ⁿ⁺¹⁾
//! ```
//!
//! with `u⁽ⁿ⁾ = R^⊥θ⁽ⁿ⁾`, and monitors
//! `A_n = max(‖θ₀⁽ⁿ⁾‖_{Ḃ⁰_{p,1}∩Ḃ^{s_c}_{p,q}}, ‖θ⁽ⁿ⁾‖_{X_T})` and
//! `B_n = ‖θ₀⁽ⁿ⁺¹⁾ − θ₀⁽ⁿ⁾‖_{Ḃ^σ_{p,q}} + ‖θ⁽ⁿ⁺¹⁾ − θ⁽ⁿ⁾‖_{L̃^∞Ḃ^σ_{p,q}}`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dynamics::{self_transport, solve_on_period, AdvectionSource, Divergence, Problem, StepperConfig};
use crate::field::Field;
use crate::littlewood_paley::{BesovSpec, DyadicDecomposition};
use crate::multiplier::{fractional_laplacian, semigroup};
use crate::periodic::{resolvent_forward, resolvent_inverse, PeriodicForcing};
use crate::trajectory::Trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub sigma: f64,
    pub period: f64,
    pub max_iter: usize,
    pub tol_b: f64,
    /// Iterate `n + 1` uses the cutoff `S_{n + cutoff_offset}`.
    pub cutoff_offset: i32,
    pub stepper: StepperConfig,
}

impl IterationConfig {
    /// Defaults: `σ = α/2`, `max_iter = 40`, `tol_B = 1e−9`, offset 4, `dt = 1e−3`.
    pub fn new(alpha: f64, p: f64, q: f64, r: f64, period: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            p,
            q,
            r,
            sigma: alpha / 2.0,
            period,
            max_iter: 40,
            tol_b: 1e-9,
            cutoff_offset: 4,
            stepper: StepperConfig::new(1e-3, 1)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the admissible parameter ranges, naming the first violated one.
    pub fn validate(&self) -> Result<()> {
        let Self { alpha, p, q, r, sigma, .. } = *self;
        let fail = |what: &str| {
            let (rule, values) = what.split_once(" (").map_or((what, ""), |(a, b)| (a, b));
            let values = if values.is_empty() { String::new() } else { format!(" ({values}") };
            Err(Error::Config(format!("{rule} violated{values}")))
        };
        if !(alpha > 2.0 / 3.0 && alpha < 1.0) {
            return fail(&format!("2/3<α<1 (α = {alpha})"));
        }
        if !(2.0 / (2.0 * alpha - 1.0) < r && r <= p && p < 4.0 / alpha) {
            return fail(&format!("2/(2α−1)<r≤p<4/α (r = {r}, p = {p}, α = {alpha})"));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return fail(&format!("1≤q<∞ (q = {q})"));
        }
        if !(alpha - 2.0 / p < sigma && sigma < 2.0 / p) {
            return fail(&format!("α−2/p<σ<2/p (σ = {sigma})"));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return fail(&format!("T>0 (T = {})", self.period));
        }
        if !(self.tol_b > 0.0) {
            return fail(&format!("tol_B>0 (tol_B = {})", self.tol_b));
        }
        if self.max_iter == 0 {
            return fail("max_iter≥1");
        }
        if self.stepper.dt > self.period {
            return fail(&format!("dt≤T (dt = {})", self.stepper.dt));
        }
        Ok(())
    }

    /// `s_c = 1 + 2/p − α`.
    pub fn critical_regularity(&self) -> f64 {
        1.0 + 2.0 / self.p - self.alpha
    }

    pub fn sigma_spec(&self) -> BesovSpec {
        BesovSpec::new(self.sigma, self.p, self.q).expect("validated exponents")
    }

    pub fn critical_spec(&self) -> BesovSpec {
        BesovSpec::new(self.critical_regularity(), self.p, self.q).expect("validated exponents")
    }

    pub fn l1_spec(&self) -> BesovSpec {
        BesovSpec::new(0.0, self.p, 1.0).expect("validated exponents")
    }
}

/// `max(‖f‖_{Ḃ⁰_{p,1}}, ‖f‖_{Ḃ^{s_c}_{p,q}})`.
pub fn datum_norm(f: &Field, dec: &DyadicDecomposition, cfg: &IterationConfig) -> Result<f64> {
    let blocks = dec.block_norms(f, cfg.l1_spec().p)?;
    Ok(cfg
        .l1_spec()
        .combine(dec.j_min(), &blocks)
        .max(cfg.critical_spec().combine(dec.j_min(), &blocks)))
}

/// `‖θ‖_{X_T} = max(‖θ‖_{L̃^∞Ḃ⁰_{p,1}}, ‖θ‖_{L̃^∞Ḃ^{s_c}_{p,q}})`.
pub fn x_norm(traj: &Trajectory, dec: &DyadicDecomposition, cfg: &IterationConfig) -> Result<f64> {
    let blocks = dec.block_sup_norms(traj, cfg.l1_spec().p)?;
    Ok(cfg
        .l1_spec()
        .combine(dec.j_min(), &blocks)
        .max(cfg.critical_spec().combine(dec.j_min(), &blocks)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub n: usize,
    pub theta0: Field,
    pub trajectory: Trajectory,
    /// `θ⁽ⁿ⁾(T) − e^{−TA}θ⁽ⁿ⁾(0)`.
    pub psi_t: Field,
    pub a_n: f64,
    /// `B_{n−1}`, absent for the starting state.
    pub b_prev: Option<f64>,
    pub periodicity_residual: f64,
}

impl IterationState {
    /// `θ₀⁽⁰⁾ = 0`, `θ⁽⁰⁾ ≡ 0` on the stepper's sample times.
    pub fn zero(grid: &crate::Grid, cfg: &IterationConfig) -> Result<Self> {
        let times = cfg.stepper.sample_times(cfg.period);
        let zero = Field::zeros(grid);
        Ok(Self {
            n: 0,
            theta0: zero.clone(),
            trajectory: Trajectory::constant(zero.clone(), times)?,
            psi_t: zero,
            a_n: 0.0,
            b_prev: None,
            periodicity_residual: 0.0,
        })
    }

    /// Restart from `θ₀⁽⁰⁾ = seed` with `θ⁽⁰⁾` its self-advected evolution.
    pub fn seeded(seed: &Field, forcing: &PeriodicForcing, dec: &DyadicDecomposition, cfg: &IterationConfig) -> Result<Self> {
        let problem = Problem::new(cfg.alpha)
            .advection(AdvectionSource::SelfAdvected)
            .forcing(forcing);
        let trajectory = solve_on_period(seed, cfg.period, problem, &cfg.stepper)?;
        Self::from_parts(0, seed.clone(), trajectory, None, dec, cfg)
    }

    fn from_parts(
        n: usize,
        theta0: Field,
        trajectory: Trajectory,
        b_prev: Option<f64>,
        dec: &DyadicDecomposition,
        cfg: &IterationConfig,
    ) -> Result<Self> {
        let psi_t = trajectory
            .last()
            .sub(&semigroup(trajectory.first(), cfg.period, cfg.alpha)?)?;
        let a_n = datum_norm(&theta0, dec, cfg)?.max(x_norm(&trajectory, dec, cfg)?);
        let periodicity_residual = periodicity_residual(&trajectory, dec, &cfg.sigma_spec())?;
        Ok(Self {
            n,
            theta0,
            trajectory,
            psi_t,
            a_n,
            b_prev,
            periodicity_residual,
        })
    }
}

/// `‖θ(T) − θ(0)‖_{Ḃ} / ‖θ(0)‖_{Ḃ}`, zero for a vanishing trajectory.
pub fn periodicity_residual(traj: &Trajectory, dec: &DyadicDecomposition, spec: &BesovSpec) -> Result<f64> {
    let gap = dec.besov_norm(&traj.last().sub(traj.first())?, spec)?;
    let size = dec.besov_norm(traj.first(), spec)?;
    Ok(if gap == 0.0 { 0.0 } else { gap / size })
}

/// `θ₀⁽ⁿ⁺¹⁾ = (1 − e^{−TA})^{−1} ψ⁽ⁿ⁾(T)`.
pub fn next_initial_datum(state: &IterationState, cfg: &IterationConfig) -> Result<Field> {
    resolvent_inverse(&state.psi_t, cfg.period, cfg.alpha)
}

/// Max-abs residual of `(1 − e^{−TA})θ₀⁽ⁿ⁺¹⁾ = ψ⁽ⁿ⁾(T)`.
pub fn fixed_point_residual(theta0_next: &Field, state: &IterationState, cfg: &IterationConfig) -> Result<f64> {
    resolvent_forward(theta0_next, cfg.period, cfg.alpha)?.max_abs_diff(&state.psi_t)
}

/// One record per completed step `n → n+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Index of the new iterate.
    pub n: usize,
    pub a_n: f64,
    /// `B_{n−1}` and its two addends.
    pub b_n: f64,
    pub b_datum: f64,
    pub b_trajectory: f64,
    pub periodicity_residual: f64,
    pub fixed_point_residual: f64,
    /// `‖(1 − S_l)F‖ + ‖(1 − S_l)θ₀⁽ⁿ⁾‖` in `Ḃ^σ_{p,q}` for the level `l` used;
    /// zero once the cutoff acts as the identity.
    pub cutoff_gap: f64,
}

/// Advances `state` by one step of the scheme.
pub fn iterate_once(
    state: &IterationState,
    forcing: &PeriodicForcing,
    dec: &DyadicDecomposition,
    cfg: &IterationConfig,
) -> Result<(IterationState, IterationRecord)> {
    let theta0 = next_initial_datum(state, cfg)?;
    let fixed_point = fixed_point_residual(&theta0, state, cfg)?;
    let level = state.n as i32 + cfg.cutoff_offset;
    let zero_velocity = state.trajectory.fields().iter().all(|f| f.max_abs() == 0.0);
    let advection = if zero_velocity {
        AdvectionSource::None
    } else {
        AdvectionSource::Frozen(&state.trajectory)
    };
    let problem = Problem::new(cfg.alpha)
        .advection(advection)
        .forcing(forcing)
        .low_pass(Some(level));
    let trajectory = solve_on_period(&theta0, cfg.period, problem, &cfg.stepper)?;
    let sigma = cfg.sigma_spec();
    let b_datum = dec.besov_norm(&theta0.sub(&state.theta0)?, &sigma)?;
    let b_trajectory = if state.trajectory.times() == trajectory.times() {
        dec.spacetime_besov_norm(&trajectory.difference(&state.trajectory)?, &sigma)?
    } else {
        return Err(Error::InvalidTrajectory("iterates sampled at different times".into()));
    };
    let b_n = b_datum + b_trajectory;
    let cut = |f: &Field| -> Result<f64> { dec.besov_norm(&f.sub(&dec.low_pass(f, level)?)?, &sigma) };
    let cutoff_gap = cut(&forcing.at(0.0))?.max(cut(&forcing.at(cfg.period / 4.0))?) + cut(&theta0)?;
    let next = IterationState::from_parts(state.n + 1, theta0, trajectory, Some(b_n), dec, cfg)?;
    let record = IterationRecord {
        n: next.n,
        a_n: next.a_n,
        b_n,
        b_datum,
        b_trajectory,
        periodicity_residual: next.periodicity_residual,
        fixed_point_residual: fixed_point,
        cutoff_gap,
    };
    Ok((next, record))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `B_n < tol_B` with the cutoff no longer active.
    Converged,
    MaxIterations,
    /// `B_n` grew three times in a row.
    NonContraction,
    BlowUp,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max_iter reached",
            StopReason::NonContraction => "non-contraction: B_n increased three consecutive times",
            StopReason::BlowUp => "stepper blow-up",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<IterationRecord>,
    pub theta0_l1: f64,
    pub theta0_critical: f64,
    pub theta0_sigma: f64,
    /// `‖θ(T) − θ(0)‖_{Ḃ^σ} / ‖θ₀‖_{Ḃ^σ}` of the last iterate.
    pub periodicity_residual: f64,
    /// `x_norm` of the last trajectory.
    pub k: f64,
    pub forcing_norm: f64,
    /// `K / sup_t‖F‖_{Ḃ⁰_{r,∞}}`, absent for zero forcing.
    pub k_over_f: Option<f64>,
    pub converged: bool,
    pub reason: StopReason,
}

/// Iteration that stopped without converging.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationFailure {
    pub report: ConvergenceReport,
    pub divergence: Option<Divergence>,
}

fn consecutive_growth(records: &[IterationRecord]) -> bool {
    records.len() >= 4 && records[records.len() - 4..].windows(2).all(|w| w[1].b_n > w[0].b_n)
}

fn report(
    state: &IterationState,
    records: Vec<IterationRecord>,
    forcing_norm: f64,
    dec: &DyadicDecomposition,
    cfg: &IterationConfig,
    reason: StopReason,
) -> Result<ConvergenceReport> {
    let blocks = dec.block_norms(&state.theta0, cfg.l1_spec().p)?;
    let theta0_sigma = cfg.sigma_spec().combine(dec.j_min(), &blocks);
    let gap = dec.besov_norm(&state.trajectory.last().sub(state.trajectory.first())?, &cfg.sigma_spec())?;
    let k = x_norm(&state.trajectory, dec, cfg)?;
    Ok(ConvergenceReport {
        records,
        theta0_l1: cfg.l1_spec().combine(dec.j_min(), &blocks),
        theta0_critical: cfg.critical_spec().combine(dec.j_min(), &blocks),
        theta0_sigma,
        periodicity_residual: if gap == 0.0 { 0.0 } else { gap / theta0_sigma },
        k,
        forcing_norm,
        k_over_f: (forcing_norm > 0.0).then(|| k / forcing_norm),
        converged: reason == StopReason::Converged,
        reason,
    })
}

/// Runs the scheme from `start` (the zero state when `None`) until
/// `B_n < tol_B` (with the cutoff inactive on `F` and `θ₀`), `max_iter`
/// steps, non-contraction, or blow-up.
///
/// `observer` sees every record as it is produced. Running out of iterations
/// returns `Ok` with `converged = false`; non-contraction and blow-up return
/// [`Error::NonContraction`] and [`Error::IterationBlowUp`].
pub fn solve_periodic_with(
    forcing: &PeriodicForcing,
    cfg: &IterationConfig,
    start: Option<IterationState>,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<(Field, Trajectory, ConvergenceReport)> {
    cfg.validate()?;
    if (forcing.period() - cfg.period).abs() > 1e-12 * cfg.period {
        return Err(Error::Config(format!(
            "forcing period {} differs from T = {}",
            forcing.period(),
            cfg.period
        )));
    }
    let grid = forcing.grid();
    let dec = DyadicDecomposition::new(grid);
    let forcing_norm = forcing.sup_besov_norm(&dec, cfg.r)?;
    let mut state = match start {
        Some(s) => s,
        None => IterationState::zero(grid, cfg)?,
    };
    let mut records = Vec::new();
    loop {
        let step = iterate_once(&state, forcing, &dec, cfg);
        let (next, record) = match step {
            Ok(v) => v,
            Err(Error::Diverged(d)) => {
                let report = report(&state, records, forcing_norm, &dec, cfg, StopReason::BlowUp)?;
                return Err(Error::IterationBlowUp(Box::new(IterationFailure {
                    report,
                    divergence: Some(*d),
                })));
            }
            Err(e) => return Err(e),
        };
        observer(&record);
        let settled = record.b_n < cfg.tol_b && record.cutoff_gap < cfg.tol_b;
        records.push(record);
        state = next;
        let reason = if settled {
            Some(StopReason::Converged)
        } else if consecutive_growth(&records) {
            Some(StopReason::NonContraction)
        } else if records.len() >= cfg.max_iter {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if let Some(reason) = reason {
            let report = report(&state, records, forcing_norm, &dec, cfg, reason)?;
            if reason == StopReason::NonContraction {
                return Err(Error::NonContraction(Box::new(IterationFailure {
                    report,
                    divergence: None,
                })));
            }
            return Ok((state.theta0, state.trajectory, report));
        }
    }
}

pub fn solve_periodic(forcing: &PeriodicForcing, cfg: &IterationConfig) -> Result<(Field, Trajectory, ConvergenceReport)> {
    solve_periodic_with(forcing, cfg, None, &mut |_| {})
}

/// Concatenates `n_periods` copies of a periodic trajectory.
///
/// Refuses when `‖θ(T) − θ(0)‖_{L²} / ‖θ(0)‖_{L²}` exceeds `tolerance`.
pub fn extend_periodically(traj: &Trajectory, n_periods: usize, tolerance: f64) -> Result<Trajectory> {
    if n_periods == 0 {
        return Err(Error::InvalidArgument("n_periods must be at least 1".into()));
    }
    let gap = traj.last().sub(traj.first())?.l2_norm();
    let residual = if gap == 0.0 { 0.0 } else { gap / traj.first().l2_norm() };
    if !(residual <= tolerance) {
        return Err(Error::NotPeriodic { residual, tolerance });
    }
    let period = traj.period();
    let mut times = traj.times().to_vec();
    let mut fields = traj.fields().to_vec();
    for k in 1..n_periods {
        let shift = k as f64 * period;
        for (t, f) in traj.iter().skip(1) {
            times.push(t + shift);
            fields.push(f.clone());
        }
    }
    Trajectory::new(times, fields)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Uniqueness {
    Identical,
    Distinct {
        /// `‖θ − θ̃‖_{L̃^∞Ḃ^σ_{p,q}}`.
        difference: f64,
        /// Smallest `C₃` compatible with the contraction estimate:
        /// `1 / (‖θ‖_{X_T} + ‖θ̃‖_{L̃^∞Ḃ^{s_c}_{p,q}})`.
        constant: f64,
    },
}

impl Uniqueness {
    pub fn difference(&self) -> f64 {
        match self {
            Uniqueness::Identical => 0.0,
            Uniqueness::Distinct { difference, .. } => *difference,
        }
    }
}

pub fn uniqueness_probe(
    theta: &Trajectory,
    other: &Trajectory,
    dec: &DyadicDecomposition,
    cfg: &IterationConfig,
) -> Result<Uniqueness> {
    let difference = dec.spacetime_besov_norm(&theta.difference(other)?, &cfg.sigma_spec())?;
    if difference == 0.0 {
        return Ok(Uniqueness::Identical);
    }
    let size = x_norm(theta, dec, cfg)? + dec.spacetime_besov_norm(other, &cfg.critical_spec())?;
    Ok(Uniqueness::Distinct {
        difference,
        constant: 1.0 / size,
    })
}

/// `max_t ‖∂ₜθ + Aθ + u·∇θ − F‖_{L²} / max_t ‖F‖_{L²}` on the stored samples.
///
/// `∂ₜ` is the fourth-order central difference with periodic wrap, so the
/// samples must be uniform and `θ(T) = θ(0)`.
pub fn pde_residual(traj: &Trajectory, forcing: &PeriodicForcing, alpha: f64) -> Result<f64> {
    let times = traj.times();
    let m = times.len() - 1;
    if m < 4 {
        return Err(Error::InvalidTrajectory("need at least 5 samples".into()));
    }
    let h = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::InvalidTrajectory("samples are not uniform in time".into()));
    }
    let at = |i: isize| &traj.fields()[i.rem_euclid(m as isize) as usize];
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..m as isize {
        let f = at(i);
        let dt = at(i - 2)
            .combine(1.0, at(i - 1), -8.0)?
            .combine(1.0, &at(i + 1).combine(8.0, at(i + 2), -1.0)?, 1.0)?
            .scaled(1.0 / (12.0 * h));
        let forcing_now = forcing.at(times[i as usize]);
        let residual = dt
            .add(&fractional_laplacian(f, alpha)?)?
            .add(&self_transport(f)?)?
            .sub(&forcing_now)?;
        worst = worst.max(residual.l2_norm());
        scale = scale.max(forcing_now.l2_norm());
    }
    Ok(if worst == 0.0 { 0.0 } else { worst / scale })
}
