//! Integrating-factor RK4 for `∂ₜθ + (−Δ)^{α/2}θ + u·∇θ = F`.
//!
//! The state is advanced in Fourier space. The linear part is carried by the
//! exact factors `e^{−λh}`, `λ = |k|^α`; the transport term is evaluated
//! pseudo-spectrally with the two-thirds rule applied to its inputs and output.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::field::{forward_real, inverse_pair, Field, SpectralField};
use crate::grid::Grid;
use crate::littlewood_paley::DyadicDecomposition;
use crate::multiplier::{dealias_in_place, gradient_spectral, riesz_perp_spectral};
use crate::periodic::PeriodicForcing;
use crate::trajectory::Trajectory;
use crate::{Error, Result, C64};

/// Blow-up threshold relative to the reference size of the run.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub store_every: usize,
}

impl StepperConfig {
    pub fn new(dt: f64, store_every: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
        }
        if store_every == 0 {
            return Err(Error::InvalidArgument("store_every must be at least 1".into()));
        }
        Ok(Self { dt, store_every })
    }

    /// Number of steps to reach `t_end`; the last one is shortened to land on it.
    pub fn step_count(&self, t_end: f64) -> usize {
        (libm::ceil(t_end / self.dt * (1.0 - 1e-12)) as usize).max(1)
    }

    /// Times at which [`solve_on_period`] stores samples.
    pub fn sample_times(&self, t_end: f64) -> Vec<f64> {
        let steps = self.step_count(t_end);
        let mut times: Vec<f64> = (0..steps)
            .step_by(self.store_every)
            .map(|k| k as f64 * self.dt)
            .collect();
        times.push(t_end);
        times
    }
}

/// Where the transport velocity comes from.
#[derive(Debug, Clone, Copy)]
pub enum AdvectionSource<'a> {
    None,
    /// `u = R^⊥θ` of the evolving state.
    SelfAdvected,
    /// `u = R^⊥θ̃(t)` with `θ̃` interpolated linearly from stored samples.
    Frozen(&'a Trajectory),
}

/// Right-hand side `F(t)` in Fourier space.
pub trait ForcingTerm {
    fn coefficients(&self, t: f64) -> SpectralField;
}

impl ForcingTerm for PeriodicForcing {
    fn coefficients(&self, t: f64) -> SpectralField {
        self.spectral_at(t)
    }
}

impl<F: Fn(f64) -> SpectralField> ForcingTerm for F {
    fn coefficients(&self, t: f64) -> SpectralField {
        self(t)
    }
}

/// Everything but the datum and the time stepping.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub alpha: f64,
    pub advection: AdvectionSource<'a>,
    pub forcing: Option<&'a dyn ForcingTerm>,
    /// Filter forcing and datum through `S_l`.
    pub low_pass_level: Option<i32>,
}

impl<'a> Problem<'a> {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            advection: AdvectionSource::None,
            forcing: None,
            low_pass_level: None,
        }
    }

    pub fn advection(self, advection: AdvectionSource<'a>) -> Self {
        Self { advection, ..self }
    }

    pub fn forcing(self, forcing: &'a dyn ForcingTerm) -> Self {
        Self {
            forcing: Some(forcing),
            ..self
        }
    }

    pub fn low_pass(self, level: Option<i32>) -> Self {
        Self {
            low_pass_level: level,
            ..self
        }
    }
}

/// A run that left the finite or bounded regime.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub time: f64,
    /// Last finite L² norm seen.
    pub norm: f64,
    pub reference: f64,
    /// Stored samples up to the last finite state.
    pub partial: Trajectory,
}

/// `P(u₁∂₁θ + u₂∂₂θ)` with `P` the two-thirds projection.
pub fn nonlinear_term(theta: &Field, u: (&Field, &Field)) -> Result<Field> {
    theta.ensure_same_grid(u.0)?;
    theta.ensure_same_grid(u.1)?;
    let grid = theta.grid();
    let (d1, d2) = gradient_spectral(&theta.forward()?);
    let (g1, g2) = inverse_pair(&d1, &d2, grid);
    let values = transport(u.0.values(), u.1.values(), &g1, &g2);
    let mut coeffs = forward_real(&values, grid);
    dealias_in_place(&mut coeffs, grid);
    Ok(SpectralField::from_coeffs(grid, coeffs)?.inverse())
}

/// `P(u·∇Pθ)` with `u = R^⊥Pθ`: the self-advection term exactly as the
/// stepper evaluates it.
pub fn self_transport(theta: &Field) -> Result<Field> {
    let grid = theta.grid();
    let mut c = theta.forward()?.into_coeffs();
    dealias_in_place(&mut c, grid);
    let s = SpectralField::from_coeffs(grid, c)?;
    let (d1, d2) = gradient_spectral(&s);
    let (g1, g2) = inverse_pair(&d1, &d2, grid);
    let (a, b) = riesz_perp_spectral(&s);
    let (u1, u2) = inverse_pair(&a, &b, grid);
    let mut coeffs = forward_real(&transport(&u1, &u2, &g1, &g2), grid);
    dealias_in_place(&mut coeffs, grid);
    Ok(SpectralField::from_coeffs(grid, coeffs)?.inverse())
}

fn transport(u1: &[f64], u2: &[f64], g1: &[f64], g2: &[f64]) -> Vec<f64> {
    u1.iter()
        .zip(u2)
        .zip(g1.iter().zip(g2))
        .map(|((a, b), (c, d))| a * c + b * d)
        .collect()
}

struct Velocity {
    sample: usize,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

struct Stepper<'a> {
    grid: Grid,
    lambdas: Vec<f64>,
    mask: Vec<bool>,
    filter: Option<Vec<f64>>,
    problem: Problem<'a>,
    cache: Vec<Velocity>,
    sup_forcing: f64,
    factors: Option<(f64, Vec<f64>, Vec<f64>)>,
}

impl<'a> Stepper<'a> {
    fn new(grid: &Grid, problem: Problem<'a>) -> Result<Self> {
        let alpha = problem.alpha;
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::OrderOutOfRange(alpha));
        }
        if let AdvectionSource::Frozen(traj) = problem.advection {
            if traj.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        let lambdas = grid.magnitudes().iter().map(|&r| libm::pow(r, alpha)).collect();
        let mut ones = alloc::vec![C64::new(1.0, 0.0); grid.len()];
        dealias_in_place(&mut ones, grid);
        let mask = ones.iter().map(|c| c.re != 0.0).collect();
        let filter = problem
            .low_pass_level
            .map(|l| DyadicDecomposition::new(grid).low_pass_symbol(l));
        Ok(Self {
            grid: grid.clone(),
            lambdas,
            mask,
            filter,
            problem,
            cache: Vec::new(),
            sup_forcing: 0.0,
            factors: None,
        })
    }

    fn masked(&self, coeffs: &[C64]) -> SpectralField {
        let c = coeffs
            .iter()
            .zip(&self.mask)
            .map(|(c, &keep)| if keep { *c } else { C64::new(0.0, 0.0) })
            .collect();
        SpectralField::from_coeffs(&self.grid, c).expect("grid-sized")
    }

    /// Velocity at stored sample `sample`; keeps only samples `i`, `i+1` cached.
    fn frozen_velocity(&mut self, traj: &Trajectory, sample: usize, keep: usize) -> usize {
        self.cache.retain(|v| v.sample == keep || v.sample == keep + 1);
        if let Some(pos) = self.cache.iter().position(|v| v.sample == sample) {
            return pos;
        }
        let s = self.masked(traj.fields()[sample].forward_unchecked().coeffs());
        let (a, b) = riesz_perp_spectral(&s);
        let (u1, u2) = inverse_pair(&a, &b, &self.grid);
        self.cache.push(Velocity { sample, u1, u2 });
        self.cache.len() - 1
    }

    /// `F(t) − P(u·∇θ)` in Fourier space.
    fn rhs(&mut self, theta: &[C64], t: f64) -> Vec<C64> {
        let grid = self.grid.clone();
        let mut out = match self.problem.advection {
            AdvectionSource::None => alloc::vec![C64::new(0.0, 0.0); grid.len()],
            advection => {
                let s = self.masked(theta);
                let (d1, d2) = gradient_spectral(&s);
                let (g1, g2) = inverse_pair(&d1, &d2, &grid);
                let values = match advection {
                    AdvectionSource::SelfAdvected => {
                        let (a, b) = riesz_perp_spectral(&s);
                        let (u1, u2) = inverse_pair(&a, &b, &grid);
                        transport(&u1, &u2, &g1, &g2)
                    }
                    AdvectionSource::Frozen(traj) => {
                        let (i, w) = traj.locate(t);
                        let p = self.frozen_velocity(traj, i, i);
                        if w == 0.0 {
                            let v = &self.cache[p];
                            transport(&v.u1, &v.u2, &g1, &g2)
                        } else {
                            let q = self.frozen_velocity(traj, i + 1, i);
                            let (vi, vj) = (&self.cache[p], &self.cache[q]);
                            let u1: Vec<f64> = vi.u1.iter().zip(&vj.u1).map(|(a, b)| (1.0 - w) * a + w * b).collect();
                            let u2: Vec<f64> = vi.u2.iter().zip(&vj.u2).map(|(a, b)| (1.0 - w) * a + w * b).collect();
                            transport(&u1, &u2, &g1, &g2)
                        }
                    }
                    AdvectionSource::None => unreachable!(),
                };
                let mut c = forward_real(&values, &grid);
                dealias_in_place(&mut c, &grid);
                c.iter_mut().for_each(|z| *z = -*z);
                c
            }
        };
        if let Some(forcing) = self.problem.forcing {
            let f = forcing.coefficients(t);
            let mut energy = 0.0;
            for (idx, (o, c)) in out.iter_mut().zip(f.coeffs()).enumerate() {
                let c = match &self.filter {
                    Some(symbol) => c * symbol[idx],
                    None => *c,
                };
                energy += c.norm_sqr();
                *o += c;
            }
            self.sup_forcing = self.sup_forcing.max(libm::sqrt(energy * grid.area()));
        }
        out
    }

    fn factors(&mut self, dt: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.factors {
            Some((h, e, e2)) if (h - dt).abs() <= 1e-14 * dt => (e.clone(), e2.clone()),
            _ => {
                let e: Vec<f64> = self.lambdas.iter().map(|l| libm::exp(-l * dt)).collect();
                let e2: Vec<f64> = self.lambdas.iter().map(|l| libm::exp(-l * dt / 2.0)).collect();
                self.factors = Some((dt, e.clone(), e2.clone()));
                (e, e2)
            }
        }
    }

    fn step(&mut self, theta: &[C64], t: f64, dt: f64) -> Vec<C64> {
        let (e, e2) = self.factors(dt);
        let len = theta.len();
        let a: Vec<C64> = self.rhs(theta, t).into_iter().map(|z| z * dt).collect();
        let y: Vec<C64> = (0..len).map(|i| (theta[i] + a[i] * 0.5) * e2[i]).collect();
        let b: Vec<C64> = self.rhs(&y, t + dt / 2.0).into_iter().map(|z| z * dt).collect();
        let y: Vec<C64> = (0..len).map(|i| theta[i] * e2[i] + b[i] * 0.5).collect();
        let c: Vec<C64> = self.rhs(&y, t + dt / 2.0).into_iter().map(|z| z * dt).collect();
        let y: Vec<C64> = (0..len).map(|i| theta[i] * e[i] + c[i] * e2[i]).collect();
        let d: Vec<C64> = self.rhs(&y, t + dt).into_iter().map(|z| z * dt).collect();
        let mut next: Vec<C64> = (0..len)
            .map(|i| theta[i] * e[i] + (a[i] * e[i] + (b[i] + c[i]) * (2.0 * e2[i]) + d[i]) / 6.0)
            .collect();
        next[0] = C64::new(0.0, 0.0);
        next
    }

    fn l2(&self, coeffs: &[C64]) -> f64 {
        libm::sqrt(coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.area())
    }
}

/// One step of size `dt` from time `t`. Any low-pass level filters only the
/// forcing here.
pub fn step(theta: &Field, t: f64, dt: f64, problem: Problem<'_>) -> Result<Field> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    let mut stepper = Stepper::new(theta.grid(), problem)?;
    let next = stepper.step(theta.forward()?.coeffs(), t, dt);
    let out = SpectralField::from_coeffs(theta.grid(), next)?.inverse();
    out.check_finite().map_err(|_| {
        Error::Diverged(Box::new(Divergence {
            time: t + dt,
            norm: theta.l2_norm(),
            reference: theta.l2_norm(),
            partial: Trajectory::constant(theta.clone(), alloc::vec![0.0]).expect("one sample"),
        }))
    })?;
    Ok(out)
}

/// Evolves `θ₀` (filtered through `S_l` when a level is set) on `[0, t_end]`.
///
/// Samples are stored every `store_every` steps and at `t_end`. A non-finite
/// state, or an L² norm above [`DIVERGENCE_FACTOR`] times
/// `max(‖θ₀‖, t_end·sup‖F‖)`, ends the run with [`Error::Diverged`].
pub fn solve_on_period(theta0: &Field, t_end: f64, problem: Problem<'_>, cfg: &StepperConfig) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("end time {t_end} must be positive")));
    }
    if let AdvectionSource::Frozen(traj) = problem.advection {
        if traj.period() < t_end * (1.0 - 1e-12) {
            return Err(Error::InvalidTrajectory(format!(
                "frozen velocity covers [0, {}], run needs [0, {t_end}]",
                traj.period()
            )));
        }
    }
    let grid = theta0.grid().clone();
    let mut stepper = Stepper::new(&grid, problem)?;
    let mut state = theta0.forward()?.into_coeffs();
    if let Some(symbol) = &stepper.filter {
        state.iter_mut().zip(symbol).for_each(|(c, s)| *c *= *s);
    }
    let steps = cfg.step_count(t_end);
    let initial_norm = stepper.l2(&state);
    let mut times = alloc::vec![0.0];
    let mut fields = alloc::vec![SpectralField::from_coeffs(&grid, state.clone())?.inverse()];
    let mut norm = initial_norm;
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let (t_next, dt) = if k + 1 == steps { (t_end, t_end - t) } else { ((k + 1) as f64 * cfg.dt, cfg.dt) };
        let next = stepper.step(&state, t, dt);
        let next_norm = stepper.l2(&next);
        let reference = initial_norm.max(t_end * stepper.sup_forcing).max(f64::MIN_POSITIVE);
        if !next_norm.is_finite() || next_norm > DIVERGENCE_FACTOR * reference {
            let partial = Trajectory::new(times, fields)?;
            return Err(Error::Diverged(Box::new(Divergence {
                time: t_next,
                norm,
                reference,
                partial,
            })));
        }
        state = next;
        norm = next_norm;
        if (k + 1) % cfg.store_every == 0 || k + 1 == steps {
            times.push(t_next);
            fields.push(SpectralField::from_coeffs(&grid, state.clone())?.inverse());
        }
    }
    Trajectory::new(times, fields)
}
