//! The linear periodic problem `∂ₜu + Au = F`, `A = (−Δ)^{α/2}`, `F(t+T) = F(t)`.
//!
//! The solution with datum `u₀` is `u(t) = e^{−tA}u₀ + f(t)` with the Duhamel
//! term `f(t) = ∫₀ᵗ e^{−(t−τ)A}F(τ) dτ`. It is `T`-periodic exactly when
//! `(1 − e^{−TA})u₀ = f(T)`, which has the unique mean-zero solution
//! `u₀ = Σ_{k≥0} e^{−kTA} f(T)`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::field::{Field, SpectralField};
use crate::grid::Grid;
use crate::littlewood_paley::{BesovSpec, DyadicDecomposition};
use crate::multiplier::semigroup_spectral;
use crate::trajectory::Trajectory;
use crate::{Error, Result, C64};

/// Largest number of geometric-series terms before giving up.
pub const SERIES_CAP: u64 = 1_000_000;

/// Tail size at which the geometric series is cut.
pub const SERIES_TAIL: f64 = 1e-12;

/// `T`-periodic scalar time profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Temporal {
    Constant,
    /// `cos(2πt/T + phase)`.
    Cosine { phase: f64 },
    /// Values at the uniform times `iT/m`, `i < m`, linearly interpolated and
    /// wrapped periodically.
    Table(Vec<f64>),
}

impl Temporal {
    pub fn value(&self, t: f64, period: f64) -> f64 {
        match self {
            Temporal::Constant => 1.0,
            Temporal::Cosine { phase } => libm::cos(2.0 * PI * t / period + phase),
            Temporal::Table(values) => {
                let m = values.len();
                let x = t / period;
                let s = (x - libm::floor(x)) * m as f64;
                let i = (libm::floor(s) as usize).min(m - 1);
                let w = s - i as f64;
                values[i] * (1.0 - w) + values[(i + 1) % m] * w
            }
        }
    }

    /// `sup_t |g(t)|`.
    pub fn sup(&self) -> f64 {
        match self {
            Temporal::Constant | Temporal::Cosine { .. } => 1.0,
            Temporal::Table(values) => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// Separable forcing `F(t, x) = δ · g(t) · F₀(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicForcing {
    period: f64,
    spatial: Field,
    spatial_hat: SpectralField,
    temporal: Temporal,
    amplitude: f64,
}

impl PeriodicForcing {
    /// The mean of `spatial` is removed.
    pub fn new(period: f64, spatial: Field, temporal: Temporal, amplitude: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!("period {period} must be positive")));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!("amplitude {amplitude} must be nonnegative")));
        }
        if let Temporal::Table(values) = &temporal {
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("temporal table must be nonempty and finite".into()));
            }
        }
        let mut spatial = spatial;
        spatial.remove_mean();
        let spatial_hat = spatial.forward()?;
        Ok(Self {
            period,
            spatial,
            spatial_hat,
            temporal,
            amplitude,
        })
    }

    pub fn zero(grid: &Grid, period: f64) -> Result<Self> {
        Self::new(period, Field::zeros(grid), Temporal::Constant, 0.0)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn grid(&self) -> &Grid {
        self.spatial.grid()
    }

    pub fn spatial(&self) -> &Field {
        &self.spatial
    }

    pub fn spatial_spectral(&self) -> &SpectralField {
        &self.spatial_hat
    }

    pub fn temporal(&self) -> &Temporal {
        &self.temporal
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `δ·g(t)`.
    pub fn scalar(&self, t: f64) -> f64 {
        self.amplitude * self.temporal.value(t, self.period)
    }

    pub fn at(&self, t: f64) -> Field {
        self.spatial.scaled(self.scalar(t))
    }

    pub fn spectral_at(&self, t: f64) -> SpectralField {
        self.spatial_hat.scaled(self.scalar(t))
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.period, self.spatial.clone(), self.temporal.clone(), amplitude)
    }

    /// Same time profile with the spatial part replaced.
    pub fn with_spatial(&self, spatial: Field) -> Result<Self> {
        Self::new(self.period, spatial, self.temporal.clone(), self.amplitude)
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0 || self.temporal.sup() == 0.0 || self.spatial.max_abs() == 0.0
    }

    /// `sup_t ‖F(t)‖_{Ḃ⁰_{r,∞}}`.
    pub fn sup_besov_norm(&self, dec: &DyadicDecomposition, r: f64) -> Result<f64> {
        let spec = BesovSpec::new(0.0, r, f64::INFINITY)?;
        Ok(self.amplitude * self.temporal.sup() * dec.besov_norm(&self.spatial, &spec)?)
    }

    /// `sup_t ‖F(t)‖_{L²}`.
    pub fn sup_l2_norm(&self) -> f64 {
        self.amplitude * self.temporal.sup() * self.spatial.l2_norm()
    }
}

/// `(1 − e^{−T|k|^α})^{−1}` on nonzero modes, `0` at `k = 0`.
#[derive(Debug, Clone)]
pub struct ResolventMultiplier {
    grid: Grid,
    period: f64,
    alpha: f64,
    symbol: Vec<f64>,
}

impl ResolventMultiplier {
    pub fn new(grid: &Grid, period: f64, alpha: f64) -> Result<Self> {
        check(period, alpha)?;
        let symbol = grid
            .magnitudes()
            .iter()
            .enumerate()
            .map(|(idx, &r)| {
                if idx == 0 {
                    0.0
                } else {
                    1.0 / -libm::expm1(-period * libm::pow(r, alpha))
                }
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            period,
            alpha,
            symbol,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = f.coeffs().iter().zip(&self.symbol).map(|(c, s)| c * *s).collect();
        SpectralField::from_coeffs(&self.grid, coeffs)
    }
}

fn check(period: f64, alpha: f64) -> Result<()> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period {period} must be positive")));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::OrderOutOfRange(alpha));
    }
    Ok(())
}

/// `u` with `(1 − e^{−TA})u = f`; the mean of `f` is dropped.
pub fn resolvent_inverse(f: &Field, period: f64, alpha: f64) -> Result<Field> {
    Ok(resolvent_inverse_spectral(&f.forward()?, period, alpha)?.inverse())
}

pub fn resolvent_inverse_spectral(f: &SpectralField, period: f64, alpha: f64) -> Result<SpectralField> {
    ResolventMultiplier::new(f.grid(), period, alpha)?.apply(f)
}

/// `(1 − e^{−TA})u`.
pub fn resolvent_forward(u: &Field, period: f64, alpha: f64) -> Result<Field> {
    let s = u.forward()?;
    Ok(s.combine(1.0, &semigroup_spectral(&s, period, alpha)?, -1.0)?.inverse())
}

/// Smallest `K` with `e^{−T·K·k_min^α}` below [`SERIES_TAIL`].
pub fn series_terms(grid: &Grid, period: f64, alpha: f64) -> Result<u64> {
    check(period, alpha)?;
    let rate = period * libm::pow(grid.k_min(), alpha);
    let k = libm::ceil(-libm::log(SERIES_TAIL) / rate);
    if !(k <= SERIES_CAP as f64) {
        let terms = if k.is_finite() { k as u64 } else { u64::MAX };
        return Err(Error::SeriesTruncation { terms, cap: SERIES_CAP });
    }
    Ok((k as u64).max(1))
}

/// `Σ_{k=0}^{K} e^{−kTA} f`.
pub fn geometric_series(f: &Field, period: f64, alpha: f64, terms: u64) -> Result<Field> {
    check(period, alpha)?;
    if terms > SERIES_CAP {
        return Err(Error::SeriesTruncation { terms, cap: SERIES_CAP });
    }
    let s = f.forward()?;
    let grid = s.grid();
    let coeffs = s
        .coeffs()
        .iter()
        .zip(grid.magnitudes())
        .map(|(c, &r)| {
            if c.norm_sqr() == 0.0 {
                return *c;
            }
            let ratio = libm::exp(-period * libm::pow(r, alpha));
            let (mut acc, mut term) = (0.0, 1.0);
            for _ in 0..=terms {
                acc += term;
                term *= ratio;
            }
            c * acc
        })
        .collect();
    Ok(SpectralField::from_coeffs(grid, coeffs)?.inverse())
}

/// `∫_{t₀}^{t₁} e^{−(t₁−τ)λ} g(τ) dτ` with `steps` (even) panels: `g` is
/// interpolated quadratically on each panel pair, as in composite Simpson, and
/// integrated exactly against the exponential.
pub fn kernel_integral(lambda: f64, g: impl Fn(f64) -> f64, t0: f64, t1: f64, steps: usize) -> f64 {
    let h = (t1 - t0) / steps as f64;
    let [w0, w1, w2] = fitted_weights(lambda * h);
    let pair_decay = libm::exp(-2.0 * h * lambda);
    let mut acc = 0.0;
    for pair in 0..steps / 2 {
        let a = t0 + 2.0 * pair as f64 * h;
        let b = if 2 * pair + 2 == steps { t1 } else { a + 2.0 * h };
        acc = acc * pair_decay + w0 * g(a) + w1 * g(a + h) + w2 * g(b);
    }
    acc * h
}

/// Weights on `[0, 2]` for `∫₀² e^{−μ(2−x)} P(x) dx`, `P` the quadratic
/// interpolant at `0, 1, 2`.
fn fitted_weights(mu: f64) -> [f64; 3] {
    // J_m = ∫₀² e^{−μy} y^m dy
    let j = |m: i32| -> f64 {
        if mu <= 1.0 {
            let mut acc = 0.0;
            let mut term = 1.0;
            for k in 0..40 {
                acc += term * libm::pow(2.0, (m + k + 1) as f64) / (m + k + 1) as f64;
                term *= -mu / (k + 1) as f64;
            }
            acc
        } else {
            let e = libm::exp(-2.0 * mu);
            match m {
                0 => (1.0 - e) / mu,
                1 => (1.0 - e * (1.0 + 2.0 * mu)) / (mu * mu),
                _ => (2.0 - e * (2.0 + 4.0 * mu + 4.0 * mu * mu)) / (mu * mu * mu),
            }
        }
    };
    let (j0, j1, j2) = (j(0), j(1), j(2));
    [(j2 - j1) / 2.0, 2.0 * j1 - j2, (2.0 * j0 - 3.0 * j1 + j2) / 2.0]
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 4 || steps % 2 != 0 {
        return Err(Error::InvalidArgument(format!("quadrature steps {steps} must be even and at least 4")));
    }
    Ok(())
}

/// Duhamel term `f(t) = ∫₀ᵗ e^{−(t−τ)A}F(τ) dτ`, exact kernel per mode and
/// Simpson-type quadrature of the time profile (see [`kernel_integral`]).
pub fn duhamel_integral(forcing: &PeriodicForcing, t_end: f64, alpha: f64, steps: usize) -> Result<Field> {
    Ok(duhamel_spectral(forcing, t_end, alpha, steps)?.inverse())
}

pub fn duhamel_spectral(forcing: &PeriodicForcing, t_end: f64, alpha: f64, steps: usize) -> Result<SpectralField> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("duhamel end time {t_end} must be positive")));
    }
    check(forcing.period(), alpha)?;
    check_steps(steps)?;
    let grid = forcing.grid();
    let g = |t: f64| forcing.scalar(t);
    let coeffs = mode_map(forcing.spatial_spectral(), alpha, |lambda| {
        kernel_integral(lambda, g, 0.0, t_end, steps)
    });
    SpectralField::from_coeffs(grid, coeffs)
}

/// Multiplies every nonzero coefficient by `factor(|k|^α)`, memoised over
/// repeated magnitudes.
fn mode_map(s: &SpectralField, alpha: f64, factor: impl Fn(f64) -> f64) -> Vec<C64> {
    let mags = s.grid().magnitudes();
    let mut cache: Vec<(f64, f64)> = Vec::new();
    s.coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            if idx == 0 || c.norm_sqr() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let r = mags[idx];
            let value = match cache.iter().find(|(key, _)| *key == r) {
                Some(&(_, v)) => v,
                None => {
                    let v = factor(libm::pow(r, alpha));
                    cache.push((r, v));
                    v
                }
            };
            c * value
        })
        .collect()
}

/// Unique datum `u₀` making the linear solution `T`-periodic.
pub fn periodic_initial_datum(forcing: &PeriodicForcing, alpha: f64, steps: usize) -> Result<Field> {
    let f_t = duhamel_spectral(forcing, forcing.period(), alpha, steps)?;
    Ok(resolvent_inverse_spectral(&f_t, forcing.period(), alpha)?.inverse())
}

/// `u(t) = e^{−tA}u₀ + f(t)` at the given times.
///
/// Each interval between consecutive times gets `substeps` Simpson panels, so
/// the value at `T` agrees with [`duhamel_integral`] run with
/// `substeps · (times.len() − 1)` panels on a uniform time grid.
pub fn linear_trajectory(
    forcing: &PeriodicForcing,
    u0: &Field,
    alpha: f64,
    times: Vec<f64>,
    substeps: usize,
) -> Result<Trajectory> {
    check(forcing.period(), alpha)?;
    if substeps < 2 || substeps % 2 != 0 {
        return Err(Error::InvalidArgument(format!("substeps {substeps} must be even and positive")));
    }
    if *u0.grid() != *forcing.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = forcing.grid();
    let g = |t: f64| forcing.scalar(t);
    let spatial = forcing.spatial_spectral();
    let lambdas: Vec<f64> = grid.magnitudes().iter().map(|&r| libm::pow(r, alpha)).collect();
    let u0_hat = u0.forward()?;
    let mut duhamel = alloc::vec![C64::new(0.0, 0.0); grid.len()];
    let mut fields = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            let dt = t - prev;
            let mut cache: Vec<(f64, f64, f64)> = Vec::new();
            for (idx, d) in duhamel.iter_mut().enumerate().skip(1) {
                let c = spatial.coeffs()[idx];
                let lambda = lambdas[idx];
                let (decay, integral) = match cache.iter().find(|e| e.0 == lambda) {
                    Some(&(_, a, b)) => (a, b),
                    None => {
                        let a = libm::exp(-dt * lambda);
                        let b = if c.norm_sqr() == 0.0 {
                            0.0
                        } else {
                            kernel_integral(lambda, g, prev, t, substeps)
                        };
                        if c.norm_sqr() != 0.0 {
                            cache.push((lambda, a, b));
                        }
                        (a, b)
                    }
                };
                *d = *d * decay + c * integral;
            }
        }
        let free = semigroup_spectral(&u0_hat, t, alpha)?;
        let coeffs = free.coeffs().iter().zip(&duhamel).map(|(a, b)| a + b).collect();
        fields.push(SpectralField::from_coeffs(grid, coeffs)?.inverse());
        prev = t;
    }
    Trajectory::new(times, fields)
}

/// Empirical constant of the datum bound: returns `(‖u₀‖, T^{−1}‖f(T)‖_{Ḃ^{s−α}} + ‖f(T)‖_{Ḃ^s})`
/// with `u₀` the resolvent inverse of `f(T)`.
pub fn estimate_u0_bound(
    f_t: &Field,
    period: f64,
    alpha: f64,
    dec: &DyadicDecomposition,
    spec: &BesovSpec,
) -> Result<(f64, f64)> {
    let u0 = resolvent_inverse(f_t, period, alpha)?;
    let lhs = dec.besov_norm(&u0, spec)?;
    let rhs = dec.besov_norm(f_t, &spec.with_s(spec.s - alpha))? / period + dec.besov_norm(f_t, spec)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::multiplier::semigroup;

    fn mode(g: &Grid) -> Field {
        corpus::single_mode(g, 1, 0, 1.0, 0.0)
    }

    #[test]
    fn temporal_profiles_are_periodic() {
        let t = 0.7;
        let table = Temporal::Table(alloc::vec![0.0, 1.0, -2.0, 0.5]);
        for g in [Temporal::Constant, Temporal::Cosine { phase: 0.3 }, table.clone()] {
            for i in 0..50 {
                let s = i as f64 * 0.037;
                assert!((g.value(s + t, t) - g.value(s, t)).abs() < 1e-12);
            }
        }
        assert!((table.value(0.7 * 0.375, t) - (-0.5)).abs() < 1e-12);
        assert_eq!(table.sup(), 2.0);
    }

    #[test]
    fn forcing_validation() {
        let g = Grid::standard(16).unwrap();
        assert!(PeriodicForcing::new(0.0, mode(&g), Temporal::Constant, 1.0).is_err());
        assert!(PeriodicForcing::new(1.0, mode(&g), Temporal::Constant, -1.0).is_err());
        assert!(PeriodicForcing::new(1.0, mode(&g), Temporal::Table(Vec::new()), 1.0).is_err());
        let shifted = Field::from_values(&g, mode(&g).values().iter().map(|v| v + 3.0).collect()).unwrap();
        let f = PeriodicForcing::new(1.0, shifted, Temporal::Constant, 1.0).unwrap();
        assert!(f.spatial().mean().abs() < 1e-14);
    }

    #[test]
    fn resolvent_examples() {
        let g = Grid::standard(16).unwrap();
        let f = mode(&g);
        let u = resolvent_inverse(&f, core::f64::consts::LN_2, 1.0).unwrap();
        assert!(u.max_abs_diff(&f.scaled(2.0)).unwrap() < 1e-13);
        assert_eq!(resolvent_inverse(&Field::zeros(&g), 1.0, 0.8).unwrap().max_abs(), 0.0);
        let m = ResolventMultiplier::new(&g, 1.0, 0.8).unwrap();
        assert_eq!(m.symbol()[0], 0.0);
        assert!(m.symbol()[1..].iter().all(|s| *s >= 1.0 && s.is_finite()));
    }

    #[test]
    fn resolvent_identity_on_random_fields() {
        let g = Grid::standard(32).unwrap();
        for seed in 0..5 {
            let f = corpus::smooth_field(&g, 1.5, seed);
            let u = resolvent_inverse(&f, 0.7, 0.8).unwrap();
            let back = resolvent_forward(&u, 0.7, 0.8).unwrap();
            assert!(back.max_abs_diff(&f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn series_matches_closed_form() {
        let g = Grid::standard(32).unwrap();
        let f = corpus::smooth_field(&g, 1.0, 3);
        for (t, alpha) in [(1.0, 0.8), (0.25, 0.9), (3.0, 1.0)] {
            let k = series_terms(&g, t, alpha).unwrap();
            assert!(libm::exp(-t * k as f64) < 1e-12);
            let series = geometric_series(&f, t, alpha, k).unwrap();
            let closed = resolvent_inverse(&f, t, alpha).unwrap();
            assert!(series.max_abs_diff(&closed).unwrap() < 1e-11);
        }
    }

    #[test]
    fn series_cap() {
        let g = Grid::standard(8).unwrap();
        assert!(matches!(series_terms(&g, 1e-7, 1.0), Err(Error::SeriesTruncation { .. })));
    }

    #[test]
    fn fitted_weights_reduce_to_simpson() {
        let w = fitted_weights(0.0);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15 && (w[1] - 4.0 / 3.0).abs() < 1e-15 && (w[2] - 1.0 / 3.0).abs() < 1e-15);
        // both branches agree at the switch point
        let (a, b) = (fitted_weights(1.0), fitted_weights(1.0 + 1e-12));
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn duhamel_constant_mode() {
        let g = Grid::standard(16).unwrap();
        let forcing = PeriodicForcing::new(1.0, corpus::single_mode(&g, 1, 2, 1.0, 0.0), Temporal::Constant, 0.3).unwrap();
        let lambda = libm::pow(5f64.sqrt(), 0.8);
        let f = duhamel_integral(&forcing, 1.0, 0.8, 64).unwrap();
        let expected = forcing.spatial().scaled(0.3 * (1.0 - libm::exp(-lambda)) / lambda);
        assert!(f.max_abs_diff(&expected).unwrap() < 1e-10);
        let zero = PeriodicForcing::zero(&g, 1.0).unwrap();
        assert_eq!(duhamel_integral(&zero, 1.0, 0.8, 8).unwrap().max_abs(), 0.0);
        assert!(duhamel_integral(&forcing, 0.0, 0.8, 8).is_err());
        assert!(duhamel_integral(&forcing, 1.0, 0.8, 5).is_err());
    }

    #[test]
    fn duhamel_cosine_matches_scalar_ode() {
        let g = Grid::standard(16).unwrap();
        let period = 1.0;
        let forcing = PeriodicForcing::new(period, mode(&g), Temporal::Cosine { phase: 0.0 }, 1.0).unwrap();
        let lambda = 1.0;
        let omega = 2.0 * PI / period;
        // y' + λy = cos(ωt), y(0) = 0: y = Re[e^{iωt}/(λ+iω)] − Re[1/(λ+iω)]e^{−λt}
        let z = C64::new(1.0, 0.0) / C64::new(lambda, omega);
        let y = (z * C64::from_polar(1.0, omega * period)).re - z.re * libm::exp(-lambda * period);
        let f = duhamel_integral(&forcing, period, 1.0, 256).unwrap();
        assert!(f.max_abs_diff(&mode(&g).scaled(y)).unwrap() < 1e-8);
    }

    #[test]
    fn duhamel_converges_at_fourth_order() {
        let g = Grid::standard(16).unwrap();
        let forcing = PeriodicForcing::new(1.0, corpus::single_mode(&g, 2, 1, 1.0, 0.0), Temporal::Cosine { phase: 0.4 }, 1.0).unwrap();
        let exact = duhamel_integral(&forcing, 1.0, 0.8, 2048).unwrap();
        let err = |s| duhamel_integral(&forcing, 1.0, 0.8, s).unwrap().max_abs_diff(&exact).unwrap();
        let (e1, e2, e3) = (err(16), err(32), err(64));
        for ratio in [e1 / e2, e2 / e3] {
            assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
        }
    }

    #[test]
    fn steady_state_datum() {
        let g = Grid::standard(16).unwrap();
        let f0 = corpus::single_mode(&g, 0, 2, 1.0, 0.0);
        let forcing = PeriodicForcing::new(1.5, f0.clone(), Temporal::Constant, 0.2).unwrap();
        let u0 = periodic_initial_datum(&forcing, 0.8, 32).unwrap();
        let lambda = libm::pow(2.0, 0.8);
        assert!(u0.max_abs_diff(&f0.scaled(0.2 / lambda)).unwrap() < 1e-12);
        let zero = PeriodicForcing::zero(&g, 1.0).unwrap();
        assert_eq!(periodic_initial_datum(&zero, 0.8, 8).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn linear_trajectory_is_periodic() {
        let g = Grid::standard(32).unwrap();
        let spatial = corpus::smooth_field(&g, 2.0, 5);
        for temporal in [Temporal::Constant, Temporal::Cosine { phase: 0.7 }, Temporal::Table(alloc::vec![1.0, -0.5, 0.25])] {
            let forcing = PeriodicForcing::new(1.0, spatial.clone(), temporal, 1.0).unwrap();
            let steps = 50;
            let u0 = periodic_initial_datum(&forcing, 0.8, 4 * steps).unwrap();
            let traj = linear_trajectory(&forcing, &u0, 0.8, crate::trajectory::uniform_times(1.0, steps), 4).unwrap();
            let residual = traj.last().sub(traj.first()).unwrap().l2_norm() / u0.l2_norm();
            assert!(residual < 1e-12, "residual {residual}");
        }
    }

    #[test]
    fn uniqueness_drift() {
        let g = Grid::standard(16).unwrap();
        let forcing = PeriodicForcing::new(0.5, mode(&g), Temporal::Cosine { phase: 0.0 }, 1.0).unwrap();
        let u0 = periodic_initial_datum(&forcing, 0.8, 64).unwrap();
        let v0 = u0.add(&corpus::smooth_field(&g, 1.0, 9)).unwrap();
        let gap0 = u0.sub(&v0).unwrap().l2_norm();
        for periods in 1..4 {
            let t_end = 0.5 * periods as f64;
            let times = crate::trajectory::uniform_times(t_end, 16 * periods);
            let u = linear_trajectory(&forcing, &u0, 0.8, times.clone(), 4).unwrap();
            let v = linear_trajectory(&forcing, &v0, 0.8, times, 4).unwrap();
            let gap = u.last().sub(v.last()).unwrap().l2_norm();
            assert!(gap <= libm::exp(-t_end) * gap0 * (1.0 + 1e-12));
            let free = semigroup(&u0.sub(&v0).unwrap(), t_end, 0.8).unwrap().l2_norm();
            assert!((gap - free).abs() < 1e-12);
        }
    }

    #[test]
    fn u0_bound_single_mode() {
        let g = Grid::standard(16).unwrap();
        let dec = DyadicDecomposition::new(&g);
        let f = mode(&g);
        for s in [-0.5, 0.4, 1.3] {
            let spec = BesovSpec::new(s, 4.0, 2.0).unwrap();
            let (a, b) = estimate_u0_bound(&f, 0.8, 1.0, &dec, &spec).unwrap();
            let expected = (1.0 / (1.0 - libm::exp(-0.8))) / (1.0 / 0.8 + 1.0);
            assert!((a / b - expected).abs() < 1e-12);
        }
        let spec = BesovSpec::new(0.0, 2.0, 2.0).unwrap();
        assert_eq!(estimate_u0_bound(&Field::zeros(&g), 1.0, 0.8, &dec, &spec).unwrap(), (0.0, 0.0));
    }
}
