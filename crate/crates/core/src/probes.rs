//! Estimate-ratio probes for the harmonic-analysis estimates behind the
//! construction: semigroup decay and smoothing on dyadic blocks, positivity of
//! the `L^p` dissipation, the product, commutator and product–semigroup
//! bounds.
//!
//! Every probe returns the per-sample ratio `LHS / RHS`. The constants in the
//! estimates are not explicit, so a probe passes when its largest ratio stays
//! below a configured ceiling and no hard identity fails.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::field::{lp_norm, Field, SpectralField};
use crate::grid::Grid;
use crate::littlewood_paley::{BesovSpec, DyadicDecomposition, Exponent};
use crate::multiplier::{product, riesz_perp};
use crate::trajectory::Trajectory;
use crate::{Error, Result, C64};

/// Default ceilings: ten times the largest ratio seen on
/// `reference_corpus(n = 64, seed 0)` at `α = 0.8`, `p = 4`, `q = 2` with the
/// exponents used by `sqg verify`.
pub mod ceilings {
    pub const SEMIGROUP_DECAY: f64 = 10.0 * 1.0;
    pub const SMOOTHING: f64 = 10.0 * 0.37;
    pub const BILINEAR: f64 = 10.0 * 0.33;
    pub const COMMUTATOR: f64 = 10.0 * 0.19;
    pub const PRODUCT_SEMIGROUP: f64 = 10.0 * 0.044;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub name: String,
    pub samples: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub fitted: Vec<(String, f64)>,
    pub ceiling: f64,
    /// Violations of identities or sign conditions that hold exactly.
    pub hard_failures: usize,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl ProbeReport {
    fn new(name: &str, samples: usize, ratios: Vec<f64>, ceiling: f64) -> Self {
        let max_ratio = ratios.iter().fold(0.0, |m: f64, r| m.max(*r));
        Self {
            name: name.into(),
            samples,
            ratios,
            max_ratio,
            fitted: Vec::new(),
            ceiling,
            hard_failures: 0,
            passed: true,
            notes: Vec::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.max_ratio <= self.ceiling && self.hard_failures == 0 && self.ratios.iter().all(|r| r.is_finite());
        self
    }

    pub fn fitted(&self, key: &str) -> Option<f64> {
        self.fitted.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

#[cfg(feature = "parallel")]
fn map_samples<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_samples<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..count)
        .map(|i| libm::exp(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

fn spectral_lp(coeffs: Vec<C64>, grid: &Grid, p: f64) -> f64 {
    let f = SpectralField::from_coeffs(grid, coeffs).expect("grid-sized").inverse();
    lp_norm(f.values(), grid.cell_area(), p)
}

/// `‖e^{−tA}Δ_jf‖_p ≤ C e^{−c₀2^{αj}t}‖Δ_jf‖_p` with `c₀ = 2^{−α}/2`.
///
/// Ratios are the smallest admissible `C` per sample and block. The secant
/// decay rates between consecutive times, divided by `2^{αj}`, are fitted as
/// `rate_min` and `rate_max`; at `p = 2` they must lie in `[2^{−α}, 2^{α}]`.
pub fn probe_semigroup_decay(samples: &[Field], alpha: f64, p: f64, dec: &DyadicDecomposition, ceiling: f64) -> Result<ProbeReport> {
    check_alpha(alpha)?;
    let grid = dec.grid();
    let c0 = libm::exp2(-alpha) / 2.0;
    let scaled_times = log_space(1e-3, 8.0, 25);
    let per_sample = map_samples(samples, |f| -> Result<(Vec<f64>, f64, f64)> {
        let s = f.forward()?;
        let mut ratios = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for j in dec.j_range() {
            let block = dec.block_spectral(&s, j)?;
            let base = spectral_lp(block.coeffs().to_vec(), grid, p);
            if base <= 1e-13 * f.max_abs().max(f64::MIN_POSITIVE) {
                continue;
            }
            let scale = libm::exp2(alpha * j as f64);
            let mut worst: f64 = 0.0;
            let mut prev: Option<(f64, f64)> = None;
            for &tau in &scaled_times {
                let t = tau / scale;
                let coeffs = block
                    .coeffs()
                    .iter()
                    .zip(grid.magnitudes())
                    .map(|(c, &r)| c * libm::exp(-t * libm::pow(r, alpha)))
                    .collect();
                let r = spectral_lp(coeffs, grid, p) / base;
                worst = worst.max(r * libm::exp(c0 * tau));
                if let Some((t0, r0)) = prev {
                    if r > 1e-10 && r0 > 1e-10 {
                        let rate = libm::log(r0 / r) / (t - t0) / scale;
                        lo = lo.min(rate);
                        hi = hi.max(rate);
                    }
                }
                prev = Some((t, r));
            }
            ratios.push(worst);
        }
        Ok((ratios, lo, hi))
    });
    let mut ratios = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for r in per_sample {
        let (r, a, b) = r?;
        ratios.extend(r);
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let mut report = ProbeReport::new("semigroup_decay", samples.len(), ratios, ceiling);
    report.fitted.push(("c0".into(), c0));
    report.fitted.push(("rate_min".into(), lo));
    report.fitted.push(("rate_max".into(), hi));
    if p == 2.0 {
        let (a, b) = (libm::exp2(-alpha), libm::exp2(alpha));
        if lo < a * (1.0 - 1e-9) || hi > b * (1.0 + 1e-9) {
            report.hard_failures += 1;
        }
    }
    if p.is_infinite() {
        report.notes.push("p = ∞ evaluated as the grid maximum (approximate)".into());
    }
    report.notes.push("decay to zero follows from the rate bound on the torus".into());
    Ok(report.finish())
}

/// `‖e^{−tA}f‖_{Ḃ^{s₂}} ≤ C t^{−(s₂−s₁)/α}‖f‖_{Ḃ^{s₁}}` for `t ∈ [1e−3, 1]`.
///
/// Ratios are the smallest `C` per sample. The least-squares log-log slope of
/// the corpus envelope `sup_f ‖e^{−tA}f‖_{Ḃ^{s₂}}/‖f‖_{Ḃ^{s₁}}` must not fall
/// below `−(s₂−s₁)/α − 0.05`; a single sample decays exponentially once `t`
/// passes its own time scale, so only the envelope carries the power law.
pub fn probe_smoothing(
    samples: &[Field],
    alpha: f64,
    s1: f64,
    s2: f64,
    p: f64,
    q: f64,
    dec: &DyadicDecomposition,
    ceiling: f64,
) -> Result<ProbeReport> {
    check_alpha(alpha)?;
    if s1 > s2 {
        return Err(Error::Config(format!("s₁≤s₂ violated (s₁ = {s1}, s₂ = {s2})")));
    }
    let (spec1, spec2) = (BesovSpec::new(s1, p, q)?, BesovSpec::new(s2, p, q)?);
    let exponent = (s2 - s1) / alpha;
    let times = log_space(1e-3, 1.0, 13);
    let per_sample = map_samples(samples, |f| -> Result<Option<(f64, Vec<f64>)>> {
        let base = dec.besov_norm(f, &spec1)?;
        if base == 0.0 {
            return Ok(None);
        }
        let s = f.forward()?;
        let mut curve = Vec::with_capacity(times.len());
        let mut worst: f64 = 0.0;
        for &t in &times {
            let evolved = crate::multiplier::semigroup_spectral(&s, t, alpha)?.inverse();
            let ratio = dec.besov_norm(&evolved, &spec2)? / base;
            worst = worst.max(ratio * libm::pow(t, exponent));
            curve.push(ratio);
        }
        Ok(Some((worst, curve)))
    });
    let mut ratios = Vec::new();
    let mut envelope = alloc::vec![0.0f64; times.len()];
    for r in per_sample {
        if let Some((c, curve)) = r? {
            ratios.push(c);
            for (e, v) in envelope.iter_mut().zip(curve) {
                *e = e.max(v);
            }
        }
    }
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(&envelope)
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (libm::log(*t), libm::log(*e)))
        .collect();
    let slope_min = if points.len() >= 2 { least_squares_slope(&points) } else { 0.0 };
    let mut report = ProbeReport::new("smoothing", samples.len(), ratios, ceiling);
    report.fitted.push(("slope_min".into(), slope_min));
    report.fitted.push(("slope_bound".into(), -exponent - 0.05));
    if slope_min < -exponent - 0.05 {
        report.hard_failures += 1;
    }
    Ok(report.finish())
}

/// Slope of the least-squares line through `points`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Largest `max(|m₁|, |m₂|)` carrying weight in block `j`.
fn block_reach(dec: &DyadicDecomposition, j: i32) -> usize {
    let grid = dec.grid();
    let n = grid.n();
    let fold = |m: usize| if m <= n / 2 { m } else { n - m };
    dec.weights(j)
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(idx, _)| fold(idx % n).max(fold(idx / n)))
        .max()
        .unwrap_or(0)
}

/// `I_j = ∫|Δ_jf|^{p−2}Δ_jf·Λ^αΔ_jf dx` against `2^{αj}‖Δ_jf‖_p^p`.
///
/// Ratios are `λ_j = I_j / (2^{αj}‖Δ_jf‖_p^p)`. A negative `I_j` is a hard
/// failure on blocks where the rectangle rule is exact (`p·reach < n`); on the
/// other blocks it is only noted. At `p = 2`, `λ_j ∉ [2^{−α}, 2^{α}]` is a hard
/// failure as well.
pub fn probe_positivity(samples: &[Field], alpha: f64, p: f64, dec: &DyadicDecomposition) -> Result<ProbeReport> {
    check_alpha(alpha)?;
    if ![2.0, 4.0, 6.0].contains(&p) {
        return Err(Error::Config(format!("p∈{{2,4,6}} violated (p = {p})")));
    }
    let grid = dec.grid();
    let exact: Vec<bool> = dec.j_range().map(|j| (p as usize) * block_reach(dec, j) < grid.n()).collect();
    let lambdas: Vec<f64> = grid.magnitudes().iter().map(|&r| libm::pow(r, alpha)).collect();
    let per_sample = map_samples(samples, |f| -> Result<Vec<(i32, f64, f64)>> {
        let s = f.forward()?;
        let mut out = Vec::new();
        for j in dec.j_range() {
            let block = dec.block_spectral(&s, j)?;
            let g = block.inverse();
            let norm_p = lp_norm(g.values(), grid.cell_area(), p);
            if norm_p <= 1e-13 * f.max_abs().max(f64::MIN_POSITIVE) {
                continue;
            }
            let coeffs = block.coeffs().iter().zip(&lambdas).map(|(c, l)| c * *l).collect();
            let h = SpectralField::from_coeffs(grid, coeffs)?.inverse();
            let integral: f64 = g
                .values()
                .iter()
                .zip(h.values())
                .map(|(a, b)| libm::pow(a.abs(), p - 2.0) * a * b)
                .sum::<f64>()
                * grid.cell_area();
            let scale = libm::exp2(alpha * j as f64) * libm::pow(norm_p, p);
            out.push((j, integral, integral / scale));
        }
        Ok(out)
    });
    let mut ratios = Vec::new();
    let mut hard = 0;
    let mut soft = 0;
    let (lo_bound, hi_bound) = (libm::exp2(-alpha), libm::exp2(alpha));
    for r in per_sample {
        for (j, integral, lambda) in r? {
            ratios.push(lambda);
            let alias_free = exact[(j - dec.j_min()) as usize];
            if integral < 0.0 {
                if alias_free {
                    hard += 1;
                } else {
                    soft += 1;
                }
            }
            if p == 2.0 && !(lambda >= lo_bound * (1.0 - 1e-12) && lambda <= hi_bound * (1.0 + 1e-12)) {
                hard += 1;
            }
        }
    }
    let lambda_min = ratios.iter().fold(f64::INFINITY, |m: f64, r| m.min(*r));
    let mut report = ProbeReport::new("positivity", samples.len(), ratios, f64::INFINITY);
    report.fitted.push(("lambda_min".into(), lambda_min));
    report.fitted.push(("lambda_max".into(), report.max_ratio));
    report.hard_failures = hard;
    let aliased = exact.iter().filter(|e| !**e).count();
    report.notes.push(format!(
        "{aliased} of {} blocks exceed the exact-quadrature band for p = {p}; negative integrals there: {soft}",
        exact.len()
    ));
    Ok(report.finish())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange(alpha))
    }
}

fn check_product_exponents(s1: f64, s2: f64, p: f64) -> Result<()> {
    if !(p >= 2.0) {
        return Err(Error::Config(format!("p≥2 violated (p = {p})")));
    }
    if !(s1 + s2 > 0.0) {
        return Err(Error::Config(format!("s₁+s₂>0 violated (s₁ = {s1}, s₂ = {s2})")));
    }
    if !(s2 < 2.0 / p) {
        return Err(Error::Config(format!("s₂<2/p violated (s₂ = {s2})")));
    }
    Ok(())
}

/// `‖fg‖_{Ḃ^{s₁+s₂−2/p}} / (‖f‖_{Ḃ^{s₁}}‖g‖_{Ḃ^{s₂}})` over sample pairs.
pub fn probe_bilinear(
    pairs: &[(Field, Field)],
    s1: f64,
    s2: f64,
    p: f64,
    q: f64,
    dec: &DyadicDecomposition,
    ceiling: f64,
) -> Result<ProbeReport> {
    check_product_exponents(s1, s2, p)?;
    if !(s1 < 2.0 / p) {
        return Err(Error::Config(format!("s₁<2/p violated (s₁ = {s1})")));
    }
    let out_spec = BesovSpec::new(s1 + s2 - 2.0 / p, p, q)?;
    let (spec1, spec2) = (BesovSpec::new(s1, p, q)?, BesovSpec::new(s2, p, q)?);
    let per_pair = map_samples(pairs, |(f, g)| -> Result<Option<f64>> {
        let rhs = dec.besov_norm(f, &spec1)? * dec.besov_norm(g, &spec2)?;
        if rhs == 0.0 {
            return Ok(None);
        }
        Ok(Some(dec.besov_norm(&product(f, g)?, &out_spec)? / rhs))
    });
    let ratios = collect_ratios(per_pair)?;
    let skipped = pairs.len() - ratios.len();
    let mut report = ProbeReport::new("bilinear", pairs.len(), ratios, ceiling);
    if skipped > 0 {
        report.notes.push(format!("{skipped} pairs with a zero factor skipped"));
    }
    Ok(report.finish())
}

fn collect_ratios(items: Vec<Result<Option<f64>>>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for r in items {
        if let Some(v) = r? {
            out.push(v);
        }
    }
    Ok(out)
}

/// `‖{2^{(s₁+s₂−2/p)j}‖[u·∇, Δ_j]ψ‖_p}‖_{l^q}` with `u = R^⊥f`, against
/// `‖f‖_{Ḃ^{s₁}}‖ψ‖_{Ḃ^{s₂+1}}`.
pub fn commutator_lhs(f: &Field, psi: &Field, s1: f64, s2: f64, p: f64, q: f64, dec: &DyadicDecomposition) -> Result<f64> {
    let (u1, u2) = riesz_perp(f)?;
    let q = Exponent::new(q)?;
    let mut terms = Vec::with_capacity(dec.block_count());
    for j in dec.j_range() {
        let c = dec.commutator_block((&u1, &u2), j, psi)?;
        terms.push(libm::exp2((s1 + s2 - 2.0 / p) * j as f64) * c.lp_norm(p));
    }
    Ok(q.sum(terms.into_iter()))
}

pub fn probe_commutator(
    pairs: &[(Field, Field)],
    s1: f64,
    s2: f64,
    p: f64,
    q: f64,
    dec: &DyadicDecomposition,
    ceiling: f64,
) -> Result<ProbeReport> {
    check_product_exponents(s1, s2, p)?;
    if !(s1 > 0.0 && s1 < 1.0 + 2.0 / p) {
        return Err(Error::Config(format!("0<s₁<1+2/p violated (s₁ = {s1})")));
    }
    let (spec1, spec2) = (BesovSpec::new(s1, p, q)?, BesovSpec::new(s2 + 1.0, p, q)?);
    let per_pair = map_samples(pairs, |(f, psi)| -> Result<Option<f64>> {
        let rhs = dec.besov_norm(f, &spec1)? * dec.besov_norm(psi, &spec2)?;
        if rhs == 0.0 {
            return Ok(None);
        }
        Ok(Some(commutator_lhs(f, psi, s1, s2, p, q, dec)? / rhs))
    });
    let ratios = collect_ratios(per_pair)?;
    let mut report = ProbeReport::new("commutator", pairs.len(), ratios, ceiling);
    report
        .notes
        .push("velocity u = R^⊥f; the derivative on ψ is carried by the Ḃ^{s₂+1} norm".into());
    Ok(report.finish())
}

/// Parameters of the product–semigroup estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductSemigroupParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s1: f64,
    pub s2: f64,
    pub p: f64,
    pub q: f64,
}

impl ProductSemigroupParams {
    pub fn validate(&self) -> Result<()> {
        let Self { lambda, alpha, beta, s1, s2, p, .. } = *self;
        check_alpha(alpha)?;
        check_product_exponents(s1, s2, p)?;
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("λ>0 violated (λ = {lambda})")));
        }
        if !(beta <= alpha) {
            return Err(Error::Config(format!("β≤α violated (β = {beta})")));
        }
        if !(2.0 / p < s1 && s1 < 2.0 / p + alpha) {
            return Err(Error::Config(format!("2/p<s₁<2/p+α violated (s₁ = {s1})")));
        }
        Ok(())
    }

    /// `T^{1−β/α−(s₁−2/p)/α}`.
    pub fn prefactor(&self, period: f64) -> f64 {
        libm::pow(period, 1.0 - self.beta / self.alpha - (self.s1 - 2.0 / self.p) / self.alpha)
    }
}

/// Left side: `‖{∫₀ᵀ 2^{βj}e^{−λ2^{αj}(T−τ)}2^{(s₁+s₂−2/p)j}‖Δ_j(f(τ)e^{−τA}g)‖_p dτ}‖_{l^q}`
/// with `τ` running over the samples of `f` (Simpson on uniform samples with an
/// even number of intervals, trapezoid otherwise).
pub fn product_semigroup_lhs(f: &Trajectory, g: &Field, params: &ProductSemigroupParams, dec: &DyadicDecomposition) -> Result<f64> {
    params.validate()?;
    let times = f.times();
    let period = f.period();
    let weights = quadrature_weights(times);
    let sg = g.forward()?;
    let norms = map_samples(&(0..times.len()).collect::<Vec<_>>(), |&i| -> Result<Vec<f64>> {
        let evolved = crate::multiplier::semigroup_spectral(&sg, times[i], params.alpha)?.inverse();
        let prod = product(&f.fields()[i], &evolved)?;
        dec.block_norms(&prod, Exponent::new(params.p)?)
    });
    let mut per_block = alloc::vec![0.0; dec.block_count()];
    for (i, row) in norms.into_iter().enumerate() {
        let row = row?;
        for (b, (acc, v)) in per_block.iter_mut().zip(row).enumerate() {
            let j = dec.j_min() + b as i32;
            let scale = libm::exp2(params.alpha * j as f64);
            *acc += weights[i] * libm::exp(-params.lambda * scale * (period - times[i])) * v;
        }
    }
    let q = Exponent::new(params.q)?;
    Ok(q.sum(per_block.iter().enumerate().map(|(b, v)| {
        let j = (dec.j_min() + b as i32) as f64;
        libm::exp2(params.beta * j) * libm::exp2((params.s1 + params.s2 - 2.0 / params.p) * j) * v
    })))
}

/// Right side without the constant:
/// `T^{…}{‖f‖_{L^∞L^p} + (1 + T^{(s₁−2/p)/α})‖f‖_{L̃^∞Ḃ^{s₁}}}‖g‖_{Ḃ^{s₂}}`.
pub fn product_semigroup_rhs(f: &Trajectory, g: &Field, params: &ProductSemigroupParams, dec: &DyadicDecomposition) -> Result<f64> {
    params.validate()?;
    let period = f.period();
    let sup_lp = f.fields().iter().fold(0.0f64, |m, x| m.max(x.lp_norm(params.p)));
    let spec1 = BesovSpec::new(params.s1, params.p, params.q)?;
    let spec2 = BesovSpec::new(params.s2, params.p, params.q)?;
    let f_norm = dec.spacetime_besov_norm(f, &spec1)?;
    let inner = sup_lp + (1.0 + libm::pow(period, (params.s1 - 2.0 / params.p) / params.alpha)) * f_norm;
    Ok(params.prefactor(period) * inner * dec.besov_norm(g, &spec2)?)
}

fn quadrature_weights(times: &[f64]) -> Vec<f64> {
    let m = times.len() - 1;
    if m == 0 {
        return alloc::vec![0.0];
    }
    let h = times[1] - times[0];
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    let mut w = alloc::vec![0.0; times.len()];
    if uniform && m % 2 == 0 {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = h / 3.0
                * if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
        }
    } else {
        for i in 0..m {
            let d = (times[i + 1] - times[i]) / 2.0;
            w[i] += d;
            w[i + 1] += d;
        }
    }
    w
}

pub fn probe_product_semigroup(
    f: &Trajectory,
    gs: &[Field],
    params: &ProductSemigroupParams,
    dec: &DyadicDecomposition,
    ceiling: f64,
) -> Result<ProbeReport> {
    params.validate()?;
    let mut ratios = Vec::new();
    for g in gs {
        let rhs = product_semigroup_rhs(f, g, params, dec)?;
        if rhs == 0.0 {
            continue;
        }
        ratios.push(product_semigroup_lhs(f, g, params, dec)? / rhs);
    }
    let mut report = ProbeReport::new("product_semigroup", gs.len(), ratios, ceiling);
    report.fitted.push(("prefactor".into(), params.prefactor(f.period())));
    Ok(report.finish())
}

/// Probe corpus: one random field per resolved block, plus smooth fields with
/// spectra `|k|^{−γ}`, `γ ∈ {1, 2, 3}`, two seeds each.
pub fn reference_corpus(dec: &DyadicDecomposition, seed: u64) -> Vec<Field> {
    let mut out = Vec::new();
    for (i, j) in dec.j_range().enumerate() {
        let f = crate::corpus::block_field(dec, j, seed.wrapping_add(i as u64));
        if f.max_abs() > 0.0 {
            out.push(f);
        }
    }
    for (i, gamma) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        for k in 0..2u64 {
            out.push(crate::corpus::smooth_field(dec.grid(), gamma, seed.wrapping_add(100 + 10 * i as u64 + k)));
        }
    }
    out
}

/// Consecutive pairs of the corpus.
pub fn corpus_pairs(samples: &[Field]) -> Vec<(Field, Field)> {
    samples
        .windows(2)
        .map(|w| (w[0].clone(), w[1].clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn setup(n: usize) -> (Grid, DyadicDecomposition) {
        let g = Grid::standard(n).unwrap();
        let d = DyadicDecomposition::new(&g);
        (g, d)
    }

    #[test]
    fn exact_rate_for_single_mode() {
        let (g, d) = setup(32);
        let f = corpus::single_mode(&g, 4, 0, 1.0, 0.0);
        let r = probe_semigroup_decay(&[f], 0.8, 2.0, &d, f64::INFINITY).unwrap();
        // |k| = 4 fills block 2 alone, where the rate is 4^α / 2^{2α} = 1
        assert!((r.fitted("rate_min").unwrap() - 1.0).abs() < 1e-9);
        assert!((r.fitted("rate_max").unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(r.ratios.len(), 1);
    }

    #[test]
    fn decay_rates_within_support() {
        let (_, d) = setup(64);
        let samples = reference_corpus(&d, 1);
        let r = probe_semigroup_decay(&samples, 0.8, 2.0, &d, 10.0).unwrap();
        assert_eq!(r.hard_failures, 0);
        assert!(r.max_ratio <= 1.0 + 1e-12);
        assert!(r.passed);
        let r4 = probe_semigroup_decay(&samples, 0.8, 4.0, &d, 10.0).unwrap();
        assert!(r4.passed, "{r4:?}");
    }

    #[test]
    fn smoothing_slope() {
        let (_, d) = setup(64);
        let samples = reference_corpus(&d, 2);
        let r = probe_smoothing(&samples, 0.8, 0.0, 0.8, 4.0, 2.0, &d, 10.0).unwrap();
        assert_eq!(r.hard_failures, 0, "{r:?}");
        assert!(probe_smoothing(&samples, 0.8, 1.0, 0.5, 4.0, 2.0, &d, 10.0).is_err());
    }

    #[test]
    fn positivity_examples() {
        let (g, d) = setup(64);
        let f = corpus::single_mode(&g, 3, 0, 1.0, 0.0);
        let r = probe_positivity(core::slice::from_ref(&f), 0.8, 2.0, &d).unwrap();
        // I = |k|^α‖Δ_jf‖² on every block containing the mode
        for (j, lambda) in d.j_range().filter(|&j| d.weights(j)[g.index_of(3, 0)] > 0.0).zip(&r.ratios) {
            assert!((lambda * libm::exp2(0.8 * j as f64) - libm::pow(3.0, 0.8)).abs() < 1e-10);
        }
        let samples: Vec<Field> = (0..100).map(|s| corpus::block_field(&d, (s % 4) as i32, s)).collect();
        let r4 = probe_positivity(&samples, 0.8, 4.0, &d).unwrap();
        assert_eq!(r4.hard_failures, 0);
        assert!(r4.ratios.iter().all(|l| *l > 0.0));
        assert!(probe_positivity(&samples, 0.8, 3.0, &d).is_err());
    }

    #[test]
    fn bilinear_single_modes() {
        let (g, d) = setup(32);
        let f = corpus::single_mode(&g, 1, 0, 1.0, 0.0);
        let h = corpus::single_mode(&g, 0, 1, 1.0, 0.0);
        let r = probe_bilinear(&[(f.clone(), h.clone())], 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        // sin x₁ sin x₂ = ½(cos(x₁−x₂) − cos(x₁+x₂)): |k| = √2, blocks 0 and 1
        let direct = Field::from_fn(&g, |x, y| libm::sin(x) * libm::sin(y));
        let spec = BesovSpec::new(0.0, 4.0, 2.0).unwrap();
        let expected = d.besov_norm(&direct, &spec).unwrap()
            / (d.besov_norm(&f, &BesovSpec::new(0.25, 4.0, 2.0).unwrap()).unwrap()
                * d.besov_norm(&h, &BesovSpec::new(0.25, 4.0, 2.0).unwrap()).unwrap());
        assert!((r.ratios[0] - expected).abs() < 1e-12);
        // sin at |k| = 1 lies in block 0 only, so its norm is the L⁴ quadrature value
        let l4 = libm::pow(4.0 * core::f64::consts::PI * core::f64::consts::PI * 3.0 / 8.0, 0.25);
        assert!((d.besov_norm(&f, &BesovSpec::new(0.25, 4.0, 2.0).unwrap()).unwrap() - l4).abs() < 1e-12);
        let zero = probe_bilinear(&[(Field::zeros(&g), h)], 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        assert!(zero.ratios.is_empty());
        assert!(probe_bilinear(&[], -0.5, 0.25, 4.0, 2.0, &d, 10.0).is_err());
    }

    #[test]
    fn bilinear_stable_under_refinement() {
        let ratio = |n: usize| {
            let (g, d) = setup(n);
            let f = Field::from_fn(&g, |x, y| libm::sin(x) + 0.5 * libm::cos(2.0 * x + y));
            let h = Field::from_fn(&g, |x, y| libm::cos(y) - 0.3 * libm::sin(x - 3.0 * y));
            probe_bilinear(&[(f, h)], 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap().ratios[0]
        };
        let (a, b) = (ratio(32), ratio(64));
        assert!((a / b - 1.0).abs() < 0.2);
    }

    #[test]
    fn commutator_examples() {
        let (g, d) = setup(64);
        let f = corpus::smooth_field(&g, 2.0, 3);
        let zero = Field::zeros(&g);
        assert_eq!(commutator_lhs(&f, &zero, 0.5, 0.25, 4.0, 2.0, &d).unwrap(), 0.0);
        // linear in ψ
        let (a, b) = (corpus::smooth_field(&g, 2.0, 5), corpus::smooth_field(&g, 2.0, 6));
        let (u1, u2) = riesz_perp(&f).unwrap();
        let lhs = d.commutator_block((&u1, &u2), 2, &a.combine(2.0, &b, -3.0).unwrap()).unwrap();
        let rhs = d
            .commutator_block((&u1, &u2), 2, &a)
            .unwrap()
            .combine(2.0, &d.commutator_block((&u1, &u2), 2, &b).unwrap(), -3.0)
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        // a slow velocity acting on a fast ψ: the commutator gains a derivative
        let slow = corpus::single_mode(&g, 1, 0, 1.0, 0.0);
        let fast = corpus::single_mode(&g, 0, 16, 1.0, 0.3);
        let (s1, s2) = riesz_perp(&slow).unwrap();
        let mut comm = 0.0f64;
        let mut prod = 0.0f64;
        let transport = crate::dynamics::nonlinear_term(&fast, (&s1, &s2)).unwrap();
        for j in d.j_range() {
            comm = comm.max(d.commutator_block((&s1, &s2), j, &fast).unwrap().lp_norm(4.0));
            prod = prod.max(d.lp_block(&transport, j).unwrap().lp_norm(4.0));
        }
        assert!(prod >= 4.0 * comm, "{prod} vs {comm}");
    }

    #[test]
    fn probe_homogeneity() {
        let (_, d) = setup(32);
        let samples = reference_corpus(&d, 4);
        let pairs = corpus_pairs(&samples);
        let scaled: Vec<(Field, Field)> = pairs.iter().map(|(a, b)| (a.scaled(3.0), b.scaled(0.5))).collect();
        let a = probe_bilinear(&pairs, 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        let b = probe_bilinear(&scaled, 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            assert!((x - y).abs() < 1e-12 * x);
        }
        let a = probe_commutator(&pairs, 0.5, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        let b = probe_commutator(&scaled, 0.5, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            assert!((x - y).abs() < 1e-12 * x);
        }
        let scaled_samples: Vec<Field> = samples.iter().map(|s| s.scaled(7.0)).collect();
        let a = probe_positivity(&samples, 0.8, 4.0, &d).unwrap();
        let b = probe_positivity(&scaled_samples, 0.8, 4.0, &d).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }

    fn scalar_case(period: f64, params: &ProductSemigroupParams) -> (f64, f64) {
        let (g, d) = setup(32);
        let f0 = corpus::single_mode(&g, 1, 0, 1.0, 0.0);
        let gfield = corpus::single_mode(&g, 0, 8, 1.0, 0.0);
        let f = Trajectory::constant(f0.clone(), crate::trajectory::uniform_times(period, 256)).unwrap();
        let lhs = product_semigroup_lhs(&f, &gfield, params, &d).unwrap();
        // f·e^{−τA}g = e^{−τμ} f·g with μ = 8^α
        let mu = libm::pow(8.0, params.alpha);
        let fg = product(&f0, &gfield).unwrap();
        let blocks = d.block_norms(&fg, Exponent::new(params.p).unwrap()).unwrap();
        let q = Exponent::new(params.q).unwrap();
        let oracle = q.sum(d.j_range().zip(blocks).map(|(j, b)| {
            let rate = params.lambda * libm::exp2(params.alpha * j as f64);
            let gap = (rate - mu) * period;
            let integral = if gap.abs() < 1e-12 {
                period * libm::exp(-mu * period)
            } else {
                libm::exp(-mu * period) * -libm::expm1(-gap) / (rate - mu)
            };
            libm::exp2((params.beta + params.s1 + params.s2 - 2.0 / params.p) * j as f64) * b * integral
        }));
        (lhs, oracle)
    }

    #[test]
    fn product_semigroup_scalar_oracle() {
        let params = ProductSemigroupParams {
            lambda: 1.0,
            alpha: 0.8,
            beta: 0.0,
            s1: 0.55,
            s2: 0.25,
            p: 4.0,
            q: 2.0,
        };
        let (lhs, oracle) = scalar_case(1.0, &params);
        assert!((lhs - oracle).abs() < 1e-8 * oracle, "{lhs} {oracle}");
        let (g, d) = setup(32);
        let f = Trajectory::zeros(&g, 1.0, 5).unwrap();
        assert_eq!(product_semigroup_lhs(&f, &Field::zeros(&g), &params, &d).unwrap(), 0.0);
        let bad = ProductSemigroupParams { s1: 0.2, ..params };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn product_semigroup_t_sweep() {
        let params = ProductSemigroupParams {
            lambda: 1.0,
            alpha: 0.8,
            beta: 0.0,
            s1: 0.55,
            s2: 0.25,
            p: 4.0,
            q: 2.0,
        };
        let (a, _) = scalar_case(0.02, &params);
        let (b, _) = scalar_case(0.01, &params);
        let predicted = params.prefactor(0.02) / params.prefactor(0.01);
        assert!(((a / b) / predicted - 1.0).abs() < 0.3, "{} vs {predicted}", a / b);
    }

    #[test]
    #[ignore]
    fn calibrate_ceilings() {
        extern crate std;
        let (_, d) = setup(64);
        let samples = reference_corpus(&d, 0);
        let pairs = corpus_pairs(&samples);
        let inf = f64::INFINITY;
        let decay = probe_semigroup_decay(&samples, 0.8, 4.0, &d, inf).unwrap();
        let smooth = probe_smoothing(&samples, 0.8, 0.0, 0.8, 4.0, 2.0, &d, inf).unwrap();
        let bil = probe_bilinear(&pairs, 0.25, 0.25, 4.0, 2.0, &d, inf).unwrap();
        let com = probe_commutator(&pairs, 0.5, 0.25, 4.0, 2.0, &d, inf).unwrap();
        let params = ProductSemigroupParams { lambda: 1.0, alpha: 0.8, beta: 0.0, s1: 0.55, s2: 0.25, p: 4.0, q: 2.0 };
        let f = Trajectory::constant(samples[samples.len() - 1].clone(), crate::trajectory::uniform_times(1.0, 64)).unwrap();
        let ps = probe_product_semigroup(&f, &samples, &params, &d, inf).unwrap();
        for r in [decay, smooth, bil, com, ps] {
            std::println!("{} {} {:?}", r.name, r.max_ratio, r.fitted);
        }
    }

    #[test]
    fn quadrature_weights_sum_to_length() {
        let w = quadrature_weights(&crate::trajectory::uniform_times(2.0, 8));
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let w = quadrature_weights(&[0.0, 0.5, 0.7, 2.0]);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
