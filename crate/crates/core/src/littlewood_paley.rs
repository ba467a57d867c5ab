//! Homogeneous Littlewood–Paley decomposition on the torus.
//!
//! The radial profile is `φ̂₀(r) = χ(r) − χ(2r)` with the smooth cutoff
//! `χ(r) = h(2−r) / (h(2−r) + h(r−1))`, `h(x) = e^{−1/x}` for `x > 0`. Then
//! `supp φ̂₀ ⊂ [1/2, 2]`, `φ̂₀(1) = 1`, and the blocks
//! `φ̂_j(k) = φ̂₀(2^{−j}|k|)` telescope to one on every nonzero mode. Only the
//! indices `j_min ..= j_max` can meet the lattice; every other block is
//! identically zero.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::field::{forward_real, inverse_pair, lp_norm, Field, SpectralField};
use crate::grid::Grid;
use crate::multiplier::{dealias_in_place, gradient_spectral};
use crate::trajectory::Trajectory;
use crate::{Error, Result, C64};

fn h(x: f64) -> f64 {
    if x > 0.0 {
        libm::exp(-1.0 / x)
    } else {
        0.0
    }
}

/// Smooth cutoff: `1` on `[0, 1]`, `0` on `[2, ∞)`.
pub fn cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = h(2.0 - r);
        a / (a + h(r - 1.0))
    }
}

/// Annulus profile `φ̂₀(r) = χ(r) − χ(2r)`.
pub fn bump(r: f64) -> f64 {
    cutoff(r) - cutoff(2.0 * r)
}

/// Integrability or summability exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_infinite() && value > 0.0 {
            Ok(Exponent::Infinite)
        } else if value >= 1.0 {
            Ok(Exponent::Finite(value))
        } else {
            Err(Error::InvalidArgument(alloc::format!("exponent {value} below 1")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `‖x‖_{l^q}` of a finite sequence.
    pub fn sum(self, items: impl Iterator<Item = f64>) -> f64 {
        match self {
            Exponent::Infinite => items.fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(1.0) => items.map(f64::abs).sum(),
            Exponent::Finite(2.0) => libm::sqrt(items.map(|v| v * v).sum()),
            Exponent::Finite(q) => libm::pow(items.map(|v| libm::pow(v.abs(), q)).sum::<f64>(), 1.0 / q),
        }
    }
}

/// Selects `‖·‖_{Ḃ^s_{p,q}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
}

impl BesovSpec {
    /// `p` and `q` may be `f64::INFINITY`.
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("regularity {s} not finite")));
        }
        Ok(Self {
            s,
            p: Exponent::new(p)?,
            q: Exponent::new(q)?,
        })
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    /// `‖{2^{js} b_j}‖_{l^q}` for block norms `b_j` starting at `j_min`.
    pub fn combine(&self, j_min: i32, blocks: &[f64]) -> f64 {
        self.q.sum(
            blocks
                .iter()
                .enumerate()
                .map(|(i, b)| libm::exp2(self.s * (j_min + i as i32) as f64) * b),
        )
    }
}

/// Dyadic annulus weights tabulated on one grid.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    weights: Vec<Vec<f64>>,
}

impl DyadicDecomposition {
    pub fn new(grid: &Grid) -> Self {
        let j_min = libm::floor(libm::log2(grid.k_min())) as i32 - 1;
        let j_max = libm::ceil(libm::log2(grid.k_max())) as i32 + 1;
        let weights = (j_min..=j_max)
            .map(|j| {
                let scale = libm::exp2(-j as f64);
                grid.magnitudes()
                    .iter()
                    .enumerate()
                    .map(|(idx, &r)| if idx == 0 { 0.0 } else { bump(scale * r) })
                    .collect()
            })
            .collect();
        Self {
            grid: grid.clone(),
            j_min,
            j_max,
            weights,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn block_count(&self) -> usize {
        self.weights.len()
    }

    /// `φ̂_j` on the lattice. Panics outside the resolved range.
    pub fn weights(&self, j: i32) -> &[f64] {
        &self.weights[(j - self.j_min) as usize]
    }

    fn check(&self, j: i32) -> Result<()> {
        if self.j_range().contains(&j) {
            Ok(())
        } else {
            Err(Error::BlockOutOfRange {
                j,
                min: self.j_min,
                max: self.j_max,
            })
        }
    }

    fn ensure_grid(&self, g: &Grid) -> Result<()> {
        if *g == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Symbol of `S_l = Σ_{k ≤ l−3} Δ_k`, indices clipped to the range.
    pub fn low_pass_symbol(&self, l: i32) -> Vec<f64> {
        let mut symbol = vec![0.0; self.grid.len()];
        for k in self.j_min..=(l - 3).min(self.j_max) {
            for (s, w) in symbol.iter_mut().zip(self.weights(k)) {
                *s += w;
            }
        }
        symbol
    }

    /// Sum of the blocks `lo..=hi`, clipped to the range.
    fn band_symbol(&self, lo: i32, hi: i32) -> Vec<f64> {
        let mut symbol = vec![0.0; self.grid.len()];
        for k in lo.max(self.j_min)..=hi.min(self.j_max) {
            for (s, w) in symbol.iter_mut().zip(self.weights(k)) {
                *s += w;
            }
        }
        symbol
    }

    pub fn block_spectral(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(j)?;
        self.ensure_grid(f.grid())?;
        SpectralField::from_coeffs(&self.grid, weighted(f.coeffs(), self.weights(j)))
    }

    /// `Δ_j f`.
    pub fn lp_block(&self, f: &Field, j: i32) -> Result<Field> {
        Ok(self.block_spectral(&f.forward()?, j)?.inverse())
    }

    /// `S_l f`.
    pub fn low_pass(&self, f: &Field, l: i32) -> Result<Field> {
        self.ensure_grid(f.grid())?;
        Ok(self.low_pass_spectral(&f.forward()?, l).inverse())
    }

    pub fn low_pass_spectral(&self, f: &SpectralField, l: i32) -> SpectralField {
        let coeffs = weighted(f.coeffs(), &self.low_pass_symbol(l));
        SpectralField::from_coeffs(&self.grid, coeffs).expect("grid-sized")
    }

    /// `‖Δ_j f‖_{L^p}` for every `j` in the range, two blocks per FFT.
    pub fn block_norms(&self, f: &Field, p: Exponent) -> Result<Vec<f64>> {
        self.ensure_grid(f.grid())?;
        Ok(self.block_norms_spectral(f.forward()?.coeffs(), p))
    }

    pub(crate) fn block_norms_spectral(&self, coeffs: &[C64], p: Exponent) -> Vec<f64> {
        let area = self.grid.cell_area();
        let mut norms = Vec::with_capacity(self.block_count());
        let mut j = self.j_min;
        while j <= self.j_max {
            let a = weighted(coeffs, self.weights(j));
            if j < self.j_max {
                let b = weighted(coeffs, self.weights(j + 1));
                let (ra, rb) = inverse_pair(&a, &b, &self.grid);
                norms.push(lp_norm(&ra, area, p.value()));
                norms.push(lp_norm(&rb, area, p.value()));
                j += 2;
            } else {
                let (ra, _) = inverse_pair(&a, &vec![C64::new(0.0, 0.0); a.len()], &self.grid);
                norms.push(lp_norm(&ra, area, p.value()));
                j += 1;
            }
        }
        norms
    }

    /// `‖{2^{js}‖Δ_j f‖_{L^p}}‖_{l^q}`.
    pub fn besov_norm(&self, f: &Field, spec: &BesovSpec) -> Result<f64> {
        Ok(spec.combine(self.j_min, &self.block_norms(f, spec.p)?))
    }

    /// Inhomogeneous norm realized as `‖f‖_{Ḃ^s_{p,q}} + ‖f‖_{L^p}`.
    pub fn inhomogeneous_besov_norm(&self, f: &Field, spec: &BesovSpec) -> Result<f64> {
        Ok(self.besov_norm(f, spec)? + f.lp_norm(spec.p.value()))
    }

    /// Rows `(j, 2^{js}‖Δ_j f‖_{L^p})`.
    pub fn besov_spectrum(&self, f: &Field, spec: &BesovSpec) -> Result<Vec<(i32, f64)>> {
        let blocks = self.block_norms(f, spec.p)?;
        Ok(self
            .j_range()
            .zip(blocks)
            .map(|(j, b)| (j, libm::exp2(spec.s * j as f64) * b))
            .collect())
    }

    /// `max_t ‖Δ_j f(t)‖_{L^p}` for every `j`.
    pub fn block_sup_norms(&self, traj: &Trajectory, p: Exponent) -> Result<Vec<f64>> {
        self.ensure_grid(traj.grid())?;
        let mut sup = vec![0.0; self.block_count()];
        for field in traj.fields() {
            let norms = self.block_norms_spectral(field.forward()?.coeffs(), p);
            for (s, v) in sup.iter_mut().zip(norms) {
                *s = f64::max(*s, v);
            }
        }
        Ok(sup)
    }

    /// `‖{2^{js} max_t ‖Δ_j f(t)‖_{L^p}}‖_{l^q}` (time sup inside the sum).
    pub fn spacetime_besov_norm(&self, traj: &Trajectory, spec: &BesovSpec) -> Result<f64> {
        if traj.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        Ok(spec.combine(self.j_min, &self.block_sup_norms(traj, spec.p)?))
    }

    /// Bony paraproduct `T_f g = Σ_l S_l f Δ_l g`, dealiased.
    pub fn paraproduct(&self, f: &Field, g: &Field) -> Result<Field> {
        f.ensure_same_grid(g)?;
        self.ensure_grid(f.grid())?;
        let (sf, sg) = (f.forward()?, g.forward()?);
        let mut acc = vec![0.0; self.grid.len()];
        for l in self.j_range() {
            let low = weighted(sf.coeffs(), &self.low_pass_symbol(l));
            let block = weighted(sg.coeffs(), self.weights(l));
            accumulate_product(&mut acc, &low, &block, &self.grid);
        }
        Ok(dealiased(&acc, &self.grid))
    }

    /// Bony remainder `R(f, g) = Σ_l Σ_{|k−l|≤2} Δ_k f Δ_l g`, dealiased.
    pub fn remainder(&self, f: &Field, g: &Field) -> Result<Field> {
        f.ensure_same_grid(g)?;
        self.ensure_grid(f.grid())?;
        let (sf, sg) = (f.forward()?, g.forward()?);
        let mut acc = vec![0.0; self.grid.len()];
        for l in self.j_range() {
            let near = weighted(sf.coeffs(), &self.band_symbol(l - 2, l + 2));
            let block = weighted(sg.coeffs(), self.weights(l));
            accumulate_product(&mut acc, &near, &block, &self.grid);
        }
        Ok(dealiased(&acc, &self.grid))
    }

    /// `[u·∇, Δ_j]ψ = Δ_j(u·∇ψ) − u·∇(Δ_jψ)` with dealiased products.
    pub fn commutator_block(&self, u: (&Field, &Field), j: i32, psi: &Field) -> Result<Field> {
        self.check(j)?;
        u.0.ensure_same_grid(u.1)?;
        u.0.ensure_same_grid(psi)?;
        self.ensure_grid(psi.grid())?;
        let spsi = psi.forward()?;
        let transport = |coeffs: &[C64]| -> SpectralField {
            let s = SpectralField::from_coeffs(&self.grid, coeffs.to_vec()).expect("grid-sized");
            let (d1, d2) = gradient_spectral(&s);
            let (g1, g2) = inverse_pair(&d1, &d2, &self.grid);
            let values: Vec<f64> = (0..g1.len())
                .map(|i| u.0.values()[i] * g1[i] + u.1.values()[i] * g2[i])
                .collect();
            let mut out = forward_real(&values, &self.grid);
            dealias_in_place(&mut out, &self.grid);
            SpectralField::from_coeffs(&self.grid, out).expect("grid-sized")
        };
        let full = transport(spsi.coeffs());
        let outer = weighted(full.coeffs(), self.weights(j));
        let inner = transport(&weighted(spsi.coeffs(), self.weights(j)));
        let coeffs: Vec<C64> = outer.iter().zip(inner.coeffs()).map(|(a, b)| a - b).collect();
        Ok(SpectralField::from_coeffs(&self.grid, coeffs)?.inverse())
    }
}

fn weighted(coeffs: &[C64], weights: &[f64]) -> Vec<C64> {
    coeffs.iter().zip(weights).map(|(c, w)| c * *w).collect()
}

fn accumulate_product(acc: &mut [f64], a: &[C64], b: &[C64], grid: &Grid) {
    let (ra, rb) = inverse_pair(a, b, grid);
    for ((s, x), y) in acc.iter_mut().zip(ra).zip(rb) {
        *s += x * y;
    }
}

fn dealiased(values: &[f64], grid: &Grid) -> Field {
    let mut coeffs = forward_real(values, grid);
    dealias_in_place(&mut coeffs, grid);
    SpectralField::from_coeffs(grid, coeffs).expect("grid-sized").inverse()
}
