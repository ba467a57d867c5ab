//! Fourier multipliers on the lattice and the operators built from them.

use alloc::string::String;
use alloc::vec::Vec;

use crate::field::{forward_real, inverse_pair, Field, SpectralField};
use crate::grid::{Grid, Wavevector};
use crate::{Error, Result, C64};

/// A symbol tabulated on the wavenumber lattice of one grid.
#[derive(Debug, Clone)]
pub struct Multiplier {
    grid: Grid,
    symbol: Vec<C64>,
    description: String,
}

impl Multiplier {
    pub fn from_fn(grid: &Grid, description: impl Into<String>, f: impl Fn(&Wavevector) -> C64) -> Self {
        let symbol = (0..grid.len()).map(|idx| f(&grid.wavevector(idx))).collect();
        Self {
            grid: grid.clone(),
            symbol,
            description: description.into(),
        }
    }

    /// Real radial symbol `f(|k|)`; the zero mode is set to `0`.
    pub fn radial(grid: &Grid, description: impl Into<String>, f: impl Fn(f64) -> f64) -> Self {
        let symbol = grid
            .magnitudes()
            .iter()
            .enumerate()
            .map(|(idx, &r)| if idx == 0 { C64::new(0.0, 0.0) } else { C64::new(f(r), 0.0) })
            .collect();
        Self {
            grid: grid.clone(),
            symbol,
            description: description.into(),
        }
    }

    pub fn identity(grid: &Grid) -> Self {
        Self::radial(grid, "identity", |_| 1.0)
    }

    /// `|k|^α`, α ∈ (0, 2].
    pub fn fractional_laplacian(grid: &Grid, alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        Ok(Self::radial(grid, alloc::format!("|k|^{alpha}"), |r| libm::pow(r, alpha)))
    }

    /// `e^{−t|k|^α}`, t ≥ 0.
    pub fn semigroup(grid: &Grid, t: f64, alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        check_time(t)?;
        Ok(Self::radial(grid, alloc::format!("exp(-{t}|k|^{alpha})"), |r| {
            libm::exp(-t * libm::pow(r, alpha))
        }))
    }

    /// Riesz transform `R_a` with symbol `i k_a/|k|` (`axis` 0 or 1). The
    /// symbol vanishes on the Nyquist line of its own axis, where `k_a` and
    /// `−k_a` share a lattice point.
    pub fn riesz(grid: &Grid, axis: usize) -> Self {
        let n = grid.n() as i64;
        Self::from_fn(grid, if axis == 0 { "R1" } else { "R2" }, |k| {
            let (m, ka) = if axis == 0 { (k.m1, k.k1) } else { (k.m2, k.k2) };
            if k.is_zero() || m == n / 2 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, ka / k.norm())
            }
        })
    }

    /// `∂_a` with symbol `i k_a`, zero on the Nyquist line of its axis.
    pub fn derivative(grid: &Grid, axis: usize) -> Self {
        let n = grid.n() as i64;
        Self::from_fn(grid, if axis == 0 { "d1" } else { "d2" }, |k| {
            let (m, ka) = if axis == 0 { (k.m1, k.k1) } else { (k.m2, k.k2) };
            if m == n / 2 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, ka)
            }
        })
    }

    /// Two-thirds rule mask: keeps `max(|m₁|, |m₂|) ≤ n/3`.
    pub fn dealias_mask(grid: &Grid) -> Self {
        let cutoff = grid.n() as f64 / 3.0;
        Self::from_fn(grid, "2/3 dealias", |k| {
            if k.is_zero() || (k.m1.abs() as f64) > cutoff || (k.m2.abs() as f64) > cutoff {
                C64::new(0.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbol(&self) -> &[C64] {
        &self.symbol
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Whether the symbol satisfies `m(−k) = conj(m(k))` (realness preserving).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.symbol.len()).all(|i| (self.symbol[self.grid.mirror(i)] - self.symbol[i].conj()).norm() <= tol)
    }

    /// `coeff_out(k) = symbol(k)·coeff_in(k)`.
    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = f.coeffs().iter().zip(&self.symbol).map(|(c, m)| c * m).collect();
        SpectralField::from_coeffs(&self.grid, coeffs)
    }

    pub fn apply_field(&self, f: &Field) -> Result<Field> {
        Ok(self.apply(&f.forward()?)?.inverse())
    }

    /// Pointwise product of the symbols.
    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Multiplier {
            grid: self.grid.clone(),
            symbol: self.symbol.iter().zip(&other.symbol).map(|(a, b)| a * b).collect(),
            description: alloc::format!("{} ∘ {}", self.description, other.description),
        })
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange(alpha))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// `(−Δ)^{α/2} f`.
pub fn fractional_laplacian(f: &Field, alpha: f64) -> Result<Field> {
    Multiplier::fractional_laplacian(f.grid(), alpha)?.apply_field(f)
}

/// `e^{−t(−Δ)^{α/2}} f`.
pub fn semigroup(f: &Field, t: f64, alpha: f64) -> Result<Field> {
    Multiplier::semigroup(f.grid(), t, alpha)?.apply_field(f)
}

/// Spectral form of [`semigroup`].
pub fn semigroup_spectral(f: &SpectralField, t: f64, alpha: f64) -> Result<SpectralField> {
    Multiplier::semigroup(f.grid(), t, alpha)?.apply(f)
}

/// `u = R^⊥θ = (−R₂θ, R₁θ)`.
pub fn riesz_perp(theta: &Field) -> Result<(Field, Field)> {
    let s = theta.forward()?;
    let (u1, u2) = riesz_perp_spectral(&s);
    let (a, b) = inverse_pair(&u1, &u2, s.grid());
    let grid = s.grid();
    Ok((Field::from_values(grid, a)?, Field::from_values(grid, b)?))
}

/// Coefficients of `(−R₂θ, R₁θ)`.
pub(crate) fn riesz_perp_spectral(s: &SpectralField) -> (Vec<C64>, Vec<C64>) {
    let grid = s.grid();
    let half = grid.n() / 2;
    let n = grid.n();
    let mut u1 = alloc::vec![C64::new(0.0, 0.0); grid.len()];
    let mut u2 = alloc::vec![C64::new(0.0, 0.0); grid.len()];
    let mags = grid.magnitudes();
    for (idx, c) in s.coeffs().iter().enumerate().skip(1) {
        let (m2, m1) = (idx / n, idx % n);
        let r = mags[idx];
        // −R₂: −i k₂/|k|
        if m2 != half {
            u1[idx] = C64::new(0.0, -grid.wavenumber(m2) / r) * c;
        }
        if m1 != half {
            u2[idx] = C64::new(0.0, grid.wavenumber(m1) / r) * c;
        }
    }
    (u1, u2)
}

/// Coefficients of `(∂₁f, ∂₂f)`.
pub(crate) fn gradient_spectral(s: &SpectralField) -> (Vec<C64>, Vec<C64>) {
    let grid = s.grid();
    let n = grid.n();
    let half = n / 2;
    let mut d1 = alloc::vec![C64::new(0.0, 0.0); grid.len()];
    let mut d2 = alloc::vec![C64::new(0.0, 0.0); grid.len()];
    for (idx, c) in s.coeffs().iter().enumerate() {
        let (m2, m1) = (idx / n, idx % n);
        if m1 != half {
            d1[idx] = C64::new(0.0, grid.wavenumber(m1)) * c;
        }
        if m2 != half {
            d2[idx] = C64::new(0.0, grid.wavenumber(m2)) * c;
        }
    }
    (d1, d2)
}

/// `∂₁u₁ + ∂₂u₂`.
pub fn divergence(u1: &Field, u2: &Field) -> Result<Field> {
    u1.ensure_same_grid(u2)?;
    let d1 = Multiplier::derivative(u1.grid(), 0).apply(&u1.forward()?)?;
    let d2 = Multiplier::derivative(u1.grid(), 1).apply(&u2.forward()?)?;
    Ok(d1.combine(1.0, &d2, 1.0)?.inverse())
}

/// `(∂₁f, ∂₂f)`.
pub fn gradient(f: &Field) -> Result<(Field, Field)> {
    let s = f.forward()?;
    let (d1, d2) = gradient_spectral(&s);
    let (a, b) = inverse_pair(&d1, &d2, s.grid());
    Ok((Field::from_values(s.grid(), a)?, Field::from_values(s.grid(), b)?))
}

/// Two-thirds rule: zero every coefficient with `max(|m₁|, |m₂|) > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(out.coeffs_mut(), f.grid());
    out
}

pub(crate) fn dealias_in_place(coeffs: &mut [C64], grid: &Grid) {
    let n = grid.n();
    let cutoff = n as f64 / 3.0;
    let keep = |m: usize| {
        let k = if m <= n / 2 { m as f64 } else { (n - m) as f64 };
        k <= cutoff
    };
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if !(keep(idx % n) && keep(idx / n)) {
            *c = C64::new(0.0, 0.0);
        }
    }
    coeffs[0] = C64::new(0.0, 0.0);
}

/// Dealiased pseudo-spectral product `P(fg)`, mean removed.
pub fn product(f: &Field, g: &Field) -> Result<Field> {
    f.ensure_same_grid(g)?;
    let values: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
    let mut coeffs = forward_real(&values, f.grid());
    dealias_in_place(&mut coeffs, f.grid());
    Ok(SpectralField::from_coeffs(f.grid(), coeffs)?.inverse())
}
