//! Real-space samples and Fourier coefficients of scalar fields.
//!
//! Coefficient convention: `f(x) = Σ_k f̂(k) e^{ik·x}` with
//! `f̂(k) = n⁻² Σ_x f(x) e^{−ik·x}`, so `cos(x₁)` has coefficient `1/2` at
//! `k = (±1, 0)`. The zero mode is projected out on the way to Fourier space.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::Grid;
use crate::{Error, Result, C64};

/// Real samples of a mean-zero scalar on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

/// Fourier coefficients of a real mean-zero field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<C64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    /// Wraps raw samples. Non-finite samples and a wrong length are rejected;
    /// the mean is not touched (see [`Field::remove_mean`]).
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let field = Self {
            grid: grid.clone(),
            values,
        };
        field.check_finite()?;
        Ok(field)
    }

    /// Samples `f(x₁, x₂)` at the grid points and removes the mean.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i2 in 0..n {
            let x2 = grid.coordinate(i2);
            for i1 in 0..n {
                values.push(f(grid.coordinate(i1), x2));
            }
        }
        let mut field = Self {
            grid: grid.clone(),
            values,
        };
        field.remove_mean();
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.grid.n() + i1]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(index) => Err(Error::NonFinite {
                index,
                row: index / self.grid.n(),
                col: index % self.grid.n(),
            }),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn remove_mean(&mut self) {
        let mean = self.mean();
        for v in &mut self.values {
            *v -= mean;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖f‖_{L^p}` over the box by the rectangle rule; `p = ∞` is the grid max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, self.grid.cell_area(), p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// Grid integral `∫ f g dx`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(dot * self.grid.cell_area())
    }

    /// Max-abs distance between two fields on the same grid.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.ensure_same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, -1.0)
    }

    /// Forward transform. Rejects non-finite samples, naming the first one.
    pub fn forward(&self) -> Result<SpectralField> {
        self.check_finite()?;
        Ok(self.forward_unchecked())
    }

    pub(crate) fn forward_unchecked(&self) -> SpectralField {
        let mut coeffs: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.grid.fft().forward(&mut coeffs);
        coeffs[0] = C64::new(0.0, 0.0);
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub(crate) fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

pub(crate) fn lp_norm(values: &[f64], cell_area: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if p == 2.0 {
        let s: f64 = values.iter().map(|v| v * v).sum();
        return libm::sqrt(s * cell_area);
    }
    if p == 4.0 {
        let s: f64 = values.iter().map(|v| (v * v) * (v * v)).sum();
        return libm::sqrt(libm::sqrt(s * cell_area));
    }
    let s: f64 = values.iter().map(|v| libm::pow(v.abs(), p)).sum();
    libm::pow(s * cell_area, 1.0 / p)
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wraps coefficients; the zero mode is cleared.
    pub fn from_coeffs(grid: &Grid, mut coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        coeffs[0] = C64::new(0.0, 0.0);
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient at integer wavenumbers `(m1, m2)`.
    pub fn coeff(&self, m1: i64, m2: i64) -> C64 {
        self.coeffs[self.grid.index_of(m1, m2)]
    }

    /// Inverse transform; the imaginary part left over by non-Hermitian input
    /// is discarded.
    pub fn inverse(&self) -> Field {
        let mut buf = self.coeffs.clone();
        self.grid.fft().inverse(&mut buf);
        Field {
            grid: self.grid.clone(),
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Largest violation of `c(−k) = conj(c(k))`, relative to the largest
    /// coefficient magnitude.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0, |m: f64, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.coeffs.len()).fold(0.0, |m: f64, i| {
            m.max((self.coeffs[self.grid.mirror(i)] - self.coeffs[i].conj()).norm())
        });
        worst / scale
    }

    /// `Σ_k |f̂(k)|²`, the grid mean of `f²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: f64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }
}

/// Inverse transform of two real fields with one complex FFT.
pub(crate) fn inverse_pair(a: &[C64], b: &[C64], grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let i = C64::new(0.0, 1.0);
    let mut buf: Vec<C64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
    grid.fft().inverse(&mut buf);
    buf.into_iter().map(|c| (c.re, c.im)).unzip()
}

/// Forward transform of real samples, zero mode cleared.
pub(crate) fn forward_real(values: &[f64], grid: &Grid) -> Vec<C64> {
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    grid.fft().forward(&mut buf);
    buf[0] = C64::new(0.0, 0.0);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use core::f64::consts::PI;

    /// O(n⁴) DFT straight from the definition.
    fn dense_dft(field: &Field) -> Vec<C64> {
        let grid = field.grid();
        let n = grid.n();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for (idx, slot) in out.iter_mut().enumerate() {
            let k = grid.wavevector(idx);
            let mut acc = C64::new(0.0, 0.0);
            for i2 in 0..n {
                for i1 in 0..n {
                    let phase = -(k.k1 * grid.coordinate(i1) + k.k2 * grid.coordinate(i2));
                    acc += field.at(i1, i2) * C64::new(libm::cos(phase), libm::sin(phase));
                }
            }
            *slot = acc / (n * n) as f64;
        }
        out
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = Grid::standard(16).unwrap();
        let s = Field::zeros(&g).forward().unwrap();
        assert!(s.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn cosine_has_half_amplitudes() {
        let g = Grid::standard(16).unwrap();
        let s = Field::from_fn(&g, |x1, _| libm::cos(x1)).forward().unwrap();
        for (idx, c) in s.coeffs().iter().enumerate() {
            let k = g.wavevector(idx);
            let expected = if k.m2 == 0 && k.m1.abs() == 1 { 0.5 } else { 0.0 };
            assert!((c - C64::new(expected, 0.0)).norm() < 1e-15, "{k:?}");
        }
    }

    #[test]
    fn matches_dense_dft_on_random_field() {
        let g = Grid::standard(8).unwrap();
        let mut f = corpus::white_noise(&g, 7);
        f.remove_mean();
        let fast = f.forward().unwrap();
        let slow = dense_dft(&f);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = Grid::standard(32).unwrap();
        let mut f = corpus::white_noise(&g, 3);
        f.remove_mean();
        let s = f.forward().unwrap();
        let back = s.inverse();
        assert!(back.max_abs_diff(&f).unwrap() <= 1e-12 * f.max_abs());
        let mean_sq = f.values().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
        assert!((s.energy() - mean_sq).abs() <= 1e-10 * mean_sq);
        assert!(s.hermitian_defect() < 1e-12);
    }

    #[test]
    fn non_finite_sample_is_named() {
        let g = Grid::standard(8).unwrap();
        let mut f = Field::zeros(&g);
        f.values_mut()[8 * 3 + 5] = f64::NAN;
        assert_eq!(
            f.forward().unwrap_err(),
            Error::NonFinite {
                index: 29,
                row: 3,
                col: 5
            }
        );
        assert!(Field::from_values(&g, vec![f64::INFINITY; 64]).is_err());
    }

    #[test]
    fn lp_norms_of_sine() {
        let g = Grid::standard(64).unwrap();
        let f = Field::from_fn(&g, |x1, _| libm::sin(x1));
        assert!((f.l2_norm() - PI * libm::sqrt(2.0)).abs() < 1e-12);
        // ∫∫ sin⁴ = 2π · 3π/4
        let l4 = libm::pow(3.0 * PI * PI / 2.0, 0.25);
        assert!((f.lp_norm(4.0) - l4).abs() < 1e-12);
        assert!((f.lp_norm(3.0) - libm::pow(2.0 * PI * 8.0 / 3.0, 1.0 / 3.0)).abs() < 1e-3);
        assert!((f.lp_norm(f64::INFINITY) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn packed_inverse_matches_single() {
        let g = Grid::standard(16).unwrap();
        let a = corpus::smooth_field(&g, 2.0, 1);
        let b = corpus::smooth_field(&g, 1.0, 2);
        let sa = a.forward().unwrap();
        let sb = b.forward().unwrap();
        let (ra, rb) = inverse_pair(sa.coeffs(), sb.coeffs(), &g);
        for i in 0..g.len() {
            assert!((ra[i] - a.values()[i]).abs() < 1e-13);
            assert!((rb[i] - b.values()[i]).abs() < 1e-13);
        }
    }
}
