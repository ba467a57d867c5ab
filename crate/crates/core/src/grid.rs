//! The periodic box `[0, L)²` and its wavenumber lattice.
//!
//! Samples and Fourier coefficients are stored row-major: entry `i₂·n + i₁`
//! holds the sample at `x = (i₁h, i₂h)`, or the coefficient at lattice index
//! `(m₁, m₂)`. Lattice index `m` maps to the integer wavenumber `m` for
//! `m ≤ n/2` and `m − n` otherwise, so integer wavenumbers run over
//! `{−n/2+1, …, n/2}`; physical wavenumbers are those integers times `2π/L`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::fft::Fft2;
use crate::{Error, Result};

/// Cheaply cloneable handle to a periodic box.
#[derive(Clone)]
pub struct Grid(Arc<GridData>);

struct GridData {
    n: usize,
    length: f64,
    wavenumbers: Vec<f64>,
    magnitudes: Vec<f64>,
    fft: Fft2,
}

/// A point of the wavenumber lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavevector {
    /// Integer lattice coordinates in `{−n/2+1, …, n/2}`.
    pub m1: i64,
    pub m2: i64,
    /// Physical wavenumbers `2π m / L`.
    pub k1: f64,
    pub k2: f64,
}

impl Wavevector {
    pub fn norm(&self) -> f64 {
        libm::hypot(self.k1, self.k2)
    }

    pub fn is_zero(&self) -> bool {
        self.m1 == 0 && self.m2 == 0
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("side length {length} must be positive")));
        }
        let scale = 2.0 * PI / length;
        let wavenumbers: Vec<f64> = (0..n).map(|m| lattice(m, n) as f64 * scale).collect();
        let mut magnitudes = Vec::with_capacity(n * n);
        for m2 in 0..n {
            for m1 in 0..n {
                magnitudes.push(libm::hypot(wavenumbers[m1], wavenumbers[m2]));
            }
        }
        Ok(Self(Arc::new(GridData {
            n,
            length,
            wavenumbers,
            magnitudes,
            fft: Fft2::new(n),
        })))
    }

    /// `n` points per axis on the standard `2π` box.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    /// Number of samples, `n²`.
    pub fn len(&self) -> usize {
        self.0.n * self.0.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.0.length / self.0.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn area(&self) -> f64 {
        self.0.length * self.0.length
    }

    /// Smallest nonzero wavenumber magnitude, `2π/L`.
    pub fn k_min(&self) -> f64 {
        2.0 * PI / self.0.length
    }

    /// Largest wavenumber magnitude on the lattice, `√2·πn/L`.
    pub fn k_max(&self) -> f64 {
        libm::sqrt(2.0) * PI * self.0.n as f64 / self.0.length
    }

    /// Physical wavenumber of lattice index `m` along one axis.
    pub fn wavenumber(&self, m: usize) -> f64 {
        self.0.wavenumbers[m]
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.wavenumbers
    }

    /// `|k|` for every flat index.
    pub fn magnitudes(&self) -> &[f64] {
        &self.0.magnitudes
    }

    pub fn wavevector(&self, idx: usize) -> Wavevector {
        let n = self.0.n;
        let (m2, m1) = (idx / n, idx % n);
        Wavevector {
            m1: lattice(m1, n),
            m2: lattice(m2, n),
            k1: self.0.wavenumbers[m1],
            k2: self.0.wavenumbers[m2],
        }
    }

    /// Flat index of the lattice point with integer wavenumbers `(m1, m2)`.
    pub fn index_of(&self, m1: i64, m2: i64) -> usize {
        let n = self.0.n as i64;
        (m2.rem_euclid(n) * n + m1.rem_euclid(n)) as usize
    }

    /// Flat index of `−k` (the Nyquist lines map onto themselves).
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.0.n;
        let (m2, m1) = (idx / n, idx % n);
        ((n - m2) % n) * n + (n - m1) % n
    }

    /// Whether lattice index `m` is the Nyquist index `n/2`.
    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.0.n / 2
    }

    /// Physical coordinate of sample index `i` along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub(crate) fn fft(&self) -> &Fft2 {
        &self.0.fft
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

fn lattice(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.n == other.0.n && self.0.length.to_bits() == other.0.length.to_bits())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("length", &self.0.length)
            .finish()
    }
}
