//! Seeded sample fields for tests and probes.
//!
//! All generators are deterministic functions of their seed. Spectral
//! generators leave the Nyquist lines empty so that odd multipliers act
//! exactly on the samples.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Field, SpectralField};
use crate::grid::Grid;
use crate::littlewood_paley::DyadicDecomposition;
use crate::C64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform samples in `[−1, 1]`. The mean is left in place.
pub fn white_noise(grid: &Grid, seed: u64) -> Field {
    let mut r = rng(seed);
    let values = (0..grid.len()).map(|_| r.random_range(-1.0..=1.0)).collect();
    Field::from_values(grid, values).expect("finite samples")
}

/// Random Hermitian spectrum with modulus `amplitude(k)` and uniform phases.
pub fn random_spectrum(grid: &Grid, seed: u64, amplitude: impl Fn(f64, f64) -> f64) -> SpectralField {
    let mut r = rng(seed);
    let n = grid.n();
    let mut coeffs = alloc::vec![C64::new(0.0, 0.0); grid.len()];
    for idx in 1..grid.len() {
        let (m2, m1) = (idx / n, idx % n);
        if grid.is_nyquist(m1) || grid.is_nyquist(m2) {
            continue;
        }
        let mirror = grid.mirror(idx);
        if mirror < idx {
            coeffs[idx] = coeffs[mirror].conj();
            continue;
        }
        let k = grid.wavevector(idx);
        let modulus = amplitude(k.k1, k.k2) * r.random_range(0.5..=1.0);
        let phase = r.random_range(0.0..2.0 * PI);
        coeffs[idx] = C64::from_polar(modulus, phase);
    }
    SpectralField::from_coeffs(grid, coeffs).expect("grid-sized")
}

/// Smooth multiscale field with spectrum `|k|^{−γ}`, scaled to unit max-abs.
pub fn smooth_field(grid: &Grid, gamma: f64, seed: u64) -> Field {
    let s = random_spectrum(grid, seed, |k1, k2| libm::pow(libm::hypot(k1, k2), -gamma));
    normalized(s.inverse())
}

/// Random field with `|k_a| ≤ kmax` on both axes, unit max-abs.
pub fn band_limited(grid: &Grid, kmax: f64, seed: u64) -> Field {
    let s = random_spectrum(grid, seed, |k1, k2| {
        if k1.abs() <= kmax && k2.abs() <= kmax {
            1.0
        } else {
            0.0
        }
    });
    normalized(s.inverse())
}

/// Random field supported in the dyadic block `j`, unit max-abs.
pub fn block_field(dec: &DyadicDecomposition, j: i32, seed: u64) -> Field {
    let grid = dec.grid();
    let weights = dec.weights(j);
    let s = random_spectrum(grid, seed, |_, _| 1.0);
    let coeffs: Vec<C64> = s
        .coeffs()
        .iter()
        .zip(weights)
        .map(|(c, w)| c * *w)
        .collect();
    let s = SpectralField::from_coeffs(grid, coeffs).expect("grid-sized");
    normalized(s.inverse())
}

/// `amplitude · sin(m₁x₁ + m₂x₂ + phase)` with physical wavenumbers.
pub fn single_mode(grid: &Grid, m1: i64, m2: i64, amplitude: f64, phase: f64) -> Field {
    let k1 = m1 as f64 * grid.k_min();
    let k2 = m2 as f64 * grid.k_min();
    Field::from_fn(grid, |x1, x2| amplitude * libm::sin(k1 * x1 + k2 * x2 + phase))
}

fn normalized(f: Field) -> Field {
    let m = f.max_abs();
    if m > 0.0 {
        f.scaled(1.0 / m)
    } else {
        f
    }
}
