//! Radix-2 complex FFT and its 2D row/column extension.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::C64;

#[derive(Debug, Clone)]
pub(crate) struct Fft {
    n: usize,
    // e^{-2πi m/n}, m < n/2
    twiddles: Vec<C64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2);
        let bits = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|m| {
                let phase = -2.0 * PI * m as f64 / n as f64;
                C64::new(libm::cos(phase), libm::sin(phase))
            })
            .collect();
        let bitrev = (0..n)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        Self {
            n,
            twiddles,
            bitrev,
        }
    }

    /// Unnormalized in-place transform. `inverse` flips the sign of the exponent.
    pub(crate) fn process(&self, buf: &mut [C64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for m in 0..half {
                    let mut w = self.twiddles[m * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + m];
                    let b = buf[start + m + half] * w;
                    buf[start + m] = a + b;
                    buf[start + m + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Square 2D transform over row-major `n × n` data.
#[derive(Debug, Clone)]
pub(crate) struct Fft2 {
    n: usize,
    line: Fft,
}

impl Fft2 {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            line: Fft::new(n),
        }
    }

    /// `out(k) = n⁻² Σ_x in(x) e^{−ik·x}`.
    pub(crate) fn forward(&self, data: &mut [C64]) {
        self.transform(data, false);
        let scale = 1.0 / (self.n * self.n) as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    /// `out(x) = Σ_k in(k) e^{ik·x}`.
    pub(crate) fn inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        for row in data.chunks_exact_mut(n) {
            self.line.process(row, inverse);
        }
        let mut column = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            self.line.process(&mut column, inverse);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
    }
}
