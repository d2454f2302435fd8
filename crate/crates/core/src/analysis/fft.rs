//! In-place iterative radix-2 FFT.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(&self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Precomputed twiddles and bit-reversal table for one transform size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex>,
    reversed: Vec<usize>,
}

impl Fft {
    /// Plan a forward transform of `n` points. `n` must be a power of two.
    pub fn new(n: usize) -> Option<Self> {
        if n == 0 || !n.is_power_of_two() {
            return None;
        }
        let bits = n.trailing_zeros();
        let reversed = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        // Each twiddle is computed directly rather than by repeated multiplication.
        let twiddles = (0..n / 2)
            .map(|k| {
                let (s, c) = libm::sincos(-TAU * k as f64 / n as f64);
                Complex::new(c, s)
            })
            .collect();
        Some(Self {
            n,
            twiddles,
            reversed,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Forward DFT `X[k] = sum x[j] e^{-2 pi i jk/n}` in place.
    pub fn process(&self, data: &mut [Complex]) {
        assert_eq!(data.len(), self.n, "buffer length must match the plan");
        for i in 0..self.n {
            let j = self.reversed[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.n {
            let half = size / 2;
            let stride = self.n / size;
            for start in (0..self.n).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }

    /// Transform a real frame, returning bins `0..=n/2`.
    pub fn real_spectrum(&self, frame: &[f64]) -> Vec<Complex> {
        let mut data: Vec<Complex> = frame.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.process(&mut data);
        data.truncate(self.n / 2 + 1);
        data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Fft::new(0).is_none());
        assert!(Fft::new(12).is_none());
        assert!(Fft::new(1).is_some());
    }

    #[test]
    fn impulse_is_flat() {
        let fft = Fft::new(16).unwrap();
        let mut x = [Complex::ZERO; 16];
        x[0] = Complex::new(1.0, 0.0);
        fft.process(&mut x);
        for c in x {
            assert!((c.re - 1.0).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn cosine_lands_in_its_bin() {
        let n = 64;
        let fft = Fft::new(n).unwrap();
        let frame: Vec<f64> = (0..n)
            .map(|j| libm::cos(TAU * 5.0 * j as f64 / n as f64))
            .collect();
        let spec = fft.real_spectrum(&frame);
        assert_eq!(spec.len(), 33);
        for (k, c) in spec.iter().enumerate() {
            let expect = if k == 5 { 32.0 } else { 0.0 };
            assert!((c.norm() - expect).abs() < 1e-9, "bin {k}: {}", c.norm());
        }
    }
}
