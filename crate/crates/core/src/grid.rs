//! Uniform periodic grids with FFT-based spectral calculus.
//!
//! `PeriodicGrid` holds n real samples of a function over one period
//! [0, L) at x_j = j L / n. Spectral derivatives, antiderivatives and
//! trapezoid means are exact for band-limited data; odd-order derivatives
//! zero the Nyquist mode.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

pub fn fft_forward(data: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(data.len()).process(data);
}

pub fn fft_inverse(data: &mut [Complex64]) {
    FftPlanner::new().plan_fft_inverse(data.len()).process(data);
    let n = data.len() as f64;
    for v in data.iter_mut() {
        *v /= n;
    }
}

/// Fourier wavenumber of mode index j on an n-point grid of period L,
/// with the usual symmetric layout; `zero_nyquist` applies to odd orders.
pub fn wavenumbers(n: usize, period: f64) -> Vec<f64> {
    let base = 2.0 * PI / period;
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as isize } else { j as isize - n as isize };
            base * m as f64
        })
        .collect()
}

/// Spectral derivative of complex samples.
pub fn spectral_derivative_complex(values: &[Complex64], period: f64, order: u32) -> Vec<Complex64> {
    let n = values.len();
    let mut hat = values.to_vec();
    fft_forward(&mut hat);
    let ks = wavenumbers(n, period);
    for (j, h) in hat.iter_mut().enumerate() {
        let mut k = ks[j];
        if order % 2 == 1 && n % 2 == 0 && j == n / 2 {
            k = 0.0;
        }
        *h *= Complex64::new(0.0, k).powu(order);
    }
    fft_inverse(&mut hat);
    hat
}

#[derive(Clone, Debug)]
pub struct PeriodicGrid {
    period: f64,
    values: Vec<f64>,
}

impl PeriodicGrid {
    pub const MIN_POINTS: usize = 32;

    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(
            period,
            (0..n).map(|j| f(j as f64 * period / n as f64)).collect(),
        )
    }

    pub fn from_values(period: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::domain(
                "n",
                n as f64,
                "power of two with n >= 32",
            ));
        }
        if !(period > 0.0) {
            return Err(Error::domain("period", period, "(0, inf)"));
        }
        Ok(PeriodicGrid { period, values })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.period / self.len() as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.node(j))
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> PeriodicGrid {
        let hat: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let out = spectral_derivative_complex(&hat, self.period, order);
        PeriodicGrid {
            period: self.period,
            values: out.into_iter().map(|z| z.re).collect(),
        }
    }

    /// Trapezoid mean over the period (spectrally accurate).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Integral over one period.
    pub fn integral(&self) -> f64 {
        self.mean() * self.period
    }

    /// L2 norm over one period: sqrt(int |f|^2 dx).
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.len() as f64 * self.period).sqrt()
    }

    /// Pointwise product.
    pub fn mul(&self, other: &PeriodicGrid) -> PeriodicGrid {
        assert_eq!(self.len(), other.len());
        PeriodicGrid {
            period: self.period,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PeriodicGrid {
        PeriodicGrid {
            period: self.period,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> PeriodicGrid {
        assert_eq!(self.len(), other.len());
        PeriodicGrid {
            period: self.period,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// <self, other> = int over period of the product.
    pub fn inner(&self, other: &PeriodicGrid) -> f64 {
        assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.len() as f64
            * self.period
    }

    /// Even/odd split about x = 0 (grid reflection j -> n - j).
    pub fn parity_parts(&self) -> (PeriodicGrid, PeriodicGrid) {
        let n = self.len();
        let mut even = vec![0.0; n];
        let mut odd = vec![0.0; n];
        for j in 0..n {
            let r = self.values[(n - j) % n];
            even[j] = 0.5 * (self.values[j] + r);
            odd[j] = 0.5 * (self.values[j] - r);
        }
        (
            PeriodicGrid {
                period: self.period,
                values: even,
            },
            PeriodicGrid {
                period: self.period,
                values: odd,
            },
        )
    }

    /// Resample to m points by Fourier interpolation (m >= n, both powers of two).
    pub fn resample(&self, m: usize) -> Result<PeriodicGrid> {
        let n = self.len();
        if m == n {
            return Ok(self.clone());
        }
        if m < n {
            return Err(Error::domain("m", m as f64, ">= current size"));
        }
        let mut hat: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_forward(&mut hat);
        let mut big = vec![Complex64::new(0.0, 0.0); m];
        let half = n / 2;
        for j in 0..half {
            big[j] = hat[j];
        }
        // split the Nyquist coefficient between +-n/2
        big[half] = 0.5 * hat[half];
        big[m - half] = 0.5 * hat[half];
        for j in 1..half {
            big[m - j] = hat[n - j];
        }
        fft_inverse(&mut big);
        let scale = m as f64 / n as f64;
        PeriodicGrid::from_values(self.period, big.into_iter().map(|z| z.re * scale).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = PeriodicGrid::from_fn(3.0, 64, |_| 4.2).unwrap();
        let d = g.derivative(1);
        assert!(d.values().iter().all(|v| v.abs() <= 1e-13));
    }

    #[test]
    fn derivative_of_trig_mode() {
        let l = 2.0 * PI;
        let g = PeriodicGrid::from_fn(l, 128, |x| (3.0 * x).sin()).unwrap();
        let d = g.derivative(1);
        for (j, v) in d.values().iter().enumerate() {
            let x = j as f64 * l / 128.0;
            assert!((v - 3.0 * (3.0 * x).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(PeriodicGrid::from_fn(1.0, 48, |_| 0.0).is_err());
        assert!(PeriodicGrid::from_fn(1.0, 16, |_| 0.0).is_err());
    }

    #[test]
    fn resample_preserves_values() {
        let l = 5.0;
        let g = PeriodicGrid::from_fn(l, 64, |x| (2.0 * PI * x / l).cos() + 0.3).unwrap();
        let r = g.resample(256).unwrap();
        for j in 0..64 {
            assert!((r.values()[4 * j] - g.values()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_split_reconstructs() {
        let g = PeriodicGrid::from_fn(1.0, 64, |x| (2.0 * PI * x).sin() + (4.0 * PI * x).cos()).unwrap();
        let (e, o) = g.parity_parts();
        for j in 0..64 {
            assert!((e.values()[j] + o.values()[j] - g.values()[j]).abs() < 1e-14);
        }
    }
}
