//! Periodic box `(-L, L)^d` with `n` points per dimension.
//!
//! Both physical samples and Fourier coefficients use the signed-index
//! layout: storage slot `k` holds index `k` for `k < n/2` and `k - n`
//! otherwise. Physical point `j` sits at `x = j * h` with the same signed
//! convention, so the origin is slot 0 and plane waves are exactly
//! `exp(i * mu_l * x_j)` without a phase shift.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid in 1, 2 or 3 dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    dim: usize,
    half_width: f64,
    n: usize,
}

impl SpectralGrid {
    /// Smallest accepted number of points per dimension.
    pub const MIN_POINTS: usize = 4;

    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config("dimension must be 1, 2 or 3"));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config("half width L must be positive and finite"));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::Config("points per dimension must be even"));
        }
        if n < Self::MIN_POINTS {
            return Err(Error::Config("points per dimension must be at least 4"));
        }
        Ok(Self { dim, half_width, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L` of the box `(-L, L)^d`.
    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per dimension.
    #[inline]
    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    /// Total number of samples, `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh size `h = 2L / n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Quadrature weight `h^d` of one sample.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing(), self.dim as f64)
    }

    /// Volume `(2L)^d` of the box.
    #[inline]
    pub fn volume(&self) -> f64 {
        libm::pow(2.0 * self.half_width, self.dim as f64)
    }

    /// Largest resolvable frequency magnitude per axis, `pi * n / (2L)`.
    #[inline]
    pub fn nyquist(&self) -> f64 {
        PI * (self.n / 2) as f64 / self.half_width
    }

    /// Signed index of storage slot `k` along one axis.
    #[inline]
    pub fn signed_index(&self, k: usize) -> i64 {
        let half = self.n / 2;
        if k < half {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Storage slot of a signed index, wrapping periodically.
    #[inline]
    pub fn slot_of(&self, l: i64) -> usize {
        l.rem_euclid(self.n as i64) as usize
    }

    /// Frequency `mu = pi * l / L` of storage slot `k` along one axis.
    #[inline]
    pub fn frequency(&self, k: usize) -> f64 {
        PI * self.signed_index(k) as f64 / self.half_width
    }

    /// Per-axis frequencies in storage order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.frequency(k)).collect()
    }

    /// Physical coordinate of storage slot `j` along one axis.
    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        self.signed_index(j) as f64 * self.spacing()
    }

    /// Splits a flat row-major index into per-axis slots (unused axes are 0).
    #[inline]
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.n;
            flat /= self.n;
        }
        out
    }

    #[inline]
    pub fn flatten(&self, slots: [usize; 3]) -> usize {
        slots[..self.dim]
            .iter()
            .fold(0usize, |acc, &s| acc * self.n + s)
    }

    /// Frequency vector of a flat Fourier-space index.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let slots = self.unflatten(flat);
        let mut mu = [0.0; 3];
        for axis in 0..self.dim {
            mu[axis] = self.frequency(slots[axis]);
        }
        mu
    }

    /// Position of a flat physical-space index.
    #[inline]
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let slots = self.unflatten(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(slots[axis]);
        }
        x
    }

    /// `|mu|^2` for every Fourier slot, in storage order.
    pub fn wavenumbers_sq(&self) -> Vec<f64> {
        let axis: Vec<f64> = self.frequencies().iter().map(|m| m * m).collect();
        let mut out = Vec::with_capacity(self.len());
        match self.dim {
            1 => out.extend_from_slice(&axis),
            2 => {
                for a in &axis {
                    out.extend(axis.iter().map(|b| a + b));
                }
            }
            _ => {
                for a in &axis {
                    for b in &axis {
                        let ab = a + b;
                        out.extend(axis.iter().map(|c| ab + c));
                    }
                }
            }
        }
        out
    }

    /// `|mu|` for every Fourier slot, in storage order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        self.wavenumbers_sq().into_iter().map(libm::sqrt).collect()
    }

    /// `|x|^2` for every physical slot, in storage order.
    pub fn radii_sq(&self) -> Vec<f64> {
        let h = self.spacing();
        // Same signed layout as frequencies, different scale.
        let scale = h * self.half_width / PI;
        self.wavenumbers_sq()
            .into_iter()
            .map(|m2| m2 * scale * scale)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_follow_signed_layout() {
        let g = SpectralGrid::new(1, 1.0, 4).unwrap();
        let f = g.frequencies();
        assert_eq!(f, [0.0, PI, -2.0 * PI, -PI]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralGrid::new(1, 16.0, 2).is_err());
        assert!(SpectralGrid::new(1, 16.0, 7).is_err());
        assert!(SpectralGrid::new(4, 16.0, 8).is_err());
        assert!(SpectralGrid::new(0, 16.0, 8).is_err());
        assert!(SpectralGrid::new(2, 0.0, 8).is_err());
        assert!(SpectralGrid::new(2, -1.0, 8).is_err());
    }

    #[test]
    fn spacing_and_count() {
        let g = SpectralGrid::new(2, 8.0, 256).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.len(), 256 * 256);
        let g = SpectralGrid::new(1, 16.0, 16384).unwrap();
        assert_eq!(g.spacing(), 1.0 / 512.0);
    }

    #[test]
    fn frequencies_pair_up_except_zero_and_nyquist() {
        let g = SpectralGrid::new(1, 3.0, 10).unwrap();
        let f = g.frequencies();
        let unpaired: Vec<f64> = f
            .iter()
            .copied()
            .filter(|m| !f.iter().any(|o| *o == -*m && *o != *m))
            .collect();
        assert_eq!(unpaired, [0.0, -5.0 * PI / 3.0]);
    }

    #[test]
    fn flatten_round_trip() {
        let g = SpectralGrid::new(3, 1.0, 6).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.flatten(g.unflatten(flat)), flat);
        }
        let ks = g.wavenumbers_sq();
        let mu = g.wavevector(1 + 6 * 2 + 36 * 5);
        let expect = mu[0] * mu[0] + mu[1] * mu[1] + mu[2] * mu[2];
        assert!((ks[1 + 6 * 2 + 36 * 5] - expect).abs() < 1e-12);
    }

    #[test]
    fn radii_match_positions() {
        let g = SpectralGrid::new(2, 5.0, 8).unwrap();
        let r2 = g.radii_sq();
        for (flat, r) in r2.iter().enumerate() {
            let x = g.position(flat);
            assert!((r - (x[0] * x[0] + x[1] * x[1])).abs() < 1e-12);
        }
    }
}
