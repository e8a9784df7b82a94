//! Diagonal Fourier-space operators and the `phi_1` kernel.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::SpectralGrid;

/// Symbol sampled on a grid's Fourier slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    grid: SpectralGrid,
    symbol: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(grid: SpectralGrid, symbol: Vec<Complex64>) -> Result<Self> {
        if symbol.len() != grid.len() {
            return Err(Error::Usage("symbol length does not match grid size"));
        }
        Ok(Self { grid, symbol })
    }

    pub fn identity(grid: SpectralGrid) -> Self {
        Self {
            grid,
            symbol: vec![Complex64::new(1.0, 0.0); grid.len()],
        }
    }

    pub fn zero(grid: SpectralGrid) -> Self {
        Self {
            grid,
            symbol: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Radial symbol `f(|mu|^2)`.
    pub fn radial<F: FnMut(f64) -> Complex64>(grid: SpectralGrid, f: F) -> Self {
        let symbol = grid.wavenumbers_sq().into_iter().map(f).collect();
        Self { grid, symbol }
    }

    /// Real radial symbol `f(|mu|^2)`.
    pub fn radial_real<F: FnMut(f64) -> f64>(grid: SpectralGrid, mut f: F) -> Self {
        Self::radial(grid, |k2| Complex64::new(f(k2), 0.0))
    }

    #[inline]
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    #[inline]
    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    /// Applies the operator to a Fourier-space field.
    pub fn apply(&self, mut field: Field) -> Result<Field> {
        if field.grid() != &self.grid {
            return Err(Error::Usage("multiplier and field live on different grids"));
        }
        if field.space() != Space::Fourier {
            return Err(Error::Usage("multipliers act on Fourier-space fields"));
        }
        self.apply_in_place(field.values_mut());
        Ok(field)
    }

    /// Multiplies raw Fourier coefficients entrywise.
    pub fn apply_in_place(&self, values: &mut [Complex64]) {
        assert_eq!(values.len(), self.symbol.len());
        values
            .iter_mut()
            .zip(&self.symbol)
            .for_each(|(v, s)| *v *= *s);
    }

    /// Symbol product, i.e. operator composition.
    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        if self.grid != other.grid {
            return Err(Error::Usage("multipliers live on different grids"));
        }
        Ok(Multiplier {
            grid: self.grid,
            symbol: self
                .symbol
                .iter()
                .zip(&other.symbol)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Largest `|symbol|`.
    pub fn sup_norm(&self) -> f64 {
        self.symbol.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }
}

/// `exp(i t Delta)`: symbol `exp(-i t |mu|^2)`.
pub fn laplacian_propagator(grid: SpectralGrid, t: f64) -> Multiplier {
    Multiplier::radial(grid, |k2| {
        let (s, c) = libm::sincos(t * k2);
        Complex64::new(c, -s)
    })
}

/// `<nabla>^s`: symbol `(1 + |mu|^2)^(s/2)`.
pub fn sobolev_weight(grid: SpectralGrid, s: f64) -> Multiplier {
    if s == 0.0 {
        return Multiplier::identity(grid);
    }
    Multiplier::radial_real(grid, |k2| libm::pow(1.0 + k2, 0.5 * s))
}

/// `|nabla|^s`: symbol `|mu|^s`, with the zero mode mapped to 0 for `s > 0`.
pub fn homogeneous_weight(grid: SpectralGrid, s: f64) -> Multiplier {
    Multiplier::radial_real(grid, |k2| {
        if k2 == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            libm::pow(k2, 0.5 * s)
        }
    })
}

/// `phi_1(i tau Delta)`: symbol `phi_1(-i tau |mu|^2)`.
pub fn phi1_multiplier(grid: SpectralGrid, tau: f64) -> Multiplier {
    Multiplier::radial(grid, |k2| phi1(Complex64::new(0.0, -tau * k2)))
}

/// Below this modulus `phi1` switches to its Taylor series.
pub const PHI1_SERIES_RADIUS: f64 = 1e-2;

/// `phi_1(z) = (e^z - 1) / z`, continuous at `z = 0`.
///
/// The quotient is evaluated with `e^z - 1 = (expm1(x) cos y - 2 sin^2(y/2)) + i e^x sin y`
/// so that moderate `|z|` does not lose digits; for `|z| < 1e-2` a degree-8
/// Taylor polynomial is used instead.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < PHI1_SERIES_RADIUS {
        // sum_{k=0}^{8} z^k / (k+1)!
        let mut acc = Complex64::new(0.0, 0.0);
        let mut denom = 1.0;
        let coeffs: [f64; 9] = core::array::from_fn(|k| {
            denom *= (k + 1) as f64;
            1.0 / denom
        });
        for c in coeffs.iter().rev() {
            acc = acc * z + *c;
        }
        return acc;
    }
    let (x, y) = (z.re, z.im);
    let (sy, cy) = libm::sincos(y);
    let half = libm::sin(0.5 * y);
    let num = Complex64::new(libm::expm1(x) * cy - 2.0 * half * half, libm::exp(x) * sy);
    num / z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::{Direction, GridFft};
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn taylor8(z: Complex64) -> Complex64 {
        let mut term = c(1.0, 0.0);
        let mut sum = term;
        for k in 1..=8 {
            term = term * z / (k + 1) as f64;
            sum += term;
        }
        sum
    }

    #[test]
    #[allow(clippy::approx_constant, clippy::excessive_precision)]
    fn phi1_reference_values() {
        assert_eq!(phi1(c(0.0, 0.0)), c(1.0, 0.0));
        // frozen from 50-digit evaluation of (e^z - 1)/z
        let cases = [
            (c(0.0, PI), c(0.0, 0.63661977236758134308)),
            (
                c(0.005, 0.003),
                c(1.0025026662446248534, 0.0015050082580039825756),
            ),
            (
                c(-0.3, 2.0),
                c(0.42536306878261272511, 0.59034011917919794661),
            ),
            (
                c(0.0, 1e-2),
                c(0.99998333341666646825, 0.0049999583334722220783),
            ),
            (
                c(0.0, -40.0),
                c(0.018627829011983719675, -0.04167345154130654611),
            ),
        ];
        for (z, expect) in cases {
            let got = phi1(z);
            assert!(
                (got - expect).norm() < 2e-16 * expect.norm().max(1.0),
                "{z}: {got}"
            );
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn phi1_tiny_argument_matches_series() {
        let z = c(0.0, -1e-9);
        let got = phi1(z);
        assert!((got - taylor8(z)).norm() < 1e-15);
        assert!((got - c(0.99999999999999999983, -5.000000000000000311e-10)).norm() < 1e-16);
    }

    #[test]
    fn phi1_branches_agree_at_switch() {
        for k in 0..32 {
            let theta = 2.0 * PI * k as f64 / 32.0;
            let z = Complex64::from_polar(PHI1_SERIES_RADIUS, theta);
            let series = taylor8(z);
            let quotient = phi1(z * (1.0 + 1e-12));
            assert!((series - quotient).norm() < 1e-14);
        }
    }

    #[test]
    fn phi1_on_imaginary_axis_is_bounded() {
        let mut x = -200.0;
        while x < 200.0 {
            let v = phi1(c(0.0, x));
            assert!(v.norm() <= 1.0 + 1e-15, "x={x}");
            let expect = if x == 0.0 {
                1.0
            } else {
                (2.0 * libm::sin(0.5 * x) / x).abs()
            };
            assert!((v.norm() - expect).abs() < 1e-14);
            x += 0.0137;
        }
    }

    #[test]
    fn sobolev_weight_values() {
        let g = SpectralGrid::new(2, 1.0, 4).unwrap();
        assert_eq!(sobolev_weight(g, 0.0), Multiplier::identity(g));
        let w = sobolev_weight(g, 2.0);
        assert_eq!(w.symbol()[0], c(1.0, 0.0));
        // slot (1, 0): mu = (pi, 0)
        let w1 = sobolev_weight(g, 1.0);
        let v = w1.symbol()[g.flatten([1, 0, 0])].re;
        assert!((v - libm::sqrt(1.0 + PI * PI)).abs() < 1e-15);
        assert!((v - 3.2969).abs() < 1e-4);
    }

    #[test]
    fn propagator_semigroup_and_inverse() {
        let g = SpectralGrid::new(2, 3.0, 16).unwrap();
        let tau = 0.0371;
        let once = laplacian_propagator(g, 2.0 * tau);
        let twice = laplacian_propagator(g, tau)
            .compose(&laplacian_propagator(g, tau))
            .unwrap();
        for (a, b) in once.symbol().iter().zip(twice.symbol()) {
            assert!((a - b).norm() < 1e-14);
        }
        let id = laplacian_propagator(g, tau)
            .compose(&laplacian_propagator(g, -tau))
            .unwrap();
        for s in id.symbol() {
            assert!((s - c(1.0, 0.0)).norm() < 1e-14);
        }
        assert_eq!(laplacian_propagator(g, 0.0), Multiplier::identity(g));
        assert!(laplacian_propagator(g, 1.7)
            .symbol()
            .iter()
            .all(|s| (s.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn apply_checks_space_and_grid() {
        let g = SpectralGrid::new(1, 1.0, 8).unwrap();
        let m = Multiplier::identity(g);
        assert!(m.apply(Field::zeros(g, Space::Physical)).is_err());
        let other = SpectralGrid::new(1, 1.0, 16).unwrap();
        assert!(m.apply(Field::zeros(other, Space::Fourier)).is_err());
    }

    #[test]
    fn identity_is_bitwise_and_zero_kills() {
        let g = SpectralGrid::new(1, 2.0, 12).unwrap();
        let f = Field::from_fn(g, |x| c(libm::cos(x[0]), libm::sin(3.0 * x[0])));
        let fh = GridFft::portable(g)
            .transform(f, Direction::Forward)
            .unwrap();
        assert_eq!(Multiplier::identity(g).apply(fh.clone()).unwrap(), fh);
        let z = Multiplier::zero(g).apply(fh).unwrap();
        assert!(z.values().iter().all(|v| *v == c(0.0, 0.0)));
    }
}
