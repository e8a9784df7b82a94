use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

/// Which representation a [`Field`] currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Physical,
    Fourier,
}

/// Complex samples (or coefficients) on a grid, flat and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    values: Vec<Complex64>,
    space: Space,
}

impl Field {
    pub fn new(grid: SpectralGrid, values: Vec<Complex64>, space: Space) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage("value count does not match grid size"));
        }
        Ok(Self {
            grid,
            values,
            space,
        })
    }

    pub fn zeros(grid: SpectralGrid, space: Space) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            space,
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn<F>(grid: SpectralGrid, mut f: F) -> Self
    where
        F: FnMut([f64; 3]) -> Complex64,
    {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self {
            grid,
            values,
            space: Space::Physical,
        }
    }

    /// Real samples `f(x)` at every grid point.
    pub fn from_real_fn<F>(grid: SpectralGrid, mut f: F) -> Self
    where
        F: FnMut([f64; 3]) -> f64,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    #[inline]
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn set_space(&mut self, space: Space) {
        self.space = space;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Usage("fields live on different grids"));
        }
        if self.space != other.space {
            return Err(Error::Usage("fields are in different spaces"));
        }
        Ok(())
    }

    /// `self + other`.
    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product; only meaningful in physical space.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: Complex64, other: &Field, b: Complex64) -> Result<Field> {
        self.zip_with(other, |x, y| a * x + b * y)
    }

    pub fn scale(&self, s: Complex64) -> Field {
        self.map(|v| v * s)
    }

    pub fn map<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
            space: self.space,
        }
    }

    fn zip_with<F>(&self, other: &Field, mut f: F) -> Result<Field>
    where
        F: FnMut(Complex64, Complex64) -> Complex64,
    {
        self.check_compatible(other)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            space: self.space,
        })
    }

    /// Largest modulus over all entries.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
