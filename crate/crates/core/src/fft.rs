//! Discrete Fourier transforms on [`SpectralGrid`]s.
//!
//! Normalization: the forward transform carries no factor, the inverse
//! divides by `n^d`. Multipliers therefore act on raw coefficients and the
//! quadrature weight only shows up inside norms.
//!
//! The one-dimensional kernel is pluggable through [`Fft1d`]. The crate ships
//! [`PortableFft`] (iterative radix-2, Bluestein for other lengths) so that it
//! works without `std`; faster backends implement the same trait.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::SpectralGrid;

/// Transform direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Physical samples to Fourier coefficients.
    Forward,
    /// Fourier coefficients to physical samples.
    Inverse,
}

/// An unnormalized one-dimensional complex DFT of fixed length.
///
/// `forward` computes `X_k = sum_j x_j exp(-2 pi i j k / n)` and `backward`
/// the same sum with `+i`; neither scales. A buffer holding several
/// consecutive lines of length `len()` is transformed line by line.
pub trait Fft1d: Send + Sync {
    fn len(&self) -> usize;
    fn forward(&self, buf: &mut [Complex64]);
    fn backward(&self, buf: &mut [Complex64]);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds [`Fft1d`] kernels for a given length.
pub trait FftBackend {
    type Plan: Fft1d;
    fn plan(&self, n: usize) -> Self::Plan;
}

/// Backend producing [`PortableFft`] plans.
#[derive(Debug, Clone, Copy, Default)]
pub struct Portable;

impl FftBackend for Portable {
    type Plan = PortableFft;
    fn plan(&self, n: usize) -> PortableFft {
        PortableFft::new(n)
    }
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    // exp(-2 pi i k / n), k < n/2
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| unit_root(-(k as f64), n as f64))
            .collect();
        Self { n, twiddles }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    inner: Radix2,
    // exp(-i pi k^2 / n)
    chirp: Vec<Complex64>,
    // transforms of the wrapped conj(chirp) kernel and of its conjugate
    kernel_fwd: Vec<Complex64>,
    kernel_bwd: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k^2 mod 2n keeps the argument small for large k
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
                unit_root(-k2 / 2.0, n as f64)
            })
            .collect();
        let wrapped = |conjugate: bool| {
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            for k in 0..n {
                let c = if conjugate { chirp[k] } else { chirp[k].conj() };
                kernel[k] = c;
                if k > 0 {
                    kernel[m - k] = c;
                }
            }
            inner.process(&mut kernel, false);
            kernel
        };
        let kernel_fwd = wrapped(false);
        let kernel_bwd = wrapped(true);
        Self {
            n,
            inner,
            chirp,
            kernel_fwd,
            kernel_bwd,
        }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let m = self.inner.n;
        let chirp = |k: usize| {
            if inverse {
                self.chirp[k].conj()
            } else {
                self.chirp[k]
            }
        };
        let kernel = if inverse {
            &self.kernel_bwd
        } else {
            &self.kernel_fwd
        };
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            work[k] = buf[k] * chirp(k);
        }
        self.inner.process(&mut work, false);
        for (w, kh) in work.iter_mut().zip(kernel) {
            *w *= *kh;
        }
        self.inner.process(&mut work, true);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            buf[k] = work[k] * chirp(k) * scale;
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// Dependency-free FFT: radix-2 for powers of two, Bluestein otherwise.
#[derive(Debug, Clone)]
pub struct PortableFft {
    n: usize,
    kernel: Kernel,
}

impl PortableFft {
    pub fn new(n: usize) -> Self {
        let kernel = if n.is_power_of_two() {
            Kernel::Radix2(Radix2::new(n))
        } else {
            Kernel::Bluestein(Bluestein::new(n))
        };
        Self { n, kernel }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(
            buf.len() % self.n,
            0,
            "buffer length is not a multiple of the plan"
        );
        for line in buf.chunks_exact_mut(self.n) {
            match &self.kernel {
                Kernel::Radix2(k) => k.process(line, inverse),
                Kernel::Bluestein(k) => k.process(line, inverse),
            }
        }
    }
}

impl Fft1d for PortableFft {
    fn len(&self) -> usize {
        self.n
    }
    fn forward(&self, buf: &mut [Complex64]) {
        self.process(buf, false);
    }
    fn backward(&self, buf: &mut [Complex64]) {
        self.process(buf, true);
    }
}

/// `exp(2 pi i num / den)`, with the angle reduced before evaluation.
fn unit_root(num: f64, den: f64) -> Complex64 {
    let frac = num / den;
    let frac = frac - libm::round(frac);
    let (s, c) = libm::sincos(2.0 * PI * frac);
    Complex64::new(c, s)
}

/// Number of lines gathered together when transforming a strided axis.
const LINE_BATCH: usize = 16;

/// Multi-dimensional transform for one grid, built from a 1D kernel.
#[derive(Debug, Clone)]
pub struct GridFft<P> {
    grid: SpectralGrid,
    plan: P,
}

impl GridFft<PortableFft> {
    /// Transform backed by the built-in portable kernel.
    pub fn portable(grid: SpectralGrid) -> Self {
        Self::with_backend(grid, &Portable)
    }
}

impl<P: Fft1d> GridFft<P> {
    pub fn with_backend<B: FftBackend<Plan = P>>(grid: SpectralGrid, backend: &B) -> Self {
        let plan = backend.plan(grid.points_per_dim());
        Self { grid, plan }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Unnormalized forward transform of a raw sample array.
    pub fn forward_in_place(&self, values: &mut [Complex64]) {
        self.all_axes(values, false);
    }

    /// Inverse transform including the `1/n^d` factor.
    pub fn inverse_in_place(&self, values: &mut [Complex64]) {
        self.all_axes(values, true);
        let scale = 1.0 / self.grid.len() as f64;
        values.iter_mut().for_each(|v| *v *= scale);
    }

    /// Transforms a field and flips its space tag.
    pub fn transform(&self, mut field: Field, direction: Direction) -> Result<Field> {
        if field.grid() != &self.grid {
            return Err(Error::Usage("field grid does not match transform grid"));
        }
        match (direction, field.space()) {
            (Direction::Forward, Space::Physical) => {
                self.forward_in_place(field.values_mut());
                field.set_space(Space::Fourier);
            }
            (Direction::Inverse, Space::Fourier) => {
                self.inverse_in_place(field.values_mut());
                field.set_space(Space::Physical);
            }
            (Direction::Forward, Space::Fourier) => {
                return Err(Error::Usage(
                    "forward transform requires a physical-space field",
                ))
            }
            (Direction::Inverse, Space::Physical) => {
                return Err(Error::Usage(
                    "inverse transform requires a Fourier-space field",
                ))
            }
        }
        Ok(field)
    }

    fn all_axes(&self, values: &mut [Complex64], inverse: bool) {
        assert_eq!(
            values.len(),
            self.grid.len(),
            "array length does not match grid"
        );
        let n = self.grid.points_per_dim();
        let dim = self.grid.dim();
        let run = |lines: &mut [Complex64]| {
            if inverse {
                self.plan.backward(lines)
            } else {
                self.plan.forward(lines)
            }
        };
        // contiguous last axis
        run(values);
        if dim == 1 {
            return;
        }
        let mut batch = vec![Complex64::new(0.0, 0.0); LINE_BATCH * n];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let outer = values.len() / (stride * n);
            for o in 0..outer {
                let base = o * stride * n;
                let mut inner = 0;
                while inner < stride {
                    let width = LINE_BATCH.min(stride - inner);
                    for j in 0..n {
                        let row = &values[base + j * stride + inner..][..width];
                        for (b, v) in row.iter().enumerate() {
                            batch[b * n + j] = *v;
                        }
                    }
                    run(&mut batch[..width * n]);
                    for j in 0..n {
                        let row = &mut values[base + j * stride + inner..][..width];
                        for (b, v) in row.iter_mut().enumerate() {
                            *v = batch[b * n + j];
                        }
                    }
                    inner += width;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * unit_root(sign * ((j * k) % n) as f64, n as f64))
                    .sum()
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let t = j as f64;
                Complex64::new(libm::sin(1.3 * t + 0.2) + 0.1 * t, libm::cos(0.7 * t * t))
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_assorted_lengths() {
        for &n in &[1usize, 2, 4, 6, 8, 10, 12, 30, 64, 100] {
            let x = sample(n);
            let plan = PortableFft::new(n);
            let mut fwd = x.clone();
            plan.forward(&mut fwd);
            let mut bwd = x.clone();
            plan.backward(&mut bwd);
            let ef = naive_dft(&x, -1.0);
            let eb = naive_dft(&x, 1.0);
            for k in 0..n {
                assert!((fwd[k] - ef[k]).norm() < 1e-11, "n={n} k={k}");
                assert!((bwd[k] - eb[k]).norm() < 1e-11, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn grid_transform_round_trip_3d() {
        let grid = SpectralGrid::new(3, 2.0, 6).unwrap();
        let fft = GridFft::portable(grid);
        let x = sample(grid.len());
        let mut y = x.clone();
        fft.forward_in_place(&mut y);
        fft.inverse_in_place(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn separable_2d_transform_matches_product() {
        // f(j0, j1) = a(j0) b(j1) has transform A(k0) B(k1)
        let n = 8;
        let grid = SpectralGrid::new(2, 1.0, n).unwrap();
        let a = sample(n);
        let b: Vec<Complex64> = sample(n + 3)[3..].to_vec();
        let mut f = Vec::new();
        for x in &a {
            for y in &b {
                f.push(x * y);
            }
        }
        GridFft::portable(grid).forward_in_place(&mut f);
        let ah = naive_dft(&a, -1.0);
        let bh = naive_dft(&b, -1.0);
        for k0 in 0..n {
            for k1 in 0..n {
                assert!((f[k0 * n + k1] - ah[k0] * bh[k1]).norm() < 1e-11);
            }
        }
    }
}
