//! Singular and bounded potentials, and the regularity bookkeeping that
//! maps an `L^p` class to the predicted convergence order.

use alloc::vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{Direction, Fft1d, GridFft};
use crate::field::{Field, Space};
use crate::grid::SpectralGrid;

/// Declarative description of `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    None,
    /// Truncated periodic Dirac comb `(1/2L) sum_{|l| <= n_ref} exp(i mu_l x)`, 1D only.
    DeltaSeries1D {
        n_ref: usize,
    },
    /// `(2L)^-d sum_{l != 0} |mu_l|^-gamma exp(i mu_l . x)` over the grid modes.
    PowerSymbol {
        gamma: f64,
    },
    /// `exp(-|x|^2 / width^2)`, smooth and bounded.
    GaussianWell {
        width: f64,
    },
}

/// Potential kind together with its amplitude (`-1` reproduces the usual attractive sign).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub amplitude: f64,
}

impl PotentialSpec {
    pub const NONE: PotentialSpec = PotentialSpec {
        kind: PotentialKind::None,
        amplitude: 0.0,
    };

    pub fn delta(n_ref: usize) -> Self {
        Self {
            kind: PotentialKind::DeltaSeries1D { n_ref },
            amplitude: -1.0,
        }
    }

    pub fn power(gamma: f64) -> Self {
        Self {
            kind: PotentialKind::PowerSymbol { gamma },
            amplitude: -1.0,
        }
    }

    pub fn gaussian_well(width: f64) -> Self {
        Self {
            kind: PotentialKind::GaussianWell { width },
            amplitude: -1.0,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        match self.kind {
            PotentialKind::None => Ok(()),
            PotentialKind::DeltaSeries1D { n_ref } => {
                if grid.dim() != 1 {
                    Err(Error::Usage("delta series potential needs a 1D grid"))
                } else if n_ref == 0 {
                    Err(Error::Config("delta series truncation must be >= 1"))
                } else {
                    Ok(())
                }
            }
            PotentialKind::PowerSymbol { gamma } => {
                if grid.dim() == 1 {
                    Err(Error::Usage("power-symbol potential needs a 2D or 3D grid"))
                } else if !(gamma > 0.0 && gamma.is_finite()) {
                    Err(Error::Config(
                        "power-symbol exponent gamma must be positive",
                    ))
                } else {
                    Ok(())
                }
            }
            PotentialKind::GaussianWell { width } => {
                if width > 0.0 && width.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config("Gaussian well width must be positive"))
                }
            }
        }
    }

    /// Samples the potential on the grid (physical space).
    pub fn synthesize<P: Fft1d>(&self, fft: &GridFft<P>) -> Result<Field> {
        let grid = *fft.grid();
        self.validate(&grid)?;
        match self.kind {
            PotentialKind::None => Ok(Field::zeros(grid, Space::Physical)),
            PotentialKind::DeltaSeries1D { n_ref } => {
                synth_delta_potential(fft, n_ref, self.amplitude)
            }
            PotentialKind::PowerSymbol { gamma } => {
                synth_power_potential(fft, gamma, self.amplitude)
            }
            PotentialKind::GaussianWell { width } => Ok(gaussian_well(grid, width, self.amplitude)),
        }
    }
}

/// `amplitude/(2L) sum_{|l| <= n_ref} exp(i mu_l x_j)` on a 1D grid.
///
/// Modes beyond the grid are folded onto their alias `l mod n`, which is
/// exact at the grid points.
pub fn synth_delta_potential<P: Fft1d>(
    fft: &GridFft<P>,
    n_ref: usize,
    amplitude: f64,
) -> Result<Field> {
    let grid = *fft.grid();
    if grid.dim() != 1 {
        return Err(Error::Usage("delta series potential needs a 1D grid"));
    }
    if n_ref == 0 {
        return Err(Error::Config("delta series truncation must be >= 1"));
    }
    let n = grid.points_per_dim();
    let mut counts = vec![0u64; n];
    let n_ref = n_ref as i64;
    for l in -n_ref..=n_ref {
        counts[grid.slot_of(l)] += 1;
    }
    // DFT coefficient is n times the Fourier-series coefficient
    let c = amplitude / (2.0 * grid.half_width()) * n as f64;
    let coeffs = counts
        .into_iter()
        .map(|k| Complex64::new(c * k as f64, 0.0))
        .collect();
    let field = Field::new(grid, coeffs, Space::Fourier)?;
    fft.transform(field, Direction::Inverse)
}

/// `amplitude (2L)^-d sum_{l != 0} |mu_l|^-gamma exp(i mu_l . x)` over the grid's modes.
pub fn synth_power_potential<P: Fft1d>(
    fft: &GridFft<P>,
    gamma: f64,
    amplitude: f64,
) -> Result<Field> {
    let grid = *fft.grid();
    if grid.dim() == 1 {
        return Err(Error::Usage("power-symbol potential needs a 2D or 3D grid"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Config(
            "power-symbol exponent gamma must be positive",
        ));
    }
    let c = amplitude / grid.volume() * grid.len() as f64;
    let coeffs = grid
        .wavenumbers_sq()
        .into_iter()
        .map(|k2| {
            if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(c * libm::pow(k2, -0.5 * gamma), 0.0)
            }
        })
        .collect();
    let field = Field::new(grid, coeffs, Space::Fourier)?;
    fft.transform(field, Direction::Inverse)
}

/// `amplitude * exp(-|x|^2 / width^2)`.
pub fn gaussian_well(grid: SpectralGrid, width: f64, amplitude: f64) -> Field {
    let inv = 1.0 / (width * width);
    Field::from_real_fn(grid, |x| {
        amplitude * libm::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * inv)
    })
}

/// Closed-form Dirichlet kernel `-(1/2L) sin((2N+1) pi x / 2L) / sin(pi x / 2L)`
/// scaled by `amplitude`; the value at `x = 0` is `(2N+1)/(2L)`.
pub fn dirichlet_kernel(x: f64, half_width: f64, n_ref: usize, amplitude: f64) -> f64 {
    let m = (2 * n_ref + 1) as f64;
    let theta = core::f64::consts::PI * x / (2.0 * half_width);
    let s = libm::sin(theta);
    let v = if s.abs() < 1e-300 {
        m
    } else {
        libm::sin(m * theta) / s
    };
    amplitude * v / (2.0 * half_width)
}

/// `alpha(p)` with a flag for the `1/2^+` endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha {
    pub value: f64,
    /// The exponent is an open lower bound (`value^+`).
    pub endpoint_plus: bool,
}

/// Predicted `L^2` order with a flag for the `^-` loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedOrder {
    pub value: f64,
    /// The rate holds only up to an arbitrarily small loss (`value^-`).
    pub strict_minus: bool,
}

fn check_class(p: f64, d: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(Error::Domain("dimension must be 1, 2 or 3"));
    }
    if p.is_nan() || p < 1.0 || p <= d as f64 / 2.0 {
        return Err(Error::Domain("potential class needs p >= 1 and p > d/2"));
    }
    Ok(())
}

/// Regularity loss `alpha(p)`: the solution lives in `H^{2 - alpha}`.
pub fn alpha_of(p: f64, d: usize) -> Result<Alpha> {
    check_class(p, d)?;
    if p >= 2.0 {
        return Ok(Alpha {
            value: 0.0,
            endpoint_plus: false,
        });
    }
    if d == 1 {
        if p == 1.0 {
            return Ok(Alpha {
                value: 0.5,
                endpoint_plus: true,
            });
        }
        return Ok(Alpha {
            value: 1.0 / p - 0.5,
            endpoint_plus: false,
        });
    }
    Ok(Alpha {
        value: d as f64 * (1.0 / p - 0.5),
        endpoint_plus: false,
    })
}

/// Predicted `L^2` convergence order for `V` in `L^p + L^inf` in dimension `d`.
pub fn predicted_order(p: f64, d: usize) -> Result<PredictedOrder> {
    let alpha = alpha_of(p, d)?;
    if p > 2.0 {
        return Ok(PredictedOrder {
            value: 1.0,
            strict_minus: false,
        });
    }
    Ok(match d {
        1 if p == 1.0 => PredictedOrder {
            value: 0.5,
            strict_minus: true,
        },
        1 => PredictedOrder {
            value: 1.0 - alpha.value,
            strict_minus: false,
        },
        2 => PredictedOrder {
            value: 1.0 - alpha.value,
            strict_minus: true,
        },
        _ => PredictedOrder {
            value: 1.0 - 1.5 * alpha.value,
            strict_minus: true,
        },
    })
}

/// `H^1` order: the `L^2` order reduced by 1/2 when it exceeds 1/2.
pub fn predicted_h1_order(p: f64, d: usize) -> Result<Option<PredictedOrder>> {
    let l2 = predicted_order(p, d)?;
    Ok((l2.value > 0.5).then_some(PredictedOrder {
        value: l2.value - 0.5,
        strict_minus: l2.strict_minus,
    }))
}

/// Critical Lebesgue exponent `d / (d - gamma)` of the power-symbol potential,
/// which behaves like `|x|^{gamma - d}` near the origin (so `V` is in `L^{p^-}`).
pub fn power_potential_exponent(gamma: f64, d: usize) -> f64 {
    let d = d as f64;
    if gamma >= d {
        f64::INFINITY
    } else {
        d / (d - gamma)
    }
}

/// Validated `(p, d)` class with its `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityClass {
    pub p: f64,
    pub d: usize,
    pub alpha: Alpha,
}

impl RegularityClass {
    pub fn new(p: f64, d: usize) -> Result<Self> {
        Ok(Self {
            p,
            d,
            alpha: alpha_of(p, d)?,
        })
    }

    pub fn predicted_order(&self) -> PredictedOrder {
        predicted_order(self.p, self.d).expect("validated at construction")
    }
}

/// Admissible window for the power `sigma` of `|psi|^{2 sigma} psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaWindow {
    /// Exclusive lower bound `(1 - alpha)/2`.
    pub lower: f64,
    /// Exclusive upper bound, if any.
    pub upper: Option<f64>,
    pub satisfied: bool,
}

pub fn sigma_window(p: f64, d: usize, sigma: f64) -> Result<SigmaWindow> {
    let alpha = alpha_of(p, d)?;
    let lower = 0.5 * (1.0 - alpha.value);
    let upper = match d {
        2 if p < 4.0 / 3.0 => Some(3.0 / (4.0 - 3.0 * p)),
        3 if p < 9.0 / 5.0 => Some(3.0 / (18.0 - 10.0 * p)),
        _ => None,
    };
    let satisfied = sigma > lower && upper.is_none_or(|u| sigma < u);
    Ok(SigmaWindow {
        lower,
        upper,
        satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_at_origin() {
        let g = SpectralGrid::new(1, 16.0, 64).unwrap();
        let fft = GridFft::portable(g);
        let v = synth_delta_potential(&fft, 2, -1.0).unwrap();
        assert!((v.values()[0].re + 5.0 / 32.0).abs() < 1e-15);
        assert!((v.values()[0].re + 0.15625).abs() < 1e-15);
    }

    #[test]
    fn delta_matches_dirichlet_kernel() {
        for &(n, n_ref) in &[(64usize, 5usize), (64, 100), (256, 1 << 12), (30, 47)] {
            let g = SpectralGrid::new(1, 16.0, n).unwrap();
            let fft = GridFft::portable(g);
            let v = synth_delta_potential(&fft, n_ref, -1.0).unwrap();
            assert!(v.max_imag() <= 1e-13);
            for (j, val) in v.values().iter().enumerate() {
                let expect = dirichlet_kernel(g.coordinate(j), 16.0, n_ref, -1.0);
                assert!(
                    (val.re - expect).abs() < 1e-12 * expect.abs().max(1.0),
                    "n={n} j={j}"
                );
            }
        }
    }

    #[test]
    fn delta_needs_1d() {
        let g = SpectralGrid::new(2, 1.0, 8).unwrap();
        assert!(synth_delta_potential(&GridFft::portable(g), 3, -1.0).is_err());
        let g1 = SpectralGrid::new(1, 1.0, 8).unwrap();
        assert!(synth_delta_potential(&GridFft::portable(g1), 0, -1.0).is_err());
    }

    #[test]
    fn power_potential_real_even_and_mean_free() {
        for (dim, gamma) in [(2usize, 0.5), (3, 1.5), (3, 1.25)] {
            let g = SpectralGrid::new(dim, 8.0, 16).unwrap();
            let fft = GridFft::portable(g);
            let v = synth_power_potential(&fft, gamma, -1.0).unwrap();
            assert!(v.max_imag() <= 1e-12 * v.max_abs());
            let mean: f64 = v.values().iter().map(|z| z.re).sum();
            assert!(mean.abs() < 1e-10 * v.max_abs());
            let n = g.points_per_dim();
            for flat in 0..g.len() {
                let s = g.unflatten(flat);
                let mut m = [0usize; 3];
                for a in 0..dim {
                    m[a] = (n - s[a]) % n;
                }
                let mirrored = v.values()[g.flatten(m)];
                assert!((mirrored - v.values()[flat]).norm() < 1e-12 * v.max_abs());
            }
            // most negative at the origin
            let min = v
                .values()
                .iter()
                .map(|z| z.re)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(v.values()[0].re, min);
        }
        let g1 = SpectralGrid::new(1, 8.0, 16).unwrap();
        assert!(synth_power_potential(&GridFft::portable(g1), 0.5, -1.0).is_err());
    }

    #[test]
    fn power_potential_coefficients() {
        let g = SpectralGrid::new(2, 8.0, 8).unwrap();
        let fft = GridFft::portable(g);
        let v = synth_power_potential(&fft, 0.5, -1.0).unwrap();
        let vh = fft.transform(v, Direction::Forward).unwrap();
        assert!(vh.values()[0].norm() < 1e-12);
        let slot = g.flatten([1, 2, 0]);
        let mu = g.wavevector(slot);
        let k = libm::sqrt(mu[0] * mu[0] + mu[1] * mu[1]);
        let expect = -libm::pow(k, -0.5) / 256.0 * 64.0;
        assert!((vh.values()[slot].re - expect).abs() < 1e-12);
    }

    #[test]
    fn alpha_table() {
        assert_eq!(alpha_of(2.0, 3).unwrap().value, 0.0);
        assert!((alpha_of(12.0 / 7.0, 3).unwrap().value - 0.25).abs() < 1e-15);
        let a = alpha_of(1.0, 1).unwrap();
        assert_eq!(a.value, 0.5);
        assert!(a.endpoint_plus);
        assert!((alpha_of(4.0 / 3.0, 2).unwrap().value - 0.5).abs() < 1e-15);
        assert!((alpha_of(1.5, 1).unwrap().value - (2.0 / 3.0 - 0.5)).abs() < 1e-15);
        assert_eq!(alpha_of(f64::INFINITY, 2).unwrap().value, 0.0);
        assert!(alpha_of(1.5, 3).is_err());
        assert!(alpha_of(1.0, 2).is_err());
        assert!(alpha_of(0.9, 1).is_err());
    }

    #[test]
    fn predicted_order_table() {
        assert_eq!(predicted_order(3.0, 3).unwrap().value, 1.0);
        let p = predicted_order(12.0 / 7.0, 3).unwrap();
        assert!((p.value - 0.625).abs() < 1e-15);
        assert!(p.strict_minus);
        let p = predicted_order(4.0 / 3.0, 2).unwrap();
        assert!((p.value - 0.5).abs() < 1e-15);
        assert!(p.strict_minus);
        let p = predicted_order(1.0, 1).unwrap();
        assert_eq!(p.value, 0.5);
        assert!(p.strict_minus);
        assert_eq!(predicted_order(2.0, 1).unwrap().value, 1.0);
        assert_eq!(predicted_h1_order(3.0, 2).unwrap().unwrap().value, 0.5);
        assert!(predicted_h1_order(1.0, 1).unwrap().is_none());
    }

    #[test]
    fn monotone_in_p() {
        for d in 1..=3usize {
            let lo = (d as f64 / 2.0).max(1.0);
            let mut prev_alpha = f64::INFINITY;
            let mut prev_order = f64::NEG_INFINITY;
            for i in 0..400 {
                let p = lo + 1e-6 + i as f64 * 0.01;
                if d > 1 && p <= lo {
                    continue;
                }
                let a = alpha_of(p, d).unwrap().value;
                let o = predicted_order(p, d).unwrap().value;
                assert!(a <= prev_alpha + 1e-15);
                assert!(o >= prev_order - 1e-15);
                prev_alpha = a;
                prev_order = o;
            }
        }
    }

    #[test]
    fn power_exponents() {
        assert!((power_potential_exponent(0.5, 2) - 4.0 / 3.0).abs() < 1e-15);
        assert!((power_potential_exponent(1.5, 3) - 2.0).abs() < 1e-15);
        assert!((power_potential_exponent(1.25, 3) - 12.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_windows() {
        let w = sigma_window(f64::INFINITY, 1, 1.0).unwrap();
        assert!(w.satisfied);
        assert_eq!(w.lower, 0.5);
        let w = sigma_window(1.2, 2, 1.0).unwrap();
        assert!((w.upper.unwrap() - 3.0 / (4.0 - 3.6)).abs() < 1e-12);
        let w = sigma_window(12.0 / 7.0, 3, 1.0).unwrap();
        let upper = 3.0 / (18.0 - 10.0 * 12.0 / 7.0);
        assert!((w.upper.unwrap() - upper).abs() < 1e-12);
        assert_eq!(w.satisfied, 1.0 < upper);
        assert!(!sigma_window(2.0, 3, 0.3).unwrap().satisfied);
    }
}
