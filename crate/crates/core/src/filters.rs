//! Low-pass filter `Pi_tau` and Littlewood-Paley projections.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_core::RngCore;

use crate::analysis::lp_norm;
use crate::error::{Error, Result};
use crate::fft::{Fft1d, GridFft};
use crate::field::{Field, Space};
use crate::grid::SpectralGrid;
use crate::multiplier::Multiplier;

/// Radial cutoff `chi`: 1 on `[0, 1]`, 0 on `[2, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutoffProfile {
    /// Indicator of `[0, 1]`.
    #[default]
    Sharp,
    /// C-infinity monotone transition on `(1, 2)`.
    Smooth,
}

impl CutoffProfile {
    /// `chi(r)` for `r >= 0`.
    pub fn chi(self, r: f64) -> f64 {
        match self {
            CutoffProfile::Sharp => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffProfile::Smooth => {
                if r <= 1.0 {
                    1.0
                } else if r >= 2.0 {
                    0.0
                } else {
                    let a = bump(2.0 - r);
                    let b = bump(r - 1.0);
                    a / (a + b)
                }
            }
        }
    }
}

// exp(-1/s) for s > 0, else 0
fn bump(s: f64) -> f64 {
    if s > 0.0 {
        libm::exp(-1.0 / s)
    } else {
        0.0
    }
}

/// Dyadic frequency scale `N >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DyadicScale(f64);

impl DyadicScale {
    pub fn new(n: f64) -> Result<Self> {
        if n.is_finite() && n >= 1.0 {
            Ok(Self(n))
        } else {
            Err(Error::Domain("dyadic scale must be a finite number >= 1"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1, 2, 4, ...` up to the first power of two at or above the grid Nyquist.
    pub fn sweep(grid: &SpectralGrid) -> Vec<DyadicScale> {
        let nyq = grid.nyquist();
        let mut out = Vec::new();
        let mut m = 1.0;
        loop {
            out.push(DyadicScale(m));
            if m >= nyq {
                break;
            }
            m *= 2.0;
        }
        out
    }
}

/// Filter cutoff `N_tau = tau^(-1/2)`.
pub fn cutoff_frequency(tau: f64) -> f64 {
    1.0 / libm::sqrt(tau)
}

/// `Pi_tau`: symbol `chi(tau^(1/2) |mu|)`.
pub fn filter_pi_tau(grid: SpectralGrid, tau: f64, profile: CutoffProfile) -> Result<Multiplier> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Domain("filter step size must be positive"));
    }
    let s = libm::sqrt(tau);
    Ok(Multiplier::radial_real(grid, |k2| {
        profile.chi(s * libm::sqrt(k2))
    }))
}

/// Whether `Pi_tau` keeps every mode of the grid.
pub fn filter_is_identity(grid: &SpectralGrid, tau: f64, profile: CutoffProfile) -> bool {
    let max_k = libm::sqrt(grid.dim() as f64) * grid.nyquist();
    profile.chi(libm::sqrt(tau) * max_k) == 1.0
}

/// Which Littlewood-Paley piece to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    /// `P_N`, symbol `chi(mu / 2N) - chi(mu / N)`.
    Band,
    /// `P_{<N}`, symbol `chi(mu / N)`.
    Below,
    /// `P_{>N} = I - P_{<N}`.
    Above,
}

pub fn dyadic_projection(
    grid: SpectralGrid,
    scale: DyadicScale,
    kind: ProjectionKind,
    profile: CutoffProfile,
) -> Multiplier {
    let n = scale.get();
    Multiplier::radial_real(grid, |k2| {
        let k = libm::sqrt(k2);
        let below = profile.chi(k / n);
        match kind {
            ProjectionKind::Below => below,
            ProjectionKind::Above => 1.0 - below,
            ProjectionKind::Band => profile.chi(k / (2.0 * n)) - below,
        }
    })
}

/// Largest `|P_{<1} + sum_M P_M - 1|` over the grid's symbols.
pub fn partition_residue(grid: SpectralGrid, profile: CutoffProfile) -> f64 {
    let one = DyadicScale(1.0);
    let mut total: Vec<f64> = dyadic_projection(grid, one, ProjectionKind::Below, profile)
        .symbol()
        .iter()
        .map(|s| s.re)
        .collect();
    for m in DyadicScale::sweep(&grid) {
        let band = dyadic_projection(grid, m, ProjectionKind::Band, profile);
        total
            .iter_mut()
            .zip(band.symbol())
            .for_each(|(t, b)| *t += b.re);
    }
    total.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
}

/// Parameters of a Bernstein-inequality probe.
#[derive(Debug, Clone, Copy)]
pub struct BernsteinProbe {
    pub scale: DyadicScale,
    /// Target exponent `p` (may be infinite).
    pub p: f64,
    /// Source exponent `q <= p`.
    pub q: f64,
    pub trials: usize,
    pub profile: CutoffProfile,
    /// Random test fields have coefficients on `|mu| <= support`.
    pub support: f64,
    /// Use nonnegative real coefficients. Such fields peak coherently at the
    /// origin and nearly attain the inequality; signed ones do not.
    pub coherent: bool,
}

/// Measured ratios `||P_{<N} phi||_p / (N^{d(1/q - 1/p)} ||phi||_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinReport {
    pub scale: f64,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Samples random band-limited fields and reports the Bernstein ratios.
pub fn bernstein_check<P: Fft1d, R: RngCore>(
    fft: &GridFft<P>,
    probe: &BernsteinProbe,
    rng: &mut R,
) -> Result<BernsteinReport> {
    if !(probe.q >= 1.0 && probe.p >= probe.q) {
        return Err(Error::Usage("Bernstein probe needs 1 <= q <= p"));
    }
    if probe.trials == 0 {
        return Err(Error::Usage("Bernstein probe needs at least one trial"));
    }
    let grid = *fft.grid();
    let n = probe.scale.get();
    let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
    let gain = libm::pow(n, grid.dim() as f64 * (inv(probe.q) - inv(probe.p)));
    let proj = dyadic_projection(grid, probe.scale, ProjectionKind::Below, probe.profile);
    let mut ratios = Vec::with_capacity(probe.trials);
    for _ in 0..probe.trials {
        let mut coeffs = random_band_limited(&grid, probe.support, rng);
        if probe.coherent {
            coeffs = coeffs.map(|c| Complex64::new(c.norm(), 0.0));
        }
        let phi = fft.transform(coeffs.clone(), crate::fft::Direction::Inverse)?;
        let low = fft.transform(proj.apply(coeffs)?, crate::fft::Direction::Inverse)?;
        let denom = gain * lp_norm(&phi, probe.q)?;
        if denom > 0.0 {
            ratios.push(lp_norm(&low, probe.p)? / denom);
        }
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(BernsteinReport {
        scale: n,
        ratios,
        max_ratio,
    })
}

/// Fourier-space field with independent uniform coefficients in the unit
/// square on `|mu| <= support` and zeros elsewhere.
pub fn random_band_limited<R: RngCore>(grid: &SpectralGrid, support: f64, rng: &mut R) -> Field {
    let k2max = support * support;
    let values = grid
        .wavenumbers_sq()
        .into_iter()
        .map(|k2| {
            if k2 <= k2max {
                Complex64::new(uniform_signed(rng), uniform_signed(rng))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Field::new(*grid, values, Space::Fourier).expect("length matches grid")
}

/// Uniform sample in `[-1, 1)` from 53 random bits.
pub fn uniform_signed<R: RngCore>(rng: &mut R) -> f64 {
    let bits = rng.next_u64() >> 11;
    2.0 * (bits as f64 / (1u64 << 53) as f64) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::Direction;
    use crate::multiplier::homogeneous_weight;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chi_profile_shape() {
        for profile in [CutoffProfile::Sharp, CutoffProfile::Smooth] {
            assert_eq!(profile.chi(0.0), 1.0);
            assert_eq!(profile.chi(1.0), 1.0);
            assert_eq!(profile.chi(2.0), 0.0);
            assert_eq!(profile.chi(7.5), 0.0);
            let mut prev = 1.0;
            for i in 0..=400 {
                let v = profile.chi(i as f64 * 0.00625);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev);
                prev = v;
            }
        }
        let mid = CutoffProfile::Smooth.chi(1.5);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn filter_extreme_regimes() {
        let g = SpectralGrid::new(1, 16.0, 64).unwrap();
        // smallest nonzero |mu| = pi/16 ~ 0.196; cutoff 0.1 keeps only the zero mode
        let pi = filter_pi_tau(g, 100.0, CutoffProfile::Sharp).unwrap();
        for (k, s) in pi.symbol().iter().enumerate() {
            assert_eq!(s.re, if k == 0 { 1.0 } else { 0.0 });
        }
        // max |mu| = 2 pi; tau small enough that the cutoff exceeds it
        let tau = 1e-3;
        assert!(filter_is_identity(&g, tau, CutoffProfile::Smooth));
        assert_eq!(
            filter_pi_tau(g, tau, CutoffProfile::Smooth).unwrap(),
            Multiplier::identity(g)
        );
        assert!(filter_pi_tau(g, 0.0, CutoffProfile::Sharp).is_err());
    }

    #[test]
    fn quarter_step_composition_is_exact() {
        let g = SpectralGrid::new(2, 4.0, 64).unwrap();
        for profile in [CutoffProfile::Sharp, CutoffProfile::Smooth] {
            for &tau in &[0.5, 0.1, 0.037, 0.01] {
                let a = filter_pi_tau(g, tau, profile).unwrap();
                let b = filter_pi_tau(g, tau / 4.0, profile).unwrap();
                assert_eq!(a.compose(&b).unwrap(), a);
                assert_eq!(b.compose(&a).unwrap(), a);
            }
        }
    }

    #[test]
    fn sharp_filter_is_idempotent() {
        let g = SpectralGrid::new(3, 2.0, 16).unwrap();
        let a = filter_pi_tau(g, 0.05, CutoffProfile::Sharp).unwrap();
        assert_eq!(a.compose(&a).unwrap(), a);
    }

    #[test]
    fn partition_of_unity() {
        for dim in 1..=3 {
            let g = SpectralGrid::new(dim, 3.0, 32).unwrap();
            assert_eq!(partition_residue(g, CutoffProfile::Sharp), 0.0);
            assert!(partition_residue(g, CutoffProfile::Smooth) <= 1e-14);
        }
    }

    #[test]
    fn band_support() {
        let g = SpectralGrid::new(1, 1.0, 128).unwrap();
        for profile in [CutoffProfile::Sharp, CutoffProfile::Smooth] {
            let n = DyadicScale::new(8.0).unwrap();
            let band = dyadic_projection(g, n, ProjectionKind::Band, profile);
            for (k, s) in g.wavenumbers().iter().zip(band.symbol()) {
                if *k <= 8.0 || *k >= 32.0 {
                    assert_eq!(s.re, 0.0, "|mu|={k}");
                }
            }
        }
        // Band(N) at |mu| = N/2 vanishes: mu = 2 pi on a unit box with N = 4 pi
        let n = DyadicScale::new(4.0 * core::f64::consts::PI).unwrap();
        let band = dyadic_projection(g, n, ProjectionKind::Band, CutoffProfile::Smooth);
        assert_eq!(band.symbol()[2].re, 0.0);
        assert!(DyadicScale::new(0.5).is_err());
    }

    #[test]
    fn above_annihilates_band_limited_fields() {
        let g = SpectralGrid::new(2, 5.0, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = DyadicScale::new(4.0).unwrap();
        let f = random_band_limited(&g, 4.0, &mut rng);
        for profile in [CutoffProfile::Sharp, CutoffProfile::Smooth] {
            let out = dyadic_projection(g, n, ProjectionKind::Above, profile)
                .apply(f.clone())
                .unwrap();
            assert!(out.values().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn high_frequency_tail_bound() {
        // ||P_{>N} phi||_2 <= N^-g || |nabla|^g phi ||_2 for the sharp cut
        let g = SpectralGrid::new(2, 4.0, 32).unwrap();
        let fft = GridFft::portable(g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = DyadicScale::new(4.0).unwrap();
        for gamma in [1.0, 2.0] {
            for _ in 0..5 {
                let f = random_band_limited(&g, 1e9, &mut rng);
                let tail = dyadic_projection(g, n, ProjectionKind::Above, CutoffProfile::Sharp)
                    .apply(f.clone())
                    .unwrap();
                let grad = homogeneous_weight(g, gamma).apply(f).unwrap();
                let lhs = lp_norm(&fft.transform(tail, Direction::Inverse).unwrap(), 2.0).unwrap();
                let rhs = libm::pow(4.0, -gamma)
                    * lp_norm(&fft.transform(grad, Direction::Inverse).unwrap(), 2.0).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn bernstein_identity_case() {
        let g = SpectralGrid::new(1, 8.0, 256).unwrap();
        let fft = GridFft::portable(g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probe = BernsteinProbe {
            scale: DyadicScale::new(16.0).unwrap(),
            p: 2.0,
            q: 2.0,
            trials: 8,
            profile: CutoffProfile::Sharp,
            support: 15.9,
            coherent: false,
        };
        let report = bernstein_check(&fft, &probe, &mut rng).unwrap();
        assert!(report.max_ratio <= 1.0 + 1e-12);
        assert!(report.max_ratio >= 1.0 - 1e-12);
        let bad = BernsteinProbe {
            p: 1.0,
            q: 2.0,
            ..probe
        };
        assert!(bernstein_check(&fft, &bad, &mut rng).is_err());
    }
}
