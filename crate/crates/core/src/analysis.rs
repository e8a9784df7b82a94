//! Grid norms, error samples and convergence-order fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::{Direction, Fft1d, GridFft};
use crate::field::{Field, Space};
use crate::multiplier::sobolev_weight;

/// Discrete `L^r` norm `(h^d sum |f_j|^r)^(1/r)`; `r = inf` is the grid maximum.
pub fn lp_norm(field: &Field, r: f64) -> Result<f64> {
    if field.space() != Space::Physical {
        return Err(Error::Usage("L^r norms are taken in physical space"));
    }
    if r.is_nan() || r < 1.0 {
        return Err(Error::Domain("L^r norm needs r >= 1"));
    }
    if r.is_infinite() {
        return Ok(field.max_abs());
    }
    let w = field.grid().cell_volume();
    let sum: f64 = if r == 2.0 {
        field.values().iter().map(|v| v.norm_sqr()).sum()
    } else if r == 1.0 {
        field.values().iter().map(|v| v.norm()).sum()
    } else {
        field.values().iter().map(|v| libm::pow(v.norm(), r)).sum()
    };
    Ok(libm::pow(w * sum, 1.0 / r))
}

/// `L^2` norm computed from unnormalized Fourier coefficients (Parseval).
pub fn fourier_l2_norm(field: &Field) -> Result<f64> {
    if field.space() != Space::Fourier {
        return Err(Error::Usage("expected a Fourier-space field"));
    }
    let grid = field.grid();
    let sum: f64 = field.values().iter().map(|v| v.norm_sqr()).sum();
    let n = grid.len() as f64;
    Ok(libm::sqrt(grid.volume() * sum / (n * n)))
}

/// `H^s` norm `|| <nabla>^s f ||_{L^2}`; accepts either space.
pub fn sobolev_norm<P: Fft1d>(fft: &GridFft<P>, field: &Field, s: f64) -> Result<f64> {
    let coeffs = match field.space() {
        Space::Fourier => field.clone(),
        Space::Physical => fft.transform(field.clone(), Direction::Forward)?,
    };
    fourier_l2_norm(&sobolev_weight(*field.grid(), s).apply(coeffs)?)
}

/// Discrete space-time norm `(tau sum_k ||f^k||_{L^r}^q)^(1/q)`; `q = inf` takes the sup.
pub fn spacetime_norm(samples: &[Field], q: f64, r: f64, tau: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("space-time norm of an empty sequence"));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::Domain("space-time norm needs q >= 1"));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain("space-time norm needs tau > 0"));
    }
    let norms = samples
        .iter()
        .map(|f| lp_norm(f, r))
        .collect::<Result<Vec<_>>>()?;
    if q.is_infinite() {
        return Ok(norms.into_iter().fold(0.0, f64::max));
    }
    let sum: f64 = norms.iter().map(|n| libm::pow(*n, q)).sum();
    Ok(libm::pow(tau * sum, 1.0 / q))
}

/// Strichartz admissibility: `2/q = d (1/2 - 1/r)`, `q, r` in `[2, inf]`,
/// excluding the endpoint `(2, inf, 2)`.
pub fn is_admissible(q: f64, r: f64, d: usize) -> bool {
    if !(q >= 2.0 && r >= 2.0) {
        return false;
    }
    if d == 2 && q == 2.0 && r.is_infinite() {
        return false;
    }
    let recip = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
    let lhs = 2.0 * recip(q);
    let rhs = d as f64 * (0.5 - recip(r));
    (lhs - rhs).abs() <= 1e-12
}

/// Space-time norm of the error sequence for one Strichartz pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeError {
    pub q: f64,
    pub r: f64,
    pub value: f64,
}

/// Errors of one trajectory at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    pub tau: f64,
    pub e_l2: f64,
    pub e_h1: f64,
    pub spacetime: Vec<SpacetimeError>,
}

impl ErrorSample {
    pub fn new(tau: f64, e_l2: f64, e_h1: f64) -> Self {
        Self {
            tau,
            e_l2,
            e_h1,
            spacetime: Vec::new(),
        }
    }

    pub fn error(&self, which: ErrorNorm) -> f64 {
        match which {
            ErrorNorm::L2 => self.e_l2,
            ErrorNorm::H1 => self.e_h1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    L2,
    H1,
}

/// Least-squares fit `log e = order * log tau + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub fitted_order: f64,
    pub intercept: f64,
    /// RMS deviation in log space.
    pub residual: f64,
    pub used: Vec<ErrorSample>,
    /// Samples excluded as saturated at the spatial-error floor.
    pub dropped: Vec<ErrorSample>,
}

/// Plain log-log least-squares fit over all samples.
pub fn fit_order(samples: &[ErrorSample], which: ErrorNorm) -> Result<OrderFit> {
    if samples.len() < 3 {
        return Err(Error::Domain("order fit needs at least 3 samples"));
    }
    for (i, s) in samples.iter().enumerate() {
        let e = s.error(which);
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::Domain("order fit needs positive finite errors"));
        }
        if !(s.tau > 0.0) {
            return Err(Error::Domain("order fit needs positive step sizes"));
        }
        if samples[..i].iter().any(|o| o.tau == s.tau) {
            return Err(Error::Domain("order fit needs distinct step sizes"));
        }
    }
    let xs: Vec<f64> = samples.iter().map(|s| libm::log(s.tau)).collect();
    let ys: Vec<f64> = samples.iter().map(|s| libm::log(s.error(which))).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let d = y - (slope * x + intercept);
            d * d
        })
        .sum();
    Ok(OrderFit {
        fitted_order: slope,
        intercept,
        residual: libm::sqrt(ss / m),
        used: samples.to_vec(),
        dropped: Vec::new(),
    })
}

/// Relative change below which two consecutive errors count as saturated.
pub const SATURATION_THRESHOLD: f64 = 0.05;

/// Splits samples (any order) into `(kept, dropped)` by the saturation rule.
///
/// Sorted by decreasing `tau`, the first sample whose error is within 5% of
/// the next finer one marks the floor; it and every finer sample are dropped.
pub fn split_saturated(
    samples: &[ErrorSample],
    which: ErrorNorm,
) -> (Vec<ErrorSample>, Vec<ErrorSample>) {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.tau.total_cmp(&a.tau));
    let cut = sorted
        .windows(2)
        .position(|w| {
            let (a, b) = (w[0].error(which), w[1].error(which));
            (a - b).abs() < SATURATION_THRESHOLD * a
        })
        .unwrap_or(sorted.len());
    let dropped = sorted.split_off(cut);
    (sorted, dropped)
}

/// Fit after removing samples on the spatial-error floor.
pub fn fit_order_unsaturated(samples: &[ErrorSample], which: ErrorNorm) -> Result<OrderFit> {
    let (kept, dropped) = split_saturated(samples, which);
    let mut fit = fit_order(&kept, which)?;
    fit.dropped = dropped;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralGrid;
    use num_complex::Complex64;

    fn synthetic(order: f64, c: f64) -> Vec<ErrorSample> {
        (3..10)
            .map(|k| {
                let tau = libm::pow(2.0, -(k as f64));
                let e = c * libm::pow(tau, order);
                ErrorSample::new(tau, e, 3.0 * e)
            })
            .collect()
    }

    #[test]
    fn constant_field_norms() {
        let g = SpectralGrid::new(2, 3.0, 8).unwrap();
        let one = Field::from_real_fn(g, |_| 1.0);
        for r in [1.0, 2.0, 3.5] {
            let expect = libm::pow(36.0, 1.0 / r);
            assert!((lp_norm(&one, r).unwrap() - expect).abs() < 1e-13 * expect);
        }
        assert_eq!(lp_norm(&one, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(
            lp_norm(&Field::zeros(g, Space::Physical), 2.0).unwrap(),
            0.0
        );
        assert!(lp_norm(&one, 0.5).is_err());
    }

    #[test]
    fn plane_wave_sobolev_norm() {
        let g = SpectralGrid::new(2, 2.0, 8).unwrap();
        let fft = GridFft::portable(g);
        let slot = g.flatten([1, 7, 0]);
        let mu = g.wavevector(slot);
        let f = Field::from_fn(g, |x| {
            Complex64::from_polar(1.0, mu[0] * x[0] + mu[1] * x[1])
        });
        for s in [0.0, 1.0, 2.0, -0.5] {
            let k2 = mu[0] * mu[0] + mu[1] * mu[1];
            let expect = 4.0 * libm::pow(1.0 + k2, 0.5 * s);
            let got = sobolev_norm(&fft, &f, s).unwrap();
            assert!((got - expect).abs() < 1e-13 * expect, "s={s}");
        }
        assert_eq!(
            sobolev_norm(&fft, &Field::zeros(g, Space::Physical), 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn spacetime_norm_cases() {
        let g = SpectralGrid::new(1, 1.0, 4).unwrap();
        let f = Field::from_real_fn(g, |x| 1.0 + x[0]);
        let fr = lp_norm(&f, 3.0).unwrap();
        let one = spacetime_norm(core::slice::from_ref(&f), 1.0, 3.0, 0.1).unwrap();
        assert!((one - 0.1 * fr).abs() < 1e-15);
        let seq: Vec<Field> = (0..5)
            .map(|k| f.scale(Complex64::new(k as f64, 0.0)))
            .collect();
        let sup = spacetime_norm(&seq, f64::INFINITY, 3.0, 0.1).unwrap();
        assert!((sup - 4.0 * fr).abs() < 1e-14);
        let same: Vec<Field> = (0..8).map(|_| f.clone()).collect();
        let v = spacetime_norm(&same, 4.0, 3.0, 0.125).unwrap();
        assert!((v - libm::pow(1.0, 0.25) * fr).abs() < 1e-14);
        assert!(spacetime_norm(&[], 2.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn admissible_pairs() {
        let inf = f64::INFINITY;
        assert!(is_admissible(4.0, inf, 1));
        assert!(is_admissible(2.0, 6.0, 3));
        assert!(!is_admissible(2.0, inf, 2));
        assert!(is_admissible(inf, 2.0, 3));
        assert!(!is_admissible(8.0 / 3.0, 4.0, 2));
        assert!(is_admissible(4.0, 4.0, 2));
        assert!(!is_admissible(1.0, 2.0, 1));
        assert!(!is_admissible(4.0, 4.0, 1));
    }

    #[test]
    fn fit_recovers_power_laws() {
        for order in [0.5, 1.0, 0.625] {
            let fit = fit_order(&synthetic(order, 0.7), ErrorNorm::L2).unwrap();
            assert!((fit.fitted_order - order).abs() < 1e-10);
            assert!(fit.residual < 1e-12);
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        let s = synthetic(1.0, 1.0);
        assert!(fit_order(&s[..2], ErrorNorm::L2).is_err());
        let mut z = s.clone();
        z[1].e_l2 = 0.0;
        assert!(fit_order(&z, ErrorNorm::L2).is_err());
        let mut d = s.clone();
        d[1].tau = d[0].tau;
        assert!(fit_order(&d, ErrorNorm::L2).is_err());
    }

    #[test]
    fn floor_samples_are_dropped() {
        let mut s = synthetic(1.0, 1.0);
        let floor = s[3].e_l2;
        for x in s.iter_mut().skip(4) {
            x.e_l2 = floor * 0.99;
        }
        let fit = fit_order_unsaturated(&s, ErrorNorm::L2).unwrap();
        assert_eq!(fit.used.len(), 3);
        assert_eq!(fit.dropped.len(), 4);
        assert!((fit.fitted_order - 1.0).abs() < 1e-10);
    }
}
