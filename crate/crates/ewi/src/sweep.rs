//! Convergence sweeps: one trajectory per step size against a common reference.

use std::time::{Duration, Instant};

use ewi_core::analysis::{
    fit_order_unsaturated, lp_norm, sobolev_norm, ErrorNorm, ErrorSample, OrderFit,
};
use ewi_core::integrator::{reference_solution, run, SchrodingerProblem};
use ewi_core::potentials::{
    alpha_of, predicted_h1_order, predicted_order, sigma_window, Alpha, PredictedOrder,
};
use ewi_core::{Error, Field, GridFft, SpectralGrid};
use rayon::prelude::*;

use crate::backend::RustFft;
use crate::config::{Bands, ExperimentConfig};
use crate::error::HarnessError;

/// Outcome of one band check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// A step size whose trajectory was unstable.
#[derive(Debug, Clone, PartialEq)]
pub struct FailedRun {
    pub tau: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub config: ExperimentConfig,
    /// Successful samples in decreasing-tau order.
    pub samples: Vec<ErrorSample>,
    pub failures: Vec<FailedRun>,
    pub l2_fit: Option<OrderFit>,
    pub h1_fit: Option<OrderFit>,
    pub alpha: Alpha,
    pub predicted_l2: PredictedOrder,
    pub predicted_h1: Option<PredictedOrder>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub reference_time: Duration,
    pub wall_time: Duration,
}

impl ErrorReport {
    /// True when every verdict passed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Builds the problem described by `config`.
pub fn build_problem(
    config: &ExperimentConfig,
    backend: &RustFft,
) -> Result<SchrodingerProblem, HarnessError> {
    let grid = SpectralGrid::new(config.dim, config.half_width, config.points)?;
    Ok(SchrodingerProblem::from_spec(
        grid,
        config.potential,
        config.product,
        config.beta,
        config.sigma,
        config.datum,
        config.final_time,
        backend,
    )?)
}

/// Band checks on fitted orders; derivable from the sample table alone.
pub fn verdicts(samples: &[ErrorSample], bands: &Bands) -> Vec<Verdict> {
    let l2 = fit_order_unsaturated(samples, ErrorNorm::L2).ok();
    let h1 = fit_order_unsaturated(samples, ErrorNorm::H1).ok();
    let order = |f: &Option<OrderFit>| f.as_ref().map_or(f64::NAN, |f| f.fitted_order);
    let mut out = Vec::new();
    if let Some((lo, hi)) = bands.l2 {
        let v = order(&l2);
        out.push(Verdict {
            name: "l2_order".into(),
            value: v,
            lower: lo,
            upper: hi,
            pass: v >= lo && v <= hi,
        });
    }
    if let Some((shift, tol)) = bands.h1_shift {
        let target = order(&l2) - shift;
        let v = order(&h1);
        out.push(Verdict {
            name: "h1_order".into(),
            value: v,
            lower: target - tol,
            upper: target + tol,
            pass: (v - target).abs() <= tol,
        });
    }
    out
}

/// Runs every step size of the sweep and fits the orders.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ErrorReport, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let backend = RustFft::new();
    let problem = build_problem(config, &backend)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| HarnessError::config(format!("thread pool: {e}")))?;

    let t = config.final_time;
    let (reference, runs) = pool.install(|| {
        rayon::join(
            || {
                let clock = Instant::now();
                reference_solution(&problem, config.reference, config.profile, &backend, &[t])
                    .map(|mut r| (r.remove(0), clock.elapsed()))
            },
            || {
                config
                    .taus
                    .par_iter()
                    .map(|&tau| (tau, run(&problem, tau, config.profile, &backend, &[])))
                    .collect::<Vec<_>>()
            },
        )
    });
    let (reference, reference_time) = reference?;

    let fft = GridFft::with_backend(problem.grid, &backend);
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (tau, outcome) in runs {
        match outcome {
            Ok(traj) => samples.push(sample(&fft, tau, &traj.final_field, &reference)?),
            Err(e @ Error::Instability { .. }) => failures.push(FailedRun {
                tau,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    if samples.is_empty() {
        let first = failures
            .first()
            .map(|f| f.reason.clone())
            .unwrap_or_default();
        return Err(HarnessError::AllFailed(first));
    }
    samples.sort_by(|a, b| b.tau.total_cmp(&a.tau));

    let mut warnings: Vec<String> = failures
        .iter()
        .map(|f| format!("tau = {:e} excluded: {}", f.tau, f.reason))
        .collect();
    let d = config.dim;
    let p = config.nominal_p;
    if config.beta != 0.0 {
        let w = sigma_window(p, d, config.sigma)?;
        if !w.satisfied {
            warnings.push(format!(
                "sigma = {} outside the admissible window ({}, {})",
                config.sigma,
                w.lower,
                w.upper.map_or("inf".to_string(), |u| u.to_string())
            ));
        }
    }
    let l2_fit = fit_order_unsaturated(&samples, ErrorNorm::L2).ok();
    let h1_fit = fit_order_unsaturated(&samples, ErrorNorm::H1).ok();
    if l2_fit.is_none() {
        warnings.push("too few usable samples for an order fit".into());
    }
    Ok(ErrorReport {
        verdicts: verdicts(&samples, &config.bands),
        config: config.clone(),
        samples,
        failures,
        l2_fit,
        h1_fit,
        alpha: alpha_of(p, d)?,
        predicted_l2: predicted_order(p, d)?,
        predicted_h1: predicted_h1_order(p, d)?,
        warnings,
        reference_time,
        wall_time: start.elapsed(),
    })
}

fn sample(
    fft: &GridFft<crate::backend::RustFftPlan>,
    tau: f64,
    numerical: &Field,
    reference: &Field,
) -> Result<ErrorSample, HarnessError> {
    let diff = numerical.sub(reference)?;
    Ok(ErrorSample::new(
        tau,
        lp_norm(&diff, 2.0)?,
        sobolev_norm(fft, &diff, 1.0)?,
    ))
}
