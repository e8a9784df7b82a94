//! Filtered exponential wave integrator
//!
//! ```text
//! psi^{n+1} = e^{i tau Delta} psi^n - i tau phi_1(i tau Delta) Pi_tau (V psi^n + beta |psi^n|^{2 sigma} psi^n)
//! psi^0     = Pi_tau psi_0
//! ```
//!
//! Each step forms the potential and nonlinear products pointwise in
//! physical space, transforms once, combines with the propagated
//! coefficients, and transforms back.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{Fft1d, FftBackend, GridFft};
use crate::field::{Field, Space};
use crate::filters::{filter_pi_tau, CutoffProfile};
use crate::grid::SpectralGrid;
use crate::multiplier::{laplacian_propagator, phi1, Multiplier};
use crate::potentials::{PotentialKind, PotentialSpec};

/// Relative tolerance for `T / tau` (and snapshot times) to be integral.
pub const STEP_COUNT_TOLERANCE: f64 = 1e-9;

/// Abort once `max |psi|` exceeds this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Initial data used by the standard experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDatum {
    /// `sqrt(2) sech(|x| + artanh(1/2))`, stationary under `-delta` with `beta = -1`.
    DeltaSoliton,
    /// `exp(-|x|^2 / 2)`.
    Gaussian,
}

impl InitialDatum {
    pub fn sample(self, grid: SpectralGrid) -> Field {
        match self {
            InitialDatum::DeltaSoliton => {
                let shift = libm::atanh(0.5);
                Field::from_real_fn(grid, |x| {
                    let r = libm::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
                    core::f64::consts::SQRT_2 / libm::cosh(r + shift)
                })
            }
            InitialDatum::Gaussian => Field::from_real_fn(grid, |x| {
                libm::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]))
            }),
        }
    }
}

/// How `V psi` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProductRule {
    /// Pointwise on the grid, except for delta series that exceed the grid's
    /// modes, which use an alias-free refined product.
    #[default]
    Auto,
    /// Always pointwise on the grid samples.
    Pointwise,
}

/// Potential samples on a finer grid used for an alias-free `V psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedPotential {
    pub grid: SpectralGrid,
    pub samples: Vec<f64>,
}

/// A real potential as consumed by the stepper.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    None,
    /// Real samples on the simulation grid.
    Pointwise(Vec<f64>),
    /// `V psi` evaluated on a refined grid and truncated back to the grid modes.
    Refined(RefinedPotential),
}

impl Potential {
    /// Wraps physical samples, rejecting fields with a non-negligible imaginary part.
    pub fn from_field(field: &Field) -> Result<Self> {
        if field.space() != Space::Physical {
            return Err(Error::Usage("potential samples must be in physical space"));
        }
        let scale = field.max_abs().max(f64::MIN_POSITIVE);
        if field.max_imag() > 1e-10 * scale {
            return Err(Error::Config("potential must be real-valued"));
        }
        Ok(Potential::Pointwise(
            field.values().iter().map(|v| v.re).collect(),
        ))
    }

    /// Builds the potential of `spec` on `grid` following `rule`.
    pub fn build<B: FftBackend>(
        spec: &PotentialSpec,
        grid: SpectralGrid,
        rule: ProductRule,
        backend: &B,
    ) -> Result<Self> {
        spec.validate(&grid)?;
        if let (PotentialKind::None, _) = (spec.kind, rule) {
            return Ok(Potential::None);
        }
        if let (PotentialKind::DeltaSeries1D { n_ref }, ProductRule::Auto) = (spec.kind, rule) {
            let n = grid.points_per_dim();
            if n_ref >= n / 2 {
                let m = refined_points(n, n_ref);
                let fine = SpectralGrid::new(1, grid.half_width(), m)?;
                let field = spec.synthesize(&GridFft::with_backend(fine, backend))?;
                return Ok(Potential::Refined(RefinedPotential {
                    grid: fine,
                    samples: field.values().iter().map(|v| v.re).collect(),
                }));
            }
        }
        let field = spec.synthesize(&GridFft::with_backend(grid, backend))?;
        Self::from_field(&field)
    }

    /// Adds a real constant (a gauge shift of the equation).
    pub fn shifted(&self, grid: &SpectralGrid, c: f64) -> Potential {
        match self {
            Potential::None => Potential::Pointwise(vec![c; grid.len()]),
            Potential::Pointwise(v) => Potential::Pointwise(v.iter().map(|x| x + c).collect()),
            Potential::Refined(r) => Potential::Refined(RefinedPotential {
                grid: r.grid,
                samples: r.samples.iter().map(|x| x + c).collect(),
            }),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Potential::None => true,
            Potential::Pointwise(v) => v.iter().all(|x| x.is_finite()),
            Potential::Refined(r) => r.samples.iter().all(|x| x.is_finite()),
        }
    }
}

/// Smallest power of two `M` such that a series with `|l| <= n_ref` times a
/// grid function with `n` modes has no alias landing on the grid modes.
pub fn refined_points(n: usize, n_ref: usize) -> usize {
    (2 * n_ref + 2).max(n_ref + n + 1).next_power_of_two()
}

/// `i psi_t = -Delta psi + V psi + beta |psi|^{2 sigma} psi` on a periodic grid.
#[derive(Debug, Clone)]
pub struct SchrodingerProblem {
    pub grid: SpectralGrid,
    pub potential: Potential,
    /// Description of `potential`, when it came from a spec.
    pub potential_spec: Option<PotentialSpec>,
    pub beta: f64,
    pub sigma: f64,
    pub initial: Field,
    /// Named initial datum, when `initial` came from one.
    pub datum: Option<InitialDatum>,
    pub final_time: f64,
}

impl SchrodingerProblem {
    pub fn new(
        grid: SpectralGrid,
        potential: Potential,
        beta: f64,
        sigma: f64,
        initial: Field,
        final_time: f64,
    ) -> Result<Self> {
        let problem = Self {
            grid,
            potential,
            potential_spec: None,
            beta,
            sigma,
            initial,
            datum: None,
            final_time,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Problem built from named ingredients.
    #[allow(clippy::too_many_arguments)]
    pub fn from_spec<B: FftBackend>(
        grid: SpectralGrid,
        potential: PotentialSpec,
        rule: ProductRule,
        beta: f64,
        sigma: f64,
        datum: InitialDatum,
        final_time: f64,
        backend: &B,
    ) -> Result<Self> {
        let mut problem = Self::new(
            grid,
            Potential::build(&potential, grid, rule, backend)?,
            beta,
            sigma,
            datum.sample(grid),
            final_time,
        )?;
        problem.potential_spec = Some(potential);
        problem.datum = Some(datum);
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        if self.initial.grid() != &self.grid || self.initial.space() != Space::Physical {
            return Err(Error::Usage(
                "initial datum must be a physical field on the problem grid",
            ));
        }
        if let Potential::Pointwise(v) = &self.potential {
            if v.len() != self.grid.len() {
                return Err(Error::Usage("potential samples do not match the grid"));
            }
        }
        if !self.potential.is_finite() {
            return Err(Error::Config("potential has non-finite samples"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config("nonlinearity power sigma must be positive"));
        }
        if !self.beta.is_finite() {
            return Err(Error::Config("beta must be finite"));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::Config("final time must be positive"));
        }
        Ok(())
    }

    /// Number of steps of size `tau` to reach a time `t`, if integral.
    pub fn steps_to(t: f64, tau: f64) -> Result<usize> {
        let ratio = t / tau;
        let rounded = libm::round(ratio);
        if (ratio - rounded).abs() >= STEP_COUNT_TOLERANCE * rounded.max(1.0) {
            return Err(Error::Config(
                "time is not an integer multiple of the step size",
            ));
        }
        Ok(rounded as usize)
    }
}

/// Snapshot of the stepper after `step` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperState {
    pub step: usize,
    pub tau: f64,
    /// `psi_tau^n` in physical space.
    pub psi: Field,
}

impl StepperState {
    pub fn time(&self) -> f64 {
        self.step as f64 * self.tau
    }
}

/// Advances `psi_tau^n` with cached symbols for one step size.
pub struct Stepper<P> {
    fft: GridFft<P>,
    refined: Option<(GridFft<P>, RefinedPotential)>,
    pointwise: Option<Vec<f64>>,
    beta: f64,
    sigma: f64,
    tau: f64,
    final_time: f64,
    propagator: Multiplier,
    /// `-i tau phi_1(-i tau |mu|^2) chi(tau^{1/2} |mu|)`
    correction: Multiplier,
    psi: Field,
    psi_hat: Vec<Complex64>,
    work: Vec<Complex64>,
    step: usize,
    guard: f64,
}

impl<P: Fft1d> Stepper<P> {
    /// Sets `psi^0 = Pi_tau psi_0` and caches the step symbols.
    pub fn new<B: FftBackend<Plan = P>>(
        problem: &SchrodingerProblem,
        tau: f64,
        profile: CutoffProfile,
        backend: &B,
    ) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config("step size must be positive"));
        }
        if tau > problem.final_time * (1.0 + STEP_COUNT_TOLERANCE) {
            return Err(Error::Config("step size exceeds the final time"));
        }
        let grid = problem.grid;
        let fft = GridFft::with_backend(grid, backend);
        let filter = filter_pi_tau(grid, tau, profile)?;
        let propagator = laplacian_propagator(grid, tau);
        let correction = Multiplier::new(
            grid,
            grid.wavenumbers_sq()
                .into_iter()
                .zip(filter.symbol())
                .map(|(k2, chi)| {
                    Complex64::new(0.0, -tau) * phi1(Complex64::new(0.0, -tau * k2)) * chi
                })
                .collect(),
        )?;

        let mut psi_hat = problem.initial.values().to_vec();
        fft.forward_in_place(&mut psi_hat);
        filter.apply_in_place(&mut psi_hat);
        let mut values = psi_hat.clone();
        fft.inverse_in_place(&mut values);
        let psi = Field::new(grid, values, Space::Physical)?;

        let (pointwise, refined) = match &problem.potential {
            Potential::None => (None, None),
            Potential::Pointwise(v) => (Some(v.clone()), None),
            Potential::Refined(r) => {
                if r.grid.dim() != grid.dim()
                    || r.grid.half_width() != grid.half_width()
                    || r.grid.points_per_dim() < grid.points_per_dim()
                {
                    return Err(Error::Usage(
                        "refined potential grid does not cover the problem grid",
                    ));
                }
                (
                    None,
                    Some((GridFft::with_backend(r.grid, backend), r.clone())),
                )
            }
        };

        let guard = BLOWUP_FACTOR * problem.initial.max_abs().max(f64::MIN_POSITIVE);
        Ok(Self {
            fft,
            refined,
            pointwise,
            beta: problem.beta,
            sigma: problem.sigma,
            tau,
            final_time: problem.final_time,
            propagator,
            correction,
            psi,
            psi_hat,
            work: vec![Complex64::new(0.0, 0.0); grid.len()],
            step: 0,
            guard,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.tau
    }

    /// Current `psi_tau^n` in physical space.
    pub fn psi(&self) -> &Field {
        &self.psi
    }

    /// Current unnormalized Fourier coefficients of `psi_tau^n`.
    pub fn psi_hat(&self) -> &[Complex64] {
        &self.psi_hat
    }

    pub fn state(&self) -> StepperState {
        StepperState {
            step: self.step,
            tau: self.tau,
            psi: self.psi.clone(),
        }
    }

    pub fn propagator(&self) -> &Multiplier {
        &self.propagator
    }

    pub fn correction(&self) -> &Multiplier {
        &self.correction
    }

    /// One EWI step.
    pub fn step(&mut self) -> Result<()> {
        let psi = self.psi.values();
        let beta = self.beta;
        let sigma = self.sigma;
        for (j, (w, p)) in self.work.iter_mut().zip(psi).enumerate() {
            let mut coeff = 0.0;
            if beta != 0.0 {
                let m2 = p.norm_sqr();
                coeff += beta
                    * if sigma == 1.0 {
                        m2
                    } else {
                        libm::pow(m2, sigma)
                    };
            }
            if let Some(v) = &self.pointwise {
                coeff += v[j];
            }
            *w = p * coeff;
        }
        self.fft.forward_in_place(&mut self.work);
        if let Some((fine_fft, fine_v)) = &self.refined {
            refined_product(&self.fft, fine_fft, fine_v, &self.psi_hat, &mut self.work);
        }
        for ((h, w), (e, c)) in self.psi_hat.iter_mut().zip(&self.work).zip(
            self.propagator
                .symbol()
                .iter()
                .zip(self.correction.symbol()),
        ) {
            *h = *e * *h + *c * *w;
        }
        let values = self.psi.values_mut();
        values.copy_from_slice(&self.psi_hat);
        self.fft.inverse_in_place(values);
        self.step += 1;

        let mut max = 0.0f64;
        for v in self.psi.values() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Instability {
                    step: self.step,
                    reason: "non-finite values",
                });
            }
            max = max.max(v.norm());
        }
        if max > self.guard {
            return Err(Error::Instability {
                step: self.step,
                reason: "amplitude exceeded the blow-up guard",
            });
        }
        Ok(())
    }

    /// Steps until `time()` reaches `t` (an integer multiple of `tau`).
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let target = SchrodingerProblem::steps_to(t, self.tau)?;
        if target < self.step {
            return Err(Error::Usage("cannot step backwards in time"));
        }
        while self.step < target {
            self.step()?;
        }
        Ok(())
    }

    /// Remaining steps to the problem's final time.
    pub fn finish(&mut self) -> Result<()> {
        self.advance_to(self.final_time)
    }
}

/// Adds the grid-mode coefficients of `V psi` computed on the refined grid.
fn refined_product<P: Fft1d>(
    coarse: &GridFft<P>,
    fine: &GridFft<P>,
    potential: &RefinedPotential,
    psi_hat: &[Complex64],
    out: &mut [Complex64],
) {
    let cg = coarse.grid();
    let fg = fine.grid();
    let ratio = libm::pow(
        fg.points_per_dim() as f64 / cg.points_per_dim() as f64,
        cg.dim() as f64,
    );
    let fine_slot = |flat: usize| {
        let s = cg.unflatten(flat);
        let mut f = [0usize; 3];
        for a in 0..cg.dim() {
            f[a] = fg.slot_of(cg.signed_index(s[a]));
        }
        fg.flatten(f)
    };
    let mut buf = vec![Complex64::new(0.0, 0.0); fg.len()];
    for (k, c) in psi_hat.iter().enumerate() {
        buf[fine_slot(k)] = c * ratio;
    }
    fine.inverse_in_place(&mut buf);
    buf.iter_mut()
        .zip(&potential.samples)
        .for_each(|(b, v)| *b *= *v);
    fine.forward_in_place(&mut buf);
    for (k, o) in out.iter_mut().enumerate() {
        *o += buf[fine_slot(k)] / ratio;
    }
}

/// Final field and snapshots of one trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tau: f64,
    pub steps: usize,
    pub final_field: Field,
    /// `(time, psi)` for each requested snapshot time, in request order.
    pub snapshots: Vec<(f64, Field)>,
}

/// Runs the EWI to the final time, recording snapshots at the requested times.
pub fn run<B: FftBackend>(
    problem: &SchrodingerProblem,
    tau: f64,
    profile: CutoffProfile,
    backend: &B,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    let steps = SchrodingerProblem::steps_to(problem.final_time, tau)?;
    let mut order: Vec<(usize, usize)> = snapshot_times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if *t < 0.0 || *t > problem.final_time * (1.0 + STEP_COUNT_TOLERANCE) {
                return Err(Error::Config("snapshot time outside [0, T]"));
            }
            Ok((SchrodingerProblem::steps_to(*t, tau)?, i))
        })
        .collect::<Result<_>>()?;
    order.sort_unstable();
    let mut stepper = Stepper::new(problem, tau, profile, backend)?;
    let mut snapshots: Vec<Option<(f64, Field)>> = vec![None; snapshot_times.len()];
    for (n, i) in order {
        while stepper.step_index() < n {
            stepper.step()?;
        }
        snapshots[i] = Some((snapshot_times[i], stepper.psi().clone()));
    }
    while stepper.step_index() < steps {
        stepper.step()?;
    }
    Ok(Trajectory {
        tau,
        steps,
        final_field: stepper.psi().clone(),
        snapshots: snapshots.into_iter().map(|s| s.expect("filled")).collect(),
    })
}

/// `S_tau(t) = e^{i t Delta} Pi_{tau/4}`.
pub fn filtered_propagator(
    grid: SpectralGrid,
    t: f64,
    tau: f64,
    profile: CutoffProfile,
) -> Result<Multiplier> {
    laplacian_propagator(grid, t).compose(&filter_pi_tau(grid, tau / 4.0, profile)?)
}

/// Source of the solution errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceMode {
    /// `e^{it} psi_0` for the delta-potential soliton.
    Exact1DSoliton,
    /// The same scheme at a much smaller step, filtered with its own step.
    FineStep { tau_ref: f64 },
}

/// Reference solution at each requested time.
pub fn reference_solution<B: FftBackend>(
    problem: &SchrodingerProblem,
    mode: ReferenceMode,
    profile: CutoffProfile,
    backend: &B,
    times: &[f64],
) -> Result<Vec<Field>> {
    match mode {
        ReferenceMode::Exact1DSoliton => {
            let matches = problem.grid.dim() == 1
                && problem.beta == -1.0
                && problem.sigma == 1.0
                && problem.datum == Some(InitialDatum::DeltaSoliton)
                && matches!(
                    problem.potential_spec,
                    Some(PotentialSpec {
                        kind: PotentialKind::DeltaSeries1D { .. },
                        amplitude,
                    }) if amplitude == -1.0
                );
            if !matches {
                return Err(Error::Usage(
                    "exact soliton reference needs the 1D delta-potential soliton problem",
                ));
            }
            Ok(times
                .iter()
                .map(|t| problem.initial.scale(Complex64::from_polar(1.0, *t)))
                .collect())
        }
        ReferenceMode::FineStep { tau_ref } => Ok(run(problem, tau_ref, profile, backend, times)?
            .snapshots
            .into_iter()
            .map(|(_, f)| f)
            .collect()),
    }
}
