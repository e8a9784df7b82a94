//! Property checks over the numerical core, run by `ewi selftest`.

use std::time::{Duration, Instant};

use ewi_core::analysis::{fit_order, fourier_l2_norm, lp_norm, ErrorNorm, ErrorSample};
use ewi_core::filters::{
    dyadic_projection, filter_pi_tau, partition_residue, random_band_limited, uniform_signed,
    BernsteinProbe, DyadicScale, ProjectionKind,
};
use ewi_core::integrator::{run, InitialDatum, Potential, SchrodingerProblem, Stepper};
use ewi_core::multiplier::{laplacian_propagator, phi1, phi1_multiplier};
use ewi_core::potentials::{dirichlet_kernel, synth_delta_potential};
use ewi_core::{Complex64, CutoffProfile, Direction, Field, GridFft, SpectralGrid};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::backend::{RustFft, RustFftPlan};
use crate::oracle::ModeStep;

/// Bound on `||phi_1(i tau Delta) Pi_tau f||_p / ||f||_p` over random fields.
pub const PHI1_PROBE_BOUND: f64 = 1.5;

/// One measured property and its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Exact checks report the number of mismatching entries.
    fn exact(name: &'static str, mismatches: usize) -> Self {
        Check {
            name,
            value: mismatches as f64,
            threshold: 0.0,
            pass: mismatches == 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelftestSummary {
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

type Fft = GridFft<RustFftPlan>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_physical(fft: &Fft, support: f64, rng: &mut ChaCha8Rng) -> Field {
    let coeffs = random_band_limited(fft.grid(), support, rng);
    fft.transform(coeffs, Direction::Inverse)
        .expect("fourier field")
}

/// Runs every check; deterministic for a given seed.
pub fn run_selftest(seed: u64) -> SelftestSummary {
    let start = Instant::now();
    let backend = RustFft::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        free_flow(&backend),
        unitarity(&backend, &mut rng),
        sharp_idempotence(&backend, &mut rng),
        quarter_step_composition(),
        partition(CutoffProfile::Sharp),
        partition(CutoffProfile::Smooth),
        annihilation(&mut rng),
        bernstein(&backend, &mut rng),
        phi1_axis_bound(),
        delta_synthesis(&backend),
        parseval(&backend, &mut rng),
        synthetic_fit(),
        single_mode_oracle(&backend),
    ];
    checks.extend(phi1_probe(&backend, &mut rng));
    SelftestSummary {
        checks,
        elapsed: start.elapsed(),
    }
}

fn free_flow(backend: &RustFft) -> Check {
    let grid = SpectralGrid::new(2, 8.0, 32).expect("grid");
    let initial = InitialDatum::Gaussian.sample(grid);
    let problem = SchrodingerProblem::new(grid, Potential::None, 0.0, 1.0, initial.clone(), 0.25)
        .expect("problem");
    // tau^-1/2 exceeds the largest |mu|, so the filter is the identity
    let tau = 2f64.powi(-9);
    let out = run(&problem, tau, CutoffProfile::Sharp, backend, &[]).expect("free flow");
    let fft = GridFft::with_backend(grid, backend);
    let exact = fft.transform(initial, Direction::Forward).expect("fwd");
    let exact = laplacian_propagator(grid, 0.25)
        .apply(exact)
        .expect("propagate");
    let exact = fft.transform(exact, Direction::Inverse).expect("inv");
    let err = lp_norm(&out.final_field.sub(&exact).expect("same grid"), 2.0).expect("norm");
    Check::at_most("free-flow exactness (L2)", err, 1e-11)
}

fn unitarity(backend: &RustFft, rng: &mut ChaCha8Rng) -> Check {
    let grid = SpectralGrid::new(3, 4.0, 16).expect("grid");
    let fft = GridFft::with_backend(grid, backend);
    let mut f = random_physical(&fft, f64::INFINITY, rng);
    let n0 = lp_norm(&f, 2.0).expect("norm");
    let prop = laplacian_propagator(grid, 0.0137);
    for _ in 0..200 {
        let h = fft.transform(f, Direction::Forward).expect("fwd");
        f = fft
            .transform(prop.apply(h).expect("apply"), Direction::Inverse)
            .expect("inv");
    }
    Check::at_most(
        "propagator unitarity drift (200 steps)",
        rel(lp_norm(&f, 2.0).expect("norm"), n0),
        1e-12,
    )
}

fn sharp_idempotence(backend: &RustFft, rng: &mut ChaCha8Rng) -> Check {
    let grid = SpectralGrid::new(2, 8.0, 64).expect("grid");
    let fft = GridFft::with_backend(grid, backend);
    let pi = filter_pi_tau(grid, 0.01, CutoffProfile::Sharp).expect("filter");
    let mut mismatches = pi
        .compose(&pi)
        .expect("same grid")
        .symbol()
        .iter()
        .zip(pi.symbol())
        .filter(|(a, b)| a != b)
        .count();
    let h = fft
        .transform(
            random_physical(&fft, f64::INFINITY, rng),
            Direction::Forward,
        )
        .expect("fwd");
    let once = pi.apply(h).expect("apply");
    let twice = pi.apply(once.clone()).expect("apply");
    mismatches += once
        .values()
        .iter()
        .zip(twice.values())
        .filter(|(a, b)| a != b)
        .count();
    Check::exact("sharp filter idempotence", mismatches)
}

fn quarter_step_composition() -> Check {
    let grid = SpectralGrid::new(2, 8.0, 64).expect("grid");
    let mut mismatches = 0;
    for profile in [CutoffProfile::Sharp, CutoffProfile::Smooth] {
        for tau in [0.5, 0.01, 0.003] {
            let full = filter_pi_tau(grid, tau, profile).expect("filter");
            let quarter = filter_pi_tau(grid, tau / 4.0, profile).expect("filter");
            for m in [
                full.compose(&quarter).expect("grid"),
                quarter.compose(&full).expect("grid"),
            ] {
                mismatches += m
                    .symbol()
                    .iter()
                    .zip(full.symbol())
                    .filter(|(a, b)| a != b)
                    .count();
            }
        }
    }
    Check::exact("Pi_tau Pi_tau/4 = Pi_tau on symbols", mismatches)
}

fn partition(profile: CutoffProfile) -> Check {
    let grid = SpectralGrid::new(2, 8.0, 128).expect("grid");
    let name = match profile {
        CutoffProfile::Sharp => "dyadic partition residue (sharp)",
        CutoffProfile::Smooth => "dyadic partition residue (smooth)",
    };
    Check::at_most(name, partition_residue(grid, profile), 1e-14)
}

fn annihilation(rng: &mut ChaCha8Rng) -> Check {
    let grid = SpectralGrid::new(2, 8.0, 64).expect("grid");
    let mut mismatches = 0;
    for n in [1.0, 3.0, 8.0] {
        let scale = DyadicScale::new(n).expect("scale");
        for profile in [CutoffProfile::Sharp, CutoffProfile::Smooth] {
            let above = dyadic_projection(grid, scale, ProjectionKind::Above, profile);
            // support strictly inside |mu| < N
            let f = random_band_limited(&grid, 0.999 * n, rng);
            mismatches += above
                .apply(f)
                .expect("apply")
                .values()
                .iter()
                .filter(|v| **v != Complex64::new(0.0, 0.0))
                .count();
        }
    }
    Check::exact("P_{>N} annihilates fields band-limited below N", mismatches)
}

fn bernstein(backend: &RustFft, rng: &mut ChaCha8Rng) -> Check {
    let grid = SpectralGrid::new(2, 8.0, 128).expect("grid");
    let fft = GridFft::with_backend(grid, backend);
    let mut maxima = Vec::new();
    for n in [2.0, 4.0, 8.0, 16.0] {
        let probe = BernsteinProbe {
            scale: DyadicScale::new(n).expect("scale"),
            p: f64::INFINITY,
            q: 2.0,
            trials: 20,
            profile: CutoffProfile::Sharp,
            support: n,
            coherent: true,
        };
        let report = ewi_core::filters::bernstein_check(&fft, &probe, rng).expect("probe");
        maxima.push(report.max_ratio);
    }
    let hi = maxima.iter().copied().fold(0.0, f64::max);
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    Check::at_most("Bernstein ratio spread across N (max/min)", hi / lo, 2.0)
}

fn phi1_axis_bound() -> Check {
    let mut worst: f64 = 0.0;
    for k in -20000..=20000 {
        let x = k as f64 * 0.01;
        worst = worst.max(phi1(Complex64::new(0.0, x)).norm());
    }
    for k in 0..2000 {
        let x = 1e-6 * 1.01f64.powi(k);
        worst = worst.max(phi1(Complex64::new(0.0, x)).norm());
        worst = worst.max(phi1(Complex64::new(0.0, -x)).norm());
    }
    Check::at_most("max |phi_1(ix)|", worst, 1.0 + 1e-15)
}

fn delta_synthesis(backend: &RustFft) -> Check {
    let grid = SpectralGrid::new(1, 4.0, 256).expect("grid");
    let fft = GridFft::with_backend(grid, backend);
    let mut worst: f64 = 0.0;
    for n_ref in [10, 128, 1000] {
        let v = synth_delta_potential(&fft, n_ref, -1.0).expect("synth");
        // folded onto the grid, the truncated series equals the Dirichlet kernel at the nodes
        for (j, z) in v.values().iter().enumerate() {
            let x = grid.position(j)[0];
            worst = worst
                .max((z.re - dirichlet_kernel(x, 4.0, n_ref, -1.0)).abs())
                .max(z.im.abs());
        }
    }
    Check::at_most("delta series vs Dirichlet closed form", worst, 1e-12)
}

fn parseval(backend: &RustFft, rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for (d, n) in [(1, 100), (2, 64), (3, 24)] {
        let grid = SpectralGrid::new(d, 3.0, n).expect("grid");
        let fft = GridFft::with_backend(grid, backend);
        let f = Field::from_fn(grid, |_| {
            Complex64::new(uniform_signed(rng), uniform_signed(rng))
        });
        let a = lp_norm(&f, 2.0).expect("norm");
        let b = fourier_l2_norm(&fft.transform(f, Direction::Forward).expect("fwd")).expect("norm");
        worst = worst.max(rel(b, a));
    }
    Check::at_most("Parseval relative mismatch", worst, 1e-13)
}

fn synthetic_fit() -> Check {
    let mut worst: f64 = 0.0;
    for order in [0.5, 0.65, 1.0, 1.25] {
        let samples: Vec<ErrorSample> = (2..9)
            .map(|k| {
                let tau = 2f64.powi(-k);
                ErrorSample::new(tau, 0.7 * tau.powf(order), 2.0 * tau.powf(order - 0.5))
            })
            .collect();
        let fit = fit_order(&samples, ErrorNorm::L2).expect("fit");
        worst = worst.max((fit.fitted_order - order).abs());
    }
    Check::at_most("fit_order on synthetic power laws", worst, 1e-10)
}

/// One EWI step on a single Fourier mode against [`ModeStep`].
pub fn single_mode_oracle(backend: &RustFft) -> Check {
    let mut worst: f64 = 0.0;
    let cases = [
        (1, [3i64, 0, 0], 0.7, 0.0, 0.05),
        (1, [-5, 0, 0], -2.0, 0.0, 0.01),
        (2, [2, -1, 0], 1.5, -1.0, 0.02),
        (3, [1, 1, -2], -0.4, 1.0, 0.03),
        (2, [7, 6, 0], 0.3, 0.5, 0.05), // removed by the filter
    ];
    for (dim, modes, c, beta, tau) in cases {
        let grid = SpectralGrid::new(dim, 2.0, 16).expect("grid");
        let a = Complex64::new(0.8, -0.35);
        let mu: Vec<f64> = modes
            .iter()
            .map(|l| *l as f64 * std::f64::consts::PI / 2.0)
            .collect();
        let mode = |x: [f64; 3]| {
            let phase: f64 = (0..dim).map(|i| mu[i] * x[i]).sum();
            Complex64::from_polar(1.0, phase)
        };
        let initial = Field::from_fn(grid, |x| a * mode(x));
        let problem = SchrodingerProblem::new(
            grid,
            Potential::Pointwise(vec![c; grid.len()]),
            beta,
            1.0,
            initial,
            tau,
        )
        .expect("problem");
        let mut stepper =
            Stepper::new(&problem, tau, CutoffProfile::Sharp, backend).expect("stepper");
        stepper.step().expect("step");
        let mu_sq: f64 = mu.iter().map(|m| m * m).sum();
        let chi = CutoffProfile::Sharp.chi(tau.sqrt() * mu_sq.sqrt());
        let expect = ModeStep {
            amplitude: a,
            mu_sq,
            potential: c,
            beta,
            sigma: 1.0,
            tau,
            chi,
        }
        .advance();
        let target = Field::from_fn(grid, |x| expect * mode(x));
        let err = stepper.psi().sub(&target).expect("grid").max_abs();
        worst = worst.max(err);
    }
    Check::at_most(
        "single-mode step vs scalar recurrence (max abs)",
        worst,
        1e-13,
    )
}

fn phi1_probe(backend: &RustFft, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let grid = SpectralGrid::new(1, 8.0, 256).expect("grid");
    let fft = GridFft::with_backend(grid, backend);
    let tau = 0.01;
    let op = phi1_multiplier(grid, tau)
        .compose(&filter_pi_tau(grid, tau, CutoffProfile::Smooth).expect("filter"))
        .expect("grid");
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let f = random_physical(&fft, 4.0 / tau.sqrt(), rng);
        let h = fft.transform(f.clone(), Direction::Forward).expect("fwd");
        let g = fft
            .transform(op.apply(h).expect("apply"), Direction::Inverse)
            .expect("inv");
        for (w, p) in worst.iter_mut().zip([1.0, 2.0, f64::INFINITY]) {
            *w = w.max(lp_norm(&g, p).expect("norm") / lp_norm(&f, p).expect("norm"));
        }
    }
    vec![
        Check::at_most(
            "phi_1 Pi_tau probe ratio, p = 1",
            worst[0],
            PHI1_PROBE_BOUND,
        ),
        Check::at_most(
            "phi_1 Pi_tau probe ratio, p = 2",
            worst[1],
            PHI1_PROBE_BOUND,
        ),
        Check::at_most(
            "phi_1 Pi_tau probe ratio, p = inf",
            worst[2],
            PHI1_PROBE_BOUND,
        ),
    ]
}
