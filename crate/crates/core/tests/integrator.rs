use ewi_core::analysis::{fit_order, lp_norm, ErrorNorm, ErrorSample};
use ewi_core::integrator::{
    reference_solution, run, InitialDatum, Potential, ProductRule, ReferenceMode,
    SchrodingerProblem, Stepper,
};
use ewi_core::potentials::{gaussian_well, PotentialSpec};
use ewi_core::{Complex64, CutoffProfile, Field, Portable, SpectralGrid};

fn well_problem(c: f64) -> SchrodingerProblem {
    let grid = SpectralGrid::new(1, 8.0, 128).unwrap();
    let v = gaussian_well(grid, 1.0, -2.0);
    let p = Potential::from_field(&v).unwrap().shifted(&grid, c);
    SchrodingerProblem::new(grid, p, -1.0, 1.0, InitialDatum::Gaussian.sample(grid), 1.0).unwrap()
}

fn l2(a: &Field, b: &Field) -> f64 {
    lp_norm(&a.sub(b).unwrap(), 2.0).unwrap()
}

#[test]
fn gauge_shift_is_first_order() {
    let c = 0.7;
    let base = well_problem(0.0);
    let shifted = well_problem(c);
    let mut samples = Vec::new();
    for k in 3..=8 {
        let tau = 2f64.powi(-k);
        let a = run(&base, tau, CutoffProfile::Sharp, &Portable, &[])
            .unwrap()
            .final_field;
        let b = run(&shifted, tau, CutoffProfile::Sharp, &Portable, &[])
            .unwrap()
            .final_field;
        let d = l2(&b, &a.scale(Complex64::from_polar(1.0, -c)));
        samples.push(ErrorSample::new(tau, d, d));
    }
    let ratios: Vec<f64> = samples.iter().map(|s| s.e_l2 / s.tau).collect();
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 2.0, "{ratios:?}");
    let fit = fit_order(&samples, ErrorNorm::L2).unwrap();
    assert!((fit.fitted_order - 1.0).abs() < 0.1, "{}", fit.fitted_order);
}

#[test]
fn smooth_potential_self_convergence() {
    let p = well_problem(0.0);
    let reference = reference_solution(
        &p,
        ReferenceMode::FineStep {
            tau_ref: 2f64.powi(-13),
        },
        CutoffProfile::Sharp,
        &Portable,
        &[1.0],
    )
    .unwrap()
    .remove(0);
    let samples: Vec<ErrorSample> = (3..=8)
        .map(|k| {
            let tau = 2f64.powi(-k);
            let e = l2(
                &run(&p, tau, CutoffProfile::Sharp, &Portable, &[])
                    .unwrap()
                    .final_field,
                &reference,
            );
            ErrorSample::new(tau, e, e)
        })
        .collect();
    let fit = fit_order(&samples, ErrorNorm::L2).unwrap();
    assert!(fit.fitted_order >= 0.95, "{}", fit.fitted_order);
}

#[test]
fn fine_reference_is_self_consistent() {
    let p = well_problem(0.0);
    let r = |tau_ref: f64| {
        reference_solution(
            &p,
            ReferenceMode::FineStep { tau_ref },
            CutoffProfile::Sharp,
            &Portable,
            &[1.0],
        )
        .unwrap()
        .remove(0)
    };
    let finest = l2(
        &run(&p, 2f64.powi(-8), CutoffProfile::Sharp, &Portable, &[])
            .unwrap()
            .final_field,
        &r(2f64.powi(-13)),
    );
    assert!(l2(&r(2f64.powi(-13)), &r(2f64.powi(-14))) < finest / 10.0);
}

fn soliton(rule: ProductRule) -> SchrodingerProblem {
    let grid = SpectralGrid::new(1, 16.0, 16384).unwrap();
    SchrodingerProblem::from_spec(
        grid,
        PotentialSpec::delta(1 << 16),
        rule,
        -1.0,
        1.0,
        InitialDatum::DeltaSoliton,
        1.0,
        &Portable,
    )
    .unwrap()
}

#[test]
fn soliton_single_step_tracks_exact_phase() {
    let p = soliton(ProductRule::Auto);
    assert!(matches!(p.potential, Potential::Refined(_)));
    for tau in [1.0 / 16.0, 1.0 / 64.0] {
        let mut s = Stepper::new(&p, tau, CutoffProfile::Sharp, &Portable).unwrap();
        s.step().unwrap();
        let exact = p.initial.scale(Complex64::from_polar(1.0, tau));
        let err = l2(s.psi(), &exact);
        assert!(err <= 10.0 * tau, "tau={tau} err={err}");
    }
}

#[test]
fn pointwise_folded_delta_is_not_the_delta() {
    // The folded series sampled on the grid acts like a much stronger well,
    // so the soliton is no longer stationary.
    let exact = |p: &SchrodingerProblem, t: f64| p.initial.scale(Complex64::from_polar(1.0, t));
    let folded = soliton(ProductRule::Pointwise);
    let refined = soliton(ProductRule::Auto);
    let tau = 1.0 / 32.0;
    let t = 0.25;
    let mut a = Stepper::new(&folded, tau, CutoffProfile::Sharp, &Portable).unwrap();
    let mut b = Stepper::new(&refined, tau, CutoffProfile::Sharp, &Portable).unwrap();
    a.advance_to(t).unwrap();
    b.advance_to(t).unwrap();
    let ea = l2(a.psi(), &exact(&folded, t));
    let eb = l2(b.psi(), &exact(&refined, t));
    assert!(ea > 5.0 * eb, "folded {ea} refined {eb}");
}

#[test]
fn exact_reference_rules() {
    let p = soliton(ProductRule::Auto);
    let r = reference_solution(
        &p,
        ReferenceMode::Exact1DSoliton,
        CutoffProfile::Sharp,
        &Portable,
        &[0.0, 0.5],
    )
    .unwrap();
    assert_eq!(r[0], p.initial);
    let n0 = lp_norm(&p.initial, 2.0).unwrap();
    assert!((lp_norm(&r[1], 2.0).unwrap() - n0).abs() < 1e-13 * n0);
    let other = well_problem(0.0);
    assert!(reference_solution(
        &other,
        ReferenceMode::Exact1DSoliton,
        CutoffProfile::Sharp,
        &Portable,
        &[1.0]
    )
    .is_err());
}
