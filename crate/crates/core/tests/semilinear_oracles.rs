use dskg_core::kernels::classify_mass;
use dskg_core::norms::{fit_decay_rate, sobolev_norm, sobolev_series};
use dskg_core::semilinear::*;
use dskg_core::transform::{pde_residual, uniform_times, QuadratureSpec, Trajectory};
use dskg_core::wave::{Field, Operator, SpatialGrid};
use dskg_core::Error;

const S: f64 = 2.0;

fn radial_bump(eps: f64) -> (Field, Field) {
    let g = SpatialGrid::radial(128, 4.0).unwrap();
    let bump = Field::from_fn(g, |r| (-r * r / (2.0 * 0.3f64.powi(2))).exp());
    let scale = eps / (2.0 * sobolev_norm(&bump, S).unwrap());
    (bump.scaled(scale), bump.scaled(scale))
}

fn cauchy_run(m: f64, eps: f64, nl: &Nonlinearity, gamma: f64) -> (Trajectory, IterationLog) {
    let mp = classify_mass(3, m).unwrap();
    let (psi0, psi1) = radial_bump(eps);
    let times = uniform_times(8.0, 65);
    let opts = PicardOptions { gamma, s: S, ..PicardOptions::default() };
    picard_solve(
        Forcing::Cauchy { psi0: &psi0, psi1: &psi1 },
        nl,
        &mp,
        &Operator::laplacian(),
        &times,
        &QuadratureSpec::default(),
        &opts,
    )
    .unwrap()
}

#[test]
fn gamma_examples() {
    let mp = classify_mass(3, 2f64.sqrt()).unwrap();
    let g = expected_gamma(&mp, 2.0, DecayProblem::CauchyData { gamma0: None, psi0_zero: false }).unwrap();
    assert!((g.value - 1.0 / 3.0).abs() < 1e-12 && !g.strict);

    let mp = classify_mass(3, 2.0).unwrap();
    let g = expected_gamma(&mp, 1.0, DecayProblem::CauchyData { gamma0: Some(1.0), psi0_zero: false }).unwrap();
    assert!((g.value - 0.75).abs() < 1e-15 && !g.strict);
    let g = expected_gamma(&mp, 2.0, DecayProblem::CauchyData { gamma0: None, psi0_zero: false }).unwrap();
    assert!((g.value - 0.5).abs() < 1e-15);

    let mp = classify_mass(3, 1.0).unwrap();
    let g = expected_gamma(&mp, 1.0, DecayProblem::SourceDriven { gamma_rhs: 0.3 }).unwrap();
    assert!((g.value - 0.15).abs() < 1e-15 && g.strict);
    assert_eq!(g.branch, GammaBranch::SourceSlowSmallMass);
    assert!(g.admits(0.14) && !g.admits(0.15));
}

#[test]
fn gamma_source_branches() {
    let case = |m: f64, gr: f64| expected_gamma(&classify_mass(3, m).unwrap(), 1.0, DecayProblem::SourceDriven { gamma_rhs: gr }).unwrap();
    let rate = 1.5 - 1.25f64.sqrt();
    let b = case(1.0, 1.0);
    assert_eq!(b.branch, GammaBranch::SourceFastSmallMass);
    assert!((b.value - rate / 2.0).abs() < 1e-15 && b.strict);

    let b = case(2.0, 0.5);
    assert_eq!((b.branch, b.value, b.strict), (GammaBranch::SourceSlowLargeMass, 0.5, false));
    let b = case(2.0, 1.2);
    assert_eq!((b.branch, b.value, b.strict), (GammaBranch::SourceSlowLargeMass, 0.75, false));
    let b = case(1.5, 1.5);
    assert_eq!((b.branch, b.value, b.strict), (GammaBranch::SourceCriticalEqual, 0.75, false));
    let b = case(2.0, 3.0);
    assert_eq!((b.branch, b.value, b.strict), (GammaBranch::SourceFastLargeMass, 0.75, false));
    let b = case(1.5, 3.0);
    assert_eq!((b.branch, b.value, b.strict), (GammaBranch::SourceFastZeroCurved, 0.75, true));
    let b = case(2.0, 1.5);
    assert_eq!((b.branch, b.value, b.strict), (GammaBranch::SourceEqualLargeMass, 0.75, false));
}

#[test]
fn gamma_forbidden_interval() {
    let mp = classify_mass(3, 1.45).unwrap();
    let err = expected_gamma(&mp, 1.0, DecayProblem::CauchyData { gamma0: None, psi0_zero: false }).unwrap_err();
    assert!(matches!(err, Error::ForbiddenInterval { .. }));
    let g = expected_gamma(&mp, 1.0, DecayProblem::CauchyData { gamma0: None, psi0_zero: true }).unwrap();
    assert!(g.forbidden_interval_warning && g.strict);
    assert!((g.value - (1.5 - mp.mu) / 2.0).abs() < 1e-15);

    let crit = classify_mass(3, 2f64.sqrt()).unwrap();
    assert!(expected_gamma(&crit, 1.0, DecayProblem::CauchyData { gamma0: None, psi0_zero: false }).is_ok());
}

#[test]
fn gamma_zero_curved_cauchy_is_strict_in_gamma0() {
    let mp = classify_mass(3, 1.5).unwrap();
    // (n−1)/2 = 1 binds below cap = 3/2 for α = 0.2 ⇒ strict
    let g = expected_gamma(&mp, 0.2, DecayProblem::CauchyData { gamma0: None, psi0_zero: false }).unwrap();
    assert_eq!((g.value, g.strict), (1.0, true));
    assert!(expected_gamma(&mp, 0.2, DecayProblem::CauchyData { gamma0: Some(1.0), psi0_zero: false }).is_err());
    let g = expected_gamma(&mp, 2.0, DecayProblem::CauchyData { gamma0: None, psi0_zero: false }).unwrap();
    assert_eq!((g.value, g.strict), (0.5, false));
}

#[test]
fn zero_nonlinearity_returns_linear_solution_in_one_step() {
    let (traj, log) = cauchy_run(2f64.sqrt(), 1e-2, &Nonlinearity::OddCubic { c: 0.0 }, 1.0 / 3.0);
    assert!(log.converged);
    assert_eq!(log.iterations(), 1);
    assert_eq!(log.distances[0], 0.0);
    assert_eq!(log.residual, 0.0);
    assert!(traj.fields.iter().any(|f| !f.is_zero()));
}

#[test]
fn small_data_cubic_stays_below_twice_epsilon() {
    let eps = 1e-2;
    for (m, gamma) in [(2f64.sqrt(), 1.0 / 3.0), (2.0, 0.5)] {
        let (traj, log) = cauchy_run(m, eps, &Nonlinearity::OddCubic { c: 1.0 }, gamma);
        assert!(log.converged, "m = {m}");
        assert!(log.ratios.iter().all(|&r| r < 1.0), "m = {m}: {:?}", log.ratios);
        assert!(log.residual <= 2e-8, "m = {m}: residual {}", log.residual);
        assert!(log.weighted_norm < 2.0 * eps, "m = {m}: {}", log.weighted_norm);
        assert!(traj.len() == 65);
    }
}

#[test]
fn contraction_ratio_scales_like_eps_to_alpha() {
    let nl = Nonlinearity::OddCubic { c: 1.0 };
    let (_, big) = cauchy_run(2f64.sqrt(), 2e-1, &nl, 1.0 / 3.0);
    let (_, small) = cauchy_run(2f64.sqrt(), 1e-1, &nl, 1.0 / 3.0);
    let q = big.ratios[0] / small.ratios[0];
    assert!((q / 4.0 - 1.0).abs() < 0.15, "ratio quotient {q}, logs {:?} {:?}", big.ratios, small.ratios);
}

#[test]
fn perturbed_trajectory_has_visible_residual() {
    let mp = classify_mass(3, 2f64.sqrt()).unwrap();
    let (psi0, psi1) = radial_bump(1e-2);
    let nl = Nonlinearity::OddCubic { c: 1.0 };
    let op = Operator::laplacian();
    let times = uniform_times(8.0, 65);
    let map = PicardMap::new(Forcing::Cauchy { psi0: &psi0, psi1: &psi1 }, &nl, &mp, &op, &times, &QuadratureSpec::default()).unwrap();
    let opts = PicardOptions { gamma: 1.0 / 3.0, s: S, ..PicardOptions::default() };
    let (psi, log) = map.iterate(&opts).unwrap();
    assert!(fixed_point_residual(&map, &psi, opts.gamma, S).unwrap() <= 2.0 * opts.tol);
    assert_eq!(fixed_point_residual(&map, &psi, opts.gamma, S).unwrap(), log.residual);
    let noisy = psi.map_fields(|t, u| u.axpy(1e-3, &Field::from_fn(u.grid, |r| (-r * r).exp() * (7.0 * r + 3.0 * t).cos())));
    assert!(fixed_point_residual(&map, &noisy, opts.gamma, S).unwrap() >= 1e-4);
}

#[test]
fn iteration_commutes_with_periodic_translation() {
    let g = SpatialGrid::periodic(128, 2.0 * std::f64::consts::PI).unwrap();
    let mp = classify_mass(3, 2f64.sqrt()).unwrap();
    let bump = Field::from_fn(g, |x| 0.2 * (-4.0 * (x - 2.0).powi(2)).exp());
    let nl = Nonlinearity::OddCubic { c: 1.0 };
    let times = uniform_times(4.0, 33);
    let opts = PicardOptions { gamma: 1.0 / 3.0, s: S, ..PicardOptions::default() };
    let q = QuadratureSpec::default();
    let op = Operator::laplacian();
    let run = |d: &Field| picard_solve(Forcing::Cauchy { psi0: d, psi1: d }, &nl, &mp, &op, &times, &q, &opts).unwrap().0;
    let base = run(&bump);
    let moved = run(&bump.shifted(37));
    let diff = base.fields.iter().zip(&moved.fields).fold(0.0f64, |m, (a, b)| m.max(a.shifted(37).max_abs_diff(b)));
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn semilinear_pde_residual_is_second_order() {
    let g = SpatialGrid::periodic(64, 2.0 * std::f64::consts::PI).unwrap();
    let mp = classify_mass(3, 2f64.sqrt()).unwrap();
    let psi0 = Field::from_fn(g, |x| 0.3 * x.cos());
    let psi1 = Field::from_fn(g, |x| 0.2 * (2.0 * x).sin());
    let nl = Nonlinearity::OddCubic { c: 1.0 };
    let op = Operator::laplacian();
    let q = QuadratureSpec::default();
    let opts = PicardOptions { gamma: 0.0, s: S, ..PicardOptions::default() };
    let rhs = |_: f64, u: &Field| Ok(nl.apply(u));
    let worst = |count: usize| {
        let times = uniform_times(1.0, count);
        let (psi, log) = picard_solve(Forcing::Cauchy { psi0: &psi0, psi1: &psi1 }, &nl, &mp, &op, &times, &q, &opts).unwrap();
        assert!(log.converged);
        pde_residual(&psi, Some(&rhs), &mp, &op).unwrap().into_iter().fold(0.0f64, f64::max)
    };
    let (a, b) = (worst(41), worst(81));
    let order = (a / b).log2();
    assert!((order - 2.0).abs() < 0.2, "order {order} ({a:e}, {b:e})");
}

#[test]
fn source_driven_solution_decays_at_admissible_rate() {
    let mp = classify_mass(3, 1.0).unwrap();
    let g = SpatialGrid::radial(128, 4.0).unwrap();
    let eps = 1e-2;
    let bump = Field::from_fn(g, |r| (-r * r / 0.18).exp());
    let shape = bump.scaled(eps / sobolev_norm(&bump, S).unwrap());
    let gamma_rhs = 0.3;
    let f = move |b: f64| Ok(shape.scaled((-gamma_rhs * b).exp()));
    let nl = Nonlinearity::PowerAbs { c: 1.0, alpha: 1.0 };
    let bound = expected_gamma(&mp, 1.0, DecayProblem::SourceDriven { gamma_rhs }).unwrap();
    let gamma = 0.14;
    assert!(bound.admits(gamma));
    let times = uniform_times(12.0, 97);
    let opts = PicardOptions { gamma, s: S, ..PicardOptions::default() };
    let (psi, log) = picard_solve(Forcing::Source(&f), &nl, &mp, &Operator::laplacian(), &times, &QuadratureSpec::default(), &opts).unwrap();
    assert!(log.converged && log.weighted_norm.is_finite());
    assert!(log.weighted_norm < 2.0 * eps, "{}", log.weighted_norm);
    let norms = sobolev_series(&psi, S).unwrap();
    let fit = fit_decay_rate(&psi.times, &norms, (6.0, 12.0), false).unwrap();
    assert!(fit.gamma >= gamma, "fitted {}", fit.gamma);
}
