//! Transform solutions against ODE reductions and critical-mass closed forms.

mod common;

use common::{gaussian, ode_oracle};
use dskg_core::kernels::{classify_mass, phi};
use dskg_core::transform::{
    pde_residual, solve_linear_cauchy, solve_source, solve_u_form, uniform_times, QuadratureSpec,
    SourcePlan,
};
use dskg_core::wave::{solve_wave, Accumulator, DataKind, Field, Operator, SpatialGrid};
use dskg_core::Result;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// Closed-form ψ for ψ'' + 3ψ' + m²ψ = 0, ψ(0) = 1, ψ'(0) = 0, and the
/// envelope used to measure relative error through zero crossings.
fn constant_data_oracle(m: f64, t: f64) -> (f64, f64) {
    let d = 2.25 - m * m;
    let e = (-1.5 * t).exp();
    if d > 0.0 {
        let mu = d.sqrt();
        let v = e * ((mu * t).cosh() + 1.5 / mu * (mu * t).sinh());
        (v, v)
    } else if d == 0.0 {
        let v = e * (1.0 + 1.5 * t);
        (v, v)
    } else {
        let mu = (-d).sqrt();
        let amp = (1.0 + (1.5 / mu).powi(2)).sqrt();
        (e * ((mu * t).cos() + 1.5 / mu * (mu * t).sin()), e * amp)
    }
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let g = SpatialGrid::periodic(16, 1.0).unwrap();
    let mp = classify_mass(3, 1.0).unwrap();
    let times = uniform_times(3.0, 7);
    let z = Field::zeros(g);
    let traj = solve_linear_cauchy(&z, &z, &mp, &Operator::laplacian(), &times, &q()).unwrap();
    assert!(traj.fields.iter().all(|f| f.is_zero()));
    let src = solve_source(&|_b: f64| Ok(Field::zeros(g)), g, &mp, &Operator::laplacian(), &times, &q()).unwrap();
    assert!(src.fields.iter().all(|f| f.is_zero()));
}

#[test]
fn constant_data_matches_ode_closed_form() {
    let g = SpatialGrid::periodic(16, 1.0).unwrap();
    let times = uniform_times(8.0, 33);
    for &m in &[1.0, 1.5, 2.0] {
        let mp = classify_mass(3, m).unwrap();
        let traj = solve_linear_cauchy(
            &Field::constant(g, 1.0),
            &Field::zeros(g),
            &mp,
            &Operator::laplacian(),
            &times,
            &q(),
        )
        .unwrap();
        for (t, f) in traj.times.iter().zip(&traj.fields) {
            let (exact, scale) = constant_data_oracle(m, *t);
            let err = f.values.iter().fold(0.0f64, |e, v| e.max((v - exact).abs()));
            assert!(err <= 1e-7 * scale, "m = {m}, t = {t}: err {err:e}, scale {scale:e}");
        }
    }
}

#[test]
fn constant_velocity_data_matches_ode() {
    let g = SpatialGrid::periodic(16, 1.0).unwrap();
    let times = uniform_times(6.0, 13);
    for &m in &[0.7, 2.0] {
        let mp = classify_mass(3, m).unwrap();
        let traj = solve_linear_cauchy(
            &Field::zeros(g),
            &Field::constant(g, 1.0),
            &mp,
            &Operator::laplacian(),
            &times,
            &q(),
        )
        .unwrap();
        for (t, f) in traj.times.iter().zip(&traj.fields) {
            let exact = ode_oracle(3.0, m, 0.0, 1.0, &|_| 0.0, *t);
            let scale = (-0.5 * *t).exp().max(exact.abs());
            assert!((f.values[0] - exact).abs() <= 1e-7 * scale, "m = {m}, t = {t}: {} vs {exact}", f.values[0]);
        }
    }
}

#[test]
fn constant_source_matches_ode() {
    let g = SpatialGrid::periodic(16, 1.0).unwrap();
    let times = uniform_times(8.0, 17);
    let src = |b: f64| (-0.3 * b).exp() * (1.0 + 0.5 * b.sin());
    for &m in &[1.0, 1.5, 2.0] {
        let mp = classify_mass(3, m).unwrap();
        let traj = solve_source(
            &|b: f64| Ok(Field::constant(g, src(b))),
            g,
            &mp,
            &Operator::laplacian(),
            &times,
            &q(),
        )
        .unwrap();
        for (t, f) in traj.times.iter().zip(&traj.fields) {
            let exact = ode_oracle(3.0, m, 0.0, 0.0, &src, *t);
            let scale = exact.abs().max(1e-3 * (-0.3 * *t).exp());
            assert!((f.values[0] - exact).abs() <= 1e-6 * scale, "m = {m}, t = {t}: {} vs {exact}", f.values[0]);
        }
    }
}

#[test]
fn critical_mass_matches_closed_form() {
    let g = SpatialGrid::periodic(128, 2.0).unwrap();
    let psi0 = Field::from_fn(g, gaussian(1.0, 0.1));
    let psi1 = Field::from_fn(g, gaussian(0.8, 0.15)).scaled(0.5);
    let mp = classify_mass(3, 2f64.sqrt()).unwrap();
    let op = Operator::laplacian();
    let times = uniform_times(8.0, 17);
    let traj = solve_linear_cauchy(&psi0, &psi1, &mp, &op, &times, &q()).unwrap();
    let v0 = solve_wave(&psi0, DataKind::Cosine, &op).unwrap();
    let big_v0 = solve_wave(&psi0, DataKind::Sine, &op).unwrap();
    let big_v1 = solve_wave(&psi1, DataKind::Sine, &op).unwrap();
    for (t, f) in traj.times.iter().zip(&traj.fields) {
        let ph = phi(*t);
        let e = (-*t).exp();
        let mut acc = Accumulator::new(g);
        v0.accumulate(&[(ph, e)], 0, &mut acc).unwrap();
        big_v0.accumulate(&[(ph, e)], 0, &mut acc).unwrap();
        big_v1.accumulate(&[(ph, e)], 0, &mut acc).unwrap();
        let exact = acc.finish();
        assert!(f.max_abs_diff(&exact) <= 1e-8, "t = {t}: {:e}", f.max_abs_diff(&exact));
    }
}

#[test]
fn critical_mass_source_matches_closed_form() {
    let g = SpatialGrid::periodic(64, 2.0).unwrap();
    let mp = classify_mass(3, 2f64.sqrt()).unwrap();
    let op = Operator::laplacian();
    let base = Field::from_fn(g, gaussian(1.0, 0.2));
    let f = |b: f64| -> Result<Field> { Ok(base.scaled((-0.5 * b).exp())) };
    let times = uniform_times(4.0, 9);
    let traj = solve_source(&f, g, &mp, &op, &times, &q()).unwrap();
    let big_v = solve_wave(&base, DataKind::Sine, &op).unwrap();
    // e^{−t} ∫₀ᵗ e^{2b} e^{−b/2} V(e^{−b} − e^{−t}) db
    let rule = dskg_core::quadrature::GaussLegendre::new(40);
    for (t, field) in traj.times.iter().zip(&traj.fields) {
        let terms: Vec<(f64, f64)> = rule
            .mapped(0.0, *t)
            .map(|(b, w)| ((-b).exp() - (-*t).exp(), w * (-*t).exp() * (1.5 * b).exp()))
            .collect();
        let mut acc = Accumulator::new(g);
        big_v.accumulate(&terms, 0, &mut acc).unwrap();
        let exact = acc.finish();
        assert!(field.max_abs_diff(&exact) <= 1e-9, "t = {t}: {:e}", field.max_abs_diff(&exact));
    }
}

#[test]
fn linearity_in_the_data() {
    let g = SpatialGrid::periodic(64, 2.0).unwrap();
    let mp = classify_mass(3, 1.0).unwrap();
    let op = Operator::laplacian();
    let times = uniform_times(3.0, 4);
    let a0 = Field::from_fn(g, gaussian(0.7, 0.15));
    let a1 = Field::from_fn(g, gaussian(1.2, 0.2));
    let b0 = Field::from_fn(g, |x| (std::f64::consts::PI * x).sin());
    let b1 = Field::zeros(g);
    let sa = solve_linear_cauchy(&a0, &a1, &mp, &op, &times, &q()).unwrap();
    let sb = solve_linear_cauchy(&b0, &b1, &mp, &op, &times, &q()).unwrap();
    let sc = solve_linear_cauchy(&a0.axpy(-2.0, &b0), &a1.axpy(-2.0, &b1), &mp, &op, &times, &q()).unwrap();
    let combo = sa.axpy(-2.0, &sb);
    let scale = sc.fields.iter().fold(0.0f64, |m, f| m.max(f.max_abs()));
    assert!(sc.max_abs_diff(&combo) <= 1e-10 * scale);
}

#[test]
fn continuity_across_zero_curved_mass() {
    let g = SpatialGrid::periodic(64, 2.0).unwrap();
    let op = Operator::laplacian();
    let times = uniform_times(4.0, 5);
    let psi0 = Field::from_fn(g, gaussian(1.0, 0.2));
    let psi1 = Field::from_fn(g, gaussian(0.9, 0.2));
    let solve = |m: f64| {
        let mp = classify_mass(3, m).unwrap();
        solve_linear_cauchy(&psi0, &psi1, &mp, &op, &times, &q()).unwrap()
    };
    let mid = solve(1.5);
    for m in [1.5 - 1e-6, 1.5 + 1e-6] {
        let s = solve(m);
        for (a, b) in s.fields.iter().zip(&mid.fields) {
            assert!(a.max_abs_diff(b) <= 1e-4 * b.max_abs(), "m = {m}");
        }
    }
}

#[test]
fn pde_residual_is_second_order_in_time_step() {
    let g = SpatialGrid::periodic(64, 2.0).unwrap();
    let op = Operator::laplacian();
    let mp = classify_mass(3, 1.0).unwrap();
    let psi0 = Field::from_fn(g, gaussian(1.0, 0.25));
    let resid = |dt: f64| {
        let times: Vec<f64> = (0..5).map(|i| 1.0 + (i as f64 - 2.0) * dt).collect();
        let traj = solve_linear_cauchy(&psi0, &Field::zeros(g), &mp, &op, &times, &q()).unwrap();
        pde_residual(&traj, None, &mp, &op).unwrap()[1]
    };
    let order = (resid(0.02) / resid(0.01)).log2();
    assert!((order - 2.0).abs() < 0.2, "order {order}");

    let zero = solve_linear_cauchy(&Field::zeros(g), &Field::zeros(g), &mp, &op, &uniform_times(1.0, 6), &q()).unwrap();
    assert!(pde_residual(&zero, None, &mp, &op).unwrap().iter().all(|&r| r == 0.0));
}

#[test]
fn critical_trajectory_residual_is_small() {
    let g = SpatialGrid::periodic(256, 2.0).unwrap();
    let op = Operator::laplacian();
    let mp = classify_mass(3, 2f64.sqrt()).unwrap();
    let psi0 = Field::from_fn(g, gaussian(1.0, 0.2));
    let dt = 1e-3;
    let times: Vec<f64> = (0..5).map(|i| 2.0 + i as f64 * dt).collect();
    let traj = solve_linear_cauchy(&psi0, &Field::zeros(g), &mp, &op, &times, &q()).unwrap();
    let r = pde_residual(&traj, None, &mp, &op).unwrap();
    assert!(r.iter().all(|&v| v <= 1e-6), "{r:?}");
}

#[test]
fn u_form_matches_psi_form() {
    let g = SpatialGrid::periodic(16, 1.0).unwrap();
    let mp = classify_mass(3, 1.0).unwrap();
    let times = uniform_times(3.0, 7);
    let u = solve_u_form(&Field::constant(g, 1.0), &Field::constant(g, 1.5), None, &mp, &Operator::laplacian(), &times, &q())
        .unwrap();
    // u'' − M²u = 0 with u(0) = 1, u'(0) = 3/2
    let big_m = 1.25f64.sqrt();
    for (t, f) in u.times.iter().zip(&u.fields) {
        let exact = (big_m * t).cosh() + 1.5 / big_m * (big_m * t).sinh();
        assert!((f.values[0] - exact).abs() <= 1e-8 * exact);
    }
}

#[test]
fn source_plan_is_reusable() {
    let g = SpatialGrid::periodic(32, 1.0).unwrap();
    let mp = classify_mass(3, 1.0).unwrap();
    let times = uniform_times(2.0, 5);
    let plan = SourcePlan::new(&mp, &times, &q()).unwrap();
    let a = plan.apply(&|b: f64| Ok(Field::constant(g, b)), g, &Operator::laplacian()).unwrap();
    let b = plan.apply(&|b: f64| Ok(Field::constant(g, 2.0 * b)), g, &Operator::laplacian()).unwrap();
    assert!(a.axpy(-0.5, &b).fields.iter().all(|f| f.max_abs() < 1e-15));
    // full panels are shared between output times
    assert!(plan.b_nodes().len() < times.iter().map(|t| (t.ceil() as usize).max(1) * 16).sum::<usize>());
}
