//! Shared oracles for the integration tests.
#![allow(dead_code)]

use dskg_core::quadrature::adaptive_gk15;

/// Impulse response of ψ'' + nψ' + m²ψ: the solution with ψ(0) = 0,
/// ψ'(0) = 1 and no forcing.
pub fn impulse_response(n: f64, m: f64, tau: f64) -> f64 {
    impulse_pair(n, m, tau).0
}

/// (G, G') for the impulse response G.
fn impulse_pair(n: f64, m: f64, tau: f64) -> (f64, f64) {
    let d = 0.25 * n * n - m * m;
    let e = (-0.5 * n * tau).exp();
    let (g, c) = if d.abs() < 1e-14 {
        (tau, 1.0)
    } else if d > 0.0 {
        let mu = d.sqrt();
        ((mu * tau).sinh() / mu, (mu * tau).cosh())
    } else {
        let mu = (-d).sqrt();
        ((mu * tau).sin() / mu, (mu * tau).cos())
    };
    (e * g, e * (c - 0.5 * n * g))
}

/// ψ(t) for ψ'' + nψ' + m²ψ = g(t), ψ(0) = y0, ψ'(0) = y1. The forced part
/// is the Duhamel integral ∫₀ᵗ G(t − b) g(b) db, integrated adaptively.
pub fn ode_oracle(n: f64, m: f64, y0: f64, y1: f64, g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
    let (gt, dgt) = impulse_pair(n, m, t);
    let mut v = y0 * (dgt + n * gt) + y1 * gt;
    if t > 0.0 {
        let forced = adaptive_gk15(|b| impulse_response(n, m, t - b) * g(b), 0.0, t, 1e-16, 1e-14, 10_000)
            .expect("Duhamel oracle failed");
        v += forced.value;
    }
    v
}

pub fn gaussian(x0: f64, sigma: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x| (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp()
}
