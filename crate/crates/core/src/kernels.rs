//! The de Sitter kernels E, K0 and K1.
//!
//! E is evaluated in the form
//!
//! ```text
//! E = D^(-1/2) (1 - w)^(-M) 2F1(1/2 - M, 1/2 - M; 1; w)
//! D = (e^-b + e^-t)^2 - r^2,   1 - w = 4 e^(-b-t) / D
//! ```
//!
//! which is even in M and real when M = -iμ. K0 uses the bracket
//! `coef1 (F1 - F2) + ((z^2 - φ^2)/2) F2` so the pole at z = φ(t) cancels
//! analytically.

use crate::error::{domain, Error, Result};
use crate::specfun::{gauss_2f1_diff_quotient, hyp2f1, HypParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance for detecting the critical and knot masses.
pub const KNOT_TOL: f64 = 1e-12;

/// Points may sit outside the chronological region by this much.
pub const ADMISSIBILITY_SLACK: f64 = 1e-12;

/// Default 2F1 tolerance used by the solvers.
pub const DEFAULT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassRegime {
    SmallMass,
    ZeroCurved,
    LargeMass,
    Critical,
    KnotPoint,
}

/// Physical mass `m` in `n` spatial dimensions with its curved mass.
///
/// `mu` stores |M|; `imaginary` is set for m > n/2, where the kernels are
/// evaluated at M = -iμ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassParameters {
    pub n: u32,
    pub m: f64,
    pub regime: MassRegime,
    pub mu: f64,
    pub imaginary: bool,
    pub sgn_m: u8,
}

impl MassParameters {
    /// Curved mass as a complex number (μ or -iμ).
    pub fn curved(&self) -> Complex64 {
        if self.imaginary {
            Complex64::new(0.0, -self.mu)
        } else {
            Complex64::new(self.mu, 0.0)
        }
    }

    pub fn half_n(&self) -> f64 {
        0.5 * self.n as f64
    }

    /// √(n² − 1)/2
    pub fn critical_mass(n: u32) -> f64 {
        let n = n as f64;
        (n * n - 1.0).sqrt() / 2.0
    }

    pub fn is_critical(&self) -> bool {
        self.regime == MassRegime::Critical
    }
}

pub fn classify_mass(n: u32, m: f64) -> Result<MassParameters> {
    if n < 1 {
        return domain(format!("spatial dimension must be >= 1, got {n}"));
    }
    if !(m > 0.0 && m.is_finite()) {
        return domain(format!("mass must be positive and finite, got {m}"));
    }
    let half_n = 0.5 * n as f64;
    let diff = m * m - half_n * half_n;
    if (m - half_n).abs() <= KNOT_TOL * half_n.max(1.0) {
        return Ok(MassParameters {
            n,
            m,
            regime: MassRegime::ZeroCurved,
            mu: 0.0,
            imaginary: false,
            sgn_m: 0,
        });
    }
    if diff > 0.0 {
        return Ok(MassParameters {
            n,
            m,
            regime: MassRegime::LargeMass,
            mu: diff.sqrt(),
            imaginary: true,
            sgn_m: 1,
        });
    }
    let mut mu = (-diff).sqrt();
    let k = (mu - 0.5).round();
    let mut regime = MassRegime::SmallMass;
    if k >= 0.0 && (mu - (k + 0.5)).abs() <= KNOT_TOL {
        mu = k + 0.5;
        regime = if k == 0.0 { MassRegime::Critical } else { MassRegime::KnotPoint };
    }
    Ok(MassParameters {
        n,
        m,
        regime,
        mu,
        imaginary: false,
        sgn_m: 1,
    })
}

/// Kernel evaluation point `(r, t; 0, b)`.
///
/// E is symmetric in (t, b), so both orderings are accepted; admissible
/// points satisfy `r <= |e^-b - e^-t|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub r: f64,
    pub t: f64,
    pub b: f64,
}

impl KernelPoint {
    pub fn new(r: f64, t: f64, b: f64) -> Self {
        Self { r, t, b }
    }
}

/// φ(t) = 1 − e^{−t}
pub fn phi(t: f64) -> f64 {
    -(-t).exp_m1()
}

/// Geometry shared by E and K0: D, w and 1 − w computed without cancellation.
struct Geometry {
    d: f64,
    w: f64,
    wc: f64,
}

fn geometry(r: f64, t: f64, b: f64) -> Result<Geometry> {
    if !(r.is_finite() && t.is_finite() && b.is_finite()) {
        return domain("non-finite kernel point");
    }
    if r < 0.0 {
        return domain(format!("negative spatial offset r = {r}"));
    }
    let eb = (-b).exp();
    let et = (-t).exp();
    // |e^-b − e^-t| = e^-min · (1 − e^-(|t−b|))
    let gap = (-(b.min(t))).exp() * -(-(t - b).abs()).exp_m1();
    if r > gap + ADMISSIBILITY_SLACK {
        return domain(format!(
            "point (r={r}, t={t}, b={b}) outside the chronological region (limit {gap})"
        ));
    }
    let sum = eb + et;
    let d = (sum - r) * (sum + r);
    let w_num = ((gap - r) * (gap + r)).max(0.0);
    let w = w_num / d;
    let wc = 4.0 * eb * et / d;
    Ok(Geometry { d, w, wc })
}

fn real_part(v: Complex64, tol: f64, what: &str) -> Result<f64> {
    if v.im.abs() > 1e3 * tol * v.re.abs().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "{what}: imaginary residue {} exceeds tolerance for value {}",
            v.im, v.re
        )));
    }
    Ok(v.re)
}

/// E(r, t; 0, b; M).
pub fn kernel_e(p: KernelPoint, mp: &MassParameters, tol: f64) -> Result<f64> {
    if mp.is_critical() {
        geometry(p.r, p.t, p.b)?;
        return Ok(0.5 * (0.5 * (p.b + p.t)).exp());
    }
    let v = kernel_e_complex(p, mp, tol)?;
    real_part(v, tol, "kernel E")
}

/// E before the real part is taken; the imaginary part is rounding noise.
pub fn kernel_e_complex(p: KernelPoint, mp: &MassParameters, tol: f64) -> Result<Complex64> {
    let g = geometry(p.r, p.t, p.b)?;
    let m = mp.curved();
    let a = 0.5 - m;
    let f = hyp2f1(a, a, Complex64::new(1.0, 0.0), g.w, g.wc, tol)?;
    Ok((-m * g.wc.ln()).exp() * f / g.d.sqrt())
}

/// K1(z, t; M) = E(z, t; 0, 0; M).
pub fn kernel_k1(z: f64, t: f64, mp: &MassParameters, tol: f64) -> Result<f64> {
    if t < 0.0 {
        return domain(format!("K1 needs t >= 0, got {t}"));
    }
    kernel_e(KernelPoint::new(z, t, 0.0), mp, tol)
}

/// K0(z, t; M) = −∂_b E(z, t; 0, b; M) at b = 0.
pub fn kernel_k0(z: f64, t: f64, mp: &MassParameters, tol: f64) -> Result<f64> {
    if t <= 0.0 {
        return domain(format!("K0 needs t > 0, got {t}"));
    }
    let g = geometry(z, t, 0.0)?;
    if mp.is_critical() {
        return Ok(-0.25 * (0.5 * t).exp());
    }
    let m = mp.curved();
    let et = (-t).exp();
    let one = Complex64::new(1.0, 0.0);
    let coef1 = et - 1.0 + m * (et * et - 1.0 - z * z);
    let p1 = HypParams::new(0.5 - m, 0.5 - m, one, g.w);
    let p2 = HypParams::new(-0.5 - m, 0.5 - m, one, g.w);
    let f2 = hyp2f1(p2.a, p2.b, p2.c, g.w, g.wc, tol)?;
    // (F1 − F2)/(φ² − z²) = [(F1 − F2)/w] / D
    let quotient = gauss_2f1_diff_quotient(&p1, &p2, g.wc, tol)?;
    let bracket = coef1 * quotient / g.d - 0.5 * f2;
    let v = (-m * g.wc.ln()).exp() * bracket / g.d.sqrt();
    real_part(v, tol, "kernel K0")
}

/// Centered-difference residual of E_tt − e^{−2t} E_rr − M² E at `p`, with
/// emission time `p.b` held fixed and step `h` in both r and t.
pub fn kernel_pde_residual(p: KernelPoint, mp: &MassParameters, h: f64, tol: f64) -> Result<f64> {
    let e = |r: f64, t: f64| kernel_e(KernelPoint::new(r, t, p.b), mp, tol);
    let c = e(p.r, p.t)?;
    let e_tt = (e(p.r, p.t + h)? - 2.0 * c + e(p.r, p.t - h)?) / (h * h);
    let e_rr = (e(p.r + h, p.t)? - 2.0 * c + e(p.r - h, p.t)?) / (h * h);
    let m2 = (mp.curved() * mp.curved()).re;
    Ok(e_tt - (-2.0 * p.t).exp() * e_rr - m2 * c)
}

/// Both bracket coefficients of the explicit K0 display, for the identity
/// `coef1 + coef2 = (z² − φ(t)²)/2`.
pub fn k0_coefficients(z: f64, t: f64, m: f64) -> (f64, f64) {
    let et = (-t).exp();
    let coef1 = et - 1.0 + m * (et * et - 1.0 - z * z);
    let coef2 = (1.0 - et * et + z * z) * (0.5 + m);
    (coef1, coef2)
}
