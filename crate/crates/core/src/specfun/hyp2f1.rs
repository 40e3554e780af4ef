//! Gauss hypergeometric function 2F1(a, b; c; z) on z ∈ [0, 1).
//!
//! Branches:
//! - terminating polynomial when `a` or `b` is a non-positive integer;
//! - direct Maclaurin series for `z <= Z_SWITCH`;
//! - the z → 1 − z connection formula above the switch, with the
//!   logarithmic form when `c − a − b` is an integer.

use super::gamma::{digamma, digamma_int, gamma, non_positive_integer, rgamma};
use crate::error::{domain, Error, Result};
use num_complex::Complex64;

/// Branch point between the direct series and the connection formula.
pub const Z_SWITCH: f64 = 0.7;

/// Hard cap on series terms.
pub const MAX_TERMS: usize = 1_000_000;

/// Integrality tolerance for `c − a − b` and for terminating parameters.
pub const INTEGER_TOL: f64 = 1e-12;

/// Parameters of one 2F1 evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub z: f64,
}

impl HypParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Self {
        Self { a, b, c, z }
    }

    pub fn real(a: f64, b: f64, c: f64, z: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), z)
    }
}

/// 2F1(a, b; c; z) with `|S − F| <= tol (1 + |S|)`.
pub fn gauss_2f1(p: &HypParams, tol: f64) -> Result<Complex64> {
    hyp2f1(p.a, p.b, p.c, p.z, 1.0 - p.z, tol)
}

/// Same as [`gauss_2f1`], with the complement `1 − z` supplied by the caller.
///
/// Kernel code knows `1 − z` in closed form, which matters when `z` is
/// within a few ulps of 1.
pub(crate) fn hyp2f1(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z: f64,
    zc: f64,
    tol: f64,
) -> Result<Complex64> {
    check_args(c, z, tol)?;
    if z == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if let Some(a_int) = terminating(a).or_else(|| terminating(b)) {
        let (a, b) = if terminating(a).is_some() { (snap(a), b) } else { (snap(b), a) };
        return Ok(polynomial(a, b, c, z, a_int));
    }
    if z <= Z_SWITCH {
        return maclaurin(a, b, c, z, tol);
    }
    connection(a, b, c, zc, tol)
}

fn check_args(c: Complex64, z: f64, tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return domain(format!("tolerance must be positive and finite, got {tol}"));
    }
    if !(0.0..1.0).contains(&z) {
        return domain(format!("2F1 argument z = {z} outside [0, 1)"));
    }
    if non_positive_integer(c).is_some() {
        return domain(format!("c = {c} is a non-positive integer"));
    }
    Ok(())
}

fn terminating(a: Complex64) -> Option<u64> {
    non_positive_integer(a)
}

fn snap(a: Complex64) -> Complex64 {
    Complex64::new(a.re.round(), 0.0)
}

fn polynomial(a: Complex64, b: Complex64, c: Complex64, z: f64, degree: u64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..degree {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
    }
    sum
}

/// Tail estimate for a series whose term ratio is currently `ratio`.
fn tail_small(term: f64, ratio: f64, floor_ratio: f64, sum: f64, tol: f64) -> bool {
    let rho = ratio.max(floor_ratio);
    rho < 1.0 && term * rho / (1.0 - rho) <= 0.1 * tol * (1.0 + sum)
}

fn maclaurin(a: Complex64, b: Complex64, c: Complex64, z: f64, tol: f64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut hits = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let factor = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= factor;
        sum += term;
        if term.norm() == 0.0 {
            return Ok(sum);
        }
        if tail_small(term.norm(), factor.norm(), z, sum.norm(), tol) {
            hits += 1;
            if hits >= 2 {
                return Ok(sum);
            }
        } else {
            hits = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "2F1({a}, {b}; {c}; {z}) direct series exceeded {MAX_TERMS} terms"
    )))
}

/// Integer value of `c − a − b` if it is one within [`INTEGER_TOL`].
fn integer_excess(a: Complex64, b: Complex64, c: Complex64) -> Option<i64> {
    let s = c - a - b;
    let r = s.re.round();
    if s.im.abs() <= INTEGER_TOL && (s.re - r).abs() <= INTEGER_TOL {
        Some(r as i64)
    } else {
        None
    }
}

fn connection(a: Complex64, b: Complex64, c: Complex64, w: f64, tol: f64) -> Result<Complex64> {
    match integer_excess(a, b, c) {
        Some(m) if m < 0 => {
            // Euler: F(a,b;c;z) = (1−z)^(c−a−b) F(c−a, c−b; c; z)
            let inner = hyp2f1(c - a, c - b, c, 1.0 - w, w, tol)?;
            Ok(inner * w.powi(m as i32))
        }
        Some(0) => log_connection_zero(a, b, w, tol),
        Some(m) => log_connection(a, b, m as usize, w, tol),
        None => plain_connection(a, b, c, w, tol),
    }
}

fn plain_connection(a: Complex64, b: Complex64, c: Complex64, w: f64, tol: f64) -> Result<Complex64> {
    let s = c - a - b;
    let gc = gamma(c);
    let a1 = gc * gamma(s) * rgamma(c - a) * rgamma(c - b);
    let a2 = gc * gamma(-s) * rgamma(a) * rgamma(b);
    let ws = Complex64::new(w, 0.0).powc(s);
    let scale = 1.0_f64.max(a1.norm()).max((a2 * ws).norm());
    let sub_tol = 0.1 * tol / scale;
    let f1 = if a1.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        maclaurin(a, b, 1.0 - s, w, sub_tol)?
    };
    let f2 = if a2.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        maclaurin(c - a, c - b, 1.0 + s, w, sub_tol)?
    };
    Ok(a1 * f1 + a2 * ws * f2)
}

/// c = a + b:
/// F = Γ(a+b)/(Γ(a)Γ(b)) Σ (a)_n (b)_n / (n!)² [2ψ(n+1) − ψ(a+n) − ψ(b+n) − ln w] wⁿ
fn log_connection_zero(a: Complex64, b: Complex64, w: f64, tol: f64) -> Result<Complex64> {
    let pref = gamma(a + b) * rgamma(a) * rgamma(b);
    let ln_w = w.ln();
    let mut psi_a = digamma(a);
    let mut psi_b = digamma(b);
    let mut psi_1 = digamma_int(0);
    let mut coef = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut hits = 0;
    let scale = pref.norm().max(1.0);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let term = coef * (2.0 * psi_1 - psi_a - psi_b - ln_w);
        sum += term;
        let ratio = ((a + nf) * (b + nf)).norm() / ((nf + 1.0) * (nf + 1.0)) * w;
        if tail_small(term.norm() * scale, ratio, w, (sum * pref).norm(), tol) {
            hits += 1;
            if hits >= 2 {
                return Ok(pref * sum);
            }
        } else {
            hits = 0;
        }
        coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + 1.0)) * w;
        psi_a += 1.0 / (a + nf);
        psi_b += 1.0 / (b + nf);
        psi_1 += 1.0 / (nf + 1.0);
    }
    Err(Error::NonConvergence(format!(
        "2F1({a}, {b}; a+b; 1 - {w}) logarithmic series exceeded {MAX_TERMS} terms"
    )))
}

/// c = a + b + m, m >= 1:
/// F = Γ(m)Γ(c)/(Γ(a+m)Γ(b+m)) Σ_{n<m} (a)_n (b)_n / (n! (1−m)_n) wⁿ
///   − (−w)^m Γ(c)/(Γ(a)Γ(b)) Σ_{n>=0} (a+m)_n (b+m)_n / (n! (n+m)!) wⁿ
///     × [ln w − ψ(n+1) − ψ(n+m+1) + ψ(a+n+m) + ψ(b+n+m)]
fn log_connection(a: Complex64, b: Complex64, m: usize, w: f64, tol: f64) -> Result<Complex64> {
    let mf = m as f64;
    let c = a + b + mf;
    let gc = gamma(c);

    let mut finite = Complex64::new(0.0, 0.0);
    let mut coef = Complex64::new(1.0, 0.0);
    for n in 0..m {
        let nf = n as f64;
        finite += coef;
        coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
    }
    let pref_finite = gamma(Complex64::new(mf, 0.0)) * gc * rgamma(a + mf) * rgamma(b + mf);

    let pref_log = -(-w).powi(m as i32) * gc * rgamma(a) * rgamma(b);
    let result_finite = pref_finite * finite;
    if pref_log.norm() == 0.0 {
        return Ok(result_finite);
    }
    let ln_w = w.ln();
    let am = a + mf;
    let bm = b + mf;
    let mut psi_a = digamma(am);
    let mut psi_b = digamma(bm);
    let mut psi_1 = digamma_int(0);
    let mut psi_m = digamma_int(m);
    let mut factorial_m = 1.0;
    for k in 1..=m {
        factorial_m *= k as f64;
    }
    let mut coef = Complex64::new(1.0 / factorial_m, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut hits = 0;
    let scale = pref_log.norm().max(1.0);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let term = coef * (ln_w - psi_1 - psi_m + psi_a + psi_b);
        sum += term;
        let step = (am + nf) * (bm + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
        let total = result_finite + pref_log * sum;
        if tail_small(term.norm() * scale, step.norm(), w, total.norm(), tol) {
            hits += 1;
            if hits >= 2 {
                return Ok(total);
            }
        } else {
            hits = 0;
        }
        coef *= step;
        psi_a += 1.0 / (am + nf);
        psi_b += 1.0 / (bm + nf);
        psi_1 += 1.0 / (nf + 1.0);
        psi_m += 1.0 / (nf + mf + 1.0);
    }
    Err(Error::NonConvergence(format!(
        "2F1({a}, {b}; a+b+{m}; 1 - {w}) logarithmic series exceeded {MAX_TERMS} terms"
    )))
}

/// Gauss summation: 2F1(a, b; c; 1) = Γ(c)Γ(c−a−b) / (Γ(c−a)Γ(c−b)).
pub fn gauss_2f1_at_one(a: Complex64, b: Complex64, c: Complex64) -> Result<Complex64> {
    let s = c - a - b;
    if s.re <= 0.0 {
        return domain(format!("Gauss summation needs Re(c - a - b) > 0, got {}", s.re));
    }
    if non_positive_integer(c).is_some() {
        return domain(format!("c = {c} is a non-positive integer"));
    }
    Ok(gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b))
}

/// 2F1(p1) − 2F1(p2) at a shared argument.
///
/// Below [`Z_SWITCH`] the two series are differenced term by term with
/// compensated summation, so near-equal values never cancel as totals.
pub fn gauss_2f1_diff(p1: &HypParams, p2: &HypParams, tol: f64) -> Result<Complex64> {
    if p1.z != p2.z {
        return domain(format!("differenced 2F1 needs equal arguments, got {} and {}", p1.z, p2.z));
    }
    if p1 == p2 {
        check_args(p1.c, p1.z, tol)?;
        return Ok(Complex64::new(0.0, 0.0));
    }
    let q = gauss_2f1_diff_quotient(p1, p2, 1.0 - p1.z, tol)?;
    Ok(q * p1.z)
}

/// (2F1(p1) − 2F1(p2)) / z, finite as z → 0 (limit a₁b₁/c₁ − a₂b₂/c₂).
pub fn gauss_2f1_diff_quotient(p1: &HypParams, p2: &HypParams, zc: f64, tol: f64) -> Result<Complex64> {
    let z = p1.z;
    if p1.z != p2.z {
        return domain(format!("differenced 2F1 needs equal arguments, got {} and {}", p1.z, p2.z));
    }
    check_args(p1.c, z, tol)?;
    check_args(p2.c, z, tol)?;
    if p1 == p2 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z > Z_SWITCH {
        let f1 = hyp2f1(p1.a, p1.b, p1.c, z, zc, tol)?;
        let f2 = hyp2f1(p2.a, p2.b, p2.c, z, zc, tol)?;
        return Ok((f1 - f2) / z);
    }
    let (a1, b1, c1) = (snap_if_int(p1.a), snap_if_int(p1.b), p1.c);
    let (a2, b2, c2) = (snap_if_int(p2.a), snap_if_int(p2.b), p2.c);
    // t_k = coefficient of z^k; accumulate (t1_k − t2_k) z^(k−1).
    let mut t1 = Complex64::new(1.0, 0.0);
    let mut t2 = Complex64::new(1.0, 0.0);
    let mut zpow = 1.0;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut hits = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let r1 = (a1 + kf) * (b1 + kf) / ((c1 + kf) * (kf + 1.0));
        let r2 = (a2 + kf) * (b2 + kf) / ((c2 + kf) * (kf + 1.0));
        t1 *= r1;
        t2 *= r2;
        let term = (t1 - t2) * zpow;
        // Kahan step
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if t1.norm() == 0.0 && t2.norm() == 0.0 {
            return Ok(sum);
        }
        let mag = t1.norm().max(t2.norm()) * zpow;
        let ratio = (r1.norm().max(r2.norm())) * z;
        if tail_small(mag, ratio, z, sum.norm(), tol) {
            hits += 1;
            if hits >= 2 {
                return Ok(sum);
            }
        } else {
            hits = 0;
        }
        zpow *= z;
    }
    Err(Error::NonConvergence(format!(
        "differenced 2F1 series at z = {z} exceeded {MAX_TERMS} terms"
    )))
}

fn snap_if_int(a: Complex64) -> Complex64 {
    if terminating(a).is_some() {
        snap(a)
    } else {
        a
    }
}
