//! Sobolev and Besov norms of grid fields, weighted trajectory norms and
//! decay-rate fits.
//!
//! Spectral norms use the continuum normalisation ‖u‖² = (P/M²) Σ |û_k|² for
//! an M-point array of period P, so the s = 0 norm is the trapezoid L² norm.

use crate::error::{domain, Error, Result};
use crate::transform::Trajectory;
use crate::wave::{Field, GridKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormSpec {
    Sobolev { s: f64 },
    /// p, q may be `f64::INFINITY`.
    Besov { s: f64, p: f64, q: f64 },
}

pub fn norm(u: &Field, spec: NormSpec) -> Result<f64> {
    match spec {
        NormSpec::Sobolev { s } => sobolev_norm(u, s),
        NormSpec::Besov { .. } => besov_norm(u, spec),
    }
}

/// ‖(1 + |ξ|²)^{s/2} û‖₂
pub fn sobolev_norm(u: &Field, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("Sobolev index must be non-negative, got {s}"));
    }
    let g = u.grid;
    let spec = g.forward(&u.values);
    let xi = g.wavenumbers();
    let m = spec.len() as f64;
    let sum: f64 = spec
        .iter()
        .zip(&xi)
        .map(|(c, k)| (1.0 + k * k).powf(s) * c.norm_sqr())
        .sum();
    Ok(g.norm_factor() * (g.period() / (m * m) * sum).sqrt())
}

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1, built from exp(−1/x).
fn smooth_step(x: f64) -> f64 {
    let f = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let a = f(x);
    let b = f(1.0 - x);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Low-pass profile χ: 1 on |ξ| ≤ 1, 0 on |ξ| ≥ 2.
fn chi(xi: f64) -> f64 {
    smooth_step(2.0 - xi.abs())
}

/// Dyadic block φ_j(ξ): φ_0 = χ, φ_j = χ(2^{−j}ξ) − χ(2^{1−j}ξ), supported
/// in 2^{j−1} < |ξ| < 2^{j+1}.
pub fn dyadic_block(j: usize, xi: f64) -> f64 {
    if j == 0 {
        chi(xi)
    } else {
        let s = 2f64.powi(-(j as i32));
        chi(s * xi) - chi(2.0 * s * xi)
    }
}

/// Number of dyadic blocks needed to cover every grid frequency.
pub fn dyadic_block_count(xi_max: f64) -> usize {
    let mut j = 0;
    while 2f64.powi(j as i32 - 1) < xi_max.abs().max(1.0) {
        j += 1;
    }
    j + 1
}

/// Littlewood–Paley pieces (φ_j û)ˇ of a field.
pub fn dyadic_pieces(u: &Field) -> Vec<Field> {
    let g = u.grid;
    let spec = g.forward(&u.values);
    let xi = g.wavenumbers();
    let xi_max = xi.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    (0..dyadic_block_count(xi_max))
        .map(|j| {
            let block: Vec<Complex64> = spec.iter().zip(&xi).map(|(c, &k)| c * dyadic_block(j, k)).collect();
            Field { grid: g, values: g.inverse(block) }
        })
        .collect()
}

fn lp_norm(u: &Field, p: f64) -> f64 {
    let g = u.grid;
    let h = g.h();
    match g.kind {
        GridKind::Periodic1D => {
            if p.is_infinite() {
                u.max_abs()
            } else {
                (h * u.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
            }
        }
        GridKind::Radial3D => {
            if p.is_infinite() {
                u.max_abs()
            } else {
                let four_pi = 4.0 * std::f64::consts::PI;
                let sum: f64 = g
                    .points()
                    .iter()
                    .zip(&u.values)
                    .map(|(r, v)| four_pi * r * r * v.abs().powf(p))
                    .sum();
                (h * sum).powf(1.0 / p)
            }
        }
    }
}

/// (Σ_j (2^{js} ‖(φ_j û)ˇ‖_p)^q)^{1/q}
pub fn besov_norm(u: &Field, spec: NormSpec) -> Result<f64> {
    let (s, p, q) = match spec {
        NormSpec::Besov { s, p, q } => (s, p, q),
        NormSpec::Sobolev { s } => return sobolev_norm(u, s),
    };
    if !(s >= 0.0) {
        return domain(format!("Besov index must be non-negative, got {s}"));
    }
    if !(p >= 1.0) || !(q >= 1.0) {
        return domain(format!("Besov exponents need p, q >= 1 (p={p}, q={q})"));
    }
    let terms: Vec<f64> = dyadic_pieces(u)
        .iter()
        .enumerate()
        .map(|(j, piece)| 2f64.powf(j as f64 * s) * lp_norm(piece, p))
        .collect();
    if q.is_infinite() {
        Ok(terms.iter().cloned().fold(0.0, f64::max))
    } else {
        Ok(terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q))
    }
}

/// Per-sample H_(s) norms of a trajectory.
pub fn sobolev_series(traj: &Trajectory, s: f64) -> Result<Vec<f64>> {
    traj.fields.iter().map(|f| sobolev_norm(f, s)).collect()
}

/// max_t e^{γt} ‖ψ(·, t)‖_{H_(s)}
pub fn weighted_sup_norm(traj: &Trajectory, gamma: f64, s: f64) -> Result<f64> {
    let norms = sobolev_series(traj, s)?;
    Ok(traj
        .times
        .iter()
        .zip(norms)
        .fold(0.0, |m, (&t, n)| m.max((gamma * t).exp() * n)))
}

/// Least-squares decay exponent on a time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t_a: f64,
    pub t_b: f64,
    pub gamma: f64,
    pub r_squared: f64,
    pub log_corrected: bool,
    /// Coefficient of ln(1 + t) when the logarithmic correction is fitted.
    pub beta: Option<f64>,
    pub samples: usize,
}

/// Minimum samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Fits −ln(norm) = γt + c, or γt + β ln(1 + t) + c with `log_correction`,
/// on samples with t ∈ [t_a, t_b].
pub fn fit_decay_rate(times: &[f64], norms: &[f64], window: (f64, f64), log_correction: bool) -> Result<DecayFit> {
    let (t_a, t_b) = window;
    if !(t_b > t_a) {
        return domain(format!("empty fit window [{t_a}, {t_b}]"));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= t_a && **t <= t_b)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, got: pts.len() });
    }
    if pts.iter().any(|(_, v)| !(*v > 0.0)) {
        return domain("decay fit needs positive norms on the window");
    }
    let ys: Vec<f64> = pts.iter().map(|(_, v)| -v.ln()).collect();
    let basis = |t: f64| -> Vec<f64> {
        if log_correction {
            vec![t, (1.0 + t).ln(), 1.0]
        } else {
            vec![t, 1.0]
        }
    };
    let rows: Vec<Vec<f64>> = pts.iter().map(|(t, _)| basis(*t)).collect();
    let coef = least_squares(&rows, &ys)?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = rows
        .iter()
        .zip(&ys)
        .map(|(r, y)| (y - r.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>()).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit {
        t_a,
        t_b,
        gamma: coef[0],
        r_squared,
        log_corrected: log_correction,
        beta: log_correction.then(|| coef[1]),
        samples: pts.len(),
    })
}

/// Normal equations solved by Gaussian elimination with partial pivoting;
/// the columns are rescaled first to keep the system well conditioned.
fn least_squares(rows: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
    let k = rows[0].len();
    let scale: Vec<f64> = (0..k)
        .map(|c| rows.iter().fold(0.0f64, |m, r| m.max(r[c].abs())).max(1e-300))
        .collect();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (r, y) in rows.iter().zip(ys) {
        for i in 0..k {
            let ri = r[i] / scale[i];
            for j in 0..k {
                a[i][j] += ri * r[j] / scale[j];
            }
            a[i][k] += ri * y;
        }
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty");
        if a[piv][col].abs() < 1e-14 {
            return domain("decay fit is degenerate on this window");
        }
        a.swap(col, piv);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (dst, src) in a[row][col..=k].iter_mut().zip(&pivot_row[col..=k]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][k] - s) / a[i][i];
    }
    Ok(x.iter().zip(&scale).map(|(v, s)| v / s).collect())
}
