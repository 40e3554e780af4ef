//! Integral-transform assembly of de Sitter Klein–Gordon solutions from base
//! wave solutions.
//!
//! Linear Cauchy problem, with φ = 1 − e^{−t}:
//!
//! ```text
//! ψ(t) = e^{−(n−1)t/2} v₀(φ) + e^{−nt/2} ∫₀^φ v₀(z) [2K0 + nK1](z, t) dz
//!        + 2 e^{−nt/2} ∫₀^φ v₁(z) K1(z, t) dz
//! ```
//!
//! Source problem:
//!
//! ```text
//! ψ(t) = 2 e^{−nt/2} ∫₀ᵗ db e^{nb/2} ∫₀^{e^{−b}−e^{−t}} v_f(r; b) E(r, t; 0, b) dr
//! ```
//!
//! The kernels vary on the scale e^{−t} near the light cone, so the inner
//! integrals use a composite Gauss–Legendre rule in ln(e^{−b} + e^{−t} − r),
//! one panel per unit of the log variable. The outer b-integral uses fixed
//! unit panels [k, k + 1] so wave solves are shared between output times.

use crate::error::{domain, Error, Result};
use crate::kernels::{kernel_e, kernel_k0, kernel_k1, phi, KernelPoint, MassParameters, DEFAULT_TOL};
use crate::quadrature::{composite_nodes, graded_nodes, GaussLegendre};
use crate::wave::{solve_wave, Accumulator, DataKind, Field, Operator, SpatialGrid, WaveSolution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// ψ(·, t) sampled at increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: SpatialGrid,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    pub mass: MassParameters,
}

impl Trajectory {
    pub fn new(grid: SpatialGrid, times: Vec<f64>, fields: Vec<Field>, mass: MassParameters) -> Result<Self> {
        check_times(&times)?;
        if fields.len() != times.len() {
            return domain(format!("{} fields for {} times", fields.len(), times.len()));
        }
        if fields.iter().any(|f| f.grid != grid) {
            return domain("trajectory fields live on different grids");
        }
        Ok(Self { grid, times, fields, mass })
    }

    pub fn zeros(grid: SpatialGrid, times: Vec<f64>, mass: MassParameters) -> Result<Self> {
        let fields = vec![Field::zeros(grid); times.len()];
        Self::new(grid, times, fields, mass)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest grid-max difference to another trajectory on the same times.
    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    /// Pointwise map applied to every field.
    pub fn map_fields(&self, f: impl Fn(f64, &Field) -> Field) -> Trajectory {
        let fields = self.times.iter().zip(&self.fields).map(|(&t, u)| f(t, u)).collect();
        Trajectory { grid: self.grid, times: self.times.clone(), fields, mass: self.mass }
    }

    /// self + c · other
    pub fn axpy(&self, c: f64, other: &Trajectory) -> Trajectory {
        let fields = self.fields.iter().zip(&other.fields).map(|(a, b)| a.axpy(c, b)).collect();
        Trajectory { grid: self.grid, times: self.times.clone(), fields, mass: self.mass }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return domain("empty time grid");
    }
    if times[0] < 0.0 || times.iter().any(|t| !t.is_finite()) {
        return domain("times must be finite and non-negative");
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("times must be strictly increasing");
    }
    Ok(())
}

/// `count` equally spaced times on [0, t_end].
pub fn uniform_times(t_end: f64, count: usize) -> Vec<f64> {
    let k = (count.max(2) - 1) as f64;
    (0..count.max(2)).map(|i| t_end * i as f64 / k).collect()
}

/// `count` times equally spaced in φ(t) = 1 − e^{−t} on [0, φ(t_end)].
pub fn uniform_phi_times(t_end: f64, count: usize) -> Vec<f64> {
    let k = (count.max(2) - 1) as f64;
    let top = phi(t_end);
    (0..count.max(2))
        .map(|i| if i + 1 == count.max(2) { t_end } else { -(-(top * i as f64 / k)).ln_1p() })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    GaussLegendre,
}

/// Node counts for the transform integrals. Counts are per panel of the
/// composite rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub n_s: usize,
    pub n_b: usize,
    pub n_r: usize,
    pub rule: QuadratureRule,
    /// Absolute amount trimmed from the upper limit of the inner integrals.
    pub endpoint_pad: f64,
    /// Largest panel width in the original variable.
    pub max_panel: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_s: 24, n_b: 16, n_r: 16, rule: QuadratureRule::GaussLegendre, endpoint_pad: 0.0, max_panel: 0.25 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_s < 8 || self.n_b < 8 || self.n_r < 8 {
            return domain(format!(
                "quadrature needs at least 8 nodes per panel (n_s={}, n_b={}, n_r={})",
                self.n_s, self.n_b, self.n_r
            ));
        }
        if !(self.endpoint_pad >= 0.0) {
            return domain("endpoint_pad must be non-negative");
        }
        if !(self.max_panel > 0.0) {
            return domain("max_panel must be positive");
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self { n_s: 2 * self.n_s, n_b: 2 * self.n_b, n_r: 2 * self.n_r, ..*self }
    }
}

/// Linear Cauchy problem ψ(0) = ψ0, ψ_t(0) = ψ1 with f = 0.
pub fn solve_linear_cauchy(
    psi0: &Field,
    psi1: &Field,
    mp: &MassParameters,
    op: &Operator,
    times: &[f64],
    q: &QuadratureSpec,
) -> Result<Trajectory> {
    check_times(times)?;
    q.validate()?;
    if psi0.grid != psi1.grid {
        return domain("initial data live on different grids");
    }
    let grid = psi0.grid;
    let sol0 = (!psi0.is_zero()).then(|| solve_wave(psi0, DataKind::Cosine, op)).transpose()?;
    let sol1 = (!psi1.is_zero()).then(|| solve_wave(psi1, DataKind::Cosine, op)).transpose()?;
    let rule = GaussLegendre::new(q.n_s);
    let n = mp.n as f64;
    let fields = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(psi0.clone());
            }
            let ph = phi(t);
            let eps = (-t).exp();
            let hi = (ph - q.endpoint_pad).max(0.0);
            let nodes = graded_nodes(&rule, 0.0, hi, 1.0 + eps, q.max_panel);
            let damp = (-0.5 * n * t).exp();
            let mut acc = Accumulator::new(grid);
            if let Some(s0) = &sol0 {
                let mut terms = Vec::with_capacity(nodes.len() + 1);
                terms.push((ph, (-0.5 * (n - 1.0) * t).exp()));
                for &(z, w) in &nodes {
                    let k0 = kernel_k0(z, t, mp, DEFAULT_TOL)?;
                    let k1 = kernel_k1(z, t, mp, DEFAULT_TOL)?;
                    terms.push((z, w * damp * (2.0 * k0 + n * k1)));
                }
                s0.accumulate(&terms, 0, &mut acc)?;
            }
            if let Some(s1) = &sol1 {
                let terms = nodes
                    .iter()
                    .map(|&(z, w)| Ok((z, 2.0 * w * damp * kernel_k1(z, t, mp, DEFAULT_TOL)?)))
                    .collect::<Result<Vec<_>>>()?;
                s1.accumulate(&terms, 0, &mut acc)?;
            }
            Ok(acc.finish())
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(grid, times.to_vec(), fields, *mp)
}

/// Source term f(·, b) for the transform.
pub trait SourceField: Sync {
    fn at(&self, b: f64) -> Result<Field>;
}

impl<F> SourceField for F
where
    F: Fn(f64) -> Result<Field> + Sync,
{
    fn at(&self, b: f64) -> Result<Field> {
        self(b)
    }
}

/// Kernel weights of the source double integral for fixed output times.
///
/// Independent of the source itself, so one plan serves every Picard
/// iteration on the same time grid.
#[derive(Debug, Clone)]
pub struct SourcePlan {
    mass: MassParameters,
    times: Vec<f64>,
    b_nodes: Vec<f64>,
    /// per output time: (b-node index, sorted (r, coefficient) pairs)
    terms: Vec<Vec<EmissionTerms>>,
}

type EmissionTerms = (usize, Vec<(f64, f64)>);

impl SourcePlan {
    pub fn new(mp: &MassParameters, times: &[f64], q: &QuadratureSpec) -> Result<Self> {
        check_times(times)?;
        q.validate()?;
        let b_rule = GaussLegendre::new(q.n_b);
        let r_rule = GaussLegendre::new(q.n_r);
        let n = mp.n as f64;
        // outer nodes: unit panels [k, k+1] up to floor(t), then [floor(t), t]
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut b_nodes = Vec::new();
        let mut per_time_b = Vec::with_capacity(times.len());
        for &t in times {
            let mut nodes = Vec::new();
            let full = t.floor() as usize;
            for k in 0..full {
                nodes.extend(b_rule.mapped(k as f64, k as f64 + 1.0));
            }
            if t > full as f64 {
                nodes.extend(composite_nodes(&b_rule, full as f64, t, 1.0));
            }
            let mut entries = Vec::with_capacity(nodes.len());
            for (b, wb) in nodes {
                let id = *index.entry(b.to_bits()).or_insert_with(|| {
                    b_nodes.push(b);
                    b_nodes.len() - 1
                });
                entries.push((id, b, wb));
            }
            per_time_b.push(entries);
        }
        let terms = times
            .par_iter()
            .zip(per_time_b.par_iter())
            .map(|(&t, entries)| {
                let eps = (-t).exp();
                let pref = 2.0 * (-0.5 * n * t).exp();
                entries
                    .iter()
                    .map(|&(id, b, wb)| {
                        let big_r = (-b).exp();
                        let hi = (big_r - eps - q.endpoint_pad).max(0.0);
                        let nodes = graded_nodes(&r_rule, 0.0, hi, big_r + eps, q.max_panel);
                        let outer = pref * wb * (0.5 * n * b).exp();
                        let rs = nodes
                            .into_iter()
                            .map(|(r, wr)| {
                                let e = kernel_e(KernelPoint::new(r, t, b), mp, DEFAULT_TOL)?;
                                Ok((r, outer * wr * e))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok((id, rs))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mass: *mp, times: times.to_vec(), b_nodes, terms })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Emission times at which the source is sampled.
    pub fn b_nodes(&self) -> &[f64] {
        &self.b_nodes
    }

    /// Total kernel evaluations stored in the plan.
    pub fn size(&self) -> usize {
        self.terms.iter().flatten().map(|(_, rs)| rs.len()).sum()
    }

    /// Evaluates the source integral for `f` on a grid.
    pub fn apply(&self, f: &dyn SourceField, grid: SpatialGrid, op: &Operator) -> Result<Trajectory> {
        let sols: Vec<Option<WaveSolution>> = self
            .b_nodes
            .par_iter()
            .map(|&b| {
                let g = f.at(b)?;
                if g.grid != grid {
                    return domain("source field on a different grid");
                }
                if g.is_zero() {
                    Ok(None)
                } else {
                    solve_wave(&g, DataKind::Cosine, op).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        let fields = self
            .terms
            .par_iter()
            .map(|entries| {
                let mut acc = Accumulator::new(grid);
                for (id, rs) in entries {
                    if let Some(sol) = &sols[*id] {
                        sol.accumulate(rs, 0, &mut acc)?;
                    }
                }
                Ok(acc.finish())
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(grid, self.times.clone(), fields, self.mass)
    }
}

/// Source problem with zero Cauchy data.
pub fn solve_source(
    f: &dyn SourceField,
    grid: SpatialGrid,
    mp: &MassParameters,
    op: &Operator,
    times: &[f64],
    q: &QuadratureSpec,
) -> Result<Trajectory> {
    SourcePlan::new(mp, times, q)?.apply(f, grid, op)
}

/// Solution of u_tt − e^{−2t}Au − M²u = f_u with u(0) = u0, u_t(0) = u1,
/// obtained from the ψ-form through u = e^{nt/2}ψ.
pub fn solve_u_form(
    u0: &Field,
    u1: &Field,
    f_u: Option<&dyn SourceField>,
    mp: &MassParameters,
    op: &Operator,
    times: &[f64],
    q: &QuadratureSpec,
) -> Result<Trajectory> {
    let half_n = mp.half_n();
    // ψ0 = u0, ψ1 = u1 − (n/2) u0
    let psi1 = u1.axpy(-half_n, u0);
    let mut psi = solve_linear_cauchy(u0, &psi1, mp, op, times, q)?;
    if let Some(f_u) = f_u {
        let f_psi = |b: f64| Ok(f_u.at(b)?.scaled((-half_n * b).exp()));
        let src = solve_source(&f_psi, u0.grid, mp, op, times, q)?;
        psi = psi.axpy(1.0, &src);
    }
    Ok(psi.map_fields(|t, u| u.scaled((half_n * t).exp())))
}

/// Right-hand side of the ψ equation as a function of (t, ψ(t)).
pub type Rhs<'a> = &'a (dyn Fn(f64, &Field) -> Result<Field> + Sync);

/// Centered-difference residual of ψ_tt + nψ_t − e^{−2t}Aψ + m²ψ − rhs in
/// the grid max norm, at every interior sample of a uniform time grid.
pub fn pde_residual(traj: &Trajectory, rhs: Option<Rhs<'_>>, mp: &MassParameters, op: &Operator) -> Result<Vec<f64>> {
    let k = traj.len();
    if k < 5 {
        return Err(Error::InsufficientSamples { needed: 5, got: k });
    }
    let dt = traj.times[1] - traj.times[0];
    if traj
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0))
    {
        return domain("pde_residual needs uniformly spaced times");
    }
    let n = mp.n as f64;
    let m2 = mp.m * mp.m;
    (1..k - 1)
        .into_par_iter()
        .map(|i| {
            let t = traj.times[i];
            let (um, u, up) = (&traj.fields[i - 1], &traj.fields[i], &traj.fields[i + 1]);
            let au = op.apply(u)?;
            let f = match rhs {
                Some(r) => Some(r(t, u)?),
                None => None,
            };
            let e2 = (-2.0 * t).exp();
            let mut worst = 0.0f64;
            for j in 0..u.values.len() {
                let tt = (up.values[j] - 2.0 * u.values[j] + um.values[j]) / (dt * dt);
                let d = (up.values[j] - um.values[j]) / (2.0 * dt);
                let mut r = tt + n * d - e2 * au.values[j] + m2 * u.values[j];
                if let Some(f) = &f {
                    r -= f.values[j];
                }
                worst = worst.max(r.abs());
            }
            Ok(worst)
        })
        .collect()
}

/// Relative change of a trajectory when every node count is doubled.
pub fn quadrature_change(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    let scale = fine.fields.iter().fold(0.0f64, |m, f| m.max(f.max_abs()));
    if scale == 0.0 {
        return coarse.max_abs_diff(fine);
    }
    coarse
        .fields
        .iter()
        .zip(&fine.fields)
        .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b) / b.max_abs().max(1e-300 + 1e-12 * scale)))
}

/// Threshold for [`self_check`].
pub const SELF_CHECK_LIMIT: f64 = 1e-6;

/// Re-runs `solve` with doubled node counts and fails when the output moves
/// by more than [`SELF_CHECK_LIMIT`] relative.
pub fn self_check<F>(q: &QuadratureSpec, solve: F) -> Result<(Trajectory, f64)>
where
    F: Fn(&QuadratureSpec) -> Result<Trajectory>,
{
    let coarse = solve(q)?;
    let fine = solve(&q.doubled())?;
    let change = quadrature_change(&coarse, &fine);
    if change > SELF_CHECK_LIMIT {
        return Err(Error::QuadratureUnderResolved { change, limit: SELF_CHECK_LIMIT });
    }
    Ok((fine, change))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grids() {
        let u = uniform_times(2.0, 5);
        assert_eq!(u, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let p = uniform_phi_times(3.0, 4);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 3.0);
        let d1 = phi(p[1]) - phi(p[0]);
        let d2 = phi(p[2]) - phi(p[1]);
        assert!((d1 - d2).abs() < 1e-14);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec { n_s: 4, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
