//! Picard iteration for ψ = ψ_lin + G[F(ψ)], where G is the source transform
//! with zero Cauchy data, together with the admissible decay exponents for
//! the weighted metric sup_t e^{γt}‖·‖_{H_(s)}.

use crate::error::{domain, Error, Result};
use crate::kernels::{phi, MassParameters, MassRegime, KNOT_TOL};
use crate::norms::sobolev_norm;
use crate::transform::{solve_linear_cauchy, QuadratureSpec, SourceField, SourcePlan, Trajectory};
use crate::wave::{Field, Operator};
use serde::{Deserialize, Serialize};

/// Pointwise nonlinearity F(ψ) with F(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// c|ψ|^α ψ
    PowerAbs { c: f64, alpha: f64 },
    /// cψ³, Lipschitz exponent 2.
    OddCubic { c: f64 },
    /// Piecewise-linear table through (x, F(x)) with linear extrapolation.
    /// `alpha` is the Lipschitz exponent the caller asserts for it.
    Custom { points: Vec<(f64, f64)>, alpha: f64 },
}

impl Nonlinearity {
    pub fn alpha(&self) -> f64 {
        match self {
            Nonlinearity::PowerAbs { alpha, .. } | Nonlinearity::Custom { alpha, .. } => *alpha,
            Nonlinearity::OddCubic { .. } => 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha() > 0.0) {
            return domain(format!("nonlinearity exponent must be positive, got {}", self.alpha()));
        }
        match self {
            Nonlinearity::PowerAbs { c, .. } | Nonlinearity::OddCubic { c } if !c.is_finite() => {
                domain("nonlinearity coefficient must be finite")
            }
            Nonlinearity::Custom { points, .. } => {
                if points.len() < 2 {
                    return domain("custom nonlinearity needs at least two table points");
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return domain("custom nonlinearity abscissae must be strictly increasing");
                }
                if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return domain("custom nonlinearity table has non-finite entries");
                }
                if self.eval(0.0).abs() > 1e-14 {
                    return domain("custom nonlinearity must satisfy F(0) = 0");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::PowerAbs { c, alpha } => c * x.abs().powf(*alpha) * x,
            Nonlinearity::OddCubic { c } => c * x * x * x,
            Nonlinearity::Custom { points, .. } => {
                let i = match points.iter().position(|(px, _)| *px > x) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => points.len() - 2,
                };
                let (x0, y0) = points[i];
                let (x1, y1) = points[i + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn apply(&self, u: &Field) -> Field {
        u.map(|v| self.eval(v))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Nonlinearity::PowerAbs { c, .. } | Nonlinearity::OddCubic { c } => *c == 0.0,
            Nonlinearity::Custom { points, .. } => points.iter().all(|(_, y)| *y == 0.0),
        }
    }
}

/// Which existence theorem the exponent is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayProblem {
    /// Cauchy data (ψ0, ψ1), f = 0. `gamma0` is the user's choice of γ₀ for
    /// m ≥ n/2; it defaults to the largest admissible value.
    CauchyData { gamma0: Option<f64>, psi0_zero: bool },
    /// Zero Cauchy data and a source decaying at rate γ_rhs.
    SourceDriven { gamma_rhs: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaBranch {
    CauchySmallMass,
    CauchyForbiddenZeroData,
    CauchyZeroCurved,
    CauchyLargeMass,
    SourceSlowSmallMass,
    SourceFastSmallMass,
    SourceSlowLargeMass,
    SourceCriticalEqual,
    SourceFastLargeMass,
    SourceFastZeroCurved,
    SourceEqualLargeMass,
}

/// Upper bound for γ: admissible exponents satisfy γ ≤ value, or γ < value
/// when `strict`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBound {
    pub value: f64,
    pub strict: bool,
    pub branch: GammaBranch,
    /// Mass inside (√(n²−1)/2, n/2), accepted only because ψ0 = 0.
    pub forbidden_interval_warning: bool,
}

impl GammaBound {
    pub fn admits(&self, gamma: f64) -> bool {
        gamma >= 0.0 && if self.strict { gamma < self.value } else { gamma <= self.value }
    }

    /// A concrete exponent to run with: the bound itself, nudged inside
    /// when the bound is strict.
    pub fn representative(&self) -> f64 {
        if self.strict {
            self.value * (1.0 - 1e-3)
        } else {
            self.value
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= KNOT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Admissible decay exponent for the semilinear problem.
pub fn expected_gamma(mp: &MassParameters, alpha: f64, problem: DecayProblem) -> Result<GammaBound> {
    if !(alpha > 0.0) {
        return domain(format!("nonlinearity exponent must be positive, got {alpha}"));
    }
    let n = mp.n as f64;
    let half_n = 0.5 * n;
    let m = mp.m;
    let cap = n / (2.0 * (alpha + 1.0));
    let zero_curved = mp.regime == MassRegime::ZeroCurved;
    let large = mp.regime == MassRegime::LargeMass;
    // n/2 − √(n²/4 − m²), the linear decay rate below n/2
    let linear_rate = if large || zero_curved { half_n } else { half_n - mp.mu };
    let bound = |value, strict, branch| GammaBound { value, strict, branch, forbidden_interval_warning: false };
    match problem {
        DecayProblem::CauchyData { gamma0, psi0_zero } => {
            let crit = MassParameters::critical_mass(mp.n);
            if !large && !zero_curved {
                if m <= crit || close(m, crit) {
                    return Ok(bound(linear_rate / (alpha + 1.0), false, GammaBranch::CauchySmallMass));
                }
                if !psi0_zero {
                    return Err(Error::ForbiddenInterval { m, lower: crit, upper: half_n });
                }
                return Ok(GammaBound {
                    forbidden_interval_warning: true,
                    ..bound(linear_rate / (alpha + 1.0), true, GammaBranch::CauchyForbiddenZeroData)
                });
            }
            let top = 0.5 * (n - 1.0);
            let (g0, g0_strict) = match gamma0 {
                None => (top, zero_curved),
                Some(g) => {
                    let ok = g >= 0.0 && if zero_curved { g < top } else { g <= top };
                    if !ok {
                        return domain(format!("gamma0 = {g} is outside the admissible range for m = {m}"));
                    }
                    (g, false)
                }
            };
            let branch = if zero_curved { GammaBranch::CauchyZeroCurved } else { GammaBranch::CauchyLargeMass };
            if g0 <= cap {
                Ok(bound(g0, g0_strict, branch))
            } else {
                Ok(bound(cap, false, branch))
            }
        }
        DecayProblem::SourceDriven { gamma_rhs } => {
            if !(gamma_rhs >= 0.0) {
                return domain(format!("gamma_rhs must be non-negative, got {gamma_rhs}"));
            }
            if !large && !zero_curved {
                return Ok(if gamma_rhs <= linear_rate {
                    bound(gamma_rhs / (alpha + 1.0), true, GammaBranch::SourceSlowSmallMass)
                } else {
                    bound(linear_rate / (alpha + 1.0), true, GammaBranch::SourceFastSmallMass)
                });
            }
            let equal = close(gamma_rhs, half_n);
            Ok(if !equal && gamma_rhs < half_n {
                bound(gamma_rhs.min(cap), false, GammaBranch::SourceSlowLargeMass)
            } else if equal && zero_curved {
                // min{γ0, cap} with γ0 < n/2; cap < n/2 always, so cap is attained
                bound(cap, false, GammaBranch::SourceCriticalEqual)
            } else if equal {
                bound(cap, false, GammaBranch::SourceEqualLargeMass)
            } else if zero_curved {
                bound(cap, true, GammaBranch::SourceFastZeroCurved)
            } else {
                bound(cap, false, GammaBranch::SourceFastLargeMass)
            })
        }
    }
}

/// Piecewise-cubic interpolation of sampled fields in the variable φ(t).
pub struct PhiInterpolant<'a> {
    phis: Vec<f64>,
    fields: &'a [Field],
}

impl<'a> PhiInterpolant<'a> {
    pub fn new(times: &[f64], fields: &'a [Field]) -> Result<Self> {
        if times.len() != fields.len() || times.len() < 4 {
            return Err(Error::InsufficientSamples { needed: 4, got: times.len().min(fields.len()) });
        }
        Ok(Self { phis: times.iter().map(|&t| phi(t)).collect(), fields })
    }

    pub fn eval(&self, t: f64) -> Field {
        let x = phi(t);
        let k = self.phis.len();
        let i = self.phis.partition_point(|&p| p <= x).clamp(1, k - 1) - 1;
        let start = i.saturating_sub(1).min(k - 4);
        let nodes = &self.phis[start..start + 4];
        let mut out = Field::zeros(self.fields[0].grid);
        for (a, &xa) in nodes.iter().enumerate() {
            let w: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(_, &xb)| (x - xb) / (xa - xb))
                .product();
            if w != 0.0 {
                out = out.axpy(w, &self.fields[start + a]);
            }
        }
        out
    }
}

impl SourceField for PhiInterpolant<'_> {
    fn at(&self, b: f64) -> Result<Field> {
        Ok(self.eval(b))
    }
}

/// sup_t e^{γt}‖a(t) − b(t)‖_{H_(s)}
pub fn weighted_distance(a: &Trajectory, b: &Trajectory, gamma: f64, s: f64) -> Result<f64> {
    if a.times != b.times {
        return domain("trajectories are sampled at different times");
    }
    let mut worst = 0.0f64;
    for ((&t, fa), fb) in a.times.iter().zip(&a.fields).zip(&b.fields) {
        worst = worst.max((gamma * t).exp() * sobolev_norm(&fa.axpy(-1.0, fb), s)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub gamma: f64,
    pub s: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { gamma: 0.0, s: 2.0, tol: 1e-8, max_iter: 40 }
    }
}

/// Consecutive non-contracting steps tolerated before giving up.
pub const NO_CONTRACTION_LIMIT: usize = 3;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    /// d_k = sup_t e^{γt}‖ψ_{k+1} − ψ_k‖_{H_(s)}
    pub distances: Vec<f64>,
    /// d_{k+1}/d_k, recorded only when d_k > 0.
    pub ratios: Vec<f64>,
    /// Fixed-point residual of the returned trajectory.
    pub residual: f64,
    pub converged: bool,
    /// sup_t e^{γt}‖ψ‖_{H_(s)} of the returned trajectory.
    pub weighted_norm: f64,
}

impl IterationLog {
    fn push(&mut self, d: f64) {
        if let Some(&prev) = self.distances.last() {
            if prev > 0.0 {
                self.ratios.push(d / prev);
            }
        }
        self.distances.push(d);
    }

    pub fn iterations(&self) -> usize {
        self.distances.len()
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().cloned().reduce(f64::max)
    }
}

/// Driving term of the semilinear problem.
pub enum Forcing<'a> {
    Cauchy { psi0: &'a Field, psi1: &'a Field },
    Source(&'a dyn SourceField),
}

/// The mapping ψ ↦ ψ_lin + G[F(ψ)] on a fixed time grid.
pub struct PicardMap<'a> {
    pub psi_lin: Trajectory,
    nl: &'a Nonlinearity,
    op: &'a Operator,
    plan: SourcePlan,
}

impl<'a> PicardMap<'a> {
    pub fn new(
        forcing: Forcing<'_>,
        nl: &'a Nonlinearity,
        mp: &MassParameters,
        op: &'a Operator,
        times: &[f64],
        q: &QuadratureSpec,
    ) -> Result<Self> {
        nl.validate()?;
        if times.first() != Some(&0.0) {
            return domain("Picard iteration needs a time grid starting at t = 0");
        }
        let plan = SourcePlan::new(mp, times, q)?;
        let psi_lin = match forcing {
            Forcing::Cauchy { psi0, psi1 } => solve_linear_cauchy(psi0, psi1, mp, op, times, q)?,
            Forcing::Source(f) => {
                let grid = f.at(0.0)?.grid;
                plan.apply(f, grid, op)?
            }
        };
        Ok(Self { psi_lin, nl, op, plan })
    }

    /// G[F(ψ)]
    pub fn duhamel(&self, psi: &Trajectory) -> Result<Trajectory> {
        if self.nl.is_zero() {
            return Trajectory::zeros(psi.grid, psi.times.clone(), psi.mass);
        }
        let f: Vec<Field> = psi.fields.iter().map(|u| self.nl.apply(u)).collect();
        let interp = PhiInterpolant::new(&psi.times, &f)?;
        self.plan.apply(&interp, psi.grid, self.op)
    }

    /// S(ψ) = ψ_lin + G[F(ψ)]
    pub fn apply(&self, psi: &Trajectory) -> Result<Trajectory> {
        Ok(self.psi_lin.axpy(1.0, &self.duhamel(psi)?))
    }

    /// sup_t e^{γt}‖ψ − S(ψ)‖_{H_(s)}
    pub fn residual(&self, psi: &Trajectory, gamma: f64, s: f64) -> Result<f64> {
        weighted_distance(psi, &self.apply(psi)?, gamma, s)
    }

    /// Iterates from ψ_lin until d_k < tol.
    pub fn iterate(&self, opts: &PicardOptions) -> Result<(Trajectory, IterationLog)> {
        let mut log = IterationLog::default();
        let mut psi = self.psi_lin.clone();
        let mut stalled = 0;
        for _ in 0..opts.max_iter.max(1) {
            let next = self.apply(&psi)?;
            let d = weighted_distance(&next, &psi, opts.gamma, opts.s)?;
            log.push(d);
            psi = next;
            if d < opts.tol {
                log.converged = true;
                break;
            }
            match log.ratios.last() {
                Some(&r) if r >= 1.0 => stalled += 1,
                _ => stalled = 0,
            }
            if stalled >= NO_CONTRACTION_LIMIT {
                return Err(Error::NoContraction { consecutive: stalled, last_ratio: *log.ratios.last().unwrap() });
            }
        }
        log.residual = self.residual(&psi, opts.gamma, opts.s)?;
        log.weighted_norm = crate::norms::weighted_sup_norm(&psi, opts.gamma, opts.s)?;
        Ok((psi, log))
    }
}

/// Solves ψ = ψ_lin + G[F(ψ)] by Picard iteration.
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    forcing: Forcing<'_>,
    nl: &Nonlinearity,
    mp: &MassParameters,
    op: &Operator,
    times: &[f64],
    q: &QuadratureSpec,
    opts: &PicardOptions,
) -> Result<(Trajectory, IterationLog)> {
    PicardMap::new(forcing, nl, mp, op, times, q)?.iterate(opts)
}

/// sup_t e^{γt}‖ψ − ψ_lin − G[F(ψ)]‖_{H_(s)} for an arbitrary trajectory on
/// the time grid of `map`.
pub fn fixed_point_residual(map: &PicardMap<'_>, psi: &Trajectory, gamma: f64, s: f64) -> Result<f64> {
    map.residual(psi, gamma, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_table_interpolates_and_extrapolates() {
        let nl = Nonlinearity::Custom { points: vec![(-1.0, -2.0), (0.0, 0.0), (1.0, 1.0)], alpha: 1.0 };
        nl.validate().unwrap();
        assert_eq!(nl.eval(0.5), 0.5);
        assert_eq!(nl.eval(-0.5), -1.0);
        assert_eq!(nl.eval(3.0), 3.0);
        assert_eq!(nl.eval(-2.0), -4.0);
        let bad = Nonlinearity::Custom { points: vec![(0.0, 1.0), (1.0, 2.0)], alpha: 1.0 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn power_nonlinearity_is_odd() {
        let nl = Nonlinearity::PowerAbs { c: 2.0, alpha: 1.5 };
        assert_eq!(nl.eval(0.0), 0.0);
        assert!((nl.eval(-0.3) + nl.eval(0.3)).abs() < 1e-16);
        assert!((nl.eval(0.25) - 2.0 * 0.125 * 0.25).abs() < 1e-16);
    }
}
