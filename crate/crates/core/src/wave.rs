//! Base wave equation v_rr − A v = 0 on r ∈ [0, 1].
//!
//! Constant-coefficient Laplacians use exact Fourier multipliers. The radial
//! grid carries u(ρ) on ρ_j = (j + 1)h and reduces the n = 3 problem to the
//! half-line equation for w = ρu, oddly reflected at ρ = 0. Variable
//! coefficients in one dimension go through a leapfrog scheme with stored
//! snapshots.

use crate::error::{domain, Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex, OnceLock};

/// Largest admissible Courant number for the leapfrog path.
pub const MAX_CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    Periodic1D,
    Radial3D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub kind: GridKind,
    pub n: usize,
    pub l: f64,
}

fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let mut p = planner.lock().unwrap_or_else(|e| e.into_inner());
    if inverse {
        p.plan_fft_inverse(len)
    } else {
        p.plan_fft_forward(len)
    }
}

impl SpatialGrid {
    pub fn new(kind: GridKind, n: usize, l: f64) -> Result<Self> {
        if n < 16 {
            return domain(format!("grid needs at least 16 points, got {n}"));
        }
        if kind == GridKind::Periodic1D && !n.is_power_of_two() {
            return domain(format!("periodic grid size must be a power of two, got {n}"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return domain(format!("domain length must be positive, got {l}"));
        }
        Ok(Self { kind, n, l })
    }

    pub fn periodic(n: usize, l: f64) -> Result<Self> {
        Self::new(GridKind::Periodic1D, n, l)
    }

    pub fn radial(n: usize, l: f64) -> Result<Self> {
        Self::new(GridKind::Radial3D, n, l)
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Sample coordinates: x_j = jh (periodic) or ρ_j = (j + 1)h (radial).
    pub fn points(&self) -> Vec<f64> {
        let h = self.h();
        match self.kind {
            GridKind::Periodic1D => (0..self.n).map(|j| j as f64 * h).collect(),
            GridKind::Radial3D => (0..self.n).map(|j| (j + 1) as f64 * h).collect(),
        }
    }

    /// Length of the periodic array the spectral transforms act on.
    pub fn spectral_len(&self) -> usize {
        match self.kind {
            GridKind::Periodic1D => self.n,
            GridKind::Radial3D => 2 * self.n,
        }
    }

    pub fn period(&self) -> f64 {
        match self.kind {
            GridKind::Periodic1D => self.l,
            GridKind::Radial3D => 2.0 * self.l,
        }
    }

    /// Signed angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let m = self.spectral_len();
        let dk = 2.0 * std::f64::consts::PI / self.period();
        (0..m)
            .map(|k| {
                let s = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
                s * dk
            })
            .collect()
    }

    /// Index of |k| in `0..=m/2` for FFT slot k.
    pub(crate) fn folded_index(&self, k: usize) -> usize {
        let m = self.spectral_len();
        if k <= m / 2 {
            k
        } else {
            m - k
        }
    }

    /// Factor that turns one-dimensional norms of the spectral array into
    /// norms of the represented function (√(2π) for the radial reduction).
    pub fn norm_factor(&self) -> f64 {
        match self.kind {
            GridKind::Periodic1D => 1.0,
            GridKind::Radial3D => (2.0 * std::f64::consts::PI).sqrt(),
        }
    }

    /// Periodic array whose spectrum the multipliers act on.
    pub fn extend(&self, values: &[f64]) -> Vec<Complex64> {
        match self.kind {
            GridKind::Periodic1D => values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            GridKind::Radial3D => {
                let n = self.n;
                let h = self.h();
                let mut ext = vec![Complex64::new(0.0, 0.0); 2 * n];
                for k in 1..n {
                    let w = k as f64 * h * values[k - 1];
                    ext[k] = Complex64::new(w, 0.0);
                    ext[2 * n - k] = Complex64::new(-w, 0.0);
                }
                ext
            }
        }
    }

    /// Inverse of [`SpatialGrid::extend`] on odd arrays; the radial sample at
    /// ρ = L sits on the reflection node and is zero.
    pub fn restrict(&self, ext: &[Complex64]) -> Vec<f64> {
        match self.kind {
            GridKind::Periodic1D => ext.iter().map(|c| c.re).collect(),
            GridKind::Radial3D => {
                let h = self.h();
                (0..self.n)
                    .map(|j| if j + 1 < self.n { ext[j + 1].re / ((j + 1) as f64 * h) } else { 0.0 })
                    .collect()
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf = self.extend(values);
        fft_plan(buf.len(), false).process(&mut buf);
        buf
    }

    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        let m = spec.len();
        fft_plan(m, true).process(&mut spec);
        let scale = 1.0 / m as f64;
        for c in &mut spec {
            *c *= scale;
        }
        self.restrict(&spec)
    }
}

/// Real samples of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return domain(format!("field has {} samples, grid has {}", values.len(), grid.n));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("field contains non-finite samples");
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { grid, values: vec![0.0; grid.n] }
    }

    pub fn constant(grid: SpatialGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.n] }
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// self + c · other
    pub fn axpy(&self, c: f64, other: &Field) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Self { grid: self.grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Cyclic shift by `k` samples (periodic grids only).
    pub fn shifted(&self, k: usize) -> Self {
        let n = self.values.len();
        let values = (0..n).map(|j| self.values[(j + n - k % n) % n]).collect();
        Self { grid: self.grid, values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Elliptic operator A of the base wave equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Operator {
    /// c²Δ
    ConstantLaplacian { c: f64 },
    /// ∂x(a(x)∂x) on a periodic grid, sampled at the grid points.
    VarCoeff1D { a: Vec<f64>, cfl: f64 },
}

impl Operator {
    pub fn laplacian() -> Self {
        Operator::ConstantLaplacian { c: 1.0 }
    }

    /// Applies A to a field with second-order differences (variable
    /// coefficients) or spectrally (constant).
    pub fn apply(&self, u: &Field) -> Result<Field> {
        match self {
            Operator::ConstantLaplacian { c } => {
                let g = u.grid;
                let xi = g.wavenumbers();
                let mut spec = g.forward(&u.values);
                for (s, k) in spec.iter_mut().zip(&xi) {
                    *s *= -c * c * k * k;
                }
                Ok(Field { grid: g, values: g.inverse(spec) })
            }
            Operator::VarCoeff1D { a, .. } => {
                let half = half_point_coefficients(a);
                let h = u.grid.h();
                let mut out = vec![0.0; u.values.len()];
                divergence_form(&u.values, &half, h, &mut out);
                Ok(Field { grid: u.grid, values: out })
            }
        }
    }

    fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        match self {
            Operator::ConstantLaplacian { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return domain(format!("wave speed must be positive, got {c}"));
                }
            }
            Operator::VarCoeff1D { a, cfl } => {
                if grid.kind != GridKind::Periodic1D {
                    return domain("variable coefficients need a periodic 1D grid");
                }
                if a.len() != grid.n {
                    return domain(format!("coefficient has {} samples, grid has {}", a.len(), grid.n));
                }
                if a.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                    return domain("coefficient a(x) must be positive (negative elliptic operator)");
                }
                if *cfl > MAX_CFL {
                    return Err(Error::CflViolation { requested: *cfl, limit: MAX_CFL });
                }
                if !(*cfl > 0.0) {
                    return domain(format!("Courant number must be positive, got {cfl}"));
                }
            }
        }
        Ok(())
    }
}

fn half_point_coefficients(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|j| 0.5 * (a[j] + a[(j + 1) % n])).collect()
}

fn divergence_form(u: &[f64], half: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    let inv = 1.0 / (h * h);
    for j in 0..n {
        let jp = (j + 1) % n;
        let jm = (j + n - 1) % n;
        out[j] = inv * (half[j] * (u[jp] - u[j]) - half[jm] * (u[j] - u[jm]));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataKind {
    /// v(0) = g, v_r(0) = 0
    Cosine,
    /// V(0) = 0, V_r(0) = g
    Sine,
}

#[derive(Debug, Clone)]
enum Repr {
    Spectral { ghat: Vec<Complex64>, omega: Vec<f64> },
    Snapshots { dr: f64, snaps: Vec<Vec<f64>> },
}

/// Evaluator for a base wave solution on r ∈ [0, 1]. Immutable once built.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    grid: SpatialGrid,
    kind: DataKind,
    repr: Repr,
}

/// k-th r-derivative of the Fourier multiplier at frequency ω.
pub fn multiplier(kind: DataKind, omega: f64, r: f64, order: usize) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let phase = omega * r + order as f64 * FRAC_PI_2;
    match kind {
        DataKind::Cosine => {
            if order == 0 {
                (omega * r).cos()
            } else {
                omega.powi(order as i32) * phase.cos()
            }
        }
        DataKind::Sine => {
            if omega == 0.0 {
                match order {
                    0 => r,
                    1 => 1.0,
                    _ => 0.0,
                }
            } else if order == 0 {
                (omega * r).sin() / omega
            } else {
                omega.powi(order as i32 - 1) * phase.sin()
            }
        }
    }
}

pub fn solve_wave(g: &Field, kind: DataKind, op: &Operator) -> Result<WaveSolution> {
    let grid = g.grid;
    op.validate(&grid)?;
    let repr = match op {
        Operator::ConstantLaplacian { c } => {
            let ghat = grid.forward(&g.values);
            let m = grid.spectral_len();
            let omega = grid.wavenumbers()[..=m / 2].iter().map(|k| c * k.abs()).collect();
            Repr::Spectral { ghat, omega }
        }
        Operator::VarCoeff1D { a, cfl } => leapfrog(g, kind, a, *cfl),
    };
    Ok(WaveSolution { grid, kind, repr })
}

fn leapfrog(g: &Field, kind: DataKind, a: &[f64], cfl: f64) -> Repr {
    let h = g.grid.h();
    let a_max = a.iter().cloned().fold(0.0, f64::max);
    let steps = (a_max.sqrt() / (cfl * h)).ceil().max(1.0) as usize;
    let dr = 1.0 / steps as f64;
    let half = half_point_coefficients(a);
    let n = g.values.len();
    let mut lu = vec![0.0; n];
    divergence_form(&g.values, &half, h, &mut lu);
    let (u0, u1): (Vec<f64>, Vec<f64>) = match kind {
        DataKind::Cosine => {
            let u1 = g.values.iter().zip(&lu).map(|(v, l)| v + 0.5 * dr * dr * l).collect();
            (g.values.clone(), u1)
        }
        DataKind::Sine => {
            let u1 = g.values.iter().zip(&lu).map(|(v, l)| dr * v + dr * dr * dr / 6.0 * l).collect();
            (vec![0.0; n], u1)
        }
    };
    // one step beyond r = 1 for the interpolation stencil
    let mut snaps = Vec::with_capacity(steps + 3);
    snaps.push(u0);
    snaps.push(u1);
    let mut buf = vec![0.0; n];
    for k in 1..steps + 2 {
        divergence_form(&snaps[k], &half, h, &mut buf);
        let next = (0..n)
            .map(|j| 2.0 * snaps[k][j] - snaps[k - 1][j] + dr * dr * buf[j])
            .collect();
        snaps.push(next);
    }
    Repr::Snapshots { dr, snaps }
}

/// Four-point Lagrange weights (value and first derivative) for fractional
/// offset `s` relative to nodes {-1, 0, 1, 2}.
fn cubic_weights(s: f64, derivative: bool) -> [f64; 4] {
    if !derivative {
        [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ]
    } else {
        [
            -(3.0 * s * s - 6.0 * s + 2.0) / 6.0,
            (3.0 * s * s - 4.0 * s - 1.0) / 2.0,
            -(3.0 * s * s - 2.0 * s - 2.0) / 2.0,
            (3.0 * s * s - 1.0) / 6.0,
        ]
    }
}

impl WaveSolution {
    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.repr, Repr::Spectral { .. })
    }

    fn check_r(r: f64) -> Result<()> {
        if !(-1e-12..=1.0 + 1e-12).contains(&r) {
            return domain(format!("wave evaluation time {r} outside [0, 1]"));
        }
        Ok(())
    }

    /// v(·, r)
    pub fn eval(&self, r: f64) -> Result<Field> {
        self.derivative(r, 0)
    }

    /// ∂_r^order v(·, r). Snapshot solutions support orders 0 and 1.
    pub fn derivative(&self, r: f64, order: usize) -> Result<Field> {
        let mut acc = Accumulator::new(self.grid);
        self.accumulate(&[(r, 1.0)], order, &mut acc)?;
        Ok(acc.finish())
    }

    /// Adds Σ weight · ∂_r^order v(·, r) over `terms` into `acc`.
    pub fn accumulate(&self, terms: &[(f64, f64)], order: usize, acc: &mut Accumulator) -> Result<()> {
        debug_assert_eq!(acc.grid, self.grid);
        for &(r, _) in terms {
            Self::check_r(r)?;
        }
        match &self.repr {
            Repr::Spectral { ghat, omega } => {
                let mut coef = vec![0.0; omega.len()];
                for &(r, w) in terms {
                    for (c, &om) in coef.iter_mut().zip(omega) {
                        *c += w * multiplier(self.kind, om, r, order);
                    }
                }
                for (k, (s, gh)) in acc.spec.iter_mut().zip(ghat).enumerate() {
                    *s += gh * coef[self.grid.folded_index(k)];
                }
                acc.spectral_used = true;
            }
            Repr::Snapshots { dr, snaps } => {
                if order > 1 {
                    return domain("snapshot solutions only provide first r-derivatives");
                }
                for &(r, w) in terms {
                    // stencil {i−2, …, i+1} around x ∈ [i, i+1): leaning back keeps
                    // the numerical domain of influence one step tighter
                    let x = r.clamp(0.0, 1.0) / dr;
                    let i = (x.floor() as usize).min(snaps.len() - 2);
                    let s = x - (i as f64 - 1.0);
                    let mut cw = cubic_weights(s, order == 1);
                    if order == 1 {
                        for c in &mut cw {
                            *c /= dr;
                        }
                    }
                    // at r near 0 the stencil would reach i − 1 < 0; the
                    // solution is even (cosine) or odd (sine) in r there
                    let base = i as isize - 2;
                    for (q, c) in cw.iter().enumerate() {
                        let idx = base + q as isize;
                        let (snap, sign) = if idx < 0 {
                            let sign = match self.kind {
                                DataKind::Cosine => 1.0,
                                DataKind::Sine => -1.0,
                            };
                            (&snaps[(-idx) as usize], sign)
                        } else {
                            (&snaps[idx as usize], 1.0)
                        };
                        let f = w * c * sign;
                        for (p, v) in acc.phys.iter_mut().zip(snap) {
                            *p += f * v;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sum of weighted wave evaluations, transformed back once at the end.
#[derive(Debug, Clone)]
pub struct Accumulator {
    grid: SpatialGrid,
    spec: Vec<Complex64>,
    phys: Vec<f64>,
    spectral_used: bool,
}

impl Accumulator {
    pub fn new(grid: SpatialGrid) -> Self {
        Self {
            grid,
            spec: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
            phys: vec![0.0; grid.n],
            spectral_used: false,
        }
    }

    pub fn finish(self) -> Field {
        let mut values = self.phys;
        if self.spectral_used {
            for (v, s) in values.iter_mut().zip(self.grid.inverse(self.spec)) {
                *v += s;
            }
        }
        Field { grid: self.grid, values }
    }
}

/// ∂_r v(·, r)
pub fn wave_time_derivative(sol: &WaveSolution, r: f64) -> Result<Field> {
    sol.derivative(r, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_extension_round_trips() {
        let g = SpatialGrid::radial(32, 2.0).unwrap();
        let f = Field::from_fn(g, |r| (-r * r).exp());
        let back = g.inverse(g.forward(&f.values));
        for (b, v) in back.iter().zip(&f.values).take(g.n - 1) {
            assert!((b - v).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        let p = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x * x * x;
        let dp = |x: f64| 1.0 - 4.0 * x + 1.5 * x * x;
        let s = 0.37;
        let w = cubic_weights(s, false);
        let d = cubic_weights(s, true);
        let v: f64 = (0..4).map(|q| w[q] * p(q as f64 - 1.0)).sum();
        let dv: f64 = (0..4).map(|q| d[q] * p(q as f64 - 1.0)).sum();
        assert!((v - p(s)).abs() < 1e-14);
        assert!((dv - dp(s)).abs() < 1e-14);
    }

    #[test]
    fn cfl_limit_is_enforced() {
        let g = SpatialGrid::periodic(32, 1.0).unwrap();
        let op = Operator::VarCoeff1D { a: vec![1.0; 32], cfl: 0.95 };
        assert!(matches!(
            solve_wave(&Field::zeros(g), DataKind::Cosine, &op),
            Err(Error::CflViolation { .. })
        ));
    }
}
