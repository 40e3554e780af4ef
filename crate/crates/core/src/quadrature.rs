//! Gauss–Legendre rules, a composite rule graded towards a boundary layer,
//! and adaptive Gauss–Kronrod (7, 15) integration.

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on [lo, hi] in the variable u = ln(anchor − x).
///
/// Integrands whose scale shrinks like `anchor − x` near `hi` are resolved by
/// unit-width panels in u; panels are split further so that no panel spans
/// more than `max_width` in x. Returns (x, weight) pairs ordered by x.
pub fn graded_nodes(
    rule: &GaussLegendre,
    lo: f64,
    hi: f64,
    anchor: f64,
    max_width: f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if hi <= lo {
        return out;
    }
    debug_assert!(anchor > hi);
    let u_top = (anchor - lo).ln();
    let u_bottom = (anchor - hi).ln();
    let mut panels = Vec::new();
    let mut u = u_top;
    while u > u_bottom {
        // avoid a sliver panel at the bottom
        let next = if u - 1.0 < u_bottom + 0.25 { u_bottom } else { u - 1.0 };
        panels.push((next, u));
        u = next;
    }
    for (ua, ub) in panels {
        let width = ub.exp() - ua.exp();
        let pieces = (width / max_width).ceil().max(1.0) as usize;
        let du = (ub - ua) / pieces as f64;
        for j in (0..pieces).rev() {
            let (pa, pb) = (ua + j as f64 * du, ua + (j + 1) as f64 * du);
            for (uu, w) in rule.mapped(pa, pb).collect::<Vec<_>>().into_iter().rev() {
                let e = uu.exp();
                out.push((anchor - e, w * e));
            }
        }
    }
    out
}

/// Composite rule on [lo, hi] with panels of width at most `max_width`.
pub fn composite_nodes(rule: &GaussLegendre, lo: f64, hi: f64, max_width: f64) -> Vec<(f64, f64)> {
    if hi <= lo {
        return Vec::new();
    }
    let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
    let h = (hi - lo) / pieces as f64;
    (0..pieces)
        .flat_map(|j| {
            let a = lo + j as f64 * h;
            let b = if j + 1 == pieces { hi } else { a + h };
            rule.mapped(a, b).collect::<Vec<_>>()
        })
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = WG[3] * fc;
    let mut kron = WGK[7] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss–Kronrod (7, 15) integration of `f` over [a, b].
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `max(abs_tol, rel_tol · |value|)`.
pub fn adaptive_gk15<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    let mut intervals = vec![{
        let (v, e) = kronrod_15(&mut f, a, b);
        (a, b, v, e)
    }];
    let mut evaluations = 15;
    loop {
        let value: f64 = intervals.iter().map(|i| i.2).sum();
        let error: f64 = intervals.iter().map(|i| i.3).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral { value, error, evaluations });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "no convergence on [{a}, {b}] after {} subintervals (error {error:e})",
                intervals.len()
            )));
        }
        let (k, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        for (p, q) in [(lo, mid), (mid, hi)] {
            let (v, e) = kronrod_15(&mut f, p, q);
            intervals.push((p, q, v, e));
        }
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 24, 64] {
            let g = GaussLegendre::new(n);
            assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let v = g.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn graded_rule_resolves_a_thin_layer() {
        // ∫_0^1 1/(1 + ε − x) dx = ln((1 + ε)/ε)
        let eps = 1e-5;
        let g = GaussLegendre::new(16);
        let nodes = graded_nodes(&g, 0.0, 1.0, 1.0 + eps, 0.25);
        let v: f64 = nodes.iter().map(|&(x, w)| w / (1.0 + eps - x)).sum();
        // anchor − x is itself rounded at the 1e-11 level near the layer
        assert!((v - ((1.0 + eps) / eps).ln()).abs() < 1e-10);
        assert!(nodes.windows(2).all(|p| p[0].0 < p[1].0));
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive_gk15(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12, 400).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
    }
}
