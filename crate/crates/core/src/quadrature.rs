//! Deterministic quadrature rules used for compensators and oracles.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const MAX_EVALS: usize = 4_000_000;

/// Adaptive Simpson integration of `f` over `[a, b]` with absolute target `tol`.
///
/// Fails when the integrand produces non-finite values or the refinement
/// budget is exhausted, which is how divergent compensators surface.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature {
            a,
            b,
            reason: "infinite interval".into(),
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut evals = 0usize;
    let mut eval = |x: f64| -> Result<f64> {
        evals += 1;
        if evals > MAX_EVALS {
            return Err(Error::Quadrature {
                a,
                b,
                reason: format!("evaluation budget of {MAX_EVALS} calls exhausted"),
            });
        }
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Quadrature {
                a,
                b,
                reason: format!("integrand is not finite at x = {x}"),
            });
        }
        Ok(v)
    };
    // Seed with a few panels so narrow features are not missed.
    let panels = 8;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let x0 = lo + p as f64 * width;
        let x1 = if p + 1 == panels { hi } else { x0 + width };
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (eval(x0)?, eval(xm)?, eval(x1)?);
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_step(&mut eval, x0, x1, f0, fm, f1, whole, tol / panels as f64, 0)?;
    }
    Ok(sign * total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<E>(
    eval: &mut E,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    E: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(lm)?;
    let frm = eval(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH
        || delta.abs() <= 15.0 * tol
        || (b - a) <= f64::EPSILON * m.abs().max(1e-300) * 8.0
    {
        return Ok(left + right + delta / 15.0);
    }
    let l = simpson_step(eval, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let r = simpson_step(eval, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(l + r)
}

/// Adaptive Simpson over `[a, b]` split at the given interior breakpoints.
pub fn adaptive_simpson_split<F>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = Vec::with_capacity(pts.len() + 2);
    edges.push(a);
    edges.extend(pts);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], tol / pieces)?;
    }
    Ok(total)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed composite Gauss–Legendre rule on `[a, b]`: `panels` panels of `order` points.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(lo + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

static GL10: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();

/// Composite 10-point Gauss–Legendre on `[a, b]` with `panels` equal panels.
///
/// Exact for polynomials of degree 19 on each panel; used for the time
/// integrals of smooth kernels.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (x, w) = GL10.get_or_init(|| gauss_legendre(10));
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(lo + 0.5 * width * (xi + 1.0));
        }
        total += 0.5 * width * s;
    }
    total
}

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-11);
        let v = adaptive_simpson(|x: f64| (-x).exp() / x, 1e-3, 40.0, 1e-11).unwrap();
        // E1(1e-3) - E1(40)
        assert_abs_diff_eq!(v, 6.331_539_364_136_15, epsilon = 1e-8);
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9).unwrap(), 0.0);
        let rev = adaptive_simpson(|x| x * x, 1.0, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(rev, -1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn simpson_reports_non_finite_integrand() {
        let err = adaptive_simpson(|x: f64| 1.0 / x, 0.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn split_rule_is_exact_on_step_functions() {
        let s = 0.37;
        let v = adaptive_simpson_split(|t| if t < s { 2.0 } else { -1.0 }, 0.0, 1.0, &[s], 1e-13)
            .unwrap();
        assert_abs_diff_eq!(v, 2.0 * s - (1.0 - s), epsilon = 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert_abs_diff_eq!(q, exact, epsilon = 1e-13);
            }
        }
        let rule = CompositeRule::new(0.0, 2.0, 4, 5);
        assert_abs_diff_eq!(
            rule.integrate(|x| x.exp()),
            2f64.exp() - 1.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
    }
}
