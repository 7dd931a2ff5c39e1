//! Shared closure types and derivative validation.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Real function of one variable, shareable across worker threads.
pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Real function of `(t, x)`.
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn fn1(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Fn1 {
    Arc::new(f)
}

pub fn fn2(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Fn2 {
    Arc::new(f)
}

/// Central difference `(f(x+δ) - f(x-δ)) / 2δ`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, delta: f64) -> f64 {
    (f(x + delta) - f(x - delta)) / (2.0 * delta)
}

/// Checks a claimed derivative against central differences at the given points.
///
/// The tolerance is `rel * (1 + |f'(x)|)`; `label` names the function in the error.
pub fn check_derivative(
    label: &str,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    points: impl IntoIterator<Item = f64>,
    delta: f64,
    rel: f64,
) -> Result<()> {
    for x in points {
        let analytic = df(x);
        let numeric = central_difference(&f, x, delta);
        if !analytic.is_finite() || (analytic - numeric).abs() > rel * (1.0 + analytic.abs()) {
            return Err(Error::Validation(format!(
                "derivative of {label} at {x}: analytic {analytic}, finite difference {numeric}"
            )));
        }
    }
    Ok(())
}

/// `n` interior points of `(a, b)` kept `margin` away from the ends.
pub fn interior_points(a: f64, b: f64, n: usize, margin: f64) -> impl Iterator<Item = f64> {
    let lo = a + margin;
    let hi = b - margin;
    (0..n).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
}
