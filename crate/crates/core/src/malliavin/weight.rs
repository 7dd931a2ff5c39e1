use std::fmt;

use crate::error::{Error, Result};
use crate::func::{check_derivative, fn1, fn2, interior_points, Fn1, Fn2};
use crate::levy::{JumpSet, LevyTriplet};
use crate::random_measure::compensator;

/// A bounded weight `k(t, x)` with its time derivative.
#[derive(Clone)]
pub struct WeightK {
    k: Fn2,
    dt_k: Fn2,
    pub sup_bound: f64,
}

impl fmt::Debug for WeightK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightK")
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl WeightK {
    pub fn new(
        k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dt_k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        sup_bound: f64,
    ) -> Self {
        Self {
            k: fn2(k),
            dt_k: fn2(dt_k),
            sup_bound,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c, |_, _| 0.0, c.abs())
    }

    /// `k(t, x) = f(x)` with `|f| ≤ sup_bound`.
    pub fn of_size(f: impl Fn(f64) -> f64 + Send + Sync + 'static, sup_bound: f64) -> Self {
        Self::new(move |_, x| f(x), |_, _| 0.0, sup_bound)
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        (self.k)(t, x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        (self.dt_k)(t, x)
    }

    pub fn scale(&self, a: f64) -> Self {
        let (k, d) = (self.k.clone(), self.dt_k.clone());
        Self::new(
            move |t, x| a * k(t, x),
            move |t, x| a * d(t, x),
            a.abs() * self.sup_bound,
        )
    }

    /// Checks the sup bound and time derivative on sampled points and the
    /// integrability of `k` and `∂_t k` against `dt ν(dx)`.
    pub fn validate(&self, triplet: &LevyTriplet) -> Result<()> {
        let t_end = triplet.horizon;
        let delta = 1e-5 * t_end;
        for x in triplet.nu.support_points(6) {
            for t in interior_points(0.0, t_end, 9, 2.0 * delta) {
                let v = self.value(t, x);
                if !(v.abs() <= self.sup_bound * (1.0 + 1e-12)) {
                    return Err(Error::Validation(format!(
                        "|k({t}, {x})| = {} exceeds sup bound {}",
                        v.abs(),
                        self.sup_bound
                    )));
                }
            }
            check_derivative(
                "weight",
                |t| self.value(t, x),
                |t| self.dt(t, x),
                interior_points(0.0, t_end, 9, 2.0 * delta),
                delta,
                1e-5,
            )?;
        }
        if triplet.nu.is_finite() {
            let all = JumpSet::nonzero();
            for f in [
                &(|t: f64, x: f64| self.value(t, x).abs()) as &dyn Fn(f64, f64) -> f64,
                &|t, x| self.value(t, x).powi(2),
                &|t, x| self.dt(t, x).abs(),
                &|t, x| self.dt(t, x).powi(2),
            ] {
                let v = compensator(triplet, &all, f)?;
                if !v.is_finite() {
                    return Err(Error::Validation("weight is not integrable".into()));
                }
            }
        }
        Ok(())
    }
}

/// A bounded function `g` on `[0, T]` with antiderivative `G(t) = ∫_0^t g`.
#[derive(Clone)]
pub struct TimeFunction {
    g: Fn1,
    big_g: Fn1,
}

impl fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TimeFunction")
    }
}

impl TimeFunction {
    pub fn new(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        antiderivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            g: fn1(g),
            big_g: fn1(antiderivative),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, move |t| c * t)
    }

    /// `g(t) = a t + b`.
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(move |t| a * t + b, move |t| 0.5 * a * t * t + b * t)
    }

    /// `g = 1_{[lo, hi)}`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::new(
            move |t| if t >= lo && t < hi { 1.0 } else { 0.0 },
            move |t| (t.min(hi) - lo).max(0.0),
        )
    }

    /// `g(t) = sin(ω t)`.
    pub fn sine(omega: f64) -> Self {
        Self::new(
            move |t| (omega * t).sin(),
            move |t| (1.0 - (omega * t).cos()) / omega,
        )
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.g)(t)
    }

    pub fn antiderivative(&self, t: f64) -> f64 {
        (self.big_g)(t)
    }

    /// `∫_0^T g(t)(s/T - 1_{t ≤ s}) dt = (s/T) G(T) - G(s)`.
    pub fn psi(&self, s: f64, horizon: f64) -> f64 {
        s / horizon * self.antiderivative(horizon) - self.antiderivative(s)
    }

    /// `T⁻¹ ∫_0^T g`.
    pub fn mean(&self, horizon: f64) -> f64 {
        self.antiderivative(horizon) / horizon
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::levy::LevyMeasure;
    use crate::quadrature::adaptive_simpson_split;

    #[test]
    fn antiderivatives_are_consistent() {
        for g in [
            TimeFunction::constant(2.0),
            TimeFunction::linear(1.5, -0.5),
            TimeFunction::indicator(0.2, 0.7),
            TimeFunction::sine(3.0),
        ] {
            for t in [0.0f64, 0.1, 0.45, 0.9, 1.0] {
                let direct =
                    adaptive_simpson_split(|u| g.value(u), 0.0, t.max(1e-300), &[0.2, 0.7], 1e-13)
                        .unwrap();
                assert_abs_diff_eq!(g.antiderivative(t), direct, epsilon = 1e-11);
            }
            let s = 0.35;
            let direct = adaptive_simpson_split(
                |t| g.value(t) * (s - if t <= s { 1.0 } else { 0.0 }),
                0.0,
                1.0,
                &[s, 0.2, 0.7],
                1e-13,
            )
            .unwrap();
            assert_abs_diff_eq!(g.psi(s, 1.0), direct, epsilon = 1e-11);
        }
    }

    #[test]
    fn weight_validation() {
        let tr = LevyTriplet::new(0.0, 0.0, LevyMeasure::poisson(2.0).unwrap(), 1.0).unwrap();
        WeightK::new(|t, x| (t * x).sin(), |t, x| x * (t * x).cos(), 1.0)
            .validate(&tr)
            .unwrap();
        assert!(WeightK::new(|t, _| 3.0 * t, |_, _| 3.0, 1.0)
            .validate(&tr)
            .is_err());
        assert!(WeightK::new(|t, _| t, |_, _| 2.0, 1.0)
            .validate(&tr)
            .is_err());
    }
}
