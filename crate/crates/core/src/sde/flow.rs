use crate::func::Fn1;

/// Number of RK4 steps per unit horizon used when no step is given.
pub const DEFAULT_STEPS_PER_HORIZON: usize = 2048;

/// The flow `Φ_t(s, x) = x + ∫_s^t f(Φ_u(s, x)) du` of the drift ODE.
#[derive(Clone)]
pub struct Flow {
    pub f: Fn1,
    pub df: Fn1,
    /// Largest RK4 step.
    pub max_step: f64,
}

/// End state of one flow segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowSegment {
    /// `Φ_t(s, x)`.
    pub value: f64,
    /// `∫_s^t f'(Φ_u(s, x)) du` (trapezoid on the RK4 mesh).
    pub log_dx: f64,
}

impl Flow {
    pub fn new(f: Fn1, df: Fn1, max_step: f64) -> Self {
        assert!(max_step > 0.0);
        Self { f, df, max_step }
    }

    /// Integrates from `(s, x)` to time `t ≥ s` with `⌈(t-s)/max_step⌉` equal steps.
    pub fn solve(&self, s: f64, x: f64, t: f64) -> FlowSegment {
        let len = t - s;
        if len <= 0.0 {
            return FlowSegment {
                value: x,
                log_dx: 0.0,
            };
        }
        let n = (len / self.max_step).ceil().max(1.0) as usize;
        let h = len / n as f64;
        let f = &*self.f;
        let df = &*self.df;
        let mut y = x;
        let mut d_prev = df(y);
        let mut log_dx = 0.0;
        for _ in 0..n {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let d = df(y);
            log_dx += 0.5 * h * (d_prev + d);
            d_prev = d;
        }
        FlowSegment { value: y, log_dx }
    }

    pub fn phi(&self, s: f64, x: f64, t: f64) -> f64 {
        self.solve(s, x, t).value
    }

    /// `∂_x Φ_t(s, x) = exp(∫_s^t f'(Φ_u) du)`.
    pub fn dx_phi(&self, s: f64, x: f64, t: f64) -> f64 {
        self.solve(s, x, t).log_dx.exp()
    }

    /// `∂_s Φ_t(s, x) = -f(x) exp(∫_s^t f'(Φ_u) du)`.
    pub fn ds_phi(&self, s: f64, x: f64, t: f64) -> f64 {
        -(self.f)(x) * self.dx_phi(s, x, t)
    }

    /// `∂_t Φ_t(s, x) = f(Φ_t(s, x))`.
    pub fn dt_phi(&self, s: f64, x: f64, t: f64) -> f64 {
        (self.f)(self.phi(s, x, t))
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::func::{central_difference, fn1};

    fn tanh_flow() -> Flow {
        Flow::new(
            fn1(|z| z + z.tanh()),
            fn1(|z| 1.0 + 1.0 / z.cosh().powi(2)),
            1.0 / 2048.0,
        )
    }

    #[test]
    fn linear_drift_matches_exponential() {
        let flow = Flow::new(fn1(|z| -z), fn1(|_| -1.0), 1.0 / 2048.0);
        assert_abs_diff_eq!(
            flow.phi(0.2, 1.5, 1.0),
            1.5 * (-0.8f64).exp(),
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(flow.solve(0.2, 1.5, 1.0).log_dx, -0.8, epsilon = 1e-13);
    }

    #[test]
    fn semigroup_property() {
        let flow = tanh_flow();
        let mid = flow.phi(0.0, 0.3, 0.37);
        assert_abs_diff_eq!(
            flow.phi(0.37, mid, 1.0),
            flow.phi(0.0, 0.3, 1.0),
            epsilon = 1e-11
        );
    }

    #[test]
    fn partials_match_finite_differences() {
        let flow = tanh_flow();
        let (s, x, t) = (0.25, -0.4, 0.9);
        let fd_x = central_difference(|x| flow.phi(s, x, t), x, 1e-5);
        assert_abs_diff_eq!(flow.dx_phi(s, x, t), fd_x, epsilon = 1e-6);
        let fd_s = central_difference(|s| flow.phi(s, x, t), s, 1e-5);
        assert_abs_diff_eq!(flow.ds_phi(s, x, t), fd_s, epsilon = 1e-6);
        let fd_t = central_difference(|t| flow.phi(s, x, t), t, 1e-5);
        assert_abs_diff_eq!(flow.dt_phi(s, x, t), fd_t, epsilon = 1e-6);
    }
}
