use std::fmt;

use super::flow::{Flow, DEFAULT_STEPS_PER_HORIZON};
use crate::error::{invalid, Error, Result};
use crate::func::{check_derivative, fn1, interior_points, Fn1};
use crate::levy::{JumpRecord, LevyPath, LevyTriplet};
use crate::malliavin::{jump_time_difference, DerivativeProcess, FdCheck, Step, WeightK};

/// Half-width of the state window sampled by coefficient validation.
pub const VALIDATION_RADIUS: f64 = 5.0;

/// Pathwise solution of a pure-jump SDE driven by a finite jump list.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpTrajectory {
    pub horizon: f64,
    pub x0: f64,
    pub jumps: Vec<JumpRecord>,
    /// `Z_{T_j-}`.
    pub pre: Vec<f64>,
    /// `Z_{T_j}`.
    pub post: Vec<f64>,
    /// `∫ f'(Z_u) du` over `[0,T₁], [T₁,T₂], …, [T_n,T]`.
    pub seg_log: Vec<f64>,
    pub terminal: f64,
}

impl JumpTrajectory {
    /// `∫_{T_j}^T f'(Z_u) du` for jump `j` (0-based).
    pub fn tail_log(&self, j: usize) -> f64 {
        self.seg_log[j + 1..].iter().sum()
    }

    /// `(t, Z_t)` on `grid ∪ {T_j}`, with post-jump values at jump times.
    pub fn sample(&self, flow: &Flow, grid: &[f64]) -> Vec<(f64, f64)> {
        let mut times: Vec<f64> = grid
            .iter()
            .copied()
            .chain(self.jumps.iter().map(|j| j.time))
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
            .into_iter()
            .map(|t| {
                let n = self.jumps.partition_point(|j| j.time <= t);
                let (s, x) = if n == 0 {
                    (0.0, self.x0)
                } else {
                    (self.jumps[n - 1].time, self.post[n - 1])
                };
                (t, flow.phi(s, x, t))
            })
            .collect()
    }
}

/// Flow between jumps, `z ↦ jump(z, y)` at each jump.
pub fn solve_flow_with_jumps(
    flow: &Flow,
    x0: f64,
    jumps: &[JumpRecord],
    horizon: f64,
    jump: impl Fn(f64, f64) -> f64,
) -> JumpTrajectory {
    let n = jumps.len();
    let mut pre = Vec::with_capacity(n);
    let mut post = Vec::with_capacity(n);
    let mut seg_log = Vec::with_capacity(n + 1);
    let (mut s, mut z) = (0.0, x0);
    for j in jumps {
        let seg = flow.solve(s, z, j.time);
        seg_log.push(seg.log_dx);
        pre.push(seg.value);
        z = jump(seg.value, j.size);
        post.push(z);
        s = j.time;
    }
    let seg = flow.solve(s, z, horizon);
    seg_log.push(seg.log_dx);
    JumpTrajectory {
        horizon,
        x0,
        jumps: jumps.to_vec(),
        pre,
        post,
        seg_log,
        terminal: seg.value,
    }
}

/// Common interface of the two jump-driven equations.
pub trait JumpSde: Send + Sync {
    fn flow(&self, horizon: f64) -> Flow;
    fn solve_jumps(&self, jumps: &[JumpRecord], horizon: f64) -> JumpTrajectory;
    /// `D_t Z_T` with weight `k`, all jumps in the direction set.
    fn derivative_of(&self, traj: &JumpTrajectory, k: &WeightK) -> DerivativeProcess;

    fn solve(&self, path: &LevyPath) -> JumpTrajectory {
        self.solve_jumps(&path.jumps, path.horizon())
    }

    fn derivative(&self, path: &LevyPath, k: &WeightK) -> DerivativeProcess {
        self.derivative_of(&self.solve(path), k)
    }
}

/// `dZ = f(Z) dt + ∫ h(y) N(dt, dy)`.
#[derive(Clone)]
pub struct AdditiveJumpSDE {
    pub f: Fn1,
    pub df: Fn1,
    pub h: Fn1,
    pub x0: f64,
    pub ode_steps: usize,
}

impl fmt::Debug for AdditiveJumpSDE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdditiveJumpSDE")
            .field("x0", &self.x0)
            .field("ode_steps", &self.ode_steps)
            .finish()
    }
}

impl AdditiveJumpSDE {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x0: f64,
    ) -> Self {
        Self {
            f: fn1(f),
            df: fn1(df),
            h: fn1(h),
            x0,
            ode_steps: DEFAULT_STEPS_PER_HORIZON,
        }
    }

    pub fn with_ode_steps(mut self, steps: usize) -> Self {
        self.ode_steps = steps.max(1);
        self
    }

    /// Checks `f'` by finite differences and `h ∈ L¹ ∩ L²(ν)`.
    pub fn validate(&self, triplet: &LevyTriplet) -> Result<()> {
        validate_drift(&self.f, &self.df, self.x0)?;
        let l1 = triplet.nu.integrate(|y| (self.h)(y).abs(), 1e-10)?;
        let l2 = triplet.nu.integrate(|y| (self.h)(y).powi(2), 1e-10)?;
        if !(l1.is_finite() && l2.is_finite()) {
            return Err(Error::Validation("h is not in L¹ ∩ L²(ν)".into()));
        }
        Ok(())
    }

    /// Fails if `h` vanishes on a sampled support point of ν.
    pub fn check_h_nonzero(&self, triplet: &LevyTriplet) -> Result<()> {
        for y in triplet.nu.support_points(16) {
            if (self.h)(y) == 0.0 {
                return Err(Error::Validation(format!("h vanishes at y = {y}")));
            }
        }
        Ok(())
    }
}

impl JumpSde for AdditiveJumpSDE {
    fn flow(&self, horizon: f64) -> Flow {
        Flow::new(
            self.f.clone(),
            self.df.clone(),
            horizon / self.ode_steps as f64,
        )
    }

    fn solve_jumps(&self, jumps: &[JumpRecord], horizon: f64) -> JumpTrajectory {
        solve_flow_with_jumps(&self.flow(horizon), self.x0, jumps, horizon, |z, y| {
            z + (self.h)(y)
        })
    }

    fn derivative_of(&self, traj: &JumpTrajectory, k: &WeightK) -> DerivativeProcess {
        let f = &*self.f;
        let steps = traj.jumps.iter().enumerate().map(|(j, jr)| Step {
            time: jr.time,
            coeff: traj.tail_log(j).exp()
                * (f(traj.pre[j]) - f(traj.post[j]))
                * k.value(jr.time, jr.size),
        });
        DerivativeProcess::from_steps(traj.horizon, steps)
    }
}

pub fn solve_additive_jump(path: &LevyPath, sde: &AdditiveJumpSDE) -> JumpTrajectory {
    sde.solve(path)
}

/// `D_t Z_T = Σ_j exp(∫_{T_j}^T f'(Z_u)du)(f(Z_{T_j-}) - f(Z_{T_j})) k(T_j,ΔX_j)(T_j/T - 1_{t≤T_j})`.
pub fn derivative_additive(
    path: &LevyPath,
    sde: &AdditiveJumpSDE,
    k: &WeightK,
) -> DerivativeProcess {
    sde.derivative(path, k)
}

/// Sup-norm bounds declared for the multiplicative equation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SupBounds {
    pub f2: f64,
    pub h: f64,
    pub g: f64,
}

/// `dZ = f(Z) dt + ∫ h(y) g(Z_{t-}) N(dt, dy)`.
#[derive(Clone)]
pub struct MultiplicativeJumpSDE {
    pub f: Fn1,
    pub df: Fn1,
    pub d2f: Fn1,
    pub g: Fn1,
    pub dg: Fn1,
    pub h: Fn1,
    pub x0: f64,
    pub bounds: SupBounds,
    pub ode_steps: usize,
}

impl fmt::Debug for MultiplicativeJumpSDE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplicativeJumpSDE")
            .field("x0", &self.x0)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl MultiplicativeJumpSDE {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        f: Fn1,
        df: Fn1,
        d2f: Fn1,
        g: Fn1,
        dg: Fn1,
        h: Fn1,
        x0: f64,
        bounds: SupBounds,
    ) -> Self {
        Self {
            f,
            df,
            d2f,
            g,
            dg,
            h,
            x0,
            bounds,
            ode_steps: DEFAULT_STEPS_PER_HORIZON,
        }
    }

    pub fn with_ode_steps(mut self, steps: usize) -> Self {
        self.ode_steps = steps.max(1);
        self
    }

    /// `W(g, f)(x) = g'(x) f(x) - f'(x) g(x)`.
    pub fn wronskian(&self, x: f64) -> f64 {
        (self.dg)(x) * (self.f)(x) - (self.df)(x) * (self.g)(x)
    }

    /// Checks derivatives and the declared sup bounds on a window around `x0`
    /// and the support of ν.
    pub fn validate(&self, triplet: &LevyTriplet) -> Result<()> {
        validate_drift(&self.f, &self.df, self.x0)?;
        validate_drift(&self.df, &self.d2f, self.x0)?;
        validate_drift(&self.g, &self.dg, self.x0)?;
        let slack = 1.0 + 1e-12;
        for x in interior_points(
            self.x0 - VALIDATION_RADIUS,
            self.x0 + VALIDATION_RADIUS,
            101,
            0.0,
        ) {
            if (self.d2f)(x).abs() > self.bounds.f2 * slack
                || (self.g)(x).abs() > self.bounds.g * slack
            {
                return Err(Error::Validation(format!(
                    "declared sup bound exceeded at x = {x}"
                )));
            }
        }
        for y in triplet.nu.support_points(16) {
            if (self.h)(y).abs() > self.bounds.h * slack {
                return Err(Error::Validation(format!(
                    "|h({y})| exceeds its declared bound"
                )));
            }
        }
        Ok(())
    }
}

impl JumpSde for MultiplicativeJumpSDE {
    fn flow(&self, horizon: f64) -> Flow {
        Flow::new(
            self.f.clone(),
            self.df.clone(),
            horizon / self.ode_steps as f64,
        )
    }

    fn solve_jumps(&self, jumps: &[JumpRecord], horizon: f64) -> JumpTrajectory {
        solve_flow_with_jumps(&self.flow(horizon), self.x0, jumps, horizon, |z, y| {
            z + (self.h)(y) * (self.g)(z)
        })
    }

    /// Propagates `D Z_{T_j}` jump by jump: flow multiplier and boundary term
    /// between jumps, the `f(Z_{T_j-}) k_j` term and the factor `1 + h g'` at jumps.
    fn derivative_of(&self, traj: &JumpTrajectory, k: &WeightK) -> DerivativeProcess {
        let f = &*self.f;
        let n = traj.jumps.len();
        let kv: Vec<f64> = traj.jumps.iter().map(|j| k.value(j.time, j.size)).collect();
        let mut c: Vec<f64> = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                let e = traj.seg_log[i].exp();
                c.iter_mut().for_each(|x| *x *= e);
                c[i - 1] -= f(traj.post[i - 1]) * e * kv[i - 1];
            }
            c.push(f(traj.pre[i]) * kv[i]);
            let gain = 1.0 + (self.h)(traj.jumps[i].size) * (self.dg)(traj.pre[i]);
            c.iter_mut().for_each(|x| *x *= gain);
        }
        if n > 0 {
            let e = traj.seg_log[n].exp();
            c.iter_mut().for_each(|x| *x *= e);
            c[n - 1] -= f(traj.post[n - 1]) * e * kv[n - 1];
        }
        let steps = traj.jumps.iter().zip(c).map(|(j, coeff)| Step {
            time: j.time,
            coeff,
        });
        DerivativeProcess::from_steps(traj.horizon, steps)
    }
}

pub fn solve_multiplicative(path: &LevyPath, sde: &MultiplicativeJumpSDE) -> JumpTrajectory {
    sde.solve(path)
}

pub fn derivative_multiplicative(
    path: &LevyPath,
    sde: &MultiplicativeJumpSDE,
    k: &WeightK,
) -> DerivativeProcess {
    sde.derivative(path, k)
}

/// Outcome of sampling `|h(y) W(g,f)(x)| > ½‖f''‖‖h‖²‖g‖²`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WronskianCheck {
    pub holds: bool,
    /// Smallest sampled `|h(y) W(g,f)(x)|`.
    pub min_lhs: f64,
    pub rhs: f64,
}

/// Evaluates the Wronskian condition on `samples` points of `x_range` and on
/// the sampled support of ν.
pub fn wronskian_condition(
    sde: &MultiplicativeJumpSDE,
    triplet: &LevyTriplet,
    x_range: (f64, f64),
    samples: usize,
) -> WronskianCheck {
    let b = sde.bounds;
    let rhs = 0.5 * b.f2 * b.h * b.h * b.g * b.g;
    let ys = triplet.nu.support_points(16);
    let w_min = (0..samples.max(2))
        .map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / (samples.max(2) - 1) as f64)
        .map(|x| sde.wronskian(x).abs())
        .fold(f64::INFINITY, f64::min);
    let h_min = ys
        .iter()
        .map(|&y| (sde.h)(y).abs())
        .fold(f64::INFINITY, f64::min);
    let min_lhs = if ys.is_empty() { 0.0 } else { w_min * h_min };
    WronskianCheck {
        holds: min_lhs > rhs,
        min_lhs,
        rhs,
    }
}

/// Range reachable in `[0, T]` with at most `max_jumps` jumps:
/// `x0 ± (T‖f‖ + max_jumps ‖h‖‖g‖)`, with `‖f‖` sampled on a wide window.
pub fn reachable_range(sde: &MultiplicativeJumpSDE, horizon: f64, max_jumps: usize) -> (f64, f64) {
    let b = sde.bounds;
    let jump_reach = max_jumps as f64 * b.h * b.g;
    let window = jump_reach + VALIDATION_RADIUS;
    let f_sup = interior_points(sde.x0 - window, sde.x0 + window, 401, 0.0)
        .map(|x| (sde.f)(x).abs())
        .fold(0.0f64, f64::max);
    let r = horizon * f_sup + jump_reach;
    (sde.x0 - r, sde.x0 + r)
}

/// `k(s, y) = clamp(-h(y), -1, 1)` for increasing `f`, `clamp(h(y), -1, 1)` for decreasing.
pub fn monotone_weight(h: Fn1, direction: Monotonicity) -> WeightK {
    let sign = match direction {
        Monotonicity::Increasing => -1.0,
        Monotonicity::Decreasing => 1.0,
    };
    WeightK::of_size(move |y| (sign * h(y)).clamp(-1.0, 1.0), 1.0)
}

/// `k(s, y) = -(t - s)² 1_{s<t} clamp(h(y), -1, 1)`, supported before `t`.
pub fn local_weight(h: Fn1, t: f64, direction: Monotonicity) -> WeightK {
    let sign = match direction {
        Monotonicity::Increasing => -1.0,
        Monotonicity::Decreasing => 1.0,
    };
    let h2 = h.clone();
    WeightK::new(
        move |s, y| {
            if s < t {
                sign * (t - s).powi(2) * h(y).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        },
        move |s, y| {
            if s < t {
                -2.0 * sign * (t - s) * h2(y).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        },
        t * t,
    )
}

/// `k(s, y) = (s - p)² 1_{s>p}`.
pub fn last_jump_weight(p: f64, horizon: f64) -> WeightK {
    WeightK::new(
        move |s, _| if s > p { (s - p).powi(2) } else { 0.0 },
        move |s, _| if s > p { 2.0 * (s - p) } else { 0.0 },
        (horizon - p).max(0.0).powi(2),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Analytic `D_t Z_T` against a central difference of the re-solved terminal
/// value along `v_j = k(T_j,ΔX_j)(T_j/T - 1_{t≤T_j})`.
pub fn sde_finite_difference_check<S: JumpSde + ?Sized>(
    path: &LevyPath,
    sde: &S,
    k: &WeightK,
    t: f64,
    eps: f64,
) -> Result<FdCheck> {
    let tt = path.horizon();
    if !(0.0..=tt).contains(&t) {
        return Err(Error::TimeOutOfRange { t, horizon: tt });
    }
    let d = sde.derivative(path, k);
    let basis = |s: f64| s / tt - if t <= s { 1.0 } else { 0.0 };
    let v: Vec<f64> = path
        .jumps
        .iter()
        .map(|j| k.value(j.time, j.size) * basis(j.time))
        .collect();
    let scale = d
        .steps()
        .iter()
        .map(|s| (s.coeff * basis(s.time)).abs())
        .sum();
    if path.jumps.is_empty() {
        return Ok(FdCheck {
            analytic: d.value(t),
            numeric: 0.0,
            eps,
            scale,
        });
    }
    let (numeric, used) = jump_time_difference(&path.jumps, tt, &v, eps, |js| {
        Ok(sde.solve_jumps(js, tt).terminal)
    })?;
    Ok(FdCheck {
        analytic: d.value(t),
        numeric,
        eps: used,
        scale,
    })
}

fn validate_drift(f: &Fn1, df: &Fn1, x0: f64) -> Result<()> {
    if !x0.is_finite() {
        return Err(invalid("x0", "must be finite"));
    }
    check_derivative(
        "drift",
        |x| f(x),
        |x| df(x),
        interior_points(x0 - VALIDATION_RADIUS, x0 + VALIDATION_RADIUS, 41, 0.0),
        1e-5,
        1e-5,
    )
}
