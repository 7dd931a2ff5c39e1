use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::func::{fn1, Fn1};
use crate::levy::LevyPath;
use crate::malliavin::DerivativeProcess;

/// `dZ = b(Z) dt + σ(Z) dW + ∫ l(y) y N(dt, dy)`.
#[derive(Clone)]
pub struct DiffusionSDE {
    pub b: Fn1,
    pub db: Fn1,
    pub sigma: Fn1,
    pub dsigma: Fn1,
    pub l: Fn1,
    pub x0: f64,
}

impl fmt::Debug for DiffusionSDE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSDE")
            .field("x0", &self.x0)
            .finish()
    }
}

impl DiffusionSDE {
    pub fn new(
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        db: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dsigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        l: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x0: f64,
    ) -> Self {
        Self {
            b: fn1(b),
            db: fn1(db),
            sigma: fn1(sigma),
            dsigma: fn1(dsigma),
            l: fn1(l),
            x0,
        }
    }

    /// Checks `b'` and `σ'` by finite differences around `x0`.
    pub fn validate(&self) -> Result<()> {
        use crate::func::{check_derivative, interior_points};
        let pts = || interior_points(self.x0 - 5.0, self.x0 + 5.0, 41, 0.0);
        check_derivative("b", |x| (self.b)(x), |x| (self.db)(x), pts(), 1e-5, 1e-5)?;
        check_derivative(
            "sigma",
            |x| (self.sigma)(x),
            |x| (self.dsigma)(x),
            pts(),
            1e-5,
            1e-5,
        )
    }
}

/// Euler scheme on the path grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionTrajectory {
    pub grid: Arc<[f64]>,
    /// `Z` at the grid nodes.
    pub values: Vec<f64>,
    /// `(T_j, Z_{T_j})` with the jump added inside its Euler cell.
    pub jump_points: Vec<(f64, f64)>,
}

impl DiffusionTrajectory {
    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `(t, Z_t)` on grid ∪ jump times, sorted by time.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .grid
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .collect();
        out.extend(self.jump_points.iter().copied());
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// Euler step between nodes; jumps in `(t_i, t_{i+1}]` add `l(y) y` to the cell.
pub fn solve_diffusion(path: &LevyPath, sde: &DiffusionSDE) -> DiffusionTrajectory {
    let grid = &path.grid;
    let w = &path.brownian;
    let mut values = Vec::with_capacity(grid.len());
    let mut jump_points = Vec::with_capacity(path.jumps.len());
    let mut z = sde.x0;
    values.push(z);
    let mut next_jump = 0;
    for i in 0..grid.len() - 1 {
        let dt = grid[i + 1] - grid[i];
        let dw = w[i + 1] - w[i];
        let mut jumps = 0.0;
        while next_jump < path.jumps.len() && path.jumps[next_jump].time <= grid[i + 1] {
            let j = path.jumps[next_jump];
            jumps += (sde.l)(j.size) * j.size;
            jump_points.push((j.time, z + jumps));
            next_jump += 1;
        }
        z += (sde.b)(z) * dt + (sde.sigma)(z) * dw + jumps;
        values.push(z);
    }
    DiffusionTrajectory {
        grid: Arc::clone(grid),
        values,
        jump_points,
    }
}

/// Brownian derivative `D⁰_t Z_T` of the Euler scheme:
/// `σ(Z_i) Π_{k>i} (1 + b'(Z_k) Δ_k + σ'(Z_k) ΔW_k)` on `[t_i, t_{i+1})`.
pub fn derivative_diffusion_d0(path: &LevyPath, sde: &DiffusionSDE) -> Result<DerivativeProcess> {
    let traj = solve_diffusion(path, sde);
    derivative_d0_of(path, sde, &traj)
}

pub fn derivative_d0_of(
    path: &LevyPath,
    sde: &DiffusionSDE,
    traj: &DiffusionTrajectory,
) -> Result<DerivativeProcess> {
    let grid = &path.grid;
    let w = &path.brownian;
    let n = grid.len();
    let z = &traj.values;
    let mut vals = vec![0.0; n];
    vals[n - 1] = (sde.sigma)(z[n - 1]);
    let mut prod = 1.0;
    for i in (0..n - 1).rev() {
        if i + 1 < n - 1 {
            let k = i + 1;
            prod *= 1.0
                + (sde.db)(z[k]) * (grid[k + 1] - grid[k])
                + (sde.dsigma)(z[k]) * (w[k + 1] - w[k]);
        }
        vals[i] = (sde.sigma)(z[i]) * prod;
    }
    let tt = path.horizon();
    if vals.iter().all(|&v| v == 0.0) {
        return Ok(DerivativeProcess::zero(tt));
    }
    DerivativeProcess::zero(tt).with_continuous(Arc::clone(grid), vals)
}

/// `σ(Z_t) exp(∫_{(t,T]} σ'(Z) dW + ∫_{(t,T]} (b'(Z) - σ'(Z)²/2) ds)` at the
/// grid nodes, as left-point sums.
pub fn d0_closed_form(path: &LevyPath, sde: &DiffusionSDE, traj: &DiffusionTrajectory) -> Vec<f64> {
    let grid = &path.grid;
    let w = &path.brownian;
    let n = grid.len();
    let z = &traj.values;
    let mut out = vec![0.0; n];
    out[n - 1] = (sde.sigma)(z[n - 1]);
    let mut expo = 0.0;
    for i in (0..n - 1).rev() {
        if i + 1 < n - 1 {
            let k = i + 1;
            let ds = (sde.dsigma)(z[k]);
            expo +=
                ds * (w[k + 1] - w[k]) + ((sde.db)(z[k]) - 0.5 * ds * ds) * (grid[k + 1] - grid[k]);
        }
        out[i] = (sde.sigma)(z[i]) * expo.exp();
    }
    out
}

/// First grid time with `σ(Z) ≠ 0`, or `T`.
pub fn stopping_time_s(traj: &DiffusionTrajectory, sde: &DiffusionSDE) -> f64 {
    let n = traj.grid.len();
    (0..n - 1)
        .find(|&i| (sde.sigma)(traj.values[i]) != 0.0)
        .map_or(traj.grid[n - 1], |i| traj.grid[i])
}
