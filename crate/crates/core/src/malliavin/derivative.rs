use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::process::{DerivativeProcess, Step};
use super::weight::WeightK;
use crate::chaos::{theta_jumps, SimplexIntegrand, DEFAULT_BUDGET_BITS};
use crate::error::{Error, Result};
use crate::func::central_difference;
use crate::levy::{JumpRecord, JumpSet, LevyPath, LevyTriplet};
use crate::quadrature::gl_integrate;
use crate::random_measure::{Kernel, PreparedKernel, COMPENSATOR_TOL, TIME_PANELS};

fn require_inclusion(lambda: &JumpSet, theta: &JumpSet) -> Result<()> {
    if lambda.covers(theta) {
        Ok(())
    } else {
        Err(Error::SetInclusion("Θ must be contained in Λ".into()))
    }
}

/// `D_t M(h) = 1_Λ(0) σ h(t,0) + ∫_Λ k ∂_s h (s/T - 1_{t≤s}) y dN(s,y)`.
pub fn derivative_m(
    path: &LevyPath,
    h: &Kernel,
    lambda: &JumpSet,
    k: &WeightK,
) -> DerivativeProcess {
    let tt = path.horizon();
    let steps = path
        .jumps
        .iter()
        .filter(|j| lambda.contains_jump(j.size))
        .map(|j| Step {
            time: j.time,
            coeff: k.value(j.time, j.size) * h.dt(j.time, j.size) * j.size,
        });
    let d = DerivativeProcess::from_steps(tt, steps);
    let sigma = path.triplet.sigma;
    if lambda.includes_zero && sigma != 0.0 {
        let vals = path.grid.iter().map(|&t| sigma * h.value(t, 0.0)).collect();
        d.with_continuous(path.grid.clone(), vals)
            .expect("grid sized values")
    } else {
        d
    }
}

/// Deterministic terms of the compensated representation of `D_t M(h)`,
/// tabulated at the nodes of a time grid.
#[derive(Clone, Debug)]
pub struct CompensatorTerms {
    pub grid: Arc<[f64]>,
    /// `σ h(t,0) 1_Λ(0) + B(t) - C(t) - A(t)` at each node.
    pub continuous: Vec<f64>,
}

impl CompensatorTerms {
    /// With `u_t(s) = s/T - 1_{t≤s}`:
    /// `A(t) = ∫_Λ ∫ k ∂_s h u_t(s) y ds ν(dy)` (compensator of the jump sum),
    /// `B(t) = ∫_Λ {k(t,y)h(t,y) - T⁻¹∫ k h ds} y ν(dy)` and
    /// `C(t) = ∫_Λ ∫ h ∂_s k u_t(s) y ds ν(dy)`.
    pub fn new(
        triplet: &LevyTriplet,
        grid: Arc<[f64]>,
        h: &Kernel,
        lambda: &JumpSet,
        k: &WeightK,
    ) -> Result<Self> {
        let tt = triplet.horizon;
        let nu = &triplet.nu;
        let u_integral = |f: &dyn Fn(f64) -> f64, t: f64| {
            gl_integrate(|s| s * f(s), 0.0, tt, TIME_PANELS) / tt
                - gl_integrate(f, t, tt, TIME_PANELS)
        };
        let mut continuous = Vec::with_capacity(grid.len());
        for &t in grid.iter() {
            let a = nu.integrate_on(
                lambda,
                |y| y * u_integral(&|s| k.value(s, y) * h.dt(s, y), t),
                COMPENSATOR_TOL,
            )?;
            let b = nu.integrate_on(
                lambda,
                |y| {
                    y * (k.value(t, y) * h.value(t, y)
                        - gl_integrate(|s| k.value(s, y) * h.value(s, y), 0.0, tt, TIME_PANELS)
                            / tt)
                },
                COMPENSATOR_TOL,
            )?;
            let c = nu.integrate_on(
                lambda,
                |y| y * u_integral(&|s| h.value(s, y) * k.dt(s, y), t),
                COMPENSATOR_TOL,
            )?;
            let gauss = if lambda.includes_zero {
                triplet.sigma * h.value(t, 0.0)
            } else {
                0.0
            };
            continuous.push(gauss + b - c - a);
        }
        Ok(Self { grid, continuous })
    }
}

/// The same process as [`derivative_m`] written as a compensated jump
/// integral plus two deterministic `ν`-integrals.
pub fn derivative_m_alt(
    path: &LevyPath,
    h: &Kernel,
    lambda: &JumpSet,
    k: &WeightK,
) -> Result<DerivativeProcess> {
    let terms = CompensatorTerms::new(&path.triplet, path.grid.clone(), h, lambda, k)?;
    derivative_m_alt_with(path, h, lambda, k, &terms)
}

/// [`derivative_m_alt`] with precomputed deterministic terms.
pub fn derivative_m_alt_with(
    path: &LevyPath,
    h: &Kernel,
    lambda: &JumpSet,
    k: &WeightK,
    terms: &CompensatorTerms,
) -> Result<DerivativeProcess> {
    let steps = derivative_m(path, h, lambda, k).steps().to_vec();
    DerivativeProcess::from_steps(path.horizon(), steps)
        .with_continuous(terms.grid.clone(), terms.continuous.clone())
}

type VecFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// `F = f(M(h₁), …, M(h_n))`.
#[derive(Clone)]
pub struct SmoothFunctional {
    f: VecFn,
    grad: GradFn,
    pub kernels: Vec<Kernel>,
}

impl fmt::Debug for SmoothFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunctional")
            .field("arity", &self.kernels.len())
            .finish()
    }
}

impl SmoothFunctional {
    pub fn new(
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        kernels: Vec<Kernel>,
    ) -> Self {
        Self {
            f: Arc::new(f),
            grad: Arc::new(grad),
            kernels,
        }
    }

    /// `f(M(h))` for scalar `f`.
    pub fn scalar(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h: Kernel,
    ) -> Self {
        Self::new(move |u| f(u[0]), move |u| vec![df(u[0])], vec![h])
    }

    /// `Σ a_i M(h_i)`.
    pub fn linear(coeffs: Vec<f64>, kernels: Vec<Kernel>) -> Self {
        assert_eq!(coeffs.len(), kernels.len());
        let c2 = coeffs.clone();
        Self::new(
            move |u| u.iter().zip(&coeffs).map(|(x, a)| x * a).sum(),
            move |_| c2.clone(),
            kernels,
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| Vec::new(), Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.kernels.len()
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        (self.f)(u)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        (self.grad)(u)
    }

    /// `F·G` as a functional of the concatenated kernels.
    pub fn product(&self, other: &SmoothFunctional) -> SmoothFunctional {
        let n = self.arity();
        let (f1, f2, g1, g2) = (
            self.f.clone(),
            other.f.clone(),
            self.grad.clone(),
            other.grad.clone(),
        );
        let (f1b, f2b) = (self.f.clone(), other.f.clone());
        let mut kernels = self.kernels.clone();
        kernels.extend(other.kernels.iter().cloned());
        Self::new(
            move |u| f1(&u[..n]) * f2(&u[n..]),
            move |u| {
                let (a, b) = (f1b(&u[..n]), f2b(&u[n..]));
                let mut g: Vec<f64> = g1(&u[..n]).into_iter().map(|x| x * b).collect();
                g.extend(g2(&u[n..]).into_iter().map(|x| x * a));
                g
            },
            kernels,
        )
    }

    /// Validates kernels and checks the gradient by central differences.
    pub fn validate(&self, triplet: &LevyTriplet) -> Result<()> {
        for h in &self.kernels {
            h.validate(triplet)?;
        }
        let n = self.arity();
        let probes = [-1.7, -0.4, 0.3, 1.1, 2.2];
        for (shift, &base) in probes.iter().enumerate() {
            let u: Vec<f64> = (0..n)
                .map(|i| probes[(i + shift) % probes.len()] * 0.5 + base)
                .collect();
            let g = self.gradient(&u);
            for i in 0..n {
                let numeric = central_difference(
                    |x| {
                        let mut v = u.clone();
                        v[i] = x;
                        self.eval(&v)
                    },
                    u[i],
                    1e-5,
                );
                if (numeric - g[i]).abs() > 1e-5 * (1.0 + g[i].abs()) {
                    return Err(Error::Validation(format!(
                        "gradient component {i} at {u:?}: analytic {}, finite difference {numeric}",
                        g[i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Precomputes the compensators of all kernels for `triplet`.
    pub fn prepare(&self, triplet: &LevyTriplet) -> Result<PreparedFunctional> {
        let kernels = self
            .kernels
            .iter()
            .map(|h| h.prepare(triplet))
            .collect::<Result<_>>()?;
        Ok(PreparedFunctional {
            functional: self.clone(),
            kernels,
        })
    }
}

/// A smooth functional bound to one triplet.
#[derive(Clone, Debug)]
pub struct PreparedFunctional {
    pub functional: SmoothFunctional,
    pub kernels: Vec<PreparedKernel>,
}

impl PreparedFunctional {
    /// `(M(h₁), …, M(h_n))` on `path`.
    pub fn arguments(&self, path: &LevyPath) -> Vec<f64> {
        self.kernels.iter().map(|h| h.integrate(path)).collect()
    }

    pub fn value(&self, path: &LevyPath) -> f64 {
        self.functional.eval(&self.arguments(path))
    }

    /// `(F, D F)` on `path`.
    pub fn value_and_derivative(
        &self,
        path: &LevyPath,
        lambda: &JumpSet,
        k: &WeightK,
    ) -> Result<(f64, DerivativeProcess)> {
        let args = self.arguments(path);
        let grad = self.functional.gradient(&args);
        let mut d = DerivativeProcess::zero(path.horizon());
        for (h, gi) in self.kernels.iter().zip(grad) {
            if gi != 0.0 {
                d = d.combine(1.0, &derivative_m(path, &h.kernel, lambda, k), gi)?;
            }
        }
        Ok((self.functional.eval(&args), d))
    }

    pub fn derivative(
        &self,
        path: &LevyPath,
        lambda: &JumpSet,
        k: &WeightK,
    ) -> Result<DerivativeProcess> {
        Ok(self.value_and_derivative(path, lambda, k)?.1)
    }
}

/// `D_t F = Σ_i ∂_i f(M(h₁), …) D_t M(h_i)`.
pub fn derivative_smooth(
    path: &LevyPath,
    f: &SmoothFunctional,
    lambda: &JumpSet,
    k: &WeightK,
) -> Result<DerivativeProcess> {
    f.prepare(&path.triplet)?.derivative(path, lambda, k)
}

/// `D_t J_n^Θ(φ) = Σ_j J_n(k(s_j,x_j) ∂_{s_j}φ (s_j/T - 1_{t≤s_j}))`.
pub fn derivative_jn(
    path: &LevyPath,
    theta: &JumpSet,
    lambda: &JumpSet,
    k: &WeightK,
    phi: &SimplexIntegrand,
) -> Result<DerivativeProcess> {
    require_inclusion(lambda, theta)?;
    let jumps = theta_jumps(path, theta)?;
    let n = phi.arity();
    let tt = path.horizon();
    if jumps.len() < n {
        return Ok(DerivativeProcess::zero(tt));
    }
    let bits = n as f64
        * (0..n)
            .map(|i| ((jumps.len() - i) as f64 / (i + 1) as f64).log2())
            .sum::<f64>();
    if bits > DEFAULT_BUDGET_BITS {
        return Err(Error::EnumerationBudget {
            jumps: jumps.len(),
            arity: n,
            budget_bits: DEFAULT_BUDGET_BITS,
        });
    }
    let mut coeff = vec![0.0; jumps.len()];
    let mut buf = vec![jumps[0]; n];
    for combo in (0..jumps.len()).combinations(n) {
        for (slot, &i) in combo.iter().enumerate() {
            buf[slot] = jumps[i];
        }
        for (slot, &i) in combo.iter().enumerate() {
            coeff[i] += phi.dt_value(slot, &buf);
        }
    }
    let steps = jumps.iter().zip(coeff).map(|(j, c)| Step {
        time: j.time,
        coeff: k.value(j.time, j.size) * c,
    });
    Ok(DerivativeProcess::from_steps(tt, steps))
}

/// First `n` jumps of `path` with size in `theta`, if there are that many.
pub fn leading_jumps(
    path: &LevyPath,
    theta: &JumpSet,
    n: usize,
) -> Result<Option<Vec<JumpRecord>>> {
    let jumps = theta_jumps(path, theta)?;
    Ok((jumps.len() >= n).then(|| jumps[..n].to_vec()))
}

/// `D_t φ(T₁,ΔX₁; …; T_n,ΔX_n) = Σ_j k(T_j,ΔX_j) ∂_jφ (T_j/T - 1_{t≤T_j})`
/// over `{N_T^Θ ≥ n}`; the zero process elsewhere.
pub fn derivative_jump_functional(
    path: &LevyPath,
    theta: &JumpSet,
    lambda: &JumpSet,
    k: &WeightK,
    phi: &SimplexIntegrand,
) -> Result<DerivativeProcess> {
    require_inclusion(lambda, theta)?;
    let tt = path.horizon();
    let Some(args) = leading_jumps(path, theta, phi.arity())? else {
        return Ok(DerivativeProcess::zero(tt));
    };
    let steps = args.iter().enumerate().map(|(j, r)| Step {
        time: r.time,
        coeff: k.value(r.time, r.size) * phi.dt_value(j, &args),
    });
    Ok(DerivativeProcess::from_steps(tt, steps))
}

/// Central difference of `f` along the jump-time direction `v`:
/// `[f(T + εv) - f(T - εv)] / 2ε`.
///
/// The step is halved while the perturbation would reorder the jumps or push
/// a time outside `(0, T]`. Returns the difference and the step used.
pub fn jump_time_difference<F>(
    jumps: &[JumpRecord],
    horizon: f64,
    v: &[f64],
    eps: f64,
    f: F,
) -> Result<(f64, f64)>
where
    F: Fn(&[JumpRecord]) -> Result<f64>,
{
    assert_eq!(jumps.len(), v.len());
    let shifted = |e: f64| -> Option<Vec<JumpRecord>> {
        let out: Vec<JumpRecord> = jumps
            .iter()
            .zip(v)
            .map(|(j, d)| JumpRecord {
                time: j.time + e * d,
                size: j.size,
            })
            .collect();
        let ok = out.iter().all(|j| j.time > 0.0 && j.time <= horizon)
            && out.windows(2).all(|w| w[0].time < w[1].time);
        ok.then_some(out)
    };
    let mut e = eps;
    loop {
        if let (Some(up), Some(down)) = (shifted(e), shifted(-e)) {
            return Ok(((f(&up)? - f(&down)?) / (2.0 * e), e));
        }
        e *= 0.5;
        if e < 1e-14 * horizon {
            return Err(Error::StepUnderflow { eps: e });
        }
    }
}

/// Analytic and finite-difference values of `D_t φ(T₁,ΔX₁; …)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    pub analytic: f64,
    pub numeric: f64,
    pub eps: f64,
    /// `Σ_j |k_j ∂_jφ (T_j/T - 1_{t≤T_j})|`, the size of the summands.
    pub scale: f64,
}

impl FdCheck {
    pub fn relative_error(&self) -> f64 {
        (self.analytic - self.numeric).abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Compares [`derivative_jump_functional`] at `t` with a central difference
/// along `v_j(t) = k(T_j,ΔX_j)(T_j/T - 1_{t≤T_j})`.
#[allow(clippy::too_many_arguments)]
pub fn finite_difference_check(
    path: &LevyPath,
    theta: &JumpSet,
    lambda: &JumpSet,
    k: &WeightK,
    phi: &SimplexIntegrand,
    t: f64,
    eps: f64,
) -> Result<FdCheck> {
    let tt = path.horizon();
    let d = derivative_jump_functional(path, theta, lambda, k, phi)?;
    let analytic = d.value(t);
    let jumps = theta_jumps(path, theta)?;
    let n = phi.arity();
    if jumps.len() < n {
        return Ok(FdCheck {
            analytic,
            numeric: 0.0,
            eps,
            scale: 0.0,
        });
    }
    let v: Vec<f64> = jumps
        .iter()
        .enumerate()
        .map(|(i, j)| {
            if i < n {
                k.value(j.time, j.size) * (j.time / tt - if t <= j.time { 1.0 } else { 0.0 })
            } else {
                0.0
            }
        })
        .collect();
    let scale = (0..n)
        .map(|j| (v[j] * phi.dt_value(j, &jumps[..n])).abs())
        .sum();
    let (numeric, used) = jump_time_difference(&jumps, tt, &v, eps, |js| Ok(phi.value(&js[..n])))?;
    Ok(FdCheck {
        analytic,
        numeric,
        eps: used,
        scale,
    })
}
