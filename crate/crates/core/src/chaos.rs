//! Multiple integrals `J_n^Θ` over sets of finite Lévy measure.
//!
//! `J_n^Θ(φ)` sums `φ` over the strictly increasing `n`-tuples of jumps with
//! sizes in `Θ`. No factor `x` is attached, unlike `M`.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy::{simulate_path, JumpRecord, JumpSet, LevyPath, LevyTriplet};
use crate::mc::{Estimate, MCConfig};
use crate::quadrature::gauss_legendre;

/// Default cap on `n·log₂ C(N, n)` for tuple enumeration.
pub const DEFAULT_BUDGET_BITS: f64 = 120.0;

pub type TupleFn = Arc<dyn Fn(&[JumpRecord]) -> f64 + Send + Sync>;
pub type TupleDtFn = Arc<dyn Fn(usize, &[JumpRecord]) -> f64 + Send + Sync>;

/// How an integrand is evaluated at time-unordered arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extension {
    /// Sort the arguments by time first: the symmetric extension.
    Symmetric,
    /// The closure is already defined (and used as is) off the simplex.
    Given,
}

/// A function `φ(t₁,x₁; …; t_n,x_n)` on the simplex with its time partials.
#[derive(Clone)]
pub struct SimplexIntegrand {
    arity: usize,
    eval: TupleFn,
    dt: TupleDtFn,
    extension: Extension,
}

impl fmt::Debug for SimplexIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimplexIntegrand")
            .field("arity", &self.arity)
            .field("extension", &self.extension)
            .finish()
    }
}

fn is_time_sorted(args: &[JumpRecord]) -> bool {
    args.windows(2).all(|w| w[0].time <= w[1].time)
}

impl SimplexIntegrand {
    pub fn new(
        arity: usize,
        extension: Extension,
        eval: impl Fn(&[JumpRecord]) -> f64 + Send + Sync + 'static,
        dt: impl Fn(usize, &[JumpRecord]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(arity >= 1, "arity must be positive");
        Self {
            arity,
            eval: Arc::new(eval),
            dt: Arc::new(dt),
            extension,
        }
    }

    /// Order-one integrand `φ(t, x)`.
    pub fn single(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dt: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            1,
            Extension::Given,
            move |a| f(a[0].time, a[0].size),
            move |_, a| dt(a[0].time, a[0].size),
        )
    }

    /// The constant `c`.
    pub fn constant(arity: usize, c: f64) -> Self {
        Self::new(arity, Extension::Given, move |_| c, |_, _| 0.0)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    fn ordered<'a>(&self, args: &'a [JumpRecord]) -> (Cow<'a, [JumpRecord]>, Option<Vec<usize>>) {
        if self.extension == Extension::Given || is_time_sorted(args) {
            return (Cow::Borrowed(args), None);
        }
        let mut idx: Vec<usize> = (0..args.len()).collect();
        idx.sort_by(|&a, &b| args[a].time.total_cmp(&args[b].time));
        let sorted: Vec<JumpRecord> = idx.iter().map(|&i| args[i]).collect();
        (Cow::Owned(sorted), Some(idx))
    }

    pub fn value(&self, args: &[JumpRecord]) -> f64 {
        debug_assert_eq!(args.len(), self.arity);
        let (a, _) = self.ordered(args);
        (self.eval)(&a)
    }

    /// `∂φ/∂t_j` at `args`; `j` refers to the position in `args`.
    pub fn dt_value(&self, j: usize, args: &[JumpRecord]) -> f64 {
        debug_assert_eq!(args.len(), self.arity);
        match self.ordered(args) {
            (a, None) => (self.dt)(j, &a),
            (a, Some(idx)) => {
                let pos = idx
                    .iter()
                    .position(|&i| i == j)
                    .expect("slot index in range");
                (self.dt)(pos, &a)
            }
        }
    }

    /// Checks every time partial by central differences at the given points.
    pub fn validate(&self, points: &[Vec<JumpRecord>], delta: f64, rel: f64) -> Result<()> {
        for args in points {
            for j in 0..self.arity {
                let shifted = |d: f64| {
                    let mut a = args.clone();
                    a[j].time += d;
                    self.value(&a)
                };
                let numeric = (shifted(delta) - shifted(-delta)) / (2.0 * delta);
                let analytic = self.dt_value(j, args);
                if (analytic - numeric).abs() > rel * (1.0 + analytic.abs()) {
                    return Err(Error::Validation(format!(
                        "slot {j} time partial: analytic {analytic}, finite difference {numeric}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `c·φ`.
    pub fn scale(&self, c: f64) -> Self {
        let (e, d) = (self.eval.clone(), self.dt.clone());
        Self {
            arity: self.arity,
            eval: Arc::new(move |a| c * e(a)),
            dt: Arc::new(move |j, a| c * d(j, a)),
            extension: self.extension,
        }
    }

    /// `a·self + b·other`; both must have the same arity.
    pub fn combine(&self, a: f64, other: &SimplexIntegrand, b: f64) -> Self {
        assert_eq!(self.arity, other.arity);
        let (p, q) = (self.clone(), other.clone());
        let (p2, q2) = (self.clone(), other.clone());
        Self::new(
            self.arity,
            Extension::Given,
            move |x| a * p.value(x) + b * q.value(x),
            move |j, x| a * p2.dt_value(j, x) + b * q2.dt_value(j, x),
        )
    }
}

fn without(args: &[JumpRecord], j: usize) -> Vec<JumpRecord> {
    args.iter()
        .enumerate()
        .filter_map(|(i, a)| (i != j).then_some(*a))
        .collect()
}

/// `φ_n ⊗̃ φ₁ (…) = Σ_j φ_n(all but slot j) φ₁(slot j)`, of arity `n + 1`.
pub fn tensor_tilde(phi_n: &SimplexIntegrand, phi_1: &SimplexIntegrand) -> SimplexIntegrand {
    assert_eq!(phi_1.arity, 1, "second factor must have arity one");
    let n1 = phi_n.arity + 1;
    let (p, q) = (phi_n.clone(), phi_1.clone());
    let (p2, q2) = (phi_n.clone(), phi_1.clone());
    SimplexIntegrand::new(
        n1,
        Extension::Given,
        move |a| {
            (0..a.len())
                .map(|j| p.value(&without(a, j)) * q.value(&a[j..=j]))
                .sum()
        },
        move |i, a| {
            let mut s = 0.0;
            for j in 0..a.len() {
                if j == i {
                    s += p2.value(&without(a, j)) * q2.dt_value(0, &a[j..=j]);
                } else {
                    let pos = if i < j { i } else { i - 1 };
                    s += p2.dt_value(pos, &without(a, j)) * q2.value(&a[j..=j]);
                }
            }
            s
        },
    )
}

/// `φ_n ∗ φ₁ (…) = φ_n(…) Σ_j φ₁(slot j)`, of arity `n`.
pub fn star_contract(phi_n: &SimplexIntegrand, phi_1: &SimplexIntegrand) -> SimplexIntegrand {
    assert_eq!(phi_1.arity, 1, "second factor must have arity one");
    let (p, q) = (phi_n.clone(), phi_1.clone());
    let (p2, q2) = (phi_n.clone(), phi_1.clone());
    SimplexIntegrand::new(
        phi_n.arity,
        phi_n.extension,
        move |a| {
            p.value(a)
                * a.iter()
                    .map(|r| q.value(std::slice::from_ref(r)))
                    .sum::<f64>()
        },
        move |i, a| {
            let sum: f64 = a.iter().map(|r| q2.value(std::slice::from_ref(r))).sum();
            p2.dt_value(i, a) * sum + p2.value(a) * q2.dt_value(0, &a[i..=i])
        },
    )
}

/// Plain tensor product `φ_n(slots 1..n) φ₁(slot n+1)`, defined off the simplex
/// through the extension of `φ_n`.
pub fn tensor(phi_n: &SimplexIntegrand, phi_1: &SimplexIntegrand) -> SimplexIntegrand {
    assert_eq!(phi_1.arity, 1, "second factor must have arity one");
    let n = phi_n.arity;
    let (p, q) = (phi_n.clone(), phi_1.clone());
    let (p2, q2) = (phi_n.clone(), phi_1.clone());
    SimplexIntegrand::new(
        n + 1,
        Extension::Given,
        move |a| p.value(&a[..n]) * q.value(&a[n..]),
        move |i, a| {
            if i < n {
                p2.dt_value(i, &a[..n]) * q2.value(&a[n..])
            } else {
                p2.value(&a[..n]) * q2.dt_value(0, &a[n..])
            }
        },
    )
}

/// Average of `φ` over all permutations of its slots.
pub fn symmetrize(phi: &SimplexIntegrand) -> SimplexIntegrand {
    let n = phi.arity;
    if n == 1 {
        return phi.clone();
    }
    let perms: Arc<Vec<Vec<usize>>> = Arc::new((0..n).permutations(n).collect());
    let count = perms.len() as f64;
    let (p, p2) = (phi.clone(), phi.clone());
    let (perms2, perms_e) = (perms.clone(), perms);
    SimplexIntegrand::new(
        n,
        Extension::Given,
        move |a| {
            let mut buf = a.to_vec();
            let mut s = 0.0;
            for perm in perms_e.iter() {
                for (k, &i) in perm.iter().enumerate() {
                    buf[k] = a[i];
                }
                s += p.value(&buf);
            }
            s / count
        },
        move |j, a| {
            let mut buf = a.to_vec();
            let mut s = 0.0;
            for perm in perms2.iter() {
                for (k, &i) in perm.iter().enumerate() {
                    buf[k] = a[i];
                }
                let pos = perm.iter().position(|&i| i == j).expect("permutation");
                s += p2.dt_value(pos, &buf);
            }
            s / count
        },
    )
}

fn log2_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64 / (i + 1) as f64).log2())
        .sum()
}

/// Jumps of `path` with size in `theta`, after checking `theta` is admissible.
pub fn theta_jumps(path: &LevyPath, theta: &JumpSet) -> Result<Vec<JumpRecord>> {
    check_theta(&path.triplet, theta)?;
    Ok(path
        .jumps
        .iter()
        .copied()
        .filter(|j| theta.contains_jump(j.size))
        .collect())
}

/// `Θ` must stay away from the origin, and beyond the truncation level when
/// the measure approximates an infinite one.
pub fn check_theta(triplet: &LevyTriplet, theta: &JumpSet) -> Result<()> {
    let gap = theta.gap_from_zero();
    let needed = triplet.truncation.unwrap_or(0.0);
    if gap == 0.0 && !triplet.nu.is_finite() || triplet.truncation.is_some() && gap < needed {
        return Err(Error::SetNotBoundedAwayFromZero);
    }
    if !triplet.nu.is_finite() && !theta.bounded_away_from_zero() {
        return Err(Error::SetNotBoundedAwayFromZero);
    }
    Ok(())
}

/// `J_n(φ)` over an explicit, time-sorted jump list.
pub fn multiple_integral_on(
    jumps: &[JumpRecord],
    phi: &SimplexIntegrand,
    budget_bits: f64,
) -> Result<f64> {
    let n = phi.arity;
    if jumps.len() < n {
        return Ok(0.0);
    }
    let bits = n as f64 * log2_binomial(jumps.len(), n);
    if bits > budget_bits {
        return Err(Error::EnumerationBudget {
            jumps: jumps.len(),
            arity: n,
            budget_bits,
        });
    }
    let mut buf = vec![jumps[0]; n];
    let mut total = 0.0;
    for combo in (0..jumps.len()).combinations(n) {
        for (k, &i) in combo.iter().enumerate() {
            buf[k] = jumps[i];
        }
        total += (phi.eval)(&buf);
    }
    Ok(total)
}

/// `J_n^Θ(φ)` on `path`.
pub fn multiple_integral(path: &LevyPath, theta: &JumpSet, phi: &SimplexIntegrand) -> Result<f64> {
    multiple_integral_on(&theta_jumps(path, theta)?, phi, DEFAULT_BUDGET_BITS)
}

/// Both sides of `J_n J₁ = J_{n+1}(φ_n ⊗̃ φ₁) + J_n(φ_n ∗ φ₁)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl ProductResidual {
    /// `|lhs - rhs| / (1 + |lhs|)`.
    pub fn relative(&self) -> f64 {
        self.residual / (1.0 + self.lhs.abs())
    }
}

pub fn product_identity_residual(
    path: &LevyPath,
    theta: &JumpSet,
    phi_n: &SimplexIntegrand,
    phi_1: &SimplexIntegrand,
) -> Result<ProductResidual> {
    let jumps = theta_jumps(path, theta)?;
    let b = DEFAULT_BUDGET_BITS;
    let lhs = multiple_integral_on(&jumps, phi_n, b)? * multiple_integral_on(&jumps, phi_1, b)?;
    let rhs = multiple_integral_on(&jumps, &tensor_tilde(phi_n, phi_1), b)?
        + multiple_integral_on(&jumps, &star_contract(phi_n, phi_1), b)?;
    Ok(ProductResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// Which weight the moment constant uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentConstant {
    /// `C(k, n)^{p-1}`: the Jensen factor for a sum of `C(k, n)` terms.
    Binomial,
    /// `k^{p-1}`, the weight that appears in the literature's statement.
    Power,
}

/// `e^{-λ} Σ_{k≥n} λ^{k-n}/(k-n)! w(k)` with `λ = ν(Θ)T`, returned with a
/// bound on the neglected tail.
pub fn moment_constant(lambda: f64, n: usize, p: f64, kind: MomentConstant) -> Result<(f64, f64)> {
    if !(lambda >= 0.0 && lambda.is_finite()) || n == 0 || !(p >= 1.0) {
        return Err(invalid("moment constant", "need λ ≥ 0, n ≥ 1, p ≥ 1"));
    }
    let weight_ratio = |k: usize| -> f64 {
        // w(k+1) / w(k)
        match kind {
            MomentConstant::Binomial => ((k + 1) as f64 / (k + 1 - n) as f64).powf(p - 1.0),
            MomentConstant::Power => ((k + 1) as f64 / k as f64).powf(p - 1.0),
        }
    };
    let w_n = match kind {
        MomentConstant::Binomial => 1.0,
        MomentConstant::Power => (n as f64).powf(p - 1.0),
    };
    let mut term = (-lambda).exp() * w_n;
    let mut sum = 0.0;
    let mut k = n;
    loop {
        sum += term;
        let r = lambda / (k + 1 - n) as f64 * weight_ratio(k);
        let next = term * r;
        k += 1;
        // Ratios decrease in k, so once below one the tail is geometric.
        let r_next = lambda / (k + 1 - n) as f64 * weight_ratio(k);
        if r_next < 0.5 && next <= 1e-17 * sum {
            let tail = next / (1.0 - r_next);
            return Ok((sum, tail));
        }
        if k > n + 100_000 {
            return Err(Error::Validation("moment series did not converge".into()));
        }
        term = next;
    }
}

/// `∫_{S_n(Θ)} |φ|^p dt ν^n(dx)` by a collapsed Gauss–Legendre rule on the time
/// simplex and a fixed rule on `Θ`.
pub fn simplex_lp_integral(
    triplet: &LevyTriplet,
    theta: &JumpSet,
    phi: &SimplexIntegrand,
    p: f64,
    order: usize,
) -> Result<f64> {
    check_theta(triplet, theta)?;
    let n = phi.arity;
    let t_end = triplet.horizon;
    let x_rule = triplet.nu.fixed_rule(theta, 8, 10)?;
    let (gx, gw) = gauss_legendre(order);
    let u: Vec<(f64, f64)> = gx
        .iter()
        .zip(&gw)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();

    let mut total = 0.0;
    let mut args = vec![
        JumpRecord {
            time: 0.0,
            size: 1.0
        };
        n
    ];
    let mut t_idx = vec![0usize; n];
    loop {
        // t_n = T u_n, t_{k} = t_{k+1} u_k, Jacobian Π t_{k+1}.
        let mut jac = 1.0;
        let mut wt = 1.0;
        let mut upper = t_end;
        for k in (0..n).rev() {
            let (uk, wk) = u[t_idx[k]];
            jac *= upper;
            wt *= wk;
            upper *= uk;
            args[k].time = upper;
        }
        let mut x_idx = vec![0usize; n];
        loop {
            let mut wx = 1.0;
            for k in 0..n {
                let (x, w) = x_rule[x_idx[k]];
                args[k].size = x;
                wx *= w;
            }
            total += wt * jac * wx * phi.value(&args).abs().powf(p);
            if !advance(&mut x_idx, x_rule.len()) {
                break;
            }
        }
        if !advance(&mut t_idx, u.len()) {
            break;
        }
    }
    Ok(total)
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    if base == 0 {
        return false;
    }
    for d in idx.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Monte Carlo `E|J_n^Θ(φ)|^p` against the constant times `∫|φ|^p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentBound {
    pub n: usize,
    pub p: f64,
    pub lhs: Estimate,
    pub integral: f64,
    pub constant: f64,
    pub constant_tail: f64,
    pub rhs: f64,
    /// The bound with the `k^{p-1}` weight.
    pub rhs_power_weight: f64,
}

impl MomentBound {
    /// `lhs ≤ rhs` up to `slack` standard errors.
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs.mean <= self.rhs + slack * self.lhs.stderr
    }
}

pub fn moment_bound_check(
    mc: &MCConfig,
    triplet: &Arc<LevyTriplet>,
    theta: &JumpSet,
    phi: &SimplexIntegrand,
    p: f64,
) -> Result<MomentBound> {
    check_theta(triplet, theta)?;
    let n = phi.arity;
    let lambda = triplet.nu.mass_on(theta, 1e-12)? * triplet.horizon;
    let (constant, constant_tail) = moment_constant(lambda, n, p, MomentConstant::Binomial)?;
    let (power, power_tail) = moment_constant(lambda, n, p, MomentConstant::Power)?;
    let integral = simplex_lp_integral(triplet, theta, phi, p, 24)?;
    let samples: Vec<Result<f64>> = mc.map(|_, seed| {
        let path = simulate_path(triplet, 2, seed)?;
        Ok(multiple_integral(&path, theta, phi)?.abs().powf(p))
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(MomentBound {
        n,
        p,
        lhs: Estimate::from_samples(&samples),
        integral,
        constant,
        constant_tail,
        rhs: (constant + constant_tail) * integral,
        rhs_power_weight: (power + power_tail) * integral,
    })
}

/// Random time-sorted argument tuples for validation and property tests.
pub fn random_tuples<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    horizon: f64,
    sizes: &[f64],
) -> Vec<Vec<JumpRecord>> {
    (0..count)
        .map(|_| {
            let mut v: Vec<JumpRecord> = (0..n)
                .map(|_| JumpRecord {
                    time: horizon * (0.05 + 0.9 * rng.random::<f64>()),
                    size: sizes[rng.random_range(0..sizes.len())],
                })
                .collect();
            v.sort_by(|a, b| a.time.total_cmp(&b.time));
            v
        })
        .collect()
}
