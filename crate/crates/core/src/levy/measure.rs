use rand::Rng;
use serde::{Deserialize, Serialize};

use super::jumpset::JumpSet;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive_simpson, CompositeRule};

/// Point mass of a discrete Lévy measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub size: f64,
    pub mass: f64,
}

/// Finite Lévy measures given by a density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FiniteDensity {
    /// `c₊ e^{-r₊ x}` on `lo ≤ x ≤ hi` and `c₋ e^{-r₋ |x|}` on `-hi ≤ x ≤ -lo`.
    TwoSidedExponential {
        c_pos: f64,
        rate_pos: f64,
        c_neg: f64,
        rate_neg: f64,
        lo: f64,
        hi: f64,
    },
    /// `c e^{-r x} / x` on `x > lo`, the truncation of a gamma-type measure.
    GammaLike {
        c: f64,
        rate: f64,
        lo: f64,
        mass: f64,
    },
}

/// Infinite-activity families that can only be simulated after truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InfiniteFamily {
    /// `c e^{-r x} / x` on `x > 0`.
    GammaLike { c: f64, rate: f64 },
}

/// A Lévy measure on ℝ with no mass at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LevyMeasure {
    Discrete { atoms: Vec<Atom> },
    Finite(FiniteDensity),
    Truncatable(InfiniteFamily),
}

/// Where the exponential tails are cut for quadrature (e^{-45} ≈ 3e-20).
const TAIL_DECAY: f64 = 45.0;

fn exp_mass(c: f64, rate: f64, lo: f64, hi: f64) -> f64 {
    if c == 0.0 || hi <= lo {
        return 0.0;
    }
    if rate == 0.0 {
        c * (hi - lo)
    } else {
        c * ((-rate * lo).exp() - (-rate * hi).exp()) / rate
    }
}

/// Integral over `[a, b]` (same sign, `0 < |a| < |b|`) with a logarithmic
/// change of variables when the segment spans several decades.
fn integrate_segment<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    if a > 0.0 && b / a > 8.0 {
        adaptive_simpson(
            |u: f64| {
                let x = u.exp();
                f(x) * x
            },
            a.ln(),
            b.ln(),
            tol,
        )
    } else if b < 0.0 && a / b > 8.0 {
        adaptive_simpson(
            |u: f64| {
                let x = -u.exp();
                f(x) * (-x)
            },
            (-b).ln(),
            (-a).ln(),
            tol,
        )
    } else {
        adaptive_simpson(f, a, b, tol)
    }
}

impl LevyMeasure {
    /// Zero measure: no jumps.
    pub fn zero() -> Self {
        LevyMeasure::Discrete { atoms: Vec::new() }
    }

    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if a.size == 0.0 || !a.size.is_finite() {
                return Err(invalid("atoms", "atom sizes must be finite and nonzero"));
            }
            if !(a.mass >= 0.0 && a.mass.is_finite()) {
                return Err(invalid(
                    "atoms",
                    "atom masses must be finite and nonnegative",
                ));
            }
        }
        Ok(LevyMeasure::Discrete { atoms })
    }

    /// Unit-rate Poisson process: `δ₁`.
    pub fn poisson(rate: f64) -> Result<Self> {
        Self::discrete(vec![Atom {
            size: 1.0,
            mass: rate,
        }])
    }

    pub fn two_sided_exponential(
        c_pos: f64,
        rate_pos: f64,
        c_neg: f64,
        rate_neg: f64,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid("lo/hi", "need 0 < lo < hi < inf"));
        }
        if c_pos < 0.0 || c_neg < 0.0 || rate_pos < 0.0 || rate_neg < 0.0 {
            return Err(invalid("c/rate", "coefficients must be nonnegative"));
        }
        Ok(LevyMeasure::Finite(FiniteDensity::TwoSidedExponential {
            c_pos,
            rate_pos,
            c_neg,
            rate_neg,
            lo,
            hi,
        }))
    }

    pub fn gamma_like(c: f64, rate: f64) -> Result<Self> {
        if !(c > 0.0 && rate > 0.0) {
            return Err(invalid("gamma-like", "c and rate must be positive"));
        }
        Ok(LevyMeasure::Truncatable(InfiniteFamily::GammaLike {
            c,
            rate,
        }))
    }

    fn gamma_like_truncated(c: f64, rate: f64, lo: f64) -> Result<Self> {
        if !(lo > 0.0) {
            return Err(invalid("eps", "truncation level must be positive"));
        }
        let hi = lo + TAIL_DECAY / rate;
        let mass = integrate_segment(|x| c * (-rate * x).exp() / x, lo, hi, 1e-13)?;
        Ok(LevyMeasure::Finite(FiniteDensity::GammaLike {
            c,
            rate,
            lo,
            mass,
        }))
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, LevyMeasure::Truncatable(_))
    }

    /// ν(ℝ₀).
    pub fn total_mass(&self) -> Result<f64> {
        match self {
            LevyMeasure::Discrete { atoms } => Ok(atoms.iter().map(|a| a.mass).sum()),
            LevyMeasure::Finite(FiniteDensity::TwoSidedExponential {
                c_pos,
                rate_pos,
                c_neg,
                rate_neg,
                lo,
                hi,
            }) => Ok(exp_mass(*c_pos, *rate_pos, *lo, *hi) + exp_mass(*c_neg, *rate_neg, *lo, *hi)),
            LevyMeasure::Finite(FiniteDensity::GammaLike { mass, .. }) => Ok(*mass),
            LevyMeasure::Truncatable(_) => Err(Error::InfiniteMeasure),
        }
    }

    /// The restriction of ν to `{|x| > eps}`; always a finite measure.
    pub fn truncated(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(invalid("eps", "truncation level must be positive"));
        }
        match self {
            LevyMeasure::Discrete { atoms } => Ok(LevyMeasure::Discrete {
                atoms: atoms
                    .iter()
                    .copied()
                    .filter(|a| a.size.abs() > eps)
                    .collect(),
            }),
            LevyMeasure::Finite(FiniteDensity::TwoSidedExponential {
                c_pos,
                rate_pos,
                c_neg,
                rate_neg,
                lo,
                hi,
            }) => {
                let new_lo = lo.max(eps);
                if new_lo >= *hi {
                    return Ok(Self::zero());
                }
                Self::two_sided_exponential(*c_pos, *rate_pos, *c_neg, *rate_neg, new_lo, *hi)
            }
            LevyMeasure::Finite(FiniteDensity::GammaLike { c, rate, lo, .. }) => {
                Self::gamma_like_truncated(*c, *rate, lo.max(eps))
            }
            LevyMeasure::Truncatable(InfiniteFamily::GammaLike { c, rate }) => {
                Self::gamma_like_truncated(*c, *rate, eps)
            }
        }
    }

    /// Density with respect to Lebesgue measure (zero for discrete measures).
    pub fn density(&self, x: f64) -> f64 {
        match self {
            LevyMeasure::Discrete { .. } => 0.0,
            LevyMeasure::Finite(FiniteDensity::TwoSidedExponential {
                c_pos,
                rate_pos,
                c_neg,
                rate_neg,
                lo,
                hi,
            }) => {
                let a = x.abs();
                if a < *lo || a > *hi {
                    0.0
                } else if x > 0.0 {
                    c_pos * (-rate_pos * a).exp()
                } else {
                    c_neg * (-rate_neg * a).exp()
                }
            }
            LevyMeasure::Finite(FiniteDensity::GammaLike { c, rate, lo, .. }) => {
                if x > *lo {
                    c * (-rate * x).exp() / x
                } else {
                    0.0
                }
            }
            LevyMeasure::Truncatable(InfiniteFamily::GammaLike { c, rate }) => {
                if x > 0.0 {
                    c * (-rate * x).exp() / x
                } else {
                    0.0
                }
            }
        }
    }

    /// Support pieces used for quadrature of density measures.
    fn segments(&self) -> Vec<(f64, f64)> {
        match self {
            LevyMeasure::Discrete { .. } => Vec::new(),
            LevyMeasure::Finite(FiniteDensity::TwoSidedExponential {
                c_pos,
                c_neg,
                lo,
                hi,
                ..
            }) => {
                let mut v = Vec::new();
                if *c_neg > 0.0 {
                    v.push((-hi, -lo));
                }
                if *c_pos > 0.0 {
                    v.push((*lo, *hi));
                }
                v
            }
            LevyMeasure::Finite(FiniteDensity::GammaLike { rate, lo, .. }) => {
                vec![(*lo, lo + TAIL_DECAY / rate)]
            }
            LevyMeasure::Truncatable(InfiniteFamily::GammaLike { rate, .. }) => {
                vec![(0.0, TAIL_DECAY / rate)]
            }
        }
    }

    /// ∫_{set} f dν with absolute target `tol`.
    ///
    /// Discrete measures are summed exactly. For infinite measures the
    /// integral near the origin is checked for convergence and an error is
    /// returned when it diverges.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, set: &JumpSet, f: F, tol: f64) -> Result<f64> {
        if let LevyMeasure::Discrete { atoms } = self {
            return Ok(atoms
                .iter()
                .filter(|a| set.contains_jump(a.size))
                .map(|a| a.mass * f(a.size))
                .sum());
        }
        let g = |x: f64| f(x) * self.density(x);
        let mut total = 0.0;
        for (a, b) in self.segments() {
            for (lo, hi) in set.clip(a, b) {
                if lo == 0.0 {
                    // Infinite activity: compare two inner cutoffs.
                    let coarse = integrate_segment(g, 1e-12, hi, tol)?;
                    let fine = integrate_segment(g, 1e-24, hi, tol)?;
                    if (fine - coarse).abs() > 1e3 * tol + 1e-8 * fine.abs() {
                        return Err(Error::Quadrature {
                            a: 0.0,
                            b: hi,
                            reason: format!("integral diverges at the origin ({coarse} vs {fine})"),
                        });
                    }
                    total += fine;
                } else if hi == 0.0 {
                    let coarse = integrate_segment(g, lo, -1e-12, tol)?;
                    let fine = integrate_segment(g, lo, -1e-24, tol)?;
                    if (fine - coarse).abs() > 1e3 * tol + 1e-8 * fine.abs() {
                        return Err(Error::Quadrature {
                            a: lo,
                            b: 0.0,
                            reason: format!("integral diverges at the origin ({coarse} vs {fine})"),
                        });
                    }
                    total += fine;
                } else {
                    total += integrate_segment(g, lo, hi, tol)?;
                }
            }
        }
        Ok(total)
    }

    /// Fixed product rule for ∫_{set} · dν as `(node, weight)` pairs, the
    /// density folded into the weights. Atoms are returned exactly.
    pub fn fixed_rule(
        &self,
        set: &JumpSet,
        panels: usize,
        order: usize,
    ) -> Result<Vec<(f64, f64)>> {
        if let LevyMeasure::Discrete { atoms } = self {
            return Ok(atoms
                .iter()
                .filter(|a| set.contains_jump(a.size))
                .map(|a| (a.size, a.mass))
                .collect());
        }
        let mut out = Vec::new();
        for (a, b) in self.segments() {
            for (lo, hi) in set.clip(a, b) {
                if lo == 0.0 || hi == 0.0 {
                    return Err(Error::SetNotBoundedAwayFromZero);
                }
                let log_scale = (lo > 0.0 && hi / lo > 8.0) || (hi < 0.0 && lo / hi > 8.0);
                if log_scale {
                    let sign = lo.signum();
                    let (ua, ub) = (
                        lo.abs().ln().min(hi.abs().ln()),
                        lo.abs().ln().max(hi.abs().ln()),
                    );
                    let rule = CompositeRule::new(ua, ub, panels, order);
                    for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                        let x = sign * u.exp();
                        out.push((x, w * x.abs() * self.density(x)));
                    }
                } else {
                    let rule = CompositeRule::new(lo, hi, panels, order);
                    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                        out.push((*x, w * self.density(*x)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Representative jump sizes for validation: the atoms, or points spread
    /// over the support (log-spaced on segments spanning several decades).
    pub fn support_points(&self, per_segment: usize) -> Vec<f64> {
        if let LevyMeasure::Discrete { atoms } = self {
            return atoms.iter().map(|a| a.size).collect();
        }
        let mut out = Vec::new();
        for (a, b) in self.segments() {
            let (lo, hi) = if a == 0.0 { (1e-6 * b, b) } else { (a, b) };
            for i in 0..per_segment {
                let w = (i as f64 + 0.5) / per_segment as f64;
                let x = if lo > 0.0 && hi / lo > 8.0 {
                    (lo.ln() + w * (hi / lo).ln()).exp()
                } else if hi < 0.0 && lo / hi > 8.0 {
                    -((-hi).ln() + w * (lo / hi).ln()).exp()
                } else {
                    lo + w * (hi - lo)
                };
                out.push(x);
            }
        }
        out
    }

    /// ∫ f dν over all of ℝ₀.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> Result<f64> {
        self.integrate_on(&JumpSet::nonzero(), f, tol)
    }

    /// ν(set); finite sets of a finite measure use the exact mass where possible.
    pub fn mass_on(&self, set: &JumpSet, tol: f64) -> Result<f64> {
        if !self.is_finite() && !set.bounded_away_from_zero() {
            return Err(Error::InfiniteMeasure);
        }
        self.integrate_on(set, |_| 1.0, tol)
    }

    /// Checks finiteness of the first two absolute moments.
    pub fn validate(&self) -> Result<()> {
        let m1 = self.integrate(|x| x.abs(), 1e-10)?;
        let m2 = self.integrate(|x| x * x, 1e-10)?;
        if !(m1.is_finite() && m2.is_finite()) {
            return Err(Error::Validation(
                "Lévy measure moments are not finite".into(),
            ));
        }
        Ok(())
    }

    /// Draws one jump size from ν / ν(ℝ₀). Requires a finite, nonzero measure.
    pub fn sample_size<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match self {
            LevyMeasure::Discrete { atoms } => {
                let total: f64 = atoms.iter().map(|a| a.mass).sum();
                let mut u = rng.random::<f64>() * total;
                for a in atoms {
                    if u < a.mass {
                        return Ok(a.size);
                    }
                    u -= a.mass;
                }
                atoms
                    .iter()
                    .rev()
                    .find(|a| a.mass > 0.0)
                    .map(|a| a.size)
                    .ok_or_else(|| invalid("nu", "cannot sample from the zero measure"))
            }
            LevyMeasure::Finite(FiniteDensity::TwoSidedExponential {
                c_pos,
                rate_pos,
                c_neg,
                rate_neg,
                lo,
                hi,
            }) => {
                let mp = exp_mass(*c_pos, *rate_pos, *lo, *hi);
                let mn = exp_mass(*c_neg, *rate_neg, *lo, *hi);
                let positive = rng.random::<f64>() * (mp + mn) < mp;
                let rate = if positive { *rate_pos } else { *rate_neg };
                let u: f64 = rng.random();
                let mag = if rate == 0.0 {
                    lo + u * (hi - lo)
                } else {
                    let span = -(-rate * (hi - lo)).exp_m1();
                    (lo - (-u * span).ln_1p() / rate).min(*hi)
                };
                Ok(if positive { mag } else { -mag })
            }
            LevyMeasure::Finite(FiniteDensity::GammaLike { rate, lo, .. }) => loop {
                // Proposal lo + Exp(rate), accepted with probability lo / x.
                let e = -(1.0 - rng.random::<f64>()).ln() / rate;
                let x = lo + e;
                if rng.random::<f64>() * x < *lo {
                    return Ok(x);
                }
            },
            LevyMeasure::Truncatable(_) => Err(Error::InfiniteMeasure),
        }
    }
}
