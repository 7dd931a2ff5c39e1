use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::weight::TimeFunction;
use crate::error::{invalid, Result};

/// One breakpoint of the step part: contributes `coeff·(time/T - 1_{t ≤ time})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub time: f64,
    pub coeff: f64,
}

/// The process `t ↦ D_t F` on `[0, T]`.
///
/// The continuous part lives on the path grid and is read left-point,
/// constant on each `[t_i, t_{i+1})`; the step part is symbolic so that
/// `L²` norms use exact closed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeProcess {
    horizon: f64,
    continuous: Option<(Arc<[f64]>, Vec<f64>)>,
    steps: Vec<Step>,
}

impl DerivativeProcess {
    pub fn zero(horizon: f64) -> Self {
        Self {
            horizon,
            continuous: None,
            steps: Vec::new(),
        }
    }

    /// Builds a step-only process; equal breakpoints are summed.
    pub fn from_steps(horizon: f64, steps: impl IntoIterator<Item = Step>) -> Self {
        let mut p = Self::zero(horizon);
        p.steps = merge_steps(steps.into_iter().collect());
        p
    }

    /// Attaches a continuous part given by its values at the grid nodes.
    pub fn with_continuous(mut self, grid: Arc<[f64]>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(invalid(
                "continuous part",
                "one value per grid node is required",
            ));
        }
        self.continuous = Some((grid, values));
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Grid and node values of the continuous part, if any.
    pub fn continuous(&self) -> Option<(&[f64], &[f64])> {
        self.continuous.as_ref().map(|(g, v)| (&g[..], &v[..]))
    }

    pub fn has_continuous_part(&self) -> bool {
        self.continuous
            .as_ref()
            .is_some_and(|(_, v)| v.iter().any(|&b| b != 0.0))
    }

    /// Number of breakpoints with a nonzero coefficient.
    pub fn active_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.coeff != 0.0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.active_steps() == 0 && !self.has_continuous_part()
    }

    /// Value of the step part at `t`.
    pub fn step_value(&self, t: f64) -> f64 {
        let tt = self.horizon;
        self.steps
            .iter()
            .map(|s| s.coeff * (s.time / tt - if t <= s.time { 1.0 } else { 0.0 }))
            .sum()
    }

    /// Value of the continuous part at `t`.
    pub fn continuous_value(&self, t: f64) -> f64 {
        match &self.continuous {
            None => 0.0,
            Some((grid, vals)) => vals[cell_of(grid, t)],
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.continuous_value(t) + self.step_value(t)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            horizon: self.horizon,
            continuous: self
                .continuous
                .as_ref()
                .map(|(g, v)| (g.clone(), v.iter().map(|b| a * b).collect())),
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    time: s.time,
                    coeff: a * s.coeff,
                })
                .collect(),
        }
    }

    /// `a·self + b·other`. Continuous parts must live on the same grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.horizon != other.horizon {
            return Err(invalid("horizon", "processes live on different horizons"));
        }
        let continuous = match (&self.continuous, &other.continuous) {
            (None, None) => None,
            (Some((g, v)), None) => Some((g.clone(), v.iter().map(|x| a * x).collect())),
            (None, Some((g, v))) => Some((g.clone(), v.iter().map(|x| b * x).collect())),
            (Some((g1, v1)), Some((g2, v2))) => {
                if g1[..] != g2[..] {
                    return Err(invalid("grid", "continuous parts use different grids"));
                }
                Some((
                    g1.clone(),
                    v1.iter().zip(v2).map(|(x, y)| a * x + b * y).collect(),
                ))
            }
        };
        let steps = self
            .steps
            .iter()
            .map(|s| Step {
                time: s.time,
                coeff: a * s.coeff,
            })
            .chain(other.steps.iter().map(|s| Step {
                time: s.time,
                coeff: b * s.coeff,
            }))
            .collect();
        Ok(Self {
            horizon: self.horizon,
            continuous,
            steps: merge_steps(steps),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    /// `∫_0^T D_t g(t) dt`.
    ///
    /// The step part is exact through the antiderivative of `g`; the continuous
    /// part pairs the node values with left-point values of `g`, matching the
    /// left-point Itô sums used for `∫ g dW`.
    pub fn integrate_against(&self, g: &TimeFunction) -> f64 {
        let tt = self.horizon;
        let g_total = g.antiderivative(tt);
        let steps: f64 = self
            .steps
            .iter()
            .map(|s| s.coeff * (s.time / tt * g_total - g.antiderivative(s.time)))
            .sum();
        let cont = match &self.continuous {
            None => 0.0,
            Some((grid, vals)) => (0..grid.len() - 1)
                .map(|i| vals[i] * g.value(grid[i]) * (grid[i + 1] - grid[i]))
                .sum(),
        };
        steps + cont
    }
}

/// Index `i` with `t ∈ [t_i, t_{i+1})`, the last cell also containing `T`.
fn cell_of(grid: &[f64], t: f64) -> usize {
    let last = grid.len() - 2;
    match grid.binary_search_by(|x| x.total_cmp(&t)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

fn merge_steps(mut steps: Vec<Step>) -> Vec<Step> {
    steps.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut out: Vec<Step> = Vec::with_capacity(steps.len());
    for s in steps {
        match out.last_mut() {
            Some(last) if last.time == s.time => last.coeff += s.coeff,
            _ => out.push(s),
        }
    }
    out
}

/// `∫_0^T (D_t F)² dt`.
///
/// Steps use `∫(s/T - 1_{t≤s})(r/T - 1_{t≤r}) dt = s(1 - r/T)` for `s ≤ r`;
/// the continuous part and the cross term are exact for the piecewise-constant
/// representation.
pub fn l2_norm_sq(d: &DerivativeProcess) -> f64 {
    let tt = d.horizon;
    let mut steps = 0.0;
    let mut prefix = 0.0;
    for s in &d.steps {
        let tail = s.coeff * (1.0 - s.time / tt);
        steps += s.coeff * s.time * tail + 2.0 * prefix * tail;
        prefix += s.coeff * s.time;
    }
    let Some((grid, vals)) = &d.continuous else {
        return steps;
    };
    let mut cont = 0.0;
    let mut cross = 0.0;
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let w = b - a;
        cont += vals[i] * vals[i] * w;
        if vals[i] != 0.0 {
            let seg: f64 = d
                .steps
                .iter()
                .map(|s| s.coeff * (s.time / tt * w - (s.time - a).clamp(0.0, w)))
                .sum();
            cross += vals[i] * seg;
        }
    }
    steps + cont + 2.0 * cross
}

/// `|∫_0^T D_t dt|` for processes without a continuous part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Orthogonality {
    Residual {
        value: f64,
        scale: f64,
    },
    /// A continuous (Brownian) part is present, so the identity does not apply.
    NotApplicable,
}

impl Orthogonality {
    /// `value ≤ tol·scale`, vacuously true when not applicable.
    pub fn within(&self, tol: f64) -> bool {
        match self {
            Orthogonality::Residual { value, scale } => {
                *value <= tol * scale.max(f64::MIN_POSITIVE)
            }
            Orthogonality::NotApplicable => true,
        }
    }
}

pub fn orthogonality_residual(d: &DerivativeProcess) -> Orthogonality {
    if d.has_continuous_part() {
        return Orthogonality::NotApplicable;
    }
    let tt = d.horizon;
    let value = d
        .steps
        .iter()
        .map(|s| s.coeff * (s.time / tt * tt - s.time))
        .sum::<f64>()
        .abs();
    let scale = d.steps.iter().map(|s| s.coeff.abs()).sum::<f64>() * tt;
    Orthogonality::Residual { value, scale }
}

/// Default positivity threshold, relative to the squared coefficient scale.
pub const DEFAULT_CRITERION_TOL: f64 = 1e-12;

/// `∫ D_t² dt > τ·T·scale²` with `scale = Σ|c_j| + max|b_i|`.
///
/// The threshold is relative, so it separates cancellation to zero from
/// small but genuinely nonzero processes. The zero process is never positive.
pub fn abs_continuity_indicator(d: &DerivativeProcess, tau: f64) -> bool {
    let mut scale: f64 = d.steps.iter().map(|s| s.coeff.abs()).sum();
    if let Some((_, vals)) = &d.continuous {
        scale += vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let norm = l2_norm_sq(d);
    norm > 0.0 && norm > tau * d.horizon * scale * scale
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::quadrature::adaptive_simpson_split;

    #[test]
    fn single_step_closed_form() {
        let d = DerivativeProcess::from_steps(
            1.0,
            [Step {
                time: 0.5,
                coeff: 2.0,
            }],
        );
        assert_abs_diff_eq!(l2_norm_sq(&d), 1.0, epsilon = 1e-15);
        assert_eq!(l2_norm_sq(&DerivativeProcess::zero(1.0)), 0.0);
        assert!(abs_continuity_indicator(&d, DEFAULT_CRITERION_TOL));
        assert!(!abs_continuity_indicator(
            &DerivativeProcess::zero(1.0),
            DEFAULT_CRITERION_TOL
        ));
        let tiny = DerivativeProcess::from_steps(
            1.0,
            [Step {
                time: 0.5,
                coeff: 1e-9,
            }],
        );
        assert!(abs_continuity_indicator(&tiny, DEFAULT_CRITERION_TOL));
        let cancelled = DerivativeProcess::from_steps(
            1.0,
            [
                Step {
                    time: 0.5,
                    coeff: 1.0,
                },
                Step {
                    time: 0.5 + 1e-14,
                    coeff: -1.0,
                },
            ],
        );
        assert!(!abs_continuity_indicator(&cancelled, DEFAULT_CRITERION_TOL));
    }

    #[test]
    fn steps_against_direct_quadrature() {
        let d = DerivativeProcess::from_steps(
            2.0,
            [
                Step {
                    time: 0.3,
                    coeff: 1.5,
                },
                Step {
                    time: 1.1,
                    coeff: -0.7,
                },
                Step {
                    time: 1.9,
                    coeff: 0.2,
                },
            ],
        );
        let direct =
            adaptive_simpson_split(|t| d.value(t).powi(2), 0.0, 2.0, &[0.3, 1.1, 1.9], 1e-14)
                .unwrap();
        assert_abs_diff_eq!(l2_norm_sq(&d), direct, epsilon = 1e-12);
    }

    #[test]
    fn continuous_part_and_cross_term() {
        let grid: Arc<[f64]> = vec![0.0, 0.25, 0.5, 0.75, 1.0].into();
        let d = DerivativeProcess::from_steps(
            1.0,
            [Step {
                time: 0.6,
                coeff: 1.0,
            }],
        )
        .with_continuous(grid, vec![1.0, -2.0, 0.5, 3.0, 3.0])
        .unwrap();
        let direct = adaptive_simpson_split(
            |t| d.value(t).powi(2),
            0.0,
            1.0,
            &[0.25, 0.5, 0.6, 0.75],
            1e-14,
        )
        .unwrap();
        assert_abs_diff_eq!(l2_norm_sq(&d), direct, epsilon = 1e-12);
        assert_eq!(orthogonality_residual(&d), Orthogonality::NotApplicable);
    }

    #[test]
    fn merging_and_orthogonality() {
        let a = DerivativeProcess::from_steps(
            1.0,
            [
                Step {
                    time: 0.2,
                    coeff: 1.0,
                },
                Step {
                    time: 0.2,
                    coeff: 2.0,
                },
            ],
        );
        assert_eq!(a.steps().len(), 1);
        assert_eq!(a.steps()[0].coeff, 3.0);
        let b = DerivativeProcess::from_steps(
            1.0,
            [Step {
                time: 0.7,
                coeff: -1.0,
            }],
        );
        let c = a.combine(2.0, &b, 3.0).unwrap();
        for t in [0.0, 0.1, 0.2, 0.5, 0.7, 0.9, 1.0] {
            assert_abs_diff_eq!(
                c.value(t),
                2.0 * a.value(t) + 3.0 * b.value(t),
                epsilon = 1e-14
            );
        }
        assert!(orthogonality_residual(&c).within(1e-12));
    }

    #[test]
    fn integrate_against_constant_time_function() {
        let d = DerivativeProcess::from_steps(
            1.0,
            [Step {
                time: 0.4,
                coeff: 2.0,
            }],
        );
        // ∫ 2(0.4 - 1_{t ≤ 0.4}) t dt = 2(0.4·0.5 - 0.08)
        let g = TimeFunction::linear(1.0, 0.0);
        assert_abs_diff_eq!(d.integrate_against(&g), 2.0 * (0.2 - 0.08), epsilon = 1e-15);
    }
}
