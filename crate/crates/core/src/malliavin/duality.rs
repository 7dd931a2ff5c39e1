use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::derivative::{PreparedFunctional, SmoothFunctional};
use super::weight::{TimeFunction, WeightK};
use crate::error::Result;
use crate::levy::{simulate_path, JumpSet, LevyPath, LevyTriplet};
use crate::mc::{Estimate, MCConfig};
use crate::random_measure::brownian_integral;

/// Monte Carlo comparison of the two sides of an integration-by-parts identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub stderr_lhs: f64,
    pub stderr_rhs: f64,
    /// Standard error of the pathwise difference.
    pub stderr_diff: f64,
    /// `|mean(lhs - rhs)| / stderr_diff`; zero when both sides agree exactly.
    pub z_score: f64,
    /// Set when the difference has zero variance but a nonzero mean.
    pub degenerate: bool,
    pub n_paths: usize,
    pub seed: u64,
}

impl DualityReport {
    fn from_pairs(lhs: &[f64], rhs: &[f64], mc: &MCConfig) -> Self {
        let l = Estimate::from_samples(lhs);
        let r = Estimate::from_samples(rhs);
        let diff: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - b).collect();
        let d = Estimate::from_samples(&diff);
        let (z, degenerate) = if d.stderr > 0.0 {
            (d.mean.abs() / d.stderr, false)
        } else if d.mean.abs() <= 1e-12 * (1.0 + l.mean.abs()) {
            (0.0, false)
        } else {
            (f64::INFINITY, true)
        };
        Self {
            lhs: l.mean,
            rhs: r.mean,
            stderr_lhs: l.stderr,
            stderr_rhs: r.stderr,
            stderr_diff: d.stderr,
            z_score: z,
            degenerate,
            n_paths: mc.n_paths,
            seed: mc.base_seed,
        }
    }

    pub fn passes(&self, z_max: f64) -> bool {
        !self.degenerate && self.z_score <= z_max
    }
}

/// The random weight multiplying `F` on the right-hand side:
/// `1_Λ(0) ∫ g dW + ∫_Λ (g(s) - ḡ) k dN - ∫_Λ ∂_s k ψ_g(s) dN`,
/// with `ψ_g(s) = ∫ g(t)(s/T - 1_{t≤s}) dt` and a left-point Itô sum.
pub fn duality_weight(path: &LevyPath, g: &TimeFunction, lambda: &JumpSet, k: &WeightK) -> f64 {
    let tt = path.horizon();
    let g_mean = g.mean(tt);
    let gauss = if lambda.includes_zero && path.triplet.sigma != 0.0 {
        brownian_integral(path, |t| g.value(t))
    } else {
        0.0
    };
    let jumps: f64 = path
        .jumps
        .iter()
        .filter(|j| lambda.contains_jump(j.size))
        .map(|j| {
            (g.value(j.time) - g_mean) * k.value(j.time, j.size)
                - k.dt(j.time, j.size) * g.psi(j.time, tt)
        })
        .sum();
    gauss + jumps
}

/// `E[∫ D_t F g(t) dt]` against `E[F · duality_weight]` on common paths.
#[allow(clippy::too_many_arguments)]
pub fn duality_residual(
    mc: &MCConfig,
    triplet: &Arc<LevyTriplet>,
    grid_size: usize,
    f: &SmoothFunctional,
    g: &TimeFunction,
    lambda: &JumpSet,
    k: &WeightK,
) -> Result<DualityReport> {
    let pf = f.prepare(triplet)?;
    let pairs = sample_pairs(mc, triplet, grid_size, |path| {
        let (value, d) = pf.value_and_derivative(path, lambda, k)?;
        Ok((
            d.integrate_against(g),
            value * duality_weight(path, g, lambda, k),
        ))
    })?;
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(DualityReport::from_pairs(&lhs, &rhs, mc))
}

/// `E[G ∫ D_t F g + F ∫ D_t G g]` against `E[F G · duality_weight]`.
#[allow(clippy::too_many_arguments)]
pub fn product_duality_residual(
    mc: &MCConfig,
    triplet: &Arc<LevyTriplet>,
    grid_size: usize,
    f: &SmoothFunctional,
    g_fn: &SmoothFunctional,
    g: &TimeFunction,
    lambda: &JumpSet,
    k: &WeightK,
) -> Result<DualityReport> {
    let pf: PreparedFunctional = f.prepare(triplet)?;
    let pg: PreparedFunctional = g_fn.prepare(triplet)?;
    let pairs = sample_pairs(mc, triplet, grid_size, |path| {
        let (fv, df) = pf.value_and_derivative(path, lambda, k)?;
        let (gv, dg) = pg.value_and_derivative(path, lambda, k)?;
        let lhs = gv * df.integrate_against(g) + fv * dg.integrate_against(g);
        Ok((lhs, fv * gv * duality_weight(path, g, lambda, k)))
    })?;
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(DualityReport::from_pairs(&lhs, &rhs, mc))
}

fn sample_pairs<W>(
    mc: &MCConfig,
    triplet: &Arc<LevyTriplet>,
    grid_size: usize,
    work: W,
) -> Result<Vec<(f64, f64)>>
where
    W: Fn(&LevyPath) -> Result<(f64, f64)> + Sync + Send,
{
    mc.map(|_, seed| work(&simulate_path(triplet, grid_size, seed)?))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasure;
    use crate::random_measure::Kernel;

    #[test]
    fn constant_functional_with_time_independent_weight() {
        let tr =
            Arc::new(LevyTriplet::new(0.0, 1.0, LevyMeasure::poisson(2.0).unwrap(), 1.0).unwrap());
        let r = duality_residual(
            &MCConfig::new(4000, 1),
            &tr,
            9,
            &SmoothFunctional::constant(1.5),
            &TimeFunction::linear(1.0, 0.0),
            &JumpSet::everything(),
            &WeightK::constant(1.0),
        )
        .unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.z_score <= 4.0, "{r:?}");
    }

    #[test]
    fn poisson_with_constant_g_is_exactly_zero() {
        let tr =
            Arc::new(LevyTriplet::new(0.0, 0.0, LevyMeasure::poisson(1.0).unwrap(), 1.0).unwrap());
        let f = SmoothFunctional::scalar(
            |u| u.tanh(),
            |u| 1.0 / u.cosh().powi(2),
            Kernel::constant(1.0),
        );
        let r = duality_residual(
            &MCConfig::new(500, 2),
            &tr,
            2,
            &f,
            &TimeFunction::constant(1.0),
            &JumpSet::nonzero(),
            &WeightK::constant(1.0),
        )
        .unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.z_score, 0.0);
        assert!(r.rhs.abs() < 1e-15);
    }
}
