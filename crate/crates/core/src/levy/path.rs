use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::jumpset::{Interval, JumpSet};
use super::measure::LevyMeasure;
use crate::error::{invalid, Error, Result};
use crate::rng::{stream, BROWNIAN_STREAM, JUMP_STREAM};

/// Characteristic triplet `(γ, σ, ν)` on the horizon `[0, T]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    pub gamma: f64,
    pub sigma: f64,
    pub nu: LevyMeasure,
    pub horizon: f64,
    /// Set when `nu` is the truncation `{|x| > eps}` of an infinite-activity measure.
    pub truncation: Option<f64>,
    /// Cached ν(ℝ₀); `None` for infinite measures.
    jump_rate: Option<f64>,
    /// Cached ∫_{|x|≤1} x ν(dx), the small-jump compensator rate.
    small_jump_drift: Option<f64>,
}

impl LevyTriplet {
    pub fn new(gamma: f64, sigma: f64, nu: LevyMeasure, horizon: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", "must be finite and nonnegative"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive"));
        }
        if !gamma.is_finite() {
            return Err(invalid("gamma", "must be finite"));
        }
        nu.validate()?;
        let jump_rate = nu.total_mass().ok();
        let small_jump_drift = if nu.is_finite() {
            let small = JumpSet::annulus(0.0, 1.0)?;
            let closed_edge = JumpSet::new(
                false,
                vec![Interval::closed(-1.0, -1.0), Interval::closed(1.0, 1.0)],
            )?;
            Some(
                nu.integrate_on(&small, |x| x, 1e-12)?
                    + nu.integrate_on(&closed_edge, |x| x, 1e-12)?,
            )
        } else {
            None
        };
        Ok(Self {
            gamma,
            sigma,
            nu,
            horizon,
            truncation: None,
            jump_rate,
            small_jump_drift,
        })
    }

    /// Same triplet with ν restricted to `{|x| > eps}`.
    pub fn truncated(&self, eps: f64) -> Result<Self> {
        let mut t = Self::new(
            self.gamma,
            self.sigma,
            self.nu.truncated(eps)?,
            self.horizon,
        )?;
        t.truncation = Some(match self.truncation {
            Some(e) => e.max(eps),
            None => eps,
        });
        if self.nu.is_finite() && self.truncation.is_none() {
            t.truncation = None;
        }
        Ok(t)
    }

    /// ν(ℝ₀) for finite measures.
    pub fn jump_rate(&self) -> Result<f64> {
        self.jump_rate.ok_or(Error::InfiniteMeasure)
    }

    /// Whether the jump part is an approximation of an infinite-activity measure.
    pub fn is_truncated_infinite(&self) -> bool {
        self.truncation.is_some()
    }
}

/// One atom `(T_j, ΔX_{T_j})` of the jump measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
}

/// One realized trajectory: Brownian motion on a grid plus a finite jump list.
#[derive(Clone, Debug)]
pub struct LevyPath {
    pub triplet: Arc<LevyTriplet>,
    pub grid: Arc<[f64]>,
    pub brownian: Arc<[f64]>,
    pub jumps: Vec<JumpRecord>,
    pub seed: u64,
}

/// Serialized form of a path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub seed: u64,
    pub grid: Vec<f64>,
    pub brownian: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
}

impl LevyPath {
    pub fn horizon(&self) -> f64 {
        self.triplet.horizon
    }

    pub fn record(&self) -> PathRecord {
        PathRecord {
            seed: self.seed,
            grid: self.grid.to_vec(),
            brownian: self.brownian.to_vec(),
            jumps: self.jumps.clone(),
        }
    }

    /// Builds a path from explicit data (jumps are sorted; times must be distinct).
    pub fn from_parts(
        triplet: Arc<LevyTriplet>,
        grid: Vec<f64>,
        brownian: Vec<f64>,
        mut jumps: Vec<JumpRecord>,
        seed: u64,
    ) -> Result<Self> {
        if grid.len() < 2 || grid.len() != brownian.len() {
            return Err(invalid(
                "grid",
                "need at least two nodes and one Brownian value per node",
            ));
        }
        if grid[0] != 0.0 || brownian[0] != 0.0 {
            return Err(invalid("grid", "grid must start at t = 0 with W(0) = 0"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid", "grid must be strictly increasing"));
        }
        let t = triplet.horizon;
        if (grid[grid.len() - 1] - t).abs() > 1e-12 * t {
            return Err(invalid("grid", "grid must end at the horizon"));
        }
        jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
        for j in &jumps {
            if !(j.time > 0.0 && j.time <= t) || j.size == 0.0 {
                return Err(invalid("jumps", format!("invalid jump {j:?}")));
            }
        }
        if jumps.windows(2).any(|w| w[0].time == w[1].time) {
            return Err(invalid("jumps", "jump times must be distinct"));
        }
        Ok(Self {
            triplet,
            grid: grid.into(),
            brownian: brownian.into(),
            jumps,
            seed,
        })
    }

    /// Brownian value at time `t`, linear between grid nodes.
    pub fn brownian_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        let i = match g.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return self.brownian[i],
            Err(i) => i,
        };
        if i == 0 {
            return self.brownian[0];
        }
        if i >= g.len() {
            return self.brownian[g.len() - 1];
        }
        let w = (t - g[i - 1]) / (g[i] - g[i - 1]);
        self.brownian[i - 1] * (1.0 - w) + self.brownian[i] * w
    }
}

/// Simulates one path with `grid_size` uniformly spaced nodes on `[0, T]`.
///
/// The jump count is Poisson(T·ν(ℝ₀)), the times are sorted uniforms and the
/// sizes are i.i.d. with law ν/ν(ℝ₀); Brownian increments come from an
/// independent stream of the same seed.
pub fn simulate_path(triplet: &Arc<LevyTriplet>, grid_size: usize, seed: u64) -> Result<LevyPath> {
    if grid_size < 2 {
        return Err(invalid("grid_size", "need at least two grid nodes"));
    }
    let rate = triplet.jump_rate()?;
    let t_end = triplet.horizon;
    let steps = grid_size - 1;
    let dt = t_end / steps as f64;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| if i == steps { t_end } else { i as f64 * dt })
        .collect();

    let mut rng = stream(seed, BROWNIAN_STREAM);
    let sd = dt.sqrt();
    let mut brownian = Vec::with_capacity(grid_size);
    let mut w = 0.0;
    brownian.push(0.0);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += sd * z;
        brownian.push(w);
    }

    let mut rng = stream(seed, JUMP_STREAM);
    let mean = rate * t_end;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| invalid("nu", e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut jumps = Vec::with_capacity(count);
    loop {
        jumps.clear();
        for _ in 0..count {
            // (1 - U) lies in (0, 1], so times land in (0, T].
            let time = t_end * (1.0 - rng.random::<f64>());
            let size = triplet.nu.sample_size(&mut rng)?;
            jumps.push(JumpRecord { time, size });
        }
        jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
        if jumps.windows(2).all(|w| w[0].time < w[1].time) {
            break;
        }
    }
    Ok(LevyPath {
        triplet: Arc::clone(triplet),
        grid: grid.into(),
        brownian: brownian.into(),
        jumps,
        seed,
    })
}

/// Keeps only the jumps whose size lies in `theta`; the Brownian part is shared.
pub fn restrict_jumps(path: &LevyPath, theta: &JumpSet) -> LevyPath {
    LevyPath {
        triplet: Arc::clone(&path.triplet),
        grid: Arc::clone(&path.grid),
        brownian: Arc::clone(&path.brownian),
        jumps: path
            .jumps
            .iter()
            .copied()
            .filter(|j| theta.contains_jump(j.size))
            .collect(),
        seed: path.seed,
    }
}

/// Number of jumps with size in `theta`.
pub fn count_jumps(path: &LevyPath, theta: &JumpSet) -> usize {
    path.jumps
        .iter()
        .filter(|j| theta.contains_jump(j.size))
        .count()
}

/// Value of the Lévy–Itô representation at time `t`.
///
/// Small jumps (|x| ≤ 1) are compensated by `t ∫_{|x|≤1} x ν(dx)` of the
/// simulated (finite) measure.
pub fn evaluate_x(path: &LevyPath, t: f64) -> Result<f64> {
    let tr = &path.triplet;
    if !(0.0..=tr.horizon).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            horizon: tr.horizon,
        });
    }
    let drift = tr.small_jump_drift.ok_or(Error::InfiniteMeasure)?;
    let jumps: f64 = path
        .jumps
        .iter()
        .filter(|j| j.time <= t)
        .map(|j| j.size)
        .sum();
    Ok(tr.gamma * t + tr.sigma * path.brownian_at(t) + jumps - t * drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::measure::Atom;

    fn poisson_triplet(t: f64) -> Arc<LevyTriplet> {
        Arc::new(LevyTriplet::new(0.0, 0.0, LevyMeasure::poisson(1.0).unwrap(), t).unwrap())
    }

    #[test]
    fn zero_measure_has_no_jumps() {
        let tr = Arc::new(LevyTriplet::new(0.0, 1.0, LevyMeasure::zero(), 1.0).unwrap());
        for s in 0..50 {
            assert!(simulate_path(&tr, 8, s).unwrap().jumps.is_empty());
        }
    }

    #[test]
    fn same_seed_same_path() {
        let tr =
            Arc::new(LevyTriplet::new(0.1, 1.0, LevyMeasure::poisson(3.0).unwrap(), 2.0).unwrap());
        let a = simulate_path(&tr, 33, 99).unwrap();
        let b = simulate_path(&tr, 33, 99).unwrap();
        assert_eq!(a.record(), b.record());
        let c = simulate_path(&tr, 33, 100).unwrap();
        assert_ne!(a.record(), c.record());
    }

    #[test]
    fn infinite_measure_requires_truncation() {
        let tr = Arc::new(
            LevyTriplet::new(0.0, 0.0, LevyMeasure::gamma_like(1.0, 1.0).unwrap(), 1.0).unwrap(),
        );
        assert!(matches!(
            simulate_path(&tr, 4, 1),
            Err(Error::InfiniteMeasure)
        ));
        let tt = Arc::new(tr.truncated(0.01).unwrap());
        assert!(tt.is_truncated_infinite());
        simulate_path(&tt, 4, 1).unwrap();
    }

    #[test]
    fn evaluate_x_hand_cases() {
        let tr = poisson_triplet(1.0);
        let jumps = vec![
            JumpRecord {
                time: 0.3,
                size: 1.0,
            },
            JumpRecord {
                time: 0.7,
                size: 1.0,
            },
        ];
        let p =
            LevyPath::from_parts(tr, vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 0.0], jumps, 0).unwrap();
        assert_eq!(evaluate_x(&p, 0.0).unwrap(), 0.0);
        assert!((evaluate_x(&p, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(evaluate_x(&p, 1.5).is_err());

        let drift = Arc::new(LevyTriplet::new(2.0, 0.0, LevyMeasure::zero(), 1.0).unwrap());
        let p = simulate_path(&drift, 5, 3).unwrap();
        assert!((evaluate_x(&p, 0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn large_jumps_are_not_compensated() {
        let nu = LevyMeasure::discrete(vec![Atom {
            size: 3.0,
            mass: 2.0,
        }])
        .unwrap();
        let tr = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0).unwrap());
        let p = LevyPath::from_parts(
            tr,
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            vec![JumpRecord {
                time: 0.2,
                size: 3.0,
            }],
            0,
        )
        .unwrap();
        assert_eq!(evaluate_x(&p, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn restriction_filters_and_composes() {
        let nu = LevyMeasure::two_sided_exponential(2.0, 0.5, 2.0, 0.5, 0.05, 6.0).unwrap();
        let tr = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0).unwrap());
        let a = JumpSet::annulus(0.2, 3.0).unwrap();
        let b = JumpSet::annulus(1.0, 5.0).unwrap();
        for s in 0..200 {
            let p = simulate_path(&tr, 2, s).unwrap();
            let ab = restrict_jumps(&p, &a.intersect(&b));
            let seq = restrict_jumps(&restrict_jumps(&p, &a), &b);
            assert_eq!(ab.jumps, seq.jumps);
            assert_eq!(restrict_jumps(&p, &JumpSet::nonzero()).jumps, p.jumps);
            assert!(restrict_jumps(&p, &JumpSet::annulus(10.0, 20.0).unwrap())
                .jumps
                .is_empty());
            assert_eq!(count_jumps(&p, &a), restrict_jumps(&p, &a).jumps.len());
        }
    }
}
