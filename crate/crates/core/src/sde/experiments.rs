use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::diffusion::{solve_diffusion, stopping_time_s, DiffusionSDE};
use super::jump::{
    last_jump_weight, local_weight, monotone_weight, AdditiveJumpSDE, JumpSde, Monotonicity,
    MultiplicativeJumpSDE,
};
use crate::error::{invalid, Error, Result};
use crate::levy::{restrict_jumps, simulate_path, JumpSet, LevyPath, LevyTriplet};
use crate::malliavin::{abs_continuity_indicator, l2_norm_sq, DerivativeProcess};
use crate::mc::{Estimate, MCConfig};

/// Per grid time: the bound sample, plus the positivity flag and excess when the event check applies.
type LocalSample = Vec<(f64, Option<(bool, f64)>)>;

/// One CSV row per simulated path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub seed: u64,
    pub n_jumps: usize,
    pub z_t: f64,
    pub norm_sq: f64,
    pub indicator: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneDriftReport {
    pub n_paths: usize,
    pub n_with_jump: usize,
    pub n_positive: usize,
    /// `n_positive / n_with_jump`; `NaN` when no path jumped.
    pub fraction_positive_given_jump: f64,
    /// Smallest `‖DZ_T‖²` over paths with a jump.
    pub min_norm: f64,
    /// Every step coefficient on every jump was strictly positive.
    pub all_coefficients_positive: bool,
    #[serde(skip)]
    pub rows: Vec<PathRow>,
}

/// Positivity of `‖D Z_T‖²` on `{N_T ≥ 1}` with the monotone weight.
pub fn monotone_drift_experiment(
    sde: &AdditiveJumpSDE,
    direction: Monotonicity,
    triplet: &Arc<LevyTriplet>,
    mc: &MCConfig,
    criterion_tol: f64,
) -> Result<MonotoneDriftReport> {
    let k = monotone_weight(sde.h.clone(), direction);
    let rows = mc
        .map(|_, seed| -> Result<(PathRow, bool)> {
            let path = simulate_path(triplet, 2, seed)?;
            let traj = sde.solve(&path);
            let d = sde.derivative_of(&traj, &k);
            let positive = d.steps().iter().all(|s| s.coeff > 0.0);
            Ok((row(&path, traj.terminal, &d, criterion_tol), positive))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let jumped: Vec<&(PathRow, bool)> = rows.iter().filter(|(r, _)| r.n_jumps > 0).collect();
    let n_positive = jumped.iter().filter(|(r, _)| r.indicator).count();
    Ok(MonotoneDriftReport {
        n_paths: mc.n_paths,
        n_with_jump: jumped.len(),
        n_positive,
        fraction_positive_given_jump: if jumped.is_empty() {
            f64::NAN
        } else {
            n_positive as f64 / jumped.len() as f64
        },
        min_norm: jumped
            .iter()
            .map(|(r, _)| r.norm_sq)
            .fold(f64::INFINITY, f64::min),
        all_coefficients_positive: jumped.iter().all(|(_, p)| *p),
        rows: rows.into_iter().map(|(r, _)| r).collect(),
    })
}

fn row(path: &LevyPath, z_t: f64, d: &DerivativeProcess, tol: f64) -> PathRow {
    PathRow {
        seed: path.seed,
        n_jumps: path.jumps.len(),
        z_t,
        norm_sq: l2_norm_sq(d),
        indicator: abs_continuity_indicator(d, tol),
    }
}

/// Parameters of the neighborhood experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMonotoneSpec {
    /// Radius of the neighborhood of `x0` on which `f` is monotone.
    pub epsilon: f64,
    /// `sup |f'|`.
    pub m_bound: f64,
    /// Simulation truncation of ν.
    pub truncation: f64,
    pub t_grid: Vec<f64>,
    pub direction: Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMonotoneRow {
    pub t: f64,
    /// Empirical `P(A_t)`, `A_t = {e^{MT} Σ_{T_j≤t} |h(ΔX_j)| > ε/2}`.
    pub p_empirical: Estimate,
    pub markov_bound: f64,
    /// Paths in `A_tᶜ` with a jump before `t`.
    pub n_checked: usize,
    pub n_positive: usize,
    /// Largest `|Z_s - x0|` seen on checked paths, jump points and `t` included.
    pub max_excursion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMonotoneReport {
    pub rows: Vec<LocalMonotoneRow>,
    pub h_l1: f64,
    pub h_l2: f64,
}

/// `(8 e^{2MT} / ε²) t (∫h² dν + T (∫|h| dν)²)`.
pub fn markov_bound(epsilon: f64, m_bound: f64, horizon: f64, t: f64, h_l1: f64, h_l2: f64) -> f64 {
    8.0 * (2.0 * m_bound * horizon).exp() / (epsilon * epsilon) * t * (h_l2 + horizon * h_l1 * h_l1)
}

/// For each `t`: empirical `P(A_t)` against the Markov bound, and the
/// criterion with the weight supported on `[0, t)` on `A_tᶜ`.
pub fn local_monotone_experiment(
    sde: &AdditiveJumpSDE,
    triplet: &Arc<LevyTriplet>,
    spec: &LocalMonotoneSpec,
    mc: &MCConfig,
    criterion_tol: f64,
) -> Result<LocalMonotoneReport> {
    if !(spec.epsilon > 0.0 && spec.m_bound >= 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let tt = triplet.horizon;
    if spec.t_grid.iter().any(|&t| !(t > 0.0 && t <= tt)) {
        return Err(invalid("t_grid", "points must lie in (0, T]"));
    }
    let h = sde.h.clone();
    let h_l1 = triplet.nu.integrate(|y| h(y).abs(), 1e-12)?;
    let h_l2 = triplet.nu.integrate(|y| h(y).powi(2), 1e-12)?;
    let sim = Arc::new(if triplet.nu.is_finite() {
        (**triplet).clone()
    } else {
        triplet.truncated(spec.truncation)?
    });
    let growth = (spec.m_bound * tt).exp();
    let flow = sde.flow(tt);

    let per_path = mc
        .map(|_, seed| -> Result<LocalSample> {
            let path = simulate_path(&sim, 2, seed)?;
            let traj = sde.solve(&path);
            let mut out = Vec::with_capacity(spec.t_grid.len());
            for &t in &spec.t_grid {
                let before = path.jumps.iter().take_while(|j| j.time <= t);
                let mass: f64 = before.clone().map(|j| h(j.size).abs()).sum();
                let in_a = growth * mass > 0.5 * spec.epsilon;
                let check = if !in_a && path.jumps.first().is_some_and(|j| j.time < t) {
                    let d = sde.derivative_of(&traj, &local_weight(h.clone(), t, spec.direction));
                    let n = before.count();
                    let mut exc = flow.phi(
                        if n == 0 { 0.0 } else { path.jumps[n - 1].time },
                        if n == 0 { sde.x0 } else { traj.post[n - 1] },
                        t,
                    );
                    exc = (exc - sde.x0).abs();
                    for i in 0..n {
                        exc = exc
                            .max((traj.pre[i] - sde.x0).abs())
                            .max((traj.post[i] - sde.x0).abs());
                    }
                    Some((abs_continuity_indicator(&d, criterion_tol), exc))
                } else {
                    None
                };
                out.push((if in_a { 1.0 } else { 0.0 }, check));
            }
            Ok(out)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let rows = spec
        .t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let hits: Vec<f64> = per_path.iter().map(|p| p[i].0).collect();
            let checks: Vec<(bool, f64)> = per_path.iter().filter_map(|p| p[i].1).collect();
            LocalMonotoneRow {
                t,
                p_empirical: Estimate::from_samples(&hits),
                markov_bound: markov_bound(spec.epsilon, spec.m_bound, tt, t, h_l1, h_l2),
                n_checked: checks.len(),
                n_positive: checks.iter().filter(|c| c.0).count(),
                max_excursion: checks.iter().map(|c| c.1).fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(LocalMonotoneReport { rows, h_l1, h_l2 })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpCountClass {
    pub n_paths: usize,
    pub n_single_term: usize,
    pub n_positive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WronskianReport {
    pub n_paths: usize,
    /// Paths with `N_T = 0`, left out of the check.
    pub n_excluded: usize,
    pub n_checked: usize,
    pub n_single_term: usize,
    pub n_positive: usize,
    /// Largest relative gap between the surviving coefficient and the
    /// single-jump formula.
    pub max_formula_gap: f64,
    /// Number of points of the rational grid for `p`.
    pub p_grid_size: usize,
    pub by_jump_count: BTreeMap<usize, JumpCountClass>,
    #[serde(skip)]
    pub rows: Vec<PathRow>,
}

/// Grid for `p`: midpoints of consecutive order statistics of `{0} ∪ {all jump times}`.
pub fn p_grid(paths: &[LevyPath]) -> Vec<f64> {
    let mut times: Vec<f64> = std::iter::once(0.0)
        .chain(paths.iter().flat_map(|p| p.jumps.iter().map(|j| j.time)))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// On `A_{p,n} = {N_T = n, T_{n-1} ≤ p < T_n}` the weight `(s-p)² 1_{s>p}`
/// leaves only the last jump in `D Z_T`. Each path takes the smallest grid
/// point above `T_{n-1}`, which keeps `T_n - p` as large as the grid allows.
pub fn wronskian_experiment(
    sde: &MultiplicativeJumpSDE,
    triplet: &Arc<LevyTriplet>,
    mc: &MCConfig,
    criterion_tol: f64,
) -> Result<WronskianReport> {
    if !triplet.nu.is_finite() {
        return Err(Error::InfiniteMeasure);
    }
    let tt = triplet.horizon;
    let paths = mc
        .map(|_, seed| simulate_path(triplet, 2, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let grid = p_grid(&paths);
    let f = &*sde.f;
    let results: Vec<(PathRow, Option<(bool, f64)>)> = {
        use rayon::prelude::*;
        paths
            .par_iter()
            .map(|path| {
                let traj = sde.solve(path);
                let n = path.jumps.len();
                if n == 0 {
                    let d = DerivativeProcess::zero(tt);
                    return (row(path, traj.terminal, &d, criterion_tol), None);
                }
                let last = path.jumps[n - 1];
                let prev = if n > 1 { path.jumps[n - 2].time } else { 0.0 };
                let p = grid[grid.partition_point(|&q| q < prev)];
                let k = last_jump_weight(p, tt);
                let d = sde.derivative_of(&traj, &k);
                let i = n - 1;
                let expected = traj.tail_log(i).exp()
                    * k.value(last.time, last.size)
                    * (f(traj.pre[i]) - f(traj.post[i])
                        + f(traj.pre[i]) * (sde.h)(last.size) * (sde.dg)(traj.pre[i]));
                let single = d.active_steps() == 1
                    && d.steps()
                        .last()
                        .is_some_and(|s| s.time == last.time && s.coeff != 0.0);
                let got = d.steps().last().map_or(0.0, |s| s.coeff);
                let gap = (got - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
                (
                    row(path, traj.terminal, &d, criterion_tol),
                    Some((single, gap)),
                )
            })
            .collect()
    };
    let mut by_n: BTreeMap<usize, JumpCountClass> = BTreeMap::new();
    let mut report = WronskianReport {
        n_paths: mc.n_paths,
        n_excluded: 0,
        n_checked: 0,
        n_single_term: 0,
        n_positive: 0,
        max_formula_gap: 0.0,
        p_grid_size: grid.len(),
        by_jump_count: BTreeMap::new(),
        rows: Vec::with_capacity(results.len()),
    };
    for (r, check) in results {
        match check {
            None => report.n_excluded += 1,
            Some((single, gap)) => {
                report.n_checked += 1;
                let class = by_n.entry(r.n_jumps).or_default();
                class.n_paths += 1;
                if single {
                    report.n_single_term += 1;
                    class.n_single_term += 1;
                }
                if r.indicator {
                    report.n_positive += 1;
                    class.n_positive += 1;
                }
                report.max_formula_gap = report.max_formula_gap.max(gap);
            }
        }
        report.rows.push(r);
    }
    report.by_jump_count = by_n;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub level: f64,
    /// `E|Z^{(m)}_T - Z^{(m')}_T|²`.
    pub mse: Estimate,
    /// Paired difference with the next finer level.
    pub drop_to_next: Option<Estimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub reference_level: f64,
    pub rows: Vec<TruncationRow>,
    /// Each drop to the next level exceeds three standard errors.
    pub strictly_decreasing: bool,
}

/// `Θ_m = {1/m < |x| < m}`.
pub fn truncation_set(m: f64) -> Result<JumpSet> {
    if !(m > 1.0) {
        return Err(invalid("level", "truncation levels must exceed 1"));
    }
    JumpSet::annulus(1.0 / m, m)
}

/// Couples every level by restricting one path simulated at the reference level.
pub fn truncation_convergence_report(
    sde: &AdditiveJumpSDE,
    triplet: &Arc<LevyTriplet>,
    levels: &[f64],
    reference: f64,
    mc: &MCConfig,
) -> Result<TruncationReport> {
    let mut levels = levels.to_vec();
    levels.sort_by(f64::total_cmp);
    if levels.iter().any(|&m| m > reference) {
        return Err(invalid(
            "levels",
            "levels may not exceed the reference level",
        ));
    }
    let reference_set = truncation_set(reference)?;
    let sets = levels
        .iter()
        .map(|&m| truncation_set(m))
        .collect::<Result<Vec<_>>>()?;
    let sim = Arc::new(if triplet.nu.is_finite() {
        (**triplet).clone()
    } else {
        triplet.truncated(1.0 / reference)?
    });
    let errs = mc
        .map(|_, seed| -> Result<Vec<f64>> {
            let path = restrict_jumps(&simulate_path(&sim, 2, seed)?, &reference_set);
            let z_ref = sde.solve(&path).terminal;
            Ok(sets
                .iter()
                .map(|s| (sde.solve(&restrict_jumps(&path, s)).terminal - z_ref).powi(2))
                .collect())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let column = |i: usize| errs.iter().map(|e| e[i]).collect::<Vec<f64>>();
    let mut strictly = true;
    let rows = (0..levels.len())
        .map(|i| {
            let drop = (i + 1 < levels.len()).then(|| {
                let d: Vec<f64> = errs.iter().map(|e| e[i] - e[i + 1]).collect();
                Estimate::from_samples(&d)
            });
            if let Some(d) = drop {
                strictly &= d.mean > 3.0 * d.stderr && d.mean > 0.0;
            }
            TruncationRow {
                level: levels[i],
                mse: Estimate::from_samples(&column(i)),
                drop_to_next: drop,
            }
        })
        .collect();
    Ok(TruncationReport {
        reference_level: reference,
        rows,
        strictly_decreasing: strictly,
    })
}

/// Any of the three equations.
#[derive(Clone, Debug)]
pub enum SdeModel {
    Diffusion(DiffusionSDE),
    Additive(AdditiveJumpSDE),
    Multiplicative(MultiplicativeJumpSDE),
}

/// Event conditioned on in [`density_experiment`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    All,
    NoJumps,
    AtLeastOneJump,
    /// `{S < T}`, diffusion only.
    SBeforeHorizon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n_paths: usize,
    pub n_conditioned: usize,
    /// Largest exact-tie multiplicity divided by the conditioned sample size.
    pub atom_statistic: f64,
    pub histogram: Histogram,
    pub kde_points: Vec<f64>,
    pub kde_values: Vec<f64>,
    pub bandwidth: f64,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

pub const HISTOGRAM_BINS: usize = 40;
pub const KDE_POINTS: usize = 101;

/// Simulates `Z_T`, keeps the paths in the conditioning event and summarizes the sample.
pub fn density_experiment(
    model: &SdeModel,
    triplet: &Arc<LevyTriplet>,
    grid_size: usize,
    mc: &MCConfig,
    conditioning: Conditioning,
) -> Result<DensityReport> {
    if conditioning == Conditioning::SBeforeHorizon && !matches!(model, SdeModel::Diffusion(_)) {
        return Err(invalid(
            "conditioning",
            "{S < T} applies to the diffusion equation only",
        ));
    }
    let values = mc
        .map(|_, seed| -> Result<Option<f64>> {
            let path = simulate_path(triplet, grid_size, seed)?;
            let n = path.jumps.len();
            let keep_jumps = match conditioning {
                Conditioning::NoJumps => n == 0,
                Conditioning::AtLeastOneJump => n > 0,
                _ => true,
            };
            if !keep_jumps {
                return Ok(None);
            }
            Ok(match model {
                SdeModel::Diffusion(sde) => {
                    let traj = solve_diffusion(&path, sde);
                    let keep = conditioning != Conditioning::SBeforeHorizon
                        || stopping_time_s(&traj, sde) < path.horizon();
                    keep.then(|| traj.terminal())
                }
                SdeModel::Additive(sde) => Some(sde.solve(&path).terminal),
                SdeModel::Multiplicative(sde) => Some(sde.solve(&path).terminal),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<f64> = values.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::Validation("conditioned sample is empty".into()));
    }
    let n = samples.len();
    let atom_statistic = max_tie(&samples) as f64 / n as f64;
    let (histogram, bandwidth, kde_points, kde_values) = summarize(&samples);
    Ok(DensityReport {
        n_paths: mc.n_paths,
        n_conditioned: n,
        atom_statistic,
        histogram,
        kde_points,
        kde_values,
        bandwidth,
        samples,
    })
}

fn max_tie(xs: &[f64]) -> usize {
    let mut counts: HashMap<u64, usize> = HashMap::with_capacity(xs.len());
    for x in xs {
        // +0.0 and -0.0 are the same value.
        *counts.entry((x + 0.0).to_bits()).or_default() += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

/// Histogram, Silverman bandwidth and Gaussian KDE on a uniform grid.
fn summarize(xs: &[f64]) -> (Histogram, f64, Vec<f64>, Vec<f64>) {
    let n = xs.len() as f64;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let est = Estimate::from_samples(xs);
    let sd = est.stderr * n.sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((p * (sorted.len() - 1) as f64).round()) as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let bandwidth = if spread > 0.0 {
        0.9 * spread * n.powf(-0.2)
    } else {
        0.0
    };

    let width = hi - lo;
    let (edges, counts) = if width > 0.0 {
        let edges: Vec<f64> = (0..=HISTOGRAM_BINS)
            .map(|i| lo + width * i as f64 / HISTOGRAM_BINS as f64)
            .collect();
        let mut counts = vec![0; HISTOGRAM_BINS];
        for x in xs {
            let b = (((x - lo) / width) * HISTOGRAM_BINS as f64) as usize;
            counts[b.min(HISTOGRAM_BINS - 1)] += 1;
        }
        (edges, counts)
    } else {
        (vec![lo, hi], vec![xs.len()])
    };

    if bandwidth == 0.0 {
        return (
            Histogram { edges, counts },
            0.0,
            vec![lo],
            vec![f64::INFINITY],
        );
    }
    let (a, b) = (lo - 3.0 * bandwidth, hi + 3.0 * bandwidth);
    let points: Vec<f64> = (0..KDE_POINTS)
        .map(|i| a + (b - a) * i as f64 / (KDE_POINTS - 1) as f64)
        .collect();
    let norm = 1.0 / (n * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    let values = points
        .iter()
        .map(|&p| {
            norm * xs
                .iter()
                .map(|x| (-0.5 * ((p - x) / bandwidth).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    (Histogram { edges, counts }, bandwidth, points, values)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::func::fn1;
    use crate::levy::{Atom, LevyMeasure};
    use crate::sde::jump::SupBounds;

    fn increasing() -> AdditiveJumpSDE {
        AdditiveJumpSDE::new(
            |z| z + z.tanh(),
            |z| 1.0 + 1.0 / z.cosh().powi(2),
            |y| y,
            0.2,
        )
        .with_ode_steps(256)
    }

    fn finite() -> Arc<LevyTriplet> {
        Arc::new(
            LevyTriplet::new(
                0.0,
                0.0,
                LevyMeasure::two_sided_exponential(1.0, 1.5, 1.0, 1.5, 0.05, 6.0).unwrap(),
                1.0,
            )
            .unwrap(),
        )
    }

    #[test]
    fn monotone_fraction_is_one() {
        let r = monotone_drift_experiment(
            &increasing(),
            Monotonicity::Increasing,
            &finite(),
            &MCConfig::new(400, 3),
            1e-12,
        )
        .unwrap();
        assert!(r.n_with_jump > 0 && r.n_with_jump < 400);
        assert_eq!(r.fraction_positive_given_jump, 1.0);
        assert!(r.all_coefficients_positive);
        assert!(r.min_norm > 0.0);
    }

    #[test]
    fn constant_drift_fraction_is_zero() {
        let sde = AdditiveJumpSDE::new(|_| 1.0, |_| 0.0, |y| y, 0.0).with_ode_steps(16);
        let r = monotone_drift_experiment(
            &sde,
            Monotonicity::Increasing,
            &finite(),
            &MCConfig::new(100, 1),
            1e-12,
        )
        .unwrap();
        assert_eq!(r.fraction_positive_given_jump, 0.0);
    }

    #[test]
    fn markov_bound_is_linear_in_t() {
        assert_abs_diff_eq!(
            markov_bound(0.5, 1.0, 1.0, 0.2, 1.0, 2.0),
            8.0 * 2f64.exp() / 0.25 * 0.2 * 3.0,
            epsilon = 1e-12
        );
        assert_eq!(markov_bound(0.5, 1.0, 1.0, 0.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn local_monotone_small_run() {
        let sde = AdditiveJumpSDE::new(
            |z| z * (-0.5 * z * z).exp(),
            |z| (1.0 - z * z) * (-0.5 * z * z).exp(),
            |y| y,
            0.0,
        )
        .with_ode_steps(128);
        let tr = Arc::new(
            LevyTriplet::new(0.0, 0.0, LevyMeasure::gamma_like(0.02, 1.0).unwrap(), 1.0).unwrap(),
        );
        let spec = LocalMonotoneSpec {
            epsilon: 0.9,
            m_bound: 1.0,
            truncation: 1e-4,
            t_grid: vec![0.25, 0.5, 1.0],
            direction: Monotonicity::Increasing,
        };
        let r = local_monotone_experiment(&sde, &tr, &spec, &MCConfig::new(300, 2), 1e-12).unwrap();
        assert_abs_diff_eq!(r.h_l1, 0.02, epsilon = 1e-9);
        for row in &r.rows {
            assert!(row.p_empirical.mean <= row.markov_bound + 3.0 * row.p_empirical.stderr);
            assert_eq!(row.n_positive, row.n_checked);
            assert!(row.max_excursion < spec.epsilon);
        }
        assert!(r.rows.iter().any(|row| row.n_checked > 0));
    }

    fn wronskian_pair() -> MultiplicativeJumpSDE {
        MultiplicativeJumpSDE::new(
            fn1(|z| 0.5 * z.cos()),
            fn1(|z| -0.5 * z.sin()),
            fn1(|z| -0.5 * z.cos()),
            fn1(|z| z.sin()),
            fn1(|z| z.cos()),
            fn1(|y| y),
            0.3,
            SupBounds {
                f2: 0.5,
                h: 0.6,
                g: 1.0,
            },
        )
        .with_ode_steps(256)
    }

    #[test]
    fn wronskian_single_terms() {
        let tr = Arc::new(
            LevyTriplet::new(
                0.0,
                0.0,
                LevyMeasure::discrete(vec![
                    Atom {
                        size: 0.6,
                        mass: 1.0,
                    },
                    Atom {
                        size: -0.4,
                        mass: 1.0,
                    },
                ])
                .unwrap(),
                1.0,
            )
            .unwrap(),
        );
        let r =
            wronskian_experiment(&wronskian_pair(), &tr, &MCConfig::new(300, 5), 1e-12).unwrap();
        assert_eq!(r.n_checked + r.n_excluded, 300);
        assert!(r.n_excluded > 0);
        assert_eq!(r.n_single_term, r.n_checked);
        assert_eq!(r.n_positive, r.n_checked);
        assert!(r.max_formula_gap < 1e-12, "{}", r.max_formula_gap);
        assert!(r.by_jump_count.keys().any(|&n| n >= 3));
    }

    #[test]
    fn p_grid_separates_last_jump() {
        let tr = finite();
        let paths: Vec<LevyPath> = (0..50).map(|s| simulate_path(&tr, 2, s).unwrap()).collect();
        let grid = p_grid(&paths);
        for p in &paths {
            if let Some(last) = p.jumps.last() {
                let prev = if p.jumps.len() > 1 {
                    p.jumps[p.jumps.len() - 2].time
                } else {
                    0.0
                };
                let chosen = grid[grid.partition_point(|&q| q < prev)];
                assert!(prev <= chosen && chosen < last.time);
            }
        }
    }

    #[test]
    fn truncation_finite_measure_saturates() {
        let r = truncation_convergence_report(
            &increasing(),
            &finite(),
            &[25.0, 30.0],
            40.0,
            &MCConfig::new(50, 1),
        )
        .unwrap();
        for row in &r.rows {
            assert_eq!(row.mse.mean, 0.0);
        }
        let same = truncation_convergence_report(
            &increasing(),
            &finite(),
            &[2.5],
            2.5,
            &MCConfig::new(20, 1),
        )
        .unwrap();
        assert_eq!(same.rows[0].mse.mean, 0.0);
    }

    #[test]
    fn density_atoms() {
        let sde = SdeModel::Additive(increasing());
        let tr = finite();
        let none = density_experiment(&sde, &tr, 2, &MCConfig::new(400, 9), Conditioning::NoJumps)
            .unwrap();
        assert_eq!(none.atom_statistic, 1.0);
        let some = density_experiment(
            &sde,
            &tr,
            2,
            &MCConfig::new(400, 9),
            Conditioning::AtLeastOneJump,
        )
        .unwrap();
        assert!(some.atom_statistic <= 2.0 / 400.0);
        assert_eq!(
            some.histogram.counts.iter().sum::<usize>(),
            some.n_conditioned
        );
        let diff = SdeModel::Diffusion(DiffusionSDE::new(
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
            |_| 1.0,
            0.0,
        ));
        let empty = density_experiment(
            &diff,
            &tr,
            5,
            &MCConfig::new(50, 1),
            Conditioning::SBeforeHorizon,
        );
        assert!(empty.is_err());
    }
}
