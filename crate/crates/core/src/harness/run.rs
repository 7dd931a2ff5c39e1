use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde_json::json;

use super::config::{ConfigError, ExperimentConfig, ExperimentKind};
use super::presets::{
    build_model, build_triplet, default_model, default_triplet, BuiltModel, DerivativeModel,
    DualityModel, EquationModel, Family, FubiniFn,
};
use super::report::{Metric, RunReport};
use crate::chaos::{
    check_theta, moment_bound_check, product_identity_residual, Extension, SimplexIntegrand,
};
use crate::error::{invalid, Result};
use crate::levy::{simulate_path, JumpRecord, JumpSet, LevyTriplet};
use crate::malliavin::{
    derivative_jump_functional, duality_residual, finite_difference_check, orthogonality_residual,
    product_duality_residual, Orthogonality,
};
use crate::mc::{Estimate, MCConfig};
use crate::random_measure::fubini_residual;
use crate::rng::{path_seed, stream, USER_STREAM};
use crate::sde::{
    density_experiment, local_monotone_experiment, monotone_drift_experiment, reachable_range,
    truncation_convergence_report, wronskian_condition, wronskian_experiment, Conditioning,
    LocalMonotoneSpec, Monotonicity, SdeModel,
};

/// Default pass thresholds per kind.
const DUALITY_Z: f64 = 3.0;
const PRODUCT_TOL: f64 = 1e-10;
const FUBINI_TOL: f64 = 1e-9;
const DERIVATIVE_TOL: f64 = 1e-6;
const MOMENT_SLACK: f64 = 3.0;
const ORTHOGONALITY_TOL: f64 = 1e-12;
const WRONSKIAN_GAP_TOL: f64 = 1e-10;

/// A config with presets resolved, ready to run.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub triplet: Arc<LevyTriplet>,
    pub model: BuiltModel,
}

/// Fills in default presets, builds and validates them. Every failure here is
/// a configuration error.
pub fn prepare(config: &ExperimentConfig) -> std::result::Result<Prepared, ConfigError> {
    config.check()?;
    let mut config = config.clone();
    let kind = config.kind;
    let model_spec = config
        .model
        .get_or_insert_with(|| default_model(kind))
        .clone();
    if config.triplet.is_none() {
        config.triplet = Some(default_triplet(kind, &model_spec.preset)?);
    }
    let triplet = build_triplet(config.triplet.as_ref().unwrap())?;
    let ode_steps = config.numeric.ode_steps(triplet.horizon);
    let model = build_model(kind, &model_spec, &triplet, ode_steps)?;
    validate_model(&model, &triplet).map_err(|e| ConfigError::field("model", e))?;
    check_kind_params(&config, &triplet)?;
    Ok(Prepared {
        config,
        triplet,
        model,
    })
}

fn validate_model(model: &BuiltModel, triplet: &LevyTriplet) -> Result<()> {
    match model {
        BuiltModel::Duality(d) => {
            d.f.validate(triplet)?;
            if let Some(g) = &d.second {
                g.validate(triplet)?;
            }
            d.k.validate(triplet)
        }
        BuiltModel::Derivative(d) => d.k.validate(triplet),
        BuiltModel::Equation(e) => match &e.model {
            SdeModel::Additive(s) => s.validate(triplet),
            SdeModel::Multiplicative(s) => s.validate(triplet),
            SdeModel::Diffusion(s) => s.validate(),
        },
        BuiltModel::Chaos { .. } | BuiltModel::Fubini(_) => Ok(()),
    }
}

fn check_kind_params(
    config: &ExperimentConfig,
    triplet: &LevyTriplet,
) -> std::result::Result<(), ConfigError> {
    let e = &config.experiment;
    if let (Some(lo), Some(hi)) = (e.theta_lo, e.theta_hi) {
        if !(0.0 <= lo && lo < hi) {
            return Err(ConfigError::field(
                "experiment.theta_lo",
                "need 0 ≤ theta_lo < theta_hi",
            ));
        }
    }
    if let Some(levels) = &e.levels {
        if levels.is_empty() || levels.iter().any(|m| !(*m > 1.0)) {
            return Err(ConfigError::field(
                "experiment.levels",
                "levels must exceed 1",
            ));
        }
        let reference = e.reference_level.unwrap_or(DEFAULT_REFERENCE);
        if levels.iter().any(|m| *m > reference) {
            return Err(ConfigError::field(
                "experiment.levels",
                "levels may not exceed the reference level",
            ));
        }
    }
    if let Some(ts) = &e.t_grid {
        if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && *t <= triplet.horizon)) {
            return Err(ConfigError::field(
                "experiment.t_grid",
                "times must lie in (0, T]",
            ));
        }
    }
    if e.conditioning == Some(Conditioning::SBeforeHorizon)
        && config.kind == ExperimentKind::Density
    {
        let diffusion = config
            .model
            .as_ref()
            .is_some_and(|m| ["ou-jump", "gated-diffusion"].contains(&m.preset.as_str()));
        if !diffusion {
            return Err(ConfigError::field(
                "experiment.conditioning",
                "s-before-horizon needs a diffusion preset",
            ));
        }
    }
    Ok(())
}

/// Resolves and runs a config. Numerical errors end up in the report.
pub fn run(config: &ExperimentConfig) -> std::result::Result<RunReport, ConfigError> {
    let prepared = prepare(config)?;
    Ok(run_prepared(&prepared))
}

pub fn run_prepared(p: &Prepared) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(p.config.clone());
    match dispatch(p, &mut report) {
        Ok(()) => report.pass = !report.metrics.is_empty() && report.metrics.iter().all(|m| m.pass),
        Err(e) => {
            report.pass = false;
            report.failure = Some(e.to_string());
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    report
}

fn dispatch(p: &Prepared, report: &mut RunReport) -> Result<()> {
    let cfg = &p.config;
    let mc = MCConfig::new(cfg.mc.n_paths, cfg.mc.base_seed);
    let tr = &p.triplet;
    match (&p.model, cfg.kind) {
        (BuiltModel::Duality(d), ExperimentKind::Duality) => run_duality(cfg, &mc, tr, d, report),
        (BuiltModel::Chaos { family, phi_1 }, ExperimentKind::ProductFormula) => {
            run_product(cfg, &mc, tr, family, phi_1, report)
        }
        (BuiltModel::Chaos { family, .. }, ExperimentKind::MomentBound) => {
            run_moment(cfg, &mc, tr, family, report)
        }
        (BuiltModel::Fubini(f), ExperimentKind::Fubini) => run_fubini(cfg, &mc, tr, f, report),
        (BuiltModel::Derivative(d), ExperimentKind::DerivativeCheck) => {
            run_derivative(cfg, &mc, tr, d, report)
        }
        (BuiltModel::Equation(e), kind) => run_equation(cfg, &mc, tr, e, kind, report),
        _ => unreachable!("presets are matched to kinds in prepare"),
    }
}

fn theta_of(cfg: &ExperimentConfig) -> Result<JumpSet> {
    match (cfg.experiment.theta_lo, cfg.experiment.theta_hi) {
        (None, None) => Ok(JumpSet::nonzero()),
        (lo, hi) => JumpSet::annulus(lo.unwrap_or(0.0), hi.unwrap_or(f64::INFINITY)),
    }
}

fn threshold(cfg: &ExperimentConfig, default: f64) -> f64 {
    cfg.experiment.threshold.unwrap_or(default)
}

fn run_duality(
    cfg: &ExperimentConfig,
    mc: &MCConfig,
    tr: &Arc<LevyTriplet>,
    d: &DualityModel,
    report: &mut RunReport,
) -> Result<()> {
    let grid = cfg.numeric.grid_size;
    let r = match &d.second {
        Some(g_fn) => product_duality_residual(mc, tr, grid, &d.f, g_fn, &d.g, &d.lambda, &d.k)?,
        None => duality_residual(mc, tr, grid, &d.f, &d.g, &d.lambda, &d.k)?,
    };
    report.metrics.push(
        Metric::le("z_score", r.z_score, threshold(cfg, DUALITY_Z)).with_stderr(r.stderr_diff),
    );
    report.details = serde_json::to_value(r).unwrap();
    Ok(())
}

fn run_product(
    cfg: &ExperimentConfig,
    mc: &MCConfig,
    tr: &Arc<LevyTriplet>,
    family: &Family,
    phi_1: &SimplexIntegrand,
    report: &mut RunReport,
) -> Result<()> {
    let theta = theta_of(cfg)?;
    check_theta(tr, &theta)?;
    let orders = cfg
        .experiment
        .orders
        .clone()
        .unwrap_or_else(|| vec![1, 2, 3, 4]);
    let tol = threshold(cfg, PRODUCT_TOL);
    let per_path = mc
        .map(|_, seed| -> Result<(usize, Vec<f64>)> {
            let path = simulate_path(tr, 2, seed)?;
            let res = orders
                .iter()
                .map(|&n| {
                    Ok(product_identity_residual(&path, &theta, &family(n), phi_1)?.relative())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((path.jumps.len(), res))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut worst = Vec::new();
    for (i, &n) in orders.iter().enumerate() {
        let m = per_path.iter().map(|(_, r)| r[i]).fold(0.0f64, f64::max);
        report
            .metrics
            .push(Metric::le(format!("max_relative_residual_n{n}"), m, tol));
        worst.push(m);
    }
    let counts: Vec<f64> = per_path.iter().map(|(c, _)| *c as f64).collect();
    let lambda = tr.nu.mass_on(&theta, 1e-12)? * tr.horizon;
    report.details = json!({
        "orders": orders,
        "max_relative_residual": worst,
        "expected_jumps": lambda,
        "mean_jumps": Estimate::from_samples(&counts),
    });
    Ok(())
}

fn run_moment(
    cfg: &ExperimentConfig,
    mc: &MCConfig,
    tr: &Arc<LevyTriplet>,
    family: &Family,
    report: &mut RunReport,
) -> Result<()> {
    let theta = theta_of(cfg)?;
    let orders = cfg
        .experiment
        .orders
        .clone()
        .unwrap_or_else(|| vec![1, 2, 3]);
    let powers = cfg
        .experiment
        .powers
        .clone()
        .unwrap_or_else(|| vec![2.0, 3.0, 4.0]);
    let slack = threshold(cfg, MOMENT_SLACK);
    let mut rows = Vec::new();
    for &n in &orders {
        let phi = family(n);
        for &p in &powers {
            let b = moment_bound_check(mc, tr, &theta, &phi, p)?;
            let excess = b.lhs.mean - b.rhs;
            report.metrics.push(
                Metric::le(format!("excess_n{n}_p{p}"), excess, slack * b.lhs.stderr)
                    .with_stderr(b.lhs.stderr),
            );
            rows.push(b);
        }
    }
    report.details = json!({ "slack": slack, "bounds": rows });
    Ok(())
}

fn run_fubini(
    cfg: &ExperimentConfig,
    mc: &MCConfig,
    tr: &Arc<LevyTriplet>,
    f: &FubiniFn,
    report: &mut RunReport,
) -> Result<()> {
    let panels = cfg.experiment.u_panels.unwrap_or(8);
    let grid = cfg.numeric.grid_size;
    let res = mc
        .map(|_, seed| -> Result<f64> {
            let path = simulate_path(tr, grid, seed)?;
            Ok(fubini_residual(&path, |u, t, x| f(u, t, x), panels)?.relative())
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let worst = res.iter().copied().fold(0.0f64, f64::max);
    report.metrics.push(Metric::le(
        "max_relative_residual",
        worst,
        threshold(cfg, FUBINI_TOL),
    ));
    report.details =
        json!({ "u_panels": panels, "mean_relative_residual": Estimate::from_samples(&res) });
    Ok(())
}

/// `Σ a_i sin(ω_i t_i + b_i x_i) + c Π cos(0.3 t_i x_i)` with random coefficients.
pub fn random_smooth_integrand<R: Rng>(rng: &mut R, n: usize, omega_max: f64) -> SimplexIntegrand {
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0.5..omega_max.max(0.5 + 1e-9)))
        .collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c: f64 = rng.random_range(-1.0..1.0);
    let (a2, w2, b2) = (a.clone(), w.clone(), b.clone());
    SimplexIntegrand::new(
        n,
        Extension::Given,
        move |args: &[JumpRecord]| {
            let s: f64 = args
                .iter()
                .enumerate()
                .map(|(i, r)| a[i] * (w[i] * r.time + b[i] * r.size).sin())
                .sum();
            s + c * args
                .iter()
                .map(|r| (0.3 * r.time * r.size).cos())
                .product::<f64>()
        },
        move |j, args: &[JumpRecord]| {
            let r = args[j];
            let prod: f64 = args
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    if i == j {
                        -0.3 * q.size * (0.3 * q.time * q.size).sin()
                    } else {
                        (0.3 * q.time * q.size).cos()
                    }
                })
                .product();
            a2[j] * w2[j] * (w2[j] * r.time + b2[j] * r.size).cos() + c * prod
        },
    )
}

struct TripleOutcome {
    fd_error: f64,
    t1_gap: f64,
    orthogonality: f64,
}

fn run_derivative(
    cfg: &ExperimentConfig,
    mc: &MCConfig,
    tr: &Arc<LevyTriplet>,
    d: &DerivativeModel,
    report: &mut RunReport,
) -> Result<()> {
    let theta = theta_of(cfg)?;
    check_theta(tr, &theta)?;
    let n_triples = cfg.experiment.n_triples.unwrap_or(200);
    let eps = cfg.numeric.fd_epsilon;
    let tt = tr.horizon;
    let t1 = SimplexIntegrand::single(|t, _| t, |_, _| 1.0);
    let triples = MCConfig::new(n_triples, mc.base_seed);
    let out = triples
        .map(|_, seed| -> Result<TripleOutcome> {
            let mut rng = stream(seed, USER_STREAM);
            let n = rng.random_range(1..=d.max_arity);
            let phi = random_smooth_integrand(&mut rng, n, d.omega_max);
            let t = tt * rng.random::<f64>();
            // First path with at least n jumps in Θ.
            let path = (0..10_000u64)
                .map(|a| simulate_path(tr, 2, path_seed(seed, a)))
                .find(|p| {
                    p.as_ref().map_or(true, |p| {
                        p.jumps
                            .iter()
                            .filter(|j| theta.contains_jump(j.size))
                            .count()
                            >= n
                    })
                })
                .ok_or_else(|| {
                    invalid("n_triples", "no path with enough jumps in 10000 draws")
                })??;
            let fd = finite_difference_check(&path, &theta, &d.lambda, &d.k, &phi, t, eps)?;
            let dp = derivative_jump_functional(&path, &theta, &d.lambda, &d.k, &phi)?;
            let orthogonality = match orthogonality_residual(&dp) {
                Orthogonality::Residual { value, scale } if scale > 0.0 => value / scale,
                _ => 0.0,
            };
            let first = path
                .jumps
                .iter()
                .find(|j| theta.contains_jump(j.size))
                .copied()
                .unwrap();
            let d1 = derivative_jump_functional(&path, &theta, &d.lambda, &d.k, &t1)?;
            let closed = if d.lambda.contains_jump(first.size) {
                d.k.value(first.time, first.size)
                    * (first.time / tt - if t <= first.time { 1.0 } else { 0.0 })
            } else {
                0.0
            };
            Ok(TripleOutcome {
                fd_error: fd.relative_error(),
                t1_gap: (d1.value(t) - closed).abs(),
                orthogonality,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max = |f: fn(&TripleOutcome) -> f64| out.iter().map(f).fold(0.0f64, f64::max);
    let fd = max(|o| o.fd_error);
    let t1 = max(|o| o.t1_gap);
    let orth = max(|o| o.orthogonality);
    report.metrics.push(Metric::le(
        "max_fd_relative_error",
        fd,
        threshold(cfg, DERIVATIVE_TOL),
    ));
    report
        .metrics
        .push(Metric::le("max_first_jump_time_gap", t1, 0.0));
    if !d.lambda.contains(0.0) {
        report.metrics.push(Metric::le(
            "max_orthogonality_residual",
            orth,
            ORTHOGONALITY_TOL,
        ));
    }
    let errs: Vec<f64> = out.iter().map(|o| o.fd_error).collect();
    report.details = json!({
        "n_triples": n_triples,
        "fd_epsilon": eps,
        "mean_fd_relative_error": Estimate::from_samples(&errs),
    });
    Ok(())
}

const DEFAULT_LEVELS: [f64; 4] = [2.5, 5.0, 10.0, 20.0];
const DEFAULT_REFERENCE: f64 = 1000.0;

fn run_equation(
    cfg: &ExperimentConfig,
    mc: &MCConfig,
    tr: &Arc<LevyTriplet>,
    e: &EquationModel,
    kind: ExperimentKind,
    report: &mut RunReport,
) -> Result<()> {
    let tol = cfg.numeric.criterion_tol;
    let ex = &cfg.experiment;
    let additive = || match &e.model {
        SdeModel::Additive(s) => Ok(s),
        _ => Err(invalid("model", "needs the additive equation")),
    };
    match kind {
        ExperimentKind::MonotoneDrift => {
            let dir = e.direction.unwrap_or(Monotonicity::Increasing);
            let r = monotone_drift_experiment(additive()?, dir, tr, mc, tol)?;
            report.metrics.push(Metric::ge(
                "fraction_positive_given_jump",
                r.fraction_positive_given_jump,
                1.0,
            ));
            report.metrics.push(Metric::flag(
                "all_coefficients_positive",
                r.all_coefficients_positive,
            ));
            report.details = serde_json::to_value(&r).unwrap();
            report.rows = r.rows;
        }
        ExperimentKind::LocalMonotone => {
            let spec = LocalMonotoneSpec {
                epsilon: ex.epsilon.unwrap_or(0.9),
                m_bound: ex.m_bound.or(e.m_bound).unwrap_or(1.0),
                truncation: ex.truncation.unwrap_or(1e-4),
                t_grid: ex
                    .t_grid
                    .clone()
                    .unwrap_or_else(|| (1..=10).map(|i| 0.025 * i as f64 * tr.horizon).collect()),
                direction: e.direction.unwrap_or(Monotonicity::Increasing),
            };
            let r = local_monotone_experiment(additive()?, tr, &spec, mc, tol)?;
            for row in &r.rows {
                let se = row.p_empirical.stderr;
                report.metrics.push(
                    Metric::le(
                        format!("p_minus_bound_t{}", row.t),
                        row.p_empirical.mean - row.markov_bound,
                        3.0 * se,
                    )
                    .with_stderr(se),
                );
            }
            let mut sorted = r.rows.clone();
            sorted.sort_by(|a, b| a.t.total_cmp(&b.t));
            let decreasing = sorted
                .windows(2)
                .all(|w| w[0].markov_bound < w[1].markov_bound);
            report
                .metrics
                .push(Metric::flag("bound_decreases_as_t_decreases", decreasing));
            let (checked, positive) = r.rows.iter().fold((0, 0), |(c, p), row| {
                (c + row.n_checked, p + row.n_positive)
            });
            let frac = if checked == 0 {
                1.0
            } else {
                positive as f64 / checked as f64
            };
            report
                .metrics
                .push(Metric::ge("fraction_positive_off_event", frac, 1.0));
            report.details = json!({ "spec": spec, "report": r });
        }
        ExperimentKind::Wronskian => {
            let SdeModel::Multiplicative(s) = &e.model else {
                return Err(invalid("model", "needs the multiplicative equation"));
            };
            let cond = wronskian_condition(s, tr, reachable_range(s, tr.horizon, 20), 2001);
            let r = wronskian_experiment(s, tr, mc, tol)?;
            let frac = |k: usize| {
                if r.n_checked == 0 {
                    0.0
                } else {
                    k as f64 / r.n_checked as f64
                }
            };
            report
                .metrics
                .push(Metric::flag("wronskian_condition", cond.holds));
            report.metrics.push(Metric::ge(
                "fraction_single_term",
                frac(r.n_single_term),
                1.0,
            ));
            report
                .metrics
                .push(Metric::ge("fraction_positive", frac(r.n_positive), 1.0));
            report.metrics.push(Metric::le(
                "max_formula_gap",
                r.max_formula_gap,
                WRONSKIAN_GAP_TOL,
            ));
            report.details = json!({ "condition": cond, "report": r });
            report.rows = r.rows;
        }
        ExperimentKind::Density => {
            let cond = ex.conditioning.unwrap_or(Conditioning::AtLeastOneJump);
            let r = density_experiment(&e.model, tr, cfg.numeric.grid_size, mc, cond)?;
            if let Some(min) = ex.atom_min {
                report
                    .metrics
                    .push(Metric::ge("atom_statistic", r.atom_statistic, min));
            }
            let max = ex
                .atom_max
                .or((ex.atom_min.is_none() && cond != Conditioning::NoJumps)
                    .then(|| 2.0 / mc.n_paths as f64));
            if let Some(max) = max {
                report
                    .metrics
                    .push(Metric::le("atom_statistic", r.atom_statistic, max));
            } else if ex.atom_min.is_none() {
                report
                    .metrics
                    .push(Metric::ge("atom_statistic", r.atom_statistic, 1.0));
            }
            report.details = json!({ "conditioning": cond, "report": r });
        }
        ExperimentKind::Truncation => {
            let levels = ex.levels.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
            let reference = ex.reference_level.unwrap_or(DEFAULT_REFERENCE);
            let r = truncation_convergence_report(additive()?, tr, &levels, reference, mc)?;
            report
                .metrics
                .push(Metric::flag("strictly_decreasing", r.strictly_decreasing));
            for row in &r.rows {
                if let Some(d) = row.drop_to_next {
                    report.metrics.push(Metric::ge(
                        format!("drop_z_m{}", row.level),
                        d.mean / d.stderr.max(f64::MIN_POSITIVE),
                        3.0,
                    ));
                }
            }
            report.details = serde_json::to_value(&r).unwrap();
        }
        _ => unreachable!("equation presets only serve equation kinds"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ModelSpec;

    fn quick(kind: ExperimentKind, n: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind);
        c.mc.n_paths = n;
        c
    }

    #[test]
    fn every_kind_runs_with_defaults() {
        for kind in ExperimentKind::ALL {
            let n = match kind {
                ExperimentKind::Density => 2000,
                _ => 200,
            };
            let mut c = quick(kind, n);
            if kind == ExperimentKind::DerivativeCheck {
                c.experiment.n_triples = Some(20);
            }
            let r = run(&c).unwrap();
            assert!(r.failure.is_none(), "{kind}: {:?}", r.failure);
            assert!(!r.metrics.is_empty(), "{kind}");
            assert!(r.config.model.is_some() && r.config.triplet.is_some());
        }
    }

    #[test]
    fn product_and_derivative_defaults_pass() {
        assert!(
            run(&quick(ExperimentKind::ProductFormula, 50))
                .unwrap()
                .pass
        );
        let mut c = quick(ExperimentKind::DerivativeCheck, 1);
        c.experiment.n_triples = Some(30);
        let r = run(&c).unwrap();
        assert!(r.pass, "{:?}", r.metrics);
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        let mut c = quick(ExperimentKind::Duality, 10);
        c.model = Some(ModelSpec {
            preset: "no-such".into(),
            params: Default::default(),
        });
        assert!(matches!(run(&c), Err(ConfigError::Field { path, .. }) if path == "model.preset"));
    }

    #[test]
    fn numeric_failure_yields_partial_report() {
        // A Wronskian run on an infinite measure cannot proceed.
        let mut c = quick(ExperimentKind::Wronskian, 10);
        c.triplet = Some(default_triplet(ExperimentKind::Truncation, "increasing-drift").unwrap());
        match run(&c) {
            Ok(r) => {
                assert!(!r.pass);
                assert!(r.failure.is_some());
                assert_eq!(r.exit_code(), 1);
            }
            Err(e) => panic!("expected a partial report, got {e}"),
        }
    }

    #[test]
    fn csv_is_reproducible() {
        let c = quick(ExperimentKind::MonotoneDrift, 300);
        let a = run(&c).unwrap().to_csv();
        let b = run(&c).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.len() > 300);
    }
}
