use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::config::{ConfigError, ExperimentKind, ModelSpec, TripletSpec};
use crate::chaos::{Extension, SimplexIntegrand};
use crate::func::fn1;
use crate::levy::{Atom, JumpRecord, JumpSet, LevyMeasure, LevyTriplet};
use crate::malliavin::{SmoothFunctional, TimeFunction, WeightK};
use crate::random_measure::Kernel;
use crate::sde::{
    AdditiveJumpSDE, DiffusionSDE, Monotonicity, MultiplicativeJumpSDE, SdeModel, SupBounds,
};

use ExperimentKind as K;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetCategory {
    Measure,
    Functional,
    Integrand,
    Equation,
}

/// Catalog entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub category: PresetCategory,
    pub description: &'static str,
    pub params: Vec<(&'static str, f64)>,
    /// Experiment kinds accepting this preset (empty for measures).
    pub kinds: Vec<ExperimentKind>,
}

struct MeasureDef {
    name: &'static str,
    description: &'static str,
    params: &'static [(&'static str, f64)],
}

const MEASURES: &[MeasureDef] = &[
    MeasureDef {
        name: "none",
        description: "zero Lévy measure (Brownian motion with drift)",
        params: &[],
    },
    MeasureDef {
        name: "poisson",
        description: "rate · δ₁, a Poisson process",
        params: &[("rate", 1.0)],
    },
    MeasureDef {
        name: "compound-two-atom",
        description: "mass_1 · δ_{size_1} + mass_2 · δ_{size_2}",
        params: &[
            ("size_1", 1.0),
            ("mass_1", 1.5),
            ("size_2", -2.0),
            ("mass_2", 0.5),
        ],
    },
    MeasureDef {
        name: "finite-density",
        description: "c₊ e^{-r₊x} on [lo, hi] and c₋ e^{-r₋|x|} on [-hi, -lo]",
        params: &[
            ("c_pos", 1.0),
            ("rate_pos", 1.5),
            ("c_neg", 1.0),
            ("rate_neg", 1.5),
            ("lo", 0.05),
            ("hi", 6.0),
        ],
    },
    MeasureDef {
        name: "truncatable-gamma-like",
        description: "c e^{-rate·x}/x on x > 0, infinite activity",
        params: &[("c", 1.0), ("rate", 1.0)],
    },
];

struct ModelDef {
    name: &'static str,
    category: PresetCategory,
    description: &'static str,
    params: &'static [(&'static str, f64)],
    kinds: &'static [ExperimentKind],
    /// Default triplet: measure, its overrides, sigma.
    triplet: (&'static str, &'static [(&'static str, f64)], f64),
}

const MODELS: &[ModelDef] = &[
    ModelDef {
        name: "poisson-jump-time",
        category: PresetCategory::Functional,
        description: "F = tanh(M(x cos t)), g = sin(ωt), Λ = ℝ₀, k = 1 on a Poisson process",
        params: &[("omega", 3.0)],
        kinds: &[K::Duality],
        triplet: ("poisson", &[("rate", 2.0)], 0.0),
    },
    ModelDef {
        name: "brownian",
        category: PresetCategory::Functional,
        description: "F = sin(M(1 + t)), g = t, Λ = {0} on Brownian motion",
        params: &[],
        kinds: &[K::Duality],
        triplet: ("none", &[], 1.0),
    },
    ModelDef {
        name: "mixed-two-kernel",
        category: PresetCategory::Functional,
        description: "F = tanh(M(h₁)) cos(M(h₂)), g = sin(2t), Λ = ℝ, k = (1 + sin(t)/2) tanh x",
        params: &[],
        kinds: &[K::Duality],
        triplet: ("compound-two-atom", &[], 0.5),
    },
    ModelDef {
        name: "finite-density-annulus",
        category: PresetCategory::Functional,
        description: "F = arctan(M(x e^{-t})), g = 1 - 2t, Λ = {0.5 < |x| < 3}, k = cos(tx)",
        params: &[("lambda_lo", 0.5), ("lambda_hi", 3.0)],
        kinds: &[K::Duality],
        triplet: ("finite-density", &[], 0.0),
    },
    ModelDef {
        name: "indicator-window",
        category: PresetCategory::Functional,
        description: "F = M(h₁) + M(h₂)²/2, g = 1_[0.2,0.7), Λ = ℝ, k = tx/(1+x²)",
        params: &[("window_lo", 0.2), ("window_hi", 0.7)],
        kinds: &[K::Duality],
        triplet: ("compound-two-atom", &[], 0.3),
    },
    ModelDef {
        name: "product-corollary",
        category: PresetCategory::Functional,
        description: "F G with F = tanh(M(1 + xt)), G = cos(M(x - t)), g = 1 - t, k = 1 + t/2",
        params: &[],
        kinds: &[K::Duality],
        triplet: ("poisson", &[("rate", 1.5)], 0.7),
    },
    ModelDef {
        name: "smooth-symmetric",
        category: PresetCategory::Integrand,
        description: "φ_n = exp(-Σ (i/n) t_i) Π tanh(x_i + 0.3), φ₁ = cos(2t) x",
        params: &[],
        kinds: &[K::ProductFormula],
        triplet: (
            "compound-two-atom",
            &[("mass_1", 3.75), ("mass_2", 1.25)],
            0.0,
        ),
    },
    ModelDef {
        name: "bounded-product",
        category: PresetCategory::Integrand,
        description: "φ_n = Π cos(t_i + i) tanh(x_i), bounded by one",
        params: &[],
        kinds: &[K::MomentBound],
        triplet: ("compound-two-atom", &[], 0.0),
    },
    ModelDef {
        name: "mixed-kernel",
        category: PresetCategory::Integrand,
        description: "f(u, t, x) = sin(u + t) + x cos(ut)/(1 + x²)",
        params: &[],
        kinds: &[K::Fubini],
        triplet: ("compound-two-atom", &[], 0.8),
    },
    ModelDef {
        name: "random-smooth",
        category: PresetCategory::Integrand,
        description:
            "random φ = Σ a_i sin(ω_i t_i + b_i x_i) + c Π cos(0.3 t_i x_i) of arity 1..=3",
        params: &[("omega_max", 3.0), ("max_arity", 3.0)],
        kinds: &[K::DerivativeCheck],
        triplet: ("finite-density", &[], 0.0),
    },
    ModelDef {
        name: "increasing-drift",
        category: PresetCategory::Equation,
        description: "dZ = (Z + tanh Z) dt + ∫ h_scale·y N(dt, dy)",
        params: &[("x0", 0.2), ("h_scale", 1.0)],
        kinds: &[K::MonotoneDrift, K::Truncation, K::Density],
        triplet: ("finite-density", &[], 0.0),
    },
    ModelDef {
        name: "locally-monotone",
        category: PresetCategory::Equation,
        description: "dZ = Z e^{-Z²/2} dt + ∫ h_scale·y N(dt, dy), increasing on (-1, 1)",
        params: &[("x0", 0.0), ("h_scale", 1.0)],
        kinds: &[K::LocalMonotone, K::Density],
        triplet: ("truncatable-gamma-like", &[("c", 0.05)], 0.0),
    },
    ModelDef {
        name: "wronskian-pair",
        category: PresetCategory::Equation,
        description: "dZ = amp·cos Z dt + ∫ h_scale·y sin(Z_-) N(dt, dy)",
        params: &[("x0", 0.3), ("amp", 0.5), ("h_scale", 1.0)],
        kinds: &[K::Wronskian, K::Density],
        triplet: (
            "compound-two-atom",
            &[
                ("size_1", 0.6),
                ("mass_1", 1.0),
                ("size_2", -0.4),
                ("mass_2", 1.0),
            ],
            0.0,
        ),
    },
    ModelDef {
        name: "ou-jump",
        category: PresetCategory::Equation,
        description: "dZ = -θZ dt + vol dW + ∫ jump_scale·y N(dt, dy)",
        params: &[
            ("x0", 0.0),
            ("theta", 1.0),
            ("vol", 0.5),
            ("jump_scale", 1.0),
        ],
        kinds: &[K::Density],
        triplet: ("compound-two-atom", &[], 1.0),
    },
    ModelDef {
        name: "gated-diffusion",
        category: PresetCategory::Equation,
        description: "dZ = dt + vol (Z - level)₊² dW: no noise until Z passes the level",
        params: &[("x0", 0.0), ("level", 0.5), ("vol", 0.3)],
        kinds: &[K::Density],
        triplet: ("none", &[], 1.0),
    },
];

pub fn list_presets() -> Vec<PresetInfo> {
    let measures = MEASURES.iter().map(|m| PresetInfo {
        name: m.name,
        category: PresetCategory::Measure,
        description: m.description,
        params: m.params.to_vec(),
        kinds: Vec::new(),
    });
    let models = MODELS.iter().map(|m| PresetInfo {
        name: m.name,
        category: m.category,
        description: m.description,
        params: m.params.to_vec(),
        kinds: m.kinds.to_vec(),
    });
    measures.chain(models).collect()
}

/// Default model preset of a kind.
pub fn default_model(kind: ExperimentKind) -> ModelSpec {
    let def = MODELS
        .iter()
        .find(|m| m.kinds.contains(&kind))
        .expect("every kind has a preset");
    ModelSpec {
        preset: def.name.to_string(),
        params: BTreeMap::new(),
    }
}

/// Default triplet for a model preset; the truncation and local-monotone
/// kinds always default to an infinite-activity measure.
pub fn default_triplet(kind: ExperimentKind, model: &str) -> Result<TripletSpec, ConfigError> {
    let def = model_def(model)?;
    let (measure, params, sigma) = match kind {
        K::Truncation => ("truncatable-gamma-like", &[][..], 0.0),
        _ => def.triplet,
    };
    Ok(TripletSpec {
        measure: measure.to_string(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        gamma: 0.0,
        sigma,
        horizon: 1.0,
    })
}

fn model_def(name: &str) -> Result<&'static ModelDef, ConfigError> {
    MODELS
        .iter()
        .find(|m| m.name == name)
        .ok_or_else(|| ConfigError::field("model.preset", format!("unknown preset `{name}`")))
}

/// Defaults merged with overrides; unknown keys are rejected.
fn resolve(
    path: &str,
    defaults: &[(&str, f64)],
    overrides: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>, ConfigError> {
    let mut out: BTreeMap<String, f64> =
        defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        if !out.contains_key(k) {
            let known: Vec<&str> = defaults.iter().map(|d| d.0).collect();
            return Err(ConfigError::field(
                format!("{path}.{k}"),
                format!("unknown parameter; expected one of {known:?}"),
            ));
        }
        if !v.is_finite() {
            return Err(ConfigError::field(format!("{path}.{k}"), "must be finite"));
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

pub fn build_measure(
    name: &str,
    overrides: &BTreeMap<String, f64>,
) -> Result<LevyMeasure, ConfigError> {
    let def = MEASURES.iter().find(|m| m.name == name).ok_or_else(|| {
        ConfigError::field(
            "triplet.measure",
            format!("unknown measure preset `{name}`"),
        )
    })?;
    let p = resolve("triplet.params", def.params, overrides)?;
    let bad = |e: crate::Error| ConfigError::field("triplet.params", e);
    match name {
        "none" => Ok(LevyMeasure::zero()),
        "poisson" => LevyMeasure::poisson(p["rate"]).map_err(bad),
        "compound-two-atom" => LevyMeasure::discrete(vec![
            Atom {
                size: p["size_1"],
                mass: p["mass_1"],
            },
            Atom {
                size: p["size_2"],
                mass: p["mass_2"],
            },
        ])
        .map_err(bad),
        "finite-density" => LevyMeasure::two_sided_exponential(
            p["c_pos"],
            p["rate_pos"],
            p["c_neg"],
            p["rate_neg"],
            p["lo"],
            p["hi"],
        )
        .map_err(bad),
        "truncatable-gamma-like" => LevyMeasure::gamma_like(p["c"], p["rate"]).map_err(bad),
        _ => unreachable!(),
    }
}

pub fn build_triplet(spec: &TripletSpec) -> Result<Arc<LevyTriplet>, ConfigError> {
    let nu = build_measure(&spec.measure, &spec.params)?;
    LevyTriplet::new(spec.gamma, spec.sigma, nu, spec.horizon)
        .map(Arc::new)
        .map_err(|e| ConfigError::field("triplet", e))
}

/// `(F, G, g, Λ, k)` of an integration-by-parts check; `G` is present for the product form.
#[derive(Clone, Debug)]
pub struct DualityModel {
    pub f: SmoothFunctional,
    pub second: Option<SmoothFunctional>,
    pub g: TimeFunction,
    pub lambda: JumpSet,
    pub k: WeightK,
}

pub type Family = Arc<dyn Fn(usize) -> SimplexIntegrand + Send + Sync>;
pub type FubiniFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct DerivativeModel {
    pub k: WeightK,
    pub lambda: JumpSet,
    pub omega_max: f64,
    pub max_arity: usize,
}

#[derive(Clone, Debug)]
pub struct EquationModel {
    pub model: SdeModel,
    pub direction: Option<Monotonicity>,
    /// `sup |f'|` where known.
    pub m_bound: Option<f64>,
}

/// A resolved model preset.
#[derive(Clone)]
pub enum BuiltModel {
    Duality(DualityModel),
    Chaos {
        family: Family,
        phi_1: SimplexIntegrand,
    },
    Fubini(FubiniFn),
    Derivative(DerivativeModel),
    Equation(EquationModel),
}

pub fn build_model(
    kind: ExperimentKind,
    spec: &ModelSpec,
    triplet: &LevyTriplet,
    ode_steps: usize,
) -> Result<BuiltModel, ConfigError> {
    let def = model_def(&spec.preset)?;
    if !def.kinds.contains(&kind) {
        let allowed: Vec<&str> = MODELS
            .iter()
            .filter(|m| m.kinds.contains(&kind))
            .map(|m| m.name)
            .collect();
        return Err(ConfigError::field(
            "model.preset",
            format!(
                "`{}` does not apply to {kind}; use one of {allowed:?}",
                def.name
            ),
        ));
    }
    let p = resolve("model.params", def.params, &spec.params)?;
    let model = match def.name {
        "poisson-jump-time" => {
            let h = Kernel::new(|t, x| x * t.cos(), |t, x| -x * t.sin());
            BuiltModel::Duality(DualityModel {
                f: SmoothFunctional::scalar(|u| u.tanh(), |u| 1.0 / u.cosh().powi(2), h),
                second: None,
                g: TimeFunction::sine(p["omega"]),
                lambda: JumpSet::nonzero(),
                k: WeightK::constant(1.0),
            })
        }
        "brownian" => BuiltModel::Duality(DualityModel {
            f: SmoothFunctional::scalar(
                |u| u.sin(),
                |u| u.cos(),
                Kernel::new(|t, _| 1.0 + t, |_, _| 1.0),
            ),
            second: None,
            g: TimeFunction::linear(1.0, 0.0),
            lambda: JumpSet::zero(),
            k: WeightK::constant(1.0),
        }),
        "mixed-two-kernel" => {
            let h1 = Kernel::new(|t, x| t.cos() + 0.5 * x, |t, _| -t.sin());
            let h2 = Kernel::new(|t, x| t * x / (1.0 + x * x) + 0.3, |_, x| x / (1.0 + x * x));
            let f = SmoothFunctional::new(
                |u| u[0].tanh() * u[1].cos(),
                |u| vec![u[1].cos() / u[0].cosh().powi(2), -u[0].tanh() * u[1].sin()],
                vec![h1, h2],
            );
            BuiltModel::Duality(DualityModel {
                f,
                second: None,
                g: TimeFunction::sine(2.0),
                lambda: JumpSet::everything(),
                k: WeightK::new(
                    |t, x| (1.0 + 0.5 * t.sin()) * x.tanh(),
                    |t, x| 0.5 * t.cos() * x.tanh(),
                    1.5,
                ),
            })
        }
        "finite-density-annulus" => {
            let h = Kernel::new(|t, x| x * (-t).exp(), |t, x| -x * (-t).exp());
            let lambda = JumpSet::annulus(p["lambda_lo"], p["lambda_hi"])
                .map_err(|e| ConfigError::field("model.params", e))?;
            BuiltModel::Duality(DualityModel {
                f: SmoothFunctional::scalar(|u| u.atan(), |u| 1.0 / (1.0 + u * u), h),
                second: None,
                g: TimeFunction::linear(-2.0, 1.0),
                lambda,
                k: WeightK::new(|t, x| (t * x).cos(), |t, x| -x * (t * x).sin(), 1.0),
            })
        }
        "indicator-window" => {
            let (lo, hi) = (p["window_lo"], p["window_hi"]);
            if !(0.0 <= lo && lo < hi) {
                return Err(ConfigError::field(
                    "model.params.window_lo",
                    "need 0 ≤ window_lo < window_hi",
                ));
            }
            let h1 = Kernel::new(|t, x| t.sin() + x, |t, _| t.cos());
            let h2 = Kernel::new(|t, x| t * x, |_, x| x);
            let f = SmoothFunctional::new(
                |u| u[0] + 0.5 * u[1] * u[1],
                |u| vec![1.0, u[1]],
                vec![h1, h2],
            );
            BuiltModel::Duality(DualityModel {
                f,
                second: None,
                g: TimeFunction::indicator(lo, hi),
                lambda: JumpSet::everything(),
                k: WeightK::new(|t, x| t * x / (1.0 + x * x), |_, x| x / (1.0 + x * x), 0.5),
            })
        }
        "product-corollary" => {
            let f = SmoothFunctional::scalar(
                |u| u.tanh(),
                |u| 1.0 / u.cosh().powi(2),
                Kernel::new(|t, x| 1.0 + x * t, |_, x| x),
            );
            let g_fn = SmoothFunctional::scalar(
                |u| u.cos(),
                |u| -u.sin(),
                Kernel::new(|t, x| x - t, |_, _| -1.0),
            );
            BuiltModel::Duality(DualityModel {
                f,
                second: Some(g_fn),
                g: TimeFunction::linear(-1.0, 1.0),
                lambda: JumpSet::everything(),
                k: WeightK::new(|t, _| 1.0 + 0.5 * t, |_, _| 0.5, 1.5),
            })
        }
        "smooth-symmetric" => BuiltModel::Chaos {
            family: Arc::new(smooth_symmetric),
            phi_1: SimplexIntegrand::single(
                |t, x| (2.0 * t).cos() * x,
                |t, x| -2.0 * (2.0 * t).sin() * x,
            ),
        },
        "bounded-product" => BuiltModel::Chaos {
            family: Arc::new(bounded_product),
            phi_1: bounded_product(1),
        },
        "mixed-kernel" => BuiltModel::Fubini(Arc::new(|u, t, x| {
            (u + t).sin() + x * (u * t).cos() / (1.0 + x * x)
        })),
        "random-smooth" => {
            let max_arity = p["max_arity"];
            if !(max_arity >= 1.0 && max_arity.fract() == 0.0 && max_arity <= 6.0) {
                return Err(ConfigError::field(
                    "model.params.max_arity",
                    "must be an integer in 1..=6",
                ));
            }
            BuiltModel::Derivative(DerivativeModel {
                k: WeightK::new(
                    |t, x| (1.0 + 0.5 * t.sin()) * x.tanh(),
                    |t, x| 0.5 * t.cos() * x.tanh(),
                    1.5,
                ),
                lambda: JumpSet::nonzero(),
                omega_max: p["omega_max"],
                max_arity: max_arity as usize,
            })
        }
        "increasing-drift" => {
            let a = p["h_scale"];
            let sde = AdditiveJumpSDE::new(
                |z| z + z.tanh(),
                |z| 1.0 + 1.0 / z.cosh().powi(2),
                move |y| a * y,
                p["x0"],
            )
            .with_ode_steps(ode_steps);
            BuiltModel::Equation(EquationModel {
                model: SdeModel::Additive(sde),
                direction: Some(Monotonicity::Increasing),
                m_bound: Some(2.0),
            })
        }
        "locally-monotone" => {
            let a = p["h_scale"];
            let sde = AdditiveJumpSDE::new(
                |z| z * (-0.5 * z * z).exp(),
                |z| (1.0 - z * z) * (-0.5 * z * z).exp(),
                move |y| a * y,
                p["x0"],
            )
            .with_ode_steps(ode_steps);
            BuiltModel::Equation(EquationModel {
                model: SdeModel::Additive(sde),
                direction: Some(Monotonicity::Increasing),
                m_bound: Some(1.0),
            })
        }
        "wronskian-pair" => {
            let (amp, a) = (p["amp"], p["h_scale"]);
            let h_sup = triplet
                .nu
                .support_points(16)
                .iter()
                .map(|y| (a * y).abs())
                .fold(0.0f64, f64::max);
            let sde = MultiplicativeJumpSDE::new(
                fn1(move |z| amp * z.cos()),
                fn1(move |z| -amp * z.sin()),
                fn1(move |z| -amp * z.cos()),
                fn1(|z| z.sin()),
                fn1(|z| z.cos()),
                fn1(move |y| a * y),
                p["x0"],
                SupBounds {
                    f2: amp.abs(),
                    h: h_sup,
                    g: 1.0,
                },
            )
            .with_ode_steps(ode_steps);
            BuiltModel::Equation(EquationModel {
                model: SdeModel::Multiplicative(sde),
                direction: None,
                m_bound: Some(amp.abs()),
            })
        }
        "ou-jump" => {
            let (theta, vol, js) = (p["theta"], p["vol"], p["jump_scale"]);
            let sde = DiffusionSDE::new(
                move |z| -theta * z,
                move |_| -theta,
                move |_| vol,
                |_| 0.0,
                move |_| js,
                p["x0"],
            );
            BuiltModel::Equation(EquationModel {
                model: SdeModel::Diffusion(sde),
                direction: None,
                m_bound: None,
            })
        }
        "gated-diffusion" => {
            let (level, vol) = (p["level"], p["vol"]);
            let sde = DiffusionSDE::new(
                |_| 1.0,
                |_| 0.0,
                move |z| {
                    if z > level {
                        vol * (z - level).powi(2)
                    } else {
                        0.0
                    }
                },
                move |z| {
                    if z > level {
                        2.0 * vol * (z - level)
                    } else {
                        0.0
                    }
                },
                |_| 0.0,
                p["x0"],
            );
            BuiltModel::Equation(EquationModel {
                model: SdeModel::Diffusion(sde),
                direction: None,
                m_bound: None,
            })
        }
        _ => unreachable!("every catalog entry is built"),
    };
    Ok(model)
}

/// `φ_n = exp(-Σ_i ((i+1)/n) t_i) Π tanh(x_i + 0.3)` on the simplex.
pub fn smooth_symmetric(n: usize) -> SimplexIntegrand {
    let c = move |i: usize| (i + 1) as f64 / n as f64;
    let eval = move |a: &[JumpRecord]| -> f64 {
        let e: f64 = a.iter().enumerate().map(|(i, r)| c(i) * r.time).sum();
        (-e).exp() * a.iter().map(|r| (r.size + 0.3).tanh()).product::<f64>()
    };
    SimplexIntegrand::new(n, Extension::Symmetric, eval, move |j, a| -c(j) * eval(a))
}

/// `φ_n = Π cos(t_i + i) tanh(x_i)` on the simplex.
pub fn bounded_product(n: usize) -> SimplexIntegrand {
    let factor = |i: usize, r: &JumpRecord| (r.time + i as f64).cos() * r.size.tanh();
    SimplexIntegrand::new(
        n,
        Extension::Symmetric,
        move |a| a.iter().enumerate().map(|(i, r)| factor(i, r)).product(),
        move |j, a| {
            a.iter()
                .enumerate()
                .map(|(i, r)| {
                    if i == j {
                        -(r.time + i as f64).sin() * r.size.tanh()
                    } else {
                        factor(i, r)
                    }
                })
                .product()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::random_tuples;
    use crate::rng::{stream, USER_STREAM};

    #[test]
    fn catalog_is_complete() {
        let cat = list_presets();
        assert!(cat.len() >= 15);
        for kind in ExperimentKind::ALL {
            let spec = default_model(kind);
            let ts = default_triplet(kind, &spec.preset).unwrap();
            let tr = build_triplet(&ts).unwrap();
            build_model(kind, &spec, &tr, 64).unwrap();
        }
    }

    #[test]
    fn every_model_preset_builds_and_validates() {
        for def in MODELS {
            for &kind in def.kinds {
                let spec = ModelSpec {
                    preset: def.name.into(),
                    params: BTreeMap::new(),
                };
                let tr = build_triplet(&default_triplet(kind, def.name).unwrap()).unwrap();
                match build_model(kind, &spec, &tr, 64).unwrap() {
                    BuiltModel::Duality(d) => {
                        d.f.validate(&tr).unwrap();
                        if let Some(g) = &d.second {
                            g.validate(&tr).unwrap();
                        }
                        d.k.validate(&tr).unwrap();
                    }
                    BuiltModel::Chaos { family, phi_1 } => {
                        let mut rng = stream(1, USER_STREAM);
                        for n in 1..=4 {
                            family(n)
                                .validate(
                                    &random_tuples(&mut rng, n, 10, 1.0, &[1.0, -2.0]),
                                    1e-6,
                                    1e-5,
                                )
                                .unwrap();
                        }
                        phi_1
                            .validate(
                                &random_tuples(&mut rng, 1, 10, 1.0, &[1.0, -2.0]),
                                1e-6,
                                1e-5,
                            )
                            .unwrap();
                    }
                    BuiltModel::Derivative(d) => d.k.validate(&tr).unwrap(),
                    BuiltModel::Equation(e) => match e.model {
                        SdeModel::Additive(s) => s.validate(&tr).unwrap(),
                        SdeModel::Multiplicative(s) => s.validate(&tr).unwrap(),
                        SdeModel::Diffusion(s) => s.validate().unwrap(),
                    },
                    BuiltModel::Fubini(_) => {}
                }
            }
        }
    }

    #[test]
    fn bad_names_and_params() {
        assert!(build_measure("cauchy", &BTreeMap::new()).is_err());
        let e =
            build_measure("poisson", &BTreeMap::from([("lambda".to_string(), 1.0)])).unwrap_err();
        assert!(
            matches!(e, ConfigError::Field { ref path, .. } if path == "triplet.params.lambda")
        );
        let tr = build_triplet(&default_triplet(K::Duality, "brownian").unwrap()).unwrap();
        let spec = ModelSpec {
            preset: "increasing-drift".into(),
            params: BTreeMap::new(),
        };
        assert!(build_model(K::Duality, &spec, &tr, 64).is_err());
    }
}
