use std::sync::Arc;

use proptest::prelude::*;

use local_malliavin::chaos::{multiple_integral, product_identity_residual, symmetrize, SimplexIntegrand};
use local_malliavin::func::fn1;
use local_malliavin::harness::{smooth_symmetric, ExperimentConfig, ExperimentKind, OutputFormat};
use local_malliavin::levy::{Atom, JumpRecord, JumpSet, LevyMeasure, LevyPath, LevyTriplet};
use local_malliavin::malliavin::{
    abs_continuity_indicator, derivative_jump_functional, l2_norm_sq, DerivativeProcess, Step, WeightK, DEFAULT_CRITERION_TOL,
};
use local_malliavin::mc::{Estimate, MCConfig};
use local_malliavin::quadrature::adaptive_simpson_split;
use local_malliavin::sde::{derivative_additive, derivative_multiplicative, AdditiveJumpSDE, Flow, MultiplicativeJumpSDE, SupBounds};

const T: f64 = 1.0;

fn triplet() -> Arc<LevyTriplet> {
    let nu = LevyMeasure::discrete(vec![Atom { size: 1.0, mass: 1.5 }, Atom { size: -2.0, mass: 0.5 }]).unwrap();
    Arc::new(LevyTriplet::new(0.0, 0.0, nu, T).unwrap())
}

/// Distinct sorted jump times in (0, T] with sizes from the atoms.
fn jumps(max: usize) -> impl Strategy<Value = Vec<JumpRecord>> {
    prop::collection::btree_set(1u32..100_000, 0..=max).prop_flat_map(|times| {
        let n = times.len();
        (Just(times), prop::collection::vec(prop::bool::ANY, n)).prop_map(|(times, signs)| {
            times
                .into_iter()
                .zip(signs)
                .map(|(t, s)| JumpRecord { time: t as f64 / 100_000.0 * T, size: if s { 1.0 } else { -2.0 } })
                .collect()
        })
    })
}

fn path_with(jumps: Vec<JumpRecord>) -> LevyPath {
    LevyPath::from_parts(triplet(), vec![0.0, T], vec![0.0, 0.0], jumps, 0).unwrap()
}

fn steps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.001..T, -3.0..3.0f64), 1..6)
}

fn process(steps: &[(f64, f64)]) -> DerivativeProcess {
    DerivativeProcess::from_steps(T, steps.iter().map(|&(time, coeff)| Step { time, coeff }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l2_norm_matches_quadrature(s in steps()) {
        let d = process(&s);
        let breaks: Vec<f64> = s.iter().map(|p| p.0).collect();
        let direct = adaptive_simpson_split(|t| d.value(t).powi(2), 0.0, T, &breaks, 1e-13).unwrap();
        let norm = l2_norm_sq(&d);
        prop_assert!(norm >= 0.0);
        prop_assert!((norm - direct).abs() <= 1e-10 * (1.0 + direct));
    }

    #[test]
    fn step_processes_integrate_to_zero(s in steps()) {
        let d = process(&s);
        let breaks: Vec<f64> = s.iter().map(|p| p.0).collect();
        let integral = adaptive_simpson_split(|t| d.value(t), 0.0, T, &breaks, 1e-13).unwrap();
        let scale: f64 = s.iter().map(|p| p.1.abs()).sum();
        prop_assert!(integral.abs() <= 1e-10 * scale);
    }

    #[test]
    fn positivity_is_scale_invariant(s in steps(), c in prop_oneof![1e-6..1e-3f64, 1e3..1e6f64]) {
        let d = process(&s);
        prop_assert_eq!(abs_continuity_indicator(&d, DEFAULT_CRITERION_TOL), abs_continuity_indicator(&d.scale(c), DEFAULT_CRITERION_TOL));
        prop_assert_eq!(abs_continuity_indicator(&d, DEFAULT_CRITERION_TOL), abs_continuity_indicator(&d.scale(-c), DEFAULT_CRITERION_TOL));
    }

    #[test]
    fn product_identity_holds_pathwise(js in jumps(7), n in 1usize..=4, a in -2.0..2.0f64, w in 0.5..4.0f64) {
        let path = path_with(js);
        let phi_1 = SimplexIntegrand::single(move |t, x| (w * t).sin() + a * x, move |t, _| w * (w * t).cos());
        let r = product_identity_residual(&path, &JumpSet::nonzero(), &smooth_symmetric(n), &phi_1).unwrap();
        prop_assert!(r.relative() <= 1e-12, "residual {}", r.relative());
    }

    #[test]
    fn multiple_integral_vanishes_below_arity(js in jumps(3), extra in 1usize..3) {
        let n = js.len() + extra;
        let path = path_with(js);
        prop_assert_eq!(multiple_integral(&path, &JumpSet::nonzero(), &smooth_symmetric(n)).unwrap(), 0.0);
    }

    #[test]
    fn symmetrization_ignores_slot_order(js in jumps(4).prop_filter("three jumps", |j| j.len() >= 3), c in 0.1..2.0f64) {
        let phi = SimplexIntegrand::new(
            3,
            local_malliavin::chaos::Extension::Given,
            move |a: &[JumpRecord]| a[0].time * (c * a[1].size).sin() + a[2].time.powi(2) * a[0].size,
            |_, _| 0.0,
        );
        let sym = symmetrize(&phi);
        let args = &js[..3];
        let perm = [args[2], args[0], args[1]];
        prop_assert!((sym.value(args) - sym.value(&perm)).abs() <= 1e-12);
    }

    #[test]
    fn derivative_steps_sit_on_jump_times(js in jumps(6), n in 1usize..=3) {
        let path = path_with(js.clone());
        let k = WeightK::constant(1.0);
        let d = derivative_jump_functional(&path, &JumpSet::nonzero(), &JumpSet::nonzero(), &k, &smooth_symmetric(n)).unwrap();
        if js.len() < n {
            prop_assert!(d.is_zero());
        } else {
            for s in d.steps() {
                prop_assert!(js[..n].iter().any(|j| j.time == s.time));
            }
        }
    }

    #[test]
    fn flow_semigroup(x in -1.0..1.0f64, s in 0.0..0.3f64, u in 0.3..0.6f64, t in 0.6..1.0f64) {
        let flow = Flow::new(fn1(|z| z.sin() + 0.5), fn1(|z| z.cos()), 1e-3);
        let direct = flow.phi(s, x, t);
        let composed = flow.phi(u, flow.phi(s, x, u), t);
        prop_assert!((direct - composed).abs() <= 1e-9);
    }

    #[test]
    fn unit_gain_multiplicative_equals_additive(js in jumps(5), x0 in -0.5..0.5f64) {
        let path = path_with(js);
        let k = WeightK::constant(1.0);
        let add = AdditiveJumpSDE::new(|z| 0.5 * z.cos(), |z| -0.5 * z.sin(), |y| 0.3 * y, x0);
        let mult = MultiplicativeJumpSDE::new(
            fn1(|z| 0.5 * z.cos()), fn1(|z| -0.5 * z.sin()), fn1(|z| -0.5 * z.cos()),
            fn1(|_| 1.0), fn1(|_| 0.0), fn1(|y| 0.3 * y), x0,
            SupBounds { f2: 0.5, h: 0.6, g: 1.0 },
        );
        let a = derivative_additive(&path, &add, &k);
        let b = derivative_multiplicative(&path, &mult, &k);
        for (p, q) in a.steps().iter().zip(b.steps()) {
            prop_assert!((p.coeff - q.coeff).abs() <= 1e-9 * (1.0 + p.coeff.abs()));
        }
    }

    #[test]
    fn jump_set_intersection(lo1 in 0.0..1.0f64, w1 in 0.1..2.0f64, lo2 in 0.0..1.0f64, w2 in 0.1..2.0f64, x in -3.0..3.0f64) {
        let a = JumpSet::annulus(lo1, lo1 + w1).unwrap();
        let b = JumpSet::annulus(lo2, lo2 + w2).unwrap().with_zero();
        prop_assert_eq!(a.intersect(&b).contains(x), a.contains(x) && b.contains(x));
        prop_assert!(JumpSet::everything().covers(&a));
    }

    #[test]
    fn estimates_do_not_depend_on_thread_count(n in 1usize..500, seed in 1u64..1000, threads in 1usize..6) {
        let mc = MCConfig::new(n, seed);
        let work = |_: usize, s: u64| (s % 1000) as f64 / 7.0;
        let serial = Estimate::from_samples(&mc.map(work));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let parallel = pool.install(|| Estimate::from_samples(&mc.map(work)));
        prop_assert_eq!(serial, parallel);
    }

    #[test]
    fn configs_round_trip(n in 1usize..1_000_000, seed in 1u64..u64::MAX, grid in 2usize..4096, k in 0usize..10, csv in prop::bool::ANY) {
        let mut c = ExperimentConfig::new(ExperimentKind::ALL[k]);
        c.mc.n_paths = n;
        c.mc.base_seed = seed;
        c.numeric.grid_size = grid;
        c.output.format = if csv { OutputFormat::Csv } else { OutputFormat::Json };
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        prop_assert_eq!(back, c);
    }
}
