//! Integration by parts E[∫ D_t F g(t) dt] = E[F · weight] on common paths.
//!
//! The first check is the classical Poisson case: k ≡ 1, every jump size
//! differentiated. The second mixes a Brownian part with two atoms and a
//! local weight, and the third checks the product rule version.

use std::sync::Arc;

use local_malliavin::levy::{Atom, JumpSet, LevyMeasure, LevyTriplet};
use local_malliavin::malliavin::{duality_residual, product_duality_residual, SmoothFunctional, TimeFunction, WeightK};
use local_malliavin::mc::MCConfig;
use local_malliavin::random_measure::Kernel;

fn main() -> local_malliavin::Result<()> {
    let mc = MCConfig::new(100_000, 11);

    let poisson = Arc::new(LevyTriplet::new(0.0, 0.0, LevyMeasure::poisson(2.0)?, 1.0)?);
    let f = SmoothFunctional::scalar(|u| u.tanh(), |u| 1.0 / u.cosh().powi(2), Kernel::new(|t, x| x * t.cos(), |t, x| -x * t.sin()));
    let r = duality_residual(&mc, &poisson, 64, &f, &TimeFunction::sine(3.0), &JumpSet::nonzero(), &WeightK::constant(1.0))?;
    println!("poisson   lhs {:+.5} rhs {:+.5} z {:.2}", r.lhs, r.rhs, r.z_score);

    let nu = LevyMeasure::discrete(vec![Atom { size: 1.0, mass: 1.5 }, Atom { size: -2.0, mass: 0.5 }])?;
    let mixed = Arc::new(LevyTriplet::new(0.0, 0.5, nu, 1.0)?);
    let f = SmoothFunctional::new(
        |u| u[0].tanh() * u[1].cos(),
        |u| vec![u[1].cos() / u[0].cosh().powi(2), -u[0].tanh() * u[1].sin()],
        vec![
            Kernel::new(|t, x| t.cos() + 0.5 * x, |t, _| -t.sin()),
            Kernel::new(|t, x| t * x / (1.0 + x * x) + 0.3, |_, x| x / (1.0 + x * x)),
        ],
    );
    let k = WeightK::new(|t, x| (1.0 + 0.5 * t.sin()) * x.tanh(), |t, x| 0.5 * t.cos() * x.tanh(), 1.5);
    let r = duality_residual(&mc, &mixed, 64, &f, &TimeFunction::sine(2.0), &JumpSet::everything(), &k)?;
    println!("mixed     lhs {:+.5} rhs {:+.5} z {:.2}", r.lhs, r.rhs, r.z_score);

    let g_fn = SmoothFunctional::scalar(|u| u.cos(), |u| -u.sin(), Kernel::new(|t, x| x - t, |_, _| -1.0));
    let k = WeightK::new(|t, _| 1.0 + 0.5 * t, |_, _| 0.5, 1.5);
    let r = product_duality_residual(&mc, &mixed, 64, &f, &g_fn, &TimeFunction::linear(-1.0, 1.0), &JumpSet::everything(), &k)?;
    println!("product   lhs {:+.5} rhs {:+.5} z {:.2}", r.lhs, r.rhs, r.z_score);
    Ok(())
}
