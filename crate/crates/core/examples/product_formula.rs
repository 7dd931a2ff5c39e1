//! J_n(φ_n) J_1(φ_1) = J_{n+1}(φ_n ⊗̃ φ_1) + J_n(φ_n ∗ φ_1), path by path.

use std::sync::Arc;

use local_malliavin::chaos::{multiple_integral, product_identity_residual, SimplexIntegrand};
use local_malliavin::harness::smooth_symmetric;
use local_malliavin::levy::{simulate_path, Atom, JumpSet, LevyMeasure, LevyTriplet};
use local_malliavin::mc::MCConfig;

fn main() -> local_malliavin::Result<()> {
    let nu = LevyMeasure::discrete(vec![Atom { size: 1.0, mass: 3.75 }, Atom { size: -2.0, mass: 1.25 }])?;
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0)?);
    let theta = JumpSet::nonzero();
    let phi_1 = SimplexIntegrand::single(|t, x| (2.0 * t).cos() * x, |t, x| -2.0 * (2.0 * t).sin() * x);

    let mc = MCConfig::new(1000, 5);
    for n in 1..=4 {
        let phi_n = smooth_symmetric(n);
        let worst = mc
            .map(|_, seed| -> local_malliavin::Result<f64> {
                let path = simulate_path(&triplet, 2, seed)?;
                Ok(product_identity_residual(&path, &theta, &phi_n, &phi_1)?.relative())
            })
            .into_iter()
            .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))?;
        println!("n = {n}: max relative residual {worst:.2e}");
    }

    let path = simulate_path(&triplet, 2, mc.seed(0))?;
    println!("{} jumps, J_2 = {:.6}", path.jumps.len(), multiple_integral(&path, &theta, &smooth_symmetric(2))?);
    Ok(())
}
