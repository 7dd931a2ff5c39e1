//! An increasing drift makes every jump contribute with the same sign, so the
//! derivative of Z_T is nonzero on every path with a jump.

use std::sync::Arc;

use local_malliavin::levy::{simulate_path, LevyMeasure, LevyTriplet};
use local_malliavin::mc::MCConfig;
use local_malliavin::sde::{derivative_additive, monotone_drift_experiment, monotone_weight, AdditiveJumpSDE, JumpSde, Monotonicity};

fn main() -> local_malliavin::Result<()> {
    let nu = LevyMeasure::two_sided_exponential(1.0, 1.5, 1.0, 1.5, 0.05, 6.0)?;
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0)?);
    let sde = AdditiveJumpSDE::new(|z| z + z.tanh(), |z| 1.0 + 1.0 / z.cosh().powi(2), |y| y, 0.2);

    let mc = MCConfig::new(10_000, 1);
    let path = (0..)
        .map(|i| simulate_path(&triplet, 2, mc.seed(i)))
        .find(|p| p.as_ref().map_or(true, |p| p.jumps.len() >= 3))
        .unwrap()?;
    let traj = sde.solve(&path);
    let d = derivative_additive(&path, &sde, &monotone_weight(sde.h.clone(), Monotonicity::Increasing));
    println!("Z_T = {:.6} after {} jumps", traj.terminal, path.jumps.len());
    for s in d.steps() {
        println!("  step at {:.4}: coefficient {:+.6}", s.time, s.coeff);
    }

    let r = monotone_drift_experiment(&sde, Monotonicity::Increasing, &triplet, &mc, 1e-12)?;
    println!(
        "{} of {} paths with a jump have a nonzero derivative (fraction {}), all coefficients positive: {}",
        r.n_positive, r.n_with_jump, r.fraction_positive_given_jump, r.all_coefficients_positive
    );
    Ok(())
}
