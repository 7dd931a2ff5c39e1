//! Solutions driven by jumps in {1/m < |x| < m} converge as m grows.

use std::sync::Arc;

use local_malliavin::levy::{LevyMeasure, LevyTriplet};
use local_malliavin::mc::MCConfig;
use local_malliavin::sde::{truncation_convergence_report, AdditiveJumpSDE};

fn main() -> local_malliavin::Result<()> {
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.0, LevyMeasure::gamma_like(1.0, 1.0)?, 1.0)?);
    let sde = AdditiveJumpSDE::new(|z| z + z.tanh(), |z| 1.0 + 1.0 / z.cosh().powi(2), |y| y, 0.2).with_ode_steps(512);
    let r = truncation_convergence_report(&sde, &triplet, &[2.5, 5.0, 10.0, 20.0], 1000.0, &MCConfig::new(5000, 1))?;
    for row in &r.rows {
        println!("m = {:5.1}: E|Z^m - Z^ref|² = {:.3e} ± {:.1e}", row.level, row.mse.mean, row.mse.stderr);
    }
    println!("strictly decreasing: {}", r.strictly_decreasing);
    Ok(())
}
