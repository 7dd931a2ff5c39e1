//! Pathwise derivatives of jump functionals against finite differences in the jump times.

use std::sync::Arc;

use local_malliavin::harness::random_smooth_integrand;
use local_malliavin::levy::{simulate_path, JumpSet, LevyMeasure, LevyTriplet};
use local_malliavin::malliavin::{derivative_m, derivative_m_alt, finite_difference_check, l2_norm_sq, WeightK};
use local_malliavin::random_measure::Kernel;
use local_malliavin::rng::{path_seed, stream, USER_STREAM};

fn main() -> local_malliavin::Result<()> {
    let nu = LevyMeasure::two_sided_exponential(1.0, 1.5, 0.6, 2.0, 0.05, 6.0)?;
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0)?);
    let theta = JumpSet::nonzero();
    let k = WeightK::new(|t, x| (1.0 + 0.5 * t.sin()) * x.tanh(), |t, x| 0.5 * t.cos() * x.tanh(), 1.5);
    let mut rng = stream(9, USER_STREAM);

    let mut seeds = (0..).map(|i| path_seed(9, i));
    let mut shown = 0;
    while shown < 6 {
        let path = simulate_path(&triplet, 2, seeds.next().unwrap())?;
        if path.jumps.len() < 2 {
            continue;
        }
        let phi = random_smooth_integrand(&mut rng, 2, 3.0);
        let fd = finite_difference_check(&path, &theta, &theta, &k, &phi, 0.4, 1e-5)?;
        println!(
            "{} jumps: analytic {:+.8} numeric {:+.8} rel.err {:.1e}",
            path.jumps.len(),
            fd.analytic,
            fd.numeric,
            fd.relative_error()
        );
        shown += 1;
    }

    // D M(h) two ways: the direct formula and the compensator form.
    let h = Kernel::new(|t, x| x * (-t).exp(), |t, x| -x * (-t).exp());
    let path = seeds
        .map(|s| simulate_path(&triplet, 64, s))
        .find(|p| p.as_ref().map_or(true, |p| p.jumps.len() >= 3))
        .unwrap()?;
    let a = derivative_m(&path, &h, &theta, &k);
    let b = derivative_m_alt(&path, &h, &theta, &k)?;
    let gap = (0..=20).map(|i| (a.value(i as f64 / 20.0) - b.value(i as f64 / 20.0)).abs()).fold(0.0, f64::max);
    println!("‖D M(h)‖² = {:.6}, max gap between representations {gap:.1e}", l2_norm_sq(&a));
    Ok(())
}
