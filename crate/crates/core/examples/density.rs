//! Terminal laws: atoms, histograms and kernel density estimates.

use std::sync::Arc;

use local_malliavin::levy::{simulate_path, LevyMeasure, LevyTriplet};
use local_malliavin::mc::MCConfig;
use local_malliavin::sde::{
    density_experiment, derivative_diffusion_d0, solve_diffusion, stopping_time_s, AdditiveJumpSDE, Conditioning, DiffusionSDE,
    SdeModel,
};

fn main() -> local_malliavin::Result<()> {
    let mc = MCConfig::new(10_000, 1);
    let nu = LevyMeasure::two_sided_exponential(1.0, 1.5, 1.0, 1.5, 0.05, 6.0)?;
    let jumps = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0)?);
    let model = SdeModel::Additive(AdditiveJumpSDE::new(|z| z + z.tanh(), |z| 1.0 + 1.0 / z.cosh().powi(2), |y| y, 0.2));
    for cond in [Conditioning::NoJumps, Conditioning::AtLeastOneJump] {
        let r = density_experiment(&model, &jumps, 2, &mc, cond)?;
        println!("{cond:?}: {} paths, atom statistic {:.2e}", r.n_conditioned, r.atom_statistic);
    }

    // No noise until the solution crosses 0.5, then a diffusion.
    let gated = DiffusionSDE::new(
        |_| 1.0,
        |_| 0.0,
        |z| if z > 0.5 { 0.3 * (z - 0.5).powi(2) } else { 0.0 },
        |z| if z > 0.5 { 0.6 * (z - 0.5) } else { 0.0 },
        |_| 0.0,
        0.0,
    );
    let brownian = Arc::new(LevyTriplet::new(0.0, 1.0, LevyMeasure::zero(), 1.0)?);
    let path = simulate_path(&brownian, 256, 3)?;
    let traj = solve_diffusion(&path, &gated);
    let d = derivative_diffusion_d0(&path, &gated)?;
    println!("S = {:.4}, Z_T = {:.4}, D_0.25 Z_T = {:.4}, D_0.9 Z_T = {:.4}", stopping_time_s(&traj, &gated), traj.terminal(), d.value(0.25), d.value(0.9));

    let r = density_experiment(&SdeModel::Diffusion(gated), &brownian, 256, &MCConfig::new(5000, 1), Conditioning::SBeforeHorizon)?;
    println!("bandwidth {:.4}; histogram of Z_T:", r.bandwidth);
    let peak = *r.histogram.counts.iter().max().unwrap_or(&1) as f64;
    for (i, c) in r.histogram.counts.iter().enumerate().step_by(2) {
        println!("{:7.3} {}", r.histogram.edges[i], "#".repeat((40.0 * *c as f64 / peak) as usize));
    }
    Ok(())
}
