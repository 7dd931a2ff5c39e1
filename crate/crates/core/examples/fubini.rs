//! ∫ M(f(u, ·)) du against M(∫ f(u, ·) du) under one shared quadrature.

use std::sync::Arc;

use local_malliavin::levy::{simulate_path, Atom, LevyMeasure, LevyTriplet};
use local_malliavin::random_measure::fubini_residual;
use local_malliavin::rng::path_seed;

fn main() -> local_malliavin::Result<()> {
    let nu = LevyMeasure::discrete(vec![Atom { size: 1.0, mass: 1.5 }, Atom { size: -2.0, mass: 0.5 }])?;
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.8, nu, 1.0)?);
    let f = |u: f64, t: f64, x: f64| (u + t).sin() + x * (u * t).cos() / (1.0 + x * x);
    for i in 0..5 {
        let path = simulate_path(&triplet, 64, path_seed(1, i))?;
        let r = fubini_residual(&path, f, 8)?;
        println!("path {i}: lhs {:+.12} rhs {:+.12} relative {:.1e}", r.lhs, r.rhs, r.relative());
    }
    Ok(())
}
