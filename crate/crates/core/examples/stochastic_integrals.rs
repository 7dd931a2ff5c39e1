//! The compensated integral M(h) and its isometry E[M(h) M(g)] = ⟨h, g⟩.

use std::sync::Arc;

use local_malliavin::levy::{simulate_path, Atom, LevyMeasure, LevyTriplet};
use local_malliavin::mc::{Estimate, MCConfig};
use local_malliavin::random_measure::{integrate_m, mu_inner, Kernel};

fn main() -> local_malliavin::Result<()> {
    let nu = LevyMeasure::discrete(vec![Atom { size: 1.0, mass: 1.5 }, Atom { size: -2.0, mass: 0.5 }])?;
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.7, nu, 1.0)?);
    let h = Kernel::new(|t, x| t.cos() + 0.5 * x, |t, _| -t.sin());
    let g = Kernel::new(|t, x| 1.0 + t * x, |_, x| x);

    let mc = MCConfig::new(50_000, 3);
    let products: Vec<f64> = mc
        .map(|_, seed| {
            let p = simulate_path(&triplet, 128, seed)?;
            Ok(integrate_m(&p, &h)? * integrate_m(&p, &g)?)
        })
        .into_iter()
        .collect::<local_malliavin::Result<_>>()?;
    let est = Estimate::from_samples(&products);
    let exact = mu_inner(&h, &g, &triplet)?;
    println!("E[M(h)M(g)] = {:.4} ± {:.4}", est.mean, est.stderr);
    println!("⟨h, g⟩      = {exact:.4}");
    Ok(())
}
