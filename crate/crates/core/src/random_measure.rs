//! Pathwise integrals against the random measures `M`, `N` and `Ñ`.
//!
//! `M(h) = σ ∫ h(t,0) dW_t + ∫ h(t,x) x dÑ(t,x)`. The factor `x` belongs to
//! `M` only; `N` and `Ñ` integrals take the integrand as given.

use std::fmt;

use crate::error::{Error, Result};
use crate::func::{check_derivative, fn2, interior_points, Fn2};
use crate::levy::{JumpSet, LevyPath, LevyTriplet};
use crate::quadrature::{gl_integrate, CompositeRule};

/// Absolute target for compensator quadrature over jump sizes.
pub const COMPENSATOR_TOL: f64 = 1e-11;
/// Panels of the 10-point Gauss–Legendre rule used for time integrals.
pub const TIME_PANELS: usize = 8;

/// A deterministic kernel `h(t, x)` together with its time derivative.
#[derive(Clone)]
pub struct Kernel {
    h: Fn2,
    dt_h: Fn2,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Kernel")
    }
}

impl Kernel {
    pub fn new(
        h: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dt_h: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            h: fn2(h),
            dt_h: fn2(dt_h),
        }
    }

    pub fn from_arcs(h: Fn2, dt_h: Fn2) -> Self {
        Self { h, dt_h }
    }

    /// `h(t, x) = c`.
    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c, |_, _| 0.0)
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        (self.h)(t, x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        (self.dt_h)(t, x)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Kernel, b: f64) -> Kernel {
        let (h1, h2, d1, d2) = (
            self.h.clone(),
            other.h.clone(),
            self.dt_h.clone(),
            other.dt_h.clone(),
        );
        Kernel::new(
            move |t, x| a * h1(t, x) + b * h2(t, x),
            move |t, x| a * d1(t, x) + b * d2(t, x),
        )
    }

    /// Checks the time derivative by central differences and that `∫ h² dμ` is finite.
    pub fn validate(&self, triplet: &LevyTriplet) -> Result<()> {
        let t_end = triplet.horizon;
        let delta = 1e-5 * t_end;
        let mut xs = triplet.nu.support_points(4);
        xs.push(0.0);
        for &x in &xs {
            check_derivative(
                "kernel",
                |t| self.value(t, x),
                |t| self.dt(t, x),
                interior_points(0.0, t_end, 7, 2.0 * delta),
                delta,
                1e-5,
            )?;
        }
        let norm = mu_inner(self, self, triplet)?;
        if !norm.is_finite() {
            return Err(Error::Validation(
                "kernel is not square integrable for μ".into(),
            ));
        }
        Ok(())
    }

    /// Precomputes the compensator `∫∫ h(t,x) x dt ν(dx)` for `triplet`.
    pub fn prepare(&self, triplet: &LevyTriplet) -> Result<PreparedKernel> {
        let compensator = compensator(triplet, &JumpSet::nonzero(), |t, x| self.value(t, x) * x)?;
        Ok(PreparedKernel {
            kernel: self.clone(),
            sigma: triplet.sigma,
            compensator,
        })
    }
}

/// A kernel paired with its path-independent compensator.
#[derive(Clone, Debug)]
pub struct PreparedKernel {
    pub kernel: Kernel,
    pub sigma: f64,
    pub compensator: f64,
}

impl PreparedKernel {
    /// `M(h)` on `path`.
    pub fn integrate(&self, path: &LevyPath) -> f64 {
        let k = &self.kernel;
        brownian_integral(path, |t| self.sigma * k.value(t, 0.0))
            + path
                .jumps
                .iter()
                .map(|j| k.value(j.time, j.size) * j.size)
                .sum::<f64>()
            - self.compensator
    }
}

/// `∫_set ∫_0^T φ(t, x) dt ν(dx)`.
pub fn compensator<F>(triplet: &LevyTriplet, set: &JumpSet, phi: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let t_end = triplet.horizon;
    triplet.nu.integrate_on(
        set,
        |x| gl_integrate(|t| phi(t, x), 0.0, t_end, TIME_PANELS),
        COMPENSATOR_TOL,
    )
}

/// Left-point Itô sum `Σ g(t_i)(W(t_{i+1}) - W(t_i))`.
pub fn brownian_integral(path: &LevyPath, g: impl Fn(f64) -> f64) -> f64 {
    let (grid, w) = (&path.grid, &path.brownian);
    (0..grid.len() - 1)
        .map(|i| g(grid[i]) * (w[i + 1] - w[i]))
        .sum()
}

/// `M(h)` on `path`, computing the compensator on the fly.
pub fn integrate_m(path: &LevyPath, h: &Kernel) -> Result<f64> {
    Ok(h.prepare(&path.triplet)?.integrate(path))
}

/// `∫ φ dN = Σ_j φ(T_j, ΔX_j)`.
pub fn integrate_n(path: &LevyPath, phi: impl Fn(f64, f64) -> f64) -> f64 {
    path.jumps.iter().map(|j| phi(j.time, j.size)).sum()
}

/// `∫ φ dÑ`.
pub fn integrate_tilde_n(path: &LevyPath, phi: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let comp = compensator(&path.triplet, &JumpSet::nonzero(), &phi)?;
    Ok(integrate_n(path, &phi) - comp)
}

/// `∫ h g dμ` with `μ(dt, dx) = σ² dt δ₀(dx) + x² dt ν(dx)`.
pub fn mu_inner(h: &Kernel, g: &Kernel, triplet: &LevyTriplet) -> Result<f64> {
    let t_end = triplet.horizon;
    let s2 = triplet.sigma * triplet.sigma;
    let gauss = if s2 > 0.0 {
        s2 * gl_integrate(
            |t| h.value(t, 0.0) * g.value(t, 0.0),
            0.0,
            t_end,
            TIME_PANELS,
        )
    } else {
        0.0
    };
    let jumps = compensator(triplet, &JumpSet::nonzero(), |t, x| {
        h.value(t, x) * g.value(t, x) * x * x
    })?;
    Ok(gauss + jumps)
}

/// Both sides of the Fubini identity `∫ M(f(u,·)) du = M(∫ f(u,·) du)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FubiniResidual {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|`.
    pub residual: f64,
    /// Sum of the absolute values of the pieces, the natural roundoff scale.
    pub scale: f64,
}

impl FubiniResidual {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Evaluates both sides of the Fubini identity for `f(u, t, x)` with a shared
/// quadrature: the same `u` rule on both sides and the same fixed `(t, x)`
/// rule for the compensators.
pub fn fubini_residual<F>(path: &LevyPath, f: F, u_panels: usize) -> Result<FubiniResidual>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let tr = &path.triplet;
    let t_end = tr.horizon;
    let u_rule = CompositeRule::new(0.0, t_end, u_panels, 8);
    let t_rule = CompositeRule::new(0.0, t_end, 2 * TIME_PANELS, 10);
    let x_rule = tr.nu.fixed_rule(&JumpSet::nonzero(), 16, 10)?;

    // One evaluation of M(h) split into its pieces.
    let m_parts = |h: &dyn Fn(f64, f64) -> f64| -> [f64; 3] {
        let b = brownian_integral(path, |t| tr.sigma * h(t, 0.0));
        let j: f64 = path.jumps.iter().map(|r| h(r.time, r.size) * r.size).sum();
        let mut c = 0.0;
        for &(x, wx) in &x_rule {
            c += wx * x * t_rule.integrate(|t| h(t, x));
        }
        [b, j, c]
    };

    let mut lhs = 0.0;
    let mut scale = 0.0;
    for (&u, &w) in u_rule.nodes.iter().zip(&u_rule.weights) {
        let [b, j, c] = m_parts(&|t, x| f(u, t, x));
        lhs += w * (b + j - c);
        scale += w.abs() * (b.abs() + j.abs() + c.abs());
    }
    let averaged = |t: f64, x: f64| u_rule.integrate(|u| f(u, t, x));
    let [b, j, c] = m_parts(&averaged);
    let rhs = b + j - c;
    Ok(FubiniResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::levy::{simulate_path, Atom, JumpRecord, LevyMeasure};

    fn path_with(nu: LevyMeasure, sigma: f64, jumps: Vec<JumpRecord>) -> LevyPath {
        let tr = Arc::new(LevyTriplet::new(0.0, sigma, nu, 1.0).unwrap());
        LevyPath::from_parts(tr, vec![0.0, 0.5, 1.0], vec![0.0, 0.3, -0.2], jumps, 0).unwrap()
    }

    #[test]
    fn wiener_integral_of_one_is_terminal_value() {
        let p = path_with(LevyMeasure::zero(), 1.0, vec![]);
        assert_abs_diff_eq!(
            integrate_m(&p, &Kernel::constant(1.0)).unwrap(),
            -0.2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn compensated_poisson() {
        let jumps = vec![
            JumpRecord {
                time: 0.1,
                size: 1.0,
            },
            JumpRecord {
                time: 0.6,
                size: 1.0,
            },
            JumpRecord {
                time: 0.9,
                size: 1.0,
            },
        ];
        let p = path_with(LevyMeasure::poisson(1.0).unwrap(), 0.0, jumps);
        assert_abs_diff_eq!(
            integrate_m(&p, &Kernel::constant(1.0)).unwrap(),
            2.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            integrate_tilde_n(&p, |_, _| 1.0).unwrap(),
            2.0,
            epsilon = 1e-13
        );
        assert_eq!(integrate_n(&p, |_, _| 1.0), 3.0);
    }

    #[test]
    fn hand_evaluated_time_kernel() {
        let nu = LevyMeasure::discrete(vec![Atom {
            size: 2.0,
            mass: 1.0,
        }])
        .unwrap();
        let p = path_with(
            nu,
            0.0,
            vec![JumpRecord {
                time: 0.4,
                size: 2.0,
            }],
        );
        let h = Kernel::new(|t, _| t, |_, _| 1.0);
        assert_abs_diff_eq!(integrate_m(&p, &h).unwrap(), -0.2, epsilon = 1e-13);
    }

    #[test]
    fn n_integral_of_sizes() {
        let jumps = vec![
            JumpRecord {
                time: 0.2,
                size: 1.0,
            },
            JumpRecord {
                time: 0.5,
                size: -3.0,
            },
        ];
        let nu = LevyMeasure::discrete(vec![
            Atom {
                size: 1.0,
                mass: 1.0,
            },
            Atom {
                size: -3.0,
                mass: 1.0,
            },
        ])
        .unwrap();
        let p = path_with(nu, 0.0, jumps);
        assert_eq!(integrate_n(&p, |_, x| x), -2.0);
        assert_eq!(integrate_tilde_n(&p, |_, _| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn tilde_n_against_two_term_oracle_on_density() {
        let nu = LevyMeasure::two_sided_exponential(1.0, 1.0, 0.5, 2.0, 0.1, 5.0).unwrap();
        let tr = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0).unwrap());
        let p = simulate_path(&tr, 2, 7).unwrap();
        let phi = |t: f64, x: f64| (t * x).sin();
        // ∫_0^1 sin(tx) dt = (1 - cos x) / x
        let comp = tr.nu.integrate(|x| (1.0 - x.cos()) / x, 1e-12).unwrap();
        let direct = integrate_n(&p, phi) - comp;
        assert_abs_diff_eq!(integrate_tilde_n(&p, phi).unwrap(), direct, epsilon = 1e-9);
    }

    #[test]
    fn fubini_constant_in_u_and_product_kernel() {
        let nu = LevyMeasure::two_sided_exponential(1.0, 1.0, 1.0, 1.0, 0.2, 4.0).unwrap();
        let tr = Arc::new(LevyTriplet::new(0.0, 0.8, nu, 1.0).unwrap());
        for s in 0..10 {
            let p = simulate_path(&tr, 65, s).unwrap();
            let r = fubini_residual(&p, |_, t, x| t + x, 4).unwrap();
            assert!(r.relative() < 1e-12, "{r:?}");
            let r = fubini_residual(&p, |u, t, x| u * t * x, 4).unwrap();
            assert!(r.relative() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn kernel_validation_catches_wrong_derivative() {
        let tr = LevyTriplet::new(0.0, 1.0, LevyMeasure::poisson(1.0).unwrap(), 1.0).unwrap();
        Kernel::new(|t, x| t * t * x, |t, x| 2.0 * t * x)
            .validate(&tr)
            .unwrap();
        assert!(Kernel::new(|t, x| t * t * x, |t, x| t * x)
            .validate(&tr)
            .is_err());
    }

    #[test]
    fn mu_norm_matches_closed_form() {
        let nu = LevyMeasure::discrete(vec![Atom {
            size: 2.0,
            mass: 0.5,
        }])
        .unwrap();
        let tr = LevyTriplet::new(0.0, 0.7, nu, 2.0).unwrap();
        let h = Kernel::new(|t, _| t, |_, _| 1.0);
        // σ² ∫ t² dt + ν({2}) 4 ∫ t² dt over [0, 2]
        let expected = (0.49 + 0.5 * 4.0) * 8.0 / 3.0;
        assert_abs_diff_eq!(mu_inner(&h, &h, &tr).unwrap(), expected, epsilon = 1e-12);
    }
}
