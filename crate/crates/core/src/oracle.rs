//! Independent checks of the steady state: direct time integration of the
//! covariance flow dV/dt = AV + VAᵀ + D, and η⁻ from the symplectic spectrum
//! of the partially transposed two-mode covariance.

use crate::dynamics::SystemMatrices;
use crate::entanglement::BipartiteCov;
use crate::error::{Error, Result};
use crate::smallmat::{eigenvalues, frobenius_norm, lyapunov_residual, Mat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    /// Step, κ_ref⁻¹ units.
    pub dt: f64,
    pub t_max: f64,
    /// Stationarity threshold on ‖dV/dt‖_F.
    pub tol: f64,
}

impl IntegrationSpec {
    /// dt = 10⁻³, t_max = 50/|max_real_eig|, tol = 10⁻⁸.
    pub fn default_for(max_real_eig: f64) -> Self {
        IntegrationSpec {
            dt: 1e-3,
            t_max: 50.0 / max_real_eig.abs(),
            tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_max > self.dt && self.tol > 0.0) {
            return Err(Error::Domain(format!("invalid integration spec {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrated {
    pub v: Mat,
    pub t: f64,
    pub steps: usize,
    /// ‖AV + VAᵀ + D‖_F at the returned V.
    pub residual: f64,
}

/// One classical fourth-order Runge–Kutta step of the covariance flow,
/// symmetrized.
pub fn rk4_step(a: &Mat, d: &Mat, v: &Mat, dt: f64) -> Mat {
    let f = |x: &Mat| lyapunov_residual(a, x, d);
    let k1 = f(v);
    let k2 = f(&v.add(&k1.scale(dt / 2.0)));
    let k3 = f(&v.add(&k2.scale(dt / 2.0)));
    let k4 = f(&v.add(&k3.scale(dt)));
    let incr = k1
        .add(&k2.scale(2.0))
        .add(&k3.scale(2.0))
        .add(&k4)
        .scale(dt / 6.0);
    v.add(&incr).symmetrized()
}

/// Fixed-step RK4 until ‖dV/dt‖_F < tol or t_max. The stability of `m` is a
/// precondition, not checked here.
pub fn integrate_covariance(m: &SystemMatrices, spec: &IntegrationSpec, v0: &Mat) -> Result<Integrated> {
    spec.validate()?;
    let mut v = v0.symmetrized();
    let mut t = 0.0;
    let mut steps = 0;
    loop {
        let residual = frobenius_norm(&lyapunov_residual(&m.a, &v, &m.d));
        if residual < spec.tol {
            return Ok(Integrated {
                v,
                t,
                steps,
                residual,
            });
        }
        if t >= spec.t_max {
            return Err(Error::IntegrationNoConvergence {
                residual,
                tol: spec.tol,
            });
        }
        v = rk4_step(&m.a, &m.d, &v, spec.dt);
        steps += 1;
        t = steps as f64 * spec.dt;
    }
}

/// Smallest symplectic eigenvalue of the partial transpose, computed as
/// the smallest |λ| over the spectrum of Ω₄·Ṽ, where Ṽ is the 4×4
/// covariance with the second mode's Y row and column negated.
pub fn brute_force_eta(b: &BipartiteCov) -> Result<f64> {
    let p = Mat::diag(&[1.0, 1.0, 1.0, -1.0]);
    let vt = p.matmul(&b.assembled()).matmul(&p);
    let m = Mat::symplectic_form(2).matmul(&vt);
    Ok(eigenvalues(&m)?
        .into_iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min))
}
