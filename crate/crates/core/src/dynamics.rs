//! Drift and diffusion matrices of the linearized quadrature dynamics and
//! the stationary covariance matrix they determine.
//!
//! Quadrature ordering is (X_m, Y_m, X_a, Y_a, X_b, Y_b) with
//! X = (o + o†)/√2, Y = (o − o†)/(i√2), so the vacuum variance is 1/2.
//! All rates are divided by [`KAPPA_REF`] before assembly.

use crate::error::{Error, Result};
use crate::params::{DerivedParams, PhysicalParams};
use crate::smallmat::{
    eigen_real_parts, frobenius_norm, hermitian_eigenvalues, lyapunov_residual, lyapunov_solve_with_margin,
    stability_margin, Mat,
};
use crate::{EPS_STAB_REL, KAPPA_REF};

pub const MAGNON: usize = 0;
pub const OPTICAL: usize = 1;
pub const MICROWAVE: usize = 2;

/// Relative Lyapunov residual accepted from the direct solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    /// 6×6 drift matrix in units of κ_ref.
    pub a: Mat,
    /// 6×6 diagonal diffusion matrix in units of κ_ref.
    pub d: Mat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// Largest eigenvalue real part of the drift matrix, κ_ref units.
    pub max_real_eig: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub v: Mat,
    pub max_real_eig: f64,
    /// ‖AV + VAᵀ + D‖_F / ‖D‖_F.
    pub residual: f64,
}

pub fn build_matrices(dp: &DerivedParams, p: &PhysicalParams) -> SystemMatrices {
    let s = 1.0 / KAPPA_REF;
    let (km, ka, kb) = (p.kappa_m * s, dp.kappa_a * s, p.kappa_b * s);
    let (dm, da, db) = (p.delta_m * s, p.delta_a * s, p.delta_b * s);
    let g = dp.big_g_ma * s;
    let gb = p.g_mb * s;

    #[rustfmt::skip]
    let a = Mat::from_rows(&[
        [-km,  dm,  0.0, -g,   0.0,  gb ],
        [-dm, -km, -g,    0.0, -gb,  0.0],
        [0.0, -g,  -ka,   da,  0.0,  0.0],
        [-g,   0.0, -da, -ka,  0.0,  0.0],
        [0.0,  gb,  0.0,  0.0, -kb,  db ],
        [-gb,  0.0, 0.0,  0.0, -db, -kb ],
    ]);
    let dmag = km * (2.0 * dp.n_m + 1.0);
    let dopt = ka * (2.0 * dp.n_a + 1.0);
    let dmw = kb * (2.0 * dp.n_b + 1.0);
    let d = Mat::diag(&[dmag, dmag, dopt, dopt, dmw, dmw]);
    SystemMatrices { a, d }
}

/// Routh–Hurwitz stability realized through the eigenvalue real parts of
/// the drift matrix, with margin −10⁻⁹·max|A_ij|.
pub fn check_stability(m: &SystemMatrices) -> Result<Stability> {
    check_stability_with(m, EPS_STAB_REL)
}

pub fn check_stability_with(m: &SystemMatrices, eps_rel: f64) -> Result<Stability> {
    let max_real_eig = eigen_real_parts(&m.a)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Stability {
        stable: max_real_eig < stability_margin(&m.a, eps_rel),
        max_real_eig,
    })
}

pub fn steady_state(m: &SystemMatrices) -> Result<SteadyState> {
    steady_state_with(m, EPS_STAB_REL)
}

pub fn steady_state_with(m: &SystemMatrices, eps_rel: f64) -> Result<SteadyState> {
    let st = check_stability_with(m, eps_rel)?;
    if !st.stable {
        return Err(Error::Unstable {
            max_real_eig: st.max_real_eig,
        });
    }
    let v = lyapunov_solve_with_margin(&m.a, &m.d, eps_rel)?;
    let residual = frobenius_norm(&lyapunov_residual(&m.a, &v, &m.d)) / frobenius_norm(&m.d);
    if residual > RESIDUAL_TOL {
        return Err(Error::SingularSolve);
    }
    Ok(SteadyState {
        v,
        max_real_eig: st.max_real_eig,
        residual,
    })
}

/// Smallest eigenvalue of the Hermitian matrix V + (i/2)Ω. Non-negative for
/// every physical Gaussian covariance matrix.
pub fn uncertainty_min_eig(v: &Mat) -> f64 {
    let modes = v.rows() / 2;
    hermitian_eigenvalues(v, &Mat::symplectic_form(modes).scale(0.5))[0]
}
