//! Two-mode reductions of the stationary covariance matrix and their
//! logarithmic negativity.

use std::fmt;

use crate::dynamics::{MAGNON, MICROWAVE, OPTICAL};
use crate::error::{Error, Result};
use crate::smallmat::{det, Mat};

/// Floating-point slack allowed inside the square roots of η⁻.
pub const DISCRIMINANT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    LightMagnon,
    LightMicrowave,
    MicrowaveMagnon,
}

impl Pair {
    /// Order used by [`all_pairs`].
    pub const ALL: [Pair; 3] = [Pair::LightMagnon, Pair::LightMicrowave, Pair::MicrowaveMagnon];

    /// (first mode, second mode); the second mode is the one partially
    /// transposed by the oracle route.
    pub fn modes(self) -> (usize, usize) {
        match self {
            Pair::LightMagnon => (OPTICAL, MAGNON),
            Pair::LightMicrowave => (OPTICAL, MICROWAVE),
            Pair::MicrowaveMagnon => (MICROWAVE, MAGNON),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pair::LightMagnon => "light_magnon",
            Pair::LightMicrowave => "light_microwave",
            Pair::MicrowaveMagnon => "microwave_magnon",
        }
    }

    pub fn from_name(s: &str) -> Option<Pair> {
        Pair::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteCov {
    pub v1: Mat,
    pub v2: Mat,
    /// Cross block ⟨first, second⟩.
    pub v3: Mat,
    pub pair: Option<Pair>,
}

impl BipartiteCov {
    pub fn new(v1: Mat, v2: Mat, v3: Mat) -> Self {
        BipartiteCov {
            v1,
            v2,
            v3,
            pair: None,
        }
    }

    /// Splits a 4×4 covariance into its blocks.
    pub fn from_4x4(v: &Mat) -> Self {
        assert_eq!((v.rows(), v.cols()), (4, 4));
        BipartiteCov::new(
            v.select(&[0, 1], &[0, 1]),
            v.select(&[2, 3], &[2, 3]),
            v.select(&[0, 1], &[2, 3]),
        )
    }

    /// [[v1, v3], [v3ᵀ, v2]].
    pub fn assembled(&self) -> Mat {
        let mut m = Mat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = self.v1[(i, j)];
                m[(i + 2, j + 2)] = self.v2[(i, j)];
                m[(i, j + 2)] = self.v3[(i, j)];
                m[(j + 2, i)] = self.v3[(i, j)];
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementResult {
    pub e_n: f64,
    /// Smallest symplectic eigenvalue of the partially transposed state.
    pub eta_minus: f64,
}

pub fn reduce(v: &Mat, pair: Pair) -> BipartiteCov {
    assert_eq!((v.rows(), v.cols()), (6, 6), "expected a three-mode covariance");
    let (a, b) = pair.modes();
    let (ia, ib) = ([2 * a, 2 * a + 1], [2 * b, 2 * b + 1]);
    BipartiteCov {
        v1: v.select(&ia, &ia),
        v2: v.select(&ib, &ib),
        v3: v.select(&ia, &ib),
        pair: Some(pair),
    }
}

/// E_N = max(0, −ln 2η⁻) with
/// η⁻ = √(Σ − √(Σ² − 4 det V)) / √2 and Σ = det V₁ + det V₂ − 2 det V₃.
///
/// det V and the discriminant are expanded in the blocks,
/// det V = ab + c² − t and Σ² − 4 det V = (a − b)² − 4c(a + b) + 4t with
/// a, b, c the block determinants and t = tr(V₁JV₃JV₂JV₃ᵀJ), so weakly
/// correlated pairs keep full relative precision.
pub fn log_negativity(b: &BipartiteCov) -> Result<EntanglementResult> {
    let (da, db, dc) = (det(&b.v1), det(&b.v2), det(&b.v3));
    let j = Mat::symplectic_form(1);
    let t = {
        let m = b.v1.matmul(&j).matmul(&b.v3).matmul(&j).matmul(&b.v2).matmul(&j);
        let m = m.matmul(&b.v3.transpose()).matmul(&j);
        m[(0, 0)] + m[(1, 1)]
    };
    let sigma = da + db - 2.0 * dc;
    let det_full = da * db + dc * dc - t;
    let mut disc = (da - db) * (da - db) - 4.0 * dc * (da + db) + 4.0 * t;
    if disc < -DISCRIMINANT_SLACK {
        return Err(Error::NonPhysicalState(format!("discriminant {disc:.3e} < 0")));
    }
    disc = disc.max(0.0);
    // (Σ − √disc)/2 rewritten as 2 det V/(Σ + √disc) to avoid cancellation
    // when the two symplectic eigenvalues nearly coincide.
    let denom = sigma + disc.sqrt();
    if !(denom > 0.0) {
        return Err(Error::NonPhysicalState(format!("Σ + √disc = {denom:.3e} ≤ 0")));
    }
    let inner = 4.0 * det_full / denom;
    if inner < -DISCRIMINANT_SLACK {
        return Err(Error::NonPhysicalState(format!("Σ − √disc = {inner:.3e} < 0")));
    }
    let inner = inner.max(0.0);
    let eta_minus = (inner / 2.0).sqrt();
    if !(eta_minus > 0.0) {
        return Err(Error::NonPhysicalState("η⁻ = 0".into()));
    }
    Ok(EntanglementResult {
        e_n: (-(2.0 * eta_minus).ln()).max(0.0),
        eta_minus,
    })
}

/// Logarithmic negativity for every pair, in [`Pair::ALL`] order.
pub fn all_pairs(v: &Mat) -> Result<[EntanglementResult; 3]> {
    let mut out = [EntanglementResult {
        e_n: 0.0,
        eta_minus: 0.5,
    }; 3];
    for (slot, pair) in out.iter_mut().zip(Pair::ALL) {
        *slot = log_negativity(&reduce(v, pair))?;
    }
    Ok(out)
}
