//! Large-N resolvents of the products and the supports they imply.
//!
//! Every function here works with the Green's function
//! `G(z) = lim (1/N) <Tr (z - Y)^{-1}>`. Outside the eigenvalue support `G` is
//! holomorphic; inside, the self-consistent solution with a nonzero
//! off-diagonal gap `b² = g·g̃` takes over, and the density is
//! `ρ = (1/π) ∂G/∂z̄`.
//!
//! The gap is reported with the sign that falls out of the equations:
//! inside the support `b²` is negative, on the boundary it vanishes.

mod asymptotic;
mod finite;
mod pair;

pub use asymptotic::*;
pub use finite::*;
pub use pair::*;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use crate::error::Result;

/// Which solution of the gap equations holds at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Outside the support: `b² = 0` and `G` is analytic.
    Holomorphic,
    /// Inside the support: `b² < 0`.
    Nonholomorphic,
}

/// Self-consistent gap quantities at one point.
///
/// The gauge `g = 1, g̃ = b²` is used on the nonholomorphic branch; only the
/// product is physical. `h`, `h̃` and `d² = (1+αh)(1+αh̃)` are present for the
/// hermitian models only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapSolution {
    pub b2: f64,
    pub g: Complex64,
    pub g_tilde: Complex64,
    pub h: Option<Complex64>,
    pub h_tilde: Option<Complex64>,
    pub d2: Option<Complex64>,
    pub alpha: f64,
    pub region: Region,
}

impl GapSolution {
    pub(crate) fn holomorphic(alpha: f64) -> Self {
        GapSolution {
            b2: 0.0,
            g: Complex64::new(0.0, 0.0),
            g_tilde: Complex64::new(0.0, 0.0),
            h: None,
            h_tilde: None,
            d2: None,
            alpha,
            region: Region::Holomorphic,
        }
    }

    pub(crate) fn nonholomorphic(alpha: f64, b2: f64) -> Self {
        GapSolution {
            b2,
            g: Complex64::new(1.0, 0.0),
            g_tilde: Complex64::new(b2, 0.0),
            region: Region::Nonholomorphic,
            ..GapSolution::holomorphic(alpha)
        }
    }

    pub fn is_inside(&self) -> bool {
        self.region == Region::Nonholomorphic
    }
}

/// A density value with its imaginary residue and a reliability flag.
///
/// Values within a couple of finite-difference steps of the boundary, or next
/// to an angular tip of the support, are flagged unreliable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    pub imag: f64,
    pub reliable: bool,
}

impl DensityValue {
    pub const ZERO: DensityValue = DensityValue {
        value: 0.0,
        imag: 0.0,
        reliable: true,
    };
}

/// Step of the log-polar finite differences.
pub const FD_STEP: f64 = 1e-4;

/// `ρ = (1/π) ∂_z̄ G` from `zg(L, φ) = z·G(z)` with `z = e^{L + iφ}`.
///
/// Since `∂_z̄ = (∂_L + i∂_φ) / (2z̄)` and `z` itself is annihilated by
/// `∂_L + i∂_φ`, the density is `(∂_L + i∂_φ) zg / (2π|z|²)`. `zg` may return
/// `None` where the nonholomorphic solution stops existing; the derivative
/// then falls back to a one-sided difference and is flagged unreliable.
pub(crate) fn density_from_zg(
    l: f64,
    phi: f64,
    zg: impl Fn(f64, f64) -> Option<Complex64>,
) -> Option<DensityValue> {
    let h = FD_STEP;
    let centre = zg(l, phi)?;
    let mut reliable = true;
    let mut diff = |a: Option<Complex64>, b: Option<Complex64>| match (a, b) {
        (Some(a), Some(b)) => Some((a - b) / (2.0 * h)),
        (Some(a), None) => {
            reliable = false;
            Some((a - centre) / h)
        }
        (None, Some(b)) => {
            reliable = false;
            Some((centre - b) / h)
        }
        (None, None) => None,
    };
    let d_l = diff(zg(l + h, phi), zg(l - h, phi))?;
    let d_phi = diff(zg(l, phi + h), zg(l, phi - h))?;
    let rho = (d_l + Complex64::i() * d_phi) / (2.0 * PI * (2.0 * l).exp());
    Some(DensityValue {
        value: rho.re,
        imag: rho.im,
        reliable,
    })
}

/// Whether any of the four points at distance `2·FD_STEP` in `(L, φ)` lies
/// in a different region than the centre.
pub(crate) fn near_boundary(l: f64, phi: f64, inside: impl Fn(f64, f64) -> bool) -> bool {
    let d = 2.0 * FD_STEP;
    let c = inside(l, phi);
    [(d, 0.0), (-d, 0.0), (0.0, d), (0.0, -d)]
        .iter()
        .any(|&(a, b)| inside(l + a, phi + b) != c)
}

/// Total mass `∫ρ dA = ∫∫ ρ r² dL dφ` by the midpoint rule on a log-polar grid.
///
/// `rho` receives one ray of `nl` points at a time, so per-angle solves can
/// be shared. Rays are evaluated in parallel and summed in order.
pub fn integrate_log_polar(
    l_range: (f64, f64),
    phi_range: (f64, f64),
    nl: usize,
    nphi: usize,
    rho: impl Fn(&[Complex64]) -> Result<Vec<DensityValue>> + Sync,
) -> Result<f64> {
    let dl = (l_range.1 - l_range.0) / nl as f64;
    let dphi = (phi_range.1 - phi_range.0) / nphi as f64;
    let ls: Vec<f64> = (0..nl).map(|i| l_range.0 + (i as f64 + 0.5) * dl).collect();
    let rows = (0..nphi)
        .into_par_iter()
        .map(|j| {
            let phi = phi_range.0 + (j as f64 + 0.5) * dphi;
            let ray: Vec<Complex64> = ls.iter().map(|&l| Complex64::from_polar(l.exp(), phi)).collect();
            let values = rho(&ray)?;
            Ok(values.iter().zip(&ls).map(|(d, &l)| d.value * (2.0 * l).exp()).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rows.iter().sum::<f64>() * dl * dphi)
}
