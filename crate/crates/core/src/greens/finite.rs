//! Products of `M` complex Gaussian matrices at finite `M`.
//!
//! The block trick turns the product into a cyclic `M × M` block matrix in a
//! variable `w` with `w^M = z`. Its self-energy couples only to the first row
//! `c_0 … c_{M-1}` of the inverse of a circulant matrix, which a 2×2 transfer
//! matrix solves in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{density_from_zg, near_boundary, DensityValue, GapSolution};
use crate::curve::{BoundaryCurve, Band};
use crate::error::{Error, Result};
use crate::special::brent;

/// A point `w` of the block variable, with `w^M = z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WPoint {
    pub w: Complex64,
}

impl WPoint {
    pub fn new(w: Complex64) -> Self {
        WPoint { w }
    }

    /// The principal `M`-th root of `z`.
    pub fn from_z(z: Complex64, m: usize) -> Self {
        WPoint {
            w: Complex64::from_polar(z.norm().powf(1.0 / m as f64), z.arg() / m as f64),
        }
    }

    fn from_log_polar(l: f64, phi: f64, m: usize) -> Self {
        WPoint {
            w: Complex64::from_polar((l / m as f64).exp(), phi / m as f64),
        }
    }
}

/// Closed-form first row of the inverse circulant.
///
/// The circulant has first row `(a, -w̄, 0, …, 0, -w)` with
/// `a = 1 + |w|² - α²b²`, so `c_k` obeys
/// `-w c_{k+1} + a c_k - w̄ c_{k-1} = δ_{k0}` with indices mod `M`. The
/// transfer matrix of this recurrence has eigenvalues `Λ± = δ e^{±u}`, with
/// `δ = |w|/w` and `a = 2|w| cosh u`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSolution {
    pub w: Complex64,
    pub a: f64,
    pub delta: Complex64,
    pub u: Complex64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub c: Vec<Complex64>,
}

/// Below this `|u|` the two transfer eigenvalues are treated as coincident.
const CONFLUENT_U: f64 = 1e-6;

impl TransferSolution {
    /// Largest residual of the recurrence and its cyclic boundary condition.
    pub fn recurrence_residual(&self) -> f64 {
        let m = self.c.len();
        (0..m)
            .map(|k| {
                let next = self.c[(k + 1) % m];
                let prev = self.c[(k + m - 1) % m];
                let rhs = if k == 0 { 1.0 } else { 0.0 };
                (-self.w * next + self.a * self.c[k] - self.w.conj() * prev - rhs).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `g_11 = w̄ c_0 - conj(c_{M-1})`; the resolvent is `G(z) = g_11 / w^{M-1}`.
    pub fn g11(&self) -> Complex64 {
        self.w.conj() * self.c[0] - self.c[self.c.len() - 1].conj()
    }
}

/// Solves the cyclic string `c_0 … c_{M-1}` at `β = α²b²`.
///
/// ```
/// use matdiff::{transfer_ck, Complex64, WPoint};
///
/// let t = transfer_ck(WPoint::new(Complex64::new(0.9, 0.4)), -0.3, 0.2, 5).unwrap();
/// assert!(t.recurrence_residual() < 1e-12);
/// ```
pub fn transfer_ck(w: WPoint, b2: f64, alpha: f64, m: usize) -> Result<TransferSolution> {
    if m < 2 {
        return Err(Error::invalid("the cyclic string needs M >= 2"));
    }
    transfer_beta(w.w, alpha * alpha * b2, m)
}

fn transfer_beta(w: Complex64, beta: f64, m: usize) -> Result<TransferSolution> {
    let aw = w.norm();
    if aw == 0.0 || !aw.is_finite() {
        return Err(Error::SingularPoint(w));
    }
    let a = 1.0 + aw * aw - beta;
    let delta = aw / w;
    let u = Complex64::new(a / (2.0 * aw), 0.0).acosh();
    let lp = delta * u.exp();
    let lm = delta * (-u).exp();

    let c = if u.norm() < CONFLUENT_U {
        check_resonance(delta, m)?;
        (0..m).map(|k| f_prime(delta, k, m) / w).collect()
    } else {
        check_resonance(lp, m)?;
        check_resonance(lm, m)?;
        let scale = w * (lp - lm);
        (0..m).map(|k| (f_ratio(lp, k, m) - f_ratio(lm, k, m)) / scale).collect()
    };
    Ok(TransferSolution {
        w,
        a,
        delta,
        u,
        lambda_plus: lp,
        lambda_minus: lm,
        c,
    })
}

fn check_resonance(lambda: Complex64, m: usize) -> Result<()> {
    if (lambda.powu(m as u32) - 1.0).norm() < 1e-13 {
        return Err(Error::Resonance { lambda, m });
    }
    Ok(())
}

/// `Λ^k / (Λ^M - 1)`, rewritten for `|Λ| > 1` so no power overflows.
fn f_ratio(l: Complex64, k: usize, m: usize) -> Complex64 {
    if l.norm() > 1.0 {
        let inv = l.inv();
        inv.powu((m - k) as u32) / (1.0 - inv.powu(m as u32))
    } else {
        l.powu(k as u32) / (l.powu(m as u32) - 1.0)
    }
}

/// Derivative of `Λ^k / (Λ^M - 1)` in `Λ`; the limit of the closed form as `Λ+ → Λ-`.
fn f_prime(l: Complex64, k: usize, m: usize) -> Complex64 {
    let lm = l.powu(m as u32);
    let den = lm - 1.0;
    let lk1 = if k == 0 { Complex64::new(0.0, 0.0) } else { l.powu(k as u32 - 1) };
    (k as f64 * lk1 * den - m as f64 * lm * l.powu(k as u32) / l) / (den * den)
}

/// `α c_0(β)`, which is real.
fn alpha_c0(w: Complex64, beta: f64, alpha: f64, m: usize) -> Result<f64> {
    Ok(alpha * transfer_beta(w, beta, m)?.c[0].re)
}

/// Smallest eigenvalue `min_k |w - ω_k|²` of the circulant at `β = 0`.
fn sigma_min2(w: Complex64, m: usize) -> f64 {
    // the nearest M-th root of unity
    let k = (w.arg() * m as f64 / (2.0 * PI)).round();
    let omega = Complex64::from_polar(1.0, 2.0 * PI * k / m as f64);
    (w - omega).norm_sqr()
}

/// Root `β` of `α c_0(β) = 1`, continued past the boundary.
///
/// `c_0(β) = (1/M) Σ_k 1/(|w - ω_k|² - β)` rises monotonically from 0 at
/// `β → -∞` to `+∞` at the smallest eigenvalue, so the root is unique. It is
/// negative inside the support and positive outside, where it is only a
/// continuation used by finite differences.
fn gap_beta(w: Complex64, alpha: f64, m: usize) -> Result<f64> {
    let top = sigma_min2(w, m);
    let hi = top * (1.0 - 1e-9);
    let lo = -2.0 * alpha;
    let f = |beta: f64| alpha_c0(w, beta, alpha, m).map(|v| v - 1.0).unwrap_or(f64::INFINITY);
    if f(hi) <= 0.0 {
        // only at points closer to a root of unity than rounding can resolve
        return Err(Error::SingularPoint(w));
    }
    brent("finite-M gap", lo, hi, f)
}

/// Solves `α c_0(b²) = 1` with `α = τ/M`.
///
/// Inside the support the root has `b² < 0`; otherwise the point is holomorphic
/// and `b² = 0`.
///
/// ```
/// use matdiff::{gap_complex_finite_m, Complex64, Region, WPoint};
///
/// let far = gap_complex_finite_m(WPoint::new(Complex64::new(10.0, 0.0)), 1.0, 4).unwrap();
/// assert_eq!(far.region, Region::Holomorphic);
/// let near_one = gap_complex_finite_m(WPoint::new(Complex64::new(1.0, 0.05)), 1.0, 4).unwrap();
/// assert!(near_one.b2 < 0.0);
/// ```
pub fn gap_complex_finite_m(w: WPoint, tau: f64, m: usize) -> Result<GapSolution> {
    check_tau_m(tau, m)?;
    let alpha = tau / m as f64;
    if alpha_c0(w.w, 0.0, alpha, m)? <= 1.0 {
        return Ok(GapSolution::holomorphic(alpha));
    }
    let beta = brent("finite-M gap", -2.0 * alpha, 0.0, |b| {
        alpha_c0(w.w, b, alpha, m).map(|v| v - 1.0).unwrap_or(f64::NAN)
    })?;
    Ok(GapSolution::nonholomorphic(alpha, beta / (alpha * alpha)))
}

fn check_tau_m(tau: f64, m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid("finite-M equations need M >= 2"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// The resolvent `G(z)` of the `M`-fold product at `z = w^M`.
///
/// Outside the support this is `1/(z - 1)`.
pub fn green_complex_finite_m(z: Complex64, tau: f64, m: usize) -> Result<Complex64> {
    let w = WPoint::from_z(z, m);
    let gap = gap_complex_finite_m(w, tau, m)?;
    let t = transfer_ck(w, gap.b2, gap.alpha, m)?;
    Ok(t.g11() / w.w.powu(m as u32 - 1))
}

/// Support boundary of the `M`-fold product: the level set `α c_0(0) = 1`.
///
/// Along each ray the gap function is scanned for its maximum, which is then
/// refined by golden-section search; the band is the interval around it where
/// `α c_0(0) > 1`. Refining the ridge keeps narrow bands near island tips.
pub fn boundary_complex_finite_m(tau: f64, m: usize, n_phi: usize) -> Result<BoundaryCurve> {
    check_tau_m(tau, m)?;
    BoundaryCurve::from_bands(n_phi, |phi| band_complex_finite_m(tau, m, phi))
}

/// Radial extent of the `M`-fold support along the ray at angle `phi`.
pub fn band_complex_finite_m(tau: f64, m: usize, phi: f64) -> Result<Band> {
    check_tau_m(tau, m)?;
    let alpha = tau / m as f64;
    let gap = |l: f64| {
        let w = WPoint::from_log_polar(l, phi, m).w;
        // a resonance sits at z = 1, which is always inside
        alpha_c0(w, 0.0, alpha, m).map(|v| v - 1.0).unwrap_or(1.0)
    };
    finite_band(tau + 6.0, gap)
}

fn finite_band(span: f64, gap: impl Fn(f64) -> f64) -> Result<Band> {
    let n = 600;
    let xs: Vec<f64> = (0..=n).map(|k| -span + 2.0 * span * k as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| gap(x)).collect();
    let imax = (0..=n).max_by(|&i, &j| ys[i].total_cmp(&ys[j])).unwrap();
    let (mut a, mut b) = (xs[imax.saturating_sub(1)], xs[(imax + 1).min(n)]);
    let mut peak = (xs[imax], ys[imax]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        let (fc, fd) = (gap(c), gap(d));
        if fc > peak.1 {
            peak = (c, fc);
        }
        if fd > peak.1 {
            peak = (d, fd);
        }
        if fc > fd {
            b = d;
        } else {
            a = c;
        }
    }
    if peak.1 <= 0.0 {
        return Ok(None);
    }
    let lo = if ys[0] > 0.0 {
        0.0
    } else {
        let j = (0..=imax).rev().find(|&j| ys[j] <= 0.0).unwrap();
        brent("finite-M boundary", xs[j], peak.0, &gap)?.exp()
    };
    let hi = match (imax..=n).find(|&j| ys[j] <= 0.0) {
        Some(j) => brent("finite-M boundary", peak.0, xs[j], &gap)?.exp(),
        None => return Err(Error::solver("finite-M boundary", "support reaches the edge of the scan")),
    };
    Ok(Some((lo, hi)))
}

/// The two-matrix boundary `(τ/2)(1 + r) = r² + 1 - 2r cos φ` in `z = r e^{iφ}`.
///
/// ```
/// use matdiff::boundary_complex_m2;
///
/// let c = boundary_complex_m2(2.0, 256).unwrap();
/// let r_max = c.curves[0].iter().map(|p| p.r).fold(0.0, f64::max);
/// assert!((r_max - 3.0).abs() < 1e-12);
/// ```
pub fn boundary_complex_m2(tau: f64, n_phi: usize) -> Result<BoundaryCurve> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    BoundaryCurve::from_bands(n_phi, |phi| Ok(conchoid_band(tau, phi)))
}

/// Radial interval of the two-matrix support along angle `φ`.
pub fn conchoid_band(tau: f64, phi: f64) -> Band {
    // r² - (2 cos φ + τ/2) r + 1 - τ/2 = 0
    let b = 2.0 * phi.cos() + 0.5 * tau;
    let c = 1.0 - 0.5 * tau;
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let hi = 0.5 * (b + sq);
    if hi <= 0.0 {
        return None;
    }
    // the smaller root via Vieta keeps precision when c is tiny
    let lo = c / hi;
    Some((lo.max(0.0), hi))
}

/// The paper-form `g_11` of the two-matrix product at `w`, with `w² = z`.
///
/// `g_11 = [w(w̄² - 1) - α²b² w̄] / det` with
/// `det = (α²b² - 1 + w²)(α²b² - 1 + w̄²) - α²b²(w + w̄)²`.
pub fn g11_complex_m2(w: WPoint, tau: f64) -> Result<Complex64> {
    let gap = gap_complex_finite_m(w, tau, 2)?;
    Ok(g11_m2_at(w.w, gap.alpha * gap.alpha * gap.b2))
}

pub(crate) fn g11_m2_at(w: Complex64, beta: f64) -> Complex64 {
    let wb = w.conj();
    let det = (beta - 1.0 + w * w) * (beta - 1.0 + wb * wb) - beta * (w + wb) * (w + wb);
    (w * (wb * wb - 1.0) - beta * wb) / det
}

/// Spectral density of the `M`-fold product at each `z`.
///
/// Outside the support the density is zero. Inside, `ρ = (1/π) ∂_z̄ G` is
/// differentiated numerically along the continued gap root.
pub fn density_finite_m(points: &[Complex64], tau: f64, m: usize) -> Result<Vec<DensityValue>> {
    use rayon::prelude::*;
    check_tau_m(tau, m)?;
    let alpha = tau / m as f64;
    points
        .par_iter()
        .map(|&z| density_finite_m_at(z, alpha, m))
        .collect()
}

fn density_finite_m_at(z: Complex64, alpha: f64, m: usize) -> Result<DensityValue> {
    if z.norm() == 0.0 {
        return Err(Error::SingularPoint(z));
    }
    let inside = |l: f64, phi: f64| {
        let w = WPoint::from_log_polar(l, phi, m).w;
        alpha_c0(w, 0.0, alpha, m).map(|v| v > 1.0).unwrap_or(true)
    };
    let (l, phi) = (z.norm().ln(), z.arg());
    if !inside(l, phi) {
        return Ok(DensityValue::ZERO);
    }
    let zg = |l: f64, phi: f64| {
        let w = WPoint::from_log_polar(l, phi, m).w;
        let beta = gap_beta(w, alpha, m).ok()?;
        let t = transfer_beta(w, beta, m).ok()?;
        // the (1,1) block of the cyclic resolvent is w^{M-1} G(z), so z·G = w·g11
        Some(w * t.g11())
    };
    let mut d = density_from_zg(l, phi, zg).ok_or_else(|| Error::solver("finite-M density", "no gap root near the point"))?;
    if near_boundary(l, phi, inside) {
        d.reliable = false;
    }
    Ok(d)
}
