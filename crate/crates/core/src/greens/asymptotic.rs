//! Infinite products, `M → ∞`.
//!
//! Both models reduce to the profile `f(s) = cosh U - (τ/2) sinh U / U` with
//! `s = U²` (see [`drift_profile`]). In log-polar coordinates
//! `z = e^{L + iφ}` the gap equations fix `s` as a function of the angle
//! alone, so the support at angle `φ` is an interval in `L`:
//!
//! * complex factors: `cos φ = f(s)`, support `|L| ≤ √s`;
//! * hermitian factors: `cos ψ = f(s)` with `φ = ψ - sin ψ / S(s)`,
//!   support `|L/2 + τ/4| ≤ √s`.
//!
//! Here `S(s) = sinh U / U`. The gap is `b² = (L² - s)/τ²` and
//! `b² = ((L/2 + τ/4)² - s)/τ²` respectively, negative inside.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{density_from_zg, near_boundary, DensityValue, Region};
use crate::curve::{Band, BoundaryCurve};
use crate::error::{Error, Result};
use crate::special::{brent, drift_profile, even_sinhc, expand_until};

type C = Complex64;

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

fn log_polar(z: C) -> Result<(f64, f64)> {
    let r = z.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::SingularPoint(z));
    }
    Ok((r.ln(), z.arg()))
}

/// Largest `s ≥ 0` with `f(s) = level`, for a level reached on the rising branch.
fn rising_root(level: f64, tau: f64) -> Result<Option<f64>> {
    if drift_profile(0.0, tau) > level {
        // f rises on s ≥ 0 for τ ≤ 6; for larger τ, f(0) < -2 is below any level
        return Ok(None);
    }
    if drift_profile(0.0, tau) == level {
        return Ok(Some(0.0));
    }
    let hi = expand_until(1.0, 1e6, |s| drift_profile(s, tau) > level)
        .ok_or_else(|| Error::solver("profile root", format!("no crossing of {level}")))?;
    brent("profile root", 0.0, hi, |s| drift_profile(s, tau) - level).map(Some)
}

/// `s(φ)` of the complex model: root of `f(s) = cos φ` with `s ≥ 0`.
pub fn complex_inf_s(phi: f64, tau: f64) -> Result<Option<f64>> {
    rising_root(phi.cos(), tau)
}

/// Gap state of the infinite complex product at `z = r e^{iφ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexInfState {
    /// `U²`, when the angle meets the support.
    pub s: Option<f64>,
    /// `U = √s`.
    pub u: Option<C>,
    pub b2: f64,
    pub region: Region,
    /// The resolvent `G(z)`.
    pub green: C,
}

/// Solves the infinite complex gap equation at `z = r e^{iφ}`.
///
/// ```
/// use matdiff::{solve_complex_inf, Region};
///
/// let inside = solve_complex_inf(1.0, 0.0, 1.0).unwrap();
/// assert_eq!(inside.region, Region::Nonholomorphic);
/// assert!(inside.b2 < 0.0);
/// let outside = solve_complex_inf(10.0, 0.0, 1.0).unwrap();
/// assert_eq!(outside.region, Region::Holomorphic);
/// ```
pub fn solve_complex_inf(r: f64, phi: f64, tau: f64) -> Result<ComplexInfState> {
    check_tau(tau)?;
    let z = C::from_polar(r, phi);
    let (l, phi) = log_polar(z)?;
    let s = complex_inf_s(phi, tau)?;
    let b2 = s.map(|s| (l * l - s) / (tau * tau)).unwrap_or(0.0);
    let inside = s.is_some() && b2 < 0.0;
    let green = if inside {
        complex_inf_zg(l, phi, s.unwrap(), tau) / z
    } else {
        1.0 / (z - 1.0)
    };
    Ok(ComplexInfState {
        s,
        u: s.map(|s| C::new(s.sqrt(), 0.0)),
        b2: if inside { b2 } else { 0.0 },
        region: if inside { Region::Nonholomorphic } else { Region::Holomorphic },
        green,
    })
}

/// `z·G = L/τ + 1/2 - (i/τ) sin φ / S(s)` on the nonholomorphic branch.
fn complex_inf_zg(l: f64, phi: f64, s: f64, tau: f64) -> C {
    C::new(l / tau + 0.5, -phi.sin() / (tau * even_sinhc(s)))
}

/// `G(z)` of the infinite complex product; `1/(z - 1)` off the support.
pub fn green_complex_inf(z: C, tau: f64) -> Result<C> {
    let (l, phi) = log_polar(z)?;
    Ok(solve_complex_inf(l.exp(), phi, tau)?.green)
}

/// Nonholomorphic `z·G` continued to both sides of the boundary.
pub fn green_complex_inf_nonholomorphic(z: C, tau: f64) -> Result<Option<C>> {
    check_tau(tau)?;
    let (l, phi) = log_polar(z)?;
    Ok(complex_inf_s(phi, tau)?.map(|s| complex_inf_zg(l, phi, s, tau) / z))
}

/// Eigenvalue density of the infinite complex product.
pub fn density_complex_inf(points: &[C], tau: f64) -> Result<Vec<DensityValue>> {
    check_tau(tau)?;
    points
        .par_iter()
        .map(|&z| {
            let (l, phi) = log_polar(z)?;
            let memo = AngleMemo::new(|phi| complex_inf_s(phi, tau).ok().flatten());
            let inside = |l: f64, phi: f64| matches!(memo.get(phi), Some(s) if l * l < s);
            if !inside(l, phi) {
                return Ok(DensityValue::ZERO);
            }
            let zg = |l: f64, phi: f64| memo.get(phi).map(|s| complex_inf_zg(l, phi, s, tau));
            let mut d = density_from_zg(l, phi, zg)
                .ok_or_else(|| Error::solver("complex density", "no gap root near the point"))?;
            if near_boundary(l, phi, inside) {
                d.reliable = false;
            }
            Ok(d)
        })
        .collect()
}

/// Support boundary of the infinite complex product.
///
/// Along the ray at angle `φ` the support is `e^{-√s} ≤ r ≤ e^{√s}`; the
/// boundary is `(τ/2)(r² - 1)/ln r = r² + 1 - 2r cos φ` and is invariant under
/// `r → 1/r`. For `τ ≥ 4` every ray meets the support and a hole opens.
///
/// ```
/// use matdiff::{boundary_complex_inf, Topology};
///
/// assert_eq!(boundary_complex_inf(3.9, 256).unwrap().topology, Topology::SimplyConnected);
/// assert_eq!(boundary_complex_inf(4.1, 256).unwrap().topology, Topology::Annulus);
/// ```
pub fn boundary_complex_inf(tau: f64, n_phi: usize) -> Result<BoundaryCurve> {
    check_tau(tau)?;
    BoundaryCurve::from_bands(n_phi, |phi| band_complex_inf(tau, phi))
}

/// Radial extent `(e^{-√s}, e^{√s})` of the infinite-product support at angle `phi`.
pub fn band_complex_inf(tau: f64, phi: f64) -> Result<Band> {
    Ok(complex_inf_s(phi, tau)?.map(|s| {
        let u = s.sqrt();
        ((-u).exp(), u.exp())
    }))
}

/// Residual of `(τ/2)(r² - 1)/ln r = r² + 1 - 2r cos φ` at a boundary point.
pub fn conformal_curve_residual(r: f64, phi: f64, tau: f64) -> f64 {
    let l = r.ln();
    // (r² - 1)/ln r = 2 r sinh(L)/L, continuous through r = 1
    let lhs = 0.5 * tau * 2.0 * r * even_sinhc(l * l);
    lhs - (r * r + 1.0 - 2.0 * r * phi.cos())
}

/// `τ` at which the complex support first reaches `z = -1`: the root of
/// `f(0) = cos π`, i.e. `1 - τ/2 = -1`.
pub fn critical_tau_complex_inf() -> Result<f64> {
    brent("critical time", 0.5, 20.0, |tau| drift_profile(0.0, tau) - PI.cos())
}

/// Gap state of the infinite hermitian product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermInfState {
    pub s: Option<f64>,
    pub u: Option<C>,
    /// Signed with `φ`.
    pub psi: f64,
    pub b2: f64,
    pub region: Region,
    /// Diagonal gap `h = z·G - 1`.
    pub h: C,
    pub green: C,
}

/// Angular data of the hermitian boundary equations at one `τ`.
///
/// `s` is parametrized by `ψ ∈ [0, ψ_top]` through the rising root of
/// `f(s) = cos ψ`. Solving for `ψ` rather than `s` keeps `ψ` accurate near
/// `φ = 0`, where `ψ(s)` has a square-root singularity.
#[derive(Clone, Copy, Debug)]
struct HermAngles {
    tau: f64,
    psi_top: f64,
    phi_top: f64,
}

impl HermAngles {
    fn new(tau: f64) -> Result<Self> {
        let f0 = drift_profile(0.0, tau);
        let psi_top = if f0 <= -1.0 { PI } else { f0.acos() };
        let s_lo = if f0 <= -1.0 {
            rising_root(-1.0, tau)?.expect("f(0) <= -1 so -1 is crossed")
        } else {
            0.0
        };
        Ok(HermAngles {
            tau,
            psi_top,
            phi_top: psi_top - psi_top.sin() / even_sinhc(s_lo),
        })
    }

    fn s_of_psi(&self, psi: f64) -> Result<f64> {
        Ok(rising_root(psi.cos(), self.tau)?.unwrap_or(0.0))
    }

    /// `φ(ψ) = ψ - sin ψ / S(s(ψ))`.
    fn phi_of_psi(&self, psi: f64) -> Result<f64> {
        Ok(psi - psi.sin() / even_sinhc(self.s_of_psi(psi)?))
    }

    /// `(s, ψ)` at angle `φ`, with `ψ` signed like `φ`.
    fn solve(&self, phi: f64) -> Result<Option<(f64, f64)>> {
        let target = phi.abs();
        if target > self.phi_top {
            return Ok(None);
        }
        let psi = if target == 0.0 {
            0.0
        } else if target == self.phi_top {
            self.psi_top
        } else {
            brent("hermitian angle", 0.0, self.psi_top, |psi| {
                self.phi_of_psi(psi).map(|p| p - target).unwrap_or(f64::NAN)
            })?
        };
        Ok(Some((self.s_of_psi(psi)?, psi.copysign(phi))))
    }
}

/// `s(φ)` of the hermitian model, with `ψ(φ)` signed like `φ`.
pub fn hermitian_inf_s(phi: f64, tau: f64) -> Result<Option<(f64, f64)>> {
    check_tau(tau)?;
    HermAngles::new(tau)?.solve(phi)
}

/// `z·G = L/(2τ) + 3/4 - (i/τ) sin ψ / S(s)`.
fn herm_zg(l: f64, s: f64, psi: f64, tau: f64) -> C {
    C::new(l / (2.0 * tau) + 0.75, -psi.sin() / (tau * even_sinhc(s)))
}

/// Solves the infinite hermitian gap equations at `z = r e^{iφ}`.
pub fn solve_hermitian_inf(r: f64, phi: f64, tau: f64) -> Result<HermInfState> {
    check_tau(tau)?;
    let z = C::from_polar(r, phi);
    let (l, phi) = log_polar(z)?;
    let sp = hermitian_inf_s(phi, tau)?;
    let centre = l / 2.0 + tau / 4.0;
    let b2 = sp.map(|(s, _)| (centre * centre - s) / (tau * tau)).unwrap_or(0.0);
    let inside = sp.is_some() && b2 < 0.0;
    let (zg, psi) = match sp {
        Some((s, psi)) if inside => (herm_zg(l, s, psi, tau), psi),
        _ => (1.0 + hermitian_holomorphic_h(z, tau)?, 0.0),
    };
    Ok(HermInfState {
        s: sp.map(|(s, _)| s),
        u: sp.map(|(s, _)| C::new(s.sqrt(), 0.0)),
        psi,
        b2: if inside { b2 } else { 0.0 },
        region: if inside { Region::Nonholomorphic } else { Region::Holomorphic },
        h: zg - 1.0,
        green: zg / z,
    })
}

/// `G(z)` of the infinite hermitian product.
pub fn green_hermitian_inf(z: C, tau: f64) -> Result<C> {
    let (l, phi) = log_polar(z)?;
    Ok(solve_hermitian_inf(l.exp(), phi, tau)?.green)
}

/// Nonholomorphic `G` continued to both sides of the boundary.
pub fn green_hermitian_inf_nonholomorphic(z: C, tau: f64) -> Result<Option<C>> {
    check_tau(tau)?;
    let (l, phi) = log_polar(z)?;
    Ok(hermitian_inf_s(phi, tau)?.map(|(s, psi)| herm_zg(l, s, psi, tau) / z))
}

/// Holomorphic gap `h`, the solution of `h z = (1 + h) e^{τh}`.
///
/// Points with `L > -τ/2` are reached along their ray from infinity, where
/// `h ≈ 1/z`; points with `L < -τ/2` from the origin, where `h ≈ -1 - z e^τ`.
/// Each ray leaves the support on the same side as its target, so the
/// continuation never crosses it when the target is outside.
pub fn hermitian_holomorphic_h(z: C, tau: f64) -> Result<C> {
    check_tau(tau)?;
    let (l, phi) = log_polar(z)?;
    let from_infinity = l > -tau / 2.0;
    let l0 = if from_infinity {
        l.max(0.0) + tau + 12.0
    } else {
        l.min(-tau) - 2.0 * tau - 12.0
    };
    let z0 = C::from_polar(l0.exp(), phi);
    let mut h = if from_infinity {
        1.0 / z0
    } else {
        -1.0 - z0 * tau.exp()
    };
    let steps = ((l - l0).abs() / 0.02).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let lk = l0 + (l - l0) * k as f64 / steps as f64;
        let zk = C::from_polar(lk.exp(), phi);
        h = newton_h(h, zk, tau)
            .ok_or_else(|| Error::solver("hermitian holomorphic branch", format!("lost the branch at {zk}")))?;
    }
    Ok(h)
}

fn newton_h(mut h: C, z: C, tau: f64) -> Option<C> {
    for _ in 0..60 {
        let e = (tau * h).exp();
        let f = h * z - (1.0 + h) * e;
        let df = z - e * (1.0 + tau * (1.0 + h));
        if df.norm() == 0.0 {
            return None;
        }
        let dh = f / df;
        h -= dh;
        if dh.norm() <= 1e-15 * (1.0 + h.norm()) {
            break;
        }
    }
    h.is_finite().then_some(h)
}

/// Eigenvalue density of the infinite hermitian product.
pub fn density_hermitian_inf(points: &[C], tau: f64) -> Result<Vec<DensityValue>> {
    check_tau(tau)?;
    let angles = HermAngles::new(tau)?;
    // the angle solve dominates, and a ray of points shares its stencil angles
    let mut needed: Vec<u64> = Vec::new();
    for &z in points {
        let (_, phi) = log_polar(z)?;
        for k in -2..=2 {
            needed.push((phi + k as f64 * super::FD_STEP).to_bits());
        }
    }
    needed.sort_unstable();
    needed.dedup();
    let solved: std::collections::HashMap<u64, Option<(f64, f64)>> = needed
        .par_iter()
        .map(|&bits| (bits, angles.solve(f64::from_bits(bits)).ok().flatten()))
        .collect();
    points
        .par_iter()
        .map(|&z| {
            let (l, phi) = log_polar(z)?;
            let memo = AngleMemo::new(|phi: f64| match solved.get(&phi.to_bits()) {
                Some(&v) => v,
                None => angles.solve(phi).ok().flatten(),
            });
            let inside = |l: f64, phi: f64| {
                let c = l / 2.0 + tau / 4.0;
                matches!(memo.get(phi), Some((s, _)) if c * c < s)
            };
            if !inside(l, phi) {
                return Ok(DensityValue::ZERO);
            }
            let zg = |l: f64, phi: f64| memo.get(phi).map(|(s, psi)| herm_zg(l, s, psi, tau));
            let mut d = density_from_zg(l, phi, zg)
                .ok_or_else(|| Error::solver("hermitian density", "no gap root near the point"))?;
            if near_boundary(l, phi, inside) {
                d.reliable = false;
            }
            Ok(d)
        })
        .collect()
}

/// Caches the per-angle solve; a finite-difference stencil revisits each
/// angle several times.
struct AngleMemo<T: Copy, F: Fn(f64) -> T> {
    solve: F,
    seen: std::cell::RefCell<Vec<(f64, T)>>,
}

impl<T: Copy, F: Fn(f64) -> T> AngleMemo<T, F> {
    fn new(solve: F) -> Self {
        AngleMemo {
            solve,
            seen: std::cell::RefCell::new(Vec::with_capacity(5)),
        }
    }

    fn get(&self, phi: f64) -> T {
        if let Some(&(_, v)) = self.seen.borrow().iter().find(|(p, _)| *p == phi) {
            return v;
        }
        let v = (self.solve)(phi);
        self.seen.borrow_mut().push((phi, v));
        v
    }
}

/// Support boundary of the infinite hermitian product.
///
/// Along the ray at angle `φ` the support is
/// `e^{-τ/2 - 2√s} ≤ r ≤ e^{-τ/2 + 2√s}`, which is symmetric under
/// `r → e^{-τ}/r`.
pub fn boundary_hermitian_inf(tau: f64, n_phi: usize) -> Result<BoundaryCurve> {
    check_tau(tau)?;
    let angles = HermAngles::new(tau)?;
    BoundaryCurve::from_bands(n_phi, |phi| {
        Ok(angles.solve(phi)?.map(|(s, _)| {
            let u = s.sqrt();
            ((-tau / 2.0 - 2.0 * u).exp(), (-tau / 2.0 + 2.0 * u).exp())
        }))
    })
}

/// Residuals of the two boundary equations at `(r, φ)`:
/// `cos ψ = f(U₀²)` and `φ = ψ - sin ψ / S(U₀²)` with `U₀ = L/2 + τ/4` and
/// `ψ` the solution at angle `φ`.
pub fn hermitian_boundary_residual(r: f64, phi: f64, tau: f64) -> Result<(f64, f64)> {
    let (_, psi) = hermitian_inf_s(phi, tau)?
        .ok_or_else(|| Error::invalid(format!("angle {phi} misses the support")))?;
    let u0 = r.ln() / 2.0 + tau / 4.0;
    let s = u0 * u0;
    Ok((
        (psi.cos() - drift_profile(s, tau)).abs(),
        (phi - (psi - psi.sin() / even_sinhc(s))).abs(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn critical_time_is_four() {
        assert!((critical_tau_complex_inf().unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_at_tau_four_passes_through_minus_one() {
        let s = complex_inf_s(PI, 4.0).unwrap().unwrap();
        assert!(s.abs() < 1e-12);
        assert!(conformal_curve_residual(1.0, PI, 4.0).abs() < 1e-12);
    }

    #[test]
    fn unit_circle_boundary_angle() {
        // r = 1 is on the boundary where cos φ = 1 - τ/2
        let tau: f64 = 1.5;
        let phi = (1.0 - tau / 2.0).acos();
        let s = complex_inf_s(phi, tau).unwrap().unwrap();
        assert!(s.abs() < 1e-12);
        let st = solve_complex_inf(1.0, phi * 0.9, tau).unwrap();
        assert_eq!(st.region, Region::Nonholomorphic);
    }

    #[test]
    fn far_point_is_holomorphic() {
        // for τ below about 1.5 the outer rim at φ = 0 lies beyond e^τ
        for tau in [2.0f64, 3.0, 5.0, 8.0] {
            let st = solve_complex_inf(tau.exp(), 0.3, tau).unwrap();
            assert_eq!(st.region, Region::Holomorphic);
        }
    }

    #[test]
    fn complex_boundary_matches_conformal_curve_and_inversion() {
        for tau in [1.0, 2.0, 5.0] {
            let b = boundary_complex_inf(tau, 128).unwrap();
            for curve in &b.curves {
                for p in curve {
                    assert!(conformal_curve_residual(p.r, p.phi, tau).abs() < 1e-8, "{tau} {p:?}");
                    let s = complex_inf_s(p.phi, tau).unwrap().unwrap();
                    let u = s.sqrt();
                    let mirrored = (1.0 / p.r).ln().abs();
                    assert!((mirrored - u).abs() < 1e-9 || s < 1e-8);
                }
            }
        }
    }

    #[test]
    fn complex_branches_match_on_boundary() {
        let tau = 1.0;
        for phi in [0.0, 0.3, 0.7, -0.5] {
            let s = complex_inf_s(phi, tau).unwrap().unwrap();
            for l in [s.sqrt(), -s.sqrt()] {
                let z = C::from_polar(l.exp(), phi);
                let inner = complex_inf_zg(l, phi, s, tau) / z;
                assert!((inner - 1.0 / (z - 1.0)).norm() < 1e-6, "phi {phi} l {l}");
            }
        }
    }

    #[test]
    fn green_is_real_on_positive_axis() {
        let g = green_complex_inf(c(1.2, 0.0), 1.0).unwrap();
        assert_eq!(g.im, 0.0);
    }

    #[test]
    fn complex_density_matches_closed_angular_form() {
        // ρ r² = (1/(2πτ)) (1 + d/dφ [sin φ / S(s(φ))])
        let tau = 2.0;
        let phi: f64 = 0.4;
        let z = C::from_polar(1.1, phi);
        let d = density_complex_inf(&[z], tau).unwrap()[0];
        let s = complex_inf_s(phi, tau).unwrap().unwrap();
        let fp = |s: f64| (drift_profile(s + 1e-6, tau) - drift_profile(s - 1e-6, tau)) / 2e-6;
        let sp = -phi.sin() / fp(s);
        let sc = even_sinhc(s);
        let dsc = (even_sinhc(s + 1e-6) - even_sinhc(s - 1e-6)) / 2e-6;
        let g = phi.cos() / sc - phi.sin() * dsc * sp / (sc * sc);
        let expected = (1.0 + g) / (2.0 * PI * tau * 1.21);
        assert!((d.value - expected).abs() < 1e-5 * expected, "{} vs {expected}", d.value);
        assert!(d.reliable);
    }

    #[test]
    fn hermitian_angle_is_monotone_in_psi() {
        for tau in [0.3, 1.0, 2.0, 4.5, 8.0] {
            let a = HermAngles::new(tau).unwrap();
            let mut prev = -1.0;
            for k in 0..=2000 {
                let psi = a.psi_top * k as f64 / 2000.0;
                let p = a.phi_of_psi(psi).unwrap();
                assert!(p >= prev - 1e-12, "tau {tau} psi {psi}");
                prev = p;
            }
            assert!((prev - a.phi_top).abs() < 1e-9);
        }
    }

    #[test]
    fn hermitian_boundary_residuals_and_symmetry() {
        let tau = 1.0;
        let b = boundary_hermitian_inf(tau, 256).unwrap();
        for p in &b.curves[0] {
            let (r1, r2) = hermitian_boundary_residual(p.r, p.phi, tau).unwrap();
            assert!(r1 < 1e-9 && r2 < 1e-9, "{p:?} {r1} {r2}");
            let (q1, q2) = hermitian_boundary_residual((-tau).exp() / p.r, p.phi, tau).unwrap();
            assert!(q1 < 1e-9 && q2 < 1e-9);
        }
    }

    #[test]
    fn hermitian_branches_match_on_boundary() {
        for tau in [1.0, 5.0] {
            for phi in [0.0, 0.05, -0.1, 0.15] {
                let Some((s, psi)) = hermitian_inf_s(phi, tau).unwrap() else { continue };
                for sign in [1.0, -1.0] {
                    let l = -tau / 2.0 + sign * 2.0 * s.sqrt();
                    let z = C::from_polar(l.exp(), phi);
                    let nh = herm_zg(l, s, psi, tau);
                    let ho = 1.0 + hermitian_holomorphic_h(z, tau).unwrap();
                    assert!((nh - ho).norm() < 1e-6, "tau {tau} phi {phi} side {sign}: {nh} vs {ho}");
                }
            }
        }
    }

    #[test]
    fn hermitian_interior_probe() {
        let st = solve_hermitian_inf(1.0, 0.0, 1.0).unwrap();
        assert_eq!(st.region, Region::Nonholomorphic);
        assert!(st.b2 < 0.0);
        assert_eq!(st.psi, 0.0);
        assert!((st.h - (st.green * 1.0 - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn cigar_thins_with_time() {
        let width = |tau: f64| {
            let b = boundary_hermitian_inf(tau, 2048).unwrap();
            b.curves[0].iter().map(|p| (p.r * p.phi.sin()).abs()).fold(0.0, f64::max)
        };
        assert!(width(0.1) < width(0.5));
    }
}
