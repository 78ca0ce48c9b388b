//! Product of two GUE factors, `(1 + √(τ/2) H_1)(1 + √(τ/2) H_2)`.
//!
//! With `P = 1 + αh`, `P̃ = 1 + αh̃` and `β = α²b²` (here `α = τ/2`), the
//! 4×4 block resolvent gives the polynomial system
//!
//! ```text
//! det = β² + (w² - P²)(w̄² - P̃²) - 2β(P P̃ + |w|²)
//! det = α(|w|² + P P̃ - β)                       (g ≠ 0)
//! (P - 1) det = α[β P̃ + P(w̄² - P̃²)]
//! (P̃ - 1) det = α[β P + P̃(w² - P²)]
//! ```
//!
//! On the holomorphic branch (`β = 0`) the last two decouple into the cubic
//! `P³ - P² + (α - z)P + z = 0` with `G(z) = 1/(z - P²)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GapSolution, Region};
use crate::error::{Error, Result};

type C = Complex64;

fn check_tau(tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    Ok(tau / 2.0)
}

struct System {
    w: C,
    alpha: f64,
}

impl System {
    fn det(&self, p: C, pt: C, beta: C) -> C {
        let w = self.w;
        let wb = w.conj();
        beta * beta + (w * w - p * p) * (wb * wb - pt * pt) - 2.0 * beta * (p * pt + w.norm_sqr())
    }

    fn residual(&self, x: [C; 3]) -> [C; 3] {
        let [p, pt, beta] = x;
        let (w, a) = (self.w, self.alpha);
        let wb = w.conj();
        let d = self.det(p, pt, beta);
        [
            d - a * (w.norm_sqr() + p * pt - beta),
            (p - 1.0) * d - a * (beta * pt + p * (wb * wb - pt * pt)),
            (pt - 1.0) * d - a * (beta * p + pt * (w * w - p * p)),
        ]
    }

    /// Gap equations restricted to `P̃ = conj(P)` and real `β`, divided
    /// through by `det` so that the spurious `det = 0` family repels Newton.
    fn reduced(&self, v: [f64; 3]) -> [f64; 3] {
        let p = C::new(v[0], v[1]);
        let beta = C::new(v[2], 0.0);
        let (w, a) = (self.w, self.alpha);
        let wb = w.conj();
        let d = self.det(p, p.conj(), beta);
        let f1 = 1.0 - a * (w.norm_sqr() + p.norm_sqr() - v[2]) / d;
        let f2 = (p - 1.0) - a * (beta * p.conj() + p * (wb * wb - p.conj() * p.conj())) / d;
        [f1.re, f2.re, f2.im]
    }

    /// Damped Newton on the reduced system with a forward-difference Jacobian.
    fn newton(&self, mut v: [f64; 3]) -> Option<[f64; 3]> {
        let norm = |r: [f64; 3]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut r = self.reduced(v);
        let mut res = norm(r);
        for _ in 0..80 {
            if !res.is_finite() {
                return None;
            }
            if res < 1e-13 {
                return Some(v);
            }
            let mut jac = [[0.0; 3]; 3];
            for k in 0..3 {
                let h = 1e-7 * (1.0 + v[k].abs());
                let mut e = v;
                e[k] += h;
                let rk = self.reduced(e);
                for i in 0..3 {
                    jac[i][k] = (rk[i] - r[i]) / h;
                }
            }
            let step = solve3(jac, [-r[0], -r[1], -r[2]])?;
            let mut t = 1.0;
            loop {
                let trial = [v[0] + t * step[0], v[1] + t * step[1], v[2] + t * step[2]];
                let tr = self.reduced(trial);
                if norm(tr) < res || t < 1e-4 {
                    v = trial;
                    r = tr;
                    res = norm(tr);
                    break;
                }
                t *= 0.5;
            }
        }
        (res < 1e-10).then_some(v)
    }
}

/// Gaussian elimination with partial pivoting on a 3×3 real system.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Solves the two-hermitian gap system at `w` (with `w² = z`).
///
/// Newton runs from a grid of starts around the symmetric line `Re P = 1/2`
/// where physical roots live. If none converges to a physical root, the
/// holomorphic branch is returned, with `P` from the cubic.
///
/// ```
/// use matdiff::{gap_hermitian_m2, Complex64, Region, WPoint};
///
/// let far = gap_hermitian_m2(WPoint::new(Complex64::new(30.0, 5.0)), 2.0).unwrap();
/// assert_eq!(far.region, Region::Holomorphic);
/// assert!(far.h.unwrap().norm() < 1e-2);
/// ```
pub fn gap_hermitian_m2(w: super::WPoint, tau: f64) -> Result<GapSolution> {
    let alpha = check_tau(tau)?;
    let sys = System { w: w.w, alpha };
    let scale = alpha * alpha * (1.0 + w.w.norm_sqr());
    for &y in &[0.05, 0.2, 0.5, 1.0, 2.0, -0.05, -0.2, -0.5, -1.0] {
        for &bf in &[-0.05, -0.3, -1.0, -3.0] {
            // physical roots have β < 0; Re P = 1/2 comes out of the solve
            let Some([x, y, beta]) = sys.newton([0.5, y, bf * scale]) else {
                continue;
            };
            if beta < -1e-12 * scale {
                let p = C::new(x, y);
                return Ok(GapSolution {
                    h: Some((p - 1.0) / alpha),
                    h_tilde: Some((p.conj() - 1.0) / alpha),
                    d2: Some(C::new(p.norm_sqr(), 0.0)),
                    ..GapSolution::nonholomorphic(alpha, beta / (alpha * alpha))
                });
            }
        }
    }
    let z = w.w * w.w;
    let p = holomorphic_p(z, alpha)?;
    let pt = p.conj();
    Ok(GapSolution {
        h: Some((p - 1.0) / alpha),
        h_tilde: Some((pt - 1.0) / alpha),
        d2: Some(p * pt),
        ..GapSolution::holomorphic(alpha)
    })
}

/// Residuals of the gap system at a returned solution.
pub fn hermitian_m2_residual(w: super::WPoint, sol: &GapSolution) -> Result<f64> {
    let (h, ht) = sol
        .h
        .zip(sol.h_tilde)
        .ok_or_else(|| Error::invalid("solution carries no diagonal gaps"))?;
    let a = sol.alpha;
    let sys = System { w: w.w, alpha: a };
    let (p, pt) = (1.0 + a * h, 1.0 + a * ht);
    let beta = C::new(a * a * sol.b2, 0.0);
    let r = sys.residual([p, pt, beta]);
    Ok(match sol.region {
        // g = 0 leaves the first equation unconstrained
        Region::Holomorphic => r[1].norm().max(r[2].norm()),
        Region::Nonholomorphic => r.iter().map(|v| v.norm()).fold(0.0, f64::max),
    })
}

/// `g_11` of the two-hermitian system; `G(z) = g_11 / w`.
pub fn g11_hermitian_m2(w: super::WPoint, sol: &GapSolution) -> Result<C> {
    let (h, ht) = sol
        .h
        .zip(sol.h_tilde)
        .ok_or_else(|| Error::invalid("solution carries no diagonal gaps"))?;
    let a = sol.alpha;
    let (p, pt) = (1.0 + a * h, 1.0 + a * ht);
    let beta = C::new(a * a * sol.b2, 0.0);
    let sys = System { w: w.w, alpha: a };
    let det = sys.det(p, pt, beta);
    if det.norm() == 0.0 {
        return Err(Error::SingularPoint(w.w));
    }
    let wb = w.w.conj();
    Ok((-beta * wb + w.w * (wb * wb - pt * pt)) / det)
}

fn cubic(p: C, z: C, alpha: f64) -> (C, C) {
    let f = ((p - 1.0) * p + (alpha - z)) * p + z;
    let df = (3.0 * p - 2.0) * p + (alpha - z);
    (f, df)
}

fn polish(mut p: C, z: C, alpha: f64) -> Option<C> {
    for _ in 0..50 {
        let (f, df) = cubic(p, z, alpha);
        if df.norm() == 0.0 {
            return None;
        }
        let dp = f / df;
        p -= dp;
        if dp.norm() < 1e-15 * (1.0 + p.norm()) {
            break;
        }
    }
    p.is_finite().then_some(p)
}

/// The root of the cubic continuous with `P → 1` at infinity.
///
/// The branch is followed vertically from `z ± 10i` down to `z`, staying on
/// one side of the real axis; a point on the axis is approached from above.
fn holomorphic_p(z: C, alpha: f64) -> Result<C> {
    let side = if z.im < 0.0 { -1.0 } else { 1.0 };
    let target = if z.im == 0.0 { 1e-13 } else { z.im.abs() };
    let top: f64 = 10.0 + z.norm();
    let steps = 400;
    let mut p = C::new(1.0, 0.0);
    for k in 0..=steps {
        // geometric descent of the imaginary offset
        let y = top * (target / top).powf(k as f64 / steps as f64);
        let zk = C::new(z.re, side * y);
        p = polish(p, zk, alpha).ok_or_else(|| Error::solver("two-hermitian cubic", format!("lost the branch at {zk}")))?;
    }
    Ok(p)
}

/// Holomorphic resolvent `G(z) = 1/(z - P²)` of the two-hermitian product.
pub fn green_hermitian_m2_holomorphic(z: C, tau: f64) -> Result<C> {
    let alpha = check_tau(tau)?;
    let p = holomorphic_p(z, alpha)?;
    Ok(1.0 / (z - p * p))
}

/// Returns the `τ` at which the real support's edge reaches the origin.
///
/// At `w = 0` with `b² = 0` the system reduces to `h = -1/(1 + αh)` and
/// `1 = α h h̃` with `h̃ = h`; Newton on `(h, α)` lands on `h = -2`, `α = 1/4`.
pub fn critical_tau_hermitian_m2() -> Result<f64> {
    let (mut h, mut a) = (-1.5f64, 0.3f64);
    for _ in 0..100 {
        let e1 = a * h * h + h + 1.0;
        let e2 = a * h * h - 1.0;
        if e1.abs().max(e2.abs()) < 1e-15 {
            break;
        }
        // [[2ah + 1, h²], [2ah, h²]] · (dh, da) = -(e1, e2)
        let (j11, j12, j21, j22) = (2.0 * a * h + 1.0, h * h, 2.0 * a * h, h * h);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 {
            return Err(Error::solver("critical time", "singular Jacobian"));
        }
        let dh = (-e1 * j22 + e2 * j12) / det;
        let da = (-e2 * j11 + e1 * j21) / det;
        h += dh;
        a += da;
    }
    let res = (a * h * h + h + 1.0).abs().max((a * h * h - 1.0).abs());
    if res > 1e-12 {
        return Err(Error::solver("critical time", format!("residual {res}")));
    }
    Ok(2.0 * a)
}

/// Density on the real axis in the real-spectrum phase `τ < 1/2`.
///
/// `ρ(x) = -(1/π) Im G(x + i0)` from the holomorphic branch.
pub fn real_density_hermitian_m2(x: &[f64], tau: f64) -> Result<Vec<f64>> {
    let alpha = check_tau(tau)?;
    let critical = critical_tau_hermitian_m2()?;
    if tau >= critical {
        return Err(Error::Phase { tau, critical });
    }
    x.iter().map(|&x| axis_density(x, alpha)).collect()
}

fn axis_density(x: f64, alpha: f64) -> Result<f64> {
    let z = C::new(x, 0.0);
    let p = holomorphic_p(z, alpha)?;
    let g = 1.0 / (z - p * p);
    Ok((-g.im / PI).max(0.0))
}

/// Edges of the real support of the holomorphic branch's axis density.
///
/// This is meaningful as a support only below the critical time; above it,
/// a negative left edge signals that the support has reached the origin.
pub fn real_support_hermitian_m2(tau: f64) -> Result<(f64, f64)> {
    let alpha = check_tau(tau)?;
    let c = alpha.sqrt();
    let (lo, hi) = (-1.0 - 4.0 * alpha, (1.0 + 2.0 * c).powi(2) + 1.0);
    let n = 4000;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let dens = xs.iter().map(|&x| axis_density(x, alpha)).collect::<Result<Vec<_>>>()?;
    let thr = 1e-9;
    let first = dens.iter().position(|&d| d > thr);
    let last = dens.iter().rposition(|&d| d > thr);
    let (Some(i), Some(j)) = (first, last) else {
        return Err(Error::solver("real support scan", "no density on the axis"));
    };
    let edge = |inside: f64, outside: f64| -> Result<f64> {
        let (mut a, mut b) = (inside, outside);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if axis_density(m, alpha)? > thr {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };
    let left = if i == 0 { xs[0] } else { edge(xs[i], xs[i - 1])? };
    let right = if j == n { xs[n] } else { edge(xs[j], xs[j + 1])? };
    Ok((left, right))
}
