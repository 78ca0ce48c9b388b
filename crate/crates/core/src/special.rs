//! Even entire functions of `s = U²` and a bracketed root finder.
//!
//! `cosh U` and `sinh U / U` depend on `U` only through `U²`, so writing them
//! as functions of `s` removes the branch ambiguity of `U = √s`: for `s < 0`
//! they become `cos √-s` and `sin √-s / √-s`.

use roots::{find_root_brent, Convergency, SearchError};

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 1e-4;

/// `cosh √s`, continued to `cos √-s`.
pub fn even_cosh(s: f64) -> f64 {
    if s.abs() < SERIES_CUTOFF {
        1.0 + s / 2.0 * (1.0 + s / 12.0 * (1.0 + s / 30.0))
    } else if s > 0.0 {
        s.sqrt().cosh()
    } else {
        (-s).sqrt().cos()
    }
}

/// `sinh √s / √s`, continued to `sin √-s / √-s`.
pub fn even_sinhc(s: f64) -> f64 {
    if s.abs() < SERIES_CUTOFF {
        1.0 + s / 6.0 * (1.0 + s / 20.0 * (1.0 + s / 42.0))
    } else if s > 0.0 {
        let u = s.sqrt();
        u.sinh() / u
    } else {
        let u = (-s).sqrt();
        u.sin() / u
    }
}

/// `cosh U - (τ/2) sinh U / U` as a function of `s = U²`.
///
/// Both boundary equations of the infinite products are level sets of this
/// function.
pub fn drift_profile(s: f64, tau: f64) -> f64 {
    even_cosh(s) - 0.5 * tau * even_sinhc(s)
}

struct Relative {
    xtol: f64,
}

impl Convergency<f64> for Relative {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }

    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= self.xtol * (1.0 + x1.abs().max(x2.abs()))
    }

    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= 300
    }
}

/// Brent's method on a sign-changing bracket, to relative accuracy ~1e-15.
pub(crate) fn brent(what: &'static str, a: f64, b: f64, f: impl FnMut(f64) -> f64) -> Result<f64> {
    let mut conv = Relative { xtol: 1e-15 };
    find_root_brent(a, b, f, &mut conv).map_err(|e| {
        let detail = match e {
            SearchError::NoBracketing => format!("no sign change on [{a}, {b}]"),
            SearchError::NoConvergency => format!("iteration limit on [{a}, {b}]"),
            SearchError::ZeroDerivative => format!("zero derivative on [{a}, {b}]"),
        };
        Error::solver(what, detail)
    })
}

/// Expands `hi` geometrically until `pred(hi)` holds.
pub(crate) fn expand_until(mut hi: f64, limit: f64, mut pred: impl FnMut(f64) -> bool) -> Option<f64> {
    while !pred(hi) {
        hi *= 2.0;
        if hi > limit {
            return None;
        }
    }
    Some(hi)
}
