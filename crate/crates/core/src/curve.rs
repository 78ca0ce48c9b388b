//! Closed polar curves bounding an eigenvalue support.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

impl PolarPoint {
    pub fn new(r: f64, phi: f64) -> Self {
        PolarPoint { r, phi }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.r, self.phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    /// One closed curve per island; no hole.
    SimplyConnected,
    /// An outer and an inner curve around the origin.
    Annulus,
    /// The support is an interval of the real axis.
    RealSegment,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::SimplyConnected => "SimplyConnected",
            Topology::Annulus => "Annulus",
            Topology::RealSegment => "RealSegment",
        }
    }
}

/// Closed polygons in the `z`-plane, stored in polar form.
///
/// Every polygon repeats its first point at the end. For [`Topology::Annulus`]
/// the outer curve comes first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub curves: Vec<Vec<PolarPoint>>,
    pub topology: Topology,
}

/// Radial extent `(r_lo, r_hi)` of a support at a fixed angle.
pub type Band = Option<(f64, f64)>;

impl BoundaryCurve {
    /// Builds curves from a support described angle by angle.
    ///
    /// `band(φ)` gives the radial interval of the support along the ray at
    /// angle `φ`, or `None` when the ray misses it. The angles are a uniform
    /// grid of `n_phi` points on `(-π, π]`; the ends of each angular run are
    /// located by bisection so island tips are not cut off.
    pub fn from_bands(n_phi: usize, band: impl Fn(f64) -> Result<Band>) -> Result<Self> {
        if n_phi < 8 {
            return Err(Error::invalid("need at least 8 angles to trace a boundary"));
        }
        let phis: Vec<f64> = (0..n_phi)
            .map(|k| -PI + 2.0 * PI * (k as f64 + 1.0) / n_phi as f64)
            .collect();
        let bands = phis.iter().map(|&p| band(p)).collect::<Result<Vec<_>>>()?;

        if bands.iter().all(Option::is_some) {
            let pts: Vec<(f64, f64, f64)> = phis
                .iter()
                .zip(&bands)
                .map(|(&p, b)| (p, b.unwrap().0, b.unwrap().1))
                .collect();
            let outer = close(pts.iter().map(|&(p, _, hi)| PolarPoint::new(hi, p)).collect());
            if pts.iter().all(|&(_, lo, _)| lo > 0.0) {
                let inner = close(pts.iter().map(|&(p, lo, _)| PolarPoint::new(lo, p)).collect());
                return Ok(BoundaryCurve {
                    curves: vec![outer, inner],
                    topology: Topology::Annulus,
                });
            }
            return Ok(BoundaryCurve {
                curves: vec![outer],
                topology: Topology::SimplyConnected,
            });
        }

        // Rotate so that the grid starts on an empty ray, then split into runs.
        let start = bands.iter().position(Option::is_none).unwrap();
        let mut curves = Vec::new();
        let mut run: Vec<(f64, f64, f64)> = Vec::new();
        let mut run_start_gap = None;
        for k in 0..=n_phi {
            let idx = (start + k) % n_phi;
            // unwrap angles so a run crossing φ = π stays monotone
            let phi = phis[idx] + if start + k >= n_phi { 2.0 * PI } else { 0.0 };
            let prev_phi = phi - 2.0 * PI / n_phi as f64;
            match (k < n_phi).then(|| bands[idx]).flatten() {
                Some((lo, hi)) => {
                    if run.is_empty() {
                        run_start_gap = Some(prev_phi);
                    }
                    run.push((phi, lo, hi));
                }
                None => {
                    if !run.is_empty() {
                        let first = run[0].0;
                        let last = run[run.len() - 1].0;
                        let head = tip(&band, run_start_gap.unwrap(), first)?;
                        let tail = tip(&band, phi, last)?;
                        curves.push(island(head, &run, tail));
                        run.clear();
                    }
                }
            }
        }
        Ok(BoundaryCurve {
            curves,
            topology: Topology::SimplyConnected,
        })
    }

    /// A closed polygon from `(r, φ)` pairs, repeating the first point if needed.
    pub fn closed(points: Vec<PolarPoint>) -> Vec<PolarPoint> {
        close(points)
    }

    pub fn check_closed(&self) -> Result<()> {
        if self.curves.is_empty() {
            return Err(Error::invalid("boundary has no curves"));
        }
        for (i, c) in self.curves.iter().enumerate() {
            if c.len() < 4 {
                return Err(Error::invalid(format!("curve {i} has fewer than three distinct points")));
            }
            let (a, b) = (c[0].to_complex(), c[c.len() - 1].to_complex());
            let scale = c.iter().map(|p| p.r).fold(0.0, f64::max);
            if (a - b).norm() > 1e-9 * scale.max(1.0) {
                return Err(Error::invalid(format!("curve {i} is not closed")));
            }
        }
        Ok(())
    }

    pub fn polygons(&self) -> Vec<Vec<Complex64>> {
        self.curves
            .iter()
            .map(|c| c.iter().map(|p| p.to_complex()).collect())
            .collect()
    }

    /// Radially scaled copy, `r → factor · r`.
    pub fn scaled(&self, factor: f64) -> Self {
        BoundaryCurve {
            curves: self
                .curves
                .iter()
                .map(|c| c.iter().map(|p| PolarPoint::new(p.r * factor, p.phi)).collect())
                .collect(),
            topology: self.topology,
        }
    }

    /// The curve with the smallest maximal radius; for an annulus, the rim of the hole.
    pub fn inner(&self) -> Option<&[PolarPoint]> {
        if self.topology != Topology::Annulus {
            return None;
        }
        self.curves
            .iter()
            .min_by(|a, b| max_r(a).total_cmp(&max_r(b)))
            .map(Vec::as_slice)
    }

    pub fn outer(&self) -> Option<&[PolarPoint]> {
        self.curves
            .iter()
            .max_by(|a, b| max_r(a).total_cmp(&max_r(b)))
            .map(Vec::as_slice)
    }

    pub fn max_radius(&self) -> f64 {
        self.curves.iter().map(|c| max_r(c)).fold(0.0, f64::max)
    }
}

fn max_r(c: &[PolarPoint]) -> f64 {
    c.iter().map(|p| p.r).fold(0.0, f64::max)
}

fn close(mut pts: Vec<PolarPoint>) -> Vec<PolarPoint> {
    if let (Some(&first), Some(&last)) = (pts.first(), pts.last()) {
        if first != last {
            pts.push(first);
        }
    }
    pts
}

/// Bisects between an empty ray `out` and a populated ray `inside` and returns
/// the last populated point, where `r_lo ≈ r_hi`.
fn tip(band: &impl Fn(f64) -> Result<Band>, out: f64, inside: f64) -> Result<(f64, f64, f64)> {
    let (mut a, mut b) = (out, inside);
    let mut best = None;
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        match band(wrap(mid))? {
            Some((lo, hi)) => {
                best = Some((mid, lo, hi));
                b = mid;
            }
            None => a = mid,
        }
        if (a - b).abs() < 1e-13 {
            break;
        }
    }
    Ok(match best {
        Some(t) => t,
        None => {
            let (lo, hi) = band(wrap(inside))?.expect("populated ray");
            (inside, lo, hi)
        }
    })
}

fn island(head: (f64, f64, f64), run: &[(f64, f64, f64)], tail: (f64, f64, f64)) -> Vec<PolarPoint> {
    let head_r = 0.5 * (head.1 + head.2);
    let tail_r = 0.5 * (tail.1 + tail.2);
    let mut pts = vec![PolarPoint::new(head_r, wrap(head.0))];
    pts.extend(run.iter().map(|&(p, _, hi)| PolarPoint::new(hi, wrap(p))));
    pts.push(PolarPoint::new(tail_r, wrap(tail.0)));
    pts.extend(run.iter().rev().map(|&(p, lo, _)| PolarPoint::new(lo, wrap(p))));
    close(pts)
}

/// Maps an angle to `(-π, π]`.
pub fn wrap(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Even-odd rule over all polygons: for an annulus this is "inside the outer
/// curve and outside the inner one".
pub fn inside_polygons(polygons: &[Vec<Complex64>], z: Complex64) -> bool {
    let mut inside = false;
    for poly in polygons {
        for w in poly.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Euclidean distance from `z` to the nearest polygon edge.
pub fn distance_to_polygons(polygons: &[Vec<Complex64>], z: Complex64) -> f64 {
    let mut best = f64::INFINITY;
    for poly in polygons {
        for w in poly.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ab = b - a;
            let len2 = ab.norm_sqr();
            let t = if len2 == 0.0 {
                0.0
            } else {
                ((z - a) * ab.conj()).re / len2
            };
            let d = (a + ab * t.clamp(0.0, 1.0) - z).norm();
            best = best.min(d);
        }
    }
    best
}
