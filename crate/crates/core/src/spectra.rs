//! Comparing eigenvalue clouds with analytic predictions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::curve::{distance_to_polygons, inside_polygons, BoundaryCurve, Topology};
use crate::error::{Error, Result};
use crate::greens::DensityValue;

/// Default radial tolerance for containment tests.
pub const DEFAULT_INFLATION: f64 = 0.05;
/// Default shrink factor applied to the rim of a hole before counting points inside it.
pub const DEFAULT_HOLE_DEFLATION: f64 = 0.8;

/// A rectangular window split into `nx × ny` cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Self {
        GridSpec { x_range, y_range, nx, ny }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(Error::invalid("grid window must be finite with x0 < x1 and y0 < y1"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("grid needs at least one cell per axis"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn centre(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(
            self.x_range.0 + (ix as f64 + 0.5) * self.dx(),
            self.y_range.0 + (iy as f64 + 0.5) * self.dy(),
        )
    }

    /// The cell holding `z`, if it falls in the window. The upper edges are closed.
    pub fn cell(&self, z: Complex64) -> Option<(usize, usize)> {
        let index = |v: f64, (a, b): (f64, f64), n: usize| {
            if !(a..=b).contains(&v) {
                return None;
            }
            Some((((v - a) / (b - a) * n as f64) as usize).min(n - 1))
        };
        Some((index(z.re, self.x_range, self.nx)?, index(z.im, self.y_range, self.ny)?))
    }
}

/// Densities on a [`GridSpec`], stored row by row in `x` (index `iy · nx + ix`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    /// Imaginary residues of analytic densities; zero for histograms.
    pub imag: Vec<f64>,
    pub reliable: Vec<bool>,
    /// Points of the source cloud that fell outside the window.
    pub outside: usize,
}

impl DensityGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.spec.nx + ix]
    }

    /// `cell area × Σ values` over all cells.
    pub fn mass(&self) -> f64 {
        self.spec.cell_area() * self.values.iter().sum::<f64>()
    }

    /// Analytic density sampled at cell centres.
    pub fn from_density(spec: GridSpec, rho: impl Fn(Complex64) -> Result<DensityValue> + Sync) -> Result<Self> {
        spec.validate()?;
        let cells: Vec<DensityValue> = (0..spec.nx * spec.ny)
            .into_par_iter()
            .map(|k| rho(spec.centre(k % spec.nx, k / spec.nx)))
            .collect::<Result<_>>()?;
        Ok(DensityGrid {
            spec,
            values: cells.iter().map(|d| d.value).collect(),
            imag: cells.iter().map(|d| d.imag).collect(),
            reliable: cells.iter().map(|d| d.reliable).collect(),
            outside: 0,
        })
    }
}

/// Normalized 2-D histogram of a point cloud.
///
/// Mass is divided among the points inside the window, so the grid always
/// carries unit mass; points outside are only counted.
///
/// ```
/// use matdiff::{histogram2d, Complex64, GridSpec};
///
/// let grid = histogram2d(&[Complex64::new(1.0, 0.0)], GridSpec::new((0.0, 2.0), (-1.0, 1.0), 4, 4)).unwrap();
/// assert!((grid.mass() - 1.0).abs() < 1e-12);
/// assert_eq!(grid.values.iter().filter(|&&v| v > 0.0).count(), 1);
/// ```
pub fn histogram2d(points: &[Complex64], spec: GridSpec) -> Result<DensityGrid> {
    spec.validate()?;
    if points.is_empty() {
        return Err(Error::invalid("cannot histogram an empty cloud"));
    }
    let cells = spec.nx * spec.ny;
    let counts = points
        .par_chunks(4096)
        .map(|chunk| {
            let mut c = vec![0u64; cells + 1];
            for &z in chunk {
                match spec.cell(z) {
                    Some((ix, iy)) => c[iy * spec.nx + ix] += 1,
                    None => c[cells] += 1,
                }
            }
            c
        })
        .reduce(
            || vec![0u64; cells + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let outside = counts[cells] as usize;
    let inside = points.len() - outside;
    if inside == 0 {
        return Err(Error::invalid("no point of the cloud falls in the grid window"));
    }
    let norm = 1.0 / (inside as f64 * spec.cell_area());
    Ok(DensityGrid {
        spec,
        values: counts[..cells].iter().map(|&c| c as f64 * norm).collect(),
        imag: vec![0.0; cells],
        reliable: vec![true; cells],
        outside,
    })
}

/// Outcome of comparing a cloud with a boundary.
///
/// Serializes to the fixed report keys; the optional statistics are only
/// written when set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub contained_fraction: f64,
    /// Fraction of points inside the deflated rim of the hole; annuli only.
    pub inside_hole_fraction: Option<f64>,
    pub n_points: usize,
    pub n_outside: usize,
    pub topology: Topology,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_in_hole: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_cdf_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<f64>,
}

/// Fraction of `points` inside `curve` grown by `inflation`, with the hole
/// test at [`DEFAULT_HOLE_DEFLATION`].
///
/// ```
/// use matdiff::{containment, BoundaryCurve, Complex64, PolarPoint, Topology};
///
/// let circle = (0..64).map(|k| PolarPoint::new(1.0, k as f64 * std::f64::consts::TAU / 64.0)).collect();
/// let curve = BoundaryCurve { curves: vec![BoundaryCurve::closed(circle)], topology: Topology::SimplyConnected };
/// let report = containment(&[Complex64::new(0.0, 0.0); 5], &curve, 0.05).unwrap();
/// assert_eq!(report.contained_fraction, 1.0);
/// ```
pub fn containment(points: &[Complex64], curve: &BoundaryCurve, inflation: f64) -> Result<ComparisonReport> {
    containment_with(points, curve, inflation, DEFAULT_HOLE_DEFLATION)
}

/// As [`containment`] with an explicit hole deflation factor.
///
/// A point counts as contained if it lies inside the curves (even-odd rule)
/// or within `inflation` of one of them. For an annulus the points inside the
/// inner curve scaled by `hole_deflation` are counted separately.
pub fn containment_with(
    points: &[Complex64],
    curve: &BoundaryCurve,
    inflation: f64,
    hole_deflation: f64,
) -> Result<ComparisonReport> {
    curve.check_closed()?;
    if points.is_empty() {
        return Err(Error::invalid("cannot compare an empty cloud"));
    }
    if !(inflation.is_finite() && inflation >= 0.0) {
        return Err(Error::invalid(format!("inflation must be non-negative, got {inflation}")));
    }
    if !(hole_deflation.is_finite() && hole_deflation > 0.0) {
        return Err(Error::invalid(format!("hole deflation must be positive, got {hole_deflation}")));
    }
    let polys = curve.polygons();
    let hole: Option<Vec<Vec<Complex64>>> = curve.inner().map(|rim| {
        vec![rim.iter().map(|p| Complex64::from_polar(p.r * hole_deflation, p.phi)).collect()]
    });
    let (outside, in_hole) = points
        .par_iter()
        .map(|&z| {
            let contained = inside_polygons(&polys, z) || distance_to_polygons(&polys, z) <= inflation;
            let in_hole = hole.as_ref().is_some_and(|h| inside_polygons(h, z));
            (usize::from(!contained), usize::from(in_hole))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = points.len();
    Ok(ComparisonReport {
        contained_fraction: (n - outside) as f64 / n as f64,
        inside_hole_fraction: hole.as_ref().map(|_| in_hole as f64 / n as f64),
        n_points: n,
        n_outside: outside,
        topology: curve.topology,
        n_in_hole: hole.map(|_| in_hole),
        sup_cdf_distance: None,
        normalization: None,
    })
}

/// Target law for [`ks_real`].
pub enum Law {
    /// Wigner semicircle on `[-2, 2]`.
    Semicircle,
    /// Law of `e^{X}` with `X ~ N(-τ/2, τ)`.
    LogNormal { tau: f64 },
    /// Any cumulative distribution function.
    Custom(Box<dyn Fn(f64) -> f64 + Sync>),
}

impl std::fmt::Debug for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Law::Semicircle => write!(f, "Semicircle"),
            Law::LogNormal { tau } => write!(f, "LogNormal {{ tau: {tau} }}"),
            Law::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Law {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Semicircle => semicircle_cdf(x),
            Law::LogNormal { tau } => {
                if x <= 0.0 {
                    return 0.0;
                }
                if *tau == 0.0 {
                    return if x >= 1.0 { 1.0 } else { 0.0 };
                }
                let normal = Normal::new(-tau / 2.0, tau.sqrt()).expect("positive variance");
                normal.cdf(x.ln())
            }
            Law::Custom(f) => f(x),
        }
    }

    /// Piecewise-linear CDF integrated from a density tabulated on increasing `xs`.
    ///
    /// The cumulative trapezoid sum is rescaled to end at 1.
    pub fn tabulated(xs: Vec<f64>, pdf: &[f64]) -> Result<Law> {
        if xs.len() < 2 || xs.len() != pdf.len() {
            return Err(Error::invalid("tabulated law needs matching abscissae and values, at least two"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("tabulated abscissae must increase"));
        }
        let mut cum = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cum[i] = cum[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let total = cum[cum.len() - 1];
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::invalid("tabulated density has no mass"));
        }
        cum.iter_mut().for_each(|c| *c /= total);
        Ok(Law::Custom(Box::new(move |x| {
            if x <= xs[0] {
                return 0.0;
            }
            if x >= xs[xs.len() - 1] {
                return 1.0;
            }
            let j = xs.partition_point(|&v| v <= x);
            let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            cum[j - 1] + t * (cum[j] - cum[j - 1])
        })))
    }
}

/// `F(x) = 1/2 + x√(4 - x²)/(4π) + asin(x/2)/π` on `[-2, 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI) + (x / 2.0).asin() / std::f64::consts::PI
    }
}

/// Kolmogorov–Smirnov distance `sup |F_n - F|` between `values` and `law`.
///
/// ```
/// use matdiff::{ks_real, Law};
///
/// let d = ks_real(&[0.0; 10], &Law::Semicircle).unwrap();
/// assert!((d - 0.5).abs() < 1e-12);
/// ```
pub fn ks_real(values: &[f64], law: &Law) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("cannot compute a distance for an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("sample contains NaN"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max))
}

/// Marginal density in `r = |z|` on `nbins` equal bins of `[0, r_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub edges: Vec<f64>,
    /// Density per unit `r`; integrates to the fraction of mass below `r_max`.
    pub density: Vec<f64>,
}

impl RadialProfile {
    /// Profile of a point cloud. Points with `|z| = r_max` go to the last bin;
    /// points beyond are dropped but still count towards the normalization.
    pub fn from_points(points: &[Complex64], r_max: f64, nbins: usize) -> Result<Self> {
        check_profile(points.len(), r_max, nbins)?;
        let mut counts = vec![0usize; nbins];
        for z in points {
            let r = z.norm();
            if r <= r_max {
                counts[((r / r_max * nbins as f64) as usize).min(nbins - 1)] += 1;
            }
        }
        let dr = r_max / nbins as f64;
        let n = points.len() as f64;
        Ok(RadialProfile {
            edges: (0..=nbins).map(|k| k as f64 * dr).collect(),
            density: counts.iter().map(|&c| c as f64 / (n * dr)).collect(),
        })
    }

    /// Profile of a density grid, each cell's mass assigned by its centre.
    pub fn from_grid(grid: &DensityGrid, r_max: f64, nbins: usize) -> Result<Self> {
        check_profile(grid.values.len(), r_max, nbins)?;
        let spec = grid.spec;
        let area = spec.cell_area();
        let dr = r_max / nbins as f64;
        let mut mass = vec![0.0; nbins];
        for iy in 0..spec.ny {
            for ix in 0..spec.nx {
                let r = spec.centre(ix, iy).norm();
                if r <= r_max {
                    mass[((r / r_max * nbins as f64) as usize).min(nbins - 1)] += grid.value(ix, iy) * area;
                }
            }
        }
        Ok(RadialProfile {
            edges: (0..=nbins).map(|k| k as f64 * dr).collect(),
            density: mass.iter().map(|m| m / dr).collect(),
        })
    }

    pub fn centres(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

fn check_profile(len: usize, r_max: f64, nbins: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::invalid("cannot profile an empty cloud"));
    }
    if !(r_max.is_finite() && r_max > 0.0) || nbins == 0 {
        return Err(Error::invalid("radial profile needs r_max > 0 and at least one bin"));
    }
    Ok(())
}

/// `sup_r |F_n(r) - r²|`: distance of the radii from the uniform unit disk.
pub fn uniform_disk_distance(points: &[Complex64]) -> Result<f64> {
    let radii: Vec<f64> = points.iter().map(|z| z.norm()).collect();
    ks_real(&radii, &Law::Custom(Box::new(|r: f64| r.clamp(0.0, 1.0).powi(2))))
}

/// Share of points with `|Im z| > threshold`.
pub fn complex_fraction(points: &[Complex64], threshold: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().filter(|z| z.im.abs() > threshold).count() as f64 / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::PolarPoint;
    use std::f64::consts::{PI, TAU};

    fn circle(r: f64) -> Vec<PolarPoint> {
        BoundaryCurve::closed((0..128).map(|k| PolarPoint::new(r, k as f64 * TAU / 128.0)).collect())
    }

    #[test]
    fn semicircle_cdf_matches_quadrature() {
        let n = 200_000;
        let mut acc = 0.0;
        for k in 0..n {
            let x = -2.0 + 4.0 * (k as f64 + 0.5) / n as f64;
            acc += (4.0 - x * x).sqrt() / (2.0 * PI) * 4.0 / n as f64;
            if k % 20_000 == 19_999 {
                let edge = -2.0 + 4.0 * (k + 1) as f64 / n as f64;
                assert!((acc - semicircle_cdf(edge)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn lognormal_median_is_minus_half_tau() {
        let law = Law::LogNormal { tau: 2.0 };
        assert!((law.cdf((-1.0f64).exp()) - 0.5).abs() < 1e-12);
        assert_eq!(law.cdf(-1.0), 0.0);
    }

    #[test]
    fn tabulated_law_recovers_uniform() {
        let xs: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let law = Law::tabulated(xs, &[1.0; 11]).unwrap();
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((law.cdf(x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_of_tau_zero_cloud_is_a_point_mass() {
        let pts = vec![Complex64::new(1.0, 0.0); 30];
        let g = histogram2d(&pts, GridSpec::new((0.0, 2.0), (-1.0, 1.0), 8, 8)).unwrap();
        let (ix, iy) = g.spec.cell(Complex64::new(1.0, 0.0)).unwrap();
        assert!((g.value(ix, iy) * g.spec.cell_area() - 1.0).abs() < 1e-12);
        assert!((g.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), 2, 2);
        assert!(histogram2d(&[], spec).is_err());
        assert!(ks_real(&[], &Law::Semicircle).is_err());
        let curve = BoundaryCurve { curves: vec![circle(1.0)], topology: Topology::SimplyConnected };
        assert!(containment(&[], &curve, 0.0).is_err());
    }

    #[test]
    fn open_curve_is_rejected() {
        let mut c = circle(1.0);
        c.pop();
        let curve = BoundaryCurve { curves: vec![c], topology: Topology::SimplyConnected };
        assert!(containment(&[Complex64::new(0.0, 0.0)], &curve, 0.0).is_err());
    }

    #[test]
    fn annulus_counts_hole_separately() {
        let curve = BoundaryCurve { curves: vec![circle(2.0), circle(1.0)], topology: Topology::Annulus };
        let pts = [
            Complex64::new(1.5, 0.0),
            Complex64::new(0.0, 0.1),
            Complex64::new(0.97, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        let r = containment(&pts, &curve, 0.05).unwrap();
        assert_eq!(r.n_outside, 2);
        assert_eq!(r.n_in_hole, Some(1));
        assert_eq!(r.inside_hole_fraction, Some(0.25));
    }

    #[test]
    fn report_json_has_the_fixed_keys() {
        let curve = BoundaryCurve { curves: vec![circle(1.0)], topology: Topology::SimplyConnected };
        let r = containment(&[Complex64::new(0.2, 0.0)], &curve, 0.05).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["contained_fraction", "inside_hole_fraction", "n_outside", "n_points", "topology"]);
        assert!(v["inside_hole_fraction"].is_null());
    }

    #[test]
    fn radial_profile_of_point_mass_at_one() {
        let p = RadialProfile::from_points(&[Complex64::new(0.0, 1.0); 7], 1.0, 10).unwrap();
        assert!((p.density[9] * 0.1 - 1.0).abs() < 1e-12);
        assert!(p.density[..9].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn complex_fraction_counts_strict_threshold() {
        let pts = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 1e-3)];
        assert_eq!(complex_fraction(&pts, 1e-6), 0.5);
    }
}
