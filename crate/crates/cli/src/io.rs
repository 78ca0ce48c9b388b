//! Flat-file formats: eigenvalue, boundary and density CSV.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use matdiff::{BoundaryCurve, Complex64, PolarPoint, Topology};

use crate::CliError;

pub const EIG_HEADER: [&str; 3] = ["re", "im", "sample_index"];
pub const BOUNDARY_HEADER: [&str; 3] = ["curve_id", "r", "phi"];
pub const DENSITY_HEADER: [&str; 3] = ["x", "y", "rho"];

/// Shortest decimal that round-trips, with `-0` printed as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        x.to_string()
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_rows(path: &Path, header: [&str; 3], rows: impl Iterator<Item = [String; 3]>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::io(path, e))?;
    }
    finish(w, path)
}

pub fn write_eigenvalues(path: &Path, points: &[Complex64], n: usize) -> Result<(), CliError> {
    let rows = points
        .iter()
        .enumerate()
        .map(|(k, z)| [num(z.re), num(z.im), (k / n).to_string()]);
    write_rows(path, EIG_HEADER, rows)
}

/// Maps an angle to `[0, 2π)`.
fn unit_turn(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Boundary rows `(curve_id, r, φ)` sorted by curve then angle; the closing
/// repeat of each polygon is dropped.
pub fn boundary_rows(curve: &BoundaryCurve) -> Vec<(usize, f64, f64)> {
    let mut rows = Vec::new();
    for (id, c) in curve.curves.iter().enumerate() {
        let open = match c.split_last() {
            Some((last, rest)) if Some(last) == rest.first() => rest,
            _ => c.as_slice(),
        };
        let mut pts: Vec<(usize, f64, f64)> = open.iter().map(|p| (id, p.r, unit_turn(p.phi))).collect();
        pts.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.1.total_cmp(&b.1)));
        rows.extend(pts);
    }
    rows
}

pub fn write_boundary(path: &Path, curve: &BoundaryCurve) -> Result<(), CliError> {
    let rows = boundary_rows(curve)
        .into_iter()
        .map(|(id, r, phi)| [id.to_string(), num(r), num(phi)]);
    write_rows(path, BOUNDARY_HEADER, rows)
}

pub fn write_density(path: &Path, rows: &[(f64, f64, f64)]) -> Result<(), CliError> {
    write_rows(path, DENSITY_HEADER, rows.iter().map(|&(x, y, r)| [num(x), num(y), num(r)]))
}

/// Reads a CSV whose header must equal `header`; returns the data rows.
fn read_table(path: &Path, header: [&str; 3]) -> Result<Vec<csv::StringRecord>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let found = r.headers().map_err(|e| CliError::schema(path, e))?.clone();
    if found.iter().map(str::trim).ne(header) {
        return Err(CliError::schema(
            path,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    r.records()
        .map(|rec| rec.map_err(|e| CliError::schema(path, e)))
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, line: usize) -> Result<T, CliError> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CliError::schema(path, format!("row {line}: column {} is not a valid number", i + 1)))
}

fn finite(path: &Path, x: f64, line: usize) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::schema(path, format!("row {line}: non-finite value")))
    }
}

pub fn read_eigenvalues(path: &Path) -> Result<Vec<Complex64>, CliError> {
    read_table(path, EIG_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let re = finite(path, field(path, rec, 0, i + 1)?, i + 1)?;
            let im = finite(path, field(path, rec, 1, i + 1)?, i + 1)?;
            let _: usize = field(path, rec, 2, i + 1)?;
            Ok(Complex64::new(re, im))
        })
        .collect()
}

pub fn read_boundary(path: &Path) -> Result<BoundaryCurve, CliError> {
    let mut groups: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, rec) in read_table(path, BOUNDARY_HEADER)?.iter().enumerate() {
        let id: usize = field(path, rec, 0, i + 1)?;
        let r = finite(path, field(path, rec, 1, i + 1)?, i + 1)?;
        let phi = finite(path, field(path, rec, 2, i + 1)?, i + 1)?;
        if r < 0.0 {
            return Err(CliError::schema(path, format!("row {}: negative radius", i + 1)));
        }
        groups.entry(id).or_default().push((unit_turn(phi), r));
    }
    if groups.is_empty() {
        return Err(CliError::schema(path, "boundary has no rows"));
    }
    curve_from_rows(groups.into_values().collect()).map_err(|e| CliError::schema(path, e))
}

/// Rebuilds closed polygons from per-curve `(φ, r)` samples.
///
/// A curve with one radius per angle is traced in angle order. A curve with
/// two radii per angle is an island: its outer radii run up in angle and its
/// inner radii back down, starting after the widest angular gap. A single
/// angle for every row marks a real segment.
pub fn curve_from_rows(groups: Vec<Vec<(f64, f64)>>) -> Result<BoundaryCurve, String> {
    let all_phis: Vec<f64> = groups.iter().flatten().map(|p| p.0).collect();
    if all_phis.iter().all(|&p| p == all_phis[0]) {
        let phi = all_phis[0];
        let mut radii: Vec<f64> = groups.iter().flatten().map(|p| p.1).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        if radii.len() < 2 {
            return Err("a real segment needs two distinct radii".into());
        }
        let mut pts: Vec<PolarPoint> = radii.iter().map(|&r| PolarPoint::new(r, phi)).collect();
        pts.extend(radii[1..radii.len() - 1].iter().rev().map(|&r| PolarPoint::new(r, phi)));
        if pts.len() < 3 {
            pts.insert(1, PolarPoint::new(0.5 * (radii[0] + radii[1]), phi));
        }
        return Ok(BoundaryCurve {
            curves: vec![BoundaryCurve::closed(pts)],
            topology: Topology::RealSegment,
        });
    }

    let mut curves = Vec::new();
    let mut all_star = true;
    for mut rows in groups {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        // (φ, r_lo, r_hi, samples at this angle)
        let mut rays: Vec<(f64, f64, f64, usize)> = Vec::new();
        for (phi, r) in rows {
            match rays.last_mut() {
                Some(last) if last.0 == phi => {
                    last.1 = last.1.min(r);
                    last.2 = last.2.max(r);
                    last.3 += 1;
                }
                _ => rays.push((phi, r, r, 1)),
            }
        }
        if rays.len() < 3 {
            return Err("every curve needs at least three angles".into());
        }
        let star = rays.iter().all(|ray| ray.3 == 1);
        all_star &= star;
        let pts = if star {
            rays.iter().map(|&(p, r, _, _)| PolarPoint::new(r, p)).collect()
        } else {
            let n = rays.len();
            let gap = |k: usize| {
                let next = if k + 1 < n { rays[k + 1].0 } else { rays[0].0 + TAU };
                next - rays[k].0
            };
            let widest = (0..n).max_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap();
            let order: Vec<&(f64, f64, f64, usize)> = (1..=n).map(|k| &rays[(widest + k) % n]).collect();
            let mut pts: Vec<PolarPoint> = order.iter().map(|&&(p, _, hi, _)| PolarPoint::new(hi, p)).collect();
            pts.extend(
                order
                    .iter()
                    .rev()
                    .filter(|ray| ray.3 > 1)
                    .map(|&&(p, lo, _, _)| PolarPoint::new(lo, p)),
            );
            pts
        };
        curves.push(BoundaryCurve::closed(pts));
    }
    let topology = if all_star && curves.len() == 2 {
        Topology::Annulus
    } else {
        Topology::SimplyConnected
    };
    Ok(BoundaryCurve { curves, topology })
}
