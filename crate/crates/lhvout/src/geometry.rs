//! Convex-hull shrinking factors for measurement sets.
//!
//! The hull of a finite direction set contains a (hemi)sphere of some radius
//! `eta`; a model valid on the finite set then covers every projective
//! measurement at visibility shrunk by `eta` per party. Facets come from
//! brute-force triple enumeration (fine at the few-hundred-point scale used
//! here) and every radius can be cross-checked by an independent
//! point-in-hull LP.

use crate::error::{Error, Result};
use crate::exec;
use crate::lp::{self, LpOutcome};
use crate::quantum::MeasurementSet;

const PLANE_TOL: f64 = 1e-9;

/// A supporting plane `n . x = d` of the hull with unit outward normal.
#[derive(Debug, Clone, Copy)]
pub struct HullFacet {
    pub normal: [f64; 3],
    pub offset: f64,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Complete facet list of the 3D convex hull of `points`
/// (optionally with the origin adjoined), coplanar candidates merged.
///
/// Errors when the point set is flat. Brute force over point triples with
/// early-exit side tests: O(N^3) candidates, each usually rejected after a
/// handful of dot products.
pub fn hull_facets(points: &[[f64; 3]], include_origin: bool) -> Result<Vec<HullFacet>> {
    let mut pts: Vec<[f64; 3]> = points.to_vec();
    if include_origin {
        pts.push([0.0, 0.0, 0.0]);
    }
    let n_pts = pts.len();
    if n_pts < 4 {
        return Err(Error::Degenerate(format!("need at least 4 points, got {n_pts}")));
    }

    let candidates_for = |range: std::ops::Range<u64>| -> Vec<(f64, [f64; 3], f64)> {
        let mut out = Vec::new();
        for i in range {
            let i = i as usize;
            for j in i + 1..n_pts {
                let eij = sub(&pts[j], &pts[i]);
                for k in j + 1..n_pts {
                    let eik = sub(&pts[k], &pts[i]);
                    let mut n = cross(&eij, &eik);
                    let len = norm(&n);
                    if len < 1e-12 {
                        continue; // collinear triple
                    }
                    n = [n[0] / len, n[1] / len, n[2] / len];
                    let d = dot(&n, &pts[i]);
                    let mut above = false;
                    let mut below = false;
                    for p in &pts {
                        let v = dot(&n, p) - d;
                        if v > PLANE_TOL {
                            above = true;
                        } else if v < -PLANE_TOL {
                            below = true;
                        }
                        if above && below {
                            break;
                        }
                    }
                    if above && below {
                        continue;
                    }
                    if above && !below {
                        out.push((-d, [-n[0], -n[1], -n[2]], -d));
                    } else if below && !above {
                        out.push((d, n, d));
                    } else {
                        // All points coplanar with the triple: flat set.
                        out.push((f64::NAN, n, d));
                    }
                }
            }
        }
        out
    };

    let chunks = exec::chunk_ranges(n_pts as u64, 128);
    let nested = exec::map_collect(chunks.len(), |ci| candidates_for(chunks[ci].clone()));
    let mut candidates: Vec<(f64, [f64; 3], f64)> = nested.into_iter().flatten().collect();
    if candidates.iter().any(|(key, _, _)| key.is_nan()) {
        return Err(Error::Degenerate("point set is flat".into()));
    }
    if candidates.is_empty() {
        return Err(Error::Degenerate("no supporting planes found".into()));
    }

    // Merge duplicates: sort by offset, compare against accepted facets in
    // the same offset window.
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut facets: Vec<HullFacet> = Vec::new();
    for (_, n, d) in candidates {
        let dup = facets.iter().rev().take_while(|f| (f.offset - d).abs() <= 10.0 * PLANE_TOL).any(|f| {
            (f.normal[0] - n[0]).abs() <= 10.0 * PLANE_TOL
                && (f.normal[1] - n[1]).abs() <= 10.0 * PLANE_TOL
                && (f.normal[2] - n[2]).abs() <= 10.0 * PLANE_TOL
        });
        if !dup {
            facets.push(HullFacet { normal: n, offset: d });
        }
    }
    Ok(facets)
}

fn facet_list(set: &MeasurementSet, include_origin: bool) -> Result<Vec<HullFacet>> {
    hull_facets(set.vectors(), include_origin)
}

/// Radius of the largest origin-centered sphere inscribed in the hull:
/// the minimum facet offset. Errors unless the origin is strictly inside.
pub fn sphere_radius(set: &MeasurementSet) -> Result<f64> {
    let facets = facet_list(set, false)?;
    let min = facets
        .iter()
        .map(|f| f.offset)
        .fold(f64::INFINITY, f64::min);
    if min <= PLANE_TOL {
        return Err(Error::Degenerate(format!(
            "origin is not strictly inside the hull (closest facet at {min:.3e})"
        )));
    }
    Ok(min)
}

/// Largest `r` such that `r u` lies in the hull of the points plus the
/// origin, for every unit `u` in the closed upper hemisphere.
///
/// Over that region the support of a unit normal `n` is 1 when `n_z >= 0`
/// and `sqrt(1 - n_z^2)` otherwise, so `r = min_{d > 0} d / m(n)`.
pub fn hemisphere_radius(set: &MeasurementSet) -> Result<f64> {
    if let Some(v) = set.iter().find(|v| v[2] < -PLANE_TOL) {
        return Err(Error::InvalidInput(format!(
            "point ({}, {}, {}) lies below the equator",
            v[0], v[1], v[2]
        )));
    }
    let facets = facet_list(set, true)?;
    let mut r = f64::INFINITY;
    for f in &facets {
        if f.offset <= PLANE_TOL {
            continue; // plane through the origin never binds upper directions
        }
        let support = if f.normal[2] >= 0.0 {
            1.0
        } else {
            (1.0 - f.normal[2] * f.normal[2]).sqrt()
        };
        if support > 1e-12 {
            r = r.min(f.offset / support);
        }
    }
    if !r.is_finite() {
        return Err(Error::Degenerate("no facet with positive offset".into()));
    }
    Ok(r)
}

/// Independent membership test: is `target` a convex combination of
/// `points`? Solved as an LP feasibility problem, deliberately bypassing the
/// facet machinery.
pub fn point_in_hull(points: &[[f64; 3]], target: &[f64; 3], tol: f64) -> Result<bool> {
    let columns: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vec![p[0], p[1], p[2], 1.0])
        .collect();
    let rhs = vec![target[0], target[1], target[2], 1.0];
    Ok(matches!(lp::feasibility(&columns, &rhs, tol)?, LpOutcome::Optimal { .. }))
}

/// The `(v, epsilon, nu, eta_A, eta_B, v_final)` tuple of a shrinking
/// argument: `v_final = nu * eta_A * eta_B * v_model` with
/// `nu = 1/(1 + epsilon)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityCertificate {
    pub v_model: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub v_final: f64,
}

/// Assembles a visibility certificate from its factors.
pub fn final_visibility(
    v_model: f64,
    epsilon: f64,
    eta_a: f64,
    eta_b: f64,
) -> Result<VisibilityCertificate> {
    if !(0.0..=1.0).contains(&v_model) {
        return Err(Error::InvalidInput(format!("model visibility {v_model} outside [0, 1]")));
    }
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} must be >= 0")));
    }
    for (name, eta) in [("eta_A", eta_a), ("eta_B", eta_b)] {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidInput(format!("{name} = {eta} outside [0, 1]")));
        }
    }
    let nu = 1.0 / (1.0 + epsilon);
    let v_final = nu * eta_a * eta_b * v_model;
    Ok(VisibilityCertificate { v_model, epsilon, nu, eta_a, eta_b, v_final })
}

#[cfg(test)]
// 0.7071 is a pinned reference visibility, not a rounded 1/sqrt(2).
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::quantum::{double_set, hemisphere_grid, MeasurementSet};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tetrahedron() -> Vec<[f64; 3]> {
        let s = 1.0 / 3f64.sqrt();
        vec![
            [s, s, s],
            [s, -s, -s],
            [-s, s, -s],
            [-s, -s, s],
        ]
    }

    fn octahedron() -> Vec<[f64; 3]> {
        vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ]
    }

    fn cube() -> Vec<[f64; 3]> {
        let mut pts = Vec::new();
        for &x in &[-1.0, 1.0] {
            for &y in &[-1.0, 1.0] {
                for &z in &[-1.0, 1.0] {
                    pts.push([x, y, z]);
                }
            }
        }
        pts
    }

    fn icosahedron() -> Vec<[f64; 3]> {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r = (1.0 + phi * phi).sqrt();
        let mut pts = Vec::new();
        for &a in &[-1.0, 1.0] {
            for &b in &[-phi, phi] {
                pts.push([0.0, a / r, b / r]);
                pts.push([a / r, b / r, 0.0]);
                pts.push([b / r, 0.0, a / r]);
            }
        }
        pts
    }

    #[test]
    fn facet_counts() {
        assert_eq!(hull_facets(&tetrahedron(), false).unwrap().len(), 4);
        assert_eq!(hull_facets(&cube(), false).unwrap().len(), 6);
        let oct = hull_facets(&octahedron(), false).unwrap();
        assert_eq!(oct.len(), 8);
        for f in &oct {
            assert!((f.offset - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_sets_are_rejected() {
        let flat = vec![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
        ];
        assert!(matches!(hull_facets(&flat, false), Err(Error::Degenerate(_))));
    }

    #[test]
    fn octahedron_inscribed_sphere() {
        let set = MeasurementSet::new(octahedron()).unwrap();
        let r = sphere_radius(&set).unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn icosahedron_inscribed_sphere() {
        let set = MeasurementSet::new(icosahedron()).unwrap();
        let r = sphere_radius(&set).unwrap();
        // Analytic inradius/circumradius ratio.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let expected = (phi * phi / 3f64.sqrt()) / (1.0 + phi * phi).sqrt();
        assert!((r - expected).abs() < 1e-9, "r = {r}, expected {expected}");
        assert!((r - 0.7947).abs() < 1e-3);
    }

    #[test]
    fn doubling_keeps_sphere_radius() {
        let set = MeasurementSet::new(octahedron()).unwrap();
        let doubled = double_set(&set);
        assert_eq!(
            sphere_radius(&set).unwrap(),
            sphere_radius(&doubled).unwrap()
        );
    }

    #[test]
    fn hemisphere_pyramid() {
        let set = MeasurementSet::new(vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let r = hemisphere_radius(&set).unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        // The origin sits on the base, so the full-sphere radius is not
        // defined for this set.
        assert!(sphere_radius(&set).is_err());
    }

    #[test]
    fn pole_and_equator_only_is_thin() {
        let mut pts = vec![[0.0, 0.0, 1.0]];
        for j in 0..24 {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / 24.0;
            pts.push([phi.cos(), phi.sin(), 0.0]);
        }
        let set = MeasurementSet::new(pts).unwrap();
        let r = hemisphere_radius(&set).unwrap();
        assert!(r < 1.0 - 1e-3, "sparse polar coverage must shrink the radius, got {r}");
    }

    #[test]
    fn hemisphere_grid_radius_improves_with_resolution() {
        let coarse = hemisphere_radius(&hemisphere_grid(3, 12, Some(&[0.0; 3])).unwrap()).unwrap();
        let fine = hemisphere_radius(&hemisphere_grid(6, 24, Some(&[0.0; 6])).unwrap()).unwrap();
        assert!(fine > coarse);
        assert!(fine < 1.0);
    }

    #[test]
    fn replicated_grid_hits_published_radius() {
        let grid = crate::quantum::hemisphere_grid_401();
        let r = hemisphere_radius(&grid).unwrap();
        let expected = (std::f64::consts::PI / 40.0).cos().powi(2);
        assert!(
            (0.9938..=0.9939).contains(&r),
            "radius {r} outside the published band (cos^2(pi/40) = {expected})"
        );
    }

    #[test]
    fn doubled_sphere_covers_hemisphere_radius() {
        let grid = hemisphere_grid(4, 10, None).unwrap();
        let hemi = hemisphere_radius(&grid).unwrap();
        let full = sphere_radius(&double_set(&grid)).unwrap();
        assert!(full >= hemi - 1e-12, "full {full} < hemi {hemi}");
    }

    #[test]
    fn adding_points_never_shrinks_radii() {
        let base = hemisphere_grid(3, 8, None).unwrap();
        let r0 = hemisphere_radius(&base).unwrap();
        let mut pts = base.vectors().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let z: f64 = rng.gen_range(0.0..1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let s = (1.0 - z * z).sqrt();
            pts.push([s * phi.cos(), s * phi.sin(), z]);
        }
        let bigger = MeasurementSet::new_normalized(pts).unwrap();
        let r1 = hemisphere_radius(&bigger).unwrap();
        assert!(r1 >= r0 - 1e-12);
    }

    #[test]
    fn radii_pass_point_in_hull_spot_checks() {
        let set = MeasurementSet::new(octahedron()).unwrap();
        let r = sphere_radius(&set).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let u = random_unit(&mut rng);
            assert!(point_in_hull(set.vectors(), &[r * u[0], r * u[1], r * u[2]], 1e-9).unwrap());
            let outside = 1.01 * r;
            // Along a facet normal the scaled point must leave the hull.
            let n = [1.0 / 3f64.sqrt(); 3];
            assert!(!point_in_hull(
                set.vectors(),
                &[outside * n[0], outside * n[1], outside * n[2]],
                1e-9
            )
            .unwrap());
        }

        let grid = hemisphere_grid(4, 10, None).unwrap();
        let rh = hemisphere_radius(&grid).unwrap();
        let mut pts = grid.vectors().to_vec();
        pts.push([0.0, 0.0, 0.0]);
        for _ in 0..200 {
            let mut u = random_unit(&mut rng);
            u[2] = u[2].abs();
            assert!(point_in_hull(&pts, &[rh * u[0], rh * u[1], rh * u[2]], 1e-9).unwrap());
        }
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = norm(&v);
            if n > 1e-3 && n <= 1.0 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    #[test]
    fn final_visibility_arithmetic() {
        let eta = (std::f64::consts::PI / 40.0).cos().powi(2);
        let cert = final_visibility(0.7071, 0.00019999656135527604, eta, eta).unwrap();
        assert!(
            (cert.v_final - 0.6982815667392431).abs() < 1e-12,
            "v_final = {:.16}",
            cert.v_final
        );
        assert!((cert.v_final - cert.nu * cert.eta_a * cert.eta_b * cert.v_model).abs() < 1e-15);

        let plain = final_visibility(0.5, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(plain.v_final, 0.5);

        let shrunk = final_visibility(0.7071, 0.0, eta, eta).unwrap();
        assert!((shrunk.v_final - 0.7071 * eta * eta).abs() < 1e-15);

        assert!(final_visibility(1.2, 0.0, 1.0, 1.0).is_err());
        assert!(final_visibility(0.5, -1e-9, 1.0, 1.0).is_err());
        assert!(final_visibility(0.5, 0.0, 1.1, 1.0).is_err());
    }
}
