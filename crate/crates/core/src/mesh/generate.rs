//! Deterministic structured triangulations of the analytic test domains.
//!
//! Disks and annuli are built from concentric rings of equally spaced
//! vertices, consecutive rings stitched by walking both in angle. The ellipse
//! is the affine image of a unit-disk mesh.

use std::f64::consts::PI;

use super::{BoundaryCurve, Mesh, Shape};
use crate::error::{Error, Result};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {x}")))
    }
}

fn ring(vertices: &mut Vec<[f64; 3]>, radius: f64, count: usize) -> Vec<usize> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            vertices.push([radius * t.cos(), radius * t.sin(), 0.0]);
            vertices.len() - 1
        })
        .collect()
}

/// Triangulates the band between ring `inner` (smaller radius) and `outer`.
/// Both rings start at angle 0 and run counter-clockwise; at each step the
/// shorter of the two candidate diagonals is taken.
fn stitch(
    vertices: &[[f64; 3]],
    inner: &[usize],
    outer: &[usize],
    triangles: &mut Vec<[usize; 3]>,
) {
    let (na, nb) = (inner.len(), outer.len());
    if na == 1 {
        for k in 0..nb {
            triangles.push([inner[0], outer[k], outer[(k + 1) % nb]]);
        }
        return;
    }
    let (mut ia, mut ib) = (0usize, 0usize);
    while ia < na || ib < nb {
        let advance_outer = ib < nb
            && (ia >= na
                || dist(vertices, inner[ia % na], outer[(ib + 1) % nb])
                    <= dist(vertices, inner[(ia + 1) % na], outer[ib % nb]));
        if advance_outer {
            triangles.push([inner[ia % na], outer[ib], outer[(ib + 1) % nb]]);
            ib += 1;
        } else {
            triangles.push([inner[ia % na], outer[ib % nb], inner[(ia + 1) % na]]);
            ia += 1;
        }
    }
}

fn dist(vertices: &[[f64; 3]], a: usize, b: usize) -> f64 {
    let (p, q) = (vertices[a], vertices[b]);
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// Disk of the given radius centered at the origin. Ring `i` of
/// `N = ⌈πR/(3h)⌉` carries `6i` vertices, so boundary chords are at most `h`
/// and every edge is close to it.
pub fn generate_disk(radius: f64, target_h: f64) -> Result<Mesh> {
    positive("radius", radius)?;
    positive("target_h", target_h)?;
    if target_h >= radius {
        return Err(Error::InvalidInput(format!(
            "target_h {target_h} must be smaller than the radius {radius}"
        )));
    }
    let rings_n = (PI * radius / (3.0 * target_h)).ceil() as usize;
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut triangles = Vec::new();
    let mut prev = vec![0usize];
    for i in 1..=rings_n {
        let r = radius * i as f64 / rings_n as f64;
        let cur = ring(&mut vertices, r, 6 * i);
        stitch(&vertices, &prev, &cur, &mut triangles);
        prev = cur;
    }
    let mesh = Mesh::new(vertices, triangles, Shape::Disk { radius })?;
    Ok(mesh.with_curves(vec![Some(BoundaryCurve::Circle {
        center: [0.0, 0.0],
        radius,
    })]))
}

/// Annulus `r_inner < |x| < r_outer` centered at the origin.
pub fn generate_annulus(r_inner: f64, r_outer: f64, target_h: f64) -> Result<Mesh> {
    positive("r_inner", r_inner)?;
    positive("r_outer", r_outer)?;
    positive("target_h", target_h)?;
    if r_inner >= r_outer {
        return Err(Error::InvalidInput(format!(
            "inner radius {r_inner} must be smaller than outer radius {r_outer}"
        )));
    }
    let rings_n = ((r_outer - r_inner) / target_h).ceil().max(1.0) as usize;
    let dr = (r_outer - r_inner) / rings_n as f64;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut prev: Vec<usize> = Vec::new();
    for j in 0..=rings_n {
        let r = r_inner + dr * j as f64;
        let count = ((2.0 * PI * r / dr).round() as usize).max(6);
        let cur = ring(&mut vertices, r, count);
        if j > 0 {
            stitch(&vertices, &prev, &cur, &mut triangles);
        }
        prev = cur;
    }
    let mesh = Mesh::new(
        vertices,
        triangles,
        Shape::Annulus {
            inner: r_inner,
            outer: r_outer,
        },
    )?;
    let curves = mesh
        .boundary_loops()
        .iter()
        .map(|l| {
            let p = mesh.vertices()[l[0]];
            let r = p[0].hypot(p[1]);
            let radius = if (r - r_inner).abs() < (r - r_outer).abs() {
                r_inner
            } else {
                r_outer
            };
            Some(BoundaryCurve::Circle {
                center: [0.0, 0.0],
                radius,
            })
        })
        .collect();
    Ok(mesh.with_curves(curves))
}

/// Ellipse with semi-axes `a` (along x) and `b` (along y).
pub fn generate_ellipse(a: f64, b: f64, target_h: f64) -> Result<Mesh> {
    positive("a", a)?;
    positive("b", b)?;
    positive("target_h", target_h)?;
    let unit_h = target_h / a.max(b);
    if unit_h >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "target_h {target_h} must be smaller than the larger semi-axis"
        )));
    }
    let disk = generate_disk(1.0, unit_h)?;
    let vertices = disk
        .vertices()
        .iter()
        .map(|p| [a * p[0], b * p[1], 0.0])
        .collect();
    let mesh = Mesh::new(vertices, disk.triangles().to_vec(), Shape::Ellipse { a, b })?;
    Ok(mesh.with_curves(vec![Some(BoundaryCurve::Ellipse {
        center: [0.0, 0.0],
        a,
        b,
    })]))
}

/// Axis-aligned rectangle `[0, width] × [0, height]` on a uniform grid, each
/// cell split along its rising diagonal.
pub fn generate_rectangle(width: f64, height: f64, target_h: f64) -> Result<Mesh> {
    positive("width", width)?;
    positive("height", height)?;
    positive("target_h", target_h)?;
    let nx = (width / target_h).ceil().max(1.0) as usize;
    let ny = (height / target_h).ceil().max(1.0) as usize;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                width * i as f64 / nx as f64,
                height * j as f64 / ny as f64,
                0.0,
            ]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(vertices, triangles, Shape::Rectangle { width, height })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_topology_and_edges() {
        let m = generate_disk(1.0, 0.1).unwrap();
        let t = m.topology();
        assert_eq!((t.b0, t.b1, t.boundary_component_count), (1, 0, 1));
        assert!(m.max_edge_length() <= 1.5 * 0.1);
        for &v in &m.boundary_loops()[0] {
            let p = m.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-15);
        }
        assert!((m.measures().area - PI).abs() < 0.01 * PI);
    }

    #[test]
    fn disk_perimeter_matches_inscribed_polygon() {
        let m = generate_disk(1.0, 0.05).unwrap();
        let n = m.boundary_loops()[0].len() as f64;
        let polygon = 2.0 * n * (PI / n).sin();
        let len = m.measures().boundary_length;
        assert!((len - polygon).abs() < 1e-12);
        assert!((len - 2.0 * PI).abs() < 1e-3 * 2.0 * PI);
    }

    #[test]
    fn scaled_disk_area() {
        let m = generate_disk(2.0, 0.1).unwrap();
        assert!((m.measures().area - 4.0 * PI).abs() < 0.005 * 4.0 * PI);
    }

    #[test]
    fn annulus_topology_and_measures() {
        let m = generate_annulus(0.5, 1.0, 0.05).unwrap();
        let t = m.topology();
        assert_eq!((t.b0, t.b1, t.boundary_component_count), (1, 1, 2));
        let ms = m.measures();
        assert!((ms.area - 0.75 * PI).abs() < 0.005 * 0.75 * PI);
        let m2 = generate_annulus(0.25, 1.0, 0.05).unwrap();
        let len = m2.measures().boundary_length;
        assert!((len - 2.0 * PI * 1.25).abs() < 0.005 * 2.0 * PI * 1.25);
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(generate_disk(-1.0, 0.1).is_err());
        assert!(generate_disk(1.0, 0.0).is_err());
        assert!(generate_annulus(1.0, 0.5, 0.1).is_err());
        assert!(generate_annulus(1.0, 1.0, 0.1).is_err());
        assert!(generate_ellipse(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn ellipse_area_and_circle_case() {
        let e = generate_ellipse(2.0, 1.0, 0.05).unwrap();
        assert!((e.measures().area - 2.0 * PI).abs() < 0.005 * 2.0 * PI);
        let c = generate_ellipse(1.0, 1.0, 0.1).unwrap();
        let d = generate_disk(1.0, 0.1).unwrap();
        assert!((c.measures().area - d.measures().area).abs() < 0.01 * d.measures().area);
    }

    #[test]
    fn rectangle_grid() {
        let m = generate_rectangle(1.0, 1.0, 0.25).unwrap();
        assert_eq!(m.num_vertices(), 25);
        assert_eq!(m.num_triangles(), 32);
        assert!((m.measures().boundary_length - 4.0).abs() < 1e-14);
    }
}

/// Mesh of a generated `shape` at target size `h`.
pub fn generate_shape(shape: &Shape, h: f64) -> Result<Mesh> {
    match *shape {
        Shape::Disk { radius } => generate_disk(radius, h),
        Shape::Annulus { inner, outer } => generate_annulus(inner, outer, h),
        Shape::Ellipse { a, b } => generate_ellipse(a, b, h),
        Shape::Rectangle { width, height } => generate_rectangle(width, height, h),
        _ => Err(Error::InvalidInput(format!("cannot generate {}", shape.label()))),
    }
}
