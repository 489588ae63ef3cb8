use std::f64::consts::PI;

use steklov_core::mesh::*;
use steklov_core::Error;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Perimeter of an ellipse from the Gauss–Kummer series in `h = ((a−b)/(a+b))²`.
fn ellipse_perimeter_series(a: f64, b: f64) -> f64 {
    let h = ((a - b) / (a + b)).powi(2);
    let mut sum = 1.0;
    let mut coef = 1.0;
    for n in 1..60 {
        // binomial(1/2, n)²
        let k = n as f64;
        coef *= (0.5 - (k - 1.0)) / k;
        sum += coef * coef * h.powi(n);
    }
    PI * (a + b) * sum
}

#[test]
fn disk_geometry() {
    let m = generate_disk(1.0, 0.1).unwrap();
    let t = m.topology();
    assert_eq!((t.b0, t.b1, t.boundary_component_count), (1, 0, 1));
    let h = m.max_edge_length();
    assert!((m.measures().area - PI).abs() <= 2.0 * h * h);

    let m = generate_disk(1.0, 0.05).unwrap();
    let n = m.boundary_vertices().len() as f64;
    let polygon = 2.0 * n * (PI / n).sin();
    let len = m.measures().boundary_length;
    assert!((len - polygon).abs() < 1e-12);
    assert!(rel(len, 2.0 * PI) < 1e-3);

    let m = generate_disk(2.0, 0.1).unwrap();
    assert!(rel(m.measures().area, 4.0 * PI) < 5e-3);
}

#[test]
fn annulus_geometry() {
    let m = generate_annulus(0.5, 1.0, 0.05).unwrap();
    let t = m.topology();
    assert_eq!((t.b0, t.b1, m.boundary_loops().len()), (1, 1, 2));
    assert!(rel(m.measures().area, 0.75 * PI) < 5e-3);

    let m = generate_annulus(0.25, 1.0, 0.05).unwrap();
    assert!(rel(m.measures().boundary_length, 2.0 * PI * 1.25) < 5e-3);
}

#[test]
fn ellipse_geometry() {
    let e = generate_ellipse(1.0, 1.0, 0.1).unwrap();
    let d = generate_disk(1.0, 0.1).unwrap();
    assert!(rel(e.measures().area, d.measures().area) < 1e-2);

    let e = generate_ellipse(2.0, 1.0, 0.05).unwrap();
    assert!(rel(e.measures().area, 2.0 * PI) < 5e-3);
    assert!(rel(e.measures().boundary_length, ellipse_perimeter_series(2.0, 1.0)) < 5e-3);
}

#[test]
fn series_oracle_matches_circle() {
    assert!((ellipse_perimeter_series(1.0, 1.0) - 2.0 * PI).abs() < 1e-14);
    // Known value 9.688448220547675 for semi-axes 2 and 1.
    assert!((ellipse_perimeter_series(2.0, 1.0) - 9.688448220547675).abs() < 1e-12);
}

#[test]
fn single_triangle_off() {
    let m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", Shape::Union).unwrap();
    assert_eq!(m.boundary_vertices().len(), 3);
    assert_eq!(m.boundary_loops().len(), 1);
}

#[test]
fn non_manifold_edge_is_rejected() {
    let text = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n-1 0 0\n3 0 1 2\n3 1 0 3\n3 0 1 4\n";
    let err = parse_off(text, Shape::Union).unwrap_err();
    assert!(matches!(err, Error::NonManifold(_)));
    assert!(err.to_string().contains("non-manifold"));
}

#[test]
fn off_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.off");
    let m = generate_disk(1.0, 0.1).unwrap();
    write_mesh(&m, &path).unwrap();
    let back = load_mesh(&path).unwrap();
    assert_eq!(back.num_vertices(), m.num_vertices());
    assert_eq!(back.num_triangles(), m.num_triangles());
    assert_eq!(back.topology().b1, 0);
    for (p, q) in m.vertices().iter().zip(back.vertices()) {
        assert_eq!(p, q);
    }
}

#[test]
fn topology_counts() {
    let d = generate_disk(1.0, 0.2).unwrap();
    let a = generate_annulus(0.5, 1.0, 0.1).unwrap();
    assert_eq!(d.topology().euler_characteristic, 1);
    assert_eq!(a.topology().euler_characteristic, 0);
    assert_eq!((a.topology().b0, a.topology().b1), (1, 1));
    let shifted = generate_disk(1.0, 0.2).unwrap().scaled(1.0).unwrap();
    let far = Mesh::new(
        shifted.vertices().iter().map(|p| [p[0] + 5.0, p[1], p[2]]).collect(),
        shifted.triangles().to_vec(),
        Shape::Union,
    )
    .unwrap();
    let two = d.disjoint_union(&far).unwrap();
    assert_eq!(two.topology().b0, 2);
    assert_eq!(two.boundary_loops().len(), 2);
}

#[test]
fn refinement() {
    let m = generate_disk(1.0, 0.2).unwrap();
    let r1 = m.refine();
    let r2 = r1.refine();
    assert_eq!(r1.num_triangles(), 4 * m.num_triangles());
    assert_eq!(r2.num_triangles(), 16 * m.num_triangles());
    let gap = |x: &Mesh| (2.0 * PI - x.measures().boundary_length).abs();
    assert!(gap(&r1) < gap(&m));
    assert!(gap(&r2) < gap(&r1));
    assert!(r1.max_edge_length() < 0.6 * m.max_edge_length());
}

#[test]
fn every_generated_mesh_is_oriented_and_nondegenerate() {
    for m in [
        generate_disk(1.0, 0.1).unwrap(),
        generate_annulus(0.3, 1.0, 0.1).unwrap(),
        generate_ellipse(3.0, 1.0, 0.1).unwrap(),
        generate_rectangle(2.0, 1.0, 0.1).unwrap(),
    ] {
        for t in 0..m.num_triangles() {
            assert!(m.triangle_area(t) > 0.0);
            assert!(m.triangle_normal(t)[2] > 0.0);
        }
        let mut count = std::collections::HashMap::new();
        for tri in m.triangles() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let boundary_edges = count.values().filter(|&&c| c == 1).count();
        assert!(count.values().all(|&c| c == 1 || c == 2));
        assert_eq!(boundary_edges, m.boundary_vertices().len());
    }
}
