//! Assembly of the discrete bilinear forms: P1 Lagrange elements for
//! functions and lowest-order Whitney elements for 1-forms.

mod edge;
mod market;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::mesh::{norm3, sub, Mesh};

pub(crate) use edge::assemble_edge_forms;
pub use edge::{
    edge_forms_1form, gradient_field, hodge_star_scalar_gradient, EdgeComplex, EdgeForms,
    TriangleField,
};
pub use market::{to_matrix_market, write_matrix_market};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DofKind {
    ScalarVertex,
    Edge,
    BoundaryVertex,
}

/// Map from degrees of freedom to mesh entities (vertices or edges), with the
/// boundary/interior partition expressed in DOF indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub kind: DofKind,
    /// `entities[dof]` is the vertex or edge index carrying the DOF.
    pub entities: Vec<usize>,
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
}

impl DofMap {
    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// One DOF per vertex; boundary DOFs in loop order.
    pub fn scalar(mesh: &Mesh) -> Self {
        let n = mesh.num_vertices();
        let boundary = mesh.boundary_vertices();
        let mut on_boundary = vec![false; n];
        for &v in &boundary {
            on_boundary[v] = true;
        }
        Self {
            kind: DofKind::ScalarVertex,
            entities: (0..n).collect(),
            interior: (0..n).filter(|&v| !on_boundary[v]).collect(),
            boundary,
        }
    }

    /// One DOF per boundary vertex, loops concatenated in order.
    pub fn boundary_vertices(mesh: &Mesh) -> Self {
        let entities = mesh.boundary_vertices();
        Self {
            kind: DofKind::BoundaryVertex,
            boundary: (0..entities.len()).collect(),
            interior: Vec::new(),
            entities,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Stiffness,
    InteriorMass,
    BoundaryMass,
    BoundaryStiffness,
    EdgeStiffness,
    EdgeCoderivativeForm,
    TraceForm,
}

/// Symmetric bilinear form over a [`DofMap`].
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub kind: OperatorKind,
    pub dofs: DofMap,
    pub matrix: SparseMatrix,
}

impl DiscreteOperator {
    pub fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.matrix.bilinear(u, v)
    }

    pub fn quad(&self, u: &[f64]) -> f64 {
        self.matrix.quad_form(u)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Relative Frobenius asymmetry `‖M − Mᵀ‖ / ‖M‖`.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.matrix.frobenius_norm();
        if n == 0.0 {
            0.0
        } else {
            self.matrix.symmetry_error() / n
        }
    }
}

/// Gradients of the three barycentric coordinates of triangle `t`, and its
/// area. Works for triangles embedded in 3D.
pub(crate) fn barycentric_gradients(mesh: &Mesh, t: usize) -> ([[f64; 3]; 3], f64) {
    let tri = mesh.triangles()[t];
    let p = tri.map(|i| mesh.vertices()[i]);
    let n = mesh.triangle_normal(t);
    let area = mesh.triangle_area(t);
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        // edge opposite vertex i, traversed counter-clockwise
        let e = sub(p[(i + 2) % 3], p[(i + 1) % 3]);
        let r = crate::mesh::cross(n, e);
        g[i] = [r[0] / (2.0 * area), r[1] / (2.0 * area), r[2] / (2.0 * area)];
    }
    (g, area)
}

/// Cotangent stiffness matrix realizing `∫⟨∇u, ∇v⟩` on P1 functions.
pub fn stiffness_scalar(mesh: &Mesh) -> Result<DiscreteOperator> {
    let mut trip = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = barycentric_gradients(mesh, t);
        if !(area > 0.0) {
            return Err(Error::DegenerateTriangle { index: t, area });
        }
        for i in 0..3 {
            for j in 0..3 {
                trip.push((tri[i], tri[j], area * crate::mesh::dot3(g[i], g[j])));
            }
        }
    }
    let n = mesh.num_vertices();
    Ok(DiscreteOperator {
        kind: OperatorKind::Stiffness,
        dofs: DofMap::scalar(mesh),
        matrix: SparseMatrix::from_triplets(n, n, &trip),
    })
}

/// Consistent P1 mass matrix `∫ u v` over the domain.
pub fn mass_scalar(mesh: &Mesh) -> DiscreteOperator {
    let mut trip = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.triangle_area(t);
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { a / 6.0 } else { a / 12.0 };
                trip.push((tri[i], tri[j], w));
            }
        }
    }
    let n = mesh.num_vertices();
    DiscreteOperator {
        kind: OperatorKind::InteriorMass,
        dofs: DofMap::scalar(mesh),
        matrix: SparseMatrix::from_triplets(n, n, &trip),
    }
}

/// Lumped vertex masses: one third of the area of every incident triangle.
pub fn lumped_vertex_mass(mesh: &Mesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.triangle_area(t) / 3.0;
        for &v in tri {
            m[v] += a;
        }
    }
    m
}

fn loop_segments(mesh: &Mesh) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    mesh.boundary_loops().iter().flat_map(move |lp| {
        (0..lp.len()).map(move |k| {
            let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
            (a, b, norm3(sub(mesh.vertices()[a], mesh.vertices()[b])))
        })
    })
}

/// Consistent P1 boundary mass `∫_{∂M} u v` on all vertex DOFs (zero rows for
/// interior vertices).
pub fn mass_boundary(mesh: &Mesh) -> DiscreteOperator {
    let mut trip = Vec::new();
    for (a, b, len) in loop_segments(mesh) {
        trip.push((a, a, len / 3.0));
        trip.push((b, b, len / 3.0));
        trip.push((a, b, len / 6.0));
        trip.push((b, a, len / 6.0));
    }
    let n = mesh.num_vertices();
    DiscreteOperator {
        kind: OperatorKind::BoundaryMass,
        dofs: DofMap::scalar(mesh),
        matrix: SparseMatrix::from_triplets(n, n, &trip),
    }
}

/// 1D P1 stiffness and mass on the boundary curves, over boundary-vertex
/// DOFs in loop order (block diagonal, one block per loop).
pub fn boundary_laplacian(mesh: &Mesh) -> (DiscreteOperator, DiscreteOperator) {
    let dofs = DofMap::boundary_vertices(mesh);
    let mut local = vec![usize::MAX; mesh.num_vertices()];
    for (k, &v) in dofs.entities.iter().enumerate() {
        local[v] = k;
    }
    let (mut ks, mut ms) = (Vec::new(), Vec::new());
    for (a, b, len) in loop_segments(mesh) {
        let (i, j) = (local[a], local[b]);
        ks.extend([(i, i, 1.0 / len), (j, j, 1.0 / len), (i, j, -1.0 / len), (j, i, -1.0 / len)]);
        ms.extend([(i, i, len / 3.0), (j, j, len / 3.0), (i, j, len / 6.0), (j, i, len / 6.0)]);
    }
    let n = dofs.len();
    (
        DiscreteOperator {
            kind: OperatorKind::BoundaryStiffness,
            dofs: dofs.clone(),
            matrix: SparseMatrix::from_triplets(n, n, &ks),
        },
        DiscreteOperator {
            kind: OperatorKind::BoundaryMass,
            dofs,
            matrix: SparseMatrix::from_triplets(n, n, &ms),
        },
    )
}

/// Evaluates `f` at every vertex.
pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    mesh.vertices().iter().map(|p| f(p[0], p[1], p[2])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;
    use crate::mesh::{generate_annulus, generate_disk, generate_rectangle, Shape};
    use std::f64::consts::PI;

    fn right_triangle() -> Mesh {
        Mesh::planar(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], Shape::Union).unwrap()
    }

    #[test]
    fn right_triangle_stiffness() {
        let k = stiffness_scalar(&right_triangle()).unwrap();
        let d = k.matrix.diagonal();
        assert!((d[0] - 1.0).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
        assert!((d[2] - 0.5).abs() < 1e-15);
        assert!((k.matrix.get(1, 2)).abs() < 1e-15);
        assert!((k.matrix.get(0, 1) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn stiffness_kills_constants_and_is_symmetric() {
        let m = generate_annulus(0.5, 1.0, 0.1).unwrap();
        let k = stiffness_scalar(&m).unwrap();
        let ones = vec![1.0; m.num_vertices()];
        assert!(k.matrix.mul_vec(&ones).iter().all(|x| x.abs() < 1e-12));
        assert!(k.symmetry_error() < 1e-12);
    }

    #[test]
    fn stiffness_kernel_dimension_is_b0() {
        let a = generate_disk(1.0, 0.5).unwrap();
        let u = a.disjoint_union(&a.scaled(0.5).unwrap()).unwrap();
        let k = stiffness_scalar(&u).unwrap();
        let ev = sym_eigenvalues(&k.matrix.to_dense()).unwrap();
        let scale = k.matrix.frobenius_norm();
        assert_eq!(ev.iter().filter(|&&x| x.abs() < 1e-9 * scale).count(), 2);
    }

    #[test]
    fn linear_functions_integrate_exactly() {
        let m = generate_disk(1.0, 0.1).unwrap();
        let k = stiffness_scalar(&m).unwrap();
        let x = interpolate(&m, |x, _, _| x);
        let y = interpolate(&m, |_, y, _| y);
        let area = m.measures().area;
        assert!((k.quad(&x) - area).abs() < 1e-10 * area);
        assert!(k.form(&x, &y).abs() < 1e-10 * area);
        let w = interpolate(&m, |x, y, _| 2.0 * x - 3.0 * y);
        assert!((k.quad(&w) - 13.0 * area).abs() < 1e-10 * 13.0 * area);
    }

    #[test]
    fn boundary_mass_of_constants_is_length() {
        let m = generate_annulus(0.5, 1.0, 0.1).unwrap();
        let b = mass_boundary(&m);
        let ones = vec![1.0; m.num_vertices()];
        let len = m.measures().boundary_length;
        assert!((b.quad(&ones) - len).abs() < 1e-12 * len);
    }

    #[test]
    fn boundary_mass_on_one_square_side() {
        let m = generate_rectangle(1.0, 1.0, 0.25).unwrap();
        let b = mass_boundary(&m);
        // u = 1 on the interior vertices of the bottom side, 0 elsewhere
        let u = interpolate(&m, |x, y, _| if y == 0.0 && x > 0.0 && x < 1.0 { 1.0 } else { 0.0 });
        // three hat functions on segments of length 1/4: 3·(2/3)(1/4) + 2·2·(1/6)(1/4)
        let expected = 3.0 * (2.0 / 3.0) * 0.25 + 4.0 * 0.25 / 6.0;
        assert!((b.quad(&u) - expected).abs() < 1e-14);
    }

    #[test]
    fn boundary_mass_cos_theta() {
        let m = generate_disk(1.0, 0.05).unwrap();
        let b = mass_boundary(&m);
        let u = interpolate(&m, |x, y, _| x / x.hypot(y).max(1e-300));
        let h = 0.05;
        assert!((b.quad(&u) - PI).abs() < h * h * PI);
    }

    #[test]
    fn boundary_laplacian_is_circulant_on_regular_polygon() {
        let m = generate_disk(1.0, 0.25).unwrap();
        let (k, mm) = boundary_laplacian(&m);
        let n = k.dim();
        let len = m.measures().boundary_length;
        // circulant stiffness: eigenvalues (N/L)·2(1 − cos(2πk/N))
        let ev = sym_eigenvalues(&k.matrix.to_dense()).unwrap();
        let mut expected: Vec<f64> = (0..n)
            .map(|j| (n as f64 / len) * 2.0 * (1.0 - (2.0 * PI * j as f64 / n as f64).cos()))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12 * expected[n - 1]);
        }
        let ones = vec![1.0; n];
        assert!(k.quad(&ones).abs() < 1e-12);
        assert!((mm.quad(&ones) - len).abs() < 1e-12);
    }

    #[test]
    fn boundary_laplacian_blocks_per_loop() {
        let m = generate_annulus(0.5, 1.0, 0.1).unwrap();
        let (k, _) = boundary_laplacian(&m);
        let n0 = m.boundary_loops()[0].len();
        for (i, j, _) in k.matrix.triplets() {
            assert_eq!(i < n0, j < n0);
        }
        let ev = sym_eigenvalues(&k.matrix.to_dense()).unwrap();
        assert_eq!(ev.iter().filter(|x| x.abs() < 1e-10).count(), 2);
    }
}
