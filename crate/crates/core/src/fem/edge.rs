//! Whitney 1-form assembly on planar meshes.
//!
//! Edge DOFs are line integrals along the global edge direction `a → b`
//! with `a < b`. The discrete exterior derivative of a vertex field is the
//! incidence matrix `G`, the circulation of an edge field around each
//! triangle is `C`, and `C G = 0`.

use std::collections::HashMap;

use super::{barycentric_gradients, lumped_vertex_mass, DiscreteOperator, DofKind, DofMap, OperatorKind};
use crate::error::{Error, Result};
use crate::linalg::{SparseCholesky, SparseMatrix};
use crate::mesh::{cross, dot3, norm3, sub, Mesh};

/// Edge numbering plus the incidence matrices of the Whitney complex.
#[derive(Debug, Clone)]
pub struct EdgeComplex {
    pub edges: Vec<(usize, usize)>,
    /// Per triangle: local edge `k` joins local vertices `k → k+1`; the pair is
    /// (global edge index, +1 if the global direction agrees).
    pub triangle_edges: Vec<[(usize, f64); 3]>,
    /// Boundary edges in loop order.
    pub boundary_edges: Vec<usize>,
    /// Vertex → edge incidence (`E × V`), `(G u)_e = u_b − u_a`.
    pub grad: SparseMatrix,
    /// Edge → triangle circulation (`F × E`).
    pub curl: SparseMatrix,
    index: HashMap<(usize, usize), usize>,
}

impl EdgeComplex {
    pub fn new(mesh: &Mesh) -> Self {
        let edges = mesh.edges();
        let index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let lookup = |a: usize, b: usize| -> (usize, f64) {
            let e = index[&(a.min(b), a.max(b))];
            (e, if a < b { 1.0 } else { -1.0 })
        };
        let triangle_edges: Vec<[(usize, f64); 3]> = mesh
            .triangles()
            .iter()
            .map(|t| [lookup(t[0], t[1]), lookup(t[1], t[2]), lookup(t[2], t[0])])
            .collect();
        let boundary_edges = mesh
            .boundary_loops()
            .iter()
            .flat_map(|lp| (0..lp.len()).map(move |k| (lp[k], lp[(k + 1) % lp.len()])))
            .map(|(a, b)| lookup(a, b).0)
            .collect();
        let mut g = Vec::with_capacity(2 * edges.len());
        for (e, &(a, b)) in edges.iter().enumerate() {
            g.push((e, a, -1.0));
            g.push((e, b, 1.0));
        }
        let mut c = Vec::with_capacity(3 * triangle_edges.len());
        for (t, te) in triangle_edges.iter().enumerate() {
            for &(e, s) in te {
                c.push((t, e, s));
            }
        }
        let (ne, nv, nf) = (edges.len(), mesh.num_vertices(), mesh.num_triangles());
        Self {
            grad: SparseMatrix::from_triplets(ne, nv, &g),
            curl: SparseMatrix::from_triplets(nf, ne, &c),
            edges,
            triangle_edges,
            boundary_edges,
            index,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn dof_map(&self) -> DofMap {
        let mut on_boundary = vec![false; self.edges.len()];
        for &e in &self.boundary_edges {
            on_boundary[e] = true;
        }
        DofMap {
            kind: DofKind::Edge,
            entities: (0..self.edges.len()).collect(),
            boundary: self.boundary_edges.clone(),
            interior: (0..self.edges.len()).filter(|&e| !on_boundary[e]).collect(),
        }
    }

    /// Edge DOFs of a constant 1-form `a dx + b dy`.
    pub fn constant_form(&self, mesh: &Mesh, a: f64, b: f64) -> Vec<f64> {
        self.edges
            .iter()
            .map(|&(i, j)| {
                let d = sub(mesh.vertices()[j], mesh.vertices()[i]);
                a * d[0] + b * d[1]
            })
            .collect()
    }

    /// Signed sum of edge DOFs around boundary loop `l` in loop direction.
    pub fn loop_integral(&self, mesh: &Mesh, l: usize, omega: &[f64]) -> f64 {
        let lp = &mesh.boundary_loops()[l];
        (0..lp.len())
            .map(|k| {
                let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
                let (e, s) = self.directed_edge(a, b);
                s * omega[e]
            })
            .sum()
    }

    /// Global index of the edge joining `a` and `b`, and the sign of `a → b`
    /// relative to its global direction.
    pub fn directed_edge(&self, a: usize, b: usize) -> (usize, f64) {
        let e = self.index[&(a.min(b), a.max(b))];
        (e, if a < b { 1.0 } else { -1.0 })
    }
}

/// Whitney mass matrix `∫ ⟨W_e, W_f⟩`.
pub(crate) fn whitney_mass(mesh: &Mesh, cx: &EdgeComplex) -> SparseMatrix {
    let mut trip = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, te) in cx.triangle_edges.iter().enumerate() {
        let (g, area) = barycentric_gradients(mesh, t);
        let gg = |a: usize, b: usize| dot3(g[a], g[b]);
        let ll = |a: usize, b: usize| area * if a == b { 2.0 } else { 1.0 } / 12.0;
        for (p, &(ep, sp)) in te.iter().enumerate() {
            let (i, j) = (p, (p + 1) % 3);
            for (q, &(eq, sq)) in te.iter().enumerate() {
                let (k, l) = (q, (q + 1) % 3);
                let v = ll(i, k) * gg(j, l) - ll(i, l) * gg(j, k) - ll(j, k) * gg(i, l)
                    + ll(j, l) * gg(i, k);
                trip.push((ep, eq, sp * sq * v));
            }
        }
    }
    let n = cx.num_edges();
    SparseMatrix::from_triplets(n, n, &trip)
}

/// The four quadratic forms of the 1-form Steklov problem, plus the
/// ingredients needed to evaluate weak normal traces.
#[derive(Debug, Clone)]
pub struct EdgeForms {
    pub complex: EdgeComplex,
    /// `(dω, dη)`.
    pub d_form: DiscreteOperator,
    /// `(δ_h ω, δ_h η)` with `δ_h ω = M₀⁻¹ Gᵀ M₁ ω` over interior vertices.
    pub coderivative_form: DiscreteOperator,
    /// `∫_{∂M} ι*ω · ι*η`.
    pub tangential_boundary_mass: DiscreteOperator,
    /// Same expression as the coderivative form over boundary vertices; it
    /// vanishes exactly on fields whose weak normal trace vanishes.
    pub normal_trace_constraint: DiscreteOperator,
    /// Weak normal trace rows `(Gᵀ M₁ ω)_v`, one per boundary vertex (loop order).
    pub normal_trace_rows: SparseMatrix,
    /// Whitney mass `M₁`.
    pub mass: SparseMatrix,
    /// Lumped vertex masses `M₀`.
    pub vertex_mass: Vec<f64>,
}

impl EdgeForms {
    /// Full 1-form energy `(dω, dω) + (δω, δω)` with the coderivative taken
    /// over every vertex.
    pub fn energy(&self) -> SparseMatrix {
        self.d_form
            .matrix
            .add(&self.coderivative_form.matrix)
            .add(&self.normal_trace_constraint.matrix)
    }

    /// Weak normal trace at each boundary vertex.
    pub fn normal_trace(&self, omega: &[f64]) -> Vec<f64> {
        self.normal_trace_rows.mul_vec(omega)
    }
}

fn coderivative_part(p: &SparseMatrix, vertex_mass: &[f64], vertices: &[usize]) -> SparseMatrix {
    let ne = p.nrows();
    let cols = p.restrict(&(0..ne).collect::<Vec<_>>(), vertices);
    let inv: Vec<f64> = vertices.iter().map(|&v| 1.0 / vertex_mass[v]).collect();
    cols.matmul(&SparseMatrix::from_diagonal(&inv))
        .matmul(&cols.transpose())
}

/// Assembles the Whitney 1-form forms. Planar meshes only.
pub fn edge_forms_1form(mesh: &Mesh) -> Result<EdgeForms> {
    if !mesh.is_planar() {
        return Err(Error::NotPlanar);
    }
    Ok(assemble_edge_forms(mesh))
}

/// Same assembly without the planarity check; the element formulas hold on
/// any oriented triangulated surface.
pub(crate) fn assemble_edge_forms(mesh: &Mesh) -> EdgeForms {
    let cx = EdgeComplex::new(mesh);
    let dofs = cx.dof_map();
    let ne = cx.num_edges();
    let m1 = whitney_mass(mesh, &cx);
    let m0 = lumped_vertex_mass(mesh);

    let inv_area: Vec<f64> = (0..mesh.num_triangles()).map(|t| 1.0 / mesh.triangle_area(t)).collect();
    let d_form = cx
        .curl
        .transpose()
        .matmul(&SparseMatrix::from_diagonal(&inv_area))
        .matmul(&cx.curl);

    let p = m1.matmul(&cx.grad);
    let interior = DofMap::scalar(mesh).interior;
    let boundary = mesh.boundary_vertices();
    let codiff = coderivative_part(&p, &m0, &interior);
    let normal = coderivative_part(&p, &m0, &boundary);
    let normal_trace_rows = p
        .transpose()
        .restrict(&boundary, &(0..ne).collect::<Vec<_>>());

    let mut tb = vec![0.0; ne];
    for &e in &cx.boundary_edges {
        let (a, b) = cx.edges[e];
        tb[e] = 1.0 / norm3(sub(mesh.vertices()[a], mesh.vertices()[b]));
    }

    let op = |kind, matrix| DiscreteOperator {
        kind,
        dofs: dofs.clone(),
        matrix,
    };
    EdgeForms {
        d_form: op(OperatorKind::EdgeStiffness, d_form),
        coderivative_form: op(OperatorKind::EdgeCoderivativeForm, codiff),
        tangential_boundary_mass: op(OperatorKind::BoundaryMass, SparseMatrix::from_diagonal(&tb)),
        normal_trace_constraint: op(OperatorKind::TraceForm, normal),
        normal_trace_rows,
        mass: m1,
        vertex_mass: m0,
        complex: cx,
    }
}

/// Piecewise-constant vector field, one vector per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleField {
    pub vectors: Vec<[f64; 3]>,
}

impl TriangleField {
    pub fn inner(&self, mesh: &Mesh, other: &TriangleField) -> f64 {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .enumerate()
            .map(|(t, (a, b))| mesh.triangle_area(t) * dot3(*a, *b))
            .sum()
    }

    pub fn norm(&self, mesh: &Mesh) -> f64 {
        self.inner(mesh, self).sqrt()
    }

    pub fn sub(&self, other: &TriangleField) -> TriangleField {
        TriangleField {
            vectors: self.vectors.iter().zip(&other.vectors).map(|(a, b)| sub(*a, *b)).collect(),
        }
    }

    /// Load vector `∫ ⟨field, ∇φ_v⟩` against every vertex hat function.
    pub fn vertex_load(&self, mesh: &Mesh) -> Vec<f64> {
        let mut rhs = vec![0.0; mesh.num_vertices()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let (g, area) = barycentric_gradients(mesh, t);
            for i in 0..3 {
                rhs[tri[i]] += area * dot3(g[i], self.vectors[t]);
            }
        }
        rhs
    }

    /// Load vector `∫ ⟨field, W_e⟩` against every Whitney basis field.
    pub fn edge_load(&self, mesh: &Mesh, cx: &EdgeComplex) -> Vec<f64> {
        let mut rhs = vec![0.0; cx.num_edges()];
        for (t, te) in cx.triangle_edges.iter().enumerate() {
            let (g, area) = barycentric_gradients(mesh, t);
            for (p, &(e, s)) in te.iter().enumerate() {
                let (i, j) = (p, (p + 1) % 3);
                // ∫ λ_i ∇λ_j − λ_j ∇λ_i = (A/3)(∇λ_j − ∇λ_i)
                let w = sub(g[j], g[i]);
                rhs[e] += s * area / 3.0 * dot3(w, self.vectors[t]);
            }
        }
        rhs
    }

    /// L² projection onto the Whitney space.
    pub fn project_to_edges(&self, mesh: &Mesh, cx: &EdgeComplex) -> Result<Vec<f64>> {
        let m1 = whitney_mass(mesh, cx);
        Ok(SparseCholesky::new(&m1)?.solve(&self.edge_load(mesh, cx)))
    }
}

/// Piecewise-constant gradient of a P1 function.
pub fn gradient_field(mesh: &Mesh, u: &[f64]) -> TriangleField {
    let vectors = mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let (g, _) = barycentric_gradients(mesh, t);
            let mut v = [0.0; 3];
            for i in 0..3 {
                for c in 0..3 {
                    v[c] += u[tri[i]] * g[i][c];
                }
            }
            v
        })
        .collect();
    TriangleField { vectors }
}

/// `*du`: the gradient of `u` rotated by +90° in each triangle's tangent
/// plane (`n × ∇u`).
pub fn hodge_star_scalar_gradient(mesh: &Mesh, u: &[f64]) -> TriangleField {
    let grad = gradient_field(mesh, u);
    TriangleField {
        vectors: grad
            .vectors
            .iter()
            .enumerate()
            .map(|(t, g)| cross(mesh.triangle_normal(t), *g))
            .collect(),
    }
}
