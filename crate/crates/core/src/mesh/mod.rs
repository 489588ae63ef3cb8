//! Triangulated planar domains and embedded surfaces with boundary.
//!
//! A [`Mesh`] is immutable once built. Construction validates manifoldness,
//! orientation and triangle quality, and extracts the boundary loops with the
//! domain on their left, so the outward normal of a boundary segment is its
//! tangent rotated by −90°.

mod generate;
mod off;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub use generate::{generate_annulus, generate_disk, generate_ellipse, generate_rectangle, generate_shape};
pub use off::{load_mesh, parse_off, to_off_string, write_mesh};

/// Triangles with area below this fraction of the mean area are rejected.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    Planar,
    Surface,
}

/// Analytic curve a boundary loop samples; used to re-project new boundary
/// vertices during refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundaryCurve {
    Circle { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64 },
}

impl BoundaryCurve {
    pub fn project(&self, p: [f64; 3]) -> [f64; 3] {
        match *self {
            BoundaryCurve::Circle { center, radius } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let r = dx.hypot(dy);
                [center[0] + radius * dx / r, center[1] + radius * dy / r, p[2]]
            }
            BoundaryCurve::Ellipse { center, a, b } => {
                let t = ((p[1] - center[1]) / b).atan2((p[0] - center[0]) / a);
                [center[0] + a * t.cos(), center[1] + b * t.sin(), p[2]]
            }
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match *self {
            BoundaryCurve::Circle { center, radius } => BoundaryCurve::Circle {
                center: [c * center[0], c * center[1]],
                radius: c * radius,
            },
            BoundaryCurve::Ellipse { center, a, b } => BoundaryCurve::Ellipse {
                center: [c * center[0], c * center[1]],
                a: c * a,
                b: c * b,
            },
        }
    }
}

/// What the mesh discretizes; carried into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Ellipse { a: f64, b: f64 },
    Rectangle { width: f64, height: f64 },
    Loaded { name: String },
    Union,
}

impl Shape {
    pub fn label(&self) -> String {
        match self {
            Shape::Disk { radius } => format!("disk(r={radius})"),
            Shape::Annulus { inner, outer } => format!("annulus({inner},{outer})"),
            Shape::Ellipse { a, b } => format!("ellipse({a},{b})"),
            Shape::Rectangle { width, height } => format!("rectangle({width}x{height})"),
            Shape::Loaded { name } => format!("mesh({name})"),
            Shape::Union => "union".to_string(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Shape::Disk { radius } => Shape::Disk { radius: c * radius },
            Shape::Annulus { inner, outer } => Shape::Annulus {
                inner: c * inner,
                outer: c * outer,
            },
            Shape::Ellipse { a, b } => Shape::Ellipse { a: c * a, b: c * b },
            Shape::Rectangle { width, height } => Shape::Rectangle {
                width: c * width,
                height: c * height,
            },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TopologyInfo {
    pub b0: usize,
    pub b1: usize,
    pub boundary_component_count: usize,
    pub euler_characteristic: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measures {
    pub area: f64,
    pub boundary_length: f64,
    pub loop_lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    boundary_loops: Vec<Vec<usize>>,
    embedding: Embedding,
    curves: Vec<Option<BoundaryCurve>>,
    shape: Shape,
}

impl Mesh {
    /// Validates a consistently, positively oriented triangulation.
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>, shape: Shape) -> Result<Self> {
        Self::build(vertices, triangles, shape, false)
    }

    /// Like [`Mesh::new`] but flips triangles to a consistent orientation first
    /// (positive for planar meshes).
    pub fn with_repaired_orientation(
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
        shape: Shape,
    ) -> Result<Self> {
        Self::build(vertices, triangles, shape, true)
    }

    /// Planar convenience constructor.
    pub fn planar(vertices: &[[f64; 2]], triangles: Vec<[usize; 3]>, shape: Shape) -> Result<Self> {
        let v = vertices.iter().map(|p| [p[0], p[1], 0.0]).collect();
        Self::new(v, triangles, shape)
    }

    fn build(
        vertices: Vec<[f64; 3]>,
        mut triangles: Vec<[usize; 3]>,
        shape: Shape,
        repair: bool,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidInput("mesh has no triangles".into()));
        }
        let nv = vertices.len();
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::InvalidInput(format!(
                        "triangle {t} references vertex {v} of {nv}"
                    )));
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateTriangle { index: t, area: 0.0 });
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidInput(format!("vertex {v} is not referenced")));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite vertex coordinate".into()));
        }
        let embedding = if vertices.iter().all(|p| p[2] == 0.0) {
            Embedding::Planar
        } else {
            Embedding::Surface
        };

        let edges = edge_incidence(&triangles)?;
        if repair {
            orient_consistently(&mut triangles, &edges)?;
            if embedding == Embedding::Planar {
                orient_components_positive(&vertices, &mut triangles);
            }
        }
        for (key, inc) in &edges {
            if inc.len() == 2 {
                let d0 = directed(&triangles[inc[0]], key);
                let d1 = directed(&triangles[inc[1]], key);
                if d0 == d1 {
                    return Err(Error::Orientation(format!(
                        "triangles {} and {} traverse edge ({}, {}) in the same direction",
                        inc[0], inc[1], key.0, key.1
                    )));
                }
            }
        }

        let areas: Vec<f64> = triangles
            .iter()
            .map(|t| signed_area(&vertices, t, embedding))
            .collect();
        let mean = areas.iter().map(|a| a.abs()).sum::<f64>() / areas.len() as f64;
        for (t, &a) in areas.iter().enumerate() {
            if a < 0.0 {
                return Err(Error::Orientation(format!(
                    "triangle {t} is negatively oriented"
                )));
            }
            if a < DEGENERATE_AREA_FRACTION * mean {
                return Err(Error::DegenerateTriangle { index: t, area: a });
            }
        }

        let boundary_loops = extract_boundary_loops(&triangles, &edges)?;
        let curves = vec![None; boundary_loops.len()];
        Ok(Self {
            vertices,
            triangles,
            boundary_loops,
            embedding,
            curves,
            shape,
        })
    }

    pub(crate) fn with_curves(mut self, curves: Vec<Option<BoundaryCurve>>) -> Self {
        assert_eq!(curves.len(), self.boundary_loops.len());
        self.curves = curves;
        self
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn curves(&self) -> &[Option<BoundaryCurve>] {
        &self.curves
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn is_planar(&self) -> bool {
        self.embedding == Embedding::Planar
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Boundary vertices in loop order, loops concatenated.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.boundary_loops.iter().flatten().copied().collect()
    }

    /// Unsigned triangle area.
    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t], Embedding::Surface)
    }

    /// Unit normal of triangle `t` (the +z axis for planar meshes).
    pub fn triangle_normal(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let n = cross(sub(b, a), sub(c, a));
        let len = norm3(n);
        [n[0] / len, n[1] / len, n[2] / len]
    }

    /// Longest edge length.
    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .map(|(a, b)| norm3(sub(self.vertices[a], self.vertices[b])))
            })
            .fold(0.0, f64::max)
    }

    /// Undirected edges `(a, b)` with `a < b`, in order of first appearance.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (a.min(b), a.max(b));
                seen.entry(key).or_insert_with(|| {
                    out.push(key);
                });
            }
        }
        out
    }

    /// Connected-component label of every vertex, labels numbered by first
    /// appearance in vertex order, and the component count.
    pub fn vertex_components(&self) -> (Vec<usize>, usize) {
        let nv = self.vertices.len();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in &self.triangles {
            for k in 1..3 {
                let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut label = vec![usize::MAX; nv];
        let mut labels = vec![0; nv];
        let mut count = 0;
        for v in 0..nv {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            labels[v] = label[r];
        }
        (labels, count)
    }

    pub fn topology(&self) -> TopologyInfo {
        let nv = self.vertices.len();
        let (labels, b0) = self.vertex_components();
        let comp_of = |v: usize| labels[v];

        let mut chi = vec![0i64; b0];
        for v in 0..nv {
            chi[comp_of(v)] += 1;
        }
        for (a, _) in self.edges() {
            chi[comp_of(a)] -= 1;
        }
        for t in &self.triangles {
            chi[comp_of(t[0])] += 1;
        }
        let mut has_boundary = vec![false; b0];
        for l in &self.boundary_loops {
            has_boundary[comp_of(l[0])] = true;
        }
        let b1 = (0..b0)
            .map(|c| {
                let top = if has_boundary[c] { 1 } else { 2 };
                (top - chi[c]).max(0) as usize
            })
            .sum();
        TopologyInfo {
            b0,
            b1,
            boundary_component_count: self.boundary_loops.len(),
            euler_characteristic: chi.iter().sum(),
        }
    }

    pub fn measures(&self) -> Measures {
        let area = (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum();
        let loop_lengths: Vec<f64> = self
            .boundary_loops
            .iter()
            .map(|l| {
                (0..l.len())
                    .map(|k| norm3(sub(self.vertices[l[(k + 1) % l.len()]], self.vertices[l[k]])))
                    .sum()
            })
            .collect();
        Measures {
            area,
            boundary_length: loop_lengths.iter().sum(),
            loop_lengths,
        }
    }

    /// Uniform 1→4 subdivision. Midpoints of boundary edges on loops with an
    /// analytic curve are projected back onto it.
    pub fn refine(&self) -> Mesh {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut boundary_curve_of: HashMap<(usize, usize), BoundaryCurve> = HashMap::new();
        for (l, lp) in self.boundary_loops.iter().enumerate() {
            if let Some(curve) = self.curves[l] {
                for k in 0..lp.len() {
                    let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
                    boundary_curve_of.insert((a.min(b), a.max(b)), curve);
                }
            }
        }
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                let mut m = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0];
                if let Some(curve) = boundary_curve_of.get(&key) {
                    m = curve.project(m);
                }
                vertices.push(m);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        debug_assert!(vertices.len() > nv);
        let refined = Mesh::new(vertices, triangles, self.shape.clone())
            .expect("refinement of a valid mesh is valid");
        // loops keep their order: each loop still starts at its smallest, original vertex
        refined.with_curves(self.curves.clone())
    }

    /// Copy scaled by `c > 0` about the origin.
    pub fn scaled(&self, c: f64) -> Result<Mesh> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor {c} must be positive")));
        }
        let mut out = self.clone();
        for p in &mut out.vertices {
            for x in p.iter_mut() {
                *x *= c;
            }
        }
        out.curves = self.curves.iter().map(|cv| cv.map(|cv| cv.scaled(c))).collect();
        out.shape = self.shape.scaled(c);
        Ok(out)
    }

    /// Two meshes side by side as one mesh (vertex indices of `other` shifted).
    pub fn disjoint_union(&self, other: &Mesh) -> Result<Mesh> {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| t.map(|v| v + off)));
        let mut curves = self.curves.clone();
        curves.extend_from_slice(&other.curves);
        Ok(Mesh::new(vertices, triangles, Shape::Union)?.with_curves(curves))
    }
}

type EdgeKey = (usize, usize);

fn edge_incidence(triangles: &[[usize; 3]]) -> Result<HashMap<EdgeKey, Vec<usize>>> {
    let mut edges: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            let inc = edges.entry((a.min(b), a.max(b))).or_default();
            inc.push(t);
            if inc.len() > 2 {
                return Err(Error::NonManifold(format!(
                    "edge ({}, {}) is shared by {} triangles",
                    a.min(b),
                    a.max(b),
                    inc.len()
                )));
            }
        }
    }
    Ok(edges)
}

/// Whether triangle `t` traverses edge `key` as `key.0 → key.1`.
fn directed(t: &[usize; 3], key: &EdgeKey) -> bool {
    (0..3).any(|k| t[k] == key.0 && t[(k + 1) % 3] == key.1)
}

fn orient_consistently(triangles: &mut [[usize; 3]], edges: &HashMap<EdgeKey, Vec<usize>>) -> Result<()> {
    let nt = triangles.len();
    let mut neighbors: Vec<Vec<(usize, EdgeKey)>> = vec![Vec::new(); nt];
    for (key, inc) in edges {
        if inc.len() == 2 {
            neighbors[inc[0]].push((inc[1], *key));
            neighbors[inc[1]].push((inc[0], *key));
        }
    }
    for n in &mut neighbors {
        n.sort_unstable();
    }
    let mut visited = vec![false; nt];
    for seed in 0..nt {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            for &(u, key) in &neighbors[t] {
                let same = directed(&triangles[t], &key) == directed(&triangles[u], &key);
                if !visited[u] {
                    if same {
                        triangles[u].swap(1, 2);
                    }
                    visited[u] = true;
                    stack.push(u);
                } else if same {
                    return Err(Error::Orientation(
                        "surface is not orientable; cannot repair".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn orient_components_positive(vertices: &[[f64; 3]], triangles: &mut [[usize; 3]]) {
    let nv = vertices.len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for t in triangles.iter() {
        for k in 1..3 {
            let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut total: HashMap<usize, f64> = HashMap::new();
    for t in triangles.iter() {
        let r = find(&mut parent, t[0]);
        *total.entry(r).or_default() += signed_area(vertices, t, Embedding::Planar);
    }
    for t in triangles.iter_mut() {
        let r = find(&mut parent, t[0]);
        if total[&r] < 0.0 {
            t.swap(1, 2);
        }
    }
}

fn extract_boundary_loops(
    triangles: &[[usize; 3]],
    edges: &HashMap<EdgeKey, Vec<usize>>,
) -> Result<Vec<Vec<usize>>> {
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut starts = Vec::new();
    for (key, inc) in edges {
        if inc.len() == 1 {
            let t = &triangles[inc[0]];
            let (a, b) = if directed(t, key) { (key.0, key.1) } else { (key.1, key.0) };
            if next.insert(a, b).is_some() {
                return Err(Error::NonManifold(format!(
                    "vertex {a}: boundary is not a disjoint union of simple cycles"
                )));
            }
            starts.push(a);
        }
    }
    starts.sort_unstable();
    let mut visited = HashMap::new();
    let mut loops = Vec::new();
    for &s in &starts {
        if visited.contains_key(&s) {
            continue;
        }
        let mut lp = vec![s];
        visited.insert(s, ());
        let mut v = next[&s];
        while v != s {
            if visited.insert(v, ()).is_some() {
                return Err(Error::NonManifold(format!("vertex {v}: boundary loop is not simple")));
            }
            lp.push(v);
            v = *next.get(&v).ok_or_else(|| {
                Error::NonManifold(format!("vertex {v}: open boundary chain"))
            })?;
        }
        loops.push(lp);
    }
    Ok(loops)
}

fn signed_area(vertices: &[[f64; 3]], t: &[usize; 3], embedding: Embedding) -> f64 {
    let [a, b, c] = t.map(|i| vertices[i]);
    match embedding {
        Embedding::Planar => 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])),
        Embedding::Surface => 0.5 * norm3(cross(sub(b, a), sub(c, a))),
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> Mesh {
        Mesh::planar(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], Shape::Union).unwrap()
    }

    #[test]
    fn single_triangle_has_one_loop() {
        let m = unit_triangle();
        assert_eq!(m.boundary_loops(), &[vec![0, 1, 2]]);
        let t = m.topology();
        assert_eq!((t.b0, t.b1, t.euler_characteristic), (1, 0, 1));
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]];
        let err = Mesh::planar(&v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]], Shape::Union).unwrap_err();
        assert!(err.to_string().contains("non-manifold"), "{err}");
    }

    #[test]
    fn rejects_negative_and_degenerate_triangles() {
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Mesh::planar(&v, vec![[0, 2, 1]], Shape::Union),
            Err(Error::Orientation(_))
        ));
        let flat = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Mesh::planar(&flat, vec![[0, 1, 3], [1, 2, 3], [0, 2, 1]], Shape::Union),
            Err(_)
        ));
    }

    #[test]
    fn repair_flips_to_positive() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let m = Mesh::with_repaired_orientation(v, vec![[0, 2, 1], [0, 2, 3]], Shape::Union).unwrap();
        assert!((m.measures().area - 1.0).abs() < 1e-15);
        assert_eq!(m.boundary_loops().len(), 1);
    }

    #[test]
    fn bowtie_vertex_is_rejected() {
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let err = Mesh::planar(&v, vec![[0, 1, 2], [0, 3, 4]], Shape::Union).unwrap_err();
        assert!(matches!(err, Error::NonManifold(_)));
    }
}
