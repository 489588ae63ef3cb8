//! Steklov and boundary-Laplace spectra: FEM solvers and closed-form oracles.
//!
//! Every FEM spectrum is computed by a dense generalized symmetric eigensolve
//! on boundary degrees of freedom. For Steklov problems the interior is
//! eliminated first through a Schur complement of the energy form.

mod analytic;

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{boundary_laplacian, edge_forms_1form, mass_boundary, stiffness_scalar, DiscreteOperator};
use crate::linalg::{sym_eig, SparseCholesky, SparseMatrix};
use crate::mesh::Mesh;

pub use analytic::{
    annulus_steklov_analytic, annulus_steklov_mode, circle_laplace_analytic,
    circles_laplace_analytic, disk_steklov_1form_analytic, disk_steklov_analytic,
};

/// Eigenvalues below this fraction of the largest computed eigenvalue are
/// counted as zero modes.
pub const ZERO_MODE_REL: f64 = 1e-8;
/// Negative eigenvalues above `-NEGATIVE_CLAMP_REL · max` are round-off.
pub const NEGATIVE_CLAMP_REL: f64 = 1e-9;
/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const CLUSTER_REL_GAP: f64 = 1e-6;
/// Per-pair residual bound relative to the operator scale.
pub const RESIDUAL_REL: f64 = 1e-8;
/// Column block width of the Schur complement solves.
const SCHUR_BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumKind {
    #[serde(rename = "steklov-0")]
    Steklov0,
    #[serde(rename = "steklov-1")]
    Steklov1,
    #[serde(rename = "boundary-laplace")]
    BoundaryLaplace,
}

impl SpectrumKind {
    pub fn label(self) -> &'static str {
        match self {
            SpectrumKind::Steklov0 => "steklov-0",
            SpectrumKind::Steklov1 => "steklov-1",
            SpectrumKind::BoundaryLaplace => "boundary-laplace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum Provenance {
    Fem { h: f64 },
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    /// 1-based index of the first member.
    pub first: usize,
    pub multiplicity: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub kind: SpectrumKind,
    pub provenance: Provenance,
    /// Ascending, repeated according to multiplicity.
    pub values: Vec<f64>,
    pub zero_modes: usize,
    /// Mesh entities (boundary vertices or boundary edges) indexing the rows
    /// of `eigenvectors`.
    #[serde(skip)]
    pub dofs: Vec<usize>,
    /// Eigenvectors as columns, orthonormal in the boundary mass.
    #[serde(skip)]
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `k`-th eigenvalue, 1-based as in `σ_1 ≤ σ_2 ≤ ⋯`.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub fn h(&self) -> Option<f64> {
        match self.provenance {
            Provenance::Fem { h } => Some(h),
            Provenance::Analytic => None,
        }
    }

    pub fn clusters(&self) -> Vec<Cluster> {
        let mut out: Vec<Cluster> = Vec::new();
        let mut start = 0;
        for k in 1..=self.values.len() {
            let split = k == self.values.len() || {
                let (a, b) = (self.values[k - 1], self.values[k]);
                (b - a).abs() > CLUSTER_REL_GAP * a.abs().max(b.abs())
            };
            if split {
                let members = &self.values[start..k];
                out.push(Cluster {
                    first: start + 1,
                    multiplicity: members.len(),
                    mean: members.iter().sum::<f64>() / members.len() as f64,
                });
                start = k;
            }
        }
        out
    }

    /// CSV with columns `index,value,kind,provenance,h`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,value,kind,provenance,h\n");
        let (prov, h) = match self.provenance {
            Provenance::Fem { h } => ("fem", h.to_string()),
            Provenance::Analytic => ("analytic", String::new()),
        };
        for (i, v) in self.values.iter().enumerate() {
            writeln!(s, "{},{},{},{},{}", i + 1, v, self.kind.label(), prov, h).unwrap();
        }
        s
    }

    /// Eigenvector `k` (1-based) over `dofs`.
    pub fn vector(&self, k: usize) -> Option<Vec<f64>> {
        let v = self.eigenvectors.as_ref()?;
        (k >= 1 && k <= v.ncols()).then(|| v.column(k - 1).iter().copied().collect())
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Columns, `B`-orthonormal.
    pub vectors: DMatrix<f64>,
    /// Largest eigenvalue of the full problem.
    pub max_value: f64,
    /// Largest `‖A x − λ B x‖` over the returned pairs, relative to
    /// `(‖A‖ + |λ|‖B‖)‖x‖`.
    pub max_residual: f64,
}

/// Ascending eigenpairs of `A x = λ B x` for dense symmetric `A` and
/// symmetric positive definite `B`, via `B = L Lᵀ` and the standard problem
/// `L⁻¹ A L⁻ᵀ`. Round-off negatives are clamped to zero.
pub fn generalized_sym_eig(a: &DMatrix<f64>, b: &DMatrix<f64>, count: usize) -> Result<Eigenpairs> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "pencil of {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if count > n {
        return Err(Error::CountTooLarge {
            requested: count,
            available: n,
        });
    }
    let chol = nalgebra::Cholesky::new(b.clone()).ok_or_else(|| {
        Error::NotPositiveDefinite(format!("mass matrix of size {n} has no Cholesky factor"))
    })?;
    let l = chol.l();
    let la = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::EigenBreakdown("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&la.transpose())
        .ok_or_else(|| Error::EigenBreakdown("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let (mut values, y) = sym_eig(&c)?;
    let max_value = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(&lo) = values.first() {
        if lo < -NEGATIVE_CLAMP_REL * max_value {
            return Err(Error::NegativeEigenvalue {
                value: lo,
                largest: max_value,
            });
        }
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let y = y.columns(0, count).into_owned();
    let vectors = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::EigenBreakdown("singular Cholesky factor".into()))?;
    let (na, nb) = (a.norm(), b.norm());
    let mut max_residual = 0.0_f64;
    for k in 0..count {
        let x = vectors.column(k);
        let r = a * x - b * x * values[k];
        let scale = (na + values[k].abs() * nb) * x.norm();
        if scale > 0.0 {
            max_residual = max_residual.max(r.norm() / scale);
        }
    }
    if max_residual > RESIDUAL_REL {
        return Err(Error::EigenBreakdown(format!(
            "relative residual {max_residual:e} exceeds {RESIDUAL_REL:e}"
        )));
    }
    values.truncate(count);
    Ok(Eigenpairs {
        values,
        vectors,
        max_value,
        max_residual,
    })
}

/// [`generalized_sym_eig`] on two assembled operators.
pub fn generalized_sym_eig_operators(
    a: &DiscreteOperator,
    b: &DiscreteOperator,
    count: usize,
) -> Result<Eigenpairs> {
    generalized_sym_eig(&a.matrix.to_dense(), &b.matrix.to_dense(), count)
}

/// `K_bb − K_bi K_ii⁻¹ K_ib`, solved in column blocks.
pub fn schur_complement(k: &SparseMatrix, boundary: &[usize], interior: &[usize]) -> Result<DMatrix<f64>> {
    let kbb = k.restrict(boundary, boundary).to_dense();
    if interior.is_empty() {
        return Ok(kbb);
    }
    let kii = k.restrict(interior, interior);
    let chol = SparseCholesky::new(&kii).map_err(|e| Error::SingularInterior(e.to_string()))?;
    let kib = k.restrict(interior, boundary);
    let kbi = k.restrict(boundary, interior);
    let nb = boundary.len();
    let mut s = kbb;
    let mut start = 0;
    while start < nb {
        let width = SCHUR_BLOCK.min(nb - start);
        let mut rhs = DMatrix::zeros(interior.len(), width);
        for i in 0..interior.len() {
            for (j, v) in kib.row(i) {
                if j >= start && j < start + width {
                    rhs[(i, j - start)] = v;
                }
            }
        }
        let x = chol.solve_columns(&rhs);
        for r in 0..nb {
            for (i, v) in kbi.row(r) {
                for c in 0..width {
                    s[(r, start + c)] -= v * x[(i, c)];
                }
            }
        }
        start += width;
    }
    Ok((&s + s.transpose()) * 0.5)
}

fn normalize_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let big = col.amax();
        if let Some(first) = col.iter().position(|x| x.abs() > 1e-8 * big) {
            if col[first] < 0.0 {
                col.neg_mut();
            }
        }
    }
}

fn finish(
    kind: SpectrumKind,
    mesh: &Mesh,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    count: usize,
    expected_zero: usize,
    dofs: Vec<usize>,
) -> Result<Spectrum> {
    let n = a.nrows();
    if count > n {
        return Err(Error::CountTooLarge {
            requested: count,
            available: n,
        });
    }
    let all = generalized_sym_eig(a, b, n)?;
    let zero_modes = all
        .values
        .iter()
        .filter(|&&v| v <= ZERO_MODE_REL * all.max_value)
        .count();
    if zero_modes != expected_zero {
        return Err(Error::ZeroModeMismatch {
            kind: kind.label().into(),
            expected: expected_zero,
            found: zero_modes,
        });
    }
    let mut values = all.values;
    for v in values.iter_mut().take(zero_modes) {
        *v = 0.0;
    }
    values.truncate(count);
    let mut vectors = all.vectors.columns(0, count).into_owned();
    normalize_signs(&mut vectors);
    Ok(Spectrum {
        kind,
        provenance: Provenance::Fem {
            h: mesh.max_edge_length(),
        },
        values,
        zero_modes,
        dofs,
        eigenvectors: Some(vectors),
    })
}

/// Boundary DtN matrix `S` and boundary mass `B` for functions, over the
/// boundary vertices in loop order.
pub fn dtn_functions(mesh: &Mesh) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<usize>)> {
    let k = stiffness_scalar(mesh)?;
    let b = mass_boundary(mesh);
    let bd = k.dofs.boundary.clone();
    let s = schur_complement(&k.matrix, &bd, &k.dofs.interior)?;
    let bm = b.matrix.restrict(&bd, &bd).to_dense();
    Ok((s, bm, bd))
}

/// First `count` Steklov eigenvalues `σ^{(0)}` of functions.
pub fn steklov_functions(mesh: &Mesh, count: usize) -> Result<Spectrum> {
    let (s, b, bd) = dtn_functions(mesh)?;
    let b0 = mesh.topology().b0;
    finish(SpectrumKind::Steklov0, mesh, &s, &b, count, b0, bd)
}

/// First `count` Steklov eigenvalues `σ^{(1)}` of 1-forms on a planar mesh.
///
/// The Rayleigh quotient is `((dω,dω) + (δω,δω)) / ∫_{∂M}|ι*ω|²` with the
/// weak coderivative taken over all vertices, so the vanishing normal trace
/// is the natural boundary condition of the minimization.
pub fn steklov_1forms_planar(mesh: &Mesh, count: usize) -> Result<Spectrum> {
    let forms = edge_forms_1form(mesh)?;
    let dofs = forms.complex.dof_map();
    if dofs.boundary.is_empty() {
        return Err(Error::EmptySpace);
    }
    let a = forms.energy();
    let s = schur_complement(&a, &dofs.boundary, &dofs.interior)?;
    let b = forms
        .tangential_boundary_mass
        .matrix
        .restrict(&dofs.boundary, &dofs.boundary)
        .to_dense();
    let b1 = mesh.topology().b1;
    finish(SpectrumKind::Steklov1, mesh, &s, &b, count, b1, dofs.boundary)
}

/// First `count` eigenvalues of the Laplacian of the boundary curves, all
/// loops merged and sorted.
pub fn boundary_laplace(mesh: &Mesh, count: usize) -> Result<Spectrum> {
    let (k, m) = boundary_laplacian(mesh);
    let loops = mesh.boundary_loops().len();
    let dofs = k.dofs.entities.clone();
    finish(
        SpectrumKind::BoundaryLaplace,
        mesh,
        &k.matrix.to_dense(),
        &m.matrix.to_dense(),
        count,
        loops,
        dofs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_annulus, generate_disk};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_pencil() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let b = DMatrix::identity(3, 3);
        let e = generalized_sym_eig(&a, &b, 3).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let e = generalized_sym_eig(&a, &a, 3).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn random_pencil_vectors_are_b_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 6;
        let r = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &r * r.transpose();
        let b = &q * q.transpose() + DMatrix::identity(n, n);
        let e = generalized_sym_eig(&a, &b, n).unwrap();
        let g = e.vectors.transpose() * &b * &e.vectors;
        assert!((g - DMatrix::identity(n, n)).amax() < 1e-10);
        assert!(e.max_residual < 1e-12);
    }

    #[test]
    fn indefinite_mass_rejected() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            generalized_sym_eig(&a, &b, 2),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(matches!(
            generalized_sym_eig(&a, &a, 3),
            Err(Error::CountTooLarge { .. })
        ));
    }

    #[test]
    fn disk_steklov_coarse() {
        let m = generate_disk(1.0, 0.1).unwrap();
        let s = steklov_functions(&m, 6).unwrap();
        assert_eq!(s.zero_modes, 1);
        assert_eq!(s.values[0], 0.0);
        for (v, e) in s.values[1..].iter().zip([1.0, 1.0, 2.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 2e-2 * e, "{v} vs {e}");
        }
        let c = s.clusters();
        assert_eq!(c[0].multiplicity, 1);
        let first = s.vector(1).unwrap();
        assert!(first.iter().all(|x| (x - first[0]).abs() < 1e-8 && *x > 0.0));
    }

    #[test]
    fn annulus_zero_modes() {
        let m = generate_annulus(0.5, 1.0, 0.1).unwrap();
        assert_eq!(steklov_functions(&m, 3).unwrap().zero_modes, 1);
        assert_eq!(boundary_laplace(&m, 3).unwrap().zero_modes, 2);
        assert_eq!(steklov_1forms_planar(&m, 3).unwrap().zero_modes, 1);
    }

    #[test]
    fn count_too_large_is_reported() {
        let m = generate_disk(1.0, 0.25).unwrap();
        let nb = m.boundary_vertices().len();
        assert!(matches!(
            steklov_functions(&m, nb + 1),
            Err(Error::CountTooLarge { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let s = disk_steklov_analytic(1.0, 3);
        assert_eq!(
            s.to_csv(),
            "index,value,kind,provenance,h\n1,0,steklov-0,analytic,\n2,1,steklov-0,analytic,\n3,1,steklov-0,analytic,\n"
        );
    }

    #[test]
    fn clusters_group_near_equal_values() {
        let s = Spectrum {
            kind: SpectrumKind::Steklov0,
            provenance: Provenance::Analytic,
            values: vec![0.0, 1.0, 1.0 + 1e-9, 2.0, 2.0, 2.5],
            zero_modes: 1,
            dofs: Vec::new(),
            eigenvectors: None,
        };
        let m: Vec<usize> = s.clusters().iter().map(|c| c.multiplicity).collect();
        assert_eq!(m, vec![1, 2, 2, 1]);
    }
}
