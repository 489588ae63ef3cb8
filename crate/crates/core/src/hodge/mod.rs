//! Harmonic extension, harmonic Neumann fields and conjugate harmonic
//! functions on triangulated surfaces, plus the test-subspace constructions
//! built from them.

mod proof;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_edge_forms, gradient_field, hodge_star_scalar_gradient, mass_boundary, stiffness_scalar,
    EdgeForms, TriangleField,
};
use crate::linalg::{dot, SparseCholesky, SparseMatrix};
use crate::mesh::Mesh;

pub use proof::{
    build_proof_subspace, matrices_a_b_thm12, matrix_a, BoundCheck, DiagonalCheck, MatrixAReport,
    ProofContext, ProofSubspace, Thm12Report,
};

/// Residual bound for membership in the harmonic Neumann space.
pub const HARMONIC_FIELD_TOL: f64 = 1e-8;
/// Relative interior residual `‖(K u)_I‖ / (‖K‖‖u‖)` accepted as harmonic.
pub const HARMONIC_RESIDUAL_TOL: f64 = 1e-8;
const INVERSE_ITERATIONS: usize = 12;

/// Discrete harmonic extension operator with a reusable interior factor.
#[derive(Debug)]
pub struct HarmonicExtender {
    boundary: Vec<usize>,
    interior: Vec<usize>,
    kib: SparseMatrix,
    chol: Option<SparseCholesky>,
    nv: usize,
}

impl HarmonicExtender {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let k = stiffness_scalar(mesh)?;
        let (boundary, interior) = (k.dofs.boundary.clone(), k.dofs.interior.clone());
        let chol = if interior.is_empty() {
            None
        } else {
            Some(
                SparseCholesky::new(&k.matrix.restrict(&interior, &interior))
                    .map_err(|e| Error::SingularInterior(e.to_string()))?,
            )
        };
        Ok(Self {
            kib: k.matrix.restrict(&interior, &boundary),
            boundary,
            interior,
            chol,
            nv: mesh.num_vertices(),
        })
    }

    /// Boundary vertices in the order expected by [`HarmonicExtender::extend`].
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Solves `K_II u_I = −K_IB g` and returns the full vertex field.
    pub fn extend(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.boundary.len());
        let mut u = vec![0.0; self.nv];
        for (&v, &x) in self.boundary.iter().zip(g) {
            u[v] = x;
        }
        if let Some(chol) = &self.chol {
            let rhs: Vec<f64> = self.kib.mul_vec(g).into_iter().map(|x| -x).collect();
            for (&v, x) in self.interior.iter().zip(chol.solve(&rhs)) {
                u[v] = x;
            }
        }
        u
    }
}

/// Harmonic extension of boundary data given in the order of
/// `mesh.boundary_vertices()`.
pub fn harmonic_extension(mesh: &Mesh, boundary_values: &[f64]) -> Result<Vec<f64>> {
    let b = mesh.boundary_vertices();
    if boundary_values.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} boundary values for {} boundary vertices",
            boundary_values.len(),
            b.len()
        )));
    }
    Ok(HarmonicExtender::new(mesh)?.extend(boundary_values))
}

/// Basis of the discrete harmonic Neumann fields, orthonormal in the
/// Whitney mass.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicFieldBasis {
    /// Edge DOFs of each field.
    pub fields: Vec<Vec<f64>>,
    pub gram: Vec<Vec<f64>>,
    /// Per field: `‖dω‖`, `‖δω‖` and weak normal trace, each relative to the
    /// operator scale times `‖ω‖`.
    pub d_residual: Vec<f64>,
    pub coderivative_residual: Vec<f64>,
    pub normal_trace_residual: Vec<f64>,
    /// `periods[k][l]`: circulation of field `k` around boundary loop `l`.
    pub periods: Vec<Vec<f64>>,
    /// Smallest nonzero Ritz value seen, for diagnostics.
    pub spectral_gap: f64,
}

impl HarmonicFieldBasis {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

fn seed_block(n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |i, j| {
        let x = ((i * 7919 + j * 104_729 + 1) as f64 * 0.618_033_988_749_895).sin();
        x * 43_758.545_312_3 - (x * 43_758.545_312_3).floor() - 0.5
    })
}

fn sparse_times_dense(a: &SparseMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), x.ncols());
    for i in 0..a.nrows() {
        for (k, v) in a.row(i) {
            for c in 0..x.ncols() {
                out[(i, c)] += v * x[(k, c)];
            }
        }
    }
    out
}

/// Kernel of the 1-form energy: fields with `dω = 0`, `δω = 0` and vanishing
/// weak normal trace. Found by shifted block inverse iteration followed by a
/// Rayleigh–Ritz step; the number of near-zero Ritz values must equal `b1`.
pub fn harmonic_neumann_fields(mesh: &Mesh) -> Result<HarmonicFieldBasis> {
    let forms = assemble_edge_forms(mesh);
    harmonic_fields_from_forms(mesh, &forms)
}

pub(crate) fn harmonic_fields_from_forms(mesh: &Mesh, forms: &EdgeForms) -> Result<HarmonicFieldBasis> {
    let b1 = mesh.topology().b1;
    let a = forms.energy();
    let m1 = &forms.mass;
    let scale = a.diagonal().iter().sum::<f64>() / m1.diagonal().iter().sum::<f64>();
    let tau = 1e-6 * scale;
    let shifted = SparseCholesky::new(&a.add(&m1.scale(tau)))?;
    let ne = a.nrows();
    let p = b1 + 2;
    let mut x = seed_block(ne, p);
    let mut ritz = Vec::new();
    for _ in 0..INVERSE_ITERATIONS {
        x = shifted.solve_columns(&sparse_times_dense(m1, &x));
        let ax = sparse_times_dense(&a, &x);
        let mx = sparse_times_dense(m1, &x);
        let h = x.transpose() * ax;
        let g = x.transpose() * mx;
        let pairs = crate::spectra::generalized_sym_eig(&((&h + h.transpose()) * 0.5), &((&g + g.transpose()) * 0.5), p)?;
        x = &x * &pairs.vectors;
        ritz = pairs.values;
    }
    let zero = ritz.iter().filter(|&&v| v <= 1e-8 * scale).count();
    if zero != b1 {
        return Err(Error::ZeroModeMismatch {
            kind: "harmonic Neumann fields".into(),
            expected: b1,
            found: zero,
        });
    }
    let mut fields = Vec::with_capacity(b1);
    let (mut dres, mut cres, mut nres, mut periods) = (vec![], vec![], vec![], vec![]);
    for k in 0..b1 {
        let mut w: Vec<f64> = x.column(k).iter().copied().collect();
        let big = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if let Some(first) = w.iter().position(|v| v.abs() > 1e-8 * big) {
            if w[first] < 0.0 {
                w.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let mm = m1.quad_form(&w);
        let rel = |q: f64| (q.max(0.0) / (scale * mm)).sqrt();
        dres.push(rel(forms.d_form.quad(&w)));
        cres.push(rel(forms.coderivative_form.quad(&w)));
        nres.push(rel(forms.normal_trace_constraint.quad(&w)));
        periods.push(
            (0..mesh.boundary_loops().len())
                .map(|l| forms.complex.loop_integral(mesh, l, &w))
                .collect(),
        );
        fields.push(w);
    }
    let gram = (0..b1)
        .map(|i| (0..b1).map(|j| m1.bilinear(&fields[i], &fields[j])).collect())
        .collect();
    Ok(HarmonicFieldBasis {
        fields,
        gram,
        d_residual: dres,
        coderivative_residual: cres,
        normal_trace_residual: nres,
        periods,
        spectral_gap: ritz.get(b1).copied().unwrap_or(f64::NAN),
    })
}

/// A harmonic function and its conjugate, `dv ≈ *du`.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugatePair {
    #[serde(skip)]
    pub u: Vec<f64>,
    #[serde(skip)]
    pub v: Vec<f64>,
    /// `‖dv − *du‖_{L²}`.
    pub residual: f64,
    /// `residual / ‖du‖`.
    pub relative_residual: f64,
    /// Relative overlap of `*du` with the harmonic Neumann fields.
    pub overlap: f64,
    /// Overlap tolerance the pair was accepted under.
    pub tol: f64,
}

/// Least-squares conjugation `v = argmin ‖dv − *du‖` with a reusable
/// factorization. The constant per component is fixed by a zero boundary
/// mean.
#[derive(Debug)]
pub struct ConjugateSolver {
    k: SparseMatrix,
    kept: Vec<usize>,
    chol: SparseCholesky,
    labels: Vec<usize>,
    components: usize,
    bmass: SparseMatrix,
    forms: EdgeForms,
    fields: HarmonicFieldBasis,
    nv: usize,
}

impl ConjugateSolver {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let forms = assemble_edge_forms(mesh);
        let fields = harmonic_fields_from_forms(mesh, &forms)?;
        Self::with_fields(mesh, forms, fields)
    }

    pub(crate) fn with_fields(mesh: &Mesh, forms: EdgeForms, fields: HarmonicFieldBasis) -> Result<Self> {
        let k = stiffness_scalar(mesh)?.matrix;
        let (labels, components) = mesh.vertex_components();
        let mut pinned = vec![false; components];
        let kept: Vec<usize> = (0..mesh.num_vertices())
            .filter(|&v| {
                let first = !pinned[labels[v]];
                pinned[labels[v]] = true;
                !first
            })
            .collect();
        let chol = SparseCholesky::new(&k.restrict(&kept, &kept))
            .map_err(|e| Error::SingularInterior(e.to_string()))?;
        Ok(Self {
            k,
            kept,
            chol,
            labels,
            components,
            bmass: mass_boundary(mesh).matrix,
            forms,
            fields,
            nv: mesh.num_vertices(),
        })
    }

    pub fn fields(&self) -> &HarmonicFieldBasis {
        &self.fields
    }

    /// `∫ ⟨*du, h_k⟩` for every harmonic field `h_k`.
    pub fn periods(&self, mesh: &Mesh, u: &[f64]) -> Vec<f64> {
        if self.fields.is_empty() {
            return Vec::new();
        }
        let load = hodge_star_scalar_gradient(mesh, u).edge_load(mesh, &self.forms.complex);
        self.fields.fields.iter().map(|h| dot(&load, h)).collect()
    }

    /// Relative overlap `‖P_H *du‖ / ‖*du‖`.
    pub fn overlap(&self, mesh: &Mesh, u: &[f64]) -> f64 {
        let n = gradient_field(mesh, u).norm(mesh);
        if n == 0.0 {
            return 0.0;
        }
        self.periods(mesh, u).iter().map(|p| p * p).sum::<f64>().sqrt() / n
    }

    /// Least-squares conjugate without the period check.
    pub fn conjugate_unchecked(&self, mesh: &Mesh, u: &[f64]) -> Vec<f64> {
        let rhs = hodge_star_scalar_gradient(mesh, u).vertex_load(mesh);
        let reduced: Vec<f64> = self.kept.iter().map(|&v| rhs[v]).collect();
        let mut v = vec![0.0; self.nv];
        for (&i, x) in self.kept.iter().zip(self.chol.solve(&reduced)) {
            v[i] = x;
        }
        self.gauge(&mut v);
        v
    }

    fn gauge(&self, v: &mut [f64]) {
        let bv = self.bmass.mul_vec(v);
        let mut num = vec![0.0; self.components];
        let mut den = vec![0.0; self.components];
        let ones = vec![1.0; self.nv];
        let bone = self.bmass.mul_vec(&ones);
        for i in 0..self.nv {
            num[self.labels[i]] += bv[i];
            den[self.labels[i]] += bone[i];
        }
        // components without boundary fall back to the plain vertex mean
        let mut count = vec![0.0; self.components];
        let mut sum = vec![0.0; self.components];
        for i in 0..self.nv {
            count[self.labels[i]] += 1.0;
            sum[self.labels[i]] += v[i];
        }
        for i in 0..self.nv {
            let c = self.labels[i];
            v[i] -= if den[c] > 0.0 { num[c] / den[c] } else { sum[c] / count[c] };
        }
    }

    /// Relative interior residual of `K u`.
    pub fn harmonic_residual(&self, mesh: &Mesh, u: &[f64]) -> f64 {
        let ku = self.k.mul_vec(u);
        let mut on_boundary = vec![false; self.nv];
        for v in mesh.boundary_vertices() {
            on_boundary[v] = true;
        }
        let r: f64 = (0..self.nv)
            .filter(|&i| !on_boundary[i])
            .map(|i| ku[i] * ku[i])
            .sum::<f64>()
            .sqrt();
        let scale = self.k.frobenius_norm() * crate::linalg::norm(u);
        if scale == 0.0 {
            0.0
        } else {
            r / scale
        }
    }

    /// Checked conjugation: `u` must be discretely harmonic and `*du`
    /// orthogonal to the harmonic Neumann fields within `tol`.
    pub fn conjugate(&self, mesh: &Mesh, u: &[f64], tol: f64) -> Result<ConjugatePair> {
        let hres = self.harmonic_residual(mesh, u);
        if hres > HARMONIC_RESIDUAL_TOL {
            return Err(Error::NotHarmonic(hres));
        }
        let overlap = self.overlap(mesh, u);
        if overlap > tol {
            return Err(Error::PeriodObstruction { overlap });
        }
        let v = self.conjugate_unchecked(mesh, u);
        let (residual, relative_residual) = conjugate_residual(mesh, u, &v);
        Ok(ConjugatePair {
            u: u.to_vec(),
            v,
            residual,
            relative_residual,
            overlap,
            tol,
        })
    }
}

/// `‖dv − *du‖_{L²}` and the same divided by `‖du‖`.
pub fn conjugate_residual(mesh: &Mesh, u: &[f64], v: &[f64]) -> (f64, f64) {
    let r: TriangleField = gradient_field(mesh, v).sub(&hodge_star_scalar_gradient(mesh, u));
    let res = r.norm(mesh);
    let n = gradient_field(mesh, u).norm(mesh);
    (res, if n > 0.0 { res / n } else { 0.0 })
}

/// Conjugate harmonic function of a discretely harmonic `u`.
pub fn conjugate_harmonic(mesh: &Mesh, u: &[f64], tol: f64) -> Result<ConjugatePair> {
    ConjugateSolver::new(mesh)?.conjugate(mesh, u, tol)
}
