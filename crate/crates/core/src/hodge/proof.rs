//! Test subspaces built from harmonic extensions of boundary eigenfunctions
//! and their conjugates, with the matrices `A` (and `B`) whose eigenvalues
//! bound the Steklov spectrum from above.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{conjugate_residual, ConjugatePair, ConjugateSolver, HarmonicExtender};
use crate::error::{Error, Result};
use crate::fem::{boundary_laplacian, stiffness_scalar};
use crate::linalg::{dot, smallest_right_singular_vector, SparseMatrix};
use crate::mesh::Mesh;
use crate::spectra::{boundary_laplace, generalized_sym_eig, steklov_functions};

/// Relative slack allowed in the discrete min-max bounds.
pub const MINMAX_REL: f64 = 1e-6;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL: f64 = 1e-10;
const ENERGY_FLOOR: f64 = 1e-10;

/// Spectral data and reusable solves for one mesh.
pub struct ProofContext<'a> {
    mesh: &'a Mesh,
    b1: usize,
    stiffness: SparseMatrix,
    boundary: Vec<usize>,
    boundary_mass: SparseMatrix,
    boundary_stiffness: SparseMatrix,
    /// Boundary Laplace eigenvalues `λ_1, λ_2, …`.
    pub lambda: Vec<f64>,
    /// Steklov eigenvalues `σ_1, σ_2, …`.
    pub sigma: Vec<f64>,
    /// `φ̂_j` for `j = 1..`, harmonic extensions over all vertices.
    phi_hat: Vec<Vec<f64>>,
    conj: Vec<Vec<f64>>,
    periods: Vec<Vec<f64>>,
    /// Traces of the positive-eigenvalue Steklov eigenfunctions `ψ_1, ψ_2, …`.
    psi: Vec<Vec<f64>>,
    solver: ConjugateSolver,
}

impl<'a> ProofContext<'a> {
    /// Computes `phi_count` boundary eigenfunctions and `sigma_count` Steklov
    /// eigenpairs.
    pub fn new(mesh: &'a Mesh, phi_count: usize, sigma_count: usize) -> Result<Self> {
        let b1 = mesh.topology().b1;
        let stiffness = stiffness_scalar(mesh)?.matrix;
        let boundary = mesh.boundary_vertices();
        let (kb, mb) = boundary_laplacian(mesh);
        let blap = boundary_laplace(mesh, phi_count)?;
        let stek = steklov_functions(mesh, sigma_count)?;
        let mut phi: Vec<Vec<f64>> = (1..=phi_count).map(|k| blap.vector(k).unwrap()).collect();
        force_constant_first(&mut phi, &mb.matrix, blap.zero_modes);
        let ext = HarmonicExtender::new(mesh)?;
        let solver = ConjugateSolver::new(mesh)?;
        let phi_hat: Vec<Vec<f64>> = phi.iter().map(|g| ext.extend(g)).collect();
        let conj = phi_hat.iter().map(|u| solver.conjugate_unchecked(mesh, u)).collect();
        let periods = phi_hat.iter().map(|u| solver.periods(mesh, u)).collect();
        let psi = (2..=sigma_count).map(|k| stek.vector(k).unwrap()).collect();
        Ok(Self {
            mesh,
            b1,
            stiffness,
            boundary,
            boundary_mass: mb.matrix,
            boundary_stiffness: kb.matrix,
            lambda: blap.values,
            sigma: stek.values,
            phi_hat,
            conj,
            periods,
            psi,
            solver,
        })
    }

    pub fn b1(&self) -> usize {
        self.b1
    }

    fn trace(&self, u: &[f64]) -> Vec<f64> {
        self.boundary.iter().map(|&v| u[v]).collect()
    }

    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        self.stiffness.bilinear(u, v)
    }

    pub fn boundary_pairing(&self, u: &[f64], v: &[f64]) -> f64 {
        self.boundary_mass.bilinear(&self.trace(u), &self.trace(v))
    }

    fn tangential_energy(&self, u: &[f64]) -> f64 {
        self.boundary_stiffness.quad_form(&self.trace(u))
    }

    fn psi_row(&self, l: usize, field: &[f64]) -> f64 {
        dot(&self.psi[l], &self.boundary_mass.mul_vec(&self.trace(field)))
    }

    fn need(&self, phi: usize, sigma: usize) -> Result<()> {
        if phi > self.phi_hat.len() {
            return Err(Error::CountTooLarge {
                requested: phi,
                available: self.phi_hat.len(),
            });
        }
        if sigma > self.sigma.len() {
            return Err(Error::CountTooLarge {
                requested: sigma,
                available: self.sigma.len(),
            });
        }
        Ok(())
    }

    /// Null vector of the constraint rows over `φ̂_2..φ̂_top`, each row given
    /// as one value per basis function.
    fn null_combination(&self, rows: &[Vec<f64>], unknowns: usize) -> Result<Combination> {
        let mut c = DMatrix::zeros(rows.len(), unknowns);
        for (r, row) in rows.iter().enumerate() {
            let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            let s = if n > 0.0 { 1.0 / n } else { 0.0 };
            for (j, x) in row.iter().enumerate() {
                c[(r, j)] = x * s;
            }
        }
        let (v, smin, smax) = if rows.is_empty() {
            let mut v = nalgebra::DVector::zeros(unknowns);
            v[0] = 1.0;
            (v, 0.0, 0.0)
        } else {
            smallest_right_singular_vector(&c)
        };
        if rows.len() >= unknowns && smin > RANK_REL * smax {
            return Err(Error::DegenerateConstraints(format!(
                "{} constraints on {} unknowns leave no null vector (smallest singular value {smin:e})",
                rows.len(),
                unknowns
            )));
        }
        let mut coeffs: Vec<f64> = v.iter().copied().collect();
        let big = coeffs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if let Some(first) = coeffs.iter().position(|x| x.abs() > 1e-8 * big) {
            if coeffs[first] < 0.0 {
                coeffs.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(Combination {
            coefficients: coeffs,
            smallest_singular_value: smin,
            largest_singular_value: smax,
            constraints: rows.len(),
        })
    }

    fn combine(&self, source: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.num_vertices()];
        for (j, c) in coeffs.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(&source[j + 1]) {
                *o += c * x;
            }
        }
        out
    }

    /// Removes energy components along `basis` (unit energy, mutually
    /// orthogonal) and returns the relative energy of what was removed.
    fn energy_orthogonalize(&self, u: &mut [f64], basis: &[Vec<f64>]) -> f64 {
        let e0 = self.energy(u, u);
        let mut removed = 0.0;
        for b in basis {
            let p = self.energy(u, b);
            removed += p * p;
            for (x, y) in u.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        if e0 > 0.0 {
            (removed / e0).sqrt()
        } else {
            0.0
        }
    }

    fn normalize_energy(&self, u: &mut [f64], what: &str) -> Result<()> {
        let e = self.energy(u, u);
        let scale = self.stiffness.frobenius_norm() * u.iter().map(|x| x * x).sum::<f64>();
        if e <= ENERGY_FLOOR * scale || e <= 0.0 {
            return Err(Error::DegenerateConstraints(format!("{what} has vanishing energy")));
        }
        let s = 1.0 / e.sqrt();
        u.iter_mut().for_each(|x| *x *= s);
        Ok(())
    }

    fn pair(&self, u: &[f64], v: &[f64]) -> ConjugatePair {
        let (residual, relative_residual) = conjugate_residual(self.mesh, u, v);
        ConjugatePair {
            u: u.to_vec(),
            v: v.to_vec(),
            residual,
            relative_residual,
            overlap: self.solver.overlap(self.mesh, u),
            tol: f64::NAN,
        }
    }

    fn gram(&self, f: impl Fn(&[f64], &[f64]) -> f64, fields: &[Vec<f64>]) -> Vec<Vec<f64>> {
        fields
            .iter()
            .map(|a| fields.iter().map(|b| f(a, b)).collect())
            .collect()
    }
}

fn force_constant_first(phi: &mut [Vec<f64>], mass: &SparseMatrix, kernel: usize) {
    let n = phi[0].len();
    let ones = vec![1.0; n];
    let len = mass.quad_form(&ones);
    let mut basis: Vec<Vec<f64>> = vec![ones.iter().map(|x| x / len.sqrt()).collect()];
    for k in 0..kernel.min(phi.len()) {
        if basis.len() == kernel {
            break;
        }
        let mut v = phi[k].clone();
        for b in &basis {
            let p = mass.bilinear(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let nv = mass.quad_form(&v).sqrt();
        if nv > 1e-8 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    for (k, b) in basis.into_iter().enumerate() {
        if k < phi.len() {
            phi[k] = b;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Combination {
    coefficients: Vec<f64>,
    smallest_singular_value: f64,
    largest_singular_value: f64,
    constraints: usize,
}

/// One odd/even pair of the construction.
#[derive(Debug, Clone, Serialize)]
pub struct PairRecord {
    /// Highest boundary eigenfunction index used for `u_{2i−1}`.
    pub top_index: usize,
    /// Coefficients on `φ̂_2..φ̂_top`.
    pub coefficients: Vec<f64>,
    pub constraints: usize,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    pub conjugate: ConjugatePair,
    /// Relative energy removed from the conjugate when orthogonalizing it.
    pub conjugate_shift: f64,
}

/// Test functions `u_1, …, u_{2n}` with unit Dirichlet energy.
#[derive(Debug, Clone, Serialize)]
pub struct ProofSubspace {
    pub m: usize,
    pub n: usize,
    pub b1: usize,
    pub h: f64,
    #[serde(skip)]
    pub functions: Vec<Vec<f64>>,
    pub pairs: Vec<PairRecord>,
    /// Steklov indices of the eigenfunctions the subspace is orthogonal to.
    pub psi_indices: Vec<usize>,
    pub energy_gram: Vec<Vec<f64>>,
    pub boundary_gram: Vec<Vec<f64>>,
    /// `∫_{∂M} |∂_τ u_i|²` for each function.
    pub tangential_energy: Vec<f64>,
    pub max_offdiag_energy: f64,
    /// `σ_1..` and `λ_1..` on the same mesh.
    pub sigma: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl ProofSubspace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn max_offdiag(g: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..g.len() {
        for j in 0..g.len() {
            if i != j {
                let s = (g[i][i] * g[j][j]).sqrt();
                if s > 0.0 {
                    worst = worst.max(g[i][j].abs() / s);
                }
            }
        }
    }
    worst
}

/// Builds `u_1, …, u_{2n}`: `u_{2i−1}` is a harmonic extension from
/// `span{φ̂_2, …, φ̂_{b1+2m+2i−2}}` with vanishing periods, boundary
/// orthogonality to `ψ_1..ψ_{m−1}` for itself and its conjugate, and energy
/// orthogonality to all earlier members; `u_{2i}` is its conjugate.
pub fn build_proof_subspace(mesh: &Mesh, m: usize, n: usize) -> Result<ProofSubspace> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("m and n must be positive".into()));
    }
    let b1 = mesh.topology().b1;
    let ctx = ProofContext::new(mesh, b1 + 2 * m + 2 * n - 2, m + 2 * n)?;
    ProofSubspace::build(&ctx, m, n)
}

impl ProofSubspace {
    pub fn build(ctx: &ProofContext<'_>, m: usize, n: usize) -> Result<Self> {
        let b1 = ctx.b1;
        ctx.need(b1 + 2 * m + 2 * n - 2, m + 2 * n)?;
        let mut functions: Vec<Vec<f64>> = Vec::new();
        let mut pairs = Vec::new();
        for i in 1..=n {
            let top = b1 + 2 * m + 2 * i - 2;
            let unknowns = top - 1;
            let mut rows = Vec::new();
            for k in 0..b1 {
                rows.push((2..=top).map(|j| ctx.periods[j - 1][k]).collect());
            }
            for l in 0..m - 1 {
                rows.push((2..=top).map(|j| ctx.psi_row(l, &ctx.phi_hat[j - 1])).collect());
                rows.push((2..=top).map(|j| ctx.psi_row(l, &ctx.conj[j - 1])).collect());
            }
            for prev in &functions {
                rows.push((2..=top).map(|j| ctx.energy(&ctx.phi_hat[j - 1], prev)).collect());
            }
            let comb = ctx.null_combination(&rows, unknowns)?;
            let mut u = ctx.combine(&ctx.phi_hat, &comb.coefficients);
            let mut v = ctx.combine(&ctx.conj, &comb.coefficients);
            let raw = ctx.pair(&u, &v);
            ctx.normalize_energy(&mut u, "odd test function")?;
            functions.push(u);
            let shift = ctx.energy_orthogonalize(&mut v, &functions);
            ctx.normalize_energy(&mut v, "conjugate test function")?;
            functions.push(v);
            pairs.push(PairRecord {
                top_index: top,
                coefficients: comb.coefficients,
                constraints: comb.constraints,
                smallest_singular_value: comb.smallest_singular_value,
                largest_singular_value: comb.largest_singular_value,
                conjugate: raw,
                conjugate_shift: shift,
            });
        }
        let energy_gram = ctx.gram(|a, b| ctx.energy(a, b), &functions);
        let boundary_gram = ctx.gram(|a, b| ctx.boundary_pairing(a, b), &functions);
        Ok(Self {
            m,
            n,
            b1,
            h: ctx.mesh.max_edge_length(),
            tangential_energy: functions.iter().map(|u| ctx.tangential_energy(u)).collect(),
            max_offdiag_energy: max_offdiag(&energy_gram),
            functions,
            pairs,
            psi_indices: (2..=m).collect(),
            energy_gram,
            boundary_gram,
            sigma: ctx.sigma.clone(),
            lambda: ctx.lambda.clone(),
        })
    }
}

/// `σ_{index} ≤ λ_i(·)(1 + MINMAX_REL)`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub i: usize,
    pub sigma_index: usize,
    pub sigma: f64,
    pub eigenvalue: f64,
    pub holds: bool,
}

/// Diagonal product against `1/λ_{index}`, together with the boundary
/// Rayleigh quotient `∫u²/∫|∂_τ u|²` that bounds it from below in the
/// continuum.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalCheck {
    pub i: usize,
    pub product: f64,
    pub boundary_rayleigh: f64,
    pub lambda_index: usize,
    pub lambda: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixAReport {
    pub a_inverse: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub bounds: Vec<BoundCheck>,
    pub diagonal: Vec<DiagonalCheck>,
}

impl MatrixAReport {
    pub fn bounds_hold(&self) -> bool {
        self.bounds.iter().all(|b| b.holds)
    }
}

fn to_dmatrix(g: &[Vec<f64>]) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (g[i][j] + g[j][i]))
}

fn pencil_eigenvalues(energy: &[Vec<f64>], boundary: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = energy.len();
    Ok(generalized_sym_eig(&to_dmatrix(energy), &to_dmatrix(boundary), n)
        .map_err(|e| match e {
            Error::NotPositiveDefinite(msg) => Error::NotPositiveDefinite(format!("A⁻¹ is singular: {msg}")),
            other => other,
        })?
        .values)
}

fn bound_checks(values: &[f64], sigma: &[f64], shift: usize) -> Vec<BoundCheck> {
    values
        .iter()
        .enumerate()
        .map(|(k, &ev)| {
            let idx = shift + k + 1;
            let s = sigma[idx - 1];
            BoundCheck {
                i: k + 1,
                sigma_index: idx,
                sigma: s,
                eigenvalue: ev,
                holds: s <= ev * (1.0 + MINMAX_REL),
            }
        })
        .collect()
}

/// `A` in the energy-normalized basis: `A⁻¹(i,j) = ∫_{∂M} u_i u_j /
/// (E(u_i) E(u_j))^{1/2}`, its eigenvalues, `σ_{m+i} ≤ λ_i(A)` and the
/// pairwise diagonal bound against `1/λ_{b1+2m+2i−2}`.
pub fn matrix_a(sub: &ProofSubspace) -> Result<MatrixAReport> {
    let k = sub.functions.len();
    let e = &sub.energy_gram;
    let a_inverse: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| sub.boundary_gram[i][j] / (e[i][i] * e[j][j]).sqrt()).collect())
        .collect();
    let eigenvalues = pencil_eigenvalues(e, &sub.boundary_gram)?;
    if sub.sigma.len() < sub.m + k {
        return Err(Error::CountTooLarge {
            requested: sub.m + k,
            available: sub.sigma.len(),
        });
    }
    let bounds = bound_checks(&eigenvalues, &sub.sigma, sub.m);
    let diagonal = sub
        .pairs
        .iter()
        .enumerate()
        .map(|(p, rec)| {
            let (a, b) = (2 * p, 2 * p + 1);
            let product = a_inverse[a][a] * a_inverse[b][b];
            let lambda = sub.lambda[rec.top_index - 1];
            let bound = 1.0 / lambda;
            DiagonalCheck {
                i: p + 1,
                product,
                boundary_rayleigh: sub.boundary_gram[a][a] / sub.tangential_energy[a],
                lambda_index: rec.top_index,
                lambda,
                bound,
                slack: product - bound,
            }
        })
        .collect();
    Ok(MatrixAReport {
        a_inverse,
        eigenvalues,
        bounds,
        diagonal,
    })
}

/// Two-space construction at `n = 2`: `u_i` and their conjugates `ω_i`.
#[derive(Debug, Clone, Serialize)]
pub struct Thm12Report {
    pub r: usize,
    pub s: usize,
    pub m: usize,
    pub b1: usize,
    pub h: f64,
    pub top_indices: Vec<usize>,
    pub coefficients: Vec<Vec<f64>>,
    pub u_energy_gram: Vec<Vec<f64>>,
    pub u_boundary_gram: Vec<Vec<f64>>,
    pub omega_energy_gram: Vec<Vec<f64>>,
    pub omega_boundary_gram: Vec<Vec<f64>>,
    /// Gram matrix of `*du_i − dω_i`.
    pub residual_gram: Vec<Vec<f64>>,
    /// `max |G_u − G_ω − G_res|`, relative to the largest diagonal of `G_u`.
    pub isometry_error: f64,
    /// `max |G_u − G_ω|` on the same scale.
    pub raw_isometry_error: f64,
    pub a_inverse_diag: Vec<f64>,
    pub b_inverse_diag: Vec<f64>,
    pub lambda_a: Vec<f64>,
    pub lambda_b: Vec<f64>,
    pub bounds_a: Vec<BoundCheck>,
    pub bounds_b: Vec<BoundCheck>,
    pub diagonal: Vec<DiagonalCheck>,
    pub conjugates: Vec<ConjugatePair>,
}

impl Thm12Report {
    pub fn bounds_hold(&self) -> bool {
        self.bounds_a.iter().chain(&self.bounds_b).all(|b| b.holds)
    }
}

/// Builds `u_1..u_m` from `span{φ̂_2..φ̂_{b1+r+s+i−1}}` with vanishing periods,
/// `u_i ⊥ ψ_1..ψ_{r−1}`, `ω_i ⊥ ψ_1..ψ_{s−1}` and unit, mutually orthogonal
/// energies, then forms `A` on the `u_i` and `B` on the conjugates `ω_i`.
pub fn matrices_a_b_thm12(mesh: &Mesh, r: usize, s: usize, m: usize) -> Result<Thm12Report> {
    if r == 0 || s == 0 || m == 0 {
        return Err(Error::InvalidInput("r, s and m must be positive".into()));
    }
    if !mesh.is_planar() {
        return Err(Error::NotPlanar);
    }
    let b1 = mesh.topology().b1;
    let ctx = ProofContext::new(mesh, b1 + r + s + m - 1, r.max(s) + m)?;
    Thm12Report::build(&ctx, r, s, m)
}

impl Thm12Report {
    pub fn build(ctx: &ProofContext<'_>, r: usize, s: usize, m: usize) -> Result<Self> {
        let b1 = ctx.b1;
        ctx.need(b1 + r + s + m - 1, r.max(s) + m)?;
        let mesh = ctx.mesh;
        let (mut us, mut ws) = (Vec::<Vec<f64>>::new(), Vec::<Vec<f64>>::new());
        let (mut tops, mut coefficients, mut conjugates) = (vec![], vec![], vec![]);
        for i in 1..=m {
            let top = b1 + r + s + i - 1;
            let mut rows = Vec::new();
            for k in 0..b1 {
                rows.push((2..=top).map(|j| ctx.periods[j - 1][k]).collect());
            }
            for l in 0..r - 1 {
                rows.push((2..=top).map(|j| ctx.psi_row(l, &ctx.phi_hat[j - 1])).collect());
            }
            for l in 0..s - 1 {
                rows.push((2..=top).map(|j| ctx.psi_row(l, &ctx.conj[j - 1])).collect());
            }
            for prev in &us {
                rows.push((2..=top).map(|j| ctx.energy(&ctx.phi_hat[j - 1], prev)).collect());
            }
            let comb = ctx.null_combination(&rows, top - 1)?;
            let mut u = ctx.combine(&ctx.phi_hat, &comb.coefficients);
            let mut w = ctx.combine(&ctx.conj, &comb.coefficients);
            let e = ctx.energy(&u, &u);
            if e <= 0.0 {
                return Err(Error::DegenerateConstraints("test function has vanishing energy".into()));
            }
            let sc = 1.0 / e.sqrt();
            u.iter_mut().for_each(|x| *x *= sc);
            w.iter_mut().for_each(|x| *x *= sc);
            conjugates.push(ctx.pair(&u, &w));
            tops.push(top);
            coefficients.push(comb.coefficients);
            us.push(u);
            ws.push(w);
        }
        let residuals: Vec<_> = us
            .iter()
            .zip(&ws)
            .map(|(u, w)| {
                crate::fem::gradient_field(mesh, w).sub(&crate::fem::hodge_star_scalar_gradient(mesh, u))
            })
            .collect();
        let residual_gram: Vec<Vec<f64>> = residuals
            .iter()
            .map(|a| residuals.iter().map(|b| a.inner(mesh, b)).collect())
            .collect();
        let gu = ctx.gram(|a, b| ctx.energy(a, b), &us);
        let gw = ctx.gram(|a, b| ctx.energy(a, b), &ws);
        let bu = ctx.gram(|a, b| ctx.boundary_pairing(a, b), &us);
        let bw = ctx.gram(|a, b| ctx.boundary_pairing(a, b), &ws);
        let scale = (0..m).map(|i| gu[i][i]).fold(0.0_f64, f64::max);
        let (mut iso, mut raw) = (0.0_f64, 0.0_f64);
        for i in 0..m {
            for j in 0..m {
                iso = iso.max((gu[i][j] - gw[i][j] - residual_gram[i][j]).abs() / scale);
                raw = raw.max((gu[i][j] - gw[i][j]).abs() / scale);
            }
        }
        let lambda_a = pencil_eigenvalues(&gu, &bu)?;
        let lambda_b = pencil_eigenvalues(&gw, &bw)?;
        let a_inverse_diag: Vec<f64> = (0..m).map(|i| bu[i][i] / gu[i][i]).collect();
        let b_inverse_diag: Vec<f64> = (0..m).map(|i| bw[i][i] / gw[i][i]).collect();
        let diagonal = (0..m)
            .map(|i| {
                let product = a_inverse_diag[i] * b_inverse_diag[i];
                let lambda = ctx.lambda[tops[i] - 1];
                DiagonalCheck {
                    i: i + 1,
                    product,
                    boundary_rayleigh: bu[i][i] / ctx.tangential_energy(&us[i]),
                    lambda_index: tops[i],
                    lambda,
                    bound: 1.0 / lambda,
                    slack: product - 1.0 / lambda,
                }
            })
            .collect();
        Ok(Self {
            r,
            s,
            m,
            b1,
            h: mesh.max_edge_length(),
            top_indices: tops,
            coefficients,
            bounds_a: bound_checks(&lambda_a, &ctx.sigma, r),
            bounds_b: bound_checks(&lambda_b, &ctx.sigma, s),
            u_energy_gram: gu,
            u_boundary_gram: bu,
            omega_energy_gram: gw,
            omega_boundary_gram: bw,
            residual_gram,
            isometry_error: iso,
            raw_isometry_error: raw,
            a_inverse_diag,
            b_inverse_diag,
            lambda_a,
            lambda_b,
            diagonal,
            conjugates,
        })
    }
}
