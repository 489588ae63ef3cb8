//! Hadamard products, weak majorization, Schur's diagonal majorization and
//! the eigenvalue-product inequality for increasing convex functions.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;

pub const MAX_DIM: usize = 64;
/// Minimum eigenvalue relative to the largest for positive definiteness.
pub const PD_REL: f64 = 1e-10;
/// Relative tolerance of the eigenvalue-product comparison.
pub const LEMMA_REL: f64 = 1e-10;
const TRACE_REL: f64 = 1e-10;
const GRID: usize = 101;

/// Dense symmetric matrix stored as its lower triangle, row by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix {
    n: usize,
    lower: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidInput(format!("size {n} outside 1..={MAX_DIM}")));
        }
        Ok(Self {
            n,
            lower: vec![0.0; n * (n + 1) / 2],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    /// Reads the lower triangle of `rows`; the upper part must match within
    /// `1e-12` relative.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix rows must be square".into()));
        }
        let scale = rows.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) is not symmetric")));
                }
            }
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    fn index(i: usize, j: usize) -> usize {
        let (a, b) = if i >= j { (i, j) } else { (j, i) };
        a * (a + 1) / 2 + b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[Self::index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[Self::index(i, j)] = v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        sym_eigenvalues(&self.to_dense())
    }

    /// Fails unless the smallest eigenvalue exceeds `PD_REL` times the largest.
    pub fn check_positive_definite(&self) -> Result<Vec<f64>> {
        let ev = self.eigenvalues()?;
        let (lo, hi) = (ev[0], ev[self.n - 1]);
        if hi <= 0.0 || lo <= PD_REL * hi {
            return Err(Error::NotPositiveDefinite(format!(
                "eigenvalues span [{lo:e}, {hi:e}]"
            )));
        }
        Ok(ev)
    }
}

/// Entrywise product.
pub fn hadamard(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(format!("{}x{} and {}x{}", a.n, a.n, b.n, b.n)));
    }
    Ok(SymMatrix {
        n: a.n,
        lower: a.lower.iter().zip(&b.lower).map(|(x, y)| x * y).collect(),
    })
}

fn descending_partial_sums(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

/// `x ≺_w y`: every sum of the `k` largest entries of `x` is at most the
/// corresponding sum for `y`. Lengths must agree.
pub fn weak_majorization(x: &[f64], y: &[f64]) -> bool {
    assert_eq!(x.len(), y.len(), "weak majorization needs equal lengths");
    weak_majorization_tol(x, y, 0.0)
}

/// [`weak_majorization`] with an absolute slack on each partial sum.
pub fn weak_majorization_tol(x: &[f64], y: &[f64], tol: f64) -> bool {
    descending_partial_sums(x)
        .iter()
        .zip(descending_partial_sums(y))
        .all(|(a, b)| *a <= b + tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurReport {
    pub diagonal: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub trace_gap: f64,
    pub holds: bool,
}

/// Checks `diag(A) ≺ λ(A)`: weak majorization plus equal totals.
pub fn schur_diag_majorization(a: &SymMatrix) -> Result<SchurReport> {
    let diagonal = a.diagonal();
    let eigenvalues = a.eigenvalues()?;
    let scale = eigenvalues.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let trace_gap = (diagonal.iter().sum::<f64>() - eigenvalues.iter().sum::<f64>()).abs();
    let holds =
        trace_gap <= TRACE_REL * scale && weak_majorization_tol(&diagonal, &eigenvalues, TRACE_REL * scale);
    Ok(SchurReport {
        diagonal,
        eigenvalues,
        trace_gap,
        holds,
    })
}

/// Members of the increasing convex function catalog.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ConvexKind {
    Identity,
    Square,
    Cube,
    ExpMinusOne,
    /// `max(0, t − c)`.
    Hinge { c: f64 },
    /// `a t + b` with `a ≥ 0`.
    Affine { a: f64, b: f64 },
    /// Piecewise-linear interpolation of samples, constant slope beyond the
    /// last knot.
    Tabulated { knots: Vec<f64>, values: Vec<f64> },
}

/// An increasing convex function on `t ≥ 0`, validated by sampled first and
/// second differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncreasingConvexFn {
    pub kind: ConvexKind,
    /// Upper end of the validated range `[0, range]`.
    pub range: f64,
}

impl IncreasingConvexFn {
    pub fn new(kind: ConvexKind, range: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::InvalidInput(format!("validation range {range} must be positive")));
        }
        if let ConvexKind::Affine { a, .. } = kind {
            if a < 0.0 {
                return Err(Error::InvalidInput("affine slope must be nonnegative".into()));
            }
        }
        if let ConvexKind::Tabulated { knots, values } = &kind {
            if knots.len() < 2 || knots.len() != values.len() || knots.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(
                    "tabulated function needs at least two strictly increasing knots".into(),
                ));
            }
        }
        let f = Self { kind, range };
        f.validate()?;
        Ok(f)
    }

    pub fn identity() -> Self {
        Self::new(ConvexKind::Identity, 10.0).unwrap()
    }
    pub fn square() -> Self {
        Self::new(ConvexKind::Square, 10.0).unwrap()
    }
    pub fn cube() -> Self {
        Self::new(ConvexKind::Cube, 10.0).unwrap()
    }
    pub fn exp_minus_one() -> Self {
        Self::new(ConvexKind::ExpMinusOne, 10.0).unwrap()
    }

    /// Every catalog member with representative parameters.
    pub fn catalog() -> Vec<Self> {
        vec![
            Self::identity(),
            Self::square(),
            Self::cube(),
            Self::exp_minus_one(),
            Self::new(ConvexKind::Hinge { c: 0.5 }, 10.0).unwrap(),
            Self::new(ConvexKind::Affine { a: 2.0, b: 1.0 }, 10.0).unwrap(),
        ]
    }

    /// Parses `t`, `t2`, `t3`, `exp`, `hinge:<c>`, `affine:<a>:<b>`.
    pub fn parse(name: &str) -> Result<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number '{s}' in function '{name}'")))
        };
        let kind = match parts.as_slice() {
            ["t"] => ConvexKind::Identity,
            ["t2"] => ConvexKind::Square,
            ["t3"] => ConvexKind::Cube,
            ["exp"] => ConvexKind::ExpMinusOne,
            ["hinge", c] => ConvexKind::Hinge { c: num(c)? },
            ["affine", a, b] => ConvexKind::Affine { a: num(a)?, b: num(b)? },
            _ => return Err(Error::InvalidInput(format!("unknown function '{name}'"))),
        };
        Self::new(kind, 10.0)
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ConvexKind::Identity => "t".into(),
            ConvexKind::Square => "t2".into(),
            ConvexKind::Cube => "t3".into(),
            ConvexKind::ExpMinusOne => "exp".into(),
            ConvexKind::Hinge { c } => format!("hinge:{c}"),
            ConvexKind::Affine { a, b } => format!("affine:{a}:{b}"),
            ConvexKind::Tabulated { .. } => "tabulated".into(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            ConvexKind::Identity => t,
            ConvexKind::Square => t * t,
            ConvexKind::Cube => t * t * t,
            ConvexKind::ExpMinusOne => t.exp_m1(),
            ConvexKind::Hinge { c } => (t - c).max(0.0),
            ConvexKind::Affine { a, b } => a * t + b,
            ConvexKind::Tabulated { knots, values } => {
                let n = knots.len();
                let k = match knots.iter().position(|&x| x > t) {
                    Some(0) => 0,
                    Some(k) => k - 1,
                    None => n - 2,
                };
                let s = (values[k + 1] - values[k]) / (knots[k + 1] - knots[k]);
                values[k] + s * (t - knots[k])
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let step = self.range / (GRID - 1) as f64;
        let y: Vec<f64> = (0..GRID).map(|k| self.eval(k as f64 * step)).collect();
        let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let eps = 1e-12 * scale;
        if y.windows(2).any(|w| w[1] - w[0] < -eps) {
            return Err(Error::InvalidInput(format!("{} is not increasing", self.name())));
        }
        if y.windows(3).any(|w| w[2] - 2.0 * w[1] + w[0] < -eps) {
            return Err(Error::InvalidInput(format!("{} is not convex", self.name())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `Σ f(λ_i(A) λ_i(B)) ≥ Σ f(A_ii B_ii)` with both spectra ascending.
pub fn lemma22_check(a: &SymMatrix, b: &SymMatrix, f: &IncreasingConvexFn) -> Result<LemmaReport> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(format!("{}x{} and {}x{}", a.n, a.n, b.n, b.n)));
    }
    let la = a.check_positive_definite()?;
    let lb = b.check_positive_definite()?;
    let lhs: f64 = la.iter().zip(&lb).map(|(x, y)| f.eval(x * y)).sum();
    let rhs: f64 = (0..a.n).map(|i| f.eval(a.get(i, i) * b.get(i, i))).sum();
    Ok(LemmaReport {
        lhs,
        rhs,
        holds: lhs >= rhs - LEMMA_REL * rhs.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn hadamard_examples() {
        let a = m(&[&[1.0, 2.0], &[2.0, 5.0]]);
        let b = m(&[&[3.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(hadamard(&a, &b).unwrap(), m(&[&[3.0, 2.0], &[2.0, 10.0]]));
        let id = SymMatrix::identity(2).unwrap();
        assert_eq!(hadamard(&a, &id).unwrap(), m(&[&[1.0, 0.0], &[0.0, 5.0]]));
        let ones = SymMatrix::from_fn(2, |_, _| 1.0).unwrap();
        assert_eq!(hadamard(&a, &ones).unwrap(), a);
        assert!(hadamard(&a, &SymMatrix::identity(3).unwrap()).is_err());
    }

    #[test]
    fn weak_majorization_examples() {
        assert!(weak_majorization(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(weak_majorization(&[1.0, 1.0], &[0.0, 3.0]));
        assert!(!weak_majorization(&[2.0, 2.0], &[3.0, 0.0]));
    }

    #[test]
    fn schur_examples() {
        let d = m(&[&[3.0, 0.0], &[0.0, -1.0]]);
        let r = schur_diag_majorization(&d).unwrap();
        assert!(r.holds);
        assert!(r.trace_gap < 1e-14);
        let r = schur_diag_majorization(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!(r.holds);
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn lemma_examples() {
        let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let id = SymMatrix::identity(2).unwrap();
        let r = lemma22_check(&a, &id, &IncreasingConvexFn::identity()).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-13 && (r.rhs - 4.0).abs() < 1e-13 && r.holds);
        let d = m(&[&[1.0, 0.0], &[0.0, 3.0]]);
        let r = lemma22_check(&d, &id, &IncreasingConvexFn::square()).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-13);
        let singular = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            lemma22_check(&singular, &id, &IncreasingConvexFn::identity()),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn catalog_validation() {
        assert_eq!(IncreasingConvexFn::catalog().len(), 6);
        assert!(IncreasingConvexFn::new(ConvexKind::Affine { a: -1.0, b: 0.0 }, 1.0).is_err());
        let concave = ConvexKind::Tabulated {
            knots: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 1.5],
        };
        assert!(IncreasingConvexFn::new(concave, 2.0).is_err());
        let ok = ConvexKind::Tabulated {
            knots: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 3.0],
        };
        let f = IncreasingConvexFn::new(ok, 4.0).unwrap();
        assert_eq!(f.eval(3.0), 5.0);
        for f in IncreasingConvexFn::catalog() {
            assert_eq!(IncreasingConvexFn::parse(&f.name()).unwrap(), f);
        }
    }

    #[test]
    fn storage_is_symmetric() {
        let mut a = SymMatrix::zeros(3).unwrap();
        a.set(0, 2, 4.0);
        assert_eq!(a.get(2, 0), 4.0);
        assert!(SymMatrix::zeros(65).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).is_err());
    }
}
