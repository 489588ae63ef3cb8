use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{generate_shape, Mesh, Shape};
use crate::spectra::{
    annulus_steklov_analytic, boundary_laplace, circles_laplace_analytic, disk_steklov_1form_analytic,
    disk_steklov_analytic, steklov_1forms_planar, steklov_functions,
};

/// A scalar tracked across refinement levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `σ^{(0)}_k`
    Sigma(usize),
    /// `λ_k`
    Lambda(usize),
    /// `σ^{(1)}_k`
    Sigma1(usize),
    Area,
    BoundaryLength,
}

impl Quantity {
    pub fn label(&self) -> String {
        match self {
            Quantity::Sigma(k) => format!("sigma{k}"),
            Quantity::Lambda(k) => format!("lambda{k}"),
            Quantity::Sigma1(k) => format!("sigma1_{k}"),
            Quantity::Area => "area".into(),
            Quantity::BoundaryLength => "length".into(),
        }
    }

    /// Inverse of [`Quantity::label`].
    pub fn parse(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| Error::InvalidInput(format!("bad index in quantity '{s}'")))
        };
        if let Some(k) = s.strip_prefix("sigma1_") {
            Ok(Quantity::Sigma1(num(k)?))
        } else if let Some(k) = s.strip_prefix("sigma") {
            Ok(Quantity::Sigma(num(k)?))
        } else if let Some(k) = s.strip_prefix("lambda") {
            Ok(Quantity::Lambda(num(k)?))
        } else if s == "area" {
            Ok(Quantity::Area)
        } else if s == "length" {
            Ok(Quantity::BoundaryLength)
        } else {
            Err(Error::InvalidInput(format!("unknown quantity '{s}'")))
        }
    }

    fn measure(&self, mesh: &Mesh) -> Result<f64> {
        let pick = |v: Vec<f64>, k: usize| v[k - 1];
        Ok(match *self {
            Quantity::Sigma(k) => pick(steklov_functions(mesh, k)?.values, k),
            Quantity::Lambda(k) => pick(boundary_laplace(mesh, k)?.values, k),
            Quantity::Sigma1(k) => pick(steklov_1forms_planar(mesh, k)?.values, k),
            Quantity::Area => mesh.measures().area,
            Quantity::BoundaryLength => mesh.measures().boundary_length,
        })
    }
}

/// Perimeter of the ellipse with semi-axes `a`, `b` by the trapezoidal
/// rule on the periodic arc-length integrand.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let n = 4096;
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let t = k as f64 * h;
            (a * t.sin()).hypot(b * t.cos())
        })
        .sum::<f64>()
        * h
}

/// Closed-form value of `q` on `shape`.
pub fn oracle(shape: &Shape, q: Quantity) -> Result<f64> {
    let none = || Err(Error::OutOfScope(format!("no closed form for {} on {}", q.label(), shape.label())));
    let circle = |len: f64, k: usize| circles_laplace_analytic(&[len], k).values[k - 1];
    match (shape, q) {
        (Shape::Disk { radius }, Quantity::Sigma(k)) => Ok(disk_steklov_analytic(*radius, k).values[k - 1]),
        (Shape::Disk { radius }, Quantity::Sigma1(k)) => Ok(disk_steklov_1form_analytic(*radius, k).values[k - 1]),
        (Shape::Disk { radius }, Quantity::Lambda(k)) => Ok(circle(2.0 * PI * radius, k)),
        (Shape::Disk { radius }, Quantity::Area) => Ok(PI * radius * radius),
        (Shape::Disk { radius }, Quantity::BoundaryLength) => Ok(2.0 * PI * radius),
        (Shape::Annulus { inner, outer }, Quantity::Sigma(k)) => {
            Ok(annulus_steklov_analytic(*inner, *outer, k).values[k - 1])
        }
        (Shape::Annulus { inner, outer }, Quantity::Lambda(k)) => {
            Ok(circles_laplace_analytic(&[2.0 * PI * inner, 2.0 * PI * outer], k).values[k - 1])
        }
        (Shape::Annulus { inner, outer }, Quantity::Area) => Ok(PI * (outer * outer - inner * inner)),
        (Shape::Annulus { inner, outer }, Quantity::BoundaryLength) => Ok(2.0 * PI * (inner + outer)),
        (Shape::Ellipse { a, b }, Quantity::Area) => Ok(PI * a * b),
        (Shape::Ellipse { a, b }, Quantity::BoundaryLength) => Ok(ellipse_perimeter(*a, *b)),
        (Shape::Ellipse { a, b }, Quantity::Lambda(k)) => Ok(circle(ellipse_perimeter(*a, *b), k)),
        (Shape::Rectangle { width, height }, Quantity::Area) => Ok(width * height),
        (Shape::Rectangle { width, height }, Quantity::BoundaryLength) => Ok(2.0 * (width + height)),
        (Shape::Rectangle { width, height }, Quantity::Lambda(k)) => Ok(circle(2.0 * (width + height), k)),
        _ => none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub value: f64,
    pub exact: f64,
    pub error: f64,
    /// Order against the oracle between this level and the previous one.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub domain: String,
    pub quantity: Quantity,
    pub rows: Vec<ConvergenceRow>,
    /// Oracle order between the last two levels.
    pub observed_order: f64,
    /// Oracle-free estimate from the last three values.
    pub richardson_order: f64,
    pub monotone: bool,
}

impl ConvergenceTable {
    /// Least-squares `C` in `error ≈ C h²`.
    pub fn fitted_constant(&self) -> f64 {
        let num: f64 = self.rows.iter().map(|r| r.error * r.h * r.h).sum();
        let den: f64 = self.rows.iter().map(|r| r.h.powi(4)).sum();
        num / den
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,value,exact,error,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| o.to_string()).unwrap_or_default();
            writeln!(s, "{},{},{},{},{},{}", r.level, r.h, r.value, r.exact, r.error, order).unwrap();
        }
        s
    }

    /// Log-log plot of error against `h` with an `h²` reference slope.
    pub fn to_svg(&self) -> String {
        let (w, hgt, pad) = (480.0, 360.0, 56.0);
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error > 0.0)
            .map(|r| (r.h.log10(), r.error.log10()))
            .collect();
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{hgt}" viewBox="0 0 {w} {hgt}">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{w}" height="{hgt}" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{} {}: error vs h (observed order {:.2})</text>"#,
            w / 2.0,
            self.domain,
            self.quantity.label(),
            self.observed_order
        )
        .unwrap();
        if pts.len() >= 2 {
            let (x0, x1) = bounds(pts.iter().map(|p| p.0));
            let (y0, y1) = bounds(pts.iter().map(|p| p.1).chain([pts[0].1 - 2.0 * (pts[0].0 - x0)]));
            let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
            let sy = |y: f64| hgt - pad - (y - y0) / (y1 - y0) * (hgt - 2.0 * pad);
            writeln!(
                s,
                r#"<polyline fill="none" stroke="black" points="{pad},{pad} {pad},{} {},{}"/>"#,
                hgt - pad,
                w - pad,
                hgt - pad
            )
            .unwrap();
            let line: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
            writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, line.join(" ")).unwrap();
            for p in &pts {
                writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(p.0), sy(p.1)).unwrap();
            }
            let (a, b) = (pts[0], pts[pts.len() - 1]);
            writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
                sx(a.0),
                sy(a.1),
                sx(b.0),
                sy(a.1 - 2.0 * (a.0 - b.0))
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">log10 h</text>"#,
                w / 2.0,
                hgt - 16.0
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">log10 error</text>"#,
                hgt / 2.0,
                hgt / 2.0
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// Generates `shape` at `base_h`, refines it `levels − 1` times and compares
/// `quantity` with its closed form at every level.
pub fn convergence_study(shape: &Shape, base_h: f64, levels: usize, quantity: Quantity) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 levels, got {levels}")));
    }
    let exact = oracle(shape, quantity)?;
    let mut mesh = generate_shape(shape, base_h)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for level in 0..levels {
        if level > 0 {
            mesh = mesh.refine();
        }
        let h = mesh.max_edge_length();
        let value = quantity.measure(&mesh)?;
        let error = (value - exact).abs();
        let order = rows.last().map(|p| (p.error / error).ln() / (p.h / h).ln());
        rows.push(ConvergenceRow {
            level,
            h,
            value,
            exact,
            error,
            order,
        });
    }
    let n = rows.len();
    let (v1, v2, v3) = (rows[n - 3].value, rows[n - 2].value, rows[n - 1].value);
    let richardson_order = ((v1 - v2) / (v2 - v3)).abs().ln() / (rows[n - 2].h / rows[n - 1].h).ln();
    Ok(ConvergenceTable {
        domain: shape.label(),
        quantity,
        observed_order: rows[n - 1].order.unwrap_or(f64::NAN),
        richardson_order,
        monotone: rows.windows(2).all(|w| w[1].error < w[0].error),
        rows,
    })
}
