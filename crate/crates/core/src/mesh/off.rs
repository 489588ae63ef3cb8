//! ASCII OFF reader and writer.
//!
//! Grammar accepted by the reader (blank lines and `#` comments skipped):
//!
//! ```text
//! OFF
//! <V> <F> <E>
//! <x> <y> [<z>]          V lines; two coordinates mean z = 0
//! 3 <i> <j> <k>          F lines; triangles only, 0-based indices
//! ```
//!
//! The writer always emits three coordinates per vertex using the shortest
//! decimal form that round-trips, so writing is bit-stable.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, Shape};
use crate::error::{Error, Result};

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into());
    parse_off(&text, Shape::Loaded { name })
}

pub fn parse_off(text: &str, shape: Shape) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected OFF header, found {header:?}"),
        });
    }
    // counts may share the header line
    let rest: Vec<&str> = header_tokens.collect();
    let (ln, counts) = if rest.is_empty() {
        let (ln, l) = lines.next().ok_or(Error::Parse {
            line: ln,
            msg: "missing counts line".into(),
        })?;
        (ln, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (ln, rest)
    };
    if counts.len() < 2 {
        return Err(Error::Parse {
            line: ln,
            msg: "counts line needs V and F".into(),
        });
    }
    let nv: usize = parse_token(counts[0], ln)?;
    let nf: usize = parse_token(counts[1], ln)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or(Error::Parse {
            line: ln,
            msg: "unexpected end of file in vertex list".into(),
        })?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| parse_token(t, ln))
            .collect::<Result<_>>()?;
        match xs.len() {
            2 => vertices.push([xs[0], xs[1], 0.0]),
            3 => vertices.push([xs[0], xs[1], xs[2]]),
            n => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("vertex line needs 2 or 3 coordinates, found {n}"),
                })
            }
        }
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or(Error::Parse {
            line: ln,
            msg: "unexpected end of file in face list".into(),
        })?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| parse_token(t, ln))
            .collect::<Result<_>>()?;
        if ids.first() != Some(&3) || ids.len() != 4 {
            return Err(Error::Parse {
                line: ln,
                msg: "only triangular faces \"3 i j k\" are supported".into(),
            });
        }
        triangles.push([ids[1], ids[2], ids[3]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln,
            msg: "trailing data after face list".into(),
        });
    }
    Mesh::with_repaired_orientation(vertices, triangles, shape)
}

fn parse_token<T: std::str::FromStr>(t: &str, line: usize) -> Result<T> {
    t.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {t:?}"),
    })
}

pub fn to_off_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(s, "OFF").unwrap();
    writeln!(s, "{} {} 0", mesh.num_vertices(), mesh.num_triangles()).unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_off_string(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disk;

    #[test]
    fn single_triangle() {
        let m = parse_off("OFF\n3 1 0\n0 0\n1 0\n0 1\n3 0 1 2\n", Shape::Union).unwrap();
        assert_eq!(m.boundary_loops().len(), 1);
        assert_eq!(m.boundary_loops()[0].len(), 3);
        assert!(m.is_planar());
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 2 1\n", Shape::Union).unwrap();
        assert!((m.measures().area - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_manifold_rejected() {
        let text = "OFF\n5 3 0\n0 0\n1 0\n0 1\n0 -1\n1 1\n3 0 1 2\n3 1 0 3\n3 0 1 4\n";
        let err = parse_off(text, Shape::Union).unwrap_err();
        assert!(err.to_string().contains("non-manifold"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_off("OFF\n3 1 0\n0 0\n1 x\n0 1\n3 0 1 2\n", Shape::Union).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(parse_off("PLY\n", Shape::Union).is_err());
        assert!(parse_off("OFF\n4 1 0\n0 0\n1 0\n0 1\n1 1\n4 0 1 3 2\n", Shape::Union).is_err());
    }

    #[test]
    fn round_trip_is_bit_stable() {
        let m = generate_disk(1.0, 0.1).unwrap();
        let text = to_off_string(&m);
        let back = parse_off(&text, Shape::Union).unwrap();
        assert_eq!(back.num_vertices(), m.num_vertices());
        assert_eq!(back.num_triangles(), m.num_triangles());
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(to_off_string(&back), text);
    }
}
