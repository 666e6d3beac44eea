//! Line-oriented text formats for meshes and fields.
//!
//! ```text
//! curvemesh v1 degree=<p> elements=<k>
//! x0 y0 x1 y1 ...        # standard nodes of element 0, net order
//! ...
//! curvefield v1 degree=<p> elements=<k>
//! c0 c1 ...              # coefficients of element 0
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! finite `f64` exactly.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{CurvedMesh, DiscreteField};
use crate::net::net_len;
use crate::point::Point;
use crate::triangle::StandardNodes;

const MESH_MAGIC: &str = "curvemesh";
const FIELD_MAGIC: &str = "curvefield";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses `<magic> v1 degree=<p> elements=<k>`.
fn parse_header(line: &str, magic: &str) -> Result<(usize, usize)> {
    let mut words = line.split_whitespace();
    if words.next() != Some(magic) {
        return Err(parse_err(1, format!("expected a `{magic}` header")));
    }
    if words.next() != Some("v1") {
        return Err(parse_err(1, "unsupported format version"));
    }
    let mut field = |key: &str| -> Result<usize> {
        let w = words.next().ok_or_else(|| parse_err(1, format!("missing `{key}=`")))?;
        w.strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .ok_or_else(|| parse_err(1, format!("expected `{key}=<n>`, found `{w}`")))?
            .parse()
            .map_err(|_| parse_err(1, format!("bad value in `{w}`")))
    };
    let degree = field("degree")?;
    let elements = field("elements")?;
    if words.next().is_some() {
        return Err(parse_err(1, "trailing header content"));
    }
    Ok((degree, elements))
}

fn parse_reals(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line
        .split_whitespace()
        .map(|w| {
            w.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("not a finite number: `{w}`")))
        })
        .collect()
}

/// Content lines (non-blank) after the header, with 1-based line numbers.
fn body_lines(text: &str) -> Result<(&str, Vec<(usize, &str)>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    Ok((header, lines.filter(|(_, l)| !l.trim().is_empty()).collect()))
}

pub fn parse_mesh(text: &str) -> Result<CurvedMesh> {
    let (header, body) = body_lines(text)?;
    let (degree, count) = parse_header(header, MESH_MAGIC)?;
    if degree == 0 || degree > crate::curve::MAX_DEGREE {
        return Err(parse_err(1, format!("unsupported degree {degree}")));
    }
    if body.len() != count {
        return Err(parse_err(body.last().map_or(1, |l| l.0), format!("expected {count} elements, found {}", body.len())));
    }
    let n = net_len(degree);
    let nodes = body
        .iter()
        .map(|&(lineno, line)| {
            let v = parse_reals(line, lineno)?;
            if v.len() != 2 * n {
                return Err(parse_err(lineno, format!("expected {} numbers, found {}", 2 * n, v.len())));
            }
            StandardNodes::new(degree, v.chunks(2).map(|c| Point::new(c[0], c[1])).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    CurvedMesh::from_nodes(degree, nodes)
}

pub fn format_mesh(mesh: &CurvedMesh) -> String {
    let mut out = format!("{MESH_MAGIC} v1 degree={} elements={}\n", mesh.degree(), mesh.len());
    for e in mesh.elements() {
        let line: Vec<String> = e.nodes.nodes().iter().flat_map(|p| [fmt_real(p.x), fmt_real(p.y)]).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_field(text: &str) -> Result<DiscreteField> {
    let (header, body) = body_lines(text)?;
    let (degree, count) = parse_header(header, FIELD_MAGIC)?;
    if degree > crate::curve::MAX_DEGREE {
        return Err(parse_err(1, format!("unsupported degree {degree}")));
    }
    if body.len() != count {
        return Err(parse_err(body.last().map_or(1, |l| l.0), format!("expected {count} elements, found {}", body.len())));
    }
    let n = net_len(degree);
    let coeffs = body
        .iter()
        .enumerate()
        .map(|(element, &(lineno, line))| {
            let v = parse_reals(line, lineno)?;
            if v.len() != n {
                return Err(Error::FieldShapeMismatch { element, expected: n, found: v.len() });
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteField::new(degree, coeffs)
}

pub fn format_field(field: &DiscreteField) -> String {
    let mut out = format!("{FIELD_MAGIC} v1 degree={} elements={}\n", field.degree(), field.len());
    for c in field.coefficients() {
        let line: Vec<String> = c.iter().map(|v| fmt_real(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<CurvedMesh> {
    parse_mesh(&fs::read_to_string(path)?)
}

pub fn save_mesh(mesh: &CurvedMesh, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, format_mesh(mesh))?)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<DiscreteField> {
    parse_field(&fs::read_to_string(path)?)
}

pub fn save_field(field: &DiscreteField, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, format_field(field))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "curvemesh v1 degree=1 elements=2\n0 0 1 0 0 1\n1 0 1 1 0 1\n";

    #[test]
    fn mesh_round_trip() {
        let m = parse_mesh(TWO).unwrap();
        assert_eq!(m.len(), 2);
        let again = parse_mesh(&format_mesh(&m)).unwrap();
        for (a, b) in m.elements().iter().zip(again.elements()) {
            assert_eq!(a.nodes, b.nodes);
        }
    }

    #[test]
    fn awkward_reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 17.0 / 16.0, std::f64::consts::PI] {
            assert_eq!(fmt_real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_mesh(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_mesh("curvemesh v2 degree=1 elements=0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_mesh("curvemesh v1 degree=1 elements=3\n0 0 1 0 0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_mesh("curvemesh v1 degree=1 elements=1\n0 0 1 0 x 1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn inverted_element_reports_id() {
        let text = "curvemesh v1 degree=1 elements=2\n0 0 1 0 0 1\n1 0 0 1 1 1\n";
        assert!(matches!(parse_mesh(text), Err(Error::InvalidElement { id: 1 })));
    }

    #[test]
    fn field_shape_errors() {
        let f = parse_field("curvefield v1 degree=1 elements=2\n1 2 3\n4 5\n");
        assert!(matches!(f, Err(Error::FieldShapeMismatch { element: 1, expected: 3, found: 2 })));
        let f = parse_field("curvefield v1 degree=1 elements=1\n1 2 3\n").unwrap();
        assert_eq!(parse_field(&format_field(&f)).unwrap(), f);
    }
}
