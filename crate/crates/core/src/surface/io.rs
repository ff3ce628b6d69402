//! ASCII OFF reading and writing.

use std::fmt::Write as _;
use std::path::Path;

use super::mesh::{TriMesh, Vec3};
use crate::error::{Error, Result};

/// Parses an ASCII OFF document with triangle faces. Counts may share the
/// header line (`OFF nv nf ne`); `#` starts a comment.
pub fn parse_off(text: &str) -> Result<TriMesh> {
    let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
        let content = line.split('#').next().unwrap_or("");
        content.split_whitespace().map(move |tok| (i + 1, tok))
    });
    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    match tokens.next() {
        Some((_, "OFF")) => {}
        Some((line, other)) => {
            return Err(parse_err(
                line,
                format!("expected OFF header, found '{other}'"),
            ))
        }
        None => return Err(parse_err(1, "empty file".into())),
    }
    let mut next_num = |what: &str| -> Result<(usize, String)> {
        tokens
            .next()
            .map(|(l, t)| (l, t.to_string()))
            .ok_or_else(|| parse_err(0, format!("unexpected end of file while reading {what}")))
    };
    let mut read_usize = |what: &str| -> Result<usize> {
        let (line, tok) = next_num(what)?;
        tok.parse()
            .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
    };
    let nv = read_usize("vertex count")?;
    let nf = read_usize("face count")?;
    let _ne = read_usize("edge count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut c = [0.0; 3];
        for slot in &mut c {
            let (line, tok) = next_num("vertex coordinate")?;
            *slot = tok
                .parse()
                .map_err(|_| parse_err(line, format!("invalid coordinate '{tok}'")))?;
        }
        vertices.push(Vec3::new(c[0], c[1], c[2]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, tok) = next_num("face size")?;
        if tok != "3" {
            return Err(parse_err(
                line,
                format!("only triangle faces are supported, found size '{tok}'"),
            ));
        }
        let mut t = [0usize; 3];
        for slot in &mut t {
            let (line, tok) = next_num("face index")?;
            *slot = tok
                .parse()
                .map_err(|_| parse_err(line, format!("invalid index '{tok}'")))?;
        }
        triangles.push(t);
    }
    TriMesh::new(vertices, triangles)
}

pub fn read_off(path: impl AsRef<Path>) -> Result<TriMesh> {
    parse_off(&std::fs::read_to_string(path)?)
}

pub fn format_off(mesh: &TriMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OFF");
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.triangle_count(),
        mesh.edges().len()
    );
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn write_off(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    std::fs::write(path, format_off(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_with_counts_and_comments() {
        let text = "OFF 3 1 0\n# a triangle\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let m = parse_off(text).unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn rejects_quads_and_bad_headers() {
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(parse_off(quad), Err(Error::Parse { line: 7, .. })));
        assert!(matches!(parse_off("PLY\n"), Err(Error::Parse { .. })));
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n").is_err());
    }

    #[test]
    fn round_trip_preserves_mesh() {
        let m = crate::shrinker::canonical::icosphere(2.0, 2).unwrap();
        let back = parse_off(&format_off(&m)).unwrap();
        assert_eq!(back.triangles(), m.triangles());
        for (a, b) in back.vertices().iter().zip(m.vertices()) {
            assert_eq!(a, b);
        }
    }
}
