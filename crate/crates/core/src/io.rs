//! OBJ and OFF reading, OBJ writing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::MeshError;
use crate::level::VertexId;
use crate::mesh::Mesh;

/// Loads an OBJ or OFF file. The format is picked by extension, falling back
/// to sniffing an `OFF` header.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("off") => parse_off(&text),
        Some("obj") => parse_obj(&text),
        _ if text.trim_start().starts_with("OFF") => parse_off(&text),
        _ => parse_obj(&text),
    }
}

/// Writes `mesh` as OBJ. Coordinates use the shortest decimal form that
/// round-trips, so reloading is bit-exact.
pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    write_text(path.as_ref(), &obj_string(mesh, None))
}

/// Writes `mesh` as OBJ with one `vt u v` line per vertex.
pub fn save_mesh_with_uv(mesh: &Mesh, uv: &[[f64; 2]], path: impl AsRef<Path>) -> Result<(), MeshError> {
    write_text(path.as_ref(), &obj_string(mesh, Some(uv)))
}

fn write_text(path: &Path, text: &str) -> Result<(), MeshError> {
    fs::write(path, text).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn obj_string(mesh: &Mesh, uv: Option<&[[f64; 2]]>) -> String {
    let mut s = String::with_capacity(mesh.num_vertices() * 48 + mesh.num_faces() * 24);
    for p in mesh.positions() {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    if let Some(uv) = uv {
        for t in uv {
            let _ = writeln!(s, "vt {} {}", t[0], t[1]);
        }
    }
    for f in mesh.faces() {
        let (a, b, c) = (f[0].0 + 1, f[1].0 + 1, f[2].0 + 1);
        if uv.is_some() {
            let _ = writeln!(s, "f {a}/{a} {b}/{b} {c}/{c}");
        } else {
            let _ = writeln!(s, "f {a} {b} {c}");
        }
    }
    s
}

pub fn parse_obj(text: &str) -> Result<Mesh, MeshError> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for c in p.iter_mut() {
                    *c = parse_f64(tok.next(), line_no)?;
                }
                positions.push(p);
            }
            Some("f") => {
                let corners: Vec<&str> = tok.collect();
                if corners.len() != 3 {
                    return Err(MeshError::NonTriangularFace {
                        line: line_no,
                        corners: corners.len(),
                    });
                }
                let mut f = [VertexId(0); 3];
                for (slot, c) in f.iter_mut().zip(&corners) {
                    let idx_str = c.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str.parse().map_err(|_| MeshError::Parse {
                        line: line_no,
                        msg: format!("bad face index {c:?}"),
                    })?;
                    let n = positions.len() as i64;
                    let zero_based = if idx > 0 { idx - 1 } else { n + idx };
                    if idx == 0 || zero_based < 0 {
                        return Err(MeshError::DanglingIndex {
                            face: faces.len(),
                            index: idx,
                            vertex_count: positions.len(),
                        });
                    }
                    *slot = VertexId(zero_based as u32);
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    Mesh::new(positions, faces)
}

pub fn parse_off(text: &str) -> Result<Mesh, MeshError> {
    // tokens with their line numbers, comments stripped
    let mut tokens = text.lines().enumerate().flat_map(|(i, l)| {
        l.split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(move |t| (i + 1, t))
            .collect::<Vec<_>>()
    });
    match tokens.next() {
        Some((_, "OFF")) => {}
        Some((line, t)) => {
            return Err(MeshError::Parse {
                line,
                msg: format!("expected OFF header, found {t:?}"),
            })
        }
        None => {
            return Err(MeshError::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut next_usize = |what: &str| -> Result<(usize, usize), MeshError> {
        let (line, t) = tokens.next().ok_or(MeshError::Parse {
            line: 0,
            msg: format!("unexpected end of file reading {what}"),
        })?;
        t.parse::<usize>().map(|v| (line, v)).map_err(|_| MeshError::Parse {
            line,
            msg: format!("bad {what} {t:?}"),
        })
    };
    let (_, nv) = next_usize("vertex count")?;
    let (_, nf) = next_usize("face count")?;
    let _ = next_usize("edge count")?;
    let mut positions = Vec::with_capacity(nv);
    let mut faces = Vec::with_capacity(nf);
    let mut rest = tokens;
    for _ in 0..nv {
        let mut p = [0.0; 3];
        for c in p.iter_mut() {
            let (line, t) = rest.next().ok_or(MeshError::Parse {
                line: 0,
                msg: "unexpected end of file in vertex list".into(),
            })?;
            *c = parse_f64(Some(t), line)?;
        }
        positions.push(p);
    }
    for _ in 0..nf {
        let (line, t) = rest.next().ok_or(MeshError::Parse {
            line: 0,
            msg: "unexpected end of file in face list".into(),
        })?;
        let k: usize = t.parse().map_err(|_| MeshError::Parse {
            line,
            msg: format!("bad corner count {t:?}"),
        })?;
        if k != 3 {
            return Err(MeshError::NonTriangularFace { line, corners: k });
        }
        let mut f = [VertexId(0); 3];
        for slot in f.iter_mut() {
            let (line, t) = rest.next().ok_or(MeshError::Parse {
                line,
                msg: "truncated face".into(),
            })?;
            let idx: u32 = t.parse().map_err(|_| MeshError::Parse {
                line,
                msg: format!("bad face index {t:?}"),
            })?;
            *slot = VertexId(idx);
        }
        faces.push(f);
    }
    Mesh::new(positions, faces)
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, MeshError> {
    let t = tok.ok_or(MeshError::Parse {
        line,
        msg: "missing coordinate".into(),
    })?;
    t.parse().map_err(|_| MeshError::Parse {
        line,
        msg: format!("bad coordinate {t:?}"),
    })
}
