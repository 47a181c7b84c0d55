//! Deterministic disk meshes used as test and benchmark inputs.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::MeshError;
use crate::level::VertexId;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CorpusKind {
    /// One hub plus `size` rim vertices, `size - 1` faces. Every vertex is on the boundary.
    Fan,
    /// `size × size` vertex grid, diagonals picked by the seed (seed 0: all the same way).
    Grid,
    /// Delaunay triangulation of `size` random points in the unit disk.
    DelaunayDisk,
    /// Same as `DelaunayDisk` with a smooth height field.
    BumpyDisk,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 4] = [
        CorpusKind::Fan,
        CorpusKind::Grid,
        CorpusKind::DelaunayDisk,
        CorpusKind::BumpyDisk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::Fan => "fan",
            CorpusKind::Grid => "grid",
            CorpusKind::DelaunayDisk => "delaunay-disk",
            CorpusKind::BumpyDisk => "bumpy-disk",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CorpusKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown corpus kind {s:?} (fan, grid, delaunay-disk, bumpy-disk)"))
    }
}

impl TryFrom<String> for CorpusKind {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<CorpusKind> for String {
    fn from(k: CorpusKind) -> String {
        k.name().to_string()
    }
}

fn v(i: usize) -> VertexId {
    VertexId::from(i)
}

/// Builds the mesh for `(kind, size, seed)`. Same inputs, same mesh.
pub fn generate(kind: CorpusKind, size: usize, seed: u64) -> Result<Mesh, MeshError> {
    if size < 3 && !(kind == CorpusKind::Fan && size == 2) {
        return Err(MeshError::Parse {
            line: 0,
            msg: format!("corpus size must be at least 3, got {size}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        CorpusKind::Fan => {
            let mut pos = vec![[0.0, 0.0, 0.0]];
            for i in 0..size {
                let jitter = if seed == 0 { 0.0 } else { rng.gen_range(-0.2..0.2) };
                let a = std::f64::consts::PI * (i as f64 + 0.5 + jitter) / size as f64;
                let r = 1.0 + if seed == 0 { 0.0 } else { rng.gen_range(-0.1..0.1) };
                pos.push([r * a.cos(), r * a.sin(), 0.0]);
            }
            let faces = (1..size).map(|i| [v(0), v(i), v(i + 1)]).collect();
            Mesh::new(pos, faces)
        }
        CorpusKind::Grid => {
            let n = size;
            let mut pos = Vec::with_capacity(n * n);
            for r in 0..n {
                for c in 0..n {
                    pos.push([c as f64 / (n - 1) as f64, r as f64 / (n - 1) as f64, 0.0]);
                }
            }
            let mut faces = Vec::with_capacity(2 * (n - 1) * (n - 1));
            for r in 0..n - 1 {
                for c in 0..n - 1 {
                    let (a, b) = (r * n + c, r * n + c + 1);
                    let (d, e) = ((r + 1) * n + c, (r + 1) * n + c + 1);
                    let flip = seed != 0 && rng.gen_bool(0.5);
                    if flip {
                        faces.push([v(a), v(b), v(d)]);
                        faces.push([v(b), v(e), v(d)]);
                    } else {
                        faces.push([v(a), v(b), v(e)]);
                        faces.push([v(a), v(e), v(d)]);
                    }
                }
            }
            Mesh::new(pos, faces)
        }
        CorpusKind::DelaunayDisk | CorpusKind::BumpyDisk => {
            let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
            let mut inserted = 0;
            while inserted < size {
                let x: f64 = rng.gen_range(-1.0..1.0);
                let y: f64 = rng.gen_range(-1.0..1.0);
                if x * x + y * y > 1.0 {
                    continue;
                }
                let before = tri.num_vertices();
                tri.insert(Point2::new(x, y)).map_err(|e| MeshError::Parse {
                    line: 0,
                    msg: format!("triangulation failed: {e:?}"),
                })?;
                if tri.num_vertices() > before {
                    inserted += 1;
                }
            }
            let (p1, p2, amp) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU), 0.25);
            let bumpy = kind == CorpusKind::BumpyDisk;
            let pos: Vec<[f64; 3]> = tri
                .vertices()
                .map(|h| {
                    let p = h.position();
                    let z = if bumpy {
                        amp * ((3.0 * p.x + p1).sin() * (2.0 * p.y + p2).cos()) + 0.5 * amp * (p.x * p.x + p.y * p.y)
                    } else {
                        0.0
                    };
                    [p.x, p.y, z]
                })
                .collect();
            let faces = tri
                .inner_faces()
                .map(|f| {
                    let [a, b, c] = f.vertices();
                    [v(a.fix().index()), v(b.fix().index()), v(c.fix().index())]
                })
                .collect();
            Mesh::new(pos, faces)
        }
    }
}
