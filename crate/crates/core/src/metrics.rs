//! Distortion measures between an original and a reconstructed mesh.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::CodecError;
use crate::level::{Edge, VertexId};
use crate::mesh::Mesh;

/// PSNR reported for identical surfaces.
pub const PSNR_CAP_DB: f64 = 200.0;

pub const DEFAULT_SAMPLES_PER_FACE: usize = 16;

type P3 = [f64; 3];

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn add_scaled(a: P3, s: f64, d: P3) -> P3 {
    [a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]]
}

fn dist2(a: P3, b: P3) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

fn closest_on_segment(p: P3, a: P3, b: P3) -> P3 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return a;
    }
    add_scaled(a, (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0), ab)
}

/// Closest point of triangle `abc` to `p`, by Voronoi region of the triangle.
/// Degenerate triangles fall back to their edges.
pub fn closest_point_on_triangle(p: P3, a: P3, b: P3, c: P3) -> P3 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let n = [
        ab[1] * ac[2] - ab[2] * ac[1],
        ab[2] * ac[0] - ab[0] * ac[2],
        ab[0] * ac[1] - ab[1] * ac[0],
    ];
    let scale = dot(ab, ab).max(dot(ac, ac));
    if dot(n, n) <= 1e-24 * scale * scale {
        return [
            closest_on_segment(p, a, b),
            closest_on_segment(p, b, c),
            closest_on_segment(p, a, c),
        ]
        .into_iter()
        .min_by(|x, y| dist2(p, *x).total_cmp(&dist2(p, *y)))
        .expect("three candidates");
    }
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return add_scaled(a, d1 / (d1 - d3), ab);
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return add_scaled(a, d2 / (d2 - d6), ac);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return add_scaled(b, (d4 - d3) / ((d4 - d3) + (d5 - d6)), sub(c, b));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    add_scaled(add_scaled(a, v, ab), w, ac)
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: P3,
    hi: P3,
}

impl Aabb {
    fn of(points: &[P3]) -> Aabb {
        let mut b = Aabb {
            lo: [f64::INFINITY; 3],
            hi: [f64::NEG_INFINITY; 3],
        };
        for p in points {
            for k in 0..3 {
                b.lo[k] = b.lo[k].min(p[k]);
                b.hi[k] = b.hi[k].max(p[k]);
            }
        }
        b
    }

    fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            lo: [0, 1, 2].map(|k| self.lo[k].min(o.lo[k])),
            hi: [0, 1, 2].map(|k| self.hi[k].max(o.hi[k])),
        }
    }

    fn dist2(&self, p: P3) -> f64 {
        (0..3)
            .map(|k| {
                let d = (self.lo[k] - p[k]).max(0.0).max(p[k] - self.hi[k]);
                d * d
            })
            .sum()
    }
}

enum Node {
    Leaf { bounds: Aabb, items: Vec<usize> },
    Inner { bounds: Aabb, kids: Box<[Node; 2]> },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Bounding-volume tree over triangles; a point is a triangle with equal corners.
struct Bvh {
    tris: Vec<[P3; 3]>,
    root: Node,
}

impl Bvh {
    fn new(tris: Vec<[P3; 3]>) -> Bvh {
        let boxes: Vec<Aabb> = tris.iter().map(|t| Aabb::of(t)).collect();
        let items: Vec<usize> = (0..tris.len()).collect();
        let root = Self::build(&boxes, items);
        Bvh { tris, root }
    }

    fn build(boxes: &[Aabb], mut items: Vec<usize>) -> Node {
        let bounds = items
            .iter()
            .map(|&i| boxes[i])
            .reduce(|a, b| a.union(&b))
            .unwrap_or(Aabb {
                lo: [0.0; 3],
                hi: [0.0; 3],
            });
        if items.len() <= 8 {
            return Node::Leaf { bounds, items };
        }
        let axis = (0..3)
            .max_by(|&x, &y| (bounds.hi[x] - bounds.lo[x]).total_cmp(&(bounds.hi[y] - bounds.lo[y])))
            .expect("three axes");
        let key = |i: usize| boxes[i].lo[axis] + boxes[i].hi[axis];
        items.sort_by(|&x, &y| key(x).total_cmp(&key(y)).then(x.cmp(&y)));
        let right = items.split_off(items.len() / 2);
        Node::Inner {
            bounds,
            kids: Box::new([Self::build(boxes, items), Self::build(boxes, right)]),
        }
    }

    /// Squared distance and index of the nearest primitive.
    fn nearest(&self, p: P3) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        self.visit(&self.root, p, &mut best);
        best
    }

    fn visit(&self, node: &Node, p: P3, best: &mut (f64, usize)) {
        if node.bounds().dist2(p) > best.0 {
            return;
        }
        match node {
            Node::Leaf { items, .. } => {
                for &i in items {
                    let [a, b, c] = self.tris[i];
                    let d = dist2(p, closest_point_on_triangle(p, a, b, c));
                    if d < best.0 || (d == best.0 && i < best.1) {
                        *best = (d, i);
                    }
                }
            }
            Node::Inner { kids, .. } => {
                let (d0, d1) = (kids[0].bounds().dist2(p), kids[1].bounds().dist2(p));
                let order = if d0 <= d1 { [0, 1] } else { [1, 0] };
                for k in order {
                    self.visit(&kids[k], p, best);
                }
            }
        }
    }
}

/// Triangles of the surface, or its vertices as points when it has no face.
fn primitives(m: &Mesh) -> Vec<[P3; 3]> {
    if m.num_faces() > 0 {
        m.faces().iter().map(|f| f.map(|v| m.position(v))).collect()
    } else {
        m.positions().iter().map(|&p| [p, p, p]).collect()
    }
}

/// Stratified barycentric samples: centroids of a `k × k` subdivision with
/// `k² >= n`, taken row by row until `n` are collected.
fn samples(t: &[P3; 3], n: usize) -> Vec<P3> {
    let k = (1..).find(|k| k * k >= n).expect("some square bounds n");
    let kf = k as f64;
    let mut out = Vec::with_capacity(n);
    'rows: for i in 0..k {
        for j in 0..(2 * (k - i) - 1) {
            if out.len() == n {
                break 'rows;
            }
            // upward cells have corner (i, j/2); downward ones sit between them
            let (u, v) = if j % 2 == 0 {
                let jj = (j / 2) as f64;
                ((i as f64 + 1.0 / 3.0) / kf, (jj + 1.0 / 3.0) / kf)
            } else {
                let jj = (j / 2) as f64;
                ((i as f64 + 2.0 / 3.0) / kf, (jj + 2.0 / 3.0) / kf)
            };
            let w = 1.0 - u - v;
            out.push([0, 1, 2].map(|c| w * t[0][c] + u * t[1][c] + v * t[2][c]));
        }
    }
    out
}

fn corner_key(t: &[P3; 3]) -> [[u64; 3]; 3] {
    let mut k = t.map(|p| p.map(f64::to_bits));
    k.sort();
    k
}

/// Distances from samples of `from` to the surface of `to`. Samples drawn
/// from a triangle that `to` also contains, corner for corner, lie on `to`.
fn one_way(from: &[[P3; 3]], to: &Bvh, shared: &HashSet<[[u64; 3]; 3]>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(from.len() * n);
    for t in from {
        let on_surface = shared.contains(&corner_key(t));
        for p in samples(t, n) {
            out.push(if on_surface { 0.0 } else { to.nearest(p).0.sqrt() });
        }
    }
    out
}

/// Symmetric sampled Hausdorff distance: `(max, rms)` over the samples of
/// both surfaces, each measured to the closest point of the other surface.
pub fn hausdorff(a: &Mesh, b: &Mesh, samples_per_face: usize) -> (f64, f64) {
    let n = samples_per_face.max(1);
    let (pa, pb) = (primitives(a), primitives(b));
    if pa.is_empty() || pb.is_empty() {
        return if pa.is_empty() && pb.is_empty() {
            (0.0, 0.0)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
    }
    let keys_a: HashSet<_> = pa.iter().map(corner_key).collect();
    let keys_b: HashSet<_> = pb.iter().map(corner_key).collect();
    let (ta, tb) = (Bvh::new(pa.clone()), Bvh::new(pb.clone()));
    let mut d = one_way(&pa, &tb, &keys_b, n);
    d.extend(one_way(&pb, &ta, &keys_a, n));
    let max = d.iter().copied().fold(0.0, f64::max);
    let rms = (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt();
    (max, rms)
}

/// `20 log10(diagonal(a) / rms)`, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &Mesh, b: &Mesh, samples_per_face: usize) -> f64 {
    psnr_from_rms(a.bbox_diagonal(), hausdorff(a, b, samples_per_face).1)
}

pub fn psnr_from_rms(diagonal: f64, rms: f64) -> f64 {
    if rms == 0.0 {
        return PSNR_CAP_DB;
    }
    (20.0 * (diagonal / rms).log10()).min(PSNR_CAP_DB)
}

/// Worst-case displacement of a vertex by quantization to `b` bits:
/// `√3 · (max − min) / (2 · (2^b − 1))`.
pub fn error_bound(mesh: &Mesh, b: u32) -> Result<f64, CodecError> {
    let (min, max) = mesh.coordinate_range();
    if !(min < max) {
        return Err(CodecError::DegenerateRange(min));
    }
    Ok(bound_for_range(max - min, b))
}

pub fn bound_for_range(range: f64, b: u32) -> f64 {
    3f64.sqrt() * range / (2.0 * (2f64.powi(b as i32) - 1.0))
}

/// For each position in `points`, the index of the nearest vertex of `mesh`
/// (ties to the smaller index).
pub fn nearest_vertices(mesh: &Mesh, points: &[P3]) -> Vec<VertexId> {
    let tree = Bvh::new(mesh.positions().iter().map(|&p| [p, p, p]).collect());
    points.iter().map(|&p| VertexId(tree.nearest(p).1 as u32)).collect()
}

/// Edges of `original` missing from `edges` and edges of `edges` absent from
/// `original`, after renaming every reconstructed vertex through `map`. An
/// edge whose ends map to one vertex counts as extra.
pub fn edge_set_diff(original: &Mesh, edges: &BTreeSet<Edge>, map: &[VertexId]) -> (usize, usize) {
    let truth = original.edges();
    let mut mapped: BTreeSet<Edge> = BTreeSet::new();
    let mut extra = 0usize;
    for e in edges {
        match Edge::new(map[e.0.index()], map[e.1.index()]) {
            Some(m) => {
                if mapped.insert(m) && !truth.contains(&m) {
                    extra += 1;
                }
            }
            None => extra += 1,
        }
    }
    let missing = truth.iter().filter(|e| !mapped.contains(e)).count();
    (missing, extra)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSetDiff {
    pub missing: usize,
    pub extra: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorReport {
    pub hausdorff_max: f64,
    pub hausdorff_rms: f64,
    pub psnr: f64,
    pub edge_set_diff: EdgeSetDiff,
    pub bound: f64,
}

/// Full comparison of `decoded` against `original`; `map` names the original
/// vertex behind each decoded vertex.
pub fn error_report(
    original: &Mesh,
    decoded: &Mesh,
    decoded_edges: &BTreeSet<Edge>,
    map: &[VertexId],
    b: u32,
    samples_per_face: usize,
) -> Result<ErrorReport, CodecError> {
    let (hmax, hrms) = hausdorff(original, decoded, samples_per_face);
    let (missing, extra) = edge_set_diff(original, decoded_edges, map);
    Ok(ErrorReport {
        hausdorff_max: hmax,
        hausdorff_rms: hrms,
        psnr: psnr_from_rms(original.bbox_diagonal(), hrms),
        edge_set_diff: EdgeSetDiff { missing, extra },
        bound: error_bound(original, b)?,
    })
}
