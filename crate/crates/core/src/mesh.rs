//! Indexed triangle mesh with adjacency, cyclic neighbor order and topology checks.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::MeshError;
use crate::level::{Edge, Level, VertexId};

/// Immutable indexed triangle mesh.
///
/// Faces are expected to be consistently oriented (counterclockwise seen from
/// outside). Neighbor lists follow that orientation: for an interior vertex
/// they form a closed cycle, for a boundary vertex an open fan running from
/// the outgoing boundary edge to the incoming one.
#[derive(Debug, Clone)]
pub struct Mesh {
    positions: Vec<[f64; 3]>,
    faces: Vec<[VertexId; 3]>,
    ordered_neighbors: Vec<Vec<VertexId>>,
    sorted_neighbors: Vec<Vec<VertexId>>,
    boundary: Vec<bool>,
    boundary_loops: Vec<Vec<VertexId>>,
    manifold_vertices: bool,
}

impl Mesh {
    /// Builds a mesh and its adjacency. Only the face-level contract is
    /// enforced here (valid, distinct ids); global topology is checked by
    /// [`validate_topology`].
    pub fn new(positions: Vec<[f64; 3]>, faces: Vec<[VertexId; 3]>) -> Result<Mesh, MeshError> {
        let n = positions.len();
        for (fi, f) in faces.iter().enumerate() {
            for v in f {
                if v.index() >= n {
                    return Err(MeshError::DanglingIndex {
                        face: fi,
                        index: v.0 as i64,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face: fi });
            }
        }

        // successor map around each vertex: face (v, a, b) means a -> b counterclockwise around v
        let mut around: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); n];
        for f in &faces {
            for k in 0..3 {
                let v = f[k];
                around[v.index()].push((f[(k + 1) % 3], f[(k + 2) % 3]));
            }
        }

        let mut sorted_neighbors = vec![Vec::new(); n];
        let mut ordered_neighbors = vec![Vec::new(); n];
        let mut boundary = vec![false; n];
        let mut manifold_vertices = true;
        // per vertex: (fan end -> fan start) used to chain boundary half-edges
        let mut fan_link: Vec<HashMap<VertexId, VertexId>> = vec![HashMap::new(); n];

        for v in 0..n {
            let pairs = &around[v];
            let mut set: BTreeSet<VertexId> = BTreeSet::new();
            for &(a, b) in pairs {
                set.insert(a);
                set.insert(b);
            }
            sorted_neighbors[v] = set.iter().copied().collect();

            let mut succ: HashMap<VertexId, VertexId> = HashMap::new();
            let mut has_pred: HashSet<VertexId> = HashSet::new();
            let mut ok = true;
            for &(a, b) in pairs {
                if succ.insert(a, b).is_some() || !has_pred.insert(b) {
                    ok = false;
                }
            }
            let mut starts: Vec<VertexId> = set.iter().copied().filter(|x| !has_pred.contains(x)).collect();
            starts.sort();
            if !starts.is_empty() {
                boundary[v] = true;
            }

            // walk every fan; record start/end for boundary chaining
            let mut visited: HashSet<VertexId> = HashSet::new();
            let mut order = Vec::new();
            for &s in &starts {
                let mut cur = s;
                visited.insert(cur);
                order.push(cur);
                while let Some(&nx) = succ.get(&cur) {
                    if !visited.insert(nx) {
                        ok = false;
                        break;
                    }
                    order.push(nx);
                    cur = nx;
                }
                fan_link[v].insert(cur, s);
            }
            if starts.is_empty() && !set.is_empty() {
                let s = *set.iter().next().unwrap();
                let mut cur = s;
                visited.insert(cur);
                order.push(cur);
                while let Some(&nx) = succ.get(&cur) {
                    if nx == s {
                        break;
                    }
                    if !visited.insert(nx) {
                        ok = false;
                        break;
                    }
                    order.push(nx);
                    cur = nx;
                }
            }
            if starts.len() > 1 || visited.len() != set.len() {
                ok = false;
            }
            if ok {
                ordered_neighbors[v] = order;
            } else {
                manifold_vertices = false;
                ordered_neighbors[v] = sorted_neighbors[v].clone();
            }
        }

        // boundary half-edges u -> v (face on the left); chain them through fans
        let mut directed: HashSet<(VertexId, VertexId)> = HashSet::new();
        for f in &faces {
            for k in 0..3 {
                directed.insert((f[k], f[(k + 1) % 3]));
            }
        }
        let mut bnd_out: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        let mut bnd_edges: Vec<(VertexId, VertexId)> = Vec::new();
        for f in &faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                if !directed.contains(&(b, a)) {
                    bnd_out.entry(a).or_default().push(b);
                    bnd_edges.push((a, b));
                }
            }
        }
        bnd_edges.sort();
        bnd_edges.dedup();
        let mut used: HashSet<(VertexId, VertexId)> = HashSet::new();
        let mut boundary_loops = Vec::new();
        for &e in &bnd_edges {
            if used.contains(&e) {
                continue;
            }
            let mut lp = Vec::new();
            let mut cur = e;
            loop {
                if !used.insert(cur) {
                    break;
                }
                lp.push(cur.0);
                let (u, v) = cur;
                // next outgoing boundary edge at v: the fan at v whose end is u starts at w, edge v -> w
                let next = fan_link[v.index()]
                    .get(&u)
                    .copied()
                    .filter(|w| directed.contains(&(v, *w)) && !directed.contains(&(*w, v)))
                    .or_else(|| {
                        bnd_out
                            .get(&v)
                            .and_then(|outs| outs.iter().copied().find(|w| !used.contains(&(v, *w))))
                    });
                match next {
                    Some(w) => cur = (v, w),
                    None => break,
                }
            }
            boundary_loops.push(lp);
        }

        Ok(Mesh {
            positions,
            faces,
            ordered_neighbors,
            sorted_neighbors,
            boundary,
            boundary_loops,
            manifold_vertices,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn position(&self, v: VertexId) -> [f64; 3] {
        self.positions[v.index()]
    }

    pub fn faces(&self) -> &[[VertexId; 3]] {
        &self.faces
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.positions.len()).map(VertexId::from)
    }

    /// All undirected edges, ordered.
    pub fn edges(&self) -> BTreeSet<Edge> {
        let mut out = BTreeSet::new();
        for f in &self.faces {
            for k in 0..3 {
                if let Some(e) = Edge::new(f[k], f[(k + 1) % 3]) {
                    out.insert(e);
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.sorted_neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    #[inline]
    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.sorted_neighbors
            .get(a.index())
            .is_some_and(|ns| ns.binary_search(&b).is_ok())
    }

    /// Neighbors of `v` in counterclockwise cyclic order.
    pub fn neighbors(&self, v: VertexId) -> Result<Level, MeshError> {
        self.neighbor_slice(v)
            .map(|s| Level(s.to_vec()))
            .ok_or(MeshError::InvalidVertex(v.0))
    }

    pub(crate) fn neighbor_slice(&self, v: VertexId) -> Option<&[VertexId]> {
        self.ordered_neighbors.get(v.index()).map(Vec::as_slice)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.sorted_neighbors[v.index()].len()
    }

    #[inline]
    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v.index()]
    }

    /// Boundary loops, each following boundary half-edges (interior on the left).
    pub fn boundary_loops(&self) -> &[Vec<VertexId>] {
        &self.boundary_loops
    }

    /// The single boundary loop of a disk mesh.
    pub fn boundary_loop(&self) -> Option<&[VertexId]> {
        match self.boundary_loops.as_slice() {
            [one] => Some(one),
            _ => None,
        }
    }

    /// Global scalar range `(min, max)` over every coordinate of every vertex.
    pub fn coordinate_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.positions {
            for &c in p {
                lo = lo.min(c);
                hi = hi.max(c);
            }
        }
        (lo, hi)
    }

    /// Length of the bounding-box diagonal.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if self.positions.is_empty() {
            return 0.0;
        }
        (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
    }
}

/// One violated mesh invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyViolation {
    Empty,
    UnreferencedVertices { count: usize },
    NonManifoldEdges { count: usize },
    InconsistentOrientation { count: usize },
    NonManifoldVertices { count: usize },
    BoundaryLoops { found: usize },
    EulerCharacteristic { found: i64 },
}

impl fmt::Display for TopologyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyViolation::Empty => write!(f, "mesh has no faces"),
            TopologyViolation::UnreferencedVertices { count } => {
                write!(f, "{count} vertices are not referenced by any face")
            }
            TopologyViolation::NonManifoldEdges { count } => {
                write!(f, "{count} edges are shared by more than two faces")
            }
            TopologyViolation::InconsistentOrientation { count } => {
                write!(f, "{count} edges are traversed twice in the same direction")
            }
            TopologyViolation::NonManifoldVertices { count } => {
                write!(f, "{count} non-manifold vertices")
            }
            TopologyViolation::BoundaryLoops { found } => {
                write!(f, "expected exactly one boundary loop, found {found}")
            }
            TopologyViolation::EulerCharacteristic { found } => {
                write!(f, "Euler characteristic is {found}, expected 1")
            }
        }
    }
}

/// Result of [`validate_topology`]: empty means the mesh is an oriented topological disk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopologyReport {
    pub violations: Vec<TopologyViolation>,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl TopologyReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for TopologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passes() {
            return write!(f, "ok (V={}, E={}, F={})", self.vertices, self.edges, self.faces);
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks every disk-topology invariant and lists the ones that fail.
pub fn validate_topology(mesh: &Mesh) -> TopologyReport {
    let mut violations = Vec::new();
    let v = mesh.num_vertices();
    let f = mesh.num_faces();
    let e = mesh.num_edges();
    if f == 0 {
        violations.push(TopologyViolation::Empty);
    }

    let unreferenced = mesh.sorted_neighbors.iter().filter(|n| n.is_empty()).count();
    if unreferenced > 0 {
        violations.push(TopologyViolation::UnreferencedVertices { count: unreferenced });
    }

    let mut face_count: HashMap<Edge, usize> = HashMap::new();
    let mut directed: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for face in mesh.faces() {
        for k in 0..3 {
            let (a, b) = (face[k], face[(k + 1) % 3]);
            if let Some(edge) = Edge::new(a, b) {
                *face_count.entry(edge).or_default() += 1;
            }
            *directed.entry((a, b)).or_default() += 1;
        }
    }
    let non_manifold = face_count.values().filter(|&&c| c > 2).count();
    if non_manifold > 0 {
        violations.push(TopologyViolation::NonManifoldEdges { count: non_manifold });
    }
    let inconsistent = directed.values().filter(|&&c| c > 1).count();
    if inconsistent > 0 {
        violations.push(TopologyViolation::InconsistentOrientation { count: inconsistent });
    }

    if !mesh.manifold_vertices {
        let mut count = 0;
        for (i, ns) in mesh.ordered_neighbors.iter().enumerate() {
            let vid = VertexId::from(i);
            if !ns.is_empty() && !is_single_fan(mesh, vid) {
                count += 1;
            }
        }
        violations.push(TopologyViolation::NonManifoldVertices { count });
    }

    let loops = mesh.boundary_loops().len();
    if f > 0 && loops != 1 {
        violations.push(TopologyViolation::BoundaryLoops { found: loops });
    }

    let chi = v as i64 - e as i64 + f as i64;
    if f > 0 && chi != 1 {
        violations.push(TopologyViolation::EulerCharacteristic { found: chi });
    }

    TopologyReport {
        violations,
        vertices: v,
        edges: e,
        faces: f,
    }
}

fn is_single_fan(mesh: &Mesh, v: VertexId) -> bool {
    let mut succ: HashMap<VertexId, VertexId> = HashMap::new();
    let mut preds: HashSet<VertexId> = HashSet::new();
    for face in mesh.faces() {
        for k in 0..3 {
            if face[k] == v {
                if succ.insert(face[(k + 1) % 3], face[(k + 2) % 3]).is_some() {
                    return false;
                }
                if !preds.insert(face[(k + 2) % 3]) {
                    return false;
                }
            }
        }
    }
    let ns = &mesh.sorted_neighbors[v.index()];
    let starts: Vec<_> = ns.iter().filter(|x| !preds.contains(x)).collect();
    if starts.len() > 1 {
        return false;
    }
    let start = starts.first().map(|s| **s).unwrap_or(ns[0]);
    let mut seen = HashSet::from([start]);
    let mut cur = start;
    while let Some(&nx) = succ.get(&cur) {
        if !seen.insert(nx) {
            break;
        }
        cur = nx;
    }
    seen.len() == ns.len()
}
