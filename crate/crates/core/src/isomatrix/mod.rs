//! Construction of connectivity-preserving vertex matrices.
//!
//! A [`VMatrix`] stores a vertex id in every cell. Its induced edge set holds
//! every horizontal, vertical and anti-diagonal neighbor pair of cells with
//! different ids. The construction stratifies the mesh into levels, aligns
//! consecutive levels pairwise and then equalizes the rows.

pub mod primitives;
pub mod stratify;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::IsomatrixError;
use crate::level::{Edge, Level, VertexId};
use crate::mesh::Mesh;
use crate::parametrize::Parametrization;
use stratify::Regroup;

pub use primitives::{
    align1, align2, components, edge_set_induced, irregular_pairs, is_proper, proper_sublevel, Adjacency, Component,
    EdgeGraph, IrregularKind, IrregularPair,
};
pub use stratify::{build_candidate, order_neighbors, planar_angle, Stratification};

/// Default threshold for the vertex-reducing variant.
pub const DEFAULT_ALPHA: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Baseline,
    Modified,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "modified" => Ok(Variant::Modified),
            _ => Err(format!("unknown variant {s:?} (baseline, modified)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VMatrix {
    rows: Vec<Vec<VertexId>>,
}

impl VMatrix {
    pub fn from_rows(rows: Vec<Vec<VertexId>>) -> Result<VMatrix, IsomatrixError> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 {
            return Err(IsomatrixError::LengthMismatch(0, 0));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(IsomatrixError::LengthMismatch(width, r.len()));
        }
        Ok(VMatrix { rows })
    }

    pub fn r1(&self) -> usize {
        self.rows.len()
    }

    pub fn r2(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, i: usize, j: usize) -> VertexId {
        self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[VertexId] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<VertexId>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<VertexId> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.rows.iter().flatten().copied().collect()
    }

    pub fn induced_edges(&self) -> BTreeSet<Edge> {
        let mut out = BTreeSet::new();
        for r in &self.rows {
            out.extend(along(r));
        }
        for w in self.rows.windows(2) {
            out.extend(across(&w[0], &w[1]));
        }
        out
    }

    /// True when deleting row `i` leaves the induced vertex and edge sets unchanged.
    /// The first and last rows are never removable.
    pub fn removable_row(&self, i: usize) -> Result<bool, IsomatrixError> {
        if i >= self.r1() {
            return Err(IsomatrixError::IndexOutOfRange(i));
        }
        if i == 0 || i + 1 == self.r1() {
            return Ok(false);
        }
        let counts = EdgeCounts::of_rows(&self.rows);
        Ok(counts.row_removable(&self.rows, i))
    }

    /// Column counterpart of [`VMatrix::removable_row`].
    pub fn removable_column(&self, j: usize) -> Result<bool, IsomatrixError> {
        if j >= self.r2() {
            return Err(IsomatrixError::IndexOutOfRange(j));
        }
        if j == 0 || j + 1 == self.r2() {
            return Ok(false);
        }
        let t = self.transposed();
        let counts = EdgeCounts::of_rows(&t);
        Ok(counts.row_removable(&t, j))
    }

    fn transposed(&self) -> Vec<Vec<VertexId>> {
        (0..self.r2()).map(|j| self.column(j)).collect()
    }

    /// Greedily deletes removable rows, then removable columns, until neither
    /// pass finds anything. Deletions that would break [`VMatrix::run_decodable`]
    /// are skipped.
    pub fn prune(&mut self) {
        loop {
            let rows_before = self.r1();
            prune_rows(&mut self.rows, row_keeps_runs);
            let mut t = self.transposed();
            let cols_before = t.len();
            prune_rows(&mut t, column_keeps_runs);
            let changed_cols = t.len() != cols_before;
            if changed_cols {
                self.rows = (0..t[0].len()).map(|i| t.iter().map(|c| c[i]).collect()).collect();
            }
            if self.r1() == rows_before && !changed_cols {
                break;
            }
        }
    }

    /// Per-row and per-column counts `x_i`, `y_j` where `x_i + 1` is the number
    /// of runs of equal consecutive ids in row `i`.
    pub fn run_counts(&self) -> (Vec<usize>, Vec<usize>) {
        let cuts = |line: &[VertexId]| line.windows(2).filter(|w| w[0] != w[1]).count();
        let rows = self.rows.iter().map(|r| cuts(r)).collect();
        let cols = (0..self.r2()).map(|j| cuts(&self.column(j))).collect();
        (rows, cols)
    }

    /// True when each vertex can be recovered from run boundaries alone: it
    /// forms a single run in every row it occurs in, those rows are
    /// consecutive, and its runs in consecutive rows share a column.
    pub fn run_decodable(&self) -> bool {
        let mut last: HashMap<VertexId, (usize, (usize, usize))> = HashMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            let mut seen: HashMap<VertexId, (usize, usize)> = HashMap::new();
            for (v, span) in runs(r) {
                if seen.insert(v, span).is_some() {
                    return false;
                }
            }
            for (&v, &span) in &seen {
                if let Some(&(row, prev)) = last.get(&v) {
                    if row + 1 != i || prev.1 < span.0 || span.1 < prev.0 {
                        return false;
                    }
                }
                last.insert(v, (i, span));
            }
        }
        true
    }

    /// One row per line, ids separated by spaces.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for VMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| v.0.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

fn along(r: &[VertexId]) -> impl Iterator<Item = Edge> + '_ {
    r.windows(2).filter_map(|w| Edge::new(w[0], w[1]))
}

fn across<'a>(t: &'a [VertexId], b: &'a [VertexId]) -> impl Iterator<Item = Edge> + 'a {
    let vertical = t.iter().zip(b).filter_map(|(&x, &y)| Edge::new(x, y));
    let slash = (0..t.len().saturating_sub(1)).filter_map(move |j| Edge::new(t[j + 1], b[j]));
    vertical.chain(slash)
}

/// Multiplicities of induced edges and vertices, so single-row deletions can be
/// tested without rebuilding the set.
struct EdgeCounts {
    edges: HashMap<Edge, usize>,
    vertices: HashMap<VertexId, usize>,
}

impl EdgeCounts {
    fn of_rows(rows: &[Vec<VertexId>]) -> Self {
        let mut c = EdgeCounts {
            edges: HashMap::new(),
            vertices: HashMap::new(),
        };
        for r in rows {
            c.add_row(r);
        }
        for w in rows.windows(2) {
            c.add_pair(&w[0], &w[1]);
        }
        c
    }

    fn add_row(&mut self, r: &[VertexId]) {
        for e in along(r) {
            *self.edges.entry(e).or_default() += 1;
        }
        for &v in r {
            *self.vertices.entry(v).or_default() += 1;
        }
    }

    fn add_pair(&mut self, t: &[VertexId], b: &[VertexId]) {
        for e in across(t, b) {
            *self.edges.entry(e).or_default() += 1;
        }
    }

    fn remove_row(&mut self, r: &[VertexId]) {
        for e in along(r) {
            dec(&mut self.edges, e);
        }
        for &v in r {
            dec(&mut self.vertices, v);
        }
    }

    fn remove_pair(&mut self, t: &[VertexId], b: &[VertexId]) {
        for e in across(t, b) {
            dec(&mut self.edges, e);
        }
    }

    fn row_removable(&self, rows: &[Vec<VertexId>], i: usize) -> bool {
        let mut lost: HashMap<Edge, usize> = HashMap::new();
        for e in along(&rows[i])
            .chain(across(&rows[i - 1], &rows[i]))
            .chain(across(&rows[i], &rows[i + 1]))
        {
            *lost.entry(e).or_default() += 1;
        }
        let joined: HashSet<Edge> = across(&rows[i - 1], &rows[i + 1]).collect();
        if joined.iter().any(|e| !self.edges.contains_key(e)) {
            return false;
        }
        if lost.iter().any(|(e, &n)| self.edges[e] == n && !joined.contains(e)) {
            return false;
        }
        let mut gone: HashMap<VertexId, usize> = HashMap::new();
        for &v in &rows[i] {
            *gone.entry(v).or_default() += 1;
        }
        gone.iter().all(|(v, &n)| self.vertices[v] > n)
    }
}

fn dec<K: std::hash::Hash + Eq>(m: &mut HashMap<K, usize>, k: K) {
    if let Some(n) = m.get_mut(&k) {
        *n -= 1;
        if *n == 0 {
            m.remove(&k);
        }
    }
}

/// Runs of equal ids as `(id, (first, last))` column spans.
fn runs(r: &[VertexId]) -> Vec<(VertexId, (usize, usize))> {
    let mut out: Vec<(VertexId, (usize, usize))> = Vec::new();
    for (j, &v) in r.iter().enumerate() {
        match out.last_mut() {
            Some((w, span)) if *w == v => span.1 = j,
            _ => out.push((v, (j, j))),
        }
    }
    out
}

/// Whether deleting row `i` keeps the run structure decodable, assuming it is now.
/// Only vertices in both neighboring rows can lose their column overlap.
fn row_keeps_runs(rows: &[Vec<VertexId>], i: usize) -> bool {
    let above: HashMap<VertexId, (usize, usize)> = runs(&rows[i - 1]).into_iter().collect();
    runs(&rows[i + 1])
        .into_iter()
        .all(|(v, s)| above.get(&v).is_none_or(|a| a.0 <= s.1 && s.0 <= a.1))
}

/// Column counterpart of [`row_keeps_runs`] on the transposed matrix `t`
/// (`t[j][i]` is the cell in row `i`, column `j`). Only the vertices in column
/// `j` are affected: a run can shrink, or vanish from its row. Since runs of
/// one vertex in neighboring rows overlap in an interval, the overlap survives
/// unless it is exactly column `j`.
fn column_keeps_runs(t: &[Vec<VertexId>], j: usize) -> bool {
    let r1 = t[j].len();
    let at = |c: Option<usize>, i: usize| c.and_then(|c| t.get(c)).map(|col| col[i]);
    let (left, right) = (j.checked_sub(1), Some(j + 1));
    (0..r1).all(|i| {
        let v = Some(t[j][i]);
        let near = [i.checked_sub(1), Some(i + 1).filter(|&n| n < r1)];
        let shared: Vec<usize> = near.into_iter().flatten().filter(|&n| t[j][n] == t[j][i]).collect();
        let alone = at(left, i) != v && at(right, i) != v;
        if alone {
            return shared.len() < 2;
        }
        shared
            .iter()
            .all(|&n| (at(left, i) == v && at(left, n) == v) || (at(right, i) == v && at(right, n) == v))
    })
}

fn prune_rows(rows: &mut Vec<Vec<VertexId>>, keeps_runs: fn(&[Vec<VertexId>], usize) -> bool) {
    let mut counts = EdgeCounts::of_rows(rows);
    let mut i = 1;
    while i + 1 < rows.len() {
        if counts.row_removable(rows, i) && keeps_runs(rows, i) {
            counts.remove_row(&rows[i]);
            counts.remove_pair(&rows[i - 1], &rows[i]);
            counts.remove_pair(&rows[i], &rows[i + 1]);
            counts.add_pair(&rows[i - 1], &rows[i + 1]);
            rows.remove(i);
        } else {
            i += 1;
        }
    }
}

/// Equalizes the aligned pairs so that the bottom of each pair equals the top
/// of the next, then stacks them into matrix rows.
pub fn align_all_levels(pairs: &[(Level, Level)]) -> Result<Vec<Vec<VertexId>>, IsomatrixError> {
    let mut tops: Vec<Level> = pairs.iter().map(|p| p.0.clone()).collect();
    let mut bottoms: Vec<Level> = pairs.iter().map(|p| p.1.clone()).collect();
    for i in 1..pairs.len() {
        let (t, b) = align2(&bottoms[i - 1], &tops[i], &bottoms[i])?;
        tops[i] = t;
        bottoms[i] = b;
    }
    for i in (1..pairs.len()).rev() {
        let (b, t) = align2(&tops[i], &bottoms[i - 1], &tops[i - 1])?;
        bottoms[i - 1] = b;
        tops[i - 1] = t;
    }
    let mut rows = Vec::with_capacity(pairs.len() + 1);
    if let Some(first) = tops.first() {
        rows.push(first.0.clone());
    }
    for i in 0..pairs.len() {
        if i + 1 < pairs.len() && bottoms[i] != tops[i + 1] {
            return Err(IsomatrixError::RowMismatch {
                row: i + 1,
                next: i + 2,
            });
        }
        rows.push(bottoms[i].0.clone());
    }
    Ok(rows)
}

/// Compares the induced vertex and edge sets of `m` against the mesh.
pub fn check_connectivity(mesh: &Mesh, m: &VMatrix) -> Result<(), IsomatrixError> {
    let want = mesh.edges();
    let got = m.induced_edges();
    let verts = m.vertices();
    let missing_vertices = mesh.num_vertices() - verts.iter().filter(|v| v.index() < mesh.num_vertices()).count();
    let missing: Vec<Edge> = want.difference(&got).copied().collect();
    let extra: Vec<Edge> = got.difference(&want).copied().collect();
    if missing_vertices == 0 && missing.is_empty() && extra.is_empty() && verts.len() == mesh.num_vertices() {
        Ok(())
    } else {
        Err(IsomatrixError::NotPreserving {
            missing_vertices,
            missing,
            extra,
        })
    }
}

fn build(mesh: &Mesh, param: &Parametrization, regroup: Option<Regroup>) -> Result<VMatrix, IsomatrixError> {
    let s = stratify::stratify(mesh, param, regroup)?;
    let rows = align_all_levels(&s.pairs)?;
    let mut m = VMatrix::from_rows(rows)?;
    if regroup.is_some() {
        m.prune();
    }
    check_connectivity(mesh, &m)?;
    if !m.run_decodable() {
        return Err(IsomatrixError::NotRunDecodable);
    }
    Ok(m)
}

/// Levels and aligned pairs of the plain construction, for inspection.
pub fn stratify_levels(mesh: &Mesh, param: &Parametrization) -> Result<Stratification, IsomatrixError> {
    stratify::stratify(mesh, param, None)
}

/// Plain construction: every candidate vertex joins the next level.
pub fn isomatrix_baseline(mesh: &Mesh, param: &Parametrization) -> Result<VMatrix, IsomatrixError> {
    build(mesh, param, None)
}

/// Vertex-reducing construction: components without irregular pairs keep
/// only high-degree vertices and their flanks, and redundant rows and columns
/// are deleted afterwards.
///
/// Keeping only the first and last lower neighbors of a high-degree vertex can
/// backfire when that vertex qualifies again on every level (a fan hub sheds
/// two rim vertices per row). The matrix is therefore built with and without
/// that rule and the one with fewer cells is returned.
pub fn isomatrix_modified(mesh: &Mesh, param: &Parametrization, alpha: usize) -> Result<VMatrix, IsomatrixError> {
    if alpha < 2 {
        return Err(IsomatrixError::BadAlpha(alpha));
    }
    let with_flanks = build(mesh, param, Some(Regroup { alpha, flanks: true }))?;
    let without = build(mesh, param, Some(Regroup { alpha, flanks: false }))?;
    if without.r1() * without.r2() < with_flanks.r1() * with_flanks.r2() {
        Ok(without)
    } else {
        Ok(with_flanks)
    }
}

pub fn isomatrix(
    mesh: &Mesh,
    param: &Parametrization,
    variant: Variant,
    alpha: usize,
) -> Result<VMatrix, IsomatrixError> {
    match variant {
        Variant::Baseline => isomatrix_baseline(mesh, param),
        Variant::Modified => isomatrix_modified(mesh, param, alpha),
    }
}
