//! Level-by-level stratification of the mesh and the two-level alignment that
//! comes with each new level.
//!
//! Every level is a simple path whose ends lie on the mesh boundary. A new
//! level is assembled from moves along the previous one: a zipper joins a
//! component of new vertices to a span of the previous level, a chain move
//! drops a run of previous-level vertices that all hang off one anchor, and a
//! triangle move advances across a single face.
//! Each move is checked against the mesh before it is used, so the induced
//! edges of every aligned pair are mesh edges and no vertex leaves the front
//! while it still has an edge that no pair induces.

use std::collections::{HashMap, HashSet};
use std::f64::consts::TAU;

use crate::error::IsomatrixError;
use crate::level::{Edge, Level, VertexId};
use crate::mesh::Mesh;
use crate::parametrize::{initial_level, Parametrization};

use super::primitives::{align1, components, irregular_pairs, proper_sublevel};

/// Counterclockwise angle in `[0, 2π)` from the vector `a2→a1` to `a2→a3`.
pub fn planar_angle(a1: [f64; 2], a2: [f64; 2], a3: [f64; 2]) -> f64 {
    let from = (a1[1] - a2[1]).atan2(a1[0] - a2[0]);
    let to = (a3[1] - a2[1]).atan2(a3[0] - a2[0]);
    let mut a = to - from;
    while a < 0.0 {
        a += TAU;
    }
    while a >= TAU {
        a -= TAU;
    }
    a
}

/// Unvisited neighbors of `prev[j]`, counterclockwise from the direction of
/// `prev[j-1]` (for `j = 0`, from the position vector of `prev[0]`).
///
/// The order is read off the mesh's cyclic neighbor order, which matches the
/// angular order of any orientation-preserving embedding; the embedding is
/// consulted only when the reference element is not itself a neighbor.
pub fn order_neighbors(mesh: &Mesh, param: &Parametrization, prev: &[VertexId], j: usize, visited: &[bool]) -> Level {
    let v = prev[j];
    let ns = mesh.neighbor_slice(v).unwrap_or(&[]);
    if ns.is_empty() {
        return Level::new();
    }
    let reference = if j == 0 { None } else { Some(prev[j - 1]) };
    let start = match reference {
        None if mesh.is_boundary(v) => 0,
        Some(r) if ns.contains(&r) => (ns.iter().position(|&x| x == r).unwrap() + 1) % ns.len(),
        _ => {
            let p = param.uv(v);
            let dir = match reference {
                Some(r) => param.uv(r),
                None => [2.0 * p[0], 2.0 * p[1]],
            };
            let mut best = 0;
            let mut best_angle = f64::INFINITY;
            for (k, &w) in ns.iter().enumerate() {
                let a = planar_angle(dir, p, param.uv(w));
                if a < best_angle {
                    best_angle = a;
                    best = k;
                }
            }
            best
        }
    };
    (0..ns.len())
        .map(|k| ns[(start + k) % ns.len()])
        .filter(|w| !visited[w.index()])
        .collect()
}

/// Concatenates the ordered neighbor sets of every element of `prev` and
/// collapses adjacent duplicates.
pub fn build_candidate(mesh: &Mesh, param: &Parametrization, prev: &[VertexId], visited: &[bool]) -> Level {
    let mut q = Level::new();
    for j in 0..prev.len() {
        for w in order_neighbors(mesh, param, prev, j, visited).0 {
            if q.last() != Some(&w) {
                q.push(w);
            }
        }
    }
    q
}

/// Output of the stratify loop: levels `L_i`, plus the aligned pairs
/// `(L_i^+, L_{i+1}^-)` for every consecutive pair of levels.
#[derive(Debug, Clone, Default)]
pub struct Stratification {
    pub levels: Vec<Level>,
    /// `pairs[i] = (L_i^+, L_{i+1}^-)`, equal lengths.
    pub pairs: Vec<(Level, Level)>,
}

/// Settings of the vertex-reducing regrouping.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Regroup {
    pub alpha: usize,
    /// Also apply the first/last-neighbor rule for high-degree previous-level vertices.
    pub flanks: bool,
}

/// A checked piece of the next aligned pair. `inner` holds the columns strictly
/// between the flanking columns `(prev[lo], prev[lo])` and `(prev[hi], prev[hi])`.
#[derive(Debug, Clone)]
struct Move {
    lo: usize,
    hi: usize,
    comp: Vec<VertexId>,
    inner: Vec<(VertexId, VertexId)>,
}

struct State<'a> {
    mesh: &'a Mesh,
    visited: Vec<bool>,
    remaining: usize,
    accounted: HashSet<Edge>,
    /// Per vertex, the number of its edges not yet in `accounted`.
    open: Vec<usize>,
}

fn pair_edges(cols: &[(VertexId, VertexId)]) -> Vec<Edge> {
    let mut out = Vec::with_capacity(cols.len() * 4);
    for (k, &(t, b)) in cols.iter().enumerate() {
        out.extend(Edge::new(t, b));
        if k + 1 < cols.len() {
            let (t2, b2) = cols[k + 1];
            out.extend(Edge::new(t, t2));
            out.extend(Edge::new(b, b2));
            out.extend(Edge::new(t2, b));
        }
    }
    out
}

impl State<'_> {
    fn account(&mut self, edges: impl IntoIterator<Item = Edge>) {
        for e in edges {
            if self.accounted.insert(e) {
                self.open[e.0.index()] -= 1;
                self.open[e.1.index()] -= 1;
            }
        }
    }

    fn closed_with(&self, x: VertexId, extra: &HashSet<Edge>) -> bool {
        let open = self.open[x.index()];
        if open == 0 {
            return true;
        }
        if open > extra.len() {
            return false;
        }
        self.mesh.neighbor_slice(x).unwrap_or(&[]).iter().all(|&y| {
            let e = Edge::new(x, y).unwrap();
            self.accounted.contains(&e) || extra.contains(&e)
        })
    }

    /// Flanks `inner`, then checks that every induced edge exists and every
    /// covered previous-level vertex is closed. With `whole`, every edge from
    /// `comp` into `prev[lo..=hi]` must be induced as well.
    fn check(
        &self,
        prev: &[VertexId],
        lo: usize,
        hi: usize,
        comp: Vec<VertexId>,
        inner: Vec<(VertexId, VertexId)>,
        whole: bool,
    ) -> Option<Move> {
        let last = prev.len() - 1;
        if lo == hi {
            // a component hanging off one vertex is only usable at a level end,
            // where the flank on the open side is trimmed
            let at_start = lo == 0 && comp.first().is_some_and(|&q| self.mesh.is_boundary(q));
            let at_end = hi == last && comp.last().is_some_and(|&q| self.mesh.is_boundary(q));
            if !(at_start || at_end) {
                return None;
            }
        }
        let mut cols = Vec::with_capacity(inner.len() + 2);
        cols.push((prev[lo], prev[lo]));
        cols.extend_from_slice(&inner);
        cols.push((prev[hi], prev[hi]));
        let edges = pair_edges(&cols);
        if edges.iter().any(|e| !self.mesh.adjacent(e.0, e.1)) {
            return None;
        }
        let edges: HashSet<Edge> = edges.into_iter().collect();
        for &x in prev.get(lo + 1..hi).unwrap_or(&[]) {
            if !self.closed_with(x, &edges) {
                return None;
            }
        }
        if whole {
            let lost = comp.iter().any(|&q| {
                prev[lo..=hi]
                    .iter()
                    .any(|&x| self.mesh.adjacent(q, x) && !edges.contains(&Edge::new(q, x).unwrap()))
            });
            if lost {
                return None;
            }
        }
        Some(Move { lo, hi, comp, inner })
    }

    /// Aligns `comp` against the previous-level vertices it touches, either
    /// against all of them or against only those strictly inside the span.
    /// The narrow alignment comes first unless the move sits at a level end
    /// whose flank can be trimmed, which needs the flank inside the zipper.
    fn zipper(&self, prev: &[VertexId], comp: &[VertexId]) -> Option<Move> {
        let (lo, hi) = span(self.mesh, prev, comp)?;
        if lo > hi {
            return None;
        }
        let narrow = || {
            if lo + 1 >= hi {
                return None;
            }
            let (p, q) = align1(&prev[lo + 1..hi], comp, self.mesh).ok()?;
            let inner = p.iter().copied().zip(q.iter().copied()).collect();
            self.check(prev, lo, hi, comp.to_vec(), inner, true)
        };
        let full = || {
            let (p, q) = align1(&prev[lo..=hi], comp, self.mesh).ok()?;
            let inner = p.iter().copied().zip(q.iter().copied()).collect();
            self.check(prev, lo, hi, comp.to_vec(), inner, false)
        };
        let boundary = |q: Option<&VertexId>| q.is_some_and(|&q| self.mesh.is_boundary(q));
        let trims = (lo == 0 && boundary(comp.first())) || (hi + 1 == prev.len() && boundary(comp.last()));
        if trims {
            full().or_else(narrow)
        } else {
            narrow().or_else(full)
        }
    }

    /// Drops the longest run of previous-level vertices next to `prev[t]` that
    /// are all adjacent to it and have no other open edge. `forward` picks the
    /// run after `t`; otherwise the run before it.
    fn chain(&self, prev: &[VertexId], t: usize, forward: bool) -> Option<Move> {
        let a = prev[t];
        let n = prev.len();
        let step = |k: usize| {
            if forward {
                k.checked_add(1).filter(|&k| k < n)
            } else {
                k.checked_sub(1)
            }
        };
        let mut k = step(t)?;
        let mut end = None;
        loop {
            let x = prev[k];
            let own: HashSet<Edge> = Edge::new(a, x).into_iter().collect();
            if !self.mesh.adjacent(a, x) || !self.closed_with(x, &own) {
                break;
            }
            let Some(next) = step(k) else { break };
            if self.mesh.adjacent(a, prev[next]) {
                end = Some(k);
            }
            k = next;
        }
        let end = end?;
        let (lo, hi) = if forward { (t, end + 1) } else { (end - 1, t) };
        let inner = (lo + 1..hi).map(|k| (prev[k], a)).collect();
        self.check(prev, lo, hi, Vec::new(), inner, false)
    }

    /// Third vertex of the face below the previous-level edge `prev[t] prev[t+1]`.
    fn apex(&self, prev: &[VertexId], t: usize) -> Option<VertexId> {
        let (a, b) = (prev[t], prev[t + 1]);
        let ns = self.mesh.neighbor_slice(b)?;
        let pos = ns.iter().position(|&x| x == a)?;
        let next = if pos + 1 < ns.len() {
            ns[pos + 1]
        } else if !self.mesh.is_boundary(b) {
            ns[0]
        } else {
            return None;
        };
        self.mesh.adjacent(a, next).then_some(next)
    }

    /// Single-triangle advances, optionally restricted to new vertices in `only`.
    fn triangles(&self, prev: &[VertexId], only: Option<&HashSet<VertexId>>) -> Vec<Move> {
        let mut out = Vec::new();
        for t in 0..prev.len().saturating_sub(1) {
            let Some(q) = self.apex(prev, t) else { continue };
            if !self.visited[q.index()] && only.is_none_or(|s| s.contains(&q)) {
                out.extend(self.zipper(prev, &[q]));
            }
        }
        out
    }

    fn chains(&self, prev: &[VertexId]) -> Vec<Move> {
        let mut out = Vec::new();
        for t in 0..prev.len() {
            out.extend(self.chain(prev, t, true));
            out.extend(self.chain(prev, t, false));
        }
        out
    }
}

/// Index range `(k⁻, k⁺)` of a component into the previous level.
fn span(mesh: &Mesh, prev: &[VertexId], comp: &[VertexId]) -> Option<(usize, usize)> {
    let first = *comp.first()?;
    let last = *comp.last()?;
    let lo = prev.iter().position(|&x| mesh.adjacent(x, first))?;
    let hi = prev.iter().rposition(|&x| mesh.adjacent(x, last))?;
    Some((lo, hi))
}

/// Whether `a` and `b` (with `a.lo <= b.lo`) can be laid along the same level.
fn compatible(a: &Move, b: &Move) -> bool {
    b.lo > a.hi || (b.lo == a.hi && a.lo != a.hi && b.lo != b.hi)
}

/// Picks moves in priority order, keeping each one that fits between the spans
/// already chosen and shares no new vertex with them. Returns them by span.
fn schedule(candidates: Vec<Move>) -> Vec<Move> {
    let mut out: Vec<Move> = Vec::new();
    let mut used: HashSet<VertexId> = HashSet::new();
    for m in candidates {
        if m.comp.iter().any(|v| used.contains(v)) {
            continue;
        }
        let at = out.partition_point(|p| (p.lo, p.hi) <= (m.lo, m.hi));
        let fits_before = at == 0 || compatible(&out[at - 1], &m);
        let fits_after = at == out.len() || compatible(&m, &out[at]);
        if fits_before && fits_after {
            used.extend(m.comp.iter().copied());
            out.insert(at, m);
        }
    }
    out
}

pub(crate) fn stratify(
    mesh: &Mesh,
    param: &Parametrization,
    regroup: Option<Regroup>,
) -> Result<Stratification, IsomatrixError> {
    let n = mesh.num_vertices();
    let first = initial_level(param)?;
    let mut st = State {
        mesh,
        visited: vec![false; n],
        remaining: n,
        accounted: HashSet::new(),
        open: mesh.vertex_ids().map(|v| mesh.degree(v)).collect(),
    };
    st.account(first.windows(2).filter_map(|w| Edge::new(w[0], w[1])));
    for v in first.iter() {
        if !st.visited[v.index()] {
            st.visited[v.index()] = true;
            st.remaining -= 1;
        }
    }
    let total_edges = mesh.num_edges();
    let mut out = Stratification {
        levels: vec![first],
        pairs: Vec::new(),
    };

    while st.remaining > 0 || st.accounted.len() < total_edges {
        let prev = out.levels.last().unwrap().0.clone();
        let mut moves = Vec::new();
        let mut rejected: HashSet<VertexId> = HashSet::new();
        if st.remaining > 0 {
            let q = build_candidate(mesh, param, &prev, &st.visited);
            for c in components(&q, mesh) {
                let slice = c.slice(&q);
                let mut attempts: Vec<Vec<VertexId>> = Vec::new();
                if !irregular_pairs(slice, mesh).is_empty() {
                    attempts.push(proper_sublevel(slice, mesh).into_iter().map(|k| slice[k]).collect());
                } else {
                    if let Some(regroup) = regroup {
                        let fewer = fewer_vertices(mesh, &prev, slice, regroup);
                        if fewer.len() < slice.len() {
                            attempts.push(fewer);
                        }
                    }
                    attempts.push(slice.to_vec());
                }
                let mut accepted = false;
                for sel in attempts {
                    let parts: Vec<Vec<VertexId>> = components(&sel, mesh)
                        .into_iter()
                        .map(|c| c.slice(&sel).to_vec())
                        .collect();
                    let checked: Vec<Move> = parts.iter().filter_map(|p| st.zipper(&prev, p)).collect();
                    if !parts.is_empty() && checked.len() == parts.len() {
                        moves.extend(checked);
                        accepted = true;
                        break;
                    }
                }
                if !accepted {
                    rejected.extend(slice.iter().copied());
                }
            }
            moves.sort_by_key(|m| (m.lo, m.hi));
            if !rejected.is_empty() {
                moves.extend(st.triangles(&prev, Some(&rejected)));
            }
        }
        moves.extend(st.chains(&prev));
        let mut moves = schedule(moves);
        if moves.is_empty() {
            moves = schedule(st.triangles(&prev, None));
        }
        if moves.is_empty() {
            return Err(IsomatrixError::Stall {
                level: out.levels.len() + 1,
                last: Level(prev),
            });
        }
        let (top, bottom) = assemble(&mut st, &prev, &moves);
        let next = bottom.dedup_adjacent();
        if next.distinct().len() != next.len() {
            return Err(IsomatrixError::NonMonotone {
                level: out.levels.len() + 1,
            });
        }
        out.levels.push(next);
        out.pairs.push((top, bottom));
    }
    Ok(out)
}

/// Lays the scheduled moves along `prev`, trims the level ends where a new
/// boundary vertex can take over, and records the newly induced edges.
fn assemble(st: &mut State<'_>, prev: &[VertexId], moves: &[Move]) -> (Level, Level) {
    let mut cols: Vec<(VertexId, VertexId)> = Vec::new();
    let mut cursor = 0usize;
    for m in moves {
        for &x in &prev[cursor..=m.lo] {
            cols.push((x, x));
        }
        cols.extend_from_slice(&m.inner);
        cursor = m.hi;
    }
    for &x in &prev[cursor..] {
        cols.push((x, x));
    }

    let last = prev.len() - 1;
    let first_move = &moves[0];
    let last_move = &moves[moves.len() - 1];
    if first_move.lo == 0 && first_move.comp.first().is_some_and(|&q| st.mesh.is_boundary(q)) {
        if let Some(rest) = trimmed(st, &cols, 1..cols.len(), prev[0]) {
            cols = rest;
        }
    }
    if last_move.hi == last && last_move.comp.last().is_some_and(|&q| st.mesh.is_boundary(q)) {
        if let Some(rest) = trimmed(st, &cols, 0..cols.len() - 1, prev[last]) {
            cols = rest;
        }
    }

    for m in moves {
        for &v in &m.comp {
            if !st.visited[v.index()] {
                st.visited[v.index()] = true;
                st.remaining -= 1;
            }
        }
    }
    st.account(pair_edges(&cols));
    let top = cols.iter().map(|c| c.0).collect();
    let bottom = cols.iter().map(|c| c.1).collect();
    (top, bottom)
}

/// `cols[keep]`, if dropping the other end column loses no edge that is still
/// open and `x` either stays in the new level or has no open edge left.
fn trimmed(
    st: &State<'_>,
    cols: &[(VertexId, VertexId)],
    keep: std::ops::Range<usize>,
    x: VertexId,
) -> Option<Vec<(VertexId, VertexId)>> {
    if keep.is_empty() {
        return None;
    }
    let rest = cols[keep].to_vec();
    let after: HashSet<Edge> = pair_edges(&rest).into_iter().collect();
    let lost = pair_edges(cols)
        .into_iter()
        .any(|e| !after.contains(&e) && !st.accounted.contains(&e));
    let stays = rest.iter().any(|c| c.1 == x);
    (!lost && (stays || st.closed_with(x, &after))).then_some(rest)
}

/// Regrouping for the vertex-reducing variant: keep only vertices with at least
/// `alpha` neighbors in the previous level, plus the first and last neighbors
/// of previous-level vertices that have at least `alpha` neighbors here.
/// The second rule is skipped when `regroup.flanks` is false. Returns the
/// whole component when nothing qualifies.
fn fewer_vertices(mesh: &Mesh, prev: &[VertexId], comp: &[VertexId], regroup: Regroup) -> Vec<VertexId> {
    let alpha = regroup.alpha;
    let prev_set: HashSet<VertexId> = prev.iter().copied().collect();
    let mut keep: HashSet<VertexId> = comp
        .iter()
        .copied()
        .filter(|&v| {
            mesh.neighbor_slice(v)
                .unwrap_or(&[])
                .iter()
                .filter(|w| prev_set.contains(w))
                .count()
                >= alpha
        })
        .collect();
    let position: HashMap<VertexId, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for &x in prev.iter().filter(|_| regroup.flanks) {
        let hits: Vec<usize> = mesh
            .neighbor_slice(x)
            .unwrap_or(&[])
            .iter()
            .filter_map(|w| position.get(w).copied())
            .collect();
        if hits.len() >= alpha {
            keep.insert(comp[*hits.iter().min().expect("nonempty")]);
            keep.insert(comp[*hits.iter().max().expect("nonempty")]);
        }
    }
    if keep.is_empty() {
        return comp.to_vec();
    }
    comp.iter().copied().filter(|v| keep.contains(v)).collect()
}
