//! Level-level building blocks: induced edges, components, irregular pairs,
//! proper sublevels and the two alignment functions.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::IsomatrixError;
use crate::level::{Edge, Level, VertexId};
use crate::mesh::Mesh;

/// Vertex adjacency oracle. Implemented by [`Mesh`] and by [`EdgeGraph`].
pub trait Adjacency {
    fn adjacent(&self, a: VertexId, b: VertexId) -> bool;
    fn neighbors_of(&self, v: VertexId) -> Vec<VertexId>;
}

impl Adjacency for Mesh {
    #[inline]
    fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        Mesh::adjacent(self, a, b)
    }

    fn neighbors_of(&self, v: VertexId) -> Vec<VertexId> {
        self.neighbor_slice(v).unwrap_or(&[]).to_vec()
    }
}

/// Bare edge list, for adjacency fixtures that need no faces.
#[derive(Debug, Clone, Default)]
pub struct EdgeGraph {
    edges: HashSet<Edge>,
}

impl EdgeGraph {
    pub fn from_pairs<I: IntoIterator<Item = (u32, u32)>>(pairs: I) -> Self {
        EdgeGraph {
            edges: pairs
                .into_iter()
                .filter_map(|(a, b)| Edge::new(VertexId(a), VertexId(b)))
                .collect(),
        }
    }
}

impl Adjacency for EdgeGraph {
    fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        Edge::new(a, b).is_some_and(|e| self.edges.contains(&e))
    }

    fn neighbors_of(&self, v: VertexId) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .edges
            .iter()
            .filter_map(|e| match (e.0 == v, e.1 == v) {
                (true, _) => Some(e.1),
                (_, true) => Some(e.0),
                _ => None,
            })
            .collect();
        out.sort();
        out
    }
}

/// Edge set induced by two equal-length levels: horizontal pairs in each
/// level, vertical pairs and one slash direction (`L1(j+1)`, `L2(j)`).
pub fn edge_set_induced(l1: &[VertexId], l2: &[VertexId]) -> Result<BTreeSet<Edge>, IsomatrixError> {
    if l1.len() != l2.len() {
        return Err(IsomatrixError::LengthMismatch(l1.len(), l2.len()));
    }
    let mut out = BTreeSet::new();
    let n = l1.len();
    for j in 0..n {
        out.extend(Edge::new(l1[j], l2[j]));
        if j + 1 < n {
            out.extend(Edge::new(l1[j], l1[j + 1]));
            out.extend(Edge::new(l2[j], l2[j + 1]));
            out.extend(Edge::new(l1[j + 1], l2[j]));
        }
    }
    Ok(out)
}

/// A maximal run of consecutively adjacent elements, `start..=end` into the parent level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub start: usize,
    pub end: usize,
}

impl Component {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slice<'a>(&self, level: &'a [VertexId]) -> &'a [VertexId] {
        &level[self.start..=self.end]
    }
}

/// Splits `q` wherever two consecutive elements are not adjacent in the mesh.
pub fn components<A: Adjacency + ?Sized>(q: &[VertexId], mesh: &A) -> Vec<Component> {
    let mut out = Vec::new();
    if q.is_empty() {
        return out;
    }
    let mut start = 0;
    for k in 1..q.len() {
        if !mesh.adjacent(q[k - 1], q[k]) {
            out.push(Component { start, end: k - 1 });
            start = k;
        }
    }
    out.push(Component {
        start,
        end: q.len() - 1,
    });
    out
}

/// Which of the two defining relations an irregular pair satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IrregularKind {
    /// `q_i = q_j`
    Repeat,
    /// `q_i ∼ q_j` with neither end next to the other in the component.
    Chord,
}

/// Index pair `(i, j)`, `i + 2 <= j`, 0-based positions inside a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IrregularPair {
    pub i: usize,
    pub j: usize,
    pub kind: IrregularKind,
}

/// All irregular pairs of a component. Components shorter than three have none.
pub fn irregular_pairs<A: Adjacency + ?Sized>(qc: &[VertexId], mesh: &A) -> Vec<IrregularPair> {
    let n = qc.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    // {q_{k-1}, q_{k+1}}; an out-of-range subscript collapses the set to the end element
    let flank = |k: usize| -> [VertexId; 2] {
        if k == 0 {
            [qc[0], qc[0]]
        } else if k + 1 >= n {
            [qc[n - 1], qc[n - 1]]
        } else {
            [qc[k - 1], qc[k + 1]]
        }
    };
    let mut at: HashMap<VertexId, Vec<usize>> = HashMap::new();
    for (k, &v) in qc.iter().enumerate() {
        at.entry(v).or_default().push(k);
    }
    for i in 0..n {
        let a = qc[i];
        let mut js: Vec<usize> = at[&a].iter().copied().filter(|&j| j >= i + 2).collect();
        for w in mesh.neighbors_of(a) {
            if let Some(ps) = at.get(&w) {
                js.extend(ps.iter().copied().filter(|&j| j >= i + 2));
            }
        }
        js.sort_unstable();
        js.dedup();
        for j in js {
            let b = qc[j];
            if a == b {
                out.push(IrregularPair {
                    i,
                    j,
                    kind: IrregularKind::Repeat,
                });
            } else if mesh.adjacent(a, b) && !flank(j).contains(&a) && !flank(i).contains(&b) {
                out.push(IrregularPair {
                    i,
                    j,
                    kind: IrregularKind::Chord,
                });
            }
        }
    }
    out
}

/// Properness of a sublevel of `qc`, given as increasing positions into `qc`.
///
/// A component of the sublevel may hold no end-vertex of a repeat pair and
/// may not hold both end-vertices of one chord pair.
pub fn is_proper<A: Adjacency + ?Sized>(
    positions: &[usize],
    qc: &[VertexId],
    pairs: &[IrregularPair],
    mesh: &A,
) -> bool {
    let sub: Vec<VertexId> = positions.iter().map(|&p| qc[p]).collect();
    let repeat_ends: HashSet<VertexId> = pairs
        .iter()
        .filter(|p| p.kind == IrregularKind::Repeat)
        .map(|p| qc[p.i])
        .collect();
    components(&sub, mesh).iter().all(|c| {
        let members: HashSet<VertexId> = c.slice(&sub).iter().copied().collect();
        !members.iter().any(|v| repeat_ends.contains(v))
            && !pairs
                .iter()
                .any(|p| p.kind == IrregularKind::Chord && members.contains(&qc[p.i]) && members.contains(&qc[p.j]))
    })
}

/// Greedy left-to-right proper sublevel, returned as positions into `qc`.
///
/// Repeat-pair end-vertices are dropped, and an element is skipped when its
/// chord partner is already kept anywhere in the sublevel. That is stricter
/// than [`is_proper`], which only looks inside each component: a chord whose
/// ends sit in two different components of the next level would otherwise
/// never be emitted.
pub fn proper_sublevel<A: Adjacency + ?Sized>(qc: &[VertexId], mesh: &A) -> Vec<usize> {
    let pairs = irregular_pairs(qc, mesh);
    if pairs.is_empty() {
        return (0..qc.len()).collect();
    }
    let repeat_ends: HashSet<VertexId> = pairs
        .iter()
        .filter(|p| p.kind == IrregularKind::Repeat)
        .map(|p| qc[p.i])
        .collect();
    let mut partners: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for p in pairs.iter().filter(|p| p.kind == IrregularKind::Chord) {
        partners.entry(qc[p.i]).or_default().push(qc[p.j]);
        partners.entry(qc[p.j]).or_default().push(qc[p.i]);
    }
    let mut kept: HashSet<VertexId> = HashSet::new();
    let mut out = Vec::new();
    for (k, &v) in qc.iter().enumerate() {
        if repeat_ends.contains(&v) || kept.contains(&v) {
            continue;
        }
        if partners.get(&v).is_some_and(|ps| ps.iter().any(|w| kept.contains(w))) {
            continue;
        }
        kept.insert(v);
        out.push(k);
    }
    out
}

/// Slash-direction alignment of two levels: every element is replicated by
/// its neighbor count in the other level, less one except at the leading end
/// of the first level and the trailing end of the second. Neighbor counts run
/// over positions, so a vertex listed twice in the other level counts twice.
pub fn align1<A: Adjacency + ?Sized>(
    l1: &[VertexId],
    l2: &[VertexId],
    mesh: &A,
) -> Result<(Level, Level), IsomatrixError> {
    let (set1, set2) = (l1, l2);
    let count_in = |v: VertexId, set: &[VertexId]| -> usize { set.iter().filter(|&&w| mesh.adjacent(v, w)).count() };
    let mut out1 = Level::new();
    for (i, &v) in l1.iter().enumerate() {
        let c = count_in(v, set2);
        let d = if i == 0 { c } else { c.saturating_sub(1) };
        out1.extend(std::iter::repeat_n(v, d.max(1)));
    }
    let mut out2 = Level::new();
    let n = l2.len();
    for (i, &w) in l2.iter().enumerate() {
        let c = count_in(w, set1);
        let d = if i + 1 == n { c } else { c.saturating_sub(1) };
        out2.extend(std::iter::repeat_n(w, d.max(1)));
    }
    if out1.len() != out2.len() {
        return Err(IsomatrixError::LengthMismatch(out1.len(), out2.len()));
    }
    Ok((out1, out2))
}

/// Raises the multiplicity of every vertex of `l2` to its multiplicity in
/// `l1`, inserting balancing elements into the partner level `l3`.
///
/// `l2` and `l3` are treated as the two rows of an aligned pair: each insertion
/// duplicates a whole column (one element of `l2` together with the element of
/// `l3` below it), which never changes the induced edge set. The partner
/// elements cycle through the distinct elements of `l3` spanned by the run.
pub fn align2(l1: &[VertexId], l2: &Level, l3: &Level) -> Result<(Level, Level), IsomatrixError> {
    if l2.len() != l3.len() {
        return Err(IsomatrixError::LengthMismatch(l2.len(), l3.len()));
    }
    let mut l2 = l2.clone();
    let mut l3 = l3.clone();
    let mut counts1: HashMap<VertexId, usize> = HashMap::new();
    for &v in l1 {
        *counts1.entry(v).or_default() += 1;
    }
    for v in Level(l1.to_vec()).distinct() {
        let have = l2.count(v);
        let need = counts1[&v];
        if need <= have {
            continue;
        }
        let mut d = need - have;
        let a1 = l2
            .iter()
            .position(|&x| x == v)
            .ok_or(IsomatrixError::Align2Missing(v.0))?;
        let mut a2 = l2.iter().rposition(|&x| x == v).unwrap_or(a1);
        let ws = Level(l3[a1..=a2].to_vec()).distinct();
        let mut j = 0;
        while d >= 1 {
            let w = ws[j];
            let col = (a1..=a2).find(|&c| l3[c] == w).unwrap_or(a1);
            let (x, y) = (l2[col], l3[col]);
            l2.insert(col, x);
            l3.insert(col, y);
            a2 += 1;
            d -= 1;
            j = (j + 1) % ws.len();
        }
    }
    Ok((l2, l3))
}
