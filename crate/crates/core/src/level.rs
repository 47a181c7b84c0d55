use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

/// Index of a mesh vertex, stable across every stage of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i as u32)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unordered vertex pair, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub VertexId, pub VertexId);

impl Edge {
    /// Returns `None` for a degenerate pair (both ends equal).
    #[inline]
    pub fn new(a: VertexId, b: VertexId) -> Option<Edge> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge(a, b)),
            std::cmp::Ordering::Greater => Some(Edge(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// An ordered tuple of vertices, repeats allowed. One row of a V-matrix in the making.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Level(pub Vec<VertexId>);

impl Level {
    pub fn new() -> Self {
        Level(Vec::new())
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(ids: I) -> Self {
        Level(ids.into_iter().map(VertexId).collect())
    }

    /// Number of occurrences of `v`.
    pub fn count(&self, v: VertexId) -> usize {
        self.0.iter().filter(|&&x| x == v).count()
    }

    /// Distinct elements in order of first appearance.
    pub fn distinct(&self) -> Vec<VertexId> {
        let mut seen = std::collections::HashSet::new();
        self.0.iter().copied().filter(|v| seen.insert(*v)).collect()
    }

    /// Collapses adjacent duplicates, `[a,a,b,a] -> [a,b,a]`.
    pub fn dedup_adjacent(&self) -> Level {
        let mut out = self.0.clone();
        out.dedup();
        Level(out)
    }

    pub fn into_inner(self) -> Vec<VertexId> {
        self.0
    }
}

impl Deref for Level {
    type Target = Vec<VertexId>;
    fn deref(&self) -> &Vec<VertexId> {
        &self.0
    }
}

impl DerefMut for Level {
    fn deref_mut(&mut self) -> &mut Vec<VertexId> {
        &mut self.0
    }
}

impl From<Vec<VertexId>> for Level {
    fn from(v: Vec<VertexId>) -> Self {
        Level(v)
    }
}

impl FromIterator<VertexId> for Level {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        Level(iter.into_iter().collect())
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}
