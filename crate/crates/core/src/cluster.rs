//! Mesh recovery from a possibly degraded pixel array.
//!
//! Each row is cut into `x_i + 1` runs at its largest neighbor distances and
//! each column into `y_j + 1` runs likewise. Row runs are then chained top to
//! bottom into global categories, one per vertex, using the column runs to
//! decide which cells below a run still belong to it.

use std::collections::{BTreeSet, HashSet};

use crate::codec::{decode_mean, CgimArray, CgimHeader};
use crate::error::CodecError;
use crate::level::{Edge, VertexId};
use crate::mesh::Mesh;

pub fn color_distance(p: [u16; 3], q: [u16; 3]) -> f64 {
    p.iter()
        .zip(&q)
        .map(|(&a, &b)| (f64::from(a) - f64::from(b)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `d[i][j]`: distance between pixels `(i, j)` and `(i, j + 1)`.
pub fn row_distances(a: &CgimArray) -> Vec<Vec<f64>> {
    (0..a.r1())
        .map(|i| {
            (0..a.r2() - 1)
                .map(|j| color_distance(a.pixel(i, j), a.pixel(i, j + 1)))
                .collect()
        })
        .collect()
}

/// `d[i][j]`: distance between pixels `(i, j)` and `(i + 1, j)`.
pub fn col_distances(a: &CgimArray) -> Vec<Vec<f64>> {
    (0..a.r1().saturating_sub(1))
        .map(|i| {
            (0..a.r2())
                .map(|j| color_distance(a.pixel(i, j), a.pixel(i + 1, j)))
                .collect()
        })
        .collect()
}

/// The `forced` positions plus the largest remaining distances up to `x`
/// cuts, ties to the smaller index, ascending.
fn top_cuts(d: &[f64], x: usize, forced: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).filter(|p| !forced.contains(p)).collect();
    idx.sort_by(|&p, &q| d[q].total_cmp(&d[p]).then(p.cmp(&q)));
    idx.truncate(x.saturating_sub(forced.len()));
    idx.extend_from_slice(forced);
    idx.sort_unstable();
    idx
}

/// Inclusive spans `(first, last)` left by cutting `0..n` after each position in `cuts`.
fn spans(n: usize, cuts: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for &c in cuts {
        out.push((start, c));
        start = c + 1;
    }
    out.push((start, n - 1));
    out
}

/// Per row, the column spans of its categories, left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowCategories {
    pub spans: Vec<Vec<(usize, usize)>>,
}

/// Per column, the row spans of its categories, top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColCategories {
    pub spans: Vec<Vec<(usize, usize)>>,
    /// `split[j][i]`: rows `i` and `i + 1` fall into different categories of column `j`.
    split: Vec<Vec<bool>>,
}

impl ColCategories {
    /// From per-column row spans, each list covering `0..r1` in order.
    pub fn new(r1: usize, spans: Vec<Vec<(usize, usize)>>) -> ColCategories {
        let split = spans
            .iter()
            .map(|col| {
                let mut s = vec![false; r1];
                for &(_, last) in &col[..col.len().saturating_sub(1)] {
                    s[last] = true;
                }
                s
            })
            .collect();
        ColCategories { spans, split }
    }

    /// Whether `(i, j)` and `(i + 1, j)` share a category.
    pub fn joined(&self, i: usize, j: usize) -> bool {
        !self.split[j][i]
    }
}

pub fn cluster_rows(a: &CgimArray, h: &CgimHeader) -> Result<RowCategories, CodecError> {
    h.matches(a)?;
    let d = row_distances(a);
    let mut forced = vec![Vec::new(); a.r1()];
    for &(i, j) in &h.collision_row_cuts {
        forced[i].push(j);
    }
    for f in &mut forced {
        f.sort_unstable();
        f.dedup();
    }
    let spans = (0..a.r1())
        .map(|i| spans(a.r2(), &top_cuts(&d[i], h.row_runs[i], &forced[i])))
        .collect();
    Ok(RowCategories { spans })
}

pub fn cluster_cols(a: &CgimArray, h: &CgimHeader) -> Result<ColCategories, CodecError> {
    h.matches(a)?;
    let d = col_distances(a);
    let mut forced = vec![Vec::new(); a.r2()];
    for &(i, j) in &h.collision_col_cuts {
        forced[j].push(i);
    }
    for f in &mut forced {
        f.sort_unstable();
        f.dedup();
    }
    let spans_out = (0..a.r2())
        .map(|j| {
            let column: Vec<f64> = d.iter().map(|row| row[j]).collect();
            spans(a.r1(), &top_cuts(&column, h.col_runs[j], &forced[j]))
        })
        .collect();
    Ok(ColCategories::new(a.r1(), spans_out))
}

/// Distance between category `upper` of row `i` and category `lower` of row
/// `i + 1`: the mean of `d_col[i][j]` over shared columns `j` whose two cells
/// sit in one column category. Infinite when there is no such column.
pub fn category_distance(
    i: usize,
    upper: (usize, usize),
    lower: (usize, usize),
    d_col: &[Vec<f64>],
    cols: &ColCategories,
) -> f64 {
    let (s, e) = (upper.0.max(lower.0), upper.1.min(lower.1));
    let mut sum = 0.0;
    let mut n = 0usize;
    for j in s..=e {
        if cols.joined(i, j) {
            sum += d_col[i][j];
            n += 1;
        }
    }
    if n == 0 {
        f64::INFINITY
    } else {
        sum / n as f64
    }
}

/// Category of every cell plus per-category mean pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalCategories {
    pub r1: usize,
    pub r2: usize,
    /// Row-major category id per cell; ids count up in order of first appearance.
    pub ids: Vec<u32>,
    pub means: Vec<[f64; 3]>,
}

impl GlobalCategories {
    pub fn count(&self) -> usize {
        self.means.len()
    }

    pub fn id(&self, i: usize, j: usize) -> u32 {
        self.ids[i * self.r2 + j]
    }
}

/// Chains row categories top to bottom: each category joins the closest
/// category of the row above (ties to the leftmost), or starts a new one when
/// every distance is infinite.
pub fn merge_categories(
    a: &CgimArray,
    rows: &RowCategories,
    cols: &ColCategories,
    d_col: &[Vec<f64>],
) -> GlobalCategories {
    let (r1, r2) = (a.r1(), a.r2());
    let mut ids = vec![0u32; r1 * r2];
    let mut next = 0u32;
    let mut above: Vec<u32> = Vec::new();
    for i in 0..r1 {
        let mut here = Vec::with_capacity(rows.spans[i].len());
        let mut first = 0usize;
        for &span in &rows.spans[i] {
            let mut best: Option<(f64, usize)> = None;
            if i > 0 {
                let upper = &rows.spans[i - 1];
                while first < upper.len() && upper[first].1 < span.0 {
                    first += 1;
                }
                for (k, &u) in upper.iter().enumerate().skip(first) {
                    if u.0 > span.1 {
                        break;
                    }
                    let d = category_distance(i - 1, u, span, d_col, cols);
                    if d.is_finite() && best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, k));
                    }
                }
            }
            let id = match best {
                Some((_, k)) => above[k],
                None => {
                    next += 1;
                    next - 1
                }
            };
            for j in span.0..=span.1 {
                ids[i * r2 + j] = id;
            }
            here.push(id);
        }
        above = here;
    }
    let mut sums = vec![[0.0f64; 3]; next as usize];
    let mut counts = vec![0usize; next as usize];
    for i in 0..r1 {
        for j in 0..r2 {
            let id = ids[i * r2 + j] as usize;
            let p = a.pixel(i, j);
            for c in 0..3 {
                sums[id][c] += f64::from(p[c]);
            }
            counts[id] += 1;
        }
    }
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s.map(|x| x / n as f64))
        .collect();
    GlobalCategories { r1, r2, ids, means }
}

/// A recovered mesh. `edges` is the edge set induced by the category grid;
/// `mesh` carries the non-degenerate grid triangles as faces.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub mesh: Mesh,
    pub edges: BTreeSet<Edge>,
    pub categories: GlobalCategories,
}

/// Runs the full cluster phase and rebuilds vertices, edges and faces.
pub fn reconstruct_lossy(a: &CgimArray, h: &CgimHeader) -> Result<Decoded, CodecError> {
    let rows = cluster_rows(a, h)?;
    let cols = cluster_cols(a, h)?;
    let d_col = col_distances(a);
    let cats = merge_categories(a, &rows, &cols, &d_col);
    Ok(build(cats, h))
}

fn build(cats: GlobalCategories, h: &CgimHeader) -> Decoded {
    let positions: Vec<[f64; 3]> = cats.means.iter().map(|m| decode_mean(m.map(f64::round), h)).collect();
    let (r1, r2) = (cats.r1, cats.r2);
    let id = |i: usize, j: usize| VertexId(cats.id(i, j));
    let mut edges = BTreeSet::new();
    for i in 0..r1 {
        for j in 0..r2 {
            if j + 1 < r2 {
                edges.extend(Edge::new(id(i, j), id(i, j + 1)));
            }
            if i + 1 < r1 {
                edges.extend(Edge::new(id(i, j), id(i + 1, j)));
                if j + 1 < r2 {
                    edges.extend(Edge::new(id(i, j + 1), id(i + 1, j)));
                }
            }
        }
    }
    let mut faces = Vec::new();
    let mut seen: HashSet<[VertexId; 3]> = HashSet::new();
    for i in 0..r1.saturating_sub(1) {
        for j in 0..r2 - 1 {
            let tris = [
                [id(i, j), id(i + 1, j), id(i, j + 1)],
                [id(i, j + 1), id(i + 1, j), id(i + 1, j + 1)],
            ];
            for t in tris {
                if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                    continue;
                }
                let mut key = t;
                key.sort();
                if seen.insert(key) {
                    faces.push(t);
                }
            }
        }
    }
    let mesh = Mesh::new(positions, faces).expect("category ids index the position list");
    Decoded {
        mesh,
        edges,
        categories: cats,
    }
}
