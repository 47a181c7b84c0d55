//! Uniform-weight Tutte embedding onto the unit square.

use crate::error::ParamError;
use crate::level::{Level, VertexId};
use crate::mesh::{validate_topology, Mesh};

/// Per-vertex planar coordinates in `[0,1]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parametrization {
    pub uv: Vec<[f64; 2]>,
    /// Boundary vertices pinned to square corners, in boundary-loop order
    /// starting from `(0,1)`. Three entries when the boundary is a triangle.
    pub corners: Vec<VertexId>,
}

impl Parametrization {
    pub fn uv(&self, v: VertexId) -> [f64; 2] {
        self.uv[v.index()]
    }
}

const SQUARE: [[f64; 2]; 4] = [[0.0, 1.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];

/// Pins the boundary loop to the square border and places every interior
/// vertex at the mean of its neighbors.
///
/// The loop runs with the interior on its left, so it is laid out
/// counterclockwise: down the left side from `(0,1)`, along the bottom, up the
/// right side and back along the top edge.
pub fn tutte_parametrize(mesh: &Mesh) -> Result<Parametrization, ParamError> {
    embed(mesh, None)
}

/// Like [`tutte_parametrize`], with the four square corners pinned to the given
/// boundary vertices, listed counterclockwise from `(0,1)`.
pub fn tutte_parametrize_with_corners(mesh: &Mesh, corners: [VertexId; 4]) -> Result<Parametrization, ParamError> {
    embed(mesh, Some(corners))
}

fn embed(mesh: &Mesh, corners: Option<[VertexId; 4]>) -> Result<Parametrization, ParamError> {
    let report = validate_topology(mesh);
    if !report.passes() {
        return Err(ParamError::NotADisk(report.to_string()));
    }
    let lp = mesh
        .boundary_loop()
        .ok_or_else(|| ParamError::NotADisk("no single boundary loop".into()))?;
    let n = lp.len();
    if n < 3 {
        return Err(ParamError::BoundaryTooShort(n));
    }

    let mut uv = vec![[0.0f64; 2]; mesh.num_vertices()];
    let mut pinned = vec![false; mesh.num_vertices()];
    let corners = match corners {
        None => place_boundary(mesh, lp, &mut uv),
        Some(c) => {
            let pos: Option<Vec<usize>> = c.iter().map(|v| lp.iter().position(|w| w == v)).collect();
            let pos = pos.ok_or(ParamError::BadCorners)?;
            let lp: Vec<VertexId> = lp[pos[0]..].iter().chain(&lp[..pos[0]]).copied().collect();
            let mut split = [0usize; 5];
            for k in 0..4 {
                split[k] = (pos[k] + n - pos[0]) % n;
            }
            split[4] = n;
            if split.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ParamError::BadCorners);
            }
            place_sides(mesh, &lp, split, &mut uv)
        }
    };
    for v in lp {
        pinned[v.index()] = true;
    }

    solve_interior(mesh, &pinned, &mut uv)?;
    Ok(Parametrization { uv, corners })
}

/// Cumulative chord length around the loop; the last entry closes it.
fn chord_lengths(mesh: &Mesh, lp: &[VertexId]) -> Vec<f64> {
    let n = lp.len();
    let mut cum = vec![0.0f64; n + 1];
    for i in 0..n {
        let a = mesh.position(lp[i]);
        let b = mesh.position(lp[(i + 1) % n]);
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        cum[i + 1] = cum[i] + d;
    }
    cum
}

fn place_boundary(mesh: &Mesh, lp: &[VertexId], uv: &mut [[f64; 2]]) -> Vec<VertexId> {
    let n = lp.len();
    if n == 3 {
        uv[lp[0].index()] = [0.0, 1.0];
        uv[lp[1].index()] = [0.5, 0.0];
        uv[lp[2].index()] = [1.0, 1.0];
        return lp.to_vec();
    }

    let cum = chord_lengths(mesh, lp);
    let total = cum[n];
    let mut split = [0usize, 0, 0, 0, n];
    for k in 1..4 {
        let target = total * k as f64 / 4.0;
        let lo = split[k - 1] + 1;
        let hi = n - (4 - k);
        let mut best = lo;
        for i in lo..=hi {
            if (cum[i] - target).abs() < (cum[best] - target).abs() {
                best = i;
            }
        }
        split[k] = best;
    }
    place_sides(mesh, lp, split, uv)
}

/// Lays `lp[split[k]..split[k+1]]` along side `k` of the square by chord length.
fn place_sides(mesh: &Mesh, lp: &[VertexId], split: [usize; 5], uv: &mut [[f64; 2]]) -> Vec<VertexId> {
    let cum = chord_lengths(mesh, lp);
    for side in 0..4 {
        let (s, e) = (split[side], split[side + 1]);
        let (p, q) = (SQUARE[side], SQUARE[(side + 1) % 4]);
        let len = cum[e] - cum[s];
        for i in s..e {
            let t = if len > 0.0 {
                (cum[i] - cum[s]) / len
            } else {
                (i - s) as f64 / (e - s) as f64
            };
            let v = lp[i].index();
            uv[v] = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            // exact literal coordinates on each side
            match side {
                0 => uv[v][0] = 0.0,
                1 => uv[v][1] = 0.0,
                2 => uv[v][0] = 1.0,
                _ => uv[v][1] = 1.0,
            }
        }
    }
    split[..4].iter().map(|&i| lp[i]).collect()
}

/// Jacobi-preconditioned conjugate gradient on the interior Laplacian.
fn solve_interior(mesh: &Mesh, pinned: &[bool], uv: &mut [[f64; 2]]) -> Result<(), ParamError> {
    let interior: Vec<usize> = (0..mesh.num_vertices()).filter(|&i| !pinned[i]).collect();
    if interior.is_empty() {
        return Ok(());
    }
    let mut slot = vec![usize::MAX; mesh.num_vertices()];
    for (k, &v) in interior.iter().enumerate() {
        slot[v] = k;
    }
    let m = interior.len();
    let nbrs: Vec<&[VertexId]> = interior
        .iter()
        .map(|&v| mesh.neighbor_slice(VertexId::from(v)).unwrap_or(&[]))
        .collect();
    let diag: Vec<f64> = nbrs.iter().map(|ns| ns.len() as f64).collect();

    let apply = |x: &[f64], out: &mut [f64]| {
        for k in 0..m {
            let mut s = diag[k] * x[k];
            for w in nbrs[k] {
                let j = slot[w.index()];
                if j != usize::MAX {
                    s -= x[j];
                }
            }
            out[k] = s;
        }
    };

    let max_iter = (10 * mesh.num_vertices()).max(100);
    for axis in 0..2 {
        let b: Vec<f64> = (0..m)
            .map(|k| {
                nbrs[k]
                    .iter()
                    .filter(|w| pinned[w.index()])
                    .map(|w| uv[w.index()][axis])
                    .sum()
            })
            .collect();
        // start from the boundary mean of each row; any start converges
        let mut x: Vec<f64> = (0..m).map(|k| b[k] / diag[k].max(1.0)).collect();
        let mut ax = vec![0.0; m];
        apply(&x, &mut ax);
        let mut r: Vec<f64> = (0..m).map(|k| b[k] - ax[k]).collect();
        let mut z: Vec<f64> = (0..m).map(|k| r[k] / diag[k]).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; m];
        let mut iters = 0;
        loop {
            let res = (0..m).map(|k| (r[k] / diag[k]).abs()).fold(0.0, f64::max);
            if res <= 1e-13 {
                break;
            }
            if iters >= max_iter {
                return Err(ParamError::NoConvergence {
                    iterations: iters,
                    residual: res,
                });
            }
            apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(ParamError::NoConvergence {
                    iterations: iters,
                    residual: res,
                });
            }
            let alpha = rz / pap;
            for k in 0..m {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            // refresh the true residual now and then against drift
            if iters % 50 == 49 {
                apply(&x, &mut ax);
                for k in 0..m {
                    r[k] = b[k] - ax[k];
                }
            }
            for k in 0..m {
                z[k] = r[k] / diag[k];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..m {
                p[k] = z[k] + beta * p[k];
            }
            iters += 1;
        }
        for (k, &v) in interior.iter().enumerate() {
            uv[v][axis] = x[k];
        }
    }

    let res = tutte_residual(
        mesh,
        &Parametrization {
            uv: uv.to_vec(),
            corners: Vec::new(),
        },
    );
    if res > 1e-10 {
        return Err(ParamError::NoConvergence {
            iterations: max_iter,
            residual: res,
        });
    }
    Ok(())
}

/// Largest `‖uv(v) − mean(uv(N(v)))‖∞` over interior vertices.
pub fn tutte_residual(mesh: &Mesh, param: &Parametrization) -> f64 {
    let mut worst = 0.0f64;
    for v in mesh.vertex_ids() {
        if mesh.is_boundary(v) {
            continue;
        }
        let ns = mesh.neighbor_slice(v).unwrap_or(&[]);
        if ns.is_empty() {
            continue;
        }
        for axis in 0..2 {
            let mean = ns.iter().map(|w| param.uv[w.index()][axis]).sum::<f64>() / ns.len() as f64;
            worst = worst.max((param.uv[v.index()][axis] - mean).abs());
        }
    }
    worst
}

/// Vertices with ordinate exactly 1, left to right.
pub fn initial_level(param: &Parametrization) -> Result<Level, ParamError> {
    let mut top: Vec<(f64, VertexId)> = param
        .uv
        .iter()
        .enumerate()
        .filter(|(_, p)| p[1] == 1.0)
        .map(|(i, p)| (p[0], VertexId::from(i)))
        .collect();
    if top.len() < 2 {
        return Err(ParamError::TopEdgeTooShort(top.len()));
    }
    top.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if top.windows(2).any(|w| w[0].0 >= w[1].0) || top[0].0 != 0.0 || top[top.len() - 1].0 != 1.0 {
        return Err(ParamError::EqualAbscissas);
    }
    Ok(top.into_iter().map(|(_, v)| v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, CorpusKind};

    #[test]
    fn triangle_uses_fixed_corners() {
        let m = crate::io::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        let p = tutte_parametrize(&m).unwrap();
        let mut pts = p.uv.clone();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![[0.0, 1.0], [0.5, 0.0], [1.0, 1.0]]);
        assert_eq!(initial_level(&p).unwrap().len(), 2);
    }

    #[test]
    fn grid_residual_and_top_row() {
        let m = generate(CorpusKind::Grid, 10, 0).unwrap();
        let p = tutte_parametrize(&m).unwrap();
        assert!(tutte_residual(&m, &p) <= 1e-10);
        for v in m.vertex_ids() {
            let [u, w] = p.uv(v);
            assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&w));
            if !m.is_boundary(v) {
                assert!(u > 0.0 && u < 1.0 && w > 0.0 && w < 1.0);
            }
        }
        let l1 = initial_level(&p).unwrap();
        let xs: Vec<f64> = l1.iter().map(|v| p.uv(*v)[0]).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((xs[0], xs[xs.len() - 1]), (0.0, 1.0));
    }

    #[test]
    fn fan_center_is_boundary_mean_free() {
        // an open fan keeps every vertex on the boundary: nothing to solve
        let m = generate(CorpusKind::Fan, 6, 0).unwrap();
        let p = tutte_parametrize(&m).unwrap();
        assert_eq!(tutte_residual(&m, &p), 0.0);
    }

    #[test]
    fn single_interior_vertex_is_neighbor_mean() {
        // closed fan: hub surrounded by a hexagon
        use crate::level::VertexId as V;
        let mut pos = vec![[0.0, 0.0, 0.0]];
        for i in 0..6 {
            let a = std::f64::consts::PI / 3.0 * i as f64;
            pos.push([a.cos(), a.sin(), 0.0]);
        }
        let faces = (0..6u32).map(|i| [V(0), V(1 + i), V(1 + (i + 1) % 6)]).collect();
        let m = Mesh::new(pos, faces).unwrap();
        let p = tutte_parametrize(&m).unwrap();
        let mean = (1..7).fold([0.0, 0.0], |acc, i| {
            [acc[0] + p.uv[i][0] / 6.0, acc[1] + p.uv[i][1] / 6.0]
        });
        assert!((p.uv[0][0] - mean[0]).abs() < 1e-12 && (p.uv[0][1] - mean[1]).abs() < 1e-12);
    }

    #[test]
    fn boundary_runs_counterclockwise() {
        let m = generate(CorpusKind::DelaunayDisk, 200, 3).unwrap();
        let p = tutte_parametrize(&m).unwrap();
        let lp = m.boundary_loop().unwrap();
        // signed area of the boundary polygon in uv must be +1
        let mut area = 0.0;
        for i in 0..lp.len() {
            let a = p.uv(lp[i]);
            let b = p.uv(lp[(i + 1) % lp.len()]);
            area += a[0] * b[1] - b[0] * a[1];
        }
        assert!((area / 2.0 - 1.0).abs() < 1e-12);
        assert_eq!(p.uv(p.corners[0]), [0.0, 1.0]);
    }
}
