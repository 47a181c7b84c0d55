#![allow(dead_code)]

use cgim::cluster::color_distance;
use cgim::codec::CgimArray;
use cgim::isomatrix::VMatrix;
use cgim::level::VertexId;
use cgim::mesh::Mesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds a mesh from named vertices and faces, orienting each face
/// counterclockwise in the xy-plane.
pub fn named_mesh(points: &[(&str, [f64; 2])], faces: &[&str]) -> Mesh {
    let id = |c: char| -> usize {
        points
            .iter()
            .position(|(n, _)| n.starts_with(c))
            .unwrap_or_else(|| panic!("unknown vertex {c}"))
    };
    let positions: Vec<[f64; 3]> = points.iter().map(|(_, p)| [p[0], p[1], 0.0]).collect();
    let tris = faces
        .iter()
        .map(|f| {
            let v: Vec<usize> = f.chars().map(id).collect();
            let (a, b, c) = (positions[v[0]], positions[v[1]], positions[v[2]]);
            let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            let t = if area > 0.0 {
                [v[0], v[1], v[2]]
            } else {
                [v[0], v[2], v[1]]
            };
            t.map(|i| VertexId(i as u32))
        })
        .collect();
    Mesh::new(positions, tris).expect("valid fixture")
}

pub fn ids(names: &str) -> Vec<VertexId> {
    names.chars().map(|c| VertexId(c as u32 - 'A' as u32)).collect()
}

pub fn names(level: &[VertexId]) -> String {
    level.iter().map(|v| char::from(b'A' + v.0 as u8)).collect()
}

/// Twelve-vertex disk A..L whose top boundary is A B C D E, left corner F and
/// bottom-right corner K.
pub fn walkthrough() -> Mesh {
    let pts = [
        ("A", [0.0, 3.0]),
        ("B", [1.0, 3.0]),
        ("C", [2.0, 3.0]),
        ("D", [3.0, 3.0]),
        ("E", [4.0, 3.0]),
        ("F", [0.0, 1.5]),
        ("G", [1.0, 2.5]),
        ("H", [2.0, 1.0]),
        ("I", [3.0, 1.0]),
        ("J", [3.5, 2.0]),
        ("K", [4.0, 1.0]),
        ("L", [3.5, 0.0]),
    ];
    let faces = [
        "ABG", "BCG", "CGF", "AGF", "CFH", "CDH", "DHI", "DIJ", "DEJ", "EJK", "IJK", "IKL",
    ];
    named_mesh(&pts, &faces)
}

/// Square corners for [`walkthrough`]: A, F, K, E.
pub fn walkthrough_corners() -> [VertexId; 4] {
    let v = ids("AFKE");
    [v[0], v[1], v[2], v[3]]
}

/// Top boundary A..E over a hub F adjacent to all five, flanked by G (next
/// to A and F) and H (next to F and E), above a bottom row I J K.
pub fn high_degree() -> Mesh {
    let pts = [
        ("A", [0.0, 2.0]),
        ("B", [1.0, 2.0]),
        ("C", [2.0, 2.0]),
        ("D", [3.0, 2.0]),
        ("E", [4.0, 2.0]),
        ("F", [2.0, 1.0]),
        ("G", [0.0, 1.0]),
        ("H", [4.0, 1.0]),
        ("I", [0.0, 0.0]),
        ("J", [2.0, 0.0]),
        ("K", [4.0, 0.0]),
    ];
    named_mesh(
        &pts,
        &["AGF", "ABF", "BCF", "CDF", "DEF", "EFH", "GFJ", "FHJ", "GIJ", "HJK"],
    )
}

pub fn high_degree_corners() -> [VertexId; 4] {
    let v = ids("AIKE");
    [v[0], v[1], v[2], v[3]]
}

/// Smallest nonzero pixel distance across a boundary between different
/// vertices, horizontally or vertically.
pub fn min_boundary_distance(v: &VMatrix, a: &CgimArray) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..v.r1() {
        for j in 0..v.r2() {
            for (k, l) in [(i, j + 1), (i + 1, j)] {
                if k < v.r1() && l < v.r2() && v.get(i, j) != v.get(k, l) {
                    let d = color_distance(a.pixel(i, j), a.pixel(k, l));
                    if d > 0.0 {
                        best = best.min(d);
                    }
                }
            }
        }
    }
    best
}

/// Adds integer noise to every channel, each pixel moving by strictly less
/// than a quarter of the minimum boundary distance, so every adjacent
/// distance changes by less than half of it. `None` when that allows no noise.
pub fn plant_noise(v: &VMatrix, a: &CgimArray, seed: u64) -> Option<CgimArray> {
    let quarter = min_boundary_distance(v, a) / 4.0;
    let mut m = (quarter / 3f64.sqrt()).floor() as i64;
    if 3f64.sqrt() * m as f64 >= quarter {
        m -= 1;
    }
    if m < 1 {
        return None;
    }
    let top = i64::from(a.max_value());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = a
        .data()
        .iter()
        .map(|&x| (i64::from(x) + rng.gen_range(-m..=m)).clamp(0, top) as u16)
        .collect();
    Some(CgimArray::new(a.r1(), a.r2(), a.bits(), data).unwrap())
}
