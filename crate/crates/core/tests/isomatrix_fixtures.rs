mod common;

use std::collections::BTreeSet;

use cgim::corpus::{generate, CorpusKind};
use cgim::isomatrix::primitives::{
    align1, align2, components, edge_set_induced, irregular_pairs, is_proper, proper_sublevel, EdgeGraph,
};
use cgim::isomatrix::stratify::build_candidate;
use cgim::isomatrix::{check_connectivity, isomatrix_baseline, isomatrix_modified, stratify_levels, VMatrix};
use cgim::parametrize::{initial_level, tutte_parametrize, tutte_parametrize_with_corners};
use cgim::{Edge, Level, Mesh, VertexId};
use common::{high_degree, high_degree_corners, ids, names, walkthrough, walkthrough_corners};

fn lv(xs: &[u32]) -> Vec<VertexId> {
    xs.iter().map(|&i| VertexId(i)).collect()
}

fn edges(pairs: &[(u32, u32)]) -> BTreeSet<Edge> {
    pairs
        .iter()
        .map(|&(a, b)| Edge::new(VertexId(a), VertexId(b)).unwrap())
        .collect()
}

/// Chain 1..=11 plus five chords.
fn chord_chain() -> (Vec<VertexId>, EdgeGraph) {
    let mut pairs: Vec<(u32, u32)> = (1..11).map(|i| (i, i + 1)).collect();
    pairs.extend([(2, 4), (2, 5), (6, 8), (6, 10), (8, 10)]);
    (lv(&(1..=11).collect::<Vec<_>>()), EdgeGraph::from_pairs(pairs))
}

/// Converts 1-based positions.
fn positions(xs: &[usize]) -> Vec<usize> {
    xs.iter().map(|x| x - 1).collect()
}

#[test]
fn chord_chain_irregular_pairs() {
    let (q, g) = chord_chain();
    let got: BTreeSet<(usize, usize)> = irregular_pairs(&q, &g).iter().map(|p| (p.i + 1, p.j + 1)).collect();
    let want: BTreeSet<(usize, usize)> = [(2, 4), (2, 5), (6, 8), (6, 10), (8, 10)].into();
    assert_eq!(got, want);
}

#[test]
fn chord_chain_properness() {
    let (q, g) = chord_chain();
    let pairs = irregular_pairs(&q, &g);
    assert!(is_proper(&positions(&[1, 2, 3, 6, 7, 9]), &q, &pairs, &g));
    assert!(is_proper(&positions(&[3, 4, 5, 6, 7, 9]), &q, &pairs, &g));
    assert!(!is_proper(&positions(&[1, 2, 3, 4]), &q, &pairs, &g));
    assert!(!is_proper(&positions(&[3, 4, 5, 6, 7, 8]), &q, &pairs, &g));
}

#[test]
fn greedy_proper_sublevel_passes_the_predicate() {
    let (q, g) = chord_chain();
    let pairs = irregular_pairs(&q, &g);
    let sub = proper_sublevel(&q, &g);
    assert!(is_proper(&sub, &q, &pairs, &g));
    assert!(sub.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn pure_chain_has_no_irregular_pairs_and_is_its_own_proper_sublevel() {
    let g = EdgeGraph::from_pairs((0..5).map(|i| (i, i + 1)));
    let q = lv(&[0, 1, 2, 3, 4, 5]);
    assert!(irregular_pairs(&q, &g).is_empty());
    assert_eq!(proper_sublevel(&q, &g), (0..6).collect::<Vec<_>>());
}

#[test]
fn repeated_vertex_is_an_irregular_pair() {
    // 0-1-2-0 revisits 0 at distance three
    let g = EdgeGraph::from_pairs([(0, 1), (1, 2), (2, 0)]);
    let q = lv(&[0, 1, 2, 0]);
    let got: Vec<(usize, usize)> = irregular_pairs(&q, &g).iter().map(|p| (p.i, p.j)).collect();
    assert!(got.contains(&(0, 3)));
}

#[test]
fn components_split_at_non_adjacent_neighbors() {
    let g = EdgeGraph::from_pairs([(0, 1), (2, 3)]);
    let cs = components(&lv(&[0, 1, 2, 3]), &g);
    assert_eq!(
        cs.iter().map(|c| (c.start, c.end)).collect::<Vec<_>>(),
        vec![(0, 1), (2, 3)]
    );
    let single = components(&lv(&[6, 9]), &g);
    assert_eq!(single.len(), 2);
}

#[test]
fn induced_edges_of_a_strip_and_of_repeats() {
    assert_eq!(
        edge_set_induced(&lv(&[0, 1]), &lv(&[2, 2])).unwrap(),
        edges(&[(0, 1), (0, 2), (1, 2)])
    );
    assert!(edge_set_induced(&lv(&[0, 0]), &lv(&[0, 0])).unwrap().is_empty());
}

#[test]
fn align1_examples() {
    let g = EdgeGraph::from_pairs([(0, 1)]);
    let (a, b) = align1(&lv(&[0]), &lv(&[1]), &g).unwrap();
    assert_eq!((a.0, b.0), (lv(&[0]), lv(&[1])));

    // v1=0, v2=1; w1=2, w2=3, w3=4
    let g = EdgeGraph::from_pairs([(0, 2), (0, 3), (1, 3), (1, 4)]);
    let (a, b) = align1(&lv(&[0, 1]), &lv(&[2, 3, 4]), &g).unwrap();
    assert_eq!((a.0, b.0), (lv(&[0, 0, 1]), lv(&[2, 3, 4])));

    // A B C over G, G adjacent to all three
    let g = EdgeGraph::from_pairs([(0, 6), (1, 6), (2, 6)]);
    let (a, b) = align1(&ids("ABC"), &ids("G"), &g).unwrap();
    assert_eq!((names(&a), names(&b)), ("ABC".to_string(), "GGG".to_string()));
}

#[test]
fn align2_inserts_cycling_partners() {
    let l1 = lv(&[7, 7, 7, 7]);
    let (a, b) = align2(&l1, &Level(lv(&[7, 7])), &Level(lv(&[1, 2]))).unwrap();
    assert_eq!((a.0, b.0), (lv(&[7, 7, 7, 7]), lv(&[1, 1, 2, 2])));
    let same = Level(lv(&[3, 4]));
    let (a, b) = align2(&lv(&[3, 4]), &same, &Level(lv(&[5, 6]))).unwrap();
    assert_eq!((a, b), (same, Level(lv(&[5, 6]))));
}

#[test]
fn removable_rows() {
    let dup = VMatrix::from_rows(vec![lv(&[0, 1]), lv(&[2, 3]), lv(&[2, 3]), lv(&[4, 5])]).unwrap();
    assert!(dup.removable_row(1).unwrap());
    assert!(!dup.removable_row(0).unwrap());
    assert!(!dup.removable_row(3).unwrap());
    assert!(dup.removable_row(4).is_err());
    let two = VMatrix::from_rows(vec![lv(&[0, 1]), lv(&[2, 3])]).unwrap();
    assert!((0..2).all(|i| !two.removable_row(i).unwrap()));
}

#[test]
fn removable_row_matches_recomputation() {
    let m = VMatrix::from_rows(vec![
        lv(&[0, 1, 2]),
        lv(&[3, 1, 4]),
        lv(&[3, 5, 4]),
        lv(&[3, 5, 6]),
        lv(&[7, 7, 6]),
    ])
    .unwrap();
    for i in 1..m.r1() - 1 {
        let mut rows = m.rows().to_vec();
        rows.remove(i);
        let after = VMatrix::from_rows(rows).unwrap();
        let same = after.induced_edges() == m.induced_edges() && after.vertices() == m.vertices();
        assert_eq!(m.removable_row(i).unwrap(), same, "row {i}");
    }
    for j in 1..m.r2() - 1 {
        let rows: Vec<Vec<VertexId>> = m
            .rows()
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect())
            .collect();
        let after = VMatrix::from_rows(rows).unwrap();
        let same = after.induced_edges() == m.induced_edges() && after.vertices() == m.vertices();
        assert_eq!(m.removable_column(j).unwrap(), same, "column {j}");
    }
}

fn assert_preserving(mesh: &Mesh, v: &VMatrix) {
    assert_eq!(v.vertices(), mesh.vertex_ids().collect::<BTreeSet<_>>());
    assert_eq!(v.induced_edges(), mesh.edges());
    check_connectivity(mesh, v).unwrap();
}

#[test]
fn single_triangle_gives_a_two_by_two_matrix() {
    let mesh = Mesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        vec![[VertexId(0), VertexId(1), VertexId(2)]],
    )
    .unwrap();
    let p = tutte_parametrize(&mesh).unwrap();
    for v in [
        isomatrix_baseline(&mesh, &p).unwrap(),
        isomatrix_modified(&mesh, &p, 5).unwrap(),
    ] {
        assert_eq!((v.r1(), v.r2()), (2, 2));
        assert_preserving(&mesh, &v);
    }
}

#[test]
fn walkthrough_first_level_candidate_and_pairs() {
    let mesh = walkthrough();
    let p = tutte_parametrize_with_corners(&mesh, walkthrough_corners()).unwrap();
    let l1 = initial_level(&p).unwrap();
    assert_eq!(names(&l1), "ABCDE");
    let mut visited = vec![false; mesh.num_vertices()];
    for v in l1.iter() {
        visited[v.index()] = true;
    }
    let q = build_candidate(&mesh, &p, &l1, &visited);
    assert_eq!(names(&q), "FGFHIJK");
    let cs = components(&q, &mesh);
    assert_eq!(cs.len(), 1);
    let pairs: Vec<(usize, usize)> = irregular_pairs(&q, &mesh).iter().map(|p| (p.i + 1, p.j + 1)).collect();
    assert_eq!(pairs, vec![(1, 3), (5, 7)]);
}

#[test]
fn walkthrough_matrix_is_connectivity_preserving() {
    let mesh = walkthrough();
    let p = tutte_parametrize_with_corners(&mesh, walkthrough_corners()).unwrap();
    let base = isomatrix_baseline(&mesh, &p).unwrap();
    assert_preserving(&mesh, &base);
    let modified = isomatrix_modified(&mesh, &p, 5).unwrap();
    assert_preserving(&mesh, &modified);
    eprintln!("walkthrough: {}x{}\n{}", base.r1(), base.r2(), base);
}

#[test]
fn high_degree_hub_narrows_the_modified_matrix() {
    let mesh = high_degree();
    let p = tutte_parametrize_with_corners(&mesh, high_degree_corners()).unwrap();
    let base = isomatrix_baseline(&mesh, &p).unwrap();
    let modified = isomatrix_modified(&mesh, &p, 5).unwrap();
    assert_preserving(&mesh, &base);
    assert_preserving(&mesh, &modified);
    assert!(
        modified.r2() < base.r2(),
        "{}x{} vs {}x{}",
        modified.r1(),
        modified.r2(),
        base.r1(),
        base.r2()
    );
}

#[test]
fn low_degree_mesh_is_unaffected_by_the_threshold() {
    // every vertex of a 3x3 grid has degree at most 6, so alpha=7 never fires
    let mesh = generate(CorpusKind::Grid, 3, 0).unwrap();
    let p = tutte_parametrize(&mesh).unwrap();
    let base = isomatrix_baseline(&mesh, &p).unwrap();
    let modified = isomatrix_modified(&mesh, &p, 7).unwrap();
    assert_preserving(&mesh, &modified);
    assert!(modified.r1() * modified.r2() <= base.r1() * base.r2());
}

#[test]
fn hundred_vertex_delaunay_disk() {
    let mesh = generate(CorpusKind::DelaunayDisk, 100, 7).unwrap();
    let p = tutte_parametrize(&mesh).unwrap();
    assert_preserving(&mesh, &isomatrix_baseline(&mesh, &p).unwrap());
    assert_preserving(&mesh, &isomatrix_modified(&mesh, &p, 5).unwrap());
}

#[test]
fn levels_align_to_equal_length_rows_with_contiguous_copies() {
    let mesh = generate(CorpusKind::BumpyDisk, 150, 2).unwrap();
    let p = tutte_parametrize(&mesh).unwrap();
    let s = stratify_levels(&mesh, &p).unwrap();
    assert!(s.pairs.iter().all(|(a, b)| a.len() == b.len()));
    let v = isomatrix_baseline(&mesh, &p).unwrap();
    assert!(v.rows().iter().all(|r| r.len() == v.r2()));
    for row in v.rows() {
        let mut seen = BTreeSet::new();
        for (k, &x) in row.iter().enumerate() {
            if k > 0 && row[k - 1] == x {
                continue;
            }
            assert!(seen.insert(x), "vertex {x} split within a row");
        }
    }
}

#[test]
fn text_dump_has_one_line_per_row() {
    let mesh = high_degree();
    let p = tutte_parametrize_with_corners(&mesh, high_degree_corners()).unwrap();
    let v = isomatrix_baseline(&mesh, &p).unwrap();
    let text = v.to_text();
    assert_eq!(text.lines().count(), v.r1());
    assert!(text.lines().all(|l| l.split_whitespace().count() == v.r2()));
}
