//! Homological structure of chordal graphs: elimination orders, maximal
//! cliques, clique trees with separator multiplicities, simplex enumeration
//! and the layered Hasse diagram.

mod clique_tree;
mod hasse;

pub use clique_tree::{clique_tree, CliqueTree, Separator};
pub use hasse::{build_hasse, default_max_dim, enumerate_simplexes, HasseDiagram, SimplexLayers, DEFAULT_DIM_CAP};

use crate::error::{Error, Result};
use crate::tmfg::ChordalGraph;

/// A simplex is a sorted vertex tuple; `len() - 1` is its dimension.
pub type Simplex = Vec<usize>;

/// Result of a maximum-cardinality search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsResult {
    /// Vertices in the order MCS numbered them.
    pub visit_order: Vec<usize>,
    /// Reverse of the visit order; a perfect elimination ordering iff
    /// `is_chordal`.
    pub elimination: Vec<usize>,
    pub is_chordal: bool,
}

/// Maximum-cardinality search with lowest-index tie-break, followed by a
/// perfect-elimination check of the reversed order.
pub fn mcs_order(g: &ChordalGraph) -> McsResult {
    let p = g.p();
    let mut numbered = vec![false; p];
    let mut weight = vec![0usize; p];
    let mut visit_order = Vec::with_capacity(p);
    for _ in 0..p {
        let v = (0..p)
            .filter(|&v| !numbered[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unnumbered vertex remains");
        numbered[v] = true;
        visit_order.push(v);
        for &u in g.neighbors(v) {
            if !numbered[u] {
                weight[u] += 1;
            }
        }
    }
    let elimination: Vec<usize> = visit_order.iter().rev().copied().collect();
    let is_chordal = is_perfect_elimination(g, &elimination);
    McsResult {
        visit_order,
        elimination,
        is_chordal,
    }
}

fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// Whether every vertex's later neighbours in `order` form a clique.
///
/// Uses the parent test: with `u` the earliest later neighbour of `v`, all
/// other later neighbours of `v` must be adjacent to `u`.
pub fn is_perfect_elimination(g: &ChordalGraph, order: &[usize]) -> bool {
    if order.len() != g.p() {
        return false;
    }
    let pos = positions(order);
    for &v in order {
        let later: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        let Some(&parent) = later.iter().min_by_key(|&&u| pos[u]) else { continue };
        if later.iter().any(|&u| u != parent && !g.has_edge(parent, u)) {
            return false;
        }
    }
    true
}

/// Maximal cliques of a chordal graph, each sorted, listed lexicographically.
pub fn maximal_cliques(g: &ChordalGraph) -> Result<Vec<Simplex>> {
    let mcs = mcs_order(g);
    if !mcs.is_chordal {
        return Err(Error::NotChordal);
    }
    let pos = positions(&mcs.elimination);
    // Every maximal clique is {v} ∪ later(v) for some v.
    let mut candidates: Vec<Simplex> = mcs
        .elimination
        .iter()
        .map(|&v| {
            let mut c: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| pos[u] > pos[v]).collect();
            c.push(v);
            c.sort_unstable();
            c
        })
        .collect();
    candidates.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    candidates.dedup();
    let mut maximal: Vec<Simplex> = Vec::new();
    for c in candidates {
        if !maximal.iter().any(|m| is_subset(&c, m)) {
            maximal.push(c);
        }
    }
    maximal.sort();
    Ok(maximal)
}

/// Subset test on sorted slices.
pub(crate) fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

pub(crate) fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmfg::Provenance;

    fn graph(p: usize, edges: &[(usize, usize)]) -> ChordalGraph {
        ChordalGraph::new(p, edges.iter().copied(), Provenance::UserSupplied).unwrap()
    }

    fn k4() -> ChordalGraph {
        graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    #[test]
    fn complete_graph_is_chordal() {
        let r = mcs_order(&k4());
        assert!(r.is_chordal);
        assert_eq!(r.visit_order.len(), 4);
        assert_eq!(maximal_cliques(&k4()).unwrap(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn four_cycle_is_not_chordal() {
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(!mcs_order(&c4).is_chordal);
        assert!(matches!(maximal_cliques(&c4), Err(Error::NotChordal)));
    }

    #[test]
    fn chorded_cycle_is_chordal() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        assert!(mcs_order(&g).is_chordal);
        assert_eq!(maximal_cliques(&g).unwrap(), vec![vec![0, 1, 2], vec![0, 2, 3]]);
    }

    #[test]
    fn isolated_vertices_are_cliques() {
        let g = graph(3, &[(0, 1)]);
        assert_eq!(maximal_cliques(&g).unwrap(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn peo_check_rejects_bad_order() {
        // Path a-b-c: eliminating the middle first leaves non-adjacent later neighbours.
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert!(!is_perfect_elimination(&g, &[1, 0, 2]));
        assert!(is_perfect_elimination(&g, &[0, 1, 2]));
    }

    #[test]
    fn set_helpers() {
        assert!(is_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_subset(&[1, 4], &[0, 1, 2, 3]));
        assert_eq!(intersect(&[0, 2, 4, 6], &[1, 2, 3, 6]), vec![2, 6]);
    }
}
