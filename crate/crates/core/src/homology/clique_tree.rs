use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{intersect, maximal_cliques, Simplex};
use crate::error::{Error, Result};
use crate::tmfg::ChordalGraph;

/// A separator vertex set and the number of clique-tree edges carrying it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separator {
    pub vertices: Simplex,
    pub multiplicity: usize,
}

/// Junction tree over the maximal cliques of a chordal graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueTree {
    pub cliques: Vec<Simplex>,
    /// Pairs of clique indices, `i < j`.
    pub tree_edges: Vec<(usize, usize)>,
    /// Separator of each tree edge, parallel to `tree_edges`.
    pub edge_separators: Vec<Simplex>,
    /// Distinct separators with multiplicity, sorted by vertex set.
    pub separators: Vec<Separator>,
    /// False when the graph is disconnected and the result is a forest.
    pub connected: bool,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            x = std::mem::replace(&mut self.parent[x], r);
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Maximum-weight spanning tree of the clique intersection graph, weight
/// = |Ci ∩ Cj|, with ties resolved by lexicographic clique-pair order.
///
/// `cliques` must be the maximal cliques of `g` (as produced by
/// [`maximal_cliques`]). A disconnected graph yields a forest with
/// `connected == false`.
pub fn clique_tree(cliques: &[Simplex], g: &ChordalGraph) -> Result<CliqueTree> {
    let expected = maximal_cliques(g)?;
    let mut given = cliques.to_vec();
    given.sort();
    if given != expected {
        return Err(Error::InvalidGraph("cliques are not the maximal cliques of the graph".into()));
    }
    let cliques = given;
    let n = cliques.len();

    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = intersect(&cliques[i], &cliques[j]).len();
            if w > 0 {
                candidates.push((w, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut dsu = DisjointSet::new(n);
    let mut tree_edges = Vec::with_capacity(n.saturating_sub(1));
    let mut edge_separators = Vec::with_capacity(n.saturating_sub(1));
    let mut counts: BTreeMap<Simplex, usize> = BTreeMap::new();
    for (_, i, j) in candidates {
        if dsu.union(i, j) {
            let sep = intersect(&cliques[i], &cliques[j]);
            *counts.entry(sep.clone()).or_default() += 1;
            tree_edges.push((i, j));
            edge_separators.push(sep);
        }
    }
    let connected = n == 0 || tree_edges.len() == n - 1;
    if !connected {
        log::warn!("graph is disconnected; clique tree is a forest with {} edges over {n} cliques", tree_edges.len());
    }
    Ok(CliqueTree {
        cliques,
        tree_edges,
        edge_separators,
        separators: counts
            .into_iter()
            .map(|(vertices, multiplicity)| Separator { vertices, multiplicity })
            .collect(),
        connected,
    })
}

impl CliqueTree {
    fn components_without(&self, skip: impl Fn(usize) -> bool) -> usize {
        let mut dsu = DisjointSet::new(self.cliques.len());
        let mut comps = self.cliques.len();
        for (k, &(i, j)) in self.tree_edges.iter().enumerate() {
            if !skip(k) && dsu.union(i, j) {
                comps -= 1;
            }
        }
        comps
    }

    /// Number of connected pieces of the tree once every edge carrying
    /// `separator` is cut.
    pub fn components_after_removing(&self, separator: &[usize]) -> usize {
        self.components_without(|k| self.edge_separators[k] == separator)
    }

    /// True when the tree is acyclic over its cliques and, for every vertex,
    /// the cliques containing it induce a connected subtree.
    pub fn satisfies_running_intersection(&self) -> bool {
        let n = self.cliques.len();
        if self.connected && self.tree_edges.len() + 1 != n {
            return false;
        }
        let vertices: std::collections::BTreeSet<usize> = self.cliques.iter().flatten().copied().collect();
        for v in vertices {
            let members: Vec<usize> = (0..n).filter(|&c| self.cliques[c].contains(&v)).collect();
            let mut dsu = DisjointSet::new(n);
            for &(i, j) in &self.tree_edges {
                if self.cliques[i].contains(&v) && self.cliques[j].contains(&v) {
                    dsu.union(i, j);
                }
            }
            let root = dsu.find(members[0]);
            if members.iter().any(|&m| dsu.find(m) != root) {
                return false;
            }
        }
        self.edge_separators
            .iter()
            .zip(&self.tree_edges)
            .all(|(s, &(i, j))| *s == intersect(&self.cliques[i], &self.cliques[j]))
    }
}
