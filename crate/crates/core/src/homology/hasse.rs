use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{maximal_cliques, Simplex};
use crate::error::{Error, Result};
use crate::tmfg::{ChordalGraph, Provenance};

/// Upper bound on the default simplex dimension for general chordal input.
pub const DEFAULT_DIM_CAP: usize = 6;

/// Simplexes grouped by dimension: `layers[d]` holds the sorted (d+1)-vertex
/// tuples in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexLayers {
    pub layers: Vec<Vec<Simplex>>,
}

impl SimplexLayers {
    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }
}

/// Largest maximal-clique dimension of `g`, capped at `cap`.
pub fn default_max_dim(g: &ChordalGraph, cap: usize) -> Result<usize> {
    let top = maximal_cliques(g)?.iter().map(Vec::len).max().unwrap_or(1);
    let d = top.saturating_sub(1).max(1);
    if d > cap {
        log::warn!("largest clique has dimension {d}; truncating simplex layers at {cap}");
    }
    Ok(d.min(cap))
}

fn push_subsets(clique: &[usize], max_len: usize, out: &mut [BTreeSet<Simplex>]) {
    // Subsets enumerated by bitmask; cliques are capped well below 64 vertices
    // in practice, and dimensions above `max_len` are skipped.
    let n = clique.len();
    assert!(n < 64, "clique of size {n} is too large to expand");
    for mask in 1u64..(1u64 << n) {
        let k = mask.count_ones() as usize;
        if k > max_len {
            continue;
        }
        let s: Simplex = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| clique[i]).collect();
        out[k - 1].insert(s);
    }
}

/// Every clique of `g` with at most `max_dim + 1` vertices, exactly once.
///
/// Subsets of the maximal cliques are expanded (in parallel per clique) and
/// merged into ordered sets, so the output order does not depend on
/// scheduling. Trailing empty layers are dropped.
pub fn enumerate_simplexes(g: &ChordalGraph, max_dim: usize) -> Result<SimplexLayers> {
    if max_dim < 1 {
        return Err(Error::Config("max_dim must be at least 1".into()));
    }
    let cliques = maximal_cliques(g)?;
    let max_len = max_dim + 1;
    let merged = cliques
        .par_iter()
        .fold(
            || vec![BTreeSet::new(); max_len],
            |mut acc, c| {
                push_subsets(c, max_len, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![BTreeSet::new(); max_len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.extend(y);
                }
                a
            },
        );
    let mut layers: Vec<Vec<Simplex>> = merged.into_iter().map(|s| s.into_iter().collect()).collect();
    while layers.len() > 1 && layers.last().is_some_and(Vec::is_empty) {
        layers.pop();
    }
    Ok(SimplexLayers { layers })
}

/// Layered face lattice. Node `i` of layer `d` is the d-simplex
/// `layers[d][i]`; its `down_links` index its facets in layer `d − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HasseDiagram {
    layers: Vec<Vec<Simplex>>,
    down_links: Vec<Vec<Vec<usize>>>,
    up_links: Vec<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct HasseJson {
    layers: Vec<Vec<Simplex>>,
    down_links: Vec<Vec<Vec<usize>>>,
}

/// Links every simplex to its facets in the layer below.
pub fn build_hasse(simplexes: &SimplexLayers) -> Result<HasseDiagram> {
    let layers = simplexes.layers.clone();
    if layers.first().is_none_or(Vec::is_empty) {
        return Err(Error::Empty("diagram has no vertices".into()));
    }
    for (d, layer) in layers.iter().enumerate() {
        for s in layer {
            if s.len() != d + 1 || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGraph(format!("{s:?} is not a sorted {d}-simplex")));
            }
        }
        if layer.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGraph(format!("layer {d} is not sorted and unique")));
        }
    }
    let mut down_links = vec![vec![Vec::new(); layers[0].len()]];
    let mut up_links: Vec<Vec<Vec<usize>>> = layers.iter().map(|l| vec![Vec::new(); l.len()]).collect();
    for d in 1..layers.len() {
        let index: HashMap<&[usize], usize> = layers[d - 1].iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut layer_links = Vec::with_capacity(layers[d].len());
        for (i, s) in layers[d].iter().enumerate() {
            let mut facets = Vec::with_capacity(s.len());
            for skip in 0..s.len() {
                let facet: Simplex = s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                let &fi = index.get(facet.as_slice()).ok_or_else(|| Error::MissingFacet(facet.clone()))?;
                facets.push(fi);
                up_links[d - 1][fi].push(i);
            }
            facets.sort_unstable();
            layer_links.push(facets);
        }
        down_links.push(layer_links);
    }
    Ok(HasseDiagram {
        layers,
        down_links,
        up_links,
    })
}

impl HasseDiagram {
    /// Enumerates simplexes of a chordal graph up to the default dimension and
    /// links them.
    pub fn from_graph(g: &ChordalGraph) -> Result<Self> {
        let d = default_max_dim(g, DEFAULT_DIM_CAP)?;
        build_hasse(&enumerate_simplexes(g, d)?)
    }

    pub fn layers(&self) -> &[Vec<Simplex>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of layer-0 nodes, i.e. vertices.
    pub fn p(&self) -> usize {
        self.layers[0].len()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn total_nodes(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Facet indices of node `i` in layer `d` (empty for `d == 0`).
    pub fn down(&self, d: usize, i: usize) -> &[usize] {
        &self.down_links[d][i]
    }

    /// Coface indices of node `i` of layer `d` in layer `d + 1`.
    pub fn up(&self, d: usize, i: usize) -> &[usize] {
        &self.up_links[d][i]
    }

    pub fn total_links(&self) -> usize {
        self.down_links.iter().flatten().map(Vec::len).sum()
    }

    /// Simplexes with no coface: the maximal cliques of the underlying graph.
    pub fn maximal_simplexes(&self) -> Vec<Simplex> {
        let mut out: Vec<Simplex> = self
            .up_links
            .iter()
            .enumerate()
            .flat_map(|(d, l)| l.iter().enumerate().filter(|(_, u)| u.is_empty()).map(move |(i, _)| (d, i)))
            .map(|(d, i)| self.layers[d][i].clone())
            .collect();
        out.sort();
        out
    }

    /// Graph recovered from layers 0 and 1.
    pub fn reconstruct_graph(&self) -> Result<ChordalGraph> {
        let p = self.layers[0].iter().map(|s| s[0] + 1).max().unwrap_or(0);
        let edges = self.layers.get(1).into_iter().flatten().map(|e| (e[0], e[1]));
        ChordalGraph::new(p, edges, Provenance::UserSupplied)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&HasseJson {
            layers: self.layers.clone(),
            down_links: self.down_links.clone(),
        })?)
    }

    /// Parses the JSON export, rebuilding links from the layers and checking
    /// they agree with the stored `down_links`.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: HasseJson = serde_json::from_str(s)?;
        let h = build_hasse(&SimplexLayers { layers: doc.layers })?;
        if h.down_links != doc.down_links {
            return Err(Error::InvalidGraph("stored down_links disagree with layers".into()));
        }
        Ok(h)
    }

    /// SHA-256 of the canonical JSON export.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = self.to_json().expect("diagram serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Layered DOT rendering, one rank per dimension, links drawn upward.
    pub fn to_dot(&self, labels: Option<&[String]>) -> String {
        let name = |s: &Simplex| -> String {
            s.iter()
                .map(|&v| labels.map_or_else(|| v.to_string(), |l| l[v].clone()))
                .collect::<Vec<_>>()
                .join("-")
        };
        let mut out = String::from("digraph hasse {\n  rankdir=LR;\n  node [shape=circle];\n");
        for (d, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "  subgraph layer_{d} {{\n    rank=same;");
            for (i, s) in layer.iter().enumerate() {
                let _ = writeln!(out, "    \"L{d}_{i}\" [label=\"{}\"];", name(s).replace('"', "\\\""));
            }
            out.push_str("  }\n");
        }
        for d in 1..self.layers.len() {
            for (i, facets) in self.down_links[d].iter().enumerate() {
                for f in facets {
                    let _ = writeln!(out, "  \"L{}_{f}\" -> \"L{d}_{i}\";", d - 1);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> ChordalGraph {
        ChordalGraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], Provenance::UserSupplied).unwrap()
    }

    #[test]
    fn k4_layers_are_binomial() {
        let s = enumerate_simplexes(&k4(), 3).unwrap();
        assert_eq!(s.sizes(), vec![4, 6, 4, 1]);
        assert_eq!(s.layers[1][0], vec![0, 1]);
        assert_eq!(s.layers[3][0], vec![0, 1, 2, 3]);
    }

    #[test]
    fn max_dim_truncates_and_trailing_empty_layers_drop() {
        assert_eq!(enumerate_simplexes(&k4(), 1).unwrap().sizes(), vec![4, 6]);
        assert_eq!(enumerate_simplexes(&k4(), 5).unwrap().sizes(), vec![4, 6, 4, 1]);
        assert!(enumerate_simplexes(&k4(), 0).is_err());
    }

    #[test]
    fn k4_hasse_links() {
        let h = build_hasse(&enumerate_simplexes(&k4(), 3).unwrap()).unwrap();
        assert_eq!(h.down(3, 0), &[0, 1, 2, 3]);
        for i in 0..4 {
            assert_eq!(h.down(2, i).len(), 3);
        }
        assert_eq!(h.maximal_simplexes(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(h.total_links(), 6 * 2 + 4 * 3 + 4);
    }

    #[test]
    fn missing_facet_is_reported() {
        let layers = SimplexLayers {
            layers: vec![vec![vec![0], vec![1], vec![2]], vec![vec![0, 1], vec![0, 2]], vec![vec![0, 1, 2]]],
        };
        assert!(matches!(build_hasse(&layers), Err(Error::MissingFacet(f)) if f == vec![1, 2]));
    }

    #[test]
    fn unsorted_input_is_rejected() {
        let layers = SimplexLayers {
            layers: vec![vec![vec![1], vec![0]]],
        };
        assert!(build_hasse(&layers).is_err());
    }

    #[test]
    fn json_round_trip_and_hash() {
        let h = HasseDiagram::from_graph(&k4()).unwrap();
        let json = h.to_json().unwrap();
        let back = HasseDiagram::from_json(&json).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.content_hash(), h.content_hash());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v.get("layers").is_some() && v.get("down_links").is_some());
    }

    #[test]
    fn dot_draws_every_link() {
        let h = HasseDiagram::from_graph(&k4()).unwrap();
        assert_eq!(h.to_dot(None).matches(" -> ").count(), 28);
    }
}
