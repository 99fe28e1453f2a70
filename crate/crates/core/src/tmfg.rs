//! Triangulated Maximally Filtered Graph construction.
//!
//! The graph is grown from a seed tetrahedron by repeatedly inserting the
//! unused vertex into the triangular face with which it has the largest
//! summed similarity. Every insertion subdivides a face of a planar
//! triangulation, so the result is maximal planar and chordal by construction.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corr::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::homology;

/// Where a graph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "tmfg")]
    Tmfg,
    #[serde(rename = "user-supplied")]
    UserSupplied,
}

/// Undirected simple graph on vertices `0..p`.
///
/// Edges are stored as sorted pairs `(i, j)` with `i < j`; adjacency lists are
/// kept sorted so neighbour queries are binary searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordalGraph {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    provenance: Provenance,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    p: usize,
    edges: Vec<[usize; 2]>,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl ChordalGraph {
    /// Builds a graph from an edge list. Self-loops and out-of-range vertices
    /// are rejected; duplicate edges collapse. Chordality is not checked here,
    /// see [`homology::mcs_order`].
    pub fn new(p: usize, edges: impl IntoIterator<Item = (usize, usize)>, provenance: Provenance) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a >= p || b >= p {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for p = {p}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adj = vec![Vec::new(); p];
        for &(a, b) in &set {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        Ok(ChordalGraph {
            p,
            edges: set,
            adj,
            provenance,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p {
            return Err(Error::Dimension(format!("{} labels for {} vertices", labels.len(), self.p)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of vertex `v`, falling back to its index.
    pub fn label(&self, v: usize) -> String {
        self.labels.as_ref().map_or_else(|| v.to_string(), |l| l[v].clone())
    }

    /// Graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        ChordalGraph::new(self.p, self.edges.iter().map(|&(a, b)| (perm[a], perm[b])), self.provenance)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GraphJson {
            p: self.p,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            provenance: self.provenance,
            labels: self.labels.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(s)?;
        let g = ChordalGraph::new(doc.p, doc.edges.iter().map(|e| (e[0], e[1])), doc.provenance)?;
        match doc.labels {
            Some(l) => g.with_labels(l),
            None => Ok(g),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph tmfg {\n");
        for v in 0..self.p {
            let _ = writeln!(out, "  {v} [label=\"{}\"];", self.label(v).replace('"', "\\\""));
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Audit record of a greedy construction: the seed tetrahedron followed by
/// every `(vertex, host face)` insertion, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmfgTrace {
    pub initial: [usize; 4],
    pub insertions: Vec<(usize, [usize; 3])>,
}

impl TmfgTrace {
    /// Rebuilds the graph by replaying the trace, checking that each host
    /// face is an active face at the time of insertion and that every vertex
    /// is used exactly once.
    pub fn replay(&self, p: usize) -> Result<ChordalGraph> {
        let mut seen = vec![false; p];
        let mut mark = |v: usize| -> Result<()> {
            if v >= p || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidGraph(format!("vertex {v} repeated or out of range in trace")));
            }
            Ok(())
        };
        let t = self.initial;
        for &v in &t {
            mark(v)?;
        }
        let mut edges = Vec::with_capacity(3 * p);
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((t[i], t[j]));
            }
        }
        let mut faces: BTreeSet<[usize; 3]> = tetra_faces(t).into_iter().collect();
        for &(v, face) in &self.insertions {
            mark(v)?;
            if !faces.remove(&face) {
                return Err(Error::InvalidGraph(format!("face {face:?} is not active when inserting {v}")));
            }
            let [a, b, c] = face;
            edges.extend([(v, a), (v, b), (v, c)]);
            faces.extend([sorted3(v, a, b), sorted3(v, a, c), sorted3(v, b, c)]);
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGraph("trace does not cover every vertex".into()));
        }
        ChordalGraph::new(p, edges, Provenance::Tmfg)
    }

    /// The p−3 tetrahedra created by the construction, in creation order.
    pub fn tetrahedra(&self) -> Vec<[usize; 4]> {
        let mut out = vec![sorted4(self.initial)];
        out.extend(self.insertions.iter().map(|&(v, [a, b, c])| sorted4([v, a, b, c])));
        out
    }
}

fn sorted3(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut f = [a, b, c];
    f.sort_unstable();
    f
}

fn sorted4(mut t: [usize; 4]) -> [usize; 4] {
    t.sort_unstable();
    t
}

fn tetra_faces(t: [usize; 4]) -> [[usize; 3]; 4] {
    [
        sorted3(t[0], t[1], t[2]),
        sorted3(t[0], t[1], t[3]),
        sorted3(t[0], t[2], t[3]),
        sorted3(t[1], t[2], t[3]),
    ]
}

// Exhaustive seed search is used up to this many vertices.
const EXACT_SEED_LIMIT: usize = 30;
// Otherwise the seed is the best 4-subset of this many top vertices by row sum.
const SEED_CANDIDATES: usize = 8;

fn tetra_weight(w: &SimilarityMatrix, t: &[usize; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            s += w.get(t[i], t[j]);
        }
    }
    s
}

/// Best 4-subset of `candidates` (sorted ascending); lexicographic tie-break.
fn best_tetrahedron(w: &SimilarityMatrix, candidates: &[usize]) -> [usize; 4] {
    let n = candidates.len();
    let mut best: Option<([usize; 4], f64)> = None;
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    let t = [candidates[a], candidates[b], candidates[c], candidates[d]];
                    let s = tetra_weight(w, &t);
                    if best.is_none_or(|(_, bs)| s > bs) {
                        best = Some((t, s));
                    }
                }
            }
        }
    }
    best.expect("at least four candidates").0
}

fn seed_tetrahedron(w: &SimilarityMatrix) -> [usize; 4] {
    let p = w.dim;
    if p <= EXACT_SEED_LIMIT {
        let all: Vec<usize> = (0..p).collect();
        return best_tetrahedron(w, &all);
    }
    let mut by_strength: Vec<(usize, f64)> = (0..p)
        .map(|i| (i, (0..p).filter(|&j| j != i).map(|j| w.get(i, j)).sum()))
        .collect();
    by_strength.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut top: Vec<usize> = by_strength[..SEED_CANDIDATES].iter().map(|&(i, _)| i).collect();
    top.sort_unstable();
    best_tetrahedron(w, &top)
}

/// Best remaining vertex for one face: highest gain, lowest index on ties.
#[derive(Debug, Clone, Copy)]
struct FaceBest {
    vertex: usize,
    gain: f64,
}

fn face_gain(w: &SimilarityMatrix, v: usize, f: &[usize; 3]) -> f64 {
    w.get(v, f[0]) + w.get(v, f[1]) + w.get(v, f[2])
}

fn best_for_face(w: &SimilarityMatrix, f: &[usize; 3], remaining: &BTreeSet<usize>) -> Option<FaceBest> {
    let mut best: Option<FaceBest> = None;
    // BTreeSet iterates in ascending order, so strict `>` keeps the lowest index.
    for &v in remaining {
        let g = face_gain(w, v, f);
        if best.is_none_or(|b| g > b.gain) {
            best = Some(FaceBest { vertex: v, gain: g });
        }
    }
    best
}

/// Builds the TMFG of a symmetric similarity matrix.
///
/// Deterministic: ties go to the lowest vertex index, then to the
/// lexicographically smallest face.
pub fn tmfg_construct(w: &SimilarityMatrix) -> Result<(ChordalGraph, TmfgTrace)> {
    let p = w.dim;
    if p < 4 {
        return Err(Error::Dimension(format!("TMFG needs at least 4 vertices, got {p}")));
    }
    w.check_symmetric()?;

    let initial = seed_tetrahedron(w);
    let mut remaining: BTreeSet<usize> = (0..p).collect();
    for v in initial {
        remaining.remove(&v);
    }

    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(2 * p);
    let mut active: Vec<bool> = Vec::with_capacity(2 * p);
    let mut cache: Vec<Option<FaceBest>> = Vec::with_capacity(2 * p);
    for f in tetra_faces(initial) {
        cache.push(best_for_face(w, &f, &remaining));
        faces.push(f);
        active.push(true);
    }

    let mut insertions = Vec::with_capacity(p - 4);
    while !remaining.is_empty() {
        let mut pick: Option<(usize, FaceBest)> = None;
        for (fi, fb) in cache.iter().enumerate() {
            let (true, Some(fb)) = (active[fi], fb) else { continue };
            let better = match pick {
                None => true,
                Some((pfi, pb)) => {
                    fb.gain > pb.gain
                        || (fb.gain == pb.gain
                            && (fb.vertex < pb.vertex || (fb.vertex == pb.vertex && faces[fi] < faces[pfi])))
                }
            };
            if better {
                pick = Some((fi, *fb));
            }
        }
        let (fi, fb) = pick.expect("an active face always exists while vertices remain");
        let v = fb.vertex;
        let host = faces[fi];
        remaining.remove(&v);
        active[fi] = false;
        insertions.push((v, host));

        // Faces whose cached best vertex was just consumed need a rescan.
        for i in 0..faces.len() {
            if active[i] && cache[i].is_some_and(|b| b.vertex == v) {
                cache[i] = best_for_face(w, &faces[i], &remaining);
            }
        }
        let [a, b, c] = host;
        for f in [sorted3(v, a, b), sorted3(v, a, c), sorted3(v, b, c)] {
            cache.push(best_for_face(w, &f, &remaining));
            faces.push(f);
            active.push(true);
        }
    }

    let trace = TmfgTrace { initial, insertions };
    let graph = trace.replay(p)?.with_labels(w.labels.clone())?;
    Ok((graph, trace))
}

/// Counts of cliques by size in a graph, up to 5-cliques.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueCensus {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub tetrahedra: usize,
    pub five_cliques: usize,
}

/// Enumerates cliques of size ≤ 5 by extending over higher-indexed common
/// neighbours. Works on any graph, chordal or not.
pub fn clique_census(g: &ChordalGraph) -> CliqueCensus {
    let mut census = CliqueCensus {
        vertices: g.p(),
        edges: g.edge_count(),
        triangles: 0,
        tetrahedra: 0,
        five_cliques: 0,
    };
    fn extend(g: &ChordalGraph, clique: &mut Vec<usize>, cands: &[usize], census: &mut CliqueCensus) {
        for (i, &v) in cands.iter().enumerate() {
            clique.push(v);
            match clique.len() {
                3 => census.triangles += 1,
                4 => census.tetrahedra += 1,
                5 => census.five_cliques += 1,
                _ => {}
            }
            if clique.len() < 5 {
                let next: Vec<usize> = cands[i + 1..].iter().copied().filter(|&u| g.has_edge(v, u)).collect();
                extend(g, clique, &next, census);
            }
            clique.pop();
        }
    }
    let mut clique = Vec::with_capacity(5);
    for &(a, b) in g.edges() {
        clique.extend([a, b]);
        let cands: Vec<usize> = g.neighbors(a).iter().copied().filter(|&u| u > b && g.has_edge(b, u)).collect();
        extend(g, &mut clique, &cands, &mut census);
        clique.clear();
    }
    census
}

/// Structural checks of a candidate TMFG. Never errors; failures are fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub p: usize,
    pub edge_count: usize,
    pub expected_edges: Option<usize>,
    pub edge_count_ok: bool,
    pub chordal: bool,
    pub census: CliqueCensus,
    pub triangles_ok: bool,
    pub tetrahedra_ok: bool,
    pub max_clique_le_4: bool,
    pub is_tmfg: bool,
}

pub fn verify_tmfg(g: &ChordalGraph) -> ValidationReport {
    let p = g.p();
    let expected = (p >= 4).then(|| 3 * p - 6);
    let edge_count_ok = expected == Some(g.edge_count());
    let chordal = homology::mcs_order(g).is_chordal;
    let census = clique_census(g);
    let triangles_ok = p >= 4 && census.triangles == 3 * p - 8;
    let tetrahedra_ok = p >= 4 && census.tetrahedra == p - 3;
    let max_clique_le_4 = census.five_cliques == 0;
    ValidationReport {
        p,
        edge_count: g.edge_count(),
        expected_edges: expected,
        edge_count_ok,
        chordal,
        census,
        triangles_ok,
        tetrahedra_ok,
        max_clique_le_4,
        is_tmfg: edge_count_ok && chordal && triangles_ok && tetrahedra_ok && max_clique_le_4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(p: usize) -> SimilarityMatrix {
        SimilarityMatrix::from_values(vec![vec![1.0; p]; p]).unwrap()
    }

    #[test]
    fn four_vertices_give_k4() {
        let (g, trace) = tmfg_construct(&uniform(4)).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(trace.insertions.is_empty());
        let c = clique_census(&g);
        assert_eq!((c.triangles, c.tetrahedra), (4, 1));
    }

    #[test]
    fn five_equal_weights_use_index_tie_break() {
        let (g, trace) = tmfg_construct(&uniform(5)).unwrap();
        assert_eq!(trace.initial, [0, 1, 2, 3]);
        assert_eq!(trace.insertions, vec![(4, [0, 1, 2])]);
        assert_eq!(g.edge_count(), 9);
        let c = clique_census(&g);
        assert_eq!((c.triangles, c.tetrahedra), (7, 2));
    }

    #[test]
    fn rejects_small_and_asymmetric_input() {
        assert!(matches!(tmfg_construct(&uniform(3)), Err(Error::Dimension(_))));
        let mut v = vec![vec![1.0; 5]; 5];
        v[1][3] = 0.2;
        let w = SimilarityMatrix::from_values(v).unwrap();
        assert!(matches!(tmfg_construct(&w), Err(Error::NotSymmetric(1, 3))));
    }

    #[test]
    fn seed_prefers_heaviest_tetrahedron() {
        let mut v = vec![vec![0.1; 6]; 6];
        for &(a, b) in &[(1, 2), (1, 4), (1, 5), (2, 4), (2, 5), (4, 5)] {
            v[a][b] = 0.9;
            v[b][a] = 0.9;
        }
        let w = SimilarityMatrix::from_values(v).unwrap();
        let (_, trace) = tmfg_construct(&w).unwrap();
        assert_eq!(trace.initial, [1, 2, 4, 5]);
    }

    #[test]
    fn replay_rejects_inactive_face() {
        let t = TmfgTrace {
            initial: [0, 1, 2, 3],
            insertions: vec![(4, [0, 1, 2]), (5, [0, 1, 2])],
        };
        assert!(t.replay(6).is_err());
        let missing = TmfgTrace {
            initial: [0, 1, 2, 3],
            insertions: vec![],
        };
        assert!(missing.replay(5).is_err());
    }

    #[test]
    fn c4_is_not_chordal() {
        let g = ChordalGraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)], Provenance::UserSupplied).unwrap();
        let r = verify_tmfg(&g);
        assert!(!r.chordal);
        assert!(!r.is_tmfg);
    }

    #[test]
    fn graph_json_round_trip_and_validation() {
        let (g, _) = tmfg_construct(&uniform(6)).unwrap();
        let back = ChordalGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
        let v: serde_json::Value = serde_json::from_str(&g.to_json().unwrap()).unwrap();
        assert_eq!(v["provenance"], "tmfg");
        assert_eq!(v["edges"].as_array().unwrap().len(), 12);
        assert!(ChordalGraph::from_json(r#"{"p":3,"edges":[[0,0]],"provenance":"user-supplied"}"#).is_err());
        assert!(ChordalGraph::from_json(r#"{"p":3,"edges":[[0,5]],"provenance":"user-supplied"}"#).is_err());
    }

    #[test]
    fn dot_lists_every_edge() {
        let (g, _) = tmfg_construct(&uniform(5)).unwrap();
        let dot = g.to_dot();
        assert_eq!(dot.matches(" -- ").count(), 9);
        assert!(dot.starts_with("graph"));
    }
}
