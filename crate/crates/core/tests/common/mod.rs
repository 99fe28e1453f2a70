#![allow(dead_code)]

use std::collections::BTreeSet;

use hnn_core::corr::SimilarityMatrix;
use hnn_core::hnn::HnnModel;
use hnn_core::tmfg::{ChordalGraph, Provenance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with i.i.d. uniform off-diagonal entries in (0, 1).
pub fn random_similarity(p: usize, rng: &mut impl Rng) -> SimilarityMatrix {
    let mut v = vec![vec![1.0; p]; p];
    for i in 0..p {
        for j in (i + 1)..p {
            let w: f64 = rng.random();
            v[i][j] = w;
            v[j][i] = w;
        }
    }
    SimilarityMatrix::from_values(v).unwrap()
}

/// Every clique of `g` with 1..=max_size vertices, grown vertex by vertex
/// from adjacency sets only.
pub fn brute_force_cliques(g: &ChordalGraph, max_size: usize) -> Vec<BTreeSet<Vec<usize>>> {
    let p = g.p();
    let mut by_size: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); max_size + 1];
    for v in 0..p {
        by_size[1].insert(vec![v]);
    }
    for k in 2..=max_size {
        let prev: Vec<Vec<usize>> = by_size[k - 1].iter().cloned().collect();
        for c in prev {
            let last = *c.last().unwrap();
            for v in (last + 1)..p {
                if c.iter().all(|&u| g.has_edge(u, v)) {
                    let mut n = c.clone();
                    n.push(v);
                    by_size[k].insert(n);
                }
            }
        }
    }
    by_size
}

/// Maximal cliques by brute force: cliques not contained in a larger clique.
pub fn brute_force_maximal(g: &ChordalGraph) -> BTreeSet<Vec<usize>> {
    let all = brute_force_cliques(g, g.p());
    let mut out = BTreeSet::new();
    for (k, layer) in all.iter().enumerate().skip(1) {
        for c in layer {
            let extendable = (0..g.p()).any(|v| !c.contains(&v) && c.iter().all(|&u| g.has_edge(u, v)));
            if !extendable {
                out.insert(c.clone());
            }
            let _ = k;
        }
    }
    out
}

/// The example graph of the method's illustration, vertices labelled 1..7
/// stored at index label−1: a tetrahedron {2,3,4,6}, triangles {4,5,6} and
/// {4,6,7}, and the edge {1,4}.
pub fn seven_vertex_graph() -> ChordalGraph {
    let labelled = [(2, 3), (2, 4), (2, 6), (3, 4), (3, 6), (4, 6), (4, 5), (5, 6), (4, 7), (6, 7), (1, 4)];
    let g = ChordalGraph::new(7, labelled.iter().map(|&(a, b)| (a - 1, b - 1)), Provenance::UserSupplied).unwrap();
    g.with_labels((1..=7).map(|v| v.to_string()).collect()).unwrap()
}

/// Forward pass through full dense weight matrices that hold the model's
/// link weights and zeros elsewhere. Sums run bias first, then inputs in
/// ascending order, then the readout over all neurons in global order.
pub fn dense_masked_forward(m: &HnnModel, x: &[f64]) -> Vec<f64> {
    let t = m.topology();
    let sizes = t.layer_sizes();
    let params = m.params();
    let act_fn = m.activation();
    let mut acts: Vec<f64> = x.to_vec();
    let mut prev: Vec<f64> = x.to_vec();
    for l in 1..sizes.len() {
        let mut w = vec![vec![0.0; sizes[l - 1]]; sizes[l]];
        for (i, row) in w.iter_mut().enumerate() {
            for (k, &j) in t.inputs(l, i).iter().enumerate() {
                row[j] = params[m.link_index(l, i, k)];
            }
        }
        let cur: Vec<f64> = (0..sizes[l])
            .map(|i| {
                let mut z = params[m.bias_index(l, i)];
                for j in 0..sizes[l - 1] {
                    z += w[i][j] * prev[j];
                }
                act_fn.apply(z)
            })
            .collect();
        acts.extend_from_slice(&cur);
        prev = cur;
    }
    (0..m.output_dim())
        .map(|o| {
            let mut s = params[m.readout_bias_index(o)];
            for (n, a) in acts.iter().enumerate() {
                let w = m.readout_index(o, n).map_or(0.0, |i| params[i]);
                s += w * a;
            }
            s
        })
        .collect()
}

pub fn random_inputs(n: usize, p: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
}

/// Two-sided tail of Student's t by Simpson integration of the density under
/// x = tan θ, normalized by the integral over the half line.
pub fn t_tail_oracle(t: f64, df: f64) -> f64 {
    let f = |theta: f64| {
        let x = theta.tan();
        let c = theta.cos();
        (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (c * c)
    };
    let simpson = |a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b - 1e-15);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let half = std::f64::consts::FRAC_PI_2;
    simpson(t.abs().atan(), half, 400_000) / simpson(0.0, half, 400_000)
}
