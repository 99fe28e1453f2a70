//! Seeded synthetic datasets with known dependency structure.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corr::{mean_std, Column, Dataset};
use crate::error::{Error, Result};
use crate::timeseries::MultivariateSeries;
use crate::tmfg::{ChordalGraph, TmfgTrace};

/// Tabular data whose features and target follow a planted TMFG.
#[derive(Debug, Clone)]
pub struct PlantedTabular {
    pub dataset: Dataset,
    pub graph: ChordalGraph,
    pub trace: TmfgTrace,
}

/// Random TMFG construction: shuffled vertices, each inserted into a
/// uniformly chosen active face.
pub fn random_tmfg_trace(p: usize, rng: &mut impl Rng) -> Result<TmfgTrace> {
    if p < 4 {
        return Err(Error::Dimension(format!("a TMFG needs at least 4 vertices, got {p}")));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let initial = [order[0], order[1], order[2], order[3]];
    let sorted = |mut f: [usize; 3]| {
        f.sort_unstable();
        f
    };
    let [a, b, c, d] = initial;
    let mut faces = vec![sorted([a, b, c]), sorted([a, b, d]), sorted([a, c, d]), sorted([b, c, d])];
    let mut insertions = Vec::with_capacity(p - 4);
    for &v in &order[4..] {
        let host = faces.swap_remove(rng.random_range(0..faces.len()));
        let [x, y, z] = host;
        faces.extend([sorted([v, x, y]), sorted([v, x, z]), sorted([v, y, z])]);
        insertions.push((v, host));
    }
    Ok(TmfgTrace { initial, insertions })
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn standardize(v: &mut [f64]) {
    let (m, s) = mean_std(v);
    v.iter_mut().for_each(|x| *x = (*x - m) / s);
}

/// Features generated along a random TMFG trace and a target that sums one
/// nonlinear term per tetrahedron.
///
/// Seed vertices share a latent factor; every inserted vertex mixes its host
/// face with fresh noise, so strong correlations follow the planted edges.
/// Every edge, triangle and tetrahedron `C` contributes `cos(u_C·x_C) / |C|`
/// with Gaussian weights `u_C`. Gaussian noise with standard deviation `noise * std(signal)`
/// is added to the target.
pub fn planted_tmfg_data(p: usize, n: usize, noise: f64, seed: u64) -> Result<PlantedTabular> {
    if n < 3 {
        return Err(Error::Dimension(format!("need at least 3 rows, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace = random_tmfg_trace(p, &mut rng)?;
    let graph = trace.replay(p)?;

    let mut x = vec![Vec::new(); p];
    let factor: Vec<f64> = (0..n).map(|_| gauss(&mut rng)).collect();
    for &v in &trace.initial {
        x[v] = factor.iter().map(|f| 0.7 * f + 0.714 * gauss(&mut rng)).collect();
        standardize(&mut x[v]);
    }
    for &(v, [a, b, c]) in &trace.insertions {
        let col: Vec<f64> = (0..n).map(|i| 0.4 * (x[a][i] + x[b][i] + x[c][i]) + gauss(&mut rng)).collect();
        x[v] = col;
        standardize(&mut x[v]);
    }

    // one term per clique of the planted graph: edges, triangles, tetrahedra
    let census = clique_list(&graph, &trace);
    let mut signal = vec![0.0; n];
    for c in &census {
        let u: Vec<f64> = c.iter().map(|_| gauss(&mut rng)).collect();
        let amp = 1.0 / c.len() as f64;
        for (r, s) in signal.iter_mut().enumerate() {
            let z: f64 = c.iter().zip(&u).map(|(&v, w)| w * x[v][r]).sum();
            *s += amp * z.cos();
        }
    }
    let (_, sd) = mean_std(&signal);
    let y: Vec<f64> = signal.iter().map(|s| s + noise * sd * gauss(&mut rng)).collect();

    let columns = x.into_iter().enumerate().map(|(k, v)| Column::new(format!("x{}", k + 1), v)).collect();
    let dataset = Dataset::new(columns, Some(Column::new("y", y)))?;
    Ok(PlantedTabular { dataset, graph, trace })
}

fn clique_list(g: &ChordalGraph, trace: &TmfgTrace) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = g.edges().iter().map(|&(a, b)| vec![a, b]).collect();
    let mut triangles = std::collections::BTreeSet::new();
    for t in trace.tetrahedra() {
        for skip in 0..4 {
            let f: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| t[k]).collect();
            triangles.insert(f);
        }
    }
    out.extend(triangles);
    out.extend(trace.tetrahedra().iter().map(|t| t.to_vec()));
    out
}

/// Seasonal series coupled through a sparse random lag-1 interaction matrix:
/// `x_s(t) = a·x_s(t−1) + Σ_k B_sk·x_k(t−1) + A_s·sin(2πt/period + φ_s) + ε`.
pub fn seasonal_var_series(n_series: usize, len: usize, period: usize, seed: u64) -> Result<MultivariateSeries> {
    if n_series == 0 || len < 2 || period == 0 {
        return Err(Error::Dimension("need at least one series, two steps and a positive period".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coupling: Vec<Vec<f64>> = (0..n_series)
        .map(|s| {
            (0..n_series)
                .map(|k| if k != s && rng.random_bool(0.3) { rng.random_range(-0.25..0.25) } else { 0.0 })
                .collect()
        })
        .collect();
    let amp: Vec<f64> = (0..n_series).map(|_| rng.random_range(0.5..2.0)).collect();
    let phase: Vec<f64> = (0..n_series).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();

    let mut values = vec![vec![0.0; len]; n_series];
    for t in 1..len {
        let season = std::f64::consts::TAU * t as f64 / period as f64;
        for s in 0..n_series {
            let mut v = 0.5 * values[s][t - 1] + amp[s] * (season + phase[s]).sin() + 0.3 * gauss(&mut rng);
            for k in 0..n_series {
                v += coupling[s][k] * values[k][t - 1];
            }
            values[s][t] = v;
        }
    }
    MultivariateSeries::new((0..n_series).map(|s| format!("s{s}")).collect(), values, "step")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmfg::verify_tmfg;

    #[test]
    fn planted_graph_is_a_tmfg() {
        let d = planted_tmfg_data(12, 200, 0.1, 3).unwrap();
        assert!(verify_tmfg(&d.graph).is_tmfg);
        assert_eq!(d.dataset.n_features(), 12);
        assert_eq!(d.dataset.n_rows(), 200);
    }

    #[test]
    fn generators_are_seeded() {
        let a = planted_tmfg_data(8, 50, 0.1, 9).unwrap();
        let b = planted_tmfg_data(8, 50, 0.1, 9).unwrap();
        assert_eq!(a.dataset.content_hash(), b.dataset.content_hash());
        let s = seasonal_var_series(3, 100, 24, 1).unwrap();
        assert_eq!(s.content_hash(), seasonal_var_series(3, 100, 24, 1).unwrap().content_hash());
        assert!(s.series(0).iter().all(|v| v.is_finite()));
    }
}
