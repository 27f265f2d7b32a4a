//! Brute-force reference implementations shared by the integration tests.
//! None of them call into the library code they are used to check.

#![allow(dead_code)]

use cwim::environment::LinearActivationModel;
use cwim::Graph;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple digraph: each ordered pair kept with probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random digraph with at most `max_edges` edges.
pub fn random_small_graph(n: usize, max_edges: usize, rng: &mut impl Rng) -> Graph {
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    // Fisher–Yates on the candidate pairs.
    for i in (1..pairs.len()).rev() {
        let j = rng.gen_range(0..=i);
        pairs.swap(i, j);
    }
    let m = rng.gen_range(1..=max_edges.min(pairs.len()));
    pairs.truncate(m);
    Graph::new(n, pairs).unwrap()
}

/// Reflexive-transitive closure by repeated boolean matrix squaring.
pub fn closure(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for (u, row) in r.iter_mut().enumerate() {
        row[u] = true;
    }
    for &(u, v) in g.edges() {
        r[u][v] = true;
    }
    loop {
        let mut next = r.clone();
        for i in 0..n {
            for k in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        if next == r {
            return r;
        }
        r = next;
    }
}

/// Strict reachability (paths of length ≥ 1) via closure of the edge
/// relation composed once more with the edges.
pub fn strict_reach(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let star = closure(g);
    let mut out = vec![vec![false; n]; n];
    for &(u, w) in g.edges() {
        for v in 0..n {
            if star[w][v] {
                out[u][v] = true;
            }
        }
    }
    out
}

/// Weak components by union–find, ordered largest first, then by smallest id.
pub fn components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for &(u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for u in 0..n {
        let r = find(&mut parent, u);
        groups.entry(r).or_default().push(u);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

/// `(e_star, e_c, n_tilde)` from first principles.
pub fn brute_topology(g: &Graph, k: usize) -> (usize, usize, usize) {
    let star = closure(g);
    let comps = components(g);
    let take = k.min(comps.len());
    let mut e_star = 0;
    let mut e_c = 0;
    for comp in &comps[..take] {
        e_star += g.edges().iter().filter(|(u, _)| comp.contains(u)).count();
        e_c += comp
            .iter()
            .map(|&u| g.edges().iter().filter(|&&(t, _)| star[u][t]).count())
            .max()
            .unwrap_or(0);
    }
    let n_tilde = star
        .iter()
        .map(|row| row.iter().filter(|&&b| b).count())
        .max()
        .unwrap_or(0);
    (e_star, e_c, n_tilde)
}

/// Expected spread by summing over all live-edge worlds, each world's
/// reachable set taken from its closure.
pub fn exact_spread(g: &Graph, probs: &[f64], seeds: &[usize]) -> f64 {
    let m = g.edge_count();
    assert!(m <= 20);
    let n = g.node_count();
    let mut total = 0.0;
    for world in 0u32..(1 << m) {
        let mut w = 1.0;
        let mut live = Vec::new();
        for e in 0..m {
            if world >> e & 1 == 1 {
                w *= probs[e];
                live.push(g.edge(e));
            } else {
                w *= 1.0 - probs[e];
            }
        }
        if w == 0.0 {
            continue;
        }
        let star = closure(&Graph::new(n, live).unwrap());
        let reached = (0..n)
            .filter(|&v| seeds.iter().any(|&s| star[s][v]))
            .count();
        total += w * reached as f64;
    }
    total
}

/// Best exact spread over all `k`-subsets of nodes.
pub fn best_exact(g: &Graph, probs: &[f64], k: usize) -> f64 {
    let n = g.node_count();
    let mut best = 0.0f64;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        best = best.max(exact_spread(g, probs, &idx));
        // Next combination in lexicographic order.
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimizer of `‖θ‖² + Σ ω σ⁻² (θᵀx − y)²` by a dense normal-equations solve.
pub fn batch_ridge(samples: &[(Vec<f64>, f64, f64)], sigma: f64, d: usize) -> Vec<f64> {
    let s2 = 1.0 / (sigma * sigma);
    let mut a = DMatrix::<f64>::identity(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    for (x, w, y) in samples {
        let xv = DVector::from_column_slice(x);
        a += (s2 * w) * &xv * xv.transpose();
        rhs += (s2 * w * y) * &xv;
    }
    a.cholesky().expect("SPD").solve(&rhs).as_slice().to_vec()
}

/// `(I + σ⁻² Σ ω x xᵀ)` inverted densely.
pub fn batch_gram_inverse(samples: &[(Vec<f64>, f64, f64)], sigma: f64, d: usize) -> DMatrix<f64> {
    let s2 = 1.0 / (sigma * sigma);
    let mut a = DMatrix::<f64>::identity(d, d);
    for (x, w, _) in samples {
        let xv = DVector::from_column_slice(x);
        a += (s2 * w) * &xv * xv.transpose();
    }
    a.try_inverse().expect("invertible")
}

pub fn inv_norm(inv: &DMatrix<f64>, x: &[f64]) -> f64 {
    let xv = DVector::from_column_slice(x);
    (xv.transpose() * inv * &xv)[(0, 0)].max(0.0).sqrt()
}

/// Model with `m` random non-negative unit features and a small θ.
pub fn random_model(m: usize, d: usize, rng: &mut impl Rng) -> LinearActivationModel {
    let features: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.into_iter().map(|v| v / nrm).collect()
        })
        .collect();
    let theta: Vec<f64> = (0..d)
        .map(|_| rng.gen::<f64>() * 0.8 / (d as f64).sqrt())
        .collect();
    LinearActivationModel::from_parts(d, features, theta).unwrap()
}
