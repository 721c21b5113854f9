use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{dot, Csr, Dense};
use super::LinkPredError;

/// Â = D̃^-1/2 (A + I) D̃^-1/2 for an undirected simple edge list over
/// `n` nodes; self pairs and duplicates are ignored.
pub fn normalize_adjacency(n: usize, pairs: &[(usize, usize)]) -> Csr {
    let mut seen = std::collections::BTreeSet::new();
    for &(a, b) in pairs {
        if a != b {
            seen.insert((a.min(b), a.max(b)));
        }
    }
    let mut deg = vec![1.0f64; n];
    for &(a, b) in &seen {
        deg[a] += 1.0;
        deg[b] += 1.0;
    }
    let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0 / deg[i])).collect();
    for &(a, b) in &seen {
        let w = 1.0 / (deg[a] * deg[b]).sqrt();
        t.push((a, b, w));
        t.push((b, a, w));
    }
    Csr::from_triplets(n, n, t)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnParams {
    pub w1: Dense,
    pub w2: Dense,
}

impl GcnParams {
    /// He-uniform (fan-in) initialization.
    pub fn init(features: usize, hidden: usize, out: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |r: usize, c: usize| {
            let lim = (6.0 / r as f64).sqrt();
            Dense::from_vec(r, c, (0..r * c).map(|_| rng.random_range(-lim..lim)).collect())
        };
        let w1 = uniform(features, hidden);
        let w2 = uniform(hidden, out);
        Self { w1, w2 }
    }

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite() && self.w2.is_finite()
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub xw: Dense,
    pub p: Dense,
    pub h1: Dense,
    pub hw: Dense,
    pub z: Dense,
}

fn check_shapes(params: &GcnParams, x: &Csr, adj: &Csr) -> Result<(), LinkPredError> {
    let ok = adj.rows == adj.cols
        && x.rows == adj.rows
        && x.cols == params.w1.rows
        && params.w1.cols == params.w2.rows;
    if !ok {
        return Err(LinkPredError::Shape(format!(
            "adj {}x{}, features {}x{}, W1 {}x{}, W2 {}x{}",
            adj.rows, adj.cols, x.rows, x.cols, params.w1.rows, params.w1.cols, params.w2.rows, params.w2.cols
        )));
    }
    Ok(())
}

/// Z = Â · ReLU(Â · X · W1) · W2, keeping intermediates.
pub fn forward(params: &GcnParams, x: &Csr, adj: &Csr, parallel: bool) -> Result<Forward, LinkPredError> {
    check_shapes(params, x, adj)?;
    let xw = x.mul_dense(&params.w1, parallel);
    let p = adj.mul_dense(&xw, parallel);
    let mut h1 = p.clone();
    h1.data.iter_mut().for_each(|v| *v = v.max(0.0));
    let hw = h1.matmul(&params.w2);
    let z = adj.mul_dense(&hw, parallel);
    Ok(Forward { xw, p, h1, hw, z })
}

pub fn gcn_forward(params: &GcnParams, x: &Csr, adj: &Csr) -> Result<Dense, LinkPredError> {
    Ok(forward(params, x, adj, false)?.z)
}

/// Gradients of a loss with respect to W1 and W2, given its gradient with
/// respect to Z. `adj` must be symmetric.
pub fn backward(params: &GcnParams, x: &Csr, adj: &Csr, f: &Forward, g_z: &Dense) -> GcnParams {
    let g_hw = adj.mul_dense(g_z, false);
    let w2 = f.h1.t_matmul(&g_hw);
    let mut g_p = g_hw.matmul_t(&params.w2);
    for (g, p) in g_p.data.iter_mut().zip(&f.p.data) {
        if *p <= 0.0 {
            *g = 0.0;
        }
    }
    let g_xw = adj.mul_dense(&g_p, false);
    let w1 = x.t_mul_dense(&g_xw);
    GcnParams { w1, w2 }
}

/// Gradient of a scalar function of Â's stored entries, in CSR value order,
/// given dL/dZ. Used by the explainer.
pub fn adjacency_gradient(params: &GcnParams, adj: &Csr, f: &Forward, g_z: &Dense) -> Vec<f64> {
    let g_hw = adj.t_mul_dense(g_z);
    let mut g_p = g_hw.matmul_t(&params.w2);
    for (g, p) in g_p.data.iter_mut().zip(&f.p.data) {
        if *p <= 0.0 {
            *g = 0.0;
        }
    }
    let mut out = Vec::with_capacity(adj.nnz());
    for i in 0..adj.rows {
        for (j, _) in adj.row(i) {
            out.push(dot(g_z.row(i), f.hw.row(j)) + dot(g_p.row(i), f.xw.row(j)));
        }
    }
    out
}

/// Mean binary cross-entropy of sigmoid(z_u · z_v) against `labels`, with
/// dL/dZ.
pub fn bce_loss(z: &Dense, pairs: &[(usize, usize)], labels: &[f64]) -> (f64, Dense) {
    let m = pairs.len().max(1) as f64;
    let mut loss = 0.0;
    let mut g = Dense::zeros(z.rows, z.cols);
    for (&(u, v), &y) in pairs.iter().zip(labels) {
        let s = dot(z.row(u), z.row(v));
        loss += softplus(s) - y * s;
        let d = (sigmoid(s) - y) / m;
        let zv = z.row(v).to_vec();
        let zu = z.row(u).to_vec();
        for (a, b) in g.row_mut(u).iter_mut().zip(&zv) {
            *a += d * b;
        }
        for (a, b) in g.row_mut(v).iter_mut().zip(&zu) {
            *a += d * b;
        }
    }
    (loss / m, g)
}

pub fn score_pair(z: &Dense, u: usize, v: usize) -> f64 {
    sigmoid(dot(z.row(u), z.row(v)))
}
