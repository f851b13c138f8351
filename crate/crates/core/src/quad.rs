//! Gauss–Legendre rules and 1D meshes.
//!
//! Every integral in this crate reduces to a sum of per-interval Gauss
//! quadratures, with interval endpoints aligned to the breakpoints of the
//! (piecewise-linear) integrand wherever the caller knows them.

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence; exact for
/// polynomials of degree <= 2n - 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d2) = legendre_with_derivative(n, x);
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over `[a, b]` split at the sorted partition points, with an
/// n-point Gauss rule per piece.
pub fn integrate_partition(partition: &[f64], gauss_n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre(gauss_n);
    let mut total = 0.0;
    for w in partition.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, wq) in nodes.iter().zip(weights.iter()) {
            acc += wq * f(mid + half * x);
        }
        total += half * acc;
    }
    total
}

/// Build a sorted partition of `[a, b]`: the given breakpoints (clipped to the
/// interval) refined so that no piece exceeds `(b - a) / min_pieces`.
pub fn build_partition(a: f64, b: f64, breakpoints: &[f64], min_pieces: usize) -> Vec<f64> {
    let mut pts = vec![a, b];
    for &t in breakpoints {
        if t > a && t < b {
            pts.push(t);
        }
    }
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    let max_len = (b - a) / min_pieces.max(1) as f64;
    let mut out = Vec::with_capacity(pts.len() + min_pieces);
    for w in pts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        out.push(x0);
        let sub = ((x1 - x0) / max_len).ceil() as usize;
        for i in 1..sub {
            out.push(x0 + (x1 - x0) * i as f64 / sub as f64);
        }
    }
    out.push(b);
    out
}

/// A strictly increasing 1D node vector; elements are the gaps between nodes.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh with `n` elements on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Mesh {
        assert!(n >= 1 && b > a);
        let nodes = (0..=n)
            .map(|i| a + (b - a) * i as f64 / n as f64)
            .collect();
        Mesh { nodes }
    }

    /// Uniform mesh with extra nodes inserted at the given breakpoints, so
    /// piecewise-linear data with those kinks is integrated exactly.
    pub fn uniform_aligned(a: f64, b: f64, n: usize, breakpoints: &[f64]) -> Mesh {
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let min_gap = (b - a) / (n as f64) * 1e-9;
        for &t in breakpoints {
            if t > a && t < b && nodes.iter().all(|&x| (x - t).abs() > min_gap) {
                nodes.push(t);
            }
        }
        nodes.sort_by(|x, y| x.total_cmp(y));
        Mesh { nodes }
    }

    /// Contiguous spans `(start, end, elements)`; spans must tile an interval.
    pub fn graded(spans: &[(f64, f64, usize)]) -> Result<Mesh> {
        if spans.is_empty() {
            return Err(Error::InvalidMesh("no spans".into()));
        }
        let mut nodes = vec![spans[0].0];
        for &(a, b, n) in spans {
            if b <= a || n == 0 {
                return Err(Error::InvalidMesh(format!("bad span ({a}, {b}, {n})")));
            }
            if (a - *nodes.last().unwrap()).abs() > 1e-12 * (b - a).abs().max(1.0) {
                return Err(Error::InvalidMesh("spans are not contiguous".into()));
            }
            for i in 1..=n {
                nodes.push(a + (b - a) * i as f64 / n as f64);
            }
        }
        Mesh::from_nodes(nodes)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Mesh> {
        if nodes.len() < 2 {
            return Err(Error::InvalidMesh("need at least two nodes".into()));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidMesh("nodes must be strictly increasing".into()));
        }
        Ok(Mesh { nodes })
    }

    /// Split every element in two (for Richardson pairs).
    pub fn refined(&self) -> Mesh {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len());
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Mesh { nodes }
    }

    /// Mesh with every element merged pairwise (inverse of `refined` when the
    /// element count is even; otherwise keeps the last element).
    pub fn coarsened(&self) -> Mesh {
        let last = *self.nodes.last().unwrap();
        let mut nodes: Vec<f64> = self.nodes.iter().copied().step_by(2).collect();
        if *nodes.last().unwrap() < last {
            nodes.push(last);
        }
        Mesh { nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }
}
