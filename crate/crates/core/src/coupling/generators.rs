use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_irreducible, set_laplacian_diagonal, CouplingError, CouplingMatrix};

/// Disconnected random graphs are redrawn with seed, seed+1, ... up to this cap.
pub const MAX_GENERATOR_ATTEMPTS: u32 = 100;

/// Watts–Strogatz parameters for [`generate_small_world_weighted`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallWorldParams {
    pub n_nodes: usize,
    /// Even ring degree `k`: each node starts linked to `k/2` neighbours per side.
    pub mean_degree: usize,
    pub rewire_prob: f64,
    /// Draw one weight per undirected edge instead of one per direction.
    pub symmetric: bool,
}

impl SmallWorldParams {
    pub fn new(n_nodes: usize) -> Self {
        Self { n_nodes, mean_degree: 4, rewire_prob: 0.1, symmetric: false }
    }
}

// Weights are drawn from (0, 1] so every kept edge stays strictly positive.
fn positive_unit(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn ring_lattice(n: usize, k: usize) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let v = (i + j) % n;
            adj[i][v] = true;
            adj[v][i] = true;
        }
    }
    adj
}

fn rewire(adj: &mut [Vec<bool>], k: usize, p: f64, rng: &mut ChaCha8Rng) {
    let n = adj.len();
    for j in 1..=k / 2 {
        for i in 0..n {
            let v = (i + j) % n;
            if !adj[i][v] || rng.random::<f64>() >= p {
                continue;
            }
            let free: Vec<usize> = (0..n).filter(|w| *w != i && !adj[i][*w]).collect();
            if free.is_empty() {
                continue;
            }
            let w = free[rng.random_range(0..free.len())];
            adj[i][v] = false;
            adj[v][i] = false;
            adj[i][w] = true;
            adj[w][i] = true;
        }
    }
}

fn weighted(adj: &[Vec<bool>], symmetric: bool, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = adj.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j || !adj[i][j] {
                continue;
            }
            if symmetric {
                if i < j {
                    let w = positive_unit(rng);
                    m[(i, j)] = w;
                    m[(j, i)] = w;
                }
            } else {
                m[(i, j)] = positive_unit(rng);
            }
        }
    }
    set_laplacian_diagonal(&mut m);
    m
}

fn retry<F>(seed: u64, mut draw: F) -> Result<CouplingMatrix, CouplingError>
where
    F: FnMut(&mut ChaCha8Rng) -> DMatrix<f64>,
{
    for attempt in 0..MAX_GENERATOR_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let m = draw(&mut rng);
        if is_irreducible(&m) {
            return CouplingMatrix::new(m);
        }
    }
    Err(CouplingError::RetryCapExceeded(MAX_GENERATOR_ATTEMPTS))
}

/// Watts–Strogatz small-world graph with independent Uniform(0, 1] weights.
///
/// Starts from a ring where each node is linked to its `k/2` nearest
/// neighbours on each side, rewires each lattice edge with probability `p` to
/// a uniformly chosen non-neighbour, then replaces every nonzero off-diagonal
/// entry by a random weight. Without `symmetric`, `aᵢⱼ` and `aⱼᵢ` are drawn
/// independently and the result is A1 but generally not A2.
pub fn generate_small_world_weighted(
    params: SmallWorldParams,
    seed: u64,
) -> Result<CouplingMatrix, CouplingError> {
    let SmallWorldParams { n_nodes: n, mean_degree: k, rewire_prob: p, symmetric } = params;
    if n < 3 {
        return Err(CouplingError::TooFewNodes { min: 3, got: n });
    }
    if k == 0 || k % 2 != 0 || k >= n {
        return Err(CouplingError::Parameter("mean degree must be even, positive and below N"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(CouplingError::Parameter("rewiring probability must lie in [0, 1]"));
    }
    retry(seed, |rng| {
        let mut adj = ring_lattice(n, k);
        if p > 0.0 {
            rewire(&mut adj, k, p, rng);
        }
        weighted(&adj, symmetric, rng)
    })
}

/// Globally coupled network: `aᵢⱼ = 1` off the diagonal, `aᵢᵢ = −(N − 1)`.
pub fn generate_complete(n_nodes: usize) -> Result<CouplingMatrix, CouplingError> {
    if n_nodes < 2 {
        return Err(CouplingError::TooFewNodes { min: 2, got: n_nodes });
    }
    let off = DMatrix::from_fn(n_nodes, n_nodes, |i, j| if i == j { 0.0 } else { 1.0 });
    CouplingMatrix::from_weights(off)
}

/// Erdős–Rényi graph with symmetric Uniform(0, 1] weights (an A2 matrix).
pub fn generate_random_symmetric(
    n_nodes: usize,
    edge_prob: f64,
    seed: u64,
) -> Result<CouplingMatrix, CouplingError> {
    if n_nodes < 2 {
        return Err(CouplingError::TooFewNodes { min: 2, got: n_nodes });
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(CouplingError::Parameter("edge probability must lie in (0, 1]"));
    }
    retry(seed, |rng| {
        let mut m = DMatrix::zeros(n_nodes, n_nodes);
        for i in 0..n_nodes {
            for j in i + 1..n_nodes {
                if rng.random::<f64>() < edge_prob {
                    let w = positive_unit(rng);
                    m[(i, j)] = w;
                    m[(j, i)] = w;
                }
            }
        }
        set_laplacian_diagonal(&mut m);
        m
    })
}
