use funnelsync_core::{Graph, GraphError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph on `n` nodes: a uniformly random recursive tree over a
/// shuffled node order, then every other pair independently with
/// probability `p`. Equal seeds give equal graphs.
pub fn random_connected(n: usize, p: f64, weight: f64, seed: u64) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut linked = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let child = order[k];
        linked[parent][child] = true;
        linked[child][parent] = true;
        edges.push((parent.min(child), parent.max(child), weight));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !linked[i][j] && rng.gen_bool(p) {
                edges.push((i, j, weight));
            }
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    Graph::new(n, &edges)
}
