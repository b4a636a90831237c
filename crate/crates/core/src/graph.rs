//! Weighted undirected interconnection graphs.
//!
//! A [`Graph`] holds the adjacency weights `α_ij`; its [`Spectrum`] carries the
//! Laplacian `𝓛 = 𝒟 − 𝒜`, the eigenvalues `0 = λ₁ < λ₂ ≤ … ≤ λ_N` and an
//! orthonormal basis `R` of the complement of the consensus direction with
//! `𝓛 = R Λ Rᵀ`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{symmetric_eigen, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    TooFewNodes(usize),
    NodeOutOfRange { node: usize, n: usize },
    SelfLoop(usize),
    NonPositiveWeight { i: usize, j: usize, weight: f64 },
    DuplicateEdge { i: usize, j: usize },
    NotConnected,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::TooFewNodes(n) => write!(f, "a network needs at least 2 agents, got {n}"),
            GraphError::NodeOutOfRange { node, n } => {
                write!(f, "edge endpoint {node} out of range for {n} agents")
            }
            GraphError::SelfLoop(i) => write!(f, "self loop at node {i}"),
            GraphError::NonPositiveWeight { i, j, weight } => {
                write!(f, "edge ({i}, {j}) has non-positive weight {weight}")
            }
            GraphError::DuplicateEdge { i, j } => write!(f, "duplicate edge ({i}, {j})"),
            GraphError::NotConnected => write!(f, "graph is not connected"),
        }
    }
}

impl core::error::Error for GraphError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Matrix,
    connected: bool,
}

impl Graph {
    /// Builds a graph from `(i, j, α_ij)` triples; each unordered pair may
    /// appear at most once.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Graph, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut adjacency = Matrix::zeros(n, n);
        let mut list = Vec::with_capacity(edges.len());
        for &(i, j, weight) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(GraphError::NonPositiveWeight { i, j, weight });
            }
            if adjacency[(i, j)] != 0.0 {
                return Err(GraphError::DuplicateEdge { i, j });
            }
            adjacency[(i, j)] = weight;
            adjacency[(j, i)] = weight;
            list.push(Edge { i, j, weight });
        }
        let connected = bfs_connected(n, &adjacency);
        Ok(Graph { n, edges: list, adjacency, connected })
    }

    pub fn path(n: usize, weight: f64) -> Result<Graph, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, weight)).collect();
        Graph::new(n, &edges)
    }

    pub fn ring(n: usize, weight: f64) -> Result<Graph, GraphError> {
        if n < 3 {
            return Graph::path(n, weight);
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, weight)).collect();
        Graph::new(n, &edges)
    }

    pub fn complete(n: usize, weight: f64) -> Result<Graph, GraphError> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j, weight));
            }
        }
        Graph::new(n, &edges)
    }

    /// Star with node 0 as the hub.
    pub fn star(n: usize, weight: f64) -> Result<Graph, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (0, i, weight)).collect();
        Graph::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Weighted degree `Σ_j α_ij`.
    pub fn degree(&self, i: usize) -> f64 {
        self.adjacency.row(i).iter().sum()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency.row(i).iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(j, w)| (j, *w))
    }

    pub fn laplacian(&self) -> Matrix {
        let mut l = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let mut d = 0.0;
            for j in 0..self.n {
                if i != j {
                    let a = self.adjacency[(i, j)];
                    l[(i, j)] = -a;
                    d += a;
                }
            }
            l[(i, i)] = d;
        }
        l
    }
}

fn bfs_connected(n: usize, adjacency: &Matrix) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0);
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if adjacency[(i, j)] != 0.0 && !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Off-diagonal tolerance for the Jacobi sweeps, relative to ‖𝓛‖_F.
pub const JACOBI_TOL: f64 = 1e-12;
/// λ₂ below this fraction of λ_N is treated as a zero eigenvalue.
pub const CONNECTIVITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    laplacian: Matrix,
    eigenvalues: Vec<f64>,
    basis: Matrix,
}

impl Spectrum {
    pub fn of(graph: &Graph) -> Result<Spectrum, GraphError> {
        spectral_decomposition(graph)
    }

    pub fn n(&self) -> usize {
        self.laplacian.rows()
    }

    pub fn laplacian(&self) -> &Matrix {
        &self.laplacian
    }

    /// All eigenvalues, ascending, with `λ₁ = 0` exactly.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Diagonal of `Λ = diag(λ₂, …, λ_N)`.
    pub fn lambda(&self) -> &[f64] {
        &self.eigenvalues[1..]
    }

    pub fn lambda2(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `R`, the N×(N−1) matrix whose columns are the eigenvectors of λ₂…λ_N.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Row `𝔯_i` of `R`.
    pub fn basis_row(&self, i: usize) -> &[f64] {
        self.basis.row(i)
    }

    /// `√N · ψ_max / λ₂`: the bound on `max_i |x_i − x_s|` whenever every
    /// `|ν_i| < ψ_i ≤ ψ_max`. Doubling it bounds `max_{i,j} |x_i − x_j|`.
    pub fn disagreement_bound(&self, psi_max: f64) -> f64 {
        debug_assert!(psi_max > 0.0, "psi_max must be positive");
        libm::sqrt(self.n() as f64) * psi_max / self.lambda2()
    }
}

/// Eigendecomposition of the Laplacian of a connected graph.
///
/// Connectivity is decided by breadth-first search; the λ₂ threshold is a
/// second, numerical check.
pub fn spectral_decomposition(graph: &Graph) -> Result<Spectrum, GraphError> {
    if !graph.is_connected() {
        return Err(GraphError::NotConnected);
    }
    let laplacian = graph.laplacian();
    let eig = symmetric_eigen(&laplacian, JACOBI_TOL);
    let n = graph.n();
    let mut eigenvalues = eig.values;
    if eigenvalues[1] <= CONNECTIVITY_RTOL * eigenvalues[n - 1] {
        return Err(GraphError::NotConnected);
    }
    eigenvalues[0] = 0.0;
    let mut basis = Matrix::zeros(n, n - 1);
    for j in 1..n {
        for i in 0..n {
            basis[(i, j - 1)] = eig.vectors[(i, j)];
        }
    }
    Ok(Spectrum { laplacian, eigenvalues, basis })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_is_connected() {
        let g = Graph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.degree(1), 2.0);
    }

    #[test]
    fn isolated_node_means_disconnected() {
        let g = Graph::new(3, &[(0, 1, 1.0)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(spectral_decomposition(&g).unwrap_err(), GraphError::NotConnected);
    }

    #[test]
    fn two_node_adjacency() {
        let g = Graph::new(2, &[(0, 1, 2.5)]).unwrap();
        assert_eq!(g.adjacency().row(0), &[0.0, 2.5]);
        assert_eq!(g.adjacency().row(1), &[2.5, 0.0]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Graph::new(3, &[(0, 1, 1.0), (1, 0, 2.0)]).unwrap_err(), GraphError::DuplicateEdge { i: 1, j: 0 });
        assert_eq!(Graph::new(3, &[(1, 1, 1.0)]).unwrap_err(), GraphError::SelfLoop(1));
        assert!(matches!(Graph::new(3, &[(0, 1, 0.0)]).unwrap_err(), GraphError::NonPositiveWeight { .. }));
        assert!(matches!(Graph::new(3, &[(0, 1, -1.0)]).unwrap_err(), GraphError::NonPositiveWeight { .. }));
        assert!(matches!(Graph::new(2, &[(0, 2, 1.0)]).unwrap_err(), GraphError::NodeOutOfRange { node: 2, n: 2 }));
        assert_eq!(Graph::new(1, &[]).unwrap_err(), GraphError::TooFewNodes(1));
    }

    #[test]
    fn k2_spectrum_closed_form() {
        let w = 1.75;
        let g = Graph::new(2, &[(0, 1, w)]).unwrap();
        let s = spectral_decomposition(&g).unwrap();
        assert_eq!(s.eigenvalues()[0], 0.0);
        assert!((s.lambda2() - 2.0 * w).abs() < 1e-14);
    }

    #[test]
    fn disagreement_bound_formula() {
        let k2 = spectral_decomposition(&Graph::new(2, &[(0, 1, 1.0)]).unwrap()).unwrap();
        assert!((k2.disagreement_bound(1.0) - core::f64::consts::SQRT_2 / 2.0).abs() < 1e-14);
        let p3 = spectral_decomposition(&Graph::path(3, 1.0).unwrap()).unwrap();
        assert!((p3.disagreement_bound(2.0) - 2.0 * libm::sqrt(3.0)).abs() < 1e-12);
        assert!(p3.disagreement_bound(1e-300) < 1e-299);
    }

    #[test]
    fn named_families() {
        assert_eq!(Graph::ring(5, 1.0).unwrap().edges().len(), 5);
        assert_eq!(Graph::complete(4, 1.0).unwrap().edges().len(), 6);
        let star = Graph::star(5, 1.0).unwrap();
        assert_eq!(star.degree(0), 4.0);
        assert!(star.is_connected());
    }
}
