//! Deterministic instance families and a random-graph sampler.
//!
//! `queen` and `mycielski` number nodes exactly like the COLOR benchmark
//! files (1-based, row-major for the board), so a generated graph compares
//! equal to the parsed `.col` file.

use rand::Rng;

use super::{Graph, GraphError};

pub fn complete(n: usize) -> Graph {
    assert!(n >= 2, "complete graph needs at least two nodes");
    let n = n as u64;
    Graph::from_edges((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
}

pub fn path(n: usize) -> Graph {
    assert!(n >= 2, "path needs at least two nodes");
    Graph::from_edges((0..n as u64 - 1).map(|i| (i, i + 1))).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least three nodes");
    let n = n as u64;
    Graph::from_edges((0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

/// Star with `leaves` leaves; the center is node 0.
pub fn star(leaves: usize) -> Graph {
    assert!(leaves >= 1);
    Graph::from_edges((1..=leaves as u64).map(|i| (0, i))).unwrap()
}

/// `rows x cols` queen graph: cells attack along rows, columns and diagonals.
pub fn queen(rows: usize, cols: usize) -> Graph {
    assert!(rows * cols >= 2, "board needs at least two cells");
    let id = |r: usize, c: usize| (r * cols + c + 1) as u64;
    let mut pairs = Vec::new();
    for r1 in 0..rows {
        for c1 in 0..cols {
            for r2 in 0..rows {
                for c2 in 0..cols {
                    if (r1, c1) >= (r2, c2) {
                        continue;
                    }
                    if r1 == r2 || c1 == c2 || r1.abs_diff(r2) == c1.abs_diff(c2) {
                        pairs.push((id(r1, c1), id(r2, c2)));
                    }
                }
            }
        }
    }
    Graph::from_edges(pairs).unwrap()
}

/// The COLOR `myciel<k>` graph: `k - 1` Mycielski transformations of K2.
/// Chromatic number is `k + 1`.
pub fn mycielski(k: usize) -> Graph {
    assert!(k >= 2, "myciel2 is the smallest member (C5)");
    let mut n: u64 = 2;
    let mut edges: Vec<(u64, u64)> = vec![(1, 2)];
    for _ in 0..k - 1 {
        let mut next = edges.clone();
        for &(u, v) in &edges {
            next.push((u, v + n));
            next.push((u + n, v));
        }
        for i in 1..=n {
            next.push((n + i, 2 * n + 1));
        }
        n = 2 * n + 1;
        edges = next;
    }
    Graph::from_edges(edges).unwrap()
}

/// Erdős–Rényi G(n, p). Isolated nodes are removed by preprocessing, so the
/// result may have fewer than `n` nodes; fails when no edge was drawn.
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph, GraphError> {
    let mut pairs = Vec::new();
    for i in 0..n as u64 {
        for j in i + 1..n as u64 {
            if rng.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    Graph::from_edges(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        assert_eq!(complete(5).num_edges(), 10);
        assert_eq!(path(4).num_edges(), 3);
        assert_eq!(cycle(5).num_edges(), 5);
        assert_eq!(star(4).degree(0), 4);
        let q = queen(5, 5);
        assert_eq!((q.num_nodes(), q.num_edges()), (25, 160));
        let m = mycielski(5);
        assert_eq!((m.num_nodes(), m.num_edges()), (47, 236));
        let m2 = mycielski(2);
        assert_eq!((m2.num_nodes(), m2.num_edges()), (5, 5));
    }
}
