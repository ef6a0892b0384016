//! Synthetic social networks. Both generators produce undirected graphs
//! (every edge in both directions) over nodes `0..n`.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::BenchError;
use crate::netgraph::{load_edge_list, Graph, NodeId};

use super::scenario::NetworkSource;

/// Largest synthetic network accepted.
pub const MAX_SYNTHETIC_NODES: usize = 2_000;

fn check_size(n: usize) -> Result<(), BenchError> {
    if !(2..=MAX_SYNTHETIC_NODES).contains(&n) {
        return Err(BenchError::Invalid(format!(
            "synthetic networks need 2..={MAX_SYNTHETIC_NODES} nodes, got {n}"
        )));
    }
    Ok(())
}

fn empty(n: usize) -> Graph {
    let mut g = Graph::new();
    for v in 0..n as u32 {
        g.add_node(NodeId(v));
    }
    g
}

fn link(g: &mut Graph, a: usize, b: usize) {
    g.add_edge(NodeId(a as u32), NodeId(b as u32));
    g.add_edge(NodeId(b as u32), NodeId(a as u32));
}

/// G(n, p): each unordered pair is linked independently with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, BenchError> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                link(&mut g, a, b);
            }
        }
    }
    Ok(g)
}

/// Barabási–Albert preferential attachment: a clique on the first `k + 1`
/// nodes, then every new node links to `k` distinct existing nodes chosen
/// with probability proportional to their degree.
pub fn preferential_attachment(n: usize, k: usize, seed: u64) -> Result<Graph, BenchError> {
    check_size(n)?;
    if k == 0 || k >= n {
        return Err(BenchError::Invalid(format!(
            "attachment count {k} must be in 1..{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = empty(n);
    // every node appears once per incident edge end
    let mut ends: Vec<usize> = Vec::with_capacity(2 * n * k);
    for a in 0..=k {
        for b in a + 1..=k {
            link(&mut g, a, b);
            ends.push(a);
            ends.push(b);
        }
    }
    for v in k + 1..n {
        let mut targets: Vec<usize> = Vec::with_capacity(k);
        while targets.len() < k {
            let t = *ends.choose(&mut rng).expect("the seed clique has edges");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            link(&mut g, v, t);
            ends.push(v);
            ends.push(t);
        }
    }
    Ok(g)
}

/// Builds or loads the graph described by `source`.
pub fn load_network(
    source: &NetworkSource,
    symmetrize: bool,
    seed: u64,
) -> Result<Graph, BenchError> {
    match source {
        NetworkSource::ErdosRenyi { n, p } => erdos_renyi(*n, *p, seed),
        NetworkSource::PreferentialAttachment { n, k } => preferential_attachment(*n, *k, seed),
        NetworkSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(load_edge_list(&text, symmetrize)?)
        }
    }
}
