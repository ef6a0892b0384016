//! Directed social networks, buyer profiles and the join semantics of
//! information diffusion.
//!
//! A buyer joins the auction when she is a neighbour of the seller or a
//! reported neighbour of a buyer who has joined. Buyers that never join are
//! treated as reporting the null profile.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::valuation::ValuationFn;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

static NO_NODES: BTreeSet<NodeId> = BTreeSet::new();

/// Directed graph without a designated seller, as read from an edge list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    out: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, v: NodeId) {
        self.out.entry(v).or_default();
    }

    /// Adds the edge `(from, to)`. Self-loops are ignored by returning false.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId) -> bool {
        if from == to {
            return false;
        }
        self.add_node(to);
        self.out.entry(from).or_default().insert(to)
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(BTreeSet::len).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.out.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out
            .iter()
            .flat_map(|(&u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn neighbours(&self, v: NodeId) -> &BTreeSet<NodeId> {
        self.out.get(&v).unwrap_or(&NO_NODES)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.out.contains_key(&v)
    }

    /// Designates `seller`; every other node becomes a buyer.
    pub fn with_seller(self, seller: NodeId) -> Result<SocialNetwork, GraphError> {
        if !self.contains(seller) {
            return Err(GraphError::UnknownSeller(seller));
        }
        let buyers = self.out.keys().copied().filter(|&v| v != seller).collect();
        Ok(SocialNetwork {
            seller,
            buyers,
            out: self.out,
        })
    }
}

/// Parses a whitespace-separated edge list. Lines starting with `#` and
/// blank lines are skipped; duplicate edges collapse.
pub fn load_edge_list(text: &str, symmetrize: bool) -> Result<Graph, GraphError> {
    let mut graph = Graph::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let parse_err = || GraphError::Parse {
            line: lineno,
            content: raw.to_string(),
        };
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err());
        };
        let a = NodeId(a.parse().map_err(|_| parse_err())?);
        let b = NodeId(b.parse().map_err(|_| parse_err())?);
        if a == b {
            return Err(GraphError::SelfLoop {
                line: lineno,
                node: a,
            });
        }
        graph.add_node(a);
        graph.add_edge(a, b);
        if symmetrize {
            graph.add_edge(b, a);
        }
    }
    Ok(graph)
}

/// The seller, the buyers and the (true) directed edges between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialNetwork {
    seller: NodeId,
    buyers: BTreeSet<NodeId>,
    out: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl SocialNetwork {
    pub fn from_edges(
        seller: NodeId,
        buyers: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, GraphError> {
        let buyers: BTreeSet<NodeId> = buyers.into_iter().filter(|&b| b != seller).collect();
        let mut out: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        out.insert(seller, BTreeSet::new());
        for &b in &buyers {
            out.insert(b, BTreeSet::new());
        }
        for (u, v) in edges {
            if u == v || !out.contains_key(&u) || !out.contains_key(&v) {
                return Err(GraphError::DanglingEdge(u, v));
            }
            out.get_mut(&u).expect("checked above").insert(v);
        }
        Ok(Self {
            seller,
            buyers,
            out,
        })
    }

    /// A star: the seller linked to every buyer and no other edges.
    pub fn star(seller: NodeId, buyers: impl IntoIterator<Item = NodeId>) -> Self {
        let buyers: Vec<NodeId> = buyers.into_iter().collect();
        let edges: Vec<_> = buyers.iter().map(|&b| (seller, b)).collect();
        Self::from_edges(seller, buyers, edges).expect("star edges are well formed")
    }

    pub fn seller(&self) -> NodeId {
        self.seller
    }

    pub fn buyers(&self) -> &BTreeSet<NodeId> {
        &self.buyers
    }

    pub fn buyer_count(&self) -> usize {
        self.buyers.len()
    }

    /// True neighbour set `r_i`.
    pub fn neighbours(&self, v: NodeId) -> &BTreeSet<NodeId> {
        self.out.get(&v).unwrap_or(&NO_NODES)
    }

    pub fn seller_neighbours(&self) -> &BTreeSet<NodeId> {
        self.neighbours(self.seller)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out
            .iter()
            .flat_map(|(&u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(BTreeSet::len).sum()
    }

    /// Buyers reachable from the seller along true edges.
    pub fn reachable(&self) -> BTreeSet<NodeId> {
        closure(self.seller, |v| self.neighbours(v))
    }
}

/// Reported profile of one buyer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub valuation: ValuationFn,
    pub reported_neighbours: BTreeSet<NodeId>,
}

impl Profile {
    pub fn new(valuation: ValuationFn, reported_neighbours: BTreeSet<NodeId>) -> Self {
        Self {
            valuation,
            reported_neighbours,
        }
    }
}

/// Reported profiles of all buyers. A buyer without an entry carries the
/// null profile: zero valuation, no reported neighbours.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GlobalProfile {
    profiles: BTreeMap<NodeId, Profile>,
}

impl GlobalProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every buyer reports her true valuation and true neighbour set.
    pub fn truthful(net: &SocialNetwork, valuations: BTreeMap<NodeId, ValuationFn>) -> Self {
        let profiles = valuations
            .into_iter()
            .filter(|(id, _)| net.buyers().contains(id))
            .map(|(id, v)| {
                let r: BTreeSet<NodeId> = net
                    .neighbours(id)
                    .iter()
                    .copied()
                    .filter(|&j| j != net.seller())
                    .collect();
                (id, Profile::new(v, r))
            })
            .collect();
        Self { profiles }
    }

    pub fn insert(&mut self, id: NodeId, profile: Profile) {
        self.profiles.insert(id, profile);
    }

    pub fn get(&self, id: NodeId) -> Option<&Profile> {
        self.profiles.get(&id)
    }

    pub fn get_mut(&mut self, id: NodeId) -> Option<&mut Profile> {
        self.profiles.get_mut(&id)
    }

    pub fn valuation(&self, id: NodeId) -> Option<&ValuationFn> {
        self.profiles.get(&id).map(|p| &p.valuation)
    }

    pub fn reported_neighbours(&self, id: NodeId) -> &BTreeSet<NodeId> {
        self.profiles
            .get(&id)
            .map(|p| &p.reported_neighbours)
            .unwrap_or(&NO_NODES)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.profiles.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Profile)> + '_ {
        self.profiles.iter().map(|(&id, p)| (id, p))
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Checks `reported_neighbours ⊆ r_i` for every buyer.
    pub fn respects(&self, net: &SocialNetwork) -> bool {
        self.profiles
            .iter()
            .all(|(&id, p)| p.reported_neighbours.is_subset(net.neighbours(id)))
    }

    /// Nulls out every buyer that does not join under the reported edges.
    pub fn effective(&self, net: &SocialNetwork) -> Self {
        restrict(self, &joined_set(net, self))
    }
}

fn closure<'a, F>(seller: NodeId, next: F) -> BTreeSet<NodeId>
where
    F: Fn(NodeId) -> &'a BTreeSet<NodeId>,
{
    let mut joined = BTreeSet::new();
    let mut queue: VecDeque<NodeId> = VecDeque::from([seller]);
    let mut seen = BTreeSet::from([seller]);
    while let Some(v) = queue.pop_front() {
        for &w in next(v) {
            if seen.insert(w) {
                joined.insert(w);
                queue.push_back(w);
            }
        }
    }
    joined
}

/// Buyers that join the auction: the seller's neighbours plus, recursively,
/// the reported neighbours of every joined buyer.
pub fn joined_set(net: &SocialNetwork, gp: &GlobalProfile) -> BTreeSet<NodeId> {
    let seller = net.seller();
    closure(seller, |v| {
        if v == seller {
            net.seller_neighbours()
        } else {
            gp.reported_neighbours(v)
        }
    })
    .into_iter()
    .filter(|v| net.buyers().contains(v))
    .collect()
}

/// Keeps the profiles of `ids` and nulls every other buyer.
pub fn restrict(gp: &GlobalProfile, ids: &BTreeSet<NodeId>) -> GlobalProfile {
    GlobalProfile {
        profiles: gp
            .profiles
            .iter()
            .filter(|(id, _)| ids.contains(id))
            .map(|(&id, p)| (id, p.clone()))
            .collect(),
    }
}
