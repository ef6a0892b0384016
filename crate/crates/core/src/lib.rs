//! Auction mechanisms on social networks.
//!
//! Classical combinatorial auctions ([`classical`]) are lifted onto a
//! social network by the graph-exploration meta-mechanisms in [`meta`].
//! [`props`] checks incentive compatibility, individual rationality,
//! non-deficiency and non-sensitivity by deviation enumeration, and
//! [`bench`] runs seeded experiments that emit CSV.

pub mod bench;
pub mod classical;
pub mod error;
pub mod lpsolve;
pub mod meta;
pub mod netgraph;
pub mod props;
pub mod valuation;

pub use classical::{ClassicalMechanism, Outcome};
pub use error::{BenchError, GraphError, LpError, MechanismError, ValuationError};
pub use netgraph::{GlobalProfile, NodeId, Profile, SocialNetwork};
pub use valuation::{Bundle, Money, ValuationFn};
