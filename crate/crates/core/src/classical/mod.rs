//! Classical (network-free) auction mechanisms.
//!
//! Every mechanism maps an availability vector and the reported valuations
//! of the participating buyers to an [`Outcome`]. Ties are broken in favour
//! of the lowest buyer id throughout, and a buyer whose bid is worth nothing
//! never wins.

mod dns;
mod los;
mod mpa;
mod second_price;
mod vcg;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MechanismError;
use crate::netgraph::NodeId;
use crate::valuation::{Bundle, Money, ValuationFn};

pub use dns::{draw_coins, mix_seed, parse_epsilon, CoinRecord, Dns, Group, OrderOverride};
pub use los::Los;
pub use mpa::Mpa;
pub use second_price::SecondPrice;
pub use vcg::{BruteVcg, MAX_VCG_BUYERS, MAX_VCG_ITEMS};

/// Reported valuations of the participating buyers.
pub type Bids<'a> = BTreeMap<NodeId, &'a ValuationFn>;

/// Allocation and payments. Buyers without an entry receive nothing and pay
/// nothing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub items: usize,
    pub allocation: BTreeMap<NodeId, Bundle>,
    pub payment: BTreeMap<NodeId, Money>,
}

impl Outcome {
    pub fn empty(items: usize) -> Self {
        Self {
            items,
            allocation: BTreeMap::new(),
            payment: BTreeMap::new(),
        }
    }

    /// Records a bundle and a payment, dropping empty entries.
    pub fn assign(&mut self, id: NodeId, bundle: Bundle, payment: Money) {
        if bundle.is_empty() {
            self.allocation.remove(&id);
        } else {
            self.allocation.insert(id, bundle);
        }
        if payment == 0 {
            self.payment.remove(&id);
        } else {
            self.payment.insert(id, payment);
        }
    }

    pub fn bundle(&self, id: NodeId) -> Bundle {
        self.allocation
            .get(&id)
            .copied()
            .unwrap_or_else(|| Bundle::empty(self.items))
    }

    pub fn payment(&self, id: NodeId) -> Money {
        self.payment.get(&id).copied().unwrap_or(0)
    }

    pub fn winners(&self) -> BTreeSet<NodeId> {
        self.allocation.keys().copied().collect()
    }

    /// Union of all allocated bundles.
    pub fn allocated(&self) -> Bundle {
        self.allocation
            .values()
            .fold(Bundle::empty(self.items), |acc, &b| acc.union(b))
    }

    /// Bundles are pairwise disjoint and lie inside `avail`.
    pub fn is_feasible(&self, avail: Bundle) -> bool {
        let mut used = Bundle::empty(self.items);
        for &b in self.allocation.values() {
            if b.width() != self.items || !b.is_subset(avail) || !b.is_disjoint(used) {
                return false;
            }
            used = used.union(b);
        }
        true
    }

    /// `v_i(x_i) - p_i` under valuation `v`.
    pub fn utility(&self, id: NodeId, v: &ValuationFn) -> Money {
        v.value(self.bundle(id)) - self.payment(id)
    }

    /// Sum of valuations of the allocated bundles. Buyers missing from
    /// `valuations` contribute nothing.
    pub fn social_welfare(&self, valuations: &BTreeMap<NodeId, ValuationFn>) -> Money {
        self.allocation
            .iter()
            .filter_map(|(id, &b)| valuations.get(id).map(|v| v.value(b)))
            .sum()
    }

    pub fn revenue(&self) -> Money {
        self.payment.values().sum()
    }
}

pub fn utility(v: &ValuationFn, outcome: &Outcome, id: NodeId) -> Money {
    outcome.utility(id, v)
}

pub fn sw(outcome: &Outcome, valuations: &BTreeMap<NodeId, ValuationFn>) -> Money {
    outcome.social_welfare(valuations)
}

pub fn revenue(outcome: &Outcome) -> Money {
    outcome.revenue()
}

/// A deterministic mechanism over reported valuations and the currently
/// available items.
pub trait ClassicalMechanism: Send + Sync {
    fn name(&self) -> String;

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError>;

    fn winners(&self, avail: Bundle, bids: &Bids<'_>) -> Result<BTreeSet<NodeId>, MechanismError> {
        Ok(self.outcome(avail, bids)?.winners())
    }
}

impl<M: ClassicalMechanism + ?Sized> ClassicalMechanism for &M {
    fn name(&self) -> String {
        (**self).name()
    }

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError> {
        (**self).outcome(avail, bids)
    }
}

impl<M: ClassicalMechanism + ?Sized> ClassicalMechanism for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError> {
        (**self).outcome(avail, bids)
    }
}

/// Names of the mechanism suite, as used in scenario files and on the
/// command line.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    SecondPrice,
    Mpa,
    Los,
    BruteVcg,
    Dns,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 5] = [
        MechanismKind::SecondPrice,
        MechanismKind::Mpa,
        MechanismKind::Los,
        MechanismKind::BruteVcg,
        MechanismKind::Dns,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MechanismKind::SecondPrice => "second_price",
            MechanismKind::Mpa => "mpa",
            MechanismKind::Los => "los",
            MechanismKind::BruteVcg => "brute_vcg",
            MechanismKind::Dns => "dns",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MechanismKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MechanismKind::ALL
            .into_iter()
            .find(|k| k.label() == s || (s == "sp" && *k == MechanismKind::SecondPrice))
            .ok_or_else(|| format!("unknown mechanism {s:?}"))
    }
}

/// Highest score first, ties by lowest id. Zero scores are kept.
fn ranked(scores: impl IntoIterator<Item = (NodeId, Money)>) -> Vec<(NodeId, Money)> {
    let mut v: Vec<_> = scores.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_accessors() {
        let mut o = Outcome::empty(3);
        o.assign(NodeId(1), "110".parse().unwrap(), 4);
        o.assign(NodeId(2), Bundle::empty(3), 0);
        assert_eq!(o.winners(), BTreeSet::from([NodeId(1)]));
        assert_eq!(o.payment(NodeId(2)), 0);
        assert_eq!(o.bundle(NodeId(2)), Bundle::empty(3));
        assert_eq!(o.allocated().to_string(), "110");
        assert!(o.is_feasible(Bundle::full(3)));
        assert!(!o.is_feasible("100".parse().unwrap()));
        let v = ValuationFn::UnitDemand { items: 3, value: 9 };
        assert_eq!(o.utility(NodeId(1), &v), 5);
        assert_eq!(o.revenue(), 4);
        let vals = BTreeMap::from([(NodeId(1), v)]);
        assert_eq!(o.social_welfare(&vals), 9);
    }

    #[test]
    fn empty_outcome_zero() {
        let o = Outcome::empty(2);
        assert_eq!(o.revenue(), 0);
        assert_eq!(o.social_welfare(&BTreeMap::new()), 0);
    }

    #[test]
    fn overlapping_bundles_infeasible() {
        let mut o = Outcome::empty(2);
        o.assign(NodeId(1), "11".parse().unwrap(), 0);
        o.assign(NodeId(2), "01".parse().unwrap(), 0);
        assert!(!o.is_feasible(Bundle::full(2)));
    }

    #[test]
    fn kind_round_trip() {
        for k in MechanismKind::ALL {
            assert_eq!(k.label().parse::<MechanismKind>().unwrap(), k);
        }
        assert!("vickrey".parse::<MechanismKind>().is_err());
    }
}
