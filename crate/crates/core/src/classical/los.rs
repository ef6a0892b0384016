use std::cmp::Ordering;

use super::{Bids, ClassicalMechanism, Outcome};
use crate::error::MechanismError;
use crate::netgraph::NodeId;
use crate::valuation::{Bundle, Money};

/// Greedy auction for single-minded buyers ranked by value per demanded
/// item.
///
/// Buyers are scanned in descending average valuation and granted their
/// demand whenever it is still available. A winner pays her critical value:
/// the average valuation of the first buyer granted in the run without her
/// whose demand overlaps hers, times the size of her own demand (0 when no
/// such buyer exists).
#[derive(Copy, Clone, Debug, Default)]
pub struct Los;

#[derive(Copy, Clone, Debug)]
struct Bid {
    id: NodeId,
    demand: Bundle,
    value: Money,
}

fn by_average(a: &Bid, b: &Bid) -> Ordering {
    let lhs = a.value as i128 * b.demand.cardinality() as i128;
    let rhs = b.value as i128 * a.demand.cardinality() as i128;
    rhs.cmp(&lhs).then(a.id.cmp(&b.id))
}

fn greedy(order: &[Bid], avail: Bundle, skip: Option<NodeId>) -> Vec<Bid> {
    let mut left = avail;
    let mut granted = Vec::new();
    for bid in order {
        if Some(bid.id) == skip {
            continue;
        }
        if bid.demand.is_subset(left) {
            left = left.difference(bid.demand);
            granted.push(*bid);
        }
    }
    granted
}

fn ceil_div(num: i128, den: i128) -> Money {
    (num.div_euclid(den) + i128::from(num.rem_euclid(den) != 0)) as Money
}

impl ClassicalMechanism for Los {
    fn name(&self) -> String {
        "los".into()
    }

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError> {
        let mut order = Vec::with_capacity(bids.len());
        for (&id, v) in bids {
            let (demand, value) = v
                .as_single_minded()
                .ok_or(MechanismError::NotSingleMinded(id))?;
            if demand.width() != avail.width() {
                return Err(crate::error::ValuationError::WidthMismatch {
                    expected: avail.width(),
                    got: demand.width(),
                }
                .into());
            }
            if value > 0 && !demand.is_empty() {
                order.push(Bid { id, demand, value });
            }
        }
        order.sort_by(by_average);

        let mut out = Outcome::empty(avail.width());
        for winner in greedy(&order, avail, None) {
            let blocker = greedy(&order, avail, Some(winner.id))
                .into_iter()
                .find(|j| !j.demand.is_disjoint(winner.demand));
            let price = blocker.map_or(0, |j| {
                ceil_div(
                    j.value as i128 * winner.demand.cardinality() as i128,
                    j.demand.cardinality() as i128,
                )
            });
            out.assign(winner.id, winner.demand, price);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::ValuationFn;

    fn sm(demand: &str, value: Money) -> ValuationFn {
        ValuationFn::SingleMinded {
            demand: demand.parse().unwrap(),
            value,
        }
    }

    fn run(vals: &[ValuationFn], avail: &str) -> Outcome {
        let bids: Bids = vals
            .iter()
            .enumerate()
            .map(|(i, v)| (NodeId(i as u32 + 1), v))
            .collect();
        Los.outcome(avail.parse().unwrap(), &bids).unwrap()
    }

    #[test]
    fn three_buyer_example() {
        let vals = [sm("110", 10), sm("010", 4), sm("001", 3)];
        let o = run(&vals, "111");
        assert_eq!(o.bundle(NodeId(1)).to_string(), "110");
        assert_eq!(o.payment(NodeId(1)), 8);
        assert!(o.bundle(NodeId(2)).is_empty());
        assert_eq!(o.bundle(NodeId(3)).to_string(), "001");
        assert_eq!(o.payment(NodeId(3)), 0);
        let truth: std::collections::BTreeMap<_, _> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| (NodeId(i as u32 + 1), v.clone()))
            .collect();
        assert_eq!(o.social_welfare(&truth), 13);
        assert_eq!(o.revenue(), 8);
    }

    #[test]
    fn single_buyer_pays_zero() {
        let o = run(&[sm("100", 7)], "111");
        assert_eq!(o.payment(NodeId(1)), 0);
        assert_eq!(o.winners().len(), 1);
    }

    #[test]
    fn competing_for_one_item() {
        let o = run(&[sm("1", 10), sm("1", 6)], "1");
        assert_eq!(o.winners().into_iter().collect::<Vec<_>>(), [NodeId(1)]);
        assert_eq!(o.payment(NodeId(1)), 6);
    }

    #[test]
    fn payment_is_independent_of_own_bid() {
        // the winner's price is fixed by the best blocking buyer, not by the
        // buyer right behind her
        let truthful = run(
            &[sm("100", 10), sm("010", 6), sm("001", 1), sm("100", 3)],
            "111",
        );
        let shaded = run(
            &[sm("100", 5), sm("010", 6), sm("001", 1), sm("100", 3)],
            "111",
        );
        assert_eq!(truthful.payment(NodeId(1)), 3);
        assert_eq!(shaded.payment(NodeId(1)), 3);
    }

    #[test]
    fn fractional_price_rounds_up() {
        // blocker averages 7/2 per item; a one-item winner pays 4
        let o = run(&[sm("10", 5), sm("11", 7)], "11");
        assert_eq!(o.payment(NodeId(1)), 4);
    }

    #[test]
    fn rejects_other_valuations() {
        let vals = [ValuationFn::UnitDemand { items: 1, value: 3 }];
        let bids: Bids = vals.iter().map(|v| (NodeId(1), v)).collect();
        assert!(matches!(
            Los.outcome(Bundle::full(1), &bids),
            Err(MechanismError::NotSingleMinded(NodeId(1)))
        ));
    }

    #[test]
    fn respects_availability() {
        let o = run(&[sm("110", 10), sm("001", 3)], "011");
        assert_eq!(o.winners().into_iter().collect::<Vec<_>>(), [NodeId(2)]);
    }
}
