use super::{ranked, Bids, ClassicalMechanism, Outcome};
use crate::error::MechanismError;
use crate::valuation::{Bundle, Money};

/// The (k+1)-th price auction for `k` homogeneous items and unit-demand
/// buyers. A buyer's score is her value for a single available item.
///
/// The `k` highest scorers win one item each and pay the (k+1)-th highest
/// score. Items go to winners in ascending id order, so a winner's own bid
/// never changes which item another winner receives.
#[derive(Copy, Clone, Debug, Default)]
pub struct Mpa;

impl ClassicalMechanism for Mpa {
    fn name(&self) -> String {
        "mpa".into()
    }

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError> {
        let mut out = Outcome::empty(avail.width());
        let Some(first) = avail.items().next() else {
            return Ok(out);
        };
        let single = Bundle::from_items(avail.width(), &[first])?;
        let mut scores = Vec::with_capacity(bids.len());
        for (&id, v) in bids {
            scores.push((id, v.evaluate(single)?));
        }
        let order = ranked(scores);
        let k = avail.cardinality();
        let price: Money = order.get(k).map_or(0, |&(_, s)| s);
        let mut winners: Vec<_> = order
            .iter()
            .take(k)
            .filter(|&&(_, s)| s > 0)
            .map(|&(id, _)| id)
            .collect();
        winners.sort();
        for (id, item) in winners.into_iter().zip(avail.items()) {
            out.assign(id, Bundle::from_items(avail.width(), &[item])?, price);
        }
        Ok(out)
    }
}
