use super::{ranked, Bids, ClassicalMechanism, Outcome};
use crate::error::MechanismError;
use crate::valuation::Bundle;

/// Sells every available item as one lot to the highest bidder, who pays the
/// second-highest bid. With a single item this is the Vickrey auction.
#[derive(Copy, Clone, Debug, Default)]
pub struct SecondPrice;

impl ClassicalMechanism for SecondPrice {
    fn name(&self) -> String {
        "second_price".into()
    }

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError> {
        let mut out = Outcome::empty(avail.width());
        if avail.is_empty() {
            return Ok(out);
        }
        let mut scores = Vec::with_capacity(bids.len());
        for (&id, v) in bids {
            scores.push((id, v.evaluate(avail)?));
        }
        let order = ranked(scores);
        if let Some(&(winner, top)) = order.first() {
            if top > 0 {
                let second = order.get(1).map_or(0, |&(_, s)| s);
                out.assign(winner, avail, second);
            }
        }
        Ok(out)
    }
}
