use super::{Bids, ClassicalMechanism, Outcome};
use crate::error::MechanismError;
use crate::netgraph::NodeId;
use crate::valuation::{Bundle, Money, ValuationFn};

pub const MAX_VCG_BUYERS: usize = 10;
pub const MAX_VCG_ITEMS: usize = 5;

/// Welfare-maximising allocation by exhaustive search, with Clarke pivot
/// payments.
///
/// Among optimal allocations, buyers in ascending id order each take the
/// bundle of highest own value, then fewest items, then lowest bitmask.
#[derive(Copy, Clone, Debug, Default)]
pub struct BruteVcg;

struct Instance {
    ids: Vec<NodeId>,
    items: Vec<usize>,
    width: usize,
    /// `values[b][s]` for local bundle mask `s`.
    values: Vec<Vec<Money>>,
}

impl Instance {
    fn new(avail: Bundle, bids: &Bids<'_>) -> Result<Self, MechanismError> {
        let items: Vec<usize> = avail.items().collect();
        if bids.len() > MAX_VCG_BUYERS || items.len() > MAX_VCG_ITEMS {
            return Err(MechanismError::TooLarge {
                buyers: bids.len(),
                items: items.len(),
                max_buyers: MAX_VCG_BUYERS,
                max_items: MAX_VCG_ITEMS,
            });
        }
        let width = avail.width();
        let mut values = Vec::with_capacity(bids.len());
        for v in bids.values() {
            values.push(local_table(v, &items, width)?);
        }
        Ok(Self {
            ids: bids.keys().copied().collect(),
            items,
            width,
            values,
        })
    }

    fn global(&self, local: u32) -> Bundle {
        let picked: Vec<usize> = (0..self.items.len())
            .filter(|k| local & (1 << k) != 0)
            .map(|k| self.items[k])
            .collect();
        Bundle::from_items(self.width, &picked).expect("items come from the availability bundle")
    }

    /// `best[b][mask]`: optimal welfare of buyers `b..` over local items
    /// `mask`, ignoring buyer `skip`.
    fn table(&self, skip: Option<usize>) -> Vec<Vec<Money>> {
        let n = self.ids.len();
        let full = 1usize << self.items.len();
        let mut best = vec![vec![0; full]; n + 1];
        for b in (0..n).rev() {
            for mask in 0..full {
                best[b][mask] = if Some(b) == skip {
                    best[b + 1][mask]
                } else {
                    submasks(mask as u32)
                        .map(|s| self.values[b][s as usize] + best[b + 1][mask ^ s as usize])
                        .max()
                        .expect("the empty bundle is always a submask")
                };
            }
        }
        best
    }
}

fn local_table(
    v: &ValuationFn,
    items: &[usize],
    width: usize,
) -> Result<Vec<Money>, MechanismError> {
    (0..1u32 << items.len())
        .map(|s| {
            let picked: Vec<usize> = (0..items.len())
                .filter(|k| s & (1 << k) != 0)
                .map(|k| items[k])
                .collect();
            Ok(v.evaluate(Bundle::from_items(width, &picked)?)?)
        })
        .collect()
}

fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some((cur.wrapping_sub(mask)) & mask)
        };
        Some(cur)
    })
}

impl ClassicalMechanism for BruteVcg {
    fn name(&self) -> String {
        "brute_vcg".into()
    }

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError> {
        let inst = Instance::new(avail, bids)?;
        let best = inst.table(None);
        let full = (1usize << inst.items.len()) - 1;
        let optimum = best[0][full];

        let mut mask = full;
        let mut picks = Vec::with_capacity(inst.ids.len());
        for b in 0..inst.ids.len() {
            let target = best[b][mask];
            let s = submasks(mask as u32)
                .filter(|&s| inst.values[b][s as usize] + best[b + 1][mask ^ s as usize] == target)
                .min_by_key(|&s| {
                    (
                        std::cmp::Reverse(inst.values[b][s as usize]),
                        s.count_ones(),
                        inst.global(s).bits(),
                    )
                })
                .expect("an optimal extension exists");
            picks.push(s);
            mask ^= s as usize;
        }

        let mut out = Outcome::empty(avail.width());
        for (b, &s) in picks.iter().enumerate() {
            if s == 0 {
                continue;
            }
            let own = inst.values[b][s as usize];
            let without = inst.table(Some(b))[0][full];
            out.assign(inst.ids[b], inst.global(s), without - (optimum - own));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[Money]) -> ValuationFn {
        let items = values.len().trailing_zeros() as usize;
        ValuationFn::Table {
            items,
            values: values.to_vec(),
        }
    }

    fn run(vals: &[ValuationFn]) -> Outcome {
        let bids: Bids = vals
            .iter()
            .enumerate()
            .map(|(i, v)| (NodeId(i as u32 + 1), v))
            .collect();
        BruteVcg
            .outcome(Bundle::full(vals[0].items()), &bids)
            .unwrap()
    }

    #[test]
    fn submask_enumeration() {
        let all: Vec<u32> = submasks(0b101).collect();
        assert_eq!(all, [0, 1, 4, 5]);
        assert_eq!(submasks(0).collect::<Vec<_>>(), [0]);
    }

    #[test]
    fn single_buyer_no_externality() {
        let o = run(&[ValuationFn::UnitDemand { items: 1, value: 9 }]);
        assert_eq!(o.bundle(NodeId(1)), Bundle::full(1));
        assert_eq!(o.payment(NodeId(1)), 0);
    }

    #[test]
    fn reduces_to_second_price() {
        // both buyers only care about item 1
        let o = run(&[table(&[0, 10, 0, 10]), table(&[0, 6, 0, 6])]);
        assert_eq!(o.bundle(NodeId(1)).to_string(), "10");
        assert_eq!(o.payment(NodeId(1)), 6);
        assert!(o.bundle(NodeId(2)).is_empty());
    }

    #[test]
    fn splits_items() {
        let a = table(&[0, 4, 0, 5]);
        let b = table(&[0, 0, 3, 3]);
        let o = run(&[a.clone(), b.clone()]);
        assert_eq!(o.bundle(NodeId(1)).to_string(), "10");
        assert_eq!(o.bundle(NodeId(2)).to_string(), "01");
        let truth = [(NodeId(1), a), (NodeId(2), b)].into_iter().collect();
        assert_eq!(o.social_welfare(&truth), 7);
        // a: 3 - (7 - 4) = 0 ; b: 5 - (7 - 3) = 1
        assert_eq!(o.payment(NodeId(1)), 0);
        assert_eq!(o.payment(NodeId(2)), 1);
    }

    #[test]
    fn worthless_items_stay_unallocated() {
        let o = run(&[table(&[0, 5, 0, 5])]);
        assert_eq!(o.bundle(NodeId(1)).to_string(), "10");
    }

    #[test]
    fn size_bound() {
        let v = ValuationFn::zero(6);
        let bids: Bids = [(NodeId(1), &v)].into_iter().collect();
        assert!(matches!(
            BruteVcg.outcome(Bundle::full(6), &bids),
            Err(MechanismError::TooLarge { .. })
        ));
    }
}
