use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ranked, Bids, ClassicalMechanism, Outcome};
use crate::error::MechanismError;
use crate::lpsolve::{build_config_lp, solve};
use crate::netgraph::NodeId;
use crate::valuation::{Bundle, Money, ValuationFn};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    SecPrice,
    Fixed,
    Stat,
}

/// Explicit fixed-price ordering for one exact set of present `Fixed`
/// buyers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderOverride {
    pub members: BTreeSet<NodeId>,
    pub order: Vec<NodeId>,
}

/// Frozen randomness of a DNS run: a group and an ordering rank for every
/// buyer. Holding the record fixed turns DNS into a deterministic mechanism.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinRecord {
    pub groups: BTreeMap<NodeId, Group>,
    pub rank: BTreeMap<NodeId, u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<OrderOverride>,
}

impl CoinRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, id: NodeId, group: Group, rank: u64) {
        self.groups.insert(id, group);
        self.rank.insert(id, rank);
    }

    /// Uses `order` whenever exactly the buyers in `order` are the present
    /// `Fixed` buyers.
    pub fn with_override(mut self, order: Vec<NodeId>) -> Self {
        self.overrides.push(OrderOverride {
            members: order.iter().copied().collect(),
            order,
        });
        self
    }

    pub fn group(&self, id: NodeId) -> Option<Group> {
        self.groups.get(&id).copied()
    }

    /// Fixed-price ordering of `present`: an override for that exact set if
    /// there is one, else ascending rank with ties by id.
    pub fn fixed_order(&self, present: &BTreeSet<NodeId>) -> Vec<NodeId> {
        if let Some(o) = self.overrides.iter().find(|o| &o.members == present) {
            return o.order.clone();
        }
        let mut v: Vec<NodeId> = present.iter().copied().collect();
        v.sort_by_key(|id| (self.rank.get(id).copied().unwrap_or(u64::MAX), *id));
        v
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a stream index.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix(seed ^ splitmix(stream))
}

/// Draws every buyer's coins from `(seed, buyer id)`: `SecPrice` with
/// probability `1 - eps`, `Fixed` and `Stat` with `eps / 2` each.
pub fn draw_coins(
    seed: u64,
    buyers: impl IntoIterator<Item = NodeId>,
    eps: Ratio<i64>,
) -> CoinRecord {
    let (a, b) = (*eps.numer() as u128, *eps.denom() as u128);
    let mut coins = CoinRecord::new();
    for id in buyers {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, u64::from(id.0)));
        let r = rng.random::<u64>() as u128;
        let scaled = 2 * r * b; // u < t  <=>  2 r b < 2 t b 2^64
        let group = if scaled < (2 * (b - a)) << 64 {
            Group::SecPrice
        } else if scaled < (2 * b - a) << 64 {
            Group::Fixed
        } else {
            Group::Stat
        };
        coins.assign(id, group, rng.random());
    }
    coins
}

/// Parses `0.01` or `1/100` into an exact ratio strictly inside (0, 1).
pub fn parse_epsilon(s: &str) -> Result<Ratio<i64>, MechanismError> {
    let bad = || MechanismError::Epsilon(s.to_string());
    let s = s.trim();
    let eps = if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ratio::new(n, d)
    } else {
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let int: i64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        Ratio::new(int * den + frac, den)
    };
    check_epsilon(eps)
}

fn check_epsilon(eps: Ratio<i64>) -> Result<Ratio<i64>, MechanismError> {
    if eps > Ratio::zero() && eps < Ratio::one() {
        Ok(eps)
    } else {
        Err(MechanismError::Epsilon(eps.to_string()))
    }
}

/// Random partition mechanism with coins frozen in a [`CoinRecord`].
///
/// 1. Buyers are split into `SecPrice`, `Fixed` and `Stat` by the coins.
/// 2. `opt` is the configuration-LP optimum of the `Stat` buyers over the
///    available items.
/// 3. Second-price auction of all available items among `SecPrice` with
///    reserve `ceil(opt / sqrt(k))`, `k` the number of available items. The
///    winner pays the larger of the reserve and the second-highest bid.
/// 4. Without a sale in step 3, `Fixed` buyers visit in coin order and buy
///    their utility-maximising bundle at `ceil(eps * opt / (8k))` per item.
#[derive(Clone, Debug)]
pub struct Dns {
    pub coins: CoinRecord,
    pub eps: Ratio<i64>,
    /// Replaces the computed per-item price of step 4.
    pub fixed_price: Option<Money>,
}

impl Dns {
    pub fn new(coins: CoinRecord, eps: Ratio<i64>) -> Result<Self, MechanismError> {
        Ok(Self {
            coins,
            eps: check_epsilon(eps)?,
            fixed_price: None,
        })
    }

    pub fn with_fixed_price(mut self, price: Money) -> Self {
        self.fixed_price = Some(price);
        self
    }
}

fn ceil_big(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

fn to_money(v: &BigInt) -> Money {
    v.to_i64().unwrap_or(Money::MAX)
}

/// Smallest integer `r >= 0` with `r * sqrt(k) >= opt`.
pub(crate) fn reserve_price(opt: &BigRational, k: usize) -> Money {
    if !opt.is_positive() || k == 0 {
        return 0;
    }
    let p2 = opt.numer() * opt.numer();
    let d = opt.denom() * opt.denom() * BigInt::from(k);
    let c = ceil_big(&BigRational::new(p2, d));
    let mut r = c.sqrt();
    if &r * &r < c {
        r += 1;
    }
    to_money(&r)
}

/// Utility-maximising bundle within `left` at a uniform per-item price.
/// Ties prefer fewer items, then the lower bitmask; the empty bundle has
/// utility 0.
fn demand(v: &ValuationFn, left: Bundle, price: Money) -> Bundle {
    left.subsets()
        .max_by(|x, y| {
            let ux = v.value(*x) as i128 - price as i128 * x.cardinality() as i128;
            let uy = v.value(*y) as i128 - price as i128 * y.cardinality() as i128;
            ux.cmp(&uy)
                .then(y.cardinality().cmp(&x.cardinality()))
                .then(y.bits().cmp(&x.bits()))
        })
        .expect("the empty bundle is always a subset")
}

impl ClassicalMechanism for Dns {
    fn name(&self) -> String {
        "dns".into()
    }

    fn outcome(&self, avail: Bundle, bids: &Bids<'_>) -> Result<Outcome, MechanismError> {
        let mut sec = Vec::new();
        let mut fixed = BTreeSet::new();
        let mut stat = Vec::new();
        for (&id, &v) in bids {
            if v.items() != avail.width() {
                return Err(crate::error::ValuationError::WidthMismatch {
                    expected: avail.width(),
                    got: v.items(),
                }
                .into());
            }
            match self
                .coins
                .group(id)
                .ok_or(MechanismError::MissingCoin(id))?
            {
                Group::SecPrice => sec.push((id, v)),
                Group::Fixed => {
                    fixed.insert(id);
                }
                Group::Stat => stat.push((id, v)),
            }
        }

        let mut out = Outcome::empty(avail.width());
        let k = avail.cardinality();
        if k == 0 {
            return Ok(out);
        }
        let opt = solve(&build_config_lp(avail, &stat)?)?.optimum;

        let reserve = reserve_price(&opt, k);
        let order = ranked(sec.iter().map(|&(id, v)| (id, v.value(avail))));
        if let Some(&(winner, top)) = order.first() {
            if top > 0 && top >= reserve {
                let second = order.get(1).map_or(0, |&(_, s)| s);
                out.assign(winner, avail, second.max(reserve));
                return Ok(out);
            }
        }

        let price = match self.fixed_price {
            Some(p) => p,
            None => {
                let num = BigInt::from(*self.eps.numer()) * opt.numer();
                let den = BigInt::from(*self.eps.denom()) * opt.denom() * BigInt::from(8 * k);
                to_money(&ceil_big(&BigRational::new(num, den)))
            }
        };
        let mut left = avail;
        for id in self.coins.fixed_order(&fixed) {
            let Some(v) = bids.get(&id) else { continue };
            let y = demand(v, left, price);
            if !y.is_empty() {
                out.assign(id, y, price * y.cardinality() as Money);
                left = left.difference(y);
            }
        }
        Ok(out)
    }
}
