//! Bundles of items, buyer valuation functions and seeded generators for
//! synthetic valuation profiles.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ValuationError;

/// Money in integer minor units.
pub type Money = i64;

/// Largest supported number of items. Bundles are bitmasks and explicit
/// tables hold `2^m` entries.
pub const MAX_ITEMS: usize = 20;

/// A set of items, stored as a bitmask over `width` items. Item `j`
/// (zero-based) is present iff bit `j` is set.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle {
    width: u8,
    bits: u32,
}

impl Bundle {
    pub fn empty(width: usize) -> Self {
        debug_assert!(width <= MAX_ITEMS);
        Self {
            width: width as u8,
            bits: 0,
        }
    }

    /// The grand bundle: every item present.
    pub fn full(width: usize) -> Self {
        debug_assert!(width <= MAX_ITEMS);
        Self {
            width: width as u8,
            bits: ((1u64 << width) - 1) as u32,
        }
    }

    pub fn from_bits(width: usize, bits: u32) -> Result<Self, ValuationError> {
        if width == 0 || width > MAX_ITEMS {
            return Err(ValuationError::ItemCount(width));
        }
        if (bits as u64) >> width != 0 {
            return Err(ValuationError::InvalidParameter(format!(
                "bit pattern {bits:#b} wider than {width} items"
            )));
        }
        Ok(Self {
            width: width as u8,
            bits,
        })
    }

    pub fn from_items(width: usize, items: &[usize]) -> Result<Self, ValuationError> {
        let mut bits = 0u32;
        for &j in items {
            if j >= width {
                return Err(ValuationError::InvalidParameter(format!(
                    "item {j} out of range for {width} items"
                )));
            }
            bits |= 1 << j;
        }
        Self::from_bits(width, bits)
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn cardinality(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(self, item: usize) -> bool {
        item < self.width() && self.bits & (1 << item) != 0
    }

    pub fn union(self, other: Self) -> Self {
        debug_assert_eq!(self.width, other.width);
        Self {
            width: self.width,
            bits: self.bits | other.bits,
        }
    }

    pub fn intersection(self, other: Self) -> Self {
        debug_assert_eq!(self.width, other.width);
        Self {
            width: self.width,
            bits: self.bits & other.bits,
        }
    }

    pub fn difference(self, other: Self) -> Self {
        debug_assert_eq!(self.width, other.width);
        Self {
            width: self.width,
            bits: self.bits & !other.bits,
        }
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.bits & other.bits == 0
    }

    pub fn items(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.width()).filter(move |&j| bits & (1 << j) != 0)
    }

    /// All subsets of this bundle, in increasing bit-pattern order, starting
    /// with the empty bundle.
    pub fn subsets(self) -> impl Iterator<Item = Bundle> {
        let width = self.width;
        let mask = self.bits;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(Bundle { width, bits: cur })
        })
    }

    /// Every bundle over `width` items.
    pub fn all(width: usize) -> impl Iterator<Item = Bundle> {
        Bundle::full(width).subsets()
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bundle({self})")
    }
}

/// Item indicator vector, item 1 first: `{u1}` over two items prints `10`.
impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.width() {
            f.write_str(if self.contains(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bundle {
    type Err = ValuationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = 0u32;
        let s = s.trim();
        if s.len() > MAX_ITEMS || s.is_empty() {
            return Err(ValuationError::ItemCount(s.len()));
        }
        for (j, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << j,
                '0' => {}
                _ => {
                    return Err(ValuationError::InvalidParameter(format!(
                        "bundle literal {s:?}"
                    )))
                }
            }
        }
        Bundle::from_bits(s.len(), bits)
    }
}

impl Serialize for Bundle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A buyer's valuation over bundles. All variants are normalised and
/// monotone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValuationFn {
    /// One value per bundle, indexed by the bundle's bit pattern.
    Table { items: usize, values: Vec<Money> },
    /// Worth `value` for any bundle containing `demand`, zero otherwise.
    SingleMinded { demand: Bundle, value: Money },
    /// Worth `value` for any non-empty bundle (homogeneous items, one unit
    /// wanted).
    UnitDemand { items: usize, value: Money },
    /// Coverage function: each item covers a subset of a ground set and a
    /// bundle is worth the size of the union it covers.
    Coverage { ground: usize, sets: Vec<Vec<u64>> },
    /// `round(scale * sqrt(sum of item weights))`.
    SqrtAdditive { weights: Vec<u64>, scale: f64 },
}

impl ValuationFn {
    pub fn zero(items: usize) -> Self {
        ValuationFn::UnitDemand { items, value: 0 }
    }

    pub fn items(&self) -> usize {
        match self {
            ValuationFn::Table { items, .. } | ValuationFn::UnitDemand { items, .. } => *items,
            ValuationFn::SingleMinded { demand, .. } => demand.width(),
            ValuationFn::Coverage { sets, .. } => sets.len(),
            ValuationFn::SqrtAdditive { weights, .. } => weights.len(),
        }
    }

    pub fn evaluate(&self, x: Bundle) -> Result<Money, ValuationError> {
        if x.width() != self.items() {
            return Err(ValuationError::WidthMismatch {
                expected: self.items(),
                got: x.width(),
            });
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation; the caller guarantees matching widths.
    pub fn value(&self, x: Bundle) -> Money {
        debug_assert_eq!(x.width(), self.items());
        match self {
            ValuationFn::Table { values, .. } => values[x.bits() as usize],
            ValuationFn::SingleMinded { demand, value } => {
                if demand.is_subset(x) {
                    *value
                } else {
                    0
                }
            }
            ValuationFn::UnitDemand { value, .. } => {
                if x.is_empty() {
                    0
                } else {
                    *value
                }
            }
            ValuationFn::Coverage { sets, .. } => {
                let mut items = x.items();
                let Some(first) = items.next() else {
                    return 0;
                };
                let mut acc = sets[first].clone();
                for j in items {
                    for (a, b) in acc.iter_mut().zip(&sets[j]) {
                        *a |= *b;
                    }
                }
                acc.iter().map(|w| w.count_ones() as Money).sum()
            }
            ValuationFn::SqrtAdditive { weights, scale } => {
                let total: u64 = x.items().map(|j| weights[j]).sum();
                (scale * (total as f64).sqrt()).round() as Money
            }
        }
    }

    pub fn as_single_minded(&self) -> Option<(Bundle, Money)> {
        match self {
            ValuationFn::SingleMinded { demand, value } => Some((*demand, *value)),
            _ => None,
        }
    }

    /// Average value per demanded item of a single-minded valuation.
    pub fn avg_valuation(&self) -> Result<Ratio<i64>, ValuationError> {
        let (demand, value) = self.as_single_minded().ok_or_else(|| {
            ValuationError::InvalidParameter("average valuation needs a single-minded buyer".into())
        })?;
        if demand.is_empty() {
            return Err(ValuationError::EmptyDemand);
        }
        Ok(Ratio::new(value, demand.cardinality() as i64))
    }

    /// Materialises the valuation as a table of `2^m` values.
    pub fn to_table(&self) -> Vec<Money> {
        Bundle::all(self.items()).map(|x| self.value(x)).collect()
    }

    /// Scales every value by `num/den`, rounding down. Single-minded and
    /// unit-demand valuations keep their shape; other kinds become tables.
    pub fn scaled(&self, num: i64, den: i64) -> ValuationFn {
        let s = |v: Money| ((v as i128 * num as i128).div_euclid(den as i128)) as Money;
        match self {
            ValuationFn::SingleMinded { demand, value } => ValuationFn::SingleMinded {
                demand: *demand,
                value: s(*value),
            },
            ValuationFn::UnitDemand { items, value } => ValuationFn::UnitDemand {
                items: *items,
                value: s(*value),
            },
            other => ValuationFn::Table {
                items: other.items(),
                values: other.to_table().into_iter().map(s).collect(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Generators

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ValueDistribution {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, std_dev: f64 },
}

impl ValueDistribution {
    fn validate(&self) -> Result<(), ValuationError> {
        match *self {
            ValueDistribution::Uniform { lo, hi } if lo >= 0.0 && hi > lo => Ok(()),
            ValueDistribution::Normal { mean, std_dev } if mean > 0.0 && std_dev > 0.0 => Ok(()),
            ref d => Err(ValuationError::InvalidParameter(format!("{d:?}"))),
        }
    }

    /// Draws one value; normal draws are clamped at zero.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ValueDistribution::Uniform { lo, hi } => rng.random_range(lo..hi),
            ValueDistribution::Normal { mean, std_dev } => Normal::new(mean, std_dev)
                .expect("validated parameters")
                .sample(rng)
                .max(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ValuationModel {
    /// Random non-empty demand bundle; per-item average value drawn from
    /// the distribution.
    SingleMinded { dist: ValueDistribution },
    /// One unit wanted from homogeneous items.
    UnitDemand { dist: ValueDistribution },
    /// Per-item random subsets of `{1..ground}` with sizes `U(1, ground/2)`.
    Coverage { ground: usize },
    /// Per-item weights `U(lo, hi)`, value `round(scale * sqrt(sum))`.
    SqrtAdditive { lo: u64, hi: u64, scale: f64 },
    /// Random monotone table: each bundle adds `U(0, max_step)` on top of
    /// the best of its proper subsets.
    Monotone { max_step: Money },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValuationModelConfig {
    pub items: usize,
    pub model: ValuationModel,
    pub seed: u64,
}

impl ValuationModelConfig {
    pub fn new(items: usize, model: ValuationModel, seed: u64) -> Self {
        Self { items, model, seed }
    }

    pub fn single_minded_uniform(items: usize, seed: u64) -> Self {
        Self::new(
            items,
            ValuationModel::SingleMinded {
                dist: ValueDistribution::Uniform {
                    lo: 0.0,
                    hi: 200_000.0,
                },
            },
            seed,
        )
    }

    pub fn single_minded_normal(items: usize, seed: u64) -> Self {
        Self::new(
            items,
            ValuationModel::SingleMinded {
                dist: ValueDistribution::Normal {
                    mean: 100_000.0,
                    std_dev: 4_000.0,
                },
            },
            seed,
        )
    }

    pub fn coverage(items: usize, seed: u64) -> Self {
        Self::new(items, ValuationModel::Coverage { ground: 4_000 }, seed)
    }

    pub fn sqrt_additive(items: usize, seed: u64) -> Self {
        Self::new(
            items,
            ValuationModel::SqrtAdditive {
                lo: 1_000,
                hi: 20_000,
                scale: 100.0,
            },
            seed,
        )
    }

    pub fn validate(&self) -> Result<(), ValuationError> {
        if self.items == 0 || self.items > MAX_ITEMS {
            return Err(ValuationError::ItemCount(self.items));
        }
        match &self.model {
            ValuationModel::SingleMinded { dist } | ValuationModel::UnitDemand { dist } => {
                dist.validate()
            }
            ValuationModel::Coverage { ground } if *ground >= 2 => Ok(()),
            ValuationModel::SqrtAdditive { lo, hi, scale } if hi > lo && *scale > 0.0 => Ok(()),
            ValuationModel::Monotone { max_step } if *max_step > 0 => Ok(()),
            m => Err(ValuationError::InvalidParameter(format!("{m:?}"))),
        }
    }

    /// Generates `n` valuations from a generator seeded with `self.seed`.
    pub fn generate(&self, n: usize) -> Result<Vec<ValuationFn>, ValuationError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.generate_with(n, &mut rng)
    }

    pub fn generate_with<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<ValuationFn>, ValuationError> {
        self.validate()?;
        match &self.model {
            ValuationModel::SingleMinded { .. } => gen_single_minded(self, n, rng),
            ValuationModel::UnitDemand { .. } => gen_unit_demand(self, n, rng),
            ValuationModel::Coverage { .. } => gen_coverage(self, n, rng),
            ValuationModel::SqrtAdditive { .. } => gen_sqrt_subadditive(self, n, rng),
            ValuationModel::Monotone { .. } => gen_monotone(self, n, rng),
        }
    }
}

fn wrong_model(cfg: &ValuationModelConfig) -> ValuationError {
    ValuationError::InvalidParameter(format!("generator does not match {:?}", cfg.model))
}

pub fn gen_single_minded<R: Rng + ?Sized>(
    cfg: &ValuationModelConfig,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ValuationFn>, ValuationError> {
    let ValuationModel::SingleMinded { dist } = &cfg.model else {
        return Err(wrong_model(cfg));
    };
    cfg.validate()?;
    let m = cfg.items;
    let top = 1u64 << m;
    Ok((0..n)
        .map(|_| {
            let bits = rng.random_range(1..top) as u32;
            let demand = Bundle::from_bits(m, bits).expect("bits below 2^m");
            let avg = dist.sample(rng);
            let value = (avg * demand.cardinality() as f64).round() as Money;
            ValuationFn::SingleMinded { demand, value }
        })
        .collect())
}

pub fn gen_unit_demand<R: Rng + ?Sized>(
    cfg: &ValuationModelConfig,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ValuationFn>, ValuationError> {
    let ValuationModel::UnitDemand { dist } = &cfg.model else {
        return Err(wrong_model(cfg));
    };
    cfg.validate()?;
    Ok((0..n)
        .map(|_| ValuationFn::UnitDemand {
            items: cfg.items,
            value: dist.sample(rng).round() as Money,
        })
        .collect())
}

pub fn gen_coverage<R: Rng + ?Sized>(
    cfg: &ValuationModelConfig,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ValuationFn>, ValuationError> {
    let ValuationModel::Coverage { ground } = cfg.model else {
        return Err(wrong_model(cfg));
    };
    cfg.validate()?;
    let words = ground.div_ceil(64);
    Ok((0..n)
        .map(|_| {
            let sets = (0..cfg.items)
                .map(|_| {
                    let size = rng.random_range(1..=ground / 2);
                    let mut set = vec![0u64; words];
                    for e in index::sample(rng, ground, size) {
                        set[e / 64] |= 1 << (e % 64);
                    }
                    set
                })
                .collect();
            ValuationFn::Coverage { ground, sets }
        })
        .collect())
}

pub fn gen_sqrt_subadditive<R: Rng + ?Sized>(
    cfg: &ValuationModelConfig,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ValuationFn>, ValuationError> {
    let ValuationModel::SqrtAdditive { lo, hi, scale } = cfg.model else {
        return Err(wrong_model(cfg));
    };
    cfg.validate()?;
    Ok((0..n)
        .map(|_| ValuationFn::SqrtAdditive {
            weights: (0..cfg.items).map(|_| rng.random_range(lo..=hi)).collect(),
            scale,
        })
        .collect())
}

pub fn gen_monotone<R: Rng + ?Sized>(
    cfg: &ValuationModelConfig,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ValuationFn>, ValuationError> {
    let ValuationModel::Monotone { max_step } = cfg.model else {
        return Err(wrong_model(cfg));
    };
    cfg.validate()?;
    let m = cfg.items;
    Ok((0..n)
        .map(|_| {
            let mut values = vec![0; 1 << m];
            // increasing bit order visits every proper subset first
            for bits in 1..(1u32 << m) {
                let floor = (0..m)
                    .filter(|j| bits & (1 << j) != 0)
                    .map(|j| values[(bits & !(1 << j)) as usize])
                    .max()
                    .unwrap_or(0);
                values[bits as usize] = floor + rng.random_range(0..=max_step);
            }
            ValuationFn::Table { items: m, values }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bundle {
        s.parse().unwrap()
    }

    fn is_monotone(v: &ValuationFn) -> bool {
        let m = v.items();
        Bundle::all(m).all(|x| {
            Bundle::all(m)
                .filter(|y| x.is_subset(*y))
                .all(|y| v.value(x) <= v.value(y))
        })
    }

    #[test]
    fn bundle_basics() {
        let x = b("1010");
        assert_eq!(x.cardinality(), 2);
        assert_eq!(x.items().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(x.to_string(), "1010");
        assert_eq!(Bundle::full(3).to_string(), "111");
        assert!(Bundle::empty(3).is_empty());
        assert_eq!(Bundle::full(4).subsets().count(), 16);
        assert_eq!(x.subsets().count(), 4);
        assert!(b("1000").is_subset(x));
        assert!(b("0101").is_disjoint(x));
        assert_eq!(x.union(b("0100")), b("1110"));
        assert_eq!(x.difference(b("1000")), b("0010"));
        assert!(Bundle::from_bits(2, 4).is_err());
        assert!(Bundle::from_bits(21, 0).is_err());
        assert!("1x".parse::<Bundle>().is_err());
    }

    #[test]
    fn bundle_json() {
        let x = b("011");
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, "\"011\"");
        assert_eq!(serde_json::from_str::<Bundle>(&s).unwrap(), x);
    }

    #[test]
    fn single_minded_superset_convention() {
        let v = ValuationFn::SingleMinded {
            demand: b("10"),
            value: 4,
        };
        assert_eq!(v.evaluate(b("11")).unwrap(), 4);
        assert_eq!(v.evaluate(b("10")).unwrap(), 4);
        assert_eq!(v.evaluate(b("01")).unwrap(), 0);
        assert_eq!(v.evaluate(b("00")).unwrap(), 0);
        assert_eq!(
            v.evaluate(b("100")),
            Err(ValuationError::WidthMismatch {
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn table_row_from_figure() {
        // buyer a: (1,0) -> 4, (0,1) -> 0, (1,1) -> 5
        let a = ValuationFn::Table {
            items: 2,
            values: vec![0, 4, 0, 5],
        };
        assert_eq!(a.evaluate(b("11")).unwrap(), 5);
        assert_eq!(a.evaluate(b("10")).unwrap(), 4);
        assert_eq!(a.evaluate(b("00")).unwrap(), 0);
    }

    #[test]
    fn avg_valuation_cases() {
        let sm = |s: &str, v| ValuationFn::SingleMinded {
            demand: b(s),
            value: v,
        };
        assert_eq!(
            sm("110", 10).avg_valuation().unwrap(),
            Ratio::from_integer(5)
        );
        assert_eq!(
            sm("001", 3).avg_valuation().unwrap(),
            Ratio::from_integer(3)
        );
        assert_eq!(
            sm("111", 9).avg_valuation().unwrap(),
            Ratio::from_integer(3)
        );
        assert_eq!(
            sm("000", 9).avg_valuation(),
            Err(ValuationError::EmptyDemand)
        );
    }

    #[test]
    fn sqrt_hand_values() {
        let v = ValuationFn::SqrtAdditive {
            weights: vec![9, 16],
            scale: 1.0,
        };
        assert_eq!(v.value(b("00")), 0);
        assert_eq!(v.value(b("10")), 3);
        assert_eq!(v.value(b("01")), 4);
        assert_eq!(v.value(b("11")), 5);
    }

    #[test]
    fn coverage_singleton_and_disjoint() {
        let v = ValuationFn::Coverage {
            ground: 64,
            sets: vec![vec![0b0111], vec![0b1000], vec![0b1100]],
        };
        assert_eq!(v.value(b("100")), 3);
        assert_eq!(v.value(b("010")), 1);
        assert_eq!(v.value(b("110")), 4); // disjoint: additive
        assert_eq!(v.value(b("011")), 2); // overlap on one element
    }

    #[test]
    fn scaling() {
        let v = ValuationFn::SingleMinded {
            demand: b("01"),
            value: 7,
        };
        assert_eq!(
            v.scaled(1, 2),
            ValuationFn::SingleMinded {
                demand: b("01"),
                value: 3
            }
        );
        let t = ValuationFn::SqrtAdditive {
            weights: vec![9, 16],
            scale: 1.0,
        };
        assert_eq!(
            t.scaled(2, 1),
            ValuationFn::Table {
                items: 2,
                values: vec![0, 6, 8, 10]
            }
        );
    }

    #[test]
    fn generators_are_deterministic() {
        for cfg in [
            ValuationModelConfig::single_minded_uniform(5, 7),
            ValuationModelConfig::single_minded_normal(5, 7),
            ValuationModelConfig::coverage(4, 7),
            ValuationModelConfig::sqrt_additive(4, 7),
            ValuationModelConfig::new(3, ValuationModel::Monotone { max_step: 50 }, 7),
        ] {
            assert_eq!(cfg.generate(20).unwrap(), cfg.generate(20).unwrap());
        }
        let a = ValuationModelConfig::single_minded_uniform(5, 1)
            .generate(20)
            .unwrap();
        let b = ValuationModelConfig::single_minded_uniform(5, 2)
            .generate(20)
            .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn normal_draws_nonnegative() {
        let cfg = ValuationModelConfig::new(
            3,
            ValuationModel::SingleMinded {
                dist: ValueDistribution::Normal {
                    mean: 10.0,
                    std_dev: 50.0,
                },
            },
            3,
        );
        let vals = cfg.generate(2_000).unwrap();
        assert!(vals.iter().all(|v| v.as_single_minded().unwrap().1 >= 0));
        assert!(vals.iter().any(|v| v.as_single_minded().unwrap().1 == 0));
    }

    #[test]
    fn uniform_average_law_of_large_numbers() {
        let vals = ValuationModelConfig::single_minded_uniform(4, 11)
            .generate(10_000)
            .unwrap();
        let mean = vals
            .iter()
            .map(|v| {
                let (d, val) = v.as_single_minded().unwrap();
                val as f64 / d.cardinality() as f64
            })
            .sum::<f64>()
            / vals.len() as f64;
        assert!((95_000.0..=105_000.0).contains(&mean), "mean {mean}");
    }

    #[test]
    fn demands_are_non_empty() {
        let vals = ValuationModelConfig::single_minded_uniform(2, 5)
            .generate(500)
            .unwrap();
        assert!(vals
            .iter()
            .all(|v| !v.as_single_minded().unwrap().0.is_empty()));
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = ValuationModelConfig::new(
            3,
            ValuationModel::SingleMinded {
                dist: ValueDistribution::Uniform { lo: 5.0, hi: 1.0 },
            },
            0,
        );
        assert!(bad.generate(1).is_err());
        assert!(ValuationModelConfig::single_minded_uniform(0, 0)
            .generate(1)
            .is_err());
        assert!(ValuationModelConfig::single_minded_uniform(21, 0)
            .generate(1)
            .is_err());
        assert!(
            ValuationModelConfig::new(3, ValuationModel::Coverage { ground: 1 }, 0)
                .generate(1)
                .is_err()
        );
    }

    #[test]
    fn generated_valuations_are_monotone_and_normalised() {
        for cfg in [
            ValuationModelConfig::single_minded_uniform(4, 2),
            ValuationModelConfig::coverage(4, 2),
            ValuationModelConfig::sqrt_additive(5, 2),
            ValuationModelConfig::new(4, ValuationModel::Monotone { max_step: 9 }, 2),
        ] {
            for v in cfg.generate(10).unwrap() {
                assert_eq!(v.value(Bundle::empty(v.items())), 0);
                assert!(is_monotone(&v), "{cfg:?}");
            }
        }
    }
}
