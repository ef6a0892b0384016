//! Scenario files: one `key = value` pair per line, `#` starts a comment.
//!
//! ```text
//! network    = pa:1000:3          # pa:n:k | er:n:p | file:path
//! symmetrize = true
//! m          = 10
//! mechanism  = los                # second_price | mpa | los | brute_vcg | dns
//! stack      = msn, msn_m, all, first
//! valuation  = single_minded      # unit_demand | coverage | sqrt_additive | monotone
//! dist       = uniform            # uniform (lo, hi) | normal (mean, std_dev)
//! eps        = 0.01
//! seed       = 7
//! repeats    = 20                 # default: ceil(|V| / 20)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::Ratio;

use crate::classical::{parse_epsilon, MechanismKind};
use crate::error::BenchError;
use crate::meta::{ExhaustionRule, MetaKind};
use crate::valuation::{ValuationModel, ValueDistribution, MAX_ITEMS};

/// Largest item count accepted for DNS (configuration LP size).
pub const MAX_DNS_ITEMS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkSource {
    ErdosRenyi { n: usize, p: f64 },
    PreferentialAttachment { n: usize, k: usize },
    File(PathBuf),
}

impl fmt::Display for NetworkSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkSource::ErdosRenyi { n, p } => write!(f, "er:{n}:{p}"),
            NetworkSource::PreferentialAttachment { n, k } => write!(f, "pa:{n}:{k}"),
            NetworkSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for NetworkSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.splitn(3, ':').collect();
        let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
        match parts.as_slice() {
            ["er", n, p] => {
                let p: f64 = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("edge probability {p} outside [0, 1]"));
                }
                Ok(NetworkSource::ErdosRenyi { n: num(n)?, p })
            }
            ["pa", n, k] => Ok(NetworkSource::PreferentialAttachment {
                n: num(n)?,
                k: num(k)?,
            }),
            ["file", rest @ ..] if !rest.is_empty() => {
                Ok(NetworkSource::File(PathBuf::from(rest.join(":").trim())))
            }
            _ => Err(format!("unknown network source {s:?}")),
        }
    }
}

/// One column of the experiment: a lifted mechanism or a baseline.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stack {
    Meta(MetaKind),
    /// Classical mechanism over every buyer.
    All,
    /// Classical mechanism over the seller's neighbours.
    First,
}

impl Stack {
    pub fn label(self, mech: MechanismKind) -> String {
        match self {
            Stack::Meta(k) => format!("{k}:{mech}"),
            Stack::All => format!("all:{mech}"),
            Stack::First => format!("first:{mech}"),
        }
    }
}

impl FromStr for Stack {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all" => Ok(Stack::All),
            "first" => Ok(Stack::First),
            other => other.parse().map(Stack::Meta),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub network: NetworkSource,
    pub symmetrize: bool,
    pub items: usize,
    pub mechanism: MechanismKind,
    pub stack: Vec<Stack>,
    pub valuation: ValuationModel,
    pub eps: Ratio<i64>,
    pub seed: u64,
    /// `None` means `ceil(|V| / 20)`.
    pub repeats: Option<usize>,
    pub rule: ExhaustionRule,
    /// Record wall time per run. Off by default so that output is
    /// byte-for-byte reproducible.
    pub timing: bool,
}

impl Scenario {
    pub fn new(network: NetworkSource, items: usize, mechanism: MechanismKind) -> Self {
        Self {
            network,
            symmetrize: true,
            items,
            mechanism,
            stack: vec![
                Stack::Meta(MetaKind::Msn),
                Stack::Meta(MetaKind::MsnM),
                Stack::All,
                Stack::First,
            ],
            valuation: ValuationModel::SingleMinded {
                dist: ValueDistribution::Uniform {
                    lo: 0.0,
                    hi: 200_000.0,
                },
            },
            eps: Ratio::new(1, 100),
            seed: 0,
            repeats: None,
            rule: ExhaustionRule::default(),
            timing: false,
        }
    }

    /// Reads a scenario file. Relative `file:` paths are resolved against
    /// the scenario's directory.
    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut sc: Scenario = text.parse()?;
        if let NetworkSource::File(p) = &sc.network {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                sc.network = NetworkSource::File(base.join(p));
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let invalid = |m: String| Err(BenchError::Invalid(m));
        if self.items == 0 || self.items > MAX_ITEMS {
            return invalid(format!("m = {} outside 1..={MAX_ITEMS}", self.items));
        }
        if self.mechanism == MechanismKind::Dns && self.items > MAX_DNS_ITEMS {
            return invalid(format!("dns supports at most {MAX_DNS_ITEMS} items"));
        }
        if self.mechanism == MechanismKind::Dns
            && !(self.eps > Ratio::from_integer(0) && self.eps < Ratio::from_integer(1))
        {
            return invalid(format!("eps = {} outside (0, 1)", self.eps));
        }
        if self.mechanism == MechanismKind::Los
            && !matches!(self.valuation, ValuationModel::SingleMinded { .. })
        {
            return invalid("los needs single-minded valuations".into());
        }
        if self.repeats == Some(0) {
            return invalid("repeats must be at least 1".into());
        }
        if self.stack.is_empty() {
            return invalid("empty mechanism stack".into());
        }
        if let NetworkSource::File(p) = &self.network {
            if !p.exists() {
                return invalid(format!("network file {} does not exist", p.display()));
            }
        }
        Ok(())
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, got {s:?}")),
    }
}

impl FromStr for Scenario {
    type Err = BenchError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(BenchError::Scenario {
                    line: i + 1,
                    msg: format!("expected `key = value`, got {line:?}"),
                });
            };
            let key = k.trim().to_string();
            if kv
                .insert(key.clone(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(BenchError::Scenario {
                    line: i + 1,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }

        fn take<T, F>(
            kv: &mut BTreeMap<String, (usize, String)>,
            key: &str,
            f: F,
        ) -> Result<Option<T>, BenchError>
        where
            F: FnOnce(&str) -> Result<T, String>,
        {
            match kv.remove(key) {
                None => Ok(None),
                Some((line, v)) => f(&v).map(Some).map_err(|msg| BenchError::Scenario {
                    line,
                    msg: format!("{key}: {msg}"),
                }),
            }
        }
        fn num<T: FromStr>(s: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            s.parse::<T>().map_err(|e| e.to_string())
        }

        let network: NetworkSource = take(&mut kv, "network", |s| s.parse())?
            .ok_or_else(|| BenchError::Invalid("missing key `network`".into()))?;
        let items: usize = take(&mut kv, "m", num)?
            .ok_or_else(|| BenchError::Invalid("missing key `m`".into()))?;
        let mechanism: MechanismKind = take(&mut kv, "mechanism", |s| s.parse())?
            .ok_or_else(|| BenchError::Invalid("missing key `mechanism`".into()))?;
        let mut sc = Scenario::new(network, items, mechanism);
        if let Some(v) = take(&mut kv, "symmetrize", parse_bool)? {
            sc.symmetrize = v;
        }
        if let Some(v) = take(&mut kv, "stack", |s| {
            s.split(',')
                .map(|x| x.trim().parse::<Stack>())
                .collect::<Result<Vec<_>, _>>()
        })? {
            sc.stack = v;
        }
        if let Some(v) = take(&mut kv, "eps", |s| {
            parse_epsilon(s).map_err(|e| e.to_string())
        })? {
            sc.eps = v;
        }
        if let Some(v) = take(&mut kv, "seed", num)? {
            sc.seed = v;
        }
        if let Some(v) = take(&mut kv, "repeats", num)? {
            sc.repeats = Some(v);
        }
        if let Some(v) = take(&mut kv, "rule", |s| match s {
            "permanent" => Ok(ExhaustionRule::Permanent),
            "recomputed" => Ok(ExhaustionRule::Recomputed),
            _ => Err(format!("unknown exhaustion rule {s:?}")),
        })? {
            sc.rule = v;
        }
        if let Some(v) = take(&mut kv, "timing", parse_bool)? {
            sc.timing = v;
        }

        let kind = take(&mut kv, "valuation", |s| Ok(s.to_string()))?
            .unwrap_or_else(|| "single_minded".into());
        let dist_kind =
            take(&mut kv, "dist", |s| Ok(s.to_string()))?.unwrap_or_else(|| "uniform".into());
        let f = |kv: &mut BTreeMap<String, (usize, String)>, key: &str, default: f64| {
            take(kv, key, num::<f64>).map(|v| v.unwrap_or(default))
        };
        let dist = match dist_kind.as_str() {
            "uniform" => ValueDistribution::Uniform {
                lo: f(&mut kv, "lo", 0.0)?,
                hi: f(&mut kv, "hi", 200_000.0)?,
            },
            "normal" => ValueDistribution::Normal {
                mean: f(&mut kv, "mean", 100_000.0)?,
                std_dev: f(&mut kv, "std_dev", 4_000.0)?,
            },
            other => {
                return Err(BenchError::Invalid(format!(
                    "unknown distribution {other:?}"
                )))
            }
        };
        sc.valuation = match kind.as_str() {
            "single_minded" => ValuationModel::SingleMinded { dist },
            "unit_demand" => ValuationModel::UnitDemand { dist },
            "coverage" => ValuationModel::Coverage {
                ground: take(&mut kv, "ground", num)?.unwrap_or(4_000),
            },
            "sqrt_additive" => ValuationModel::SqrtAdditive {
                lo: take(&mut kv, "weight_lo", num)?.unwrap_or(1_000),
                hi: take(&mut kv, "weight_hi", num)?.unwrap_or(20_000),
                scale: f(&mut kv, "scale", 100.0)?,
            },
            "monotone" => ValuationModel::Monotone {
                max_step: take(&mut kv, "max_step", num)?.unwrap_or(1_000),
            },
            other => {
                return Err(BenchError::Invalid(format!(
                    "unknown valuation model {other:?}"
                )))
            }
        };

        if let Some((key, (line, _))) = kv.into_iter().next() {
            return Err(BenchError::Scenario {
                line,
                msg: format!("unknown key {key:?}"),
            });
        }
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let sc: Scenario = "# demo\nnetwork = pa:100:2\nm = 4\nmechanism = dns\n\
                            stack = msn_m, first\neps = 0.05\nseed = 9\nrepeats = 3\n\
                            valuation = monotone\nmax_step = 50\nsymmetrize = false\n"
            .parse()
            .unwrap();
        assert_eq!(
            sc.network,
            NetworkSource::PreferentialAttachment { n: 100, k: 2 }
        );
        assert_eq!(sc.items, 4);
        assert_eq!(sc.mechanism, MechanismKind::Dns);
        assert_eq!(sc.stack, [Stack::Meta(MetaKind::MsnM), Stack::First]);
        assert_eq!(sc.eps, Ratio::new(1, 20));
        assert_eq!(sc.repeats, Some(3));
        assert!(!sc.symmetrize);
        assert_eq!(sc.valuation, ValuationModel::Monotone { max_step: 50 });
        sc.validate().unwrap();
    }

    #[test]
    fn defaults() {
        let sc: Scenario = "network = er:50:0.1\nm = 3\nmechanism = los"
            .parse()
            .unwrap();
        assert_eq!(sc.stack.len(), 4);
        assert_eq!(sc.eps, Ratio::new(1, 100));
        assert!(sc.symmetrize);
        assert_eq!(sc.repeats, None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = "network = er:5:0.5\nm = x\nmechanism = los"
            .parse::<Scenario>()
            .unwrap_err();
        assert!(matches!(err, BenchError::Scenario { line: 2, .. }), "{err}");
        let err = "network = er:5:0.5\nm = 2\nmechanism = los\ncolour = red"
            .parse::<Scenario>()
            .unwrap_err();
        assert!(matches!(err, BenchError::Scenario { line: 4, .. }));
        let err = "m = 2\nmechanism = los".parse::<Scenario>().unwrap_err();
        assert!(matches!(err, BenchError::Invalid(_)));
        let err = "network = er:5:0.5\nnot a pair"
            .parse::<Scenario>()
            .unwrap_err();
        assert!(matches!(err, BenchError::Scenario { line: 2, .. }));
    }

    #[test]
    fn validation() {
        let mut sc = Scenario::new(
            NetworkSource::ErdosRenyi { n: 10, p: 0.5 },
            8,
            MechanismKind::Dns,
        );
        assert!(sc.validate().is_err());
        sc.items = 4;
        sc.valuation = ValuationModel::Monotone { max_step: 10 };
        assert!(sc.validate().is_ok());
        sc.repeats = Some(0);
        assert!(sc.validate().is_err());
        let sc = Scenario::new(
            NetworkSource::File("/no/such/file".into()),
            2,
            MechanismKind::Los,
        );
        assert!(sc.validate().is_err());
    }
}
