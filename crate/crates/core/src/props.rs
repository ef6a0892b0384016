//! Property checkers: incentive compatibility (IC), individual rationality
//! (IR), non-deficiency (ND) and non-sensitivity.
//!
//! IC and non-sensitivity are checked by enumerating a finite deviation set,
//! so a pass means "no violation within the enumerated deviations". Every
//! report states how many deviations it examined.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{mix_seed, Bids, ClassicalMechanism, Outcome};
use crate::error::MechanismError;
use crate::meta::{run_meta, ExhaustionRule, MetaKind};
use crate::netgraph::{joined_set, GlobalProfile, NodeId, Profile, SocialNetwork};
use crate::valuation::{
    gen_monotone, Bundle, Money, ValuationFn, ValuationModel, ValuationModelConfig,
};

/// Maps a reported global profile to an outcome.
pub trait Runner: Sync {
    fn label(&self) -> String;
    fn run(&self, gp: &GlobalProfile) -> Result<Outcome, MechanismError>;
}

/// A meta-mechanism over a fixed network.
pub struct MetaRunner<'a> {
    pub kind: MetaKind,
    pub rule: ExhaustionRule,
    pub net: &'a SocialNetwork,
    pub items: usize,
    pub mech: &'a dyn ClassicalMechanism,
}

impl Runner for MetaRunner<'_> {
    fn label(&self) -> String {
        format!("{}:{}", self.kind, self.mech.name())
    }

    fn run(&self, gp: &GlobalProfile) -> Result<Outcome, MechanismError> {
        run_meta(self.kind, self.rule, self.net, gp, self.items, self.mech).map(|(o, _)| o)
    }
}

/// A classical mechanism run on every reported valuation with all items
/// available. Reported neighbours are ignored.
pub struct ClassicalRunner<'a> {
    pub items: usize,
    pub mech: &'a dyn ClassicalMechanism,
}

impl Runner for ClassicalRunner<'_> {
    fn label(&self) -> String {
        self.mech.name()
    }

    fn run(&self, gp: &GlobalProfile) -> Result<Outcome, MechanismError> {
        let bids: Bids = gp.iter().map(|(id, p)| (id, &p.valuation)).collect();
        self.mech.outcome(Bundle::full(self.items), &bids)
    }
}

/// A network with its truthful profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    pub items: usize,
    pub net: SocialNetwork,
    pub truth: GlobalProfile,
}

impl Instance {
    pub fn new(
        seed: u64,
        items: usize,
        net: SocialNetwork,
        valuations: BTreeMap<NodeId, ValuationFn>,
    ) -> Self {
        let truth = GlobalProfile::truthful(&net, valuations);
        Self {
            seed,
            items,
            net,
            truth,
        }
    }

    pub fn valuations(&self) -> BTreeMap<NodeId, ValuationFn> {
        self.truth
            .iter()
            .map(|(id, p)| (id, p.valuation.clone()))
            .collect()
    }

    pub fn descriptor(&self) -> InstanceDescriptor {
        InstanceDescriptor {
            seed: self.seed,
            buyers: self.net.buyer_count(),
            items: self.items,
            edges: self.net.edge_count(),
        }
    }

    /// The same buyers and valuations with the seller linked to everybody
    /// and no other edges.
    pub fn as_star(&self) -> Instance {
        let net = SocialNetwork::star(self.net.seller(), self.net.buyers().iter().copied());
        Instance::new(self.seed, self.items, net, self.valuations())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub seed: u64,
    pub buyers: usize,
    pub items: usize,
    pub edges: usize,
}

/// Shape of the valuations drawn by [`random_instance`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceModel {
    UnitDemand,
    SingleMinded,
    Monotone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub min_buyers: usize,
    pub max_buyers: usize,
    pub min_items: usize,
    pub max_items: usize,
    pub max_out_degree: usize,
    pub model: InstanceModel,
    /// Values are drawn uniformly from `1..=max_value` (per item step for
    /// monotone tables).
    pub max_value: Money,
}

impl InstanceConfig {
    pub fn new(model: InstanceModel, max_buyers: usize, items: (usize, usize)) -> Self {
        Self {
            min_buyers: 1,
            max_buyers,
            min_items: items.0,
            max_items: items.1,
            max_out_degree: 4,
            model,
            max_value: 100,
        }
    }
}

/// Random network (seller 0, buyers `1..=n`) with uniform integer
/// valuations. The seller has between 1 and `max_out_degree` neighbours;
/// each buyer links to at most `max_out_degree` other buyers.
pub fn random_instance(seed: u64, cfg: &InstanceConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(cfg.min_buyers..=cfg.max_buyers);
    let m = rng.random_range(cfg.min_items..=cfg.max_items);
    let seller = NodeId(0);
    let buyers: Vec<NodeId> = (1..=n as u32).map(NodeId).collect();
    let mut edges = Vec::new();
    let first = rng.random_range(1..=cfg.max_out_degree.min(n));
    for k in index::sample(&mut rng, n, first) {
        edges.push((seller, buyers[k]));
    }
    for &b in &buyers {
        let others: Vec<NodeId> = buyers.iter().copied().filter(|&o| o != b).collect();
        let d = rng.random_range(0..=cfg.max_out_degree.min(others.len()));
        for k in index::sample(&mut rng, others.len(), d) {
            edges.push((b, others[k]));
        }
    }
    let net = SocialNetwork::from_edges(seller, buyers.iter().copied(), edges)
        .expect("generated edges are well formed");
    let hi = cfg.max_value.max(1);
    let vals: Vec<ValuationFn> = match cfg.model {
        InstanceModel::UnitDemand => (0..n)
            .map(|_| ValuationFn::UnitDemand {
                items: m,
                value: rng.random_range(1..=hi),
            })
            .collect(),
        InstanceModel::SingleMinded => (0..n)
            .map(|_| ValuationFn::SingleMinded {
                demand: Bundle::from_bits(m, rng.random_range(1..1u32 << m))
                    .expect("bits below 2^m"),
                value: rng.random_range(1..=hi),
            })
            .collect(),
        InstanceModel::Monotone => {
            let vc = ValuationModelConfig::new(m, ValuationModel::Monotone { max_step: hi }, seed);
            gen_monotone(&vc, n, &mut rng).expect("valid monotone config")
        }
    };
    Instance::new(seed, m, net, buyers.into_iter().zip(vals).collect())
}

/// Which misreports to enumerate for each buyer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationPolicy {
    /// Value scalings `num/den`, applied to the true valuation.
    pub scales: Vec<(i64, i64)>,
    /// Report another buyer's valuation. With `demand_changes` off, a
    /// single-minded buyer keeps her own demand and takes the other value.
    pub replacement: bool,
    /// Single-minded buyers also report every other demand bundle.
    pub demand_changes: bool,
    /// Enumerate subsets of the true neighbour set.
    pub neighbours: bool,
    /// Up to this many neighbours, every subset is tried.
    pub full_subset_limit: usize,
    /// Otherwise the full set, the empty set and this many random subsets.
    pub sampled_subsets: usize,
    /// Additional value reports for specific buyers.
    pub extra: Vec<(NodeId, ValuationFn)>,
    pub seed: u64,
}

impl Default for DeviationPolicy {
    fn default() -> Self {
        Self {
            scales: vec![(0, 1), (1, 2), (2, 1)],
            replacement: true,
            demand_changes: false,
            neighbours: true,
            full_subset_limit: 4,
            sampled_subsets: 16,
            extra: Vec::new(),
            seed: 0,
        }
    }
}

impl DeviationPolicy {
    /// Value and neighbour deviations for lifted mechanisms.
    pub fn meta() -> Self {
        Self::default()
    }

    /// Value deviations only, including demand changes, for classical
    /// mechanisms.
    pub fn classical() -> Self {
        Self {
            demand_changes: true,
            neighbours: false,
            ..Self::default()
        }
    }

    pub fn with_extra(mut self, id: NodeId, v: ValuationFn) -> Self {
        self.extra.push((id, v));
        self
    }

    /// Candidate value reports of `id`, the truth first.
    pub fn value_deviations(&self, id: NodeId, truth: &GlobalProfile) -> Vec<ValuationFn> {
        let Some(v) = truth.valuation(id) else {
            return Vec::new();
        };
        let mut out = vec![v.clone()];
        let mut push = |w: ValuationFn| {
            if !out.contains(&w) {
                out.push(w);
            }
        };
        for &(num, den) in &self.scales {
            push(v.scaled(num, den));
        }
        if self.replacement {
            for (other, p) in truth.iter() {
                if other == id {
                    continue;
                }
                match (v.as_single_minded(), p.valuation.as_single_minded()) {
                    (Some((demand, _)), Some((_, value))) if !self.demand_changes => {
                        push(ValuationFn::SingleMinded { demand, value })
                    }
                    _ => push(p.valuation.clone()),
                }
            }
        }
        if self.demand_changes {
            if let Some((demand, value)) = v.as_single_minded() {
                for y in Bundle::all(demand.width()).skip(1) {
                    push(ValuationFn::SingleMinded { demand: y, value });
                }
            }
        }
        for (who, w) in &self.extra {
            if *who == id {
                push(w.clone());
            }
        }
        out
    }

    /// Candidate neighbour reports of `id`, the truth first.
    pub fn neighbour_deviations(&self, id: NodeId, truth: &GlobalProfile) -> Vec<BTreeSet<NodeId>> {
        let r: Vec<NodeId> = truth.reported_neighbours(id).iter().copied().collect();
        let full: BTreeSet<NodeId> = r.iter().copied().collect();
        if !self.neighbours {
            return vec![full];
        }
        let mut out = vec![full];
        let mut push = |s: BTreeSet<NodeId>| {
            if !out.contains(&s) {
                out.push(s);
            }
        };
        if r.len() <= self.full_subset_limit {
            for mask in 0..(1u32 << r.len()) {
                push(
                    (0..r.len())
                        .filter(|k| mask & (1 << k) != 0)
                        .map(|k| r[k])
                        .collect(),
                );
            }
        } else {
            push(BTreeSet::new());
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, u64::from(id.0)));
            for _ in 0..self.sampled_subsets {
                push(r.iter().copied().filter(|_| rng.random_bool(0.5)).collect());
            }
        }
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Ic,
    Ir,
    Nd,
    NonSensitivity,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Ic => "IC",
            Property::Ir => "IR",
            Property::Nd => "ND",
            Property::NonSensitivity => "non-sensitivity",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub buyer: Option<NodeId>,
    pub truthful_utility: Money,
    pub deviating_utility: Money,
    /// The full reported profile that exposes the violation.
    pub profile: GlobalProfile,
    pub detail: String,
}

impl Violation {
    pub fn gap(&self) -> Money {
        self.deviating_utility - self.truthful_utility
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub property: Property,
    pub mechanism: String,
    pub passed: bool,
    pub instance: InstanceDescriptor,
    pub deviations_checked: usize,
    pub violation: Option<Violation>,
}

impl DeviationReport {
    fn new(property: Property, mechanism: String, inst: &Instance) -> Self {
        Self {
            property,
            mechanism,
            passed: true,
            instance: inst.descriptor(),
            deviations_checked: 0,
            violation: None,
        }
    }

    fn fail(mut self, v: Violation) -> Self {
        self.passed = false;
        self.violation = Some(v);
        self
    }
}

fn deviate(
    truth: &GlobalProfile,
    id: NodeId,
    v: ValuationFn,
    r: BTreeSet<NodeId>,
) -> GlobalProfile {
    let mut gp = truth.clone();
    gp.insert(id, Profile::new(v, r));
    gp
}

/// Searches for a buyer who strictly gains from an enumerated misreport
/// while everybody else reports truthfully. Only buyers that join under
/// truthful reports can influence the outcome and are examined; they are
/// tried in ascending id order and the first violation is reported.
pub fn check_ic(
    runner: &dyn Runner,
    inst: &Instance,
    policy: &DeviationPolicy,
) -> Result<DeviationReport, MechanismError> {
    let mut report = DeviationReport::new(Property::Ic, runner.label(), inst);
    let truthful = runner.run(&inst.truth)?;
    for id in joined_set(&inst.net, &inst.truth) {
        let Some(v) = inst.truth.valuation(id) else {
            continue;
        };
        let u = truthful.utility(id, v);
        let values = policy.value_deviations(id, &inst.truth);
        let nbrs = policy.neighbour_deviations(id, &inst.truth);
        for (vi, w) in values.iter().enumerate() {
            for (ri, r) in nbrs.iter().enumerate() {
                if vi == 0 && ri == 0 {
                    continue;
                }
                let gp = deviate(&inst.truth, id, w.clone(), r.clone());
                let out = runner.run(&gp)?;
                report.deviations_checked += 1;
                let u2 = out.utility(id, v);
                if u2 > u {
                    return Ok(report.fail(Violation {
                        buyer: Some(id),
                        truthful_utility: u,
                        deviating_utility: u2,
                        detail: format!(
                            "buyer {id} gains {} by reporting {} with neighbours {:?}",
                            u2 - u,
                            serde_json::to_string(w).unwrap_or_default(),
                            r
                        ),
                        profile: gp,
                    }));
                }
            }
        }
    }
    Ok(report)
}

/// Every buyer's truthful utility is non-negative.
pub fn check_ir(runner: &dyn Runner, inst: &Instance) -> Result<DeviationReport, MechanismError> {
    let report = DeviationReport::new(Property::Ir, runner.label(), inst);
    let out = runner.run(&inst.truth)?;
    for (id, p) in inst.truth.iter() {
        let u = out.utility(id, &p.valuation);
        if u < 0 {
            return Ok(report.fail(Violation {
                buyer: Some(id),
                truthful_utility: u,
                deviating_utility: u,
                profile: inst.truth.clone(),
                detail: format!("buyer {id} has utility {u}"),
            }));
        }
    }
    Ok(report)
}

/// Total truthful revenue is non-negative.
pub fn check_nd(runner: &dyn Runner, inst: &Instance) -> Result<DeviationReport, MechanismError> {
    let report = DeviationReport::new(Property::Nd, runner.label(), inst);
    let out = runner.run(&inst.truth)?;
    let rv = out.revenue();
    if rv < 0 {
        return Ok(report.fail(Violation {
            buyer: None,
            truthful_utility: 0,
            deviating_utility: 0,
            profile: inst.truth.clone(),
            detail: format!("revenue {rv}"),
        }));
    }
    Ok(report)
}

/// For every winner and each of her enumerated value misreports: either she
/// stops winning or the whole allocation stays the same.
pub fn check_non_sensitivity(
    mech: &dyn ClassicalMechanism,
    inst: &Instance,
    policy: &DeviationPolicy,
) -> Result<DeviationReport, MechanismError> {
    let mut report = DeviationReport::new(Property::NonSensitivity, mech.name(), inst);
    let runner = ClassicalRunner {
        items: inst.items,
        mech,
    };
    let truthful = runner.run(&inst.truth)?;
    for w in truthful.winners() {
        let v = inst.truth.valuation(w).expect("winners bid");
        let r = inst.truth.reported_neighbours(w).clone();
        for dev in policy.value_deviations(w, &inst.truth).into_iter().skip(1) {
            let gp = deviate(&inst.truth, w, dev.clone(), r.clone());
            let out = runner.run(&gp)?;
            report.deviations_checked += 1;
            if !out.bundle(w).is_empty() && out.allocation != truthful.allocation {
                return Ok(report.fail(Violation {
                    buyer: Some(w),
                    truthful_utility: truthful.utility(w, v),
                    deviating_utility: out.utility(w, v),
                    detail: format!(
                        "winner {w} reporting {} keeps {} but allocation moves from {:?} to {:?}",
                        serde_json::to_string(&dev).unwrap_or_default(),
                        out.bundle(w),
                        truthful.allocation,
                        out.allocation
                    ),
                    profile: gp,
                }));
            }
        }
    }
    Ok(report)
}

/// Re-runs a failed IC or IR report and returns the recomputed
/// `(truthful, deviating)` utilities of the reported buyer.
pub fn replay(
    runner: &dyn Runner,
    inst: &Instance,
    report: &DeviationReport,
) -> Result<Option<(Money, Money)>, MechanismError> {
    let Some(v) = &report.violation else {
        return Ok(None);
    };
    let Some(id) = v.buyer else {
        return Ok(None);
    };
    let truth_v = inst.truth.valuation(id).expect("violation names a bidder");
    let base = runner.run(&inst.truth)?.utility(id, truth_v);
    let dev = runner.run(&v.profile)?.utility(id, truth_v);
    Ok(Some((base, dev)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{Los, SecondPrice};

    #[test]
    fn random_instances_are_deterministic_and_bounded() {
        let cfg = InstanceConfig::new(InstanceModel::SingleMinded, 12, (1, 4));
        for seed in 0..50 {
            let a = random_instance(seed, &cfg);
            assert_eq!(a, random_instance(seed, &cfg));
            assert!(a.net.buyer_count() <= 12 && (1..=4).contains(&a.items));
            assert!(!a.net.seller_neighbours().is_empty());
            for b in a.net.buyers() {
                assert!(a.net.neighbours(*b).len() <= 4);
                assert!(!a.net.neighbours(*b).contains(&a.net.seller()));
            }
            assert!(a.truth.respects(&a.net));
        }
    }

    #[test]
    fn deviation_sets() {
        let cfg = InstanceConfig::new(InstanceModel::SingleMinded, 6, (2, 2));
        let inst = random_instance(3, &cfg);
        let id = *inst.net.buyers().iter().next().unwrap();
        let p = DeviationPolicy::meta();
        let vals = p.value_deviations(id, &inst.truth);
        assert_eq!(&vals[0], inst.truth.valuation(id).unwrap());
        let own = inst
            .truth
            .valuation(id)
            .unwrap()
            .as_single_minded()
            .unwrap()
            .0;
        assert!(vals.iter().all(|v| v.as_single_minded().unwrap().0 == own));
        let nbrs = p.neighbour_deviations(id, &inst.truth);
        assert_eq!(nbrs.len(), 1 << inst.truth.reported_neighbours(id).len());
        let c = DeviationPolicy::classical();
        assert_eq!(c.neighbour_deviations(id, &inst.truth).len(), 1);
        assert!(c.value_deviations(id, &inst.truth).len() >= 3);
    }

    #[test]
    fn sampled_subsets_when_many_neighbours() {
        let net = SocialNetwork::from_edges(
            NodeId(0),
            (1..=7).map(NodeId),
            std::iter::once((NodeId(0), NodeId(1))).chain((2..=7).map(|j| (NodeId(1), NodeId(j)))),
        )
        .unwrap();
        let vals = (1..=7)
            .map(|i| (NodeId(i), ValuationFn::UnitDemand { items: 1, value: 1 }))
            .collect();
        let gp = GlobalProfile::truthful(&net, vals);
        let subsets = DeviationPolicy::meta().neighbour_deviations(NodeId(1), &gp);
        assert!(subsets.len() <= 18 && subsets.len() >= 3);
        assert!(subsets
            .iter()
            .all(|s| s.is_subset(gp.reported_neighbours(NodeId(1)))));
    }

    #[test]
    fn second_price_is_ic_on_small_instances() {
        let cfg = InstanceConfig::new(InstanceModel::UnitDemand, 6, (1, 1));
        for seed in 0..20 {
            let inst = random_instance(seed, &cfg);
            let r = ClassicalRunner {
                items: 1,
                mech: &SecondPrice,
            };
            let rep = check_ic(&r, &inst, &DeviationPolicy::classical()).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(check_ir(&r, &inst).unwrap().passed);
            assert!(check_nd(&r, &inst).unwrap().passed);
        }
    }

    #[test]
    fn los_non_sensitive_on_small_instances() {
        let cfg = InstanceConfig::new(InstanceModel::SingleMinded, 8, (1, 4));
        for seed in 0..30 {
            let inst = random_instance(seed, &cfg);
            let rep = check_non_sensitivity(&Los, &inst, &DeviationPolicy::meta()).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn empty_instance_passes_vacuously() {
        let net = SocialNetwork::star(NodeId(0), []);
        let inst = Instance::new(0, 1, net, BTreeMap::new());
        let r = ClassicalRunner {
            items: 1,
            mech: &SecondPrice,
        };
        assert!(check_ir(&r, &inst).unwrap().passed);
        assert!(check_nd(&r, &inst).unwrap().passed);
        let rep = check_ic(&r, &inst, &DeviationPolicy::meta()).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.deviations_checked, 0);
    }
}
