//! Documented cases where a lifted mechanism loses a property, kept as
//! regression tests so the counterexamples stay reproducible.

use std::collections::BTreeSet;

use num_rational::Ratio;

use netmech::bench::suites::dns_sweep;
use netmech::bench::{baseline_first, make_mechanism};
use netmech::classical::{Los, MechanismKind};
use netmech::meta::{run_meta, ExhaustionRule, MetaKind};
use netmech::props::{
    check_ic, random_instance, replay, DeviationPolicy, InstanceConfig, InstanceModel, MetaRunner,
};
use netmech::NodeId;

/// Buyer 1 hides its only neighbour, loses the priority tie-break, and a
/// different buyer is committed first. Its critical price falls from 46 to
/// 35 once the competing pair demands are no longer available.
#[test]
fn msn_over_los_priority_manipulation() {
    let inst = random_instance(
        1,
        &InstanceConfig::new(InstanceModel::SingleMinded, 12, (1, 4)),
    );
    for rule in [ExhaustionRule::Permanent, ExhaustionRule::Recomputed] {
        let runner = MetaRunner {
            kind: MetaKind::Msn,
            rule,
            net: &inst.net,
            items: inst.items,
            mech: &Los,
        };
        let report = check_ic(&runner, &inst, &DeviationPolicy::meta()).unwrap();
        let v = report.violation.as_ref().expect("violation");
        assert_eq!(v.buyer, Some(NodeId(1)));
        assert_eq!((v.truthful_utility, v.deviating_utility), (0, 11));
        assert!(v.profile.reported_neighbours(NodeId(1)).is_empty());
        assert_eq!(replay(&runner, &inst, &report).unwrap(), Some((0, 11)));

        // MetaMSN-m commits every potential winner at once and is unaffected
        let runner = MetaRunner {
            kind: MetaKind::MsnM,
            ..runner
        };
        assert!(
            check_ic(&runner, &inst, &DeviationPolicy::meta())
                .unwrap()
                .passed
        );
    }
}

/// With exhaustion made permanent, a buyer blocked early can never win,
/// and MetaMSN over VCG may end below the welfare of VCG on the seller's
/// neighbours. The recomputed rule restores the bound on the same seeds.
#[test]
fn permanent_exhaustion_breaks_the_welfare_bound() {
    let cfg = InstanceConfig::new(InstanceModel::Monotone, 8, (1, 4));
    let vcg = make_mechanism(MechanismKind::BruteVcg, Ratio::new(1, 2), None).unwrap();
    let mut below = BTreeSet::new();
    for seed in 0..200 {
        let inst = random_instance(seed, &cfg);
        let vals = inst.valuations();
        let first = baseline_first(&inst.net, &inst.truth, vcg.as_ref(), inst.items)
            .unwrap()
            .social_welfare(&vals);
        let sw = |rule| {
            run_meta(
                MetaKind::Msn,
                rule,
                &inst.net,
                &inst.truth,
                inst.items,
                vcg.as_ref(),
            )
            .unwrap()
            .0
            .social_welfare(&vals)
        };
        if sw(ExhaustionRule::Permanent) < first {
            below.insert(seed);
            assert!(sw(ExhaustionRule::Recomputed) >= first, "seed {seed}");
        }
    }
    assert!(!below.is_empty());
}

#[test]
fn msn_m_over_dns_with_many_stat_buyers() {
    let row = dns_sweep(25, Ratio::new(1, 2)).unwrap();
    assert!(row.passed, "{}", row.note);
}
