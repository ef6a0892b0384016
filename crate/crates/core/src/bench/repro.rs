//! Small worked examples with known answers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use serde::Serialize;

use crate::classical::{Bids, ClassicalMechanism, CoinRecord, Dns, Group, Los, Outcome};
use crate::error::MechanismError;
use crate::meta::{run_meta, ExhaustionRule, MetaKind, MetaTrace};
use crate::netgraph::{NodeId, SocialNetwork};
use crate::props::{check_ic, DeviationPolicy, DeviationReport, Instance, MetaRunner};
use crate::valuation::{Bundle, Money, ValuationFn};

pub const SELLER: NodeId = NodeId(0);
pub const A: NodeId = NodeId(1);
pub const B: NodeId = NodeId(2);
pub const C: NodeId = NodeId(3);

fn table(values: [Money; 4]) -> ValuationFn {
    ValuationFn::Table {
        items: 2,
        values: values.to_vec(),
    }
}

/// Three buyers and two items: `s -> a`, `s -> b`, `b -> c`.
pub fn dns_example_instance() -> Instance {
    let net = SocialNetwork::from_edges(SELLER, [A, B, C], [(SELLER, A), (SELLER, B), (B, C)])
        .expect("static network");
    let vals = BTreeMap::from([
        (A, table([0, 4, 0, 5])),
        (B, table([0, 0, 3, 3])),
        (C, table([0, 5, 0, 5])),
    ]);
    Instance::new(0, 2, net, vals)
}

/// Every buyer is `Fixed`, visiting in id order except that `c` goes
/// before `a` when they are the only two bidders.
pub fn dns_example_coins() -> CoinRecord {
    let mut coins = CoinRecord::new();
    for id in [A, B, C] {
        coins.assign(id, Group::Fixed, u64::from(id.0));
    }
    coins.with_override(vec![C, A])
}

/// DNS with the example coins and a per-item fixed price of 2.
pub fn dns_example_mechanism() -> Dns {
    Dns::new(dns_example_coins(), Ratio::new(1, 100))
        .expect("valid epsilon")
        .with_fixed_price(2)
}

/// `a`'s misreport: the pair is worth 7.
pub fn dns_example_misreport() -> ValuationFn {
    table([0, 4, 0, 7])
}

#[derive(Clone, Debug, Serialize)]
pub struct DnsExampleReport {
    pub truthful: MetaTrace,
    pub deviating: MetaTrace,
    pub truthful_utility: Money,
    pub deviating_utility: Money,
    pub deviating_bundle: Bundle,
    pub deviating_payment: Money,
    pub msn_m_truthful_utility: Money,
    pub msn_ic: DeviationReport,
    pub msn_m_ic: DeviationReport,
}

impl DnsExampleReport {
    /// The numbers the example is known to produce.
    pub fn matches_expected(&self) -> bool {
        let winners = |t: &MetaTrace| t.winners.clone();
        self.truthful_utility == 0
            && winners(&self.truthful) == [B, C]
            && self.deviating_utility == 1
            && self.deviating_bundle == Bundle::full(2)
            && self.deviating_payment == 4
            && winners(&self.deviating) == [A]
            && !self.msn_ic.passed
            && self
                .msn_ic
                .violation
                .as_ref()
                .is_some_and(|v| v.buyer == Some(A) && v.gap() == 1)
            && self.msn_m_ic.passed
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let name = |id: NodeId| match id {
            A => "a".to_string(),
            B => "b".to_string(),
            C => "c".to_string(),
            other => other.to_string(),
        };
        let names = |ids: &[NodeId]| ids.iter().map(|&i| name(i)).collect::<Vec<_>>().join(",");
        let trace = |s: &mut String, title: &str, t: &MetaTrace| {
            let _ = writeln!(s, "{title}");
            for (k, it) in t.iterations.iter().enumerate() {
                let prio: Vec<String> = it
                    .priorities
                    .iter()
                    .map(|&(i, p)| format!("{}:{p}", name(i)))
                    .collect();
                let _ = writeln!(
                    s,
                    "  iteration {}: avail {} explored {{{}}} potential {{{}}} priority [{}] selected {{{}}}",
                    k + 1,
                    it.avail,
                    names(&it.explored),
                    names(&it.potential),
                    prio.join(" "),
                    names(&it.selected)
                );
                for (&i, &x) in &it.sub_outcome.allocation {
                    let _ = writeln!(
                        s,
                        "    sub-run: {} gets {x} for {}",
                        name(i),
                        it.sub_outcome.payment(i)
                    );
                }
            }
            let _ = writeln!(s, "  winners {}", names(&t.winners));
        };
        let _ = writeln!(s, "network: s -> a, s -> b, b -> c; two items");
        let _ = writeln!(s, "values (1,0)/(0,1)/(1,1): a 4/0/5, b 0/3/3, c 5/0/5");
        let _ = writeln!(
            s,
            "coins: all Fixed, order a,b,c except c before a; fixed price 2"
        );
        let _ = writeln!(s);
        trace(&mut s, "MetaMSN o DNS, truthful:", &self.truthful);
        let _ = writeln!(s, "  u_a = {}", self.truthful_utility);
        trace(
            &mut s,
            "MetaMSN o DNS, a reports v_a(1,1) = 7:",
            &self.deviating,
        );
        let _ = writeln!(
            s,
            "  a gets {} for {}, u_a = {}",
            self.deviating_bundle, self.deviating_payment, self.deviating_utility
        );
        let _ = writeln!(
            s,
            "MetaMSN-m o DNS, truthful: u_a = {}",
            self.msn_m_truthful_utility
        );
        let _ = writeln!(s);
        for (title, r) in [
            ("MetaMSN o DNS", &self.msn_ic),
            ("MetaMSN-m o DNS", &self.msn_m_ic),
        ] {
            match &r.violation {
                Some(v) => {
                    let _ = writeln!(
                        s,
                        "check_ic {title}: FAIL after {} deviations: {} gains {} ({} -> {})",
                        r.deviations_checked,
                        v.buyer.map_or("-".into(), name),
                        v.gap(),
                        v.truthful_utility,
                        v.deviating_utility
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "check_ic {title}: PASS ({} deviations)",
                        r.deviations_checked
                    );
                }
            }
        }
        s
    }
}

/// Runs both meta-mechanisms with DNS on the three-buyer example, truthfully
/// and with `a`'s misreport, and checks IC on each.
pub fn dns_example() -> Result<DnsExampleReport, MechanismError> {
    let inst = dns_example_instance();
    let dns = dns_example_mechanism();
    let rule = ExhaustionRule::default();
    let va = inst.truth.valuation(A).expect("a bids").clone();

    let (o_truth, truthful) = run_meta(MetaKind::Msn, rule, &inst.net, &inst.truth, 2, &dns)?;
    let mut lie = inst.truth.clone();
    lie.get_mut(A).expect("a bids").valuation = dns_example_misreport();
    let (o_lie, deviating) = run_meta(MetaKind::Msn, rule, &inst.net, &lie, 2, &dns)?;
    let (o_m, _) = run_meta(MetaKind::MsnM, rule, &inst.net, &inst.truth, 2, &dns)?;

    let policy = DeviationPolicy::meta().with_extra(A, dns_example_misreport());
    let runner = |kind| MetaRunner {
        kind,
        rule,
        net: &inst.net,
        items: 2,
        mech: &dns,
    };
    let msn_ic = check_ic(&runner(MetaKind::Msn), &inst, &policy)?;
    let msn_m_ic = check_ic(&runner(MetaKind::MsnM), &inst, &policy)?;

    Ok(DnsExampleReport {
        truthful_utility: o_truth.utility(A, &va),
        deviating_utility: o_lie.utility(A, &va),
        deviating_bundle: o_lie.bundle(A),
        deviating_payment: o_lie.payment(A),
        msn_m_truthful_utility: o_m.utility(A, &va),
        truthful,
        deviating,
        msn_ic,
        msn_m_ic,
    })
}

/// Three single-minded buyers over three items:
/// `({1,2}, 10)`, `({2}, 4)`, `({3}, 3)`.
pub fn los_example_bids() -> Vec<(NodeId, ValuationFn)> {
    let sm = |items: &[usize], value| ValuationFn::SingleMinded {
        demand: Bundle::from_items(3, items).expect("items within width"),
        value,
    };
    vec![
        (NodeId(1), sm(&[0, 1], 10)),
        (NodeId(2), sm(&[1], 4)),
        (NodeId(3), sm(&[2], 3)),
    ]
}

pub fn los_example() -> Result<(Outcome, String), MechanismError> {
    let vals = los_example_bids();
    let bids: Bids = vals.iter().map(|(id, v)| (*id, v)).collect();
    let out = Los.outcome(Bundle::full(3), &bids)?;
    let truth: BTreeMap<NodeId, ValuationFn> = vals.iter().cloned().collect();
    let mut s = String::new();
    for (id, v) in &vals {
        let (demand, value) = v.as_single_minded().expect("single-minded");
        let bundle = out.bundle(*id);
        let got = if bundle.is_empty() {
            "nothing".to_string()
        } else {
            bundle.to_string()
        };
        let _ = writeln!(
            s,
            "buyer {id}: demands {demand} for {value}, gets {got}, pays {}",
            out.payment(*id)
        );
    }
    let _ = writeln!(
        s,
        "SW = {}, RV = {}",
        out.social_welfare(&truth),
        out.revenue()
    );
    Ok((out, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dns_example_numbers() {
        let r = dns_example().unwrap();
        assert!(r.matches_expected(), "{}", r.render());
        assert_eq!(r.msn_m_truthful_utility, 2);
        assert_eq!(r.truthful.iterations[0].priorities, [(A, 0), (B, 1)]);
    }

    #[test]
    fn los_example_numbers() {
        let (o, text) = los_example().unwrap();
        assert_eq!(o.payment(NodeId(1)), 8);
        assert_eq!(o.bundle(NodeId(2)), Bundle::empty(3));
        assert_eq!(o.payment(NodeId(3)), 0);
        assert!(text.contains("SW = 13, RV = 8"), "{text}");
    }
}
