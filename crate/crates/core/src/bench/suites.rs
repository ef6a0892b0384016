//! Named check suites shared by the `check` command and the acceptance
//! tests. Each suite returns one [`SuiteRow`] per mechanism or
//! configuration it covers.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{draw_coins, ClassicalMechanism, MechanismKind};
use crate::error::{BenchError, MechanismError};
use crate::lpsolve::{build_config_lp, certify, solve};
use crate::meta::{run_meta, ExhaustionRule, MetaKind};
use crate::props::{
    check_ic, check_ir, check_nd, check_non_sensitivity, random_instance, DeviationPolicy,
    DeviationReport, Instance, InstanceConfig, InstanceModel, MetaRunner,
};
use crate::valuation::{Bundle, ValuationFn};

use super::repro::dns_example;
use super::{
    baseline_all, baseline_first, make_mechanism, mean_sw_rv, run_scenario, write_csv,
    NetworkSource, Scenario, Stack,
};

pub const SUITES: [&str; 9] = [
    "proposition",
    "ic",
    "dns",
    "non-sensitivity",
    "welfare",
    "lp",
    "star",
    "ordering",
    "determinism",
];

/// Instance count used when the caller does not choose one.
pub fn default_seeds(suite: &str) -> usize {
    match suite {
        "ic" | "welfare" => 200,
        "non-sensitivity" => 500,
        "ordering" => 20,
        "proposition" | "determinism" => 1,
        _ => 100,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub suite: String,
    pub target: String,
    pub instances: usize,
    /// Deviations (or comparisons) examined in total.
    pub checked: usize,
    pub failures: usize,
    pub passed: bool,
    pub note: String,
    /// First failing report, if any.
    pub report: Option<DeviationReport>,
    pub elapsed_ms: u128,
}

impl SuiteRow {
    fn new(suite: &str, target: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            target: target.into(),
            instances: 0,
            checked: 0,
            failures: 0,
            passed: true,
            note: String::new(),
            report: None,
            elapsed_ms: 0,
        }
    }
}

pub fn run_suite(name: &str, seeds: usize) -> Result<Vec<SuiteRow>, BenchError> {
    match name {
        "proposition" => proposition_suite(),
        "ic" => ic_suite(seeds),
        "dns" => dns_suite(seeds),
        "non-sensitivity" => non_sensitivity_suite(seeds),
        "welfare" => welfare_suite(seeds),
        "lp" => lp_suite(seeds),
        "star" => star_suite(seeds),
        "ordering" => ordering_suite(seeds),
        "determinism" => determinism_suite(),
        other => Err(BenchError::Invalid(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

/// Per-instance result: checks performed and the first failing report.
type Probe = (usize, Option<(u64, String, Option<DeviationReport>)>);

/// Runs `probe` on seeds `0..seeds` in parallel and folds the results in
/// seed order.
fn sweep<F>(suite: &str, target: String, seeds: usize, probe: F) -> Result<SuiteRow, BenchError>
where
    F: Fn(u64) -> Result<Probe, MechanismError> + Sync,
{
    let start = Instant::now();
    let results = (0..seeds as u64)
        .into_par_iter()
        .map(&probe)
        .collect::<Result<Vec<_>, _>>()?;
    let mut row = SuiteRow::new(suite, target);
    row.instances = seeds;
    for (checked, fail) in results {
        row.checked += checked;
        if let Some((seed, detail, report)) = fail {
            row.failures += 1;
            if row.report.is_none() && row.note.is_empty() {
                row.note = format!("seed {seed}: {detail}");
                row.report = report;
            }
        }
    }
    row.passed = row.failures == 0;
    row.elapsed_ms = start.elapsed().as_millis();
    Ok(row)
}

fn first_failure(reports: Vec<DeviationReport>) -> (usize, Option<DeviationReport>) {
    let checked = reports.iter().map(|r| r.deviations_checked.max(1)).sum();
    (checked, reports.into_iter().find(|r| !r.passed))
}

fn describe(r: &DeviationReport) -> String {
    let detail = r
        .violation
        .as_ref()
        .map_or(String::new(), |v| v.detail.clone());
    format!("{} {} violated: {detail}", r.mechanism, r.property)
}

/// IC, IR and ND of `runner` on one instance.
fn ic_ir_nd(
    runner: &MetaRunner<'_>,
    inst: &Instance,
    policy: &DeviationPolicy,
) -> Result<Probe, MechanismError> {
    let (checked, fail) = first_failure(vec![
        check_ic(runner, inst, policy)?,
        check_ir(runner, inst)?,
        check_nd(runner, inst)?,
    ]);
    Ok((checked, fail.map(|r| (inst.seed, describe(&r), Some(r)))))
}

fn proposition_suite() -> Result<Vec<SuiteRow>, BenchError> {
    let start = Instant::now();
    let r = dns_example()?;
    let mut row = SuiteRow::new("proposition", "msn:dns, msn_m:dns");
    row.instances = 1;
    row.checked = r.msn_ic.deviations_checked + r.msn_m_ic.deviations_checked;
    row.passed = r.matches_expected();
    row.failures = usize::from(!row.passed);
    row.note = format!(
        "truthful u_a = {}, deviating u_a = {} (pays {}); msn IC {}, msn_m IC {}",
        r.truthful_utility,
        r.deviating_utility,
        r.deviating_payment,
        if r.msn_ic.passed { "pass" } else { "violated" },
        if r.msn_m_ic.passed {
            "pass"
        } else {
            "violated"
        },
    );
    row.elapsed_ms = start.elapsed().as_millis();
    Ok(vec![row])
}

/// Configurations of the lifted-mechanism IC suite: mechanism, valuation
/// shape and item range.
pub fn ic_configs() -> [(MechanismKind, InstanceModel, (usize, usize)); 3] {
    [
        (
            MechanismKind::SecondPrice,
            InstanceModel::UnitDemand,
            (1, 1),
        ),
        (MechanismKind::Mpa, InstanceModel::UnitDemand, (1, 4)),
        (MechanismKind::Los, InstanceModel::SingleMinded, (1, 4)),
    ]
}

pub fn ic_suite(seeds: usize) -> Result<Vec<SuiteRow>, BenchError> {
    ic_configs()
        .into_iter()
        .map(|(kind, model, items)| {
            let cfg = InstanceConfig::new(model, 12, items);
            let mech = make_mechanism(kind, Ratio::new(1, 100), None)?;
            sweep("ic", format!("msn:{kind}"), seeds, |seed| {
                let inst = random_instance(seed, &cfg);
                let runner = MetaRunner {
                    kind: MetaKind::Msn,
                    rule: ExhaustionRule::default(),
                    net: &inst.net,
                    items: inst.items,
                    mech: mech.as_ref(),
                };
                let policy = DeviationPolicy {
                    seed,
                    ..DeviationPolicy::meta()
                };
                ic_ir_nd(&runner, &inst, &policy)
            })
        })
        .collect()
}

/// MetaMSN-m over DNS with coins drawn once per instance and held fixed
/// across the truthful and deviating runs.
pub fn dns_suite(seeds: usize) -> Result<Vec<SuiteRow>, BenchError> {
    Ok(vec![dns_sweep(seeds, Ratio::new(1, 100))?])
}

/// One row of [`dns_suite`] at a given `eps`.
pub fn dns_sweep(seeds: usize, eps: Ratio<i64>) -> Result<SuiteRow, BenchError> {
    let cfg = InstanceConfig::new(InstanceModel::Monotone, 12, (1, 4));
    sweep("dns", format!("msn_m:dns eps={eps}"), seeds, |seed| {
        let inst = random_instance(seed, &cfg);
        let coins = draw_coins(seed, inst.net.buyers().iter().copied(), eps);
        let mech = make_mechanism(MechanismKind::Dns, eps, Some(coins))?;
        let runner = MetaRunner {
            kind: MetaKind::MsnM,
            rule: ExhaustionRule::default(),
            net: &inst.net,
            items: inst.items,
            mech: mech.as_ref(),
        };
        let policy = DeviationPolicy {
            seed,
            ..DeviationPolicy::meta()
        };
        ic_ir_nd(&runner, &inst, &policy)
    })
}

/// LOS, second price and MPA must be non-sensitive; DNS must not be, and
/// its row passes once a counterexample is found.
pub fn non_sensitivity_suite(seeds: usize) -> Result<Vec<SuiteRow>, BenchError> {
    let eps = Ratio::new(1, 2);
    let configs = [
        (MechanismKind::Los, InstanceModel::SingleMinded, (1, 4)),
        (
            MechanismKind::SecondPrice,
            InstanceModel::UnitDemand,
            (1, 1),
        ),
        (MechanismKind::Mpa, InstanceModel::UnitDemand, (1, 4)),
        (MechanismKind::Dns, InstanceModel::Monotone, (1, 4)),
    ];
    configs
        .into_iter()
        .map(|(kind, model, items)| {
            let cfg = InstanceConfig::new(model, 8, items);
            let mut row = sweep("non-sensitivity", kind.to_string(), seeds, |seed| {
                let inst = random_instance(seed, &cfg);
                let coins = (kind == MechanismKind::Dns)
                    .then(|| draw_coins(seed, inst.net.buyers().iter().copied(), eps));
                let mech = make_mechanism(kind, eps, coins)?;
                // value misreports only: a single-minded winner keeps her demand
                let policy = DeviationPolicy {
                    seed,
                    neighbours: false,
                    ..DeviationPolicy::meta()
                };
                let r = check_non_sensitivity(mech.as_ref(), &inst, &policy)?;
                let checked = r.deviations_checked;
                Ok((checked, (!r.passed).then(|| (seed, describe(&r), Some(r)))))
            })?;
            if kind == MechanismKind::Dns {
                row.target = format!("dns eps={eps} (counterexample expected)");
                row.passed = row.failures > 0;
                if !row.passed {
                    row.note = "no counterexample found".into();
                }
            }
            Ok(row)
        })
        .collect()
}

/// Welfare of each meta-mechanism over brute-force VCG against VCG on the
/// seller's neighbours.
pub fn welfare_suite(seeds: usize) -> Result<Vec<SuiteRow>, BenchError> {
    let cfg = InstanceConfig::new(InstanceModel::Monotone, 8, (1, 4));
    let vcg = make_mechanism(MechanismKind::BruteVcg, Ratio::new(1, 2), None)?;
    [MetaKind::Msn, MetaKind::MsnM]
        .into_iter()
        .map(|kind| {
            sweep(
                "welfare",
                format!("{kind}:brute_vcg >= first:brute_vcg"),
                seeds,
                |seed| {
                    let inst = random_instance(seed, &cfg);
                    let vals = inst.valuations();
                    let first = baseline_first(&inst.net, &inst.truth, vcg.as_ref(), inst.items)?
                        .social_welfare(&vals);
                    let (o, _) = run_meta(
                        kind,
                        ExhaustionRule::default(),
                        &inst.net,
                        &inst.truth,
                        inst.items,
                        vcg.as_ref(),
                    )?;
                    let sw = o.social_welfare(&vals);
                    Ok((
                        1,
                        (sw < first).then(|| (seed, format!("SW {sw} < FIRST {first}"), None)),
                    ))
                },
            )
        })
        .collect()
}

/// The LP optimum bounds the integral optimum from above and carries a
/// valid dual certificate.
pub fn lp_suite(seeds: usize) -> Result<Vec<SuiteRow>, BenchError> {
    let cfg = InstanceConfig::new(InstanceModel::Monotone, 10, (1, 5));
    let vcg = make_mechanism(MechanismKind::BruteVcg, Ratio::new(1, 2), None)?;
    let mut rows = vec![sweep(
        "lp",
        "random configuration LPs".to_string(),
        seeds,
        |seed| {
            let inst = random_instance(seed, &cfg);
            let vals = inst.valuations();
            let buyers: Vec<_> = vals.iter().map(|(&id, v)| (id, v)).collect();
            let lp = build_config_lp(Bundle::full(inst.items), &buyers)?;
            let sol = solve(&lp)?;
            let integral =
                baseline_all(&inst.truth, vcg.as_ref(), inst.items)?.social_welfare(&vals);
            let fail = if !certify(&lp, &sol) {
                Some("dual certificate rejected".to_string())
            } else if sol.optimum < BigRational::from_integer(BigInt::from(integral)) {
                Some(format!(
                    "LP optimum {} below integral optimum {integral}",
                    sol.optimum
                ))
            } else {
                None
            };
            Ok((1, fail.map(|d| (seed, d, None))))
        },
    )?];

    let start = Instant::now();
    let mut row = SuiteRow::new("lp", "pair cover");
    let pair = |items: &[usize]| ValuationFn::SingleMinded {
        demand: Bundle::from_items(3, items).expect("items within width"),
        value: 1,
    };
    let vals = [pair(&[0, 1]), pair(&[1, 2]), pair(&[0, 2])];
    let buyers: Vec<_> = vals
        .iter()
        .enumerate()
        .map(|(k, v)| (crate::netgraph::NodeId(k as u32 + 1), v))
        .collect();
    let sol = build_config_lp(Bundle::full(3), &buyers)
        .and_then(|lp| solve(&lp))
        .map_err(MechanismError::from)?;
    row.instances = 1;
    row.checked = 1;
    row.passed = (sol.optimum_f64() - 1.5).abs() <= 1e-9;
    row.failures = usize::from(!row.passed);
    row.note = format!("optimum {}", sol.optimum);
    row.elapsed_ms = start.elapsed().as_millis();
    rows.push(row);
    Ok(rows)
}

/// With the seller linked to every buyer the meta-mechanisms should match
/// the classical mechanism's welfare and revenue.
pub fn star_suite(seeds: usize) -> Result<Vec<SuiteRow>, BenchError> {
    let eps = Ratio::new(1, 2);
    let model = |kind| match kind {
        MechanismKind::SecondPrice => (InstanceModel::UnitDemand, 10, (1, 1)),
        MechanismKind::Mpa => (InstanceModel::UnitDemand, 10, (1, 4)),
        MechanismKind::Los => (InstanceModel::SingleMinded, 10, (1, 4)),
        MechanismKind::BruteVcg | MechanismKind::Dns => (InstanceModel::Monotone, 8, (1, 4)),
    };
    let mut pairs: Vec<(MetaKind, MechanismKind)> = [
        MechanismKind::SecondPrice,
        MechanismKind::Mpa,
        MechanismKind::Los,
    ]
    .into_iter()
    .map(|k| (MetaKind::Msn, k))
    .collect();
    pairs.extend(MechanismKind::ALL.into_iter().map(|k| (MetaKind::MsnM, k)));
    pairs
        .into_iter()
        .map(|(meta, kind)| {
            let (m, n, items) = model(kind);
            let cfg = InstanceConfig::new(m, n, items);
            sweep("star", format!("{meta}:{kind}"), seeds, |seed| {
                let inst = random_instance(seed, &cfg).as_star();
                let coins = (kind == MechanismKind::Dns)
                    .then(|| draw_coins(seed, inst.net.buyers().iter().copied(), eps));
                let mech = make_mechanism(kind, eps, coins)?;
                Ok((
                    1,
                    star_mismatch(meta, mech.as_ref(), &inst)?.map(|d| (seed, d, None)),
                ))
            })
        })
        .collect()
}

fn star_mismatch(
    meta: MetaKind,
    mech: &dyn ClassicalMechanism,
    inst: &Instance,
) -> Result<Option<String>, MechanismError> {
    let vals = inst.valuations();
    let base = baseline_all(&inst.truth, mech, inst.items)?;
    let (o, _) = run_meta(
        meta,
        ExhaustionRule::default(),
        &inst.net,
        &inst.truth,
        inst.items,
        mech,
    )?;
    let (sw, rv) = (o.social_welfare(&vals), o.revenue());
    let (sw0, rv0) = (base.social_welfare(&vals), base.revenue());
    Ok((sw != sw0 || rv != rv0).then(|| format!("SW/RV {sw}/{rv} vs classical {sw0}/{rv0}")))
}

/// The network used by the ordering suite.
pub fn ordering_scenario(items: usize, repeats: usize) -> Scenario {
    let mut sc = Scenario::new(
        NetworkSource::PreferentialAttachment { n: 1000, k: 3 },
        items,
        MechanismKind::Los,
    );
    sc.seed = 2024;
    sc.repeats = Some(repeats);
    sc
}

/// Mean welfare and revenue orderings on a 1000-node preferential
/// attachment network with LOS: FIRST below both meta-mechanisms, both
/// below ALL.
pub fn ordering_suite(repeats: usize) -> Result<Vec<SuiteRow>, BenchError> {
    [10, 15, 20]
        .into_iter()
        .map(|m| {
            let start = Instant::now();
            let sc = ordering_scenario(m, repeats);
            let recs = run_scenario(&sc)?;
            let mean = |stack: Stack| {
                mean_sw_rv(&recs, &stack.label(sc.mechanism)).expect("stack is in the scenario")
            };
            let msn = mean(Stack::Meta(MetaKind::Msn));
            let msn_m = mean(Stack::Meta(MetaKind::MsnM));
            let all = mean(Stack::All);
            let first = mean(Stack::First);
            let mut problems = Vec::new();
            for (metric, pick) in [("SW", 0usize), ("RV", 1usize)] {
                let get = |t: (f64, f64)| if pick == 0 { t.0 } else { t.1 };
                for (label, v) in [("msn", msn), ("msn_m", msn_m)] {
                    if get(first) > get(v) {
                        problems.push(format!("{metric}: FIRST {:.0} > {label} {:.0}", get(first), get(v)));
                    }
                    if get(v) > get(all) {
                        problems.push(format!("{metric}: {label} {:.0} > ALL {:.0}", get(v), get(all)));
                    }
                }
            }
            let gap = |a: f64, b: f64| if b == 0.0 { 0.0 } else { 100.0 * (a - b) / b };
            let mut row = SuiteRow::new("ordering", format!("los m={m}"));
            row.instances = repeats;
            row.checked = 8;
            row.failures = problems.len();
            row.passed = problems.is_empty();
            row.note = if problems.is_empty() {
                format!(
                    "mean SW first/msn/msn_m/all = {:.0}/{:.0}/{:.0}/{:.0}; RV = {:.0}/{:.0}/{:.0}/{:.0}; \
                     msn vs msn_m: SW {:+.2}%, RV {:+.2}%",
                    first.0, msn.0, msn_m.0, all.0, first.1, msn.1, msn_m.1, all.1,
                    gap(msn.0, msn_m.0),
                    gap(msn.1, msn_m.1)
                )
            } else {
                problems.join("; ")
            };
            row.elapsed_ms = start.elapsed().as_millis();
            Ok(row)
        })
        .collect()
}

/// Scenarios exercised by the determinism suite.
pub fn determinism_scenarios() -> Vec<Scenario> {
    let mut a = Scenario::new(
        NetworkSource::ErdosRenyi { n: 300, p: 0.02 },
        8,
        MechanismKind::Los,
    );
    a.seed = 5;
    a.repeats = Some(6);
    let mut b = Scenario::new(
        NetworkSource::PreferentialAttachment { n: 200, k: 2 },
        4,
        MechanismKind::Dns,
    );
    b.seed = 6;
    b.repeats = Some(6);
    b.valuation = crate::valuation::ValuationModel::Monotone { max_step: 1000 };
    vec![a, b]
}

pub fn scenario_csv(sc: &Scenario) -> Result<Vec<u8>, BenchError> {
    let mut buf = Vec::new();
    write_csv(&run_scenario(sc)?, &mut buf)?;
    Ok(buf)
}

pub fn determinism_suite() -> Result<Vec<SuiteRow>, BenchError> {
    determinism_scenarios()
        .into_iter()
        .map(|sc| {
            let start = Instant::now();
            let first = scenario_csv(&sc)?;
            let second = scenario_csv(&sc)?;
            let mut row = SuiteRow::new(
                "determinism",
                format!("{} {} m={}", sc.network, sc.mechanism, sc.items),
            );
            row.instances = 2;
            row.checked = first.len();
            row.passed = first == second;
            row.failures = usize::from(!row.passed);
            row.note = format!(
                "{} bytes, {} rows",
                first.len(),
                first.iter().filter(|&&c| c == b'\n').count() - 1
            );
            row.elapsed_ms = start.elapsed().as_millis();
            Ok(row)
        })
        .collect()
}
