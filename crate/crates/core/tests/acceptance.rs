//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 2 and 9 are known to fail for MetaMSN over LOS. For those the
//! harness prints FAIL and then checks that the failure is the documented
//! one: only the LOS row fails and its counterexample replays to the same
//! utility gap. Any other failure makes the process exit non-zero.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;

use netmech::bench::repro::dns_example;
use netmech::bench::suites::{
    determinism_suite, dns_sweep, ic_configs, ic_suite, lp_suite, non_sensitivity_suite,
    ordering_suite, star_suite, welfare_suite, SuiteRow,
};
use netmech::bench::{make_mechanism, run_scenario, write_csv};
use netmech::classical::MechanismKind;
use netmech::meta::{ExhaustionRule, MetaKind};
use netmech::props::{random_instance, replay, InstanceConfig, MetaRunner};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    passed: bool,
    summary: String,
    /// Whether a failure matches the documented, expected one.
    expected_failure: bool,
}

impl Verdict {
    fn from_rows(rows: &[SuiteRow], limit: Duration, elapsed: Duration) -> Self {
        let failing: Vec<String> = rows
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{} ({}/{}): {}", r.target, r.failures, r.instances, r.note))
            .collect();
        let in_time = elapsed <= limit;
        let mut summary = format!(
            "{} rows, {} checks, {:.1}s (limit {}s)",
            rows.len(),
            rows.iter().map(|r| r.checked).sum::<usize>(),
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !failing.is_empty() {
            summary.push_str("; failing: ");
            summary.push_str(&failing.join(" | "));
        }
        if !in_time {
            summary.push_str("; too slow");
        }
        Verdict {
            passed: failing.is_empty() && in_time,
            summary,
            expected_failure: false,
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn c1() -> Verdict {
    let (r, t) = timed(|| dns_example().expect("example runs"));
    let ok = r.matches_expected() && t < Duration::from_secs(1);
    Verdict {
        passed: ok,
        summary: format!(
            "MetaMSN truthful u_a = {}, misreport u_a = {} paying {} for {}; \
             MetaMSN IC {}, MetaMSN-m IC {}; {:.3}s",
            r.truthful_utility,
            r.deviating_utility,
            r.deviating_payment,
            r.deviating_bundle,
            if r.msn_ic.passed {
                "passes"
            } else {
                "violated by a (+1)"
            },
            if r.msn_m_ic.passed {
                "passes"
            } else {
                "violated"
            },
            t.as_secs_f64()
        ),
        expected_failure: false,
    }
}

/// The only failing row is `msn:los`, and its first counterexample replays
/// to the same gap.
fn los_ic_failure_is_documented(rows: &[SuiteRow]) -> bool {
    let failing: Vec<&SuiteRow> = rows.iter().filter(|r| !r.passed).collect();
    let [row] = failing.as_slice() else {
        return false;
    };
    if row.target != "msn:los" {
        return false;
    }
    let Some(report) = &row.report else {
        return false;
    };
    let Some(v) = &report.violation else {
        return false;
    };
    let (_, model, items) = ic_configs()[2];
    let inst = random_instance(report.instance.seed, &InstanceConfig::new(model, 12, items));
    let mech = make_mechanism(MechanismKind::Los, Ratio::new(1, 100), None).unwrap();
    let runner = MetaRunner {
        kind: MetaKind::Msn,
        rule: ExhaustionRule::default(),
        net: &inst.net,
        items: inst.items,
        mech: mech.as_ref(),
    };
    replay(&runner, &inst, report).unwrap() == Some((v.truthful_utility, v.deviating_utility))
}

fn c2() -> Verdict {
    let (rows, t) = timed(|| ic_suite(200).expect("suite runs"));
    let mut v = Verdict::from_rows(&rows, Duration::from_secs(120), t);
    v.expected_failure = !v.passed && los_ic_failure_is_documented(&rows);
    v
}

fn c3() -> Verdict {
    let (row, t) = timed(|| dns_sweep(100, Ratio::new(1, 100)).expect("suite runs"));
    Verdict::from_rows(&[row], Duration::from_secs(300), t)
}

fn c4() -> Verdict {
    let (rows, t) = timed(|| non_sensitivity_suite(500).expect("suite runs"));
    let mut v = Verdict::from_rows(&rows, Duration::from_secs(120), t);
    if let Some(dns) = rows.iter().find(|r| r.target.starts_with("dns")) {
        v.summary
            .push_str(&format!("; dns counterexample: {}", dns.note));
    }
    v
}

fn c5() -> Verdict {
    let (rows, t) = timed(|| welfare_suite(200).expect("suite runs"));
    Verdict::from_rows(&rows, Duration::from_secs(120), t)
}

fn c6() -> Verdict {
    let (rows, t) = timed(|| lp_suite(100).expect("suite runs"));
    Verdict::from_rows(&rows, Duration::from_secs(60), t)
}

fn c7() -> Verdict {
    let (rows, t) = timed(|| ordering_suite(20).expect("suite runs"));
    let mut v = Verdict::from_rows(&rows, Duration::from_secs(300), t);
    for r in &rows {
        v.summary
            .push_str(&format!("\n      {}: {}", r.target, r.note));
    }
    v
}

fn c8() -> Verdict {
    let (rows, t) = timed(|| determinism_suite().expect("suite runs"));
    let mut v = Verdict::from_rows(&rows, Duration::from_secs(300), t);
    // an independent third run of the first scenario through the public API
    let sc = &netmech::bench::suites::determinism_scenarios()[0];
    let csv = |recs: Vec<netmech::bench::RunRecord>| {
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        buf
    };
    let again = csv(run_scenario(sc).unwrap()) == csv(run_scenario(sc).unwrap());
    v.passed &= again;
    v
}

fn c9() -> Verdict {
    let (rows, t) = timed(|| star_suite(100).expect("suite runs"));
    let mut v = Verdict::from_rows(&rows, Duration::from_secs(300), t);
    let failing: Vec<&str> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.target.as_str())
        .collect();
    // a second sweep must report the same mismatches
    let again = star_suite(100).expect("suite runs");
    let same = rows
        .iter()
        .zip(&again)
        .all(|(a, b)| a.failures == b.failures && a.note == b.note);
    v.expected_failure = !v.passed && failing == ["msn:los"] && same;
    v
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 golden DNS counterexample", c1),
        ("2 MetaMSN IC/IR/ND over second_price, mpa, los", c2),
        ("3 MetaMSN-m over DNS, eps 0.01", c3),
        ("4 non-sensitivity", c4),
        ("5 welfare against FIRST with brute_vcg", c5),
        ("6 configuration LP", c6),
        ("7 experiment ordering", c7),
        ("8 determinism", c8),
        ("9 star-network reduction", c9),
    ];
    let mut unexpected = 0;
    let mut failed = 0;
    for (name, run) in criteria {
        let v = run();
        println!(
            "criterion {name}: {} - {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.summary
        );
        if !v.passed {
            failed += 1;
            if v.expected_failure {
                println!("      known failure, counterexample reproduced");
            } else {
                unexpected += 1;
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({unexpected} unexpected)",
        9 - failed
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
