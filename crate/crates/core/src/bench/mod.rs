//! Experiment harness: scenarios, the ALL and FIRST baselines, repeated
//! seeded runs and CSV output.

mod network;
pub mod repro;
mod scenario;
pub mod suites;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{
    draw_coins, mix_seed, Bids, BruteVcg, ClassicalMechanism, Dns, Los, MechanismKind, Mpa,
    Outcome, SecondPrice,
};
use crate::error::{BenchError, MechanismError};
use crate::meta::run_meta;
use crate::netgraph::{GlobalProfile, NodeId, SocialNetwork};
use crate::valuation::{Bundle, Money, ValuationFn, ValuationModelConfig};

pub use network::{erdos_renyi, load_network, preferential_attachment, MAX_SYNTHETIC_NODES};
pub use scenario::{NetworkSource, Scenario, Stack, MAX_DNS_ITEMS};

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub seller: NodeId,
    pub mechanism: String,
    pub m: usize,
    pub sw: Money,
    pub revenue: Money,
    pub joined: usize,
    pub winners: usize,
    pub iterations: usize,
    pub ms: u64,
}

pub const CSV_HEADER: &str = "run_id,seller,mechanism,m,sw,revenue,joined,winners,iterations,ms";

/// Instantiates a classical mechanism. DNS needs coins.
pub fn make_mechanism(
    kind: MechanismKind,
    eps: Ratio<i64>,
    coins: Option<crate::classical::CoinRecord>,
) -> Result<Box<dyn ClassicalMechanism>, MechanismError> {
    Ok(match kind {
        MechanismKind::SecondPrice => Box::new(SecondPrice),
        MechanismKind::Mpa => Box::new(Mpa),
        MechanismKind::Los => Box::new(Los),
        MechanismKind::BruteVcg => Box::new(BruteVcg),
        MechanismKind::Dns => Box::new(Dns::new(coins.unwrap_or_default(), eps)?),
    })
}

fn bids_for<'a>(gp: &'a GlobalProfile, keep: impl Fn(NodeId) -> bool) -> Bids<'a> {
    gp.iter()
        .filter(|(id, _)| keep(*id))
        .map(|(id, p)| (id, &p.valuation))
        .collect()
}

/// The mechanism over every buyer's valuation with all items available.
pub fn baseline_all(
    gp: &GlobalProfile,
    mech: &dyn ClassicalMechanism,
    m: usize,
) -> Result<Outcome, MechanismError> {
    mech.outcome(Bundle::full(m), &bids_for(gp, |_| true))
}

/// The mechanism over the seller's neighbours only.
pub fn baseline_first(
    net: &SocialNetwork,
    gp: &GlobalProfile,
    mech: &dyn ClassicalMechanism,
    m: usize,
) -> Result<Outcome, MechanismError> {
    let first = net.seller_neighbours();
    mech.outcome(Bundle::full(m), &bids_for(gp, |id| first.contains(&id)))
}

/// Repeats used when the scenario does not set them: `ceil(|V| / 20)`.
pub fn default_repeats(nodes: usize) -> usize {
    nodes.div_ceil(20).max(1)
}

/// Runs every repeat of a scenario. Repeat `r` draws its seller, its
/// valuations and its coins from `mix_seed(seed, r)`; the network itself
/// depends on the master seed only.
pub fn run_scenario(sc: &Scenario) -> Result<Vec<RunRecord>, BenchError> {
    sc.validate()?;
    let graph = load_network(&sc.network, sc.symmetrize, mix_seed(sc.seed, u64::MAX))?;
    let nodes: Vec<NodeId> = graph.nodes().collect();
    if nodes.len() < 2 {
        return Err(BenchError::Invalid(
            "network needs at least two nodes".into(),
        ));
    }
    let repeats = sc.repeats.unwrap_or_else(|| default_repeats(nodes.len()));
    let per_repeat = (0..repeats)
        .into_par_iter()
        .map(|r| run_repeat(sc, &graph, &nodes, r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut records: Vec<RunRecord> = per_repeat.into_iter().flatten().collect();
    records.sort_by_key(|rec| rec.run_id);
    Ok(records)
}

fn run_repeat(
    sc: &Scenario,
    graph: &crate::netgraph::Graph,
    nodes: &[NodeId],
    r: usize,
) -> Result<Vec<RunRecord>, BenchError> {
    let stream = mix_seed(sc.seed, r as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    let seller = nodes[rng.random_range(0..nodes.len())];
    let net = graph.clone().with_seller(seller)?;
    let buyers: Vec<NodeId> = net.buyers().iter().copied().collect();
    let vc = ValuationModelConfig::new(sc.items, sc.valuation.clone(), stream);
    let vals: Vec<ValuationFn> = vc.generate_with(buyers.len(), &mut rng)?;
    let truth = GlobalProfile::truthful(&net, buyers.iter().copied().zip(vals).collect());
    let valuations = crate::meta::valuations_of(&truth);
    let coins = (sc.mechanism == MechanismKind::Dns)
        .then(|| draw_coins(mix_seed(stream, 1), buyers.iter().copied(), sc.eps));
    let mech = make_mechanism(sc.mechanism, sc.eps, coins)?;

    let mut out = Vec::with_capacity(sc.stack.len());
    for (k, &stack) in sc.stack.iter().enumerate() {
        let start = Instant::now();
        let (outcome, joined, iterations) = match stack {
            Stack::Meta(kind) => {
                let (o, t) = run_meta(kind, sc.rule, &net, &truth, sc.items, mech.as_ref())?;
                (o, t.explored.len(), t.iterations.len())
            }
            Stack::All => (
                baseline_all(&truth, mech.as_ref(), sc.items)?,
                buyers.len(),
                1,
            ),
            Stack::First => (
                baseline_first(&net, &truth, mech.as_ref(), sc.items)?,
                net.seller_neighbours().len(),
                1,
            ),
        };
        let ms = if sc.timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        let winners: BTreeSet<NodeId> = outcome.winners();
        out.push(RunRecord {
            run_id: r * sc.stack.len() + k,
            seller,
            mechanism: stack.label(sc.mechanism),
            m: sc.items,
            sw: outcome.social_welfare(&valuations),
            revenue: outcome.revenue(),
            joined,
            winners: winners.len(),
            iterations,
            ms,
        });
    }
    Ok(out)
}

/// Writes the records, sorted by run id, as CSV with LF line endings.
pub fn write_csv<W: Write>(records: &[RunRecord], w: W) -> Result<(), BenchError> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|rec| rec.run_id);
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(CSV_HEADER.split(','))?;
    for rec in sorted {
        wtr.serialize(rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<(), BenchError> {
    let file = std::fs::File::create(path).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(records, std::io::BufWriter::new(file))
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>, BenchError> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.deserialize().collect::<Result<Vec<RunRecord>, _>>()?)
}

/// Mean SW and RV of the records with the given label.
pub fn mean_sw_rv(records: &[RunRecord], label: &str) -> Option<(f64, f64)> {
    let rows: Vec<&RunRecord> = records.iter().filter(|r| r.mechanism == label).collect();
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    let sw = rows.iter().map(|r| r.sw as f64).sum::<f64>() / n;
    let rv = rows.iter().map(|r| r.revenue as f64).sum::<f64>() / n;
    Some((sw, rv))
}
