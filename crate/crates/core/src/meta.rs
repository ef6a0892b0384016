//! Graph-exploration meta-mechanisms that run a classical mechanism on the
//! part of a social network explored so far.
//!
//! Both variants start from the seller's neighbours and repeatedly explore
//! the reported neighbours of buyers that are either winners or exhausted
//! (explored but not a potential winner). A potential winner keeps her
//! neighbours hidden until she is satisfied or exhausted.
//!
//! [`MetaKind::Msn`] then commits the classical outcome for one potential
//! winner per iteration, chosen by priority (most reported neighbours,
//! lowest id on ties). [`MetaKind::MsnM`] commits the outcome of every
//! potential winner at once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{Bids, ClassicalMechanism, Outcome};
use crate::error::MechanismError;
use crate::netgraph::{GlobalProfile, NodeId, SocialNetwork};
use crate::valuation::Bundle;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaKind {
    Msn,
    MsnM,
}

impl MetaKind {
    pub fn label(self) -> &'static str {
        match self {
            MetaKind::Msn => "msn",
            MetaKind::MsnM => "msn_m",
        }
    }
}

impl fmt::Display for MetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "msn" => Ok(MetaKind::Msn),
            "msn_m" | "msn-m" => Ok(MetaKind::MsnM),
            _ => Err(format!("unknown meta-mechanism {s:?}")),
        }
    }
}

/// How the potential-winner set treats buyers that were exhausted earlier.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExhaustionRule {
    /// An exhausted buyer stays exhausted: she still bids in every later
    /// classical run but is never a potential winner again.
    Permanent,
    /// The potential-winner set is exactly the classical winner set of each
    /// run. With mechanisms whose winners can change when others leave
    /// (LOS, VCG) an exhausted buyer may become a potential winner again.
    #[default]
    Recomputed,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ItemsExhausted,
    NoPotentialWinner,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    /// Residual items before this iteration's commitment.
    pub avail: Bundle,
    /// Explored buyers (seller excluded).
    pub explored: Vec<NodeId>,
    pub potential: Vec<NodeId>,
    pub exhausted: Vec<NodeId>,
    /// `(buyer, number of reported neighbours)` for every potential winner.
    pub priorities: Vec<(NodeId, usize)>,
    pub selected: Vec<NodeId>,
    /// Classical outcome over the explored non-winners.
    pub sub_outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaTrace {
    pub kind: MetaKind,
    pub rule: ExhaustionRule,
    pub items: usize,
    pub initial_potential: Vec<NodeId>,
    pub iterations: Vec<Iteration>,
    pub explored: Vec<NodeId>,
    pub marked: Vec<NodeId>,
    pub potential: Vec<NodeId>,
    /// Winners in order of selection.
    pub winners: Vec<NodeId>,
    /// Every buyer that was exhausted at some point.
    pub exhausted: Vec<NodeId>,
    pub final_avail: Bundle,
    pub termination: Termination,
    pub mechanism_calls: usize,
    pub outcome: Outcome,
}

struct Explorer<'a, M: ?Sized> {
    kind: MetaKind,
    rule: ExhaustionRule,
    net: &'a SocialNetwork,
    gp: &'a GlobalProfile,
    mech: &'a M,
    avail: Bundle,
    explored: BTreeSet<NodeId>,
    marked: BTreeSet<NodeId>,
    won: BTreeSet<NodeId>,
    exhausted: BTreeSet<NodeId>,
    ever_exhausted: BTreeSet<NodeId>,
    potential: BTreeSet<NodeId>,
    last: Option<(BTreeSet<NodeId>, Bundle)>,
    last_outcome: Outcome,
    calls: usize,
}

impl<M: ClassicalMechanism + ?Sized> Explorer<'_, M> {
    fn bids(&self, pool: &BTreeSet<NodeId>) -> Bids<'_> {
        pool.iter()
            .filter_map(|&id| self.gp.valuation(id).map(|v| (id, v)))
            .collect()
    }

    fn pool(&self) -> BTreeSet<NodeId> {
        self.explored
            .iter()
            .copied()
            .filter(|id| *id != self.net.seller() && !self.won.contains(id))
            .collect()
    }

    /// Recomputes the potential winners over `pool` and, when `register`
    /// is set, records every pool member outside them as exhausted. An
    /// unchanged input reuses the previous classical outcome.
    fn run_mechanism(
        &mut self,
        pool: BTreeSet<NodeId>,
        register: bool,
    ) -> Result<(), MechanismError> {
        let key = (pool, self.avail);
        if self.last.as_ref() != Some(&key) {
            let out = self.mech.outcome(self.avail, &self.bids(&key.0))?;
            self.calls += 1;
            let raw = out.winners();
            self.potential = match self.rule {
                ExhaustionRule::Permanent => raw.difference(&self.exhausted).copied().collect(),
                ExhaustionRule::Recomputed => raw,
            };
            self.last_outcome = out;
        }
        if register {
            let newly: BTreeSet<NodeId> = key.0.difference(&self.potential).copied().collect();
            self.ever_exhausted.extend(newly.iter().copied());
            self.exhausted = match self.rule {
                ExhaustionRule::Permanent => self.exhausted.union(&newly).copied().collect(),
                ExhaustionRule::Recomputed => newly,
            };
        }
        self.last = Some(key);
        Ok(())
    }

    fn stale(&self) -> bool {
        self.last.as_ref() != Some(&(self.pool(), self.avail))
    }

    /// Unmarked explored node that is the seller, a winner or not a
    /// potential winner; the seller first, then the lowest id.
    fn candidate(&self) -> Option<NodeId> {
        let s = self.net.seller();
        if self.explored.contains(&s) && !self.marked.contains(&s) {
            return Some(s);
        }
        self.explored.iter().copied().find(|i| {
            !self.marked.contains(i) && (self.won.contains(i) || !self.potential.contains(i))
        })
    }

    fn neighbours(&self, i: NodeId) -> Vec<NodeId> {
        let r = if i == self.net.seller() {
            self.net.seller_neighbours()
        } else {
            self.gp.reported_neighbours(i)
        };
        r.iter()
            .copied()
            .filter(|j| self.net.buyers().contains(j))
            .collect()
    }

    fn explore(&mut self) -> Result<(), MechanismError> {
        loop {
            if let Some(i) = self.candidate() {
                self.marked.insert(i);
                let new = self.neighbours(i);
                self.explored.extend(new);
                self.run_mechanism(self.pool(), true)?;
            } else if self.stale() {
                self.run_mechanism(self.pool(), true)?;
            } else {
                return Ok(());
            }
        }
    }
}

/// Runs a meta-mechanism over `items` items. Buyers absent from `gp` carry
/// the null profile.
pub fn run_meta<M: ClassicalMechanism + ?Sized>(
    kind: MetaKind,
    rule: ExhaustionRule,
    net: &SocialNetwork,
    gp: &GlobalProfile,
    items: usize,
    mech: &M,
) -> Result<(Outcome, MetaTrace), MechanismError> {
    let seller = net.seller();
    let mut ex = Explorer {
        kind,
        rule,
        net,
        gp,
        mech,
        avail: Bundle::full(items),
        explored: BTreeSet::from([seller]),
        marked: BTreeSet::new(),
        won: BTreeSet::new(),
        exhausted: BTreeSet::new(),
        ever_exhausted: BTreeSet::new(),
        potential: BTreeSet::new(),
        last: None,
        last_outcome: Outcome::empty(items),
        calls: 0,
    };
    let first: BTreeSet<NodeId> = ex.neighbours(seller).into_iter().collect();
    // only the seller is explored at this point, so nobody is exhausted
    ex.run_mechanism(first, false)?;
    let initial_potential: Vec<NodeId> = ex.potential.iter().copied().collect();

    let mut outcome = Outcome::empty(items);
    let mut winners = Vec::new();
    let mut iterations = Vec::new();
    let termination = loop {
        if ex.avail.is_empty() {
            break Termination::ItemsExhausted;
        }
        if ex.potential.is_subset(&ex.won) {
            break Termination::NoPotentialWinner;
        }
        ex.explore()?;
        let open: Vec<NodeId> = ex.potential.difference(&ex.won).copied().collect();
        if open.is_empty() {
            break Termination::NoPotentialWinner;
        }
        let priorities: Vec<(NodeId, usize)> = open
            .iter()
            .map(|&i| (i, ex.gp.reported_neighbours(i).len()))
            .collect();
        let selected: Vec<NodeId> = match ex.kind {
            MetaKind::Msn => {
                let top = priorities
                    .iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|&(i, _)| i)
                    .expect("open is non-empty");
                vec![top]
            }
            MetaKind::MsnM => open.clone(),
        };
        iterations.push(Iteration {
            avail: ex.avail,
            explored: ex.pool_with_winners(),
            potential: ex.potential.iter().copied().collect(),
            exhausted: ex.exhausted.iter().copied().collect(),
            priorities,
            selected: selected.clone(),
            sub_outcome: ex.last_outcome.clone(),
        });
        for &i in &selected {
            let bundle = ex.last_outcome.bundle(i);
            outcome.assign(i, bundle, ex.last_outcome.payment(i));
            ex.avail = ex.avail.difference(bundle);
            ex.won.insert(i);
            winners.push(i);
        }
    };

    let trace = MetaTrace {
        kind,
        rule,
        items,
        initial_potential,
        iterations,
        explored: ex.pool_with_winners(),
        marked: ex.marked.iter().copied().filter(|&i| i != seller).collect(),
        potential: ex.potential.iter().copied().collect(),
        winners,
        exhausted: ex.ever_exhausted.iter().copied().collect(),
        final_avail: ex.avail,
        termination,
        mechanism_calls: ex.calls,
        outcome: outcome.clone(),
    };
    Ok((outcome, trace))
}

impl<M: ?Sized> Explorer<'_, M> {
    fn pool_with_winners(&self) -> Vec<NodeId> {
        self.explored
            .iter()
            .copied()
            .filter(|&i| i != self.net.seller())
            .collect()
    }
}

/// MetaMSN with the default exhaustion rule.
pub fn meta_msn<M: ClassicalMechanism + ?Sized>(
    net: &SocialNetwork,
    gp: &GlobalProfile,
    items: usize,
    mech: &M,
) -> Result<(Outcome, MetaTrace), MechanismError> {
    run_meta(
        MetaKind::Msn,
        ExhaustionRule::default(),
        net,
        gp,
        items,
        mech,
    )
}

/// MetaMSN-m with the default exhaustion rule.
pub fn meta_msn_m<M: ClassicalMechanism + ?Sized>(
    net: &SocialNetwork,
    gp: &GlobalProfile,
    items: usize,
    mech: &M,
) -> Result<(Outcome, MetaTrace), MechanismError> {
    run_meta(
        MetaKind::MsnM,
        ExhaustionRule::default(),
        net,
        gp,
        items,
        mech,
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminationVerdict {
    pub ok: bool,
    pub termination: Termination,
    pub problems: Vec<String>,
}

/// Checks the final state of a completed trace: the loop guard has failed,
/// every explored buyer is a winner, exhausted or an unselected potential
/// winner, the merged outcome is feasible, and no winner was ever exhausted.
pub fn check_termination_state(trace: &MetaTrace) -> TerminationVerdict {
    let mut problems = Vec::new();
    let won: BTreeSet<NodeId> = trace.winners.iter().copied().collect();
    let potential: BTreeSet<NodeId> = trace.potential.iter().copied().collect();
    let exhausted: BTreeSet<NodeId> = trace.exhausted.iter().copied().collect();
    let open: Vec<_> = potential.difference(&won).collect();
    match trace.termination {
        Termination::ItemsExhausted if !trace.final_avail.is_empty() => {
            problems.push(format!("items {} remain", trace.final_avail));
        }
        Termination::NoPotentialWinner if !open.is_empty() && !trace.final_avail.is_empty() => {
            problems.push(format!("potential winners {open:?} remain"));
        }
        _ => {}
    }
    for &i in &trace.explored {
        if !won.contains(&i) && !exhausted.contains(&i) && !potential.contains(&i) {
            problems.push(format!(
                "buyer {i} is neither winner, exhausted nor potential"
            ));
        }
    }
    if trace.rule == ExhaustionRule::Permanent {
        for w in won.intersection(&exhausted) {
            problems.push(format!("winner {w} was exhausted earlier"));
        }
    }
    if !trace.outcome.is_feasible(Bundle::full(trace.items)) {
        problems.push("merged outcome is infeasible".into());
    }
    let allocated = trace.outcome.allocated();
    if allocated.union(trace.final_avail) != Bundle::full(trace.items)
        || !allocated.is_disjoint(trace.final_avail)
    {
        problems.push("residual items do not match the allocation".into());
    }
    TerminationVerdict {
        ok: problems.is_empty(),
        termination: trace.termination,
        problems,
    }
}

/// Winners, payments and bundles of `outcome` for the given buyers only.
pub fn restrict_outcome(outcome: &Outcome, ids: &BTreeSet<NodeId>) -> Outcome {
    let mut out = Outcome::empty(outcome.items);
    for &id in ids {
        out.assign(id, outcome.bundle(id), outcome.payment(id));
    }
    out
}

/// True valuations of all buyers in `gp`, for welfare computations.
pub fn valuations_of(gp: &GlobalProfile) -> BTreeMap<NodeId, crate::valuation::ValuationFn> {
    gp.iter().map(|(id, p)| (id, p.valuation.clone())).collect()
}
