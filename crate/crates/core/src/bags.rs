//! Bag initialization, agent classification and bag filling.
//!
//! With `n` agents left, bag `k` (zero-based) holds positions `k` and
//! `2n-1-k`: one item from the top `n` and one from the next `n`. Everything
//! from position `2n` on is filler.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Allocation;
use crate::rational::{ratio, Rational};
use crate::reduction::{ReductionState, Step};

/// Positions of the `n` initial bags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagLayout {
    pub bags: Vec<Vec<usize>>,
}

/// Bag `k = {k, 2n-1-k}` for `k < n`.
pub fn init_bags(n: usize) -> BagLayout {
    BagLayout {
        bags: (0..n).map(|k| vec![k, 2 * n - 1 - k]).collect(),
    }
}

impl BagLayout {
    /// Drops positions at or past `m`.
    pub fn truncated(mut self, m: usize) -> Self {
        for b in &mut self.bags {
            b.retain(|&p| p < m);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AgentKind {
    /// Every bag is worth at most the high threshold.
    N1,
    N2,
}

/// Bag-phase profile of one agent under the current valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentClass {
    pub agent: usize,
    pub kind: AgentKind,
    /// Bags worth less than `3/4 + gamma`.
    pub low_bags: usize,
    /// Bags worth more than `1 + 3 gamma / 2`.
    pub high_bags: usize,
    /// Total value missing to lift every low bag to `3/4 + gamma`.
    pub deficit: Rational,
    /// Value of the filler items.
    pub filler_total: Rational,
    /// Needs an upper-bound update: more high than low bags, and too little
    /// filler to cover the deficit plus `1/8` per low bag.
    pub n21: bool,
}

pub fn low_threshold(gamma: &Rational) -> Rational {
    ratio(3, 4) + gamma
}

pub fn high_threshold(gamma: &Rational) -> Rational {
    Rational::from_integer(1.into()) + ratio(3, 2) * gamma
}

pub fn classify_agent(state: &ReductionState, agent: usize, gamma: &Rational) -> AgentClass {
    let n = state.n();
    let m = state.m();
    let layout = init_bags(n).truncated(m);
    let low = low_threshold(gamma);
    let high = high_threshold(gamma);

    let mut low_bags = 0;
    let mut high_bags = 0;
    let mut deficit = Rational::zero();
    for bag in &layout.bags {
        let v = state.positions_value(agent, bag);
        if v < low {
            low_bags += 1;
            deficit += &low - &v;
        } else if v > high {
            high_bags += 1;
        }
    }
    let filler: Vec<usize> = (2 * n..m).collect();
    let filler_total = state.positions_value(agent, &filler);
    let kind = if high_bags > 0 {
        AgentKind::N2
    } else {
        AgentKind::N1
    };
    let n21 = kind == AgentKind::N2
        && high_bags > low_bags
        && filler_total < &deficit + ratio(low_bags as i64, 8);
    AgentClass {
        agent,
        kind,
        low_bags,
        high_bags,
        deficit,
        filler_total,
        n21,
    }
}

/// Agents that need an upper-bound update, ascending (thresholds at
/// `gamma = 0`).
pub fn detect_n21(state: &ReductionState) -> Vec<usize> {
    let zero = Rational::zero();
    state
        .agents()
        .iter()
        .copied()
        .filter(|&a| classify_agent(state, a, &zero).n21)
        .collect()
}

/// One bag-filling round, for auditing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundTrace {
    /// Item ids of the starting bag.
    pub bag: Vec<usize>,
    /// Filler item ids added, in order.
    pub fillers: Vec<usize>,
    pub receiver: usize,
    /// Value of the final bundle for every agent still waiting at the start of
    /// the round (receiver included).
    #[serde(skip)]
    pub values: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagOutcome {
    /// Over the item ids of the state's instance.
    pub allocation: Allocation,
    pub rounds: Vec<RoundTrace>,
}

/// Finishes the allocation: every recorded reduction keeps its bundle, each
/// remaining agent receives a filled bag worth at least `alpha` to it, and
/// unused filler goes to whoever was served last.
///
/// Round `k` starts from bag `k` and adds filler items, most valuable first,
/// until some waiting agent values the bundle at `alpha`; the lowest-index
/// such agent takes it.
pub fn bag_fill(state: &ReductionState, alpha: &Rational) -> Result<BagOutcome> {
    let mut allocation = Allocation::empty(state.agent_count());
    let mut last_served: Option<usize> = None;
    for step in state.log() {
        if let Step::Assign(r) = step {
            allocation.bundles[r.agent] = r.bundle.clone();
            last_served = Some(r.agent);
        }
    }
    if last_served.is_none() {
        last_served = state.dropped().last().copied();
    }

    let n = state.n();
    let m = state.m();
    let layout = init_bags(n).truncated(m);
    let mut filler = (2 * n).min(m)..m;

    let mut waiting: Vec<usize> = state.agents().to_vec();
    let mut rounds = Vec::with_capacity(n);
    for (round, bag) in layout.bags.iter().enumerate() {
        let mut bundle = bag.clone();
        let mut fillers = Vec::new();
        let receiver = loop {
            if let Some(&a) = waiting
                .iter()
                .find(|&&a| state.positions_value(a, &bundle) >= *alpha)
            {
                break a;
            }
            match filler.next() {
                Some(p) => {
                    bundle.push(p);
                    fillers.push(p);
                }
                None => return Err(Error::Exhausted { round: round + 1 }),
            }
        };
        let values = waiting
            .iter()
            .map(|&a| (a, state.positions_value(a, &bundle)))
            .collect();
        waiting.retain(|&a| a != receiver);
        let mut ids = state.item_ids(&bundle);
        ids.sort_unstable();
        allocation.bundles[receiver] = ids;
        last_served = Some(receiver);
        rounds.push(RoundTrace {
            bag: state.item_ids(bag),
            fillers: state.item_ids(&fillers),
            receiver,
            values,
        });
    }

    let leftover_positions: Vec<usize> = filler.collect();
    if !leftover_positions.is_empty() {
        let target = last_served.ok_or_else(|| {
            Error::InvariantViolation("items left but no agent to receive them".into())
        })?;
        let mut leftovers = state.item_ids(&leftover_positions);
        leftovers.sort_unstable();
        allocation.bundles[target].extend_from_slice(&leftovers);
        allocation.bundles[target].sort_unstable();
        allocation.leftovers = leftovers;
        allocation.leftover_folded_into = Some(target);
    }
    allocation.stats.bag_rounds = rounds.len();
    Ok(BagOutcome { allocation, rounds })
}
