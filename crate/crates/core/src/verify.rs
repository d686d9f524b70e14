//! Oracle-backed certification of allocations and of the structural facts the
//! solvers rely on.
//!
//! Maximin shares are always recomputed from the instance handed in here,
//! never taken from solver state.

use num_traits::Zero;
use serde::Serialize;

use crate::bags::{classify_agent, init_bags, AgentKind};
use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::oracle::MmsOracle;
use crate::rational::{self, ratio, Rational};
use crate::reduction::ReductionState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentCheck {
    pub agent: usize,
    #[serde(serialize_with = "ser_r")]
    pub bundle_value: Rational,
    #[serde(serialize_with = "ser_r")]
    pub mms: Rational,
    /// `None` when the maximin share is zero.
    #[serde(serialize_with = "ser_opt_r")]
    pub ratio: Option<Rational>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    #[serde(serialize_with = "ser_r")]
    pub alpha: Rational,
    pub per_agent: Vec<AgentCheck>,
    pub overall: bool,
}

impl VerifyReport {
    /// Smallest ratio over agents with a positive maximin share.
    pub fn min_ratio(&self) -> Option<Rational> {
        self.per_agent.iter().filter_map(|c| c.ratio.clone()).min()
    }
}

fn ser_r<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(v))
}

fn ser_opt_r<S: serde::Serializer>(
    v: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&rational::format(v)),
        None => s.serialize_none(),
    }
}

/// Checks `v_i(A_i) >= alpha * mu_i` for every agent, exactly.
pub fn check_alpha_mms(
    inst: &Instance,
    alloc: &Allocation,
    alpha: &Rational,
    oracle: &MmsOracle,
) -> Result<VerifyReport> {
    alloc
        .check_partition(inst.agents(), inst.items())
        .map_err(Error::NotAPartition)?;
    let n = inst.agents();
    let mut per_agent = Vec::with_capacity(n);
    for agent in 0..n {
        let mms = oracle.exact_mms(inst.row(agent), n)?.value;
        let bundle_value = inst.bundle_value(agent, &alloc.bundles[agent]);
        let pass = bundle_value >= alpha * &mms;
        let ratio = (!mms.is_zero()).then(|| &bundle_value / &mms);
        per_agent.push(AgentCheck {
            agent,
            bundle_value,
            mms,
            ratio,
            pass,
        });
    }
    let overall = per_agent.iter().all(|c| c.pass);
    Ok(VerifyReport {
        alpha: alpha.clone(),
        per_agent,
        overall,
    })
}

/// Fills `alloc.stats.per_agent_ratio` from the oracle.
pub fn attach_ratios(
    inst: &Instance,
    alloc: &mut Allocation,
    oracle: &MmsOracle,
) -> Result<VerifyReport> {
    let report = check_alpha_mms(inst, alloc, &Rational::zero(), oracle)?;
    alloc.stats.per_agent_ratio = Some(report.per_agent.iter().map(|c| c.ratio.clone()).collect());
    Ok(report)
}

/// Whether giving `bundle` to `agent` and removing both is a valid reduction:
/// the agent gets `alpha` times its share, and no other agent's share drops
/// when the rest is split among one agent fewer.
pub fn check_valid_reduction(
    inst: &Instance,
    agent: usize,
    bundle: &[usize],
    alpha: &Rational,
    oracle: &MmsOracle,
) -> Result<bool> {
    let n = inst.agents();
    if agent >= n {
        return Err(Error::UnknownAgent(agent));
    }
    if let Some(&j) = bundle.iter().find(|&&j| j >= inst.items()) {
        return Err(Error::BadPartition(format!("item {j} out of range")));
    }
    let mu = oracle.exact_mms(inst.row(agent), n)?.value;
    if inst.bundle_value(agent, bundle) < alpha * mu {
        return Ok(false);
    }
    let rest: Vec<usize> = (0..inst.items()).filter(|j| !bundle.contains(j)).collect();
    for other in (0..n).filter(|&a| a != agent) {
        let before = oracle.exact_mms(inst.row(other), n)?.value;
        let row: Vec<Rational> = rest.iter().map(|&j| inst.value(other, j).clone()).collect();
        let after = oracle.exact_mms(&row, n - 1)?.value;
        if after < before {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Value bounds that hold once no agent values `S1`, `S2` or `S3` at
/// `3/4 + gamma`: top items below `3/4 + gamma`, the next `n` below
/// `3/8 + gamma/2` (and items `n-1, n` together below `3/4 + gamma`), and all
/// filler below `1/4 + gamma/3`.
pub fn check_corollary_bounds(state: &ReductionState, gamma: &Rational) -> bool {
    let n = state.n();
    let m = state.m();
    let top = ratio(3, 4) + gamma;
    let second = ratio(3, 8) + gamma / rational::int(2);
    let filler = ratio(1, 4) + gamma / rational::int(3);
    state.agents().iter().all(|&a| {
        let v = |p: usize| state.value_at(a, p);
        let pair_ok = n >= m || v(n - 1) + v(n) < top;
        pair_ok
            && (0..m).all(|p| {
                if p < n {
                    *v(p) < top
                } else if p < 2 * n {
                    *v(p) < second
                } else {
                    *v(p) < filler
                }
            })
    })
}

/// Structural facts about an agent with a bag worth more than 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct N2Report {
    pub agent: usize,
    pub in_n2: bool,
    /// At least one low bag and one high bag.
    pub has_low_and_high: bool,
    /// Top item worth more than `5/8`.
    pub top_above_five_eighths: bool,
    /// Every bag worth less than `9/8`.
    pub bags_below_nine_eighths: bool,
    /// Every filler item worth less than `1/8`.
    pub filler_below_one_eighth: bool,
    /// Some bundle of the oracle's partition has more than `1/4` of filler.
    pub giver_bundle: Option<bool>,
    /// No bundle of the oracle's partition has two items above `5/8`.
    pub one_large_item_per_bundle: Option<bool>,
}

impl N2Report {
    /// The four value facts; the oracle-backed ones are diagnostics.
    pub fn holds(&self) -> bool {
        self.in_n2
            && self.has_low_and_high
            && self.top_above_five_eighths
            && self.bags_below_nine_eighths
            && self.filler_below_one_eighth
    }
}

/// Evaluates the `N2` facts for `agent` at `gamma = 0`. With an oracle, also
/// inspects the oracle's optimal partition of the agent's remaining items
/// (only that witness, not every optimal partition).
pub fn check_n2_structure(
    state: &ReductionState,
    agent: usize,
    oracle: Option<&MmsOracle>,
) -> Result<N2Report> {
    let class = classify_agent(state, agent, &Rational::zero());
    let n = state.n();
    let m = state.m();
    let five_eighths = ratio(5, 8);
    let mut report = N2Report {
        agent,
        in_n2: class.kind == AgentKind::N2,
        has_low_and_high: class.low_bags > 0 && class.high_bags > 0,
        top_above_five_eighths: m > 0 && *state.value_at(agent, 0) > five_eighths,
        bags_below_nine_eighths: init_bags(n)
            .truncated(m)
            .bags
            .iter()
            .all(|b| state.positions_value(agent, b) < ratio(9, 8)),
        filler_below_one_eighth: (2 * n..m).all(|p| *state.value_at(agent, p) < ratio(1, 8)),
        giver_bundle: None,
        one_large_item_per_bundle: None,
    };
    if !report.in_n2 {
        return Ok(report);
    }
    if let Some(oracle) = oracle {
        let row: Vec<Rational> = (0..m).map(|p| state.value_at(agent, p).clone()).collect();
        let witness = oracle.exact_mms(&row, n)?;
        let quarter = ratio(1, 4);
        report.giver_bundle = Some(witness.partition.iter().any(|b| {
            let outside: Rational =
                rational::sum(b.iter().filter(|&&p| p >= 2 * n).map(|&p| &row[p]));
            outside > quarter
        }));
        report.one_large_item_per_bundle = Some(
            witness
                .partition
                .iter()
                .all(|b| b.iter().filter(|&&p| row[p] > five_eighths).count() <= 1),
        );
    }
    Ok(report)
}

/// Ratio of the worst-off agent, `None` if every share is zero.
pub fn min_ratio(report: &VerifyReport) -> Option<Rational> {
    report.min_ratio()
}
