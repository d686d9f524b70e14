//! Top-level solvers.
//!
//! [`solve_poly34`] never computes a maximin share: it starts from the
//! average as an upper bound and tightens it per agent only when the bag
//! phase could fail. [`solve_existence`] divides every row by the exact MMS
//! from the oracle and then runs the greedy reductions and bag filling at
//! `3/4` or `3/4 + 1/(12n)`.

use num_traits::{One, Signed, Zero};

use crate::bags::{bag_fill, classify_agent, detect_n21, RoundTrace};
use crate::error::{Error, Result};
use crate::model::{lift_allocation, normalize_mms, order_instance, Allocation, Instance};
use crate::oracle::MmsOracle;
use crate::rational::{self, ratio, Rational};
use crate::reduction::{Kind, ReductionState, Step};

/// A solved instance plus the audit trail in ordered-instance item ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Bundles over the original item ids; `stats` filled in.
    pub allocation: Allocation,
    pub log: Vec<Step>,
    pub rounds: Vec<RoundTrace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistenceMode {
    ThreeQuarter,
    ThreeQuarterPlus,
}

impl ExistenceMode {
    pub fn alpha(self, agents: usize) -> Rational {
        match self {
            ExistenceMode::ThreeQuarter => ratio(3, 4),
            ExistenceMode::ThreeQuarterPlus => ratio(3, 4) + gamma_constant(agents),
        }
    }
}

/// `1 / (12 n0)`, fixed for the whole run.
pub fn gamma_constant(n0: usize) -> Rational {
    assert!(n0 >= 1, "gamma needs at least one agent");
    ratio(1, 12 * n0 as i64)
}

/// Tripwire on update-loop iterations: `4 n^3 + 16`.
pub fn iteration_cap(n: usize) -> usize {
    4 * n.pow(3) + 16
}

/// Where the poly solver is when it calls its observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    AfterFixed,
    AfterTentative,
    BeforeBagFill,
}

/// The five candidate bounds for an agent that needs an update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperBound {
    pub agent: usize,
    /// `alpha_1 .. alpha_5`; `None` when the term does not exist.
    pub terms: [Option<Rational>; 5],
    pub alpha: Rational,
    /// Index (0-based) of the term that attains the maximum.
    pub argmax: usize,
}

/// New MMS upper bound (as a fraction of the current scale) for `agent`.
///
/// `state` is the solver state at the end of a tentative phase with `agent`
/// in the update class. The bounds are read from the state as it was before
/// that phase (its checkpoint), while "not tentatively assigned" refers to the
/// phase's records.
pub fn update_upper_bound(state: &ReductionState, agent: usize) -> Result<UpperBound> {
    if !detect_n21(state).contains(&agent) {
        return Err(Error::NotInN21 { agent });
    }
    let base = state.checkpoint().unwrap_or(state);
    let tentative: Vec<usize> = state
        .tentative_records()
        .iter()
        .flat_map(|r| r.bundle.iter().copied())
        .collect();

    let four_thirds = ratio(4, 3);
    let shapes = base.candidate_bundles();
    let mut terms: [Option<Rational>; 5] = Default::default();
    for s in 0..3 {
        if !shapes[s].is_empty() {
            terms[s] = Some(&four_thirds * base.positions_value(agent, &shapes[s]));
        }
    }

    let n = base.n();
    let m = base.m();
    let bagged = (2 * n).min(m);
    let untouched = |range: std::ops::Range<usize>| {
        range
            .into_iter()
            .find(|&p| !tentative.contains(&base.items()[p]))
    };
    if let (Some(k), Some(k2)) = (untouched(0..bagged), untouched(bagged..m)) {
        terms[3] = Some(&four_thirds * base.positions_value(agent, &[k, k2]));
    }

    let class = classify_agent(base, agent, &Rational::zero());
    if class.low_bags > 0 {
        let l = Rational::from_integer(class.low_bags.into());
        let num = &class.filler_total + ratio(3, 4) * &l - &class.deficit;
        terms[4] = Some(num / (ratio(7, 8) * l));
    }

    let (argmax, alpha) = terms
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.as_ref().map(|t| (i, t)))
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, t)| (i, t.clone()))
        .ok_or_else(|| Error::InvariantViolation(format!("no bound terms for agent {agent}")))?;
    Ok(UpperBound {
        agent,
        terms,
        alpha,
        argmax,
    })
}

/// 3/4-MMS allocation without computing any maximin share.
pub fn solve_poly34(inst: &Instance) -> Result<Solution> {
    solve_poly34_observed(inst, &mut |_, _| {})
}

/// [`solve_poly34`] with a callback after every phase.
pub fn solve_poly34_observed(
    inst: &Instance,
    observer: &mut dyn FnMut(Phase, &ReductionState),
) -> Result<Solution> {
    let view = order_instance(inst);
    let mut state = ReductionState::average_normalized(&view.ordered);
    let mut diagnostics = Vec::new();

    let mut run_phases = |state: &mut ReductionState| {
        state.fixed_assignment();
        observer(Phase::AfterFixed, state);
        state.tentative_assignment();
        observer(Phase::AfterTentative, state);
    };
    run_phases(&mut state);

    let cap = iteration_cap(inst.agents());
    let mut iterations = 0;
    loop {
        let pending = detect_n21(&state);
        let Some(&agent) = pending.first() else { break };
        iterations += 1;
        if iterations > cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        let bound = update_upper_bound(&state, agent)?;
        if bound.terms[4].is_none() {
            diagnostics.push(format!(
                "agent {agent}: no low bag in the update class, alpha_5 skipped"
            ));
        }
        if !bound.alpha.is_positive() || bound.alpha >= Rational::one() {
            return Err(Error::InvariantViolation(format!(
                "upper-bound update for agent {agent} is {}, not in (0, 1)",
                rational::format(&bound.alpha)
            )));
        }
        state.undo_tentative();
        state.rescale_agent(agent, &bound.alpha.recip())?;
        run_phases(&mut state);
    }
    state.commit_tentative();
    observer(Phase::BeforeBagFill, &state);

    let outcome = bag_fill(&state, &ratio(3, 4))?;
    let mut allocation = lift_allocation(inst, &view, &outcome.allocation)?;
    allocation.stats.update_loop_iterations = iterations;
    allocation.stats.fixed_assignments = state.count(Kind::Fixed);
    allocation.stats.tentative_assignments = state.count(Kind::Tentative);
    allocation.stats.bag_rounds = outcome.rounds.len();
    allocation.stats.diagnostics = diagnostics;
    Ok(Solution {
        allocation,
        log: state.log().to_vec(),
        rounds: outcome.rounds,
    })
}

/// `alpha`-MMS allocation using exact maximin shares from `oracle`.
pub fn solve_existence(
    inst: &Instance,
    mode: ExistenceMode,
    oracle: &MmsOracle,
) -> Result<Solution> {
    let n0 = inst.agents();
    let alpha = mode.alpha(n0);
    let view = order_instance(inst);
    let mms = (0..n0)
        .map(|i| oracle.exact_mms(view.ordered.row(i), n0).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;

    // Zero-MMS agents leave first with an empty bundle.
    let active: Vec<usize> = (0..n0).filter(|&i| mms[i].is_positive()).collect();
    let divisors: Vec<Rational> = mms
        .iter()
        .map(|m| {
            if m.is_zero() {
                Rational::one()
            } else {
                m.clone()
            }
        })
        .collect();
    let normalized = normalize_mms(&view.ordered, &divisors)?;
    let mut state = ReductionState::new(&normalized, active, false);
    state.initial_assignment(&alpha);

    let outcome = bag_fill(&state, &alpha)?;
    let mut allocation = lift_allocation(inst, &view, &outcome.allocation)?;
    allocation.stats.fixed_assignments = state.count(Kind::Fixed);
    allocation.stats.bag_rounds = outcome.rounds.len();
    allocation.stats.per_agent_ratio = Some(
        (0..n0)
            .map(|i| {
                let v = inst.bundle_value(i, &allocation.bundles[i]);
                (!mms[i].is_zero()).then(|| v / &mms[i])
            })
            .collect(),
    );
    Ok(Solution {
        allocation,
        log: state.log().to_vec(),
        rounds: outcome.rounds,
    })
}
