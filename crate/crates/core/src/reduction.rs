//! Valid reductions: hand a high-value bundle to an agent who values it at
//! least `alpha` and drop both from the instance.
//!
//! Items are kept in ordered-instance order, so "position `p`" means the
//! `p`-th most valuable remaining item for every agent at once. Positions are
//! zero-based: the candidate bundles are
//!
//! ```text
//! S1 = {0}   S2 = {n-1, n}   S3 = {2n-2, 2n-1, 2n}   S4 = {0, 2n}
//! ```
//!
//! for `n` remaining agents. Positions past the last item are dropped.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Shape {
    S1,
    S2,
    S3,
    S4,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::S1, Shape::S2, Shape::S3, Shape::S4];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Fixed,
    Tentative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssignmentRecord {
    pub agent: usize,
    /// Item ids of the instance the state was built from.
    pub bundle: Vec<usize>,
    pub kind: Kind,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Assign(AssignmentRecord),
    /// Row multiplied by `factor` (an upper-bound update).
    Rescale {
        agent: usize,
        #[serde(serialize_with = "ser_rational")]
        factor: Rational,
    },
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(v))
}

/// Live solver state: who and what is left, current valuations, and the log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionState {
    values: Vec<Vec<Rational>>,
    agents: Vec<usize>,
    items: Vec<usize>,
    dropped: Vec<usize>,
    renormalize: bool,
    log: Vec<Step>,
    checkpoint: Option<Box<ReductionState>>,
}

impl ReductionState {
    /// Starts from an ordered instance with the given agents still active.
    ///
    /// With `renormalize` set, every active agent's row is rescaled to total
    /// `|N|` now and after every removal, and agents whose remaining value hits
    /// zero leave with an empty bundle. Without it the valuations are used as
    /// given (the known-MMS path, where rows are already divided by `mu_i`).
    pub fn new(inst: &Instance, mut agents: Vec<usize>, renormalize: bool) -> Self {
        agents.sort_unstable();
        agents.dedup();
        let dropped = (0..inst.agents()).filter(|a| !agents.contains(a)).collect();
        let mut state = ReductionState {
            values: inst.rows().to_vec(),
            agents,
            items: (0..inst.items()).collect(),
            dropped,
            renormalize,
            log: Vec::new(),
            checkpoint: None,
        };
        state.renormalize_rows();
        state
    }

    /// All agents active, average-normalized.
    pub fn average_normalized(inst: &Instance) -> Self {
        Self::new(inst, (0..inst.agents()).collect(), true)
    }

    pub fn agents(&self) -> &[usize] {
        &self.agents
    }

    /// Remaining item ids, most valuable first.
    pub fn items(&self) -> &[usize] {
        &self.items
    }

    /// Agents that leave with an empty bundle: excluded at construction, or
    /// left with nothing of value after a removal.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// Number of agents in the instance the state was built from.
    pub fn agent_count(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn log(&self) -> &[Step] {
        &self.log
    }

    pub fn records(&self) -> impl Iterator<Item = &AssignmentRecord> {
        self.log.iter().filter_map(|s| match s {
            Step::Assign(r) => Some(r),
            Step::Rescale { .. } => None,
        })
    }

    pub fn renormalizes(&self) -> bool {
        self.renormalize
    }

    /// Current value of a single item id.
    pub fn value(&self, agent: usize, item: usize) -> &Rational {
        &self.values[agent][item]
    }

    /// Current value of the item at position `pos`.
    pub fn value_at(&self, agent: usize, pos: usize) -> &Rational {
        &self.values[agent][self.items[pos]]
    }

    pub fn positions_value(&self, agent: usize, positions: &[usize]) -> Rational {
        positions
            .iter()
            .fold(Rational::zero(), |acc, &p| acc + self.value_at(agent, p))
    }

    pub fn items_value(&self, agent: usize, items: &[usize]) -> Rational {
        items
            .iter()
            .fold(Rational::zero(), |acc, &j| acc + &self.values[agent][j])
    }

    /// `v_i(M)` over the remaining items.
    pub fn total(&self, agent: usize) -> Rational {
        self.items_value(agent, &self.items)
    }

    pub fn item_ids(&self, positions: &[usize]) -> Vec<usize> {
        positions.iter().map(|&p| self.items[p]).collect()
    }

    /// Remaining instance (active agents by row, items by position) with the
    /// current valuations.
    pub fn current_instance(&self) -> Instance {
        Instance::new(
            self.agents
                .iter()
                .map(|&a| {
                    self.items
                        .iter()
                        .map(|&j| self.values[a][j].clone())
                        .collect()
                })
                .collect(),
        )
        .expect("state always has a valid instance")
    }

    /// Positions of `S1..S4` for the current `n`, truncated to the items left.
    pub fn candidate_bundles(&self) -> [Vec<usize>; 4] {
        let n = self.n();
        let keep =
            |ps: Vec<usize>| -> Vec<usize> { ps.into_iter().filter(|&p| p < self.m()).collect() };
        if n == 0 {
            return Default::default();
        }
        [
            keep(vec![0]),
            keep(vec![n - 1, n]),
            keep(vec![2 * n - 2, 2 * n - 1, 2 * n]),
            keep(vec![0, 2 * n]),
        ]
    }

    /// Remaining agents with `v_i(S) >= alpha`, ascending.
    pub fn gamma(&self, positions: &[usize], alpha: &Rational) -> Vec<usize> {
        self.agents
            .iter()
            .copied()
            .filter(|&a| self.positions_value(a, positions) >= *alpha)
            .collect()
    }

    /// Gives `bundle` (item ids) to `agent` and removes both.
    pub fn apply_reduction(
        &mut self,
        agent: usize,
        bundle: &[usize],
        kind: Kind,
        shape: Shape,
        alpha: &Rational,
    ) -> Result<()> {
        if !self.agents.contains(&agent) {
            return Err(Error::InvariantViolation(format!(
                "agent {agent} is not active"
            )));
        }
        if let Some(j) = bundle.iter().find(|j| !self.items.contains(j)) {
            return Err(Error::InvariantViolation(format!(
                "item {j} is not available"
            )));
        }
        if self.items_value(agent, bundle) < *alpha {
            return Err(Error::BelowThreshold { agent });
        }
        self.remove(AssignmentRecord {
            agent,
            bundle: bundle.to_vec(),
            kind,
            shape,
        });
        Ok(())
    }

    fn remove(&mut self, record: AssignmentRecord) {
        self.agents.retain(|&a| a != record.agent);
        self.items.retain(|j| !record.bundle.contains(j));
        self.log.push(Step::Assign(record));
        self.renormalize_rows();
    }

    fn renormalize_rows(&mut self) {
        if !self.renormalize {
            return;
        }
        let totals: Vec<Rational> = self.agents.iter().map(|&a| self.total(a)).collect();
        let mut kept = Vec::with_capacity(self.agents.len());
        for (&a, t) in self.agents.iter().zip(&totals) {
            if t.is_zero() {
                self.dropped.push(a);
            } else {
                kept.push((a, t.clone()));
            }
        }
        self.agents = kept.iter().map(|(a, _)| *a).collect();
        let n = Rational::from_integer(self.agents.len().into());
        for (a, total) in kept {
            if total == n {
                continue;
            }
            let factor = &n / total;
            for &j in &self.items {
                let v = &mut self.values[a][j];
                *v = &*v * &factor;
            }
        }
    }

    /// Multiplies an agent's remaining values by `factor`, without
    /// renormalizing.
    pub fn rescale_agent(&mut self, agent: usize, factor: &Rational) -> Result<()> {
        if !self.agents.contains(&agent) {
            return Err(Error::NotInN21 { agent });
        }
        for &j in &self.items {
            let v = &mut self.values[agent][j];
            *v = &*v * factor;
        }
        self.log.push(Step::Rescale {
            agent,
            factor: factor.clone(),
        });
        Ok(())
    }

    /// Repeatedly assigns the lowest-index shape in `shapes` that some agent
    /// values at `alpha` or more to the lowest-index such agent.
    fn assign_loop(&mut self, shapes: &[Shape], alpha: &Rational, kind: Kind) -> usize {
        let mut count = 0;
        'outer: loop {
            let bundles = self.candidate_bundles();
            for &shape in shapes {
                let positions = &bundles[shape.index()];
                if let Some(&agent) = self.gamma(positions, alpha).first() {
                    let ids = self.item_ids(positions);
                    self.remove(AssignmentRecord {
                        agent,
                        bundle: ids,
                        kind,
                        shape,
                    });
                    count += 1;
                    continue 'outer;
                }
            }
            return count;
        }
    }

    /// Greedy assignment of `S1..S4` at threshold `alpha`; all records are
    /// final. Used when valuations are already divided by the exact MMS.
    pub fn initial_assignment(&mut self, alpha: &Rational) -> usize {
        self.assign_loop(&Shape::ALL, alpha, Kind::Fixed)
    }

    /// `S1..S3` at `3/4`. Each of these is a valid reduction whenever the
    /// current scale bounds every agent's MMS by 1.
    pub fn fixed_assignment(&mut self) -> usize {
        self.assign_loop(
            &[Shape::S1, Shape::S2, Shape::S3],
            &rational::ratio(3, 4),
            Kind::Fixed,
        )
    }

    /// `S1..S4` at `3/4`, recorded as tentative. Takes a snapshot first so the
    /// whole phase can be undone.
    pub fn tentative_assignment(&mut self) -> usize {
        let mut snapshot = self.clone();
        snapshot.checkpoint = None;
        self.checkpoint = Some(Box::new(snapshot));
        self.assign_loop(&Shape::ALL, &rational::ratio(3, 4), Kind::Tentative)
    }

    /// State at the start of the current tentative phase, if one is open.
    pub fn checkpoint(&self) -> Option<&ReductionState> {
        self.checkpoint.as_deref()
    }

    /// Records added since the tentative phase began.
    pub fn tentative_records(&self) -> Vec<&AssignmentRecord> {
        let start = self
            .checkpoint
            .as_ref()
            .map_or(self.log.len(), |c| c.log.len());
        self.log[start..]
            .iter()
            .filter_map(|s| match s {
                Step::Assign(r) => Some(r),
                Step::Rescale { .. } => None,
            })
            .collect()
    }

    pub fn undo_tentative(&mut self) {
        if let Some(snapshot) = self.checkpoint.take() {
            *self = *snapshot;
        }
    }

    /// Keeps the tentative assignments.
    pub fn commit_tentative(&mut self) {
        self.checkpoint = None;
    }

    /// Replays `steps` on `initial`, checking nothing but availability.
    pub fn replay(initial: &ReductionState, steps: &[Step]) -> Result<ReductionState> {
        let mut state = initial.clone();
        state.checkpoint = None;
        for step in steps {
            match step {
                Step::Assign(r) => {
                    if !state.agents.contains(&r.agent)
                        || r.bundle.iter().any(|j| !state.items.contains(j))
                    {
                        return Err(Error::InvariantViolation(format!(
                            "log step {r:?} does not apply"
                        )));
                    }
                    state.remove(r.clone());
                }
                Step::Rescale { agent, factor } => state.rescale_agent(*agent, factor)?,
            }
        }
        Ok(state)
    }

    /// Remaining agents, items and current valuations equal; the log may
    /// differ.
    pub fn same_instance(&self, other: &ReductionState) -> bool {
        self.agents == other.agents
            && self.items == other.items
            && self.dropped == other.dropped
            && self.agents.iter().all(|&a| {
                self.items
                    .iter()
                    .all(|&j| self.values[a][j] == other.values[a][j])
            })
    }

    pub fn count(&self, kind: Kind) -> usize {
        self.records().filter(|r| r.kind == kind).count()
    }
}
