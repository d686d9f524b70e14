//! Instances, ordered views and allocations.
//!
//! Item and agent ids are zero-based everywhere. An [`OrderedView`] gives every
//! agent the same preference order over items; allocations computed on the
//! ordered instance are mapped back with [`lift_allocation`].

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// `n` agents with additive, non-negative valuations over `m` items.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    values: Vec<Vec<Rational>>,
    items: usize,
}

impl Instance {
    /// Validates a rectangular, non-negative valuation matrix.
    pub fn new(values: Vec<Vec<Rational>>) -> Result<Self> {
        let first = values.first().ok_or(Error::EmptyAgents)?;
        let items = first.len();
        for (agent, row) in values.iter().enumerate() {
            if row.len() != items {
                return Err(Error::RaggedMatrix {
                    row: agent,
                    expected: items,
                    found: row.len(),
                });
            }
            if let Some(item) = row.iter().position(|v| v.is_negative()) {
                return Err(Error::NegativeValue { agent, item });
            }
        }
        Ok(Instance { values, items })
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| rational::int(v)).collect())
                .collect(),
        )
    }

    pub fn agents(&self) -> usize {
        self.values.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.values[agent]
    }

    pub fn value(&self, agent: usize, item: usize) -> &Rational {
        &self.values[agent][item]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.values
    }

    /// `v_i(S)`.
    pub fn bundle_value(&self, agent: usize, bundle: &[usize]) -> Rational {
        bundle
            .iter()
            .fold(Rational::zero(), |acc, &j| acc + &self.values[agent][j])
    }

    /// `v_i(M)`.
    pub fn total(&self, agent: usize) -> Rational {
        rational::sum(&self.values[agent])
    }

    /// Restriction to a subset of agents and items, in the given order.
    pub fn restrict(&self, agents: &[usize], items: &[usize]) -> Instance {
        Instance {
            values: agents
                .iter()
                .map(|&a| items.iter().map(|&j| self.values[a][j].clone()).collect())
                .collect(),
            items: items.len(),
        }
    }
}

/// An ordered instance together with the per-agent rankings that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedView {
    pub ordered: Instance,
    /// `ranking[i][r]` is the original id of agent `i`'s `r`-th favourite item.
    pub ranking: Vec<Vec<usize>>,
}

/// Sorts each agent's row in descending order. Ties go to the lower item id.
pub fn order_instance(inst: &Instance) -> OrderedView {
    let mut ranking = Vec::with_capacity(inst.agents());
    let mut values = Vec::with_capacity(inst.agents());
    for row in inst.rows() {
        let mut ids: Vec<usize> = (0..row.len()).collect();
        // stable sort keeps ascending ids among equal values
        ids.sort_by(|&a, &b| row[b].cmp(&row[a]));
        values.push(ids.iter().map(|&j| row[j].clone()).collect());
        ranking.push(ids);
    }
    OrderedView {
        ordered: Instance {
            values,
            items: inst.items(),
        },
        ranking,
    }
}

/// Counters and diagnostics gathered while solving.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub update_loop_iterations: usize,
    pub fixed_assignments: usize,
    pub tentative_assignments: usize,
    pub bag_rounds: usize,
    /// `v_i(A_i) / mu_i` per agent, only when the oracle was run; `None`
    /// for agents whose maximin share is zero.
    #[serde(serialize_with = "ser_opt_ratios")]
    pub per_agent_ratio: Option<Vec<Option<Rational>>>,
    pub diagnostics: Vec<String>,
}

fn ser_opt_ratios<S: serde::Serializer>(
    v: &Option<Vec<Option<Rational>>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(rs) => s.collect_seq(rs.iter().map(|r| r.as_ref().map(rational::format))),
    }
}

/// One bundle of item ids per agent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
    /// Items nobody needed, folded into `leftover_folded_into`'s bundle.
    pub leftovers: Vec<usize>,
    pub leftover_folded_into: Option<usize>,
    pub stats: SolveStats,
}

impl Allocation {
    pub fn empty(agents: usize) -> Self {
        Allocation {
            bundles: vec![Vec::new(); agents],
            ..Default::default()
        }
    }

    /// Checks the bundles are disjoint and cover exactly `0..items`.
    pub fn check_partition(&self, agents: usize, items: usize) -> std::result::Result<(), String> {
        if self.bundles.len() != agents {
            return Err(format!(
                "{} bundles for {} agents",
                self.bundles.len(),
                agents
            ));
        }
        let owners = self.owners(items)?;
        match owners.iter().position(Option::is_none) {
            Some(j) => Err(format!("item {j} is not allocated")),
            None => Ok(()),
        }
    }

    /// Owner of each item, rejecting out-of-range or doubly assigned items.
    pub fn owners(&self, items: usize) -> std::result::Result<Vec<Option<usize>>, String> {
        let mut owner = vec![None; items];
        for (a, bundle) in self.bundles.iter().enumerate() {
            for &j in bundle {
                if j >= items {
                    return Err(format!("item {j} out of range (m = {items})"));
                }
                if let Some(prev) = owner[j] {
                    return Err(format!("item {j} given to agents {prev} and {a}"));
                }
                owner[j] = Some(a);
            }
        }
        Ok(owner)
    }
}

/// Maps an allocation of the ordered instance back to original item ids.
///
/// Ordered positions are visited best-first; the agent holding position `r`
/// takes its favourite item still available, so it never ends up with less
/// than it had in the ordered instance. Positions not held by anyone stay
/// unallocated. Runs in `O(nm)` after validation.
pub fn lift_allocation(
    inst: &Instance,
    view: &OrderedView,
    ordered: &Allocation,
) -> Result<Allocation> {
    let n = inst.agents();
    let m = inst.items();
    if ordered.bundles.len() != n {
        return Err(Error::IncompleteAllocation(format!(
            "{} bundles for {} agents",
            ordered.bundles.len(),
            n
        )));
    }
    let owner = ordered.owners(m).map_err(Error::IncompleteAllocation)?;

    let mut taken = vec![false; m];
    let mut cursor = vec![0usize; n];
    let mut lifted_of = vec![usize::MAX; m];
    let mut bundles = vec![Vec::new(); n];
    for (pos, who) in owner.iter().enumerate() {
        let Some(a) = *who else { continue };
        let list = &view.ranking[a];
        while taken[list[cursor[a]]] {
            cursor[a] += 1;
        }
        let item = list[cursor[a]];
        taken[item] = true;
        lifted_of[pos] = item;
        bundles[a].push(item);
    }
    for b in &mut bundles {
        b.sort_unstable();
    }
    let mut leftovers: Vec<usize> = ordered.leftovers.iter().map(|&p| lifted_of[p]).collect();
    leftovers.sort_unstable();
    Ok(Allocation {
        bundles,
        leftovers,
        leftover_folded_into: ordered.leftover_folded_into,
        stats: ordered.stats.clone(),
    })
}

/// Multiplies agent `agent`'s row by `c > 0`.
pub fn scale_agent(inst: &Instance, agent: usize, c: &Rational) -> Result<Instance> {
    if !c.is_positive() {
        return Err(Error::NonPositiveScale);
    }
    if agent >= inst.agents() {
        return Err(Error::UnknownAgent(agent));
    }
    let mut out = inst.clone();
    for v in &mut out.values[agent] {
        *v = &*v * c;
    }
    Ok(out)
}

/// Agents with `v_i(M) = 0`.
pub fn zero_value_agents(inst: &Instance) -> Vec<usize> {
    (0..inst.agents())
        .filter(|&a| inst.row(a).iter().all(Zero::is_zero))
        .collect()
}

/// Scales every agent with positive total so that `v_i(M) = n`. Zero-value
/// rows are left as they are; see [`zero_value_agents`].
pub fn normalize_average(inst: &Instance) -> Instance {
    let n = Rational::from_integer(inst.agents().into());
    let mut out = inst.clone();
    for row in &mut out.values {
        let total = rational::sum(row.iter());
        if total.is_zero() || total == n {
            continue;
        }
        let factor = &n / total;
        for v in row.iter_mut() {
            *v = &*v * &factor;
        }
    }
    out
}

/// Divides row `i` by `mms[i]`, so every agent's maximin share becomes 1.
pub fn normalize_mms(inst: &Instance, mms: &[Rational]) -> Result<Instance> {
    if mms.len() != inst.agents() {
        return Err(Error::Parse(format!(
            "{} MMS values for {} agents",
            mms.len(),
            inst.agents()
        )));
    }
    let mut out = inst.clone();
    for (agent, (row, mu)) in out.values.iter_mut().zip(mms).enumerate() {
        if !mu.is_positive() {
            return Err(Error::ZeroMms { agent });
        }
        if mu.is_one() {
            continue;
        }
        for v in row.iter_mut() {
            *v = &*v / mu;
        }
    }
    Ok(out)
}
