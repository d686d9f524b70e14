//! Exact maximin shares by exhaustive branch and bound.
//!
//! `mu^k(S)` is the best minimum bundle value over all partitions of `S` into
//! `k` bundles. Computing it is NP-hard; this oracle is meant for desk-scale
//! instances (at most [`DEFAULT_ORACLE_CAP`] items unless overridden) and is the
//! reference every guarantee in this crate is certified against.

use std::cell::Cell;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub const DEFAULT_ORACLE_CAP: usize = 24;

thread_local! {
    static CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of [`MmsOracle::exact_mms`] calls made on the current thread.
pub fn oracle_calls() -> u64 {
    CALLS.with(Cell::get)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsResult {
    pub value: Rational,
    /// `k` bundles of indices into the input sequence.
    pub partition: Vec<Vec<usize>>,
}

/// `sum(values) / k`, an upper bound on the maximin share.
pub fn average_bound(values: &[Rational], k: usize) -> Result<Rational> {
    if k == 0 {
        return Err(Error::ZeroBundles);
    }
    Ok(rational::sum(values) / Rational::from_integer(k.into()))
}

/// Minimum bundle value of `partition`, which must cover `values` exactly.
pub fn partition_min(values: &[Rational], partition: &[Vec<usize>]) -> Result<Rational> {
    if partition.is_empty() {
        return Err(Error::BadPartition("no bundles".into()));
    }
    let mut seen = vec![false; values.len()];
    for &j in partition.iter().flatten() {
        if j >= values.len() {
            return Err(Error::BadPartition(format!("item {j} out of range")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::BadPartition(format!("item {j} appears twice")));
        }
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        return Err(Error::BadPartition(format!("item {j} missing")));
    }
    Ok(partition
        .iter()
        .map(|b| b.iter().fold(Rational::zero(), |acc, &j| acc + &values[j]))
        .min()
        .expect("non-empty"))
}

/// Exact maximin share with the default item cap.
pub fn exact_mms(values: &[Rational], k: usize) -> Result<MmsResult> {
    MmsOracle::default().exact_mms(values, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MmsOracle {
    pub cap: usize,
}

impl Default for MmsOracle {
    fn default() -> Self {
        MmsOracle {
            cap: DEFAULT_ORACLE_CAP,
        }
    }
}

impl MmsOracle {
    pub fn with_cap(cap: usize) -> Self {
        MmsOracle { cap }
    }

    pub fn exact_mms(&self, values: &[Rational], k: usize) -> Result<MmsResult> {
        CALLS.with(|c| c.set(c.get() + 1));
        if k == 0 {
            return Err(Error::ZeroBundles);
        }
        if values.len() > self.cap {
            return Err(Error::TooLarge {
                items: values.len(),
                cap: self.cap,
            });
        }
        if values.iter().any(rational::is_negative) {
            return Err(Error::Parse("negative value passed to the oracle".into()));
        }

        // Common denominator, so the search runs on integers.
        let denom = values
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled: Vec<BigUint> = values
            .iter()
            .map(|v| {
                (v.numer() * (&denom / v.denom()))
                    .to_biguint()
                    .expect("non-negative")
            })
            .collect();

        let mut order: Vec<usize> = (0..values.len())
            .filter(|&j| !scaled[j].is_zero())
            .collect();
        order.sort_by(|&a, &b| scaled[b].cmp(&scaled[a]).then(a.cmp(&b)));

        let total: BigUint = scaled.iter().sum();
        let (best, assign) = if total.to_u128().is_some() {
            let w: Vec<u128> = order
                .iter()
                .map(|&j| scaled[j].to_u128().unwrap())
                .collect();
            let (b, a) = search(&w, k);
            (BigUint::from(b), a)
        } else {
            let w: Vec<BigUint> = order.iter().map(|&j| scaled[j].clone()).collect();
            search(&w, k)
        };

        let mut partition = vec![Vec::new(); k];
        let mut loads = vec![Rational::zero(); k];
        for (pos, &j) in order.iter().enumerate() {
            partition[assign[pos]].push(j);
            loads[assign[pos]] += &values[j];
        }
        // zero-value items cannot change the minimum
        let lightest = (0..k).min_by(|&a, &b| loads[a].cmp(&loads[b])).unwrap();
        partition[lightest].extend((0..values.len()).filter(|&j| scaled[j].is_zero()));
        for b in &mut partition {
            b.sort_unstable();
        }
        Ok(MmsResult {
            value: Rational::new(BigInt::from(best), denom),
            partition,
        })
    }
}

trait Weight: Clone + Ord {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn div_floor(&self, k: usize) -> Self;
}

impl Weight for u128 {
    fn zero() -> Self {
        0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn div_floor(&self, k: usize) -> Self {
        self / k as u128
    }
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn div_floor(&self, k: usize) -> Self {
        self / BigUint::from(k)
    }
}

/// Best min-load over all assignments of `weights` (positive, descending) to
/// `k` bins. Returns the value and the bin of every weight.
fn search<W: Weight>(weights: &[W], k: usize) -> (W, Vec<usize>) {
    let n = weights.len();
    if n < k {
        return (W::zero(), (0..n).collect());
    }
    let mut suffix = vec![W::zero(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1].plus(&weights[i]);
    }
    let ceiling = suffix[0].div_floor(k);

    // Greedy longest-processing-time start gives a good first incumbent.
    let mut loads = vec![W::zero(); k];
    let mut assign = vec![0; n];
    for (i, w) in weights.iter().enumerate() {
        let b = (0..k).min_by(|&a, &b| loads[a].cmp(&loads[b])).unwrap();
        loads[b] = loads[b].plus(w);
        assign[i] = b;
    }
    let best = loads.iter().min().unwrap().clone();

    let mut s = Search {
        weights,
        suffix,
        k,
        loads: vec![W::zero(); k],
        assign: vec![0; n],
        done: best == ceiling,
        best,
        best_assign: assign,
        ceiling,
    };
    s.dfs(0);
    (s.best, s.best_assign)
}

struct Search<'a, W> {
    weights: &'a [W],
    suffix: Vec<W>,
    k: usize,
    loads: Vec<W>,
    assign: Vec<usize>,
    best: W,
    best_assign: Vec<usize>,
    ceiling: W,
    done: bool,
}

impl<W: Weight> Search<'_, W> {
    fn dfs(&mut self, idx: usize) {
        if self.done {
            return;
        }
        let mut by_load: Vec<usize> = (0..self.k).collect();
        by_load.sort_by(|&a, &b| self.loads[a].cmp(&self.loads[b]));

        if idx == self.weights.len() {
            let min = &self.loads[by_load[0]];
            if *min > self.best {
                self.best = min.clone();
                self.best_assign.clone_from(&self.assign);
                self.done = self.best == self.ceiling;
            }
            return;
        }

        // The final minimum is at most the average of any t bins, and the t
        // lightest bins can gain at most the remaining weight.
        let mut acc = self.suffix[idx].clone();
        for (t, &b) in by_load.iter().enumerate() {
            acc = acc.plus(&self.loads[b]);
            if acc.div_floor(t + 1) <= self.best {
                return;
            }
        }

        // Bins with equal load are interchangeable; try each load once.
        let w = self.weights[idx].clone();
        let mut last: Option<W> = None;
        for b in by_load {
            if last.as_ref() == Some(&self.loads[b]) {
                continue;
            }
            last = Some(self.loads[b].clone());
            self.loads[b] = self.loads[b].plus(&w);
            self.assign[idx] = b;
            self.dfs(idx + 1);
            self.loads[b] = self.loads[b].minus(&w);
            if self.done {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn as_sets(p: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let mut p = p.to_vec();
        p.sort();
        p
    }

    #[test]
    fn average_examples() {
        assert_eq!(average_bound(&ints(&[2, 2, 2]), 2).unwrap(), int(3));
        assert_eq!(average_bound(&ints(&[5, 1, 7]), 1).unwrap(), int(13));
        assert_eq!(average_bound(&ints(&[4, 3, 2, 1]), 2).unwrap(), int(5));
        assert_eq!(average_bound(&ints(&[1]), 0), Err(Error::ZeroBundles));
    }

    #[test]
    fn mms_examples() {
        let r = exact_mms(&ints(&[5, 1, 7]), 1).unwrap();
        assert_eq!(r.value, int(13));
        assert_eq!(r.partition, vec![vec![0, 1, 2]]);

        assert_eq!(exact_mms(&ints(&[5, 1]), 3).unwrap().value, int(0));

        let r = exact_mms(&ints(&[4, 3, 2, 1]), 2).unwrap();
        assert_eq!(r.value, int(5));
        assert_eq!(as_sets(&r.partition), vec![vec![0, 3], vec![1, 2]]);

        let r = exact_mms(&ints(&[7, 5, 4, 3, 3, 2]), 3).unwrap();
        assert_eq!(r.value, int(7));
    }

    #[test]
    fn zero_items_and_fractions() {
        let v = vec![int(0), ratio(1, 2), int(0), ratio(1, 3), ratio(1, 6)];
        let r = exact_mms(&v, 2).unwrap();
        assert_eq!(r.value, ratio(1, 2));
        assert_eq!(partition_min(&v, &r.partition).unwrap(), r.value);
    }

    #[test]
    fn cap_is_enforced() {
        let v = ints(&[1; 5]);
        assert_eq!(
            MmsOracle::with_cap(4).exact_mms(&v, 2),
            Err(Error::TooLarge { items: 5, cap: 4 })
        );
    }

    #[test]
    fn partition_min_examples() {
        let v = ints(&[4, 3, 2, 1]);
        assert_eq!(partition_min(&v, &[vec![0, 1, 2, 3]]).unwrap(), int(10));
        assert_eq!(
            partition_min(&v, &[vec![0, 1, 2, 3], vec![]]).unwrap(),
            int(0)
        );
        assert_eq!(
            partition_min(&v, &[vec![0, 3], vec![1, 2]]).unwrap(),
            int(5)
        );
        assert!(partition_min(&v, &[vec![0, 3], vec![1]]).is_err());
        assert!(partition_min(&v, &[vec![0, 3], vec![1, 2, 3]]).is_err());
    }

    #[test]
    fn counter_counts() {
        let before = oracle_calls();
        exact_mms(&ints(&[1, 2]), 2).unwrap();
        assert_eq!(oracle_calls(), before + 1);
    }
}
