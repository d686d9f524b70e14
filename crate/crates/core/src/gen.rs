//! Seeded instance generator.
//!
//! Uses `ChaCha8Rng::seed_from_u64` from `rand_chacha` 0.3 with `rand` 0.8
//! `gen_range`. Values are drawn row by row, item by item, so a given
//! `(spec, seed)` always yields the same matrix.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Each value uniform in `lo..=hi`.
    Uniform { lo: i64, hi: i64 },
    /// A shared base row uniform in `lo..=hi`, each agent adding noise in
    /// `-noise..=noise`, clamped at zero.
    Correlated { lo: i64, hi: i64, noise: i64 },
    /// One row uniform in `lo..=hi`, copied to every agent.
    Identical { lo: i64, hi: i64 },
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            Distribution::Correlated { lo, hi, noise } => write!(f, "correlated:{lo}:{hi}:{noise}"),
            Distribution::Identical { lo, hi } => write!(f, "identical:{lo}:{hi}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// `uniform:LO:HI`, `correlated:LO:HI:NOISE` or `identical:LO:HI`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadSpec(format!("unrecognised distribution \"{s}\""));
        let parts: Vec<&str> = s.split(':').collect();
        let nums = parts[1..]
            .iter()
            .map(|p| p.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let d = match (
            parts[0].trim().to_ascii_lowercase().as_str(),
            nums.as_slice(),
        ) {
            ("uniform", &[lo, hi]) => Distribution::Uniform { lo, hi },
            ("correlated", &[lo, hi, noise]) => Distribution::Correlated { lo, hi, noise },
            ("identical", &[lo, hi]) => Distribution::Identical { lo, hi },
            _ => return Err(bad()),
        };
        d.validate()?;
        Ok(d)
    }
}

impl Distribution {
    fn validate(&self) -> Result<()> {
        let (lo, hi, noise) = match *self {
            Distribution::Uniform { lo, hi } | Distribution::Identical { lo, hi } => (lo, hi, 0),
            Distribution::Correlated { lo, hi, noise } => (lo, hi, noise),
        };
        if lo < 0 || hi < lo || noise < 0 {
            return Err(Error::BadSpec(format!(
                "need 0 <= lo <= hi and noise >= 0, got {self}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub distribution: Distribution,
    pub seed: u64,
}

pub fn gen_instance(spec: &GenSpec) -> Result<Instance> {
    if spec.n == 0 {
        return Err(Error::BadSpec("n must be at least 1".into()));
    }
    spec.distribution.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows: Vec<Vec<i64>> = match spec.distribution {
        Distribution::Uniform { lo, hi } => (0..spec.n)
            .map(|_| (0..spec.m).map(|_| rng.gen_range(lo..=hi)).collect())
            .collect(),
        Distribution::Identical { lo, hi } => {
            let row: Vec<i64> = (0..spec.m).map(|_| rng.gen_range(lo..=hi)).collect();
            vec![row; spec.n]
        }
        Distribution::Correlated { lo, hi, noise } => {
            let base: Vec<i64> = (0..spec.m).map(|_| rng.gen_range(lo..=hi)).collect();
            (0..spec.n)
                .map(|_| {
                    base.iter()
                        .map(|&b| (b + rng.gen_range(-noise..=noise)).max(0))
                        .collect()
                })
                .collect()
        }
    };
    Instance::from_integers(&rows)
}
