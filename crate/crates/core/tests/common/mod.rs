#![allow(dead_code)]

use mms_core::rational::Rational;
use mms_core::{gen_instance, Distribution, GenSpec, Instance};

/// Instance `index` of the sweep family: n in 2..=5, m in n..=12, values in 0..=100.
pub fn sweep_instance(index: u64) -> Instance {
    let n = 2 + (index % 4) as usize;
    let m = n + ((index / 4) % (13 - n as u64)) as usize;
    gen_instance(&GenSpec {
        n,
        m,
        distribution: Distribution::Uniform { lo: 0, hi: 100 },
        seed: index,
    })
    .unwrap()
}

/// Maximin share by trying every assignment of items to `k` bundles.
pub fn naive_mms(values: &[Rational], k: usize) -> Rational {
    let m = values.len();
    let mut best = Rational::from_integer(0.into());
    let mut assign = vec![0usize; m];
    loop {
        let mut loads = vec![Rational::from_integer(0.into()); k];
        for (j, &b) in assign.iter().enumerate() {
            loads[b] += &values[j];
        }
        let min = loads.into_iter().min().unwrap();
        if min > best {
            best = min;
        }
        let mut j = 0;
        loop {
            if j == m {
                return best;
            }
            assign[j] += 1;
            if assign[j] < k {
                break;
            }
            assign[j] = 0;
            j += 1;
        }
    }
}

/// Instance `index` of a family built to land agents in the update class:
/// top items near 3/4, the rest of the bag items near 3/8, almost no filler.
/// Values stay in 0..=100, n in 3..=5, m in 2n..=12.
pub fn tight_instance(index: u64) -> Instance {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7167 ^ index.wrapping_mul(0x9E37_79B9));
    let n = rng.gen_range(3..=5usize);
    let m = rng.gen_range(2 * n..=(2 * n + 4).min(12));
    let large = rng.gen_range(1..=n);
    let mut base: Vec<i64> = (0..m)
        .map(|p| {
            if p < large {
                rng.gen_range(70..=74)
            } else if p < 2 * n {
                rng.gen_range(33..=37)
            } else {
                rng.gen_range(0..=1)
            }
        })
        .collect();
    base.sort_unstable_by(|a, b| b.cmp(a));
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            base.iter()
                .map(|&b| (b + rng.gen_range(-1..=1)).clamp(0, 100))
                .collect()
        })
        .collect();
    Instance::from_integers(&rows).unwrap()
}

/// Sweep instances: the uniform family first, then the tight family.
pub fn family_instance(index: u64, per_family: u64) -> Instance {
    if index < per_family {
        sweep_instance(index)
    } else {
        tight_instance(index - per_family)
    }
}
