//! Fixed instances for the criterion benchmarks.

use mms_core::{gen_instance, Distribution, GenSpec, Instance};

/// Seeded uniform instance with values in `1..=100`.
pub fn uniform(n: usize, m: usize, seed: u64) -> Instance {
    gen_instance(&GenSpec {
        n,
        m,
        distribution: Distribution::Uniform { lo: 1, hi: 100 },
        seed,
    })
    .expect("valid spec")
}

/// Three identical agents that all need one upper-bound update.
pub fn update_class() -> Instance {
    let mut row = vec![747, 747, 374, 374, 372, 372];
    row.extend([2; 7]);
    Instance::from_integers(&[row.clone(), row.clone(), row]).expect("non-negative")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_are_stable() {
        assert_eq!(super::uniform(3, 9, 1), super::uniform(3, 9, 1));
        assert_eq!(super::update_class().items(), 13);
    }
}
