//! Acceptance suite: nine criteria, each certified exactly with the oracle.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::process::ExitCode;

use mms_core::rational::{ratio, Rational};
use mms_core::reduction::Step;
use mms_core::verify::{check_alpha_mms, check_corollary_bounds, check_valid_reduction};
use mms_core::{
    average_bound, gamma_constant, iteration_cap, lift_allocation, oracle_calls, order_instance,
    scale_agent, solve_existence, solve_poly34, solve_poly34_observed, Allocation, ExistenceMode,
    Instance, Kind, MmsOracle, Phase, Shape,
};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Instances per family; the sweep covers both families.
const PER_FAMILY: u64 = 1200;
const SWEEP: u64 = 2 * PER_FAMILY;

struct Outcome {
    checked: usize,
    failures: Vec<String>,
    /// Instances that went through at least one upper-bound update.
    updated: usize,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            checked: 0,
            failures: Vec::new(),
            updated: 0,
        }
    }

    fn merge(mut self, other: Outcome) -> Self {
        self.checked += other.checked;
        self.failures.extend(other.failures);
        self.updated += other.updated;
        self
    }
}

/// Results of one poly34 run, split by the criterion they feed.
struct PolyRun {
    c1: Outcome,
    c3: Outcome,
    c4: Outcome,
    c7: Outcome,
}

fn poly_run(index: u64, oracle: &MmsOracle) -> PolyRun {
    let inst = common::family_instance(index, PER_FAMILY);
    let n = inst.agents();
    let mut run = PolyRun {
        c1: Outcome::new(),
        c3: Outcome::new(),
        c4: Outcome::new(),
        c7: Outcome::new(),
    };

    let mut bound_failures = Vec::new();
    let mut fixed_checks = 0;
    let result = solve_poly34_observed(&inst, &mut |phase, state| {
        if phase == Phase::AfterFixed {
            fixed_checks += 1;
            if !check_corollary_bounds(state, &Rational::zero()) {
                bound_failures.push(format!("instance {index}: bounds fail after fixed phase"));
            }
        }
    });
    run.c4.checked = fixed_checks;
    run.c4.failures = bound_failures;

    run.c7.checked = 1;
    let sol = match result {
        Ok(sol) => sol,
        Err(e) => {
            let msg = format!("instance {index}: solve failed: {e}");
            run.c1.failures.push(msg.clone());
            run.c7.failures.push(msg);
            return run;
        }
    };
    let iterations = sol.allocation.stats.update_loop_iterations;
    run.c7.updated = usize::from(iterations > 0);
    if iterations > iteration_cap(n) {
        run.c7
            .failures
            .push(format!("instance {index}: {iterations} update iterations"));
    }

    run.c1.checked = 1;
    match check_alpha_mms(&inst, &sol.allocation, &ratio(3, 4), oracle) {
        Ok(r) if r.overall => {}
        Ok(r) => run.c1.failures.push(format!(
            "instance {index}: min ratio {:?}",
            r.min_ratio().map(|q| q.to_string())
        )),
        Err(e) => run.c1.failures.push(format!("instance {index}: {e}")),
    }

    // Replay the log on the ordered instance in its original units.
    let view = order_instance(&inst);
    let mut agents: Vec<usize> = (0..n).collect();
    let mut items: Vec<usize> = (0..inst.items()).collect();
    for step in &sol.log {
        let Step::Assign(rec) = step else { continue };
        if rec.kind == Kind::Fixed && rec.shape != Shape::S4 {
            run.c3.checked += 1;
            let sub = view.ordered.restrict(&agents, &items);
            let local_agent = agents.iter().position(|&a| a == rec.agent).unwrap();
            let local_bundle: Vec<usize> = rec
                .bundle
                .iter()
                .map(|j| items.iter().position(|i| i == j).unwrap())
                .collect();
            match check_valid_reduction(&sub, local_agent, &local_bundle, &ratio(3, 4), oracle) {
                Ok(true) => {}
                Ok(false) => run.c3.failures.push(format!(
                    "instance {index}: agent {} {:?} {:?} is not a valid reduction",
                    rec.agent, rec.shape, rec.bundle
                )),
                Err(e) => run.c3.failures.push(format!("instance {index}: {e}")),
            }
        }
        agents.retain(|&a| a != rec.agent);
        items.retain(|j| !rec.bundle.contains(j));
    }
    run
}

fn plus_run(index: u64, oracle: &MmsOracle) -> Outcome {
    let inst = common::family_instance(index, PER_FAMILY);
    let alpha = ratio(3, 4) + gamma_constant(inst.agents());
    let mut out = Outcome::new();
    out.checked = 1;
    let result = solve_existence(&inst, ExistenceMode::ThreeQuarterPlus, oracle)
        .and_then(|sol| check_alpha_mms(&inst, &sol.allocation, &alpha, oracle));
    match result {
        Ok(r) if r.overall => {}
        Ok(r) => out.failures.push(format!(
            "instance {index}: min ratio {:?}",
            r.min_ratio().map(|q| q.to_string())
        )),
        Err(e) => out.failures.push(format!("instance {index}: {e}")),
    }
    out
}

/// Random allocation of the ordered instance's positions, then lift.
fn lift_case(index: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11F7 + index);
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(0..=10);
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0..=50)).collect())
        .collect();
    let inst = Instance::from_integers(&rows).unwrap();
    let view = order_instance(&inst);
    let mut ordered = Allocation::empty(n);
    for p in 0..m {
        // some positions stay unassigned to cover partial allocations
        let owner = rng.gen_range(0..=n);
        if owner < n {
            ordered.bundles[owner].push(p);
        }
    }
    let mut out = Outcome::new();
    out.checked = n;
    match lift_allocation(&inst, &view, &ordered) {
        Ok(lifted) => {
            for i in 0..n {
                let after = inst.bundle_value(i, &lifted.bundles[i]);
                let before = view.ordered.bundle_value(i, &ordered.bundles[i]);
                if after < before {
                    out.failures
                        .push(format!("case {index}: agent {i} {after} < {before}"));
                }
            }
        }
        Err(e) => out.failures.push(format!("case {index}: {e}")),
    }
    out
}

fn oracle_case(index: u64, oracle: &MmsOracle) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E + index);
    let m = rng.gen_range(0..=8);
    let k = rng.gen_range(1..=3);
    let values: Vec<Rational> = (0..m)
        .map(|_| ratio(rng.gen_range(0..=40), rng.gen_range(1..=6)))
        .collect();
    let mut out = Outcome::new();
    out.checked = 1;
    let exact = match oracle.exact_mms(&values, k) {
        Ok(r) => r.value,
        Err(e) => {
            out.failures.push(format!("case {index}: {e}"));
            return out;
        }
    };
    let naive = common::naive_mms(&values, k);
    if exact != naive {
        out.failures.push(format!(
            "case {index}: oracle {exact} vs enumerator {naive}"
        ));
    }
    if exact > average_bound(&values, k).unwrap() {
        out.failures
            .push(format!("case {index}: above the average bound"));
    }
    out
}

fn scale_case(index: u64) -> Outcome {
    let inst = common::sweep_instance(7919 * index + 3);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1E + index);
    let agent = rng.gen_range(0..inst.agents());
    let c = ratio(rng.gen_range(1..=1000), rng.gen_range(1..=1000));
    let mut out = Outcome::new();
    out.checked = 1;
    let scaled = scale_agent(&inst, agent, &c).unwrap();
    let (a, b, again) = (
        solve_poly34(&inst),
        solve_poly34(&scaled),
        solve_poly34(&inst),
    );
    match (a, b, again) {
        (Ok(a), Ok(b), Ok(again)) => {
            if a.allocation.bundles != b.allocation.bundles {
                out.failures.push(format!(
                    "case {index}: scaling agent {agent} by {c} changed the allocation"
                ));
            }
            let text = |s: &mms_core::Solution| mms_core::io::allocation_to_string(&s.allocation);
            if text(&a) != text(&again) || a.log != again.log {
                out.failures.push(format!("case {index}: reruns differ"));
            }
        }
        _ => out.failures.push(format!("case {index}: solve failed")),
    }
    out
}

fn no_oracle_case(index: u64) -> Outcome {
    let inst = common::sweep_instance(index);
    let before = oracle_calls();
    let solved = solve_poly34(&inst);
    let after = oracle_calls();
    let mut out = Outcome::new();
    out.checked = 1;
    if solved.is_err() || after != before {
        out.failures
            .push(format!("case {index}: {} oracle calls", after - before));
    }
    out
}

fn report(number: usize, name: &str, out: &Outcome) -> bool {
    let pass = out.failures.is_empty() && out.checked > 0;
    let updated = if out.updated > 0 {
        format!(", {} with upper-bound updates", out.updated)
    } else {
        String::new()
    };
    println!(
        "criterion {number} {name}: {} ({} checks, {} failures{updated})",
        if pass { "PASS" } else { "FAIL" },
        out.checked,
        out.failures.len()
    );
    for f in out.failures.iter().take(5) {
        println!("    {f}");
    }
    pass
}

fn main() -> ExitCode {
    let oracle = MmsOracle::default();
    let runs: Vec<PolyRun> = (0..SWEEP)
        .into_par_iter()
        .map(|i| poly_run(i, &oracle))
        .collect();
    let fold = |pick: fn(&PolyRun) -> &Outcome| {
        runs.iter().fold(Outcome::new(), |acc, r| {
            let o = pick(r);
            acc.merge(Outcome {
                checked: o.checked,
                failures: o.failures.clone(),
                updated: o.updated,
            })
        })
    };
    let c1 = fold(|r| &r.c1);
    let c3 = fold(|r| &r.c3);
    let c4 = fold(|r| &r.c4);
    let c7 = fold(|r| &r.c7);

    let sum = |outs: Vec<Outcome>| outs.into_iter().fold(Outcome::new(), Outcome::merge);
    let c2 = sum((0..SWEEP)
        .into_par_iter()
        .map(|i| plus_run(i, &oracle))
        .collect());
    let c5 = sum((0..200).into_par_iter().map(lift_case).collect());
    let c6 = sum((0..100)
        .into_par_iter()
        .map(|i| oracle_case(i, &oracle))
        .collect());
    let c8 = sum((0..100).into_par_iter().map(scale_case).collect());
    // The oracle counter is per thread, so this one stays sequential.
    let c9 = sum((0..100).map(no_oracle_case).collect());

    let mut failed = 0;
    for (number, name, out) in [
        (1, "3/4 guarantee, poly path", &c1),
        (2, "3/4 + 1/(12n) guarantee, existence path", &c2),
        (3, "fixed reductions are valid", &c3),
        (4, "bounds after every fixed phase", &c4),
        (5, "ordering lift", &c5),
        (6, "oracle soundness", &c6),
        (7, "termination and monitoring", &c7),
        (8, "scale invariance and determinism", &c8),
        (9, "poly path makes no oracle calls", &c9),
    ] {
        if !report(number, name, out) {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
