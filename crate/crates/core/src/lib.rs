//! Approximate maximin-share allocations of indivisible goods under additive
//! valuations, in exact rational arithmetic.
//!
//! * [`solve_poly34`]: 3/4-MMS in strongly polynomial time, no MMS oracle.
//! * [`solve_existence`]: 3/4 or 3/4 + 1/(12n) using exact maximin shares.
//! * [`MmsOracle`]: exact maximin share by branch and bound.
//! * [`verify`]: oracle-backed certification.

pub mod bags;
pub mod error;
pub mod gen;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod reduction;
pub mod solver;
pub mod verify;

pub use bags::{AgentClass, AgentKind, BagLayout, BagOutcome, RoundTrace};
pub use error::{Error, Result};
pub use gen::{gen_instance, Distribution, GenSpec};
pub use model::{
    lift_allocation, normalize_average, normalize_mms, order_instance, scale_agent, Allocation,
    Instance, OrderedView, SolveStats,
};
pub use oracle::{average_bound, exact_mms, oracle_calls, partition_min, MmsOracle, MmsResult};
pub use rational::Rational;
pub use reduction::{AssignmentRecord, Kind, ReductionState, Shape, Step};
pub use solver::{
    gamma_constant, iteration_cap, solve_existence, solve_poly34, solve_poly34_observed,
    update_upper_bound, ExistenceMode, Phase, Solution, UpperBound,
};
pub use verify::{check_alpha_mms, check_valid_reduction, VerifyReport};
