//! Revenue maximization for incentivized social advertising.
//!
//! A host allocates disjoint seed sets to `h` advertisers in a social network
//! under the topic-aware independent cascade model. Advertiser `i` pays
//! `cpe(i)` per engagement plus seeding costs, and `c_i(S_i) + π_i(S_i)` must
//! stay within its budget. The crate provides:
//!
//! * oracle-mode algorithms ([`solver`]) generic over a [`oracle::RevenueEvaluator`],
//! * a progressive RR-set sampler with bicriteria guarantees ([`sampling`]),
//! * cost-agnostic and cost-sensitive greedy baselines ([`baselines`]),
//! * an experiment driver writing CSV metric tables ([`experiment`]).

pub mod baselines;
pub mod exec;
pub mod experiment;
pub mod instance;
pub mod network;
pub mod oracle;
pub mod rng;
pub mod rr;
pub mod sampling;
pub mod solver;
pub mod verify;

pub use exec::ExecMode;
pub use instance::{Allocation, CostModel, CostTable, InstanceConfig, ProblemInstance, SolverParams};
pub use network::{NodeId, TicNetwork};
pub use sampling::{rm_without_oracle, SamplingOptions, SamplingOutcome};
pub use solver::{rm_with_oracle, Problem};
