//! Unit-demand matching markets: maximum-valuation assignment by price
//! raising, reduction to buyer-optimal market-clearing prices, VCG
//! personalized prices, and mechanical checks tying them together.
//!
//! All amounts are exact integers in minor units; see [`Money`].

pub mod audit;
pub mod buyer_optimal;
pub mod error;
pub mod io;
pub mod market;
pub mod money;
pub mod solver;
pub mod vcg;
pub mod verify;

pub use audit::{audit_incentive, AuditReport, MisreportStrategy};
pub use buyer_optimal::{
    buyer_optimal_outcome, check_buyer_optimal, lattice_meet, normalize_prices,
    reduce_to_buyer_optimal, MarketOutcome, OptimalityCertificate,
};
pub use error::{MarketError, Result};
pub use io::{instance_to_json, load_instance, InstanceFormat};
pub use market::{equality_graph, pad_to_square, DualSolution, EqualityGraph, Matching, MarketInstance};
pub use money::Money;
pub use solver::{solve_assignment, solve_assignment_with, Initialization};
pub use vcg::{check_equivalence, vcg_prices, EquivalenceReport, VcgReport};
pub use verify::{brute_force_optimum, verify_market_clearing, ClearingVerdict};
