//! Buyer-optimal market-clearing prices.
//!
//! Market-clearing prices with a perfect matching `M` are buyer optimal
//! (minimal `sum p`) exactly when every buyer is joined to a zero-priced item
//! by an alternating path in the equality graph that starts with the buyer's
//! own matching edge. [`check_buyer_optimal`] materializes those paths;
//! [`reduce_to_buyer_optimal`] lowers prices until they exist.

use serde::Serialize;

use crate::error::{MarketError, Result};
use crate::market::{DualSolution, Matching, MarketInstance};
use crate::money::Money;
use crate::solver::{
    alternating_reach, solve_assignment_with, AlternatingForest, Initialization,
    PartialMatching, ReachMode,
};

/// Shifts all prices down by `min p` and all profits up by the same amount.
pub fn normalize_prices(duals: &DualSolution) -> DualSolution {
    let shift = duals.min_price();
    DualSolution {
        prices: duals.prices.iter().map(|&p| p - shift).collect(),
        profits: duals.profits.iter().map(|&q| q + shift).collect(),
    }
}

/// A buyer's alternating path to a zero-priced item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertifiedPath {
    pub buyer: usize,
    /// `[item, buyer, item, ..., item]`; the first item is the buyer's own
    /// match and the last one has price 0.
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OptimalityCertificate {
    Certified { paths: Vec<CertifiedPath> },
    Violated {
        buyer: usize,
        reach: Vec<usize>,
        min_price: Money,
    },
}

impl OptimalityCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, OptimalityCertificate::Certified { .. })
    }
}

fn zero_priced(forest: &AlternatingForest, duals: &DualSolution) -> Option<usize> {
    forest
        .reached_items
        .iter()
        .copied()
        .find(|&i| duals.prices[i] == Money::ZERO)
}

fn require_clearing(
    instance: &MarketInstance,
    matching: &Matching,
    duals: &DualSolution,
) -> Result<()> {
    if matching.assignment.len() != instance.n() {
        return Err(MarketError::Dimension("matching size differs from n".into()));
    }
    duals.check_clearing(instance, matching)
}

/// Checks the alternating-path characterization of buyer optimality.
pub fn check_buyer_optimal(
    instance: &MarketInstance,
    matching: &Matching,
    duals: &DualSolution,
) -> Result<OptimalityCertificate> {
    require_clearing(instance, matching, duals)?;
    if let Some(i) = duals.prices.iter().position(|p| p.is_negative()) {
        return Err(MarketError::Precondition(format!("item {i} has a negative price")));
    }
    let partial = PartialMatching::from_matching(matching);
    let mut paths = Vec::with_capacity(instance.n());
    for buyer in 0..instance.n() {
        let forest = alternating_reach(instance, &partial, duals, buyer, ReachMode::MatchedFirst)?;
        match zero_priced(&forest, duals) {
            Some(item) => paths.push(CertifiedPath {
                buyer,
                path: forest.path_to_item(item).expect("item is in the reach"),
            }),
            None => {
                let min_price = forest
                    .reached_items
                    .iter()
                    .map(|&i| duals.prices[i])
                    .min()
                    .expect("reach holds the buyer's own item");
                return Ok(OptimalityCertificate::Violated {
                    buyer,
                    reach: forest.reached_items,
                    min_price,
                });
            }
        }
    }
    Ok(OptimalityCertificate::Certified { paths })
}

fn is_connected_to_zero(
    instance: &MarketInstance,
    partial: &PartialMatching,
    duals: &DualSolution,
    buyer: usize,
) -> bool {
    let forest = alternating_reach(instance, partial, duals, buyer, ReachMode::MatchedFirst)
        .expect("perfect matching");
    zero_priced(&forest, duals).is_some()
}

/// Lowers market-clearing duals to the unique buyer-optimal prices while
/// keeping `matching` complementary.
///
/// Buyers are processed in ascending index. For a buyer not yet joined to a
/// zero-priced item, prices on its reach `R` drop (and profits of the
/// partners `M_R` rise) by the smaller of the least price on `R` and the
/// least slack from `R` to buyers outside `M_R`.
pub fn reduce_to_buyer_optimal(
    instance: &MarketInstance,
    matching: &Matching,
    duals: &DualSolution,
) -> Result<DualSolution> {
    require_clearing(instance, matching, duals)?;
    let n = instance.n();
    let objective = duals.objective();
    let partial = PartialMatching::from_matching(matching);
    let mut duals = normalize_prices(duals);

    for buyer in 0..n {
        let mut steps = 0;
        loop {
            let forest =
                alternating_reach(instance, &partial, &duals, buyer, ReachMode::MatchedFirst)?;
            if zero_priced(&forest, &duals).is_some() {
                break;
            }
            let min_price = forest
                .reached_items
                .iter()
                .map(|&i| duals.prices[i])
                .min()
                .expect("reach holds the buyer's own item");
            let min_slack = forest
                .reached_items
                .iter()
                .flat_map(|&i| {
                    (0..n)
                        .filter(|&j| !forest.contains_buyer(j))
                        .map(move |j| (i, j))
                })
                .map(|(i, j)| duals.slack(instance, i, j))
                .min();
            let delta = min_slack.map_or(min_price, |s| s.min(min_price));
            assert!(delta > Money::ZERO, "reach is maximal and priced above zero");
            for &i in &forest.reached_items {
                duals.prices[i] -= delta;
            }
            for &j in &forest.reached_buyers {
                duals.profits[j] += delta;
            }
            steps += 1;
            assert!(steps <= n, "reach must grow with every decrease");
            debug_assert_eq!(duals.objective(), objective);
            debug_assert!(duals.first_violation(instance).is_none());
        }
        debug_assert!(
            (0..=buyer).all(|b| is_connected_to_zero(instance, &partial, &duals, b)),
            "an earlier buyer lost its path to a zero-priced item"
        );
    }
    debug_assert!(instance
        .dummy_items()
        .iter()
        .all(|&i| duals.prices[i] == Money::ZERO));
    Ok(duals)
}

/// A maximum-valuation matching together with buyer-optimal duals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketOutcome {
    pub matching: Matching,
    pub duals: DualSolution,
}

impl MarketOutcome {
    pub fn item_of_buyer(&self, buyer: usize) -> usize {
        self.matching
            .assignment
            .iter()
            .position(|&j| j == buyer)
            .expect("perfect matching")
    }
}

/// Price raising followed by reduction.
pub fn buyer_optimal_outcome(instance: &MarketInstance) -> MarketOutcome {
    buyer_optimal_outcome_with(instance, Initialization::default())
}

pub fn buyer_optimal_outcome_with(
    instance: &MarketInstance,
    init: Initialization,
) -> MarketOutcome {
    let solution = solve_assignment_with(instance, init);
    let duals = reduce_to_buyer_optimal(instance, &solution.matching, &solution.duals)
        .expect("solver output is market clearing");
    MarketOutcome {
        matching: solution.matching,
        duals,
    }
}

/// Duals for a supplied price vector, checked market clearing against
/// `matching` (which must be a maximum-valuation matching).
pub fn clearing_duals(
    instance: &MarketInstance,
    matching: &Matching,
    prices: &[Money],
) -> Result<DualSolution> {
    if let Some(i) = prices.iter().position(|p| p.is_negative()) {
        return Err(MarketError::NotMarketClearing(format!("item {i} has a negative price")));
    }
    let duals = DualSolution::from_prices(instance, prices.to_vec())?;
    duals.check_clearing(instance, matching)?;
    Ok(duals)
}

/// Componentwise minimum of two market-clearing price vectors, paired with
/// the componentwise maximum of their profits.
pub fn lattice_meet(
    instance: &MarketInstance,
    first: &[Money],
    second: &[Money],
) -> Result<DualSolution> {
    let solution = solve_assignment_with(instance, Initialization::default());
    let a = clearing_duals(instance, &solution.matching, first)?;
    let b = clearing_duals(instance, &solution.matching, second)?;
    let meet = DualSolution {
        prices: a.prices.iter().zip(&b.prices).map(|(x, y)| *x.min(y)).collect(),
        profits: a.profits.iter().zip(&b.profits).map(|(x, y)| *x.max(y)).collect(),
    };
    meet.check_clearing(instance, &solution.matching)?;
    if meet.objective() != solution.matching.value {
        return Err(MarketError::NotMarketClearing(
            "meet violates strong duality".into(),
        ));
    }
    Ok(meet)
}
