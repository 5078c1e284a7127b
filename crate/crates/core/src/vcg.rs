//! VCG personalized prices and their comparison with buyer-optimal prices.
//!
//! Every sub-market optimum is a fresh solver run on a copy of the instance
//! with a row and/or column zeroed, so this path shares nothing with the
//! price-reduction pipeline except the value of a maximum matching.

use serde::Serialize;

use crate::buyer_optimal::reduce_to_buyer_optimal;
use crate::error::{MarketError, Result};
use crate::market::{DualSolution, Matching, MarketInstance};
use crate::money::Money;
use crate::solver::{solve_assignment, solve_assignment_with, Initialization};

fn optimum(instance: &MarketInstance) -> Money {
    solve_assignment(instance).0.value
}

fn check_buyer(instance: &MarketInstance, buyer: usize) -> Result<()> {
    if buyer >= instance.n() {
        return Err(MarketError::Index(format!("buyer {buyer} of {}", instance.n())));
    }
    Ok(())
}

/// `v_{-j}`: optimum with buyer `j` replaced by a zero-valuation bidder.
pub fn value_without_buyer(instance: &MarketInstance, buyer: usize) -> Result<Money> {
    check_buyer(instance, buyer)?;
    Ok(optimum(&instance.without_buyer(buyer)))
}

/// `v_{-j}^{-i}`: optimum after buyer `j` leaves and takes item `i`.
pub fn value_without_pair(instance: &MarketInstance, item: usize, buyer: usize) -> Result<Money> {
    check_buyer(instance, buyer)?;
    if item >= instance.n() {
        return Err(MarketError::Index(format!("item {item} of {}", instance.n())));
    }
    Ok(optimum(&instance.without_pair(item, buyer)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VcgPair {
    pub item: usize,
    pub buyer: usize,
    pub valuation: Money,
    pub v_minus_j: Money,
    pub v_minus_j_minus_i: Money,
    pub personalized_price: Money,
    pub buyer_utility: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VcgReport {
    pub matching: Matching,
    pub total_value: Money,
    /// One entry per item, in item order.
    pub pairs: Vec<VcgPair>,
}

impl VcgReport {
    /// Price charged for each item.
    pub fn prices(&self) -> Vec<Money> {
        self.pairs.iter().map(|p| p.personalized_price).collect()
    }
}

/// VCG prices along one maximum-valuation matching.
pub fn vcg_prices(instance: &MarketInstance) -> VcgReport {
    let (matching, _) = solve_assignment(instance);
    vcg_prices_for_matching(instance, &matching).expect("solver matching is optimal")
}

/// VCG prices along a caller-supplied matching, which must be optimal.
pub fn vcg_prices_for_matching(instance: &MarketInstance, matching: &Matching) -> Result<VcgReport> {
    let total_value = optimum(instance);
    let matching = Matching::from_assignment(instance, matching.assignment.clone())?;
    if matching.value != total_value {
        return Err(MarketError::Precondition(format!(
            "matching value {} is below the optimum {total_value}",
            matching.value
        )));
    }
    let pairs = matching
        .pairs()
        .map(|(item, buyer)| {
            let valuation = instance.value(item, buyer);
            let v_minus_j = optimum(&instance.without_buyer(buyer));
            let v_minus_j_minus_i = optimum(&instance.without_pair(item, buyer));
            assert_eq!(
                v_minus_j_minus_i,
                total_value - valuation,
                "removing a matched pair must leave an optimal residual matching"
            );
            assert!(v_minus_j <= total_value && v_minus_j_minus_i <= v_minus_j);
            let personalized_price = v_minus_j - v_minus_j_minus_i;
            VcgPair {
                item,
                buyer,
                valuation,
                v_minus_j,
                v_minus_j_minus_i,
                personalized_price,
                buyer_utility: valuation - personalized_price,
            }
        })
        .collect();
    Ok(VcgReport {
        matching,
        total_value,
        pairs,
    })
}

/// A second maximum-valuation matching, if one exists.
///
/// Optimal matchings are exactly the perfect matchings inside the equality
/// graph of any optimal dual, so another one exists iff the directed graph
/// `a -> b` for tight `(a, M(b))` has a cycle. The first cycle found by a
/// depth-first search in ascending item order is rotated.
pub fn alternate_optimal_matching(
    instance: &MarketInstance,
    matching: &Matching,
    duals: &DualSolution,
) -> Option<Matching> {
    let n = instance.n();
    let tight = |a: usize, b: usize| {
        a != b && duals.slack(instance, a, matching.buyer_of(b)) == Money::ZERO
    };
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();

    fn dfs(
        a: usize,
        n: usize,
        tight: &dyn Fn(usize, usize) -> bool,
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[a] = 1;
        stack.push(a);
        for b in 0..n {
            if !tight(a, b) {
                continue;
            }
            if state[b] == 1 {
                let start = stack.iter().position(|&x| x == b).expect("on stack");
                return Some(stack[start..].to_vec());
            }
            if state[b] == 0 {
                if let Some(cycle) = dfs(b, n, tight, state, stack) {
                    return Some(cycle);
                }
            }
        }
        state[a] = 2;
        stack.pop();
        None
    }

    for a in 0..n {
        if state[a] != 0 {
            continue;
        }
        if let Some(cycle) = dfs(a, n, &tight, &mut state, &mut stack) {
            let mut assignment = matching.assignment.clone();
            for (k, &item) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                assignment[item] = matching.buyer_of(next);
            }
            let alternate =
                Matching::from_assignment(instance, assignment).expect("rotation is a permutation");
            debug_assert_eq!(alternate.value, matching.value);
            return Some(alternate);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlternateCheck {
    pub matching: Matching,
    pub pipeline_prices: Vec<Money>,
    pub vcg_prices: Vec<Money>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub matching: Matching,
    pub pipeline_prices: Vec<Money>,
    pub pipeline_profits: Vec<Money>,
    pub vcg: VcgReport,
    /// Items whose two prices differ.
    pub mismatched_items: Vec<usize>,
    /// Whether `v_{-j} = v* - q_j` holds for every buyer.
    pub profit_identity_holds: bool,
    /// Re-run along a different maximum matching, when one exists.
    pub alternate: Option<AlternateCheck>,
    pub equivalent: bool,
}

/// Computes buyer-optimal prices by price raising plus reduction, and VCG
/// prices independently, and compares them exactly.
pub fn check_equivalence(instance: &MarketInstance) -> Result<EquivalenceReport> {
    let solution = solve_assignment_with(instance, Initialization::default());
    let reduced = reduce_to_buyer_optimal(instance, &solution.matching, &solution.duals)?;
    let vcg = vcg_prices_for_matching(instance, &solution.matching)?;
    let vcg_prices = vcg.prices();

    let mismatched_items: Vec<usize> = (0..instance.n())
        .filter(|&i| reduced.prices[i] != vcg_prices[i])
        .collect();
    let profit_identity_holds = vcg
        .pairs
        .iter()
        .all(|p| p.v_minus_j == vcg.total_value - reduced.profits[p.buyer]);

    let alternate = alternate_optimal_matching(instance, &solution.matching, &solution.duals)
        .map(|matching| -> Result<AlternateCheck> {
            let pipeline = reduce_to_buyer_optimal(instance, &matching, &solution.duals)?;
            let vcg = vcg_prices_for_matching(instance, &matching)?;
            Ok(AlternateCheck {
                matching,
                pipeline_prices: pipeline.prices,
                vcg_prices: vcg.prices(),
            })
        })
        .transpose()?;
    let alternate_agrees = alternate.as_ref().is_none_or(|alt| {
        alt.pipeline_prices == reduced.prices && alt.vcg_prices == reduced.prices
    });

    let equivalent = mismatched_items.is_empty() && profit_identity_holds && alternate_agrees;
    let report = EquivalenceReport {
        matching: solution.matching,
        pipeline_prices: reduced.prices,
        pipeline_profits: reduced.profits,
        vcg,
        mismatched_items,
        profit_identity_holds,
        alternate,
        equivalent,
    };
    if equivalent {
        Ok(report)
    } else {
        Err(MarketError::Mismatch(Box::new(report)))
    }
}
