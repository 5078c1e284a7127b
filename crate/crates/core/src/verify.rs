//! Brute-force oracle and the market-clearing verifier.

use rand::Rng;
use serde::Serialize;

use crate::error::{MarketError, Result};
use crate::market::{DualSolution, Matching, MarketInstance};
use crate::money::Money;

pub const DEFAULT_ORACLE_LIMIT: usize = 8;

/// Enumerates all `n!` assignments; returns the optimum value and the
/// lexicographically smallest maximizing assignment.
pub fn brute_force_optimum(instance: &MarketInstance, limit: usize) -> Result<(Money, Matching)> {
    let n = instance.n();
    if n > limit {
        return Err(MarketError::OracleLimit { n, limit });
    }
    struct Search<'a> {
        instance: &'a MarketInstance,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Option<(Money, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, item: usize, acc: Money) {
            let n = self.used.len();
            if item == n {
                // Lexicographic visiting order: only a strict improvement wins.
                if self.best.as_ref().is_none_or(|(v, _)| acc > *v) {
                    self.best = Some((acc, self.current.clone()));
                }
                return;
            }
            for buyer in 0..n {
                if self.used[buyer] {
                    continue;
                }
                self.used[buyer] = true;
                self.current.push(buyer);
                self.go(item + 1, acc + self.instance.value(item, buyer));
                self.current.pop();
                self.used[buyer] = false;
            }
        }
    }
    let mut search = Search {
        instance,
        used: vec![false; n],
        current: Vec::with_capacity(n),
        best: None,
    };
    search.go(0, Money::ZERO);
    let (value, assignment) = search.best.expect("n >= 1");
    let matching = Matching::from_assignment(instance, assignment)?;
    Ok((value, matching))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlackViolation {
    pub item: usize,
    pub buyer: usize,
    pub slack: Money,
}

/// Outcome of the five market-clearing checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClearingVerdict {
    /// (a) pairs with `p_i + q_j < v_ij`.
    pub infeasible_pairs: Vec<SlackViolation>,
    /// (b) the matching is a permutation of `0..n`.
    pub is_permutation: bool,
    /// (c) matched pairs that are not equality edges.
    pub loose_matched_pairs: Vec<SlackViolation>,
    /// (d) `sum p + sum q` and the matching's value.
    pub dual_objective: Money,
    pub matching_value: Option<Money>,
    pub strong_duality: bool,
    /// (e) items with a negative price.
    pub negative_prices: Vec<usize>,
    pub market_clearing: bool,
}

/// Runs every check independently; failures are reported, not raised.
pub fn verify_market_clearing(
    instance: &MarketInstance,
    matching: &Matching,
    duals: &DualSolution,
) -> ClearingVerdict {
    let n = instance.n();
    let shape_ok = duals.prices.len() == n && duals.profits.len() == n;

    let mut infeasible_pairs = Vec::new();
    if shape_ok {
        for i in 0..n {
            for j in 0..n {
                let slack = duals.slack(instance, i, j);
                if slack.is_negative() {
                    infeasible_pairs.push(SlackViolation { item: i, buyer: j, slack });
                }
            }
        }
    }

    let checked = Matching::from_assignment(instance, matching.assignment.clone()).ok();
    let is_permutation = checked.is_some();

    let loose_matched_pairs: Vec<SlackViolation> = match (&checked, shape_ok) {
        (Some(m), true) => m
            .pairs()
            .map(|(i, j)| SlackViolation { item: i, buyer: j, slack: duals.slack(instance, i, j) })
            .filter(|v| v.slack != Money::ZERO)
            .collect(),
        _ => Vec::new(),
    };

    let dual_objective = duals.objective();
    let matching_value = checked.as_ref().map(|m| m.value);
    let strong_duality = shape_ok && matching_value == Some(dual_objective);

    let negative_prices: Vec<usize> = duals
        .prices
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_negative())
        .map(|(i, _)| i)
        .collect();

    let market_clearing = shape_ok
        && infeasible_pairs.is_empty()
        && is_permutation
        && loose_matched_pairs.is_empty()
        && strong_duality
        && negative_prices.is_empty();

    ClearingVerdict {
        infeasible_pairs,
        is_permutation,
        loose_matched_pairs,
        dual_objective,
        matching_value,
        strong_duality,
        negative_prices,
        market_clearing,
    }
}

/// A random market-clearing price vector at or above `base`.
///
/// Prices stay market clearing for `matching` while each coordinate rises by
/// at most its own slack `min_k (p_k + v_{i,M(i)} - v_{k,M(i)}) - p_i`; a
/// uniform shift is always allowed. `base` must be market clearing.
pub fn perturb_market_clearing<R: Rng + ?Sized>(
    instance: &MarketInstance,
    matching: &Matching,
    base: &[Money],
    rng: &mut R,
) -> Vec<Money> {
    let n = instance.n();
    let mut prices = base.to_vec();
    let bound = instance.max_valuation().0.max(1);
    for _ in 0..2 * n {
        let item = rng.random_range(0..n);
        let buyer = matching.buyer_of(item);
        let own = instance.value(item, buyer);
        let room = (0..n)
            .filter(|&k| k != item)
            .map(|k| prices[k] + own - instance.value(k, buyer) - prices[item])
            .min();
        // n = 1: nothing constrains the lone price.
        let room = room.map_or(bound, |r| r.0.min(bound));
        if room > 0 {
            prices[item] += Money(rng.random_range(0..=room));
        }
    }
    let shift = rng.random_range(0..=bound);
    prices.iter_mut().for_each(|p| *p += Money(shift));
    prices
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buyer_optimal::buyer_optimal_outcome;
    use crate::solver::solve_assignment;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(v: &[i64]) -> Vec<Money> {
        v.iter().copied().map(Money).collect()
    }

    fn inst(rows: &[&[i64]]) -> MarketInstance {
        MarketInstance::from_matrix(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let (v, mt) = brute_force_optimum(&inst(&[&[3, 1], &[1, 2]]), 8).unwrap();
        assert_eq!((v, mt.assignment), (Money(5), vec![0, 1]));
        let (v, mt) = brute_force_optimum(&inst(&[&[10, 8]]), 8).unwrap();
        assert_eq!((v, mt.assignment), (Money(10), vec![0, 1]));
        let zero = MarketInstance::from_matrix(&vec![vec![0; 4]; 4]).unwrap();
        let (v, mt) = brute_force_optimum(&zero, 8).unwrap();
        assert_eq!((v, mt.assignment), (Money(0), vec![0, 1, 2, 3]));
    }

    #[test]
    fn oracle_tie_break_is_lexicographic() {
        let (_, mt) = brute_force_optimum(&inst(&[&[1, 2], &[2, 1]]), 8).unwrap();
        assert_eq!(mt.assignment, vec![1, 0]);
        let (_, mt) = brute_force_optimum(&inst(&[&[2, 2], &[2, 2]]), 8).unwrap();
        assert_eq!(mt.assignment, vec![0, 1]);
    }

    #[test]
    fn oracle_limit() {
        let big = MarketInstance::from_matrix(&vec![vec![1; 9]; 9]).unwrap();
        assert!(matches!(
            brute_force_optimum(&big, 8),
            Err(MarketError::OracleLimit { n: 9, limit: 8 })
        ));
    }

    #[test]
    fn solver_output_is_clearing() {
        let instance = inst(&[&[7, 2, 9], &[3, 3, 3], &[8, 1, 0]]);
        let (matching, duals) = solve_assignment(&instance);
        let verdict = verify_market_clearing(&instance, &matching, &duals);
        // Row-maxima initialization never lowers prices below zero.
        assert!(verdict.market_clearing, "{verdict:?}");
    }

    #[test]
    fn infeasible_pair_is_reported() {
        let instance = inst(&[&[10, 8]]);
        let matching = Matching::from_assignment(&instance, vec![0, 1]).unwrap();
        let duals = DualSolution { prices: m(&[7, 0]), profits: m(&[3, 0]) };
        let verdict = verify_market_clearing(&instance, &matching, &duals);
        assert!(!verdict.market_clearing);
        assert_eq!(
            verdict.infeasible_pairs,
            vec![SlackViolation { item: 0, buyer: 1, slack: Money(-1) }]
        );
    }

    #[test]
    fn non_optimal_matching_fails_complementarity() {
        let instance = inst(&[&[3, 1], &[1, 2]]);
        let matching = Matching::from_assignment(&instance, vec![1, 0]).unwrap();
        let duals = DualSolution { prices: m(&[0, 0]), profits: m(&[3, 2]) };
        let verdict = verify_market_clearing(&instance, &matching, &duals);
        assert!(verdict.infeasible_pairs.is_empty());
        assert_eq!(verdict.loose_matched_pairs.len(), 2);
        assert!(!verdict.strong_duality);
        assert_eq!(verdict.matching_value, Some(Money(2)));
        assert!(!verdict.market_clearing);
    }

    #[test]
    fn bad_permutation_and_negative_price() {
        let instance = inst(&[&[3, 1], &[1, 2]]);
        let matching = Matching { assignment: vec![0, 0], value: Money(4) };
        let duals = DualSolution { prices: m(&[-1, 0]), profits: m(&[4, 2]) };
        let verdict = verify_market_clearing(&instance, &matching, &duals);
        assert!(!verdict.is_permutation);
        assert_eq!(verdict.negative_prices, vec![0]);
        assert!(!verdict.market_clearing);
    }

    #[test]
    fn perturbation_stays_clearing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let instance = inst(&[&[7, 2, 9], &[3, 3, 3], &[8, 1, 0]]);
        let outcome = buyer_optimal_outcome(&instance);
        for _ in 0..50 {
            let p = perturb_market_clearing(&instance, &outcome.matching, &outcome.duals.prices, &mut rng);
            let duals = DualSolution::from_prices(&instance, p).unwrap();
            assert!(verify_market_clearing(&instance, &outcome.matching, &duals).market_clearing);
        }
    }
}
