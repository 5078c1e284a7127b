//! Market instances, matchings, dual solutions and the equality graph.
//!
//! Valuations are stored as `valuations[item][buyer]`. Instances are always
//! square; rectangular inputs go through [`pad_to_square`], which appends
//! all-zero dummy rows or columns.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::money::{Money, MAX_AMOUNT};

pub const DUMMY_PREFIX: &str = "__dummy_";

pub fn dummy_item_label(index: usize) -> String {
    format!("{DUMMY_PREFIX}item_{index}")
}

pub fn dummy_buyer_label(index: usize) -> String {
    format!("{DUMMY_PREFIX}buyer_{index}")
}

/// A square unit-demand market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketInstance {
    item_labels: Vec<String>,
    buyer_labels: Vec<String>,
    valuations: Vec<Vec<Money>>,
    dummy_items: BTreeSet<usize>,
    dummy_buyers: BTreeSet<usize>,
    scale: u64,
}

/// Pads an `m x k` valuation matrix to `n x n` with `n = max(m, k)`.
///
/// Added items and buyers get zero valuations and synthetic labels
/// (`__dummy_item_<index>`, `__dummy_buyer_<index>`).
pub fn pad_to_square(
    item_labels: Vec<String>,
    buyer_labels: Vec<String>,
    valuations: Vec<Vec<Money>>,
    scale: u64,
) -> Result<MarketInstance> {
    let m = item_labels.len();
    let k = buyer_labels.len();
    if m == 0 || k == 0 {
        return Err(MarketError::Dimension(
            "a market needs at least one item and one buyer".into(),
        ));
    }
    if valuations.len() != m {
        return Err(MarketError::Dimension(format!(
            "{m} item labels but {} valuation rows",
            valuations.len()
        )));
    }
    if let Some((i, row)) = valuations.iter().enumerate().find(|(_, r)| r.len() != k) {
        return Err(MarketError::Dimension(format!(
            "row {i} has {} entries, expected {k}",
            row.len()
        )));
    }
    for label in item_labels.iter().chain(&buyer_labels) {
        if label.starts_with(DUMMY_PREFIX) {
            return Err(MarketError::ReservedLabel(label.clone()));
        }
    }

    let n = m.max(k);
    let mut item_labels = item_labels;
    let mut buyer_labels = buyer_labels;
    let mut valuations = valuations;
    for row in &mut valuations {
        row.resize(n, Money::ZERO);
    }
    let dummy_items: BTreeSet<usize> = (m..n).collect();
    let dummy_buyers: BTreeSet<usize> = (k..n).collect();
    for i in m..n {
        item_labels.push(dummy_item_label(i));
        valuations.push(vec![Money::ZERO; n]);
    }
    for j in k..n {
        buyer_labels.push(dummy_buyer_label(j));
    }
    MarketInstance::new(
        item_labels,
        buyer_labels,
        valuations,
        dummy_items,
        dummy_buyers,
        scale,
    )
}

impl MarketInstance {
    pub fn new(
        item_labels: Vec<String>,
        buyer_labels: Vec<String>,
        valuations: Vec<Vec<Money>>,
        dummy_items: BTreeSet<usize>,
        dummy_buyers: BTreeSet<usize>,
        scale: u64,
    ) -> Result<Self> {
        let n = valuations.len();
        if n == 0 {
            return Err(MarketError::Dimension("empty market".into()));
        }
        if scale == 0 {
            return Err(MarketError::Parse("scale must be positive".into()));
        }
        if item_labels.len() != n || buyer_labels.len() != n {
            return Err(MarketError::Dimension(format!(
                "{} item labels and {} buyer labels for a {n}x{n} matrix",
                item_labels.len(),
                buyer_labels.len()
            )));
        }
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != n {
                return Err(MarketError::Dimension(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if v.is_negative() {
                    return Err(MarketError::NegativeValuation {
                        item: i,
                        buyer: j,
                        value: v.to_string(),
                    });
                }
                if v.0 > MAX_AMOUNT {
                    return Err(MarketError::OutOfRange(v.to_string()));
                }
            }
        }
        for labels in [&item_labels, &buyer_labels] {
            let mut seen = HashSet::new();
            for label in labels.iter() {
                if !seen.insert(label.as_str()) {
                    return Err(MarketError::DuplicateLabel(label.clone()));
                }
            }
        }
        if let Some(&i) = dummy_items.iter().find(|&&i| i >= n) {
            return Err(MarketError::Index(format!("dummy item {i}")));
        }
        if let Some(&j) = dummy_buyers.iter().find(|&&j| j >= n) {
            return Err(MarketError::Index(format!("dummy buyer {j}")));
        }
        for &i in &dummy_items {
            if valuations[i].iter().any(|v| *v != Money::ZERO) {
                return Err(MarketError::Dimension(format!(
                    "dummy item {i} has a nonzero valuation"
                )));
            }
        }
        for &j in &dummy_buyers {
            if valuations.iter().any(|row| row[j] != Money::ZERO) {
                return Err(MarketError::Dimension(format!(
                    "dummy buyer {j} has a nonzero valuation"
                )));
            }
        }
        Ok(Self {
            item_labels,
            buyer_labels,
            valuations,
            dummy_items,
            dummy_buyers,
            scale,
        })
    }

    /// Builds an instance from a (possibly rectangular) integer matrix with
    /// generated labels `item_<i>` / `buyer_<j>` at scale 1.
    pub fn from_matrix(matrix: &[Vec<i64>]) -> Result<Self> {
        let m = matrix.len();
        let k = matrix.first().map_or(0, Vec::len);
        let valuations = matrix
            .iter()
            .map(|row| row.iter().copied().map(Money).collect())
            .collect();
        pad_to_square(
            (0..m).map(|i| format!("item_{i}")).collect(),
            (0..k).map(|j| format!("buyer_{j}")).collect(),
            valuations,
            1,
        )
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    #[inline]
    pub fn value(&self, item: usize, buyer: usize) -> Money {
        self.valuations[item][buyer]
    }

    pub fn valuations(&self) -> &[Vec<Money>] {
        &self.valuations
    }

    pub fn item_labels(&self) -> &[String] {
        &self.item_labels
    }

    pub fn buyer_labels(&self) -> &[String] {
        &self.buyer_labels
    }

    pub fn dummy_items(&self) -> &BTreeSet<usize> {
        &self.dummy_items
    }

    pub fn dummy_buyers(&self) -> &BTreeSet<usize> {
        &self.dummy_buyers
    }

    pub fn is_dummy_item(&self, item: usize) -> bool {
        self.dummy_items.contains(&item)
    }

    pub fn is_dummy_buyer(&self, buyer: usize) -> bool {
        self.dummy_buyers.contains(&buyer)
    }

    pub fn item_index(&self, label: &str) -> Option<usize> {
        self.item_labels.iter().position(|l| l == label)
    }

    pub fn buyer_index(&self, label: &str) -> Option<usize> {
        self.buyer_labels.iter().position(|l| l == label)
    }

    /// Number of real (non-dummy) items and buyers.
    pub fn original_shape(&self) -> (usize, usize) {
        (
            self.n() - self.dummy_items.len(),
            self.n() - self.dummy_buyers.len(),
        )
    }

    /// Buyer `j` replaced by a bidder with zero valuation for every item.
    pub fn without_buyer(&self, buyer: usize) -> MarketInstance {
        let mut out = self.clone();
        for row in &mut out.valuations {
            row[buyer] = Money::ZERO;
        }
        out
    }

    /// Item `i` and buyer `j` both zeroed out; indices stay stable.
    pub fn without_pair(&self, item: usize, buyer: usize) -> MarketInstance {
        let mut out = self.without_buyer(buyer);
        out.valuations[item].fill(Money::ZERO);
        out
    }

    /// Replaces buyer `j`'s reported valuations.
    ///
    /// Entries for dummy items must be zero; the dummy markers are kept.
    pub fn with_buyer_column(&self, buyer: usize, column: &[Money]) -> Result<MarketInstance> {
        let n = self.n();
        if buyer >= n {
            return Err(MarketError::Index(format!("buyer {buyer} of {n}")));
        }
        if column.len() != n {
            return Err(MarketError::Dimension(format!(
                "column has {} entries, expected {n}",
                column.len()
            )));
        }
        if self.is_dummy_buyer(buyer) {
            return Err(MarketError::Index(format!(
                "buyer {buyer} is a dummy and cannot report valuations"
            )));
        }
        let mut out = self.clone();
        for (i, &v) in column.iter().enumerate() {
            if v.is_negative() {
                return Err(MarketError::NegativeValuation {
                    item: i,
                    buyer,
                    value: v.to_string(),
                });
            }
            if self.is_dummy_item(i) && v != Money::ZERO {
                return Err(MarketError::Dimension(format!(
                    "dummy item {i} must stay at zero valuation"
                )));
            }
            out.valuations[i][buyer] = v;
        }
        Ok(out)
    }

    pub fn buyer_column(&self, buyer: usize) -> Vec<Money> {
        self.valuations.iter().map(|row| row[buyer]).collect()
    }

    pub fn max_valuation(&self) -> Money {
        self.valuations
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(Money::ZERO)
    }
}

/// A perfect matching stored as `assignment[item] = buyer`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub assignment: Vec<usize>,
    pub value: Money,
}

impl Matching {
    /// Validates that `assignment` is a permutation and computes its value.
    pub fn from_assignment(instance: &MarketInstance, assignment: Vec<usize>) -> Result<Self> {
        let n = instance.n();
        if assignment.len() != n {
            return Err(MarketError::Dimension(format!(
                "assignment has {} entries, expected {n}",
                assignment.len()
            )));
        }
        let mut seen = vec![false; n];
        for &j in &assignment {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(MarketError::Dimension(
                    "assignment is not a permutation".into(),
                ));
            }
        }
        let value = assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| instance.value(i, j))
            .sum();
        Ok(Self { assignment, value })
    }

    pub fn buyer_of(&self, item: usize) -> usize {
        self.assignment[item]
    }

    /// Inverse map `buyer -> item`.
    pub fn item_of_buyer(&self) -> Vec<usize> {
        let mut inverse = vec![usize::MAX; self.assignment.len()];
        for (i, &j) in self.assignment.iter().enumerate() {
            inverse[j] = i;
        }
        inverse
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment.iter().copied().enumerate()
    }
}

/// Item prices `p` and buyer profits `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualSolution {
    pub prices: Vec<Money>,
    pub profits: Vec<Money>,
}

impl DualSolution {
    /// `p_i = max_j v_ij`, `q = 0`.
    pub fn row_maxima(instance: &MarketInstance) -> Self {
        let prices = instance
            .valuations()
            .iter()
            .map(|row| row.iter().copied().max().unwrap_or(Money::ZERO))
            .collect();
        Self {
            prices,
            profits: vec![Money::ZERO; instance.n()],
        }
    }

    /// `p = 0`, `q_j = max_i v_ij`.
    pub fn column_maxima(instance: &MarketInstance) -> Self {
        let n = instance.n();
        let profits = (0..n)
            .map(|j| (0..n).map(|i| instance.value(i, j)).max().unwrap_or(Money::ZERO))
            .collect();
        Self {
            prices: vec![Money::ZERO; n],
            profits,
        }
    }

    /// Pairs `p` with the smallest feasible profits `q_j = max_i (v_ij - p_i)`.
    pub fn from_prices(instance: &MarketInstance, prices: Vec<Money>) -> Result<Self> {
        let n = instance.n();
        if prices.len() != n {
            return Err(MarketError::Dimension(format!(
                "{} prices for {n} items",
                prices.len()
            )));
        }
        let profits = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| instance.value(i, j) - prices[i])
                    .max()
                    .expect("n >= 1")
            })
            .collect();
        Ok(Self { prices, profits })
    }

    pub fn objective(&self) -> Money {
        self.prices.iter().sum::<Money>() + self.profits.iter().sum::<Money>()
    }

    #[inline]
    pub fn slack(&self, instance: &MarketInstance, item: usize, buyer: usize) -> Money {
        self.prices[item] + self.profits[buyer] - instance.value(item, buyer)
    }

    /// First pair (row-major) with negative slack.
    pub fn first_violation(&self, instance: &MarketInstance) -> Option<(usize, usize)> {
        let n = instance.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| self.slack(instance, i, j).is_negative())
    }

    pub fn check_feasible(&self, instance: &MarketInstance) -> Result<()> {
        let n = instance.n();
        if self.prices.len() != n || self.profits.len() != n {
            return Err(MarketError::Dimension(format!(
                "duals of length {}/{} for n = {n}",
                self.prices.len(),
                self.profits.len()
            )));
        }
        match self.first_violation(instance) {
            None => Ok(()),
            Some((item, buyer)) => Err(MarketError::Infeasible {
                item,
                buyer,
                sum: (self.prices[item] + self.profits[buyer]).0,
                valuation: instance.value(item, buyer).0,
            }),
        }
    }

    pub fn min_price(&self) -> Money {
        self.prices.iter().copied().min().unwrap_or(Money::ZERO)
    }

    /// Market clearing w.r.t. `matching`: feasible and every matched edge tight.
    pub fn check_clearing(&self, instance: &MarketInstance, matching: &Matching) -> Result<()> {
        self.check_feasible(instance)?;
        match matching
            .pairs()
            .find(|&(i, j)| self.slack(instance, i, j) != Money::ZERO)
        {
            None => Ok(()),
            Some((i, j)) => Err(MarketError::NotMarketClearing(format!(
                "matched edge (item {i}, buyer {j}) is not an equality edge"
            ))),
        }
    }
}

/// Tight edges `(item, buyer)` with `p_i + q_j = v_ij`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualityGraph {
    pub edges: BTreeSet<(usize, usize)>,
}

impl EqualityGraph {
    pub fn contains(&self, item: usize, buyer: usize) -> bool {
        self.edges.contains(&(item, buyer))
    }

    pub fn buyers_of(&self, item: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((item, 0)..(item + 1, 0))
            .map(|&(_, j)| j)
    }
}

/// Derives the equality graph, rejecting infeasible duals.
pub fn equality_graph(instance: &MarketInstance, duals: &DualSolution) -> Result<EqualityGraph> {
    duals.check_feasible(instance)?;
    let n = instance.n();
    let edges = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| duals.slack(instance, i, j) == Money::ZERO)
        .collect();
    Ok(EqualityGraph { edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[i64]) -> Vec<Money> {
        v.iter().copied().map(Money).collect()
    }

    fn edges(list: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        list.iter().copied().collect()
    }

    #[test]
    fn square_input_is_unchanged() {
        let inst = MarketInstance::from_matrix(&[vec![3, 1], vec![1, 2]]).unwrap();
        assert_eq!(inst.n(), 2);
        assert!(inst.dummy_items().is_empty());
        assert!(inst.dummy_buyers().is_empty());
        assert_eq!(inst.valuations(), &[m(&[3, 1]), m(&[1, 2])]);
    }

    #[test]
    fn pads_missing_items_with_zero_rows() {
        let inst = MarketInstance::from_matrix(&[vec![10, 8]]).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.valuations(), &[m(&[10, 8]), m(&[0, 0])]);
        assert_eq!(inst.dummy_items(), &edges_set(&[1]));
        assert_eq!(inst.item_labels()[1], "__dummy_item_1");
    }

    #[test]
    fn pads_missing_buyers_with_zero_columns() {
        let inst = MarketInstance::from_matrix(&[vec![4], vec![5], vec![6]]).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.valuations(), &[m(&[4, 0, 0]), m(&[5, 0, 0]), m(&[6, 0, 0])]);
        assert_eq!(inst.dummy_buyers(), &edges_set(&[1, 2]));
        assert!(inst.dummy_items().is_empty());
    }

    fn edges_set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(matches!(
            MarketInstance::from_matrix(&[vec![1, -1]]),
            Err(MarketError::NegativeValuation { item: 0, buyer: 1, .. })
        ));
        assert!(matches!(
            MarketInstance::from_matrix(&[vec![1, 2], vec![3]]),
            Err(MarketError::Dimension(_))
        ));
        assert!(MarketInstance::from_matrix(&[]).is_err());
        let dup = pad_to_square(
            vec!["a".into(), "a".into()],
            vec!["x".into()],
            vec![m(&[1]), m(&[2])],
            1,
        );
        assert!(matches!(dup, Err(MarketError::DuplicateLabel(l)) if l == "a"));
        let reserved = pad_to_square(
            vec!["__dummy_item_0".into()],
            vec!["x".into()],
            vec![m(&[1])],
            1,
        );
        assert!(matches!(reserved, Err(MarketError::ReservedLabel(_))));
    }

    #[test]
    fn equality_graph_examples() {
        let inst = MarketInstance::from_matrix(&[vec![3, 1], vec![1, 2]]).unwrap();
        let duals = DualSolution {
            prices: m(&[0, 0]),
            profits: m(&[3, 2]),
        };
        let g = equality_graph(&inst, &duals).unwrap();
        assert_eq!(g.edges, edges(&[(0, 0), (1, 1)]));

        let inst = MarketInstance::from_matrix(&[vec![10, 8]]).unwrap();
        let duals = DualSolution {
            prices: m(&[8, 0]),
            profits: m(&[2, 0]),
        };
        let g = equality_graph(&inst, &duals).unwrap();
        assert_eq!(g.edges, edges(&[(0, 0), (0, 1), (1, 1)]));
        assert_eq!(g.buyers_of(0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn row_maxima_make_row_argmax_tight() {
        let inst = MarketInstance::from_matrix(&[vec![4, 7, 7], vec![2, 0, 1], vec![5, 5, 5]]).unwrap();
        let g = equality_graph(&inst, &DualSolution::row_maxima(&inst)).unwrap();
        assert_eq!(
            g.edges,
            edges(&[(0, 1), (0, 2), (1, 0), (2, 0), (2, 1), (2, 2)])
        );
    }

    #[test]
    fn infeasible_duals_name_the_pair() {
        let inst = MarketInstance::from_matrix(&[vec![10, 8]]).unwrap();
        let duals = DualSolution {
            prices: m(&[7, 0]),
            profits: m(&[3, 0]),
        };
        let err = equality_graph(&inst, &duals).unwrap_err();
        assert!(matches!(
            err,
            MarketError::Infeasible { item: 0, buyer: 1, sum: 7, valuation: 8 }
        ));
    }

    #[test]
    fn matching_must_be_a_permutation() {
        let inst = MarketInstance::from_matrix(&[vec![3, 1], vec![1, 2]]).unwrap();
        assert_eq!(Matching::from_assignment(&inst, vec![1, 0]).unwrap().value, Money(2));
        assert!(Matching::from_assignment(&inst, vec![0, 0]).is_err());
        assert!(Matching::from_assignment(&inst, vec![0, 2]).is_err());
    }

    #[test]
    fn reported_column_cannot_touch_dummy_items() {
        let inst = MarketInstance::from_matrix(&[vec![10, 8]]).unwrap();
        assert!(inst.with_buyer_column(0, &m(&[9, 0])).is_ok());
        assert!(inst.with_buyer_column(0, &m(&[9, 1])).is_err());
        let wide = MarketInstance::from_matrix(&[vec![1], vec![2]]).unwrap();
        assert!(wide.with_buyer_column(1, &m(&[0, 0])).is_err());
    }
}
