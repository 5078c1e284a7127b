//! Maximum-valuation assignment by price raising (the primal-dual Hungarian
//! method).
//!
//! The solver keeps a feasible dual `(p, q)` and a matching inside the
//! equality graph. For each unmatched buyer it grows the set of items `R`
//! reachable along alternating paths. If the reach touches an unmatched item
//! the matching is augmented; otherwise prices on `R` go up and profits of
//! the reached buyers go down by the smallest slack leaving the reach, which
//! tightens at least one new edge.

use crate::error::{MarketError, Result};
use crate::market::{DualSolution, Matching, MarketInstance};
use crate::money::Money;

/// A matching that may leave nodes uncovered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMatching {
    item_to_buyer: Vec<Option<usize>>,
    buyer_to_item: Vec<Option<usize>>,
}

impl PartialMatching {
    pub fn empty(n: usize) -> Self {
        Self {
            item_to_buyer: vec![None; n],
            buyer_to_item: vec![None; n],
        }
    }

    pub fn from_matching(matching: &Matching) -> Self {
        let mut out = Self::empty(matching.assignment.len());
        for (i, j) in matching.pairs() {
            out.link(i, j);
        }
        out
    }

    pub fn buyer_of(&self, item: usize) -> Option<usize> {
        self.item_to_buyer[item]
    }

    pub fn item_of(&self, buyer: usize) -> Option<usize> {
        self.buyer_to_item[buyer]
    }

    pub fn size(&self) -> usize {
        self.item_to_buyer.iter().flatten().count()
    }

    fn link(&mut self, item: usize, buyer: usize) {
        self.item_to_buyer[item] = Some(buyer);
        self.buyer_to_item[buyer] = Some(item);
    }

    /// Converts to a perfect matching, or `None` if some node is uncovered.
    pub fn to_matching(&self, instance: &MarketInstance) -> Option<Matching> {
        let assignment: Option<Vec<usize>> = self.item_to_buyer.iter().copied().collect();
        Matching::from_assignment(instance, assignment?).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachMode {
    /// From an unmatched buyer: non-matching edge to an item, then the
    /// item's matching edge back to a buyer.
    FromUnmatched,
    /// From a matched buyer: its own matching edge first, then non-matching
    /// edges out of items and matching edges into items.
    MatchedFirst,
}

/// Alternating-path reach from a single buyer in the equality graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingForest {
    pub root: usize,
    /// `R`, in discovery order. Every item here is matched.
    pub reached_items: Vec<usize>,
    /// The root followed by the matching partners of `R`.
    pub reached_buyers: Vec<usize>,
    /// An unmatched item reachable from the root (only in
    /// [`ReachMode::FromUnmatched`]); the traversal stops as soon as one is
    /// found.
    pub free_item: Option<usize>,
    item_parent: Vec<Option<usize>>,
    buyer_parent: Vec<Option<usize>>,
    item_reached: Vec<bool>,
    buyer_reached: Vec<bool>,
}

impl AlternatingForest {
    fn new(root: usize, n: usize) -> Self {
        let mut buyer_reached = vec![false; n];
        buyer_reached[root] = true;
        Self {
            root,
            reached_items: Vec::new(),
            reached_buyers: vec![root],
            free_item: None,
            item_parent: vec![None; n],
            buyer_parent: vec![None; n],
            item_reached: vec![false; n],
            buyer_reached,
        }
    }

    pub fn contains_item(&self, item: usize) -> bool {
        self.item_reached[item]
    }

    pub fn contains_buyer(&self, buyer: usize) -> bool {
        self.buyer_reached[buyer]
    }

    /// Buyer through which `item` was reached.
    pub fn item_parent(&self, item: usize) -> Option<usize> {
        self.item_parent[item]
    }

    /// Item through which `buyer` was reached (`None` for the root).
    pub fn buyer_parent(&self, buyer: usize) -> Option<usize> {
        self.buyer_parent[buyer]
    }

    /// Alternating node sequence `[item, buyer, item, ..., item]` leading from
    /// the root (excluded) to `item`.
    pub fn path_to_item(&self, item: usize) -> Option<Vec<usize>> {
        self.item_parent[item]?;
        let mut nodes = Vec::new();
        let mut current = item;
        loop {
            nodes.push(current);
            let buyer = self.item_parent[current].expect("reached items have parents");
            if buyer == self.root {
                break;
            }
            nodes.push(buyer);
            current = self.buyer_parent[buyer].expect("non-root buyers have parents");
        }
        nodes.reverse();
        Some(nodes)
    }

    fn add_item(&mut self, item: usize, via: usize) {
        self.item_reached[item] = true;
        self.item_parent[item] = Some(via);
        self.reached_items.push(item);
    }

    fn add_buyer(&mut self, buyer: usize, via: usize) {
        self.buyer_reached[buyer] = true;
        self.buyer_parent[buyer] = Some(via);
        self.reached_buyers.push(buyer);
    }
}

/// Grows the maximal alternating reach from `start` within the equality graph
/// of `duals`, visiting nodes in ascending index order (breadth first).
pub fn alternating_reach(
    instance: &MarketInstance,
    matching: &PartialMatching,
    duals: &DualSolution,
    start: usize,
    mode: ReachMode,
) -> Result<AlternatingForest> {
    let n = instance.n();
    if start >= n {
        return Err(MarketError::Index(format!("buyer {start} of {n}")));
    }
    debug_assert!(duals.first_violation(instance).is_none(), "duals infeasible");
    let tight = |i: usize, j: usize| duals.slack(instance, i, j) == Money::ZERO;
    let mut forest = AlternatingForest::new(start, n);

    match mode {
        ReachMode::FromUnmatched => {
            if matching.item_of(start).is_some() {
                return Err(MarketError::ModeMismatch {
                    buyer: start,
                    actual: "matched",
                    expected: "unmatched",
                });
            }
            let mut head = 0;
            while head < forest.reached_buyers.len() {
                let buyer = forest.reached_buyers[head];
                head += 1;
                for item in 0..n {
                    if forest.item_reached[item] || !tight(item, buyer) {
                        continue;
                    }
                    match matching.buyer_of(item) {
                        None => {
                            forest.item_parent[item] = Some(buyer);
                            forest.free_item = Some(item);
                            return Ok(forest);
                        }
                        Some(mate) => {
                            forest.add_item(item, buyer);
                            forest.add_buyer(mate, item);
                        }
                    }
                }
            }
        }
        ReachMode::MatchedFirst => {
            let Some(first) = matching.item_of(start) else {
                return Err(MarketError::ModeMismatch {
                    buyer: start,
                    actual: "unmatched",
                    expected: "matched",
                });
            };
            forest.add_item(first, start);
            let mut head = 0;
            while head < forest.reached_items.len() {
                let item = forest.reached_items[head];
                head += 1;
                let mate = matching.buyer_of(item);
                for buyer in 0..n {
                    if forest.buyer_reached[buyer] || Some(buyer) == mate || !tight(item, buyer) {
                        continue;
                    }
                    forest.add_buyer(buyer, item);
                    if let Some(next) = matching.item_of(buyer) {
                        if !forest.item_reached[next] {
                            forest.add_item(next, buyer);
                        }
                    }
                }
            }
        }
    }
    Ok(forest)
}

/// Raises prices on `R` and lowers profits of the reached buyers by the
/// minimum slack between items outside `R` and reached buyers.
///
/// Returns the new duals and the first (lowest `(item, buyer)`) edge that
/// became tight.
pub fn price_raise_step(
    instance: &MarketInstance,
    forest: &AlternatingForest,
    duals: &DualSolution,
) -> Result<(DualSolution, (usize, usize))> {
    if forest.free_item.is_some() {
        return Err(MarketError::Precondition(
            "reach contains an augmenting path; augment instead of raising".into(),
        ));
    }
    let n = instance.n();
    let mut best: Option<(Money, (usize, usize))> = None;
    for item in (0..n).filter(|&i| !forest.contains_item(i)) {
        for &buyer in &forest.reached_buyers {
            let slack = duals.slack(instance, item, buyer);
            if best.is_none_or(|(b, _)| slack < b) {
                best = Some((slack, (item, buyer)));
            }
        }
    }
    let (delta, edge) = best.ok_or_else(|| {
        MarketError::Precondition("every item is already in the reach".into())
    })?;
    if delta <= Money::ZERO {
        return Err(MarketError::Precondition(format!(
            "reach is not maximal: edge {edge:?} has slack {delta}"
        )));
    }
    let mut next = duals.clone();
    for &item in &forest.reached_items {
        next.prices[item] += delta;
    }
    for &buyer in &forest.reached_buyers {
        next.profits[buyer] -= delta;
    }
    Ok((next, edge))
}

/// Flips the matching along the root-to-free-item path of `forest`.
fn augment(matching: &mut PartialMatching, forest: &AlternatingForest) {
    let mut item = forest.free_item.expect("augment needs a free item");
    loop {
        let buyer = forest.item_parent[item].expect("path items have parents");
        let previous = matching.item_of(buyer);
        matching.link(item, buyer);
        if buyer == forest.root {
            break;
        }
        item = previous.expect("non-root buyers on the path are matched");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initialization {
    /// `p_i = max_j v_ij`, `q = 0`.
    #[default]
    RowMaxima,
    /// `p = 0`, `q_j = max_i v_ij`.
    ColumnMaxima,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub greedy_matches: usize,
    pub augmentations: usize,
    pub raises: usize,
    pub max_raises_per_augmentation: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub matching: Matching,
    pub duals: DualSolution,
    pub stats: SolveStats,
}

/// Maximum-valuation perfect matching plus complementary feasible duals.
pub fn solve_assignment(instance: &MarketInstance) -> (Matching, DualSolution) {
    let solution = solve_assignment_with(instance, Initialization::default());
    (solution.matching, solution.duals)
}

pub fn solve_assignment_with(instance: &MarketInstance, init: Initialization) -> Solution {
    let n = instance.n();
    let mut duals = match init {
        Initialization::RowMaxima => DualSolution::row_maxima(instance),
        Initialization::ColumnMaxima => DualSolution::column_maxima(instance),
    };
    let mut matching = PartialMatching::empty(n);
    let mut stats = SolveStats::default();

    for item in 0..n {
        if let Some(buyer) = (0..n)
            .find(|&j| matching.item_of(j).is_none() && duals.slack(instance, item, j) == Money::ZERO)
        {
            matching.link(item, buyer);
            stats.greedy_matches += 1;
        }
    }

    for root in 0..n {
        if matching.item_of(root).is_some() {
            continue;
        }
        let mut raises = 0;
        loop {
            let forest = alternating_reach(instance, &matching, &duals, root, ReachMode::FromUnmatched)
                .expect("root is unmatched");
            if forest.free_item.is_some() {
                augment(&mut matching, &forest);
                stats.augmentations += 1;
                break;
            }
            let (next, _) = price_raise_step(instance, &forest, &duals)
                .expect("an unmatched buyer implies an unmatched item outside the reach");
            duals = next;
            raises += 1;
            assert!(raises <= n, "reach must grow with every raise");
            debug_assert!(duals.first_violation(instance).is_none());
            debug_assert!((0..n).all(|i| matching
                .buyer_of(i)
                .is_none_or(|j| duals.slack(instance, i, j) == Money::ZERO)));
        }
        stats.raises += raises;
        stats.max_raises_per_augmentation = stats.max_raises_per_augmentation.max(raises);
    }
    assert!(stats.augmentations <= n);

    let matching = matching
        .to_matching(instance)
        .expect("every buyer is matched after the last augmentation");
    debug_assert_eq!(matching.value, duals.objective());
    Solution {
        matching,
        duals,
        stats,
    }
}
