//! Incentive audit: does any unilateral misreport raise a bidder's utility
//! under posted buyer-optimal prices?
//!
//! Each misreport replaces one buyer's valuation column, the whole
//! price-raising + reduction pipeline is rerun, and the resulting assignment
//! is scored with the bidder's true valuations.

use std::collections::HashSet;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::buyer_optimal::{buyer_optimal_outcome, MarketOutcome};
use crate::error::{MarketError, Result};
use crate::market::MarketInstance;
use crate::money::Money;

/// Exhaustive grids are only generated up to this many items.
pub const GRID_MAX_N: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MisreportStrategy {
    /// `trials` vectors, each entry uniform in `[0, 2 * max v]`.
    Random,
    /// Shifts, single-entry perturbations, all zeros, doubling.
    Structured,
    /// Every vector over `{0, max v / 2, max v, 2 * max v}` (n <= 4 only).
    Grid,
    All,
}

impl FromStr for MisreportStrategy {
    type Err = MarketError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "structured" => Ok(Self::Structured),
            "grid" => Ok(Self::Grid),
            "all" => Ok(Self::All),
            other => Err(MarketError::Parse(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub item: usize,
    pub price: Money,
    /// Computed with the bidder's true valuation.
    pub utility: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub misreport: Vec<Money>,
    pub item: usize,
    pub price: Money,
    pub utility: Money,
    pub utility_delta: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub bidder: usize,
    pub truthful_outcome: Outcome,
    pub deviations: Vec<Deviation>,
    pub max_utility_delta: Money,
    /// Deviations with a strictly positive delta.
    pub violations: usize,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn outcome_for(
    truth: &MarketInstance,
    bidder: usize,
    outcome: &MarketOutcome,
) -> Outcome {
    let item = outcome.item_of_buyer(bidder);
    let price = outcome.duals.prices[item];
    Outcome {
        item,
        price,
        utility: truth.value(item, bidder) - price,
    }
}

/// Misreport vectors for `bidder`; entries for dummy items are always zero.
pub fn generate_misreports<R: Rng + ?Sized>(
    instance: &MarketInstance,
    bidder: usize,
    strategy: MisreportStrategy,
    trials: usize,
    rng: &mut R,
) -> Vec<Vec<Money>> {
    let n = instance.n();
    let real: Vec<usize> = (0..n).filter(|&i| !instance.is_dummy_item(i)).collect();
    let top = instance.max_valuation().0.max(1);
    let truth = instance.buyer_column(bidder);
    let clamp = |v: i64| Money(v.max(0));
    let mut out = Vec::new();

    if matches!(strategy, MisreportStrategy::Random | MisreportStrategy::All) {
        for _ in 0..trials {
            let mut report = vec![Money::ZERO; n];
            for &i in &real {
                report[i] = Money(rng.random_range(0..=2 * top));
            }
            out.push(report);
        }
    }

    if matches!(strategy, MisreportStrategy::Structured | MisreportStrategy::All) {
        let map = |f: &dyn Fn(usize, Money) -> Money| -> Vec<Money> {
            (0..n)
                .map(|i| if instance.is_dummy_item(i) { Money::ZERO } else { f(i, truth[i]) })
                .collect()
        };
        out.push(truth.clone());
        for shift in [1, (top / 2).max(1), top] {
            out.push(map(&|_, v| v + Money(shift)));
            out.push(map(&|_, v| clamp(v.0 - shift)));
        }
        for &target in &real {
            out.push(map(&|i, v| if i == target { Money::ZERO } else { v }));
            out.push(map(&|i, v| if i == target { v + Money(1) } else { v }));
            out.push(map(&|i, v| if i == target { clamp(v.0 - 1) } else { v }));
            out.push(map(&|i, v| if i == target { Money(2 * top) } else { v }));
        }
        out.push(vec![Money::ZERO; n]);
        out.push(map(&|_, v| Money(2 * v.0)));
    }

    if matches!(strategy, MisreportStrategy::Grid | MisreportStrategy::All) && n <= GRID_MAX_N {
        let mut levels = vec![0, top / 2, top, 2 * top];
        levels.dedup();
        let mut counter = vec![0usize; real.len()];
        loop {
            let mut report = vec![Money::ZERO; n];
            for (slot, &i) in real.iter().enumerate() {
                report[i] = Money(levels[counter[slot]]);
            }
            out.push(report);
            // Odometer increment over the real items.
            let mut pos = 0;
            while pos < counter.len() {
                counter[pos] += 1;
                if counter[pos] < levels.len() {
                    break;
                }
                counter[pos] = 0;
                pos += 1;
            }
            if pos == counter.len() {
                break;
            }
        }
    }

    let mut seen = HashSet::new();
    out.retain(|r| seen.insert(r.clone()));
    out
}

/// Audits one bidder against every generated misreport.
pub fn audit_incentive(
    instance: &MarketInstance,
    bidder: usize,
    strategy: MisreportStrategy,
    trials: usize,
    seed: u64,
) -> Result<AuditReport> {
    if bidder >= instance.n() {
        return Err(MarketError::Index(format!("buyer {bidder} of {}", instance.n())));
    }
    if instance.is_dummy_buyer(bidder) {
        return Err(MarketError::Precondition(format!("buyer {bidder} is a dummy")));
    }
    if trials == 0 {
        return Err(MarketError::Precondition("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truthful_outcome = outcome_for(instance, bidder, &buyer_optimal_outcome(instance));

    let deviations = generate_misreports(instance, bidder, strategy, trials, &mut rng)
        .into_iter()
        .map(|misreport| {
            let reported = instance.with_buyer_column(bidder, &misreport)?;
            let outcome = outcome_for(instance, bidder, &buyer_optimal_outcome(&reported));
            Ok(Deviation {
                misreport,
                item: outcome.item,
                price: outcome.price,
                utility: outcome.utility,
                utility_delta: outcome.utility - truthful_outcome.utility,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_utility_delta = deviations
        .iter()
        .map(|d| d.utility_delta)
        .max()
        .unwrap_or(Money::ZERO);
    let violations = deviations
        .iter()
        .filter(|d| d.utility_delta > Money::ZERO)
        .count();
    Ok(AuditReport {
        bidder,
        truthful_outcome,
        deviations,
        max_utility_delta,
        violations,
    })
}
