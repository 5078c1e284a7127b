//! JSON report schemas. Every amount is an integer in minor units and every
//! report carries the instance scale. Items and buyers are named by label;
//! dummy entities carry `"dummy": true`.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use matchmarket::audit::AuditReport;
use matchmarket::buyer_optimal::OptimalityCertificate;
use matchmarket::market::{DualSolution, Matching, MarketInstance};
use matchmarket::money::Money;
use matchmarket::vcg::{EquivalenceReport, VcgReport};
use matchmarket::verify::{ClearingVerdict, SlackViolation};

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PriceEntry {
    pub item: String,
    pub price: i64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dummy: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProfitEntry {
    pub buyer: String,
    pub profit: i64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dummy: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PairEntry {
    pub item: String,
    pub buyer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<i64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dummy_item: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dummy_buyer: bool,
}

pub fn price_entries(instance: &MarketInstance, prices: &[Money]) -> Vec<PriceEntry> {
    prices
        .iter()
        .enumerate()
        .map(|(i, p)| PriceEntry {
            item: instance.item_labels()[i].clone(),
            price: p.0,
            dummy: instance.is_dummy_item(i),
        })
        .collect()
}

pub fn profit_entries(instance: &MarketInstance, profits: &[Money]) -> Vec<ProfitEntry> {
    profits
        .iter()
        .enumerate()
        .map(|(j, q)| ProfitEntry {
            buyer: instance.buyer_labels()[j].clone(),
            profit: q.0,
            dummy: instance.is_dummy_buyer(j),
        })
        .collect()
}

pub fn pair_entries(instance: &MarketInstance, matching: &Matching) -> Vec<PairEntry> {
    matching
        .pairs()
        .map(|(i, j)| PairEntry {
            item: instance.item_labels()[i].clone(),
            buyer: instance.buyer_labels()[j].clone(),
            valuation: Some(instance.value(i, j).0),
            dummy_item: instance.is_dummy_item(i),
            dummy_buyer: instance.is_dummy_buyer(j),
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OracleCheck {
    pub limit: usize,
    pub value: i64,
    pub agrees: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub command: String,
    pub scale: u64,
    pub value: i64,
    pub assignment: Vec<PairEntry>,
    pub prices: Vec<PriceEntry>,
    pub profits: Vec<ProfitEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
}

impl SolveReport {
    pub fn new(instance: &MarketInstance, matching: &Matching, duals: &DualSolution) -> Self {
        Self {
            command: "solve".into(),
            scale: instance.scale(),
            value: matching.value.0,
            assignment: pair_entries(instance, matching),
            prices: price_entries(instance, &duals.prices),
            profits: profit_entries(instance, &duals.profits),
            oracle: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CertifiedPathEntry {
    pub buyer: String,
    /// `[item, buyer, item, ..., item]`.
    pub path: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CertificateReport {
    Certified {
        paths: Vec<CertifiedPathEntry>,
    },
    Violated {
        buyer: String,
        reach: Vec<String>,
        min_price: i64,
    },
}

impl CertificateReport {
    pub fn new(instance: &MarketInstance, cert: &OptimalityCertificate) -> Self {
        let item = |i: usize| instance.item_labels()[i].clone();
        let buyer = |j: usize| instance.buyer_labels()[j].clone();
        match cert {
            OptimalityCertificate::Certified { paths } => CertificateReport::Certified {
                paths: paths
                    .iter()
                    .map(|p| CertifiedPathEntry {
                        buyer: buyer(p.buyer),
                        path: p
                            .path
                            .iter()
                            .enumerate()
                            .map(|(k, &node)| if k % 2 == 0 { item(node) } else { buyer(node) })
                            .collect(),
                    })
                    .collect(),
            },
            OptimalityCertificate::Violated {
                buyer: b,
                reach,
                min_price,
            } => CertificateReport::Violated {
                buyer: buyer(*b),
                reach: reach.iter().map(|&i| item(i)).collect(),
                min_price: min_price.0,
            },
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, CertificateReport::Certified { .. })
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PricesReport {
    pub command: String,
    pub scale: u64,
    pub buyer_optimal: bool,
    pub value: i64,
    pub assignment: Vec<PairEntry>,
    pub prices: Vec<PriceEntry>,
    pub profits: Vec<ProfitEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VcgPairEntry {
    pub item: String,
    pub buyer: String,
    pub valuation: i64,
    pub v_minus_j: i64,
    pub v_minus_j_minus_i: i64,
    pub personalized_price: i64,
    pub buyer_utility: i64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dummy_item: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dummy_buyer: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VcgReportJson {
    pub command: String,
    pub scale: u64,
    pub total_value: i64,
    pub pairs: Vec<VcgPairEntry>,
}

impl VcgReportJson {
    pub fn new(instance: &MarketInstance, report: &VcgReport) -> Self {
        Self {
            command: "vcg".into(),
            scale: instance.scale(),
            total_value: report.total_value.0,
            pairs: report
                .pairs
                .iter()
                .map(|p| VcgPairEntry {
                    item: instance.item_labels()[p.item].clone(),
                    buyer: instance.buyer_labels()[p.buyer].clone(),
                    valuation: p.valuation.0,
                    v_minus_j: p.v_minus_j.0,
                    v_minus_j_minus_i: p.v_minus_j_minus_i.0,
                    personalized_price: p.personalized_price.0,
                    buyer_utility: p.buyer_utility.0,
                    dummy_item: instance.is_dummy_item(p.item),
                    dummy_buyer: instance.is_dummy_buyer(p.buyer),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AlternateEntry {
    pub assignment: Vec<PairEntry>,
    pub pipeline_prices: Vec<PriceEntry>,
    pub vcg_prices: Vec<PriceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub command: String,
    pub scale: u64,
    pub equivalent: bool,
    pub assignment: Vec<PairEntry>,
    pub pipeline_prices: Vec<PriceEntry>,
    pub vcg_prices: Vec<PriceEntry>,
    pub mismatched_items: Vec<String>,
    pub profit_identity_holds: bool,
    pub alternate_matching: Option<AlternateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
}

impl CheckReport {
    pub fn new(instance: &MarketInstance, report: &EquivalenceReport) -> Self {
        Self {
            command: "check".into(),
            scale: instance.scale(),
            equivalent: report.equivalent,
            assignment: pair_entries(instance, &report.matching),
            pipeline_prices: price_entries(instance, &report.pipeline_prices),
            vcg_prices: price_entries(instance, &report.vcg.prices()),
            mismatched_items: report
                .mismatched_items
                .iter()
                .map(|&i| instance.item_labels()[i].clone())
                .collect(),
            profit_identity_holds: report.profit_identity_holds,
            alternate_matching: report.alternate.as_ref().map(|alt| AlternateEntry {
                assignment: pair_entries(instance, &alt.matching),
                pipeline_prices: price_entries(instance, &alt.pipeline_prices),
                vcg_prices: price_entries(instance, &alt.vcg_prices),
            }),
            certificate: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SlackEntry {
    pub item: String,
    pub buyer: String,
    pub slack: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PairCheck {
    pub passed: bool,
    pub violations: Vec<SlackEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PassCheck {
    pub passed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DualityCheck {
    pub passed: bool,
    pub dual_objective: i64,
    pub matching_value: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PriceSignCheck {
    pub passed: bool,
    pub negative: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClearingChecks {
    pub feasibility: PairCheck,
    pub permutation: PassCheck,
    pub complementary_slackness: PairCheck,
    pub strong_duality: DualityCheck,
    pub nonnegative_prices: PriceSignCheck,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub command: String,
    pub scale: u64,
    pub market_clearing: bool,
    pub checks: ClearingChecks,
}

impl VerifyReport {
    pub fn new(instance: &MarketInstance, verdict: &ClearingVerdict) -> Self {
        let slack = |v: &SlackViolation| SlackEntry {
            item: instance.item_labels()[v.item].clone(),
            buyer: instance.buyer_labels()[v.buyer].clone(),
            slack: v.slack.0,
        };
        Self {
            command: "verify".into(),
            scale: instance.scale(),
            market_clearing: verdict.market_clearing,
            checks: ClearingChecks {
                feasibility: PairCheck {
                    passed: verdict.infeasible_pairs.is_empty(),
                    violations: verdict.infeasible_pairs.iter().map(slack).collect(),
                },
                permutation: PassCheck {
                    passed: verdict.is_permutation,
                },
                complementary_slackness: PairCheck {
                    passed: verdict.is_permutation && verdict.loose_matched_pairs.is_empty(),
                    violations: verdict.loose_matched_pairs.iter().map(slack).collect(),
                },
                strong_duality: DualityCheck {
                    passed: verdict.strong_duality,
                    dual_objective: verdict.dual_objective.0,
                    matching_value: verdict.matching_value.map(|v| v.0),
                },
                nonnegative_prices: PriceSignCheck {
                    passed: verdict.negative_prices.is_empty(),
                    negative: verdict
                        .negative_prices
                        .iter()
                        .map(|&i| instance.item_labels()[i].clone())
                        .collect(),
                },
            },
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub item: String,
    pub price: i64,
    pub utility: i64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dummy_item: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeviationEntry {
    /// Reported valuations in the order of `items`.
    pub misreport: Vec<i64>,
    pub item: String,
    pub price: i64,
    pub utility: i64,
    pub utility_delta: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuditReportJson {
    pub command: String,
    pub scale: u64,
    pub bidder: String,
    pub strategy: String,
    pub trials: usize,
    pub seed: u64,
    pub items: Vec<String>,
    pub truthful_outcome: OutcomeEntry,
    pub deviation_count: usize,
    pub max_utility_delta: i64,
    pub violations: usize,
    pub deviations: Vec<DeviationEntry>,
}

impl AuditReportJson {
    pub fn new(
        instance: &MarketInstance,
        report: &AuditReport,
        strategy: &str,
        trials: usize,
        seed: u64,
    ) -> Self {
        let label = |i: usize| instance.item_labels()[i].clone();
        Self {
            command: "audit".into(),
            scale: instance.scale(),
            bidder: instance.buyer_labels()[report.bidder].clone(),
            strategy: strategy.to_string(),
            trials,
            seed,
            items: instance.item_labels().to_vec(),
            truthful_outcome: OutcomeEntry {
                item: label(report.truthful_outcome.item),
                price: report.truthful_outcome.price.0,
                utility: report.truthful_outcome.utility.0,
                dummy_item: instance.is_dummy_item(report.truthful_outcome.item),
            },
            deviation_count: report.deviations.len(),
            max_utility_delta: report.max_utility_delta.0,
            violations: report.violations,
            deviations: report
                .deviations
                .iter()
                .map(|d| DeviationEntry {
                    misreport: d.misreport.iter().map(|v| v.0).collect(),
                    item: label(d.item),
                    price: d.price.0,
                    utility: d.utility.0,
                    utility_delta: d.utility_delta.0,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MeetReport {
    pub command: String,
    pub scale: u64,
    pub market_clearing: bool,
    pub prices: Vec<PriceEntry>,
    pub profits: Vec<ProfitEntry>,
}

/// User-supplied prices. Any report carrying `prices` (and optionally
/// `profits` / `assignment`) can be fed back in; other fields are ignored.
#[derive(Debug, Deserialize)]
pub struct PriceFile {
    pub scale: u64,
    pub prices: Vec<PriceEntry>,
    #[serde(default)]
    pub profits: Option<Vec<ProfitEntry>>,
    #[serde(default)]
    pub assignment: Option<Vec<PairEntry>>,
}

impl PriceFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).context("malformed prices file")
    }

    /// Price vector in item order. Dummy items may be omitted (price 0).
    pub fn price_vector(&self, instance: &MarketInstance) -> anyhow::Result<Vec<Money>> {
        self.check_scale(instance)?;
        let mut prices: Vec<Option<Money>> = vec![None; instance.n()];
        for entry in &self.prices {
            let i = instance
                .item_index(&entry.item)
                .with_context(|| format!("unknown item `{}`", entry.item))?;
            if prices[i].replace(Money(entry.price)).is_some() {
                bail!("item `{}` priced twice", entry.item);
            }
        }
        prices
            .into_iter()
            .enumerate()
            .map(|(i, p)| match p {
                Some(p) => Ok(p),
                None if instance.is_dummy_item(i) => Ok(Money::ZERO),
                None => bail!("no price for item `{}`", instance.item_labels()[i]),
            })
            .collect()
    }

    pub fn profit_vector(&self, instance: &MarketInstance) -> anyhow::Result<Option<Vec<Money>>> {
        let Some(entries) = &self.profits else {
            return Ok(None);
        };
        let mut profits: Vec<Option<Money>> = vec![None; instance.n()];
        for entry in entries {
            let j = instance
                .buyer_index(&entry.buyer)
                .with_context(|| format!("unknown buyer `{}`", entry.buyer))?;
            if profits[j].replace(Money(entry.profit)).is_some() {
                bail!("buyer `{}` listed twice", entry.buyer);
            }
        }
        profits
            .into_iter()
            .enumerate()
            .map(|(j, q)| q.with_context(|| format!("no profit for buyer `{}`", instance.buyer_labels()[j])))
            .collect::<anyhow::Result<Vec<_>>>()
            .map(Some)
    }

    /// Assignment as `item -> buyer` indices, unchecked; `usize::MAX` marks
    /// an item left out of the file.
    pub fn assignment_vector(&self, instance: &MarketInstance) -> anyhow::Result<Option<Vec<usize>>> {
        let Some(entries) = &self.assignment else {
            return Ok(None);
        };
        let mut out = vec![usize::MAX; instance.n()];
        for entry in entries {
            let i = instance
                .item_index(&entry.item)
                .with_context(|| format!("unknown item `{}`", entry.item))?;
            let j = instance
                .buyer_index(&entry.buyer)
                .with_context(|| format!("unknown buyer `{}`", entry.buyer))?;
            out[i] = j;
        }
        Ok(Some(out))
    }

    fn check_scale(&self, instance: &MarketInstance) -> anyhow::Result<()> {
        if self.scale != instance.scale() {
            bail!(
                "prices file has scale {} but the instance has scale {}",
                self.scale,
                instance.scale()
            );
        }
        Ok(())
    }
}
