//! Acceptance suite. One PASS/FAIL line per criterion; exits nonzero on any
//! failure. Run with `cargo test -p matchmarket-cli --test acceptance`.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use matchmarket::buyer_optimal::{buyer_optimal_outcome, buyer_optimal_outcome_with, lattice_meet, reduce_to_buyer_optimal};
use matchmarket::market::{DualSolution, MarketInstance};
use matchmarket::money::Money;
use matchmarket::solver::{solve_assignment, solve_assignment_with, Initialization};
use matchmarket::vcg::vcg_prices;
use matchmarket::verify::{brute_force_optimum, perturb_market_clearing, verify_market_clearing, DEFAULT_ORACLE_LIMIT};
use matchmarket::{audit_incentive, MisreportStrategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_260_415;
const SQUARE_INSTANCES: usize = 1000;
const RECTANGULAR_INSTANCES: usize = 300;
const MEET_PAIRS: usize = 500;
const AUDIT_TARGET: usize = 100_000;

type Verdict = Result<String, String>;
type Family = fn(&mut ChaCha8Rng) -> Vec<Vec<i64>>;

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, max_v: i64) -> Vec<Vec<i64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(0..=max_v)).collect())
        .collect()
}

/// Square instances with n cycling through 1..=8, then rectangular ones
/// whose larger side is n.
fn corpus() -> Vec<(Vec<Vec<i64>>, MarketInstance)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for t in 0..SQUARE_INSTANCES {
        let n = t % 8 + 1;
        out.push(random_matrix(&mut rng, n, n, 100));
    }
    for t in 0..RECTANGULAR_INSTANCES {
        let n = t % 7 + 2;
        let short = rng.random_range(1..n);
        let (m, k) = if rng.random_bool(0.5) { (n, short) } else { (short, n) };
        out.push(random_matrix(&mut rng, m, k, 100));
    }
    out.into_iter()
        .map(|rows| {
            let inst = MarketInstance::from_matrix(&rows).unwrap();
            (rows, inst)
        })
        .collect()
}

fn ac1(corpus: &[(Vec<Vec<i64>>, MarketInstance)]) -> Verdict {
    for (rows, inst) in corpus {
        let (matching, _) = solve_assignment(inst);
        let (best, _) = brute_force_optimum(inst, DEFAULT_ORACLE_LIMIT).map_err(|e| e.to_string())?;
        if matching.value != best {
            return Err(format!("{rows:?}: solver {} vs oracle {}", matching.value, best));
        }
    }
    Ok(format!("{} instances", corpus.len()))
}

fn ac2(corpus: &[(Vec<Vec<i64>>, MarketInstance)]) -> Verdict {
    for (rows, inst) in corpus {
        let outcome = buyer_optimal_outcome(inst);
        let v = verify_market_clearing(inst, &outcome.matching, &outcome.duals);
        let all_five = v.infeasible_pairs.is_empty()
            && v.is_permutation
            && v.loose_matched_pairs.is_empty()
            && v.strong_duality
            && v.negative_prices.is_empty();
        if !all_five || !v.market_clearing {
            return Err(format!("{rows:?}: {v:?}"));
        }
    }
    Ok(format!("{} instances, five checks each", corpus.len()))
}

fn ac3(corpus: &[(Vec<Vec<i64>>, MarketInstance)]) -> Verdict {
    let mut padded = 0;
    for (rows, inst) in corpus {
        let pipeline = buyer_optimal_outcome(inst).duals.prices;
        let vcg = vcg_prices(inst);
        if pipeline != vcg.prices() {
            return Err(format!("{rows:?}: pipeline {pipeline:?} vs vcg {:?}", vcg.prices()));
        }
        if rows.len() != rows[0].len() {
            padded += 1;
        }
    }
    Ok(format!("{} instances ({padded} padded rectangular)", corpus.len()))
}

fn ac4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let families: [(&str, Family); 4] = [
        ("uniform", |r| {
            let n = r.random_range(1..=8);
            random_matrix(r, n, n, 100)
        }),
        ("tie-heavy", |r| {
            let n = r.random_range(2..=8);
            random_matrix(r, n, n, 3)
        }),
        ("rectangular", |r| {
            let (m, k) = (r.random_range(1..=8), r.random_range(1..=8));
            random_matrix(r, m, k, 100)
        }),
        ("identical buyers", |r| {
            let n = r.random_range(2..=8);
            let column: Vec<i64> = (0..n).map(|_| r.random_range(0..=100)).collect();
            column.iter().map(|&v| vec![v; n]).collect()
        }),
    ];
    let mut summary = Vec::new();
    for (name, family) in families {
        let mut pairs = 0;
        while pairs < MEET_PAIRS {
            let rows = family(&mut rng);
            let inst = MarketInstance::from_matrix(&rows).unwrap();
            let outcome = buyer_optimal_outcome(&inst);
            let a = perturb_market_clearing(&inst, &outcome.matching, &outcome.duals.prices, &mut rng);
            let b = perturb_market_clearing(&inst, &outcome.matching, &outcome.duals.prices, &mut rng);
            if a == b {
                continue;
            }
            for p in [&a, &b] {
                let d = DualSolution::from_prices(&inst, p.clone()).map_err(|e| e.to_string())?;
                if !verify_market_clearing(&inst, &outcome.matching, &d).market_clearing {
                    return Err(format!("{name} {rows:?}: generated {p:?} is not clearing"));
                }
            }
            let meet = lattice_meet(&inst, &a, &b).map_err(|e| format!("{name} {rows:?}: {e}"))?;
            let expected: Vec<Money> = a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect();
            if meet.prices != expected {
                return Err(format!("{name} {rows:?}: meet {:?} is not the componentwise minimum", meet.prices));
            }
            if !verify_market_clearing(&inst, &outcome.matching, &meet).market_clearing {
                return Err(format!("{name} {rows:?}: meet of {a:?} and {b:?} fails verification"));
            }
            pairs += 1;
        }
        summary.push(format!("{name} {pairs}"));
    }
    Ok(format!("distinct pairs per family: {}", summary.join(", ")))
}

fn ac5(corpus: &[(Vec<Vec<i64>>, MarketInstance)]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    for (rows, inst) in corpus {
        let solution = solve_assignment_with(inst, Initialization::RowMaxima);
        let matching = &solution.matching;
        let from_solver = reduce_to_buyer_optimal(inst, matching, &solution.duals).map_err(|e| e.to_string())?;

        let shifted = DualSolution {
            prices: solution.duals.prices.iter().map(|&p| p + Money(5)).collect(),
            profits: solution.duals.profits.iter().map(|&q| q - Money(5)).collect(),
        };
        let from_shifted = reduce_to_buyer_optimal(inst, matching, &shifted).map_err(|e| e.to_string())?;
        if from_shifted.prices != from_solver.prices {
            return Err(format!("{rows:?}: +5 start gives {:?} not {:?}", from_shifted.prices, from_solver.prices));
        }

        let other = buyer_optimal_outcome_with(inst, Initialization::ColumnMaxima);
        if other.duals.prices != from_solver.prices {
            return Err(format!("{rows:?}: column-maxima start gives {:?}", other.duals.prices));
        }

        let raised = perturb_market_clearing(inst, matching, &from_solver.prices, &mut rng);
        let start = DualSolution::from_prices(inst, raised).map_err(|e| e.to_string())?;
        let from_raised = reduce_to_buyer_optimal(inst, matching, &start).map_err(|e| e.to_string())?;
        if from_raised.prices != from_solver.prices {
            return Err(format!("{rows:?}: perturbed start gives {:?}", from_raised.prices));
        }
    }
    Ok(format!("{} instances, four starts each", corpus.len()))
}

fn ac6(corpus: &[(Vec<Vec<i64>>, MarketInstance)]) -> Verdict {
    let mut total = 0usize;
    let mut worst = Money(i64::MIN);
    let mut grid_bidders = 0;
    for (index, (rows, inst)) in corpus.iter().enumerate() {
        let (_, buyers) = inst.original_shape();
        for bidder in 0..buyers {
            let report = audit_incentive(inst, bidder, MisreportStrategy::All, 12, SEED ^ index as u64)
                .map_err(|e| e.to_string())?;
            let truthful = report.truthful_outcome;
            if truthful.utility != inst.value(truthful.item, bidder) - truthful.price {
                return Err(format!("{rows:?}: bidder {bidder} truthful utility misreported"));
            }
            for d in &report.deviations {
                // Utility under the true valuation, recomputed here.
                let delta = inst.value(d.item, bidder) - d.price - truthful.utility;
                if delta != d.utility_delta {
                    return Err(format!("{rows:?}: bidder {bidder} delta bookkeeping {:?}", d));
                }
                if delta > Money::ZERO {
                    return Err(format!("{rows:?}: bidder {bidder} gains {delta} by reporting {:?}", d.misreport));
                }
                worst = worst.max(delta);
            }
            if report.violations != 0 || report.max_utility_delta > Money::ZERO {
                return Err(format!("{rows:?}: bidder {bidder} report flags violations"));
            }
            total += report.deviations.len();
            if inst.n() <= 4 {
                grid_bidders += 1;
            }
        }
    }
    if total < AUDIT_TARGET {
        return Err(format!("only {total} deviations, need {AUDIT_TARGET}"));
    }
    Ok(format!("{total} deviations ({grid_bidders} bidders with grid), max delta {worst}, 0 violations"))
}

fn ac7() -> Verdict {
    let mut cases = 0;
    for a in 0..20i64 {
        for b in 0..a {
            let inst = MarketInstance::from_matrix(&[vec![a, b]]).unwrap();
            let outcome = buyer_optimal_outcome(&inst);
            let winner = outcome.matching.buyer_of(0);
            let price = outcome.duals.prices[0];
            if winner != 0 || price != Money(b) {
                return Err(format!("a={a} b={b}: winner {winner} at {price}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (a, b) pairs"))
}

fn ac8() -> Verdict {
    for (name, args) in common::CASES {
        let first = common::run(args);
        let second = common::run(args);
        if first.stdout != second.stdout || first.status != second.status {
            return Err(format!("{name}: repeated runs differ"));
        }
        let golden = fs::read(common::golden_path(name)).map_err(|e| format!("{name}: {e}"))?;
        if golden != first.stdout {
            return Err(format!("{name}: output differs from golden file"));
        }
    }
    Ok(format!("{} commands, two runs each, all match golden files", common::CASES.len()))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let criteria: [(&str, &dyn Fn() -> Verdict); 8] = [
        ("AC1 oracle equivalence", &|| ac1(&corpus)),
        ("AC2 market-clearing soundness", &|| ac2(&corpus)),
        ("AC3 buyer-optimal equals VCG", &|| ac3(&corpus)),
        ("AC4 lattice meet closure", &ac4),
        ("AC5 uniqueness across starts", &|| ac5(&corpus)),
        ("AC6 incentive audit", &|| ac6(&corpus)),
        ("AC7 second-price grid", &ac7),
        ("AC8 CLI determinism", &ac8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
