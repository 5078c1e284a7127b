//! Python bindings. Amounts cross the boundary as integers in minor units.

use matchmarket::audit::{audit_incentive, MisreportStrategy};
use matchmarket::buyer_optimal::{buyer_optimal_outcome, check_buyer_optimal};
use matchmarket::market::{pad_to_square, DualSolution, Matching, MarketInstance};
use matchmarket::money::Money;
use matchmarket::verify::{brute_force_optimum, verify_market_clearing, DEFAULT_ORACLE_LIMIT};
use matchmarket::{check_equivalence, instance_to_json, load_instance, solve_assignment, vcg_prices, InstanceFormat, MarketError};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: MarketError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn money(values: &[i64]) -> Vec<Money> {
    values.iter().copied().map(Money).collect()
}

/// A square, dummy-padded unit-demand market.
#[pyclass(frozen, module = "pymatchmarket")]
struct Market {
    inner: MarketInstance,
}

impl Market {
    fn priced<'py>(&self, py: Python<'py>, matching: &Matching, duals: &DualSolution) -> PyResult<Bound<'py, PyDict>> {
        let inst = &self.inner;
        let assignment = PyDict::new(py);
        for (i, j) in matching.pairs() {
            assignment.set_item(&inst.item_labels()[i], &inst.buyer_labels()[j])?;
        }
        let prices = PyDict::new(py);
        for (label, p) in inst.item_labels().iter().zip(&duals.prices) {
            prices.set_item(label, p.0)?;
        }
        let profits = PyDict::new(py);
        for (label, q) in inst.buyer_labels().iter().zip(&duals.profits) {
            profits.set_item(label, q.0)?;
        }
        let out = PyDict::new(py);
        out.set_item("value", matching.value.0)?;
        out.set_item("assignment", assignment)?;
        out.set_item("prices", prices)?;
        out.set_item("profits", profits)?;
        Ok(out)
    }

    fn price_vector(&self, prices: Vec<i64>) -> PyResult<Vec<Money>> {
        if prices.len() != self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "expected {} prices, got {}",
                self.inner.n(),
                prices.len()
            )));
        }
        Ok(money(&prices))
    }
}

#[pymethods]
impl Market {
    /// `valuations[i][j]` is buyer j's value for item i, in minor units.
    #[new]
    #[pyo3(signature = (valuations, items=None, buyers=None, scale=1))]
    fn new(valuations: Vec<Vec<i64>>, items: Option<Vec<String>>, buyers: Option<Vec<String>>, scale: u64) -> PyResult<Self> {
        let m = valuations.len();
        let k = valuations.first().map_or(0, Vec::len);
        let items = items.unwrap_or_else(|| (0..m).map(|i| format!("item_{i}")).collect());
        let buyers = buyers.unwrap_or_else(|| (0..k).map(|j| format!("buyer_{j}")).collect());
        let rows = valuations.iter().map(|r| money(r)).collect();
        let inner = pad_to_square(items, buyers, rows, scale).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Parses the JSON instance format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = load_instance(text.as_bytes(), InstanceFormat::Json).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        instance_to_json(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn scale(&self) -> u64 {
        self.inner.scale()
    }

    #[getter]
    fn items(&self) -> Vec<String> {
        self.inner.item_labels().to_vec()
    }

    #[getter]
    fn buyers(&self) -> Vec<String> {
        self.inner.buyer_labels().to_vec()
    }

    fn is_dummy_item(&self, label: &str) -> PyResult<bool> {
        let i = self.inner.item_index(label).ok_or_else(|| PyKeyError::new_err(label.to_string()))?;
        Ok(self.inner.is_dummy_item(i))
    }

    /// Maximum-valuation assignment with the solver's duals.
    fn solve<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let (matching, duals) = solve_assignment(&self.inner);
        self.priced(py, &matching, &duals)
    }

    /// Buyer-optimal market-clearing outcome.
    fn buyer_optimal<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let outcome = buyer_optimal_outcome(&self.inner);
        let out = self.priced(py, &outcome.matching, &outcome.duals)?;
        let cert = check_buyer_optimal(&self.inner, &outcome.matching, &outcome.duals).map_err(py_err)?;
        out.set_item("certified", cert.is_certified())?;
        Ok(out)
    }

    /// VCG personalized price per item label.
    fn vcg_prices<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = vcg_prices(&self.inner);
        let out = PyDict::new(py);
        for pair in &report.pairs {
            out.set_item(&self.inner.item_labels()[pair.item], pair.personalized_price.0)?;
        }
        Ok(out)
    }

    /// True when buyer-optimal prices equal VCG prices.
    fn check_equivalence(&self) -> PyResult<bool> {
        match check_equivalence(&self.inner) {
            Ok(report) => Ok(report.equivalent),
            Err(MarketError::Mismatch(_)) => Ok(false),
            Err(e) => Err(py_err(e)),
        }
    }

    /// Market-clearing verdict for prices in item order, with best-response
    /// profits and the solver's matching.
    fn verify(&self, prices: Vec<i64>) -> PyResult<bool> {
        let p = self.price_vector(prices)?;
        let duals = DualSolution::from_prices(&self.inner, p).map_err(py_err)?;
        let (matching, _) = solve_assignment(&self.inner);
        Ok(verify_market_clearing(&self.inner, &matching, &duals).market_clearing)
    }

    /// Optimal value by exhaustive enumeration.
    #[pyo3(signature = (limit=DEFAULT_ORACLE_LIMIT))]
    fn brute_force_value(&self, limit: usize) -> PyResult<i64> {
        brute_force_optimum(&self.inner, limit).map(|(v, _)| v.0).map_err(py_err)
    }

    /// Incentive audit for one bidder. Returns the truthful utility, the
    /// number of misreports tried, the largest utility gain and the count of
    /// profitable misreports.
    #[pyo3(signature = (bidder, trials=100, seed=0, strategy="all"))]
    fn audit<'py>(&self, py: Python<'py>, bidder: &str, trials: usize, seed: u64, strategy: &str) -> PyResult<Bound<'py, PyDict>> {
        let j = self.inner.buyer_index(bidder).ok_or_else(|| PyKeyError::new_err(bidder.to_string()))?;
        let strategy: MisreportStrategy = strategy.parse().map_err(py_err)?;
        let report = audit_incentive(&self.inner, j, strategy, trials, seed).map_err(py_err)?;
        let out = PyDict::new(py);
        out.set_item("item", &self.inner.item_labels()[report.truthful_outcome.item])?;
        out.set_item("price", report.truthful_outcome.price.0)?;
        out.set_item("utility", report.truthful_outcome.utility.0)?;
        out.set_item("deviations", report.deviations.len())?;
        out.set_item("max_utility_delta", report.max_utility_delta.0)?;
        out.set_item("violations", report.violations)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("Market(n={}, scale={})", self.inner.n(), self.inner.scale())
    }
}

#[pymodule]
fn pymatchmarket(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Market>()?;
    Ok(())
}
