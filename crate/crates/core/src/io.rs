//! Instance loading and serialization.
//!
//! JSON: `{"scale": 100, "items": [..], "buyers": [..], "valuations": [[..]]}`
//! with `valuations[item][buyer]` in major units. An optional
//! `"units": "minor"` marks the matrix as already scaled.
//!
//! CSV: header row holds buyer labels (first cell ignored); each body row is
//! an item label followed by its valuations.

use std::io::Read;

use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::error::{MarketError, Result};
use crate::market::{pad_to_square, MarketInstance};
use crate::money::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Json,
    /// CSV carries no scale of its own.
    Csv { scale: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Major,
    Minor,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonInstance {
    #[serde(default = "default_scale")]
    scale: u64,
    #[serde(default, skip_serializing_if = "is_major")]
    units: Units,
    items: Vec<String>,
    buyers: Vec<String>,
    valuations: Vec<Vec<Number>>,
}

fn default_scale() -> u64 {
    1
}

fn is_major(u: &Units) -> bool {
    *u == Units::Major
}

fn to_money(literal: &str, scale: u64, units: Units) -> Result<Money> {
    match units {
        Units::Major => Money::parse_decimal(literal, scale),
        Units::Minor => Money::parse_decimal(literal, 1),
    }
}

fn parse_matrix<'a, I, R>(rows: I, scale: u64, units: Units) -> Result<Vec<Vec<Money>>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = &'a str>,
{
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, s)| {
                    let v = to_money(s, scale, units)?;
                    if v.is_negative() {
                        return Err(MarketError::NegativeValuation {
                            item: i,
                            buyer: j,
                            value: s.to_string(),
                        });
                    }
                    Ok(v)
                })
                .collect()
        })
        .collect()
}

/// Reads an instance and pads it to a square market.
pub fn load_instance<R: Read>(source: R, format: InstanceFormat) -> Result<MarketInstance> {
    match format {
        InstanceFormat::Json => load_json(source),
        InstanceFormat::Csv { scale } => load_csv(source, scale),
    }
}

fn load_json<R: Read>(source: R) -> Result<MarketInstance> {
    let raw: JsonInstance =
        serde_json::from_reader(source).map_err(|e| MarketError::Parse(e.to_string()))?;
    if raw.scale == 0 {
        return Err(MarketError::Parse("scale must be positive".into()));
    }
    let strings: Vec<Vec<String>> = raw
        .valuations
        .iter()
        .map(|row| row.iter().map(Number::to_string).collect())
        .collect();
    let valuations = parse_matrix(
        strings.iter().map(|r| r.iter().map(String::as_str)),
        raw.scale,
        raw.units,
    )?;
    pad_to_square(raw.items, raw.buyers, valuations, raw.scale)
}

fn load_csv<R: Read>(source: R, scale: u64) -> Result<MarketInstance> {
    if scale == 0 {
        return Err(MarketError::Parse("scale must be positive".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader
        .headers()
        .map_err(|e| MarketError::Parse(e.to_string()))?
        .clone();
    let buyers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut items = Vec::new();
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| MarketError::Parse(e.to_string()))?;
        let mut fields = record.iter();
        let label = fields
            .next()
            .ok_or_else(|| MarketError::Parse("empty CSV row".into()))?;
        items.push(label.to_string());
        cells.push(fields.map(str::to_string).collect::<Vec<_>>());
    }
    let valuations = parse_matrix(
        cells.iter().map(|r| r.iter().map(String::as_str)),
        scale,
        Units::Major,
    )?;
    pad_to_square(items, buyers, valuations, scale)
}

/// Serializes the real (non-dummy) part of an instance in minor units.
///
/// Dummies are always the trailing indices, so loading the output re-creates
/// the same padded instance.
pub fn instance_to_json(instance: &MarketInstance) -> String {
    let (m, k) = instance.original_shape();
    let raw = JsonInstance {
        scale: instance.scale(),
        units: Units::Minor,
        items: instance.item_labels()[..m].to_vec(),
        buyers: instance.buyer_labels()[..k].to_vec(),
        valuations: instance.valuations()[..m]
            .iter()
            .map(|row| row[..k].iter().map(|v| Number::from(v.0)).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("instance serializes")
}
