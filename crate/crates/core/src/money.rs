//! Exact fixed-point money.
//!
//! Every amount is an integer count of minor units. The number of minor units
//! per major unit (the *scale*) is carried by the market instance, not by the
//! amount itself.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};

/// Largest accepted magnitude of a single input amount, in minor units.
///
/// Sums over a market of up to a thousand rows stay well inside `i64`.
pub const MAX_AMOUNT: i64 = 1_000_000_000_000_000;

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn minor(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Parses a decimal literal (`12`, `-0.25`, `1.5e2`) given in major units
    /// and converts it to minor units at `scale`.
    ///
    /// Fails unless `literal * scale` is an integer.
    pub fn parse_decimal(literal: &str, scale: u64) -> Result<Money> {
        let bad = || MarketError::Parse(format!("invalid number `{literal}`"));
        let s = literal.trim();
        let (negative, s) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
                (&s[..pos], exp)
            }
            None => (s, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((a, b)) => (a, b),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }

        let out_of_range = || MarketError::OutOfRange(literal.to_string());
        let digits = format!("{int_part}{frac_part}");
        let digits = digits.trim_start_matches('0');
        // Trailing zeros only shift the exponent.
        let trimmed = digits.trim_end_matches('0');
        let mut exp10 = exponent as i64 - frac_part.len() as i64
            + (digits.len() - trimmed.len()) as i64;
        if trimmed.is_empty() {
            return Ok(Money::ZERO);
        }
        if trimmed.len() > 30 {
            return Err(out_of_range());
        }
        let mut value: i128 = trimmed.parse().map_err(|_| bad())?;
        value = value.checked_mul(scale as i128).ok_or_else(out_of_range)?;
        while exp10 > 0 {
            value = value.checked_mul(10).ok_or_else(out_of_range)?;
            if value > MAX_AMOUNT as i128 {
                return Err(out_of_range());
            }
            exp10 -= 1;
        }
        while exp10 < 0 {
            if value % 10 != 0 {
                return Err(MarketError::NotRepresentable {
                    value: literal.to_string(),
                    scale,
                });
            }
            value /= 10;
            exp10 += 1;
        }
        if value > MAX_AMOUNT as i128 {
            return Err(out_of_range());
        }
        let value = value as i64;
        Ok(Money(if negative { -value } else { value }))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<i64> for Money {
    fn from(v: i64) -> Self {
        Money(v)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}
