//! Candidate instance types, exact-decimal prices, and allocation arithmetic.
//!
//! A catalog lists the VM types available to the optimizer together with
//! their sustainable full-response capacity `alpha` (requests/second) and
//! hourly price. Partial-response capacity is derived from one global
//! `beta_over_alpha` ratio rather than stored per type.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Currency amount with fixed 4-decimal precision.
///
/// Stored as an integer count of 1/10000 units so that price sums and
/// comparisons are exact; float drift must not change which of two
/// equal-cost allocations wins a tie-break.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_ten_thousandths(units: i64) -> Money {
        Money(units)
    }

    pub fn ten_thousandths(self) -> i64 {
        self.0
    }

    /// Rounds to the nearest 1/10000 unit, half away from zero.
    pub fn from_f64(value: f64) -> Money {
        Money((value * 10_000.0).round() as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 10_000.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Mul<u32> for Money {
    type Output = Money;
    fn mul(self, rhs: u32) -> Money {
        Money(self.0 * i64::from(rhs))
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:04}", abs / 10_000, abs % 10_000)
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({self})")
    }
}

impl FromStr for Money {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Money, String> {
        let bad = || format!("invalid money amount {s:?}");
        let (sign, digits) = match s.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, s),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if frac_part.len() > 4 {
            return Err(format!(
                "money amount {s:?} has more than 4 fractional digits"
            ));
        }
        let int: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut frac: i64 = 0;
        if !frac_part.is_empty() {
            frac = frac_part.parse().map_err(|_| bad())?;
            frac *= 10_i64.pow(4 - frac_part.len() as u32);
        }
        Ok(Money(sign * (int * 10_000 + frac)))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Money, D::Error> {
        struct MoneyVisitor;

        impl Visitor<'_> for MoneyVisitor {
            type Value = Money;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal number or string with at most 4 fractional digits")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Money, E> {
                Ok(Money::from_f64(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Money, E> {
                Ok(Money(v * 10_000))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Money, E> {
                Ok(Money(v as i64 * 10_000))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Money, E> {
                v.parse().map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_any(MoneyVisitor)
    }
}

/// One candidate VM type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceType {
    pub name: String,
    /// Sustainable full-response capacity, requests/second.
    pub alpha_rps: u32,
    pub price_per_hour: Money,
}

/// The set of candidate instance types plus the partial-response ratio.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceCatalog {
    pub types: Vec<InstanceType>,
    /// Ratio of partial-response to full-response capacity; must exceed 1.
    #[serde(default = "default_beta_over_alpha")]
    pub beta_over_alpha: f64,
}

fn default_beta_over_alpha() -> f64 {
    2.0
}

impl InstanceCatalog {
    pub fn new(types: Vec<InstanceType>, beta_over_alpha: f64) -> Result<InstanceCatalog> {
        let catalog = InstanceCatalog {
            types,
            beta_over_alpha,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn validate(&self) -> Result<()> {
        if self.types.is_empty() {
            return Err(Error::Config("catalog has no instance types".into()));
        }
        if !(self.beta_over_alpha > 1.0) || !self.beta_over_alpha.is_finite() {
            return Err(Error::Config(format!(
                "beta_over_alpha must be a finite value > 1, got {}",
                self.beta_over_alpha
            )));
        }
        let mut seen = BTreeMap::new();
        for ty in &self.types {
            if ty.alpha_rps == 0 {
                return Err(Error::Config(format!(
                    "instance type {:?} has non-positive capacity",
                    ty.name
                )));
            }
            if !ty.price_per_hour.is_positive() {
                return Err(Error::Config(format!(
                    "instance type {:?} has non-positive price",
                    ty.name
                )));
            }
            if seen.insert(ty.name.clone(), ()).is_some() {
                return Err(Error::Config(format!(
                    "duplicate instance type name {:?}",
                    ty.name
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&InstanceType> {
        self.types.iter().find(|t| t.name == name)
    }

    /// Smallest sustainable capacity among the candidate types.
    pub fn min_alpha(&self) -> u32 {
        self.types.iter().map(|t| t.alpha_rps).min().unwrap_or(0)
    }
}

/// Loads and validates a catalog file (JSON with `types` and optional
/// top-level `beta_over_alpha`).
pub fn load_catalog(path: impl AsRef<Path>) -> Result<InstanceCatalog> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let catalog: InstanceCatalog = serde_json::from_str(&raw).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    catalog.validate()?;
    Ok(catalog)
}

/// A multiset of instances, keyed by instance type name.
///
/// Zero counts are never stored, so two allocations with the same content
/// compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    counts: BTreeMap<String, u32>,
}

impl Allocation {
    pub fn empty() -> Allocation {
        Allocation::default()
    }

    pub fn from_counts<I, S>(counts: I) -> Allocation
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut alloc = Allocation::empty();
        for (name, count) in counts {
            alloc.set(name.into(), count);
        }
        alloc
    }

    pub fn set(&mut self, name: String, count: u32) {
        if count == 0 {
            self.counts.remove(&name);
        } else {
            self.counts.insert(name, count);
        }
    }

    pub fn count(&self, name: &str) -> u32 {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(n, c)| (n.as_str(), *c))
    }

    pub fn total_instances(&self) -> u32 {
        self.counts.values().sum()
    }

    /// Componentwise sum of two allocations.
    pub fn plus(&self, other: &Allocation) -> Allocation {
        let mut out = self.clone();
        for (name, count) in other.iter() {
            out.set(name.to_string(), out.count(name) + count);
        }
        out
    }

    /// Componentwise difference; errors if `other` is not contained in `self`.
    pub fn minus(&self, other: &Allocation) -> Result<Allocation> {
        let mut out = self.clone();
        for (name, count) in other.iter() {
            let have = out.count(name);
            if count > have {
                return Err(Error::Domain(format!(
                    "cannot remove {count} x {name}: only {have} allocated"
                )));
            }
            out.set(name.to_string(), have - count);
        }
        Ok(out)
    }
}

/// Aggregate capacity and cost figures for an allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationStats {
    /// Total sustainable full-response capacity, requests/second.
    pub aggregate_alpha: u64,
    /// Total sustainable partial-response capacity, requests/second.
    pub aggregate_beta: f64,
    pub hourly_cost: Money,
    pub instance_count: u32,
}

/// Sums capacity and cost over an allocation against a catalog.
pub fn allocation_stats(alloc: &Allocation, catalog: &InstanceCatalog) -> Result<AllocationStats> {
    let mut alpha: u64 = 0;
    let mut cost = Money::ZERO;
    let mut instances: u32 = 0;
    for (name, count) in alloc.iter() {
        let ty = catalog
            .get(name)
            .ok_or_else(|| Error::UnknownInstanceType(name.to_string()))?;
        alpha += u64::from(ty.alpha_rps) * u64::from(count);
        cost += ty.price_per_hour * count;
        instances += count;
    }
    Ok(AllocationStats {
        aggregate_alpha: alpha,
        aggregate_beta: alpha as f64 * catalog.beta_over_alpha,
        hourly_cost: cost,
        instance_count: instances,
    })
}
