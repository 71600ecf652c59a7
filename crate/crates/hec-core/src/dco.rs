//! Delta capacity optimization: the exact integer solvers that pick the
//! cheapest capacity to add and the most expensive capacity to remove for
//! a given workload delta, plus an exhaustive reference solver for tests.
//!
//! Scale-out minimizes hourly cost subject to added capacity covering the
//! delta; scale-in maximizes the hourly cost removed subject to the removed
//! capacity not exceeding the delta and per-type counts not exceeding the
//! current allocation. Both are solved exactly by dynamic programming over
//! integer capacity; exactness, not speed, is the contract.
//!
//! Ties are broken deterministically, in order: best objective value,
//! largest capacity change, fewest instances, lexicographically largest
//! count vector in catalog order.

use std::cmp::Ordering;

use crate::catalog::{allocation_stats, Allocation, InstanceCatalog, Money};
use crate::error::{Error, Result};

/// Hard cap on the capacity grid, to catch nonsense deltas early.
const MAX_TARGET_CAPACITY: u64 = 10_000_000;

/// Candidate enumeration budget for the reference solvers.
pub const ORACLE_CANDIDATE_LIMIT: u64 = 10_000_000;

/// An exact solution: the instances to add or remove, their total hourly
/// cost, and their total capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct DcoSolution {
    pub change: Allocation,
    pub objective_cost: Money,
    pub capacity_change: u64,
}

/// Solution under construction; `counts` is indexed by catalog position so
/// the lexicographic tie-break is well defined.
#[derive(Debug, Clone)]
struct Candidate {
    cost: Money,
    capacity: u64,
    instances: u32,
    counts: Vec<u32>,
}

impl Candidate {
    fn empty(n: usize) -> Candidate {
        Candidate {
            cost: Money::ZERO,
            capacity: 0,
            instances: 0,
            counts: vec![0; n],
        }
    }

    fn with_added(&self, idx: usize, alpha: u32, price: Money, k: u32) -> Candidate {
        let mut counts = self.counts.clone();
        counts[idx] += k;
        Candidate {
            cost: self.cost + price * k,
            capacity: self.capacity + u64::from(alpha) * u64::from(k),
            instances: self.instances + k,
            counts,
        }
    }

    fn into_solution(self, catalog: &InstanceCatalog) -> DcoSolution {
        let change = Allocation::from_counts(
            self.counts
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (catalog.types[i].name.clone(), k)),
        );
        DcoSolution {
            change,
            objective_cost: self.cost,
            capacity_change: self.capacity,
        }
    }
}

/// `Less` means `a` is the better scale-out solution.
fn cmp_scale_out(a: &Candidate, b: &Candidate) -> Ordering {
    a.cost
        .cmp(&b.cost)
        .then_with(|| b.capacity.cmp(&a.capacity))
        .then_with(|| a.instances.cmp(&b.instances))
        .then_with(|| b.counts.cmp(&a.counts))
}

/// `Less` means `a` is the better scale-in solution.
fn cmp_scale_in(a: &Candidate, b: &Candidate) -> Ordering {
    b.cost
        .cmp(&a.cost)
        .then_with(|| b.capacity.cmp(&a.capacity))
        .then_with(|| a.instances.cmp(&b.instances))
        .then_with(|| b.counts.cmp(&a.counts))
}

fn validate_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Domain(format!(
            "delta must be a positive finite rate, got {delta}"
        )));
    }
    Ok(())
}

/// Cheapest set of instances whose combined capacity covers `delta`.
pub fn solve_scale_out(delta: f64, catalog: &InstanceCatalog) -> Result<DcoSolution> {
    validate_delta(delta)?;
    catalog.validate()?;
    let target = delta.ceil() as u64;
    if target > MAX_TARGET_CAPACITY {
        return Err(Error::Config(format!(
            "delta {delta} exceeds the solver capacity grid ({MAX_TARGET_CAPACITY})"
        )));
    }
    let n = catalog.types.len();

    // dp[c] = best candidate with capacity >= c. Every state is reachable
    // because a single instance covers the clamped-to-zero remainder.
    let mut dp: Vec<Option<Candidate>> = vec![None; target as usize + 1];
    dp[0] = Some(Candidate::empty(n));
    for c in 1..=target as usize {
        for (idx, ty) in catalog.types.iter().enumerate() {
            let prev = c.saturating_sub(ty.alpha_rps as usize);
            let cand = dp[prev]
                .as_ref()
                .expect("lower states are filled first")
                .with_added(idx, ty.alpha_rps, ty.price_per_hour, 1);
            let better = match &dp[c] {
                None => true,
                Some(best) => cmp_scale_out(&cand, best) == Ordering::Less,
            };
            if better {
                dp[c] = Some(cand);
            }
        }
    }
    let best = dp[target as usize]
        .take()
        .expect("target state is reachable");
    debug_assert!(best.capacity >= target);
    Ok(best.into_solution(catalog))
}

/// Most expensive sub-multiset of `current` whose capacity stays within
/// `delta`. Removing nothing is always feasible, so a delta smaller than
/// every removable instance yields an empty change.
pub fn solve_scale_in(
    delta: f64,
    current: &Allocation,
    catalog: &InstanceCatalog,
) -> Result<DcoSolution> {
    validate_delta(delta)?;
    catalog.validate()?;
    if current.is_empty() {
        return Err(Error::Domain(
            "scale-in requires a non-empty current allocation".into(),
        ));
    }
    let stats = allocation_stats(current, catalog)?;
    let target = (delta.floor() as u64).min(stats.aggregate_alpha);
    let n = catalog.types.len();

    // Bounded knapsack over exact removed capacity.
    let mut dp: Vec<Option<Candidate>> = vec![None; target as usize + 1];
    dp[0] = Some(Candidate::empty(n));
    for (idx, ty) in catalog.types.iter().enumerate() {
        let bound = current.count(&ty.name);
        if bound == 0 {
            continue;
        }
        let mut next = dp.clone();
        for c in 0..=target as usize {
            let Some(base) = dp[c].as_ref() else { continue };
            for k in 1..=bound {
                let cap = c as u64 + u64::from(ty.alpha_rps) * u64::from(k);
                if cap > target {
                    break;
                }
                let cand = base.with_added(idx, ty.alpha_rps, ty.price_per_hour, k);
                let slot = &mut next[cap as usize];
                let better = match slot {
                    None => true,
                    Some(best) => cmp_scale_in(&cand, best) == Ordering::Less,
                };
                if better {
                    *slot = Some(cand);
                }
            }
        }
        dp = next;
    }
    let best = dp
        .into_iter()
        .flatten()
        .min_by(cmp_scale_in)
        .expect("the empty removal is always feasible");
    debug_assert!(best.capacity <= target);
    Ok(best.into_solution(catalog))
}

/// Exhaustive reference solver for scale-out. Enumerates every count vector
/// that could win (dropping an instance from any skipped vector keeps it
/// feasible and strictly cheaper) and applies the identical tie-break.
/// Intended for tests.
pub fn oracle_scale_out(delta: f64, catalog: &InstanceCatalog) -> Result<DcoSolution> {
    validate_delta(delta)?;
    catalog.validate()?;
    let target = delta.ceil() as u64;
    let n = catalog.types.len();

    let mut nodes: u64 = 0;
    let mut best: Option<Candidate> = None;
    let mut stack: Vec<(usize, Candidate)> = vec![(0, Candidate::empty(n))];
    while let Some((idx, partial)) = stack.pop() {
        nodes += 1;
        if nodes > ORACLE_CANDIDATE_LIMIT {
            return Err(Error::OracleScope {
                limit: ORACLE_CANDIDATE_LIMIT,
            });
        }
        if idx == n {
            if partial.capacity >= target {
                let better = match &best {
                    None => true,
                    Some(b) => cmp_scale_out(&partial, b) == Ordering::Less,
                };
                if better {
                    best = Some(partial);
                }
            }
            continue;
        }
        let ty = &catalog.types[idx];
        let remaining = target.saturating_sub(partial.capacity);
        let max_k = if remaining == 0 {
            0
        } else {
            remaining.div_ceil(u64::from(ty.alpha_rps)) as u32
        };
        for k in 0..=max_k {
            stack.push((
                idx + 1,
                partial.with_added(idx, ty.alpha_rps, ty.price_per_hour, k),
            ));
        }
    }
    match best {
        Some(b) => Ok(b.into_solution(catalog)),
        None => Err(Error::Domain(format!(
            "no feasible scale-out for delta {delta}"
        ))),
    }
}

/// Exhaustive reference solver for scale-in: every sub-multiset of the
/// current allocation. Intended for tests.
pub fn oracle_scale_in(
    delta: f64,
    current: &Allocation,
    catalog: &InstanceCatalog,
) -> Result<DcoSolution> {
    validate_delta(delta)?;
    catalog.validate()?;
    if current.is_empty() {
        return Err(Error::Domain(
            "scale-in requires a non-empty current allocation".into(),
        ));
    }
    let target = delta.floor() as u64;
    let n = catalog.types.len();

    let mut candidates: u64 = 1;
    for (_, count) in current.iter() {
        candidates = candidates.saturating_mul(u64::from(count) + 1);
        if candidates > ORACLE_CANDIDATE_LIMIT {
            return Err(Error::OracleScope {
                limit: ORACLE_CANDIDATE_LIMIT,
            });
        }
    }

    let mut best: Option<Candidate> = None;
    let mut stack: Vec<(usize, Candidate)> = vec![(0, Candidate::empty(n))];
    while let Some((idx, partial)) = stack.pop() {
        if idx == n {
            if partial.capacity <= target {
                let better = match &best {
                    None => true,
                    Some(b) => cmp_scale_in(&partial, b) == Ordering::Less,
                };
                if better {
                    best = Some(partial);
                }
            }
            continue;
        }
        let ty = &catalog.types[idx];
        let bound = current.count(&ty.name);
        for k in 0..=bound {
            stack.push((
                idx + 1,
                partial.with_added(idx, ty.alpha_rps, ty.price_per_hour, k),
            ));
        }
    }
    Ok(best
        .expect("the empty removal is always a candidate")
        .into_solution(catalog))
}
