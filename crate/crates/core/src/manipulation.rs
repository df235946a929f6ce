//! Exhaustive search for profitable false-name manipulations.
//!
//! A manipulator with true type `truth` facing `others` submits kept
//! identities `Y` and withdrawn identities `Z` drawn from a pool. After the
//! mechanism runs on `others ∪ Y ∪ Z` (in that order), it keeps the union of
//! the bundles won by `Y` and pays their payments; whatever `Z` won is
//! forfeited at no cost. Without withdrawal `Z` is empty.
//!
//! Pool-bounded search can certify a violation but never full compliance:
//! `None` means that no identity combination from the pool beats truthful
//! single-identity reporting.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::axioms::{multiset_indices, TypePool};
use crate::domain::{Bundle, Caps, Money, Outcome};
use crate::error::{Error, Result};
use crate::porf::AllocationRule;
use crate::valuation::ValuationSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Kept identities, at least 1.
    pub k_max: usize,
    /// Withdrawn identities; ignored without withdrawal.
    pub q_max: usize,
    pub allow_withdrawal: bool,
    /// Cap on kept plus withdrawn identities.
    pub max_total: Option<usize>,
    /// Whether the truth itself may be used as an identity type.
    pub include_truth: bool,
}

impl SearchLimits {
    pub fn fnpw(k_max: usize, q_max: usize) -> Self {
        SearchLimits {
            k_max,
            q_max,
            allow_withdrawal: true,
            max_total: None,
            include_truth: true,
        }
    }

    pub fn fnp(k_max: usize) -> Self {
        SearchLimits {
            k_max,
            q_max: 0,
            allow_withdrawal: false,
            max_total: None,
            include_truth: true,
        }
    }

    pub fn from_caps(caps: &Caps, allow_withdrawal: bool) -> Self {
        SearchLimits {
            k_max: caps.k_max,
            q_max: if allow_withdrawal { caps.q_max } else { 0 },
            allow_withdrawal,
            max_total: None,
            include_truth: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManipulationPlan {
    pub truth: ValuationSpec,
    pub others: Vec<ValuationSpec>,
    pub kept: Vec<ValuationSpec>,
    pub withdrawn: Vec<ValuationSpec>,
    /// Union of the kept identities' bundles.
    pub bundle: Bundle,
    /// Sum of the kept identities' payments.
    pub payment: Money,
    pub utility: Money,
    pub truthful_utility: Money,
    pub gain: Money,
}

impl ManipulationPlan {
    pub fn is_pure_fnp(&self) -> bool {
        self.withdrawn.is_empty()
    }

    /// Recomputes the gain from a fresh run.
    pub fn replay(&self, rule: &(impl AllocationRule + ?Sized)) -> Result<Money> {
        let m = self.truth.m();
        let others: Vec<&ValuationSpec> = self.others.iter().collect();
        let kept: Vec<&ValuationSpec> = self.kept.iter().collect();
        let withdrawn: Vec<&ValuationSpec> = self.withdrawn.iter().collect();
        let outcome = run_with_identities(rule, m, &others, &kept, &withdrawn)?;
        let (bundle, payment) = kept_share(&outcome, others.len(), kept.len());
        let truthful = truthful_utility(rule, &self.truth, &others)?;
        Ok(self.truth.value_of(bundle) - payment - truthful)
    }
}

fn run_with_identities(
    rule: &(impl AllocationRule + ?Sized),
    m: usize,
    others: &[&ValuationSpec],
    kept: &[&ValuationSpec],
    withdrawn: &[&ValuationSpec],
) -> Result<Outcome> {
    let agents: Vec<&ValuationSpec> = others.iter().chain(kept).chain(withdrawn).copied().collect();
    rule.allocate(m, &agents)
}

fn kept_share(outcome: &Outcome, offset: usize, k: usize) -> (Bundle, Money) {
    let m = outcome.bundle(offset).m();
    let mut mask = 0;
    let mut payment = Money::zero();
    for i in offset..offset + k {
        mask |= outcome.bundle(i).mask();
        payment += outcome.payment(i);
    }
    (Bundle::from_mask(m, mask), payment)
}

/// `v(truth, X) − P` when `truth` is reported alone, after `others`.
pub fn truthful_utility(rule: &(impl AllocationRule + ?Sized), truth: &ValuationSpec, others: &[&ValuationSpec]) -> Result<Money> {
    let mut agents = others.to_vec();
    agents.push(truth);
    let outcome = rule.allocate(truth.m(), &agents)?;
    let i = others.len();
    Ok(truth.value_of(outcome.bundle(i)) - outcome.payment(i))
}

/// A search context that remembers mechanism runs, so many truths can be
/// tested against the same identity combinations cheaply.
pub struct ManipulationFinder<'r, R: ?Sized> {
    rule: &'r R,
    runs: Mutex<HashMap<Vec<ValuationSpec>, Outcome>>,
}

impl<'r, R: AllocationRule + ?Sized> ManipulationFinder<'r, R> {
    pub fn new(rule: &'r R) -> Self {
        ManipulationFinder {
            rule,
            runs: Mutex::new(HashMap::new()),
        }
    }

    fn run(&self, m: usize, agents: Vec<&ValuationSpec>) -> Result<Outcome> {
        let key: Vec<ValuationSpec> = agents.iter().map(|v| (*v).clone()).collect();
        if let Some(o) = self.runs.lock().unwrap().get(&key) {
            return Ok(o.clone());
        }
        let outcome = self.rule.allocate(m, &agents)?;
        self.runs.lock().unwrap().insert(key, outcome.clone());
        Ok(outcome)
    }

    pub fn truthful_utility(&self, truth: &ValuationSpec, others: &[&ValuationSpec]) -> Result<Money> {
        let mut agents = others.to_vec();
        agents.push(truth);
        let outcome = self.run(truth.m(), agents)?;
        let i = others.len();
        Ok(truth.value_of(outcome.bundle(i)) - outcome.payment(i))
    }

    /// The most profitable manipulation, if any gains strictly. Ties go to
    /// fewer identities, then to the earlier combination (kept multisets in
    /// pool order, shorter first, then withdrawn multisets likewise).
    pub fn find(
        &self,
        truth: &ValuationSpec,
        others: &[&ValuationSpec],
        pool: &TypePool,
        limits: &SearchLimits,
    ) -> Result<Option<ManipulationPlan>> {
        let m = truth.m();
        if pool.m() != m {
            return Err(Error::MismatchedItems {
                expected: m,
                found: pool.m(),
            });
        }
        if limits.k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        let mut identities: Vec<&ValuationSpec> = pool.types().iter().collect();
        if limits.include_truth && !identities.contains(&truth) {
            identities.push(truth);
        }
        let q_max = if limits.allow_withdrawal { limits.q_max } else { 0 };
        let max_total = limits.max_total.unwrap_or(usize::MAX);
        let truthful = self.truthful_utility(truth, others)?;

        let kept_sets: Vec<Vec<usize>> = multiset_indices(identities.len(), limits.k_max)
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect();
        let withdrawn_sets = multiset_indices(identities.len(), q_max);

        let mut best: Option<(Money, usize, Vec<usize>, Vec<usize>, Outcome)> = None;
        for kept in &kept_sets {
            for withdrawn in &withdrawn_sets {
                let total = kept.len() + withdrawn.len();
                if total > max_total {
                    continue;
                }
                let mut agents: Vec<&ValuationSpec> = others.to_vec();
                agents.extend(kept.iter().map(|&i| identities[i]));
                agents.extend(withdrawn.iter().map(|&i| identities[i]));
                let outcome = self.run(m, agents)?;
                let (bundle, payment) = kept_share(&outcome, others.len(), kept.len());
                let gain = truth.value_of(bundle) - payment - &truthful;
                if !gain.is_positive() {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((g, t, ..)) => gain > *g || (gain == *g && total < *t),
                };
                if better {
                    best = Some((gain, total, kept.clone(), withdrawn.clone(), outcome));
                }
            }
        }

        Ok(best.map(|(gain, _, kept, withdrawn, outcome)| {
            let (bundle, payment) = kept_share(&outcome, others.len(), kept.len());
            ManipulationPlan {
                truth: truth.clone(),
                others: others.iter().map(|v| (*v).clone()).collect(),
                kept: kept.iter().map(|&i| identities[i].clone()).collect(),
                withdrawn: withdrawn.iter().map(|&i| identities[i].clone()).collect(),
                utility: truth.value_of(bundle) - &payment,
                bundle,
                payment,
                truthful_utility: truthful,
                gain,
            }
        }))
    }
}

/// One-shot search; see [`ManipulationFinder::find`].
pub fn find_fnpw_manipulation(
    rule: &(impl AllocationRule + ?Sized),
    truth: &ValuationSpec,
    others: &[&ValuationSpec],
    pool: &TypePool,
    limits: &SearchLimits,
) -> Result<Option<ManipulationPlan>> {
    ManipulationFinder::new(rule).find(truth, others, pool, limits)
}

/// Single-minded probe types that value `S` at exactly its price against
/// `others`, for every nonempty `S` with a positive price. Such a type gets
/// zero utility reporting truthfully, so any strictly positive gain is a
/// false-name violation.
pub fn probe_types(
    mech: &(impl crate::porf::PriceFunction + ?Sized),
    m: usize,
    others: &[&ValuationSpec],
) -> Result<Vec<ValuationSpec>> {
    let row = mech.price_row(m, others)?;
    Ok(Bundle::all(m)
        .skip(1)
        .filter(|s| row[s.mask() as usize].is_positive())
        .map(|s| ValuationSpec::single_minded(s, row[s.mask() as usize].clone()))
        .collect())
}
