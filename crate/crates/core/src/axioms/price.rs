use std::collections::HashMap;

use super::{owned, TypePool};
use crate::domain::{Bundle, Money, Profile};
use crate::error::{Error, Result};
use crate::porf::{run_auction, PriceFunction};
use crate::report::{CheckReport, Counterexample};
use crate::valuation::ValuationSpec;
use crate::welfare::efficient_value_table;

/// Discounts for larger bundles: `χ(S1,O) + χ(S2,O) ≥ χ(S1∪S2,O)` for all
/// disjoint `S1, S2`.
pub fn check_dlb(mech: &(impl PriceFunction + ?Sized), m: usize, others: &[&ValuationSpec]) -> Result<CheckReport> {
    let row = mech.price_row(m, others)?;
    let mut cases = 0;
    for s1 in Bundle::all(m) {
        for s2 in s1.complement().subsets() {
            cases += 1;
            let union = s1.mask() | s2.mask();
            let lhs = &row[s1.mask() as usize] + &row[s2.mask() as usize];
            if lhs < row[union as usize] {
                return Ok(CheckReport::fail(
                    Counterexample::Dlb {
                        others: owned(others),
                        s1,
                        s2,
                        price_s1: row[s1.mask() as usize].clone(),
                        price_s2: row[s2.mask() as usize].clone(),
                        price_union: row[union as usize].clone(),
                    },
                    cases,
                ));
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

/// Prices increase with agents: `χ(S, O ∪ {extra}) ≥ χ(S, O)` for all `S`.
pub fn check_pia(
    mech: &(impl PriceFunction + ?Sized),
    m: usize,
    others: &[&ValuationSpec],
    extra: &ValuationSpec,
) -> Result<CheckReport> {
    let before = mech.price_row(m, others)?;
    let mut grown = others.to_vec();
    grown.push(extra);
    let after = mech.price_row(m, &grown)?;
    for s in Bundle::all(m) {
        let i = s.mask() as usize;
        if after[i] < before[i] {
            return Ok(CheckReport::fail(
                Counterexample::Pia {
                    others: owned(others),
                    extra: extra.clone(),
                    bundle: s,
                    price_before: before[i].clone(),
                    price_after: after[i].clone(),
                },
                i as u64 + 1,
            ));
        }
    }
    Ok(CheckReport::pass(1 << m))
}

/// DLB on every multiset of at most `max_n` pool types, and PIA for each
/// of those multisets and every extra pool type.
pub fn check_snsaw(mech: &(impl PriceFunction + ?Sized), pool: &TypePool, max_n: usize) -> Result<CheckReport> {
    let m = pool.m();
    let mut report = CheckReport::pass(0);
    for others in pool.multisets(max_n) {
        let dlb = check_dlb(mech, m, &others)?;
        report = merge(report, dlb);
        if !report.passed() {
            return Ok(report);
        }
        for extra in pool.types() {
            let pia = check_pia(mech, m, &others, extra)?;
            report = merge(report, pia);
            if !report.passed() {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

fn merge(acc: CheckReport, next: CheckReport) -> CheckReport {
    acc.and_then(|| next)
}

/// No superadditive price increase with withdrawal on the agent set
/// `agents`: with `B_i` the bundles won when the mechanism runs on them,
/// `Σ_{i∈Y} χ(B_i, O∖{i}) ≥ χ(∪ B_i, O∖Y∖Z)` for all disjoint `Y ≠ ∅, Z`.
pub fn check_nsaw(mech: &(impl PriceFunction + ?Sized), m: usize, agents: &[&ValuationSpec]) -> Result<CheckReport> {
    check_superadditivity(mech, m, agents, true)
}

/// The same condition with `Z` empty.
pub fn check_nsa(mech: &(impl PriceFunction + ?Sized), m: usize, agents: &[&ValuationSpec]) -> Result<CheckReport> {
    check_superadditivity(mech, m, agents, false)
}

/// [`check_nsaw`] on every multiset of at most `max_n` pool types.
pub fn check_nsaw_pool(mech: &(impl PriceFunction + ?Sized), pool: &TypePool, max_n: usize) -> Result<CheckReport> {
    let mut report = CheckReport::pass(0);
    for agents in pool.multisets(max_n) {
        report = merge(report, check_nsaw(mech, pool.m(), &agents)?);
        if !report.passed() {
            break;
        }
    }
    Ok(report)
}

/// [`check_nsa`] on every multiset of at most `max_n` pool types.
pub fn check_nsa_pool(mech: &(impl PriceFunction + ?Sized), pool: &TypePool, max_n: usize) -> Result<CheckReport> {
    let mut report = CheckReport::pass(0);
    for agents in pool.multisets(max_n) {
        report = merge(report, check_nsa(mech, pool.m(), &agents)?);
        if !report.passed() {
            break;
        }
    }
    Ok(report)
}

fn check_superadditivity(
    mech: &(impl PriceFunction + ?Sized),
    m: usize,
    agents: &[&ValuationSpec],
    withdrawal: bool,
) -> Result<CheckReport> {
    let n = agents.len();
    if n > 12 {
        return Err(Error::CapExceeded {
            what: "agent count",
            value: n,
            cap: 12,
        });
    }
    let profile = Profile::from_valuations(m, agents.iter().map(|v| (*v).clone()))?;
    let run = run_auction(mech, &profile)?;
    let bundles = run.outcome.allocation();
    let payments = run.outcome.payments();
    let mut remaining_rows: HashMap<u32, Vec<Money>> = HashMap::new();
    let mut cases = 0;
    let codes = if withdrawal { 3usize.pow(n as u32) } else { 1 << n };
    let base = if withdrawal { 3 } else { 2 };
    for code in 0..codes {
        // Per agent digit: 0 stays, 1 kept identity (Y), 2 withdrawn (Z).
        let mut kept = Vec::new();
        let mut withdrawn = Vec::new();
        let mut c = code;
        for i in 0..n {
            match c % base {
                1 => kept.push(i),
                2 => withdrawn.push(i),
                _ => {}
            }
            c /= base;
        }
        if kept.is_empty() {
            continue;
        }
        cases += 1;
        let union = kept.iter().fold(0u32, |acc, &i| acc | bundles[i].mask());
        if union == 0 {
            continue;
        }
        let removed = kept.iter().chain(&withdrawn).fold(0u32, |acc, &i| acc | (1 << i));
        if !remaining_rows.contains_key(&removed) {
            let rest: Vec<&ValuationSpec> = (0..n).filter(|i| removed & (1 << i) == 0).map(|i| agents[i]).collect();
            remaining_rows.insert(removed, mech.price_row(m, &rest)?);
        }
        let union_price = &remaining_rows[&removed][union as usize];
        let kept_price_sum: Money = kept.iter().map(|&i| &payments[i]).sum();
        if &kept_price_sum < union_price {
            return Ok(CheckReport::fail(
                Counterexample::Nsaw {
                    agents: owned(agents),
                    bundles: kept.iter().map(|&i| bundles[i]).collect(),
                    kept,
                    withdrawn,
                    kept_price_sum,
                    union: Bundle::from_mask(m, union),
                    union_price: union_price.clone(),
                },
                cases,
            ));
        }
    }
    Ok(CheckReport::pass(cases))
}

/// `U(S1,Y) + U(S2,Y) ≥ U(S1∪S2,Y) + U(S1∩S2,Y)` for every multiset `Y` of
/// at most `max_n` pool types and all bundle pairs.
pub fn check_submodularity(pool: &TypePool, max_n: usize) -> Result<CheckReport> {
    let m = pool.m();
    let mut cases = 0;
    for agents in pool.multisets(max_n) {
        let u = efficient_value_table(m, &agents)?;
        for s1 in Bundle::all(m) {
            for s2 in Bundle::all(m) {
                cases += 1;
                let (a, b) = (s1.mask() as usize, s2.mask() as usize);
                let lhs = &u[a] + &u[b];
                let rhs = &u[a | b] + &u[a & b];
                if lhs < rhs {
                    return Ok(CheckReport::fail(
                        Counterexample::Submodularity {
                            agents: owned(&agents),
                            s1,
                            s2,
                            lhs,
                            rhs,
                        },
                        cases,
                    ));
                }
            }
        }
    }
    Ok(CheckReport::pass(cases))
}
