//! Price-oriented, rationing-free execution.
//!
//! A mechanism is a price function `χ(S, O)`: the price an agent pays for
//! bundle `S` when the other reported types are the multiset `O`. Each agent
//! buys a utility-maximizing bundle at its own price row.
//!
//! Demand ties go to the smallest bundle (fewest items, then lexicographic).
//! When agents' first choices collide, [`run_auction`] searches the
//! agents' tied optimal bundles in that order for the first pairwise
//! disjoint selection; only if none exists is the price function infeasible
//! on the profile.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::domain::{Bundle, Caps, Money, Outcome, Profile};
use crate::error::{Error, Result};
use crate::valuation::ValuationSpec;

pub trait PriceFunction: Send + Sync {
    fn name(&self) -> String;

    /// `χ(S, others)` for every `S`, indexed by bundle mask.
    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>>;

    fn price(&self, s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
        Ok(self.price_row(s.m(), others)?.swap_remove(s.mask() as usize))
    }
}

impl<P: PriceFunction + ?Sized> PriceFunction for &P {
    fn name(&self) -> String {
        (**self).name()
    }
    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        (**self).price_row(m, others)
    }
    fn price(&self, s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
        (**self).price(s, others)
    }
}

impl<P: PriceFunction + ?Sized> PriceFunction for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        (**self).price_row(m, others)
    }
    fn price(&self, s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
        (**self).price(s, others)
    }
}

impl<P: PriceFunction + ?Sized> PriceFunction for Arc<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        (**self).price_row(m, others)
    }
    fn price(&self, s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
        (**self).price(s, others)
    }
}

/// A mechanism viewed only through its allocation and payment rule. Every
/// price function is one; the 3-item LDS mechanism is one without being a
/// price function.
pub trait AllocationRule: Send + Sync {
    fn rule_name(&self) -> String;

    /// Runs the mechanism on `agents` (in order). Ids in the returned
    /// outcome are `1..=n`.
    fn allocate(&self, m: usize, agents: &[&ValuationSpec]) -> Result<Outcome>;
}

impl<P: PriceFunction + ?Sized> AllocationRule for P {
    fn rule_name(&self) -> String {
        self.name()
    }

    fn allocate(&self, m: usize, agents: &[&ValuationSpec]) -> Result<Outcome> {
        Ok(run_positional(self, m, agents)?.0)
    }
}

/// Runs any allocation rule on a profile, keeping its agent ids.
pub fn run_rule(rule: &(impl AllocationRule + ?Sized), profile: &Profile) -> Result<Outcome> {
    let outcome = rule
        .allocate(profile.m(), &profile.valuations())
        .map_err(|e| name_agents(e, profile))?;
    outcome.with_ids(profile.ids())
}

/// Replaces 1-based positions in an infeasibility witness by agent ids.
fn name_agents(e: Error, profile: &Profile) -> Error {
    match e {
        Error::InfeasibleAllocation { item, agents } => {
            let ids = profile.ids();
            let agents = agents
                .iter()
                .map(|a| match a.parse::<usize>() {
                    Ok(k) if (1..=ids.len()).contains(&k) => ids[k - 1].clone(),
                    _ => a.clone(),
                })
                .collect();
            Error::InfeasibleAllocation { item, agents }
        }
        other => other,
    }
}

/// Rows are keyed by the sorted multiset of other types.
pub struct CachedPrices<P> {
    inner: P,
    rows: RwLock<HashMap<(usize, Vec<ValuationSpec>), Arc<Vec<Money>>>>,
}

impl<P: PriceFunction> CachedPrices<P> {
    pub fn new(inner: P) -> Self {
        CachedPrices {
            inner,
            rows: RwLock::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn cached_rows(&self) -> usize {
        self.rows.read().unwrap().len()
    }

    pub fn shared_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Arc<Vec<Money>>> {
        let key = (m, canonical_multiset(others));
        if let Some(row) = self.rows.read().unwrap().get(&key) {
            return Ok(row.clone());
        }
        let row = Arc::new(self.inner.price_row(m, others)?);
        self.rows.write().unwrap().insert(key, row.clone());
        Ok(row)
    }
}

impl<P: PriceFunction> PriceFunction for CachedPrices<P> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn price_row(&self, m: usize, others: &[&ValuationSpec]) -> Result<Vec<Money>> {
        Ok(self.shared_row(m, others)?.as_ref().clone())
    }

    fn price(&self, s: Bundle, others: &[&ValuationSpec]) -> Result<Money> {
        Ok(self.shared_row(s.m(), others)?[s.mask() as usize].clone())
    }
}

/// Sorted owned copy of a multiset of types.
pub fn canonical_multiset(types: &[&ValuationSpec]) -> Vec<ValuationSpec> {
    let mut sorted: Vec<&ValuationSpec> = types.to_vec();
    sorted.sort();
    sorted.into_iter().cloned().collect()
}

fn utility(table: &[Money], prices: &[Money], b: Bundle) -> Money {
    &table[b.mask() as usize] - &prices[b.mask() as usize]
}

/// Every utility-maximizing bundle, in tie-break order.
pub fn demand_set(v: &ValuationSpec, prices: &[Money]) -> Vec<Bundle> {
    let m = v.m();
    debug_assert_eq!(prices.len(), 1 << m);
    let table = v.table();
    let mut best: Option<Money> = None;
    let mut set = Vec::new();
    for b in Bundle::all(m) {
        let u = utility(&table, prices, b);
        match best.as_ref().map(|x| u.cmp(x)) {
            None | Some(std::cmp::Ordering::Greater) => {
                best = Some(u);
                set.clear();
                set.push(b);
            }
            Some(std::cmp::Ordering::Equal) => set.push(b),
            Some(std::cmp::Ordering::Less) => {}
        }
    }
    set.sort_by_key(|b| b.tie_order());
    set
}

/// The agent's chosen bundle at `prices` (indexed by mask).
pub fn demand(v: &ValuationSpec, prices: &[Money]) -> Bundle {
    demand_set(v, prices)[0]
}

/// A completed run: the outcome and the price row each agent faced.
#[derive(Debug, Clone)]
pub struct MechanismRun {
    pub profile: Profile,
    pub outcome: Outcome,
    pub price_rows: Vec<Vec<Money>>,
}

impl MechanismRun {
    pub fn utility(&self, position: usize) -> Money {
        let v = &self.profile.agents()[position].valuation;
        v.value_of(self.outcome.bundle(position)) - self.outcome.payment(position)
    }
}

pub fn run_auction(mech: &(impl PriceFunction + ?Sized), profile: &Profile) -> Result<MechanismRun> {
    let valuations = profile.valuations();
    let (outcome, price_rows) = run_positional(mech, profile.m(), &valuations).map_err(|e| name_agents(e, profile))?;
    Ok(MechanismRun {
        profile: profile.clone(),
        outcome: outcome.with_ids(profile.ids())?,
        price_rows,
    })
}

fn run_positional(
    mech: &(impl PriceFunction + ?Sized),
    m: usize,
    agents: &[&ValuationSpec],
) -> Result<(Outcome, Vec<Vec<Money>>)> {
    let caps = Caps::global();
    caps.check_m(m)?;
    caps.check_n(agents.len())?;
    let n = agents.len();
    let mut rows = Vec::with_capacity(n);
    let mut choices = Vec::with_capacity(n);
    let mut others: Vec<&ValuationSpec> = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n {
        if agents[i].m() != m {
            return Err(Error::MismatchedItems {
                expected: m,
                found: agents[i].m(),
            });
        }
        others.clear();
        others.extend(agents.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v));
        let row = mech.price_row(m, &others)?;
        choices.push(demand_set(agents[i], &row));
        rows.push(row);
    }
    let picks = select_disjoint(&choices).ok_or_else(|| first_conflict(&choices))?;
    let allocation: Vec<Bundle> = picks.iter().zip(&choices).map(|(&k, c)| c[k]).collect();
    let payments: Vec<Money> = allocation
        .iter()
        .zip(&rows)
        .map(|(b, row)| if b.is_empty() { Money::zero() } else { row[b.mask() as usize].clone() })
        .collect();
    let ids = (1..=n).map(|i| i.to_string()).collect();
    let outcome = Outcome::new(ids, allocation, payments)?;
    Ok((outcome, rows))
}

/// Lexicographically first vector of choice indices whose bundles are
/// pairwise disjoint.
fn select_disjoint(choices: &[Vec<Bundle>]) -> Option<Vec<usize>> {
    fn go(choices: &[Vec<Bundle>], taken: u32, picks: &mut Vec<usize>) -> bool {
        let k = picks.len();
        if k == choices.len() {
            return true;
        }
        for (idx, b) in choices[k].iter().enumerate() {
            if b.mask() & taken == 0 {
                picks.push(idx);
                if go(choices, taken | b.mask(), picks) {
                    return true;
                }
                picks.pop();
            }
        }
        false
    }
    let mut picks = Vec::with_capacity(choices.len());
    go(choices, 0, &mut picks).then_some(picks)
}

fn first_conflict(choices: &[Vec<Bundle>]) -> Error {
    let firsts: Vec<Bundle> = choices.iter().map(|c| c[0]).collect();
    let mut taken = 0u32;
    for (i, b) in firsts.iter().enumerate() {
        let clash = taken & b.mask();
        if clash != 0 {
            let item = clash.trailing_zeros() as usize;
            let agents = firsts
                .iter()
                .enumerate()
                .filter(|(_, x)| x.contains(item))
                .map(|(j, _)| (j + 1).to_string())
                .collect();
            return Error::InfeasibleAllocation { item, agents };
        }
        taken |= b.mask();
        let _ = i;
    }
    unreachable!("first choices were disjoint")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(m: usize, s: &str) -> Bundle {
        Bundle::parse(m, s).unwrap()
    }

    fn money(s: &str) -> Money {
        Money::from_decimal(s).unwrap()
    }

    fn row(entries: &[(&str, &str)]) -> Vec<Money> {
        let mut r = vec![Money::zero(); 4];
        for (bundle, price) in entries {
            r[b(2, bundle).mask() as usize] = money(price);
        }
        r
    }

    struct ConstantZero;

    impl PriceFunction for ConstantZero {
        fn name(&self) -> String {
            "zero".into()
        }
        fn price_row(&self, m: usize, _others: &[&ValuationSpec]) -> Result<Vec<Money>> {
            Ok(vec![Money::zero(); 1 << m])
        }
    }

    #[test]
    fn demand_examples() {
        let sm_a = ValuationSpec::sm(2, "A", "1").unwrap();
        assert_eq!(demand(&sm_a, &row(&[])), b(2, "A"));
        assert_eq!(demand(&sm_a, &row(&[("A", "2"), ("AB", "2")])), Bundle::empty(2));
        let sm_b = ValuationSpec::sm(2, "B", "4").unwrap();
        assert_eq!(demand(&sm_b, &row(&[("B", "3"), ("AB", "5")])), b(2, "B"));
    }

    #[test]
    fn broken_price_function_is_infeasible() {
        let p = Profile::from_valuations(
            2,
            [ValuationSpec::sm(2, "A", "1").unwrap(), ValuationSpec::sm(2, "A", "1").unwrap()],
        )
        .unwrap();
        match run_auction(&ConstantZero, &p) {
            Err(Error::InfeasibleAllocation { item, agents }) => {
                assert_eq!(item, 0);
                assert_eq!(agents, vec!["1".to_string(), "2".to_string()]);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn joint_tie_break_separates_tied_agents() {
        // Both agents are indifferent between A and B at zero prices.
        let unit = ValuationSpec::two_item(money("1"), money("1"), money("1"));
        let p = Profile::from_valuations(2, [unit.clone(), unit]).unwrap();
        let run = run_auction(&ConstantZero, &p).unwrap();
        assert_eq!(run.outcome.allocation(), &[b(2, "A"), b(2, "B")]);
    }

    #[test]
    fn cached_prices_agree_with_inner() {
        let cached = CachedPrices::new(ConstantZero);
        let v = ValuationSpec::sm(2, "A", "1").unwrap();
        let w = ValuationSpec::sm(2, "B", "1").unwrap();
        assert_eq!(cached.price_row(2, &[&v, &w]).unwrap(), vec![Money::zero(); 4]);
        cached.price_row(2, &[&w, &v]).unwrap();
        assert_eq!(cached.cached_rows(), 1);
    }
}
