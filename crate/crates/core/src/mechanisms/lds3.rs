//! Leveled division set mechanism on three items `A, B, C`, with reserve
//! price 1, first level `{ABC}` and second level `{AB | C}, {A | BC}`.
//!
//! * Two or more agents value `ABC` at 3 or more: Vickrey auction on `ABC`.
//! * Nobody does: a dummy agent valuing each item at 1 joins, and VCG runs
//!   over the allocations where the dummy takes everything, or one division
//!   is split between two distinct parties (the dummy or real agents).
//!   Whatever the dummy wins stays unsold.
//! * Exactly one agent does: that agent alone wins, taking the better of
//!   `ABC` at price 3 and its result from the dummy auction run over
//!   everyone. Ties go to buying `ABC`.

use crate::domain::{Bundle, Money, Outcome, Profile};
use crate::error::{Error, Result};
use crate::porf::{run_rule, AllocationRule};
use crate::valuation::ValuationSpec;

const M: usize = 3;
const AB: u32 = 0b011;
const C: u32 = 0b100;
const A: u32 = 0b001;
const BC: u32 = 0b110;
const DIVISIONS: [(u32, u32); 2] = [(AB, C), (A, BC)];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Lds3;

/// Real agents are `0..n`; `None` is the dummy.
type Owner = Option<usize>;

#[derive(Debug, Clone)]
struct Candidate {
    parts: Vec<(Owner, u32)>,
}

impl Candidate {
    fn involves(&self, k: usize) -> bool {
        self.parts.iter().any(|(o, _)| *o == Some(k))
    }

    fn real_items(&self) -> u32 {
        self.parts
            .iter()
            .filter(|(o, _)| o.is_some())
            .map(|(_, b)| b.count_ones())
            .sum()
    }

    fn value_of(&self, owner: Owner, agents: &[&ValuationSpec]) -> Money {
        let b = |mask| Bundle::from_mask(M, mask);
        match owner {
            Some(k) => agents[k].value_of(b(
                self.parts.iter().filter(|(o, _)| *o == Some(k)).map(|(_, m)| m).fold(0, |x, y| x | y),
            )),
            None => Money::from_integer(
                self.parts
                    .iter()
                    .filter(|(o, _)| o.is_none())
                    .map(|(_, m)| m.count_ones() as i64)
                    .sum(),
            ),
        }
    }

    fn welfare_excluding(&self, skip: Option<usize>, agents: &[&ValuationSpec]) -> Money {
        let mut total = self.value_of(None, agents);
        for k in 0..agents.len() {
            if Some(k) != skip {
                total += self.value_of(Some(k), agents);
            }
        }
        total
    }
}

fn range(n: usize) -> Vec<Candidate> {
    let mut out = vec![Candidate {
        parts: vec![(None, AB | C)],
    }];
    for (p, q) in DIVISIONS {
        for (mine, dummy) in [(p, q), (q, p)] {
            for k in 0..n {
                out.push(Candidate {
                    parts: vec![(Some(k), mine), (None, dummy)],
                });
            }
        }
    }
    for (p, q) in DIVISIONS {
        for k in 0..n {
            for l in 0..n {
                if k != l {
                    out.push(Candidate {
                        parts: vec![(Some(k), p), (Some(l), q)],
                    });
                }
            }
        }
    }
    out
}

/// Welfare-maximizing candidate; ties go to fewer items for real agents,
/// then to the earliest candidate.
fn best<'a>(cands: impl Iterator<Item = &'a Candidate>, skip: Option<usize>, agents: &[&ValuationSpec]) -> (usize, Money) {
    let mut top: Option<(usize, Money, u32)> = None;
    for (idx, c) in cands.enumerate() {
        let w = c.welfare_excluding(skip, agents);
        let items = c.real_items();
        let better = match &top {
            None => true,
            Some((_, tw, ti)) => w > *tw || (w == *tw && items < *ti),
        };
        if better {
            top = Some((idx, w, items));
        }
    }
    let (idx, w, _) = top.expect("the range is never empty");
    (idx, w)
}

/// Bundles and Clarke payments of the dummy auction.
fn dummy_auction(agents: &[&ValuationSpec]) -> (Vec<Bundle>, Vec<Money>) {
    let n = agents.len();
    let cands = range(n);
    let (chosen_idx, _) = best(cands.iter(), None, agents);
    let chosen = &cands[chosen_idx];
    let mut bundles = vec![Bundle::empty(M); n];
    let mut payments = vec![Money::zero(); n];
    for k in 0..n {
        if !chosen.involves(k) {
            continue;
        }
        let mask = chosen
            .parts
            .iter()
            .filter(|(o, _)| *o == Some(k))
            .fold(0, |acc, (_, b)| acc | b);
        bundles[k] = Bundle::from_mask(M, mask);
        let (_, without) = best(cands.iter().filter(|c| !c.involves(k)), Some(k), agents);
        payments[k] = without - chosen.welfare_excluding(Some(k), agents);
    }
    (bundles, payments)
}

impl AllocationRule for Lds3 {
    fn rule_name(&self) -> String {
        "lds3".into()
    }

    fn allocate(&self, m: usize, agents: &[&ValuationSpec]) -> Result<Outcome> {
        if m != M {
            return Err(Error::InvalidArgument(format!("lds3 needs exactly 3 items, got {m}")));
        }
        crate::domain::Caps::global().check_n(agents.len())?;
        for v in agents {
            if v.m() != M {
                return Err(Error::MismatchedItems {
                    expected: M,
                    found: v.m(),
                });
            }
        }
        let n = agents.len();
        let ids: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let grand = Bundle::grand(M);
        let reserve = Money::from_integer(3);
        let grand_values: Vec<Money> = agents.iter().map(|v| v.value_of(grand)).collect();
        let high: Vec<usize> = (0..n).filter(|&k| grand_values[k] >= reserve).collect();

        let mut bundles = vec![Bundle::empty(M); n];
        let mut payments = vec![Money::zero(); n];
        match high.len() {
            0 => {
                (bundles, payments) = dummy_auction(agents);
            }
            1 => {
                let k = high[0];
                let (b, p) = dummy_auction(agents);
                let buy = &grand_values[k] - &reserve;
                let fallback = agents[k].value_of(b[k]) - &p[k];
                if buy >= fallback {
                    bundles[k] = grand;
                    payments[k] = reserve;
                } else {
                    bundles[k] = b[k];
                    payments[k] = p[k].clone();
                }
            }
            _ => {
                let winner = (0..n)
                    .reduce(|w, k| if grand_values[k] > grand_values[w] { k } else { w })
                    .unwrap();
                let second = (0..n)
                    .filter(|&k| k != winner)
                    .map(|k| &grand_values[k])
                    .max()
                    .cloned()
                    .unwrap();
                bundles[winner] = grand;
                payments[winner] = second;
            }
        }
        Outcome::new(ids, bundles, payments)
    }
}

pub fn run_lds3(profile: &Profile) -> Result<Outcome> {
    run_rule(&Lds3, profile)
}
