//! Efficient allocation `U(S, Y)` by exhaustive search.
//!
//! The search runs agent by agent over the items still unassigned, so it
//! costs `n · 3^|S|` value lookups. Among welfare-maximizing assignments the
//! one with the fewest assigned items wins; remaining ties go to the
//! assignment whose list of `(agent position, bundle mask)` winners is
//! lexicographically smallest, so earlier agents win first.

use std::borrow::Cow;
use std::cmp::Ordering;

use crate::domain::{Bundle, Caps, Money};
use crate::error::{Error, Result};
use crate::valuation::ValuationSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationResult {
    pub total: Money,
    /// `assignment[i]` is the bundle of the `i`-th agent passed in.
    pub assignment: Vec<Bundle>,
}

/// `(welfare, items used)`; larger welfare first, then fewer items.
#[derive(Clone)]
struct Score {
    value: Money,
    items: usize,
}

impl Score {
    fn better_than(&self, other: &Score) -> bool {
        match self.value.cmp(&other.value) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.items < other.items,
        }
    }
}

struct Search<'a> {
    s: Bundle,
    tables: Vec<Cow<'a, [Money]>>,
    /// `best[k][R]`: optimum for agents `k..` over the items in `R ⊆ S`.
    best: Vec<Vec<Option<Score>>>,
}

impl<'a> Search<'a> {
    fn run(s: Bundle, agents: &[&'a ValuationSpec]) -> Result<Self> {
        let caps = Caps::global();
        caps.check_n(agents.len())?;
        caps.check_m(s.m())?;
        for v in agents {
            if v.m() != s.m() {
                return Err(Error::MismatchedItems {
                    expected: s.m(),
                    found: v.m(),
                });
            }
        }
        let n = agents.len();
        let width = 1usize << s.m();
        let tables: Vec<Cow<'a, [Money]>> = agents.iter().map(|v| v.table()).collect();
        let mut best: Vec<Vec<Option<Score>>> = vec![vec![None; width]; n + 1];
        for r in s.subsets() {
            best[n][r.mask() as usize] = Some(Score {
                value: Money::zero(),
                items: 0,
            });
        }
        for k in (0..n).rev() {
            for r in s.subsets() {
                let mut top: Option<Score> = None;
                for sub in r.subsets() {
                    let rest = best[k + 1][(r.mask() & !sub.mask()) as usize]
                        .as_ref()
                        .expect("subproblem solved");
                    let cand = Score {
                        value: &tables[k][sub.mask() as usize] + &rest.value,
                        items: sub.len() + rest.items,
                    };
                    if top.as_ref().map_or(true, |t| cand.better_than(t)) {
                        top = Some(cand);
                    }
                }
                best[k][r.mask() as usize] = top;
            }
        }
        Ok(Search { s, tables, best })
    }

    fn optimum(&self) -> &Score {
        self.best[0][self.s.mask() as usize].as_ref().unwrap()
    }

    fn reconstruct(&self) -> Vec<Bundle> {
        let n = self.tables.len();
        let m = self.s.m();
        let mut remaining = self.s;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let target = self.best[k][remaining.mask() as usize].as_ref().unwrap();
            let achieves = |sub: Bundle| {
                let rest = self.best[k + 1][(remaining.mask() & !sub.mask()) as usize]
                    .as_ref()
                    .unwrap();
                sub.len() + rest.items == target.items
                    && &self.tables[k][sub.mask() as usize] + &rest.value == target.value
            };
            // Subsets come in increasing mask order, empty first.
            let chosen = remaining
                .subsets()
                .skip(1)
                .find(|sub| achieves(*sub))
                .unwrap_or_else(|| Bundle::empty(m));
            debug_assert!(achieves(chosen));
            remaining = Bundle::from_mask(m, remaining.mask() & !chosen.mask());
            out.push(chosen);
        }
        out
    }
}

/// `U(S, Y)`: the maximum total value of assigning items of `s` to `agents`,
/// each item to at most one agent.
pub fn efficient_value(s: Bundle, agents: &[&ValuationSpec]) -> Result<Money> {
    if agents.is_empty() || s.is_empty() {
        return Ok(Money::zero());
    }
    Ok(Search::run(s, agents)?.optimum().value.clone())
}

/// `U(R, agents)` for every `R ⊆ G`, indexed by bundle mask, from one search.
pub fn efficient_value_table(m: usize, agents: &[&ValuationSpec]) -> Result<Vec<Money>> {
    let width = 1usize << m;
    if agents.is_empty() {
        Caps::global().check_m(m)?;
        return Ok(vec![Money::zero(); width]);
    }
    let search = Search::run(Bundle::grand(m), agents)?;
    Ok(search.best[0]
        .iter()
        .map(|s| s.as_ref().expect("every subset solved").value.clone())
        .collect())
}

/// An assignment achieving [`efficient_value`], with the documented tie-break.
pub fn efficient_allocation(s: Bundle, agents: &[&ValuationSpec]) -> Result<AllocationResult> {
    let search = Search::run(s, agents)?;
    Ok(AllocationResult {
        total: search.optimum().value.clone(),
        assignment: search.reconstruct(),
    })
}
